use std::f64::consts::TAU;

use mchi_core::halasz::{halasz_bound_check, HalaszReport};
use mchi_core::{CMFunction, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::CliError;

/// Completely multiplicative `f` with `f(p)` uniform on the unit circle for
/// `p <= bound`. Member `i` draws from ChaCha8 stream `i` of `seed`, so the
/// corpus can be generated in any order.
pub fn unimodular(seed: u64, member: u64, bound: u64) -> CMFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    CMFunction::from_fn(bound, |_| Complex64::from_polar(1.0, TAU * rng.gen::<f64>())).expect("unimodular values")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub size: u64,
    pub x: f64,
    pub y: f64,
    pub grid: f64,
}

/// Halász reports for every corpus member at each `T`, indexed `[t][member]`.
pub fn halasz_corpus(spec: &CorpusSpec, t_values: &[f64]) -> Result<Vec<Vec<HalaszReport>>, CliError> {
    let bound = spec.x.max(spec.y).floor() as u64;
    let per_member: Vec<Result<Vec<HalaszReport>, CliError>> = (0..spec.size)
        .into_par_iter()
        .map(|i| {
            let f = unimodular(spec.seed, i, bound);
            t_values.iter().map(|&t| Ok(halasz_bound_check(&f, spec.x, spec.y, t, spec.grid)?)).collect()
        })
        .collect();
    let per_member = per_member.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((0..t_values.len()).map(|j| per_member.iter().map(|m| m[j]).collect()).collect())
}

/// Largest ratio per `T`.
pub fn max_ratios(reports: &[Vec<HalaszReport>]) -> Vec<f64> {
    reports.iter().map(|rs| rs.iter().map(|r| r.ratio).fold(0.0, f64::max)).collect()
}
