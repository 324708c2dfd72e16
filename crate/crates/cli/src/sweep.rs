use std::collections::HashMap;
use std::time::Instant;

use mchi_core::charsum::max_char_sum;
use mchi_core::dirichlet::admits_primitive_order_dividing;
use mchi_core::pretentious::delta_g;
use mchi_core::{build_group, enumerate_characters, CharacterFilter};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::export::{format_f64, format_opt, sig17, sig17_opt, Tabular};
use crate::CliError;

/// One primitive character and its maximal partial sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub q: u64,
    pub char_index: u64,
    pub order: u64,
    pub parity: i8,
    #[serde(rename = "M_chi", serialize_with = "sig17")]
    pub m_chi: f64,
    pub argmax_t: u64,
    /// `M / (sqrt q log q)`.
    #[serde(serialize_with = "sig17")]
    pub ratio_pv: f64,
    /// `M / (sqrt q (log q)^(1 - delta_g) (log log q)^(-1/4))`, odd `g >= 3` only.
    #[serde(serialize_with = "sig17_opt")]
    pub ratio_odd_order_upper: Option<f64>,
    /// `M / (sqrt q (log log q)^(1 - delta_g) (log log log q)^(-1/4))`,
    /// odd `g >= 3` and `q > e^e` only.
    #[serde(serialize_with = "sig17_opt")]
    pub ratio_odd_order_lower: Option<f64>,
    /// Largest `ratio_pv` from this record to the end of the sweep, so it
    /// never increases down the file.
    #[serde(serialize_with = "sig17")]
    pub envelope_pv: f64,
    #[serde(serialize_with = "sig17_opt")]
    pub elapsed: Option<f64>,
}

/// The three envelope ratios for `M(chi) = m` at conductor `q` and order `g`.
pub fn envelope_ratios(m: f64, q: u64, g: u64) -> (f64, Option<f64>, Option<f64>) {
    let sq = (q as f64).sqrt();
    let l1 = (q as f64).ln();
    let l2 = l1.ln();
    let pv = m / (sq * l1);
    let Ok(delta) = delta_g(g) else {
        return (pv, None, None);
    };
    let upper = m / (sq * l1.powf(1.0 - delta) * l2.powf(-0.25));
    let l3 = l2.ln();
    let lower = (l3 > 0.0).then(|| m / (sq * l2.powf(1.0 - delta) * l3.powf(-0.25)));
    (pv, Some(upper), lower)
}

impl Tabular for SweepRecord {
    const COLUMNS: &'static [&'static str] = &[
        "q",
        "char_index",
        "order",
        "parity",
        "M_chi",
        "argmax_t",
        "ratio_pv",
        "ratio_odd_order_upper",
        "ratio_odd_order_lower",
        "envelope_pv",
        "elapsed",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            self.char_index.to_string(),
            self.order.to_string(),
            self.parity.to_string(),
            format_f64(self.m_chi),
            self.argmax_t.to_string(),
            format_f64(self.ratio_pv),
            format_opt(self.ratio_odd_order_upper),
            format_opt(self.ratio_odd_order_lower),
            format_f64(self.envelope_pv),
            format_opt(self.elapsed),
        ]
    }
}

fn records_for(q: u64, config: &ExperimentConfig) -> Result<Vec<SweepRecord>, CliError> {
    if let Some(g) = config.order {
        if !admits_primitive_order_dividing(q, g) {
            return Ok(Vec::new());
        }
    }
    let group = build_group(q)?;
    let filter = CharacterFilter { order_equals: config.order, primitive_only: true, ..Default::default() };
    // conjugate characters share M(chi) and its argmax
    let mut seen: HashMap<Vec<u64>, (f64, u64)> = HashMap::new();
    let mut out = Vec::new();
    for chi in enumerate_characters(&group, &filter) {
        if chi.is_principal() {
            continue;
        }
        let start = Instant::now();
        let (m, argmax) = match seen.get(chi.conj().exponents()) {
            Some(&hit) => hit,
            None => {
                let r = max_char_sum(&chi)?;
                (r.value, r.argmax_t)
            }
        };
        seen.insert(chi.exponents().to_vec(), (m, argmax));
        let (pv, upper, lower) = envelope_ratios(m, q, chi.order());
        out.push(SweepRecord {
            q,
            char_index: chi.index(),
            order: chi.order(),
            parity: chi.parity(),
            m_chi: m,
            argmax_t: argmax,
            ratio_pv: pv,
            ratio_odd_order_upper: upper,
            ratio_odd_order_lower: lower,
            envelope_pv: pv,
            elapsed: config.timing.then(|| start.elapsed().as_secs_f64()),
        });
    }
    out.sort_by_key(|r| r.char_index);
    Ok(out)
}

/// One record per primitive character with conductor in `[q_min, q_max]`
/// (and exact order `config.order` if set), ordered by `(q, char_index)`
/// whatever the worker count.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRecord>, CliError> {
    config.validate()?;
    let qs: Vec<u64> = (config.q_min.max(3)..=config.q_max).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let per_q: Vec<Result<Vec<SweepRecord>, CliError>> = pool.install(|| qs.par_iter().map(|&q| records_for(q, config)).collect());
    let mut records = Vec::new();
    for chunk in per_q {
        records.extend(chunk?);
    }
    let mut running = f64::NEG_INFINITY;
    for r in records.iter_mut().rev() {
        running = running.max(r.ratio_pv);
        r.envelope_pv = running;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(q_max: u64, order: Option<u64>) -> ExperimentConfig {
        ExperimentConfig { q_min: 1, q_max, order, ..Default::default() }
    }

    #[test]
    fn quadratic_sweep_matches_hand_values() {
        let recs = run_sweep(&cfg(10, Some(2))).unwrap();
        let qs: Vec<u64> = recs.iter().map(|r| r.q).collect();
        assert_eq!(qs, vec![3, 4, 5, 7, 8, 8]);
        let mut ms: Vec<f64> = recs.iter().map(|r| r.m_chi).collect();
        // (n/3), chi_4, (n/5), (n/7), then the even and odd characters mod 8
        ms[4..].sort_by(f64::total_cmp);
        assert!(ms.iter().zip([1.0, 1.0, 1.0, 2.0, 1.0, 2.0]).all(|(a, b)| (a - b).abs() < 1e-12), "{ms:?}");
        assert_eq!(ms.len(), 6);
        assert!(recs.iter().all(|r| r.ratio_odd_order_upper.is_none()));
    }

    #[test]
    fn cubic_characters_are_even_and_ratios_recompute() {
        let recs = run_sweep(&cfg(100, Some(3))).unwrap();
        assert!(!recs.is_empty());
        for r in &recs {
            assert_eq!(r.parity, 1);
            let (pv, up, low) = envelope_ratios(r.m_chi, r.q, r.order);
            assert!((pv - r.ratio_pv).abs() <= 1e-12 * pv);
            assert!((up.unwrap() - r.ratio_odd_order_upper.unwrap()).abs() <= 1e-12 * up.unwrap());
            assert_eq!(low.is_some(), r.q >= 16);
        }
        assert!(recs.windows(2).all(|w| (w[0].q, w[0].char_index) < (w[1].q, w[1].char_index)));
        assert!(recs.windows(2).all(|w| w[0].envelope_pv >= w[1].envelope_pv));
    }

    #[test]
    fn empty_range_and_thread_independence() {
        assert!(run_sweep(&ExperimentConfig { q_min: 50, q_max: 10, ..Default::default() }).unwrap().is_empty());
        let one = run_sweep(&ExperimentConfig { threads: 1, ..cfg(400, None) }).unwrap();
        let four = run_sweep(&ExperimentConfig { threads: 4, ..cfg(400, None) }).unwrap();
        assert_eq!(one, four);
    }
}
