//! Pretentious distances between completely multiplicative functions of
//! modulus at most one, the twisted minimum over `|t| <= T`, and the main terms
//! of the distance lower bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::gcd;
use crate::dirichlet::DirichletCharacter;
use crate::error::{domain, Result};
use crate::sieve::primes_up_to;

const MODULUS_SLACK: f64 = 1e-12;

/// A completely multiplicative `f` with `|f(p)| <= 1`, stored on primes `p <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMFunction {
    bound: u64,
    primes: Vec<u64>,
    values: Vec<Complex64>,
}

impl CMFunction {
    pub fn from_fn(bound: u64, mut f: impl FnMut(u64) -> Complex64) -> Result<Self> {
        let primes = primes_up_to(bound);
        let mut values = Vec::with_capacity(primes.len());
        for &p in &primes {
            let v = f(p);
            if !(v.norm() <= 1.0 + MODULUS_SLACK) {
                return domain(format!("|f({p})| = {} exceeds 1", v.norm()));
            }
            values.push(v);
        }
        Ok(CMFunction { bound, primes, values })
    }

    pub fn constant(bound: u64, c: Complex64) -> Result<Self> {
        Self::from_fn(bound, |_| c)
    }

    pub fn one(bound: u64) -> Self {
        Self::constant(bound, Complex64::new(1.0, 0.0)).expect("unit constant")
    }

    pub fn from_character(chi: &DirichletCharacter, bound: u64) -> Self {
        Self::from_fn(bound, |p| chi.eval(p as i64)).expect("character values are bounded")
    }

    /// `p -> p^{it}`, i.e. the function `n^{it}`.
    pub fn archimedean(bound: u64, t: f64) -> Self {
        Self::one(bound).twist(-t)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at_prime(&self, p: u64) -> Option<Complex64> {
        self.primes.binary_search(&p).ok().map(|i| self.values[i])
    }

    /// `f(n)` for `n >= 1` whose prime factors are all at most the bound.
    pub fn eval(&self, n: u64) -> Result<Complex64> {
        if n == 0 {
            return domain("f is defined on positive integers");
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for (p, a) in crate::arith::factorize(n) {
            match self.at_prime(p) {
                Some(v) => acc *= v.powu(a),
                None => return domain(format!("prime {p} lies beyond the bound {}", self.bound)),
            }
        }
        Ok(acc)
    }

    /// `p -> f(p) p^{-it}`.
    pub fn twist(&self, t: f64) -> Self {
        let values = self
            .primes
            .iter()
            .zip(&self.values)
            .map(|(&p, &v)| v * Complex64::from_polar(1.0, -t * (p as f64).ln()))
            .collect();
        CMFunction { bound: self.bound, primes: self.primes.clone(), values }
    }

    pub fn conj(&self) -> Self {
        CMFunction { bound: self.bound, primes: self.primes.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// `p -> f(p) conj(g(p))` on the common range of primes.
    pub fn mul_conj(&self, g: &CMFunction) -> Self {
        let n = self.primes.len().min(g.primes.len());
        CMFunction {
            bound: self.bound.min(g.bound),
            primes: self.primes[..n].to_vec(),
            values: self.values[..n].iter().zip(&g.values[..n]).map(|(a, b)| a * b.conj()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult {
    /// The squared distance.
    pub value: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_prime: Option<Vec<(u64, f64)>>,
}

fn check_range(f: &CMFunction, y: f64) -> Result<usize> {
    if y > f.bound as f64 {
        return domain(format!("y = {y} exceeds the bound {} of f", f.bound));
    }
    Ok(f.primes.partition_point(|&p| p as f64 <= y))
}

/// `D(f, g; y)^2 = sum_{p <= y} (1 - Re f(p) conj(g(p))) / p`.
pub fn distance_sq(f: &CMFunction, g: &CMFunction, y: f64) -> Result<DistanceResult> {
    distance_impl(f, g, y, false)
}

pub fn distance_sq_with_breakdown(f: &CMFunction, g: &CMFunction, y: f64) -> Result<DistanceResult> {
    distance_impl(f, g, y, true)
}

fn distance_impl(f: &CMFunction, g: &CMFunction, y: f64, breakdown: bool) -> Result<DistanceResult> {
    let n = check_range(f, y)?.min(check_range(g, y)?);
    let mut value = 0.0;
    let mut per_prime = breakdown.then(|| Vec::with_capacity(n));
    for i in 0..n {
        let p = f.primes[i];
        let term = (1.0 - (f.values[i] * g.values[i].conj()).re) / p as f64;
        value += term;
        if let Some(v) = per_prime.as_mut() {
            v.push((p, term));
        }
    }
    Ok(DistanceResult { value, y, per_prime })
}

/// Minimum of `D(f, n^{it}; y)^2` over `|t| <= T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistedMinimum {
    pub value: f64,
    pub argmin_t: f64,
    /// Best value on the grid before refinement.
    pub grid_value: f64,
    /// `2 * resolution`: how far the grid minimum can sit above the true one.
    pub grid_error: f64,
    pub grid_points: usize,
}

const GOLDEN_TOL: f64 = 1e-6;

struct Twister<'a> {
    inv_p: Vec<f64>,
    log_p: Vec<f64>,
    values: &'a [Complex64],
}

impl Twister<'_> {
    fn at(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.inv_p.len() {
            let z = self.values[i] * Complex64::from_polar(1.0, -t * self.log_p[i]);
            s += (1.0 - z.re) * self.inv_p[i];
        }
        s
    }

    /// Values at `t0 + j h`, `j = 0..n`, by stepping each prime's phasor.
    fn on_grid(&self, t0: f64, h: f64, n: usize) -> Vec<f64> {
        let mut acc = vec![0.0; n];
        let base: f64 = self.inv_p.iter().sum();
        for i in 0..self.inv_p.len() {
            let w = self.inv_p[i];
            let mut z = self.values[i] * Complex64::from_polar(1.0, -t0 * self.log_p[i]);
            let step = Complex64::from_polar(1.0, -h * self.log_p[i]);
            for a in acc.iter_mut() {
                *a += z.re * w;
                z *= step;
            }
        }
        acc.iter().map(|a| base - a).collect()
    }

    fn golden(&self, mut a: f64, mut b: f64) -> (f64, f64) {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (self.at(c), self.at(d));
        while b - a > GOLDEN_TOL {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = self.at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = self.at(d);
            }
        }
        if fc <= fd {
            (c, fc)
        } else {
            (d, fd)
        }
    }
}

/// Grid search at spacing `resolution / log y` over `[-T, T]` followed by
/// golden-section refinement of every grid local minimum that could still
/// beat the best grid value. Ties go to the smallest `t`.
pub fn min_twisted_distance(f: &CMFunction, y: f64, t_range: f64, resolution: f64) -> Result<TwistedMinimum> {
    if !(t_range > 0.0) || !(resolution > 0.0) {
        return domain("T and the resolution must be positive");
    }
    let n = check_range(f, y)?;
    let tw = Twister {
        inv_p: f.primes[..n].iter().map(|&p| 1.0 / p as f64).collect(),
        log_p: f.primes[..n].iter().map(|&p| (p as f64).ln()).collect(),
        values: &f.values[..n],
    };
    let h = resolution / y.ln().max(1.0);
    let steps = (t_range / h).floor() as i64;
    // grid: -T, -steps h, ..., steps h, T
    let mut ts: Vec<f64> = Vec::with_capacity(2 * steps as usize + 3);
    let mut vals = Vec::with_capacity(ts.capacity());
    let interior = tw.on_grid(-(steps as f64) * h, h, 2 * steps as usize + 1);
    if (steps as f64) * h < t_range {
        ts.push(-t_range);
        vals.push(tw.at(-t_range));
    }
    for (j, v) in interior.into_iter().enumerate() {
        ts.push((j as i64 - steps) as f64 * h);
        vals.push(v);
    }
    if (steps as f64) * h < t_range {
        ts.push(t_range);
        vals.push(tw.at(t_range));
    }

    let (mut best_t, mut best) = (ts[0], vals[0]);
    for (&t, &v) in ts.iter().zip(&vals) {
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let grid_value = best;
    // |d/dt D^2| <= sum log p / p, so a bracket of width 2h around a grid
    // point cannot undercut that point by more than lip * h
    let lip: f64 = tw.log_p.iter().zip(&tw.inv_p).map(|(l, i)| l * i).sum();
    let last = ts.len() - 1;
    for j in 0..=last {
        let v = vals[j];
        let left = if j > 0 { vals[j - 1] } else { f64::INFINITY };
        let right = if j < last { vals[j + 1] } else { f64::INFINITY };
        if v > left || v > right || v - lip * h > best {
            continue;
        }
        let a = if j > 0 { ts[j - 1] } else { ts[j] };
        let b = if j < last { ts[j + 1] } else { ts[j] };
        if b <= a {
            continue;
        }
        let (t, fv) = tw.golden(a, b);
        if fv < best || (fv == best && t < best_t) {
            best = fv;
            best_t = t;
        }
    }
    Ok(TwistedMinimum { value: best, argmin_t: best_t, grid_value, grid_error: 2.0 * resolution, grid_points: ts.len() })
}

/// `delta_g = 1 - (g / pi) sin(pi / g)` for odd `g >= 3`.
pub fn delta_g(g: u64) -> Result<f64> {
    if g < 3 || g % 2 == 0 {
        return domain(format!("delta_g needs an odd g >= 3, got {g}"));
    }
    let g = g as f64;
    Ok(1.0 - g / PI * (PI / g).sin())
}

fn loglog(y: f64) -> Result<f64> {
    let l2 = y.ln().ln();
    if !(l2 > 0.0) {
        return domain(format!("log log y must be positive (y = {y})"));
    }
    Ok(l2)
}

/// Parameters shared by the distance lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub y: f64,
    /// Twist range, `(log y)^{-alpha}` unless overridden.
    pub t_range: f64,
    pub alpha: f64,
    pub g: u64,
    pub k: u64,
    pub k_star: u64,
    /// Conductor of the character being compared against.
    pub m: u64,
    pub beta: u8,
    pub epsilon: f64,
}

impl BoundParams {
    pub fn new(y: f64, alpha: f64, g: u64, k: u64, m: u64) -> Result<Self> {
        if g == 0 || k == 0 || m == 0 {
            return domain("g, k and m must be positive");
        }
        let t_range = y.ln().powf(-alpha);
        if !(t_range > 0.0) || !t_range.is_finite() {
            return domain("T = (log y)^{-alpha} must be a positive real");
        }
        Ok(BoundParams { y, t_range, alpha, g, k, k_star: k / gcd(k, g), m, beta: 0, epsilon: 0.0 })
    }

    /// Marks `m` as exceptional with Siegel slack `epsilon`.
    pub fn exceptional(mut self, epsilon: f64) -> Self {
        self.beta = 1;
        self.epsilon = epsilon;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MindistRhs {
    /// `(delta_g + alpha pi^2 (1 - delta_g) / (4 (g k*)^2)) log log y`.
    pub main: f64,
    /// `beta * epsilon * log m`.
    pub siegel: f64,
    /// `main - siegel`.
    pub value: f64,
    /// `log log m`, the scale of the unhoused lower-order term.
    pub slack_scale: f64,
}

pub fn mindist_rhs(params: &BoundParams) -> Result<MindistRhs> {
    let l2 = loglog(params.y)?;
    let dg = delta_g(params.g)?;
    let gk = (params.g * params.k_star) as f64;
    let main = (dg + params.alpha * PI * PI * (1.0 - dg) / (4.0 * gk * gk)) * l2;
    let siegel = params.beta as f64 * params.epsilon * (params.m as f64).ln();
    let slack_scale = (params.m as f64).ln().max(1.0).ln().max(0.0);
    Ok(MindistRhs { main, siegel, value: main - siegel, slack_scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Upper2Rhs {
    /// `1 - (1 - delta_g) u / tan u` with `u = pi / (g k*)`.
    pub coefficient: f64,
    /// `coefficient * log log y`.
    pub main: f64,
    /// `delta_g + pi^2 (1 - delta_g) / (4 (g k*)^2)`, never above `coefficient`.
    pub strengthened: f64,
}

pub fn upper2_rhs(g: u64, k: u64, y: f64) -> Result<Upper2Rhs> {
    let dg = delta_g(g)?;
    if k < 2 || k % 2 == 1 {
        return domain(format!("k must be even and at least 2, got {k}"));
    }
    let gk = (g * (k / gcd(k, g))) as f64;
    if gk < 6.0 {
        return domain("g k* must be at least 6");
    }
    let l2 = loglog(y)?;
    let u = PI / gk;
    let coefficient = 1.0 - (1.0 - dg) * u / u.tan();
    Ok(Upper2Rhs { coefficient, main: coefficient * l2, strengthened: dg + PI * PI * (1.0 - dg) / (4.0 * gk * gk) })
}
