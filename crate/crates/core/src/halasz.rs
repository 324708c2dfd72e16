//! Logarithmic means of completely multiplicative functions over friable
//! integers, their Dirichlet series near `s = 1`, and the band functional
//! `H_T(alpha)` that controls those means.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::pretentious::{min_twisted_distance, CMFunction, TwistedMinimum};
use crate::report::BoundReport;
use crate::sieve::SpfSieve;

/// `zeta(3/2)`.
pub const ZETA_THREE_HALVES: f64 = 2.612_375_348_685_488;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `sum_{n <= x, n y-friable} f(n) / n`, in increasing `n`.
pub fn friable_log_mean(f: &CMFunction, x: f64, y: f64) -> Result<Complex64> {
    if !(x >= 1.0) {
        return domain("x must be at least 1");
    }
    let limit = x.floor() as u64;
    if (f.bound() as f64) < x.min(y).floor() {
        return domain(format!("f is only known up to {}, but primes up to {} are needed", f.bound(), x.min(y).floor()));
    }
    let sieve = SpfSieve::new(limit);
    let mut vals = vec![Complex64::new(0.0, 0.0); limit as usize + 1];
    let mut s = Complex64::new(0.0, 0.0);
    if limit >= 1 {
        vals[1] = ONE;
        s = ONE;
    }
    for n in 2..=limit {
        let p = sieve.smallest_prime_factor(n);
        // primes above y are sent to zero, which removes non-friable n
        let fp = if p as f64 <= y { f.at_prime(p).expect("bound checked") } else { Complex64::new(0.0, 0.0) };
        let v = fp * vals[(n / p) as usize];
        vals[n as usize] = v;
        s += v / n as f64;
    }
    Ok(s)
}

fn prime_count_up_to(f: &CMFunction, cutoff: f64) -> usize {
    f.primes().partition_point(|&p| p as f64 <= cutoff)
}

/// `log prod_{p <= P} (1 - f(p) / p^{1+s})^{-1}`.
pub fn log_euler_f(f: &CMFunction, s: Complex64, cutoff: f64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return domain("need Re(s) > 0");
    }
    if cutoff > f.bound() as f64 {
        return domain(format!("cutoff {cutoff} exceeds the bound {} of f", f.bound()));
    }
    let n = prime_count_up_to(f, cutoff);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&p, &v) in f.primes()[..n].iter().zip(&f.values()[..n]) {
        let term = v * (-(ONE + s) * (p as f64).ln()).exp();
        acc -= (ONE - term).ln();
    }
    Ok(acc)
}

/// `F(1+s) = prod_{p <= P} (1 - f(p) / p^{1+s})^{-1}`.
pub fn euler_f(f: &CMFunction, s: Complex64, cutoff: f64) -> Result<Complex64> {
    Ok(log_euler_f(f, s, cutoff)?.exp())
}

/// Fast `|F(1 + sigma + it)|` over many points for one function.
struct Series {
    log_p: Vec<f64>,
    values: Vec<Complex64>,
}

impl Series {
    fn new(f: &CMFunction, cutoff: f64) -> Self {
        let n = prime_count_up_to(f, cutoff);
        Series { log_p: f.primes()[..n].iter().map(|&p| (p as f64).ln()).collect(), values: f.values()[..n].to_vec() }
    }

    fn log_abs(&self, sigma: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (&l, &v) in self.log_p.iter().zip(&self.values) {
            let z = v * Complex64::from_polar((-(1.0 + sigma) * l).exp(), -t * l);
            acc -= (ONE - z).norm().ln();
        }
        acc
    }

    /// `log prod (1 - |f(p)| p^{-1-sigma})^{-1}`, an upper bound for `log |F|` at real part `sigma`.
    fn log_majorant(&self, sigma: f64) -> f64 {
        self.log_p
            .iter()
            .zip(&self.values)
            .map(|(&l, v)| -(-v.norm() * (-(1.0 + sigma) * l).exp()).ln_1p())
            .sum()
    }
}

/// Result of [`h_t`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HtValue {
    /// Sum of the band maxima of `|F(1+s)/s|^2` for `|k| <= K`.
    pub h_sq: f64,
    /// Analytic bound on the bands `|k| > K`.
    pub tail: f64,
    /// `sqrt(h_sq + tail)`.
    pub h: f64,
    pub bands: u64,
}

/// Default band cutoff `ceil(10 / T)`.
pub fn default_band_cutoff(t_range: f64) -> u64 {
    (10.0 / t_range).ceil() as u64
}

/// `H_T(alpha)^2` with bands `|k| <= K`, each rectangle
/// `{alpha <= sigma <= 1, |t - kT| <= T/2}` maximized on a `grid x grid`
/// lattice (edges included) followed by a shrinking compass search.
pub fn h_t(f: &CMFunction, alpha: f64, t_range: f64, bands: u64, grid: usize) -> Result<HtValue> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(t_range > 0.0 && t_range <= 1.0) {
        return domain("alpha and T must lie in (0, 1]");
    }
    if bands < 1 || grid < 2 {
        return domain("need at least one band and a grid of at least 2 points per side");
    }
    let series = Series::new(f, f.bound() as f64);
    let objective = |sigma: f64, t: f64| 2.0 * series.log_abs(sigma, t) - (sigma * sigma + t * t).ln();
    let mut h_sq = 0.0;
    for k in -(bands as i64)..=bands as i64 {
        let (t_lo, t_hi) = (k as f64 * t_range - t_range / 2.0, k as f64 * t_range + t_range / 2.0);
        let mut best = (f64::NEG_INFINITY, alpha, t_lo);
        for i in 0..grid {
            let sigma = alpha + (1.0 - alpha) * i as f64 / (grid - 1) as f64;
            for j in 0..grid {
                let t = t_lo + (t_hi - t_lo) * j as f64 / (grid - 1) as f64;
                let v = objective(sigma, t);
                if v > best.0 {
                    best = (v, sigma, t);
                }
            }
        }
        let (mut ds, mut dt) = ((1.0 - alpha) / (grid - 1) as f64, t_range / (grid - 1) as f64);
        for _ in 0..40 {
            let mut moved = false;
            for (a, b) in [(ds, 0.0), (-ds, 0.0), (0.0, dt), (0.0, -dt)] {
                let (s, t) = ((best.1 + a).clamp(alpha, 1.0), (best.2 + b).clamp(t_lo, t_hi));
                let v = objective(s, t);
                if v > best.0 {
                    best = (v, s, t);
                    moved = true;
                }
            }
            if !moved {
                ds /= 2.0;
                dt /= 2.0;
            }
        }
        h_sq += best.0.exp();
    }
    // |F(1+s)| <= prod (1 - |f(p)|/p^{1+alpha})^{-1} and |s| >= (|k| - 1/2) T
    let z = series.log_majorant(alpha).exp();
    let tail = 2.0 * z * z / (t_range * t_range * (bands as f64 - 0.5));
    Ok(HtValue { h_sq, tail, h: (h_sq + tail).sqrt(), bands })
}

/// `(1/log x) int_{1/log x}^1 H_T(alpha) / alpha d alpha` by Simpson's rule in `log alpha`.
pub fn mv_integral(f: &CMFunction, x: f64, t_range: f64, bands: u64, grid: usize, nodes: usize) -> Result<f64> {
    let lx = x.ln();
    if !(lx > 1.0) {
        return domain("need log x > 1");
    }
    let n = nodes.max(2) & !1;
    let (v0, v1) = (-lx.ln(), 0.0);
    let h = (v1 - v0) / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * h_t(f, (v0 + i as f64 * h).exp(), t_range, bands, grid)?.h;
    }
    Ok(acc * h / 3.0 / lx)
}

/// Both sides of the friable logarithmic-mean bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalaszReport {
    pub lhs: f64,
    /// `(log y) exp(-M(f; y, T))`.
    pub rhs_main: f64,
    /// `1 / T`.
    pub rhs_tail: f64,
    pub ratio: f64,
    pub x: f64,
    pub y: f64,
    pub t_range: f64,
    pub resolution: f64,
    pub twisted_min: f64,
    pub argmin_t: f64,
}

pub fn halasz_bound_check(f: &CMFunction, x: f64, y: f64, t_range: f64, resolution: f64) -> Result<HalaszReport> {
    if !(t_range > 0.0 && t_range <= 1.0) {
        return domain("T must lie in (0, 1]");
    }
    let lhs = friable_log_mean(f, x, y)?.norm();
    let m: TwistedMinimum = min_twisted_distance(f, y, t_range, resolution)?;
    let rhs_main = y.ln() * (-m.value).exp();
    let rhs_tail = 1.0 / t_range;
    Ok(HalaszReport {
        lhs,
        rhs_main,
        rhs_tail,
        ratio: lhs / (rhs_main + rhs_tail),
        x,
        y,
        t_range,
        resolution,
        twisted_min: m.value,
        argmin_t: m.argmin_t,
    })
}

/// `max_{|t| <= T} |F(1 + alpha + it)|` (primes up to `y`) against
/// `(log y) exp(-M(f; y, T))`. With `counterexample` set, `T < alpha` is
/// allowed so that the failure of the bound there can be exhibited.
pub fn max_f_distance_check(f: &CMFunction, y: f64, alpha: f64, t_range: f64, resolution: f64, counterexample: bool) -> Result<BoundReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain("alpha must lie in (0, 1]");
    }
    if !(t_range > 0.0) || !(resolution > 0.0) {
        return domain("T and the resolution must be positive");
    }
    if t_range < alpha && !counterexample {
        return domain(format!("T = {t_range} is below alpha = {alpha}"));
    }
    if y > f.bound() as f64 {
        return domain(format!("y = {y} exceeds the bound {} of f", f.bound()));
    }
    let series = Series::new(f, y);
    let h = resolution / y.ln().max(1.0);
    let steps = (t_range / h).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..=2 * steps {
        let t = (-t_range + j as f64 * h).min(t_range);
        let v = series.log_abs(alpha, t);
        if v > best.0 {
            best = (v, t);
        }
    }
    let m = min_twisted_distance(f, y, t_range, resolution)?;
    let lhs = best.0.exp();
    let rhs = y.ln() * (-m.value).exp();
    Ok(BoundReport::new("max-f-distance", lhs, rhs)
        .with_param("y", y)
        .with_param("alpha", alpha)
        .with_param("T", t_range)
        .with_param("argmax_t", best.1)
        .with_param("twisted_min", m.value)
        .with_param("counterexample", if counterexample { 1.0 } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn minus_one(bound: u64) -> CMFunction {
        CMFunction::constant(bound, Complex64::new(-1.0, 0.0)).unwrap()
    }

    #[test]
    fn friable_mean_examples() {
        let one = CMFunction::one(100);
        assert_abs_diff_eq!(friable_log_mean(&one, 10.0, 10.0).unwrap().re, 7381.0 / 2520.0, epsilon = 1e-14);
        assert_abs_diff_eq!(friable_log_mean(&one, 100.0, 2.0).unwrap().re, 127.0 / 64.0, epsilon = 1e-14);
        let h: f64 = (1..=100).map(|n| 1.0 / n as f64).sum();
        assert_abs_diff_eq!(friable_log_mean(&one, 100.0, 100.0).unwrap().re, h, epsilon = 1e-12);

        let lam = minus_one(10_000);
        let oracle: f64 = (1..=10_000u64)
            .map(|n| {
                let omega: u32 = factorize(n).iter().map(|&(_, a)| a).sum();
                let sign = if omega % 2 == 0 { 1.0 } else { -1.0 };
                sign / n as f64
            })
            .sum();
        let got = friable_log_mean(&lam, 1e4, 1e4).unwrap();
        assert_abs_diff_eq!(got.re, oracle, epsilon = 1e-12);
        assert!(got.norm() < 0.1);
        assert!(friable_log_mean(&CMFunction::one(10), 100.0, 100.0).is_err());
    }

    #[test]
    fn euler_f_examples() {
        let zero = CMFunction::constant(100, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(euler_f(&zero, Complex64::new(0.5, 3.0), 100.0).unwrap(), ONE);
        let one = CMFunction::one(1000);
        let z2 = euler_f(&one, ONE, 1000.0).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-3 && z2.re < PI * PI / 6.0);
        let f = CMFunction::from_fn(500, |p| Complex64::from_polar(1.0, p as f64)).unwrap();
        let s = Complex64::new(0.3, 1.7);
        let a = euler_f(&f, s.conj(), 500.0).unwrap();
        let b = euler_f(&f.conj(), s, 500.0).unwrap().conj();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn h_t_for_trivial_series() {
        let zero = CMFunction::constant(50, Complex64::new(0.0, 0.0)).unwrap();
        let k0 = h_t(&zero, 0.25, 1.0, 1, 5).unwrap();
        // band 0 peaks at 1/alpha^2; bands +-1 at 1/|alpha + i/2|^2
        assert_abs_diff_eq!(k0.h_sq, 16.0 + 2.0 / (0.0625 + 0.25), epsilon = 1e-9);

        let r = h_t(&zero, 0.5, 1.0, 200, 5).unwrap();
        let exact = 4.0 + 2.0 * (1..1_000_000).map(|k| 1.0 / (0.25 + (k as f64 - 0.5).powi(2))).sum::<f64>();
        assert!(r.h_sq <= exact && exact <= r.h_sq + r.tail);
        let r2 = h_t(&zero, 0.5, 1.0, 400, 5).unwrap();
        assert!(r2.h_sq - r.h_sq <= r.tail);
    }

    #[test]
    fn h_t_nonincreasing_in_alpha() {
        let f = CMFunction::from_fn(200, |p| Complex64::from_polar(1.0, (p * p) as f64)).unwrap();
        let mut prev = f64::INFINITY;
        for alpha in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let v = h_t(&f, alpha, 0.5, 20, 6).unwrap().h_sq;
            assert!(v <= prev * (1.0 + 1e-6), "{alpha}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn halasz_examples() {
        let one = CMFunction::one(10_000);
        let r = halasz_bound_check(&one, 1e4, 1e4, 1.0, 0.05).unwrap();
        let h: f64 = (1..=10_000).map(|n| 1.0 / n as f64).sum();
        assert_abs_diff_eq!(r.lhs, h, epsilon = 1e-9);
        assert_abs_diff_eq!(r.ratio, h / (1e4f64.ln() + 1.0), epsilon = 1e-9);
        assert!(r.ratio <= 1.1);

        let tw = CMFunction::archimedean(10_000, 0.3);
        let r = halasz_bound_check(&tw, 1e4, 1e4, 0.5, 0.05).unwrap();
        assert!(r.twisted_min < 1e-9);
        assert!(r.ratio <= 1.0);
        assert!(halasz_bound_check(&one, 1e4, 1e4, 1.5, 0.05).is_err());
    }

    #[test]
    fn max_f_examples() {
        let zero = CMFunction::constant(1000, Complex64::new(0.0, 0.0)).unwrap();
        let r = max_f_distance_check(&zero, 1000.0, 0.5, 1.0, 0.05, false).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-15);
        assert!(max_f_distance_check(&zero, 1000.0, 0.5, 0.1, 0.05, false).is_err());

        let y = 1e5;
        let mu = minus_one(100_000);
        let r = max_f_distance_check(&mu, y, 0.5, 1.0 / y.ln(), 0.05, true).unwrap();
        assert!(r.lhs >= 1.0 / ZETA_THREE_HALVES - 1e-3);
        assert!(r.rhs_main < 2.0 / y.ln().sqrt());
    }

    #[test]
    fn zeta_three_halves_by_summation() {
        let n = 4_000_000u64;
        let partial: f64 = (1..=n).map(|k| (k as f64).powf(-1.5)).sum();
        // tail of sum k^{-3/2} beyond n is about 2 / sqrt(n)
        assert!((partial + 2.0 / (n as f64).sqrt() - ZETA_THREE_HALVES).abs() < 1e-6);
    }
}
