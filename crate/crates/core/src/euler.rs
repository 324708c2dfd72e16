//! Truncated Euler products at `s = 1`, Mertens constants of residue classes
//! and the character-sum lower-bound functional built from `L(1, chi conj(psi))`.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{euler_phi, gcd_i64};
use crate::charsum::max_char_sum;
use crate::dirichlet::{build_group, enumerate_characters, CharacterFilter, DirichletCharacter};
use crate::error::{domain, Result};
use crate::report::BoundReport;
use crate::sieve::primes_up_to;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Frozen `C` in `|k_chi(p)| <= C / p`. A pilot scan over `p <= 10^4` and
/// roots of unity of order at most 12 peaks at 1.0807 (at `p = 2`).
pub const K_CHI_CONSTANT: f64 = 1.1;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Primes up to a cutoff, shared between Euler products over many characters.
#[derive(Debug, Clone)]
pub struct EulerPrimes {
    cutoff: f64,
    primes: Vec<u64>,
    // -log(1 - 1/p) and -log(1 + 1/p), for real characters
    minus: Vec<f64>,
    plus: Vec<f64>,
}

impl EulerPrimes {
    pub fn new(cutoff: f64) -> Self {
        let primes = primes_up_to(cutoff.max(0.0).floor() as u64);
        let minus = primes.iter().map(|&p| -(-1.0 / p as f64).ln_1p()).collect();
        let plus = primes.iter().map(|&p| -(1.0 / p as f64).ln_1p()).collect();
        EulerPrimes { cutoff, primes, minus, plus }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `log prod_{p <= X} (1 - chi(p)/p)^{-1}`, principal branch per factor.
    pub fn log_l1(&self, chi: &DirichletCharacter) -> Result<Complex64> {
        if chi.is_principal() {
            return domain("the Euler product diverges for a principal character");
        }
        let q = chi.modulus();
        let table = chi.period_table();
        let roots = chi.root_table();
        let mut s = Complex64::new(0.0, 0.0);
        if chi.order() <= 2 {
            let mut r = 0.0;
            for (i, &p) in self.primes.iter().enumerate() {
                match table[(p % q) as usize] {
                    0 => r += self.minus[i],
                    1 => r += self.plus[i],
                    _ => {}
                }
            }
            s.re = r;
        } else {
            for &p in &self.primes {
                let k = table[(p % q) as usize];
                if k != u32::MAX {
                    s -= (ONE - roots[k as usize] / p as f64).ln();
                }
            }
        }
        Ok(s)
    }

    pub fn truncated_l1(&self, chi: &DirichletCharacter) -> Result<Complex64> {
        Ok(self.log_l1(chi)?.exp())
    }

    /// `log K(1, chi)` truncated at the cutoff: `-sum log(1 - k_chi(p)/p)`.
    pub fn log_k1(&self, chi: &DirichletCharacter) -> Complex64 {
        let q = chi.modulus();
        let table = chi.period_table();
        let roots = chi.root_table();
        let mut s = Complex64::new(0.0, 0.0);
        for &p in &self.primes {
            let k = table[(p % q) as usize];
            if k == u32::MAX || k == 0 {
                continue;
            }
            s -= (ONE - k_value(roots[k as usize], p) / p as f64).ln();
        }
        s
    }
}

/// `prod_{p <= X} (1 - chi(p)/p)^{-1}`.
pub fn truncated_l1(chi: &DirichletCharacter, cutoff: f64) -> Result<Complex64> {
    if !(cutoff >= 2.0) {
        return domain("the truncation point must be at least 2");
    }
    EulerPrimes::new(cutoff).truncated_l1(chi)
}

/// `sum_{n <= N} chi(n) / n`.
pub fn partial_sum_l1(chi: &DirichletCharacter, big_n: u64) -> Complex64 {
    let q = chi.modulus();
    let table = chi.period_table();
    let roots = chi.root_table();
    // accumulate per residue class, then weight by the character once
    let mut class = vec![0.0f64; q as usize];
    for n in (1..=big_n).rev() {
        class[(n % q) as usize] += 1.0 / n as f64;
    }
    class
        .iter()
        .zip(&table)
        .filter(|(_, &k)| k != u32::MAX)
        .map(|(&w, &k)| roots[k as usize] * w)
        .sum()
}

fn k_value(c: Complex64, p: u64) -> Complex64 {
    if c == ONE {
        return Complex64::new(0.0, 0.0);
    }
    let pf = p as f64;
    // (1 - 1/p)^{-c} = exp(-c log(1 - 1/p))
    let power = (-c * (-1.0 / pf).ln_1p()).exp();
    pf * (ONE - (ONE - c / pf) * power)
}

/// `k_chi(p) = p (1 - (1 - chi(p)/p)(1 - 1/p)^{-chi(p)})`; zero when `chi(p)` is 0 or 1.
pub fn k_chi(chi: &DirichletCharacter, p: u64) -> Complex64 {
    k_value(chi.eval(p as i64), p)
}

/// `k` evaluated at an arbitrary value `c` in place of `chi(p)`.
pub fn k_at(c: Complex64, p: u64) -> Complex64 {
    k_value(c, p)
}

fn check_reduced(m: u64, a: i64) -> Result<()> {
    if m == 0 || gcd_i64(a, m as i64) != 1 {
        return domain(format!("{a} is not a reduced residue modulo {m}"));
    }
    Ok(())
}

/// The Mertens constant `C_m(a)` with `K` and `L` truncated at `X`.
pub fn mertens_constant(m: u64, a: i64, cutoff: f64) -> Result<f64> {
    mertens_constant_with(m, a, &EulerPrimes::new(cutoff))
}

pub fn mertens_constant_with(m: u64, a: i64, primes: &EulerPrimes) -> Result<f64> {
    check_reduced(m, a)?;
    let all = mertens_constants(m, primes)?;
    let r = a.rem_euclid(m as i64);
    Ok(all.into_iter().find(|&(b, _)| b == r).map(|(_, c)| c).expect("every reduced class is listed"))
}

/// `C_m(a)` for every reduced `a` in `[0, m)`, sharing the per-character Euler products.
pub fn mertens_constants(m: u64, primes: &EulerPrimes) -> Result<Vec<(i64, f64)>> {
    if m == 0 {
        return domain("the modulus must be positive");
    }
    if primes.cutoff() < 1e3 {
        return domain("the truncation point must be at least 1000");
    }
    let group = build_group(m)?;
    let phi = group.phi() as f64;
    let classes: Vec<i64> = (0..m as i64).filter(|&a| gcd_i64(a, m as i64) == 1).collect();
    let mut sums = vec![Complex64::new(0.0, 0.0); classes.len()];
    for chi in enumerate_characters(&group, &CharacterFilter::default()) {
        if chi.is_principal() {
            continue;
        }
        let log_ratio = primes.log_k1(&chi) - primes.log_l1(&chi)?;
        for (s, &a) in sums.iter_mut().zip(&classes) {
            *s += chi.eval(a).conj() * log_ratio;
        }
    }
    let principal = (EULER_GAMMA + (phi / m as f64).ln()) / phi;
    classes
        .into_iter()
        .zip(sums)
        .map(|(a, s)| {
            if s.im.abs() / phi >= 1e-6 {
                return domain(format!("C_{m}({a}) came out non-real: imaginary part {}", s.im / phi));
            }
            Ok((a, s.re / phi - principal))
        })
        .collect()
}

/// `sum_{p <= x, p = a (m)} -log(1 - 1/p)` against its main term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MertensAPResult {
    pub m: u64,
    pub a: i64,
    pub x: f64,
    pub value: f64,
    /// `log log x / phi(m)`.
    pub main_term: f64,
    /// `value - main_term`, an estimate of `-C_m(a)`.
    pub constant_estimate: f64,
    /// Whether `m <= log x`, the range where the asymptotic is uniform.
    pub in_range: bool,
}

pub fn mertens_ap(x: f64, m: u64, a: i64) -> Result<MertensAPResult> {
    mertens_ap_over(&primes_up_to(x.max(0.0).floor() as u64), x, m, a)
}

/// As [`mertens_ap`] with the primes up to `x` supplied.
pub fn mertens_ap_over(primes: &[u64], x: f64, m: u64, a: i64) -> Result<MertensAPResult> {
    check_reduced(m, a)?;
    if !(x >= 3.0) {
        return domain("x must be at least 3");
    }
    let r = a.rem_euclid(m as i64) as u64;
    let value: f64 = primes
        .iter()
        .take_while(|&&p| p as f64 <= x)
        .filter(|&&p| p % m == r)
        .map(|&p| -(-1.0 / p as f64).ln_1p())
        .sum();
    let main_term = x.ln().ln() / euler_phi(m) as f64;
    Ok(MertensAPResult { m, a, x, value, main_term, constant_estimate: value - main_term, in_range: m as f64 <= x.ln() })
}

/// Both sides of `M(chi) + sqrt q >> sqrt(q m) / phi(m) |L(1, chi conj(psi))|`.
pub fn charsum_l1_functional(chi: &DirichletCharacter, psi: &DirichletCharacter, cutoff: f64) -> Result<BoundReport> {
    charsum_l1_functional_with(chi, psi, &EulerPrimes::new(cutoff))
}

pub fn charsum_l1_functional_with(chi: &DirichletCharacter, psi: &DirichletCharacter, primes: &EulerPrimes) -> Result<BoundReport> {
    if chi.parity() == psi.parity() {
        return domain("chi and psi must have opposite parity");
    }
    if !chi.is_primitive() || !psi.is_primitive() {
        return domain("both characters must be primitive");
    }
    let q = chi.modulus() as f64;
    let m = psi.modulus();
    let lval = primes.truncated_l1(&chi.mul_conj(psi)?)?;
    let lhs = max_char_sum(chi)?.value + q.sqrt();
    let rhs = (q * m as f64).sqrt() / euler_phi(m) as f64 * lval.norm();
    let logq = q.ln();
    Ok(BoundReport::new("charsum-l1", lhs, rhs)
        .with_param("q", q)
        .with_param("m", m as f64)
        .with_param("X", primes.cutoff())
        .with_param("abs_l1", lval.norm())
        .with_param("m_in_range", if (m as f64) <= q / (logq * logq) { 1.0 } else { 0.0 }))
}
