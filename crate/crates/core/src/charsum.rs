//! Character-sum kernels: maximal partial sums, Gauss sums, Pólya's Fourier
//! expansion, twisted logarithmic sums and the major/minor arc machinery.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::angle::e;
use crate::arith::{self, gcd_i64};
use crate::dirichlet::{build_group, enumerate_characters, CharacterFilter, DirichletCharacter};
use crate::error::{domain, Result};
use crate::report::BoundReport;
use crate::sieve::SpfSieve;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `M(chi)` together with the first `t` attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxSumResult {
    pub value: f64,
    pub argmax_t: u64,
    #[serde(skip)]
    pub partial_trace: Option<Vec<Complex64>>,
}

/// Maximum of `|sum_{n<=t} chi(n)|` over `1 <= t <= q` in one streaming pass.
pub fn max_char_sum(chi: &DirichletCharacter) -> Result<MaxSumResult> {
    max_char_sum_impl(chi, false)
}

/// As [`max_char_sum`], also returning every partial sum `S(1), ..., S(q)`.
pub fn max_char_sum_with_trace(chi: &DirichletCharacter) -> Result<MaxSumResult> {
    max_char_sum_impl(chi, true)
}

fn max_char_sum_impl(chi: &DirichletCharacter, trace: bool) -> Result<MaxSumResult> {
    if chi.is_principal() {
        return domain("M(chi) is undefined for a principal character");
    }
    let q = chi.modulus() as usize;
    let table = chi.period_table();
    let roots = chi.root_table();
    let mut s = ZERO;
    let mut best = -1.0f64;
    let mut arg = 1u64;
    let mut partial = if trace { Some(Vec::with_capacity(q)) } else { None };
    for t in 1..=q {
        let k = table[t % q];
        if k != u32::MAX {
            s += roots[k as usize];
        }
        let a = s.norm_sqr();
        if a > best {
            best = a;
            arg = t as u64;
        }
        if let Some(p) = partial.as_mut() {
            p.push(s);
        }
    }
    Ok(MaxSumResult { value: best.sqrt(), argmax_t: arg, partial_trace: partial })
}

/// `tau(chi) = sum_{n=1}^q chi(n) e(n/q)` by direct summation.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let q = chi.modulus();
    let ord = chi.order();
    let den = (ord * q) as f64;
    let table = chi.period_table();
    let mut s = ZERO;
    for n in 1..=q {
        let k = table[(n % q) as usize];
        if k == u32::MAX {
            continue;
        }
        // e(k/ord + n/q) as a single reduced fraction
        let num = (k as u64 * q + n * ord) % (ord * q);
        s += e(num as f64 / den);
    }
    s
}

fn require_primitive(chi: &DirichletCharacter) -> Result<()> {
    if !chi.is_primitive() {
        return domain(format!(
            "character mod {} has conductor {}; a primitive character is required",
            chi.modulus(),
            chi.conductor()
        ));
    }
    Ok(())
}

/// Pólya's truncated expansion of `sum_{n<=t} chi(n)` with `1 <= |n| <= big_n`.
pub fn polya_expansion(chi: &DirichletCharacter, t: i64, big_n: u64) -> Result<Complex64> {
    require_primitive(chi)?;
    if big_n == 0 {
        return domain("N must be positive");
    }
    let q = chi.modulus() as i64;
    let tau = gauss_sum(chi);
    let cbar = chi.conj();
    let mut s = ZERO;
    for n in 1..=big_n as i64 {
        let phase = (n * t).rem_euclid(q) as f64 / q as f64;
        let plus = cbar.eval(n) / n as f64 * (Complex64::new(1.0, 0.0) - e(-phase));
        let minus = cbar.eval(-n) / (-n) as f64 * (Complex64::new(1.0, 0.0) - e(phase));
        s += plus + minus;
    }
    Ok(tau / Complex64::new(0.0, 2.0 * PI) * s)
}

/// Signed harmonic sums `w_r = sum_{1<=|n|<=N, n = r mod q} 1/n`, reusable
/// across all characters of one modulus.
#[derive(Debug, Clone)]
pub struct PolyaWeights {
    q: u64,
    big_n: u64,
    weights: Vec<f64>,
}

impl PolyaWeights {
    pub fn new(q: u64, big_n: u64) -> Self {
        let mut weights = vec![0.0f64; q as usize];
        // accumulate from the small terms up for each class
        for n in (1..=big_n).rev() {
            let inv = 1.0 / n as f64;
            weights[(n % q) as usize] += inv;
            weights[((q - n % q) % q) as usize] -= inv;
        }
        PolyaWeights { q, big_n, weights }
    }

    pub fn big_n(&self) -> u64 {
        self.big_n
    }

    /// The expansion evaluated at every `t = 1..=q` (index `t - 1`).
    pub fn expand_all(&self, chi: &DirichletCharacter) -> Result<Vec<Complex64>> {
        require_primitive(chi)?;
        if chi.modulus() != self.q {
            return domain("weights were built for a different modulus");
        }
        let q = self.q as usize;
        let table = chi.conj().period_table();
        let roots = chi.root_table();
        let unit_q: Vec<Complex64> = (0..q).map(|j| e(-(j as f64) / q as f64)).collect();
        let coeff: Vec<(usize, Complex64)> = (0..q)
            .filter(|&r| table[r] != u32::MAX)
            .map(|r| (r, roots[table[r] as usize] * self.weights[r]))
            .collect();
        let total: Complex64 = coeff.iter().map(|&(_, c)| c).sum();
        let pre = gauss_sum(chi) / Complex64::new(0.0, 2.0 * PI);
        Ok((1..=q)
            .map(|t| {
                let twisted: Complex64 = coeff.iter().map(|&(r, c)| c * unit_q[r * t % q]).sum();
                pre * (total - twisted)
            })
            .collect())
    }
}

/// Largest gap between the direct partial sums and Pólya's expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyaDefect {
    pub max_defect: f64,
    pub argmax_t: u64,
    /// `1 + q log q / N`, the shape of the truncation error.
    pub scale: f64,
}

pub fn polya_defect(chi: &DirichletCharacter, weights: &PolyaWeights) -> Result<PolyaDefect> {
    let approx = weights.expand_all(chi)?;
    let q = chi.modulus();
    let direct = max_char_sum_with_trace(chi)?.partial_trace.expect("trace requested");
    let (mut best, mut arg) = (0.0f64, 1u64);
    for (i, (a, d)) in approx.iter().zip(&direct).enumerate() {
        let gap = (a - d).norm();
        if gap > best {
            best = gap;
            arg = i as u64 + 1;
        }
    }
    let qf = q as f64;
    Ok(PolyaDefect { max_defect: best, argmax_t: arg, scale: 1.0 + qf * qf.ln() / weights.big_n as f64 })
}

/// `sum_{1<=|n|<=x} chi(n) e(n theta) / n`, optionally over `y`-friable `|n|` only.
pub fn twisted_log_sum(chi: &DirichletCharacter, theta: f64, x: f64, friable_bound: Option<f64>) -> Result<Complex64> {
    if !(x >= 1.0) {
        return domain("x must be at least 1");
    }
    let limit = x.floor() as u64;
    let flags = friable_bound.map(|y| SpfSieve::new(limit).friable_flags(y));
    Ok(twisted_log_sum_with_flags(chi, theta, limit, flags.as_deref()))
}

/// Kernel of [`twisted_log_sum`] over `n <= limit` with precomputed friability flags.
pub fn twisted_log_sum_with_flags(chi: &DirichletCharacter, theta: f64, limit: u64, flags: Option<&[bool]>) -> Complex64 {
    let q = chi.modulus();
    let table = chi.period_table();
    let roots = chi.root_table();
    let sign = chi.parity() as f64;
    let mut s = ZERO;
    for n in 1..=limit {
        if let Some(f) = flags {
            if !f[n as usize] {
                continue;
            }
        }
        let k = table[(n % q) as usize];
        if k == u32::MAX {
            continue;
        }
        let phase = e(n as f64 * theta);
        // chi(-n) e(-n theta)/(-n) = -chi(-1) chi(n) conj(e(n theta)) / n
        s += roots[k as usize] * (phase - sign * phase.conj()) / n as f64;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArcClass {
    Major,
    Minor,
}

/// A rational approximation `b/r` to `alpha` with `|alpha - b/r| <= 1/(r R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcApprox {
    pub alpha: f64,
    pub b: i64,
    pub r: u64,
    pub cutoff_r: u64,
    pub threshold_m: u64,
    /// `min(q, |r alpha - b|^{-1})`.
    pub effective_n: f64,
    pub arc_class: ArcClass,
}

const EXACT_TOL: f64 = 1e-12;

fn convergent_witness(alpha: f64, cutoff: u64) -> (i64, u64) {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut best = (alpha.round() as i64, 1u64);
    let mut x = alpha;
    for _ in 0..64 {
        let a = x.floor();
        let (h2, k2) = (a as i64 * h1 + h0, a as u64 * k1 + k0);
        if k2 > cutoff {
            break;
        }
        best = (h2, k2);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a;
        if frac.abs() < EXACT_TOL {
            break;
        }
        x = 1.0 / frac;
    }
    best
}

/// Dirichlet approximation of `alpha` with the smallest admissible denominator.
pub fn dirichlet_arc(alpha: f64, cutoff_r: u64, threshold_m: u64, q: u64) -> Result<ArcApprox> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain("alpha must lie in [0, 1]");
    }
    if cutoff_r == 0 || threshold_m == 0 || threshold_m > cutoff_r {
        return domain("need 1 <= M <= R");
    }
    let tol = 1.0 / cutoff_r as f64 + EXACT_TOL;
    // the last convergent with denominator <= R always qualifies
    let witness = convergent_witness(alpha, cutoff_r);
    let (b, r) = (1..witness.1)
        .map(|r| ((r as f64 * alpha).round() as i64, r))
        .find(|&(b, r)| (r as f64 * alpha - b as f64).abs() <= tol)
        .unwrap_or(witness);
    let gap = (r as f64 * alpha - b as f64).abs();
    let effective_n = if gap < EXACT_TOL { q as f64 } else { (q as f64).min(1.0 / gap) };
    Ok(ArcApprox {
        alpha,
        b,
        r,
        cutoff_r,
        threshold_m,
        effective_n,
        arc_class: if r <= threshold_m { ArcClass::Major } else { ArcClass::Minor },
    })
}

/// Both sides of the divisor/character expansion of the friable twisted sum
/// `sum_{1<=|n|<=N, n in S(y)} chi(n) e(nb/r) / n`.
///
/// The report stores `|LHS|`, `|RHS|` and `defect = |LHS - RHS|`.
pub fn grso_identity_check(chi: &DirichletCharacter, b: i64, r: u64, big_n: u64, y: f64) -> Result<BoundReport> {
    if b == 0 {
        return domain("the identity is stated for b != 0");
    }
    if r == 0 || gcd_i64(b, r as i64) != 1 {
        return domain("need r >= 1 and gcd(b, r) = 1");
    }
    let sieve = SpfSieve::new(big_n.max(r));
    let flags = sieve.friable_flags(y);
    let table = chi.period_table();
    let roots = chi.root_table();
    let q = chi.modulus();
    let chi_at = |n: u64| -> Complex64 {
        let k = table[(n % q) as usize];
        if k == u32::MAX {
            ZERO
        } else {
            roots[k as usize]
        }
    };
    let chi_m1 = chi.parity() as f64;

    // direct side
    let mut lhs = ZERO;
    for n in 1..=big_n {
        if !flags[n as usize] {
            continue;
        }
        let c = chi_at(n);
        if c == ZERO {
            continue;
        }
        let ph = (n as i128 * b as i128).rem_euclid(r as i128) as f64 / r as f64;
        lhs += c / n as f64 * (e(ph) - chi_m1 * e(-ph));
    }

    // expansion over d | r and characters psi mod r/d
    let mut rhs = ZERO;
    for d in arith::divisors(r) {
        if !flags[d as usize] {
            continue;
        }
        let cd = chi_at(d);
        if cd == ZERO {
            continue;
        }
        let s = r / d;
        let group = build_group(s)?;
        let upto = big_n / d;
        let mut inner_total = ZERO;
        for psi in enumerate_characters(&group, &CharacterFilter::default()) {
            let factor = 1.0 - chi_m1 * psi.parity() as f64;
            if factor == 0.0 {
                continue;
            }
            let psi_tab = psi.period_table();
            let psi_roots = psi.root_table();
            let mut inner = ZERO;
            for n in 1..=upto {
                if !flags[n as usize] {
                    continue;
                }
                let k = psi_tab[(n % s) as usize];
                if k == u32::MAX {
                    continue;
                }
                inner += chi_at(n) * psi_roots[k as usize].conj() / n as f64;
            }
            inner_total += factor * gauss_sum(&psi) * psi.eval(b).conj() * inner;
        }
        rhs += cd / d as f64 / group.phi() as f64 * inner_total;
    }
    let mut rep = BoundReport::new("grso-identity", lhs.norm(), rhs.norm())
        .with_param("b", b as f64)
        .with_param("r", r as f64)
        .with_param("N", big_n as f64)
        .with_param("y", y)
        .with_param("lhs_re", lhs.re)
        .with_param("lhs_im", lhs.im)
        .with_param("rhs_re", rhs.re)
        .with_param("rhs_im", rhs.im);
    rep.defect = (lhs - rhs).norm();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DirichletGroup;
    use approx::assert_abs_diff_eq;

    fn legendre(p: u64) -> DirichletCharacter {
        let g = build_group(p).unwrap();
        enumerate_characters(&g, &CharacterFilter { order_equals: Some(2), ..Default::default() }).remove(0)
    }

    #[test]
    fn max_sum_examples() {
        let r3 = max_char_sum_with_trace(&legendre(3)).unwrap();
        assert_eq!(r3.value, 1.0);
        let r7 = max_char_sum_with_trace(&legendre(7)).unwrap();
        assert_eq!((r7.value, r7.argmax_t), (2.0, 2));
        let trace: Vec<f64> = r7.partial_trace.unwrap().iter().map(|z| z.re).collect();
        assert_eq!(trace, vec![1.0, 2.0, 1.0, 2.0, 1.0, 0.0, 0.0]);
        let r5 = max_char_sum_with_trace(&legendre(5)).unwrap();
        assert_eq!(r5.value, 1.0);
        let t5: Vec<f64> = r5.partial_trace.unwrap().iter().map(|z| z.re).collect();
        assert_eq!(t5, vec![1.0, 0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn principal_has_no_max_sum() {
        let p = DirichletCharacter::principal(build_group(10).unwrap());
        assert!(matches!(max_char_sum(&p), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn max_sum_matches_materialized_prefix_sums() {
        for q in (3..400u64).chain([997, 1000, 4096, 9973]) {
            let g = build_group(q).unwrap();
            let all = enumerate_characters(&g, &CharacterFilter::default());
            for chi in all.iter().filter(|c| !c.is_principal()).step_by(7) {
                let mut prefix = vec![ZERO; q as usize + 1];
                for n in 1..=q as usize {
                    prefix[n] = prefix[n - 1] + chi.eval(n as i64);
                }
                let (mut best, mut arg) = (0.0, 0);
                for (t, s) in prefix.iter().enumerate().skip(1) {
                    if s.norm() > best + 1e-12 {
                        best = s.norm();
                        arg = t;
                    }
                }
                let r = max_char_sum(chi).unwrap();
                assert!((r.value - best).abs() < 1e-9, "{chi:?}");
                assert!((prefix[r.argmax_t as usize].norm() - r.value).abs() < 1e-9);
                assert!(prefix[..r.argmax_t as usize].iter().all(|s| s.norm() <= r.value + 1e-9));
                let _ = arg;
            }
        }
    }

    #[test]
    fn gauss_sum_examples() {
        let t5 = gauss_sum(&legendre(5));
        assert_abs_diff_eq!(t5.re, 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(t5.im, 0.0, epsilon = 1e-12);
        let oracle = 2.0 * (2.0 * PI / 5.0).cos() - 2.0 * (4.0 * PI / 5.0).cos();
        assert_abs_diff_eq!(t5.re, oracle, epsilon = 1e-12);
        let trivial = DirichletCharacter::principal(build_group(1).unwrap());
        assert_abs_diff_eq!((gauss_sum(&trivial) - 1.0).norm(), 0.0, epsilon = 1e-15);
        for chi in enumerate_characters(&build_group(13).unwrap(), &CharacterFilter::primitive()) {
            assert!((gauss_sum(&chi).norm_sqr() - 13.0).abs() < 1e-8);
        }
    }

    #[test]
    fn polya_small_cases() {
        let chi = legendre(3);
        // two-term hand computation: tau = i sqrt 3, t = 1, N = 1
        let hand = 3f64.sqrt() / (2.0 * PI) * 3.0;
        let v = polya_expansion(&chi, 1, 1).unwrap();
        assert_abs_diff_eq!(v.re, hand, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);

        let l7 = legendre(7);
        assert!((polya_expansion(&l7, 2, 49 * 49).unwrap() - 2.0).norm() < 10.0);
        assert!((polya_expansion(&l7, 2, 10_000).unwrap() - 2.0).norm() < 1.0);
        let full = polya_expansion(&l7, 7, 2401).unwrap();
        assert!(full.norm() <= 1.0 + 7.0 * 7f64.ln() / 2401.0);

        let g9 = build_group(9).unwrap();
        let imprimitive = enumerate_characters(&g9, &CharacterFilter { order_equals: Some(2), ..Default::default() }).remove(0);
        assert!(polya_expansion(&imprimitive, 1, 10).is_err());
    }

    #[test]
    fn grouped_polya_matches_direct() {
        for q in [5u64, 7, 12, 13] {
            let w = PolyaWeights::new(q, 300);
            for chi in enumerate_characters(&build_group(q).unwrap(), &CharacterFilter::primitive()) {
                let all = w.expand_all(&chi).unwrap();
                for t in 1..=q {
                    let direct = polya_expansion(&chi, t as i64, 300).unwrap();
                    assert!((all[t as usize - 1] - direct).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn twisted_log_sum_examples() {
        let chi = legendre(3);
        let v = twisted_log_sum(&chi, 0.0, 1e6, None).unwrap();
        // L(1, chi_-3) = pi / sqrt(27)
        assert_abs_diff_eq!(v.re, 2.0 * PI / 27f64.sqrt(), epsilon = 1e-4);
        let even = legendre(5);
        assert_eq!(twisted_log_sum(&even, 0.0, 1e4, None).unwrap(), ZERO);
        let fri = twisted_log_sum(&chi, 0.0, 100.0, Some(2.0)).unwrap();
        let manual: f64 = [1u64, 2, 4, 8, 16, 32, 64].iter().map(|&n| 2.0 * chi.eval(n as i64).re / n as f64).sum();
        assert_abs_diff_eq!(fri.re, manual, epsilon = 1e-14);
    }

    #[test]
    fn arc_examples() {
        let a = dirichlet_arc(1.0 / 3.0, 100, 10, 1000).unwrap();
        assert_eq!((a.b, a.r, a.arc_class), (1, 3, ArcClass::Major));
        assert_eq!(a.effective_n, 1000.0);
        let z = dirichlet_arc(0.0, 50, 5, 77).unwrap();
        assert_eq!((z.b, z.r, z.effective_n, z.arc_class), (0, 1, 77.0, ArcClass::Major));
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let g = dirichlet_arc(golden, 100, 10, 10_000).unwrap();
        assert_eq!((g.b, g.r, g.arc_class), (34, 55, ArcClass::Minor));
        assert!(dirichlet_arc(1.5, 10, 5, 7).is_err());
    }

    #[test]
    fn arc_invariants_hold() {
        for i in 0..=500 {
            let alpha = i as f64 / 500.0 * 0.999 + 0.0003 * (i % 7) as f64;
            let alpha = alpha.min(1.0);
            let a = dirichlet_arc(alpha, 60, 8, 10_000).unwrap();
            assert_eq!(arith::gcd(a.b.unsigned_abs(), a.r), 1);
            assert!((alpha - a.b as f64 / a.r as f64).abs() <= 1.0 / (a.r as f64 * 60.0) + 1e-12);
            // nothing smaller qualifies
            for r in 1..a.r {
                let b = (r as f64 * alpha).round();
                assert!((r as f64 * alpha - b).abs() > 1.0 / 60.0);
            }
        }
    }

    #[test]
    fn grso_examples() {
        let cubic7 = enumerate_characters(&build_group(7).unwrap(), &CharacterFilter::primitive_of_order(3)).remove(0);
        let rep = grso_identity_check(&cubic7, 1, 3, 10_000, 1e4).unwrap();
        assert!(rep.defect < 1e-8, "{rep:?}");
        let l5 = legendre(5);
        let rep = grso_identity_check(&l5, 1, 4, 1000, 1e3).unwrap();
        assert!(rep.defect < 1e-8);
        let r1 = grso_identity_check(&l5, 1, 1, 1000, 1e3).unwrap();
        assert_eq!(r1.lhs, 0.0);
        assert_eq!(r1.rhs_main, 0.0);
        assert!(grso_identity_check(&l5, 0, 4, 100, 100.0).is_err());
        assert!(grso_identity_check(&l5, 2, 4, 100, 100.0).is_err());
        let _ = DirichletGroup::lazy(4);
    }
}
