//! Root-of-unity maximizers, the oscillation function `F_n`, weighted prime
//! sums over the classes of an odd character, and exhaustive search for
//! odd-order characters with prescribed values at small primes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::angle::e;
use crate::arith::gcd;
use crate::dirichlet::{admits_primitive_order_dividing, enumerate_characters, CharacterFilter, DirichletCharacter, DirichletGroup};
use crate::error::{capacity, domain, Result};
use crate::pretentious::{delta_g, distance_sq, upper2_rhs, CMFunction};
use crate::quadrature::integrate;
use crate::report::BoundReport;
use crate::sieve::primes_up_to;

const TIE: f64 = 1e-12;

/// The maximizing `z` in `mu_g ∪ {0}`: `Some(j)` for `e(j/g)`, `None` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootChoice {
    pub root: Option<u64>,
    pub value: f64,
}

impl RootChoice {
    pub fn z(&self, g: u64) -> Complex64 {
        self.root.map_or(Complex64::new(0.0, 0.0), |j| e(j as f64 / g as f64))
    }
}

/// `max_{z in mu_g ∪ {0}} Re(z e(-theta))`; ties go to the smallest angle, then to zero.
pub fn root_maximizer(g: u64, theta: f64) -> RootChoice {
    let mut best: Option<RootChoice> = None;
    for j in 0..g {
        let v = (2.0 * PI * (j as f64 / g as f64 - theta)).cos();
        if best.map_or(true, |b| v > b.value + TIE) {
            best = Some(RootChoice { root: Some(j), value: v });
        }
    }
    let best = best.unwrap_or(RootChoice { root: None, value: 0.0 });
    if best.value < -TIE {
        return RootChoice { root: None, value: 0.0 };
    }
    best
}

/// `F_n(u) = cos(2 pi {u} / n) + tan(pi / n) sin(2 pi {u} / n)`.
pub fn f_n(n: u64, u: f64) -> Result<f64> {
    if n < 3 {
        return domain(format!("F_n needs n >= 3, got {n}"));
    }
    Ok(f_n_unchecked(n as f64, u))
}

fn f_n_unchecked(n: f64, u: f64) -> f64 {
    let x = 2.0 * PI * (u - u.floor()) / n;
    x.cos() + (PI / n).tan() * x.sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxAverage {
    pub brute: f64,
    pub closed: f64,
}

/// `(1/k) sum_{l mod k} max_z Re(z e(theta - l/k))` by enumeration and in closed form.
pub fn lemma_max_average(g: u64, k: u64, theta: f64) -> Result<MaxAverage> {
    if g < 3 || g % 2 == 0 {
        return domain(format!("g must be odd and at least 3, got {g}"));
    }
    if k < 2 || k % 2 == 1 {
        return domain(format!("k must be even and at least 2, got {k}"));
    }
    let brute = (0..k).map(|l| root_maximizer(g, l as f64 / k as f64 - theta).value).sum::<f64>() / k as f64;
    let k_star = k / gcd(g, k);
    let n = (g * k_star) as f64;
    let closed = (PI / g as f64).sin() / (k_star as f64 * (PI / n).tan()) * f_n_unchecked(n, -n * theta);
    Ok(MaxAverage { brute, closed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogIntegral {
    pub integral: f64,
    pub main_term: f64,
    pub defect: f64,
    pub quadrature_error: f64,
}

/// `int_A^B F_n(u)/u du` against the main term of its regime.
pub fn fn_log_integral(n: u64, a: f64, b: f64) -> Result<LogIntegral> {
    if n < 3 {
        return domain(format!("F_n needs n >= 3, got {n}"));
    }
    if !(a > 0.0) {
        return domain("A must be positive");
    }
    if !(b >= a) {
        return domain("B must not be below A");
    }
    let nf = n as f64;
    let slope = nf / PI * (PI / nf).tan();
    let main_term = if a >= 1.0 {
        slope * (b / a).ln()
    } else if b <= 1.0 {
        (b / a).ln()
    } else {
        slope * b.ln() - a.ln()
    };
    // F_n is smooth between consecutive integers; integrate panel by panel
    let mut cuts = vec![a];
    let mut j = a.floor() + 1.0;
    while j < b {
        cuts.push(j);
        j += 1.0;
    }
    cuts.push(b);
    let panels = (cuts.len() - 1).max(1) as f64;
    let (mut integral, mut err) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let q = integrate(|u| f_n_unchecked(nf, u) / u, w[0], w[1], 1e-10 / panels);
        integral += q.value;
        err += q.error;
    }
    Ok(LogIntegral { integral, main_term, defect: integral - main_term, quadrature_error: err })
}

fn check_odd_primitive(psi: &DirichletCharacter) -> Result<()> {
    if psi.parity() != -1 || !psi.is_primitive() {
        return domain("psi must be an odd primitive character");
    }
    Ok(())
}

/// Per-class data for an odd `psi` of order `k`: class `l` collects primes with
/// `psi(p) = e(l/k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassChoice {
    pub ell: u64,
    pub choice: RootChoice,
    /// `sum_{p <= y, psi(p) = e(l/k)} 1/p`.
    pub reciprocal_sum: f64,
}

fn class_sums(psi: &DirichletCharacter, g: u64, primes: &[u64]) -> (Vec<ClassChoice>, f64) {
    let k = psi.order();
    let mut sums = vec![0.0f64; k as usize];
    let mut ramified = 0.0;
    for &p in primes {
        match psi.angle_index(p as i64) {
            Some(l) => sums[l as usize] += 1.0 / p as f64,
            None => ramified += 1.0 / p as f64,
        }
    }
    let classes = sums
        .into_iter()
        .enumerate()
        .map(|(l, s)| ClassChoice { ell: l as u64, choice: root_maximizer(g, l as f64 / k as f64), reciprocal_sum: s })
        .collect();
    (classes, ramified)
}

/// `sum_l max_z Re(z e(-l/k)) sum_{p <= y, psi(p) = e(l/k)} 1/p` against
/// `(1 - delta_g) (pi / g k*) / tan(pi / g k*) log log y`.
pub fn weighted_prime_sum(psi: &DirichletCharacter, g: u64, y: f64) -> Result<BoundReport> {
    check_odd_primitive(psi)?;
    let dg = delta_g(g)?;
    let l2 = y.ln().ln();
    if !(l2 > 0.0) {
        return domain("log log y must be positive");
    }
    let (classes, _) = class_sums(psi, g, &primes_up_to(y.floor() as u64));
    let lhs: f64 = classes.iter().map(|c| c.choice.value * c.reciprocal_sum).sum();
    let k = psi.order();
    let u = PI / (g * (k / gcd(g, k))) as f64;
    let rhs = (1.0 - dg) * u / u.tan() * l2;
    let m = psi.modulus() as f64;
    Ok(BoundReport::new("weighted-prime-sum", lhs, rhs)
        .with_param("m", m)
        .with_param("k", k as f64)
        .with_param("g", g as f64)
        .with_param("y", y)
        .with_param("m_in_range", if m <= y.ln().powf(4.0 / 7.0) { 1.0 } else { 0.0 }))
}

/// Largest number of prescribed primes accepted by [`search_prescribed`].
pub const MAX_PRESCRIBED_PRIMES: usize = 8;
/// Largest conductor range accepted by [`search_prescribed`].
pub const MAX_SEARCH_CONDUCTOR: u64 = 2_000_000;

/// Required values at small primes: `Some(j)` for `e(j/g)`, `None` for zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrescribedTargets {
    g: u64,
    y: f64,
    targets: BTreeMap<u64, Option<u64>>,
}

impl PrescribedTargets {
    pub fn new(g: u64, y: f64, targets: BTreeMap<u64, Option<u64>>) -> Result<Self> {
        if g < 3 || g % 2 == 0 {
            return domain(format!("g must be odd and at least 3, got {g}"));
        }
        let primes = primes_up_to(y.max(0.0).floor() as u64);
        for (&p, &z) in &targets {
            if primes.binary_search(&p).is_err() {
                return domain(format!("{p} is not a prime up to y = {y}"));
            }
            if z.is_some_and(|j| j >= g) {
                return domain(format!("target at {p} is not a {g}-th root of unity"));
            }
        }
        Ok(PrescribedTargets { g, y, targets })
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn targets(&self) -> &BTreeMap<u64, Option<u64>> {
        &self.targets
    }

    /// Whether `chi` (of order `g`) meets every target at primes not dividing `g`.
    pub fn matches(&self, chi: &DirichletCharacter) -> bool {
        let scale = chi.order();
        self.targets.iter().filter(|(&p, _)| self.g % p != 0).all(|(&p, &z)| {
            let got = chi.angle_index(p as i64);
            match z {
                None => got.is_none(),
                Some(j) => got.is_some_and(|k| k * self.g == j * scale),
            }
        })
    }
}

/// All primitive characters of order `g` and conductor at most `qmax` meeting
/// every target, by conductor then index.
pub fn search_prescribed(targets: &PrescribedTargets, qmax: u64) -> Result<Vec<DirichletCharacter>> {
    let constrained = targets.targets.keys().filter(|&&p| targets.g % p != 0).count();
    if constrained > MAX_PRESCRIBED_PRIMES {
        return capacity(format!("{constrained} prescribed primes exceed the limit {MAX_PRESCRIBED_PRIMES}"));
    }
    if qmax > MAX_SEARCH_CONDUCTOR {
        return capacity(format!("conductor bound {qmax} exceeds {MAX_SEARCH_CONDUCTOR}"));
    }
    let g = targets.g;
    let filter = CharacterFilter::primitive_of_order(g);
    let mut out = Vec::new();
    for q in 2..=qmax {
        // a zero target at p forces p | q
        if targets.targets.iter().any(|(&p, z)| z.is_none() && g % p != 0 && q % p != 0) {
            continue;
        }
        if !admits_primitive_order_dividing(q, g) {
            continue;
        }
        let group = DirichletGroup::lazy(q)?;
        out.extend(enumerate_characters(&group, &filter).into_iter().filter(|chi| targets.matches(chi)));
    }
    Ok(out)
}

/// The best character found by the prescribed-value search.
#[derive(Debug, Clone, Serialize)]
pub struct AchievedCharacter {
    pub q: u64,
    pub char_index: u64,
    pub distance_sq: f64,
    #[serde(skip)]
    pub character: DirichletCharacter,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalProfile {
    pub g: u64,
    pub y: f64,
    pub classes: Vec<ClassChoice>,
    /// `D^2` if `chi(p)` followed the class choices at every `p <= y`.
    pub ideal_distance_sq: f64,
    /// `(1 - (1 - delta_g) u / tan u) log log y`.
    pub main_term: f64,
    pub candidates: usize,
    pub achieved: Option<AchievedCharacter>,
}

/// Per-class maximizers for an odd `psi` and, when `search` is given as
/// `(prescribe_up_to, qmax)`, the character closest to `psi` among those
/// following the choices at primes up to `prescribe_up_to`.
pub fn extremal_profile(psi: &DirichletCharacter, g: u64, y: f64, search: Option<(f64, u64)>) -> Result<ExtremalProfile> {
    check_odd_primitive(psi)?;
    let k = psi.order();
    let main_term = upper2_rhs(g, k, y)?.main;
    let bound = y.floor() as u64;
    let primes = primes_up_to(bound);
    let (classes, ramified) = class_sums(psi, g, &primes);
    // primes dividing the modulus of psi contribute their full 1/p
    let ideal_distance_sq = ramified + classes.iter().map(|c| (1.0 - c.choice.value) * c.reciprocal_sum).sum::<f64>();

    let mut profile = ExtremalProfile { g, y, classes, ideal_distance_sq, main_term, candidates: 0, achieved: None };
    let Some((small, qmax)) = search else {
        return Ok(profile);
    };
    let mut wanted = BTreeMap::new();
    for &p in primes.iter().take_while(|&&p| p as f64 <= small) {
        if g % p == 0 {
            continue;
        }
        if let Some(l) = psi.angle_index(p as i64) {
            wanted.insert(p, profile.classes[l as usize].choice.root);
        }
    }
    let targets = PrescribedTargets::new(g, small, wanted)?;
    let found = search_prescribed(&targets, qmax)?;
    profile.candidates = found.len();
    let psi_f = CMFunction::from_character(psi, bound);
    for chi in found {
        let d = distance_sq(&CMFunction::from_character(&chi, bound), &psi_f, y)?.value;
        if profile.achieved.as_ref().map_or(true, |a| d < a.distance_sq) {
            profile.achieved = Some(AchievedCharacter { q: chi.modulus(), char_index: chi.index(), distance_sq: d, character: chi });
        }
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::build_group;
    use approx::assert_abs_diff_eq;

    fn odd_quadratic(q: u64) -> DirichletCharacter {
        enumerate_characters(&build_group(q).unwrap(), &CharacterFilter::primitive_of_order(2)).remove(0)
    }

    #[test]
    fn root_maximizer_examples() {
        assert_eq!(root_maximizer(3, 0.0), RootChoice { root: Some(0), value: 1.0 });
        let half = root_maximizer(3, 0.5);
        assert_eq!(half.root, Some(1));
        assert_abs_diff_eq!(half.value, 0.5, epsilon = 1e-12);
        let quarter = root_maximizer(3, 0.25);
        assert_eq!(quarter.root, Some(1));
        assert_abs_diff_eq!(quarter.value, 3f64.sqrt() / 2.0, epsilon = 1e-12);
        // rotating theta by 1/g rotates the maximizer
        for i in 0..50 {
            let theta = i as f64 / 50.0;
            for g in [3u64, 5, 7] {
                let a = root_maximizer(g, theta);
                let b = root_maximizer(g, theta + 1.0 / g as f64);
                assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn root_maximizer_is_exhaustive() {
        for g in [3u64, 5, 9] {
            for i in 0..200 {
                let theta = i as f64 / 200.0 - 0.3;
                let brute = (0..g).map(|j| (e(j as f64 / g as f64) * e(-theta)).re).fold(0.0f64, f64::max);
                assert_abs_diff_eq!(root_maximizer(g, theta).value, brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn f_n_examples() {
        for n in 3..30 {
            assert_eq!(f_n(n, 0.0).unwrap(), 1.0);
            assert!((f_n(n, 1.0 - 1e-9).unwrap() - 1.0).abs() <= 1e-6);
            assert_abs_diff_eq!(f_n(n, 0.37).unwrap(), f_n(n, 1.37).unwrap(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(f_n(3, 0.75).unwrap(), 3f64.sqrt(), epsilon = 1e-12);
        assert!(f_n(2, 0.5).is_err());
    }

    #[test]
    fn max_average_examples() {
        let a = lemma_max_average(3, 2, 0.0).unwrap();
        assert_abs_diff_eq!(a.brute, 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(a.closed, 0.75, epsilon = 1e-14);
        let b = lemma_max_average(3, 4, 0.0).unwrap();
        assert_abs_diff_eq!(b.brute, (1.5 + 3f64.sqrt()) / 4.0, epsilon = 1e-14);
        let u = PI / 12.0;
        let d3 = delta_g(3).unwrap();
        assert_abs_diff_eq!(b.closed, (1.0 - d3) * u / u.tan(), epsilon = 1e-14);
        assert!(lemma_max_average(3, 3, 0.0).is_err());
    }

    #[test]
    fn f_n_mean_over_a_period() {
        for n in [3u64, 4, 7, 20] {
            let q = integrate(|u| f_n_unchecked(n as f64, u), 0.0, 1.0, 1e-13);
            assert_abs_diff_eq!(q.value, n as f64 / PI * (PI / n as f64).tan(), epsilon = 1e-12);
        }
    }

    #[test]
    fn log_integral_examples() {
        let r = fn_log_integral(3, 1.0, 10.0).unwrap();
        assert_abs_diff_eq!(r.main_term, 3.0 / PI * 3f64.sqrt() * 10f64.ln(), epsilon = 1e-12);
        assert!(r.defect.abs() <= 4.0 && r.quadrature_error < 1e-8);
        assert_eq!(fn_log_integral(5, 2.0, 2.0).unwrap().integral, 0.0);
        let low = fn_log_integral(12, 0.01, 1.0).unwrap();
        assert_abs_diff_eq!(low.main_term, 100f64.ln(), epsilon = 1e-12);
        assert!(low.defect.abs() <= 4.0);
        assert!(fn_log_integral(3, 0.0, 1.0).is_err());
    }

    #[test]
    fn weighted_sum_examples() {
        let psi = odd_quadratic(3);
        let r = weighted_prime_sum(&psi, 3, 1e5).unwrap();
        assert_abs_diff_eq!(r.rhs_main, 0.75 * 1e5f64.ln().ln(), epsilon = 1e-12);
        // direct: class +1 weighted 1, class -1 weighted 1/2
        let direct: f64 = primes_up_to(100_000)
            .iter()
            .map(|&p| match p % 3 {
                1 => 1.0 / p as f64,
                2 => 0.5 / p as f64,
                _ => 0.0,
            })
            .sum();
        assert_abs_diff_eq!(r.lhs, direct, epsilon = 1e-12);
        // squaring y adds about 0.75 log 2 to the weighted sum
        let (a, b) = (weighted_prime_sum(&psi, 3, 300.0).unwrap(), weighted_prime_sum(&psi, 3, 90_000.0).unwrap());
        assert!((b.lhs - a.lhs - 0.75 * 2f64.ln()).abs() < 0.1, "{}", b.lhs - a.lhs);
        let tiny = weighted_prime_sum(&psi, 3, 3.0).unwrap();
        assert_abs_diff_eq!(tiny.lhs, 0.25, epsilon = 1e-15);
        assert!(weighted_prime_sum(&odd_quadratic(5), 3, 100.0).is_err());
    }

    #[test]
    fn prescribed_examples() {
        let mut t = BTreeMap::new();
        t.insert(2, Some(2));
        t.insert(3, Some(1));
        t.insert(5, Some(2));
        let found = search_prescribed(&PrescribedTargets::new(3, 5.0, t).unwrap(), 10).unwrap();
        assert!(found.iter().any(|c| c.modulus() == 7 && c.eval_exact(3).unwrap().num() == 1));

        let mut ones = BTreeMap::new();
        ones.insert(2, Some(0));
        let found = search_prescribed(&PrescribedTargets::new(3, 2.0, ones).unwrap(), 100).unwrap();
        assert!(found.iter().all(|c| c.modulus() != 7));
        assert!(!found.is_empty());

        let all = search_prescribed(&PrescribedTargets::new(3, 1.0, BTreeMap::new()).unwrap(), 100).unwrap();
        let expected: usize = (2..=100)
            .map(|q| enumerate_characters(&build_group(q).unwrap(), &CharacterFilter::primitive_of_order(3)).len())
            .sum();
        assert_eq!(all.len(), expected);
        for chi in &all {
            assert_eq!(chi.order(), 3);
            assert!(chi.is_primitive());
        }

        let many: BTreeMap<u64, Option<u64>> = primes_up_to(30).into_iter().map(|p| (p, Some(0))).collect();
        assert!(matches!(search_prescribed(&PrescribedTargets::new(3, 30.0, many).unwrap(), 100), Err(crate::Error::Capacity(_))));
    }

    #[test]
    fn search_results_revalidate() {
        let mut t = BTreeMap::new();
        t.insert(2, Some(1));
        t.insert(5, Some(0));
        t.insert(7, None);
        let targets = PrescribedTargets::new(3, 7.0, t).unwrap();
        let found = search_prescribed(&targets, 3000).unwrap();
        assert!(!found.is_empty());
        for chi in &found {
            let tabled = DirichletCharacter::new(build_group(chi.modulus()).unwrap(), chi.exponents().to_vec()).unwrap();
            assert!((tabled.eval(2) - e(1.0 / 3.0)).norm() < 1e-12);
            assert!((tabled.eval(5) - 1.0).norm() < 1e-12);
            assert_eq!(tabled.eval(7), Complex64::new(0.0, 0.0));
            assert_eq!(tabled.order(), 3);
        }
    }

    #[test]
    fn profile_for_quadratic_mod_3() {
        let psi = odd_quadratic(3);
        let p = extremal_profile(&psi, 3, 1000.0, None).unwrap();
        assert_eq!(p.classes[0].choice.root, Some(0));
        assert_eq!(p.classes[1].choice.root, Some(1));
        assert_abs_diff_eq!(p.classes[1].choice.value, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.main_term, 0.25 * 1000f64.ln().ln(), epsilon = 1e-12);
        // ideal distance: 1/3 from p = 3 plus half of the -1 class
        let half: f64 = primes_up_to(1000).iter().filter(|&&p| p % 3 == 2).map(|&p| 0.5 / p as f64).sum();
        assert_abs_diff_eq!(p.ideal_distance_sq, half + 1.0 / 3.0, epsilon = 1e-12);
    }
}
