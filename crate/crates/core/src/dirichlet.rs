//! The character group modulo `q` and Dirichlet characters over it.
//!
//! A group is the product of its local factors `(Z/p^a Z)^*`. Odd prime powers
//! are cyclic with the smallest primitive root as generator; `2^a` with `a >= 3`
//! splits as `<-1> x <5>`. A character is an exponent vector with one entry per
//! cyclic component, so `chi(g_j) = e(exponent_j / order_j)` and every value is
//! an exact rational angle.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::angle::Angle;
use crate::arith::{self, gcd, inv_mod, lcm, pow_mod};
use crate::error::{capacity, domain, Result};

/// Largest modulus accepted by [`build_group`].
pub const MAX_MODULUS: u64 = 10_000_000;

/// Local orders up to this size are evaluated by power residues when the
/// discrete-log tables have not been built.
const POWER_RESIDUE_LIMIT: u64 = 64;

const NON_UNIT: u32 = u32::MAX;

/// One cyclic factor of the unit group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Component {
    pub prime: u64,
    pub prime_power: u64,
    pub generator: u64,
    pub order: u64,
}

#[derive(Debug)]
struct LocalFactor {
    prime: u64,
    exponent: u32,
    modulus: u64,
    /// Index of the first component belonging to this factor.
    first: usize,
    /// Number of cyclic components (0, 1 or 2).
    count: usize,
    /// residue -> packed discrete log, `NON_UNIT` for non-units.
    table: OnceLock<Vec<u32>>,
}

impl LocalFactor {
    fn two_adic_half(&self) -> u64 {
        1u64 << (self.exponent - 2)
    }

    fn build_table(&self, comps: &[Component]) -> Vec<u32> {
        let m = self.modulus as usize;
        let mut t = vec![NON_UNIT; m];
        if self.prime != 2 {
            let c = comps[self.first];
            let mut x = 1u64;
            for k in 0..c.order {
                t[x as usize] = k as u32;
                x = x * c.generator % self.modulus;
            }
        } else {
            match self.exponent {
                1 => t[1] = 0,
                2 => {
                    t[1] = 0;
                    t[3] = 1;
                }
                _ => {
                    let half = self.two_adic_half();
                    let mut x = 1u64;
                    for e in 0..half {
                        t[x as usize] = e as u32;
                        t[(self.modulus - x) as usize] = (e + half) as u32;
                        x = x * 5 % self.modulus;
                    }
                }
            }
        }
        t
    }

    fn table(&self, comps: &[Component]) -> &[u32] {
        self.table.get_or_init(|| self.build_table(comps))
    }

    /// Discrete logs of the unit residue `r` along this factor's components.
    fn unpack(&self, packed: u32, out: &mut [u64]) {
        if self.prime == 2 && self.exponent >= 3 {
            let half = self.two_adic_half();
            out[0] = packed as u64 / half;
            out[1] = packed as u64 % half;
        } else if self.count == 1 {
            out[0] = packed as u64;
        }
    }
}

/// The unit group modulo `q` with its cyclic decomposition.
#[derive(Debug)]
pub struct DirichletGroup {
    modulus: u64,
    factors: Vec<LocalFactor>,
    components: Vec<Component>,
    phi: u64,
}

fn smallest_primitive_root(p: u64, a: u32) -> u64 {
    let pa = p.pow(a);
    let phi = pa / p * (p - 1);
    let mut rs: Vec<u64> = arith::factorize(p - 1).into_iter().map(|(r, _)| r).collect();
    if a >= 2 {
        rs.push(p);
    }
    (2..pa)
        .find(|&g| g % p != 0 && rs.iter().all(|&r| pow_mod(g, phi / r, pa) != 1))
        .expect("odd prime powers are cyclic")
}

/// Builds the group modulo `q`, including discrete-log tables.
pub fn build_group(q: u64) -> Result<Arc<DirichletGroup>> {
    let g = DirichletGroup::lazy(q)?;
    g.ensure_tables();
    Ok(g)
}

impl DirichletGroup {
    /// Builds the cyclic structure only; discrete-log tables are filled on first use.
    pub fn lazy(q: u64) -> Result<Arc<DirichletGroup>> {
        if q == 0 {
            return domain("modulus must be positive");
        }
        if q > MAX_MODULUS {
            return capacity(format!("modulus {q} exceeds the limit {MAX_MODULUS}"));
        }
        let mut factors = Vec::new();
        let mut components = Vec::new();
        for (p, a) in arith::factorize(q) {
            let pa = p.pow(a);
            let first = components.len();
            if p == 2 {
                if a == 2 {
                    components.push(Component { prime: 2, prime_power: pa, generator: 3, order: 2 });
                } else if a >= 3 {
                    components.push(Component { prime: 2, prime_power: pa, generator: pa - 1, order: 2 });
                    components.push(Component { prime: 2, prime_power: pa, generator: 5, order: pa / 4 });
                }
            } else {
                components.push(Component {
                    prime: p,
                    prime_power: pa,
                    generator: smallest_primitive_root(p, a),
                    order: pa / p * (p - 1),
                });
            }
            factors.push(LocalFactor {
                prime: p,
                exponent: a,
                modulus: pa,
                first,
                count: components.len() - first,
                table: OnceLock::new(),
            });
        }
        let phi = components.iter().map(|c| c.order).product();
        Ok(Arc::new(DirichletGroup { modulus: q, factors, components, phi }))
    }

    pub fn ensure_tables(&self) {
        for f in &self.factors {
            f.table(&self.components);
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Exponent of the group: the lcm of the component orders.
    pub fn exponent(&self) -> u64 {
        self.components.iter().fold(1, |acc, c| lcm(acc, c.order))
    }

    pub fn is_unit(&self, n: i64) -> bool {
        arith::gcd(n.rem_euclid(self.modulus as i64) as u64, self.modulus) == 1
    }

    fn reduce(&self, n: i64) -> u64 {
        n.rem_euclid(self.modulus as i64) as u64
    }

    /// Discrete logarithms of `n` along every component, or `None` for non-units.
    pub fn dlog(&self, n: i64) -> Option<Vec<u64>> {
        let r = self.reduce(n);
        let mut out = vec![0u64; self.components.len()];
        for f in &self.factors {
            let packed = f.table(&self.components)[(r % f.modulus) as usize];
            if packed == NON_UNIT {
                return None;
            }
            f.unpack(packed, &mut out[f.first..f.first + f.count]);
        }
        Some(out)
    }

    /// Product of generators raised to `logs`, reduced mod `q`.
    pub fn exp(&self, logs: &[u64]) -> u64 {
        let mut parts = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let mut x = 1u64;
            for j in f.first..f.first + f.count {
                let c = &self.components[j];
                x = arith::mul_mod(x, pow_mod(c.generator, logs[j], f.modulus), f.modulus);
            }
            parts.push(x);
        }
        let mut y = 0u64;
        for (f, &x) in self.factors.iter().zip(&parts) {
            y = (y + arith::mul_mod(self.crt_basis(f), x, self.modulus)) % self.modulus;
        }
        if self.modulus == 1 {
            0
        } else {
            y
        }
    }

    /// The idempotent that is 1 mod `f.modulus` and 0 mod the rest of `q`.
    fn crt_basis(&self, f: &LocalFactor) -> u64 {
        let rest = self.modulus / f.modulus;
        let inv = inv_mod(rest % f.modulus, f.modulus).expect("coprime factors");
        arith::mul_mod(rest, inv, self.modulus)
    }

    /// The residue that is `v` mod `p^a` (the local factor at `p`) and 1 elsewhere.
    fn lift_local(&self, p: u64, v: u64) -> u64 {
        let f = self.factors.iter().find(|f| f.prime == p).expect("prime divides modulus");
        let rest = self.modulus / f.modulus;
        let inv = inv_mod(rest % f.modulus, f.modulus).expect("coprime factors");
        let t = arith::mul_mod((v + f.modulus - 1) % f.modulus, inv, f.modulus);
        (1 + rest as u128 * t as u128) as u64 % self.modulus.max(1)
    }

    /// Discrete log of the unit `x` along component `j`, reduced modulo `o | order_j`.
    fn dlog_mod(&self, f: &LocalFactor, j: usize, x: u64, o: u64) -> u64 {
        if o == 1 {
            return 0;
        }
        let c = &self.components[j];
        if f.prime == 2 && f.exponent >= 3 && j == f.first {
            return u64::from(x % 4 == 3) % o;
        }
        if f.prime == 2 && f.exponent == 2 {
            return u64::from(x % 4 == 3) % o;
        }
        let y = if f.prime == 2 && x % 4 == 3 { f.modulus - x } else { x };
        let cof = c.order / o;
        let h = pow_mod(y, cof, f.modulus);
        let base = pow_mod(c.generator, cof, f.modulus);
        let mut acc = 1u64;
        for k in 0..o {
            if acc == h {
                return k;
            }
            acc = arith::mul_mod(acc, base, f.modulus);
        }
        unreachable!("power residue outside the subgroup")
    }
}

/// A Dirichlet character: one exponent per cyclic component.
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<DirichletGroup>,
    exponents: Vec<u64>,
    order: u64,
    /// `chi(g_j) = e(weights_j / order)`.
    weights: Vec<u64>,
    local_orders: Vec<u64>,
    conductor: u64,
    parity: i8,
}

/// Conductor, order, parity and primitivity of a character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CharacterInvariants {
    pub conductor: u64,
    pub order: u64,
    pub parity: i8,
    pub primitive: bool,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[{} ; {:?}]", self.modulus(), self.exponents)
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

fn local_conductor(f: &LocalFactor, orders: &[u64]) -> u64 {
    if f.prime != 2 {
        let o = orders[0];
        if o == 1 {
            1
        } else if (f.prime - 1) % o == 0 {
            f.prime
        } else {
            f.prime.pow(1 + arith::valuation(o, f.prime))
        }
    } else {
        match f.exponent {
            1 => 1,
            2 => {
                if orders[0] == 2 {
                    4
                } else {
                    1
                }
            }
            _ => {
                let o5 = orders[1];
                if o5 > 1 {
                    4 * o5
                } else if orders[0] == 2 {
                    4
                } else {
                    1
                }
            }
        }
    }
}

impl DirichletCharacter {
    pub fn new(group: Arc<DirichletGroup>, exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() != group.components.len() {
            return domain(format!(
                "expected {} exponents for modulus {}, got {}",
                group.components.len(),
                group.modulus,
                exponents.len()
            ));
        }
        let exponents: Vec<u64> = exponents
            .iter()
            .zip(&group.components)
            .map(|(&e, c)| e % c.order)
            .collect();
        let local_orders: Vec<u64> = exponents
            .iter()
            .zip(&group.components)
            .map(|(&e, c)| c.order / gcd(c.order, e))
            .collect();
        let order = local_orders.iter().fold(1, |acc, &o| lcm(acc, o));
        let weights = exponents
            .iter()
            .zip(&group.components)
            .map(|(&e, c)| ((e as u128 * order as u128 / c.order as u128) % order as u128) as u64)
            .collect();
        let conductor = group
            .factors
            .iter()
            .map(|f| local_conductor(f, &local_orders[f.first..f.first + f.count]))
            .product();
        let mut chi = DirichletCharacter {
            group,
            exponents,
            order,
            weights,
            local_orders,
            conductor,
            parity: 1,
        };
        let m1 = chi.group.modulus as i64 - 1;
        chi.parity = match chi.angle_index(m1) {
            Some(0) => 1,
            _ => -1,
        };
        Ok(chi)
    }

    pub fn principal(group: Arc<DirichletGroup>) -> Self {
        let n = group.components.len();
        Self::new(group, vec![0; n]).expect("length matches")
    }

    pub fn group(&self) -> &Arc<DirichletGroup> {
        &self.group
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn parity(&self) -> i8 {
        self.parity
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    pub fn invariants(&self) -> CharacterInvariants {
        CharacterInvariants {
            conductor: self.conductor,
            order: self.order,
            parity: self.parity,
            primitive: self.is_primitive(),
        }
    }

    /// Rank of the exponent vector in the lexicographic enumeration of all characters.
    pub fn index(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.group.components)
            .fold(0u64, |acc, (&e, c)| acc * c.order + e)
    }

    /// `k` such that `chi(n) = e(k / order)`, or `None` when `gcd(n, q) > 1`.
    pub fn angle_index(&self, n: i64) -> Option<u64> {
        let g = &*self.group;
        let r = g.reduce(n);
        let mut acc: u128 = 0;
        let mut logs = [0u64; 2];
        for f in &g.factors {
            let x = r % f.modulus;
            if f.prime == 2 {
                if x % 2 == 0 {
                    return None;
                }
            } else if x % f.prime == 0 {
                return None;
            }
            let small = (f.first..f.first + f.count).all(|j| self.local_orders[j] <= POWER_RESIDUE_LIMIT);
            if small && f.table.get().is_none() {
                for j in f.first..f.first + f.count {
                    let d = g.dlog_mod(f, j, x, self.local_orders[j]);
                    // weight_j is a multiple of order / local_order_j
                    acc += self.weights[j] as u128 * d as u128;
                }
            } else {
                let packed = f.table(&g.components)[x as usize];
                f.unpack(packed, &mut logs[..f.count]);
                for (k, j) in (f.first..f.first + f.count).enumerate() {
                    acc += self.weights[j] as u128 * logs[k] as u128;
                }
            }
        }
        Some((acc % self.order as u128) as u64)
    }

    /// Exact value as a rational angle; `None` means the value is zero.
    pub fn eval_exact(&self, n: i64) -> Option<Angle> {
        self.angle_index(n).map(|k| Angle::from_unsigned(k, self.order))
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        match self.eval_exact(n) {
            Some(a) => a.to_complex(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `k` with `chi(n) = e(k/order)` for `n = 0..q`, `u32::MAX` marking zeros.
    pub fn period_table(&self) -> Vec<u32> {
        let g = &*self.group;
        g.ensure_tables();
        let q = g.modulus as usize;
        let mut out = vec![u32::MAX; q];
        let tables: Vec<&[u32]> = g.factors.iter().map(|f| f.table(&g.components)).collect();
        let mut residues = vec![0u64; g.factors.len()];
        let order = self.order;
        let mut logs = [0u64; 2];
        for slot in out.iter_mut() {
            let mut acc: u64 = 0;
            let mut unit = true;
            for (i, f) in g.factors.iter().enumerate() {
                let packed = tables[i][residues[i] as usize];
                if packed == NON_UNIT {
                    unit = false;
                    break;
                }
                f.unpack(packed, &mut logs[..f.count]);
                for (k, j) in (f.first..f.first + f.count).enumerate() {
                    acc = (acc + self.weights[j] * logs[k] % order) % order;
                }
            }
            if unit {
                *slot = acc as u32;
            }
            for (i, f) in g.factors.iter().enumerate() {
                residues[i] += 1;
                if residues[i] == f.modulus {
                    residues[i] = 0;
                }
            }
        }
        out
    }

    /// `e(k/order)` for `k = 0..order`.
    pub fn root_table(&self) -> Vec<Complex64> {
        (0..self.order)
            .map(|k| Angle::from_unsigned(k, self.order).to_complex())
            .collect()
    }

    pub fn conj(&self) -> DirichletCharacter {
        let e = self
            .exponents
            .iter()
            .zip(&self.group.components)
            .map(|(&e, c)| (c.order - e) % c.order)
            .collect();
        DirichletCharacter::new(self.group.clone(), e).expect("same group")
    }

    /// Lifts this character to the group `target`, whose modulus must be a multiple.
    pub fn induce_into(&self, target: &Arc<DirichletGroup>) -> Result<DirichletCharacter> {
        let f = self.modulus();
        if target.modulus % f != 0 {
            return domain(format!("{f} does not divide {}", target.modulus));
        }
        let mut exps = Vec::with_capacity(target.components.len());
        for c in &target.components {
            let x = target.lift_local(c.prime, c.generator);
            let a = self.eval_exact(x as i64).expect("lifted generator is a unit");
            exps.push(a.num() * (c.order / a.den()));
        }
        DirichletCharacter::new(target.clone(), exps)
    }

    /// The unique primitive character that induces this one.
    pub fn primitive_inducer(&self) -> DirichletCharacter {
        if self.is_primitive() {
            return self.clone();
        }
        let grp = DirichletGroup::lazy(self.conductor).expect("conductor divides modulus");
        let mut exps = Vec::with_capacity(grp.components.len());
        for c in &grp.components {
            let y = self.group.lift_local(c.prime, c.generator);
            let a = self.eval_exact(y as i64).expect("lift is a unit");
            exps.push(a.num() * (c.order / a.den()));
        }
        DirichletCharacter::new(grp, exps).expect("component count matches")
    }

    /// Product character modulo `lcm` of the two moduli.
    pub fn mul(&self, other: &DirichletCharacter) -> Result<DirichletCharacter> {
        let l = lcm(self.modulus(), other.modulus());
        let grp = if l == self.modulus() {
            self.group.clone()
        } else if l == other.modulus() {
            other.group.clone()
        } else {
            DirichletGroup::lazy(l)?
        };
        let a = self.induce_into(&grp)?;
        let b = other.induce_into(&grp)?;
        let e = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
        DirichletCharacter::new(grp, e)
    }

    /// `chi * conj(psi)`.
    pub fn mul_conj(&self, psi: &DirichletCharacter) -> Result<DirichletCharacter> {
        self.mul(&psi.conj())
    }
}

/// Filters for [`enumerate_characters`]; all set fields must hold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CharacterFilter {
    pub order_divides: Option<u64>,
    pub order_equals: Option<u64>,
    pub parity: Option<i8>,
    pub primitive_only: bool,
}

impl CharacterFilter {
    pub fn primitive() -> Self {
        CharacterFilter { primitive_only: true, ..Default::default() }
    }

    pub fn primitive_of_order(g: u64) -> Self {
        CharacterFilter { order_equals: Some(g), primitive_only: true, ..Default::default() }
    }

    fn torsion(&self) -> Option<u64> {
        match (self.order_divides, self.order_equals) {
            (Some(a), Some(b)) => Some(gcd(a, b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }
}

/// Characters of `group` passing `filter`, in lexicographic exponent order.
pub fn enumerate_characters(group: &Arc<DirichletGroup>, filter: &CharacterFilter) -> Vec<DirichletCharacter> {
    let torsion = filter.torsion();
    if torsion == Some(0) {
        return Vec::new();
    }
    // Per local factor: admissible exponent tuples, lexicographically sorted.
    let mut local_choices: Vec<Vec<Vec<u64>>> = Vec::with_capacity(group.factors.len());
    for f in &group.factors {
        let comps = &group.components[f.first..f.first + f.count];
        let steps: Vec<u64> = comps
            .iter()
            .map(|c| match torsion {
                Some(g) => c.order / gcd(c.order, g),
                None => 1,
            })
            .collect();
        let mut tuples: Vec<Vec<u64>> = vec![Vec::new()];
        for (c, &s) in comps.iter().zip(&steps) {
            let mut next = Vec::new();
            for t in &tuples {
                let mut e = 0;
                while e < c.order {
                    let mut v = t.clone();
                    v.push(e);
                    next.push(v);
                    e += s;
                }
            }
            tuples = next;
        }
        if filter.primitive_only {
            tuples.retain(|t| {
                let orders: Vec<u64> = t.iter().zip(comps).map(|(&e, c)| c.order / gcd(c.order, e)).collect();
                local_conductor(f, &orders) == f.modulus
            });
        }
        if tuples.is_empty() {
            return Vec::new();
        }
        local_choices.push(tuples);
    }

    let mut out = Vec::new();
    let mut idx = vec![0usize; local_choices.len()];
    loop {
        let exps: Vec<u64> = idx
            .iter()
            .zip(&local_choices)
            .flat_map(|(&i, ch)| ch[i].iter().copied())
            .collect();
        let chi = DirichletCharacter::new(group.clone(), exps).expect("length matches");
        let keep = filter.order_divides.map_or(true, |g| g % chi.order == 0)
            && filter.order_equals.map_or(true, |g| chi.order == g)
            && filter.parity.map_or(true, |p| chi.parity == p)
            && (!filter.primitive_only || chi.is_primitive());
        if keep {
            out.push(chi);
        }
        // odometer, last factor fastest
        let mut k = local_choices.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < local_choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Necessary condition for a primitive character mod `q` with order dividing `g`.
pub fn admits_primitive_order_dividing(q: u64, g: u64) -> bool {
    arith::factorize(q).into_iter().all(|(p, a)| {
        if p == 2 {
            match a {
                1 => false,
                2 => g % 2 == 0,
                _ => g % 2 == 0 && g % (1u64 << (a - 2)) == 0,
            }
        } else if a == 1 {
            gcd(g, p - 1) > 1
        } else {
            g % p.pow(a - 1) == 0
        }
    })
}

/// Result of [`count_induced_solutions`].
#[derive(Debug, Clone)]
pub struct InducedSearch {
    pub count: usize,
    pub witness: Option<DirichletCharacter>,
}

/// Largest modulus searched by [`count_induced_solutions`].
pub const INDUCED_SEARCH_LIMIT: u64 = 100_000;

/// Counts primitive `chi` for which `chi * psi` is induced by `xi`, by exhaustive search.
pub fn count_induced_solutions(xi: &DirichletCharacter, psi: &DirichletCharacter) -> Result<InducedSearch> {
    if !xi.is_primitive() || !psi.is_primitive() {
        return domain("both characters must be primitive");
    }
    let q = xi.modulus();
    let m = psi.modulus();
    if q > INDUCED_SEARCH_LIMIT {
        return capacity(format!("modulus {q} exceeds the search limit {INDUCED_SEARCH_LIMIT}"));
    }
    let mut result = InducedSearch { count: 0, witness: None };
    if q % m != 0 {
        // lcm(l, m) = q has no solution l
        return Ok(result);
    }
    let target = xi.group().clone();
    let psi_q = psi.induce_into(&target)?;
    for l in arith::divisors(q) {
        if lcm(l, m) != q {
            continue;
        }
        let grp = DirichletGroup::lazy(l)?;
        for chi in enumerate_characters(&grp, &CharacterFilter::primitive()) {
            let chi_q = chi.induce_into(&target)?;
            let matches = chi_q
                .exponents
                .iter()
                .zip(&psi_q.exponents)
                .zip(&target.components)
                .zip(&xi.exponents)
                .all(|(((a, b), c), x)| (a + b) % c.order == *x);
            if matches {
                result.count += 1;
                if result.witness.is_none() {
                    result.witness = Some(chi);
                }
            }
        }
    }
    Ok(result)
}

/// Conductor by direct constancy testing over divisors of `q`, smallest first.
pub fn conductor_by_constancy(chi: &DirichletCharacter) -> u64 {
    let q = chi.modulus();
    for d in arith::divisors(q) {
        let constant = (1..q.max(2))
            .step_by(d as usize)
            .filter(|&n| gcd(n, q) == 1)
            .all(|n| chi.angle_index(n as i64) == Some(0));
        if constant {
            return d;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(q: u64) -> Vec<DirichletCharacter> {
        enumerate_characters(&build_group(q).unwrap(), &CharacterFilter::default())
    }

    #[test]
    fn group_structure_examples() {
        let g7 = build_group(7).unwrap();
        assert_eq!(g7.components(), &[Component { prime: 7, prime_power: 7, generator: 3, order: 6 }]);
        assert_eq!(g7.phi(), 6);
        let g1 = build_group(1).unwrap();
        assert!(g1.components().is_empty());
        assert_eq!(g1.phi(), 1);
        let g15 = build_group(15).unwrap();
        let summary: Vec<(u64, u64, u64)> =
            g15.components().iter().map(|c| (c.prime_power, c.generator, c.order)).collect();
        assert_eq!(summary, vec![(3, 2, 2), (5, 2, 4)]);
        assert_eq!(g15.phi(), 8);
        let g16 = build_group(16).unwrap();
        let summary: Vec<(u64, u64)> = g16.components().iter().map(|c| (c.generator, c.order)).collect();
        assert_eq!(summary, vec![(15, 2), (5, 4)]);
    }

    #[test]
    fn build_group_errors() {
        assert!(matches!(build_group(0), Err(crate::Error::Domain(_))));
        assert!(matches!(build_group(MAX_MODULUS + 1), Err(crate::Error::Capacity(_))));
    }

    #[test]
    fn generators_have_full_order() {
        for q in 1..400u64 {
            let g = build_group(q).unwrap();
            for c in g.components() {
                assert_eq!(pow_mod(c.generator, c.order, c.prime_power), 1 % c.prime_power);
                for d in arith::divisors(c.order) {
                    if d < c.order {
                        assert_ne!(pow_mod(c.generator, d, c.prime_power), 1, "q={q}");
                    }
                }
            }
            assert_eq!(g.phi(), arith::euler_phi(q));
            for n in 0..q as i64 {
                match g.dlog(n) {
                    Some(logs) => assert_eq!(g.exp(&logs), n as u64 % q, "q={q} n={n}"),
                    None => assert!(arith::gcd(n as u64, q) > 1 || q == 1 && n == 0),
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let g7 = build_group(7).unwrap();
        let legendre = DirichletCharacter::new(g7.clone(), vec![3]).unwrap();
        assert_eq!(legendre.eval_exact(2), Some(Angle::ZERO));
        assert_eq!(legendre.eval_exact(3), Some(Angle::new(1, 2)));
        let cubic = DirichletCharacter::new(g7, vec![2]).unwrap();
        assert_eq!(cubic.eval_exact(3), Some(Angle::new(1, 3)));
        assert_eq!(cubic.eval_exact(5), Some(Angle::new(2, 3)));
        assert_eq!(cubic.eval_exact(-2), cubic.eval_exact(5));
        assert_eq!(cubic.eval_exact(14), None);
        for chi in chars(12) {
            assert_eq!(chi.eval_exact(1), Some(Angle::ZERO));
        }
    }

    #[test]
    fn enumeration_counts() {
        let g7 = build_group(7).unwrap();
        assert_eq!(enumerate_characters(&g7, &CharacterFilter::default()).len(), 6);
        let cubic = enumerate_characters(&g7, &CharacterFilter { order_equals: Some(3), ..Default::default() });
        let exps: Vec<u64> = cubic.iter().map(|c| c.exponents()[0]).collect();
        assert_eq!(exps, vec![2, 4]);
        let g8 = build_group(8).unwrap();
        assert_eq!(enumerate_characters(&g8, &CharacterFilter::primitive()).len(), 2);
    }

    #[test]
    fn filtered_enumeration_matches_full_scan() {
        for q in 1..=120u64 {
            let g = build_group(q).unwrap();
            let all = enumerate_characters(&g, &CharacterFilter::default());
            assert_eq!(all.len() as u64, g.phi());
            assert!(all.windows(2).all(|w| w[0].exponents() < w[1].exponents()));
            for order in [2u64, 3, 4, 6] {
                for prim in [false, true] {
                    for parity in [None, Some(1), Some(-1)] {
                        let filter = CharacterFilter { order_equals: Some(order), parity, primitive_only: prim, ..Default::default() };
                        let fast = enumerate_characters(&g, &filter);
                        let slow: Vec<_> = all
                            .iter()
                            .filter(|c| c.order() == order && parity.map_or(true, |p| c.parity() == p))
                            .filter(|c| !prim || conductor_by_constancy(c) == q)
                            .cloned()
                            .collect();
                        assert_eq!(fast, slow, "q={q} order={order}");
                    }
                }
                let div = enumerate_characters(&g, &CharacterFilter { order_divides: Some(order), ..Default::default() });
                assert_eq!(div.len(), all.iter().filter(|c| order % c.order() == 0).count());
            }
        }
    }

    #[test]
    fn admissibility_is_necessary() {
        for q in 1..=600u64 {
            let g = build_group(q).unwrap();
            for order in [2u64, 3, 5, 9] {
                let has = !enumerate_characters(&g, &CharacterFilter { order_divides: Some(order), primitive_only: true, ..Default::default() }).is_empty();
                assert_eq!(has, admits_primitive_order_dividing(q, order), "q={q} g={order}");
            }
        }
    }

    #[test]
    fn invariants_examples() {
        let p12 = DirichletCharacter::principal(build_group(12).unwrap());
        assert_eq!(p12.invariants(), CharacterInvariants { conductor: 1, order: 1, parity: 1, primitive: false });
        let l5 = DirichletCharacter::new(build_group(5).unwrap(), vec![2]).unwrap();
        assert_eq!(l5.invariants(), CharacterInvariants { conductor: 5, order: 2, parity: 1, primitive: true });
        let g9 = build_group(9).unwrap();
        let induced = enumerate_characters(&g9, &CharacterFilter { order_equals: Some(2), ..Default::default() });
        assert_eq!(induced.len(), 1);
        assert_eq!(induced[0].conductor(), 3);
        assert!(!induced[0].is_primitive());
    }

    #[test]
    fn structural_conductor_matches_constancy() {
        for q in 1..=200u64 {
            for chi in chars(q) {
                assert_eq!(chi.conductor(), conductor_by_constancy(&chi), "{chi:?}");
                assert_eq!(q % chi.conductor(), 0);
            }
        }
    }

    #[test]
    fn lazy_and_tabled_evaluation_agree() {
        for q in [7u64, 9, 16, 32, 63, 91, 120, 343, 1024] {
            let lazy = DirichletGroup::lazy(q).unwrap();
            let eager = build_group(q).unwrap();
            for (a, b) in enumerate_characters(&eager, &CharacterFilter::default()).iter().zip(
                enumerate_characters(&lazy, &CharacterFilter::default()).iter(),
            ) {
                for n in 0..q as i64 {
                    assert_eq!(a.angle_index(n), b.angle_index(n), "q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn period_table_matches_eval() {
        for q in [1u64, 2, 8, 15, 45, 97, 200] {
            for chi in chars(q) {
                let t = chi.period_table();
                for n in 0..q {
                    let expect = chi.angle_index(n as i64).map_or(u32::MAX, |k| k as u32);
                    assert_eq!(t[n as usize], expect);
                }
            }
        }
    }

    #[test]
    fn orthogonality() {
        for q in 1..=100u64 {
            let all = chars(q);
            let units: Vec<i64> = (1..=q as i64).filter(|&n| arith::gcd(n as u64, q) == 1).collect();
            for &a in units.iter().step_by(3) {
                for &b in &units {
                    let s: Complex64 = all.iter().map(|c| c.eval(a) * c.eval(b).conj()).sum();
                    let expect = if a == b { arith::euler_phi(q) as f64 } else { 0.0 };
                    assert!((s - expect).norm() < 1e-10, "q={q} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn odd_order_characters_are_even() {
        for q in 1..=300u64 {
            for chi in chars(q) {
                if chi.order() % 2 == 1 {
                    assert_eq!(chi.parity(), 1);
                }
                let v = chi.eval(-1);
                assert!((v.re - chi.parity() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn induce_examples() {
        let g3 = build_group(3).unwrap();
        let quad3 = DirichletCharacter::new(g3, vec![1]).unwrap();
        let g9 = build_group(9).unwrap();
        let up = quad3.induce_into(&g9).unwrap();
        assert_eq!(up.eval_exact(2), Some(Angle::new(1, 2)));
        for k in 0..10 {
            assert_eq!(up.eval_exact(3 * k), None);
        }
        assert_eq!(up.primitive_inducer(), quad3);
        assert_eq!(quad3.induce_into(quad3.group()).unwrap(), quad3);
        let trivial = DirichletCharacter::principal(build_group(1).unwrap());
        let p6 = trivial.induce_into(&build_group(6).unwrap()).unwrap();
        assert!(p6.is_principal());
        assert_eq!(p6.modulus(), 6);
        assert!(quad3.induce_into(&build_group(10).unwrap()).is_err());
    }

    #[test]
    fn inducer_round_trip() {
        for f in 1..=30u64 {
            for chi in enumerate_characters(&build_group(f).unwrap(), &CharacterFilter::primitive()) {
                for q in (f..=300).step_by(f as usize) {
                    let target = DirichletGroup::lazy(q).unwrap();
                    let up = chi.induce_into(&target).unwrap();
                    assert_eq!(up.conductor(), f);
                    assert_eq!(up.primitive_inducer(), chi, "f={f} q={q}");
                }
            }
        }
    }

    #[test]
    fn induced_solution_examples() {
        let g15 = build_group(15).unwrap();
        let xi = enumerate_characters(&g15, &CharacterFilter::primitive_of_order(2)).remove(0);
        let psi3 = DirichletCharacter::new(build_group(3).unwrap(), vec![1]).unwrap();
        assert_eq!(count_induced_solutions(&xi, &psi3).unwrap().count, 1);
        let psi7 = enumerate_characters(&build_group(7).unwrap(), &CharacterFilter::primitive()).remove(0);
        assert_eq!(count_induced_solutions(&xi, &psi7).unwrap().count, 0);
        let trivial = DirichletCharacter::principal(build_group(1).unwrap());
        let r = count_induced_solutions(&xi, &trivial).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.witness.unwrap(), xi);
    }

    #[test]
    fn multiplicativity_small() {
        for q in 1..=50u64 {
            for chi in chars(q) {
                for m in 0..q as i64 + 3 {
                    for n in [1i64, 2, 3, 5, 7, 11, 13, -1, -6] {
                        let lhs = chi.eval_exact(m * n);
                        let rhs = match (chi.eval_exact(m), chi.eval_exact(n)) {
                            (Some(a), Some(b)) => Some(a.add(b)),
                            _ => None,
                        };
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }
}
