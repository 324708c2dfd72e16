//! Prime tables and the smallest-prime-factor sieve used for friable sums.

/// All primes `<= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(if n > 10 { (1.3 * n as f64 / (n as f64).ln()) as usize } else { 8 });
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table on `[0, limit]`; `spf[0] = spf[1] = 0`.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfSieve { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    pub fn largest_prime_factor(&self, mut n: u64) -> u64 {
        let mut largest = 1;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            largest = p;
            n /= p;
        }
        largest
    }

    /// Whether every prime factor of `n` is at most `y` (1 is friable).
    pub fn is_friable(&self, n: u64, y: f64) -> bool {
        self.largest_prime_factor(n) as f64 <= y
    }

    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, a)) if *q == p => *a += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Friability flags for `0..=limit` against the bound `y`.
    pub fn friable_flags(&self, y: f64) -> Vec<bool> {
        let n = self.spf.len();
        let mut flags = vec![false; n];
        if n > 1 {
            flags[1] = true;
        }
        for i in 2..n {
            let p = self.spf[i] as usize;
            flags[i] = (p as f64) <= y && flags[i / p];
        }
        flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith;

    #[test]
    fn primes_match_trial_division() {
        let ps = primes_up_to(1000);
        assert_eq!(ps.len(), 168);
        let brute: Vec<u64> = (0..=1000).filter(|&n| arith::is_prime(n)).collect();
        assert_eq!(ps, brute);
        assert!(primes_up_to(1).is_empty());
        assert_eq!(primes_up_to(2), vec![2]);
    }

    #[test]
    fn friable_flags_agree_with_factorisation() {
        let s = SpfSieve::new(500);
        let flags = s.friable_flags(7.0);
        for n in 1..=500u64 {
            let brute = arith::factorize(n).iter().all(|&(p, _)| p <= 7);
            assert_eq!(flags[n as usize], brute, "n={n}");
            assert_eq!(s.is_friable(n, 7.0), brute);
            assert_eq!(s.factorize(n), arith::factorize(n));
        }
    }
}
