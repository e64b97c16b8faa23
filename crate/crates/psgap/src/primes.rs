//! Prime generation and counting: segmented sieve, primorials,
//! progression-restricted pi/theta and prime-gap scanning.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hp::{self, Real};

/// Default limit budget for [`PrimeTable::sieve`]; beyond this the prime
/// vector alone would dominate memory.
pub const DEFAULT_SIEVE_BUDGET: u64 = 1_000_000_000;

const SEGMENT_SIZE: u64 = 1 << 20;

/// All primes up to a fixed limit, in increasing order.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

/// A pair of consecutive primes at distance `gap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub lower: u64,
    pub upper: u64,
    pub gap: u64,
}

impl PrimeTable {
    /// Sieve everything up to `limit` under the default memory budget.
    pub fn sieve(limit: u64) -> Result<Self> {
        Self::sieve_with_budget(limit, DEFAULT_SIEVE_BUDGET)
    }

    /// Segmented sieve of Eratosthenes; segments of 2^20 keep the working
    /// set bounded regardless of `limit`.
    pub fn sieve_with_budget(limit: u64, budget: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidParameter(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit > budget {
            return Err(Error::ResourceLimit {
                what: format!("sieve limit {limit}"),
                budget,
            });
        }
        let root = (limit as f64).sqrt() as u64 + 2;
        let base = simple_sieve(root.min(limit));
        let mut primes: Vec<u64> =
            Vec::with_capacity((limit as f64 / (limit as f64).ln() * 1.15) as usize + 16);
        primes.extend(base.iter().copied().filter(|&p| p <= limit));

        let mut segment = vec![false; SEGMENT_SIZE as usize];
        let mut low = root + 1;
        while low <= limit {
            let high = (low + SEGMENT_SIZE - 1).min(limit);
            let len = (high - low + 1) as usize;
            segment[..len].fill(false);
            for &p in &base {
                if p * p > high {
                    break;
                }
                let mut start = low.div_ceil(p) * p;
                if start < p * p {
                    start = p * p;
                }
                let mut j = start;
                while j <= high {
                    segment[(j - low) as usize] = true;
                    j += p;
                }
            }
            for (i, &composite) in segment[..len].iter().enumerate() {
                if !composite {
                    primes.push(low + i as u64);
                }
            }
            low = high + 1;
        }
        Ok(PrimeTable { limit, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership query for `n <= limit`.
    pub fn contains(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit, "membership query beyond table limit");
        self.primes.binary_search(&n).is_ok()
    }

    /// pi(u): number of primes `<= u`.
    pub fn pi(&self, u: u64) -> Result<u64> {
        self.check_range(u)?;
        Ok(self.primes.partition_point(|&p| p <= u) as u64)
    }

    /// Largest prime `<= n`, if any.
    pub fn largest_prime_leq(&self, n: u64) -> Option<u64> {
        debug_assert!(n <= self.limit);
        let idx = self.primes.partition_point(|&p| p <= n);
        if idx == 0 {
            None
        } else {
            Some(self.primes[idx - 1])
        }
    }

    /// Smallest prime `> n` still inside the table.
    pub fn next_prime_after(&self, n: u64) -> Option<u64> {
        let idx = self.primes.partition_point(|&p| p <= n);
        self.primes.get(idx).copied()
    }

    fn check_range(&self, u: u64) -> Result<()> {
        if u > self.limit {
            return Err(Error::OutOfRange {
                what: "query bound u",
                value: u,
                max: self.limit,
            });
        }
        Ok(())
    }

    fn check_progression(d: u64, a: u64) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidParameter("modulus d must be >= 1".into()));
        }
        if d == 1 {
            if a != 0 {
                return Err(Error::InvalidParameter(
                    "d = 1 takes the all-primes convention a = 0".into(),
                ));
            }
        } else if gcd(a % d, d) != 1 {
            return Err(Error::InvalidParameter(format!(
                "residue {a} is not coprime to modulus {d}"
            )));
        }
        Ok(())
    }

    /// Primes `<= u` congruent to `a` mod `d`. `d = 1, a = 0` counts all primes.
    pub fn count_in_progression(&self, u: u64, d: u64, a: u64) -> Result<u64> {
        self.check_range(u)?;
        Self::check_progression(d, a)?;
        Ok(self.matching_primes(u, d, a).count() as u64)
    }

    /// theta(u; d, a) = sum of ln p over matching primes, extended precision.
    pub fn theta_in_progression(&self, u: u64, d: u64, a: u64) -> Result<Real> {
        self.check_range(u)?;
        Self::check_progression(d, a)?;
        let mut acc = Real::from(0.0);
        for p in self.matching_primes(u, d, a) {
            acc += hp::ln_u64(p);
        }
        Ok(acc)
    }

    pub(crate) fn matching_primes(&self, u: u64, d: u64, a: u64) -> impl Iterator<Item = u64> + '_ {
        let a = if d > 1 { a % d } else { 0 };
        self.primes
            .iter()
            .copied()
            .take_while(move |&p| p <= u)
            .filter(move |&p| d == 1 || p % d == a)
    }

    /// All consecutive-prime pairs with gap >= `min_gap`, by lower endpoint.
    pub fn scan_gaps(&self, min_gap: u64) -> Vec<GapRecord> {
        self.primes
            .windows(2)
            .filter(|w| w[1] - w[0] >= min_gap)
            .map(|w| GapRecord {
                lower: w[0],
                upper: w[1],
                gap: w[1] - w[0],
            })
            .collect()
    }

    /// Record gaps: every consecutive pair whose gap exceeds all earlier gaps.
    pub fn maximal_gaps(&self) -> Vec<GapRecord> {
        let mut best = 0;
        let mut out = Vec::new();
        for w in self.primes.windows(2) {
            let gap = w[1] - w[0];
            if gap > best {
                best = gap;
                out.push(GapRecord {
                    lower: w[0],
                    upper: w[1],
                    gap,
                });
            }
        }
        out
    }
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller-Rabin for the full u64 range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    // This witness set decides primality for every n < 3.3 * 10^24.
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// P(x): product of all primes strictly below x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Primorial {
    pub x: u64,
    pub value: BigUint,
}

pub fn primorial(x: u64) -> Primorial {
    let value = if x <= 2 {
        BigUint::one()
    } else {
        simple_sieve(x - 1)
            .into_iter()
            .map(BigUint::from)
            .product()
    };
    Primorial { x, value }
}

/// Q(x) = product of primes in (x, P(x)], kept in factored form: the full
/// product is astronomically large already at desk scale, so only the
/// prime list up to a caller-set bound is ever materialized.
#[derive(Debug, Clone)]
pub struct CoprimorialFactors {
    pub x: u64,
    pub primes: Vec<u64>,
    /// Set when P(x) exceeds the enumeration bound and the factor list stops early.
    pub truncated: bool,
}

pub fn coprimorial(x: u64, p: &Primorial, enumeration_bound: u64) -> Result<CoprimorialFactors> {
    if x < 2 {
        return Err(Error::InvalidParameter("coprimorial needs x >= 2".into()));
    }
    if p.x != x {
        return Err(Error::InvalidParameter(format!(
            "primorial was built for x = {}, not x = {x}",
            p.x
        )));
    }
    let truncated = p.value > BigUint::from(enumeration_bound);
    let upper = if truncated {
        enumeration_bound
    } else {
        // fits u64 by the comparison above
        p.value.to_u64().expect("checked against bound")
    };
    let primes = if upper <= x {
        Vec::new()
    } else {
        simple_sieve(upper).into_iter().filter(|&q| q > x).collect()
    };
    Ok(CoprimorialFactors {
        x,
        primes,
        truncated,
    })
}
