//! The covering construction: pick a residue class mod every prime
//! `p < x` so that `(m0+1)^k + u - 1` is composite for all `u` in
//! `[2, y]` outside a small exceptional set `V`, then combine the
//! choices into `m0` by the Chinese remainder theorem.
//!
//! For k-th powers the residue `b` struck by `p` must satisfy
//! `1 - b = w^k mod p` for some witness `w`, otherwise the congruence
//! on `m0+1` is unsolvable. The construction is a greedy pass over the
//! primes in decreasing order: large primes strike sparse classes and
//! benefit most from a free choice.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{self, pow_mod, primorial};

/// k-th power residues mod p: `{ w^k mod p : 0 <= w < p }`.
/// Has `1 + (p-1)/gcd(k, p-1)` elements.
pub fn kth_power_residues(p: u64, k: u64) -> std::collections::BTreeSet<u64> {
    debug_assert!(primes::is_prime_u64(p));
    (0..p).map(|w| pow_mod(w, k, p)).collect()
}

/// Construction parameters: the prime bound `x` and the target interval
/// length `y`, either explicit or derived from
/// `y = floor(C10 * x * log x * log3 x / log2 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankinParameters {
    pub x: u64,
    pub y: u64,
    /// None when y was supplied explicitly (required below the
    /// iterated-log threshold), Some(c10) when derived.
    pub c10: Option<f64>,
}

impl RankinParameters {
    pub fn with_explicit_y(x: u64, y: u64) -> Result<Self> {
        if y < 2 {
            return Err(Error::InvalidParameter("interval bound y must be >= 2".into()));
        }
        Ok(RankinParameters { x, y, c10: None })
    }

    /// Derive y from the gap-scale formula; only defined once
    /// `log log log x > 0`, i.e. `x > e^e`.
    pub fn from_c10(x: u64, c10: f64) -> Result<Self> {
        let lx = (x as f64).ln();
        let l2 = lx.ln();
        if !(l2 > 0.0) || !(l2.ln() > 0.0) {
            return Err(Error::Domain(format!(
                "log3({x}) is not positive; supply y explicitly at this scale"
            )));
        }
        let l3 = l2.ln();
        let y = (c10 * x as f64 * lx * l3 / l2).floor();
        if !(y >= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "derived y = {y} is below 2; increase c10 or x"
            )));
        }
        Ok(RankinParameters {
            x,
            y: y as u64,
            c10: Some(c10),
        })
    }
}

/// The struck residue class and its k-th power witness for one prime:
/// `w^k = 1 - b mod p`, so every `u = b mod p` makes
/// `(m0+1)^k + u - 1` divisible by `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueChoice {
    pub p: u64,
    pub b: u64,
    pub w: u64,
}

/// Per-prime greedy statistics: how many u in [2, y] the prime's class
/// covered that nothing earlier had.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverStat {
    pub p: u64,
    pub newly_covered: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringPlan {
    pub x: u64,
    pub y: u64,
    pub k: u64,
    /// One entry per prime p < x, decreasing p.
    pub choices: Vec<ResidueChoice>,
    pub m0: BigUint,
    /// P(x), the CRT modulus.
    pub modulus: BigUint,
    /// Offsets in [2, y] covered by no class, ascending.
    pub v: Vec<u64>,
    pub stats: Vec<CoverStat>,
}

/// Greedy covering: primes p < x in decreasing order each strike the
/// admissible class that covers the most not-yet-covered offsets.
/// Admissible means `1 - b` is a nonzero k-th power residue mod p
/// (witness w = 0 would force p | m0+1, poisoning every row built on
/// this plan, so it is excluded). Ties break to the smallest b; a prime
/// with nothing new to cover takes b = 0, w = 1.
pub fn build_covering(params: &RankinParameters, k: u64) -> Result<CoveringPlan> {
    let (x, y) = (params.x, params.y);
    if x < 11 {
        return Err(Error::InvalidParameter("prime bound x must be at least 11".into()));
    }
    if y < 2 {
        return Err(Error::InvalidParameter("interval bound y must be >= 2".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("power k must be >= 1".into()));
    }

    let p_table = primorial(x);
    let mut ps: Vec<u64> = Vec::new();
    {
        let mut n = 2u64;
        while n < x {
            if primes::is_prime_u64(n) {
                ps.push(n);
            }
            n += 1;
        }
    }
    ps.reverse();

    // covered[u - 2] for u in [2, y]
    let len = (y - 1) as usize;
    let mut covered = vec![false; len];
    let mut choices = Vec::with_capacity(ps.len());
    let mut stats = Vec::with_capacity(ps.len());

    for &p in &ps {
        let residues = kth_power_residues(p, k);
        let mut best_b = 0u64;
        let mut best_count = 0u64;
        for b in 0..p {
            let need = (1 + p - b % p) % p; // 1 - b mod p
            if need == 0 || !residues.contains(&need) {
                continue;
            }
            let mut count = 0u64;
            let mut u = first_in_class(b, p, y);
            while let Some(v) = u {
                if !covered[(v - 2) as usize] {
                    count += 1;
                }
                u = if v + p <= y { Some(v + p) } else { None };
            }
            if count > best_count {
                best_count = count;
                best_b = b;
            }
        }
        let (b, w) = if best_count == 0 {
            (0, 1)
        } else {
            let need = (1 + p - best_b % p) % p;
            let w = (1..p).find(|&w| pow_mod(w, k, p) == need).expect("admissible class has a witness");
            (best_b, w)
        };
        let mut newly = 0u64;
        let mut u = first_in_class(b, p, y);
        while let Some(v) = u {
            if !covered[(v - 2) as usize] {
                covered[(v - 2) as usize] = true;
                newly += 1;
            }
            u = if v + p <= y { Some(v + p) } else { None };
        }
        choices.push(ResidueChoice { p, b, w });
        stats.push(CoverStat {
            p,
            newly_covered: newly,
        });
    }

    // CRT: m0 + 1 = w_p mod p for every p < x, reduced into [1, P(x)]
    let mut acc_r = BigUint::one();
    let mut acc_m = BigUint::one();
    for c in &choices {
        let p_big = BigUint::from(c.p);
        let r_mod_p = (&acc_r % &p_big).to_u64().unwrap();
        let m_mod_p = (&acc_m % &p_big).to_u64().unwrap();
        let diff = (c.w + c.p - r_mod_p % c.p) % c.p;
        let t = primes::mul_mod(diff, mod_inverse(m_mod_p, c.p), c.p);
        acc_r += &acc_m * BigUint::from(t);
        acc_m *= p_big;
    }
    debug_assert_eq!(acc_m, p_table.value);
    // acc_r = (m0+1) mod P(x), never 0 since every witness is a unit.
    // acc_r = 1 would give m0 = 0; shift to the representative P(x).
    let m0 = if acc_r.is_one() {
        p_table.value.clone()
    } else {
        &acc_r - 1u32
    };

    let v: Vec<u64> = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| i as u64 + 2)
        .collect();

    let plan = CoveringPlan {
        x,
        y,
        k,
        choices,
        m0,
        modulus: p_table.value,
        v,
        stats,
    };
    debug_assert!(verify_covering(&plan).is_ok());
    Ok(plan)
}

/// Smallest u in [2, y] with u = b mod p.
fn first_in_class(b: u64, p: u64, y: u64) -> Option<u64> {
    let mut u = b % p;
    while u < 2 {
        u += p;
    }
    if u <= y {
        Some(u)
    } else {
        None
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p prime, gcd(a, p) = 1
    pow_mod(a % p, p - 2, p)
}

#[derive(Debug, Clone)]
pub struct CoveringReport {
    pub v_size: u64,
    pub v_ratio: f64,
    /// |V| against the x^(1/2) scale it is expected to track.
    pub v_vs_sqrt_x: f64,
    /// Every plan entry exceeds the striking prime, so divisibility
    /// really means compositeness.
    pub entries_exceed_primes: bool,
}

/// Independent re-verification of a plan: recomputes, for every
/// u in [2, y], whether `(m0+1)^k + u - 1` has a prime factor below x
/// by direct modular reduction of the big integer, and confirms V.
pub fn verify_covering(plan: &CoveringPlan) -> Result<CoveringReport> {
    let base = num_traits::Pow::pow(&(&plan.m0 + 1u32), plan.k as u32);

    // the smallest matrix entry must dwarf every striking prime
    let entries_exceed_primes = base > BigUint::from(plan.x);
    if !entries_exceed_primes {
        return Err(Error::Inconsistency(
            "matrix entries do not exceed the striking primes; divisibility would not imply compositeness".into(),
        ));
    }

    let residues: Vec<(u64, u64)> = plan
        .choices
        .iter()
        .map(|c| (c.p, (&base % BigUint::from(c.p)).to_u64().unwrap()))
        .collect();

    let mut v_verify = Vec::new();
    for u in 2..=plan.y {
        let covered = residues
            .iter()
            .any(|&(p, base_mod)| (base_mod + (u - 1) % p) % p == 0);
        if !covered {
            v_verify.push(u);
        }
    }
    if v_verify != plan.v {
        return Err(Error::Inconsistency(format!(
            "recomputed exceptional set (size {}) differs from the plan's (size {})",
            v_verify.len(),
            plan.v.len()
        )));
    }

    // CRT spot check: (m0+1) = w_p mod p for every choice
    let m1 = &plan.m0 + 1u32;
    for c in &plan.choices {
        let got = (&m1 % BigUint::from(c.p)).to_u64().unwrap();
        if got != c.w % c.p {
            return Err(Error::Inconsistency(format!(
                "CRT failed at p = {}: m0+1 = {got}, expected witness {}",
                c.p, c.w
            )));
        }
    }

    Ok(CoveringReport {
        v_size: plan.v.len() as u64,
        v_ratio: plan.v.len() as f64 / plan.y as f64,
        v_vs_sqrt_x: plan.v.len() as f64 / (plan.x as f64).sqrt(),
        entries_exceed_primes,
    })
}

/// Recompute |V| with one prime's striking suppressed entirely;
/// dropping a class can only uncover offsets.
pub fn v_size_without_prime(plan: &CoveringPlan, skip: u64) -> u64 {
    let mut uncovered = 0u64;
    for u in 2..=plan.y {
        let covered = plan
            .choices
            .iter()
            .filter(|c| c.p != skip)
            .any(|c| u % c.p == c.b % c.p);
        if !covered {
            uncovered += 1;
        }
    }
    uncovered
}
