//! Piatetski-Shapiro sequences: values `floor(l^c)`, membership,
//! counting in progressions, and the two-term asymptotic comparison.
//!
//! The exponent is carried as an exact rational `c = num/den`. Floor
//! powers are evaluated through a certification ladder: plain f64,
//! then extended precision, then (only when the value sits on an
//! integer boundary) an exact big-integer comparison. An off-by-one in
//! any floor silently corrupts every count downstream, so no stage is
//! trusted past its rigorous error bound.

use num_bigint::BigUint;
use num_traits::Pow;

use crate::error::{Error, Result};
use crate::hp::{self, Real};
use crate::primes::{gcd, PrimeTable};

/// Exponent parameters: `c` in (1, 18/17) held as an exact rational,
/// with the starting precision for floor-power evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PsParameters {
    c_num: u64,
    c_den: u64,
    precision_bits: u32,
}

impl PsParameters {
    /// `c = num/den`, reduced; must satisfy `1 < c < 18/17`.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::InvalidParameter("exponent must be a positive rational".into()));
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        if num <= den {
            return Err(Error::InvalidParameter(format!(
                "c = {num}/{den} must exceed 1"
            )));
        }
        if (num as u128) * 17 >= (den as u128) * 18 {
            return Err(Error::InvalidParameter(format!(
                "c = {num}/{den} must stay below 18/17"
            )));
        }
        Ok(PsParameters {
            c_num: num,
            c_den: den,
            precision_bits: 53,
        })
    }

    /// Parse `"1.05"` or `"21/20"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num: u64 = n.trim().parse().map_err(|_| bad_exponent(s))?;
            let den: u64 = d.trim().parse().map_err(|_| bad_exponent(s))?;
            return Self::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 12 || frac.chars().any(|ch| !ch.is_ascii_digit()) {
                return Err(bad_exponent(s));
            }
            let int: u64 = int.parse().map_err(|_| bad_exponent(s))?;
            let num_frac: u64 = frac.parse().map_err(|_| bad_exponent(s))?;
            let den = 10u64.pow(frac.len() as u32);
            return Self::new(int * den + num_frac, den);
        }
        let int: u64 = s.parse().map_err(|_| bad_exponent(s))?;
        Self::new(int, 1)
    }

    /// Raise the starting precision of the certification ladder
    /// (values above 53 skip the f64 rung).
    pub fn with_precision_bits(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    pub fn c_rational(&self) -> (u64, u64) {
        (self.c_num, self.c_den)
    }

    pub fn c_f64(&self) -> f64 {
        self.c_num as f64 / self.c_den as f64
    }

    pub fn gamma_f64(&self) -> f64 {
        self.c_den as f64 / self.c_num as f64
    }

    pub fn c_real(&self) -> Real {
        hp::from_u64(self.c_num) / hp::from_u64(self.c_den)
    }

    pub fn gamma_real(&self) -> Real {
        hp::from_u64(self.c_den) / hp::from_u64(self.c_num)
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }
}

impl std::str::FromStr for PsParameters {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn bad_exponent(s: &str) -> Error {
    Error::InvalidParameter(format!("cannot parse exponent {s:?} (want a decimal like 1.05 or a fraction like 21/20)"))
}

/// Result of a certified floor-power evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifiedFloor {
    pub value: u64,
    /// True when `base^(num/den)` is exactly this integer.
    pub exact: bool,
}

const U63: f64 = 9.223372036854776e18; // 2^63
/// Escalation trigger at the base rung: re-evaluate whenever the value
/// lies this close to an integer boundary.
const BOUNDARY_GUARD: f64 = 9.5367431640625e-7; // 2^-20
/// Conservative relative error of the f64 exp(ln) composite.
const F64_REL_ERR: f64 = 1e-14;
/// Conservative relative error of the extended-precision composite.
const DD_REL_ERR: f64 = 1e-28;

/// floor(base^(num/den)) with gcd(num, den) = 1, certified.
pub(crate) fn floor_pow_rational(
    base: u64,
    num: u64,
    den: u64,
    precision_bits: u32,
) -> Result<CertifiedFloor> {
    debug_assert!(gcd(num, den) == 1);
    assert!(base >= 1 && num >= 1 && den >= 1);
    if base == 1 {
        return Ok(CertifiedFloor { value: 1, exact: true });
    }
    if den == 1 {
        let b = BigUint::from(base);
        let v = Pow::pow(&b, num as u32);
        let value = to_u64_checked(&v)?;
        return Ok(CertifiedFloor { value, exact: true });
    }

    if precision_bits <= 53 {
        let v = (num as f64 / den as f64 * (base as f64).ln()).exp();
        if v < 9.007199254740992e15 {
            // below 2^53: fract() is meaningful
            let fl = v.floor();
            let dist = (v - fl).min(fl + 1.0 - v);
            if dist > (v * F64_REL_ERR).max(BOUNDARY_GUARD) {
                return Ok(CertifiedFloor { value: fl as u64, exact: false });
            }
        }
        // fall through: boundary case or magnitude beyond f64 resolution
    }

    let c_dd = hp::from_u64(num) / hp::from_u64(den);
    let v2 = hp::exp(c_dd * hp::ln_u64(base));
    let v2f = hp::to_f64(v2);
    if v2f < U63 * 0.9999999 {
        let fl2 = v2.floor();
        let dist = hp::to_f64((v2 - fl2).min(fl2 + 1.0 - v2));
        if dist > v2f * DD_REL_ERR {
            return Ok(CertifiedFloor { value: dd_to_u64(fl2), exact: false });
        }
    } else if v2f > U63 * 1.0000001 {
        return Err(Error::Overflow(format!("{base}^({num}/{den}) exceeds 2^63")));
    }

    // Exact stage: certify k via k^den <= base^num < (k+1)^den.
    let bn = Pow::pow(&BigUint::from(base), num as u32);
    let mut k = dd_to_u64(v2.round());
    let pow_k = |k: u64| Pow::pow(&BigUint::from(k), den as u32);
    while k > 0 && pow_k(k) > bn {
        k -= 1;
    }
    while pow_k(k + 1) <= bn {
        k += 1;
    }
    if k >= 1u64 << 63 {
        return Err(Error::Overflow(format!("{base}^({num}/{den}) exceeds 2^63")));
    }
    Ok(CertifiedFloor { value: k, exact: pow_k(k) == bn })
}

/// ceil(base^(num/den)), certified.
pub(crate) fn ceil_pow_rational(base: u64, num: u64, den: u64, precision_bits: u32) -> Result<u64> {
    let fl = floor_pow_rational(base, num, den, precision_bits)?;
    Ok(if fl.exact { fl.value } else { fl.value + 1 })
}

fn dd_to_u64(x: Real) -> u64 {
    debug_assert!(x.hi() >= 0.0);
    let hi = x.hi() as i128;
    let lo = x.lo().round() as i128;
    (hi + lo).max(0) as u64
}

fn to_u64_checked(v: &BigUint) -> Result<u64> {
    use num_traits::ToPrimitive;
    match v.to_u64() {
        Some(x) if x < 1u64 << 63 => Ok(x),
        _ => Err(Error::Overflow("value exceeds 2^63".into())),
    }
}

/// The l-th sequence element, `floor(l^c)`.
pub fn ps_value(l: u64, params: &PsParameters) -> Result<u64> {
    if l == 0 {
        return Err(Error::InvalidParameter("sequence index l starts at 1".into()));
    }
    Ok(floor_pow_rational(l, params.c_num, params.c_den, params.precision_bits)?.value)
}

/// Does `p` occur as `floor(l^c)` for some integer `l`?
///
/// The only candidate is `l* = ceil(p^(1/c))`: any `l` with
/// `floor(l^c) = p` satisfies `p^(1/c) <= l < (p+1)^(1/c)`, and the
/// smallest such integer is `l*`.
pub fn ps_member(p: u64, params: &PsParameters) -> Result<bool> {
    if p == 0 {
        return Ok(false);
    }
    let l_star = ceil_pow_rational(p, params.c_den, params.c_num, params.precision_bits)?;
    Ok(ps_value(l_star, params)? == p)
}

/// All primes `<= w` that are sequence members, computed twice — by
/// membership filtering and by forward generation — which must agree
/// exactly or the precision machinery has a bug.
pub fn ps_primes_up_to(w: u64, params: &PsParameters, table: &PrimeTable) -> Result<Vec<u64>> {
    if w > table.limit() {
        return Err(Error::OutOfRange {
            what: "query bound w",
            value: w,
            max: table.limit(),
        });
    }
    let filtered: Vec<u64> = table
        .primes()
        .iter()
        .copied()
        .take_while(|&p| p <= w)
        .filter_map(|p| match ps_member(p, params) {
            Ok(true) => Some(Ok(p)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;

    let mut generated = Vec::new();
    let mut l = 1u64;
    loop {
        let v = match ps_value(l, params) {
            Ok(v) => v,
            Err(Error::Overflow(_)) => break,
            Err(e) => return Err(e),
        };
        if v > w {
            break;
        }
        if v >= 2 && table.contains(v) {
            generated.push(v);
        }
        l += 1;
    }

    if filtered != generated {
        let in_f: Vec<_> = filtered.iter().filter(|p| !generated.contains(p)).collect();
        let in_g: Vec<_> = generated.iter().filter(|p| !filtered.contains(p)).collect();
        return Err(Error::Inconsistency(format!(
            "membership-filtered and forward-generated sequence prime sets disagree at w = {w}: \
             only-filtered {in_f:?}, only-generated {in_g:?}"
        )));
    }
    Ok(filtered)
}

/// Count of sequence primes `<= w` in the progression `a mod d`.
pub fn ps_count_in_progression(
    w: u64,
    d: u64,
    a: u64,
    params: &PsParameters,
    table: &PrimeTable,
) -> Result<u64> {
    check_progression(d, a)?;
    let members = ps_primes_up_to(w, params, table)?;
    Ok(members
        .iter()
        .filter(|&&p| d == 1 || p % d == a % d)
        .count() as u64)
}

fn check_progression(d: u64, a: u64) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("modulus d must be >= 1".into()));
    }
    if d > 1 && gcd(a % d, d) != 1 {
        return Err(Error::InvalidParameter(format!(
            "residue {a} is not coprime to modulus {d}"
        )));
    }
    Ok(())
}

/// Exact count vs. the two-term approximation
/// `gamma w^(gamma-1) pi(w; d, a) + gamma (1-gamma) I`, where
/// `I = integral of u^(gamma-2) pi(u; d, a) from 2 to w`.
#[derive(Debug, Clone)]
pub struct PsCountComparison {
    pub w: u64,
    pub d: u64,
    pub a: u64,
    pub exact_count: u64,
    pub main_term: Real,
    pub integral_term: Real,
    pub relative_error: Real,
}

/// `pi(u; d, a)` is a step function, so the integral is a finite sum.
/// Summed in the Abel-rearranged form
/// `I = (n w^(gamma-1) - sum_i q_i^(gamma-1)) / (gamma-1)`,
/// which avoids the catastrophic cancellation of differencing
/// `q^(gamma-1)` at consecutive primes.
pub fn ps_asymptotic_terms(
    w: u64,
    d: u64,
    a: u64,
    params: &PsParameters,
    table: &PrimeTable,
) -> Result<PsCountComparison> {
    check_progression(d, a)?;
    if w > table.limit() {
        return Err(Error::OutOfRange {
            what: "query bound w",
            value: w,
            max: table.limit(),
        });
    }
    let (num, den) = params.c_rational();
    if num == den {
        return Err(Error::InvalidParameter(
            "gamma = 1 (c = 1) degenerates the asymptotic terms".into(),
        ));
    }
    let gamma = params.gamma_real();
    let gm1 = gamma - 1.0;

    let qs: Vec<u64> = table.matching_primes(w, d, a).collect();
    let n = qs.len();
    let w_pow = hp::exp(gm1 * hp::ln_u64(w.max(1)));
    let main_term = if n == 0 {
        Real::from(0.0)
    } else {
        gamma * w_pow * (n as f64)
    };

    let integral_term = if n == 0 {
        Real::from(0.0)
    } else {
        let mut sum_pows = Real::from(0.0);
        for &q in &qs {
            sum_pows += hp::exp(gm1 * hp::ln_u64(q));
        }
        let integral = (w_pow * (n as f64) - sum_pows) / gm1;
        gamma * (Real::from(1.0) - gamma) * integral
    };

    let exact_count = ps_count_in_progression(w, d, a, params, table)?;
    let approx = main_term + integral_term;
    let denom = (exact_count.max(1)) as f64;
    let relative_error = ((hp::from_u64(exact_count) - approx) / denom).abs();

    Ok(PsCountComparison {
        w,
        d,
        a,
        exact_count,
        main_term,
        integral_term,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Roots;

    /// Independent oracle: floor(base^(num/den)) by integer nth root of base^num.
    fn floor_pow_oracle(base: u64, num: u64, den: u64) -> u64 {
        use num_traits::ToPrimitive;
        let b = Pow::pow(&BigUint::from(base), num as u32);
        b.nth_root(den as u32).to_u64().unwrap()
    }

    fn c105() -> PsParameters {
        PsParameters::new(21, 20).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(PsParameters::new(1, 1).is_err()); // c = 1
        assert!(PsParameters::new(18, 17).is_err()); // c = 18/17 excluded
        assert!(PsParameters::new(19, 17).is_err()); // too big
        let p = PsParameters::new(105, 100).unwrap();
        assert_eq!(p.c_rational(), (21, 20)); // reduced
        assert_eq!(PsParameters::parse("1.05").unwrap().c_rational(), (21, 20));
        assert_eq!(PsParameters::parse("21/20").unwrap().c_rational(), (21, 20));
        assert_eq!(
            PsParameters::parse("1.01").unwrap().c_rational(),
            (101, 100)
        );
        assert!(PsParameters::parse("one").is_err());
        // gamma * c = 1 exactly in the rational representation
        let g = p.gamma_f64();
        assert!((g * p.c_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ps_value_examples() {
        let p = c105();
        assert_eq!(ps_value(1, &p).unwrap(), 1);
        assert_eq!(ps_value(2, &p).unwrap(), 2); // 2^1.05 = 2.07053...
        assert_eq!(ps_value(100, &p).unwrap(), 125); // 125.8925...
        assert!(ps_value(0, &p).is_err());
    }

    #[test]
    fn ps_value_exact_power_boundary() {
        // l = 2^20 makes l^(21/20) = 2^21 exactly: the ladder must land
        // on the exact stage and still floor correctly.
        let p = c105();
        assert_eq!(ps_value(1 << 20, &p).unwrap(), 1 << 21);
        let fl = floor_pow_rational(1 << 20, 21, 20, 53).unwrap();
        assert!(fl.exact);
    }

    #[test]
    fn ps_value_matches_oracle_exhaustively() {
        for (num, den) in [(101u64, 100u64), (103, 100), (21, 20), (17983, 17000)] {
            let p = PsParameters::new(num, den).unwrap();
            for l in 1..=30_000u64 {
                let got = ps_value(l, &p).unwrap();
                let want = floor_pow_oracle(l, num, den);
                assert_eq!(got, want, "l = {l}, c = {num}/{den}");
            }
        }
    }

    #[test]
    fn ps_value_large_inputs_match_oracle() {
        let p = c105();
        for l in [1_000_000u64, 123_456_789, 4_000_000_000, 100_000_000_000] {
            assert_eq!(ps_value(l, &p).unwrap(), floor_pow_oracle(l, 21, 20));
        }
    }

    #[test]
    fn ps_value_overflow() {
        let p = c105();
        // 2^61 -> (2^61)^1.05 = 2^64.05 overflows
        assert!(matches!(
            ps_value(1 << 61, &p),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn ps_value_strictly_increasing() {
        for (num, den) in [(21u64, 20u64), (17983, 17000)] {
            let p = PsParameters::new(num, den).unwrap();
            let mut prev = ps_value(1, &p).unwrap();
            for l in 2..=20_000u64 {
                let v = ps_value(l, &p).unwrap();
                assert!(v > prev, "not strictly increasing at l = {l}");
                prev = v;
            }
        }
    }

    #[test]
    fn ps_member_examples() {
        let p = c105();
        assert!(ps_member(1, &p).unwrap());
        assert!(ps_member(2, &p).unwrap());
        // exhaustive scan oracle for p = 3: some l <= 4 with floor(l^c) = 3?
        let by_scan = (1..=4u64).any(|l| ps_value(l, &p).unwrap() == 3);
        assert_eq!(ps_member(3, &p).unwrap(), by_scan);
        assert!(by_scan, "floor(3^1.05) = 3, so 3 is a member");
    }

    #[test]
    fn ps_member_agrees_with_exhaustive_scan() {
        for (num, den) in [(101u64, 100u64), (21, 20)] {
            let params = PsParameters::new(num, den).unwrap();
            let mut members = std::collections::BTreeSet::new();
            let mut l = 1u64;
            loop {
                let v = ps_value(l, &params).unwrap();
                if v > 5000 {
                    break;
                }
                members.insert(v);
                l += 1;
            }
            for n in 1..=5000u64 {
                assert_eq!(
                    ps_member(n, &params).unwrap(),
                    members.contains(&n),
                    "n = {n}, c = {num}/{den}"
                );
            }
        }
    }

    #[test]
    fn ps_member_of_every_value() {
        let p = c105();
        let mut seen = std::collections::BTreeSet::new();
        for l in 1..=2000u64 {
            let v = ps_value(l, &p).unwrap();
            assert!(ps_member(v, &p).unwrap(), "l = {l}, value {v}");
            assert!(seen.insert(v), "duplicate image {v}");
        }
    }

    #[test]
    fn dual_enumeration_small() {
        let table = PrimeTable::sieve(100).unwrap();
        let p = c105();
        // floor(l^1.05) for l = 1..9: 1,2,3,4,5,6,7,8,10 — primes 2,3,5,7
        assert_eq!(ps_primes_up_to(10, &p, &table).unwrap(), vec![2, 3, 5, 7]);
        assert!(ps_primes_up_to(1, &p, &table).unwrap().is_empty());
    }

    #[test]
    fn dual_enumeration_multiple_exponents() {
        let table = PrimeTable::sieve(100_000).unwrap();
        for (num, den) in [(101u64, 100u64), (103, 100), (21, 20), (17983, 17000)] {
            let params = PsParameters::new(num, den).unwrap();
            let set = ps_primes_up_to(100_000, &params, &table).unwrap();
            assert!(!set.is_empty());
            assert!(set.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn ps_count_examples() {
        let table = PrimeTable::sieve(1000).unwrap();
        let p = c105();
        let all = ps_primes_up_to(10, &p, &table).unwrap();
        assert_eq!(
            ps_count_in_progression(10, 1, 0, &p, &table).unwrap(),
            all.len() as u64
        );
        // brute-force filtered count at w = 100
        let members = ps_primes_up_to(100, &p, &table).unwrap();
        let want = members.iter().filter(|&&q| q % 4 == 1).count() as u64;
        assert_eq!(ps_count_in_progression(100, 4, 1, &p, &table).unwrap(), want);
        assert_eq!(ps_count_in_progression(2, 2, 1, &p, &table).unwrap(), 0);
    }

    #[test]
    fn asymptotic_zero_before_first_prime() {
        let table = PrimeTable::sieve(100).unwrap();
        let p = c105();
        // progression 1 mod 97: no prime <= 90 matches except 1 (none)
        let cmp = ps_asymptotic_terms(90, 97, 1, &p, &table).unwrap();
        assert_eq!(cmp.exact_count, 0);
        assert_eq!(hp::to_f64(cmp.main_term), 0.0);
        assert_eq!(hp::to_f64(cmp.integral_term), 0.0);
    }

    #[test]
    fn asymptotic_tracks_exact_count() {
        let table = PrimeTable::sieve(100_000).unwrap();
        let p = c105();
        let cmp = ps_asymptotic_terms(100_000, 1, 0, &p, &table).unwrap();
        assert!(
            hp::to_f64(cmp.relative_error) < 0.1,
            "relative error {} too large",
            hp::to_f64(cmp.relative_error)
        );
    }
}
