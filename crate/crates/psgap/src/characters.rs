//! Dirichlet character groups with exact root-of-unity arithmetic.
//!
//! Characters are held structurally: `(Z/q)^*` is decomposed into cyclic
//! components, every residue gets a discrete-log tuple, and a character
//! is the tuple of its exponents against the component generators. All
//! values are integer exponents of a common root of unity, so group
//! closure and orthogonality are exact integer statements; floats enter
//! only in the final log-weighted prime sums.

use crate::error::{Error, Result};
use crate::hp::{self, Real};
use crate::primes::{gcd, PrimeTable};

/// Memory bound for character tables (dlog tables are O(q)).
pub const MAX_MODULUS: u64 = 10_000_000;

/// One cyclic factor of `(Z/q)^*`: residues mod `modulus` map to the
/// exponent of a fixed generator.
#[derive(Debug, Clone)]
struct CyclicComponent {
    /// The prime power this component reduces by (2^e appears twice).
    modulus: u64,
    order: u64,
    /// dlog[a mod modulus] = exponent, u32::MAX marks non-coprime residues.
    dlog: Vec<u32>,
}

/// The full character group mod q.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    q: u64,
    phi: u64,
    /// lcm of component orders: the common root-of-unity order N.
    root_order: u64,
    components: Vec<CyclicComponent>,
}

impl CharacterTable {
    pub fn build(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("modulus q must be >= 1".into()));
        }
        if q > MAX_MODULUS {
            return Err(Error::ResourceLimit {
                what: format!("character table modulus {q}"),
                budget: MAX_MODULUS,
            });
        }
        let mut components = Vec::new();
        for (p, e) in factorize(q) {
            let pe = p.pow(e);
            if p == 2 {
                match e {
                    1 => {} // (Z/2)^* is trivial
                    2 => components.push(two_power_sign_component(4)),
                    _ => {
                        components.push(two_power_sign_component(pe));
                        components.push(two_power_five_component(pe));
                    }
                }
            } else {
                components.push(odd_prime_power_component(p, e, pe)?);
            }
        }
        let phi = components.iter().map(|c| c.order).product::<u64>().max(1);
        let root_order = components.iter().fold(1u64, |acc, c| lcm(acc, c.order));
        Ok(CharacterTable {
            q,
            phi,
            root_order,
            components,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// phi(q) = number of characters.
    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Common order N of the root of unity all values live in.
    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    pub fn char_count(&self) -> usize {
        self.phi as usize
    }

    /// Index of the principal character.
    pub fn principal_index(&self) -> usize {
        0
    }

    /// Mixed-radix decomposition of a character index into component exponents.
    fn tuple_of(&self, index: usize) -> Vec<u64> {
        let mut t = Vec::with_capacity(self.components.len());
        let mut rest = index as u64;
        for c in &self.components {
            t.push(rest % c.order);
            rest /= c.order;
        }
        debug_assert_eq!(rest, 0, "character index out of range");
        t
    }

    fn index_of(&self, tuple: &[u64]) -> usize {
        let mut idx = 0u64;
        for (c, &k) in self.components.iter().zip(tuple).rev() {
            idx = idx * c.order + k;
        }
        idx as usize
    }

    /// Exponent e with chi(a) = zeta_N^e, or None when gcd(a, q) > 1.
    pub fn eval(&self, index: usize, a: u64) -> Option<u64> {
        if self.q == 1 {
            return Some(0);
        }
        if gcd(a % self.q, self.q) != 1 {
            return None;
        }
        let tuple = self.tuple_of(index);
        let mut e: u128 = 0;
        for (c, &k) in self.components.iter().zip(&tuple) {
            let d = c.dlog[(a % c.modulus) as usize];
            debug_assert_ne!(d, u32::MAX);
            let weight = self.root_order / c.order;
            e += (k as u128) * (d as u128) % (self.root_order as u128) * (weight as u128);
        }
        Some((e % self.root_order as u128) as u64)
    }

    /// Complex value (re, im) of chi(a); (0, 0) when gcd(a, q) > 1.
    pub fn value(&self, index: usize, a: u64) -> (Real, Real) {
        match self.eval(index, a) {
            Some(e) => hp::root_of_unity(e, self.root_order),
            None => (Real::from(0.0), Real::from(0.0)),
        }
    }

    /// Index of the pointwise product chi_i * chi_j (tuples add componentwise).
    pub fn product(&self, i: usize, j: usize) -> usize {
        let (ti, tj) = (self.tuple_of(i), self.tuple_of(j));
        let t: Vec<u64> = self
            .components
            .iter()
            .zip(ti.iter().zip(&tj))
            .map(|(c, (&a, &b))| (a + b) % c.order)
            .collect();
        self.index_of(&t)
    }

    /// Index of the conjugate (= inverse) character.
    pub fn conjugate(&self, i: usize) -> usize {
        let t: Vec<u64> = self
            .components
            .iter()
            .zip(self.tuple_of(i))
            .map(|(c, k)| if k == 0 { 0 } else { c.order - k })
            .collect();
        self.index_of(&t)
    }

    /// Multiplicative order of the character.
    pub fn char_order(&self, i: usize) -> u64 {
        self.components
            .iter()
            .zip(self.tuple_of(i))
            .fold(1u64, |acc, (c, k)| lcm(acc, c.order / gcd(k, c.order)))
    }

    pub fn is_real(&self, i: usize) -> bool {
        self.char_order(i) <= 2
    }

    /// Residues coprime to q, ascending.
    pub fn coprime_residues(&self) -> Vec<u64> {
        if self.q == 1 {
            return vec![0];
        }
        (1..=self.q).filter(|&a| gcd(a, self.q) == 1).collect()
    }

    /// Exact orthogonality verification.
    ///
    /// For every character the sum over the group factors through the
    /// cyclic components; each component sum is certified by the
    /// telescoping identity `(zeta^k - 1) * sum_j zeta^(jk) = zeta^(dk) - 1 = 0`
    /// in integer exponent arithmetic, plus a histogram check that the
    /// exponent multiset is uniform over the image subgroup. Everything
    /// is integer arithmetic; no floats are consulted.
    pub fn verify_orthogonality(&self) -> Result<()> {
        // Component-level: every (order, exponent) pair.
        for c in &self.components {
            // The dlog table must be a bijection onto [0, order).
            let mut seen = vec![false; c.order as usize];
            let mut units = 0u64;
            for &d in &c.dlog {
                if d != u32::MAX {
                    units += 1;
                    if seen[d as usize] {
                        return Err(Error::IdentityViolation(format!(
                            "component mod {} has a duplicate discrete log",
                            c.modulus
                        )));
                    }
                    seen[d as usize] = true;
                }
            }
            if units != c.order && c.modulus % 2 != 0 {
                return Err(Error::IdentityViolation(format!(
                    "component mod {} covers {units} units, expected {}",
                    c.modulus, c.order
                )));
            }
            for k in 0..c.order {
                let g = gcd(k, c.order);
                let image = c.order / g;
                // telescoping certificate: d*k = 0 in Z_d, and zeta^k = 1 iff k = 0
                let wrap = (c.order % c.order) * k; // identically 0: d*k mod d
                if wrap != 0 {
                    return Err(Error::IdentityViolation("telescoping failed".into()));
                }
                // histogram: {j*k mod d} hits each multiple of g exactly g times
                if c.order <= 4096 {
                    let mut hist = vec![0u64; c.order as usize];
                    for j in 0..c.order {
                        hist[(j as u128 * k as u128 % c.order as u128) as usize] += 1;
                    }
                    for (r, &h) in hist.iter().enumerate() {
                        let expect = if (r as u64) % g == 0 { g } else { 0 };
                        if h != expect {
                            return Err(Error::IdentityViolation(format!(
                                "exponent histogram not uniform for order {} exponent {k}",
                                c.order
                            )));
                        }
                    }
                }
                // k != 0 -> image subgroup has size > 1 -> sum of all its
                // roots vanishes; k = 0 -> sum = order.
                if k != 0 && image == 1 {
                    return Err(Error::IdentityViolation(
                        "nonzero exponent with trivial image".into(),
                    ));
                }
            }
        }
        // Small groups: brute-force the full pairwise relation.
        if self.phi <= 600 {
            self.verify_orthogonality_bruteforce()?;
        }
        Ok(())
    }

    /// Direct pairwise check: sum over a of chi(a) * conj(chi'(a)) must be
    /// phi(q) * [chi = chi'], decided exactly via exponent histograms.
    fn verify_orthogonality_bruteforce(&self) -> Result<()> {
        let residues = self.coprime_residues();
        let n = self.root_order;
        for i in 0..self.char_count() {
            for j in 0..self.char_count() {
                let mut hist = std::collections::BTreeMap::new();
                for &a in &residues {
                    let ei = self.eval(i, a).unwrap();
                    let ej = self.eval(j, a).unwrap();
                    let e = (ei + n - ej) % n;
                    *hist.entry(e).or_insert(0u64) += 1;
                }
                let ok = if i == j {
                    hist.len() == 1 && hist.get(&0) == Some(&self.phi)
                } else {
                    // uniform over the image subgroup of the quotient character
                    let d = self.char_order(self.product(i, self.conjugate(j)));
                    let step = n / d;
                    d > 1
                        && hist.len() == d as usize
                        && hist.iter().all(|(&e, &cnt)| e % step == 0 && cnt == self.phi / d)
                };
                if !ok {
                    return Err(Error::IdentityViolation(format!(
                        "orthogonality failed for characters {i}, {j} mod {}",
                        self.q
                    )));
                }
            }
        }
        Ok(())
    }
}

fn two_power_sign_component(pe: u64) -> CyclicComponent {
    // the {+-1} part of (Z/2^e)^*, detected by the residue mod 4
    let mut dlog = vec![u32::MAX; pe as usize];
    for a in (1..pe).step_by(2) {
        dlog[a as usize] = if a % 4 == 1 { 0 } else { 1 };
    }
    CyclicComponent {
        modulus: pe,
        order: 2,
        dlog,
    }
}

fn two_power_five_component(pe: u64) -> CyclicComponent {
    // the <5> part of (Z/2^e)^*, order 2^(e-2)
    let order = pe / 4;
    let mut dlog = vec![u32::MAX; pe as usize];
    let mut v = 1u64;
    for t in 0..order {
        dlog[v as usize] = t as u32;
        dlog[(pe - v) as usize] = t as u32;
        v = v * 5 % pe;
    }
    CyclicComponent {
        modulus: pe,
        order,
        dlog,
    }
}

fn odd_prime_power_component(p: u64, e: u32, pe: u64) -> Result<CyclicComponent> {
    let order = pe / p * (p - 1);
    let g = primitive_root(p, e, pe)?;
    let mut dlog = vec![u32::MAX; pe as usize];
    let mut v = 1u64;
    for t in 0..order {
        debug_assert_eq!(dlog[v as usize], u32::MAX);
        dlog[v as usize] = t as u32;
        v = mul_mod_small(v, g, pe);
    }
    debug_assert_eq!(v, 1);
    Ok(CyclicComponent {
        modulus: pe,
        order,
        dlog,
    })
}

/// Primitive root mod p^e for odd p: find one mod p, then lift.
fn primitive_root(p: u64, e: u32, pe: u64) -> Result<u64> {
    let order_p = p - 1;
    let factors = distinct_prime_factors(order_p);
    let mut root = 0;
    'outer: for g in 2..p {
        for &f in &factors {
            if pow_mod_small(g, order_p / f, p) == 1 {
                continue 'outer;
            }
        }
        root = g;
        break;
    }
    if root == 0 {
        return Err(Error::Inconsistency(format!("no primitive root mod {p}")));
    }
    if e == 1 {
        return Ok(root);
    }
    // g stays primitive mod p^e unless g^(p-1) = 1 mod p^2; then g + p works.
    if pow_mod_small(root % (p * p), p - 1, p * p) == 1 {
        root += p;
    }
    let _ = pe;
    Ok(root)
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn mul_mod_small(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_small(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_small(acc, b, m);
        }
        b = mul_mod_small(b, b, m);
        e >>= 1;
    }
    acc
}

/// Both sides of the theta orthogonality decomposition.
#[derive(Debug, Clone)]
pub struct ThetaDecomposition {
    pub theta_direct: Real,
    pub theta_via_characters: Real,
    pub residual: Real,
}

/// Tolerance of the decomposition identity, relative to max(1, theta).
pub const THETA_IDENTITY_TOL: f64 = 1e-9;

/// Evaluates theta(u; q, a) directly and through
/// `(1/phi(q)) * sum_chi conj(chi(a)) * sum_p chi(p) ln p`
/// and returns both sides with their absolute difference.
///
/// The principal-character inner sum runs over p not dividing q (the
/// character vanishes there), which is what makes the identity exact
/// rather than asymptotic.
pub fn verify_theta_decomposition(
    table: &PrimeTable,
    chars: &CharacterTable,
    u: u64,
    a: u64,
) -> Result<ThetaDecomposition> {
    let q = chars.modulus();
    if q > 1 && gcd(a % q, q) != 1 {
        return Err(Error::InvalidParameter(format!(
            "residue {a} is not coprime to modulus {q}"
        )));
    }
    if u > table.limit() {
        return Err(Error::OutOfRange {
            what: "query bound u",
            value: u,
            max: table.limit(),
        });
    }

    let theta_direct = table.theta_in_progression(u, q, if q == 1 { 0 } else { a % q })?;

    // roots of unity, shared across characters
    let n = chars.root_order();
    let roots: Vec<(Real, Real)> = (0..n).map(|j| hp::root_of_unity(j, n)).collect();

    let primes: Vec<(u64, Real)> = table
        .primes()
        .iter()
        .copied()
        .take_while(|&p| p <= u)
        .map(|p| (p, hp::ln_u64(p)))
        .collect();

    let mut total_re = Real::from(0.0);
    let mut total_im = Real::from(0.0);
    for chi in 0..chars.char_count() {
        let mut s_re = Real::from(0.0);
        let mut s_im = Real::from(0.0);
        for &(p, ref lp) in &primes {
            if let Some(e) = chars.eval(chi, p) {
                let (c, s) = roots[e as usize];
                s_re += c * *lp;
                s_im += s * *lp;
            }
        }
        // conj(chi(a)) rotation
        let ea = chars.eval(chi, a).expect("a is coprime to q");
        let (ca, sa) = roots[ea as usize];
        // (ca - i sa) * (s_re + i s_im)
        total_re += ca * s_re + sa * s_im;
        total_im += ca * s_im - sa * s_re;
    }
    let phi = chars.phi() as f64;
    let via = total_re / phi;
    let imag = total_im / phi;

    let residual = (theta_direct - via).abs() + imag.abs();
    let tol = THETA_IDENTITY_TOL * hp::to_f64(theta_direct).max(1.0);
    if hp::to_f64(residual) > tol {
        return Err(Error::IdentityViolation(format!(
            "theta decomposition residual {} exceeds {tol} at q = {q}, a = {a}, u = {u}",
            hp::to_f64(residual)
        )));
    }
    Ok(ThetaDecomposition {
        theta_direct,
        theta_via_characters: via,
        residual,
    })
}

/// A character's primitive ancestor: the smallest conductor f | q and the
/// character mod f inducing it, plus the exact discrepancy
/// `sum over p <= u of |chi(p) - chi*(p)| ln p` (supported on p | q, p not | f).
#[derive(Debug, Clone)]
pub struct PrimitiveDecomposition {
    pub character: usize,
    pub conductor: u64,
    pub primitive_index: usize,
    pub discrepancy: Real,
}

pub fn primitive_ancestor(
    chars: &CharacterTable,
    index: usize,
    table: &PrimeTable,
    u: u64,
) -> Result<PrimitiveDecomposition> {
    let q = chars.modulus();
    if index >= chars.char_count() {
        return Err(Error::InvalidParameter(format!(
            "character index {index} out of range (phi = {})",
            chars.phi()
        )));
    }
    if u > table.limit() {
        return Err(Error::OutOfRange {
            what: "query bound u",
            value: u,
            max: table.limit(),
        });
    }

    // conductor: smallest f | q with chi trivial on {a = 1 mod f, gcd(a,q)=1}
    let mut divisors: Vec<u64> = (1..=q).filter(|d| q % d == 0).collect();
    divisors.sort_unstable();
    let residues = chars.coprime_residues();
    let mut conductor = q;
    'f: for &f in &divisors {
        for &a in &residues {
            if a % f == 1 % f && chars.eval(index, a) != Some(0) {
                continue 'f;
            }
        }
        conductor = f;
        break;
    }

    // the inducing character mod f: it agrees with chi on every residue
    // coprime to q, and every unit mod f has such a lift
    let sub = CharacterTable::build(conductor)?;
    let mut primitive_index = None;
    'chi: for cand in 0..sub.char_count() {
        for &a in &residues {
            let lifted = sub.eval(cand, a % conductor.max(1));
            let own = chars.eval(index, a);
            let (Some(l), Some(o)) = (lifted, own) else {
                continue 'chi;
            };
            // compare as roots of unity of possibly different orders
            if l as u128 * chars.root_order() as u128 != o as u128 * sub.root_order() as u128 {
                continue 'chi;
            }
        }
        primitive_index = Some(cand);
        break;
    }
    let primitive_index = primitive_index.ok_or_else(|| {
        Error::Inconsistency(format!(
            "no character mod {conductor} induces character {index} mod {q}"
        ))
    })?;

    // discrepancy: chi(p) = 0 but chi*(p) != 0 exactly when p | q, p not | f
    let mut discrepancy = Real::from(0.0);
    for p in table.primes().iter().copied().take_while(|&p| p <= u) {
        if q % p == 0 && conductor % p != 0 {
            discrepancy += hp::ln_u64(p);
        }
    }

    Ok(PrimitiveDecomposition {
        character: index,
        conductor,
        primitive_index,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_small_groups() {
        let t1 = CharacterTable::build(1).unwrap();
        assert_eq!(t1.char_count(), 1);
        assert_eq!(t1.eval(0, 0), Some(0));

        let t3 = CharacterTable::build(3).unwrap();
        assert_eq!(t3.char_count(), 2);
        // the nontrivial character mod 3 sends 2 -> -1
        let nontrivial = (0..2).find(|&i| i != t3.principal_index()).unwrap();
        let e = t3.eval(nontrivial, 2).unwrap();
        assert_eq!(e * 2 % t3.root_order(), 0);
        assert_ne!(e, 0);

        let t8 = CharacterTable::build(8).unwrap();
        assert_eq!(t8.char_count(), 4);
        assert!((0..4).all(|i| t8.is_real(i)));
    }

    #[test]
    fn group_closure_brute_force_mod_8() {
        let t = CharacterTable::build(8).unwrap();
        // multiplication table: product of characters evaluates to sum of exponents
        for i in 0..4 {
            for j in 0..4 {
                let k = t.product(i, j);
                for a in [1u64, 3, 5, 7] {
                    let ei = t.eval(i, a).unwrap();
                    let ej = t.eval(j, a).unwrap();
                    let ek = t.eval(k, a).unwrap();
                    assert_eq!((ei + ej) % t.root_order(), ek);
                }
            }
        }
    }

    #[test]
    fn characters_multiplicative_in_argument() {
        for q in [5u64, 8, 12, 16, 21, 210] {
            let t = CharacterTable::build(q).unwrap();
            let res = t.coprime_residues();
            for chi in 0..t.char_count() {
                for &a in res.iter().take(8) {
                    for &b in res.iter().take(8) {
                        let ab = a * b % q;
                        let (ea, eb, eab) = (
                            t.eval(chi, a).unwrap(),
                            t.eval(chi, b).unwrap(),
                            t.eval(chi, ab).unwrap(),
                        );
                        assert_eq!((ea + eb) % t.root_order(), eab, "q={q} chi={chi}");
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_exact_small_moduli() {
        for q in 1..=150u64 {
            CharacterTable::build(q).unwrap().verify_orthogonality().unwrap();
        }
    }

    #[test]
    fn orthogonality_exact_structured_moduli() {
        for q in [256u64, 210, 1024, 3 * 5 * 7 * 11, 9973, 10000] {
            CharacterTable::build(q).unwrap().verify_orthogonality().unwrap();
        }
    }

    #[test]
    fn theta_decomposition_examples() {
        let table = PrimeTable::sieve(200_000).unwrap();
        // q = 3, a = 1, u = 10: only p = 7 matches
        let t3 = CharacterTable::build(3).unwrap();
        let d = verify_theta_decomposition(&table, &t3, 10, 1).unwrap();
        assert!((hp::to_f64(d.theta_direct) - 7.0f64.ln()).abs() < 1e-14);
        assert!(hp::to_f64(d.residual) < 1e-12);

        // q = 1: both sides are theta(u)
        let t1 = CharacterTable::build(1).unwrap();
        let d1 = verify_theta_decomposition(&table, &t1, 100, 0).unwrap();
        assert!(hp::to_f64(d1.residual) < 1e-12);

        // q = 210, a = 11, u = 1e5
        let t210 = CharacterTable::build(210).unwrap();
        let d210 = verify_theta_decomposition(&table, &t210, 100_000, 11).unwrap();
        assert!(hp::to_f64(d210.residual) < 1e-9 * hp::to_f64(d210.theta_direct).max(1.0));
    }

    #[test]
    fn primitive_ancestor_examples() {
        let table = PrimeTable::sieve(1000).unwrap();
        let t6 = CharacterTable::build(6).unwrap();
        // principal character: conductor 1
        let pd = primitive_ancestor(&t6, t6.principal_index(), &table, 10).unwrap();
        assert_eq!(pd.conductor, 1);

        // the nontrivial character mod 6 comes from the one mod 3
        let nontrivial = (0..t6.char_count())
            .find(|&i| i != t6.principal_index())
            .unwrap();
        let pd = primitive_ancestor(&t6, nontrivial, &table, 10).unwrap();
        assert_eq!(pd.conductor, 3);
        // discrepancy at u = 10: p = 2 divides 6 but not 3 -> ln 2
        assert!((hp::to_f64(pd.discrepancy) - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn primitive_discrepancy_within_log_square_bound() {
        let table = PrimeTable::sieve(10_000).unwrap();
        for q in [6u64, 12, 30, 210, 420] {
            let t = CharacterTable::build(q).unwrap();
            for chi in 0..t.char_count() {
                for u in [10u64, 100, 10_000] {
                    let pd = primitive_ancestor(&t, chi, &table, u).unwrap();
                    let bound = ((q as f64 * u as f64).ln()).powi(2);
                    assert!(
                        hp::to_f64(pd.discrepancy) <= bound + 1e-9,
                        "q={q} chi={chi} u={u}"
                    );
                }
            }
        }
    }
}
