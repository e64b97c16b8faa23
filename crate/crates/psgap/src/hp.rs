//! Extended-precision real arithmetic (~106-bit significand).
//!
//! Built on [`twofloat::TwoFloat`] for the error-free add/mul/div kernels.
//! The transcendental functions are implemented here from argument
//! reduction + series: the ones shipped with the crate bottom out near
//! plain `f64` accuracy, which is not enough for the identity checks in
//! this library (residual tolerances of 1e-9 on sums of ~1e5 terms need
//! genuinely extended precision all the way through).

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use twofloat::TwoFloat;

pub type Real = TwoFloat;

/// ln 2 to double-double precision.
pub const LN2: Real = twofloat::consts::LN_2;

/// pi to double-double precision.
pub const PI: Real = twofloat::consts::PI;

/// pi/2 to double-double precision.
pub const FRAC_PI_2: Real = twofloat::consts::FRAC_PI_2;

const SERIES_EPS: f64 = 1e-35;

/// Exact `Real` from a `u64` (splits values above 2^53).
pub fn from_u64(n: u64) -> Real {
    if n < (1u64 << 53) {
        Real::from(n as f64)
    } else {
        let hi = (n >> 32) as f64 * 4294967296.0;
        let lo = (n & 0xffff_ffff) as f64;
        Real::new_add(hi, lo)
    }
}

pub fn to_f64(x: Real) -> f64 {
    x.hi() + x.lo()
}

/// Natural logarithm, accurate to the full width of the representation.
pub fn ln(x: Real) -> Real {
    assert!(x.hi() > 0.0, "ln of non-positive value");
    // Normalize to m in [0.75, 1.5); scaling by powers of two is exact.
    let mut e = 0i64;
    let mut m = x;
    while m.hi() >= 1.5 {
        let shift = (m.hi().log2().floor() as i32 - 1).max(1);
        m = m * Real::from((shift as f64).exp2().recip());
        e += shift as i64;
    }
    while m.hi() < 0.75 {
        let shift = ((-m.hi().log2()).ceil() as i32).max(1);
        m = m * Real::from((shift as f64).exp2());
        e -= shift as i64;
    }
    // atanh series: ln m = 2 * sum y^(2k+1)/(2k+1), y = (m-1)/(m+1), |y| <= 0.2
    let y = (m - 1.0) / (m + 1.0);
    let y2 = y * y;
    let mut power = y;
    let mut sum = y;
    let mut k = 1u32;
    loop {
        power = power * y2;
        let term = power / ((2 * k + 1) as f64);
        sum += term;
        k += 1;
        if term.hi().abs() < SERIES_EPS || k > 60 {
            break;
        }
    }
    sum * 2.0 + LN2 * (e as f64)
}

/// Exponential, accurate to the full width of the representation.
pub fn exp(x: Real) -> Real {
    let k = (x.hi() / std::f64::consts::LN_2).round();
    assert!(k.abs() < 1020.0, "exp argument out of supported range");
    let r = x - LN2 * k;
    let mut term = r;
    let mut sum = r + 1.0;
    let mut n = 2u32;
    loop {
        term = term * r / (n as f64);
        sum += term;
        n += 1;
        if term.hi().abs() < SERIES_EPS || n > 60 {
            break;
        }
    }
    sum * (k).exp2()
}

/// `base^e` for positive base.
pub fn powf(base: Real, e: Real) -> Real {
    exp(e * ln(base))
}

/// Simultaneous (sin, cos), valid for |x| up to a few thousand radians.
pub fn sin_cos(x: Real) -> (Real, Real) {
    let q = (x.hi() / (std::f64::consts::PI / 2.0)).round();
    let r = x - FRAC_PI_2 * q;
    let (s, c) = sin_cos_reduced(r);
    match (q as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

// Taylor series on |r| <= pi/4.
fn sin_cos_reduced(r: Real) -> (Real, Real) {
    let r2 = r * r;
    let mut s = r;
    let mut term = r;
    let mut n = 1u32;
    loop {
        term = term * r2 / ((2 * n) as f64 * (2 * n + 1) as f64);
        s += if n % 2 == 1 { -term } else { term };
        n += 1;
        if term.hi().abs() < SERIES_EPS || n > 40 {
            break;
        }
    }
    let mut c = Real::from(1.0);
    let mut cterm = Real::from(1.0);
    let mut m = 1u32;
    loop {
        cterm = cterm * r2 / ((2 * m - 1) as f64 * (2 * m) as f64);
        c += if m % 2 == 1 { -cterm } else { cterm };
        m += 1;
        if cterm.hi().abs() < SERIES_EPS || m > 40 {
            break;
        }
    }
    (s, c)
}

/// cos/sin of 2*pi*j/n, the order-n root of unity at exponent j.
pub fn root_of_unity(j: u64, n: u64) -> (Real, Real) {
    debug_assert!(j < n);
    let angle = PI * 2.0 * (j as f64) / (n as f64);
    let (s, c) = sin_cos(angle);
    (c, s)
}

/// Natural logarithm of a `u64`.
pub fn ln_u64(n: u64) -> Real {
    assert!(n > 0);
    ln(from_u64(n))
}

/// Natural logarithm of an arbitrary-precision integer via
/// mantissa + exponent extraction (the value itself may have
/// thousands of bits and never fits a float).
pub fn ln_biguint(m: &BigUint) -> Real {
    let bits = m.bits();
    assert!(bits > 0, "ln of zero");
    if bits <= 53 {
        return ln(Real::from(m.to_f64().unwrap()));
    }
    let shift = bits - 104;
    let top: u128 = (m >> shift).to_u128().unwrap();
    let hi = (top >> 52) as f64 * 4503599627370496.0; // 2^52
    let lo = (top & ((1u128 << 52) - 1)) as f64;
    ln(Real::new_add(hi, lo)) + LN2 * (shift as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_err(x: Real, hi: f64, lo: f64) -> f64 {
        let r = x - Real::new_add(hi, lo);
        to_f64(r).abs()
    }

    #[test]
    fn ln_known_values() {
        // ln 2 = 0.69314718055994530941723212145818...
        assert!(dd_err(ln(Real::from(2.0)), 0.6931471805599453, 2.3190468138462996e-17) < 1e-30);
        // ln 10 = 2.30258509299404568401799145468436...
        assert!(dd_err(ln(Real::from(10.0)), 2.302585092994046, -2.1707562233822494e-16) < 1e-30);
        // ln 3 = 1.09861228866810969139524523692253...
        assert!(dd_err(ln(Real::from(3.0)), 1.0986122886681098, -2.9075058756553023e-17) < 1e-30);
    }

    #[test]
    fn exp_known_values() {
        // e = 2.71828182845904523536028747135266...
        assert!(dd_err(exp(Real::from(1.0)), 2.718281828459045, 1.4456468917292502e-16) < 1e-30);
        assert!(to_f64(exp(Real::from(0.0)) - 1.0).abs() < 1e-31);
    }

    #[test]
    fn exp_ln_round_trip() {
        for &v in &[0.1, 0.5, 1.0, 2.0, 3.5, 10.0, 1e6, 9.2e18, 1e-9] {
            let x = Real::from(v);
            let rt = exp(ln(x));
            let rel = to_f64((rt - x) / x).abs();
            assert!(rel < 1e-29, "round trip at {v}: rel err {rel}");
        }
    }

    #[test]
    fn ln_additivity() {
        let a = ln(Real::from(7.0));
        let b = ln(Real::from(11.0));
        let ab = ln(Real::from(77.0));
        assert!(to_f64(a + b - ab).abs() < 1e-30);
    }

    #[test]
    fn sin_cos_pythagorean() {
        for j in 0..48 {
            let (c, s) = root_of_unity(j, 48);
            let r = c * c + s * s - 1.0;
            assert!(to_f64(r).abs() < 1e-30, "j={j}");
        }
    }

    #[test]
    fn sin_cos_special_angles() {
        let (c, s) = root_of_unity(0, 12);
        assert!(to_f64(c - 1.0).abs() < 1e-31 && to_f64(s).abs() < 1e-31);
        // cos(2*pi/6) = 1/2, sin(2*pi/12) = 1/2
        let (c6, _) = root_of_unity(1, 6);
        assert!(to_f64(c6 - 0.5).abs() < 1e-31);
        let (_, s12) = root_of_unity(1, 12);
        assert!(to_f64(s12 - 0.5).abs() < 1e-31);
        // quarter turn
        let (c4, s4) = root_of_unity(1, 4);
        assert!(to_f64(c4).abs() < 1e-31 && to_f64(s4 - 1.0).abs() < 1e-31);
    }

    #[test]
    fn u64_conversion_exact() {
        let n = u64::MAX - 12345;
        let x = from_u64(n);
        assert_eq!(x.hi() as u128 + x.lo() as u128, n as u128);
    }

    #[test]
    fn ln_biguint_matches_ln_u64() {
        let n = 0xdead_beef_cafe_u64;
        let a = ln_u64(n);
        let b = ln_biguint(&BigUint::from(n));
        assert!(to_f64(a - b).abs() < 1e-28);
        // (2^200)'s log is exactly 200 ln 2
        let big = BigUint::from(1u8) << 200;
        let l = ln_biguint(&big);
        assert!(to_f64(l - LN2 * 200.0).abs() < 1e-27);
    }

    #[test]
    fn powf_consistency() {
        // 100^1.05 = 125.89254117941672104239541063958006...
        let p = powf(Real::from(100.0), Real::from(1.05));
        assert!((to_f64(p) - 125.89254117941672).abs() < 1e-12);
        // integer powers stay exact-ish
        let q = powf(Real::from(7.0), Real::from(3.0));
        assert!(to_f64(q - 343.0).abs() < 1e-27);
    }
}
