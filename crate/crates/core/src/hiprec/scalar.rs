//! The working-precision scalar abstraction.
//!
//! [`Scalar`] is implemented by `f64`, [`Dd`] and [`Qd`].  The transcendental
//! functions have generic default implementations (argument reduction plus
//! Taylor/atanh series) tuned per type through associated constants; `f64`
//! overrides them with the native ones.

use super::consts::{cody_waite_parts, ln2_rational, pi_rational};
use super::convert;
use super::{Dd, HiprecError, Qd};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

pub trait Scalar:
    Copy
    + Debug
    + Display
    + Default
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Zero
    + One
{
    /// Precision tag used in dumps and CSV headers.
    const NAME: &'static str;
    /// Decimal digits carried by the format (print default).
    const DIGITS: usize;
    const COMPONENTS: usize;
    /// Series lengths for the generic transcendental kernels.
    const EXP_TERMS: usize;
    const LOG_TERMS: usize;
    const ATAN_TERMS: usize;
    const ATAN_HALVINGS: usize;
    const SQRT_ITERS: usize;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn components(self) -> Vec<f64>;
    fn from_parts(parts: &[f64]) -> Self;
    /// Rebuilds from components already in renormalized layout (bit-exact;
    /// no renormalization pass).
    fn from_parts_unchecked(parts: &[f64]) -> Self;
    /// Unit roundoff of the format.
    fn eps() -> Self;
    fn abs(self) -> Self;
    fn mul_pow2(self, k: i32) -> Self;
    fn is_finite_val(self) -> bool;
    fn pi() -> Self;
    fn ln2() -> Self;
    /// Cody-Waite split of ln 2 (exact products with small integers).
    fn ln2_parts() -> &'static [f64];

    fn from_i64(v: i64) -> Self {
        debug_assert!(v.unsigned_abs() < (1 << 53));
        Self::from_f64(v as f64)
    }

    fn from_rational(r: &BigRational) -> Self {
        Self::from_parts(&convert::rational_to_components(r, Self::COMPONENTS))
    }

    fn to_rational(self) -> BigRational {
        convert::components_to_rational(&self.components())
    }

    fn to_decimal(self, digits: usize) -> String {
        convert::to_decimal_components(&self.components(), digits)
    }

    fn parse_decimal(s: &str) -> Result<Self, HiprecError> {
        let r = convert::parse_decimal_rational(s)?;
        Ok(Self::from_rational(&r))
    }

    fn hex_dump(self) -> String {
        convert::hex_dump(Self::NAME, &self.components())
    }

    fn from_hex_dump(s: &str) -> Result<Self, HiprecError> {
        let parts = convert::hex_parse(s, Self::NAME, Self::COMPONENTS)?;
        Ok(Self::from_parts_unchecked(&parts))
    }

    /// Surfaces poisoned values as errors at operation boundaries.
    fn validate(self) -> Result<Self, HiprecError> {
        if self.is_finite_val() {
            Ok(self)
        } else {
            Err(HiprecError::NonFinite)
        }
    }

    fn checked_div(self, rhs: Self) -> Result<Self, HiprecError> {
        if rhs.is_zero() {
            return Err(HiprecError::DivisionByZero);
        }
        (self / rhs).validate()
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    fn maximum(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn minimum(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Square root; negative input poisons, see [`Scalar::checked_sqrt`].
    fn sqrt(self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let head = self.to_f64();
        if !(head > 0.0) || !self.is_finite_val() {
            return Self::from_f64(f64::NAN);
        }
        // Newton on 1/sqrt (division free), then one multiply.
        let mut y = Self::from_f64(1.0 / head.sqrt());
        let half = Self::from_f64(0.5);
        for _ in 0..Self::SQRT_ITERS {
            let r = Self::one() - self * y * y;
            y = y + y * r * half;
        }
        self * y
    }

    fn checked_sqrt(self) -> Result<Self, HiprecError> {
        if self < Self::zero() {
            return Err(HiprecError::Domain("sqrt of negative value"));
        }
        self.sqrt().validate()
    }

    fn exp(self) -> Self {
        if self.is_zero() {
            return Self::one();
        }
        let xf = self.to_f64();
        if !self.is_finite_val() {
            return Self::from_f64(f64::NAN);
        }
        if xf < -700.0 {
            // Below the qd component underflow floor; flushes to zero.
            return Self::zero();
        }
        if xf > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        // x = k ln2 + r, |r| <= ln2/2; the products k*part are exact.
        let k = (xf / std::f64::consts::LN_2).round();
        let mut r = self;
        for &part in Self::ln2_parts() {
            r -= Self::from_f64(part * k);
        }
        // exp(r) by Taylor in Horner form.
        let mut s = Self::one();
        for n in (1..=Self::EXP_TERMS).rev() {
            s = s * r / Self::from_i64(n as i64) + Self::one();
        }
        s.mul_pow2(k as i32)
    }

    /// Natural log; non-positive input poisons, see [`Scalar::checked_ln`].
    fn ln(self) -> Self {
        let head = self.to_f64();
        if !(head > 0.0) || !self.is_finite_val() {
            return Self::from_f64(f64::NAN);
        }
        // x = m 2^e with m in [sqrt(1/2), sqrt(2)); ln m = 2 atanh((m-1)/(m+1)).
        let mut e = head.abs().log2().round() as i32;
        let mut m = self.mul_pow2(-e);
        let sqrt2 = std::f64::consts::SQRT_2;
        while m.to_f64() >= sqrt2 {
            m = m.mul_pow2(-1);
            e += 1;
        }
        while m.to_f64() < sqrt2 / 2.0 {
            m = m.mul_pow2(1);
            e -= 1;
        }
        let u = (m - Self::one()) / (m + Self::one());
        let v = u * u;
        let mut s = Self::zero();
        for kk in (0..Self::LOG_TERMS).rev() {
            s = s * v + Self::from_i64(2 * kk as i64 + 1).recip();
        }
        s *= u;
        Self::from_i64(e as i64) * Self::ln2() + s.mul_pow2(1)
    }

    fn checked_ln(self) -> Result<Self, HiprecError> {
        if self <= Self::zero() {
            return Err(HiprecError::Domain("log of non-positive value"));
        }
        self.ln().validate()
    }

    /// Four-quadrant arctangent.
    fn atan2(y: Self, x: Self) -> Self {
        if y.is_zero() && x.is_zero() {
            return Self::zero();
        }
        if !x.is_finite_val() || !y.is_finite_val() {
            return Self::from_f64(f64::NAN);
        }
        let ax = x.abs();
        let ay = y.abs();
        let swap = ay > ax;
        let (num, den) = if swap { (ax, ay) } else { (ay, ax) };
        let base = if num.is_zero() {
            Self::zero()
        } else {
            atan_kernel::<Self>(num / den)
        };
        let pi = Self::pi();
        let half_pi = pi.mul_pow2(-1);
        let mut a = if swap { half_pi - base } else { base };
        if x < Self::zero() {
            a = pi - a;
        }
        if y < Self::zero() {
            a = -a;
        }
        a
    }
}

/// atan on [0, 1] by argument halving plus the odd Taylor series.
fn atan_kernel<T: Scalar>(t0: T) -> T {
    let mut t = t0;
    for _ in 0..T::ATAN_HALVINGS {
        let s = (T::one() + t * t).sqrt();
        t /= T::one() + s;
    }
    let v = t * t;
    let mut s = T::zero();
    for k in (0..T::ATAN_TERMS).rev() {
        let c = T::from_i64(2 * k as i64 + 1).recip();
        s = if k % 2 == 0 { s * v + c } else { s * v - c };
    }
    (s * t).mul_pow2(T::ATAN_HALVINGS as i32)
}

macro_rules! num_zero_one {
    ($t:ty) => {
        impl Zero for $t {
            fn zero() -> Self {
                <$t>::ZERO
            }
            fn is_zero(&self) -> bool {
                (*self).is_zero_val()
            }
        }
        impl One for $t {
            fn one() -> Self {
                <$t>::ONE
            }
        }
    };
}

num_zero_one!(Dd);
num_zero_one!(Qd);

struct ConstCache {
    pi_parts: Vec<f64>,
    ln2_parts_value: Vec<f64>,
    ln2_cw: Vec<f64>,
}

fn const_cache() -> &'static ConstCache {
    static CACHE: OnceLock<ConstCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let pi = pi_rational(280);
        let ln2 = ln2_rational(280);
        ConstCache {
            pi_parts: convert::rational_to_components(&pi, 4),
            ln2_parts_value: convert::rational_to_components(&ln2, 4),
            ln2_cw: cody_waite_parts(&ln2, 36, 8),
        }
    })
}

impl Scalar for Dd {
    const NAME: &'static str = "dd";
    const DIGITS: usize = 31;
    const COMPONENTS: usize = 2;
    const EXP_TERMS: usize = 26;
    const LOG_TERMS: usize = 24;
    const ATAN_TERMS: usize = 18;
    const ATAN_HALVINGS: usize = 3;
    const SQRT_ITERS: usize = 3;

    fn from_f64(v: f64) -> Self {
        Dd::from_f64(v)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn components(self) -> Vec<f64> {
        self.parts().to_vec()
    }
    fn from_parts(parts: &[f64]) -> Self {
        let mut work = [0.0; 4];
        let n = parts.len().min(4);
        work[..n].copy_from_slice(&parts[..n]);
        let mut out = [0.0; 2];
        super::eft::renormalize(&mut work[..n.max(2)], &mut out);
        Dd {
            hi: out[0],
            lo: out[1],
        }
    }
    fn from_parts_unchecked(parts: &[f64]) -> Self {
        Dd {
            hi: parts[0],
            lo: parts[1],
        }
    }
    fn eps() -> Self {
        Dd::from_f64(2f64.powi(-104))
    }
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    fn mul_pow2(self, k: i32) -> Self {
        Dd::mul_pow2(self, k)
    }
    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
    fn pi() -> Self {
        static V: OnceLock<Dd> = OnceLock::new();
        *V.get_or_init(|| <Dd as Scalar>::from_parts(&const_cache().pi_parts))
    }
    fn ln2() -> Self {
        static V: OnceLock<Dd> = OnceLock::new();
        *V.get_or_init(|| <Dd as Scalar>::from_parts(&const_cache().ln2_parts_value))
    }
    fn ln2_parts() -> &'static [f64] {
        &const_cache().ln2_cw
    }
}

impl Scalar for Qd {
    const NAME: &'static str = "qd";
    const DIGITS: usize = 63;
    const COMPONENTS: usize = 4;
    const EXP_TERMS: usize = 44;
    const LOG_TERMS: usize = 46;
    const ATAN_TERMS: usize = 27;
    const ATAN_HALVINGS: usize = 4;
    const SQRT_ITERS: usize = 4;

    fn from_f64(v: f64) -> Self {
        Qd::from_f64(v)
    }
    fn to_f64(self) -> f64 {
        Qd::to_f64(self)
    }
    fn components(self) -> Vec<f64> {
        self.0.to_vec()
    }
    fn from_parts(parts: &[f64]) -> Self {
        let mut work = [0.0f64; 8];
        let n = parts.len().min(8);
        work[..n].copy_from_slice(&parts[..n]);
        let mut out = [0.0; 4];
        super::eft::renormalize(&mut work[..n.max(4)], &mut out);
        Qd(out)
    }
    fn from_parts_unchecked(parts: &[f64]) -> Self {
        Qd([parts[0], parts[1], parts[2], parts[3]])
    }
    fn eps() -> Self {
        Qd::from_f64(2f64.powi(-208))
    }
    fn abs(self) -> Self {
        Qd::abs(self)
    }
    fn mul_pow2(self, k: i32) -> Self {
        Qd::mul_pow2(self, k)
    }
    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
    fn pi() -> Self {
        static V: OnceLock<Qd> = OnceLock::new();
        *V.get_or_init(|| <Qd as Scalar>::from_parts(&const_cache().pi_parts))
    }
    fn ln2() -> Self {
        static V: OnceLock<Qd> = OnceLock::new();
        *V.get_or_init(|| <Qd as Scalar>::from_parts(&const_cache().ln2_parts_value))
    }
    fn ln2_parts() -> &'static [f64] {
        &const_cache().ln2_cw
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
    const DIGITS: usize = 17;
    const COMPONENTS: usize = 1;
    const EXP_TERMS: usize = 0;
    const LOG_TERMS: usize = 0;
    const ATAN_TERMS: usize = 0;
    const ATAN_HALVINGS: usize = 0;
    const SQRT_ITERS: usize = 0;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn components(self) -> Vec<f64> {
        vec![self]
    }
    fn from_parts(parts: &[f64]) -> Self {
        parts.iter().sum()
    }
    fn from_parts_unchecked(parts: &[f64]) -> Self {
        parts[0]
    }
    fn eps() -> Self {
        f64::EPSILON
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn mul_pow2(self, k: i32) -> Self {
        self * 2f64.powi(k)
    }
    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ln2() -> Self {
        std::f64::consts::LN_2
    }
    fn ln2_parts() -> &'static [f64] {
        static P: OnceLock<Vec<f64>> = OnceLock::new();
        P.get_or_init(|| cody_waite_parts(&ln2_rational(120), 36, 3))
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan2(y: Self, x: Self) -> Self {
        f64::atan2(y, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ulp_err<T: Scalar>(got: T, want: &BigRational) -> f64 {
        use num_traits::Signed;
        let diff = (got.to_rational() - want).abs();
        let scale = want.abs();
        if scale.is_zero() {
            return convert::rational_to_f64_nearest(&diff) / T::eps().to_f64();
        }
        convert::rational_to_f64_nearest(&(diff / scale)) / T::eps().to_f64()
    }

    #[test]
    fn exp_zero_is_exact() {
        assert_eq!(<Qd as Scalar>::exp(Qd::ZERO), Qd::ONE);
        assert_eq!(<Dd as Scalar>::exp(Dd::ZERO), Dd::ONE);
    }

    #[test]
    fn log_of_exp_one() {
        let e = <Qd as Scalar>::exp(Qd::ONE);
        let l = <Qd as Scalar>::ln(e);
        assert!((l - Qd::ONE).abs().to_f64() < 1e-60, "{}", l);
    }

    #[test]
    fn pi_matches_independent_oracle_to_60_places() {
        // Gauss route, structurally different from the Machin constant.
        use super::super::consts::atan_inv_rational;
        use num_bigint::BigInt;
        let oracle = (atan_inv_rational(2, 300) + atan_inv_rational(3, 300))
            * BigRational::from_integer(BigInt::from(4));
        let err = ulp_err(<Qd as Scalar>::pi(), &oracle);
        assert!(err <= 1.0, "pi off by {err} ulp");
        // And the printed digits agree to 60 places.
        let printed = <Qd as Scalar>::pi().to_decimal(61);
        let oracle_str = convert::to_decimal_rational(&oracle, 61);
        assert_eq!(printed, oracle_str);
    }

    fn exp_rational_oracle(x: &BigRational) -> BigRational {
        // Exact partial sums of sum x^n / n!; the tail is below 2^-320
        // once terms shrink past it (geometric domination).
        use num_bigint::BigInt;
        use num_traits::{Signed, ToPrimitive};
        let mut term = BigRational::one();
        let mut acc = BigRational::one();
        let tol = BigRational::new(BigInt::from(1), BigInt::from(1) << 320);
        let n_min = 2 * (x.to_f64().unwrap().abs().ceil() as i64).max(1);
        for n in 1..500 {
            term = term * x / BigRational::from_integer(BigInt::from(n));
            acc += term.clone();
            if term.abs() < tol && n > n_min {
                break;
            }
        }
        acc
    }

    #[test]
    fn exp_against_rational_series() {
        for (num, den) in [(1i64, 2i64), (1, 8), (-5, 2), (10, 1), (-20, 1), (99, 70)] {
            let x = BigRational::new(num.into(), den.into());
            let oracle = exp_rational_oracle(&x);
            let got = <Qd as Scalar>::exp(Qd::from_rational(&x));
            let err = ulp_err(got, &oracle);
            assert!(err <= 4.0, "qd exp({num}/{den}) off by {err} ulp");
            let got_dd = <Dd as Scalar>::exp(Dd::from_rational(&x));
            let err_dd = ulp_err(got_dd, &oracle);
            assert!(err_dd <= 4.0, "dd exp({num}/{den}) off by {err_dd} ulp");
        }
    }

    #[test]
    fn exp_product_identity() {
        for i in 0..30 {
            let x = Qd::from_f64(-100.0 + 6.9 * i as f64);
            let p = <Qd as Scalar>::exp(x) * <Qd as Scalar>::exp(-x);
            let err = (p - Qd::ONE).abs().to_f64() / <Qd as Scalar>::eps().to_f64();
            assert!(err <= 8.0, "x={}, err {err} ulp", x.to_f64());
        }
    }

    #[test]
    fn sqrt_squares_back() {
        for v in [2.0, 3.0, 10.0, 0.7, 1e-8, 123456.789] {
            let x = Qd::from_f64(v);
            let s = <Qd as Scalar>::sqrt(x);
            let err = ((s * s - x) / x).abs().to_f64() / <Qd as Scalar>::eps().to_f64();
            assert!(err <= 6.0, "sqrt({v}) err {err} ulp");
        }
    }

    #[test]
    fn atan2_special_values() {
        let pi = <Qd as Scalar>::pi();
        let q = Qd::from_f64(1.0);
        let a = <Qd as Scalar>::atan2(q, q);
        assert!((a - pi.mul_pow2(-2)).abs().to_f64() < 1e-62);
        let b = <Qd as Scalar>::atan2(q, Qd::ZERO);
        assert!((b - pi.mul_pow2(-1)).abs().to_f64() < 1e-62);
        let c = <Qd as Scalar>::atan2(Qd::ZERO, -q);
        assert!((c - pi).abs().to_f64() < 1e-62);
    }

    #[test]
    fn atan_against_machin_pieces() {
        // atan(1/5) and atan(1/239) have exact rational oracles.
        use super::super::consts::atan_inv_rational;
        for k in [5i64, 239] {
            let oracle = atan_inv_rational(k, 300);
            let got = <Qd as Scalar>::atan2(Qd::ONE, Qd::from_f64(k as f64));
            let err = ulp_err(got, &oracle);
            assert!(err <= 6.0, "atan(1/{k}) off by {err} ulp");
        }
    }

    #[test]
    fn checked_ops_surface_errors() {
        assert_eq!(
            Qd::ONE.checked_div(Qd::ZERO),
            Err(HiprecError::DivisionByZero)
        );
        assert!(matches!(
            (-Qd::ONE).checked_sqrt(),
            Err(HiprecError::Domain(_))
        ));
        assert!(matches!(Qd::ZERO.checked_ln(), Err(HiprecError::Domain(_))));
        // Poison propagates through operators, surfaces at validate().
        let poisoned = Qd::ONE / Qd::ZERO;
        assert!((poisoned + Qd::ONE).validate().is_err());
    }

    #[test]
    fn decimal_roundtrip_identity() {
        let v = <Qd as Scalar>::pi() / Qd::from_f64(7.0);
        let s = v.to_decimal(70);
        let back = <Qd as Scalar>::parse_decimal(&s).unwrap();
        assert_eq!(v, back, "qd 70-digit round trip");
        let d = <Dd as Scalar>::pi() / Dd::from_f64(7.0);
        let s = d.to_decimal(40);
        let back = <Dd as Scalar>::parse_decimal(&s).unwrap();
        assert_eq!(d, back, "dd 40-digit round trip");
    }

    #[test]
    fn hex_dump_roundtrip() {
        let v = <Qd as Scalar>::pi();
        let s = v.hex_dump();
        assert!(s.starts_with("qd:"));
        assert_eq!(<Qd as Scalar>::from_hex_dump(&s).unwrap(), v);
    }
}
