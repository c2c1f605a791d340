//! Complex values over an extended-precision real.

use super::Scalar;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Rectangular complex number with [`Scalar`] components.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Cx { re, im }
    }

    pub fn zero() -> Self {
        Cx {
            re: T::zero(),
            im: T::zero(),
        }
    }

    pub fn one() -> Self {
        Cx {
            re: T::one(),
            im: T::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Cx {
            re: T::zero(),
            im: T::one(),
        }
    }

    pub fn from_re(re: T) -> Self {
        Cx { re, im: T::zero() }
    }

    pub fn from_f64s(re: f64, im: f64) -> Self {
        Cx {
            re: T::from_f64(re),
            im: T::from_f64(im),
        }
    }

    pub fn conj(self) -> Self {
        Cx {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn arg(self) -> T {
        T::atan2(self.im, self.re)
    }

    pub fn is_finite_val(self) -> bool {
        self.re.is_finite_val() && self.im.is_finite_val()
    }

    pub fn scale(self, t: T) -> Self {
        Cx {
            re: self.re * t,
            im: self.im * t,
        }
    }

    pub fn recip(self) -> Self {
        let d = self.norm_sqr();
        Cx {
            re: self.re / d,
            im: -self.im / d,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Cx::one();
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

    /// Principal square root.
    pub fn sqrt(self) -> Self {
        if self.im.is_zero() {
            if self.re >= T::zero() {
                return Cx::from_re(self.re.sqrt());
            }
            return Cx::new(T::zero(), (-self.re).sqrt());
        }
        let r = self.abs();
        let two = T::from_f64(2.0);
        let re = ((r + self.re) / two).sqrt();
        let mut im = ((r - self.re) / two).sqrt();
        if self.im < T::zero() {
            im = -im;
        }
        Cx { re, im }
    }

    pub fn to_f64s(self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<T: Scalar> Neg for Cx<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Cx {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl<T: Scalar> Add for Cx<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cx {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl<T: Scalar> Sub for Cx<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cx {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl<T: Scalar> Mul for Cx<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Cx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl<T: Scalar> Div for Cx<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let d = o.norm_sqr();
        Cx {
            re: (self.re * o.re + self.im * o.im) / d,
            im: (self.im * o.re - self.re * o.im) / d,
        }
    }
}

impl<T: Scalar> AddAssign for Cx<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}
impl<T: Scalar> SubAssign for Cx<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}
impl<T: Scalar> MulAssign for Cx<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}
impl<T: Scalar> DivAssign for Cx<T> {
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<T: Scalar> std::fmt::Display for Cx<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}
