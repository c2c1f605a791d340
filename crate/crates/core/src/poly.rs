//! The polynomial `Q(f) = -f^k + a_(k-1) f^(k-1) + ... + a_0`, its simple
//! real roots, and the residue formulas for the blowup times `T^j`.

use crate::hiprec::{Cx, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, thiserror::Error)]
pub enum PolyError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("leading coefficient must be exactly -1 (got {0})")]
    LeadingCoefficient(String),
    #[error("degree must be at least 2 (got {0})")]
    Degree(usize),
    #[error("roots violate the simple-real-roots assumption: {0}")]
    InvalidRoots(String),
    #[error("operation requires a valid root set")]
    NeedValidRoots,
    #[error("index j={j} out of range 1..={max}")]
    IndexRange { j: usize, max: usize },
}

/// `Q(f) = -f^kappa + sum a_alpha f^alpha` with exact rational `a`.
///
/// The leading coefficient is pinned to -1; rescaling Q rescales time and
/// silently changes the blowup times, so inputs in any other normalization
/// are rejected rather than rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyQ {
    kappa: usize,
    /// a[alpha] for alpha = 0..kappa-1.
    a: Vec<BigRational>,
}

impl PolyQ {
    pub fn new(kappa: usize, a: Vec<BigRational>) -> Result<PolyQ, PolyError> {
        if kappa < 2 {
            return Err(PolyError::Degree(kappa));
        }
        if a.len() != kappa {
            return Err(PolyError::Parse(format!(
                "need {kappa} lower coefficients, got {}",
                a.len()
            )));
        }
        Ok(PolyQ { kappa, a })
    }

    /// Builds `Q = -prod (f - r_l)` from prescribed roots.
    pub fn from_roots(roots: &[BigRational]) -> Result<PolyQ, PolyError> {
        let kappa = roots.len();
        if kappa < 2 {
            return Err(PolyError::Degree(kappa));
        }
        // Monic product prod (f - r), then negate.
        let mut poly = vec![BigRational::one()];
        for r in roots {
            let mut next = vec![BigRational::zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            poly = next;
        }
        let a = (0..kappa).map(|i| -poly[i].clone()).collect();
        PolyQ::new(kappa, a)
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.a
    }

    /// Full coefficient table `c[alpha]`, alpha = 0..=kappa (leading -1) in T.
    pub fn coeff_table<T: Scalar>(&self) -> Vec<T> {
        let mut c: Vec<T> = self.a.iter().map(|r| T::from_rational(r)).collect();
        c.push(-T::one());
        c
    }

    /// Derivative coefficient table, degree kappa-1: `c[i] = (i+1) q_(i+1)`.
    pub fn deriv_table<T: Scalar>(&self) -> Vec<T> {
        let c = self.coeff_table::<T>();
        (1..=self.kappa)
            .map(|i| c[i] * T::from_i64(i as i64))
            .collect()
    }

    /// Horner evaluation of Q, Q' or Q'' at a complex point.
    pub fn eval<T: Scalar>(&self, x: Cx<T>, deriv_order: u8) -> Cx<T> {
        assert!(deriv_order <= 2, "deriv_order 0|1|2");
        let c = self.coeff_table::<T>();
        let mut acc = Cx::zero();
        match deriv_order {
            0 => {
                for i in (0..=self.kappa).rev() {
                    acc = acc * x + Cx::from_re(c[i]);
                }
            }
            1 => {
                for i in (1..=self.kappa).rev() {
                    acc = acc * x + Cx::from_re(c[i] * T::from_i64(i as i64));
                }
            }
            _ => {
                for i in (2..=self.kappa).rev() {
                    acc = acc * x + Cx::from_re(c[i] * T::from_i64((i * (i - 1)) as i64));
                }
            }
        }
        acc
    }

    /// Real-axis evaluation.
    pub fn eval_real<T: Scalar>(&self, x: T, deriv_order: u8) -> T {
        self.eval(Cx::from_re(x), deriv_order).re
    }

    /// `P(x, eps) = eps^kappa Q(x/eps) = -x^kappa + sum eps^(kappa-alpha) a_alpha x^alpha`
    /// or its x-derivative, evaluated without forming `x/eps` (stable at eps -> 0).
    pub fn p_scaled<T: Scalar>(&self, x: Cx<T>, eps: T, deriv_order: u8) -> Cx<T> {
        assert!(deriv_order <= 1, "deriv_order 0|1");
        let c = self.coeff_table::<T>();
        let mut eff = vec![T::zero(); self.kappa + 1];
        let mut epspow = T::one();
        for alpha in (0..=self.kappa).rev() {
            eff[alpha] = c[alpha] * epspow;
            epspow *= eps;
        }
        let mut acc = Cx::zero();
        match deriv_order {
            0 => {
                for alpha in (0..=self.kappa).rev() {
                    acc = acc * x + Cx::from_re(eff[alpha]);
                }
            }
            _ => {
                for alpha in (1..=self.kappa).rev() {
                    acc = acc * x + Cx::from_re(eff[alpha] * T::from_i64(alpha as i64));
                }
            }
        }
        acc
    }

    /// Finds all roots, polishes them to working precision, and validates
    /// the simple-real-roots assumption.
    pub fn real_roots<T: Scalar>(&self) -> RootSet<T> {
        let scale: f64 = self
            .a
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::INFINITY).abs())
            .fold(1.0f64, f64::max);
        let tol_simple = 1e-6 * scale;

        // Bootstrap: companion-matrix eigenvalues in native precision.
        let k = self.kappa;
        let mut m = nalgebra::DMatrix::<f64>::zeros(k, k);
        for i in 1..k {
            m[(i, i - 1)] = 1.0;
        }
        // Monic form f^k = sum a_alpha f^alpha: last column holds +a_alpha.
        for (alpha, c) in self.a.iter().enumerate() {
            m[(alpha, k - 1)] = c.to_f64().unwrap_or(0.0);
        }
        let eigs = m.complex_eigenvalues();

        let tol_imag = 1e-7 * scale.max(1.0);
        let mut reals: Vec<f64> = Vec::with_capacity(k);
        for e in eigs.iter() {
            if e.im.abs() > tol_imag {
                // A conjugate pair with tiny imaginary part is indistinguishable
                // from a near-double real root at bootstrap precision.
                let failure = if e.im.abs() < 1e-3 * scale.max(1.0) {
                    RootFailure::NearMultiple {
                        at: e.re,
                        dq: self.eval_real(e.re, 1),
                    }
                } else {
                    RootFailure::ComplexPair { re: e.re, im: e.im }
                };
                return RootSet::invalid(failure);
            }
            reals.push(e.re);
        }
        reals.sort_by(|x, y| y.partial_cmp(x).unwrap());

        for &r in &reals {
            let dq = self.eval_real(r, 1);
            if dq.abs() <= tol_simple {
                return RootSet::invalid(RootFailure::NearMultiple { at: r, dq });
            }
        }

        // Newton polish in working precision.
        let mut roots = Vec::with_capacity(k);
        let mut dqs: Vec<T> = Vec::with_capacity(k);
        for &r0 in &reals {
            let mut x = T::from_f64(r0);
            for _ in 0..12 {
                let q = self.eval_real(x, 0);
                let dq = self.eval_real(x, 1);
                let step = q / dq;
                x -= step;
                if step.abs() <= x.abs().maximum(T::one()) * T::eps().mul_pow2(2) {
                    break;
                }
            }
            roots.push(x);
            dqs.push(self.eval_real(x, 1));
        }

        // Distinctness after polish.
        for i in 1..roots.len() {
            if roots[i - 1] <= roots[i] {
                return RootSet::invalid(RootFailure::NearMultiple {
                    at: roots[i].to_f64(),
                    dq: dqs[i].to_f64(),
                });
            }
        }
        // Sign alternation with Q'(q^1) < 0 is forced by simple real roots.
        for (idx, dq) in dqs.iter().enumerate() {
            let want_neg = idx % 2 == 0;
            if (*dq < T::zero()) != want_neg {
                return RootSet::invalid(RootFailure::NearMultiple {
                    at: roots[idx].to_f64(),
                    dq: dq.to_f64(),
                });
            }
        }

        RootSet {
            roots,
            dq: dqs,
            valid: true,
            failure: None,
        }
    }

    /// Parses `-f^3 + 1/2 f + 1` style text (optionally prefixed `Q =`).
    pub fn parse(text: &str) -> Result<PolyQ, PolyError> {
        parse_poly(text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("-f^{}", self.kappa);
        for alpha in (0..self.kappa).rev() {
            let c = &self.a[alpha];
            if c.is_zero() {
                continue;
            }
            s.push_str(if c.is_negative() { " - " } else { " + " });
            let mag = c.abs();
            match alpha {
                0 => s.push_str(&format_rational(&mag)),
                _ => {
                    if !mag.is_one() {
                        s.push_str(&format_rational(&mag));
                        s.push(' ');
                    }
                    if alpha == 1 {
                        s.push('f');
                    } else {
                        s.push_str(&format!("f^{alpha}"));
                    }
                }
            }
        }
        s
    }
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Why a root set failed validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootFailure {
    ComplexPair { re: f64, im: f64 },
    NearMultiple { at: f64, dq: f64 },
}

impl fmt::Display for RootFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootFailure::ComplexPair { re, im } => {
                write!(f, "complex pair detected near {re} + {im}i")
            }
            RootFailure::NearMultiple { at, dq } => {
                write!(f, "simplicity violated near f={at} (Q' = {dq})")
            }
        }
    }
}

/// Ordered simple real roots `q^kappa < ... < q^1` (index 0 = largest) with
/// the derivative values `Q'(q^l)`.
#[derive(Debug, Clone)]
pub struct RootSet<T> {
    /// Descending; `roots[j-1]` is `q^j` in the 1-based convention.
    pub roots: Vec<T>,
    pub dq: Vec<T>,
    pub valid: bool,
    pub failure: Option<RootFailure>,
}

impl<T: Scalar> RootSet<T> {
    fn invalid(failure: RootFailure) -> RootSet<T> {
        RootSet {
            roots: Vec::new(),
            dq: Vec::new(),
            valid: false,
            failure: Some(failure),
        }
    }

    pub fn kappa(&self) -> usize {
        self.roots.len()
    }

    /// `q^j` in the 1-based indexing (j=1 is the largest root).
    pub fn root(&self, j: usize) -> T {
        self.roots[j - 1]
    }

    pub fn dq_at(&self, j: usize) -> T {
        self.dq[j - 1]
    }

    /// Signed partial sum `sum_(l=1..j) 1/Q'(q^l)`.
    pub fn inverse_dq_sum(&self, j: usize) -> Result<T, PolyError> {
        if !self.valid {
            return Err(PolyError::NeedValidRoots);
        }
        if j < 1 || j > self.kappa() {
            return Err(PolyError::IndexRange {
                j,
                max: self.kappa(),
            });
        }
        let mut acc = T::zero();
        for l in 1..=j {
            acc += self.dq_at(l).recip();
        }
        Ok(acc)
    }

    /// Blowup time `T^j = |pi sum_(l=1..j) 1/Q'(q^l)|` for j = 1..kappa-1.
    pub fn blowup_time_formula(&self, j: usize) -> Result<T, PolyError> {
        if !self.valid {
            return Err(PolyError::NeedValidRoots);
        }
        if j < 1 || j >= self.kappa() {
            return Err(PolyError::IndexRange {
                j,
                max: self.kappa().saturating_sub(1),
            });
        }
        Ok((T::pi() * self.inverse_dq_sum(j)?).abs())
    }
}

fn parse_poly(text: &str) -> Result<PolyQ, PolyError> {
    let mut s = text.trim();
    if let Some(rest) = s.strip_prefix('Q').or_else(|| s.strip_prefix('q')) {
        let rest = rest.trim_start();
        s = rest
            .strip_prefix('=')
            .ok_or_else(|| PolyError::Parse("expected '=' after Q".into()))?;
    }
    let terms = split_terms(s)?;
    if terms.is_empty() {
        return Err(PolyError::Parse("empty polynomial".into()));
    }
    let mut by_power: Vec<(usize, BigRational)> = Vec::new();
    let mut max_pow = 0usize;
    for (neg, body) in terms {
        let (coef, pow) = parse_term(body.trim())?;
        let coef = if neg { -coef } else { coef };
        max_pow = max_pow.max(pow);
        by_power.push((pow, coef));
    }
    let kappa = max_pow;
    if kappa < 2 {
        return Err(PolyError::Degree(kappa));
    }
    let mut full = vec![BigRational::zero(); kappa + 1];
    for (pow, coef) in by_power {
        full[pow] += coef;
    }
    if full[kappa] != -BigRational::one() {
        return Err(PolyError::LeadingCoefficient(format_rational(&full[kappa])));
    }
    PolyQ::new(kappa, full[..kappa].to_vec())
}

/// Splits at the +/- signs between terms; returns (is_negative, body) pairs.
fn split_terms(s: &str) -> Result<Vec<(bool, String)>, PolyError> {
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut sign = false;
    let mut pending_sign = false;
    for ch in s.chars() {
        match ch {
            '+' | '-' => {
                if cur.trim().is_empty() {
                    if pending_sign {
                        return Err(PolyError::Parse(format!("repeated sign in {s:?}")));
                    }
                    sign = ch == '-';
                } else {
                    terms.push((sign, std::mem::take(&mut cur)));
                    sign = ch == '-';
                }
                pending_sign = true;
            }
            _ => {
                if !ch.is_whitespace() || !cur.is_empty() {
                    cur.push(ch);
                }
                if !ch.is_whitespace() {
                    pending_sign = false;
                }
            }
        }
    }
    if !cur.trim().is_empty() {
        terms.push((sign, cur));
    } else if pending_sign {
        return Err(PolyError::Parse(format!("dangling sign in {s:?}")));
    }
    Ok(terms)
}

/// Parses one signless term: `[coef] [*] [f [^ power]]`.
fn parse_term(body: &str) -> Result<(BigRational, usize), PolyError> {
    let bad = |m: &str| PolyError::Parse(format!("{m} in term {body:?}"));
    let (coef_str, var_str) = match body.find(['f', 'F']) {
        Some(idx) => (body[..idx].trim(), body[idx..].trim()),
        None => (body.trim(), ""),
    };
    let coef_str = coef_str.trim_end_matches('*').trim();
    let coef = if coef_str.is_empty() {
        if var_str.is_empty() {
            return Err(bad("empty term"));
        }
        BigRational::one()
    } else if let Some((n, d)) = coef_str.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        BigRational::new(n, d)
    } else {
        crate::hiprec::parse_decimal_rational(coef_str)
            .map_err(|e| bad(&format!("bad coefficient ({e})")))?
    };
    let pow = if var_str.is_empty() {
        0
    } else {
        let rest = var_str[1..].trim();
        if rest.is_empty() {
            1
        } else if let Some(p) = rest.strip_prefix('^') {
            p.trim().parse::<usize>().map_err(|_| bad("bad power"))?
        } else {
            return Err(bad("unexpected trailing characters"));
        }
    };
    Ok((coef, pow))
}
