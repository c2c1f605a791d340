//! Adaptive Taylor-series integrator for polynomial vector fields.
//!
//! Each step recursively builds the Taylor coefficients of the solution to a
//! configurable order (the right-hand sides are polynomial, so coefficient
//! extension is a cascade of jet convolutions with exact integer constants).
//! The dense output of a step is its Taylor polynomial, so event times are
//! located by bracketing plus Newton on that polynomial at full working
//! precision.  Step size comes from the magnitude of the two highest
//! coefficients with a persistence cap, which acts as the step controller.

use crate::hiprec::{Cx, Scalar};
use std::fmt::Debug;

#[derive(Debug, Clone, thiserror::Error)]
pub enum TaylorError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step limit {0} exceeded")]
    MaxSteps(usize),
}

/// Coefficient ring of the state: the working real or its complexification.
pub trait Ring<T: Scalar>: Copy + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn scale(self, t: T) -> Self;
    fn from_re(t: T) -> Self;
    /// Cheap magnitude bound for step control (|re| + |im| flavor).
    fn mag(self) -> T;
    fn finite(self) -> bool;
}

impl<T: Scalar> Ring<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn scale(self, t: T) -> Self {
        self * t
    }
    fn from_re(t: T) -> Self {
        t
    }
    fn mag(self) -> T {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite_val()
    }
}

impl<T: Scalar> Ring<T> for Cx<T> {
    fn zero() -> Self {
        Cx::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn scale(self, t: T) -> Self {
        Cx::scale(self, t)
    }
    fn from_re(t: T) -> Self {
        Cx::from_re(t)
    }
    fn mag(self) -> T {
        self.re.abs() + self.im.abs()
    }
    fn finite(self) -> bool {
        self.is_finite_val()
    }
}

/// Jet helpers: a jet is a coefficient slice `a[0..=k]`.
pub mod jet {
    use super::Ring;
    use crate::hiprec::Scalar;

    /// k-th coefficient of the product of two jets.
    #[inline]
    pub fn mul_coeff<T: Scalar, R: Ring<T>>(a: &[R], b: &[R], k: usize) -> R {
        let mut acc = R::zero();
        for m in 0..=k {
            acc = acc.add(a[m].mul(b[k - m]));
        }
        acc
    }

    /// Full product of two jets truncated to `len` coefficients.
    pub fn mul<T: Scalar, R: Ring<T>>(a: &[R], b: &[R], len: usize) -> Vec<R> {
        let mut out = vec![R::zero(); len];
        for (i, ai) in a.iter().enumerate().take(len) {
            for (j, bj) in b.iter().enumerate().take(len - i) {
                out[i + j] = out[i + j].add(ai.mul(*bj));
            }
        }
        out
    }

    /// Polynomial of a jet by Horner, truncated to the jet length.
    pub fn poly_of<T: Scalar, R: Ring<T>>(coeffs: &[R], x: &[R]) -> Vec<R> {
        let len = x.len();
        let mut acc = vec![R::zero(); len];
        for c in coeffs.iter().rev() {
            acc = mul(&acc, x, len);
            acc[0] = acc[0].add(*c);
        }
        acc
    }

    /// Evaluates a jet at offset `sigma`.
    pub fn eval<T: Scalar, R: Ring<T>>(a: &[R], sigma: T) -> R {
        let mut acc = R::zero();
        for c in a.iter().rev() {
            acc = acc.scale(sigma).add(*c);
        }
        acc
    }

    /// Derivative jet.
    pub fn diff<T: Scalar, R: Ring<T>>(a: &[R]) -> Vec<R> {
        if a.len() <= 1 {
            return vec![R::zero()];
        }
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale(T::from_i64(i as i64)))
            .collect()
    }
}

/// A polynomial ODE: extends the Taylor coefficients of its right-hand side
/// one order at a time, caching intermediates within a step.
pub trait TaylorOde<T: Scalar> {
    type Elem: Ring<T>;
    fn dim(&self) -> usize;
    /// Reset per-step caches (`order` coefficients will be requested).
    fn begin_step(&mut self, order: usize);
    /// With state jets complete through index k, write coefficient k of the
    /// derivative of each state variable.  Called with k = 0, 1, ... in order.
    fn rhs_coeff(&mut self, x: &[Vec<Self::Elem>], k: usize, out: &mut [Self::Elem]);
}

#[derive(Debug, Clone)]
pub struct StepControl<T> {
    /// Local tolerance, relative to max(1, |state|).
    pub tol: T,
    /// Taylor order per step.
    pub order: usize,
    pub h_max: T,
    pub max_steps: usize,
    pub safety: T,
}

impl<T: Scalar> StepControl<T> {
    pub fn with_tol(tol: T) -> Self {
        // Order ~ -ln(tol)/2 balances work per step against step count.
        let order = ((-tol.to_f64().ln() / 2.0).ceil() as usize + 4).clamp(8, 60);
        StepControl {
            tol,
            order,
            h_max: T::from_f64(1e6),
            max_steps: 2_000_000,
            safety: T::from_f64(0.5),
        }
    }
}

/// One-system adaptive stepper with dense output for the last step.
pub struct Stepper<'a, T: Scalar, S: TaylorOde<T>> {
    pub sys: &'a mut S,
    pub state: Vec<S::Elem>,
    pub t: T,
    pub ctl: StepControl<T>,
    pub steps: usize,
    jets: Vec<Vec<S::Elem>>,
    inv_int: Vec<T>,
    t_prev: T,
    h_last: T,
    h_prev: Option<T>,
}

impl<'a, T: Scalar, S: TaylorOde<T>> Stepper<'a, T, S> {
    pub fn new(sys: &'a mut S, state0: Vec<S::Elem>, ctl: StepControl<T>) -> Self {
        let dim = sys.dim();
        assert_eq!(state0.len(), dim);
        let order = ctl.order;
        let inv_int = (0..=order + 1)
            .map(|k| {
                if k == 0 {
                    T::one()
                } else {
                    T::from_i64(k as i64).recip()
                }
            })
            .collect();
        Stepper {
            sys,
            state: state0,
            t: T::zero(),
            ctl,
            steps: 0,
            jets: vec![Vec::new(); dim],
            inv_int,
            t_prev: T::zero(),
            h_last: T::zero(),
            h_prev: None,
        }
    }

    /// Taylor polynomial of the step just taken (coefficients 0..=order).
    pub fn last_jets(&self) -> &[Vec<S::Elem>] {
        &self.jets
    }

    pub fn last_step_size(&self) -> T {
        self.h_last
    }

    /// Dense evaluation of the last step at offset `sigma` in [0, h_last].
    pub fn dense_eval(&self, sigma: T) -> Vec<S::Elem> {
        self.jets.iter().map(|j| jet::eval(j, sigma)).collect()
    }

    /// Rolls the endpoint of the last step back to offset `sigma`
    /// (used after an event has been located inside the step).
    pub fn cut_last_step(&mut self, sigma: T) {
        self.state = self.dense_eval(sigma);
        self.t = self.t_prev + sigma;
        self.h_last = sigma;
    }

    fn build_jets(&mut self) -> Result<(), TaylorError> {
        let dim = self.sys.dim();
        let order = self.ctl.order;
        for (v, j) in self.jets.iter_mut().enumerate() {
            j.clear();
            j.reserve(order + 1);
            j.push(self.state[v]);
        }
        self.sys.begin_step(order);
        let mut buf = vec![S::Elem::zero(); dim];
        for k in 0..order {
            self.sys.rhs_coeff(&self.jets, k, &mut buf);
            let inv = self.inv_int[k + 1];
            for (v, j) in self.jets.iter_mut().enumerate() {
                j.push(buf[v].scale(inv));
            }
        }
        for j in &self.jets {
            if !j[0].finite() || !j[order].finite() {
                return Err(TaylorError::NonFinite { t: self.t.to_f64() });
            }
        }
        Ok(())
    }

    fn pick_step(&self) -> T {
        let order = self.ctl.order;
        let mut scale = T::one();
        for j in &self.jets {
            scale = scale.maximum(j[0].mag());
        }
        let tol_abs = self.ctl.tol * scale;
        let mut h = self.ctl.h_max;
        for k in [order - 1, order] {
            let mut nk = T::zero();
            for j in &self.jets {
                nk = nk.maximum(j[k].mag());
            }
            if nk.is_zero() {
                continue;
            }
            // (tol_abs / nk)^(1/k)
            let hk = ((tol_abs / nk).ln() * T::from_i64(k as i64).recip()).exp();
            h = h.minimum(hk);
        }
        h *= self.ctl.safety;
        if let Some(hp) = self.h_prev {
            h = h.minimum(hp * T::from_f64(3.0));
        }
        h.minimum(self.ctl.h_max)
    }

    /// One adaptive step, optionally capped; returns the step size taken.
    pub fn step_capped(&mut self, cap: Option<T>) -> Result<T, TaylorError> {
        if self.steps >= self.ctl.max_steps {
            return Err(TaylorError::MaxSteps(self.ctl.max_steps));
        }
        self.build_jets()?;
        let mut h = self.pick_step();
        if let Some(c) = cap {
            h = h.minimum(c);
        }
        let floor = T::from_f64(1e-3) * T::eps() * self.t.abs().maximum(T::one());
        if h <= floor {
            return Err(TaylorError::StepUnderflow {
                t: self.t.to_f64(),
                h: h.to_f64(),
            });
        }
        self.t_prev = self.t;
        self.h_last = h;
        self.h_prev = Some(h);
        self.state = self.dense_eval(h);
        self.t += h;
        self.steps += 1;
        for s in &self.state {
            if !s.finite() {
                return Err(TaylorError::NonFinite { t: self.t.to_f64() });
            }
        }
        Ok(h)
    }

    pub fn step(&mut self) -> Result<T, TaylorError> {
        self.step_capped(None)
    }

    /// Integrates exactly to `t_target` (forward in the internal time).
    pub fn run_to(&mut self, t_target: T) -> Result<(), TaylorError> {
        while self.t < t_target {
            let rem = t_target - self.t;
            self.step_capped(Some(rem))?;
        }
        Ok(())
    }
}

/// Smallest root of a real polynomial on (lo, h], by coarse sign scan then
/// bisection plus Newton polish.  `poly[k]` multiplies sigma^k.
pub fn first_poly_root<T: Scalar>(poly: &[T], lo: T, h: T, tol: T) -> Option<T> {
    let n_scan = 24;
    let mut prev_s = lo;
    let mut prev_v = poly_eval(poly, lo);
    let dh = (h - lo) * T::from_i64(n_scan).recip();
    for i in 1..=n_scan {
        let s = lo + dh * T::from_i64(i);
        let v = poly_eval(poly, s);
        if prev_v.is_zero() {
            return Some(prev_s);
        }
        if (prev_v < T::zero()) != (v < T::zero()) || v.is_zero() {
            // bracket [prev_s, s]
            let (mut a, mut b) = (prev_s, s);
            let mut fa = prev_v;
            for _ in 0..12 {
                let m = (a + b).mul_pow2(-1);
                let fm = poly_eval(poly, m);
                if fm.is_zero() {
                    return Some(m);
                }
                if (fa < T::zero()) != (fm < T::zero()) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let dpoly: Vec<T> = poly
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| *c * T::from_i64(k as i64))
                .collect();
            let mut x = (a + b).mul_pow2(-1);
            for _ in 0..80 {
                let f = poly_eval(poly, x);
                let d = poly_eval(&dpoly, x);
                if d.is_zero() {
                    break;
                }
                let step = f / d;
                x -= step;
                if x < a || x > b {
                    x = (a + b).mul_pow2(-1);
                    break;
                }
                if step.abs() <= tol {
                    break;
                }
            }
            return Some(x);
        }
        prev_s = s;
        prev_v = v;
    }
    None
}

fn poly_eval<T: Scalar>(poly: &[T], x: T) -> T {
    let mut acc = T::zero();
    for c in poly.iter().rev() {
        acc = acc * x + *c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hiprec::Qd;

    /// x' = x, solution e^t.
    struct ExpSys;
    impl TaylorOde<Qd> for ExpSys {
        type Elem = Qd;
        fn dim(&self) -> usize {
            1
        }
        fn begin_step(&mut self, _order: usize) {}
        fn rhs_coeff(&mut self, x: &[Vec<Qd>], k: usize, out: &mut [Qd]) {
            out[0] = x[0][k];
        }
    }

    /// Harmonic oscillator y'' = -y as a first-order system.
    struct Osc;
    impl TaylorOde<Qd> for Osc {
        type Elem = Qd;
        fn dim(&self) -> usize {
            2
        }
        fn begin_step(&mut self, _order: usize) {}
        fn rhs_coeff(&mut self, x: &[Vec<Qd>], k: usize, out: &mut [Qd]) {
            out[0] = x[1][k];
            out[1] = -x[0][k];
        }
    }

    #[test]
    fn exponential_to_machine_accuracy() {
        let mut sys = ExpSys;
        let ctl = StepControl::with_tol(Qd::from_f64(1e-40));
        let mut st = Stepper::new(&mut sys, vec![Qd::ONE], ctl);
        st.run_to(Qd::ONE).unwrap();
        let want = <Qd as Scalar>::exp(Qd::ONE);
        let err = ((st.state[0] - want) / want).abs().to_f64();
        assert!(err < 1e-38, "err {err:e} in {} steps", st.steps);
    }

    #[test]
    fn oscillator_full_period() {
        let mut sys = Osc;
        let ctl = StepControl::with_tol(Qd::from_f64(1e-45));
        let mut st = Stepper::new(&mut sys, vec![Qd::ONE, Qd::ZERO], ctl);
        let period = <Qd as Scalar>::pi().mul_pow2(1);
        st.run_to(period).unwrap();
        assert!(((st.state[0] - Qd::ONE).abs()).to_f64() < 1e-42);
        assert!(st.state[1].abs().to_f64() < 1e-42);
    }

    #[test]
    fn halved_tolerance_shrinks_error() {
        // Re-integration at tighter tolerance changes the endpoint by less
        // than ~10x the looser local tolerance.
        let run = |tol: f64| {
            let mut sys = Osc;
            let ctl = StepControl::with_tol(Qd::from_f64(tol));
            let mut st = Stepper::new(&mut sys, vec![Qd::ONE, Qd::ZERO], ctl);
            st.run_to(Qd::from_f64(10.0)).unwrap();
            (st.state[0], st.state[1])
        };
        let (a0, a1) = run(1e-30);
        let (b0, b1) = run(1e-33);
        let d = (a0 - b0).abs().maximum((a1 - b1).abs()).to_f64();
        assert!(d < 1e-28, "endpoint drift {d:e}");
    }

    #[test]
    fn dense_output_and_event_root() {
        // Locate the first zero of cos(t) (i.e. state[0] with x0 = (1,0)).
        let mut sys = Osc;
        let ctl = StepControl::with_tol(Qd::from_f64(1e-45));
        let mut st = Stepper::new(&mut sys, vec![Qd::ONE, Qd::ZERO], ctl);
        let target = <Qd as Scalar>::pi().mul_pow2(-1);
        loop {
            let h = st.step().unwrap();
            let g: Vec<Qd> = st.last_jets()[0].clone();
            if let Some(root) = first_poly_root(&g, Qd::ZERO, h, Qd::from_f64(1e-55)) {
                st.cut_last_step(root);
                break;
            }
            assert!(st.steps < 100);
        }
        let err = (st.t - target).abs().to_f64();
        assert!(err < 1e-45, "event time error {err:e}");
        assert!(st.state[0].abs().to_f64() < 1e-45);
    }

    #[test]
    fn step_underflow_reported() {
        // x' = 1 + x^2 blows up at t = pi/2; stepping toward it must
        // eventually underflow rather than hang or overflow silently.
        struct Blow;
        impl TaylorOde<Qd> for Blow {
            type Elem = Qd;
            fn dim(&self) -> usize {
                1
            }
            fn begin_step(&mut self, _o: usize) {}
            fn rhs_coeff(&mut self, x: &[Vec<Qd>], k: usize, out: &mut [Qd]) {
                let sq = jet::mul_coeff(&x[0], &x[0], k);
                out[0] = if k == 0 { sq + Qd::ONE } else { sq };
            }
        }
        let mut sys = Blow;
        let mut ctl = StepControl::with_tol(Qd::from_f64(1e-30));
        ctl.max_steps = 100_000;
        let mut st = Stepper::new(&mut sys, vec![Qd::ZERO], ctl);
        let err = loop {
            match st.step() {
                Ok(_) => {
                    if st.state[0].to_f64() > 1e280 {
                        break None;
                    }
                }
                Err(e) => break Some(e),
            }
        };
        // Either outcome is acceptable; what matters is no hang and, if an
        // error is raised, it is the step-size underflow.
        if let Some(e) = err {
            assert!(matches!(
                e,
                TaylorError::StepUnderflow { .. } | TaylorError::NonFinite { .. }
            ));
        }
    }
}
