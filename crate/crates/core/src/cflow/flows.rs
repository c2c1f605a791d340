//! Flow tracing on the Poincare hemisphere: the interior chart integrates
//! `x' = dir * fac * Q(x)` directly; past `r_switch` the state moves to the
//! desingularized `(w1, theta)` chart (carried as `(w1, cos theta, sin theta)`
//! plus the accumulated physical time, so the right-hand side stays
//! polynomial and the equator is regular).

use super::FlowError;
use crate::hiprec::{Cx, Scalar};
use crate::poly::PolyQ;
use crate::taylor::{first_poly_root, jet, StepControl, Stepper, TaylorError, TaylorOde};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Interior,
    W1Theta,
}

/// Geometry and integrator settings for one polynomial.
#[derive(Debug, Clone)]
pub struct FlowConfig<T> {
    pub r_switch: T,
    pub r_esc: T,
    pub ctl: StepControl<T>,
}

impl<T: Scalar> FlowConfig<T> {
    /// Defaults: `r_switch = 2 (1 + max |q^l|)`, `r_esc = 10 r_switch`.
    pub fn from_roots(roots: &[T], tol: T) -> Self {
        let mut m = T::zero();
        for r in roots {
            m = m.maximum(r.abs());
        }
        let r_switch = (T::one() + m).mul_pow2(1);
        FlowConfig {
            r_switch,
            r_esc: r_switch * T::from_f64(10.0),
            ctl: StepControl::with_tol(tol),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StopRule<T> {
    /// Terminate at the first return to the real axis (after leaving it).
    pub real_axis_return: bool,
    /// Terminate `Escaped` when the chart coordinate drops to this w1.
    pub escape_w1: Option<T>,
    /// Cap on accumulated physical time along the trace.
    pub s_cap: Option<T>,
    /// Cap on accumulated arc length of the disc projection.
    pub arc_cap: Option<f64>,
    pub max_steps: usize,
}

impl<T: Scalar> StopRule<T> {
    pub fn none() -> Self {
        StopRule {
            real_axis_return: false,
            escape_w1: None,
            s_cap: None,
            arc_cap: None,
            max_steps: 400_000,
        }
    }

    pub fn until_time(s: T) -> Self {
        StopRule {
            s_cap: Some(s),
            ..StopRule::none()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<T> {
    Escaped,
    ReturnedToRealAxis { crossing: T },
    SCap,
    ArcCap,
    MaxSteps,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct PathSample<T> {
    pub s: T,
    pub x: Cx<T>,
    pub chart: Chart,
}

#[derive(Debug, Clone)]
pub struct PhasePath<T> {
    pub flow: FlowKind,
    pub dir: i8,
    pub start: Cx<T>,
    pub samples: Vec<PathSample<T>>,
    pub termination: Termination<T>,
    /// Physical time along the trace at the endpoint.
    pub s_end: T,
    pub x_end: Cx<T>,
    /// Chart state at the endpoint when it lies in the (w1, theta) chart.
    pub end_chart: Option<(T, Cx<T>)>,
}

pub fn interior_to_chart<T: Scalar>(x: Cx<T>) -> (T, Cx<T>) {
    let r = x.abs();
    (r.recip(), x.scale(r.recip()))
}

pub fn chart_to_interior<T: Scalar>(w1: T, e: Cx<T>) -> Cx<T> {
    e.scale(w1.recip())
}

/// Orthographic projection of the hemisphere onto the unit disc (f64).
pub fn disc_projection(re: f64, im: f64) -> (f64, f64) {
    let n2 = re * re + im * im;
    if !n2.is_finite() || n2 > 1e280 {
        let n = n2.sqrt();
        if n.is_finite() && n > 0.0 {
            return (re / n, im / n);
        }
        return (1.0, 0.0);
    }
    let d = 1.0 / (1.0 + n2).sqrt();
    (re * d, im * d)
}

/// Interior flow `x' = dir fac Q(x)` with Horner-chain jet caches.
struct InteriorFlow<T: Scalar> {
    /// Coefficient table scaled so the chain ends at `dir fac Q`.
    c: Vec<Cx<T>>,
    factor: Cx<T>,
    nodes: Vec<Vec<Cx<T>>>,
}

impl<T: Scalar> InteriorFlow<T> {
    fn new(q: &PolyQ, flow: FlowKind, dir: i8) -> Self {
        let c: Vec<Cx<T>> = q.coeff_table::<T>().into_iter().map(Cx::from_re).collect();
        let fac = match flow {
            FlowKind::Real => Cx::one(),
            FlowKind::Imaginary => Cx::i(),
        };
        let factor = if dir >= 0 { fac } else { -fac };
        let kappa = c.len() - 1;
        InteriorFlow {
            c,
            factor,
            nodes: vec![Vec::new(); kappa],
        }
    }
}

impl<T: Scalar> TaylorOde<T> for InteriorFlow<T> {
    type Elem = Cx<T>;
    fn dim(&self) -> usize {
        1
    }
    fn begin_step(&mut self, order: usize) {
        for n in &mut self.nodes {
            n.clear();
            n.reserve(order + 1);
        }
    }
    fn rhs_coeff(&mut self, x: &[Vec<Cx<T>>], k: usize, out: &mut [Cx<T>]) {
        let kappa = self.nodes.len();
        let xj = &x[0];
        for i in 0..kappa {
            // nodes[i] = b_(kappa-1-i), with b_(kappa-1) = c_k x + c_(k-1).
            let mut v = if i == 0 {
                self.c[kappa] * xj[k]
            } else {
                let (done, cur) = self.nodes.split_at(i);
                let _ = cur;
                jet::mul_coeff(&done[i - 1], xj, k)
            };
            if k == 0 {
                v += self.c[kappa - 1 - i];
            }
            self.nodes[i].push(v);
        }
        out[0] = self.factor * self.nodes[kappa - 1][k];
    }
}

/// Desingularized near-infinity chart, state `(w1, cos, sin, s_phys)`.
///
/// Real flow:  w1' = -w1 C,  theta' = S;  imaginary flow: w1' = w1 S,
/// theta' = C, where
/// `C + iS = -E^(kappa-1) + sum a_alpha w1^(kappa-alpha) E^(alpha-1)`,
/// `E = exp(i theta)`; time is rescaled by `ds = w1^(kappa-1) d tau`.
struct ChartFlow<T: Scalar> {
    kappa: usize,
    a: Vec<T>,
    flow: FlowKind,
    dir: T,
    em: Vec<Vec<Cx<T>>>,
    wp: Vec<Vec<T>>,
    big: Vec<Cx<T>>,
    thetadot: Vec<T>,
}

impl<T: Scalar> ChartFlow<T> {
    fn new(q: &PolyQ, flow: FlowKind, dir: i8) -> Self {
        let kappa = q.kappa();
        let mut c = q.coeff_table::<T>();
        c.pop();
        ChartFlow {
            kappa,
            a: c,
            flow,
            dir: if dir >= 0 { T::one() } else { -T::one() },
            em: vec![Vec::new(); kappa],
            wp: vec![Vec::new(); kappa + 1],
            big: Vec::new(),
            thetadot: Vec::new(),
        }
    }
}

impl<T: Scalar> TaylorOde<T> for ChartFlow<T> {
    type Elem = T;
    fn dim(&self) -> usize {
        4
    }
    fn begin_step(&mut self, order: usize) {
        for n in &mut self.em {
            n.clear();
            n.reserve(order + 1);
        }
        for n in &mut self.wp {
            n.clear();
            n.reserve(order + 1);
        }
        self.big.clear();
        self.thetadot.clear();
    }
    fn rhs_coeff(&mut self, x: &[Vec<T>], k: usize, out: &mut [T]) {
        let kappa = self.kappa;
        let w1 = &x[0];
        let cj = &x[1];
        let sj = &x[2];
        // Powers of E = cos + i sin and of w1, extended to coefficient k.
        self.em[0].push(if k == 0 { Cx::one() } else { Cx::zero() });
        if kappa >= 2 {
            self.em[1].push(Cx::new(cj[k], sj[k]));
        }
        for m in 2..kappa {
            let (done, _) = self.em.split_at(m);
            let v = jet::mul_coeff(&done[m - 1], &done[1], k);
            self.em[m].push(v);
        }
        self.wp[0].push(if k == 0 { T::one() } else { T::zero() });
        self.wp[1].push(w1[k]);
        for p in 2..=kappa {
            let (done, _) = self.wp.split_at(p);
            let v = jet::mul_coeff(&done[p - 1], w1, k);
            self.wp[p].push(v);
        }
        // big = -E^(kappa-1) + sum_alpha a_alpha w1^(kappa-alpha) E^(alpha-1).
        let mut big = -self.em[kappa - 1][k];
        for (alpha, a) in self.a.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let wjet = &self.wp[kappa - alpha];
            // E^(alpha-1): conj(E) when alpha = 0.
            let mut term = Cx::zero();
            for m in 0..=k {
                let e = if alpha == 0 {
                    self.em[1][k - m].conj()
                } else {
                    self.em[alpha - 1][k - m]
                };
                term += e.scale(wjet[m]);
            }
            big += term.scale(*a);
        }
        self.big.push(big);
        let (w1dot_k, thetadot_k) = match self.flow {
            FlowKind::Real => {
                // w1' = -w1 Re(big), theta' = Im(big)
                let mut conv = T::zero();
                for m in 0..=k {
                    conv += w1[m] * self.big[k - m].re;
                }
                (-conv, big.im)
            }
            FlowKind::Imaginary => {
                let mut conv = T::zero();
                for m in 0..=k {
                    conv += w1[m] * self.big[k - m].im;
                }
                (conv, big.re)
            }
        };
        self.thetadot.push(thetadot_k);
        // cos' = -sin theta', sin' = cos theta'.
        let mut cdot = T::zero();
        let mut sdot = T::zero();
        for m in 0..=k {
            cdot -= sj[m] * self.thetadot[k - m];
            sdot += cj[m] * self.thetadot[k - m];
        }
        out[0] = self.dir * w1dot_k;
        out[1] = self.dir * cdot;
        out[2] = self.dir * sdot;
        // Physical time along the trace: ds = w1^(kappa-1) d tau.
        out[3] = self.wp[kappa - 1][k];
    }
}

struct Tracer<'a, T: Scalar> {
    q: &'a PolyQ,
    cfg: &'a FlowConfig<T>,
    flow: FlowKind,
    dir: i8,
    stop: &'a StopRule<T>,
    record: bool,
    samples: Vec<PathSample<T>>,
    s_total: T,
    arc_total: f64,
    steps_total: usize,
    armed: bool,
    last_disc: (f64, f64),
}

enum Segment<T: Scalar> {
    ToChart(T, Cx<T>),
    ToInterior(Cx<T>),
    Done(Termination<T>, Cx<T>, Option<(T, Cx<T>)>),
}

pub fn trace_flow<T: Scalar>(
    q: &PolyQ,
    cfg: &FlowConfig<T>,
    x0: Cx<T>,
    flow: FlowKind,
    dir: i8,
    stop: &StopRule<T>,
    record: bool,
) -> Result<PhasePath<T>, FlowError> {
    let (d0x, d0y) = disc_projection(x0.re.to_f64(), x0.im.to_f64());
    let mut tr = Tracer {
        q,
        cfg,
        flow,
        dir,
        stop,
        record,
        samples: Vec::new(),
        s_total: T::zero(),
        arc_total: 0.0,
        steps_total: 0,
        armed: false,
        last_disc: (d0x, d0y),
    };
    if record {
        tr.samples.push(PathSample {
            s: T::zero(),
            x: x0,
            chart: Chart::Interior,
        });
    }
    let mut seg = if x0.abs() > cfg.r_switch {
        let (w1, e) = interior_to_chart(x0);
        Segment::ToChart(w1, e)
    } else {
        Segment::ToInterior(x0)
    };
    loop {
        seg = match seg {
            Segment::ToInterior(x) => tr.run_interior(x)?,
            Segment::ToChart(w1, e) => tr.run_chart(w1, e)?,
            Segment::Done(term, x_end, end_chart) => {
                return Ok(PhasePath {
                    flow,
                    dir,
                    start: x0,
                    samples: tr.samples,
                    termination: term,
                    s_end: tr.s_total,
                    x_end,
                    end_chart,
                });
            }
        };
    }
}

impl<'a, T: Scalar> Tracer<'a, T> {
    fn bump_caps(&mut self, x: Cx<T>) -> Option<Termination<T>> {
        let (dx, dy) = disc_projection(x.re.to_f64(), x.im.to_f64());
        let (px, py) = self.last_disc;
        self.arc_total += ((dx - px).powi(2) + (dy - py).powi(2)).sqrt();
        self.last_disc = (dx, dy);
        if let Some(cap) = self.stop.arc_cap {
            if self.arc_total >= cap {
                return Some(Termination::ArcCap);
            }
        }
        if self.steps_total >= self.stop.max_steps {
            return Some(Termination::MaxSteps);
        }
        None
    }

    fn run_interior(&mut self, x0: Cx<T>) -> Result<Segment<T>, FlowError> {
        let mut sys = InteriorFlow::new(self.q, self.flow, self.dir);
        let mut st = Stepper::new(&mut sys, vec![x0], self.cfg.ctl.clone());
        let root_tol = self.cfg.ctl.tol * T::from_f64(1e-3);
        loop {
            let rem = match self.stop.s_cap {
                Some(cap) => {
                    let rem = cap - self.s_total;
                    if rem <= T::zero() {
                        return Ok(Segment::Done(Termination::SCap, st.state[0], None));
                    }
                    Some(rem)
                }
                None => None,
            };
            let h = match st.step_capped(rem) {
                Ok(h) => h,
                Err(TaylorError::StepUnderflow { .. }) => {
                    return Ok(Segment::Done(Termination::StepUnderflow, st.state[0], None));
                }
                Err(e) => return Err(e.into()),
            };
            self.steps_total += 1;

            // Real-axis return event on the jet of Im(x).
            if self.stop.real_axis_return {
                let g: Vec<T> = st.last_jets()[0].iter().map(|c| c.im).collect();
                let g_start = g[0];
                let g_end = jet::eval(&g, h);
                if !self.armed {
                    if !g_end.is_zero() {
                        self.armed = true;
                    }
                } else if !g_start.is_zero()
                    && ((g_start < T::zero()) != (g_end < T::zero()) || g_end.is_zero())
                {
                    if let Some(root) = first_poly_root(&g, T::zero(), h, root_tol) {
                        st.cut_last_step(root);
                        self.s_total += root;
                        let xr = st.state[0];
                        self.push_sample(xr, Chart::Interior);
                        return Ok(Segment::Done(
                            Termination::ReturnedToRealAxis { crossing: xr.re },
                            xr,
                            None,
                        ));
                    }
                }
            }

            self.s_total += h;
            let x = st.state[0];
            self.push_sample(x, Chart::Interior);
            if let Some(term) = self.bump_caps(x) {
                return Ok(Segment::Done(term, x, None));
            }
            if self.stop.s_cap.is_some_and(|cap| self.s_total >= cap) {
                return Ok(Segment::Done(Termination::SCap, x, None));
            }
            if x.abs() > self.cfg.r_switch {
                let (w1, e) = interior_to_chart(x);
                return Ok(Segment::ToChart(w1, e));
            }
        }
    }

    fn run_chart(&mut self, w1_0: T, e0: Cx<T>) -> Result<Segment<T>, FlowError> {
        let mut sys = ChartFlow::new(self.q, self.flow, self.dir);
        let mut st = Stepper::new(
            &mut sys,
            vec![w1_0, e0.re, e0.im, T::zero()],
            self.cfg.ctl.clone(),
        );
        let root_tol = self.cfg.ctl.tol * T::from_f64(1e-3);
        let s_base = self.s_total;
        // Leave the chart below r_switch/1.5 so the regimes do not ping-pong.
        let w1_exit = (self.cfg.r_switch.recip()) * T::from_f64(1.5);
        loop {
            let h = match st.step() {
                Ok(h) => h,
                Err(TaylorError::StepUnderflow { .. }) => {
                    let (x, ec) = self.chart_endpoint(&st.state);
                    return Ok(Segment::Done(Termination::StepUnderflow, x, ec));
                }
                Err(e) => return Err(e.into()),
            };
            self.steps_total += 1;
            let jets = st.last_jets();

            // Physical-time cap: s = s_base + tp(sigma).
            if let Some(cap) = self.stop.s_cap {
                let tp_end = st.state[3];
                if s_base + tp_end >= cap {
                    let mut g: Vec<T> = jets[3].clone();
                    g[0] -= cap - s_base;
                    if let Some(root) = first_poly_root(&g, T::zero(), h, root_tol) {
                        st.cut_last_step(root);
                    }
                    self.s_total = s_base + st.state[3];
                    let (x, ec) = self.chart_endpoint(&st.state);
                    self.push_sample(x, Chart::W1Theta);
                    return Ok(Segment::Done(Termination::SCap, x, ec));
                }
            }

            // Real-axis return: sin(theta) crosses zero.
            if self.stop.real_axis_return {
                let g: Vec<T> = jets[2].clone();
                let g_start = g[0];
                let g_end = jet::eval(&g, h);
                if self.armed
                    && !g_start.is_zero()
                    && ((g_start < T::zero()) != (g_end < T::zero()) || g_end.is_zero())
                {
                    if let Some(root) = first_poly_root(&g, T::zero(), h, root_tol) {
                        st.cut_last_step(root);
                        self.s_total = s_base + st.state[3];
                        let (x, ec) = self.chart_endpoint(&st.state);
                        self.push_sample(x, Chart::W1Theta);
                        let crossing = x.re;
                        return Ok(Segment::Done(
                            Termination::ReturnedToRealAxis { crossing },
                            x,
                            ec,
                        ));
                    }
                }
            }

            // Escape through w1 = escape threshold (cut exactly).
            if let Some(we) = self.stop.escape_w1 {
                if st.state[0] <= we {
                    let mut g: Vec<T> = jets[0].clone();
                    g[0] -= we;
                    if let Some(root) = first_poly_root(&g, T::zero(), h, root_tol) {
                        st.cut_last_step(root);
                    }
                    self.s_total = s_base + st.state[3];
                    let (x, ec) = self.chart_endpoint(&st.state);
                    self.push_sample(x, Chart::W1Theta);
                    return Ok(Segment::Done(Termination::Escaped, x, ec));
                }
            }

            // Renormalize E.
            let norm = (st.state[1] * st.state[1] + st.state[2] * st.state[2]).sqrt();
            st.state[1] /= norm;
            st.state[2] /= norm;

            self.s_total = s_base + st.state[3];
            let (x, _) = self.chart_endpoint(&st.state);
            self.push_sample(x, Chart::W1Theta);
            if let Some(term) = self.bump_caps(x) {
                let (xe, ec) = self.chart_endpoint(&st.state);
                return Ok(Segment::Done(term, xe, ec));
            }
            if st.state[0] >= w1_exit {
                return Ok(Segment::ToInterior(x));
            }
        }
    }

    fn chart_endpoint(&self, state: &[T]) -> (Cx<T>, Option<(T, Cx<T>)>) {
        let e = Cx::new(state[1], state[2]);
        (chart_to_interior(state[0], e), Some((state[0], e)))
    }

    fn push_sample(&mut self, x: Cx<T>, chart: Chart) {
        if self.record {
            self.samples.push(PathSample {
                s: self.s_total,
                x,
                chart,
            });
        }
    }
}

/// Integrates to the given physical time and returns the endpoint (used by
/// the symmetry property checks).
pub fn flow_endpoint<T: Scalar>(
    q: &PolyQ,
    cfg: &FlowConfig<T>,
    x0: Cx<T>,
    flow: FlowKind,
    dir: i8,
    s_target: T,
) -> Result<Cx<T>, FlowError> {
    let stop = StopRule::until_time(s_target);
    let path = trace_flow(q, cfg, x0, flow, dir, &stop, false)?;
    match path.termination {
        Termination::SCap => Ok(path.x_end),
        other => Err(FlowError::Classifier(format!(
            "expected to reach s = {}, stopped with {:?} at s = {}",
            s_target.to_f64(),
            other,
            path.s_end.to_f64()
        ))),
    }
}

/// Re-integration residual of a recorded path: integrates between
/// consecutive samples (every `stride`-th pair) and returns the largest
/// endpoint deviation, scaled by the local magnitude.  Verifies that the
/// samples satisfy the flow to the integrator's local tolerance.
pub fn verify_path<T: Scalar>(
    q: &PolyQ,
    cfg: &FlowConfig<T>,
    path: &PhasePath<T>,
    stride: usize,
) -> Result<T, FlowError> {
    let mut worst = T::zero();
    let stride = stride.max(1);
    let mut k = 0;
    while k + stride < path.samples.len() {
        let a = &path.samples[k];
        let b = &path.samples[k + stride];
        let ds = b.s - a.s;
        if ds > T::zero() {
            let end = flow_endpoint(q, cfg, a.x, path.flow, path.dir, ds)?;
            let scale = T::one().maximum(b.x.abs());
            worst = worst.maximum((end - b.x).abs() / scale);
        }
        k += stride;
    }
    Ok(worst)
}
