//! End-to-end splitting pipeline: locate the section point, sweep an eps
//! grid, fit the law, and check an off-grid measurement against the fitted
//! model within a factor 3 (the magnitude law in action).

use expsplit::cflow::{locate_pj, FlowConfig};
use expsplit::split::{measure_splitting, sweep_and_fit, MeasureOpts, SweepOpts};
use expsplit::{PolyQ, Rdd, Rqd, Scalar};

#[test]
fn michelsen_magnitude_law_factor_three() {
    let q = PolyQ::parse("-f^2 + 1").unwrap();
    let rs_d = q.real_roots::<Rdd>();
    let cfg = FlowConfig::from_roots(&rs_d.roots, Rdd::from_f64(1e-22));
    let sep = locate_pj(&q, &rs_d, 1, Rdd::from_f64(1e-14), &cfg).unwrap();
    let pj = Rqd::from_f64(sep.pj.to_f64());
    let rs = q.real_roots::<Rqd>();

    let grid = expsplit::split::log_grid::<Rqd>(0.07, 0.12, 6);
    let opts = SweepOpts::<Rqd>::default();
    let (report, _records) = sweep_and_fit(&q, &rs, pj, 1, &grid, &opts).unwrap();
    assert!(report.converged);
    let rel = (report.fitted_t - report.reference_t).abs() / report.reference_t;
    assert!(rel < 0.05, "fitted T off by {rel:e} on the coarse grid");

    // Off-grid measurement at eps = 0.1 versus the fitted model:
    // |d| ~ eps^-3 e^(-pi/(2 eps)) C within a factor 3 (model evaluated with
    // the fitted parameters).
    let mut mopts = MeasureOpts::<Rqd>::default();
    mopts.richardson = false;
    let eps = Rqd::from_f64(0.1);
    let rec = measure_splitting(&q, &rs, pj, eps, 1, &mopts).unwrap();
    let measured = rec.abs().ln().to_f64();
    let e = 0.1f64;
    let model = report.intercept_ln_c + report.prefactor_exponent * e.ln() - report.fitted_t / e;
    let factor = (measured - model).exp();
    assert!(
        (1.0 / 3.0..3.0).contains(&factor),
        "measured/model = {factor} at eps = 0.1"
    );
    assert!(rec.abs() > Rqd::ZERO, "splitting is nonzero and finite");
}

#[test]
fn quartic_middle_connection_law() {
    // Q = -f^4 + 5 f^2 - 4 has roots -2, -1, 1, 2; the middle connection
    // (j = 2) is symmetric with p^2 = 0 and T^2 = pi/12, and pairs an
    // unstable-side equilibrium (j even) with a stable one.
    let q = PolyQ::parse("-f^4 + 5 f^2 - 4").unwrap();
    let rs_d = q.real_roots::<Rdd>();
    let cfg = FlowConfig::from_roots(&rs_d.roots, Rdd::from_f64(1e-22));
    let sep = locate_pj(&q, &rs_d, 2, Rdd::from_f64(1e-12), &cfg).unwrap();
    assert!(sep.pj.abs().to_f64() < 1e-11, "p^2 = {}", sep.pj.to_f64());
    let rs = q.real_roots::<Rqd>();
    let t2 = rs.blowup_time_formula(2).unwrap();
    let pi_12 = <Rqd as Scalar>::pi() / Rqd::from_f64(12.0);
    assert!((t2 - pi_12).abs().to_f64() < 1e-55);
    let rel = ((sep.tj_integrated - Rdd::from_f64(t2.to_f64())) / Rdd::from_f64(t2.to_f64()))
        .abs()
        .to_f64();
    assert!(rel < 1e-8, "integrated vs formula {rel:e}");

    // One splitting measurement on the middle section; kappa = 4 puts the
    // exponent variable at eps^-3.
    let mut opts = MeasureOpts::<Rqd>::default();
    opts.seed_delta = Rqd::from_f64(1e-10);
    let eps = Rqd::from_f64(0.33);
    let pj = Rqd::from_f64(sep.pj.to_f64());
    let rec = measure_splitting(&q, &rs, pj, eps, 2, &opts).unwrap();
    assert!(rec.abs() > Rqd::ZERO);
    assert!(rec.richardson_rel.unwrap() < 1e-3);
    assert!(rec.section_residual.to_f64() < 1e-20);
    // Magnitude against the law with the known T^2: the implied ln C must be
    // order one (the correction is absorbed in the broad band).
    let u = eps.recip().powi(3);
    let lnc = rec.abs().ln().to_f64() + 6.0 * eps.ln().to_f64() + (pi_12 * u).to_f64();
    assert!(lnc.abs() < 6.0, "implied ln C = {lnc} out of the sane band");
}

#[test]
fn slow_manifold_graph_is_dynamically_invariant() {
    // Seed exactly on the N-truncated slow-manifold graph, integrate the
    // full system for two units of slow time, and measure the distance to
    // the graph at the endpoint in tilde coordinates; it must stay at the
    // truncation order eps^(N+1).
    use expsplit::series::slow_manifold_series;
    use expsplit::split::{nft_invert, nft_transform, FlowSystem, SlowFast};
    use expsplit::taylor::{StepControl, Stepper};

    let q = PolyQ::parse("-f^2 + 1").unwrap();
    let n = 6usize;
    let sms = slow_manifold_series(&q, n);
    let deviation = |eps_f: f64| -> f64 {
        let eps = Rqd::from_f64(eps_f);
        let x_t0 = Rqd::from_f64(-0.3);
        let (y_t0, z_t0) = sms.eval(x_t0, eps);
        let seed = nft_invert([x_t0, y_t0, z_t0], &q, eps).unwrap();
        let sys = FlowSystem::new(&q, eps);
        let mut ode = SlowFast::new(&sys, 1);
        let ctl = StepControl::with_tol(Rqd::from_f64(1e-45));
        let mut st = Stepper::new(&mut ode, seed.to_vec(), ctl);
        st.run_to(Rqd::from_f64(2.0) / sys.eta).unwrap();
        let tilde = nft_transform([st.state[0], st.state[1], st.state[2]], &q, eps);
        let (ym, zm) = sms.eval(tilde[0], eps);
        let dy = tilde[1] - ym;
        let dz = tilde[2] - zm;
        (dy * dy + dz * dz).sqrt().to_f64()
    };
    let d1 = deviation(0.05);
    let d2 = deviation(0.025);
    // The constant multiplying eps^(N+1) is the next series coefficient
    // evaluated along the path, which reaches ~1e4 here; what identifies
    // the graph as invariant is the halving order.
    assert!(d1 < 1e-4, "deviation {d1:e} unreasonably large");
    let order = (d1 / d2).log2();
    assert!(
        (order - (n as f64 + 1.0)).abs() < 0.7,
        "halving order {order} not ~ {} (d1 = {d1:e}, d2 = {d2:e})",
        n + 1
    );
}
