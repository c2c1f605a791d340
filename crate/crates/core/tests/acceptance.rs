//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see the PASS
//! lines; failures always show their line).
//!
//! Criteria 3 and 5 are asserted exactly as stated even where the true
//! mathematical objects sit outside the stated bands; see the printed
//! evidence on failure.

use expsplit::cflow::{locate_pj, FlowConfig};
use expsplit::hiprec::Scalar;
use expsplit::selftest::{blowup_oracle_suite, euler_jacobi_suite, symmetry_suite};
use expsplit::series::{gevrey_diagnostic, phi_coefficients, slow_manifold_series};
use expsplit::split::{
    equilibrium, invariance_residual, measure_splitting, sweep_and_fit, FlowSystem, MeasureOpts,
    MeasureStatus, SweepOpts,
};
use expsplit::{Cx, PolyQ, Rdd, Rqd};

fn verdict(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn michelsen() -> PolyQ {
    PolyQ::parse("-f^2 + 1").unwrap()
}

fn cubic() -> PolyQ {
    PolyQ::parse("-f^3 + f").unwrap()
}

fn pj_dd(q: &PolyQ, j: usize, tol: f64) -> (Rdd, Rdd, usize) {
    let rs = q.real_roots::<Rdd>();
    let cfg = FlowConfig::from_roots(&rs.roots, Rdd::from_f64(1e-22));
    let sep = locate_pj(q, &rs, j, Rdd::from_f64(tol), &cfg).unwrap();
    (sep.pj, sep.tj_integrated, sep.tail_terms_used)
}

#[test]
fn criterion_1_euler_jacobi() {
    // 100 random instances per kappa in 2..8, roots in [-3,3], min gap 0.2,
    // |sum 1/Q'(q^l)| <= 1e-30 in qd.  Runtime < 10 s.
    let t0 = std::time::Instant::now();
    let res = euler_jacobi_suite(0xacce97, 100, &[2, 3, 4, 5, 6, 7, 8]);
    let within_time = t0.elapsed().as_secs_f64() < 10.0;
    let pass = verdict(
        "1 (Euler-Jacobi identity)",
        res.passed() && within_time,
        &format!(
            "{} instances, residual bound 1e-30, {} failures, {:.2} s",
            res.cases,
            res.failures.len(),
            t0.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "{:?}", res.failures);
}

#[test]
fn criterion_2_blowup_time_oracle_triangle() {
    // Michelsen: T^1 = pi/2 with formula-integration relative difference
    // <= 1e-8 and p^1 = 0 within 1e-12; cubic: T^1, T^2 = pi/2; plus 3
    // random instances per kappa in 2..5.  Runtime < 2 min.
    let t0 = std::time::Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();

    let q = michelsen();
    let rs = q.real_roots::<Rdd>();
    let (p1, t1_int, _) = pj_dd(&q, 1, 1e-13);
    let t1_formula = rs.blowup_time_formula(1).unwrap();
    let half_pi = <Rdd as Scalar>::pi().mul_pow2(-1);
    let rel = ((t1_int - t1_formula) / t1_formula).abs().to_f64();
    if p1.abs().to_f64() > 1e-12 {
        ok = false;
        notes.push(format!("p1 = {:e}", p1.to_f64()));
    }
    if rel > 1e-8 || (t1_formula - half_pi).abs().to_f64() > 1e-25 {
        ok = false;
        notes.push(format!("michelsen T1 rel {rel:e}"));
    }

    let qc = cubic();
    let rsc = qc.real_roots::<Rdd>();
    for j in [1usize, 2] {
        let (_, tj_int, _) = pj_dd(&qc, j, 1e-13);
        let tf = rsc.blowup_time_formula(j).unwrap();
        let rel = ((tj_int - tf) / tf).abs().to_f64();
        if rel > 1e-8 || (tf - half_pi).abs().to_f64() > 1e-25 {
            ok = false;
            notes.push(format!("cubic j={j} rel {rel:e}"));
        }
    }

    let suite = blowup_oracle_suite(0xacce97, 3, &[2, 3, 4, 5]);
    if !suite.passed() {
        ok = false;
        notes.push(format!("{:?}", suite.failures));
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs > 120.0 {
        ok = false;
        notes.push(format!("runtime {secs:.1} s over budget"));
    }
    let pass = verdict(
        "2 (blowup-time oracle triangle)",
        ok,
        &format!(
            "michelsen p1 = {:.2e}, T rel diff {:.2e}; {} random instances; {:.1} s",
            p1.to_f64(),
            rel,
            suite.cases,
            secs
        ),
    );
    assert!(pass, "{notes:?}");
}

#[test]
fn criterion_3_inner_series_growth() {
    // phi_alpha to alpha = 80 exactly; least-squares slope of
    // log|phi_a|^(1/a) vs log a over [40, 80] in [0.9, 1.1] for each kappa;
    // first kappa=2 coefficients match the symbolic oracle exactly.
    // Runtime < 5 min.
    let t0 = std::time::Instant::now();
    let sp2 = phi_coefficients(2, 80);
    use num_traits::{One, Zero};
    let exact_ok = sp2.y[0] == -num_rational::BigRational::one()
        && sp2.z[0].is_zero()
        && sp2.y[1].is_zero()
        && sp2.z[1] == num_rational::BigRational::from_integer(2.into());

    let mut slopes = Vec::new();
    let mut band_ok = true;
    for kappa in 2..=8 {
        let sp = phi_coefficients(kappa, 80);
        let rep = gevrey_diagnostic(&sp, 40, 80).unwrap();
        if !(0.9..=1.1).contains(&rep.slope) {
            band_ok = false;
        }
        slopes.push(format!("k={kappa}: {:.4}", rep.slope));
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = verdict(
        "3 (inner-series Gevrey slope)",
        exact_ok && band_ok && secs < 300.0,
        &format!(
            "slopes over [40,80]: {}; k=2 head coefficients exact: {exact_ok}; {:.1} s",
            slopes.join(", "),
            secs
        ),
    );
    if !pass {
        // Evidence: the coefficients are certified by an independent
        // symbolic-substitution oracle (see the series module tests); the
        // growth is cleanly Gevrey-1 and the log-log slope approaches 1
        // from below only logarithmically -- it sits below 0.9 for small
        // kappa on the [40, 80] window.
        let sp = phi_coefficients(2, 200);
        let rep = gevrey_diagnostic(&sp, 120, 200).unwrap();
        println!(
            "criterion 3 evidence: kappa=2 slope over [120,200] = {:.4} (r^2 = {:.6}); \
             the [0.9, 1.1] band is unattainable at [40, 80] for kappa <= 4 \
             with the true inner series",
            rep.slope, rep.r_squared
        );
    }
    assert!(pass);
}

#[test]
fn criterion_4_slow_manifold_residual_order() {
    // kappa = 2, N in {4, 6}: invariance-equation residual at x~ = 0.3
    // scales as eps^(N+1), log-log slope within +-0.2, at
    // eps in {1e-2, 1e-2.5, 1e-3}.  Runtime < 1 min.
    let t0 = std::time::Instant::now();
    let q = michelsen();
    let eps_list = [1e-2, 10f64.powf(-2.5), 1e-3];
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [4usize, 6] {
        let sms = slow_manifold_series(&q, n);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &e in &eps_list {
            let (ry, rz) =
                invariance_residual(&sms, &q, Rqd::from_f64(0.3), Rqd::from_f64(e)).unwrap();
            let norm = (ry * ry + rz * rz).sqrt().to_f64();
            xs.push(e.ln());
            ys.push(norm.ln());
        }
        let (slope, _, _) = expsplit::series::least_squares_xy(&xs, &ys);
        notes.push(format!("N={n}: slope {:.3}", slope));
        if (slope - (n as f64 + 1.0)).abs() > 0.2 {
            ok = false;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = verdict(
        "4 (slow-manifold residual order)",
        ok && secs < 60.0,
        &format!("{}; {:.1} s", notes.join("; "), secs),
    );
    assert!(pass);
}

#[test]
fn criterion_5_splitting_law_kappa2() {
    // 8 log-spaced eps in [0.04, 0.12]: fitted T within 2% of pi/2; fitted
    // prefactor exponent within 0.5 of -3; implied C stable within 20%
    // across the two densest points.  Runtime < 20 min in qd with 4 workers.
    let t0 = std::time::Instant::now();
    let q = michelsen();
    let rs = q.real_roots::<Rqd>();
    let (pj, _, _) = pj_dd(&q, 1, 1e-14);
    let pj = Rqd::from_f64(pj.to_f64());
    let grid = expsplit::split::log_grid::<Rqd>(0.04, 0.12, 8);
    let mut opts = SweepOpts::<Rqd>::default();
    opts.workers = Some(4);
    let (report, records) = sweep_and_fit(&q, &rs, pj, 1, &grid, &opts).unwrap();

    let t_rel = (report.fitted_t - report.reference_t).abs() / report.reference_t;
    let t_ok = t_rel <= 0.02;
    let exp_ok = (report.prefactor_exponent + 3.0).abs() <= 0.5;
    // Implied C at the two densest (smallest-eps) grid points.
    let c0 = report.points[0].implied_ln_c;
    let c1 = report.points[1].implied_ln_c;
    let c_gap = (c0 - c1).exp() - 1.0;
    let c_ok = c_gap.abs() <= 0.2;
    let all_ok = records.iter().all(|r| r.status == MeasureStatus::Ok);
    let secs = t0.elapsed().as_secs_f64();
    let pass = verdict(
        "5 (splitting law, kappa = 2)",
        t_ok && exp_ok && c_ok && all_ok && secs < 1200.0,
        &format!(
            "fitted T = {:.6} (rel diff {:.2e} vs pi/2: {}), exponent = {:.3} \
             (band -3 +- 0.5: {}), implied-C gap {:.1}% ({}), {:.1} s",
            report.fitted_t,
            t_rel,
            if t_ok { "ok" } else { "out" },
            report.prefactor_exponent,
            if exp_ok { "ok" } else { "out" },
            100.0 * c_gap.abs(),
            if c_ok { "ok" } else { "out" },
            secs
        ),
    );
    if !exp_ok {
        // Evidence that the measurements (not the law) carry the gap: at the
        // theoretical exponent -3 and T = pi/2 the per-point implied ln C is
        // affinely linear in eps (prefactor correction C (1 + a eps)); the
        // free-exponent regression absorbs that trend on this grid.
        let tref = report.reference_t;
        let mut line = String::new();
        for r in &records {
            let e = r.eps.to_f64();
            let lnc = r.abs().ln().to_f64() + 3.0 * e.ln() + tref / e;
            line.push_str(&format!("({e:.3}, {lnc:.4}) "));
        }
        println!("criterion 5 evidence: implied ln C at (T = pi/2, exponent -3): {line}");
    }
    assert!(pass);
}

#[test]
fn criterion_6_splitting_law_kappa3() {
    // 6 eps points in [0.18, 0.30] (exponent variable eps^-2): fitted T
    // within 2% of pi/2 for j = 1; j = 2 magnitudes match j = 1 to relative
    // 1e-6 by the odd symmetry.  Runtime < 30 min.
    let t0 = std::time::Instant::now();
    let q = cubic();
    let rs = q.real_roots::<Rqd>();
    let grid = expsplit::split::log_grid::<Rqd>(0.18, 0.30, 6);
    let (p1, _, _) = pj_dd(&q, 1, 1e-14);
    let (p2, _, _) = pj_dd(&q, 2, 1e-14);
    let p1 = Rqd::from_f64(p1.to_f64());
    let p2 = Rqd::from_f64(p2.to_f64());
    let mut opts = SweepOpts::<Rqd>::default();
    opts.workers = Some(4);
    // The kappa = 3 magnitudes reach 1e-18 at the dense end; the default
    // seed 1e-8 leaves its curvature error just above the 1e-3 invariance
    // there, so these sweeps seed at 1e-10 (the Richardson check verifies).
    opts.measure.seed_delta = Rqd::from_f64(1e-10);
    let (rep1, rec1) = sweep_and_fit(&q, &rs, p1, 1, &grid, &opts).unwrap();
    let (_rep2, rec2) = sweep_and_fit(&q, &rs, p2, 2, &grid, &opts).unwrap();

    let t_rel = (rep1.fitted_t - rep1.reference_t).abs() / rep1.reference_t;
    let t_ok = t_rel <= 0.02;
    let mut sym_gap: f64 = 0.0;
    for (a, b) in rec1.iter().zip(&rec2) {
        let rel = ((a.abs() - b.abs()) / a.abs()).abs().to_f64();
        sym_gap = sym_gap.max(rel);
    }
    let sym_ok = sym_gap <= 1e-6;
    let all_ok = rec1
        .iter()
        .chain(&rec2)
        .all(|r| r.status == MeasureStatus::Ok);
    let secs = t0.elapsed().as_secs_f64();
    let pass = verdict(
        "6 (splitting law, kappa = 3)",
        t_ok && sym_ok && all_ok && secs < 1800.0,
        &format!(
            "fitted T = {:.6} (rel diff {:.2e}), j=1 vs j=2 magnitude gap {:.2e}, {:.1} s",
            rep1.fitted_t, t_rel, sym_gap, secs
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_measurement_robustness() {
    // Every record of the criterion 5/6 grids passes seed-halving and
    // tolerance-tightening invariance at relative 1e-3; the eigenvalue
    // expansions hold with bounded constants over eps, eps/2, eps/4.
    let t0 = std::time::Instant::now();
    let mut ok = true;
    let mut worst_seed: f64 = 0.0;
    let mut worst_tol: f64 = 0.0;

    let cases: Vec<(PolyQ, usize, Vec<Rqd>)> = vec![
        (michelsen(), 1, expsplit::split::log_grid(0.04, 0.12, 8)),
        (cubic(), 1, expsplit::split::log_grid(0.18, 0.30, 6)),
        (cubic(), 2, expsplit::split::log_grid(0.18, 0.30, 6)),
    ];
    for (q, j, grid) in &cases {
        let rs = q.real_roots::<Rqd>();
        let (pj, _, _) = pj_dd(q, *j, 1e-14);
        let pj = Rqd::from_f64(pj.to_f64());
        for &eps in grid {
            // Default opts except the seed, which matches the criterion 5/6
            // sweeps (1e-8 for kappa = 2, 1e-10 for kappa = 3).
            let mut opts = MeasureOpts::<Rqd>::default();
            if q.kappa() == 3 {
                opts.seed_delta = Rqd::from_f64(1e-10);
            }
            let rec = measure_splitting(q, &rs, pj, eps, *j, &opts).unwrap();
            let rich = rec.richardson_rel.unwrap();
            worst_seed = worst_seed.max(rich);
            if rich > 1e-3 || rec.status != MeasureStatus::Ok {
                ok = false;
            }
            // Tolerance tightening by 10.
            let mut tight = opts.clone();
            tight.richardson = false;
            tight.tol = opts.tol * Rqd::from_f64(0.1);
            let rec_t = measure_splitting(q, &rs, pj, eps, *j, &tight).unwrap();
            let dy = rec.dy - rec_t.dy;
            let dz = rec.dz - rec_t.dz;
            let rel = ((dy * dy + dz * dz).sqrt() / rec.abs()).to_f64();
            worst_tol = worst_tol.max(rel);
            if rel > 1e-3 {
                ok = false;
            }
        }
    }

    // Eigenvalue expansions over halving eps with bounded constants.
    let mut eig_note = String::new();
    for (q, base_eps) in [(michelsen(), 0.1f64), (cubic(), 0.3)] {
        let rs = q.real_roots::<Rqd>();
        for j in 1..=q.kappa() {
            let mut consts = Vec::new();
            for k in 0..3 {
                let eps = Rqd::from_f64(base_eps / 2f64.powi(k));
                let sys = FlowSystem::new(&q, eps);
                let eq = equilibrium(&sys, &rs, j).unwrap();
                let lead = sys.eta * rs.dq_at(j);
                let c1 = ((eq.lambda1 - lead).abs() / (sys.eta * sys.eta)).to_f64();
                let c23 = ((eq.lambda23 - Cx::i() + Cx::from_re(lead.mul_pow2(-1))).abs()
                    / (sys.eta * sys.eta))
                    .to_f64();
                consts.push(c1.max(c23));
            }
            let bound = consts.iter().fold(0.0f64, |a, &b| a.max(b));
            if bound > 20.0 {
                ok = false;
                eig_note = format!("unbounded eigen constant {bound} for {q} j={j}");
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = verdict(
        "7 (measurement robustness)",
        ok,
        &format!(
            "worst seed-halving {:.1e}, worst tol-tightening {:.1e}, eigen constants bounded; {:.1} s {}",
            worst_seed, worst_tol, secs, eig_note
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_flow_symmetries() {
    // Real-flow conjugation and imaginary-flow reversal on 20 random paths
    // per flow at tolerance 1e-10.
    let t0 = std::time::Instant::now();
    let res = symmetry_suite(0xacce98, 20);
    let pass = verdict(
        "8 (flow symmetry properties)",
        res.passed(),
        &format!(
            "{} paths checked at 1e-10, {} failures, {:.1} s",
            res.cases,
            res.failures.len(),
            t0.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "{:?}", res.failures);
}
