//! Seeded randomized property suites, shared between the CLI `selftest`
//! command and the acceptance tests.

use crate::cflow::{flow_endpoint, FlowConfig, FlowKind};
use crate::hiprec::{Cx, Qd, Scalar};
use crate::poly::PolyQ;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub elapsed_ms: u128,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random instance with prescribed simple real roots in `[-3, 3]`,
/// pairwise gaps at least `min_gap` (roots are dyadic so Q is exact).
pub fn random_instance(rng: &mut ChaCha8Rng, kappa: usize, min_gap: f64) -> PolyQ {
    let budget = 6.0 - min_gap * (kappa - 1) as f64;
    assert!(budget > 0.0, "kappa too large for the gap constraint");
    loop {
        let mut gaps = Vec::with_capacity(kappa - 1);
        let mut total = 0.0;
        for _ in 0..kappa - 1 {
            let g = min_gap + rng.gen_range(0.0..budget / (kappa - 1) as f64);
            gaps.push(g);
            total += g;
        }
        if total > 6.0 {
            continue;
        }
        let start = -3.0 + rng.gen_range(0.0..(6.0 - total));
        let mut pos = start;
        let mut roots = Vec::with_capacity(kappa);
        let snap = |x: f64| -> BigRational {
            BigRational::new(
                BigInt::from((x * 65536.0).round() as i64),
                BigInt::from(65536),
            )
        };
        roots.push(snap(pos));
        for g in gaps {
            pos += g;
            roots.push(snap(pos));
        }
        if let Ok(q) = PolyQ::from_roots(&roots) {
            return q;
        }
    }
}

/// Euler-Jacobi identity on random instances: `|sum 1/Q'(q^l)| <= 1e-30` in
/// qd, with the sign-alternation and positive-blowup-time side conditions.
pub fn euler_jacobi_suite(seed: u64, per_kappa: usize, kappas: &[usize]) -> SuiteResult {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut cases = 0;
    for &kappa in kappas {
        for i in 0..per_kappa {
            cases += 1;
            let q = random_instance(&mut rng, kappa, 0.2);
            let rs = q.real_roots::<Qd>();
            if !rs.valid {
                failures.push(format!(
                    "kappa={kappa} #{i}: prescribed roots flagged invalid"
                ));
                continue;
            }
            let full = match rs.inverse_dq_sum(kappa) {
                Ok(v) => v,
                Err(e) => {
                    failures.push(format!("kappa={kappa} #{i}: {e}"));
                    continue;
                }
            };
            if full.abs().to_f64() > 1e-30 {
                failures.push(format!(
                    "kappa={kappa} #{i}: Euler-Jacobi residual {:e} for {q}",
                    full.to_f64()
                ));
            }
            for (idx, dq) in rs.dq.iter().enumerate() {
                let want_neg = idx % 2 == 0;
                if (*dq < Qd::ZERO) != want_neg {
                    failures.push(format!("kappa={kappa} #{i}: sign alternation broken"));
                }
            }
            for j in 1..kappa {
                match rs.blowup_time_formula(j) {
                    Ok(t) if t > Qd::ZERO => {}
                    other => failures.push(format!(
                        "kappa={kappa} #{i}: T^{j} not positive ({other:?})"
                    )),
                }
            }
        }
    }
    SuiteResult {
        name: "euler_jacobi",
        cases,
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Homogeneity of the scaled polynomial: `P(r x, r e) = r^kappa P(x, e)`.
pub fn homogeneity_suite(seed: u64, cases: usize) -> SuiteResult {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b9);
    let mut failures = Vec::new();
    for i in 0..cases {
        let kappa = rng.gen_range(2..=6);
        let q = random_instance(&mut rng, kappa, 0.2);
        let x = Cx::<Qd>::from_f64s(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let e = Qd::from_f64(rng.gen_range(0.05..1.5));
        let r = Qd::from_f64(rng.gen_range(0.1..3.0));
        let lhs = q.p_scaled(x.scale(r), r * e, 0);
        let rhs = q.p_scaled(x, e, 0).scale(r.powi(kappa as i32));
        let scale = rhs.abs().maximum(Qd::from_f64(1e-30));
        let rel = ((lhs - rhs).abs() / scale).to_f64();
        if rel > 4.0 * <Qd as Scalar>::eps().to_f64() {
            failures.push(format!("#{i}: homogeneity gap {rel:e} for {q}"));
        }
    }
    SuiteResult {
        name: "p_homogeneity",
        cases,
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Conjugation symmetry of the real flow and reversal symmetry of the
/// imaginary flow on random instances and start points, at tolerance 1e-10.
pub fn symmetry_suite(seed: u64, paths_per_flow: usize) -> SuiteResult {
    type T = crate::Rdd;
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1ab1e);
    let mut failures = Vec::new();
    let mut cases = 0;
    let tol = 1e-10;
    for flow in [FlowKind::Real, FlowKind::Imaginary] {
        let mut done = 0;
        let mut attempts = 0;
        while done < paths_per_flow && attempts < paths_per_flow * 20 {
            attempts += 1;
            let kappa = rng.gen_range(2..=4);
            let q = random_instance(&mut rng, kappa, 0.25);
            let rs = q.real_roots::<T>();
            if !rs.valid {
                continue;
            }
            let cfg = FlowConfig::from_roots(&rs.roots, T::from_f64(1e-16));
            let s = T::from_f64(rng.gen_range(0.1..0.5));
            let (check, label): (bool, &str) = match flow {
                FlowKind::Real => {
                    // Endpoint from conj(x0) equals conj of endpoint from x0.
                    let x0 = Cx::<T>::from_f64s(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
                    let a = flow_endpoint(&q, &cfg, x0, flow, 1, s);
                    let b = flow_endpoint(&q, &cfg, x0.conj(), flow, 1, s);
                    match (a, b) {
                        (Ok(a), Ok(b)) => ((a.conj() - b).abs().to_f64() < tol, "conjugation"),
                        _ => continue, // start too close to finite-time blowup
                    }
                }
                FlowKind::Imaginary => {
                    // Forward from real x0 equals conjugate of backward.
                    let lo = rs.root(kappa).to_f64();
                    let hi = rs.root(1).to_f64();
                    let x0 = Cx::<T>::from_f64s(rng.gen_range(lo..hi), 0.0);
                    let a = flow_endpoint(&q, &cfg, x0, flow, 1, s);
                    let b = flow_endpoint(&q, &cfg, x0, flow, -1, s);
                    match (a, b) {
                        (Ok(a), Ok(b)) => ((a.conj() - b).abs().to_f64() < tol, "reversal"),
                        _ => continue,
                    }
                }
            };
            done += 1;
            cases += 1;
            if !check {
                failures.push(format!("{label} broken for {q} (case {done})"));
            }
        }
        if done < paths_per_flow {
            failures.push(format!(
                "only {done}/{paths_per_flow} usable paths for {flow:?}"
            ));
        }
    }
    SuiteResult {
        name: "flow_symmetries",
        cases,
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Renormalization and elementary-function identities on random values.
pub fn hiprec_suite(seed: u64, cases: usize) -> SuiteResult {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeedbeef);
    let mut failures = Vec::new();
    let eps = <Qd as Scalar>::eps().to_f64();
    for i in 0..cases {
        let a = Qd::from_f64(rng.gen_range(-1e3..1e3))
            + Qd::from_f64(rng.gen_range(-1.0..1.0)).mul_pow2(-rng.gen_range(1..150));
        let b = Qd::from_f64(rng.gen_range(-1e3..1e3)).recip();
        for (tag, v) in [("add", a + b), ("mul", a * b), ("div", a / b)] {
            let p = v.components();
            for w in p.windows(2) {
                if w[0] == 0.0 && w[1] != 0.0 {
                    failures.push(format!("#{i} {tag}: zero not terminal"));
                } else if w[0] != 0.0
                    && w[1] != 0.0
                    && w[1].abs() > w[0].abs() * 2f64.powi(-52) * 1.000001
                {
                    failures.push(format!("#{i} {tag}: overlapping components"));
                }
            }
        }
        let x = Qd::from_f64(rng.gen_range(-100.0..100.0));
        let p = <Qd as Scalar>::exp(x) * <Qd as Scalar>::exp(-x);
        let err = (p - Qd::ONE).abs().to_f64() / eps;
        if err > 8.0 {
            failures.push(format!(
                "#{i}: exp(x)exp(-x) off by {err} ulp at x={}",
                x.to_f64()
            ));
        }
    }
    SuiteResult {
        name: "hiprec_invariants",
        cases,
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Oracle agreement between the residue formula and direct integration on
/// random instances.
pub fn blowup_oracle_suite(seed: u64, per_kappa: usize, kappas: &[usize]) -> SuiteResult {
    type T = crate::Rdd;
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0ddba11);
    let mut failures = Vec::new();
    let mut cases = 0;
    for &kappa in kappas {
        for i in 0..per_kappa {
            let q = random_instance(&mut rng, kappa, 0.25);
            let rs = q.real_roots::<T>();
            if !rs.valid {
                failures.push(format!("kappa={kappa} #{i}: invalid roots"));
                continue;
            }
            let cfg = FlowConfig::from_roots(&rs.roots, T::from_f64(1e-22));
            for j in 1..kappa {
                cases += 1;
                match crate::cflow::locate_pj(&q, &rs, j, T::from_f64(1e-13), &cfg) {
                    Ok(sep) => {
                        let t_formula = rs.blowup_time_formula(j).unwrap();
                        let rel = ((sep.tj_integrated - t_formula) / t_formula).abs().to_f64();
                        if rel > 1e-8 {
                            failures.push(format!(
                                "kappa={kappa} #{i} j={j}: |integrated - formula|/T = {rel:e} for {q}"
                            ));
                        }
                        if !(sep.pj > rs.root(j + 1) && sep.pj < rs.root(j)) {
                            failures.push(format!("kappa={kappa} #{i} j={j}: p^j outside bracket"));
                        }
                    }
                    Err(e) => failures.push(format!("kappa={kappa} #{i} j={j}: {e} for {q}")),
                }
            }
        }
    }
    SuiteResult {
        name: "blowup_time_oracle",
        cases,
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Runs every suite with sizes suitable for the CLI.
pub fn run_all(seed: u64, quick: bool) -> Vec<SuiteResult> {
    let n = if quick { 10 } else { 100 };
    vec![
        hiprec_suite(seed, if quick { 40 } else { 300 }),
        euler_jacobi_suite(seed, n, &[2, 3, 4, 5, 6, 7, 8]),
        homogeneity_suite(seed, if quick { 20 } else { 100 }),
        symmetry_suite(seed, if quick { 5 } else { 20 }),
        blowup_oracle_suite(seed, if quick { 1 } else { 2 }, &[2, 3, 4]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        let euler = euler_jacobi_suite(7, 4, &[2, 3, 5]);
        assert!(euler.passed(), "{:?}", euler.failures);
        let homo = homogeneity_suite(7, 10);
        assert!(homo.passed(), "{:?}", homo.failures);
        let sym = symmetry_suite(7, 3);
        assert!(sym.passed(), "{:?}", sym.failures);
        let hp = hiprec_suite(7, 20);
        assert!(hp.passed(), "{:?}", hp.failures);
    }

    #[test]
    fn random_instances_have_gaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let q = random_instance(&mut rng, 6, 0.2);
            let rs = q.real_roots::<crate::Rdd>();
            assert!(rs.valid);
            for w in rs.roots.windows(2) {
                assert!((w[0] - w[1]).to_f64() >= 0.199);
            }
        }
    }

    #[test]
    fn polynomial_text_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let kappa = rng.gen_range(2..=7);
            let q = random_instance(&mut rng, kappa, 0.2);
            let back = PolyQ::parse(&q.to_text()).unwrap();
            assert_eq!(q, back, "text {}", q.to_text());
        }
    }
}
