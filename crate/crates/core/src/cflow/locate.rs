//! Separatrix crossing points `p^j` by bisection on the imaginary-time flow,
//! and blowup times `T^j` by direct integration with an asymptotic tail.

use super::flows::{trace_flow, FlowConfig, FlowKind, PhasePath, StopRule, Termination};
use super::FlowError;
use crate::hiprec::{Cx, Scalar};
use crate::poly::{PolyQ, RootSet};

#[derive(Debug, Clone)]
pub struct SeparatrixResult<T> {
    pub j: usize,
    pub pj: T,
    pub tj_integrated: T,
    /// Forward half of the heteroclinic from `pj` up to escape.
    pub path: PhasePath<T>,
    pub bisection_width: T,
    pub tail_terms_used: usize,
}

impl<T: Scalar> SeparatrixResult<T> {
    /// Recomputes the blowup time of this separatrix with explicit escape
    /// radius and tail tolerance (the stored value used the defaults).
    pub fn blowup_time_integrated(
        &self,
        q: &PolyQ,
        cfg: &FlowConfig<T>,
        r_esc: T,
        tail_tol: T,
    ) -> Result<T, FlowError> {
        blowup_time_integrated(q, self.pj, cfg, r_esc, tail_tol).map(|(t, _)| t)
    }
}

/// Classifies one start point: did the orbit return left or right of it?
fn classify<T: Scalar>(
    q: &PolyQ,
    cfg: &FlowConfig<T>,
    p: T,
) -> Result<std::cmp::Ordering, FlowError> {
    let mut stop = StopRule::none();
    stop.real_axis_return = true;
    let path = trace_flow(q, cfg, Cx::from_re(p), FlowKind::Imaginary, 1, &stop, false)?;
    match path.termination {
        Termination::ReturnedToRealAxis { crossing } => {
            if crossing > p {
                // Orbit encircles the right-hand center: separatrix is left.
                Ok(std::cmp::Ordering::Greater)
            } else {
                Ok(std::cmp::Ordering::Less)
            }
        }
        other => Err(FlowError::Classifier(format!(
            "orbit from {} neither returned nor resolved ({other:?} after s = {})",
            p.to_f64(),
            path.s_end.to_f64()
        ))),
    }
}

/// Locates `p^j`, the real-axis crossing of the imaginary-time heteroclinic,
/// inside `(q^(j+1), q^j)`.
///
/// Bisection invariant: the orbit of `x' = iQ(x)` through a real point left
/// of `p^j` is periodic around `q^(j+1)` and first returns to the axis left
/// of the start; right of `p^j` it encircles `q^j` and returns to the right.
pub fn locate_pj<T: Scalar>(
    q: &PolyQ,
    rs: &RootSet<T>,
    j: usize,
    tol: T,
    cfg: &FlowConfig<T>,
) -> Result<SeparatrixResult<T>, FlowError> {
    if !rs.valid {
        return Err(FlowError::NeedValidRoots);
    }
    assert!(j >= 1 && j < rs.kappa(), "j in 1..kappa");
    let (right, left) = (rs.root(j), rs.root(j + 1));
    let span = right - left;
    let margin = span * T::from_f64(1e-12);
    let mut lo = left + margin;
    let mut hi = right - margin;
    let mut width = hi - lo;
    // Slightly asymmetric split: an exact midpoint would land dead on the
    // separatrix for symmetric instances (p^1 = 0 for the Michelsen case),
    // where the orbit stalls at the saddle and classifies as neither side.
    let ratio = T::from_f64(0.49611);
    while width > tol {
        let mid = lo + width * ratio;
        match classify(q, cfg, mid)? {
            std::cmp::Ordering::Greater => hi = mid,
            _ => lo = mid,
        }
        width = hi - lo;
    }
    let pj = (lo + hi).mul_pow2(-1);

    // Forward half of the heteroclinic, traced until escape.
    let mut stop = StopRule::none();
    stop.escape_w1 = Some(cfg.r_esc.recip());
    let path = trace_flow(q, cfg, Cx::from_re(pj), FlowKind::Imaginary, 1, &stop, true)?;
    if path.termination != Termination::Escaped {
        return Err(FlowError::Classifier(format!(
            "heteroclinic trace from p^{j} = {} did not escape ({:?})",
            pj.to_f64(),
            path.termination
        )));
    }

    let (tj, terms) = blowup_time_integrated(q, pj, cfg, cfg.r_esc, default_tail_tol::<T>())?;
    Ok(SeparatrixResult {
        j,
        pj,
        tj_integrated: tj,
        path,
        bisection_width: width,
        tail_terms_used: terms,
    })
}

fn default_tail_tol<T: Scalar>() -> T {
    T::eps().maximum(T::from_f64(1e-14))
}

/// Accumulated escape time to `|x| = r_esc` plus the term-by-term integral
/// of `1/Q(x) = -x^(-kappa)(c_0 + c_1/x + ...)` along the escape direction.
///
/// At most 12 tail terms are used; if they do not reach `tail_tol` the
/// escape radius is doubled (up to 4 times).  The result is verified stable
/// under doubling the radius to relative 1e-8.
pub fn blowup_time_integrated<T: Scalar>(
    q: &PolyQ,
    pj: T,
    cfg: &FlowConfig<T>,
    r_esc: T,
    tail_tol: T,
) -> Result<(T, usize), FlowError> {
    let mut radius = r_esc;
    let mut last_rel = f64::INFINITY;
    for _ in 0..=4 {
        match escape_time(q, pj, cfg, radius, tail_tol)? {
            TailOutcome::Converged { total, terms } => {
                // Stability under doubling the radius.
                if let TailOutcome::Converged { total: total2, .. } =
                    escape_time(q, pj, cfg, radius.mul_pow2(1), tail_tol)?
                {
                    let drift = ((total - total2) / total).abs().to_f64();
                    if drift > 1e-8 {
                        return Err(FlowError::TailUnstable(drift));
                    }
                    return Ok((total, terms));
                }
                return Ok((total, terms));
            }
            TailOutcome::NotConverged { last } => {
                last_rel = last;
                radius = radius.mul_pow2(1);
            }
        }
    }
    Err(FlowError::TailDivergence {
        r_esc: radius.to_f64(),
        last: last_rel,
    })
}

enum TailOutcome<T> {
    Converged { total: T, terms: usize },
    NotConverged { last: f64 },
}

fn escape_time<T: Scalar>(
    q: &PolyQ,
    pj: T,
    cfg: &FlowConfig<T>,
    radius: T,
    tail_tol: T,
) -> Result<TailOutcome<T>, FlowError> {
    let mut stop = StopRule::none();
    stop.escape_w1 = Some(radius.recip());
    let path = trace_flow(
        q,
        cfg,
        Cx::from_re(pj),
        FlowKind::Imaginary,
        1,
        &stop,
        false,
    )?;
    let (w1, e) = match (&path.termination, path.end_chart) {
        (Termination::Escaped, Some(chart)) => chart,
        (term, _) => {
            return Err(FlowError::Classifier(format!(
                "escape trace stopped with {term:?}"
            )))
        }
    };
    let x_esc = e.scale(w1.recip());
    let s1 = path.s_end;

    // 1/Q = -x^(-kappa) sum c_m x^(-m) with c = 1/(1 - sum a_alpha v^(kappa-alpha)).
    let kappa = q.kappa();
    let mut d = [T::zero(); 13];
    d[0] = T::one();
    for (alpha, a) in q.coeffs().iter().enumerate() {
        let m = kappa - alpha;
        if m < d.len() {
            d[m] = -T::from_rational(a);
        }
    }
    let mut c = [T::zero(); 13];
    c[0] = T::one();
    for m in 1..13 {
        let mut acc = T::zero();
        for i in 1..=m {
            acc += d[i] * c[m - i];
        }
        c[m] = -acc;
    }

    // remaining = i * sum_m c_m x^(1-kappa-m) / (kappa+m-1)
    let xinv = x_esc.recip();
    let mut pw = xinv.powi(kappa as i32 - 1);
    let mut acc = Cx::<T>::zero();
    let mut terms = 0usize;
    let mut converged = false;
    let mut last_rel = f64::INFINITY;
    let mut small_streak = 0;
    for (m, cm) in c.iter().enumerate().take(12) {
        let term = pw.scale(*cm * T::from_i64((kappa + m - 1) as i64).recip());
        acc += term;
        terms = m + 1;
        let scale = s1.abs().maximum(acc.abs());
        last_rel = (term.abs() / scale).to_f64();
        if term.abs() <= tail_tol * scale {
            // Sparse polynomials have exactly-zero terms; require two small
            // terms in a row before trusting the truncation.
            small_streak += 1;
            if small_streak >= 2 {
                converged = true;
                break;
            }
        } else {
            small_streak = 0;
        }
        pw *= xinv;
    }
    if !converged {
        return Ok(TailOutcome::NotConverged { last: last_rel });
    }
    let tail = Cx::i() * acc;
    let total = s1 + tail.re;
    // The remaining time is real by construction; a large imaginary part
    // means the truncation is lying.
    if tail.im.abs() > tail_tol * total.abs() * T::from_f64(100.0) + T::from_f64(1e-10) {
        return Ok(TailOutcome::NotConverged {
            last: (tail.im.abs() / total.abs()).to_f64(),
        });
    }
    Ok(TailOutcome::Converged { total, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hiprec::Dd;

    fn setup(text: &str, tol: f64) -> (PolyQ, RootSet<Dd>, FlowConfig<Dd>) {
        let q = PolyQ::parse(text).unwrap();
        let rs = q.real_roots::<Dd>();
        let cfg = FlowConfig::from_roots(&rs.roots, Dd::from_f64(tol));
        (q, rs, cfg)
    }

    #[test]
    fn michelsen_p1_is_zero() {
        let (q, rs, cfg) = setup("-f^2 + 1", 1e-22);
        let res = locate_pj(&q, &rs, 1, Dd::from_f64(1e-13), &cfg).unwrap();
        assert!(
            res.pj.abs().to_f64() < 1e-12,
            "p1 = {} not 0",
            res.pj.to_f64()
        );
        assert!(res.bisection_width.to_f64() <= 1e-13);
        let half_pi = <Dd as Scalar>::pi().mul_pow2(-1);
        let rel = ((res.tj_integrated - half_pi) / half_pi).abs().to_f64();
        assert!(rel < 1e-8, "T1 relative error {rel:e}");
        assert!(res.tj_integrated > Dd::ZERO);
        // q^2 < p^1 < q^1
        assert!(res.pj > rs.root(2) && res.pj < rs.root(1));
    }

    #[test]
    fn cubic_p2_is_minus_p1_and_times_match_formula() {
        let (q, rs, cfg) = setup("-f^3 + f", 1e-22);
        let r1 = locate_pj(&q, &rs, 1, Dd::from_f64(1e-12), &cfg).unwrap();
        let r2 = locate_pj(&q, &rs, 2, Dd::from_f64(1e-12), &cfg).unwrap();
        assert!(r1.pj.to_f64() > 0.0 && r1.pj.to_f64() < 1.0);
        assert!(
            (r1.pj + r2.pj).abs().to_f64() < 1e-11,
            "odd symmetry: p1 = {}, p2 = {}",
            r1.pj.to_f64(),
            r2.pj.to_f64()
        );
        for (r, j) in [(&r1, 1), (&r2, 2)] {
            let t_formula = rs.blowup_time_formula(j).unwrap();
            let rel = ((r.tj_integrated - t_formula) / t_formula).abs().to_f64();
            assert!(rel < 1e-8, "j={j}: integrated vs formula {rel:e}");
        }
    }

    #[test]
    fn heteroclinic_path_escapes_upward_for_odd_j() {
        let (q, rs, cfg) = setup("-f^2 + 1", 1e-20);
        let res = locate_pj(&q, &rs, 1, Dd::from_f64(1e-10), &cfg).unwrap();
        assert_eq!(res.path.termination, Termination::Escaped);
        assert!(res.path.x_end.im.to_f64() > 1.0);
        assert!(res.tail_terms_used <= 12);
    }
}
