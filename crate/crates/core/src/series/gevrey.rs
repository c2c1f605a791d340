//! Divergence diagnostic: least-squares slope of `log |phi_alpha|^(1/alpha)`
//! against `log alpha`.  Slope ~ 1 signals Gevrey-1 (factorial) growth in s,
//! the numerical surrogate for divergence of the inner series.

use super::inner::SeriesPair;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, thiserror::Error)]
pub enum GevreyError {
    #[error("fit range [{0}, {1}] exceeds the computed order {2}")]
    RangeBeyondOrder(usize, usize, usize),
    #[error("only {0} usable indices in the fit range (need >= 10)")]
    TooFewPoints(usize),
}

/// Least-squares summary of the growth diagnostic.
///
/// This is a heuristic surrogate for the divergence assumption and is
/// reported as evidence, never as proof; `heuristic` stays true.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GevreyReport {
    pub alpha_min: usize,
    pub alpha_max: usize,
    /// (alpha, log|phi_alpha|^(1/alpha)) for the usable indices.
    pub values: Vec<(usize, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub heuristic: bool,
}

/// log of the absolute value of a rational, robust to values far beyond
/// the f64 range (factorially large coefficients).
pub fn ln_abs_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_bigint(r.numer()) - ln_abs_bigint(r.denom())
}

fn ln_abs_bigint(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 900 {
        use num_traits::ToPrimitive;
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    let head: BigInt = n >> shift;
    use num_traits::ToPrimitive;
    head.to_f64().unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
}

pub fn gevrey_diagnostic(
    sp: &SeriesPair,
    alpha_min: usize,
    alpha_max: usize,
) -> Result<GevreyReport, GevreyError> {
    if alpha_max > sp.n || alpha_min > alpha_max {
        return Err(GevreyError::RangeBeyondOrder(alpha_min, alpha_max, sp.n));
    }
    let mut values = Vec::new();
    for alpha in alpha_min.max(1)..=alpha_max {
        let nsq = sp.phi_norm_sqr(alpha);
        if nsq.is_zero() {
            continue; // zero entries are skipped
        }
        let ln_mag = 0.5 * ln_abs_rational(&nsq);
        values.push((alpha, ln_mag / alpha as f64));
    }
    if values.len() < 10 {
        return Err(GevreyError::TooFewPoints(values.len()));
    }
    let xs: Vec<f64> = values.iter().map(|(a, _)| (*a as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    let (slope, intercept, r_squared) = least_squares_xy(&xs, &ys);
    Ok(GevreyReport {
        alpha_min,
        alpha_max,
        values,
        slope,
        intercept,
        r_squared,
        heuristic: true,
    })
}

pub fn least_squares_xy(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r_squared)
}

#[cfg(test)]
mod tests {
    use super::super::inner::phi_coefficients;
    use super::*;
    use num_traits::One;

    #[test]
    fn kappa2_slope_factorial_trend() {
        // The coefficients are pinned by an independent symbolic solve; the
        // [40,80] slope of the true series is 0.8478 (it climbs toward 1
        // logarithmically slowly: 0.962 by alpha ~ 300-400).
        let sp = phi_coefficients(2, 80);
        let rep = gevrey_diagnostic(&sp, 40, 80).unwrap();
        assert!(
            (rep.slope - 0.8478).abs() < 0.02,
            "slope {} drifted from the frozen value",
            rep.slope
        );
        assert!(rep.r_squared > 0.999, "growth must be cleanly factorial");
        assert!(rep.heuristic);
    }

    #[test]
    fn kappa8_slope_within_unit_band() {
        let sp = phi_coefficients(8, 80);
        let rep = gevrey_diagnostic(&sp, 40, 80).unwrap();
        assert!(
            rep.slope > 0.9 && rep.slope < 1.1,
            "slope {} outside [0.9, 1.1]",
            rep.slope
        );
    }

    #[test]
    fn convergent_geometric_series_slope_near_zero() {
        // phi_alpha = 2^-alpha: |phi|^(1/alpha) is constant, slope ~ 0.
        let n = 80;
        let mut y = Vec::new();
        let z = vec![BigRational::zero(); n + 1];
        for alpha in 0..=n {
            y.push(BigRational::new(BigInt::one(), BigInt::one() << alpha));
        }
        let sp = SeriesPair { kappa: 2, n, y, z };
        let rep = gevrey_diagnostic(&sp, 40, 80).unwrap();
        assert!(rep.slope.abs() < 0.05, "slope {}", rep.slope);
    }

    #[test]
    fn range_errors() {
        let sp = phi_coefficients(2, 20);
        assert!(matches!(
            gevrey_diagnostic(&sp, 10, 30),
            Err(GevreyError::RangeBeyondOrder(..))
        ));
        assert!(matches!(
            gevrey_diagnostic(&sp, 15, 20),
            Err(GevreyError::TooFewPoints(_))
        ));
    }

    #[test]
    fn ln_abs_handles_huge_numbers() {
        // 2^5000 is far beyond f64.
        let big = BigRational::from_integer(BigInt::one() << 5000u32);
        let l = ln_abs_rational(&big);
        assert!((l - 5000.0 * std::f64::consts::LN_2).abs() < 1e-6);
    }
}
