//! Origin-constrained least-squares fit of mixing-time estimates against
//! `n·ln n`.

use nsis_core::{Error, Result};
use serde::Serialize;

/// One fitted point: the observation, the fitted value `c·n ln n`, and the
/// residual (observed − fitted).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResidual {
    pub n: usize,
    pub observed: f64,
    pub fitted: f64,
    pub residual: f64,
}

/// Result of fitting `t ≈ c·n ln n` through the origin.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// Least-squares coefficient `Σ t·x / Σ x²` with `x = n ln n`.
    pub c: f64,
    /// `1 − SS_res/SS_tot`, clamped to [0, 1]. Defined as exactly 1 when
    /// the observations are constant (`SS_tot = 0`), which covers
    /// single-point inputs.
    pub r_squared: f64,
    pub residuals: Vec<FitResidual>,
}

/// Fits `t ≈ c·n ln n` through the origin.
///
/// Needs at least one point and every `n ≥ 2`: at `n = 1` the regressor
/// `n ln n` vanishes, and no experiment here runs below two vertices. The
/// origin constraint can fit worse than the constant mean, so `r_squared`
/// is clamped at 0 rather than reported negative.
pub fn fit_nlogn(points: &[(usize, f64)]) -> Result<FitResult> {
    if points.is_empty() {
        return Err(Error::Input("fit needs at least one (n, t) point".into()));
    }
    let mut sxx = 0.0_f64;
    let mut sxt = 0.0_f64;
    for &(n, t) in points {
        if n < 2 {
            return Err(Error::Input(format!("fit points need n >= 2, got n = {n}")));
        }
        if !t.is_finite() {
            return Err(Error::Input(format!(
                "fit observations must be finite, got t = {t} at n = {n}"
            )));
        }
        let x = n as f64 * (n as f64).ln();
        sxx += x * x;
        sxt += t * x;
    }
    // n ≥ 2 makes every regressor ≥ 2·ln 2 > 0, so sxx > 0.
    let c = sxt / sxx;

    let mean = points.iter().map(|&(_, t)| t).sum::<f64>() / points.len() as f64;
    let mut ss_res = 0.0_f64;
    let mut ss_tot = 0.0_f64;
    let residuals: Vec<FitResidual> = points
        .iter()
        .map(|&(n, t)| {
            let x = n as f64 * (n as f64).ln();
            let fitted = c * x;
            let residual = t - fitted;
            ss_res += residual * residual;
            ss_tot += (t - mean) * (t - mean);
            FitResidual { n, observed: t, fitted, residual }
        })
        .collect();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(FitResult { c, r_squared, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nlogn(n: usize) -> f64 {
        n as f64 * (n as f64).ln()
    }

    #[test]
    fn exact_points_recover_the_coefficient() {
        let points: Vec<(usize, f64)> =
            [10usize, 20, 40, 80].iter().map(|&n| (n, 3.0 * nlogn(n))).collect();
        let fit = fit_nlogn(&points).unwrap();
        assert_relative_eq!(fit.c, 3.0, max_relative = 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
        for r in &fit.residuals {
            assert!(r.residual.abs() < 1e-9, "exact data leaves only roundoff residuals");
        }
    }

    #[test]
    fn single_point_fits_are_exact_by_convention() {
        // One observation: the mean equals the observation, SS_tot = 0, and
        // the convention pins r² = 1 — even at t = 0, where c = 0 exactly.
        let fit = fit_nlogn(&[(10, 0.0)]).unwrap();
        assert_eq!(fit.c, 0.0);
        assert_eq!(fit.r_squared, 1.0);

        let fit = fit_nlogn(&[(100, 250.0)]).unwrap();
        assert_eq!(fit.r_squared, 1.0);
        assert_relative_eq!(fit.c, 250.0 / nlogn(100), max_relative = 1e-15);
    }

    #[test]
    fn empty_and_undersized_inputs_are_rejected() {
        assert!(fit_nlogn(&[]).is_err());
        assert!(fit_nlogn(&[(1, 5.0)]).is_err());
        assert!(fit_nlogn(&[(4, f64::NAN)]).is_err());
    }

    #[test]
    fn symmetric_relative_noise_is_recovered_within_its_own_amplitude() {
        // t = c·x·(1 ± δ) alternating. The weighted average cannot move the
        // coefficient by more than the relative amplitude:
        // ĉ = c·(1 + δ·Σ±x²/Σx²) and |Σ±x²/Σx²| ≤ 1, so |ĉ − c| ≤ c·δ.
        let c = 1.2;
        let delta = 0.05;
        let points: Vec<(usize, f64)> = [50usize, 100, 200, 400, 800]
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                (n, c * nlogn(n) * (1.0 + sign * delta))
            })
            .collect();
        let fit = fit_nlogn(&points).unwrap();
        assert!(
            (fit.c - c).abs() <= c * delta + 1e-12,
            "recovered c = {} should be within {} of {}",
            fit.c,
            c * delta,
            c
        );
        assert!(fit.r_squared > 0.9, "small noise keeps the fit tight, got {}", fit.r_squared);
    }

    #[test]
    fn r_squared_is_clamped_when_the_origin_fit_is_worse_than_the_mean() {
        // A large observation at tiny x and a zero at huge x force the
        // origin-constrained line to explain almost nothing.
        let fit = fit_nlogn(&[(2, 100.0), (1000, 0.0)]).unwrap();
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn residuals_reproduce_the_identity_t_equals_fit_plus_residual() {
        let points = vec![(8usize, 30.0), (16, 70.0), (32, 180.0)];
        let fit = fit_nlogn(&points).unwrap();
        for (r, &(n, t)) in fit.residuals.iter().zip(&points) {
            assert_eq!(r.n, n);
            assert_relative_eq!(r.fitted + r.residual, t, max_relative = 1e-15);
            assert_relative_eq!(r.fitted, fit.c * nlogn(n), max_relative = 1e-15);
        }
    }
}
