use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Smallest and largest abscissa in the fit.
    pub window: [f64; 2],
    pub points: usize,
    /// Largest vertical distance from a data point to the line.
    pub max_residual: f64,
    /// Set when some ordinate sat at the floating-point noise floor.
    pub degenerate: bool,
}

/// Fit a line through at least four points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(
            "abscissa/ordinate length mismatch".into(),
        ));
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientScales(format!(
            "slope fit needs at least 4 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("slope fit data".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "slope fit abscissae coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        window: [lo, hi],
        points: xs.len(),
        max_residual,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -2.0 * x + 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-15);
        assert!((fit.intercept - 1.0).abs() < 1e-15);
        assert!(fit.max_residual < 1e-14);
        assert_eq!(fit.window, [0.0, 4.0]);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_line(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]),
            Err(Error::InsufficientScales(_))
        ));
        assert!(fit_line(&[0.0, 1.0, 2.0, 3.0], &[0.0, f64::NAN, 2.0, 3.0]).is_err());
    }
}
