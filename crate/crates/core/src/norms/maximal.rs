//! Dyadic Hardy–Littlewood maximal function on the grid and the pointwise
//! control of band pieces by ball differences.

use serde::{Deserialize, Serialize};

use crate::averaging::{ball_difference, periodic_body_means, AverageSpec};
use crate::body::{BodyKind, BodySpec};
use crate::error::{invalid, Result};
use crate::filter_bank::{band_project, FilterBank};
use crate::torus::{GridSpec, SampledField};

/// Radii `0` and `2^{−k}` with `h ≤ 2^{−k} < π`, in decreasing order.
pub fn maximal_radii(grid: &GridSpec) -> Vec<f64> {
    let h = grid.spacing();
    let mut radii: Vec<f64> = (-1..)
        .map(|k| 2f64.powi(-k))
        .skip_while(|&r| r >= std::f64::consts::PI)
        .take_while(|&r| r >= h)
        .collect();
    radii.push(0.0);
    radii
}

/// `Mf(x) = max_r ⨍_{B(x,r)} |f|` over [`maximal_radii`]. The radius-0 term
/// is `|f(x)|`, so `Mf ≥ |f|` everywhere.
pub fn hl_maximal(f: &SampledField) -> SampledField {
    let grid = *f.grid();
    let mags = f.abs_values();
    let mut out = mags.clone();
    for r in maximal_radii(&grid) {
        if r == 0.0 {
            continue;
        }
        let means = periodic_body_means(&mags, &grid, r, BodyKind::EuclideanBall);
        for (o, m) in out.iter_mut().zip(means) {
            *o = o.max(m);
        }
    }
    SampledField::from_real(grid, out).expect("same grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleConstant {
    pub j: i32,
    /// Smallest `C_j` with `|φ_{2^{−j}} ∗ f| ≤ C_j M(f − B_{ℓ,2^{−j}} f)`.
    pub constant: f64,
    /// Sites skipped because the maximal function vanished there.
    pub excluded_sites: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalControlReport {
    pub ell: u32,
    pub per_scale: Vec<ScaleConstant>,
    pub max_constant: f64,
}

/// Empirical constants of `|f ∗ φ_{2^{−j}}| ≲ M(f − B_{ℓ,2^{−j}} f)` per scale.
pub fn maximal_control_check(
    f: &SampledField,
    ell: u32,
    bank: &FilterBank,
    scales: &[i32],
) -> Result<MaximalControlReport> {
    let scale = f.max_abs();
    let mean = f.values().iter().sum::<num_complex::Complex64>() / f.grid().len() as f64;
    if mean.norm() > 1e-10 * scale.max(1.0) {
        return Err(invalid(format!(
            "maximal control needs a mean-zero field, mean is {}",
            mean.norm()
        )));
    }
    let body = BodySpec::ball(f.grid().dim());
    let mut per_scale = Vec::new();
    for &j in scales {
        let spec = AverageSpec::new(ell, 2f64.powi(-j), body)?;
        let band = band_project(f, j, bank)?.abs_values();
        let control = hl_maximal(&ball_difference(f, &spec)?).real_parts();
        let floor = 1e-13 * control.iter().copied().fold(0.0, f64::max);
        let mut constant: f64 = 0.0;
        let mut excluded = 0;
        for (b, m) in band.iter().zip(&control) {
            if *m <= floor || *m == 0.0 {
                excluded += 1;
                continue;
            }
            constant = constant.max(b / m);
        }
        per_scale.push(ScaleConstant {
            j,
            constant,
            excluded_sites: excluded,
        });
    }
    let max_constant = per_scale.iter().map(|s| s.constant).fold(0.0, f64::max);
    Ok(MaximalControlReport {
        ell,
        per_scale,
        max_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter_bank::build_bank;

    fn periodic_distance(a: f64, b: f64) -> f64 {
        let d = (a - b).abs() % (2.0 * std::f64::consts::PI);
        d.min(2.0 * std::f64::consts::PI - d)
    }

    #[test]
    fn constant_and_domination() {
        let grid = GridSpec::new(2, 32).unwrap();
        let c = SampledField::constant(grid, -1.5);
        assert!(hl_maximal(&c)
            .real_parts()
            .iter()
            .all(|v| (v - 1.5).abs() < 1e-14));
        let f = SampledField::from_fn(grid, |x| (x[0] * 3.0).sin() * x[1].cos());
        let m = hl_maximal(&f);
        for (mf, v) in m.real_parts().iter().zip(f.abs_values()) {
            assert!(*mf >= v);
        }
    }

    #[test]
    fn spike_matches_brute_force() {
        let grid = GridSpec::new(1, 128).unwrap();
        let mut values = vec![0.0; 128];
        values[40] = 1.0;
        let f = SampledField::from_real(grid, values.clone()).unwrap();
        let m = hl_maximal(&f).real_parts();
        let radii = maximal_radii(&grid);
        for i in 0..128 {
            let xi = grid.point(i)[0];
            let mut best: f64 = 0.0;
            for &r in &radii {
                let (mut sum, mut count) = (0.0, 0);
                for (j, v) in values.iter().enumerate() {
                    if periodic_distance(xi, grid.point(j)[0]) <= r + 1e-9 * grid.spacing() {
                        sum += v;
                        count += 1;
                    }
                }
                best = best.max(sum / count as f64);
            }
            assert!((m[i] - best).abs() < 1e-14, "i={i}: {} vs {best}", m[i]);
        }
        // Decay like 1/distance away from the spike.
        assert!(m[60] > m[80] && m[80] > m[100]);
    }

    #[test]
    fn control_constants() {
        let bank = build_bank();
        let grid = GridSpec::new(1, 256).unwrap();
        let zero = SampledField::zeros(grid);
        let r = maximal_control_check(&zero, 1, &bank, &[2, 3]).unwrap();
        assert_eq!(r.max_constant, 0.0);
        assert_eq!(r.per_scale[0].excluded_sites, 256);

        let band = SampledField::from_fn(grid, |x| (8.0 * x[0]).cos());
        let r = maximal_control_check(&band, 1, &bank, &[3]).unwrap();
        assert!(r.max_constant.is_finite() && r.max_constant > 0.0);

        let offset = SampledField::constant(grid, 1.0);
        assert!(maximal_control_check(&offset, 1, &bank, &[2]).is_err());
    }
}
