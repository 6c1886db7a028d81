//! Ball averages `B_t`, the higher-order averages `B_{ℓ,t}` and ball
//! differences `f − B_{ℓ,t} f` on the torus.
//!
//! The production path is spectral: `B_t` multiplies `f̂(m)` by `Î(t|m|)` and
//! `f − B_{ℓ,t}f` by `A_ℓ(t|m|)`. A discrete spatial mean over lattice points
//! serves as an independent oracle.

pub mod pointwise;

use serde::{Deserialize, Serialize};

use crate::body::{BodyKind, BodySpec};
use crate::error::{invalid, Error, Result};
use crate::multiplier::{
    average_weights, binomial, cube_hat, m_ell_cube, MultiplierKind, RadialMultiplierTable,
};
use crate::torus::{
    apply_multiplier, apply_radial_multiplier, forward_transform, inverse_transform, GridSpec,
    SampledField,
};

/// Parameters of `B_{ℓ,t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageSpec {
    pub ell: u32,
    pub t: f64,
    pub body: BodySpec,
}

impl AverageSpec {
    /// Rejects `ℓ = 0`, `t ≤ 0` and `ℓt ≥ π`.
    pub fn new(ell: u32, t: f64, body: BodySpec) -> Result<Self> {
        if ell == 0 {
            return Err(invalid("average order ℓ must be at least 1"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::RadiusOutOfRange(format!(
                "radius {t} must be positive"
            )));
        }
        if ell as f64 * t >= std::f64::consts::PI {
            return Err(Error::RadiusOutOfRange(format!(
                "ℓ·t = {} must stay below π",
                ell as f64 * t
            )));
        }
        Ok(Self { ell, t, body })
    }

    pub fn ball(ell: u32, t: f64, dim: usize) -> Result<Self> {
        Self::new(ell, t, BodySpec::ball(dim))
    }
}

fn check_body(f: &SampledField, body: &BodySpec) -> Result<()> {
    if f.grid().dim() != body.dim {
        return Err(invalid(format!(
            "field dimension {} does not match body dimension {}",
            f.grid().dim(),
            body.dim
        )));
    }
    Ok(())
}

fn check_radius(t: f64) -> Result<()> {
    if !(t > 0.0 && t < std::f64::consts::PI) {
        return Err(Error::RadiusOutOfRange(format!("radius {t} not in (0, π)")));
    }
    Ok(())
}

/// Drop round-off imaginary parts when the input was real.
fn restore_kind(out: SampledField, real: bool) -> SampledField {
    if real {
        SampledField::from_real(*out.grid(), out.real_parts()).expect("same grid")
    } else {
        out
    }
}

/// One spectral pass with the symbol `kind` at dilation `t`.
pub(crate) fn multiplier_pass(
    f: &SampledField,
    kind: MultiplierKind,
    ell: u32,
    t: f64,
    body: &BodySpec,
) -> Result<SampledField> {
    check_body(f, body)?;
    let spectrum = forward_transform(f);
    let out = match body.kind {
        BodyKind::EuclideanBall => {
            let table = RadialMultiplierTable::for_grid(kind, ell, f.grid(), t)?;
            apply_radial_multiplier(&spectrum, &table)?
        }
        BodyKind::Cube => {
            let symbol = |m: &[i64]| {
                let mut x = [0.0; 3];
                for (slot, &mi) in x.iter_mut().zip(m) {
                    *slot = t * mi as f64;
                }
                let x = &x[..m.len()];
                match kind {
                    MultiplierKind::BallHat => cube_hat(x),
                    MultiplierKind::MEll => m_ell_cube(ell, x),
                    _ => 1.0 - m_ell_cube(ell, x),
                }
            };
            match kind {
                MultiplierKind::BallHat | MultiplierKind::MEll | MultiplierKind::AEll => {
                    apply_multiplier(&spectrum, symbol)
                }
                other => return Err(invalid(format!("{other:?} is not an averaging symbol"))),
            }
        }
    };
    Ok(restore_kind(inverse_transform(&out), f.is_real()))
}

/// `B_t f` as the multiplier `Î(t|m|)` (ball) or `Π sinc(t m_i)` (cube).
pub fn ball_average_spectral(f: &SampledField, t: f64, body: &BodySpec) -> Result<SampledField> {
    check_radius(t)?;
    multiplier_pass(f, MultiplierKind::BallHat, 1, t, body)
}

/// `B_{ℓ,t} f` as the combination `Σ_j w_j B_{jt} f`.
pub fn higher_average(f: &SampledField, spec: &AverageSpec) -> Result<SampledField> {
    let mut acc = SampledField::zeros(*f.grid());
    for (i, w) in average_weights(spec.ell).into_iter().enumerate() {
        let bj = ball_average_spectral(f, (i + 1) as f64 * spec.t, &spec.body)?;
        acc = acc.add(&bj.scale(w))?;
    }
    Ok(restore_kind(acc, f.is_real()))
}

/// `B_{ℓ,t} f` as a single pass with `m_ℓ(t|m|)`.
pub fn higher_average_multiplier(f: &SampledField, spec: &AverageSpec) -> Result<SampledField> {
    multiplier_pass(f, MultiplierKind::MEll, spec.ell, spec.t, &spec.body)
}

/// `f − B_{ℓ,t} f` as a single pass with `A_ℓ(t|m|)`. Free of cancellation
/// at small `t`, so this is the path the norms use.
pub fn ball_difference(f: &SampledField, spec: &AverageSpec) -> Result<SampledField> {
    multiplier_pass(f, MultiplierKind::AEll, spec.ell, spec.t, &spec.body)
}

/// `f − B_{ℓ,t} f` from the combination path.
pub fn ball_difference_by_combination(
    f: &SampledField,
    spec: &AverageSpec,
) -> Result<SampledField> {
    f.sub(&higher_average(f, spec)?)
}

/// Lattice-point stencil of a dilated body, organised as runs along the last axis.
struct Stencil {
    /// `(offset in the leading n−1 axes, half-width along the last axis)`;
    /// a half-width of `None` covers the whole row.
    rows: Vec<([i64; 2], Option<usize>)>,
    count: usize,
}

fn stencil(grid: &GridSpec, radius: f64, kind: BodyKind) -> Stencil {
    let n = grid.samples_per_axis();
    let dim = grid.dim();
    let rho = radius / grid.spacing();
    let reach = (rho + 1e-9).floor() as i64;
    let half = (n / 2) as i64;
    let lower = reach.min(half);
    let lower_offsets: Vec<i64> = (-lower..=lower)
        .filter(|&d| !(lower == half && d == -half))
        .collect();
    let width = |d2: i64| -> Option<usize> {
        let w = match kind {
            BodyKind::EuclideanBall => ((rho * rho - d2 as f64).max(0.0).sqrt() + 1e-9).floor(),
            BodyKind::Cube => reach as f64,
        } as usize;
        (2 * w + 1 < n).then_some(w)
    };
    let inside = |d2: i64| match kind {
        BodyKind::EuclideanBall => (d2 as f64) <= rho * rho + 1e-9,
        BodyKind::Cube => true,
    };
    let mut rows = Vec::new();
    match dim {
        1 => rows.push(([0, 0], width(0))),
        2 => {
            for &a in &lower_offsets {
                if inside(a * a) {
                    rows.push(([a, 0], width(a * a)));
                }
            }
        }
        _ => {
            for &a in &lower_offsets {
                for &b in &lower_offsets {
                    let d2 = a * a + b * b;
                    if inside(d2) {
                        rows.push(([a, b], width(d2)));
                    }
                }
            }
        }
    }
    let count = rows.iter().map(|(_, w)| w.map_or(n, |w| 2 * w + 1)).sum();
    Stencil { rows, count }
}

/// Mean of `values` over the periodic body `x + radius·K` at every grid point,
/// with equal weight on every lattice point inside. Radius 0 returns the input.
pub fn periodic_body_means(
    values: &[f64],
    grid: &GridSpec,
    radius: f64,
    kind: BodyKind,
) -> Vec<f64> {
    let n = grid.samples_per_axis();
    let dim = grid.dim();
    let rows_total = grid.len() / n;
    let st = stencil(grid, radius, kind);
    if st.count == 1 {
        return values.to_vec();
    }
    let mut prefix = vec![0.0; rows_total * (n + 1)];
    for r in 0..rows_total {
        let base = r * (n + 1);
        for i in 0..n {
            prefix[base + i + 1] = prefix[base + i] + values[r * n + i];
        }
    }
    let row_sum = |row: usize, start: i64, len: usize| -> f64 {
        let p = &prefix[row * (n + 1)..(row + 1) * (n + 1)];
        let s = start.rem_euclid(n as i64) as usize;
        if s + len <= n {
            p[s + len] - p[s]
        } else {
            (p[n] - p[s]) + p[s + len - n]
        }
    };
    let wrap = |i: i64| i.rem_euclid(n as i64) as usize;
    let mut out = vec![0.0; grid.len()];
    for r in 0..rows_total {
        let (a, b) = match dim {
            1 => (0, 0),
            2 => (r, 0),
            _ => (r / n, r % n),
        };
        let neighbours: Vec<(usize, Option<usize>)> = st
            .rows
            .iter()
            .map(|&(d, w)| {
                let row = match dim {
                    1 => 0,
                    2 => wrap(a as i64 + d[0]),
                    _ => wrap(a as i64 + d[0]) * n + wrap(b as i64 + d[1]),
                };
                (row, w)
            })
            .collect();
        for c in 0..n {
            let mut sum = 0.0;
            for &(row, w) in &neighbours {
                sum += match w {
                    Some(w) => row_sum(row, c as i64 - w as i64, 2 * w + 1),
                    None => row_sum(row, 0, n),
                };
            }
            out[r * n + c] = sum / st.count as f64;
        }
    }
    out
}

/// Number of lattice points in the stencil of `x + radius·K`.
pub fn stencil_size(grid: &GridSpec, radius: f64, kind: BodyKind) -> usize {
    stencil(grid, radius, kind).count
}

/// `B_t f` as the plain mean of the samples within periodic distance `t`.
pub fn ball_average_spatial(f: &SampledField, t: f64, body: &BodySpec) -> Result<SampledField> {
    check_body(f, body)?;
    let h = f.grid().spacing();
    if !(t >= 4.0 * h - 1e-12) || !t.is_finite() {
        return Err(Error::RadiusOutOfRange(format!(
            "radius {t} spans fewer than 4 grid cells (spacing {h})"
        )));
    }
    let grid = *f.grid();
    let re = periodic_body_means(&f.real_parts(), &grid, t, body.kind);
    if f.is_real() {
        return SampledField::from_real(grid, re);
    }
    let im_in: Vec<f64> = f.values().iter().map(|v| v.im).collect();
    let im = periodic_body_means(&im_in, &grid, t, body.kind);
    SampledField::new(
        grid,
        re.into_iter()
            .zip(im)
            .map(|(r, i)| num_complex::Complex64::new(r, i))
            .collect(),
    )
}

/// Order and step of `Δ_θ^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralDifferenceSpec {
    pub order: u32,
    pub step: f64,
}

impl CentralDifferenceSpec {
    pub fn new(order: u32, step: f64) -> Result<Self> {
        if order == 0 {
            return Err(invalid("central difference order must be at least 1"));
        }
        Ok(Self { order, step })
    }
}

/// `Δ_θ^r h(t) = Σ_{j=0}^{r} C(r,j) (−1)^j h(t + rθ/2 − jθ)`.
pub fn central_difference(h: impl Fn(f64) -> f64, spec: &CentralDifferenceSpec, at: f64) -> f64 {
    let r = spec.order;
    let theta = spec.step;
    (0..=r)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(r, j) * h(at + r as f64 * theta / 2.0 - j as f64 * theta)
        })
        .sum()
}

/// Max over `probes` (flat grid indices) of the residual of
/// `f(x) − B_{ℓ,t}f(x) = (−1)^ℓ / C(2ℓ,ℓ) · Δ_t^{2ℓ} g(0)`, where
/// `g(s) = B_{|s|} f(x)` and `g(0) = f(x)`.
///
/// The left side comes from the `A_ℓ` multiplier, the right side from
/// single-radius averages at `|ℓ−j|t`.
pub fn verify_central_difference_identity(
    f: &SampledField,
    spec: &AverageSpec,
    probes: &[usize],
) -> Result<f64> {
    let ell = spec.ell;
    let lhs = ball_difference(f, spec)?;
    let mut averages = vec![f.clone()];
    for i in 1..=ell {
        averages.push(ball_average_spectral(f, i as f64 * spec.t, &spec.body)?);
    }
    let diff = CentralDifferenceSpec::new(2 * ell, spec.t)?;
    let sign = if ell.is_multiple_of(2) { 1.0 } else { -1.0 };
    let scale = sign / binomial(2 * ell, ell);
    let mut worst: f64 = 0.0;
    for &p in probes {
        if p >= f.grid().len() {
            return Err(invalid(format!("probe index {p} outside the grid")));
        }
        let g = |s: f64| {
            let i = (s / spec.t).round().abs() as usize;
            averages[i].values()[p].re
        };
        let rhs = scale * central_difference(g, &diff, 0.0);
        worst = worst.max((lhs.values()[p].re - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn ball(dim: usize) -> BodySpec {
        BodySpec::ball(dim)
    }

    fn smooth_field(grid: GridSpec, top: i64, seed: u64) -> SampledField {
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 * PI
        };
        let phases: Vec<f64> = (0..=top).map(|_| next()).collect();
        SampledField::from_fn(grid, move |x| {
            (1..=top)
                .map(|m| (m as f64 * x[0] + phases[m as usize]).cos() / (1.0 + m as f64).powi(3))
                .sum()
        })
    }

    #[test]
    fn spec_validation() {
        assert!(AverageSpec::ball(1, 0.5, 1).is_ok());
        assert!(matches!(
            AverageSpec::ball(2, 1.6, 1),
            Err(Error::RadiusOutOfRange(_))
        ));
        assert!(AverageSpec::ball(1, 0.0, 1).is_err());
        assert!(AverageSpec::ball(0, 0.1, 1).is_err());
    }

    #[test]
    fn constant_is_fixed() {
        let grid = GridSpec::new(2, 64).unwrap();
        let f = SampledField::constant(grid, 2.5);
        let b = ball_average_spectral(&f, 0.7, &ball(2)).unwrap();
        assert!(b.max_abs_difference(&f) < 1e-14);
        let s = ball_average_spatial(&f, 0.9, &ball(2)).unwrap();
        assert!(s.max_abs_difference(&f) < 1e-14);
        for ell in 1..=5 {
            let spec = AverageSpec::ball(ell, 0.5, 2).unwrap();
            let one = SampledField::constant(grid, 1.0);
            let h = higher_average(&one, &spec).unwrap();
            assert!(h.max_abs_difference(&one) < 1e-12);
            assert!(ball_difference(&one, &spec).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_eigenfunctions() {
        let grid = GridSpec::new(1, 64).unwrap();
        let m = 5.0;
        let t = 0.3;
        let values = (0..64)
            .map(|i| Complex64::from_polar(1.0, m * grid.point(i)[0]))
            .collect();
        let f = SampledField::new(grid, values).unwrap();
        let b = ball_average_spectral(&f, t, &ball(1)).unwrap();
        let expected = f.scale((m * t).sin() / (m * t));
        assert!(b.max_abs_difference(&expected) < 1e-14);
        let spec = AverageSpec::ball(1, t, 1).unwrap();
        let d = ball_difference(&f, &spec).unwrap();
        let expected = f.scale(1.0 - (m * t).sin() / (m * t));
        assert!(d.max_abs_difference(&expected) < 1e-14);
    }

    #[test]
    fn combination_and_multiplier_paths_agree() {
        let grid = GridSpec::new(1, 128).unwrap();
        let f = smooth_field(grid, 40, 3);
        for ell in 1..=3 {
            let spec = AverageSpec::ball(ell, 0.3, 1).unwrap();
            let a = higher_average(&f, &spec).unwrap();
            let b = higher_average_multiplier(&f, &spec).unwrap();
            assert!(a.max_abs_difference(&b) < 1e-10);
            let c = ball_difference(&f, &spec).unwrap();
            let d = ball_difference_by_combination(&f, &spec).unwrap();
            assert!(c.max_abs_difference(&d) < 1e-10);
        }
        let spec = AverageSpec::ball(1, 0.3, 1).unwrap();
        let b1 = ball_average_spectral(&f, 0.3, &ball(1)).unwrap();
        assert!(higher_average(&f, &spec).unwrap().max_abs_difference(&b1) < 1e-15);

        let spec = AverageSpec::ball(2, 0.3, 1).unwrap();
        let b2 = ball_average_spectral(&f, 0.6, &ball(1)).unwrap();
        let expected = b1.scale(4.0 / 3.0).sub(&b2.scale(1.0 / 3.0)).unwrap();
        assert!(
            higher_average(&f, &spec)
                .unwrap()
                .max_abs_difference(&expected)
                < 1e-14
        );
    }

    #[test]
    fn spatial_oracle_converges_in_one_dimension() {
        let coarse = GridSpec::new(1, 256).unwrap();
        let t = 20.0 * coarse.spacing();
        let mut errors = Vec::new();
        for n in [256, 512, 1024] {
            let grid = GridSpec::new(1, n).unwrap();
            let f = smooth_field(grid, 32, 11);
            let spectral = ball_average_spectral(&f, t, &ball(1)).unwrap();
            let spatial = ball_average_spatial(&f, t, &ball(1)).unwrap();
            errors.push(spatial.relative_l2_distance(&spectral));
        }
        assert!(errors[0] <= 5e-3, "{errors:?}");
        assert!(
            errors[0] / errors[1] >= 1.5 && errors[1] / errors[2] >= 1.5,
            "{errors:?}"
        );
    }

    #[test]
    fn spatial_oracle_in_two_dimensions() {
        let grid = GridSpec::new(2, 256).unwrap();
        let f = SampledField::from_fn(grid, |x| {
            (x[0] + 0.3).cos() + 0.5 * (2.0 * x[1] - 1.0).sin() + 0.25 * (x[0] + 2.0 * x[1]).cos()
        });
        let t = 20.0 * grid.spacing();
        let spectral = ball_average_spectral(&f, t, &ball(2)).unwrap();
        let spatial = ball_average_spatial(&f, t, &ball(2)).unwrap();
        assert!(spatial.relative_l2_distance(&spectral) < 1e-3);
    }

    #[test]
    fn spatial_full_support_and_small_radius() {
        let grid = GridSpec::new(1, 64).unwrap();
        let f = SampledField::from_fn(grid, |x| (-4.0 * (x[0] - PI).powi(2)).exp());
        let mean = f.real_parts().iter().sum::<f64>() / 64.0;
        let s = ball_average_spatial(&f, 3.2, &ball(1)).unwrap();
        assert!(s.real_parts().iter().all(|v| (v - mean).abs() < 1e-14));
        assert!(matches!(
            ball_average_spatial(&f, 2.0 * grid.spacing(), &ball(1)),
            Err(Error::RadiusOutOfRange(_))
        ));
    }

    #[test]
    fn cube_matches_spatial_cube() {
        let t = 10.0 * GridSpec::new(2, 128).unwrap().spacing();
        let mut errors = Vec::new();
        for n in [128, 256] {
            let grid = GridSpec::new(2, n).unwrap();
            let f = SampledField::from_fn(grid, |x| (x[0] - x[1]).cos() + (2.0 * x[1]).sin());
            let spectral = ball_average_spectral(&f, t, &BodySpec::cube(2)).unwrap();
            let spatial = ball_average_spatial(&f, t, &BodySpec::cube(2)).unwrap();
            errors.push(spatial.relative_l2_distance(&spectral));
        }
        assert!(
            errors[0] < 5e-2 && errors[0] / errors[1] >= 1.5,
            "{errors:?}"
        );
        let grid = GridSpec::new(2, 128).unwrap();
        let pure = SampledField::from_fn(grid, |x| (x[0] + x[1]).cos());
        let b = ball_average_spectral(&pure, t, &BodySpec::cube(2)).unwrap();
        let expected = pure.scale((t.sin() / t).powi(2));
        assert!(b.max_abs_difference(&expected) < 1e-14);
    }

    #[test]
    fn central_difference_examples() {
        let spec = CentralDifferenceSpec::new(2, 0.3).unwrap();
        let h = |t: f64| t.exp();
        let d = central_difference(h, &spec, 0.4);
        assert!((d - (h(0.7) - 2.0 * h(0.4) + h(0.1))).abs() < 1e-15);
        assert!((central_difference(|t| t * t, &spec, 5.0) - 2.0 * 0.09).abs() < 1e-12);
        for r in 1..=6u32 {
            let spec = CentralDifferenceSpec::new(r, 0.7).unwrap();
            let fact: f64 = (1..=r).map(f64::from).product();
            let got = central_difference(|t| t.powi(r as i32), &spec, 0.2);
            assert!((got - fact * 0.7f64.powi(r as i32)).abs() < 1e-11);
        }
        assert!(CentralDifferenceSpec::new(0, 1.0).is_err());
    }

    #[test]
    fn central_difference_identity() {
        let grid = GridSpec::new(1, 128).unwrap();
        let f = smooth_field(grid, 40, 5);
        let probes: Vec<usize> = (0..16).map(|i| i * 8).collect();
        for ell in 1..=3 {
            let spec = AverageSpec::ball(ell, 0.35, 1).unwrap();
            let r = verify_central_difference_identity(&f, &spec, &probes).unwrap();
            assert!(r <= 1e-9 * f.max_abs(), "ell={ell} residual={r}");
        }
        let g = SampledField::from_fn(grid, |x| (4.0 * x[0]).cos());
        let spec = AverageSpec::ball(3, 0.2, 1).unwrap();
        assert!(verify_central_difference_identity(&g, &spec, &probes).unwrap() <= 1e-9);
    }

    #[test]
    fn stencil_counts() {
        let grid = GridSpec::new(2, 64).unwrap();
        let h = grid.spacing();
        assert_eq!(stencil_size(&grid, 0.0, BodyKind::EuclideanBall), 1);
        assert_eq!(stencil_size(&grid, h, BodyKind::EuclideanBall), 5);
        assert_eq!(stencil_size(&grid, h, BodyKind::Cube), 9);
        assert_eq!(stencil_size(&grid, 2.0 * h, BodyKind::EuclideanBall), 13);
        let g1 = GridSpec::new(1, 16).unwrap();
        assert_eq!(stencil_size(&g1, 100.0, BodyKind::EuclideanBall), 16);
    }
}
