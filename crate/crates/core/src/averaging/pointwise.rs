//! Body averages of closed-form functions on `R^n`, evaluated by product
//! quadrature around a single point. Used where periodicity is unwanted,
//! e.g. polynomial reproduction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::AverageSpec;
use crate::body::BodyKind;
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_line, SlopeFit};
use crate::multiplier::average_weights;
use crate::quadrature::QuadratureRule;

/// A function evaluable anywhere in `R^n`.
pub trait Payload: Sync {
    fn eval(&self, y: &[f64]) -> f64;

    /// Total polynomial degree, if the payload is a polynomial.
    fn degree(&self) -> Option<u32> {
        None
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Payload for F {
    fn eval(&self, y: &[f64]) -> f64 {
        self(y)
    }
}

/// `y₁^{a₁} ⋯ y_n^{a_n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    /// All monomials in `dim` variables of total degree exactly `degree`.
    pub fn all_of_degree(dim: usize, degree: u32) -> Vec<Monomial> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(Monomial::new(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in 0..=left {
                prefix.push(a);
                rec(dim, left - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(dim, degree, &mut Vec::new(), &mut out);
        out
    }

    /// True when every exponent is even, i.e. the body moment does not vanish.
    pub fn is_even(&self) -> bool {
        self.exponents.iter().all(|a| a % 2 == 0)
    }
}

impl Payload for Monomial {
    fn eval(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(&self.exponents)
            .map(|(v, &a)| v.powi(a as i32))
            .product()
    }

    fn degree(&self) -> Option<u32> {
        Some(self.exponents.iter().sum())
    }
}

/// A centre, a per-axis quadrature order and the function to average.
pub struct PointProbe<'a> {
    pub center: Vec<f64>,
    pub order: usize,
    pub payload: &'a dyn Payload,
}

impl<'a> PointProbe<'a> {
    pub fn new(center: Vec<f64>, order: usize, payload: &'a dyn Payload) -> Self {
        Self {
            center,
            order,
            payload,
        }
    }
}

/// Highest polynomial degree integrated exactly by an order-`q` product rule.
fn exact_degree(order: usize) -> u32 {
    // The radial weight r^{n−1} costs up to two degrees of the 2q−1 budget.
    (2 * order).saturating_sub(3) as u32
}

/// `B_r` of the payload at the probe centre.
pub fn pointwise_ball_mean(probe: &PointProbe<'_>, radius: f64, kind: BodyKind) -> Result<f64> {
    let dim = probe.center.len();
    if !(1..=3).contains(&dim) {
        return Err(invalid(format!("dimension {dim} not in 1..=3")));
    }
    if probe.order < 2 {
        return Err(invalid("pointwise quadrature order must be at least 2"));
    }
    if let Some(d) = probe.payload.degree() {
        if d > exact_degree(probe.order) {
            return Err(Error::QuadratureTooCoarse(format!(
                "order {} integrates degree ≤ {}, payload has degree {d}",
                probe.order,
                exact_degree(probe.order)
            )));
        }
    }
    if radius == 0.0 {
        return Ok(probe.payload.eval(&probe.center));
    }
    let rule = QuadratureRule::cached(probe.order);
    let x = &probe.center;
    let mut y = vec![0.0; dim];
    let mut sum = 0.0;
    let mut weight = 0.0;
    let mut add = |y: &[f64], w: f64| {
        sum += w * probe.payload.eval(y);
        weight += w;
    };
    // Split at the centre so a kink there does not spoil convergence.
    let axis: Vec<(f64, f64)> = rule
        .mapped(-radius, 0.0)
        .chain(rule.mapped(0.0, radius))
        .collect();
    if dim == 1 || kind == BodyKind::Cube {
        let mut idx = vec![0usize; dim];
        'outer: loop {
            let mut w = 1.0;
            for d in 0..dim {
                y[d] = x[d] + axis[idx[d]].0;
                w *= axis[idx[d]].1;
            }
            add(&y, w);
            for d in 0..dim {
                idx[d] += 1;
                if idx[d] < axis.len() {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
    } else {
        let radial: Vec<(f64, f64)> = rule.mapped(0.0, radius).collect();
        let m = 2 * probe.order + 2;
        let angles: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
        if dim == 2 {
            for &(r, wr) in &radial {
                for &a in &angles {
                    y[0] = x[0] + r * a.cos();
                    y[1] = x[1] + r * a.sin();
                    add(&y, wr * r);
                }
            }
        } else {
            let polar: Vec<(f64, f64)> = rule.mapped(-1.0, 1.0).collect();
            for &(r, wr) in &radial {
                for &(z, wz) in &polar {
                    let s = (1.0 - z * z).sqrt();
                    for &a in &angles {
                        y[0] = x[0] + r * s * a.cos();
                        y[1] = x[1] + r * s * a.sin();
                        y[2] = x[2] + r * z;
                        add(&y, wr * r * r * wz);
                    }
                }
            }
        }
    }
    Ok(sum / weight)
}

/// `B_{ℓ,t}` of the payload at the probe centre on `R^n`.
pub fn pointwise_body_average(probe: &PointProbe<'_>, spec: &AverageSpec) -> Result<f64> {
    if probe.order < spec.ell as usize + 4 {
        return Err(Error::QuadratureTooCoarse(format!(
            "pointwise order {} below ℓ + 4 = {}",
            probe.order,
            spec.ell + 4
        )));
    }
    if probe.center.len() != spec.body.dim {
        return Err(invalid("probe centre and body dimension differ"));
    }
    average_weights(spec.ell)
        .iter()
        .enumerate()
        .map(|(i, w)| Ok(w * pointwise_ball_mean(probe, (i + 1) as f64 * spec.t, spec.body.kind)?))
        .sum()
}

/// `f(x) − B_{ℓ,t} f(x)` on `R^n`.
pub fn pointwise_difference(probe: &PointProbe<'_>, spec: &AverageSpec) -> Result<f64> {
    Ok(probe.payload.eval(&probe.center) - pointwise_body_average(probe, spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialResidual {
    pub exponents: Vec<u32>,
    /// `max_t |P − B_{ℓ,t}P|` at the probe centre.
    pub max_residual: f64,
    /// Log-log slope of the residual against `t`, for non-vanishing top-degree residuals.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub ell: u32,
    pub dim: usize,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    /// Monomials of degree `≤ 2ℓ−1`; these must be reproduced.
    pub reproduced: Vec<MonomialResidual>,
    /// Monomials of degree exactly `2ℓ`, when requested.
    pub top_degree: Vec<MonomialResidual>,
}

impl ReproductionReport {
    pub fn max_reproduced_residual(&self) -> f64 {
        self.reproduced
            .iter()
            .map(|m| m.max_residual)
            .fold(0.0, f64::max)
    }

    /// Largest `|slope − 2ℓ|` among top-degree monomials with a slope.
    pub fn max_slope_deviation(&self) -> f64 {
        let target = 2.0 * self.ell as f64;
        self.top_degree
            .iter()
            .filter_map(|m| m.slope)
            .map(|s| (s - target).abs())
            .fold(0.0, f64::max)
    }
}

/// Residuals `P − B_{ℓ,t}P` for every monomial of degree `≤ degree` at a
/// fixed centre over the radius grid `radii`. Degrees `≥ 2ℓ` go into
/// `top_degree` with a fitted slope when the monomial's moment is nonzero.
pub fn polynomial_reproduction_check(
    degree: u32,
    ell: u32,
    dim: usize,
    radii: &[f64],
    body: crate::body::BodySpec,
) -> Result<ReproductionReport> {
    let center: Vec<f64> = [0.3, -0.2, 0.1][..dim].to_vec();
    let order = (ell as usize + 4).max(degree as usize / 2 + 3);
    let mut report = ReproductionReport {
        ell,
        dim,
        center: center.clone(),
        radii: radii.to_vec(),
        reproduced: vec![],
        top_degree: vec![],
    };
    for d in 0..=degree {
        for mono in Monomial::all_of_degree(dim, d) {
            let probe = PointProbe::new(center.clone(), order, &mono);
            let mut residuals = Vec::with_capacity(radii.len());
            for &t in radii {
                let spec = AverageSpec::new(ell, t, body)?;
                residuals.push(pointwise_difference(&probe, &spec)?);
            }
            let max_residual = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let entry = if d < 2 * ell {
                MonomialResidual {
                    exponents: mono.exponents.clone(),
                    max_residual,
                    slope: None,
                }
            } else {
                let slope = if mono.is_even() && d == 2 * ell {
                    let xs: Vec<f64> = radii.iter().map(|t| t.log2()).collect();
                    let ys: Vec<f64> = residuals.iter().map(|r| r.abs().log2()).collect();
                    Some(fit_line(&xs, &ys)?.slope)
                } else {
                    None
                };
                MonomialResidual {
                    exponents: mono.exponents.clone(),
                    max_residual,
                    slope,
                }
            };
            if d < 2 * ell {
                report.reproduced.push(entry);
            } else {
                report.top_degree.push(entry);
            }
        }
    }
    Ok(report)
}

/// Fit `log₂ max_probe |f − B_{ℓ,t}f|` against `log₂ t`. Residuals within a
/// few ulps of the payload scale mark the fit as degenerate.
pub fn taylor_decay_check(
    payload: &dyn Payload,
    ell: u32,
    radii: &[f64],
    probes: &[Vec<f64>],
    body: crate::body::BodySpec,
) -> Result<SlopeFit> {
    if probes.is_empty() {
        return Err(invalid("taylor decay check needs at least one probe"));
    }
    let order = ell as usize + 8;
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    let mut degenerate = false;
    for &t in radii {
        let spec = AverageSpec::new(ell, t, body)?;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for c in probes {
            let probe = PointProbe::new(c.clone(), order, payload);
            worst = worst.max(pointwise_difference(&probe, &spec)?.abs());
            scale = scale.max(payload.eval(c).abs());
        }
        if worst <= 1e-13 * scale.max(1.0) {
            degenerate = true;
        }
        xs.push(t.log2());
        ys.push(worst.max(f64::MIN_POSITIVE).log2());
    }
    let mut fit = fit_line(&xs, &ys)?;
    fit.degenerate = degenerate;
    Ok(fit)
}

/// `count` radii log-spaced over `[lo, hi]`.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1).max(1) as f64))
        .collect()
}
