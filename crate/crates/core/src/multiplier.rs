//! Radial multipliers of the ball averages.
//!
//! * `Î(s) = γ_n ∫₀¹ cos(us) (1−u²)^{(n−1)/2} du`, the transform of the
//!   normalised ball indicator;
//! * `m_ℓ(s) = −2/C(2ℓ,ℓ) Σ_{j=1}^{ℓ} (−1)^j C(2ℓ,ℓ−j) Î(js)`, the symbol of `B_{ℓ,t}`;
//! * `A_ℓ(s) = γ_n 4^ℓ/C(2ℓ,ℓ) ∫₀¹ (1−u²)^{(n−1)/2} sin(us/2)^{2ℓ} du = 1 − m_ℓ(s)`.
//!
//! The weight `(1−u²)^{(n−1)/2}` has a square-root endpoint for even `n`, so the
//! `[0,1]` rule is applied after the substitution `u = sin θ`, which turns every
//! integrand into the smooth `g(sin θ) cosⁿθ` on `[0, π/2]`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::body::{BodyKind, BodySpec};
use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureRule;
use crate::torus::{GridSpec, RadialSymbol};

/// Above this radius a rule needs at least `s` nodes.
pub const OSCILLATION_GUARD: f64 = 50.0;

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weights `w_j = −2/C(2ℓ,ℓ)·(−1)^j C(2ℓ,ℓ−j)`, `j = 1..=ℓ`, of the
/// combination `B_{ℓ,t} = Σ_j w_j B_{jt}`. They sum to 1.
pub fn average_weights(ell: u32) -> Vec<f64> {
    let c = binomial(2 * ell, ell);
    (1..=ell)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 / c * sign * binomial(2 * ell, ell - j)
        })
        .collect()
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(invalid(format!("dimension {dim} not in 1..=3")))
    }
}

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 {
        Err(invalid("average order ℓ must be at least 1"))
    } else {
        Ok(())
    }
}

fn guard(s: f64, rule: &QuadratureRule) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(invalid(format!("radius {s} must be finite and >= 0")));
    }
    if s > OSCILLATION_GUARD && (rule.node_count() as f64) < s {
        return Err(Error::QuadratureTooCoarse(format!(
            "radius {s} needs at least {} nodes, rule has {}",
            s.ceil(),
            rule.node_count()
        )));
    }
    Ok(())
}

/// `∫₀¹ g(u) (1−u²)^{(n−1)/2} du` evaluated as `∫₀^{π/2} g(sin θ) cosⁿθ dθ`.
fn weighted_integral(dim: usize, rule: &QuadratureRule, g: impl Fn(f64) -> f64) -> f64 {
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&u, &w)| {
            let theta = FRAC_PI_2 * u;
            let (sin, cos) = theta.sin_cos();
            w * g(sin) * cos.powi(dim as i32)
        })
        .sum::<f64>()
        * FRAC_PI_2
}

fn gamma_with(dim: usize, rule: &QuadratureRule) -> f64 {
    1.0 / weighted_integral(dim, rule, |_| 1.0)
}

/// `γ_n = [∫₀¹ (1−u²)^{(n−1)/2} du]^{−1}` by quadrature: 1, 4/π, 3/2.
pub fn gamma_n(dim: usize) -> Result<f64> {
    check_dim(dim)?;
    Ok(gamma_with(dim, &QuadratureRule::standard()))
}

/// Transform of the normalised indicator of the unit ball at radius `s`.
pub fn ball_hat(dim: usize, s: f64, rule: &QuadratureRule) -> Result<f64> {
    check_dim(dim)?;
    guard(s, rule)?;
    Ok(ball_hat_unchecked(dim, s, rule))
}

fn ball_hat_unchecked(dim: usize, s: f64, rule: &QuadratureRule) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    gamma_with(dim, rule) * weighted_integral(dim, rule, |u| (u * s).cos())
}

/// The difference multiplier `A_ℓ(s)`; exactly 0 at `s = 0`.
pub fn a_ell(ell: u32, dim: usize, s: f64, rule: &QuadratureRule) -> Result<f64> {
    check_ell(ell)?;
    check_dim(dim)?;
    guard(s, rule)?;
    Ok(a_ell_unchecked(ell, dim, s, rule))
}

fn a_ell_unchecked(ell: u32, dim: usize, s: f64, rule: &QuadratureRule) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let prefactor = gamma_with(dim, rule) * 4f64.powi(ell as i32) / binomial(2 * ell, ell);
    prefactor * weighted_integral(dim, rule, |u| (0.5 * u * s).sin().powi(2 * ell as i32))
}

/// The average symbol `m_ℓ(s)` as the signed binomial combination of `Î(js)`.
pub fn m_ell(ell: u32, dim: usize, s: f64, rule: &QuadratureRule) -> Result<f64> {
    check_ell(ell)?;
    check_dim(dim)?;
    guard(s, rule)?;
    Ok(m_ell_unchecked(ell, dim, s, rule))
}

fn m_ell_unchecked(ell: u32, dim: usize, s: f64, rule: &QuadratureRule) -> f64 {
    average_weights(ell)
        .iter()
        .enumerate()
        .map(|(i, w)| w * ball_hat_unchecked(dim, (i + 1) as f64 * s, rule))
        .sum()
}

/// `lim_{s→0} A_ℓ(s)/s^{2ℓ} = γ_n/C(2ℓ,ℓ) ∫₀¹ u^{2ℓ}(1−u²)^{(n−1)/2} du`.
pub fn a_ell_ratio_limit(ell: u32, dim: usize, rule: &QuadratureRule) -> Result<f64> {
    check_ell(ell)?;
    check_dim(dim)?;
    let moment = weighted_integral(dim, rule, |u| u.powi(2 * ell as i32));
    Ok(gamma_with(dim, rule) / binomial(2 * ell, ell) * moment)
}

/// `A_ℓ(s)/s^{2ℓ}`, extended to `s = 0` by its analytic limit.
pub fn a_ell_ratio(ell: u32, dim: usize, s: f64, rule: &QuadratureRule) -> Result<f64> {
    if s == 0.0 {
        return a_ell_ratio_limit(ell, dim, rule);
    }
    Ok(a_ell(ell, dim, s, rule)? / s.powi(2 * ell as i32))
}

/// `|4^ℓ sin(s/2)^{2ℓ} − [C(2ℓ,ℓ) + 2 Σ_{j=1}^{ℓ} (−1)^j C(2ℓ,ℓ−j) cos(js)]|`.
pub fn trig_identity_residual(ell: u32, s: f64) -> f64 {
    let lhs = 4f64.powi(ell as i32) * (0.5 * s).sin().powi(2 * ell as i32);
    let rhs = binomial(2 * ell, ell)
        + 2.0
            * (1..=ell)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(2 * ell, ell - j) * (j as f64 * s).cos()
                })
                .sum::<f64>();
    (lhs - rhs).abs()
}

/// Empirical bracket of `A_ℓ(s)/s^{2ℓ}` over a sampled interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub s_lo: f64,
    pub s_hi: f64,
    pub sample_count: usize,
    pub c1_hat: f64,
    pub c1_at: f64,
    pub c2_hat: f64,
    pub c2_at: f64,
    /// Whether the analytic `s → 0` limit entered the bracket.
    pub includes_limit: bool,
}

/// Sample `A_ℓ(s)/s^{2ℓ}` at `sample_count` equispaced points of `(s_lo, s_hi]`
/// (plus the analytic limit when `s_lo = 0`) and report the extremes.
pub fn certify_ratio_bounds(
    ell: u32,
    dim: usize,
    interval: (f64, f64),
    sample_count: usize,
) -> Result<BoundEstimate> {
    check_ell(ell)?;
    check_dim(dim)?;
    let (lo, hi) = interval;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) || sample_count == 0 {
        return Err(invalid(format!(
            "bad interval ({lo}, {hi}] or sample count {sample_count}"
        )));
    }
    let rule = QuadratureRule::for_frequency(ell as f64 * hi);
    let mut est = BoundEstimate {
        s_lo: lo,
        s_hi: hi,
        sample_count,
        c1_hat: f64::INFINITY,
        c1_at: f64::NAN,
        c2_hat: f64::NEG_INFINITY,
        c2_at: f64::NAN,
        includes_limit: lo == 0.0,
    };
    let mut record = |s: f64, r: f64| {
        if r < est.c1_hat {
            est.c1_hat = r;
            est.c1_at = s;
        }
        if r > est.c2_hat {
            est.c2_hat = r;
            est.c2_at = s;
        }
    };
    if lo == 0.0 {
        record(0.0, a_ell_ratio_limit(ell, dim, &rule)?);
    }
    for i in 1..=sample_count {
        let s = lo + (hi - lo) * i as f64 / sample_count as f64;
        let r = a_ell(ell, dim, s, &rule)? / s.powi(2 * ell as i32);
        if s <= 4.0 && !(r > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "A_{ell}(s)/s^{} = {r} is not positive at s = {s}",
                2 * ell
            )));
        }
        record(s, r);
    }
    Ok(est)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Transform of the normalised indicator of the cube `[-1,1]^n`: `Π sin(x_i)/x_i`.
pub fn cube_hat(x: &[f64]) -> f64 {
    x.iter().map(|&v| sinc(v)).product()
}

/// `m_{ℓ,K}` for the cube, via the separable closed form of `Î_K`.
pub fn m_ell_cube(ell: u32, x: &[f64]) -> f64 {
    let mut scaled = [0.0; 3];
    average_weights(ell)
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let j = (i + 1) as f64;
            for (d, &v) in x.iter().enumerate() {
                scaled[d] = j * v;
            }
            w * cube_hat(&scaled[..x.len()])
        })
        .sum()
}

/// `A_{ℓ,K}(x) = 4^ℓ/C(2ℓ,ℓ) ⨍_K sin(x·u/2)^{2ℓ} du`.
///
/// For the Euclidean ball this is `A_ℓ(|x|)`. For the cube it is a tensor
/// Gauss–Legendre sum over `[-1,1]^n` with the normalised measure.
pub fn a_ell_body(ell: u32, body: &BodySpec, x: &[f64], rule: &QuadratureRule) -> Result<f64> {
    check_ell(ell)?;
    if x.len() != body.dim {
        return Err(invalid(format!(
            "frequency vector has {} coordinates, body has dimension {}",
            x.len(),
            body.dim
        )));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    match body.kind {
        BodyKind::EuclideanBall => a_ell(ell, body.dim, norm, rule),
        BodyKind::Cube => {
            guard(norm, rule)?;
            if norm == 0.0 {
                return Ok(0.0);
            }
            let nodes: Vec<(f64, f64)> = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&u, &w)| (2.0 * u - 1.0, w))
                .collect();
            let power = 2 * ell as i32;
            let sum = match body.dim {
                1 => nodes
                    .iter()
                    .map(|&(v, w)| w * (0.5 * x[0] * v).sin().powi(power))
                    .sum::<f64>(),
                2 => nodes
                    .iter()
                    .map(|&(v1, w1)| {
                        w1 * nodes
                            .iter()
                            .map(|&(v2, w2)| w2 * (0.5 * (x[0] * v1 + x[1] * v2)).sin().powi(power))
                            .sum::<f64>()
                    })
                    .sum(),
                _ => nodes
                    .iter()
                    .map(|&(v1, w1)| {
                        w1 * nodes
                            .iter()
                            .map(|&(v2, w2)| {
                                w2 * nodes
                                    .iter()
                                    .map(|&(v3, w3)| {
                                        w3 * (0.5 * (x[0] * v1 + x[1] * v2 + x[2] * v3))
                                            .sin()
                                            .powi(power)
                                    })
                                    .sum::<f64>()
                            })
                            .sum::<f64>()
                    })
                    .sum(),
            };
            Ok(4f64.powi(ell as i32) / binomial(2 * ell, ell) * sum)
        }
    }
}

/// `count` unit vectors spread over the sphere `S^{n−1}`.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci lattice.
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
    }
}

/// Sampling plan for [`body_ratio_and_derivative_check`].
#[derive(Debug, Clone)]
pub struct BodyCheckPlan {
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// Radii at which the finite-difference gradient is taken.
    pub gradient_radii: Vec<f64>,
    /// Central-difference step relative to `|x|`; the check also runs at half this.
    pub relative_step: f64,
}

impl BodyCheckPlan {
    pub fn standard(dim: usize, directions: usize, radii: usize) -> Self {
        let radii_v: Vec<f64> = (1..=radii).map(|i| 4.0 * i as f64 / radii as f64).collect();
        let gradient_radii = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0].to_vec();
        Self {
            radii: radii_v,
            directions: sphere_directions(dim, directions),
            gradient_radii,
            relative_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyCheckReport {
    pub ratio_min: f64,
    pub ratio_min_at: Vec<f64>,
    pub ratio_max: f64,
    pub ratio_max_at: Vec<f64>,
    /// `max |∇A_{ℓ,K}(x)| / min(|x|^{2ℓ−1}, 1)` at the base step.
    pub gradient_constant: f64,
    /// Same at half the step.
    pub gradient_constant_half_step: f64,
    pub gradient_constant_relative_change: f64,
    pub samples: usize,
}

/// Empirical bracket for `A_{ℓ,K}(x)/|x|^{2ℓ}` and a finite-difference constant
/// for `|∇A_{ℓ,K}(x)| ≤ C min(|x|^{2ℓ−1}, 1)`.
pub fn body_ratio_and_derivative_check(
    ell: u32,
    body: &BodySpec,
    plan: &BodyCheckPlan,
    rule: &QuadratureRule,
) -> Result<BodyCheckReport> {
    check_ell(ell)?;
    if plan.radii.iter().any(|&r| !(r > 0.0 && r <= 4.0)) {
        return Err(invalid("radius grid must lie in (0, 4]"));
    }
    let power = 2 * ell as i32;
    let mut report = BodyCheckReport {
        ratio_min: f64::INFINITY,
        ratio_min_at: vec![],
        ratio_max: f64::NEG_INFINITY,
        ratio_max_at: vec![],
        gradient_constant: 0.0,
        gradient_constant_half_step: 0.0,
        gradient_constant_relative_change: 0.0,
        samples: 0,
    };
    for dir in &plan.directions {
        for &r in &plan.radii {
            let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
            let ratio = a_ell_body(ell, body, &x, rule)? / r.powi(power);
            if !(ratio > 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "A_{{ℓ,K}}(x)/|x|^{power} = {ratio} is not positive at {x:?}"
                )));
            }
            if ratio < report.ratio_min {
                report.ratio_min = ratio;
                report.ratio_min_at = x.clone();
            }
            if ratio > report.ratio_max {
                report.ratio_max = ratio;
                report.ratio_max_at = x;
            }
            report.samples += 1;
        }
    }
    let gradient_constant = |step: f64| -> Result<f64> {
        let mut c: f64 = 0.0;
        for dir in &plan.directions {
            for &r in &plan.gradient_radii {
                let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
                let h = step * r;
                let mut g2 = 0.0;
                for axis in 0..x.len() {
                    let mut plus = x.clone();
                    let mut minus = x.clone();
                    plus[axis] += h;
                    minus[axis] -= h;
                    let d = (a_ell_body(ell, body, &plus, rule)?
                        - a_ell_body(ell, body, &minus, rule)?)
                        / (2.0 * h);
                    g2 += d * d;
                }
                let bound = r.powi(power - 1).min(1.0);
                c = c.max(g2.sqrt() / bound);
            }
        }
        Ok(c)
    };
    report.gradient_constant = gradient_constant(plan.relative_step)?;
    report.gradient_constant_half_step = gradient_constant(0.5 * plan.relative_step)?;
    report.gradient_constant_relative_change =
        (report.gradient_constant - report.gradient_constant_half_step).abs()
            / report.gradient_constant_half_step;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    BallHat,
    AEll,
    MEll,
    Eta,
    AEllRatio,
}

impl std::str::FromStr for MultiplierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "ball_hat" => Ok(Self::BallHat),
            "a_ell" => Ok(Self::AEll),
            "m_ell" => Ok(Self::MEll),
            "eta" => Ok(Self::Eta),
            "a_ell_ratio" => Ok(Self::AEllRatio),
            _ => Err(invalid(format!("unknown multiplier kind '{s}'"))),
        }
    }
}

/// Tabulated radial multiplier `μ(t·√key)` keyed by exact squared integer
/// magnitude `key = |m|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMultiplierTable {
    pub kind: MultiplierKind,
    pub ell: u32,
    pub dim: usize,
    pub gamma_n: f64,
    /// Dilation `t`: the entry for `key` is the multiplier at radius `t·√key`.
    pub scale: f64,
    entries: BTreeMap<u64, f64>,
    /// Largest node count any entry was computed with.
    pub max_nodes: usize,
}

impl RadialMultiplierTable {
    /// Evaluate `kind` at every key. Each entry uses a Gauss–Legendre rule
    /// sized to its own oscillation frequency (never below 64 nodes).
    pub fn tabulate(
        kind: MultiplierKind,
        ell: u32,
        dim: usize,
        scale: f64,
        keys: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        check_ell(ell)?;
        check_dim(dim)?;
        if kind == MultiplierKind::Eta {
            return Err(invalid(
                "eta tables depend on a filter bank; build them with FilterBank::eta_table",
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("table scale {scale} must be positive")));
        }
        let mut entries = BTreeMap::new();
        let mut max_nodes = 0;
        for key in keys {
            if entries.contains_key(&key) {
                continue;
            }
            let s = scale * (key as f64).sqrt();
            let omega = match kind {
                MultiplierKind::BallHat => s,
                _ => ell as f64 * s,
            };
            let rule = QuadratureRule::for_frequency(omega);
            max_nodes = max_nodes.max(rule.node_count());
            let value = match kind {
                MultiplierKind::BallHat => ball_hat(dim, s, &rule)?,
                MultiplierKind::AEll => a_ell(ell, dim, s, &rule)?,
                MultiplierKind::MEll => m_ell(ell, dim, s, &rule)?,
                MultiplierKind::AEllRatio => a_ell_ratio(ell, dim, s, &rule)?,
                MultiplierKind::Eta => unreachable!(),
            };
            entries.insert(key, value);
        }
        Ok(Self {
            kind,
            ell,
            dim,
            gamma_n: gamma_n(dim)?,
            scale,
            entries,
            max_nodes,
        })
    }

    /// One entry per distinct `|m|²` on `grid`, at dilation `scale`.
    pub fn for_grid(kind: MultiplierKind, ell: u32, grid: &GridSpec, scale: f64) -> Result<Self> {
        let mut keys = grid.squared_magnitudes();
        keys.sort_unstable();
        keys.dedup();
        Self::tabulate(kind, ell, grid.dim(), scale, keys)
    }

    /// Equispaced radii `0, ds, 2ds, …, (count−1)ds`.
    pub fn uniform(
        kind: MultiplierKind,
        ell: u32,
        dim: usize,
        ds: f64,
        count: usize,
    ) -> Result<Self> {
        Self::tabulate(kind, ell, dim, ds, (0..count as u64).map(|i| i * i))
    }

    /// Wrap precomputed values (used for filter-dependent kinds).
    pub fn from_entries(
        kind: MultiplierKind,
        ell: u32,
        dim: usize,
        scale: f64,
        entries: BTreeMap<u64, f64>,
    ) -> Result<Self> {
        Ok(Self {
            kind,
            ell,
            dim,
            gamma_n: gamma_n(dim)?,
            scale,
            entries,
            max_nodes: 0,
        })
    }

    pub fn get(&self, key: u64) -> Option<f64> {
        self.entries.get(&key).copied()
    }

    pub fn radius(&self, key: u64) -> f64 {
        self.scale * (key as f64).sqrt()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(radius, value)` pairs in increasing radius.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (self.radius(k), v))
    }

    /// Two-column CSV `radius,value`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["radius", "value"]).map_err(fmt)?;
        for (r, v) in self.iter() {
            w.write_record([format!("{r:.17e}"), format!("{v:.17e}")])
                .map_err(fmt)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

impl RadialSymbol for RadialMultiplierTable {
    fn value_at_squared(&self, m2: u64) -> Result<f64> {
        self.get(m2).ok_or(Error::MultiplierUndefined(m2))
    }
}
