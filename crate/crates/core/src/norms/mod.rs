//! Besov and Triebel–Lizorkin norms on a truncated dyadic scale range,
//! built from either the Littlewood–Paley bands `φ_{2^{−k}} ∗ f` (classical)
//! or the ball differences `f − B_{ℓ,2^{−k}} f` (ball).

pub mod hardy;
pub mod maximal;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::averaging::periodic_body_means;
use crate::body::{BodyKind, BodySpec};
use crate::error::{invalid, Error, Result};
use crate::filter_bank::FilterBank;
use crate::multiplier::{m_ell_cube, MultiplierKind, RadialMultiplierTable};
use crate::torus::{
    apply_multiplier, apply_radial_multiplier, forward_transform, inverse_transform,
    lp_norm_of_magnitudes, Exponent, GridSpec, RadialProfile, SampledField, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Besov,
    TriebelLizorkin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Classical,
    Ball,
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "besov" => Ok(Space::Besov),
            "tl" | "triebel_lizorkin" | "triebel-lizorkin" => Ok(Space::TriebelLizorkin),
            _ => Err(invalid(format!("unknown space '{s}'"))),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Method::Classical),
            "ball" => Ok(Method::Ball),
            _ => Err(invalid(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Besov => "besov",
            Space::TriebelLizorkin => "triebel_lizorkin",
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Classical => "classical",
            Method::Ball => "ball",
        })
    }
}

/// Inclusive dyadic range `k_min..=k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub k_min: i32,
    pub k_max: i32,
}

impl ScaleRange {
    pub fn new(k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(invalid(format!("empty scale range {k_min}..={k_max}")));
        }
        Ok(Self { k_min, k_max })
    }

    pub fn scales(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    /// Both ends moved outward by `by`.
    pub fn widened(&self, by: i32) -> Self {
        Self {
            k_min: self.k_min - by,
            k_max: self.k_max + by,
        }
    }
}

/// Smallest `k ≥ 0` with `ℓ 2^{−k} < π`.
pub fn ball_k_min(ell: u32) -> i32 {
    let mut k = 0;
    while ell as f64 * 2f64.powi(-k) >= std::f64::consts::PI {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub space: Space,
    pub homogeneous: bool,
    pub alpha: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub ell: u32,
    pub method: Method,
    /// `None` selects the default range for the grid.
    pub range: Option<ScaleRange>,
    pub body: BodyKind,
    /// Centre stride of the `p = ∞` Triebel–Lizorkin sweep.
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl NormParams {
    pub fn new(
        space: Space,
        method: Method,
        alpha: f64,
        p: Exponent,
        q: Exponent,
        ell: u32,
    ) -> Self {
        Self {
            space,
            homogeneous: true,
            alpha,
            p,
            q,
            ell,
            method,
            range: None,
            body: BodyKind::EuclideanBall,
            stride: 1,
        }
    }

    pub fn inhomogeneous(mut self) -> Self {
        self.homogeneous = false;
        self
    }

    pub fn with_range(mut self, range: ScaleRange) -> Self {
        self.range = Some(range);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 {
            return Err(invalid("ℓ must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!(
                "smoothness α = {} must be positive",
                self.alpha
            )));
        }
        if self.method == Method::Ball && self.alpha >= 2.0 * self.ell as f64 {
            return Err(invalid(format!(
                "ball method needs α < 2ℓ, got α = {} with ℓ = {}",
                self.alpha, self.ell
            )));
        }
        if let Exponent::Finite(p) = self.p {
            if !(p > 1.0) {
                return Err(invalid(format!("p = {p} must exceed 1")));
            }
        }
        match (self.space, self.q) {
            (_, Exponent::Finite(q)) if !(q > 0.0) => {
                return Err(invalid(format!("q = {q} must be positive")))
            }
            (Space::TriebelLizorkin, Exponent::Finite(q)) if q <= 1.0 => {
                return Err(invalid(format!(
                    "Triebel–Lizorkin norms need q > 1, got {q}"
                )))
            }
            _ => {}
        }
        if self.stride == 0 {
            return Err(invalid("stride must be at least 1"));
        }
        Ok(())
    }

    /// Lowest admissible scale for the method and homogeneity.
    pub fn lowest_scale(&self) -> i32 {
        match (self.method, self.homogeneous) {
            (Method::Classical, _) => 0,
            (Method::Ball, true) => ball_k_min(self.ell),
            (Method::Ball, false) => ball_k_min(self.ell).max(1),
        }
    }

    /// Default: lowest admissible scale up to two octaves below Nyquist.
    pub fn default_range(&self, grid: &GridSpec) -> Result<ScaleRange> {
        ScaleRange::new(self.lowest_scale(), grid.nyquist_level() - 2).map_err(|_| {
            Error::InsufficientScales(format!(
                "grid with N = {} leaves no scales",
                grid.samples_per_axis()
            ))
        })
    }

    pub fn resolved_range(&self, grid: &GridSpec) -> Result<ScaleRange> {
        let range = match self.range {
            Some(r) => r,
            None => return self.default_range(grid),
        };
        ScaleRange::new(range.k_min, range.k_max)?;
        if range.k_max > grid.nyquist_level() {
            return Err(invalid(format!(
                "k_max = {} exceeds the Nyquist level {}",
                range.k_max,
                grid.nyquist_level()
            )));
        }
        if self.method == Method::Ball && range.k_min < ball_k_min(self.ell) {
            return Err(Error::RadiusOutOfRange(format!(
                "ℓ·2^{{−k_min}} = {} must stay below π",
                self.ell as f64 * 2f64.powi(-range.k_min)
            )));
        }
        if !self.homogeneous && range.k_min < self.lowest_scale() {
            return Err(invalid(format!(
                "inhomogeneous {} norms start at k = {}",
                self.method,
                self.lowest_scale()
            )));
        }
        Ok(range)
    }
}

/// One dyadic summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub k: i32,
    /// `2^{kα} ‖F_k‖_p`.
    pub summand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub params: NormParams,
    pub range: ScaleRange,
    pub per_scale: Vec<ScaleRecord>,
    /// The separate `‖f‖_{L^p}` term of the inhomogeneous ball norms.
    pub lp_term: Option<f64>,
    pub aggregate: f64,
    /// `p = ∞` Triebel–Lizorkin: scales `m` whose balls were admissible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_scales: Option<Vec<i32>>,
    /// `p = ∞` Triebel–Lizorkin: scales dropped for spanning fewer than 4 cells.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub excluded_scales: Vec<i32>,
}

impl NormReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// `k,summand,space,method,alpha,p,q,ell` rows.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["k", "summand", "space", "method", "alpha", "p", "q", "ell"])
            .map_err(fmt)?;
        for r in &self.per_scale {
            w.write_record([
                r.k.to_string(),
                format!("{:.17e}", r.summand),
                self.params.space.to_string(),
                self.params.method.to_string(),
                self.params.alpha.to_string(),
                self.params.p.to_string(),
                self.params.q.to_string(),
                self.params.ell.to_string(),
            ])
            .map_err(fmt)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// `F_k`: the band `φ_{2^{−k}} ∗ f` (with `Φ` at `k = 0` for inhomogeneous
/// classical norms) or the ball difference `f − B_{ℓ,2^{−k}} f`.
pub fn scale_field(spectrum: &SpectralField, k: i32, params: &NormParams) -> Result<SampledField> {
    let grid = spectrum.grid();
    let out = match params.method {
        Method::Classical => {
            let s = 2f64.powi(-k);
            if !params.homogeneous && k == 0 {
                apply_radial_multiplier(spectrum, &RadialProfile(FilterBank::big_phi_hat))?
            } else {
                apply_radial_multiplier(spectrum, &RadialProfile(|r| FilterBank::phi_hat(s * r)))?
            }
        }
        Method::Ball => {
            let t = 2f64.powi(-k);
            match params.body {
                BodyKind::EuclideanBall => {
                    let table =
                        RadialMultiplierTable::for_grid(MultiplierKind::AEll, params.ell, grid, t)?;
                    apply_radial_multiplier(spectrum, &table)?
                }
                BodyKind::Cube => apply_multiplier(spectrum, |m| {
                    let x: Vec<f64> = m.iter().map(|&v| t * v as f64).collect();
                    1.0 - m_ell_cube(params.ell, &x)
                }),
            }
        }
    };
    Ok(inverse_transform(&out))
}

/// Per-scale magnitudes `|F_k|` over the range.
fn scale_magnitudes(
    f: &SampledField,
    params: &NormParams,
    range: &ScaleRange,
) -> Result<Vec<(i32, Vec<f64>)>> {
    let spectrum = forward_transform(f);
    range
        .scales()
        .map(|k| Ok((k, scale_field(&spectrum, k, params)?.abs_values())))
        .collect()
}

fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

fn lp_term(f: &SampledField, params: &NormParams) -> Result<Option<f64>> {
    if params.method == Method::Ball && !params.homogeneous {
        Ok(Some(lp_norm_of_magnitudes(
            &f.abs_values(),
            f.grid(),
            params.p,
        )?))
    } else {
        Ok(None)
    }
}

/// `[Σ_k (2^{kα} ‖F_k‖_p)^q]^{1/q}` (max over `k` for `q = ∞`), plus
/// `‖f‖_p` for the inhomogeneous ball form.
pub fn besov_norm(f: &SampledField, params: &NormParams) -> Result<NormReport> {
    params.validate()?;
    let grid = *f.grid();
    let range = params.resolved_range(&grid)?;
    let mut per_scale = Vec::new();
    for (k, mags) in scale_magnitudes(f, params, &range)? {
        let norm = lp_norm_of_magnitudes(&mags, &grid, params.p)?;
        per_scale.push(ScaleRecord {
            k,
            summand: check_finite(2f64.powf(k as f64 * params.alpha) * norm, "scale summand")?,
        });
    }
    let lp = lp_term(f, params)?;
    let aggregate = params.q.aggregate(per_scale.iter().map(|r| r.summand)) + lp.unwrap_or(0.0);
    Ok(NormReport {
        params: params.clone(),
        range,
        per_scale,
        lp_term: lp,
        aggregate: check_finite(aggregate, "norm")?,
        sup_scales: None,
        excluded_scales: vec![],
    })
}

/// Triebel–Lizorkin norm. For `p < ∞`, the `L^p` norm of the pointwise
/// `ℓ^q` aggregate. For `p = ∞`, the supremum over centres `x` and admissible
/// `m` of `(⨍_{B(x,2^{−m})} Σ_{k≥m} 2^{kαq} |F_k|^q)^{1/q}`.
pub fn tl_norm(f: &SampledField, params: &NormParams) -> Result<NormReport> {
    params.validate()?;
    let grid = *f.grid();
    let range = params.resolved_range(&grid)?;
    let fields = scale_magnitudes(f, params, &range)?;
    let weight = |k: i32| 2f64.powf(k as f64 * params.alpha);
    let per_scale = fields
        .iter()
        .map(|(k, mags)| {
            Ok(ScaleRecord {
                k: *k,
                summand: weight(*k) * lp_norm_of_magnitudes(mags, &grid, params.p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lp = lp_term(f, params)?;
    let mut report = NormReport {
        params: params.clone(),
        range,
        per_scale,
        lp_term: lp,
        aggregate: 0.0,
        sup_scales: None,
        excluded_scales: vec![],
    };
    let inner = match params.p {
        Exponent::Finite(_) => {
            let mut pointwise = vec![0.0; grid.len()];
            match params.q {
                Exponent::Infinity => {
                    for (k, mags) in &fields {
                        let w = weight(*k);
                        for (acc, m) in pointwise.iter_mut().zip(mags) {
                            *acc = f64::max(*acc, w * m);
                        }
                    }
                }
                Exponent::Finite(q) => {
                    for (k, mags) in &fields {
                        let w = weight(*k);
                        for (acc, m) in pointwise.iter_mut().zip(mags) {
                            *acc += (w * m).powf(q);
                        }
                    }
                    pointwise.iter_mut().for_each(|v| *v = v.powf(1.0 / q));
                }
            }
            lp_norm_of_magnitudes(&pointwise, &grid, params.p)?
        }
        Exponent::Infinity => {
            let (value, used, excluded) = tl_sup(&fields, &grid, params, weight)?;
            report.sup_scales = Some(used);
            report.excluded_scales = excluded;
            value
        }
    };
    report.aggregate = check_finite(inner + lp.unwrap_or(0.0), "norm")?;
    Ok(report)
}

/// The `p = ∞` Carleson-type supremum.
fn tl_sup(
    fields: &[(i32, Vec<f64>)],
    grid: &GridSpec,
    params: &NormParams,
    weight: impl Fn(i32) -> f64,
) -> Result<(f64, Vec<i32>, Vec<i32>)> {
    let h = grid.spacing();
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for &(m, _) in fields {
        if 2f64.powi(-m) >= 4.0 * h {
            used.push(m);
        } else {
            excluded.push(m);
        }
    }
    if used.is_empty() {
        return Err(Error::InsufficientScales(
            "no scale m has a ball spanning 4 grid cells".into(),
        ));
    }
    if let Exponent::Infinity = params.q {
        // sup over y and k ≥ m of 2^{kα}|F_k(y)|: the centre sweep is implied.
        let m0 = used[0];
        let best = fields
            .iter()
            .filter(|(k, _)| *k >= m0)
            .map(|(k, mags)| weight(*k) * mags.iter().copied().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        return Ok((best, used, excluded));
    }
    let q = params.q.value();
    let centres = strided_centres(grid, params.stride);
    let mut tail = vec![0.0; grid.len()];
    let mut best: f64 = 0.0;
    // Accumulate tails from the finest scale down.
    for (k, mags) in fields.iter().rev() {
        let w = weight(*k);
        for (acc, v) in tail.iter_mut().zip(mags) {
            *acc += (w * v).powf(q);
        }
        if used.contains(k) {
            let means = periodic_body_means(&tail, grid, 2f64.powi(-k), params.body);
            let local = centres.iter().map(|&i| means[i]).fold(0.0, f64::max);
            best = best.max(local.powf(1.0 / q));
        }
    }
    Ok((best, used, excluded))
}

fn strided_centres(grid: &GridSpec, stride: usize) -> Vec<usize> {
    let mut idx = vec![0usize; grid.dim()];
    (0..grid.len())
        .filter(|&flat| {
            grid.multi_index(flat, &mut idx);
            idx.iter().all(|i| i % stride == 0)
        })
        .collect()
}

/// Dispatch on `params.space`.
pub fn norm(f: &SampledField, params: &NormParams) -> Result<NormReport> {
    match params.space {
        Space::Besov => besov_norm(f, params),
        Space::TriebelLizorkin => tl_norm(f, params),
    }
}

/// Body spec matching a norm's body kind on a grid.
pub fn body_for(params: &NormParams, grid: &GridSpec) -> BodySpec {
    BodySpec {
        kind: params.body,
        dim: grid.dim(),
    }
}
