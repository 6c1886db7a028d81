//! Test functions of known smoothness, dyadic decay fits and the
//! ball-versus-classical ratio studies.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::averaging::{ball_difference, AverageSpec};
use crate::body::BodySpec;
use crate::error::{invalid, Error, Result};
use crate::filter_bank::FilterBank;
pub use crate::fit::{fit_line, SlopeFit};
use crate::norms::{ball_k_min, norm, Method, NormParams, ScaleRange};
use crate::torus::{inverse_transform, lp_norm, Exponent, GridSpec, SampledField, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Weierstrass,
    BandBump,
    PowerSpectrum,
    SmoothReference,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "weierstrass" => Ok(Family::Weierstrass),
            "band_bump" => Ok(Family::BandBump),
            "power_spectrum" => Ok(Family::PowerSpectrum),
            "smooth_reference" => Ok(Family::SmoothReference),
            _ => Err(invalid(format!("unknown family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub family: Family,
    pub alpha: f64,
    /// Top lacunary level of the Weierstrass sum; `None` ties it to `log₂(N/2)`.
    pub levels: Option<u32>,
    /// Band centre `2^{k₀}` of the bump.
    pub k0: u32,
    pub seed: u64,
    /// Largest `|m|` carried by the power-spectrum family; `None` means `N/2 − 1`.
    pub band_cap: Option<u64>,
    pub grid: GridSpec,
}

impl TestFunctionSpec {
    pub fn weierstrass(alpha: f64, levels: Option<u32>, grid: GridSpec) -> Self {
        Self {
            family: Family::Weierstrass,
            alpha,
            levels,
            k0: 0,
            seed: 0,
            band_cap: None,
            grid,
        }
    }

    pub fn band_bump(k0: u32, grid: GridSpec) -> Self {
        Self {
            family: Family::BandBump,
            alpha: 1.0,
            levels: None,
            k0,
            seed: 0,
            band_cap: None,
            grid,
        }
    }

    pub fn power_spectrum(alpha: f64, seed: u64, band_cap: Option<u64>, grid: GridSpec) -> Self {
        Self {
            family: Family::PowerSpectrum,
            alpha,
            levels: None,
            k0: 0,
            seed,
            band_cap,
            grid,
        }
    }

    pub fn smooth_reference(grid: GridSpec) -> Self {
        Self {
            family: Family::SmoothReference,
            alpha: 1.0,
            levels: None,
            k0: 0,
            seed: 0,
            band_cap: None,
            grid,
        }
    }

    /// Same function on another grid.
    pub fn on_grid(&self, grid: GridSpec) -> Self {
        Self {
            grid,
            ..self.clone()
        }
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::Weierstrass => {
                format!("weierstrass(alpha={}, J={})", self.alpha, self.top_level())
            }
            Family::BandBump => format!("band_bump(k0={})", self.k0),
            Family::PowerSpectrum => format!(
                "power_spectrum(alpha={}, seed={}, cap={})",
                self.alpha,
                self.seed,
                self.cap()
            ),
            Family::SmoothReference => "smooth_reference".into(),
        }
    }

    fn top_level(&self) -> u32 {
        self.levels
            .unwrap_or(self.grid.nyquist_level().max(0) as u32)
    }

    fn cap(&self) -> u64 {
        self.band_cap
            .unwrap_or(self.grid.samples_per_axis() as u64 / 2 - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("α = {} must be positive", self.alpha)));
        }
        let half = (self.grid.samples_per_axis() / 2) as u64;
        match self.family {
            Family::Weierstrass if 1u64 << self.top_level() > half => Err(invalid(format!(
                "2^J = {} exceeds the Nyquist frequency {half}",
                1u64 << self.top_level()
            ))),
            Family::BandBump if 1u64 << (self.k0 + 1) > half => Err(invalid(format!(
                "band edge 2^{{k₀+1}} = {} exceeds the Nyquist frequency {half}",
                1u64 << (self.k0 + 1)
            ))),
            Family::PowerSpectrum if self.cap() >= half || self.cap() == 0 => Err(invalid(
                format!("band cap {} must lie in 1..{half}", self.cap()),
            )),
            _ => Ok(()),
        }
    }
}

/// Realise a test function on its grid. Deterministic in the spec.
pub fn generate(spec: &TestFunctionSpec) -> Result<SampledField> {
    spec.validate()?;
    let grid = spec.grid;
    match spec.family {
        Family::Weierstrass => {
            let levels = spec.top_level();
            let alpha = spec.alpha;
            Ok(SampledField::from_fn(grid, move |x| {
                (0..=levels)
                    .map(|j| 2f64.powf(-(j as f64) * alpha) * (2f64.powi(j as i32) * x[0]).cos())
                    .sum()
            }))
        }
        Family::SmoothReference => Ok(SampledField::from_fn(grid, |x| x[0].cos())),
        Family::BandBump => {
            let scale = 2f64.powi(-(spec.k0 as i32));
            let m2 = grid.squared_magnitudes();
            let coefficients = m2
                .iter()
                .map(|&k| Complex64::new(FilterBank::phi_hat(scale * (k as f64).sqrt()), 0.0))
                .collect();
            let spectrum = SpectralField::new(grid, coefficients)?.assume_real();
            real_field(inverse_transform(&spectrum))
        }
        Family::PowerSpectrum => {
            let cap = spec.cap() as i64;
            let dim = grid.dim();
            let decay = spec.alpha + dim as f64 / 2.0;
            let mut spectrum = SpectralField::zeros(grid);
            spectrum.set(&vec![0; dim], Complex64::new(1.0, 0.0));
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            // Canonical order over the cube [−cap, cap]^n, independent of N.
            let side = (2 * cap + 1) as usize;
            let mut m = vec![0i64; dim];
            for flat in 0..side.pow(dim as u32) {
                let mut rest = flat;
                for slot in m.iter_mut().rev() {
                    *slot = (rest % side) as i64 - cap;
                    rest /= side;
                }
                let first = m.iter().copied().find(|&v| v != 0);
                if !matches!(first, Some(v) if v > 0) {
                    continue;
                }
                let r = (m.iter().map(|v| v * v).sum::<i64>() as f64).sqrt();
                let theta = rng.gen::<f64>() * 2.0 * PI;
                if r > cap as f64 {
                    continue;
                }
                let c = Complex64::from_polar((1.0 + r).powf(-decay), theta);
                spectrum.set(&m, c);
                let neg: Vec<i64> = m.iter().map(|v| -v).collect();
                spectrum.set(&neg, c.conj());
            }
            real_field(inverse_transform(&spectrum.assume_real()))
        }
    }
}

fn real_field(f: SampledField) -> Result<SampledField> {
    SampledField::from_real(*f.grid(), f.real_parts())
}

/// The slope window: the default norm range for `ℓ` minus the two outermost
/// scales at each end.
pub fn slope_window(grid: &GridSpec, ell: u32) -> Result<ScaleRange> {
    let lo = ball_k_min(ell) + 2;
    let hi = grid.nyquist_level() - 4;
    if hi - lo + 1 < 4 {
        return Err(Error::InsufficientScales(format!(
            "grid with N = {} leaves {} scales for a slope fit",
            grid.samples_per_axis(),
            (hi - lo + 1).max(0)
        )));
    }
    ScaleRange::new(lo, hi)
}

/// `(k, ‖f − B_{ℓ,2^{−k}} f‖_p)` over the window.
pub fn decay_series(
    f: &SampledField,
    ell: u32,
    p: Exponent,
    window: ScaleRange,
) -> Result<Vec<(i32, f64)>> {
    let grid = f.grid();
    if window.k_min < ball_k_min(ell) || window.k_max > grid.nyquist_level() {
        return Err(invalid(format!(
            "window {}..={} outside the admissible scales",
            window.k_min, window.k_max
        )));
    }
    let body = BodySpec::ball(grid.dim());
    window
        .scales()
        .map(|k| {
            let spec = AverageSpec::new(ell, 2f64.powi(-k), body)?;
            Ok((k, lp_norm(&ball_difference(f, &spec)?, p)?))
        })
        .collect()
}

/// Least-squares slope of `log₂ ‖f − B_{ℓ,2^{−k}} f‖_p` against `k`.
pub fn decay_slope(
    f: &SampledField,
    ell: u32,
    p: Exponent,
    window: ScaleRange,
) -> Result<SlopeFit> {
    if window.k_max - window.k_min + 1 < 4 {
        return Err(Error::InsufficientScales(
            "slope window shorter than 4 scales".into(),
        ));
    }
    let series = decay_series(f, ell, p, window)?;
    let floor = 1e-13 * f.max_abs();
    let xs: Vec<f64> = series.iter().map(|&(k, _)| k as f64).collect();
    let ys: Vec<f64> = series
        .iter()
        .map(|&(_, d)| d.max(f64::MIN_POSITIVE).log2())
        .collect();
    let mut fit = fit_line(&xs, &ys)?;
    fit.degenerate = series.iter().any(|&(_, d)| d <= floor);
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub label: String,
    pub ball: f64,
    pub classical: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStudy {
    pub params: NormParams,
    pub samples_per_axis: Option<usize>,
    pub entries: Vec<RatioEntry>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

impl RatioStudy {
    /// `max/min`, the multiplicative width of the bracket.
    pub fn width(&self) -> Option<f64> {
        Some(self.max_ratio? / self.min_ratio?)
    }
}

/// Ball-method and classical norms of every family member with identical
/// `(α, p, q, range)`; `params.method` is ignored.
pub fn equivalence_study(family: &[TestFunctionSpec], params: &NormParams) -> Result<RatioStudy> {
    let mut entries = Vec::with_capacity(family.len());
    let mut ball_params = params.clone();
    ball_params.method = Method::Ball;
    let mut classical_params = params.clone();
    classical_params.method = Method::Classical;
    for spec in family {
        let f = generate(spec)?;
        let ball = norm(&f, &ball_params)?.aggregate;
        let classical = norm(&f, &classical_params)?.aggregate;
        let ratio = ball / classical;
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::NonFinite(format!(
                "ratio {ratio} for {} (ball {ball}, classical {classical})",
                spec.label()
            )));
        }
        entries.push(RatioEntry {
            label: spec.label(),
            ball,
            classical,
            ratio,
        });
    }
    let min_ratio = entries.iter().map(|e| e.ratio).reduce(f64::min);
    let max_ratio = entries.iter().map(|e| e.ratio).reduce(f64::max);
    Ok(RatioStudy {
        params: params.clone(),
        samples_per_axis: family.first().map(|s| s.grid.samples_per_axis()),
        entries,
        min_ratio,
        max_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketDrift {
    pub coarse: RatioStudy,
    pub fine: RatioStudy,
    pub min_change: f64,
    pub max_change: f64,
    pub width_change: f64,
}

impl BracketDrift {
    pub fn worst_change(&self) -> f64 {
        self.min_change.max(self.max_change).max(self.width_change)
    }
}

/// Run the study on `family` and on the same functions at `2N`.
pub fn equivalence_drift(family: &[TestFunctionSpec], params: &NormParams) -> Result<BracketDrift> {
    if family.is_empty() {
        return Err(invalid("bracket drift needs a non-empty family"));
    }
    let coarse = equivalence_study(family, params)?;
    let fine_family: Vec<TestFunctionSpec> = family
        .iter()
        .map(|s| GridSpec::new(s.grid.dim(), 2 * s.grid.samples_per_axis()).map(|g| s.on_grid(g)))
        .collect::<Result<_>>()?;
    let fine = equivalence_study(&fine_family, params)?;
    let rel = |a: f64, b: f64| (b - a).abs() / a;
    let (c_lo, c_hi) = (coarse.min_ratio.unwrap(), coarse.max_ratio.unwrap());
    let (f_lo, f_hi) = (fine.min_ratio.unwrap(), fine.max_ratio.unwrap());
    Ok(BracketDrift {
        min_change: rel(c_lo, f_lo),
        max_change: rel(c_hi, f_hi),
        width_change: rel(c_hi / c_lo, f_hi / f_lo),
        coarse,
        fine,
    })
}

/// The band-limited standard family: every member's spectrum lies in `|m| ≤ 32`.
pub fn standard_family(grid: GridSpec) -> Vec<TestFunctionSpec> {
    let mut family: Vec<TestFunctionSpec> = [0.5, 1.5, 2.5]
        .iter()
        .map(|&b| TestFunctionSpec::weierstrass(b, Some(5), grid))
        .collect();
    family.push(TestFunctionSpec::band_bump(2, grid));
    family.push(TestFunctionSpec::band_bump(3, grid));
    family.push(TestFunctionSpec::power_spectrum(1.0, 1, Some(32), grid));
    family.push(TestFunctionSpec::power_spectrum(1.0, 2, Some(32), grid));
    family.push(TestFunctionSpec::smooth_reference(grid));
    family
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub samples_per_axis: usize,
    pub norm: f64,
    /// Relative change from the previous row.
    pub change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTable {
    pub label: String,
    pub rows: Vec<RefinementRow>,
    /// Set when a successive change grew with `N`.
    pub growing: bool,
}

/// Recompute one norm of `spec` at each `N` in `sizes` (ascending).
pub fn refinement_study(
    spec: &TestFunctionSpec,
    params: &NormParams,
    sizes: &[usize],
) -> Result<RefinementTable> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("refinement sizes must ascend"));
    }
    let mut rows: Vec<RefinementRow> = Vec::new();
    for &n in sizes {
        let grid = GridSpec::new(spec.grid.dim(), n)?;
        let value = norm(&generate(&spec.on_grid(grid))?, params)?.aggregate;
        let change = rows
            .last()
            .map(|r| (value - r.norm).abs() / r.norm.abs().max(f64::MIN_POSITIVE));
        rows.push(RefinementRow {
            samples_per_axis: n,
            norm: value,
            change,
        });
    }
    let changes: Vec<f64> = rows.iter().filter_map(|r| r.change).collect();
    let growing = changes
        .windows(2)
        .any(|w| w[1] > w[0] * (1.0 + 1e-9) && w[1] > 1e-12);
    Ok(RefinementTable {
        label: spec.label(),
        rows,
        growing,
    })
}

/// `(scale, value)` pairs of a study as CSV rows.
pub fn write_series_csv(
    header: [&str; 2],
    rows: &BTreeMap<i64, f64>,
    out: impl std::io::Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fmt)?;
    for (k, v) in rows {
        w.write_record([k.to_string(), format!("{v:.17e}")])
            .map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::Space;
    use crate::torus::forward_transform;

    #[test]
    fn weierstrass_single_term() {
        let grid = GridSpec::new(1, 64).unwrap();
        let f = generate(&TestFunctionSpec::weierstrass(1.0, Some(0), grid)).unwrap();
        let c = SampledField::from_fn(grid, |x| x[0].cos());
        assert!(f.max_abs_difference(&c) < 1e-15);
        assert!(generate(&TestFunctionSpec::weierstrass(1.0, Some(6), grid)).is_err());
        assert!(generate(&TestFunctionSpec::weierstrass(1.0, None, grid)).is_ok());
    }

    #[test]
    fn band_bump_support() {
        let grid = GridSpec::new(1, 128).unwrap();
        let f = generate(&TestFunctionSpec::band_bump(4, grid)).unwrap();
        let s = forward_transform(&f);
        for i in 0..grid.len() {
            let m = grid.frequency(i).abs();
            if !(8..=32).contains(&m) {
                assert!(s.coefficients()[i].norm() < 1e-15, "m={m}");
            }
        }
        assert!((s.at(&[16]).re - 1.0).abs() < 1e-14);
        assert!(generate(&TestFunctionSpec::band_bump(6, grid)).is_err());
    }

    #[test]
    fn power_spectrum_deterministic_and_grid_independent() {
        let g1 = GridSpec::new(1, 128).unwrap();
        let g2 = GridSpec::new(1, 256).unwrap();
        let spec = TestFunctionSpec::power_spectrum(1.0, 7, Some(32), g1);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate(&spec.on_grid(g2)).unwrap();
        let (sa, sc) = (forward_transform(&a), forward_transform(&c));
        for m in -40..=40 {
            assert!((sa.at(&[m]) - sc.at(&[m])).norm() < 1e-14);
        }
        assert!((sa.at(&[3]).norm() - 4f64.powf(-1.5)).abs() < 1e-14);
        assert!(sa.at(&[33]).norm() < 1e-15);
        let other = generate(&TestFunctionSpec::power_spectrum(1.0, 8, Some(32), g1)).unwrap();
        assert_ne!(a, other);
        let g2d = GridSpec::new(2, 32).unwrap();
        let f = generate(&TestFunctionSpec::power_spectrum(1.5, 1, Some(10), g2d)).unwrap();
        assert!(f.max_imag() == 0.0 && f.max_abs() > 0.0);
    }

    #[test]
    fn slope_of_weierstrass() {
        let grid = GridSpec::new(1, 1024).unwrap();
        let f = generate(&TestFunctionSpec::weierstrass(0.5, None, grid)).unwrap();
        let window = slope_window(&grid, 1).unwrap();
        assert_eq!(window, ScaleRange { k_min: 2, k_max: 5 });
        let fit = decay_slope(&f, 1, Exponent::Infinity, window).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.15, "{fit:?}");
        assert!(decay_slope(&f, 1, Exponent::Infinity, ScaleRange::new(2, 4).unwrap()).is_err());
        assert!(slope_window(&GridSpec::new(1, 128).unwrap(), 1).is_err());
    }

    #[test]
    fn empty_and_single_studies() {
        let grid = GridSpec::new(1, 256).unwrap();
        let p = NormParams::new(
            Space::Besov,
            Method::Ball,
            1.0,
            Exponent::Finite(2.0),
            Exponent::Finite(2.0),
            2,
        );
        let s = equivalence_study(&[], &p).unwrap();
        assert!(s.entries.is_empty() && s.min_ratio.is_none());
        let s = equivalence_study(&[TestFunctionSpec::smooth_reference(grid)], &p).unwrap();
        assert_eq!(s.width(), Some(1.0));
    }

    #[test]
    fn smooth_reference_refinement() {
        let grid = GridSpec::new(1, 256).unwrap();
        let p = NormParams::new(
            Space::Besov,
            Method::Ball,
            1.0,
            Exponent::Finite(2.0),
            Exponent::Finite(2.0),
            1,
        )
        .with_range(ScaleRange::new(0, 5).unwrap());
        let t = refinement_study(
            &TestFunctionSpec::smooth_reference(grid),
            &p,
            &[256, 512, 1024],
        )
        .unwrap();
        assert!(t.rows.iter().skip(1).all(|r| r.change.unwrap() < 1e-6));
        assert!(
            refinement_study(&TestFunctionSpec::smooth_reference(grid), &p, &[512, 256]).is_err()
        );
    }
}
