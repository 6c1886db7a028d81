//! Radial Littlewood–Paley bank with an exact dyadic partition of unity.
//!
//! With a smooth step `h` (`h = 1` on `[0,1]`, `h = 0` on `[2,∞)`) the profiles
//! are `Φ̂ = h` and `φ̂(s) = h(s) − h(2s)`, so every partial sum of dilates
//! telescopes. The step is glued in the variable `v = log₂ s`:
//!
//! ```text
//! h(s) = H(log₂ s),   H(v) = ψ(1−v) / (ψ(1−v) + ψ(v)),   ψ(x) = e^{−1/x} (x > 0)
//! ```
//!
//! Gluing in `log₂ s` makes the dyadic profile symmetric about `s = 1`
//! and keeps it well above zero on `[3/5, 5/3]`.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::multiplier::{a_ell, MultiplierKind, RadialMultiplierTable};
use crate::quadrature::QuadratureRule;
use crate::torus::{
    apply_radial_multiplier, forward_transform, inverse_transform, GridSpec, RadialProfile,
    SampledField,
};

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// The smooth step `h`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let v = s.log2();
    let a = psi(1.0 - v);
    a / (a + psi(v))
}

/// The dyadic filter bank. Profiles are closed-form; the scale range bounds
/// which `j` the projections accept.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub j_min: i32,
    pub j_max: i32,
    /// Minimum of `φ̂` over `[3/5, 5/3]`.
    pub c0: f64,
}

/// Build the bank over scales `−20..=20` and record `c₀`.
pub fn build_bank() -> FilterBank {
    FilterBank::with_range(-20, 20)
}

impl FilterBank {
    pub fn with_range(j_min: i32, j_max: i32) -> Self {
        let samples = 10_000;
        let c0 = (0..=samples)
            .map(|i| {
                let s = 0.6 + (5.0 / 3.0 - 0.6) * i as f64 / samples as f64;
                Self::phi_hat(s)
            })
            .fold(f64::INFINITY, f64::min);
        Self { j_min, j_max, c0 }
    }

    /// `φ̂(s) = h(s) − h(2s)`, supported in `[1/2, 2]`.
    pub fn phi_hat(s: f64) -> f64 {
        smooth_step(s) - smooth_step(2.0 * s)
    }

    /// `Φ̂(s) = h(s)`, supported in `[0, 2]`.
    pub fn big_phi_hat(s: f64) -> f64 {
        smooth_step(s)
    }

    /// Smallest scale whose band can touch a grid frequency.
    pub fn covers(&self, grid: &GridSpec) -> bool {
        let top = (grid.dim() as f64).sqrt() * (grid.samples_per_axis() / 2) as f64;
        self.j_min <= 0 && 2f64.powi(self.j_max - 1) >= top
    }

    fn check_scale(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(invalid(format!(
                "scale {j} outside bank range {}..={}",
                self.j_min, self.j_max
            )));
        }
        Ok(())
    }

    /// `(radius, φ̂, Φ̂)` rows at `samples` points of `[0, 2.5]`.
    pub fn write_profiles_csv(&self, samples: usize, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["radius", "phi_hat", "big_phi_hat"])
            .map_err(fmt)?;
        for i in 0..samples {
            let s = 2.5 * i as f64 / (samples - 1).max(1) as f64;
            w.write_record([
                format!("{s:.17e}"),
                format!("{:.17e}", Self::phi_hat(s)),
                format!("{:.17e}", Self::big_phi_hat(s)),
            ])
            .map_err(fmt)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

fn radial_pass(f: &SampledField, mu: impl Fn(f64) -> f64) -> Result<SampledField> {
    let spectrum = forward_transform(f);
    let out = inverse_transform(&apply_radial_multiplier(&spectrum, &RadialProfile(mu))?);
    Ok(real_if(out, f.is_real()))
}

fn real_if(out: SampledField, real: bool) -> SampledField {
    if real {
        SampledField::from_real(*out.grid(), out.real_parts()).expect("same grid")
    } else {
        out
    }
}

/// `φ_{2^{−j}} ∗ f`, i.e. `f̂(m)` times `φ̂(2^{−j}|m|)`.
pub fn band_project(f: &SampledField, j: i32, bank: &FilterBank) -> Result<SampledField> {
    bank.check_scale(j)?;
    let scale = 2f64.powi(-j);
    radial_pass(f, |r| FilterBank::phi_hat(scale * r))
}

/// `Φ ∗ f`, the low-pass term of the inhomogeneous decomposition.
pub fn low_pass(f: &SampledField) -> Result<SampledField> {
    radial_pass(f, FilterBank::big_phi_hat)
}

/// `T_{k,j} f`: `f̂(m)` times `φ̂(2^{−j}|m|) A_ℓ(2^{−k}|m|)`.
pub fn t_kj_apply(
    f: &SampledField,
    k: i32,
    j: i32,
    ell: u32,
    bank: &FilterBank,
) -> Result<SampledField> {
    bank.check_scale(j)?;
    let t = 2f64.powi(-k);
    if ell as f64 * t >= std::f64::consts::PI {
        return Err(Error::RadiusOutOfRange(format!(
            "ℓ·2^{{−k}} = {} ≥ π",
            ell as f64 * t
        )));
    }
    let sj = 2f64.powi(-j);
    let table = RadialMultiplierTable::for_grid(MultiplierKind::AEll, ell, f.grid(), t)?;
    let spectrum = forward_transform(f);
    let banded =
        apply_radial_multiplier(&spectrum, &RadialProfile(|r| FilterBank::phi_hat(sj * r)))?;
    let out = apply_radial_multiplier(&banded, &table)?;
    Ok(real_if(inverse_transform(&out), f.is_real()))
}

/// Tabulate `η(2^{−j}|m|) = φ̂(2^{−j}|m|) / A_ℓ(2^{−j}|m|)` over the grid.
pub fn eta_table(ell: u32, j: i32, grid: &GridSpec) -> Result<RadialMultiplierTable> {
    let scale = 2f64.powi(-j);
    let mut keys = grid.squared_magnitudes();
    keys.sort_unstable();
    keys.dedup();
    let mut entries = BTreeMap::new();
    for key in keys {
        let s = scale * (key as f64).sqrt();
        let phi = FilterBank::phi_hat(s);
        let value = if phi == 0.0 {
            0.0
        } else {
            let a = a_ell(
                ell,
                grid.dim(),
                s,
                &QuadratureRule::for_frequency(ell as f64 * s),
            )?;
            if a < 1e-14 {
                return Err(Error::InvariantViolation(format!(
                    "A_{ell}({s}) = {a} vanishes inside the band support"
                )));
            }
            phi / a
        };
        entries.insert(key, value);
    }
    RadialMultiplierTable::from_entries(MultiplierKind::Eta, ell, grid.dim(), scale, entries)
}

/// Apply `η(2^{−j}·)`.
pub fn eta_project(f: &SampledField, j: i32, ell: u32, bank: &FilterBank) -> Result<SampledField> {
    bank.check_scale(j)?;
    let table = eta_table(ell, j, f.grid())?;
    let out = apply_radial_multiplier(&forward_transform(f), &table)?;
    Ok(real_if(inverse_transform(&out), f.is_real()))
}
