//! Sampled fields on the periodic torus `(R/2πZ)^n` and their Fourier coefficients.
//!
//! Every operator in this crate is a Fourier multiplier, so the torus is the
//! working domain: on band-limited periodic inputs a multiplier acts exactly as
//! it would on `R^n`, and identities stated on the frequency side carry over
//! verbatim. The transform convention is the non-unitary one,
//!
//! ```text
//! f̂(m) = N^{-n} Σ_i f(x_i) e^{-i m·x_i},      f(x_i) = Σ_m f̂(m) e^{i m·x_i},
//! ```
//!
//! under which convolution with an `L¹`-normalised kernel `K` becomes
//! multiplication of `f̂(m)` by the continuum transform `K̂(m) = ∫ K e^{-ix·ξ}`
//! evaluated at integer frequencies.

pub mod io;

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Uniform grid on the torus: `samples_per_axis` points per axis, period 2π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    samples_per_axis: usize,
}

impl GridSpec {
    pub fn new(dim: usize, samples_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if samples_per_axis < 8 || !samples_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "samples per axis {samples_per_axis} must be a power of two >= 8"
            )));
        }
        Ok(Self {
            dim,
            samples_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.samples_per_axis as f64
    }

    /// Volume of one grid cell, `(2π/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `log2(N/2)`, the dyadic level of the Nyquist frequency.
    pub fn nyquist_level(&self) -> i32 {
        (self.samples_per_axis / 2).trailing_zeros() as i32
    }

    /// Signed frequency carried by per-axis index `i`, in `[-N/2, N/2)`.
    pub fn frequency(&self, i: usize) -> i64 {
        let n = self.samples_per_axis;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Per-axis index of a signed frequency (wrapped modulo N).
    pub fn index_of_frequency(&self, m: i64) -> usize {
        m.rem_euclid(self.samples_per_axis as i64) as usize
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.samples_per_axis;
        for axis in (0..self.dim).rev() {
            out[axis] = flat % n;
            flat /= n;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .fold(0usize, |acc, &i| acc * self.samples_per_axis + i)
    }

    /// Integer frequency vector at flat index `flat`.
    pub fn frequency_vector(&self, flat: usize) -> Vec<i64> {
        let mut idx = [0usize; 3];
        self.multi_index(flat, &mut idx[..self.dim]);
        idx[..self.dim].iter().map(|&i| self.frequency(i)).collect()
    }

    /// Exact squared Euclidean magnitude `|m|²` for every flat frequency index.
    pub fn squared_magnitudes(&self) -> Vec<u64> {
        let mut idx = [0usize; 3];
        (0..self.len())
            .map(|flat| {
                self.multi_index(flat, &mut idx[..self.dim]);
                idx[..self.dim]
                    .iter()
                    .map(|&i| {
                        let m = self.frequency(i);
                        (m * m) as u64
                    })
                    .sum()
            })
            .collect()
    }

    /// Coordinates of grid point `flat`: `x = 2π i / N` per axis.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = [0usize; 3];
        self.multi_index(flat, &mut idx[..self.dim]);
        idx[..self.dim]
            .iter()
            .map(|&i| i as f64 * self.spacing())
            .collect()
    }
}

/// Function values at the grid points, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
    real: bool,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::MalformedField(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            real: false,
        })
    }

    pub fn from_real(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let values = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        let mut field = Self::new(grid, values)?;
        field.real = true;
        Ok(field)
    }

    /// Sample `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::from_real(grid, values).expect("length matches grid")
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self::from_real(grid, vec![c; grid.len()]).expect("length matches grid")
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub(crate) fn with_real_flag(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.im.abs()))
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            real: self.real,
        }
    }

    fn zip_with(
        &self,
        other: &SampledField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SampledField> {
        if self.grid != other.grid {
            return Err(Error::MalformedField("grid mismatch".into()));
        }
        Ok(SampledField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
            real: self.real && other.real,
        })
    }

    /// Periodic translation by whole grid cells: `out(i) = self(i - shift)`.
    pub fn shifted(&self, shift: &[i64]) -> SampledField {
        let n = self.grid.samples_per_axis as i64;
        let dim = self.grid.dim;
        let mut idx = [0usize; 3];
        let mut src = [0usize; 3];
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (flat, out) in values.iter_mut().enumerate() {
            self.grid.multi_index(flat, &mut idx[..dim]);
            for a in 0..dim {
                src[a] = (idx[a] as i64 - shift[a]).rem_euclid(n) as usize;
            }
            *out = self.values[self.grid.flat_index(&src[..dim])];
        }
        SampledField {
            grid: self.grid,
            values,
            real: self.real,
        }
    }

    /// Relative 2-norm distance `‖self − other‖₂ / ‖other‖₂` on the sample vectors.
    pub fn relative_l2_distance(&self, other: &SampledField) -> f64 {
        let (num, den) = self
            .values
            .iter()
            .zip(&other.values)
            .fold((0.0, 0.0), |(n, d), (a, b)| {
                (n + (a - b).norm_sqr(), d + b.norm_sqr())
            });
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    pub fn max_abs_difference(&self, other: &SampledField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }
}

/// Fourier coefficients `f̂(m)`, stored at the FFT index of `m` (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::MalformedField(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coefficients.len()
            )));
        }
        Ok(Self {
            grid,
            coefficients,
            real: false,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
            real: true,
        }
    }

    /// Declare that the coefficients are Hermitian-symmetric, so the inverse
    /// transform is flagged real.
    pub fn assume_real(mut self) -> Self {
        self.real = true;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Coefficient at integer frequency vector `m` (coordinates wrapped mod N).
    pub fn at(&self, m: &[i64]) -> Complex64 {
        self.coefficients[self.flat_of(m)]
    }

    pub fn set(&mut self, m: &[i64], value: Complex64) {
        let flat = self.flat_of(m);
        self.coefficients[flat] = value;
    }

    fn flat_of(&self, m: &[i64]) -> usize {
        let mut idx = [0usize; 3];
        for (a, &mi) in m.iter().enumerate().take(self.grid.dim) {
            idx[a] = self.grid.index_of_frequency(mi);
        }
        self.grid.flat_index(&idx[..self.grid.dim])
    }

    /// Multiply every coefficient by `weight(flat_index)`.
    pub(crate) fn map_weights(&self, weight: impl Fn(usize) -> f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c * weight(i))
                .collect(),
            real: self.real,
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(data: &mut [Complex64], grid: &GridSpec, direction: FftDirection) {
    let n = grid.samples_per_axis;
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = grid.len();
    for axis in 0..grid.dim {
        let stride = n.pow((grid.dim - 1 - axis) as u32);
        let block = stride * n;
        for outer in 0..total / block {
            for inner in 0..stride {
                let start = outer * block + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, value) in line.iter().enumerate() {
                    data[start + k * stride] = *value;
                }
            }
        }
    }
}

/// `f̂(m) = N^{-n} Σ_i f(x_i) e^{-i m·x_i}`.
pub fn forward_transform(f: &SampledField) -> SpectralField {
    let mut data = f.values.clone();
    fft_in_place(&mut data, &f.grid, FftDirection::Forward);
    let norm = 1.0 / f.grid.len() as f64;
    data.iter_mut().for_each(|c| *c *= norm);
    SpectralField {
        grid: f.grid,
        coefficients: data,
        real: f.real,
    }
}

/// `f(x_i) = Σ_m f̂(m) e^{i m·x_i}`, the exact inverse of [`forward_transform`].
pub fn inverse_transform(spectrum: &SpectralField) -> SampledField {
    let mut data = spectrum.coefficients.clone();
    fft_in_place(&mut data, &spectrum.grid, FftDirection::Inverse);
    SampledField {
        grid: spectrum.grid,
        values: data,
        real: spectrum.real,
    }
}

/// An `L^p` exponent in `(0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `(Σ a_i^q)^{1/q}` for finite exponents, `max a_i` for infinity.
    pub fn aggregate(&self, terms: impl IntoIterator<Item = f64>) -> f64 {
        match *self {
            Exponent::Infinity => terms.into_iter().fold(0.0, f64::max),
            Exponent::Finite(q) => terms
                .into_iter()
                .map(|a| a.powf(q))
                .sum::<f64>()
                .powf(1.0 / q),
        }
    }
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map(Exponent::from)
                .map_err(|_| invalid(format!("cannot parse exponent '{s}'"))),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Ok(Exponent::from(p)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Grid quadrature of the `L^p` norm: `(Σ_i |f(x_i)|^p (2π/N)^n)^{1/p}`, or the
/// sample maximum for `p = ∞`.
pub fn lp_norm(f: &SampledField, p: Exponent) -> Result<f64> {
    lp_norm_of_magnitudes(&f.abs_values(), f.grid(), p)
}

pub(crate) fn lp_norm_of_magnitudes(mags: &[f64], grid: &GridSpec, p: Exponent) -> Result<f64> {
    match p {
        Exponent::Infinity => Ok(mags.iter().copied().fold(0.0, f64::max)),
        Exponent::Finite(p) if p > 1.0 => {
            let sum: f64 = mags.iter().map(|v| v.powf(p)).sum();
            Ok((sum * grid.cell_volume()).powf(1.0 / p))
        }
        Exponent::Finite(p) => Err(invalid(format!("L^p norm needs p > 1, got {p}"))),
    }
}

/// A radial symbol looked up by the exact squared magnitude `|m|²`.
pub trait RadialSymbol {
    fn value_at_squared(&self, m2: u64) -> Result<f64>;
}

/// Adapter turning a radial profile `μ(|m|)` into a [`RadialSymbol`].
pub struct RadialProfile<F>(pub F);

impl<F: Fn(f64) -> f64> RadialSymbol for RadialProfile<F> {
    fn value_at_squared(&self, m2: u64) -> Result<f64> {
        Ok((self.0)((m2 as f64).sqrt()))
    }
}

/// Multiply each coefficient by `μ(|m|)`. The symbol is evaluated once per
/// distinct `|m|²` present on the grid.
pub fn apply_radial_multiplier(
    spectrum: &SpectralField,
    symbol: &dyn RadialSymbol,
) -> Result<SpectralField> {
    let m2 = spectrum.grid.squared_magnitudes();
    let mut cache: HashMap<u64, f64> = HashMap::new();
    for &key in &m2 {
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(key) {
            e.insert(symbol.value_at_squared(key)?);
        }
    }
    Ok(spectrum.map_weights(|i| cache[&m2[i]]))
}

/// Multiply each coefficient by an arbitrary real, even symbol `μ(m)`.
pub fn apply_multiplier(spectrum: &SpectralField, symbol: impl Fn(&[i64]) -> f64) -> SpectralField {
    let grid = spectrum.grid;
    spectrum.map_weights(|i| symbol(&grid.frequency_vector(i)))
}
