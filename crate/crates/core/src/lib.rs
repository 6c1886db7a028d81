//! Ball-average difference operators on the periodic torus `(R/2πZ)^n` and the
//! Besov / Triebel–Lizorkin norms built from them, next to the classical
//! Littlewood–Paley norms they are compared against.
//!
//! Spectral paths run through [`torus`]; radial symbols live in
//! [`multiplier`]; [`averaging`] applies them; [`filter_bank`] and [`norms`]
//! build the norms; [`harness`] and [`cli`] drive studies.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod averaging;
pub mod body;
pub mod cli;
pub mod error;
pub mod filter_bank;
pub mod fit;
pub mod harness;
pub mod multiplier;
pub mod norms;
pub mod quadrature;
pub mod torus;

pub use averaging::{ball_difference, higher_average, AverageSpec};
pub use body::{BodyKind, BodySpec};
pub use error::{Error, Result};
pub use filter_bank::{build_bank, FilterBank};
pub use norms::{norm, Method, NormParams, NormReport, ScaleRange, Space};
pub use torus::{Exponent, GridSpec, SampledField};
