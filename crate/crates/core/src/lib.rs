//! Numerical laboratory for averaged wave operators on `L²(μ)`.
//!
//! A singular measure `μ` on the unit circle is approximated by atoms. On the
//! resulting finite-dimensional `L²(μ)` the crate realizes the multiplication
//! unitary `U`, integral operators, conjugations `C_γ`, and the sequences
//! `UⁿXU⁻ⁿ ∓ U⁻ⁿXUⁿ` together with their Cesàro means.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, which is what the tolerances throughout are tuned for.

pub mod error;
pub mod hilbert;
pub mod matrix;
pub mod measure;
pub mod random;
pub mod scalar;
pub mod symmetry;
pub mod wave;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Measure = measure::DiscreteMeasure<f64>;
pub type Function = hilbert::GridFunction<f64>;
pub type Operator = hilbert::OperatorMatrix<f64>;
pub type Kernel = hilbert::Kernel<f64>;
pub type Conjugation = hilbert::Conjugation<f64>;
pub type MeasureRef = hilbert::MeasureRef<f64>;
pub type Complex64 = num_complex::Complex<f64>;

pub type Measure32 = measure::DiscreteMeasure<f32>;
pub type Operator32 = hilbert::OperatorMatrix<f32>;

/// Version string embedded in report manifests.
pub const TOOL_VERSION: &str = concat!("waveops ", env!("CARGO_PKG_VERSION"));

/// Hex SHA-256 of raw bytes, the content hash used in manifests.
pub fn content_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
