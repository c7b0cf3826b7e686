//! Finite-dimensional almost representations of finitely presented groups,
//! with operator-norm certification of relator defects and word separation.
//!
//! The numeric core is generic over the real scalar type (`f64` or `f32`);
//! the aliases below fix it to `f64`, which is what reports and the CLI use.

pub mod amplify;
pub mod assembly;
pub mod certify;
pub mod chain;
pub mod doubling;
pub mod error;
pub mod matkernel;
pub mod random;
pub mod scalar;
pub mod words;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type CMat64 = matkernel::CMat<f64>;
pub type Unitary64 = matkernel::UnitaryMatrix<f64>;
pub type Unitary32 = matkernel::UnitaryMatrix<f32>;
pub type BlockUnitary64 = matkernel::BlockUnitary<f64>;
pub type CircleSpectrum64 = matkernel::CircleSpectrum<f64>;
pub type Assignment64 = words::GeneratorAssignment<f64>;
