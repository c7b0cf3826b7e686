//! Dense and block-structured complex matrices, operator norms and circle spectra.

mod block;
mod dense;
mod eigen;
pub mod io;
mod norm;
mod spectrum;
mod unitary;

pub use block::{BlockUnitary, DENSE_LIMIT};
pub use dense::CMat;
pub use eigen::{conjugator_from_eigendata, recover_eigendata, Conjugator, SCHUR_NORMALITY_TOL};
pub use norm::{distance_from_identity, op_norm, op_norm_of, LinearOp, Shifted, MAX_POWER_ITERATIONS};
pub use spectrum::{circular_matching_distance, spectral_diameter, CircleSpectrum, Matching, ANGLE_TOL};
pub use unitary::{Eigendata, UnitaryMatrix};
