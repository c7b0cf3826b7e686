//! Conjugators built from tracked eigendata, and eigendata recovery for
//! unitaries produced by products of tracked factors.

use nalgebra::{Complex as NaComplex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{chord, wrap_angle, Real, C};

use super::dense::CMat;
use super::norm::op_norm;
use super::spectrum::Matching;
use super::unitary::{Eigendata, UnitaryMatrix};

/// Witness `u` for `u⁻¹ x u ≈ y`.
#[derive(Clone, Debug)]
pub struct Conjugator<T> {
    pub unitary: UnitaryMatrix<T>,
    /// Measured `‖u⁻¹ x u − y‖`.
    pub residual: T,
    /// Chordal displacement of the matching used.
    pub displacement: T,
}

/// `u = frame_x · Π · frame_y†`, where `Π` sends the eigenvector of `y` with
/// index `matching.pairs[a]` onto the eigenvector of `x` with index `a`.
///
/// Then `u⁻¹ x u = Σ_a e^{iα_a} |y_{m(a)}⟩⟨y_{m(a)}|`, which differs from `y`
/// by at most the chordal displacement of the matching; the residual is
/// measured and checked against twice that.
pub fn conjugator_from_eigendata<T: Real>(
    x: &UnitaryMatrix<T>,
    y: &UnitaryMatrix<T>,
    matching: &Matching<T>,
) -> Result<Conjugator<T>> {
    let ex = x.eigendata().ok_or(Error::MissingEigendata("conjugator source"))?;
    let ey = y.eigendata().ok_or(Error::MissingEigendata("conjugator target"))?;
    let n = x.dim();
    if y.dim() != n || matching.pairs.len() != n {
        return Err(Error::Dimension(format!(
            "conjugator between dims {} and {} with a matching of size {}",
            n,
            y.dim(),
            matching.pairs.len()
        )));
    }
    // columns of frame_x permuted so that column m(a) holds x_a
    let mut xp = CMat::zeros(n, n);
    for (a, &b) in matching.pairs.iter().enumerate() {
        for r in 0..n {
            xp[(r, b)] = ex.frame[(r, a)];
        }
    }
    let u = UnitaryMatrix::assume_unitary(xp.matmul(&ey.frame.adjoint()));
    let conj = u.adjoint().matrix().matmul(x.matrix()).matmul(u.matrix());
    let residual = op_norm(&conj.sub(y.matrix()))?;
    let displacement = matching
        .pairs
        .iter()
        .enumerate()
        .map(|(a, &b)| chord(ex.angles[a] - ey.angles[b]))
        .fold(T::zero(), T::max);
    let bound = T::lit(2.0) * displacement + T::lit(1e-9);
    if residual > bound {
        return Err(Error::Precondition(format!(
            "conjugator residual {} exceeds twice the matching displacement {}",
            residual, displacement
        )));
    }
    Ok(Conjugator {
        unitary: u,
        residual,
        displacement,
    })
}

/// Off-diagonal tolerance for accepting a Schur form as diagonal.
pub const SCHUR_NORMALITY_TOL: f64 = 1e-9;

/// Recover eigendata of a unitary matrix from its complex Schur form.
///
/// For a normal matrix the Schur factor is diagonal, so the unitary Schur
/// vectors are an orthonormal eigenbasis. The decomposition runs in `f64`.
pub fn recover_eigendata<T: Real>(u: &UnitaryMatrix<T>) -> Result<UnitaryMatrix<T>> {
    if u.has_eigendata() {
        return Ok(u.clone());
    }
    let n = u.dim();
    if n == 0 {
        return Ok(u.clone());
    }
    let m = u.matrix();
    let na = DMatrix::<NaComplex<f64>>::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        NaComplex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
    });
    let schur = nalgebra::linalg::Schur::try_new(na, 1e-15, 10_000)
        .ok_or(Error::NonConvergence {
            iterations: 10_000,
            last_rayleigh: f64::NAN,
        })?;
    let (q, t) = schur.unpack();
    let mut off = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            off = off.max(t[(i, j)].norm());
        }
    }
    if off > SCHUR_NORMALITY_TOL {
        return Err(Error::NotNormal(off));
    }
    let frame = CMat::from_fn(n, n, |i, j| {
        let z = q[(i, j)];
        C::new(T::lit(z.re), T::lit(z.im))
    });
    let angles: Vec<T> = (0..n).map(|k| wrap_angle(T::lit(t[(k, k)].arg()))).collect();
    UnitaryMatrix::with_eigendata(m.clone(), Eigendata::new(frame, angles)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::spectrum::{circular_matching_distance, CircleSpectrum};
    use crate::random::{random_tracked_unitary, seeded};

    #[test]
    fn self_conjugator_is_trivial() {
        let mut rng = seeded(1);
        let x = random_tracked_unitary::<f64, _>(&mut rng, 5);
        let c = conjugator_from_eigendata(&x, &x, &Matching::identity(5)).unwrap();
        assert!(c.residual <= 1e-10);
    }

    #[test]
    fn recovers_tracked_spectrum() {
        let mut rng = seeded(2);
        let x = random_tracked_unitary::<f64, _>(&mut rng, 6);
        let bare = x.clone().drop_eigendata();
        let rec = recover_eigendata(&bare).unwrap();
        rec.validate().unwrap();
        let a = x.spectrum().unwrap();
        let b = rec.spectrum().unwrap();
        let m = circular_matching_distance(&a, &b).unwrap();
        assert!(m.angular < 1e-10);
    }

    #[test]
    fn recovers_degenerate_spectrum() {
        // a permutation with repeated eigenvalues
        let p = CMat::from_fn(4, 4, |i, j| {
            if i == (j + 1) % 2 + 2 * (j / 2) {
                C::new(1.0f64, 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        });
        let rec = recover_eigendata(&UnitaryMatrix::new(p).unwrap()).unwrap();
        rec.validate().unwrap();
        let expected = CircleSpectrum::from_angles([0.0, 0.0, std::f64::consts::PI, std::f64::consts::PI]);
        let m = circular_matching_distance(&rec.spectrum().unwrap(), &expected).unwrap();
        assert!(m.angular < 1e-10);
    }
}
