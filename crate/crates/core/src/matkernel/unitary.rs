use crate::error::{Error, Result};
use crate::scalar::{chord, cis, wrap_angle, Real, C};

use super::dense::CMat;
use super::norm::op_norm;
use super::spectrum::CircleSpectrum;

/// Eigenvector frame and eigenangles: `U = frame · diag(e^{i·angles}) · frame†`.
#[derive(Clone, Debug)]
pub struct Eigendata<T> {
    pub frame: CMat<T>,
    pub angles: Vec<T>,
}

impl<T: Real> Eigendata<T> {
    pub fn new(frame: CMat<T>, angles: Vec<T>) -> Result<Self> {
        if !frame.is_square() || frame.rows() != angles.len() {
            return Err(Error::Dimension(format!(
                "frame {}×{} with {} angles",
                frame.rows(),
                frame.cols(),
                angles.len()
            )));
        }
        Ok(Eigendata {
            frame,
            angles: angles.into_iter().map(wrap_angle).collect(),
        })
    }

    pub fn spectrum(&self) -> CircleSpectrum<T> {
        CircleSpectrum::from_angles(self.angles.iter().copied())
    }

    /// `frame · diag(e^{iθ}) · frame†`.
    pub fn reconstruct(&self) -> CMat<T> {
        let phases: Vec<C<T>> = self.angles.iter().map(|&a| cis(a)).collect();
        self.frame.scale_columns(&phases).matmul(&self.frame.adjoint())
    }
}

/// Dense square unitary, optionally carrying its eigendata.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix<T> {
    mat: CMat<T>,
    eig: Option<Eigendata<T>>,
}

impl<T: Real> UnitaryMatrix<T> {
    /// Accept a matrix after checking `‖U†U − I‖ ≤ T::UNITARY_TOL`.
    pub fn new(mat: CMat<T>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!("{}×{} is not square", mat.rows(), mat.cols())));
        }
        if !mat.is_finite() {
            return Err(Error::OutOfRange("non-finite matrix entry".into()));
        }
        let u = UnitaryMatrix { mat, eig: None };
        let defect = u.unitarity_defect()?;
        if defect.to_f64_lossy() > T::UNITARY_TOL {
            return Err(Error::NotUnitary {
                defect: defect.to_f64_lossy(),
            });
        }
        Ok(u)
    }

    /// Wrap a matrix the caller already knows to be unitary (products and
    /// conjugates of unitaries, permutations, ...). Not validated.
    pub fn assume_unitary(mat: CMat<T>) -> Self {
        debug_assert!(mat.is_square());
        UnitaryMatrix { mat, eig: None }
    }

    /// Build `frame · diag(e^{iθ}) · frame†`, keeping the eigendata.
    pub fn from_eigendata(eig: Eigendata<T>) -> Self {
        UnitaryMatrix {
            mat: eig.reconstruct(),
            eig: Some(eig),
        }
    }

    /// Attach eigendata to an existing matrix, checking the reconstruction residual.
    pub fn with_eigendata(mat: CMat<T>, eig: Eigendata<T>) -> Result<Self> {
        let u = UnitaryMatrix {
            mat,
            eig: Some(eig),
        };
        let r = u.eigendata_residual()?.unwrap_or(T::zero());
        if r.to_f64_lossy() > T::UNITARY_TOL {
            return Err(Error::BadEigendata {
                residual: r.to_f64_lossy(),
            });
        }
        Ok(u)
    }

    /// Attach eigendata without checking it.
    pub fn with_trusted_eigendata(mat: CMat<T>, eig: Eigendata<T>) -> Self {
        UnitaryMatrix { mat, eig: Some(eig) }
    }

    /// Diagonal unitary `diag(e^{iθ_k})` with the identity frame.
    pub fn diagonal_from_angles(angles: &[T]) -> Self {
        let n = angles.len();
        let eig = Eigendata {
            frame: CMat::identity(n),
            angles: angles.iter().copied().map(wrap_angle).collect(),
        };
        let phases: Vec<C<T>> = eig.angles.iter().map(|&a| cis(a)).collect();
        UnitaryMatrix {
            mat: CMat::diagonal(&phases),
            eig: Some(eig),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_from_angles(&vec![T::zero(); n])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.mat
    }

    #[inline]
    pub fn eigendata(&self) -> Option<&Eigendata<T>> {
        self.eig.as_ref()
    }

    pub fn has_eigendata(&self) -> bool {
        self.eig.is_some()
    }

    pub fn spectrum(&self) -> Option<CircleSpectrum<T>> {
        self.eig.as_ref().map(Eigendata::spectrum)
    }

    pub fn drop_eigendata(mut self) -> Self {
        self.eig = None;
        self
    }

    /// `‖U†U − I‖`.
    pub fn unitarity_defect(&self) -> Result<T> {
        op_norm(&self.mat.adjoint().matmul(&self.mat).minus_identity())
    }

    /// `‖U − frame·diag(e^{iθ})·frame†‖`, or `None` without eigendata.
    pub fn eigendata_residual(&self) -> Result<Option<T>> {
        match &self.eig {
            None => Ok(None),
            Some(e) => Ok(Some(op_norm(&self.mat.sub(&e.reconstruct()))?)),
        }
    }

    /// Check both unitarity and the eigendata invariant.
    pub fn validate(&self) -> Result<()> {
        let d = self.unitarity_defect()?;
        if d.to_f64_lossy() > T::UNITARY_TOL {
            return Err(Error::NotUnitary { defect: d.to_f64_lossy() });
        }
        if let Some(r) = self.eigendata_residual()? {
            if r.to_f64_lossy() > T::UNITARY_TOL {
                return Err(Error::BadEigendata { residual: r.to_f64_lossy() });
            }
        }
        Ok(())
    }

    /// Inverse, i.e. conjugate transpose. Eigendata carries over with negated angles.
    pub fn adjoint(&self) -> Self {
        UnitaryMatrix {
            mat: self.mat.adjoint(),
            eig: self.eig.as_ref().map(|e| Eigendata {
                frame: e.frame.clone(),
                angles: e.angles.iter().map(|&a| wrap_angle(-a)).collect(),
            }),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        UnitaryMatrix::assume_unitary(self.mat.matmul(&rhs.mat))
    }

    /// Integer power; negative exponents use the adjoint.
    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.adjoint() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc: Option<CMat<T>> = None;
        let mut sq = base.mat.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.matmul(&sq),
                });
            }
            k >>= 1;
            if k > 0 {
                sq = sq.matmul(&sq);
            }
        }
        let mat = acc.unwrap_or_else(|| CMat::identity(self.dim()));
        let eig = base.eig.map(|ed| Eigendata {
            angles: ed
                .angles
                .iter()
                .map(|&a| wrap_angle(a * T::from_u64(e.unsigned_abs()).unwrap()))
                .collect(),
            frame: ed.frame,
        });
        UnitaryMatrix { mat, eig }
    }

    /// `v⁻¹ · self · v`. Eigendata is transported (`frame ↦ v†·frame`).
    pub fn conjugated_by(&self, v: &UnitaryMatrix<T>) -> Self {
        let vt = v.mat.adjoint();
        let mat = vt.matmul(&self.mat).matmul(&v.mat);
        let eig = self.eig.as_ref().map(|e| Eigendata {
            frame: vt.matmul(&e.frame),
            angles: e.angles.clone(),
        });
        UnitaryMatrix { mat, eig }
    }

    /// `‖U − I‖` by power iteration.
    pub fn distance_from_identity(&self) -> Result<T> {
        op_norm(&self.mat.minus_identity())
    }

    /// `max_θ |e^{iθ} − 1|` from tracked eigendata.
    pub fn spectral_distance_from_identity(&self) -> Option<T> {
        self.eig
            .as_ref()
            .map(|e| e.angles.iter().map(|&a| chord(a)).fold(T::zero(), T::max))
    }

    /// Direct sum; eigendata is kept when every summand has it.
    pub fn direct_sum(parts: &[&UnitaryMatrix<T>]) -> Self {
        let mats: Vec<&CMat<T>> = parts.iter().map(|u| &u.mat).collect();
        let mat = CMat::direct_sum(&mats);
        let eig = if parts.iter().all(|u| u.eig.is_some()) {
            let frames: Vec<&CMat<T>> = parts.iter().map(|u| &u.eig.as_ref().unwrap().frame).collect();
            Some(Eigendata {
                frame: CMat::direct_sum(&frames),
                angles: parts
                    .iter()
                    .flat_map(|u| u.eig.as_ref().unwrap().angles.iter().copied())
                    .collect(),
            })
        } else {
            None
        };
        UnitaryMatrix { mat, eig }
    }

    pub fn cast<U: Real>(&self) -> UnitaryMatrix<U> {
        UnitaryMatrix {
            mat: self.mat.cast(),
            eig: self.eig.as_ref().map(|e| Eigendata {
                frame: e.frame.cast(),
                angles: e.angles.iter().map(|a| U::lit(a.to_f64_lossy())).collect(),
            }),
        }
    }
}
