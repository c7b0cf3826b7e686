//! Block-diagonal unitaries composed with a block permutation.
//!
//! A [`BlockUnitary`] with blocks `U_0..U_{m−1}` (all `n×n`) and block
//! permutation `σ` is the matrix whose block `(σ(c), c)` is `U_c`, all other
//! blocks zero: `Π_σ · diag(U_0, …, U_{m−1})`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

use super::dense::CMat;
use super::norm::{op_norm, op_norm_of, LinearOp, Shifted};
use super::unitary::UnitaryMatrix;

/// Dense materialization limit for block matrices.
pub const DENSE_LIMIT: usize = 2048;

#[derive(Clone, Debug)]
pub struct BlockUnitary<T> {
    block_dim: usize,
    blocks: Vec<UnitaryMatrix<T>>,
    /// `None` is the identity permutation.
    perm: Option<Vec<usize>>,
}

fn check_perm(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Dimension(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn is_identity(perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(i, &p)| i == p)
}

/// Identity factors are copied, not multiplied, so permutation bookkeeping
/// stays exact and cheap.
fn mul_block<T: Real>(a: &UnitaryMatrix<T>, b: &UnitaryMatrix<T>) -> UnitaryMatrix<T> {
    if a.matrix().is_identity() {
        b.clone()
    } else if b.matrix().is_identity() {
        a.clone()
    } else {
        a.mul(b)
    }
}

impl<T: Real> BlockUnitary<T> {
    pub fn block_diagonal(blocks: Vec<UnitaryMatrix<T>>) -> Result<Self> {
        Self::new(blocks, None)
    }

    pub fn new(blocks: Vec<UnitaryMatrix<T>>, perm: Option<Vec<usize>>) -> Result<Self> {
        let block_dim = blocks.first().map(|b| b.dim()).unwrap_or(0);
        if blocks.iter().any(|b| b.dim() != block_dim) {
            return Err(Error::Dimension("blocks of unequal size".into()));
        }
        let perm = match perm {
            Some(p) => {
                if p.len() != blocks.len() {
                    return Err(Error::Dimension(format!(
                        "permutation of length {} for {} blocks",
                        p.len(),
                        blocks.len()
                    )));
                }
                check_perm(&p)?;
                if is_identity(&p) {
                    None
                } else {
                    Some(p)
                }
            }
            None => None,
        };
        Ok(BlockUnitary {
            block_dim,
            blocks,
            perm,
        })
    }

    /// `Π_σ ⊗ I_n`: identity blocks moved by the permutation.
    pub fn block_permutation(block_dim: usize, perm: Vec<usize>) -> Result<Self> {
        let blocks = vec![UnitaryMatrix::identity(block_dim); perm.len()];
        Self::new(blocks, Some(perm))
    }

    pub fn identity(block_dim: usize, block_count: usize) -> Self {
        BlockUnitary {
            block_dim,
            blocks: vec![UnitaryMatrix::identity(block_dim); block_count],
            perm: None,
        }
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.block_dim * self.blocks.len()
    }

    pub fn blocks(&self) -> &[UnitaryMatrix<T>] {
        &self.blocks
    }

    pub fn block(&self, c: usize) -> &UnitaryMatrix<T> {
        &self.blocks[c]
    }

    /// Block permutation as a full list (identity when trivial).
    pub fn permutation(&self) -> Vec<usize> {
        self.perm.clone().unwrap_or_else(|| (0..self.blocks.len()).collect())
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.perm.is_none()
    }

    fn sigma(&self, c: usize) -> usize {
        self.perm.as_ref().map_or(c, |p| p[c])
    }

    /// `(Π_σ D)(Π_τ E) = Π_{σ∘τ} · diag(D_{τ(c)} E_c)`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.block_dim != rhs.block_dim || self.blocks.len() != rhs.blocks.len() {
            return Err(Error::Dimension("block structures differ".into()));
        }
        let blocks: Vec<UnitaryMatrix<T>> = (0..rhs.blocks.len())
            .into_par_iter()
            .map(|c| mul_block(&self.blocks[rhs.sigma(c)], &rhs.blocks[c]))
            .collect();
        let perm: Vec<usize> = (0..blocks.len()).map(|c| self.sigma(rhs.sigma(c))).collect();
        Self::new(blocks, Some(perm))
    }

    /// `(Π_σ D)† = Π_{σ⁻¹} · diag(D†_{σ⁻¹(c)})`.
    pub fn adjoint(&self) -> Self {
        let m = self.blocks.len();
        let mut inv = vec![0; m];
        for c in 0..m {
            inv[self.sigma(c)] = c;
        }
        let blocks = (0..m).map(|c| self.blocks[inv[c]].adjoint()).collect();
        BlockUnitary {
            block_dim: self.block_dim,
            blocks,
            perm: if is_identity(&inv) { None } else { Some(inv) },
        }
    }

    /// Integer power by repeated block-wise products.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.adjoint() } else { self.clone() };
        let mut acc = Self::identity(self.block_dim, self.blocks.len());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Dense form; refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<CMat<T>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::Cap(format!(
                "dense materialization of dimension {dim} (limit {DENSE_LIMIT})"
            )));
        }
        let n = self.block_dim;
        let mut out = CMat::zeros(dim, dim);
        for (c, b) in self.blocks.iter().enumerate() {
            let r0 = self.sigma(c) * n;
            for i in 0..n {
                for j in 0..n {
                    out[(r0 + i, c * n + j)] = b.matrix()[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// `‖X − I‖`. Block-diagonal operators are handled block by block;
    /// otherwise power iteration runs on the structured operator.
    pub fn distance_from_identity(&self) -> Result<T> {
        if self.is_block_diagonal() {
            let norms: Vec<Result<T>> = self
                .blocks
                .par_iter()
                .map(|b| op_norm(&b.matrix().minus_identity()))
                .collect();
            let mut best = T::zero();
            for n in norms {
                best = best.max(n?);
            }
            Ok(best)
        } else {
            op_norm_of(&Shifted {
                op: self,
                shift: C::new(T::one(), T::zero()),
            })
        }
    }
}

impl<T: Real> LinearOp<T> for BlockUnitary<T> {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &[C<T>], y: &mut [C<T>]) {
        let n = self.block_dim;
        for (c, b) in self.blocks.iter().enumerate() {
            let r = self.sigma(c);
            b.matrix().apply(&x[c * n..(c + 1) * n], &mut y[r * n..(r + 1) * n]);
        }
    }
    fn apply_adjoint(&self, x: &[C<T>], y: &mut [C<T>]) {
        let n = self.block_dim;
        for (c, b) in self.blocks.iter().enumerate() {
            let r = self.sigma(c);
            b.matrix().apply_adjoint(&x[r * n..(r + 1) * n], &mut y[c * n..(c + 1) * n]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unitary, seeded};

    #[test]
    fn shift_permutation_rotates_blocks() {
        let mut rng = seeded(7);
        let blocks: Vec<UnitaryMatrix<f64>> = (0..4).map(|_| random_unitary(&mut rng, 2)).collect();
        let a = BlockUnitary::block_diagonal(blocks.clone()).unwrap();
        let b = BlockUnitary::block_permutation(2, vec![1, 2, 3, 0]).unwrap();
        let rotated = b.adjoint().mul(&a).unwrap().mul(&b).unwrap();
        assert!(rotated.is_block_diagonal());
        for c in 0..4 {
            // bookkeeping only: bit-identical to the source block
            assert_eq!(rotated.block(c).matrix(), blocks[(c + 1) % 4].matrix());
        }
    }

    #[test]
    fn permutation_power_is_identity() {
        let b = BlockUnitary::<f64>::block_permutation(3, vec![1, 2, 3, 4, 0]).unwrap();
        let b5 = b.pow(5).unwrap();
        assert!(b5.is_block_diagonal());
        assert!(b5.blocks().iter().all(|u| u.matrix() == &CMat::identity(3)));
    }

    #[test]
    fn dense_limit() {
        let b = BlockUnitary::<f64>::identity(1025, 2);
        assert!(matches!(b.to_dense(), Err(Error::Cap(_))));
    }

    #[test]
    fn rejects_bad_permutation() {
        assert!(BlockUnitary::<f64>::block_permutation(1, vec![0, 0]).is_err());
    }
}
