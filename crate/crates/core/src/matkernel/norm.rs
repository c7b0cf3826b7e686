//! Operator norm by power iteration on `M†M`.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

use super::dense::CMat;

/// A linear map that can be applied together with its adjoint.
pub trait LinearOp<T: Real> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[C<T>], y: &mut [C<T>]);
    fn apply_adjoint(&self, x: &[C<T>], y: &mut [C<T>]);
}

impl<T: Real> LinearOp<T> for CMat<T> {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[C<T>], y: &mut [C<T>]) {
        CMat::apply(self, x, y)
    }
    fn apply_adjoint(&self, x: &[C<T>], y: &mut [C<T>]) {
        CMat::apply_adjoint(self, x, y)
    }
}

/// `op − s·I` for a square operator.
pub struct Shifted<'a, T: Real, O: LinearOp<T> + ?Sized> {
    pub op: &'a O,
    pub shift: C<T>,
}

impl<T: Real, O: LinearOp<T> + ?Sized> LinearOp<T> for Shifted<'_, T, O> {
    fn nrows(&self) -> usize {
        self.op.nrows()
    }
    fn ncols(&self) -> usize {
        self.op.ncols()
    }
    fn apply(&self, x: &[C<T>], y: &mut [C<T>]) {
        self.op.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *yi - self.shift * xi;
        }
    }
    fn apply_adjoint(&self, x: &[C<T>], y: &mut [C<T>]) {
        self.op.apply_adjoint(x, y);
        let s = self.shift.conj();
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *yi - s * xi;
        }
    }
}

/// Cap on `M†M` applications per start vector in [`op_norm`].
pub const MAX_POWER_ITERATIONS: usize = 200_000;

fn norm2<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Largest singular value of a dense matrix.
pub fn op_norm<T: Real>(m: &CMat<T>) -> Result<T> {
    if !m.is_finite() {
        return Err(Error::OutOfRange("matrix has non-finite entries".into()));
    }
    if m.is_zero() {
        return Ok(T::zero());
    }
    op_norm_of(m)
}

/// `‖M − I‖`.
pub fn distance_from_identity<T: Real>(m: &CMat<T>) -> Result<T> {
    op_norm(&m.minus_identity())
}

/// Largest singular value of an abstract operator.
///
/// Power iteration on `M†M` from two fixed quasi-random start vectors,
/// keeping the larger result. A run that has not settled after
/// [`POWER_PHASE_STEPS`] continues with restarted Lanczos from its current
/// iterate, which handles clustered top singular values. Structured start vectors such as all-ones are
/// avoided: they lie in invariant subspaces of permutation-like operators.
/// The Rayleigh quotient `‖Mx‖²` is non-decreasing along the iteration; a run
/// stops once its relative increase drops below `T::POWER_REL_TOL`, or when
/// the start vector is annihilated.
pub fn op_norm_of<T: Real, O: LinearOp<T> + ?Sized>(op: &O) -> Result<T> {
    let n = op.ncols();
    let m = op.nrows();
    if n == 0 || m == 0 {
        return Ok(T::zero());
    }
    let mut best = T::zero();
    for ratio in [0.618_033_988_749_895, 0.414_213_562_373_095] {
        best = best.max(power_run(op, |k| {
            let t = T::lit((k as f64 * ratio).fract() * std::f64::consts::TAU);
            C::new(T::one() + T::lit(0.5) * t.cos(), T::lit(0.5) * t.sin())
        })?);
    }
    Ok(best)
}

/// Power steps before switching to Lanczos.
pub const POWER_PHASE_STEPS: usize = 1000;

/// Krylov dimension per Lanczos cycle.
const LANCZOS_STEPS: usize = 48;

fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// `y = M†M x`, returning `‖Mx‖²`.
fn gram<T: Real, O: LinearOp<T> + ?Sized>(op: &O, x: &[C<T>], tmp: &mut [C<T>], y: &mut [C<T>]) -> T {
    op.apply(x, tmp);
    op.apply_adjoint(tmp, y);
    tmp.iter().map(|v| v.norm_sqr()).sum::<T>()
}

fn power_run<T: Real, O: LinearOp<T> + ?Sized>(op: &O, start: impl Fn(usize) -> C<T>) -> Result<T> {
    let rel_tol = T::lit(T::POWER_REL_TOL);
    let mut tmp = vec![C::new(T::zero(), T::zero()); op.nrows()];
    let mut z = vec![C::new(T::zero(), T::zero()); op.ncols()];
    let mut x: Vec<C<T>> = (0..op.ncols()).map(start).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v = *v / nx);

    let mut rho_prev = T::zero();
    for it in 0..POWER_PHASE_STEPS {
        let rho = gram(op, &x, &mut tmp, &mut z);
        if !rho.is_finite() {
            return Err(Error::OutOfRange("operator produced non-finite values".into()));
        }
        let nz = norm2(&z);
        if !(nz > T::zero()) {
            return Ok(T::zero());
        }
        if it > 0 && rho - rho_prev <= rel_tol * rho {
            return Ok(rho.max(rho_prev).sqrt());
        }
        rho_prev = rho;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = *zi / nz;
        }
    }
    lanczos_run(op, x, rho_prev)
}

/// Explicitly restarted Lanczos on `M†M` with full reorthogonalization.
///
/// Each cycle starts from the top Ritz vector of the previous one, so the
/// Ritz value is non-decreasing and bounded by `‖M‖²`; the same relative
/// increase test as the power phase ends the run.
fn lanczos_run<T: Real, O: LinearOp<T> + ?Sized>(op: &O, mut x: Vec<C<T>>, floor: T) -> Result<T> {
    let n = op.ncols();
    let m = LANCZOS_STEPS.min(n);
    let rel_tol = T::lit(T::POWER_REL_TOL);
    let mut tmp = vec![C::new(T::zero(), T::zero()); op.nrows()];
    let mut w = vec![C::new(T::zero(), T::zero()); n];
    let mut theta_prev = floor;
    let mut cycles = 0;
    while cycles * m < MAX_POWER_ITERATIONS {
        cycles += 1;
        let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(m);
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(x.clone());
        for k in 0..m {
            gram(op, &basis[k], &mut tmp, &mut w);
            let a = dot(&basis[k], &w).re;
            alpha.push(a.to_f64_lossy());
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi = *wi - c * vi;
                    }
                }
            }
            let b = norm2(&w);
            if k + 1 == m || !(b > T::lit(1e-300)) || b.to_f64_lossy() <= 1e-13 * a.to_f64_lossy().abs() {
                break;
            }
            beta.push(b.to_f64_lossy());
            basis.push(w.iter().map(|&v| v / b).collect());
        }
        let k = alpha.len();
        let tri = nalgebra::DMatrix::<f64>::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i == j + 1 {
                beta[j]
            } else if j == i + 1 {
                beta[i]
            } else {
                0.0
            }
        });
        let eig = nalgebra::SymmetricEigen::new(tri);
        let (top, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if !theta.is_finite() {
            return Err(Error::OutOfRange("operator produced non-finite values".into()));
        }
        let theta = T::lit(theta);
        let mut y = vec![C::new(T::zero(), T::zero()); n];
        for (j, v) in basis.iter().take(k).enumerate() {
            let s = T::lit(eig.eigenvectors[(j, top)]);
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi = *yi + *vi * s;
            }
        }
        let ny = norm2(&y);
        y.iter_mut().for_each(|v| *v = *v / ny);
        // an invariant Krylov space gives the exact top eigenvalue of the start's span
        if k < m || k == n || theta - theta_prev <= rel_tol * theta {
            return Ok(theta.max(theta_prev).sqrt());
        }
        theta_prev = theta;
        x = y;
    }
    Err(Error::NonConvergence {
        iterations: MAX_POWER_ITERATIONS,
        last_rayleigh: theta_prev.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn reflection_minus_identity() {
        let m = CMat::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!((distance_from_identity(&m).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(op_norm(&CMat::<f64>::zeros(4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn all_ones_kernel_is_harmless() {
        // the all-ones vector is annihilated, but the matrix is not zero
        let m = CMat::from_fn(2, 2, |_, j| if j == 0 { c(1.0, 0.0) } else { c(-1.0, 0.0) });
        // rank one: (1,1)ᵀ(1,−1), norm √2·√2
        assert!((op_norm(&m).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rectangular() {
        let m = CMat::from_fn(1, 3, |_, _| c(1.0, 0.0));
        assert!((op_norm(&m).unwrap() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_nan() {
        let mut m = CMat::<f64>::identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(op_norm(&m).is_err());
    }

    #[test]
    fn cyclic_structure_does_not_trap_iteration() {
        // e^{i}·C_3 with C_3 the cyclic shift: all-ones is an eigenvector for
        // e^{i}, but the norm of X − I comes from e^{i}·ω
        let w = crate::scalar::cis(1.0);
        let z = c(0.0, 0.0);
        let x = CMat::from_fn(3, 3, |r, col| if r == (col + 1) % 3 { w } else { z });
        let expect = 2.0 * ((1.0 + std::f64::consts::TAU / 3.0) / 2.0).sin();
        assert!((distance_from_identity(&x).unwrap() - expect).abs() < 1e-9);
    }

    fn svd_norm(m: &CMat<f64>) -> f64 {
        let na = nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            nalgebra::Complex::new(m[(i, j)].re, m[(i, j)].im)
        });
        na.singular_values().max()
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_svd(seed in proptest::prelude::any::<u64>(), rows in 1usize..9, cols in 1usize..9) {
            use rand::Rng;
            let mut rng = crate::random::seeded(seed);
            let m = CMat::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let ours = op_norm(&m).unwrap();
            let oracle = svd_norm(&m);
            proptest::prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.max(1.0), "{} vs {}", ours, oracle);
        }

        #[test]
        fn permutation_like_unitaries(seed in proptest::prelude::any::<u64>(), n in 2usize..8, shift in 1usize..7) {
            use rand::Rng;
            let mut rng = crate::random::seeded(seed);
            let phases: Vec<C<f64>> = (0..n).map(|_| crate::scalar::cis(rng.random_range(0.0..6.3))).collect();
            let x = CMat::from_fn(n, n, |r, col| if r == (col + shift) % n { phases[col] } else { c(0.0, 0.0) });
            let d = x.minus_identity();
            proptest::prop_assert!((op_norm(&d).unwrap() - svd_norm(&d)).abs() <= 1e-9);
        }
    }

    #[test]
    fn clustered_top_singular_values() {
        // W·diag(ω^k)·W† − I for the 127th roots: singular values 2 sin(πk/127)
        // cluster within 1e-4 of the top, beyond the reach of the power phase
        let mut rng = crate::random::seeded(4);
        let w = crate::random::random_unitary::<f64, _>(&mut rng, 127);
        let d = CMat::diagonal(
            &(0..127).map(|k| crate::scalar::root_angle::<f64>(k, 127)).map(crate::scalar::cis).collect::<Vec<_>>(),
        );
        let u = w.matrix().matmul(&d).matmul(&w.matrix().adjoint());
        let expect = 2.0 * (63.0 * std::f64::consts::PI / 127.0).sin();
        let got = distance_from_identity(&u).unwrap();
        assert!((got - expect).abs() <= 1e-8 * expect, "{got} vs {expect}");
    }
}
