//! Real scalar trait the numeric kernel is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Complex entry type used throughout the crate.
pub type C<T> = Complex<T>;

/// Floating point real used as the component type of complex matrices: `f32` or `f64`.
///
/// Besides the usual float operations the trait carries the tolerances the
/// crate validates against and a dense matrix-product hook, so that `f64` and
/// `f32` can route products through an optimized kernel.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Operator-norm tolerance for `‖U†U − I‖` when accepting a matrix as unitary.
    const UNITARY_TOL: f64;

    /// Relative stagnation threshold for the power iteration in `op_norm`.
    const POWER_REL_TOL: f64;

    /// Convert an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `c = a · b` for row-major `a: m×k`, `b: k×n`, `c: m×n` (overwritten).
    fn gemm(m: usize, k: usize, n: usize, a: &[C<Self>], b: &[C<Self>], c: &mut [C<Self>]) {
        naive_gemm(m, k, n, a, b, c);
    }
}

/// Reference product with a fixed `i, p, j` summation order.
pub fn naive_gemm<T: Real>(m: usize, k: usize, n: usize, a: &[C<T>], b: &[C<T>], c: &mut [C<T>]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for ci in c.iter_mut() {
        *ci = C::new(T::zero(), T::zero());
    }
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip.re == T::zero() && aip.im == T::zero() {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cij, bpj) in crow.iter_mut().zip(brow) {
                *cij = *cij + aip * *bpj;
            }
        }
    }
}

impl Real for f64 {
    const UNITARY_TOL: f64 = 1e-10;
    const POWER_REL_TOL: f64 = 1e-14;

    fn gemm(m: usize, k: usize, n: usize, a: &[C<f64>], b: &[C<f64>], c: &mut [C<f64>]) {
        assert_eq!(a.len(), m * k);
        assert_eq!(b.len(), k * n);
        assert_eq!(c.len(), m * n);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: `Complex<f64>` is `#[repr(C)]` with fields (re, im), which is
        // layout-compatible with `[f64; 2]`; the slices have the asserted lengths.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                a.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                b.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                c.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
    }
}

impl Real for f32 {
    const UNITARY_TOL: f64 = 1e-4;
    const POWER_REL_TOL: f64 = 1e-6;

    fn gemm(m: usize, k: usize, n: usize, a: &[C<f32>], b: &[C<f32>], c: &mut [C<f32>]) {
        assert_eq!(a.len(), m * k);
        assert_eq!(b.len(), k * n);
        assert_eq!(c.len(), m * n);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: as for f64, `Complex<f32>` is layout-compatible with `[f32; 2]`.
        unsafe {
            matrixmultiply::cgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                a.as_ptr() as *const [f32; 2],
                k as isize,
                1,
                b.as_ptr() as *const [f32; 2],
                n as isize,
                1,
                [0.0, 0.0],
                c.as_mut_ptr() as *mut [f32; 2],
                n as isize,
                1,
            );
        }
    }
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    C::new(theta.cos(), theta.sin())
}

/// Chordal distance `|e^{iθ} − 1| = 2|sin(θ/2)|`.
#[inline]
pub fn chord<T: Real>(theta: T) -> T {
    (T::lit(2.0) * (theta / T::lit(2.0)).sin()).abs()
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut t = theta % two_pi;
    if t < T::zero() {
        t = t + two_pi;
    }
    if t >= two_pi {
        t = t - two_pi;
    }
    t
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circular_distance<T: Real>(a: T, b: T) -> T {
    let d = wrap_angle(a - b);
    d.min(T::TAU() - d)
}

/// The angle `2πk/n` in `[0, 2π)`. All root-of-unity angles in the crate come
/// from this function, so equal `(k, n)` pairs give bit-identical angles.
#[inline]
pub fn root_angle<T: Real>(k: u64, n: u64) -> T {
    let k = k % n;
    T::TAU() * T::from_u64(k).unwrap() / T::from_u64(n).unwrap()
}
