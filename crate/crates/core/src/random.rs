//! Seeded random unitaries and words for property checks and reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matkernel::{CMat, Eigendata, UnitaryMatrix};
use crate::scalar::{Real, C};
use crate::words::{Syllable, Word};

pub type DetRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian matrix orthonormalized column by column (modified
/// Gram–Schmidt, run twice for stability).
pub fn random_unitary_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat<T> {
    let mut cols: Vec<Vec<C<f64>>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| C::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
                .collect()
        })
        .collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let q = &head[k];
                let v = &mut tail[0];
                let proj: C<f64> = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let nrm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= nrm);
    }
    CMat::from_fn(n, n, |i, j| C::new(T::lit(cols[j][i].re), T::lit(cols[j][i].im)))
}

pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> UnitaryMatrix<T> {
    UnitaryMatrix::assume_unitary(random_unitary_matrix(rng, n))
}

/// Random frame and uniform eigenangles, with eigendata attached.
pub fn random_tracked_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> UnitaryMatrix<T> {
    let frame = random_unitary_matrix::<T, R>(rng, n);
    let angles: Vec<T> = (0..n)
        .map(|_| T::lit(rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    UnitaryMatrix::from_eigendata(Eigendata::new(frame, angles).expect("square frame"))
}

/// Random diagonal unitary with uniform angles.
pub fn random_diagonal_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> UnitaryMatrix<T> {
    let angles: Vec<T> = (0..n)
        .map(|_| T::lit(rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    UnitaryMatrix::diagonal_from_angles(&angles)
}

/// Random unreduced word over the given generators with exponents in `±1..=±max_exp`.
pub fn random_word<R: Rng + ?Sized>(rng: &mut R, gens: &[String], len: usize, max_exp: i64) -> Word {
    let syllables = (0..len)
        .map(|_| {
            let g = gens[rng.random_range(0..gens.len())].clone();
            let mut e = rng.random_range(1..=max_exp);
            if rng.random_bool(0.5) {
                e = -e;
            }
            Syllable::new(g, e)
        })
        .collect();
    Word::from_syllables_unreduced(syllables)
}
