//! Finite multisets on the unit circle and optimal bottleneck matchings between them.

use crate::error::{Error, Result};
use crate::scalar::{chord, circular_distance, wrap_angle, Real};

/// Angle tolerance used when grouping or comparing spectra.
pub const ANGLE_TOL: f64 = 1e-12;

/// Multiset of eigenangles in `[0, 2π)`.
///
/// Angles are kept in the order they were supplied (usually eigenframe column
/// order); comparisons treat the list as a multiset.
#[derive(Clone, Debug)]
pub struct CircleSpectrum<T> {
    angles: Vec<T>,
}

impl<T: Real> CircleSpectrum<T> {
    pub fn from_angles(angles: impl IntoIterator<Item = T>) -> Self {
        CircleSpectrum {
            angles: angles.into_iter().map(wrap_angle).collect(),
        }
    }

    /// Simple `n`-th roots of unity.
    pub fn roots_of_unity(n: u64) -> Self {
        CircleSpectrum {
            angles: (0..n).map(|k| crate::scalar::root_angle(k, n)).collect(),
        }
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn sorted(&self) -> Vec<T> {
        let mut v = self.angles.clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        v
    }

    /// Distinct angles with multiplicities; angles within [`ANGLE_TOL`] of the
    /// previous group are merged (across 2π as well).
    pub fn multiplicities(&self) -> Vec<(T, usize)> {
        let tol = T::lit(ANGLE_TOL);
        let mut out: Vec<(T, usize)> = Vec::new();
        for a in self.sorted() {
            match out.last_mut() {
                Some((b, m)) if a - *b <= tol => *m += 1,
                _ => out.push((a, 1)),
            }
        }
        if out.len() > 1 {
            let (first, m0) = out[0];
            let (last, ml) = *out.last().unwrap();
            if T::TAU() - last + first <= tol {
                out.pop();
                out[0] = (first, m0 + ml);
            }
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut angles = self.angles.clone();
        angles.extend_from_slice(&other.angles);
        CircleSpectrum { angles }
    }

    /// True when 1 is an eigenvalue (to [`ANGLE_TOL`]).
    pub fn contains_one(&self) -> bool {
        let tol = T::lit(ANGLE_TOL);
        self.angles
            .iter()
            .any(|&a| circular_distance(a, T::zero()) <= tol)
    }

    /// Multiset equality up to [`ANGLE_TOL`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && circular_matching_distance(self, other)
                .map(|m| m.angular <= T::lit(ANGLE_TOL))
                .unwrap_or(false)
    }
}

/// Largest chordal distance between two points of the spectrum.
pub fn spectral_diameter<T: Real>(s: &CircleSpectrum<T>) -> Result<T> {
    if s.is_empty() {
        return Err(Error::Precondition("spectral diameter of an empty spectrum".into()));
    }
    let sorted = s.sorted();
    let n = sorted.len();
    // The farthest point from θ is a neighbour of θ + π in sorted order.
    let mut best = T::zero();
    for &theta in &sorted {
        let target = wrap_angle(theta + T::PI());
        let hi = sorted.partition_point(|&x| x < target);
        for idx in [hi % n, (hi + n - 1) % n] {
            best = best.max(chord(theta - sorted[idx]));
        }
    }
    Ok(best)
}

/// Optimal bijection between two equal-size spectra under the bottleneck
/// (max-displacement) criterion.
#[derive(Clone, Debug)]
pub struct Matching<T> {
    /// `pairs[a] = b`: angle `a` of the source is matched to angle `b` of the target.
    pub pairs: Vec<usize>,
    /// Largest angular displacement of a matched pair, in `[0, π]`.
    pub angular: T,
    /// Largest chordal displacement `|e^{iα} − e^{iβ}|`.
    pub chordal: T,
}

impl<T: Real> Matching<T> {
    pub fn identity(n: usize) -> Self {
        Matching {
            pairs: (0..n).collect(),
            angular: T::zero(),
            chordal: T::zero(),
        }
    }

    /// Largest angular displacement of this bijection, recomputed.
    pub fn displacement(&self, a: &CircleSpectrum<T>, b: &CircleSpectrum<T>) -> T {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, &j)| circular_distance(a.angles[i], b.angles[j]))
            .fold(T::zero(), T::max)
    }
}

fn argsort<T: Real>(v: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).expect("finite angles").then(i.cmp(&j)));
    idx
}

/// Minimize, over bijections, the largest chordal displacement.
///
/// Both lists are sorted by angle and every cyclic alignment of the sorted
/// orders is scanned; an optimal bottleneck matching on a circle is always
/// one of these. Ties go to the smallest shift.
pub fn circular_matching_distance<T: Real>(
    a: &CircleSpectrum<T>,
    b: &CircleSpectrum<T>,
) -> Result<Matching<T>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "matching spectra of sizes {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Ok(Matching::identity(0));
    }
    let ia = argsort(&a.angles);
    let ib = argsort(&b.angles);
    let sa: Vec<T> = ia.iter().map(|&i| a.angles[i]).collect();
    let sb: Vec<T> = ib.iter().map(|&i| b.angles[i]).collect();

    let mut best_shift = 0;
    let mut best = T::infinity();
    for shift in 0..n {
        let mut worst = T::zero();
        for t in 0..n {
            let d = circular_distance(sa[t], sb[(t + shift) % n]);
            if d > worst {
                worst = d;
                if worst >= best {
                    break;
                }
            }
        }
        if worst < best {
            best = worst;
            best_shift = shift;
        }
    }
    let mut pairs = vec![0; n];
    for t in 0..n {
        pairs[ia[t]] = ib[(t + best_shift) % n];
    }
    Ok(Matching {
        pairs,
        angular: best,
        chordal: chord(best),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn diameter_examples() {
        let s = CircleSpectrum::from_angles([0.0f64]);
        assert_eq!(spectral_diameter(&s).unwrap(), 0.0);
        let s = CircleSpectrum::from_angles([0.0f64, PI]);
        assert!((spectral_diameter(&s).unwrap() - 2.0).abs() < 1e-15);
        assert!(spectral_diameter(&CircleSpectrum::<f64>::from_angles([])).is_err());
    }

    #[test]
    fn matching_examples() {
        let one = CircleSpectrum::from_angles([0.0f64]);
        let minus_one = CircleSpectrum::from_angles([PI]);
        let m = circular_matching_distance(&one, &minus_one).unwrap();
        assert!((m.chordal - 2.0).abs() < 1e-15);

        let r3 = CircleSpectrum::<f64>::roots_of_unity(3);
        let ones = CircleSpectrum::from_angles([0.0f64; 3]);
        let m = circular_matching_distance(&r3, &ones).unwrap();
        assert!((m.chordal - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let a = CircleSpectrum::from_angles([0.0f64]);
        let b = CircleSpectrum::from_angles([0.0f64, 1.0]);
        assert!(circular_matching_distance(&a, &b).is_err());
    }

    #[test]
    fn multiplicities_merge_across_zero() {
        let s = CircleSpectrum::from_angles([0.0f64, 2.0 * PI - 1e-14, 1.0]);
        let m = s.multiplicities();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].1, 2);
    }
}
