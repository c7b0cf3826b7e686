//! Conjugation amplification `γ(u) = Ad(u)` on matrix space, identity padding,
//! and boosting of separation to `√2`.
//!
//! `γ` squares the dimension and replaces eigenangles `{α_i}` by all
//! differences `{α_i − α_j}`; on a spectrum that contains 1 and fits in an arc
//! of length `s < π/2`, one step doubles the arc. Boosting therefore has an
//! exact spectral description, computed by [`boost_schedule`] without forming
//! any matrix, and a dense route, [`boost_separation`], for small inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{recover_eigendata, spectral_diameter, CircleSpectrum, Eigendata, UnitaryMatrix};
use crate::scalar::{chord, circular_distance, wrap_angle, Real};
use crate::words::GeneratorAssignment;

/// Largest input dimension accepted by [`gamma`] (output is `128² = 16384`).
pub const GAMMA_CAP: usize = 128;

/// Tolerance used when testing whether an angle reaches `π/2`.
pub const QUARTER_TURN_TOL: f64 = 1e-12;

/// `X ↦ u X u⁻¹` on `M_n` in the row-major matrix-unit basis, i.e. `u ⊗ ū`.
///
/// With eigendata `(F, α)` the result carries `(F ⊗ F̄, α_i − α_j)` at index `i·n + j`.
pub fn gamma<T: Real>(u: &UnitaryMatrix<T>) -> Result<UnitaryMatrix<T>> {
    let n = u.dim();
    if n > GAMMA_CAP {
        return Err(Error::Cap(format!("gamma input dimension {n} exceeds {GAMMA_CAP}")));
    }
    let mat = u.matrix().kron(&u.matrix().conj());
    Ok(match u.eigendata() {
        Some(e) => {
            let frame = e.frame.kron(&e.frame.conj());
            let angles = e
                .angles
                .iter()
                .flat_map(|&a| e.angles.iter().map(move |&b| wrap_angle(a - b)))
                .collect();
            UnitaryMatrix::with_trusted_eigendata(mat, Eigendata { frame, angles })
        }
        None => UnitaryMatrix::assume_unitary(mat),
    })
}

/// `γ^k(u)`.
pub fn gamma_power<T: Real>(u: &UnitaryMatrix<T>, k: u32) -> Result<UnitaryMatrix<T>> {
    let mut v = u.clone();
    for _ in 0..k {
        v = gamma(&v)?;
    }
    Ok(v)
}

/// `k_δ = ⌊log₂(π/δ)⌋ + 1` for `0 < δ ≤ π`.
pub fn k_delta(delta: f64) -> Result<u32> {
    if !(delta > 0.0 && delta <= std::f64::consts::PI) {
        return Err(Error::OutOfRange(format!("delta = {delta} must lie in (0, π]")));
    }
    Ok((std::f64::consts::PI / delta).log2().floor() as u32 + 1)
}

/// `u ⊕ 1`.
pub fn pad_identity<T: Real>(u: &UnitaryMatrix<T>) -> UnitaryMatrix<T> {
    UnitaryMatrix::direct_sum(&[u, &UnitaryMatrix::identity(1)])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplifySchedule {
    pub delta: f64,
    pub k_delta: u32,
    /// Smallest `k` with `‖γ^k(u) − 1‖ ≥ √2`.
    pub applied_k: u32,
    /// Whether `u` was padded with a 1 first.
    pub padded: bool,
    /// `‖γ^k(u) − 1‖` from the spectral formula.
    pub separation: f64,
}

/// Smallest arc length containing all angles (angles in `[0, 2π)`).
fn minimal_arc(angles: &[f64]) -> f64 {
    let mut s: Vec<f64> = angles.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    let mut widest_gap = std::f64::consts::TAU - s[n - 1] + s[0];
    for w in s.windows(2) {
        widest_gap = widest_gap.max(w[1] - w[0]);
    }
    std::f64::consts::TAU - widest_gap
}

/// Boosting exponent from eigenangles alone.
///
/// After padding, `0 ∈ Θ`. For `k = 0` the separation is `max chord(θ)`. For
/// `k ≥ 1`, when `Θ` fits in an arc of length `s < π/2`, `γ^k` spreads it to
/// `[−2^{k−1}s, 2^{k−1}s]`, so the separation is `chord(2^{k−1}s)`; when
/// `s ≥ π/2` some difference already has circular distance `≥ π/2` and `k = 1`
/// works. Exponents `0..=k_δ` are searched; `k_δ` always suffices when the
/// diameter exceeds `δ`.
pub fn boost_schedule<T: Real>(spectrum: &CircleSpectrum<T>, delta: f64) -> Result<AmplifySchedule> {
    let kd = k_delta(delta)?;
    if spectrum.is_empty() {
        return Err(Error::Precondition("empty spectrum".into()));
    }
    let diam = spectral_diameter(spectrum)?.to_f64_lossy();
    if diam <= delta {
        return Err(Error::Precondition(format!(
            "spectral diameter {diam} does not exceed delta = {delta}"
        )));
    }
    let padded = !spectrum.contains_one();
    let mut angles: Vec<f64> = spectrum.angles().iter().map(|a| a.to_f64_lossy()).collect();
    if padded {
        angles.push(0.0);
    }
    let quarter = std::f64::consts::FRAC_PI_2 - QUARTER_TURN_TOL;
    let far = angles
        .iter()
        .map(|&a| circular_distance(a, 0.0))
        .fold(0.0, f64::max);
    if far >= quarter {
        return Ok(AmplifySchedule {
            delta,
            k_delta: kd,
            applied_k: 0,
            padded,
            separation: chord(far),
        });
    }
    let s = minimal_arc(&angles);
    for k in 1..=kd {
        let spread = s * 2f64.powi(k as i32 - 1);
        if spread >= quarter {
            // for k ≥ 2 the previous arc was below π/2, so `spread ≤ π`
            let separation = if k == 1 {
                spectral_diameter(&CircleSpectrum::from_angles(angles.iter().copied()))?
            } else {
                chord(spread)
            };
            return Ok(AmplifySchedule {
                delta,
                k_delta: kd,
                applied_k: k,
                padded,
                separation,
            });
        }
    }
    Err(Error::Precondition(format!(
        "no exponent up to k_delta = {kd} reaches separation √2"
    )))
}

/// Pad (when `1 ∉ σ(u)`) and apply `γ^k` densely, with `k` from [`boost_schedule`].
/// The separation of the result is measured by power iteration and must reach `√2`.
pub fn boost_separation<T: Real>(
    u: &UnitaryMatrix<T>,
    delta: f64,
) -> Result<(AmplifySchedule, UnitaryMatrix<T>)> {
    let tracked = recover_eigendata(u)?;
    let sched = boost_schedule(&tracked.spectrum().expect("eigendata present"), delta)?;
    let base = if sched.padded { pad_identity(&tracked) } else { tracked };
    let v = gamma_power(&base, sched.applied_k)?;
    let measured = v.distance_from_identity()?.to_f64_lossy();
    if measured < std::f64::consts::SQRT_2 - 1e-9 {
        return Err(Error::Precondition(format!(
            "boosted separation {measured} is below √2"
        )));
    }
    Ok((sched, v))
}

/// `γ^k(α ⊕ 1)` (or `γ^k(α)` without padding) applied to every generator.
pub fn boost_assignment<T: Real>(
    asg: &GeneratorAssignment<T>,
    k: u32,
    pad: bool,
) -> Result<GeneratorAssignment<T>> {
    let map = asg
        .iter()
        .map(|(g, u)| {
            let base = if pad { pad_identity(u) } else { u.clone() };
            Ok((g.clone(), gamma_power(&base, k)?))
        })
        .collect::<Result<_>>()?;
    GeneratorAssignment::new_trusted(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::{circular_matching_distance, op_norm, CMat};
    use crate::random::{random_tracked_unitary, random_unitary, seeded};
    use crate::scalar::C;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    #[test]
    fn gamma_examples() {
        let id = gamma(&UnitaryMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(id.matrix(), &CMat::identity(9));
        let r = gamma(&UnitaryMatrix::<f64>::diagonal_from_angles(&[0.0, PI])).unwrap();
        assert_eq!(r.eigendata().unwrap().angles, vec![0.0, PI, PI, 0.0]);
        r.validate().unwrap();
        assert!(gamma(&UnitaryMatrix::<f64>::identity(129)).is_err());
    }

    #[test]
    fn gamma_acts_by_conjugation() {
        let mut rng = seeded(5);
        let u = random_unitary::<f64, _>(&mut rng, 3);
        let g = gamma(&u).unwrap();
        let x = CMat::from_fn(3, 3, |i, j| C::new(i as f64 - j as f64, (i * j) as f64));
        let want = u.matrix().matmul(&x).matmul(&u.matrix().adjoint());
        let mut got = vec![C::new(0.0, 0.0); 9];
        g.matrix().apply(x.as_slice(), &mut got);
        let got = CMat::from_vec(3, 3, got).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn k_delta_examples() {
        assert_eq!(k_delta(PI).unwrap(), 1);
        assert_eq!(k_delta(SQRT_2).unwrap(), 2);
        assert_eq!(k_delta(0.1).unwrap(), 5);
        assert!(k_delta(0.0).is_err());
        assert!(k_delta(4.0).is_err());
    }

    #[test]
    fn pad_examples() {
        assert_eq!(pad_identity(&UnitaryMatrix::<f64>::identity(2)).matrix(), &CMat::identity(3));
        let p = pad_identity(&UnitaryMatrix::<f64>::diagonal_from_angles(&[PI]));
        assert!((spectral_diameter(&p.spectrum().unwrap()).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_needs_no_amplification() {
        // 1 ∈ σ(diag(1, i)) already and |i − 1| = √2
        let u = UnitaryMatrix::<f64>::diagonal_from_angles(&[0.0, FRAC_PI_2]);
        let (s, v) = boost_separation(&u, 1.0).unwrap();
        assert_eq!((s.applied_k, s.padded), (0, false));
        assert!((v.distance_from_identity().unwrap() - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn small_gap_doubles_each_step() {
        let u = UnitaryMatrix::<f64>::diagonal_from_angles(&[0.0, 0.2]);
        let s = boost_schedule(&u.spectrum().unwrap(), 0.19).unwrap();
        assert_eq!((s.k_delta, s.applied_k), (5, 4));
        // γ^4 of a 2×2 input needs a 256-dimensional gamma input
        assert!(matches!(boost_separation(&u, 0.19), Err(Error::Cap(_))));
        let u = UnitaryMatrix::<f64>::identity(2);
        assert!(matches!(boost_schedule(&u.spectrum().unwrap(), 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn exponent_can_equal_k_delta() {
        // padded angles {0, 0.2, 1.3}: γ gives reach 1.3 < π/2, γ² gives 2.6
        let u = UnitaryMatrix::<f64>::diagonal_from_angles(&[0.2, 1.3]);
        let (s, v) = boost_separation(&u, 1.0).unwrap();
        assert_eq!((s.k_delta, s.applied_k), (2, 2));
        assert!(v.distance_from_identity().unwrap() >= SQRT_2);
        let once = gamma(&pad_identity(&u)).unwrap();
        assert!(once.distance_from_identity().unwrap() < SQRT_2);
    }

    #[test]
    fn schedule_agrees_with_dense_route() {
        let mut rng = seeded(77);
        for _ in 0..30 {
            let u = random_tracked_unitary::<f64, _>(&mut rng, 2);
            for delta in [0.5, 1.0, SQRT_2] {
                let Ok(s) = boost_schedule(&u.spectrum().unwrap(), delta) else {
                    continue;
                };
                if let Ok((_, v)) = boost_separation(&u, delta) {
                    let measured = v.distance_from_identity().unwrap();
                    assert!((measured - s.separation).abs() < 1e-8);
                    if s.applied_k > 0 {
                        let base = if s.padded { pad_identity(&u) } else { u.clone() };
                        let before = gamma_power(&base, s.applied_k - 1).unwrap();
                        assert!(before.distance_from_identity().unwrap() < SQRT_2);
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_laws_on_random_unitaries() {
        let mut rng = seeded(3);
        for n in 2..6 {
            let u = random_tracked_unitary::<f64, _>(&mut rng, n);
            let v = random_unitary::<f64, _>(&mut rng, n);
            let lhs = gamma(&u.mul(&v)).unwrap();
            let rhs = gamma(&u).unwrap().mul(&gamma(&v).unwrap());
            assert!(op_norm(&lhs.matrix().sub(rhs.matrix())).unwrap() < 1e-9);
            let g = gamma(&u).unwrap();
            g.validate().unwrap();
            let d = g.distance_from_identity().unwrap();
            assert!(d <= 2.0 * u.distance_from_identity().unwrap() + 1e-9);
            let a = &u.eigendata().unwrap().angles;
            let diffs = CircleSpectrum::from_angles(a.iter().flat_map(|x| a.iter().map(move |y| x - y)));
            assert!(circular_matching_distance(&g.spectrum().unwrap(), &diffs).unwrap().angular == 0.0);
        }
    }
}
