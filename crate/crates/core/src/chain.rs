//! Almost representations of the chain `H_{j+1}` whose generators all have
//! the simple `f`-th roots of unity as spectrum, `f = 2^p − 1`, plus the
//! geodesic unitary path used to interpolate conjugators.
//!
//! Construction. Let `P` be the doubling permutation on `ℤ/f`, `Q` its
//! cycle-Fourier eigenframe and `Π` the column order given by an optimal
//! matching of `σ(P)` to the `f`-th roots. With `G = QΠ` and `W_{−j−1} = I`,
//! `W_{i+1} = W_i G`:
//!
//! * `a_i ↦ W_i D_f W_i†` (eigendata `(W_i, 2πk/f)` tracked exactly),
//! * `V_i = W_i P W_i†` conjugates `a_i` to `a_i²` exactly,
//! * `S_i = W_{i+1} D_f W_{i+1}†` is `V_i` with eigenvalues moved to the
//!   matched roots, so `‖S_i − V_i‖` is the chordal matching displacement.
//!
//! All defects `‖S_i⁻¹ a_i S_i − a_i²‖` equal `‖S_0⁻¹ D S_0 − D²‖`, and that
//! operator is block diagonal over doubling cycles in the frame `Q`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::doubling::{diag_root_matrix, doubling_permutation_matrix, orbits};
use crate::error::{Error, Result};
use crate::matkernel::{
    circular_matching_distance, io, op_norm, recover_eigendata, CMat, CircleSpectrum, Eigendata,
    Matching, UnitaryMatrix,
};
use crate::scalar::{chord, cis, root_angle, Real, C};
use crate::words::{chain_presentation, indexed_name, GeneratorAssignment, Interpretation};

/// Largest `f` for which chain defects are measured on dense `f×f` matrices.
pub const DENSE_DEFECT_LIMIT: u64 = 255;

/// Memory allowed for the dense generators of one chain, in bytes.
pub const CHAIN_MEMORY_BUDGET: u64 = 2 << 30;

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// `2^p − 1`.
pub fn modulus(p: u32) -> u64 {
    (1u64 << p) - 1
}

/// `2·chord(min(2π/p + 2π/f, π))`.
pub fn defect_bound(p: u32) -> f64 {
    let f = modulus(p) as f64;
    let tau = std::f64::consts::TAU;
    2.0 * chord((tau / p as f64 + tau / f).min(std::f64::consts::PI))
}

/// Optimal circular matching of `source` onto the simple `f`-th roots, with
/// its largest angular displacement.
pub fn spread_spectrum<T: Real>(source: &CircleSpectrum<T>, f: u64) -> Result<(Matching<T>, T)> {
    let m = circular_matching_distance(source, &CircleSpectrum::roots_of_unity(f))?;
    let d = m.angular;
    Ok((m, d))
}

/// Eigenangles of the doubling permutation in the column order of
/// [`crate::doubling::doubling_eigendata`].
fn doubling_angles<T: Real>(cycles: &[Vec<u64>]) -> Vec<T> {
    cycles
        .iter()
        .flat_map(|c| {
            let l = c.len() as u64;
            (0..l).map(move |m| root_angle(m, l))
        })
        .collect()
}

/// Cycle-Fourier coefficient `L^{-1/2} e^{−2πimt/L}`.
fn fourier<T: Real>(m: u64, t: u64, l: u64) -> C<T> {
    cis(-root_angle::<T>(m * t, l)) / T::from_u64(l).unwrap().sqrt()
}

/// How chain defects were measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectRoute {
    /// `‖S_i⁻¹ a_i S_i − a_i²‖` on the dense generators, for each `i`.
    Dense,
    /// In the cycle-Fourier frame, where the operator is block diagonal with
    /// `L×L` blocks; the value is the same for every `i`.
    CycleBlocks,
}

/// Per-index measurements for the pair `(a_i, a_{i+1})`.
#[derive(Clone, Debug, Serialize)]
pub struct StepDefects {
    /// `‖a_{i+1}⁻¹ a_i a_{i+1} − a_i²‖`.
    pub defect: f64,
    /// `‖V_i⁻¹ a_i V_i − a_i²‖`, zero up to rounding.
    pub exact_residual: f64,
    /// `‖a_{i+1} − V_i‖`.
    pub perturbation: f64,
}

#[derive(Clone, Debug)]
pub struct ChainRep<T> {
    pub p: u32,
    pub f: u64,
    pub j: u64,
    /// `a_i` for `i ∈ [−j−1, j+1]`, each with tracked eigendata.
    pub gens: BTreeMap<i64, UnitaryMatrix<T>>,
    /// Measurements for `i ∈ [−j−1, j]`.
    pub steps: BTreeMap<i64, StepDefects>,
    pub route: DefectRoute,
    /// Largest angular displacement of the spreading matching.
    pub spread_angular: f64,
    /// Chordal form of `spread_angular`, equal to `‖S_i − V_i‖`.
    pub spread_chordal: f64,
    pub bound: f64,
}

impl<T: Real> ChainRep<T> {
    pub fn defects(&self) -> BTreeMap<i64, f64> {
        self.steps.iter().map(|(&i, s)| (i, s.defect)).collect()
    }

    pub fn max_defect(&self) -> f64 {
        self.steps.values().map(|s| s.defect).fold(0.0, f64::max)
    }

    pub fn generator(&self, i: i64) -> Result<&UnitaryMatrix<T>> {
        self.gens
            .get(&i)
            .ok_or_else(|| Error::OutOfRange(format!("index {i} outside the chain window")))
    }

    /// Generators keyed by name `a<i>`.
    pub fn assignment(&self) -> Result<GeneratorAssignment<T>> {
        GeneratorAssignment::new_trusted(
            self.gens
                .iter()
                .map(|(&i, u)| (indexed_name(i), u.clone()))
                .collect(),
        )
    }

    pub fn manifest(&self) -> serde_json::Value {
        let defects: BTreeMap<String, f64> =
            self.steps.iter().map(|(i, s)| (i.to_string(), s.defect)).collect();
        serde_json::json!({
            "p": self.p,
            "f": self.f,
            "j": self.j,
            "defects": defects,
            "max_defect": self.max_defect(),
            "defect_bound": self.bound,
            "defect_route": self.route,
            "spread_angular": self.spread_angular,
            "spread_chordal": self.spread_chordal,
        })
    }

    /// `gen_<i>.json` for each generator plus `manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: dir.display().to_string(),
            source,
        };
        fs::create_dir_all(dir).map_err(io_err)?;
        for (i, u) in &self.gens {
            io::write_matrix(&dir.join(format!("gen_{i}.json")), u.matrix())?;
        }
        let text = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), text).map_err(io_err)
    }
}

/// `W · G` for `G = QΠ`: column `k` of `G` is the cycle-Fourier vector of
/// the doubling eigenpair matched to root `k`.
fn apply_step<T: Real>(w: &CMat<T>, columns: &[(Vec<u64>, u64)]) -> CMat<T> {
    let n = w.rows();
    let mut data = vec![C::new(T::zero(), T::zero()); n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(r, out)| {
        let row = w.row(r);
        for (k, (cycle, m)) in columns.iter().enumerate() {
            let l = cycle.len() as u64;
            let mut acc = C::new(T::zero(), T::zero());
            for (t, &c) in cycle.iter().enumerate() {
                acc = acc + row[c as usize] * fourier::<T>(*m, t as u64, l);
            }
            out[k] = acc;
        }
    });
    CMat::from_vec(n, n, data).expect("square")
}

/// Defect, exact residual and perturbation computed block by block in the
/// cycle-Fourier frame.
fn cycle_block_measurements<T: Real>(f: u64, cycles: &[Vec<u64>], pairs: &[usize]) -> Result<StepDefects> {
    let mut col = 0;
    let mut defect = T::zero();
    let mut exact = T::zero();
    let mut perturbation = T::zero();
    for cycle in cycles {
        let l = cycle.len();
        let u = CMat::from_fn(l, l, |t, m| fourier::<T>(m as u64, t as u64, l as u64));
        let d: Vec<C<T>> = cycle.iter().map(|&c| cis(root_angle::<T>(c, f))).collect();
        let d2: Vec<C<T>> = d.iter().map(|z| z * z).collect();
        let b1 = u.adjoint().matmul(&CMat::diagonal(&d)).matmul(&u);
        let b2 = u.adjoint().matmul(&CMat::diagonal(&d2)).matmul(&u);
        let lam_s: Vec<T> = (0..l).map(|m| root_angle(pairs[col + m] as u64, f)).collect();
        let lam_p: Vec<T> = (0..l).map(|m| root_angle(m as u64, l as u64)).collect();
        let sandwich = |lam: &[T]| {
            let ph: Vec<C<T>> = lam.iter().map(|&a| cis(a)).collect();
            let ph_inv: Vec<C<T>> = ph.iter().map(|z| z.conj()).collect();
            CMat::diagonal(&ph_inv).matmul(&b1).matmul(&CMat::diagonal(&ph))
        };
        defect = defect.max(op_norm(&sandwich(&lam_s).sub(&b2))?);
        exact = exact.max(op_norm(&sandwich(&lam_p).sub(&b2))?);
        for m in 0..l {
            perturbation = perturbation.max(chord(lam_s[m] - lam_p[m]));
        }
        col += l;
    }
    Ok(StepDefects {
        defect: defect.to_f64_lossy(),
        exact_residual: exact.to_f64_lossy(),
        perturbation: perturbation.to_f64_lossy(),
    })
}

fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::OutOfRange(format!("p = {p} is not prime")));
    }
    if p > 31 {
        return Err(Error::Cap(format!("p = {p} gives an astronomically large modulus")));
    }
    Ok(())
}

/// Build the chain on generators `a_{−j−1}..a_{j+1}`.
pub fn build_chain<T: Real>(p: u32, j: u64) -> Result<ChainRep<T>> {
    check_prime(p)?;
    let f = modulus(p);
    let count = 2 * j + 3;
    let bytes = (count + 1) * f * f * 2 * std::mem::size_of::<T>() as u64;
    if bytes > CHAIN_MEMORY_BUDGET {
        return Err(Error::Cap(format!(
            "chain with p = {p}, j = {j} needs {} MiB of dense storage (budget {} MiB)",
            bytes >> 20,
            CHAIN_MEMORY_BUDGET >> 20
        )));
    }
    let cycles = orbits(f)?;
    let source = CircleSpectrum::from_angles(doubling_angles::<f64>(&cycles));
    let (matching, angular) = spread_spectrum(&source, f)?;
    let pairs = matching.pairs.clone();

    // columns[k] = (cycle, m) of the doubling eigenpair matched to root k
    let mut columns: Vec<(Vec<u64>, u64)> = vec![(Vec::new(), 0); f as usize];
    let mut col = 0;
    for cycle in &cycles {
        for m in 0..cycle.len() as u64 {
            columns[pairs[col]] = (cycle.clone(), m);
            col += 1;
        }
    }

    let fu = f as usize;
    let roots: Vec<T> = (0..f).map(|k| root_angle(k, f)).collect();
    let phases: Vec<C<T>> = roots.iter().map(|&a| cis(a)).collect();
    let route = if f <= DENSE_DEFECT_LIMIT {
        DefectRoute::Dense
    } else {
        DefectRoute::CycleBlocks
    };
    let perm = doubling_permutation_matrix::<T>(f)?;
    let lo = -(j as i64) - 1;
    let hi = j as i64 + 1;

    let mut gens = BTreeMap::new();
    let mut frames: BTreeMap<i64, CMat<T>> = BTreeMap::new();
    gens.insert(lo, diag_root_matrix::<T>(f));
    frames.insert(lo, CMat::identity(fu));
    for i in lo..hi {
        let w_next = apply_step(&frames[&i], &columns);
        let g = w_next.scale_columns(&phases).matmul(&w_next.adjoint());
        let eig = Eigendata {
            frame: w_next.clone(),
            angles: roots.clone(),
        };
        gens.insert(i + 1, UnitaryMatrix::with_trusted_eigendata(g, eig));
        if route == DefectRoute::CycleBlocks {
            // only the newest frame is needed to continue
            frames.clear();
        }
        frames.insert(i + 1, w_next);
    }

    let steps = match route {
        DefectRoute::Dense => (lo..hi)
            .map(|i| {
                let a = gens[&i].matrix();
                let s = gens[&(i + 1)].matrix();
                let w = &frames[&i];
                let v = w.matmul(&perm).matmul(&w.adjoint());
                let a2 = a.matmul(a);
                let defect = op_norm(&s.adjoint().matmul(a).matmul(s).sub(&a2))?;
                let exact = op_norm(&v.adjoint().matmul(a).matmul(&v).sub(&a2))?;
                let perturbation = op_norm(&s.sub(&v))?;
                Ok((
                    i,
                    StepDefects {
                        defect: defect.to_f64_lossy(),
                        exact_residual: exact.to_f64_lossy(),
                        perturbation: perturbation.to_f64_lossy(),
                    },
                ))
            })
            .collect::<Result<BTreeMap<_, _>>>()?,
        DefectRoute::CycleBlocks => {
            let m = cycle_block_measurements::<T>(f, &cycles, &pairs)?;
            (lo..hi).map(|i| (i, m.clone())).collect()
        }
    };

    Ok(ChainRep {
        p,
        f,
        j,
        gens,
        steps,
        route,
        spread_angular: angular,
        spread_chordal: chord(angular),
        bound: defect_bound(p),
    })
}

/// Cycle-frame measurements for `p`, independent of `j` and of the dense generators.
pub fn reduced_step_defects<T: Real>(p: u32) -> Result<StepDefects> {
    check_prime(p)?;
    let f = modulus(p);
    let cycles = orbits(f)?;
    let source = CircleSpectrum::from_angles(doubling_angles::<f64>(&cycles));
    let (matching, _) = spread_spectrum(&source, f)?;
    cycle_block_measurements::<T>(f, &cycles, &matching.pairs)
}

/// Optimal matching of `{e^{iλ}} ∪ σ(D_n)` onto `σ(D_{n+m})`, with its chordal displacement.
pub fn uniformize_pad(lambdas: &[f64], n: u64) -> Result<(Matching<f64>, f64)> {
    let total = n + lambdas.len() as u64;
    let source = CircleSpectrum::from_angles(lambdas.iter().copied())
        .union(&CircleSpectrum::roots_of_unity(n));
    let m = circular_matching_distance(&source, &CircleSpectrum::roots_of_unity(total))?;
    let d = m.chordal;
    Ok((m, d))
}

/// Path `u_{−k}..u_k` with `u_t = I` exactly for `t ≤ 0` and `u_k = u⁻¹`.
#[derive(Clone, Debug)]
pub struct GeodesicPath<T> {
    pub k: u64,
    points: Vec<UnitaryMatrix<T>>,
}

impl<T: Real> GeodesicPath<T> {
    /// `u_t` for `t ∈ [−k, k]`.
    pub fn point(&self, t: i64) -> &UnitaryMatrix<T> {
        &self.points[(t + self.k as i64) as usize]
    }

    pub fn points(&self) -> &[UnitaryMatrix<T>] {
        &self.points
    }

    /// `max_t ‖u_{t+1} − u_t‖`, measured.
    pub fn max_step(&self) -> Result<f64> {
        let mut best = 0.0f64;
        for w in self.points.windows(2) {
            best = best.max(op_norm(&w[1].matrix().sub(w[0].matrix()))?.to_f64_lossy());
        }
        Ok(best)
    }

    /// `‖u_{−k} u_k⁻¹ − u‖`.
    pub fn endpoint_residual(&self, u: &UnitaryMatrix<T>) -> Result<f64> {
        let k = self.k as i64;
        let prod = self.point(-k).mul(&self.point(k).adjoint());
        Ok(op_norm(&prod.matrix().sub(u.matrix()))?.to_f64_lossy())
    }
}

/// Branch angle in `(−π, π]`; exactly `π` stays `π`.
fn branch<T: Real>(theta: T) -> T {
    if theta > T::PI() {
        theta - T::TAU()
    } else {
        theta
    }
}

/// Geodesic path with `k` steps: `u_t = F·diag(e^{−iθ_l t/k})·F†` for `0 ≤ t ≤ k`.
pub fn geodesic_path_steps<T: Real>(u: &UnitaryMatrix<T>, k: u64) -> Result<GeodesicPath<T>> {
    if k == 0 {
        return Err(Error::OutOfRange("path needs at least one step".into()));
    }
    let e = u.eigendata().ok_or(Error::MissingEigendata("geodesic path"))?;
    let n = u.dim();
    let theta: Vec<T> = e.angles.iter().map(|&a| branch(a)).collect();
    let kk = T::from_u64(k).unwrap();
    let mut points = vec![UnitaryMatrix::identity(n); k as usize + 1];
    for t in 1..=k {
        let tt = T::from_u64(t).unwrap();
        let angles: Vec<T> = theta.iter().map(|&a| -a * tt / kk).collect();
        points.push(UnitaryMatrix::from_eigendata(Eigendata::new(e.frame.clone(), angles)?));
    }
    Ok(GeodesicPath { k, points })
}

/// Geodesic path with `k = ⌊1/ε⌋` steps.
pub fn geodesic_path<T: Real>(u: &UnitaryMatrix<T>, epsilon: f64) -> Result<GeodesicPath<T>> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} must lie in (0, 1]")));
    }
    geodesic_path_steps(u, (1.0 / epsilon).floor() as u64)
}

/// Measurements reported by [`build_phi`].
#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub p: u32,
    pub j: u64,
    pub dim: usize,
    /// Copies of the chain in the sum (`dim ψ`, or 1 without `ψ`).
    pub copies: usize,
    /// Relator defects of `H_{j+1}` on `φ`, keyed by relator text.
    pub relator_defects: BTreeMap<String, f64>,
    /// `‖φ(a_i) − I‖`, keyed by generator.
    pub generator_separations: BTreeMap<String, f64>,
    /// Largest optimal matching displacement (chordal) between spectra of two generators.
    pub max_pairwise_displacement: f64,
    /// Per generator: chordal displacement from `σ(φ(a_i))` to the simple `dim`-th roots.
    pub uniform_displacements: BTreeMap<String, f64>,
}

/// `φ = ψ ⊕ π^{⊕m}` on the generators of `H_{j+1}`, or the bare chain without `ψ`.
pub fn build_phi<T: Real>(
    p: u32,
    j: u64,
    psi: Option<&GeneratorAssignment<T>>,
) -> Result<(GeneratorAssignment<T>, PhiReport)> {
    let chain = build_chain::<T>(p, j)?;
    let pres = chain_presentation(j + 1);
    let (asg, copies) = match psi {
        None => (chain.assignment()?, 1),
        Some(psi) => {
            let names: Vec<&String> = psi.generators().collect();
            if names.len() != pres.generators.len() || psi.covers(&pres).is_err() {
                return Err(Error::Presentation(format!(
                    "psi must assign exactly the generators of {}",
                    pres.name
                )));
            }
            let m = psi.dim();
            let mut map = BTreeMap::new();
            for (&i, g) in &chain.gens {
                let name = indexed_name(i);
                let ps = recover_eigendata(psi.get(&name).expect("covered"))?;
                let mut parts: Vec<&UnitaryMatrix<T>> = vec![&ps];
                parts.extend(std::iter::repeat_n(g, m));
                map.insert(name, UnitaryMatrix::direct_sum(&parts));
            }
            (GeneratorAssignment::new_trusted(map)?, m)
        }
    };

    let mut relator_defects = BTreeMap::new();
    for r in &pres.relators {
        let v = r.evaluate(&asg)?;
        relator_defects.insert(r.to_string(), asg.distance_from_identity(&v)?);
    }
    let mut generator_separations = BTreeMap::new();
    let mut spectra = Vec::new();
    let mut uniform_displacements = BTreeMap::new();
    let dim = asg.dim() as u64;
    for (name, u) in asg.iter() {
        generator_separations.insert(name.clone(), u.distance_from_identity()?.to_f64_lossy());
        let s = u.spectrum().ok_or(Error::MissingEigendata("phi generator"))?;
        let s64 = CircleSpectrum::from_angles(s.angles().iter().map(|a| a.to_f64_lossy()));
        let m = circular_matching_distance(&s64, &CircleSpectrum::roots_of_unity(dim))?;
        uniform_displacements.insert(name.clone(), m.chordal);
        spectra.push(s64);
    }
    let mut max_pairwise_displacement = 0.0f64;
    for a in 0..spectra.len() {
        for b in a + 1..spectra.len() {
            let m = circular_matching_distance(&spectra[a], &spectra[b])?;
            max_pairwise_displacement = max_pairwise_displacement.max(m.chordal);
        }
    }
    Ok((
        asg,
        PhiReport {
            p,
            j,
            dim: dim as usize,
            copies,
            relator_defects,
            generator_separations,
            max_pairwise_displacement,
            uniform_displacements,
        },
    ))
}
