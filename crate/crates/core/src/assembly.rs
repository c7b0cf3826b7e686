//! Assembling finite-dimensional approximations of extensions: direct sums,
//! semidirect products with finite groups, and the Baumslag pair `(A, B)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{build_chain, geodesic_path_steps, ChainRep, GeodesicPath};
use crate::error::{Error, Result};
use crate::matkernel::{
    circular_matching_distance, conjugator_from_eigendata, io, op_norm, recover_eigendata, BlockUnitary,
    UnitaryMatrix,
};
use crate::random::random_word;
use crate::scalar::Real;
use crate::words::{
    generator_index, indexed_name, GeneratorAssignment, Interpretation, LabeledWord, Presentation, Syllable,
    Word,
};

/// `α_1 ⊕ … ⊕ α_m` on a shared generating set.
pub fn direct_sum<T: Real>(parts: &[&GeneratorAssignment<T>]) -> Result<GeneratorAssignment<T>> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Dimension("direct sum of no assignments".into()))?;
    let names: Vec<&String> = first.generators().collect();
    for p in &parts[1..] {
        if !p.generators().eq(names.iter().copied()) {
            return Err(Error::Presentation("direct summands assign different generators".into()));
        }
    }
    let map = names
        .iter()
        .map(|&g| {
            let us: Vec<&UnitaryMatrix<T>> = parts.iter().map(|p| p.get(g).expect("same names")).collect();
            (g.clone(), UnitaryMatrix::direct_sum(&us))
        })
        .collect();
    GeneratorAssignment::new_trusted(map)
}

/// A finite group given by its multiplication table, `table[a][b] = a·b`.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Group("empty table".into()));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::Group("table is not an n×n array over 0..n".into()));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::Group("table not a group: no identity".into()))?;
        let mut inverse = vec![0; n];
        for (a, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::Group(format!("table not a group: element {a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Group(format!("table not a group: ({a}·{b})·{c} ≠ {a}·({b}·{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            table,
            identity,
            inverse,
        })
    }

    /// `ℤ/n` with `a·b = a + b mod n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new((0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect())
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

/// Induced representation of `G ⋊ F`: `β(g)` is block diagonal with block `h`
/// equal to `α(h⁻¹gh)`, and `β(k)` moves block `h` to block `kh`.
#[derive(Clone, Debug)]
pub struct SemidirectRep<T> {
    pub group: FiniteGroup,
    pub normal: BTreeMap<String, BlockUnitary<T>>,
    pub complement: Vec<BlockUnitary<T>>,
}

/// `action[k]` sends each generator `g` of `G` to a word for `k⁻¹gk`.
pub fn semidirect_finite<T: Real>(
    alpha: &GeneratorAssignment<T>,
    group: &FiniteGroup,
    action: &[BTreeMap<String, Word>],
) -> Result<SemidirectRep<T>> {
    let order = group.order();
    if action.len() != order {
        return Err(Error::Group(format!(
            "action lists {} automorphisms for a group of order {order}",
            action.len()
        )));
    }
    let gens: Vec<&String> = alpha.generators().collect();
    for (k, theta) in action.iter().enumerate() {
        if theta.len() != gens.len() || gens.iter().any(|g| !theta.contains_key(*g)) {
            return Err(Error::Group(format!("action of element {k} does not cover the generators")));
        }
        for w in theta.values() {
            if let Some(g) = w.generators().into_iter().find(|g| alpha.get(g).is_none()) {
                return Err(Error::UnknownGenerator(g.to_string()));
            }
        }
    }
    let e = group.identity();
    if gens.iter().any(|g| action[e][*g] != Word::generator(g.as_str())) {
        return Err(Error::Group("identity does not act trivially".into()));
    }
    let mut normal = BTreeMap::new();
    for g in &gens {
        let blocks = (0..order)
            .map(|h| action[h][*g].evaluate(alpha))
            .collect::<Result<Vec<_>>>()?;
        normal.insert((*g).clone(), BlockUnitary::block_diagonal(blocks)?);
    }
    let complement = (0..order)
        .map(|k| BlockUnitary::block_permutation(alpha.dim(), (0..order).map(|h| group.mul(k, h)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SemidirectRep {
        group: group.clone(),
        normal,
        complement,
    })
}

impl<T: Real> SemidirectRep<T> {
    /// Dense assignment for the generators of `G` together with the named
    /// elements of `F`.
    pub fn to_assignment(&self, complement_names: &[(String, usize)]) -> Result<GeneratorAssignment<T>> {
        let mut map = BTreeMap::new();
        for (g, b) in &self.normal {
            map.insert(g.clone(), UnitaryMatrix::assume_unitary(b.to_dense()?));
        }
        for (name, k) in complement_names {
            let b = self
                .complement
                .get(*k)
                .ok_or_else(|| Error::Group(format!("no group element {k}")))?;
            if map.insert(name.clone(), UnitaryMatrix::assume_unitary(b.to_dense()?)).is_some() {
                return Err(Error::Presentation(format!("generator `{name}` assigned twice")));
            }
        }
        GeneratorAssignment::new_trusted(map)
    }
}

/// Block-structured unitaries keyed by generator name.
#[derive(Clone, Debug)]
pub struct BlockAssignment<T> {
    pub map: BTreeMap<String, BlockUnitary<T>>,
}

impl<T: Real> Interpretation for BlockAssignment<T> {
    type Value = BlockUnitary<T>;

    fn identity(&self) -> BlockUnitary<T> {
        let any = self.map.values().next();
        BlockUnitary::identity(any.map_or(0, |b| b.block_dim()), any.map_or(0, |b| b.block_count()))
    }

    fn power(&self, gen: &str, exp: i64) -> Result<BlockUnitary<T>> {
        self.map
            .get(gen)
            .ok_or_else(|| Error::UnknownGenerator(gen.to_string()))?
            .pow(exp)
    }

    fn mul(&self, a: &BlockUnitary<T>, b: &BlockUnitary<T>) -> Result<BlockUnitary<T>> {
        a.mul(b)
    }

    fn distance_from_identity(&self, v: &BlockUnitary<T>) -> Result<f64> {
        Ok(v.distance_from_identity()?.to_f64_lossy())
    }
}

/// Largest `p` accepted by [`build_baumslag`].
pub const BAUMSLAG_MAX_P: u32 = 11;

/// Estimated peak storage allowed for one instance, in bytes.
pub const BAUMSLAG_MEMORY_BUDGET: u64 = 3 << 30;

/// `2j + 1 = (2k0 + 1)(2N + 1)`.
pub fn window_half_width(k0: u64, n: u64) -> Result<u64> {
    (2 * k0 + 1)
        .checked_mul(2 * n + 1)
        .map(|w| (w - 1) / 2)
        .ok_or_else(|| Error::OutOfRange("window size overflows".into()))
}

fn estimated_bytes(f: u64, j: u64, n: u64) -> u64 {
    let per = f.saturating_mul(f).saturating_mul(16);
    // chain with frames, the A blocks, path points with frames
    per.saturating_mul(2 * (2 * j + 3) + (2 * j + 1) + 2 * (2 * n + 1))
}

/// The pair `(A, B)` approximately satisfying `a^{a^b} = a²`.
///
/// `A` is block diagonal with blocks `A_c = v_i⁻¹ φ(a_i) v_i` for
/// `i = c − j ∈ [−j, j]`, where `φ` is the chain representation and
/// `v_i = u_{⌊(i+j)/(2k0+1)⌋ − N}` runs along the geodesic from `I` to `u⁻¹`,
/// `u` conjugating `φ(a_{−j})` approximately onto `φ(a_{j+1})`. `B` is the
/// block shift with `B⁻¹ A B` having block `c` equal to `A_{c+1}`.
#[derive(Clone, Debug)]
pub struct BaumslagInstance<T> {
    pub p: u32,
    pub k0: u64,
    pub n: u64,
    pub j: u64,
    pub chain: ChainRep<T>,
    pub conjugator: UnitaryMatrix<T>,
    pub path: GeodesicPath<T>,
    pub a: BlockUnitary<T>,
    pub b: BlockUnitary<T>,
    /// Largest chain defect.
    pub delta_chain: f64,
    /// Largest step `‖u_{t+1} − u_t‖` of the path.
    pub delta_step: f64,
    /// `‖u⁻¹ φ(a_{−j}) u − φ(a_{j+1})‖`.
    pub delta_conj: f64,
    pub epsilon_eff: f64,
    /// `‖A_{c+1}⁻¹ A_c A_{c+1} − A_c²‖` for each block `c`, the last one wrapping around.
    pub block_defects: Vec<f64>,
}

pub fn build_baumslag<T: Real>(p: u32, k0: u64, n: u64) -> Result<BaumslagInstance<T>> {
    if p > BAUMSLAG_MAX_P {
        return Err(Error::Cap(format!("p = {p} exceeds {BAUMSLAG_MAX_P}")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let j = window_half_width(k0, n)?;
    let f = crate::chain::modulus(p);
    let bytes = estimated_bytes(f, j, n);
    if bytes > BAUMSLAG_MEMORY_BUDGET {
        return Err(Error::Cap(format!(
            "instance needs about {} MiB (budget {} MiB)",
            bytes >> 20,
            BAUMSLAG_MEMORY_BUDGET >> 20
        )));
    }
    let mut chain = build_chain::<T>(p, j)?;
    let ji = j as i64;
    let x = chain.generator(-ji)?;
    let y = chain.generator(ji + 1)?;
    let matching = circular_matching_distance(
        &x.spectrum().ok_or(Error::MissingEigendata("chain generator"))?,
        &y.spectrum().ok_or(Error::MissingEigendata("chain generator"))?,
    )?;
    let conj = conjugator_from_eigendata(x, y, &matching)?;
    let delta_conj = conj.residual.to_f64_lossy();
    for g in chain.gens.values_mut() {
        *g = std::mem::replace(g, UnitaryMatrix::identity(0)).drop_eigendata();
    }
    let conjugator = recover_eigendata(&conj.unitary)?;
    let path = geodesic_path_steps(&conjugator, n)?;
    let delta_step = path.max_step()?;

    let width = 2 * k0 + 1;
    let blocks: Vec<UnitaryMatrix<T>> = (0..=2 * j)
        .into_par_iter()
        .map(|c| {
            let g = &chain.gens[&(c as i64 - ji)];
            let v = path.point((c / width) as i64 - n as i64);
            if v.matrix().is_identity() {
                g.clone()
            } else {
                g.conjugated_by(&v.clone().drop_eigendata())
            }
        })
        .collect();
    let a = BlockUnitary::block_diagonal(blocks)?;
    let m = a.block_count();
    let b = BlockUnitary::block_permutation(f as usize, (0..m).map(|c| (c + 1) % m).collect())?;

    let block_defects = (0..m)
        .into_par_iter()
        .map(|c| {
            let ac = a.block(c);
            let next = a.block((c + 1) % m);
            let lhs = ac.conjugated_by(next);
            let sq = ac.mul(ac);
            Ok(op_norm(&lhs.matrix().sub(sq.matrix()))?.to_f64_lossy())
        })
        .collect::<Result<Vec<f64>>>()?;

    let delta_chain = chain.max_defect();
    Ok(BaumslagInstance {
        p,
        k0,
        n,
        j,
        chain,
        conjugator,
        path,
        a,
        b,
        delta_chain,
        delta_step,
        delta_conj,
        epsilon_eff: delta_chain.max(delta_step).max(delta_conj),
        block_defects,
    })
}

impl<T: Real> BaumslagInstance<T> {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `‖R‖ = max_c ‖R_c‖`, the defect of the relator on `(A, B)`.
    pub fn total_defect(&self) -> f64 {
        self.block_defects.iter().copied().fold(0.0, f64::max)
    }

    pub fn wrap_defect(&self) -> f64 {
        *self.block_defects.last().expect("at least one block")
    }

    pub fn interior_defect(&self) -> f64 {
        let k = self.block_defects.len() - 1;
        self.block_defects[..k].iter().copied().fold(0.0, f64::max)
    }

    /// Interior blocks within `17 ε_eff`.
    pub fn interior_within_bound(&self) -> bool {
        self.interior_defect() <= 17.0 * self.epsilon_eff
    }

    /// Wraparound block within `3 ε_eff`.
    pub fn wrap_within_bound(&self) -> bool {
        self.wrap_defect() <= 3.0 * self.epsilon_eff
    }

    pub fn assignment(&self) -> BlockAssignment<T> {
        BlockAssignment {
            map: BTreeMap::from([("a".to_string(), self.a.clone()), ("b".to_string(), self.b.clone())]),
        }
    }

    /// `ω(B^{−i} A B^{i})` for a word `ω` over `a_i`, `|i| ≤ j`.
    pub fn word_in_ab(&self, w: &Word) -> Result<BlockUnitary<T>> {
        w.interpret(&self.assignment_window(w)?)
    }

    fn assignment_window(&self, w: &Word) -> Result<WindowAssignment<'_, T>> {
        for g in w.generators() {
            let i = generator_index(g)?;
            if i.unsigned_abs() > self.j {
                return Err(Error::OutOfRange(format!("a{i} lies outside the window |i| ≤ {}", self.j)));
            }
        }
        Ok(WindowAssignment { inst: self })
    }

    /// The block of `ω(B^{−i} A B^{i})` at index 0, which is `P_0 (·) P_0`.
    pub fn compress(&self, v: &BlockUnitary<T>) -> Result<UnitaryMatrix<T>> {
        if !v.is_block_diagonal() {
            return Err(Error::Precondition("compression of a non-block-diagonal operator".into()));
        }
        Ok(v.block(self.j as usize).clone())
    }

    /// Largest `‖P_0 ω(B^{−i}AB^{i}) P_0 − ω(φ)‖` over the given words.
    pub fn compression_error(&self, words: &[Word]) -> Result<f64> {
        let phi = self.chain.assignment()?;
        let errs = words
            .par_iter()
            .map(|w| {
                let lhs = self.compress(&self.word_in_ab(w)?)?;
                let rhs = w.evaluate(&phi)?;
                Ok(op_norm(&lhs.matrix().sub(rhs.matrix()))?.to_f64_lossy())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }

    pub fn manifest(&self) -> serde_json::Value {
        serde_json::to_value(BaumslagManifest {
            p: self.p,
            k0: self.k0,
            n: self.n,
            j: self.j,
            f: self.a.block_dim(),
            dim: self.dim(),
            epsilon_eff: self.epsilon_eff,
            delta_chain: self.delta_chain,
            delta_step: self.delta_step,
            delta_conj: self.delta_conj,
            block_defects: &self.block_defects,
            total_defect: self.total_defect(),
            interior_within_bound: self.interior_within_bound(),
            wrap_within_bound: self.wrap_within_bound(),
        })
        .expect("manifest serializes")
    }

    /// `manifest.json` and the structure of `B` in `B.json` (identity blocks,
    /// so only the permutation). With `matrices`, also the blocks of `A` as
    /// `A_block_<c>.json`, the chain generators under `phi/` and the path
    /// points as `path/u_<t>.json`.
    pub fn write(&self, dir: &Path, matrices: bool) -> Result<()> {
        let io_err = |source| Error::Io {
            path: dir.display().to_string(),
            source,
        };
        fs::create_dir_all(dir).map_err(io_err)?;
        if matrices {
            for (c, blk) in self.a.blocks().iter().enumerate() {
                io::write_matrix(&dir.join(format!("A_block_{c}.json")), blk.matrix())?;
            }
            self.chain.write(&dir.join("phi"))?;
            let path_dir = dir.join("path");
            fs::create_dir_all(&path_dir).map_err(io_err)?;
            let k = self.n as i64;
            for t in -k..=k {
                io::write_matrix(&path_dir.join(format!("u_{t}.json")), self.path.point(t).matrix())?;
            }
        }
        let b = serde_json::json!({
            "block_dim": self.b.block_dim(),
            "block_count": self.b.block_count(),
            "permutation": self.b.permutation(),
        });
        fs::write(dir.join("B.json"), serde_json::to_string_pretty(&b).expect("serializes")).map_err(io_err)?;
        let text = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), text).map_err(io_err)
    }
}

#[derive(Serialize)]
struct BaumslagManifest<'a> {
    p: u32,
    k0: u64,
    #[serde(rename = "N")]
    n: u64,
    j: u64,
    f: usize,
    dim: usize,
    epsilon_eff: f64,
    delta_chain: f64,
    delta_step: f64,
    delta_conj: f64,
    block_defects: &'a [f64],
    total_defect: f64,
    interior_within_bound: bool,
    wrap_within_bound: bool,
}

/// `a_i ↦ B^{−i} A B^{i}`, realized as the block rotation of `A` by `i`.
struct WindowAssignment<'a, T> {
    inst: &'a BaumslagInstance<T>,
}

impl<T: Real> Interpretation for WindowAssignment<'_, T> {
    type Value = BlockUnitary<T>;

    fn identity(&self) -> BlockUnitary<T> {
        BlockUnitary::identity(self.inst.a.block_dim(), self.inst.a.block_count())
    }

    fn power(&self, gen: &str, exp: i64) -> Result<BlockUnitary<T>> {
        let i = generator_index(gen)?;
        let b = &self.inst.b;
        b.pow(-i)?.mul(&self.inst.a.pow(exp)?)?.mul(&b.pow(i)?)
    }

    fn mul(&self, a: &BlockUnitary<T>, b: &BlockUnitary<T>) -> Result<BlockUnitary<T>> {
        a.mul(b)
    }

    fn distance_from_identity(&self, v: &BlockUnitary<T>) -> Result<f64> {
        Ok(v.distance_from_identity()?.to_f64_lossy())
    }
}

/// `a_i` as a word in `a, b`: `b^{−i} a b^{i}`.
pub fn indexed_in_ab(i: i64) -> Word {
    Word::from_syllables(vec![Syllable::new("b", -i), Syllable::new("a", 1), Syllable::new("b", i)])
}

/// Rewrite a word over `a_i` in the generators `a, b`.
pub fn to_ab(w: &Word) -> Result<Word> {
    let mut map = BTreeMap::new();
    for g in w.generators() {
        map.insert(g.to_string(), indexed_in_ab(generator_index(g)?));
    }
    Ok(w.substitute(&map))
}

/// The relator `a^{a^b} a^{−2}` in `a, b`.
pub fn baumslag_relator() -> Word {
    Word::parse("b^-1 a^-1 b a b^-1 a b a^-2").expect("valid relator")
}

/// Presentation checked for an instance with window `k0`: the relator together
/// with its shifts `a_{i+1}⁻¹ a_i a_{i+1} a_i⁻²` for `−k0 ≤ i < k0`, and the
/// words `a`, `b` and `a_i a_l⁻¹` for `−k0 ≤ i < l ≤ k0`.
pub fn baumslag_presentation(k0: u64) -> Result<Presentation> {
    let k = k0 as i64;
    let mut relators = vec![baumslag_relator()];
    for i in -k..k {
        let r = to_ab(&crate::words::chain_relator(i))?;
        if !relators.contains(&r) {
            relators.push(r);
        }
    }
    let mut words = vec![
        LabeledWord {
            label: "a".into(),
            word: Word::generator("a"),
            trivial: false,
        },
        LabeledWord {
            label: "b".into(),
            word: Word::generator("b"),
            trivial: false,
        },
    ];
    for i in -k..=k {
        for l in i + 1..=k {
            let w = Word::generator(indexed_name(i)).concat(&Word::power(indexed_name(l), -1));
            words.push(LabeledWord {
                label: format!("{} {}^-1", indexed_name(i), indexed_name(l)),
                word: to_ab(&w)?,
                trivial: false,
            });
        }
    }
    Presentation::new("Baumslag", vec!["a".into(), "b".into()], relators, words)
}

/// Random words over `a_{−k0}..a_{k0}`.
pub fn random_window_words<R: Rng>(rng: &mut R, k0: u64, count: usize, len: usize) -> Vec<Word> {
    let k = k0 as i64;
    let gens: Vec<String> = (-k..=k).map(indexed_name).collect();
    (0..count).map(|_| random_word(rng, &gens, len, 2).reduce()).collect()
}
