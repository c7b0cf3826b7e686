//! Free-group words: parsing, free reduction, evaluation, and presentations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::UnitaryMatrix;
use crate::scalar::Real;

/// Exponents are limited to `|e| < 2^31` so that merging never overflows.
pub const MAX_EXPONENT: i64 = (1 << 31) - 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub gen: String,
    pub exp: i64,
}

impl Syllable {
    pub fn new(gen: impl Into<String>, exp: i64) -> Self {
        Syllable { gen: gen.into(), exp }
    }
}

/// A word as a list of syllables `g^e`.
///
/// Words built through [`Word::parse`], [`Word::from_syllables`] and the
/// algebraic operations are reduced; [`Word::from_syllables_unreduced`] keeps
/// its input verbatim.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn generator(gen: impl Into<String>) -> Self {
        Word::power(gen, 1)
    }

    pub fn power(gen: impl Into<String>, exp: i64) -> Self {
        Word::from_syllables(vec![Syllable::new(gen, exp)])
    }

    pub fn from_syllables(syllables: Vec<Syllable>) -> Self {
        Word { syllables }.reduce()
    }

    pub fn from_syllables_unreduced(syllables: Vec<Syllable>) -> Self {
        Word { syllables }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of syllables.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    /// Sum of `|exponent|` over syllables.
    pub fn letter_length(&self) -> u64 {
        self.syllables.iter().map(|s| s.exp.unsigned_abs()).sum()
    }

    pub fn is_reduced(&self) -> bool {
        self.syllables.iter().all(|s| s.exp != 0)
            && self.syllables.windows(2).all(|w| w[0].gen != w[1].gen)
    }

    /// Free reduction: merge equal neighbours and drop zero exponents until stable.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Syllable> = Vec::with_capacity(self.syllables.len());
        for s in &self.syllables {
            if s.exp == 0 {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.gen == s.gen => {
                    top.exp += s.exp;
                    if top.exp == 0 {
                        out.pop();
                    }
                }
                _ => out.push(s.clone()),
            }
        }
        Word { syllables: out }
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable::new(s.gen.clone(), -s.exp))
                .collect(),
        }
    }

    /// Reduced product `self · rhs`.
    pub fn concat(&self, rhs: &Word) -> Word {
        let mut s = self.syllables.clone();
        s.extend_from_slice(&rhs.syllables);
        Word { syllables: s }.reduce()
    }

    /// `x⁻¹ · self · x`.
    pub fn conjugate_by(&self, x: &Word) -> Word {
        x.inverse().concat(self).concat(x)
    }

    /// Distinct generator names, sorted.
    pub fn generators(&self) -> BTreeSet<&str> {
        self.syllables.iter().map(|s| s.gen.as_str()).collect()
    }

    /// Replace every generator by a word; generators missing from the map stay.
    pub fn substitute(&self, map: &BTreeMap<String, Word>) -> Word {
        let mut out = Word::empty();
        for s in &self.syllables {
            let piece = match map.get(&s.gen) {
                Some(w) => {
                    let base = if s.exp < 0 { w.inverse() } else { w.clone() };
                    let mut acc = Word::empty();
                    for _ in 0..s.exp.unsigned_abs() {
                        acc = acc.concat(&base);
                    }
                    acc
                }
                None => Word::power(s.gen.clone(), s.exp),
            };
            out = out.concat(&piece);
        }
        out
    }

    /// Parse and reduce. Grammar: whitespace-separated syllables `gen` or
    /// `gen^e` with `e` a nonzero integer; `gen` is an identifier, optionally
    /// followed by `-digits` for negatively indexed names like `a-3`.
    pub fn parse(text: &str) -> Result<Word> {
        Ok(Word::parse_unreduced(text)?.reduce())
    }

    /// Parse without reducing.
    pub fn parse_unreduced(text: &str) -> Result<Word> {
        let chars: Vec<char> = text.chars().collect();
        let mut pos = 0;
        let mut syllables = Vec::new();
        let err = |position: usize, message: &str| Error::Syntax {
            position,
            message: message.to_string(),
        };
        loop {
            while pos < chars.len() && chars[pos].is_whitespace() {
                pos += 1;
            }
            if pos == chars.len() {
                break;
            }
            let start = pos;
            let c = chars[pos];
            if !(c.is_ascii_alphabetic() || c == '_') {
                return Err(err(pos, &format!("expected a generator name, found `{c}`")));
            }
            while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_') {
                pos += 1;
            }
            if pos + 1 < chars.len() && chars[pos] == '-' && chars[pos + 1].is_ascii_digit() {
                pos += 1;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            let gen: String = chars[start..pos].iter().collect();
            let mut exp = 1i64;
            if pos < chars.len() && chars[pos] == '^' {
                pos += 1;
                let exp_start = pos;
                let negative = pos < chars.len() && chars[pos] == '-';
                if negative {
                    pos += 1;
                }
                let digits_start = pos;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
                if digits_start == pos {
                    return Err(err(pos, "expected exponent digits after `^`"));
                }
                let digits: String = chars[digits_start..pos].iter().collect();
                let magnitude: i64 = digits
                    .parse()
                    .ok()
                    .filter(|&m| m <= MAX_EXPONENT)
                    .ok_or_else(|| err(digits_start, "exponent too large"))?;
                if magnitude == 0 {
                    return Err(err(exp_start, "exponent 0 is not allowed"));
                }
                exp = if negative { -magnitude } else { magnitude };
            }
            if pos < chars.len() && !chars[pos].is_whitespace() {
                return Err(err(pos, &format!("expected whitespace, found `{}`", chars[pos])));
            }
            syllables.push(Syllable { gen, exp });
        }
        Ok(Word { syllables })
    }

    /// Left-to-right product of generator powers in `interp`.
    pub fn interpret<I: Interpretation>(&self, interp: &I) -> Result<I::Value> {
        let mut acc: Option<I::Value> = None;
        for s in &self.syllables {
            let g = interp.power(&s.gen, s.exp).map_err(|e| e.in_word(self))?;
            acc = Some(match acc {
                None => g,
                Some(a) => interp.mul(&a, &g).map_err(|e| e.in_word(self))?,
            });
        }
        Ok(acc.unwrap_or_else(|| interp.identity()))
    }

    /// Evaluate in matrices; negative exponents use the adjoint.
    pub fn evaluate<T: Real>(&self, asg: &GeneratorAssignment<T>) -> Result<UnitaryMatrix<T>> {
        self.interpret(asg)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.syllables.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            if s.exp == 1 {
                write!(f, "{}", s.gen)?;
            } else {
                write!(f, "{}^{}", s.gen, s.exp)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        Word::parse(s)
    }
}

/// A target for word evaluation.
pub trait Interpretation {
    type Value;
    fn identity(&self) -> Self::Value;
    fn power(&self, gen: &str, exp: i64) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    /// `‖v − I‖` in operator norm.
    fn distance_from_identity(&self, v: &Self::Value) -> Result<f64>;
}

/// Generator name of `a_i`.
pub fn indexed_name(i: i64) -> String {
    format!("a{i}")
}

/// Index `i` of a generator named `a<i>`.
pub fn generator_index(name: &str) -> Result<i64> {
    let rest = name
        .strip_prefix('a')
        .ok_or_else(|| Error::NotIndexed(name.to_string()))?;
    let digits = rest.strip_prefix('-').unwrap_or(rest);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::NotIndexed(name.to_string()));
    }
    rest.parse().map_err(|_| Error::NotIndexed(name.to_string()))
}

/// Largest `|i|` over generators `a_i` occurring in the reduced words; 0 when none occur.
pub fn max_k(words: &[Word]) -> Result<u64> {
    let mut best = 0;
    for w in words {
        for g in w.reduce().generators() {
            best = best.max(generator_index(g)?.unsigned_abs());
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledWord {
    pub label: String,
    pub word: Word,
    /// Explicitly trivial entries are evaluated and reported but do not count
    /// towards the separation verdict.
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
    pub words: Vec<LabeledWord>,
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    name: String,
    generators: Vec<String>,
    relators: Vec<String>,
    #[serde(default)]
    words: Vec<WordEntry>,
}

#[derive(Serialize, Deserialize)]
struct WordEntry {
    label: String,
    word: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    trivial: bool,
}

impl Presentation {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<String>,
        relators: Vec<Word>,
        words: Vec<LabeledWord>,
    ) -> Result<Self> {
        let p = Presentation {
            name: name.into(),
            generators,
            relators: relators.iter().map(Word::reduce).collect(),
            words: words
                .into_iter()
                .map(|lw| LabeledWord {
                    word: lw.word.reduce(),
                    ..lw
                })
                .collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let declared: BTreeSet<&str> = self.generators.iter().map(String::as_str).collect();
        if declared.len() != self.generators.len() {
            return Err(Error::Presentation("duplicate generator names".into()));
        }
        let all = self.relators.iter().chain(self.words.iter().map(|lw| &lw.word));
        for w in all {
            if let Some(g) = w.generators().into_iter().find(|g| !declared.contains(g)) {
                return Err(Error::Presentation(format!("`{w}` uses undeclared generator `{g}`")));
            }
        }
        if let Some(lw) = self.words.iter().find(|lw| lw.word.is_empty() && !lw.trivial) {
            return Err(Error::Presentation(format!(
                "word `{}` reduces to the identity but is not labelled trivial",
                lw.label
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PresentationFile = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "presentation".into(),
            source,
        })?;
        let relators = file
            .relators
            .iter()
            .map(|r| Word::parse(r).map_err(|e| e.in_word(r)))
            .collect::<Result<Vec<_>>>()?;
        let words = file
            .words
            .into_iter()
            .map(|e| {
                Ok(LabeledWord {
                    word: Word::parse(&e.word).map_err(|err| err.in_word(&e.word))?,
                    label: e.label,
                    trivial: e.trivial,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(file.name, file.generators, relators, words)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = PresentationFile {
            name: self.name.clone(),
            generators: self.generators.clone(),
            relators: self.relators.iter().map(Word::to_string).collect(),
            words: self
                .words
                .iter()
                .map(|lw| WordEntry {
                    label: lw.label.clone(),
                    word: lw.word.to_string(),
                    trivial: lw.trivial,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("presentation serializes")
    }
}

/// The relator `a_{i+1}⁻¹ a_i a_{i+1} a_i⁻²` of `a_i^{a_{i+1}} = a_i²`.
pub fn chain_relator(i: i64) -> Word {
    let (lo, hi) = (indexed_name(i), indexed_name(i + 1));
    Word::from_syllables(vec![
        Syllable::new(hi.clone(), -1),
        Syllable::new(lo.clone(), 1),
        Syllable::new(hi, 1),
        Syllable::new(lo, -2),
    ])
}

/// `H_j`: generators `a_{−j}..a_j` with `a_i^{a_{i+1}} = a_i²` for `−j ≤ i < j`.
pub fn chain_presentation(j: u64) -> Presentation {
    let j = j as i64;
    Presentation {
        name: format!("H_{j}"),
        generators: (-j..=j).map(indexed_name).collect(),
        relators: (-j..j).map(chain_relator).collect(),
        words: Vec::new(),
    }
}

/// Unitary matrices for each generator, all of one dimension.
#[derive(Clone, Debug)]
pub struct GeneratorAssignment<T> {
    dim: usize,
    map: BTreeMap<String, UnitaryMatrix<T>>,
}

impl<T: Real> GeneratorAssignment<T> {
    /// Validates unitarity (and tracked eigendata) of every matrix.
    pub fn new(map: BTreeMap<String, UnitaryMatrix<T>>) -> Result<Self> {
        for (g, u) in &map {
            u.validate().map_err(|e| e.in_word(g))?;
        }
        Self::new_trusted(map)
    }

    /// Checks only the common dimension.
    pub fn new_trusted(map: BTreeMap<String, UnitaryMatrix<T>>) -> Result<Self> {
        let dim = map.values().next().map(|u| u.dim()).unwrap_or(0);
        if let Some((g, u)) = map.iter().find(|(_, u)| u.dim() != dim) {
            return Err(Error::Dimension(format!(
                "generator `{g}` has dimension {} instead of {dim}",
                u.dim()
            )));
        }
        Ok(GeneratorAssignment { dim, map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, gen: &str) -> Option<&UnitaryMatrix<T>> {
        self.map.get(gen)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &UnitaryMatrix<T>)> {
        self.map.iter()
    }

    pub fn generators(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn covers(&self, pres: &Presentation) -> Result<()> {
        match pres.generators.iter().find(|g| !self.map.contains_key(*g)) {
            Some(g) => Err(Error::UnknownGenerator(g.clone())),
            None => Ok(()),
        }
    }

    pub fn into_map(self) -> BTreeMap<String, UnitaryMatrix<T>> {
        self.map
    }
}

impl<T: Real> Interpretation for GeneratorAssignment<T> {
    type Value = UnitaryMatrix<T>;

    fn identity(&self) -> UnitaryMatrix<T> {
        UnitaryMatrix::identity(self.dim)
    }

    fn power(&self, gen: &str, exp: i64) -> Result<UnitaryMatrix<T>> {
        let u = self
            .map
            .get(gen)
            .ok_or_else(|| Error::UnknownGenerator(gen.to_string()))?;
        Ok(u.pow(exp))
    }

    fn mul(&self, a: &UnitaryMatrix<T>, b: &UnitaryMatrix<T>) -> Result<UnitaryMatrix<T>> {
        Ok(a.mul(b))
    }

    fn distance_from_identity(&self, v: &UnitaryMatrix<T>) -> Result<f64> {
        Ok(v.distance_from_identity()?.to_f64_lossy())
    }
}
