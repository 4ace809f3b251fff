//! Exact symbolic algebra of generalized Pauli words.
//!
//! A word on `n` sites of local dimension `d` is stored as
//!
//! ```text
//! ω_{2d}^phase · X^{x_1} Z^{z_1} ⊗ … ⊗ X^{x_n} Z^{z_n}
//! ```
//!
//! with `X` the cyclic shift, `Z` the clock and `Z X = ω_d X Z`. Keeping the
//! phase as an exponent of `ω_{2d} = e^{iπ/d}` makes every product exact and
//! accommodates `Y = i·XZ` for qubits. Linear combinations ([`OperatorSum`])
//! fold the phase into a complex coefficient keyed by the phase-free word.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{DenseOperator, DENSE_DIM_LIMIT};
use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped when terms merge.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Local dimension `d` and number of sites `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlgebraSpec {
    d: u32,
    n: usize,
}

impl AlgebraSpec {
    pub fn new(d: u32, n: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSpec(format!("local dimension {d} < 2")));
        }
        if n < 1 {
            return Err(Error::InvalidSpec("at least one site is required".into()));
        }
        Ok(AlgebraSpec { d, n })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dense dimension `d^n`, checked against the dense backend's limit.
    pub fn dim(&self) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..self.n {
            dim = dim
                .checked_mul(self.d as usize)
                .filter(|&v| v <= DENSE_DIM_LIMIT)
                .ok_or(Error::DimensionOverflow {
                    dim: usize::MAX,
                    limit: DENSE_DIM_LIMIT,
                })?;
        }
        Ok(dim)
    }

    /// `ω_{2d}^k`.
    pub fn half_root_power(&self, k: u32) -> Complex64 {
        let k = k % (2 * self.d);
        match (self.d, k) {
            // exact values for the qubit phases
            (2, 0) => Complex64::new(1.0, 0.0),
            (2, 1) => Complex64::new(0.0, 1.0),
            (2, 2) => Complex64::new(-1.0, 0.0),
            (2, 3) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, PI * k as f64 / self.d as f64),
        }
    }

    fn ensure_same(&self, other: &AlgebraSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d={}, n={})", self.d, self.n)
    }
}

/// Phase-free part of a word: the X and Z exponent vectors. Ordered
/// lexicographically, X exponents first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordKey {
    pub x: Vec<u32>,
    pub z: Vec<u32>,
}

impl WordKey {
    pub fn identity(n: usize) -> Self {
        WordKey {
            x: vec![0; n],
            z: vec![0; n],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&e| e == 0)
    }

    /// Number of sites carrying a non-identity factor.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(x, z)| **x != 0 || **z != 0).count()
    }

    /// Number of nonzero X and Z exponents; a qubit `Y` counts twice.
    pub fn letter_weight(&self) -> usize {
        self.x.iter().chain(&self.z).filter(|&&e| e != 0).count()
    }
}

/// A single generalized Pauli word with an exact phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliWord {
    spec: AlgebraSpec,
    phase: u32,
    key: WordKey,
}

impl PauliWord {
    pub fn identity(spec: AlgebraSpec) -> Self {
        PauliWord {
            spec,
            phase: 0,
            key: WordKey::identity(spec.n),
        }
    }

    /// Builds a word from raw exponents, reducing every residue.
    pub fn new(spec: AlgebraSpec, phase: u32, x: Vec<u32>, z: Vec<u32>) -> Result<Self> {
        if x.len() != spec.n || z.len() != spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n,
                found: x.len().max(z.len()),
            });
        }
        let d = spec.d;
        Ok(PauliWord {
            spec,
            phase: phase % (2 * d),
            key: WordKey {
                x: x.into_iter().map(|e| e % d).collect(),
                z: z.into_iter().map(|e| e % d).collect(),
            },
        })
    }

    pub(crate) fn from_key(spec: AlgebraSpec, phase: u32, key: WordKey) -> Self {
        PauliWord {
            spec,
            phase: phase % (2 * spec.d),
            key,
        }
    }

    /// `X` on a single site (0-based).
    pub fn x_at(spec: AlgebraSpec, site: usize) -> Result<Self> {
        Self::single(spec, site, 1, 0, 0)
    }

    /// `Z` on a single site (0-based).
    pub fn z_at(spec: AlgebraSpec, site: usize) -> Result<Self> {
        Self::single(spec, site, 0, 1, 0)
    }

    /// Qubit `Y = i·XZ` on a single site (0-based).
    pub fn y_at(spec: AlgebraSpec, site: usize) -> Result<Self> {
        if spec.d != 2 {
            return Err(Error::Unsupported("Y is defined for d = 2 only".into()));
        }
        Self::single(spec, site, 1, 1, 1)
    }

    fn single(spec: AlgebraSpec, site: usize, x: u32, z: u32, phase: u32) -> Result<Self> {
        if site >= spec.n {
            return Err(Error::Domain(format!("site {site} out of range for {spec}")));
        }
        let mut w = Self::identity(spec);
        w.key.x[site] = x % spec.d;
        w.key.z[site] = z % spec.d;
        w.phase = phase;
        Ok(w)
    }

    /// Parses a qubit word string such as `"IXZZX"` or `"YY"`. Each `Y`
    /// contributes a factor `i` to the phase.
    pub fn from_letters(letters: &str) -> Result<Self> {
        let chars: Vec<char> = letters.chars().collect();
        let spec = AlgebraSpec::qubits(chars.len())?;
        let mut w = Self::identity(spec);
        for (site, c) in chars.iter().enumerate() {
            let (x, z, p) = match c {
                'I' => (0, 0, 0),
                'X' => (1, 0, 0),
                'Z' => (0, 1, 0),
                'Y' => (1, 1, 1),
                other => {
                    return Err(Error::Syntax {
                        position: site + 1,
                        message: format!("unexpected letter `{other}` in word string"),
                    })
                }
            };
            w.key.x[site] = x;
            w.key.z[site] = z;
            w.phase = (w.phase + p) % 4;
        }
        Ok(w)
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    /// Exponent of `ω_{2d}`.
    pub fn phase_exp(&self) -> u32 {
        self.phase
    }

    pub fn x_exp(&self) -> &[u32] {
        &self.key.x
    }

    pub fn z_exp(&self) -> &[u32] {
        &self.key.z
    }

    pub fn key(&self) -> &WordKey {
        &self.key
    }

    pub fn phase(&self) -> Complex64 {
        self.spec.half_root_power(self.phase)
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.key.is_identity()
    }

    pub fn weight(&self) -> usize {
        self.key.weight()
    }

    /// Word product in O(n). Reordering `Z^b X^c = ω_d^{bc} X^c Z^b` adds
    /// `2·b·c` to the `ω_{2d}` exponent at every site.
    pub fn mul(&self, other: &PauliWord) -> Result<PauliWord> {
        self.spec.ensure_same(&other.spec)?;
        let d = self.spec.d as u64;
        let two_d = 2 * d;
        let mut phase = (self.phase as u64 + other.phase as u64) % two_d;
        let mut x = Vec::with_capacity(self.spec.n);
        let mut z = Vec::with_capacity(self.spec.n);
        for site in 0..self.spec.n {
            let (ax, az) = (self.key.x[site] as u64, self.key.z[site] as u64);
            let (bx, bz) = (other.key.x[site] as u64, other.key.z[site] as u64);
            phase = (phase + 2 * ((az * bx) % d)) % two_d;
            x.push(((ax + bx) % d) as u32);
            z.push(((az + bz) % d) as u32);
        }
        Ok(PauliWord {
            spec: self.spec,
            phase: phase as u32,
            key: WordKey { x, z },
        })
    }

    /// `(ω^p X^x Z^z)* = ω^{-p} Z^{-z} X^{-x} = ω^{-p + 2 x·z} X^{-x} Z^{-z}`.
    pub fn adjoint(&self) -> PauliWord {
        let d = self.spec.d as u64;
        let two_d = 2 * d;
        let mut phase = (two_d - self.phase as u64) % two_d;
        for site in 0..self.spec.n {
            let (x, z) = (self.key.x[site] as u64, self.key.z[site] as u64);
            phase = (phase + 2 * ((x * z) % d)) % two_d;
        }
        let neg = |e: &u32| ((d - *e as u64) % d) as u32;
        PauliWord {
            spec: self.spec,
            phase: phase as u32,
            key: WordKey {
                x: self.key.x.iter().map(neg).collect(),
                z: self.key.z.iter().map(neg).collect(),
            },
        }
    }

    /// Multiplicative commutator `A B A⁻¹ B⁻¹`. For words this is always a
    /// phase times the identity.
    pub fn group_commutator(&self, other: &PauliWord) -> Result<PauliWord> {
        self.mul(other)?.mul(&self.adjoint())?.mul(&other.adjoint())
    }

    /// Exponent `k` of `ω_{2d}` such that `[self, other]_× = ω_{2d}^k I`.
    pub fn commutation_phase(&self, other: &PauliWord) -> Result<u32> {
        Ok(self.group_commutator(other)?.phase)
    }

    pub fn commutes_with(&self, other: &PauliWord) -> Result<bool> {
        Ok(self.commutation_phase(other)? == 0)
    }

    pub fn pow(&self, k: u32) -> PauliWord {
        let mut acc = PauliWord::identity(self.spec);
        for _ in 0..k {
            acc = acc.mul(self).expect("same spec");
        }
        acc
    }

    pub fn to_sum(&self) -> OperatorSum {
        OperatorSum::from_word(self)
    }

    /// Letter form for qubit words (`Y` for `XZ` sites), prefixed by the
    /// residual phase; exponent form otherwise.
    pub fn label(&self) -> String {
        if self.spec.d == 2 {
            let (letters, ys) = qubit_letters(&self.key);
            let prefix = match (self.phase + 4 - ys % 4) % 4 {
                0 => "",
                1 => "i",
                2 => "-",
                _ => "-i",
            };
            format!("{prefix}{letters}")
        } else {
            let body: Vec<String> = (0..self.spec.n)
                .map(|s| format!("X{}Z{}", self.key.x[s], self.key.z[s]))
                .collect();
            format!("w{}:{}", self.phase, body.join("."))
        }
    }

    /// Dense matrix of the word. A word is monomial: column `k` has a single
    /// entry in row `k + x` (digit-wise mod d).
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let dim = self.spec.dim()?;
        let mut m = DenseOperator::zeros(dim);
        let d = self.spec.d as usize;
        let n = self.spec.n;
        let phase = self.phase();
        let mut digits = vec![0usize; n];
        for col in 0..dim {
            // site 0 is the most significant digit
            let mut rem = col;
            for s in (0..n).rev() {
                digits[s] = rem % d;
                rem /= d;
            }
            let mut row = 0usize;
            let mut clock = 0u64;
            for ((&digit, &x), &z) in digits.iter().zip(&self.key.x).zip(&self.key.z) {
                row = row * d + (digit + x as usize) % d;
                clock += z as u64 * digit as u64;
            }
            let clock = ((2 * clock) % (2 * d as u64)) as u32;
            m[(row, col)] = phase * self.spec.half_root_power(clock);
        }
        Ok(m)
    }
}

fn qubit_letters(key: &WordKey) -> (String, u32) {
    let mut ys = 0;
    let s = key
        .x
        .iter()
        .zip(&key.z)
        .map(|(x, z)| match (x, z) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => {
                ys += 1;
                'Y'
            }
        })
        .collect();
    (s, ys)
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A finite complex linear combination of Pauli words.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    spec: AlgebraSpec,
    terms: BTreeMap<WordKey, Complex64>,
}

/// Binary and unary combination modes of [`op_combine`].
#[derive(Debug, Clone, Copy)]
pub enum Combine<'a> {
    Add(&'a OperatorSum),
    Scale(Complex64),
    Mul(&'a OperatorSum),
    Adjoint,
}

/// Dispatches one of the linear-algebra combinations on operator sums.
pub fn op_combine(a: &OperatorSum, mode: Combine<'_>) -> Result<OperatorSum> {
    match mode {
        Combine::Add(b) => a.add(b),
        Combine::Scale(c) => Ok(a.scale(c)),
        Combine::Mul(b) => a.mul(b),
        Combine::Adjoint => Ok(a.adjoint()),
    }
}

impl OperatorSum {
    pub fn zero(spec: AlgebraSpec) -> Self {
        OperatorSum {
            spec,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(spec: AlgebraSpec) -> Self {
        Self::from_word(&PauliWord::identity(spec))
    }

    pub fn scalar(spec: AlgebraSpec, c: Complex64) -> Self {
        Self::identity(spec).scale(c)
    }

    pub fn from_word(w: &PauliWord) -> Self {
        let mut s = Self::zero(w.spec);
        s.accumulate(w.key.clone(), w.phase());
        s
    }

    /// Builds a sum from `(word, coefficient)` pairs; the word phase is
    /// folded into the coefficient.
    pub fn from_terms<I>(spec: AlgebraSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliWord, Complex64)>,
    {
        let mut s = Self::zero(spec);
        for (w, c) in terms {
            spec.ensure_same(&w.spec)?;
            s.accumulate(w.key.clone(), c * w.phase());
        }
        Ok(s)
    }

    fn accumulate(&mut self, key: WordKey, c: Complex64) {
        let entry = self.terms.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() < DROP_TOLERANCE {
            self.terms.remove(&key);
        }
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    /// Terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&WordKey, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: &WordKey) -> Complex64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    /// The sum as `c · word` when it has exactly one term.
    pub fn as_single_word(&self) -> Option<(Complex64, PauliWord)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        Some((*c, PauliWord::from_key(self.spec, 0, k.clone())))
    }

    pub fn add(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.spec.ensure_same(&other.spec)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.accumulate(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> OperatorSum {
        let mut out = OperatorSum::zero(self.spec);
        for (k, v) in &self.terms {
            out.accumulate(k.clone(), v * c);
        }
        out
    }

    /// Distributes the word product over every pair of terms.
    pub fn mul(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.spec.ensure_same(&other.spec)?;
        let mut out = OperatorSum::zero(self.spec);
        for (ka, ca) in &self.terms {
            let wa = PauliWord::from_key(self.spec, 0, ka.clone());
            for (kb, cb) in &other.terms {
                let wb = PauliWord::from_key(self.spec, 0, kb.clone());
                let w = wa.mul(&wb)?;
                out.accumulate(w.key.clone(), ca * cb * w.phase());
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> OperatorSum {
        let mut out = OperatorSum::zero(self.spec);
        for (k, c) in &self.terms {
            let w = PauliWord::from_key(self.spec, 0, k.clone()).adjoint();
            out.accumulate(w.key.clone(), c.conj() * w.phase());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Result<OperatorSum> {
        let mut acc = OperatorSum::identity(self.spec);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Tensor product; the result lives on `n_a + n_b` sites.
    pub fn tensor(&self, other: &OperatorSum) -> Result<OperatorSum> {
        if self.spec.d != other.spec.d {
            return Err(Error::SpecMismatch {
                left: self.spec,
                right: other.spec,
            });
        }
        let spec = AlgebraSpec::new(self.spec.d, self.spec.n + other.spec.n)?;
        let mut out = OperatorSum::zero(spec);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = WordKey {
                    x: ka.x.iter().chain(&kb.x).copied().collect(),
                    z: ka.z.iter().chain(&kb.z).copied().collect(),
                };
                out.accumulate(key, ca * cb);
            }
        }
        Ok(out)
    }

    /// Largest coefficient difference against `other`.
    pub fn distance(&self, other: &OperatorSum) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &OperatorSum, tol: f64) -> bool {
        self.distance(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        let dim = self.spec.dim()?;
        let mut m = DenseOperator::zeros(dim);
        for (k, c) in &self.terms {
            let w = PauliWord::from_key(self.spec, 0, k.clone()).to_dense()?;
            m = &m + &w.scale(*c);
        }
        Ok(m)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            d: self.spec.d,
            n: self.spec.n,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermJson {
                    x: k.x.clone(),
                    z: k.z.clone(),
                    coeff: [c.re, c.im],
                })
                .collect(),
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<Self> {
        let spec = AlgebraSpec::new(json.d, json.n)?;
        let mut s = OperatorSum::zero(spec);
        for t in &json.terms {
            let w = PauliWord::new(spec, 0, t.x.clone(), t.z.clone())?;
            s.accumulate(w.key, Complex64::new(t.coeff[0], t.coeff[1]));
        }
        Ok(s)
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let w = PauliWord::from_key(self.spec, 0, k.clone());
                format!("({:+}{:+}i)*{}", c.re, c.im, w.label())
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Wire form: `{"d", "n", "terms": [{"x", "z", "coeff": [re, im]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub d: u32,
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub x: Vec<u32>,
    pub z: Vec<u32>,
    pub coeff: [f64; 2],
}

/// Kinds of two-operand brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    /// `AB − BA`
    Commutator,
    /// `AB + BA`
    Anticommutator,
    /// `½(AB + BA)`
    Jordan,
    /// `A B A⁻¹ B⁻¹`, single invertible words only
    Multiplicative,
}

pub fn bracket(kind: BracketKind, a: &OperatorSum, b: &OperatorSum) -> Result<OperatorSum> {
    match kind {
        BracketKind::Commutator => a.mul(b)?.sub(&b.mul(a)?),
        BracketKind::Anticommutator => a.mul(b)?.add(&b.mul(a)?),
        BracketKind::Jordan => Ok(a.mul(b)?.add(&b.mul(a)?)?.scale(Complex64::new(0.5, 0.0))),
        BracketKind::Multiplicative => {
            let inverse = |s: &OperatorSum| -> Result<OperatorSum> {
                let (c, w) = s.as_single_word().ok_or_else(|| {
                    Error::Unsupported("multiplicative bracket needs single words".into())
                })?;
                if c.norm() < DROP_TOLERANCE {
                    return Err(Error::Unsupported("word is not invertible".into()));
                }
                Ok(OperatorSum::from_word(&w.adjoint()).scale(c.inv()))
            };
            let (ai, bi) = (inverse(a)?, inverse(b)?);
            a.mul(b)?.mul(&ai)?.mul(&bi)
        }
    }
}

/// `v₁X + v₂Y + v₃Z` on a single qubit.
pub fn sigma_of_vector(v: [Complex64; 3], spec: AlgebraSpec) -> Result<OperatorSum> {
    if spec.d != 2 || spec.n != 1 {
        return Err(Error::InvalidSpec(format!(
            "sigma(v) needs a single qubit, got {spec}"
        )));
    }
    let words = pauli_triple(spec, 0)?;
    OperatorSum::from_terms(spec, words.into_iter().zip(v))
}

/// `(X, Y, Z)` on the given site.
pub fn pauli_triple(spec: AlgebraSpec, site: usize) -> Result<[PauliWord; 3]> {
    Ok([
        PauliWord::x_at(spec, site)?,
        PauliWord::y_at(spec, site)?,
        PauliWord::z_at(spec, site)?,
    ])
}

/// Every canonical word of the algebra (phase 0), in lexicographic order.
/// There are `d^{2n}` of them.
pub fn all_words(spec: AlgebraSpec) -> Vec<PauliWord> {
    let d = spec.d;
    let n = spec.n;
    let total = (d as usize).pow(2 * n as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut digits = vec![0u32; 2 * n];
        for slot in (0..2 * n).rev() {
            digits[slot] = (rem % d as usize) as u32;
            rem /= d as usize;
        }
        let key = WordKey {
            x: digits[..n].to_vec(),
            z: digits[n..].to_vec(),
        };
        out.push(PauliWord::from_key(spec, 0, key));
    }
    out
}
