//! Stabilizer groups of generalized Pauli words and the codes they define.
//!
//! A stabilizer group is an abelian group of words that does not contain a
//! nontrivial multiple of the identity. Its code space is the range of
//! `Π = |𝒮|⁻¹ Σ_S S`. An error word `E` is characterized by the phases
//! `χ_E(S) = [E, S]_×`, which are multiplicative in `S`; equal characters
//! are indistinguishable by syndrome measurement.
//!
//! Phases are exact exponents of `ω_{2d}` throughout; no character decision
//! is made in floating point.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::KrausSet;
use crate::dense::{self, CMatrix, DenseOperator};
use crate::error::{Error, Result};
use crate::pauli::{all_words, AlgebraSpec, OperatorSum, PauliWord, WordKey, DROP_TOLERANCE};

/// Enumeration cap for stabilizer groups.
pub const MAX_GROUP_ORDER: usize = 1 << 16;

/// Residual tolerance for `Π M Π = c Π` in the Knill–Laflamme check.
pub const KL_TOL: f64 = 1e-8;

/// Eigenvalues of `ν` below this are treated as zero.
const NU_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct StabilizerGroup {
    spec: AlgebraSpec,
    generators: Vec<PauliWord>,
    elements: Vec<PauliWord>,
}

/// Closure of the generators under multiplication.
///
/// Fails when two generators do not commute, when the closure contains a
/// nontrivial phase times the identity, or when it exceeds
/// [`MAX_GROUP_ORDER`].
pub fn group_generate(spec: AlgebraSpec, generators: &[PauliWord]) -> Result<StabilizerGroup> {
    for g in generators {
        if g.spec() != spec {
            return Err(Error::SpecMismatch {
                left: spec,
                right: g.spec(),
            });
        }
    }
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            if !a.commutes_with(b)? {
                return Err(Error::NonCommuting(a.label(), b.label()));
            }
        }
    }
    let identity = PauliWord::identity(spec);
    let mut seen: HashMap<WordKey, u32> = HashMap::new();
    seen.insert(identity.key().clone(), 0);
    let mut frontier = vec![identity];
    while let Some(s) = frontier.pop() {
        for g in generators {
            let t = s.mul(g)?;
            match seen.get(t.key()) {
                Some(&phase) if phase != t.phase_exp() => return Err(Error::InconsistentPhases),
                Some(_) => {}
                None => {
                    if seen.len() >= MAX_GROUP_ORDER {
                        return Err(Error::GroupTooLarge(MAX_GROUP_ORDER));
                    }
                    seen.insert(t.key().clone(), t.phase_exp());
                    frontier.push(t);
                }
            }
        }
    }
    let mut elements: Vec<PauliWord> = seen
        .into_iter()
        .map(|(key, phase)| PauliWord::from_key(spec, phase, key))
        .collect();
    elements.sort_by(|a, b| a.key().cmp(b.key()));
    Ok(StabilizerGroup {
        spec,
        generators: generators.to_vec(),
        elements,
    })
}

impl StabilizerGroup {
    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn generators(&self) -> &[PauliWord] {
        &self.generators
    }

    /// Elements sorted by their phase-free key; the identity comes first.
    pub fn elements(&self) -> &[PauliWord] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Whether `w` equals an element up to a phase.
    pub fn contains_up_to_phase(&self, w: &PauliWord) -> bool {
        self.elements.binary_search_by(|e| e.key().cmp(w.key())).is_ok()
    }
}

/// `Π_𝒮 = |𝒮|⁻¹ Σ_S S`.
pub fn code_projector(group: &StabilizerGroup) -> Result<DenseOperator> {
    let dim = group.spec.dim()?;
    let mut acc = DenseOperator::zeros(dim);
    for s in &group.elements {
        acc = acc + s.to_dense()?;
    }
    Ok(acc.scale_real(1.0 / group.order() as f64))
}

/// Exact phases `χ(S_i) = ω_{2d}^{k_i}` on a list of group words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StabilizerCharacter {
    d: u32,
    phases: Vec<u32>,
}

impl StabilizerCharacter {
    /// Exponents of `ω_{2d}`.
    pub fn phases(&self) -> &[u32] {
        &self.phases
    }

    pub fn is_trivial(&self) -> bool {
        self.phases.iter().all(|&p| p == 0)
    }

    pub fn values(&self) -> Vec<Complex64> {
        let spec = AlgebraSpec::new(self.d, 1).expect("valid d");
        self.phases.iter().map(|&p| spec.half_root_power(p)).collect()
    }

    /// `±1` values when every phase is real.
    pub fn signs(&self) -> Option<Vec<i64>> {
        self.phases
            .iter()
            .map(|&p| match p {
                0 => Some(1),
                p if p == self.d => Some(-1),
                _ => None,
            })
            .collect()
    }
}

/// `χ_E(S) = [E, S]_×` on the given words.
pub fn character_on(e: &PauliWord, words: &[PauliWord]) -> Result<StabilizerCharacter> {
    let phases = words
        .iter()
        .map(|s| e.commutation_phase(s))
        .collect::<Result<Vec<u32>>>()?;
    Ok(StabilizerCharacter {
        d: e.spec().d(),
        phases,
    })
}

/// Character of a word error on the group generators.
pub fn character_of(e: &PauliWord, group: &StabilizerGroup) -> Result<StabilizerCharacter> {
    if e.spec() != group.spec {
        return Err(Error::SpecMismatch {
            left: group.spec,
            right: e.spec(),
        });
    }
    character_on(e, &group.generators)
}

/// Character of an operator sum, which must satisfy `S E S⁻¹ = μ_S E` with
/// `μ_S` a root of unity for every generator. Then `χ_E(S) = μ_S⁻¹`.
pub fn character_of_sum(e: &OperatorSum, group: &StabilizerGroup) -> Result<StabilizerCharacter> {
    if e.spec() != group.spec {
        return Err(Error::SpecMismatch {
            left: group.spec,
            right: e.spec(),
        });
    }
    let (lead_key, lead) = e
        .terms()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(k, c)| (k.clone(), *c))
        .ok_or_else(|| Error::Empty("zero operator has no character".into()))?;
    let d = group.spec.d();
    let mut phases = Vec::with_capacity(group.generators.len());
    for s in &group.generators {
        let conj = s.to_sum().mul(e)?.mul(&s.adjoint().to_sum())?;
        let mu = conj.coefficient(&lead_key) / lead;
        let k = (0..2 * d).find(|&k| {
            conj.distance(&e.scale(group.spec.half_root_power(k)))
                .map(|r| r < 1e-10 * (1.0 + e.distance(&OperatorSum::zero(group.spec)).unwrap_or(0.0)))
                .unwrap_or(false)
        });
        match k {
            Some(k) if (mu - group.spec.half_root_power(k)).norm() < 1e-8 => {
                phases.push((2 * d - k) % (2 * d));
            }
            _ => return Err(Error::NotProjectivelyCommuting(s.label())),
        }
    }
    Ok(StabilizerCharacter { d, phases })
}

/// Whether `χ_E(S T) = χ_E(S) χ_E(T)` holds on the whole group.
pub fn character_is_multiplicative(e: &PauliWord, group: &StabilizerGroup) -> Result<bool> {
    let two_d = 2 * group.spec.d();
    let on_elements = character_on(e, &group.elements)?;
    let on_generators = character_on(e, &group.generators)?;
    let index: HashMap<&WordKey, usize> =
        group.elements.iter().enumerate().map(|(i, s)| (s.key(), i)).collect();
    for (i, s) in group.elements.iter().enumerate() {
        for (g, &gp) in group.generators.iter().zip(&on_generators.phases) {
            let t = s.mul(g)?;
            let j = index[t.key()];
            if on_elements.phases[j] != (on_elements.phases[i] + gp) % two_d {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct SyndromeClass {
    pub character: StabilizerCharacter,
    /// Lexicographically least member.
    pub representative: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SyndromeReport {
    /// Trivial character first, then ascending phase vectors.
    pub classes: Vec<SyndromeClass>,
    /// `χ_{ES} = χ_E` for every error and group element.
    pub coset_invariant: bool,
}

/// Partition of word errors by character.
pub fn syndrome_classes(errors: &[PauliWord], group: &StabilizerGroup) -> Result<SyndromeReport> {
    let mut classes: BTreeMap<StabilizerCharacter, Vec<&PauliWord>> = BTreeMap::new();
    let mut coset_invariant = true;
    for e in errors {
        let chi = character_of(e, group)?;
        for s in &group.elements {
            if character_of(&e.mul(s)?, group)? != chi {
                coset_invariant = false;
            }
        }
        classes.entry(chi).or_default().push(e);
    }
    let classes = classes
        .into_iter()
        .map(|(character, mut members)| {
            members.sort_by(|a, b| a.key().cmp(b.key()));
            SyndromeClass {
                character,
                representative: members[0].label(),
                members: members.iter().map(|w| w.label()).collect(),
            }
        })
        .collect();
    Ok(SyndromeReport {
        classes,
        coset_invariant,
    })
}

#[derive(Debug, Clone)]
pub struct StabilizerCode {
    name: String,
    group: StabilizerGroup,
    projector: DenseOperator,
    alphabet: Vec<PauliWord>,
    checks: Vec<PauliWord>,
    distance: Option<usize>,
}

impl StabilizerCode {
    /// Code from generators and a logical alphabet. `checks` are the words
    /// on which character tables are reported; they default to the
    /// generators.
    pub fn new(
        name: &str,
        generators: &[PauliWord],
        alphabet: &[PauliWord],
        checks: Option<Vec<PauliWord>>,
        distance: Option<usize>,
    ) -> Result<Self> {
        let spec = generators
            .first()
            .map(PauliWord::spec)
            .ok_or_else(|| Error::Empty("no generators".into()))?;
        let group = group_generate(spec, generators)?;
        let projector = code_projector(&group)?;
        let checks = checks.unwrap_or_else(|| generators.to_vec());
        for w in alphabet.iter().chain(&checks) {
            if w.spec() != spec {
                return Err(Error::SpecMismatch {
                    left: spec,
                    right: w.spec(),
                });
            }
        }
        Ok(StabilizerCode {
            name: name.to_string(),
            group,
            projector,
            alphabet: alphabet.to_vec(),
            checks,
            distance,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &StabilizerGroup {
        &self.group
    }

    pub fn projector(&self) -> &DenseOperator {
        &self.projector
    }

    pub fn alphabet(&self) -> &[PauliWord] {
        &self.alphabet
    }

    pub fn checks(&self) -> &[PauliWord] {
        &self.checks
    }

    pub fn n(&self) -> usize {
        self.group.spec.n()
    }

    /// Number of logical qudits, `log_d tr Π`.
    pub fn m(&self) -> usize {
        let rank = self.projector.trace().re.round() as usize;
        let d = self.group.spec.d() as usize;
        let mut m = 0;
        let mut acc = 1;
        while acc < rank {
            acc *= d;
            m += 1;
        }
        m
    }

    /// Distance metadata, when known in advance.
    pub fn distance(&self) -> Option<usize> {
        self.distance
    }

    /// Every alphabet element commutes with every generator.
    pub fn alphabet_in_centralizer(&self) -> Result<bool> {
        for l in &self.alphabet {
            for g in &self.group.generators {
                if !l.commutes_with(g)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Names accepted by [`build_code`].
pub const CODE_NAMES: [&str; 3] = ["rep2", "rep3", "five_qubit"];

fn words(letters: &[&str]) -> Result<Vec<PauliWord>> {
    letters.iter().map(|l| PauliWord::from_letters(l)).collect()
}

/// `X^{⊗n}` and `Z^{⊗n}`.
pub fn repeated_alphabet(n: usize) -> Result<Vec<PauliWord>> {
    words(&["X".repeat(n).as_str(), "Z".repeat(n).as_str()])
}

/// The named codes: `rep2` (`Y⊗Y`), `rep3` (`Y⊗Y⊗I`, `I⊗Y⊗Y`) and
/// `five_qubit` (`S_k = T^k S_0` with `S_0 = I⊗X⊗Z⊗Z⊗X`, `T` the cyclic
/// shift by one site).
pub fn build_code(name: &str) -> Result<StabilizerCode> {
    match name {
        "rep2" => StabilizerCode::new(name, &words(&["YY"])?, &repeated_alphabet(2)?, None, Some(2)),
        "rep3" => StabilizerCode::new(name, &words(&["YYI", "IYY"])?, &repeated_alphabet(3)?, None, None),
        "five_qubit" => {
            let shifts: Vec<String> = (0..5).map(|k| cyclic_shift("IXZZX", k)).collect();
            let all = words(&shifts.iter().map(String::as_str).collect::<Vec<_>>())?;
            StabilizerCode::new(name, &all[..4], &repeated_alphabet(5)?, Some(all.clone()), Some(3))
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// `T^k` on a letter string: the letter on site `ℓ` moves to `ℓ + k`.
pub fn cyclic_shift(letters: &str, k: usize) -> String {
    let chars: Vec<char> = letters.chars().collect();
    let n = chars.len();
    (0..n).map(|site| chars[(site + n - k % n) % n]).collect()
}

/// `Σ λ_i L_i^{⊗n}` for `L = Σ λ_i L_i` over a single-site alphabet of
/// words. Linear in `L`; not the tensor power of the sum.
pub fn coherent_repetition(l: &OperatorSum, alphabet: &[PauliWord], n: usize) -> Result<OperatorSum> {
    if n == 0 {
        return Err(Error::Domain("repetition count must be positive".into()));
    }
    let spec = l.spec();
    let mut residual = l.clone();
    let mut coeffs = Vec::with_capacity(alphabet.len());
    for a in alphabet {
        if a.spec() != spec {
            return Err(Error::SpecMismatch {
                left: spec,
                right: a.spec(),
            });
        }
        let c = l.coefficient(a.key()) / a.phase();
        residual = residual.sub(&a.to_sum().scale(c))?;
        coeffs.push(c);
    }
    if !residual.is_empty() && residual.terms().any(|(_, c)| c.norm() > 1e-12) {
        return Err(Error::Domain("operator is not in the span of the alphabet".into()));
    }
    let big = AlgebraSpec::new(spec.d(), spec.n() * n)?;
    let mut out = OperatorSum::zero(big);
    for (a, c) in alphabet.iter().zip(coeffs) {
        if c.norm() <= DROP_TOLERANCE {
            continue;
        }
        let single = a.to_sum();
        let mut power = single.clone();
        for _ in 1..n {
            power = power.tensor(&single)?;
        }
        out = out.add(&power.scale(c))?;
    }
    Ok(out)
}

/// `{I}` together with every single-site non-identity word.
pub fn weight_one_errors(spec: AlgebraSpec) -> Result<Vec<PauliWord>> {
    let mut out = vec![PauliWord::identity(spec)];
    let d = spec.d();
    for site in 0..spec.n() {
        for x in 0..d {
            for z in 0..d {
                if x == 0 && z == 0 {
                    continue;
                }
                let mut xs = vec![0; spec.n()];
                let mut zs = vec![0; spec.n()];
                xs[site] = x;
                zs[site] = z;
                // qubit XZ sites are reported as Y
                let phase = if d == 2 && x == 1 && z == 1 { 1 } else { 0 };
                out.push(PauliWord::new(spec, phase, xs, zs)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct KlReport {
    pub pass: bool,
    /// Every `Π E_k* E_q Π` is a multiple of `Π`.
    pub scalar: bool,
    pub nu_positive: bool,
    pub max_residual: f64,
    #[serde(skip)]
    pub nu: DenseOperator,
    /// Connected components of the support of `ν`: errors in different
    /// components have orthogonal images of the code space.
    pub syndrome_map: Vec<usize>,
}

/// Knill–Laflamme check `Π E_k* E_q Π = ν_kq Π` with `ν ≥ 0`.
pub fn kl_check(code: &StabilizerCode, errors: &[DenseOperator]) -> Result<KlReport> {
    let p = &code.projector;
    let rank = p.trace().re;
    let dim = p.dim();
    let k = errors.len();
    if k == 0 {
        return Err(Error::Empty("no errors to check".into()));
    }
    let mut nu = DenseOperator::zeros(k);
    let mut max_residual: f64 = 0.0;
    let ep: Vec<DenseOperator> = errors
        .iter()
        .map(|e| {
            if e.dim() != dim {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                })
            } else {
                Ok(e * p)
            }
        })
        .collect::<Result<_>>()?;
    for a in 0..k {
        for b in 0..k {
            let m = &ep[a].adjoint() * &ep[b];
            let c = m.trace() / rank;
            let residual = (&m - &p.scale(c)).frobenius_norm();
            let scale = 1.0 + ep[a].frobenius_norm() * ep[b].frobenius_norm() / rank.sqrt();
            max_residual = max_residual.max(residual / scale);
            nu[(a, b)] = c;
        }
    }
    let scalar = max_residual < KL_TOL;
    let nu_positive = dense::is_positive(&nu.hermitian_part(), 1e-10);
    let syndrome_map = components(&nu, 1e-10);
    Ok(KlReport {
        pass: scalar && nu_positive,
        scalar,
        nu_positive,
        max_residual,
        nu,
        syndrome_map,
    })
}

fn components(nu: &DenseOperator, tol: f64) -> Vec<usize> {
    let k = nu.dim();
    let mut label = vec![usize::MAX; k];
    let mut next = 0;
    for start in 0..k {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = next;
        while let Some(a) = stack.pop() {
            for b in 0..k {
                if label[b] == usize::MAX && nu[(a, b)].norm() > tol {
                    label[b] = next;
                    stack.push(b);
                }
            }
        }
        next += 1;
    }
    label
}

/// Recovery for a set of errors satisfying the Knill–Laflamme conditions.
///
/// With `ν = u D u*` and `F_e = Σ_q u_qe E_q`, each `F_e Π / √D_e` is a
/// partial isometry on the code space and `R_e = Π F_e* / √D_e` is its
/// adjoint. The operators `R_e*R_e` are orthogonal projectors, so the set
/// is completed to a channel by the projector `I − Σ R_e*R_e`.
pub fn recovery_map(code: &StabilizerCode, errors: &[DenseOperator]) -> Result<KrausSet> {
    let report = kl_check(code, errors)?;
    if !report.pass {
        return Err(Error::KnillLaflamme(format!(
            "residual {:e}, nu positive: {}",
            report.max_residual, report.nu_positive
        )));
    }
    let (values, u) = dense::eigh(&report.nu.hermitian_part());
    let dim = code.projector.dim();
    let top = values.last().copied().unwrap_or(0.0).max(1.0);
    let mut ops: Vec<CMatrix> = Vec::new();
    let mut covered = DenseOperator::zeros(dim);
    for (e, &de) in values.iter().enumerate().rev() {
        if de <= NU_CUTOFF * top {
            continue;
        }
        let mut f = DenseOperator::zeros(dim);
        for (q, eq) in errors.iter().enumerate() {
            f = f + eq.scale(u[(q, e)]);
        }
        let r = (&code.projector * &f.adjoint()).scale_real(1.0 / de.sqrt());
        covered = covered + &r.adjoint() * &r;
        ops.push(r.into_matrix());
    }
    let rest = (&DenseOperator::identity(dim) - &covered).hermitian_part();
    if rest.op_norm() > 1e-10 {
        ops.push(rest.into_matrix());
    }
    KrausSet::new(dim, dim, ops)
}

/// Result of a distance search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Exact(usize),
    /// No logical word of weight at most the bound exists.
    Exceeds(usize),
}

impl Serialize for Distance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Exact(d) => s.serialize_u64(*d as u64),
            Distance::Exceeds(w) => s.serialize_str(&format!(">{w}")),
        }
    }
}

/// Smallest weight of a word with trivial character that is not a
/// stabilizer up to phase and acts nontrivially on the code space.
///
/// Weight counts nonzero `X` and `Z` exponents, so a qubit `Y ∝ XZ` counts
/// as two errors.
pub fn distance_search(code: &StabilizerCode, max_weight: usize) -> Result<Distance> {
    let spec = code.group.spec;
    let p = &code.projector;
    let rank = p.trace().re;
    let mut candidates: Vec<PauliWord> = all_words(spec)
        .into_iter()
        .filter(|w| {
            let lw = w.key().letter_weight();
            lw >= 1 && lw <= max_weight
        })
        .collect();
    candidates.sort_by_key(|w| w.key().letter_weight());
    for w in candidates {
        if !character_of(&w, &code.group)?.is_trivial() || code.group.contains_up_to_phase(&w) {
            continue;
        }
        let m = &(p * &w.to_dense()?) * p;
        let c = m.trace() / rank;
        if (&m - &p.scale(c)).frobenius_norm() > KL_TOL {
            return Ok(Distance::Exact(w.key().letter_weight()));
        }
    }
    Ok(Distance::Exceeds(max_weight))
}
