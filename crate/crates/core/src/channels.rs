//! Quantum operations in Kraus form, their Choi matrices and dilations.
//!
//! Operators are vectorized by row stacking, `|A⟩⟩ = Σ A_ij |i⟩ ⊗ |j⟩`. In
//! that basis a Kraus operator acts on vectorized densities as
//! `B ⊗ B̄`, and the Choi matrix of a map `ℰ: M_in → M_out` is
//!
//! ```text
//! J(ℰ) = Σ_ij ℰ(E_ij) ⊗ E_ij  =  Σ_k |B_k⟩⟩⟨⟨B_k|
//! ```
//!
//! on `C^out ⊗ C^in`. `J(ℰ)` is positive exactly when `ℰ` is completely
//! positive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::composite::{devectorize, partial_trace, vectorize, FactorLayout};
use crate::dense::{self, eig_hermitian, CMatrix, DenseOperator, MatrixJson};
use crate::error::{Error, Result};
use crate::measurement::ZERO_PROBABILITY;
use crate::pauli::{all_words, AlgebraSpec};
use crate::states::State;

/// Tolerance for `I − Σ B*B ≥ 0` and for trace preservation.
pub const OPERATION_TOL: f64 = 1e-10;

/// Choi eigenvalues below `-CP_TOL` witness a map that is not CP.
pub const CP_TOL: f64 = 1e-9;

/// Choi eigenvalues at or below this are dropped during Kraus extraction.
pub const KRAUS_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KrausSet {
    dim_in: usize,
    dim_out: usize,
    operators: Vec<CMatrix>,
    labels: Vec<String>,
}

impl KrausSet {
    /// Operators must all be `dim_out × dim_in`; labels default to `0, 1, …`.
    pub fn new(dim_in: usize, dim_out: usize, operators: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..operators.len()).map(|k| k.to_string()).collect();
        Self::with_labels(dim_in, dim_out, operators, labels)
    }

    pub fn with_labels(
        dim_in: usize,
        dim_out: usize,
        operators: Vec<CMatrix>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Empty("Kraus set has no operators".into()));
        }
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Domain("Kraus dimensions must be positive".into()));
        }
        if labels.len() != operators.len() {
            return Err(Error::DimensionMismatch {
                expected: operators.len(),
                found: labels.len(),
            });
        }
        for b in &operators {
            if b.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch {
                    expected: dim_out * dim_in,
                    found: b.nrows() * b.ncols(),
                });
            }
            if b.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Domain("Kraus operator has non-finite entries".into()));
            }
        }
        Ok(KrausSet {
            dim_in,
            dim_out,
            operators,
            labels,
        })
    }

    /// Square Kraus operators.
    pub fn from_operators(ops: &[DenseOperator]) -> Result<Self> {
        let dim = ops.first().map(DenseOperator::dim).unwrap_or(0);
        Self::new(dim, dim, ops.iter().map(|b| b.matrix().clone()).collect())
    }

    /// The spectral projectors of a Hermitian observable, labelled by
    /// eigenvalue.
    pub fn from_pvm(observable: &DenseOperator) -> Result<Self> {
        let spectral = eig_hermitian(observable)?;
        let dim = observable.dim();
        Self::with_labels(
            dim,
            dim,
            spectral.projectors.iter().map(|p| p.matrix().clone()).collect(),
            spectral.eigenvalues.iter().map(|l| format!("{l}")).collect(),
        )
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `Σ B*B`.
    pub fn effect_sum(&self) -> DenseOperator {
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim_in, self.dim_in), |acc, b| acc + b.adjoint() * b);
        DenseOperator::from_matrix_unchecked(sum)
    }

    /// `ℰ(A) = Σ B A B*` on an arbitrary `dim_in × dim_in` matrix.
    pub fn apply_matrix(&self, a: &CMatrix) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, b| acc + b * a * b.adjoint())
    }

    /// Apply `self` first, then `after`.
    pub fn then(&self, after: &KrausSet) -> Result<KrausSet> {
        if after.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                found: after.dim_in,
            });
        }
        let mut ops = Vec::with_capacity(self.len() * after.len());
        let mut labels = Vec::with_capacity(self.len() * after.len());
        for (b2, l2) in after.operators.iter().zip(&after.labels) {
            for (b1, l1) in self.operators.iter().zip(&self.labels) {
                ops.push(b2 * b1);
                labels.push(format!("{l1}.{l2}"));
            }
        }
        Self::with_labels(self.dim_in, after.dim_out, ops, labels)
    }

    pub fn to_json(&self) -> KrausJson {
        KrausJson {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.operators.iter().map(RectJson::from_matrix).collect(),
        }
    }

    pub fn from_json(json: &KrausJson) -> Result<Self> {
        let ops = json
            .kraus
            .iter()
            .map(RectJson::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        Self::new(json.dim_in, json.dim_out, ops)
    }
}

/// Wire form of a Kraus set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<RectJson>,
}

/// A possibly rectangular matrix as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl RectJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        RectJson {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::Json(format!(
                "matrix entries do not match shape {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i][j];
            Complex64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    /// `I − Σ B*B ≥ 0`.
    pub valid: bool,
    /// `Σ B*B = I`.
    pub is_channel: bool,
    /// Smallest eigenvalue of `I − Σ B*B`.
    pub min_defect_eigenvalue: f64,
}

pub fn validate_operation(k: &KrausSet) -> Validity {
    let defect = &DenseOperator::identity(k.dim_in) - &k.effect_sum();
    let min = dense::min_eigenvalue(&defect.hermitian_part());
    Validity {
        valid: min >= -OPERATION_TOL,
        is_channel: defect.op_norm() <= OPERATION_TOL,
        min_defect_eigenvalue: min,
    }
}

#[derive(Debug, Clone)]
pub struct OperationOutput {
    /// `Σ B ϖ B*` (or `B_k ϖ B_k*` when observed), not normalized.
    pub output: DenseOperator,
    /// `τ = tr(output)`.
    pub trace: f64,
    /// `output / τ`, absent when `τ` vanishes.
    pub state: Option<State>,
    /// `p_k = π(B_k* B_k)` for every Kraus label.
    pub probabilities: Vec<f64>,
}

/// Generalized Lüders rule. With `observed = Some(k)` the output is the
/// post-selected `B_k ϖ B_k* / p_k`.
pub fn apply_operation(k: &KrausSet, state: &State, observed: Option<usize>) -> Result<OperationOutput> {
    if state.dim() != k.dim_in {
        return Err(Error::DimensionMismatch {
            expected: k.dim_in,
            found: state.dim(),
        });
    }
    let rho = state.density().matrix();
    let probabilities: Vec<f64> = k
        .operators
        .iter()
        .map(|b| (b * rho * b.adjoint()).trace().re)
        .collect();
    let output = match observed {
        Some(idx) => {
            let b = k.operators.get(idx).ok_or_else(|| {
                Error::Domain(format!("Kraus index {idx} out of range for {} operators", k.len()))
            })?;
            if probabilities[idx] < ZERO_PROBABILITY {
                return Err(Error::ZeroProbability(probabilities[idx]));
            }
            b * rho * b.adjoint()
        }
        None => k.apply_matrix(rho),
    };
    let output = DenseOperator::from_matrix_unchecked(output).hermitian_part();
    let trace = output.trace().re;
    let state = if trace > ZERO_PROBABILITY {
        Some(State::new(output.scale_real(1.0 / trace))?)
    } else {
        None
    };
    Ok(OperationOutput {
        output,
        trace,
        state,
        probabilities,
    })
}

/// Matrix `S` with `|ℰ(A)⟩⟩ = S |A⟩⟩`, of shape `out² × in²`.
pub fn superoperator(k: &KrausSet) -> CMatrix {
    k.operators.iter().fold(
        CMatrix::zeros(k.dim_out * k.dim_out, k.dim_in * k.dim_in),
        |acc, b| acc + b.kronecker(&b.map(|c| c.conj())),
    )
}

/// Superoperator of an arbitrary linear map, by evaluation on matrix units.
pub fn superoperator_of_map<F>(dim_in: usize, dim_out: usize, map: F) -> Result<CMatrix>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let mut s = CMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
    for i in 0..dim_in {
        for j in 0..dim_in {
            let mut e = CMatrix::zeros(dim_in, dim_in);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let img = map(&e);
            if img.shape() != (dim_out, dim_out) {
                return Err(Error::DimensionMismatch {
                    expected: dim_out,
                    found: img.nrows(),
                });
            }
            s.set_column(i * dim_in + j, &vectorize(&img));
        }
    }
    Ok(s)
}

/// Choi matrix `Σ_ij ℰ(E_ij) ⊗ E_ij` on `C^out ⊗ C^in`.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    matrix: DenseOperator,
    dim_in: usize,
    dim_out: usize,
}

impl ChoiMatrix {
    pub fn new(matrix: DenseOperator, dim_in: usize, dim_out: usize) -> Result<Self> {
        if matrix.dim() != dim_in * dim_out {
            return Err(Error::DimensionMismatch {
                expected: dim_in * dim_out,
                found: matrix.dim(),
            });
        }
        Ok(ChoiMatrix {
            matrix,
            dim_in,
            dim_out,
        })
    }

    pub fn matrix(&self) -> &DenseOperator {
        &self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_hermitian(&self) -> bool {
        self.matrix.is_hermitian(OPERATION_TOL)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        dense::min_eigenvalue(&self.matrix.hermitian_part())
    }

    /// Hermitian with no eigenvalue below `-CP_TOL`.
    pub fn is_cp(&self) -> bool {
        self.is_hermitian() && self.min_eigenvalue() >= -CP_TOL
    }

    /// `tr_out J = I_in`.
    pub fn is_trace_preserving(&self) -> bool {
        let layout = FactorLayout::new(vec![self.dim_out, self.dim_in]).expect("nonzero dims");
        partial_trace(&self.matrix, &layout, &[1])
            .map(|t| t.distance(&DenseOperator::identity(self.dim_in)) <= OPERATION_TOL)
            .unwrap_or(false)
    }

    /// Back to the `out² × in²` superoperator.
    pub fn to_superoperator(&self) -> CMatrix {
        reshuffle(self.matrix.matrix(), self.dim_in, self.dim_out, false)
    }
}

/// Index shuffle between `S_{(a,b),(i,j)}` and `J_{(a,i),(b,j)}`.
fn reshuffle(m: &CMatrix, din: usize, dout: usize, to_choi: bool) -> CMatrix {
    let n = din * dout;
    let (rows, cols) = if to_choi { (n, n) } else { (dout * dout, din * din) };
    CMatrix::from_fn(rows, cols, |r, c| {
        if to_choi {
            let (a, i) = (r / din, r % din);
            let (b, j) = (c / din, c % din);
            m[(a * dout + b, i * din + j)]
        } else {
            let (a, b) = (r / dout, r % dout);
            let (i, j) = (c / din, c % din);
            m[(a * din + i, b * din + j)]
        }
    })
}

/// Choi matrix of a Kraus-form operation, `Σ_k |B_k⟩⟩⟨⟨B_k|`.
pub fn choi_of(k: &KrausSet) -> ChoiMatrix {
    let n = k.dim_in * k.dim_out;
    let j = k.operators.iter().fold(CMatrix::zeros(n, n), |acc, b| {
        let v = vectorize(b);
        acc + &v * v.adjoint()
    });
    ChoiMatrix {
        matrix: DenseOperator::from_matrix_unchecked(j),
        dim_in: k.dim_in,
        dim_out: k.dim_out,
    }
}

/// Choi matrix of a map given by its `out² × in²` superoperator.
pub fn choi_of_superoperator(s: &CMatrix, dim_in: usize, dim_out: usize) -> Result<ChoiMatrix> {
    if s.shape() != (dim_out * dim_out, dim_in * dim_in) {
        return Err(Error::DimensionMismatch {
            expected: dim_out * dim_out * dim_in * dim_in,
            found: s.nrows() * s.ncols(),
        });
    }
    ChoiMatrix::new(
        DenseOperator::from_matrix_unchecked(reshuffle(s, dim_in, dim_out, true)),
        dim_in,
        dim_out,
    )
}

/// Kraus operators from the scaled eigenvectors of a positive Choi matrix.
pub fn kraus_from_choi(j: &ChoiMatrix) -> Result<KrausSet> {
    if !j.is_hermitian() {
        return Err(Error::Domain("Choi matrix is not Hermitian".into()));
    }
    let (values, vectors) = dense::eigh(&j.matrix.hermitian_part());
    if let Some(&min) = values.first() {
        if min < -CP_TOL {
            return Err(Error::NotCompletelyPositive { eigenvalue: min });
        }
    }
    let mut ops = Vec::new();
    // descending, so the dominant operator comes first
    for (idx, &lambda) in values.iter().enumerate().rev() {
        if lambda <= KRAUS_CUTOFF {
            continue;
        }
        let v = vectors.column(idx).into_owned() * Complex64::new(lambda.sqrt(), 0.0);
        ops.push(devectorize(&v, j.dim_out, j.dim_in)?);
    }
    if ops.is_empty() {
        ops.push(CMatrix::zeros(j.dim_out, j.dim_in));
    }
    KrausSet::new(j.dim_in, j.dim_out, ops)
}

/// Isometry `V = Σ_k B_k ⊗ |k⟩` into system ⊗ environment.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub isometry: CMatrix,
    pub env_dim: usize,
    pub dim_out: usize,
}

impl Dilation {
    /// `tr_env(V ϖ V*)`.
    pub fn reduce(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        let big = DenseOperator::from_matrix_unchecked(&self.isometry * rho.matrix() * self.isometry.adjoint());
        let layout = FactorLayout::new(vec![self.dim_out, self.env_dim])?;
        partial_trace(&big, &layout, &[0])
    }

    /// `‖V*V − I‖_F`.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.isometry.adjoint() * &self.isometry;
        (g - CMatrix::identity(self.isometry.ncols(), self.isometry.ncols())).norm()
    }
}

pub fn stinespring_dilate(k: &KrausSet) -> Result<Dilation> {
    if !validate_operation(k).is_channel {
        return Err(Error::Domain("Stinespring dilation needs a channel".into()));
    }
    let env = k.len();
    let mut v = CMatrix::zeros(k.dim_out * env, k.dim_in);
    for (e, b) in k.operators.iter().enumerate() {
        for a in 0..k.dim_out {
            for i in 0..k.dim_in {
                v[(a * env + e, i)] = b[(a, i)];
            }
        }
    }
    Ok(Dilation {
        isometry: v,
        env_dim: env,
        dim_out: k.dim_out,
    })
}

pub fn identity_channel(dim: usize) -> Result<KrausSet> {
    KrausSet::new(dim, dim, vec![CMatrix::identity(dim, dim)])
}

/// `ρ ↦ (1−p) ρ + p tr(ρ) I/d`, with Kraus operators built from the
/// generalized Pauli words on one site.
pub fn depolarizing(dim: usize, p: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("depolarizing parameter {p} outside [0, 1]")));
    }
    let spec = AlgebraSpec::new(dim as u32, 1)?;
    let d2 = (dim * dim) as f64;
    let ops = all_words(spec)
        .iter()
        .map(|w| {
            let weight = if w.is_identity_up_to_phase() {
                1.0 - p + p / d2
            } else {
                p / d2
            };
            Ok(w.to_dense()?.into_matrix() * Complex64::new(weight.sqrt(), 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    KrausSet::new(dim, dim, ops)
}

/// `ρ ↦ tr(ρ)`, into a one-dimensional output.
pub fn trace_channel(dim: usize) -> Result<KrausSet> {
    let ops = (0..dim)
        .map(|i| CMatrix::from_fn(1, dim, |_, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    KrausSet::new(dim, 1, ops)
}

/// `tr_B` on `A ⊗ B`.
pub fn partial_trace_channel(dim_a: usize, dim_b: usize) -> Result<KrausSet> {
    let ops = (0..dim_b)
        .map(|j| {
            let bra = CMatrix::from_fn(1, dim_b, |_, c| Complex64::new(if c == j { 1.0 } else { 0.0 }, 0.0));
            CMatrix::identity(dim_a, dim_a).kronecker(&bra)
        })
        .collect();
    KrausSet::new(dim_a * dim_b, dim_a, ops)
}

/// Superoperator of the transpose map, which is positive but not CP.
pub fn transpose_superoperator(dim: usize) -> CMatrix {
    superoperator_of_map(dim, dim, |a| a.transpose()).expect("square map")
}

/// `(min eigenvalue, eigenvector)` of a Choi matrix.
pub fn min_eigenpair(j: &ChoiMatrix) -> (f64, crate::dense::CVector) {
    let (values, vectors) = dense::eigh(&j.matrix.hermitian_part());
    (values[0], vectors.column(0).into_owned())
}

/// Report produced by `channel analyze`.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelAnalysis {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus_count: Option<usize>,
    pub valid: Option<bool>,
    pub is_channel: Option<bool>,
    pub choi: MatrixJson,
    pub choi_hermitian: bool,
    pub min_choi_eigenvalue: f64,
    pub cp: bool,
    pub trace_preserving: bool,
    pub choi_rank: usize,
    pub env_dim: Option<usize>,
    pub isometry_defect: Option<f64>,
}

pub fn analyze_kraus(k: &KrausSet) -> Result<ChannelAnalysis> {
    let v = validate_operation(k);
    let j = choi_of(k);
    let dilation = if v.is_channel { Some(stinespring_dilate(k)?) } else { None };
    Ok(ChannelAnalysis {
        dim_in: k.dim_in,
        dim_out: k.dim_out,
        kraus_count: Some(k.len()),
        valid: Some(v.valid),
        is_channel: Some(v.is_channel),
        choi: j.matrix.to_json(),
        choi_hermitian: j.is_hermitian(),
        min_choi_eigenvalue: j.min_eigenvalue(),
        cp: j.is_cp(),
        trace_preserving: j.is_trace_preserving(),
        choi_rank: kraus_from_choi(&j).map(|k| k.len()).unwrap_or(0),
        env_dim: dilation.as_ref().map(|d| d.env_dim),
        isometry_defect: dilation.as_ref().map(Dilation::isometry_defect),
    })
}

pub fn analyze_superoperator(s: &CMatrix, dim_in: usize, dim_out: usize) -> Result<ChannelAnalysis> {
    let j = choi_of_superoperator(s, dim_in, dim_out)?;
    let cp = j.is_cp();
    let kraus = if cp { kraus_from_choi(&j).ok() } else { None };
    let validity = kraus.as_ref().map(validate_operation);
    let dilation = match (&kraus, validity) {
        (Some(k), Some(v)) if v.is_channel => Some(stinespring_dilate(k)?),
        _ => None,
    };
    Ok(ChannelAnalysis {
        dim_in,
        dim_out,
        kraus_count: kraus.as_ref().map(KrausSet::len),
        valid: validity.map(|v| v.valid),
        is_channel: validity.map(|v| v.is_channel),
        choi: j.matrix.to_json(),
        choi_hermitian: j.is_hermitian(),
        min_choi_eigenvalue: j.min_eigenvalue(),
        cp,
        trace_preserving: j.is_trace_preserving(),
        choi_rank: j.matrix.rank(1e-10),
        env_dim: dilation.as_ref().map(|d| d.env_dim),
        isometry_defect: dilation.as_ref().map(Dilation::isometry_defect),
    })
}
