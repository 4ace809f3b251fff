//! Dense complex matrices: Hermitian spectral decomposition, the operator
//! norm, positivity and the functional calculus.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dense dimension accepted by constructors that grow dimensions.
pub const DENSE_DIM_LIMIT: usize = 4096;

/// Absolute tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative gap (against `‖A‖`) under which eigenvalues share a projector.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// A square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator(CMatrix);

impl DenseOperator {
    /// Wraps a matrix. Fails on non-square, empty or non-finite input.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Domain("empty matrix".into()));
        }
        if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        Ok(DenseOperator(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        DenseOperator(m)
    }

    pub fn zeros(dim: usize) -> Self {
        DenseOperator(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        DenseOperator(CMatrix::identity(dim, dim))
    }

    /// Panics on ragged rows; intended for literals.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        DenseOperator(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        DenseOperator(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    /// `|ψ⟩⟨φ|`.
    pub fn outer(psi: &CVector, phi: &CVector) -> Self {
        DenseOperator(psi * phi.adjoint())
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        DenseOperator(CMatrix::from_diagonal(&CVector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        DenseOperator(self.0.transpose())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        DenseOperator(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Hilbert–Schmidt inner product `tr(A* B)`.
    pub fn hs_inner(&self, other: &DenseOperator) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn kron(&self, other: &DenseOperator) -> Result<Self> {
        let dim = self.dim() * other.dim();
        if dim > DENSE_DIM_LIMIT {
            return Err(Error::DimensionOverflow {
                dim,
                limit: DENSE_DIM_LIMIT,
            });
        }
        Ok(DenseOperator(self.0.kronecker(&other.0)))
    }

    pub fn commutator(&self, other: &DenseOperator) -> Self {
        self * other - other * self
    }

    /// `½(AB + BA)`.
    pub fn jordan(&self, other: &DenseOperator) -> Self {
        (self * other + other * self).scale_real(0.5)
    }

    /// Largest entry-wise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).distance(&DenseOperator::identity(self.dim())) <= tol
    }

    /// Frobenius norm of the difference.
    pub fn distance(&self, other: &DenseOperator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.0 - &other.0).norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest singular value, `√(max eig A*A)`.
    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        self.0.clone().svd(false, false).singular_values.iter().sum()
    }

    /// `½‖A − B‖₁`.
    pub fn trace_distance(&self, other: &DenseOperator) -> f64 {
        0.5 * (self - other).trace_norm()
    }

    /// Hermitian part `½(A + A*)`; used to strip round-off before
    /// eigendecomposition.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let sv = self.0.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > rel_tol * max).count()
    }

    /// Wire form with `[re, im]` pairs.
    pub fn to_json(&self) -> MatrixJson {
        let n = self.dim();
        MatrixJson {
            dim: n,
            entries: (0..n)
                .map(|i| (0..n).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        let n = json.dim;
        if json.entries.len() != n || json.entries.iter().any(|row| row.len() != n) {
            return Err(Error::Json(format!("matrix entries do not match dim {n}")));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = json.entries[i][j];
            Complex64::new(re, im)
        }))
    }
}

impl Index<(usize, usize)> for DenseOperator {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for DenseOperator {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&DenseOperator> for &DenseOperator {
            type Output = DenseOperator;
            fn $method(self, rhs: &DenseOperator) -> DenseOperator {
                DenseOperator(&self.0 $op &rhs.0)
            }
        }
        impl $trait<DenseOperator> for DenseOperator {
            type Output = DenseOperator;
            fn $method(self, rhs: DenseOperator) -> DenseOperator {
                DenseOperator(self.0 $op rhs.0)
            }
        }
        impl $trait<&DenseOperator> for DenseOperator {
            type Output = DenseOperator;
            fn $method(self, rhs: &DenseOperator) -> DenseOperator {
                DenseOperator(self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &DenseOperator {
    type Output = DenseOperator;
    fn neg(self) -> DenseOperator {
        DenseOperator(-&self.0)
    }
}

/// `[[re, im], ...]` rows plus the dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// Distinct eigenvalues (ascending) with their spectral projectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<DenseOperator>,
}

impl SpectralDecomposition {
    /// `Σ λ Π_λ`.
    pub fn reconstruct(&self) -> DenseOperator {
        let dim = self.projectors[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(DenseOperator::zeros(dim), |acc, (l, p)| acc + p.scale_real(*l))
    }

    pub fn projector_for(&self, eigenvalue: f64, tol: f64) -> Option<&DenseOperator> {
        self.eigenvalues
            .iter()
            .position(|l| (l - eigenvalue).abs() <= tol)
            .map(|i| &self.projectors[i])
    }
}

/// Raw eigenpairs of a Hermitian matrix, ascending, without clustering.
pub(crate) fn eigh(a: &DenseOperator) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(a.hermitian_part().0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Spectral decomposition of a Hermitian matrix into an eigenweighted PVM.
/// Eigenvalues closer than `1e-8·‖A‖` share one projector.
pub fn eig_hermitian(a: &DenseOperator) -> Result<SpectralDecomposition> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::Domain(format!(
            "operator is not Hermitian (defect {defect:e})"
        )));
    }
    let (values, vectors) = eigh(a);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let gap = if scale > 0.0 { EIGEN_CLUSTER_TOL * scale } else { EIGEN_CLUSTER_TOL };

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..values.len() {
        match clusters.last_mut() {
            Some(c) if values[i] - values[*c.last().unwrap()] <= gap => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let dim = a.dim();
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for c in clusters {
        let mean = c.iter().map(|&i| values[i]).sum::<f64>() / c.len() as f64;
        let mut p = CMatrix::zeros(dim, dim);
        for &i in &c {
            let v = vectors.column(i);
            p += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(DenseOperator(p));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
    })
}

/// Operator norm; equals `√‖A*A‖` by the C* identity.
pub fn op_norm(a: &DenseOperator) -> f64 {
    a.0.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Hermitian within `tol` and no eigenvalue below `-tol`.
pub fn is_positive(a: &DenseOperator, tol: f64) -> bool {
    if !a.is_hermitian(tol) {
        return false;
    }
    min_eigenvalue(a) >= -tol
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(a: &DenseOperator) -> f64 {
    eigh(a).0.first().copied().unwrap_or(0.0)
}

/// Continuous functional calculus `f(A) = Σ f(λ) Π_λ` for Hermitian `A`.
pub fn apply_function<F, T>(f: F, a: &DenseOperator) -> Result<DenseOperator>
where
    F: Fn(f64) -> T,
    T: Into<Complex64>,
{
    let spec = eig_hermitian(a)?;
    let mut out = DenseOperator::zeros(a.dim());
    for (l, p) in spec.eigenvalues.iter().zip(&spec.projectors) {
        out = out + p.scale(f(*l).into());
    }
    Ok(out)
}

/// Principal square root of a positive matrix (negative round-off clipped).
pub fn sqrt_positive(a: &DenseOperator) -> Result<DenseOperator> {
    apply_function(|x| x.max(0.0).sqrt(), a)
}

/// Orthonormal basis (columns) of the null space of a Hermitian positive
/// semidefinite matrix: eigenvectors whose eigenvalue is below
/// `rel_tol · λ_max` (or `rel_tol` when the matrix vanishes).
pub(crate) fn psd_null_space(g: &DenseOperator, rel_tol: f64) -> Vec<CVector> {
    let (values, vectors) = eigh(g);
    let max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cut = if max > 0.0 { rel_tol * max } else { rel_tol };
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= cut)
        .map(|(i, _)| vectors.column(i).into_owned())
        .collect()
}

/// Null space of an arbitrary (rectangular) matrix: right singular vectors
/// whose singular value is below `rel_tol · σ_max`.
pub(crate) fn null_space(m: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = if max > 0.0 { rel_tol * max } else { rel_tol };
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cut)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Numerical rank of a rectangular matrix.
pub(crate) fn matrix_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}
