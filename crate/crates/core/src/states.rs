//! States as positive normalized functionals `π(A) = tr(ϖ A)`.
//!
//! A [`State`] stores its density `ϖ` in the defining representation; the
//! functional interface (expectation, correlation, variance, kernel and
//! definite set) is derived from it.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, CVector, DenseOperator, MatrixJson, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::pauli::{all_words, sigma_of_vector, AlgebraSpec};

/// Tolerance on the density's trace, Hermiticity and positivity.
pub const STATE_TOL: f64 = 1e-10;

/// Relative singular-value cut for deciding that an operator is null.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    spec: Option<AlgebraSpec>,
    density: DenseOperator,
}

impl State {
    /// Validates and wraps a density matrix.
    pub fn new(density: DenseOperator) -> Result<Self> {
        if !density.is_hermitian(STATE_TOL) {
            return Err(Error::Domain("density is not Hermitian".into()));
        }
        let tr = density.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Domain(format!("density trace is {tr}, not 1")));
        }
        let min = dense::min_eigenvalue(&density);
        if min < -STATE_TOL {
            return Err(Error::Domain(format!(
                "density has negative eigenvalue {min:e}"
            )));
        }
        Ok(State {
            spec: None,
            density,
        })
    }

    /// A state on the Pauli algebra described by `spec`.
    pub fn with_spec(spec: AlgebraSpec, density: DenseOperator) -> Result<Self> {
        let dim = spec.dim()?;
        if density.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: density.dim(),
            });
        }
        let mut s = Self::new(density)?;
        s.spec = Some(spec);
        Ok(s)
    }

    /// Vector state `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn from_vector(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Domain("zero vector".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        Self::new(DenseOperator::outer(&v, &v))
    }

    /// Computational basis state `|b_1 … b_n⟩` on the given algebra.
    pub fn basis(spec: AlgebraSpec, digits: &[usize]) -> Result<Self> {
        let dim = spec.dim()?;
        if digits.len() != spec.n() || digits.iter().any(|&b| b >= spec.d() as usize) {
            return Err(Error::Domain(format!("invalid basis label {digits:?}")));
        }
        let idx = digits.iter().fold(0, |acc, &b| acc * spec.d() as usize + b);
        Self::with_spec(spec, DenseOperator::matrix_unit(dim, idx, idx))
    }

    /// Qubit fiducial `π₍b₎`, the `Z ← (−1)^b` eigenstate.
    pub fn fiducial(b: usize) -> Result<Self> {
        Self::basis(AlgebraSpec::qubits(1)?, &[b])
    }

    /// `Z ← +1` with probability `p`: `p|0⟩⟨0| + (1−p)|1⟩⟨1|`.
    pub fn coin(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        let rho = DenseOperator::diagonal(&[Complex64::new(p, 0.0), Complex64::new(1.0 - p, 0.0)]);
        Self::with_spec(AlgebraSpec::qubits(1)?, rho)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(DenseOperator::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn spec(&self) -> Option<AlgebraSpec> {
        self.spec
    }

    /// Attaches an algebra description to a state of matching dimension.
    pub fn attach_spec(mut self, spec: AlgebraSpec) -> Result<Self> {
        let dim = spec.dim()?;
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        self.spec = Some(spec);
        Ok(self)
    }

    pub fn density(&self) -> &DenseOperator {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    fn check_dim(&self, a: &DenseOperator) -> Result<()> {
        if a.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            })
        }
    }

    /// `π(A) = tr(ϖ A)`.
    pub fn expect(&self, a: &DenseOperator) -> Result<Complex64> {
        self.check_dim(a)?;
        // tr(ϖA) = Σ_ij ϖ_ij A_ji
        let (r, m) = (self.density.matrix(), a.matrix());
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += r[(i, j)] * m[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Correlation `G(B, A) = π(B* A)`.
    pub fn correlation(&self, b: &DenseOperator, a: &DenseOperator) -> Result<Complex64> {
        self.check_dim(b)?;
        self.expect(&(&b.adjoint() * a))
    }

    /// Seminorm `‖A‖_π = √π(A* A)`.
    pub fn seminorm(&self, a: &DenseOperator) -> Result<f64> {
        Ok(self.correlation(a, a)?.re.max(0.0).sqrt())
    }

    /// `π(Γ*Γ) − |π(Γ)|²`.
    pub fn variance(&self, gamma: &DenseOperator) -> Result<f64> {
        let second = self.correlation(gamma, gamma)?.re;
        let mean = self.expect(gamma)?;
        Ok(second - mean.norm_sqr())
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            dim: self.dim(),
            density: self.density.to_json(),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let rho = DenseOperator::from_json(&json.density)?;
        if rho.dim() != json.dim {
            return Err(Error::Json(format!(
                "state dim {} does not match density dim {}",
                json.dim,
                rho.dim()
            )));
        }
        Self::new(rho)
    }
}

/// `{"dim": int, "density": matrix-json}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub density: MatrixJson,
}

/// Default operator basis: canonical Pauli words when the state carries an
/// algebra description, matrix units `|i⟩⟨j|` otherwise.
pub fn default_operator_basis(state: &State) -> Result<Vec<DenseOperator>> {
    match state.spec() {
        Some(spec) => all_words(spec).iter().map(|w| w.to_dense()).collect(),
        None => {
            let d = state.dim();
            Ok((0..d * d)
                .map(|k| DenseOperator::matrix_unit(d, k / d, k % d))
                .collect())
        }
    }
}

/// Gram matrix `G_{αβ} = π(B_α* B_β)`.
pub fn gram_matrix(state: &State, basis: &[DenseOperator]) -> Result<DenseOperator> {
    let n = basis.len();
    let mut g = DenseOperator::zeros(n);
    for a in 0..n {
        for b in a..n {
            let v = state.correlation(&basis[a], &basis[b])?;
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(g)
}

/// Basis of the kernel `K_π = {Θ : π(Θ*Θ) = 0}` within the span of
/// `operator_basis`, as null vectors of the Gram matrix.
pub fn kernel_basis(state: &State, operator_basis: &[DenseOperator]) -> Result<Vec<DenseOperator>> {
    let g = gram_matrix(state, operator_basis)?;
    let null = dense::psd_null_space(&g, KERNEL_TOL);
    Ok(null
        .iter()
        .map(|c| combine(operator_basis, c.iter().copied(), state.dim()))
        .collect())
}

pub(crate) fn combine<I>(basis: &[DenseOperator], coeffs: I, dim: usize) -> DenseOperator
where
    I: IntoIterator<Item = Complex64>,
{
    basis
        .iter()
        .zip(coeffs)
        .fold(DenseOperator::zeros(dim), |acc, (b, c)| acc + b.scale(c))
}

/// Orthonormal (Hilbert–Schmidt) basis of the Hermitian matrices.
pub fn hermitian_basis(dim: usize) -> Vec<DenseOperator> {
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        out.push(DenseOperator::matrix_unit(dim, i, i));
    }
    let s = FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut sym = DenseOperator::zeros(dim);
            sym[(i, j)] = Complex64::new(s, 0.0);
            sym[(j, i)] = Complex64::new(s, 0.0);
            out.push(sym);
            let mut anti = DenseOperator::zeros(dim);
            anti[(i, j)] = Complex64::new(0.0, -s);
            anti[(j, i)] = Complex64::new(0.0, s);
            out.push(anti);
        }
    }
    out
}

/// Real-linear basis of the definite set: self-adjoint operators whose
/// variance (for unit Hilbert–Schmidt norm) is below `tol`. Always contains
/// the identity direction.
pub fn definite_set(state: &State, tol: f64) -> Result<Vec<DenseOperator>> {
    let basis = hermitian_basis(state.dim());
    let means: Vec<f64> = basis
        .iter()
        .map(|h| state.expect(h).map(|v| v.re))
        .collect::<Result<_>>()?;
    let n = basis.len();
    let mut q = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = state.expect(&(&basis[a] * &basis[b]))?.re - means[a] * means[b];
            q[(a, b)] = v;
            q[(b, a)] = v;
        }
    }
    let eig = SymmetricEigen::new(q);
    let dim = state.dim();
    Ok((0..n)
        .filter(|&k| eig.eigenvalues[k].abs() < tol)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            combine(&basis, col.iter().map(|&r| Complex64::new(r, 0.0)), dim)
        })
        .collect())
}

/// Pure iff the density has rank one.
pub fn is_pure(state: &State, tol: f64) -> bool {
    let (values, _) = dense::eigh(state.density());
    values.len() < 2 || values[values.len() - 2] < tol
}

/// `tr(ϖ²)`.
pub fn purity(state: &State) -> f64 {
    state.density().hs_inner(state.density()).re
}

/// `e^{iδ}(I cos θ + i sin θ σ(n))` for a real unit vector `n`.
pub fn pauli_exponential(delta: f64, theta: f64, n: [f64; 3]) -> Result<DenseOperator> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > HERMITIAN_TOL {
        return Err(Error::Domain(format!("axis has norm {norm}, expected 1")));
    }
    let sigma = sigma_dense(n)?;
    let u = DenseOperator::identity(2).scale_real(theta.cos())
        + sigma.scale(Complex64::new(0.0, theta.sin()));
    Ok(u.scale(Complex64::from_polar(1.0, delta)))
}

/// Dense `σ(v) = v₁X + v₂Y + v₃Z` for a real vector.
pub fn sigma_dense(v: [f64; 3]) -> Result<DenseOperator> {
    let spec = AlgebraSpec::qubits(1)?;
    sigma_of_vector(v.map(|x| Complex64::new(x, 0.0)), spec)?.to_dense()
}

/// State conjugated by a unitary: density `U ϖ U*`, i.e. the functional
/// `A ↦ π(U* A U)`.
pub fn conjugate_state(state: &State, u: &DenseOperator) -> Result<State> {
    state.check_dim(u)?;
    if !u.is_unitary(HERMITIAN_TOL) {
        return Err(Error::Domain("conjugating operator is not unitary".into()));
    }
    let rho = (u * state.density() * u.adjoint()).hermitian_part();
    Ok(State {
        spec: state.spec,
        density: rho,
    })
}

/// Convex combination `Σ pᵢ ϖᵢ`.
pub fn mix_states(weights: &[f64], states: &[State]) -> Result<State> {
    if weights.len() != states.len() || states.is_empty() {
        return Err(Error::Domain("weights and states must be non-empty and equal in length".into()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::Domain("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("weights sum to {total}, not 1")));
    }
    let dim = states[0].dim();
    let mut rho = DenseOperator::zeros(dim);
    for (w, s) in weights.iter().zip(states) {
        s.check_dim(&rho)?;
        rho = rho + s.density().scale_real(*w);
    }
    let spec = states[0].spec.filter(|sp| states.iter().all(|s| s.spec == Some(*sp)));
    let mut out = State::new(rho)?;
    out.spec = spec;
    Ok(out)
}

/// `rᵢ = π(σᵢ)` for a qubit state.
pub fn bloch_vector(state: &State) -> Result<[f64; 3]> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: state.dim(),
        });
    }
    let mut r = [0.0; 3];
    for (i, slot) in r.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        *slot = state.expect(&sigma_dense(e)?)?.re;
    }
    Ok(r)
}

/// `½(I + r·σ)`; rejects `|r| > 1`.
pub fn state_from_bloch(r: [f64; 3]) -> Result<State> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm > 1.0 + STATE_TOL {
        return Err(Error::Domain(format!("Bloch vector has length {norm} > 1")));
    }
    let rho = (DenseOperator::identity(2) + sigma_dense(r)?).scale_real(0.5);
    State::with_spec(AlgebraSpec::qubits(1)?, rho)
}

/// Vector state `cos(ϑ/2)|0⟩ + i·sin(ϑ/2)·e^{iφ}|1⟩`. Note the factor `i`:
/// the azimuth of the resulting Bloch vector is `φ + π/2`.
pub fn bloch_sphere_state(vartheta: f64, phi: f64) -> Result<State> {
    let psi = CVector::from_column_slice(&[
        Complex64::new((vartheta / 2.0).cos(), 0.0),
        Complex64::new(0.0, (vartheta / 2.0).sin()) * Complex64::from_polar(1.0, phi),
    ]);
    State::from_vector(&psi)?.attach_spec(AlgebraSpec::qubits(1)?)
}
