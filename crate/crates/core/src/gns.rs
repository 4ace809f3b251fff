//! The GNS construction at matrix scale.
//!
//! The algebra is spanned by an operator basis. Quotienting by the kernel
//! `K_π` and completing with the inner product `⟨[B], [A]⟩ = π(B* A)` gives a
//! Hilbert space on which the algebra acts by left multiplication.
//!
//! Basis selection is deterministic: the operator basis is scanned in order
//! and each element is Gram–Schmidt orthonormalized against the classes kept
//! so far, under the state's inner product. Elements whose residual has
//! (relative) zero seminorm lie in the span of earlier classes modulo the
//! kernel and are skipped. For the qubit fiducial `π₍₀₎` with Pauli order
//! `I, Z, X, XZ` this selects `[I]` and `[X]`, the computational basis.

use num_complex::Complex64;
use serde::Serialize;

use crate::dense::{CVector, DenseOperator, MatrixJson};
use crate::error::Result;
use crate::states::{default_operator_basis, kernel_basis, State, KERNEL_TOL};

#[derive(Debug, Clone)]
pub struct GnsSpace {
    state: State,
    kernel: Vec<DenseOperator>,
    representatives: Vec<DenseOperator>,
    algebra_dim: usize,
}

/// Builds the GNS space of `state` over its default operator basis.
pub fn gns_construct(state: &State) -> Result<GnsSpace> {
    let basis = default_operator_basis(state)?;
    gns_construct_with_basis(state, &basis)
}

pub fn gns_construct_with_basis(state: &State, basis: &[DenseOperator]) -> Result<GnsSpace> {
    let kernel = kernel_basis(state, basis)?;
    let scale = basis
        .iter()
        .map(|b| state.correlation(b, b).map(|v| v.re))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let cut = KERNEL_TOL * scale.max(f64::MIN_POSITIVE);

    let mut reps: Vec<DenseOperator> = Vec::new();
    for b in basis {
        let mut r = b.clone();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &reps {
                let c = state.correlation(q, &r)?;
                r = r - q.scale(c);
            }
        }
        let norm2 = state.correlation(&r, &r)?.re;
        if norm2 > cut {
            reps.push(r.scale_real(1.0 / norm2.sqrt()));
        }
    }

    Ok(GnsSpace {
        state: state.clone(),
        kernel,
        representatives: reps,
        algebra_dim: basis.len(),
    })
}

impl GnsSpace {
    /// Dimension of the quotient `A / K_π`.
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn algebra_dim(&self) -> usize {
        self.algebra_dim
    }

    pub fn kernel_basis(&self) -> &[DenseOperator] {
        &self.kernel
    }

    /// Operators whose classes form the orthonormal quotient basis.
    pub fn representatives(&self) -> &[DenseOperator] {
        &self.representatives
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Coordinates of the class `[A]` in the quotient basis.
    pub fn coordinates(&self, a: &DenseOperator) -> Result<CVector> {
        let coords = self
            .representatives
            .iter()
            .map(|q| self.state.correlation(q, a))
            .collect::<Result<Vec<Complex64>>>()?;
        Ok(CVector::from_vec(coords))
    }

    /// Matrix of left multiplication by `A` on the quotient:
    /// `action(A)_{ab} = π(q_a* A q_b)`.
    pub fn action(&self, a: &DenseOperator) -> Result<DenseOperator> {
        let n = self.dim();
        let mut m = DenseOperator::zeros(n);
        for (j, qb) in self.representatives.iter().enumerate() {
            let aq = a * qb;
            for (i, qa) in self.representatives.iter().enumerate() {
                m[(i, j)] = self.state.correlation(qa, &aq)?;
            }
        }
        Ok(m)
    }

    /// `⟨[B], [A]⟩` computed from quotient coordinates.
    pub fn inner(&self, b: &DenseOperator, a: &DenseOperator) -> Result<Complex64> {
        let cb = self.coordinates(b)?;
        let ca = self.coordinates(a)?;
        Ok(cb.dotc(&ca))
    }

    /// Report with kernel basis, dimension and the action of each named
    /// operator.
    pub fn report(&self, named: &[(String, DenseOperator)]) -> Result<GnsReport> {
        Ok(GnsReport {
            dim: self.dim(),
            algebra_dim: self.algebra_dim,
            kernel_dim: self.kernel.len(),
            kernel_basis: self.kernel.iter().map(|k| k.to_json()).collect(),
            actions: named
                .iter()
                .map(|(name, op)| {
                    Ok(ActionEntry {
                        operator: name.clone(),
                        matrix: self.action(op)?.to_json(),
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GnsReport {
    pub dim: usize,
    pub algebra_dim: usize,
    pub kernel_dim: usize,
    pub kernel_basis: Vec<MatrixJson>,
    pub actions: Vec<ActionEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionEntry {
    pub operator: String,
    pub matrix: MatrixJson,
}
