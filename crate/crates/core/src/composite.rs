//! Tensor products, partial traces, vectorization and commutants.
//!
//! Site 0 is the leftmost (most significant) tensor slot throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{matrix_rank, null_space, CMatrix, CVector, DenseOperator, DENSE_DIM_LIMIT};
use crate::error::{Error, Result};
use crate::states::State;

/// Rank tolerance for span computations, relative to the largest singular value.
pub const SPAN_TOL: f64 = 1e-10;

/// Per-site dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorLayout {
    local_dims: Vec<usize>,
}

impl FactorLayout {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() || local_dims.contains(&0) {
            return Err(Error::Domain("layout needs at least one nonzero site".into()));
        }
        let total = local_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= DENSE_DIM_LIMIT)
            .ok_or(Error::DimensionOverflow {
                dim: usize::MAX,
                limit: DENSE_DIM_LIMIT,
            })?;
        debug_assert!(total >= 1);
        Ok(FactorLayout { local_dims })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    fn digits(&self, mut idx: usize, out: &mut [usize]) {
        for s in (0..self.local_dims.len()).rev() {
            out[s] = idx % self.local_dims[s];
            idx /= self.local_dims[s];
        }
    }

    fn sub_index(&self, digits: &[usize], sites: &[usize]) -> usize {
        sites
            .iter()
            .fold(0, |acc, &s| acc * self.local_dims[s] + digits[s])
    }

    fn check_sites(&self, sites: &[usize]) -> Result<Vec<usize>> {
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::Domain(format!("repeated site in {sites:?}")));
        }
        if let Some(bad) = sorted.iter().find(|&&s| s >= self.sites()) {
            return Err(Error::Domain(format!(
                "site {bad} out of range for {} sites",
                self.sites()
            )));
        }
        Ok(sorted)
    }
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    a.kron(b)
}

/// Tensor product of a list of operators.
pub fn tensor_all(ops: &[DenseOperator]) -> Result<DenseOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::Empty("tensor of zero factors".into()))?;
    rest.iter().try_fold(first.clone(), |acc, op| acc.kron(op))
}

pub fn hadamard() -> DenseOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DenseOperator::from_real_rows(&[&[s, s], &[s, -s]])
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ X`.
pub fn cnot() -> DenseOperator {
    let p0 = DenseOperator::matrix_unit(2, 0, 0);
    let p1 = DenseOperator::matrix_unit(2, 1, 1);
    let x = DenseOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let i = DenseOperator::identity(2);
    p0.kron(&i).expect("4 ≤ limit") + p1.kron(&x).expect("4 ≤ limit")
}

/// Bell vector `CNOT·(H ⊗ I)|00⟩`.
pub fn bell_vector() -> CVector {
    let mut zero = CVector::zeros(4);
    zero[0] = Complex64::new(1.0, 0.0);
    let h_i = hadamard().kron(&DenseOperator::identity(2)).expect("4 ≤ limit");
    cnot().apply(&h_i.apply(&zero))
}

/// Bell state on two qubits.
pub fn bell_state() -> Result<State> {
    State::from_vector(&bell_vector())?.attach_spec(crate::pauli::AlgebraSpec::qubits(2)?)
}

/// Traces out every site not in `keep`; kept sites retain their order.
pub fn partial_trace(a: &DenseOperator, layout: &FactorLayout, keep: &[usize]) -> Result<DenseOperator> {
    if a.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            found: a.dim(),
        });
    }
    let keep = layout.check_sites(keep)?;
    let traced: Vec<usize> = (0..layout.sites()).filter(|s| !keep.contains(s)).collect();
    let out_dim: usize = keep.iter().map(|&s| layout.local_dims[s]).product();
    let mut out = DenseOperator::zeros(out_dim);
    let n = a.dim();
    let mut di = vec![0; layout.sites()];
    let mut dj = vec![0; layout.sites()];
    for i in 0..n {
        layout.digits(i, &mut di);
        for j in 0..n {
            layout.digits(j, &mut dj);
            if traced.iter().all(|&s| di[s] == dj[s]) {
                let (r, c) = (layout.sub_index(&di, &keep), layout.sub_index(&dj, &keep));
                out[(r, c)] += a[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reduced density on the kept sites.
pub fn reduced_state(state: &State, layout: &FactorLayout, keep: &[usize]) -> Result<State> {
    State::new(partial_trace(state.density(), layout, keep)?.hermitian_part())
}

/// `A^(ℓ) ⊗ B^(ℓ̄)` with `A` on site `site` and `B` on the remaining sites
/// in their natural order.
pub fn embed_split(
    layout: &FactorLayout,
    site: usize,
    local: &DenseOperator,
    complement: &DenseOperator,
) -> Result<DenseOperator> {
    layout.check_sites(&[site])?;
    let rest: Vec<usize> = (0..layout.sites()).filter(|&s| s != site).collect();
    let rest_dim: usize = rest.iter().map(|&s| layout.local_dims[s]).product();
    for (op, expected) in [(local, layout.local_dims[site]), (complement, rest_dim)] {
        if op.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: op.dim(),
            });
        }
    }
    let n = layout.total_dim();
    let mut out = DenseOperator::zeros(n);
    let mut di = vec![0; layout.sites()];
    let mut dj = vec![0; layout.sites()];
    for i in 0..n {
        layout.digits(i, &mut di);
        for j in 0..n {
            layout.digits(j, &mut dj);
            let (ri, rj) = (layout.sub_index(&di, &rest), layout.sub_index(&dj, &rest));
            out[(i, j)] = local[(di[site], dj[site])] * complement[(ri, rj)];
        }
    }
    Ok(out)
}

/// Tensor product of all single-site reduced densities.
pub fn product_of_marginals(rho: &DenseOperator, layout: &FactorLayout) -> Result<DenseOperator> {
    let marginals = (0..layout.sites())
        .map(|s| partial_trace(rho, layout, &[s]))
        .collect::<Result<Vec<_>>>()?;
    tensor_all(&marginals)
}

/// Whether the density equals the product of its single-site marginals.
pub fn is_product_state(state: &State, layout: &FactorLayout, tol: f64) -> Result<bool> {
    Ok(product_of_marginals(state.density(), layout)?.distance(state.density()) <= tol)
}

/// `|A⟩⟩ = Σ A_ij |i⟩ ⊗ |j⟩` (row stacking).
pub fn vectorize(a: &CMatrix) -> CVector {
    let (r, c) = a.shape();
    CVector::from_fn(r * c, |k, _| a[(k / c, k % c)])
}

/// Inverse of [`vectorize`] for a `rows × cols` matrix.
pub fn devectorize(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            found: v.len(),
        });
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

/// Superoperator `A ↦ [M, A]` in the row-stacking basis:
/// `M ⊗ I − I ⊗ Mᵀ`.
pub fn commutator_superoperator(m: &DenseOperator) -> CMatrix {
    let d = m.dim();
    let id = CMatrix::identity(d, d);
    m.matrix().kronecker(&id) - id.kronecker(&m.matrix().transpose())
}

/// Basis of `{A : [A, M] = 0 for all generators M}`. The generator set is
/// closed under adjoints first.
pub fn commutant(generators: &[DenseOperator], dim: usize) -> Result<Vec<DenseOperator>> {
    if let Some(bad) = generators.iter().find(|g| g.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let mut all = generators.to_vec();
    all.extend(generators.iter().map(|g| g.adjoint()));
    if all.is_empty() {
        return Ok(matrix_units(dim));
    }
    let d2 = dim * dim;
    let mut stacked = CMatrix::zeros(all.len() * d2, d2);
    for (k, g) in all.iter().enumerate() {
        stacked.view_mut((k * d2, 0), (d2, d2)).copy_from(&commutator_superoperator(g));
    }
    Ok(null_space(&stacked, SPAN_TOL)
        .iter()
        .map(|v| DenseOperator::from_matrix_unchecked(devectorize(v, dim, dim).expect("d² entries")))
        .collect())
}

fn matrix_units(dim: usize) -> Vec<DenseOperator> {
    (0..dim * dim)
        .map(|k| DenseOperator::matrix_unit(dim, k / dim, k % dim))
        .collect()
}

/// Dimension of the linear span of a set of operators.
pub fn span_dim(ops: &[DenseOperator]) -> usize {
    if ops.is_empty() {
        return 0;
    }
    let cols: Vec<CVector> = ops.iter().map(|o| vectorize(o.matrix())).collect();
    matrix_rank(&CMatrix::from_columns(&cols), SPAN_TOL)
}

/// Smallest unital algebra containing the given operators.
pub fn generated_algebra(ops: &[DenseOperator], dim: usize) -> Vec<DenseOperator> {
    let mut basis = vec![DenseOperator::identity(dim)];
    basis.extend(ops.iter().cloned());
    basis.extend(ops.iter().map(|o| o.adjoint()));
    basis = reduce_to_basis(&basis);
    loop {
        let before = basis.len();
        let mut grown = basis.clone();
        for a in &basis {
            for b in &basis {
                grown.push(a * b);
            }
        }
        basis = reduce_to_basis(&grown);
        if basis.len() == before {
            return basis;
        }
    }
}

/// Greedy selection of linearly independent operators.
fn reduce_to_basis(ops: &[DenseOperator]) -> Vec<DenseOperator> {
    let mut kept: Vec<DenseOperator> = Vec::new();
    for o in ops {
        let mut trial = kept.clone();
        trial.push(o.clone());
        if span_dim(&trial) > kept.len() {
            kept = trial;
        }
    }
    kept
}

/// Outcome of comparing a subalgebra with its commutant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactorReport {
    pub is_masa: bool,
    pub join_is_full: bool,
    pub intersection_trivial: bool,
    pub algebra_dim: usize,
    pub commutant_dim: usize,
}

/// Compares `N` (the algebra generated by `basis`) with `N′`: whether
/// `N ∨ N′` is everything, whether `N ∩ N′ = ℂI`, and whether `N = N′`.
pub fn factor_check(basis: &[DenseOperator], dim: usize) -> Result<FactorReport> {
    let n = generated_algebra(basis, dim);
    let n_prime = commutant(&n, dim)?;
    let mut products = Vec::with_capacity(n.len() * n_prime.len());
    for a in &n {
        for b in &n_prime {
            products.push(a * b);
        }
    }
    let join = span_dim(&products);
    let mut union = n.clone();
    union.extend(n_prime.iter().cloned());
    let sum_dim = span_dim(&union);
    let intersection = n.len() + n_prime.len() - sum_dim;
    Ok(FactorReport {
        is_masa: n.len() == n_prime.len() && sum_dim == n.len() && is_commutative(&n),
        join_is_full: join == dim * dim,
        intersection_trivial: intersection == 1,
        algebra_dim: n.len(),
        commutant_dim: n_prime.len(),
    })
}

fn is_commutative(ops: &[DenseOperator]) -> bool {
    ops.iter()
        .all(|a| ops.iter().all(|b| a.commutator(b).frobenius_norm() < 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_matrix};
    use crate::states::sigma_dense;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn paulis() -> Vec<DenseOperator> {
        vec![
            DenseOperator::identity(2),
            sigma_dense([1.0, 0.0, 0.0]).unwrap(),
            sigma_dense([0.0, 1.0, 0.0]).unwrap(),
            sigma_dense([0.0, 0.0, 1.0]).unwrap(),
        ]
    }

    #[test]
    fn cnot_block_form() {
        let c = cnot();
        let x = &paulis()[1];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c[(i, j)], DenseOperator::identity(2)[(i, j)]);
                assert_eq!(c[(2 + i, 2 + j)], x[(i, j)]);
                assert_eq!(c[(i, 2 + j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn tensor_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let [a, b, c, d] = [0; 4].map(|_| random_matrix(&mut rng, 2));
            let lhs = &tensor(&a, &b).unwrap() * &tensor(&c, &d).unwrap();
            let rhs = tensor(&(&a * &c), &(&b * &d)).unwrap();
            assert!(lhs.distance(&rhs) < 1e-12);
        }
        let i = DenseOperator::identity(2);
        assert_eq!(tensor(&i, &i).unwrap(), DenseOperator::identity(4));
    }

    #[test]
    fn bell_expectations_and_marginals() {
        let bell = bell_state().unwrap();
        let p = paulis();
        let zz = tensor(&p[3], &p[3]).unwrap();
        let zi = tensor(&p[3], &p[0]).unwrap();
        assert!((bell.expect(&zz).unwrap().re - 1.0).abs() < 1e-12);
        assert!(bell.expect(&zi).unwrap().norm() < 1e-12);
        let layout = FactorLayout::qubits(2).unwrap();
        for site in 0..2 {
            let r = partial_trace(bell.density(), &layout, &[site]).unwrap();
            assert!(r.distance(&DenseOperator::identity(2).scale_real(0.5)) < 1e-12);
        }
        assert!(!is_product_state(&bell, &layout, 1e-10).unwrap());
        // explicit form ½ Σ |aa⟩⟨bb|
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                assert!((bell.density()[(i, j)].re - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_of_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let layout = FactorLayout::new(vec![2, 3]).unwrap();
        for _ in 0..10 {
            let r1 = random_density(&mut rng, 2);
            let r2 = random_density(&mut rng, 3);
            let prod = tensor(&r1, &r2).unwrap();
            assert!(partial_trace(&prod, &layout, &[0]).unwrap().distance(&r1) < 1e-12);
            assert!(partial_trace(&prod, &layout, &[1]).unwrap().distance(&r2) < 1e-12);
            let full = partial_trace(&prod, &layout, &[]).unwrap();
            assert!((full[(0, 0)].re - 1.0).abs() < 1e-12);
            assert!(is_product_state(&State::new(prod).unwrap(), &layout, 1e-10).unwrap());
        }
    }

    #[test]
    fn partial_trace_keeps_order_and_validates() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let layout = FactorLayout::new(vec![2, 2, 3]).unwrap();
        let [a, b, c] = [2, 2, 3].map(|d| random_density(&mut rng, d));
        let abc = tensor_all(&[a.clone(), b, c.clone()]).unwrap();
        let ac = partial_trace(&abc, &layout, &[2, 0]).unwrap();
        assert!(ac.distance(&tensor(&a, &c).unwrap()) < 1e-12);
        assert!(partial_trace(&abc, &layout, &[3]).is_err());
        assert!(partial_trace(&abc, &layout, &[0, 0]).is_err());
        assert!(partial_trace(&a, &layout, &[0]).is_err());
    }

    #[test]
    fn vectorization_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 3;
        let id_vec = vectorize(&CMatrix::identity(d, d));
        for _ in 0..50 {
            let a = random_matrix(&mut rng, d);
            let va = vectorize(a.matrix());
            let left = a.kron(&DenseOperator::identity(d)).unwrap().apply(&id_vec);
            let right = DenseOperator::identity(d).kron(&a.transpose()).unwrap().apply(&id_vec);
            assert!((&left - &va).norm() < 1e-12);
            assert!((&right - &va).norm() < 1e-12);
            assert_eq!(devectorize(&va, d, d).unwrap(), *a.matrix());
            let b = random_matrix(&mut rng, d);
            let hs = vectorize(a.matrix()).dotc(&vectorize(b.matrix()));
            assert!((hs - (&a.adjoint() * &b).trace()).norm() < 1e-12);
        }
        let rho = random_density(&mut rng, d);
        let a = random_matrix(&mut rng, d);
        let lhs = (&rho * &a).trace();
        let rhs = id_vec.dotc(&vectorize((&rho * &a).matrix()));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn commutants() {
        let p = paulis();
        let i = &p[0];
        let first_factor: Vec<DenseOperator> = p.iter().map(|s| tensor(s, i).unwrap()).collect();
        let c = commutant(&first_factor, 4).unwrap();
        assert_eq!(c.len(), 4);
        let second: Vec<DenseOperator> = p.iter().map(|s| tensor(i, s).unwrap()).collect();
        let mut both = c.clone();
        both.extend(second.iter().cloned());
        assert_eq!(span_dim(&both), 4);

        assert_eq!(commutant(&p, 2).unwrap().len(), 1);
        let iz = vec![p[0].clone(), p[3].clone()];
        let c = commutant(&iz, 2).unwrap();
        assert_eq!(c.len(), 2);
        let mut both = c;
        both.extend(iz.iter().cloned());
        assert_eq!(span_dim(&both), 2);
    }

    #[test]
    fn factor_checks() {
        let p = paulis();
        let first: Vec<DenseOperator> = p.iter().map(|s| tensor(s, &p[0]).unwrap()).collect();
        let r = factor_check(&first, 4).unwrap();
        assert!(r.join_is_full && r.intersection_trivial && !r.is_masa);

        let masa = factor_check(&[p[0].clone(), p[3].clone()], 2).unwrap();
        assert!(masa.is_masa && !masa.join_is_full);
        assert_eq!(masa.algebra_dim, 2);

        let scalars = factor_check(&[DenseOperator::identity(3)], 3).unwrap();
        assert!(scalars.join_is_full && scalars.intersection_trivial);
        assert_eq!(scalars.commutant_dim, 9);
    }
}
