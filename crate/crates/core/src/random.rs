//! Seeded random matrices, states, unitaries and channels.
//!
//! Every generator takes an explicit `Rng` so that experiments are
//! reproducible from a seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dense::{CMatrix, CVector, DenseOperator};

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Ginibre matrix: i.i.d. complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseOperator {
    DenseOperator::from_matrix_unchecked(CMatrix::from_fn(dim, dim, |_, _| gaussian(rng)))
}

pub fn random_rect<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseOperator {
    random_matrix(rng, dim).hermitian_part()
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseOperator {
    let g = random_matrix(rng, dim).into_matrix();
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    DenseOperator::from_matrix_unchecked(q)
}

/// Uniformly random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Density `|ψ⟩⟨ψ|` of a random pure vector.
pub fn random_pure_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseOperator {
    let v = random_pure_vector(rng, dim);
    DenseOperator::outer(&v, &v)
}

/// Full-rank random density `G G* / tr(G G*)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseOperator {
    let g = random_matrix(rng, dim);
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}

/// Random channel with `count` Kraus operators, obtained by slicing a
/// random isometry `dim_in → dim_out·count`.
pub fn random_kraus<R: Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    count: usize,
) -> Vec<CMatrix> {
    let tall = random_rect(rng, dim_out * count, dim_in);
    let (q, _) = tall.qr().unpack();
    (0..count)
        .map(|k| q.rows(k * dim_out, dim_out).into_owned())
        .collect()
}

/// Uniform point on the unit sphere in R³.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [standard_normal(rng), standard_normal(rng), standard_normal(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
