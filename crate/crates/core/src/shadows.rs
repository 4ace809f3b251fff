//! Classical shadows at desk scale.
//!
//! A scheme is a finite set `𝒢` of unitaries and a PVM `{Π_λ}`. Measuring
//! `U ϖ U*` and undoing `U` yields the snapshot `Q = U* Π_λ U` with
//! probability `tr(Π_λ U ϖ U*) / |𝒢|`, so the average snapshot is the
//! measure-and-prepare channel
//!
//! ```text
//! M(ϖ) = |𝒢|⁻¹ Σ_{U,λ} tr(Q_{U,λ} ϖ) Q_{U,λ}.
//! ```
//!
//! When `M` is invertible the shadows `M⁻¹(Q)` are unbiased estimators of
//! `ϖ`, and expectations are estimated by a median of batch means.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::composite::{devectorize, tensor_all, vectorize};
use crate::dense::{self, CMatrix, DenseOperator, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::random::random_pure_density;
use crate::states::State;

/// Relative eigenvalue cut for the pseudo-inverse of `M`.
pub const RANK_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ShadowScheme {
    dim: usize,
    unitaries: Vec<DenseOperator>,
    pvm: Vec<DenseOperator>,
    m: CMatrix,
    m_inv: Option<CMatrix>,
    rank: usize,
}

/// Builds `M` for a unitary set and a PVM; `M` is inverted when it has full
/// rank `d²`.
pub fn shadow_channel(unitaries: &[DenseOperator], pvm: &[DenseOperator]) -> Result<ShadowScheme> {
    let dim = pvm
        .first()
        .map(DenseOperator::dim)
        .ok_or_else(|| Error::Empty("PVM has no projectors".into()))?;
    if unitaries.is_empty() {
        return Err(Error::Empty("no unitaries".into()));
    }
    for u in unitaries {
        if u.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: u.dim(),
            });
        }
        if !u.is_unitary(1e-10) {
            return Err(Error::Domain("scheme element is not unitary".into()));
        }
    }
    let mut sum = DenseOperator::zeros(dim);
    for (i, p) in pvm.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if (p * p).distance(p) > 1e-10 || !p.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Domain(format!("PVM element {i} is not a projector")));
        }
        for q in &pvm[i + 1..] {
            if (p * q).frobenius_norm() > 1e-10 {
                return Err(Error::Domain("PVM elements are not orthogonal".into()));
            }
        }
        sum = sum + p;
    }
    if sum.distance(&DenseOperator::identity(dim)) > 1e-10 {
        return Err(Error::Domain("PVM does not resolve the identity".into()));
    }

    let d2 = dim * dim;
    let mut m = CMatrix::zeros(d2, d2);
    for u in unitaries {
        for p in pvm {
            let v = vectorize((&(&u.adjoint() * p) * u).matrix());
            m += &v * v.adjoint();
        }
    }
    m /= Complex64::new(unitaries.len() as f64, 0.0);

    // M is Hermitian and positive on the vectorized space
    let herm = DenseOperator::from_matrix_unchecked(m.clone()).hermitian_part();
    let (values, vectors) = dense::eigh(&herm);
    let top = values.iter().cloned().fold(0.0, f64::max);
    let rank = values.iter().filter(|&&v| v > RANK_CUTOFF * top).count();
    let m_inv = (rank == d2).then(|| {
        let inv_diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d2,
            values.iter().map(|&v| Complex64::new(1.0 / v, 0.0)),
        ));
        &vectors * inv_diag * vectors.adjoint()
    });
    Ok(ShadowScheme {
        dim,
        unitaries: unitaries.to_vec(),
        pvm: pvm.to_vec(),
        m,
        m_inv,
        rank,
    })
}

/// `{I, H, H S*}` composed with `{I, X}`: six single-qubit unitaries whose
/// Z-basis measurements are the six Pauli eigenbases.
pub fn single_qubit_pauli_unitaries() -> Vec<DenseOperator> {
    let s = 1.0 / 2f64.sqrt();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let id = DenseOperator::identity(2);
    let h = DenseOperator::from_real_rows(&[&[s, s], &[s, -s]]);
    let h_sdag = DenseOperator::from_rows(&[&[c(s, 0.0), c(0.0, -s)], &[c(s, 0.0), c(0.0, s)]]);
    let x = DenseOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let base = [id, h, h_sdag];
    base.iter()
        .flat_map(|u| [u.clone(), &x * u])
        .collect()
}

/// Computational-basis PVM on `C^dim`.
pub fn computational_pvm(dim: usize) -> Vec<DenseOperator> {
    (0..dim).map(|i| DenseOperator::matrix_unit(dim, i, i)).collect()
}

/// Local Pauli-basis scheme on `n` qubits: every tensor product of the
/// single-qubit unitaries, measured in the computational basis.
pub fn pauli_scheme(n: usize) -> Result<ShadowScheme> {
    if n == 0 || n > 4 {
        return Err(Error::Domain(format!("pauli scheme supports 1..=4 qubits, got {n}")));
    }
    let local = single_qubit_pauli_unitaries();
    let mut products: Vec<Vec<DenseOperator>> = vec![vec![]];
    for _ in 0..n {
        products = products
            .into_iter()
            .flat_map(|p| {
                local.iter().map(move |u| {
                    let mut q = p.clone();
                    q.push(u.clone());
                    q
                })
            })
            .collect();
    }
    let unitaries = products.iter().map(|p| tensor_all(p)).collect::<Result<Vec<_>>>()?;
    shadow_channel(&unitaries, &computational_pvm(1 << n))
}

impl ShadowScheme {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unitaries(&self) -> &[DenseOperator] {
        &self.unitaries
    }

    pub fn pvm(&self) -> &[DenseOperator] {
        &self.pvm
    }

    /// Superoperator of `M` in the row-stacking basis.
    pub fn superoperator(&self) -> &CMatrix {
        &self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_complete(&self) -> bool {
        self.m_inv.is_some()
    }

    /// `M(A)`.
    pub fn apply(&self, a: &DenseOperator) -> DenseOperator {
        let v = &self.m * vectorize(a.matrix());
        DenseOperator::from_matrix_unchecked(devectorize(&v, self.dim, self.dim).expect("square"))
    }

    /// `M⁻¹(A)`; refuses when the scheme is not tomographically complete.
    pub fn invert(&self, a: &DenseOperator) -> Result<DenseOperator> {
        let inv = self.m_inv.as_ref().ok_or(Error::IncompleteScheme)?;
        let v = inv * vectorize(a.matrix());
        Ok(DenseOperator::from_matrix_unchecked(devectorize(&v, self.dim, self.dim)?))
    }

    /// Snapshot `U* Π_λ U`.
    pub fn snapshot(&self, u: usize, outcome: usize) -> DenseOperator {
        let uu = &self.unitaries[u];
        &(&uu.adjoint() * &self.pvm[outcome]) * uu
    }

    /// Born probabilities of every outcome after conjugating by `U`.
    pub fn outcome_probabilities(&self, state: &State, u: usize) -> Vec<f64> {
        (0..self.pvm.len())
            .map(|l| state.density().hs_inner(&self.snapshot(u, l)).re.max(0.0))
            .collect()
    }

    fn check_state(&self, state: &State) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: state.dim(),
            });
        }
        Ok(())
    }

    /// `M⁻¹(Q)` for every `(U, λ)` pair, indexed `[u][λ]`.
    fn all_shadows(&self) -> Result<Vec<Vec<DenseOperator>>> {
        (0..self.unitaries.len())
            .map(|u| (0..self.pvm.len()).map(|l| self.invert(&self.snapshot(u, l))).collect())
            .collect()
    }
}

/// Shadows of `shots` independent randomized measurements.
pub fn sample_shadows(scheme: &ShadowScheme, state: &State, shots: usize, seed: u64) -> Result<Vec<DenseOperator>> {
    scheme.check_state(state)?;
    if shots == 0 {
        return Err(Error::Empty("at least one shot is required".into()));
    }
    let table = scheme.all_shadows()?;
    let born = (0..scheme.unitaries.len())
        .map(|u| {
            WeightedIndex::new(scheme.outcome_probabilities(state, u))
                .map_err(|e| Error::Domain(format!("Born weights: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots)
        .map(|_| {
            let u = rng.random_range(0..scheme.unitaries.len());
            let l = born[u].sample(&mut rng);
            table[u][l].clone()
        })
        .collect())
}

/// `Σ_{U,λ} p(U,λ) M⁻¹(Q_{U,λ})` computed exactly; equals `ϖ`.
pub fn exact_shadow_mean(scheme: &ShadowScheme, state: &State) -> Result<DenseOperator> {
    scheme.check_state(state)?;
    let table = scheme.all_shadows()?;
    let weight = 1.0 / scheme.unitaries.len() as f64;
    let mut acc = DenseOperator::zeros(scheme.dim);
    for (u, row) in table.iter().enumerate() {
        for (p, shadow) in scheme.outcome_probabilities(state, u).iter().zip(row) {
            acc = acc + shadow.scale_real(weight * p);
        }
    }
    Ok(acc)
}

/// Median over `batches` contiguous batch means of `Re tr(shadow · A)`, for
/// each observable.
pub fn estimate(shadows: &[DenseOperator], observables: &[DenseOperator], batches: usize) -> Result<Vec<f64>> {
    if shadows.is_empty() {
        return Err(Error::Empty("no shadows".into()));
    }
    if observables.is_empty() {
        return Err(Error::Empty("no observables".into()));
    }
    if batches == 0 || batches > shadows.len() {
        return Err(Error::Domain(format!(
            "batch count {batches} must lie in 1..={}",
            shadows.len()
        )));
    }
    let n = shadows.len();
    observables
        .iter()
        .map(|a| {
            let values: Vec<f64> = shadows
                .iter()
                .map(|s| {
                    if s.dim() != a.dim() {
                        Err(Error::DimensionMismatch {
                            expected: s.dim(),
                            found: a.dim(),
                        })
                    } else {
                        Ok(s.hs_inner(&a.adjoint()).re)
                    }
                })
                .collect::<Result<_>>()?;
            let mut means: Vec<f64> = (0..batches)
                .map(|b| {
                    let (lo, hi) = (b * n / batches, (b + 1) * n / batches);
                    values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
                })
                .collect();
            means.sort_by(f64::total_cmp);
            let mid = means.len() / 2;
            Ok(if means.len() % 2 == 1 {
                means[mid]
            } else {
                0.5 * (means[mid - 1] + means[mid])
            })
        })
        .collect()
}

/// Shadow norm `‖A‖²_shadow = max_κ E_{U,λ|κ}[tr(M⁻¹(A) Q_{U,λ})²]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShadowNorm {
    /// Best value over the sampled pure states.
    pub sampled: f64,
    pub samples: usize,
    /// Largest eigenvalue of `|𝒢|⁻¹ Σ tr(M⁻¹(A) Q)² Q`; the expectation is
    /// linear in `κ`, so this is the maximum over all states.
    pub exact: f64,
}

pub fn shadow_norm(scheme: &ShadowScheme, a: &DenseOperator, samples: usize, seed: u64) -> Result<ShadowNorm> {
    let inv_a = scheme.invert(a)?;
    let weight = 1.0 / scheme.unitaries.len() as f64;
    let mut kernel = DenseOperator::zeros(scheme.dim);
    for u in 0..scheme.unitaries.len() {
        for l in 0..scheme.pvm.len() {
            let q = scheme.snapshot(u, l);
            let f = inv_a.hs_inner(&q.adjoint()).re;
            kernel = kernel + q.scale_real(weight * f * f);
        }
    }
    let kernel = kernel.hermitian_part();
    let (values, _) = dense::eigh(&kernel);
    let exact = values.last().copied().unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled = (0..samples)
        .map(|_| random_pure_density(&mut rng, scheme.dim).hs_inner(&kernel).re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ShadowNorm {
        sampled,
        samples,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::{bell_state, tensor};
    use crate::random::random_density;
    use crate::states::sigma_dense;

    fn z() -> DenseOperator {
        sigma_dense([0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn single_qubit_channel_closed_form() {
        let scheme = pauli_scheme(1).unwrap();
        assert!(scheme.is_complete());
        // independent oracle: average the six snapshots symbolically as
        // (I + r·σ)/2 over the six Pauli eigenstates
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 2);
            let expected = rho.scale_real(1.0 / 3.0) + DenseOperator::identity(2).scale(rho.trace() / 3.0);
            assert!(scheme.apply(&rho).distance(&expected) < 1e-10);
        }
    }

    #[test]
    fn snapshots_are_pure_states() {
        let scheme = pauli_scheme(1).unwrap();
        for u in 0..6 {
            for l in 0..2 {
                let q = scheme.snapshot(u, l);
                assert!(State::new(q.clone()).is_ok());
                assert_eq!(q.rank(1e-10), 1);
            }
        }
    }

    #[test]
    fn trivial_group_is_pinching() {
        let scheme = shadow_channel(&[DenseOperator::identity(2)], &computational_pvm(2)).unwrap();
        assert!(!scheme.is_complete());
        assert_eq!(scheme.rank(), 2);
        let rho = DenseOperator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let pinched = DenseOperator::identity(2).scale_real(0.5);
        assert!(scheme.apply(&rho).distance(&pinched) < 1e-12);
        assert!(matches!(scheme.invert(&rho), Err(Error::IncompleteScheme)));
        let s = State::new(rho).unwrap();
        assert!(matches!(sample_shadows(&scheme, &s, 10, 0), Err(Error::IncompleteScheme)));
    }

    #[test]
    fn channel_is_cptp() {
        for scheme in [pauli_scheme(1).unwrap(), pauli_scheme(2).unwrap()] {
            let d = scheme.dim();
            let j = crate::channels::choi_of_superoperator(scheme.superoperator(), d, d).unwrap();
            assert!(j.is_cp() && j.is_trace_preserving());
        }
    }

    #[test]
    fn inverse_on_hermitian_space() {
        let scheme = pauli_scheme(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = crate::random::random_hermitian(&mut rng, 4);
            assert!(scheme.invert(&scheme.apply(&a)).unwrap().distance(&a) < 1e-8);
        }
    }

    #[test]
    fn exact_unbiasedness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let one = pauli_scheme(1).unwrap();
        let two = pauli_scheme(2).unwrap();
        for _ in 0..5 {
            let s = State::new(random_density(&mut rng, 2)).unwrap();
            assert!(exact_shadow_mean(&one, &s).unwrap().distance(s.density()) < 1e-10);
            let s = State::new(random_density(&mut rng, 4)).unwrap();
            assert!(exact_shadow_mean(&two, &s).unwrap().distance(s.density()) < 1e-10);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let scheme = pauli_scheme(1).unwrap();
        let s = State::fiducial(0).unwrap();
        let a = sample_shadows(&scheme, &s, 100, 9).unwrap();
        let b = sample_shadows(&scheme, &s, 100, 9).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x == y));
    }

    #[test]
    fn shadow_mean_converges() {
        let scheme = pauli_scheme(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = State::new(random_density(&mut rng, 2)).unwrap();
        let shadows = sample_shadows(&scheme, &s, 50_000, 11).unwrap();
        let mean = shadows
            .iter()
            .fold(DenseOperator::zeros(2), |acc, x| acc + x)
            .scale_real(1.0 / shadows.len() as f64);
        assert!(mean.trace_distance(s.density()) < 0.02);
    }

    #[test]
    fn estimates() {
        let scheme = pauli_scheme(1).unwrap();
        let s = State::fiducial(0).unwrap();
        let shadows = sample_shadows(&scheme, &s, 10_000, 7).unwrap();
        let est = estimate(&shadows, &[z(), DenseOperator::identity(2)], 10).unwrap();
        assert!((est[0] - 1.0).abs() < 0.1);
        assert!((est[1] - 1.0).abs() < 1e-12);

        let two = pauli_scheme(2).unwrap();
        let bell = bell_state().unwrap();
        let shadows = sample_shadows(&two, &bell, 50_000, 7).unwrap();
        let zz = tensor(&z(), &z()).unwrap();
        let est = estimate(&shadows, &[zz], 10).unwrap();
        assert!((est[0] - 1.0).abs() < 0.15);
    }

    #[test]
    fn estimate_errors() {
        assert!(matches!(estimate(&[], &[z()], 1), Err(Error::Empty(_))));
        let one = [z()];
        assert!(estimate(&one, &[z()], 2).is_err());
        assert!(estimate(&one, &[z()], 0).is_err());
    }

    #[test]
    fn error_shrinks_with_shots() {
        let scheme = pauli_scheme(1).unwrap();
        let s = State::fiducial(0).unwrap();
        let errs: Vec<f64> = [1_000, 10_000, 100_000]
            .iter()
            .map(|&shots| {
                // average over seeds to smooth out single-run luck
                (0..5)
                    .map(|seed| {
                        let sh = sample_shadows(&scheme, &s, shots, 100 + seed).unwrap();
                        (estimate(&sh, &[z()], 10).unwrap()[0] - 1.0).abs()
                    })
                    .sum::<f64>()
                    / 5.0
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    }

    #[test]
    fn shadow_norm_bounds() {
        let scheme = pauli_scheme(1).unwrap();
        let norm = shadow_norm(&scheme, &z(), 500, 3).unwrap();
        // single-qubit Pauli observables have squared shadow norm 3
        assert!((norm.exact - 3.0).abs() < 1e-10);
        assert!(norm.sampled <= norm.exact + 1e-12);
        assert!(norm.sampled > 0.9 * norm.exact);
    }

    #[test]
    fn invalid_schemes() {
        let bad = DenseOperator::identity(2).scale_real(2.0);
        assert!(shadow_channel(&[bad], &computational_pvm(2)).is_err());
        let half = vec![DenseOperator::matrix_unit(2, 0, 0)];
        assert!(shadow_channel(&[DenseOperator::identity(2)], &half).is_err());
        assert!(pauli_scheme(5).is_err());
    }
}
