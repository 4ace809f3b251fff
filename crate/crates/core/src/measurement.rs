//! Projective measurement: Born probabilities, Lüders updates, post-selected
//! partial measurement and the Robertson–Schrödinger bound.

use serde::Serialize;

use crate::composite::{embed_split, partial_trace, FactorLayout};
use crate::dense::{eig_hermitian, DenseOperator, MatrixJson, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::states::State;

/// Outcomes below this probability are never post-selected.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Two post-selected states closer than this (Frobenius) are identified.
pub const SQUARE_TOL: f64 = 1e-9;

/// Eigenvalues within this distance of a requested outcome match it.
const OUTCOME_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: f64,
    pub probability: f64,
    /// `None` when the probability is below [`ZERO_PROBABILITY`].
    pub post_state: Option<State>,
}

#[derive(Debug, Clone)]
pub struct PvmOutcome {
    pub records: Vec<MeasurementRecord>,
    /// `Σ_λ Π_λ ϖ Π_λ`.
    pub unobserved: State,
}

fn check_observable(state: &State, lambda: &DenseOperator) -> Result<()> {
    if lambda.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: lambda.dim(),
        });
    }
    if !lambda.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Domain("observable is not Hermitian".into()));
    }
    Ok(())
}

/// `Π ϖ Π / p` with `p = tr(ϖ Π)`.
fn luders(rho: &DenseOperator, proj: &DenseOperator) -> Result<(f64, Option<State>)> {
    let p = rho.hs_inner(proj).re.clamp(0.0, 1.0);
    if p < ZERO_PROBABILITY {
        return Ok((p, None));
    }
    let post = (proj * rho * proj).scale_real(1.0 / p).hermitian_part();
    Ok((p, Some(State::new(post)?)))
}

fn with_spec_of(src: &State, s: State) -> State {
    match src.spec() {
        Some(spec) => s.clone().attach_spec(spec).unwrap_or(s),
        None => s,
    }
}

/// Born and Lüders rules for every spectral value of `Λ`, in ascending order.
pub fn pvm_measure(state: &State, lambda: &DenseOperator) -> Result<PvmOutcome> {
    check_observable(state, lambda)?;
    let spectral = eig_hermitian(lambda)?;
    let rho = state.density();
    let mut records = Vec::with_capacity(spectral.eigenvalues.len());
    let mut unobserved = DenseOperator::zeros(state.dim());
    for (&outcome, proj) in spectral.eigenvalues.iter().zip(&spectral.projectors) {
        unobserved = unobserved + proj * rho * proj;
        let (probability, post) = luders(rho, proj)?;
        records.push(MeasurementRecord {
            outcome,
            probability,
            post_state: post.map(|s| with_spec_of(state, s)),
        });
    }
    let unobserved = with_spec_of(state, State::new(unobserved.hermitian_part())?);
    Ok(PvmOutcome {
        records,
        unobserved,
    })
}

/// Projector onto the `λ` eigenspace of `Λ`.
pub fn eigenprojector(lambda: &DenseOperator, outcome: f64) -> Result<DenseOperator> {
    let spectral = eig_hermitian(lambda)?;
    spectral
        .projector_for(outcome, OUTCOME_TOL)
        .cloned()
        .ok_or_else(|| Error::Domain(format!("{outcome} is not an eigenvalue of the observable")))
}

/// Lüders update for a single outcome; errors on zero probability.
pub fn post_select(state: &State, lambda: &DenseOperator, outcome: f64) -> Result<(f64, State)> {
    check_observable(state, lambda)?;
    let proj = eigenprojector(lambda, outcome)?;
    match luders(state.density(), &proj)? {
        (p, Some(post)) => Ok((p, with_spec_of(state, post))),
        (p, None) => Err(Error::ZeroProbability(p)),
    }
}

/// Post-selected partial measurement of `Λ ← λ` on `site`.
///
/// The density is first replaced by the product of the site's marginal and
/// the marginal of its complement; the site factor is then updated by the
/// Lüders rule, so the result is `p⁻¹ Π ϖ^(ℓ) Π ⊗ ϖ^(ℓ̄)` with
/// `p = tr(ϖ^(ℓ) Π)`.
pub fn ppm_measure(
    state: &State,
    layout: &FactorLayout,
    site: usize,
    lambda: &DenseOperator,
    outcome: f64,
) -> Result<State> {
    if state.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            found: state.dim(),
        });
    }
    let rest: Vec<usize> = (0..layout.sites()).filter(|&s| s != site).collect();
    let local = partial_trace(state.density(), layout, &[site])?;
    let complement = if rest.is_empty() {
        DenseOperator::identity(1)
    } else {
        partial_trace(state.density(), layout, &rest)?
    };
    if lambda.dim() != local.dim() {
        return Err(Error::DimensionMismatch {
            expected: local.dim(),
            found: lambda.dim(),
        });
    }
    let local_state = State::new(local.hermitian_part())?;
    let (_, post) = post_select(&local_state, lambda, outcome)?;
    let out = embed_split(layout, site, post.density(), &complement)?;
    Ok(with_spec_of(state, State::new(out.hermitian_part())?))
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareReport {
    pub closes: bool,
    /// Frobenius distance between the two post-selected states.
    pub state_distance: f64,
    pub lambda_then_gamma: MatrixJson,
    pub gamma_then_lambda: MatrixJson,
}

/// Compares `Λ ← λ` then `Γ ← γ` against the opposite order.
pub fn measurement_square(
    state: &State,
    lambda: &DenseOperator,
    gamma: &DenseOperator,
    lambda_outcome: f64,
    gamma_outcome: f64,
) -> Result<SquareReport> {
    let (_, a) = post_select(state, lambda, lambda_outcome)?;
    let (_, ab) = post_select(&a, gamma, gamma_outcome)?;
    let (_, b) = post_select(state, gamma, gamma_outcome)?;
    let (_, ba) = post_select(&b, lambda, lambda_outcome)?;
    let state_distance = ab.density().distance(ba.density());
    Ok(SquareReport {
        closes: state_distance < SQUARE_TOL,
        state_distance,
        lambda_then_gamma: ab.density().to_json(),
        gamma_then_lambda: ba.density().to_json(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsBound {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `¼|π([Λ,Γ])|² + |π(Λ∘Γ) − π(Λ)π(Γ)|² ≤ var(Λ)·var(Γ)`.
pub fn rs_bound(state: &State, lambda: &DenseOperator, gamma: &DenseOperator) -> Result<RsBound> {
    check_observable(state, lambda)?;
    check_observable(state, gamma)?;
    let comm = state.expect(&lambda.commutator(gamma))?;
    let cov = state.expect(&lambda.jordan(gamma))? - state.expect(lambda)? * state.expect(gamma)?;
    let lhs = 0.25 * comm.norm_sqr() + cov.norm_sqr();
    let rhs = state.variance(lambda)? * state.variance(gamma)?;
    Ok(RsBound {
        lhs,
        rhs,
        satisfied: lhs <= rhs + 1e-10,
    })
}
