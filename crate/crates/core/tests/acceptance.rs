//! Acceptance harness: one PASS/FAIL line per criterion. Oracles are written
//! here from explicit matrices and closed forms, independent of the library
//! routine under test.

use std::f64::consts::PI;
use std::process::ExitCode;

use nalgebra::DMatrix;
use num_complex::Complex64;
use opworkbench::channels::{
    apply_operation, choi_of, choi_of_superoperator, stinespring_dilate, transpose_superoperator, KrausSet,
};
use opworkbench::cli::{run_command, VERSION};
use opworkbench::composite::{bell_state, is_product_state, reduced_state, span_dim, FactorLayout};
use opworkbench::dense::{min_eigenvalue, DenseOperator};
use opworkbench::expr::{evaluate, parse_expr};
use opworkbench::gns::gns_construct;
use opworkbench::measurement::{measurement_square, rs_bound};
use opworkbench::pauli::{pauli_triple, sigma_of_vector, AlgebraSpec, OperatorSum, PauliWord};
use opworkbench::random::{random_density, random_hermitian, random_kraus, random_matrix, random_unit_vector};
use opworkbench::shadows::{pauli_scheme, sample_shadows, estimate};
use opworkbench::stabilizer::{
    build_code, character_of, character_on, coherent_repetition, distance_search, kl_check, recovery_map,
    weight_one_errors, Distance, CODE_NAMES,
};
use opworkbench::states::{pauli_exponential, State};
use proptest::test_runner::{Config, TestRunner};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

fn proptest_runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q(n: usize) -> AlgebraSpec {
    AlgebraSpec::qubits(n).unwrap()
}

fn w(s: &str) -> PauliWord {
    PauliWord::from_letters(s).unwrap()
}

fn m2(a: [[Complex64; 2]; 2]) -> DenseOperator {
    DenseOperator::from_rows(&[&a[0], &a[1]])
}

/// Textbook Pauli matrices.
fn oracle_paulis() -> [DenseOperator; 3] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [m2([[o, l], [l, o]]), m2([[o, -i], [i, o]]), m2([[l, o], [o, -l]])]
}

fn id(d: usize) -> DenseOperator {
    DenseOperator::identity(d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn criterion_1() -> Outcome {
    let s = pauli_triple(q(1), 0).map_err(|e| e.to_string())?;
    let dense = oracle_paulis();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut expected = OperatorSum::zero(q(1));
            if i == j {
                expected = OperatorSum::identity(q(1));
            }
            for k in 0..3 {
                let eps = levi_civita(i, j, k);
                if eps != 0.0 {
                    expected = expected.add(&s[k].to_sum().scale(c(0.0, eps))).unwrap();
                }
            }
            let product = s[i].to_sum().mul(&s[j].to_sum()).unwrap();
            ensure(product == expected, || format!("symbolic σ{}σ{} = {product}", i + 1, j + 1))?;
            let mut oracle = if i == j { id(2) } else { DenseOperator::zeros(2) };
            for k in 0..3 {
                oracle = oracle + dense[k].scale(c(0.0, levi_civita(i, j, k)));
            }
            worst = worst.max(product.to_dense().unwrap().distance(&oracle));
            worst = worst.max((&dense[i] * &dense[j]).distance(&oracle));
        }
    }
    ensure(worst < 1e-12, || format!("dense error {worst:e}"))?;
    Ok(format!("9 pairs exact; dense error {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = random_unit_vector(&mut rng);
        let s = sigma_of_vector(n.map(|x| c(x, 0.0)), q(1)).unwrap();
        worst = worst.max(s.mul(&s).unwrap().to_dense().unwrap().distance(&id(2)));
    }
    ensure(worst < 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("100 unit vectors; max error {worst:.1e}"))
}

/// `Vᵀ`-style transport: columns `r_k|ψ⟩` turn the GNS action into an
/// ordinary matrix that must equal `A`.
fn transported_action(space: &opworkbench::gns::GnsSpace, psi: &[Complex64], a: &DenseOperator) -> DenseOperator {
    let reps = space.representatives();
    let dim = psi.len();
    let v = DMatrix::from_fn(dim, reps.len(), |r, k| {
        (0..dim).map(|j| reps[k].matrix()[(r, j)] * psi[j]).sum::<Complex64>()
    });
    let m = space.action(a).unwrap();
    let vi = v.clone().try_inverse().expect("cyclic vectors span");
    DenseOperator::new(&(&v * m.matrix()) * vi).unwrap()
}

fn criterion_3() -> Outcome {
    let state = State::fiducial(0).map_err(|e| e.to_string())?;
    let space = gns_construct(&state).map_err(|e| e.to_string())?;
    let [x, y, z] = oracle_paulis();
    let expected = [
        (&id(2) - &z).scale_real(0.5),
        (&x + &y.scale(c(0.0, 1.0))).scale_real(0.5),
    ];
    let kernel = space.kernel_basis().to_vec();
    let mut all = kernel.clone();
    all.extend(expected.iter().cloned());
    ensure(kernel.len() == 2 && span_dim(&expected) == 2 && span_dim(&all) == 2, || {
        format!("kernel dim {} does not span the expected pair", kernel.len())
    })?;
    ensure(space.dim() == 2, || format!("quotient dim {}", space.dim()))?;
    let psi = [c(1.0, 0.0), c(0.0, 0.0)];
    let ex = transported_action(&space, &psi, &x).distance(&x);
    let ez = transported_action(&space, &psi, &z).distance(&z);
    ensure(ex < 1e-10 && ez < 1e-10, || format!("action errors X {ex:e}, Z {ez:e}"))?;
    Ok(format!("kernel 2-dim as expected; quotient dim 2; action errors {:.1e}", ex.max(ez)))
}

fn criterion_4() -> Outcome {
    let z = &oracle_paulis()[2];
    let mut notes = Vec::new();
    for p in [0.0, 0.25, 0.5, 1.0] {
        let s = State::coin(p).map_err(|e| e.to_string())?;
        let var = s.variance(z).unwrap();
        let err = (var - 4.0 * p * (1.0 - p)).abs();
        ensure(err < 1e-12, || format!("p={p}: var {var}"))?;
        let dim = gns_construct(&s).unwrap().dim();
        if p > 0.0 && p < 1.0 {
            ensure(dim == 4, || format!("p={p}: GNS dim {dim}"))?;
        }
        notes.push(format!("p={p}: dim {dim}"));
    }
    Ok(format!("variance matches 4p(1-p); {}", notes.join(", ")))
}

fn criterion_5() -> Outcome {
    let [x, y, z] = oracle_paulis();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for ti in 1..12 {
        let theta = ti as f64 * PI / 12.0 + 0.013;
        for pi_ in 0..12 {
            let phi = pi_ as f64 * 2.0 * PI / 12.0;
            let n = [phi.cos(), phi.sin(), 0.0];
            let sigma_n = &x.scale_real(n[0]) + &y.scale_real(n[1]);
            // e^{-iθσ(n)} = cos θ I − i sin θ σ(n).
            let oracle_u = &id(2).scale_real(theta.cos()) - &sigma_n.scale(c(0.0, theta.sin()));
            let u = pauli_exponential(0.0, -theta, n).map_err(|e| e.to_string())?;
            worst = worst.max(u.distance(&oracle_u));
            let rotated = &(&u.adjoint() * &z) * &u;
            let r: Vec<f64> = [&x, &y, &z].iter().map(|s| 0.5 * (*s * &rotated).trace().re).collect();
            let (s2, c2) = ((2.0 * theta).sin(), (2.0 * theta).cos());
            // sin2θ·(−n₂, n₁, cot2θ), with sin2θ·cot2θ written as cos2θ.
            let expected = [-s2 * n[1], s2 * n[0], c2];
            let err = (0..3).map(|i| (r[i] - expected[i]).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(err);
            count += 1;
        }
    }
    ensure(worst < 1e-10, || format!("max vector error {worst:e}"))?;
    Ok(format!("{count} (θ, φ) grid points; max error {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let bell = bell_state().map_err(|e| e.to_string())?;
    let [_, _, z] = oracle_paulis();
    let zz = z.kron(&z).unwrap();
    let zi = z.kron(&id(2)).unwrap();
    let iz = id(2).kron(&z).unwrap();
    let e = [bell.expect(&zz).unwrap() - 1.0, bell.expect(&zi).unwrap(), bell.expect(&iz).unwrap()];
    let worst = e.iter().map(|v| v.norm()).fold(0.0, f64::max);
    ensure(worst < 1e-12, || format!("expectation errors {e:?}"))?;
    let layout = FactorLayout::qubits(2).unwrap();
    for site in 0..2 {
        let red = reduced_state(&bell, &layout, &[site]).unwrap();
        let err = red.density().distance(&id(2).scale_real(0.5));
        ensure(err < 1e-12, || format!("reduced density {site} error {err:e}"))?;
    }
    ensure(!is_product_state(&bell, &layout, 1e-10).unwrap(), || "Bell state passed as product".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..20 {
        let rho = random_density(&mut rng, 2).kron(&random_density(&mut rng, 2)).unwrap();
        let s = State::new(rho).unwrap();
        ensure(is_product_state(&s, &layout, 1e-10).unwrap(), || format!("product state {k} rejected"))?;
    }
    Ok("Bell correlations and marginals exact; factorization fails for Bell, holds for 20 products".into())
}

fn criterion_7() -> Outcome {
    let [x, _, z] = oracle_paulis();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let state = State::new(random_density(&mut rng, 4)).unwrap();
    let zi = z.kron(&id(2)).unwrap();
    let iz = id(2).kron(&z).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let sq = measurement_square(&state, &zi, &iz, a, b).map_err(|e| e.to_string())?;
        ensure(sq.closes, || format!("commuting square open at ({a}, {b})"))?;
        worst = worst.max(sq.state_distance);
    }
    let plus = State::new((&id(2) + &x).scale_real(0.5)).unwrap();
    let open = measurement_square(&plus, &z, &x, 1.0, 1.0).map_err(|e| e.to_string())?;
    ensure(!open.closes, || "square for (Z, X) on |+⟩ closed".into())?;
    let p = evaluate("0.5*(I+Z)", None).unwrap().to_dense().unwrap();
    let qq = evaluate("0.5*(I-X)", None).unwrap().to_dense().unwrap();
    let comm = p.commutator(&qq);
    let oracle = oracle_paulis()[1].scale(c(0.0, -0.5));
    let err = comm.distance(&oracle);
    ensure(err < 1e-12, || format!("projector commutator error {err:e}"))?;
    Ok(format!(
        "commuting square closes (gap {worst:.1e}); (Z, X) gap {:.3}; commutator error {err:.1e}",
        open.state_distance
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_slack = f64::INFINITY;
    for k in 0..500 {
        let dim = [2, 3, 4][k % 3];
        let s = State::new(random_density(&mut rng, dim)).unwrap();
        let (l, g) = (random_hermitian(&mut rng, dim), random_hermitian(&mut rng, dim));
        let b = rs_bound(&s, &l, &g).map_err(|e| e.to_string())?;
        // Oracle: both sides from explicit traces.
        let ev = |a: &DenseOperator| (s.density() * a).trace();
        let (el, eg) = (ev(&l), ev(&g));
        let comm = ev(&(&(&l * &g) - &(&g * &l)));
        let jordan = ev(&(&(&l * &g) + &(&g * &l)).scale_real(0.5));
        let var = |a: &DenseOperator, e: Complex64| (ev(&(a * a)) - e * e).re;
        let lhs = 0.25 * comm.norm_sqr() + (jordan - el * eg).norm_sqr();
        let rhs = var(&l, el) * var(&g, eg);
        ensure((b.lhs - lhs).abs() < 1e-9 && (b.rhs - rhs).abs() < 1e-9, || format!("triple {k} disagrees with oracle"))?;
        min_slack = min_slack.min(rhs - lhs);
    }
    ensure(min_slack >= -1e-10, || format!("min slack {min_slack:e}"))?;
    let [x, y, _] = oracle_paulis();
    let zero = State::fiducial(0).unwrap();
    let e1 = rs_bound(&zero, &x, &y).unwrap();
    ensure((e1.lhs - 1.0).abs() < 1e-12 && (e1.rhs - 1.0).abs() < 1e-12, || format!("π₀, X, Y: {e1:?}"))?;
    let s = State::new(random_density(&mut rng, 3)).unwrap();
    let l = random_hermitian(&mut rng, 3);
    let e2 = rs_bound(&s, &l, &l).unwrap();
    let var = s.variance(&l).unwrap();
    ensure((e2.lhs - var * var).abs() < 1e-10 && (e2.rhs - var * var).abs() < 1e-10, || format!("Λ=Γ: {e2:?}"))?;
    Ok(format!("500 triples, min slack {min_slack:.2e}; equality cases reproduce"))
}

fn criterion_9() -> Outcome {
    let choi = choi_of_superoperator(&transpose_superoperator(2), 2, 2).map_err(|e| e.to_string())?;
    let lam = choi.min_eigenvalue();
    ensure((lam + 1.0).abs() < 1e-10, || format!("transpose Choi min eigenvalue {lam}"))?;
    // Oracle: the transpose Choi matrix is SWAP, whose spectrum is {1, 1, 1, −1}.
    let mut swap = DenseOperator::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            swap = swap + DenseOperator::matrix_unit(4, 2 * i + j, 2 * j + i);
        }
    }
    ensure(choi.matrix().distance(&swap) < 1e-12, || "transpose Choi is not SWAP".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    for k in 0..40usize {
        let (din, dout) = (1 + k % 3, 1 + (k / 3) % 3);
        // A random isometry needs dout·count ≥ din.
        let count = (1 + k % 4).max(din.div_ceil(dout));
        let ks = KrausSet::new(din, dout, random_kraus(&mut rng, din, dout, count)).unwrap();
        worst = worst.min(min_eigenvalue(choi_of(&ks).matrix()));
    }
    ensure(worst >= -1e-10, || format!("random channel Choi eigenvalue {worst:e}"))?;
    Ok(format!("transpose Choi min eigenvalue {lam:.12}; 40 random channels, min eigenvalue {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut recon, mut iso): (f64, f64) = (0.0, 0.0);
    for k in 0..10 {
        let (din, dout, count) = (2 + k % 2, 2 + (k / 2) % 2, 1 + k % 4);
        let ks = KrausSet::new(din, dout, random_kraus(&mut rng, din, dout, count)).unwrap();
        let v = stinespring_dilate(&ks).map_err(|e| e.to_string())?;
        iso = iso.max(v.isometry_defect());
        for _ in 0..50 {
            let rho = random_density(&mut rng, din);
            // Oracle: Σ B ϖ B* with explicit matrices.
            let mut direct = DMatrix::<Complex64>::zeros(dout, dout);
            for b in ks.operators() {
                direct += b * rho.matrix() * b.adjoint();
            }
            let reduced = v.reduce(&rho).unwrap();
            recon = recon.max((reduced.matrix() - &direct).norm());
        }
    }
    ensure(recon < 1e-9 && iso < 1e-10, || format!("reconstruction {recon:e}, V*V defect {iso:e}"))?;
    Ok(format!("500 reconstructions, max error {recon:.1e}; V*V defect {iso:.1e}"))
}

fn criterion_11() -> Outcome {
    let code = build_code("five_qubit").map_err(|e| e.to_string())?;
    ensure(code.group().order() == 16, || format!("group order {}", code.group().order()))?;
    let rank = code.projector().rank(1e-10);
    ensure(rank == 2, || format!("projector rank {rank}"))?;
    let spec = q(5);
    let rows = [
        (PauliWord::x_at(spec, 0).unwrap(), vec![1, 1, -1, -1, 1]),
        (PauliWord::y_at(spec, 0).unwrap(), vec![1, -1, -1, -1, -1]),
        (PauliWord::z_at(spec, 0).unwrap(), vec![1, -1, 1, 1, -1]),
    ];
    for (e, expected) in &rows {
        let got = character_on(e, code.checks()).unwrap().signs();
        ensure(got.as_ref() == Some(expected), || format!("{}: {got:?}", e.label()))?;
        // Oracle: E S E* = χ(S) S densely.
        let ed = e.to_dense().unwrap();
        for (s, sign) in code.checks().iter().zip(expected) {
            let sd = s.to_dense().unwrap();
            let lhs = &(&ed * &sd) * &ed.adjoint();
            ensure(lhs.distance(&sd.scale_real(*sign as f64)) < 1e-12, || format!("dense sign of {} on {}", e.label(), s.label()))?;
        }
    }
    let errors: Vec<DenseOperator> = weight_one_errors(spec).unwrap().iter().map(|e| e.to_dense().unwrap()).collect();
    let kl = kl_check(&code, &errors).map_err(|e| e.to_string())?;
    let diag_min = (0..kl.nu.dim()).map(|i| kl.nu[(i, i)].re).fold(f64::INFINITY, f64::min);
    ensure(kl.pass && kl.nu_positive && diag_min > 0.0, || format!("KL pass {} ν diag min {diag_min}", kl.pass))?;
    let recovery = recovery_map(&code, &errors).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = code.projector();
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let sigma = random_density(&mut rng, 32);
        let raw = &(p * &sigma) * p;
        let rho = raw.scale_real(1.0 / raw.trace().re);
        for e in &errors {
            let damaged = State::new((&(e * &rho) * &e.adjoint()).hermitian_part()).unwrap();
            let out = apply_operation(&recovery, &damaged, None).unwrap().output;
            worst = worst.max(out.trace_distance(&rho));
        }
    }
    ensure(worst < 1e-8, || format!("recovery trace distance {worst:e}"))?;
    let d = distance_search(&code, 5).unwrap();
    ensure(d == Distance::Exact(3), || format!("distance {d:?}"))?;
    Ok(format!("order 16, rank 2, character rows exact, KL passes (ν diag min {diag_min:.3}), recovery error {worst:.1e}, distance 3"))
}

fn criterion_12() -> Outcome {
    let code = build_code("rep2").map_err(|e| e.to_string())?;
    let (xi, ix) = (character_of(&w("XI"), code.group()).unwrap(), character_of(&w("IX"), code.group()).unwrap());
    ensure(xi == ix, || "X⊗I and I⊗X have different characters".into())?;
    ensure(!xi.is_trivial(), || "X⊗I is undetected".into())?;
    let errors: Vec<DenseOperator> = weight_one_errors(q(2)).unwrap().iter().map(|e| e.to_dense().unwrap()).collect();
    let kl = kl_check(&code, &errors).map_err(|e| e.to_string())?;
    ensure(!kl.pass, || "KL unexpectedly passes".into())?;
    ensure(recovery_map(&code, &errors).is_err(), || "recovery built for an uncorrectable set".into())?;
    let d = distance_search(&code, 4).unwrap();
    ensure(d == Distance::Exact(2), || format!("distance {d:?}"))?;
    let alphabet = vec![PauliWord::x_at(q(1), 0).unwrap(), PauliWord::z_at(q(1), 0).unwrap()];
    let cx = coherent_repetition(&alphabet[0].to_sum(), &alphabet, 2).unwrap().to_dense().unwrap();
    let cz = coherent_repetition(&alphabet[1].to_sum(), &alphabet, 2).unwrap().to_dense().unwrap();
    // Oracle: XX and ZZ from Kronecker products commute.
    let [x, _, z] = oracle_paulis();
    ensure(cx.distance(&x.kron(&x).unwrap()) < 1e-12 && cz.distance(&z.kron(&z).unwrap()) < 1e-12, || "C₂ images wrong".into())?;
    let defect = (&cx * &cz).distance(&(&cz * &cx));
    ensure(defect < 1e-12, || format!("C₂[X], C₂[Z] fail to commute ({defect:e})"))?;
    Ok("shared character, KL fails, distance 2, C₂[X] and C₂[Z] commute".into())
}

fn criterion_13() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in CODE_NAMES {
        let code = build_code(name).map_err(|e| e.to_string())?;
        let p = code.projector();
        worst = worst.max((p * p).distance(p)).max(p.adjoint().distance(p));
        for s in code.group().elements() {
            worst = worst.max((&s.to_dense().unwrap() * p).distance(p));
        }
    }
    ensure(worst < 1e-10, || format!("max defect {worst:e}"))?;
    Ok(format!("{} codes, max defect {worst:.1e}", CODE_NAMES.len()))
}

fn criterion_14() -> Outcome {
    let scheme = pauli_scheme(1).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let rho = random_density(&mut rng, 2);
    // Oracle: M⁻¹(A) = 3A − tr(A)·I for the single-qubit Pauli scheme.
    let inv = |a: &DenseOperator| &a.scale_real(3.0) - &id(2).scale(a.trace());
    let g = scheme.unitaries().len() as f64;
    let mut mean = DenseOperator::zeros(2);
    for u in scheme.unitaries() {
        let rotated = &(u * &rho) * &u.adjoint();
        for proj in scheme.pvm() {
            let prob = (proj * &rotated).trace().re;
            let snap = &(&u.adjoint() * proj) * u;
            mean = mean + inv(&snap).scale_real(prob / g);
        }
    }
    let unbiased = mean.distance(&rho);
    ensure(unbiased < 1e-10, || format!("enumerated mean error {unbiased:e}"))?;
    let zero = State::fiducial(0).unwrap();
    let shadows = sample_shadows(&scheme, &zero, 10_000, 2024).unwrap();
    let est = estimate(&shadows, &[oracle_paulis()[2].clone()], 10).unwrap()[0];
    ensure((est - 1.0).abs() <= 0.1, || format!("π(Z) estimate {est}"))?;
    let mut m_err: f64 = 0.0;
    for _ in 0..10 {
        let a = random_matrix(&mut rng, 2);
        let expected = &a.scale_real(1.0 / 3.0) + &id(2).scale(a.trace() / 3.0);
        m_err = m_err.max(scheme.apply(&a).distance(&expected));
    }
    ensure(m_err < 1e-10, || format!("M error {m_err:e}"))?;
    Ok(format!("enumeration error {unbiased:.1e}; π(Z) estimate {est:.4} (seed 2024); M error {m_err:.1e}"))
}

fn criterion_15() -> Outcome {
    let mut runner = proptest_runner(200);
    runner
        .run(&common::canonical_expr(), |ast| {
            let text = ast.to_string();
            proptest::prop_assert_eq!(parse_expr(&text), Ok(ast));
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;
    let mut fuzz = proptest_runner(1000);
    fuzz.run(&proptest::collection::vec(proptest::arbitrary::any::<u8>(), 0..64), |bytes| {
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let _ = evaluate(&text, None);
        let out = run_command(["opwb", "paulimul", text.as_str()]);
        proptest::prop_assert!(matches!(out.code, 0..=2));
        Ok(())
    })
    .map_err(|e| format!("fuzz: {e}"))?;
    fuzz.run(&common::token_soup(), |text| {
        let _ = evaluate(&text, None);
        Ok(())
    })
    .map_err(|e| format!("token fuzz: {e}"))?;
    let out = run_command(["opwb", "code", "verify", "--name", "five_qubit", "--errors", "weight1"]);
    let actual = out
        .stdout
        .replacen(&format!("\"version\": \"{VERSION}\""), "\"version\": \"golden\"", 1);
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/code_verify_five_qubit.json"))
        .map_err(|e| format!("golden file: {e}"))?;
    ensure(out.code == 0 && actual == golden, || "five_qubit report differs from golden file".into())?;
    Ok("200 round trips, 2000 fuzz inputs without panic, golden report byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 15] = [
        ("Pauli relations", criterion_1),
        ("sigma(n)^2 = I", criterion_2),
        ("GNS of pi_0", criterion_3),
        ("mixed-state variance", criterion_4),
        ("Bloch rotation", criterion_5),
        ("Bell state", criterion_6),
        ("measurement square", criterion_7),
        ("Robertson-Schrodinger", criterion_8),
        ("transpose counterexample", criterion_9),
        ("Stinespring", criterion_10),
        ("five-qubit code", criterion_11),
        ("[[2,1,2]] code", criterion_12),
        ("code projector laws", criterion_13),
        ("shadows", criterion_14),
        ("parser", criterion_15),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} ({name}): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
