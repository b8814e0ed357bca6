//! End-to-end acceptance checks. Each test prints one PASS/FAIL line
//! straight to stderr, so the lines show up even under output capture.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use common::*;
use num_complex::Complex64;
use symflow::circuit::{basis_state, random_product_state, random_theta as seeded_theta, CircuitSpec, CostSpec, GateSpec, Side};
use symflow::estimators::{self, AncillaVariant};
use symflow::liealg::{self, Subspace};
use symflow::natgrad::{self, Method, OptSettings};
use symflow::nummat::{self, ComplexMatrix, ComplexVector, I};
use symflow::pauli::PauliSum;
use symflow::symgrad;
use symflow::tangent::{self, Action, BasisKind, SymmetrySpec, TangentSpan};

type Outcome = Result<String, String>;

fn report(name: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("criterion {name}: PASS ({detail})\n"),
        Err(why) => format!("criterion {name}: FAIL ({why})\n"),
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(why) = outcome {
        panic!("criterion {name} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn span(d: usize, elems: &[&str]) -> Subspace {
    let ms: Vec<ComplexMatrix> = elems.iter().map(|s| skew(s)).collect();
    Subspace::span_canonical(d, &ms).unwrap()
}

fn check_span(name: &str, got: &Subspace, want: &Subspace, tol: f64) -> Result<(), String> {
    ensure(got.dim() == want.dim(), || format!("{name}: dim {} != {}", got.dim(), want.dim()))?;
    let dist = got.projector_distance(want);
    ensure(dist < tol, || format!("{name}: projector distance {dist:.2e}"))
}

fn algebra_decompositions() -> Outcome {
    let start = Instant::now();
    type Case<'a> = (Subspace, [usize; 4], [Vec<&'a str>; 4]);
    let cases: Vec<Case> = vec![
        (
            span(2, &["Z"]),
            [2, 1, 1, 0],
            [vec!["X", "Y"], vec!["I"], vec!["Z"], vec![]],
        ),
        (
            span(2, &["I"]),
            [0, 3, 1, 0],
            [vec![], vec!["X", "Y", "Z"], vec!["I"], vec![]],
        ),
        (
            Subspace::from_elements(4, &[skew("XI + IX"), skew("YI + IY"), skew("ZI + IZ")]).unwrap(),
            [11, 2, 0, 3],
            [
                vec![
                    "XI - IX", "YI - IY", "ZI - IZ", "XY", "YX", "XZ", "ZX", "YZ", "ZY", "XX - YY",
                    "XX + YY - 2*ZZ",
                ],
                vec!["II", "XX + YY + ZZ"],
                vec![],
                vec!["XI + IX", "YI + IY", "ZI + IZ"],
            ],
        ),
    ];
    for (t, dims, spans) in &cases {
        let dec = liealg::four_decomposition(t).map_err(|e| e.to_string())?;
        ensure(dec.dims() == *dims, || format!("dims {:?} != {:?}", dec.dims(), dims))?;
        let d = t.d();
        let pieces = [&dec.rest, &dec.commutant_reduced, &dec.center, &dec.t_reduced];
        for (k, (got, want)) in pieces.iter().zip(spans.iter()).enumerate() {
            let want = span(d, want);
            check_span(&format!("piece {k}"), got, &want, 1e-10)?;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, || format!("runtime {elapsed:.3}s"))?;
    Ok(format!("3 decompositions, {elapsed:.3}s"))
}

#[test]
fn criterion_1_algebra_decompositions() {
    report("1 algebra decompositions", algebra_decompositions());
}

fn gate_level_derivatives() -> Outcome {
    let c = single_qubit_circuit();
    let sym_z = SymmetrySpec::from_pauli_strings(1, &["Z"], Action::Theta).unwrap();
    let sym_phase = SymmetrySpec::from_pauli_strings(1, &["I"], Action::Theta).unwrap();
    let (x, y, z) = (herm("X"), herm("Y"), herm("Z"));
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let theta = random_theta(&mut r, 3);
        let u = c.unitary(&theta).unwrap();
        let (s1, c1) = theta[0].sin_cos();
        let zero = ComplexMatrix::zeros(2, 2);
        let expected_e = [zero.clone(), &u * &z * (I * (-s1 / 2.0)), &u * I];
        let expected_d = [&u * &y * (I * -0.5), &u * &x * (I * (-c1 / 2.0)), &u * I];
        for j in 0..3 {
            let e = symgrad::equivariant_derivative_unitary(&c, &theta, j, &sym_z).unwrap();
            let d = symgrad::covariant_derivative_unitary(&c, &theta, j, &sym_z).unwrap();
            worst = worst.max(max_abs(&(e - &expected_e[j]))).max(max_abs(&(d - &expected_d[j])));
            // Global phases: everything is equivariant, the phase parameter is projected away.
            let partial = &u * c.effective_generator(&theta, j, Side::Right).unwrap();
            let e_phase = symgrad::equivariant_derivative_unitary(&c, &theta, j, &sym_phase).unwrap();
            worst = worst.max(max_abs(&(e_phase - &partial)));
        }
        let d3 = symgrad::covariant_derivative_unitary(&c, &theta, 2, &sym_phase).unwrap();
        worst = worst.max(max_abs(&d3));
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("100 points, max deviation {worst:.1e}"))
}

#[test]
fn criterion_2_gate_level_derivatives() {
    report("2 gate-level derivatives", gate_level_derivatives());
}

fn state_span(vectors: &[ComplexVector]) -> TangentSpan {
    TangentSpan::span(vectors, vectors[0].len())
}

fn check_state_span(name: &str, got: &TangentSpan, want: Option<&TangentSpan>) -> Result<(), String> {
    match want {
        None => ensure(got.dim() == 0, || format!("{name}: expected empty, got dim {}", got.dim())),
        Some(w) => {
            ensure(got.dim() == w.dim(), || format!("{name}: dim {} != {}", got.dim(), w.dim()))?;
            let dist = got.distance(w);
            ensure(dist < 1e-8, || format!("{name}: distance {dist:.2e}"))
        }
    }
}

fn state_decompositions() -> Outcome {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let i = |v: &ComplexVector| v * I;

    // Single qubit at |+⟩, symmetry iZ acting before the circuit.
    let c = single_qubit_circuit();
    let sym = SymmetrySpec::from_pauli_strings(1, &["Z"], Action::Theta).unwrap();
    let plus = basis_state("+").unwrap();
    let minus = basis_state("-").unwrap();
    let mut r = rng(3);
    for _ in 0..5 {
        let theta = random_theta(&mut r, 3);
        let u = c.unitary(&theta).unwrap();
        let dec = tangent::state_four_decomposition(&sym, &c, &theta, &plus).map_err(|e| e.to_string())?;
        check_state_span("cov", &dec.cov, Some(&state_span(&[&u * &minus])))?;
        check_state_span("both", &dec.both, Some(&state_span(&[i(&(&u * &plus))])))?;
        check_state_span("equi", &dec.equi, Some(&state_span(&[i(&(&u * &minus))])))?;
        check_state_span("vert", &dec.vert, None)?;
    }

    // |01⟩ under the tensor-power su(2).
    let su2 = ["XI + IX", "YI + IY", "ZI + IZ"];
    let sym2 = SymmetrySpec::from_pauli_strings(2, &su2, Action::Left).unwrap();
    let id2 = CircuitSpec::new(2, 0, vec![]).unwrap();
    let k01 = basis_state("01").unwrap();
    let k10 = basis_state("10").unwrap();
    let bp = ket(&[(s2, 0.0), (0.0, 0.0), (0.0, 0.0), (s2, 0.0)]);
    let bm = ket(&[(s2, 0.0), (0.0, 0.0), (0.0, 0.0), (-s2, 0.0)]);
    let dec = tangent::state_four_decomposition(&sym2, &id2, &[], &k01).map_err(|e| e.to_string())?;
    check_state_span("|01> cov", &dec.cov, Some(&state_span(&[k10.clone(), i(&bm), bp.clone()])))?;
    check_state_span("|01> both", &dec.both, Some(&state_span(&[i(&k01), i(&k10)])))?;
    check_state_span("|01> equi", &dec.equi, None)?;
    check_state_span("|01> vert", &dec.vert, Some(&state_span(&[i(&bp), bm.clone()])))?;
    ensure(dec.residual_dim() == 0, || format!("|01> residual {}", dec.residual_dim()))?;

    // Singlet: nothing vertical, one equivariant direction.
    let singlet = ket(&[(0.0, 0.0), (s2, 0.0), (-s2, 0.0), (0.0, 0.0)]);
    let dec = tangent::state_four_decomposition(&sym2, &id2, &[], &singlet).map_err(|e| e.to_string())?;
    ensure(dec.dims() == [6, 1, 0, 0], || format!("singlet dims {:?}", dec.dims()))?;
    check_state_span("singlet both", &dec.both, Some(&state_span(&[i(&singlet)])))?;

    // Induced splits of u(d).
    let id1 = CircuitSpec::new(1, 0, vec![]).unwrap();
    let sym_z = SymmetrySpec::from_pauli_strings(1, &["Z"], Action::Left).unwrap();
    let (par, perp) =
        tangent::induced_algebra_split(&sym_z, &id1, &[], &basis_state("0").unwrap()).map_err(|e| e.to_string())?;
    check_span("|0> u_perp", &perp, &span(2, &["I", "Z"]), 1e-8)?;
    check_span("|0> u_par", &par, &span(2, &["X", "Y"]), 1e-8)?;
    let (_, perp) = tangent::induced_algebra_split(&sym2, &id2, &[], &k01).map_err(|e| e.to_string())?;
    check_span("|01> u_perp", &perp, &span(4, &["XI + IX", "YI + IY"]), 1e-8)?;
    let (par, perp) = tangent::induced_algebra_split(&sym2, &id2, &[], &singlet).map_err(|e| e.to_string())?;
    ensure(perp.dim() == 0 && par.dim() == 16, || {
        format!("singlet split dims ({}, {})", par.dim(), perp.dim())
    })?;
    Ok("three state splits and three induced splits".into())
}

#[test]
fn criterion_3_state_decompositions() {
    report("3 state tangent decompositions", state_decompositions());
}

/// Closed-form vector potential of the entangling circuit in terms of the
/// single-qubit expectations before the controlled rotation.
fn closed_form_potential(theta: &[f64], q0: &ComplexVector, q1: &ComplexVector) -> [[f64; 3]; 3] {
    let ry = |t: f64, v: &ComplexVector| {
        let (s, c) = (t / 2.0).sin_cos();
        ComplexVector::from_vec(vec![v[0] * c - v[1] * s, v[0] * s + v[1] * c])
    };
    let a = ry(theta[0], q0);
    let b = ry(theta[1], q1);
    let (x1, y1, z1) = (qubit_expect(&a, "X"), qubit_expect(&a, "Y"), qubit_expect(&a, "Z"));
    let (y2, z2) = (qubit_expect(&b, "Y"), qubit_expect(&b, "Z"));
    let p0 = (1.0 + z2) / 2.0;
    let p1 = (1.0 - z2) / 2.0;
    let (s3, c3) = theta[2].sin_cos();
    let (sh, ch) = (theta[2] / 2.0).sin_cos();
    let m = [
        [0.0, x1 * y2, p1],
        [p0 + c3 * p1, ch * (ch * y1 - sh * z1) * y2, 0.0],
        [s3 * p1, ch * (ch * z1 + sh * y1) * y2, 0.0],
    ];
    m.map(|row| row.map(|v| -0.5 * v))
}

fn split_product(psi: &ComplexVector) -> (ComplexVector, ComplexVector) {
    // psi = a ⊗ b with qubit 0 the most significant index bit.
    let k = (0..4).max_by(|&i, &j| psi[i].norm().total_cmp(&psi[j].norm())).unwrap();
    let (i0, j0) = (k >> 1, k & 1);
    let a = ComplexVector::from_vec(vec![psi[j0], psi[2 + j0]]);
    let b = ComplexVector::from_vec(vec![psi[i0 * 2], psi[i0 * 2 + 1]]);
    let na = a.norm();
    let nb = b.norm();
    (a / Complex64::new(na, 0.0), b / Complex64::new(nb, 0.0))
}

fn vector_potential() -> Outcome {
    let c = entangling_circuit();
    let sym = SymmetrySpec::from_pauli_strings(2, &["XI", "YI", "ZI"], Action::Left).unwrap();
    let cost = CostSpec::SumOfSquares(["XI", "YI", "ZI"].iter().map(|s| PauliSum::parse(s).unwrap()).collect());
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let psi0 = random_product_state(2, 100 + k);
        let (q0, q1) = split_product(&psi0);
        let mut theta = random_theta(&mut r, 3);
        if k % 5 == 0 {
            theta[2] = PI;
        }
        let rep = symgrad::covariant_derivative_cost(&sym, &c, &theta, &psi0, &cost).map_err(|e| e.to_string())?;
        let want = closed_form_potential(&theta, &q0, &q1);
        for (a, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                worst = worst.max((rep.vector_potential[(a, j)] - w).abs());
            }
        }
        if k % 5 == 0 {
            let a = &rep.vector_potential;
            let zeros = [(0, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)];
            for (i, j) in zeros {
                ensure(a[(i, j)].abs() < 1e-10, || format!("theta3 = pi: A[{i}][{j}] = {:.2e}", a[(i, j)]))?;
            }
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("50 points, max deviation {worst:.1e}"))
}

#[test]
fn criterion_4_vector_potential() {
    report("4 vector potential", vector_potential());
}

fn entangling_demo() -> Outcome {
    let start = Instant::now();
    let c = entangling_circuit();
    let sym = SymmetrySpec::from_pauli_strings(2, &["XI", "YI", "ZI"], Action::Left).unwrap();
    let cost = CostSpec::SumOfSquares(["XI", "YI", "ZI"].iter().map(|s| PauliSum::parse(s).unwrap()).collect());
    let settings = OptSettings { method: Method::Gd, lr: 0.5, max_iter: 2000, tol: 1e-9 };
    let x1 = PauliSum::parse("XI").unwrap();
    let z2 = PauliSum::parse("IZ").unwrap();
    let mut iters = Vec::new();
    for seed in 0..10u64 {
        let psi0 = random_product_state(2, seed);
        let theta0 = seeded_theta(3, seed);
        let trace = natgrad::optimize(&settings, Some(&sym), &c, &theta0, &psi0, &cost, None)
            .map_err(|e| e.to_string())?;
        let last = trace.last().unwrap();
        ensure(last.cost < 1e-8, || format!("seed {seed}: final cost {:.2e}", last.cost))?;
        let t3 = last.theta[2].rem_euclid(2.0 * PI);
        ensure((t3 - PI).abs() < 1e-3, || format!("seed {seed}: theta3 = {t3}"))?;
        let mut pre = psi0.clone();
        c.apply_gates(&last.theta, &mut pre, 0..2);
        let (ex, ez) = (x1.expectation(&pre).re, z2.expectation(&pre).re);
        ensure(ex.abs() < 1e-4 && ez.abs() < 1e-4, || format!("seed {seed}: <X1> = {ex:.2e}, <Z2> = {ez:.2e}"))?;
        let a = symgrad::covariant_derivative_cost(&sym, &c, &last.theta, &psi0, &cost)
            .map_err(|e| e.to_string())?
            .vector_potential;
        for i in 0..3 {
            for j in 0..3 {
                let want = if (i, j) == (0, 2) { -0.25 } else { 0.0 };
                ensure((a[(i, j)] - want).abs() < 1e-6, || format!("seed {seed}: A[{i}][{j}] = {}", a[(i, j)]))?;
            }
        }
        iters.push(last.iter);
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 10.0, || format!("runtime {elapsed:.2}s"))?;
    Ok(format!("10 seeds, iterations {iters:?}, {elapsed:.2}s"))
}

#[test]
fn criterion_5_entangling_demo() {
    report("5 entangling demo", entangling_demo());
}

fn qng_equivalence() -> Outcome {
    let mut r = rng(6);
    let mut worst_metric: f64 = 0.0;
    let mut worst_step: f64 = 0.0;
    for k in 0..20 {
        let n = 1 + k % 3;
        let p = 1 + (k * 7) % 6;
        let c = random_circuit(&mut r, n, p);
        let theta = random_theta(&mut r, p);
        let psi0 = random_state(&mut r, n);
        let ident = "I".repeat(n);
        let sym = SymmetrySpec::from_pauli_strings(n, &[ident.as_str()], Action::Left).unwrap();
        let f = natgrad::fubini_study(&c, &theta, &psi0).unwrap().entries;
        let fs = natgrad::covariant_metric(&sym, &c, &theta, &psi0).unwrap().entries;
        worst_metric = worst_metric.max(nummat::max_abs_real(&(f - fs)));
        let cost = CostSpec::Observable(random_hermitian(&mut r, n, 3));
        let a = natgrad::qng_step(&c, &theta, &psi0, &cost, 0.1).unwrap();
        let b = natgrad::cqng_step(&sym, &c, &theta, &psi0, &cost, 0.1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            worst_step = worst_step.max((x - y).abs());
        }
    }
    ensure(worst_metric < 1e-12, || format!("metric deviation {worst_metric:.2e}"))?;
    ensure(worst_step < 1e-12, || format!("step deviation {worst_step:.2e}"))?;
    Ok(format!("20 circuits, metric {worst_metric:.1e}, step {worst_step:.1e}"))
}

#[test]
fn criterion_6_qng_equivalence() {
    report("6 QNG equivalence", qng_equivalence());
}

fn estimator_equivalence() -> Outcome {
    let mut r = rng(7);
    let mut cases = 0;
    let mut worst_omega: f64 = 0.0;
    let mut worst_m: f64 = 0.0;
    let mut k = 0u64;
    while cases < 240 {
        k += 1;
        let n = 1 + (k as usize) % 3;
        let p = 1 + (k as usize * 3) % 5;
        let c = random_circuit(&mut r, n, p);
        let theta = random_theta(&mut r, p);
        let psi0 = random_state(&mut r, n);
        let terms = 1 + (k as usize) % 3;
        let z = random_skew(&mut r, n, terms);
        for action in [Action::Theta, Action::Left] {
            let sub = Subspace::from_elements(1 << n, std::slice::from_ref(&z)).unwrap();
            let zb = sub.basis()[0].clone();
            let sym = SymmetrySpec::new(sub, action).unwrap();
            let omega = symgrad::overlap_omega(&sym, &c, &theta, &psi0, BasisKind::Vertical).unwrap();
            let variant = if k.is_multiple_of(2) { AncillaVariant::Standard } else { AncillaVariant::RoleExchange };
            for j in 0..p {
                let est = estimators::hadamard_omega(&c, &theta, j, &zb, &psi0, action, variant)
                    .map_err(|e| e.to_string())?;
                worst_omega = worst_omega.max((est - omega[(0, j)]).abs());
                cases += 1;
            }
            let m_obs = random_hermitian(&mut r, n, 2);
            let m = symgrad::symmetry_derivative(&sym, &c, &theta, &psi0, &m_obs, BasisKind::Vertical).unwrap();
            let fd = estimators::insertion_m(&c, &theta, &psi0, &m_obs, &zb, action, 1e-5).unwrap();
            worst_m = worst_m.max((fd - m[0]).abs());
        }
    }
    ensure(worst_omega < 1e-10, || format!("omega deviation {worst_omega:.2e}"))?;
    ensure(worst_m < 1e-6, || format!("m deviation {worst_m:.2e}"))?;
    Ok(format!("{cases} cases, omega {worst_omega:.1e}, m {worst_m:.1e}"))
}

#[test]
fn criterion_7_estimator_equivalence() {
    report("7 estimator equivalence", estimator_equivalence());
}

fn twirl_operator_matrix(sub: &Subspace) -> nummat::RealMatrix {
    let kind = sub.algebra_basis();
    let len = kind.len();
    let mut t = nummat::RealMatrix::zeros(len, len);
    for k in 0..len {
        let image = liealg::twirl_project(&kind.element(k), sub);
        t.set_column(k, &kind.coords(&image));
    }
    t
}

/// Fixed gate applying `exp(x)` for skew-Hermitian `x` on all wires.
fn exp_gate(x: &ComplexMatrix, n: usize) -> GateSpec {
    let h = symflow::pauli::pauli_decompose(&(x * Complex64::new(0.0, -1.0))).unwrap().chop(1e-14);
    let wires: Vec<usize> = (0..n).collect();
    GateSpec::fixed(&h.to_string(), &wires, 1.0).with_scale(1.0)
}

fn property_suites() -> Outcome {
    let mut r = rng(8);
    // Twirl idempotence and commutant closure.
    let algebras = vec![
        span(2, &["Z"]),
        span(2, &["I"]),
        Subspace::from_elements(4, &[skew("XI + IX"), skew("YI + IY"), skew("ZI + IZ")]).unwrap(),
        Subspace::from_elements(4, &[skew("XI"), skew("YI"), skew("ZI")]).unwrap(),
        span(8, &["ZZI", "IZZ"]),
    ];
    let mut worst_twirl: f64 = 0.0;
    for t in &algebras {
        let comm = liealg::commutant(t);
        ensure(liealg::is_subalgebra(&comm), || "commutant is not closed".into())?;
        let tw = twirl_operator_matrix(&comm);
        worst_twirl = worst_twirl.max(nummat::max_abs_real(&(&tw * &tw - &tw)));
    }
    ensure(worst_twirl < 1e-12, || format!("twirl idempotence {worst_twirl:.2e}"))?;

    let mut worst_transport: f64 = 0.0;
    let mut worst_recon: f64 = 0.0;
    let mut worst_equiv: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for k in 0..20 {
        let n = 2 + k % 2;
        let p = 2 + k % 4;
        let c = random_circuit(&mut r, n, p);
        let theta = random_theta(&mut r, p);
        let psi0 = random_state(&mut r, n);
        let u = c.unitary(&theta).unwrap();
        for j in 0..p {
            let right = c.effective_generator(&theta, j, Side::Right).unwrap();
            let left = c.effective_generator(&theta, j, Side::Left).unwrap();
            worst_transport = worst_transport.max(max_abs(&(&u * right * u.adjoint() - left)));
            let fd = fd_state(&c, &theta, j, &psi0, 1e-5);
            let exact = c.state_partial(&theta, j, &psi0).unwrap();
            worst_fd = worst_fd.max((fd - exact).norm());
        }
        let local: Vec<String> = ["X", "Y", "Z"]
            .iter()
            .map(|l| format!("{l}{}", "I".repeat(n - 1)))
            .collect();
        let gens: Vec<&str> = local.iter().map(String::as_str).collect();
        let sym = SymmetrySpec::from_pauli_strings(n, &gens, Action::Left).unwrap();
        let obs = random_hermitian(&mut r, n, 3);
        let cost = CostSpec::Observable(obs.clone());
        let rep = symgrad::covariant_derivative_cost(&sym, &c, &theta, &psi0, &cost).unwrap();
        let recon = &rep.projected + rep.vector_potential.transpose() * &rep.m;
        worst_recon = worst_recon.max((recon - &rep.partial).amax());
        for j in 0..p {
            let fd = fd_scalar(|t| c.cost(t, &psi0, &obs).unwrap(), &theta, j, 1e-5);
            worst_fd = worst_fd.max((fd - rep.partial[j]).abs());
        }

        // Equivariance of the covariant derivative under a local symmetry
        // transformation applied after the circuit.
        let coeffs: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let x = sym.generators().basis().iter().zip(&coeffs).fold(
            ComplexMatrix::zeros(1 << n, 1 << n),
            |acc, (b, w)| acc + b * Complex64::new(*w, 0.0),
        );
        let s = nummat::expm_skew(&x, 1.0).unwrap();
        let mut gates = c.to_json_struct().gates.clone();
        gates.push(exp_gate(&x, n));
        let moved = CircuitSpec::new(n, p, gates).unwrap();
        let rate: f64 = r.random_range(-1.0..1.0);
        let frame = tangent::vertical_frame(&sym, &moved, &theta, &psi0).unwrap();
        let moved_state = moved.apply(&theta, &psi0).unwrap();
        for j in 0..p {
            let base = symgrad::covariant_derivative_state(&sym, &c, &theta, j, &psi0).unwrap();
            // A parameter-dependent transformation adds `rate · x sψ`, which is vertical.
            let raw = moved.state_partial(&theta, j, &psi0).unwrap() + &x * &moved_state * Complex64::new(rate, 0.0);
            let cov = &raw - frame.project(&raw);
            worst_equiv = worst_equiv.max((cov - &s * base).norm());
        }
    }
    ensure(worst_transport < 1e-10, || format!("transport {worst_transport:.2e}"))?;
    ensure(worst_recon < 1e-10, || format!("reconstruction {worst_recon:.2e}"))?;
    ensure(worst_equiv < 1e-10, || format!("equivariance {worst_equiv:.2e}"))?;
    ensure(worst_fd < 1e-6, || format!("finite differences {worst_fd:.2e}"))?;
    Ok(format!(
        "twirl {worst_twirl:.1e}, transport {worst_transport:.1e}, reconstruction {worst_recon:.1e}, equivariance {worst_equiv:.1e}, fd {worst_fd:.1e}"
    ))
}

use rand::Rng;

#[test]
fn criterion_8_property_suites() {
    report("8 property suites", property_suites());
}
