//! Helpers shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symflow::circuit::{CircuitSpec, GateSpec};
use symflow::nummat::{ComplexMatrix, ComplexVector, I};
use symflow::pauli::PauliSum;
use symflow::problem;

pub fn herm(s: &str) -> ComplexMatrix {
    PauliSum::parse(s).unwrap().to_matrix()
}

/// `i · h` for a Hermitian Pauli sum `h`.
pub fn skew(s: &str) -> ComplexMatrix {
    herm(s) * I
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `e^{iθ₃} R_X(θ₂) R_Y(θ₁)`.
pub fn single_qubit_circuit() -> CircuitSpec {
    CircuitSpec::new(
        1,
        3,
        vec![
            GateSpec::param("0.5*Y", &[0], 0),
            GateSpec::param("0.5*X", &[0], 1),
            GateSpec::param("-1*I", &[0], 2),
        ],
    )
    .unwrap()
}

pub fn entangling_circuit() -> CircuitSpec {
    CircuitSpec::from_json_struct(problem::entangling_circuit()).unwrap()
}

pub fn ket(amps: &[(f64, f64)]) -> ComplexVector {
    ComplexVector::from_iterator(amps.len(), amps.iter().map(|&(r, i)| Complex64::new(r, i)))
}

pub fn random_word(rng: &mut ChaCha8Rng, n: usize) -> String {
    loop {
        let w: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect();
        if w.chars().any(|c| c != 'I') {
            return w;
        }
    }
}

/// Random Hermitian Pauli sum with `terms` words on `n` qubits.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
    let mut s = PauliSum::zero(n);
    for _ in 0..terms {
        let w = random_word(rng, n);
        let coeff = rng.random_range(-1.0..1.0);
        s = s.add(&PauliSum::parse(&format!("{coeff}*{w}")).unwrap());
    }
    if s.is_empty() {
        s = PauliSum::parse(&random_word(rng, n)).unwrap();
    }
    s
}

pub fn random_skew(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> ComplexMatrix {
    random_hermitian(rng, n, terms).to_matrix() * I
}

/// Random circuit with `p` parametrized gates on 1-2 wires, interleaved
/// with a few fixed gates.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, p: usize) -> CircuitSpec {
    let mut gates = Vec::new();
    for j in 0..p {
        let k = if n > 1 && rng.random_bool(0.5) { 2 } else { 1 };
        let mut wires: Vec<usize> = Vec::new();
        while wires.len() < k {
            let w = rng.random_range(0..n);
            if !wires.contains(&w) {
                wires.push(w);
            }
        }
        let terms = rng.random_range(1..3);
        let h = random_hermitian(rng, k, terms).to_string();
        gates.push(GateSpec::param(&h, &wires, j));
        if rng.random_bool(0.3) {
            let w = rng.random_range(0..n);
            let h = random_hermitian(rng, 1, 1).to_string();
            gates.push(GateSpec::fixed(&h, &[w], rng.random_range(-3.0..3.0)));
        }
    }
    CircuitSpec::new(n, p, gates).unwrap()
}

pub fn random_theta(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    let d = 1 << n;
    let v = ComplexVector::from_iterator(
        d,
        (0..d).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    );
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Central difference of the output state in parameter `j`.
pub fn fd_state(c: &CircuitSpec, theta: &[f64], j: usize, psi0: &ComplexVector, h: f64) -> ComplexVector {
    let mut tp = theta.to_vec();
    let mut tm = theta.to_vec();
    tp[j] += h;
    tm[j] -= h;
    (c.apply(&tp, psi0).unwrap() - c.apply(&tm, psi0).unwrap()) / Complex64::new(2.0 * h, 0.0)
}

/// Central difference of a scalar function of the parameters.
pub fn fd_scalar(f: impl Fn(&[f64]) -> f64, theta: &[f64], j: usize, h: f64) -> f64 {
    let mut tp = theta.to_vec();
    let mut tm = theta.to_vec();
    tp[j] += h;
    tm[j] -= h;
    (f(&tp) - f(&tm)) / (2.0 * h)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The 24 single-qubit Clifford unitaries (up to phase), generated from H and S.
pub fn clifford_group() -> Vec<ComplexMatrix> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let h = ComplexMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(s2, 0.0), Complex64::new(s2, 0.0), Complex64::new(s2, 0.0), Complex64::new(-s2, 0.0)],
    );
    let s = ComplexMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), I],
    );
    let same_up_to_phase = |a: &ComplexMatrix, b: &ComplexMatrix| (a.adjoint() * b).trace().norm() > 2.0 - 1e-9;
    let mut group = vec![ComplexMatrix::identity(2, 2)];
    let mut k = 0;
    while k < group.len() {
        for g in [&h, &s] {
            let next = g * &group[k];
            if !group.iter().any(|x| same_up_to_phase(x, &next)) {
                group.push(next);
            }
        }
        k += 1;
    }
    group
}

/// Single-qubit expectation `<v| P |v>` for a 2-vector.
pub fn qubit_expect(v: &ComplexVector, p: &str) -> f64 {
    (v.dotc(&(herm(p) * v))).re
}
