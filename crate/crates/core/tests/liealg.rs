mod common;

use common::{clifford_group, herm, max_abs, random_skew, rng, skew};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use symflow::liealg::{self, Subspace};
use symflow::nummat::{self, ComplexMatrix, RealMatrix, I};

/// Brute-force closure: add every commutator of the current spanning set
/// until the real rank of the flattened matrices stops growing.
fn closure_dim_oracle(gens: &[ComplexMatrix]) -> usize {
    let flat = |m: &ComplexMatrix| -> Vec<f64> { m.iter().flat_map(|z| [z.re, z.im]).collect() };
    let rank = |set: &[ComplexMatrix]| {
        let rows = set.len();
        let cols = 2 * set[0].len();
        let data: Vec<f64> = set.iter().flat_map(flat).collect();
        let m = RealMatrix::from_row_slice(rows, cols, &data);
        m.svd(false, false).rank(1e-9)
    };
    let mut set: Vec<ComplexMatrix> = gens.to_vec();
    let mut r = rank(&set);
    loop {
        let mut next = set.clone();
        for a in &set {
            for b in &set {
                let c = nummat::commutator(a, b);
                if max_abs(&c) > 1e-12 {
                    let mut trial = next.clone();
                    trial.push(c);
                    if rank(&trial) > rank(&next) {
                        next = trial;
                    }
                }
            }
        }
        let nr = rank(&next);
        if nr == r {
            return r;
        }
        set = next;
        r = nr;
    }
}

fn span(d: usize, words: &[&str]) -> Subspace {
    Subspace::span_canonical(d, &words.iter().map(|w| skew(w)).collect::<Vec<_>>()).unwrap()
}

fn tensor_su2() -> Subspace {
    span(4, &["XI + IX", "YI + IY", "ZI + IZ"])
}

fn same(a: &Subspace, b: &Subspace) -> bool {
    a.dim() == b.dim() && a.projector_distance(b) < 1e-10
}

#[test]
fn closure_examples() {
    let half = Complex64::new(-0.5, 0.0);
    let x = skew("X") * half;
    let z = skew("Z") * half;
    assert_eq!(liealg::lie_closure(2, std::slice::from_ref(&x)).unwrap().dim(), 1);
    let g = liealg::lie_closure(2, &[x.clone(), z.clone()]).unwrap();
    assert_eq!(g.dim(), 3);
    assert!(same(&g, &span(2, &["X", "Y", "Z"])));

    let gens = [skew("ZZ") * half, skew("XI") * half, skew("IX") * half];
    let oracle = closure_dim_oracle(&gens);
    assert_eq!(oracle, 6);
    assert_eq!(liealg::lie_closure(4, &gens).unwrap().dim(), oracle);
    assert_eq!(liealg::lie_closure(4, &[]).unwrap().dim(), 0);
}

#[test]
fn commutant_examples() {
    let c = liealg::commutant(&span(2, &["Z"]));
    assert!(same(&c, &span(2, &["I", "Z"])));
    let basis: Vec<String> = c.basis().iter().map(liealg_word).collect();
    assert_eq!(basis, ["I", "Z"]);

    let c = liealg::commutant(&tensor_su2());
    assert!(same(&c, &span(4, &["II", "XX + YY + ZZ"])));
    let full = Subspace::full(4).unwrap();
    assert!(same(&liealg::commutant(&full), &span(4, &["II"])));
}

fn liealg_word(x: &ComplexMatrix) -> String {
    symflow::pauli::pauli_decompose(&(x * -I)).unwrap().chop(1e-12).terms().next().unwrap().0.to_string()
}

#[test]
fn center_examples() {
    assert!(same(&liealg::center(&span(2, &["Z"])), &span(2, &["Z"])));
    assert_eq!(liealg::center(&tensor_su2()).dim(), 0);
    assert!(same(&liealg::center(&Subspace::full(2).unwrap()), &span(2, &["I"])));
}

#[test]
fn four_decomposition_examples() {
    let dec = liealg::four_decomposition(&span(2, &["Z"])).unwrap();
    assert_eq!(dec.dims(), [2, 1, 1, 0]);
    assert!(same(&dec.rest, &span(2, &["X", "Y"])));
    assert_eq!(liealg::four_decomposition(&span(2, &["I"])).unwrap().dims(), [0, 3, 1, 0]);
    assert_eq!(liealg::four_decomposition(&tensor_su2()).unwrap().dims(), [11, 2, 0, 3]);
    let err = liealg::four_decomposition(&span(2, &["X", "Y"])).unwrap_err();
    assert!(matches!(err, symflow::Error::NotSubalgebra(_)), "{err}");
}

#[test]
fn twirl_examples() {
    let comm = liealg::commutant(&span(2, &["Z"]));
    let z = skew("Z");
    assert!(max_abs(&(liealg::twirl_project(&z, &comm) - &z)) < 1e-15);
    assert!(max_abs(&liealg::twirl_project(&skew("X"), &comm)) < 1e-15);
}

#[test]
fn subalgebra_examples() {
    assert!(!liealg::is_subalgebra(&span(2, &["X", "Y"])));
    assert!(liealg::is_subalgebra(&span(4, &["II", "XX + YY + ZZ"])));
    assert!(liealg::is_subalgebra(&Subspace::empty(4).unwrap()));
}

/// Haar average over `exp(αz)` on a uniform grid of `points` angles.
fn quadrature_twirl(x: &ComplexMatrix, z: &ComplexMatrix, points: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(x.nrows(), x.ncols());
    for k in 0..points {
        let a = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
        let g = nummat::expm_skew(z, a).unwrap();
        acc += &g * x * g.adjoint();
    }
    acc / Complex64::new(points as f64, 0.0)
}

#[test]
fn twirl_matches_haar_quadrature() {
    let mut r = rng(5);
    for t in ["Z", "I"] {
        let comm = liealg::commutant(&span(2, &[t]));
        for _ in 0..20 {
            let x = random_skew(&mut r, 1, 3);
            let q = quadrature_twirl(&x, &skew(t), 1000);
            assert!(max_abs(&(liealg::twirl_project(&x, &comm) - q)) < 1e-6);
        }
    }
}

#[test]
fn twirl_matches_clifford_average() {
    // The single-qubit Clifford group is a unitary 2-design, so averaging
    // g x g† over it is the twirl onto the commutant of all of u(2).
    let group = clifford_group();
    assert_eq!(group.len(), 24);
    let comm = liealg::commutant(&Subspace::full(2).unwrap());
    let mut r = rng(8);
    for _ in 0..10 {
        let x = random_skew(&mut r, 1, 4);
        let mut acc = ComplexMatrix::zeros(2, 2);
        for g in &group {
            acc += g * &x * g.adjoint();
        }
        acc /= Complex64::new(24.0, 0.0);
        assert!(max_abs(&(liealg::twirl_project(&x, &comm) - acc)) < 1e-12);
    }
}

#[test]
fn gell_mann_basis_for_qutrits() {
    let full = Subspace::full(3).unwrap();
    assert_eq!(full.dim(), 9);
    for (a, x) in full.basis().iter().enumerate() {
        assert!(nummat::is_skew_hermitian(x, 1e-14));
        for (b, y) in full.basis().iter().enumerate() {
            let v = nummat::trace_inner(x, y).unwrap();
            assert!((v - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    let mut diag = ComplexMatrix::zeros(3, 3);
    diag[(0, 0)] = I;
    let t = Subspace::from_elements(3, &[diag]).unwrap();
    let dec = liealg::four_decomposition(&t).unwrap();
    // Commutant of diag(i,0,0): u(1) ⊕ u(2), dimension 5; its center has the
    // two diagonal blocks.
    assert_eq!(liealg::commutant(&t).dim(), 5);
    assert_eq!(dec.dims(), [4, 4, 1, 0]);
}

/// Random subalgebra: Lie closure of one or two random elements on 1-3 qubits.
fn arb_algebra() -> impl Strategy<Value = Subspace> {
    (1usize..=3, 1usize..=2, 1usize..=2, any::<u64>()).prop_map(|(n, k, terms, seed)| {
        let mut r = rng(seed);
        let gens: Vec<ComplexMatrix> = (0..k).map(|_| random_skew(&mut r, n, terms)).collect();
        liealg::lie_closure(1 << n, &gens).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_is_orthogonal_and_complete(t in arb_algebra()) {
        let d = t.d();
        let dec = liealg::four_decomposition(&t).unwrap();
        prop_assert_eq!(dec.dims().iter().sum::<usize>(), d * d);
        let pieces = [&dec.rest, &dec.commutant_reduced, &dec.center, &dec.t_reduced];
        let all: Vec<&ComplexMatrix> = pieces.iter().flat_map(|s| s.basis().iter()).collect();
        for (a, x) in all.iter().enumerate() {
            prop_assert!(nummat::is_skew_hermitian(x, 1e-12));
            for (b, y) in all.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                let v = nummat::trace_inner(x, y).unwrap();
                prop_assert!((v - expected).abs() < 1e-10);
            }
        }
        prop_assert!(same(&dec.center.sum(&dec.t_reduced), &t));
        prop_assert!(same(&dec.center.sum(&dec.commutant_reduced), &dec.commutant));
    }

    #[test]
    fn derived_pieces_are_subalgebras(t in arb_algebra()) {
        let dec = liealg::four_decomposition(&t).unwrap();
        prop_assert!(liealg::is_subalgebra(&dec.commutant));
        prop_assert!(liealg::is_subalgebra(&dec.center));
        prop_assert!(liealg::is_subalgebra(&dec.commutant_reduced));
        prop_assert!(liealg::is_subalgebra(&dec.t_reduced));
    }

    #[test]
    fn commutant_is_group_invariant(t in arb_algebra(), seed in any::<u64>()) {
        let comm = liealg::commutant(&t);
        let mut r = rng(seed);
        for _ in 0..50 {
            let mut x = ComplexMatrix::zeros(t.d(), t.d());
            for b in t.basis() {
                x += b * Complex64::new(r.random_range(-3.0..3.0), 0.0);
            }
            let g = nummat::expm_skew(&x, 1.0).unwrap();
            for y in comm.basis() {
                prop_assert!(max_abs(&(&g * y * g.adjoint() - y)) < 1e-10);
            }
        }
    }

    #[test]
    fn twirl_is_idempotent_projection(t in arb_algebra(), seed in any::<u64>()) {
        let comm = liealg::commutant(&t);
        let mut r = rng(seed);
        let n = t.d().trailing_zeros() as usize;
        let x = random_skew(&mut r, n, 4);
        let p = liealg::twirl_project(&x, &comm);
        prop_assert!(max_abs(&(liealg::twirl_project(&p, &comm) - &p)) < 1e-12);
        prop_assert!(comm.contains(&p, 1e-10));
        for y in comm.basis() {
            prop_assert!(nummat::trace_inner(y, &(&x - &p)).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn closure_agrees_with_oracle_on_random_generators() {
    let mut r = rng(21);
    for _ in 0..10 {
        let n = r.random_range(1..=2);
        let gens: Vec<ComplexMatrix> = (0..2).map(|_| random_skew(&mut r, n, 2)).collect();
        assert_eq!(liealg::lie_closure(1 << n, &gens).unwrap().dim(), closure_dim_oracle(&gens));
    }
    let h = herm("X");
    assert!(liealg::lie_closure(2, &[h]).is_err());
}
