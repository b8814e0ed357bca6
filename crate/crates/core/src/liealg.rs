//! Subspaces and subalgebras of u(d).
//!
//! Elements are skew-Hermitian matrices. Internally every element is handled
//! through real coordinates in an orthonormal basis of u(d): `i·P` over Pauli
//! words when `d` is a power of two, and `i·B` over normalized generalized
//! Gell-Mann matrices (plus the identity) otherwise. Orthonormality in
//! coordinates is orthonormality under `trace_inner`.
//!
//! Subspaces obtained as kernels get a canonical basis: reduced row echelon
//! form in coordinate order, then Gram-Schmidt. The commutant of `iZ` is
//! therefore `{iI, iZ}`. Subspaces built from user generators keep their
//! order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nummat::{self, ComplexMatrix, RealMatrix, RealVector, I};
use crate::pauli::{pauli_decompose, PauliWord};

pub type AlgebraElement = ComplexMatrix;

/// Orthonormal real basis of u(d).
#[derive(Clone, Debug)]
pub enum AlgebraBasis {
    Pauli { n: usize },
    GellMann { d: usize, hermitian: Vec<ComplexMatrix> },
}

impl AlgebraBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Shape("u(0) is empty".into()));
        }
        if d.is_power_of_two() {
            return Ok(AlgebraBasis::Pauli { n: d.trailing_zeros() as usize });
        }
        let norm = (d as f64 / 2.0).sqrt();
        let mut hermitian = vec![ComplexMatrix::identity(d, d)];
        for j in 0..d {
            for k in j + 1..d {
                let mut s = ComplexMatrix::zeros(d, d);
                s[(j, k)] = Complex64::new(norm, 0.0);
                s[(k, j)] = Complex64::new(norm, 0.0);
                hermitian.push(s);
                let mut a = ComplexMatrix::zeros(d, d);
                a[(j, k)] = Complex64::new(0.0, -norm);
                a[(k, j)] = Complex64::new(0.0, norm);
                hermitian.push(a);
            }
        }
        for l in 1..d {
            let lf = l as f64;
            let scale = (2.0 / (lf * (lf + 1.0))).sqrt() * norm;
            let mut m = ComplexMatrix::zeros(d, d);
            for j in 0..l {
                m[(j, j)] = Complex64::new(scale, 0.0);
            }
            m[(l, l)] = Complex64::new(-lf * scale, 0.0);
            hermitian.push(m);
        }
        Ok(AlgebraBasis::GellMann { d, hermitian })
    }

    pub fn d(&self) -> usize {
        match self {
            AlgebraBasis::Pauli { n } => 1 << n,
            AlgebraBasis::GellMann { d, .. } => *d,
        }
    }

    pub fn len(&self) -> usize {
        self.d() * self.d()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `k`-th basis element of u(d).
    pub fn element(&self, k: usize) -> AlgebraElement {
        match self {
            AlgebraBasis::Pauli { n } => PauliWord::from_index(*n, k).to_matrix() * I,
            AlgebraBasis::GellMann { hermitian, .. } => &hermitian[k] * I,
        }
    }

    /// Coordinates of `x` (its skew-Hermitian part) in this basis.
    pub fn coords(&self, x: &ComplexMatrix) -> RealVector {
        let d = self.d();
        let inv = 1.0 / d as f64;
        match self {
            AlgebraBasis::Pauli { n } => RealVector::from_fn(d * d, |k, _| {
                PauliWord::from_index(*n, k).trace_with(x).im * inv
            }),
            AlgebraBasis::GellMann { hermitian, .. } => RealVector::from_fn(d * d, |k, _| {
                (&hermitian[k] * x).trace().im * inv
            }),
        }
    }

    pub fn from_coords(&self, v: &RealVector) -> AlgebraElement {
        let d = self.d();
        let mut out = ComplexMatrix::zeros(d, d);
        match self {
            AlgebraBasis::Pauli { n } => {
                for (k, &ck) in v.iter().enumerate() {
                    if ck == 0.0 {
                        continue;
                    }
                    let w = PauliWord::from_index(*n, k);
                    for col in 0..d {
                        out[(col ^ w.x_mask() as usize, col)] += I * w.phase(col) * ck;
                    }
                }
            }
            AlgebraBasis::GellMann { hermitian, .. } => {
                for (k, &ck) in v.iter().enumerate() {
                    if ck != 0.0 {
                        out += &hermitian[k] * (I * ck);
                    }
                }
            }
        }
        out
    }
}

/// A real subspace of u(d) with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis_kind: AlgebraBasis,
    coords: RealMatrix,
    elements: Vec<AlgebraElement>,
}

const GS_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;

fn gram_schmidt(vectors: &[RealVector], tol: f64) -> Vec<RealVector> {
    let mut out: Vec<RealVector> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &out {
                let p = q.dot(&r);
                r.axpy(-p, q, 1.0);
            }
        }
        let nr = r.norm();
        if nr > tol * scale {
            out.push(r / nr);
        }
    }
    out
}

fn fix_sign(v: &mut RealVector) {
    if let Some(first) = v.iter().find(|c| c.abs() > PIVOT_TOL) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Canonical basis of the span of `vectors`: RREF then Gram-Schmidt.
fn canonical(vectors: &[RealVector], len: usize) -> Vec<RealVector> {
    let rows = vectors.len();
    if rows == 0 {
        return Vec::new();
    }
    let mut m = RealMatrix::from_fn(rows, len, |r, c| vectors[r][c]);
    let scale = nummat::max_abs_real(&m).max(f64::MIN_POSITIVE);
    let mut pivot_row = 0;
    for col in 0..len {
        if pivot_row == rows {
            break;
        }
        let (best, val) = (pivot_row..rows)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= PIVOT_TOL * scale {
            continue;
        }
        m.swap_rows(pivot_row, best);
        let p = m[(pivot_row, col)];
        for c in 0..len {
            m[(pivot_row, c)] /= p;
        }
        for r in 0..rows {
            if r != pivot_row {
                let f = m[(r, col)];
                if f != 0.0 {
                    for c in 0..len {
                        let sub = f * m[(pivot_row, c)];
                        m[(r, c)] -= sub;
                    }
                }
            }
        }
        pivot_row += 1;
    }
    let reduced: Vec<RealVector> = (0..pivot_row).map(|r| m.row(r).transpose()).collect();
    let mut out = gram_schmidt(&reduced, GS_TOL);
    for v in &mut out {
        fix_sign(v);
    }
    out
}

impl Subspace {
    fn from_orthonormal_coords(basis_kind: AlgebraBasis, vectors: Vec<RealVector>) -> Self {
        let len = basis_kind.len();
        let coords = RealMatrix::from_fn(len, vectors.len(), |r, c| vectors[c][r]);
        let elements = vectors.iter().map(|v| basis_kind.from_coords(v)).collect();
        Subspace { basis_kind, coords, elements }
    }

    fn canonical_from(basis_kind: &AlgebraBasis, vectors: &[RealVector]) -> Self {
        let vs = canonical(vectors, basis_kind.len());
        Self::from_orthonormal_coords(basis_kind.clone(), vs)
    }

    pub fn empty(d: usize) -> Result<Self> {
        Ok(Self::from_orthonormal_coords(AlgebraBasis::new(d)?, Vec::new()))
    }

    /// All of u(d).
    pub fn full(d: usize) -> Result<Self> {
        let kind = AlgebraBasis::new(d)?;
        let len = kind.len();
        let vs = (0..len)
            .map(|k| RealVector::from_fn(len, |r, _| if r == k { 1.0 } else { 0.0 }))
            .collect();
        Ok(Self::from_orthonormal_coords(kind, vs))
    }

    /// Span of the given elements, orthonormalized in the given order.
    /// Dependent elements are dropped. Each element must be skew-Hermitian.
    pub fn from_elements(d: usize, elements: &[ComplexMatrix]) -> Result<Self> {
        let kind = AlgebraBasis::new(d)?;
        let mut vs = Vec::with_capacity(elements.len());
        for x in elements {
            if x.shape() != (d, d) {
                return Err(Error::Shape(format!("element is {:?}, expected {d}x{d}", x.shape())));
            }
            if !nummat::is_skew_hermitian(x, 1e-10 * (1.0 + nummat::max_abs(x))) {
                return Err(Error::Contract("algebra element is not skew-Hermitian".into()));
            }
            vs.push(kind.coords(x));
        }
        let mut on = gram_schmidt(&vs, GS_TOL);
        for v in &mut on {
            fix_sign(v);
        }
        Ok(Self::from_orthonormal_coords(kind, on))
    }

    /// Canonical basis for the span of the given elements.
    pub fn span_canonical(d: usize, elements: &[ComplexMatrix]) -> Result<Self> {
        let kind = AlgebraBasis::new(d)?;
        let vs: Vec<RealVector> = elements.iter().map(|x| kind.coords(x)).collect();
        let range = column_space(&vs, kind.len());
        Ok(Self::canonical_from(&kind, &range))
    }

    /// Canonical basis for the span of coordinate vectors in `kind`.
    pub fn from_coord_vectors(kind: &AlgebraBasis, vectors: &[RealVector]) -> Self {
        let range = column_space(vectors, kind.len());
        Self::canonical_from(kind, &range)
    }

    pub fn d(&self) -> usize {
        self.basis_kind.d()
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.elements
    }

    pub fn algebra_basis(&self) -> &AlgebraBasis {
        &self.basis_kind
    }

    /// Columns are the coordinates of the basis elements.
    pub fn coords(&self) -> &RealMatrix {
        &self.coords
    }

    fn coord_vectors(&self) -> Vec<RealVector> {
        self.coords.column_iter().map(|c| c.into_owned()).collect()
    }

    /// Orthogonal projection under `trace_inner`.
    pub fn project(&self, x: &ComplexMatrix) -> AlgebraElement {
        let v = self.basis_kind.coords(x);
        let p = &self.coords * (self.coords.transpose() * v);
        self.basis_kind.from_coords(&p)
    }

    /// Distance of `x` from the subspace, in the coordinate norm.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        let v = self.basis_kind.coords(x);
        let p = &self.coords * (self.coords.transpose() * &v);
        (v - p).norm()
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.residual(x) <= tol
    }

    /// Projector onto the subspace in coordinates.
    pub fn projector(&self) -> RealMatrix {
        &self.coords * self.coords.transpose()
    }

    /// Largest entry of the difference of the two coordinate projectors.
    pub fn projector_distance(&self, other: &Subspace) -> f64 {
        nummat::max_abs_real(&(self.projector() - other.projector()))
    }

    pub fn orthocomplement(&self) -> Subspace {
        let len = self.basis_kind.len();
        let ns = if self.dim() == 0 {
            (0..len)
                .map(|k| RealVector::from_fn(len, |r, _| if r == k { 1.0 } else { 0.0 }))
                .collect()
        } else {
            nummat::nullspace_real(&self.coords.transpose(), nummat::rank_tol())
        };
        Self::canonical_from(&self.basis_kind, &ns)
    }

    /// Part of `self` orthogonal to `other`, assuming `other ⊆ self`.
    pub fn minus(&self, other: &Subspace) -> Subspace {
        if other.dim() == 0 {
            return Self::canonical_from(&self.basis_kind, &self.coord_vectors());
        }
        let m = other.coords.transpose() * &self.coords;
        let ns = nummat::nullspace_real(&m, nummat::rank_tol());
        let vs: Vec<RealVector> = ns.iter().map(|a| &self.coords * a).collect();
        Self::canonical_from(&self.basis_kind, &vs)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.coord_vectors();
        vs.extend(other.coord_vectors());
        let range = column_space(&vs, self.basis_kind.len());
        Self::canonical_from(&self.basis_kind, &range)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Self::from_orthonormal_coords(self.basis_kind.clone(), Vec::new());
        }
        let residual = &self.coords - other.projector() * &self.coords;
        let ns = nummat::nullspace_real_scaled(&residual, 1e-8, 1.0);
        let vs: Vec<RealVector> = ns.iter().map(|a| &self.coords * a).collect();
        Self::canonical_from(&self.basis_kind, &vs)
    }

    /// Same span with a canonical basis.
    pub fn canonicalized(&self) -> Subspace {
        Self::canonical_from(&self.basis_kind, &self.coord_vectors())
    }

    /// Text report: a dimension header then one Pauli sum per basis element.
    pub fn report(&self, name: &str) -> String {
        let mut out = format!("{name} dim {}\n", self.dim());
        for x in &self.elements {
            match pauli_decompose(x) {
                Ok(s) => out.push_str(&format!("  {}\n", s.chop(1e-12))),
                Err(_) => out.push_str(&format!("  {x:?}\n")),
            }
        }
        out
    }
}

fn column_space(vectors: &[RealVector], len: usize) -> Vec<RealVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = RealMatrix::from_fn(len, vectors.len(), |r, c| vectors[c][r]);
    nummat::range_real(&m, nummat::rank_tol())
}

fn commutator_coords(kind: &AlgebraBasis, a: &ComplexMatrix, b: &ComplexMatrix) -> RealVector {
    kind.coords(&nummat::commutator(a, b))
}

/// Whether the span of `sub` is closed under commutators.
pub fn is_subalgebra(sub: &Subspace) -> bool {
    first_closure_violation(sub).is_none()
}

fn first_closure_violation(sub: &Subspace) -> Option<(usize, usize, f64)> {
    let b = sub.basis();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let c = nummat::commutator(&b[i], &b[j]);
            let v = sub.basis_kind.coords(&c);
            let r = (&v - &sub.coords * (sub.coords.transpose() * &v)).norm();
            if r > 1e-10 * v.norm().max(1.0) {
                return Some((i, j, r));
            }
        }
    }
    None
}

/// Smallest subalgebra containing the generators. Basis in discovery order.
pub fn lie_closure(d: usize, generators: &[ComplexMatrix]) -> Result<Subspace> {
    let start = Subspace::from_elements(d, generators)?;
    let kind = start.basis_kind.clone();
    let mut vecs = start.coord_vectors();
    let mut elems: Vec<ComplexMatrix> = start.elements.clone();
    let cap = 10 * d * d;
    let mut i = 0;
    let mut rounds = 0;
    while i < elems.len() {
        rounds += 1;
        if rounds > cap {
            return Err(Error::ClosureNotConverged(cap));
        }
        for j in 0..i {
            let c = commutator_coords(&kind, &elems[i], &elems[j]);
            let scale = c.norm();
            if scale == 0.0 {
                continue;
            }
            let mut r = c.clone();
            for _ in 0..2 {
                for q in &vecs {
                    let p = q.dot(&r);
                    r.axpy(-p, q, 1.0);
                }
            }
            let nr = r.norm();
            if nr > 1e-9 * scale.max(1.0) {
                let mut v = r / nr;
                fix_sign(&mut v);
                elems.push(kind.from_coords(&v));
                vecs.push(v);
            }
        }
        i += 1;
    }
    Ok(Subspace::from_orthonormal_coords(kind, vecs))
}

/// All elements of u(d) commuting with every element of `sub`.
pub fn commutant(sub: &Subspace) -> Subspace {
    let kind = &sub.basis_kind;
    let len = kind.len();
    if sub.dim() == 0 {
        return Subspace::full(kind.d()).expect("d is positive");
    }
    let m = sub.dim();
    let mut stacked = RealMatrix::zeros(m * len, len);
    for k in 0..len {
        let e = kind.element(k);
        for (a, y) in sub.basis().iter().enumerate() {
            let col = commutator_coords(kind, y, &e);
            stacked.view_mut((a * len, k), (len, 1)).copy_from(&col);
        }
    }
    let ns = nummat::nullspace_real_scaled(&stacked, nummat::rank_tol(), 1.0);
    Subspace::canonical_from(kind, &ns)
}

/// Elements of `sub` commuting with all of `sub`.
pub fn center(sub: &Subspace) -> Subspace {
    let kind = &sub.basis_kind;
    let len = kind.len();
    let m = sub.dim();
    if m == 0 {
        return sub.clone();
    }
    let mut stacked = RealMatrix::zeros(m * len, m);
    for i in 0..m {
        for j in 0..m {
            let col = commutator_coords(kind, &sub.basis()[i], &sub.basis()[j]);
            stacked.view_mut((j * len, i), (len, 1)).copy_from(&col);
        }
    }
    let ns = nummat::nullspace_real_scaled(&stacked, nummat::rank_tol(), 1.0);
    let vs: Vec<RealVector> = ns.iter().map(|a| &sub.coords * a).collect();
    Subspace::canonical_from(kind, &vs)
}

/// Orthogonal split of u(d) induced by a subalgebra `t`.
#[derive(Clone, Debug)]
pub struct AlgebraDecomposition {
    pub t: Subspace,
    /// Commutant of `t`.
    pub commutant: Subspace,
    /// Orthogonal complement of `t + commutant`.
    pub rest: Subspace,
    /// Commutant with the center removed.
    pub commutant_reduced: Subspace,
    /// Center of `t`, equal to `t ∩ commutant`.
    pub center: Subspace,
    /// `t` with the center removed.
    pub t_reduced: Subspace,
}

impl AlgebraDecomposition {
    pub fn dims(&self) -> [usize; 4] {
        [
            self.rest.dim(),
            self.commutant_reduced.dim(),
            self.center.dim(),
            self.t_reduced.dim(),
        ]
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.rest.report("rest"));
        out.push_str(&self.commutant_reduced.report("commutant_reduced"));
        out.push_str(&self.center.report("center"));
        out.push_str(&self.t_reduced.report("t_reduced"));
        out
    }
}

pub fn four_decomposition(t: &Subspace) -> Result<AlgebraDecomposition> {
    if let Some((i, j, r)) = first_closure_violation(t) {
        return Err(Error::NotSubalgebra(format!(
            "commutator of basis elements {i} and {j} leaves the span (residual {r:.3e})"
        )));
    }
    let comm = commutant(t);
    let z = center(t);
    let t_reduced = t.minus(&z);
    let commutant_reduced = comm.minus(&z);
    let rest = comm.sum(t).orthocomplement();
    let total = rest.dim() + commutant_reduced.dim() + z.dim() + t_reduced.dim();
    if total != t.d() * t.d() {
        return Err(Error::Contract(format!(
            "pieces have total dimension {total}, expected {}; check the rank tolerance",
            t.d() * t.d()
        )));
    }
    Ok(AlgebraDecomposition {
        t: t.clone(),
        commutant: comm,
        rest,
        commutant_reduced,
        center: z,
        t_reduced,
    })
}

/// Orthogonal projection onto the commutant (the twirl over the group).
pub fn twirl_project(x: &ComplexMatrix, commutant_basis: &Subspace) -> AlgebraElement {
    commutant_basis.project(x)
}
