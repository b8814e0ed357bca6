//! Tangent vectors of states under a symmetry action.
//!
//! A symmetry is a subalgebra `t` of u(d) acting either on the output state
//! (`Left`: `x ψ(θ)`) or on the input state before the circuit (`Theta`:
//! `U(θ) x ψ0`). Tangent spaces are real vector spaces under
//! `Re <x|y>`; internally a complex vector of length `d` is handled as a real
//! vector of length `2d`.

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::liealg::{self, AlgebraBasis, Subspace};
use crate::nummat::{
    self, complexify, realify, ComplexMatrix, ComplexVector, RealMatrix, RealVector, I,
    INTERSECTION_THRESHOLD,
};
use crate::pauli::{pauli_decompose, PauliSum};

pub use crate::nummat::real_overlap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Left,
    Theta,
}

impl std::str::FromStr for Action {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Action::Left),
            "theta" => Ok(Action::Theta),
            other => Err(Error::Spec(format!("unknown action {other:?}"))),
        }
    }
}

/// Which generators span a frame: the symmetry itself or its commutant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Vertical,
    Equivariant,
}

/// A represented symmetry algebra and the way it acts on states.
#[derive(Clone, Debug)]
pub struct SymmetrySpec {
    generators: Subspace,
    commutant: Subspace,
    action: Action,
}

impl SymmetrySpec {
    pub fn new(generators: Subspace, action: Action) -> Result<Self> {
        if !liealg::is_subalgebra(&generators) {
            return Err(Error::NotSubalgebra(
                "symmetry generators are not closed under commutators".into(),
            ));
        }
        let commutant = liealg::commutant(&generators);
        Ok(SymmetrySpec { generators, commutant, action })
    }

    /// Symmetry spanned by `i·h` for each Hermitian Pauli sum `h`.
    pub fn from_pauli_strings(n_qubits: usize, hermitian: &[&str], action: Action) -> Result<Self> {
        let mut elems = Vec::with_capacity(hermitian.len());
        for h in hermitian {
            let s = PauliSum::parse_n(h, n_qubits)?;
            if !s.is_hermitian(1e-12) {
                return Err(Error::Spec(format!("symmetry generator {h:?} is not Hermitian")));
            }
            elems.push(s.to_matrix() * I);
        }
        Self::new(Subspace::from_elements(1 << n_qubits, &elems)?, action)
    }

    pub fn generators(&self) -> &Subspace {
        &self.generators
    }

    pub fn commutant(&self) -> &Subspace {
        &self.commutant
    }

    pub fn action(&self) -> Action {
        self.action
    }

    pub fn with_action(&self, action: Action) -> Self {
        SymmetrySpec { action, ..self.clone() }
    }

    pub fn basis(&self, kind: BasisKind) -> &[ComplexMatrix] {
        match kind {
            BasisKind::Vertical => self.generators.basis(),
            BasisKind::Equivariant => self.commutant.basis(),
        }
    }

    pub fn d(&self) -> usize {
        self.generators.d()
    }

    fn check(&self, c: &CircuitSpec) -> Result<()> {
        if self.d() != c.dim() {
            return Err(Error::Shape(format!(
                "symmetry acts on dimension {}, circuit on {}",
                self.d(),
                c.dim()
            )));
        }
        Ok(())
    }
}

/// The state at which the symmetry generators act.
pub fn action_point(
    action: Action,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<ComplexVector> {
    match action {
        Action::Theta => {
            c.apply(theta, psi0)?;
            Ok(psi0.clone())
        }
        Action::Left => c.apply(theta, psi0),
    }
}

/// Maps a tangent at the action point to a tangent at `ψ(θ)`.
fn transport(action: Action, c: &CircuitSpec, theta: &[f64], v: &ComplexVector) -> ComplexVector {
    match action {
        Action::Theta => {
            let mut w = v.clone();
            c.apply_gates(theta, &mut w, 0..c.gates().len());
            w
        }
        Action::Left => v.clone(),
    }
}

/// Tangents generated by a family of algebra elements, with their Gram
/// matrix and an orthonormal basis of their span.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub raw: Vec<ComplexVector>,
    pub gram: RealMatrix,
    pub onb: Vec<ComplexVector>,
}

impl TangentFrame {
    pub fn rank(&self) -> usize {
        self.onb.len()
    }

    /// Orthogonal projection of `v` onto the span of the frame.
    pub fn project(&self, v: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(v.len());
        for u in &self.onb {
            out += u * nummat::c(real_overlap(u, v), 0.0);
        }
        out
    }

    /// `⟪raw_b | v⟫` for each frame vector.
    pub fn overlaps(&self, v: &ComplexVector) -> RealVector {
        RealVector::from_iterator(self.raw.len(), self.raw.iter().map(|x| real_overlap(x, v)))
    }
}

pub fn frame_from_elements(
    elements: &[ComplexMatrix],
    action: Action,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<TangentFrame> {
    let phi = action_point(action, c, theta, psi0)?;
    for x in elements {
        if x.nrows() != phi.len() || !x.is_square() {
            return Err(Error::Shape(format!(
                "generator of size {:?} does not act on a state of length {}",
                x.shape(),
                phi.len()
            )));
        }
    }
    let at_point: Vec<ComplexVector> = elements.iter().map(|x| x * &phi).collect();
    let gram = nummat::real_gram(&at_point);
    let onb_point = nummat::sym_orthonormalize(&at_point, &gram, nummat::rank_tol())?;
    Ok(TangentFrame {
        raw: at_point.iter().map(|v| transport(action, c, theta, v)).collect(),
        gram,
        onb: onb_point.iter().map(|v| transport(action, c, theta, v)).collect(),
    })
}

pub fn vertical_frame(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<TangentFrame> {
    sym.check(c)?;
    frame_from_elements(sym.generators.basis(), sym.action, c, theta, psi0)
}

pub fn equivariant_frame(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<TangentFrame> {
    sym.check(c)?;
    frame_from_elements(sym.commutant.basis(), sym.action, c, theta, psi0)
}

pub fn frame(
    sym: &SymmetrySpec,
    kind: BasisKind,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<TangentFrame> {
    match kind {
        BasisKind::Vertical => vertical_frame(sym, c, theta, psi0),
        BasisKind::Equivariant => equivariant_frame(sym, c, theta, psi0),
    }
}

/// Real span of state tangents with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct TangentSpan {
    basis: Vec<ComplexVector>,
    len: usize,
}

impl TangentSpan {
    pub fn empty(len: usize) -> Self {
        TangentSpan { basis: Vec::new(), len }
    }

    pub fn span(vectors: &[ComplexVector], len: usize) -> Self {
        if vectors.is_empty() {
            return Self::empty(len);
        }
        let m = RealMatrix::from_fn(2 * len, vectors.len(), |r, k| {
            if r < len {
                vectors[k][r].re
            } else {
                vectors[k][r - len].im
            }
        });
        let basis = nummat::range_real(&m, nummat::rank_tol())
            .iter()
            .map(complexify)
            .collect();
        TangentSpan { basis, len }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexVector] {
        &self.basis
    }

    fn real_basis(&self) -> RealMatrix {
        let cols: Vec<RealVector> = self.basis.iter().map(realify).collect();
        RealMatrix::from_fn(2 * self.len, cols.len(), |r, k| cols[k][r])
    }

    /// Projector in the real representation.
    pub fn projector(&self) -> RealMatrix {
        let q = self.real_basis();
        &q * q.transpose()
    }

    pub fn project(&self, v: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(v.len());
        for u in &self.basis {
            out += u * nummat::c(real_overlap(u, v), 0.0);
        }
        out
    }

    pub fn contains(&self, v: &ComplexVector, tol: f64) -> bool {
        (v - self.project(v)).norm() <= tol
    }

    /// Largest entry of the difference of the two projectors.
    pub fn distance(&self, other: &TangentSpan) -> f64 {
        nummat::max_abs_real(&(self.projector() - other.projector()))
    }

    /// `self ∩ other` (`complement = false`) or `self ∩ other⊥` (`true`).
    fn meet(&self, other: &TangentSpan, complement: bool) -> TangentSpan {
        if self.dim() == 0 {
            return Self::empty(self.len);
        }
        let qa = self.real_basis();
        let pb = other.projector();
        let mut m = qa.transpose() * pb * &qa;
        if complement {
            m = RealMatrix::identity(self.dim(), self.dim()) - m;
        }
        let eig = nalgebra::SymmetricEigen::new((&m + m.transpose()).scale(0.5));
        let basis = (0..self.dim())
            .filter(|&k| eig.eigenvalues[k] >= INTERSECTION_THRESHOLD)
            .map(|k| complexify(&(&qa * eig.eigenvectors.column(k))))
            .collect();
        TangentSpan { basis, len: self.len }
    }

    pub fn intersect(&self, other: &TangentSpan) -> TangentSpan {
        self.meet(other, false)
    }

    pub fn intersect_complement(&self, other: &TangentSpan) -> TangentSpan {
        self.meet(other, true)
    }
}

/// Tangent space `u(d) φ` at a state.
pub fn tangent_space(phi: &ComplexVector) -> Result<TangentSpan> {
    let kind = AlgebraBasis::new(phi.len())?;
    let vs: Vec<ComplexVector> = (0..kind.len()).map(|k| kind.element(k) * phi).collect();
    Ok(TangentSpan::span(&vs, phi.len()))
}

/// Löwdin orthonormalization of the union of the pieces. Each intersection is
/// accurate only to the eigenvalue threshold, so pieces built from different
/// parent spaces can overlap slightly; this removes the overlap with the
/// smallest change to every vector.
fn jointly_orthonormal(pieces: [TangentSpan; 4]) -> Result<[TangentSpan; 4]> {
    let all: Vec<ComplexVector> = pieces.iter().flat_map(|p| p.basis.iter().cloned()).collect();
    let gram = nummat::real_gram(&all);
    let fixed = nummat::sym_orthonormalize(&all, &gram, nummat::rank_tol())?;
    if fixed.len() != all.len() {
        return Ok(pieces);
    }
    let mut it = fixed.into_iter();
    Ok(pieces.map(|p| TangentSpan { basis: it.by_ref().take(p.dim()).collect(), len: p.len }))
}

/// Orthogonal four-way split of the tangent space at `ψ(θ)`.
#[derive(Clone, Debug)]
pub struct StateFourDecomposition {
    /// Horizontal and orthogonal to the equivariant span.
    pub cov: TangentSpan,
    /// Horizontal and equivariant.
    pub both: TangentSpan,
    /// Vertical and equivariant.
    pub equi: TangentSpan,
    /// Vertical and orthogonal to the equivariant span.
    pub vert: TangentSpan,
    pub tangent: TangentSpan,
    pub vertical: TangentSpan,
    pub horizontal: TangentSpan,
    pub equivariant: TangentSpan,
}

impl StateFourDecomposition {
    pub fn dims(&self) -> [usize; 4] {
        [self.cov.dim(), self.both.dim(), self.equi.dim(), self.vert.dim()]
    }

    /// Tangent dimensions not covered by the four pieces.
    pub fn residual_dim(&self) -> isize {
        self.tangent.dim() as isize - self.dims().iter().sum::<usize>() as isize
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        for (name, span) in [
            ("cov", &self.cov),
            ("both", &self.both),
            ("equi", &self.equi),
            ("vert", &self.vert),
        ] {
            out.push_str(&format!("{name} dim {}\n", span.dim()));
            for v in span.basis() {
                let amps: Vec<String> = v.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
                out.push_str(&format!("  [{}]\n", amps.join(", ")));
            }
        }
        out.push_str(&format!("residual dim {}\n", self.residual_dim()));
        out
    }
}

pub fn state_four_decomposition(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<StateFourDecomposition> {
    sym.check(c)?;
    let phi = action_point(sym.action, c, theta, psi0)?;
    let len = phi.len();
    let tangent = tangent_space(&phi)?;
    let vs: Vec<ComplexVector> = sym.generators.basis().iter().map(|x| x * &phi).collect();
    let es: Vec<ComplexVector> = sym.commutant.basis().iter().map(|x| x * &phi).collect();
    let vertical = TangentSpan::span(&vs, len);
    let equivariant = TangentSpan::span(&es, len);
    let horizontal = tangent.intersect_complement(&vertical);
    let [cov, both, equi, vert] = jointly_orthonormal([
        horizontal.intersect_complement(&equivariant),
        equivariant.intersect(&horizontal),
        equivariant.intersect(&vertical),
        vertical.intersect_complement(&equivariant),
    ])?;
    let pieces = StateFourDecomposition {
        cov,
        both,
        equi,
        vert,
        tangent,
        vertical,
        horizontal,
        equivariant,
    };
    Ok(match sym.action {
        Action::Left => pieces,
        Action::Theta => {
            let map = |s: &TangentSpan| TangentSpan {
                basis: s.basis.iter().map(|v| transport(Action::Theta, c, theta, v)).collect(),
                len,
            };
            StateFourDecomposition {
                cov: map(&pieces.cov),
                both: map(&pieces.both),
                equi: map(&pieces.equi),
                vert: map(&pieces.vert),
                tangent: map(&pieces.tangent),
                vertical: map(&pieces.vertical),
                horizontal: map(&pieces.horizontal),
                equivariant: map(&pieces.equivariant),
            }
        }
    })
}

/// Real matrix of the map `x ↦ x φ` from u(d) coordinates to tangent coordinates.
pub fn state_tangent_map(kind: &AlgebraBasis, phi: &ComplexVector) -> RealMatrix {
    let cols: Vec<RealVector> = (0..kind.len()).map(|k| realify(&(kind.element(k) * phi))).collect();
    RealMatrix::from_fn(2 * phi.len(), cols.len(), |r, k| cols[k][r])
}

/// Real matrix of the map `x ↦ U x` on unitaries (the free right action).
pub fn unitary_tangent_map(kind: &AlgebraBasis, u: &ComplexMatrix) -> RealMatrix {
    let d = u.nrows();
    let cols: Vec<RealVector> = (0..kind.len())
        .map(|k| {
            let m = u * kind.element(k);
            realify(&ComplexVector::from_column_slice(m.as_slice()))
        })
        .collect();
    RealMatrix::from_fn(2 * d * d, cols.len(), |r, k| cols[k][r])
}

fn subspace_of(kind: &AlgebraBasis, sub: &Subspace, coeffs: &[RealVector]) -> Subspace {
    let vs: Vec<RealVector> = coeffs.iter().map(|a| sub.coords() * a).collect();
    Subspace::from_coord_vectors(kind, &vs)
}

/// Elements whose tangent is orthogonal to the vertical span `τ(t)`.
pub fn horizontal_preimage(tau: &RealMatrix, t: &Subspace) -> Subspace {
    let kind = t.algebra_basis();
    let vert = nummat::range_real(&(tau * t.coords()), nummat::rank_tol());
    if vert.is_empty() {
        return Subspace::full(kind.d()).expect("d is positive");
    }
    let q = RealMatrix::from_fn(tau.nrows(), vert.len(), |r, k| vert[k][r]);
    let ns = nummat::nullspace_real(&(q.transpose() * tau), nummat::rank_tol());
    Subspace::from_coord_vectors(kind, &ns)
}

/// Split of u(d) into the part generating covariant motion and the part
/// tied to the symmetry, given the tangent map `τ`.
///
/// The second part is spanned by the symmetry elements that move the state
/// and by commutant elements whose motion is vertical without being zero.
/// Returns `(u_par, u_perp)`.
pub fn split_from_tangent_map(
    tau: &RealMatrix,
    t: &Subspace,
    commutant: &Subspace,
) -> (Subspace, Subspace) {
    let kind = t.algebra_basis();
    let tol = nummat::rank_tol();
    let t_image = tau * t.coords();
    let t_kernel = subspace_of(kind, t, &nummat::nullspace_real(&t_image, tol));
    let t_moving = t.minus(&t_kernel);

    let vert = nummat::range_real(&t_image, tol);
    let c_image = tau * commutant.coords();
    let off_vertical = if vert.is_empty() {
        c_image.clone()
    } else {
        let q = RealMatrix::from_fn(tau.nrows(), vert.len(), |r, k| vert[k][r]);
        &c_image - &q * (q.transpose() * &c_image)
    };
    let c_scale = nummat::max_abs_real(&c_image);
    let c_vertical =
        subspace_of(kind, commutant, &nummat::nullspace_real_scaled(&off_vertical, tol, c_scale));
    let c_kernel = subspace_of(kind, commutant, &nummat::nullspace_real(&c_image, tol));
    let c_moving = c_vertical.minus(&c_kernel);

    let perp = t_moving.sum(&c_moving);
    (perp.orthocomplement(), perp)
}

pub fn induced_algebra_split(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<(Subspace, Subspace)> {
    sym.check(c)?;
    let phi = action_point(sym.action, c, theta, psi0)?;
    let tau = state_tangent_map(sym.generators.algebra_basis(), &phi);
    Ok(split_from_tangent_map(&tau, &sym.generators, &sym.commutant))
}

/// The same split for the free right action on the unitary `U(θ)`.
pub fn induced_algebra_split_unitary(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
) -> Result<(Subspace, Subspace)> {
    sym.check(c)?;
    let u = c.unitary(theta)?;
    let tau = unitary_tangent_map(sym.generators.algebra_basis(), &u);
    Ok(split_from_tangent_map(&tau, &sym.generators, &sym.commutant))
}

/// Minimal-norm generator `x` with `x φ = v`, as a Pauli sum, when `d` is a power of two.
pub fn describe_tangent(phi: &ComplexVector, v: &ComplexVector) -> Option<PauliSum> {
    let kind = AlgebraBasis::new(phi.len()).ok()?;
    let tau = state_tangent_map(&kind, phi);
    let svd = tau.svd(true, true);
    let coords = svd.solve(&realify(v), 1e-10).ok()?;
    let x = kind.from_coords(&coords);
    if (&x * phi - v).norm() > 1e-8 {
        return None;
    }
    pauli_decompose(&x).ok().map(|s| s.chop(1e-10))
}
