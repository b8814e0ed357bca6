//! Derivatives split along a symmetry.
//!
//! The equivariant derivative keeps the part of `∂_j` generated by the
//! commutant of the symmetry. The covariant derivative removes the part
//! generated by the symmetry itself. Both are available for the circuit
//! unitary, the output state and a cost function.

use nalgebra::DVector;
use serde_json::json;

use crate::circuit::{CircuitSpec, CostSpec, Side};
use crate::error::{Error, Result};
use crate::liealg;
use crate::nummat::{self, real_overlap, ComplexMatrix, ComplexVector, RealMatrix, RealVector};
use crate::pauli::PauliSum;
use crate::tangent::{self, Action, BasisKind, SymmetrySpec};

/// Cost derivatives with the pieces of their symmetry split.
#[derive(Clone, Debug)]
pub struct SymGradReport {
    /// Rate of change of the cost along each basis element.
    pub m: RealVector,
    /// `ω_bj = ⟪Z_b | ∂_j ψ⟫`.
    pub omega: RealMatrix,
    pub gram: RealMatrix,
    /// `G⁺ ω`.
    pub vector_potential: RealMatrix,
    pub partial: RealVector,
    pub projected: RealVector,
}

fn rows(m: &RealMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl SymGradReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "m": self.m.as_slice(),
            "omega": rows(&self.omega),
            "gram": rows(&self.gram),
            "vector_potential": rows(&self.vector_potential),
            "partial": self.partial.as_slice(),
            "projected": self.projected.as_slice(),
        })
    }
}

fn side_of(action: Action) -> Side {
    match action {
        Action::Theta => Side::Right,
        Action::Left => Side::Left,
    }
}

fn check_sym(sym: &SymmetrySpec, c: &CircuitSpec) -> Result<()> {
    if sym.d() != c.dim() {
        return Err(Error::Shape(format!(
            "symmetry acts on dimension {}, circuit on {}",
            sym.d(),
            c.dim()
        )));
    }
    Ok(())
}

/// `U · P_commutant(Ω^R_j)`.
pub fn equivariant_derivative_unitary(
    c: &CircuitSpec,
    theta: &[f64],
    j: usize,
    sym: &SymmetrySpec,
) -> Result<ComplexMatrix> {
    check_sym(sym, c)?;
    let omega = c.effective_generator(theta, j, Side::Right)?;
    Ok(c.unitary(theta)? * liealg::twirl_project(&omega, sym.commutant()))
}

/// `U · (Ω^R_j − P_t(Ω^R_j))`.
pub fn covariant_derivative_unitary(
    c: &CircuitSpec,
    theta: &[f64],
    j: usize,
    sym: &SymmetrySpec,
) -> Result<ComplexMatrix> {
    check_sym(sym, c)?;
    let omega = c.effective_generator(theta, j, Side::Right)?;
    let vertical = sym.generators().project(&omega);
    Ok(c.unitary(theta)? * (omega - vertical))
}

fn frame_projection(frame: &tangent::TangentFrame, v: &ComplexVector) -> Result<ComplexVector> {
    let pinv = nummat::pinv_psd(&frame.gram, nummat::rank_tol())?;
    let coeffs = pinv * frame.overlaps(v);
    let mut out = ComplexVector::zeros(v.len());
    for (x, w) in frame.raw.iter().zip(coeffs.iter()) {
        out += x * nummat::c(*w, 0.0);
    }
    Ok(out)
}

/// Projection of `∂_j ψ` onto the equivariant tangents.
pub fn equivariant_derivative_state(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    j: usize,
    psi0: &ComplexVector,
) -> Result<ComplexVector> {
    let frame = tangent::equivariant_frame(sym, c, theta, psi0)?;
    frame_projection(&frame, &c.state_partial(theta, j, psi0)?)
}

/// `∂_j ψ` with its vertical part removed.
pub fn covariant_derivative_state(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    j: usize,
    psi0: &ComplexVector,
) -> Result<ComplexVector> {
    let frame = tangent::vertical_frame(sym, c, theta, psi0)?;
    let d = c.state_partial(theta, j, psi0)?;
    let vertical = frame_projection(&frame, &d)?;
    Ok(d - vertical)
}

/// `ω_bj = ⟪Z_b | ∂_j ψ⟫` from statevectors.
pub fn overlap_omega(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    kind: BasisKind,
) -> Result<RealMatrix> {
    let frame = tangent::frame(sym, kind, c, theta, psi0)?;
    let partials = c.state_partials(theta, psi0)?;
    Ok(RealMatrix::from_fn(frame.raw.len(), partials.len(), |b, j| {
        real_overlap(&frame.raw[b], &partials[j])
    }))
}

fn omega_from_generators(
    sym: &SymmetrySpec,
    kind: BasisKind,
    phi: &ComplexVector,
    generators: &[ComplexMatrix],
) -> RealMatrix {
    let basis = sym.basis(kind);
    RealMatrix::from_fn(basis.len(), generators.len(), |b, j| {
        let z = &basis[b];
        let ac = nummat::anticommutator(&z.adjoint(), &generators[j]);
        0.5 * phi.dotc(&(ac * phi)).re
    })
}

/// `ω_bj = ½ ⟨φ| {z_b†, Ω_j} |φ⟩` with the generator transported to the action point.
pub fn omega_anticommutator(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    kind: BasisKind,
) -> Result<RealMatrix> {
    check_sym(sym, c)?;
    let phi = tangent::action_point(sym.action(), c, theta, psi0)?;
    let side = side_of(sym.action());
    let gens = (0..c.n_params())
        .map(|j| c.effective_generator(theta, j, side))
        .collect::<Result<Vec<_>>>()?;
    Ok(omega_from_generators(sym, kind, &phi, &gens))
}

/// Overlaps for circuits whose gate generators all commute. The effective
/// generators are then the bare gate generators, so no transport is needed.
pub fn omega_commuting(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    kind: BasisKind,
) -> Result<RealMatrix> {
    check_sym(sym, c)?;
    if !c.generators_commute() {
        return Err(Error::Contract("gate generators do not commute".into()));
    }
    let phi = tangent::action_point(sym.action(), c, theta, psi0)?;
    let d = c.dim();
    let gens: Vec<ComplexMatrix> = (0..c.n_params())
        .map(|j| match c.gate_of_param(j) {
            Some(g) => c.gates()[g].skew_generator(),
            None => ComplexMatrix::zeros(d, d),
        })
        .collect();
    Ok(omega_from_generators(sym, kind, &phi, &gens))
}

/// `m_a = 2 ⟪M ψ | Z_a⟫`, the first-order change of `<M>` along each basis element.
pub fn symmetry_derivative(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    observable: &PauliSum,
    kind: BasisKind,
) -> Result<RealVector> {
    crate::circuit::check_observable(observable, c.n_qubits())?;
    let frame = tangent::frame(sym, kind, c, theta, psi0)?;
    let psi = c.apply(theta, psi0)?;
    let m_psi = observable.apply(&psi);
    Ok(RealVector::from_iterator(
        frame.raw.len(),
        frame.raw.iter().map(|z| 2.0 * real_overlap(&m_psi, z)),
    ))
}

/// The same quantity as `<φ| [M̃, z_a] |φ>` with `M` moved to the action point.
pub fn symmetry_derivative_commutator(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    observable: &PauliSum,
    kind: BasisKind,
) -> Result<RealVector> {
    crate::circuit::check_observable(observable, c.n_qubits())?;
    check_sym(sym, c)?;
    let phi = tangent::action_point(sym.action(), c, theta, psi0)?;
    let m = observable.to_matrix();
    let m_at = match sym.action() {
        Action::Left => m,
        Action::Theta => {
            let u = c.unitary(theta)?;
            u.adjoint() * m * u
        }
    };
    let basis = sym.basis(kind);
    Ok(RealVector::from_iterator(
        basis.len(),
        basis.iter().map(|z| phi.dotc(&(nummat::commutator(&m_at, z) * &phi)).re),
    ))
}

fn report(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    cost: &CostSpec,
    kind: BasisKind,
) -> Result<(SymGradReport, RealVector)> {
    cost.check(c.n_qubits())?;
    let frame = tangent::frame(sym, kind, c, theta, psi0)?;
    let psi = c.apply(theta, psi0)?;
    let m_psi = cost.linearized(&psi).apply(&psi);
    let partials = c.state_partials(theta, psi0)?;
    let omega = RealMatrix::from_fn(frame.raw.len(), partials.len(), |b, j| {
        real_overlap(&frame.raw[b], &partials[j])
    });
    let m = RealVector::from_iterator(
        frame.raw.len(),
        frame.raw.iter().map(|z| 2.0 * real_overlap(&m_psi, z)),
    );
    let partial = RealVector::from_iterator(
        partials.len(),
        partials.iter().map(|d| 2.0 * real_overlap(&m_psi, d)),
    );
    let vector_potential = nummat::pinv_psd(&frame.gram, nummat::rank_tol())? * &omega;
    let contraction = if m.is_empty() {
        DVector::zeros(partials.len())
    } else {
        vector_potential.transpose() * &m
    };
    Ok((
        SymGradReport {
            m,
            omega,
            gram: frame.gram,
            vector_potential,
            partial,
            projected: RealVector::zeros(0),
        },
        contraction,
    ))
}

/// `D_j C = ∂_j C − m_a A^a_j` over the symmetry basis.
pub fn covariant_derivative_cost(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    cost: &CostSpec,
) -> Result<SymGradReport> {
    let (mut r, contraction) = report(sym, c, theta, psi0, cost, BasisKind::Vertical)?;
    r.projected = &r.partial - contraction;
    Ok(r)
}

/// `E_j C = m^E_a G̃⁺_ab ω^E_bj` over the commutant basis.
pub fn equivariant_derivative_cost(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    cost: &CostSpec,
) -> Result<SymGradReport> {
    let (mut r, contraction) = report(sym, c, theta, psi0, cost, BasisKind::Equivariant)?;
    r.projected = contraction;
    Ok(r)
}
