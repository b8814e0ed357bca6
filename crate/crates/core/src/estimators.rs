//! Circuit-level estimators for the overlaps and symmetry derivatives,
//! simulated exactly.
//!
//! The overlap `ω_bj` is estimated with an ancilla test. The algebra element
//! `z_b` (or, with the roles exchanged, the gate generator) is expanded as
//! `Σ χ_ℓ P_ℓ`. For each term the ancilla starts in `|+⟩` and controls the
//! unitary `(χ_ℓ/|χ_ℓ|) P_ℓ`. The register then runs a transport circuit
//! and `Y ⊗ K` is measured. Each expectation is real. The overlap is
//! `−Σ |χ_ℓ| <Y ⊗ K>_ℓ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{check_observable, CircuitSpec, GateSpec};
use crate::error::{Error, Result};
use crate::nummat::{self, ComplexMatrix, ComplexVector, I};
use crate::pauli::{pauli_decompose, unitary_decomposition, PauliSum, PauliWord};
use crate::tangent::Action;

/// Which operator is expanded into controlled Pauli terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaVariant {
    /// Expand the symmetry element and measure the gate generator.
    #[default]
    Standard,
    /// Expand the gate generator and measure the symmetry element.
    RoleExchange,
}

/// One term of the ancilla test: a fixed-angle circuit on `n + 1` qubits
/// with the ancilla on wire 0.
#[derive(Clone, Debug)]
pub struct AncillaCircuit {
    pub base: CircuitSpec,
    pub initial: ComplexVector,
    /// `Y ⊗ K`.
    pub observable: PauliSum,
    /// Coefficient `χ_ℓ` of the expanded term.
    pub chi: Complex64,
}

impl AncillaCircuit {
    /// `<φ| Y ⊗ K |φ>` on the simulated output state.
    pub fn expectation(&self) -> Result<Complex64> {
        let phi = self.base.apply(&[], &self.initial)?;
        Ok(self.observable.expectation(&phi))
    }
}

fn shifted(wires: &[usize]) -> Vec<usize> {
    wires.iter().map(|w| w + 1).collect()
}

fn push_forward(out: &mut Vec<GateSpec>, c: &CircuitSpec, theta: &[f64], range: std::ops::Range<usize>) {
    for g in &c.gates()[range] {
        let angle = g.param().map_or_else(|| g.angle().unwrap_or(0.0), |j| theta[j]);
        out.push(GateSpec::fixed(&g.generator().to_string(), &shifted(g.wires()), angle).with_scale(g.scale()));
    }
}

fn push_inverse(out: &mut Vec<GateSpec>, c: &CircuitSpec, theta: &[f64], range: std::ops::Range<usize>) {
    for g in c.gates()[range].iter().rev() {
        let angle = g.param().map_or_else(|| g.angle().unwrap_or(0.0), |j| theta[j]);
        out.push(GateSpec::fixed(&g.generator().to_string(), &shifted(g.wires()), -angle).with_scale(g.scale()));
    }
}

/// Gates applying `e^{iα} P` to the register when the ancilla is `|1⟩`.
fn push_controlled(out: &mut Vec<GateSpec>, phase: f64, word: &PauliWord) {
    if phase != 0.0 {
        out.push(GateSpec::fixed("0.5*I - 0.5*Z", &[0], -phase));
    }
    let support = word.support();
    if support.is_empty() {
        return;
    }
    let local: String = support
        .iter()
        .map(|&q| ['I', 'X', 'Y', 'Z'][word.letter(q) as usize])
        .collect();
    let idle = "I".repeat(support.len());
    let h = format!("0.25*I{idle} - 0.25*Z{idle} - 0.25*I{local} + 0.25*Z{local}");
    let mut wires = vec![0];
    wires.extend(shifted(&support));
    out.push(GateSpec::fixed(&h, &wires, std::f64::consts::PI));
}

fn hermitian_part(x: &ComplexMatrix) -> Result<PauliSum> {
    let s = pauli_decompose(x)?;
    if !s.is_hermitian(1e-10) {
        return Err(Error::Contract("measured operator is not Hermitian".into()));
    }
    PauliSum::from_terms(
        s.n_qubits(),
        s.terms().map(|(w, c)| (*w, Complex64::new(c.re, 0.0))),
    )
}

/// One ancilla circuit per Pauli term of the expanded operator.
#[allow(clippy::too_many_arguments)]
pub fn build_ancilla_circuits(
    c: &CircuitSpec,
    theta: &[f64],
    j: usize,
    z: &ComplexMatrix,
    psi0: &ComplexVector,
    action: Action,
    variant: AncillaVariant,
) -> Result<Vec<AncillaCircuit>> {
    c.apply(theta, psi0)?;
    if z.shape() != (c.dim(), c.dim()) {
        return Err(Error::Shape(format!("z is {:?}, circuit dimension is {}", z.shape(), c.dim())));
    }
    if j >= c.n_params() {
        return Err(Error::Shape(format!("parameter {j} out of range 0..{}", c.n_params())));
    }
    let n = c.n_qubits();
    let Some(g) = c.gate_of_param(j) else {
        return Ok(Vec::new());
    };
    let gen = c.gates()[g].skew_generator();
    let p = c.gates().len();
    let (expanded, measured) = match variant {
        AncillaVariant::Standard => (z.clone(), &gen * I),
        AncillaVariant::RoleExchange => (gen.clone(), z * I),
    };
    let terms = unitary_decomposition(&expanded)?;
    let k = hermitian_part(&measured)?;
    let observable = PauliSum::parse("Y")?.tensor(&k);
    let (prep, post_forward, post_inverse): (std::ops::Range<usize>, _, _) = match (action, variant) {
        (Action::Theta, AncillaVariant::Standard) => (0..0, Some(0..g), None),
        (Action::Theta, AncillaVariant::RoleExchange) => (0..g, None, Some(0..g)),
        (Action::Left, AncillaVariant::Standard) => (0..p, None, Some(g + 1..p)),
        (Action::Left, AncillaVariant::RoleExchange) => (0..g + 1, Some(g + 1..p), None),
    };
    let initial = nummat::kron_vec(&crate::circuit::basis_state("+")?, psi0);
    terms
        .into_iter()
        .map(|(chi, word)| {
            let mut gates = Vec::new();
            push_forward(&mut gates, c, theta, prep.clone());
            push_controlled(&mut gates, chi.arg(), &word);
            if let Some(r) = post_forward.clone() {
                push_forward(&mut gates, c, theta, r);
            }
            if let Some(r) = post_inverse.clone() {
                push_inverse(&mut gates, c, theta, r);
            }
            Ok(AncillaCircuit {
                base: CircuitSpec::new(n + 1, 0, gates)?,
                initial: initial.clone(),
                observable: observable.clone(),
                chi,
            })
        })
        .collect()
}

/// Overlap estimate `−Σ |χ_ℓ| <Y ⊗ K>_ℓ`. Fails if any expectation has an
/// imaginary part above 1e-10.
#[allow(clippy::too_many_arguments)]
pub fn hadamard_omega(
    c: &CircuitSpec,
    theta: &[f64],
    j: usize,
    z: &ComplexMatrix,
    psi0: &ComplexVector,
    action: Action,
    variant: AncillaVariant,
) -> Result<f64> {
    let mut total = 0.0;
    for circ in build_ancilla_circuits(c, theta, j, z, psi0, action, variant)? {
        let e = circ.expectation()?;
        if e.im.abs() > 1e-10 {
            return Err(Error::Contract(format!("ancilla expectation has imaginary part {:.3e}", e.im)));
        }
        total -= circ.chi.norm() * e.re;
    }
    Ok(total)
}

/// Central difference of `<M>` with `exp(t z)` inserted at the action point.
#[allow(clippy::too_many_arguments)]
pub fn insertion_m(
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    observable: &PauliSum,
    z: &ComplexMatrix,
    action: Action,
    h: f64,
) -> Result<f64> {
    check_observable(observable, c.n_qubits())?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Spec(format!("step must be positive, got {h}")));
    }
    let value = |t: f64| -> Result<f64> {
        let e = nummat::expm_skew(z, t)?;
        let psi = match action {
            Action::Theta => c.apply(theta, &(&e * psi0))?,
            Action::Left => &e * c.apply(theta, psi0)?,
        };
        Ok(observable.expectation(&psi).re)
    };
    Ok((value(h)? - value(-h)?) / (2.0 * h))
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;
