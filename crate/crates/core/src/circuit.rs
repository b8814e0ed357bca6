//! Parametrized circuits of exponentiated Pauli-sum generators.
//!
//! Gate `k` acts as `exp(i · scale · angle · H_k)` on its wires, where the
//! angle is either a circuit parameter or a fixed constant. The default scale
//! is `-1`, so a Pauli rotation is `exp(-iθP/2)` with `H = P/2`. Gates apply
//! in list order: the circuit unitary is `U_p ⋯ U_1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{self, Subspace};
use crate::nummat::{self, ComplexMatrix, ComplexVector, RealVector, I};
use crate::pauli::{PauliSum, MAX_QUBITS};

/// Largest register the dense simulator accepts.
pub const MAX_SIM_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Generator transported to the input of the circuit.
    Right,
    /// Generator transported to the output of the circuit.
    Left,
}

#[derive(Clone, Debug)]
pub struct Gate {
    generator: PauliSum,
    wires: Vec<usize>,
    param: Option<usize>,
    angle: Option<f64>,
    scale: f64,
    eig_values: RealVector,
    eig_vectors: ComplexMatrix,
    full_generator: PauliSum,
}

impl Gate {
    pub fn generator(&self) -> &PauliSum {
        &self.generator
    }

    /// Generator placed on the whole register.
    pub fn full_generator(&self) -> &PauliSum {
        &self.full_generator
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn param(&self) -> Option<usize> {
        self.param
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn angle_at(&self, theta: &[f64]) -> f64 {
        match self.param {
            Some(j) => theta[j],
            None => self.angle.unwrap_or(0.0),
        }
    }

    /// `exp(i · scale · angle · H)` on the gate's wires.
    pub fn local_unitary(&self, angle: f64) -> ComplexMatrix {
        let s = self.scale * angle;
        nummat::spectral_apply(&self.eig_values, &self.eig_vectors, |l| {
            Complex64::from_polar(1.0, s * l)
        })
    }

    /// `i · scale · H` on the whole register, as a dense matrix.
    pub fn skew_generator(&self) -> ComplexMatrix {
        self.full_generator.to_matrix() * (I * self.scale)
    }
}

/// Serialized gate: `{h, wires, param, angle, scale}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSpec {
    pub h: String,
    pub wires: Vec<usize>,
    #[serde(default)]
    pub param: Option<usize>,
    #[serde(default)]
    pub angle: Option<f64>,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    -1.0
}

impl GateSpec {
    pub fn param(h: &str, wires: &[usize], param: usize) -> Self {
        GateSpec { h: h.into(), wires: wires.to_vec(), param: Some(param), angle: None, scale: -1.0 }
    }

    pub fn fixed(h: &str, wires: &[usize], angle: f64) -> Self {
        GateSpec { h: h.into(), wires: wires.to_vec(), param: None, angle: Some(angle), scale: -1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitJson {
    pub n_qubits: usize,
    pub n_params: usize,
    pub gates: Vec<GateSpec>,
}

#[derive(Clone, Debug)]
pub struct CircuitSpec {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
    source: CircuitJson,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, n_params: usize, gates: Vec<GateSpec>) -> Result<Self> {
        Self::from_json_struct(CircuitJson { n_qubits, n_params, gates })
    }

    pub fn from_json_struct(src: CircuitJson) -> Result<Self> {
        let n = src.n_qubits;
        if n == 0 || n > MAX_SIM_QUBITS.min(MAX_QUBITS) {
            return Err(Error::Spec(format!("n_qubits must be in 1..={MAX_SIM_QUBITS}, got {n}")));
        }
        let mut used = vec![false; src.n_params];
        let mut gates = Vec::with_capacity(src.gates.len());
        for (k, g) in src.gates.iter().enumerate() {
            let ctx = |msg: String| Error::Spec(format!("gate {k}: {msg}"));
            if g.wires.is_empty() {
                return Err(ctx("no wires".into()));
            }
            let mut seen = vec![false; n];
            for &w in &g.wires {
                if w >= n {
                    return Err(ctx(format!("wire {w} out of range")));
                }
                if seen[w] {
                    return Err(ctx(format!("wire {w} repeated")));
                }
                seen[w] = true;
            }
            let generator = PauliSum::parse_n(&g.h, g.wires.len())
                .map_err(|e| ctx(format!("generator {:?}: {e}", g.h)))?;
            if !generator.is_hermitian(1e-12) {
                return Err(ctx("generator is not Hermitian".into()));
            }
            match (g.param, g.angle) {
                (Some(j), _) => {
                    if j >= src.n_params {
                        return Err(ctx(format!("param {j} out of range")));
                    }
                    if used[j] {
                        return Err(ctx(format!("param {j} used by more than one gate")));
                    }
                    used[j] = true;
                }
                (None, Some(a)) if a.is_finite() => {}
                (None, _) => return Err(ctx("needs a param index or a finite angle".into())),
            }
            if !g.scale.is_finite() {
                return Err(ctx("scale must be finite".into()));
            }
            let (eig_values, eig_vectors) = nummat::eigh(&generator.to_matrix());
            let full_generator = generator.embed(&g.wires, n)?;
            gates.push(Gate {
                generator,
                wires: g.wires.clone(),
                param: g.param,
                angle: if g.param.is_some() { None } else { g.angle },
                scale: g.scale,
                eig_values,
                eig_vectors,
                full_generator,
            });
        }
        Ok(CircuitSpec { n_qubits: n, n_params: src.n_params, gates, source: src })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let src: CircuitJson =
            serde_json::from_str(text).map_err(|e| Error::Spec(format!("circuit JSON: {e}")))?;
        Self::from_json_struct(src)
    }

    pub fn to_json_struct(&self) -> &CircuitJson {
        &self.source
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.source).expect("circuit serializes")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Index of the gate driven by parameter `j`, if any.
    pub fn gate_of_param(&self, j: usize) -> Option<usize> {
        self.gates.iter().position(|g| g.param == Some(j))
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.n_params,
                theta.len()
            )));
        }
        Ok(())
    }

    fn check_state(&self, psi: &ComplexVector) -> Result<()> {
        if psi.len() != self.dim() {
            return Err(Error::Shape(format!(
                "state has length {}, register needs {}",
                psi.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_param(&self, j: usize) -> Result<()> {
        if j >= self.n_params {
            return Err(Error::Shape(format!("parameter {j} out of range 0..{}", self.n_params)));
        }
        Ok(())
    }

    /// Applies gates `range` in order to `psi`.
    pub fn apply_gates(
        &self,
        theta: &[f64],
        psi: &mut ComplexVector,
        range: std::ops::Range<usize>,
    ) {
        for g in &self.gates[range] {
            let u = g.local_unitary(g.angle_at(theta));
            apply_local(psi, self.n_qubits, &g.wires, &u);
        }
    }

    /// Applies the inverses of gates `range`, last gate first.
    pub fn apply_gates_inverse(
        &self,
        theta: &[f64],
        psi: &mut ComplexVector,
        range: std::ops::Range<usize>,
    ) {
        for g in self.gates[range].iter().rev() {
            let u = g.local_unitary(-g.angle_at(theta));
            apply_local(psi, self.n_qubits, &g.wires, &u);
        }
    }

    /// `U(θ) ψ0`.
    pub fn apply(&self, theta: &[f64], psi0: &ComplexVector) -> Result<ComplexVector> {
        self.check_theta(theta)?;
        self.check_state(psi0)?;
        let mut psi = psi0.clone();
        self.apply_gates(theta, &mut psi, 0..self.gates.len());
        Ok(psi)
    }

    fn range_unitary(&self, theta: &[f64], range: std::ops::Range<usize>) -> ComplexMatrix {
        let d = self.dim();
        let mut u = ComplexMatrix::identity(d, d);
        for mut col in u.column_iter_mut() {
            let mut v = col.clone_owned();
            self.apply_gates(theta, &mut v, range.clone());
            col.copy_from(&v);
        }
        u
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        self.check_theta(theta)?;
        Ok(self.range_unitary(theta, 0..self.gates.len()))
    }

    /// Generator of the `j`-th derivative, transported to one end:
    /// `∂_j U = U Ω^R = Ω^L U`. Zero when no gate uses parameter `j`.
    pub fn effective_generator(&self, theta: &[f64], j: usize, side: Side) -> Result<ComplexMatrix> {
        self.check_theta(theta)?;
        self.check_param(j)?;
        let d = self.dim();
        let Some(g) = self.gate_of_param(j) else {
            return Ok(ComplexMatrix::zeros(d, d));
        };
        let gen = self.gates[g].skew_generator();
        Ok(match side {
            Side::Right => {
                let before = self.range_unitary(theta, 0..g);
                before.adjoint() * gen * before
            }
            Side::Left => {
                let after = self.range_unitary(theta, g + 1..self.gates.len());
                &after * gen * after.adjoint()
            }
        })
    }

    /// `∂_j (U(θ) ψ0)`.
    pub fn state_partial(&self, theta: &[f64], j: usize, psi0: &ComplexVector) -> Result<ComplexVector> {
        self.check_theta(theta)?;
        self.check_state(psi0)?;
        self.check_param(j)?;
        let Some(g) = self.gate_of_param(j) else {
            return Ok(ComplexVector::zeros(self.dim()));
        };
        let mut psi = psi0.clone();
        self.apply_gates(theta, &mut psi, 0..g + 1);
        let gate = &self.gates[g];
        let mut v = gate.full_generator.apply(&psi) * (I * gate.scale);
        self.apply_gates(theta, &mut v, g + 1..self.gates.len());
        Ok(v)
    }

    /// All partial derivatives of the output state.
    pub fn state_partials(&self, theta: &[f64], psi0: &ComplexVector) -> Result<Vec<ComplexVector>> {
        (0..self.n_params).map(|j| self.state_partial(theta, j, psi0)).collect()
    }

    /// `<ψ(θ)| M |ψ(θ)>`.
    pub fn cost(&self, theta: &[f64], psi0: &ComplexVector, observable: &PauliSum) -> Result<f64> {
        check_observable(observable, self.n_qubits)?;
        let psi = self.apply(theta, psi0)?;
        Ok(observable.expectation(&psi).re)
    }

    /// `∂_j <M> = 2 Re <ψ| M |∂_j ψ>`.
    pub fn cost_partial(
        &self,
        theta: &[f64],
        j: usize,
        psi0: &ComplexVector,
        observable: &PauliSum,
    ) -> Result<f64> {
        check_observable(observable, self.n_qubits)?;
        let psi = self.apply(theta, psi0)?;
        let dpsi = self.state_partial(theta, j, psi0)?;
        Ok(2.0 * psi.dotc(&observable.apply(&dpsi)).re)
    }

    /// The same derivative through `<ψ0| [U†MU, Ω^R_j] |ψ0>`, using dense matrices.
    pub fn cost_partial_commutator(
        &self,
        theta: &[f64],
        j: usize,
        psi0: &ComplexVector,
        observable: &PauliSum,
    ) -> Result<f64> {
        check_observable(observable, self.n_qubits)?;
        self.check_state(psi0)?;
        let u = self.unitary(theta)?;
        let m = u.adjoint() * observable.to_matrix() * &u;
        let omega = self.effective_generator(theta, j, Side::Right)?;
        let c = nummat::commutator(&m, &omega);
        Ok(psi0.dotc(&(c * psi0)).re)
    }

    /// Whether all gate generators commute pairwise.
    pub fn generators_commute(&self) -> bool {
        for a in 0..self.gates.len() {
            for b in a + 1..self.gates.len() {
                if !self.gates[a]
                    .full_generator
                    .commutes_with(&self.gates[b].full_generator, 1e-12)
                {
                    return false;
                }
            }
        }
        true
    }

    /// Lie closure of the parametrized gate generators.
    pub fn dla(&self) -> Result<Subspace> {
        let gens: Vec<ComplexMatrix> = self
            .gates
            .iter()
            .filter(|g| g.param.is_some())
            .map(|g| g.skew_generator())
            .collect();
        liealg::lie_closure(self.dim(), &gens)
    }
}

/// Scalar cost of the output state.
#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec {
    /// `<M>`.
    Observable(PauliSum),
    /// `Σ_k <M_k>²`.
    SumOfSquares(Vec<PauliSum>),
}

impl From<PauliSum> for CostSpec {
    fn from(m: PauliSum) -> Self {
        CostSpec::Observable(m)
    }
}

impl CostSpec {
    pub fn check(&self, n_qubits: usize) -> Result<()> {
        match self {
            CostSpec::Observable(m) => check_observable(m, n_qubits),
            CostSpec::SumOfSquares(ms) => {
                if ms.is_empty() {
                    return Err(Error::Spec("sum of squares needs at least one observable".into()));
                }
                ms.iter().try_for_each(|m| check_observable(m, n_qubits))
            }
        }
    }

    pub fn value(&self, psi: &ComplexVector) -> f64 {
        match self {
            CostSpec::Observable(m) => m.expectation(psi).re,
            CostSpec::SumOfSquares(ms) => ms.iter().map(|m| m.expectation(psi).re.powi(2)).sum(),
        }
    }

    /// Observable whose expectation has the same first derivative at `psi`:
    /// `M` itself, or `Σ_k 2<M_k> M_k`.
    pub fn linearized(&self, psi: &ComplexVector) -> PauliSum {
        match self {
            CostSpec::Observable(m) => m.clone(),
            CostSpec::SumOfSquares(ms) => {
                let mut out = PauliSum::zero(ms[0].n_qubits());
                for m in ms {
                    let e = m.expectation(psi).re;
                    out = out.add(&m.scale(Complex64::new(2.0 * e, 0.0)));
                }
                out
            }
        }
    }

    /// Cost and all partial derivatives at `θ`.
    pub fn value_and_partials(
        &self,
        c: &CircuitSpec,
        theta: &[f64],
        psi0: &ComplexVector,
    ) -> Result<(f64, Vec<f64>)> {
        self.check(c.n_qubits())?;
        let psi = c.apply(theta, psi0)?;
        let m = self.linearized(&psi);
        let m_psi = m.apply(&psi);
        let partials = (0..c.n_params())
            .map(|j| Ok(2.0 * m_psi.dotc(&c.state_partial(theta, j, psi0)?).re))
            .collect::<Result<Vec<f64>>>()?;
        Ok((self.value(&psi), partials))
    }
}

pub fn check_observable(m: &PauliSum, n_qubits: usize) -> Result<()> {
    if m.n_qubits() != n_qubits {
        return Err(Error::Shape(format!(
            "observable acts on {} qubits, circuit has {n_qubits}",
            m.n_qubits()
        )));
    }
    if !m.is_hermitian(1e-12) {
        return Err(Error::Contract("observable is not Hermitian".into()));
    }
    Ok(())
}

/// Applies a `2^k × 2^k` matrix to `wires` of an `n`-qubit state. The first
/// wire is the most significant bit of the local index.
pub fn apply_local(psi: &mut ComplexVector, n: usize, wires: &[usize], m: &ComplexMatrix) {
    let k = wires.len();
    let local = 1usize << k;
    let bits: Vec<usize> = wires.iter().map(|w| n - 1 - w).collect();
    let mask: usize = bits.iter().map(|b| 1usize << b).sum();
    let offsets: Vec<usize> = (0..local)
        .map(|li| {
            bits.iter()
                .enumerate()
                .filter(|(j, _)| (li >> (k - 1 - j)) & 1 == 1)
                .map(|(_, b)| 1usize << b)
                .sum()
        })
        .collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); local];
    for base in 0..psi.len() {
        if base & mask != 0 {
            continue;
        }
        for (li, off) in offsets.iter().enumerate() {
            buf[li] = psi[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cidx, b) in buf.iter().enumerate() {
                acc += m[(r, cidx)] * b;
            }
            psi[base | off] = acc;
        }
    }
}

/// Product state from a label over `0`, `1`, `+`, `-`.
pub fn basis_state(label: &str) -> Result<ComplexVector> {
    let label = label.trim();
    if label.is_empty() || label.len() > MAX_SIM_QUBITS {
        return Err(Error::Spec(format!("invalid state label {label:?}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = ComplexVector::from_element(1, Complex64::new(1.0, 0.0));
    for ch in label.chars() {
        let q = match ch {
            '0' => [1.0, 0.0],
            '1' => [0.0, 1.0],
            '+' => [h, h],
            '-' => [h, -h],
            other => return Err(Error::Spec(format!("invalid state label character {other:?}"))),
        };
        let v = ComplexVector::from_vec(vec![Complex64::new(q[0], 0.0), Complex64::new(q[1], 0.0)]);
        out = nummat::kron_vec(&out, &v);
    }
    Ok(out)
}

/// Normalized state from amplitudes. Rejects a zero vector.
pub fn state_from_amplitudes(amps: &[Complex64]) -> Result<ComplexVector> {
    if amps.is_empty() || !amps.len().is_power_of_two() {
        return Err(Error::Spec(format!("{} amplitudes is not a power of two", amps.len())));
    }
    let v = ComplexVector::from_column_slice(amps);
    let norm = v.norm();
    if norm.is_nan() || norm <= 0.0 || norm.is_infinite() {
        return Err(Error::Spec("amplitude vector has zero or non-finite norm".into()));
    }
    Ok(v / Complex64::new(norm, 0.0))
}

/// Seeded product of uniformly random single-qubit pure states.
pub fn random_product_state(n: usize, seed: u64) -> ComplexVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ComplexVector::from_element(1, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        let cos_polar: f64 = 1.0 - 2.0 * rng.random::<f64>();
        let polar = cos_polar.clamp(-1.0, 1.0).acos();
        let azimuth = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let v = ComplexVector::from_vec(vec![
            Complex64::new((polar / 2.0).cos(), 0.0),
            Complex64::from_polar((polar / 2.0).sin(), azimuth),
        ]);
        out = nummat::kron_vec(&out, &v);
    }
    out
}

/// Seeded parameters drawn uniformly from `[0, 2π)`.
pub fn random_theta(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..p)
        .map(|_| 2.0 * std::f64::consts::PI * rng.random::<f64>())
        .collect()
}
