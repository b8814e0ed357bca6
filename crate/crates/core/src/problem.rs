//! JSON problem specifications and the built-in examples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{self, CircuitJson, CircuitSpec, CostSpec, GateSpec};
use crate::error::{Error, Result};
use crate::natgrad::Method;
use crate::nummat::ComplexVector;
use crate::pauli::PauliSum;
use crate::tangent::{Action, SymmetrySpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryJson {
    pub generators: Vec<String>,
    pub action: Action,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostJson {
    Observable(String),
    SumOfSquares(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonitorJson {
    pub observable: String,
    /// Number of leading gates applied before measuring. All gates if absent.
    #[serde(default)]
    pub after_gates: Option<usize>,
}

fn default_lr() -> f64 {
    0.1
}
fn default_max_iter() -> usize {
    2000
}
fn default_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerJson {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    #[serde(default)]
    pub monitor: Vec<MonitorJson>,
    #[serde(default)]
    pub record_vector_potential: bool,
}

fn default_method() -> Method {
    Method::Gd
}

impl Default for OptimizerJson {
    fn default() -> Self {
        OptimizerJson {
            method: Method::Gd,
            lr: default_lr(),
            max_iter: default_max_iter(),
            tol: default_tol(),
            seed: 0,
            theta0: None,
            monitor: Vec::new(),
            record_vector_potential: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemJson {
    pub circuit: CircuitJson,
    #[serde(default)]
    pub initial_state: Option<serde_json::Value>,
    #[serde(default)]
    pub symmetry: Option<SymmetryJson>,
    #[serde(default)]
    pub observable: Option<String>,
    #[serde(default)]
    pub cost: Option<CostJson>,
    #[serde(default)]
    pub optimizer: Option<OptimizerJson>,
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub circuit: CircuitSpec,
    pub psi0: ComplexVector,
    pub symmetry: Option<SymmetrySpec>,
    pub cost: Option<CostSpec>,
    pub optimizer: OptimizerJson,
    pub source: ProblemJson,
}

fn spec_err(e: Error) -> Error {
    match e {
        Error::Parse(m) | Error::Shape(m) => Error::Spec(m),
        other => other,
    }
}

/// Parses the initial state: a label over `0 1 + -`, `"random_product:<seed>"`,
/// or a list of amplitudes given as numbers or `[re, im]` pairs.
pub fn parse_initial_state(value: Option<&serde_json::Value>, n: usize) -> Result<ComplexVector> {
    let psi = match value {
        None => circuit::basis_state(&"0".repeat(n))?,
        Some(serde_json::Value::String(s)) => {
            if let Some(seed) = s.strip_prefix("random_product:") {
                let seed: u64 = seed
                    .trim()
                    .parse()
                    .map_err(|_| Error::Spec(format!("invalid seed in {s:?}")))?;
                circuit::random_product_state(n, seed)
            } else {
                circuit::basis_state(s)?
            }
        }
        Some(serde_json::Value::Array(items)) => {
            let amps = items
                .iter()
                .map(|v| match v {
                    serde_json::Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
                    serde_json::Value::Array(pair) if pair.len() == 2 => {
                        let re = pair[0].as_f64();
                        let im = pair[1].as_f64();
                        match (re, im) {
                            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                            _ => Err(Error::Spec("amplitude pair must hold two numbers".into())),
                        }
                    }
                    _ => Err(Error::Spec("amplitudes must be numbers or [re, im] pairs".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            circuit::state_from_amplitudes(&amps)?
        }
        Some(other) => return Err(Error::Spec(format!("unsupported initial_state {other}"))),
    };
    if psi.len() != 1 << n {
        return Err(Error::Spec(format!(
            "initial state has length {}, circuit needs {}",
            psi.len(),
            1usize << n
        )));
    }
    Ok(psi)
}

impl ProblemSpec {
    pub fn from_json_struct(src: ProblemJson) -> Result<Self> {
        let circuit = CircuitSpec::from_json_struct(src.circuit.clone())?;
        let n = circuit.n_qubits();
        let psi0 = parse_initial_state(src.initial_state.as_ref(), n)?;
        let symmetry = match &src.symmetry {
            None => None,
            Some(s) => {
                if s.generators.is_empty() {
                    return Err(Error::Spec("symmetry needs at least one generator".into()));
                }
                let gens: Vec<&str> = s.generators.iter().map(String::as_str).collect();
                Some(SymmetrySpec::from_pauli_strings(n, &gens, s.action).map_err(spec_err)?)
            }
        };
        let parse = |t: &str| PauliSum::parse_n(t, n).map_err(spec_err);
        let cost = match (&src.cost, &src.observable) {
            (Some(CostJson::Observable(m)), _) => Some(CostSpec::Observable(parse(m)?)),
            (Some(CostJson::SumOfSquares(ms)), _) => Some(CostSpec::SumOfSquares(
                ms.iter().map(|m| parse(m)).collect::<Result<_>>()?,
            )),
            (None, Some(m)) => Some(CostSpec::Observable(parse(m)?)),
            (None, None) => None,
        };
        if let Some(c) = &cost {
            c.check(n).map_err(|e| match e {
                Error::Contract(m) => Error::Spec(m),
                other => spec_err(other),
            })?;
        }
        let optimizer = src.optimizer.clone().unwrap_or_default();
        if let Some(t0) = &optimizer.theta0 {
            if t0.len() != circuit.n_params() {
                return Err(Error::Spec(format!(
                    "theta0 has {} entries, circuit has {} parameters",
                    t0.len(),
                    circuit.n_params()
                )));
            }
        }
        for m in &optimizer.monitor {
            parse(&m.observable)?;
            if m.after_gates.is_some_and(|k| k > circuit.gates().len()) {
                return Err(Error::Spec(format!("monitor after_gates exceeds gate count for {:?}", m.observable)));
            }
        }
        Ok(ProblemSpec { circuit, psi0, symmetry, cost, optimizer, source: src })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let src: ProblemJson =
            serde_json::from_str(text).map_err(|e| Error::Spec(format!("problem JSON: {e}")))?;
        Self::from_json_struct(src)
    }

    /// Loads a file path or a built-in spec named `builtin:<name>`.
    pub fn load(path: &str) -> Result<Self> {
        if let Some(name) = path.strip_prefix("builtin:") {
            return Self::from_json_struct(builtin(name)?);
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("cannot read {path}: {e}")))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.source).expect("problem serializes")
    }

    /// Starting parameters: explicit `theta0` or seeded uniform draws.
    pub fn theta0(&self, seed: u64) -> Vec<f64> {
        self.optimizer
            .theta0
            .clone()
            .unwrap_or_else(|| circuit::random_theta(self.circuit.n_params(), seed))
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["entangling", "u1_in_u2", "phase_in_u2", "su2_tensor"];

/// Two-qubit entangling circuit: `R_Y` on each qubit, then `CR_X` with qubit 1
/// as control and qubit 0 as target. The cost is the squared Bloch vector of
/// qubit 0, minimized under its local `su(2)` symmetry.
pub fn entangling_circuit() -> CircuitJson {
    CircuitJson {
        n_qubits: 2,
        n_params: 3,
        gates: vec![
            GateSpec::param("0.5*Y", &[0], 0),
            GateSpec::param("0.5*Y", &[1], 1),
            GateSpec::param("0.25*XI - 0.25*XZ", &[0, 1], 2),
        ],
    }
}

fn single_qubit_circuit() -> CircuitJson {
    CircuitJson {
        n_qubits: 1,
        n_params: 3,
        gates: vec![
            GateSpec::param("0.5*Y", &[0], 0),
            GateSpec::param("0.5*X", &[0], 1),
            GateSpec::param("-1*I", &[0], 2),
        ],
    }
}

pub fn builtin(name: &str) -> Result<ProblemJson> {
    let json = |v: serde_json::Value| -> ProblemJson {
        serde_json::from_value(v).expect("built-in spec is well formed")
    };
    Ok(match name {
        "entangling" => json(serde_json::json!({
            "circuit": entangling_circuit(),
            "initial_state": "random_product:0",
            "symmetry": {"generators": ["XI", "YI", "ZI"], "action": "left"},
            "cost": {"sum_of_squares": ["XI", "YI", "ZI"]},
            "optimizer": {
                "method": "gd", "lr": 0.5, "max_iter": 2000, "tol": 1e-9, "seed": 0,
                "monitor": [
                    {"observable": "XI", "after_gates": 2},
                    {"observable": "IZ", "after_gates": 2}
                ],
                "record_vector_potential": true
            }
        })),
        "u1_in_u2" => json(serde_json::json!({
            "circuit": single_qubit_circuit(),
            "initial_state": "+",
            "symmetry": {"generators": ["Z"], "action": "theta"},
            "observable": "Z",
            "optimizer": {"method": "gd", "lr": 0.2, "max_iter": 2000, "tol": 1e-9, "seed": 0}
        })),
        "phase_in_u2" => json(serde_json::json!({
            "circuit": single_qubit_circuit(),
            "initial_state": "+",
            "symmetry": {"generators": ["I"], "action": "left"},
            "observable": "Z",
            "optimizer": {"method": "qng", "lr": 0.2, "max_iter": 2000, "tol": 1e-9, "seed": 0}
        })),
        "su2_tensor" => json(serde_json::json!({
            "circuit": {"n_qubits": 2, "n_params": 1, "gates": [
                {"h": "0.5*XX + 0.5*YY + 0.5*ZZ", "wires": [0, 1], "param": 0}
            ]},
            "initial_state": "01",
            "symmetry": {"generators": ["XI + IX", "YI + IY", "ZI + IZ"], "action": "left"},
            "observable": "ZI - IZ",
            "optimizer": {"method": "gd", "lr": 0.2, "max_iter": 2000, "tol": 1e-9, "seed": 0}
        })),
        other => {
            return Err(Error::Spec(format!(
                "unknown built-in spec {other:?}; available: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}
