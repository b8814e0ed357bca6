//! Symmetry-aware derivatives of parametrized quantum circuits.
//!
//! Given a circuit `U(θ)`, an input state and a symmetry subalgebra `t` of
//! u(d), the crate splits derivatives into a part that moves along the
//! symmetry orbit and a part generated by the commutant, and builds
//! optimizers on top of the symmetry-free part.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod liealg;
pub mod natgrad;
pub mod nummat;
pub mod pauli;
pub mod problem;
pub mod symgrad;
pub mod tangent;

pub use circuit::{CircuitSpec, CostSpec, GateSpec, Side};
pub use error::{Error, Result};
pub use liealg::{AlgebraDecomposition, Subspace};
pub use pauli::{PauliSum, PauliWord};
pub use problem::ProblemSpec;
pub use tangent::{Action, BasisKind, SymmetrySpec};
