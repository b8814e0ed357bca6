//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid spec or arguments, 3 algebra contract
//! violation, 4 optimizer did not converge.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::liealg;
use crate::natgrad::{self, Monitor, OptSettings};
use crate::pauli::PauliSum;
use crate::problem::ProblemSpec;
use crate::symgrad;
use crate::tangent::SymmetrySpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_ALGEBRA: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "symflow", version, about = "Symmetry-projected derivatives of parametrized circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GradKind {
    Partial,
    Equivariant,
    Covariant,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Split u(d) along the symmetry and print each piece.
    Decompose {
        /// Problem JSON path or `builtin:<name>`.
        spec: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Derivative report at a parameter point.
    Grad {
        spec: String,
        /// Comma-separated parameters. Seeded random values if absent.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, value_enum, default_value_t = GradKind::Partial)]
        kind: GradKind,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the optimizer block of a spec and write a CSV trace.
    Optimize {
        spec: String,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Print a built-in problem spec as JSON.
    Builtin { name: String },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Contract(_) | Error::NotSubalgebra(_) | Error::ClosureNotConverged(_) => EXIT_ALGEBRA,
        Error::NotConverged(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_SPEC,
    }
}

fn emit(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn require_symmetry(p: &ProblemSpec) -> Result<&SymmetrySpec> {
    p.symmetry
        .as_ref()
        .ok_or_else(|| Error::Spec("spec has no symmetry block".into()))
}

pub fn parse_theta(text: &str, p: usize) -> Result<Vec<f64>> {
    let vals = text
        .split(',')
        .map(|s| {
            let s = s.trim();
            match s {
                "pi" => Ok(std::f64::consts::PI),
                "-pi" => Ok(-std::f64::consts::PI),
                _ => s.parse::<f64>().map_err(|_| Error::Spec(format!("invalid theta entry {s:?}"))),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != p {
        return Err(Error::Spec(format!("--theta has {} entries, circuit has {p} parameters", vals.len())));
    }
    Ok(vals)
}

pub fn cmd_decompose(spec: &str, out: Option<&str>) -> Result<String> {
    let p = ProblemSpec::load(spec)?;
    let sym = require_symmetry(&p)?;
    let dec = liealg::four_decomposition(sym.generators())?;
    let [r, c, z, t] = dec.dims();
    let mut text = format!("dims rest={r} commutant_reduced={c} center={z} t_reduced={t}\n");
    text.push_str(&dec.report());
    emit(out, &text)?;
    Ok(text)
}

/// Derivative report of the given kind at `theta`, with the cost value.
pub fn grad_report(p: &ProblemSpec, theta: &[f64], kind: GradKind) -> Result<serde_json::Value> {
    let cost = p.cost.as_ref().ok_or_else(|| Error::Spec("spec has no observable or cost".into()))?;
    let c = &p.circuit;
    let psi = c.apply(theta, &p.psi0)?;
    let value = cost.value(&psi);
    let kind_name = match kind {
        GradKind::Partial => "partial",
        GradKind::Equivariant => "equivariant",
        GradKind::Covariant => "covariant",
    };
    let mut report = match kind {
        GradKind::Partial => {
            let (_, g) = cost.value_and_partials(c, theta, &p.psi0)?;
            json!({"m": [], "omega": [], "gram": [], "vector_potential": [], "partial": g, "projected": g})
        }
        GradKind::Equivariant => {
            symgrad::equivariant_derivative_cost(require_symmetry(p)?, c, theta, &p.psi0, cost)?.to_json()
        }
        GradKind::Covariant => {
            symgrad::covariant_derivative_cost(require_symmetry(p)?, c, theta, &p.psi0, cost)?.to_json()
        }
    };
    let obj = report.as_object_mut().expect("report is an object");
    obj.insert("kind".into(), json!(kind_name));
    obj.insert("theta".into(), json!(theta));
    obj.insert("cost".into(), json!(value));
    Ok(report)
}

pub fn cmd_grad(spec: &str, theta: Option<&str>, kind: GradKind, seed: Option<u64>, out: Option<&str>) -> Result<String> {
    let p = ProblemSpec::load(spec)?;
    let theta = match theta {
        Some(t) => parse_theta(t, p.circuit.n_params())?,
        None => p.theta0(seed.unwrap_or(p.optimizer.seed)),
    };
    let mut text = serde_json::to_string_pretty(&grad_report(&p, &theta, kind)?)?;
    text.push('\n');
    emit(out, &text)?;
    Ok(text)
}

pub fn monitor_for(p: &ProblemSpec) -> Result<Option<Monitor<'_>>> {
    let c: &CircuitSpec = &p.circuit;
    let n = c.n_qubits();
    let mut names = Vec::new();
    let mut probes = Vec::new();
    for m in &p.optimizer.monitor {
        let obs = PauliSum::parse_n(&m.observable, n)?;
        let k = m.after_gates.unwrap_or(c.gates().len());
        names.push(format!("{}@{k}", m.observable.trim()));
        probes.push((obs, k));
    }
    let sym = if p.optimizer.record_vector_potential { p.symmetry.as_ref() } else { None };
    if let Some(s) = sym {
        for a in 0..s.generators().dim() {
            for j in 0..c.n_params() {
                names.push(format!("A_{a}_{j}"));
            }
        }
    }
    if names.is_empty() {
        return Ok(None);
    }
    let cost = p.cost.clone();
    let psi0 = p.psi0.clone();
    Ok(Some(Monitor {
        names,
        eval: Box::new(move |theta: &[f64]| {
            let mut vals = Vec::new();
            for (obs, k) in &probes {
                let mut psi = psi0.clone();
                c.apply_gates(theta, &mut psi, 0..*k);
                vals.push(obs.expectation(&psi).re);
            }
            if let (Some(s), Some(cost)) = (sym, cost.as_ref()) {
                let r = symgrad::covariant_derivative_cost(s, c, theta, &psi0, cost)?;
                vals.extend(r.vector_potential.transpose().iter().copied());
            }
            Ok(vals)
        }),
    }))
}

pub struct OptimizeOutcome {
    pub trace: natgrad::OptTrace,
    pub summary: String,
}

pub fn cmd_optimize(
    spec: &str,
    out: Option<&str>,
    seed: Option<u64>,
    max_iter: Option<usize>,
    lr: Option<f64>,
) -> Result<OptimizeOutcome> {
    let p = ProblemSpec::load(spec)?;
    let cost = p.cost.as_ref().ok_or_else(|| Error::Spec("spec has no observable or cost".into()))?;
    let o = &p.optimizer;
    let settings = OptSettings {
        method: o.method,
        lr: lr.unwrap_or(o.lr),
        max_iter: max_iter.unwrap_or(o.max_iter),
        tol: o.tol,
    };
    let theta0 = p.theta0(seed.unwrap_or(o.seed));
    let monitor = monitor_for(&p)?;
    let trace = natgrad::optimize(&settings, p.symmetry.as_ref(), &p.circuit, &theta0, &p.psi0, cost, monitor.as_ref())?;
    let mut csv_bytes = Vec::new();
    trace.write_csv(&mut csv_bytes)?;
    match out {
        Some(path) => std::fs::write(path, &csv_bytes)?,
        None => std::io::stdout().write_all(&csv_bytes)?,
    }
    let last = trace.last().expect("trace has at least one record");
    let mut summary = format!(
        "final iter={} cost={:e} grad_norm={:e} converged={} theta=[{}]",
        last.iter,
        last.cost,
        last.grad_norm,
        trace.converged,
        last.theta.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
    );
    for (name, v) in trace.extra_names.iter().zip(&last.extras) {
        if !name.starts_with("A_") {
            summary.push_str(&format!(" {name}={v:e}"));
        }
    }
    Ok(OptimizeOutcome { trace, summary })
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SPEC } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Decompose { spec, out } => cmd_decompose(spec, out.as_deref()).map(|_| EXIT_OK),
        Command::Grad { spec, theta, kind, out, seed } => {
            cmd_grad(spec, theta.as_deref(), *kind, *seed, out.as_deref()).map(|_| EXIT_OK)
        }
        Command::Optimize { spec, out, seed, max_iter, lr } => {
            cmd_optimize(spec, out.as_deref(), *seed, *max_iter, *lr).map(|o| {
                if out.is_some() {
                    println!("{}", o.summary);
                } else {
                    eprintln!("{}", o.summary);
                }
                if o.trace.converged {
                    EXIT_OK
                } else {
                    eprintln!("optimizer did not reach the gradient tolerance");
                    EXIT_NOT_CONVERGED
                }
            })
        }
        Command::Builtin { name } => crate::problem::builtin(name).map(|b| {
            println!("{}", serde_json::to_string_pretty(&b).expect("spec serializes"));
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
