//! Metrics on parameter space and the optimizers built on them.

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSpec, CostSpec};
use crate::error::{Error, Result};
use crate::nummat::{self, real_overlap, ComplexVector, RealMatrix, RealVector};
use crate::symgrad;
use crate::tangent::{self, SymmetrySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    FubiniStudy,
    Covariant,
}

#[derive(Clone, Debug)]
pub struct MetricMatrix {
    pub entries: RealMatrix,
    pub kind: MetricKind,
}

/// `F_jk = Re<∂_jψ|∂_kψ> − <∂_jψ|ψ><ψ|∂_kψ>`.
pub fn fubini_study(c: &CircuitSpec, theta: &[f64], psi0: &ComplexVector) -> Result<MetricMatrix> {
    let psi = c.apply(theta, psi0)?;
    let partials = c.state_partials(theta, psi0)?;
    let p = partials.len();
    let overlaps: Vec<_> = partials.iter().map(|d| psi.dotc(d)).collect();
    let mut f = RealMatrix::zeros(p, p);
    for j in 0..p {
        for k in j..p {
            let v = real_overlap(&partials[j], &partials[k]) - (overlaps[j].conj() * overlaps[k]).re;
            f[(j, k)] = v;
            f[(k, j)] = v;
        }
    }
    Ok(MetricMatrix { entries: f, kind: MetricKind::FubiniStudy })
}

/// Gram matrix of the covariant state derivatives:
/// `F^S_jk = ⟪∂_j|∂_k⟫ − ⟪∂_j|T_a⟫⟪T_a|∂_k⟫` over an orthonormal vertical frame.
pub fn covariant_metric(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
) -> Result<MetricMatrix> {
    let frame = tangent::vertical_frame(sym, c, theta, psi0)?;
    let partials = c.state_partials(theta, psi0)?;
    let p = partials.len();
    let proj: Vec<Vec<f64>> = partials
        .iter()
        .map(|d| frame.onb.iter().map(|t| real_overlap(t, d)).collect())
        .collect();
    let mut f = RealMatrix::zeros(p, p);
    for j in 0..p {
        for k in j..p {
            let vertical: f64 = proj[j].iter().zip(&proj[k]).map(|(a, b)| a * b).sum();
            let v = real_overlap(&partials[j], &partials[k]) - vertical;
            f[(j, k)] = v;
            f[(k, j)] = v;
        }
    }
    Ok(MetricMatrix { entries: f, kind: MetricKind::Covariant })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gd,
    Qng,
    Cqng,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Method::Gd),
            "qng" => Ok(Method::Qng),
            "cqng" => Ok(Method::Cqng),
            other => Err(Error::Spec(format!("unknown optimizer method {other:?}"))),
        }
    }
}

/// `θ − lr · ½ F⁺ g`.
pub fn natural_step(theta: &[f64], metric: &RealMatrix, grad: &RealVector, lr: f64) -> Result<Vec<f64>> {
    let dir = nummat::pinv_psd(metric, nummat::rank_tol())? * grad;
    Ok(theta.iter().zip(dir.iter()).map(|(t, d)| t - lr * 0.5 * d).collect())
}

fn check_lr(lr: f64) -> Result<()> {
    if lr.is_nan() || lr <= 0.0 || lr.is_infinite() {
        return Err(Error::Spec(format!("learning rate must be positive, got {lr}")));
    }
    Ok(())
}

/// One covariant natural-gradient step: `θ − lr · ½ (F^S)⁺ ∇^S C`.
pub fn cqng_step(
    sym: &SymmetrySpec,
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    cost: &CostSpec,
    lr: f64,
) -> Result<Vec<f64>> {
    check_lr(lr)?;
    let grad = symgrad::covariant_derivative_cost(sym, c, theta, psi0, cost)?.projected;
    let metric = covariant_metric(sym, c, theta, psi0)?;
    natural_step(theta, &metric.entries, &grad, lr)
}

/// One quantum natural-gradient step: `θ − lr · ½ F⁺ ∇C`.
pub fn qng_step(
    c: &CircuitSpec,
    theta: &[f64],
    psi0: &ComplexVector,
    cost: &CostSpec,
    lr: f64,
) -> Result<Vec<f64>> {
    check_lr(lr)?;
    let (_, grad) = cost.value_and_partials(c, theta, psi0)?;
    let metric = fubini_study(c, theta, psi0)?;
    natural_step(theta, &metric.entries, &RealVector::from_vec(grad), lr)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptRecord {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub cost: f64,
    pub grad_norm: f64,
    pub extras: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct OptTrace {
    pub extra_names: Vec<String>,
    pub records: Vec<OptRecord>,
    pub converged: bool,
}

impl OptTrace {
    pub fn last(&self) -> Option<&OptRecord> {
        self.records.last()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let p = self.records.first().map_or(0, |r| r.theta.len());
        let mut header = vec!["iter".to_string()];
        header.extend((0..p).map(|k| format!("theta_{k}")));
        header.push("cost".into());
        header.push("grad_norm".into());
        header.extend(self.extra_names.iter().cloned());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.iter.to_string()];
            row.extend(r.theta.iter().map(|t| t.to_string()));
            row.push(r.cost.to_string());
            row.push(r.grad_norm.to_string());
            row.extend(r.extras.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub type MonitorFn<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a>;

/// Extra per-iteration values recorded alongside the trace.
pub struct Monitor<'a> {
    pub names: Vec<String>,
    pub eval: MonitorFn<'a>,
}

#[derive(Clone, Copy, Debug)]
pub struct OptSettings {
    pub method: Method,
    pub lr: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for OptSettings {
    fn default() -> Self {
        OptSettings { method: Method::Gd, lr: 0.1, max_iter: 2000, tol: 1e-9 }
    }
}

/// Runs the chosen update until the gradient norm drops below `tol` or
/// `max_iter` steps have been taken. Records the starting point too.
pub fn optimize(
    settings: &OptSettings,
    sym: Option<&SymmetrySpec>,
    c: &CircuitSpec,
    theta0: &[f64],
    psi0: &ComplexVector,
    cost: &CostSpec,
    monitor: Option<&Monitor<'_>>,
) -> Result<OptTrace> {
    check_lr(settings.lr)?;
    if settings.method == Method::Cqng && sym.is_none() {
        return Err(Error::Spec("method cqng needs a symmetry".into()));
    }
    cost.check(c.n_qubits())?;
    let mut trace = OptTrace {
        extra_names: monitor.map(|m| m.names.clone()).unwrap_or_default(),
        ..Default::default()
    };
    let mut theta = theta0.to_vec();
    for iter in 0..=settings.max_iter {
        let (value, grad) = match settings.method {
            Method::Cqng => {
                let sym = sym.expect("checked above");
                let r = symgrad::covariant_derivative_cost(sym, c, &theta, psi0, cost)?;
                let psi = c.apply(&theta, psi0)?;
                (cost.value(&psi), r.projected)
            }
            _ => {
                let (v, g) = cost.value_and_partials(c, &theta, psi0)?;
                (v, RealVector::from_vec(g))
            }
        };
        let grad_norm = grad.norm();
        let extras = match monitor {
            Some(m) => (m.eval)(&theta)?,
            None => Vec::new(),
        };
        trace.records.push(OptRecord { iter, theta: theta.clone(), cost: value, grad_norm, extras });
        if !grad_norm.is_finite() {
            return Err(Error::NotConverged(format!("gradient became non-finite at iteration {iter}")));
        }
        if grad_norm < settings.tol {
            trace.converged = true;
            break;
        }
        if iter == settings.max_iter {
            break;
        }
        theta = match settings.method {
            Method::Gd => theta.iter().zip(grad.iter()).map(|(t, g)| t - settings.lr * g).collect(),
            Method::Qng => {
                let f = fubini_study(c, &theta, psi0)?;
                natural_step(&theta, &f.entries, &grad, settings.lr)?
            }
            Method::Cqng => {
                let f = covariant_metric(sym.expect("checked above"), c, &theta, psi0)?;
                natural_step(&theta, &f.entries, &grad, settings.lr)?
            }
        };
    }
    Ok(trace)
}
