//! Dense complex and real linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` dense matrices. Eigen- and singular-value
//! decompositions come from `nalgebra`; this module adds the pieces that sit
//! on top: the normalized trace inner product, exponentials of skew-Hermitian
//! matrices, pseudo-inverses of PSD Gram matrices and orthonormalization.

use std::sync::OnceLock;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;
pub type ComplexVector = DVector<Complex64>;
pub type RealVector = DVector<f64>;

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Eigenvalue threshold used when intersecting subspaces through projectors.
pub const INTERSECTION_THRESHOLD: f64 = 1.0 - 1e-8;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Global relative rank tolerance. `SYMFLOW_TOL` overrides the default;
/// values outside `(0, 1)` are ignored.
pub fn rank_tol() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("SYMFLOW_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| *t > 0.0 && *t < 1.0)
            .unwrap_or(DEFAULT_RANK_TOL)
    })
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `Re tr(x† y) / d`. Pauli words times `i` are orthonormal under it.
pub fn trace_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    check_square(x, "x")?;
    if x.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "trace_inner: {:?} vs {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let d = x.nrows();
    if d == 0 {
        return Err(Error::Shape("trace_inner: empty matrix".into()));
    }
    let s: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    Ok(s / d as f64)
}

/// `Re <x|y>` for state vectors.
pub fn real_overlap(x: &ComplexVector, y: &ComplexVector) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub fn inner(x: &ComplexVector, y: &ComplexVector) -> Complex64 {
    x.dotc(y)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &RealMatrix) -> f64 {
    m.iter().map(|z| z.abs()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub fn is_skew_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m + m.adjoint())) <= tol
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Eigen-decomposition of a Hermitian matrix. Uses the Hermitian part of `h`.
pub fn eigh(h: &ComplexMatrix) -> (RealVector, ComplexMatrix) {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    (eig.eigenvalues, eig.eigenvectors)
}

/// `V diag(f(λ)) V†` for a Hermitian eigen-decomposition.
pub fn spectral_apply(
    values: &RealVector,
    vectors: &ComplexMatrix,
    f: impl Fn(f64) -> Complex64,
) -> ComplexMatrix {
    let mut scaled = vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= f(values[k]);
    }
    scaled * vectors.adjoint()
}

/// `exp(scale * x)` for skew-Hermitian `x`. The result is unitary.
pub fn expm_skew(x: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    check_square(x, "expm_skew argument")?;
    let tol = 1e-10 * (1.0 + max_abs(x));
    if !is_skew_hermitian(x, tol) {
        return Err(Error::Contract("expm_skew: argument is not skew-Hermitian".into()));
    }
    // x = -i h with h Hermitian, so exp(s x) = V diag(exp(-i s λ)) V†.
    let h = x * I;
    let (vals, vecs) = eigh(&h);
    Ok(spectral_apply(&vals, &vecs, |l| {
        Complex64::from_polar(1.0, -scale * l)
    }))
}

fn check_symmetric(g: &RealMatrix) -> Result<()> {
    if !g.is_square() {
        return Err(Error::Shape(format!(
            "Gram matrix must be square, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let asym = max_abs_real(&(g - g.transpose()));
    if asym > 1e-10 * (1.0 + max_abs_real(g)) {
        return Err(Error::Contract(format!(
            "Gram matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    Ok(())
}

fn psd_spectrum(g: &RealMatrix) -> Result<(RealVector, RealMatrix)> {
    check_symmetric(g)?;
    let sym = (g + g.transpose()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    Ok((eig.eigenvalues, eig.eigenvectors))
}

fn kept(values: &RealVector, rel_tol: f64) -> Vec<bool> {
    let lmax = values.iter().cloned().fold(0.0, f64::max);
    values
        .iter()
        .map(|&l| lmax > 0.0 && l > rel_tol * lmax)
        .collect()
}

fn psd_function(g: &RealMatrix, rel_tol: f64, f: impl Fn(f64) -> f64) -> Result<RealMatrix> {
    let n = g.nrows();
    if n == 0 {
        return Ok(RealMatrix::zeros(0, 0));
    }
    let (vals, vecs) = psd_spectrum(g)?;
    let keep = kept(&vals, rel_tol);
    let mut out = RealMatrix::zeros(n, n);
    for k in 0..n {
        if keep[k] {
            let v = vecs.column(k);
            out += v * v.transpose() * f(vals[k]);
        }
    }
    Ok(out)
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues at or
/// below `rel_tol * λ_max` are treated as zero.
pub fn pinv_psd(g: &RealMatrix, rel_tol: f64) -> Result<RealMatrix> {
    psd_function(g, rel_tol, |l| 1.0 / l)
}

/// Square root of the pseudo-inverse of a symmetric PSD matrix.
pub fn sqrt_pinv_psd(g: &RealMatrix, rel_tol: f64) -> Result<RealMatrix> {
    psd_function(g, rel_tol, |l| 1.0 / l.sqrt())
}

pub fn numerical_rank_psd(g: &RealMatrix, rel_tol: f64) -> Result<usize> {
    if g.nrows() == 0 {
        return Ok(0);
    }
    let (vals, _) = psd_spectrum(g)?;
    Ok(kept(&vals, rel_tol).into_iter().filter(|&k| k).count())
}

/// Orthonormal basis of the kernel of a real matrix. Singular values at or
/// below `rel_tol * σ_max` count as zero.
pub fn nullspace_real(m: &RealMatrix, rel_tol: f64) -> Vec<RealVector> {
    nullspace_real_scaled(m, rel_tol, 0.0)
}

/// Nullspace with singular values measured against `max(scale, σ_max)`.
/// Use when `m` is a residual whose own size is not a meaningful reference.
pub fn nullspace_real_scaled(m: &RealMatrix, rel_tol: f64, scale: f64) -> Vec<RealVector> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the SVD returns a full right factor.
    let padded = if rows < cols {
        let mut p = RealMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(scale, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= rel_tol * smax)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect()
}

/// Orthonormal basis of the column space of a real matrix.
pub fn range_real(m: &RealMatrix, rel_tol: f64) -> Vec<RealVector> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > rel_tol * smax)
        .map(|(k, _)| u.column(k).into_owned())
        .collect()
}

/// Gram matrix of vectors under the real part of the Hermitian product.
pub fn real_gram<T>(vectors: &[DVector<T>]) -> RealMatrix
where
    T: ComplexField<RealField = f64>,
{
    let n = vectors.len();
    RealMatrix::from_fn(n, n, |a, b| vectors[a].dotc(&vectors[b]).real())
}

/// Orthonormalizes `vectors` given their real Gram matrix.
///
/// A full-rank family is mapped by `√(G⁺)`, which leaves an orthonormal input
/// unchanged. A rank-deficient family yields `rank` vectors built from the
/// eigenvectors of `G`. Both span the same space and give the same projector.
pub fn sym_orthonormalize<T>(
    vectors: &[DVector<T>],
    gram: &RealMatrix,
    rel_tol: f64,
) -> Result<Vec<DVector<T>>>
where
    T: ComplexField<RealField = f64>,
{
    let n = vectors.len();
    if gram.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "Gram matrix is {:?} but {n} vectors were given",
            gram.shape()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let len = vectors[0].len();
    if vectors.iter().any(|v| v.len() != len) {
        return Err(Error::Shape("vectors have different lengths".into()));
    }
    let (vals, vecs) = psd_spectrum(gram)?;
    let keep = kept(&vals, rel_tol);
    let rank = keep.iter().filter(|&&k| k).count();
    let combine = |coeffs: &[f64]| {
        let mut out = DVector::<T>::zeros(len);
        for (v, &w) in vectors.iter().zip(coeffs) {
            if w != 0.0 {
                out.axpy(T::from_real(w), v, T::one());
            }
        }
        out
    };
    if rank == n {
        let s = sqrt_pinv_psd(gram, rel_tol)?;
        return Ok((0..n)
            .map(|a| {
                let coeffs: Vec<f64> = (0..n).map(|b| s[(a, b)]).collect();
                combine(&coeffs)
            })
            .collect());
    }
    let mut out = Vec::with_capacity(rank);
    let mut order: Vec<usize> = (0..n).filter(|&k| keep[k]).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    for k in order {
        let scale = 1.0 / vals[k].sqrt();
        let coeffs: Vec<f64> = vecs.column(k).iter().map(|w| w * scale).collect();
        out.push(combine(&coeffs));
    }
    Ok(out)
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Packs a complex vector as `(Re, Im)` so that `Re <x|y>` becomes a dot product.
pub fn realify(v: &ComplexVector) -> RealVector {
    let n = v.len();
    RealVector::from_fn(2 * n, |k, _| if k < n { v[k].re } else { v[k - n].im })
}

pub fn complexify(v: &RealVector) -> ComplexVector {
    let n = v.len() / 2;
    ComplexVector::from_fn(n, |k, _| c(v[k], v[k + n]))
}
