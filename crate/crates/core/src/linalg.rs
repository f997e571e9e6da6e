//! Small dense helpers shared by the decomposition modules.
//!
//! Factorizations go through `faer`; states and operators stay in `nalgebra`.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative reconstruction error above which a factorization is rejected.
const FACTORIZATION_GUARD: f64 = 1e-10;

/// Singular triplets of `m`, sorted by descending singular value.
///
/// `m = Σ σ_i · left_i · right_iᵀ` (no conjugation on `right_i`), so for a
/// matricized state the rows of the factorization are directly the right
/// Schmidt vectors.
pub(crate) struct Svd {
    pub values: Vec<f64>,
    pub left: Vec<Vec<Complex64>>,
    pub right: Vec<Vec<Complex64>>,
}

/// Thin SVD via `faer`; the result is checked against `m` before use.
pub(crate) fn svd(m: &DMatrix<Complex64>) -> Result<Svd> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let (rows, cols) = m.shape();
    let a = Mat::<Complex64>::from_fn(rows, cols, |r, c| m[(r, c)]);
    let decomposition = a.thin_svd().map_err(|_| Error::SvdFailure)?;
    let (u, s, v) = (decomposition.U(), decomposition.S(), decomposition.V());
    let k = rows.min(cols);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    let out = Svd {
        values: order.iter().map(|&i| s[i].re.max(0.0)).collect(),
        left: order.iter().map(|&i| (0..rows).map(|r| u[(r, i)]).collect()).collect(),
        right: order.iter().map(|&i| (0..cols).map(|c| v[(c, i)].conj()).collect()).collect(),
    };

    let mut worst: f64 = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let rebuilt: Complex64 = (0..k).map(|i| out.left[i][r] * out.right[i][c] * out.values[i]).sum();
            worst = worst.max((rebuilt - m[(r, c)]).norm());
        }
    }
    if worst > FACTORIZATION_GUARD * m.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::SvdFailure);
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching eigenvector columns.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let a = Mat::<Complex64>::from_fn(n, n, |r, c| m[(r, c)]);
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NumericalAmbiguity("Hermitian eigensolver did not converge".into()))?;
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values = order.iter().map(|&i| s[i].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok((values, vectors))
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Index of the largest-magnitude component; the lowest index wins near-ties.
pub(crate) fn dominant_index(v: &[Complex64]) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0)
}

/// Rotates `v` so that its dominant component is real and positive.
///
/// Returns the unit phase `p` removed, i.e. `v_before = p · v_after`.
pub(crate) fn fix_phase(v: &mut [Complex64]) -> Complex64 {
    let lead = v[dominant_index(v)];
    if lead.norm() == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let phase = lead / lead.norm();
    let undo = phase.conj();
    for z in v.iter_mut() {
        *z *= undo;
    }
    phase
}

/// Max-norm deviation of the Gram matrix of `vectors` from the identity.
pub fn gram_deviation(vectors: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).norm());
        }
    }
    worst
}
