//! Independent checks and seeded generators.
//!
//! Nothing here goes through the SVD code paths of the decomposer: marginals
//! are built by explicit index loops and spectra come from a Hermitian
//! eigensolver, so the results can serve as ground truth in tests.
//!
//! Random unitaries use ChaCha8 seeded from a `u64`. Entries of the Gaussian
//! matrix are `(a + ib)/√2` with `a, b` standard normal, drawn row-major; the
//! Haar sample is `Q · diag(R_kk / |R_kk|)` from its QR factorization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::gram_deviation;
use crate::multipartite::SchmidtDecomposition;
use crate::state::{tensor_product, State};

/// Reduced density matrix of a subset of parties.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Copy scaled to unit trace.
    pub fn normalized(&self) -> DensityMatrix {
        let t = self.trace();
        DensityMatrix { entries: &self.entries / Complex64::new(t, 0.0) }
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let hermitian = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }
}

/// `Tr_{others} |x⟩⟨x|` for a single kept party; trace equals `‖x‖²`.
pub fn partial_trace(x: &State, keep: usize) -> Result<DensityMatrix> {
    reduced_density(x, &[keep])
}

/// `Tr_{others} |x⟩⟨x|` for the kept parties, indexed in ascending party order.
pub fn reduced_density(x: &State, keep: &[usize]) -> Result<DensityMatrix> {
    if x.is_zero() {
        return Err(Error::ZeroState);
    }
    let dims = x.dims();
    let n = dims.len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&p| p >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let traced: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
    let kept_dim: usize = kept.iter().map(|&p| dims[p]).product();
    let traced_dim: usize = traced.iter().map(|&p| dims[p]).product();

    // flat offset of (kept digits, traced digits) in the row-major layout
    let mut stride = vec![1usize; n];
    for p in (0..n.saturating_sub(1)).rev() {
        stride[p] = stride[p + 1] * dims[p + 1];
    }
    let offsets = |parties: &[usize], mut flat: usize| -> usize {
        let mut offset = 0;
        for &p in parties.iter().rev() {
            offset += (flat % dims[p]) * stride[p];
            flat /= dims[p];
        }
        offset
    };
    let kept_offsets: Vec<usize> = (0..kept_dim).map(|k| offsets(&kept, k)).collect();
    let traced_offsets: Vec<usize> = (0..traced_dim).map(|t| offsets(&traced, t)).collect();

    let amps = x.amps();
    let mut rho = DMatrix::zeros(kept_dim, kept_dim);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += amps[ro + t] * amps[co + t].conj();
            }
            rho[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix { entries: rho })
}

/// Necessary condition for a decomposition: every single-party marginal has
/// the same nonzero spectrum. `false` proves absence; `true` is inconclusive.
///
/// Eigenvalues are taken relative to `‖x‖²`; those at or below `tol` count as
/// zero and the rest must agree to `1e-8`.
pub fn spectral_necessary_check(x: &State, tol: f64) -> Result<bool> {
    let total = x.norm_sqr();
    if total == 0.0 {
        return Err(Error::ZeroState);
    }
    let mut reference: Option<Vec<f64>> = None;
    for party in 0..x.n_parties() {
        let spectrum: Vec<f64> = partial_trace(x, party)?
            .eigenvalues()
            .into_iter()
            .map(|v| v / total)
            .filter(|&v| v > tol)
            .collect();
        match &reference {
            None => reference = Some(spectrum),
            Some(r) => {
                if r.len() != spectrum.len() || r.iter().zip(&spectrum).any(|(a, b)| (a - b).abs() > 1e-8) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Per-party Gram matrices equal the identity to `tol` and the decomposition
/// reproduces `x` to `tol · ‖x‖`.
pub fn verify_decomposition(x: &State, d: &SchmidtDecomposition, tol: f64) -> Result<bool> {
    if d.dims() != x.dims() {
        return Err(Error::DimensionMismatch { expected: x.n_parties(), found: d.n_parties() });
    }
    if d.coefficients().iter().any(|&l| !l.is_finite() || l < 0.0) {
        return Ok(false);
    }
    if (0..d.n_parties()).any(|j| gram_deviation(d.party_vectors(j)) > tol) {
        return Ok(false);
    }
    Ok(d.reconstruct().distance(x)? <= tol * x.norm())
}

/// Haar-distributed `dim × dim` unitary.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let (q, r) = gaussian.qr().unpack();
    let mut u = q;
    for k in 0..dim {
        let diag = r[(k, k)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..dim {
            u[(row, k)] *= phase;
        }
    }
    u
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unit state with i.i.d. complex Gaussian amplitudes.
pub fn random_state(dims: &[usize], rng: &mut impl Rng) -> Result<State> {
    let len: usize = dims.iter().product();
    let amps = (0..len).map(|_| complex_gaussian(rng)).collect();
    State::new(dims.to_vec(), amps)?.normalized()
}

/// Unit product state with Gaussian factors.
pub fn random_product_state(dims: &[usize], rng: &mut impl Rng) -> Result<State> {
    let factors = dims.iter().map(|&d| random_state(&[d], rng)).collect::<Result<Vec<_>>>()?;
    tensor_product(&factors)
}

/// `(U_1 ⊗ … ⊗ U_n) x` with independent Haar unitaries.
pub fn apply_random_local_unitaries(x: &State, rng: &mut impl Rng) -> Result<State> {
    let mut out = x.clone();
    for (party, &d) in x.dims().iter().enumerate() {
        out = out.apply_local(party, &haar_unitary(d, rng))?;
    }
    Ok(out)
}

/// A state with a known decomposition: `Σ_i λ_i ⊗_j |i⟩` rotated by an
/// independent Haar unitary on each party. `lambdas` are rescaled to unit
/// Euclidean norm; the ground truth keeps their given order.
pub fn random_schmidt_state(dims: &[usize], lambdas: &[f64], seed: u64) -> Result<(State, SchmidtDecomposition)> {
    if dims.is_empty() {
        return Err(Error::EmptyDims);
    }
    if let Some(party) = dims.iter().position(|&d| d == 0) {
        return Err(Error::ZeroDimension { party });
    }
    let bound = *dims.iter().min().expect("nonempty");
    if lambdas.len() > bound {
        return Err(Error::TooManyTerms { terms: lambdas.len(), bound });
    }
    if lambdas.is_empty() || lambdas.iter().any(|&l| !l.is_finite() || l <= 0.0) {
        return Err(Error::InvalidArgument("coefficients must be positive and finite".into()));
    }
    let scale = lambdas.iter().map(|l| l * l).sum::<f64>().sqrt();
    let coefficients: Vec<f64> = lambdas.iter().map(|l| l / scale).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let party_vectors: Vec<Vec<Vec<Complex64>>> = dims
        .iter()
        .map(|&d| {
            let u = haar_unitary(d, &mut rng);
            (0..coefficients.len()).map(|i| u.column(i).iter().copied().collect()).collect()
        })
        .collect();
    let truth = SchmidtDecomposition::new(dims.to_vec(), coefficients, party_vectors)?;
    Ok((truth.reconstruct(), truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::named;

    fn assert_diag_half(rho: &DensityMatrix) {
        assert!((rho.entries[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((rho.entries[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(rho.entries[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn marginals_of_named_states() {
        let x = named::bell_pair_times_zero().normalized().unwrap();
        assert_diag_half(&partial_trace(&x, 0).unwrap());
        let rho_c = partial_trace(&x, 2).unwrap();
        assert!((rho_c.entries[(0, 0)].re - 1.0).abs() < 1e-12);
        assert_diag_half(&partial_trace(&named::ghz(3), 1).unwrap());
    }

    #[test]
    fn product_marginal_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_product_state(&[2, 3, 2], &mut rng).unwrap();
        let values = partial_trace(&x, 1).unwrap().eigenvalues();
        assert!((values[0] - 1.0).abs() < 1e-12);
        assert!(values[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn reduced_density_is_hermitian_with_norm_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_state(&[2, 3, 2], &mut rng).unwrap().scaled(Complex64::new(0.0, 3.0));
        let rho = reduced_density(&x, &[0, 2]).unwrap();
        assert_eq!(rho.dim(), 4);
        assert!(rho.hermiticity_error() < 1e-12);
        assert!((rho.trace() - 9.0).abs() < 1e-12);
        assert!((rho.normalized().trace() - 1.0).abs() < 1e-12);
        assert!(rho.eigenvalues().iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn spectral_check_examples() {
        assert!(spectral_necessary_check(&named::ghz(3), 1e-9).unwrap());
        // W passes although it has no decomposition
        assert!(spectral_necessary_check(&named::w(3), 1e-9).unwrap());
        assert!(!spectral_necessary_check(&named::bell_pair_times_zero(), 1e-9).unwrap());
        assert_eq!(
            spectral_necessary_check(&State::zeros(vec![2, 2]).unwrap(), 1e-9).unwrap_err(),
            Error::ZeroState
        );
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..6 {
            let u = haar_unitary(d, &mut rng);
            let deviation = (u.adjoint() * &u - DMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(deviation < 1e-12);
        }
    }

    #[test]
    fn generator_ground_truth_verifies() {
        let (x, truth) = random_schmidt_state(&[2, 2, 2], &[0.8, 0.6], 7).unwrap();
        assert!(verify_decomposition(&x, &truth, 1e-12).unwrap());
        assert!((x.norm() - 1.0).abs() < 1e-12);
        let (again, _) = random_schmidt_state(&[2, 2, 2], &[0.8, 0.6], 7).unwrap();
        assert_eq!(x, again);

        let (x, truth) = random_schmidt_state(&[3, 3, 3], &[1.0, 1.0, 1.0], 11).unwrap();
        assert!(verify_decomposition(&x, &truth, 1e-12).unwrap());
        assert!((truth.coefficients()[0] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn generator_rejects_bad_input() {
        assert_eq!(
            random_schmidt_state(&[2, 3], &[1.0, 1.0, 1.0], 0).unwrap_err(),
            Error::TooManyTerms { terms: 3, bound: 2 }
        );
        assert!(random_schmidt_state(&[2, 2], &[1.0, -1.0], 0).is_err());
        assert!(random_schmidt_state(&[], &[1.0], 0).is_err());
    }

    #[test]
    fn verify_rejects_wrong_coefficients() {
        let x = named::ghz(3);
        let e0 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let e1 = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let vectors = vec![vec![e0.clone(), e1.clone()]; 3];
        let good = SchmidtDecomposition::new(vec![2, 2, 2], vec![h, h], vectors.clone()).unwrap();
        assert!(verify_decomposition(&x, &good, 1e-12).unwrap());
        let bad = SchmidtDecomposition::new(vec![2, 2, 2], vec![1.0, 0.0], vectors).unwrap();
        assert!(!verify_decomposition(&x, &bad, 1e-9).unwrap());
        let other = SchmidtDecomposition::new(vec![2, 2], vec![1.0], vec![vec![e0.clone()], vec![e0]]).unwrap();
        assert!(verify_decomposition(&x, &other, 1e-9).is_err());
    }
}
