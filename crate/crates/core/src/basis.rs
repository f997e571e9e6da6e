//! Full orthonormal bases of a single party and their completion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dot, gram_deviation, norm};
use crate::TOL_ORTHO;

/// An orthonormal basis spanning one party's space.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    party_dim: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl BasisSet {
    /// Validates count, lengths and orthonormality (Gram deviation ≤ 1e-10).
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let party_dim = vectors.len();
        if party_dim == 0 {
            return Err(Error::InvalidArgument("a basis needs at least one vector".into()));
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != party_dim) {
            return Err(Error::DimensionMismatch { expected: party_dim, found: bad.len() });
        }
        let deviation = gram_deviation(&vectors);
        if deviation > TOL_ORTHO {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { party_dim, vectors })
    }

    pub fn computational(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[i] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self { party_dim: dim, vectors }
    }

    pub fn party_dim(&self) -> usize {
        self.party_dim
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }

    pub fn gram_deviation(&self) -> f64 {
        gram_deviation(&self.vectors)
    }
}

/// Completes an orthonormal list to a full basis of dimension `dim`.
///
/// The given vectors are kept verbatim as the leading entries. Each further
/// vector is the canonical basis vector with the largest component outside
/// the current span, orthogonalized by modified Gram–Schmidt with one
/// re-orthogonalization pass.
pub fn gram_schmidt_extend(partial: &[Vec<Complex64>], dim: usize) -> Result<BasisSet> {
    if partial.len() > dim {
        return Err(Error::TooManyTerms { terms: partial.len(), bound: dim });
    }
    if let Some(bad) = partial.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    let deviation = gram_deviation(partial);
    if deviation > TOL_ORTHO {
        return Err(Error::NotOrthonormal { deviation });
    }

    let mut basis: Vec<Vec<Complex64>> = partial.to_vec();
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for candidate in 0..dim {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[candidate] = Complex64::new(1.0, 0.0);
            for _pass in 0..2 {
                for u in &basis {
                    let overlap = dot(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= overlap * ui;
                    }
                }
            }
            let residual = norm(&v);
            if best.as_ref().is_none_or(|(r, _)| residual > *r * (1.0 + 1e-12)) {
                best = Some((residual, v));
            }
        }
        let (residual, mut v) = best.expect("dim ≥ 1");
        // the remaining canonical vectors always have residual² ≥ (dim − k)/dim
        debug_assert!(residual * residual >= 0.5 / dim as f64);
        let scale = 1.0 / residual;
        v.iter_mut().for_each(|z| *z *= scale);
        basis.push(v);
    }
    BasisSet::new(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn extends_plus_to_minus() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vec![c(h, 0.0), c(h, 0.0)];
        let basis = gram_schmidt_extend(std::slice::from_ref(&plus), 2).unwrap();
        assert_eq!(basis.vector(0), plus.as_slice());
        assert!(basis.gram_deviation() < 1e-12);
        // second vector is (|0⟩ − |1⟩)/√2 up to sign
        let minus = basis.vector(1);
        assert!((minus[0].norm() - h).abs() < 1e-12);
        assert!((minus[0] + minus[1]).norm() < 1e-12);
    }

    #[test]
    fn empty_extension_is_canonical() {
        let basis = gram_schmidt_extend(&[], 3).unwrap();
        assert_eq!(basis, BasisSet::computational(3));
    }

    #[test]
    fn repeated_vector_is_rejected() {
        let zero = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            gram_schmidt_extend(&[zero.clone(), zero], 2),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn complex_partial_set_extends_to_orthonormal_basis() {
        let a = vec![c(0.5, 0.5), c(0.0, 0.5), c(0.5, 0.0)];
        let b = vec![c(0.0, 0.0), c(0.6, 0.0), c(0.0, -0.8)];
        let scale = 1.0 / norm(&a);
        let a: Vec<_> = a.iter().map(|z| z * scale).collect();
        let overlap = dot(&a, &b);
        let mut b: Vec<_> = b.iter().zip(&a).map(|(bi, ai)| bi - overlap * ai).collect();
        let scale = 1.0 / norm(&b);
        b.iter_mut().for_each(|z| *z *= scale);
        let basis = gram_schmidt_extend(&[a, b], 3).unwrap();
        assert!(basis.gram_deviation() < 1e-12);
    }

    #[test]
    fn basis_set_validation() {
        assert!(BasisSet::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).is_err());
        assert!(matches!(
            BasisSet::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(1e-6, 0.0)]]),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
