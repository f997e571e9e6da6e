use num_complex::Complex64;

use crate::bipartite::{bipartite_schmidt, Bipartition};
use crate::error::{Error, Result};
use crate::linalg::fix_phase;
use crate::state::{inner_product, partial_inner_product, party_label, tensor_product, State};

/// Outcome of a complete-separability test.
#[derive(Debug, Clone)]
pub struct SeparabilityReport {
    pub completely_separable: bool,
    /// Unit factors, one per party, each with its dominant component real
    /// positive. Present iff the state is completely separable.
    pub factors: Option<Vec<Vec<Complex64>>>,
    /// Global scalar `c` with `x = c · ⊗_j factors[j]`; `|c| = ‖x‖`.
    pub scale: Option<Complex64>,
    /// A split across which the state has Schmidt number 1, if one was seen.
    pub partial_split: Option<Bipartition>,
    pub verdict_basis: String,
}

impl SeparabilityReport {
    /// `scale · ⊗ factors`, when separable.
    pub fn reconstruct(&self) -> Option<State> {
        let factors = self.factors.as_ref()?;
        let states: Vec<State> = factors
            .iter()
            .map(|f| State::single(f.clone()).expect("nonempty factor"))
            .collect();
        Some(tensor_product(&states).ok()?.scaled(self.scale?))
    }
}

/// Tests whether `x` is a product over all parties.
///
/// Peels off party 0, then party 1, …: each step takes the Schmidt
/// decomposition across `{first}|{rest}` of what remains and stops as soon
/// as the Schmidt number exceeds one.
pub fn is_completely_separable(x: &State, tol: f64) -> Result<SeparabilityReport> {
    x.checked_norm()?;
    let n = x.n_parties();
    let mut factors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut current = x.clone();
    let mut peeled = 0;

    while current.n_parties() > 1 {
        let split = Bipartition::first_vs_rest(current.n_parties())?;
        let s = bipartite_schmidt(&current, &split, tol)?;
        if s.rank > 1 {
            let partial_split = (peeled > 0)
                .then(|| Bipartition::new(&(0..peeled).collect::<Vec<_>>(), n))
                .transpose()?;
            let rest: Vec<String> = (peeled + 1..n).map(party_label).collect();
            return Ok(SeparabilityReport {
                completely_separable: false,
                factors: None,
                scale: None,
                partial_split,
                verdict_basis: format!(
                    "Schmidt number {} across {{{}}}|{{{}}}",
                    s.rank,
                    party_label(peeled),
                    rest.join(",")
                ),
            });
        }
        let mut factor = s.left_vectors[0].clone();
        fix_phase(&mut factor);
        current = partial_inner_product(&factor, 0, &current)?;
        factors.push(factor);
        peeled += 1;
    }

    let mut last = current.into_amps();
    let norm = crate::linalg::norm(&last);
    if norm == 0.0 {
        // only reachable when the tolerance zeroes everything but noise
        return Err(Error::ZeroState);
    }
    last.iter_mut().for_each(|z| *z /= norm);
    fix_phase(&mut last);
    factors.push(last);

    let product = tensor_product(
        &factors
            .iter()
            .map(|f| State::single(f.clone()))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let scale = inner_product(&product, x)?;
    let partial_split = (n > 1).then(|| Bipartition::first_vs_rest(n)).transpose()?;
    Ok(SeparabilityReport {
        completely_separable: true,
        factors: Some(factors),
        scale: Some(scale),
        partial_split,
        verdict_basis: "Schmidt number 1 across every successive single-party split".into(),
    })
}

/// Which bipartitions count for partial separability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitFamily {
    /// Any nonempty proper subset of parties against its complement.
    #[default]
    Arbitrary,
    /// Only `{0, …, k−1}|{k, …, n−1}`.
    Contiguous,
}

impl SplitFamily {
    /// Candidate splits in canonical order.
    ///
    /// `Arbitrary` keeps party 0 on the left and walks the subsets of the
    /// other parties by ascending bitmask (bit `p−1` ↔ party `p`), giving
    /// `2^(n−1) − 1` splits. `Contiguous` walks `k = 1, …, n−1`.
    pub fn splits(self, n_parties: usize) -> Vec<Bipartition> {
        match self {
            SplitFamily::Arbitrary => {
                let others = n_parties - 1;
                (0..(1usize << others) - 1)
                    .map(|mask| {
                        let mut left = vec![0];
                        left.extend((1..n_parties).filter(|p| mask & (1 << (p - 1)) != 0));
                        Bipartition::new(&left, n_parties).expect("proper subset")
                    })
                    .collect()
            }
            SplitFamily::Contiguous => (1..n_parties)
                .map(|k| Bipartition::new(&(0..k).collect::<Vec<_>>(), n_parties).expect("proper prefix"))
                .collect(),
        }
    }
}

/// A witness that `x = left ⊗ right` across `split`.
#[derive(Debug, Clone)]
pub struct PartialSeparation {
    pub split: Bipartition,
    /// Carries the norm of `x`.
    pub left: State,
    /// Unit vector, dominant component real positive.
    pub right: State,
}

/// First split (in [`SplitFamily::Arbitrary`] order) across which `x` has
/// Schmidt number 1.
pub fn find_partial_separation(x: &State, tol: f64) -> Result<Option<PartialSeparation>> {
    find_partial_separation_with(x, tol, SplitFamily::Arbitrary)
}

pub fn find_partial_separation_with(
    x: &State,
    tol: f64,
    family: SplitFamily,
) -> Result<Option<PartialSeparation>> {
    x.checked_norm()?;
    let n = x.n_parties();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "partial separability needs at least two parties".into(),
        ));
    }
    for split in family.splits(n) {
        let s = bipartite_schmidt(x, &split, tol)?;
        if s.rank == 1 {
            let sigma = Complex64::new(s.coefficients[0], 0.0);
            let left = s.left_state(0).scaled(sigma);
            let right = s.right_state(0);
            return Ok(Some(PartialSeparation { split, left, right }));
        }
    }
    Ok(None)
}

/// A bipartition proving that `x` has no multipartite Schmidt decomposition:
/// `x` is a product across it, yet not a product over all parties.
///
/// `None` is inconclusive.
pub fn negative_certificate(x: &State, tol: f64) -> Result<Option<Bipartition>> {
    x.checked_norm()?;
    if x.n_parties() < 3 {
        return Err(Error::InvalidArgument(
            "negative certificates need at least three parties".into(),
        ));
    }
    let Some(witness) = find_partial_separation(x, tol)? else {
        return Ok(None);
    };
    if is_completely_separable(x, tol)?.completely_separable {
        return Ok(None);
    }
    Ok(Some(witness.split))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::named;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn plus_zero_zero_is_completely_separable() {
        let x = named::plus_zero_zero();
        let report = is_completely_separable(&x, 1e-9).unwrap();
        assert!(report.completely_separable);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let factors = report.factors.as_ref().unwrap();
        assert!((factors[0][0] - c(h)).norm() < 1e-12 && (factors[0][1] - c(h)).norm() < 1e-12);
        assert!((factors[1][0] - c(1.0)).norm() < 1e-12 && factors[1][1].norm() < 1e-12);
        assert!((factors[2][0] - c(1.0)).norm() < 1e-12 && factors[2][1].norm() < 1e-12);
        assert!((report.scale.unwrap() - c(2f64.sqrt())).norm() < 1e-12);
        assert!(report.reconstruct().unwrap().distance(&x).unwrap() < 1e-12);
    }

    #[test]
    fn entangled_states_are_not_completely_separable() {
        for x in [named::bell_pair_times_zero(), named::ghz(3), named::w(3)] {
            let report = is_completely_separable(&x, 1e-9).unwrap();
            assert!(!report.completely_separable);
            assert!(report.factors.is_none());
        }
    }

    #[test]
    fn separation_found_after_first_party() {
        // |0⟩ ⊗ (|00⟩ + |11⟩): the prefix {A} splits off, then {B}|{C} fails
        let x = State::from_real(vec![2, 2, 2], &[1., 0., 0., 1., 0., 0., 0., 0.]).unwrap();
        let report = is_completely_separable(&x, 1e-9).unwrap();
        assert!(!report.completely_separable);
        assert_eq!(report.partial_split, Some(Bipartition::new(&[0], 3).unwrap()));
    }

    #[test]
    fn partial_separation_of_counterexample() {
        let x = named::bell_pair_times_zero();
        let found = find_partial_separation(&x, 1e-9).unwrap().unwrap();
        assert_eq!(found.split, Bipartition::new(&[0, 1], 3).unwrap());
        assert_eq!(found.split.to_string(), "{A,B}|{C}");
        let bell = State::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(found.left.distance(&bell).unwrap() < 1e-12);
        assert!(found.right.distance(&State::from_real(vec![2], &[1.0, 0.0]).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn ghz_has_no_partial_separation() {
        assert!(find_partial_separation(&named::ghz(3), 1e-9).unwrap().is_none());
        assert!(find_partial_separation(&named::ghz(4), 1e-9).unwrap().is_none());
    }

    #[test]
    fn products_are_partially_separable() {
        let x = State::basis(vec![2, 3, 2], &[1, 2, 0]).unwrap();
        assert!(find_partial_separation(&x, 1e-9).unwrap().is_some());
    }

    #[test]
    fn contiguous_family_misses_non_prefix_splits() {
        // (|00⟩+|11⟩) on A,C times |0⟩ on B
        let x = State::from_real(vec![2, 2, 2], &[1., 0., 0., 0., 0., 1., 0., 0.]).unwrap();
        let arbitrary = find_partial_separation_with(&x, 1e-9, SplitFamily::Arbitrary).unwrap();
        assert_eq!(arbitrary.unwrap().split.to_string(), "{A,C}|{B}");
        let contiguous = find_partial_separation_with(&x, 1e-9, SplitFamily::Contiguous).unwrap();
        assert!(contiguous.is_none());
        assert_eq!(SplitFamily::Arbitrary.splits(4).len(), 7);
    }

    #[test]
    fn negative_certificates() {
        let split = negative_certificate(&named::bell_pair_times_zero(), 1e-9).unwrap();
        assert_eq!(split.unwrap().to_string(), "{A,B}|{C}");
        assert!(negative_certificate(&named::ghz(3), 1e-9).unwrap().is_none());
        let product = State::basis(vec![2, 2, 2], &[0, 0, 0]).unwrap();
        assert!(negative_certificate(&product, 1e-9).unwrap().is_none());
        assert!(negative_certificate(&named::ghz(2), 1e-9).is_err());
    }

    #[test]
    fn zero_state_is_rejected() {
        let zero = State::zeros(vec![2, 2]).unwrap();
        assert_eq!(is_completely_separable(&zero, 1e-9).unwrap_err(), Error::ZeroState);
        assert_eq!(find_partial_separation(&zero, 1e-9).unwrap_err(), Error::ZeroState);
    }
}
