use num_complex::Complex64;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::state::{partial_inner_product, party_label, State};

use super::separability::is_completely_separable;

/// Overlaps `|⟨u_t|v⟩|` at or below this count as zero.
const OVERLAP_TOL: f64 = 1e-9;
/// Unit factors with `|⟨a|b⟩| ≥ 1 − PROPORTIONAL_TOL` count as proportional.
const PROPORTIONAL_TOL: f64 = 1e-8;

/// One basis vector's partial inner product with the state.
#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub basis_index: usize,
    /// `⟨u_i|x⟩` on the remaining parties.
    pub residual: State,
    /// `‖residual‖`.
    pub weight: f64,
    /// Whether `weight` exceeds the zero threshold.
    pub nonzero: bool,
    /// Complete separability of the residual; only evaluated for nonzero entries.
    pub separable: bool,
    /// Unit factors with `residual = weight · ⊗ factors`, when separable.
    pub factors: Option<Vec<Vec<Complex64>>>,
}

/// Partial inner products of every vector of one party's basis with the state.
#[derive(Debug, Clone)]
pub struct PartialIPTable {
    pub party_index: usize,
    pub entries: Vec<ResidualEntry>,
}

impl PartialIPTable {
    /// Number of nonzero partial inner products.
    pub fn m(&self) -> usize {
        self.entries.iter().filter(|e| e.nonzero).count()
    }

    /// First nonzero residual that is not a product.
    pub fn failing(&self) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.nonzero && !e.separable)
    }

    pub fn nonzero_entries(&self) -> impl Iterator<Item = &ResidualEntry> {
        self.entries.iter().filter(|e| e.nonzero)
    }

    /// Builds the table for `party` with zero threshold `tol · ‖x‖`.
    pub fn build(x: &State, party: usize, basis: &BasisSet, tol: f64) -> Result<Self> {
        let norm = x.checked_norm()?;
        let mut entries = Vec::with_capacity(basis.party_dim());
        for (i, u) in basis.vectors().iter().enumerate() {
            let residual = partial_inner_product(u, party, x)?;
            let weight = residual.norm();
            let nonzero = weight > tol * norm;
            let (separable, factors) = if nonzero {
                let report = is_completely_separable(&residual, tol)?;
                match (report.factors, report.scale) {
                    (Some(mut factors), Some(scale)) => {
                        // move the scalar's phase into the first factor
                        let phase = scale / scale.norm();
                        factors[0].iter_mut().for_each(|z| *z *= phase);
                        (true, Some(factors))
                    }
                    _ => (false, None),
                }
            } else {
                (false, None)
            };
            entries.push(ResidualEntry { basis_index: i, residual, weight, nonzero, separable, factors });
        }
        Ok(Self { party_index: party, entries })
    }
}

/// Which parties [`check_condition`] consults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Every party: the necessary and sufficient test.
    #[default]
    AllParties,
    /// Only the smallest party (first on ties). This is the older,
    /// insufficient test, kept to demonstrate its failure.
    SmallestPartyOnly,
}

#[derive(Debug, Clone)]
pub struct PartyCondition {
    pub basis: BasisSet,
    pub table: PartialIPTable,
}

impl PartyCondition {
    pub fn party(&self) -> usize {
        self.table.party_index
    }

    pub fn m_j(&self) -> usize {
        self.table.m()
    }
}

/// Per-party residual tables and the overall verdict.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub mode: CheckMode,
    pub per_party: Vec<PartyCondition>,
    /// Nonzero partial inner product count per consulted party.
    pub m_j: Vec<usize>,
    pub m: usize,
    pub satisfied: bool,
    pub failing_party: Option<usize>,
    /// Basis index of the first failing residual of `failing_party`.
    pub failing_index: Option<usize>,
}

impl ConditionReport {
    pub fn failing_residual(&self) -> Option<&ResidualEntry> {
        let party = self.failing_party?;
        self.per_party.iter().find(|p| p.party() == party)?.table.failing()
    }

    pub fn describe_failure(&self) -> Option<String> {
        let entry = self.failing_residual()?;
        Some(format!(
            "party {}: residual of basis vector {} (weight {:.6}) is not completely separable",
            party_label(self.failing_party?),
            entry.basis_index,
            entry.weight
        ))
    }
}

fn validate_bases(x: &State, bases: &[BasisSet]) -> Result<()> {
    if bases.len() != x.n_parties() {
        return Err(Error::DimensionMismatch { expected: x.n_parties(), found: bases.len() });
    }
    for (basis, &dim) in bases.iter().zip(x.dims()) {
        if basis.party_dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: basis.party_dim() });
        }
    }
    Ok(())
}

/// Checks that every nonzero partial inner product of the given bases with
/// `x` is completely separable in the remaining parties.
///
/// With bases drawn from a Schmidt decomposition this always holds; conversely
/// a satisfying choice of bases on all parties guarantees a decomposition.
pub fn check_condition(x: &State, bases: &[BasisSet], mode: CheckMode, tol: f64) -> Result<ConditionReport> {
    x.checked_norm()?;
    if x.n_parties() < 2 {
        return Err(Error::InvalidArgument("the condition needs at least two parties".into()));
    }
    validate_bases(x, bases)?;
    let parties: Vec<usize> = match mode {
        CheckMode::AllParties => (0..x.n_parties()).collect(),
        CheckMode::SmallestPartyOnly => {
            let smallest = (0..x.n_parties()).min_by_key(|&j| x.dims()[j]).expect("n ≥ 2");
            vec![smallest]
        }
    };

    let mut per_party = Vec::with_capacity(parties.len());
    for party in parties {
        let table = PartialIPTable::build(x, party, &bases[party], tol)?;
        per_party.push(PartyCondition { basis: bases[party].clone(), table });
    }
    let m_j: Vec<usize> = per_party.iter().map(PartyCondition::m_j).collect();
    let failing = per_party.iter().find_map(|p| p.table.failing().map(|e| (p.party(), e.basis_index)));
    Ok(ConditionReport {
        mode,
        m: m_j.iter().copied().max().unwrap_or(0),
        m_j,
        satisfied: failing.is_none(),
        failing_party: failing.map(|f| f.0),
        failing_index: failing.map(|f| f.1),
        per_party,
    })
}

/// Result of merging two basis vectors of one party.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// Replacement basis for the reduced party.
    pub basis: BasisSet,
    /// The two basis indices that were combined; the second now has a zero
    /// partial inner product with the state.
    pub merged: (usize, usize),
    pub m_before: usize,
    pub m_after: usize,
}

/// Lowers the number of nonzero partial inner products of party `j` by one.
///
/// Requires condition-satisfying `bases` and a nonzero residual `t` of a
/// second party `s` whose basis vector `u_t^s` overlaps the `s`-factor of at
/// least two nonzero residuals `ĩ ≠ ĩĩ` of party `j`. Those residuals are then
/// proportional, `⟨u_ĩ|x⟩/λ_ĩ = c · ⟨u_ĩĩ|x⟩/λ_ĩĩ`, and the pair
/// `(a·u_ĩ + b·u_ĩĩ, b·u_ĩ − ā·u_ĩĩ)` with `a = λ_ĩ c`, `b = λ_ĩĩ` (normalized)
/// replaces `(u_ĩ, u_ĩĩ)`; the second new vector annihilates `x`.
pub fn lemma_cs2_reduce(
    x: &State,
    bases: &[BasisSet],
    j: usize,
    s: usize,
    t: usize,
    tol: f64,
) -> Result<Reduction> {
    x.checked_norm()?;
    let n = x.n_parties();
    if n < 2 {
        return Err(Error::InvalidArgument("the reduction needs at least two parties".into()));
    }
    validate_bases(x, bases)?;
    for p in [j, s] {
        if p >= n {
            return Err(Error::IndexOutOfRange { index: p, len: n });
        }
    }
    if s == j {
        return Err(Error::PreconditionViolated("the overlap party must differ from the reduced party".into()));
    }
    if t >= x.dims()[s] {
        return Err(Error::IndexOutOfRange { index: t, len: x.dims()[s] });
    }

    let report = check_condition(x, bases, CheckMode::AllParties, tol)?;
    if let Some(reason) = report.describe_failure() {
        return Err(Error::PreconditionViolated(format!("bases do not satisfy the condition: {reason}")));
    }
    let table_j = &report.per_party[j].table;
    let table_s = &report.per_party[s].table;
    if !table_s.entries[t].nonzero {
        return Err(Error::PreconditionViolated(format!(
            "basis vector {t} of party {} has a zero partial inner product",
            party_label(s)
        )));
    }

    // position of party s among the parties left after contracting j
    let s_pos = if s < j { s } else { s - 1 };
    let u_t = bases[s].vector(t);
    let overlapping: Vec<&ResidualEntry> = table_j
        .nonzero_entries()
        .filter(|e| {
            let factors = e.factors.as_ref().expect("separable entries carry factors");
            dot(u_t, &factors[s_pos]).norm() > OVERLAP_TOL
        })
        .collect();
    let [first, second, ..] = overlapping.as_slice() else {
        return Err(Error::PreconditionViolated(format!(
            "basis vector {t} of party {} overlaps fewer than two residual factors of party {}",
            party_label(s),
            party_label(j)
        )));
    };

    let first_factors = first.factors.as_ref().expect("separable");
    let second_factors = second.factors.as_ref().expect("separable");
    let mut c = Complex64::new(1.0, 0.0);
    for (f1, f2) in first_factors.iter().zip(second_factors) {
        let ck = dot(f2, f1);
        if ck.norm() < 1.0 - PROPORTIONAL_TOL {
            return Err(Error::NotProportional { overlap: ck.norm() });
        }
        c *= ck;
    }

    let a = c * first.weight;
    let b = Complex64::new(second.weight, 0.0);
    let scale = 1.0 / (a.norm_sqr() + b.norm_sqr()).sqrt();
    let u1 = bases[j].vector(first.basis_index);
    let u2 = bases[j].vector(second.basis_index);
    let merged: Vec<Complex64> = u1.iter().zip(u2).map(|(p, q)| (a * p + b * q) * scale).collect();
    let annihilated: Vec<Complex64> = u1
        .iter()
        .zip(u2)
        .map(|(p, q)| (b.conj() * p - a.conj() * q) * scale)
        .collect();
    let mut vectors = bases[j].vectors().to_vec();
    vectors[first.basis_index] = merged;
    vectors[second.basis_index] = annihilated;
    let basis = BasisSet::new(vectors)?;

    let m_before = table_j.m();
    let new_table = PartialIPTable::build(x, j, &basis, tol)?;
    let m_after = new_table.m();
    if m_after + 1 != m_before || new_table.failing().is_some() {
        return Err(Error::NumericalAmbiguity(format!(
            "reduction of party {} did not preserve the condition (m {} → {})",
            party_label(j),
            m_before,
            m_after
        )));
    }
    Ok(Reduction {
        basis,
        merged: (first.basis_index, second.basis_index),
        m_before,
        m_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::named;

    fn computational(x: &State) -> Vec<BasisSet> {
        x.dims().iter().map(|&d| BasisSet::computational(d)).collect()
    }

    #[test]
    fn smallest_party_mode_accepts_counterexample() {
        let x = named::bell_pair_times_zero();
        let report = check_condition(&x, &computational(&x), CheckMode::SmallestPartyOnly, 1e-9).unwrap();
        assert!(report.satisfied);
        assert_eq!(report.per_party.len(), 1);
        assert_eq!(report.per_party[0].party(), 0);
        assert_eq!(report.m_j, vec![2]);
    }

    #[test]
    fn all_parties_mode_rejects_counterexample_at_party_c() {
        let x = named::bell_pair_times_zero();
        let report = check_condition(&x, &computational(&x), CheckMode::AllParties, 1e-9).unwrap();
        assert!(!report.satisfied);
        assert_eq!(report.failing_party, Some(2));
        assert_eq!(report.failing_index, Some(0));
        let bell = State::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(report.failing_residual().unwrap().residual, bell);
        assert!(report.describe_failure().unwrap().starts_with("party C"));
    }

    #[test]
    fn ghz_satisfies_condition_in_computational_bases() {
        let x = named::ghz(3);
        let report = check_condition(&x, &computational(&x), CheckMode::AllParties, 1e-9).unwrap();
        assert!(report.satisfied);
        assert_eq!(report.m_j, vec![2, 2, 2]);
        assert_eq!(report.m, 2);
        for party in &report.per_party {
            for entry in party.table.nonzero_entries() {
                assert!((entry.weight - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn table_factors_reconstruct_residuals() {
        let amps: Vec<Complex64> = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]
            .iter()
            .map(|&a| Complex64::new(0.0, a))
            .collect();
        let x = State::new(vec![2, 2, 2], amps).unwrap();
        let table = PartialIPTable::build(&x, 1, &BasisSet::computational(2), 1e-9).unwrap();
        for entry in table.nonzero_entries() {
            let factors = entry.factors.as_ref().unwrap();
            let product = crate::state::tensor_product(
                &factors.iter().map(|f| State::single(f.clone()).unwrap()).collect::<Vec<_>>(),
            )
            .unwrap()
            .scaled(Complex64::new(entry.weight, 0.0));
            assert!(product.distance(&entry.residual).unwrap() < 1e-12);
            assert!((entry.weight - entry.residual.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let x = named::ghz(3);
        let bases = vec![BasisSet::computational(2), BasisSet::computational(3), BasisSet::computational(2)];
        assert!(matches!(
            check_condition(&x, &bases, CheckMode::AllParties, 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(check_condition(&x, &bases[..2], CheckMode::AllParties, 1e-9).is_err());
    }

    #[test]
    fn reduction_merges_plus_into_one_vector() {
        let x = named::plus_zero_zero();
        let before = x.clone();
        let reduction = lemma_cs2_reduce(&x, &computational(&x), 0, 1, 0, 1e-9).unwrap();
        assert_eq!(x, before);
        assert_eq!((reduction.m_before, reduction.m_after), (2, 1));
        assert_eq!(reduction.merged, (0, 1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = reduction.basis.vectors();
        assert!((v[0][0].re - h).abs() < 1e-12 && (v[0][1].re - h).abs() < 1e-12);
        assert!((v[1][0].re - h).abs() < 1e-12 && (v[1][1].re + h).abs() < 1e-12);
        assert!(reduction.basis.gram_deviation() < 1e-10);
    }

    #[test]
    fn reduction_needs_two_overlapping_residuals() {
        let x = State::basis(vec![2, 2, 2], &[0, 0, 0]).unwrap();
        let err = lemma_cs2_reduce(&x, &computational(&x), 0, 1, 0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
        // t pointing at a zero residual
        let err = lemma_cs2_reduce(&x, &computational(&x), 0, 1, 1, 1e-9).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
        assert!(lemma_cs2_reduce(&x, &computational(&x), 0, 0, 0, 1e-9).is_err());
    }

    #[test]
    fn reduction_rejects_bases_violating_condition() {
        let x = named::bell_pair_times_zero();
        let err = lemma_cs2_reduce(&x, &computational(&x), 0, 1, 0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    #[test]
    fn reduction_detects_non_proportional_factors() {
        // party A residuals |0⟩⊗|+⟩ and |0⟩⊗|0⟩: both overlap ⟨0|_B, but the
        // C-factors are not proportional, so the bases cannot satisfy the
        // condition on B (⟨0|_B x = |0⟩|+⟩ + |1⟩|0⟩ is entangled).
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = State::from_real(vec![2, 2, 2], &[h, h, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let err = lemma_cs2_reduce(&x, &computational(&x), 0, 1, 0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }
}
