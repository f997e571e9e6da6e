//! Separability, the basis condition and the constructive decomposer.

mod condition;
mod decompose;
mod separability;

pub use condition::{
    check_condition, lemma_cs2_reduce, CheckMode, ConditionReport, PartialIPTable, PartyCondition,
    Reduction, ResidualEntry,
};
pub use decompose::{decompose, multipartite_schmidt_decompose, Absence, Decomposition, SchmidtDecomposition};
pub use separability::{
    find_partial_separation, find_partial_separation_with, is_completely_separable,
    negative_certificate, PartialSeparation, SeparabilityReport, SplitFamily,
};
