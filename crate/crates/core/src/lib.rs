//! Multipartite Schmidt decompositions of pure states.
//!
//! A pure state `|x⟩ ∈ A_1 ⊗ … ⊗ A_n` has a multipartite Schmidt
//! decomposition when it can be written as `Σ_i λ_i ⊗_j |u_i^{A_j}⟩` with an
//! orthonormal family on every party. Every bipartite state has one; most
//! states with three or more parties do not. This crate decides existence,
//! constructs the decomposition when it exists and produces certificates
//! when it does not.
//!
//! Layout:
//!
//! - [`state`]: dense states, inner products, partial inner products.
//! - [`basis`]: orthonormal bases and Gram–Schmidt completion.
//! - [`bipartite`]: SVD-based Schmidt decomposition across any bipartition.
//! - [`multipartite`]: separability tests, the basis condition, the
//!   constructive decomposer, the basis-merging reduction and negative
//!   certificates.
//! - [`oracle`]: independent checks (partial traces, spectra, reconstruction)
//!   and seeded generators of decomposable states.
//!
//! ```
//! use multischmidt::{multipartite_schmidt_decompose, named, DEFAULT_TOL};
//!
//! let ghz = named::ghz(3);
//! let d = multipartite_schmidt_decompose(&ghz, DEFAULT_TOL).unwrap().unwrap();
//! assert_eq!(d.n_terms(), 2);
//!
//! let w = named::w(3);
//! assert!(multipartite_schmidt_decompose(&w, DEFAULT_TOL).unwrap().is_none());
//! ```

pub mod basis;
pub mod bipartite;
pub mod error;
mod linalg;
pub mod multipartite;
pub mod oracle;
pub mod state;

pub use num_complex::Complex64;

pub use basis::{gram_schmidt_extend, BasisSet};
pub use bipartite::{bipartite_schmidt, matricize, schmidt_number, BipartiteSchmidt, Bipartition};
pub use error::{Error, Result};
pub use linalg::gram_deviation;
pub use multipartite::{
    check_condition, decompose, find_partial_separation, find_partial_separation_with,
    is_completely_separable, lemma_cs2_reduce, multipartite_schmidt_decompose,
    negative_certificate, Absence, CheckMode, ConditionReport, Decomposition, PartialIPTable,
    PartialSeparation, PartyCondition, Reduction, ResidualEntry, SchmidtDecomposition,
    SeparabilityReport, SplitFamily,
};
pub use state::{inner_product, named, partial_inner_product, party_label, tensor_product, State};

/// Default relative zero threshold for Schmidt coefficients and residual weights.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Max-norm Gram deviation accepted for orthonormal families.
pub const TOL_ORTHO: f64 = 1e-10;
