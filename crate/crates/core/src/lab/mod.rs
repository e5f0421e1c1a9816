//! Leggett-Garg protocols, macrorealism conditions and Hamiltonian
//! classification.

mod classify;
mod conditions;
mod lgi;

pub use classify::{classify_hamiltonian, direction_samples, Classification, ClassifyOptions};
pub use conditions::{
    classicality_detail, classicality_deviation, classicality_report, evolution_condition, mixture_condition, ConditionId,
    ConditionReport, Witness, DEFAULT_EPSILON_THRESHOLD, DEFAULT_OVERLAP_THRESHOLD,
};
pub use lgi::{
    k_value, lgi_coarse, lgi_coarse_correlators, lgi_projective, two_level_k, LgiProtocol, LgiResult, PathTable,
    ProjectiveLgi,
};
