//! Weight derivation from pairwise judgements (AHP/ANP).
//!
//! Judgement matrices yield local priority vectors via the principal
//! eigenvector (or row geometric means), checked with Saaty's consistency
//! ratio. Local vectors compose hierarchically, or through the limit of a
//! weighted supermatrix when an influence network is supplied.

mod derive;
mod pairwise;
mod supermatrix;

pub use derive::{
    derive_metric_weights, ClusterJudgements, CompositionPath, DeriveOptions, DerivedWeights,
    JudgementSet, NetworkBlocks,
};
pub use pairwise::{
    random_index, ConsistencyReport, PairwiseMatrix, PriorityMethod, PriorityVector, Violation,
    DEFAULT_CR_THRESHOLD, POWER_MAX_ITERATIONS, POWER_TOLERANCE, RECIPROCITY_TOLERANCE,
};
pub use supermatrix::{Cluster, LimitPriorities, Supermatrix, MAX_SQUARINGS};
