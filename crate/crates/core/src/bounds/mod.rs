//! Finite-n forms of the divergence and variational-distance theorems.

mod delta;
mod divergence;
mod gaussian;
mod partition;

pub use delta::{delta_brute, delta_exact, flat_family_distance, DeltaResult, BRUTE_MAX_SIZE, DELTA_M_LIMIT};
pub use divergence::{
    lemma2_bound, thm2_lower_bound, thm2_proof_chain, thm2_rhs, BoundReport, ProofChain,
};
pub use gaussian::{gaussian, gaussian_cdf, gaussian_pdf, integrate, integrate_to};
pub use partition::{partition_report, thm4_lower_bound, PartitionReport, DEFAULT_C1};

/// Allowance for rounding in inequalities that hold exactly in real arithmetic.
pub const EXACT_SLACK: f64 = 1e-12;
