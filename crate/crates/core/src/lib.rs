//! Randomized linear-programming heuristic for weighted graph isomorphism.
//!
//! Given two symmetric adjacency matrices `A` and `Ã`, the solver looks for a
//! permutation matrix `P` with `PA = ÃP` by repeatedly minimizing a random
//! linear objective over the doubly stochastic matrices that intertwine the two
//! graphs, rounding each optimum to the nearest permutation, and checking it
//! exactly.
//!
//! The pipeline is:
//!
//! 1. [`spectrum`] and [`spectra_equal`]: equal spectra are necessary.
//! 2. [`construct_k`]: entries of `P` that invariants force to zero.
//! 3. [`admm_solve`]: consensus ADMM over the relaxed polytope.
//! 4. [`hungarian_nearest_permutation`] and [`verify_permutation`].
//!
//! [`solve_gip`] runs all of it with randomized restarts.

pub mod admm;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod mask;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod polish;
pub mod rng;
pub mod spectrum;

pub use admm::{
    admm_solve, commutant_projector_mask, project_commutant, sample_direction, AdmmParams,
    AdmmState, CommutantProjector, Direction, RelaxedSolution, TracePoint,
};
pub use error::{Error, Result};
pub use graph::{Permutation, WeightedGraph};
pub use mask::{construct_k, degree_mask, prune, spectral_mask, MaskOptions, MaskOrigin, SparsityMask};
pub use oracle::{all_isomorphisms, brute_force_isomorphism, max_mask_oracle};
pub use pipeline::{estimate_success_rate, solve_gip, NotIsomorphicReason, RestartRecord, SolveConfig, SolveReport, Verdict};
pub use polish::{hungarian_nearest_permutation, verify_permutation};
pub use spectrum::{spectra_equal, spectrum, EigenGroup, Spectrum};
