//! Numerical laboratory for nonlocal Pucci extremal operators over anisotropic
//! kernel classes: extremal sweeps by exact per-direction policy selection,
//! steady states of M[u] + a(x) (u+)^q = 0 with prescribed exterior data,
//! explicit barrier constructions, principal eigenpairs, and the scenario
//! experiments built on top of them (maximum-principle checks, Hopf quotients,
//! dead-core thresholds and negative-tail sweeps).

// `!(x > 0.0)` in the validators is deliberate: it rejects NaN along with
// nonpositive values, which `x <= 0.0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// node loops index several parallel per-node arrays plus grid.node(i)
#![allow(clippy::needless_range_loop)]

pub mod barrier;
pub mod config;
pub mod error;
pub mod experiment;
pub mod exterior;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod operator;
pub(crate) mod quadrature;
pub mod rng;
pub mod scenario;
pub mod solver;

pub use barrier::{
    build_phi, hopf_condition_check, l1s_norm, negpart_bound_constant, psi_r, rho1, rho2,
    BarrierPhi, BarrierReport,
};
pub use error::{Error, Result};
pub use experiment::{
    exterior_tail_check, growth_exponent_fit, max_localization_check, norm_sweep, smp_check,
    threshold_search, weight_bound_check, SmpReport, Verdict,
};
pub use exterior::{ExteriorSpec, Shell};
pub use field::Field;
pub use grid::{build_grid, DomainGrid, DomainKind};
pub use kernel::{ExtremalSign, KernelSpec, PolicyField};
pub use operator::{
    directional_integral, eval_extremal, eval_linear, operator_apply, optimal_policy,
    OperatorAssembly,
};
pub use solver::{
    existence_sandwich, policy_iteration_solve, principal_eigenpair, pseudo_time_solve, residual,
    EigenPair, Problem, SolverConfig,
};
