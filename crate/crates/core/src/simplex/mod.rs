//! Exact LP solving for the relaxations used by branch-and-bound.
//!
//! The engine is a two-phase revised simplex over bounded variables:
//! nonbasic variables sit at one of their finite bounds and may flip sides
//! without a basis change, which keeps the basis at `m` columns instead of
//! slack-expanding the whole system. Phase 1 introduces artificial variables
//! only on rows violated by the all-at-lower-bound starting point.
//!
//! Pivoting uses Dantzig pricing and switches to Bland's rule after a run of
//! degenerate steps, so degenerate models terminate. The basis inverse is
//! kept dense (problems here have at most a few hundred rows) and is
//! refactorized periodically.

mod certificate;
mod engine;

pub use certificate::{verify_lp_certificate, CertificateReport};

use crate::ilp::IlpProblem;

/// Solver tolerances and safeguards.
#[derive(Debug, Clone, Copy)]
pub struct SimplexParams {
    /// Absolute primal feasibility tolerance.
    pub feas_tol: f64,
    /// Reduced-cost optimality tolerance.
    pub opt_tol: f64,
    /// Smallest acceptable pivot magnitude.
    pub pivot_tol: f64,
    /// Pivots between basis refactorizations.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
    /// Hard iteration cap; 0 picks a generous size-based default.
    pub max_iters: usize,
    /// Emit a per-iteration log line at debug level.
    pub log_iterations: bool,
}

impl Default for SimplexParams {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            pivot_tol: 1e-9,
            refactor_every: 100,
            degenerate_switch: 1000,
            max_iters: 0,
            log_iterations: false,
        }
    }
}

/// Result classification of an LP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The basis became numerically unusable (singular after refactorization
    /// attempts) or the iteration safeguard tripped.
    NumericFailure,
}

/// Where a column sits in the final basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Output of an LP solve over the structural columns of the problem.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Value per structural column. Meaningful at `Optimal`; at other
    /// statuses it holds the last iterate for diagnostics.
    pub primal: Vec<f64>,
    /// Objective at `Optimal`; `+inf` for `Infeasible`, `-inf` for
    /// `Unbounded`, NaN after a numeric failure.
    pub objective: f64,
    pub basis: Vec<BasisStatus>,
    /// Dual value per row, signed for the row's original sense.
    pub row_duals: Vec<f64>,
    /// Reduced cost per structural column.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    /// Improving ray when `Unbounded`.
    pub ray: Option<Vec<f64>>,
}

/// A simplex solver with fixed parameters. Each call to
/// [`SimplexSolver::solve`] runs to completion on its own working state, so
/// one solver must not be shared between concurrent solves; distinct solvers
/// are independent.
#[derive(Debug, Clone, Default)]
pub struct SimplexSolver {
    params: SimplexParams,
}

impl SimplexSolver {
    pub fn new(params: SimplexParams) -> Self {
        Self { params }
    }

    /// Solves the LP relaxation of `problem` (integrality ignored).
    pub fn solve(&mut self, problem: &IlpProblem) -> LpSolution {
        let lower: Vec<f64> = problem.columns.iter().map(|c| c.lower).collect();
        let upper: Vec<f64> = problem.columns.iter().map(|c| c.upper).collect();
        self.solve_with_bounds(problem, &lower, &upper)
    }

    /// Solves the relaxation with the column bounds replaced, leaving the
    /// problem itself untouched. Branch-and-bound uses this for node bounds.
    pub fn solve_with_bounds(
        &mut self,
        problem: &IlpProblem,
        lower: &[f64],
        upper: &[f64],
    ) -> LpSolution {
        engine::solve(problem, lower, upper, &self.params)
    }
}

/// One-shot solve with default parameters.
pub fn solve_lp(problem: &IlpProblem) -> LpSolution {
    SimplexSolver::default().solve(problem)
}
