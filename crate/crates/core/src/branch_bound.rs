//! Exact integer optimization by best-bound branch-and-bound over the
//! simplex relaxation.
//!
//! Nodes carry column-bound overrides only; the LP for a node is solved when
//! the node is popped. The open set is ordered by the parent relaxation
//! bound (ties by node id), so bounds are popped in nondecreasing order and
//! the last popped bound is always a valid global lower bound. Branching
//! fixes the most fractional column into floor and ceiling children, floor
//! child first.

use crate::ilp::IlpProblem;
use crate::simplex::{LpStatus, SimplexParams, SimplexSolver};
use log::debug;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

/// Branch-and-bound controls.
#[derive(Debug, Clone, Copy)]
pub struct SolveParams {
    /// A value within this distance of an integer counts as integral.
    pub int_tol: f64,
    /// Stop when incumbent minus bound is within this absolute gap.
    pub abs_gap: f64,
    /// Stop when the relative gap falls below this.
    pub rel_gap: f64,
    /// Maximum nodes to process; `None` means unlimited.
    pub node_limit: Option<u64>,
    /// Wall-clock limit; `None` means unlimited.
    pub time_limit: Option<Duration>,
    /// Parameters handed to the per-node LP solves.
    pub simplex: SimplexParams,
    /// Emit one debug log line per processed node.
    pub log_nodes: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            int_tol: 1e-6,
            abs_gap: 1e-6,
            rel_gap: 1e-9,
            node_limit: None,
            time_limit: None,
            simplex: SimplexParams::default(),
            log_nodes: false,
        }
    }
}

/// Terminal state of a branch-and-bound run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlpStatus {
    /// The incumbent is integer-feasible and proved optimal within the gap.
    Optimal,
    /// No integer point satisfies all rows and bounds.
    Infeasible,
    /// The relaxation at the root is unbounded below.
    Unbounded,
    NodeLimit,
    TimeLimit,
    /// A relaxation solve failed numerically; `IlpResult::nodes` tells where.
    SolverError,
}

/// Result of [`solve_ilp`].
#[derive(Debug, Clone)]
pub struct IlpResult {
    pub status: IlpStatus,
    /// Incumbent column values, integral in every integer column.
    pub values: Option<Vec<f64>>,
    /// Objective of the incumbent.
    pub objective: Option<f64>,
    /// Best proven lower bound on the integer optimum.
    pub best_bound: f64,
    /// `objective - best_bound` when an incumbent exists, else infinite.
    pub gap: f64,
    /// Number of nodes whose relaxation was solved.
    pub nodes: u64,
}

struct Node {
    id: u64,
    depth: u32,
    /// Relaxation objective of the parent; a valid bound for this node.
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

struct OpenNode(Node);

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.0.bound == other.0.bound && self.0.id == other.0.id
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    // BinaryHeap is a max-heap; invert so the smallest bound (then the
    // smallest id) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .partial_cmp(&self.0.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Minimizes an [`IlpProblem`] exactly.
pub fn solve_ilp(problem: &IlpProblem, params: &SolveParams) -> IlpResult {
    let started = Instant::now();
    let mut solver = SimplexSolver::new(params.simplex);

    let root_lower: Vec<f64> = problem.columns.iter().map(|c| c.lower).collect();
    let root_upper: Vec<f64> = problem.columns.iter().map(|c| c.upper).collect();

    let mut open = BinaryHeap::new();
    open.push(OpenNode(Node {
        id: 0,
        depth: 0,
        bound: f64::NEG_INFINITY,
        lower: root_lower,
        upper: root_upper,
    }));
    let mut next_id: u64 = 1;
    let mut nodes: u64 = 0;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut global_bound = f64::NEG_INFINITY;

    let finish = |status: IlpStatus,
                  incumbent: Option<(Vec<f64>, f64)>,
                  best_bound: f64,
                  nodes: u64| {
        let (values, objective) = match incumbent {
            Some((v, obj)) => (Some(v), Some(obj)),
            None => (None, None),
        };
        let gap = objective.map_or(f64::INFINITY, |obj| obj - best_bound);
        IlpResult { status, values, objective, best_bound, gap, nodes }
    };

    while let Some(OpenNode(node)) = open.pop() {
        global_bound = global_bound.max(node.bound);
        if let Some((_, inc_obj)) = &incumbent {
            let within_abs = node.bound >= inc_obj - params.abs_gap;
            let within_rel = node.bound >= inc_obj - params.rel_gap * (1.0 + inc_obj.abs());
            if within_abs || within_rel {
                // Best-bound order: every remaining node is at least as bad.
                return finish(IlpStatus::Optimal, incumbent, node.bound, nodes);
            }
        }
        if let Some(limit) = params.node_limit {
            if nodes >= limit {
                return finish(IlpStatus::NodeLimit, incumbent, global_bound, nodes);
            }
        }
        if let Some(limit) = params.time_limit {
            if started.elapsed() >= limit {
                return finish(IlpStatus::TimeLimit, incumbent, global_bound, nodes);
            }
        }

        let relaxation = solver.solve_with_bounds(problem, &node.lower, &node.upper);
        nodes += 1;
        match relaxation.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.id == 0 {
                    return finish(IlpStatus::Unbounded, incumbent, f64::NEG_INFINITY, nodes);
                }
                // A subproblem of a bounded root cannot be unbounded.
                debug!("node {} reported an unbounded relaxation", node.id);
                return finish(IlpStatus::SolverError, incumbent, global_bound, nodes);
            }
            LpStatus::NumericFailure => {
                debug!("relaxation failed numerically at node {}", node.id);
                return finish(IlpStatus::SolverError, incumbent, global_bound, nodes);
            }
            LpStatus::Optimal => {}
        }
        debug_assert!(
            relaxation.objective >= node.bound - 1e-6 * (1.0 + node.bound.abs()),
            "child bound {} below parent bound {}",
            relaxation.objective,
            node.bound
        );
        if node.id == 0 {
            global_bound = relaxation.objective;
        }
        if params.log_nodes {
            let fractional = fractional_columns(problem, &relaxation.primal, params.int_tol).len();
            debug!(
                "node {} depth {} bound {:.6} fractional {}",
                node.id, node.depth, relaxation.objective, fractional
            );
        }
        if let Some((_, inc_obj)) = &incumbent {
            if relaxation.objective >= inc_obj - params.abs_gap {
                continue;
            }
        }

        let fractional = fractional_columns(problem, &relaxation.primal, params.int_tol);
        if fractional.is_empty() {
            // Snap to the nearest integers and recheck independently of the
            // LP path before trusting the point.
            let mut snapped = relaxation.primal.clone();
            for (j, col) in problem.columns.iter().enumerate() {
                if col.integer {
                    snapped[j] = snapped[j].round();
                }
            }
            if !problem.feasible(&snapped, 1e-6) {
                debug!("node {}: snapped point failed the feasibility recheck", node.id);
                continue;
            }
            let objective = problem.objective_value(&snapped);
            let improves = incumbent.as_ref().map_or(true, |(_, obj)| objective < *obj);
            if improves {
                debug!("incumbent {} at node {}", objective, node.id);
                incumbent = Some((snapped, objective));
            }
            continue;
        }

        let (branch_col, value) = pick_branching(&fractional);
        let floor = value.floor();
        let ceil = value.ceil();
        if floor >= node.lower[branch_col] {
            let mut upper = node.upper.clone();
            upper[branch_col] = floor;
            open.push(OpenNode(Node {
                id: next_id,
                depth: node.depth + 1,
                bound: relaxation.objective,
                lower: node.lower.clone(),
                upper,
            }));
            next_id += 1;
        }
        if ceil <= node.upper[branch_col] {
            let mut lower = node.lower.clone();
            lower[branch_col] = ceil;
            open.push(OpenNode(Node {
                id: next_id,
                depth: node.depth + 1,
                bound: relaxation.objective,
                lower,
                upper: node.upper.clone(),
            }));
            next_id += 1;
        }
    }

    match incumbent {
        Some((values, objective)) => IlpResult {
            status: IlpStatus::Optimal,
            best_bound: objective,
            gap: 0.0,
            nodes,
            values: Some(values),
            objective: Some(objective),
        },
        None => finish(IlpStatus::Infeasible, None, f64::INFINITY, nodes),
    }
}

fn fractional_columns(problem: &IlpProblem, values: &[f64], int_tol: f64) -> Vec<(usize, f64)> {
    problem
        .columns
        .iter()
        .enumerate()
        .filter(|(_, col)| col.integer)
        .filter_map(|(j, _)| {
            let v = values[j];
            if (v - v.round()).abs() > int_tol {
                Some((j, v))
            } else {
                None
            }
        })
        .collect()
}

/// Most fractional first (distance to the nearest integer), lowest column
/// index on ties.
fn pick_branching(fractional: &[(usize, f64)]) -> (usize, f64) {
    let mut best = fractional[0];
    let mut best_score = frac_score(best.1);
    for &(col, v) in &fractional[1..] {
        let score = frac_score(v);
        if score > best_score + 1e-12 {
            best = (col, v);
            best_score = score;
        }
    }
    best
}

fn frac_score(v: f64) -> f64 {
    let f = v - v.floor();
    f.min(1.0 - f)
}
