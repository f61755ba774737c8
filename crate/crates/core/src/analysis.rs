//! Emission-cap sensitivity analysis.
//!
//! The central question: how much does it cost to run the network cleaner?
//! [`sweep_emission_cap`] solves the capped model over a grid of cap values
//! and records objective, achieved emissions, and the rental share per cap;
//! [`cap_grid`] derives a principled grid from the instance itself, spanning
//! the minimum achievable emissions up to the emissions of the cost-optimal
//! (uncapped) plan — beyond that the cap is slack. Results export as CSV
//! with a commented summary trailer, ready for plotting.

use crate::branch_bound::{solve_ilp, IlpStatus, SolveParams};
use crate::ilp::{build_ilp, extract_solution};
use crate::model::{
    evaluate_objective, rental_share, total_emissions, Instance, ModelError, Solution, Variant,
};
use rayon::prelude::*;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("the base model is infeasible")]
    BaseInfeasible,
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of one cap in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Optimal,
    Infeasible,
    Error,
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowStatus::Optimal => write!(f, "optimal"),
            RowStatus::Infeasible => write!(f, "infeasible"),
            RowStatus::Error => write!(f, "error"),
        }
    }
}

/// One solved cap value.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub cap: f64,
    pub status: RowStatus,
    pub objective: Option<f64>,
    pub emissions: Option<f64>,
    pub rental_share: Option<f64>,
    pub nodes: u64,
}

/// A full sweep plus its summary statistics.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Rows sorted ascending by cap.
    pub rows: Vec<SweepRow>,
    pub base_objective: f64,
    /// Emissions of the cost-optimal uncapped plan.
    pub base_emissions: f64,
    /// Mean percentage cost increase over the base optimum, across feasible
    /// caps; `None` when no cap was feasible.
    pub mean_cost_increase_pct: Option<f64>,
    /// Smallest cap that admitted a feasible plan.
    pub min_feasible_cap: Option<f64>,
}

/// A solved base model, reused across the analysis entry points.
#[derive(Debug, Clone)]
pub struct BaseSolve {
    pub solution: Solution,
    pub objective: f64,
    pub emissions: f64,
    pub share: f64,
    pub nodes: u64,
}

/// Solves the uncapped model and prices its plan.
pub fn solve_base(instance: &Instance, params: &SolveParams) -> Result<BaseSolve, AnalysisError> {
    let (problem, map) = build_ilp(instance, Variant::Base)?;
    let result = solve_ilp(&problem, params);
    match result.status {
        IlpStatus::Optimal => {
            let solution = extract_solution(&result.values.expect("optimal has values"), &map)?;
            let objective = evaluate_objective(instance, &solution)?;
            let emissions = total_emissions(instance, &solution)?;
            let share = rental_share(&solution);
            Ok(BaseSolve { solution, objective, emissions, share, nodes: result.nodes })
        }
        IlpStatus::Infeasible => Err(AnalysisError::BaseInfeasible),
        other => Err(AnalysisError::Solver(format!("base solve ended with {other:?}"))),
    }
}

/// Minimum achievable network emissions under the base constraints: the
/// same feasible set, with the cost objective swapped for the emission
/// expression.
pub fn min_emissions(instance: &Instance, params: &SolveParams) -> Result<f64, AnalysisError> {
    let (mut problem, map) = build_ilp(instance, Variant::Base)?;
    for column in &mut problem.columns {
        column.objective = 0.0;
    }
    let dims = instance.dims;
    for i in 0..dims.num_origins {
        for j in 0..dims.num_destinations {
            let km = instance.distance.get(i, j);
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    problem.columns[map.travel_org(i, j, m, t)].objective =
                        instance.emission_org[m] * km;
                    problem.columns[map.travel_rent(i, j, m, t)].objective =
                        instance.emission_rent[m] * km;
                }
            }
        }
    }
    let result = solve_ilp(&problem, params);
    match result.status {
        IlpStatus::Optimal => Ok(result.objective.expect("optimal has an objective")),
        IlpStatus::Infeasible => Err(AnalysisError::BaseInfeasible),
        other => Err(AnalysisError::Solver(format!("emission solve ended with {other:?}"))),
    }
}

/// `n` evenly spaced caps from the minimum achievable emissions to the base
/// optimum's emissions, inclusive of both endpoints.
pub fn cap_grid(
    instance: &Instance,
    n: usize,
    params: &SolveParams,
) -> Result<Vec<f64>, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::InvalidArgument(format!("grid needs at least 2 caps, got {n}")));
    }
    let lo = min_emissions(instance, params)?;
    let hi = solve_base(instance, params)?.emissions;
    let lo = lo.min(hi); // guard against round-off inversion
    let step = (hi - lo) / (n - 1) as f64;
    let mut caps: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
    caps[0] = lo;
    caps[n - 1] = hi;
    Ok(caps)
}

/// Solves the capped model for every cap and assembles the trade-off table.
///
/// `f64::INFINITY` is accepted as a "no cap" sentinel: such rows carry the
/// base solve verbatim. Per-cap solver failures are recorded in their row
/// and never abort the sweep. Rows come back sorted ascending by cap; the
/// per-cap solves run in parallel and the result does not depend on thread
/// scheduling.
pub fn sweep_emission_cap(
    instance: &Instance,
    caps: &[f64],
    params: &SolveParams,
) -> Result<SweepResult, AnalysisError> {
    if caps.is_empty() {
        return Err(AnalysisError::InvalidArgument("no caps supplied".into()));
    }
    if caps.iter().any(|c| c.is_nan()) {
        return Err(AnalysisError::InvalidArgument("NaN cap".into()));
    }
    let base = solve_base(instance, params)?;

    let mut sorted = caps.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN caps"));

    let rows: Vec<SweepRow> = sorted
        .par_iter()
        .map(|&cap| {
            if cap.is_infinite() {
                return SweepRow {
                    cap,
                    status: RowStatus::Optimal,
                    objective: Some(base.objective),
                    emissions: Some(base.emissions),
                    rental_share: Some(base.share),
                    nodes: base.nodes,
                };
            }
            solve_one_cap(instance, cap, params)
        })
        .collect();

    let feasible: Vec<&SweepRow> =
        rows.iter().filter(|r| r.status == RowStatus::Optimal).collect();
    let mean_cost_increase_pct = if feasible.is_empty() {
        None
    } else {
        let sum: f64 = feasible
            .iter()
            .map(|r| cost_delta_percent(base.objective, r.objective.expect("feasible row")))
            .sum();
        Some(sum / feasible.len() as f64)
    };
    let min_feasible_cap = feasible.first().map(|r| r.cap);

    Ok(SweepResult {
        rows,
        base_objective: base.objective,
        base_emissions: base.emissions,
        mean_cost_increase_pct,
        min_feasible_cap,
    })
}

fn solve_one_cap(instance: &Instance, cap: f64, params: &SolveParams) -> SweepRow {
    let capped = instance.with_emission_cap(Some(cap));
    let built = match build_ilp(&capped, Variant::Enhanced) {
        Ok(pair) => pair,
        Err(e) => {
            log::warn!("cap {cap}: build failed: {e}");
            return SweepRow {
                cap,
                status: RowStatus::Error,
                objective: None,
                emissions: None,
                rental_share: None,
                nodes: 0,
            };
        }
    };
    let (problem, map) = built;
    let result = solve_ilp(&problem, params);
    match result.status {
        IlpStatus::Optimal => {
            let values = result.values.expect("optimal has values");
            match extract_solution(&values, &map) {
                Ok(solution) => SweepRow {
                    cap,
                    status: RowStatus::Optimal,
                    objective: result.objective,
                    emissions: total_emissions(&capped, &solution).ok(),
                    rental_share: Some(rental_share(&solution)),
                    nodes: result.nodes,
                },
                Err(e) => {
                    log::warn!("cap {cap}: extraction failed: {e}");
                    SweepRow {
                        cap,
                        status: RowStatus::Error,
                        objective: None,
                        emissions: None,
                        rental_share: None,
                        nodes: result.nodes,
                    }
                }
            }
        }
        IlpStatus::Infeasible => SweepRow {
            cap,
            status: RowStatus::Infeasible,
            objective: None,
            emissions: None,
            rental_share: None,
            nodes: result.nodes,
        },
        other => {
            log::warn!("cap {cap}: solver ended with {other:?}");
            SweepRow {
                cap,
                status: RowStatus::Error,
                objective: None,
                emissions: None,
                rental_share: None,
                nodes: result.nodes,
            }
        }
    }
}

/// Percentage cost increase of `enhanced` over `base`. Requires a positive
/// base objective.
pub fn cost_delta_percent(base_objective: f64, enhanced_objective: f64) -> f64 {
    assert!(base_objective > 0.0, "cost delta needs a positive base objective");
    100.0 * (enhanced_objective - base_objective) / base_objective
}

impl SweepResult {
    /// Plot-ready CSV: one row per cap, then the summary as commented
    /// trailer lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cap,status,objective,emissions,rental_share,nodes\n");
        for row in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.cap,
                row.status,
                opt(row.objective),
                opt(row.emissions),
                opt(row.rental_share),
                row.nodes
            );
        }
        let _ = writeln!(out, "# base_objective={}", self.base_objective);
        let _ = writeln!(out, "# base_emissions={}", self.base_emissions);
        let _ = writeln!(
            out,
            "# mean_cost_increase_pct={}",
            self.mean_cost_increase_pct.map(|v| format!("{v}")).unwrap_or_default()
        );
        let _ = writeln!(
            out,
            "# min_feasible_cap={}",
            self.min_feasible_cap.map(|v| format!("{v}")).unwrap_or_default()
        );
        out
    }
}
