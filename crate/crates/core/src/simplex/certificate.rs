//! Independent optimality check for an LP solve.
//!
//! Given the problem data and a claimed optimal `(primal, duals)` pair, this
//! recomputes everything from scratch: primal feasibility, dual sign
//! conditions and reduced-cost sign conditions against the bound each value
//! sits on, complementary slackness, and the strong-duality gap. It never
//! looks at the solver's internal state, so it cannot share a bug with the
//! pivoting code.

use super::{LpSolution, LpStatus};
use crate::ilp::{IlpProblem, RowSense};

const CERT_TOL: f64 = 1e-6;

/// Outcome of [`verify_lp_certificate`], with the worst deviation seen per
/// condition group.
#[derive(Debug, Clone, Copy)]
pub struct CertificateReport {
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub complementary: bool,
    pub strong_duality: bool,
    pub max_primal_violation: f64,
    pub max_dual_violation: f64,
    pub max_slackness_violation: f64,
    pub duality_gap: f64,
}

impl CertificateReport {
    pub fn pass(&self) -> bool {
        self.primal_feasible && self.dual_feasible && self.complementary && self.strong_duality
    }
}

impl std::fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "primal={} (viol {:.2e}) dual={} (viol {:.2e}) slackness={} (viol {:.2e}) gap={} ({:.2e})",
            self.primal_feasible,
            self.max_primal_violation,
            self.dual_feasible,
            self.max_dual_violation,
            self.complementary,
            self.max_slackness_violation,
            self.strong_duality,
            self.duality_gap,
        )
    }
}

/// Rechecks a claimed optimum. Solutions with a status other than
/// [`LpStatus::Optimal`] fail trivially: there is nothing to certify.
pub fn verify_lp_certificate(problem: &IlpProblem, solution: &LpSolution) -> CertificateReport {
    let mut report = CertificateReport {
        primal_feasible: false,
        dual_feasible: false,
        complementary: false,
        strong_duality: false,
        max_primal_violation: f64::NAN,
        max_dual_violation: f64::NAN,
        max_slackness_violation: f64::NAN,
        duality_gap: f64::NAN,
    };
    if solution.status != LpStatus::Optimal
        || solution.primal.len() != problem.num_columns()
        || solution.row_duals.len() != problem.num_rows()
    {
        return report;
    }
    let x = &solution.primal;
    let y = &solution.row_duals;

    // Primal feasibility: every row and every bound.
    let mut primal_viol = 0.0f64;
    let mut activities = Vec::with_capacity(problem.num_rows());
    for row in &problem.rows {
        let lhs = row.activity(x);
        activities.push(lhs);
        let scale = 1.0 + row.rhs.abs();
        let viol = match row.sense {
            RowSense::Le => (lhs - row.rhs) / scale,
            RowSense::Ge => (row.rhs - lhs) / scale,
            RowSense::Eq => (lhs - row.rhs).abs() / scale,
        };
        primal_viol = primal_viol.max(viol);
    }
    for (col, &v) in problem.columns.iter().zip(x) {
        let scale = 1.0 + v.abs();
        primal_viol = primal_viol.max((col.lower - v) / scale);
        if col.upper.is_finite() {
            primal_viol = primal_viol.max((v - col.upper) / scale);
        }
    }
    report.max_primal_violation = primal_viol.max(0.0);
    report.primal_feasible = primal_viol <= CERT_TOL;

    // Dual feasibility: row-dual signs plus reduced-cost signs on the bound
    // side each primal value occupies. Reduced costs are recomputed from the
    // duals, not taken from the solution.
    let reduced: Vec<f64> = problem
        .columns
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let mut d = col.objective;
            for (row, &yi) in problem.rows.iter().zip(y) {
                if yi != 0.0 {
                    if let Some(&(_, a)) = row.coeffs.iter().find(|&&(c, _)| c == j) {
                        d -= yi * a;
                    }
                }
            }
            d
        })
        .collect();

    let mut dual_viol = 0.0f64;
    for (row, &yi) in problem.rows.iter().zip(y) {
        match row.sense {
            RowSense::Le => dual_viol = dual_viol.max(yi),
            RowSense::Ge => dual_viol = dual_viol.max(-yi),
            RowSense::Eq => {}
        }
    }
    for (j, col) in problem.columns.iter().enumerate() {
        if col.lower == col.upper {
            continue;
        }
        let v = x[j];
        let d = reduced[j];
        let near_lower = v - col.lower <= CERT_TOL * (1.0 + col.lower.abs());
        let near_upper =
            col.upper.is_finite() && col.upper - v <= CERT_TOL * (1.0 + col.upper.abs());
        if near_lower && !near_upper {
            dual_viol = dual_viol.max(-d);
        } else if near_upper && !near_lower {
            dual_viol = dual_viol.max(d);
        } else if !near_lower && !near_upper {
            dual_viol = dual_viol.max(d.abs());
        }
    }
    report.max_dual_violation = dual_viol.max(0.0);
    report.dual_feasible = dual_viol <= CERT_TOL;

    // Complementary slackness on rows: an active dual needs a tight row.
    let mut slack_viol = 0.0f64;
    for ((row, &yi), &lhs) in problem.rows.iter().zip(y).zip(&activities) {
        if row.sense != RowSense::Eq {
            let gap = (lhs - row.rhs).abs() / (1.0 + row.rhs.abs());
            slack_viol = slack_viol.max(yi.abs().min(1.0) * gap);
        }
    }
    report.max_slackness_violation = slack_viol;
    report.complementary = slack_viol <= CERT_TOL;

    // Strong duality: b'y plus the bound terms of the reduced costs.
    let primal_obj: f64 =
        problem.columns.iter().zip(x).map(|(c, &v)| c.objective * v).sum();
    let mut dual_obj: f64 = problem.rows.iter().zip(y).map(|(r, &yi)| r.rhs * yi).sum();
    for (j, col) in problem.columns.iter().enumerate() {
        let d = reduced[j];
        if d > 0.0 {
            dual_obj += d * col.lower;
        } else if d < 0.0 && col.upper.is_finite() {
            dual_obj += d * col.upper;
        }
    }
    let gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs());
    report.duality_gap = gap;
    report.strong_duality = gap <= CERT_TOL;

    report
}
