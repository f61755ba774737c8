//! Temporary reproduction probe for the bound regression.

use fleet_core::analysis::{cap_grid, solve_base};
use fleet_core::branch_bound::SolveParams;
use fleet_core::gen::{generate, GenSpec};
use fleet_core::ilp::build_ilp;
use fleet_core::model::Variant;
use fleet_core::simplex::{verify_lp_certificate, LpStatus, SimplexParams, SimplexSolver};

#[test]
#[ignore]
fn find_bad_lp() {
    let params = SolveParams::default();
    for seed in 1..=20u64 {
        let instance = generate(&GenSpec { seed, ..Default::default() }).unwrap();
        let base = solve_base(&instance, &params).unwrap();
        let caps = cap_grid(&instance, 15, &params).unwrap();
        println!("seed {seed}: base obj {} emissions {}", base.objective, base.emissions);
        for &cap in &caps {
            let capped = instance.with_emission_cap(Some(cap));
            let (problem, _) = build_ilp(&capped, Variant::Enhanced).unwrap();
            // Manual branch and bound with certificate checks at every node.
            let refactor_every: usize =
                std::env::var("PROBE_REFACTOR").ok().and_then(|v| v.parse().ok()).unwrap_or(100);
            let mut solver =
                SimplexSolver::new(SimplexParams { refactor_every, ..Default::default() });
            let mut stack = vec![(
                problem.columns.iter().map(|c| c.lower).collect::<Vec<_>>(),
                problem.columns.iter().map(|c| c.upper).collect::<Vec<_>>(),
                f64::NEG_INFINITY,
                0usize,
            )];
            let mut nodes = 0;
            while let Some((lower, upper, parent_bound, depth)) = stack.pop() {
                nodes += 1;
                if nodes > 3000 {
                    break;
                }
                let lp = solver.solve_with_bounds(&problem, &lower, &upper);
                match lp.status {
                    LpStatus::Infeasible => continue,
                    LpStatus::Optimal => {}
                    other => panic!("seed {seed} cap {cap}: {other:?}"),
                }
                // Certificate against the node problem (bounds overridden).
                let mut node_problem = problem.clone();
                for (j, col) in node_problem.columns.iter_mut().enumerate() {
                    col.lower = lower[j];
                    col.upper = upper[j];
                }
                let cert = verify_lp_certificate(&node_problem, &lp);
                if !cert.pass() {
                    println!(
                        "seed {seed} cap {cap} depth {depth}: CERT FAIL {cert} obj {}",
                        lp.objective
                    );
                    panic!("certificate failure");
                }
                if lp.objective < parent_bound - 1e-6 * (1.0 + parent_bound.abs()) {
                    println!(
                        "seed {seed} cap {cap} depth {depth}: child {} < parent {} (diff {})",
                        lp.objective,
                        parent_bound,
                        parent_bound - lp.objective
                    );
                    panic!("bound regression with passing certificates?!");
                }
                // Branch on the most fractional integer column.
                let mut best: Option<(usize, f64, f64)> = None;
                for (j, col) in problem.columns.iter().enumerate() {
                    if !col.integer {
                        continue;
                    }
                    let v = lp.primal[j];
                    let frac = (v - v.round()).abs();
                    if frac > 1e-6 {
                        let score = (v - v.floor()).min(v.ceil() - v);
                        if best.map_or(true, |(_, _, s)| score > s) {
                            best = Some((j, v, score));
                        }
                    }
                }
                let Some((j, v, _)) = best else { continue };
                if depth > 60 {
                    continue;
                }
                let mut up = upper.clone();
                up[j] = v.floor();
                stack.push((lower.clone(), up, lp.objective, depth + 1));
                let mut lo = lower.clone();
                lo[j] = v.ceil();
                stack.push((lo, upper.clone(), lp.objective, depth + 1));
            }
        }
    }
    println!("no regression found");
}
