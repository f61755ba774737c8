//! End-to-end acceptance gate.
//!
//! Each test prints one `[PASS]`/`[FAIL]` line (run with `--nocapture` to
//! see them on success). Tolerances are pinned in the assertions; nothing is
//! deferred to later calibration.

use fleet_core::analysis::{cap_grid, cost_delta_percent, min_emissions, sweep_emission_cap};
use fleet_core::branch_bound::{solve_ilp, IlpStatus, SolveParams};
use fleet_core::fixtures;
use fleet_core::gen::{generate, texas, GenSpec, IntRange};
use fleet_core::ilp::{build_ilp, encode_solution, VarIndexMap};
use fleet_core::model::{check_feasible, Dimensions, Instance, Solution, Variant};
use fleet_core::oracle::{
    brute_force_solve, enumeration_size, BruteForceOutcome, DEFAULT_ENUMERATION_LIMIT,
};
use fleet_core::simplex::{solve_lp, verify_lp_certificate, LpStatus};
use fleet_core::tensor::{Tensor3, Tensor4};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn report(line: &str, pass: bool) {
    println!("[{}] {line}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{line}");
}

/// Deterministic stream of oracle-scale instances: dims at most 2x2x2x2,
/// capacities at most 3, search space at most one million assignments.
fn oracle_scale_instances(count: usize) -> Vec<Instance> {
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let mut rng = StdRng::seed_from_u64(seed);
        let dims = Dimensions::new(
            rng.gen_range(1..=2),
            rng.gen_range(1..=2),
            rng.gen_range(1..=2),
            rng.gen_range(1..=2),
        );
        let spec = GenSpec {
            dims,
            seed: rng.gen(),
            fleet_cap: IntRange::new(0, 3),
            rental_cap: IntRange::new(0, 3),
            demand: IntRange::new(0, 2),
            ..Default::default()
        };
        let Ok(instance) = generate(&spec) else { continue };
        if enumeration_size(&instance).within(DEFAULT_ENUMERATION_LIMIT) {
            out.push(instance);
        }
    }
    out
}

fn paper_scale_instances(count: usize) -> Vec<Instance> {
    (1..=count as u64)
        .map(|seed| generate(&GenSpec { seed, ..Default::default() }).expect("coverable"))
        .collect()
}

fn solver_outcome(instance: &Instance, variant: Variant) -> (IlpStatus, Option<f64>) {
    let (problem, _) = build_ilp(instance, variant).expect("build");
    let result = solve_ilp(&problem, &SolveParams::default());
    (result.status, result.objective)
}

#[test]
fn acceptance_01_oracle_equivalence() {
    let started = Instant::now();
    let instances = oracle_scale_instances(50);
    let mut checked = 0;
    for (idx, instance) in instances.iter().enumerate() {
        for variant_choice in 0..2 {
            let (variant, inst) = if variant_choice == 0 {
                (Variant::Base, instance.clone())
            } else {
                // Cycle the cap through tight, mid, and slack values derived
                // from the base optimum's emissions.
                let base_emissions = match brute_force_solve(instance, Variant::Base).unwrap() {
                    BruteForceOutcome::Optimal { solution, .. } => {
                        fleet_core::model::total_emissions(instance, &solution).unwrap()
                    }
                    BruteForceOutcome::Infeasible => continue,
                };
                let factor = [0.5, 0.75, 1.0][idx % 3];
                (Variant::Enhanced, instance.with_emission_cap(Some(base_emissions * factor)))
            };
            let oracle = brute_force_solve(&inst, variant).unwrap();
            let (status, objective) = solver_outcome(&inst, variant);
            match oracle {
                BruteForceOutcome::Optimal { objective: expected, .. } => {
                    assert_eq!(status, IlpStatus::Optimal, "instance {idx} {variant}");
                    let got = objective.unwrap();
                    assert!(
                        (got - expected).abs() <= 1e-6,
                        "instance {idx} {variant}: solver {got} oracle {expected}"
                    );
                }
                BruteForceOutcome::Infeasible => {
                    assert_eq!(status, IlpStatus::Infeasible, "instance {idx} {variant}");
                }
            }
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    report(
        &format!(
            "1. oracle equivalence on 50 instances ({checked} solves, {:.1}s)",
            elapsed.as_secs_f64()
        ),
        checked >= 50 && elapsed.as_secs() < 60,
    );
}

#[test]
fn acceptance_02_single_route_ladder() {
    let inst = fixtures::single_route();
    let (base_status, base_obj) = solver_outcome(&inst, Variant::Base);
    let capped_80 = inst.with_emission_cap(Some(80.0));
    let (s80, o80) = solver_outcome(&capped_80, Variant::Enhanced);
    let capped_50 = inst.with_emission_cap(Some(50.0));
    let (s50, _) = solver_outcome(&capped_50, Variant::Enhanced);
    let min_em = min_emissions(&inst, &SolveParams::default()).unwrap();

    let pass = base_status == IlpStatus::Optimal
        && (base_obj.unwrap() - 168.0).abs() <= 1e-6
        && s80 == IlpStatus::Optimal
        && (o80.unwrap() - 200.0).abs() <= 1e-6
        && s50 == IlpStatus::Infeasible
        && (min_em - 70.0).abs() <= 1e-6;
    report("2. single-route ladder: 168 / 200 / infeasible / 70", pass);
}

#[test]
fn acceptance_03_cap_equivalence() {
    let params = SolveParams::default();
    let mut exact_matches = 0;
    let instances = paper_scale_instances(20);
    for instance in &instances {
        let base = fleet_core::analysis::solve_base(instance, &params).unwrap();

        let capped = instance.with_emission_cap(Some(base.emissions));
        let (status, objective) = solver_outcome(&capped, Variant::Enhanced);
        assert_eq!(status, IlpStatus::Optimal);
        assert!(
            (objective.unwrap() - base.objective).abs() <= 1e-6,
            "cap at base emissions must reproduce the base objective"
        );

        let sweep = sweep_emission_cap(instance, &[f64::INFINITY], &params).unwrap();
        if sweep.rows[0].objective == Some(base.objective) {
            exact_matches += 1;
        }
    }
    report(
        &format!("3. cap equivalence on 20 instances ({exact_matches}/20 sentinel rows exact)"),
        exact_matches == 20,
    );
}

#[test]
fn acceptance_04_sweep_monotonicity() {
    let params = SolveParams::default();
    let mut sweeps = 0;
    for instance in &paper_scale_instances(20) {
        let caps = cap_grid(instance, 15, &params).unwrap();
        assert_eq!(caps.len(), 15);
        let sweep = sweep_emission_cap(instance, &caps, &params).unwrap();
        let mut last: Option<f64> = None;
        for row in &sweep.rows {
            let Some(objective) = row.objective else {
                panic!("grid caps start at the minimum feasible emissions");
            };
            if let Some(prev) = last {
                assert!(
                    objective <= prev + 1e-6,
                    "objective must not increase as the cap loosens: {objective} after {prev}"
                );
            }
            last = Some(objective);
            let emissions = row.emissions.unwrap();
            assert!(emissions <= row.cap + 1e-6, "emissions {emissions} over cap {}", row.cap);
        }
        sweeps += 1;
    }
    report("4. 15-point sweep monotonicity and cap attainment on 20 instances", sweeps == 20);
}

#[test]
fn acceptance_05_trade_off_direction() {
    let params = SolveParams::default();
    let mut mean_increases = Vec::new();
    let mut share_direction_holds = 0;
    let instances = paper_scale_instances(20);
    for instance in &instances {
        // Default generation uses a rental emission discount of 0.7.
        let caps = cap_grid(instance, 15, &params).unwrap();
        let sweep = sweep_emission_cap(instance, &caps, &params).unwrap();
        mean_increases.push(sweep.mean_cost_increase_pct.unwrap());

        let feasible: Vec<_> =
            sweep.rows.iter().filter(|r| r.rental_share.is_some()).collect();
        let tightest = feasible.first().unwrap().rental_share.unwrap();
        let loosest = feasible.last().unwrap().rental_share.unwrap();
        if tightest >= loosest {
            share_direction_holds += 1;
        }
    }
    let overall_mean = mean_increases.iter().sum::<f64>() / mean_increases.len() as f64;
    println!(
        "    mean cost increase across grids: {overall_mean:.2}% \
         (literature reports ~8% for comparable networks; dataset-dependent)"
    );
    report(
        &format!(
            "5. trade-off direction: mean increase {overall_mean:.2}% > 0, \
             rental share rises toward tight caps in {share_direction_holds}/20 seeds"
        ),
        overall_mean > 0.0 && share_direction_holds >= 16,
    );
}

#[test]
fn acceptance_06_builder_equivalence() {
    let mut pairs = 0;
    let mut seed = 0u64;
    'outer: loop {
        seed += 1;
        let mut rng = StdRng::seed_from_u64(seed ^ 0xb1d3);
        let dims = Dimensions::new(
            rng.gen_range(1..=2),
            rng.gen_range(1..=3),
            rng.gen_range(1..=2),
            rng.gen_range(1..=2),
        );
        let spec = GenSpec {
            dims,
            seed: rng.gen(),
            fleet_cap: IntRange::new(0, 3),
            rental_cap: IntRange::new(0, 3),
            demand: IntRange::new(0, 2),
            ..Default::default()
        };
        let Ok(mut instance) = generate(&spec) else { continue };
        instance.emission_cap = Some(rng.gen_range(0.0..600.0));
        for variant in [Variant::Base, Variant::Enhanced] {
            let (problem, map) = build_ilp(&instance, variant).unwrap();
            for _ in 0..10 {
                let solution = random_assignment(&instance, rng.gen());
                let verdict =
                    check_feasible(&instance, &solution, variant).unwrap().is_empty();
                let encoded = encode_solution(&solution, &map).unwrap();
                let row_verdict = problem.feasible(&encoded, 1e-6);
                assert_eq!(
                    verdict, row_verdict,
                    "checker and ILP rows disagree (seed {seed}, {variant})"
                );
                pairs += 1;
                if pairs >= 1000 {
                    break 'outer;
                }
            }
        }
    }
    report("6. builder/checker equivalence on 1000 random pairs", pairs == 1000);
}

fn random_assignment(instance: &Instance, seed: u64) -> Solution {
    let mut rng = StdRng::seed_from_u64(seed);
    let dims = instance.dims;
    let mut draw = |cap: u32| rng.gen_range(0..=cap + 2);
    Solution {
        version: 1,
        travel_org: Tensor4::from_fn(dims.route_shape(), |i, _, m, t| {
            draw(instance.fleet_cap.get(i, m, t))
        }),
        travel_rent: Tensor4::from_fn(dims.route_shape(), |i, _, m, t| {
            draw(instance.rental_cap.get(i, m, t))
        }),
        idle_org: Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
            draw(instance.fleet_cap.get(i, m, t))
        }),
        idle_rent: Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
            draw(instance.rental_cap.get(i, m, t))
        }),
        in_service_org: Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
            draw(instance.fleet_cap.get(i, m, t))
        }),
        in_service_rent: Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
            draw(instance.rental_cap.get(i, m, t))
        }),
    }
}

#[test]
fn acceptance_07_simplex_certificates() {
    let mut certified = 0;
    for (idx, instance) in paper_scale_instances(15).iter().enumerate() {
        for variant in [Variant::Base, Variant::Enhanced] {
            let inst = match variant {
                Variant::Base => instance.clone(),
                Variant::Enhanced => {
                    instance.with_emission_cap(Some(100.0 + 50.0 * idx as f64))
                }
            };
            let (problem, _) = build_ilp(&inst, variant).unwrap();
            let lp = solve_lp(&problem);
            if lp.status != LpStatus::Optimal {
                continue;
            }
            let certificate = verify_lp_certificate(&problem, &lp);
            assert!(
                certificate.pass(),
                "certificate failed on instance {idx} {variant}: {certificate}"
            );
            assert!(
                certificate.duality_gap <= 1e-6,
                "strong duality violated: gap {}",
                certificate.duality_gap
            );
            certified += 1;
        }
    }
    report(
        &format!("7. simplex certificates and strong duality on {certified} relaxations"),
        certified >= 20,
    );
}

#[test]
fn acceptance_08_model_size_formulas() {
    let dims = Dimensions::new(2, 3, 2, 2);
    let spec = GenSpec { dims, seed: 99, ..Default::default() };
    let instance = generate(&spec).unwrap();
    let map = VarIndexMap::new(dims);
    let (base, _) = build_ilp(&instance, Variant::Base).unwrap();
    let capped = instance.with_emission_cap(Some(1e6));
    let (enhanced, _) = build_ilp(&capped, Variant::Enhanced).unwrap();

    let pass = map.num_columns() == 80
        && base.num_columns() == 80
        && base.num_rows() == 39
        && enhanced.num_rows() == 40;
    report("8. 2x3x2x2 model size: 80 columns, 39/40 rows", pass);
}

#[test]
fn acceptance_09_performance() {
    let params = SolveParams::default();

    let instance = generate(&GenSpec { seed: 5, ..Default::default() }).unwrap();
    let started = Instant::now();
    let (status, _) = solver_outcome(&instance, Variant::Base);
    let small = started.elapsed();
    assert_eq!(status, IlpStatus::Optimal);

    let texas = texas::texas_preset(7);
    let started = Instant::now();
    let caps = cap_grid(&texas, 15, &params).unwrap();
    let sweep = sweep_emission_cap(&texas, &caps, &params).unwrap();
    let big = started.elapsed();
    assert_eq!(sweep.rows.len(), 15);

    report(
        &format!(
            "9. performance: 2x3x2x2 solve {:.3}s (< 1s), texas 15-cap sweep {:.1}s (< 60s)",
            small.as_secs_f64(),
            big.as_secs_f64()
        ),
        small.as_secs_f64() < 1.0 && big.as_secs_f64() < 60.0,
    );
}

/// Reproduction against externally published data. Point
/// `FLEET_EXTERNAL_INSTANCE` at an instance JSON converted from the
/// published dataset; without it the check is skipped, never failed.
#[test]
fn acceptance_10_external_dataset() {
    let Some(path) = std::env::var_os("FLEET_EXTERNAL_INSTANCE") else {
        println!("[SKIP] 10. external dataset check (FLEET_EXTERNAL_INSTANCE not set)");
        return;
    };
    let instance =
        fleet_core::gen::load_instance_json(std::path::Path::new(&path)).expect("readable");
    let (status, objective) = solver_outcome(&instance, Variant::Base);
    assert_eq!(status, IlpStatus::Optimal);
    let got = objective.unwrap();
    report(
        &format!("10. external dataset base objective {got} vs 16792.69"),
        (got - 16_792.69).abs() <= 0.01,
    );
}
