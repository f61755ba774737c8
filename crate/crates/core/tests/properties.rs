//! Cross-module invariants, exercised on randomized inputs.

use fleet_core::gen::{generate, FloatRange, GenSpec, IntRange};
use fleet_core::ilp::{build_ilp_with, encode_solution, extract_solution};
use fleet_core::model::{
    check_feasible_with, evaluate_objective, objective_terms, total_emissions, Dimensions,
    Instance, ModelOptions, Solution, Variant,
};
use fleet_core::oracle::{brute_force_solve, BruteForceOutcome};
use fleet_core::simplex::{solve_lp, LpStatus};
use fleet_core::tensor::{Tensor3, Tensor4};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Deterministic small instance from a seed; `None` when the draw cannot
/// cover its own demand.
fn small_instance(seed: u64, max_dim: usize) -> Option<Instance> {
    let mut rng = StdRng::seed_from_u64(seed);
    let dims = Dimensions::new(
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
    );
    let spec = GenSpec {
        dims,
        seed: rng.gen(),
        fleet_cap: IntRange::new(0, 3),
        rental_cap: IntRange::new(0, 3),
        demand: IntRange::new(0, 2),
        ..Default::default()
    };
    generate(&spec).ok()
}

/// A random (not necessarily feasible) integer assignment for an instance.
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The feasibility checker and the ILP rows+bounds must agree on every
    /// assignment, for every option combination, both variants.
    #[test]
    fn checker_matches_ilp_rows(
        inst_seed in 0u64..10_000,
        assign_seed in 0u64..10_000,
        demand_per_mode in any::<bool>(),
        bound_service_vars in any::<bool>(),
        enhanced in any::<bool>(),
    ) {
        let Some(mut instance) = small_instance(inst_seed, 2) else {
            return Ok(());
        };
        let variant = if enhanced {
            instance.emission_cap = Some(f64::from(inst_seed as u32 % 400));
            Variant::Enhanced
        } else {
            Variant::Base
        };
        let options = ModelOptions { demand_per_mode, bound_service_vars };
        let solution = random_assignment(&instance, assign_seed);

        let violations = check_feasible_with(&instance, &solution, variant, options).unwrap();
        let (problem, map) = build_ilp_with(&instance, variant, options).unwrap();
        let encoded = encode_solution(&solution, &map).unwrap();
        prop_assert_eq!(violations.is_empty(), problem.feasible(&encoded, 1e-6));
    }

    /// Objective evaluation decomposes into its six groups exactly, and the
    /// ILP objective coefficients reproduce it through the encoding.
    #[test]
    fn objective_decomposition_and_encoding(inst_seed in 0u64..10_000, assign_seed in 0u64..10_000) {
        let Some(instance) = small_instance(inst_seed, 2) else {
            return Ok(());
        };
        let solution = random_assignment(&instance, assign_seed);
        let total = evaluate_objective(&instance, &solution).unwrap();
        let terms = objective_terms(&instance, &solution).unwrap();
        prop_assert_eq!(total, terms.total());

        let (problem, map) = build_ilp_with(
            &instance,
            Variant::Base,
            ModelOptions::default(),
        ).unwrap();
        let encoded = encode_solution(&solution, &map).unwrap();
        // Sum each kind block separately, then add in block order: the exact
        // association used by the evaluator.
        let mut dot = 0.0;
        for kind in fleet_core::ilp::VarKind::ALL {
            let mut group = 0.0;
            for col in map.block_range(kind) {
                group += problem.columns[col].objective * encoded[col];
            }
            dot += group;
        }
        prop_assert_eq!(dot, total);
    }

    /// Scaling every cost table by a power of two scales the objective
    /// exactly; scaling by an arbitrary positive factor scales it to within
    /// rounding.
    #[test]
    fn objective_scales_linearly(
        inst_seed in 0u64..10_000,
        assign_seed in 0u64..10_000,
        pow in -3i32..6,
        lambda in 0.1f64..50.0,
    ) {
        let Some(instance) = small_instance(inst_seed, 2) else {
            return Ok(());
        };
        let solution = random_assignment(&instance, assign_seed);
        let base = evaluate_objective(&instance, &solution).unwrap();

        let scale_instance = |factor: f64| {
            let mut scaled = instance.clone();
            let scale3 = |t: &Tensor3<f64>| {
                Tensor3::from_fn(t.shape(), |a, b, c| t.get(a, b, c) * factor)
            };
            let scale4 = |t: &Tensor4<f64>| {
                Tensor4::from_fn(t.shape(), |a, b, c, d| t.get(a, b, c, d) * factor)
            };
            scaled.stop_cost_org = scale3(&instance.stop_cost_org);
            scaled.stop_cost_rent = scale3(&instance.stop_cost_rent);
            scaled.travel_cost_org = scale4(&instance.travel_cost_org);
            scaled.travel_cost_rent = scale4(&instance.travel_cost_rent);
            scaled.op_cost = scale3(&instance.op_cost);
            scaled.rent_cost = scale3(&instance.rent_cost);
            scaled
        };

        let two_pow = (2.0f64).powi(pow);
        let exact = evaluate_objective(&scale_instance(two_pow), &solution).unwrap();
        prop_assert_eq!(exact, base * two_pow);

        let approx = evaluate_objective(&scale_instance(lambda), &solution).unwrap();
        let expected = base * lambda;
        prop_assert!((approx - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
    }

    /// Encoding then extracting any integer solution is the identity.
    #[test]
    fn encode_extract_round_trip(inst_seed in 0u64..10_000, assign_seed in 0u64..10_000) {
        let Some(instance) = small_instance(inst_seed, 2) else {
            return Ok(());
        };
        let solution = random_assignment(&instance, assign_seed);
        let map = fleet_core::ilp::VarIndexMap::new(instance.dims);
        let encoded = encode_solution(&solution, &map).unwrap();
        let back = extract_solution(&encoded, &map).unwrap();
        prop_assert_eq!(back, solution);
    }

    /// `total_emissions` is zero exactly when no trip travels a positive
    /// distance with a positive factor.
    #[test]
    fn zero_emissions_iff_no_emitting_trip(inst_seed in 0u64..10_000, assign_seed in 0u64..10_000) {
        let Some(instance) = small_instance(inst_seed, 2) else {
            return Ok(());
        };
        let solution = random_assignment(&instance, assign_seed);
        let emissions = total_emissions(&instance, &solution).unwrap();
        let dims = instance.dims;
        let mut any_emitting = false;
        for i in 0..dims.num_origins {
            for j in 0..dims.num_destinations {
                for m in 0..dims.num_modes {
                    for t in 0..dims.num_periods {
                        let km = instance.distance.get(i, j);
                        let org = f64::from(solution.travel_org.get(i, j, m, t))
                            * instance.emission_org[m];
                        let rent = f64::from(solution.travel_rent.get(i, j, m, t))
                            * instance.emission_rent[m];
                        if km > 0.0 && org + rent > 0.0 {
                            any_emitting = true;
                        }
                    }
                }
            }
        }
        prop_assert_eq!(emissions > 0.0, any_emitting);
    }
}

/// Every violation the checker reports must match a direct, independent
/// recomputation of that constraint.
#[test]
fn violations_match_independent_recomputation() {
    for seed in 0..40u64 {
        let Some(mut instance) = small_instance(seed, 2) else { continue };
        instance.emission_cap = Some(150.0);
        let solution = random_assignment(&instance, seed.wrapping_mul(31));
        let violations =
            check_feasible_with(&instance, &solution, Variant::Enhanced, ModelOptions::default())
                .unwrap();

        let dims = instance.dims;
        let mut expected = 0usize;
        for i in 0..dims.num_origins {
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    let x: u32 =
                        (0..dims.num_destinations).map(|j| solution.travel_org.get(i, j, m, t)).sum();
                    if x + solution.idle_org.get(i, m, t) != instance.fleet_cap.get(i, m, t) {
                        expected += 1;
                    }
                    let xr: u32 = (0..dims.num_destinations)
                        .map(|j| solution.travel_rent.get(i, j, m, t))
                        .sum();
                    if xr + solution.idle_rent.get(i, m, t) != instance.rental_cap.get(i, m, t) {
                        expected += 1;
                    }
                    if x > solution.in_service_org.get(i, m, t) {
                        expected += 1;
                    }
                    if xr > solution.in_service_rent.get(i, m, t) {
                        expected += 1;
                    }
                }
            }
        }
        for j in 0..dims.num_destinations {
            for t in 0..dims.num_periods {
                let mut arrivals = 0u32;
                let mut needed = 0u32;
                for i in 0..dims.num_origins {
                    for m in 0..dims.num_modes {
                        arrivals += solution.travel_org.get(i, j, m, t)
                            + solution.travel_rent.get(i, j, m, t);
                        needed += instance.demand.get(i, j, m, t);
                    }
                }
                if arrivals < needed {
                    expected += 1;
                }
            }
        }
        let mut spend = 0.0;
        for i in 0..dims.num_origins {
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    spend += instance.op_cost.get(i, m, t)
                        * f64::from(solution.in_service_org.get(i, m, t));
                    spend += instance.rent_cost.get(i, m, t)
                        * f64::from(solution.in_service_rent.get(i, m, t));
                }
            }
        }
        if spend > instance.budget + 1e-6 {
            expected += 1;
        }
        if total_emissions(&instance, &solution).unwrap() > 150.0 + 1e-6 {
            expected += 1;
        }
        assert_eq!(violations.len(), expected, "seed {seed}");
    }
}

/// For zero-demand instances the fully idle plan is feasible in both
/// variants whenever the cap is nonnegative.
#[test]
fn idle_plan_feasible_without_demand() {
    for seed in 0..20u64 {
        let Some(mut instance) = small_instance(seed, 2) else { continue };
        instance.demand = Tensor4::filled(instance.dims.route_shape(), 0);
        let idle = Solution::idle(&instance);
        assert!(check_feasible_with(&instance, &idle, Variant::Base, ModelOptions::default())
            .unwrap()
            .is_empty());
        instance.emission_cap = Some(0.0);
        assert!(check_feasible_with(
            &instance,
            &idle,
            Variant::Enhanced,
            ModelOptions::default()
        )
        .unwrap()
        .is_empty());
    }
}

/// The LP relaxation never exceeds the objective of any feasible integer
/// assignment the oracle enumerates.
#[test]
fn relaxation_bounds_every_integer_solution() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let Some(instance) = small_instance(seed, 2) else { continue };
        if !fleet_core::oracle::enumeration_size(&instance).within(20_000) {
            continue;
        }
        let (problem, _) = build_ilp_with(&instance, Variant::Base, ModelOptions::default())
            .unwrap();
        let lp = solve_lp(&problem);
        if lp.status != LpStatus::Optimal {
            continue;
        }
        match brute_force_solve(&instance, Variant::Base).unwrap() {
            BruteForceOutcome::Optimal { objective, .. } => {
                assert!(
                    lp.objective <= objective + 1e-6 * (1.0 + objective.abs()),
                    "seed {seed}: relaxation {} above integer optimum {objective}",
                    lp.objective
                );
                checked += 1;
            }
            BruteForceOutcome::Infeasible => {}
        }
        if checked >= 25 {
            break;
        }
    }
    assert!(checked >= 10, "only {checked} instances exercised");
}
