//! Pure evaluation of candidate solutions: objective value, feasibility,
//! emissions, budget usage, and rental share.

use super::{
    ConstraintId, ConstraintSense, Instance, ModelError, ModelOptions, Solution, Variant,
    Violation, FEASIBILITY_TOL,
};

/// The objective split into its six cost groups.
///
/// [`evaluate_objective`] is defined as the left-to-right sum of these groups,
/// so evaluating a solution equals summing its groups exactly, with no
/// floating-point reassociation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    pub travel_org: f64,
    pub travel_rent: f64,
    pub stop_org: f64,
    pub stop_rent: f64,
    pub operating: f64,
    pub renting: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.travel_org + self.travel_rent + self.stop_org + self.stop_rent + self.operating
            + self.renting
    }
}

fn dot_u32(costs: &[f64], counts: &[u32]) -> f64 {
    let mut acc = 0.0;
    for (&c, &n) in costs.iter().zip(counts) {
        acc += c * f64::from(n);
    }
    acc
}

/// Computes the six cost groups of the objective for a candidate solution.
pub fn objective_terms(
    instance: &Instance,
    solution: &Solution,
) -> Result<ObjectiveTerms, ModelError> {
    solution.check_shape(instance.dims)?;
    Ok(ObjectiveTerms {
        travel_org: dot_u32(instance.travel_cost_org.values(), solution.travel_org.values()),
        travel_rent: dot_u32(instance.travel_cost_rent.values(), solution.travel_rent.values()),
        stop_org: dot_u32(instance.stop_cost_org.values(), solution.idle_org.values()),
        stop_rent: dot_u32(instance.stop_cost_rent.values(), solution.idle_rent.values()),
        operating: dot_u32(instance.op_cost.values(), solution.in_service_org.values()),
        renting: dot_u32(instance.rent_cost.values(), solution.in_service_rent.values()),
    })
}

/// Total cost of a candidate solution: travel, stopping, operating, and
/// renting costs for both the organizational and the rental fleet.
pub fn evaluate_objective(instance: &Instance, solution: &Solution) -> Result<f64, ModelError> {
    Ok(objective_terms(instance, solution)?.total())
}

/// Total network emissions of a candidate solution in kg CO2:
/// per-km factors times route length, summed over every trip.
pub fn total_emissions(instance: &Instance, solution: &Solution) -> Result<f64, ModelError> {
    solution.check_shape(instance.dims)?;
    let dims = instance.dims;
    let mut acc = 0.0;
    for i in 0..dims.num_origins {
        for j in 0..dims.num_destinations {
            let km = instance.distance.get(i, j);
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    acc += instance.emission_org[m] * km
                        * f64::from(solution.travel_org.get(i, j, m, t));
                    acc += instance.emission_rent[m] * km
                        * f64::from(solution.travel_rent.get(i, j, m, t));
                }
            }
        }
    }
    Ok(acc)
}

/// Spend that counts against the budget: operating cost of in-service
/// organizational vehicles plus renting cost of in-service rentals.
pub fn budget_usage(instance: &Instance, solution: &Solution) -> Result<f64, ModelError> {
    solution.check_shape(instance.dims)?;
    let operating = dot_u32(instance.op_cost.values(), solution.in_service_org.values());
    let renting = dot_u32(instance.rent_cost.values(), solution.in_service_rent.values());
    Ok(operating + renting)
}

/// Fraction of traveling vehicles that are rented, in `[0, 1]`.
/// Defined as 0 when nothing travels.
pub fn rental_share(solution: &Solution) -> f64 {
    let org: u64 = solution.travel_org.values().iter().map(|&v| u64::from(v)).sum();
    let rent: u64 = solution.travel_rent.values().iter().map(|&v| u64::from(v)).sum();
    if org + rent == 0 {
        0.0
    } else {
        rent as f64 / (org + rent) as f64
    }
}

/// Checks a candidate against the full constraint system with default
/// [`ModelOptions`] and returns every violated constraint.
pub fn check_feasible(
    instance: &Instance,
    solution: &Solution,
    variant: Variant,
) -> Result<Vec<Violation>, ModelError> {
    check_feasible_with(instance, solution, variant, ModelOptions::default())
}

/// Like [`check_feasible`] with explicit formulation options.
///
/// Constraints are evaluated in a fixed order: fleet balance (organizational,
/// then rental) per (i, m, t), demand coverage, the budget, service linking
/// (organizational, then rental) per (i, m, t), the optional service bounds,
/// and finally the emission cap for [`Variant::Enhanced`]. All comparisons
/// use the absolute tolerance [`FEASIBILITY_TOL`].
pub fn check_feasible_with(
    instance: &Instance,
    solution: &Solution,
    variant: Variant,
    options: ModelOptions,
) -> Result<Vec<Violation>, ModelError> {
    solution.check_shape(instance.dims)?;
    if variant == Variant::Enhanced && instance.emission_cap.is_none() {
        return Err(ModelError::MissingEmissionCap);
    }
    let dims = instance.dims;
    let tol = FEASIBILITY_TOL;
    let mut out = Vec::new();

    let mut push = |constraint: ConstraintId, lhs: f64, rhs: f64, sense: ConstraintSense| {
        let violated = match sense {
            ConstraintSense::Le => lhs > rhs + tol,
            ConstraintSense::Ge => lhs < rhs - tol,
            ConstraintSense::Eq => (lhs - rhs).abs() > tol,
        };
        if violated {
            out.push(Violation { constraint, lhs, rhs, sense });
        }
    };

    for i in 0..dims.num_origins {
        for m in 0..dims.num_modes {
            for t in 0..dims.num_periods {
                let trips: u64 = (0..dims.num_destinations)
                    .map(|j| u64::from(solution.travel_org.get(i, j, m, t)))
                    .sum();
                push(
                    ConstraintId::FleetBalanceOrg { origin: i, mode: m, period: t },
                    trips as f64 + f64::from(solution.idle_org.get(i, m, t)),
                    f64::from(instance.fleet_cap.get(i, m, t)),
                    ConstraintSense::Eq,
                );
            }
        }
    }
    for i in 0..dims.num_origins {
        for m in 0..dims.num_modes {
            for t in 0..dims.num_periods {
                let trips: u64 = (0..dims.num_destinations)
                    .map(|j| u64::from(solution.travel_rent.get(i, j, m, t)))
                    .sum();
                push(
                    ConstraintId::FleetBalanceRent { origin: i, mode: m, period: t },
                    trips as f64 + f64::from(solution.idle_rent.get(i, m, t)),
                    f64::from(instance.rental_cap.get(i, m, t)),
                    ConstraintSense::Eq,
                );
            }
        }
    }

    if options.demand_per_mode {
        for j in 0..dims.num_destinations {
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    let mut arrivals: u64 = 0;
                    let mut required: u64 = 0;
                    for i in 0..dims.num_origins {
                        arrivals += u64::from(solution.travel_org.get(i, j, m, t));
                        arrivals += u64::from(solution.travel_rent.get(i, j, m, t));
                        required += u64::from(instance.demand.get(i, j, m, t));
                    }
                    push(
                        ConstraintId::DemandCoverPerMode { dest: j, mode: m, period: t },
                        arrivals as f64,
                        required as f64,
                        ConstraintSense::Ge,
                    );
                }
            }
        }
    } else {
        for j in 0..dims.num_destinations {
            for t in 0..dims.num_periods {
                let mut arrivals: u64 = 0;
                let mut required: u64 = 0;
                for i in 0..dims.num_origins {
                    for m in 0..dims.num_modes {
                        arrivals += u64::from(solution.travel_org.get(i, j, m, t));
                        arrivals += u64::from(solution.travel_rent.get(i, j, m, t));
                        required += u64::from(instance.demand.get(i, j, m, t));
                    }
                }
                push(
                    ConstraintId::DemandCover { dest: j, period: t },
                    arrivals as f64,
                    required as f64,
                    ConstraintSense::Ge,
                );
            }
        }
    }

    push(
        ConstraintId::Budget,
        budget_usage(instance, solution)?,
        instance.budget,
        ConstraintSense::Le,
    );

    for i in 0..dims.num_origins {
        for m in 0..dims.num_modes {
            for t in 0..dims.num_periods {
                let trips: u64 = (0..dims.num_destinations)
                    .map(|j| u64::from(solution.travel_org.get(i, j, m, t)))
                    .sum();
                push(
                    ConstraintId::ServiceLinkOrg { origin: i, mode: m, period: t },
                    trips as f64,
                    f64::from(solution.in_service_org.get(i, m, t)),
                    ConstraintSense::Le,
                );
            }
        }
    }
    for i in 0..dims.num_origins {
        for m in 0..dims.num_modes {
            for t in 0..dims.num_periods {
                let trips: u64 = (0..dims.num_destinations)
                    .map(|j| u64::from(solution.travel_rent.get(i, j, m, t)))
                    .sum();
                push(
                    ConstraintId::ServiceLinkRent { origin: i, mode: m, period: t },
                    trips as f64,
                    f64::from(solution.in_service_rent.get(i, m, t)),
                    ConstraintSense::Le,
                );
            }
        }
    }

    if options.bound_service_vars {
        for i in 0..dims.num_origins {
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    push(
                        ConstraintId::ServiceCapOrg { origin: i, mode: m, period: t },
                        f64::from(solution.in_service_org.get(i, m, t)),
                        f64::from(instance.fleet_cap.get(i, m, t)),
                        ConstraintSense::Le,
                    );
                    push(
                        ConstraintId::ServiceCapRent { origin: i, mode: m, period: t },
                        f64::from(solution.in_service_rent.get(i, m, t)),
                        f64::from(instance.rental_cap.get(i, m, t)),
                        ConstraintSense::Le,
                    );
                }
            }
        }
    }

    if variant == Variant::Enhanced {
        let cap = instance.emission_cap.expect("checked above");
        push(
            ConstraintId::EmissionCap,
            total_emissions(instance, solution)?,
            cap,
            ConstraintSense::Le,
        );
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn single_route_objective() {
        let inst = fixtures::single_route();
        let sol = fixtures::single_route_served_by_org();
        assert_eq!(evaluate_objective(&inst, &sol).unwrap(), 168.0);
    }

    #[test]
    fn idle_solution_pays_all_stopping_costs() {
        let inst = fixtures::single_route();
        let idle = Solution::idle(&inst);
        // 10 * 2 org + 8 * 1 rental
        assert_eq!(evaluate_objective(&inst, &idle).unwrap(), 28.0);
    }

    #[test]
    fn objective_is_sum_of_terms() {
        let inst = fixtures::single_route();
        let sol = fixtures::single_route_served_by_org();
        let terms = objective_terms(&inst, &sol).unwrap();
        assert_eq!(terms.travel_org, 100.0);
        assert_eq!(terms.stop_org, 10.0);
        assert_eq!(terms.stop_rent, 8.0);
        assert_eq!(terms.operating, 50.0);
        assert_eq!(terms.total(), evaluate_objective(&inst, &sol).unwrap());
    }

    #[test]
    fn feasible_solution_has_no_violations() {
        let inst = fixtures::single_route();
        let sol = fixtures::single_route_served_by_org();
        assert!(check_feasible(&inst, &sol, Variant::Base).unwrap().is_empty());
    }

    #[test]
    fn broken_fleet_balance_is_reported() {
        let inst = fixtures::single_route();
        let mut sol = fixtures::single_route_served_by_org();
        sol.idle_org.set(0, 0, 0, 0);
        let violations = check_feasible(&inst, &sol, Variant::Base).unwrap();
        assert_eq!(violations.len(), 1);
        assert_eq!(
            violations[0].constraint,
            ConstraintId::FleetBalanceOrg { origin: 0, mode: 0, period: 0 }
        );
        assert_eq!(violations[0].lhs, 1.0);
        assert_eq!(violations[0].rhs, 2.0);
    }

    #[test]
    fn emission_cap_violation_is_reported() {
        let inst = fixtures::single_route().with_emission_cap(Some(50.0));
        let sol = fixtures::single_route_served_by_org();
        let violations = check_feasible(&inst, &sol, Variant::Enhanced).unwrap();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].constraint, ConstraintId::EmissionCap);
        assert_eq!(violations[0].lhs, 100.0);
        assert_eq!(violations[0].rhs, 50.0);
    }

    #[test]
    fn enhanced_without_cap_is_a_configuration_error() {
        let inst = fixtures::single_route();
        let sol = fixtures::single_route_served_by_org();
        assert_eq!(
            check_feasible(&inst, &sol, Variant::Enhanced),
            Err(ModelError::MissingEmissionCap)
        );
    }

    #[test]
    fn emissions_of_org_and_rental_trips() {
        let inst = fixtures::single_route();
        let zeros = Solution::idle(&inst);
        assert_eq!(total_emissions(&inst, &zeros).unwrap(), 0.0);

        let org = fixtures::single_route_served_by_org();
        assert_eq!(total_emissions(&inst, &org).unwrap(), 100.0);

        let rent = fixtures::single_route_served_by_rental();
        assert_eq!(total_emissions(&inst, &rent).unwrap(), 70.0);
    }

    #[test]
    fn budget_usage_sums_operating_and_renting() {
        let inst = fixtures::single_route();
        let mut sol = Solution::idle(&inst);
        assert_eq!(budget_usage(&inst, &sol).unwrap(), 0.0);
        sol.in_service_org.set(0, 0, 0, 1);
        assert_eq!(budget_usage(&inst, &sol).unwrap(), 50.0);
        sol.in_service_rent.set(0, 0, 0, 1);
        assert_eq!(budget_usage(&inst, &sol).unwrap(), 110.0);
    }

    #[test]
    fn rental_share_conventions() {
        let inst = fixtures::single_route();
        let mut sol = Solution::zeros(inst.dims);
        assert_eq!(rental_share(&sol), 0.0);
        sol.travel_org.set(0, 0, 0, 0, 1);
        sol.travel_rent.set(0, 0, 0, 0, 1);
        assert_eq!(rental_share(&sol), 0.5);
        sol.travel_org.set(0, 0, 0, 0, 0);
        sol.travel_rent.set(0, 0, 0, 0, 3);
        assert_eq!(rental_share(&sol), 1.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let inst = fixtures::single_route();
        let other = Solution::zeros(crate::model::Dimensions::new(2, 1, 1, 1));
        assert!(matches!(
            evaluate_objective(&inst, &other),
            Err(ModelError::ShapeMismatch { .. })
        ));
    }
}
