//! Exhaustive ground-truth solver for tiny instances.
//!
//! The search space collapses to the trip assignments alone: the balance
//! equalities fix the idle counts from the trips, and with nonnegative
//! operating and renting costs the cheapest in-service counts equal the trip
//! totals. The oracle therefore enumerates, per origin/mode/period, every
//! way to spread at most the available vehicles over the destinations, for
//! the organizational and the rental fleet independently, and keeps the best
//! assignment that satisfies the remaining constraints.
//!
//! There is deliberately no pruning here; the value of this module is that
//! it stays too simple to share a bug with the real solver.

use crate::model::{
    check_feasible, evaluate_objective, Instance, ModelError, Solution, Variant, FEASIBILITY_TOL,
};
use crate::tensor::{Tensor3, Tensor4};
use thiserror::Error;

/// Default ceiling on the number of enumerated assignments.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Size of the oracle's search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSpace {
    /// Number of assignments, saturated at `u128::MAX` on overflow.
    pub combinations: u128,
    /// True when the true count exceeded the `u128` range.
    pub saturated: bool,
}

impl SearchSpace {
    pub fn within(&self, limit: u128) -> bool {
        !self.saturated && self.combinations <= limit
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("search space of {combinations} assignments exceeds the limit of {limit}")]
    TooLarge { combinations: u128, limit: u128 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of a brute-force solve.
#[derive(Debug, Clone, PartialEq)]
pub enum BruteForceOutcome {
    Optimal { solution: Solution, objective: f64 },
    Infeasible,
}

/// Number of ways to distribute at most `cap` trips over `dests`
/// destinations: `C(cap + dests, dests)`.
fn distributions(cap: u32, dests: usize) -> Option<u128> {
    // Build the binomial iteratively; each partial product is itself a
    // binomial coefficient, so the division is exact.
    let n = cap as u128;
    let mut result: u128 = 1;
    for s in 1..=dests as u128 {
        result = result.checked_mul(n + s)? / s;
    }
    Some(result)
}

/// Exact number of assignments [`brute_force_solve`] would enumerate.
pub fn enumeration_size(instance: &Instance) -> SearchSpace {
    let dims = instance.dims;
    let dests = dims.num_destinations;
    let mut total: u128 = 1;
    let mut saturated = false;
    let mut absorb = |cap: u32| {
        let ways = distributions(cap, dests);
        match ways.and_then(|w| total.checked_mul(w)) {
            Some(t) => total = t,
            None => saturated = true,
        }
    };
    for i in 0..dims.num_origins {
        for m in 0..dims.num_modes {
            for t in 0..dims.num_periods {
                absorb(instance.fleet_cap.get(i, m, t));
                absorb(instance.rental_cap.get(i, m, t));
            }
        }
    }
    SearchSpace { combinations: if saturated { u128::MAX } else { total }, saturated }
}

/// Derives the dependent decision arrays from a trip assignment:
/// idle counts from the balance equalities, in-service counts as the trip
/// totals.
pub fn derive_solution(
    instance: &Instance,
    travel_org: &Tensor4<u32>,
    travel_rent: &Tensor4<u32>,
) -> Solution {
    let dims = instance.dims;
    let trips = |tensor: &Tensor4<u32>, i: usize, m: usize, t: usize| -> u32 {
        (0..dims.num_destinations).map(|j| tensor.get(i, j, m, t)).sum()
    };
    let idle_org = Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
        instance.fleet_cap.get(i, m, t) - trips(travel_org, i, m, t)
    });
    let idle_rent = Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
        instance.rental_cap.get(i, m, t) - trips(travel_rent, i, m, t)
    });
    let in_service_org =
        Tensor3::from_fn(dims.origin_shape(), |i, m, t| trips(travel_org, i, m, t));
    let in_service_rent =
        Tensor3::from_fn(dims.origin_shape(), |i, m, t| trips(travel_rent, i, m, t));
    Solution {
        version: 1,
        travel_org: travel_org.clone(),
        travel_rent: travel_rent.clone(),
        idle_org,
        idle_rent,
        in_service_org,
        in_service_rent,
    }
}

/// Solves an instance by full enumeration with the default size limit.
pub fn brute_force_solve(
    instance: &Instance,
    variant: Variant,
) -> Result<BruteForceOutcome, OracleError> {
    brute_force_solve_with_limit(instance, variant, DEFAULT_ENUMERATION_LIMIT)
}

/// Solves an instance by full enumeration, refusing search spaces larger
/// than `limit`. Ties on the objective go to the lexicographically smallest
/// flattened `(x, xr)` pair, which makes the result deterministic.
pub fn brute_force_solve_with_limit(
    instance: &Instance,
    variant: Variant,
    limit: u128,
) -> Result<BruteForceOutcome, OracleError> {
    instance.validate()?;
    if variant == Variant::Enhanced && instance.emission_cap.is_none() {
        return Err(ModelError::MissingEmissionCap.into());
    }
    let space = enumeration_size(instance);
    if !space.within(limit) {
        return Err(OracleError::TooLarge { combinations: space.combinations, limit });
    }

    let mut search = Search::new(instance, variant);
    search.descend(0);
    let Some(best) = search.best else {
        return Ok(BruteForceOutcome::Infeasible);
    };

    let solution = derive_solution(instance, &best.travel_org, &best.travel_rent);
    debug_assert!(
        check_feasible(instance, &solution, variant).expect("shapes match").is_empty(),
        "oracle winner must satisfy the full constraint check"
    );
    let objective = evaluate_objective(instance, &solution).expect("shapes match");
    Ok(BruteForceOutcome::Optimal { solution, objective })
}

struct Incumbent {
    objective: f64,
    travel_org: Tensor4<u32>,
    travel_rent: Tensor4<u32>,
}

struct Search<'a> {
    instance: &'a Instance,
    variant: Variant,
    /// One entry per (origin, mode, period) and fleet side, in block order:
    /// all organizational blocks first, then all rental blocks.
    blocks: Vec<Block>,
    travel_org: Tensor4<u32>,
    travel_rent: Tensor4<u32>,
    best: Option<Incumbent>,
}

#[derive(Clone, Copy)]
struct Block {
    origin: usize,
    mode: usize,
    period: usize,
    cap: u32,
    rental: bool,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, variant: Variant) -> Self {
        let dims = instance.dims;
        let mut blocks = Vec::with_capacity(2 * dims.num_origins * dims.num_modes * dims.num_periods);
        for rental in [false, true] {
            for i in 0..dims.num_origins {
                for m in 0..dims.num_modes {
                    for t in 0..dims.num_periods {
                        let cap = if rental {
                            instance.rental_cap.get(i, m, t)
                        } else {
                            instance.fleet_cap.get(i, m, t)
                        };
                        blocks.push(Block { origin: i, mode: m, period: t, cap, rental });
                    }
                }
            }
        }
        Self {
            instance,
            variant,
            blocks,
            travel_org: Tensor4::filled(dims.route_shape(), 0),
            travel_rent: Tensor4::filled(dims.route_shape(), 0),
            best: None,
        }
    }

    fn descend(&mut self, block_idx: usize) {
        if block_idx == self.blocks.len() {
            self.offer_leaf();
            return;
        }
        let block = self.blocks[block_idx];
        self.fill_block(block_idx, block, 0, block.cap);
    }

    /// Enumerates trips for one block destination by destination, ascending,
    /// which makes the overall enumeration order deterministic.
    fn fill_block(&mut self, block_idx: usize, block: Block, dest: usize, remaining: u32) {
        if dest == self.instance.dims.num_destinations {
            self.descend(block_idx + 1);
            return;
        }
        for trips in 0..=remaining {
            let tensor = if block.rental { &mut self.travel_rent } else { &mut self.travel_org };
            tensor.set(block.origin, dest, block.mode, block.period, trips);
            self.fill_block(block_idx, block, dest + 1, remaining - trips);
        }
        let tensor = if block.rental { &mut self.travel_rent } else { &mut self.travel_org };
        tensor.set(block.origin, dest, block.mode, block.period, 0);
    }

    /// Evaluates the current trip assignment without allocating. The derived
    /// idle and in-service counts satisfy the balance and linking rows by
    /// construction, so only demand coverage, the budget, and the emission
    /// cap need checking.
    fn offer_leaf(&mut self) {
        let inst = self.instance;
        let dims = inst.dims;
        let tol = FEASIBILITY_TOL;

        for j in 0..dims.num_destinations {
            for t in 0..dims.num_periods {
                let mut arrivals: u64 = 0;
                let mut required: u64 = 0;
                for i in 0..dims.num_origins {
                    for m in 0..dims.num_modes {
                        arrivals += u64::from(self.travel_org.get(i, j, m, t));
                        arrivals += u64::from(self.travel_rent.get(i, j, m, t));
                        required += u64::from(inst.demand.get(i, j, m, t));
                    }
                }
                if arrivals < required {
                    return;
                }
            }
        }

        let mut objective = 0.0;
        let mut spend = 0.0;
        for i in 0..dims.num_origins {
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    let mut org_trips: u32 = 0;
                    let mut rent_trips: u32 = 0;
                    for j in 0..dims.num_destinations {
                        let x = self.travel_org.get(i, j, m, t);
                        let xr = self.travel_rent.get(i, j, m, t);
                        org_trips += x;
                        rent_trips += xr;
                        objective += inst.travel_cost_org.get(i, j, m, t) * f64::from(x);
                        objective += inst.travel_cost_rent.get(i, j, m, t) * f64::from(xr);
                    }
                    let idle_org = inst.fleet_cap.get(i, m, t) - org_trips;
                    let idle_rent = inst.rental_cap.get(i, m, t) - rent_trips;
                    objective += inst.stop_cost_org.get(i, m, t) * f64::from(idle_org);
                    objective += inst.stop_cost_rent.get(i, m, t) * f64::from(idle_rent);
                    let block_spend = inst.op_cost.get(i, m, t) * f64::from(org_trips)
                        + inst.rent_cost.get(i, m, t) * f64::from(rent_trips);
                    objective += block_spend;
                    spend += block_spend;
                }
            }
        }
        if spend > inst.budget + tol {
            return;
        }

        if self.variant == Variant::Enhanced {
            let cap = inst.emission_cap.expect("enhanced requires a cap");
            let mut emissions = 0.0;
            for i in 0..dims.num_origins {
                for j in 0..dims.num_destinations {
                    let km = inst.distance.get(i, j);
                    for m in 0..dims.num_modes {
                        for t in 0..dims.num_periods {
                            emissions += inst.emission_org[m]
                                * km
                                * f64::from(self.travel_org.get(i, j, m, t));
                            emissions += inst.emission_rent[m]
                                * km
                                * f64::from(self.travel_rent.get(i, j, m, t));
                        }
                    }
                }
            }
            if emissions > cap + tol {
                return;
            }
        }

        let replace = match &self.best {
            None => true,
            Some(inc) if objective < inc.objective => true,
            Some(inc) if objective == inc.objective => {
                lex_smaller(
                    (self.travel_org.values(), self.travel_rent.values()),
                    (inc.travel_org.values(), inc.travel_rent.values()),
                )
            }
            Some(_) => false,
        };
        if replace {
            self.best = Some(Incumbent {
                objective,
                travel_org: self.travel_org.clone(),
                travel_rent: self.travel_rent.clone(),
            });
        }
    }
}

fn lex_smaller(candidate: (&[u32], &[u32]), incumbent: (&[u32], &[u32])) -> bool {
    let cand = candidate.0.iter().chain(candidate.1);
    let inc = incumbent.0.iter().chain(incumbent.1);
    cand.lt(inc)
}
