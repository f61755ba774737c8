//! Seeded, reproducible instance generation.
//!
//! Every parameter family draws from its own ChaCha8 stream (same 64-bit
//! seed, distinct stream id), so adding a family or changing how many values
//! one family consumes never perturbs the draws of another. Two calls with
//! the same [`GenSpec`] produce byte-identical instances, on any platform.
//!
//! The budget is not drawn: it is calibrated as `budget_slack` times the
//! spend of the cheapest demand-covering assignment, so generated instances
//! are always feasible for the base model.

mod loader;
pub mod texas;

pub use loader::{load_instance_json, load_long_csv_dir};

use crate::model::{Dimensions, Instance, ModelError};
use crate::tensor::{Tensor2, Tensor3, Tensor4};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEMAND_RETRIES: usize = 100;

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

impl IntRange {
    pub const fn new(min: u32, max: u32) -> Self {
        Self { min, max }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u32 {
        rng.gen_range(self.min..=self.max)
    }
}

/// Half-open float range; degenerate ranges (`min == max`) draw the constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatRange {
    pub min: f64,
    pub max: f64,
}

impl FloatRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min..self.max)
        }
    }
}

/// Everything [`generate`] needs: dimensions, a seed, and per-parameter
/// ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub dims: Dimensions,
    pub seed: u64,
    pub fleet_cap: IntRange,
    pub rental_cap: IntRange,
    pub demand: IntRange,
    pub stop_cost_org: FloatRange,
    pub stop_cost_rent: FloatRange,
    pub travel_cost_org: FloatRange,
    pub travel_cost_rent: FloatRange,
    pub op_cost: FloatRange,
    pub rent_cost: FloatRange,
    pub distance: FloatRange,
    pub emission_org: FloatRange,
    /// Rental emission factors are this fraction of the organizational ones;
    /// at most 1 because rentals are modeled as the newer, cleaner fleet.
    pub rental_emission_discount: f64,
    /// Budget headroom over the cheapest demand-covering spend; at least 1.
    pub budget_slack: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            dims: Dimensions::new(2, 3, 2, 2),
            seed: 0,
            fleet_cap: IntRange::new(1, 4),
            rental_cap: IntRange::new(1, 3),
            demand: IntRange::new(0, 3),
            stop_cost_org: FloatRange::new(5.0, 25.0),
            stop_cost_rent: FloatRange::new(4.0, 20.0),
            travel_cost_org: FloatRange::new(50.0, 150.0),
            travel_cost_rent: FloatRange::new(60.0, 180.0),
            op_cost: FloatRange::new(20.0, 60.0),
            rent_cost: FloatRange::new(40.0, 100.0),
            distance: FloatRange::new(50.0, 500.0),
            emission_org: FloatRange::new(0.4, 1.2),
            rental_emission_discount: 0.7,
            budget_slack: 2.0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        let int_ranges =
            [("fleet_cap", self.fleet_cap), ("rental_cap", self.rental_cap), ("demand", self.demand)];
        for (name, r) in int_ranges {
            if r.min > r.max {
                return Err(GenError::InvalidSpec(format!("{name}: min {} > max {}", r.min, r.max)));
            }
        }
        let float_ranges = [
            ("stop_cost_org", self.stop_cost_org),
            ("stop_cost_rent", self.stop_cost_rent),
            ("travel_cost_org", self.travel_cost_org),
            ("travel_cost_rent", self.travel_cost_rent),
            ("op_cost", self.op_cost),
            ("rent_cost", self.rent_cost),
            ("distance", self.distance),
            ("emission_org", self.emission_org),
        ];
        for (name, r) in float_ranges {
            if !(r.min.is_finite() && r.max.is_finite() && r.min >= 0.0 && r.min <= r.max) {
                return Err(GenError::InvalidSpec(format!("{name}: bad range [{}, {}]", r.min, r.max)));
            }
        }
        if !(self.rental_emission_discount > 0.0 && self.rental_emission_discount <= 1.0) {
            return Err(GenError::InvalidSpec(format!(
                "rental_emission_discount must lie in (0, 1], got {}",
                self.rental_emission_discount
            )));
        }
        if !(self.budget_slack >= 1.0 && self.budget_slack.is_finite()) {
            return Err(GenError::InvalidSpec(format!(
                "budget_slack must be at least 1, got {}",
                self.budget_slack
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<GenSpec, GenError> {
        let spec: GenSpec =
            serde_json::from_str(text).map_err(|e| GenError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("the drawn capacities cannot cover any demand drawn in {0} attempts")]
    DemandRetriesExhausted(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Stream ids per parameter family. Values are stable identifiers: renaming
/// or reordering families must not change them.
#[derive(Clone, Copy)]
enum Family {
    FleetCap = 1,
    RentalCap = 2,
    Demand = 3,
    StopOrg = 4,
    StopRent = 5,
    TravelOrg = 6,
    TravelRent = 7,
    OpCost = 8,
    RentCost = 9,
    Distance = 10,
    Emission = 11,
}

fn family_rng(seed: u64, family: Family) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family as u64);
    rng
}

/// Generates a valid instance, deterministic in the spec.
pub fn generate(spec: &GenSpec) -> Result<Instance, GenError> {
    spec.validate()?;
    let dims = spec.dims;
    if dims.num_origins == 0
        || dims.num_destinations == 0
        || dims.num_modes == 0
        || dims.num_periods == 0
    {
        return Err(GenError::Model(ModelError::EmptyDimension));
    }

    let fleet_cap = draw_tensor3(spec.seed, Family::FleetCap, dims, spec.fleet_cap);
    let rental_cap = draw_tensor3(spec.seed, Family::RentalCap, dims, spec.rental_cap);
    let demand = draw_coverable_demand(spec, &fleet_cap, &rental_cap)?;

    let stop_cost_org = draw_cost3(spec.seed, Family::StopOrg, dims, spec.stop_cost_org);
    let stop_cost_rent = draw_cost3(spec.seed, Family::StopRent, dims, spec.stop_cost_rent);
    let travel_cost_org = draw_cost4(spec.seed, Family::TravelOrg, dims, spec.travel_cost_org);
    let travel_cost_rent = draw_cost4(spec.seed, Family::TravelRent, dims, spec.travel_cost_rent);
    let op_cost = draw_cost3(spec.seed, Family::OpCost, dims, spec.op_cost);
    let rent_cost = draw_cost3(spec.seed, Family::RentCost, dims, spec.rent_cost);
    let distance = draw_distance(spec, dims);

    let mut rng = family_rng(spec.seed, Family::Emission);
    let emission_org: Vec<f64> = (0..dims.num_modes).map(|_| spec.emission_org.draw(&mut rng)).collect();
    let emission_rent: Vec<f64> =
        emission_org.iter().map(|&e| e * spec.rental_emission_discount).collect();

    let budget = spec.budget_slack
        * cheapest_cover_spend(dims, &fleet_cap, &rental_cap, &demand, &op_cost, &rent_cost);

    let instance = Instance {
        version: 1,
        dims,
        fleet_cap,
        rental_cap,
        demand,
        stop_cost_org,
        stop_cost_rent,
        travel_cost_org,
        travel_cost_rent,
        budget,
        op_cost,
        rent_cost,
        emission_org,
        emission_rent,
        distance,
        emission_cap: None,
    };
    instance.validate()?;
    Ok(instance)
}

fn draw_tensor3(seed: u64, family: Family, dims: Dimensions, range: IntRange) -> Tensor3<u32> {
    let mut rng = family_rng(seed, family);
    Tensor3::from_fn(dims.origin_shape(), |_, _, _| range.draw(&mut rng))
}

fn draw_cost3(seed: u64, family: Family, dims: Dimensions, range: FloatRange) -> Tensor3<f64> {
    let mut rng = family_rng(seed, family);
    Tensor3::from_fn(dims.origin_shape(), |_, _, _| range.draw(&mut rng))
}

fn draw_cost4(seed: u64, family: Family, dims: Dimensions, range: FloatRange) -> Tensor4<f64> {
    let mut rng = family_rng(seed, family);
    Tensor4::from_fn(dims.route_shape(), |_, _, _, _| range.draw(&mut rng))
}

/// Distances are symmetric with a zero diagonal when origins and
/// destinations coincide; otherwise every pair is drawn independently.
fn draw_distance(spec: &GenSpec, dims: Dimensions) -> Tensor2<f64> {
    let mut rng = family_rng(spec.seed, Family::Distance);
    let n = dims.num_origins;
    if n == dims.num_destinations {
        let mut table = Tensor2::filled([n, n], 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = spec.distance.draw(&mut rng);
                table.set(i, j, d);
                table.set(j, i, d);
            }
        }
        table
    } else {
        Tensor2::from_fn([n, dims.num_destinations], |_, _| spec.distance.draw(&mut rng))
    }
}

/// Redraws the whole demand table until every period's total demand fits the
/// period's fleet. Retries keep consuming the demand stream, which stays
/// deterministic in the seed.
fn draw_coverable_demand(
    spec: &GenSpec,
    fleet_cap: &Tensor3<u32>,
    rental_cap: &Tensor3<u32>,
) -> Result<Tensor4<u32>, GenError> {
    let dims = spec.dims;
    let mut rng = family_rng(spec.seed, Family::Demand);
    let supply_per_period: Vec<u64> = (0..dims.num_periods)
        .map(|t| {
            let mut total = 0u64;
            for i in 0..dims.num_origins {
                for m in 0..dims.num_modes {
                    total += u64::from(fleet_cap.get(i, m, t)) + u64::from(rental_cap.get(i, m, t));
                }
            }
            total
        })
        .collect();

    for _ in 0..DEMAND_RETRIES {
        let demand = Tensor4::from_fn(dims.route_shape(), |_, _, _, _| spec.demand.draw(&mut rng));
        let coverable = (0..dims.num_periods).all(|t| {
            let mut needed = 0u64;
            for i in 0..dims.num_origins {
                for j in 0..dims.num_destinations {
                    for m in 0..dims.num_modes {
                        needed += u64::from(demand.get(i, j, m, t));
                    }
                }
            }
            needed <= supply_per_period[t]
        });
        if coverable {
            return Ok(demand);
        }
    }
    Err(GenError::DemandRetriesExhausted(DEMAND_RETRIES))
}

/// Spend of the cheapest demand-covering assignment: per period, serve the
/// aggregated demand with the cheapest available units (operating cost for
/// fleet vehicles, renting cost for rentals). Demand aggregation over
/// origins and modes means any unit can serve any destination, so a greedy
/// sweep by unit cost is exact.
fn cheapest_cover_spend(
    dims: Dimensions,
    fleet_cap: &Tensor3<u32>,
    rental_cap: &Tensor3<u32>,
    demand: &Tensor4<u32>,
    op_cost: &Tensor3<f64>,
    rent_cost: &Tensor3<f64>,
) -> f64 {
    let mut total = 0.0;
    for t in 0..dims.num_periods {
        let mut needed: u64 = 0;
        for i in 0..dims.num_origins {
            for j in 0..dims.num_destinations {
                for m in 0..dims.num_modes {
                    needed += u64::from(demand.get(i, j, m, t));
                }
            }
        }
        if needed == 0 {
            continue;
        }
        let mut units: Vec<(f64, u64)> = Vec::new();
        for i in 0..dims.num_origins {
            for m in 0..dims.num_modes {
                units.push((op_cost.get(i, m, t), u64::from(fleet_cap.get(i, m, t))));
                units.push((rent_cost.get(i, m, t), u64::from(rental_cap.get(i, m, t))));
            }
        }
        units.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("costs are finite"));
        let mut remaining = needed;
        for (cost, count) in units {
            if remaining == 0 {
                break;
            }
            let used = remaining.min(count);
            total += cost * used as f64;
            remaining -= used;
        }
        debug_assert_eq!(remaining, 0, "demand draw guaranteed coverable");
    }
    total
}
