//! A ready-made network over five major Texan cities and three road modes.
//!
//! Distances are approximate highway driving distances in kilometres between
//! the city pairs (rounded from common route-planner figures). Cost ranges
//! are derived from published average trucking operating costs (on the order
//! of 2.2 USD per mile, i.e. roughly 1.4 USD per km, split across driver,
//! fuel, and equipment), scaled per trip for the route lengths involved.
//! Per-km emission factors are typical figures for a loaded straight truck,
//! a tractor-trailer, and a cargo van.

use super::{generate, FloatRange, GenSpec, IntRange};
use crate::model::{Dimensions, Instance};
use crate::tensor::Tensor2;

pub const CITIES: [&str; 5] = ["Dallas", "Houston", "San Antonio", "Austin", "Fort Worth"];
pub const MODES: [&str; 3] = ["truck", "trailer", "van"];

/// Highway distances in km, indexed like [`CITIES`].
pub const DISTANCES_KM: [[f64; 5]; 5] = [
    [0.0, 385.0, 440.0, 314.0, 52.0],
    [385.0, 0.0, 317.0, 266.0, 425.0],
    [440.0, 317.0, 0.0, 127.0, 431.0],
    [314.0, 266.0, 127.0, 0.0, 304.0],
    [52.0, 425.0, 431.0, 304.0, 0.0],
];

/// Organizational per-km emission factors (kg CO2/km) per mode.
pub const EMISSION_ORG: [f64; 3] = [0.85, 1.10, 0.25];

/// The generator spec behind the preset, exposed so callers can tweak it.
pub fn texas_spec(seed: u64, periods: usize) -> GenSpec {
    GenSpec {
        dims: Dimensions::new(CITIES.len(), CITIES.len(), MODES.len(), periods),
        seed,
        fleet_cap: IntRange::new(1, 4),
        rental_cap: IntRange::new(1, 3),
        demand: IntRange::new(0, 1),
        stop_cost_org: FloatRange::new(20.0, 90.0),
        stop_cost_rent: FloatRange::new(15.0, 75.0),
        travel_cost_org: FloatRange::new(100.0, 650.0),
        travel_cost_rent: FloatRange::new(120.0, 750.0),
        op_cost: FloatRange::new(60.0, 180.0),
        rent_cost: FloatRange::new(120.0, 320.0),
        distance: FloatRange::new(52.0, 440.0),
        emission_org: FloatRange::new(0.25, 1.1),
        rental_emission_discount: 0.7,
        budget_slack: 2.0,
    }
}

/// Generates the preset with the default two periods.
pub fn texas_preset(seed: u64) -> Instance {
    texas_preset_with_periods(seed, 2)
}

/// Generates the preset instance: random capacities, demand, and costs, with
/// the fixed distance table and fixed per-mode emission factors.
pub fn texas_preset_with_periods(seed: u64, periods: usize) -> Instance {
    let spec = texas_spec(seed, periods);
    let mut instance = generate(&spec).expect("the preset spec is valid and coverable");
    instance.distance =
        Tensor2::from_fn([CITIES.len(), CITIES.len()], |i, j| DISTANCES_KM[i][j]);
    instance.emission_org = EMISSION_ORG.to_vec();
    instance.emission_rent =
        EMISSION_ORG.iter().map(|e| e * spec.rental_emission_discount).collect();
    instance.validate().expect("preset instances are valid");
    instance
}
