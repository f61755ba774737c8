//! Domain types for the multi-modal fleet assignment model.
//!
//! An [`Instance`] fixes the network: per-origin fleet and rental capacities,
//! per-route demand, the cost tables, a renting/operating budget, distances,
//! and per-mode emission factors. A [`Solution`] assigns integer vehicle
//! counts to every decision: trips per route (owned and rented), idle
//! vehicles per origin, and in-service vehicles per origin.
//!
//! Both types are immutable after construction and all evaluation functions
//! in [`crate::model`] are pure, so they can be shared freely across threads.
//!
//! # JSON schema (version 1)
//!
//! Instances serialize as a flat object: `version`, `dims` (`I`, `J`, `M`,
//! `T`), then one nested array per parameter in subscript order, e.g.
//! `demand[i][j][m][t]`, `fleet_cap[i][m][t]`, `distance[i][j]`,
//! `emission_org[m]`. `emission_cap` is `null` for the base model. Solutions
//! serialize the six decision arrays under their conventional short names
//! `x`, `xr`, `y`, `yr`, `q`, `qr`.

mod eval;

pub use eval::{
    budget_usage, check_feasible, check_feasible_with, evaluate_objective, objective_terms,
    rental_share, total_emissions, ObjectiveTerms,
};

use crate::tensor::{Tensor2, Tensor3, Tensor4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used by all feasibility comparisons. Solver output may
/// carry round-off, so exact comparisons would reject valid solutions.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Problem dimensions: origins I, destinations J, vehicle modes M, periods T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    #[serde(rename = "I")]
    pub num_origins: usize,
    #[serde(rename = "J")]
    pub num_destinations: usize,
    #[serde(rename = "M")]
    pub num_modes: usize,
    #[serde(rename = "T")]
    pub num_periods: usize,
}

impl Dimensions {
    pub fn new(origins: usize, destinations: usize, modes: usize, periods: usize) -> Self {
        Self {
            num_origins: origins,
            num_destinations: destinations,
            num_modes: modes,
            num_periods: periods,
        }
    }

    /// Shape of per-origin tables: `[i][m][t]`.
    pub fn origin_shape(&self) -> [usize; 3] {
        [self.num_origins, self.num_modes, self.num_periods]
    }

    /// Shape of per-route tables: `[i][j][m][t]`.
    pub fn route_shape(&self) -> [usize; 4] {
        [self.num_origins, self.num_destinations, self.num_modes, self.num_periods]
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.num_origins == 0
            || self.num_destinations == 0
            || self.num_modes == 0
            || self.num_periods == 0
        {
            return Err(ModelError::EmptyDimension);
        }
        Ok(())
    }
}

/// Which constraint system applies: the base model, or the enhanced model
/// that additionally caps total network emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Base,
    Enhanced,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Base => write!(f, "base"),
            Variant::Enhanced => write!(f, "enhanced"),
        }
    }
}

/// Optional deviations from the default constraint formulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Require demand coverage per (destination, mode, period) instead of the
    /// default aggregation over origins and modes per (destination, period).
    #[serde(default)]
    pub demand_per_mode: bool,
    /// Additionally bound in-service counts by the fleet: `q <= V`, `qr <= Vr`.
    /// Off by default; minimization with nonnegative operating and rental
    /// costs already drives the in-service counts down to the trip totals.
    #[serde(default)]
    pub bound_service_vars: bool,
}

/// A complete set of model parameters.
///
/// All tables must match [`Dimensions`] exactly and every numeric entry must
/// be finite and nonnegative; [`Instance::validate`] enforces this and every
/// loader calls it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    /// Schema version of the JSON encoding.
    #[serde(default = "schema_version")]
    pub version: u32,
    pub dims: Dimensions,
    /// Organizational fleet size `V[i][m][t]`.
    pub fleet_cap: Tensor3<u32>,
    /// Rentable fleet size `Vr[i][m][t]`.
    pub rental_cap: Tensor3<u32>,
    /// Vehicles required on each route, `demand[i][j][m][t]`.
    pub demand: Tensor4<u32>,
    /// Stopping cost per idle organizational vehicle, `[i][m][t]`.
    pub stop_cost_org: Tensor3<f64>,
    /// Stopping cost per idle rental vehicle, `[i][m][t]`.
    pub stop_cost_rent: Tensor3<f64>,
    /// Travel cost per organizational trip, `[i][j][m][t]`.
    pub travel_cost_org: Tensor4<f64>,
    /// Travel cost per rental trip, `[i][j][m][t]`.
    pub travel_cost_rent: Tensor4<f64>,
    /// Budget shared by operating and renting costs.
    pub budget: f64,
    /// Operating cost per in-service organizational vehicle, `[i][m][t]`.
    pub op_cost: Tensor3<f64>,
    /// Renting cost per in-service rental vehicle, `[i][m][t]`.
    pub rent_cost: Tensor3<f64>,
    /// Emission factor per organizational vehicle mode, kg CO2 per km.
    pub emission_org: Vec<f64>,
    /// Emission factor per rental vehicle mode, kg CO2 per km.
    pub emission_rent: Vec<f64>,
    /// Route length in km, `[i][j]`.
    pub distance: Tensor2<f64>,
    /// Total-network emission cap in kg CO2; `None` selects the base model.
    pub emission_cap: Option<f64>,
}

fn schema_version() -> u32 {
    1
}

impl Instance {
    /// Checks dimension consistency and numeric sanity of every parameter.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.dims.validate()?;
        let origin = self.dims.origin_shape();
        let route = self.dims.route_shape();
        let pairs3: [(&str, &Tensor3<f64>); 4] = [
            ("stop_cost_org", &self.stop_cost_org),
            ("stop_cost_rent", &self.stop_cost_rent),
            ("op_cost", &self.op_cost),
            ("rent_cost", &self.rent_cost),
        ];
        for (name, t) in pairs3 {
            check_shape(name, t.shape() == origin)?;
            check_entries(name, t.values())?;
        }
        check_shape("fleet_cap", self.fleet_cap.shape() == origin)?;
        check_shape("rental_cap", self.rental_cap.shape() == origin)?;
        check_shape("demand", self.demand.shape() == route)?;
        for (name, t) in [
            ("travel_cost_org", &self.travel_cost_org),
            ("travel_cost_rent", &self.travel_cost_rent),
        ] {
            check_shape(name, t.shape() == route)?;
            check_entries(name, t.values())?;
        }
        check_shape(
            "distance",
            self.distance.shape() == [self.dims.num_origins, self.dims.num_destinations],
        )?;
        check_entries("distance", self.distance.values())?;
        check_shape("emission_org", self.emission_org.len() == self.dims.num_modes)?;
        check_shape("emission_rent", self.emission_rent.len() == self.dims.num_modes)?;
        check_entries("emission_org", &self.emission_org)?;
        check_entries("emission_rent", &self.emission_rent)?;
        check_entries("budget", &[self.budget])?;
        if let Some(cap) = self.emission_cap {
            check_entries("emission_cap", &[cap])?;
        }
        Ok(())
    }

    /// Copy of this instance with the emission cap replaced.
    pub fn with_emission_cap(&self, cap: Option<f64>) -> Instance {
        let mut out = self.clone();
        out.emission_cap = cap;
        out
    }

    /// Parses and validates an instance from its JSON encoding.
    pub fn from_json(text: &str) -> Result<Instance, ModelError> {
        let inst: Instance =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

fn check_shape(name: &'static str, ok: bool) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::ShapeMismatch { table: name })
    }
}

fn check_entries(name: &'static str, values: &[f64]) -> Result<(), ModelError> {
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(ModelError::BadEntry { table: name, value: v });
        }
    }
    Ok(())
}

/// Integer vehicle counts for every decision in the model.
///
/// Serialized field names follow the conventional short symbols so solution
/// files stay compact and line up with common solver outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(default = "schema_version")]
    pub version: u32,
    /// Organizational trips per route, `x[i][j][m][t]`.
    #[serde(rename = "x")]
    pub travel_org: Tensor4<u32>,
    /// Rental trips per route, `xr[i][j][m][t]`.
    #[serde(rename = "xr")]
    pub travel_rent: Tensor4<u32>,
    /// Idle organizational vehicles, `y[i][m][t]`.
    #[serde(rename = "y")]
    pub idle_org: Tensor3<u32>,
    /// Idle rental vehicles, `yr[i][m][t]`.
    #[serde(rename = "yr")]
    pub idle_rent: Tensor3<u32>,
    /// In-service organizational vehicles, `q[i][m][t]`.
    #[serde(rename = "q")]
    pub in_service_org: Tensor3<u32>,
    /// In-service rental vehicles, `qr[i][m][t]`.
    #[serde(rename = "qr")]
    pub in_service_rent: Tensor3<u32>,
}

impl Solution {
    /// All-zero solution of the given dimensions.
    pub fn zeros(dims: Dimensions) -> Self {
        Self {
            version: 1,
            travel_org: Tensor4::filled(dims.route_shape(), 0),
            travel_rent: Tensor4::filled(dims.route_shape(), 0),
            idle_org: Tensor3::filled(dims.origin_shape(), 0),
            idle_rent: Tensor3::filled(dims.origin_shape(), 0),
            in_service_org: Tensor3::filled(dims.origin_shape(), 0),
            in_service_rent: Tensor3::filled(dims.origin_shape(), 0),
        }
    }

    /// The fully idle solution: no trips, the whole fleet parked.
    pub fn idle(instance: &Instance) -> Self {
        let mut s = Self::zeros(instance.dims);
        s.idle_org = instance.fleet_cap.clone();
        s.idle_rent = instance.rental_cap.clone();
        s
    }

    /// Checks that every array matches the given dimensions.
    pub fn check_shape(&self, dims: Dimensions) -> Result<(), ModelError> {
        let route = dims.route_shape();
        let origin = dims.origin_shape();
        check_shape("x", self.travel_org.shape() == route)?;
        check_shape("xr", self.travel_rent.shape() == route)?;
        check_shape("y", self.idle_org.shape() == origin)?;
        check_shape("yr", self.idle_rent.shape() == origin)?;
        check_shape("q", self.in_service_org.shape() == origin)?;
        check_shape("qr", self.in_service_rent.shape() == origin)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Solution, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialization cannot fail")
    }
}

/// Identifies one scalar constraint of the model, with its index tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintId {
    /// Trips plus idle vehicles must equal the organizational fleet.
    FleetBalanceOrg { origin: usize, mode: usize, period: usize },
    /// Trips plus idle vehicles must equal the rentable fleet.
    FleetBalanceRent { origin: usize, mode: usize, period: usize },
    /// Arriving trips must cover demand, aggregated over origins and modes.
    DemandCover { dest: usize, period: usize },
    /// Per-mode demand coverage (only with [`ModelOptions::demand_per_mode`]).
    DemandCoverPerMode { dest: usize, mode: usize, period: usize },
    /// Operating plus renting spend must stay within the budget.
    Budget,
    /// Trips out of an origin need that many organizational vehicles in service.
    ServiceLinkOrg { origin: usize, mode: usize, period: usize },
    /// Trips out of an origin need that many rental vehicles in service.
    ServiceLinkRent { origin: usize, mode: usize, period: usize },
    /// Total network emissions must stay within the cap (enhanced model).
    EmissionCap,
    /// Optional hygiene bound `q <= V` ([`ModelOptions::bound_service_vars`]).
    ServiceCapOrg { origin: usize, mode: usize, period: usize },
    /// Optional hygiene bound `qr <= Vr` ([`ModelOptions::bound_service_vars`]).
    ServiceCapRent { origin: usize, mode: usize, period: usize },
}

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ConstraintId::FleetBalanceOrg { origin, mode, period } => {
                write!(f, "fleet_balance_org[i={origin},m={mode},t={period}]")
            }
            ConstraintId::FleetBalanceRent { origin, mode, period } => {
                write!(f, "fleet_balance_rent[i={origin},m={mode},t={period}]")
            }
            ConstraintId::DemandCover { dest, period } => {
                write!(f, "demand_cover[j={dest},t={period}]")
            }
            ConstraintId::DemandCoverPerMode { dest, mode, period } => {
                write!(f, "demand_cover[j={dest},m={mode},t={period}]")
            }
            ConstraintId::Budget => write!(f, "budget"),
            ConstraintId::ServiceLinkOrg { origin, mode, period } => {
                write!(f, "service_link_org[i={origin},m={mode},t={period}]")
            }
            ConstraintId::ServiceLinkRent { origin, mode, period } => {
                write!(f, "service_link_rent[i={origin},m={mode},t={period}]")
            }
            ConstraintId::EmissionCap => write!(f, "emission_cap"),
            ConstraintId::ServiceCapOrg { origin, mode, period } => {
                write!(f, "service_cap_org[i={origin},m={mode},t={period}]")
            }
            ConstraintId::ServiceCapRent { origin, mode, period } => {
                write!(f, "service_cap_rent[i={origin},m={mode},t={period}]")
            }
        }
    }
}

/// Direction of a scalar constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintSense {
    Le,
    Ge,
    Eq,
}

impl std::fmt::Display for ConstraintSense {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintSense::Le => write!(f, "<="),
            ConstraintSense::Ge => write!(f, ">="),
            ConstraintSense::Eq => write!(f, "="),
        }
    }
}

/// One violated constraint, with both sides recorded exactly as evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub lhs: f64,
    pub rhs: f64,
    pub sense: ConstraintSense,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} {} {} violated", self.constraint, self.lhs, self.sense, self.rhs)
    }
}

/// Errors from constructing or evaluating model data.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("every dimension must be at least 1")]
    EmptyDimension,
    #[error("table `{table}` does not match the instance dimensions")]
    ShapeMismatch { table: &'static str },
    #[error("table `{table}` contains a non-finite or negative entry ({value})")]
    BadEntry { table: &'static str, value: f64 },
    #[error("the enhanced model requires an emission cap, but none is set")]
    MissingEmissionCap,
    #[error("parse error: {0}")]
    Parse(String),
}
