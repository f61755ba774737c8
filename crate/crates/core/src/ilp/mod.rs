//! Translation of an [`Instance`] into a sparse integer linear program.
//!
//! Columns are laid out kind-major in a fixed order (trips, rental trips,
//! idle, rental idle, in-service, rental in-service; each block in
//! lexicographic subscript order), and rows follow the constraint order of
//! [`crate::model::check_feasible_with`]. The ordering is part of the
//! contract: exports and encodings are byte-stable across runs.

mod lp_text;

pub use lp_text::export_lp_text;

use crate::model::{
    Dimensions, Instance, ModelError, ModelOptions, Solution, Variant,
};
use crate::tensor::{Tensor3, Tensor4};

/// Row direction of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// One sparse constraint row: `coeffs * v  (sense)  rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    /// `(column, coefficient)` pairs, sorted by column index.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    /// Left-hand-side activity for a value vector.
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(col, a)| a * values[col]).sum()
    }

    /// Whether the row holds within an absolute tolerance.
    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => lhs <= self.rhs + tol,
            RowSense::Ge => lhs >= self.rhs - tol,
            RowSense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// One decision column with bounds and integrality.
#[derive(Debug, Clone)]
pub struct Column {
    pub objective: f64,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
    pub integer: bool,
}

/// A minimization ILP in sparse standard form.
#[derive(Debug, Clone)]
pub struct IlpProblem {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl IlpProblem {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Structural sanity: column references in range, bounds ordered.
    pub fn validate(&self) -> Result<(), ModelError> {
        for col in &self.columns {
            if !(col.lower.is_finite() && col.lower <= col.upper) {
                return Err(ModelError::Parse(format!(
                    "column bounds [{}, {}] are inverted or non-finite below",
                    col.lower, col.upper
                )));
            }
        }
        for row in &self.rows {
            for &(col, coeff) in &row.coeffs {
                if col >= self.columns.len() {
                    return Err(ModelError::Parse(format!(
                        "row `{}` references column {col} out of {}",
                        row.name,
                        self.columns.len()
                    )));
                }
                if !coeff.is_finite() {
                    return Err(ModelError::Parse(format!(
                        "row `{}` has non-finite coefficient",
                        row.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Plain dot product of the objective with a value vector.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.columns.iter().zip(values).map(|(c, &v)| c.objective * v).sum()
    }

    /// Whether a value vector satisfies every row and every column bound.
    pub fn feasible(&self, values: &[f64], tol: f64) -> bool {
        values.len() == self.columns.len()
            && self
                .columns
                .iter()
                .zip(values)
                .all(|(c, &v)| v >= c.lower - tol && v <= c.upper + tol)
            && self.rows.iter().all(|r| r.satisfied(values, tol))
    }

    /// Whether every integer column holds an integer value within `tol`.
    pub fn integral(&self, values: &[f64], tol: f64) -> bool {
        self.columns
            .iter()
            .zip(values)
            .all(|(c, &v)| !c.integer || (v - v.round()).abs() <= tol)
    }
}

/// The six decision families, in column-block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    TravelOrg,
    TravelRent,
    IdleOrg,
    IdleRent,
    ServiceOrg,
    ServiceRent,
}

impl VarKind {
    pub const ALL: [VarKind; 6] = [
        VarKind::TravelOrg,
        VarKind::TravelRent,
        VarKind::IdleOrg,
        VarKind::IdleRent,
        VarKind::ServiceOrg,
        VarKind::ServiceRent,
    ];

    /// Conventional short symbol, used in exported variable names.
    pub fn symbol(self) -> &'static str {
        match self {
            VarKind::TravelOrg => "x",
            VarKind::TravelRent => "xr",
            VarKind::IdleOrg => "y",
            VarKind::IdleRent => "yr",
            VarKind::ServiceOrg => "q",
            VarKind::ServiceRent => "qr",
        }
    }

    /// Travel variables carry a destination subscript; the rest do not.
    pub fn per_route(self) -> bool {
        matches!(self, VarKind::TravelOrg | VarKind::TravelRent)
    }
}

/// Semantic address of one column: decision family plus subscripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId {
    pub kind: VarKind,
    pub origin: usize,
    /// `Some` exactly for the travel families.
    pub dest: Option<usize>,
    pub mode: usize,
    pub period: usize,
}

/// Bijection between column indices and decision-variable addresses for a
/// fixed set of dimensions. Total columns: `2*I*J*M*T + 4*I*M*T`.
#[derive(Debug, Clone, Copy)]
pub struct VarIndexMap {
    dims: Dimensions,
}

impl VarIndexMap {
    pub fn new(dims: Dimensions) -> Self {
        Self { dims }
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    fn route_block(&self) -> usize {
        let d = self.dims;
        d.num_origins * d.num_destinations * d.num_modes * d.num_periods
    }

    fn origin_block(&self) -> usize {
        let d = self.dims;
        d.num_origins * d.num_modes * d.num_periods
    }

    pub fn num_columns(&self) -> usize {
        2 * self.route_block() + 4 * self.origin_block()
    }

    /// Start of a kind's contiguous column block.
    pub fn block_start(&self, kind: VarKind) -> usize {
        let route = self.route_block();
        let origin = self.origin_block();
        match kind {
            VarKind::TravelOrg => 0,
            VarKind::TravelRent => route,
            VarKind::IdleOrg => 2 * route,
            VarKind::IdleRent => 2 * route + origin,
            VarKind::ServiceOrg => 2 * route + 2 * origin,
            VarKind::ServiceRent => 2 * route + 3 * origin,
        }
    }

    /// Column range occupied by a kind.
    pub fn block_range(&self, kind: VarKind) -> std::ops::Range<usize> {
        let start = self.block_start(kind);
        let len = if kind.per_route() { self.route_block() } else { self.origin_block() };
        start..start + len
    }

    pub fn travel_org(&self, i: usize, j: usize, m: usize, t: usize) -> usize {
        self.route_col(VarKind::TravelOrg, i, j, m, t)
    }

    pub fn travel_rent(&self, i: usize, j: usize, m: usize, t: usize) -> usize {
        self.route_col(VarKind::TravelRent, i, j, m, t)
    }

    pub fn idle_org(&self, i: usize, m: usize, t: usize) -> usize {
        self.origin_col(VarKind::IdleOrg, i, m, t)
    }

    pub fn idle_rent(&self, i: usize, m: usize, t: usize) -> usize {
        self.origin_col(VarKind::IdleRent, i, m, t)
    }

    pub fn service_org(&self, i: usize, m: usize, t: usize) -> usize {
        self.origin_col(VarKind::ServiceOrg, i, m, t)
    }

    pub fn service_rent(&self, i: usize, m: usize, t: usize) -> usize {
        self.origin_col(VarKind::ServiceRent, i, m, t)
    }

    fn route_col(&self, kind: VarKind, i: usize, j: usize, m: usize, t: usize) -> usize {
        debug_assert!(kind.per_route());
        let d = self.dims;
        self.block_start(kind)
            + ((i * d.num_destinations + j) * d.num_modes + m) * d.num_periods
            + t
    }

    fn origin_col(&self, kind: VarKind, i: usize, m: usize, t: usize) -> usize {
        debug_assert!(!kind.per_route());
        let d = self.dims;
        self.block_start(kind) + (i * d.num_modes + m) * d.num_periods + t
    }

    pub fn column_of(&self, var: VarId) -> usize {
        if var.kind.per_route() {
            self.route_col(var.kind, var.origin, var.dest.expect("route var has dest"), var.mode, var.period)
        } else {
            self.origin_col(var.kind, var.origin, var.mode, var.period)
        }
    }

    /// Inverse of [`VarIndexMap::column_of`].
    pub fn var_of(&self, column: usize) -> VarId {
        let d = self.dims;
        for kind in VarKind::ALL {
            let range = self.block_range(kind);
            if !range.contains(&column) {
                continue;
            }
            let offset = column - range.start;
            return if kind.per_route() {
                let t = offset % d.num_periods;
                let rest = offset / d.num_periods;
                let m = rest % d.num_modes;
                let rest = rest / d.num_modes;
                let j = rest % d.num_destinations;
                let i = rest / d.num_destinations;
                VarId { kind, origin: i, dest: Some(j), mode: m, period: t }
            } else {
                let t = offset % d.num_periods;
                let rest = offset / d.num_periods;
                let m = rest % d.num_modes;
                let i = rest / d.num_modes;
                VarId { kind, origin: i, dest: None, mode: m, period: t }
            };
        }
        panic!("column {column} out of range {}", self.num_columns());
    }

    /// Human-readable export name, subscripts 1-based: `x_2_1_1_2`.
    pub fn column_name(&self, column: usize) -> String {
        let var = self.var_of(column);
        match var.dest {
            Some(j) => format!(
                "{}_{}_{}_{}_{}",
                var.kind.symbol(),
                var.origin + 1,
                j + 1,
                var.mode + 1,
                var.period + 1
            ),
            None => format!(
                "{}_{}_{}_{}",
                var.kind.symbol(),
                var.origin + 1,
                var.mode + 1,
                var.period + 1
            ),
        }
    }
}

/// Builds the ILP for an instance with default [`ModelOptions`].
pub fn build_ilp(
    instance: &Instance,
    variant: Variant,
) -> Result<(IlpProblem, VarIndexMap), ModelError> {
    build_ilp_with(instance, variant, ModelOptions::default())
}

/// Builds the ILP for an instance.
///
/// Trip and idle columns get the fleet sizes as explicit upper bounds (they
/// are implied by the balance equalities and tighten the relaxation). The
/// in-service columns stay unbounded above unless
/// [`ModelOptions::bound_service_vars`] is set.
pub fn build_ilp_with(
    instance: &Instance,
    variant: Variant,
    options: ModelOptions,
) -> Result<(IlpProblem, VarIndexMap), ModelError> {
    instance.validate()?;
    let cap = match (variant, instance.emission_cap) {
        (Variant::Enhanced, None) => return Err(ModelError::MissingEmissionCap),
        (Variant::Enhanced, Some(cap)) => Some(cap),
        (Variant::Base, _) => None,
    };
    let dims = instance.dims;
    let map = VarIndexMap::new(dims);

    let mut columns = Vec::with_capacity(map.num_columns());
    for kind in VarKind::ALL {
        push_columns(&mut columns, instance, kind, options);
    }

    let mut rows = Vec::new();
    for_origin_triples(dims, |i, m, t| {
        let mut coeffs: Vec<(usize, f64)> =
            (0..dims.num_destinations).map(|j| (map.travel_org(i, j, m, t), 1.0)).collect();
        coeffs.push((map.idle_org(i, m, t), 1.0));
        rows.push(Row {
            name: format!("bal_org_{}_{}_{}", i + 1, m + 1, t + 1),
            coeffs,
            sense: RowSense::Eq,
            rhs: f64::from(instance.fleet_cap.get(i, m, t)),
        });
    });
    for_origin_triples(dims, |i, m, t| {
        let mut coeffs: Vec<(usize, f64)> =
            (0..dims.num_destinations).map(|j| (map.travel_rent(i, j, m, t), 1.0)).collect();
        coeffs.push((map.idle_rent(i, m, t), 1.0));
        rows.push(Row {
            name: format!("bal_rent_{}_{}_{}", i + 1, m + 1, t + 1),
            coeffs,
            sense: RowSense::Eq,
            rhs: f64::from(instance.rental_cap.get(i, m, t)),
        });
    });

    if options.demand_per_mode {
        for j in 0..dims.num_destinations {
            for m in 0..dims.num_modes {
                for t in 0..dims.num_periods {
                    let mut coeffs = Vec::with_capacity(2 * dims.num_origins);
                    let mut required: u64 = 0;
                    for i in 0..dims.num_origins {
                        coeffs.push((map.travel_org(i, j, m, t), 1.0));
                        required += u64::from(instance.demand.get(i, j, m, t));
                    }
                    for i in 0..dims.num_origins {
                        coeffs.push((map.travel_rent(i, j, m, t), 1.0));
                    }
                    coeffs.sort_by_key(|&(col, _)| col);
                    rows.push(Row {
                        name: format!("demand_{}_{}_{}", j + 1, m + 1, t + 1),
                        coeffs,
                        sense: RowSense::Ge,
                        rhs: required as f64,
                    });
                }
            }
        }
    } else {
        for j in 0..dims.num_destinations {
            for t in 0..dims.num_periods {
                let mut coeffs = Vec::with_capacity(2 * dims.num_origins * dims.num_modes);
                let mut required: u64 = 0;
                for i in 0..dims.num_origins {
                    for m in 0..dims.num_modes {
                        coeffs.push((map.travel_org(i, j, m, t), 1.0));
                        required += u64::from(instance.demand.get(i, j, m, t));
                    }
                }
                for i in 0..dims.num_origins {
                    for m in 0..dims.num_modes {
                        coeffs.push((map.travel_rent(i, j, m, t), 1.0));
                    }
                }
                coeffs.sort_by_key(|&(col, _)| col);
                rows.push(Row {
                    name: format!("demand_{}_{}", j + 1, t + 1),
                    coeffs,
                    sense: RowSense::Ge,
                    rhs: required as f64,
                });
            }
        }
    }

    {
        let mut coeffs = Vec::new();
        for_origin_triples(dims, |i, m, t| {
            let c = instance.op_cost.get(i, m, t);
            if c != 0.0 {
                coeffs.push((map.service_org(i, m, t), c));
            }
        });
        for_origin_triples(dims, |i, m, t| {
            let c = instance.rent_cost.get(i, m, t);
            if c != 0.0 {
                coeffs.push((map.service_rent(i, m, t), c));
            }
        });
        rows.push(Row {
            name: "budget".to_string(),
            coeffs,
            sense: RowSense::Le,
            rhs: instance.budget,
        });
    }

    for_origin_triples(dims, |i, m, t| {
        let mut coeffs: Vec<(usize, f64)> =
            (0..dims.num_destinations).map(|j| (map.travel_org(i, j, m, t), 1.0)).collect();
        coeffs.push((map.service_org(i, m, t), -1.0));
        rows.push(Row {
            name: format!("link_org_{}_{}_{}", i + 1, m + 1, t + 1),
            coeffs,
            sense: RowSense::Le,
            rhs: 0.0,
        });
    });
    for_origin_triples(dims, |i, m, t| {
        let mut coeffs: Vec<(usize, f64)> =
            (0..dims.num_destinations).map(|j| (map.travel_rent(i, j, m, t), 1.0)).collect();
        coeffs.push((map.service_rent(i, m, t), -1.0));
        rows.push(Row {
            name: format!("link_rent_{}_{}_{}", i + 1, m + 1, t + 1),
            coeffs,
            sense: RowSense::Le,
            rhs: 0.0,
        });
    });

    if let Some(cap) = cap {
        let mut coeffs = Vec::new();
        for i in 0..dims.num_origins {
            for j in 0..dims.num_destinations {
                let km = instance.distance.get(i, j);
                for m in 0..dims.num_modes {
                    for t in 0..dims.num_periods {
                        let e = instance.emission_org[m] * km;
                        if e != 0.0 {
                            coeffs.push((map.travel_org(i, j, m, t), e));
                        }
                    }
                }
            }
        }
        for i in 0..dims.num_origins {
            for j in 0..dims.num_destinations {
                let km = instance.distance.get(i, j);
                for m in 0..dims.num_modes {
                    for t in 0..dims.num_periods {
                        let e = instance.emission_rent[m] * km;
                        if e != 0.0 {
                            coeffs.push((map.travel_rent(i, j, m, t), e));
                        }
                    }
                }
            }
        }
        rows.push(Row {
            name: "emission_cap".to_string(),
            coeffs,
            sense: RowSense::Le,
            rhs: cap,
        });
    }

    let problem = IlpProblem { columns, rows };
    debug_assert!(problem.validate().is_ok());
    Ok((problem, map))
}

fn push_columns(
    columns: &mut Vec<Column>,
    instance: &Instance,
    kind: VarKind,
    options: ModelOptions,
) {
    let dims = instance.dims;
    match kind {
        VarKind::TravelOrg | VarKind::TravelRent => {
            let (costs, caps): (&Tensor4<f64>, &Tensor3<u32>) = if kind == VarKind::TravelOrg {
                (&instance.travel_cost_org, &instance.fleet_cap)
            } else {
                (&instance.travel_cost_rent, &instance.rental_cap)
            };
            for i in 0..dims.num_origins {
                for j in 0..dims.num_destinations {
                    for m in 0..dims.num_modes {
                        for t in 0..dims.num_periods {
                            columns.push(Column {
                                objective: costs.get(i, j, m, t),
                                lower: 0.0,
                                upper: f64::from(caps.get(i, m, t)),
                                integer: true,
                            });
                        }
                    }
                }
            }
        }
        VarKind::IdleOrg | VarKind::IdleRent => {
            let (costs, caps) = if kind == VarKind::IdleOrg {
                (&instance.stop_cost_org, &instance.fleet_cap)
            } else {
                (&instance.stop_cost_rent, &instance.rental_cap)
            };
            for_origin_triples(dims, |i, m, t| {
                columns.push(Column {
                    objective: costs.get(i, m, t),
                    lower: 0.0,
                    upper: f64::from(caps.get(i, m, t)),
                    integer: true,
                });
            });
        }
        VarKind::ServiceOrg | VarKind::ServiceRent => {
            let (costs, caps) = if kind == VarKind::ServiceOrg {
                (&instance.op_cost, &instance.fleet_cap)
            } else {
                (&instance.rent_cost, &instance.rental_cap)
            };
            for_origin_triples(dims, |i, m, t| {
                let upper = if options.bound_service_vars {
                    f64::from(caps.get(i, m, t))
                } else {
                    f64::INFINITY
                };
                columns.push(Column {
                    objective: costs.get(i, m, t),
                    lower: 0.0,
                    upper,
                    integer: true,
                });
            });
        }
    }
}

fn for_origin_triples(dims: Dimensions, mut f: impl FnMut(usize, usize, usize)) {
    for i in 0..dims.num_origins {
        for m in 0..dims.num_modes {
            for t in 0..dims.num_periods {
                f(i, m, t);
            }
        }
    }
}

/// Encodes a solution as a dense column-value vector.
pub fn encode_solution(solution: &Solution, map: &VarIndexMap) -> Result<Vec<f64>, ModelError> {
    solution.check_shape(map.dims)?;
    let mut values = Vec::with_capacity(map.num_columns());
    for counts in [solution.travel_org.values(), solution.travel_rent.values()] {
        values.extend(counts.iter().map(|&v| f64::from(v)));
    }
    for counts in [
        solution.idle_org.values(),
        solution.idle_rent.values(),
        solution.in_service_org.values(),
        solution.in_service_rent.values(),
    ] {
        values.extend(counts.iter().map(|&v| f64::from(v)));
    }
    Ok(values)
}

/// Decodes a column-value vector back into a [`Solution`], rounding each
/// entry to the nearest nonnegative integer. Values are expected to be
/// integral up to solver tolerance.
pub fn extract_solution(values: &[f64], map: &VarIndexMap) -> Result<Solution, ModelError> {
    if values.len() != map.num_columns() {
        return Err(ModelError::ShapeMismatch { table: "column values" });
    }
    let dims = map.dims;
    let snap = |col: usize| -> u32 { values[col].round().max(0.0) as u32 };
    Ok(Solution {
        version: 1,
        travel_org: Tensor4::from_fn(dims.route_shape(), |i, j, m, t| {
            snap(map.travel_org(i, j, m, t))
        }),
        travel_rent: Tensor4::from_fn(dims.route_shape(), |i, j, m, t| {
            snap(map.travel_rent(i, j, m, t))
        }),
        idle_org: Tensor3::from_fn(dims.origin_shape(), |i, m, t| snap(map.idle_org(i, m, t))),
        idle_rent: Tensor3::from_fn(dims.origin_shape(), |i, m, t| snap(map.idle_rent(i, m, t))),
        in_service_org: Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
            snap(map.service_org(i, m, t))
        }),
        in_service_rent: Tensor3::from_fn(dims.origin_shape(), |i, m, t| {
            snap(map.service_rent(i, m, t))
        }),
    })
}
