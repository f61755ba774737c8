//! Tiny hand-checkable instances shared by tests, docs, and examples.

use crate::model::{Dimensions, Instance, Solution};
use crate::tensor::{Tensor2, Tensor3, Tensor4};

/// The smallest interesting instance: one origin, one destination, one mode,
/// one period. Two organizational vehicles (stop cost 10, travel cost 100,
/// operating cost 50) and one rentable vehicle (stop cost 8, travel cost 120,
/// renting cost 60) face a demand of one trip over a 100 km route. The
/// organizational mode emits 1.0 kg/km, the rental 0.7 kg/km.
///
/// Hand enumeration of all six assignments gives a base optimum of 168
/// (serve with an organizational vehicle), an optimum of 200 under an
/// emission cap of 80 (serve with the rental), and infeasibility below the
/// minimum achievable 70 kg.
pub fn single_route() -> Instance {
    let dims = Dimensions::new(1, 1, 1, 1);
    Instance {
        version: 1,
        dims,
        fleet_cap: Tensor3::filled(dims.origin_shape(), 2),
        rental_cap: Tensor3::filled(dims.origin_shape(), 1),
        demand: Tensor4::filled(dims.route_shape(), 1),
        stop_cost_org: Tensor3::filled(dims.origin_shape(), 10.0),
        stop_cost_rent: Tensor3::filled(dims.origin_shape(), 8.0),
        travel_cost_org: Tensor4::filled(dims.route_shape(), 100.0),
        travel_cost_rent: Tensor4::filled(dims.route_shape(), 120.0),
        budget: 1000.0,
        op_cost: Tensor3::filled(dims.origin_shape(), 50.0),
        rent_cost: Tensor3::filled(dims.origin_shape(), 60.0),
        emission_org: vec![1.0],
        emission_rent: vec![0.7],
        distance: Tensor2::filled([1, 1], 100.0),
        emission_cap: None,
    }
}

/// The base optimum of [`single_route`]: one organizational trip serves the
/// demand (cost 100 + 50 operating + 10 idle + 8 idle rental = 168).
pub fn single_route_served_by_org() -> Solution {
    let inst = single_route();
    let mut sol = Solution::zeros(inst.dims);
    sol.travel_org.set(0, 0, 0, 0, 1);
    sol.idle_org.set(0, 0, 0, 1);
    sol.idle_rent.set(0, 0, 0, 1);
    sol.in_service_org.set(0, 0, 0, 1);
    sol
}

/// The low-emission service of [`single_route`]: the rental makes the trip
/// (cost 120 + 60 renting + 20 idle org = 200, emissions 70).
pub fn single_route_served_by_rental() -> Solution {
    let inst = single_route();
    let mut sol = Solution::zeros(inst.dims);
    sol.travel_rent.set(0, 0, 0, 0, 1);
    sol.idle_org.set(0, 0, 0, 2);
    sol.in_service_rent.set(0, 0, 0, 1);
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let inst = single_route();
        inst.validate().unwrap();
        single_route_served_by_org().check_shape(inst.dims).unwrap();
        single_route_served_by_rental().check_shape(inst.dims).unwrap();
    }
}
