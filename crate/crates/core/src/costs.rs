//! Reconfiguration cost of a plan relative to the snapshot, and per-request delay.
//!
//! These functions are the reference objective: the ILP objective and the
//! branch-and-bound's incremental accounting are both tested against them.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    InstantiationCost, Micros, Money, PlacementPlan, ProblemInstance, RoutingDomain,
};

/// The four reconfiguration cost components and their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
pub struct CostBreakdown {
    pub hosting_delta: Money,
    pub migration: Money,
    pub instantiation: Money,
    pub routing_delta: Money,
    pub total: Money,
}

impl CostBreakdown {
    pub fn new(
        hosting_delta: Money,
        migration: Money,
        instantiation: Money,
        routing_delta: Money,
    ) -> Self {
        Self {
            hosting_delta,
            migration,
            instantiation,
            routing_delta,
            total: hosting_delta + migration + instantiation + routing_delta,
        }
    }
}

impl Serialize for CostBreakdown {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CostBreakdown", 10)?;
        st.serialize_field("hosting_delta", &self.hosting_delta)?;
        st.serialize_field("migration", &self.migration)?;
        st.serialize_field("instantiation", &self.instantiation)?;
        st.serialize_field("routing_delta", &self.routing_delta)?;
        st.serialize_field("total", &self.total)?;
        st.serialize_field("hosting_delta_decimal", &self.hosting_delta.to_decimal())?;
        st.serialize_field("migration_decimal", &self.migration.to_decimal())?;
        st.serialize_field("instantiation_decimal", &self.instantiation.to_decimal())?;
        st.serialize_field("routing_delta_decimal", &self.routing_delta.to_decimal())?;
        st.serialize_field("total_decimal", &self.total.to_decimal())?;
        st.end()
    }
}

/// Differential resource cost: `sum R_k * rho_s * (tau - tau~)`.
pub fn hosting_delta(instance: &ProblemInstance, plan: &PlacementPlan) -> Result<Money> {
    plan.check_shape(instance)?;
    let mut total = Money::ZERO;
    for (k, vnf) in instance.catalog.types.iter().enumerate() {
        for i in 0..vnf.instances {
            for s in 0..instance.n_servers() {
                let diff = i64::from(plan.deployment[k].get(i, s))
                    - i64::from(instance.snapshot.deployed[k].get(i, s));
                total += instance.network.server_unit_cost[s] * (vnf.resource_req as i64 * diff);
            }
        }
    }
    Ok(total)
}

/// `sum phi_k^{s,t} * tau~_{k,i}^s * tau_{k,i}^t`, always non-negative.
pub fn migration_cost(instance: &ProblemInstance, plan: &PlacementPlan) -> Result<Money> {
    plan.check_shape(instance)?;
    let mut total = Money::ZERO;
    for (k, vnf) in instance.catalog.types.iter().enumerate() {
        let before = &instance.snapshot.deployed[k];
        for (i, s) in before.ones() {
            for t in 0..instance.n_servers() {
                if plan.deployment[k].get(i, t) {
                    total += vnf.migration_cost.get(s, t);
                }
            }
        }
    }
    Ok(total)
}

/// License cost of the deployment change; see [`InstantiationCost`] for the two readings.
pub fn instantiation_cost(instance: &ProblemInstance, plan: &PlacementPlan) -> Result<Money> {
    plan.check_shape(instance)?;
    let mut total = Money::ZERO;
    for (k, vnf) in instance.catalog.types.iter().enumerate() {
        for i in 0..vnf.instances {
            let after = plan.deployment[k].row_count(i) as i64;
            let before = instance.snapshot.deployed[k].row_count(i) as i64;
            let count = match instance.formulation.instantiation {
                InstantiationCost::Literal => after - before,
                InstantiationCost::Clamped => (after - before).max(0),
            };
            total += vnf.license_cost * count;
        }
    }
    Ok(total)
}

/// Whether the link `(i, j)` is charged under the instance's routing domain.
pub(crate) fn link_charged(instance: &ProblemInstance, i: usize, j: usize) -> bool {
    i != j
        && match instance.formulation.routing_domain {
            RoutingDomain::AllNodes => true,
            RoutingDomain::Servers => {
                instance.network.is_server(i) && instance.network.is_server(j)
            }
        }
}

/// Routing cost of the current routes, i.e. the constant subtracted by [`routing_delta`].
pub(crate) fn current_routing_cost(instance: &ProblemInstance) -> Money {
    instance
        .requests
        .iter()
        .filter_map(|r| r.current_route.as_ref().map(|route| (r, route)))
        .flat_map(|(r, route)| {
            route
                .links()
                .filter(|&(i, j)| link_charged(instance, i, j))
                .map(move |(i, j)| instance.network.link_cost.get(i, j) * r.traffic as i64)
        })
        .sum()
}

/// `sum_f sum_{links} C * T_f * (P - P~)`, each undirected link counted once.
pub fn routing_delta(instance: &ProblemInstance, plan: &PlacementPlan) -> Result<Money> {
    plan.check_shape(instance)?;
    let new_cost: Money = instance
        .requests
        .iter()
        .zip(&plan.routes)
        .flat_map(|(r, route)| {
            route
                .links()
                .filter(|&(i, j)| link_charged(instance, i, j))
                .map(move |(i, j)| instance.network.link_cost.get(i, j) * r.traffic as i64)
        })
        .sum();
    Ok(new_cost - current_routing_cost(instance))
}

pub fn total_objective(instance: &ProblemInstance, plan: &PlacementPlan) -> Result<CostBreakdown> {
    Ok(CostBreakdown::new(
        hosting_delta(instance, plan)?,
        migration_cost(instance, plan)?,
        instantiation_cost(instance, plan)?,
        routing_delta(instance, plan)?,
    ))
}

/// Transmission plus processing delay of request `f`, scaled by its traffic.
///
/// Fails with [`Error::UnassignedChain`] unless every chain position has exactly one instance.
pub fn service_delay(instance: &ProblemInstance, plan: &PlacementPlan, f: usize) -> Result<Micros> {
    plan.check_shape(instance)?;
    if f >= instance.requests.len() {
        return Err(Error::IndexMismatch(format!("request {f} does not exist")));
    }
    if plan.assignment[f].iter().any(|g| g.count_ones() != 1) {
        return Err(Error::UnassignedChain { request: f });
    }
    Ok(delay_lhs(instance, plan, f))
}

/// Delay of request `f` without the assignment precondition. Shapes must already match.
pub(crate) fn delay_lhs(instance: &ProblemInstance, plan: &PlacementPlan, f: usize) -> Micros {
    let req = &instance.requests[f];
    let transmission: Micros = plan.routes[f]
        .links()
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| instance.network.link_delay.get(i, j))
        .sum();
    let processing: Micros = req
        .chain
        .iter()
        .enumerate()
        .flat_map(|(pos, &k)| {
            plan.assignment[f][pos]
                .ones()
                .map(move |(s, _)| instance.vnf(k).processing_delay[s])
        })
        .sum();
    req.traffic * (transmission + processing)
}
