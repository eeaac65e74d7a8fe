//! Domain types of the placement problem.
//!
//! Node positions follow the declared order: servers first (`0..S`), then end
//! users (`S..S+U`). VNF instances are identified by `(type, index)` where the
//! index ranges over the type's instance pool. Every binary map of a plan is a
//! [`BinaryGrid`] so that malformed plans (two content servers, an instance
//! placed twice) can be represented and reported instead of being unrepresentable.

mod builder;
mod delta;
mod feasibility;
mod grid;
mod money;
mod validate;


use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builder::{InstanceBuilder, MIGRATION_VOLUME};
pub use delta::{snapshot_diff, DeltaCounts, DeploymentDelta, InstanceMove, InstanceSite};
pub use feasibility::{
    check_feasibility, check_feasibility_with, ConstraintKind, ConstraintReport,
    ConstraintViolation,
};
pub use grid::{bits, BinaryGrid, Matrix, RouteMatrix};
pub use money::{Money, MICROS_PER_UNIT};
pub use validate::{validate_instance, ValidationReport, Violation, ViolationCode};

/// Instance document format version written and accepted by this crate.
pub const FORMAT_VERSION: &str = "1";

/// Integer microseconds.
pub type Micros = u64;

/// Abstract traffic / bandwidth / resource units.
pub type Units = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub servers: Vec<String>,
    pub users: Vec<String>,
    /// Link bandwidth in traffic units. The diagonal is ignored (self-links are unbounded).
    pub bandwidth: Matrix<Units>,
    /// Link cost in micro-money per traffic unit.
    pub link_cost: Matrix<Money>,
    pub link_delay: Matrix<Micros>,
    pub server_capacity: Vec<Units>,
    /// Micro-money per resource unit.
    pub server_unit_cost: Vec<Money>,
}

impl Network {
    pub fn n_servers(&self) -> usize {
        self.servers.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.servers.len() + self.users.len()
    }

    pub fn user_node(&self, user: usize) -> usize {
        self.servers.len() + user
    }

    pub fn is_server(&self, node: usize) -> bool {
        node < self.servers.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VnfType {
    pub name: String,
    pub license_cost: Money,
    /// Traffic units one instance can process.
    pub capacity: Units,
    /// Resource units one instance occupies on its server.
    pub resource_req: Units,
    /// Size of the instance pool; instances are numbered `0..instances`.
    pub instances: usize,
    /// Processing delay per hosting server.
    pub processing_delay: Vec<Micros>,
    /// Cost of moving an instance from server `s` (row) to server `t` (column).
    pub migration_cost: Matrix<Money>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VnfCatalog {
    pub types: Vec<VnfType>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestStatus {
    Existing,
    New,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRequest {
    pub id: String,
    /// Position in `Network::users`.
    pub user: usize,
    /// Ordered, distinct VNF type indices.
    pub chain: Vec<usize>,
    pub traffic: Units,
    pub delay_budget: Micros,
    #[serde(with = "bits")]
    pub candidate_servers: Vec<bool>,
    pub status: RequestStatus,
    /// Links currently carrying this request. Absent means no links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_route: Option<RouteMatrix>,
}

impl ServiceRequest {
    pub fn first_type(&self) -> usize {
        self.chain[0]
    }

    pub fn last_type(&self) -> usize {
        self.chain[self.chain.len() - 1]
    }

    pub fn position_of(&self, vnf_type: usize) -> Option<usize> {
        self.chain.iter().position(|&k| k == vnf_type)
    }

    pub fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidate_servers
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(s, _)| s)
    }
}

/// Current deployment: one `[instance][server]` grid per VNF type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub deployed: Vec<BinaryGrid>,
}

impl Snapshot {
    pub fn empty(catalog: &VnfCatalog, n_servers: usize) -> Self {
        Self {
            deployed: catalog
                .types
                .iter()
                .map(|t| BinaryGrid::new(t.instances, n_servers))
                .collect(),
        }
    }

    /// Server hosting `(k, i)`, taking the first one if the map is malformed.
    pub fn server_of(&self, k: usize, i: usize) -> Option<usize> {
        self.deployed.get(k).and_then(|g| {
            if i < g.rows() {
                g.row(i).iter().position(|&b| b)
            } else {
                None
            }
        })
    }

    pub fn is_deployed(&self, k: usize, i: usize) -> bool {
        self.server_of(k, i).is_some()
    }
}

/// Which VNF types must have at least one deployed instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeploymentScope {
    /// Only types appearing in some request chain. Other types keep their current placement.
    #[default]
    RequiredTypes,
    /// Every catalog type.
    AllTypes,
}

/// How license cost is charged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstantiationCost {
    /// `L_k * (tau - tau~)` summed over servers; a removed instance is credited `-L_k`.
    #[default]
    Literal,
    /// `L_k * max(0, deployed - previously deployed)` per instance; removals are free.
    Clamped,
}

/// Node pairs whose link cost enters the routing cost.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutingDomain {
    #[default]
    AllNodes,
    Servers,
}

/// Modelling switches that change the cost function or the feasible set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "snake_case")]
pub struct Formulation {
    pub deployment_scope: DeploymentScope,
    pub instantiation: InstantiationCost,
    pub routing_domain: RoutingDomain,
}

impl Formulation {
    pub fn is_default(&self) -> bool {
        *self == Formulation::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub format_version: String,
    pub network: Network,
    pub catalog: VnfCatalog,
    pub requests: Vec<ServiceRequest>,
    pub snapshot: Snapshot,
    /// Fraction of every server, VNF and link capacity that may be used, in `(0, 1]`.
    pub usage_threshold: f64,
    #[serde(default, skip_serializing_if = "Formulation::is_default")]
    pub formulation: Formulation,
}

impl ProblemInstance {
    pub fn n_servers(&self) -> usize {
        self.network.n_servers()
    }

    pub fn n_nodes(&self) -> usize {
        self.network.n_nodes()
    }

    pub fn n_types(&self) -> usize {
        self.catalog.types.len()
    }

    pub fn vnf(&self, k: usize) -> &VnfType {
        &self.catalog.types[k]
    }

    /// Node position of request `f`'s end user.
    pub fn user_node(&self, f: usize) -> usize {
        self.network.user_node(self.requests[f].user)
    }

    pub fn required_types(&self) -> BTreeSet<usize> {
        self.requests
            .iter()
            .flat_map(|r| r.chain.iter().copied())
            .collect()
    }

    /// Whether placement of type `k` is a decision (as opposed to frozen at the snapshot).
    pub fn type_in_scope(&self, k: usize) -> bool {
        match self.formulation.deployment_scope {
            DeploymentScope::AllTypes => true,
            DeploymentScope::RequiredTypes => self.requests.iter().any(|r| r.chain.contains(&k)),
        }
    }

    /// Largest integer load allowed against a raw capacity under the usage threshold.
    pub fn capacity_limit(&self, capacity: Units) -> Units {
        // integer loads: load <= mu * cap  <=>  load <= floor(mu * cap)
        (self.usage_threshold * capacity as f64 + 1e-9).floor() as Units
    }

    /// Instances of type `k` absent from the snapshot, in index order.
    pub fn fresh_instances(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.vnf(k).instances).filter(move |&i| !self.snapshot.is_deployed(k, i))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let instance: ProblemInstance = serde_json::from_str(text)?;
        if instance.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(instance.format_version));
        }
        Ok(instance)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// One candidate solution: content servers, deployment, assignment and routes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlacementPlan {
    /// `[request][server]`.
    pub content_server: BinaryGrid,
    /// Per type, `[instance][server]`.
    pub deployment: Vec<BinaryGrid>,
    /// Per request, per chain position, `[server][instance]` of that position's type.
    pub assignment: Vec<Vec<BinaryGrid>>,
    /// Per request, links over all nodes.
    pub routes: Vec<RouteMatrix>,
}

impl PlacementPlan {
    /// All-zero plan shaped for `instance`.
    pub fn empty(instance: &ProblemInstance) -> Self {
        let s = instance.n_servers();
        Self {
            content_server: BinaryGrid::new(instance.requests.len(), s),
            deployment: instance
                .catalog
                .types
                .iter()
                .map(|t| BinaryGrid::new(t.instances, s))
                .collect(),
            assignment: instance
                .requests
                .iter()
                .map(|r| {
                    r.chain
                        .iter()
                        .map(|&k| BinaryGrid::new(s, instance.vnf(k).instances))
                        .collect()
                })
                .collect(),
            routes: instance
                .requests
                .iter()
                .map(|_| RouteMatrix::new(instance.n_nodes()))
                .collect(),
        }
    }

    /// Fails with [`Error::IndexMismatch`] unless every index set matches `instance`.
    pub fn check_shape(&self, instance: &ProblemInstance) -> Result<()> {
        let s = instance.n_servers();
        let n_req = instance.requests.len();
        let mismatch = |what: String| Err(Error::IndexMismatch(what));
        if self.content_server.shape() != (n_req, s)
            && !(n_req == 0 && self.content_server.rows() == 0)
        {
            return mismatch(format!(
                "content_server is {:?}, expected ({n_req}, {s})",
                self.content_server.shape()
            ));
        }
        if self.deployment.len() != instance.n_types() {
            return mismatch(format!(
                "deployment has {} types, expected {}",
                self.deployment.len(),
                instance.n_types()
            ));
        }
        for (k, grid) in self.deployment.iter().enumerate() {
            let want = (instance.vnf(k).instances, s);
            if grid.shape() != want && !(want.0 == 0 && grid.rows() == 0) {
                return mismatch(format!(
                    "deployment of type {k} is {:?}, expected {want:?}",
                    grid.shape()
                ));
            }
        }
        if self.assignment.len() != n_req || self.routes.len() != n_req {
            return mismatch(format!(
                "plan covers {} / {} requests, expected {n_req}",
                self.assignment.len(),
                self.routes.len()
            ));
        }
        for (f, req) in instance.requests.iter().enumerate() {
            if self.assignment[f].len() != req.chain.len() {
                return mismatch(format!(
                    "assignment of request {f} has {} positions",
                    self.assignment[f].len()
                ));
            }
            for (pos, &k) in req.chain.iter().enumerate() {
                let want = (s, instance.vnf(k).instances);
                let got = self.assignment[f][pos].shape();
                if got != want && !(want.1 == 0 && got.0 == s) {
                    return mismatch(format!(
                        "assignment of request {f} position {pos} is {got:?}, expected {want:?}"
                    ));
                }
            }
            if self.routes[f].dim() != instance.n_nodes() {
                return mismatch(format!(
                    "route of request {f} has dimension {}",
                    self.routes[f].dim()
                ));
            }
        }
        Ok(())
    }

    /// Server hosting `(k, i)` in this plan (first one if malformed).
    pub fn server_of(&self, k: usize, i: usize) -> Option<usize> {
        let g = &self.deployment[k];
        g.row(i).iter().position(|&b| b)
    }

    /// `(server, instance)` assigned to request `f` at chain position `pos`, if exactly one.
    pub fn assigned(&self, f: usize, pos: usize) -> Option<(usize, usize)> {
        let g = &self.assignment[f][pos];
        let mut found = None;
        for (s, i) in g.ones() {
            if found.is_some() {
                return None;
            }
            found = Some((s, i));
        }
        found
    }

    pub fn content_server_of(&self, f: usize) -> Option<usize> {
        self.content_server.single_in_row(f)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}
