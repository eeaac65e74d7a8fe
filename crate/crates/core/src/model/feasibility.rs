use serde::{Deserialize, Serialize};

use super::{PlacementPlan, ProblemInstance, RequestStatus};
use crate::costs;
use crate::error::Result;

/// Constraint families of the placement model.
///
/// The first group is what [`check_feasibility`] evaluates on a plan. The
/// product-linearization families only exist as ILP rows, where they tie an
/// auxiliary variable to the product of two binaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Exactly one content server per request.
    ContentServer,
    /// The content server must be a candidate of the request.
    CandidateServer,
    /// Exactly one instance per required type of a request.
    AssignOnce,
    /// Assigned instances must be deployed where they are assigned.
    AssignDeployed,
    /// Every type in scope has at least one deployed instance.
    TypeDeployed,
    /// An instance is deployed on at most one server.
    SinglePlacement,
    ServerCapacity,
    VnfCapacity,
    LinkCapacity,
    /// Content server to first VNF host.
    FirstHop,
    /// Consecutive VNF hosts in the chain.
    ChainHop,
    /// Last VNF host to end user, as an equality.
    UserHop,
    DelayBudget,
    /// New requests may not use instances present in the snapshot.
    NoReuse,
    MigrationSource,
    MigrationTarget,
    MigrationLower,
    FirstHopLink,
    FirstHopServer,
    FirstHopInstance,
    FirstHopLower,
    ChainHopLink,
    ChainHopPrev,
    ChainHopNext,
    ChainHopLower,
}

impl ConstraintKind {
    /// Prefix used for row names in exported models.
    pub fn code(self) -> &'static str {
        use ConstraintKind::*;
        match self {
            ContentServer => "cs_one",
            CandidateServer => "cs_cand",
            AssignOnce => "asg_one",
            AssignDeployed => "asg_dep",
            TypeDeployed => "type_dep",
            SinglePlacement => "inst_one",
            ServerCapacity => "cap_srv",
            VnfCapacity => "cap_vnf",
            LinkCapacity => "cap_link",
            FirstHop => "hop_first",
            ChainHop => "hop_chain",
            UserHop => "hop_user",
            DelayBudget => "delay",
            NoReuse => "no_reuse",
            MigrationSource => "mig_src",
            MigrationTarget => "mig_dst",
            MigrationLower => "mig_low",
            FirstHopLink => "fh_link",
            FirstHopServer => "fh_srv",
            FirstHopInstance => "fh_inst",
            FirstHopLower => "fh_low",
            ChainHopLink => "ch_link",
            ChainHopPrev => "ch_prev",
            ChainHopNext => "ch_next",
            ChainHopLower => "ch_low",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub kind: ConstraintKind,
    pub indices: Vec<usize>,
    /// Left-hand side as evaluated on the plan.
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub violations: Vec<ConstraintViolation>,
}

impl ConstraintReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ConstraintKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn contains(&self, kind: ConstraintKind, indices: &[usize]) -> bool {
        self.violations
            .iter()
            .any(|v| v.kind == kind && v.indices == indices)
    }

    fn push(&mut self, kind: ConstraintKind, indices: Vec<usize>, lhs: i64, rhs: i64) {
        self.violations.push(ConstraintViolation {
            kind,
            indices,
            lhs,
            rhs,
        });
    }
}

/// Evaluates every constraint family on `plan`. An empty report means feasible.
pub fn check_feasibility(
    instance: &ProblemInstance,
    plan: &PlacementPlan,
) -> Result<ConstraintReport> {
    check_feasibility_with(instance, plan, false)
}

/// Like [`check_feasibility`], additionally enforcing the no-reuse rule when `no_reuse` is set.
pub fn check_feasibility_with(
    instance: &ProblemInstance,
    plan: &PlacementPlan,
    no_reuse: bool,
) -> Result<ConstraintReport> {
    use ConstraintKind::*;

    plan.check_shape(instance)?;
    let mut report = ConstraintReport::default();
    let n_servers = instance.n_servers();
    let n = instance.n_nodes();
    let b = |v: bool| i64::from(v);

    for (f, req) in instance.requests.iter().enumerate() {
        let chosen = plan.content_server.row_count(f) as i64;
        if chosen != 1 {
            report.push(ContentServer, vec![f], chosen, 1);
        }
        for s in 0..n_servers {
            if plan.content_server.get(f, s) && !req.candidate_servers[s] {
                report.push(CandidateServer, vec![f, s], 1, 0);
            }
        }
    }

    for (f, req) in instance.requests.iter().enumerate() {
        for (pos, &k) in req.chain.iter().enumerate() {
            let grid = &plan.assignment[f][pos];
            let total = grid.count_ones() as i64;
            if total != 1 {
                report.push(AssignOnce, vec![f, k], total, 1);
            }
            for (s, i) in grid.ones() {
                if !plan.deployment[k].get(i, s) {
                    report.push(AssignDeployed, vec![f, s, k, i], 1, 0);
                }
                if no_reuse
                    && req.status == RequestStatus::New
                    && instance.snapshot.is_deployed(k, i)
                {
                    report.push(NoReuse, vec![f, s, k, i], 1, 0);
                }
            }
        }
    }

    for k in 0..instance.n_types() {
        let grid = &plan.deployment[k];
        if instance.type_in_scope(k) && grid.count_ones() == 0 {
            report.push(TypeDeployed, vec![k], 0, 1);
        }
        for i in 0..grid.rows() {
            let placed = grid.row_count(i) as i64;
            if placed > 1 {
                report.push(SinglePlacement, vec![k, i], placed, 1);
            }
        }
    }

    for s in 0..n_servers {
        let used: u64 = (0..instance.n_types())
            .map(|k| {
                let g = &plan.deployment[k];
                (0..g.rows()).filter(|&i| g.get(i, s)).count() as u64 * instance.vnf(k).resource_req
            })
            .sum();
        let limit = instance.capacity_limit(instance.network.server_capacity[s]);
        if used > limit {
            report.push(ServerCapacity, vec![s], used as i64, limit as i64);
        }
    }

    for (k, vnf) in instance.catalog.types.iter().enumerate() {
        let limit = instance.capacity_limit(vnf.capacity);
        for i in 0..vnf.instances {
            for s in 0..n_servers {
                let load: u64 = instance
                    .requests
                    .iter()
                    .enumerate()
                    .filter_map(|(f, r)| r.position_of(k).map(|pos| (f, r, pos)))
                    .filter(|&(f, _, pos)| plan.assignment[f][pos].get(s, i))
                    .map(|(_, r, _)| r.traffic)
                    .sum();
                if load > limit {
                    report.push(VnfCapacity, vec![k, i, s], load as i64, limit as i64);
                }
            }
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let load: u64 = instance
                .requests
                .iter()
                .enumerate()
                .filter(|&(f, _)| plan.routes[f].get(i, j))
                .map(|(_, r)| r.traffic)
                .sum();
            let limit = instance.capacity_limit(instance.network.bandwidth.get(i, j));
            if load > limit {
                report.push(LinkCapacity, vec![i, j], load as i64, limit as i64);
            }
        }
    }

    for (f, req) in instance.requests.iter().enumerate() {
        let route = &plan.routes[f];
        let first = &plan.assignment[f][0];
        for s in 0..n_servers {
            if !plan.content_server.get(f, s) {
                continue;
            }
            for (t, i) in first.ones() {
                if !route.get(s, t) {
                    report.push(FirstHop, vec![f, s, t, i], 1, 0);
                }
            }
        }
        for pos in 0..req.chain.len().saturating_sub(1) {
            for (s, i) in plan.assignment[f][pos].ones() {
                for (t, j) in plan.assignment[f][pos + 1].ones() {
                    if !route.get(s, t) {
                        report.push(ChainHop, vec![f, s, t, pos, i, j], 1, 0);
                    }
                }
            }
        }
        let last = &plan.assignment[f][req.chain.len() - 1];
        let user = instance.user_node(f);
        for s in 0..n_servers {
            let hosted = last.row_count(s) as i64;
            let linked = b(route.get(s, user));
            if hosted != linked {
                report.push(UserHop, vec![f, s], hosted, linked);
            }
        }

        let delay = costs::delay_lhs(instance, plan, f);
        if delay > req.delay_budget {
            report.push(DelayBudget, vec![f], delay as i64, req.delay_budget as i64);
        }
    }

    Ok(report)
}
