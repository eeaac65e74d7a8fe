//! Decision space shared by the branch-and-bound and the brute-force oracle.
//!
//! A decision is a slot whose value is a *rank*. Slots are ordered like the
//! structural variable blocks of the ILP (content server per request,
//! placement per in-scope instance, assignment per request and chain type in
//! ascending type order), and ranks are ordered so that a smaller rank gives
//! a lexicographically smaller variable block. Comparing rank vectors
//! therefore compares canonical variable vectors.

use crate::costs;
use crate::model::{
    BinaryGrid, InstantiationCost, PlacementPlan, ProblemInstance, RequestStatus, RouteMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Content { f: usize },
    Deploy { k: usize, i: usize },
    Assign { f: usize, k: usize, pos: usize },
}

pub(crate) struct Space<'a> {
    pub inst: &'a ProblemInstance,
    pub no_reuse: bool,
    pub n_servers: usize,
    pub slots: Vec<Slot>,
    /// `[k][i][s]`: objective coefficient of placing in-scope `(k, i)` on `s`.
    pub deploy_cost: Vec<Vec<Vec<i64>>>,
    /// Constant objective part: snapshot credits and current routing cost.
    pub constant: i64,
    /// Charged link cost per node pair, micro-money per traffic unit.
    pub link_cost: Vec<i64>,
    /// `[k][i]`: the fresh instance preceding `(k, i)` in the ordered-activation chain.
    pub prev_fresh: Vec<Vec<Option<usize>>>,
    /// Server capacity left after out-of-scope (frozen) instances.
    pub server_room: Vec<i64>,
}

impl<'a> Space<'a> {
    pub fn new(inst: &'a ProblemInstance, no_reuse: bool) -> Self {
        let n_servers = inst.n_servers();
        let n = inst.n_nodes();
        let mut slots: Vec<Slot> = (0..inst.requests.len())
            .map(|f| Slot::Content { f })
            .collect();
        for k in (0..inst.n_types()).filter(|&k| inst.type_in_scope(k)) {
            slots.extend((0..inst.vnf(k).instances).map(|i| Slot::Deploy { k, i }));
        }
        for (f, req) in inst.requests.iter().enumerate() {
            let mut chain = req.chain.clone();
            chain.sort_unstable();
            slots.extend(chain.into_iter().map(|k| Slot::Assign {
                f,
                k,
                pos: req.position_of(k).unwrap(),
            }));
        }

        let mut constant = -costs::current_routing_cost(inst).as_micros();
        let mut deploy_cost = Vec::with_capacity(inst.n_types());
        let mut prev_fresh = Vec::with_capacity(inst.n_types());
        for (k, vnf) in inst.catalog.types.iter().enumerate() {
            let r = vnf.resource_req as i64;
            let l = vnf.license_cost.as_micros();
            let mut per_instance = Vec::new();
            let mut prev = Vec::new();
            let mut last_fresh = None;
            for i in 0..vnf.instances {
                let prior = inst.snapshot.server_of(k, i);
                prev.push(if prior.is_none() { last_fresh } else { None });
                if prior.is_none() {
                    last_fresh = Some(i);
                }
                if !inst.type_in_scope(k) {
                    per_instance.push(Vec::new());
                    continue;
                }
                let license = match (inst.formulation.instantiation, prior) {
                    (InstantiationCost::Clamped, Some(_)) => 0,
                    _ => l,
                };
                if let Some(s0) = prior {
                    constant -= r * inst.network.server_unit_cost[s0].as_micros();
                    if inst.formulation.instantiation == InstantiationCost::Literal {
                        constant -= l;
                    }
                }
                per_instance.push(
                    (0..n_servers)
                        .map(|s| {
                            let migration =
                                prior.map_or(0, |s0| vnf.migration_cost.get(s0, s).as_micros());
                            r * inst.network.server_unit_cost[s].as_micros() + license + migration
                        })
                        .collect(),
                );
            }
            deploy_cost.push(per_instance);
            prev_fresh.push(prev);
        }

        let mut link_cost = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                if costs::link_charged(inst, a, b) {
                    link_cost[a * n + b] = inst.network.link_cost.get(a, b).as_micros();
                }
            }
        }

        let server_room = (0..n_servers)
            .map(|s| {
                let frozen: u64 = (0..inst.n_types())
                    .filter(|&k| !inst.type_in_scope(k))
                    .map(|k| {
                        inst.snapshot.deployed[k]
                            .ones()
                            .filter(|&(_, t)| t == s)
                            .count() as u64
                            * inst.vnf(k).resource_req
                    })
                    .sum();
                inst.capacity_limit(inst.network.server_capacity[s]) as i64 - frozen as i64
            })
            .collect();

        Self {
            inst,
            no_reuse,
            n_servers,
            slots,
            deploy_cost,
            constant,
            link_cost,
            prev_fresh,
            server_room,
        }
    }

    /// Number of ranks of a slot over its full (unfiltered) domain.
    pub fn domain_size(&self, slot: Slot) -> usize {
        match slot {
            Slot::Content { .. } => self.n_servers,
            Slot::Deploy { .. } => self.n_servers + 1,
            Slot::Assign { k, .. } => self.inst.vnf(k).instances * self.n_servers,
        }
    }

    pub fn content_server(&self, rank: usize) -> usize {
        self.n_servers - 1 - rank
    }

    /// `None` is "not deployed".
    pub fn placement(&self, rank: usize) -> Option<usize> {
        (rank > 0).then(|| self.n_servers - rank)
    }

    /// `(server, instance)` of an assignment rank.
    pub fn assignment(&self, k: usize, rank: usize) -> (usize, usize) {
        let flat = self.inst.vnf(k).instances * self.n_servers - 1 - rank;
        (flat % self.n_servers, flat / self.n_servers)
    }

    /// Whether request `f` may use instance `(k, i)` under the no-reuse rule.
    pub fn usable(&self, f: usize, k: usize, i: usize) -> bool {
        !(self.no_reuse
            && self.inst.requests[f].status == RequestStatus::New
            && self.inst.snapshot.is_deployed(k, i))
    }

    pub fn charged(&self, a: usize, b: usize) -> i64 {
        self.link_cost[a * self.inst.n_nodes() + b]
    }

    /// Routing cost of request `f` given its content server and chain hosts.
    pub fn route_cost(&self, f: usize, cs: usize, hosts: &[usize]) -> i64 {
        let links = route_links(cs, hosts, self.inst.user_node(f));
        let per_unit: i64 = links.iter().map(|&(a, b)| self.charged(a, b)).sum();
        per_unit * self.inst.requests[f].traffic as i64
    }

    /// Builds a plan from complete decisions.
    pub fn plan(
        &self,
        cs: &[usize],
        deployment: &[Vec<Option<usize>>],
        assignment: &[Vec<(usize, usize)>],
    ) -> PlacementPlan {
        let inst = self.inst;
        let mut plan = PlacementPlan::empty(inst);
        for (f, &s) in cs.iter().enumerate() {
            plan.content_server.set(f, s, true);
        }
        for k in 0..inst.n_types() {
            if inst.type_in_scope(k) {
                for (i, placed) in deployment[k].iter().enumerate() {
                    if let Some(s) = placed {
                        plan.deployment[k].set(i, *s, true);
                    }
                }
            } else {
                plan.deployment[k] = inst.snapshot.deployed[k].clone();
            }
        }
        for (f, hops) in assignment.iter().enumerate() {
            for (pos, &(s, i)) in hops.iter().enumerate() {
                plan.assignment[f][pos].set(s, i, true);
            }
        }
        plan.routes = derive_routes(inst, &plan.content_server, &plan.assignment);
        plan
    }
}

/// Distinct undirected links `(a <= b)` of a chain route, self-links included.
pub(crate) fn route_links(cs: usize, hosts: &[usize], user: usize) -> Vec<(usize, usize)> {
    let mut links = Vec::with_capacity(hosts.len() + 1);
    let mut prev = cs;
    for &h in hosts {
        links.push((prev.min(h), prev.max(h)));
        prev = h;
    }
    if let Some(&last) = hosts.last() {
        links.push((last.min(user), last.max(user)));
    }
    links.sort_unstable();
    links.dedup();
    links
}

/// Minimal routes forced by the content server and the chain assignment.
///
/// For each request the links are: content server to first host, each pair of
/// consecutive hosts, last host to the end user. Co-located hops become
/// self-links. Requests without a unique content server or with a chain
/// position not assigned to exactly one instance get the hops that are
/// determined and nothing else.
pub fn derive_routes(
    instance: &ProblemInstance,
    content_server: &BinaryGrid,
    assignment: &[Vec<BinaryGrid>],
) -> Vec<RouteMatrix> {
    let n = instance.n_nodes();
    instance
        .requests
        .iter()
        .enumerate()
        .map(|(f, req)| {
            let mut route = RouteMatrix::new(n);
            let single = |g: &BinaryGrid| {
                let mut it = g.ones();
                match (it.next(), it.next()) {
                    (Some((s, _)), None) => Some(s),
                    _ => None,
                }
            };
            let mut prev = if f < content_server.rows() {
                content_server.single_in_row(f)
            } else {
                None
            };
            let hosts: Vec<Option<usize>> = (0..req.chain.len())
                .map(|pos| assignment.get(f).and_then(|a| a.get(pos)).and_then(single))
                .collect();
            for &h in &hosts {
                if let (Some(a), Some(b)) = (prev, h) {
                    route.set(a, b, true);
                }
                prev = h;
            }
            if let Some(Some(last)) = hosts.last() {
                route.set(*last, instance.user_node(f), true);
            }
            route
        })
        .collect()
}
