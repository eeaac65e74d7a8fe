//! Explicit binary program for an instance.
//!
//! Variables, in canonical order:
//!
//! | block | name             | meaning                                          | order           |
//! |-------|------------------|--------------------------------------------------|-----------------|
//! | g     | `g_f_s`          | server `s` is the content server of request `f`  | f, s            |
//! | t     | `t_k_i_s`        | instance `(k, i)` is deployed on `s`             | k, i, s         |
//! | l     | `l_f_s_k_i`      | request `f` uses instance `(k, i)` on `s`        | f, k, i, s      |
//! | p     | `p_f_a_b`        | request `f` uses the link `a`-`b` (`a <= b`)     | f, a, b         |
//! | x     | `x_k_i_s_t`      | `(k, i)` moves from `s` to `t`                   | k, i, s, t      |
//! | m     | `m_f_s_t_i`      | content server `s`, first VNF on `t` instance `i`| f, s, t, i      |
//! | q     | `q_f_s_t_a_i_j`  | chain positions `a`, `a+1` on `s`, `t`           | f, a, s, t, i, j|
//!
//! `t` and `x` exist only for types whose placement is a decision (see
//! [`ProblemInstance::type_in_scope`]); the remaining types stay where the
//! snapshot has them and only enter server capacity rows as constants. `l`
//! exists only for types in the request's chain. Self-links `p_f_s_s` exist for
//! servers only. The objective is in micro-money and carries a constant for
//! the snapshot terms.

mod export;
mod import;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::costs;
use crate::error::{Error, Result};
use crate::model::{
    validate_instance, ConstraintKind, InstantiationCost, PlacementPlan, ProblemInstance,
    RequestStatus,
};

pub use export::{export_lp, export_mps, OBJECTIVE_SCALE};
pub use import::{import_solution, parse_solution};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Forbid new requests from using instances present in the snapshot.
    pub no_reuse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "block", rename_all = "snake_case")]
pub enum VarKind {
    ContentServer {
        request: usize,
        server: usize,
    },
    Deployment {
        vnf_type: usize,
        instance: usize,
        server: usize,
    },
    Assignment {
        request: usize,
        server: usize,
        vnf_type: usize,
        instance: usize,
    },
    Link {
        request: usize,
        a: usize,
        b: usize,
    },
    Migration {
        vnf_type: usize,
        instance: usize,
        from: usize,
        to: usize,
    },
    FirstHop {
        request: usize,
        server: usize,
        host: usize,
        instance: usize,
    },
    ChainHop {
        request: usize,
        from: usize,
        to: usize,
        position: usize,
        instance: usize,
        next_instance: usize,
    },
}

impl VarKind {
    pub fn name(&self) -> String {
        match *self {
            VarKind::ContentServer { request, server } => format!("g_{request}_{server}"),
            VarKind::Deployment {
                vnf_type,
                instance,
                server,
            } => format!("t_{vnf_type}_{instance}_{server}"),
            VarKind::Assignment {
                request,
                server,
                vnf_type,
                instance,
            } => {
                format!("l_{request}_{server}_{vnf_type}_{instance}")
            }
            VarKind::Link { request, a, b } => format!("p_{request}_{a}_{b}"),
            VarKind::Migration {
                vnf_type,
                instance,
                from,
                to,
            } => format!("x_{vnf_type}_{instance}_{from}_{to}"),
            VarKind::FirstHop {
                request,
                server,
                host,
                instance,
            } => format!("m_{request}_{server}_{host}_{instance}"),
            VarKind::ChainHop {
                request,
                from,
                to,
                position,
                instance,
                next_instance,
            } => {
                format!("q_{request}_{from}_{to}_{position}_{instance}_{next_instance}")
            }
        }
    }

    /// Auxiliary variables are products of other variables (or of a constant and a variable).
    pub fn is_auxiliary(&self) -> bool {
        matches!(
            self,
            VarKind::Migration { .. } | VarKind::FirstHop { .. } | VarKind::ChainHop { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub kind: ConstraintKind,
    pub index: Vec<usize>,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Row {
    pub fn name(&self) -> String {
        let mut name = self.kind.code().to_string();
        for i in &self.index {
            name.push('_');
            name.push_str(&i.to_string());
        }
        name
    }

    pub fn lhs(&self, values: &[u8]) -> i64 {
        self.terms
            .iter()
            .map(|&(v, c)| c * i64::from(values[v]))
            .sum()
    }

    pub fn is_satisfied(&self, values: &[u8]) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// Binary program: canonical variables, objective with constant, tagged rows.
#[derive(Debug, Clone)]
pub struct IlpModel {
    instance: ProblemInstance,
    options: BuildOptions,
    pub variables: Vec<Variable>,
    index: HashMap<String, usize>,
    /// Sparse objective in micro-money, sorted by variable.
    pub objective: Vec<(usize, i64)>,
    /// Constant objective term in micro-money.
    pub constant: i64,
    pub rows: Vec<Row>,
}

impl IlpModel {
    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn options(&self) -> BuildOptions {
        self.options
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn var_of(&self, kind: &VarKind) -> Option<usize> {
        self.var(&kind.name())
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Objective value including the constant.
    pub fn objective_value(&self, values: &[u8]) -> i64 {
        self.constant
            + self
                .objective
                .iter()
                .map(|&(v, c)| c * i64::from(values[v]))
                .sum::<i64>()
    }

    pub fn violated_rows(&self, values: &[u8]) -> impl Iterator<Item = &Row> + '_ {
        let values = values.to_vec();
        self.rows.iter().filter(move |r| !r.is_satisfied(&values))
    }

    pub fn is_feasible(&self, values: &[u8]) -> bool {
        self.rows.iter().all(|r| r.is_satisfied(values))
    }

    /// Variable vector of `plan`, with every auxiliary set to its product definition.
    pub fn encode_plan(&self, plan: &PlacementPlan) -> Result<Vec<u8>> {
        plan.check_shape(&self.instance)?;
        let inst = &self.instance;
        let tau = |k: usize, i: usize, s: usize| u8::from(plan.deployment[k].get(i, s));
        let lambda = |f: usize, s: usize, k: usize, i: usize| {
            let pos = inst.requests[f].position_of(k).expect("type in chain");
            u8::from(plan.assignment[f][pos].get(s, i))
        };
        let values = self
            .variables
            .iter()
            .map(|v| match v.kind {
                VarKind::ContentServer { request, server } => {
                    u8::from(plan.content_server.get(request, server))
                }
                VarKind::Deployment {
                    vnf_type,
                    instance,
                    server,
                } => tau(vnf_type, instance, server),
                VarKind::Assignment {
                    request,
                    server,
                    vnf_type,
                    instance,
                } => lambda(request, server, vnf_type, instance),
                VarKind::Link { request, a, b } => u8::from(plan.routes[request].get(a, b)),
                VarKind::Migration {
                    vnf_type,
                    instance,
                    from,
                    to,
                } => {
                    u8::from(inst.snapshot.deployed[vnf_type].get(instance, from))
                        * tau(vnf_type, instance, to)
                }
                VarKind::FirstHop {
                    request,
                    server,
                    host,
                    instance,
                } => {
                    let k = inst.requests[request].first_type();
                    u8::from(plan.content_server.get(request, server))
                        * lambda(request, host, k, instance)
                }
                VarKind::ChainHop {
                    request,
                    from,
                    to,
                    position,
                    instance,
                    next_instance,
                } => {
                    let chain = &inst.requests[request].chain;
                    lambda(request, from, chain[position], instance)
                        * lambda(request, to, chain[position + 1], next_instance)
                }
            })
            .collect();
        Ok(values)
    }
}

struct Builder {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    rows: Vec<Row>,
}

impl Builder {
    fn add(&mut self, kind: VarKind) -> usize {
        let name = kind.name();
        let idx = self.variables.len();
        self.index.insert(name.clone(), idx);
        self.variables.push(Variable { name, kind });
        idx
    }

    fn v(&self, kind: VarKind) -> usize {
        self.index[&kind.name()]
    }

    fn row(
        &mut self,
        kind: ConstraintKind,
        index: Vec<usize>,
        terms: Vec<(usize, i64)>,
        sense: Sense,
        rhs: i64,
    ) {
        self.rows.push(Row {
            kind,
            index,
            terms,
            sense,
            rhs,
        });
    }

    fn link(&self, f: usize, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.v(VarKind::Link { request: f, a, b })
    }
}

/// Compiles `instance` into an [`IlpModel`].
pub fn build_ilp(instance: &ProblemInstance, options: BuildOptions) -> Result<IlpModel> {
    let report = validate_instance(instance);
    if !report.is_empty() {
        return Err(Error::ValidationFailed(report));
    }
    let inst = instance;
    let net = &inst.network;
    let n_servers = inst.n_servers();
    let n = inst.n_nodes();
    let in_scope: Vec<usize> = (0..inst.n_types())
        .filter(|&k| inst.type_in_scope(k))
        .collect();
    let sorted_chain = |f: usize| {
        let mut c = inst.requests[f].chain.clone();
        c.sort_unstable();
        c
    };

    let mut b = Builder {
        variables: Vec::new(),
        index: HashMap::new(),
        rows: Vec::new(),
    };

    for f in 0..inst.requests.len() {
        for s in 0..n_servers {
            b.add(VarKind::ContentServer {
                request: f,
                server: s,
            });
        }
    }
    for &k in &in_scope {
        for i in 0..inst.vnf(k).instances {
            for s in 0..n_servers {
                b.add(VarKind::Deployment {
                    vnf_type: k,
                    instance: i,
                    server: s,
                });
            }
        }
    }
    for f in 0..inst.requests.len() {
        for k in sorted_chain(f) {
            for i in 0..inst.vnf(k).instances {
                for s in 0..n_servers {
                    b.add(VarKind::Assignment {
                        request: f,
                        server: s,
                        vnf_type: k,
                        instance: i,
                    });
                }
            }
        }
    }
    for f in 0..inst.requests.len() {
        for a in 0..n {
            for c in a..n {
                if a < c || net.is_server(a) {
                    b.add(VarKind::Link {
                        request: f,
                        a,
                        b: c,
                    });
                }
            }
        }
    }
    for &k in &in_scope {
        for i in 0..inst.vnf(k).instances {
            for s in 0..n_servers {
                for t in 0..n_servers {
                    b.add(VarKind::Migration {
                        vnf_type: k,
                        instance: i,
                        from: s,
                        to: t,
                    });
                }
            }
        }
    }
    for (f, req) in inst.requests.iter().enumerate() {
        for s in 0..n_servers {
            for t in 0..n_servers {
                for i in 0..inst.vnf(req.first_type()).instances {
                    b.add(VarKind::FirstHop {
                        request: f,
                        server: s,
                        host: t,
                        instance: i,
                    });
                }
            }
        }
    }
    for (f, req) in inst.requests.iter().enumerate() {
        for a in 0..req.chain.len().saturating_sub(1) {
            for s in 0..n_servers {
                for t in 0..n_servers {
                    for i in 0..inst.vnf(req.chain[a]).instances {
                        for j in 0..inst.vnf(req.chain[a + 1]).instances {
                            b.add(VarKind::ChainHop {
                                request: f,
                                from: s,
                                to: t,
                                position: a,
                                instance: i,
                                next_instance: j,
                            });
                        }
                    }
                }
            }
        }
    }

    // objective
    let mut objective = Vec::new();
    let mut constant: i64 = 0;
    for &k in &in_scope {
        let vnf = inst.vnf(k);
        let r = vnf.resource_req as i64;
        let l = vnf.license_cost.as_micros();
        for i in 0..vnf.instances {
            let prior = inst.snapshot.server_of(k, i);
            let license = match inst.formulation.instantiation {
                InstantiationCost::Literal => l,
                InstantiationCost::Clamped if prior.is_none() => l,
                InstantiationCost::Clamped => 0,
            };
            for s in 0..n_servers {
                let coef = r * net.server_unit_cost[s].as_micros() + license;
                objective.push((
                    b.v(VarKind::Deployment {
                        vnf_type: k,
                        instance: i,
                        server: s,
                    }),
                    coef,
                ));
            }
            if let Some(s) = prior {
                constant -= r * net.server_unit_cost[s].as_micros();
                if inst.formulation.instantiation == InstantiationCost::Literal {
                    constant -= l;
                }
            }
            for s in 0..n_servers {
                for t in 0..n_servers {
                    let phi = vnf.migration_cost.get(s, t).as_micros();
                    objective.push((
                        b.v(VarKind::Migration {
                            vnf_type: k,
                            instance: i,
                            from: s,
                            to: t,
                        }),
                        phi,
                    ));
                }
            }
        }
    }
    for (f, req) in inst.requests.iter().enumerate() {
        for a in 0..n {
            for c in (a + 1)..n {
                if costs::link_charged(inst, a, c) {
                    let coef = net.link_cost.get(a, c).as_micros() * req.traffic as i64;
                    objective.push((b.link(f, a, c), coef));
                }
            }
        }
    }
    constant -= costs::current_routing_cost(inst).as_micros();
    objective.retain(|&(_, c)| c != 0);
    objective.sort_unstable_by_key(|&(v, _)| v);

    use ConstraintKind::*;
    use Sense::*;

    for (f, req) in inst.requests.iter().enumerate() {
        let terms = (0..n_servers)
            .map(|s| {
                (
                    b.v(VarKind::ContentServer {
                        request: f,
                        server: s,
                    }),
                    1,
                )
            })
            .collect();
        b.row(ContentServer, vec![f], terms, Eq, 1);
        for s in 0..n_servers {
            let g = b.v(VarKind::ContentServer {
                request: f,
                server: s,
            });
            b.row(
                CandidateServer,
                vec![f, s],
                vec![(g, 1)],
                Le,
                i64::from(req.candidate_servers[s]),
            );
        }
    }

    for (f, req) in inst.requests.iter().enumerate() {
        for k in sorted_chain(f) {
            let pool = inst.vnf(k).instances;
            let mut terms = Vec::new();
            for i in 0..pool {
                for s in 0..n_servers {
                    terms.push((
                        b.v(VarKind::Assignment {
                            request: f,
                            server: s,
                            vnf_type: k,
                            instance: i,
                        }),
                        1,
                    ));
                }
            }
            b.row(AssignOnce, vec![f, k], terms, Eq, 1);
            for i in 0..pool {
                for s in 0..n_servers {
                    let l = b.v(VarKind::Assignment {
                        request: f,
                        server: s,
                        vnf_type: k,
                        instance: i,
                    });
                    let t = b.v(VarKind::Deployment {
                        vnf_type: k,
                        instance: i,
                        server: s,
                    });
                    b.row(
                        AssignDeployed,
                        vec![f, s, k, i],
                        vec![(l, 1), (t, -1)],
                        Le,
                        0,
                    );
                }
            }
            if options.no_reuse && req.status == RequestStatus::New {
                for i in (0..pool).filter(|&i| inst.snapshot.is_deployed(k, i)) {
                    for s in 0..n_servers {
                        let l = b.v(VarKind::Assignment {
                            request: f,
                            server: s,
                            vnf_type: k,
                            instance: i,
                        });
                        b.row(NoReuse, vec![f, s, k, i], vec![(l, 1)], Eq, 0);
                    }
                }
            }
        }
    }

    for &k in &in_scope {
        let pool = inst.vnf(k).instances;
        let mut terms = Vec::new();
        for i in 0..pool {
            for s in 0..n_servers {
                terms.push((
                    b.v(VarKind::Deployment {
                        vnf_type: k,
                        instance: i,
                        server: s,
                    }),
                    1,
                ));
            }
        }
        b.row(TypeDeployed, vec![k], terms, Ge, 1);
        for i in 0..pool {
            let terms = (0..n_servers)
                .map(|s| {
                    (
                        b.v(VarKind::Deployment {
                            vnf_type: k,
                            instance: i,
                            server: s,
                        }),
                        1,
                    )
                })
                .collect();
            b.row(SinglePlacement, vec![k, i], terms, Le, 1);
        }
    }

    for s in 0..n_servers {
        let mut terms = Vec::new();
        let mut frozen: i64 = 0;
        for k in 0..inst.n_types() {
            let r = inst.vnf(k).resource_req as i64;
            for i in 0..inst.vnf(k).instances {
                if inst.type_in_scope(k) {
                    terms.push((
                        b.v(VarKind::Deployment {
                            vnf_type: k,
                            instance: i,
                            server: s,
                        }),
                        r,
                    ));
                } else if inst.snapshot.deployed[k].get(i, s) {
                    frozen += r;
                }
            }
        }
        terms.retain(|&(_, c)| c != 0);
        let limit = inst.capacity_limit(net.server_capacity[s]) as i64;
        b.row(ServerCapacity, vec![s], terms, Le, limit - frozen);
    }

    for &k in &in_scope {
        let users: Vec<usize> = (0..inst.requests.len())
            .filter(|&f| inst.requests[f].chain.contains(&k))
            .collect();
        let limit = inst.capacity_limit(inst.vnf(k).capacity) as i64;
        for i in 0..inst.vnf(k).instances {
            for s in 0..n_servers {
                let terms: Vec<(usize, i64)> = users
                    .iter()
                    .map(|&f| {
                        let l = b.v(VarKind::Assignment {
                            request: f,
                            server: s,
                            vnf_type: k,
                            instance: i,
                        });
                        (l, inst.requests[f].traffic as i64)
                    })
                    .filter(|&(_, c)| c != 0)
                    .collect();
                b.row(VnfCapacity, vec![k, i, s], terms, Le, limit);
            }
        }
    }

    if !inst.requests.is_empty() {
        for a in 0..n {
            for c in (a + 1)..n {
                let terms: Vec<(usize, i64)> = (0..inst.requests.len())
                    .map(|f| (b.link(f, a, c), inst.requests[f].traffic as i64))
                    .filter(|&(_, t)| t != 0)
                    .collect();
                let limit = inst.capacity_limit(net.bandwidth.get(a, c)) as i64;
                b.row(LinkCapacity, vec![a, c], terms, Le, limit);
            }
        }
    }

    for (f, req) in inst.requests.iter().enumerate() {
        let fst = req.first_type();
        for s in 0..n_servers {
            for t in 0..n_servers {
                for i in 0..inst.vnf(fst).instances {
                    let m = b.v(VarKind::FirstHop {
                        request: f,
                        server: s,
                        host: t,
                        instance: i,
                    });
                    let g = b.v(VarKind::ContentServer {
                        request: f,
                        server: s,
                    });
                    let l = b.v(VarKind::Assignment {
                        request: f,
                        server: t,
                        vnf_type: fst,
                        instance: i,
                    });
                    let p = b.link(f, s, t);
                    let idx = vec![f, s, t, i];
                    b.row(FirstHopLink, idx.clone(), vec![(m, 1), (p, -1)], Le, 0);
                    b.row(FirstHopServer, idx.clone(), vec![(m, 1), (g, -1)], Le, 0);
                    b.row(FirstHopInstance, idx.clone(), vec![(m, 1), (l, -1)], Le, 0);
                    b.row(FirstHopLower, idx, vec![(m, 1), (l, -1), (g, -1)], Ge, -1);
                }
            }
        }
    }

    for (f, req) in inst.requests.iter().enumerate() {
        for a in 0..req.chain.len().saturating_sub(1) {
            let (ka, kb) = (req.chain[a], req.chain[a + 1]);
            for s in 0..n_servers {
                for t in 0..n_servers {
                    for i in 0..inst.vnf(ka).instances {
                        for j in 0..inst.vnf(kb).instances {
                            let q = b.v(VarKind::ChainHop {
                                request: f,
                                from: s,
                                to: t,
                                position: a,
                                instance: i,
                                next_instance: j,
                            });
                            let l1 = b.v(VarKind::Assignment {
                                request: f,
                                server: s,
                                vnf_type: ka,
                                instance: i,
                            });
                            let l2 = b.v(VarKind::Assignment {
                                request: f,
                                server: t,
                                vnf_type: kb,
                                instance: j,
                            });
                            let p = b.link(f, s, t);
                            let idx = vec![f, s, t, a, i, j];
                            b.row(ChainHopLink, idx.clone(), vec![(q, 1), (p, -1)], Le, 0);
                            b.row(ChainHopPrev, idx.clone(), vec![(q, 1), (l1, -1)], Le, 0);
                            b.row(ChainHopNext, idx.clone(), vec![(q, 1), (l2, -1)], Le, 0);
                            b.row(ChainHopLower, idx, vec![(q, 1), (l1, -1), (l2, -1)], Ge, -1);
                        }
                    }
                }
            }
        }
    }

    for (f, req) in inst.requests.iter().enumerate() {
        let lst = req.last_type();
        let user = inst.user_node(f);
        for s in 0..n_servers {
            let mut terms: Vec<(usize, i64)> = (0..inst.vnf(lst).instances)
                .map(|i| {
                    (
                        b.v(VarKind::Assignment {
                            request: f,
                            server: s,
                            vnf_type: lst,
                            instance: i,
                        }),
                        1,
                    )
                })
                .collect();
            terms.push((b.link(f, s, user), -1));
            b.row(UserHop, vec![f, s], terms, Eq, 0);
        }
    }

    for (f, req) in inst.requests.iter().enumerate() {
        let traffic = req.traffic as i64;
        let mut terms = Vec::new();
        for a in 0..n {
            for c in (a + 1)..n {
                let d = net.link_delay.get(a, c) as i64 * traffic;
                if d != 0 {
                    terms.push((b.link(f, a, c), d));
                }
            }
        }
        for k in sorted_chain(f) {
            for i in 0..inst.vnf(k).instances {
                for s in 0..n_servers {
                    let d = inst.vnf(k).processing_delay[s] as i64 * traffic;
                    if d != 0 {
                        terms.push((
                            b.v(VarKind::Assignment {
                                request: f,
                                server: s,
                                vnf_type: k,
                                instance: i,
                            }),
                            d,
                        ));
                    }
                }
            }
        }
        b.row(DelayBudget, vec![f], terms, Le, req.delay_budget as i64);
    }

    for &k in &in_scope {
        for i in 0..inst.vnf(k).instances {
            for s in 0..n_servers {
                let prior = i64::from(inst.snapshot.deployed[k].get(i, s));
                for t in 0..n_servers {
                    let x = b.v(VarKind::Migration {
                        vnf_type: k,
                        instance: i,
                        from: s,
                        to: t,
                    });
                    let tau = b.v(VarKind::Deployment {
                        vnf_type: k,
                        instance: i,
                        server: t,
                    });
                    let idx = vec![k, i, s, t];
                    b.row(MigrationSource, idx.clone(), vec![(x, 1)], Le, prior);
                    b.row(MigrationTarget, idx.clone(), vec![(x, 1), (tau, -1)], Le, 0);
                    b.row(MigrationLower, idx, vec![(x, 1), (tau, -1)], Ge, prior - 1);
                }
            }
        }
    }

    Ok(IlpModel {
        instance: instance.clone(),
        options,
        variables: b.variables,
        index: b.index,
        objective,
        constant,
        rows: b.rows,
    })
}

#[cfg(test)]
mod tests;
