//! Depth-first branch-and-bound over the decision slots of [`Space`].
//!
//! Routes are not branched on: once a request's content server and chain are
//! fixed its minimal route is derived, checked for delay and link capacity,
//! and charged exactly. The lower bound of a node is
//!
//! * the exact coefficient of every placed instance,
//! * zero for undecided instances (not deploying is always allowed and costs nothing),
//! * for each type with no placed instance yet, the cheapest placement among its undecided instances,
//! * per request, the cheapest route over the hosts still reachable by its chain,
//! * the constant snapshot and current-routing credits.
//!
//! Nodes are pruned when the bound exceeds the incumbent, or equals it while
//! the node's rank prefix is already lexicographically larger than the
//! incumbent's key.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::space::{route_links, Slot, Space};
use crate::model::PlacementPlan;

pub(crate) type Key = Vec<u32>;

pub(crate) struct Incumbent {
    pub obj: i64,
    pub key: Key,
    pub plan: PlacementPlan,
}

pub(crate) struct Outcome {
    pub best: Option<Incumbent>,
    pub stopped: bool,
    pub nodes: u64,
    pub updates: u64,
    /// Bound of the empty assignment; `None` when even that is infeasible.
    pub root_bound: Option<i64>,
}

struct Shared {
    best_obj: AtomicI64,
    best: Mutex<Option<Incumbent>>,
    stop: AtomicBool,
    nodes: AtomicU64,
    updates: AtomicU64,
    deadline: Option<Instant>,
}

impl Shared {
    /// Whether a node with bound `lb` and rank prefix `prefix` may still improve the incumbent.
    fn admits(&self, lb: i64, prefix: &[u32]) -> bool {
        let best = self.best_obj.load(Ordering::Acquire);
        if lb < best {
            return true;
        }
        if lb > best {
            return false;
        }
        let guard = self.best.lock().unwrap();
        match guard.as_ref() {
            Some(inc) => lb < inc.obj || (lb == inc.obj && prefix <= &inc.key[..prefix.len()]),
            None => true,
        }
    }

    fn offer(&self, obj: i64, key: &[u32], plan: impl FnOnce() -> PlacementPlan) {
        let mut guard = self.best.lock().unwrap();
        let better = match guard.as_ref() {
            Some(inc) => (obj, key) < (inc.obj, &inc.key[..]),
            None => true,
        };
        if better {
            *guard = Some(Incumbent {
                obj,
                key: key.to_vec(),
                plan: plan(),
            });
            self.best_obj.store(obj, Ordering::Release);
            self.updates.fetch_add(1, Ordering::Relaxed);
        }
    }
}

/// Records every admitted node; used by the admissibility tests.
pub(crate) type Trace = Vec<(Key, i64)>;

struct Worker<'s, 'a> {
    space: &'s Space<'a>,
    shared: &'s Shared,
    /// Prune on infeasibility only, never on the bound.
    exhaustive: bool,
    trace: Option<Trace>,
    cs: Vec<Option<usize>>,
    dep: Vec<Vec<Option<Option<usize>>>>,
    asg: Vec<Vec<Option<(usize, usize)>>>,
    placed: Vec<usize>,
    server_used: Vec<i64>,
    load: Vec<Vec<i64>>,
    link_load: Vec<i64>,
    unassigned: Vec<usize>,
    key: Key,
    min_deploy: Vec<Vec<i64>>,
    vnf_limit: Vec<i64>,
    link_limit: Vec<i64>,
    cache: HashMap<Vec<u64>, Option<i64>>,
    buf: Vec<u64>,
    nodes: u64,
}

impl<'s, 'a> Worker<'s, 'a> {
    fn new(space: &'s Space<'a>, shared: &'s Shared, exhaustive: bool) -> Self {
        let inst = space.inst;
        let n = inst.n_nodes();
        let mut link_limit = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                link_limit[a * n + b] =
                    inst.capacity_limit(inst.network.bandwidth.get(a, b)) as i64;
            }
        }
        Self {
            space,
            shared,
            exhaustive,
            trace: None,
            cs: vec![None; inst.requests.len()],
            dep: inst
                .catalog
                .types
                .iter()
                .map(|t| vec![None; t.instances])
                .collect(),
            asg: inst
                .requests
                .iter()
                .map(|r| vec![None; r.chain.len()])
                .collect(),
            placed: vec![0; inst.n_types()],
            server_used: vec![0; space.n_servers],
            load: inst
                .catalog
                .types
                .iter()
                .map(|t| vec![0; t.instances])
                .collect(),
            link_load: vec![0; n * n],
            unassigned: inst.requests.iter().map(|r| r.chain.len()).collect(),
            key: Vec::new(),
            min_deploy: space
                .deploy_cost
                .iter()
                .map(|per| {
                    per.iter()
                        .map(|c| c.iter().copied().min().unwrap_or(0))
                        .collect()
                })
                .collect(),
            vnf_limit: inst
                .catalog
                .types
                .iter()
                .map(|t| inst.capacity_limit(t.capacity) as i64)
                .collect(),
            link_limit,
            cache: HashMap::new(),
            buf: Vec::new(),
            nodes: 0,
        }
    }

    fn lower_bound(&mut self) -> Option<i64> {
        let space = self.space;
        let inst = space.inst;
        let mut lb = space.constant;
        for k in (0..inst.n_types()).filter(|&k| inst.type_in_scope(k)) {
            let mut cheapest: Option<i64> = None;
            for (i, d) in self.dep[k].iter().enumerate() {
                match d {
                    Some(Some(s)) => lb += space.deploy_cost[k][i][*s],
                    Some(None) => {}
                    None => {
                        let c = self.min_deploy[k][i];
                        cheapest = Some(cheapest.map_or(c, |m| m.min(c)));
                    }
                }
            }
            if self.placed[k] == 0 {
                lb += cheapest?;
            }
        }
        for f in 0..inst.requests.len() {
            lb += self.route_bound(f)?;
        }
        Some(lb)
    }

    /// Cheapest route of request `f` over the hosts its chain can still reach.
    fn route_bound(&mut self, f: usize) -> Option<i64> {
        let space = self.space;
        let inst = space.inst;
        let req = &inst.requests[f];
        let n_servers = space.n_servers;
        if n_servers > 64 {
            // no mask encoding; fall back to the exact cost once fixed, else zero
            let Some(cs) = self.cs[f] else { return Some(0) };
            let hosts: Option<Vec<usize>> = self.asg[f].iter().map(|a| a.map(|(s, _)| s)).collect();
            return Some(hosts.map_or(0, |h| space.route_cost(f, cs, &h)));
        }
        let all: u64 = if n_servers == 64 {
            u64::MAX
        } else {
            (1u64 << n_servers) - 1
        };
        self.buf.clear();
        self.buf.push(f as u64);
        self.buf.push(match self.cs[f] {
            Some(s) => 1 << s,
            None => req.candidates().fold(0, |m, s| m | 1 << s),
        });
        for (pos, &k) in req.chain.iter().enumerate() {
            let mask = match self.asg[f][pos] {
                Some((s, _)) => 1 << s,
                None => {
                    let mut m = 0u64;
                    for (i, d) in self.dep[k].iter().enumerate() {
                        if !space.usable(f, k, i) {
                            continue;
                        }
                        match d {
                            Some(Some(s)) => m |= 1 << s,
                            Some(None) => {}
                            None => m |= all,
                        }
                    }
                    m
                }
            };
            if mask == 0 {
                return None;
            }
            self.buf.push(mask);
        }
        if let Some(&v) = self.cache.get(&self.buf[..]) {
            return v;
        }
        let masks = self.buf.clone();
        let mut best: Option<i64> = None;
        let mut hosts = vec![0usize; req.chain.len()];
        fn walk(
            space: &Space,
            f: usize,
            cs: usize,
            masks: &[u64],
            hosts: &mut Vec<usize>,
            pos: usize,
            best: &mut Option<i64>,
        ) {
            if pos == hosts.len() {
                let c = space.route_cost(f, cs, hosts);
                *best = Some(best.map_or(c, |b| b.min(c)));
                return;
            }
            let mut m = masks[pos];
            while m != 0 {
                let s = m.trailing_zeros() as usize;
                m &= m - 1;
                hosts[pos] = s;
                walk(space, f, cs, masks, hosts, pos + 1, best);
            }
        }
        let mut cs_mask = masks[1];
        while cs_mask != 0 {
            let cs = cs_mask.trailing_zeros() as usize;
            cs_mask &= cs_mask - 1;
            walk(space, f, cs, &masks[2..], &mut hosts, 0, &mut best);
        }
        self.cache.insert(masks, best);
        best
    }

    /// Bound check after a choice; records the node when tracing.
    fn admit(&mut self) -> bool {
        let Some(lb) = self.lower_bound() else {
            return false;
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.push((self.key.clone(), lb));
        }
        self.exhaustive || self.shared.admits(lb, &self.key)
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) {
            if let Some(deadline) = self.shared.deadline {
                if Instant::now() >= deadline {
                    self.shared.stop.store(true, Ordering::Relaxed);
                }
            }
        }
        !self.shared.stop.load(Ordering::Relaxed)
    }

    fn dfs(&mut self, depth: usize) {
        if !self.tick() {
            return;
        }
        let space = self.space;
        let inst = space.inst;
        if depth == space.slots.len() {
            let obj = self.lower_bound().expect("leaf is feasible");
            let (cs, dep, asg) = (&self.cs, &self.dep, &self.asg);
            self.shared.offer(obj, &self.key, || {
                let cs: Vec<usize> = cs.iter().map(|c| c.unwrap()).collect();
                let dep: Vec<Vec<Option<usize>>> = dep
                    .iter()
                    .map(|row| row.iter().map(|d| d.unwrap_or(None)).collect())
                    .collect();
                let asg: Vec<Vec<(usize, usize)>> = asg
                    .iter()
                    .map(|row| row.iter().map(|a| a.unwrap()).collect())
                    .collect();
                space.plan(&cs, &dep, &asg)
            });
            return;
        }
        match space.slots[depth] {
            Slot::Content { f } => {
                for r in 0..space.n_servers {
                    let s = space.content_server(r);
                    if !inst.requests[f].candidate_servers[s] {
                        continue;
                    }
                    self.cs[f] = Some(s);
                    self.key.push(r as u32);
                    if self.admit() {
                        self.dfs(depth + 1);
                    }
                    self.key.pop();
                    self.cs[f] = None;
                }
            }
            Slot::Deploy { k, i } => {
                let vnf = inst.vnf(k);
                let req = vnf.resource_req as i64;
                let last = i + 1 == vnf.instances;
                for r in 0..=space.n_servers {
                    let place = space.placement(r);
                    match place {
                        None if last && self.placed[k] == 0 => continue,
                        None => {}
                        Some(s) => {
                            if let Some(p) = space.prev_fresh[k][i] {
                                if self.dep[k][p] == Some(None) {
                                    continue;
                                }
                            }
                            if self.server_used[s] + req > space.server_room[s] {
                                continue;
                            }
                            self.server_used[s] += req;
                            self.placed[k] += 1;
                        }
                    }
                    self.dep[k][i] = Some(place);
                    self.key.push(r as u32);
                    if self.admit() {
                        self.dfs(depth + 1);
                    }
                    self.key.pop();
                    self.dep[k][i] = None;
                    if let Some(s) = place {
                        self.server_used[s] -= req;
                        self.placed[k] -= 1;
                    }
                }
            }
            Slot::Assign { f, k, pos } => {
                let traffic = inst.requests[f].traffic as i64;
                for r in 0..space.domain_size(space.slots[depth]) {
                    let (s, i) = space.assignment(k, r);
                    if self.dep[k][i] != Some(Some(s)) || !space.usable(f, k, i) {
                        continue;
                    }
                    if self.load[k][i] + traffic > self.vnf_limit[k] {
                        continue;
                    }
                    self.load[k][i] += traffic;
                    self.asg[f][pos] = Some((s, i));
                    self.unassigned[f] -= 1;
                    let routed = if self.unassigned[f] == 0 {
                        self.route(f)
                    } else {
                        Some(Vec::new())
                    };
                    if let Some(links) = &routed {
                        self.key.push(r as u32);
                        if self.admit() {
                            self.dfs(depth + 1);
                        }
                        self.key.pop();
                        self.unroute(f, links);
                    }
                    self.unassigned[f] += 1;
                    self.asg[f][pos] = None;
                    self.load[k][i] -= traffic;
                }
            }
        }
    }

    /// Derives request `f`'s route, checks delay and link capacity and books its
    /// link load. Returns the booked links, or `None` if infeasible.
    fn route(&mut self, f: usize) -> Option<Vec<(usize, usize)>> {
        let inst = self.space.inst;
        let req = &inst.requests[f];
        let n = inst.n_nodes();
        let hosts: Vec<usize> = self.asg[f].iter().map(|a| a.unwrap().0).collect();
        let links = route_links(self.cs[f]?, &hosts, inst.user_node(f));
        let transmission: u64 = links
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| inst.network.link_delay.get(a, b))
            .sum();
        let processing: u64 = req
            .chain
            .iter()
            .zip(&hosts)
            .map(|(&k, &s)| inst.vnf(k).processing_delay[s])
            .sum();
        if req.traffic * (transmission + processing) > req.delay_budget {
            return None;
        }
        let traffic = req.traffic as i64;
        let real: Vec<(usize, usize)> = links.into_iter().filter(|(a, b)| a != b).collect();
        if real
            .iter()
            .any(|&(a, b)| self.link_load[a * n + b] + traffic > self.link_limit[a * n + b])
        {
            return None;
        }
        for &(a, b) in &real {
            self.link_load[a * n + b] += traffic;
        }
        Some(real)
    }

    fn unroute(&mut self, f: usize, links: &[(usize, usize)]) {
        let n = self.space.inst.n_nodes();
        let traffic = self.space.inst.requests[f].traffic as i64;
        for &(a, b) in links {
            self.link_load[a * n + b] -= traffic;
        }
    }
}

/// Content-server prefixes handed out as tasks, in rank order.
fn prefixes(space: &Space) -> (usize, Vec<Key>) {
    let inst = space.inst;
    let mut depth = 0;
    let mut count: usize = 1;
    while depth < inst.requests.len() {
        let c = inst.requests[depth].candidates().count().max(1);
        if count * c > 4096 {
            break;
        }
        count *= c;
        depth += 1;
    }
    let mut out: Vec<Key> = vec![Vec::new()];
    for f in 0..depth {
        let ranks: Vec<u32> = (0..space.n_servers)
            .filter(|&r| inst.requests[f].candidate_servers[space.content_server(r)])
            .map(|r| r as u32)
            .collect();
        out = out
            .iter()
            .flat_map(|p| ranks.iter().map(move |&r| [&p[..], &[r]].concat()))
            .collect();
    }
    (depth, out)
}

pub(crate) struct SearchConfig {
    pub workers: usize,
    pub deadline: Option<Instant>,
    pub exhaustive: bool,
    pub trace: bool,
}

pub(crate) fn search(space: &Space, config: &SearchConfig) -> (Outcome, Option<Trace>) {
    let shared = Shared {
        best_obj: AtomicI64::new(i64::MAX),
        best: Mutex::new(None),
        stop: AtomicBool::new(false),
        nodes: AtomicU64::new(0),
        updates: AtomicU64::new(0),
        deadline: config.deadline,
    };
    let root_bound = Worker::new(space, &shared, false).lower_bound();
    let (depth, tasks) = prefixes(space);
    let next = AtomicUsize::new(0);
    let traces: Mutex<Vec<Trace>> = Mutex::new(Vec::new());

    let run = || {
        let mut w = Worker::new(space, &shared, config.exhaustive);
        if config.trace {
            w.trace = Some(Vec::new());
        }
        loop {
            let t = next.fetch_add(1, Ordering::Relaxed);
            if t >= tasks.len() || shared.stop.load(Ordering::Relaxed) {
                break;
            }
            let prefix = &tasks[t];
            let mut admitted = true;
            for (f, &r) in prefix.iter().enumerate() {
                w.cs[f] = Some(space.content_server(r as usize));
                w.key.push(r);
                if !w.admit() {
                    admitted = false;
                    break;
                }
            }
            if admitted {
                w.dfs(depth);
            }
            for f in 0..prefix.len() {
                w.cs[f] = None;
            }
            w.key.clear();
        }
        shared.nodes.fetch_add(w.nodes, Ordering::Relaxed);
        if let Some(t) = w.trace.take() {
            traces.lock().unwrap().push(t);
        }
    };

    let workers = config.workers.max(1);
    if workers == 1 || tasks.len() <= 1 {
        run();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers.min(tasks.len()) {
                scope.spawn(run);
            }
        });
    }

    let trace = config
        .trace
        .then(|| traces.into_inner().unwrap().into_iter().flatten().collect());
    let outcome = Outcome {
        best: shared.best.into_inner().unwrap(),
        stopped: shared.stop.load(Ordering::Relaxed),
        nodes: shared.nodes.load(Ordering::Relaxed),
        updates: shared.updates.load(Ordering::Relaxed),
        root_bound,
    };
    (outcome, trace)
}
