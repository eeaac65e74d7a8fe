//! Seeded evaluation scenarios and the reuse versus no-reuse comparison.
//!
//! [`generate`] draws a full-mesh network and a request set, then produces the
//! current deployment by solving the existing requests alone against an empty
//! snapshot and adopting that placement and its routes. [`run_comparison`]
//! solves the resulting instance twice: once freely ("online") and once with
//! new requests barred from snapshot instances ("no_reuse").

mod report;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::CostBreakdown;
use crate::error::{Error, Result};
use crate::model::{
    DeltaCounts, Formulation, InstantiationCost, Matrix, Micros, Money, Network, ProblemInstance,
    RequestStatus, ServiceRequest, Snapshot, Units, VnfCatalog, VnfType, FORMAT_VERSION,
    MIGRATION_VOLUME,
};
use crate::solver::{solve_exact, SolveOptions, SolveStats, SolveStatus};

pub use report::{emit_report, ReportFormat, CSV_COLUMNS, REPORT_SCHEMA};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 7;

/// Generator parameters. Defaults are the evaluation settings: bandwidth 10,
/// link cost 0.09 to 0.115 per unit, link delay 4 to 50 ms, delay budget
/// 1800 to 2000 ms, 1 to 3 VNFs per chain, license 100, 2 resource units per
/// VNF, 20 ms processing, server capacity 8 at 5 per unit, one traffic unit
/// per request, threshold 1, three candidate content servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Parameters {
    pub bandwidth: Units,
    pub link_cost_min: Money,
    pub link_cost_max: Money,
    pub link_delay_min_ms: u64,
    pub link_delay_max_ms: u64,
    pub delay_budget_min_ms: u64,
    pub delay_budget_max_ms: u64,
    pub chain_min: usize,
    pub chain_max: usize,
    pub n_types: usize,
    pub license_cost: Money,
    pub resource_req: Units,
    pub vnf_capacity: Units,
    pub processing_delay_ms: u64,
    pub server_capacity: Units,
    pub server_unit_cost: Money,
    pub traffic: Units,
    pub usage_threshold: f64,
    pub candidates: usize,
    /// Traffic units moved per migration; migration cost is this times the link cost.
    pub migration_volume: i64,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            bandwidth: 10,
            link_cost_min: Money::micros(90_000),
            link_cost_max: Money::micros(115_000),
            link_delay_min_ms: 4,
            link_delay_max_ms: 50,
            delay_budget_min_ms: 1800,
            delay_budget_max_ms: 2000,
            chain_min: 1,
            chain_max: 3,
            n_types: 3,
            license_cost: Money::units(100),
            resource_req: 2,
            vnf_capacity: 10,
            processing_delay_ms: 20,
            server_capacity: 8,
            server_unit_cost: Money::units(5),
            traffic: 1,
            usage_threshold: 1.0,
            candidates: 3,
            migration_volume: MIGRATION_VOLUME,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// 6 servers, 6 user groups, request splits (2, 4), (3, 3), (4, 2).
    Full,
    /// 4 servers, 4 user groups, request splits (1, 3), (2, 2), (3, 1).
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub n_servers: usize,
    pub n_user_groups: usize,
    pub existing_requests: usize,
    pub new_requests: usize,
    /// Scenario number the counts were taken from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_id: Option<u8>,
    #[serde(default)]
    pub params: Parameters,
    #[serde(default)]
    pub formulation: Formulation,
}

impl ScenarioSpec {
    /// Custom counts with default parameters. The comparison uses clamped
    /// license costs; see [`ScenarioSpec::formulation`].
    pub fn new(
        seed: u64,
        n_servers: usize,
        n_user_groups: usize,
        existing: usize,
        new: usize,
    ) -> Self {
        Self {
            seed,
            n_servers,
            n_user_groups,
            existing_requests: existing,
            new_requests: new,
            scenario_id: None,
            params: Parameters::default(),
            formulation: Formulation {
                instantiation: InstantiationCost::Clamped,
                ..Formulation::default()
            },
        }
    }

    /// Scenario 1, 2 or 3 at the given scale.
    pub fn scenario(id: u8, scale: Scale, seed: u64) -> Result<Self> {
        let (nodes, splits) = match scale {
            Scale::Full => (6, [(2, 4), (3, 3), (4, 2)]),
            Scale::Reduced => (4, [(1, 3), (2, 2), (3, 1)]),
        };
        let (existing, new) = *splits
            .get((id as usize).wrapping_sub(1))
            .ok_or_else(|| Error::Scenario(format!("scenario must be 1, 2 or 3, got {id}")))?;
        let mut spec = Self::new(seed, nodes, nodes, existing, new);
        spec.scenario_id = Some(id);
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        let p = &self.params;
        let fail = |m: &str| Err(Error::Scenario(m.to_string()));
        if self.existing_requests + self.new_requests == 0 {
            return fail("at least one request is required");
        }
        if self.n_servers == 0 || self.n_user_groups == 0 {
            return fail("at least one server and one user group are required");
        }
        if p.n_types == 0
            || p.chain_min == 0
            || p.chain_min > p.chain_max
            || p.chain_max > p.n_types
        {
            return fail("chain length range must satisfy 1 <= min <= max <= number of types");
        }
        if p.candidates == 0 {
            return fail("at least one candidate server is required");
        }
        if p.link_cost_min > p.link_cost_max
            || p.link_delay_min_ms > p.link_delay_max_ms
            || p.delay_budget_min_ms > p.delay_budget_max_ms
        {
            return fail("every random range must have min <= max");
        }
        Ok(())
    }
}

fn ms(v: u64) -> Micros {
    v * 1000
}

/// Draws the network and requests; the snapshot is left empty and every request is new.
fn draw(spec: &ScenarioSpec) -> ProblemInstance {
    let p = &spec.params;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ns, nu) = (spec.n_servers, spec.n_user_groups);
    let n = ns + nu;

    let mut link_cost = Matrix::new(n);
    let mut link_delay = Matrix::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = rng.random_range(p.link_cost_min.as_micros()..=p.link_cost_max.as_micros());
            link_cost.set_sym(i, j, Money(c));
            link_delay.set_sym(
                i,
                j,
                ms(rng.random_range(p.link_delay_min_ms..=p.link_delay_max_ms)),
            );
        }
    }

    let total = spec.existing_requests + spec.new_requests;
    let mut requests = Vec::with_capacity(total);
    for f in 0..total {
        let len = rng.random_range(p.chain_min..=p.chain_max);
        let mut chain = index::sample(&mut rng, p.n_types, len).into_vec();
        chain.sort_unstable();
        let budget = ms(rng.random_range(p.delay_budget_min_ms..=p.delay_budget_max_ms));
        let mut candidates = vec![false; ns];
        for s in index::sample(&mut rng, ns, p.candidates.min(ns)) {
            candidates[s] = true;
        }
        requests.push(ServiceRequest {
            id: format!("f{f}"),
            user: f % nu,
            chain,
            traffic: p.traffic,
            delay_budget: budget,
            candidate_servers: candidates,
            status: RequestStatus::New,
            current_route: None,
        });
    }

    let types = (0..p.n_types)
        .map(|k| {
            let users = requests.iter().filter(|r| r.chain.contains(&k)).count();
            VnfType {
                name: format!("vnf{k}"),
                license_cost: p.license_cost,
                capacity: p.vnf_capacity,
                resource_req: p.resource_req,
                instances: users.max(1),
                processing_delay: vec![ms(p.processing_delay_ms); ns],
                migration_cost: Matrix::from_fn(ns, |s, t| {
                    link_cost.get(s, t) * p.migration_volume
                }),
            }
        })
        .collect();
    let catalog = VnfCatalog { types };

    ProblemInstance {
        format_version: FORMAT_VERSION.to_string(),
        network: Network {
            servers: (0..ns).map(|s| format!("s{s}")).collect(),
            users: (0..nu).map(|u| format!("u{u}")).collect(),
            bandwidth: Matrix::from_fn(n, |i, j| if i == j { 0 } else { p.bandwidth }),
            link_cost,
            link_delay,
            server_capacity: vec![p.server_capacity; ns],
            server_unit_cost: vec![p.server_unit_cost; ns],
        },
        snapshot: Snapshot::empty(&catalog, ns),
        catalog,
        requests,
        usage_threshold: p.usage_threshold,
        formulation: spec.formulation,
    }
}

/// Builds the instance for `spec`, bootstrapping the snapshot from the existing requests.
pub fn generate(spec: &ScenarioSpec) -> Result<ProblemInstance> {
    spec.check()?;
    let mut instance = draw(spec);
    if spec.existing_requests == 0 {
        return Ok(instance);
    }
    let mut offline = instance.clone();
    offline.requests.truncate(spec.existing_requests);
    let options = SolveOptions {
        time_limit: 3600.0,
        no_reuse: false,
        workers: 1,
    };
    let result = solve_exact(&offline, &options)?;
    let plan = match (result.status, result.plan) {
        (SolveStatus::Optimal, Some(plan)) => plan,
        (SolveStatus::TimeLimit, _) => {
            return Err(Error::Scenario(
                "offline placement of the existing requests timed out".into(),
            ))
        }
        _ => return Err(Error::BootstrapInfeasible),
    };
    instance.snapshot = Snapshot {
        deployed: plan.deployment,
    };
    for (f, route) in plan.routes.into_iter().enumerate() {
        let req = &mut instance.requests[f];
        req.status = RequestStatus::Existing;
        req.current_route = Some(route);
    }
    Ok(instance)
}

/// Test-sized random instance: 2 or 3 servers, 1 or 2 users and requests,
/// 1 or 2 VNF types, with a random snapshot. Capacities, bandwidths and delay
/// budgets are drawn tight enough to bind now and then.
pub fn small_instance(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = rng.random_range(2..=3usize);
    let nu = rng.random_range(1..=2usize);
    let n_types = rng.random_range(1..=2usize);
    let n_req = rng.random_range(1..=2usize);
    let n = ns + nu;

    let mut link_cost = Matrix::new(n);
    let mut link_delay = Matrix::new(n);
    let mut bandwidth = Matrix::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            link_cost.set_sym(i, j, Money(rng.random_range(90_000..=115_000)));
            link_delay.set_sym(i, j, ms(rng.random_range(4..=50)));
            bandwidth.set_sym(i, j, rng.random_range(1..=3));
        }
    }

    let mut requests = Vec::new();
    for f in 0..n_req {
        let len = rng.random_range(1..=n_types);
        let mut chain = index::sample(&mut rng, n_types, len).into_vec();
        chain.sort_unstable();
        if rng.random_bool(0.3) {
            chain.reverse();
        }
        let mut candidates = vec![false; ns];
        let n_cand = rng.random_range(1..=ns);
        for s in index::sample(&mut rng, ns, n_cand) {
            candidates[s] = true;
        }
        requests.push(ServiceRequest {
            id: format!("f{f}"),
            user: rng.random_range(0..nu),
            chain,
            traffic: rng.random_range(1..=2),
            delay_budget: ms(rng.random_range(60..=200)),
            candidate_servers: candidates,
            status: if rng.random_bool(0.5) {
                RequestStatus::Existing
            } else {
                RequestStatus::New
            },
            current_route: None,
        });
    }

    let types: Vec<VnfType> = (0..n_types)
        .map(|k| VnfType {
            name: format!("vnf{k}"),
            license_cost: Money::units(rng.random_range(20..=120)),
            capacity: rng.random_range(1..=4),
            resource_req: rng.random_range(1..=3),
            instances: rng.random_range(1..=2),
            processing_delay: (0..ns).map(|_| ms(rng.random_range(5..=25))).collect(),
            migration_cost: Matrix::from_fn(ns, |s, t| link_cost.get(s, t) * MIGRATION_VOLUME),
        })
        .collect();
    let catalog = VnfCatalog { types };
    let mut snapshot = Snapshot::empty(&catalog, ns);
    for (k, t) in catalog.types.iter().enumerate() {
        for i in 0..t.instances {
            if rng.random_bool(0.4) {
                snapshot.deployed[k].set(i, rng.random_range(0..ns), true);
            }
        }
    }
    for req in requests
        .iter_mut()
        .filter(|r| r.status == RequestStatus::Existing)
    {
        let mut route = crate::model::RouteMatrix::new(n);
        let user = ns + req.user;
        route.set(rng.random_range(0..ns), user, true);
        req.current_route = Some(route);
    }
    let formulation = Formulation {
        instantiation: if rng.random_bool(0.5) {
            InstantiationCost::Literal
        } else {
            InstantiationCost::Clamped
        },
        ..Formulation::default()
    };

    ProblemInstance {
        format_version: FORMAT_VERSION.to_string(),
        network: Network {
            servers: (0..ns).map(|s| format!("s{s}")).collect(),
            users: (0..nu).map(|u| format!("u{u}")).collect(),
            bandwidth,
            link_cost,
            link_delay,
            server_capacity: (0..ns).map(|_| rng.random_range(2..=6)).collect(),
            server_unit_cost: (0..ns)
                .map(|_| Money::units(rng.random_range(3..=7)))
                .collect(),
        },
        catalog,
        requests,
        snapshot,
        usage_threshold: 1.0,
        formulation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Online,
    NoReuse,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::Online => "online",
            Case::NoReuse => "no_reuse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: Case,
    pub status: SolveStatus,
    pub breakdown: Option<CostBreakdown>,
    pub counts: Option<DeltaCounts>,
    pub migration_count: usize,
    pub delays: Vec<Micros>,
    pub stats: SolveStats,
}

impl CaseReport {
    pub fn total(&self) -> Option<Money> {
        self.breakdown.map(|b| b.total)
    }

    /// Mean service delay in microseconds, `None` without requests or plan.
    pub fn mean_delay(&self) -> Option<f64> {
        (!self.delays.is_empty())
            .then(|| self.delays.iter().sum::<u64>() as f64 / self.delays.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub spec: ScenarioSpec,
    pub online: CaseReport,
    pub no_reuse: CaseReport,
    /// `no_reuse.total - online.total` when both cases have a plan.
    pub gap: Option<Money>,
}

fn solve_case(
    instance: &ProblemInstance,
    case: Case,
    options: &SolveOptions,
) -> Result<CaseReport> {
    let options = SolveOptions {
        no_reuse: case == Case::NoReuse,
        ..*options
    };
    let result = solve_exact(instance, &options)?;
    log::info!(
        "{} case: {:?}, {} nodes",
        case.label(),
        result.status,
        result.stats.nodes
    );
    let counts = result.delta.as_ref().map(|d| d.counts());
    Ok(CaseReport {
        case,
        status: result.status,
        breakdown: result.breakdown,
        counts,
        migration_count: counts.map_or(0, |c| c.migrated),
        delays: result.delays,
        stats: result.stats,
    })
}

/// Generates the instance and solves both cases on it.
pub fn run_comparison(spec: &ScenarioSpec, options: &SolveOptions) -> Result<ComparisonReport> {
    let instance = generate(spec)?;
    let (online, no_reuse) = if options.workers > 1 {
        std::thread::scope(|scope| {
            let a = scope.spawn(|| solve_case(&instance, Case::Online, options));
            let b = solve_case(&instance, Case::NoReuse, options);
            (a.join().expect("online solve panicked"), b)
        })
    } else {
        (
            solve_case(&instance, Case::Online, options),
            solve_case(&instance, Case::NoReuse, options),
        )
    };
    let (online, no_reuse) = (online?, no_reuse?);
    let gap = match (online.total(), no_reuse.total()) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    Ok(ComparisonReport {
        spec: spec.clone(),
        online,
        no_reuse,
        gap,
    })
}

#[cfg(test)]
mod tests;
