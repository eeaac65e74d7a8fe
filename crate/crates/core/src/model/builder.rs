use super::{
    BinaryGrid, Formulation, Matrix, Micros, Money, Network, ProblemInstance, RequestStatus,
    RouteMatrix, ServiceRequest, Snapshot, Units, VnfCatalog, VnfType, FORMAT_VERSION,
};

/// Traffic units moved when an instance migrates (disk plus memory image).
pub const MIGRATION_VOLUME: i64 = 44;

/// Incremental construction of small instances with uniform defaults.
///
/// Defaults: every link has bandwidth 10, cost 100 000 micro-money per unit and
/// 10 ms delay; servers have capacity 8 and cost 5 money per unit; migration
/// cost is [`MIGRATION_VOLUME`] times the link cost unless set explicitly.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    network: Network,
    types: Vec<(VnfType, bool)>,
    requests: Vec<ServiceRequest>,
    deployed: Vec<(usize, usize, usize)>,
    usage_threshold: f64,
    formulation: Formulation,
}

impl InstanceBuilder {
    pub fn new(n_servers: usize, n_users: usize) -> Self {
        let n = n_servers + n_users;
        Self {
            network: Network {
                servers: (0..n_servers).map(|s| format!("s{s}")).collect(),
                users: (0..n_users).map(|u| format!("u{u}")).collect(),
                bandwidth: Matrix::from_fn(n, |i, j| if i == j { 0 } else { 10 }),
                link_cost: Matrix::from_fn(n, |i, j| {
                    if i == j {
                        Money::ZERO
                    } else {
                        Money::micros(100_000)
                    }
                }),
                link_delay: Matrix::from_fn(n, |i, j| if i == j { 0 } else { 10_000 }),
                server_capacity: vec![8; n_servers],
                server_unit_cost: vec![Money::units(5); n_servers],
            },
            types: Vec::new(),
            requests: Vec::new(),
            deployed: Vec::new(),
            usage_threshold: 1.0,
            formulation: Formulation::default(),
        }
    }

    pub fn n_servers(&self) -> usize {
        self.network.n_servers()
    }

    pub fn link(mut self, i: usize, j: usize, cost: Money, delay: Micros) -> Self {
        self.network.link_cost.set_sym(i, j, cost);
        self.network.link_delay.set_sym(i, j, delay);
        self
    }

    pub fn bandwidth(mut self, i: usize, j: usize, units: Units) -> Self {
        self.network.bandwidth.set_sym(i, j, units);
        self
    }

    pub fn server(mut self, s: usize, capacity: Units, unit_cost: Money) -> Self {
        self.network.server_capacity[s] = capacity;
        self.network.server_unit_cost[s] = unit_cost;
        self
    }

    /// Adds a VNF type with the same processing delay on every server.
    pub fn vnf_type(
        mut self,
        license_cost: Money,
        capacity: Units,
        resource_req: Units,
        instances: usize,
        processing_delay: Micros,
    ) -> Self {
        let s = self.n_servers();
        let name = format!("vnf{}", self.types.len());
        self.types.push((
            VnfType {
                name,
                license_cost,
                capacity,
                resource_req,
                instances,
                processing_delay: vec![processing_delay; s],
                migration_cost: Matrix::new(s),
            },
            false,
        ));
        self
    }

    pub fn migration_cost(mut self, k: usize, from: usize, to: usize, cost: Money) -> Self {
        let (t, explicit) = &mut self.types[k];
        t.migration_cost.set(from, to, cost);
        *explicit = true;
        self
    }

    pub fn processing_delay(mut self, k: usize, s: usize, delay: Micros) -> Self {
        self.types[k].0.processing_delay[s] = delay;
        self
    }

    pub fn request(
        self,
        user: usize,
        chain: &[usize],
        traffic: Units,
        delay_budget: Micros,
        candidates: &[usize],
    ) -> Self {
        self.push_request(
            user,
            chain,
            traffic,
            delay_budget,
            candidates,
            RequestStatus::New,
        )
    }

    pub fn existing_request(
        self,
        user: usize,
        chain: &[usize],
        traffic: Units,
        delay_budget: Micros,
        candidates: &[usize],
    ) -> Self {
        self.push_request(
            user,
            chain,
            traffic,
            delay_budget,
            candidates,
            RequestStatus::Existing,
        )
    }

    fn push_request(
        mut self,
        user: usize,
        chain: &[usize],
        traffic: Units,
        delay_budget: Micros,
        candidates: &[usize],
        status: RequestStatus,
    ) -> Self {
        let mut flags = vec![false; self.n_servers()];
        for &s in candidates {
            flags[s] = true;
        }
        let id = format!("f{}", self.requests.len());
        self.requests.push(ServiceRequest {
            id,
            user,
            chain: chain.to_vec(),
            traffic,
            delay_budget,
            candidate_servers: flags,
            status,
            current_route: None,
        });
        self
    }

    /// Marks a link as currently carrying request `f`.
    pub fn current_link(mut self, f: usize, i: usize, j: usize) -> Self {
        let n = self.network.n_nodes();
        self.requests[f]
            .current_route
            .get_or_insert_with(|| RouteMatrix::new(n))
            .set(i, j, true);
        self
    }

    /// Records instance `(k, i)` as currently running on server `s`.
    pub fn deploy(mut self, k: usize, i: usize, s: usize) -> Self {
        self.deployed.push((k, i, s));
        self
    }

    pub fn usage_threshold(mut self, mu: f64) -> Self {
        self.usage_threshold = mu;
        self
    }

    pub fn formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }

    pub fn build(self) -> ProblemInstance {
        let n_servers = self.n_servers();
        let cost = &self.network.link_cost;
        let types: Vec<VnfType> = self
            .types
            .into_iter()
            .map(|(mut t, explicit)| {
                if !explicit {
                    t.migration_cost =
                        Matrix::from_fn(n_servers, |s, u| cost.get(s, u) * MIGRATION_VOLUME);
                }
                t
            })
            .collect();
        let mut deployed: Vec<BinaryGrid> = types
            .iter()
            .map(|t| BinaryGrid::new(t.instances, n_servers))
            .collect();
        for (k, i, s) in self.deployed {
            deployed[k].set(i, s, true);
        }
        ProblemInstance {
            format_version: FORMAT_VERSION.to_string(),
            network: self.network,
            catalog: VnfCatalog { types },
            requests: self.requests,
            snapshot: Snapshot { deployed },
            usage_threshold: self.usage_threshold,
            formulation: self.formulation,
        }
    }
}
