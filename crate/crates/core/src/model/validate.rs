use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Matrix, Money, ProblemInstance, RequestStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    FormatVersion,
    DuplicateNodeName,
    DimensionMismatch,
    AsymmetricMatrix,
    NonzeroDiagonal,
    NegativeEntry,
    NonpositiveCapacity,
    ThresholdOutOfRange,
    UnknownVnfType,
    EmptyInstancePool,
    EmptyChain,
    DuplicateChainType,
    UnknownUser,
    NoCandidateServer,
    RouteOnNewRequest,
    DuplicateRequestId,
    DuplicateDeployment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub indices: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, code: ViolationCode, indices: &[usize]) -> bool {
        self.violations
            .iter()
            .any(|v| v.code == code && v.indices == indices)
    }

    fn push(&mut self, code: ViolationCode, indices: Vec<usize>, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            indices,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{:?}{:?}: {}", v.code, v.indices, v.message)?;
        }
        Ok(())
    }
}

/// Lists every structural problem of `instance`. An empty report means the
/// instance can be handed to the cost model, the ILP builder and the solvers.
pub fn validate_instance(instance: &ProblemInstance) -> ValidationReport {
    use ViolationCode::*;

    let mut report = ValidationReport::default();
    let net = &instance.network;
    let n_servers = net.n_servers();
    let n = net.n_nodes();

    if instance.format_version != super::FORMAT_VERSION {
        report.push(
            FormatVersion,
            vec![],
            format!("unsupported format version {}", instance.format_version),
        );
    }

    let mut names = HashSet::new();
    for (idx, name) in net.servers.iter().chain(net.users.iter()).enumerate() {
        if !names.insert(name.as_str()) {
            report.push(
                DuplicateNodeName,
                vec![idx],
                format!("node name {name} declared twice"),
            );
        }
    }

    check_matrix(
        &mut report,
        "bandwidth",
        &net.bandwidth,
        n,
        |v| v as i128,
        false,
    );
    check_matrix(
        &mut report,
        "link_cost",
        &net.link_cost,
        n,
        |m| m.as_micros() as i128,
        true,
    );
    check_matrix(
        &mut report,
        "link_delay",
        &net.link_delay,
        n,
        |v| v as i128,
        true,
    );
    if net.bandwidth.dim() == n {
        for i in 0..n {
            for j in (i + 1)..n {
                if net.bandwidth.get(i, j) == 0 {
                    report.push(
                        NonpositiveCapacity,
                        vec![i, j],
                        "link bandwidth must be positive",
                    );
                }
            }
        }
    }

    if net.server_capacity.len() != n_servers || net.server_unit_cost.len() != n_servers {
        report.push(
            DimensionMismatch,
            vec![],
            "per-server vectors must have one entry per server",
        );
    }
    for (s, &cap) in net.server_capacity.iter().enumerate() {
        if cap == 0 {
            report.push(
                NonpositiveCapacity,
                vec![s],
                format!("server {s} has zero capacity"),
            );
        }
    }
    for (s, cost) in net.server_unit_cost.iter().enumerate() {
        if cost.is_negative() {
            report.push(
                NegativeEntry,
                vec![s],
                format!("server {s} has negative unit cost"),
            );
        }
    }

    let mu = instance.usage_threshold;
    if !(mu > 0.0 && mu <= 1.0) {
        report.push(
            ThresholdOutOfRange,
            vec![],
            format!("usage threshold {mu} outside (0, 1]"),
        );
    }

    let required = instance.required_types();
    for (k, t) in instance.catalog.types.iter().enumerate() {
        if t.license_cost.is_negative() {
            report.push(
                NegativeEntry,
                vec![k],
                format!("type {k} has negative license cost"),
            );
        }
        if t.capacity == 0 {
            report.push(
                NonpositiveCapacity,
                vec![k],
                format!("type {k} has zero processing capacity"),
            );
        }
        if t.instances == 0 && required.contains(&k) {
            report.push(
                EmptyInstancePool,
                vec![k],
                format!("type {k} is required but has no instances"),
            );
        }
        if t.processing_delay.len() != n_servers {
            report.push(
                DimensionMismatch,
                vec![k],
                format!("type {k} processing delay needs one entry per server"),
            );
        }
        if t.migration_cost.dim() != n_servers {
            report.push(
                DimensionMismatch,
                vec![k],
                format!("type {k} migration cost must be servers x servers"),
            );
        } else {
            for s in 0..n_servers {
                if t.migration_cost.get(s, s) != Money::ZERO {
                    report.push(
                        NonzeroDiagonal,
                        vec![k, s],
                        format!("type {k} charges for staying on server {s}"),
                    );
                }
                for u in 0..n_servers {
                    if t.migration_cost.get(s, u).is_negative() {
                        report.push(
                            NegativeEntry,
                            vec![k, s, u],
                            format!("type {k} has negative migration cost"),
                        );
                    }
                }
            }
        }
    }

    let mut ids = HashSet::new();
    for (f, req) in instance.requests.iter().enumerate() {
        if !ids.insert(req.id.as_str()) {
            report.push(
                DuplicateRequestId,
                vec![f],
                format!("request id {} used twice", req.id),
            );
        }
        if req.user >= net.n_users() {
            report.push(
                UnknownUser,
                vec![f],
                format!("request {f} names user {}", req.user),
            );
        }
        if req.chain.is_empty() {
            report.push(
                EmptyChain,
                vec![f],
                format!("request {f} has an empty chain"),
            );
        }
        let mut seen = HashSet::new();
        for &k in &req.chain {
            if k >= instance.n_types() {
                report.push(
                    UnknownVnfType,
                    vec![f, k],
                    format!("request {f} requires unknown type {k}"),
                );
            }
            if !seen.insert(k) {
                report.push(
                    DuplicateChainType,
                    vec![f, k],
                    format!("request {f} lists type {k} twice"),
                );
            }
        }
        if req.candidate_servers.len() != n_servers {
            report.push(
                DimensionMismatch,
                vec![f],
                format!("request {f} candidate flags need one entry per server"),
            );
        }
        if !req.candidate_servers.iter().any(|&c| c) {
            report.push(
                NoCandidateServer,
                vec![f],
                format!("request {f} has no candidate content server"),
            );
        }
        if let Some(route) = &req.current_route {
            if route.dim() != n {
                report.push(
                    DimensionMismatch,
                    vec![f],
                    format!("request {f} current route has wrong dimension"),
                );
            } else if req.status == RequestStatus::New && !route.is_empty() {
                report.push(
                    RouteOnNewRequest,
                    vec![f],
                    format!("new request {f} carries a current route"),
                );
            }
        }
    }

    if instance.snapshot.deployed.len() != instance.n_types() {
        report.push(
            DimensionMismatch,
            vec![],
            "snapshot must have one grid per VNF type",
        );
    } else {
        for (k, grid) in instance.snapshot.deployed.iter().enumerate() {
            let want = (instance.vnf(k).instances, n_servers);
            if grid.shape() != want && !(want.0 == 0 && grid.rows() == 0) {
                report.push(
                    DimensionMismatch,
                    vec![k],
                    format!(
                        "snapshot of type {k} is {:?}, expected {want:?}",
                        grid.shape()
                    ),
                );
                continue;
            }
            for i in 0..grid.rows() {
                if grid.row_count(i) > 1 {
                    report.push(
                        DuplicateDeployment,
                        vec![k, i],
                        format!("instance ({k}, {i}) deployed on several servers"),
                    );
                }
            }
        }
    }

    report
}

fn check_matrix<T: Copy + Default>(
    report: &mut ValidationReport,
    name: &str,
    m: &Matrix<T>,
    n: usize,
    value: impl Fn(T) -> i128,
    zero_diagonal: bool,
) {
    use ViolationCode::*;
    if m.dim() != n {
        report.push(
            DimensionMismatch,
            vec![],
            format!("{name} is {0}x{0}, expected {n}x{n}", m.dim()),
        );
        return;
    }
    for i in 0..n {
        if zero_diagonal && value(m.get(i, i)) != 0 {
            report.push(
                NonzeroDiagonal,
                vec![i],
                format!("{name}[{i}][{i}] must be zero"),
            );
        }
        for j in 0..n {
            if value(m.get(i, j)) < 0 {
                report.push(
                    NegativeEntry,
                    vec![i, j],
                    format!("{name}[{i}][{j}] is negative"),
                );
            }
            if j > i && value(m.get(i, j)) != value(m.get(j, i)) {
                report.push(
                    AsymmetricMatrix,
                    vec![i, j],
                    format!("{name} differs at ({i}, {j}) and ({j}, {i})"),
                );
            }
        }
    }
}
