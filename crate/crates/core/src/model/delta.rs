use serde::{Deserialize, Serialize};

use super::{PlacementPlan, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceSite {
    pub vnf_type: usize,
    pub instance: usize,
    pub server: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceMove {
    pub vnf_type: usize,
    pub instance: usize,
    pub from: usize,
    pub to: usize,
}

/// How the plan's deployment differs from the snapshot, instance by instance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentDelta {
    pub reused: Vec<InstanceSite>,
    pub migrated: Vec<InstanceMove>,
    pub instantiated: Vec<InstanceSite>,
    pub removed: Vec<InstanceSite>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaCounts {
    pub reused: usize,
    pub migrated: usize,
    pub instantiated: usize,
    pub removed: usize,
}

impl DeploymentDelta {
    pub fn counts(&self) -> DeltaCounts {
        DeltaCounts {
            reused: self.reused.len(),
            migrated: self.migrated.len(),
            instantiated: self.instantiated.len(),
            removed: self.removed.len(),
        }
    }
}

/// Classifies every instance present in the snapshot or the plan.
///
/// Both sides are expected to satisfy single placement; for a malformed map
/// the first server in index order is used.
pub fn snapshot_diff(snapshot: &Snapshot, plan: &PlacementPlan) -> DeploymentDelta {
    let mut delta = DeploymentDelta::default();
    for (k, planned) in plan.deployment.iter().enumerate() {
        for i in 0..planned.rows() {
            let before = snapshot.server_of(k, i);
            let after = plan.server_of(k, i);
            match (before, after) {
                (Some(s), Some(t)) if s == t => delta.reused.push(InstanceSite {
                    vnf_type: k,
                    instance: i,
                    server: s,
                }),
                (Some(s), Some(t)) => delta.migrated.push(InstanceMove {
                    vnf_type: k,
                    instance: i,
                    from: s,
                    to: t,
                }),
                (None, Some(t)) => delta.instantiated.push(InstanceSite {
                    vnf_type: k,
                    instance: i,
                    server: t,
                }),
                (Some(s), None) => delta.removed.push(InstanceSite {
                    vnf_type: k,
                    instance: i,
                    server: s,
                }),
                (None, None) => {}
            }
        }
    }
    delta
}
