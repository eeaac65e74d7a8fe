//! Exact solvers: branch-and-bound ([`solve_exact`]) and exhaustive
//! enumeration ([`brute_force`]).
//!
//! Both search the structural decisions only (content servers, placements,
//! assignments) and derive routes with [`derive_routes`]. Among plans of equal
//! cost both return the one with the lexicographically smallest canonical
//! variable vector (see [`crate::ilp`]). Fresh instances of a type are
//! interchangeable, so both solvers only consider plans in which fresh
//! instance `i` is placed only if the previous fresh instance of its type is.

mod bnb;
mod brute;
mod space;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::costs::{service_delay, total_objective, CostBreakdown};
use crate::error::{Error, Result};
use crate::model::{
    check_feasibility_with, snapshot_diff, validate_instance, DeploymentDelta, Micros, Money,
    PlacementPlan, ProblemInstance,
};

pub use space::derive_routes;

/// Default cap on the number of combinations [`brute_force`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Forbid new requests from using instances present in the snapshot.
    pub no_reuse: bool,
    pub workers: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: 600.0,
            no_reuse: false,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub incumbent_updates: u64,
    pub wall_time_ms: u64,
}

/// Outcome of a solve. `plan`, `breakdown` and `delta` are present unless the
/// status is infeasible (or the time limit hit before any plan was found).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub plan: Option<PlacementPlan>,
    pub breakdown: Option<CostBreakdown>,
    pub delta: Option<DeploymentDelta>,
    /// Service delay per request, in request order.
    pub delays: Vec<Micros>,
    /// Lower bound at the root of the search.
    pub lower_bound: Option<Money>,
    /// Incumbent minus lower bound; zero when optimal.
    pub gap: Option<Money>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn objective(&self) -> Option<Money> {
        self.breakdown.map(|b| b.total)
    }

    fn infeasible(stats: SolveStats) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            plan: None,
            breakdown: None,
            delta: None,
            delays: Vec::new(),
            lower_bound: None,
            gap: None,
            stats,
        }
    }

    fn with_plan(
        instance: &ProblemInstance,
        status: SolveStatus,
        plan: PlacementPlan,
        expected: i64,
        no_reuse: bool,
        stats: SolveStats,
    ) -> Result<Self> {
        let breakdown = total_objective(instance, &plan)?;
        assert_eq!(
            breakdown.total.as_micros(),
            expected,
            "search objective disagrees with cost model"
        );
        let report = check_feasibility_with(instance, &plan, no_reuse)?;
        assert!(
            report.is_feasible(),
            "solver produced an infeasible plan: {:?}",
            report.violations
        );
        let delays = (0..instance.requests.len())
            .map(|f| service_delay(instance, &plan, f))
            .collect::<Result<_>>()?;
        Ok(Self {
            status,
            delta: Some(snapshot_diff(&instance.snapshot, &plan)),
            plan: Some(plan),
            breakdown: Some(breakdown),
            delays,
            lower_bound: None,
            gap: None,
            stats,
        })
    }
}

fn check_instance(instance: &ProblemInstance) -> Result<()> {
    let report = validate_instance(instance);
    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::ValidationFailed(report))
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Branch-and-bound solve. Deterministic for any worker count when it finishes
/// within the time limit.
pub fn solve_exact(instance: &ProblemInstance, options: &SolveOptions) -> Result<SolveResult> {
    check_instance(instance)?;
    if !(options.time_limit > 0.0 && options.time_limit.is_finite()) {
        return Err(Error::InvalidOption(format!(
            "time limit must be positive, got {}",
            options.time_limit
        )));
    }
    if options.workers == 0 {
        return Err(Error::InvalidOption(
            "at least one worker is required".into(),
        ));
    }
    let start = Instant::now();
    let space = space::Space::new(instance, options.no_reuse);
    let config = bnb::SearchConfig {
        workers: options.workers,
        deadline: Some(start + Duration::from_secs_f64(options.time_limit)),
        exhaustive: false,
        trace: false,
    };
    let (outcome, _) = bnb::search(&space, &config);
    let stats = SolveStats {
        nodes: outcome.nodes,
        incumbent_updates: outcome.updates,
        wall_time_ms: elapsed_ms(start),
    };
    log::debug!(
        "branch-and-bound: {} nodes, {} incumbents",
        stats.nodes,
        stats.incumbent_updates
    );

    let status = if outcome.stopped {
        SolveStatus::TimeLimit
    } else {
        SolveStatus::Optimal
    };
    match outcome.best {
        None if status == SolveStatus::Optimal => Ok(SolveResult::infeasible(stats)),
        None => Ok(SolveResult {
            status,
            lower_bound: outcome.root_bound.map(Money),
            ..SolveResult::infeasible(stats)
        }),
        Some(best) => {
            let mut result = SolveResult::with_plan(
                instance,
                status,
                best.plan,
                best.obj,
                options.no_reuse,
                stats,
            )?;
            let bound = if status == SolveStatus::Optimal {
                Some(best.obj)
            } else {
                outcome.root_bound
            };
            result.lower_bound = bound.map(Money);
            result.gap = bound.map(|b| Money(best.obj - b));
            Ok(result)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceOptions {
    pub no_reuse: bool,
    /// Largest product of decision-domain sizes accepted.
    pub cap: u128,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            no_reuse: false,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Exhaustive oracle with default options.
pub fn brute_force(instance: &ProblemInstance) -> Result<SolveResult> {
    brute_force_with(instance, &BruteForceOptions::default())
}

/// Exhaustive oracle. Fails with [`Error::TooLarge`] above the enumeration cap.
pub fn brute_force_with(
    instance: &ProblemInstance,
    options: &BruteForceOptions,
) -> Result<SolveResult> {
    check_instance(instance)?;
    let start = Instant::now();
    let space = space::Space::new(instance, options.no_reuse);
    let size = brute::domain_product(&space);
    if size > options.cap {
        return Err(Error::TooLarge {
            size,
            cap: options.cap,
        });
    }
    let mut best: Option<(i64, PlacementPlan)> = None;
    let mut updates = 0;
    let leaves = brute::enumerate(&space, |leaf| {
        if best.as_ref().is_none_or(|(obj, _)| leaf.obj < *obj) {
            best = Some((leaf.obj, leaf.plan.clone()));
            updates += 1;
        }
    })?;
    let stats = SolveStats {
        nodes: leaves,
        incumbent_updates: updates,
        wall_time_ms: elapsed_ms(start),
    };
    match best {
        None => Ok(SolveResult::infeasible(stats)),
        Some((obj, plan)) => {
            let mut result = SolveResult::with_plan(
                instance,
                SolveStatus::Optimal,
                plan,
                obj,
                options.no_reuse,
                stats,
            )?;
            result.lower_bound = Some(Money(obj));
            result.gap = Some(Money::ZERO);
            Ok(result)
        }
    }
}

#[cfg(test)]
mod tests;
