//! Exhaustive enumeration, used as an oracle for the branch-and-bound.
//!
//! Slots are enumerated in rank order, so the first strict minimum found is
//! the lexicographically smallest optimum. While enumerating, combinations
//! that would certainly be rejected by the feasibility check are skipped:
//! a non-candidate content server, an assignment to an instance that is not
//! placed on that server, and (with no-reuse) an assignment of a new request
//! to a snapshot instance. The ordered-activation rule on fresh instances is
//! the same symmetry restriction the branch-and-bound applies. Everything
//! else is left to [`check_feasibility_with`] and [`total_objective`].

use super::space::{Slot, Space};
use crate::costs::total_objective;
use crate::error::Result;
use crate::model::{check_feasibility_with, PlacementPlan};

/// Product of the full domain sizes of all decision slots, saturating.
pub(crate) fn domain_product(space: &Space) -> u128 {
    space.slots.iter().fold(1u128, |acc, &slot| {
        acc.saturating_mul(space.domain_size(slot) as u128)
    })
}

pub(crate) struct Leaf<'p> {
    #[cfg_attr(not(test), allow(dead_code))]
    pub key: &'p [u32],
    pub obj: i64,
    pub plan: &'p PlacementPlan,
}

struct Enumerator<'s, 'a, F> {
    space: &'s Space<'a>,
    cs: Vec<usize>,
    dep: Vec<Vec<Option<usize>>>,
    asg: Vec<Vec<(usize, usize)>>,
    key: Vec<u32>,
    leaves: u64,
    visit: F,
}

impl<F: FnMut(Leaf<'_>)> Enumerator<'_, '_, F> {
    fn run(&mut self, depth: usize) -> Result<()> {
        let space = self.space;
        let inst = space.inst;
        if depth == space.slots.len() {
            self.leaves += 1;
            let plan = space.plan(&self.cs, &self.dep, &self.asg);
            if check_feasibility_with(inst, &plan, space.no_reuse)?.is_feasible() {
                let obj = total_objective(inst, &plan)?.total.as_micros();
                (self.visit)(Leaf {
                    key: &self.key,
                    obj,
                    plan: &plan,
                });
            }
            return Ok(());
        }
        let slot = space.slots[depth];
        for r in 0..space.domain_size(slot) {
            match slot {
                Slot::Content { f } => {
                    let s = space.content_server(r);
                    if !inst.requests[f].candidate_servers[s] {
                        continue;
                    }
                    self.cs[f] = s;
                }
                Slot::Deploy { k, i } => {
                    let place = space.placement(r);
                    if place.is_some() {
                        if let Some(p) = space.prev_fresh[k][i] {
                            if self.dep[k][p].is_none() {
                                continue;
                            }
                        }
                    }
                    self.dep[k][i] = place;
                }
                Slot::Assign { f, k, pos } => {
                    let (s, i) = space.assignment(k, r);
                    if self.dep[k][i] != Some(s) || !space.usable(f, k, i) {
                        continue;
                    }
                    self.asg[f][pos] = (s, i);
                }
            }
            self.key.push(r as u32);
            self.run(depth + 1)?;
            self.key.pop();
        }
        if let Slot::Deploy { k, i } = slot {
            self.dep[k][i] = None;
        }
        Ok(())
    }
}

/// Visits every feasible leaf in rank order. Returns the number of leaves checked.
pub(crate) fn enumerate(space: &Space, visit: impl FnMut(Leaf<'_>)) -> Result<u64> {
    let inst = space.inst;
    let mut e = Enumerator {
        space,
        cs: vec![0; inst.requests.len()],
        dep: inst
            .catalog
            .types
            .iter()
            .map(|t| vec![None; t.instances])
            .collect(),
        asg: inst
            .requests
            .iter()
            .map(|r| vec![(0, 0); r.chain.len()])
            .collect(),
        key: Vec::new(),
        leaves: 0,
        visit,
    };
    e.run(0)?;
    Ok(e.leaves)
}
