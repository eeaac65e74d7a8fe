use super::*;
use crate::ilp::{build_ilp, BuildOptions};
use crate::model::{
    check_feasibility, BinaryGrid, Formulation, InstanceBuilder, InstantiationCost, RequestStatus,
};
use crate::scenario::small_instance;

fn options() -> SolveOptions {
    SolveOptions {
        time_limit: 60.0,
        ..SolveOptions::default()
    }
}

fn tiny() -> ProblemInstance {
    InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .request(0, &[0], 1, 2_000_000, &[0, 1])
        .build()
}

fn unassigned(instance: &ProblemInstance) -> Vec<Vec<BinaryGrid>> {
    instance
        .requests
        .iter()
        .map(|r| {
            r.chain
                .iter()
                .map(|&k| BinaryGrid::new(instance.n_servers(), instance.vnf(k).instances))
                .collect()
        })
        .collect()
}

#[test]
fn co_located_chain_routes_are_self_links_and_user_link() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .request(0, &[0, 1], 1, 2_000_000, &[0, 1])
        .build();
    let mut cs = BinaryGrid::new(1, 2);
    cs.set(0, 1, true);
    let mut asg = unassigned(&inst);
    asg[0][0].set(1, 0, true);
    asg[0][1].set(1, 0, true);
    let routes = derive_routes(&inst, &cs, &asg);
    assert_eq!(routes[0].links().collect::<Vec<_>>(), [(1, 1), (1, 2)]);
}

#[test]
fn three_host_chain_routes() {
    let inst = InstanceBuilder::new(3, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .request(0, &[0, 1, 2], 1, 2_000_000, &[0])
        .build();
    let mut cs = BinaryGrid::new(1, 3);
    cs.set(0, 0, true);
    let mut asg = unassigned(&inst);
    for (pos, s) in [0, 1, 2].into_iter().enumerate() {
        asg[0][pos].set(s, 0, true);
    }
    let routes = derive_routes(&inst, &cs, &asg);
    assert_eq!(
        routes[0].links().collect::<Vec<_>>(),
        [(0, 0), (0, 1), (1, 2), (2, 3)]
    );
}

#[test]
fn derived_routes_skip_undetermined_hops() {
    let inst = tiny();
    let cs = BinaryGrid::new(1, 2);
    let mut asg = unassigned(&inst);
    asg[0][0].set(0, 0, true);
    let routes = derive_routes(&inst, &cs, &asg);
    assert_eq!(routes[0].links().collect::<Vec<_>>(), [(0, 2)]);
}

#[test]
fn tiny_optimum_and_tie_break() {
    let inst = tiny();
    let result = solve_exact(&inst, &options()).unwrap();
    assert_eq!(result.status, SolveStatus::Optimal);
    // License 100 + 2 units at 5 + one link at 0.1; both servers tie.
    assert_eq!(result.objective(), Some(Money(110_100_000)));
    let plan = result.plan.unwrap();
    assert_eq!(plan.content_server_of(0), Some(1));
    assert_eq!(plan.server_of(0, 0), Some(1));
    assert_eq!(plan.routes[0].links().collect::<Vec<_>>(), [(1, 1), (1, 2)]);
    assert_eq!(result.gap, Some(Money::ZERO));
}

#[test]
fn cheaper_route_wins_and_flips() {
    let build = |c0: i64, c1: i64| {
        InstanceBuilder::new(2, 1)
            .vnf_type(Money::units(100), 10, 2, 1, 20_000)
            .link(0, 2, Money(c0), 10_000)
            .link(1, 2, Money(c1), 10_000)
            .request(0, &[0], 1, 2_000_000, &[0, 1])
            .build()
    };
    let a = solve_exact(&build(90_000, 115_000), &options()).unwrap();
    assert_eq!(a.plan.as_ref().unwrap().content_server_of(0), Some(0));
    assert_eq!(a.objective(), Some(Money(110_090_000)));
    let b = solve_exact(&build(115_000, 90_000), &options()).unwrap();
    assert_eq!(b.plan.as_ref().unwrap().content_server_of(0), Some(1));
    assert_eq!(b.objective(), Some(Money(110_090_000)));
}

#[test]
fn optimal_snapshot_is_kept() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .link(0, 2, Money(90_000), 10_000)
        .link(1, 2, Money(115_000), 10_000)
        .existing_request(0, &[0], 1, 2_000_000, &[0, 1])
        .current_link(0, 0, 0)
        .current_link(0, 0, 2)
        .deploy(0, 0, 0)
        .build();
    let exact = solve_exact(&inst, &options()).unwrap();
    let brute = brute_force(&inst).unwrap();
    assert_eq!(exact.objective(), Some(Money::ZERO));
    assert_eq!(exact.plan, brute.plan);
    let plan = exact.plan.unwrap();
    assert_eq!(plan.deployment, inst.snapshot.deployed);
    assert_eq!(
        Some(&plan.routes[0]),
        inst.requests[0].current_route.as_ref()
    );
    assert_eq!(exact.delta.unwrap().counts().reused, 1);
}

#[test]
fn impossible_delay_budget_is_infeasible() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .request(0, &[0], 1, 10_000, &[0, 1])
        .build();
    let exact = solve_exact(&inst, &options()).unwrap();
    assert_eq!(exact.status, SolveStatus::Infeasible);
    assert!(exact.plan.is_none());
    assert_eq!(brute_force(&inst).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn empty_request_set_keeps_snapshot() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .deploy(0, 0, 1)
        .build();
    for result in [
        solve_exact(&inst, &options()).unwrap(),
        brute_force(&inst).unwrap(),
    ] {
        assert_eq!(result.objective(), Some(Money::ZERO));
        assert_eq!(result.plan.unwrap().deployment, inst.snapshot.deployed);
    }
}

#[test]
fn invalid_options_are_rejected() {
    let inst = tiny();
    for bad in [
        SolveOptions {
            time_limit: 0.0,
            ..options()
        },
        SolveOptions {
            time_limit: f64::NAN,
            ..options()
        },
        SolveOptions {
            workers: 0,
            ..options()
        },
    ] {
        assert!(matches!(
            solve_exact(&inst, &bad),
            Err(Error::InvalidOption(_))
        ));
    }
}

#[test]
fn brute_force_respects_cap() {
    let opts = BruteForceOptions {
        cap: 3,
        ..BruteForceOptions::default()
    };
    assert!(matches!(
        brute_force_with(&tiny(), &opts),
        Err(Error::TooLarge { .. })
    ));
}

#[test]
fn exact_matches_brute_force_on_small_instances() {
    let mut feasible = 0;
    for seed in 0..120 {
        let inst = small_instance(seed);
        for no_reuse in [false, true] {
            let exact = solve_exact(
                &inst,
                &SolveOptions {
                    no_reuse,
                    ..options()
                },
            )
            .unwrap();
            let brute = brute_force_with(
                &inst,
                &BruteForceOptions {
                    no_reuse,
                    ..BruteForceOptions::default()
                },
            )
            .unwrap();
            assert_eq!(exact.status, brute.status, "seed {seed}");
            assert_eq!(
                exact.objective(),
                brute.objective(),
                "seed {seed} no_reuse {no_reuse}"
            );
            assert_eq!(exact.plan, brute.plan, "seed {seed} no_reuse {no_reuse}");
            if let Some(plan) = &exact.plan {
                feasible += 1;
                assert!(check_feasibility_with(&inst, plan, no_reuse)
                    .unwrap()
                    .is_feasible());
                for (f, d) in exact.delays.iter().enumerate() {
                    assert!(*d <= inst.requests[f].delay_budget);
                }
            }
        }
    }
    assert!(feasible >= 60, "only {feasible} feasible cases");
}

#[test]
fn optimum_agrees_with_ilp() {
    for seed in 0..60 {
        let inst = small_instance(seed);
        for no_reuse in [false, true] {
            let result = solve_exact(
                &inst,
                &SolveOptions {
                    no_reuse,
                    ..options()
                },
            )
            .unwrap();
            let Some(plan) = &result.plan else { continue };
            let model = build_ilp(&inst, BuildOptions { no_reuse }).unwrap();
            let values = model.encode_plan(plan).unwrap();
            assert!(
                model.is_feasible(&values),
                "seed {seed}: {:?}",
                model.violated_rows(&values).next()
            );
            assert_eq!(
                Some(Money(model.objective_value(&values))),
                result.objective()
            );
        }
    }
}

#[test]
fn lower_bound_is_admissible() {
    for seed in 0..40 {
        let inst = small_instance(seed);
        let space = space::Space::new(&inst, false);
        let mut leaves: Vec<(Vec<u32>, i64)> = Vec::new();
        brute::enumerate(&space, |leaf| leaves.push((leaf.key.to_vec(), leaf.obj))).unwrap();
        let config = bnb::SearchConfig {
            workers: 1,
            deadline: None,
            exhaustive: true,
            trace: true,
        };
        let (outcome, trace) = bnb::search(&space, &config);
        let best = leaves.iter().map(|l| l.1).min();
        assert_eq!(outcome.best.map(|b| b.obj), best, "seed {seed}");
        if let (Some(root), Some(best)) = (outcome.root_bound, best) {
            assert!(root <= best);
        }
        for (prefix, lb) in trace.unwrap() {
            let completion = leaves
                .iter()
                .filter(|(k, _)| k.starts_with(&prefix))
                .map(|l| l.1)
                .min();
            if let Some(c) = completion {
                assert!(
                    lb <= c,
                    "seed {seed}: bound {lb} exceeds completion {c} at {prefix:?}"
                );
            }
        }
    }
}

#[test]
fn worker_count_does_not_change_result() {
    for seed in 0..30 {
        let inst = small_instance(seed);
        let one = solve_exact(&inst, &options()).unwrap();
        let four = solve_exact(
            &inst,
            &SolveOptions {
                workers: 4,
                ..options()
            },
        )
        .unwrap();
        assert_eq!(one.plan, four.plan, "seed {seed}");
        assert_eq!(one.breakdown, four.breakdown);
    }
}

#[test]
fn no_reuse_never_beats_online() {
    for seed in 0..60 {
        let inst = small_instance(seed);
        let online = solve_exact(&inst, &options()).unwrap();
        let fresh = solve_exact(
            &inst,
            &SolveOptions {
                no_reuse: true,
                ..options()
            },
        )
        .unwrap();
        match (online.objective(), fresh.objective()) {
            (Some(a), Some(b)) => assert!(a <= b, "seed {seed}"),
            (None, Some(_)) => panic!("seed {seed}: no-reuse feasible but online not"),
            _ => {}
        }
    }
}

fn one_spare_instance(instantiation: InstantiationCost) -> ProblemInstance {
    InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 2, 20_000)
        .request(0, &[0], 1, 2_000_000, &[0, 1])
        .deploy(0, 0, 0)
        .formulation(Formulation {
            instantiation,
            ..Formulation::default()
        })
        .build()
}

#[test]
fn no_reuse_keeps_new_requests_off_snapshot_instances() {
    let inst = one_spare_instance(InstantiationCost::Clamped);
    let online = solve_exact(&inst, &options()).unwrap();
    assert_eq!(
        online.plan.as_ref().unwrap().assigned(0, 0).map(|a| a.1),
        Some(0)
    );
    let fresh = solve_exact(
        &inst,
        &SolveOptions {
            no_reuse: true,
            ..options()
        },
    )
    .unwrap();
    let plan = fresh.plan.unwrap();
    assert_eq!(plan.assigned(0, 0).map(|a| a.1), Some(1));
    assert!(inst.requests[0].status == RequestStatus::New);
    assert!(fresh.breakdown.unwrap().total > online.breakdown.unwrap().total);
}

#[test]
fn time_limit_returns_incumbent_or_nothing() {
    let spec = crate::scenario::ScenarioSpec::new(3, 6, 6, 0, 6);
    let inst = crate::scenario::generate(&spec).unwrap();
    let result = solve_exact(
        &inst,
        &SolveOptions {
            time_limit: 1e-6,
            ..options()
        },
    )
    .unwrap();
    assert_eq!(result.status, SolveStatus::TimeLimit);
    if let Some(plan) = &result.plan {
        assert!(check_feasibility(&inst, plan).unwrap().is_feasible());
        assert!(result.gap.unwrap() >= Money::ZERO);
    }
}

#[test]
fn literal_refund_makes_no_reuse_free() {
    // Removing the idle snapshot instance refunds exactly what the fresh one costs.
    let inst = one_spare_instance(InstantiationCost::Literal);
    let online = solve_exact(&inst, &options()).unwrap();
    let fresh = solve_exact(
        &inst,
        &SolveOptions {
            no_reuse: true,
            ..options()
        },
    )
    .unwrap();
    assert_eq!(fresh.objective(), online.objective());
    assert_eq!(fresh.delta.unwrap().counts().removed, 1);
}
