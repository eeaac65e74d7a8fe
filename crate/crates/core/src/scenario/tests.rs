use super::*;
use crate::model::{check_feasibility, validate_instance};
use crate::solver::derive_routes;

fn reduced(id: u8) -> ScenarioSpec {
    ScenarioSpec::scenario(id, Scale::Reduced, DEFAULT_SEED).unwrap()
}

#[test]
fn scenario_counts() {
    let full: Vec<_> = (1..=3)
        .map(|id| ScenarioSpec::scenario(id, Scale::Full, 1).unwrap())
        .collect();
    assert_eq!(
        full.iter()
            .map(|s| (s.existing_requests, s.new_requests))
            .collect::<Vec<_>>(),
        [(2, 4), (3, 3), (4, 2)]
    );
    assert!(full
        .iter()
        .all(|s| s.n_servers == 6 && s.n_user_groups == 6));
    let small: Vec<_> = (1..=3).map(reduced).collect();
    assert_eq!(
        small
            .iter()
            .map(|s| (s.existing_requests, s.new_requests))
            .collect::<Vec<_>>(),
        [(1, 3), (2, 2), (3, 1)]
    );
    assert!(ScenarioSpec::scenario(0, Scale::Full, 1).is_err());
    assert!(ScenarioSpec::scenario(4, Scale::Reduced, 1).is_err());
}

#[test]
fn generated_values_follow_parameters() {
    let spec = ScenarioSpec::new(11, 6, 6, 0, 6);
    let inst = generate(&spec).unwrap();
    assert!(validate_instance(&inst).is_empty());
    assert_eq!(inst.requests.len(), 6);
    let n = inst.n_nodes();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = inst.network.link_cost.get(i, j).as_micros();
            assert!((90_000..=115_000).contains(&c));
            let d = inst.network.link_delay.get(i, j);
            assert!((4_000..=50_000).contains(&d) && d.is_multiple_of(1000));
            assert_eq!(inst.network.bandwidth.get(i, j), 10);
        }
    }
    for req in &inst.requests {
        assert!((1..=3).contains(&req.chain.len()));
        assert!((1_800_000..=2_000_000).contains(&req.delay_budget));
        assert_eq!(req.candidates().count(), 3);
        assert_eq!(req.traffic, 1);
        assert!(req.current_route.is_none());
    }
    for (k, t) in inst.catalog.types.iter().enumerate() {
        assert_eq!(t.license_cost, Money::units(100));
        assert_eq!(t.resource_req, 2);
        assert!(t.processing_delay.iter().all(|&d| d == 20_000));
        let users = inst
            .requests
            .iter()
            .filter(|r| r.chain.contains(&k))
            .count();
        assert_eq!(t.instances, users.max(1));
        assert_eq!(
            t.migration_cost.get(0, 1),
            inst.network.link_cost.get(0, 1) * 44
        );
        assert_eq!(t.migration_cost.get(2, 2), Money::ZERO);
    }
    assert!(inst.network.server_capacity.iter().all(|&g| g == 8));
    assert!(inst
        .network
        .server_unit_cost
        .iter()
        .all(|&r| r == Money::units(5)));
    assert_eq!(inst.snapshot, Snapshot::empty(&inst.catalog, 6));
}

#[test]
fn generation_is_deterministic() {
    let spec = reduced(2);
    assert_eq!(
        generate(&spec).unwrap().to_json().unwrap(),
        generate(&spec).unwrap().to_json().unwrap()
    );
    let other = ScenarioSpec {
        seed: DEFAULT_SEED + 1,
        ..spec
    };
    assert_ne!(
        generate(&other).unwrap().network,
        generate(&reduced(2)).unwrap().network
    );
}

#[test]
fn bootstrap_marks_existing_requests_and_is_feasible() {
    let spec = ScenarioSpec::scenario(1, Scale::Full, DEFAULT_SEED).unwrap();
    let inst = generate(&spec).unwrap();
    assert_eq!(inst.requests.len(), 6);
    for (f, req) in inst.requests.iter().enumerate() {
        let existing = f < 2;
        assert_eq!(req.status == RequestStatus::Existing, existing);
        assert_eq!(
            req.current_route.as_ref().is_some_and(|r| !r.is_empty()),
            existing
        );
    }

    // Replaying the offline solve gives back the snapshot, and that plan
    // serves the existing requests on their own.
    let mut alone = draw(&spec);
    alone.requests.truncate(2);
    let offline = crate::solver::solve_exact(&alone, &SolveOptions::default())
        .unwrap()
        .plan
        .unwrap();
    assert_eq!(offline.deployment, inst.snapshot.deployed);
    for f in 0..2 {
        assert_eq!(
            Some(&offline.routes[f]),
            inst.requests[f].current_route.as_ref()
        );
    }
    assert_eq!(
        derive_routes(&alone, &offline.content_server, &offline.assignment),
        offline.routes
    );
    let report = check_feasibility(&alone, &offline).unwrap();
    assert!(report.is_feasible(), "{:?}", report.violations);
}

#[test]
fn zero_existing_means_empty_snapshot() {
    let inst = generate(&ScenarioSpec::new(5, 4, 4, 0, 1)).unwrap();
    assert_eq!(inst.requests.len(), 1);
    assert_eq!(inst.requests[0].status, RequestStatus::New);
    assert!(inst.snapshot.deployed.iter().all(|g| g.count_ones() == 0));
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(matches!(
        generate(&ScenarioSpec::new(1, 4, 4, 0, 0)),
        Err(Error::Scenario(_))
    ));
    assert!(matches!(
        generate(&ScenarioSpec::new(1, 0, 4, 1, 0)),
        Err(Error::Scenario(_))
    ));
    let mut spec = ScenarioSpec::new(1, 4, 4, 1, 1);
    spec.params.chain_max = 4;
    assert!(matches!(generate(&spec), Err(Error::Scenario(_))));
}

#[test]
fn unservable_existing_requests_fail_bootstrap() {
    let mut spec = ScenarioSpec::new(1, 4, 4, 1, 1);
    spec.params.delay_budget_min_ms = 1;
    spec.params.delay_budget_max_ms = 1;
    assert!(matches!(generate(&spec), Err(Error::BootstrapInfeasible)));
}

#[test]
fn small_instances_are_valid_and_varied() {
    let mut with_snapshot = 0;
    let mut existing = 0;
    for seed in 0..100 {
        let inst = small_instance(seed);
        assert!(
            validate_instance(&inst).is_empty(),
            "seed {seed}: {:?}",
            validate_instance(&inst)
        );
        assert!((2..=3).contains(&inst.n_servers()));
        assert!((1..=2).contains(&inst.requests.len()));
        assert!((1..=2).contains(&inst.n_types()));
        with_snapshot += inst.snapshot.deployed.iter().any(|g| g.count_ones() > 0) as usize;
        existing += inst
            .requests
            .iter()
            .any(|r| r.status == RequestStatus::Existing) as usize;
    }
    assert!(with_snapshot > 20 && existing > 20);
}

#[test]
fn comparison_on_reduced_scenario() {
    let report = run_comparison(&reduced(1), &SolveOptions::default()).unwrap();
    let (a, b) = (
        report.online.total().unwrap(),
        report.no_reuse.total().unwrap(),
    );
    assert!(a <= b);
    assert_eq!(report.gap, Some(b - a));
    assert_eq!(report.online.delays.len(), 4);
    let inst = generate(&reduced(1)).unwrap();
    for case in [&report.online, &report.no_reuse] {
        assert_eq!(case.status, SolveStatus::Optimal);
        for (f, d) in case.delays.iter().enumerate() {
            assert!(*d <= inst.requests[f].delay_budget);
        }
    }
    assert!(
        report.no_reuse.breakdown.unwrap().instantiation
            >= report.online.breakdown.unwrap().instantiation
    );
}

#[test]
fn csv_report_is_stable() {
    let reports = vec![run_comparison(&reduced(3), &SolveOptions::default()).unwrap()];
    let csv = emit_report(&reports, ReportFormat::Csv, false).unwrap();
    assert_eq!(
        csv,
        emit_report(&reports, ReportFormat::Csv, false).unwrap()
    );
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    let online: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(online.len(), CSV_COLUMNS.len());
    assert_eq!(
        &online[..8],
        [REPORT_SCHEMA, "3", "7", "4", "3", "1", "online", "optimal"]
    );
    assert_eq!(online[8], reports[0].online.total().unwrap().to_decimal());
    assert_eq!(*online.last().unwrap(), "");
    assert!(lines[2].contains(",no_reuse,"));

    let timed = emit_report(&reports, ReportFormat::Csv, true).unwrap();
    assert!(!timed.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn json_report_has_schema_and_both_cases() {
    let reports = vec![run_comparison(&reduced(2), &SolveOptions::default()).unwrap()];
    let text = emit_report(&reports, ReportFormat::Json, false).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema"], REPORT_SCHEMA);
    let r = &doc["reports"][0];
    assert_eq!(r["online"]["case"], "online");
    assert_eq!(r["no_reuse"]["case"], "no_reuse");
    assert_eq!(r["online"]["stats"]["wall_time_ms"], 0);
    assert_eq!(
        text,
        emit_report(&reports, ReportFormat::Json, false).unwrap()
    );
}

#[test]
fn migration_columns_match_report() {
    let report = run_comparison(&reduced(3), &SolveOptions::default()).unwrap();
    let csv = emit_report(std::slice::from_ref(&report), ReportFormat::Csv, false).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(
        row[12],
        report.online.breakdown.unwrap().migration.to_decimal()
    );
    assert_eq!(row[13], report.online.migration_count.to_string());
}
