use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::costs::total_objective;
use crate::model::{check_feasibility, InstanceBuilder, Money};

fn tiny() -> ProblemInstance {
    InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .request(0, &[0], 1, 2_000_000, &[0, 1])
        .build()
}

fn chain_of_two() -> ProblemInstance {
    InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .vnf_type(Money::units(100), 10, 2, 2, 20_000)
        .request(0, &[1, 0], 1, 2_000_000, &[0, 1])
        .deploy(0, 0, 1)
        .build()
}

fn hand_plan(inst: &ProblemInstance) -> PlacementPlan {
    let mut plan = PlacementPlan::empty(inst);
    plan.content_server.set(0, 0, true);
    plan.deployment[0].set(0, 0, true);
    plan.assignment[0][0].set(0, 0, true);
    plan.routes[0].set(0, 0, true);
    plan.routes[0].set(0, 2, true);
    plan
}

#[test]
fn tiny_model_has_nineteen_variables() {
    let model = build_ilp(&tiny(), BuildOptions::default()).unwrap();
    let count =
        |pred: fn(&VarKind) -> bool| model.variables.iter().filter(|v| pred(&v.kind)).count();
    assert_eq!(count(|k| matches!(k, VarKind::ContentServer { .. })), 2);
    assert_eq!(count(|k| matches!(k, VarKind::Deployment { .. })), 2);
    assert_eq!(count(|k| matches!(k, VarKind::Assignment { .. })), 2);
    assert_eq!(count(|k| matches!(k, VarKind::Link { .. })), 5);
    assert_eq!(count(|k| matches!(k, VarKind::Migration { .. })), 4);
    assert_eq!(count(|k| matches!(k, VarKind::FirstHop { .. })), 4);
    assert_eq!(count(|k| matches!(k, VarKind::ChainHop { .. })), 0);
    assert_eq!(model.num_vars(), 19);
    let names: Vec<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(
        &names[..6],
        [
            "g_0_0",
            "g_0_1",
            "t_0_0_0",
            "t_0_0_1",
            "l_0_0_0_0",
            "l_0_1_0_0"
        ]
    );
    assert_eq!(
        &names[6..11],
        ["p_0_0_0", "p_0_0_1", "p_0_0_2", "p_0_1_1", "p_0_1_2"]
    );
}

#[test]
fn names_map_back_to_indices() {
    let model = build_ilp(&chain_of_two(), BuildOptions::default()).unwrap();
    for (idx, var) in model.variables.iter().enumerate() {
        assert_eq!(model.var(&var.name), Some(idx));
        assert_eq!(model.var_of(&var.kind), Some(idx));
    }
}

#[test]
fn chain_hops_only_for_consecutive_pairs() {
    let model = build_ilp(&chain_of_two(), BuildOptions::default()).unwrap();
    let q = model
        .variables
        .iter()
        .filter(|v| matches!(v.kind, VarKind::ChainHop { .. }))
        .count();
    // s, t in 2 servers; 2 instances of type 1 then 1 instance of type 0
    assert_eq!(q, (2 * 2 * 2));
}

#[test]
fn migration_rows_exist_once_per_index() {
    for inst in [tiny(), chain_of_two()] {
        let model = build_ilp(&inst, BuildOptions::default()).unwrap();
        for kind in [
            ConstraintKind::MigrationSource,
            ConstraintKind::MigrationTarget,
            ConstraintKind::MigrationLower,
        ] {
            let mut seen: Vec<&Vec<usize>> = model
                .rows
                .iter()
                .filter(|r| r.kind == kind)
                .map(|r| &r.index)
                .collect();
            let total = seen.len();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), total);
            let expected: usize = (0..inst.n_types()).map(|k| inst.vnf(k).instances * 4).sum();
            assert_eq!(total, expected);
        }
    }
}

#[test]
fn building_is_deterministic() {
    let a = build_ilp(&chain_of_two(), BuildOptions::default()).unwrap();
    let b = build_ilp(&chain_of_two(), BuildOptions::default()).unwrap();
    assert_eq!(a.variables, b.variables);
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.objective, b.objective);
    assert_eq!(export_mps(&a), export_mps(&b));
    assert_eq!(export_lp(&a), export_lp(&b));
}

#[test]
fn hand_plan_is_feasible_and_costs_agree() {
    let inst = tiny();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    let plan = hand_plan(&inst);
    assert!(check_feasibility(&inst, &plan).unwrap().is_feasible());
    let values = model.encode_plan(&plan).unwrap();
    let violated: Vec<String> = model.violated_rows(&values).map(Row::name).collect();
    assert!(violated.is_empty(), "{violated:?}");
    assert_eq!(model.objective_value(&values), 110_100_000);
    assert_eq!(
        total_objective(&inst, &plan).unwrap().total.as_micros(),
        110_100_000
    );
}

#[test]
fn snapshot_constant_cancels_unchanged_deployment() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .existing_request(0, &[0], 1, 2_000_000, &[0, 1])
        .deploy(0, 0, 0)
        .current_link(0, 0, 0)
        .current_link(0, 0, 2)
        .build();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    let values = model.encode_plan(&hand_plan(&inst)).unwrap();
    assert!(model.is_feasible(&values));
    assert_eq!(model.objective_value(&values), 0);
}

#[test]
fn no_reuse_rows_only_for_new_requests() {
    let inst = chain_of_two();
    let plain = build_ilp(&inst, BuildOptions::default()).unwrap();
    let strict = build_ilp(&inst, BuildOptions { no_reuse: true }).unwrap();
    assert!(!plain.rows.iter().any(|r| r.kind == ConstraintKind::NoReuse));
    let rows: Vec<String> = strict
        .rows
        .iter()
        .filter(|r| r.kind == ConstraintKind::NoReuse)
        .map(Row::name)
        .collect();
    assert_eq!(rows, ["no_reuse_0_0_0_0", "no_reuse_0_1_0_0"]);
}

#[test]
fn empty_model_exports_a_skeleton() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .build();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    assert_eq!(model.num_vars(), 0);
    let mps = export_mps(&model);
    for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
        assert!(
            mps.lines().any(|l| l.starts_with(section)),
            "{section} missing"
        );
    }
    assert!(!mps.contains("MARKER"));
    let lp = export_lp(&model);
    assert!(lp.contains("Minimize") && lp.ends_with("End\n"));
}

#[test]
fn mps_columns_follow_canonical_order() {
    let model = build_ilp(&tiny(), BuildOptions::default()).unwrap();
    let mps = export_mps(&model);
    let mut in_columns = false;
    let mut order: Vec<&str> = Vec::new();
    for line in mps.lines() {
        match line {
            "COLUMNS" => in_columns = true,
            "RHS" => break,
            _ if in_columns && !line.contains("'MARKER'") => {
                let name = line.split_whitespace().next().unwrap();
                if order.last() != Some(&name) {
                    order.push(name);
                }
            }
            _ => {}
        }
    }
    let canonical: Vec<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(order, canonical);
    assert_eq!(mps.lines().filter(|l| l.starts_with(" BV ")).count(), 19);
}

#[test]
fn lp_objective_carries_constant() {
    let inst = InstanceBuilder::new(2, 1)
        .vnf_type(Money::units(100), 10, 2, 1, 20_000)
        .existing_request(0, &[0], 1, 2_000_000, &[0, 1])
        .deploy(0, 0, 0)
        .build();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    assert_eq!(model.constant, -110_000_000);
    let lp = export_lp(&model);
    let objective = lp.lines().find(|l| l.starts_with(" obj:")).unwrap();
    assert!(
        objective.starts_with(" obj: 110 t_0_0_0 + 110 t_0_0_1"),
        "{objective}"
    );
    assert!(lp.lines().any(|l| l.trim_end().ends_with("- 110")));
    assert!(export_mps(&model)
        .lines()
        .any(|l| l.starts_with("    RHS") && l.contains("obj") && l.ends_with(" 110")));
}

fn named(model: &IlpModel, values: &[u8]) -> BTreeMap<String, u8> {
    model
        .variables
        .iter()
        .zip(values)
        .map(|(v, &x)| (v.name.clone(), x))
        .collect()
}

#[test]
fn import_round_trips_plans() {
    let inst = tiny();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    let plan = hand_plan(&inst);
    let values = named(&model, &model.encode_plan(&plan).unwrap());
    assert_eq!(import_solution(&model, &values).unwrap(), plan);

    let core: BTreeMap<String, u8> = values
        .iter()
        .filter(|(n, _)| !n.starts_with(['x', 'm', 'q']))
        .map(|(n, &v)| (n.clone(), v))
        .collect();
    assert_eq!(import_solution(&model, &core).unwrap(), plan);
}

#[test]
fn inconsistent_auxiliary_is_rejected() {
    let inst = tiny();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    let mut values = named(&model, &model.encode_plan(&hand_plan(&inst)).unwrap());
    *values.get_mut("x_0_0_0_0").unwrap() = 1;
    assert!(matches!(
        import_solution(&model, &values),
        Err(Error::AuxiliaryInconsistent(_))
    ));
}

#[test]
fn missing_structural_variable_is_rejected() {
    let inst = tiny();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    let mut values = named(&model, &vec![0; model.num_vars()]);
    values.remove("p_0_0_2");
    assert!(
        matches!(import_solution(&model, &values), Err(Error::MissingVariable(n)) if n == "p_0_0_2")
    );
}

#[test]
fn all_zero_import_fails_feasibility_only() {
    let inst = tiny();
    let model = build_ilp(&inst, BuildOptions::default()).unwrap();
    let plan = import_solution(&model, &named(&model, &vec![0; model.num_vars()])).unwrap();
    let report = check_feasibility(&inst, &plan).unwrap();
    assert!(report.contains(ConstraintKind::ContentServer, &[0]));
}

#[test]
fn solution_text_forms() {
    let lines =
        parse_solution("# comment\ng_0_0=1\ng_0_1 = 0.0000001\nt_0_0_0 0.9999999\n").unwrap();
    assert_eq!(lines.get("g_0_0"), Some(&1));
    assert_eq!(lines.get("g_0_1"), Some(&0));
    assert_eq!(lines.get("t_0_0_0"), Some(&1));
    let json = parse_solution(r#"{"g_0_0": 1, "g_0_1": false}"#).unwrap();
    assert_eq!(json.get("g_0_0"), Some(&1));
    assert_eq!(json.get("g_0_1"), Some(&0));
    assert!(matches!(
        parse_solution("g_0_0=0.5"),
        Err(Error::NonBinaryValue { .. })
    ));
    assert!(matches!(parse_solution("g_0_0"), Err(Error::Parse(_))));
}

proptest! {
    #[test]
    fn product_rows_hold_iff_auxiliary_is_product(bits in proptest::collection::vec(any::<bool>(), 64)) {
        let inst = chain_of_two();
        let model = build_ilp(&inst, BuildOptions::default()).unwrap();
        let values: Vec<u8> = (0..model.num_vars()).map(|v| u8::from(bits[v % bits.len()])).collect();
        let tau0 = |k: usize, i: usize, s: usize| u8::from(inst.snapshot.deployed[k].get(i, s));
        for (idx, var) in model.variables.iter().enumerate() {
            let (family, product): (&[ConstraintKind], u8) = match var.kind {
                VarKind::Migration { vnf_type, instance, from, to } => {
                    let t = model.var_of(&VarKind::Deployment { vnf_type, instance, server: to }).unwrap();
                    (&[ConstraintKind::MigrationSource, ConstraintKind::MigrationTarget, ConstraintKind::MigrationLower],
                     tau0(vnf_type, instance, from) * values[t])
                }
                _ => continue,
            };
            let rows_ok = model.rows.iter()
                .filter(|r| family.contains(&r.kind) && r.terms.iter().any(|&(v, _)| v == idx))
                .all(|r| r.is_satisfied(&values));
            prop_assert_eq!(rows_ok, values[idx] == product);
        }
    }
}
