//! Reading external solver output back into a plan.
//!
//! Two text forms are accepted by [`parse_solution`]:
//!
//! * one `name=value` (or `name value`) pair per line, `#` starting a comment;
//! * a JSON object mapping names to numbers or booleans.
//!
//! Values within `1e-6` of 0 or 1 are rounded; anything else is rejected.

use std::collections::BTreeMap;

use super::{IlpModel, VarKind};
use crate::error::{Error, Result};
use crate::model::PlacementPlan;

const ROUNDING: f64 = 1e-6;

fn to_binary(name: &str, value: f64) -> Result<u8> {
    if value.abs() <= ROUNDING {
        Ok(0)
    } else if (value - 1.0).abs() <= ROUNDING {
        Ok(1)
    } else {
        Err(Error::NonBinaryValue {
            name: name.to_string(),
            value,
        })
    }
}

/// Parses a solution document into a name to 0/1 map.
pub fn parse_solution(text: &str) -> Result<BTreeMap<String, u8>> {
    let mut values = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let doc: BTreeMap<String, serde_json::Value> = serde_json::from_str(text)?;
        for (name, v) in doc {
            let x = match &v {
                serde_json::Value::Bool(b) => f64::from(u8::from(*b)),
                serde_json::Value::Number(n) => n.as_f64().unwrap_or(f64::NAN),
                other => {
                    return Err(Error::Parse(format!(
                        "value of {name} is not a number: {other}"
                    )))
                }
            };
            values.insert(name.clone(), to_binary(&name, x)?);
        }
        return Ok(values);
    }
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = match line.split_once('=') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => {
                let mut parts = line.split_whitespace();
                match (parts.next(), parts.next(), parts.next()) {
                    (Some(a), Some(b), None) => (a, b),
                    _ => {
                        return Err(Error::Parse(format!(
                            "line {}: expected `name=value`",
                            n + 1
                        )))
                    }
                }
            }
        };
        let x: f64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value {value:?}", n + 1)))?;
        values.insert(name.to_string(), to_binary(name, x)?);
    }
    Ok(values)
}

/// Rebuilds a plan from variable values.
///
/// Every content-server, deployment, assignment and link variable must be
/// present. Auxiliary values are optional; when present they must equal their
/// product definition. Names unknown to the model are ignored.
pub fn import_solution(model: &IlpModel, values: &BTreeMap<String, u8>) -> Result<PlacementPlan> {
    let inst = model.instance();
    let mut plan = PlacementPlan::empty(inst);
    for k in (0..inst.n_types()).filter(|&k| !inst.type_in_scope(k)) {
        plan.deployment[k] = inst.snapshot.deployed[k].clone();
    }

    let mut vector = vec![0u8; model.num_vars()];
    let mut present = vec![false; model.num_vars()];
    for (idx, var) in model.variables.iter().enumerate() {
        match values.get(&var.name) {
            Some(&v) => {
                vector[idx] = v;
                present[idx] = true;
            }
            None if var.kind.is_auxiliary() => {}
            None => return Err(Error::MissingVariable(var.name.clone())),
        }
        if !present[idx] || vector[idx] == 0 {
            continue;
        }
        match var.kind {
            VarKind::ContentServer { request, server } => {
                plan.content_server.set(request, server, true)
            }
            VarKind::Deployment {
                vnf_type,
                instance,
                server,
            } => plan.deployment[vnf_type].set(instance, server, true),
            VarKind::Assignment {
                request,
                server,
                vnf_type,
                instance,
            } => {
                let pos = inst.requests[request]
                    .position_of(vnf_type)
                    .expect("type in chain");
                plan.assignment[request][pos].set(server, instance, true);
            }
            VarKind::Link { request, a, b } => plan.routes[request].set(a, b, true),
            _ => {}
        }
    }

    let expected = model.encode_plan(&plan)?;
    for (idx, var) in model.variables.iter().enumerate() {
        if var.kind.is_auxiliary() && present[idx] && vector[idx] != expected[idx] {
            return Err(Error::AuxiliaryInconsistent(format!(
                "{} = {} but its product definition gives {}",
                var.name, vector[idx], expected[idx]
            )));
        }
    }
    Ok(plan)
}
