//! MPS and LP writers.
//!
//! Objective coefficients are written in money units, i.e. the internal
//! micro-money integers divided by [`OBJECTIVE_SCALE`], as exact decimals.
//! Constraint coefficients are integers and written as such.
//!
//! MPS: names of at most 8 characters use the classic fixed columns; longer
//! names widen every field uniformly, which is what free-format MPS readers
//! expect. The objective row is `obj`. Its constant is carried as an RHS entry
//! on `obj` holding the negated constant, so `objective = c.x - rhs(obj)`.

use std::fmt::Write as _;

use super::{IlpModel, Sense};

/// Micro-money per exported objective unit.
pub const OBJECTIVE_SCALE: i64 = 1_000_000;

const OBJ_ROW: &str = "obj";

/// Exact decimal of `value / OBJECTIVE_SCALE` with trailing zeros dropped.
fn scaled(value: i64) -> String {
    let sign = if value < 0 { "-" } else { "" };
    let abs = value.unsigned_abs();
    let scale = OBJECTIVE_SCALE as u64;
    let (int, frac) = (abs / scale, abs % scale);
    if frac == 0 {
        return format!("{sign}{int}");
    }
    let digits = format!("{frac:06}");
    format!("{sign}{int}.{}", digits.trim_end_matches('0'))
}

fn sense_code(sense: Sense) -> &'static str {
    match sense {
        Sense::Le => "L",
        Sense::Ge => "G",
        Sense::Eq => "E",
    }
}

/// Column-major nonzeros: per variable, `(row name, coefficient)` with the objective first.
fn columns(model: &IlpModel) -> Vec<Vec<(String, String)>> {
    let mut cols: Vec<Vec<(String, String)>> = vec![Vec::new(); model.num_vars()];
    for &(v, c) in &model.objective {
        cols[v].push((OBJ_ROW.to_string(), scaled(c)));
    }
    for row in &model.rows {
        let name = row.name();
        for &(v, c) in &row.terms {
            if c != 0 {
                cols[v].push((name.clone(), c.to_string()));
            }
        }
    }
    cols
}

/// Fixed-format MPS text of `model`. Deterministic.
pub fn export_mps(model: &IlpModel) -> String {
    let row_names: Vec<String> = model.rows.iter().map(|r| r.name()).collect();
    let wn = model
        .variables
        .iter()
        .map(|v| v.name.len())
        .max()
        .unwrap_or(0)
        .max(8);
    let wr = row_names.iter().map(String::len).max().unwrap_or(0).max(8);
    let w = wn.max(wr);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "* binary program, {} variables, {} rows",
        model.num_vars(),
        model.rows.len()
    );
    let _ = writeln!(out, "* objective unit: {OBJECTIVE_SCALE} micro-money");
    let _ = writeln!(
        out,
        "* objective constant {} carried as the negated RHS of row {OBJ_ROW}",
        scaled(model.constant)
    );
    out.push_str("NAME          CHAINPLACE\n");
    out.push_str("OBJSENSE\n    MIN\n");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for (row, name) in model.rows.iter().zip(&row_names) {
        let _ = writeln!(out, " {}  {name}", sense_code(row.sense));
    }

    out.push_str("COLUMNS\n");
    let field = |out: &mut String, name: &str, row: &str, value: &str| {
        let _ = writeln!(out, "    {name:<w$}  {row:<w$}  {value:>12}");
    };
    if model.num_vars() > 0 {
        let _ = writeln!(
            out,
            "    {:<w$}  {:<w$}  {:>12}",
            "MARKER", "'MARKER'", "'INTORG'"
        );
    }
    for (var, entries) in model.variables.iter().zip(columns(model)) {
        if entries.is_empty() {
            field(&mut out, &var.name, OBJ_ROW, "0");
        }
        for (row, value) in entries {
            field(&mut out, &var.name, &row, &value);
        }
    }
    if model.num_vars() > 0 {
        let _ = writeln!(
            out,
            "    {:<w$}  {:<w$}  {:>12}",
            "MARKER", "'MARKER'", "'INTEND'"
        );
    }

    out.push_str("RHS\n");
    if model.constant != 0 {
        field(&mut out, "RHS", OBJ_ROW, &scaled(-model.constant));
    }
    for (row, name) in model.rows.iter().zip(&row_names) {
        if row.rhs != 0 {
            field(&mut out, "RHS", name, &row.rhs.to_string());
        }
    }

    out.push_str("BOUNDS\n");
    for var in &model.variables {
        let _ = writeln!(out, " BV BND       {:<w$}", var.name);
    }
    out.push_str("ENDATA\n");
    out
}

fn write_terms<'a>(out: &mut String, terms: impl Iterator<Item = (&'a str, String)>) -> bool {
    let mut any = false;
    for (n, (name, coef)) in terms.enumerate() {
        if n > 0 && n % 8 == 0 {
            out.push_str("\n   ");
        }
        match coef.strip_prefix('-') {
            Some(abs) => {
                let _ = write!(out, " - {abs} {name}");
            }
            None if n == 0 => {
                let _ = write!(out, " {coef} {name}");
            }
            None => {
                let _ = write!(out, " + {coef} {name}");
            }
        }
        any = true;
    }
    any
}

/// LP-format text of `model`. Deterministic.
pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ binary program, {} variables, {} rows",
        model.num_vars(),
        model.rows.len()
    );
    let _ = writeln!(out, "\\ objective unit: {OBJECTIVE_SCALE} micro-money");
    out.push_str("Minimize\n");
    let _ = write!(out, " {OBJ_ROW}:");
    let var_name = |v: usize| model.variables[v].name.as_str();
    let any = write_terms(
        &mut out,
        model
            .objective
            .iter()
            .map(|&(v, c)| (var_name(v), scaled(c))),
    );
    match (any, model.constant) {
        (false, c) => {
            let _ = write!(out, " {}", scaled(c));
        }
        (true, 0) => {}
        (true, c) if c < 0 => {
            let _ = write!(out, " - {}", scaled(-c));
        }
        (true, c) => {
            let _ = write!(out, " + {}", scaled(c));
        }
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for row in &model.rows {
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let terms = row.terms.iter().filter(|&&(_, c)| c != 0);
        if terms.clone().next().is_none() {
            match model.variables.first() {
                Some(first) => {
                    let _ = writeln!(out, " {}: 0 {} {op} {}", row.name(), first.name, row.rhs);
                }
                None => {
                    let _ = writeln!(out, "\\ {}: 0 {op} {}", row.name(), row.rhs);
                }
            }
            continue;
        }
        let _ = write!(out, " {}:", row.name());
        write_terms(&mut out, terms.map(|&(v, c)| (var_name(v), c.to_string())));
        let _ = writeln!(out, " {op} {}", row.rhs);
    }

    out.push_str("Binary\n");
    for var in &model.variables {
        let _ = writeln!(out, " {}", var.name);
    }
    out.push_str("End\n");
    out
}
