//! CPLEX-style LP text export.
//!
//! The emitted model has `Minimize` / `Subject To` / `Bounds` / `Generals` /
//! `End` sections, names every variable through [`VarIndexMap::column_name`]
//! (subscripts 1-based), and keeps a fixed term order, so identical problems
//! export byte-identical text. The format is the plain subset understood by
//! CPLEX, Gurobi, SCIP, and lp_solve readers, which makes the file a handy
//! vehicle for cross-checking against an external solver.

use super::{IlpProblem, RowSense, VarIndexMap};
use std::fmt::Write;

const TERMS_PER_LINE: usize = 6;

/// Renders a problem as LP-format text.
pub fn export_lp_text(problem: &IlpProblem, map: &VarIndexMap) -> String {
    let names: Vec<String> = (0..problem.num_columns()).map(|c| map.column_name(c)).collect();
    let mut out = String::new();

    out.push_str("\\ multi-modal fleet assignment\n");
    out.push_str("Minimize\n");
    let obj_terms: Vec<(usize, f64)> = problem
        .columns
        .iter()
        .enumerate()
        .filter(|(_, col)| col.objective != 0.0)
        .map(|(idx, col)| (idx, col.objective))
        .collect();
    write_expression(&mut out, "obj", &obj_terms, &names);

    out.push_str("Subject To\n");
    for row in &problem.rows {
        write_expression(&mut out, &row.name, &row.coeffs, &names);
        let sense = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        // The relation goes on the final expression line.
        out.pop();
        let _ = writeln!(out, " {} {}", sense, fmt_num(row.rhs));
    }

    out.push_str("Bounds\n");
    for (idx, col) in problem.columns.iter().enumerate() {
        if col.lower == col.upper {
            let _ = writeln!(out, " {} = {}", names[idx], fmt_num(col.lower));
        } else if col.upper.is_finite() {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_num(col.lower),
                names[idx],
                fmt_num(col.upper)
            );
        } else {
            let _ = writeln!(out, " {} >= {}", names[idx], fmt_num(col.lower));
        }
    }

    let generals: Vec<&str> = problem
        .columns
        .iter()
        .enumerate()
        .filter(|(_, col)| col.integer)
        .map(|(idx, _)| names[idx].as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for chunk in generals.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }

    out.push_str("End\n");
    out
}

/// Writes `label: c1 v1 + c2 v2 ...` wrapped over continuation lines.
/// An empty term list degenerates to `0 <first variable>` so the line stays
/// parseable.
fn write_expression(out: &mut String, label: &str, terms: &[(usize, f64)], names: &[String]) {
    let _ = write!(out, " {label}:");
    if terms.is_empty() {
        let _ = write!(out, " 0 {}", names.first().map(String::as_str).unwrap_or("none"));
    }
    for (pos, &(col, coeff)) in terms.iter().enumerate() {
        if pos > 0 && pos % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if coeff < 0.0 { "-" } else if pos == 0 { "" } else { "+" };
        let magnitude = coeff.abs();
        if sign.is_empty() {
            let _ = write!(out, " ");
        } else {
            let _ = write!(out, " {sign} ");
        }
        if magnitude == 1.0 {
            let _ = write!(out, "{}", names[col]);
        } else {
            let _ = write!(out, "{} {}", fmt_num(magnitude), names[col]);
        }
    }
    out.push('\n');
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ilp::build_ilp;
    use crate::model::Variant;
    use crate::tensor::Tensor4;

    #[test]
    fn demand_row_of_the_single_route_model() {
        let inst = fixtures::single_route();
        let (problem, map) = build_ilp(&inst, Variant::Base).unwrap();
        let text = export_lp_text(&problem, &map);
        assert!(text.contains(" demand_1_1: x_1_1_1_1 + xr_1_1_1_1 >= 1\n"), "{text}");
    }

    #[test]
    fn zero_demand_rows_have_zero_rhs() {
        let mut inst = fixtures::single_route();
        inst.demand = Tensor4::filled(inst.dims.route_shape(), 0);
        let (problem, map) = build_ilp(&inst, Variant::Base).unwrap();
        let text = export_lp_text(&problem, &map);
        assert!(text.contains(" demand_1_1: x_1_1_1_1 + xr_1_1_1_1 >= 0\n"), "{text}");
    }

    #[test]
    fn emission_row_multiplies_factor_by_distance() {
        let inst = fixtures::single_route().with_emission_cap(Some(80.0));
        let (problem, map) = build_ilp(&inst, Variant::Enhanced).unwrap();
        let text = export_lp_text(&problem, &map);
        assert!(
            text.contains(" emission_cap: 100 x_1_1_1_1 + 70 xr_1_1_1_1 <= 80\n"),
            "{text}"
        );
    }

    #[test]
    fn export_is_deterministic() {
        let inst = fixtures::single_route();
        let (problem, map) = build_ilp(&inst, Variant::Base).unwrap();
        assert_eq!(export_lp_text(&problem, &map), export_lp_text(&problem, &map));
    }

    /// A minimal reader for the emitted subset: enough to confirm the text
    /// round-trips to the same rows, bounds, and objective.
    mod reparse {
        use std::collections::HashMap;

        #[derive(Debug, Default, PartialEq)]
        pub struct Parsed {
            pub objective: HashMap<String, f64>,
            pub rows: Vec<(String, HashMap<String, f64>, String, f64)>,
            pub bounds: HashMap<String, (f64, f64)>,
            pub generals: Vec<String>,
        }

        fn parse_terms(expr: &str) -> HashMap<String, f64> {
            let mut terms = HashMap::new();
            let tokens: Vec<&str> = expr.split_whitespace().collect();
            let mut sign = 1.0;
            let mut coeff: Option<f64> = None;
            for tok in tokens {
                match tok {
                    "+" => sign = 1.0,
                    "-" => sign = -1.0,
                    _ => {
                        if let Ok(v) = tok.parse::<f64>() {
                            coeff = Some(v);
                        } else {
                            let c = sign * coeff.take().unwrap_or(1.0);
                            *terms.entry(tok.to_string()).or_insert(0.0) += c;
                            sign = 1.0;
                        }
                    }
                }
            }
            terms
        }

        pub fn parse(text: &str) -> Parsed {
            let mut parsed = Parsed::default();
            let mut section = "";
            let mut pending = String::new();
            let mut flush = |parsed: &mut Parsed, pending: &str, section: &str| {
                if pending.trim().is_empty() {
                    return;
                }
                let (label, body) = pending.split_once(':').expect("labelled expression");
                for relation in ["<=", ">=", "="] {
                    if let Some((lhs, rhs)) = body.rsplit_once(relation) {
                        // Guard against splitting "<=" on the "=" branch.
                        if relation == "=" && (lhs.ends_with('<') || lhs.ends_with('>')) {
                            continue;
                        }
                        let rhs: f64 = rhs.trim().parse().unwrap();
                        if label.trim() == "obj" {
                            unreachable!("objective has no relation");
                        }
                        parsed.rows.push((
                            label.trim().to_string(),
                            parse_terms(lhs),
                            relation.to_string(),
                            rhs,
                        ));
                        return;
                    }
                }
                assert_eq!(section, "objective");
                parsed.objective = parse_terms(body);
            };
            for line in text.lines() {
                let trimmed = line.trim();
                if trimmed.starts_with('\\') || trimmed == "End" {
                    continue;
                }
                match trimmed {
                    "Minimize" => {
                        section = "objective";
                        continue;
                    }
                    "Subject To" => {
                        flush(&mut parsed, &pending, section);
                        pending.clear();
                        section = "rows";
                        continue;
                    }
                    "Bounds" => {
                        flush(&mut parsed, &pending, section);
                        pending.clear();
                        section = "bounds";
                        continue;
                    }
                    "Generals" => {
                        section = "generals";
                        continue;
                    }
                    _ => {}
                }
                match section {
                    "objective" => pending.push_str(&format!(" {trimmed}")),
                    "rows" => {
                        if trimmed.contains(':') {
                            flush(&mut parsed, &pending, section);
                            pending.clear();
                        }
                        pending.push_str(&format!(" {trimmed}"));
                    }
                    "bounds" => {
                        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
                        match tokens.as_slice() {
                            [lo, "<=", name, "<=", hi] => {
                                parsed.bounds.insert(
                                    name.to_string(),
                                    (lo.parse().unwrap(), hi.parse().unwrap()),
                                );
                            }
                            [name, ">=", lo] => {
                                parsed
                                    .bounds
                                    .insert(name.to_string(), (lo.parse().unwrap(), f64::INFINITY));
                            }
                            [name, "=", v] => {
                                let v: f64 = v.parse().unwrap();
                                parsed.bounds.insert(name.to_string(), (v, v));
                            }
                            _ => panic!("unexpected bounds line: {trimmed}"),
                        }
                    }
                    "generals" => {
                        parsed.generals.extend(trimmed.split_whitespace().map(String::from));
                    }
                    _ => panic!("content outside any section: {trimmed}"),
                }
            }
            flush(&mut parsed, &pending, section);
            parsed
        }
    }

    #[test]
    fn reparsing_reproduces_the_model() {
        let inst = fixtures::single_route().with_emission_cap(Some(80.0));
        let (problem, map) = build_ilp(&inst, Variant::Enhanced).unwrap();
        let text = export_lp_text(&problem, &map);
        let parsed = reparse::parse(&text);

        assert_eq!(parsed.rows.len(), problem.num_rows());
        for (row, (name, terms, relation, rhs)) in problem.rows.iter().zip(&parsed.rows) {
            assert_eq!(&row.name, name);
            assert_eq!(*rhs, row.rhs);
            let expected = match row.sense {
                super::RowSense::Le => "<=",
                super::RowSense::Ge => ">=",
                super::RowSense::Eq => "=",
            };
            assert_eq!(relation, expected);
            assert_eq!(terms.len(), row.coeffs.len());
            for &(col, coeff) in &row.coeffs {
                assert_eq!(terms[&map.column_name(col)], coeff);
            }
        }
        for (idx, col) in problem.columns.iter().enumerate() {
            let name = map.column_name(idx);
            if col.objective != 0.0 {
                assert_eq!(parsed.objective[&name], col.objective);
            }
            assert_eq!(parsed.bounds[&name], (col.lower, col.upper));
            assert_eq!(parsed.generals.contains(&name), col.integer);
        }
    }
}
