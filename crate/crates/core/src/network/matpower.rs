//! MATPOWER version 2 case files (`mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch`).

use std::fmt::Write as _;

use super::{Branch, BranchId, BranchKind, Bus, BusId, BusType, GenId, Generator, NetworkCase};
use crate::error::{Error, Result};

const BUS_COLS: usize = 13;
const GEN_COLS: usize = 10;
const BRANCH_COLS: usize = 11;

/// Parses MATPOWER case text. Out-of-service rows are kept with `in_service = false`.
pub fn parse_case(text: &str) -> Result<NetworkCase> {
    let name = text
        .lines()
        .map(strip_comment)
        .find_map(|line| {
            let rest = line.trim().strip_prefix("function")?;
            Some(rest.split('=').nth(1).unwrap_or(rest).trim().to_string())
        })
        .unwrap_or_else(|| "case".to_string());

    let base_mva = scalar(text, "baseMVA")?;
    let bus_rows = matrix(text, "bus", BUS_COLS)?;
    let gen_rows = matrix(text, "gen", GEN_COLS)?;
    let branch_rows = matrix(text, "branch", BRANCH_COLS)?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    for (row, v) in bus_rows.iter().enumerate() {
        let bus_type = match v[1] as i64 {
            1 => BusType::PQ,
            2 => BusType::PV,
            3 => BusType::Slack,
            other => {
                return Err(Error::Parse {
                    section: "bus".into(),
                    row: row + 1,
                    column: 2,
                    message: format!("unsupported bus type {other}"),
                })
            }
        };
        buses.push(Bus {
            id: BusId(integer(v[0], "bus", row, 1)?),
            bus_type,
            active_load: v[2],
            reactive_load: v[3],
            shunt_conductance: v[4],
            shunt_susceptance: v[5],
            v_init: v[7],
            angle_init: v[8],
            base_kv: v[9],
            v_max: v[11],
            v_min: v[12],
        });
    }

    let mut generators = Vec::with_capacity(gen_rows.len());
    for (row, v) in gen_rows.iter().enumerate() {
        generators.push(Generator {
            id: GenId::from_index(row),
            bus: BusId(integer(v[0], "gen", row, 1)?),
            p_set: v[1],
            q_set: v[2],
            q_max: v[3],
            q_min: v[4],
            v_set: v[5],
            in_service: v[7] > 0.0,
            p_max: v[8],
            p_min: v[9],
        });
    }

    let mut branches = Vec::with_capacity(branch_rows.len());
    for (row, v) in branch_rows.iter().enumerate() {
        let ratio = v[8];
        let shift = v[9];
        let kind = if ratio != 0.0 || shift != 0.0 {
            BranchKind::Transformer
        } else {
            BranchKind::Line
        };
        let from_bus = BusId(integer(v[0], "branch", row, 1)?);
        let to_bus = BusId(integer(v[1], "branch", row, 2)?);
        if from_bus == to_bus {
            return Err(Error::Parse {
                section: "branch".into(),
                row: row + 1,
                column: 2,
                message: format!("branch connects bus {from_bus} to itself"),
            });
        }
        branches.push(Branch {
            id: BranchId::from_index(row),
            from_bus,
            to_bus,
            r: v[2],
            x: v[3],
            charging_susceptance: v[4],
            rate_normal: v[5],
            rate_emergency: v[6],
            tap_ratio: if ratio == 0.0 { 1.0 } else { ratio },
            phase_shift: shift,
            in_service: v[10] != 0.0,
            kind,
        });
    }

    NetworkCase::new(name, base_mva, buses, branches, generators)
}

/// Writes a case back as MATPOWER text. Every modelled numeric field round-trips exactly.
pub fn serialize_case(case: &NetworkCase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "function mpc = {}", case.name());
    out.push_str("mpc.version = '2';\n");
    let _ = writeln!(out, "mpc.baseMVA = {};", case.base_mva());

    out.push_str("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n");
    out.push_str("mpc.bus = [\n");
    for b in case.buses() {
        let code = match b.bus_type {
            BusType::PQ => 1,
            BusType::PV => 2,
            BusType::Slack => 3,
        };
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t1\t{}\t{}\t{}\t1\t{}\t{};",
            b.id,
            code,
            b.active_load,
            b.reactive_load,
            b.shunt_conductance,
            b.shunt_susceptance,
            b.v_init,
            b.angle_init,
            b.base_kv,
            b.v_max,
            b.v_min
        );
    }
    out.push_str("];\n");

    out.push_str("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n");
    out.push_str("mpc.gen = [\n");
    for g in case.generators() {
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{};",
            g.bus,
            g.p_set,
            g.q_set,
            g.q_max,
            g.q_min,
            g.v_set,
            case.base_mva(),
            u8::from(g.in_service),
            g.p_max,
            g.p_min
        );
    }
    out.push_str("];\n");

    out.push_str("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n");
    out.push_str("mpc.branch = [\n");
    for br in case.branches() {
        let ratio = if br.kind == BranchKind::Line && br.tap_ratio == 1.0 {
            0.0
        } else {
            br.tap_ratio
        };
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t-360\t360;",
            br.from_bus,
            br.to_bus,
            br.r,
            br.x,
            br.charging_susceptance,
            br.rate_normal,
            br.rate_emergency,
            br.rate_emergency,
            ratio,
            br.phase_shift,
            u8::from(br.in_service)
        );
    }
    out.push_str("];\n");
    out
}

fn strip_comment(line: &str) -> &str {
    line.split('%').next().unwrap_or("")
}

/// Locates `mpc.<name>` followed by `=`; returns the text after the `=`.
fn assignment<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    let key = format!("mpc.{name}");
    let mut search = 0;
    while let Some(pos) = text[search..].find(&key) {
        let start = search + pos;
        let after = &text[start + key.len()..];
        let line_start = text[..start].rfind('\n').map_or(0, |p| p + 1);
        let commented = text[line_start..start].contains('%');
        let trimmed = after.trim_start_matches([' ', '\t']);
        if !commented {
            if let Some(rest) = trimmed.strip_prefix('=') {
                return Some(rest);
            }
        }
        search = start + key.len();
    }
    None
}

fn scalar(text: &str, name: &str) -> Result<f64> {
    let rest = assignment(text, name).ok_or_else(|| Error::Format(format!("missing mpc.{name}")))?;
    let value = rest.split([';', '\n']).next().unwrap_or("").trim();
    value
        .parse()
        .map_err(|_| Error::Format(format!("mpc.{name} is not a number: {value:?}")))
}

fn matrix(text: &str, name: &str, min_cols: usize) -> Result<Vec<Vec<f64>>> {
    let rest = assignment(text, name).ok_or_else(|| Error::Format(format!("missing mpc.{name}")))?;
    let rest = rest
        .trim_start()
        .strip_prefix('[')
        .ok_or_else(|| Error::Format(format!("mpc.{name} is not a matrix literal")))?;

    let mut rows = Vec::new();
    let mut closed = false;
    'lines: for line in rest.lines() {
        let mut line = strip_comment(line);
        if let Some(end) = line.find(']') {
            line = &line[..end];
            closed = true;
        }
        for segment in line.split(';') {
            let tokens: Vec<&str> = segment
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            if tokens.is_empty() {
                continue;
            }
            let row = rows.len();
            let mut values = Vec::with_capacity(tokens.len());
            for (col, token) in tokens.iter().enumerate() {
                let value: f64 = token.parse().map_err(|_| Error::Parse {
                    section: name.to_string(),
                    row: row + 1,
                    column: col + 1,
                    message: format!("not a number: {token:?}"),
                })?;
                values.push(value);
            }
            if values.len() < min_cols {
                return Err(Error::Parse {
                    section: name.to_string(),
                    row: row + 1,
                    column: values.len() + 1,
                    message: format!("expected at least {min_cols} columns, found {}", values.len()),
                });
            }
            rows.push(values);
        }
        if closed {
            break 'lines;
        }
    }
    if !closed {
        return Err(Error::Format(format!("mpc.{name} matrix is not closed")));
    }
    Ok(rows)
}

fn integer(value: f64, section: &str, row: usize, column: usize) -> Result<u32> {
    if value.fract() == 0.0 && value >= 0.0 && value <= f64::from(u32::MAX) {
        Ok(value as u32)
    } else {
        Err(Error::Parse {
            section: section.to_string(),
            row: row + 1,
            column,
            message: format!("expected a bus number, found {value}"),
        })
    }
}
