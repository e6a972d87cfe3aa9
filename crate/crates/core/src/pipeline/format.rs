//! Line-oriented text form of a [`QueryCircuit`].
//!
//! ```text
//! # comment
//! LAYOUT anc:4 sys:2          # name:dim, name:dim*count or a bare dim
//! ORACLE FORWARD 0,1          # last target is B, the rest form Â
//! GATE H 1
//! GATE CSWAP 1,2 0            # targets, then an optional control qubit
//! GATE CUSTOM 1 | 0 0 1 0 1 0 0 0   # row-major (re im) pairs
//! ORACLE INVERSE 0,1
//! KEEP anc sys
//! ```

use std::fmt::Write as _;

use crate::circuits::{add1_gate, shift_gate, Gate, GateKind};
use crate::error::{Error, Result};
use crate::qcore::linalg::{c64, ComplexMatrix};
use crate::qcore::RegisterLayout;

use super::query::{OracleDirection, QueryCircuit, Step};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| err(line, format!("expected an integer, found {tok:?}")))
}

fn parse_list(tok: &str, line: usize) -> Result<Vec<usize>> {
    tok.split(',').map(|t| parse_usize(t.trim(), line)).collect()
}

fn parse_layout(tokens: &[&str], line: usize) -> Result<RegisterLayout> {
    let mut layout = RegisterLayout::new();
    for (k, tok) in tokens.iter().enumerate() {
        let (name, size) = match tok.split_once(':') {
            Some((n, s)) => (n.to_string(), s),
            None => (format!("r{k}"), *tok),
        };
        let (dim, count) = match size.split_once('*') {
            Some((d, c)) => (parse_usize(d, line)?, parse_usize(c, line)?),
            None => (parse_usize(size, line)?, 1),
        };
        layout.push(&name, dim, count).map_err(|e| err(line, e.to_string()))?;
    }
    if layout.num_subsystems() == 0 {
        return Err(err(line, "empty layout"));
    }
    Ok(layout)
}

fn parse_gate(tokens: &[&str], dims: &[usize], line: usize) -> Result<Gate> {
    let (head, matrix) = match tokens.iter().position(|t| *t == "|") {
        Some(p) => (&tokens[..p], Some(&tokens[p + 1..])),
        None => (tokens, None),
    };
    if head.len() < 2 || head.len() > 3 {
        return Err(err(line, "expected GATE <kind> <targets> [control]"));
    }
    let targets = parse_list(head[1], line)?;
    if let Some(&t) = targets.iter().find(|&&t| t >= dims.len()) {
        return Err(err(line, format!("target {t} outside {} subsystems", dims.len())));
    }
    let control = head.get(2).map(|c| parse_usize(c, line)).transpose()?;
    let local: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let arity = |n: usize| -> Result<()> {
        if targets.len() == n {
            Ok(())
        } else {
            Err(err(line, format!("{} takes {n} target(s)", head[0])))
        }
    };
    let gate = match head[0] {
        "H" => {
            arity(1)?;
            Gate::hadamard(targets[0])
        }
        "X" => {
            arity(1)?;
            Gate::x(targets[0], local[0])
        }
        "SWAP" | "CSWAP" => {
            arity(2)?;
            if head[0] == "CSWAP" && control.is_none() {
                return Err(err(line, "CSWAP needs a control"));
            }
            Gate::swap(targets[0], targets[1], local[0])
        }
        "SHIFT" => shift_gate(targets.len().max(1), local.first().copied().unwrap_or(1)).on(&targets),
        "ADD1" => add1_gate(targets.len().max(1)).on(&targets),
        "CUSTOM" => {
            let entries = matrix.ok_or_else(|| err(line, "CUSTOM needs `| re im ...`"))?;
            let n: usize = local.iter().product();
            if entries.len() != 2 * n * n {
                return Err(err(line, format!("CUSTOM on dimension {n} needs {} numbers", 2 * n * n)));
            }
            let vals: Vec<f64> = entries
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| err(line, format!("bad number {t:?}"))))
                .collect::<Result<_>>()?;
            let m = ComplexMatrix::from_row_iterator(n, n, vals.chunks(2).map(|p| c64(p[0], p[1])));
            Gate::custom(targets.clone(), local, m).map_err(|e| err(line, e.to_string()))?
        }
        other => return Err(err(line, format!("unknown gate {other:?}"))),
    };
    if matrix.is_some() && head[0] != "CUSTOM" {
        return Err(err(line, "matrix entries only follow CUSTOM"));
    }
    Ok(match control {
        Some(c) => gate.controlled_by(c),
        None => gate,
    })
}

pub fn parse_circuit(text: &str) -> Result<QueryCircuit> {
    let mut circuit: Option<QueryCircuit> = None;
    let mut kept = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if kept {
            return Err(err(line, "nothing may follow KEEP"));
        }
        match (tokens[0], circuit.as_mut()) {
            ("LAYOUT", None) => circuit = Some(QueryCircuit::new(parse_layout(&tokens[1..], line)?)),
            ("LAYOUT", Some(_)) => return Err(err(line, "duplicate LAYOUT")),
            (_, None) => return Err(err(line, "LAYOUT must come first")),
            ("GATE", Some(c)) => {
                let gate = parse_gate(&tokens[1..], &c.layout().dims(), line)?;
                c.push_gate(gate).map_err(|e| err(line, e.to_string()))?;
            }
            ("ORACLE", Some(c)) => {
                if tokens.len() != 3 {
                    return Err(err(line, "expected ORACLE FORWARD|INVERSE <targets>"));
                }
                let dir = match tokens[1] {
                    "FORWARD" => OracleDirection::Forward,
                    "INVERSE" => OracleDirection::Inverse,
                    other => return Err(err(line, format!("unknown direction {other:?}"))),
                };
                c.push_oracle(dir, parse_list(tokens[2], line)?).map_err(|e| err(line, e.to_string()))?;
            }
            ("KEEP", Some(c)) => {
                c.set_keep(&tokens[1..]).map_err(|e| err(line, e.to_string()))?;
                kept = true;
            }
            (other, Some(_)) => return Err(err(line, format!("unknown directive {other:?}"))),
        }
    }
    circuit.ok_or_else(|| err(0, "missing LAYOUT"))
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn write_circuit(c: &QueryCircuit) -> String {
    let mut out = String::from("LAYOUT");
    for r in c.layout().registers() {
        if r.count == 1 {
            let _ = write!(out, " {}:{}", r.name, r.dim);
        } else {
            let _ = write!(out, " {}:{}*{}", r.name, r.dim, r.count);
        }
    }
    out.push('\n');
    for step in c.steps() {
        match step {
            Step::Oracle { direction, targets } => {
                let dir = if *direction == OracleDirection::Forward { "FORWARD" } else { "INVERSE" };
                let _ = writeln!(out, "ORACLE {dir} {}", join(targets));
            }
            Step::Gate(g) => {
                let kind = match g.kind() {
                    GateKind::Hadamard => "H",
                    GateKind::X => "X",
                    GateKind::CSwap if g.control().is_some() => "CSWAP",
                    GateKind::CSwap => "SWAP",
                    GateKind::Shift => "SHIFT",
                    GateKind::Add1 => "ADD1",
                    GateKind::Custom(_) => "CUSTOM",
                };
                let _ = write!(out, "GATE {kind} {}", join(g.targets()));
                if let Some(ctl) = g.control() {
                    let _ = write!(out, " {ctl}");
                }
                if let GateKind::Custom(m) = g.kind() {
                    out.push_str(" |");
                    for i in 0..m.nrows() {
                        for j in 0..m.ncols() {
                            let _ = write!(out, " {:?} {:?}", m[(i, j)].re, m[(i, j)].im);
                        }
                    }
                }
                out.push('\n');
            }
        }
    }
    let _ = writeln!(out, "KEEP {}", c.keep().join(" "));
    out
}
