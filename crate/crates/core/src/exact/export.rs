//! Plain-text export of the mixed-integer SDP for external solvers.
//!
//! Layout, one record per line, reals as `{:.16e}` so they round-trip:
//!
//! ```text
//! infoplan-misdp 1
//! areas <N>
//! state_dim <D>
//! budget <T>
//! q <k> <from> <to> <t>             binary, one per directed edge
//! u <i> <vertex> <lo> <hi>          integer order variable
//! alpha                             free continuous
//! objective maximize alpha
//! con <name> <le|eq|ge> <rhs> <m> (<var> <coef>) * m
//! lmi const                         F0, then D rows
//! lmi q<k>                          F_k, then D rows
//! end
//! ```
//!
//! The LMI reads `F0 + sum_k q_k F_k - alpha I >= 0`. `F0` is the prior
//! information plus all fixed-sensor information; `F_k` is the mobile
//! information of the area entered by edge `k` and is only written for edges
//! that enter an area.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::encoding::{MisdpEncoding, Sense, Var};
use crate::error::{Error, Result};
use crate::estimator::InfoObjective;

const MAGIC: &str = "infoplan-misdp 1";

fn var_name(v: Var) -> String {
    match v {
        Var::Q(k) => format!("q{k}"),
        Var::U(i) => format!("u{i}"),
        Var::Alpha => "alpha".into(),
    }
}

fn write_matrix(out: &mut String, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.16e}", m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Serialises the encoding and the information LMI of `objective`.
pub fn export_misdp(enc: &MisdpEncoding, objective: &InfoObjective) -> Result<String> {
    if objective.n_areas() != enc.n_areas {
        return Err(Error::Dimension(format!(
            "objective has {} areas, encoding has {}",
            objective.n_areas(),
            enc.n_areas
        )));
    }
    let dim = objective.dim();
    let n = dim / enc.n_areas;
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "areas {}", enc.n_areas).unwrap();
    writeln!(out, "state_dim {dim}").unwrap();
    writeln!(out, "budget {:.16e}", enc.budget).unwrap();
    for (k, e) in enc.q_edges.iter().enumerate() {
        writeln!(out, "q {k} {} {} {:.16e}", e.from, e.to, e.time).unwrap();
    }
    let (lo, hi) = enc.u_bounds;
    for i in 0..enc.n_areas {
        writeln!(out, "u {i} {} {lo:.16e} {hi:.16e}", i + 1).unwrap();
    }
    writeln!(out, "alpha").unwrap();
    writeln!(out, "objective maximize alpha").unwrap();
    for c in &enc.constraints {
        write!(out, "con {} {} {:.16e} {}", c.name, c.sense.as_str(), c.rhs, c.terms.len()).unwrap();
        for &(v, coef) in &c.terms {
            write!(out, " {} {coef:.16e}", var_name(v)).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "lmi const").unwrap();
    write_matrix(&mut out, objective.constant_part());
    for (k, e) in enc.q_edges.iter().enumerate() {
        if e.to == 0 || e.to > enc.n_areas {
            continue;
        }
        let a = e.to - 1;
        let mut f = DMatrix::zeros(dim, dim);
        f.view_mut((a * n, a * n), (n, n)).copy_from(objective.mobile_block(a));
        writeln!(out, "lmi q{k}").unwrap();
        write_matrix(&mut out, &f);
    }
    writeln!(out, "end").unwrap();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConstraint {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: Vec<(Var, f64)>,
}

/// Contents of an exported file.
#[derive(Debug, Clone, PartialEq)]
pub struct MisdpDocument {
    pub n_areas: usize,
    pub state_dim: usize,
    pub budget: f64,
    /// `(from, to, time)` per binary edge variable.
    pub q: Vec<(usize, usize, f64)>,
    /// `(vertex, lo, hi)` per order variable.
    pub u: Vec<(usize, f64, f64)>,
    pub constraints: Vec<ParsedConstraint>,
    pub lmi_constant: DMatrix<f64>,
    pub lmi_terms: Vec<(usize, DMatrix<f64>)>,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("misdp line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| bad(line, "missing field"))?;
    tok.parse().map_err(|_| bad(line, format!("cannot parse `{tok}`")))
}

fn parse_var(tok: &str, line: usize) -> Result<Var> {
    if tok == "alpha" {
        return Ok(Var::Alpha);
    }
    let (kind, idx) = tok.split_at(1);
    let idx = num(Some(idx), line)?;
    match kind {
        "q" => Ok(Var::Q(idx)),
        "u" => Ok(Var::U(idx)),
        _ => Err(bad(line, format!("unknown variable `{tok}`"))),
    }
}

pub fn parse_misdp(text: &str) -> Result<MisdpDocument> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(1, "missing header")),
    }
    let mut doc = MisdpDocument {
        n_areas: 0,
        state_dim: 0,
        budget: 0.0,
        q: Vec::new(),
        u: Vec::new(),
        constraints: Vec::new(),
        lmi_constant: DMatrix::zeros(0, 0),
        lmi_terms: Vec::new(),
    };
    let mut ended = false;
    while let Some((ln, line)) = lines.next() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("areas") => doc.n_areas = num(tok.next(), ln)?,
            Some("state_dim") => doc.state_dim = num(tok.next(), ln)?,
            Some("budget") => doc.budget = num(tok.next(), ln)?,
            Some("q") => {
                let k: usize = num(tok.next(), ln)?;
                if k != doc.q.len() {
                    return Err(bad(ln, "edge variables out of order"));
                }
                doc.q.push((num(tok.next(), ln)?, num(tok.next(), ln)?, num(tok.next(), ln)?));
            }
            Some("u") => {
                let _: usize = num(tok.next(), ln)?;
                doc.u.push((num(tok.next(), ln)?, num(tok.next(), ln)?, num(tok.next(), ln)?));
            }
            Some("alpha") | Some("objective") => {}
            Some("con") => {
                let name = tok.next().ok_or_else(|| bad(ln, "missing name"))?.to_string();
                let sense = match tok.next() {
                    Some("le") => Sense::Le,
                    Some("eq") => Sense::Eq,
                    Some("ge") => Sense::Ge,
                    other => return Err(bad(ln, format!("bad sense {other:?}"))),
                };
                let rhs = num(tok.next(), ln)?;
                let m: usize = num(tok.next(), ln)?;
                let mut terms = Vec::with_capacity(m);
                for _ in 0..m {
                    let v = parse_var(tok.next().ok_or_else(|| bad(ln, "missing term"))?, ln)?;
                    terms.push((v, num(tok.next(), ln)?));
                }
                doc.constraints.push(ParsedConstraint { name, sense, rhs, terms });
            }
            Some("lmi") => {
                let which = tok.next().ok_or_else(|| bad(ln, "missing matrix tag"))?;
                let d = doc.state_dim;
                let mut m = DMatrix::zeros(d, d);
                for r in 0..d {
                    let (rl, row) = lines.next().ok_or_else(|| bad(ln, "truncated matrix"))?;
                    let vals: Vec<f64> = row
                        .split_whitespace()
                        .map(|t| num(Some(t), rl))
                        .collect::<Result<_>>()?;
                    if vals.len() != d {
                        return Err(bad(rl, format!("expected {d} entries")));
                    }
                    for (c, v) in vals.into_iter().enumerate() {
                        m[(r, c)] = v;
                    }
                }
                if which == "const" {
                    doc.lmi_constant = m;
                } else {
                    match parse_var(which, ln)? {
                        Var::Q(k) => doc.lmi_terms.push((k, m)),
                        _ => return Err(bad(ln, "LMI terms must multiply an edge variable")),
                    }
                }
            }
            Some("end") => {
                ended = true;
                break;
            }
            Some(other) => return Err(bad(ln, format!("unknown record `{other}`"))),
            None => {}
        }
    }
    if !ended {
        return Err(Error::InvalidArgument("misdp file is missing `end`".into()));
    }
    Ok(doc)
}
