//! Text and CSV formats for graphs, constraints, data and solver results.
//!
//! Graph files start with `n <count>` and list edges as `d i j` (i -> j) or
//! `b i j` (i <-> j); `#` starts a comment line. Latent DAGs add a
//! `latent i j ...` line.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::constraints::{CiStatement, ConstraintSet, Dataset, Verdict, Weight, WeightScheme};
use crate::error::{Error, Result};
use crate::graph::{Dag, GraphView, MixedGraph, VertexId, VertexSet};
use crate::projection::LatentDag;
use crate::separation::SeparationStatement;
use crate::solver::{AssumptionMode, SolverResult};

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

struct GraphText {
    n: usize,
    directed: Vec<(VertexId, VertexId)>,
    bidirected: Vec<(VertexId, VertexId)>,
    latent: Option<VertexSet>,
}

fn parse_graph_text(text: &str) -> Result<GraphText> {
    let mut n = None;
    let mut out = GraphText { n: 0, directed: Vec::new(), bidirected: Vec::new(), latent: None };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        let head = tok.next().unwrap_or_default();
        let nums: std::result::Result<Vec<usize>, _> = tok.map(str::parse).collect();
        let Ok(nums) = nums else {
            return parse_err(line_no, format!("expected integers in {line:?}"));
        };
        match (head, n) {
            ("n", None) => {
                let [count] = nums[..] else {
                    return parse_err(line_no, "header must be `n <count>`");
                };
                n = Some(count);
            }
            ("n", Some(_)) => return parse_err(line_no, "duplicate `n` header"),
            (_, None) => return parse_err(line_no, "missing `n <count>` header"),
            ("d" | "b", Some(count)) => {
                let [a, b] = nums[..] else {
                    return parse_err(line_no, "edge lines take two vertices");
                };
                if a >= count || b >= count {
                    return parse_err(line_no, format!("vertex out of range for n = {count}"));
                }
                if head == "d" {
                    out.directed.push((a, b));
                } else {
                    out.bidirected.push((a.min(b), a.max(b)));
                }
            }
            ("latent", Some(count)) => {
                if out.latent.is_some() {
                    return parse_err(line_no, "duplicate `latent` line");
                }
                if let Some(&v) = nums.iter().find(|&&v| v >= count) {
                    return parse_err(line_no, format!("latent vertex {v} out of range"));
                }
                out.latent = Some(VertexSet::from_slice(&nums));
            }
            (other, _) => return parse_err(line_no, format!("unknown line kind {other:?}")),
        }
    }
    out.n = match n {
        Some(n) => n,
        None => return parse_err(0, "missing `n <count>` header"),
    };
    Ok(out)
}

pub fn parse_graph(text: &str) -> Result<MixedGraph> {
    let g = parse_graph_text(text)?;
    if g.latent.is_some() {
        return parse_err(0, "`latent` lines belong to latent DAG files");
    }
    MixedGraph::new(g.n, &g.directed, &g.bidirected)
}

pub fn format_graph<G: GraphView + ?Sized>(g: &G) -> String {
    let g = MixedGraph::from_view(g);
    let mut s = format!("n {}\n", g.n());
    for (a, b) in g.directed_edges() {
        let _ = writeln!(s, "d {a} {b}");
    }
    for (a, b) in g.bidirected_edges() {
        let _ = writeln!(s, "b {a} {b}");
    }
    s
}

pub fn parse_latent_dag(text: &str) -> Result<LatentDag> {
    let g = parse_graph_text(text)?;
    if !g.bidirected.is_empty() {
        return parse_err(0, "latent DAG files cannot contain bidirected edges");
    }
    LatentDag::new(Dag::from_edges(g.n, &g.directed)?, g.latent.unwrap_or_default())
}

pub fn format_latent_dag(g: &LatentDag) -> String {
    let mut s = format_graph(g.dag().graph());
    let ids: Vec<String> = g.latent().iter().map(|v| v.to_string()).collect();
    let (header, edges) = s.split_once('\n').expect("header line");
    let edges = edges.to_owned();
    s = format!("{header}\nlatent {}\n{edges}", ids.join(" "));
    s
}

pub fn read_graph(path: &Path) -> Result<MixedGraph> {
    parse_graph(&fs::read_to_string(path)?)
}

fn format_set(s: VertexSet) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn parse_set(s: &str, line: usize) -> Result<VertexSet> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(VertexSet::EMPTY);
    }
    let mut out = VertexSet::EMPTY;
    for part in s.split(';') {
        match part.trim().parse::<usize>() {
            Ok(v) if v < 64 => out.insert(v),
            _ => return parse_err(line, format!("bad conditioning-set member {part:?}")),
        }
    }
    Ok(out)
}

/// Writes `x,y,cond,separated` rows.
pub fn write_separation_csv<W: Write>(w: W, statements: &[SeparationStatement]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y", "cond", "separated"])?;
    for s in statements {
        wr.write_record([s.x.to_string(), s.y.to_string(), format_set(s.cond), s.separated.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes `x,y,cond,verdict,weight` rows, with `inf` for infinite weights.
pub fn write_constraints_csv<W: Write>(w: W, cs: &ConstraintSet) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y", "cond", "verdict", "weight"])?;
    for s in cs.statements() {
        wr.write_record([
            s.x.to_string(),
            s.y.to_string(),
            format_set(s.cond),
            s.verdict.as_str().to_owned(),
            s.weight.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a constraint CSV. Without `n`, the vertex count is one more than the
/// largest index mentioned.
pub fn read_constraints_csv<R: Read>(r: R, n: Option<usize>, scheme: WeightScheme) -> Result<ConstraintSet> {
    let mut rd = csv::Reader::from_reader(r);
    let mut stmts = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != 5 {
            return parse_err(line, format!("expected 5 fields, got {}", rec.len()));
        }
        let idx = |k: usize| -> Result<VertexId> {
            rec[k].trim().parse().or_else(|_| parse_err(line, format!("bad vertex {:?}", &rec[k])))
        };
        let (x, y) = (idx(0)?, idx(1)?);
        let cond = parse_set(&rec[2], line)?;
        let verdict = match rec[3].trim() {
            "indep" => Verdict::Independent,
            "dep" => Verdict::Dependent,
            v => return parse_err(line, format!("verdict must be indep or dep, got {v:?}")),
        };
        let weight = match rec[4].trim() {
            "inf" => Weight::Infinite,
            w => match w.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Weight::Finite(v),
                _ => return parse_err(line, format!("bad weight {w:?}")),
            },
        };
        if x == y {
            return parse_err(line, "statement endpoints must differ");
        }
        stmts.push(CiStatement::new(x, y, cond, verdict, weight));
    }
    let inferred = stmts
        .iter()
        .map(|s| s.y.max(s.cond.max().unwrap_or(0)) + 1)
        .max()
        .unwrap_or(0);
    ConstraintSet::new(n.unwrap_or(inferred), stmts, scheme)
}

pub fn read_constraints(path: &Path, n: Option<usize>, scheme: WeightScheme) -> Result<ConstraintSet> {
    read_constraints_csv(fs::File::open(path)?, n, scheme)
}

/// Headerless numeric CSV into a matrix.
pub fn read_matrix_csv<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match row {
            Ok(row) => rows.push(row),
            Err(e) => return parse_err(i + 1, format!("bad number: {e}")),
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return parse_err(i + 1, format!("expected {cols} columns"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn write_matrix_csv<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.nrows() {
        wr.write_record(m.row(i).iter().map(|v| format!("{v:?}")))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    Dataset::new(read_matrix_csv(fs::File::open(path)?)?)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    write_matrix_csv(fs::File::create(path)?, data.values())
}

#[derive(Serialize)]
struct ResultSummary<'a> {
    mode: &'a str,
    objective: Option<f64>,
    infinite: bool,
    hard_violations: u32,
    violation_weight: f64,
    vadj_penalty: u32,
    zero_violation: bool,
    solution_count: u64,
    solutions_written: usize,
    truncated: bool,
    nodes_explored: u64,
    bound_prunes: u64,
    elapsed_seconds: f64,
    timed_out: bool,
}

/// Writes `solution_<k>.graph` files and `result.json` into `dir`.
pub fn write_solution_dir(dir: &Path, mode: AssumptionMode, res: &SolverResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, g) in res.graphs.iter().enumerate() {
        fs::write(dir.join(format!("solution_{k}.graph")), format_graph(g.graph()))?;
    }
    let summary = ResultSummary {
        mode: mode.label(),
        objective: res.objective.is_finite().then_some(res.objective),
        infinite: !res.objective.is_finite(),
        hard_violations: res.cost.hard,
        violation_weight: res.cost.violation,
        vadj_penalty: res.cost.vadj,
        zero_violation: res.zero_violation,
        solution_count: res.solution_count,
        solutions_written: res.graphs.len(),
        truncated: res.truncated,
        nodes_explored: res.stats.nodes_explored,
        bound_prunes: res.stats.bound_prunes,
        elapsed_seconds: res.stats.elapsed.as_secs_f64(),
        timed_out: res.stats.timed_out,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(dir.join("result.json"), json)?;
    Ok(())
}
