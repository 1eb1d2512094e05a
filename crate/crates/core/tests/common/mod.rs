#![allow(dead_code)]

use std::io::Write;
use std::process::Command;

use smcm_core::asp::{parse_optimizer_output, AspOutcome, AspProgram};

/// Command for an external ASP optimiser, e.g. `clingo` or `python3 -m clingo`.
pub fn asp_solver() -> Option<Vec<String>> {
    let cmd = std::env::var("SMCM_ASP_SOLVER").ok()?;
    let parts: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
    (!parts.is_empty()).then_some(parts)
}

pub fn run_asp(cmd: &[String], program: &AspProgram) -> AspOutcome {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(program.text.as_bytes()).unwrap();
    let out = Command::new(&cmd[0])
        .args(&cmd[1..])
        .arg("--opt-mode=opt")
        .arg("--quiet=1")
        .arg(file.path())
        .output()
        .expect("ASP solver runs");
    let text = String::from_utf8_lossy(&out.stdout);
    parse_optimizer_output(&text).unwrap_or_else(|| panic!("unparseable solver output:\n{text}"))
}

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use smcm_core::graph::{pairs, PairState};
use smcm_core::{
    CiStatement, ConstraintSet, Dag, GraphView, LatentDag, Mag, MixedGraph, Smcm, Verdict, VertexSet, Weight,
    WeightScheme,
};

/// Ancestors of `z` (inclusive) by plain graph search over parent lists.
pub fn ancestors_naive<G: GraphView>(g: &G, z: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        stack.extend(g.parents(v).iter());
    }
    seen
}

/// Edge seen from one endpoint: the neighbour and whether each end carries
/// an arrowhead.
#[derive(Clone, Copy)]
struct Step {
    to: usize,
    head_at_from: bool,
    head_at_to: bool,
}

fn steps<G: GraphView>(g: &G, v: usize) -> Vec<Step> {
    let mut out = Vec::new();
    for c in g.children(v).iter() {
        out.push(Step { to: c, head_at_from: false, head_at_to: true });
    }
    for p in g.parents(v).iter() {
        out.push(Step { to: p, head_at_from: true, head_at_to: false });
    }
    for s in g.siblings(v).iter() {
        out.push(Step { to: s, head_at_from: true, head_at_to: true });
    }
    out
}

/// m-separation by enumerating every simple path from `x` to `y`.
pub fn m_separated_by_paths<G: GraphView>(g: &G, x: usize, y: usize, z: &[usize]) -> bool {
    let anc = ancestors_naive(g, z);
    let in_z = |v: usize| z.contains(&v);
    let mut on_path = vec![false; g.n()];
    on_path[x] = true;
    // (vertex, arrowhead into vertex on the last edge)
    fn dfs<G: GraphView>(
        g: &G,
        v: usize,
        head_in: bool,
        y: usize,
        on_path: &mut Vec<bool>,
        anc: &[bool],
        in_z: &dyn Fn(usize) -> bool,
        first: bool,
    ) -> bool {
        for s in steps(g, v) {
            if on_path[s.to] {
                continue;
            }
            if !first {
                let collider = head_in && s.head_at_from;
                let ok = if collider { anc[v] } else { !in_z(v) };
                if !ok {
                    continue;
                }
            }
            if s.to == y {
                return true;
            }
            on_path[s.to] = true;
            let found = dfs(g, s.to, s.head_at_to, y, on_path, anc, in_z, false);
            on_path[s.to] = false;
            if found {
                return true;
            }
        }
        false
    }
    !dfs(g, x, false, y, &mut on_path, &anc, &in_z, true)
}

/// Random SMCM: directed edges follow a random order, bidirected edges are
/// independent coin flips.
pub fn random_smcm<R: Rng>(rng: &mut R, n: usize, p_dir: f64, p_bi: f64) -> Smcm {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut dir = Vec::new();
    let mut bi = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_dir) {
                dir.push((order[i], order[j]));
            }
            if rng.random_bool(p_bi) {
                bi.push((order[i].min(order[j]), order[i].max(order[j])));
            }
        }
    }
    Smcm::from_edges(n, &dir, &bi).unwrap()
}

pub fn random_mag<R: Rng>(rng: &mut R, n: usize) -> Mag {
    let s = random_smcm(rng, n, 0.4, 0.25);
    smcm_core::smcm_to_mag(&s)
}

/// A random MAG that, half the time, differs from `m` only in the edge
/// marks of one adjacent pair.
pub fn mag_variant<R: Rng>(rng: &mut R, m: &Mag) -> Mag {
    let n = m.n();
    if rng.random_bool(0.5) {
        return random_mag(rng, n);
    }
    let mut states = m.graph().pair_states();
    let adjacent: Vec<usize> = (0..states.len()).filter(|&k| !states[k].is_none()).collect();
    for _ in 0..20 {
        let Some(&k) = adjacent.choose(rng) else { break };
        let old = states[k];
        states[k] = *[PairState::Forward, PairState::Backward, PairState::Bidirected].choose(rng).unwrap();
        if let Ok(g) = MixedGraph::from_pair_states(n, &states) {
            if let Ok(v) = Mag::new(g) {
                return v;
            }
        }
        states[k] = old;
    }
    m.clone()
}

/// Random DAG with `obs` observed vertices followed by `lat` latent ones.
pub fn random_latent_dag<R: Rng>(rng: &mut R, obs: usize, lat: usize) -> LatentDag {
    let n = obs + lat;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.35) {
                edges.push((order[i], order[j]));
            }
        }
    }
    let latent = VertexSet::from_slice(&(obs..n).collect::<Vec<_>>());
    LatentDag::new(Dag::from_edges(n, &edges).unwrap(), latent).unwrap()
}

/// Random statements on `n` vertices with mixed verdicts; `hard` allows
/// infinite weights and `real` non-integral ones.
pub fn random_constraints<R: Rng>(rng: &mut R, n: usize, density: f64, hard: bool, real: bool) -> ConstraintSet {
    let mut stmts = Vec::new();
    for (x, y) in pairs(n) {
        let rest = VertexSet::full(n).without(x).without(y);
        for bits in 0..(1u64 << n) {
            let cond = VertexSet(bits);
            if !cond.is_subset(rest) || !rng.random_bool(density) {
                continue;
            }
            let verdict = if rng.random_bool(0.5) { Verdict::Independent } else { Verdict::Dependent };
            let weight = if hard && rng.random_bool(0.1) {
                Weight::Infinite
            } else if real {
                Weight::Finite((rng.random_range(0.05..3.0f64) * 100.0).round() / 100.0)
            } else {
                Weight::Finite(rng.random_range(1..=3) as f64)
            };
            stmts.push(CiStatement::new(x, y, cond, verdict, weight));
        }
    }
    ConstraintSet::new(n, stmts, WeightScheme::Constant).unwrap()
}
