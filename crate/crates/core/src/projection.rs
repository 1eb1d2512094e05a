//! Latent projection of a DAG onto its observed vertices, and conversion of
//! an SMCM into the MAG with the same independence model.

use crate::error::{invalid, Result};
use crate::graph::{
    ancestors_of_set, Dag, GraphView, Mag, MixedGraph, Smcm, VertexId, VertexSet,
};
use crate::separation::virtually_adjacent;

/// A DAG over observed and latent vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatentDag {
    dag: Dag,
    latent: VertexSet,
}

impl LatentDag {
    pub fn new(dag: Dag, latent: VertexSet) -> Result<Self> {
        let all = dag.vertices();
        if !latent.is_subset(all) {
            return invalid(format!("latent set {latent} is not within the {} vertices", dag.n()));
        }
        if latent == all {
            return invalid("at least one vertex must be observed");
        }
        Ok(LatentDag { dag, latent })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn latent(&self) -> VertexSet {
        self.latent
    }

    /// Observed vertices in increasing index order; position `k` in this list
    /// is vertex `k` of the projected graph.
    pub fn observed(&self) -> Vec<VertexId> {
        (self.dag.vertices() - self.latent).to_vec()
    }
}

/// Projects `g` onto its observed vertices.
///
/// 1. every observed vertex becomes a vertex of the output;
/// 2. edges between observed vertices are copied;
/// 3. `x -> y` is added for every directed path from `x` to `y` whose
///    intermediate vertices are all latent;
/// 4. `x <-> y` is added whenever some latent vertex reaches both `x` and `y`
///    through directed paths with only latent intermediates.
pub fn latent_project(g: &LatentDag) -> Smcm {
    let observed = g.observed();
    let index_of = |v: VertexId| observed.binary_search(&v).expect("observed vertex");
    let latent = g.latent;
    let dag = &g.dag;

    // Observed endpoints reachable from `src` via directed paths whose
    // intermediate vertices are latent.
    let reach = |src: VertexId| -> VertexSet {
        let mut seen = VertexSet::EMPTY;
        let mut stack: Vec<VertexId> = dag.children(src).to_vec();
        let mut hits = VertexSet::EMPTY;
        while let Some(v) = stack.pop() {
            if seen.contains(v) {
                continue;
            }
            seen.insert(v);
            if latent.contains(v) {
                stack.extend(dag.children(v));
            } else {
                hits.insert(v);
            }
        }
        hits
    };

    let mut directed = Vec::new();
    for &x in &observed {
        // Covers steps 2 and 3: a direct edge is a path with no intermediates.
        for y in reach(x) {
            directed.push((index_of(x), index_of(y)));
        }
    }

    let mut bi_pairs = Vec::new();
    for l in latent {
        let targets = reach(l).to_vec();
        for (a, &x) in targets.iter().enumerate() {
            for &y in &targets[a + 1..] {
                let pair = (index_of(x), index_of(y));
                if !bi_pairs.contains(&pair) {
                    bi_pairs.push(pair);
                }
            }
        }
    }
    bi_pairs.sort_unstable();
    directed.sort_unstable();

    Smcm::from_edges(observed.len(), &directed, &bi_pairs)
        .expect("projection of a DAG is acyclic and duplicate-free")
}

/// Converts an SMCM into its MAG: vertices are adjacent iff joined by an
/// inducing path; an adjacency is oriented `x -> y` when `x` is an ancestor of
/// `y`, and bidirected when neither is an ancestor of the other.
pub fn smcm_to_mag(s: &Smcm) -> Mag {
    let n = s.n();
    let anc: Vec<VertexSet> = (0..n)
        .map(|v| ancestors_of_set(s, VertexSet::singleton(v)))
        .collect();
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if !virtually_adjacent(s, x, y) {
                continue;
            }
            if anc[y].contains(x) {
                directed.push((x, y));
            } else if anc[x].contains(y) {
                directed.push((y, x));
            } else {
                bidirected.push((x, y));
            }
        }
    }
    let g = MixedGraph::new(n, &directed, &bidirected).expect("one edge per pair");
    Mag::new_unchecked(g)
}
