//! m-separation, inducing paths and independence models.
//!
//! m-separation is decided on the augmented ancestral graph: restrict to
//! `An(x ∪ y ∪ Z)`, join every pair of vertices connected by a collider path
//! (equivalently, every pair inside `D ∪ pa(D)` for a district `D` of the
//! ancestral subgraph), and test undirected reachability from `x` to `y`
//! avoiding `Z`.
//!
//! Both routines are exact on acyclic graphs. On cyclic graphs they never
//! report separation or non-adjacency when an m-connecting path or inducing
//! path exists, which is the direction the solver's bounds rely on.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{ancestors_of_set, is_ancestral, GraphView, MixedGraph, VertexId, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeparationStatement {
    pub x: VertexId,
    pub y: VertexId,
    pub cond: VertexSet,
    pub separated: bool,
}

/// The separations entailed by a graph, enumerated over pairs `x < y` and
/// conditioning sets of size at most `max_cond`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceModel {
    pub n: usize,
    pub max_cond: usize,
    /// Only statements with `separated = true`, in enumeration order.
    pub statements: Vec<SeparationStatement>,
}

impl IndependenceModel {
    pub fn contains(&self, x: VertexId, y: VertexId, cond: VertexSet) -> bool {
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        self.statements
            .iter()
            .any(|s| s.x == x && s.y == y && s.cond == cond)
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }
}

/// Subsets of `V \ {x, y}` with at most `max_cond` members, ordered by size
/// and then by bitmask value.
pub fn conditioning_sets(n: usize, x: VertexId, y: VertexId, max_cond: usize) -> Vec<VertexSet> {
    let rest = VertexSet::full(n).without(x).without(y);
    let mut out = Vec::new();
    // Standard submask enumeration.
    let mut sub = rest.bits();
    loop {
        let s = VertexSet(sub);
        if s.len() <= max_cond {
            out.push(s);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest.bits();
    }
    out.sort_by_key(|s| (s.len(), s.bits()));
    out
}

/// Every `(x, y, cond)` with `x < y` and `|cond| <= max_cond`, in the order
/// used by independence models and constraint sets.
pub fn statement_triples(n: usize, max_cond: usize) -> Vec<(VertexId, VertexId, VertexSet)> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for c in conditioning_sets(n, x, y, max_cond) {
                out.push((x, y, c));
            }
        }
    }
    out
}

pub(crate) fn check_triple<G: GraphView + ?Sized>(
    g: &G,
    x: VertexId,
    y: VertexId,
    z: VertexSet,
) -> Result<()> {
    let n = g.n();
    if x >= n || y >= n {
        return Err(crate::Error::InvalidVertex { vertex: x.max(y), n });
    }
    if !z.is_subset(VertexSet::full(n)) {
        return Err(crate::Error::InvalidVertex {
            vertex: z.max().unwrap_or(0),
            n,
        });
    }
    if x == y {
        return invalid(format!("m-separation needs distinct vertices, got {x} twice"));
    }
    if z.contains(x) || z.contains(y) {
        return invalid(format!("conditioning set {z} overlaps {{{x},{y}}}"));
    }
    Ok(())
}

/// True iff `x` and `y` are m-separated by `z` in `g`.
pub fn m_separated<G: GraphView + ?Sized>(
    g: &G,
    x: VertexId,
    y: VertexId,
    z: VertexSet,
) -> Result<bool> {
    check_triple(g, x, y, z)?;
    Ok(m_separated_unchecked(g, x, y, z))
}

pub(crate) fn m_separated_unchecked<G: GraphView + ?Sized>(
    g: &G,
    x: VertexId,
    y: VertexId,
    z: VertexSet,
) -> bool {
    let anc = ancestors_of_set(g, z.with(x).with(y));
    let open = anc - z;
    let mut reached = VertexSet::singleton(x);
    let mut frontier = reached;
    while !frontier.is_empty() {
        let mut next = VertexSet::EMPTY;
        for v in frontier {
            next |= collider_connected(g, v, anc);
        }
        let fresh = (next & open) - reached;
        if fresh.contains(y) {
            return false;
        }
        reached |= fresh;
        frontier = fresh;
    }
    true
}

/// Vertices joined to `v` by a collider path inside `within` (including plain
/// adjacency): the union of `D ∪ pa(D)` over districts `D` of the induced
/// subgraph that contain `v` or one of its children.
fn collider_connected<G: GraphView + ?Sized>(g: &G, v: VertexId, within: VertexSet) -> VertexSet {
    let mut district = (g.children(v) & within).with(v);
    let mut frontier = district;
    while !frontier.is_empty() {
        let mut next = VertexSet::EMPTY;
        for u in frontier {
            next |= g.siblings(u);
        }
        frontier = (next & within) - district;
        district |= frontier;
    }
    let mut out = district;
    for u in district {
        out |= g.parents(u);
    }
    (out & within).without(v)
}

/// True iff some path between `x` and `y` has every interior vertex a
/// collider and an ancestor of `x` or `y`.
pub fn inducing_path_exists<G: GraphView + ?Sized>(g: &G, x: VertexId, y: VertexId) -> Result<bool> {
    check_triple(g, x, y, VertexSet::EMPTY)?;
    Ok(virtually_adjacent(g, x, y))
}

/// Inducing-path test as a fixpoint over the "into" / "out of" reachability
/// relations from `x`, restricted to `An({x, y})`:
///
/// * `into` holds the vertices `z` reached by a path from `x` whose last edge
///   has an arrowhead at `z` and whose interior vertices are colliders;
/// * it is seeded with `x -> z` and `x <-> z` and closed under `u <-> z`;
/// * `out of` is one more step `z -> u` from any `u` in `into`.
///
/// `y` is virtually adjacent to `x` iff it lands in either relation or
/// `y -> x`.
pub(crate) fn virtually_adjacent<G: GraphView + ?Sized>(g: &G, x: VertexId, y: VertexId) -> bool {
    if g.adjacent(x, y) {
        return true;
    }
    let anc = ancestors_of_set(g, VertexSet::singleton(x).with(y));
    let mut into = (g.children(x) | g.siblings(x)) & anc;
    let mut frontier = into;
    while !frontier.is_empty() {
        let mut next = VertexSet::EMPTY;
        for u in frontier {
            next |= g.siblings(u);
        }
        frontier = (next & anc) - into;
        into |= frontier;
    }
    if into.contains(y) {
        return true;
    }
    into.iter().any(|u| g.parents(u).contains(y))
}

/// All virtually adjacent pairs `(x, y)`, `x < y`.
pub fn virtual_adjacencies<G: GraphView + ?Sized>(g: &G) -> Vec<(VertexId, VertexId)> {
    let n = g.n();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if virtually_adjacent(g, x, y) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Every separation `(x, y, Z)` with `x < y` and `|Z| <= max_cond`.
pub fn independence_model<G: GraphView + ?Sized>(g: &G, max_cond: usize) -> Result<IndependenceModel> {
    let n = g.n();
    if max_cond > n.saturating_sub(2) {
        return invalid(format!("max_cond {max_cond} exceeds n - 2 = {}", n.saturating_sub(2)));
    }
    let statements = statement_triples(n, max_cond)
        .into_iter()
        .filter(|&(x, y, c)| m_separated_unchecked(g, x, y, c))
        .map(|(x, y, cond)| SeparationStatement {
            x,
            y,
            cond,
            separated: true,
        })
        .collect();
    Ok(IndependenceModel { n, max_cond, statements })
}

/// Full independence model (all conditioning sets).
pub fn full_independence_model<G: GraphView + ?Sized>(g: &G) -> IndependenceModel {
    independence_model(g, g.n().saturating_sub(2)).expect("n - 2 is always a valid cap")
}

/// For an ancestral graph: every non-adjacent pair has a separating set.
pub fn is_maximal(g: &MixedGraph) -> Result<bool> {
    if !is_ancestral(g) {
        return invalid("maximality is only defined for ancestral graphs");
    }
    let n = g.n();
    for x in 0..n {
        for y in x + 1..n {
            if !g.adjacent(x, y) && virtually_adjacent(g, x, y) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Smcm;

    fn fig1() -> Smcm {
        Smcm::from_edges(3, &[(0, 1), (1, 2)], &[(1, 2)]).unwrap()
    }

    #[test]
    fn fig1_endpoints_never_separated() {
        let g = fig1();
        assert!(!m_separated(&g, 0, 2, VertexSet::EMPTY).unwrap());
        assert!(!m_separated(&g, 0, 2, VertexSet::singleton(1)).unwrap());
        assert!(inducing_path_exists(&g, 0, 2).unwrap());
        assert_eq!(virtual_adjacencies(&g), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn chain_separation() {
        let g = Smcm::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
        assert!(!m_separated(&g, 0, 2, VertexSet::EMPTY).unwrap());
        assert!(m_separated(&g, 0, 2, VertexSet::singleton(1)).unwrap());
        assert!(m_separated(&g, 2, 0, VertexSet::singleton(1)).unwrap());
        let model = independence_model(&g, 1).unwrap();
        assert_eq!(
            model.statements,
            vec![SeparationStatement { x: 0, y: 2, cond: VertexSet::singleton(1), separated: true }]
        );
    }

    #[test]
    fn collider_opens_on_conditioning() {
        let g = Smcm::from_edges(3, &[(0, 1), (2, 1)], &[]).unwrap();
        assert!(m_separated(&g, 0, 2, VertexSet::EMPTY).unwrap());
        assert!(!m_separated(&g, 0, 2, VertexSet::singleton(1)).unwrap());
    }

    #[test]
    fn edgeless_graph_separates_everything() {
        let g = MixedGraph::empty(4).unwrap();
        for (x, y, c) in statement_triples(4, 2) {
            assert!(m_separated(&g, x, y, c).unwrap());
        }
        assert!(virtual_adjacencies(&g).is_empty());
    }

    #[test]
    fn complete_bidirected_has_empty_model() {
        let bi: Vec<_> = crate::graph::pairs(4);
        let g = MixedGraph::new(4, &[], &bi).unwrap();
        assert!(full_independence_model(&g).is_empty());
    }

    #[test]
    fn argument_errors() {
        let g = fig1();
        assert!(m_separated(&g, 0, 0, VertexSet::EMPTY).is_err());
        assert!(m_separated(&g, 0, 2, VertexSet::singleton(0)).is_err());
        assert!(m_separated(&g, 0, 5, VertexSet::EMPTY).is_err());
        assert!(inducing_path_exists(&g, 1, 1).is_err());
        assert!(independence_model(&g, 2).is_err());
    }

    #[test]
    fn conditioning_sets_order() {
        let sets = conditioning_sets(4, 0, 3, 2);
        let as_vecs: Vec<_> = sets.iter().map(|s| s.to_vec()).collect();
        assert_eq!(as_vecs, vec![vec![], vec![1], vec![2], vec![1, 2]]);
        assert_eq!(conditioning_sets(4, 0, 3, 1).len(), 3);
    }

    #[test]
    fn maximality() {
        let dag = MixedGraph::new(3, &[(0, 1), (1, 2)], &[]).unwrap();
        assert!(is_maximal(&dag).unwrap());
        let non_ancestral = MixedGraph::new(3, &[(0, 1), (1, 2)], &[(0, 2)]).unwrap();
        assert!(is_maximal(&non_ancestral).is_err());
    }
}
