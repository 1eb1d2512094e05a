//! Markov equivalence of MAGs via adjacencies plus colliders with order.
//!
//! A triple `<x, z, y>` has order 0 when `x` and `y` are non-adjacent. A
//! shielded triple has order `i` when it has no smaller order and some
//! discriminating path for it (in either direction) has all of its interior
//! collider triples already ordered, with maximum order `i - 1`. Two MAGs are
//! Markov equivalent iff they share adjacencies and the set of collider triples
//! that carry an order.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Result};
use crate::graph::{GraphView, Mag, MixedGraph, Smcm, VertexId};
use crate::projection::smcm_to_mag;

/// `<x, z, y>` with `x - z` and `z - y` adjacent and `x != y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub x: VertexId,
    pub z: VertexId,
    pub y: VertexId,
}

impl Triple {
    pub fn new(x: VertexId, z: VertexId, y: VertexId) -> Self {
        Triple { x, z, y }
    }

    /// Endpoints swapped so that `x < y`; triples are unordered in their ends.
    pub fn canonical(self) -> Self {
        if self.x <= self.y {
            self
        } else {
            Triple { x: self.y, z: self.z, y: self.x }
        }
    }

    pub fn reversed(self) -> Self {
        Triple { x: self.y, z: self.z, y: self.x }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleOrder {
    pub order: usize,
    pub collider: bool,
}

/// Orders of the triples of a MAG that have one; keys are canonical.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleOrderMap {
    entries: BTreeMap<Triple, TripleOrder>,
}

impl TripleOrderMap {
    pub fn get(&self, t: Triple) -> Option<TripleOrder> {
        self.entries.get(&t.canonical()).copied()
    }

    pub fn order(&self, t: Triple) -> Option<usize> {
        self.get(t).map(|o| o.order)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Triple, &TripleOrder)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Collider triples with an order.
    pub fn colliders(&self) -> BTreeSet<Triple> {
        self.entries
            .iter()
            .filter(|(_, o)| o.collider)
            .map(|(t, _)| *t)
            .collect()
    }
}

/// Edge between `a` and `b` has an arrowhead at `b`.
fn arrow_at(g: &MixedGraph, a: VertexId, b: VertexId) -> bool {
    g.has_directed(a, b) || g.has_bidirected(a, b)
}

fn is_collider(g: &MixedGraph, t: Triple) -> bool {
    arrow_at(g, t.x, t.z) && arrow_at(g, t.y, t.z)
}

fn check_triple(g: &MixedGraph, t: Triple) -> Result<()> {
    let n = g.n();
    if t.x >= n || t.y >= n || t.z >= n {
        return Err(crate::Error::InvalidVertex { vertex: t.x.max(t.y).max(t.z), n });
    }
    if t.x == t.y || t.x == t.z || t.y == t.z {
        return invalid(format!("{t:?} needs three distinct vertices"));
    }
    if !g.adjacent(t.x, t.z) || !g.adjacent(t.z, t.y) {
        return invalid(format!("{t:?} is not a triple of the graph"));
    }
    Ok(())
}

/// All discriminating paths `(v0, .., vm = x, z, y)` for the ordered triple
/// `t`: `v0` and `y` are non-adjacent and every `v1 .. vm` is a collider on
/// the path and a parent of `y`. Paths are returned as vertex sequences.
pub fn find_discriminating_paths(m: &Mag, t: Triple) -> Result<Vec<Vec<VertexId>>> {
    let g = m.graph();
    check_triple(g, t)?;
    Ok(discriminating_paths(g, t))
}

fn discriminating_paths(g: &MixedGraph, t: Triple) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    if !g.has_directed(t.x, t.y) || !arrow_at(g, t.z, t.x) {
        return out;
    }
    // Reversed path under construction: [x, v_{m-1}, ...].
    let mut stack = vec![t.x];
    extend_backwards(g, t, &mut stack, &mut out);
    for p in &mut out {
        p.reverse();
        p.push(t.z);
        p.push(t.y);
    }
    out.sort();
    out
}

fn extend_backwards(g: &MixedGraph, t: Triple, rev: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
    let head = *rev.last().expect("non-empty");
    for w in g.neighbours(head) {
        if w == t.z || w == t.y || rev.contains(&w) || !arrow_at(g, w, head) {
            continue;
        }
        if !g.adjacent(w, t.y) {
            let mut p = rev.clone();
            p.push(w);
            out.push(p);
        } else if g.has_directed(w, t.y) && arrow_at(g, head, w) {
            // `w` is another interior collider: needs arrowheads on both sides.
            rev.push(w);
            extend_backwards(g, t, rev, out);
            rev.pop();
        }
    }
}

/// Canonical triples of `g`.
fn triples(g: &MixedGraph) -> Vec<Triple> {
    let mut out = Vec::new();
    for z in 0..g.n() {
        let nb = g.neighbours(z).to_vec();
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                out.push(Triple::new(x, z, y));
            }
        }
    }
    out.sort();
    out
}

/// Interior collider triples `<v_{j-1}, v_j, v_{j+1}>` of a discriminating
/// path, `1 <= j <= m`.
fn interior_triples(path: &[VertexId]) -> Vec<Triple> {
    // path = v0 .. vm, z, y; interior centres are v1..vm at indices 1..len-3.
    (1..path.len() - 2)
        .map(|j| Triple::new(path[j - 1], path[j], path[j + 1]).canonical())
        .collect()
}

/// Orders every triple that has one and records whether it is a collider.
pub fn colliders_with_order(m: &Mag) -> TripleOrderMap {
    triple_orders(m.graph())
}

fn triple_orders(g: &MixedGraph) -> TripleOrderMap {
    let mut orders: BTreeMap<Triple, usize> = BTreeMap::new();
    // Witness lists for shielded triples: each entry is the interior triples
    // of one discriminating path.
    let mut witnesses: Vec<(Triple, Vec<Vec<Triple>>)> = Vec::new();
    for t in triples(g) {
        if !g.adjacent(t.x, t.y) {
            orders.insert(t, 0);
        } else {
            let paths: Vec<Vec<Triple>> = discriminating_paths(g, t)
                .into_iter()
                .chain(discriminating_paths(g, t.reversed()))
                .map(|p| interior_triples(&p))
                .collect();
            if !paths.is_empty() {
                witnesses.push((t, paths));
            }
        }
    }

    let mut round = 1;
    loop {
        let mut fresh = Vec::new();
        for (t, paths) in &witnesses {
            if orders.contains_key(t) {
                continue;
            }
            let witnessed = paths.iter().any(|interior| {
                let mut max = None;
                for it in interior {
                    match orders.get(it) {
                        Some(&o) if o < round => max = max.max(Some(o)),
                        _ => return false,
                    }
                }
                max == Some(round - 1)
            });
            if witnessed {
                fresh.push(*t);
            }
        }
        if fresh.is_empty() {
            break;
        }
        for t in fresh {
            orders.insert(t, round);
        }
        round += 1;
    }

    TripleOrderMap {
        entries: orders
            .into_iter()
            .map(|(t, order)| (t, TripleOrder { order, collider: is_collider(g, t) }))
            .collect(),
    }
}

fn adjacency_pairs(g: &MixedGraph) -> Vec<(VertexId, VertexId)> {
    crate::graph::pairs(g.n())
        .into_iter()
        .filter(|&(x, y)| g.adjacent(x, y))
        .collect()
}

/// Same adjacencies and the same colliders with order.
pub fn markov_equivalent(m1: &Mag, m2: &Mag) -> Result<bool> {
    if m1.n() != m2.n() {
        return invalid(format!("vertex counts differ: {} vs {}", m1.n(), m2.n()));
    }
    if adjacency_pairs(m1.graph()) != adjacency_pairs(m2.graph()) {
        return Ok(false);
    }
    Ok(colliders_with_order(m1).colliders() == colliders_with_order(m2).colliders())
}

/// Markov equivalence of SMCMs through their MAGs.
pub fn markov_equivalent_smcms(s1: &Smcm, s2: &Smcm) -> Result<bool> {
    if s1.n() != s2.n() {
        return invalid(format!("vertex counts differ: {} vs {}", s1.n(), s2.n()));
    }
    markov_equivalent(&smcm_to_mag(s1), &smcm_to_mag(s2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mag(n: usize, d: &[(usize, usize)], b: &[(usize, usize)]) -> Mag {
        Mag::new(MixedGraph::new(n, d, b).unwrap()).unwrap()
    }

    /// 0 -> 1 <-> 2 <-> 3, with 1, 2, 3 all parents of 4.
    fn two_collider_chain() -> Mag {
        mag(5, &[(0, 1), (1, 4), (2, 4), (3, 4)], &[(1, 2), (2, 3)])
    }

    #[test]
    fn discriminating_path_found() {
        let m = two_collider_chain();
        let paths = find_discriminating_paths(&m, Triple::new(2, 3, 4)).unwrap();
        assert_eq!(paths, vec![vec![0, 1, 2, 3, 4]]);
        // <1, 2, 4> is discriminated by (0, 1, 2, 4).
        let paths = find_discriminating_paths(&m, Triple::new(1, 2, 4)).unwrap();
        assert_eq!(paths, vec![vec![0, 1, 2, 4]]);
    }

    #[test]
    fn unshielded_triple_has_no_paths() {
        let m = mag(3, &[(0, 1), (2, 1)], &[]);
        assert!(find_discriminating_paths(&m, Triple::new(0, 1, 2)).unwrap().is_empty());
        assert!(find_discriminating_paths(&m, Triple::new(0, 2, 1)).is_err());
    }

    #[test]
    fn orders_on_collider_chain() {
        let m = two_collider_chain();
        let map = colliders_with_order(&m);
        assert_eq!(map.order(Triple::new(0, 1, 2)), Some(0));
        assert_eq!(map.order(Triple::new(1, 2, 4)), Some(1));
        // Interior triples <0,1,2> and <1,2,3> are both unshielded.
        assert_eq!(map.order(Triple::new(2, 3, 4)), Some(1));
        assert!(map.get(Triple::new(2, 3, 4)).map(|o| !o.collider).unwrap());
        assert!(map.get(Triple::new(0, 1, 2)).map(|o| o.collider).unwrap());
    }

    #[test]
    fn dag_orders() {
        let chain = mag(4, &[(0, 1), (1, 2), (2, 3)], &[]);
        let map = colliders_with_order(&chain);
        assert_eq!(map.len(), 2);
        assert!(map.iter().all(|(t, o)| o.order == 0 && !chain.adjacent(t.x, t.y)));

        // Shielded non-collider <2, 0, 3> is discriminated by (1, 2, 0, 3).
        let m = mag(4, &[(0, 2), (1, 2), (2, 3), (0, 3)], &[]);
        let map = colliders_with_order(&m);
        assert_eq!(map.order(Triple::new(2, 0, 3)), Some(1));
        assert_eq!(map.colliders(), [Triple::new(0, 2, 1)].into_iter().collect());
    }

    #[test]
    fn edgeless_is_empty() {
        let m = Mag::new(MixedGraph::empty(4).unwrap()).unwrap();
        assert!(colliders_with_order(&m).is_empty());
    }

    #[test]
    fn equivalence_examples() {
        let a = mag(3, &[(0, 1), (1, 2)], &[]);
        let b = mag(3, &[(1, 0), (2, 1)], &[]);
        let c = mag(3, &[(0, 1), (2, 1)], &[]);
        assert!(markov_equivalent(&a, &a).unwrap());
        assert!(markov_equivalent(&a, &b).unwrap());
        assert!(!markov_equivalent(&a, &c).unwrap());
        let d = mag(4, &[], &[]);
        assert!(markov_equivalent(&a, &d).is_err());
    }

    #[test]
    fn fig1_vs_chain() {
        let fig1 = Smcm::from_edges(3, &[(0, 1), (1, 2)], &[(1, 2)]).unwrap();
        let chain = Smcm::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
        assert!(!markov_equivalent_smcms(&fig1, &chain).unwrap());
        let as_smcm: Smcm = smcm_to_mag(&fig1).into();
        assert!(markov_equivalent_smcms(&fig1, &as_smcm).unwrap());
    }
}
