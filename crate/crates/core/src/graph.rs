//! Mixed graphs over a dense vertex index, with directed (`->`) and
//! bidirected (`<->`) edges, plus the acyclic / ancestral subtypes used
//! throughout the crate.
//!
//! Vertex sets are 64-bit masks, so a graph holds at most 64 vertices. Every
//! algorithm in the crate is written against [`GraphView`], which lets the
//! solver run the same separation code on its own fixed-size search state.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Not, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type VertexId = usize;

/// Largest vertex count representable by a [`VertexSet`].
pub const MAX_VERTICES: usize = 64;

/// A set of vertices stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<VertexId>", try_from = "Vec<VertexId>")]
pub struct VertexSet(pub u64);

impl From<VertexSet> for Vec<VertexId> {
    fn from(s: VertexSet) -> Self {
        s.to_vec()
    }
}

impl TryFrom<Vec<VertexId>> for VertexSet {
    type Error = Error;

    fn try_from(v: Vec<VertexId>) -> Result<Self> {
        match v.iter().find(|&&x| x >= MAX_VERTICES) {
            Some(&vertex) => Err(Error::InvalidVertex { vertex, n: MAX_VERTICES }),
            None => Ok(VertexSet::from_slice(&v)),
        }
    }
}

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn singleton(v: VertexId) -> Self {
        VertexSet(1u64 << v)
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn from_slice(vs: &[VertexId]) -> Self {
        vs.iter().copied().collect()
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, v: VertexId) -> bool {
        v < 64 && self.0 & (1u64 << v) != 0
    }

    pub fn insert(&mut self, v: VertexId) {
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: VertexId) {
        self.0 &= !(1u64 << v);
    }

    pub fn with(self, v: VertexId) -> Self {
        VertexSet(self.0 | (1u64 << v))
    }

    pub fn without(self, v: VertexId) -> Self {
        VertexSet(self.0 & !(1u64 << v))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: VertexSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Largest member, if any.
    pub fn max(self) -> Option<VertexId> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> VertexSetIter {
        VertexSetIter(self.0)
    }

    pub fn to_vec(self) -> Vec<VertexId> {
        self.iter().collect()
    }
}

pub struct VertexSetIter(u64);

impl Iterator for VertexSetIter {
    type Item = VertexId;

    fn next(&mut self) -> Option<VertexId> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl IntoIterator for VertexSet {
    type Item = VertexId;
    type IntoIter = VertexSetIter;

    fn into_iter(self) -> VertexSetIter {
        self.iter()
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl BitOr for VertexSet {
    type Output = VertexSet;
    fn bitor(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 | rhs.0)
    }
}

impl BitOrAssign for VertexSet {
    fn bitor_assign(&mut self, rhs: VertexSet) {
        self.0 |= rhs.0;
    }
}

impl BitAnd for VertexSet {
    type Output = VertexSet;
    fn bitand(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 & rhs.0)
    }
}

impl BitAndAssign for VertexSet {
    fn bitand_assign(&mut self, rhs: VertexSet) {
        self.0 &= rhs.0;
    }
}

impl Sub for VertexSet {
    type Output = VertexSet;
    fn sub(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 & !rhs.0)
    }
}

impl Not for VertexSet {
    type Output = VertexSet;
    fn not(self) -> VertexSet {
        VertexSet(!self.0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Edge configuration of an unordered pair `(i, j)` with `i < j`.
///
/// The variant order is the canonical order used when sorting graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairState {
    None,
    /// `i -> j`
    Forward,
    /// `j -> i`
    Backward,
    /// `i <-> j`
    Bidirected,
    /// `i -> j` and `i <-> j`
    ForwardBidirected,
    /// `j -> i` and `i <-> j`
    BackwardBidirected,
}

impl PairState {
    pub const ALL: [PairState; 6] = [
        PairState::None,
        PairState::Forward,
        PairState::Backward,
        PairState::Bidirected,
        PairState::ForwardBidirected,
        PairState::BackwardBidirected,
    ];

    /// States with at most one edge (the alphabet of simple graphs).
    pub const SIMPLE: [PairState; 4] = [
        PairState::None,
        PairState::Forward,
        PairState::Backward,
        PairState::Bidirected,
    ];

    pub fn forward(self) -> bool {
        matches!(self, PairState::Forward | PairState::ForwardBidirected)
    }

    pub fn backward(self) -> bool {
        matches!(self, PairState::Backward | PairState::BackwardBidirected)
    }

    pub fn bidirected(self) -> bool {
        matches!(
            self,
            PairState::Bidirected | PairState::ForwardBidirected | PairState::BackwardBidirected
        )
    }

    pub fn is_none(self) -> bool {
        self == PairState::None
    }
}

/// Number of unordered pairs on `n` vertices.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Unordered pairs `(i, j)`, `i < j`, in canonical (lexicographic) order.
pub fn pairs(n: usize) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Read-only adjacency access shared by all graph algorithms.
pub trait GraphView {
    fn n(&self) -> usize;
    fn parents(&self, v: VertexId) -> VertexSet;
    fn children(&self, v: VertexId) -> VertexSet;
    fn siblings(&self, v: VertexId) -> VertexSet;

    fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    fn neighbours(&self, v: VertexId) -> VertexSet {
        self.parents(v) | self.children(v) | self.siblings(v)
    }

    fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbours(u).contains(v)
    }
}

/// A mixed graph `(V, E_directed, E_bidirected)`. Immutable after construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MixedGraph {
    n: usize,
    pa: Vec<VertexSet>,
    ch: Vec<VertexSet>,
    sib: Vec<VertexSet>,
}

impl MixedGraph {
    /// Graph with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return invalid(format!("at most {MAX_VERTICES} vertices supported, got {n}"));
        }
        Ok(MixedGraph {
            n,
            pa: vec![VertexSet::EMPTY; n],
            ch: vec![VertexSet::EMPTY; n],
            sib: vec![VertexSet::EMPTY; n],
        })
    }

    /// Builds a graph from edge lists. Directed edges are `(tail, head)`;
    /// bidirected edges are unordered. Self-loops and duplicates are rejected.
    pub fn new(
        n: usize,
        directed: &[(VertexId, VertexId)],
        bidirected: &[(VertexId, VertexId)],
    ) -> Result<Self> {
        let mut g = MixedGraph::empty(n)?;
        for &(u, v) in directed {
            g.check_pair(u, v)?;
            if g.ch[u].contains(v) {
                return Err(Error::InvalidGraph(format!("duplicate directed edge {u} -> {v}")));
            }
            g.ch[u].insert(v);
            g.pa[v].insert(u);
        }
        for &(u, v) in bidirected {
            g.check_pair(u, v)?;
            if g.sib[u].contains(v) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate bidirected edge {u} <-> {v}"
                )));
            }
            g.sib[u].insert(v);
            g.sib[v].insert(u);
        }
        Ok(g)
    }

    /// Builds a graph from one [`PairState`] per pair in [`pairs`] order.
    pub fn from_pair_states(n: usize, states: &[PairState]) -> Result<Self> {
        if states.len() != pair_count(n) {
            return invalid(format!(
                "expected {} pair states for n = {n}, got {}",
                pair_count(n),
                states.len()
            ));
        }
        let mut g = MixedGraph::empty(n)?;
        for (&(i, j), &s) in pairs(n).iter().zip(states) {
            if s.forward() {
                g.ch[i].insert(j);
                g.pa[j].insert(i);
            }
            if s.backward() {
                g.ch[j].insert(i);
                g.pa[i].insert(j);
            }
            if s.bidirected() {
                g.sib[i].insert(j);
                g.sib[j].insert(i);
            }
        }
        Ok(g)
    }

    /// Copies any graph view into an owned graph.
    pub fn from_view<G: GraphView + ?Sized>(view: &G) -> Self {
        let n = view.n();
        MixedGraph {
            n,
            pa: (0..n).map(|v| view.parents(v)).collect(),
            ch: (0..n).map(|v| view.children(v)).collect(),
            sib: (0..n).map(|v| view.siblings(v)).collect(),
        }
    }

    fn check_pair(&self, u: VertexId, v: VertexId) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
        }
        Ok(())
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.n {
            Err(Error::InvalidVertex { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn has_directed(&self, tail: VertexId, head: VertexId) -> bool {
        self.ch[tail].contains(head)
    }

    pub fn has_bidirected(&self, u: VertexId, v: VertexId) -> bool {
        self.sib[u].contains(v)
    }

    pub fn pair_state(&self, i: VertexId, j: VertexId) -> PairState {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        match (self.has_directed(i, j), self.has_directed(j, i), self.has_bidirected(i, j)) {
            (false, false, false) => PairState::None,
            (true, false, false) => PairState::Forward,
            (false, true, false) => PairState::Backward,
            (false, false, true) => PairState::Bidirected,
            (true, false, true) => PairState::ForwardBidirected,
            (false, true, true) => PairState::BackwardBidirected,
            // Both directions: only reachable through `new`, never valid in an Smcm.
            (true, true, _) => PairState::ForwardBidirected,
        }
    }

    pub fn pair_states(&self) -> Vec<PairState> {
        pairs(self.n).into_iter().map(|(i, j)| self.pair_state(i, j)).collect()
    }

    pub fn directed_edges(&self) -> Vec<(VertexId, VertexId)> {
        (0..self.n)
            .flat_map(|u| self.ch[u].iter().map(move |v| (u, v)))
            .collect()
    }

    pub fn bidirected_edges(&self) -> Vec<(VertexId, VertexId)> {
        (0..self.n)
            .flat_map(|u| self.sib[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.directed_edges().len() + self.bidirected_edges().len()
    }

    /// At most one edge between any pair of vertices.
    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|v| {
            let d = self.pa[v] | self.ch[v];
            !(self.pa[v].intersects(self.ch[v]) || d.intersects(self.sib[v]))
        })
    }

    /// Canonical order: vertex count, then pair states lexicographically.
    pub fn canonical_cmp(&self, other: &MixedGraph) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.pair_states().cmp(&other.pair_states()))
    }
}

impl GraphView for MixedGraph {
    fn n(&self) -> usize {
        self.n
    }
    fn parents(&self, v: VertexId) -> VertexSet {
        self.pa[v]
    }
    fn children(&self, v: VertexId) -> VertexSet {
        self.ch[v]
    }
    fn siblings(&self, v: VertexId) -> VertexSet {
        self.sib[v]
    }
}

impl fmt::Debug for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MixedGraph(n={}", self.n)?;
        for (u, v) in self.directed_edges() {
            write!(f, " {u}->{v}")?;
        }
        for (u, v) in self.bidirected_edges() {
            write!(f, " {u}<->{v}")?;
        }
        write!(f, ")")
    }
}

/// Ancestors of every vertex in `set`, including `set` itself.
pub fn ancestors_of_set<G: GraphView + ?Sized>(g: &G, set: VertexSet) -> VertexSet {
    let mut acc = set;
    let mut frontier = set;
    while !frontier.is_empty() {
        let mut next = VertexSet::EMPTY;
        for v in frontier {
            next |= g.parents(v);
        }
        frontier = next - acc;
        acc |= frontier;
    }
    acc
}

/// Descendants of every vertex in `set`, including `set` itself.
pub fn descendants_of_set<G: GraphView + ?Sized>(g: &G, set: VertexSet) -> VertexSet {
    let mut acc = set;
    let mut frontier = set;
    while !frontier.is_empty() {
        let mut next = VertexSet::EMPTY;
        for v in frontier {
            next |= g.children(v);
        }
        frontier = next - acc;
        acc |= frontier;
    }
    acc
}

/// `{v : v = x or there is a directed path v -> ... -> x}`.
pub fn ancestors(g: &MixedGraph, x: VertexId) -> Result<VertexSet> {
    g.check_vertex(x)?;
    Ok(ancestors_of_set(g, VertexSet::singleton(x)))
}

/// True iff two distinct vertices are ancestors of each other.
pub fn has_directed_cycle<G: GraphView + ?Sized>(g: &G) -> bool {
    // Repeatedly peel off vertices without remaining parents.
    let mut remaining = g.vertices();
    loop {
        let sources: VertexSet = remaining
            .iter()
            .filter(|&v| !g.parents(v).intersects(remaining))
            .collect();
        if sources.is_empty() {
            return !remaining.is_empty();
        }
        remaining = remaining - sources;
    }
}

/// Simple, acyclic, and no edge is into a vertex that is an ancestor of the
/// edge's other endpoint.
pub fn is_ancestral(g: &MixedGraph) -> bool {
    if !g.is_simple() || has_directed_cycle(g) {
        return false;
    }
    // Directed edges into an ancestor would be cycles; only bidirected edges
    // remain to check.
    (0..g.n()).all(|v| {
        let anc = ancestors_of_set(g, VertexSet::singleton(v)).without(v);
        !anc.intersects(g.siblings(v))
    })
}

/// An acyclic mixed graph (semi-Markovian causal model / ADMG).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Smcm(MixedGraph);

impl Smcm {
    pub fn new(g: MixedGraph) -> Result<Self> {
        if has_directed_cycle(&g) {
            return Err(Error::InvalidGraph("graph contains a directed cycle".into()));
        }
        Ok(Smcm(g))
    }

    pub fn from_edges(
        n: usize,
        directed: &[(VertexId, VertexId)],
        bidirected: &[(VertexId, VertexId)],
    ) -> Result<Self> {
        Smcm::new(MixedGraph::new(n, directed, bidirected)?)
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

/// A maximal ancestral graph.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mag(MixedGraph);

impl Mag {
    pub fn new(g: MixedGraph) -> Result<Self> {
        if !is_ancestral(&g) {
            return Err(Error::InvalidGraph("graph is not ancestral".into()));
        }
        if !crate::separation::is_maximal(&g)? {
            return Err(Error::InvalidGraph("graph is not maximal".into()));
        }
        Ok(Mag(g))
    }

    pub(crate) fn new_unchecked(g: MixedGraph) -> Self {
        Mag(g)
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

/// A directed acyclic graph.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dag(MixedGraph);

impl Dag {
    pub fn new(g: MixedGraph) -> Result<Self> {
        if !g.bidirected_edges().is_empty() {
            return Err(Error::InvalidGraph("a DAG has no bidirected edges".into()));
        }
        if has_directed_cycle(&g) {
            return Err(Error::InvalidGraph("graph contains a directed cycle".into()));
        }
        Ok(Dag(g))
    }

    pub fn from_edges(n: usize, directed: &[(VertexId, VertexId)]) -> Result<Self> {
        Dag::new(MixedGraph::new(n, directed, &[])?)
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

impl From<Mag> for Smcm {
    fn from(m: Mag) -> Smcm {
        Smcm(m.0)
    }
}

impl From<Dag> for Smcm {
    fn from(d: Dag) -> Smcm {
        Smcm(d.0)
    }
}

impl From<Dag> for Mag {
    fn from(d: Dag) -> Mag {
        Mag(d.0)
    }
}

macro_rules! delegate_view {
    ($t:ty) => {
        impl GraphView for $t {
            fn n(&self) -> usize {
                self.0.n
            }
            fn parents(&self, v: VertexId) -> VertexSet {
                self.0.pa[v]
            }
            fn children(&self, v: VertexId) -> VertexSet {
                self.0.ch[v]
            }
            fn siblings(&self, v: VertexId) -> VertexSet {
                self.0.sib[v]
            }
        }

        impl std::ops::Deref for $t {
            type Target = MixedGraph;
            fn deref(&self) -> &MixedGraph {
                &self.0
            }
        }
    };
}

delegate_view!(Smcm);
delegate_view!(Mag);
delegate_view!(Dag);
