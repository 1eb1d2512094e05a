//! Exact minimisation of the weighted sum of violated (in)dependence
//! statements over semi-Markovian causal models.
//!
//! The search places vertices one at a time in a topological order, so every
//! newly placed vertex is a sink. Once all vertices of a statement are placed,
//! its separation status can no longer change, which makes the partial cost
//! of a node exact for those statements. Virtual adjacency between two placed
//! vertices is likewise final. Each graph is visited once, under its
//! lexicographically smallest topological order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::constraints::{assign_weights, ConstraintSet, Verdict, Weight, WeightScheme};
use crate::error::{invalid, Error, Result};
use crate::graph::{
    ancestors_of_set, has_directed_cycle, is_ancestral, pair_count, GraphView, MixedGraph,
    PairState, Smcm, VertexId, VertexSet,
};
use crate::projection::smcm_to_mag;
use crate::separation::{is_maximal, m_separated_unchecked, virtually_adjacent};

/// Largest vertex count accepted by [`solve`].
pub const MAX_SOLVER_VERTICES: usize = 16;

/// Largest vertex count accepted by [`brute_force_solve`].
pub const MAX_BRUTE_FORCE_VERTICES: usize = 4;

const EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssumptionMode {
    /// Markov plus faithfulness: every statement must match m-separation.
    Faithfulness,
    /// Markov plus virtual-adjacency-faithfulness: an independence is violated
    /// only when its pair is virtually adjacent.
    VadjF,
    /// Markov plus virtual-adjacency-minimality: independencies are never
    /// violated, and each virtual adjacency costs 1.
    VadjM,
    /// Faithfulness semantics with dependencies forced hard.
    NoIMin,
}

impl AssumptionMode {
    pub const ALL: [AssumptionMode; 4] = [
        AssumptionMode::Faithfulness,
        AssumptionMode::VadjF,
        AssumptionMode::VadjM,
        AssumptionMode::NoIMin,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AssumptionMode::Faithfulness => "faithfulness",
            AssumptionMode::VadjF => "vadjf",
            AssumptionMode::VadjM => "vadjm",
            AssumptionMode::NoIMin => "noimin",
        }
    }
}

impl fmt::Display for AssumptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AssumptionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "faithfulness" | "faith" | "f" => Ok(AssumptionMode::Faithfulness),
            "vadjf" => Ok(AssumptionMode::VadjF),
            "vadjm" => Ok(AssumptionMode::VadjM),
            "noimin" | "noi-min" => Ok(AssumptionMode::NoIMin),
            other => invalid(format!("unknown assumption mode {other:?}")),
        }
    }
}

/// Which graphs the solver reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchSpace {
    /// All acyclic mixed graphs, up to two edges per pair.
    Smcm,
    /// Maximal ancestral graphs only. Every SMCM scores the same as its MAG,
    /// so the optimum is the same; the reported sets are far smaller.
    Mag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: AssumptionMode,
    pub enumerate_all: bool,
    pub max_solutions: usize,
    pub time_budget: Duration,
    /// Breaks ties in the child ordering; never changes the optimum.
    pub seed: u64,
    /// VadjM only: minimise violations first, virtual adjacencies second,
    /// instead of their sum.
    pub vadjm_lexicographic: bool,
    pub space: SearchSpace,
}

impl SolverConfig {
    pub fn new(mode: AssumptionMode) -> Self {
        SolverConfig {
            mode,
            enumerate_all: false,
            max_solutions: 1000,
            time_budget: Duration::from_secs(3600),
            seed: 0,
            vadjm_lexicographic: false,
            space: SearchSpace::Smcm,
        }
    }

    pub fn enumerate(mut self, space: SearchSpace) -> Self {
        self.enumerate_all = true;
        self.space = space;
        self
    }

    pub fn lexicographic(mut self, on: bool) -> Self {
        self.vadjm_lexicographic = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_solutions == 0 {
            return invalid("max_solutions must be at least 1");
        }
        if self.time_budget.is_zero() {
            return invalid("time budget must be positive");
        }
        Ok(())
    }

    fn lex(&self) -> bool {
        self.mode == AssumptionMode::VadjM && self.vadjm_lexicographic
    }
}

/// Objective value split into its parts: violated hard statements, the
/// weight of violated soft statements, and (VadjM) the virtual-adjacency
/// penalty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub hard: u32,
    pub violation: f64,
    pub vadj: u32,
}

impl Cost {
    pub const ZERO: Cost = Cost { hard: 0, violation: 0.0, vadj: 0 };

    fn of_weight(w: Weight) -> Cost {
        match w {
            Weight::Infinite => Cost { hard: 1, ..Cost::ZERO },
            Weight::Finite(v) => Cost { violation: v, ..Cost::ZERO },
        }
    }

    /// Scalar objective; infinite when a hard statement is violated.
    pub fn total(&self) -> f64 {
        if self.hard > 0 {
            f64::INFINITY
        } else {
            self.violation + self.vadj as f64
        }
    }

    /// No statement is violated (the VadjM penalty is not a violation).
    pub fn is_violation_free(&self) -> bool {
        self.hard == 0 && self.violation <= EPS
    }

    /// Total order used by the solver, with a small tolerance on the real
    /// parts. `lex` ranks violations strictly before the vadj penalty.
    pub fn compare(&self, other: &Cost, lex: bool) -> Ordering {
        self.hard.cmp(&other.hard).then_with(|| {
            if lex {
                approx_cmp(self.violation, other.violation).then(self.vadj.cmp(&other.vadj))
            } else {
                approx_cmp(
                    self.violation + self.vadj as f64,
                    other.violation + other.vadj as f64,
                )
            }
        })
    }

    fn min(self, other: Cost, lex: bool) -> Cost {
        if other.compare(&self, lex) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

fn approx_cmp(a: f64, b: f64) -> Ordering {
    let scale = 1.0f64.max(a.abs()).max(b.abs());
    if (a - b).abs() <= EPS * scale {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, o: Cost) -> Cost {
        Cost {
            hard: self.hard + o.hard,
            violation: self.violation + o.violation,
            vadj: self.vadj + o.vadj,
        }
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, o: Cost) {
        *self = *self + o;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub bound_prunes: u64,
    pub elapsed: Duration,
    pub timed_out: bool,
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    /// Optimal graphs in canonical order (a single one unless enumerating).
    pub graphs: Vec<Smcm>,
    pub cost: Cost,
    pub objective: f64,
    pub zero_violation: bool,
    /// Optimal graphs found, including any dropped by `max_solutions`.
    pub solution_count: u64,
    pub truncated: bool,
    pub stats: SolverStats,
}

/// NoIMin always runs with dependencies hard and independencies of weight 1.
fn effective_constraints(cs: &ConstraintSet, mode: AssumptionMode) -> Result<ConstraintSet> {
    if mode == AssumptionMode::NoIMin && cs.scheme() != WeightScheme::HardDependencies {
        assign_weights(cs, WeightScheme::HardDependencies, None)
    } else {
        Ok(cs.clone())
    }
}

/// Scores `g` directly from the mode definitions.
pub fn objective(g: &Smcm, cs: &ConstraintSet, mode: AssumptionMode) -> Result<Cost> {
    if g.n() != cs.n() {
        return invalid(format!("graph has {} vertices, constraints have {}", g.n(), cs.n()));
    }
    let cs = effective_constraints(cs, mode)?;
    let n = g.n();
    let mut vadj = vec![false; n * n];
    let mut cost = Cost::ZERO;
    for x in 0..n {
        for y in x + 1..n {
            if virtually_adjacent(g, x, y) {
                vadj[x * n + y] = true;
                if mode == AssumptionMode::VadjM {
                    cost.vadj += 1;
                }
            }
        }
    }
    for s in cs.statements() {
        let violated = match (mode, s.verdict) {
            (_, Verdict::Dependent) => m_separated_unchecked(g, s.x, s.y, s.cond),
            (AssumptionMode::Faithfulness | AssumptionMode::NoIMin, Verdict::Independent) => {
                !m_separated_unchecked(g, s.x, s.y, s.cond)
            }
            (AssumptionMode::VadjF, Verdict::Independent) => vadj[s.x * n + s.y],
            (AssumptionMode::VadjM, Verdict::Independent) => false,
        };
        if violated {
            cost += Cost::of_weight(s.weight);
        }
    }
    Ok(cost)
}

/// Fixed-size graph used as search state.
#[derive(Clone, Copy)]
struct SearchGraph {
    n: usize,
    pa: [VertexSet; MAX_SOLVER_VERTICES],
    ch: [VertexSet; MAX_SOLVER_VERTICES],
    sib: [VertexSet; MAX_SOLVER_VERTICES],
}

impl SearchGraph {
    fn empty(n: usize) -> Self {
        SearchGraph {
            n,
            pa: [VertexSet::EMPTY; MAX_SOLVER_VERTICES],
            ch: [VertexSet::EMPTY; MAX_SOLVER_VERTICES],
            sib: [VertexSet::EMPTY; MAX_SOLVER_VERTICES],
        }
    }

    fn add_sink(&mut self, v: VertexId, parents: VertexSet, siblings: VertexSet) {
        self.pa[v] = parents;
        self.sib[v] = siblings;
        for u in parents {
            self.ch[u].insert(v);
        }
        for u in siblings {
            self.sib[u].insert(v);
        }
    }

    fn to_mixed(&self) -> MixedGraph {
        MixedGraph::from_view(self)
    }
}

impl GraphView for SearchGraph {
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

struct Stmt {
    x: VertexId,
    y: VertexId,
    cond: VertexSet,
    dependent: bool,
    cost: Cost,
}

/// Constraint set preprocessed for one mode.
struct Problem {
    n: usize,
    mode: AssumptionMode,
    lex: bool,
    stmts: Vec<Stmt>,
    /// `by_pair[x * n + y]`: statements on the pair `x < y`.
    by_pair: Vec<Vec<u32>>,
    /// `by_pair_cond[(x * n + y) * n + v]`: statements on `x < y` whose
    /// conditioning set contains `v`.
    by_pair_cond: Vec<Vec<u32>>,
    /// Cost of pair `(x, y)` when virtually adjacent, at `x * n + y`.
    vadj_cost: Vec<Cost>,
    /// Lower bound on the final cost of each pair's statements.
    pair_lb: Vec<Cost>,
}

impl Problem {
    fn new(cs: &ConstraintSet, mode: AssumptionMode, lex: bool) -> Self {
        let n = cs.n();
        let mut stmts = Vec::with_capacity(cs.len());
        let mut by_pair = vec![Vec::new(); n * n];
        let mut by_pair_cond = vec![Vec::new(); n * n * n];
        let mut indep_sum = vec![Cost::ZERO; n * n];
        let mut has_indep = vec![false; n * n];
        let mut dep_count = vec![0usize; n * n];
        let mut dep_min: Vec<Option<Cost>> = vec![None; n * n];
        for (i, s) in cs.statements().iter().enumerate() {
            let cost = Cost::of_weight(s.weight);
            let dependent = s.verdict == Verdict::Dependent;
            let p = s.x * n + s.y;
            if dependent {
                dep_count[p] += 1;
                dep_min[p] = Some(dep_min[p].map_or(cost, |m| m.min(cost, lex)));
            } else {
                has_indep[p] = true;
                indep_sum[p] += cost;
            }
            by_pair[p].push(i as u32);
            for v in s.cond {
                by_pair_cond[p * n + v].push(i as u32);
            }
            stmts.push(Stmt { x: s.x, y: s.y, cond: s.cond, dependent, cost });
        }
        let all_sets = 1usize << n.saturating_sub(2);
        let mut vadj_cost = vec![Cost::ZERO; n * n];
        let mut pair_lb = vec![Cost::ZERO; n * n];
        for x in 0..n {
            for y in x + 1..n {
                let p = x * n + y;
                vadj_cost[p] = match mode {
                    AssumptionMode::VadjM => Cost { vadj: 1, ..Cost::ZERO },
                    _ => indep_sum[p],
                };
                // A pair that is not virtually adjacent is separated by some
                // set; if every set was tested dependent, one of them fails.
                let separated = match dep_min[p] {
                    Some(m) if !has_indep[p] && dep_count[p] == all_sets => m,
                    _ => Cost::ZERO,
                };
                pair_lb[p] = vadj_cost[p].min(separated, lex);
            }
        }
        Problem { n, mode, lex, stmts, by_pair, by_pair_cond, vadj_cost, pair_lb }
    }

    fn pair_index(&self, a: VertexId, b: VertexId) -> usize {
        if a < b {
            a * self.n + b
        } else {
            b * self.n + a
        }
    }

    /// Sum of pair bounds over pairs with an endpoint outside `placed`.
    fn remaining_lb(&self, placed: VertexSet) -> Cost {
        let mut total = Cost::ZERO;
        for x in 0..self.n {
            for y in x + 1..self.n {
                if !(placed.contains(x) && placed.contains(y)) {
                    total += self.pair_lb[x * self.n + y];
                }
            }
        }
        total
    }

    /// Whether independencies are scored against m-separation.
    fn faithful(&self) -> bool {
        matches!(self.mode, AssumptionMode::Faithfulness | AssumptionMode::NoIMin)
    }

    /// Exact objective of a complete graph.
    fn evaluate(&self, g: &SearchGraph) -> Cost {
        let n = self.n;
        let mut cost = Cost::ZERO;
        let mut vadj = vec![false; n * n];
        for x in 0..n {
            for y in x + 1..n {
                if virtually_adjacent(g, x, y) {
                    vadj[x * n + y] = true;
                    cost += self.vadj_cost[x * n + y];
                }
            }
        }
        for s in &self.stmts {
            if vadj[s.x * n + s.y] || (!s.dependent && !self.faithful()) {
                continue;
            }
            if m_separated_unchecked(g, s.x, s.y, s.cond) == s.dependent {
                cost += s.cost;
            }
        }
        cost
    }
}

#[derive(Clone)]
struct Node {
    g: SearchGraph,
    placed: VertexSet,
    order: [u8; MAX_SOLVER_VERTICES],
    len: usize,
    vadj: [VertexSet; MAX_SOLVER_VERTICES],
    /// Exact cost of every statement known to be violated in all completions.
    cost: Cost,
    /// Statements counted in `cost` before all their vertices were placed.
    early: Vec<u64>,
}

impl Node {
    fn root(n: usize, stmts: usize) -> Self {
        Node {
            g: SearchGraph::empty(n),
            placed: VertexSet::EMPTY,
            order: [0; MAX_SOLVER_VERTICES],
            len: 0,
            vadj: [VertexSet::EMPTY; MAX_SOLVER_VERTICES],
            cost: Cost::ZERO,
            early: vec![0; stmts.div_ceil(64)],
        }
    }

    fn is_early(&self, i: u32) -> bool {
        self.early[(i / 64) as usize] >> (i % 64) & 1 == 1
    }
}

struct Child {
    node: Node,
    lb: Cost,
    tiebreak: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Optimize,
    Collect,
}

struct Ranked(Vec<PairState>, MixedGraph);

impl PartialEq for Ranked {
    fn eq(&self, o: &Self) -> bool {
        self.0 == o.0
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Ranked {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.cmp(&o.0)
    }
}

struct Search<'a> {
    p: &'a Problem,
    phase: Phase,
    space: SearchSpace,
    seed: u64,
    start: Instant,
    budget: Duration,
    timed_out: bool,
    nodes: u64,
    prunes: u64,
    best: Option<(Cost, SearchGraph)>,
    target: Cost,
    kept: BinaryHeap<Ranked>,
    keep: usize,
    found: u64,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl<'a> Search<'a> {
    fn new(p: &'a Problem, phase: Phase, space: SearchSpace, config: &SolverConfig, start: Instant) -> Self {
        Search {
            p,
            phase,
            space,
            seed: config.seed,
            start,
            budget: config.time_budget,
            timed_out: false,
            nodes: 0,
            prunes: 0,
            best: None,
            target: Cost::ZERO,
            kept: BinaryHeap::new(),
            keep: config.max_solutions,
            found: 0,
        }
    }

    fn prunable(&self, lb: &Cost) -> bool {
        match self.phase {
            Phase::Optimize => self
                .best
                .as_ref()
                .is_some_and(|(b, _)| lb.compare(b, self.p.lex) != Ordering::Less),
            Phase::Collect => lb.compare(&self.target, self.p.lex) == Ordering::Greater,
        }
    }

    fn out_of_time(&mut self) -> bool {
        if !self.timed_out && self.nodes % 64 == 0 && self.start.elapsed() > self.budget {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn offer(&mut self, cost: Cost, g: &SearchGraph) {
        let better = self
            .best
            .as_ref()
            .is_none_or(|(b, _)| cost.compare(b, self.p.lex) == Ordering::Less);
        if better {
            self.best = Some((cost, *g));
        }
    }

    fn run(&mut self) {
        let root = Node::root(self.p.n, self.p.stmts.len());
        if self.phase == Phase::Optimize {
            self.warm_start(&root);
        }
        self.expand(&root);
    }

    /// Greedy descent followed by single-pair hill climbing, to give the
    /// branch and bound a tight incumbent.
    fn warm_start(&mut self, root: &Node) {
        let all = VertexSet::full(self.p.n);
        let mut node = root.clone();
        while node.placed != all {
            let mut children = self.children(&node, all);
            let Some(first) = children.iter().enumerate().min_by(|a, b| {
                a.1.lb.compare(&b.1.lb, self.p.lex).then(a.1.tiebreak.cmp(&b.1.tiebreak))
            }) else {
                return;
            };
            let i = first.0;
            node = children.swap_remove(i).node;
        }
        let mut g = node.g;
        let mut cost = self.p.evaluate(&g);
        let pairs: Vec<(VertexId, VertexId)> = crate::graph::pairs(self.p.n);
        loop {
            let mut improved = false;
            for &(x, y) in &pairs {
                for state in PairState::SIMPLE {
                    let Some(h) = with_pair_state(&g, x, y, state) else { continue };
                    let c = self.p.evaluate(&h);
                    if c.compare(&cost, self.p.lex) == Ordering::Less {
                        g = h;
                        cost = c;
                        improved = true;
                    }
                }
                if self.start.elapsed() > self.budget {
                    self.offer(cost, &g);
                    return;
                }
            }
            if !improved {
                break;
            }
        }
        self.offer(cost, &g);
    }

    fn leaf(&mut self, node: &Node) {
        match self.phase {
            Phase::Optimize => self.offer(node.cost, &node.g),
            Phase::Collect => {
                if node.cost.compare(&self.target, self.p.lex) != Ordering::Equal {
                    return;
                }
                let g = node.g.to_mixed();
                if self.space == SearchSpace::Mag && !is_maximal(&g).expect("ancestral leaf") {
                    return;
                }
                self.found += 1;
                self.kept.push(Ranked(g.pair_states(), g));
                if self.kept.len() > self.keep {
                    self.kept.pop();
                }
            }
        }
    }

    fn expand(&mut self, node: &Node) {
        self.nodes += 1;
        if self.out_of_time() {
            return;
        }
        let all = VertexSet::full(self.p.n);
        if node.placed == all {
            self.leaf(node);
            return;
        }
        let mut children = self.children(node, all);
        children.sort_by(|a, b| a.lb.compare(&b.lb, self.p.lex).then(a.tiebreak.cmp(&b.tiebreak)));
        for child in children {
            if self.timed_out {
                return;
            }
            if self.prunable(&child.lb) {
                self.prunes += 1;
                continue;
            }
            self.expand(&child.node);
        }
    }

    fn children(&mut self, node: &Node, all: VertexSet) -> Vec<Child> {
        let p = self.p;
        let n = p.n;
        let placed = node.placed;
        // suffix_max[j]: largest vertex at order position >= j.
        let mut suffix_max = [None::<VertexId>; MAX_SOLVER_VERTICES + 1];
        for j in (0..node.len).rev() {
            let v = node.order[j] as VertexId;
            suffix_max[j] = Some(suffix_max[j + 1].map_or(v, |m| m.max(v)));
        }
        let mut pos = [0usize; MAX_SOLVER_VERTICES];
        for j in 0..node.len {
            pos[node.order[j] as usize] = j;
        }
        let placed_list = placed.to_vec();
        let mut out = Vec::new();
        let mut flagged: Vec<u32> = Vec::new();
        for v in all - placed {
            let grown = placed.with(v);
            let rest = p.remaining_lb(grown);
            if self.prunable(&(node.cost + rest)) {
                self.prunes += 1;
                continue;
            }
            // Statements on already placed, non-adjacent pairs that mention v.
            let mut old_pairs: Vec<u32> = Vec::new();
            for (a, &x) in placed_list.iter().enumerate() {
                for &y in &placed_list[a + 1..] {
                    let (x, y) = if x < y { (x, y) } else { (y, x) };
                    if !node.vadj[x].contains(y) {
                        old_pairs.extend(
                            p.by_pair_cond[(x * n + y) * n + v]
                                .iter()
                                .filter(|&&i| !node.is_early(i)),
                        );
                    }
                }
            }
            for parents in subsets(placed) {
                // Canonical order: every vertex placed after v's last parent
                // must be smaller than v.
                let first_free = parents.iter().map(|u| pos[u] + 1).max().unwrap_or(0);
                if suffix_max[first_free].is_some_and(|m| m > v) {
                    continue;
                }
                let blocked = match self.space {
                    SearchSpace::Mag => ancestors_of_set(&node.g, parents),
                    SearchSpace::Smcm => VertexSet::EMPTY,
                };
                let sib_pool = match self.space {
                    SearchSpace::Mag => placed - parents - blocked,
                    SearchSpace::Smcm => placed,
                };
                for siblings in subsets(sib_pool) {
                    let mut g = node.g;
                    g.add_sink(v, parents, siblings);
                    flagged.clear();
                    let Some((cost, new_vadj)) =
                        self.score_child(node, &g, v, grown, rest, &placed_list, &old_pairs, &mut flagged)
                    else {
                        self.prunes += 1;
                        continue;
                    };
                    let mut vadj = node.vadj;
                    vadj[v] = new_vadj;
                    for u in new_vadj {
                        vadj[u].insert(v);
                    }
                    let mut order = node.order;
                    order[node.len] = v as u8;
                    let mut early = node.early.clone();
                    for &i in &flagged {
                        early[(i / 64) as usize] |= 1 << (i % 64);
                    }
                    let tiebreak =
                        mix(self.seed ^ mix((v as u64) << 40 ^ parents.bits() << 20 ^ siblings.bits()));
                    out.push(Child {
                        node: Node { g, placed: grown, order, len: node.len + 1, vadj, cost, early },
                        lb: cost + rest,
                        tiebreak,
                    });
                }
            }
        }
        out
    }

    /// Exact cost of everything settled by placing `v`, or `None` when the
    /// child can be pruned.
    #[allow(clippy::too_many_arguments)]
    fn score_child(
        &self,
        node: &Node,
        g: &SearchGraph,
        v: VertexId,
        grown: VertexSet,
        rest: Cost,
        placed_list: &[VertexId],
        old_pairs: &[u32],
        flagged: &mut Vec<u32>,
    ) -> Option<(Cost, VertexSet)> {
        let p = self.p;
        let faithful = p.faithful();
        let mut cost = node.cost;
        let mut new_vadj = VertexSet::EMPTY;
        for &u in placed_list {
            if g.pa[v].contains(u) || g.sib[v].contains(u) || virtually_adjacent(g, u, v) {
                new_vadj.insert(u);
                cost += p.vadj_cost[p.pair_index(u, v)];
            }
        }
        if self.prunable(&(cost + rest)) {
            return None;
        }
        let new_pairs = placed_list
            .iter()
            .filter(|&&u| !new_vadj.contains(u))
            .flat_map(|&u| p.by_pair[p.pair_index(u, v)].iter());
        for &i in new_pairs.chain(old_pairs.iter()) {
            let s = &p.stmts[i as usize];
            let settled = s.cond.is_subset(grown);
            if !settled && !(faithful && !s.dependent) {
                continue;
            }
            if !s.dependent && !faithful {
                continue;
            }
            // With some conditioning vertices still to come, a connection
            // given the placed part persists: later vertices are sinks.
            let separated = m_separated_unchecked(g, s.x, s.y, s.cond & grown);
            if separated == s.dependent {
                cost += s.cost;
                if !settled {
                    flagged.push(i);
                }
                if self.prunable(&(cost + rest)) {
                    return None;
                }
            }
        }
        Some((cost, new_vadj))
    }
}

/// `g` with the pair `(x, y)` set to `state`, if the result is ancestral.
fn with_pair_state(g: &SearchGraph, x: VertexId, y: VertexId, state: PairState) -> Option<SearchGraph> {
    let mut h = *g;
    h.pa[x].remove(y);
    h.pa[y].remove(x);
    h.ch[x].remove(y);
    h.ch[y].remove(x);
    h.sib[x].remove(y);
    h.sib[y].remove(x);
    if state.forward() {
        h.pa[y].insert(x);
        h.ch[x].insert(y);
    }
    if state.backward() {
        h.pa[x].insert(y);
        h.ch[y].insert(x);
    }
    if state.bidirected() {
        h.sib[x].insert(y);
        h.sib[y].insert(x);
    }
    let unchanged = (0..g.n).all(|v| g.pa[v] == h.pa[v] && g.sib[v] == h.sib[v]);
    if unchanged {
        return None;
    }
    let ancestral = (0..h.n).all(|v| {
        let anc = ancestors_of_set(&h, VertexSet::singleton(v));
        !(anc - VertexSet::singleton(v)).intersects(h.sib[v] | h.ch[v])
    });
    ancestral.then_some(h)
}

/// All subsets of `s`, starting with the empty set.
fn subsets(s: VertexSet) -> impl Iterator<Item = VertexSet> {
    let full = s.bits();
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
        Some(VertexSet(cur))
    })
}

/// Finds graphs minimising the objective of `config.mode`.
///
/// The optimum is always sought over ancestral graphs, which attain every
/// objective value an SMCM can. With `enumerate_all`, a second pass collects
/// every optimal graph of `config.space`, keeping the first `max_solutions`
/// in canonical order.
pub fn solve(cs: &ConstraintSet, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let n = cs.n();
    if n > MAX_SOLVER_VERTICES {
        return invalid(format!("the solver handles at most {MAX_SOLVER_VERTICES} vertices, got {n}"));
    }
    let start = Instant::now();
    let cs = effective_constraints(cs, config.mode)?;
    let problem = Problem::new(&cs, config.mode, config.lex());

    let mut opt = Search::new(&problem, Phase::Optimize, SearchSpace::Mag, config, start);
    opt.run();
    let (cost, best) = opt.best.expect("the search always reaches a leaf before timing out");
    let mut stats = SolverStats {
        nodes_explored: opt.nodes,
        bound_prunes: opt.prunes,
        elapsed: Duration::ZERO,
        timed_out: opt.timed_out,
    };

    let (graphs, solution_count, truncated) = if config.enumerate_all && !stats.timed_out {
        let mut col = Search::new(&problem, Phase::Collect, config.space, config, start);
        col.target = cost;
        col.run();
        stats.nodes_explored += col.nodes;
        stats.bound_prunes += col.prunes;
        stats.timed_out |= col.timed_out;
        let found = col.found;
        let graphs: Vec<Smcm> = col
            .kept
            .into_sorted_vec()
            .into_iter()
            .map(|Ranked(_, g)| Smcm::new(g).expect("search graphs are acyclic"))
            .collect();
        let truncated = found > graphs.len() as u64;
        (graphs, found, truncated)
    } else {
        let s = Smcm::new(best.to_mixed()).expect("search graphs are acyclic");
        let g = if config.space == SearchSpace::Mag { smcm_to_mag(&s).into() } else { s };
        (vec![g], 1, false)
    };
    stats.elapsed = start.elapsed();
    Ok(SolverResult {
        graphs,
        cost,
        objective: cost.total(),
        zero_violation: cost.is_violation_free(),
        solution_count,
        truncated,
        stats,
    })
}

/// Scores every graph of `config.space` on at most four vertices and returns
/// all optima in canonical order. Reference implementation for [`solve`].
pub fn brute_force_solve(cs: &ConstraintSet, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let n = cs.n();
    if n > MAX_BRUTE_FORCE_VERTICES {
        return invalid(format!(
            "brute force is limited to {MAX_BRUTE_FORCE_VERTICES} vertices, got {n}"
        ));
    }
    let start = Instant::now();
    let lex = config.lex();
    let m = pair_count(n);
    let alphabet: &[PairState] = match config.space {
        SearchSpace::Smcm => &PairState::ALL,
        SearchSpace::Mag => &PairState::SIMPLE,
    };
    let total = alphabet.len().pow(m as u32);
    let mut best: Option<Cost> = None;
    let mut optima: Vec<MixedGraph> = Vec::new();
    let mut states = vec![PairState::None; m];
    let mut explored = 0u64;
    for code in 0..total {
        let mut c = code;
        for slot in states.iter_mut().rev() {
            *slot = alphabet[c % alphabet.len()];
            c /= alphabet.len();
        }
        let g = MixedGraph::from_pair_states(n, &states)?;
        if has_directed_cycle(&g) {
            continue;
        }
        if config.space == SearchSpace::Mag && !(is_ancestral(&g) && is_maximal(&g)?) {
            continue;
        }
        explored += 1;
        let cost = objective(&Smcm::new(g.clone())?, cs, config.mode)?;
        match best.map(|b| cost.compare(&b, lex)) {
            None | Some(Ordering::Less) => {
                best = Some(cost);
                optima.clear();
                optima.push(g);
            }
            Some(Ordering::Equal) => optima.push(g),
            Some(Ordering::Greater) => {}
        }
    }
    let cost = best.expect("the empty graph is always a candidate");
    optima.sort_by(|a, b| a.canonical_cmp(b));
    let found = optima.len() as u64;
    optima.truncate(config.max_solutions);
    let graphs = optima.into_iter().map(Smcm::new).collect::<Result<Vec<_>>>()?;
    Ok(SolverResult {
        truncated: found > graphs.len() as u64,
        graphs,
        cost,
        objective: cost.total(),
        zero_violation: cost.is_violation_free(),
        solution_count: found,
        stats: SolverStats {
            nodes_explored: explored,
            bound_prunes: 0,
            elapsed: start.elapsed(),
            timed_out: false,
        },
    })
}
