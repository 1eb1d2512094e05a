//! Answer-set program text for a constraint set, in the gringo/clingo
//! dialect, so that an external optimiser can cross-check [`crate::solver`].
//!
//! Conditioning sets are written as the integer value of their vertex
//! bitmask, with one `in(C, V)` fact per member.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::constraints::{ConstraintSet, Verdict, Weight, WeightScheme};
use crate::error::Result;
use crate::solver::AssumptionMode;

/// Multiplier applied to non-integral weights before rounding.
pub const WEIGHT_SCALE: u64 = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmitOptions {
    /// VadjM: rank statement violations above the virtual-adjacency penalty.
    pub lexicographic: bool,
    /// VadjF: emit the literal `:- not vadj(X,Y), indep(X,Y,C,W).` rule
    /// instead of weighted violations of `vadj ∧ indep`.
    pub printed_vadjf_rule: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AspProgram {
    pub text: String,
    pub mode: AssumptionMode,
    pub n: usize,
    /// Weights were multiplied by this factor; divide optimiser costs by it.
    pub weight_scale: u64,
}

const GRAPH_RULES: &str = "\
% Candidate graphs: directed edges and symmetric confounding.
{ edge(X,Y) } :- node(X), node(Y), X != Y.
{ conf(X,Y) } :- node(X), node(Y), X < Y.
conf(Y,X) :- conf(X,Y).

% Ancestry (reflexive) and acyclicity.
anc(X,X) :- node(X).
anc(X,Y) :- edge(X,Y).
anc(X,Z) :- anc(X,Y), edge(Y,Z).
:- anc(X,Y), anc(Y,X), X != Y.
ancestors(Z,X,Y) :- anc(Z,X), node(Y).
ancestors(Z,X,Y) :- anc(Z,Y), node(X).

% Virtual adjacency.
h(X,Z,Y) :- edge(X,Z), ancestors(Z,X,Y).
h(X,Z,Y) :- conf(X,Z), ancestors(Z,X,Y).
h(X,Z,Y) :- h(X,U,Y), conf(Z,U), ancestors(Z,X,Y).
t(X,Z,Y) :- h(X,U,Y), edge(Z,U), ancestors(Z,X,Y).
vadj(X,Y) :- h(X,Y,Y).
vadj(X,Y) :- t(X,Y,Y).
vadj(X,Y) :- edge(Y,X).

% m-connection given a conditioning set, over walks from X; the mark is the
% edge end at the reached vertex.
test(X,Y,C) :- indep(X,Y,C,_).
test(X,Y,C) :- dep(X,Y,C,_).
test(X,Y,C) :- hindep(X,Y,C).
test(X,Y,C) :- hdep(X,Y,C).
start(X,C) :- test(X,_,C).
ancin(C,V) :- in(C,Z), anc(V,Z).
reach(X,V,h,C) :- start(X,C), edge(X,V).
reach(X,V,t,C) :- start(X,C), edge(V,X).
reach(X,V,h,C) :- start(X,C), conf(X,V).
reach(X,W,h,C) :- reach(X,V,t,C), edge(V,W), not in(C,V).
reach(X,W,t,C) :- reach(X,V,t,C), edge(W,V), not in(C,V).
reach(X,W,h,C) :- reach(X,V,t,C), conf(V,W), not in(C,V).
reach(X,W,h,C) :- reach(X,V,h,C), edge(V,W), not in(C,V).
reach(X,W,t,C) :- reach(X,V,h,C), edge(W,V), ancin(C,V).
reach(X,W,h,C) :- reach(X,V,h,C), conf(V,W), ancin(C,V).
connected(X,Y,C) :- test(X,Y,C), reach(X,Y,_,C).
";

fn integral(cs: &ConstraintSet) -> bool {
    cs.statements()
        .iter()
        .all(|s| s.weight.finite().is_none_or(|w| w.fract() == 0.0))
}

/// Emits the program for `cs` under `mode`. NoIMin uses hard dependencies
/// regardless of the weights in `cs`.
pub fn emit_program(cs: &ConstraintSet, mode: AssumptionMode, opts: EmitOptions) -> Result<AspProgram> {
    let cs = if mode == AssumptionMode::NoIMin && cs.scheme() != WeightScheme::HardDependencies {
        crate::constraints::assign_weights(cs, WeightScheme::HardDependencies, None)?
    } else {
        cs.clone()
    };
    let n = cs.n();
    let scale = if integral(&cs) { 1 } else { WEIGHT_SCALE };
    let lex = mode == AssumptionMode::VadjM && opts.lexicographic;
    let (viol_level, vadj_level) = if lex { (2, 1) } else { (1, 1) };

    let mut out = String::new();
    let _ = writeln!(out, "% mode: {mode}");
    if scale != 1 {
        let _ = writeln!(out, "% weights scaled by {scale}");
    }
    let _ = writeln!(out, "node(0..{}).", n.saturating_sub(1));
    out.push('\n');
    out.push_str(GRAPH_RULES);
    out.push('\n');

    out.push_str("% Violations.\n");
    out.push_str(":- hdep(X,Y,C), not connected(X,Y,C).\n");
    out.push_str("fail(X,Y,C,W) :- dep(X,Y,C,W), not connected(X,Y,C).\n");
    match mode {
        AssumptionMode::Faithfulness | AssumptionMode::NoIMin => {
            out.push_str(":- hindep(X,Y,C), connected(X,Y,C).\n");
            out.push_str("fail(X,Y,C,W) :- indep(X,Y,C,W), connected(X,Y,C).\n");
        }
        AssumptionMode::VadjF if opts.printed_vadjf_rule => {
            out.push_str(":- not vadj(X,Y), indep(X,Y,C,W).\n");
            out.push_str(":- not vadj(X,Y), hindep(X,Y,C).\n");
        }
        AssumptionMode::VadjF => {
            out.push_str(":- hindep(X,Y,C), vadj(X,Y).\n");
            out.push_str("fail(X,Y,C,W) :- indep(X,Y,C,W), vadj(X,Y).\n");
        }
        AssumptionMode::VadjM => {}
    }
    let _ = writeln!(out, ":~ fail(X,Y,C,W). [W@{viol_level},X,Y,C]");
    if mode == AssumptionMode::VadjM {
        out.push_str("penalty(X,Y) :- vadj(X,Y), X < Y.\n");
        out.push_str("penalty(X,Y) :- vadj(Y,X), X < Y.\n");
        let _ = writeln!(out, ":~ penalty(X,Y). [1@{vadj_level},X,Y,vadj]");
    }
    out.push('\n');

    out.push_str("% Statements.\n");
    let mut sets = BTreeSet::new();
    for s in cs.statements() {
        let c = s.cond.bits();
        sets.insert(c);
        let pred = match s.verdict {
            Verdict::Independent => "indep",
            Verdict::Dependent => "dep",
        };
        match s.weight {
            Weight::Infinite => {
                let _ = writeln!(out, "h{pred}({},{},{c}).", s.x, s.y);
            }
            Weight::Finite(w) => {
                let w = (w * scale as f64).round() as u64;
                let _ = writeln!(out, "{pred}({},{},{c},{w}).", s.x, s.y);
            }
        }
    }
    for c in sets {
        for v in crate::graph::VertexSet(c) {
            let _ = writeln!(out, "in({c},{v}).");
        }
    }
    out.push_str("\n#show edge/2.\n#show conf/2.\n");
    Ok(AspProgram { text: out, mode, n, weight_scale: scale })
}

/// Outcome reported by an external optimiser.
#[derive(Clone, Debug, PartialEq)]
pub enum AspOutcome {
    /// Costs of the best model, highest priority first.
    Optimum(Vec<i64>),
    Unsatisfiable,
}

/// Reads the last `Optimization:` line of clingo-style output.
pub fn parse_optimizer_output(text: &str) -> Option<AspOutcome> {
    let mut last = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("Optimization:") {
            let costs: Option<Vec<i64>> = rest.split_whitespace().map(|t| t.parse().ok()).collect();
            last = costs.map(AspOutcome::Optimum);
        } else if line == "UNSATISFIABLE" {
            return Some(AspOutcome::Unsatisfiable);
        } else if line.starts_with("SATISFIABLE") || line.starts_with("OPTIMUM FOUND") {
            if last.is_none() {
                last = Some(AspOutcome::Optimum(Vec::new()));
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::CiStatement;
    use crate::graph::VertexSet;

    fn one_indep() -> ConstraintSet {
        ConstraintSet::new(
            2,
            vec![CiStatement::new(0, 1, VertexSet::EMPTY, Verdict::Independent, Weight::ONE)],
            WeightScheme::Constant,
        )
        .unwrap()
    }

    #[test]
    fn vadjm_has_one_penalty_rule() {
        let p = emit_program(&one_indep(), AssumptionMode::VadjM, EmitOptions::default()).unwrap();
        assert_eq!(p.text.matches(":~ penalty(X,Y).").count(), 1);
        assert_eq!(p.text.matches(":~ fail(X,Y,C,W).").count(), 1);
        assert!(p.text.contains("indep(0,1,0,1)."));
        assert!(!p.text.contains("@2"));
        let lex = EmitOptions { lexicographic: true, ..Default::default() };
        let p = emit_program(&one_indep(), AssumptionMode::VadjM, lex).unwrap();
        assert!(p.text.contains("[W@2,X,Y,C]"));
    }

    #[test]
    fn empty_set_has_no_facts() {
        let cs = ConstraintSet::new(3, vec![], WeightScheme::Constant).unwrap();
        let p = emit_program(&cs, AssumptionMode::Faithfulness, EmitOptions::default()).unwrap();
        let facts = p.text.split("% Statements.\n").nth(1).unwrap();
        assert_eq!(facts.trim(), "#show edge/2.\n#show conf/2.");
    }

    #[test]
    fn vadjf_polarity_flag() {
        let cs = one_indep();
        let prose = emit_program(&cs, AssumptionMode::VadjF, EmitOptions::default()).unwrap();
        assert!(prose.text.contains("fail(X,Y,C,W) :- indep(X,Y,C,W), vadj(X,Y)."));
        let printed = EmitOptions { printed_vadjf_rule: true, ..Default::default() };
        let lit = emit_program(&cs, AssumptionMode::VadjF, printed).unwrap();
        assert!(lit.text.contains(":- not vadj(X,Y), indep(X,Y,C,W)."));
    }

    #[test]
    fn weights_and_hard_statements() {
        let cs = ConstraintSet::new(
            3,
            vec![
                CiStatement::new(0, 2, VertexSet::singleton(1), Verdict::Independent, Weight::Finite(0.25)),
                CiStatement::new(0, 1, VertexSet::EMPTY, Verdict::Dependent, Weight::Infinite),
            ],
            WeightScheme::Constant,
        )
        .unwrap();
        let p = emit_program(&cs, AssumptionMode::Faithfulness, EmitOptions::default()).unwrap();
        assert_eq!(p.weight_scale, WEIGHT_SCALE);
        assert!(p.text.contains("indep(0,2,2,250)."));
        assert!(p.text.contains("hdep(0,1,0)."));
        assert!(p.text.contains("in(2,1)."));
        let noi = emit_program(&cs, AssumptionMode::NoIMin, EmitOptions::default()).unwrap();
        assert!(noi.text.contains("indep(0,2,2,1)."));
    }

    #[test]
    fn emission_is_deterministic() {
        let cs = one_indep();
        for mode in AssumptionMode::ALL {
            let a = emit_program(&cs, mode, EmitOptions::default()).unwrap();
            let b = emit_program(&cs, mode, EmitOptions::default()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn parses_optimizer_output() {
        let out = "Answer: 1\nedge(0,1)\nOptimization: 4 2\nAnswer: 2\n\nOptimization: 3 1\nOPTIMUM FOUND\n";
        assert_eq!(parse_optimizer_output(out), Some(AspOutcome::Optimum(vec![3, 1])));
        assert_eq!(parse_optimizer_output("UNSATISFIABLE\n"), Some(AspOutcome::Unsatisfiable));
        assert_eq!(parse_optimizer_output("Answer: 1\n\nSATISFIABLE\n"), Some(AspOutcome::Optimum(vec![])));
        assert_eq!(parse_optimizer_output("garbage"), None);
    }
}
