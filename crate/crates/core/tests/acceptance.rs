//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smcm_core::asp::{emit_program, AspOutcome, EmitOptions};
use smcm_core::constraints::oracle_constraints;
use smcm_core::equivalence::markov_equivalent;
use smcm_core::evaluation::{
    run_oracle_experiment, run_sample_experiment, run_timing_experiment, OracleExperimentConfig,
    SampleExperimentConfig, SchemeKind, TimingExperimentConfig,
};
use smcm_core::graph::{pairs, PairState};
use smcm_core::separation::{full_independence_model, independence_model, inducing_path_exists, statement_triples};
use smcm_core::solver::{brute_force_solve, objective, SearchSpace};
use smcm_core::{
    latent_project, m_separated, smcm_to_mag, solve, AssumptionMode, CiStatement, Confounding, ConstraintSet,
    GraphView, MixedGraph, Smcm, SolverConfig, Verdict, VertexSet, Weight, WeightScheme,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn oracle_conservativeness() -> Outcome {
    let cfg = OracleExperimentConfig {
        n: 5,
        models: 50,
        avg_degree: 1.5,
        confounding: Some(Confounding::Sparse(2)),
        seed: 2024,
        workers: 1,
        ..Default::default()
    };
    let rep = run_oracle_experiment(&cfg).map_err(|e| e.to_string())?;
    let agree = (0..cfg.models)
        .filter(|&m| {
            rep.rows
                .iter()
                .filter(|r| r.model == m)
                .all(|r| r.agrees_with_faithfulness == Some(true) && !r.timed_out && !r.truncated)
        })
        .count();
    let truth = rep.rows.iter().all(|r| r.contains_truth == Some(true));
    let classes: u64 = rep.rows.iter().filter(|r| r.mode == AssumptionMode::Faithfulness).map(|r| r.solution_count).sum();
    check(
        agree == cfg.models && truth,
        format!("{agree}/{} instances with identical optimal sets ({classes} optimal MAGs in total)", cfg.models),
    )
}

fn inducing_paths() -> Outcome {
    let mut r = rng(2);
    let (mut pairs_checked, mut bad) = (0usize, 0usize);
    for k in 0..200 {
        let n = 2 + k % 5;
        let g = common::random_smcm(&mut r, n, 0.35, 0.3);
        let mag = smcm_to_mag(&g);
        for (x, y) in pairs(n) {
            let rest = VertexSet::full(n).without(x).without(y);
            let separable = (0..1u64 << n)
                .map(VertexSet)
                .filter(|z| z.is_subset(rest))
                .any(|z| common::m_separated_by_paths(&g, x, y, &z.to_vec()));
            let ip = inducing_path_exists(&g, x, y).unwrap();
            let adj = mag.graph().pair_state(x, y) != PairState::None;
            pairs_checked += 1;
            if ip == separable || ip != adj {
                bad += 1;
            }
        }
    }
    check(bad == 0, format!("{} of {pairs_checked} pairs consistent", pairs_checked - bad))
}

fn model_preservation() -> Outcome {
    let mut r = rng(3);
    let mut bad_mag = 0;
    for k in 0..200 {
        let n = 2 + k % 5;
        let g = common::random_smcm(&mut r, n, 0.4, 0.3);
        let m = smcm_to_mag(&g);
        if independence_model(&m, n - 2).unwrap() != independence_model(&g, n - 2).unwrap() {
            bad_mag += 1;
        }
    }
    let mut bad_latent = 0;
    for _ in 0..100 {
        let obs = r.random_range(2..=5);
        let lat = r.random_range(0..=3);
        let ld = common::random_latent_dag(&mut r, obs, lat);
        let proj = latent_project(&ld);
        let map = ld.observed();
        for (x, y, z) in statement_triples(obs, obs - 2) {
            let zz: Vec<usize> = z.iter().map(|v| map[v]).collect();
            let marginal = common::m_separated_by_paths(ld.dag(), map[x], map[y], &zz);
            if m_separated(&proj, x, y, z).unwrap() != marginal {
                bad_latent += 1;
                break;
            }
        }
    }
    check(
        bad_mag == 0 && bad_latent == 0,
        format!("MAG conversion {}/200 exact, latent projection {}/100 exact", 200 - bad_mag, 100 - bad_latent),
    )
}

fn markov_equivalence() -> Outcome {
    let mut r = rng(4);
    let (mut bad, mut equivalent) = (0, 0);
    for k in 0..300 {
        let n = 2 + k % 5;
        let a = common::random_mag(&mut r, n);
        let b = common::mag_variant(&mut r, &a);
        let brute = full_independence_model(&a) == full_independence_model(&b);
        equivalent += brute as usize;
        if markov_equivalent(&a, &b).unwrap() != brute {
            bad += 1;
        }
    }
    check(bad == 0, format!("{}/300 agree ({equivalent} equivalent pairs)", 300 - bad))
}

fn solver_optimality() -> Outcome {
    let mut r = rng(5);
    let configs: Vec<(AssumptionMode, bool)> = AssumptionMode::ALL
        .iter()
        .map(|&m| (m, false))
        .chain([(AssumptionMode::VadjM, true)])
        .collect();
    let instances = 100;
    let mut bad = Vec::new();
    for k in 0..instances {
        let density = [0.2, 0.4, 0.7][k % 3];
        let cs = common::random_constraints(&mut r, 4, density, k % 4 == 1, k % 2 == 0);
        for &(mode, lex) in &configs {
            let mut cfg = SolverConfig::new(mode).enumerate(SearchSpace::Smcm).lexicographic(lex);
            cfg.max_solutions = 50_000;
            let fast = solve(&cs, &cfg).unwrap();
            let slow = brute_force_solve(&cs, &cfg).unwrap();
            let same = fast.cost.compare(&slow.cost, lex).is_eq()
                && fast.solution_count == slow.solution_count
                && fast.graphs == slow.graphs;
            if !same {
                bad.push(format!("instance {k} {mode} lex={lex}"));
            }
        }
    }
    let runs = instances * configs.len();
    check(bad.is_empty(), format!("{}/{runs} runs match exhaustive search {bad:?}", runs - bad.len()))
}

fn conflict_rates() -> Outcome {
    let cfg = SampleExperimentConfig {
        n: 5,
        models: 50,
        datasets: 2,
        samples: 500,
        alphas: vec![0.01, 0.05, 0.1],
        schemes: vec![SchemeKind::Constant],
        modes: vec![AssumptionMode::Faithfulness, AssumptionMode::VadjF],
        seed: 6,
        enumerate: false,
        time_budget: Duration::from_secs(300),
        workers: 1,
        ..Default::default()
    };
    let rep = run_sample_experiment(&cfg).map_err(|e| e.to_string())?;
    let f = rep.satisfiable_fraction(AssumptionMode::Faithfulness, None).unwrap();
    let v = rep.satisfiable_fraction(AssumptionMode::VadjF, None).unwrap();
    let rows = rep.rows.len() / 2;
    let ratio = if f > 0.0 { format!("{:.2}", v / f) } else { "inf".into() };
    check(
        v > f,
        format!("{rows} rows per mode: zero-violation Faithfulness {f:.3}, VadjF {v:.3}, ratio {ratio}"),
    )
}

fn timing_ordering() -> Outcome {
    let cfg = TimingExperimentConfig {
        n: 7,
        models: 20,
        samples: 500,
        alpha: 0.05,
        modes: vec![AssumptionMode::Faithfulness, AssumptionMode::VadjF, AssumptionMode::VadjM],
        seed: 7,
        time_budget: Duration::from_secs(60),
        workers: 1,
        ..Default::default()
    };
    let rep = run_timing_experiment(&cfg).map_err(|e| e.to_string())?;
    let med = |m| rep.time_quantile(m, 0.5).unwrap();
    let (f, v, m) = (med(AssumptionMode::Faithfulness), med(AssumptionMode::VadjF), med(AssumptionMode::VadjM));
    let timeouts = rep.rows.iter().filter(|r| r.timed_out).count();
    check(
        v <= f && m <= f,
        format!("median seconds: Faithfulness {f:.4}, VadjF {v:.4}, VadjM {m:.4} ({timeouts} timeouts)"),
    )
}

fn separation_ground_truth() -> Outcome {
    let mut checked = 0usize;
    let mut bad = 0usize;
    let mut compare = |g: &MixedGraph| {
        let n = g.n();
        for (x, y, z) in statement_triples(n, n - 2) {
            checked += 1;
            if m_separated(g, x, y, z).unwrap() != common::m_separated_by_paths(g, x, y, &z.to_vec()) {
                bad += 1;
            }
        }
    };
    for code in 0..216usize {
        let states: Vec<PairState> = (0..3).map(|k| PairState::ALL[(code / 6usize.pow(k)) % 6]).collect();
        compare(&MixedGraph::from_pair_states(3, &states).unwrap());
    }
    let mut r = rng(8);
    for _ in 0..500 {
        compare(common::random_smcm(&mut r, 6, 0.4, 0.3).graph());
    }
    check(bad == 0, format!("{}/{checked} triples agree with path enumeration", checked - bad))
}

fn asp_emission() -> Outcome {
    let g = Smcm::from_edges(3, &[(0, 1), (2, 1)], &[]).unwrap();
    let cs = oracle_constraints(&g, 1).unwrap();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let lex = EmitOptions { lexicographic: true, ..Default::default() };
    let printed = EmitOptions { printed_vadjf_rule: true, ..Default::default() };
    let cases = [
        ("collider_faithfulness.lp", AssumptionMode::Faithfulness, EmitOptions::default()),
        ("collider_vadjf.lp", AssumptionMode::VadjF, EmitOptions::default()),
        ("collider_vadjf_printed.lp", AssumptionMode::VadjF, printed),
        ("collider_vadjm.lp", AssumptionMode::VadjM, EmitOptions::default()),
        ("collider_vadjm_lex.lp", AssumptionMode::VadjM, lex),
        ("collider_noimin.lp", AssumptionMode::NoIMin, EmitOptions::default()),
    ];
    let mut golden_ok = 0;
    for (file, mode, opts) in cases {
        let text = emit_program(&cs, mode, opts).unwrap().text;
        if std::fs::read_to_string(dir.join(file)).ok().as_deref() == Some(text.as_str()) {
            golden_ok += 1;
        }
    }
    let golden = format!("golden {golden_ok}/{}", cases.len());
    let Some(cmd) = common::asp_solver() else {
        return check(golden_ok == cases.len(), format!("{golden}; external solver not configured, cross-check skipped"));
    };
    let mut r = rng(9);
    let (mut runs, mut bad) = (0, Vec::new());
    for k in 0..20 {
        let cs = common::random_constraints(&mut r, 5, 0.15, false, false);
        for mode in AssumptionMode::ALL {
            let native = solve(&cs, &SolverConfig::new(mode)).unwrap();
            let prog = emit_program(&cs, mode, EmitOptions::default()).unwrap();
            runs += 1;
            let matches = match common::run_asp(&cmd, &prog) {
                AspOutcome::Optimum(costs) => {
                    native.cost.hard == 0 && costs.iter().sum::<i64>() as f64 == native.objective
                }
                AspOutcome::Unsatisfiable => native.cost.hard > 0,
            };
            if !matches {
                bad.push(format!("instance {k} {mode}"));
            }
        }
    }
    check(
        golden_ok == cases.len() && bad.is_empty(),
        format!("{golden}; external optimum matches on {}/{runs} runs {bad:?}", runs - bad.len()),
    )
}

/// Adjacency-faithfulness: an independence is violated only when its pair
/// is adjacent.
fn adjacency_faithfulness_violations(g: &Smcm, cs: &ConstraintSet) -> usize {
    cs.statements()
        .iter()
        .filter(|s| match s.verdict {
            Verdict::Dependent => m_separated(g, s.x, s.y, s.cond).unwrap(),
            Verdict::Independent => g.graph().pair_state(s.x, s.y) != PairState::None,
        })
        .count()
}

fn negative_examples() -> Outcome {
    let chain = Smcm::from_edges(3, &[(0, 1), (1, 2)], &[]).unwrap();
    let cs = oracle_constraints(&chain, 1).unwrap();
    let fig1 = Smcm::from_edges(3, &[(0, 1), (1, 2)], &[(1, 2)]).unwrap();
    let adj_f = adjacency_faithfulness_violations(&fig1, &cs);
    let vadjf = objective(&fig1, &cs, AssumptionMode::VadjF).unwrap().total();

    let dep = ConstraintSet::new(
        2,
        vec![CiStatement::new(0, 1, VertexSet::EMPTY, Verdict::Dependent, Weight::ONE)],
        WeightScheme::Constant,
    )
    .unwrap();
    let both = Smcm::from_edges(2, &[(0, 1)], &[(0, 1)]).unwrap();
    let singles = [Smcm::from_edges(2, &[(0, 1)], &[]).unwrap(), Smcm::from_edges(2, &[], &[(0, 1)]).unwrap()];
    let none = Smcm::from_edges(2, &[], &[]).unwrap();
    let markov = |g: &Smcm| objective(g, &dep, AssumptionMode::VadjM).unwrap().violation == 0.0;
    let vadj = |g: &Smcm| objective(g, &dep, AssumptionMode::VadjM).unwrap().total();
    // Edge-count minimality rejects the two-edge graph, since dropping either
    // edge keeps the Markov condition; virtual-adjacency minimality does not.
    let edge_min_fails = markov(&both) && singles.iter().all(markov) && !markov(&none);
    let vadj_min_holds = singles.iter().all(|g| vadj(g) == vadj(&both))
        && vadj(&both) == solve(&dep, &SolverConfig::new(AssumptionMode::VadjM)).unwrap().objective;
    check(
        adj_f == 0 && vadjf > 0.0 && edge_min_fails && vadj_min_holds,
        format!(
            "adjacency-faithfulness violations {adj_f}, VadjF objective {vadjf}; \
             edge-count minimality fails {edge_min_fails}, vadj minimality holds {vadj_min_holds}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle conservativeness", oracle_conservativeness),
        ("inducing path equivalences", inducing_paths),
        ("model preservation", model_preservation),
        ("Markov equivalence checker", markov_equivalence),
        ("solver optimality", solver_optimality),
        ("conflict-rate direction", conflict_rates),
        ("timing ordering", timing_ordering),
        ("m-separation ground truth", separation_ground_truth),
        ("ASP emission", asp_emission),
        ("negative examples", negative_examples),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
