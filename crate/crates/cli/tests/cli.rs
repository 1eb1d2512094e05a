use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn smcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smcm")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = smcm(args);
    assert!(
        out.status.success(),
        "smcm {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_test_solve_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    ok(&["gen", "--n", "4", "--seed", "3", "--samples", "300", "--out", p(&model)]);
    for f in ["model.graph", "B.csv", "omega.csv", "data.csv", "config.json"] {
        assert!(model.join(f).exists(), "{f} missing");
    }
    let cs = dir.path().join("c.csv");
    ok(&["test", "--data", p(&model.join("data.csv")), "--alpha", "0.05", "--out", p(&cs)]);
    assert!(fs::read_to_string(&cs).unwrap().starts_with("x,y,cond,verdict,weight\n"));
    assert!(dir.path().join("c.csv.config.json").exists());

    let sol = dir.path().join("sol");
    let stdout = ok(&["solve", "--constraints", p(&cs), "--mode", "vadjf", "--all", "--space", "mag", "--out", p(&sol)]);
    assert!(stdout.contains("mode vadjf: objective"));
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(sol.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["mode"], "vadjf");
    let written = result["solutions_written"].as_u64().unwrap();
    assert!(written >= 1);
    assert!(sol.join("solution_0.graph").exists());
    assert!(sol.join(format!("solution_{}.graph", written - 1)).exists());

    let eval = ok(&["eval", "--truth", p(&model.join("model.graph")), "--solutions", p(&sol)]);
    assert!(eval.contains("tp ") && eval.contains("fpr "));
}

#[test]
fn solve_reports_hard_infeasibility_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let cs = dir.path().join("c.csv");
    // 0 and 1 become dependent given 2 only through 2, which contradicts 0 ⫫ 2.
    fs::write(&cs, "x,y,cond,verdict,weight\n0,1,,indep,inf\n0,2,,indep,inf\n0,1,2,dep,inf\n").unwrap();
    let out = ok(&["solve", "--constraints", p(&cs), "--mode", "faithfulness", "--out", p(&dir.path().join("s"))]);
    assert!(out.contains("objective inf"));
}

#[test]
fn emit_asp_writes_program() {
    let dir = tempfile::tempdir().unwrap();
    let cs = dir.path().join("c.csv");
    fs::write(&cs, "x,y,cond,verdict,weight\n0,1,,indep,1\n").unwrap();
    let lp = dir.path().join("p.lp");
    let out = Command::new(env!("CARGO_BIN_EXE_smcm"))
        .args(["emit-asp", "--constraints", p(&cs), "--mode", "vadjm", "--out", p(&lp)])
        .env_remove("SMCM_ASP_SOLVER")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&lp).unwrap();
    assert!(text.contains("indep(0,1,0,1)."));
    assert!(text.contains(":~ penalty(X,Y)."));
}

#[test]
fn oracle_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |out: &Path| {
        vec!["oracle-run".to_owned(), "--n".into(), "4".into(), "--models".into(), "10".into(), "--seed".into(),
             "7".into(), "--out".into(), out.to_str().unwrap().into()]
    };
    let run = |out: &Path| {
        let v = args(out);
        ok(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let first = run(&a);
    run(&b);
    assert!(first.contains("rows disagreeing with Faithfulness: 0"));
    assert_eq!(fs::read(a.join("report.csv")).unwrap(), fs::read(b.join("report.csv")).unwrap());
    assert!(a.join("times.csv").exists() && a.join("config.json").exists());
}

#[test]
fn sample_run_and_bench_write_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    ok(&[
        "sample-run", "--n", "4", "--models", "2", "--datasets", "1", "--samples", "200", "--alphas", "0.01,0.1",
        "--schemes", "cw,lw", "--lw-priors", "0.5", "--modes", "faithfulness,vadjf", "--workers", "1", "--out", p(&s),
    ]);
    let report = fs::read_to_string(s.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * (2 + 1) * 2);
    assert!(fs::read_to_string(s.join("roc.csv")).unwrap().starts_with("mode,scheme,param,fpr,tpr"));

    let t = dir.path().join("t");
    ok(&["bench", "--n", "4", "--models", "2", "--modes", "vadjf,vadjm", "--out", p(&t)]);
    let times = fs::read_to_string(t.join("times.csv")).unwrap();
    assert!(times.starts_with("mode,rank,seconds\n"));
    assert_eq!(times.lines().count(), 1 + 4);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# experiment\nn=3\nmodels=2\nseed=1\nworkers=1\n").unwrap();
    let out = dir.path().join("o");
    ok(&["oracle-run", "--config", p(&conf), "--models", "3", "--out", p(&out)]);
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["args"]["common"]["n"], 3);
    assert_eq!(echo["args"]["common"]["models"], 3);
    assert_eq!(fs::read_to_string(out.join("report.csv")).unwrap().lines().count(), 1 + 3 * 4);
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!smcm(&["solve", "--bogus"]).status.success());
    assert!(!smcm(&["frobnicate"]).status.success());
    let cs = dir.path().join("bad.csv");
    fs::write(&cs, "x,y,cond,verdict,weight\n0,1,,perhaps,1\n").unwrap();
    let out = smcm(&["solve", "--constraints", p(&cs), "--out", p(&dir.path().join("s"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("verdict"));
    let missing = smcm(&["eval", "--truth", "/nonexistent.graph", "--solutions", p(dir.path())]);
    assert!(!missing.status.success());
}

#[test]
fn help_lists_flags() {
    let help = ok(&["solve", "--help"]);
    for flag in ["--constraints", "--mode", "--all", "--space", "--max-solutions", "--time-budget", "--seed", "--out"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}
