use std::path::PathBuf;
use std::process::{Command, Output};

fn martlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_martlab"))
        .args(args)
        .env_remove("MARTLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures", name]
        .iter()
        .collect();
    format!("custom:{}", p.display())
}

#[test]
fn marginals_of_builtins_and_excursion() {
    let o = martlab(&["marginals", "--chain", "alternating", "--horizon", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,x,numerator,denominator\n"));
    assert!(text.contains("\n2,-3,1,4\n"));

    let o = martlab(&["marginals", "--chain", "excursion", "--prob-seq", "harmonic", "--horizon", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\n2,2,1,4\n"));

    let o = martlab(&["marginals", "--chain", "ssrw", "--horizon", "3", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object());
}

#[test]
fn delayed_walk_has_no_exact_marginals() {
    let o = martlab(&["marginals", "--chain", "delayedwalk"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_equal_and_different() {
    let o = martlab(&["compare", "--left", "alternating", "--right", "holding", "--horizon", "18"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("EQUAL"));

    let o = martlab(&["compare", "--left", "alternating", "--right", "ssrw", "--horizon", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("DIFFER alternating ssrw n=2 "));

    let o = martlab(&[
        "compare", "--left", "excursion", "--right", "excursion", "--horizon", "6", "--output", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object());
}

#[test]
fn verify_builtins_fixtures_and_schedule() {
    for chain in ["holding", "alternating", "ssrw"] {
        let o = martlab(&["verify", "--chain", chain, "--horizon", "14"]);
        assert_eq!(o.status.code(), Some(0), "{chain}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("PASS\n"));
    }
    for name in ["lazy-walk.json", "spike.json", "split-hold.json"] {
        let o = martlab(&["verify", "--chain", &fixture(&format!("kernels/{name}")), "--horizon", "10"]);
        assert_eq!(o.status.code(), Some(0), "{name}");
    }
    let o = martlab(&["verify", "--chain", &fixture("invalid/drift.json"), "--horizon", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation n="));

    let o = martlab(&["verify", "--chain", "excursion", "--horizon", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let o = martlab(&["verify", "--chain", "delayedwalk", "--crossings", "4"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn nonmartingale_kernels_are_refused_unless_allowed() {
    let drift = fixture("invalid/drift.json");
    let o = martlab(&["marginals", "--chain", &drift, "--horizon", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = martlab(&["marginals", "--chain", &drift, "--horizon", "4", "--allow-nonmartingale"]);
    assert_eq!(o.status.code(), Some(0));
    let o = martlab(&["marginals", "--chain", &fixture("invalid/unnormalized.json"), "--horizon", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn probe_second_moment_of_the_walk() {
    let o = martlab(&["probe", "--chain", "ssrw", "--p", "2", "--horizon", "10", "--y", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,abs_moment_2,ui_tail_3"));
    for (n, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], n.to_string());
        assert_eq!(cols[1], format!("{n}/1"));
    }
    let o = martlab(&["probe", "--chain", "holding", "--horizon", "0"]);
    assert!(stdout(&o).contains("\n0,0/1,"));
}

#[test]
fn schedule_times_and_cap() {
    let o = martlab(&["schedule", "--crossings", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["t_k"], 1);

    let o = martlab(&["schedule", "--crossings", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let times: Vec<u64> = v.as_array().unwrap().iter().map(|e| e["t_k"].as_u64().unwrap()).collect();
    assert_eq!(times, [1, 2916, 22100]);

    let o = martlab(&["schedule", "--crossings", "3", "--output", "csv"]);
    assert!(stdout(&o).starts_with("k,eps_k,L*_k,t_k,"));

    let o = martlab(&["schedule", "--crossings", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("only 7 of 50"));

    let o = martlab(&["schedule", "--crossings", "3", "--eps-rule", "geometric:2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_across_worker_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_martlab"))
            .args(["simulate", "--chain", "excursion", "--coupling", "nested", "--paths", "3000"])
            .args(["--horizon", "32", "--seed", "9", "--output", "json"])
            .env("MARTLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let report: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(report["master_seed"], 9);
    assert_eq!(report["paths"], 3000);
}

#[test]
fn simulate_kernels_and_delayed_walk_with_check() {
    let o = martlab(&[
        "simulate", "--chain", "holding", "--paths", "100000", "--horizon", "24", "--check", "--times", "4,8,16",
        "--stats", "empirical-marginal,absorption-fraction",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("# source=holding"));
    assert!(text.contains("\nabsorption,"));

    let o = martlab(&["simulate", "--chain", "delayedwalk", "--crossings", "4", "--paths", "2000", "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("\nalternation,"));

    let o = martlab(&["simulate", "--chain", "ssrw", "--stats", "tail-check"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_round_trip_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "chain = \"ssrw\"\nhorizon = 3\nseed = 5\n").unwrap();
    let cfg = path.to_str().unwrap();

    let o = martlab(&["config", "--config", cfg, "--seed", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "chain = \"ssrw\"\nhorizon = 3\nseed = 6\n");

    let out = dir.path().join("mu.csv");
    let o = martlab(&["marginals", "--config", cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.contains("\n3,3,1,8\n"));

    std::fs::write(&path, "chain = \"ssrw\"\nhorizn = 3\n").unwrap();
    let o = martlab(&["marginals", "--config", cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(martlab(&[]).status.code(), Some(2));
    assert_eq!(martlab(&["marginals", "--chain", "nope"]).status.code(), Some(2));
    assert_eq!(martlab(&["marginals", "--chain", "ssrw", "--horizon", "1000"]).status.code(), Some(2));
    assert_eq!(martlab(&["simulate", "--chain", "ssrw", "--window", "5,2"]).status.code(), Some(2));
}
