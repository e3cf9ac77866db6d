use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const MINIMAL: &str = "objective = \"ackley\"\ndimension = 1\nparticles = 100\nsteps = 10\nseed = 1\n";

fn cast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cast"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("cast binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn minimal_run_writes_three_files() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", MINIMAL);
    let o = cast(tmp.path(), &["run", "run.toml", "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let mut files: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    files.sort();
    assert_eq!(files, ["histogram.csv", "summary.json", "trace.csv"]);

    let trace = body(&out.join("trace.csv"));
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("step,best_mse,avg_mse,m1,m2,var,geo_mean,best_T"));
    assert_eq!(lines.count(), 10);
    assert_eq!(body(&out.join("histogram.csv")).lines().count(), 1 + 10 * 50);

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 1);
    assert_eq!(summary["config"]["particles"], 100);
    assert!(summary["success"].is_boolean());
    assert_eq!(summary["evaluations"], 100 * 11);
}

#[test]
fn every_csv_has_a_header() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", MINIMAL);
    assert!(cast(tmp.path(), &["run", "run.toml", "--out", "o", "--seed", "9"]).status.success());
    for name in ["trace.csv", "histogram.csv"] {
        let text = fs::read_to_string(tmp.path().join("o").join(name)).unwrap();
        assert!(text.starts_with("# cast "), "{name}");
        assert!(text.contains("# seed = 9"), "{name}");
        assert!(text.contains("#   particles = 100"), "{name}");
    }
}

#[test]
fn seed_override_is_reproducible_and_matters() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", MINIMAL);
    for out in ["a", "b", "c"] {
        let seed = if out == "c" { "8" } else { "7" };
        assert!(cast(tmp.path(), &["run", "run.toml", "--seed", seed, "--out", out]).status.success());
    }
    let read = |d: &str| fs::read_to_string(tmp.path().join(d).join("trace.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(body(&tmp.path().join("a/trace.csv")), body(&tmp.path().join("c/trace.csv")));
}

#[test]
fn output_does_not_depend_on_jobs() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", &format!("{MINIMAL}repeats = 3\n"));
    for (jobs, out) in [("1", "j1"), ("4", "j4")] {
        let o = cast(tmp.path(), &["run", "run.toml", "--jobs", jobs, "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for run in ["run_000", "run_001", "run_002"] {
        for file in ["trace.csv", "histogram.csv", "summary.json"] {
            let a = fs::read(tmp.path().join("j1").join(run).join(file)).unwrap();
            let b = fs::read(tmp.path().join("j4").join(run).join(file)).unwrap();
            assert!(a == b, "{run}/{file}");
        }
    }
    let agg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("j1/summary.json")).unwrap()).unwrap();
    assert_eq!(agg["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_objective_exits_2_naming_the_key() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.toml", "dimension = 1\nparticles = 100\nsteps = 10\n");
    let o = cast(tmp.path(), &["run", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("objective"), "{}", stderr(&o));
}

#[test]
fn bad_values_exit_2_with_line() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.toml", &format!("{MINIMAL}\nkappa = 1.5\n"));
    let o = cast(tmp.path(), &["run", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:7"), "{}", stderr(&o));

    write(tmp.path(), "typo.toml", &format!("{MINIMAL}partciles = 3\n"));
    let o = cast(tmp.path(), &["run", "typo.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 6") && stderr(&o).contains("partciles"), "{}", stderr(&o));

    let o = cast(tmp.path(), &["run", "nonexistent.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", MINIMAL);
    write(tmp.path(), "blocker", "a file, not a directory");
    let o = cast(tmp.path(), &["run", "run.toml", "--out", "blocker/out"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

const COMPARE: &str = "objective = \"ackley\"\ndimension = 10\nparticles = 100\nsteps = 8\nrepeats = 2\n\n\
    [[arm]]\nname = \"cast\"\nmu = 0\nlambda = 0.95\nkappa = 0.02\ngamma = 0.3\nt_var = 0.0075\n\n\
    [[arm]]\nname = \"sa\"\ncooling = \"log\"\n";

#[test]
fn compare_writes_wide_table() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "cmp.toml", COMPARE);
    let o = cast(tmp.path(), &["compare", "cmp.toml", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = body(&tmp.path().join("o/compare.csv"));
    let mut lines = table.lines();
    assert_eq!(
        lines.next(),
        Some("step,cast_best_logmse,sa_best_logmse,cast_avg_logmse,sa_avg_logmse,cast_m1,cast_geo_mean,cast_best_T,sa_T")
    );
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    for row in &rows {
        let t = row[0];
        let expected = 0.05 / (t + std::f64::consts::E).ln();
        assert!((row[8] - expected).abs() < 1e-15, "log schedule at {t}");
    }
}

#[test]
fn compare_single_repeat_matches_run() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "cmp.toml", &COMPARE.replace("repeats = 2", "repeats = 1"));
    assert!(cast(tmp.path(), &["compare", "cmp.toml", "--out", "c"]).status.success());
    write(
        tmp.path(),
        "run.toml",
        "objective = \"ackley\"\ndimension = 10\nparticles = 100\nsteps = 8\nmu = 0\nlambda = 0.95\n\
         kappa = 0.02\ngamma = 0.3\nt_var = 0.0075\n",
    );
    assert!(cast(tmp.path(), &["run", "run.toml", "--out", "r"]).status.success());
    let trace = body(&tmp.path().join("r/trace.csv"));
    let table = body(&tmp.path().join("c/compare.csv"));
    for (t, c) in trace.lines().skip(1).zip(table.lines().skip(1)) {
        let t: Vec<&str> = t.split(',').collect();
        let c: Vec<&str> = c.split(',').collect();
        let best_mse: f64 = t[1].parse().unwrap();
        let logmse: f64 = c[1].parse().unwrap();
        assert_eq!(logmse, best_mse.max(1e-30).log10());
        assert_eq!(c[5], t[3], "m1");
        assert_eq!(c[7], t[7], "best_T");
    }
}

#[test]
fn compare_needs_two_arms() {
    let tmp = TempDir::new().unwrap();
    let one = COMPARE.split("[[arm]]\nname = \"sa\"").next().unwrap();
    write(tmp.path(), "one.toml", one);
    let o = cast(tmp.path(), &["compare", "one.toml"]);
    assert_eq!(o.status.code(), Some(2));
    write(tmp.path(), "steps.toml", &format!("{COMPARE}steps = 9\n"));
    let o = cast(tmp.path(), &["compare", "steps.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("steps"), "{}", stderr(&o));
}

const SWEEP: &str = "objective = \"ackley\"\ndimension = 1\nparticles = 40\nmax_steps = 30\nruns_per_cell = 3\nseed = 5\n\n\
    [params]\nmu = [0, 1]\nlambda = [0, 1]\n";

#[test]
fn sweep_heatmap_and_marginals() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "plan.toml", SWEEP);
    let o = cast(tmp.path(), &["sweep", "plan.toml", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("s");
    for f in ["cells.csv", "cells.json", "heatmap.csv", "marginal_mu.csv", "marginal_lambda.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    assert!(!dir.join("marginal_kappa.csv").exists());

    let heat = body(&dir.join("heatmap.csv"));
    let rows: Vec<&str> = heat.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let blank: Vec<&&str> = rows.iter().filter(|r| r.ends_with(",,")).collect();
    assert_eq!(blank, [&"1.0,0.0,,"]);

    let cells: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("cells.json")).unwrap()).unwrap();
    assert_eq!(cells["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_is_reproducible_across_jobs() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "plan.toml", SWEEP);
    assert!(cast(tmp.path(), &["sweep", "plan.toml", "--out", "a", "--jobs", "1"]).status.success());
    assert!(cast(tmp.path(), &["sweep", "plan.toml", "--out", "b", "--jobs", "3"]).status.success());
    for f in ["cells.csv", "heatmap.csv", "marginal_mu.csv", "cells.json"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_empty_axis_exits_2() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "plan.toml", SWEEP);
    let o = cast(tmp.path(), &["sweep", "plan.toml", "--set", "params.lambda=[]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
}

#[test]
fn decay_study_reference_curves() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "decay.toml",
        "objective = \"ackley\"\ndimension = 1\nparticles = 300\nsteps = 20\nmu = 0.2\nlambda = 0.7\n\
         kappa = 0.03\ngamma = 1\nt_var = 0.02\nbins = 10\n",
    );
    let o = cast(tmp.path(), &["decay-study", "decay.toml", "--out", "d"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let curve = body(&tmp.path().join("d/decay.csv"));
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("step,m1,m2,geo_mean,ref_log,ref_geo"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][4], 0.05);
    assert_eq!(rows[0][5], 0.05);
    assert!((rows[20][5] - 0.05 * 0.999f64.powi(20)).abs() < 1e-15);

    // Single repeat: each step's histogram counts every particle once.
    let hist = body(&tmp.path().join("d/histogram.csv"));
    let mut total = std::collections::BTreeMap::new();
    for line in hist.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        *total.entry(f[0].parse::<u64>().unwrap()).or_insert(0u64) += f[3].parse::<u64>().unwrap();
    }
    assert_eq!(total.len(), 21);
    assert!(total.values().all(|&c| c == 300));
}

#[test]
fn decay_study_needs_cast_cooling() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.toml", &format!("{MINIMAL}cooling = \"log\"\n"));
    let o = cast(tmp.path(), &["decay-study", "d.toml"]);
    assert_eq!(o.status.code(), Some(2));
}
