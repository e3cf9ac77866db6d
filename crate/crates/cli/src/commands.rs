//! The four experiment subcommands.

use std::path::Path;

use cast_core::analysis::{expected_log_mse, marginalize, summarize, RunSummary, SweepCell, Which};
use cast_core::engine::run_batch;
use cast_core::sweep::{heatmap, run_sweep};
use cast_core::{Mode, RunTrace, StepRecord};
use serde::Serialize;

use crate::config::{resolved, CompareFile, Document, RunFile, SweepFile};
use crate::output::{write_json, Csv, Field, Header};
use crate::CliError;

fn runtime(e: cast_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn progress(msg: &str) {
    eprintln!("cast: {msg}");
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn histogram_rows(csv: &mut Csv, step: u64, counts: &[u64], upper: f64) {
    let width = upper / counts.len() as f64;
    for (k, &count) in counts.iter().enumerate() {
        csv.row(&[&step, &(k as f64 * width), &((k + 1) as f64 * width), &count]);
    }
}

#[derive(Serialize)]
struct SingleRun<'a> {
    #[serde(flatten)]
    summary: &'a RunSummary,
    evaluations: u64,
}

#[derive(Serialize)]
struct Aggregate<'a> {
    repeats: usize,
    success_rate: f64,
    mean_steps_to_basin: Option<f64>,
    mean_final_best_logmse: f64,
    runs: &'a [RunSummary],
}

fn aggregate(summaries: &[RunSummary]) -> Aggregate<'_> {
    let hits: Vec<f64> = summaries.iter().filter_map(|s| s.steps_to_basin).map(|s| s as f64).collect();
    Aggregate {
        repeats: summaries.len(),
        success_rate: summaries.iter().filter(|s| s.success).count() as f64 / summaries.len() as f64,
        mean_steps_to_basin: (!hits.is_empty()).then(|| mean(hits.iter().copied())),
        mean_final_best_logmse: mean(summaries.iter().map(|s| cast_core::analysis::log_mse(s.final_best_mse))),
        runs: summaries,
    }
}

/// `run`: one or more independent runs of a single configuration.
pub fn cmd_run(doc: &Document, out: &Path) -> Result<(), CliError> {
    let setup = RunFile::from_document(doc)?;
    let (file, config) = (&setup.file, &setup.config);
    let header = Header { command: "run", seed: config.seed, config: resolved(file) };
    progress(&format!(
        "run: {} x {} steps, {} particles, {}D {}",
        file.repeats, file.steps, file.particles, file.dimension, file.objective
    ));
    let traces = run_batch(config, file.repeats, config.seed).map_err(runtime)?;
    let upper = 2.0 * config.mode.t_bar();
    let summaries: Vec<RunSummary> =
        traces.iter().map(|t| summarize(t, &config.objective, file.shrink)).collect();

    for (i, (trace, summary)) in traces.iter().zip(&summaries).enumerate() {
        let dir = if file.repeats == 1 { out.to_path_buf() } else { out.join(format!("run_{i:03}")) };
        let mut csv = Csv::new(&["step", "best_mse", "avg_mse", "m1", "m2", "var", "geo_mean", "best_T"]);
        for r in &trace.records {
            csv.row(&[&r.step, &r.best_mse, &r.avg_mse, &r.m1, &r.m2, &r.variance, &r.geo_mean, &r.best_temperature]);
        }
        csv.write(&dir.join("trace.csv"), &header)?;

        let mut hist = Csv::new(&["step", "bin_low", "bin_high", "count"]);
        for r in &trace.records {
            let counts: Vec<u64> = r.histogram.iter().map(|&c| u64::from(c)).collect();
            if !counts.is_empty() {
                histogram_rows(&mut hist, r.step, &counts, upper);
            }
        }
        hist.write(&dir.join("histogram.csv"), &header)?;
        write_json(&dir.join("summary.json"), &header, &SingleRun { summary, evaluations: trace.evaluations })?;
    }
    if file.repeats > 1 {
        write_json(&out.join("summary.json"), &header, &aggregate(&summaries))?;
    }
    progress(&format!("wrote {}", out.display()));
    Ok(())
}

fn ensemble(traces: &[RunTrace], k: usize, f: impl Fn(&StepRecord) -> f64) -> f64 {
    mean(traces.iter().map(|t| f(&t.records[k])))
}

#[derive(Serialize)]
struct ArmSummary<'a> {
    name: &'a str,
    cooling: String,
    #[serde(flatten)]
    aggregate: Aggregate<'a>,
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    arms: Vec<ArmSummary<'a>>,
}

/// `compare`: several cooling strategies under matched budgets.
pub fn cmd_compare(doc: &Document, out: &Path) -> Result<(), CliError> {
    let setup = CompareFile::from_document(doc)?;
    let file = &setup.file;
    let header = Header { command: "compare", seed: file.seed, config: resolved(file) };

    let mut results = Vec::with_capacity(setup.arms.len());
    for (name, config) in &setup.arms {
        progress(&format!("compare: arm {name}, {} x {} steps", file.repeats, file.steps));
        let traces = run_batch(config, file.repeats, config.seed).map_err(runtime)?;
        let best = expected_log_mse(&traces, Which::Best).map_err(runtime)?;
        let avg = expected_log_mse(&traces, Which::Average).map_err(runtime)?;
        results.push((name.as_str(), config, traces, best, avg));
    }
    let steps: Vec<u64> = results[0].2[0].records.iter().map(|r| r.step).collect();
    for (name, _, traces, _, _) in &results {
        let theirs: Vec<u64> = traces[0].records.iter().map(|r| r.step).collect();
        if theirs != steps {
            return Err(CliError::Config(format!("arm {name} records different steps than arm {}", results[0].0)));
        }
    }

    let mut columns = vec!["step".to_string()];
    columns.extend(results.iter().map(|r| format!("{}_best_logmse", r.0)));
    columns.extend(results.iter().map(|r| format!("{}_avg_logmse", r.0)));
    for (name, config, ..) in &results {
        match config.mode {
            Mode::Cast(_) => {
                columns.extend(["m1", "geo_mean", "best_T"].map(|c| format!("{name}_{c}")));
            }
            Mode::Baseline(_) => columns.push(format!("{name}_T")),
        }
    }
    let mut csv = Csv::new(&columns);
    for (k, step) in steps.iter().enumerate() {
        let mut row = vec![step.to_string()];
        row.extend(results.iter().map(|r| r.3[k].field()));
        row.extend(results.iter().map(|r| r.4[k].field()));
        for (_, config, traces, ..) in &results {
            let f = |x: &f64| x.field();
            match config.mode {
                Mode::Cast(_) => {
                    row.push(f(&ensemble(traces, k, |r| r.m1)));
                    row.push(f(&ensemble(traces, k, |r| r.geo_mean)));
                    row.push(f(&ensemble(traces, k, |r| r.best_temperature)));
                }
                Mode::Baseline(_) => row.push(f(&ensemble(traces, k, |r| r.m1))),
            }
        }
        csv.push_raw(row);
    }
    csv.write(&out.join("compare.csv"), &header)?;

    let summaries: Vec<Vec<RunSummary>> = results
        .iter()
        .map(|(_, config, traces, ..)| traces.iter().map(|t| summarize(t, &config.objective, file.shrink)).collect())
        .collect();
    let arms = results
        .iter()
        .zip(&summaries)
        .map(|((name, config, ..), s)| ArmSummary {
            name,
            cooling: match config.mode {
                Mode::Cast(_) => "cast".into(),
                Mode::Baseline(s) => s.kind.to_string(),
            },
            aggregate: aggregate(s),
        })
        .collect();
    write_json(&out.join("summary.json"), &header, &CompareSummary { arms })?;
    progress(&format!("wrote {}", out.display()));
    Ok(())
}

#[derive(Serialize)]
struct SweepTable<'a> {
    cells: &'a [SweepCell],
}

/// `sweep`: a full-factorial grid over the exchange parameters.
pub fn cmd_sweep(doc: &Document, out: &Path) -> Result<(), CliError> {
    let setup = SweepFile::from_document(doc)?;
    let plan = &setup.plan;
    let header = Header { command: "sweep", seed: plan.seed, config: resolved(&setup.file) };
    progress(&format!("sweep: {} runs per cell, up to {} steps", plan.runs_per_cell, plan.max_steps));
    let cells = run_sweep(plan).map_err(runtime)?;

    let mut csv = Csv::new(&[
        "mu",
        "lambda",
        "kappa",
        "gamma",
        "t_var",
        "valid",
        "runs",
        "success_rate",
        "mean_steps_to_basin",
        "normalized_weighted_steps",
    ]);
    for c in &cells {
        let p = &c.params;
        csv.row(&[
            &p.mu,
            &p.lambda,
            &p.kappa,
            &p.gamma,
            &p.t_var,
            &c.valid,
            &c.runs,
            &c.success_rate,
            &c.mean_steps_to_basin,
            &c.normalized_weighted_steps,
        ]);
    }
    csv.write(&out.join("cells.csv"), &header)?;
    write_json(&out.join("cells.json"), &header, &SweepTable { cells: &cells })?;

    for &axis in &setup.swept {
        let nws = marginalize(&cells, axis, |c| c.normalized_weighted_steps).map_err(runtime)?;
        let rate = marginalize(&cells, axis, |c| c.success_rate).map_err(runtime)?;
        let steps = marginalize(&cells, axis, |c| c.mean_steps_to_basin).map_err(runtime)?;
        let mut m = Csv::new(&[axis.name(), "normalized_weighted_steps", "success_rate", "mean_steps_to_basin"]);
        for ((v, a), ((_, b), (_, c))) in nws.iter().zip(rate.iter().zip(&steps)) {
            m.row(&[v, a, b, c]);
        }
        m.write(&out.join(format!("marginal_{}.csv", axis.name())), &header)?;
    }

    let mut h = Csv::new(&["mu", "lambda", "success_rate", "mean_steps"]);
    for cell in heatmap(&cells) {
        h.row(&[&cell.mu, &cell.lambda, &cell.success_rate, &cell.mean_steps]);
    }
    h.write(&out.join("heatmap.csv"), &header)?;
    progress(&format!("wrote {}", out.display()));
    Ok(())
}

/// `decay-study`: ensemble temperature decay against reference curves.
pub fn cmd_decay_study(doc: &Document, out: &Path) -> Result<(), CliError> {
    let setup = RunFile::from_document(doc)?;
    let (file, config) = (&setup.file, &setup.config);
    if !matches!(config.mode, Mode::Cast(_)) {
        return Err(doc.error(&format!("`cooling`: decay-study needs cooling = \"cast\", got {:?}", file.cooling)));
    }
    let header = Header { command: "decay-study", seed: config.seed, config: resolved(file) };
    progress(&format!("decay-study: {} x {} steps, {} particles", file.repeats, file.steps, file.particles));
    let traces = run_batch(config, file.repeats, config.seed).map_err(runtime)?;
    let t_bar = config.mode.t_bar();

    let series = |t: &RunTrace| -> Vec<StepRecord> {
        std::iter::once(t.initial.clone()).chain(t.records.iter().cloned()).collect()
    };
    let all: Vec<Vec<StepRecord>> = traces.iter().map(series).collect();
    let mut curve = Csv::new(&["step", "m1", "m2", "geo_mean", "ref_log", "ref_geo"]);
    let mut hist = Csv::new(&["step", "bin_low", "bin_high", "count"]);
    for k in 0..all[0].len() {
        let step = all[0][k].step;
        let at = |f: fn(&StepRecord) -> f64| mean(all.iter().map(|s| f(&s[k])));
        let ref_log = t_bar / (step as f64 + std::f64::consts::E).ln();
        let ref_geo = t_bar * file.ref_alpha.powf(step as f64);
        curve.row(&[&step, &at(|r| r.m1), &at(|r| r.m2), &at(|r| r.geo_mean), &ref_log, &ref_geo]);

        let mut counts = vec![0u64; file.bins];
        for s in &all {
            for (c, &n) in counts.iter_mut().zip(&s[k].histogram) {
                *c += u64::from(n);
            }
        }
        if !counts.is_empty() {
            histogram_rows(&mut hist, step, &counts, 2.0 * t_bar);
        }
    }
    curve.write(&out.join("decay.csv"), &header)?;
    hist.write(&out.join("histogram.csv"), &header)?;
    progress(&format!("wrote {}", out.display()));
    Ok(())
}
