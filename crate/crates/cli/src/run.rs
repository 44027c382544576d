use crate::plan::{ensure_dir, ExperimentPlan};
use anyhow::{Context, Result};
use hdgnet::analysis::{fill_rates, measure_with_run, plot_csv, report_csv, ReportRow, SweepEntry};
use hdgnet::scheme::{SolveConfig, Solution};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

pub const REPORT_FILE: &str = "report.csv";
pub const PLOT_FILE: &str = "plot.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
struct EntryRecord {
    index: usize,
    config: SolveConfig,
    tau: f64,
    status: &'static str,
    error: Option<String>,
    row: Option<ReportRow>,
    wall_seconds: f64,
    snapshot_file: Option<String>,
    /// Grid times actually written, one per requested snapshot time.
    snapshot_times: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    network_source: String,
    network_document: String,
    base_config: &'a SolveConfig,
    k: &'a [usize],
    eps: &'a [f64],
    h: &'a [f64],
    snapshot_requested: &'a [f64],
    snapshot_samples_per_element: usize,
    reference: &'static str,
    jobs: usize,
    report_file: &'static str,
    plot_file: &'static str,
    entries: Vec<EntryRecord>,
    failures: usize,
    wall_seconds: f64,
}

/// Outcome of a sweep as seen by `main`.
#[derive(Debug)]
pub struct RunSummary {
    pub entries: usize,
    pub failures: usize,
}

struct Computed {
    entry: SweepEntry,
    run: Option<Solution>,
    wall: f64,
}

fn compute(plan: &ExperimentPlan) -> Vec<Computed> {
    let problem = &plan.problem;
    plan.configs()
        .into_par_iter()
        .map(|config| {
            let start = Instant::now();
            let outcome = measure_with_run(&config, &problem.topology, &problem.boundary);
            let wall = start.elapsed().as_secs_f64();
            let (outcome, run) = match outcome {
                Ok(m) => (Ok(m.row), Some(m.run)),
                Err(e) => (Err(e.to_string()), None),
            };
            Computed {
                entry: SweepEntry { config, outcome },
                run,
                wall,
            }
        })
        .collect()
}

/// Nearest recorded states to the requested times.
fn snapshot_states<'a>(run: &'a Solution, times: &[f64]) -> Vec<(f64, &'a hdgnet::CoefficientVector)> {
    let traj = &run.trajectory;
    let window = run.tau * (0.5 + 1e-9);
    times
        .iter()
        .filter_map(|&t| traj.find(t, window).map(|i| (traj.times[i], &traj.states[i])))
        .collect()
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Runs the sweep and writes all artifacts; solver failures are recorded
/// per entry and do not abort the sweep.
pub fn run(plan: &ExperimentPlan) -> Result<RunSummary> {
    ensure_dir(&plan.out)?;
    let start = Instant::now();
    let jobs = plan.jobs.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("cannot start worker pool")?;
    let mut computed = pool.install(|| compute(plan));

    // rates only pair entries sharing k, so fill them per k block
    let block = plan.eps.len() * plan.hs.len();
    let mut entries: Vec<SweepEntry> = computed.iter().map(|c| c.entry.clone()).collect();
    for chunk in entries.chunks_mut(block) {
        fill_rates(chunk);
    }
    for (c, e) in computed.iter_mut().zip(&entries) {
        c.entry = e.clone();
    }

    let rows: Vec<ReportRow> = entries.iter().filter_map(|e| e.outcome.clone().ok()).collect();
    write(&plan.out.join(REPORT_FILE), &report_csv(&rows))?;
    write(&plan.out.join(PLOT_FILE), &plot_csv(&rows))?;

    let mut records = Vec::with_capacity(computed.len());
    for (index, c) in computed.iter().enumerate() {
        let mut snapshot_file = None;
        let mut snapshot_times = Vec::new();
        if let (Some(run), false) = (&c.run, plan.snapshots.is_empty()) {
            let states = snapshot_states(run, &plan.snapshots);
            snapshot_times = states.iter().map(|s| s.0).collect();
            let name = format!("snapshot_{index:03}.csv");
            let csv = run
                .space()
                .snapshot_csv(&plan.problem.topology, &states, plan.samples, true);
            write(&plan.out.join(&name), &csv)?;
            snapshot_file = Some(name);
        }
        if let Err(msg) = &c.entry.outcome {
            let cfg = &c.entry.config;
            eprintln!(
                "entry {index} (k = {}, eps = {}, h = {}) failed: {msg}",
                cfg.k, cfg.eps, cfg.h
            );
        }
        records.push(EntryRecord {
            index,
            tau: c.entry.config.tau(),
            config: c.entry.config.clone(),
            status: if c.entry.outcome.is_ok() { "ok" } else { "failed" },
            error: c.entry.outcome.as_ref().err().cloned(),
            row: c.entry.outcome.as_ref().ok().cloned(),
            wall_seconds: c.wall,
            snapshot_file,
            snapshot_times,
        });
    }

    let failures = records.iter().filter(|r| r.error.is_some()).count();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        network_source: plan.source.describe(),
        network_document: plan.problem.to_document(),
        base_config: &plan.base,
        k: &plan.ks,
        eps: &plan.eps,
        h: &plan.hs,
        snapshot_requested: &plan.snapshots,
        snapshot_samples_per_element: plan.samples,
        reference: "two uniform bisections, step tau/4, compared every 4th reference step",
        jobs,
        report_file: REPORT_FILE,
        plot_file: PLOT_FILE,
        entries: records,
        failures,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write(&plan.out.join(MANIFEST_FILE), &json)?;
    Ok(RunSummary {
        entries: manifest.entries.len(),
        failures,
    })
}
