//! Subcommand implementations.

use anyhow::{bail, Context, Result};
use pathways_core::mcda::DIRECTIONS;
use pathways_core::{
    assess, load_scenario, normalize, rank, score, CriteriaMatrix, CriteriaReport,
    DispatchSolution, PathwayConfig,
};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::manifest::{resolve, Manifest};
use crate::output::{
    error_record, load_weights, read_criteria_csv, sig6, write_criteria_csv, write_dispatch_csv,
    write_normalized_csv, write_scores_csv,
};
use crate::{RunArgs, SweepParameter};

/// Run `body` under a worker-capped thread pool when requested; pathway and
/// chunk parallelism both inherit the cap.
fn with_pool<T: Send>(workers: Option<usize>, body: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => body(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .context("cannot build worker pool")?
            .install(body),
    }
}

fn filename(pathway: &str) -> String {
    pathway
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Wall-time-free per-chunk record, so logs are byte-stable across runs.
#[derive(Serialize)]
struct LogChunk {
    index: usize,
    start: String,
    steps: usize,
    objective: f64,
    gap_pct: f64,
    bb_nodes: usize,
    timed_out: bool,
}

#[derive(Serialize)]
struct LogPathway {
    name: String,
    objective: f64,
    gap_pct: f64,
    transformer_peak_kva: BTreeMap<String, f64>,
    chunks: Vec<LogChunk>,
}

#[derive(Serialize)]
struct SolveLog {
    scenario: String,
    seed: u64,
    dt_minutes: u32,
    from: String,
    to: String,
    pathways: Vec<LogPathway>,
}

fn log_entry(name: &str, sol: &DispatchSolution) -> LogPathway {
    LogPathway {
        name: name.to_string(),
        objective: sol.objective,
        gap_pct: sol.gap_pct,
        transformer_peak_kva: sol
            .transformer_load
            .iter()
            .map(|(id, series)| (id.clone(), series.iter().fold(0.0, |m: f64, &v| m.max(v))))
            .collect(),
        chunks: sol
            .chunks
            .iter()
            .map(|c| LogChunk {
                index: c.index,
                start: c.start.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                steps: c.steps,
                objective: c.objective,
                gap_pct: c.gap_pct,
                bb_nodes: c.bb_nodes,
                timed_out: c.timed_out,
            })
            .collect(),
    }
}

/// Solve every selected pathway (baseline first) and assess criteria.
fn solve_and_assess(
    manifest: &Manifest,
) -> Result<(Vec<String>, Vec<DispatchSolution>, Vec<CriteriaReport>)> {
    let chunk = manifest.scenario.demand.steps_per_day();
    let solutions: Vec<DispatchSolution> = manifest
        .pathways
        .par_iter()
        .map(|pw| {
            pathways_core::rolling_solve(
                &manifest.scenario,
                pw,
                manifest.window.clone(),
                chunk,
                manifest.seed,
            )
            .map_err(|e| anyhow::anyhow!(e).context(format!("pathway {}", pw.name)))
        })
        .collect::<Result<_>>()?;

    let config = &manifest.scenario.config;
    let base_report = assess(&solutions[0], &manifest.pathways[0], config, None)?;
    let mut reports = vec![base_report];
    for (pw, sol) in manifest.pathways.iter().zip(&solutions).skip(1) {
        reports.push(assess(sol, pw, config, Some(&reports[0]))?);
    }
    let names = manifest.pathways.iter().map(|p| p.name.clone()).collect();
    Ok((names, solutions, reports))
}

pub fn run(args: &RunArgs) -> Result<()> {
    let manifest = resolve(args)?;
    let weights = load_weights(args.weights.as_deref())?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;

    let (names, solutions, reports) =
        with_pool(args.workers, || solve_and_assess(&manifest))?;

    for (name, sol) in names.iter().zip(&solutions) {
        let path = args.out.join(format!("dispatch_{}.csv", filename(name)));
        write_dispatch_csv(&path, sol)?;
        println!(
            "{name}: objective {} $, gap {}%, {} chunks",
            sig6(sol.objective),
            sig6(sol.gap_pct),
            sol.chunks.len()
        );
    }
    write_criteria_csv(&args.out.join("criteria.csv"), &names, &reports)?;

    if names.len() >= 2 {
        let mut matrix = CriteriaMatrix::from_reports(&names, &reports)?;
        // Score from the published precision so `compare criteria.csv`
        // reproduces scores.csv byte for byte.
        for row in &mut matrix.values {
            for v in row {
                *v = sig6(*v).parse().expect("sig6 output is a valid float");
            }
        }
        let norm = normalize(&matrix)?;
        let scores = score(&norm, &weights)?;
        write_scores_csv(&args.out.join("scores.csv"), &names, &scores)?;
        let order = rank(&scores);
        println!("ranking:");
        for (place, &p) in order.iter().enumerate() {
            println!("  {}. {} ({})", place + 1, names[p], sig6(scores[p]));
        }
    }

    let window = &manifest.window;
    let log = SolveLog {
        scenario: args.scenario.display().to_string(),
        seed: manifest.seed,
        dt_minutes: manifest.scenario.demand.dt_minutes,
        from: manifest
            .scenario
            .demand
            .timestamp(window.start)
            .format("%Y-%m-%dT%H:%M:%SZ")
            .to_string(),
        to: manifest
            .scenario
            .demand
            .timestamp(window.end)
            .format("%Y-%m-%dT%H:%M:%SZ")
            .to_string(),
        pathways: names
            .iter()
            .zip(&solutions)
            .map(|(n, s)| log_entry(n, s))
            .collect(),
    };
    std::fs::write(
        args.out.join("solve_log.json"),
        serde_json::to_string_pretty(&log)? + "\n",
    )?;
    Ok(())
}

pub fn compare(criteria_csv: &Path, weights: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let (names, values) = read_criteria_csv(criteria_csv)?;
    let weights = load_weights(weights)?;
    let matrix = CriteriaMatrix {
        pathways: names.clone(),
        criteria: CriteriaReport::FIELDS.iter().map(|s| s.to_string()).collect(),
        directions: DIRECTIONS.to_vec(),
        values,
        weights: weights.clone(),
    };
    let norm = normalize(&matrix)?;
    let scores = score(&norm, &weights)?;

    let out_dir: PathBuf = match out {
        Some(d) => d.to_path_buf(),
        None => criteria_csv.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    write_normalized_csv(&out_dir.join("normalized.csv"), &names, &norm)?;
    write_scores_csv(&out_dir.join("scores.csv"), &names, &scores)?;

    if !norm.degenerate.is_empty() {
        let flat: Vec<&str> = norm
            .degenerate
            .iter()
            .map(|&c| CriteriaReport::FIELDS[c])
            .collect();
        println!("degenerate criteria (all pathways tie): {}", flat.join(", "));
    }
    println!("pathway,score,rank");
    let order = rank(&scores);
    let mut rank_of = vec![0usize; names.len()];
    for (place, &p) in order.iter().enumerate() {
        rank_of[p] = place + 1;
    }
    for (i, name) in names.iter().enumerate() {
        println!("{},{},{}", name, sig6(scores[i]), rank_of[i]);
    }
    Ok(())
}

fn apply(param: SweepParameter, value: f64, pw: &mut PathwayConfig) -> Result<()> {
    match param {
        SweepParameter::CutoffTemp => pw.hp_cutoff_temp_c = value,
        SweepParameter::IndoorSetpoint => {
            if value >= pw.comfort_max_c {
                bail!(
                    "setpoint {value} is not below the comfort ceiling {}",
                    pw.comfort_max_c
                );
            }
            pw.comfort_min_c = value;
        }
        SweepParameter::PvScale => {
            if value < 0.0 {
                bail!("pv scale must be non-negative");
            }
            pw.pv_scale = value;
        }
    }
    Ok(())
}

pub fn sensitivity(args: &RunArgs, param: SweepParameter, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("sensitivity needs a non-empty grid");
    }
    let manifest = resolve(args)?;
    if manifest.pathways.len() < 2 {
        bail!("sensitivity needs at least one pathway besides the baseline");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;

    let rows = with_pool(args.workers, || {
        let chunk = manifest.scenario.demand.steps_per_day();
        let config = &manifest.scenario.config;
        // The baseline never carries the swept parameter; solve it once.
        let base_sol = pathways_core::rolling_solve(
            &manifest.scenario,
            &manifest.pathways[0],
            manifest.window.clone(),
            chunk,
            manifest.seed,
        )?;
        let base_report = assess(&base_sol, &manifest.pathways[0], config, None)?;

        let mut rows: Vec<(f64, String, f64, f64)> = Vec::new();
        for &value in grid {
            let results: Vec<Result<(String, CriteriaReport)>> = manifest.pathways[1..]
                .par_iter()
                .map(|pw| {
                    let mut pw = pw.clone();
                    apply(param, value, &mut pw)?;
                    let sol = pathways_core::rolling_solve(
                        &manifest.scenario,
                        &pw,
                        manifest.window.clone(),
                        chunk,
                        manifest.seed,
                    )?;
                    let report = assess(&sol, &pw, config, Some(&base_report))?;
                    Ok((pw.name.clone(), report))
                })
                .collect();
            for result in results {
                match result {
                    Ok((name, report)) => {
                        rows.push((value, name, report.saving_pct, report.co2e_reduction_pct));
                    }
                    Err(e) => eprintln!(
                        "{}",
                        error_record(&e.context(format!("grid point {value}")))
                    ),
                }
            }
        }
        Ok(rows)
    })?;

    if rows.is_empty() {
        bail!("every grid point failed");
    }
    let name = match param {
        SweepParameter::CutoffTemp => "cutoff_temp",
        SweepParameter::IndoorSetpoint => "indoor_setpoint",
        SweepParameter::PvScale => "pv_scale",
    };
    let path = args.out.join("sensitivity.csv");
    let mut text = String::from("parameter,value,pathway,cost_saving_pct,co2e_reduction_pct\n");
    for (value, pathway, saving, co2e) in &rows {
        text.push_str(&format!(
            "{name},{},{pathway},{},{}\n",
            sig6(*value),
            sig6(*saving),
            sig6(*co2e)
        ));
    }
    std::fs::write(&path, text)?;
    println!("{} rows -> {}", rows.len(), path.display());
    Ok(())
}

pub fn validate(scenario: &Path) -> Result<()> {
    let s = load_scenario(scenario)?;
    let config = &s.config;
    for (name, ts) in [("pv", &s.pv), ("temperature", &s.temperature)] {
        if ts.dt_minutes != s.demand.dt_minutes
            || ts.start != s.demand.start
            || ts.len() != s.demand.len()
        {
            bail!(
                "{name} series does not align with demand ({} steps at {} min from {})",
                ts.len(),
                ts.dt_minutes,
                ts.start
            );
        }
    }
    println!("scenario: {}", config.name);
    println!(
        "series: {} steps at {} min from {}",
        s.demand.len(),
        s.demand.dt_minutes,
        s.demand.start.format("%Y-%m-%dT%H:%M:%SZ")
    );
    println!(
        "topology: {} transformers, {} houses",
        config.topology.transformers.len(),
        config.topology.houses.len()
    );
    for pw in &config.pathways {
        let marker = if pw.name == config.baseline_pathway { " (baseline)" } else { "" };
        println!(
            "pathway {}{}: hp {} MBtu/h, gamma {}, pv x{}, battery {}",
            pw.name,
            marker,
            pw.hp_size_mbtu_h,
            pw.coordination_gamma,
            pw.pv_scale,
            if pw.use_battery { "on" } else { "off" }
        );
    }
    println!("scenario OK");
    Ok(())
}
