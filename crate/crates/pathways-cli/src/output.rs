//! Artifact writers and readers. All numbers print with 6 significant
//! digits, timestamps in RFC 3339 UTC, so identical runs serialize to
//! identical bytes.

use anyhow::{bail, Context, Result};
use pathways_core::mcda::Normalized;
use pathways_core::{CriteriaReport, DispatchSolution, Error};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// 6 significant digits, plain notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let dec = (5 - mag).max(0) as usize;
    format!("{x:.dec$}")
}

/// One-line JSON error record for stderr.
pub fn error_record(e: &anyhow::Error) -> String {
    let kind = match e.downcast_ref::<Error>() {
        Some(core) => {
            let debug = format!("{core:?}");
            debug
                .split(|c: char| !c.is_alphanumeric())
                .next()
                .unwrap_or("Unknown")
                .to_string()
        }
        None => "Cli".to_string(),
    };
    serde_json::json!({ "kind": kind, "error": format!("{e:#}") }).to_string()
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

/// Aggregate dispatch trajectory, one row per step.
pub fn write_dispatch_csv(path: &Path, sol: &DispatchSolution) -> Result<()> {
    let mut f = std::io::BufWriter::new(create(path)?);
    writeln!(
        f,
        "timestamp,p_g_kw,p_pv_kw,p_b_c_kw,p_b_d_kw,soc,p_hp_kw,q_oil_kw,total_demand_kw"
    )?;
    let total = sol.total_load();
    for k in 0..sol.p_g.len() {
        let ts = sol.start + chrono::Duration::minutes(i64::from(sol.dt_minutes) * k as i64);
        let hp: f64 = sol.house_p_hp.iter().map(|h| h[k]).sum();
        let oil: f64 = sol.house_q_oil.iter().map(|h| h[k]).sum();
        let soc = sol.soc.get(k).copied().unwrap_or(0.0);
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            ts.format("%Y-%m-%dT%H:%M:%SZ"),
            sig6(sol.p_g[k]),
            sig6(sol.p_pv[k]),
            sig6(sol.p_b_c[k]),
            sig6(sol.p_b_d[k]),
            sig6(soc),
            sig6(hp),
            sig6(oil),
            sig6(total[k]),
        )?;
    }
    Ok(())
}

/// One row per pathway, columns exactly [`CriteriaReport::FIELDS`].
pub fn write_criteria_csv(path: &Path, names: &[String], reports: &[CriteriaReport]) -> Result<()> {
    let mut f = std::io::BufWriter::new(create(path)?);
    writeln!(f, "pathway,{}", CriteriaReport::FIELDS.join(","))?;
    for (name, report) in names.iter().zip(reports) {
        let row: Vec<String> = report.values().iter().map(|v| sig6(*v)).collect();
        writeln!(f, "{},{}", name, row.join(","))?;
    }
    Ok(())
}

/// Read back a criteria table written by [`write_criteria_csv`].
pub fn read_criteria_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let expect = format!("pathway,{}", CriteriaReport::FIELDS.join(","));
    if header != expect {
        bail!("unexpected criteria header: {header}");
    }
    let mut names = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let name = cells.next().unwrap_or_default().to_string();
        let row: Vec<f64> = cells
            .map(|c| c.parse::<f64>().with_context(|| format!("row {}: bad number {c}", i + 2)))
            .collect::<Result<_>>()?;
        if row.len() != CriteriaReport::FIELDS.len() {
            bail!("row {} has {} values, expected 16", i + 2, row.len());
        }
        names.push(name);
        values.push(row);
    }
    Ok((names, values))
}

/// Transition scores with 1-based ranks, in input pathway order.
pub fn write_scores_csv(path: &Path, names: &[String], scores: &[f64]) -> Result<()> {
    let order = pathways_core::rank(scores);
    let mut rank_of = vec![0usize; names.len()];
    for (place, &p) in order.iter().enumerate() {
        rank_of[p] = place + 1;
    }
    let mut f = std::io::BufWriter::new(create(path)?);
    writeln!(f, "pathway,score,rank")?;
    for (i, name) in names.iter().enumerate() {
        writeln!(f, "{},{},{}", name, sig6(scores[i]), rank_of[i])?;
    }
    Ok(())
}

/// Normalized criteria matrix (1 = best per column).
pub fn write_normalized_csv(path: &Path, names: &[String], norm: &Normalized) -> Result<()> {
    let mut f = std::io::BufWriter::new(create(path)?);
    writeln!(f, "pathway,{}", CriteriaReport::FIELDS.join(","))?;
    for (name, row) in names.iter().zip(&norm.values) {
        let cells: Vec<String> = row.iter().map(|v| sig6(*v)).collect();
        writeln!(f, "{},{}", name, cells.join(","))?;
    }
    Ok(())
}

/// Criterion weights: all 1 unless the JSON file overrides by name.
pub fn load_weights(path: Option<&Path>) -> Result<Vec<f64>> {
    let mut weights = vec![1.0; CriteriaReport::FIELDS.len()];
    let Some(path) = path else {
        return Ok(weights);
    };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let map: BTreeMap<String, f64> =
        serde_json::from_str(&text).with_context(|| format!("bad weights file {}", path.display()))?;
    for (name, w) in map {
        match CriteriaReport::FIELDS.iter().position(|f| *f == name) {
            Some(i) => weights[i] = w,
            None => bail!("unknown criterion {name} in weights file"),
        }
    }
    Ok(weights)
}
