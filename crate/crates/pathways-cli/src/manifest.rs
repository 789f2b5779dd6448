//! Resolution of command-line arguments into a ready-to-solve manifest:
//! loaded scenario, aligned window, ordered pathway list.

use anyhow::{bail, Context, Result};
use chrono::{DateTime, NaiveDate, Utc};
use pathways_core::{load_scenario, resample, PathwayConfig, Scenario};
use std::ops::Range;

use crate::RunArgs;

pub struct Manifest {
    pub scenario: Scenario,
    /// Step indices into the (possibly resampled) series.
    pub window: Range<usize>,
    /// Selected pathways in run order; index 0 is the baseline.
    pub pathways: Vec<PathwayConfig>,
    pub seed: u64,
}

/// Accept `YYYY-MM-DD` (midnight UTC) or a full RFC 3339 timestamp.
fn parse_instant(text: &str) -> Result<DateTime<Utc>> {
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc());
    }
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .with_context(|| format!("cannot parse {text} as YYYY-MM-DD or RFC 3339"))
}

pub fn resolve(args: &RunArgs) -> Result<Manifest> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(dt) = args.dt {
        scenario.demand = resample(&scenario.demand, dt)?;
        scenario.pv = resample(&scenario.pv, dt)?;
        scenario.temperature = resample(&scenario.temperature, dt)?;
    }

    let series = &scenario.demand;
    let spd = series.steps_per_day();
    let start = match &args.from {
        Some(t) => parse_instant(t)?,
        None => series.start,
    };
    let end = match &args.to {
        // Default: every whole day the series covers.
        None => series.timestamp(series.len() - series.len() % spd),
        Some(t) => parse_instant(t)?,
    };
    let step_s = i64::from(series.dt_minutes) * 60;
    let offset = (start - series.start).num_seconds();
    let span = (end - start).num_seconds();
    if offset < 0 || span <= 0 || offset % step_s != 0 || span % step_s != 0 {
        bail!(
            "window [{start}, {end}) does not align with the {} min grid starting {}",
            series.dt_minutes,
            series.start
        );
    }
    let k0 = (offset / step_s) as usize;
    let k1 = k0 + (span / step_s) as usize;
    if k1 > series.len() {
        bail!(
            "window ends {} steps past the series ({} steps)",
            k1 - series.len(),
            series.len()
        );
    }

    let mut names: Vec<String> = if args.pathways.is_empty() {
        scenario.config.pathways.iter().map(|p| p.name.clone()).collect()
    } else {
        args.pathways.clone()
    };
    let baseline = scenario.config.baseline_pathway.clone();
    if let Some(i) = names.iter().position(|n| *n == baseline) {
        names.remove(i);
    }
    names.insert(0, baseline);

    let mut pathways = Vec::with_capacity(names.len());
    for name in &names {
        match scenario.config.pathway(name) {
            Some(p) => pathways.push(p.clone()),
            None => bail!("pathway {name} is not defined in the scenario"),
        }
    }

    Ok(Manifest {
        scenario,
        window: k0..k1,
        pathways,
        seed: args.seed,
    })
}
