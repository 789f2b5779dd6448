//! Uniform-step time series: CSV ingestion with a bounded gap-fill policy,
//! resampling, and renewable scaling.

use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical unit of a series' values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "kW")]
    Kw,
    #[serde(rename = "C")]
    Celsius,
    #[serde(rename = "1")]
    Dimensionless,
}

/// A uniformly sampled series. `values[k]` holds at
/// `start + k*dt`; no gaps remain after ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub start: DateTime<Utc>,
    pub dt_minutes: u32,
    pub unit: Unit,
    pub values: Vec<f64>,
}

/// Longest run of missing rows the loader will fill by linear interpolation.
pub const MAX_GAP_STEPS: i64 = 3;

impl TimeSeries {
    pub fn new(start: DateTime<Utc>, dt_minutes: u32, unit: Unit, values: Vec<f64>) -> Self {
        assert!(dt_minutes > 0, "dt must be positive");
        assert!(!values.is_empty(), "series must be non-empty");
        Self {
            start,
            dt_minutes,
            unit,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt_hours(&self) -> f64 {
        f64::from(self.dt_minutes) / 60.0
    }

    /// Steps per fixed 24 h window.
    pub fn steps_per_day(&self) -> usize {
        (24 * 60 / self.dt_minutes) as usize
    }

    pub fn timestamp(&self, k: usize) -> DateTime<Utc> {
        self.start + Duration::minutes(i64::from(self.dt_minutes) * k as i64)
    }

    /// Total energy in kWh for a power series.
    pub fn energy_kwh(&self) -> f64 {
        debug_assert_eq!(self.unit, Unit::Kw);
        self.values.iter().sum::<f64>() * self.dt_hours()
    }

    /// Sub-series over step indices `[from, to)`.
    pub fn slice_steps(&self, from: usize, to: usize) -> TimeSeries {
        assert!(from < to && to <= self.len(), "slice out of range");
        TimeSeries {
            start: self.timestamp(from),
            dt_minutes: self.dt_minutes,
            unit: self.unit,
            values: self.values[from..to].to_vec(),
        }
    }

    /// Sub-series covering `[from, to)` in time. Errors if the bounds do not
    /// fall on step boundaries or extend past the series.
    pub fn window(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> Result<TimeSeries> {
        let step = i64::from(self.dt_minutes) * 60;
        let offset = (from - self.start).num_seconds();
        let span = (to - from).num_seconds();
        if offset < 0 || span <= 0 || offset % step != 0 || span % step != 0 {
            return Err(Error::WindowMismatch(format!(
                "window [{from}, {to}) does not align with the {} min grid starting {}",
                self.dt_minutes, self.start
            )));
        }
        let k0 = (offset / step) as usize;
        let k1 = k0 + (span / step) as usize;
        if k1 > self.len() {
            return Err(Error::WindowMismatch(format!(
                "window ends {} steps past the series",
                k1 - self.len()
            )));
        }
        Ok(self.slice_steps(k0, k1))
    }
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(t.and_utc());
        }
    }
    None
}

/// Load a `timestamp,value` CSV. The step is inferred from the first two
/// rows; rows must be strictly increasing in time and land on the step grid.
/// Runs of up to [`MAX_GAP_STEPS`] missing rows are filled by linear
/// interpolation; anything longer (or a duplicate/backward timestamp) is a
/// [`Error::NonUniformStep`].
pub fn load_timeseries(path: &Path, unit: Unit) -> Result<TimeSeries> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: display.clone(),
                source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
            },
            _ => Error::ParseError {
                path: display.clone(),
                row: 0,
                reason: e.to_string(),
            },
        })?;

    let mut stamps: Vec<DateTime<Utc>> = Vec::new();
    let mut raw_values: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header line
        let record = record.map_err(|e| Error::ParseError {
            path: display.clone(),
            row,
            reason: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(Error::ParseError {
                path: display.clone(),
                row,
                reason: format!("expected 2 columns, got {}", record.len()),
            });
        }
        let ts = parse_timestamp(&record[0]).ok_or_else(|| Error::ParseError {
            path: display.clone(),
            row,
            reason: format!("bad timestamp {:?}", &record[0]),
        })?;
        let v: f64 = record[1].parse().map_err(|_| Error::ParseError {
            path: display.clone(),
            row,
            reason: format!("bad value {:?}", &record[1]),
        })?;
        if !v.is_finite() {
            return Err(Error::ParseError {
                path: display.clone(),
                row,
                reason: format!("non-finite value {v}"),
            });
        }
        stamps.push(ts);
        raw_values.push(v);
    }

    if stamps.is_empty() {
        return Err(Error::EmptySeries { path: display });
    }
    if stamps.len() == 1 {
        // Single row: step defaults to 5 min, the finest grid used anywhere.
        return Ok(TimeSeries::new(stamps[0], 5, unit, raw_values));
    }

    let step_seconds = (stamps[1] - stamps[0]).num_seconds();
    if step_seconds <= 0 || step_seconds % 60 != 0 {
        return Err(Error::NonUniformStep {
            path: display,
            row: 3,
            gap_steps: 0,
            max_gap_steps: MAX_GAP_STEPS,
        });
    }
    let dt_minutes = (step_seconds / 60) as u32;

    let mut values: Vec<f64> = Vec::with_capacity(raw_values.len());
    values.push(raw_values[0]);
    for i in 1..stamps.len() {
        let row = i + 2;
        let delta = (stamps[i] - stamps[i - 1]).num_seconds();
        if delta <= 0 || delta % step_seconds != 0 {
            return Err(Error::NonUniformStep {
                path: display,
                row,
                gap_steps: 0,
                max_gap_steps: MAX_GAP_STEPS,
            });
        }
        let missing = delta / step_seconds - 1;
        if missing > MAX_GAP_STEPS {
            return Err(Error::NonUniformStep {
                path: display,
                row,
                gap_steps: missing,
                max_gap_steps: MAX_GAP_STEPS,
            });
        }
        let (a, b) = (raw_values[i - 1], raw_values[i]);
        for j in 1..=missing {
            values.push(a + (b - a) * j as f64 / (missing + 1) as f64);
        }
        values.push(b);
    }

    Ok(TimeSeries::new(stamps[0], dt_minutes, unit, values))
}

/// Change the sampling step. Downsampling (coarser step) averages each
/// window, conserving the energy of a power series; upsampling (finer step)
/// holds each value. The target step must be an integer multiple or divisor
/// of the current one.
pub fn resample(ts: &TimeSeries, new_dt_minutes: u32) -> Result<TimeSeries> {
    if new_dt_minutes == 0 {
        return Err(Error::IncompatibleStep {
            from_minutes: ts.dt_minutes,
            to_minutes: new_dt_minutes,
        });
    }
    if new_dt_minutes == ts.dt_minutes {
        return Ok(ts.clone());
    }
    if new_dt_minutes > ts.dt_minutes {
        if new_dt_minutes % ts.dt_minutes != 0 {
            return Err(Error::IncompatibleStep {
                from_minutes: ts.dt_minutes,
                to_minutes: new_dt_minutes,
            });
        }
        let factor = (new_dt_minutes / ts.dt_minutes) as usize;
        if ts.len() % factor != 0 {
            return Err(Error::WindowMismatch(format!(
                "series length {} is not a whole number of {} min windows",
                ts.len(),
                new_dt_minutes
            )));
        }
        let values = ts
            .values
            .chunks_exact(factor)
            .map(|w| w.iter().sum::<f64>() / factor as f64)
            .collect();
        Ok(TimeSeries::new(ts.start, new_dt_minutes, ts.unit, values))
    } else {
        if ts.dt_minutes % new_dt_minutes != 0 {
            return Err(Error::IncompatibleStep {
                from_minutes: ts.dt_minutes,
                to_minutes: new_dt_minutes,
            });
        }
        let factor = (ts.dt_minutes / new_dt_minutes) as usize;
        let mut values = Vec::with_capacity(ts.len() * factor);
        for &v in &ts.values {
            values.extend(std::iter::repeat(v).take(factor));
        }
        Ok(TimeSeries::new(ts.start, new_dt_minutes, ts.unit, values))
    }
}

/// Scale a renewable production series by a capacity factor `m ≥ 0`.
pub fn scale_renewable(base: &TimeSeries, m: f64) -> Result<TimeSeries> {
    if !(m >= 0.0) {
        return Err(Error::NegativeScale(m));
    }
    Ok(TimeSeries::new(
        base.start,
        base.dt_minutes,
        base.unit,
        base.values.iter().map(|v| v * m).collect(),
    ))
}
