//! Optimal dispatch over one time window: diesel generation, battery
//! operation, and per-house heat-pump / oil heating subject to power
//! balance, device limits, thermal comfort, and a per-transformer excess
//! penalty.
//!
//! The continuous relaxation is a linear program. The only integrality in
//! the model is the battery charge/discharge exclusivity, restored after the
//! relaxation by netting numerical-noise overlaps and, if a genuine overlap
//! remains, by branch and bound on the offending steps.
//!
//! Windows are solved with periodic boundary conditions: the battery state
//! of charge and each house's air temperature return to their initial
//! values, and the free initial mass temperature matches its final value.
//! This makes chunks independent (they parallelize) and prevents the
//! optimizer from draining any reservoir it never has to refill.

mod lp;
mod solver;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::Serialize;

use crate::device::{cop_lookup, BatteryModel, HouseThermalParams};
use crate::error::{Error, Result};
use crate::scenario::{disaggregate_demand, PathwayConfig, Scenario};
use crate::timeseries::{scale_renewable, TimeSeries, Unit};

pub use solver::solve;

/// Wall-clock budget for one [`solve`] call, seconds.
pub const DEFAULT_TIME_LIMIT_S: f64 = 60.0;

/// Heat source assigned to a whole day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HeatingMode {
    HeatPump,
    Oil,
}

/// Per-day heat source: any day whose minimum outdoor temperature falls
/// below `cutoff_c` runs on oil, all others on heat pumps. Days are fixed
/// 24 h windows from the start of the series.
pub fn heating_mode_schedule(t_out: &TimeSeries, cutoff_c: f64) -> Result<Vec<HeatingMode>> {
    if 24 * 60 % t_out.dt_minutes != 0 {
        return Err(Error::PartialDay {
            len: t_out.len(),
            dt_minutes: t_out.dt_minutes,
        });
    }
    let spd = t_out.steps_per_day();
    if t_out.len() % spd != 0 {
        return Err(Error::PartialDay {
            len: t_out.len(),
            dt_minutes: t_out.dt_minutes,
        });
    }
    let mut modes = Vec::with_capacity(t_out.len());
    for day in t_out.values.chunks_exact(spd) {
        let min = day.iter().cloned().fold(f64::INFINITY, f64::min);
        let mode = if min < cutoff_c {
            HeatingMode::Oil
        } else {
            HeatingMode::HeatPump
        };
        modes.extend(std::iter::repeat(mode).take(spd));
    }
    Ok(modes)
}

/// One transformer with its share of the base (non-heat-pump) demand.
#[derive(Debug, Clone)]
pub struct TransformerSpec {
    pub id: String,
    pub rated_kva: f64,
    /// kW per step over the window.
    pub base_demand: Vec<f64>,
}

/// One heated house in the dispatch problem.
#[derive(Debug, Clone)]
pub struct HouseSpec {
    pub id: String,
    /// Index into [`DispatchProblem::transformers`].
    pub transformer_index: usize,
    pub thermal: HouseThermalParams,
    /// Electrical heat-pump limits, kW.
    pub hp_max_kw: f64,
    pub hp_min_kw: f64,
    pub comfort_min_c: f64,
    pub comfort_max_c: f64,
    /// Indoor air temperature at the window start (and, under periodic
    /// boundaries, at its end).
    pub t_a_init_c: f64,
    /// Mass temperature at the window start; `None` leaves it to the
    /// optimizer (pinned by the periodicity constraint instead).
    pub t_m_init_c: Option<f64>,
}

/// A self-contained dispatch problem over one window.
#[derive(Debug, Clone)]
pub struct DispatchProblem {
    pub start: DateTime<Utc>,
    pub dt_minutes: u32,
    /// Marginal generation cost, $/kWh.
    pub alpha: f64,
    /// No-load generation cost, $/h.
    pub c0: f64,
    pub p_g_max_kw: f64,
    /// Transformer excess penalty, $/kVA per step.
    pub gamma: f64,
    /// Available PV, kW per step; consumed in full (no curtailment).
    pub pv: Vec<f64>,
    pub battery: Option<BatteryModel>,
    /// Force `soc[K] = soc[0]`.
    pub battery_periodic: bool,
    pub transformers: Vec<TransformerSpec>,
    pub houses: Vec<HouseSpec>,
    /// Per-step heat source; empty when `houses` is empty.
    pub modes: Vec<HeatingMode>,
    /// Per-step heat-pump COP at the outdoor temperature; empty when
    /// `houses` is empty.
    pub cop: Vec<f64>,
    /// Outdoor temperature per step; empty when `houses` is empty.
    pub t_out: Vec<f64>,
    /// Force `t_a[K] = t_a[0]` and `t_m[K] = t_m[0]`.
    pub thermal_periodic: bool,
    pub time_limit_s: f64,
}

impl DispatchProblem {
    pub fn steps(&self) -> usize {
        self.pv.len()
    }

    pub fn dt_hours(&self) -> f64 {
        f64::from(self.dt_minutes) / 60.0
    }

    /// Community base demand per step (all transformers).
    pub fn base_demand_total(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.steps()];
        for t in &self.transformers {
            for (acc, v) in total.iter_mut().zip(&t.base_demand) {
                *acc += v;
            }
        }
        total
    }

    /// House indices fed by each transformer, in transformer order.
    pub fn houses_of_transformers(&self) -> Vec<Vec<usize>> {
        let mut map = vec![Vec::new(); self.transformers.len()];
        for (i, h) in self.houses.iter().enumerate() {
            map[h.transformer_index].push(i);
        }
        map
    }
}

/// Solver footprint of one solved chunk.
#[derive(Debug, Clone, Serialize)]
pub struct ChunkStat {
    pub index: usize,
    pub start: DateTime<Utc>,
    pub steps: usize,
    pub solve_ms: u64,
    /// True objective (regularization excluded) for the chunk.
    pub objective: f64,
    pub gap_pct: f64,
    pub bb_nodes: usize,
    pub timed_out: bool,
}

/// Trajectories and cost of a solved window. All power series have one
/// entry per step; state series (`soc`, temperatures) have one extra entry
/// for the terminal state.
#[derive(Debug, Clone)]
pub struct DispatchSolution {
    pub start: DateTime<Utc>,
    pub dt_minutes: u32,
    pub p_g: Vec<f64>,
    pub p_pv: Vec<f64>,
    /// Battery charge/discharge; zeros when the problem has no battery.
    pub p_b_c: Vec<f64>,
    pub p_b_d: Vec<f64>,
    /// State of charge, length steps+1; empty when there is no battery.
    pub soc: Vec<f64>,
    pub base_demand_total: Vec<f64>,
    /// Per house, kW electric per step.
    pub house_p_hp: Vec<Vec<f64>>,
    /// Per house, kW thermal per step.
    pub house_q_oil: Vec<Vec<f64>>,
    /// Per house air / mass temperature, length steps+1.
    pub house_t_a: Vec<Vec<f64>>,
    pub house_t_m: Vec<Vec<f64>>,
    pub transformer_load: BTreeMap<String, Vec<f64>>,
    pub transformer_excess: BTreeMap<String, Vec<f64>>,
    /// Generation cost plus excess penalties over the window, $.
    pub objective: f64,
    pub gap_pct: f64,
    pub chunks: Vec<ChunkStat>,
}

impl DispatchSolution {
    pub fn dt_hours(&self) -> f64 {
        f64::from(self.dt_minutes) / 60.0
    }

    /// Delivered load (base demand plus heat pumps) per step.
    pub fn total_load(&self) -> Vec<f64> {
        (0..self.base_demand_total.len())
            .map(|k| {
                self.base_demand_total[k]
                    + self.house_p_hp.iter().map(|h| h[k]).sum::<f64>()
            })
            .collect()
    }

    /// Per-house delivered oil heat as time series.
    pub fn house_q_oil_series(&self) -> Vec<TimeSeries> {
        self.house_q_oil
            .iter()
            .map(|q| TimeSeries::new(self.start, self.dt_minutes, Unit::Kw, q.clone()))
            .collect()
    }
}

/// Assemble the dispatch problem for `window` (step indices into the
/// scenario's series). The window must cover whole days so the heating-mode
/// schedule is well defined. Ranged thermal parameters are resolved with
/// `seed` (stable per house index).
pub fn build_problem(
    scenario: &Scenario,
    pathway: &PathwayConfig,
    window: Range<usize>,
    seed: u64,
) -> Result<DispatchProblem> {
    let config = &scenario.config;
    let demand = &scenario.demand;
    if window.is_empty() {
        return Err(Error::WindowMismatch("window is empty".into()));
    }
    for (name, ts) in [("pv", &scenario.pv), ("temperature", &scenario.temperature)] {
        if ts.dt_minutes != demand.dt_minutes {
            return Err(Error::IncompatibleStep {
                from_minutes: demand.dt_minutes,
                to_minutes: ts.dt_minutes,
            });
        }
        if ts.start != demand.start || ts.len() != demand.len() {
            return Err(Error::WindowMismatch(format!(
                "{name} series does not cover the demand series ({} vs {} steps from {} vs {})",
                ts.len(),
                demand.len(),
                ts.start,
                demand.start
            )));
        }
    }
    if window.end > demand.len() {
        return Err(Error::WindowMismatch(format!(
            "window ends at step {} but the series has {}",
            window.end,
            demand.len()
        )));
    }
    if 24 * 60 % demand.dt_minutes != 0
        || window.len() % (24 * 60 / demand.dt_minutes as usize) != 0
    {
        return Err(Error::PartialDay {
            len: window.len(),
            dt_minutes: demand.dt_minutes,
        });
    }

    let demand_w = demand.slice_steps(window.start, window.end);
    let pv_w = scale_renewable(&scenario.pv, pathway.pv_scale)?
        .slice_steps(window.start, window.end);
    let t_out_w = scenario.temperature.slice_steps(window.start, window.end);

    let parts = disaggregate_demand(&demand_w, &config.topology)?;
    let transformers: Vec<TransformerSpec> = config
        .topology
        .transformers
        .iter()
        .map(|t| TransformerSpec {
            id: t.id.clone(),
            rated_kva: t.rated_kva,
            base_demand: parts[&t.id].values.clone(),
        })
        .collect();

    let (houses, modes, cop) = if pathway.has_heat_pumps() {
        let t_index: BTreeMap<&str, usize> = config
            .topology
            .transformers
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        let params = config.sample_house_params(seed);
        // Chunks anchor the day-boundary state just above the comfort floor.
        // A midpoint anchor turns the periodic return into a forced all-house
        // max-power ramp on evenings that plunge toward the heat-pump sizing
        // point; an anchor exactly on the floor leaves the interior-point
        // solver on a degenerate face (state pinned against the band bound).
        let t_a_init = pathway.comfort_min_c
            + 0.05 * (pathway.comfort_max_c - pathway.comfort_min_c);
        let houses: Vec<HouseSpec> = config
            .topology
            .houses
            .iter()
            .zip(params)
            .map(|(h, thermal)| HouseSpec {
                id: h.id.clone(),
                transformer_index: t_index[h.transformer_id.as_str()],
                thermal,
                hp_max_kw: pathway.hp_rated_power_kw,
                hp_min_kw: pathway.hp_min_power_kw,
                comfort_min_c: pathway.comfort_min_c,
                comfort_max_c: pathway.comfort_max_c,
                t_a_init_c: t_a_init,
                // Pin the mass too: with a free mass state and only the air
                // anchored, the optimum runs the mass cold all day and meets
                // the air pins with a max-power blast at the first and last
                // step of every chunk.
                t_m_init_c: Some(t_a_init),
            })
            .collect();
        let modes = heating_mode_schedule(&t_out_w, pathway.hp_cutoff_temp_c)?;
        let cop = t_out_w
            .values
            .iter()
            .map(|&t| cop_lookup(&config.devices.cop_curve, t))
            .collect();
        (houses, modes, cop)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let battery = if pathway.use_battery {
        config.devices.battery.clone()
    } else {
        None
    };

    let problem = DispatchProblem {
        start: demand_w.start,
        dt_minutes: demand_w.dt_minutes,
        alpha: config.devices.generator.alpha,
        c0: config.devices.generator.c0,
        p_g_max_kw: config.devices.generator.p_max_kw,
        gamma: pathway.coordination_gamma,
        pv: pv_w.values,
        battery,
        battery_periodic: true,
        transformers,
        houses,
        modes,
        cop,
        t_out: t_out_w.values,
        thermal_periodic: true,
        time_limit_s: DEFAULT_TIME_LIMIT_S,
    };

    // The balance is an equality without curtailment: PV beyond what the
    // load, the battery, and the heat pumps can absorb in a step has nowhere
    // to go, so fail early with a pointer at the worst step.
    let base = problem.base_demand_total();
    let batt_cap = problem.battery.as_ref().map_or(0.0, |b| b.p_max_kw);
    for k in 0..problem.steps() {
        let hp_cap: f64 = if matches!(problem.modes.get(k), Some(HeatingMode::HeatPump)) {
            problem.houses.iter().map(|h| h.hp_max_kw).sum()
        } else {
            0.0
        };
        let absorbable = base[k] + batt_cap + hp_cap;
        if problem.pv[k] > absorbable + 1e-9 {
            return Err(Error::Infeasible {
                hint: Some(format!(
                    "PV {:.1} kW at {} exceeds the maximum absorbable load {:.1} kW and no \
                     curtailment is modeled; lower the PV scale or shrink the window",
                    problem.pv[k],
                    demand_w.timestamp(k),
                    absorbable
                )),
            });
        }
    }
    Ok(problem)
}

/// Solve `window` in independent chunks of `chunk_steps` (whole days) in
/// parallel and concatenate the results in time order.
pub fn rolling_solve(
    scenario: &Scenario,
    pathway: &PathwayConfig,
    window: Range<usize>,
    chunk_steps: usize,
    seed: u64,
) -> Result<DispatchSolution> {
    let spd = 24 * 60 / scenario.demand.dt_minutes as usize;
    if chunk_steps == 0 || chunk_steps % spd != 0 {
        return Err(Error::PartialDay {
            len: chunk_steps,
            dt_minutes: scenario.demand.dt_minutes,
        });
    }
    let ranges: Vec<Range<usize>> = window
        .clone()
        .step_by(chunk_steps)
        .map(|from| from..window.end.min(from + chunk_steps))
        .collect();

    let parts: Vec<DispatchSolution> = ranges
        .into_par_iter()
        .map(|r| {
            let problem = build_problem(scenario, pathway, r, seed)?;
            solve(&problem)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_chunks(parts))
}

fn merge_chunks(parts: Vec<DispatchSolution>) -> DispatchSolution {
    let mut iter = parts.into_iter();
    let mut merged = iter.next().expect("at least one chunk");
    merged.chunks[0].index = 0;
    for (i, part) in iter.enumerate() {
        merged.p_g.extend(part.p_g);
        merged.p_pv.extend(part.p_pv);
        merged.p_b_c.extend(part.p_b_c);
        merged.p_b_d.extend(part.p_b_d);
        if !merged.soc.is_empty() {
            merged.soc.extend(part.soc.into_iter().skip(1));
        }
        merged.base_demand_total.extend(part.base_demand_total);
        for (dst, src) in merged.house_p_hp.iter_mut().zip(part.house_p_hp) {
            dst.extend(src);
        }
        for (dst, src) in merged.house_q_oil.iter_mut().zip(part.house_q_oil) {
            dst.extend(src);
        }
        for (dst, src) in merged.house_t_a.iter_mut().zip(part.house_t_a) {
            dst.extend(src.into_iter().skip(1));
        }
        for (dst, src) in merged.house_t_m.iter_mut().zip(part.house_t_m) {
            dst.extend(src.into_iter().skip(1));
        }
        for (id, series) in part.transformer_load {
            merged
                .transformer_load
                .get_mut(&id)
                .expect("same topology in every chunk")
                .extend(series);
        }
        for (id, series) in part.transformer_excess {
            merged
                .transformer_excess
                .get_mut(&id)
                .expect("same topology in every chunk")
                .extend(series);
        }
        merged.objective += part.objective;
        merged.gap_pct = merged.gap_pct.max(part.gap_pct);
        let mut stat = part.chunks.into_iter().next().expect("one stat per chunk");
        stat.index = i + 1;
        merged.chunks.push(stat);
    }
    merged
}

/// Feasibility tolerances for [`validate`]; loose enough for interior-point
/// termination noise, tight enough to catch modeling errors.
pub const TOL_POWER_KW: f64 = 0.01;
pub const TOL_SOC: f64 = 1e-4;
pub const TOL_TEMP_C: f64 = 0.02;
pub const TOL_EXCLUSIVE_KW: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    PowerBalance,
    GeneratorLimit,
    SocDynamics,
    SocBounds,
    SocBoundary,
    Exclusivity,
    ChargeSource,
    ThermalDynamics,
    Comfort,
    ThermalBoundary,
    HeatPumpLimit,
    OilLimit,
    ModeFixing,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub step: usize,
    pub house: Option<usize>,
    /// How far past the tolerance the constraint is, in its native unit.
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at step {}", self.kind, self.step)?;
        if let Some(h) = self.house {
            write!(f, " (house {h})")?;
        }
        write!(f, ": off by {:.6}", self.magnitude)
    }
}

/// Re-check every constraint of `problem` against `solution`. An empty
/// result means the solution is feasible within the published tolerances.
pub fn validate(solution: &DispatchSolution, problem: &DispatchProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let k_steps = problem.steps();
    let dt = problem.dt_hours();
    let base = problem.base_demand_total();

    let mut push = |kind, step, house, magnitude: f64| {
        out.push(Violation {
            kind,
            step,
            house,
            magnitude,
        })
    };

    for k in 0..k_steps {
        let hp: f64 = solution.house_p_hp.iter().map(|h| h[k]).sum();
        let residual = base[k] + hp + solution.p_b_c[k]
            - solution.p_g[k]
            - solution.p_pv[k]
            - solution.p_b_d[k];
        if residual.abs() > TOL_POWER_KW {
            push(ViolationKind::PowerBalance, k, None, residual.abs());
        }
        if solution.p_g[k] < -TOL_POWER_KW
            || solution.p_g[k] > problem.p_g_max_kw + TOL_POWER_KW
        {
            push(ViolationKind::GeneratorLimit, k, None, solution.p_g[k]);
        }
    }

    if let Some(b) = &problem.battery {
        if solution.soc.len() != k_steps + 1 {
            push(ViolationKind::SocDynamics, 0, None, solution.soc.len() as f64);
        } else {
            for k in 0..k_steps {
                let (p_c, p_d) = (solution.p_b_c[k], solution.p_b_d[k]);
                if p_c.min(p_d) > TOL_EXCLUSIVE_KW {
                    push(ViolationKind::Exclusivity, k, None, p_c.min(p_d));
                }
                if p_c > solution.p_pv[k] + solution.p_g[k] + TOL_POWER_KW {
                    push(ViolationKind::ChargeSource, k, None, p_c);
                }
                if p_c < -TOL_POWER_KW
                    || p_c > b.p_max_kw + TOL_POWER_KW
                    || p_d < -TOL_POWER_KW
                    || p_d > b.p_max_kw + TOL_POWER_KW
                {
                    push(ViolationKind::Exclusivity, k, None, p_c.max(p_d));
                }
                let expect = solution.soc[k] + dt / b.capacity_kwh * (b.eta * p_c - p_d / b.eta);
                if (solution.soc[k + 1] - expect).abs() > TOL_SOC {
                    push(
                        ViolationKind::SocDynamics,
                        k,
                        None,
                        (solution.soc[k + 1] - expect).abs(),
                    );
                }
            }
            for (k, &s) in solution.soc.iter().enumerate() {
                if s < b.soc_min - TOL_SOC || s > b.soc_max + TOL_SOC {
                    push(ViolationKind::SocBounds, k, None, s);
                }
            }
            if (solution.soc[0] - b.soc_init).abs() > TOL_SOC {
                push(ViolationKind::SocBoundary, 0, None, solution.soc[0] - b.soc_init);
            }
            if problem.battery_periodic
                && (solution.soc[k_steps] - solution.soc[0]).abs() > TOL_SOC
            {
                push(
                    ViolationKind::SocBoundary,
                    k_steps,
                    None,
                    solution.soc[k_steps] - solution.soc[0],
                );
            }
        }
    }

    for (h, spec) in problem.houses.iter().enumerate() {
        let p_hp = &solution.house_p_hp[h];
        let q_oil = &solution.house_q_oil[h];
        let t_a = &solution.house_t_a[h];
        let t_m = &solution.house_t_m[h];
        if (t_a[0] - spec.t_a_init_c).abs() > TOL_TEMP_C {
            push(ViolationKind::ThermalBoundary, 0, Some(h), t_a[0] - spec.t_a_init_c);
        }
        if let Some(init) = spec.t_m_init_c {
            if (t_m[0] - init).abs() > TOL_TEMP_C {
                push(ViolationKind::ThermalBoundary, 0, Some(h), t_m[0] - init);
            }
        }
        if problem.thermal_periodic {
            if (t_a[k_steps] - t_a[0]).abs() > TOL_TEMP_C {
                push(
                    ViolationKind::ThermalBoundary,
                    k_steps,
                    Some(h),
                    t_a[k_steps] - t_a[0],
                );
            }
            if (t_m[k_steps] - t_m[0]).abs() > TOL_TEMP_C {
                push(
                    ViolationKind::ThermalBoundary,
                    k_steps,
                    Some(h),
                    t_m[k_steps] - t_m[0],
                );
            }
        }
        for k in 0..k_steps {
            let (ea, em) = crate::device::etp_step(
                &spec.thermal,
                t_a[k],
                t_m[k],
                problem.t_out[k],
                p_hp[k],
                problem.cop[k],
                q_oil[k],
                dt,
            );
            if (t_a[k + 1] - ea).abs() > TOL_TEMP_C || (t_m[k + 1] - em).abs() > TOL_TEMP_C {
                push(
                    ViolationKind::ThermalDynamics,
                    k,
                    Some(h),
                    (t_a[k + 1] - ea).abs().max((t_m[k + 1] - em).abs()),
                );
            }
            if t_a[k + 1] < spec.comfort_min_c - TOL_TEMP_C
                || t_a[k + 1] > spec.comfort_max_c + TOL_TEMP_C
            {
                push(ViolationKind::Comfort, k + 1, Some(h), t_a[k + 1]);
            }
            match problem.modes[k] {
                HeatingMode::HeatPump => {
                    if q_oil[k] > TOL_POWER_KW {
                        push(ViolationKind::ModeFixing, k, Some(h), q_oil[k]);
                    }
                    if p_hp[k] < spec.hp_min_kw - TOL_POWER_KW
                        || p_hp[k] > spec.hp_max_kw + TOL_POWER_KW
                    {
                        push(ViolationKind::HeatPumpLimit, k, Some(h), p_hp[k]);
                    }
                }
                HeatingMode::Oil => {
                    if p_hp[k] > TOL_POWER_KW {
                        push(ViolationKind::ModeFixing, k, Some(h), p_hp[k]);
                    }
                    if q_oil[k] < -TOL_POWER_KW
                        || q_oil[k] > spec.thermal.q_oil_max + TOL_POWER_KW
                    {
                        push(ViolationKind::OilLimit, k, Some(h), q_oil[k]);
                    }
                }
            }
        }
    }

    out
}
