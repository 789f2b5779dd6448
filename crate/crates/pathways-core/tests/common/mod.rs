//! Reference minimizer and instance builders for solver tests.
//!
//! [`grid_optimum`] restricts each heat pump to an evenly spaced power grid
//! and finds the cheapest feasible control sequence exactly. Houses
//! decompose: the only couplings in the continuous problem are the shared
//! generator (kept slack by construction, see [`small_instance`]) and the
//! excess penalty (restricted here to single-house instances), so each
//! house is enumerated independently by dynamic programming over Pareto
//! frontiers. A partial trajectory survives only if no other is at least as
//! warm in both states and at least as cheap; dominance is sound because
//! the thermal update is monotone in (t_a, t_m) and the running cost does
//! not depend on the thermal state.
//!
//! The grid optimum is an upper bound on the continuous optimum, and
//! rounding any continuous solution up to the next grid level stays
//! feasible when the comfort ceiling and generator headroom are slack, so
//!
//! ```text
//! grid_optimum - discretization_bound <= lp objective <= grid_optimum
//! ```
//!
//! up to solver tolerance.

use chrono::{TimeZone, Utc};
use pathways_core::device::etp_step;
use pathways_core::dispatch::{HeatingMode, HouseSpec, TransformerSpec};
use pathways_core::{BatteryModel, DispatchProblem, HouseThermalParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Partial trajectory of one house: thermal state plus accumulated cost of
/// the controls applied so far.
#[derive(Clone)]
struct Node {
    t_a: f64,
    t_m: f64,
    cost: f64,
}

fn dominates(a: &Node, b: &Node) -> bool {
    a.cost <= b.cost && a.t_a >= b.t_a && a.t_m >= b.t_m
}

/// Cheapest feasible grid sequence for one house. `step_cost(k, u)` prices
/// the house's own share of generation and any excess penalty.
fn house_optimum(
    p: &DispatchProblem,
    house: &HouseSpec,
    levels: usize,
    step_cost: impl Fn(usize, f64) -> f64,
) -> Option<f64> {
    let spacing = house.hp_max_kw / (levels - 1) as f64;
    let mut frontier = vec![Node {
        t_a: house.t_a_init_c,
        t_m: house.t_m_init_c.unwrap(),
        cost: 0.0,
    }];
    for k in 0..p.steps() {
        let mut next: Vec<Node> = Vec::new();
        for node in &frontier {
            for level in 0..levels {
                let u = level as f64 * spacing;
                let (t_a, t_m) = etp_step(
                    &house.thermal,
                    node.t_a,
                    node.t_m,
                    p.t_out[k],
                    u,
                    p.cop[k],
                    0.0,
                    p.dt_hours(),
                );
                if t_a < house.comfort_min_c - 1e-9 || t_a > house.comfort_max_c + 1e-9 {
                    continue;
                }
                let cand = Node {
                    t_a,
                    t_m,
                    cost: node.cost + step_cost(k, u),
                };
                if next.iter().any(|n| dominates(n, &cand)) {
                    continue;
                }
                next.retain(|n| !dominates(&cand, n));
                next.push(cand);
            }
        }
        assert!(
            next.len() < 20_000,
            "oracle frontier exploded at step {k}: {} nodes",
            next.len()
        );
        frontier = next;
        if frontier.is_empty() {
            return None;
        }
    }
    frontier.iter().map(|n| n.cost).reduce(f64::min)
}

/// Exact minimum cost over all feasible sequences with every `p_hp` on a
/// `levels`-point grid spanning `[0, hp_max]`. `None` when no grid sequence
/// is feasible.
///
/// Requires a battery-free, non-periodic problem with pinned mass
/// temperatures, all-heat-pump modes, full-fleet generator headroom, and at
/// most one house when the excess penalty is active; panics otherwise,
/// because the per-house enumeration would not be comparable to the LP.
pub fn grid_optimum(p: &DispatchProblem, levels: usize) -> Option<f64> {
    assert!(p.battery.is_none(), "oracle does not model a battery");
    assert!(!p.thermal_periodic, "oracle cannot hit periodic endpoints");
    assert!(p.houses.iter().all(|h| h.t_m_init_c.is_some()));
    assert!(p.houses.iter().all(|h| h.hp_min_kw == 0.0));
    assert!(p.modes.iter().all(|m| *m == HeatingMode::HeatPump));
    assert!(p.gamma == 0.0 || p.houses.len() <= 1);
    assert!(levels >= 2);
    // Dominance pruning needs the discrete thermal update to preserve state
    // ordering: both self-coupling coefficients must stay non-negative at
    // this step size.
    for h in &p.houses {
        let t = &h.thermal;
        assert!(p.dt_hours() * (t.u_a + t.h_m) <= t.c_a, "air update not monotone");
        assert!(p.dt_hours() * t.h_m <= t.c_m, "mass update not monotone");
    }

    let dt = p.dt_hours();
    let base = p.base_demand_total();
    let hp_cap: f64 = p.houses.iter().map(|h| h.hp_max_kw).sum();
    for k in 0..p.steps() {
        let headroom = p.p_g_max_kw - (base[k] + hp_cap - p.pv[k]);
        assert!(headroom >= -1e-9, "generator cap binds at step {k}");
        assert!(base[k] - p.pv[k] >= -1e-9, "PV surplus at step {k}");
    }

    // Generator cost of serving base demand, plus excess the fixed base
    // demand already causes on its own.
    let mut total: f64 = (0..p.steps())
        .map(|k| (p.alpha * (base[k] - p.pv[k]) + p.c0) * dt)
        .sum();
    if p.gamma > 0.0 {
        for (ti, t) in p.transformers.iter().enumerate() {
            if !p.houses.iter().any(|h| h.transformer_index == ti) {
                total += p.gamma
                    * t.base_demand
                        .iter()
                        .map(|b| (b - t.rated_kva).max(0.0))
                        .sum::<f64>();
            }
        }
    }

    for house in &p.houses {
        let t = &p.transformers[house.transformer_index];
        let cost = house_optimum(p, house, levels, |k, u| {
            let mut c = p.alpha * u * dt;
            if p.gamma > 0.0 {
                c += p.gamma * (t.base_demand[k] + u - t.rated_kva).max(0.0);
            }
            c
        })?;
        total += cost;
    }
    Some(total)
}

/// Worst-case cost gap between the continuous optimum and [`grid_optimum`]:
/// every house rounded up by at most one grid spacing at every step, each
/// extra kW costing fuel plus (at worst) the full excess penalty.
pub fn discretization_bound(p: &DispatchProblem, levels: usize) -> f64 {
    let spacing_sum: f64 = p
        .houses
        .iter()
        .map(|h| h.hp_max_kw / (levels - 1) as f64)
        .sum();
    spacing_sum * p.steps() as f64 * (p.alpha * p.dt_hours() + p.gamma)
}

/// Randomized battery-free instance small enough to enumerate.
///
/// Construction guarantees the oracle's slackness preconditions:
/// - comfort ceiling far above any reachable temperature;
/// - generator headroom above base + full fleet heating at every step;
/// - PV strictly below base demand, so `p_g > 0` always;
/// - the excess penalty only on single-house instances.
///
/// Cold outdoor air and an initial temperature just above the comfort floor
/// make the floor bind, so the optimum actually exercises the heating terms.
pub fn small_instance(seed: u64) -> DispatchProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_steps = *[6, 8, 12].get((seed % 3) as usize).unwrap();
    let n_houses = 1 + (seed % 2) as usize;
    let gamma = if seed % 6 == 0 { 40.0 } else { 0.0 };
    let t_out_level = rng.gen_range(-30.0..-10.0);
    let cop = rng.gen_range(1.8..2.6);

    let mut houses = Vec::new();
    for i in 0..n_houses {
        let t_a_init = rng.gen_range(18.05..18.4);
        houses.push(HouseSpec {
            id: format!("H{i}"),
            transformer_index: 0,
            thermal: HouseThermalParams {
                c_a: rng.gen_range(0.21..0.25),
                c_m: rng.gen_range(0.81..0.99),
                u_a: rng.gen_range(0.09..0.12),
                h_m: rng.gen_range(1.76..2.17),
                q_oil_max: 15.0,
            },
            hp_max_kw: rng.gen_range(3.0..6.0),
            hp_min_kw: 0.0,
            comfort_min_c: 18.0,
            comfort_max_c: 1.0e9,
            t_a_init_c: t_a_init,
            t_m_init_c: Some(t_a_init),
        });
    }

    let base: Vec<f64> = (0..k_steps).map(|_| rng.gen_range(20.0..40.0)).collect();
    let pv: Vec<f64> = base.iter().map(|b| rng.gen_range(0.0..0.4) * b).collect();
    let hp_cap: f64 = houses.iter().map(|h| h.hp_max_kw).sum();
    let base_max = base.iter().cloned().fold(0.0, f64::max);
    // Rated just above base so coordinated instances pay for most HP load.
    let rated = base_max + 0.3 * hp_cap;

    DispatchProblem {
        start: Utc.with_ymd_and_hms(2023, 1, 15, 0, 0, 0).unwrap(),
        dt_minutes: 5,
        alpha: rng.gen_range(0.6..1.2),
        c0: rng.gen_range(10.0..40.0),
        p_g_max_kw: base_max + hp_cap + 5.0,
        gamma,
        pv,
        battery: None,
        battery_periodic: false,
        transformers: vec![TransformerSpec {
            id: "T1".into(),
            rated_kva: rated,
            base_demand: base,
        }],
        houses,
        modes: vec![HeatingMode::HeatPump; k_steps],
        cop: vec![cop; k_steps],
        t_out: vec![t_out_level; k_steps],
        thermal_periodic: false,
        time_limit_s: 30.0,
    }
}

/// Battery-only instance (no houses): flat demand except one peak step that
/// exceeds generator capacity by `deficit_kw`.
pub fn peak_instance(deficit_kw: f64, battery: Option<BatteryModel>) -> DispatchProblem {
    let k_steps = 8;
    let p_g_max = 100.0;
    let mut base = vec![50.0; k_steps];
    base[3] = p_g_max + deficit_kw;
    DispatchProblem {
        start: Utc.with_ymd_and_hms(2023, 6, 1, 0, 0, 0).unwrap(),
        dt_minutes: 60,
        alpha: 0.99,
        c0: 35.5,
        p_g_max_kw: p_g_max,
        gamma: 0.0,
        pv: vec![0.0; k_steps],
        battery,
        battery_periodic: true,
        transformers: vec![TransformerSpec {
            id: "T1".into(),
            rated_kva: 300.0,
            base_demand: base,
        }],
        houses: vec![],
        modes: vec![],
        cop: vec![],
        t_out: vec![],
        thermal_periodic: false,
        time_limit_s: 30.0,
    }
}
