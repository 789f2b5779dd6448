//! Randomized invariants over the model and scoring primitives.

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use pathways_core::criteria::{cea_level, emissions_co2e, resource_adequacy, CeaParams};
use pathways_core::device::{battery_step, etp_step, generator_cost};
use pathways_core::dispatch::{heating_mode_schedule, HeatingMode};
use pathways_core::mcda::Direction;
use pathways_core::{
    normalize, rank, score, BatteryModel, CriteriaMatrix, EmissionParams, GeneratorModel,
    HouseThermalParams, TimeSeries, Unit,
};
use proptest::prelude::*;

/// Published envelope ranges; every corner is Euler-monotone at 5 minutes.
fn thermal_params() -> impl Strategy<Value = HouseThermalParams> {
    (
        0.21f64..0.25,
        0.81f64..0.99,
        0.09f64..0.12,
        1.76f64..2.17,
    )
        .prop_map(|(c_a, c_m, u_a, h_m)| HouseThermalParams {
            c_a,
            c_m,
            u_a,
            h_m,
            q_oil_max: 15.0,
        })
}

fn cea() -> CeaParams {
    CeaParams {
        r_base: 0.1985,
        r_max: 1.0,
        eta: 0.95,
        eligible_kwh_per_month: 750.0,
    }
}

proptest! {
    /// A warmer starting state can never produce a colder next state under
    /// identical inputs. The enumeration oracle's pruning rests on this.
    #[test]
    fn etp_step_preserves_state_order(
        h in thermal_params(),
        t_a in -10.0f64..25.0,
        t_m in -10.0f64..25.0,
        bump_a in 0.0f64..5.0,
        bump_m in 0.0f64..5.0,
        t_out in -40.0f64..10.0,
        p_hp in 0.0f64..6.0,
        cop in 1.5f64..3.0,
    ) {
        let dt = 5.0 / 60.0;
        let (a0, m0) = etp_step(&h, t_a, t_m, t_out, p_hp, cop, 0.0, dt);
        let (a1, m1) = etp_step(&h, t_a + bump_a, t_m + bump_m, t_out, p_hp, cop, 0.0, dt);
        prop_assert!(a1 >= a0 - 1e-12);
        prop_assert!(m1 >= m0 - 1e-12);
    }

    /// Unheated, the discrete system decays to the outdoor temperature from
    /// any moderate initial state: stability across the envelope ranges.
    #[test]
    fn etp_decays_to_ambient_without_heat(
        h in thermal_params(),
        t_a in -20.0f64..30.0,
        t_m in -20.0f64..30.0,
        t_out in -40.0f64..10.0,
    ) {
        let dt = 5.0 / 60.0;
        let (mut a, mut m) = (t_a, t_m);
        for _ in 0..4000 {
            let (na, nm) = etp_step(&h, a, m, t_out, 0.0, 2.0, 0.0, dt);
            a = na;
            m = nm;
        }
        prop_assert!((a - t_out).abs() < 0.05, "t_a={a} vs t_out={t_out}");
        prop_assert!((m - t_out).abs() < 0.05, "t_m={m} vs t_out={t_out}");
    }

    /// The assistance split returns exactly the retail rate and stays within
    /// the program's envelope: 0 <= r_cea <= (r_max - r_base) * eta.
    #[test]
    fn cea_split_is_exact_and_bounded(r in 0.0f64..3.0) {
        let p = cea();
        let (r_cea, r_s) = cea_level(r, &p);
        prop_assert!((r_cea + r_s - r).abs() < 1e-12);
        prop_assert!(r_cea >= 0.0);
        prop_assert!(r_cea <= (p.r_max - p.r_base) * p.eta + 1e-12);
    }

    /// More expensive power never reduces assistance.
    #[test]
    fn cea_level_is_monotone(r1 in 0.0f64..3.0, r2 in 0.0f64..3.0) {
        let p = cea();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(cea_level(lo, &p).0 <= cea_level(hi, &p).0 + 1e-15);
    }

    /// Greenhouse accounting is linear in fuel burned and additive across
    /// fuels.
    #[test]
    fn co2e_is_linear_in_fuel(gen in 0.0f64..1e5, heat in 0.0f64..1e5) {
        let params = EmissionParams::example();
        let single = |fuel: &str, mmbtu: f64| {
            let mut m = BTreeMap::new();
            m.insert(fuel.to_string(), mmbtu);
            emissions_co2e(&m, &params).unwrap()
        };
        let mut both = BTreeMap::new();
        both.insert("no2".to_string(), gen);
        both.insert("no1".to_string(), heat);
        let total = emissions_co2e(&both, &params).unwrap();
        prop_assert!((total - single("no2", gen) - single("no1", heat)).abs() < 1e-9);
        prop_assert!((single("no2", 2.0 * gen) - 2.0 * single("no2", gen)).abs() < 1e-9);
    }

    /// Normalized criteria live in [0, 1] with the best pathway reading 1
    /// and the worst 0 on every non-degenerate column.
    #[test]
    fn normalization_maps_onto_unit_interval(
        values in prop::collection::vec(
            prop::collection::vec(-100.0f64..100.0, 4),
            2..6,
        ),
    ) {
        let n_crit = 4;
        let matrix = CriteriaMatrix {
            pathways: (0..values.len()).map(|i| format!("P{i}")).collect(),
            criteria: (0..n_crit).map(|c| format!("c{c}")).collect(),
            directions: vec![
                Direction::LowerIsBetter,
                Direction::HigherIsBetter,
                Direction::LowerIsBetter,
                Direction::HigherIsBetter,
            ],
            values,
            weights: vec![1.0; n_crit],
        };
        let norm = normalize(&matrix).unwrap();
        for c in 0..n_crit {
            let col: Vec<f64> = norm.values.iter().map(|row| row[c]).collect();
            for v in &col {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(v));
            }
            if !norm.degenerate.contains(&c) {
                prop_assert!(col.iter().cloned().fold(f64::MIN, f64::max) > 1.0 - 1e-9);
                prop_assert!(col.iter().cloned().fold(f64::MAX, f64::min) < 1e-9);
            }
        }
    }

    /// A pathway that is best on every criterion scores 1 under any
    /// non-negative weights and ranks first.
    #[test]
    fn dominating_pathway_ranks_first(
        rows in prop::collection::vec(
            prop::collection::vec(1.0f64..100.0, 3),
            2..5,
        ),
        weights in prop::collection::vec(0.1f64..5.0, 3),
    ) {
        let mut values = vec![vec![0.0, 0.0, 0.0]];
        values.extend(rows);
        let matrix = CriteriaMatrix {
            pathways: (0..values.len()).map(|i| format!("P{i}")).collect(),
            criteria: vec!["a".into(), "b".into(), "c".into()],
            directions: vec![Direction::LowerIsBetter; 3],
            values,
            weights: vec![1.0; 3],
        };
        let norm = normalize(&matrix).unwrap();
        let scores = score(&norm, &weights).unwrap();
        prop_assert!((scores[0] - weights.iter().sum::<f64>() / 3.0).abs() < 1e-9);
        prop_assert_eq!(rank(&scores)[0], 0);
    }

    /// Uniformly scaling all weights rescales scores without reordering.
    #[test]
    fn weight_scaling_preserves_ranking(
        values in prop::collection::vec(
            prop::collection::vec(0.0f64..10.0, 3),
            3..6,
        ),
        scale in 0.5f64..10.0,
    ) {
        let matrix = CriteriaMatrix {
            pathways: (0..values.len()).map(|i| format!("P{i}")).collect(),
            criteria: vec!["a".into(), "b".into(), "c".into()],
            directions: vec![Direction::LowerIsBetter; 3],
            values,
            weights: vec![1.0; 3],
        };
        let norm = normalize(&matrix).unwrap();
        let base = score(&norm, &[1.0, 1.0, 1.0]).unwrap();
        let scaled = score(&norm, &[scale, scale, scale]).unwrap();
        for (b, s) in base.iter().zip(&scaled) {
            prop_assert!((s - scale * b).abs() < 1e-9);
        }
        prop_assert_eq!(rank(&base), rank(&scaled));
    }

    /// State of charge is affine in the flows, and opposing flows are
    /// rejected rather than silently netted.
    #[test]
    fn battery_step_is_affine_and_exclusive(
        soc in 0.0f64..1.0,
        p_c in 0.01f64..50.0,
        p_d in 0.01f64..50.0,
    ) {
        let b = BatteryModel {
            capacity_kwh: 100.0,
            eta: 0.95,
            p_max_kw: 50.0,
            soc_min: 0.0,
            soc_max: 1.0,
            soc_init: 0.5,
        };
        let dt = 0.25;
        let up = battery_step(&b, soc, p_c, 0.0, dt).unwrap();
        let down = battery_step(&b, soc, 0.0, p_d, dt).unwrap();
        prop_assert!((up - soc - dt / 100.0 * 0.95 * p_c).abs() < 1e-12);
        prop_assert!((down - soc + dt / 100.0 * p_d / 0.95).abs() < 1e-12);
        prop_assert!(battery_step(&b, soc, p_c, p_d, dt).is_err());
    }

    /// Fuel cost rises with output and adequacy never leaves [0, 100] and
    /// falls (weakly) as unit capacity grows.
    #[test]
    fn generation_metrics_are_monotone(
        p in prop::collection::vec(0.0f64..500.0, 1..200),
        unit in 100.0f64..600.0,
    ) {
        let g = GeneratorModel {
            alpha: 0.99,
            c0: 35.5,
            p_max_kw: 1000.0,
            combined_unit_capacity_kw: unit,
            fuel_efficiency_kwh_per_gal: 12.23,
        };
        let lo = generator_cost(&g, 100.0).unwrap();
        let hi = generator_cost(&g, 900.0).unwrap();
        prop_assert!(hi > lo);

        let a1 = resource_adequacy(&p, unit, 0.8);
        let a2 = resource_adequacy(&p, unit + 50.0, 0.8);
        prop_assert!((0.0..=100.0).contains(&a1));
        prop_assert!(a2 <= a1 + 1e-12);
    }

    /// Day classification counts exactly the days whose minimum drops below
    /// the cutoff, no matter how the minima fall within each day.
    #[test]
    fn mode_schedule_counts_cold_days(
        day_mins in prop::collection::vec(-35.0f64..5.0, 1..6),
        cutoff in -25.0f64..-5.0,
    ) {
        let steps_per_day = 24 * 4;
        let mut values = Vec::new();
        for min in &day_mins {
            for s in 0..steps_per_day {
                // Minimum placed mid-day, gentle rise elsewhere.
                let v = if s == steps_per_day / 2 { *min } else { min + 3.0 };
                values.push(v);
            }
        }
        let ts = TimeSeries::new(
            Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap(),
            15,
            Unit::Celsius,
            values,
        );
        let modes = heating_mode_schedule(&ts, cutoff).unwrap();
        let oil_days = modes
            .chunks(steps_per_day)
            .filter(|day| day[0] == HeatingMode::Oil)
            .count();
        let expected = day_mins.iter().filter(|m| **m < cutoff).count();
        prop_assert_eq!(oil_days, expected);
        // Whole days share one mode.
        for day in modes.chunks(steps_per_day) {
            prop_assert!(day.iter().all(|m| *m == day[0]));
        }
    }
}
