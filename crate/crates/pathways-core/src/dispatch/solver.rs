//! Interior-point solution of the assembled dispatch program plus the small
//! combinatorial layer that restores battery charge/discharge exclusivity.
//!
//! The relaxation carries `p_c + p_d <= P_max`, which is the exact
//! projection of the exclusive feasible set, and a tiny cost on both flows,
//! so genuine overlaps appear only when simultaneous charge and discharge
//! would pay for itself (it burns energy, so effectively never). Overlaps at
//! numerical-noise level are netted out; anything larger is branched on by
//! pinning one side of the offending step to zero, with the relaxation value
//! as a valid bound.

use std::collections::BTreeMap;
use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::lp::{assemble, Lp};
use super::{validate, ChunkStat, DispatchProblem, DispatchSolution, HeatingMode};
use crate::error::{Error, Result};

/// Overlap below this is termination noise and is netted; above it we branch.
const BRANCH_TOL_KW: f64 = 1e-4;
const BB_MAX_NODES: usize = 256;
/// Accepted optimality gap for the branch-and-bound layer, percent.
const GAP_TARGET_PCT: f64 = 0.5;

struct LpSol {
    x: Vec<f64>,
    /// `qᵀx`: regularized objective without the no-load constant.
    obj: f64,
}

enum LpOutcome {
    Solved(LpSol),
    Infeasible,
    TimedOut,
}

fn run_lp(lp: &Lp, b: &[f64], time_limit_s: f64) -> Result<LpOutcome> {
    let p_zero = CscMatrix::zeros((lp.vars.n, lp.vars.n));
    let cones = [
        SupportedConeT::ZeroConeT(lp.n_eq),
        SupportedConeT::NonnegativeConeT(lp.n_ineq),
    ];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .time_limit(time_limit_s.max(0.1))
        .build()
        .expect("default settings are valid");
    let mut solver = DefaultSolver::new(&p_zero, &lp.q, &lp.a, b, &cones, settings);
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(LpOutcome::Solved(LpSol {
            x: solver.solution.x.clone(),
            obj: solver.solution.obj_val,
        })),
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            Ok(LpOutcome::Infeasible)
        }
        SolverStatus::MaxTime => Ok(LpOutcome::TimedOut),
        other => Err(Error::SolverFailure(format!(
            "interior-point solver stopped with status {other:?}"
        ))),
    }
}

#[derive(Debug, Clone, Copy)]
enum Side {
    NoCharge,
    NoDischarge,
}

struct Node {
    fixes: Vec<(usize, Side)>,
    lb: f64,
}

fn patched_b(lp: &Lp, fixes: &[(usize, Side)]) -> Vec<f64> {
    let mut b = lp.b.clone();
    for &(k, side) in fixes {
        match side {
            Side::NoCharge => b[lp.p_c_ub_row[k]] = 0.0,
            Side::NoDischarge => b[lp.p_d_ub_row[k]] = 0.0,
        }
    }
    b
}

/// Largest simultaneous charge/discharge overlap, if any exceeds the
/// branching tolerance.
fn worst_overlap(lp: &Lp, x: &[f64]) -> Option<(usize, f64)> {
    if !lp.vars.has_battery {
        return None;
    }
    let mut worst: Option<(usize, f64)> = None;
    for k in 0..lp.vars.k {
        let overlap = x[lp.vars.p_c(k)].min(x[lp.vars.p_d(k)]);
        if overlap > BRANCH_TOL_KW && worst.map_or(true, |(_, w)| overlap > w) {
            worst = Some((k, overlap));
        }
    }
    worst
}

/// Solve `problem` to a feasible, exclusive dispatch within the configured
/// gap and time budget.
pub fn solve(problem: &DispatchProblem) -> Result<DispatchSolution> {
    let t0 = Instant::now();
    let k_steps = problem.steps();
    assert!(k_steps > 0, "dispatch window is empty");
    for t in &problem.transformers {
        assert_eq!(t.base_demand.len(), k_steps, "transformer series length");
    }
    if !problem.houses.is_empty() {
        assert_eq!(problem.modes.len(), k_steps, "mode schedule length");
        assert_eq!(problem.cop.len(), k_steps, "COP series length");
        assert_eq!(problem.t_out.len(), k_steps, "outdoor temperature length");
    }

    let lp = assemble(problem);
    let budget = problem.time_limit_s;
    let remaining = |t0: &Instant| budget - t0.elapsed().as_secs_f64();

    let root = match run_lp(&lp, &lp.b, remaining(&t0))? {
        LpOutcome::Solved(s) => s,
        LpOutcome::Infeasible => {
            return Err(Error::Infeasible {
                hint: Some(
                    "the relaxed program has no feasible point; check generator capacity \
                     against peak load and heat-pump sizing against the comfort band"
                        .into(),
                ),
            })
        }
        LpOutcome::TimedOut => {
            return Err(Error::SolverTimeout {
                elapsed_s: t0.elapsed().as_secs_f64(),
                gap_pct: 100.0,
            })
        }
    };

    let mut incumbent: Option<LpSol> = None;
    let mut open: Vec<Node> = Vec::new();
    let mut bb_nodes = 0usize;
    let mut timed_out = false;

    match worst_overlap(&lp, &root.x) {
        None => incumbent = Some(root),
        Some((k, _)) => {
            open.push(Node {
                fixes: vec![(k, Side::NoCharge)],
                lb: root.obj,
            });
            open.push(Node {
                fixes: vec![(k, Side::NoDischarge)],
                lb: root.obj,
            });
        }
    }

    while !open.is_empty() {
        let global_lb = open.iter().map(|n| n.lb).fold(f64::INFINITY, f64::min);
        if let Some(inc) = &incumbent {
            let gap_abs = GAP_TARGET_PCT / 100.0 * inc.obj.abs();
            if global_lb >= inc.obj - gap_abs {
                break;
            }
        }
        if remaining(&t0) <= 0.0 {
            timed_out = true;
            break;
        }
        if bb_nodes >= BB_MAX_NODES {
            break;
        }
        let (idx, _) = open
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.lb.total_cmp(&b.1.lb))
            .expect("non-empty open set");
        let node = open.swap_remove(idx);
        if let Some(inc) = &incumbent {
            if node.lb >= inc.obj {
                continue;
            }
        }
        let b = patched_b(&lp, &node.fixes);
        bb_nodes += 1;
        let sol = match run_lp(&lp, &b, remaining(&t0))? {
            LpOutcome::Solved(s) => s,
            LpOutcome::Infeasible => continue,
            LpOutcome::TimedOut => {
                timed_out = true;
                break;
            }
        };
        if incumbent.as_ref().is_some_and(|inc| sol.obj >= inc.obj) {
            continue;
        }
        match worst_overlap(&lp, &sol.x) {
            None => incumbent = Some(sol),
            Some((k, _)) => {
                let mut left = node.fixes.clone();
                left.push((k, Side::NoCharge));
                let mut right = node.fixes;
                right.push((k, Side::NoDischarge));
                open.push(Node {
                    fixes: left,
                    lb: sol.obj,
                });
                open.push(Node {
                    fixes: right,
                    lb: sol.obj,
                });
            }
        }
    }

    let Some(best) = incumbent else {
        return if timed_out {
            Err(Error::SolverTimeout {
                elapsed_s: t0.elapsed().as_secs_f64(),
                gap_pct: 100.0,
            })
        } else {
            Err(Error::SolverFailure(
                "branch and bound exhausted its node budget without an exclusive solution".into(),
            ))
        };
    };
    let open_lb = open.iter().map(|n| n.lb).fold(f64::INFINITY, f64::min);
    let gap_pct = if open_lb.is_finite() && open_lb < best.obj {
        (best.obj - open_lb) / best.obj.abs().max(f64::EPSILON) * 100.0
    } else {
        0.0
    };

    let solution = extract(problem, &lp, best.x, gap_pct, bb_nodes, timed_out, &t0);
    let violations = validate(&solution, problem);
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
        return Err(Error::SolverFailure(format!(
            "solution failed feasibility re-check ({} violations): {}",
            violations.len(),
            shown.join("; ")
        )));
    }
    Ok(solution)
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-9 {
        0.0
    } else {
        v
    }
}

fn extract(
    problem: &DispatchProblem,
    lp: &Lp,
    x: Vec<f64>,
    gap_pct: f64,
    bb_nodes: usize,
    timed_out: bool,
    t0: &Instant,
) -> DispatchSolution {
    let vars = &lp.vars;
    let k_steps = vars.k;
    let dt = problem.dt_hours();

    let p_g: Vec<f64> = (0..k_steps).map(|k| clean(x[vars.p_g(k)])).collect();
    let (p_b_c, p_b_d, soc) = if vars.has_battery {
        let mut c: Vec<f64> = (0..k_steps).map(|k| clean(x[vars.p_c(k)])).collect();
        let mut d: Vec<f64> = (0..k_steps).map(|k| clean(x[vars.p_d(k)])).collect();
        for k in 0..k_steps {
            // Overlap at noise level nets out; the power balance only sees
            // the difference, so it is unaffected.
            let m = c[k].min(d[k]);
            if m > 0.0 {
                c[k] -= m;
                d[k] -= m;
            }
        }
        let soc = (0..=k_steps).map(|k| x[vars.soc(k)]).collect();
        (c, d, soc)
    } else {
        (vec![0.0; k_steps], vec![0.0; k_steps], Vec::new())
    };

    let mut house_p_hp = Vec::with_capacity(problem.houses.len());
    let mut house_q_oil = Vec::with_capacity(problem.houses.len());
    let mut house_t_a = Vec::with_capacity(problem.houses.len());
    let mut house_t_m = Vec::with_capacity(problem.houses.len());
    for h in 0..problem.houses.len() {
        let p_hp: Vec<f64> = (0..k_steps)
            .map(|k| match problem.modes[k] {
                HeatingMode::Oil => 0.0,
                HeatingMode::HeatPump => clean(x[vars.p_hp(h, k)]),
            })
            .collect();
        let q_oil: Vec<f64> = (0..k_steps)
            .map(|k| match problem.modes[k] {
                HeatingMode::HeatPump => 0.0,
                HeatingMode::Oil => clean(x[vars.q_oil(h, k)]),
            })
            .collect();
        house_p_hp.push(p_hp);
        house_q_oil.push(q_oil);
        house_t_a.push((0..=k_steps).map(|k| x[vars.t_a(h, k)]).collect());
        house_t_m.push((0..=k_steps).map(|k| x[vars.t_m(h, k)]).collect());
    }

    let houses_of_t = problem.houses_of_transformers();
    let mut transformer_load = BTreeMap::new();
    let mut transformer_excess = BTreeMap::new();
    let mut excess_total = 0.0;
    for (t, spec) in problem.transformers.iter().enumerate() {
        let load: Vec<f64> = (0..k_steps)
            .map(|k| {
                spec.base_demand[k]
                    + houses_of_t[t]
                        .iter()
                        .map(|&h| house_p_hp[h][k])
                        .sum::<f64>()
            })
            .collect();
        let excess: Vec<f64> = load
            .iter()
            .map(|&l| (l - spec.rated_kva).max(0.0))
            .collect();
        excess_total += excess.iter().sum::<f64>();
        transformer_load.insert(spec.id.clone(), load);
        transformer_excess.insert(spec.id.clone(), excess);
    }

    let objective = p_g
        .iter()
        .map(|&g| (problem.alpha * g + problem.c0) * dt)
        .sum::<f64>()
        + problem.gamma * excess_total;

    DispatchSolution {
        start: problem.start,
        dt_minutes: problem.dt_minutes,
        p_g,
        p_pv: problem.pv.clone(),
        p_b_c,
        p_b_d,
        soc,
        base_demand_total: problem.base_demand_total(),
        house_p_hp,
        house_q_oil,
        house_t_a,
        house_t_m,
        transformer_load,
        transformer_excess,
        objective,
        gap_pct,
        chunks: vec![ChunkStat {
            index: 0,
            start: problem.start,
            steps: k_steps,
            solve_ms: t0.elapsed().as_millis() as u64,
            objective,
            gap_pct,
            bb_nodes,
            timed_out,
        }],
    }
}
