//! Lowering of a [`DispatchProblem`](super::DispatchProblem) to the conic
//! form `min qᵀx  s.t.  A_eq x = b_eq, A_in x ≤ b_in`.
//!
//! Variable blocks, in order: generator power, battery charge / discharge /
//! state of charge, per-house heat-pump power, oil heat, air and mass
//! temperatures, and per-transformer excess (only when the excess penalty is
//! active). Tiny positive costs on the heat, oil, and battery flows break
//! the degeneracy of the relaxation so the reported trajectories are
//! reproducible minimal-energy ones; they are stripped from the reported
//! objective.

use clarabel::algebra::CscMatrix;

use super::{DispatchProblem, HeatingMode};

/// Degeneracy-breaking cost on heat-pump and oil heat, $/kWh.
pub(crate) const EPS_THERMAL: f64 = 1e-6;
/// Degeneracy-breaking cost on battery flows, $/kWh.
pub(crate) const EPS_BATTERY: f64 = 1e-7;

/// Variable indexing for one assembled problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct VarMap {
    pub k: usize,
    pub houses: usize,
    pub has_battery: bool,
    pub has_excess: bool,
    base_p_c: usize,
    base_p_d: usize,
    base_soc: usize,
    base_p_hp: usize,
    base_q_oil: usize,
    base_t_a: usize,
    base_t_m: usize,
    base_p_ex: usize,
    pub n: usize,
}

impl VarMap {
    pub fn new(k: usize, houses: usize, transformers: usize, has_battery: bool, has_excess: bool) -> Self {
        let base_p_c = k;
        let batt = if has_battery { 3 * k + 1 } else { 0 };
        let base_p_d = base_p_c + if has_battery { k } else { 0 };
        let base_soc = base_p_d + if has_battery { k } else { 0 };
        let base_p_hp = k + batt;
        let base_q_oil = base_p_hp + houses * k;
        let base_t_a = base_q_oil + houses * k;
        let base_t_m = base_t_a + houses * (k + 1);
        let base_p_ex = base_t_m + houses * (k + 1);
        let n = base_p_ex + if has_excess { transformers * k } else { 0 };
        VarMap {
            k,
            houses,
            has_battery,
            has_excess,
            base_p_c,
            base_p_d,
            base_soc,
            base_p_hp,
            base_q_oil,
            base_t_a,
            base_t_m,
            base_p_ex,
            n,
        }
    }

    pub fn p_g(&self, k: usize) -> usize {
        debug_assert!(k < self.k);
        k
    }

    pub fn p_c(&self, k: usize) -> usize {
        debug_assert!(self.has_battery && k < self.k);
        self.base_p_c + k
    }

    pub fn p_d(&self, k: usize) -> usize {
        debug_assert!(self.has_battery && k < self.k);
        self.base_p_d + k
    }

    pub fn soc(&self, k: usize) -> usize {
        debug_assert!(self.has_battery && k <= self.k);
        self.base_soc + k
    }

    pub fn p_hp(&self, h: usize, k: usize) -> usize {
        debug_assert!(h < self.houses && k < self.k);
        self.base_p_hp + h * self.k + k
    }

    pub fn q_oil(&self, h: usize, k: usize) -> usize {
        debug_assert!(h < self.houses && k < self.k);
        self.base_q_oil + h * self.k + k
    }

    pub fn t_a(&self, h: usize, k: usize) -> usize {
        debug_assert!(h < self.houses && k <= self.k);
        self.base_t_a + h * (self.k + 1) + k
    }

    pub fn t_m(&self, h: usize, k: usize) -> usize {
        debug_assert!(h < self.houses && k <= self.k);
        self.base_t_m + h * (self.k + 1) + k
    }

    pub fn p_ex(&self, t: usize, k: usize) -> usize {
        debug_assert!(self.has_excess && k < self.k);
        self.base_p_ex + t * self.k + k
    }
}

/// Row accumulator in triplet form.
struct Rows {
    entries: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
}

impl Rows {
    fn new() -> Self {
        Rows {
            entries: Vec::new(),
            b: Vec::new(),
        }
    }

    fn push(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> usize {
        let row = self.b.len();
        for &(col, v) in coeffs {
            if v != 0.0 {
                self.entries.push((row, col, v));
            }
        }
        self.b.push(rhs);
        row
    }

    fn len(&self) -> usize {
        self.b.len()
    }
}

fn to_csc(m: usize, n: usize, mut entries: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    entries.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    debug_assert!(entries.windows(2).all(|w| (w[0].1, w[0].0) != (w[1].1, w[1].0)));
    let mut colptr = vec![0usize; n + 1];
    for &(_, c, _) in &entries {
        colptr[c + 1] += 1;
    }
    for i in 0..n {
        colptr[i + 1] += colptr[i];
    }
    let rowval: Vec<usize> = entries.iter().map(|e| e.0).collect();
    let nzval: Vec<f64> = entries.iter().map(|e| e.2).collect();
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

pub(crate) struct Lp {
    pub vars: VarMap,
    pub q: Vec<f64>,
    pub a: CscMatrix<f64>,
    pub b: Vec<f64>,
    pub n_eq: usize,
    pub n_ineq: usize,
    /// Global row index of each step's charge / discharge upper bound, for
    /// branch and bound to pin one side to zero.
    pub p_c_ub_row: Vec<usize>,
    pub p_d_ub_row: Vec<usize>,
}

pub(crate) fn assemble(p: &DispatchProblem) -> Lp {
    let k_steps = p.steps();
    let dt = p.dt_hours();
    let vars = VarMap::new(
        k_steps,
        p.houses.len(),
        p.transformers.len(),
        p.battery.is_some(),
        p.gamma > 0.0 && !p.transformers.is_empty(),
    );
    let base = p.base_demand_total();
    let houses_of_t = p.houses_of_transformers();

    let mut eq = Rows::new();
    let mut ineq = Rows::new();
    let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(4 + p.houses.len());

    // Power balance: sum_h p_hp + p_c - p_g - p_d = pv - base.
    for k in 0..k_steps {
        coeffs.clear();
        coeffs.push((vars.p_g(k), -1.0));
        if vars.has_battery {
            coeffs.push((vars.p_c(k), 1.0));
            coeffs.push((vars.p_d(k), -1.0));
        }
        for h in 0..p.houses.len() {
            coeffs.push((vars.p_hp(h, k), 1.0));
        }
        eq.push(&coeffs, p.pv[k] - base[k]);
    }

    if let Some(b) = &p.battery {
        let rate = dt / b.capacity_kwh;
        for k in 0..k_steps {
            // soc[k+1] - soc[k] - rate*eta*p_c + rate/eta*p_d = 0.
            eq.push(
                &[
                    (vars.soc(k + 1), 1.0),
                    (vars.soc(k), -1.0),
                    (vars.p_c(k), -rate * b.eta),
                    (vars.p_d(k), rate / b.eta),
                ],
                0.0,
            );
        }
        eq.push(&[(vars.soc(0), 1.0)], b.soc_init);
        if p.battery_periodic {
            eq.push(&[(vars.soc(k_steps), 1.0), (vars.soc(0), -1.0)], 0.0);
        }
    }

    for (h, spec) in p.houses.iter().enumerate() {
        let th = &spec.thermal;
        let a = dt / th.c_a;
        let m = dt / th.c_m;
        for k in 0..k_steps {
            // t_a[k+1] = t_a[k] + a*(h_m*t_m[k] - (u_a+h_m)*t_a[k]
            //            + u_a*t_out[k] + cop[k]*p_hp[k] + q_oil[k]).
            eq.push(
                &[
                    (vars.t_a(h, k + 1), 1.0),
                    (vars.t_a(h, k), -(1.0 - a * (th.u_a + th.h_m))),
                    (vars.t_m(h, k), -a * th.h_m),
                    (vars.p_hp(h, k), -a * p.cop[k]),
                    (vars.q_oil(h, k), -a),
                ],
                a * th.u_a * p.t_out[k],
            );
            // t_m[k+1] = t_m[k] + m*h_m*(t_a[k] - t_m[k]).
            eq.push(
                &[
                    (vars.t_m(h, k + 1), 1.0),
                    (vars.t_m(h, k), -(1.0 - m * th.h_m)),
                    (vars.t_a(h, k), -m * th.h_m),
                ],
                0.0,
            );
        }
        eq.push(&[(vars.t_a(h, 0), 1.0)], spec.t_a_init_c);
        if let Some(init) = spec.t_m_init_c {
            eq.push(&[(vars.t_m(h, 0), 1.0)], init);
        }
        if p.thermal_periodic {
            eq.push(&[(vars.t_a(h, k_steps), 1.0), (vars.t_a(h, 0), -1.0)], 0.0);
            eq.push(&[(vars.t_m(h, k_steps), 1.0), (vars.t_m(h, 0), -1.0)], 0.0);
        }
    }

    // Generator bounds.
    for k in 0..k_steps {
        ineq.push(&[(vars.p_g(k), -1.0)], 0.0);
        ineq.push(&[(vars.p_g(k), 1.0)], p.p_g_max_kw);
    }

    let mut p_c_ub_row = Vec::new();
    let mut p_d_ub_row = Vec::new();
    if let Some(b) = &p.battery {
        for k in 0..k_steps {
            ineq.push(&[(vars.p_c(k), -1.0)], 0.0);
            p_c_ub_row.push(ineq.push(&[(vars.p_c(k), 1.0)], b.p_max_kw));
            ineq.push(&[(vars.p_d(k), -1.0)], 0.0);
            p_d_ub_row.push(ineq.push(&[(vars.p_d(k), 1.0)], b.p_max_kw));
            // Exact projection of charge-xor-discharge onto the relaxation.
            ineq.push(&[(vars.p_c(k), 1.0), (vars.p_d(k), 1.0)], b.p_max_kw);
            // Charging draws only from PV and the generator.
            ineq.push(&[(vars.p_c(k), 1.0), (vars.p_g(k), -1.0)], p.pv[k]);
        }
        for k in 0..=k_steps {
            ineq.push(&[(vars.soc(k), -1.0)], -b.soc_min);
            ineq.push(&[(vars.soc(k), 1.0)], b.soc_max);
        }
    }

    for (h, spec) in p.houses.iter().enumerate() {
        for k in 0..k_steps {
            let (hp_lb, hp_ub, oil_ub) = match p.modes[k] {
                HeatingMode::HeatPump => (spec.hp_min_kw, spec.hp_max_kw, 0.0),
                HeatingMode::Oil => (0.0, 0.0, spec.thermal.q_oil_max),
            };
            ineq.push(&[(vars.p_hp(h, k), -1.0)], -hp_lb);
            ineq.push(&[(vars.p_hp(h, k), 1.0)], hp_ub);
            ineq.push(&[(vars.q_oil(h, k), -1.0)], 0.0);
            ineq.push(&[(vars.q_oil(h, k), 1.0)], oil_ub);
        }
        for k in 1..=k_steps {
            ineq.push(&[(vars.t_a(h, k), -1.0)], -spec.comfort_min_c);
            ineq.push(&[(vars.t_a(h, k), 1.0)], spec.comfort_max_c);
        }
    }

    if vars.has_excess {
        for (t, spec) in p.transformers.iter().enumerate() {
            for k in 0..k_steps {
                coeffs.clear();
                for &h in &houses_of_t[t] {
                    coeffs.push((vars.p_hp(h, k), 1.0));
                }
                coeffs.push((vars.p_ex(t, k), -1.0));
                ineq.push(&coeffs, spec.rated_kva - spec.base_demand[k]);
                ineq.push(&[(vars.p_ex(t, k), -1.0)], 0.0);
            }
        }
    }

    let mut q = vec![0.0; vars.n];
    for k in 0..k_steps {
        q[vars.p_g(k)] = p.alpha * dt;
        if vars.has_battery {
            q[vars.p_c(k)] = EPS_BATTERY * dt;
            q[vars.p_d(k)] = EPS_BATTERY * dt;
        }
        for h in 0..p.houses.len() {
            q[vars.p_hp(h, k)] = EPS_THERMAL * dt;
            q[vars.q_oil(h, k)] = EPS_THERMAL * dt;
        }
        if vars.has_excess {
            for t in 0..p.transformers.len() {
                q[vars.p_ex(t, k)] = p.gamma;
            }
        }
    }

    let n_eq = eq.len();
    let n_ineq = ineq.len();
    let mut entries = eq.entries;
    entries.extend(
        ineq.entries
            .into_iter()
            .map(|(r, c, v)| (r + n_eq, c, v)),
    );
    let mut b = eq.b;
    b.extend(ineq.b);

    Lp {
        vars,
        q,
        a: to_csc(n_eq + n_ineq, vars.n, entries),
        b,
        n_eq,
        n_ineq,
        p_c_ub_row: p_c_ub_row.iter().map(|r| r + n_eq).collect(),
        p_d_ub_row: p_d_ub_row.iter().map(|r| r + n_eq).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varmap_blocks_are_disjoint_and_dense() {
        let v = VarMap::new(4, 2, 3, true, true);
        let mut seen = vec![false; v.n];
        let mut mark = |i: usize| {
            assert!(!seen[i], "index {i} assigned twice");
            seen[i] = true;
        };
        for k in 0..4 {
            mark(v.p_g(k));
            mark(v.p_c(k));
            mark(v.p_d(k));
        }
        for k in 0..=4 {
            mark(v.soc(k));
        }
        for h in 0..2 {
            for k in 0..4 {
                mark(v.p_hp(h, k));
                mark(v.q_oil(h, k));
            }
            for k in 0..=4 {
                mark(v.t_a(h, k));
                mark(v.t_m(h, k));
            }
        }
        for t in 0..3 {
            for k in 0..4 {
                mark(v.p_ex(t, k));
            }
        }
        assert!(seen.iter().all(|&s| s), "holes in the variable layout");
    }

    #[test]
    fn varmap_shrinks_without_optional_blocks() {
        let full = VarMap::new(4, 2, 3, true, true);
        let no_batt = VarMap::new(4, 2, 3, false, true);
        let bare = VarMap::new(4, 0, 3, false, false);
        assert_eq!(full.n - no_batt.n, 3 * 4 + 1);
        assert_eq!(bare.n, 4);
    }

    #[test]
    fn csc_roundtrip_matches_triplets() {
        // 3x2 matrix: (0,0)=1, (2,0)=2, (1,1)=3.
        let m = to_csc(3, 2, vec![(2, 0, 2.0), (0, 0, 1.0), (1, 1, 3.0)]);
        assert_eq!(m.colptr, vec![0, 2, 3]);
        assert_eq!(m.rowval, vec![0, 2, 1]);
        assert_eq!(m.nzval, vec![1.0, 2.0, 3.0]);
    }
}
