//! Physical and economic device models: diesel generator cost curve, battery
//! energy reservoir, heat-pump COP lookup, two-state building thermal model,
//! and heating-oil fuel accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

pub const BTU_PER_KWH: f64 = 3412.14;

/// Aggregate diesel plant with an affine fuel-cost curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorModel {
    /// Marginal cost, $/kWh.
    pub alpha: f64,
    /// No-load cost, $/h.
    pub c0: f64,
    /// Total dispatchable capacity, kW.
    pub p_max_kw: f64,
    /// Capacity of one unit, kW; adequacy counts time above a fraction of this.
    pub combined_unit_capacity_kw: f64,
    /// kWh produced per gallon of fuel.
    pub fuel_efficiency_kwh_per_gal: f64,
}

/// Energy-reservoir battery. SoC is a fraction of `capacity_kwh`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryModel {
    pub capacity_kwh: f64,
    /// One-way efficiency, applied to both charge and discharge.
    pub eta: f64,
    pub p_max_kw: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_init: f64,
}

/// Two-state (air, mass) thermal envelope of one house.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HouseThermalParams {
    /// Air thermal mass, kWh/°C.
    pub c_a: f64,
    /// Building mass, kWh/°C.
    pub c_m: f64,
    /// Envelope conductance, kW/°C.
    pub u_a: f64,
    /// Air-to-mass conductance, kW/°C.
    pub h_m: f64,
    /// Oil heater output limit, kW (thermal).
    pub q_oil_max: f64,
}

/// Piecewise-linear COP vs outdoor temperature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CopCurve {
    /// (outdoor °C, COP) pairs with strictly increasing temperatures and
    /// non-decreasing COP.
    pub points: Vec<(f64, f64)>,
}

impl CopCurve {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidScenario("COP curve is empty".into()));
        }
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidScenario(
                    "COP curve temperatures must be strictly increasing".into(),
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidScenario(
                    "COP must be non-decreasing in temperature".into(),
                ));
            }
        }
        if self.points.iter().any(|&(_, c)| c <= 0.0) {
            return Err(Error::InvalidScenario("COP must be positive".into()));
        }
        Ok(())
    }
}

/// Hourly running cost `alpha*p_g + c0` in $/h.
pub fn generator_cost(g: &GeneratorModel, p_g_kw: f64) -> Result<f64> {
    if !(0.0..=g.p_max_kw).contains(&p_g_kw) {
        return Err(Error::OutOfRange {
            p_kw: p_g_kw,
            p_max_kw: g.p_max_kw,
        });
    }
    Ok(g.alpha * p_g_kw + g.c0)
}

/// Least-squares affine fit of fuel cost vs power from a heat-rate curve.
///
/// `heat_rate_points` are (per-unit power, heat rate in btu/kWh). Hourly heat
/// input at per-unit power x is `x*rating_kw*heat_rate(x)` btu, which divided
/// by `heating_value_btu_per_gal` and priced at `fuel_price` gives $/h.
/// Returns (alpha $/kWh, c0 $/h, r²).
pub fn fit_cost_curve(
    heat_rate_points: &[(f64, f64)],
    fuel_price_per_gal: f64,
    rating_kw: f64,
    heating_value_btu_per_gal: f64,
) -> Result<(f64, f64, f64)> {
    if heat_rate_points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let xs: Vec<f64> = heat_rate_points.iter().map(|&(pu, _)| pu * rating_kw).collect();
    let ys: Vec<f64> = heat_rate_points
        .iter()
        .map(|&(pu, hr)| pu * rating_kw * hr / heating_value_btu_per_gal * fuel_price_per_gal)
        .collect();

    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let alpha = sxy / sxx;
    let c0 = mean_y - alpha * mean_x;

    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (alpha * x + c0)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((alpha, c0, r2))
}

/// One energy-reservoir step:
/// `soc' = soc + (dt/E_C)*(eta*p_c - p_d/eta)`.
///
/// The caller keeps `soc'` inside `[soc_min, soc_max]`; this function only
/// rejects simultaneous charge/discharge.
pub fn battery_step(b: &BatteryModel, soc: f64, p_c_kw: f64, p_d_kw: f64, dt_h: f64) -> Result<f64> {
    if p_c_kw > 0.0 && p_d_kw > 0.0 {
        return Err(Error::SimultaneousChargeDischarge {
            p_c: p_c_kw,
            p_d: p_d_kw,
        });
    }
    Ok(soc + dt_h / b.capacity_kwh * (b.eta * p_c_kw - p_d_kw / b.eta))
}

/// Piecewise-linear COP at `t_out`, clamped to the endpoint values outside
/// the table range.
pub fn cop_lookup(curve: &CopCurve, t_out_c: f64) -> f64 {
    let pts = &curve.points;
    debug_assert!(!pts.is_empty());
    if t_out_c <= pts[0].0 {
        return pts[0].1;
    }
    if t_out_c >= pts[pts.len() - 1].0 {
        return pts[pts.len() - 1].1;
    }
    for w in pts.windows(2) {
        let ((t0, c0), (t1, c1)) = (w[0], w[1]);
        if t_out_c <= t1 {
            return c0 + (c1 - c0) * (t_out_c - t0) / (t1 - t0);
        }
    }
    unreachable!("COP lookup fell off a sorted table")
}

/// One explicit step of the two-state thermal model. Heat into the air node
/// is `p_hp*cop + q_oil`; the mass node exchanges with the air only.
pub fn etp_step(
    h: &HouseThermalParams,
    t_a: f64,
    t_m: f64,
    t_out: f64,
    p_hp_kw: f64,
    cop: f64,
    q_oil_kw: f64,
    dt_h: f64,
) -> (f64, f64) {
    let q_a = p_hp_kw * cop + q_oil_kw;
    let t_a_next =
        t_a + dt_h / h.c_a * (t_m * h.h_m - (h.u_a + h.h_m) * t_a + t_out * h.u_a + q_a);
    let t_m_next = t_m + dt_h / h.c_m * (h.h_m * (t_a - t_m));
    (t_a_next, t_m_next)
}

/// Steady indoor air temperature under constant outdoor temperature and
/// constant heat input: `t_out + q/u_a`.
pub fn etp_fixed_point(h: &HouseThermalParams, t_out: f64, q_kw: f64) -> f64 {
    t_out + q_kw / h.u_a
}

/// Fuel consumed by delivered heat: `sum(q*dt)` kWh converted to btu and
/// divided by furnace efficiency times the fuel's heating value.
pub fn oil_fuel_gallons(
    q_oil: &TimeSeries,
    furnace_efficiency: f64,
    energy_density_btu_per_gal: f64,
) -> f64 {
    debug_assert!(furnace_efficiency > 0.0 && furnace_efficiency <= 1.0);
    debug_assert!(energy_density_btu_per_gal > 0.0);
    let kwh: f64 = q_oil.values.iter().sum::<f64>() * q_oil.dt_hours();
    kwh * BTU_PER_KWH / (energy_density_btu_per_gal * furnace_efficiency)
}
