//! Assessment criteria: infrastructure upgrades, resource adequacy, rates
//! and assistance programs, household energy costs, emissions, and social
//! indicators, composed into one report per pathway run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::device::oil_fuel_gallons;
use crate::dispatch::DispatchSolution;
use crate::error::{Error, Result};
use crate::scenario::{PathwayConfig, ScenarioConfig, Topology, TransformerKind};
use crate::timeseries::TimeSeries;

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Energy-assistance program shape: eligible consumption is billed at the
/// subsidized rate derived from the rate differential.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeaParams {
    /// Baseline (target) rate, $/kWh.
    pub r_base: f64,
    /// Cap on the rate considered for assistance, $/kWh.
    pub r_max: f64,
    /// Fraction of the differential covered.
    pub eta: f64,
    pub eligible_kwh_per_month: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformerCatalog {
    /// (kVA, $) sorted ascending by kVA.
    pub lv: Vec<(f64, f64)>,
    pub mv: Vec<(f64, f64)>,
}

impl TransformerCatalog {
    fn table(&self, kind: TransformerKind) -> &[(f64, f64)] {
        match kind {
            TransformerKind::LV => &self.lv,
            TransformerKind::MV => &self.mv,
        }
    }

    /// Smallest catalog size with at least `kva`, with its price.
    pub fn smallest_at_least(&self, kind: TransformerKind, kva: f64) -> Result<(f64, f64)> {
        let table = self.table(kind);
        table
            .iter()
            .find(|(size, _)| *size >= kva)
            .copied()
            .ok_or_else(|| Error::PeakExceedsCatalog {
                peak_kva: kva,
                largest_kva: table.last().map(|(s, _)| *s).unwrap_or(0.0),
            })
    }

    pub fn price_of(&self, kind: TransformerKind, kva: f64) -> Result<f64> {
        self.table(kind)
            .iter()
            .find(|(size, _)| (*size - kva).abs() < 1e-9)
            .map(|(_, cost)| *cost)
            .ok_or(Error::UnknownSize(kva))
    }

    pub fn validate(&self) -> Result<()> {
        for table in [&self.lv, &self.mv] {
            for w in table.windows(2) {
                if w[1].0 <= w[0].0 {
                    return Err(Error::InvalidScenario(
                        "transformer catalog must be sorted ascending by kVA".into(),
                    ));
                }
            }
            if table.iter().any(|&(s, c)| s <= 0.0 || c < 0.0) {
                return Err(Error::InvalidScenario("catalog entries invalid".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicParams {
    pub fuel_price_gen_per_gal: f64,
    pub fuel_price_heat_per_gal: f64,
    /// kWh produced per gallon, used in the retail-rate fuel term.
    pub fuel_efficiency_kwh_per_gal: f64,
    pub o_and_m_annual: f64,
    /// Annual energy purchased from independent producers, kWh. Assessment
    /// replaces this with the dispatched PV energy.
    pub ipp_energy_kwh: f64,
    pub ipp_rate_per_kwh: f64,
    pub cea: CeaParams,
    pub transformer_catalog: TransformerCatalog,
    /// A transformer is upgraded when its peak exceeds this multiple of the
    /// rated capacity.
    #[serde(default = "default_trigger")]
    pub upgrade_trigger_ratio: f64,
    /// Book value of the existing system; reporting metadata only.
    pub base_system_cost: f64,
    /// Oil furnace efficiency for heating-fuel accounting.
    pub furnace_efficiency: f64,
    /// Heating values, btu/gal.
    pub heating_value_btu_per_gal_heat: f64,
    pub heating_value_btu_per_gal_gen: f64,
    /// Fuel keys into the emission factor table.
    pub fuel_kind_gen: String,
    pub fuel_kind_heat: String,
    /// Heating fuel per house per year in the no-heat-pump pathway, gallons.
    pub baseline_heating_gal_per_house: f64,
}

fn default_trigger() -> f64 {
    1.5
}

impl EconomicParams {
    pub fn validate(&self) -> Result<()> {
        if self.fuel_price_gen_per_gal < 0.0
            || self.fuel_price_heat_per_gal < 0.0
            || self.fuel_efficiency_kwh_per_gal <= 0.0
            || self.o_and_m_annual < 0.0
            || self.ipp_rate_per_kwh < 0.0
        {
            return Err(Error::InvalidScenario("economic prices invalid".into()));
        }
        if !(self.cea.eta > 0.0 && self.cea.eta <= 1.0) || self.cea.r_base >= self.cea.r_max {
            return Err(Error::InvalidScenario("assistance parameters invalid".into()));
        }
        if !(0.0 < self.furnace_efficiency && self.furnace_efficiency <= 1.0) {
            return Err(Error::InvalidScenario("furnace efficiency invalid".into()));
        }
        self.transformer_catalog.validate()
    }

    /// Representative parameter set used in documentation and tests.
    pub fn example() -> Self {
        EconomicParams {
            fuel_price_gen_per_gal: 10.17,
            fuel_price_heat_per_gal: 16.14,
            fuel_efficiency_kwh_per_gal: 12.23,
            o_and_m_annual: 300_000.0,
            ipp_energy_kwh: 0.0,
            ipp_rate_per_kwh: 0.20,
            cea: CeaParams {
                r_base: 0.1985,
                r_max: 1.0,
                eta: 0.95,
                eligible_kwh_per_month: 750.0,
            },
            transformer_catalog: TransformerCatalog {
                lv: vec![
                    (25.0, 2_500.0),
                    (37.5, 3_000.0),
                    (50.0, 4_000.0),
                    (75.0, 6_000.0),
                    (100.0, 10_000.0),
                ],
                mv: vec![
                    (112.5, 33_226.0),
                    (150.0, 36_672.0),
                    (225.0, 48_259.0),
                    (300.0, 52_533.0),
                    (500.0, 70_905.0),
                ],
            },
            upgrade_trigger_ratio: 1.5,
            base_system_cost: 1_300_000.0,
            furnace_efficiency: 0.8,
            heating_value_btu_per_gal_heat: 138_500.0,
            heating_value_btu_per_gal_gen: 137_381.0,
            fuel_kind_gen: "no2".into(),
            fuel_kind_heat: "no1".into(),
            baseline_heating_gal_per_house: 650.0,
        }
    }
}

/// Emission indices (kg/mmBtu) and warming potentials for one fuel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FuelEmissionFactors {
    pub ei_co2: f64,
    pub ei_ch4: f64,
    pub ei_n2o: f64,
    pub gwp_co2: f64,
    pub gwp_ch4: f64,
    pub gwp_n2o: f64,
}

impl FuelEmissionFactors {
    /// Composite CO2-equivalent factor, kg/mmBtu.
    pub fn co2e_kg_per_mmbtu(&self) -> f64 {
        self.ei_co2 * self.gwp_co2 + self.ei_ch4 * self.gwp_ch4 + self.ei_n2o * self.gwp_n2o
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmissionParams {
    pub fuels: BTreeMap<String, FuelEmissionFactors>,
    pub pm25_ei_g_per_mmbtu: f64,
    pub air_volume_m3: f64,
}

impl EmissionParams {
    pub fn example() -> Self {
        let mut fuels = BTreeMap::new();
        fuels.insert(
            "no2".to_string(),
            FuelEmissionFactors {
                ei_co2: 73.96,
                ei_ch4: 0.003,
                ei_n2o: 0.0006,
                gwp_co2: 1.0,
                gwp_ch4: 28.0,
                gwp_n2o: 265.0,
            },
        );
        fuels.insert(
            "no1".to_string(),
            FuelEmissionFactors {
                ei_co2: 73.25,
                ei_ch4: 0.003,
                ei_n2o: 0.0006,
                gwp_co2: 1.0,
                gwp_ch4: 25.0,
                gwp_n2o: 298.0,
            },
        );
        EmissionParams {
            fuels,
            pm25_ei_g_per_mmbtu: 5.9,
            air_volume_m3: 4.3e9,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IncomeBracket {
    pub mean_income: f64,
    pub population_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SocialParams {
    pub income_brackets: Vec<IncomeBracket>,
    /// Fractions of survey respondents reporting each hardship.
    pub survey_indicators: Vec<f64>,
    /// Households the per-house figures scale to.
    pub households: u32,
}

impl SocialParams {
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self
            .income_brackets
            .iter()
            .map(|b| b.population_fraction)
            .sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScenario(format!(
                "income bracket fractions sum to {total}, expected 1"
            )));
        }
        if self.income_brackets.iter().any(|b| b.mean_income <= 0.0) {
            return Err(Error::InvalidScenario("bracket incomes must be positive".into()));
        }
        if self
            .survey_indicators
            .iter()
            .any(|x| !(0.0..=1.0).contains(x))
        {
            return Err(Error::InvalidScenario("survey indicators must be in [0,1]".into()));
        }
        if self.households == 0 {
            return Err(Error::InvalidScenario("households must be positive".into()));
        }
        Ok(())
    }

    pub fn example() -> Self {
        SocialParams {
            income_brackets: vec![
                IncomeBracket {
                    mean_income: 35_000.0,
                    population_fraction: 0.15,
                },
                IncomeBracket {
                    mean_income: 55_000.0,
                    population_fraction: 0.25,
                },
                IncomeBracket {
                    mean_income: 75_000.0,
                    population_fraction: 0.30,
                },
                IncomeBracket {
                    mean_income: 120_000.0,
                    population_fraction: 0.20,
                },
                IncomeBracket {
                    mean_income: 200_000.0,
                    population_fraction: 0.10,
                },
            ],
            survey_indicators: vec![0.425, 0.365, 0.58, 0.23],
            households: 20,
        }
    }
}

/// One value per assessed sub-criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub iuf: f64,
    pub resource_adequacy_pct: f64,
    pub infra_cost: f64,
    pub retail_rate: f64,
    pub cea_level: f64,
    pub subsidized_rate: f64,
    pub annual_elec_cost_per_house: f64,
    pub annual_heat_cost_per_house: f64,
    pub total_energy_cost_per_house: f64,
    pub saving_pct: f64,
    pub co2e_power_t: f64,
    pub co2e_heating_t: f64,
    pub co2e_reduction_pct: f64,
    pub pm25_ugm3: f64,
    pub energy_burden_pct: f64,
    pub epi_pct: f64,
}

impl CriteriaReport {
    /// Column order used by every CSV export.
    pub const FIELDS: [&'static str; 16] = [
        "iuf",
        "resource_adequacy_pct",
        "infra_cost",
        "retail_rate",
        "cea_level",
        "subsidized_rate",
        "annual_elec_cost_per_house",
        "annual_heat_cost_per_house",
        "total_energy_cost_per_house",
        "saving_pct",
        "co2e_power_t",
        "co2e_heating_t",
        "co2e_reduction_pct",
        "pm25_ugm3",
        "energy_burden_pct",
        "epi_pct",
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.iuf,
            self.resource_adequacy_pct,
            self.infra_cost,
            self.retail_rate,
            self.cea_level,
            self.subsidized_rate,
            self.annual_elec_cost_per_house,
            self.annual_heat_cost_per_house,
            self.total_energy_cost_per_house,
            self.saving_pct,
            self.co2e_power_t,
            self.co2e_heating_t,
            self.co2e_reduction_pct,
            self.pm25_ugm3,
            self.energy_burden_pct,
            self.epi_pct,
        ]
    }
}

/// A planned transformer replacement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Upgrade {
    pub transformer_id: String,
    pub kind: TransformerKind,
    pub old_kva: f64,
    pub new_kva: f64,
}

/// Decide upgrades from per-transformer peak loads: a unit whose peak
/// exceeds `trigger_ratio * rated` is replaced by the smallest catalog size
/// covering the peak; everything else keeps its size.
pub fn plan_upgrades(
    peaks: &[(String, TransformerKind, f64, f64)], // (id, kind, rated_kva, peak_kw)
    catalog: &TransformerCatalog,
    trigger_ratio: f64,
) -> Result<Vec<Upgrade>> {
    let mut out = Vec::with_capacity(peaks.len());
    for (id, kind, rated, peak) in peaks {
        let new_kva = if *peak > trigger_ratio * rated {
            catalog.smallest_at_least(*kind, *peak)?.0
        } else {
            *rated
        };
        out.push(Upgrade {
            transformer_id: id.clone(),
            kind: *kind,
            old_kva: *rated,
            new_kva,
        });
    }
    Ok(out)
}

/// Mean upgraded-to-original capacity ratio across all transformers.
pub fn iuf_from_upgrades(upgrades: &[Upgrade]) -> f64 {
    if upgrades.is_empty() {
        return 1.0;
    }
    upgrades
        .iter()
        .map(|u| u.new_kva / u.old_kva)
        .sum::<f64>()
        / upgrades.len() as f64
}

/// Infrastructure upgrade factor for a solved window.
pub fn iuf(
    solution: &DispatchSolution,
    topo: &Topology,
    catalog: &TransformerCatalog,
    trigger_ratio: f64,
) -> Result<f64> {
    let upgrades = plan_upgrades(&transformer_peaks(solution, topo), catalog, trigger_ratio)?;
    Ok(iuf_from_upgrades(&upgrades))
}

fn transformer_peaks(
    solution: &DispatchSolution,
    topo: &Topology,
) -> Vec<(String, TransformerKind, f64, f64)> {
    topo.transformers
        .iter()
        .map(|t| {
            let peak = solution
                .transformer_load
                .get(&t.id)
                .map(|series| series.iter().cloned().fold(0.0f64, f64::max))
                .unwrap_or(0.0);
            (t.id.clone(), t.kind, t.rated_kva, peak)
        })
        .collect()
}

/// Percent of steps where generation exceeds `threshold_fraction` of one
/// unit's capacity (an additional unit would have to run).
pub fn resource_adequacy(p_g: &[f64], unit_capacity_kw: f64, threshold_fraction: f64) -> f64 {
    debug_assert!(threshold_fraction > 0.0 && threshold_fraction <= 1.0);
    if p_g.is_empty() {
        return 0.0;
    }
    let limit = threshold_fraction * unit_capacity_kw;
    let above = p_g.iter().filter(|&&p| p > limit).count();
    100.0 * above as f64 / p_g.len() as f64
}

/// Total replacement price of upgraded transformers; unchanged units are free.
pub fn infra_cost(upgrades: &[Upgrade], catalog: &TransformerCatalog) -> Result<f64> {
    let mut total = 0.0;
    for u in upgrades {
        if (u.new_kva - u.old_kva).abs() > 1e-9 {
            total += catalog.price_of(u.kind, u.new_kva)?;
        }
    }
    Ok(total)
}

/// Retail rate: (fuel cost of generation + O&M + purchased energy) / kWh sold.
pub fn retail_rate(annual_gen_kwh: f64, econ: &EconomicParams, total_kwh_sold: f64) -> Result<f64> {
    if total_kwh_sold <= 0.0 {
        return Err(Error::ZeroSales);
    }
    let fuel = econ.fuel_price_gen_per_gal * annual_gen_kwh / econ.fuel_efficiency_kwh_per_gal;
    let ipp = econ.ipp_energy_kwh * econ.ipp_rate_per_kwh;
    Ok((fuel + econ.o_and_m_annual + ipp) / total_kwh_sold)
}

/// Assistance level and the resulting subsidized rate for a retail rate `r`:
/// `r_cea = max(0, (min(r, r_max) - r_base) * eta)`, `r_s = r - r_cea`.
pub fn cea_level(r: f64, cea: &CeaParams) -> (f64, f64) {
    let r_cea = ((r.min(cea.r_max) - cea.r_base) * cea.eta).max(0.0);
    (r_cea, r - r_cea)
}

/// Annual household bill: each month bills eligible consumption at the
/// subsidized rate and the remainder at the full rate.
pub fn annual_household_electric_cost(monthly_kwh: &[f64], r: f64, cea: &CeaParams) -> f64 {
    let (_, r_s) = cea_level(r, cea);
    monthly_kwh
        .iter()
        .map(|&u| {
            let eligible = u.min(cea.eligible_kwh_per_month);
            let rest = (u - cea.eligible_kwh_per_month).max(0.0);
            eligible * r_s + rest * r
        })
        .sum()
}

/// Mean annual heating fuel cost per house from dispatched oil heat.
pub fn annual_heating_cost(
    q_oil_per_house: &[TimeSeries],
    fuel_price_heat: f64,
    furnace_efficiency: f64,
    density_btu_per_gal: f64,
) -> f64 {
    if q_oil_per_house.is_empty() {
        return 0.0;
    }
    let gallons: f64 = q_oil_per_house
        .iter()
        .map(|q| oil_fuel_gallons(q, furnace_efficiency, density_btu_per_gal))
        .sum();
    gallons / q_oil_per_house.len() as f64 * fuel_price_heat
}

/// CO2-equivalent in metric tons for fuel energies given in mmBtu.
pub fn emissions_co2e(energy_mmbtu: &BTreeMap<String, f64>, params: &EmissionParams) -> Result<f64> {
    let mut kg = 0.0;
    for (fuel, mmbtu) in energy_mmbtu {
        let factors = params
            .fuels
            .get(fuel)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown fuel {fuel}")))?;
        kg += factors.co2e_kg_per_mmbtu() * mmbtu;
    }
    Ok(kg / 1000.0)
}

/// Annual emitted fine-particulate mass over a fixed air box, µg/m³.
pub fn pm25(total_energy_mmbtu: f64, params: &EmissionParams) -> f64 {
    debug_assert!(params.air_volume_m3 > 0.0);
    let grams = params.pm25_ei_g_per_mmbtu * total_energy_mmbtu;
    grams * 1e6 / params.air_volume_m3
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBurden {
    /// Population-weighted mean burden, percent of income.
    pub mean_pct: f64,
    /// Burden per bracket, in bracket order.
    pub per_bracket_pct: Vec<f64>,
    /// Fraction of the population whose burden exceeds 10%.
    pub burdened_fraction: f64,
}

/// Household energy cost as a share of income, per income bracket.
pub fn energy_burden(annual_energy_cost_per_house: f64, brackets: &[IncomeBracket]) -> EnergyBurden {
    let per_bracket_pct: Vec<f64> = brackets
        .iter()
        .map(|b| annual_energy_cost_per_house / b.mean_income * 100.0)
        .collect();
    let mean_pct = brackets
        .iter()
        .zip(&per_bracket_pct)
        .map(|(b, pct)| b.population_fraction * pct)
        .sum();
    let burdened_fraction = brackets
        .iter()
        .zip(&per_bracket_pct)
        .filter(|(_, &pct)| pct > 10.0)
        .map(|(b, _)| b.population_fraction)
        .sum();
    EnergyBurden {
        mean_pct,
        per_bracket_pct,
        burdened_fraction,
    }
}

/// Mean hardship rate across survey indicators.
pub fn epi(social: &SocialParams) -> f64 {
    if social.survey_indicators.is_empty() {
        return 0.0;
    }
    social.survey_indicators.iter().sum::<f64>() / social.survey_indicators.len() as f64
}

/// Poverty index after a pathway: the base index scaled down by the cost
/// saving fraction.
pub fn epi_tp(epi_base: f64, savings_fraction: f64) -> f64 {
    epi_base * (1.0 - savings_fraction)
}

/// Compose a full criteria report for one solved pathway window.
///
/// Quantities the program defines over a year (energy, fuel, costs,
/// emissions) are computed on the solved window and scaled by
/// `8760 h / window hours`. `baseline` supplies the reference for the
/// relative fields; pass `None` only when assessing the baseline pathway
/// itself (they are then 0).
pub fn assess(
    solution: &DispatchSolution,
    pathway: &PathwayConfig,
    config: &ScenarioConfig,
    baseline: Option<&CriteriaReport>,
) -> Result<CriteriaReport> {
    let econ = &config.economics;
    let social = &config.social;
    if baseline.is_none() && pathway.name != config.baseline_pathway {
        return Err(Error::MissingBaseline);
    }

    let k = solution.p_g.len();
    let dt_h = f64::from(solution.dt_minutes) / 60.0;
    let window_h = k as f64 * dt_h;
    let annualize = HOURS_PER_YEAR / window_h;
    let households = f64::from(social.households);

    // Energy totals, annualized.
    let e_gen_kwh = solution.p_g.iter().sum::<f64>() * dt_h * annualize;
    let e_pv_kwh = solution.p_pv.iter().sum::<f64>() * dt_h * annualize;
    let hp_total_per_step: Vec<f64> = (0..k)
        .map(|step| solution.house_p_hp.iter().map(|h| h[step]).sum::<f64>())
        .collect();
    let load_kwh: f64 = solution
        .base_demand_total
        .iter()
        .zip(&hp_total_per_step)
        .map(|(d, hp)| d + hp)
        .sum::<f64>()
        * dt_h
        * annualize;

    // Technological criteria.
    let upgrades = plan_upgrades(
        &transformer_peaks(solution, &config.topology),
        &econ.transformer_catalog,
        econ.upgrade_trigger_ratio,
    )?;
    let iuf_value = iuf_from_upgrades(&upgrades);
    let adequacy = resource_adequacy(
        &solution.p_g,
        config.devices.generator.combined_unit_capacity_kw,
        0.8,
    );

    // Economic criteria.
    let infra = infra_cost(&upgrades, &econ.transformer_catalog)?;
    let mut econ_run = econ.clone();
    econ_run.ipp_energy_kwh = e_pv_kwh;
    let r = retail_rate(e_gen_kwh, &econ_run, load_kwh)?;
    let (r_cea, r_s) = cea_level(r, &econ.cea);

    let res_share = config.topology.sector_shares.residential;
    let base_kwh = solution.base_demand_total.iter().sum::<f64>() * dt_h * annualize;
    let per_house_base_kwh = res_share * base_kwh / households;
    let houses = solution.house_p_hp.len().max(1) as f64;
    let per_house_hp_kwh = solution
        .house_p_hp
        .iter()
        .map(|h| h.iter().sum::<f64>())
        .sum::<f64>()
        * dt_h
        * annualize
        / houses;
    let monthly = [(per_house_base_kwh + per_house_hp_kwh) / 12.0; 12];
    let elec_cost = annual_household_electric_cost(&monthly, r, &econ.cea);

    let heat_gal_per_house = if pathway.has_heat_pumps() {
        let series: Vec<TimeSeries> = solution.house_q_oil_series();
        let total: f64 = series
            .iter()
            .map(|q| {
                oil_fuel_gallons(
                    q,
                    econ.furnace_efficiency,
                    econ.heating_value_btu_per_gal_heat,
                )
            })
            .sum();
        total / series.len().max(1) as f64 * annualize
    } else {
        econ.baseline_heating_gal_per_house
    };
    let heat_cost = heat_gal_per_house * econ.fuel_price_heat_per_gal;
    let total_cost = elec_cost + heat_cost;
    let saving_pct = match baseline {
        Some(b) if b.total_energy_cost_per_house > 0.0 => {
            (b.total_energy_cost_per_house - total_cost) / b.total_energy_cost_per_house * 100.0
        }
        _ => 0.0,
    };

    // Environmental criteria.
    let gen_gal = e_gen_kwh / econ.fuel_efficiency_kwh_per_gal;
    let mmbtu_gen = gen_gal * econ.heating_value_btu_per_gal_gen / 1e6;
    let mmbtu_heat =
        heat_gal_per_house * households * econ.heating_value_btu_per_gal_heat / 1e6;
    let co2e_power_t = emissions_co2e(
        &BTreeMap::from([(econ.fuel_kind_gen.clone(), mmbtu_gen)]),
        &config.emissions,
    )?;
    let co2e_heating_t = emissions_co2e(
        &BTreeMap::from([(econ.fuel_kind_heat.clone(), mmbtu_heat)]),
        &config.emissions,
    )?;
    let co2e_reduction_pct = match baseline {
        Some(b) if b.co2e_power_t + b.co2e_heating_t > 0.0 => {
            let base_total = b.co2e_power_t + b.co2e_heating_t;
            (base_total - co2e_power_t - co2e_heating_t) / base_total * 100.0
        }
        _ => 0.0,
    };
    let pm = pm25(mmbtu_gen + mmbtu_heat, &config.emissions);

    // Social criteria.
    let burden = energy_burden(total_cost, &social.income_brackets);
    let epi_base = epi(social);
    let epi_pct = epi_tp(epi_base, saving_pct / 100.0) * 100.0;

    Ok(CriteriaReport {
        iuf: iuf_value,
        resource_adequacy_pct: adequacy,
        infra_cost: infra,
        retail_rate: r,
        cea_level: r_cea,
        subsidized_rate: r_s,
        annual_elec_cost_per_house: elec_cost,
        annual_heat_cost_per_house: heat_cost,
        total_energy_cost_per_house: total_cost,
        saving_pct,
        co2e_power_t,
        co2e_heating_t,
        co2e_reduction_pct,
        pm25_ugm3: pm,
        energy_burden_pct: burden.mean_pct,
        epi_pct,
    })
}
