//! Scenario configuration: grid topology, device and policy parameters,
//! transition pathway definitions, and demand disaggregation.
//!
//! A scenario lives in one directory: a JSON configuration file next to the
//! `timestamp,value` CSVs it names. All units are fixed by the schema
//! (kW, kWh, °C, kVA, $/gal, $/kWh).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{EconomicParams, EmissionParams, SocialParams};
use crate::device::{BatteryModel, CopCurve, GeneratorModel, HouseThermalParams};
use crate::error::{Error, Result};
use crate::timeseries::{load_timeseries, TimeSeries, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Residential,
    Community,
    Commercial,
}

pub const SECTORS: [Sector; 3] = [Sector::Residential, Sector::Community, Sector::Commercial];

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Residential => "residential",
            Sector::Community => "community",
            Sector::Commercial => "commercial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformerKind {
    LV,
    MV,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transformer {
    pub id: String,
    pub rated_kva: f64,
    pub kind: TransformerKind,
    pub phase_count: u8,
    /// Service connections per sector; drives demand disaggregation.
    pub connections: BTreeMap<Sector, u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct House {
    pub id: String,
    pub transformer_id: String,
    /// Key into the scenario's thermal parameter table.
    pub thermal_params_ref: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectorShares {
    pub residential: f64,
    pub community: f64,
    pub commercial: f64,
}

impl SectorShares {
    pub fn get(&self, s: Sector) -> f64 {
        match s {
            Sector::Residential => self.residential,
            Sector::Community => self.community,
            Sector::Commercial => self.commercial,
        }
    }

    pub fn sum(&self) -> f64 {
        self.residential + self.community + self.commercial
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub sector_shares: SectorShares,
    pub transformers: Vec<Transformer>,
    pub houses: Vec<House>,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        if (self.sector_shares.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScenario(format!(
                "sector shares sum to {}, expected 1",
                self.sector_shares.sum()
            )));
        }
        for t in &self.transformers {
            if t.rated_kva <= 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "transformer {} has non-positive rating",
                    t.id
                )));
            }
            for s in SECTORS {
                if !t.connections.contains_key(&s) {
                    return Err(Error::MissingCounts {
                        transformer: t.id.clone(),
                        sector: s.name().into(),
                    });
                }
            }
        }
        for h in &self.houses {
            if !self.transformers.iter().any(|t| t.id == h.transformer_id) {
                return Err(Error::InvalidScenario(format!(
                    "house {} references unknown transformer {}",
                    h.id, h.transformer_id
                )));
            }
        }
        Ok(())
    }

    pub fn transformer(&self, id: &str) -> Option<&Transformer> {
        self.transformers.iter().find(|t| t.id == id)
    }

    /// Indices of houses fed by each transformer, in declaration order.
    pub fn houses_by_transformer(&self) -> BTreeMap<String, Vec<usize>> {
        let mut map: BTreeMap<String, Vec<usize>> = self
            .transformers
            .iter()
            .map(|t| (t.id.clone(), Vec::new()))
            .collect();
        for (i, h) in self.houses.iter().enumerate() {
            map.get_mut(&h.transformer_id)
                .expect("validated topology")
                .push(i);
        }
        map
    }
}

/// One transition pathway: heat-pump fleet, coordination penalty, PV scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathwayConfig {
    pub name: String,
    /// Nameplate heating capacity per house, MBtu/h. 0 disables heat pumps;
    /// the dispatch problem then carries no HP, oil, or thermal variables.
    pub hp_size_mbtu_h: f64,
    /// Electrical rating of one heat pump, kW.
    pub hp_rated_power_kw: f64,
    #[serde(default)]
    pub hp_min_power_kw: f64,
    /// Days whose minimum outdoor temperature falls below this switch every
    /// house to oil heat.
    pub hp_cutoff_temp_c: f64,
    /// Transformer excess penalty, $/kVA per step. 0 = uncoordinated.
    pub coordination_gamma: f64,
    /// Multiplier on the PV series.
    pub pv_scale: f64,
    /// Whether the scenario's battery participates in this pathway.
    #[serde(default = "default_use_battery")]
    pub use_battery: bool,
    /// Comfort band for indoor air temperature, °C.
    pub comfort_min_c: f64,
    pub comfort_max_c: f64,
}

fn default_use_battery() -> bool {
    true
}

impl PathwayConfig {
    pub fn has_heat_pumps(&self) -> bool {
        self.hp_size_mbtu_h > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.pv_scale < 0.0
            || self.coordination_gamma < 0.0
            || self.hp_rated_power_kw < 0.0
            || self.hp_min_power_kw < 0.0
        {
            return Err(Error::InvalidScenario(format!(
                "pathway {} has a negative parameter",
                self.name
            )));
        }
        if self.comfort_min_c >= self.comfort_max_c {
            return Err(Error::InvalidScenario(format!(
                "pathway {}: comfort band is empty",
                self.name
            )));
        }
        Ok(())
    }
}

/// Either explicit thermal parameters or per-house sampling ranges.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThermalParamSpec {
    Fixed(HouseThermalParams),
    Ranges {
        c_a: [f64; 2],
        c_m: [f64; 2],
        u_a: [f64; 2],
        h_m: [f64; 2],
        q_oil_max: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesPaths {
    pub demand: String,
    pub pv: String,
    pub temperature: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceParams {
    pub generator: GeneratorModel,
    pub battery: Option<BatteryModel>,
    pub cop_curve: CopCurve,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// Pathway every relative criterion is measured against.
    pub baseline_pathway: String,
    pub series: SeriesPaths,
    pub topology: Topology,
    pub devices: DeviceParams,
    pub economics: EconomicParams,
    pub emissions: EmissionParams,
    pub social: SocialParams,
    pub thermal_params: BTreeMap<String, ThermalParamSpec>,
    pub pathways: Vec<PathwayConfig>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.devices.cop_curve.validate()?;
        if let Some(b) = &self.devices.battery {
            if !(0.0 <= b.soc_min && b.soc_min < b.soc_max && b.soc_max <= 1.0) {
                return Err(Error::InvalidScenario("battery SoC bounds invalid".into()));
            }
            if !(b.eta > 0.0 && b.eta <= 1.0) || b.capacity_kwh <= 0.0 || b.p_max_kw <= 0.0 {
                return Err(Error::InvalidScenario("battery parameters invalid".into()));
            }
            if !(b.soc_min..=b.soc_max).contains(&b.soc_init) {
                return Err(Error::InvalidScenario(
                    "battery soc_init outside [soc_min, soc_max]".into(),
                ));
            }
        }
        let g = &self.devices.generator;
        if g.alpha <= 0.0
            || g.c0 < 0.0
            || g.p_max_kw <= 0.0
            || g.combined_unit_capacity_kw <= 0.0
            || g.combined_unit_capacity_kw > g.p_max_kw
        {
            return Err(Error::InvalidScenario("generator parameters invalid".into()));
        }
        self.economics.validate()?;
        self.social.validate()?;
        let mut names = std::collections::BTreeSet::new();
        for p in &self.pathways {
            p.validate()?;
            if !names.insert(p.name.clone()) {
                return Err(Error::InvalidScenario(format!(
                    "duplicate pathway name {}",
                    p.name
                )));
            }
        }
        if !self.pathways.iter().any(|p| p.name == self.baseline_pathway) {
            return Err(Error::InvalidScenario(format!(
                "baseline pathway {} not defined",
                self.baseline_pathway
            )));
        }
        for h in &self.topology.houses {
            if !self.thermal_params.contains_key(&h.thermal_params_ref) {
                return Err(Error::InvalidScenario(format!(
                    "house {} references unknown thermal params {}",
                    h.id, h.thermal_params_ref
                )));
            }
        }
        Ok(())
    }

    pub fn pathway(&self, name: &str) -> Option<&PathwayConfig> {
        self.pathways.iter().find(|p| p.name == name)
    }

    /// Resolve per-house thermal parameters. Ranged specs are sampled
    /// uniformly with a stream seeded by (seed, house index), so results do
    /// not depend on worker count or pathway order.
    pub fn sample_house_params(&self, seed: u64) -> Vec<HouseThermalParams> {
        self.topology
            .houses
            .iter()
            .enumerate()
            .map(|(i, h)| {
                match &self.thermal_params[&h.thermal_params_ref] {
                    ThermalParamSpec::Fixed(p) => *p,
                    ThermalParamSpec::Ranges {
                        c_a,
                        c_m,
                        u_a,
                        h_m,
                        q_oil_max,
                    } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        );
                        let mut draw = |r: &[f64; 2]| {
                            if r[0] == r[1] {
                                r[0]
                            } else {
                                rng.gen_range(r[0]..=r[1])
                            }
                        };
                        HouseThermalParams {
                            c_a: draw(c_a),
                            c_m: draw(c_m),
                            u_a: draw(u_a),
                            h_m: draw(h_m),
                            q_oil_max: *q_oil_max,
                        }
                    }
                }
            })
            .collect()
    }
}

/// A scenario with its time series loaded and validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub dir: PathBuf,
    pub demand: TimeSeries,
    pub pv: TimeSeries,
    pub temperature: TimeSeries,
}

/// Load `path` (a scenario JSON file) and the three series it names,
/// resolved relative to the file's directory.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let config: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
    config.validate()?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let demand = load_timeseries(&dir.join(&config.series.demand), Unit::Kw)?;
    let pv = load_timeseries(&dir.join(&config.series.pv), Unit::Kw)?;
    let temperature = load_timeseries(&dir.join(&config.series.temperature), Unit::Celsius)?;
    Ok(Scenario {
        config,
        dir,
        demand,
        pv,
        temperature,
    })
}

/// Split a total demand series across transformers: each receives, per
/// sector, `total * share * (its connections / sector connections)`.
/// Summing the outputs reconstructs the input exactly.
pub fn disaggregate_demand(
    total: &TimeSeries,
    topo: &Topology,
) -> Result<BTreeMap<String, TimeSeries>> {
    let mut sector_totals: BTreeMap<Sector, u64> = BTreeMap::new();
    for t in &topo.transformers {
        for s in SECTORS {
            let c = t.connections.get(&s).ok_or_else(|| Error::MissingCounts {
                transformer: t.id.clone(),
                sector: s.name().into(),
            })?;
            *sector_totals.entry(s).or_insert(0) += u64::from(*c);
        }
    }
    for s in SECTORS {
        if topo.sector_shares.get(s) > 0.0 && sector_totals[&s] == 0 {
            return Err(Error::ZeroSectorConnections(s.name().into()));
        }
    }

    let mut out = BTreeMap::new();
    for t in &topo.transformers {
        let weight: f64 = SECTORS
            .iter()
            .map(|&s| {
                let denom = sector_totals[&s];
                if denom == 0 {
                    0.0
                } else {
                    topo.sector_shares.get(s) * f64::from(t.connections[&s]) / denom as f64
                }
            })
            .sum();
        out.insert(
            t.id.clone(),
            TimeSeries::new(
                total.start,
                total.dt_minutes,
                total.unit,
                total.values.iter().map(|v| v * weight).collect(),
            ),
        );
    }
    Ok(out)
}
