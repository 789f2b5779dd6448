//! Evaluation toolkit for energy-transition pathways on islanded community
//! microgrids.
//!
//! The pipeline: load a [`scenario`](crate::scenario) (grid topology, device
//! parameters, demand / PV / temperature series, pathway definitions), solve
//! the optimal [`dispatch`](crate::dispatch) of diesel, PV, battery, and
//! heat-pump assets over a window, [`assess`](crate::criteria::assess) the
//! techno-economic, environmental, and social criteria of each pathway, and
//! rank pathways with a weighted-sum [`mcda`](crate::mcda) score.

pub mod criteria;
pub mod device;
pub mod dispatch;
pub mod error;
pub mod mcda;
pub mod scenario;
pub mod timeseries;

pub use criteria::{assess, CriteriaReport, EconomicParams, EmissionParams, SocialParams};
pub use device::{BatteryModel, CopCurve, GeneratorModel, HouseThermalParams};
pub use dispatch::{
    build_problem, rolling_solve, solve, validate, DispatchProblem, DispatchSolution,
};
pub use error::{Error, Result};
pub use mcda::{normalize, rank, score, CriteriaMatrix};
pub use scenario::{load_scenario, PathwayConfig, Scenario, ScenarioConfig, Topology};
pub use timeseries::{load_timeseries, resample, scale_renewable, TimeSeries, Unit};
