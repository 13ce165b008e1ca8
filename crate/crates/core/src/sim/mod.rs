//! Community-energy simulation producing the scenario cloud.
//!
//! The simulator is a deterministic hourly energy balance for a community of
//! households served by local solar and hydro plants, a shared battery and a
//! grid connection. Three indices are reported per scenario:
//!
//! - social: regional economic circulation rate, the share of energy spending
//!   retained by local entities;
//! - environmental: renewable utilization rate, locally consumed renewable
//!   energy over total demand;
//! - economic: annual energy cost per household.
//!
//! The profiles and index formulas are a reconstruction chosen for desk-scale
//! analysis, not a model of any particular community.

mod balance;
mod normalize;
mod params;
mod sweep;

pub use balance::{evaluate_scenario, simulate_hourly, HourRecord};
pub use normalize::normalize_set;
pub use params::{CommunityParams, CostConstants, ProfileParams, SolarShape};
pub use sweep::{sweep, SweepAxis, SweepConfig, SweptParam};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ternary::TernaryPoint;

pub const SCENARIO_FORMAT: &str = "coos-scenarios";
pub const SCENARIO_VERSION: u32 = 1;

/// Raw (unnormalized) value indices of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawIndices {
    /// Regional economic circulation rate in `[0, 1]`.
    pub social: f64,
    /// Renewable utilization rate in `[0, 1]`.
    pub environmental: f64,
    /// Annual energy cost per household (currency/yr).
    pub economic_cost: f64,
}

/// Shares of delivered energy by source: solar, hydro, grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationMix {
    pub solar: f64,
    pub hydro: f64,
    pub grid: f64,
}

impl GenerationMix {
    pub fn as_array(&self) -> [f64; 3] {
        [self.solar, self.hydro, self.grid]
    }

    pub fn l1(&self, other: &GenerationMix) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(x, y)| (x - y).abs())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u64,
    pub params: CommunityParams,
    pub raw: RawIndices,
    /// Min-max normalized (social, environmental, economic), larger is better.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<TernaryPoint>,
    pub generation_mix: GenerationMix,
}

pub fn write_scenarios(path: &std::path::Path, scenarios: &[Scenario]) -> Result<()> {
    crate::jsonl::write_file(path, SCENARIO_FORMAT, SCENARIO_VERSION, scenarios)
}

pub fn read_scenarios(path: &std::path::Path) -> Result<Vec<Scenario>> {
    crate::jsonl::read_file(path, SCENARIO_FORMAT, SCENARIO_VERSION)
}
