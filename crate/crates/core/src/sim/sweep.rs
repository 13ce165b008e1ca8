use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::balance::evaluate_scenario;
use super::params::CommunityParams;
use super::Scenario;
use crate::error::{CoosError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    Households,
    SolarCapacityKw,
    HydroCapacityKw,
    StorageEnergyKwh,
    StoragePowerKw,
    LocalOwnershipShare,
    GridImportPrice,
    GridExportPrice,
    LocalTariff,
}

impl SweptParam {
    fn apply(self, params: &mut CommunityParams, value: f64) {
        match self {
            SweptParam::Households => params.households = value.round().max(0.0) as u32,
            SweptParam::SolarCapacityKw => params.solar_capacity_kw = value,
            SweptParam::HydroCapacityKw => params.hydro_capacity_kw = value,
            SweptParam::StorageEnergyKwh => params.storage_energy_kwh = value,
            SweptParam::StoragePowerKw => params.storage_power_kw = value,
            SweptParam::LocalOwnershipShare => params.local_ownership_share = value,
            SweptParam::GridImportPrice => params.grid_import_price = value,
            SweptParam::GridExportPrice => params.grid_export_price = value,
            SweptParam::LocalTariff => params.local_tariff = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweptParam,
    pub levels: Vec<f64>,
}

/// Cartesian sweep over a base parameter point. The first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: CommunityParams,
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_cap() -> u64 {
    100_000
}

fn ladder(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * step).collect()
}

impl Default for SweepConfig {
    /// 20 solar x 10 hydro x 10 storage x 10 ownership levels: 20,000 scenarios.
    fn default() -> Self {
        SweepConfig {
            base: CommunityParams::default(),
            axes: vec![
                SweepAxis {
                    param: SweptParam::SolarCapacityKw,
                    levels: ladder(20, 20.0),
                },
                SweepAxis {
                    param: SweptParam::HydroCapacityKw,
                    levels: ladder(10, 15.0),
                },
                SweepAxis {
                    param: SweptParam::StorageEnergyKwh,
                    levels: ladder(10, 100.0),
                },
                SweepAxis {
                    param: SweptParam::LocalOwnershipShare,
                    levels: (0..10).map(|i| i as f64 / 9.0).collect(),
                },
            ],
            cap: default_cap(),
        }
    }
}

impl SweepConfig {
    pub fn size(&self) -> u128 {
        self.axes.iter().map(|a| a.levels.len() as u128).product()
    }

    /// Parameter point for a sweep index (mixed radix, first axis most significant).
    pub fn params_at(&self, index: u64) -> CommunityParams {
        let mut params = self.base.clone();
        let mut rem = index;
        for axis in self.axes.iter().rev() {
            let n = axis.levels.len() as u64;
            axis.param.apply(&mut params, axis.levels[(rem % n) as usize]);
            rem /= n;
        }
        params
    }
}

/// Evaluates the full Cartesian product. Ids follow lexicographic sweep order
/// and the output order does not depend on the worker schedule.
pub fn sweep(config: &SweepConfig) -> Result<Vec<Scenario>> {
    if let Some(axis) = config.axes.iter().find(|a| a.levels.is_empty()) {
        return Err(CoosError::domain(format!(
            "sweep axis {:?} has no levels",
            axis.param
        )));
    }
    let size = config.size();
    if size > config.cap as u128 {
        return Err(CoosError::SweepTooLarge {
            size,
            cap: config.cap,
        });
    }
    (0..size as u64)
        .into_par_iter()
        .map(|id| {
            let mut scenario = evaluate_scenario(&config.params_at(id))?;
            scenario.id = id;
            Ok(scenario)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_has_twenty_thousand_points() {
        assert_eq!(SweepConfig::default().size(), 20_000);
    }

    #[test]
    fn single_level_sweep_matches_direct_evaluation() {
        let config = SweepConfig {
            base: CommunityParams::default(),
            axes: vec![SweepAxis {
                param: SweptParam::SolarCapacityKw,
                levels: vec![120.0],
            }],
            cap: 10,
        };
        let out = sweep(&config).unwrap();
        assert_eq!(out.len(), 1);
        let mut p = CommunityParams::default();
        p.solar_capacity_kw = 120.0;
        assert_eq!(out[0], evaluate_scenario(&p).unwrap());
    }

    #[test]
    fn two_levels_get_ids_zero_and_one() {
        let config = SweepConfig {
            base: CommunityParams::default(),
            axes: vec![SweepAxis {
                param: SweptParam::HydroCapacityKw,
                levels: vec![0.0, 40.0],
            }],
            cap: 10,
        };
        let out = sweep(&config).unwrap();
        assert_eq!(out.iter().map(|s| s.id).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(out[0].params.hydro_capacity_kw, 0.0);
        assert_eq!(out[1].params.hydro_capacity_kw, 40.0);
    }

    #[test]
    fn lexicographic_order_first_axis_slowest() {
        let config = SweepConfig {
            base: CommunityParams::default(),
            axes: vec![
                SweepAxis {
                    param: SweptParam::SolarCapacityKw,
                    levels: vec![0.0, 10.0],
                },
                SweepAxis {
                    param: SweptParam::LocalOwnershipShare,
                    levels: vec![0.0, 0.5, 1.0],
                },
            ],
            cap: 10,
        };
        let out = sweep(&config).unwrap();
        let pairs: Vec<_> = out
            .iter()
            .map(|s| (s.params.solar_capacity_kw, s.params.local_ownership_share))
            .collect();
        assert_eq!(
            pairs,
            vec![(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (10.0, 0.0), (10.0, 0.5), (10.0, 1.0)]
        );
    }

    #[test]
    fn oversized_sweep_refused_with_size() {
        let mut config = SweepConfig::default();
        config.cap = 1000;
        match sweep(&config) {
            Err(CoosError::SweepTooLarge { size, cap }) => {
                assert_eq!(size, 20_000);
                assert_eq!(cap, 1000);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn empty_axis_rejected() {
        let config = SweepConfig {
            base: CommunityParams::default(),
            axes: vec![SweepAxis {
                param: SweptParam::LocalTariff,
                levels: vec![],
            }],
            cap: 10,
        };
        assert!(sweep(&config).is_err());
    }
}
