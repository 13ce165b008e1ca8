use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::{CommunityParams, SolarShape};
use super::{GenerationMix, RawIndices, Scenario};
use crate::error::Result;

const HOURS_PER_YEAR: f64 = 8760.0;

/// Energy flows of one simulated hour, all in kWh (one-hour steps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourRecord {
    pub hour: u32,
    pub demand: f64,
    pub solar: f64,
    pub hydro: f64,
    /// Energy drawn from the bus into storage (before losses).
    pub charge: f64,
    pub discharge: f64,
    pub import: f64,
    pub export: f64,
    pub curtailment: f64,
    /// State of charge at the end of the hour.
    pub soc: f64,
}

impl HourRecord {
    /// Supply minus uses; zero up to rounding.
    pub fn balance_residual(&self) -> f64 {
        (self.solar + self.hydro + self.discharge + self.import)
            - (self.demand + self.charge + self.export + self.curtailment)
    }
}

fn demand_kw(p: &CommunityParams, hour_of_day: f64) -> f64 {
    let prof = &p.profile;
    let phase = 2.0 * PI * (hour_of_day - prof.demand_peak_hour) / 24.0;
    p.households as f64 * prof.demand_per_household_kw * (1.0 + prof.demand_amplitude * phase.cos())
}

fn solar_kw(p: &CommunityParams, hour_of_day: u32) -> f64 {
    let prof = &p.profile;
    if hour_of_day < prof.solar_start_hour || hour_of_day >= prof.solar_end_hour {
        return 0.0;
    }
    match prof.solar_shape {
        SolarShape::Flat => p.solar_capacity_kw,
        SolarShape::HalfSine => {
            let window = (prof.solar_end_hour - prof.solar_start_hour) as f64;
            let t = (hour_of_day - prof.solar_start_hour) as f64 + 0.5;
            p.solar_capacity_kw * (PI * t / window).sin()
        }
    }
}

fn hydro_kw(p: &CommunityParams, hour: u32) -> f64 {
    let prof = &p.profile;
    let day = prof.start_day_of_year as f64 + (hour / 24) as f64;
    let seasonal = 1.0 + prof.hydro_seasonal_swing * (2.0 * PI * day / 365.0).sin();
    (p.hydro_capacity_kw * prof.hydro_capacity_factor * seasonal).min(p.hydro_capacity_kw)
}

/// Hour-by-hour energy balance with greedy storage dispatch: charge from
/// renewable surplus, discharge on deficit, import the rest.
pub fn simulate_hourly(params: &CommunityParams) -> Result<Vec<HourRecord>> {
    params.validate()?;
    let eta = params.costs.round_trip_efficiency;
    let cap_e = params.storage_energy_kwh;
    let cap_p = params.storage_power_kw;
    let export_limit = params.export_limit_kw.unwrap_or(f64::INFINITY);

    let mut soc: f64 = 0.0;
    let mut out = Vec::with_capacity(params.horizon_hours as usize);
    for hour in 0..params.horizon_hours {
        let hod = hour % 24;
        let demand = demand_kw(params, hod as f64);
        let solar = solar_kw(params, hod);
        let hydro = hydro_kw(params, hour);
        let renewable = solar + hydro;

        let direct = renewable.min(demand);
        let surplus = renewable - direct;
        let deficit = demand - direct;

        let headroom = ((cap_e - soc) / eta).max(0.0);
        let charge = surplus.min(cap_p).min(headroom);
        soc = (soc + charge * eta).min(cap_e);
        let export = (surplus - charge).min(export_limit);
        let curtailment = surplus - charge - export;

        let discharge = deficit.min(cap_p).min(soc);
        soc = (soc - discharge).max(0.0);
        let import = deficit - discharge;

        out.push(HourRecord {
            hour,
            demand,
            solar,
            hydro,
            charge,
            discharge,
            import,
            export,
            curtailment,
            soc,
        });
    }
    Ok(out)
}

/// Raw indices and generation mix of one parameter point. The returned
/// scenario has id 0 and no normalized values.
pub fn evaluate_scenario(params: &CommunityParams) -> Result<Scenario> {
    let hours = simulate_hourly(params)?;
    let scale = HOURS_PER_YEAR / params.horizon_hours as f64;

    let mut demand = 0.0;
    let mut local = 0.0;
    let mut import = 0.0;
    let mut export = 0.0;
    let mut solar = 0.0;
    let mut hydro = 0.0;
    for h in &hours {
        demand += h.demand;
        local += h.demand - h.import;
        import += h.import;
        export += h.export;
        solar += h.solar;
        hydro += h.hydro;
    }

    let environmental = if demand > 0.0 {
        (local / demand).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let c = &params.costs;
    let capex = params.solar_capacity_kw * c.solar_per_kw_year
        + params.hydro_capacity_kw * c.hydro_per_kw_year
        + params.storage_energy_kwh * c.storage_per_kwh_year;
    let import_cost = import * scale * params.grid_import_price;
    let export_revenue = export * scale * params.grid_export_price;
    let economic_cost =
        ((import_cost + capex - export_revenue) / params.households as f64).max(0.0);

    let local_spend = local * scale * params.local_tariff;
    let total_spend = local_spend + import_cost;
    let retained = local_spend
        * (c.local_service_share + (1.0 - c.local_service_share) * params.local_ownership_share);
    let social = if total_spend > 0.0 {
        (retained / total_spend).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let generation_mix = {
        let renewable = solar + hydro;
        let (fs, fh) = if renewable > 0.0 {
            (solar / renewable, hydro / renewable)
        } else {
            (0.0, 0.0)
        };
        let raw = [local * fs, local * fh, import];
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            GenerationMix {
                solar: raw[0] / total,
                hydro: raw[1] / total,
                grid: raw[2] / total,
            }
        } else {
            GenerationMix {
                solar: 0.0,
                hydro: 0.0,
                grid: 1.0,
            }
        }
    };

    Ok(Scenario {
        id: 0,
        params: params.clone(),
        raw: RawIndices {
            social,
            environmental,
            economic_cost,
        },
        normalized: None,
        point: None,
        generation_mix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::params::ProfileParams;

    fn flat_day_params() -> CommunityParams {
        CommunityParams {
            households: 1,
            solar_capacity_kw: 1.0,
            hydro_capacity_kw: 0.0,
            storage_energy_kwh: 0.0,
            storage_power_kw: 0.0,
            horizon_hours: 24,
            profile: ProfileParams {
                demand_per_household_kw: 1.0,
                demand_amplitude: 0.0,
                solar_shape: SolarShape::Flat,
                solar_start_hour: 6,
                solar_end_hour: 18,
                ..ProfileParams::default()
            },
            ..CommunityParams::default()
        }
    }

    #[test]
    fn flat_day_uses_half_renewable() {
        // 12 of 24 hours fully covered by 1 kW of solar.
        let s = evaluate_scenario(&flat_day_params()).unwrap();
        assert!((s.raw.environmental - 0.5).abs() < 1e-12);
        assert!((s.generation_mix.solar - 0.5).abs() < 1e-12);
        assert!((s.generation_mix.grid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_renewables_means_zero_environmental() {
        let p = CommunityParams {
            solar_capacity_kw: 0.0,
            hydro_capacity_kw: 0.0,
            storage_energy_kwh: 0.0,
            storage_power_kw: 0.0,
            ..CommunityParams::default()
        };
        let s = evaluate_scenario(&p).unwrap();
        assert_eq!(s.raw.environmental, 0.0);
        assert_eq!(s.generation_mix.grid, 1.0);
    }

    #[test]
    fn storage_shifts_surplus_into_the_evening() {
        let mut p = flat_day_params();
        p.solar_capacity_kw = 2.0;
        let without = evaluate_scenario(&p).unwrap().raw.environmental;
        p.storage_energy_kwh = 10.0;
        p.storage_power_kw = 1.0;
        let with = evaluate_scenario(&p).unwrap().raw.environmental;
        assert!(with > without, "{with} <= {without}");
        let hours = simulate_hourly(&p).unwrap();
        for h in &hours {
            assert!(h.charge <= 1.0 + 1e-12 && h.discharge <= 1.0 + 1e-12);
            assert!(h.soc >= 0.0 && h.soc <= 10.0);
        }
    }

    #[test]
    fn export_limit_curtails() {
        let mut p = flat_day_params();
        p.solar_capacity_kw = 3.0;
        p.export_limit_kw = Some(0.5);
        let hours = simulate_hourly(&p).unwrap();
        let noon = &hours[12];
        assert!((noon.export - 0.5).abs() < 1e-12);
        assert!((noon.curtailment - 1.5).abs() < 1e-12);
        assert!(noon.balance_residual().abs() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = CommunityParams::default();
        p.horizon_hours = 30;
        assert!(evaluate_scenario(&p).is_err());
        let mut p = CommunityParams::default();
        p.local_ownership_share = 1.5;
        assert!(evaluate_scenario(&p).is_err());
        let mut p = CommunityParams::default();
        p.solar_capacity_kw = -1.0;
        assert!(evaluate_scenario(&p).is_err());
        let mut p = CommunityParams::default();
        p.households = 0;
        assert!(evaluate_scenario(&p).is_err());
    }

    #[test]
    fn evaluation_is_bit_identical() {
        let p = CommunityParams::default();
        let a = serde_json::to_string(&evaluate_scenario(&p).unwrap()).unwrap();
        let b = serde_json::to_string(&evaluate_scenario(&p).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
