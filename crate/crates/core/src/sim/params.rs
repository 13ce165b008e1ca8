use serde::{Deserialize, Serialize};

use crate::error::{CoosError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolarShape {
    /// Full rated output for every hour of the daylight window.
    Flat,
    /// Half-sine over the daylight window peaking at rated output.
    HalfSine,
}

/// Synthetic hourly profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    /// Mean demand per household (kW).
    pub demand_per_household_kw: f64,
    /// Relative amplitude of the diurnal demand sinusoid, in `[0, 1]`.
    pub demand_amplitude: f64,
    /// Hour of day at which demand peaks.
    pub demand_peak_hour: f64,
    /// First generating hour of the daylight window (inclusive).
    pub solar_start_hour: u32,
    /// End of the daylight window (exclusive).
    pub solar_end_hour: u32,
    pub solar_shape: SolarShape,
    pub hydro_capacity_factor: f64,
    /// Relative seasonal swing of hydro output, in `[0, 1)`.
    pub hydro_seasonal_swing: f64,
    /// Day of year the horizon starts on (0-based).
    pub start_day_of_year: u32,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            demand_per_household_kw: 1.2,
            demand_amplitude: 0.3,
            demand_peak_hour: 19.0,
            solar_start_hour: 6,
            solar_end_hour: 18,
            solar_shape: SolarShape::HalfSine,
            hydro_capacity_factor: 0.6,
            hydro_seasonal_swing: 0.2,
            start_day_of_year: 0,
        }
    }
}

/// Amortized capital plus O&M costs per unit of installed capacity and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostConstants {
    pub solar_per_kw_year: f64,
    pub hydro_per_kw_year: f64,
    pub storage_per_kwh_year: f64,
    /// Share of the local tariff paid to local service businesses
    /// (retail, maintenance) regardless of asset ownership.
    pub local_service_share: f64,
    pub round_trip_efficiency: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants {
            solar_per_kw_year: 110.0,
            hydro_per_kw_year: 330.0,
            storage_per_kwh_year: 45.0,
            local_service_share: 0.2,
            round_trip_efficiency: 0.85,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityParams {
    pub households: u32,
    pub solar_capacity_kw: f64,
    pub hydro_capacity_kw: f64,
    pub storage_energy_kwh: f64,
    pub storage_power_kw: f64,
    pub local_ownership_share: f64,
    pub grid_import_price: f64,
    pub grid_export_price: f64,
    pub local_tariff: f64,
    /// Export limit at the grid connection (kW); surplus above it is curtailed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_limit_kw: Option<f64>,
    pub horizon_hours: u32,
    pub profile: ProfileParams,
    pub costs: CostConstants,
}

impl Default for CommunityParams {
    fn default() -> Self {
        CommunityParams {
            households: 100,
            solar_capacity_kw: 200.0,
            hydro_capacity_kw: 50.0,
            storage_energy_kwh: 300.0,
            storage_power_kw: 100.0,
            local_ownership_share: 0.5,
            grid_import_price: 0.28,
            grid_export_price: 0.08,
            local_tariff: 0.24,
            export_limit_kw: None,
            horizon_hours: 168,
            profile: ProfileParams::default(),
            costs: CostConstants::default(),
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(CoosError::domain(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

fn fraction(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(CoosError::domain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

impl CommunityParams {
    pub fn validate(&self) -> Result<()> {
        if self.households == 0 {
            return Err(CoosError::domain("households must be >= 1"));
        }
        nonneg("solar_capacity_kw", self.solar_capacity_kw)?;
        nonneg("hydro_capacity_kw", self.hydro_capacity_kw)?;
        nonneg("storage_energy_kwh", self.storage_energy_kwh)?;
        nonneg("storage_power_kw", self.storage_power_kw)?;
        nonneg("grid_import_price", self.grid_import_price)?;
        nonneg("grid_export_price", self.grid_export_price)?;
        nonneg("local_tariff", self.local_tariff)?;
        fraction("local_ownership_share", self.local_ownership_share)?;
        if let Some(limit) = self.export_limit_kw {
            nonneg("export_limit_kw", limit)?;
        }
        if self.horizon_hours < 24 || self.horizon_hours % 24 != 0 {
            return Err(CoosError::domain(format!(
                "horizon_hours must be >= 24 and divisible by 24, got {}",
                self.horizon_hours
            )));
        }

        let p = &self.profile;
        nonneg("demand_per_household_kw", p.demand_per_household_kw)?;
        fraction("demand_amplitude", p.demand_amplitude)?;
        if !p.demand_peak_hour.is_finite() {
            return Err(CoosError::domain("demand_peak_hour must be finite"));
        }
        if p.solar_start_hour > p.solar_end_hour || p.solar_end_hour > 24 {
            return Err(CoosError::domain(format!(
                "invalid daylight window {}..{}",
                p.solar_start_hour, p.solar_end_hour
            )));
        }
        fraction("hydro_capacity_factor", p.hydro_capacity_factor)?;
        if !(0.0..1.0).contains(&p.hydro_seasonal_swing) {
            return Err(CoosError::domain("hydro_seasonal_swing must lie in [0, 1)"));
        }

        let c = &self.costs;
        nonneg("solar_per_kw_year", c.solar_per_kw_year)?;
        nonneg("hydro_per_kw_year", c.hydro_per_kw_year)?;
        nonneg("storage_per_kwh_year", c.storage_per_kwh_year)?;
        fraction("local_service_share", c.local_service_share)?;
        if !(c.round_trip_efficiency > 0.0 && c.round_trip_efficiency <= 1.0) {
            return Err(CoosError::domain("round_trip_efficiency must lie in (0, 1]"));
        }
        Ok(())
    }
}
