//! Lumped-parameter greenhouse climate model: hourly recursion over air,
//! soil and heating-pipe temperatures plus CO2 and water-vapor
//! concentrations, driven by three actuators and six weather disturbances.
//!
//! Energy and mass balances follow the lumped greenhouse literature; this
//! module fixes the state/control/disturbance signature, the actuator
//! bounds, and the smoothing of nonsmooth exchange terms (the buoyancy part
//! of the ventilation flux contains an absolute value, condensation a
//! positive part). One hourly step integrates the balances with explicit
//! sub-stepping because the pipe dynamics are stiff at a one-hour step.

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;
use crate::smoothing::{soft_abs, soft_pos, SmoothingParams};
use serde::{Deserialize, Serialize};

/// Greenhouse state for one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhState<S> {
    /// Air temperature, °C.
    pub t_air: S,
    /// Soil temperature, °C.
    pub t_soil: S,
    /// Heating-pipe temperature, °C.
    pub t_pipe: S,
    /// CO2 concentration, ppm.
    pub co2: S,
    /// Water-vapor concentration, kg/m³.
    pub h2o: S,
}

pub const GH_STATE_DIM: usize = 5;

impl GhState<f64> {
    pub fn lift<S: Scalar>(&self) -> GhState<S> {
        GhState {
            t_air: S::from_f64(self.t_air),
            t_soil: S::from_f64(self.t_soil),
            t_pipe: S::from_f64(self.t_pipe),
            co2: S::from_f64(self.co2),
            h2o: S::from_f64(self.h2o),
        }
    }
}

impl<S: Scalar> GhState<S> {
    pub fn components(&self) -> [S; GH_STATE_DIM] {
        [self.t_air, self.t_soil, self.t_pipe, self.co2, self.h2o]
    }

    pub fn from_components(c: [S; GH_STATE_DIM]) -> Self {
        Self {
            t_air: c[0],
            t_soil: c[1],
            t_pipe: c[2],
            co2: c[3],
            h2o: c[4],
        }
    }

    pub fn value(&self) -> GhState<f64> {
        GhState {
            t_air: self.t_air.value(),
            t_soil: self.t_soil.value(),
            t_pipe: self.t_pipe.value(),
            co2: self.co2.value(),
            h2o: self.h2o.value(),
        }
    }
}

/// Actuator vector: heating valve, window aperture, CO2 valve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhControl<S> {
    /// Heating valve position in [0, 1].
    pub heating: S,
    /// Window aperture in [0, 2] (windward plus lee side).
    pub vent: S,
    /// CO2 supply valve position in [0, 1].
    pub co2: S,
}

impl GhControl<f64> {
    pub fn lift<S: Scalar>(&self) -> GhControl<S> {
        GhControl {
            heating: S::from_f64(self.heating),
            vent: S::from_f64(self.vent),
            co2: S::from_f64(self.co2),
        }
    }
}

impl<S: Scalar> GhControl<S> {
    pub fn components(&self) -> [S; 3] {
        [self.heating, self.vent, self.co2]
    }

    pub fn from_components(c: [S; 3]) -> Self {
        Self {
            heating: c[0],
            vent: c[1],
            co2: c[2],
        }
    }

    pub fn value(&self) -> GhControl<f64> {
        GhControl {
            heating: self.heating.value(),
            vent: self.vent.value(),
            co2: self.co2.value(),
        }
    }
}

/// Exogenous weather/boundary vector for one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// Outside solar radiation, W/m².
    pub radiation: f64,
    /// Outside air temperature, °C.
    pub t_out: f64,
    /// Wind speed, m/s.
    pub wind: f64,
    /// Subsoil temperature, °C.
    pub t_soil_deep: f64,
    /// Outside water-vapor concentration, kg/m³.
    pub h2o_out: f64,
    /// Outside CO2 concentration, ppm.
    pub co2_out: f64,
}

impl Disturbance {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.radiation, "radiation"),
            (self.t_out, "t_out"),
            (self.wind, "wind"),
            (self.t_soil_deep, "t_soil_deep"),
            (self.h2o_out, "h2o_out"),
            (self.co2_out, "co2_out"),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NumericInput(format!(
                    "disturbance `{name}` is {v}"
                )));
            }
        }
        if self.radiation < 0.0 {
            return Err(ModelError::NumericInput(format!(
                "outside radiation must be non-negative, got {}",
                self.radiation
            )));
        }
        if self.wind < 0.0 {
            return Err(ModelError::NumericInput(format!(
                "wind speed must be non-negative, got {}",
                self.wind
            )));
        }
        if self.h2o_out < 0.0 || self.co2_out <= 0.0 {
            return Err(ModelError::NumericInput(
                "outside concentrations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Box bounds of the three actuators: `([0,1], [0,2], [0,1])`.
pub fn control_bounds() -> [(f64, f64); 3] {
    [(0.0, 1.0), (0.0, 2.0), (0.0, 1.0)]
}

/// Check a control vector against [`control_bounds`].
pub fn check_control<S: Scalar>(u: &GhControl<S>) -> Result<()> {
    let bounds = control_bounds();
    for ((v, name), (lo, hi)) in [
        (u.heating.value(), "heating valve"),
        (u.vent.value(), "window aperture"),
        (u.co2.value(), "CO2 valve"),
    ]
    .into_iter()
    .zip(bounds)
    {
        if !v.is_finite() || v < lo || v > hi {
            return Err(ModelError::Constraint(format!(
                "{name} must lie in [{lo}, {hi}], got {v}"
            )));
        }
    }
    Ok(())
}

/// Physical coefficients of the climate model, per m² of ground area.
/// Defaults are a plausible single-compartment Venlo-type configuration;
/// all values live in the `[greenhouse]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhParams {
    /// Mean air-volume height, m.
    pub height: f64,
    /// Heat capacity of the air node (air plus light structure), J/(m²·K).
    pub cap_air: f64,
    /// Heat capacity of the upper soil layer, J/(m²·K).
    pub cap_soil: f64,
    /// Heat capacity of the heating pipe system, J/(m²·K).
    pub cap_pipe: f64,
    /// Shortwave transmissivity of the cover (also scales the radiation seen
    /// by the crop).
    pub transmissivity: f64,
    /// Fraction of transmitted radiation heating the air node.
    pub rad_frac_air: f64,
    /// Fraction of transmitted radiation heating the soil node.
    pub rad_frac_soil: f64,
    /// Cover heat-loss coefficient, W/(m²·K).
    pub cover_loss: f64,
    /// Wind-dependent addition to the cover loss, W/(m²·K) per (m/s).
    pub cover_loss_wind: f64,
    /// Pipe-to-air heat exchange coefficient, W/(m²·K).
    pub pipe_air_exchange: f64,
    /// Soil-to-air heat exchange coefficient, W/(m²·K).
    pub soil_air_exchange: f64,
    /// Upper-soil to subsoil conduction, W/(m²·K).
    pub subsoil_exchange: f64,
    /// Maximum heating power at full valve, W/m².
    pub heater_max: f64,
    /// Volumetric heat capacity of air, J/(m³·K).
    pub air_heat_capacity: f64,
    /// Wind-driven ventilation flux per unit aperture per wind speed,
    /// m³/(m²·s) per (m/s).
    pub vent_wind: f64,
    /// Buoyancy-driven ventilation flux per unit aperture per sqrt(K),
    /// m³/(m²·s).
    pub vent_buoyancy: f64,
    /// Leakage air exchange, m³/(m²·s).
    pub leakage: f64,
    /// Maximum CO2 injection at full valve, kg/(m²·s).
    pub co2_injection_max: f64,
    /// CO2 mass per volume per ppm, kg/m³ per ppm.
    pub co2_density_per_ppm: f64,
    /// Fraction of inside radiation converted to transpiration latent heat.
    pub transpiration_frac: f64,
    /// Latent heat of vaporization, J/kg.
    pub latent_heat: f64,
    /// Condensation exchange velocity on the cover, m/s.
    pub condensation_exchange: f64,
    /// Enable the crop CO2 sink (off: pure climate model, matching the
    /// one-way coupling of the combined recursion).
    pub crop_uptake_enabled: bool,
    /// Crop CO2 uptake per unit of inside radiation, kg/(m²·s) per (W/m²).
    pub crop_uptake_coef: f64,
    /// Explicit Euler sub-steps per hour.
    pub substeps: u32,
    /// Lower edge of the plausible temperature band, °C.
    pub t_valid_min: f64,
    /// Upper edge of the plausible temperature band, °C.
    pub t_valid_max: f64,
}

impl Default for GhParams {
    fn default() -> Self {
        Self {
            height: 4.0,
            cap_air: 3.0e4,
            cap_soil: 1.5e5,
            cap_pipe: 1.0e4,
            transmissivity: 0.7,
            rad_frac_air: 0.3,
            rad_frac_soil: 0.2,
            cover_loss: 6.0,
            cover_loss_wind: 0.5,
            pipe_air_exchange: 5.0,
            soil_air_exchange: 5.0,
            subsoil_exchange: 2.0,
            heater_max: 100.0,
            air_heat_capacity: 1206.0,
            vent_wind: 2.5e-3,
            vent_buoyancy: 1.5e-3,
            leakage: 2.0e-4,
            co2_injection_max: 1.0e-6,
            co2_density_per_ppm: 1.83e-6,
            transpiration_frac: 0.3,
            latent_heat: 2.45e6,
            condensation_exchange: 5.0e-3,
            crop_uptake_enabled: false,
            crop_uptake_coef: 3.0e-9,
            substeps: 60,
            t_valid_min: -20.0,
            t_valid_max: 80.0,
        }
    }
}

impl GhParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(ModelError::Parameter(m));
        for (name, v) in [
            ("height", self.height),
            ("cap_air", self.cap_air),
            ("cap_soil", self.cap_soil),
            ("cap_pipe", self.cap_pipe),
            ("air_heat_capacity", self.air_heat_capacity),
            ("co2_density_per_ppm", self.co2_density_per_ppm),
            ("latent_heat", self.latent_heat),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return err(format!("greenhouse {name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("transmissivity", self.transmissivity),
            ("rad_frac_air", self.rad_frac_air),
            ("rad_frac_soil", self.rad_frac_soil),
            ("transpiration_frac", self.transpiration_frac),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return err(format!("greenhouse {name} must be in [0,1], got {v}"));
            }
        }
        if self.rad_frac_air + self.rad_frac_soil > 1.0 {
            return err("rad_frac_air + rad_frac_soil must not exceed 1".into());
        }
        for (name, v) in [
            ("cover_loss", self.cover_loss),
            ("cover_loss_wind", self.cover_loss_wind),
            ("pipe_air_exchange", self.pipe_air_exchange),
            ("soil_air_exchange", self.soil_air_exchange),
            ("subsoil_exchange", self.subsoil_exchange),
            ("heater_max", self.heater_max),
            ("vent_wind", self.vent_wind),
            ("vent_buoyancy", self.vent_buoyancy),
            ("leakage", self.leakage),
            ("co2_injection_max", self.co2_injection_max),
            ("condensation_exchange", self.condensation_exchange),
            ("crop_uptake_coef", self.crop_uptake_coef),
        ] {
            if v < 0.0 || !v.is_finite() {
                return err(format!("greenhouse {name} must be non-negative, got {v}"));
            }
        }
        if self.substeps == 0 {
            return err("substeps must be at least 1".into());
        }
        if !(self.t_valid_min < self.t_valid_max) {
            return err("temperature validity band must be ordered".into());
        }
        Ok(())
    }
}

/// Saturation water-vapor concentration over the Magnus pressure formula,
/// kg/m³.
fn saturation_vapor<S: Scalar>(t_celsius: S) -> S {
    let c = S::from_f64;
    let pressure = c(611.2) * (c(17.62) * t_celsius / (c(243.12) + t_celsius)).exp();
    // ideal gas: rho = p * M_w / (R * T_kelvin)
    pressure * c(0.018015) / (c(8.314) * (t_celsius + c(273.15)))
}

/// One hour of the climate recursion (explicit sub-stepped Euler).
pub fn gh_step<S: Scalar>(
    x: &GhState<S>,
    u: &GhControl<S>,
    d: &Disturbance,
    p: &GhParams,
    s: &SmoothingParams,
) -> Result<GhState<S>> {
    check_control(u)?;
    d.validate()?;
    p.validate()?;

    let c = S::from_f64;
    let dt = c(3600.0 / f64::from(p.substeps));
    let r_in = c(p.transmissivity * d.radiation);
    let t_out = c(d.t_out);
    let co2_out = c(d.co2_out);
    let h2o_out = c(d.h2o_out);

    let mut t_air = x.t_air;
    let mut t_soil = x.t_soil;
    let mut t_pipe = x.t_pipe;
    let mut co2 = x.co2;
    let mut h2o = x.h2o;

    for _ in 0..p.substeps {
        // ventilation flux: wind-driven plus buoyancy-driven; the buoyancy
        // term carries the smoothed absolute temperature difference
        let buoyancy = soft_abs(t_air - t_out, s.mu).sqrt();
        let vent_flux =
            u.vent * (c(p.vent_wind * d.wind) + c(p.vent_buoyancy) * buoyancy) + c(p.leakage);

        // air energy balance
        let q_sun = c(p.rad_frac_air) * r_in;
        let q_pipe = c(p.pipe_air_exchange) * (t_pipe - t_air);
        let q_soil = c(p.soil_air_exchange) * (t_soil - t_air);
        let q_cover = c(p.cover_loss + p.cover_loss_wind * d.wind) * (t_air - t_out);
        let q_vent = c(p.air_heat_capacity) * vent_flux * (t_air - t_out);
        let dt_air = (q_sun + q_pipe + q_soil - q_cover - q_vent) / c(p.cap_air);

        // soil energy balance
        let dt_soil = (c(p.rad_frac_soil) * r_in + c(p.soil_air_exchange) * (t_air - t_soil)
            + c(p.subsoil_exchange) * (c(d.t_soil_deep) - t_soil))
            / c(p.cap_soil);

        // pipe energy balance
        let dt_pipe =
            (u.heating * c(p.heater_max) - c(p.pipe_air_exchange) * (t_pipe - t_air)) / c(p.cap_pipe);

        // CO2 mass balance (ppm)
        let injection = u.co2 * c(p.co2_injection_max / p.co2_density_per_ppm);
        let uptake = if p.crop_uptake_enabled {
            c(p.crop_uptake_coef / p.co2_density_per_ppm) * r_in
        } else {
            S::zero()
        };
        let d_co2 = (injection - vent_flux * (co2 - co2_out) - uptake) / c(p.height);

        // water-vapor mass balance
        let transpiration = c(p.transpiration_frac / p.latent_heat) * r_in;
        let condensation = c(p.condensation_exchange) * soft_pos(h2o - saturation_vapor(t_air), s.mu);
        let d_h2o = (transpiration - vent_flux * (h2o - h2o_out) - condensation) / c(p.height);

        t_air += dt * dt_air;
        t_soil += dt * dt_soil;
        t_pipe += dt * dt_pipe;
        co2 += dt * d_co2;
        h2o += dt * d_h2o;
    }

    let next = GhState {
        t_air,
        t_soil,
        t_pipe,
        co2,
        h2o,
    };
    check_divergence(&next, p)?;
    Ok(next)
}

fn check_divergence<S: Scalar>(x: &GhState<S>, p: &GhParams) -> Result<()> {
    let checks = [
        ("t_air", x.t_air.value(), p.t_valid_min, p.t_valid_max),
        ("t_soil", x.t_soil.value(), p.t_valid_min, p.t_valid_max),
        ("t_pipe", x.t_pipe.value(), p.t_valid_min, p.t_valid_max),
        ("co2", x.co2.value(), 0.0, f64::INFINITY),
        ("h2o", x.h2o.value(), 0.0, f64::INFINITY),
    ];
    for (component, v, lo, hi) in checks {
        if !v.is_finite() || v < lo || v > hi {
            return Err(ModelError::Divergence {
                component,
                step: 0,
                value: v,
            });
        }
    }
    Ok(())
}
