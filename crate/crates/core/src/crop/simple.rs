//! SIMPLE crop model: a three-state daily biomass recursion driven by
//! radiation-use efficiency, thermal time and multiplicative stress factors,
//! adapted to greenhouse use (drought pinned to zero, CO2 treated as a
//! controllable input).
//!
//! Every piecewise branch of the published response functions is realized
//! through the smoothing module, so one step is differentiable in state and
//! input. All growth factors are constructed to be exactly non-negative,
//! which makes the biomass non-decreasing without any per-step state
//! flooring (flooring would inject a `sqrt(mu)/2` drift on zero-growth days).

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;
use crate::smoothing::{soft_clamp01, soft_heaviside, soft_min, soft_pos, SmoothingParams};
use serde::{Deserialize, Serialize};

/// Daily crop state: biomass, cumulative temperature, senescence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropStateSimple<S> {
    /// Accumulated biomass, kg/m².
    pub biomass: S,
    /// Cumulative temperature above base, °C·day.
    pub thermal_time: S,
    /// Leaf-senescence thermal-time parameter, °C·day (grows under stress).
    pub i50b: S,
}

impl CropStateSimple<f64> {
    pub fn lift<S: Scalar>(&self) -> CropStateSimple<S> {
        CropStateSimple {
            biomass: S::from_f64(self.biomass),
            thermal_time: S::from_f64(self.thermal_time),
            i50b: S::from_f64(self.i50b),
        }
    }
}

impl<S: Scalar> CropStateSimple<S> {
    pub fn components(&self) -> [S; 3] {
        [self.biomass, self.thermal_time, self.i50b]
    }

    pub fn from_components(c: [S; 3]) -> Self {
        Self {
            biomass: c[0],
            thermal_time: c[1],
            i50b: c[2],
        }
    }

    pub fn value(&self) -> CropStateSimple<f64> {
        CropStateSimple {
            biomass: self.biomass.value(),
            thermal_time: self.thermal_time.value(),
            i50b: self.i50b.value(),
        }
    }
}

/// Daily inputs: mean temperature, relative drought, radiation, CO2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropInputSimple<S> {
    /// Mean daily temperature, °C.
    pub temp: S,
    /// Relative drought level in [0, 1]; 0 in greenhouse operation.
    pub drought: S,
    /// Daily solar radiation, MJ/m²/day.
    pub radiation: S,
    /// CO2 concentration, ppm.
    pub co2: S,
}

/// Crop/cultivar parameters of the SIMPLE model. Defaults are the tomato
/// values of the published parameterization; all live in the `[simple]`
/// config section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimpleParams {
    /// Thermal time from planting to maturity, °C·day.
    pub t_sum: f64,
    /// Harvest index: fruit fraction of final biomass, in (0, 1].
    pub harvest_index: f64,
    /// Thermal time for 50% canopy closure, °C·day.
    pub i50a: f64,
    /// Initial thermal time for 50% canopy senescence, °C·day.
    pub i50b: f64,
    /// Base temperature for development, °C.
    pub t_base: f64,
    /// Optimal growth temperature, °C.
    pub t_opt: f64,
    /// Radiation-use efficiency, kg biomass per MJ total solar radiation.
    pub rue: f64,
    /// I50B increase per day of full heat stress, °C·day.
    pub i50_max_heat: f64,
    /// I50B increase per day of full water stress, °C·day.
    pub i50_max_water: f64,
    /// Daily max temperature where heat stress begins, °C.
    pub t_heat: f64,
    /// Daily max temperature of total heat sterility, °C.
    pub t_extreme: f64,
    /// Relative RUE gain per ppm CO2 above 350 (saturating at 700 ppm).
    pub s_co2: f64,
    /// Sensitivity of growth to the drought index.
    pub s_water: f64,
    /// Maximum fraction of radiation interception.
    pub f_solar_max: f64,
    /// Offset added to the mean temperature to proxy the daily maximum
    /// (the input vector carries no T_max; 0 disables heat stress coupling).
    pub t_max_offset: f64,
}

impl Default for SimpleParams {
    fn default() -> Self {
        // Tomato: 4 cultivar + 9 species parameters of the published set.
        Self {
            t_sum: 2800.0,
            harvest_index: 0.68,
            i50a: 520.0,
            i50b: 400.0,
            t_base: 6.0,
            t_opt: 26.0,
            rue: 8.0e-4,
            i50_max_heat: 100.0,
            i50_max_water: 5.0,
            t_heat: 32.0,
            t_extreme: 45.0,
            s_co2: 7.0e-4,
            s_water: 2.5,
            f_solar_max: 0.95,
            t_max_offset: 0.0,
        }
    }
}

impl SimpleParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(ModelError::Parameter(m));
        if !(self.harvest_index > 0.0 && self.harvest_index <= 1.0) {
            return err(format!(
                "harvest_index must be in (0,1], got {}",
                self.harvest_index
            ));
        }
        if !(self.t_base < self.t_opt) {
            return err(format!(
                "temperatures must be ordered t_base < t_opt, got {} >= {}",
                self.t_base, self.t_opt
            ));
        }
        if !(self.t_heat < self.t_extreme) {
            return err(format!(
                "t_heat must be below t_extreme, got {} >= {}",
                self.t_heat, self.t_extreme
            ));
        }
        if self.rue < 0.0 || self.t_sum <= 0.0 || self.i50a < 0.0 || self.i50b < 0.0 {
            return err("rue/i50a/i50b must be non-negative and t_sum positive".into());
        }
        if !(0.0..0.00285).contains(&self.s_co2) {
            // keeps the CO2 factor positive down to 0 ppm
            return err(format!("s_co2 must be in [0, 0.00285), got {}", self.s_co2));
        }
        if self.s_water < 0.0 || self.i50_max_heat < 0.0 || self.i50_max_water < 0.0 {
            return err("stress sensitivities must be non-negative".into());
        }
        if !(self.f_solar_max > 0.0 && self.f_solar_max <= 1.0) {
            return err(format!(
                "f_solar_max must be in (0,1], got {}",
                self.f_solar_max
            ));
        }
        for v in [
            self.t_sum,
            self.harvest_index,
            self.i50a,
            self.i50b,
            self.t_base,
            self.t_opt,
            self.rue,
            self.t_max_offset,
        ] {
            if !v.is_finite() {
                return err("SIMPLE parameters must be finite".into());
            }
        }
        Ok(())
    }
}

/// CO2 growth factor: linear in concentration between 350 and 700 ppm,
/// saturating above 700 ppm. The two regimes are blended by the logistic
/// gate, which coincides with the plateau value exactly at 700 ppm, so the
/// factor is constant (to well below 1e-9) across [700, 1200] ppm.
fn co2_factor<S: Scalar>(co2: S, p: &SimpleParams, s: &SmoothingParams) -> S {
    let c350 = S::from_f64(350.0);
    let c700 = S::from_f64(700.0);
    let below = (co2 - c350) * soft_heaviside(c700 - co2, s.epsilon);
    let above = c350 * soft_heaviside(co2 - c700, s.epsilon);
    S::one() + S::from_f64(p.s_co2) * (below + above)
}

/// Radiation-interception fraction as a function of thermal time: canopy
/// growth and senescence logistics, combined with the smoothed minimum.
fn solar_interception<S: Scalar>(tt: S, i50b: S, p: &SimpleParams, s: &SmoothingParams) -> S {
    // the published logistics have slope 0.01 per °C·day
    let growth = soft_heaviside(tt - S::from_f64(p.i50a), 0.01);
    let senescence = soft_heaviside(S::from_f64(p.t_sum) - i50b - tt, 0.01);
    S::from_f64(p.f_solar_max) * soft_pos(soft_min(growth, senescence, s.mu), s.mu)
}

fn check_inputs<S: Scalar>(x: &CropStateSimple<S>, u: &CropInputSimple<S>) -> Result<()> {
    for (v, name) in [
        (x.biomass, "biomass"),
        (x.thermal_time, "thermal_time"),
        (x.i50b, "i50b"),
        (u.temp, "temp"),
        (u.drought, "drought"),
        (u.radiation, "radiation"),
        (u.co2, "co2"),
    ] {
        if !v.is_finite_value() {
            return Err(ModelError::NumericInput(format!(
                "SIMPLE step: `{name}` is {}",
                v.value()
            )));
        }
    }
    let d = u.drought.value();
    if !(0.0..=1.0).contains(&d) {
        return Err(ModelError::NumericInput(format!(
            "drought level must be in [0,1], got {d}"
        )));
    }
    if u.radiation.value() < 0.0 {
        return Err(ModelError::NumericInput(format!(
            "radiation must be non-negative, got {}",
            u.radiation.value()
        )));
    }
    if u.co2.value() <= 0.0 {
        return Err(ModelError::NumericInput(format!(
            "CO2 concentration must be positive, got {}",
            u.co2.value()
        )));
    }
    Ok(())
}

/// One day of the SIMPLE recursion.
pub fn simple_step<S: Scalar>(
    x: &CropStateSimple<S>,
    u: &CropInputSimple<S>,
    p: &SimpleParams,
    s: &SmoothingParams,
) -> Result<CropStateSimple<S>> {
    check_inputs(x, u)?;
    p.validate()?;

    let c = S::from_f64;

    // thermal time: smoothed positive part of (T - T_base)
    let dtt = soft_pos(u.temp - c(p.t_base), s.mu);

    // temperature response: ramp from T_base to T_opt, clamped to [0, 1]
    let f_temp = soft_clamp01((u.temp - c(p.t_base)) / c(p.t_opt - p.t_base), s.mu);

    // heat stress from the proxied daily maximum
    let t_max = u.temp + c(p.t_max_offset);
    let heat_ramp = soft_clamp01((t_max - c(p.t_heat)) / c(p.t_extreme - p.t_heat), s.mu);
    let f_heat = S::one() - heat_ramp;

    // drought response (D = 0 under greenhouse operation)
    let f_water = S::one() - c(p.s_water) * u.drought;

    let f_co2 = co2_factor(u.co2, p, s);
    let f_solar = solar_interception(x.thermal_time, x.i50b, p, s);

    // combined heat/water limitation, kept exactly non-negative
    let f_stress = soft_pos(soft_min(f_heat, f_water, s.mu), s.mu);

    let gain = c(p.rue) * f_solar * u.radiation * f_co2 * f_temp * f_stress;

    // senescence accelerates under heat and water stress
    let di50b = c(p.i50_max_heat) * heat_ramp + c(p.i50_max_water) * (S::one() - f_water);

    Ok(CropStateSimple {
        biomass: x.biomass + gain,
        thermal_time: x.thermal_time + dtt,
        i50b: x.i50b + di50b,
    })
}

/// Dry fruit yield from final biomass: `HI * m_B`.
pub fn simple_fruit_yield(biomass_final: f64, p: &SimpleParams) -> Result<f64> {
    if !(biomass_final >= 0.0) {
        return Err(ModelError::Domain(format!(
            "final biomass must be non-negative, got {biomass_final}"
        )));
    }
    Ok(p.harvest_index * biomass_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{fd_jacobian, jacobian, max_rel_error, DiffMap};
    use approx::assert_relative_eq;

    fn params() -> SimpleParams {
        SimpleParams::default()
    }

    fn smoothing() -> SmoothingParams {
        SmoothingParams::default()
    }

    fn gh_input(temp: f64, radiation: f64, co2: f64) -> CropInputSimple<f64> {
        CropInputSimple {
            temp,
            drought: 0.0,
            radiation,
            co2,
        }
    }

    #[test]
    fn zero_radiation_leaves_biomass_unchanged() {
        let x = CropStateSimple {
            biomass: 0.0,
            thermal_time: 0.0,
            i50b: params().i50b,
        };
        let next = simple_step(&x, &gh_input(22.0, 0.0, 500.0), &params(), &smoothing()).unwrap();
        assert!((next.biomass - x.biomass).abs() < smoothing().mu.sqrt());
        // in fact the gain is exactly zero: radiation multiplies the product
        assert_eq!(next.biomass, x.biomass);
    }

    #[test]
    fn thermal_time_accumulates_smoothed_positive_part() {
        // hand-evaluated from the thermal-time formula with soft_max smoothing:
        // dTT = soft_max(T - T_base, 0) = ((T-6) + sqrt((T-6)^2 + mu)) / 2
        let x = CropStateSimple {
            biomass: 0.1,
            thermal_time: 100.0,
            i50b: params().i50b,
        };
        let t = 21.5;
        let next = simple_step(&x, &gh_input(t, 5.0, 500.0), &params(), &smoothing()).unwrap();
        let d = t - 6.0;
        let expected = (d + (d * d + 1e-6).sqrt()) / 2.0;
        assert_relative_eq!(next.thermal_time - x.thermal_time, expected, max_relative = 1e-12);

        // below base temperature the increment vanishes up to smoothing error
        let cold = simple_step(&x, &gh_input(2.0, 5.0, 500.0), &params(), &smoothing()).unwrap();
        assert!(cold.thermal_time - x.thermal_time >= 0.0);
        assert!(cold.thermal_time - x.thermal_time < 1e-3);
    }

    #[test]
    fn co2_gain_saturates_at_700ppm() {
        let x = CropStateSimple {
            biomass: 0.5,
            thermal_time: 600.0,
            i50b: params().i50b,
        };
        let gain = |co2: f64| {
            let next = simple_step(&x, &gh_input(24.0, 12.0, co2), &params(), &smoothing()).unwrap();
            next.biomass - x.biomass
        };
        let g700 = gain(700.0);
        let g900 = gain(900.0);
        assert!((g900 - g700).abs() < 1e-9, "Δ = {}", (g900 - g700).abs());
        // below saturation the response is strictly increasing
        assert!(gain(500.0) < gain(690.0));
    }

    #[test]
    fn biomass_monotone_over_trajectory() {
        let p = params();
        let s = smoothing();
        let mut x = CropStateSimple {
            biomass: 0.0,
            thermal_time: 0.0,
            i50b: p.i50b,
        };
        let mut prev = x.biomass;
        for day in 0..400 {
            let t = 15.0 + 10.0 * (day as f64 / 40.0).sin();
            let r = (8.0 + 7.0 * (day as f64 / 25.0).cos()).max(0.0);
            x = simple_step(&x, &gh_input(t, r, 420.0), &p, &s).unwrap();
            assert!(x.biomass >= prev, "biomass decreased on day {day}");
            assert!(x.biomass >= 0.0);
            prev = x.biomass;
        }
        // sanity: a year of growth produced something
        assert!(x.biomass > 0.1);
    }

    #[test]
    fn fruit_yield_identity() {
        let p = params();
        // exactly HI * m_B as a float product
        assert_eq!(simple_fruit_yield(10.0, &p).unwrap(), 0.68 * 10.0);
        assert_relative_eq!(simple_fruit_yield(10.0, &p).unwrap(), 6.8, max_relative = 1e-15);
        assert_eq!(simple_fruit_yield(0.0, &p).unwrap(), 0.0);
        let unit = SimpleParams {
            harvest_index: 1.0,
            ..p
        };
        assert_eq!(simple_fruit_yield(1.0, &unit).unwrap(), 1.0);
        assert!(matches!(
            simple_fruit_yield(-0.1, &p),
            Err(ModelError::Domain(_))
        ));
    }

    #[test]
    fn rejects_non_finite_and_invalid_inputs() {
        let x = CropStateSimple {
            biomass: 0.0,
            thermal_time: 0.0,
            i50b: 400.0,
        };
        let bad = CropInputSimple {
            temp: f64::NAN,
            drought: 0.0,
            radiation: 1.0,
            co2: 400.0,
        };
        assert!(matches!(
            simple_step(&x, &bad, &params(), &smoothing()),
            Err(ModelError::NumericInput(_))
        ));
        let neg_r = CropInputSimple {
            temp: 20.0,
            drought: 0.0,
            radiation: -1.0,
            co2: 400.0,
        };
        assert!(simple_step(&x, &neg_r, &params(), &smoothing()).is_err());
        let bad_p = SimpleParams {
            harvest_index: 1.5,
            ..params()
        };
        let ok_u = gh_input(20.0, 5.0, 400.0);
        assert!(matches!(
            simple_step(&x, &ok_u, &bad_p, &smoothing()),
            Err(ModelError::Parameter(_))
        ));
    }

    /// One SIMPLE step as a 7-input (state + input) -> 3-output map.
    struct StepMap {
        p: SimpleParams,
        s: SmoothingParams,
    }

    impl DiffMap for StepMap {
        fn eval<S: Scalar>(&self, v: &[S]) -> Result<Vec<S>> {
            let x = CropStateSimple {
                biomass: v[0],
                thermal_time: v[1],
                i50b: v[2],
            };
            let u = CropInputSimple {
                temp: v[3],
                drought: v[4],
                radiation: v[5],
                co2: v[6],
            };
            let next = simple_step(&x, &u, &self.p, &self.s)?;
            Ok(next.components().to_vec())
        }
    }

    #[test]
    fn step_jacobian_matches_finite_differences() {
        let map = StepMap {
            p: params(),
            s: smoothing(),
        };
        for point in [
            [0.3, 450.0, 410.0, 23.0, 0.2, 9.0, 520.0],
            [1.2, 1800.0, 520.0, 31.0, 0.1, 14.0, 650.0],
            [0.05, 90.0, 400.0, 12.0, 0.6, 3.0, 380.0],
        ] {
            let exact = jacobian(&map, &point).unwrap();
            let fd = fd_jacobian(&map, &point, 1e-6).unwrap();
            // floor keeps FD cancellation noise on near-zero entries from
            // registering as relative error
            let err = max_rel_error(&exact, &fd, 1e-3);
            assert!(err < 1e-5, "rel error {err} at {point:?}");
        }
    }

    #[test]
    fn co2_derivative_vanishes_above_saturation() {
        let map = StepMap {
            p: params(),
            s: smoothing(),
        };
        for co2 in [710.0, 800.0, 1000.0, 1200.0] {
            let point = [0.5, 600.0, 420.0, 24.0, 0.0, 12.0, co2];
            let j = jacobian(&map, &point).unwrap();
            // d(biomass')/d(co2)
            assert!(j[0][6].abs() < 1e-9, "dgain/dCO2 = {} at {co2}", j[0][6]);
        }
    }
}
