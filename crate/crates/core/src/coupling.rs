//! Daily combined crop/greenhouse recursion: advance the hourly greenhouse
//! model 24 times under one constant daily control, map the day's mean
//! greenhouse conditions to crop inputs, and advance the crop one day.
//!
//! The combined state holds the crop state followed by the 24 hourly
//! greenhouse states of the day, in that order; [`CombinedState::flatten`]
//! exposes that layout to the sensitivity machinery.

use crate::crop::simple::{simple_step, CropInputSimple, CropStateSimple, SimpleParams};
use crate::crop::tomgro::{tomgro_step, CropInputTomgro, CropStateTomgro, TomgroParams};
use crate::crop::CropModel;
use crate::error::{ModelError, Result};
use crate::greenhouse::{gh_step, Disturbance, GhControl, GhParams, GhState, GH_STATE_DIM};
use crate::scalar::Scalar;
use crate::smoothing::SmoothingParams;
use serde::{Deserialize, Serialize};

pub const HOURS_PER_DAY: usize = 24;
const SECONDS_PER_HOUR: f64 = 3600.0;

/// Crop state tagged by the model choice; the tag is fixed over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CropState<S> {
    Simple(CropStateSimple<S>),
    Tomgro(CropStateTomgro<S>),
}

impl<S: Scalar> CropState<S> {
    pub fn model(&self) -> CropModel {
        match self {
            CropState::Simple(_) => CropModel::Simple,
            CropState::Tomgro(_) => CropModel::Tomgro,
        }
    }

    pub fn components(&self) -> Vec<S> {
        match self {
            CropState::Simple(x) => x.components().to_vec(),
            CropState::Tomgro(x) => x.components().to_vec(),
        }
    }

    /// Dry fruit weight of the current state: `HI * m_B` for SIMPLE, the
    /// fruit dry-weight component for TOMGRO (the state the two models share).
    pub fn fruit_dry_weight(&self, simple_params: &SimpleParams) -> S {
        match self {
            CropState::Simple(x) => S::from_f64(simple_params.harvest_index) * x.biomass,
            CropState::Tomgro(x) => x.fruit_weight,
        }
    }

    pub fn value(&self) -> CropState<f64> {
        match self {
            CropState::Simple(x) => CropState::Simple(x.value()),
            CropState::Tomgro(x) => CropState::Tomgro(x.value()),
        }
    }
}

impl CropState<f64> {
    pub fn lift<S: Scalar>(&self) -> CropState<S> {
        match self {
            CropState::Simple(x) => CropState::Simple(x.lift()),
            CropState::Tomgro(x) => CropState::Tomgro(x.lift()),
        }
    }
}

/// Combined state of one day: crop state plus the 24 hourly greenhouse
/// states of that day.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedState<S> {
    pub crop: CropState<S>,
    pub gh_hours: Vec<GhState<S>>,
}

impl<S: Scalar> CombinedState<S> {
    pub fn new(crop: CropState<S>, gh_hours: Vec<GhState<S>>) -> Result<Self> {
        if gh_hours.len() != HOURS_PER_DAY {
            return Err(ModelError::Shape {
                expected: HOURS_PER_DAY,
                got: gh_hours.len(),
            });
        }
        Ok(Self { crop, gh_hours })
    }

    /// Day state seeded by replicating one greenhouse state over 24 hours.
    pub fn with_uniform_gh(crop: CropState<S>, gh: GhState<S>) -> Self {
        Self {
            crop,
            gh_hours: vec![gh; HOURS_PER_DAY],
        }
    }

    pub fn dim(&self) -> usize {
        self.crop.model().state_dim() + HOURS_PER_DAY * GH_STATE_DIM
    }

    /// Layout: crop components, then hour 0..23 greenhouse components.
    pub fn flatten(&self) -> Vec<S> {
        let mut out = self.crop.components();
        out.reserve(HOURS_PER_DAY * GH_STATE_DIM);
        for h in &self.gh_hours {
            out.extend_from_slice(&h.components());
        }
        out
    }

    pub fn unflatten(model: CropModel, v: &[S]) -> Result<Self> {
        let crop_dim = model.state_dim();
        let expected = crop_dim + HOURS_PER_DAY * GH_STATE_DIM;
        if v.len() != expected {
            return Err(ModelError::Shape {
                expected,
                got: v.len(),
            });
        }
        let crop = match model {
            CropModel::Simple => {
                CropState::Simple(CropStateSimple::from_components([v[0], v[1], v[2]]))
            }
            CropModel::Tomgro => CropState::Tomgro(CropStateTomgro::from_components([
                v[0], v[1], v[2], v[3], v[4],
            ])),
        };
        let gh_hours = v[crop_dim..]
            .chunks_exact(GH_STATE_DIM)
            .map(|c| GhState::from_components([c[0], c[1], c[2], c[3], c[4]]))
            .collect();
        Ok(Self { crop, gh_hours })
    }

    pub fn value(&self) -> CombinedState<f64> {
        CombinedState {
            crop: self.crop.value(),
            gh_hours: self.gh_hours.iter().map(|h| h.value()).collect(),
        }
    }
}

impl CombinedState<f64> {
    pub fn lift<S: Scalar>(&self) -> CombinedState<S> {
        CombinedState {
            crop: self.crop.lift(),
            gh_hours: self.gh_hours.iter().map(|h| h.lift()).collect(),
        }
    }
}

/// Crop parameter set matching the state tag.
#[derive(Debug, Clone, PartialEq)]
pub enum CropParams {
    Simple(SimpleParams),
    Tomgro(TomgroParams),
}

impl CropParams {
    pub fn model(&self) -> CropModel {
        match self {
            CropParams::Simple(_) => CropModel::Simple,
            CropParams::Tomgro(_) => CropModel::Tomgro,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CropParams::Simple(p) => p.validate(),
            CropParams::Tomgro(p) => p.validate(),
        }
    }
}

/// Parameters of the daily coupling itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingParams {
    /// Daytime hours `[start, end)` used for the TOMGRO daytime mean.
    pub daytime_start: usize,
    /// Exclusive end hour of the daytime window.
    pub daytime_end: usize,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self {
            daytime_start: 6,
            daytime_end: 18,
        }
    }
}

impl CouplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.daytime_start >= self.daytime_end || self.daytime_end > HOURS_PER_DAY {
            return Err(ModelError::Config(format!(
                "daytime window [{}, {}) must be non-empty and within 24 hours",
                self.daytime_start, self.daytime_end
            )));
        }
        Ok(())
    }
}

/// Everything needed to advance the combined model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub crop: CropParams,
    pub gh: GhParams,
    pub coupling: CouplingParams,
    pub smoothing: SmoothingParams,
}

impl ModelSet {
    pub fn validate(&self) -> Result<()> {
        self.crop.validate()?;
        self.gh.validate()?;
        self.coupling.validate()?;
        self.smoothing.validate()
    }

    pub fn model(&self) -> CropModel {
        self.crop.model()
    }
}

/// Componentwise arithmetic mean of exactly 24 hourly states.
///
/// Computed as `x_0 + mean(x_i - x_0)` so that 24 identical states return
/// that state bit-for-bit.
pub fn gh_mean<S: Scalar>(gh_hours: &[GhState<S>]) -> Result<GhState<S>> {
    if gh_hours.len() != HOURS_PER_DAY {
        return Err(ModelError::Shape {
            expected: HOURS_PER_DAY,
            got: gh_hours.len(),
        });
    }
    let base = gh_hours[0].components();
    let mut acc = [S::zero(); GH_STATE_DIM];
    for h in gh_hours {
        let c = h.components();
        for i in 0..GH_STATE_DIM {
            acc[i] += c[i] - base[i];
        }
    }
    let n = S::from_f64(HOURS_PER_DAY as f64);
    let mut mean = base;
    for i in 0..GH_STATE_DIM {
        mean[i] += acc[i] / n;
    }
    Ok(GhState::from_components(mean))
}

/// Daily radiation integral transmitted into the greenhouse, MJ/m²/day.
///
/// The greenhouse state carries no radiation component, so the crop's
/// radiation input is the transmissivity-scaled integral of the outside
/// radiation series.
pub fn transmitted_radiation_mj(day: &[Disturbance], transmissivity: f64) -> Result<f64> {
    if day.len() != HOURS_PER_DAY {
        return Err(ModelError::Shape {
            expected: HOURS_PER_DAY,
            got: day.len(),
        });
    }
    let watt_hours: f64 = day.iter().map(|d| d.radiation).sum();
    Ok(transmissivity * watt_hours * SECONDS_PER_HOUR / 1e6)
}

/// Map mean greenhouse conditions to SIMPLE inputs: temperature and CO2
/// pass through, drought is pinned to zero (sufficient water supply is
/// guaranteed in greenhouse operation), radiation is the daily transmitted
/// integral.
pub fn map_to_simple<S: Scalar>(mean: &GhState<S>, radiation_mj: S) -> CropInputSimple<S> {
    CropInputSimple {
        temp: mean.t_air,
        drought: S::zero(),
        radiation: radiation_mj,
        co2: mean.co2,
    }
}

/// Map mean greenhouse conditions plus the hourly air-temperature profile to
/// TOMGRO inputs; the daytime mean is taken over the configured window.
pub fn map_to_tomgro<S: Scalar>(
    mean: &GhState<S>,
    hourly_t_air: &[S],
    window: &CouplingParams,
    radiation_mj: S,
) -> Result<CropInputTomgro<S>> {
    window.validate()?;
    if hourly_t_air.len() != HOURS_PER_DAY {
        return Err(ModelError::Shape {
            expected: HOURS_PER_DAY,
            got: hourly_t_air.len(),
        });
    }
    let slice = &hourly_t_air[window.daytime_start..window.daytime_end];
    let base = slice[0];
    let mut acc = S::zero();
    for &t in slice {
        acc += t - base;
    }
    let temp_day = base + acc / S::from_f64(slice.len() as f64);
    Ok(CropInputTomgro {
        temp: mean.t_air,
        temp_day,
        radiation: radiation_mj,
        co2: mean.co2,
    })
}

/// One combined day: 24 greenhouse hours under the constant daily control,
/// then one crop day driven by the mean of the newly produced hours.
pub fn combined_step<S: Scalar>(
    x: &CombinedState<S>,
    u_day: &GhControl<S>,
    d_day: &[Disturbance],
    models: &ModelSet,
) -> Result<CombinedState<S>> {
    if d_day.len() != HOURS_PER_DAY {
        return Err(ModelError::Shape {
            expected: HOURS_PER_DAY,
            got: d_day.len(),
        });
    }
    if x.gh_hours.len() != HOURS_PER_DAY {
        return Err(ModelError::Shape {
            expected: HOURS_PER_DAY,
            got: x.gh_hours.len(),
        });
    }

    let mut gh_hours = Vec::with_capacity(HOURS_PER_DAY);
    let mut current = *x.gh_hours.last().expect("length checked");
    for (hour, d) in d_day.iter().enumerate() {
        current =
            gh_step(&current, u_day, d, &models.gh, &models.smoothing).map_err(|e| match e {
                ModelError::Divergence {
                    component, value, ..
                } => ModelError::Divergence {
                    component,
                    step: hour,
                    value,
                },
                other => other,
            })?;
        gh_hours.push(current);
    }

    let mean = gh_mean(&gh_hours)?;
    let radiation = S::from_f64(transmitted_radiation_mj(d_day, models.gh.transmissivity)?);

    let crop = match (&x.crop, &models.crop) {
        (CropState::Simple(c), CropParams::Simple(p)) => {
            let input = map_to_simple(&mean, radiation);
            CropState::Simple(simple_step(c, &input, p, &models.smoothing)?)
        }
        (CropState::Tomgro(c), CropParams::Tomgro(p)) => {
            let hourly_t: Vec<S> = gh_hours.iter().map(|h| h.t_air).collect();
            let input = map_to_tomgro(&mean, &hourly_t, &models.coupling, radiation)?;
            CropState::Tomgro(tomgro_step(c, &input, p, &models.smoothing)?)
        }
        _ => {
            return Err(ModelError::Config(
                "crop state tag does not match the configured crop parameters".into(),
            ))
        }
    };

    Ok(CombinedState { crop, gh_hours })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{fd_jacobian, jacobian, max_rel_error, DiffMap};
    use approx::assert_relative_eq;

    fn gh_state(seed: f64) -> GhState<f64> {
        GhState {
            t_air: 18.0 + seed,
            t_soil: 15.0 + 0.5 * seed,
            t_pipe: 25.0 - seed,
            co2: 450.0 + 10.0 * seed,
            h2o: 0.010 + 1e-4 * seed,
        }
    }

    /// Greenhouse parameters under which one hourly step is the identity.
    fn frozen_gh_params() -> GhParams {
        GhParams {
            rad_frac_air: 0.0,
            rad_frac_soil: 0.0,
            cover_loss: 0.0,
            cover_loss_wind: 0.0,
            pipe_air_exchange: 0.0,
            soil_air_exchange: 0.0,
            subsoil_exchange: 0.0,
            heater_max: 0.0,
            vent_wind: 0.0,
            vent_buoyancy: 0.0,
            leakage: 0.0,
            co2_injection_max: 0.0,
            transpiration_frac: 0.0,
            condensation_exchange: 0.0,
            ..GhParams::default()
        }
    }

    fn mild_day() -> Vec<Disturbance> {
        (0..24)
            .map(|h| {
                let hour = h as f64;
                Disturbance {
                    radiation: (400.0 * (std::f64::consts::PI * (hour - 6.0) / 12.0).sin())
                        .max(0.0),
                    t_out: 12.0 + 5.0 * (std::f64::consts::PI * (hour - 9.0) / 12.0).sin(),
                    wind: 3.0,
                    t_soil_deep: 12.0,
                    h2o_out: 0.008,
                    co2_out: 420.0,
                }
            })
            .collect()
    }

    fn models_simple() -> ModelSet {
        ModelSet {
            crop: CropParams::Simple(SimpleParams::default()),
            gh: GhParams::default(),
            coupling: CouplingParams::default(),
            smoothing: SmoothingParams::default(),
        }
    }

    #[test]
    fn mean_of_identical_states_is_exact() {
        let s = gh_state(0.3);
        let hours = vec![s; 24];
        let mean = gh_mean(&hours).unwrap();
        // bit-for-bit, not approximately
        assert_eq!(mean, s);
    }

    #[test]
    fn mean_of_alternating_states() {
        let a = gh_state(0.0);
        let b = gh_state(2.0);
        let hours: Vec<_> = (0..24).map(|h| if h % 2 == 0 { a } else { b }).collect();
        let mean = gh_mean(&hours).unwrap();
        for (m, (ca, cb)) in mean
            .components()
            .into_iter()
            .zip(a.components().into_iter().zip(b.components()))
        {
            assert_relative_eq!(m, (ca + cb) / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn mean_matches_naive_summation_oracle() {
        // deterministic pseudo-random states
        let mut v = 0.123_f64;
        let mut next = || {
            v = (v * 9301.0 + 49297.0) % 233280.0 / 233280.0;
            v
        };
        let hours: Vec<GhState<f64>> = (0..24).map(|_| gh_state(next() * 8.0 - 4.0)).collect();
        let mean = gh_mean(&hours).unwrap();
        for i in 0..GH_STATE_DIM {
            let naive: f64 = hours.iter().map(|h| h.components()[i]).sum::<f64>() / 24.0;
            assert_relative_eq!(mean.components()[i], naive, max_relative = 1e-12);
        }
    }

    #[test]
    fn mean_rejects_wrong_length() {
        let hours = vec![gh_state(0.0); 23];
        assert!(matches!(
            gh_mean(&hours),
            Err(ModelError::Shape {
                expected: 24,
                got: 23
            })
        ));
    }

    #[test]
    fn radiation_integral_unit_check() {
        // 24 h of constant 100 W/m² fully transmitted -> 8.64 MJ/m²/day
        let day: Vec<Disturbance> = (0..24)
            .map(|_| Disturbance {
                radiation: 100.0,
                t_out: 10.0,
                wind: 0.0,
                t_soil_deep: 10.0,
                h2o_out: 0.008,
                co2_out: 420.0,
            })
            .collect();
        let r = transmitted_radiation_mj(&day, 1.0).unwrap();
        assert_relative_eq!(r, 8.64, max_relative = 1e-14);
        let r = transmitted_radiation_mj(&day, 0.5).unwrap();
        assert_relative_eq!(r, 4.32, max_relative = 1e-14);
    }

    #[test]
    fn simple_mapping_passes_through() {
        let mean = GhState {
            t_air: 27.0,
            t_soil: 20.0,
            t_pipe: 30.0,
            co2: 700.0,
            h2o: 0.012,
        };
        let input = map_to_simple(&mean, 12.5);
        assert_eq!(input.temp, 27.0);
        assert_eq!(input.co2, 700.0);
        assert_eq!(input.drought, 0.0);
        assert_eq!(input.radiation, 12.5);
    }

    #[test]
    fn tomgro_mapping_daytime_window() {
        let mean_state = GhState {
            t_air: 20.0,
            t_soil: 18.0,
            t_pipe: 25.0,
            co2: 600.0,
            h2o: 0.01,
        };
        let window = CouplingParams::default();
        // 15 °C at night, 25 °C in the 6..18 window -> T = 20, T_d = 25
        let hourly: Vec<f64> = (0..24)
            .map(|h| if (6..18).contains(&h) { 25.0 } else { 15.0 })
            .collect();
        let input = map_to_tomgro(&mean_state, &hourly, &window, 10.0).unwrap();
        assert_eq!(input.temp_day, 25.0);
        assert_eq!(input.temp, 20.0);

        // full-day window: T_d equals the mean of the profile
        let full = CouplingParams {
            daytime_start: 0,
            daytime_end: 24,
        };
        let input = map_to_tomgro(&mean_state, &hourly, &full, 10.0).unwrap();
        assert_relative_eq!(input.temp_day, 20.0, max_relative = 1e-14);

        // constant profile: T = T_d
        let flat = vec![20.0; 24];
        let input = map_to_tomgro(&mean_state, &flat, &window, 10.0).unwrap();
        assert_eq!(input.temp_day, 20.0);

        // empty window is a config error
        let empty = CouplingParams {
            daytime_start: 12,
            daytime_end: 12,
        };
        assert!(matches!(
            map_to_tomgro(&mean_state, &hourly, &empty, 10.0),
            Err(ModelError::Config(_))
        ));
    }

    #[test]
    fn frozen_gh_reduces_to_standalone_crop_step() {
        let models = ModelSet {
            gh: frozen_gh_params(),
            ..models_simple()
        };
        let crop0 = CropStateSimple {
            biomass: 0.4,
            thermal_time: 700.0,
            i50b: 400.0,
        };
        let gh0 = gh_state(0.7);
        let x = CombinedState::with_uniform_gh(CropState::Simple(crop0), gh0);
        let day = mild_day();
        let u = GhControl {
            heating: 0.0,
            vent: 0.5,
            co2: 0.0,
        };

        let next = combined_step(&x, &u, &day, &models).unwrap();

        // greenhouse hours are unchanged bit-for-bit
        for h in &next.gh_hours {
            assert_eq!(*h, gh0);
        }

        // the crop advanced exactly as the standalone step on the mapped input
        let radiation = transmitted_radiation_mj(&day, models.gh.transmissivity).unwrap();
        let input = map_to_simple(&gh0, radiation);
        let expected =
            simple_step(&crop0, &input, &SimpleParams::default(), &models.smoothing).unwrap();
        match next.crop {
            CropState::Simple(c) => assert_eq!(c, expected),
            _ => unreachable!(),
        }
    }

    #[test]
    fn flatten_unflatten_roundtrip() {
        let x = CombinedState::with_uniform_gh(
            CropState::Tomgro(CropStateTomgro {
                nodes: 12.0,
                lai: 0.8,
                total_weight: 0.12,
                fruit_weight: 0.01,
                mature_fruit_weight: 0.001,
            }),
            gh_state(1.3),
        );
        let flat = x.flatten();
        assert_eq!(flat.len(), 5 + 24 * GH_STATE_DIM);
        let back = CombinedState::unflatten(CropModel::Tomgro, &flat).unwrap();
        assert_eq!(back, x);

        let y = CombinedState::with_uniform_gh(
            CropState::Simple(CropStateSimple {
                biomass: 0.2,
                thermal_time: 300.0,
                i50b: 410.0,
            }),
            gh_state(-0.4),
        );
        let flat = y.flatten();
        assert_eq!(flat.len(), 3 + 24 * GH_STATE_DIM);
        assert_eq!(
            CombinedState::unflatten(CropModel::Simple, &flat).unwrap(),
            y
        );

        assert!(CombinedState::<f64>::unflatten(CropModel::Simple, &flat[1..]).is_err());
    }

    #[test]
    fn mismatched_crop_tag_is_rejected() {
        let models = models_simple();
        let x = CombinedState::with_uniform_gh(
            CropState::Tomgro(CropStateTomgro {
                nodes: 6.0,
                lai: 0.02,
                total_weight: 4e-3,
                fruit_weight: 1e-4,
                mature_fruit_weight: 0.0,
            }),
            gh_state(0.0),
        );
        let u = GhControl {
            heating: 0.2,
            vent: 0.2,
            co2: 0.2,
        };
        assert!(matches!(
            combined_step(&x, &u, &mild_day(), &models),
            Err(ModelError::Config(_))
        ));
    }

    /// Three combined days as a map from the 9 daily controls to the final
    /// flattened state.
    struct ThreeDayRollout {
        models: ModelSet,
        x0: CombinedState<f64>,
        days: Vec<Vec<Disturbance>>,
    }

    impl DiffMap for ThreeDayRollout {
        fn eval<S: Scalar>(&self, v: &[S]) -> Result<Vec<S>> {
            let mut x = self.x0.lift::<S>();
            for (day, d) in self.days.iter().enumerate() {
                let u = GhControl {
                    heating: v[3 * day],
                    vent: v[3 * day + 1],
                    co2: v[3 * day + 2],
                };
                x = combined_step(&x, &u, d, &self.models)?;
            }
            Ok(x.flatten())
        }
    }

    #[test]
    fn three_day_chained_jacobian_matches_finite_differences() {
        let crop0 = CropStateSimple {
            biomass: 0.2,
            thermal_time: 400.0,
            i50b: 400.0,
        };
        let rollout = ThreeDayRollout {
            models: models_simple(),
            x0: CombinedState::with_uniform_gh(CropState::Simple(crop0), gh_state(0.0)),
            days: vec![mild_day(), mild_day(), mild_day()],
        };
        let controls = [0.4, 0.3, 0.2, 0.5, 0.1, 0.3, 0.2, 0.6, 0.4];
        let exact = jacobian(&rollout, &controls).unwrap();
        let fd = fd_jacobian(&rollout, &controls, 1e-6).unwrap();
        let err = max_rel_error(&exact, &fd, 1e-3);
        assert!(err < 1e-4, "rel error {err}");

        // day-3 crop state responds to the day-1 control
        let crop_rows = &exact[0..3];
        assert!(crop_rows.iter().any(|row| row[0].abs() > 0.0));
    }
}
