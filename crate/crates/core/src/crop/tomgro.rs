//! Reduced TOMGRO model: a five-state daily recursion for tomato growth
//! (node count, leaf area index, total / fruit / mature-fruit dry weight).
//!
//! The state-update equations and their temperature sub-functions follow the
//! reduced-model publication; every piecewise-defined branch is realized with
//! the smoothed maximum / Heaviside primitives so the map is differentiable.
//! Two output modes exist: `raw` keeps the faithful smoothed dynamics (fruit
//! weight may dip slightly negative early in a cold trajectory, as in the
//! reference trajectories) and `floored` clamps states at zero with the
//! smoothed positive part.

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;
use crate::smoothing::{soft_heaviside, soft_pos, soft_trapezoid, SmoothingParams};
use serde::{Deserialize, Serialize};

/// Conversion between daily radiation (MJ/m²/day) and photosynthetic photon
/// flux density (µmol/m²/s) for white light: `PPFD = R / 0.037`.
pub const PPFD_MJ_PER_UMOL_DAY: f64 = 0.037;

/// Daily crop state of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropStateTomgro<S> {
    /// Main-stem node count (dimensionless).
    pub nodes: S,
    /// Leaf area index, m²/m².
    pub lai: S,
    /// Total plant dry weight, kg/m².
    pub total_weight: S,
    /// Fruit dry weight, kg/m².
    pub fruit_weight: S,
    /// Mature fruit dry weight, kg/m².
    pub mature_fruit_weight: S,
}

impl CropStateTomgro<f64> {
    pub fn lift<S: Scalar>(&self) -> CropStateTomgro<S> {
        CropStateTomgro {
            nodes: S::from_f64(self.nodes),
            lai: S::from_f64(self.lai),
            total_weight: S::from_f64(self.total_weight),
            fruit_weight: S::from_f64(self.fruit_weight),
            mature_fruit_weight: S::from_f64(self.mature_fruit_weight),
        }
    }
}

impl<S: Scalar> CropStateTomgro<S> {
    pub fn components(&self) -> [S; 5] {
        [
            self.nodes,
            self.lai,
            self.total_weight,
            self.fruit_weight,
            self.mature_fruit_weight,
        ]
    }

    pub fn from_components(c: [S; 5]) -> Self {
        Self {
            nodes: c[0],
            lai: c[1],
            total_weight: c[2],
            fruit_weight: c[3],
            mature_fruit_weight: c[4],
        }
    }

    pub fn value(&self) -> CropStateTomgro<f64> {
        CropStateTomgro {
            nodes: self.nodes.value(),
            lai: self.lai.value(),
            total_weight: self.total_weight.value(),
            fruit_weight: self.fruit_weight.value(),
            mature_fruit_weight: self.mature_fruit_weight.value(),
        }
    }
}

/// Daily inputs: whole-day and daytime mean temperature, radiation, CO2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropInputTomgro<S> {
    /// Whole-day mean temperature, °C.
    pub temp: S,
    /// Daytime mean temperature, °C.
    pub temp_day: S,
    /// Daily solar radiation, MJ/m²/day.
    pub radiation: S,
    /// CO2 concentration, ppm.
    pub co2: S,
}

/// How step outputs treat small negative excursions from smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    /// Faithful smoothed dynamics (reference behavior).
    #[default]
    Raw,
    /// Weights passed through `soft_max(·, 0)` after each step.
    Floored,
}

/// Coefficient set of the reduced model. Temperature responses are
/// trapezoids `[t0, t1, t2, t3]`: zero below `t0`, one on `[t1, t2]`, zero
/// above `t3`. Defaults approximate the published greenhouse calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomgroParams {
    /// Maximum node development rate, nodes/day.
    pub node_rate_max: f64,
    /// Temperature response of node development, °C corners.
    pub node_temp: [f64; 4],
    /// Plant density, plants/m².
    pub plant_density: f64,
    /// Maximum leaf area expansion per node, m² per node per plant.
    pub leaf_area_per_node: f64,
    /// Temperature response of leaf expansion (daytime mean), °C corners.
    pub lai_temp: [f64; 4],
    /// Slope of the expolinear node response, 1/node.
    pub node_expolinear_slope: f64,
    /// Node offset of the expolinear response, nodes.
    pub node_expolinear_offset: f64,
    /// Leaf area index at which expansion stops and pruning starts.
    pub lai_max: f64,
    /// Canopy light extinction coefficient.
    pub light_extinction: f64,
    /// Leaf light transmission coefficient.
    pub leaf_transmission: f64,
    /// Leaf quantum efficiency, µmol CO2 per µmol photons.
    pub quantum_efficiency: f64,
    /// Slope of maximum leaf photosynthesis vs CO2, µmol CO2/(m²·s·ppm).
    pub co2_slope: f64,
    /// Conversion of canopy photosynthesis to daily assimilate,
    /// (g CH2O/m²/day) per (µmol CO2/m²/s).
    pub photosynthesis_conversion: f64,
    /// Temperature response of photosynthesis (daytime mean), °C corners.
    pub photosynthesis_temp: [f64; 4],
    /// Growth efficiency, g dry weight per g CH2O.
    pub growth_efficiency: f64,
    /// Maintenance respiration coefficient at 20 °C, g CH2O per g dw per day.
    pub maintenance_coef: f64,
    /// Q10 of maintenance respiration.
    pub q10: f64,
    /// Root partition fraction at zero nodes.
    pub root_fraction_max: f64,
    /// Root partition fraction for a mature plant.
    pub root_fraction_min: f64,
    /// Exponential decay of root partitioning with nodes, 1/node.
    pub root_fraction_decay: f64,
    /// Leaf dry weight removed per node by pruning once the canopy is full,
    /// kg per node per plant.
    pub leaf_prune_weight: f64,
    /// Maximum partition fraction of net growth to fruit.
    pub fruit_partition_max: f64,
    /// Temperature response of fruit partitioning (daytime mean), °C corners.
    pub fruit_partition_temp: [f64; 4],
    /// Node count at first fruit set.
    pub fruit_onset_node: f64,
    /// Transition rate of fruit partitioning past onset, 1/node.
    pub fruit_growth_transition: f64,
    /// Nodes past onset before fruits start maturing.
    pub fruit_maturity_offset_nodes: f64,
    /// Slope of fruit development rate vs mean temperature, 1/(day·°C).
    pub fruit_development_slope: f64,
    /// Intercept of fruit development rate, 1/day.
    pub fruit_development_intercept: f64,
    /// Daily mean temperature above which fruit set is reduced, °C.
    pub fruit_abort_critical_temp: f64,
    /// Fruit-set reduction per °C above the critical temperature.
    pub fruit_abort_slope: f64,
    /// Output clamping mode.
    pub output_mode: OutputMode,
}

impl Default for TomgroParams {
    fn default() -> Self {
        Self {
            node_rate_max: 0.5,
            node_temp: [-10.0, 30.0, 30.0, 50.0],
            plant_density: 3.12,
            leaf_area_per_node: 0.038,
            lai_temp: [6.0, 12.0, 28.0, 40.0],
            node_expolinear_slope: 0.169,
            node_expolinear_offset: 16.0,
            lai_max: 4.0,
            light_extinction: 0.58,
            leaf_transmission: 0.1,
            quantum_efficiency: 0.0645,
            co2_slope: 0.0693,
            photosynthesis_conversion: 2.593,
            photosynthesis_temp: [0.0, 12.0, 35.0, 50.0],
            growth_efficiency: 0.717,
            maintenance_coef: 0.016,
            q10: 1.4,
            root_fraction_max: 0.20,
            root_fraction_min: 0.07,
            root_fraction_decay: 0.08,
            leaf_prune_weight: 2.0e-3,
            fruit_partition_max: 0.80,
            fruit_partition_temp: [8.0, 18.0, 28.0, 40.0],
            fruit_onset_node: 22.0,
            fruit_growth_transition: 0.135,
            fruit_maturity_offset_nodes: 5.0,
            fruit_development_slope: 0.0017,
            fruit_development_intercept: -0.015,
            fruit_abort_critical_temp: 28.0,
            fruit_abort_slope: 0.0154,
            output_mode: OutputMode::Raw,
        }
    }
}

impl TomgroParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(ModelError::Parameter(m));
        let corners_ok = |c: [f64; 4]| c[0] < c[1] && c[1] <= c[2] && c[2] < c[3];
        for (name, c) in [
            ("node_temp", self.node_temp),
            ("lai_temp", self.lai_temp),
            ("photosynthesis_temp", self.photosynthesis_temp),
            ("fruit_partition_temp", self.fruit_partition_temp),
        ] {
            if !corners_ok(c) {
                return err(format!("{name} corners must be ordered, got {c:?}"));
            }
        }
        for (name, v) in [
            ("node_rate_max", self.node_rate_max),
            ("plant_density", self.plant_density),
            ("leaf_area_per_node", self.leaf_area_per_node),
            ("node_expolinear_slope", self.node_expolinear_slope),
            ("lai_max", self.lai_max),
            ("light_extinction", self.light_extinction),
            ("quantum_efficiency", self.quantum_efficiency),
            ("co2_slope", self.co2_slope),
            ("photosynthesis_conversion", self.photosynthesis_conversion),
            ("growth_efficiency", self.growth_efficiency),
            ("q10", self.q10),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [
            ("maintenance_coef", self.maintenance_coef),
            ("leaf_prune_weight", self.leaf_prune_weight),
            ("fruit_onset_node", self.fruit_onset_node),
            ("fruit_growth_transition", self.fruit_growth_transition),
            ("fruit_maturity_offset_nodes", self.fruit_maturity_offset_nodes),
            ("fruit_abort_slope", self.fruit_abort_slope),
        ] {
            if v < 0.0 || !v.is_finite() {
                return err(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if !(self.leaf_transmission >= 0.0 && self.leaf_transmission < 1.0) {
            return err(format!(
                "leaf_transmission must be in [0,1), got {}",
                self.leaf_transmission
            ));
        }
        if !(self.fruit_partition_max > 0.0 && self.fruit_partition_max <= 1.0) {
            return err(format!(
                "fruit_partition_max must be in (0,1], got {}",
                self.fruit_partition_max
            ));
        }
        if !(self.root_fraction_min >= 0.0
            && self.root_fraction_min <= self.root_fraction_max
            && self.root_fraction_max < 1.0)
        {
            return err("root fractions must satisfy 0 <= min <= max < 1".into());
        }
        if self.root_fraction_decay < 0.0 {
            return err("root_fraction_decay must be non-negative".into());
        }
        Ok(())
    }
}

/// Daily radiation to photosynthetic photon flux density (white light).
pub fn ppfd_from_radiation<S: Scalar>(radiation: S) -> Result<S> {
    if radiation.value() < 0.0 {
        return Err(ModelError::Domain(format!(
            "radiation must be non-negative, got {}",
            radiation.value()
        )));
    }
    Ok(radiation / S::from_f64(PPFD_MJ_PER_UMOL_DAY))
}

fn check_inputs<S: Scalar>(x: &CropStateTomgro<S>, u: &CropInputTomgro<S>) -> Result<()> {
    for (v, name) in [
        (x.nodes, "nodes"),
        (x.lai, "lai"),
        (x.total_weight, "total_weight"),
        (x.fruit_weight, "fruit_weight"),
        (x.mature_fruit_weight, "mature_fruit_weight"),
        (u.temp, "temp"),
        (u.temp_day, "temp_day"),
        (u.radiation, "radiation"),
        (u.co2, "co2"),
    ] {
        if !v.is_finite_value() {
            return Err(ModelError::NumericInput(format!(
                "TOMGRO step: `{name}` is {}",
                v.value()
            )));
        }
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

/// Daily gross canopy photosynthesis, g CH2O/m²/day.
fn gross_photosynthesis<S: Scalar>(
    lai: S,
    u: &CropInputTomgro<S>,
    p: &TomgroParams,
    s: &SmoothingParams,
) -> Result<S> {
    let c = S::from_f64;
    let ppfd = ppfd_from_radiation(u.radiation)?;
    let lf_max = c(p.co2_slope) * u.co2;
    let pgred = soft_trapezoid(u.temp_day, p.photosynthesis_temp, s.mu);
    let k = p.light_extinction;
    let absorbed = c(p.quantum_efficiency * k) * ppfd;
    let top = c(1.0 - p.leaf_transmission) * lf_max + absorbed;
    let bottom = c(1.0 - p.leaf_transmission) * lf_max + absorbed * (-c(k) * lai).exp();
    Ok(c(p.photosynthesis_conversion / k) * lf_max * pgred * (top / bottom).ln())
}

/// One day of the reduced TOMGRO recursion.
pub fn tomgro_step<S: Scalar>(
    x: &CropStateTomgro<S>,
    u: &CropInputTomgro<S>,
    p: &TomgroParams,
    s: &SmoothingParams,
) -> Result<CropStateTomgro<S>> {
    check_inputs(x, u)?;
    p.validate()?;

    let c = S::from_f64;

    // node development, exactly non-negative and bounded by the max rate
    // up to the smoothing halo of the trapezoid
    let d_nodes = c(p.node_rate_max) * soft_trapezoid(u.temp, p.node_temp, s.mu);

    // leaf expansion: expolinear in nodes, gated off as LAI approaches max
    let expo = soft_heaviside(
        x.nodes - c(p.node_expolinear_offset),
        p.node_expolinear_slope,
    );
    let lai_gate = soft_heaviside(c(p.lai_max) - x.lai, s.epsilon);
    let lambda_t = soft_trapezoid(u.temp_day, p.lai_temp, s.mu);
    let d_lai = c(p.plant_density * p.leaf_area_per_node) * lambda_t * expo * d_nodes * lai_gate;

    // carbon balance (g CH2O/m²/day), then to dry weight (kg/m²)
    let pg = gross_photosynthesis(x.lai, u, p, s)?;
    let q10_factor = (c((p.q10).ln()) * (u.temp - c(20.0)) / c(10.0)).exp();
    let respiring = soft_pos(x.total_weight - x.mature_fruit_weight, s.mu) * c(1000.0);
    let rm = c(p.maintenance_coef) * q10_factor * respiring;
    let root_frac = c(p.root_fraction_min)
        + c(p.root_fraction_max - p.root_fraction_min)
            * (-c(p.root_fraction_decay) * x.nodes).exp();
    let gr_net = c(p.growth_efficiency * 1e-3) * (pg - rm) * (S::one() - root_frac);

    // leaf pruning once the canopy is full
    let prune = c(p.leaf_prune_weight * p.plant_density)
        * d_nodes
        * soft_heaviside(x.lai - c(p.lai_max), s.epsilon);
    let d_total = gr_net - prune;

    // fruit partitioning: onset past the first fruiting node, reduced by
    // cool daytime temperatures and by supra-critical daily means
    let onset = S::one() - (-c(p.fruit_growth_transition) * soft_pos(x.nodes - c(p.fruit_onset_node), s.mu)).exp();
    let f_f = soft_trapezoid(u.temp_day, p.fruit_partition_temp, s.mu);
    let abort = soft_pos(
        S::one() - c(p.fruit_abort_slope) * soft_pos(u.temp - c(p.fruit_abort_critical_temp), s.mu),
        s.mu,
    );
    let d_fruit = gr_net * c(p.fruit_partition_max) * f_f * onset * abort;

    // fruit maturation
    let mature_gate = soft_heaviside(
        x.nodes - c(p.fruit_onset_node + p.fruit_maturity_offset_nodes),
        s.epsilon,
    );
    let development = soft_pos(
        c(p.fruit_development_slope) * u.temp + c(p.fruit_development_intercept),
        s.mu,
    );
    let d_mature = development * soft_pos(x.fruit_weight - x.mature_fruit_weight, s.mu) * mature_gate;

    let mut next = CropStateTomgro {
        nodes: x.nodes + d_nodes,
        lai: x.lai + d_lai,
        total_weight: x.total_weight + d_total,
        fruit_weight: x.fruit_weight + d_fruit,
        mature_fruit_weight: x.mature_fruit_weight + d_mature,
    };
    if p.output_mode == OutputMode::Floored {
        next.lai = soft_pos(next.lai, s.mu);
        next.total_weight = soft_pos(next.total_weight, s.mu);
        next.fruit_weight = soft_pos(next.fruit_weight, s.mu);
        next.mature_fruit_weight = soft_pos(next.mature_fruit_weight, s.mu);
    }
    Ok(next)
}
