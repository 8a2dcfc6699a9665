//! TOML run configuration. Every section is optional; missing keys take the
//! desk-scale defaults.

use std::path::{Path, PathBuf};

use cgl_trigger::continuation::Spacing;
use cgl_trigger::dispersion::{linear_spreading, CGLParams};
use cgl_trigger::simulate::{Grid, InitialCondition, MeasureConfig, Splitting};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub alpha: f64,
    pub gamma: f64,
    pub chi_minus: f64,
    pub chi_plus: f64,
}

impl Default for Model {
    fn default() -> Self {
        Self { alpha: -0.1, gamma: -0.2, chi_minus: 1.0, chi_plus: -1.0 }
    }
}

impl Model {
    pub fn params(&self) -> Result<CGLParams, Failure> {
        CGLParams::with_trigger(self.alpha, self.gamma, self.chi_minus, self.chi_plus).map_err(Failure::from)
    }
}

/// A list of values, given explicitly or as `points` evenly spaced values
/// from `start` to `end` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Values(Vec<f64>),
    Range { start: f64, end: f64, points: usize },
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Range { start, end, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (end - start) * i as f64 / (*n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    /// Trigger speeds; defaults to 40 speeds from 1.6 up to `c_lin − 10⁻³`.
    pub speeds: Option<Sweep>,
    /// Optional sweep over `γ` at fixed speed `gamma_sweep_speed`.
    pub gamma_sweep: Option<Sweep>,
    pub gamma_sweep_speed: f64,
    /// Interface threshold on `|A|`.
    pub delta: f64,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self { speeds: None, gamma_sweep: None, gamma_sweep_speed: 1.8, delta: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootConfig {
    pub gamma_hat: Sweep,
    /// Event threshold on `R`.
    pub delta: f64,
    /// Thresholds for the invariance table of `ΔZ_i`, at the model's `γ̂`.
    pub delta_sweep: Option<Sweep>,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self { gamma_hat: Sweep::Range { start: 0.0, end: 10.0, points: 101 }, delta: 1e-3, delta_sweep: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub length_left: f64,
    pub length_right: f64,
    pub n_points: usize,
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid, Failure> {
        Grid::new(self.length_left, self.length_right, self.n_points).map_err(Failure::from)
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = Grid::desk();
        Self { length_left: g.length_left, length_right: g.length_right, n_points: g.n_points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Absolute trigger speeds.
    pub speeds: Option<Sweep>,
    /// Speeds as multiples of `c_lin`; used when `speeds` is absent.
    pub speed_factors: Option<Sweep>,
    pub t_end: f64,
    pub dt: f64,
    pub splitting: Splitting,
    pub grid: GridConfig,
    pub init: InitialCondition,
    /// Time between space-time snapshots; 0 disables them.
    pub snapshot_every: f64,
    pub snapshot_stride: usize,
    /// Measure the wake wavenumber and the interface.
    pub measure: bool,
    pub delta: f64,
    pub window_far: f64,
    pub window_near: f64,
    pub t_start_frac: f64,
    pub sample_every: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let m = MeasureConfig::default();
        Self {
            speeds: None,
            speed_factors: None,
            t_end: 1500.0,
            dt: 5e-3,
            splitting: Splitting::Strang,
            grid: GridConfig::default(),
            init: InitialCondition::default(),
            snapshot_every: 0.0,
            snapshot_stride: 8,
            measure: true,
            delta: m.delta,
            window_far: m.far,
            window_near: m.near,
            t_start_frac: m.t_start_frac,
            sample_every: m.sample_every,
        }
    }
}

impl SimulateConfig {
    pub fn measure_config(&self) -> MeasureConfig {
        MeasureConfig { delta: self.delta, far: self.window_far, near: self.window_near, t_start_frac: self.t_start_frac, sample_every: self.sample_every }
    }

    pub fn resolve_speeds(&self, params: &CGLParams) -> Vec<f64> {
        if let Some(s) = &self.speeds {
            return s.values();
        }
        let c_lin = linear_spreading(params).c_lin;
        match &self.speed_factors {
            Some(f) => f.values().into_iter().map(|x| x * c_lin).collect(),
            None => vec![1.8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingConfig {
    Linear,
    LogGap,
}

impl From<SpacingConfig> for Spacing {
    fn from(s: SpacingConfig) -> Self {
        match s {
            SpacingConfig::Linear => Spacing::Linear,
            SpacingConfig::LogGap => Spacing::LogGap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinueConfig {
    /// Defaults to `c_lin − 0.02`.
    pub c_start: Option<f64>,
    pub c_end: f64,
    pub points: usize,
    pub spacing: SpacingConfig,
    pub j: u32,
    /// Collocation node spacing.
    pub mesh_h: f64,
    pub delta: f64,
    /// Speeds at which the full profile is written.
    pub profiles_at: Vec<f64>,
    /// Solve a single point at this `Δc` instead of a branch.
    pub single_point: Option<f64>,
}

impl Default for ContinueConfig {
    fn default() -> Self {
        Self {
            c_start: None,
            c_end: 0.05,
            points: 60,
            spacing: SpacingConfig::Linear,
            j: 1,
            mesh_h: 0.05,
            delta: 0.1,
            profiles_at: Vec::new(),
            single_point: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Defaults to eight speeds from 1.8 to `0.995·c_lin`.
    pub speeds: Option<Sweep>,
    /// Existing `simulate.csv` to reuse instead of running simulations.
    pub simulation_csv: Option<PathBuf>,
    /// Range of `Δc` for the power-law fit of `ω_tf − ω_abs`.
    pub fit_gap: [f64; 2],
    pub fit_points: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { speeds: None, simulation_csv: None, fit_gap: [1e-3, 1e-1], fit_points: 21 }
    }
}

impl CompareConfig {
    pub fn resolve_speeds(&self, params: &CGLParams) -> Vec<f64> {
        match &self.speeds {
            Some(s) => s.values(),
            None => Sweep::Range { start: 1.8, end: 0.995 * linear_spreading(params).c_lin, points: 8 }.values(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: Model,
    pub predict: PredictConfig,
    pub shoot: ShootConfig,
    pub simulate: SimulateConfig,
    #[serde(rename = "continue")]
    pub continuation: ContinueConfig,
    pub compare: CompareConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// Switches the simulation defaults to the long domain and run time.
    pub fn apply_paper_scale(&mut self) {
        let g = Grid::paper_scale();
        self.simulate.grid = GridConfig { length_left: g.length_left, length_right: g.length_right, n_points: g.n_points };
        self.simulate.t_end = 5000.0;
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_forms() {
        assert_eq!(Sweep::Range { start: 0.0, end: 1.0, points: 3 }.values(), vec![0.0, 0.5, 1.0]);
        assert!(Sweep::Range { start: 0.0, end: 1.0, points: 0 }.values().is_empty());
        let c: PredictConfig = toml::from_str("speeds = [1.7, 1.8]").unwrap();
        assert_eq!(c.speeds.unwrap().values(), vec![1.7, 1.8]);
        let c: PredictConfig = toml::from_str("speeds = { start = 1.0, end = 2.0, points = 2 }").unwrap();
        assert_eq!(c.speeds.unwrap().values(), vec![1.0, 2.0]);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = Config::default();
        c.continuation.profiles_at = vec![0.5, 1.9];
        c.apply_paper_scale();
        let back: Config = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[model]\nalpha = 0.1\nbeta = 2").is_err());
        let c: Config = toml::from_str("[simulate]\ninit = { kind = \"step\", position = -10.0 }").unwrap();
        assert_eq!(c.simulate.init, InitialCondition::Step { position: -10.0 });
    }
}
