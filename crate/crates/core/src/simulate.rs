//! Pseudo-spectral simulation of the triggered equation
//! `A_t = (1+iα)A_ξξ + sA_ξ + χ(ξ − (c−s)t)A − (1+iγ)|A|²A` on a periodic
//! grid moving with speed `s`, plus wake and interface measurements.
//!
//! The linear part is integrated exactly in Fourier space; the local
//! reaction term is integrated with Heun's method. Strang splitting is the
//! default; Lie splitting is available as a first-order reference.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dispersion::CGLParams;
use crate::error::{Error, Result};

/// Bound on `max|A|` above which a run is declared unstable.
pub const BLOWUP_BOUND: f64 = 1e6;
/// Right-edge magnitude above which [`RunDiagnostics::leak_exceeded`] is set.
pub const LEAK_TOLERANCE: f64 = 1e-6;

/// Periodic grid on `[−length_left, length_right)`; the trigger starts at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub length_left: f64,
    pub length_right: f64,
    pub n_points: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(length_left: f64, length_right: f64, n_points: usize) -> Result<Self> {
        if !(length_left >= 0.0 && length_right >= 0.0 && length_left + length_right > 0.0) {
            return Err(Error::InvalidGrid(format!("lengths must be non-negative with positive sum (got {length_left}, {length_right})")));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_points = {n_points} must be a power of two >= 4")));
        }
        Ok(Self { length_left, length_right, n_points, dx: (length_left + length_right) / n_points as f64 })
    }

    /// Desk-scale default: `L₋ = 600`, `L₊ = 100`, 8192 points.
    pub fn desk() -> Self {
        Self::new(600.0, 100.0, 8192).expect("valid default grid")
    }

    /// Large-domain setting: `L = 2400` with `dx ≈ 0.0732`.
    pub fn paper_scale() -> Self {
        Self::new(2200.0, 200.0, 32768).expect("valid default grid")
    }

    pub fn total_length(&self) -> f64 {
        self.length_left + self.length_right
    }

    pub fn xi(&self, j: usize) -> f64 {
        -self.length_left + j as f64 * self.dx
    }

    /// Index of the grid point nearest to `xi`, clamped to the grid.
    pub fn index_of(&self, xi: f64) -> usize {
        (((xi + self.length_left) / self.dx).round().max(0.0) as usize).min(self.n_points - 1)
    }

    /// Angular wavenumber of Fourier mode `j` in FFT ordering.
    fn mode(&self, j: usize) -> f64 {
        let n = self.n_points as isize;
        let jj = j as isize;
        let m = if jj <= n / 2 { jj } else { jj - n };
        2.0 * std::f64::consts::PI * m as f64 / self.total_length()
    }
}

/// Amplitude on the grid, simulation time and frame speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid,
    pub a: Vec<Complex64>,
    pub t: f64,
    pub frame_speed: f64,
}

impl FieldState {
    pub fn zeros(grid: Grid, frame_speed: f64) -> Self {
        Self { grid, a: vec![Complex64::new(0.0, 0.0); grid.n_points], t: 0.0, frame_speed }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Lie,
    #[default]
    Strang,
}

/// Spatial profile of `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    /// Step from `χ₋` to `χ₊` at the trigger position.
    Trigger,
    /// Constant `χ` everywhere.
    Uniform(f64),
}

/// Stepping configuration shared by [`Stepper`] and [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub splitting: Splitting,
    pub medium: Medium,
    /// Points between the trigger and the nearest `|A| ≥ floor` to its left
    /// are reset to zero after every step; `None` disables this.
    pub gap_floor: Option<f64>,
    /// Length of the absorbing layer `χ = χ₊` at the left end of the
    /// domain, which damps the wake before it wraps around.
    pub sponge: f64,
    /// Width of the tanh ramp between the layer and `χ₋` (the trigger itself
    /// stays a sharp step).
    pub sponge_ramp: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { dt: 5e-3, splitting: Splitting::Strang, medium: Medium::Trigger, gap_floor: Some(1e-13), sponge: 40.0, sponge_ramp: 3.0 }
    }
}

/// Reusable split-step integrator for one grid, speed and time step.
pub struct Stepper {
    grid: Grid,
    params: CGLParams,
    c: f64,
    frame_speed: f64,
    cfg: StepConfig,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    /// `(index, χ)` overrides inside the absorbing layer.
    sponge: Vec<(usize, f64)>,
    leak_max: f64,
}

impl Stepper {
    pub fn new(params: &CGLParams, c: f64, grid: Grid, frame_speed: f64, cfg: StepConfig) -> Result<Self> {
        if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("time step {} must be positive", cfg.dt)));
        }
        let mut planner = FftPlanner::new();
        let n = grid.n_points;
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let symbol = |kappa: f64| Complex64::new(-kappa * kappa, -params.alpha * kappa * kappa + frame_speed * kappa);
        let scale = 1.0 / n as f64;
        let full = (0..n).map(|j| (symbol(grid.mode(j)) * cfg.dt).exp() * scale).collect();
        let half = (0..n).map(|j| (symbol(grid.mode(j)) * (0.5 * cfg.dt)).exp() * scale).collect();
        let mut sponge = Vec::new();
        if cfg.medium == Medium::Trigger && cfg.sponge > 0.0 {
            let (lo, hi) = (params.chi_plus, params.chi_minus);
            let edge = -grid.length_left + cfg.sponge;
            let w = cfg.sponge_ramp.max(grid.dx);
            for j in 0..n {
                let u = grid.xi(j) - edge;
                if u < 18.0 * w && grid.xi(j) < 0.0 {
                    sponge.push((j, 0.5 * (hi + lo) + 0.5 * (hi - lo) * (u / w).tanh()));
                }
            }
        }
        Ok(Self {
            grid,
            params: *params,
            c,
            frame_speed,
            cfg,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            full,
            half,
            sponge,
            leak_max: 0.0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.cfg.dt
    }

    /// Largest right-edge magnitude seen so far.
    pub fn leak_max(&self) -> f64 {
        self.leak_max
    }

    /// Trigger position in the simulation frame at time `t`.
    pub fn trigger_position(&self, t: f64) -> f64 {
        (self.c - self.frame_speed) * t
    }

    fn linear(&mut self, a: &mut [Complex64], half: bool) {
        self.fwd.process_with_scratch(a, &mut self.scratch);
        let p = if half { &self.half } else { &self.full };
        for (z, m) in a.iter_mut().zip(p) {
            *z *= m;
        }
        self.inv.process_with_scratch(a, &mut self.scratch);
    }

    /// Heun step of `A' = χA − (1+iγ)|A|²A` at every point; returns `max|A|`.
    fn reaction(&self, a: &mut [Complex64], t_mid: f64) -> f64 {
        let dt = self.cfg.dt;
        let g = Complex64::new(1.0, self.params.gamma);
        let (split, chi_l, chi_r) = match self.cfg.medium {
            Medium::Trigger => {
                let xt = self.trigger_position(t_mid);
                let idx = ((xt + self.grid.length_left) / self.grid.dx).ceil().clamp(0.0, self.grid.n_points as f64) as usize;
                (idx, self.params.chi_minus, self.params.chi_plus)
            }
            Medium::Uniform(chi) => (self.grid.n_points, chi, chi),
        };
        let heun = |z: &mut Complex64, chi: f64| {
            let f = |w: Complex64| w * (chi - g * w.norm_sqr());
            let k1 = f(*z);
            let k2 = f(*z + k1 * dt);
            *z += (k1 + k2) * (0.5 * dt);
        };
        let mut max = 0.0f64;
        let mut sponge = self.sponge.iter().peekable();
        for (j, z) in a.iter_mut().enumerate() {
            let layer = sponge.next_if(|&&(i, _)| i == j).map(|&(_, chi)| chi);
            let chi = match layer {
                _ if j >= split => chi_r,
                Some(chi) => chi,
                None => chi_l,
            };
            heun(z, chi);
            max = max.max(z.norm_sqr());
        }
        max.sqrt()
    }

    fn flush_gap(&self, a: &mut [Complex64], t: f64) {
        let (Some(floor), Medium::Trigger) = (self.cfg.gap_floor, self.cfg.medium) else {
            return;
        };
        let xt = self.trigger_position(t);
        let start = ((xt + self.grid.length_left) / self.grid.dx).ceil();
        if start <= 0.0 {
            return;
        }
        let start = (start as usize).min(self.grid.n_points);
        for z in a[..start].iter_mut().rev() {
            if z.norm() >= floor {
                break;
            }
            *z = Complex64::new(0.0, 0.0);
        }
    }

    fn after_reaction(&mut self, a: &mut [Complex64], t: f64, max: f64) -> Result<()> {
        if !(max <= BLOWUP_BOUND) {
            return Err(Error::BlowUp { t, max_abs: max });
        }
        self.flush_gap(a, t);
        self.leak_max = self.leak_max.max(a[a.len() - 1].norm());
        Ok(())
    }

    /// Advances `state` by `n` steps.
    pub fn advance(&mut self, state: &mut FieldState, n: usize) -> Result<()> {
        if state.a.len() != self.grid.n_points {
            return Err(Error::InvalidGrid(format!("state has {} points, stepper expects {}", state.a.len(), self.grid.n_points)));
        }
        if n == 0 {
            return Ok(());
        }
        let dt = self.cfg.dt;
        let t0 = state.t;
        let a = &mut state.a;
        match self.cfg.splitting {
            Splitting::Lie => {
                for i in 0..n {
                    let t = t0 + i as f64 * dt;
                    self.linear(a, false);
                    let max = self.reaction(a, t + 0.5 * dt);
                    self.after_reaction(a, t + dt, max)?;
                }
            }
            Splitting::Strang => {
                self.linear(a, true);
                for i in 0..n {
                    let t = t0 + i as f64 * dt;
                    let max = self.reaction(a, t + 0.5 * dt);
                    self.after_reaction(a, t + 0.5 * dt, max)?;
                    self.linear(a, i + 1 == n);
                }
            }
        }
        state.t = t0 + n as f64 * dt;
        Ok(())
    }
}

/// One Strang step of size `dt` for the trigger moving at speed `c`.
pub fn step(state: &FieldState, params: &CGLParams, c: f64, dt: f64) -> Result<FieldState> {
    let cfg = StepConfig { dt, gap_floor: None, ..StepConfig::default() };
    let mut stepper = Stepper::new(params, c, state.grid, state.frame_speed, cfg)?;
    let mut next = state.clone();
    stepper.advance(&mut next, 1)?;
    Ok(next)
}

/// `A^p(ξ;k) = √(1−k²)e^{−ikξ}` sampled on the grid (stationary frame).
pub fn exact_wavetrain(params: &CGLParams, k: f64, grid: Grid) -> Result<FieldState> {
    params.validate()?;
    if !(k.abs() < 1.0) {
        return Err(Error::InvalidWavenumber(k));
    }
    let r = (1.0 - k * k).sqrt();
    let a = (0..grid.n_points).map(|j| Complex64::from_polar(r, -k * grid.xi(j))).collect();
    Ok(FieldState { grid, a, t: 0.0, frame_speed: 0.0 })
}

/// Initial data for [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Independent complex Gaussian noise with standard deviation
    /// `amplitude` on `[−width, 0)`.
    Noise { amplitude: f64, width: f64 },
    /// `A = ¼(1 − tanh(ξ − position))(1 + tanh(ξ + 0.9·L₋))`, a plateau
    /// that vanishes smoothly at both ends of the domain.
    Step { position: f64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::Noise { amplitude: 1e-3, width: 20.0 }
    }
}

impl InitialCondition {
    pub fn build(&self, grid: Grid, frame_speed: f64, seed: u64) -> FieldState {
        let mut s = FieldState::zeros(grid, frame_speed);
        match *self {
            Self::Noise { amplitude, width } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(0.0, amplitude.abs()).expect("finite standard deviation");
                for (j, z) in s.a.iter_mut().enumerate() {
                    let xi = grid.xi(j);
                    let (re, im) = (normal.sample(&mut rng), normal.sample(&mut rng));
                    if (-width..0.0).contains(&xi) {
                        *z = Complex64::new(re, im);
                    }
                }
            }
            Self::Step { position } => {
                for (j, z) in s.a.iter_mut().enumerate() {
                    let xi = grid.xi(j);
                    let taper = 0.5 * (1.0 + (xi + 0.9 * grid.length_left).tanh());
                    *z = Complex64::new(0.5 * (1.0 - (xi - position).tanh()) * taper, 0.0);
                }
            }
        }
        s
    }
}

/// Complete description of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: Grid,
    pub step: StepConfig,
    pub t_end: f64,
    /// Defaults to the trigger speed (comoving frame).
    pub frame_speed: Option<f64>,
    pub init: InitialCondition,
    /// Time between stored snapshots; `None` stores none.
    pub snapshot_every: Option<f64>,
    /// Keep every `snapshot_stride`-th grid point in snapshots.
    pub snapshot_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: Grid::desk(),
            step: StepConfig::default(),
            t_end: 1500.0,
            frame_speed: None,
            init: InitialCondition::default(),
            snapshot_every: None,
            snapshot_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub xi: Vec<f64>,
    pub a: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub leak_max: f64,
    pub leak_exceeded: bool,
    pub snapshots: Vec<Snapshot>,
}

/// Runs the simulation, calling `observe` every `observe_every` time units
/// (and at the end). The observer may stop the run early by returning `false`.
pub fn run_with<F>(params: &CGLParams, c: f64, cfg: &RunConfig, seed: u64, observe_every: Option<f64>, mut observe: F) -> Result<(FieldState, RunDiagnostics)>
where
    F: FnMut(&FieldState, &Stepper) -> bool,
{
    params.validate()?;
    if !(cfg.t_end >= 0.0) {
        return Err(Error::InvalidParams(format!("t_end = {} must be non-negative", cfg.t_end)));
    }
    let frame = cfg.frame_speed.unwrap_or(c);
    let mut stepper = Stepper::new(params, c, cfg.grid, frame, cfg.step)?;
    let mut state = cfg.init.build(cfg.grid, frame, seed);
    let dt = cfg.step.dt;
    let total = (cfg.t_end / dt).round() as usize;
    let every = |interval: Option<f64>| interval.map(|s| ((s / dt).round() as usize).max(1));
    let (snap_n, obs_n) = (every(cfg.snapshot_every), every(observe_every));
    let mut diag = RunDiagnostics { steps: 0, leak_max: 0.0, leak_exceeded: false, snapshots: Vec::new() };
    let stride = cfg.snapshot_stride.max(1);
    let record = |s: &FieldState, d: &mut RunDiagnostics| {
        let idx = (0..cfg.grid.n_points).step_by(stride);
        d.snapshots.push(Snapshot { t: s.t, xi: idx.clone().map(|j| cfg.grid.xi(j)).collect(), a: idx.map(|j| s.a[j]).collect() });
    };
    if snap_n.is_some() {
        record(&state, &mut diag);
    }
    let mut done = 0;
    while done < total {
        let next_stop = [snap_n, obs_n].iter().flatten().map(|m| (done / m + 1) * m).min().unwrap_or(total).min(total);
        stepper.advance(&mut state, next_stop - done)?;
        done = next_stop;
        // Snap the clock to the step count to avoid drift in the stored times.
        state.t = done as f64 * dt;
        if snap_n.is_some_and(|m| done % m == 0) {
            record(&state, &mut diag);
        }
        if obs_n.is_some_and(|m| done % m == 0 || done == total) && !observe(&state, &stepper) {
            break;
        }
    }
    diag.steps = done;
    diag.leak_max = stepper.leak_max();
    diag.leak_exceeded = diag.leak_max > LEAK_TOLERANCE;
    Ok((state, diag))
}

/// Runs the simulation to `cfg.t_end`.
pub fn run(params: &CGLParams, c: f64, cfg: &RunConfig, seed: u64) -> Result<(FieldState, RunDiagnostics)> {
    run_with(params, c, cfg, seed, None, |_, _| true)
}

/// Local wavenumber statistics on a window of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalWavenumber {
    pub k_mean: f64,
    pub k_std: f64,
    pub window: (f64, f64),
    pub min_abs: f64,
}

/// `k(ξ) = −Im(A_ξ/A)` on `window`, from the phase increment between the
/// two neighbours of each point (exact for plane waves).
pub fn measure_wavenumber(state: &FieldState, window: (f64, f64)) -> Result<LocalWavenumber> {
    let g = state.grid;
    let n = g.n_points;
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let ks: Vec<usize> = (0..n).filter(|&j| (lo..=hi).contains(&g.xi(j))).collect();
    if ks.is_empty() {
        return Err(Error::InvalidGrid(format!("window [{lo}, {hi}] contains no grid points")));
    }
    let at = |j: isize| state.a[j.rem_euclid(n as isize) as usize];
    let min_abs = ks.iter().map(|&j| state.a[j].norm()).fold(f64::INFINITY, f64::min);
    if min_abs < 1e-3 {
        return Err(Error::AmplitudeTooSmall { min_abs });
    }
    let vals: Vec<f64> = ks
        .iter()
        .map(|&j| {
            let j = j as isize;
            -(at(j + 1) * at(j - 1).conj()).arg() / (2.0 * g.dx)
        })
        .collect();
    let (mean, std) = mean_std(&vals);
    Ok(LocalWavenumber { k_mean: mean, k_std: std, window: (lo, hi), min_abs })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `ξ_* = inf{ξ : sup_{ξ'>ξ}|A(ξ')| < δ}`, located right to left with
/// linear interpolation; this is the interface position (left of the
/// trigger for trigger fronts).
pub fn measure_interface(state: &FieldState, delta: f64) -> Result<f64> {
    let g = state.grid;
    let j = state.a.iter().rposition(|z| z.norm() >= delta).ok_or(Error::NoInterface(delta))?;
    if j + 1 == g.n_points {
        return Err(Error::NoInterface(delta));
    }
    let (r0, r1) = (state.a[j].norm(), state.a[j + 1].norm());
    Ok(g.xi(j) + g.dx * (r0 - delta) / (r0 - r1))
}

/// Accumulated phase rotation rate `d arg A/dt` from samples `(t, A)`.
pub fn phase_rate(samples: &[(f64, Complex64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let total: f64 = samples.windows(2).map(|w| (w[1].1 * w[0].1.conj()).arg()).sum();
    Some(total / (samples[samples.len() - 1].0 - samples[0].0))
}

/// Placement of the wake window relative to the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub delta: f64,
    /// Window `[ξ_* − far·L₋, ξ_* − near·L₋]`.
    pub far: f64,
    pub near: f64,
    /// Averaging starts at `t_start_frac·t_end`.
    pub t_start_frac: f64,
    /// Interval between measurements.
    pub sample_every: f64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { delta: 0.1, far: 0.6, near: 0.2, t_start_frac: 0.6, sample_every: 0.5 }
    }
}

/// Time-averaged wake measurement of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WakeMeasurement {
    pub k_mean: f64,
    pub k_std: f64,
    /// Window of the last sample.
    pub window: (f64, f64),
    pub t_avg: (f64, f64),
    /// Mean interface position.
    pub xi_star: f64,
    pub delta: f64,
    /// Phase rotation rate at the centre of the first window.
    pub omega_meas: f64,
    pub samples: usize,
}

/// Window rule of [`MeasureConfig`], clipped to stay `0.1·L₋` away from
/// the left edge and its absorbing layer.
pub fn wake_window(grid: &Grid, xi_star: f64, m: &MeasureConfig) -> Result<(f64, f64)> {
    let l = grid.length_left;
    let lo = (xi_star - m.far * l).max(-0.9 * l);
    let hi = xi_star - m.near * l;
    if hi <= lo {
        return Err(Error::InvalidGrid(format!("wake window is empty for interface at {xi_star}")));
    }
    Ok((lo, hi))
}

/// Runs to `cfg.t_end` and averages the wake wavenumber over
/// `[t_start_frac·t_end, t_end]`. The spread between the first and second
/// halves of that interval is folded into `k_std`.
pub fn measure_wake(params: &CGLParams, c: f64, cfg: &RunConfig, m: &MeasureConfig, seed: u64) -> Result<(WakeMeasurement, FieldState, RunDiagnostics)> {
    let t0 = m.t_start_frac * cfg.t_end;
    let t_mid = 0.5 * (t0 + cfg.t_end);
    let mut recs: Vec<(f64, LocalWavenumber, f64)> = Vec::new();
    let mut probe: Option<(usize, Vec<(f64, Complex64)>)> = None;
    let mut failure: Option<Error> = None;
    let (state, diag) = run_with(params, c, cfg, seed, Some(m.sample_every), |s, _| {
        if s.t + 1e-9 < t0 {
            return true;
        }
        let res = measure_interface(s, m.delta)
            .and_then(|xs| wake_window(&s.grid, xs, m).map(|w| (xs, w)))
            .and_then(|(xs, w)| measure_wavenumber(s, w).map(|k| (xs, k)));
        match res {
            Ok((xs, k)) => {
                let (j, samples) = probe.get_or_insert_with(|| (s.grid.index_of(0.5 * (k.window.0 + k.window.1)), Vec::new()));
                samples.push((s.t, s.a[*j]));
                recs.push((s.t, k, xs));
                true
            }
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if recs.is_empty() {
        return Err(Error::InvalidParams("no measurement samples in the averaging interval".into()));
    }
    let ks: Vec<f64> = recs.iter().map(|r| r.1.k_mean).collect();
    let (k_mean, k_spread) = mean_std(&ks);
    let within = (recs.iter().map(|r| r.1.k_std.powi(2)).sum::<f64>() / recs.len() as f64).sqrt();
    let half = |first: bool| {
        let v: Vec<f64> = recs.iter().filter(|r| (r.0 < t_mid) == first).map(|r| r.1.k_mean).collect();
        if v.is_empty() { k_mean } else { mean_std(&v).0 }
    };
    let drift = half(true) - half(false);
    let k_std = (within * within + k_spread * k_spread + drift * drift).sqrt();
    let xi_star = recs.iter().map(|r| r.2).sum::<f64>() / recs.len() as f64;
    let omega_meas = probe.and_then(|(_, s)| phase_rate(&s)).unwrap_or(f64::NAN);
    let wm = WakeMeasurement {
        k_mean,
        k_std,
        window: recs[recs.len() - 1].1.window,
        t_avg: (recs[0].0, recs[recs.len() - 1].0),
        xi_star,
        delta: m.delta,
        omega_meas,
        samples: recs.len(),
    };
    Ok((wm, state, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::nonlinear_dispersion;
    use proptest::prelude::*;

    fn p() -> CGLParams {
        CGLParams::new(-0.1, -0.2).unwrap()
    }

    fn uniform(dt: f64, splitting: Splitting) -> StepConfig {
        StepConfig { dt, splitting, medium: Medium::Uniform(1.0), gap_floor: None, sponge: 0.0, sponge_ramp: 0.0 }
    }

    /// Wavenumber compatible with the periodic grid, close to `k`.
    fn compatible(grid: &Grid, k: f64) -> f64 {
        let q = 2.0 * std::f64::consts::PI / grid.total_length();
        (k / q).round() * q
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(10.0, 10.0, 100).is_err());
        assert!(Grid::new(-1.0, 10.0, 128).is_err());
        let g = Grid::new(10.0, 6.0, 16).unwrap();
        assert_eq!(g.dx, 1.0);
        assert_eq!(g.xi(0), -10.0);
        assert_eq!(g.index_of(0.2), 10);
        assert!((g.dx * g.n_points as f64 - g.total_length()).abs() < 1e-12);
    }

    #[test]
    fn zero_stays_zero() {
        let grid = Grid::new(50.0, 50.0, 256).unwrap();
        let mut s = FieldState::zeros(grid, 1.8);
        let mut st = Stepper::new(&p(), 1.8, grid, 1.8, StepConfig::default()).unwrap();
        st.advance(&mut s, 200).unwrap();
        assert!(s.a.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn stable_side_stays_small() {
        let grid = Grid::new(0.0, 64.0, 256).unwrap();
        let mut s = FieldState::zeros(grid, 1.8);
        s.a[100] = Complex64::new(1e-12, 0.0);
        let mut st = Stepper::new(&p(), 1.8, grid, 1.8, StepConfig::default()).unwrap();
        st.advance(&mut s, 400).unwrap();
        assert!(s.max_abs() < 1e-12);
    }

    #[test]
    fn exact_wavetrain_examples() {
        let grid = Grid::new(32.0, 32.0, 256).unwrap();
        let s = exact_wavetrain(&p(), 0.0, grid).unwrap();
        assert!(s.a.iter().all(|z| (*z - 1.0).norm() < 1e-15));
        assert!((nonlinear_dispersion(&p(), 0.0, 0.0).unwrap() - 0.2).abs() < 1e-15);
        let s = exact_wavetrain(&p(), 0.3, grid).unwrap();
        assert!(s.a.iter().all(|z| (z.norm() - 0.91f64.sqrt()).abs() < 1e-15));
        assert!((nonlinear_dispersion(&p(), 0.3, 0.0).unwrap() - (0.009 + 0.2 * 0.91)).abs() < 1e-15);
        assert!(matches!(exact_wavetrain(&p(), 1.0, grid), Err(Error::InvalidWavenumber(_))));
    }

    #[test]
    fn wavetrain_is_measured_exactly() {
        let grid = Grid::new(100.0, 100.0, 1024).unwrap();
        let s = exact_wavetrain(&p(), 0.3, grid).unwrap();
        let m = measure_wavenumber(&s, (-50.0, 50.0)).unwrap();
        assert!((m.k_mean - 0.3).abs() < 1e-12 && m.k_std < 1e-12);
        let real = FieldState { a: vec![Complex64::new(0.7, 0.0); 1024], ..s.clone() };
        assert_eq!(measure_wavenumber(&real, (-50.0, 50.0)).unwrap().k_mean, 0.0);
        let mut hole = s;
        hole.a[512] = Complex64::new(1e-5, 0.0);
        assert!(matches!(measure_wavenumber(&hole, (-50.0, 50.0)), Err(Error::AmplitudeTooSmall { .. })));
    }

    #[test]
    fn interface_of_synthetic_profile() {
        let grid = Grid::new(20.0, 20.0, 4096).unwrap();
        let mut s = FieldState::zeros(grid, 0.0);
        for j in 0..grid.n_points {
            let xi = grid.xi(j);
            if xi < 0.0 {
                s.a[j] = Complex64::new((-xi).tanh(), 0.0);
            }
        }
        let xs = measure_interface(&s, 0.5).unwrap();
        assert!((xs + 0.5f64.atanh()).abs() < 1e-4, "{xs}");
        let w = exact_wavetrain(&p(), 0.1, grid).unwrap();
        assert!(matches!(measure_interface(&w, 0.5), Err(Error::NoInterface(_))));
        assert!(matches!(measure_interface(&FieldState::zeros(grid, 0.0), 0.5), Err(Error::NoInterface(_))));
    }

    #[test]
    fn wavetrain_is_relative_equilibrium() {
        let grid = Grid::new(64.0, 64.0, 512).unwrap();
        let k = compatible(&grid, 0.3);
        for c in [0.0, 1.8] {
            let mut s = exact_wavetrain(&p(), k, grid).unwrap();
            s.frame_speed = c;
            let a0 = s.a.clone();
            let mut st = Stepper::new(&p(), c, grid, c, uniform(1e-3, Splitting::Strang)).unwrap();
            let mut probe = vec![(0.0, s.a[0])];
            for _ in 0..100 {
                st.advance(&mut s, 100).unwrap();
                probe.push((s.t, s.a[0]));
            }
            let r = (1.0 - k * k).sqrt();
            let drift = s.a.iter().map(|z| (z.norm() - r).abs()).fold(0.0, f64::max);
            assert!(drift <= 1e-6, "drift {drift}");
            let omega = nonlinear_dispersion(&p(), k, c).unwrap();
            assert!((phase_rate(&probe).unwrap() - omega).abs() <= 1e-3);
            let rot = s.a[7] * a0[7].conj() / (r * r);
            assert!((rot - Complex64::from_polar(1.0, omega * s.t)).norm() < 1e-5);
        }
    }

    #[test]
    fn gauge_equivariance() {
        let grid = Grid::new(30.0, 34.0, 256).unwrap();
        let s = InitialCondition::Noise { amplitude: 0.3, width: 30.0 }.build(grid, 1.5, 7);
        let rot = Complex64::from_polar(1.0, 1.234);
        let mut r = s.clone();
        r.a.iter_mut().for_each(|z| *z *= rot);
        let cfg = StepConfig { dt: 0.01, ..StepConfig::default() };
        let (mut s1, mut s2) = (s, r);
        for st in [&mut s1, &mut s2] {
            Stepper::new(&p(), 1.5, grid, 1.5, cfg).unwrap().advance(st, 50).unwrap();
        }
        let err = s1.a.iter().zip(&s2.a).map(|(a, b)| (a * rot - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    fn global_error(splitting: Splitting, dt: f64) -> f64 {
        let grid = Grid::new(20.0, 20.0, 128).unwrap();
        let init = InitialCondition::Noise { amplitude: 0.5, width: 20.0 }.build(grid, 0.7, 3);
        let smooth = |s: &FieldState| {
            // Smooth the noise first so the comparison measures time error only.
            let mut s = s.clone();
            let cfg = StepConfig { dt: 1e-4, gap_floor: None, ..StepConfig::default() };
            Stepper::new(&p(), 0.7, grid, 0.7, cfg).unwrap().advance(&mut s, 5000).unwrap();
            s.t = 0.0;
            s
        };
        let init = smooth(&init);
        let solve = |dt: f64, sp: Splitting| {
            let mut s = init.clone();
            let cfg = StepConfig { dt, splitting: sp, gap_floor: None, ..StepConfig::default() };
            let n = (0.4 / dt).round() as usize;
            Stepper::new(&p(), 0.7, grid, 0.7, cfg).unwrap().advance(&mut s, n).unwrap();
            s
        };
        let reference = solve(dt / 8.0, Splitting::Strang);
        let approx = solve(dt, splitting);
        approx.a.iter().zip(&reference.a).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn convergence_orders() {
        let lie = global_error(Splitting::Lie, 0.02) / global_error(Splitting::Lie, 0.01);
        assert!((lie - 2.0).abs() < 0.4, "Lie ratio {lie}");
        let strang = global_error(Splitting::Strang, 0.02) / global_error(Splitting::Strang, 0.01);
        assert!((strang - 4.0).abs() < 0.8, "Strang ratio {strang}");
    }

    #[test]
    fn moving_trigger_matches_comoving_trigger() {
        // The same physical setup in the comoving and in the stationary frame.
        let grid = Grid::new(64.0, 64.0, 512).unwrap();
        let c = 1.0;
        let init = InitialCondition::Step { position: -5.0 }.build(grid, c, 0);
        let cfg = StepConfig { dt: 2e-3, gap_floor: None, sponge: 0.0, ..StepConfig::default() };
        let mut com = init.clone();
        Stepper::new(&p(), c, grid, c, cfg).unwrap().advance(&mut com, 2500).unwrap();
        let mut lab = FieldState { frame_speed: 0.0, ..init };
        Stepper::new(&p(), c, grid, 0.0, cfg).unwrap().advance(&mut lab, 2500).unwrap();
        // After t = 5 the frames are shifted by c·t = 20 cells.
        let shift = 20;
        let err = (100..400).map(|j| (com.a[j] - lab.a[j + shift]).norm()).fold(0.0, f64::max);
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn gap_flush_keeps_zero_ahead_of_detached_front() {
        let grid = Grid::new(144.0, 112.0, 2048).unwrap();
        let c = 2.4;
        let mut s = InitialCondition::Step { position: -20.0 }.build(grid, c, 0);
        let mut st = Stepper::new(&p(), c, grid, c, StepConfig { dt: 0.01, ..StepConfig::default() }).unwrap();
        st.advance(&mut s, 10_000).unwrap();
        let front = measure_interface(&FieldState { a: s.a[..grid.index_of(0.0)].to_vec(), grid: Grid { n_points: grid.index_of(0.0), ..grid }, ..s.clone() }, 0.5).unwrap();
        assert!(front < -30.0, "front at {front}");
        let trig = grid.index_of(0.0);
        let gap_start = grid.index_of(front + 40.0);
        assert!(s.a[gap_start..trig].iter().all(|z| z.norm() < 1e-14));
        assert!(s.a[grid.index_of(-100.0)..grid.index_of(front - 5.0)].iter().all(|z| z.norm() > 0.5));
    }

    #[test]
    fn run_is_reproducible_and_records_snapshots() {
        let cfg = RunConfig {
            grid: Grid::new(60.0, 40.0, 512).unwrap(),
            t_end: 2.0,
            snapshot_every: Some(0.5),
            snapshot_stride: 4,
            ..RunConfig::default()
        };
        let (a, da) = run(&p(), 1.8, &cfg, 11).unwrap();
        let (b, _) = run(&p(), 1.8, &cfg, 11).unwrap();
        let (c, _) = run(&p(), 1.8, &cfg, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(da.snapshots.len(), 5);
        assert_eq!(da.snapshots[0].a.len(), 128);
        assert!((da.snapshots[4].t - 2.0).abs() < 1e-12);
        assert_eq!(da.steps, 400);
    }

    proptest! {
        #[test]
        fn wavetrain_satisfies_pde(k in -0.95f64..0.95) {
            // Spectral residual of the rotating ansatz in the stationary frame.
            let grid = Grid::new(64.0, 64.0, 1024).unwrap();
            let k = compatible(&grid, k);
            let s = exact_wavetrain(&p(), k, grid).unwrap();
            let omega = nonlinear_dispersion(&p(), k, 0.0).unwrap();
            let mut hat = s.a.clone();
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(1024).process(&mut hat);
            for (j, z) in hat.iter_mut().enumerate() {
                let q = grid.mode(j);
                *z *= -q * q / 1024.0;
            }
            planner.plan_fft_inverse(1024).process(&mut hat);
            let g = Complex64::new(1.0, p().gamma);
            let res = s.a.iter().zip(&hat).map(|(a, axx)| {
                let rhs = Complex64::new(1.0, p().alpha) * axx + a - g * a.norm_sqr() * a;
                (rhs - Complex64::i() * omega * a).norm()
            }).fold(0.0, f64::max);
            prop_assert!(res <= 1e-10, "{}", res);
        }

        #[test]
        fn phase_increment_measures_plane_waves(k in -1.5f64..1.5) {
            let grid = Grid::new(50.0, 50.0, 1024).unwrap();
            let a = (0..1024).map(|j| Complex64::from_polar(0.5, -k * grid.xi(j))).collect();
            let s = FieldState { grid, a, t: 0.0, frame_speed: 0.0 };
            let m = measure_wavenumber(&s, (-20.0, 20.0)).unwrap();
            prop_assert!((m.k_mean - k).abs() < 1e-10);
        }
    }
}
