use cgl_trigger::dispersion::{k_lin, linear_spreading, CGLParams};
use cgl_trigger::simulate::{measure_wake, run as run_pde, RunConfig, RunDiagnostics, Snapshot, StepConfig, WakeMeasurement};
use serde::Serialize;
use serde_json::json;

use super::{fan_out, Context};
use crate::config::SimulateConfig;
use crate::failure::Failure;
use crate::output::{num, Output};

/// Outcome of one simulation.
#[derive(Debug, Clone, Serialize)]
pub struct SimOutcome {
    pub c: f64,
    pub seed: u64,
    pub wake: Option<WakeMeasurement>,
    pub steps: usize,
    pub leak_max: f64,
    pub leak_exceeded: bool,
    pub final_max_abs: f64,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

pub fn run_config(sc: &SimulateConfig) -> Result<RunConfig, Failure> {
    Ok(RunConfig {
        grid: sc.grid.grid()?,
        step: StepConfig { dt: sc.dt, splitting: sc.splitting, ..StepConfig::default() },
        t_end: sc.t_end,
        frame_speed: None,
        init: sc.init,
        snapshot_every: (sc.snapshot_every > 0.0).then_some(sc.snapshot_every),
        snapshot_stride: sc.snapshot_stride.max(1),
    })
}

/// Runs one speed, measuring the wake when requested.
pub fn simulate_one(params: &CGLParams, sc: &SimulateConfig, c: f64, seed: u64) -> Result<SimOutcome, Failure> {
    let rc = run_config(sc)?;
    let (wake, state, diag): (Option<WakeMeasurement>, _, RunDiagnostics) = if sc.measure {
        let (w, s, d) = measure_wake(params, c, &rc, &sc.measure_config(), seed)?;
        (Some(w), s, d)
    } else {
        let (s, d) = run_pde(params, c, &rc, seed)?;
        (None, s, d)
    };
    Ok(SimOutcome {
        c,
        seed,
        wake,
        steps: diag.steps,
        leak_max: diag.leak_max,
        leak_exceeded: diag.leak_exceeded,
        final_max_abs: state.max_abs(),
        snapshots: diag.snapshots,
    })
}

/// Writes the per-speed table in the layout `compare` reads back.
pub fn write_table(out: &Output, c_lin: f64, runs: &[SimOutcome]) -> Result<(), Failure> {
    let header = ["c", "c_over_c_lin", "k_mean", "k_std", "xi_star", "omega_meas", "leak_max", "final_max_abs", "seed"];
    let rows = runs.iter().map(|r| {
        let w = r.wake.as_ref();
        let f = |g: fn(&WakeMeasurement) -> f64| w.map_or_else(String::new, |w| num(g(w)));
        vec![
            num(r.c),
            num(r.c / c_lin),
            f(|w| w.k_mean),
            f(|w| w.k_std),
            f(|w| w.xi_star),
            f(|w| w.omega_meas),
            num(r.leak_max),
            num(r.final_max_abs),
            r.seed.to_string(),
        ]
    });
    out.csv("simulate.csv", &header, rows)
}

pub fn run(ctx: &Context) -> Result<(), Failure> {
    let sc = &ctx.cfg.simulate;
    let params = ctx.cfg.model.params()?;
    let c_lin = linear_spreading(&params).c_lin;
    let speeds = sc.resolve_speeds(&params);
    let runs = fan_out(&speeds, |i, &c| simulate_one(&params, sc, c, ctx.seed + i as u64))?;
    write_table(&ctx.out, c_lin, &runs)?;
    for (i, r) in runs.iter().enumerate().filter(|(_, r)| !r.snapshots.is_empty()) {
        let rows = r.snapshots.iter().flat_map(|s| {
            s.xi.iter().zip(&s.a).map(move |(x, a)| vec![num(s.t), num(*x), num(a.norm()), num(a.re), num(a.im)])
        });
        ctx.out.csv(&format!("spacetime_{i:02}.csv"), &["t", "xi", "abs", "re", "im"], rows)?;
    }
    ctx.out.json(
        "simulate.json",
        &json!({
            "meta": ctx.meta("simulate", "direct simulation of the triggered equation in the comoving frame"),
            "c_lin": c_lin,
            "k_lin": k_lin(&params),
            "runs": runs,
        }),
    )?;
    ctx.out.echo("simulate", &ctx.cfg)
}
