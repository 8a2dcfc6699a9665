use cgl_trigger::continuation::{asymptotic_guess, continue_in_c, solve_point, BranchPoint, ContinuationOptions, MeshOptions};
use cgl_trigger::dispersion::{linear_spreading, CGLParams};
use cgl_trigger::predict::interface_delta_z;
use serde_json::json;

use super::Context;
use crate::config::ContinueConfig;
use crate::failure::Failure;
use crate::output::{num, Output};

pub fn options(cc: &ContinueConfig) -> ContinuationOptions {
    let d = ContinuationOptions::default();
    ContinuationOptions { j: cc.j, delta: cc.delta, spacing: cc.spacing.into(), mesh: MeshOptions { h: cc.mesh_h, ..d.mesh }, ..d }
}

const HEADER: [&str; 12] =
    ["c", "delta_c", "omega_hat", "omega_tf", "k_tf", "xi_star", "residual", "condition_number", "delta_c_hat", "t_flight", "newton_iterations", "nodes"];

fn row(p: &BranchPoint) -> Vec<String> {
    vec![
        num(p.c),
        num(p.delta_c),
        num(p.omega_hat),
        num(p.omega_tf),
        num(p.k_tf),
        num(p.xi_star),
        num(p.residual),
        num(p.condition_number),
        num(p.delta_c_hat),
        num(p.t_flight),
        p.newton_iterations.to_string(),
        p.nodes.to_string(),
    ]
}

fn write_profile(out: &Output, name: &str, p: &BranchPoint) -> Result<(), Failure> {
    let sol = p.profile.as_ref().expect("profile kept");
    let rows = sol.profile().into_iter().map(|q| vec![num(q.zeta), num(q.z.re), num(q.z.im), num(q.r)]);
    out.csv(name, &["zeta", "re_z", "im_z", "r"], rows)
}

fn strip(p: &BranchPoint) -> BranchPoint {
    BranchPoint { profile: None, ..p.clone() }
}

fn single(ctx: &Context, params: &CGLParams, dc: f64) -> Result<(), Failure> {
    let c = linear_spreading(params).c_lin - dc;
    let opts = ContinuationOptions { keep_profiles: true, ..options(&ctx.cfg.continuation) };
    let guess = asymptotic_guess(params, c, opts.j, &opts.shot)?;
    let p = solve_point(params, c, guess, &opts)?;
    ctx.out.csv("branch.csv", &HEADER, [row(&p)])?;
    write_profile(&ctx.out, "profile.csv", &p)?;
    ctx.out.json(
        "continue.json",
        &json!({
            "meta": ctx.meta("continue", "single trigger-front solution with convergence certificate"),
            "point": strip(&p),
            "certificate": { "residual": p.residual, "condition_number": p.condition_number, "newton_iterations": p.newton_iterations },
        }),
    )
}

pub fn run(ctx: &Context) -> Result<(), Failure> {
    let cc = &ctx.cfg.continuation;
    let params = ctx.cfg.model.params()?;
    if let Some(dc) = cc.single_point {
        single(ctx, &params, dc)?;
        return ctx.out.echo("continue", &ctx.cfg);
    }
    let c_lin = linear_spreading(&params).c_lin;
    let opts = options(cc);
    let branch = continue_in_c(&params, cc.c_start.unwrap_or(c_lin - 0.02), cc.c_end, cc.points, &opts)?;
    ctx.out.csv("branch.csv", &HEADER, branch.points.iter().map(row))?;
    let keep = ContinuationOptions { keep_profiles: true, ..opts };
    let mut profiles = Vec::new();
    for (i, &c) in cc.profiles_at.iter().enumerate() {
        let p = branch.solve_at(c, &keep)?;
        let name = format!("profile_{i:02}.csv");
        write_profile(&ctx.out, &name, &p)?;
        profiles.push(json!({ "file": name, "point": strip(&p) }));
    }
    let dz = if (params.chi_minus - 1.0).abs() < 1e-12 { interface_delta_z(&params, cc.delta).ok() } else { None };
    ctx.out.json(
        "continue.json",
        &json!({
            "meta": ctx.meta("continue", "trigger-front branch: frequency, wavenumber and interface position vs speed"),
            "c_lin": c_lin,
            "points": branch.points.len(),
            "stopped": branch.stopped,
            "delta_z": dz,
            "profiles": profiles,
        }),
    )?;
    ctx.out.echo("continue", &ctx.cfg)?;
    match branch.stopped {
        Some(reason) => Err(Failure::Numerical(reason)),
        None => Ok(()),
    }
}
