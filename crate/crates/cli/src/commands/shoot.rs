use cgl_trigger::blowup::{delta_z, shoot_free_front, ShootOptions};
use cgl_trigger::scaling::linear_point;
use serde_json::json;

use super::{fan_out, Context};
use crate::failure::Failure;
use crate::output::num;

pub fn run(ctx: &Context) -> Result<(), Failure> {
    let sc = &ctx.cfg.shoot;
    let params = ctx.cfg.model.params()?;
    let base = linear_point(&params)?;
    let opts = ShootOptions::default();

    let results = fan_out(&sc.gamma_hat.values(), |_, &gamma_hat| {
        let shot = shoot_free_front(&cgl_trigger::ScaledParams { gamma_hat, ..base }, sc.delta, &opts)?;
        Ok((gamma_hat, shot.z_star, shot.genericity, shot.non_generic, delta_z(&params, shot.z_star)?))
    })?;
    let min_genericity = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let rows = results.iter().map(|(g, z, gen, ng, dz)| vec![num(*g), num(z.re), num(z.im), num(*gen), num(dz.re), num(dz.im), ng.to_string()]);
    let header = ["gamma_hat", "z_star_re", "z_star_im", "genericity", "delta_z_re", "delta_z_im", "non_generic"];
    ctx.out.csv("shoot.csv", &header, rows)?;

    let mut invariance = None;
    if let Some(sweep) = &sc.delta_sweep {
        let table = fan_out(&sweep.values(), |_, &delta| {
            let shot = shoot_free_front(&base, delta, &opts)?;
            Ok((delta, delta_z(&params, shot.z_star)?))
        })?;
        let (lo, hi) = table.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, dz)| (a.min(dz.im), b.max(dz.im)));
        invariance = Some(hi - lo);
        let rows = table.iter().map(|(d, dz)| vec![num(*d), num(dz.re), num(dz.im)]);
        ctx.out.csv("shoot_delta.csv", &["delta", "delta_z_re", "delta_z_im"], rows)?;
    }

    ctx.out.json(
        "shoot.json",
        &json!({
            "meta": ctx.meta("shoot", "free-front genericity |z_* + 1| vs scaled nonlinear dispersion"),
            "points": results.len(),
            "min_genericity": if results.is_empty() { None } else { Some(min_genericity) },
            "delta_z_im_spread": invariance,
        }),
    )?;
    ctx.out.echo("shoot", &ctx.cfg)
}
