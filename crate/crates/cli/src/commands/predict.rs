use cgl_trigger::dispersion::{k_lin, linear_spreading, omega_abs};
use cgl_trigger::predict::{g1, interface_delta_z, naive_wavenumber, predict};
use serde_json::json;

use super::{fan_out, Context};
use crate::config::Sweep;
use crate::failure::Failure;
use crate::output::{num, opt};

const HEADER: [&str; 8] = ["c", "omega_abs", "omega_tf", "k_lin", "k_tf_expansion", "k_tf_exact", "k_naive", "xi_star"];

pub fn run(ctx: &Context) -> Result<(), Failure> {
    let pc = &ctx.cfg.predict;
    let params = ctx.cfg.model.params()?;
    let ls = linear_spreading(&params);
    let speeds = match &pc.speeds {
        Some(s) => s.values(),
        None => Sweep::Range { start: 1.6, end: ls.c_lin - 1e-3, points: 40 }.values(),
    };
    let dz = interface_delta_z(&params, pc.delta)?;
    let mut rows = Vec::with_capacity(speeds.len());
    for &c in &speeds {
        let p = predict(&params, c, 1, &dz)?;
        rows.push(vec![
            num(c),
            num(omega_abs(&params, c)?),
            num(p.omega_tf),
            num(k_lin(&params)),
            opt(p.k_tf_expansion),
            num(p.k_tf_exact),
            opt(naive_wavenumber(&params, c).ok()),
            num(p.xi_star),
        ]);
    }
    ctx.out.csv("predict.csv", &HEADER, rows)?;

    let mut gamma_rows = None;
    if let Some(sweep) = &pc.gamma_sweep {
        let c = pc.gamma_sweep_speed;
        let model = ctx.cfg.model.clone();
        let rows = fan_out(&sweep.values(), |_, &gamma| {
            let params = crate::config::Model { gamma, ..model.clone() }.params()?;
            let dz = interface_delta_z(&params, pc.delta)?;
            let p = predict(&params, c, 1, &dz)?;
            Ok(vec![
                num(gamma),
                num(c),
                num(omega_abs(&params, c)?),
                num(p.omega_tf),
                num(k_lin(&params)),
                opt(p.k_tf_expansion),
                num(p.k_tf_exact),
                opt(naive_wavenumber(&params, c).ok()),
                num(dz.im),
            ])
        })?;
        gamma_rows = Some(rows.len());
        let header = ["gamma", "c", "omega_abs", "omega_tf", "k_lin", "k_tf_expansion", "k_tf_exact", "k_naive", "delta_z_im"];
        ctx.out.csv("predict_gamma.csv", &header, rows)?;
    }

    ctx.out.json(
        "predict.json",
        &json!({
            "meta": ctx.meta("predict", "predicted frequency, wavenumber and interface position vs trigger speed"),
            "c_lin": ls.c_lin,
            "omega_lin": ls.omega_lin,
            "k_lin": k_lin(&params),
            "g1": g1(&params),
            "delta_z": dz,
            "rows": speeds.len(),
            "gamma_sweep_rows": gamma_rows,
        }),
    )?;
    ctx.out.echo("predict", &ctx.cfg)
}
