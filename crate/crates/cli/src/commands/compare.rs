use cgl_trigger::continuation::{continue_in_c, ContinuationOptions, Spacing};
use cgl_trigger::dispersion::{linear_spreading, omega_abs};
use cgl_trigger::fit::power_law_fit;
use cgl_trigger::predict::{interface_delta_z, naive_wavenumber, predict};
use serde::Deserialize;
use serde_json::json;

use super::simulate::{simulate_one, write_table};
use super::{branch, fan_out, Context};
use crate::failure::Failure;
use crate::output::{num, opt};

#[derive(Debug, Deserialize)]
struct SimRow {
    c: f64,
    k_mean: Option<f64>,
    k_std: Option<f64>,
}

fn read_simulations(path: &std::path::Path, speeds: &[f64]) -> Result<Vec<(f64, f64)>, Failure> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Failure::MissingInput(format!("{}: {e}", path.display())))?;
    let rows: Vec<SimRow> = rdr.deserialize().collect::<Result<_, _>>()?;
    speeds
        .iter()
        .map(|&c| {
            rows.iter()
                .find(|r| (r.c - c).abs() <= 1e-9 * c.abs().max(1.0))
                .and_then(|r| Some((r.k_mean?, r.k_std.unwrap_or(f64::NAN))))
                .ok_or_else(|| Failure::MissingInput(format!("no measured wavenumber for c = {c} in {}", path.display())))
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run(ctx: &Context) -> Result<(), Failure> {
    let cc = &ctx.cfg.compare;
    let params = ctx.cfg.model.params()?;
    let c_lin = linear_spreading(&params).c_lin;
    let speeds = cc.resolve_speeds(&params);
    if speeds.is_empty() {
        return Err(Failure::Config("compare needs at least one speed".into()));
    }

    let sims = match &cc.simulation_csv {
        Some(path) => read_simulations(path, &speeds)?,
        None => {
            let runs = fan_out(&speeds, |i, &c| simulate_one(&params, &ctx.cfg.simulate, c, ctx.seed + i as u64))?;
            write_table(&ctx.out, c_lin, &runs)?;
            runs.iter().map(|r| r.wake.map_or((f64::NAN, f64::NAN), |w| (w.k_mean, w.k_std))).collect()
        }
    };

    let opts = ContinuationOptions { spacing: Spacing::Linear, ..branch::options(&ctx.cfg.continuation) };
    let (lo, hi) = speeds.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
    let bvp = if lo < hi {
        let br = continue_in_c(&params, hi, lo, speeds.len().max(8), &opts)?;
        if let Some(reason) = br.stopped {
            return Err(Failure::Numerical(reason));
        }
        speeds.iter().map(|&c| br.solve_at(c, &opts)).collect::<Result<Vec<_>, _>>()?
    } else {
        let guess = cgl_trigger::continuation::asymptotic_guess(&params, hi, opts.j, &opts.shot)?;
        vec![cgl_trigger::continuation::solve_point(&params, hi, guess, &opts)?]
    };

    let dz = interface_delta_z(&params, ctx.cfg.continuation.delta)?;
    let mut rows = Vec::new();
    let mut max_rel = 0.0f64;
    for ((&c, &(k_sim, k_std)), b) in speeds.iter().zip(&sims).zip(&bvp) {
        let p = predict(&params, c, 1, &dz)?;
        let r = rel(k_sim, b.k_tf);
        max_rel = max_rel.max(r);
        rows.push(vec![
            num(c),
            num(k_sim),
            num(k_std),
            num(b.k_tf),
            num(p.k_tf_exact),
            opt(p.k_tf_expansion),
            opt(naive_wavenumber(&params, c).ok()),
            num(r),
            num(rel(p.k_tf_exact, b.k_tf)),
            opt(p.k_tf_expansion.map(|k| rel(k, b.k_tf))),
        ]);
    }
    let header = ["c", "k_sim", "k_sim_std", "k_bvp", "k_pred_abs", "k_pred_32", "k_naive", "rel_sim_bvp", "rel_pred_abs_bvp", "rel_pred_32_bvp"];
    ctx.out.csv("compare.csv", &header, rows)?;

    let [g_lo, g_hi] = cc.fit_gap;
    let fit_branch = continue_in_c(&params, c_lin - g_hi, c_lin - g_lo, cc.fit_points, &ContinuationOptions { spacing: Spacing::LogGap, ..opts })?;
    if let Some(reason) = fit_branch.stopped {
        return Err(Failure::Numerical(reason));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &fit_branch.points {
        xs.push(p.delta_c);
        ys.push((p.omega_tf - omega_abs(&params, p.c)?).abs());
    }
    ctx.out.csv("fit.csv", &["delta_c", "omega_tf_minus_omega_abs"], xs.iter().zip(&ys).map(|(x, y)| vec![num(*x), num(*y)]))?;
    let fit = power_law_fit(&xs, &ys)?;
    let predicted = 2.0 * dz.im.abs() / (std::f64::consts::PI * (1.0 + params.alpha * params.alpha).powf(0.75));
    ctx.out.json(
        "compare.json",
        &json!({
            "meta": ctx.meta("compare", "wavenumber cross-validation of simulation, continuation and predictions; three-halves law"),
            "max_rel_sim_bvp": max_rel,
            "fit": {
                "exponent": fit.exponent,
                "prefactor": fit.prefactor,
                "predicted_prefactor": predicted,
                "prefactor_rel_error": rel(fit.prefactor, predicted),
                "points": xs.len(),
            },
            "delta_z": dz,
        }),
    )?;
    ctx.out.echo("compare", &ctx.cfg)
}
