//! Closed-form predictions for trigger fronts slightly slower than the
//! linear spreading speed: frequency, selected wavenumber and distance
//! between trigger and front interface, for the family index `j ≥ 1`.

use serde::{Deserialize, Serialize};

use crate::blowup::{delta_z, shoot_free_front, DeltaZ, ShootOptions};
use crate::dispersion::{k_from_omega, k_lin, linear_spreading, omega_abs, CGLParams};
use crate::error::{Error, Result};
use crate::scaling::linear_point;

/// All predicted quantities at one speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub c: f64,
    pub delta_c: f64,
    pub j: u32,
    pub omega_tf: f64,
    /// `None` when `α = γ`, where the expansion is not available.
    pub k_tf_expansion: Option<f64>,
    pub k_tf_exact: f64,
    pub xi_star: f64,
    pub delta_z: DeltaZ,
}

/// The two wavenumber predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavenumberPrediction {
    pub expansion: Option<f64>,
    pub exact: f64,
}

fn speed_gap(params: &CGLParams, c: f64) -> Result<f64> {
    if (params.chi_minus - 1.0).abs() > 1e-12 {
        return Err(Error::UnsupportedTriggerLevel(params.chi_minus));
    }
    let c_lin = linear_spreading(params).c_lin;
    if c >= c_lin {
        return Err(Error::SpeedTooLarge { c, c_lin });
    }
    Ok(c_lin - c)
}

fn check_j(j: u32) -> Result<()> {
    if j == 0 {
        return Err(Error::InvalidParams("front index j must be positive".into()));
    }
    Ok(())
}

/// `ω_tf = ω_abs(c) + 2|ΔZ_i|/(πj(1+α²)^{3/4})·Δc^{3/2}`.
pub fn predict_frequency(params: &CGLParams, c: f64, j: u32, dz: &DeltaZ) -> Result<f64> {
    check_j(j)?;
    let dc = speed_gap(params, c)?;
    let a2 = 1.0 + params.alpha * params.alpha;
    Ok(omega_abs(params, c)? + 2.0 * dz.im.abs() / (std::f64::consts::PI * j as f64 * a2.powf(0.75)) * dc.powf(1.5))
}

/// Linear coefficient `g₁ = dk/dc` of the selected wavenumber at `c_lin`
/// along `ω = ω_abs(c)`.
pub fn g1(params: &CGLParams) -> f64 {
    let (a, g) = (params.alpha, params.gamma);
    -(2.0 * a / (1.0 + a * a).sqrt() + k_lin(params)) / (2.0 * (1.0 + g * g).sqrt())
}

/// Expansion `k_lin − g₁Δc − |ΔZ_i|/(π√(1+γ²)(1+α²)^{3/4})·Δc^{3/2}` and the
/// exact inversion of the dispersion relation at the predicted frequency.
pub fn predict_wavenumber(params: &CGLParams, c: f64, dz: &DeltaZ) -> Result<WavenumberPrediction> {
    let dc = speed_gap(params, c)?;
    let exact = k_from_omega(params, predict_frequency(params, c, 1, dz)?, c)?;
    let expansion = if (params.alpha - params.gamma).abs() < 1e-8 {
        None
    } else {
        let (a2, g2) = (1.0 + params.alpha * params.alpha, 1.0 + params.gamma * params.gamma);
        let coef = dz.im.abs() / (std::f64::consts::PI * g2.sqrt() * a2.powf(0.75));
        Some(k_lin(params) - g1(params) * dc - coef * dc.powf(1.5))
    };
    Ok(WavenumberPrediction { expansion, exact })
}

/// `ξ_* = πj(1+α²)^{3/4}Δc^{−1/2} + (1+α²)^{1/2}ΔZ_r`, where `ΔZ_r` carries
/// the interface threshold it was computed with.
pub fn predict_interface(params: &CGLParams, c: f64, dz: &DeltaZ, j: u32) -> Result<f64> {
    check_j(j)?;
    let dc = speed_gap(params, c)?;
    let a2 = 1.0 + params.alpha * params.alpha;
    Ok(std::f64::consts::PI * j as f64 * a2.powf(0.75) / dc.sqrt() + a2.sqrt() * dz.re)
}

/// Wavenumber obtained when the frequency is frozen at `ω_lin` (the naive
/// comparator that ignores the absolute spectrum).
pub fn naive_wavenumber(params: &CGLParams, c: f64) -> Result<f64> {
    k_from_omega(params, linear_spreading(params).omega_lin, c)
}

/// `ΔZ` from a free-front shot whose event threshold `R = l²δ²` matches the
/// interface definition `|A| = δ`.
pub fn interface_delta_z(params: &CGLParams, delta: f64) -> Result<DeltaZ> {
    let lp = linear_point(params)?;
    let shot = shoot_free_front(&lp, (lp.l * delta).powi(2), &ShootOptions::default())?;
    delta_z(params, shot.z_star)
}

/// Every prediction at speed `c` for front index `j`.
pub fn predict(params: &CGLParams, c: f64, j: u32, dz: &DeltaZ) -> Result<Prediction> {
    let omega_tf = predict_frequency(params, c, j, dz)?;
    let wn = predict_wavenumber(params, c, dz)?;
    let k_tf_exact = if j == 1 { wn.exact } else { k_from_omega(params, omega_tf, c)? };
    Ok(Prediction {
        c,
        delta_c: speed_gap(params, c)?,
        j,
        omega_tf,
        k_tf_expansion: wn.expansion,
        k_tf_exact,
        xi_star: predict_interface(params, c, dz, j)?,
        delta_z: *dz,
    })
}
