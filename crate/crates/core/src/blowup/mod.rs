//! Gauge-quotiented profile dynamics in the coordinates `z = a'/a`,
//! `R = |a|²` of the scaled profile equation.
//!
//! With `C = 1 − iω̂ − T` (where `T` is the trigger term, zero behind the
//! trigger) the first-order system `a' = b`, `b' = −C a − ĉ b + (1+iγ̂)|a|²a`
//! becomes
//!
//! ```text
//! z' = −z² − ĉ z − C + (1 + iγ̂) R,      R' = R (z + z̄).
//! ```
//!
//! Near `z = ∞` the inverted chart `(z̃, S) = (1/z, R|z|²) = (a/b, |b|²)` is
//! used instead. The singular sphere `R = 0` carries the projective Riccati
//! flow of the linear equation.

mod flow;
mod riccati;
mod shoot;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::CGLParams;
use crate::error::{Error, Result};
use crate::scaling::ScaledParams;

pub use flow::{flow, integrate_ab, Chart, ChartState, FlowOptions, FlowSample};
pub use riccati::{riccati_closed_form, riccati_projective, sphere_closed_form};
pub use shoot::{shoot_free_front, unstable_direction, ShootOptions, ShootResult, TrajectoryPoint, UnstableDirection};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A point `(z, R)` of the blown-up phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereState {
    pub z: Complex64,
    pub r: f64,
}

/// Projective distance `ΔZ = 1/ẑ₊ − 1/ẑ₋` between the leading edge of the
/// free front and the stable fiber ahead of the trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaZ {
    pub re: f64,
    pub im: f64,
    pub z_hat_plus: Complex64,
    pub z_hat_minus: Complex64,
}

/// The profile vector field in one region of the trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionField {
    pub c_hat: f64,
    pub omega_hat: f64,
    pub gamma_hat: f64,
    /// Trigger contribution `T` to the linear coefficient.
    pub trigger: Complex64,
}

/// Field behind (`ζ < 0`) and ahead of (`ζ ≥ 0`) the trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorFields {
    pub minus: RegionField,
    pub plus: RegionField,
}

impl VectorFields {
    /// Field in force at position `zeta`.
    pub fn at(&self, zeta: f64) -> &RegionField {
        if zeta < 0.0 {
            &self.minus
        } else {
            &self.plus
        }
    }
}

impl RegionField {
    /// `C = 1 − iω̂ − T`.
    pub fn linear_coefficient(&self) -> Complex64 {
        Complex64::new(1.0, -self.omega_hat) - self.trigger
    }

    fn cubic(&self) -> Complex64 {
        Complex64::new(1.0, self.gamma_hat)
    }

    /// `(z', R')` in the regular chart.
    pub fn rhs(&self, z: Complex64, r: f64) -> (Complex64, f64) {
        let dz = -z * z - self.c_hat * z - self.linear_coefficient() + self.cubic() * r;
        (dz, 2.0 * r * z.re)
    }

    /// `(z̃', S')` in the inverted chart.
    pub fn rhs_inverted(&self, zt: Complex64, s: f64) -> (Complex64, f64) {
        let cl = self.linear_coefficient();
        let n2 = zt.norm_sqr();
        let dzt = 1.0 + self.c_hat * zt + cl * zt * zt - self.cubic() * zt * zt * n2 * s;
        let growth = -cl * zt - self.c_hat + self.cubic() * n2 * zt * s;
        (dzt, 2.0 * s * growth.re)
    }

    /// `(a', b')` of the first-order profile system.
    pub fn rhs_ab(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let db = -self.linear_coefficient() * a - self.c_hat * b + self.cubic() * a * a.norm_sqr();
        (b, db)
    }

    /// Jacobian of the regular-chart field in real coordinates `(Re z, Im z, R)`.
    pub fn jacobian(&self, z: Complex64, r: f64) -> Matrix3<f64> {
        let d = -2.0 * z - self.c_hat;
        Matrix3::new(
            d.re, -d.im, 1.0, //
            d.im, d.re, self.gamma_hat, //
            2.0 * r, 0.0, 2.0 * z.re,
        )
    }
}

/// Trigger term `(χ₋ − χ₊)(1 − iα)/m²` of the scaled equation ahead of the trigger.
pub fn trigger_term(scaled: &ScaledParams, params: &CGLParams) -> Complex64 {
    (params.chi_minus - params.chi_plus) * Complex64::new(1.0, -params.alpha) / (scaled.m * scaled.m)
}

/// Vector fields of both regions for the given scaled parameters.
pub fn derive_vector_fields(scaled: &ScaledParams, params: &CGLParams) -> VectorFields {
    let minus = RegionField {
        c_hat: scaled.c_hat,
        omega_hat: scaled.omega_hat,
        gamma_hat: scaled.gamma_hat,
        trigger: Complex64::new(0.0, 0.0),
    };
    let plus = RegionField { trigger: trigger_term(scaled, params), ..minus };
    VectorFields { minus, plus }
}

/// `μ = ĉ²/4 − 1 + iω̂ = −Δĉ + Δĉ²/4 + iω̂`, the constant of the shifted
/// Riccati equation `ẑ' = −ẑ² + μ` on the sphere behind the trigger.
pub fn sphere_mu(scaled: &ScaledParams) -> Complex64 {
    let d = scaled.delta_c_hat;
    Complex64::new(-d + 0.25 * d * d, scaled.omega_hat)
}

/// Equilibria `−ĉ/2 ± √μ` of the sphere flow behind the trigger.
pub fn sphere_equilibria(scaled: &ScaledParams) -> (Complex64, Complex64) {
    let s = sphere_mu(scaled).sqrt();
    let base = Complex64::new(-0.5 * scaled.c_hat, 0.0);
    (base + s, base - s)
}

/// The equilibrium `z₊` of the sphere flow ahead of the trigger along which
/// `R` decays (`Re z₊ < 0`).
pub fn z_plus(scaled: &ScaledParams, params: &CGLParams) -> Complex64 {
    let t = trigger_term(scaled, params);
    let disc = 0.25 * scaled.c_hat * scaled.c_hat - 1.0 + I * scaled.omega_hat + t;
    -0.5 * scaled.c_hat - disc.sqrt()
}

/// Scaled wavenumber `k̃` of the wave train `a = √(1−k̃²)e^{ik̃ζ}` solving
/// `γ̂k̃² + ĉk̃ − γ̂ − ω̂ = 0` (the root continuing `k̃ = 0` at `γ̂ = ω̂ = 0`).
pub fn wave_train_wavenumber(scaled: &ScaledParams) -> Result<f64> {
    let (g, c, w) = (scaled.gamma_hat, scaled.c_hat, scaled.omega_hat);
    let disc = c * c + 4.0 * g * (g + w);
    if disc < 0.0 {
        return Err(Error::NoWaveTrain);
    }
    let denom = c + disc.sqrt();
    if denom <= 0.0 {
        return Err(Error::NoWaveTrain);
    }
    let k = 2.0 * (g + w) / denom;
    if k.abs() >= 1.0 {
        return Err(Error::NoWaveTrain);
    }
    Ok(k)
}

/// The wave train as an equilibrium `(z, R) = (ik̃, 1 − k̃²)` of the field
/// behind the trigger.
pub fn wave_train_equilibrium(scaled: &ScaledParams) -> Result<SphereState> {
    let k = wave_train_wavenumber(scaled)?;
    Ok(SphereState { z: Complex64::new(0.0, k), r: 1.0 - k * k })
}

/// `ẑ₊` at the linear point: `−√((χ₋ − χ₊)(1 − iα)/χ₋)`.
pub fn z_hat_plus_linear(params: &CGLParams) -> Complex64 {
    let k = (params.chi_minus - params.chi_plus) * Complex64::new(1.0, -params.alpha) / params.chi_minus;
    -k.sqrt()
}

/// `ΔZ` for the free-front base point `z_star`.
pub fn delta_z(params: &CGLParams, z_star: Complex64) -> Result<DeltaZ> {
    let z_hat_minus = z_star + 1.0;
    if z_hat_minus.norm() < 1e-10 {
        return Err(Error::DegenerateFront(z_hat_minus.norm()));
    }
    let z_hat_plus = z_hat_plus_linear(params);
    let dz = 1.0 / z_hat_plus - 1.0 / z_hat_minus;
    Ok(DeltaZ { re: dz.re, im: dz.im, z_hat_plus, z_hat_minus })
}
