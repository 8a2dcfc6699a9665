//! Normalization of the comoving traveling-wave problem.
//!
//! A comoving solution `A(ξ)e^{iωt}` of the unscaled equation is written as
//! `A = e^{iκξ} a(ζ) / l` with `ζ = ξ·m/√(1+α²)`, which turns the profile
//! equation behind the trigger into
//!
//! ```text
//! a'' = −ĉ a' − (1 − iω̂) a + (1 + iγ̂) a|a|²
//! ```
//!
//! and adds `(χ₋ − χ₊)(1 − iα)/m² · a` ahead of it.

use serde::{Deserialize, Serialize};

use crate::dispersion::{omega_abs_formula, CGLParams};
use crate::error::{Error, Result};

/// Scaled parameter set of the normalized profile equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub c_hat: f64,
    /// `2 − ĉ`.
    pub delta_c_hat: f64,
    pub omega_hat: f64,
    pub gamma_hat: f64,
    pub m: f64,
    pub l: f64,
    /// Gauge rotation rate `κ = cα/(2(1+α²))` in the unscaled variable `ξ`.
    pub shift_rate: f64,
    /// `dζ/dξ = m/√(1+α²)`.
    pub zeta_scale: f64,
}

fn check_regime(params: &CGLParams) -> Result<f64> {
    let bf = 1.0 + params.alpha * params.gamma;
    if bf <= 0.0 {
        return Err(Error::BenjaminFeirRegime(bf));
    }
    Ok(bf)
}

fn assemble(params: &CGLParams, c: f64, m2: f64, omega_hat: f64, bf: f64) -> Result<ScaledParams> {
    if !(m2 > 0.0) {
        return Err(Error::NonPositiveM(m2));
    }
    let a2 = 1.0 + params.alpha * params.alpha;
    let m = m2.sqrt();
    let c_hat = c / (m * a2.sqrt());
    Ok(ScaledParams {
        c_hat,
        delta_c_hat: 2.0 - c_hat,
        omega_hat,
        gamma_hat: (params.gamma - params.alpha) / bf,
        m,
        l: (bf / m2).sqrt(),
        shift_rate: c * params.alpha / (2.0 * a2),
        zeta_scale: m / a2.sqrt(),
    })
}

fn m_squared(params: &CGLParams, c: f64, omega: f64) -> f64 {
    let a = params.alpha;
    params.chi_minus + (c * a).powi(2) / (4.0 * (1.0 + a * a)) - a * omega
}

/// Scaled parameters for speed `c` and comoving frequency `ω`.
pub fn to_scaled(params: &CGLParams, c: f64, omega: f64) -> Result<ScaledParams> {
    let bf = check_regime(params)?;
    let m2 = m_squared(params, c, omega);
    let omega_hat = (omega - omega_abs_formula(params, c)) / m2;
    assemble(params, c, m2, omega_hat, bf)
}

/// Scaled parameters for speed `c` with the scaled frequency `ω̂` prescribed
/// instead of `ω`; `m` then solves `m²(1 + αω̂) = m²|_{ω = ω_abs}`.
pub fn to_scaled_with_omega_hat(params: &CGLParams, c: f64, omega_hat: f64) -> Result<ScaledParams> {
    let bf = check_regime(params)?;
    let m0 = m_squared(params, c, omega_abs_formula(params, c));
    let denom = 1.0 + params.alpha * omega_hat;
    if !(denom > 0.0) {
        return Err(Error::NonPositiveM(m0 / denom));
    }
    assemble(params, c, m0 / denom, omega_hat, bf)
}

/// Recovers `(c, ω)` from scaled parameters built with the same `params`.
pub fn from_scaled(params: &CGLParams, scaled: &ScaledParams) -> (f64, f64) {
    let a2 = 1.0 + params.alpha * params.alpha;
    let c = scaled.c_hat * scaled.m * a2.sqrt();
    let omega = omega_abs_formula(params, c) + scaled.m * scaled.m * scaled.omega_hat;
    (c, omega)
}

/// Scaled parameters at the linear spreading point `(c_lin, ω_lin)`.
pub fn linear_point(params: &CGLParams) -> Result<ScaledParams> {
    let ls = crate::dispersion::linear_spreading(params);
    let mut s = to_scaled(params, ls.c_lin, ls.omega_lin)?;
    // Exact values; the formulas above reproduce them only up to rounding.
    s.c_hat = 2.0;
    s.delta_c_hat = 0.0;
    s.omega_hat = 0.0;
    Ok(s)
}

/// Maps a physical wavenumber (`A ∝ e^{−ikξ}`) to the scaled wavenumber
/// `k̃` of `a ∝ e^{ik̃ζ}`, i.e. `z = ik̃` in blowup coordinates.
pub fn wavenumber_to_scaled(_params: &CGLParams, scaled: &ScaledParams, k: f64) -> f64 {
    -(k + scaled.shift_rate) / scaled.zeta_scale
}

/// Inverse of [`wavenumber_to_scaled`].
pub fn wavenumber_from_scaled(_params: &CGLParams, scaled: &ScaledParams, k_tilde: f64) -> f64 {
    -k_tilde * scaled.zeta_scale - scaled.shift_rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{k_from_omega, k_lin, linear_spreading, nonlinear_dispersion};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn p(alpha: f64, gamma: f64) -> CGLParams {
        CGLParams::new(alpha, gamma).unwrap()
    }

    #[test]
    fn linear_point_normalization() {
        let params = p(-0.1, -0.2);
        let ls = linear_spreading(&params);
        let s = to_scaled(&params, ls.c_lin, ls.omega_lin).unwrap();
        assert!((s.c_hat - 2.0).abs() < 1e-12);
        assert!((s.m - 1.0).abs() < 1e-12);
        assert!(s.omega_hat.abs() < 1e-12);
        assert!((s.gamma_hat + 0.1 / 1.02).abs() < 1e-15);
        assert_eq!(p(0.3, 0.3).alpha, 0.3);
        assert_eq!(to_scaled(&p(0.3, 0.3), 1.0, 0.1).unwrap().gamma_hat, 0.0);
    }

    #[test]
    fn rejects_benjamin_feir_and_negative_m() {
        assert!(matches!(to_scaled(&p(-1.2, 2.0), 1.0, 0.0), Err(Error::BenjaminFeirRegime(_))));
        assert!(matches!(to_scaled(&p(0.5, 0.0), 1.0, 10.0), Err(Error::NonPositiveM(_))));
    }

    #[test]
    fn omega_hat_zero_is_absolute_spectrum_frequency() {
        let params = p(-0.1, -0.2);
        let s = to_scaled_with_omega_hat(&params, 1.8, 0.0).unwrap();
        let (c, w) = from_scaled(&params, &s);
        assert!((c - 1.8).abs() < 1e-14);
        assert!((w - crate::dispersion::omega_abs(&params, 1.8).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn prescribed_omega_hat_matches_to_scaled() {
        let params = p(0.4, -0.7);
        let s = to_scaled_with_omega_hat(&params, 1.5, 0.03).unwrap();
        let (c, w) = from_scaled(&params, &s);
        let t = to_scaled(&params, c, w).unwrap();
        assert!((t.omega_hat - 0.03).abs() < 1e-14);
        assert!((t.m - s.m).abs() < 1e-14);
    }

    #[test]
    fn scaled_linear_wavenumber_solves_equilibrium_condition() {
        let params = p(-0.1, -0.2);
        let s = linear_point(&params).unwrap();
        let kt = wavenumber_to_scaled(&params, &s, k_lin(&params));
        let g = s.gamma_hat;
        assert!((g * kt * kt + 2.0 * kt - g).abs() < 1e-12);
        assert!((kt - (-1.0 + (1.0 + g * g).sqrt()) / g).abs() < 1e-10);
        let back = wavenumber_from_scaled(&params, &s, kt);
        assert!((back - k_lin(&params)).abs() < 1e-12);
    }

    #[test]
    fn zero_alpha_maps_wavenumber_to_its_negative() {
        let params = p(0.0, 0.3);
        let s = linear_point(&params).unwrap();
        assert_eq!(s.shift_rate, 0.0);
        assert!((wavenumber_to_scaled(&params, &s, 0.25) + 0.25).abs() < 1e-15);
    }

    /// Pulls the scaled wave train `a = √(1−k̃²)e^{ik̃ζ}` back to the unscaled
    /// comoving equation `iωA = (1+iα)A'' + cA' + χ₋A − (1+iγ)|A|²A`.
    fn pullback_residual(params: &CGLParams, c: f64, omega: f64) -> Option<f64> {
        let s = to_scaled(params, c, omega).ok()?;
        let (g, ch, wh) = (s.gamma_hat, s.c_hat, s.omega_hat);
        let disc = ch * ch + 4.0 * g * (g + wh);
        if disc < 0.0 {
            return None;
        }
        let kt = 2.0 * (g + wh) / (ch + disc.sqrt());
        if kt.abs() >= 1.0 {
            return None;
        }
        let amp = (1.0 - kt * kt).sqrt() / s.l;
        let q = s.shift_rate + kt * s.zeta_scale;
        let iq = Complex64::new(0.0, q);
        let mut worst = 0.0f64;
        for j in 0..16 {
            let xi = -7.0 + j as f64;
            let a = amp * (iq * xi).exp();
            let lhs = Complex64::new(0.0, omega) * a;
            let rhs = Complex64::new(1.0, params.alpha) * iq * iq * a + c * iq * a + params.chi_minus * a
                - Complex64::new(1.0, params.gamma) * a * a.norm_sqr();
            worst = worst.max((lhs - rhs).norm());
        }
        // The pulled-back wavenumber is the physical one selected by dispersion.
        let k = wavenumber_from_scaled(params, &s, kt);
        if let Ok(w) = nonlinear_dispersion(params, k, c) {
            worst = worst.max((w - omega).abs());
        }
        Some(worst)
    }

    proptest! {
        #[test]
        fn scaled_wave_train_solves_unscaled_equation(alpha in -1.5f64..1.5, gamma in -1.5f64..1.5, cf in 0.3f64..1.2, dw in -0.3f64..0.3) {
            let params = p(alpha, gamma);
            prop_assume!(1.0 + alpha * gamma > 0.05);
            let c = cf * linear_spreading(&params).c_lin;
            let omega = omega_abs_formula(&params, c) + dw;
            if let Some(r) = pullback_residual(&params, c, omega) {
                prop_assert!(r <= 1e-8, "residual {r}");
            }
        }

        #[test]
        fn linear_point_is_normalized(alpha in -3.0f64..3.0) {
            let params = p(alpha, 0.0);
            let ls = linear_spreading(&params);
            let s = to_scaled(&params, ls.c_lin, ls.omega_lin).unwrap();
            prop_assert!((s.m - 1.0).abs() <= 1e-12);
            prop_assert!((s.c_hat - 2.0).abs() <= 1e-12);
        }

        #[test]
        fn round_trip_is_identity(alpha in -2.0f64..2.0, gamma in -2.0f64..2.0, c in 0.1f64..3.0, dw in -0.5f64..0.5) {
            let params = p(alpha, gamma);
            prop_assume!(1.0 + alpha * gamma > 0.0);
            let omega = omega_abs_formula(&params, c) + dw;
            if let Ok(s) = to_scaled(&params, c, omega) {
                let (c2, w2) = from_scaled(&params, &s);
                prop_assert!((c2 - c).abs() <= 1e-12 * (1.0 + c.abs()));
                prop_assert!((w2 - omega).abs() <= 1e-12 * (1.0 + omega.abs()));
                let s2 = to_scaled(&params, c2, w2).unwrap();
                prop_assert!((s2.c_hat - s.c_hat).abs() <= 1e-12 && (s2.omega_hat - s.omega_hat).abs() <= 1e-12);
            }
        }

        #[test]
        fn wavenumber_map_matches_dispersion_inversion(alpha in -1.5f64..1.5, gamma in -1.5f64..1.5) {
            let params = p(alpha, gamma);
            prop_assume!(1.0 + alpha * gamma > 0.05);
            let s = linear_point(&params).unwrap();
            let ls = linear_spreading(&params);
            let k = k_from_omega(&params, ls.omega_lin, ls.c_lin).unwrap();
            let kt = wavenumber_to_scaled(&params, &s, k);
            let g = s.gamma_hat;
            let oracle = if g == 0.0 { 0.0 } else { (-1.0 + (1.0 + g * g).sqrt()) / g };
            prop_assert!((kt - oracle).abs() <= 1e-10);
        }
    }
}
