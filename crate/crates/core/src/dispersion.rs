//! Linear and nonlinear dispersion relations of the complex Ginzburg-Landau
//! equation `A_t = (1+iα)A_xx + χA − (1+iγ)A|A|²`.
//!
//! Conventions: wave trains are `A = √(χ₋−k²)·e^{iΩt}e^{−ikx}` and linear
//! modes are `e^{λt+νx}` with `λ = iω` on the imaginary axis.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Physical parameters: linear and nonlinear dispersion plus the two
/// trigger levels (unstable behind, stable ahead).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CGLParams {
    pub alpha: f64,
    pub gamma: f64,
    #[serde(default = "default_chi_minus")]
    pub chi_minus: f64,
    #[serde(default = "default_chi_plus")]
    pub chi_plus: f64,
}

fn default_chi_minus() -> f64 {
    1.0
}

fn default_chi_plus() -> f64 {
    -1.0
}

impl CGLParams {
    /// Parameters with the default trigger levels `χ₋ = 1`, `χ₊ = −1`.
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        Self::with_trigger(alpha, gamma, 1.0, -1.0)
    }

    pub fn with_trigger(alpha: f64, gamma: f64, chi_minus: f64, chi_plus: f64) -> Result<Self> {
        let p = Self { alpha, gamma, chi_minus, chi_plus };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidParams("alpha and gamma must be finite".into()));
        }
        if !(self.chi_minus > 0.0 && self.chi_plus < 0.0) {
            return Err(Error::InvalidParams(format!(
                "trigger levels must satisfy chi_minus > 0 > chi_plus (got {}, {})",
                self.chi_minus, self.chi_plus
            )));
        }
        Ok(())
    }
}

/// The pulled-front quantities at the leading edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSpreading {
    pub c_lin: f64,
    pub omega_lin: f64,
    pub nu_lin: Complex64,
}

/// Result of the generic double-root (saddle point) solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleRoot {
    pub c: f64,
    pub lambda: Complex64,
    pub nu: Complex64,
}

/// Sampled absolute spectrum of the state `A = 0` behind the trigger.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsSpectrumCurve {
    pub points: Vec<Complex64>,
    pub edge: Complex64,
    pub omega_abs: Option<f64>,
}

/// Closed-form spreading speed, edge frequency and double root for the
/// instability level `χ₋`.
pub fn linear_spreading(params: &CGLParams) -> LinearSpreading {
    let a2 = 1.0 + params.alpha * params.alpha;
    let chi = params.chi_minus;
    LinearSpreading {
        c_lin: 2.0 * (chi * a2).sqrt(),
        omega_lin: params.alpha * chi,
        nu_lin: -(chi.sqrt()) * Complex64::new(1.0, -params.alpha) / a2.sqrt(),
    }
}

/// Linear dispersion relation in a frame moving with speed `c`,
/// `d = (1+iα)ν² + cν + χ − λ`.
pub fn comoving_dispersion(alpha: f64, c: f64, chi: f64, lambda: Complex64, nu: Complex64) -> Complex64 {
    Complex64::new(1.0, alpha) * nu * nu + c * nu + chi - lambda
}

fn double_root_residual(alpha: f64, chi: f64, x: &Vector4<f64>) -> Vector4<f64> {
    let (c, omega, nu) = (x[0], x[1], Complex64::new(x[2], x[3]));
    let d = comoving_dispersion(alpha, c, chi, I * omega, nu);
    let dd = 2.0 * Complex64::new(1.0, alpha) * nu + c;
    Vector4::new(d.re, d.im, dd.re, dd.im)
}

fn double_root_jacobian(alpha: f64, x: &Vector4<f64>) -> Matrix4<f64> {
    let (c, nu) = (x[0], Complex64::new(x[2], x[3]));
    let a = Complex64::new(1.0, alpha);
    let dnu = 2.0 * a * nu + c;
    let dnu2 = 2.0 * a;
    Matrix4::new(
        nu.re, 0.0, dnu.re, -dnu.im, //
        nu.im, -1.0, dnu.im, dnu.re, //
        1.0, 0.0, dnu2.re, -dnu2.im, //
        0.0, 0.0, dnu2.im, dnu2.re,
    )
}

/// Solves `d(iω − cν, ν) = 0`, `∂_ν d = 0` by Newton's method started from
/// the best point of a 20×20 scan over `ν ∈ [−3, 3]²`.
pub fn double_root_solve(params: &CGLParams, chi: f64) -> Result<DoubleRoot> {
    if !(chi > 0.0) {
        return Err(Error::InvalidParams(format!("chi = {chi} must be positive")));
    }
    let alpha = params.alpha;
    let a = Complex64::new(1.0, alpha);
    let mut best: Option<(f64, Vector4<f64>)> = None;
    for i in 0..20 {
        for j in 0..20 {
            let nu = Complex64::new(-3.0 + 6.0 * i as f64 / 19.0, -3.0 + 6.0 * j as f64 / 19.0);
            if nu.re >= 0.0 {
                continue;
            }
            let c = (-2.0 * a * nu).re;
            if c <= 0.0 {
                continue;
            }
            let omega = (a * nu * nu + c * nu + chi).im;
            let x = Vector4::new(c, omega, nu.re, nu.im);
            let r = double_root_residual(alpha, chi, &x).norm();
            if best.as_ref().map_or(true, |(rb, _)| r < *rb) {
                best = Some((r, x));
            }
        }
    }
    let mut x = best.map(|(_, x)| x).ok_or(Error::NonConvergence { residual: f64::INFINITY, iterations: 0 })?;
    let mut res = double_root_residual(alpha, chi, &x).norm();
    let mut iterations = 0;
    while iterations < 50 && res > 1e-12 {
        let jac = double_root_jacobian(alpha, &x);
        let dx = jac.lu().solve(&(-double_root_residual(alpha, chi, &x))).ok_or(Error::Singular)?;
        x += dx;
        res = double_root_residual(alpha, chi, &x).norm();
        iterations += 1;
    }
    if res > 1e-10 || !res.is_finite() {
        return Err(Error::NonConvergence { residual: res, iterations });
    }
    let root = DoubleRoot { c: x[0], lambda: I * x[1], nu: Complex64::new(x[2], x[3]) };
    if root.nu.re >= 0.0 {
        return Err(Error::NonConvergence { residual: res, iterations });
    }
    // Pinching sanity check: far to the right the two spatial roots separate
    // into one decaying and one growing mode.
    let (lo, hi) = spatial_roots(params, root.lambda + 100.0 * (1.0 + root.c * root.c), root.c, chi);
    if !(lo.re < 0.0 && hi.re > 0.0) {
        return Err(Error::InvalidParams("pinching condition violated at the double root".into()));
    }
    Ok(root)
}

/// The two roots of `(1+iα)ν² + cν + χ − λ = 0`, ordered by real part with
/// ties broken by ascending imaginary part.
pub fn spatial_roots(params: &CGLParams, lambda: Complex64, c: f64, chi: f64) -> (Complex64, Complex64) {
    let a = Complex64::new(1.0, params.alpha);
    let b = Complex64::new(c, 0.0);
    let cc = Complex64::new(chi, 0.0) - lambda;
    let (r1, r2) = quadratic_roots(a, b, cc);
    order_roots(r1, r2)
}

/// Roots of `a x² + b x + c` without cancellation.
pub(crate) fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let sq = (b * b - 4.0 * a * c).sqrt();
    let sgn = if (b.conj() * sq).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sgn * sq);
    if q == Complex64::new(0.0, 0.0) {
        return (q, q);
    }
    (q / a, c / q)
}

fn order_roots(r1: Complex64, r2: Complex64) -> (Complex64, Complex64) {
    let scale = 1.0 + r1.norm().max(r2.norm());
    let tie = (r1.re - r2.re).abs() <= 1e-12 * scale;
    let swap = if tie { r1.im > r2.im } else { r1.re > r2.re };
    if swap {
        (r2, r1)
    } else {
        (r1, r2)
    }
}

/// Frequency at which the absolute spectrum crosses the imaginary axis.
pub fn omega_abs(params: &CGLParams, c: f64) -> Result<f64> {
    let c_lin = linear_spreading(params).c_lin;
    if c >= c_lin {
        return Err(Error::NoCrossing { c, c_lin });
    }
    if c < 0.0 {
        return Err(Error::InvalidParams(format!("speed c = {c} must be non-negative")));
    }
    Ok(omega_abs_formula(params, c))
}

/// The crossing formula without the range check, used for limits at `c_lin`.
pub(crate) fn omega_abs_formula(params: &CGLParams, c: f64) -> f64 {
    let a = params.alpha;
    -a * params.chi_minus + a * c * c / (2.0 * (1.0 + a * a))
}

/// Samples the half-line `λ(s) = χ₋ − c²/(4(1+iα)) − (1+iα)s`, `s ∈ [0, s_max]`.
pub fn absolute_spectrum(params: &CGLParams, c: f64, s_max: f64, n: usize) -> Result<AbsSpectrumCurve> {
    if n < 2 || !(s_max > 0.0) {
        return Err(Error::InvalidParams("absolute_spectrum needs n >= 2 and s_max > 0".into()));
    }
    let a = Complex64::new(1.0, params.alpha);
    let edge = params.chi_minus - c * c / (4.0 * a);
    let points = (0..n).map(|i| edge - a * (s_max * i as f64 / (n - 1) as f64)).collect();
    let c_lin = linear_spreading(params).c_lin;
    let omega_abs = if c.abs() <= c_lin { Some(omega_abs_formula(params, c)) } else { None };
    Ok(AbsSpectrumCurve { points, edge, omega_abs })
}

fn check_k(params: &CGLParams, k: f64) -> Result<()> {
    if !(k * k < params.chi_minus) {
        return Err(Error::InvalidWavenumber(k));
    }
    Ok(())
}

/// Comoving-frame frequency `Ω(k; c) = −αk² − γ(χ₋ − k²) − ck` of the wave
/// train with wavenumber `k`.
pub fn nonlinear_dispersion(params: &CGLParams, k: f64, c: f64) -> Result<f64> {
    check_k(params, k)?;
    Ok(-params.alpha * k * k - params.gamma * (params.chi_minus - k * k) - c * k)
}

/// Group velocity `dΩ/dk = 2(γ − α)k − c`.
pub fn group_velocity(params: &CGLParams, k: f64, c: f64) -> Result<f64> {
    check_k(params, k)?;
    Ok(2.0 * (params.gamma - params.alpha) * k - c)
}

/// Wavenumber selected by the pulled front, `Ω(k_lin; c_lin) = ω_lin`.
///
/// Evaluated in rationalized form, `−√χ₋(α+γ)/(√(1+α²)+√(1+γ²))`, which is
/// the same root without cancellation as `γ → α`.
pub fn k_lin(params: &CGLParams) -> f64 {
    let (a, g) = (params.alpha, params.gamma);
    -(params.chi_minus.sqrt()) * (a + g) / ((1.0 + a * a).sqrt() + (1.0 + g * g).sqrt())
}

/// Inverts the nonlinear dispersion relation: the unique root of
/// `(γ−α)k² − ck − γχ₋ − ω = 0` with `|k| < √χ₋` and negative group velocity.
pub fn k_from_omega(params: &CGLParams, omega: f64, c: f64) -> Result<f64> {
    let (a, g, chi) = (params.alpha, params.gamma, params.chi_minus);
    let qa = g - a;
    let qc = -g * chi - omega;
    let candidates: Vec<f64> = if qa == 0.0 {
        if c == 0.0 {
            vec![]
        } else {
            vec![qc / c]
        }
    } else {
        let disc = c * c - 4.0 * qa * qc;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (-c + (-c).signum() * disc.sqrt());
            if q == 0.0 {
                vec![0.0]
            } else {
                vec![q / qa, qc / q]
            }
        }
    };
    let admissible: Vec<f64> = candidates
        .into_iter()
        .filter(|&k| k * k < chi && 2.0 * qa * k - c < 0.0)
        .collect();
    match admissible.as_slice() {
        [] => Err(Error::NoAdmissibleRoot),
        [k] => Ok(*k),
        [k1, k2] if (k1 - k2).abs() <= 1e-14 * (1.0 + k1.abs()) => Ok(*k1),
        [k1, k2, ..] => Err(Error::Ambiguous(*k1, *k2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(alpha: f64, gamma: f64) -> CGLParams {
        CGLParams::new(alpha, gamma).unwrap()
    }

    #[test]
    fn trigger_levels_are_validated() {
        assert!(CGLParams::with_trigger(0.0, 0.0, -1.0, -1.0).is_err());
        assert!(CGLParams::with_trigger(0.0, 0.0, 1.0, 0.5).is_err());
        assert!(CGLParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn spreading_at_zero_dispersion() {
        let ls = linear_spreading(&p(0.0, 0.0));
        assert_eq!(ls.c_lin, 2.0);
        assert_eq!(ls.omega_lin, 0.0);
        assert_relative_eq!(ls.nu_lin.re, -1.0);
        assert_eq!(ls.nu_lin.im, 0.0);
    }

    #[test]
    fn spreading_at_alpha_minus_tenth() {
        let ls = linear_spreading(&p(-0.1, -0.2));
        assert!((ls.c_lin - 2.01).abs() < 1e-3);
        assert_eq!(ls.omega_lin, -0.1);
        let expected = -Complex64::new(1.0, 0.1) / 1.01f64.sqrt();
        assert!((ls.nu_lin - expected).norm() < 1e-15);
        let d = comoving_dispersion(-0.1, ls.c_lin, 1.0, I * ls.omega_lin, ls.nu_lin);
        let dd = 2.0 * Complex64::new(1.0, -0.1) * ls.nu_lin + ls.c_lin;
        assert!(d.norm() < 1e-10 && dd.norm() < 1e-10);
    }

    #[test]
    fn double_root_examples() {
        let r = double_root_solve(&p(0.0, 0.0), 1.0).unwrap();
        assert!((r.c - 2.0).abs() < 1e-12 && r.lambda.norm() < 1e-12 && (r.nu + 1.0).norm() < 1e-12);
        let r = double_root_solve(&p(0.5, 0.0), 1.0).unwrap();
        assert!((r.c - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);
        assert!(double_root_solve(&p(0.5, 0.0), -1.0).is_err());
    }

    #[test]
    fn double_root_for_other_instability_levels() {
        let params = CGLParams::with_trigger(0.7, 0.1, 2.5, -1.0).unwrap();
        let r = double_root_solve(&params, 2.5).unwrap();
        let ls = linear_spreading(&params);
        assert!((r.c - ls.c_lin).abs() < 1e-10);
        assert!((r.lambda.im - ls.omega_lin).abs() < 1e-10);
        assert!((r.nu - ls.nu_lin).norm() < 1e-10);
    }

    #[test]
    fn spatial_root_examples() {
        let (a, b) = spatial_roots(&p(0.0, 0.0), Complex64::new(0.0, 0.0), 2.0, 1.0);
        assert!((a + 1.0).norm() < 1e-7 && (b + 1.0).norm() < 1e-7);
        let (a, b) = spatial_roots(&p(0.0, 0.0), Complex64::new(0.0, 0.0), 3.0, 1.0);
        assert!((a.re - (-3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((b.re - (-3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        let params = p(-0.1, -0.2);
        let w = omega_abs(&params, 1.8).unwrap();
        let (a, b) = spatial_roots(&params, I * w, 1.8, 1.0);
        assert!((a.re - b.re).abs() <= 1e-10);
        assert!(a.im <= b.im);
    }

    #[test]
    fn omega_abs_examples() {
        assert_eq!(omega_abs(&p(0.0, 0.3), 1.3).unwrap(), 0.0);
        let w = omega_abs(&p(-0.1, -0.2), 1.8).unwrap();
        assert!((w - (0.1 - 0.1 * 3.24 / 2.02)).abs() < 1e-15);
        assert!((w + 0.06040).abs() < 1e-5);
        let params = p(-0.1, -0.2);
        let c_lin = linear_spreading(&params).c_lin;
        assert!(matches!(omega_abs(&params, c_lin), Err(Error::NoCrossing { .. })));
        let near = omega_abs(&params, c_lin * (1.0 - 1e-12)).unwrap();
        assert!((near - params.alpha).abs() < 1e-10);
    }

    #[test]
    fn absolute_spectrum_examples() {
        let curve = absolute_spectrum(&p(0.0, 0.0), 2.0, 3.0, 7).unwrap();
        assert!(curve.edge.norm() < 1e-15);
        assert!(curve.points.iter().all(|l| l.im.abs() < 1e-15 && l.re <= 1e-15));
        let params = p(-0.1, -0.2);
        let curve = absolute_spectrum(&params, 1.8, 2.0, 2001).unwrap();
        let w = curve.omega_abs.unwrap();
        assert!((w - omega_abs(&params, 1.8).unwrap()).abs() < 1e-15);
        // The sampled half-line passes through i*omega_abs.
        let s_cross = params.chi_minus - 1.8 * 1.8 / (4.0 * 1.01);
        let on_axis = curve.edge - Complex64::new(1.0, -0.1) * s_cross;
        assert!(on_axis.re.abs() < 1e-14 && (on_axis.im - w).abs() < 1e-14);
        for lam in &curve.points {
            let (a, b) = spatial_roots(&params, *lam, 1.8, 1.0);
            assert!((a.re - b.re).abs() <= 1e-10);
        }
        let c_lin = linear_spreading(&params).c_lin;
        let marginal = absolute_spectrum(&params, c_lin, 1.0, 2).unwrap();
        assert!(marginal.edge.re.abs() < 1e-14 && (marginal.edge.im + 0.1).abs() < 1e-14);
        assert!(absolute_spectrum(&params, 1.8, 1.0, 1).is_err());
    }

    #[test]
    fn nonlinear_dispersion_examples() {
        let params = p(-0.1, -0.2);
        assert_eq!(nonlinear_dispersion(&params, 0.0, 1.3).unwrap(), 0.2);
        let ls = linear_spreading(&params);
        let w = nonlinear_dispersion(&params, k_lin(&params), ls.c_lin).unwrap();
        assert!((w - ls.omega_lin).abs() < 1e-12);
        let eq = p(0.4, 0.4);
        assert!((nonlinear_dispersion(&eq, 0.3, 1.1).unwrap() - (-0.4 - 0.33)).abs() < 1e-15);
        assert!(matches!(nonlinear_dispersion(&params, 1.0, 0.0), Err(Error::InvalidWavenumber(_))));
    }

    #[test]
    fn group_velocity_examples() {
        let params = p(-0.1, -0.2);
        let ls = linear_spreading(&params);
        let vg = group_velocity(&params, k_lin(&params), ls.c_lin).unwrap();
        assert!((vg + 2.0 * 1.04f64.sqrt()).abs() < 1e-12);
        assert!((group_velocity(&params, 0.1, 1.8).unwrap() + 1.82).abs() < 1e-15);
        assert_eq!(group_velocity(&p(0.2, 0.2), 0.5, 1.7).unwrap(), -1.7);
    }

    #[test]
    fn k_lin_examples() {
        let params = p(-0.1, -0.2);
        let printed = -(1.04f64.sqrt() - 1.01f64.sqrt()) / (-0.1);
        assert!((k_lin(&params) - printed).abs() < 1e-14);
        assert!((k_lin(&params) - 0.14816).abs() < 1e-5);
        assert_eq!(k_lin(&p(0.0, 0.0)), 0.0);
        let a = 0.37;
        assert!((k_lin(&p(a, a)) + a / (1.0 + a * a).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn k_from_omega_examples() {
        let params = p(-0.1, -0.2);
        let ls = linear_spreading(&params);
        assert!((k_from_omega(&params, ls.omega_lin, ls.c_lin).unwrap() - k_lin(&params)).abs() < 1e-14);
        let eq = p(0.3, 0.3);
        assert!((k_from_omega(&eq, 0.05, 1.5).unwrap() + (0.3 + 0.05) / 1.5).abs() < 1e-15);
        let w = omega_abs(&params, 1.8).unwrap();
        let k = k_from_omega(&params, w, 1.8).unwrap();
        // Quadratic formula oracle for -0.1 k^2 - 1.8 k + 0.2 - w = 0.
        let oracle = (1.8 - (1.8f64 * 1.8 + 4.0 * 0.1 * (0.2 - w)).sqrt()) / (-0.2);
        assert!((k - oracle).abs() < 1e-14);
        assert!(matches!(k_from_omega(&params, 50.0, 1.8), Err(Error::NoAdmissibleRoot)));
    }

    proptest! {
        #[test]
        fn double_root_matches_closed_form(alpha in -2.0f64..2.0) {
            let params = p(alpha, 0.0);
            let r = double_root_solve(&params, 1.0).unwrap();
            let ls = linear_spreading(&params);
            prop_assert!((r.c - ls.c_lin).abs() <= 1e-10);
            prop_assert!((r.lambda - I * ls.omega_lin).norm() <= 1e-10);
            prop_assert!((r.nu - ls.nu_lin).norm() <= 1e-10);
        }

        #[test]
        fn omega_abs_equalizes_real_parts(alpha in -3.0f64..3.0, frac in 0.0f64..0.999) {
            let params = p(alpha, 0.0);
            let c = frac * linear_spreading(&params).c_lin;
            let w = omega_abs(&params, c).unwrap();
            let (a, b) = spatial_roots(&params, I * w, c, 1.0);
            prop_assert!((a.re - b.re).abs() <= 1e-10);
        }

        #[test]
        fn spatial_roots_solve_quadratic(alpha in -3.0f64..3.0, c in -3.0f64..3.0, lr in -5.0f64..5.0, li in -5.0f64..5.0) {
            let params = p(alpha, 0.0);
            let lam = Complex64::new(lr, li);
            let (a, b) = spatial_roots(&params, lam, c, 1.0);
            for nu in [a, b] {
                let scale = 1.0 + (Complex64::new(1.0, alpha) * nu * nu).norm() + (c * nu).norm() + 1.0 + lam.norm();
                prop_assert!(comoving_dispersion(alpha, c, 1.0, lam, nu).norm() <= 1e-12 * scale);
            }
            prop_assert!(a.re <= b.re + 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn k_lin_reproduces_edge_frequency(alpha in -3.0f64..3.0, gamma in -3.0f64..3.0) {
            let params = p(alpha, gamma);
            let ls = linear_spreading(&params);
            let w = nonlinear_dispersion(&params, k_lin(&params), ls.c_lin).unwrap();
            prop_assert!((w - ls.omega_lin).abs() <= 1e-10);
        }

        #[test]
        fn k_from_omega_inverts_dispersion(alpha in -2.0f64..2.0, gamma in -2.0f64..2.0, c in 0.2f64..3.0, k in -0.95f64..0.95) {
            let params = p(alpha, gamma);
            prop_assume!(group_velocity(&params, k, c).unwrap() < -1e-6);
            let w = nonlinear_dispersion(&params, k, c).unwrap();
            match k_from_omega(&params, w, c) {
                Ok(k2) => prop_assert!((k2 - k).abs() <= 1e-12),
                Err(Error::Ambiguous(k1, k2)) => prop_assert!((k1 - k).abs() <= 1e-12 || (k2 - k).abs() <= 1e-12),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }

        #[test]
        fn k_lin_is_continuous_across_alpha_equals_gamma(alpha in -2.0f64..2.0, eps in 0.0f64..1e-4) {
            let d = (k_lin(&p(alpha, alpha + eps)) - k_lin(&p(alpha, alpha))).abs();
            prop_assert!(d <= 10.0 * eps + 1e-15);
        }
    }
}
