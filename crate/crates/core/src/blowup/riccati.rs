//! Closed-form solution of the sphere Riccati flow `z' = −(z+1)² + μ`.

use num_complex::Complex64;

use super::sphere_mu;
use crate::error::{Error, Result};
use crate::scaling::ScaledParams;

/// `τ(ζ) = tanh(√μ ζ)/√μ`, with its Taylor series near `μζ² = 0`.
fn tau(mu: Complex64, zeta: f64) -> Complex64 {
    let x = mu * zeta * zeta;
    if x.norm() < 1e-3 {
        let series = 1.0 - x / 3.0 + 2.0 * x * x / 15.0 - 17.0 * x * x * x / 315.0 + 62.0 * x * x * x * x / 2835.0;
        return zeta * series;
    }
    let s = mu.sqrt();
    let arg = s * zeta;
    let th = if arg.re.abs() > 20.0 { Complex64::new(arg.re.signum(), 0.0) } else { arg.tanh() };
    th / s
}

/// Homogeneous solution `(num, den)` with `ẑ(ζ) = num/den`, `ẑ = z + 1`;
/// valid on the whole Riemann sphere.
pub fn riccati_projective(z0: Complex64, zeta: f64, mu: Complex64) -> (Complex64, Complex64) {
    let zh = z0 + 1.0;
    let t = tau(mu, zeta);
    (zh + mu * t, 1.0 + zh * t)
}

/// Solves `z' = −(z+1)² + μ` in closed form from `z(0) = z0`.
///
/// Fails with [`Error::PoleOnPath`] when `|z|` becomes unbounded on `[0, ζ]`
/// (the trajectory crosses the pole of the chart).
pub fn riccati_closed_form(z0: Complex64, zeta: f64, mu: Complex64) -> Result<Complex64> {
    const SAMPLES: usize = 2048;
    let scale = 1.0 + (z0 + 1.0).norm() + mu.norm().sqrt();
    let ratio = |t: f64| {
        let (n, d) = riccati_projective(z0, t, mu);
        d.norm() / (n.norm() + d.norm())
    };
    let mut best = (0.0, ratio(0.0));
    for i in 1..=SAMPLES {
        let t = zeta * i as f64 / SAMPLES as f64;
        let r = ratio(t);
        if r < best.1 {
            best = (t, r);
        }
    }
    // Golden-section refinement of the closest approach to the pole.
    let h = zeta.abs() / SAMPLES as f64;
    let (mut a, mut b) = ((best.0 - h).max(zeta.min(0.0)), (best.0 + h).min(zeta.max(0.0)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ratio(c) < ratio(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t_min = 0.5 * (a + b);
    if ratio(t_min).min(best.1) * 1e8 < 1.0 / scale {
        return Err(Error::PoleOnPath(t_min));
    }
    let (n, d) = riccati_projective(z0, zeta, mu);
    Ok(n / d - 1.0)
}

/// Closed-form sphere flow behind the trigger for general `(Δĉ, ω̂)`:
/// the shift `z ↦ z − Δĉ/2` reduces it to [`riccati_closed_form`].
pub fn sphere_closed_form(scaled: &ScaledParams, z0: Complex64, zeta: f64) -> Result<Complex64> {
    let shift = 0.5 * scaled.delta_c_hat;
    Ok(riccati_closed_form(z0 - shift, zeta, sphere_mu(scaled))? + shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_point_and_algebraic_decay() {
        let z = riccati_closed_form(Complex64::new(-1.0, 0.0), 7.3, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(z, Complex64::new(-1.0, 0.0));
        let z = riccati_closed_form(Complex64::new(0.0, 0.0), 1.0, Complex64::new(0.0, 0.0)).unwrap();
        assert!((z + 0.5).norm() < 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        // w = 1/(z+1) = -1 reaches 0 at ζ = 1.
        let r = riccati_closed_form(Complex64::new(-2.0, 0.0), 2.0, Complex64::new(0.0, 0.0));
        match r {
            Err(Error::PoleOnPath(t)) => assert!((t - 1.0).abs() < 1e-6),
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn series_and_hyperbolic_branches_agree() {
        let mu = Complex64::new(1e-4, 2e-4);
        let zeta = (0.999e-3f64 / mu.norm()).sqrt();
        let series = tau(mu, zeta);
        let s = mu.sqrt();
        let direct = (s * zeta).tanh() / s;
        assert!((series - direct).norm() < 1e-14 * zeta);
    }

    #[test]
    fn sphere_closed_form_follows_shifted_equilibria() {
        let s = ScaledParams {
            c_hat: 1.97,
            delta_c_hat: 0.03,
            omega_hat: 0.004,
            gamma_hat: 0.0,
            m: 1.0,
            l: 1.0,
            shift_rate: 0.0,
            zeta_scale: 1.0,
        };
        let (z1, _) = crate::blowup::sphere_equilibria(&s);
        let z = sphere_closed_form(&s, z1, 3.0).unwrap();
        assert!((z - z1).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn satisfies_the_differential_equation(zr in -2.0f64..2.0, zi in -2.0f64..2.0, mr in -1.0f64..1.0, mi in -1.0f64..1.0, zeta in 0.1f64..5.0) {
            let z0 = Complex64::new(zr, zi);
            let mu = Complex64::new(mr, mi);
            let h = 1e-5;
            if let (Ok(zp), Ok(zm), Ok(z)) = (
                riccati_closed_form(z0, zeta + h, mu),
                riccati_closed_form(z0, zeta - h, mu),
                riccati_closed_form(z0, zeta, mu),
            ) {
                prop_assume!(z.norm() < 50.0);
                let dz = (zp - zm) / (2.0 * h);
                let rhs = -(z + 1.0) * (z + 1.0) + mu;
                prop_assert!((dz - rhs).norm() <= 1e-5 * (1.0 + rhs.norm()));
            }
        }
    }
}
