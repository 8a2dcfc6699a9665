//! Shooting along the unstable manifold of the wave train at the linear
//! spreading point, which yields the free-front base point `z_*`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::flow::{ChartIntegrator, ChartState, FlowOptions};
use super::{wave_train_equilibrium, RegionField, SphereState};
use crate::error::{Error, Result};
use crate::scaling::ScaledParams;

/// Settings for [`shoot_free_front`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Launch distance from the wave train, relative to `R_p`.
    pub epsilon_rel: f64,
    /// Maximal integration length before giving up on a branch.
    pub zeta_max: f64,
    /// The trajectory is followed past the event until `R < base_factor·δ`.
    pub base_factor: f64,
    pub flow: FlowOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { epsilon_rel: 1e-6, zeta_max: 200.0, base_factor: 1e-14, flow: FlowOptions::default() }
    }
}

/// A sampled point `(ζ, z, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub zeta: f64,
    pub z: Complex64,
    pub r: f64,
}

/// Result of a free-front shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    /// Base point of the strong-stable fiber through the trajectory at the
    /// event `R = δ`.
    pub z_star: Complex64,
    /// Raw value of `z` at the event.
    pub z_event: Complex64,
    pub delta: f64,
    /// Distance from the launch point to the event.
    pub zeta_event: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    /// `|z_star + 1|`.
    pub genericity: f64,
    pub non_generic: bool,
    pub unstable_eigenvalue: f64,
}

/// The wave train together with its one-dimensional unstable direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstableDirection {
    pub equilibrium: SphereState,
    pub eigenvalue: f64,
    /// Unit eigenvector in `(Re z, Im z, R)`.
    pub vector: [f64; 3],
}

fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let rows = [m.row(0).transpose(), m.row(1).transpose(), m.row(2).transpose()];
    let mut best = Vector3::zeros();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = rows[i].cross(&rows[j]);
        if c.norm() > best.norm() {
            best = c;
        }
    }
    best / best.norm()
}

/// Linearizes `field` at the equilibrium `eq` and returns its unique
/// unstable eigenpair.
pub fn unstable_direction(field: &RegionField, eq: SphereState) -> Result<UnstableDirection> {
    let jac = field.jacobian(eq.z, eq.r);
    let eig = jac.complex_eigenvalues();
    let unstable: Vec<Complex64> = eig.iter().copied().filter(|l| l.re > 0.0).collect();
    if unstable.len() != 1 || unstable[0].im.abs() > 1e-9 * (1.0 + unstable[0].re) {
        return Err(Error::UnstableDimension(unstable.len()));
    }
    let lambda = unstable[0].re;
    let v = null_vector(&(jac - Matrix3::identity() * lambda));
    Ok(UnstableDirection { equilibrium: eq, eigenvalue: lambda, vector: [v[0], v[1], v[2]] })
}

fn point(zeta: f64, s: &ChartState) -> TrajectoryPoint {
    TrajectoryPoint { zeta, z: s.z(), r: s.r() }
}

/// Follows one branch of the unstable manifold until `R = δ`; returns the
/// event data and the trajectory up to it.
fn shoot_branch(field: &RegionField, start: ChartState, delta: f64, opts: &ShootOptions) -> Result<Option<(f64, ChartState, Vec<TrajectoryPoint>)>> {
    let mut it = ChartIntegrator::new(*field, 0.0, start, opts.flow);
    let mut traj = vec![point(0.0, &start)];
    let mut prev_r = start.r();
    while it.advance(opts.zeta_max)? {
        let s = it.state();
        let r = s.r();
        if prev_r >= delta && r < delta {
            let (t, ev) = it.locate(|_, s| s.r() - delta, 1e-13 * delta.clamp(1e-300, 1.0));
            traj.push(point(t, &ev));
            return Ok(Some((t, ev, traj)));
        }
        if !r.is_finite() || r > 1e3 {
            return Ok(None);
        }
        traj.push(point(it.zeta(), &s));
        prev_r = r;
    }
    Ok(None)
}

/// Computes the free-front base point `z_*` at the linear spreading point.
///
/// The branch of the unstable manifold that leaves the wave train towards
/// smaller amplitude is integrated to the event `R = δ`; the trajectory is
/// then followed into the slow decay towards the sphere, where the flow
/// reduces to `w' = 1` for `w = 1/(z+1)`, and the base point of its fiber is
/// projected back to `ζ_event`.
pub fn shoot_free_front(scaled: &ScaledParams, delta: f64, opts: &ShootOptions) -> Result<ShootResult> {
    if scaled.delta_c_hat.abs() > 1e-12 || scaled.omega_hat.abs() > 1e-12 {
        return Err(Error::InvalidParams("free-front shooting requires the linear point (delta_c_hat = omega_hat = 0)".into()));
    }
    let field = RegionField {
        c_hat: scaled.c_hat,
        omega_hat: scaled.omega_hat,
        gamma_hat: scaled.gamma_hat,
        trigger: Complex64::new(0.0, 0.0),
    };
    let eq = wave_train_equilibrium(scaled)?;
    if !(delta > 0.0 && delta < eq.r) {
        return Err(Error::InvalidParams(format!("delta = {delta} must lie in (0, R_p = {})", eq.r)));
    }
    let ud = unstable_direction(&field, eq)?;
    let eps = opts.epsilon_rel * eq.r;
    let first = if ud.vector[2] > 0.0 { -1.0 } else { 1.0 };
    for sign in [first, -first] {
        let v = ud.vector;
        let start = ChartState::regular(eq.z + sign * eps * Complex64::new(v[0], v[1]), eq.r + sign * eps * v[2]);
        let Some((t_ev, ev, mut trajectory)) = shoot_branch(&field, start, delta, opts)? else {
            continue;
        };
        // Follow the decay until the coupling to R is negligible.
        let mut it = ChartIntegrator::new(field, t_ev, ev, opts.flow);
        let target = opts.base_factor * delta;
        while it.state().r() > target {
            if !it.advance(t_ev + opts.zeta_max)? {
                break;
            }
            trajectory.push(point(it.zeta(), &it.state()));
        }
        let end = it.state();
        let w_end = 1.0 / (end.z() + 1.0);
        let w_base = w_end - (it.zeta() - t_ev);
        let z_star = -1.0 + 1.0 / w_base;
        let genericity = (z_star + 1.0).norm();
        return Ok(ShootResult {
            z_star,
            z_event: ev.z(),
            delta,
            zeta_event: t_ev,
            trajectory,
            genericity,
            non_generic: genericity < 1e-3,
            unstable_eigenvalue: ud.eigenvalue,
        });
    }
    Err(Error::WrongBranch { delta, zeta_max: opts.zeta_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::delta_z;
    use crate::dispersion::CGLParams;
    use crate::scaling::linear_point;

    fn linear_scaled(gamma_hat: f64) -> ScaledParams {
        ScaledParams {
            c_hat: 2.0,
            delta_c_hat: 0.0,
            omega_hat: 0.0,
            gamma_hat,
            m: 1.0,
            l: 1.0,
            shift_rate: 0.0,
            zeta_scale: 1.0,
        }
    }

    #[test]
    fn real_equation_gives_real_base_point() {
        let r = shoot_free_front(&linear_scaled(0.0), 1e-3, &ShootOptions::default()).unwrap();
        assert!(r.z_star.im.abs() <= 1e-8);
        assert!(r.genericity > 1e-3 && !r.non_generic);
        assert!((r.trajectory.last().unwrap().r) < 1e-3);
    }

    #[test]
    fn trajectory_decreases_after_event() {
        let r = shoot_free_front(&linear_scaled(0.5), 1e-3, &ShootOptions::default()).unwrap();
        let after: Vec<f64> = r.trajectory.iter().filter(|p| p.zeta >= r.zeta_event).map(|p| p.r).collect();
        assert!(after.len() > 5);
        assert!(after.windows(2).all(|w| w[1] <= w[0]));
        assert!((after[0] - 1e-3).abs() <= 1e-12);
    }

    #[test]
    fn imaginary_part_of_delta_z_is_threshold_independent() {
        let params = CGLParams::new(-0.1, -0.2).unwrap();
        let s = linear_point(&params).unwrap();
        let a = shoot_free_front(&s, 1e-3, &ShootOptions::default()).unwrap();
        let b = shoot_free_front(&s, 5e-4, &ShootOptions::default()).unwrap();
        let (da, db) = (delta_z(&params, a.z_star).unwrap(), delta_z(&params, b.z_star).unwrap());
        assert!((da.im - db.im).abs() <= 1e-4);
        // The raw event value is not shift invariant at this accuracy.
        let raw = |z: Complex64| (1.0 / (z + 1.0)).im;
        assert!((raw(a.z_event) - raw(b.z_event)).abs() > 1e-4);
    }

    #[test]
    fn launch_distance_does_not_matter() {
        let s = linear_scaled(-0.3);
        let a = shoot_free_front(&s, 1e-3, &ShootOptions::default()).unwrap();
        let b = shoot_free_front(&s, 1e-3, &ShootOptions { epsilon_rel: 5e-7, ..Default::default() }).unwrap();
        assert!((a.z_star - b.z_star).norm() <= 1e-6);
    }

    #[test]
    fn requires_linear_point() {
        let mut s = linear_scaled(0.1);
        s.omega_hat = 1e-3;
        assert!(shoot_free_front(&s, 1e-3, &ShootOptions::default()).is_err());
        assert!(shoot_free_front(&linear_scaled(0.1), 2.0, &ShootOptions::default()).is_err());
    }
}
