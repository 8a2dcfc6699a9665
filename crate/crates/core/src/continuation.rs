//! Trigger fronts as heteroclinic orbits of the blown-up profile equation,
//! computed by shooting and refined as a truncated boundary-value problem,
//! then continued in the trigger speed `c` with `ω̂` as a free parameter.
//!
//! The collocation works in the Möbius chart `y = 1/(z − p)` with the
//! amplitude carried as `σ = ln(R(1 + |z − p|²))`. Both stay finite when the
//! profile passes through `z = ∞`, as the `j ≥ 2` fronts do. With
//! `D = C − (1+iγ̂)R` and `Q = p² + ĉp + D` the field reads
//!
//! ```text
//! y' = 1 + (2p + ĉ) y + Q y²
//! σ' = −2 Re p − 2ĉ − 2 Re(Q y) + 2 Re(ȳ y')/(1 + |y|²)
//! R  = e^σ |y|²/(1 + |y|²).
//! ```

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::{condition_estimate, BandMatrix};
use crate::blowup::{
    delta_z, derive_vector_fields, shoot_free_front, unstable_direction, wave_train_equilibrium, wave_train_wavenumber, z_plus, RegionField,
    ShootOptions, SphereState, TrajectoryPoint, VectorFields,
};
use crate::dispersion::{k_from_omega, linear_spreading, CGLParams};
use crate::error::{Error, Result};
use crate::ode::{Integrator, OdeOptions};
use crate::scaling::{from_scaled, linear_point, to_scaled_with_omega_hat, wavenumber_from_scaled, ScaledParams};

/// Candidate chart poles; the one farthest from the profile is used.
pub const POLES: [Complex64; 2] = [Complex64 { re: -1.0, im: 2.0 }, Complex64 { re: -1.0, im: -2.0 }];

const STATE: usize = 3;
const VARS: usize = STATE + 1;

/// Maps `(z, R)` to chart coordinates `(Re y, Im y, σ)`.
pub fn to_chart(pole: Complex64, z: Complex64, r: f64) -> [f64; 3] {
    let d = z - pole;
    let y = 1.0 / d;
    [y.re, y.im, r.ln() + (1.0 + d.norm_sqr()).ln()]
}

/// Inverse of [`to_chart`]; `z` is infinite where `y = 0`.
pub fn from_chart(pole: Complex64, x: &[f64; 3]) -> (Complex64, f64) {
    let y = Complex64::new(x[0], x[1]);
    let n = y.norm_sqr();
    let r = x[2].exp() * n / (1.0 + n);
    let z = if n == 0.0 { Complex64::new(f64::INFINITY, 0.0) } else { pole + 1.0 / y };
    (z, r)
}

/// The profile field in chart coordinates.
pub fn chart_rhs(field: &RegionField, pole: Complex64, x: &[f64; 3]) -> [f64; 3] {
    let y = Complex64::new(x[0], x[1]);
    let n = y.norm_sqr();
    let r = x[2].exp() * n / (1.0 + n);
    let d = field.linear_coefficient() - Complex64::new(1.0, field.gamma_hat) * r;
    let q = pole * pole + field.c_hat * pole + d;
    let dy = 1.0 + (2.0 * pole + field.c_hat) * y + q * y * y;
    let ds = -2.0 * pole.re - 2.0 * field.c_hat - 2.0 * (q * y).re + 2.0 * (y.conj() * dy).re / (1.0 + n);
    [dy.re, dy.im, ds]
}

/// Everything the boundary conditions need at one `(c, ω̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub scaled: ScaledParams,
    pub fields: VectorFields,
    pub wave_train: SphereState,
    pub unstable_eigenvalue: f64,
    /// Unit unstable eigenvector in `(Re z, Im z, R)`, oriented towards
    /// decreasing `R`.
    pub unstable_vector: [f64; 3],
    /// Orthonormal basis of the complement of the unstable direction.
    pub complement: [[f64; 3]; 2],
    pub z_plus: Complex64,
}

/// Builds the [`Setup`] for speed `c` and scaled frequency `ω̂`.
pub fn setup(params: &CGLParams, c: f64, omega_hat: f64) -> Result<Setup> {
    let scaled = to_scaled_with_omega_hat(params, c, omega_hat)?;
    let fields = derive_vector_fields(&scaled, params);
    let wave_train = wave_train_equilibrium(&scaled)?;
    let ud = unstable_direction(&fields.minus, wave_train)?;
    let mut v = Vector3::from(ud.vector);
    if v[2] > 0.0 {
        v = -v;
    }
    let axis = (0..3).min_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).expect("three components");
    let mut e = Vector3::zeros();
    e[axis] = 1.0;
    let u1 = (e - v * v.dot(&e)).normalize();
    let u2 = v.cross(&u1);
    Ok(Setup {
        scaled,
        fields,
        wave_train,
        unstable_eigenvalue: ud.eigenvalue,
        unstable_vector: [v[0], v[1], v[2]],
        complement: [[u1[0], u1[1], u1[2]], [u2[0], u2[1], u2[2]]],
        z_plus: z_plus(&scaled, params),
    })
}

/// Collocation mesh containing the trigger position `ζ = 0` as a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BVPMesh {
    pub nodes: Vec<f64>,
}

impl BVPMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("mesh nodes must be strictly increasing, at least three".into()));
        }
        if !nodes.contains(&0.0) || nodes[0] >= 0.0 || *nodes.last().unwrap() <= 0.0 {
            return Err(Error::InvalidParams("mesh must contain 0 as an interior node".into()));
        }
        Ok(Self { nodes })
    }

    /// Piecewise uniform mesh on `[left, right]` with spacing at most `h` on
    /// each side of 0.
    pub fn uniform(left: f64, right: f64, h: f64) -> Result<Self> {
        if !(left < 0.0 && right > 0.0 && h > 0.0) {
            return Err(Error::InvalidParams(format!("bad mesh request [{left}, {right}] with h = {h}")));
        }
        let nl = (-left / h).ceil() as usize;
        let nr = (right / h).ceil() as usize;
        let mut nodes: Vec<f64> = (0..nl).map(|i| left * (1.0 - i as f64 / nl as f64)).collect();
        nodes.extend((0..=nr).map(|i| right * i as f64 / nr as f64));
        Self::new(nodes)
    }

    /// Bisects every interval.
    pub fn refine(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A discrete profile with its frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BVPSolution {
    pub c: f64,
    pub omega_hat: f64,
    pub pole: Complex64,
    pub mesh: BVPMesh,
    /// Chart coordinates `(Re y, Im y, σ)` at each node.
    pub states: Vec<[f64; 3]>,
}

impl BVPSolution {
    /// `(ζ, z, R)` at every node.
    pub fn profile(&self) -> Vec<TrajectoryPoint> {
        self.mesh
            .nodes
            .iter()
            .zip(&self.states)
            .map(|(&zeta, x)| {
                let (z, r) = from_chart(self.pole, x);
                TrajectoryPoint { zeta, z, r }
            })
            .collect()
    }

    /// Unscaled `(ξ, |A|)` at every node.
    pub fn amplitude_profile(&self, params: &CGLParams) -> Result<Vec<(f64, f64)>> {
        let s = to_scaled_with_omega_hat(params, self.c, self.omega_hat)?;
        Ok(self.profile().iter().map(|p| (p.zeta / s.zeta_scale, p.r.sqrt() / s.l)).collect())
    }

    fn unknowns(&self) -> Vec<f64> {
        self.states.iter().flat_map(|x| [x[0], x[1], x[2], self.omega_hat]).collect()
    }
}

/// Convergence controls for [`newton_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 30, min_damping: 1.0 / 1024.0 }
    }
}

/// Outcome of a converged Newton solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm of the final residual.
    pub residual: f64,
    /// Estimated 1-norm condition number of the final Jacobian.
    pub condition_number: f64,
}

struct Problem<'a> {
    params: &'a CGLParams,
    c: f64,
    pole: Complex64,
    nodes: &'a [f64],
}

impl Problem<'_> {
    fn fields(&self, omega_hat: f64) -> Result<VectorFields> {
        let s = to_scaled_with_omega_hat(self.params, self.c, omega_hat)?;
        Ok(derive_vector_fields(&s, self.params))
    }

    fn left(&self, u: &[f64]) -> Result<[f64; 2]> {
        let st = setup(self.params, self.c, u[3])?;
        let (z, r) = from_chart(self.pole, &[u[0], u[1], u[2]]);
        let d = [z.re - st.wave_train.z.re, z.im - st.wave_train.z.im, r - st.wave_train.r];
        let dot = |b: &[f64; 3]| b[0] * d[0] + b[1] * d[1] + b[2] * d[2];
        Ok([dot(&st.complement[0]), dot(&st.complement[1])])
    }

    fn right(&self, u: &[f64]) -> Result<[f64; 2]> {
        let s = to_scaled_with_omega_hat(self.params, self.c, u[3])?;
        let target = 1.0 / (z_plus(&s, self.params) - self.pole);
        Ok([u[0] - target.re, u[1] - target.im])
    }

    /// Hermite–Simpson defect of interval `i` from the eight unknowns of its
    /// two end nodes.
    fn interval(&self, i: usize, u: &[f64]) -> Result<[f64; 4]> {
        let fields = self.fields(u[3])?;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let field = if b <= 0.0 { &fields.minus } else { &fields.plus };
        let h = b - a;
        let xa = [u[0], u[1], u[2]];
        let xb = [u[4], u[5], u[6]];
        let fa = chart_rhs(field, self.pole, &xa);
        let fb = chart_rhs(field, self.pole, &xb);
        let xm: [f64; 3] = std::array::from_fn(|k| 0.5 * (xa[k] + xb[k]) + h / 8.0 * (fa[k] - fb[k]));
        let fm = chart_rhs(field, self.pole, &xm);
        let mut out = [0.0; 4];
        for k in 0..STATE {
            out[k] = xb[k] - xa[k] - h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]);
        }
        out[3] = u[7] - u[3];
        Ok(out)
    }

    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.nodes.len();
        let mut r = Vec::with_capacity(VARS * n);
        r.extend(self.left(&u[..VARS])?);
        for i in 0..n - 1 {
            r.extend(self.interval(i, &u[VARS * i..VARS * (i + 2)])?);
        }
        r.extend(self.right(&u[VARS * (n - 1)..])?);
        Ok(r)
    }

    fn jacobian(&self, u: &[f64]) -> Result<BandMatrix> {
        let n = self.nodes.len();
        let mut jac = BandMatrix::zeros(VARS * n, 5, 5);
        let step = |v: f64, k: usize| if k % VARS == 3 { 1e-7 * (1.0 + v.abs()) } else { 1e-6 * (1.0 + v.abs()) };
        let mut fill = |row0: usize, col0: usize, width: usize, f: &dyn Fn(&[f64]) -> Result<Vec<f64>>| -> Result<()> {
            let mut w = u[col0..col0 + width].to_vec();
            for k in 0..width {
                let orig = w[k];
                let h = step(orig, k);
                w[k] = orig + h;
                let fp = f(&w)?;
                w[k] = orig - h;
                let fm = f(&w)?;
                w[k] = orig;
                for (r, (a, b)) in fp.iter().zip(&fm).enumerate() {
                    jac.set(row0 + r, col0 + k, (a - b) / (2.0 * h));
                }
            }
            Ok(())
        };
        fill(0, 0, VARS, &|w| self.left(w).map(|r| r.to_vec()))?;
        for i in 0..n - 1 {
            fill(2 + VARS * i, VARS * i, 2 * VARS, &|w| self.interval(i, w).map(|r| r.to_vec()))?;
        }
        fill(VARS * n - 2, VARS * (n - 1), VARS, &|w| self.right(w).map(|r| r.to_vec()))?;
        Ok(jac)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn problem<'a>(sol: &'a BVPSolution, params: &'a CGLParams) -> Problem<'a> {
    Problem { params, c: sol.c, pole: sol.pole, nodes: &sol.mesh.nodes }
}

/// Full residual: two left projection conditions, four rows per interval
/// (three collocation defects and `ω̂` continuity), two right conditions.
pub fn assemble_residual(sol: &BVPSolution, params: &CGLParams) -> Result<Vec<f64>> {
    problem(sol, params).residual(&sol.unknowns())
}

/// Condition estimate of the collocation Jacobian at `sol`.
pub fn jacobian_condition(sol: &BVPSolution, params: &CGLParams) -> Result<f64> {
    Ok(condition_estimate(&problem(sol, params).jacobian(&sol.unknowns())?))
}

/// Damped Newton iteration on the collocation system.
pub fn newton_solve(initial: &BVPSolution, params: &CGLParams, opts: &NewtonOptions) -> Result<(BVPSolution, NewtonReport)> {
    let pb = problem(initial, params);
    let mut u = initial.unknowns();
    let mut r = pb.residual(&u)?;
    let mut norm = max_norm(&r);
    let mut iterations = 0;
    while !(norm <= opts.tol) {
        if iterations >= opts.max_iter || !norm.is_finite() {
            return Err(Error::NonConvergence { residual: norm, iterations });
        }
        iterations += 1;
        let lu = pb.jacobian(&u)?.lu()?;
        let mut du: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve(&mut du);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + lambda * b).collect();
            if let Ok(rt) = pb.residual(&trial) {
                let nt = max_norm(&rt);
                if nt < norm || nt <= opts.tol {
                    u = trial;
                    r = rt;
                    norm = nt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < opts.min_damping {
                return Err(Error::NewtonDiverged { reason: "no decrease along the Newton direction".into(), residual: norm, iterations });
            }
        }
    }
    let condition_number = condition_estimate(&pb.jacobian(&u)?);
    let sol = BVPSolution {
        c: initial.c,
        omega_hat: u[3],
        pole: initial.pole,
        mesh: initial.mesh.clone(),
        states: u.chunks(VARS).map(|w| [w[0], w[1], w[2]]).collect(),
    };
    Ok((sol, NewtonReport { iterations, residual: norm, condition_number }))
}

/// Controls for [`shoot_trigger_front`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotOptions {
    /// Launch distance from the wave train relative to `R_p`.
    pub epsilon_rel: f64,
    pub tol: f64,
    /// A shot whose line search stalls is still accepted below this residual;
    /// the collocation solve that follows supplies the certificate.
    pub stall_tol: f64,
    pub max_iter: usize,
    pub ode: OdeOptions,
}

impl Default for ShotOptions {
    fn default() -> Self {
        Self { epsilon_rel: 1e-6, tol: 1e-9, stall_tol: 1e-6, max_iter: 40, ode: OdeOptions { rtol: 1e-11, atol: 1e-13, ..OdeOptions::default() } }
    }
}

/// A converged trigger-front shot: launch on the unstable manifold at
/// `ζ = −t_flight` and reach `z₊` exactly at the trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerShot {
    pub c: f64,
    pub t_flight: f64,
    pub omega_hat: f64,
    pub pole: Complex64,
    /// Max-norm of `y(0) − y₊`.
    pub residual: f64,
    pub iterations: usize,
    /// Smallest `|z − p|` along the trajectory.
    pub pole_distance: f64,
}

fn launch(st: &Setup, pole: Complex64, eps: f64) -> [f64; 3] {
    let v = st.unstable_vector;
    let z = st.wave_train.z + eps * Complex64::new(v[0], v[1]);
    to_chart(pole, z, st.wave_train.r + eps * v[2])
}

/// Integrates the shot; returns the end state, `max |y|`, and the states at
/// the requested (increasing) flight times.
fn fly(params: &CGLParams, c: f64, pole: Complex64, t_flight: f64, omega_hat: f64, opts: &ShotOptions, samples: &[f64]) -> Result<([f64; 3], f64, Vec<[f64; 3]>)> {
    let st = setup(params, c, omega_hat)?;
    let field = st.fields.minus;
    let x0 = launch(&st, pole, opts.epsilon_rel * st.wave_train.r);
    let mut it = Integrator::new(move |_, x: &[f64; 3]| chart_rhs(&field, pole, x), 0.0, x0, opts.ode);
    let mut ymax = x0[0].hypot(x0[1]);
    let mut out = Vec::with_capacity(samples.len());
    for &t in samples.iter().chain(std::iter::once(&t_flight)) {
        let t = t.min(t_flight);
        while it.advance(t)? {
            ymax = ymax.max(it.y[0].hypot(it.y[1]));
        }
        out.push(it.y);
    }
    let end = out.pop().expect("end state");
    Ok((end, ymax, out))
}

fn shot_residual(params: &CGLParams, c: f64, pole: Complex64, t: f64, w: f64, opts: &ShotOptions) -> Result<(Vector2<f64>, f64)> {
    let (end, ymax, _) = fly(params, c, pole, t, w, opts, &[])?;
    let s = to_scaled_with_omega_hat(params, c, w)?;
    let target = 1.0 / (z_plus(&s, params) - pole);
    Ok((Vector2::new(end[0] - target.re, end[1] - target.im), ymax))
}

fn shoot_with_pole(params: &CGLParams, c: f64, guess: (f64, f64), pole: Complex64, opts: &ShotOptions) -> Result<TriggerShot> {
    let (mut t, mut w) = guess;
    let (mut r, mut ymax) = shot_residual(params, c, pole, t, w, opts)?;
    let mut iterations = 0;
    while r.amax() > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence { residual: r.amax(), iterations });
        }
        iterations += 1;
        let (ht, hw) = (1e-6 * t.abs().max(1.0), 1e-9 * w.abs().max(1e-3));
        let d = |dt: f64, dw: f64| shot_residual(params, c, pole, t + dt, w + dw, opts).map(|x| x.0);
        let col_t = (d(ht, 0.0)? - d(-ht, 0.0)?) / (2.0 * ht);
        let col_w = (d(0.0, hw)? - d(0.0, -hw)?) / (2.0 * hw);
        let jac = Matrix2::from_columns(&[col_t, col_w]);
        let step = jac.lu().solve(&(-r)).ok_or(Error::Singular)?;
        let mut lambda = 1.0;
        loop {
            let (tn, wn) = (t + lambda * step[0], w + lambda * step[1]);
            if tn > 0.0 {
                if let Ok((rn, yn)) = shot_residual(params, c, pole, tn, wn, opts) {
                    if rn.amax() < r.amax() {
                        (t, w, r, ymax) = (tn, wn, rn, yn);
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1.0 / 1024.0 {
                if r.amax() <= opts.stall_tol {
                    return Ok(TriggerShot { c, t_flight: t, omega_hat: w, pole, residual: r.amax(), iterations, pole_distance: 1.0 / ymax });
                }
                return Err(Error::NewtonDiverged { reason: "shooting residual does not decrease".into(), residual: r.amax(), iterations });
            }
        }
    }
    Ok(TriggerShot { c, t_flight: t, omega_hat: w, pole, residual: r.amax(), iterations, pole_distance: 1.0 / ymax })
}

/// Solves for the flight time and `ω̂` of the trigger front from `guess =
/// (t_flight, ω̂)`, trying the chart poles in turn until the trajectory stays
/// clear of the pole.
pub fn shoot_trigger_front(params: &CGLParams, c: f64, guess: (f64, f64), opts: &ShotOptions) -> Result<TriggerShot> {
    let mut last = None;
    let mut best: Option<TriggerShot> = None;
    for pole in POLES {
        match shoot_with_pole(params, c, guess, pole, opts) {
            Ok(s) if s.pole_distance >= 0.5 => return Ok(s),
            Ok(s) => {
                if best.map_or(true, |b| s.pole_distance > b.pole_distance) {
                    best = Some(s);
                }
            }
            Err(e) => last = Some(e),
        }
    }
    best.ok_or_else(|| last.expect("at least one pole tried"))
}

/// Mesh and truncation settings for the collocation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Node spacing.
    pub h: f64,
    /// Left end at `−t_flight − left_margin/λ_u`.
    pub left_margin: f64,
    pub right: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { h: 0.05, left_margin: 5.0, right: 10.0 }
    }
}

/// Samples a converged shot onto a collocation mesh: the linearized
/// unstable manifold left of the launch point, the shot itself up to the
/// trigger, and the decaying `z₊` state ahead of it.
pub fn initial_solution(params: &CGLParams, shot: &TriggerShot, mesh: &BVPMesh, opts: &ShotOptions) -> Result<BVPSolution> {
    let st = setup(params, shot.c, shot.omega_hat)?;
    let t = shot.t_flight;
    let eps = opts.epsilon_rel * st.wave_train.r;
    let inside: Vec<f64> = mesh.nodes.iter().filter(|&&z| z > -t && z <= 0.0).map(|&z| z + t).collect();
    let (_, _, flown) = fly(params, shot.c, shot.pole, t, shot.omega_hat, opts, &inside)?;
    let mut flown = flown.into_iter();
    let mut r0 = 0.0;
    let mut states = Vec::with_capacity(mesh.len());
    for &zeta in &mesh.nodes {
        let x = if zeta <= -t {
            let a = eps * (st.unstable_eigenvalue * (zeta + t)).exp();
            let v = st.unstable_vector;
            to_chart(shot.pole, st.wave_train.z + a * Complex64::new(v[0], v[1]), st.wave_train.r + a * v[2])
        } else if zeta <= 0.0 {
            let x = flown.next().expect("one sample per node");
            r0 = from_chart(shot.pole, &x).1;
            x
        } else {
            let r = r0 * (2.0 * st.z_plus.re * zeta).exp();
            to_chart(shot.pole, st.z_plus, r)
        };
        states.push(x);
    }
    Ok(BVPSolution { c: shot.c, omega_hat: shot.omega_hat, pole: shot.pole, mesh: mesh.clone(), states })
}

/// Mesh adapted to a shot.
pub fn mesh_for(params: &CGLParams, shot: &TriggerShot, opts: &MeshOptions) -> Result<BVPMesh> {
    let st = setup(params, shot.c, shot.omega_hat)?;
    BVPMesh::uniform(-shot.t_flight - opts.left_margin / st.unstable_eigenvalue, opts.right, opts.h)
}

/// Rightmost position where `|A| ≥ δ`, returned as the distance behind the
/// trigger in the unscaled frame (negative once the interface has moved
/// ahead of it); linear interpolation in `ln R`.
pub fn interface_distance(sol: &BVPSolution, params: &CGLParams, delta: f64) -> Result<f64> {
    let s = to_scaled_with_omega_hat(params, sol.c, sol.omega_hat)?;
    let threshold = (s.l * delta).powi(2).ln();
    let prof = sol.profile();
    for w in prof.windows(2).rev() {
        let (a, b) = (&w[0], &w[1]);
        let (la, lb) = (a.r.ln(), b.r.ln());
        if la >= threshold && lb < threshold {
            let zeta = a.zeta + (threshold - la) / (lb - la) * (b.zeta - a.zeta);
            return Ok(-zeta / s.zeta_scale);
        }
    }
    Err(Error::NoInterface(delta))
}

/// Starting guess `(t_flight, ω̂)` from the free-front asymptotics: the
/// launch-to-threshold length of the free front, `πj/√Δĉ` on the sphere and
/// the projective offset `ΔZ_r`; `ω̂ = 2|ΔZ_i|Δĉ^{3/2}/(πj)`.
pub fn asymptotic_guess(params: &CGLParams, c: f64, j: u32, opts: &ShotOptions) -> Result<(f64, f64)> {
    let lp = linear_point(params)?;
    let delta = 1e-3;
    let free = shoot_free_front(&lp, delta, &ShootOptions { epsilon_rel: opts.epsilon_rel, ..ShootOptions::default() })?;
    let dz = delta_z(params, free.z_star)?;
    let s = to_scaled_with_omega_hat(params, c, 0.0)?;
    if s.delta_c_hat <= 0.0 {
        return Err(Error::SpeedTooLarge { c, c_lin: linear_spreading(params).c_lin });
    }
    let j = j as f64;
    let pi = std::f64::consts::PI;
    let t = free.zeta_event + pi * j / s.delta_c_hat.sqrt() + dz.re;
    let w = 2.0 * dz.im.abs() * s.delta_c_hat.powf(1.5) / (pi * j);
    Ok((t, w))
}

/// Settings for [`solve_point`] and [`continue_in_c`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Number of zero passages on the sphere (front index).
    pub j: u32,
    /// Interface threshold on `|A|`.
    pub delta: f64,
    pub spacing: Spacing,
    /// Maximal number of step halvings between two requested speeds.
    pub max_halvings: usize,
    pub keep_profiles: bool,
    pub shot: ShotOptions,
    pub mesh: MeshOptions,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            j: 1,
            delta: 0.1,
            spacing: Spacing::LogGap,
            max_halvings: 6,
            keep_profiles: false,
            shot: ShotOptions::default(),
            mesh: MeshOptions::default(),
            newton: NewtonOptions::default(),
        }
    }
}

/// Placement of the requested speeds between `c_start` and `c_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    Linear,
    /// Uniform in `ln(c_lin − c)`.
    LogGap,
}

/// One converged point of a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub c: f64,
    pub delta_c: f64,
    pub delta_c_hat: f64,
    pub omega_hat: f64,
    pub omega_tf: f64,
    pub k_tf: f64,
    /// `k` recovered from `ω_tf` through the nonlinear dispersion relation.
    pub k_dispersion: f64,
    pub xi_star: f64,
    pub t_flight: f64,
    pub residual: f64,
    pub condition_number: f64,
    pub newton_iterations: usize,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<BVPSolution>,
}

/// A continuation branch in `c`, ordered as computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub params: CGLParams,
    pub j: u32,
    pub points: Vec<BranchPoint>,
    /// Why the march stopped before `c_end`, if it did.
    pub stopped: Option<String>,
}

impl Branch {
    /// The computed point closest in `c`.
    pub fn nearest(&self, c: f64) -> Option<&BranchPoint> {
        self.points.iter().min_by(|a, b| (a.c - c).abs().total_cmp(&(b.c - c).abs()))
    }

    /// Solves at an arbitrary speed, seeded from the nearest computed point.
    pub fn solve_at(&self, c: f64, opts: &ContinuationOptions) -> Result<BranchPoint> {
        let near = self.nearest(c).ok_or_else(|| Error::InvalidParams("empty branch".into()))?;
        let guess = predict(&self.params, c, self.j, opts.spacing, linear_spreading(&self.params).c_lin, std::slice::from_ref(near))?;
        solve_point(&self.params, c, guess, opts)
    }
}

/// Shoots from `guess`, refines by collocation and extracts the observables.
pub fn solve_point(params: &CGLParams, c: f64, guess: (f64, f64), opts: &ContinuationOptions) -> Result<BranchPoint> {
    let shot = shoot_trigger_front(params, c, guess, &opts.shot)?;
    let mesh = mesh_for(params, &shot, &opts.mesh)?;
    let init = initial_solution(params, &shot, &mesh, &opts.shot)?;
    let (sol, report) = newton_solve(&init, params, &opts.newton)?;
    let s = to_scaled_with_omega_hat(params, c, sol.omega_hat)?;
    let (_, omega_tf) = from_scaled(params, &s);
    let k_tf = wavenumber_from_scaled(params, &s, wave_train_wavenumber(&s)?);
    Ok(BranchPoint {
        c,
        delta_c: linear_spreading(params).c_lin - c,
        delta_c_hat: s.delta_c_hat,
        omega_hat: sol.omega_hat,
        omega_tf,
        k_tf,
        k_dispersion: k_from_omega(params, omega_tf, c)?,
        xi_star: interface_distance(&sol, params, opts.delta)?,
        t_flight: shot.t_flight,
        residual: report.residual,
        condition_number: report.condition_number,
        newton_iterations: report.iterations,
        nodes: sol.mesh.len(),
        profile: opts.keep_profiles.then_some(sol),
    })
}

fn march_variable(spacing: Spacing, c_lin: f64, c: f64) -> f64 {
    match spacing {
        Spacing::Linear => c,
        Spacing::LogGap => (c_lin - c).ln(),
    }
}

fn speed_of(spacing: Spacing, c_lin: f64, s: f64) -> f64 {
    match spacing {
        Spacing::Linear => s,
        Spacing::LogGap => c_lin - s.exp(),
    }
}

/// Predicted `(t_flight, ω̂)` at `c` from the accepted points: secant in the
/// march variable on `(t, ln ω̂)` when two are available, otherwise the
/// asymptotic scaling `t ∼ π j/√Δĉ`, `ω̂ ∼ Δĉ^{3/2}`.
fn predict(params: &CGLParams, c: f64, j: u32, spacing: Spacing, c_lin: f64, done: &[BranchPoint]) -> Result<(f64, f64)> {
    let last = done.last().expect("at least one point");
    let dc_hat = to_scaled_with_omega_hat(params, c, last.omega_hat)?.delta_c_hat;
    if done.len() >= 2 && done.iter().rev().take(2).all(|p| p.omega_hat > 0.0) {
        let prev = &done[done.len() - 2];
        let (s0, s1, s) = (march_variable(spacing, c_lin, prev.c), march_variable(spacing, c_lin, last.c), march_variable(spacing, c_lin, c));
        let f = (s - s1) / (s1 - s0);
        let t = last.t_flight + f * (last.t_flight - prev.t_flight);
        let w = (last.omega_hat.ln() + f * (last.omega_hat.ln() - prev.omega_hat.ln())).exp();
        return Ok((t, w));
    }
    let pi = std::f64::consts::PI;
    let t = last.t_flight + pi * j as f64 * (1.0 / dc_hat.sqrt() - 1.0 / last.delta_c_hat.sqrt());
    let w = last.omega_hat * (dc_hat / last.delta_c_hat).powf(1.5);
    Ok((t, w))
}

/// Smallest gap at which the first point is ramped in when the asymptotic
/// guess fails at the requested starting speed.
const ANCHOR_GAP: f64 = 0.01;

/// Solves the first point of a branch, falling back to a log-gap ramp from
/// `c_lin − ANCHOR_GAP` when the asymptotic guess is too far off.
fn anchor(params: &CGLParams, c: f64, c_lin: f64, opts: &ContinuationOptions) -> Result<BranchPoint> {
    let direct = asymptotic_guess(params, c, opts.j, &opts.shot).and_then(|g| solve_point(params, c, g, opts));
    let gap = c_lin - c;
    match direct {
        Ok(p) => Ok(p),
        Err(e) if gap <= 1.5 * ANCHOR_GAP => Err(Error::StepFailure { c, reason: e.to_string() }),
        Err(_) => {
            let steps = ((gap / ANCHOR_GAP).ln() / 0.25f64.ln_1p()).ceil() as usize + 1;
            let ramp = continue_in_c(params, c_lin - ANCHOR_GAP, c, steps.max(2), &ContinuationOptions { spacing: Spacing::LogGap, ..*opts })?;
            match ramp.stopped {
                Some(reason) => Err(Error::StepFailure { c, reason }),
                None => Ok(ramp.points.into_iter().last().expect("ramp has points")),
            }
        }
    }
}

/// Marches from `c_start` to `c_end` through `points` requested speeds.
///
/// The first point is seeded from [`asymptotic_guess`], or ramped in from a
/// small gap when that guess fails; later points from
/// the accepted ones. A failed step is retried at the midpoint of the march
/// variable, up to `max_halvings` times; if that still fails the branch is
/// returned with the points computed so far and `stopped` set.
pub fn continue_in_c(params: &CGLParams, c_start: f64, c_end: f64, points: usize, opts: &ContinuationOptions) -> Result<Branch> {
    params.validate()?;
    if 1.0 + params.alpha * params.gamma <= 0.0 {
        return Err(Error::BranchLeftDomain(format!("1 + alpha*gamma = {} <= 0", 1.0 + params.alpha * params.gamma)));
    }
    if points < 2 || c_start == c_end {
        return Err(Error::InvalidParams("a branch needs at least two distinct speeds".into()));
    }
    let c_lin = linear_spreading(params).c_lin;
    if c_start >= c_lin || c_end >= c_lin || c_start.min(c_end) <= 0.0 {
        return Err(Error::SpeedTooLarge { c: c_start.max(c_end), c_lin });
    }
    let sp = opts.spacing;
    let (s_a, s_b) = (march_variable(sp, c_lin, c_start), march_variable(sp, c_lin, c_end));
    let targets: Vec<f64> = (1..points).map(|i| s_a + (s_b - s_a) * i as f64 / (points - 1) as f64).collect();

    let first = anchor(params, c_start, c_lin, opts)?;
    let mut done = vec![first];
    let mut stopped = None;
    let mut s_now = s_a;
    'targets: for &target in &targets {
        let mut halvings: usize = 0;
        while s_now != target {
            let mut s_try = target;
            for _ in 0..halvings {
                s_try = 0.5 * (s_now + s_try);
            }
            let c = speed_of(sp, c_lin, s_try);
            let attempt = predict(params, c, opts.j, sp, c_lin, &done).and_then(|g| solve_point(params, c, g, opts));
            match attempt {
                Ok(p) => {
                    done.push(p);
                    s_now = s_try;
                    halvings = halvings.saturating_sub(1);
                }
                Err(e) => {
                    halvings += 1;
                    if halvings > opts.max_halvings {
                        stopped = Some(Error::StepFailure { c, reason: e.to_string() }.to_string());
                        break 'targets;
                    }
                }
            }
        }
    }
    Ok(Branch { params: *params, j: opts.j, points: done, stopped })
}
