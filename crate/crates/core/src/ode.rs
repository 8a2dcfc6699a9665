//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size real systems.
//!
//! The integrator advances one accepted step at a time so callers can watch
//! for events between steps; [`Integrator::trial`] re-evaluates a single step
//! of arbitrary length from the last accepted point, which is what event
//! bisection uses.

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, h_max: 0.5, h_min: 1e-14, max_steps: 2_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand-Prince step: returns the fifth-order solution, the embedded
/// error estimate and the derivative at the new point.
pub fn dopri_step<F, const N: usize>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &combo(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &combo(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = combo(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err, k7)
}

/// Adaptive integrator state for `y' = f(t, y)`.
pub struct Integrator<F, const N: usize> {
    f: F,
    opts: OdeOptions,
    pub t: f64,
    pub y: [f64; N],
    k: [f64; N],
    h: f64,
    prev_t: f64,
    prev_y: [f64; N],
    prev_k: [f64; N],
    steps: usize,
}

impl<F, const N: usize> Integrator<F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        let k = f(t0, &y0);
        Self { f, opts, t: t0, y: y0, k, h: opts.h_init, prev_t: t0, prev_y: y0, prev_k: k, steps: 0 }
    }

    /// Start of the most recent accepted step.
    pub fn previous(&self) -> (f64, [f64; N]) {
        (self.prev_t, self.prev_y)
    }

    /// Evaluates the right-hand side.
    pub fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.f)(t, y)
    }

    /// Takes one accepted step of signed direction towards `t_limit`, never
    /// stepping past it. Returns `false` once `t_limit` has been reached.
    pub fn advance(&mut self, t_limit: f64) -> Result<bool> {
        let dir = if t_limit >= self.t { 1.0 } else { -1.0 };
        if (t_limit - self.t) * dir <= 0.0 {
            return Ok(false);
        }
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::Integration { t: self.t, reason: "maximum number of steps exceeded".into() });
            }
            let mut h = self.h.abs().min(self.opts.h_max).min((t_limit - self.t).abs());
            let last = h >= (t_limit - self.t).abs();
            h *= dir;
            let (y5, err, k7) = dopri_step(&self.f, self.t, &self.y, &self.k, h);
            let mut norm = 0.0f64;
            let mut finite = true;
            for i in 0..N {
                if !y5[i].is_finite() {
                    finite = false;
                }
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y5[i].abs());
                norm = norm.max((err[i] / sc).abs());
            }
            if finite && norm <= 1.0 {
                self.prev_t = self.t;
                self.prev_y = self.y;
                self.prev_k = self.k;
                self.t = if last { t_limit } else { self.t + h };
                self.y = y5;
                self.k = k7;
                let fac = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    self.h = h.abs() * fac;
                }
                return Ok(true);
            }
            let fac = if finite { (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            self.h = h.abs() * fac;
            if self.h < self.opts.h_min {
                return Err(Error::Integration { t: self.t, reason: format!("step size underflow (h = {:.3e})", self.h) });
            }
        }
    }

    /// Fifth-order solution of a single step of length `h` from the start of
    /// the last accepted step.
    pub fn trial(&self, h: f64) -> [f64; N] {
        dopri_step(&self.f, self.prev_t, &self.prev_y, &self.prev_k, h).0
    }

    /// Replaces the current state, e.g. after locating an event.
    pub fn reset(&mut self, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
        self.k = (self.f)(t, &y);
        self.prev_t = t;
        self.prev_y = y;
        self.prev_k = self.k;
    }

    /// Integrates to `t1`, returning the state there.
    pub fn run_to(&mut self, t1: f64) -> Result<[f64; N]> {
        while self.advance(t1)? {}
        Ok(self.y)
    }

    /// Locates a sign change of `g` inside the last accepted step by
    /// bisection on the step length; returns the event time and state.
    pub fn locate<G>(&self, g: G, tol: f64) -> (f64, [f64; N])
    where
        G: Fn(f64, &[f64; N]) -> f64,
    {
        let h_full = self.t - self.prev_t;
        let g0 = g(self.prev_t, &self.prev_y);
        let (mut lo, mut hi) = (0.0, h_full);
        let mut best = (self.t, self.y);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let ym = self.trial(mid);
            let gm = g(self.prev_t + mid, &ym);
            best = (self.prev_t + mid, ym);
            if gm.abs() <= tol || (hi - lo).abs() < 1e-15 * (1.0 + self.t.abs()) {
                break;
            }
            if gm.signum() == g0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<F, const N: usize>(f: F, t0: f64, y0: [f64; N], t1: f64, opts: OdeOptions) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    Integrator::new(f, t0, y0, opts).run_to(t1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let y = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, OdeOptions::default()).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_backwards_in_time() {
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = integrate(f, 0.0, [1.0, 0.0], -3.0, OdeOptions::default()).unwrap();
        assert!((y[0] - 3.0f64.cos()).abs() < 1e-9);
        assert!((y[1] - 3.0f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn event_location_on_linear_decay() {
        let f = |_: f64, y: &[f64; 1]| [-y[0]];
        let mut it = Integrator::new(f, 0.0, [1.0], OdeOptions::default());
        loop {
            assert!(it.advance(10.0).unwrap());
            if it.y[0] < 0.25 {
                break;
            }
        }
        let (t, y) = it.locate(|_, y| y[0] - 0.25, 1e-14);
        assert!((t - 4.0f64.ln()).abs() < 1e-10);
        assert!((y[0] - 0.25).abs() < 1e-13);
    }
}
