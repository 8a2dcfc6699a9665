//! Integration of the blown-up field with automatic chart switching, and of
//! the underlying first-order system in `(a, b)`.

use num_complex::Complex64;

use super::{RegionField, VectorFields};
use crate::error::Result;
use crate::ode::{Integrator, OdeOptions};

/// Which chart a [`ChartState`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `(z, R)`.
    Regular,
    /// `(z̃, S) = (1/z, R|z|²)`.
    Inverted,
}

/// A point of phase space in either chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartState {
    pub chart: Chart,
    pub w: Complex64,
    pub v: f64,
}

impl ChartState {
    pub fn regular(z: Complex64, r: f64) -> Self {
        Self { chart: Chart::Regular, w: z, v: r }
    }

    pub fn inverted(zt: Complex64, s: f64) -> Self {
        Self { chart: Chart::Inverted, w: zt, v: s }
    }

    /// Projects a solution `(a, b)` of the first-order system, choosing the
    /// chart in which the projective coordinate is bounded.
    pub fn from_ab(a: Complex64, b: Complex64) -> Self {
        if b.norm() <= a.norm() * 1e3 {
            Self::regular(b / a, a.norm_sqr())
        } else {
            Self::inverted(a / b, b.norm_sqr())
        }
    }

    /// `z`, infinite on the pole of the regular chart.
    pub fn z(&self) -> Complex64 {
        match self.chart {
            Chart::Regular => self.w,
            Chart::Inverted => 1.0 / self.w,
        }
    }

    /// `R = |a|²`.
    pub fn r(&self) -> f64 {
        match self.chart {
            Chart::Regular => self.v,
            Chart::Inverted => self.v * self.w.norm_sqr(),
        }
    }

    /// Homogeneous coordinates `(p, q)` with `z = q/p`.
    pub fn homogeneous(&self) -> (Complex64, Complex64) {
        match self.chart {
            Chart::Regular => (Complex64::new(1.0, 0.0), self.w),
            Chart::Inverted => (self.w, Complex64::new(1.0, 0.0)),
        }
    }

    /// Chordal distance between the projective coordinates of two states.
    pub fn chordal_distance(&self, other: &ChartState) -> f64 {
        let (p1, q1) = self.homogeneous();
        let (p2, q2) = other.homogeneous();
        let n1 = (p1.norm_sqr() + q1.norm_sqr()).sqrt();
        let n2 = (p2.norm_sqr() + q2.norm_sqr()).sqrt();
        (p1 * q2 - q1 * p2).norm() / (n1 * n2)
    }

    /// The same point expressed in `chart`.
    pub fn in_chart(&self, chart: Chart) -> ChartState {
        if chart == self.chart {
            return *self;
        }
        let zt = 1.0 / self.w;
        let v = self.v * self.w.norm_sqr();
        ChartState { chart, w: zt, v }
    }

    fn to_array(self) -> [f64; 3] {
        [self.w.re, self.w.im, self.v]
    }

    fn from_array(chart: Chart, y: &[f64; 3]) -> Self {
        Self { chart, w: Complex64::new(y[0], y[1]), v: y[2] }
    }
}

/// Chart-switching thresholds and integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub ode: OdeOptions,
    /// Switch to the inverted chart when `|z|` exceeds this.
    pub switch_out: f64,
    /// Switch back when `|z|` drops below this.
    pub switch_back: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { ode: OdeOptions::default(), switch_out: 1e3, switch_back: 5e2 }
    }
}

/// A recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub zeta: f64,
    pub state: ChartState,
}

type Rhs = Box<dyn Fn(f64, &[f64; 3]) -> [f64; 3] + Send + Sync>;

fn rhs_for(field: RegionField, chart: Chart) -> Rhs {
    match chart {
        Chart::Regular => Box::new(move |_, y: &[f64; 3]| {
            let (dz, dr) = field.rhs(Complex64::new(y[0], y[1]), y[2]);
            [dz.re, dz.im, dr]
        }),
        Chart::Inverted => Box::new(move |_, y: &[f64; 3]| {
            let (dz, ds) = field.rhs_inverted(Complex64::new(y[0], y[1]), y[2]);
            [dz.re, dz.im, ds]
        }),
    }
}

/// Adaptive integrator for one region that changes chart between steps.
pub struct ChartIntegrator {
    field: RegionField,
    chart: Chart,
    inner: Integrator<Rhs, 3>,
    opts: FlowOptions,
}

impl ChartIntegrator {
    pub fn new(field: RegionField, zeta0: f64, start: ChartState, opts: FlowOptions) -> Self {
        let start = Self::preferred(start, &opts);
        Self {
            field,
            chart: start.chart,
            inner: Integrator::new(rhs_for(field, start.chart), zeta0, start.to_array(), opts.ode),
            opts,
        }
    }

    fn preferred(state: ChartState, opts: &FlowOptions) -> ChartState {
        match state.chart {
            Chart::Regular if state.w.norm() > opts.switch_out => state.in_chart(Chart::Inverted),
            Chart::Inverted if state.w.norm() * opts.switch_back > 1.0 => state.in_chart(Chart::Regular),
            _ => state,
        }
    }

    pub fn zeta(&self) -> f64 {
        self.inner.t
    }

    pub fn state(&self) -> ChartState {
        ChartState::from_array(self.chart, &self.inner.y)
    }

    /// One accepted step towards `limit`; `false` once it has been reached.
    pub fn advance(&mut self, limit: f64) -> Result<bool> {
        let current = self.state();
        let wanted = Self::preferred(current, &self.opts);
        if wanted.chart != self.chart {
            let t = self.inner.t;
            self.chart = wanted.chart;
            let mut ode = self.opts.ode;
            ode.h_init = (self.inner.t - self.inner.previous().0).abs().max(1e-8);
            self.inner = Integrator::new(rhs_for(self.field, self.chart), t, wanted.to_array(), ode);
        }
        self.inner.advance(limit)
    }

    /// Locates a zero of `g` inside the last step (see [`Integrator::locate`]).
    pub fn locate<G>(&self, g: G, tol: f64) -> (f64, ChartState)
    where
        G: Fn(f64, &ChartState) -> f64,
    {
        let chart = self.chart;
        let (t, y) = self.inner.locate(|t, y| g(t, &ChartState::from_array(chart, y)), tol);
        (t, ChartState::from_array(chart, &y))
    }
}

/// Integrates the piecewise field from `zeta0` to `zeta1` (either
/// direction), switching fields at `ζ = 0` and charts as needed. When
/// `samples` is given, every accepted step is recorded.
pub fn flow(
    fields: &VectorFields,
    start: ChartState,
    zeta0: f64,
    zeta1: f64,
    opts: FlowOptions,
    mut samples: Option<&mut Vec<FlowSample>>,
) -> Result<ChartState> {
    let mut breaks = vec![zeta0];
    if (zeta0 < 0.0 && zeta1 > 0.0) || (zeta0 > 0.0 && zeta1 < 0.0) {
        breaks.push(0.0);
    }
    breaks.push(zeta1);
    let mut state = start;
    if let Some(s) = samples.as_deref_mut() {
        s.push(FlowSample { zeta: zeta0, state });
    }
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        if a == b {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut it = ChartIntegrator::new(*fields.at(mid), a, state, opts);
        while it.advance(b)? {
            if let Some(s) = samples.as_deref_mut() {
                s.push(FlowSample { zeta: it.zeta(), state: it.state() });
            }
        }
        state = it.state();
    }
    Ok(state)
}

/// Integrates the first-order system `a' = b`, `b' = −Ca − ĉb + (1+iγ̂)|a|²a`
/// of one region.
pub fn integrate_ab(
    field: &RegionField,
    a0: Complex64,
    b0: Complex64,
    zeta0: f64,
    zeta1: f64,
    opts: OdeOptions,
) -> Result<(Complex64, Complex64)> {
    let f = *field;
    let rhs = move |_: f64, y: &[f64; 4]| {
        let (da, db) = f.rhs_ab(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]));
        [da.re, da.im, db.re, db.im]
    };
    let y = crate::ode::integrate(rhs, zeta0, [a0.re, a0.im, b0.re, b0.im], zeta1, opts)?;
    Ok((Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::derive_vector_fields;
    use crate::dispersion::CGLParams;
    use crate::scaling::to_scaled_with_omega_hat;

    #[test]
    fn chart_conversion_round_trip() {
        let s = ChartState::regular(Complex64::new(3.0, -4.0), 0.2);
        let t = s.in_chart(Chart::Inverted).in_chart(Chart::Regular);
        assert!((t.w - s.w).norm() < 1e-15 && (t.v - s.v).abs() < 1e-15);
        assert!((s.in_chart(Chart::Inverted).r() - 0.2).abs() < 1e-15);
        assert!(s.chordal_distance(&s.in_chart(Chart::Inverted)) < 1e-16);
    }

    #[test]
    fn gauge_rotation_leaves_projection_unchanged() {
        let (a, b) = (Complex64::new(0.3, -0.8), Complex64::new(-1.1, 0.4));
        let rot = Complex64::from_polar(1.0, 0.77);
        let s1 = ChartState::from_ab(a, b);
        let s2 = ChartState::from_ab(rot * a, rot * b);
        assert!((s1.w - s2.w).norm() < 1e-15 && (s1.v - s2.v).abs() < 1e-15);
    }

    #[test]
    fn singular_sphere_is_invariant() {
        let params = CGLParams::new(-0.1, -0.2).unwrap();
        let fields = derive_vector_fields(&to_scaled_with_omega_hat(&params, 1.9, 0.01).unwrap(), &params);
        let end = flow(&fields, ChartState::regular(Complex64::new(0.5, 0.1), 0.0), -3.0, 4.0, FlowOptions::default(), None).unwrap();
        assert_eq!(end.r(), 0.0);
    }

    #[test]
    fn passes_through_infinity_in_inverted_chart() {
        // z' = -(z+1)^2 - 1 on the sphere reaches z = infinity in finite time.
        let field = RegionField { c_hat: 2.0, omega_hat: 0.0, gamma_hat: 0.0, trigger: Complex64::new(-1.0, 0.0) };
        let fields = VectorFields { minus: field, plus: field };
        let mut samples = Vec::new();
        let end = flow(&fields, ChartState::regular(Complex64::new(-1.0, 0.0), 0.0), 0.0, 4.0, FlowOptions::default(), Some(&mut samples)).unwrap();
        assert!(samples.iter().any(|s| s.state.chart == Chart::Inverted));
        // Closed form: ẑ = -tan(ζ) with ẑ(0) = 0.
        let exact = -(4.0f64).tan() - 1.0;
        assert!((end.z() - exact).norm() < 1e-8);
    }
}
