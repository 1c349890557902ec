//! Radial shooting from the origin in logarithmic radius.
//!
//! With `t = log r` and `w = r u'(r)` the radial equation
//! `u'' + u'/r + K(r) e^{2u} = 0` becomes the non-singular system
//!
//! ```text
//!     du/dt = w,    dw/dt = -r² K(r) e^{2u}
//! ```
//!
//! which is advanced together with the running integrals
//! `vol = 2π ∫ e^{2u} s ds` and `pw = 2π ∫ s^p e^{2u} s ds`
//! (both carrying the `e^{-s²}` damping for the regularized kind).
//! The origin is only entered through a two-term series.

use std::f64::consts::{LN_10, PI};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CurvatureSpec;
use crate::ode::{Dopri5, StepError};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound for the series start radius; the actual start is shrunk
    /// further when `u(0)` is large.
    pub r_start: f64,
    pub r_max: f64,
    pub u_floor: f64,
    /// Decades of `r` over which the extrapolated `Λ` must stay within `stab_tol`.
    pub stabilization_window: f64,
    pub stab_tol: f64,
    /// Integration always continues at least to this radius.
    pub r_settle: f64,
    /// Largest step in `t = log r`.
    pub max_step: f64,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        IntegratorControls {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_start: 1e-3,
            r_max: 1e30,
            u_floor: -60.0,
            stabilization_window: 1.0,
            stab_tol: 1e-9,
            r_settle: 1e8,
            max_step: 0.1,
        }
    }
}

impl IntegratorControls {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidControls(msg));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad(format!("tolerances must be positive ({}, {})", self.rel_tol, self.abs_tol));
        }
        if !(self.r_start > 0.0 && self.r_start < 1.0) {
            return bad(format!("r_start must lie in (0, 1), got {}", self.r_start));
        }
        if !(self.r_max > 1.0) || !self.r_max.is_finite() {
            return bad(format!("r_max must be finite and > 1, got {}", self.r_max));
        }
        if !(self.r_settle > 0.0 && self.r_settle <= self.r_max) {
            return bad(format!("r_settle must lie in (0, r_max], got {}", self.r_settle));
        }
        if !(self.stabilization_window > 0.0 && self.stab_tol > 0.0) {
            return bad("stabilization window and tolerance must be positive".into());
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        if !self.u_floor.is_finite() {
            return bad("u_floor must be finite".into());
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxRadius,
    Diverged,
    StepFailure,
    GrowthGuard,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// One stored point of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub r: f64,
    pub u: f64,
    /// `r u'(r)`.
    pub w: f64,
    /// Local total curvature `-2π w`.
    pub lam: f64,
    pub vol: f64,
    pub pw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub spec: CurvatureSpec,
    pub u0: f64,
    pub controls: IntegratorControls,
    pub nodes: Vec<Node>,
    pub status: Status,
    /// Extrapolated total curvature, present only when converged.
    pub lambda_hat: Option<f64>,
    /// `d/dt` of (u, w, vol, pw) at each node, used by the Hermite interpolant.
    slopes: Vec<[f64; 4]>,
    /// Whether the nodes solve the equation, so that `d²w/dt²` can be taken
    /// from the right-hand side.
    on_shell: bool,
}

/// Right-hand side of the log-radius system for state `(u, w, vol, pw)`.
pub(crate) fn rhs(spec: &CurvatureSpec, t: f64, y: &[f64; 4]) -> [f64; 4] {
    let r = t.exp();
    let log_density = 2.0 * y[0] + 2.0 * t + spec.log_damping(r);
    let ey = log_density.exp();
    let (dw, dp) = match *spec {
        CurvatureSpec::SignChangingPower { p } => {
            let ez = (log_density + p * t).exp();
            (ez - ey, TWO_PI * ez)
        }
        CurvatureSpec::RegularizedPower { p, lambda } => {
            let ez = (log_density + p * t).exp();
            (ez - lambda * ey, TWO_PI * ez)
        }
        CurvatureSpec::Constant { k0 } => (-k0 * ey, 0.0),
    };
    [y[1], dw, TWO_PI * ey, dp]
}

/// Coefficient of the first neglected (`r⁴`) term of the series at the origin.
fn series_remainder_coefficient(spec: &CurvatureSpec, u0: f64) -> f64 {
    let k0 = spec.central_value();
    let e2 = (2.0 * u0).exp();
    let damping = match *spec {
        CurvatureSpec::RegularizedPower { lambda, .. } => lambda * e2 / 16.0,
        _ => 0.0,
    };
    (k0 * k0 * e2 * e2 / 32.0).abs() + damping.abs()
}

/// Two-term expansion of `(u, w)` at a small radius `r0`.
///
/// `u(r0) = u0 - K(0) e^{2u0} r0²/4 + e^{2u0} r0^{2+p}/(2+p)²`, the second
/// term present only when `K` carries the `-r^p` part. Fails when the
/// `O(r0⁴)` remainder estimate exceeds `tol`.
pub fn series_start(spec: &CurvatureSpec, u0: f64, r0: f64, tol: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(r0 > 0.0) {
        return Err(Error::Precondition(format!("series radius must be positive, got {r0}")));
    }
    let estimate = series_remainder_coefficient(spec, u0) * r0.powi(4);
    if !(estimate <= tol) {
        return Err(Error::SeriesRadius { r0, estimate, tol });
    }
    let e2 = (2.0 * u0).exp();
    let a = -spec.central_value() * e2 / 4.0;
    let mut u = u0 + a * r0 * r0;
    let mut w = 2.0 * a * r0 * r0;
    if let Some(p) = spec.p() {
        let b = e2 / ((2.0 + p) * (2.0 + p));
        let rp = r0.powf(2.0 + p);
        u += b * rp;
        w += (2.0 + p) * b * rp;
    }
    Ok((u, w))
}

/// Largest start radius whose series remainder stays well below `abs_tol`.
fn start_radius(spec: &CurvatureSpec, u0: f64, controls: &IntegratorControls) -> f64 {
    let c = series_remainder_coefficient(spec, u0);
    let safe = if c > 0.0 {
        0.5 * (controls.abs_tol / c).powf(0.25)
    } else {
        controls.r_start
    };
    controls.r_start.min(safe)
}

/// Extrapolates the local total curvature to `r = ∞` from the current state.
///
/// For the constant kind `(w+1)² + k0 e^{2t+2u}` is an exact first integral.
/// For the sign-changing power beyond `r = 1` the far field is governed by
/// `dw/dt = e^z - e^y` with `y = 2t+2u`, `z = y + p t`; the quantity
/// `(w + a/2)² - e^z + β e^y`, `a = 2+p`, `β = (a+2w)/(2+2w)`, is conserved to
/// second order and its value fixes the limit of `w`. Returns NaN where no
/// closure applies yet.
pub(crate) fn closed_lambda(spec: &CurvatureSpec, t: f64, u: f64, w: f64) -> f64 {
    let y = 2.0 * t + 2.0 * u;
    match *spec {
        CurvatureSpec::Constant { k0 } if k0 > 0.0 => {
            let e = (w + 1.0).powi(2) + k0 * y.exp();
            TWO_PI * (1.0 + e.sqrt())
        }
        CurvatureSpec::SignChangingPower { p } => {
            if t <= 0.0 {
                return f64::NAN;
            }
            let a = 2.0 + p;
            if !(w < -0.5 * a && w < -1.0) {
                return f64::NAN;
            }
            let beta = (a + 2.0 * w) / (2.0 + 2.0 * w);
            let d = (w + 0.5 * a).powi(2) - (y + p * t).exp() + beta * y.exp();
            if d < 0.0 {
                return f64::NAN;
            }
            TWO_PI * (0.5 * a + d.sqrt())
        }
        _ => -TWO_PI * w,
    }
}

struct StabilityTracker {
    window: f64,
    tol: f64,
    history: std::collections::VecDeque<(f64, f64)>,
}

impl StabilityTracker {
    fn new(decades: f64, tol: f64) -> Self {
        StabilityTracker {
            window: decades * LN_10,
            tol,
            history: Default::default(),
        }
    }

    /// Records `(t, value)`; true once the value has stayed within `tol`
    /// over a full window.
    fn push(&mut self, t: f64, value: f64) -> bool {
        if !value.is_finite() {
            self.history.clear();
            return false;
        }
        self.history.push_back((t, value));
        while self.history.len() > 2 && self.history[1].0 <= t - self.window {
            self.history.pop_front();
        }
        let span = t - self.history[0].0;
        if span < self.window {
            return false;
        }
        let (lo, hi) = self
            .history
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
        hi - lo <= self.tol
    }
}

/// Integrates the radial equation from `r ≈ 0` outward with `u(0) = u0`.
pub fn integrate(spec: &CurvatureSpec, u0: f64, controls: &IntegratorControls) -> Result<RadialProfile> {
    spec.validate()?;
    controls.validate()?;
    if !u0.is_finite() {
        return Err(Error::Precondition(format!("u0 must be finite, got {u0}")));
    }

    let r0 = start_radius(spec, u0, controls);
    let (u_start, w_start) = series_start(spec, u0, r0, controls.abs_tol)?;
    let e2 = (2.0 * u0).exp();
    let vol0 = PI * e2 * r0 * r0;
    let pw0 = spec
        .p()
        .filter(|_| !matches!(spec, CurvatureSpec::Constant { .. }))
        .map_or(0.0, |p| TWO_PI * e2 * r0.powf(2.0 + p) / (2.0 + p));

    let mut f = |t: f64, y: &[f64; 4]| rhs(spec, t, y);
    let t0 = r0.ln();
    let t_max = controls.r_max.ln();
    let t_settle = controls.r_settle.ln();
    let mut solver = Dopri5::new(
        &mut f,
        t0,
        [u_start, w_start, vol0, pw0],
        controls.rel_tol,
        controls.abs_tol,
        controls.max_step,
    );

    let make_node = |t: f64, y: &[f64; 4]| Node {
        r: t.exp(),
        u: y[0],
        w: y[1],
        lam: -TWO_PI * y[1],
        vol: y[2],
        pw: y[3],
    };

    let mut nodes = vec![make_node(t0, &solver.y)];
    let mut tracker = StabilityTracker::new(controls.stabilization_window, controls.stab_tol);
    let star = spec.window().map(|w| w.lambda_star);
    let mut upturn_since: Option<f64> = None;
    let mut prev_lam = nodes[0].lam;

    let (status, lambda_hat) = loop {
        if let Err(e) = solver.step(&mut f, t_max) {
            break match e {
                StepError::Underflow | StepError::NonFinite => (Status::StepFailure, None),
            };
        }
        let t = solver.t;
        let node = make_node(t, &solver.y);
        nodes.push(node);

        if matches!(spec, CurvatureSpec::RegularizedPower { .. }) && node.u > u0 + node.r * node.r {
            break (Status::GrowthGuard, None);
        }
        // Beyond the sign change the curvature is negative and `w` increases; once
        // Λ(r) ≤ (2+p)π the exponent of e^z stops decreasing and the shot blows up.
        if let Some(star) = star {
            if t > 0.0 && node.lam <= star {
                break (Status::Diverged, None);
            }
        }
        if node.w > 0.0 && node.lam < prev_lam {
            let since = *upturn_since.get_or_insert(t);
            if t - since >= LN_10 {
                break (Status::Diverged, None);
            }
        } else {
            upturn_since = None;
        }
        prev_lam = node.lam;

        let closed = closed_lambda(spec, t, node.u, node.w);
        let stable = tracker.push(t, closed);
        if stable && (t >= t_settle || node.u < controls.u_floor) {
            break (Status::Converged, Some(closed));
        }
        if t >= t_max {
            break (Status::MaxRadius, None);
        }
    };

    // slopes are recomputed from the stored radii so that a profile read back
    // from disk interpolates identically
    RadialProfile::from_nodes(*spec, u0, *controls, nodes, status, lambda_hat)
}

/// `d²w/dt²` along a solution: `∂g/∂t + 2gw` for `dw/dt = g(t, u)`.
fn w_curvature(spec: &CurvatureSpec, t: f64, n: &Node, g: f64) -> f64 {
    let eps = 1e-6;
    let y = [n.u, n.w, 0.0, 0.0];
    let dg_dt = (rhs(spec, t + eps, &y)[1] - rhs(spec, t - eps, &y)[1]) / (2.0 * eps);
    dg_dt + 2.0 * g * n.w
}

fn quintic_hermite(t0: f64, t1: f64, a: [f64; 3], b: [f64; 3], t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    h0 * a[0] + h * (h1 * a[1] + h4 * b[1]) + h * h * (h2 * a[2] + h3 * b[2]) + h5 * b[0]
}

fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, mut m0: f64, mut m1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let delta = (y1 - y0) / h;
    // Fritsch–Carlson limiter keeps the interpolant monotone on monotone data
    if delta == 0.0 {
        m0 = 0.0;
        m1 = 0.0;
    } else {
        if m0 * delta < 0.0 {
            m0 = 0.0;
        }
        if m1 * delta < 0.0 {
            m1 = 0.0;
        }
        let a = m0 / delta;
        let b = m1 / delta;
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m0 = tau * a * delta;
            m1 = tau * b * delta;
        }
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

impl RadialProfile {
    /// Builds a profile from stored nodes, recomputing interpolation slopes
    /// from the equation itself.
    pub fn from_nodes(
        spec: CurvatureSpec,
        u0: f64,
        controls: IntegratorControls,
        nodes: Vec<Node>,
        status: Status,
        lambda_hat: Option<f64>,
    ) -> Result<Self> {
        check_nodes(&nodes)?;
        let slopes = nodes
            .iter()
            .map(|n| rhs(&spec, n.r.ln(), &[n.u, n.w, n.vol, n.pw]))
            .collect();
        Ok(RadialProfile {
            spec,
            u0,
            controls,
            nodes,
            status,
            lambda_hat,
            slopes,
            on_shell: true,
        })
    }

    /// Builds a profile from arbitrary samples (not necessarily solutions),
    /// with `du/dt = w` and the remaining slopes estimated from the data.
    pub fn from_samples(spec: CurvatureSpec, nodes: Vec<Node>, lambda_hat: Option<f64>) -> Result<Self> {
        check_nodes(&nodes)?;
        let ts: Vec<f64> = nodes.iter().map(|n| n.r.ln()).collect();
        let fd = |get: fn(&Node) -> f64| -> Vec<f64> {
            let n = nodes.len();
            (0..n)
                .map(|i| {
                    if n == 1 {
                        0.0
                    } else if i == 0 {
                        (get(&nodes[1]) - get(&nodes[0])) / (ts[1] - ts[0])
                    } else if i == n - 1 {
                        (get(&nodes[n - 1]) - get(&nodes[n - 2])) / (ts[n - 1] - ts[n - 2])
                    } else {
                        (get(&nodes[i + 1]) - get(&nodes[i - 1])) / (ts[i + 1] - ts[i - 1])
                    }
                })
                .collect()
        };
        let dw = fd(|n| n.w);
        let dv = fd(|n| n.vol);
        let dp = fd(|n| n.pw);
        let slopes = (0..nodes.len()).map(|i| [nodes[i].w, dw[i], dv[i], dp[i]]).collect();
        let u0 = nodes.first().map_or(0.0, |n| n.u);
        Ok(RadialProfile {
            spec,
            u0,
            controls: IntegratorControls::default(),
            nodes,
            status: if lambda_hat.is_some() { Status::Converged } else { Status::MaxRadius },
            lambda_hat,
            slopes,
            on_shell: false,
        })
    }

    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn r_first(&self) -> f64 {
        self.nodes[0].r
    }

    pub fn r_last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].r
    }

    pub fn last(&self) -> &Node {
        &self.nodes[self.nodes.len() - 1]
    }

    /// Interpolates every node field at radius `r`.
    pub fn node_at(&self, r: f64) -> Result<Node> {
        let (lo, hi) = (self.r_first(), self.r_last());
        if !(r >= lo * (1.0 - 1e-14) && r <= hi * (1.0 + 1e-14)) {
            return Err(Error::OutOfRange { r, lo, hi });
        }
        let idx = self.nodes.partition_point(|n| n.r < r);
        if idx < self.nodes.len() && self.nodes[idx].r == r {
            return Ok(self.nodes[idx]);
        }
        if idx == 0 {
            return Ok(self.nodes[0]);
        }
        if idx >= self.nodes.len() {
            return Ok(*self.last());
        }
        let (a, b) = (&self.nodes[idx - 1], &self.nodes[idx]);
        let (sa, sb) = (&self.slopes[idx - 1], &self.slopes[idx]);
        let (ta, tb, t) = (a.r.ln(), b.r.ln(), r.ln());
        // u'' = dw/dt is known at the nodes, so u gets the quintic
        let u = quintic_hermite(ta, tb, [a.u, sa[0], sa[1]], [b.u, sb[0], sb[1]], t);
        let w = if self.on_shell {
            let ca = w_curvature(&self.spec, ta, a, sa[1]);
            let cb = w_curvature(&self.spec, tb, b, sb[1]);
            quintic_hermite(ta, tb, [a.w, sa[1], ca], [b.w, sb[1], cb], t)
        } else {
            hermite(ta, tb, a.w, b.w, sa[1], sb[1], t)
        };
        let vol = hermite(ta, tb, a.vol, b.vol, sa[2], sb[2], t);
        let pw = hermite(ta, tb, a.pw, b.pw, sa[3], sb[3], t);
        Ok(Node {
            r,
            u,
            w,
            lam: -TWO_PI * w,
            vol,
            pw,
        })
    }

    /// `(u, r u')` at any radius in `[0, r_last]`; below the first node the
    /// series expansion about the origin is used.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if r == 0.0 {
            return Ok((self.u0, 0.0));
        }
        if r > 0.0 && r < self.r_first() {
            return series_start(&self.spec, self.u0, r, f64::INFINITY);
        }
        let n = self.node_at(r)?;
        Ok((n.u, n.w))
    }

    /// Curvature mass `2π ∫₀^r K e^{2u} s ds` from the running integrals.
    pub fn curvature_mass(node: &Node, spec: &CurvatureSpec) -> f64 {
        spec.volume_weight() * node.vol - node.pw
    }

    /// Largest node-wise gap between `-2π w` and the quadrature of `K e^{2u}`.
    pub fn divergence_residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes
            .iter()
            .map(move |n| (n.lam - Self::curvature_mass(n, &self.spec)).abs() / (1.0 + n.lam.abs()))
    }

    /// True if `u` never increases by more than `tol` between nodes.
    pub fn is_monotone_decreasing(&self, tol: f64) -> bool {
        self.nodes.windows(2).all(|p| p[1].u <= p[0].u + tol)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for n in &self.nodes {
            wtr.serialize(n)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_document(&self) -> ProfileDocument {
        ProfileDocument {
            format_version: crate::FORMAT_VERSION.to_string(),
            spec: self.spec,
            controls: self.controls,
            u0: self.u0,
            status: self.status,
            lambda_hat: self.lambda_hat,
            nodes: NodeColumns {
                r: self.nodes.iter().map(|n| n.r).collect(),
                u: self.nodes.iter().map(|n| n.u).collect(),
                w: self.nodes.iter().map(|n| n.w).collect(),
                lam: self.nodes.iter().map(|n| n.lam).collect(),
                vol: self.nodes.iter().map(|n| n.vol).collect(),
                pw: self.nodes.iter().map(|n| n.pw).collect(),
            },
        }
    }

    pub fn from_document(doc: ProfileDocument) -> Result<Self> {
        let c = &doc.nodes;
        let n = c.r.len();
        if [c.u.len(), c.w.len(), c.lam.len(), c.vol.len(), c.pw.len()].iter().any(|&l| l != n) {
            return Err(Error::Precondition("node columns have different lengths".into()));
        }
        let nodes = (0..n)
            .map(|i| Node {
                r: c.r[i],
                u: c.u[i],
                w: c.w[i],
                lam: c.lam[i],
                vol: c.vol[i],
                pw: c.pw[i],
            })
            .collect();
        Self::from_nodes(doc.spec, doc.u0, doc.controls, nodes, doc.status, doc.lambda_hat)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, &self.to_document())?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_reader(reader)?;
        Self::from_document(doc)
    }
}

/// Reads the node table written by [`RadialProfile::write_csv`].
pub fn read_csv_nodes<R: Read>(reader: R) -> Result<Vec<Node>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let nodes = rdr.deserialize().collect::<std::result::Result<Vec<Node>, _>>()?;
    Ok(nodes)
}

fn check_nodes(nodes: &[Node]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Precondition("profile needs at least one node".into()));
    }
    if nodes.iter().any(|n| !(n.r > 0.0)) || nodes.windows(2).any(|p| !(p[1].r > p[0].r)) {
        return Err(Error::Precondition("node radii must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Self-describing JSON form of a profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub format_version: String,
    pub spec: CurvatureSpec,
    pub controls: IntegratorControls,
    pub u0: f64,
    pub status: Status,
    pub lambda_hat: Option<f64>,
    pub nodes: NodeColumns,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeColumns {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub lam: Vec<f64>,
    pub vol: Vec<f64>,
    pub pw: Vec<f64>,
}

/// Samples `(r, u, w)` at the requested radii by Hermite interpolation in
/// `log r` between stored nodes.
pub fn resample(profile: &RadialProfile, radii: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    radii
        .iter()
        .map(|&r| profile.node_at(r).map(|n| (r, n.u, n.w)))
        .collect()
}
