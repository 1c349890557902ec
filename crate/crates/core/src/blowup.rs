//! Rescaling of high-`Λ` solutions onto the spherical bubble.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegratorControls, RadialProfile};
use crate::model::CurvatureSpec;
use crate::shooting::{solve_for_lambda, SolverOptions};

pub const DEFAULT_R_ETA: f64 = 10.0;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupDiagnostics {
    /// `2 e^{-u(0)}`.
    pub mu: f64,
    pub u0: f64,
    /// Samples `(|x|, η(x))` of `η(x) = u(μx) - u(0) + log 2`.
    pub eta: Vec<(f64, f64)>,
    pub sup_dist: f64,
    /// `max |x η'(x) + 2|x|²/(1+|x|²)|`.
    pub grad_dist: f64,
    pub mass_in_delta: f64,
    pub r_eta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupEntry {
    pub target: f64,
    pub lambda_hat: f64,
    pub diagnostics: BlowupDiagnostics,
}

impl BlowupEntry {
    pub fn mass_fraction(&self) -> f64 {
        self.diagnostics.mass_in_delta / self.lambda_hat
    }
}

fn eta_grid(r_eta: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=1000).map(|i| r_eta * i as f64 / 1000.0).collect();
    // resolve the core, where the bubble varies on scale 1
    xs.extend((0..200).map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / 200.0)).filter(|&x| x < r_eta));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Compares `η` with `log(2/(1+|x|²))` on `|x| ≤ r_eta` and reads off the
/// curvature mass inside `r = delta`.
pub fn rescale_to_bubble(profile: &RadialProfile, r_eta: f64, delta: f64) -> Result<BlowupDiagnostics> {
    if !profile.is_converged() {
        return Err(Error::NotConverged(profile.status.to_string()));
    }
    if !(r_eta > 0.0 && delta > 0.0) {
        return Err(Error::Precondition(format!("R_eta and delta must be positive, got {r_eta}, {delta}")));
    }
    let u0 = profile.u0;
    let mu = 2.0 * (-u0).exp();
    let shift = 2f64.ln() - u0;
    let mut eta = Vec::new();
    let (mut sup_dist, mut grad_dist) = (0.0f64, 0.0f64);
    for x in eta_grid(r_eta) {
        let (u, w) = profile.eval(mu * x)?;
        let e = if x == 0.0 { 2f64.ln() } else { u + shift };
        let x2 = x * x;
        sup_dist = sup_dist.max((e - (2.0 / (1.0 + x2)).ln()).abs());
        grad_dist = grad_dist.max((w + 2.0 * x2 / (1.0 + x2)).abs());
        eta.push((x, e));
    }
    let mass_in_delta = profile.node_at(delta).map(|n| n.lam).or_else(|_| -> Result<f64> {
        let (_, w) = profile.eval(delta)?;
        Ok(-std::f64::consts::TAU * w)
    })?;
    Ok(BlowupDiagnostics { mu, u0, eta, sup_dist, grad_dist, mass_in_delta, r_eta, delta })
}

/// Solves for each target in parallel and rescales each solution.
pub fn blowup_sweep(
    p: f64,
    targets: &[f64],
    controls: &IntegratorControls,
    r_eta: f64,
    delta: f64,
) -> Result<Vec<BlowupEntry>> {
    let spec = CurvatureSpec::sign_changing(p)?;
    let window = spec.window().expect("sign-changing kind has a window");
    if targets.is_empty() {
        return Err(Error::Precondition("no blow-up targets".into()));
    }
    if targets.windows(2).any(|t| !(t[1] > t[0])) {
        return Err(Error::Precondition("blow-up targets must be strictly increasing".into()));
    }
    if let Some(t) = targets.iter().find(|&&t| !window.contains_open(t)) {
        return Err(Error::Precondition(format!("target {t} outside the existence window")));
    }
    targets
        .par_iter()
        .map(|&target| {
            let shot = solve_for_lambda(&spec, target, controls, &SolverOptions::default())?;
            let diagnostics = rescale_to_bubble(&shot.profile, r_eta, delta)?;
            Ok(BlowupEntry { target, lambda_hat: shot.lambda_hat.unwrap_or(f64::NAN), diagnostics })
        })
        .collect()
}

/// One row per target: target (in units of π), u0, mu, sup_dist, grad_dist, mass_fraction.
pub fn write_sweep_csv<W: Write>(entries: &[BlowupEntry], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["target_over_pi", "u0", "mu", "sup_dist", "grad_dist", "mass_fraction"])?;
    for e in entries {
        let d = &e.diagnostics;
        wtr.write_record(
            [e.target / std::f64::consts::PI, d.u0, d.mu, d.sup_dist, d.grad_dist, e.mass_fraction()].map(|v| v.to_string()),
        )?;
    }
    wtr.flush()?;
    Ok(())
}
