//! Recovery of solutions through the damped family
//! `-Δu = (λ - |x|^p) e^{-|x|²} e^{2u}` as `λ → 0`.

use std::f64::consts::TAU;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{IntegratorControls, Node, RadialProfile, Status};
use crate::model::{CurvatureSpec, LAMBDA_SPH};
use crate::shooting::{solve_for_lambda, SolverOptions};

pub const DEFAULT_SCHEDULE: [f64; 5] = [1.0, 0.3, 0.1, 0.03, 0.01];

/// Relative change allowed between the last two extrapolation inputs.
pub const CAUCHY_TOL: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationStep {
    pub lambda: f64,
    pub u0: f64,
    /// `e^{-u(0)} / √λ`, so that `λ r_λ² e^{2u(0)} = 1`.
    pub r_lambda: f64,
    /// `r_λ^p / λ`.
    pub ratio: f64,
    /// Samples `(|x|, η(x))` of `η(x) = u(r_λ x) - u(0)`.
    pub eta: Vec<(f64, f64)>,
    #[serde(skip)]
    pub profile: Arc<RadialProfile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationResult {
    pub target: f64,
    pub p: f64,
    pub steps: Vec<ContinuationStep>,
    pub mu_hat: f64,
    /// `mu_hat^{-1/p}`.
    pub rho: f64,
    #[serde(skip)]
    pub final_profile: Arc<RadialProfile>,
    /// `sup |u_final - u_direct|` on `[0, 10]`.
    pub match_error: f64,
    pub direct_u0: f64,
}

/// Solution of the damped equation with total curvature `target`.
pub fn solve_regularized(p: f64, lambda: f64, target: f64, controls: &IntegratorControls) -> Result<RadialProfile> {
    let spec = CurvatureSpec::regularized(p, lambda)?;
    if !(target > 0.0 && target < LAMBDA_SPH) {
        return Err(Error::Precondition(format!("regularized target must lie in (0, 4π), got {target}")));
    }
    let shot = solve_for_lambda(&spec, target, controls, &SolverOptions::default())?;
    if shot.status == Status::GrowthGuard {
        let n = shot.profile.last();
        return Err(Error::GrowthGuard { r: n.r, u: n.u });
    }
    Ok(Arc::try_unwrap(shot.profile).unwrap_or_else(|a| (*a).clone()))
}

/// Rescales a damped solution by `r_λ`.
pub fn rescaled_eta(profile: &RadialProfile, lambda: f64) -> Result<ContinuationStep> {
    if !profile.is_converged() {
        return Err(Error::NotConverged(profile.status.to_string()));
    }
    let p = profile
        .spec
        .p()
        .ok_or_else(|| Error::Precondition("rescaling needs a power-law curvature".into()))?;
    let u0 = profile.u0;
    let r_lambda = (-u0).exp() / lambda.sqrt();
    let eta = (0..=200)
        .map(|i| {
            let x = 10.0 * i as f64 / 200.0;
            // η(0) = 0 by definition, not by evaluation
            let e = if i == 0 { 0.0 } else { profile.eval(r_lambda * x)?.0 - u0 };
            Ok((x, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContinuationStep {
        lambda,
        u0,
        r_lambda,
        ratio: r_lambda.powf(p) / lambda,
        eta,
        profile: Arc::new(profile.clone()),
    })
}

/// Fits `μ + A λ^γ` through the last three points, returning `(μ, γ)`.
pub fn fit_power_limit(lambdas: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len().min(lambdas.len());
    if n < 3 {
        return None;
    }
    let (l1, l2, l3) = (lambdas[n - 3], lambdas[n - 2], lambdas[n - 1]);
    let (v1, v2, v3) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = (v1 - v2, v2 - v3);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let q = d1 / d2;
    let g = |gamma: f64| (l1.powf(gamma) - l2.powf(gamma)) / (l2.powf(gamma) - l3.powf(gamma)) - q;
    let (mut a, mut b) = (1e-3, 8.0);
    if g(a) * g(b) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(a) * g(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let gamma = 0.5 * (a + b);
    Some((richardson(l2, l3, v2, v3, gamma), gamma))
}

fn richardson(l2: f64, l3: f64, v2: f64, v3: f64, gamma: f64) -> f64 {
    let (a2, a3) = (l2.powf(gamma), l3.powf(gamma));
    v3 - (v2 - v3) / (a2 - a3) * a3
}

/// Limit of `values` as `λ → 0`; the last value when no power law fits,
/// including the case of an already constant sequence.
pub fn extrapolate_limit(lambdas: &[f64], values: &[f64]) -> f64 {
    match fit_power_limit(lambdas, values) {
        Some((mu, _)) => mu,
        None => values.last().copied().unwrap_or(f64::NAN),
    }
}

/// `u(x) = η(ρx) + log ρ`, with `η` extrapolated pointwise from the last
/// three steps at order `gamma` (or taken from the last step alone).
fn final_profile(steps: &[ContinuationStep], p: f64, rho: f64, gamma: Option<f64>, lambda_hat: f64) -> Result<RadialProfile> {
    let last = steps.last().expect("non-empty steps");
    let src = &last.profile;
    let scale = last.r_lambda * rho;
    let log_rho = rho.ln();
    let tail = &steps[steps.len().saturating_sub(3)..];
    // η_k(ρx) and x η_k'(ρx) for each of the trailing steps
    let limit_at = |x: f64| -> Result<(f64, f64)> {
        let (u, w) = last.profile.eval(x * scale)?;
        let (eta, w) = (u - last.u0, w);
        match gamma {
            Some(g) if tail.len() == 3 => match tail[1].profile.eval(x * tail[1].r_lambda * rho) {
                Ok((u1, w1)) => {
                    let eta1 = u1 - tail[1].u0;
                    let (l2, l3) = (tail[1].lambda, tail[2].lambda);
                    Ok((richardson(l2, l3, eta1, eta, g), richardson(l2, l3, w1, w, g)))
                }
                // beyond the shorter profile only the last step is available
                Err(_) => Ok((eta, w)),
            },
            _ => Ok((eta, w)),
        }
    };
    let lam = last.lambda;
    let mut radii: Vec<f64> = (1..=40).rev().map(|k| src.r_first() * 10f64.powf(-0.25 * k as f64)).collect();
    radii.extend(src.nodes.iter().map(|n| n.r));
    let e2 = (2.0 * last.u0).exp();
    let nodes = radii
        .into_iter()
        .map(|z| {
            let x = z / scale;
            let (eta, w) = limit_at(x)?;
            // e^{2u} dx maps to λ e^{2u_λ} dz, and |x|^p picks up scale^{-p}
            let (vol, pw) = if z < src.r_first() {
                (std::f64::consts::PI * z * z * e2, TAU * e2 * z.powf(2.0 + p) / (2.0 + p))
            } else {
                let n = src.node_at(z)?;
                (n.vol, n.pw)
            };
            Ok(Node { r: x, u: eta + log_rho, w, lam: -TAU * w, vol: lam * vol, pw: lam * scale.powf(-p) * pw })
        })
        .collect::<Result<Vec<_>>>()?;
    RadialProfile::from_nodes(
        CurvatureSpec::sign_changing(p)?,
        log_rho,
        src.controls,
        nodes,
        Status::Converged,
        Some(lambda_hat),
    )
}

/// Runs the damped family down the schedule and rescales the last member.
pub fn run_continuation(
    p: f64,
    target: f64,
    schedule: &[f64],
    controls: &IntegratorControls,
) -> Result<ContinuationResult> {
    let spec = CurvatureSpec::sign_changing(p)?;
    let window = spec.window().expect("sign-changing kind has a window");
    if !window.contains_open(target) {
        return Err(Error::Precondition(format!("target {target} outside the existence window")));
    }
    if schedule.len() < 3 {
        return Err(Error::Precondition("schedule needs at least three values of λ".into()));
    }
    if schedule.iter().any(|&l| !(l > 0.0)) || schedule.windows(2).any(|s| !(s[1] < s[0])) {
        return Err(Error::Precondition("schedule must be positive and strictly decreasing".into()));
    }

    let steps = schedule
        .par_iter()
        .map(|&lambda| rescaled_eta(&solve_regularized(p, lambda, target, controls)?, lambda))
        .collect::<Result<Vec<_>>>()?;

    let ratios: Vec<f64> = steps.iter().map(|s| s.ratio).collect();
    let n = ratios.len();
    let (d1, d2) = (ratios[n - 2] - ratios[n - 3], ratios[n - 1] - ratios[n - 2]);
    if !(d2.abs() <= d1.abs()) || (d2 / ratios[n - 1]).abs() > CAUCHY_TOL {
        return Err(Error::FailedLimit(ratios));
    }
    let fit = fit_power_limit(schedule, &ratios);
    let mu_hat = fit.map_or(ratios[n - 1], |f| f.0);
    if !(mu_hat > 0.0) {
        return Err(Error::FailedLimit(ratios));
    }
    let rho = mu_hat.powf(-1.0 / p);
    let last = steps.last().expect("schedule is non-empty");
    let lambda_hat = last.profile.lambda_hat.expect("converged step");
    let final_profile = final_profile(&steps, p, rho, fit.map(|f| f.1), lambda_hat)?;

    let direct = solve_for_lambda(&spec, target, controls, &SolverOptions::default())?;
    let mut match_error = 0.0f64;
    for i in 0..=1000 {
        let r = 10.0 * i as f64 / 1000.0;
        let uf = final_profile.eval(r)?.0;
        let ud = direct.profile.eval(r)?.0;
        match_error = match_error.max((uf - ud).abs());
    }

    Ok(ContinuationResult {
        target,
        p,
        steps,
        mu_hat,
        rho,
        final_profile: Arc::new(final_profile),
        match_error,
        direct_u0: direct.u0,
    })
}

/// One row per step: lambda, u0, r_lambda, ratio.
pub fn write_steps_csv<W: Write>(steps: &[ContinuationStep], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["lambda", "u0", "r_lambda", "ratio"])?;
    for s in steps {
        wtr.write_record([s.lambda, s.u0, s.r_lambda, s.ratio].map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_sequence_extrapolates_to_itself() {
        let lams = DEFAULT_SCHEDULE;
        assert_eq!(extrapolate_limit(&lams, &[0.7; 5]), 0.7);
        for gamma in [0.3, 0.5, 1.0, 2.0] {
            let s: Vec<f64> = lams.iter().map(|l| 2.0 + 0.8 * l.powf(gamma)).collect();
            assert!((extrapolate_limit(&lams, &s) - 2.0).abs() < 1e-10, "{gamma}");
        }
        // oscillating tail: no power law, keep the last value
        assert_eq!(extrapolate_limit(&lams, &[1.0, 2.0, 1.0, 2.0, 1.5]), 1.5);
    }

    #[test]
    fn regularized_target_is_hit() {
        let c = IntegratorControls::default();
        let prof = solve_regularized(1.0, 1.0, 2.0 * PI, &c).unwrap();
        assert!((prof.lambda_hat.unwrap() - 2.0 * PI).abs() <= 1e-6 * LAMBDA_SPH);
        assert!(matches!(solve_regularized(1.0, 1.0, 4.5 * PI, &c), Err(Error::Precondition(_))));
    }

    #[test]
    fn step_scaling_is_exact() {
        let c = IntegratorControls::default();
        let prof = solve_regularized(1.0, 0.1, 3.0 * PI, &c).unwrap();
        let step = rescaled_eta(&prof, 0.1).unwrap();
        let one = step.lambda * step.r_lambda * step.r_lambda * (2.0 * step.u0).exp();
        assert!((one - 1.0).abs() < 1e-14);
        assert_eq!(step.eta[0], (0.0, 0.0));
        assert!(step.eta.iter().all(|(_, e)| *e <= 1e-12));
    }

    #[test]
    fn schedule_is_validated() {
        let c = IntegratorControls::default();
        assert!(run_continuation(1.0, 3.5 * PI, &[1.0, 0.3], &c).is_err());
        assert!(run_continuation(1.0, 3.5 * PI, &[1.0, 0.3, 0.5], &c).is_err());
        assert!(run_continuation(1.0, 2.5 * PI, &DEFAULT_SCHEDULE, &c).is_err());
    }
}
