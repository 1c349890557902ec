//! Checks of a computed profile against the Pohozaev and volume identities and
//! the far-field asymptotics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::RadialProfile;
use crate::model::{lambda_star, CurvatureSpec, LAMBDA_SPH};
use crate::quadrature::{pohozaev_quantities, IntegralReport};

pub const DEFAULT_FIT_WINDOW: (f64, f64) = (1e3, 1e6);

const FIT_SAMPLES: usize = 241;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldFit {
    /// Limit of `du/dlog r`, i.e. `-Λ/2π`.
    pub slope: f64,
    /// Additive constant in `u = slope·log r + C`.
    pub c: f64,
    /// Decay exponent of the remainder; only fitted well above the endpoint.
    pub alpha: Option<f64>,
    pub fit_window: (f64, f64),
    pub rms: f64,
}

impl FarFieldFit {
    /// The exact-rate model `u = -(Λ̂/2π) log r + C` pinned to `u(R)`.
    pub fn anchored(profile: &RadialProfile, r: f64) -> Result<Self> {
        let lambda = profile
            .lambda_hat
            .ok_or_else(|| Error::NotConverged(profile.status.to_string()))?;
        let slope = -lambda / (2.0 * PI);
        let node = profile.node_at(r)?;
        Ok(FarFieldFit { slope, c: node.u - slope * r.ln(), alpha: None, fit_window: (r, r), rms: 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub pohozaev_residual: Option<f64>,
    pub volume_residual: f64,
    pub farfield: FarFieldFit,
    pub gradient_bound: f64,
    pub kelvin_sup: f64,
    pub loglog_ratio: Option<f64>,
    pub monotone: bool,
    pub integrals: IntegralReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseOptions {
    pub fit_window: (f64, f64),
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions { fit_window: DEFAULT_FIT_WINDOW }
    }
}

/// `((Λ̂/4π)(Λ̂-4π) + (p/2)P̂) / (1+Λ̂²)`.
pub fn pohozaev_residual(report: &IntegralReport, p: f64) -> f64 {
    let l = report.lambda_hat;
    let p_hat = report.p_hat.unwrap_or(0.0);
    (l / LAMBDA_SPH * (l - LAMBDA_SPH) + 0.5 * p * p_hat) / (1.0 + l * l)
}

/// Volume against its value predicted from `Λ̂` alone, over `1+V̂`.
///
/// For `K = 1-|x|^p` this is `V̂ - Λ̂ + (2Λ̂/(4πp))(Λ̂-4π)`; for the other
/// kinds, where no such prediction exists, `K(0)·V̂ - P̂ - Λ̂`.
pub fn volume_residual(report: &IntegralReport, spec: &CurvatureSpec) -> f64 {
    let (v, l) = (report.v_hat, report.lambda_hat);
    let r = match *spec {
        CurvatureSpec::SignChangingPower { p } => v - l + 2.0 * l / (LAMBDA_SPH * p) * (l - LAMBDA_SPH),
        _ => spec.volume_weight() * v - report.p_hat.unwrap_or(0.0) - l,
    };
    r / (1.0 + v)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

// ordinary least squares for y = a + b x
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

fn check_window(profile: &RadialProfile, (lo, hi): (f64, f64), decades: f64) -> Result<()> {
    if !(lo > 0.0 && hi > lo) || (hi / lo).log10() < decades - 1e-12 {
        return Err(Error::WindowTooNarrow { lo, hi });
    }
    // node_at reports the range violation
    profile.node_at(lo)?;
    profile.node_at(hi)?;
    Ok(())
}

pub fn farfield_fit(profile: &RadialProfile, window: (f64, f64)) -> Result<FarFieldFit> {
    check_window(profile, window, 2.0)?;
    let radii = log_grid(window.0, window.1, FIT_SAMPLES);
    let mut xs = Vec::with_capacity(radii.len());
    let mut us = Vec::with_capacity(radii.len());
    let mut ws = Vec::with_capacity(radii.len());
    for &r in &radii {
        let n = profile.node_at(r)?;
        xs.push(r.ln());
        us.push(n.u);
        ws.push(n.w);
    }
    let (a, b, rms) = line_fit(&xs, &us);

    // remainder c·r^{-α}: its log-derivative decays at the same rate
    let alpha = match profile.lambda_hat {
        Some(l) if clean_remainder(&profile.spec, l) => {
            let w_inf = -l / (2.0 * PI);
            let (lx, ly): (Vec<f64>, Vec<f64>) = xs
                .iter()
                .zip(&ws)
                .filter(|(_, w)| (*w - w_inf).abs() > 1e-12)
                .map(|(x, w)| (*x, (w - w_inf).abs().ln()))
                .unzip();
            (lx.len() >= 8).then(|| -line_fit(&lx, &ly).1)
        }
        _ => None,
    };
    Ok(FarFieldFit { slope: b, c: a, alpha, fit_window: window, rms })
}

fn clean_remainder(spec: &CurvatureSpec, lambda: f64) -> bool {
    match spec {
        CurvatureSpec::SignChangingPower { p } => lambda - lambda_star(*p) > 0.1 * PI,
        _ => true,
    }
}

/// `ũ(s) = u(1/s) - (Λ/2π) log s` on the given grid.
pub fn kelvin_transform(profile: &RadialProfile, lambda: f64, s_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    s_grid
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::Precondition(format!("Kelvin radius must lie in (0,1], got {s}")));
            }
            let u = profile.node_at(1.0 / s)?.u;
            Ok((s, u - lambda / (2.0 * PI) * s.ln()))
        })
        .collect()
}

/// `sup |r u'(r)|` over the window, nodes and endpoints included.
pub fn gradient_decay(profile: &RadialProfile, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(hi >= lo) {
        return Err(Error::WindowTooNarrow { lo, hi });
    }
    let ends = profile.node_at(lo)?.w.abs().max(profile.node_at(hi)?.w.abs());
    Ok(profile
        .nodes
        .iter()
        .filter(|n| n.r > lo && n.r < hi)
        .map(|n| n.w.abs())
        .fold(ends, f64::max))
}

/// `(u(r) + (1+p/2) log r) / log log r` at each radius.
pub fn loglog_ratio(profile: &RadialProfile, p: f64, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let endpoint = (2.0 + p) * PI;
    match profile.lambda_hat {
        Some(l) if (l - endpoint).abs() <= 1e-2 => {}
        other => {
            return Err(Error::Precondition(format!(
                "log-log ratio needs Λ̂ within 1e-2 of (2+p)π = {endpoint}, got {other:?}"
            )))
        }
    }
    radii
        .iter()
        .map(|&r| {
            if !(r >= std::f64::consts::E.powi(2)) {
                return Err(Error::Precondition(format!("log-log ratio needs r ≥ e², got {r}")));
            }
            let u = profile.node_at(r)?.u;
            Ok((r, (u + (1.0 + 0.5 * p) * r.ln()) / r.ln().ln()))
        })
        .collect()
}

/// Runs every check on a converged profile.
pub fn diagnose(profile: &RadialProfile, opts: &DiagnoseOptions) -> Result<DiagnosticsReport> {
    if !profile.is_converged() {
        return Err(Error::NotConverged(profile.status.to_string()));
    }
    let lambda = profile.lambda_hat.expect("converged profile carries Λ̂");
    let spec = &profile.spec;
    let farfield = farfield_fit(profile, opts.fit_window)?;
    let anchor = FarFieldFit::anchored(profile, profile.r_last())?;
    let integrals = pohozaev_quantities(profile, &anchor)?;

    let pohozaev = match spec {
        CurvatureSpec::SignChangingPower { p } => Some(pohozaev_residual(&integrals, *p)),
        CurvatureSpec::Constant { .. } => Some(pohozaev_residual(&integrals, 0.0)),
        // the Gaussian damping adds a term the identity does not carry
        CurvatureSpec::RegularizedPower { .. } => None,
    };

    let s_lo = (1.0 / profile.r_last()).max(1e-6);
    let kelvin = kelvin_transform(profile, lambda, &log_grid(s_lo, 0.1, 16))?;
    let kelvin_sup = kelvin.iter().map(|(_, u)| *u).fold(f64::NEG_INFINITY, f64::max);

    let loglog_ratio = match spec {
        CurvatureSpec::SignChangingPower { p } if (lambda - (2.0 + p) * PI).abs() <= 1e-2 => {
            let r = profile.r_last().min(1e7);
            Some(loglog_ratio(profile, *p, &[r])?[0].1)
        }
        _ => None,
    };

    Ok(DiagnosticsReport {
        pohozaev_residual: pohozaev,
        volume_residual: volume_residual(&integrals, spec),
        farfield,
        gradient_bound: gradient_decay(profile, opts.fit_window)?,
        kelvin_sup,
        loglog_ratio,
        monotone: profile.is_monotone_decreasing(profile.controls.abs_tol),
        integrals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, IntegratorControls, Node};

    fn synthetic(spec: CurvatureSpec, lambda: Option<f64>, f: impl Fn(f64) -> (f64, f64)) -> RadialProfile {
        let nodes = (0..=400)
            .map(|i| {
                let r = 10f64.powf(i as f64 / 40.0);
                let (u, w) = f(r);
                Node { r, u, w, lam: -2.0 * PI * w, vol: 0.0, pw: 0.0 }
            })
            .collect();
        RadialProfile::from_samples(spec, nodes, lambda).unwrap()
    }

    fn report(lambda_hat: f64, p_hat: Option<f64>, v_hat: f64) -> IntegralReport {
        IntegralReport { lambda_hat, v_hat, p_hat, tail_fraction: 0.0, converged: true, r_trunc: 1.0 }
    }

    #[test]
    fn pohozaev_residual_examples() {
        assert_eq!(pohozaev_residual(&report(4.0 * PI, Some(0.0), 0.0), 1.0), 0.0);
        let r = pohozaev_residual(&report(3.0 * PI, Some(1.5 * PI), 0.0), 1.0);
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn volume_residual_balances() {
        let spec = CurvatureSpec::sign_changing(1.0).unwrap();
        assert!(volume_residual(&report(3.0 * PI, Some(1.5 * PI), 4.5 * PI), &spec).abs() < 1e-15);
    }

    #[test]
    fn pure_log_profile_fits_exactly() {
        let spec = CurvatureSpec::sign_changing(1.0).unwrap();
        let prof = synthetic(spec, Some(4.0 * PI), |r| (-2.0 * r.ln(), -2.0));
        let fit = farfield_fit(&prof, (1e3, 1e6)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.c.abs() < 1e-10);
        assert!(fit.rms < 1e-12);
        assert!(fit.alpha.is_none());

        let kt = kelvin_transform(&prof, 4.0 * PI, &[1.0, 0.1, 1e-3, 1e-5]).unwrap();
        assert!(kt.iter().all(|(_, u)| u.abs() < 1e-12));

        assert!((gradient_decay(&prof, (1e2, 1e6)).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fit_window_must_span_two_decades() {
        let spec = CurvatureSpec::sign_changing(1.0).unwrap();
        let prof = synthetic(spec, None, |r| (-2.0 * r.ln(), -2.0));
        assert!(matches!(farfield_fit(&prof, (1e3, 5e4)), Err(Error::WindowTooNarrow { .. })));
        assert!(matches!(farfield_fit(&prof, (1e3, 1e12)), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn remainder_exponent_is_recovered() {
        let spec = CurvatureSpec::sign_changing(1.0).unwrap();
        let lam = 3.6 * PI;
        let k = lam / (2.0 * PI);
        let prof = synthetic(spec, Some(lam), |r| (0.4 - k * r.ln() + 2.0 * r.powf(-0.5), -k - r.powf(-0.5)));
        let fit = farfield_fit(&prof, (1e3, 1e6)).unwrap();
        assert!((fit.slope + k).abs() < 2e-2);
        let alpha = fit.alpha.unwrap();
        assert!((alpha - 0.5).abs() < 0.05, "alpha {alpha}");
    }

    #[test]
    fn loglog_ratio_of_synthetic_profiles() {
        let p = 1.0;
        let spec = CurvatureSpec::sign_changing(p).unwrap();
        for k in [1.0, 1.3] {
            let prof = synthetic(spec, Some(3.0 * PI), |r| (-1.5 * r.ln() - k * r.ln().ln(), -1.5));
            let out = loglog_ratio(&prof, p, &[1e3, 1e5, 1e7]).unwrap();
            assert!(out.iter().all(|(_, q)| (q + k).abs() < 1e-12));
        }
        let prof = synthetic(spec, Some(3.5 * PI), |r| (-1.75 * r.ln(), -1.75));
        assert!(matches!(loglog_ratio(&prof, p, &[1e3]), Err(Error::Precondition(_))));
        let prof = synthetic(spec, Some(3.0 * PI), |r| (-1.5 * r.ln(), -1.5));
        assert!(matches!(loglog_ratio(&prof, p, &[2.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn bubble_diagnostics() {
        let spec = CurvatureSpec::constant(1.0).unwrap();
        let b = integrate(&spec, 2f64.ln(), &IntegratorControls::default()).unwrap();
        let fit = farfield_fit(&b, (1e3, 1e5)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-3);
        let g = gradient_decay(&b, (1e-2, 1e6)).unwrap();
        assert!((g - 2.0).abs() < 1e-9);

        let rep = diagnose(&b, &DiagnoseOptions::default()).unwrap();
        assert!(rep.pohozaev_residual.unwrap().abs() < 1e-8);
        assert!(rep.volume_residual.abs() < 1e-8);
        assert!((rep.kelvin_sup - 2f64.ln()).abs() < 1e-6);
        assert!(rep.monotone);
        assert!(rep.loglog_ratio.is_none());
    }
}
