//! Total curvature and the integrals entering the Pohozaev identity, with
//! power-law closure of the far-field tails.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::FarFieldFit;
use crate::error::{Error, Result};
use crate::integrator::RadialProfile;
use crate::model::CurvatureSpec;

/// Tail closure is only trusted this far (in units of π) above an
/// exponent's critical value.
pub const TAIL_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub lambda_hat: f64,
    /// Estimate of `∫ e^{2u}`.
    pub v_hat: f64,
    /// Estimate of `∫ |x|^p e^{2u}`; absent for constant curvature.
    pub p_hat: Option<f64>,
    pub tail_fraction: f64,
    pub converged: bool,
    /// Radius where the computed integrals hand over to the closure.
    pub r_trunc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub dv: f64,
    pub dp: f64,
    pub dv_ok: bool,
    /// False near the endpoint `Λ = (2+p)π`, where `dp` is only a lower bound.
    pub dp_ok: bool,
}

/// `Λ(r) = -2π r u'(r)`.
pub fn local_total_curvature(profile: &RadialProfile, r: f64) -> Result<f64> {
    Ok(profile.node_at(r)?.lam)
}

/// Closes `∫_{|x|>R} e^{2u}` and `∫_{|x|>R} |x|^p e^{2u}` under
/// `e^{2u} ≈ e^{2C} r^{-Λ̂/π}`.
pub fn tail_extrapolate(profile: &RadialProfile, fit: &FarFieldFit, r_trunc: f64) -> Result<TailEstimate> {
    let lambda = profile
        .lambda_hat
        .ok_or_else(|| Error::NotConverged(profile.status.to_string()))?;
    if !(r_trunc > 0.0) {
        return Err(Error::Precondition(format!("truncation radius must be positive, got {r_trunc}")));
    }
    if fit.fit_window.1 > r_trunc * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "fit window ends at {:e}, beyond truncation radius {r_trunc:e}",
            fit.fit_window.1
        )));
    }
    // the Gaussian damping makes both tails vanish
    if let CurvatureSpec::RegularizedPower { .. } = profile.spec {
        return Ok(TailEstimate { dv: 0.0, dp: 0.0, dv_ok: true, dp_ok: true });
    }

    let s = lambda / PI;
    let amp = 2.0 * PI * (2.0 * fit.c).exp();
    let ln_r = r_trunc.ln();
    let power_tail = |excess: f64| amp * (-excess * ln_r).exp() / excess;

    let (dv, dv_ok) = if s - 2.0 > TAIL_MARGIN {
        (power_tail(s - 2.0), true)
    } else {
        (f64::INFINITY, false)
    };
    let (dp, dp_ok) = match profile.spec.p() {
        None => (0.0, true),
        Some(p) => {
            let excess = s - 2.0 - p;
            if excess > TAIL_MARGIN {
                (power_tail(excess), true)
            } else {
                // one e-fold of radius beyond R under the same density
                let ex = 2.0 + p - s;
                let fold = if ex.abs() < 1e-12 { 1.0 } else { (ex.exp() - 1.0) / ex };
                (amp * (ex * ln_r).exp() * fold, false)
            }
        }
    };
    Ok(TailEstimate { dv, dp, dv_ok, dp_ok })
}

/// Pohozaev quantities with the computed integrals truncated at the last node.
pub fn pohozaev_quantities(profile: &RadialProfile, fit: &FarFieldFit) -> Result<IntegralReport> {
    pohozaev_quantities_at(profile, fit, profile.r_last())
}

/// Pohozaev quantities with the computed integrals truncated at `r_trunc`.
pub fn pohozaev_quantities_at(profile: &RadialProfile, fit: &FarFieldFit, r_trunc: f64) -> Result<IntegralReport> {
    if !profile.is_converged() {
        return Err(Error::NotConverged(profile.status.to_string()));
    }
    let lambda_hat = profile.lambda_hat.expect("converged profile carries Λ̂");
    let node = profile.node_at(r_trunc)?;
    let tail = tail_extrapolate(profile, fit, r_trunc)?;
    let v_hat = node.vol + tail.dv;
    let has_weight = profile.spec.p().is_some();
    let p_hat = has_weight.then_some(node.pw + tail.dp);
    let total = v_hat + p_hat.unwrap_or(0.0);
    Ok(IntegralReport {
        lambda_hat,
        v_hat,
        p_hat,
        tail_fraction: (tail.dv + if has_weight { tail.dp } else { 0.0 }) / total,
        converged: tail.dv_ok && tail.dp_ok,
        r_trunc,
    })
}
