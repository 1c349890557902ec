//! The shooting map `u(0) ↦ Λ` and its inversion.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorControls, RadialProfile, Status};
use crate::model::{CurvatureSpec, LAMBDA_SPH};
use crate::rootfind::{brent, BrentOptions};

/// Outcome of a single shot.
#[derive(Debug, Clone, Serialize)]
pub struct ShootingResult {
    pub u0: f64,
    /// Finite iff the shot converged.
    pub lambda_hat: Option<f64>,
    pub status: Status,
    #[serde(skip)]
    pub profile: Arc<RadialProfile>,
}

impl ShootingResult {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Accepted `|Λ̂ - target|`.
    pub tol: f64,
    /// Search interval for `u(0)`; kind-dependent defaults when absent.
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
    /// First increment of the geometric bracket expansion.
    pub initial_step: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6 * LAMBDA_SPH,
            bracket_lo: None,
            bracket_hi: None,
            initial_step: 0.25,
            max_iter: 200,
        }
    }
}

/// Default `(lo, hi, start)` of the `u(0)` search for each curvature kind.
pub fn default_bracket(spec: &CurvatureSpec) -> (f64, f64, f64) {
    match *spec {
        // every solution has u(0) ≥ ½ log(Λ/π) ≥ log √(p+2)
        CurvatureSpec::SignChangingPower { p } => {
            let lo = (2.0 + p).sqrt().ln() + 1e-3;
            (lo, 25.0, lo)
        }
        // λ e^{2u(0)} = 1 marks the scale where the central curvature is felt
        CurvatureSpec::RegularizedPower { lambda, .. } => {
            let centre = -0.5 * lambda.ln();
            (centre - 20.0, centre + 25.0, centre)
        }
        CurvatureSpec::Constant { k0 } => {
            let centre = if k0 > 0.0 { -0.5 * k0.ln() } else { 0.0 };
            (centre - 20.0, centre + 20.0, centre)
        }
    }
}

/// Integrates one shot and reads off the extrapolated total curvature.
pub fn lambda_of_u0(spec: &CurvatureSpec, u0: f64, controls: &IntegratorControls) -> Result<ShootingResult> {
    let profile = integrate(spec, u0, controls)?;
    Ok(ShootingResult {
        u0,
        lambda_hat: profile.lambda_hat,
        status: profile.status,
        profile: Arc::new(profile),
    })
}

/// Value of `Λ` used for bracketing; failed shots count as below the window.
fn effective_lambda(spec: &CurvatureSpec, shot: &ShootingResult) -> f64 {
    match shot.lambda_hat {
        Some(l) if shot.is_converged() => l,
        _ => match spec.window() {
            Some(w) => w.lambda_star,
            None => -LAMBDA_SPH,
        },
    }
}

/// Finds `u(0)` whose shot has total curvature `target`.
pub fn solve_for_lambda(
    spec: &CurvatureSpec,
    target: f64,
    controls: &IntegratorControls,
    opts: &SolverOptions,
) -> Result<ShootingResult> {
    spec.validate()?;
    controls.validate()?;
    if !target.is_finite() {
        return Err(Error::Precondition(format!("target must be finite, got {target}")));
    }
    if let CurvatureSpec::RegularizedPower { .. } = spec {
        if !(target > 0.0 && target < LAMBDA_SPH) {
            return Err(Error::Precondition(format!(
                "regularized target must lie in (0, 4π), got {}π",
                target / std::f64::consts::PI
            )));
        }
    }

    let (def_lo, def_hi, def_start) = default_bracket(spec);
    let lo = opts.bracket_lo.unwrap_or(def_lo);
    let hi = opts.bracket_hi.unwrap_or(def_hi);
    let start = def_start.clamp(lo, hi);
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty bracket [{lo}, {hi}]")));
    }

    let mut shots: Vec<ShootingResult> = Vec::new();
    let mut first_error: Option<Error> = None;
    let mut eval = |u0: f64, shots: &mut Vec<ShootingResult>| -> f64 {
        match lambda_of_u0(spec, u0, controls) {
            Ok(shot) => {
                let f = effective_lambda(spec, &shot) - target;
                shots.push(shot);
                f
            }
            Err(e) => {
                first_error.get_or_insert(e);
                f64::NAN
            }
        }
    };

    let f_start = eval(start, &mut shots);
    if f_start.is_nan() {
        return Err(first_error.unwrap());
    }
    if f_start.abs() <= opts.tol && shots.last().is_some_and(|s| s.is_converged()) {
        return Ok(shots.pop().unwrap());
    }

    // march geometrically away from the start in the direction that should
    // raise (or lower) Λ, then the other way
    let mut bracket = None;
    for dir in [f_start < 0.0, f_start > 0.0] {
        let sign = if dir { 1.0 } else { -1.0 };
        let (mut x_prev, mut f_prev) = (start, f_start);
        let mut step = opts.initial_step;
        loop {
            let x = (x_prev + sign * step).clamp(lo, hi);
            if x == x_prev {
                break;
            }
            let fx = eval(x, &mut shots);
            if fx.is_nan() {
                return Err(first_error.unwrap());
            }
            if fx.signum() != f_prev.signum() || fx == 0.0 {
                bracket = Some((x_prev, f_prev, x, fx));
                break;
            }
            x_prev = x;
            f_prev = fx;
            step *= 2.0;
        }
        if bracket.is_some() {
            break;
        }
    }
    let Some((a, fa, b, fb)) = bracket else {
        return Err(Error::NoBracket { lo, hi });
    };

    let brent_opts = BrentOptions {
        x_tol: 1e-15,
        f_tol: opts.tol,
        max_iter: opts.max_iter,
    };
    let root = brent(|x| eval(x, &mut shots), a, b, fa, fb, &brent_opts)?;
    if let Some(e) = first_error {
        return Err(e);
    }
    let shot = shots
        .into_iter()
        .rev()
        .find(|s| s.u0 == root.x)
        .expect("root abscissa was evaluated");
    match shot.lambda_hat {
        Some(l) if shot.is_converged() && (l - target).abs() <= opts.tol => Ok(shot),
        _ => Err(Error::RootFinder {
            iterations: root.iterations,
            residual: root.fx.abs(),
        }),
    }
}

/// One shot per grid point, evaluated in parallel, order preserved.
pub fn sweep(spec: &CurvatureSpec, u0_grid: &[f64], controls: &IntegratorControls) -> Result<Vec<ShootingResult>> {
    if u0_grid.is_empty() {
        return Err(Error::Precondition("u0 grid is empty".into()));
    }
    u0_grid.par_iter().map(|&u0| lambda_of_u0(spec, u0, controls)).collect()
}
