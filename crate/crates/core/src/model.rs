//! Curvature functions and the admissible total-curvature window.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total curvature of the round sphere, `4π`.
pub const LAMBDA_SPH: f64 = 4.0 * PI;

/// Minimal admissible total curvature `(2+p)π` for `K = 1 - |x|^p`.
pub fn lambda_star(p: f64) -> f64 {
    (2.0 + p) * PI
}

/// The curvature function `K(r)` on the right-hand side of `-Δu = K e^{2u}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CurvatureSpec {
    /// `K(r) = 1 - r^p`.
    SignChangingPower { p: f64 },
    /// `K(r) = (λ - r^p) e^{-r²}`.
    RegularizedPower { p: f64, lambda: f64 },
    /// `K(r) = k0`.
    Constant { k0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurvatureKind {
    SignChangingPower,
    RegularizedPower,
    Constant,
}

impl CurvatureSpec {
    pub fn sign_changing(p: f64) -> Result<Self> {
        let spec = CurvatureSpec::SignChangingPower { p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn regularized(p: f64, lambda: f64) -> Result<Self> {
        let spec = CurvatureSpec::RegularizedPower { p, lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(k0: f64) -> Result<Self> {
        let spec = CurvatureSpec::Constant { k0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CurvatureSpec::SignChangingPower { p } => {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!("p must be positive, got {p}")));
                }
            }
            CurvatureSpec::RegularizedPower { p, lambda } => {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!("p must be positive, got {p}")));
                }
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidSpec(format!("lambda must be positive, got {lambda}")));
                }
            }
            CurvatureSpec::Constant { k0 } => {
                if !k0.is_finite() {
                    return Err(Error::InvalidSpec(format!("k0 must be finite, got {k0}")));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> CurvatureKind {
        match self {
            CurvatureSpec::SignChangingPower { .. } => CurvatureKind::SignChangingPower,
            CurvatureSpec::RegularizedPower { .. } => CurvatureKind::RegularizedPower,
            CurvatureSpec::Constant { .. } => CurvatureKind::Constant,
        }
    }

    /// The power exponent, absent for constant curvature.
    pub fn p(&self) -> Option<f64> {
        match *self {
            CurvatureSpec::SignChangingPower { p } | CurvatureSpec::RegularizedPower { p, .. } => Some(p),
            CurvatureSpec::Constant { .. } => None,
        }
    }

    /// `K(0)`.
    pub fn central_value(&self) -> f64 {
        match *self {
            CurvatureSpec::SignChangingPower { .. } => 1.0,
            CurvatureSpec::RegularizedPower { lambda, .. } => lambda,
            CurvatureSpec::Constant { k0 } => k0,
        }
    }

    /// Radius where `K` changes sign, if it does.
    pub fn sign_change_radius(&self) -> Option<f64> {
        match *self {
            CurvatureSpec::SignChangingPower { .. } => Some(1.0),
            CurvatureSpec::RegularizedPower { p, lambda } => Some(lambda.powf(1.0 / p)),
            CurvatureSpec::Constant { .. } => None,
        }
    }

    /// Coefficient `c` in `Λ = c·vol - pw`, where `vol` and `pw` are the
    /// running integrals of the (damped) density without and with the `r^p` weight.
    pub fn volume_weight(&self) -> f64 {
        self.central_value()
    }

    /// Extra exponent `-r²` carried by the regularized kind.
    pub(crate) fn log_damping(&self, r: f64) -> f64 {
        match self {
            CurvatureSpec::RegularizedPower { .. } => -r * r,
            _ => 0.0,
        }
    }

    /// Admissible window, defined only for the sign-changing power.
    pub fn window(&self) -> Option<Window> {
        match *self {
            CurvatureSpec::SignChangingPower { p } => Some(window(p)),
            _ => None,
        }
    }
}

/// Evaluates `K(r)` for `r ≥ 0`.
pub fn eval_curvature(spec: &CurvatureSpec, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    match *spec {
        CurvatureSpec::SignChangingPower { p } => 1.0 - r.powf(p),
        CurvatureSpec::RegularizedPower { p, lambda } => (lambda - r.powf(p)) * (-r * r).exp(),
        CurvatureSpec::Constant { k0 } => k0,
    }
}

/// Interval `[(2+p)π, 4π)` of total curvatures admitting solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lambda_star: f64,
    pub lambda_sph: f64,
    pub nonempty: bool,
}

impl Window {
    /// Open-interval membership `(Λ_*, Λ_sph)`.
    pub fn contains_open(&self, lambda: f64) -> bool {
        lambda > self.lambda_star && lambda < self.lambda_sph
    }
}

pub fn window(p: f64) -> Window {
    let lambda_star = lambda_star(p);
    Window {
        lambda_star,
        lambda_sph: LAMBDA_SPH,
        nonempty: lambda_star < LAMBDA_SPH,
    }
}
