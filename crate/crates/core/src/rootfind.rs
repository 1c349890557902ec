//! Bracketing root finder for scalar equations (Brent's method).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentOptions {
    /// Absolute tolerance on the abscissa.
    pub x_tol: f64,
    /// Stop as soon as `|f(x)| ≤ f_tol`.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        BrentOptions {
            x_tol: 1e-14,
            f_tol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Finds a zero of `f` in `[a, b]`, given `f(a)` and `f(b)` of opposite sign.
///
/// Inverse quadratic interpolation and secant steps are accepted only while
/// they shrink the bracket fast enough; otherwise the step falls back to bisection.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, opts: &BrentOptions) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a.min(b), hi: a.max(b) });
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.x_tol;
        let m = 0.5 * (c - b);
        if fb.abs() <= opts.f_tol || m.abs() <= tol || fb == 0.0 {
            return Ok(Root { x: b, fx: fb, iterations: iter });
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::RootFinder {
        iterations: opts.max_iter,
        residual: fb.abs(),
    })
}
