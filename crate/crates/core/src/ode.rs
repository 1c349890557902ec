//! Dormand–Prince 5(4) embedded pair with PI step-size control.

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StepError {
    /// Step size fell below the representable minimum.
    Underflow,
    /// The right-hand side produced a non-finite value that step rejection could not cure.
    NonFinite,
}

pub(crate) struct Dopri5<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Derivative at `(t, y)`; reused as the first stage (FSAL).
    pub dy: [f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
    h_max: f64,
    err_old: f64,
    rejected_last: bool,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl<const N: usize> Dopri5<N> {
    pub fn new<F>(f: &mut F, t0: f64, y0: [f64; N], rtol: f64, atol: f64, h_max: f64) -> Self
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let dy = f(t0, &y0);
        let mut s = Dopri5 {
            t: t0,
            y: y0,
            dy,
            h: 0.0,
            rtol,
            atol,
            h_max,
            err_old: 1e-4,
            rejected_last: false,
            n_accepted: 0,
            n_rejected: 0,
        };
        s.h = s.initial_step(f);
        s
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }

    // Hairer–Nørsett–Wanner starting step heuristic.
    fn initial_step<F>(&self, f: &mut F) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.scale(self.y[i], self.y[i]);
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.dy[i] / sc).powi(2);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(self.h_max);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.dy)]);
        let f1 = f(self.t + h0, &y1);
        let mut d2 = 0.0;
        for ((a, b), y) in f1.iter().zip(&self.dy).zip(&self.y) {
            d2 += ((a - b) / self.scale(*y, *y)).powi(2);
        }
        d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Advances one accepted step, never beyond `t_end`.
    pub fn step<F>(&mut self, f: &mut F, t_end: f64) -> Result<(), StepError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let expo = 0.2 - 0.75 * BETA;
        loop {
            let mut h = self.h.min(self.h_max);
            let mut last = false;
            if self.t + h >= t_end {
                h = t_end - self.t;
                last = true;
            }
            if h.abs() <= 1e-14 * self.t.abs().max(1.0) {
                return Err(StepError::Underflow);
            }
            let t = self.t;
            let y = &self.y;
            let k1 = self.dy;
            let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t + h, &y_new);

            let mut err = 0.0;
            let mut finite = true;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.scale(y[i], y_new[i]);
                err += (e / sc).powi(2);
                finite &= y_new[i].is_finite() && k7[i].is_finite();
            }
            // error per unit step: global error then scales like tol^{5/4}
            err = (err / N as f64).sqrt() / h.abs();
            if !finite || !err.is_finite() {
                // shrink hard and retry
                self.h = h * FAC_MIN;
                self.n_rejected += 1;
                self.rejected_last = true;
                if self.h.abs() <= 1e-14 * self.t.abs().max(1.0) {
                    return Err(StepError::NonFinite);
                }
                continue;
            }

                let fac11 = err.powf(expo);
            if err <= 1.0 {
                let mut fac = fac11 / self.err_old.powf(BETA);
                fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN) / SAFETY;
                let mut h_new = h / fac;
                if self.rejected_last {
                    h_new = h_new.min(h);
                }
                self.err_old = err.max(1e-4);
                self.rejected_last = false;
                self.t = if last { t_end } else { t + h };
                self.y = y_new;
                self.dy = k7;
                self.h = h_new.min(self.h_max);
                self.n_accepted += 1;
                return Ok(());
            }
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            self.n_rejected += 1;
            self.rejected_last = true;
        }
    }
}
