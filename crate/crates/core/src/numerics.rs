//! Scalar kernels shared by the analytic modules: the principal branch of
//! the Lambert W function, a fixed-point solver for the `eta = L(mu(1 - eta))`
//! equations of G/M/1 queues, and golden-section minimization on an interval.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / E;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Intersection with `[lo, hi]`, or `None` when empty.
    pub fn clip(&self, lo: f64, hi: f64) -> Option<Self> {
        let lo = self.lo.max(lo);
        let hi = self.hi.min(hi);
        (lo < hi).then_some(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Principal branch `W0(x)` of the Lambert W function for real `x >= -1/e`.
///
/// Starts from the branch-point expansion near `-1/e`, `ln(1 + x)` for
/// moderate arguments and the asymptotic `L1 - L2 + L2/L1` for large ones,
/// then refines with Halley steps.
pub fn lambert_w0(x: f64) -> Result<f64> {
    lambert_w0_with(x, SolveSettings::default())
}

pub fn lambert_w0_with(x: f64, settings: SolveSettings) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w0 of non-finite {x}")));
    }
    if x < -INV_E - settings.abs_tol {
        return Err(Error::Domain(format!(
            "lambert_w0 argument {x} below branch point -1/e"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    // Distance from the branch point, clamped at zero for arguments within
    // tolerance below -1/e.
    let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
    if p < 1e-4 {
        // Series error is O(p^4), below double precision here.
        return Ok(-1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p);
    }

    let mut w = if x < -0.25 {
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..settings.max_iter {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        if step.abs() <= settings.abs_tol * (1.0 + next.abs()) {
            return Ok(next.max(-1.0));
        }
        w = next;
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iter,
        context: format!("lambert_w0({x})"),
    })
}

/// Number of plain substitution steps before falling back to bisection.
const PLAIN_STEPS: usize = 20;

/// Upper end of the bisection bracket `[0, 1 - eps]`.
const BRACKET_EPS: f64 = 1e-12;

/// Smallest fixed point of `f` on `[0, 1)` reached from `x0`.
///
/// Plain substitution is tried first. When the map contracts slowly
/// (`|f'| -> 1`, which happens as utilization approaches one) the solver
/// falls back to bisection of `f(x) - x` on `[0, 1 - eps]`.
pub fn fixed_point<F>(f: F, x0: f64, settings: SolveSettings) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut x = x0;
    for _ in 0..PLAIN_STEPS.min(settings.max_iter) {
        let fx = f(x);
        if !fx.is_finite() {
            break;
        }
        if (fx - x).abs() <= settings.abs_tol {
            // fx is one more substitution closer; keep whichever has the
            // smaller residual.
            let ffx = f(fx);
            return Ok(if (ffx - fx).abs() <= (fx - x).abs() {
                fx
            } else {
                x
            });
        }
        x = fx;
    }

    let h = |x: f64| f(x) - x;
    let mut lo = 0.0;
    let mut hi = 1.0 - BRACKET_EPS;
    let mut h_lo = h(lo);
    let h_hi = h(hi);
    if h_lo.abs() <= settings.abs_tol {
        return Ok(lo);
    }
    if h_lo.signum() == h_hi.signum() {
        return Err(Error::NonConvergence {
            iterations: PLAIN_STEPS,
            context: "fixed point not bracketed on [0, 1)".into(),
        });
    }
    for _ in 0..settings.max_iter {
        let mid = 0.5 * (lo + hi);
        let h_mid = h(mid);
        if h_mid.abs() <= settings.abs_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        if h_mid.signum() == h_lo.signum() {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iter,
        context: "fixed-point bisection".into(),
    })
}

/// Golden-section minimization of a unimodal `g` over `bounds`.
///
/// Returns `(x*, g(x*))`. The endpoints are compared against the interior
/// estimate so that monotone objectives report the boundary exactly.
pub fn minimize_1d<G>(g: G, bounds: Interval, settings: SolveSettings) -> Result<(f64, f64)>
where
    G: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let tol = 1e-9 * bounds.width();

    let (mut a, mut b) = (bounds.lo, bounds.hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    let mut converged = false;
    for _ in 0..settings.max_iter {
        if (b - a) <= tol {
            converged = true;
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: settings.max_iter,
            context: "golden-section search".into(),
        });
    }

    let mid = 0.5 * (a + b);
    let mut best = (mid, g(mid));
    for x in [bounds.lo, bounds.hi] {
        let gx = g(x);
        if gx <= best.1 {
            best = (x, gx);
        }
    }
    Ok(best)
}
