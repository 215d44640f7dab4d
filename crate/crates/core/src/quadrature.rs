//! Adaptive Simpson quadrature.

use crate::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integral estimate with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the Richardson error estimates over accepted panels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// interval bisection with the standard `|S2 - S1| <= 15 tol` acceptance
/// test and Richardson correction.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, inf)"));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut evaluations = 3;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut error_estimate = 0.0;
    let value = refine(
        &f,
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        MAX_DEPTH,
        &mut evaluations,
        &mut error_estimate,
    )?;
    Ok(Quadrature {
        value,
        error_estimate,
        evaluations,
    })
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine(
    f: &impl Fn(f64) -> f64,
    p: Panel,
    tol: f64,
    depth: u32,
    evaluations: &mut usize,
    error_estimate: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    *evaluations += 2;
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * tol {
        *error_estimate += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NoConvergence(format!(
            "adaptive Simpson exhausted its depth on [{}, {}] (panel error {:e}, tol {:e})",
            p.a,
            p.b,
            delta.abs() / 15.0,
            tol
        )));
    }
    let l = refine(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        0.5 * tol,
        depth - 1,
        evaluations,
        error_estimate,
    )?;
    let r = refine(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        0.5 * tol,
        depth - 1,
        evaluations,
        error_estimate,
    )?;
    Ok(l + r)
}
