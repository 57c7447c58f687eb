//! Numerical tolerances and the monotone root finder shared by the Orlicz code.

/// Tolerances used by every iterative routine in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for bracketed root finding (Luxemburg norms, inverses).
    pub root_rel: f64,
    /// Iteration cap for bracketed root finding.
    pub root_max_iter: usize,
    /// Relative tolerance for the tail-integral quadrature.
    pub quad_rel: f64,
    /// Relative headroom allowed when comparing both sides of an inequality.
    pub check_rel: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    root_rel: 1e-12,
    root_max_iter: 200,
    quad_rel: 1e-8,
    check_rel: 1e-9,
};

/// `a <= b` up to the relative headroom `rel`.
pub fn le_rel(a: f64, b: f64, rel: f64) -> bool {
    a <= b + rel * libm::fabs(b).max(libm::fabs(a))
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = libm::fabs(a).max(libm::fabs(b));
    if scale == 0.0 {
        0.0
    } else {
        libm::fabs(a - b) / scale
    }
}

/// Solves `f(t) = target` for an increasing `f: (0, inf) -> (0, inf)`.
///
/// `f` returns `(f(t), f'(t))`. The search runs on `x = ln t` with a Newton step
/// safeguarded by a sign-change bracket, so it never leaves the bracket and falls
/// back to bisection whenever the Newton step is unusable. `guess` seeds the
/// bracket expansion.
pub fn invert_increasing<F>(f: F, target: f64, guess: f64) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    debug_assert!(target > 0.0);
    let ln_target = libm::log(target);
    // g(x) = ln f(e^x) - ln target, increasing in x.
    let eval = |x: f64| -> (f64, f64) {
        let t = libm::exp(x);
        let (v, dv) = f(t);
        let g = if v > 0.0 {
            libm::log(v) - ln_target
        } else {
            f64::NEG_INFINITY
        };
        let dg = if v > 0.0 { t * dv / v } else { f64::NAN };
        (g, dg)
    };

    let x0 = if guess.is_finite() && guess > 0.0 {
        libm::log(guess)
    } else {
        0.0
    };
    let (g0, d0) = eval(x0);
    if g0 == 0.0 {
        return libm::exp(x0);
    }
    // A good guess gives a short Newton step; size the first bracket probe by it.
    let newton0 = x0 - g0 / d0;
    let mut step = if newton0.is_finite() {
        (1.5 * libm::fabs(newton0 - x0)).clamp(1e-12, 1.0)
    } else {
        1.0
    };
    let (mut lo, mut hi);
    if g0 < 0.0 {
        lo = x0;
        hi = x0 + step;
        while eval(hi).0 < 0.0 {
            lo = hi;
            step *= 2.0;
            hi += step;
            if hi > 700.0 {
                return f64::INFINITY;
            }
        }
    } else {
        hi = x0;
        lo = x0 - step;
        while eval(lo).0 > 0.0 {
            hi = lo;
            step *= 2.0;
            lo -= step;
            if lo < -700.0 {
                return 0.0;
            }
        }
    }

    let mut x = if newton0 > lo && newton0 < hi {
        newton0
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..TOLERANCES.root_max_iter {
        let (g, dg) = eval(x);
        if g == 0.0 {
            return libm::exp(x);
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - g / dg;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if libm::fabs(next - x) <= 1e-15 * (1.0 + libm::fabs(x)) || hi - lo <= 1e-15 {
            return libm::exp(next);
        }
        x = next;
    }
    libm::exp(x)
}
