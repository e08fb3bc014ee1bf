//! Adaptive Simpson quadrature.
//!
//! The smoothing kernels integrate log-derivatives that are flat outside a
//! cutoff window and steep inside it, so callers pass explicit break points
//! where the integrand changes character.

const MAX_DEPTH: u32 = 50;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the Richardson error estimates over accepted panels.
    pub error_estimate: f64,
    /// False if some panel hit the depth limit before meeting its tolerance.
    pub converged: bool,
}

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32, acc: &mut Quadrature) {
    let lm = 0.5 * (p.a + p.m);
    let rm = 0.5 * (p.m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, p.m, p.fa, flm, p.fm);
    let right = simpson(p.m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if !delta.is_finite() {
        acc.converged = false;
        acc.value = f64::NAN;
        return;
    }
    // Below the rounding floor further splitting cannot help.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= floor || depth == 0 || (p.b - p.a).abs() <= f64::EPSILON * p.m.abs() {
        if depth == 0 && delta.abs() > 15.0 * tol {
            acc.converged = false;
        }
        acc.value += left + right + delta / 15.0;
        acc.error_estimate += delta.abs() / 15.0;
        return;
    }
    refine(f, Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * tol, depth - 1, acc);
    refine(f, Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, 0.5 * tol, depth - 1, acc);
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// `a > b` is allowed and yields the negated integral.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates over consecutive intervals of `breaks`, splitting the tolerance
/// proportionally to interval length.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Quadrature {
    let mut acc = Quadrature { value: 0.0, error_estimate: 0.0, converged: true };
    if breaks.len() < 2 {
        return acc;
    }
    let total: f64 = breaks.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if total == 0.0 {
        return acc;
    }
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let share = tol * (b - a).abs() / total;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        refine(&f, Panel { a, m, b, fa, fm, fb, whole }, share, MAX_DEPTH, &mut acc);
    }
    acc
}

/// Iterated adaptive Simpson over the region `x ∈ [x0, x1]`,
/// `y ∈ [lo(x), hi(x)]`.
pub fn integrate_2d<F, L, H>(f: F, x0: f64, x1: f64, lo: L, hi: H, tol: f64) -> Quadrature
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let width = (x1 - x0).abs().max(f64::MIN_POSITIVE);
    let inner_tol = tol / width;
    integrate(
        |x| {
            let (a, b) = (lo(x), hi(x));
            integrate(|y| f(x, y), a, b, inner_tol).value
        },
        x0,
        x1,
        tol,
    )
}
