//! Reference quadrature for `∫_0^T φ(a + b t) t^k dt`.
//!
//! Adaptive Simpson, split at the root of `a + b t`. Pieces that end at the
//! root are mapped through `t = root ± h v^m` with `m (r + 1) >= 4` so the
//! integrand is at least C^3 in `v`. Shares no code with the closed forms.

#![allow(dead_code)]

const MAX_DEPTH: u32 = 40;
const RTOL: f64 = 1e-13;

fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi))
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_mid: f64,
    f_hi: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
    let (f_lm, f_rm) = (f(lm), f(rm));
    let left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
    let right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adapt(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * eps, depth + 1)
        + adapt(f, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * eps, depth + 1)
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, eps: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (f_lo, f_mid, f_hi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
    adapt(f, lo, hi, f_lo, f_mid, f_hi, whole, eps, 0)
}

fn composite(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|p| simpson(f, lo + p as f64 * h, lo + (p + 1) as f64 * h))
        .sum()
}

#[derive(Clone, Copy)]
enum RootAt {
    None,
    Lo,
    Hi,
}

/// Integrand on one piece, in the substituted variable when the piece
/// touches the root. `magnitude` drops the sign of φ.
fn piece_integrand(
    a: f64,
    b: f64,
    r: f64,
    k: u32,
    signed: bool,
    magnitude: bool,
    lo: f64,
    hi: f64,
    root: RootAt,
) -> (Box<dyn Fn(f64) -> f64>, f64, f64) {
    let phi = move |u: f64| -> f64 {
        let mag = if r == 0.0 { 1.0 } else { u.abs().powf(r) };
        if signed && !magnitude {
            if u > 0.0 {
                mag
            } else if u < 0.0 {
                -mag
            } else {
                0.0
            }
        } else {
            mag
        }
    };
    let h = hi - lo;
    match root {
        RootAt::None => (Box::new(move |t: f64| phi(a + b * t) * t.powi(k as i32)), lo, hi),
        RootAt::Lo | RootAt::Hi => {
            let m = (4.0 / (r + 1.0)).ceil().max(1.0);
            let side = if matches!(root, RootAt::Lo) { 1.0 } else { -1.0 };
            let sign_u = side * b.signum();
            let scale = (b.abs() * h).powf(r);
            let f = move |v: f64| -> f64 {
                if v == 0.0 {
                    return 0.0;
                }
                let t = if side > 0.0 { lo + h * v.powf(m) } else { hi - h * v.powf(m) };
                let mag = scale * v.powf(m * (r + 1.0) - 1.0) * m * h;
                let s = if signed && !magnitude { sign_u } else { 1.0 };
                s * mag * t.powi(k as i32)
            };
            (Box::new(f), 0.0, 1.0)
        }
    }
}

fn pieces(a: f64, b: f64, t_end: f64) -> Vec<(f64, f64, RootAt)> {
    if b == 0.0 {
        return vec![(0.0, t_end, RootAt::None)];
    }
    let root = -a / b;
    if root > 0.0 && root < t_end {
        vec![(0.0, root, RootAt::Hi), (root, t_end, RootAt::Lo)]
    } else if root == 0.0 {
        vec![(0.0, t_end, RootAt::Lo)]
    } else if root == t_end {
        vec![(0.0, t_end, RootAt::Hi)]
    } else {
        vec![(0.0, t_end, RootAt::None)]
    }
}

fn integrate(a: f64, b: f64, r: f64, k: u32, t_end: f64, signed: bool, magnitude: bool) -> f64 {
    let parts = pieces(a, b, t_end);
    let integrands: Vec<_> = parts
        .iter()
        .map(|&(lo, hi, root)| piece_integrand(a, b, r, k, signed, magnitude, lo, hi, root))
        .collect();
    let coarse: f64 = integrands
        .iter()
        .map(|(f, lo, hi)| composite(&|x| f(x).abs(), *lo, *hi, 64))
        .sum();
    let eps = RTOL * coarse.max(f64::MIN_POSITIVE);
    integrands
        .iter()
        .map(|(f, lo, hi)| adaptive_simpson(f.as_ref(), *lo, *hi, eps / integrands.len() as f64))
        .sum()
}

/// Reference value of `∫_0^T φ(a + b t) t^k dt`; `signed` selects
/// `(u)^r_±` over `|u|^r`.
pub fn moment(a: f64, b: f64, r: f64, k: u32, t_end: f64, signed: bool) -> f64 {
    integrate(a, b, r, k, t_end, signed, false)
}

/// `∫_0^T |a + b t|^r t^k dt`, the natural scale for relative errors of
/// either parity.
pub fn moment_abs_scale(a: f64, b: f64, r: f64, k: u32, t_end: f64) -> f64 {
    integrate(a, b, r, k, t_end, false, true)
}
