//! Exact integrals of signed powers of linear functions.
//!
//! On every edge the combination `w_e = Σ α_is B_is` is linear, so all the
//! integrals the solver and the verifier need are of the form
//!
//! ```text
//! ∫_0^T φ(a + b t) t^k dt,    φ(u) = (u)^r_± = |u|^r sign(u)   or   φ(u) = |u|^r
//! ```
//!
//! with `r > -1` and `k <= 2`. They are evaluated with the antiderivatives
//! `∫ (u)^s_± du = |u|^{s+1} / (s+1)` and `∫ |u|^s du = (u)^{s+1}_± / (s+1)`
//! after expanding `t^k = ((u - a) / b)^k`. When `|b T| <= |a| / 2` that
//! expansion cancels badly, and the binomial series of `(1 + ρ s)^r` is
//! summed instead.

use thiserror::Error;

use crate::basis::BasisSet;
use crate::network::accumulate_edge_forms;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CalculusError {
    #[error("exponent {0} must be greater than -1")]
    ExponentOutOfRange(f64),
}

/// `(x)^r_± = |x|^r sign(x)`, with `(0)^r_± = 0`.
pub fn signed_power(x: f64, r: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(r).copysign(x)
    }
}

/// `w(t) = a + b t` on one edge, in the edge's canonical orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLinearForm {
    pub edge: usize,
    pub a: f64,
    pub b: f64,
}

impl EdgeLinearForm {
    pub fn new(edge: usize, a: f64, b: f64) -> Self {
        Self { edge, a, b }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    /// `(u)^r_±`
    Signed,
    /// `|u|^r`
    Abs,
}

impl Power {
    fn apply(self, u: f64, r: f64) -> f64 {
        match self {
            Power::Signed => signed_power(u, r),
            Power::Abs => {
                if r == 0.0 {
                    1.0
                } else {
                    u.abs().powf(r)
                }
            }
        }
    }

    /// The other parity, i.e. the kind of `φ(u) u` for odd powers of `u`.
    fn flip(self) -> Self {
        match self {
            Power::Signed => Power::Abs,
            Power::Abs => Power::Signed,
        }
    }
}

/// `∫_0^T (a + b t)^r_± t^k dt`.
pub fn moment_integral(a: f64, b: f64, r: f64, k: u32, t_end: f64) -> Result<f64, CalculusError> {
    power_moment(Power::Signed, a, b, r, k, t_end)
}

/// `∫_0^T |a + b t|^r t^k dt`.
pub fn abs_moment_integral(a: f64, b: f64, r: f64, k: u32, t_end: f64) -> Result<f64, CalculusError> {
    power_moment(Power::Abs, a, b, r, k, t_end)
}

const SERIES_RATIO: f64 = 0.5;
const SERIES_MAX_TERMS: usize = 400;

pub fn power_moment(
    kind: Power,
    a: f64,
    b: f64,
    r: f64,
    k: u32,
    t_end: f64,
) -> Result<f64, CalculusError> {
    if !(r > -1.0) {
        return Err(CalculusError::ExponentOutOfRange(r));
    }
    if t_end == 0.0 {
        return Ok(0.0);
    }
    let kp1 = (k + 1) as f64;
    if kind == Power::Abs && r == 0.0 {
        return Ok(t_end.powi(k as i32 + 1) / kp1);
    }
    if b == 0.0 {
        if a == 0.0 {
            return Ok(if kind == Power::Abs && r < 0.0 { f64::INFINITY } else { 0.0 });
        }
        return Ok(kind.apply(a, r) * t_end.powi(k as i32 + 1) / kp1);
    }

    let rho = if a != 0.0 { b * t_end / a } else { f64::INFINITY };
    if rho.abs() <= SERIES_RATIO {
        // φ(a + b T s) = φ(a) (1 + ρ s)^r with 1 + ρ s > 0 on [0, 1].
        let mut coeff = 1.0; // binom(r, n) ρ^n
        let mut sum = 1.0 / kp1;
        for n in 1..SERIES_MAX_TERMS {
            coeff *= (r - (n - 1) as f64) / n as f64 * rho;
            let term = coeff / (n as f64 + kp1);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() || coeff == 0.0 {
                break;
            }
        }
        return Ok(kind.apply(a, r) * t_end.powi(k as i32 + 1) * sum);
    }

    let (u0, u1) = (a, a + b * t_end);
    let mut sum = 0.0;
    for j in 0..=k {
        let integrand = if j % 2 == 0 { kind } else { kind.flip() };
        let s = r + j as f64 + 1.0;
        // Antiderivative of φ(u) u^j: signed integrands integrate to |u|^s,
        // absolute ones to (u)^s_±.
        let anti = |u: f64| match integrand {
            Power::Signed => u.abs().powf(s),
            Power::Abs => signed_power(u, s),
        } / s;
        let c = binomial(k, j) * (-a).powi((k - j) as i32);
        sum += c * (anti(u1) - anti(u0));
    }
    Ok(sum / b.powi(k as i32 + 1))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn moment(kind: Power, w: &EdgeLinearForm, r: f64, k: u32, length: f64) -> f64 {
    power_moment(kind, w.a, w.b, r, k, length).expect("exponent checked by caller")
}

/// `[∫ (w)^{q-1}_±, ∫ (w)^{q-1}_± t]` over one edge.
fn residual_moments(w: &EdgeLinearForm, length: f64, q: f64) -> [f64; 2] {
    [0, 1].map(|k| moment(Power::Signed, w, q - 1.0, k, length))
}

/// `(q - 1) [∫ |w|^{q-2} t^k]_{k=0,1,2}` over one edge, regularized where
/// `w` vanishes identically and `q < 2`.
fn hessian_moments(w: &EdgeLinearForm, length: f64, q: f64) -> [f64; 3] {
    let r = q - 2.0;
    if r < 0.0 {
        let eps = 1e-12 * (1.0 + w.a.abs() + (w.b * length).abs());
        if w.a.abs().max((w.a + w.b * length).abs()) < eps {
            let floor = (q - 1.0) * eps.powf(r);
            return [0, 1, 2].map(|k| floor * length.powi(k + 1) / (k + 1) as f64);
        }
    }
    [0, 1, 2].map(|k| (q - 1.0) * moment(Power::Abs, w, r, k, length))
}

/// `∫ |w|^q` over one edge.
pub(crate) fn edge_energy(w: &EdgeLinearForm, length: f64, q: f64) -> f64 {
    moment(Power::Abs, w, q, 0, length)
}

fn check_q(q: f64) {
    assert!(q > 1.0, "conjugate exponent must exceed 1, got {q}");
}

/// Hats of `B_kl` sorted by edge id, which fixes the summation order.
fn sorted_hats(basis: &BasisSet, kl: usize) -> [crate::calculus::EdgeLinearForm; 3] {
    let mut hats = basis.get(kl).hats;
    hats.sort_by_key(|h| h.edge);
    hats
}

/// `∫_E (Σ α_is B_is)^{q-1}_± B_kl dt`.
pub fn residual_entry(alpha: &[f64], basis: &BasisSet, kl: usize, q: f64) -> f64 {
    check_q(q);
    let forms = accumulate_edge_forms(alpha, basis);
    let lengths = basis.edge_lengths();
    sorted_hats(basis, kl)
        .iter()
        .map(|h| {
            let m = residual_moments(&forms[h.edge], lengths[h.edge], q);
            h.a * m[0] + h.b * m[1]
        })
        .sum()
}

/// All of `∫_E (Σ α B)^{q-1}_± B_kl dt`, in basis order.
pub fn residual_integrals(alpha: &[f64], basis: &BasisSet, q: f64) -> Vec<f64> {
    check_q(q);
    let forms = accumulate_edge_forms(alpha, basis);
    let lengths = basis.edge_lengths();
    let moments: Vec<[f64; 2]> = forms
        .iter()
        .zip(lengths)
        .map(|(w, &l)| {
            if basis.hats_on_edge(w.edge).is_empty() {
                [0.0; 2]
            } else {
                residual_moments(w, l, q)
            }
        })
        .collect();
    (0..basis.len())
        .map(|kl| {
            sorted_hats(basis, kl)
                .iter()
                .map(|h| {
                    let m = moments[h.edge];
                    h.a * m[0] + h.b * m[1]
                })
                .sum()
        })
        .collect()
}

fn hat_product_weight(h1: &EdgeLinearForm, h2: &EdgeLinearForm, m: &[f64; 3]) -> f64 {
    h1.a * h2.a * m[0] + (h1.a * h2.b + h1.b * h2.a) * m[1] + h1.b * h2.b * m[2]
}

/// `(q - 1) ∫_E |Σ α B|^{q-2} B_is B_kl dt`.
pub fn hessian_entry(alpha: &[f64], basis: &BasisSet, is: usize, kl: usize, q: f64) -> f64 {
    check_q(q);
    let forms = accumulate_edge_forms(alpha, basis);
    let lengths = basis.edge_lengths();
    let other = basis.get(kl);
    sorted_hats(basis, is)
        .iter()
        .filter_map(|h1| other.hat_on(h1.edge).map(|h2| (h1, h2)))
        .map(|(h1, h2)| {
            let m = hessian_moments(&forms[h1.edge], lengths[h1.edge], q);
            hat_product_weight(h1, h2, &m)
        })
        .sum()
}

/// The full Hessian of the dual objective as a dense row-major matrix.
pub fn hessian_matrix(alpha: &[f64], basis: &BasisSet, q: f64) -> Vec<Vec<f64>> {
    check_q(q);
    let n = basis.len();
    let forms = accumulate_edge_forms(alpha, basis);
    let lengths = basis.edge_lengths();
    let mut h = vec![vec![0.0; n]; n];
    for (e, w) in forms.iter().enumerate() {
        let hats = basis.hats_on_edge(e);
        if hats.is_empty() {
            continue;
        }
        let m = hessian_moments(w, lengths[e], q);
        for (p1, h1) in hats {
            for (p2, h2) in hats {
                h[*p1][*p2] += hat_product_weight(h1, h2, &m);
            }
        }
    }
    h
}

/// `Φ(α) = (1/q) ∫_E |Σ α B|^q dt - Σ α_kl d_kl`.
///
/// Strictly convex; its gradient is the residual of the characterization
/// system.
pub fn dual_objective(alpha: &[f64], basis: &BasisSet, q: f64, d: &[f64]) -> f64 {
    check_q(q);
    let forms = accumulate_edge_forms(alpha, basis);
    let energy: f64 = forms
        .iter()
        .zip(basis.edge_lengths())
        .map(|(w, &l)| edge_energy(w, l, q))
        .sum();
    let linear: f64 = alpha.iter().zip(d).map(|(a, d)| a * d).sum();
    energy / q - linear
}

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;
