//! The optimal curve network in closed form.
//!
//! On each edge the second derivative is `f''(t) = (w(t))^{q-1}_±` with `w`
//! linear. Writing `G1(t) = ∫_0^t f''` and `G2(t) = ∫_0^t G1`, the curve is
//! `f(t) = z_i + c1 t + G2(t)` with `c1` fixed by `f(‖e‖) = z_j`.

use thiserror::Error;

use crate::basis::BasisSet;
use crate::calculus::{edge_energy, power_moment, EdgeLinearForm, Power};
use crate::mesh::{StarKind, Triangulation};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum NetworkError {
    #[error("parameter {t} is outside [0, {length}]")]
    OutOfRange { t: f64, length: f64 },

    #[error("at least 2 samples per edge are required, got {0}")]
    TooFewSamples(usize),
}

/// `w_e = Σ α_is B_is` restricted to every edge, indexed by edge id.
pub fn accumulate_edge_forms(alpha: &[f64], basis: &BasisSet) -> Vec<EdgeLinearForm> {
    assert_eq!(alpha.len(), basis.len(), "coefficient vector does not match the basis");
    (0..basis.num_edges())
        .map(|e| {
            let (a, b) = basis
                .hats_on_edge(e)
                .iter()
                .fold((0.0, 0.0), |(a, b), (pos, h)| {
                    (a + alpha[*pos] * h.a, b + alpha[*pos] * h.b)
                });
            EdgeLinearForm::new(e, a, b)
        })
        .collect()
}

/// One reconstructed edge curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCurve {
    pub edge: usize,
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub w: EdgeLinearForm,
    pub z_start: f64,
    pub z_end: f64,
    pub c1: f64,
    g2_end: f64,
}

impl EdgeCurve {
    fn g1(&self, q: f64, t: f64) -> f64 {
        signed_moment(&self.w, q, 0, t)
    }

    fn g2(&self, q: f64, t: f64) -> f64 {
        // ∫_0^t ∫_0^s f'' = ∫_0^t (t - u) f''(u) du
        t * signed_moment(&self.w, q, 0, t) - signed_moment(&self.w, q, 1, t)
    }
}

fn signed_moment(w: &EdgeLinearForm, q: f64, k: u32, t: f64) -> f64 {
    power_moment(Power::Signed, w.a, w.b, q - 1.0, k, t).expect("q > 1")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionNetwork {
    pub p: f64,
    pub q: f64,
    pub alpha: Vec<f64>,
    pub curves: Vec<EdgeCurve>,
}

/// Builds the curve network whose second derivative is `(Σ α B)^{q-1}_±`
/// and which interpolates the data at every vertex.
pub fn reconstruct(alpha: &[f64], basis: &BasisSet, tri: &Triangulation, q: f64) -> SolutionNetwork {
    assert!(q > 1.0, "conjugate exponent must exceed 1, got {q}");
    let forms = accumulate_edge_forms(alpha, basis);
    let curves = tri
        .edges()
        .iter()
        .zip(forms)
        .enumerate()
        .map(|(id, (e, w))| {
            let mut curve = EdgeCurve {
                edge: id,
                i: e.i,
                j: e.j,
                length: e.length,
                w,
                z_start: tri.points()[e.i].z,
                z_end: tri.points()[e.j].z,
                c1: 0.0,
                g2_end: 0.0,
            };
            curve.g2_end = curve.g2(q, e.length);
            curve.c1 = (curve.z_end - curve.z_start - curve.g2_end) / e.length;
            curve
        })
        .collect();
    SolutionNetwork {
        p: q / (q - 1.0),
        q,
        alpha: alpha.to_vec(),
        curves,
    }
}

impl SolutionNetwork {
    fn curve_at(&self, edge: usize, t: f64) -> Result<&EdgeCurve, NetworkError> {
        let c = &self.curves[edge];
        if !(0.0..=c.length).contains(&t) {
            return Err(NetworkError::OutOfRange { t, length: c.length });
        }
        Ok(c)
    }

    /// `f_e(t)`. Exact at both endpoints.
    pub fn evaluate(&self, edge: usize, t: f64) -> Result<f64, NetworkError> {
        let c = self.curve_at(edge, t)?;
        let s = t / c.length;
        // Same curve as z_i + c1 t + G2(t), arranged so that s = 0 and s = 1
        // reproduce the data bit for bit.
        Ok(c.z_start * (1.0 - s) + c.z_end * s + (c.g2(self.q, t) - s * c.g2_end))
    }

    /// `f_e'(t)`.
    pub fn derivative(&self, edge: usize, t: f64) -> Result<f64, NetworkError> {
        let c = self.curve_at(edge, t)?;
        Ok(c.c1 + c.g1(self.q, t))
    }

    /// `f_e''(t) = (w_e(t))^{q-1}_±`.
    pub fn second_derivative(&self, edge: usize, t: f64) -> Result<f64, NetworkError> {
        let c = self.curve_at(edge, t)?;
        Ok(crate::calculus::signed_power(c.w.eval(t), self.q - 1.0))
    }

    /// `‖F''‖_p = (Σ_e ∫ |w_e|^q)^{1/p}`, since `|f''|^p = |w|^{(q-1)p} = |w|^q`.
    pub fn lp_norm(&self) -> f64 {
        let total: f64 = self
            .curves
            .iter()
            .map(|c| edge_energy(&c.w, c.length, self.q))
            .sum();
        total.powf(1.0 / self.p)
    }

    /// Slope of the curve on `edge` leaving vertex `v`.
    fn outgoing_slope(&self, edge: usize, v: usize) -> f64 {
        let c = &self.curves[edge];
        if v == c.i {
            c.c1 + c.g1(self.q, 0.0)
        } else {
            -(c.c1 + c.g1(self.q, c.length))
        }
    }

    /// Uniform samples per edge, in edge order.
    pub fn sample(&self, tri: &Triangulation, samples_per_edge: usize) -> Result<Vec<Polyline>, NetworkError> {
        if samples_per_edge < 2 {
            return Err(NetworkError::TooFewSamples(samples_per_edge));
        }
        let last = (samples_per_edge - 1) as f64;
        self.curves
            .iter()
            .map(|c| {
                let (pi, pj) = (tri.points()[c.i], tri.points()[c.j]);
                let points = (0..samples_per_edge)
                    .map(|k| {
                        let s = k as f64 / last;
                        let t = if k + 1 == samples_per_edge { c.length } else { s * c.length };
                        let z = self.evaluate(c.edge, t)?;
                        Ok(SamplePoint {
                            t,
                            x: (1.0 - s) * pi.x + s * pj.x,
                            y: (1.0 - s) * pi.y + s * pj.y,
                            z,
                        })
                    })
                    .collect::<Result<Vec<_>, NetworkError>>()?;
                Ok(Polyline { edge: c.edge, i: c.i, j: c.j, points })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub edge: usize,
    pub i: usize,
    pub j: usize,
    pub points: Vec<SamplePoint>,
}

/// `max_is |<F'', B_is> - d_is|`, integrating the stored curves directly.
pub fn verify_characterization(net: &SolutionNetwork, basis: &BasisSet) -> f64 {
    basis
        .networks()
        .iter()
        .map(|b| {
            let mut hats = b.hats;
            hats.sort_by_key(|h| h.edge);
            let inner: f64 = hats
                .iter()
                .map(|h| {
                    let c = &net.curves[h.edge];
                    h.a * signed_moment(&c.w, net.q, 0, c.length)
                        + h.b * signed_moment(&c.w, net.q, 1, c.length)
                })
                .sum();
            (inner - b.d).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest normalized scalar triple product of tangent vectors over
/// consecutive incident edges at every vertex of degree >= 3.
///
/// Zero iff the edge curves share a tangent plane at each vertex.
pub fn verify_smoothness(net: &SolutionNetwork, tri: &Triangulation) -> f64 {
    let mut worst: f64 = 0.0;
    for v in 0..tri.num_vertices() {
        let star = tri.star(v);
        let m = star.degree();
        if m < 3 {
            continue;
        }
        let tangents: Vec<[f64; 3]> = star
            .edges
            .iter()
            .map(|&e| {
                let u = tri.edge_unit_vector(v, e).expect("star edge is incident");
                [u[0], u[1], net.outgoing_slope(e, v)]
            })
            .collect();
        let triples = if star.kind == StarKind::Interior { m } else { m - 2 };
        for s in 0..triples {
            let (t1, t2, t3) = (tangents[s], tangents[(s + 1) % m], tangents[(s + 2) % m]);
            let det = t1[0] * (t2[1] * t3[2] - t2[2] * t3[1]) - t1[1] * (t2[0] * t3[2] - t2[2] * t3[0])
                + t1[2] * (t2[0] * t3[1] - t2[1] * t3[0]);
            let norm = |t: [f64; 3]| (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
            worst = worst.max(det.abs() / (norm(t1) * norm(t2) * norm(t3)));
        }
    }
    worst
}
