//! JSON documents: the input dataset and the solved network.
//!
//! Vertex indices are 1-based in every file. Floating-point numbers are
//! written with 17 significant digits so a document reloads bit for bit.

use std::io;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::basis::{enumerate_basis, BasisError, BasisSet};
use crate::mesh::{build_triangulation, MeshError, ScatterPoint, Triangulation};
use crate::network::{reconstruct, SolutionNetwork};
use crate::solver::SolveReport;

#[derive(Error, Debug)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("triangle {0} uses index 0; vertex indices start at 1")]
    ZeroIndex(usize),

    #[error(transparent)]
    Mesh(#[from] MeshError),

    #[error(transparent)]
    Basis(#[from] BasisError),

    #[error("inconsistent solution document: {0}")]
    Inconsistent(String),
}

/// `{ "points": [{"x", "y", "z"}, ...], "triangles": [[i, j, k], ...] }`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub points: Vec<ScatterPoint>,
    pub triangles: Vec<[usize; 3]>,
}

impl InputDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// Points and 0-based triangles.
    pub fn to_internal(&self) -> Result<(Vec<ScatterPoint>, Vec<[usize; 3]>), DocumentError> {
        let triangles = self
            .triangles
            .iter()
            .enumerate()
            .map(|(t, tri)| {
                if tri.contains(&0) {
                    Err(DocumentError::ZeroIndex(t))
                } else {
                    Ok(tri.map(|v| v - 1))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((self.points.clone(), triangles))
    }

    pub fn triangulation(&self) -> Result<Triangulation, DocumentError> {
        let (points, triangles) = self.to_internal()?;
        Ok(build_triangulation(points, triangles)?)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct AlphaEntry {
    pub i: usize,
    pub s: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct EdgeRecord {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ReportRecord {
    pub converged: bool,
    pub iterations: usize,
    pub iterations_per_step: Vec<usize>,
    pub q_path: Vec<f64>,
    pub residual: f64,
    pub objective: f64,
}

impl From<&SolveReport> for ReportRecord {
    fn from(r: &SolveReport) -> Self {
        Self {
            converged: r.converged,
            iterations: r.total_iterations(),
            iterations_per_step: r.steps.iter().map(|s| s.iterations).collect(),
            q_path: r.q_path(),
            residual: r.final_residual,
            objective: r.objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct SolutionDocument {
    pub points: Vec<ScatterPoint>,
    pub triangles: Vec<[usize; 3]>,
    pub p: f64,
    pub q: f64,
    pub alpha: Vec<AlphaEntry>,
    pub edges: Vec<EdgeRecord>,
    pub norm: f64,
    pub report: ReportRecord,
}

impl SolutionDocument {
    pub fn new(input: &InputDocument, basis: &BasisSet, net: &SolutionNetwork, report: &SolveReport) -> Self {
        let alpha = basis
            .networks()
            .iter()
            .zip(&net.alpha)
            .map(|(b, &value)| AlphaEntry {
                i: b.vertex + 1,
                s: b.slot,
                value,
            })
            .collect();
        let edges = net
            .curves
            .iter()
            .map(|c| EdgeRecord {
                i: c.i + 1,
                j: c.j + 1,
                length: c.length,
                a: c.w.a,
                b: c.w.b,
                c1: c.c1,
            })
            .collect();
        Self {
            points: input.points.clone(),
            triangles: input.triangles.clone(),
            p: net.p,
            q: net.q,
            alpha,
            edges,
            norm: net.lp_norm(),
            report: report.into(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn input(&self) -> InputDocument {
        InputDocument {
            points: self.points.clone(),
            triangles: self.triangles.clone(),
        }
    }

    /// Rebuilds triangulation, basis and network from the echoed input and
    /// the stored coefficients.
    pub fn rebuild(&self) -> Result<(Triangulation, BasisSet, SolutionNetwork), DocumentError> {
        let tri = self.input().triangulation()?;
        let basis = enumerate_basis(&tri)?;
        if self.alpha.len() != basis.len() {
            return Err(DocumentError::Inconsistent(format!(
                "{} coefficients for {} basic networks",
                self.alpha.len(),
                basis.len()
            )));
        }
        let mut alpha = vec![f64::NAN; basis.len()];
        for entry in &self.alpha {
            let pos = entry
                .i
                .checked_sub(1)
                .and_then(|v| basis.position(v, entry.s))
                .ok_or_else(|| DocumentError::Inconsistent(format!("no basic network ({}, {})", entry.i, entry.s)))?;
            alpha[pos] = entry.value;
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(DocumentError::Inconsistent("duplicate coefficient entries".into()));
        }
        if !(self.q > 1.0) {
            return Err(DocumentError::Inconsistent(format!("q = {} must exceed 1", self.q)));
        }
        let net = reconstruct(&alpha, &basis, &tri, self.q);
        Ok((tri, basis, net))
    }
}

/// Pretty JSON with every `f64` printed as `{:.16e}`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits::default());
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[derive(Default)]
struct SignificantDigits {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn rejects_zero_index_and_bad_numbers() {
        let doc = InputDocument::from_json(r#"{"points":[{"x":0,"y":0,"z":0}],"triangles":[[0,1,2]]}"#).unwrap();
        assert!(matches!(doc.to_internal(), Err(DocumentError::ZeroIndex(0))));
        assert!(InputDocument::from_json(r#"{"points":[{"x":NaN,"y":0,"z":0}],"triangles":[]}"#).is_err());
        assert!(InputDocument::from_json(r#"{"points":[{"x":"1","y":0,"z":0}],"triangles":[]}"#).is_err());
    }

    #[test]
    fn seventeen_digits() {
        let text = to_json_string(&[0.1f64, -2.0, 1e-300]);
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-2.0000000000000000e0"), "{text}");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![0.1, -2.0, 1e-300]);
    }

    #[test]
    fn fixture_round_trip() {
        let doc = fixtures::seven_point();
        assert_eq!(InputDocument::from_json(&doc.to_json()).unwrap(), doc);
    }

    proptest! {
        #[test]
        fn floats_round_trip_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let text = to_json_string(&vec![x]);
            let back: Vec<f64> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back[0].to_bits(), x.to_bits());
        }
    }
}
