//! Basic curve networks.
//!
//! A basic network lives at a vertex `V_i` of degree `m_i >= 3` and slot
//! `s = 1..=m_i - 2`. It is a piecewise linear hat on three consecutive
//! edges of the (rotated) clockwise star, weighted by `λ_1, λ_2, λ_3`, and
//! zero on every other edge. The weights sum to one and annihilate the
//! three unit directions, so `<F'', B_is> = d_is` says exactly that the
//! edge slopes at `V_i` are consistent with a common tangent plane.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::calculus::EdgeLinearForm;
use crate::mesh::{MeshError, StarKind, Triangulation};

/// Smallest `|λ_1|` accepted for a star rotation.
pub const LAMBDA1_THRESHOLD: f64 = 1e-10;

/// Below this the three tips of the unit vectors are treated as collinear.
const SINGULAR_DET: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BasisError {
    #[error("edge directions {0:?} admit no unique affine combination")]
    SingularDirections([[f64; 2]; 3]),

    #[error("no rotation of the star at vertex {vertex} gives non-zero λ1 for every slot")]
    NoValidRotation { vertex: usize },

    #[error("rotation {offset} is not valid for vertex {vertex}")]
    InvalidRotation { vertex: usize, offset: usize },

    #[error("parameter {t} is outside [0, {length}]")]
    OutOfRange { t: f64, length: f64 },

    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Weights `λ` with `λ1 + λ2 + λ3 = 1` and `λ1 u1 + λ2 u2 + λ3 u3 = 0`.
///
/// Cramer's rule on the 3x3 system reduces to 2D cross products:
/// `λ_r ∝ u_{r+1} × u_{r+2}`, normalized by their sum.
pub fn lambda_coefficients(
    u1: [f64; 2],
    u2: [f64; 2],
    u3: [f64; 2],
) -> Result<[f64; 3], BasisError> {
    let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let c = [cross(u2, u3), cross(u3, u1), cross(u1, u2)];
    let det = c[0] + c[1] + c[2];
    if det.abs() <= SINGULAR_DET {
        return Err(BasisError::SingularDirections([u1, u2, u3]));
    }
    Ok(c.map(|x| x / det))
}

/// First rotation offset of `dirs` (in clockwise order) for which every
/// consecutive triple has `|λ_1| > LAMBDA1_THRESHOLD`.
///
/// Cyclic stars try every offset; fans only check offset 0.
pub fn choose_rotation_for_directions(dirs: &[[f64; 2]], cyclic: bool) -> Option<usize> {
    valid_rotations_for_directions(dirs, cyclic).into_iter().next()
}

pub fn valid_rotations_for_directions(dirs: &[[f64; 2]], cyclic: bool) -> Vec<usize> {
    let m = dirs.len();
    let candidates = if cyclic { m } else { 1 };
    (0..candidates)
        .filter(|&offset| {
            (0..m.saturating_sub(2)).all(|s| {
                let at = |r: usize| dirs[(offset + s + r) % m];
                matches!(
                    lambda_coefficients(at(0), at(1), at(2)),
                    Ok(l) if l[0].abs() > LAMBDA1_THRESHOLD
                )
            })
        })
        .collect()
}

fn star_directions(tri: &Triangulation, i: usize) -> Result<Vec<[f64; 2]>, BasisError> {
    tri.clockwise_star(i)?
        .iter()
        .map(|&e| tri.edge_unit_vector(i, e).map_err(BasisError::from))
        .collect()
}

/// Rotation offsets of the clockwise star at `i` that give non-zero `λ_1`.
pub fn valid_rotations(tri: &Triangulation, i: usize) -> Result<Vec<usize>, BasisError> {
    let dirs = star_directions(tri, i)?;
    Ok(valid_rotations_for_directions(
        &dirs,
        tri.star(i).kind == StarKind::Interior,
    ))
}

/// Smallest valid rotation of the star at `i`.
pub fn choose_star_rotation(tri: &Triangulation, i: usize) -> Result<usize, BasisError> {
    valid_rotations(tri, i)?
        .first()
        .copied()
        .ok_or(BasisError::NoValidRotation { vertex: i })
}

/// One basic curve network `B_is`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisNetwork {
    pub vertex: usize,
    /// 1-based slot `s`.
    pub slot: usize,
    pub support: [usize; 3],
    pub lambdas: [f64; 3],
    pub d: f64,
    /// The hat restricted to each support edge, in the edge's own orientation.
    pub hats: [EdgeLinearForm; 3],
}

impl BasisNetwork {
    fn new(tri: &Triangulation, vertex: usize, slot: usize, support: [usize; 3]) -> Result<Self, BasisError> {
        let u = support
            .map(|e| tri.edge_unit_vector(vertex, e))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let lambdas = lambda_coefficients(u[0], u[1], u[2])?;
        let hats = std::array::from_fn(|r| {
            let e = tri.edge(support[r]);
            if e.i == vertex {
                EdgeLinearForm::new(support[r], lambdas[r], -lambdas[r] / e.length)
            } else {
                EdgeLinearForm::new(support[r], 0.0, lambdas[r] / e.length)
            }
        });
        let mut b = Self {
            vertex,
            slot,
            support,
            lambdas,
            d: 0.0,
            hats,
        };
        b.d = d_value(&b, tri);
        Ok(b)
    }

    /// The hat on `edge`, if it is a support edge.
    pub fn hat_on(&self, edge: usize) -> Option<&EdgeLinearForm> {
        self.hats.iter().find(|h| h.edge == edge)
    }
}

/// `d_is = Σ_r λ_r (z_{i_r} - z_i) / ‖e_{i i_r}‖` over the support edges.
pub fn d_value(b: &BasisNetwork, tri: &Triangulation) -> f64 {
    let zi = tri.points()[b.vertex].z;
    b.support
        .iter()
        .zip(b.lambdas)
        .map(|(&e, lambda)| {
            let edge = tri.edge(e);
            let other = edge.opposite(b.vertex).expect("support edge is incident");
            lambda * (tri.points()[other].z - zi) / edge.length
        })
        .sum()
}

/// Value of `B_is` at arclength `t` on `edge` (canonical orientation).
pub fn evaluate_basis_on_edge(
    b: &BasisNetwork,
    tri: &Triangulation,
    edge: usize,
    t: f64,
) -> Result<f64, BasisError> {
    let length = tri.edge(edge).length;
    if !(0.0..=length).contains(&t) {
        return Err(BasisError::OutOfRange { t, length });
    }
    Ok(b.hat_on(edge).map_or(0.0, |h| h.eval(t)))
}

/// All basic networks of a triangulation, ordered by vertex then slot.
///
/// This order is the layout of every coefficient vector downstream.
#[derive(Debug, Clone)]
pub struct BasisSet {
    networks: Vec<BasisNetwork>,
    index: BTreeMap<(usize, usize), usize>,
    rotations: Vec<usize>,
    lengths: Vec<f64>,
    /// Per edge, `(network position, hat)` pairs in ascending network order.
    by_edge: Vec<Vec<(usize, EdgeLinearForm)>>,
}

/// Builds `B_is` for every `(i, s)` with `m_i >= 3`, using the smallest
/// valid star rotation at each vertex.
pub fn enumerate_basis(tri: &Triangulation) -> Result<BasisSet, BasisError> {
    let rotations = (0..tri.num_vertices())
        .map(|i| {
            if tri.degree(i) >= 3 {
                choose_star_rotation(tri, i)
            } else {
                Ok(0)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    BasisSet::with_rotations(tri, &rotations)
}

impl BasisSet {
    /// Builds the basis with an explicit star rotation per vertex.
    pub fn with_rotations(tri: &Triangulation, rotations: &[usize]) -> Result<Self, BasisError> {
        let mut networks = Vec::new();
        for i in 0..tri.num_vertices() {
            let m = tri.degree(i);
            if m < 3 {
                continue;
            }
            let offset = rotations[i];
            if !valid_rotations(tri, i)?.contains(&offset) {
                return Err(BasisError::InvalidRotation { vertex: i, offset });
            }
            let star = tri.clockwise_star(i)?;
            for s in 0..m - 2 {
                let support = std::array::from_fn(|r| star[(offset + s + r) % m]);
                networks.push(BasisNetwork::new(tri, i, s + 1, support)?);
            }
        }
        let index = networks
            .iter()
            .enumerate()
            .map(|(pos, b)| ((b.vertex, b.slot), pos))
            .collect();
        let mut by_edge = vec![Vec::new(); tri.num_edges()];
        for (pos, b) in networks.iter().enumerate() {
            for h in &b.hats {
                by_edge[h.edge].push((pos, *h));
            }
        }
        Ok(Self {
            networks,
            index,
            rotations: rotations.to_vec(),
            lengths: tri.edges().iter().map(|e| e.length).collect(),
            by_edge,
        })
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn networks(&self) -> &[BasisNetwork] {
        &self.networks
    }

    pub fn get(&self, pos: usize) -> &BasisNetwork {
        &self.networks[pos]
    }

    /// Position of `B_is` (0-based vertex, 1-based slot).
    pub fn position(&self, vertex: usize, slot: usize) -> Option<usize> {
        self.index.get(&(vertex, slot)).copied()
    }

    pub fn rotations(&self) -> &[usize] {
        &self.rotations
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn num_edges(&self) -> usize {
        self.lengths.len()
    }

    /// Hats of all networks supported on `edge`.
    pub fn hats_on_edge(&self, edge: usize) -> &[(usize, EdgeLinearForm)] {
        &self.by_edge[edge]
    }

    /// Data vector `d`, in basis order.
    pub fn data(&self) -> Vec<f64> {
        self.networks.iter().map(|b| b.d).collect()
    }
}
