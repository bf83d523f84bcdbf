//! Minimum `L_p`-norm interpolation curve networks, `1 < p < ∞`.
//!
//! Given scattered data `(x_i, y_i, z_i)` and a triangulation of the points
//! `(x_i, y_i)`, this crate computes the unique curve network on the
//! triangulation edges that interpolates the heights, has a common tangent
//! plane at every vertex, and minimizes `‖F''‖_p`.
//!
//! The optimal second derivative is `(Σ α_is B_is)^{q-1}_±` where `B_is` are
//! piecewise linear basic networks and `1/p + 1/q = 1`. The coefficients
//! solve a nonlinear system that is the gradient of a convex dual objective;
//! the curves themselves follow in closed form.
//!
//! ```
//! use lpnet::{basis, fixtures, network, solver};
//!
//! let tri = fixtures::pyramid().triangulation().unwrap();
//! let basis = basis::enumerate_basis(&tri).unwrap();
//! let (alpha, report) = solver::solve(&basis, &basis.data(), &solver::SolverConfig::new(3.0)).unwrap();
//! let net = network::reconstruct(&alpha, &basis, &tri, report.q);
//! assert!((net.lp_norm() - 4.00185).abs() < 1e-4);
//! ```

pub mod basis;
pub mod calculus;
pub mod document;
pub mod fixtures;
pub mod mesh;
pub mod network;
pub mod solver;

pub use basis::{enumerate_basis, BasisNetwork, BasisSet};
pub use document::{InputDocument, SolutionDocument};
pub use mesh::{build_triangulation, ScatterPoint, Triangulation};
pub use network::{reconstruct, SolutionNetwork};
pub use solver::{solve, SolveReport, SolverConfig};
