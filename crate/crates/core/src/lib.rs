//! Invariant finite-difference schemes and moving meshes for one-dimensional
//! heat-transfer equations.
//!
//! The crate provides four building blocks:
//!
//! - [`grid`]: flat time layers, the six-point space-time stencil, and the
//!   discrete mesh-geometry conditions (uniformity, orthogonality, layer
//!   flatness) a point-symmetry operator must satisfy;
//! - [`symmetry`]: the difference invariants of each equation's symmetry
//!   algebra, closed-form group flows acting on mesh histories, and scheme
//!   invariance verification;
//! - [`schemes`]: residuals and time steppers for the discrete models
//!   (explicit/implicit power-law diffusion with source, semilinear
//!   `u ln u` source, the linear heat equation on invariant moving meshes
//!   and on a fixed orthogonal mesh, and the potential Burgers model);
//! - [`exact`]: the closed-form invariant solutions, mesh trajectories, and
//!   discrete blow-up data used as oracles for every scheme.
//!
//! All types are immutable value data and all operations are pure functions,
//! so everything is safe to call concurrently.
//!
//! ```
//! use heatsym::exact::Fundamental;
//! use heatsym::schemes::{step_linear_invariant, EndNodes};
//! use heatsym::MeshLayer;
//!
//! // Fundamental-solution data at t = 10; one invariant moving-mesh step
//! // reproduces the closed form to round-off.
//! let sol = Fundamental { c: 1.0 };
//! let xs: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
//! let us: Vec<f64> = xs.iter().map(|&x| sol.eval(x, 10.0).unwrap()).collect();
//! let layer = MeshLayer::new(10.0, xs, us).unwrap();
//! let next = step_linear_invariant(&layer, 0.05, |l, t_new| {
//!     let grow = t_new / l.t();
//!     let (xl, xr) = (l.xs()[0] * grow, l.xs()[l.len() - 1] * grow);
//!     EndNodes {
//!         x_left: xl,
//!         u_left: sol.eval(xl, t_new).unwrap(),
//!         x_right: xr,
//!         u_right: sol.eval(xr, t_new).unwrap(),
//!     }
//! })
//! .unwrap();
//! for (&x, &u) in next.xs().iter().zip(next.us()) {
//!     let exact = sol.eval(x, next.t()).unwrap();
//!     assert!(((u - exact) / exact).abs() < 1e-13);
//! }
//! ```

// `!(x > 0)` guards must also reject NaN, which `x <= 0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exact;
pub mod grid;
pub mod schemes;
pub mod symmetry;

pub use grid::{MeshLayer, Stencil, SymmetryOperator};
pub use schemes::SchemeKind;
pub use symmetry::InvariantSet;
