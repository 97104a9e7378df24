//! Numerical laboratory kernel for higher-codimension mean curvature flow of
//! graphs.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`grassmann`] closed-form geometry of the Grassmannian `G(n,m)` in the
//!   affine chart around a reference plane: the height function `w`, its
//!   inverse `v`, Jordan angles, the canonical metric, Hessians and the
//!   convex barrier functions built from them.
//! * [`oracle`] finite-difference Riemannian geometry used as an independent
//!   reference for the closed forms.
//! * [`mcf`] nonparametric mean curvature flow of graphs `f: T^n -> R^m` on
//!   periodic grids, with the full extrinsic geometry per node.
//! * [`monitors`] checks of evolution identities and maximum-principle
//!   statements along a computed flow.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub mod grassmann;
pub mod linalg;
pub mod mcf;
pub mod monitors;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
