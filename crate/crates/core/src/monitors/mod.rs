//! Checks of evolution identities and maximum-principle statements along a
//! flow computed by [`crate::mcf`].
//!
//! Every monitor is a pure function of a snapshot series. Time derivatives
//! are three-point Lagrange differences over consecutive snapshots; the
//! identities are stated along the normal flow `dF/dt = H`, so the
//! fixed-node derivatives of the graph flow are corrected by the tangential
//! part of the vertical velocity.

mod bounds;
mod calculus;
mod identities;
mod report;

pub use bounds::{
    fit_hemisphere, monitor_b2h, monitor_confinable, monitor_curvature_scaling, monitor_geodesic_ball,
    monitor_growth_bound, monitor_hemisphere, B2H_RELATIVE_TOLERANCE, BALL_TOLERANCE, CONFINABLE_RELATIVE_TOLERANCE,
    HEMISPHERE_MIN_MARGIN,
};
pub use identities::{
    check_b2_inequality, check_composition_identity, check_f2_identity, discretisation_scale, B2_TOLERANCE_CONSTANT,
    COMPOSITION_TOLERANCE_CONSTANT, F2_TOLERANCE_CONSTANT,
};
pub use report::{MonitorReport, Verdict};
