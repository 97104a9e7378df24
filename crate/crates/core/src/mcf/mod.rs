//! Nonparametric mean curvature flow `∂_t f = g^{ij} ∂_i ∂_j f` of graphs
//! `f: T^n -> R^m` on periodic grids.
//!
//! The graph flow differs from `dF/dt = H` by a tangential reparametrisation
//! only, so the evolving image is the same; the monitors translate between
//! the two with an explicit tangential correction.

mod geometry;
mod grid;
mod laplace;
mod preset;
mod solver;
mod state;

pub use geometry::{geometry_of, metric_of, GeometrySnapshot, LocalMetric};
pub use grid::{GridSpec, MAX_CELLS, MAX_DIM, MIN_CELLS};
pub use laplace::{laplace_beltrami, LaplaceBeltrami};
pub use preset::{
    init_preset, list_presets, max_rho, rescale_to_max_rho, rescale_to_sup_delta, sup_slope, PresetInfo, PresetParams,
    PRESETS,
};
pub use solver::{
    cfl_dt, cfl_dt_with_safety, graph_velocity, run, run_with_safety, step, Frame, RunOutcome, CFL_SAFETY, MIN_DT,
};
pub use state::{is_free, soliton_profile, Boundary, GraphState, Jet};
