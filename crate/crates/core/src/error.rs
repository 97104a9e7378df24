use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("outside coordinate chart U (w = {w})")]
    OutsideChart { w: f64 },

    #[error("outside closed sub-level set v <= 2 (v = {v}), bound not asserted")]
    OutsideV2 { v: f64 },

    #[error("barrier undefined (v = {v} >= 2)")]
    BarrierUndefined { v: f64 },

    #[error("outside geodesic ball of radius sqrt(2)*pi/4 (rho = {rho})")]
    OutsideGeodesicBall { rho: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("geodesic left the coordinate chart after arc length {arc_length}")]
    ChartExit { arc_length: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid preset parameter: {0}")]
    InvalidPresetParam(String),

    #[error("preset rejected: sup Delta_f = {sup_delta} is not below 2")]
    PresetRejected { sup_delta: f64 },

    #[error("time step {dt} exceeds the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("state blown up at node {node} (t = {t})")]
    BlownUp { node: usize, t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("monitor precondition violated: {0}")]
    Precondition(String),
}
