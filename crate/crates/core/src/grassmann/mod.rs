//! Closed-form geometry of the Grassmannian `G(n,m)` of oriented n-planes in
//! `R^{n+m}`.
//!
//! Every point is carried in the affine chart `U = {w > 0}` around a fixed
//! reference plane `P0`: the plane spanned by `f_i = ε_i + z_{iα} ε_{n+α}` has
//! coordinate matrix `Z = (z_{iα})` (n rows, m columns). Planes that are not
//! in the chart can only be represented as a [`FramePair`].
//!
//! Index conventions used throughout: a tangent vector at a point is an
//! `n x m` coordinate matrix in the basis `E_{iα}`; when flattened, `E_{iα}`
//! sits at position `i * m + α`.

mod barrier;
mod kernel;
mod split;

pub use barrier::{
    barrier_sec, barrier_v32, hess_barrier_sec, hess_barrier_v32, hess_bound_sec, hess_bound_v32, Barrier,
    SEC_BALL_RADIUS,
};
pub use kernel::{
    coords_of, drho_at, dv_at, hess_rho, hess_v, hess_v_bilinear, hess_v_lower_bound_coefficient,
    hess_v_lower_bound_gap, hess_v_matrix, in_bjx, jordan_of, metric_at, metric_matrix, omega_of, relative_point,
    rho_of, v_of, w_of,
};
pub use split::{partial_gauss_maps, s2xs2_split, UnitVector3};

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::linalg;
use crate::{Error, Result};

/// Rows of a frame may deviate from orthonormality by at most this much.
pub const FRAME_TOLERANCE: f64 = 1e-9;

/// Principal-angle data of a chart point relative to `P0`.
///
/// `z = u · diag(tan θ) · qᵀ` with the diagonal padded to `n x m`; the angles
/// are sorted nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanSpectrum {
    pub theta: Vec<f64>,
    pub u: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl JordanSpectrum {
    /// `tan θ_k` for `k < p`, zero past the last angle.
    pub fn lambda(&self, k: usize) -> f64 {
        self.theta.get(k).map_or(0.0, |&t| libm::tan(t))
    }

    /// Rebuild the coordinate matrix from the spectrum.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.u.nrows();
        let m = self.q.nrows();
        let mut d = DMatrix::zeros(n, m);
        for (k, t) in self.theta.iter().enumerate() {
            d[(k, k)] = libm::tan(*t);
        }
        &self.u * d * self.q.transpose()
    }

    fn of_matrix(z: &DMatrix<f64>) -> Self {
        let (n, m) = z.shape();
        let p = n.min(m);
        let svd = z.clone().svd(true, true);
        let u_thin = svd.u.expect("svd computed u");
        let vt_thin = svd.v_t.expect("svd computed v_t");
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let mut u_sorted = DMatrix::zeros(n, p);
        let mut q_sorted = DMatrix::zeros(m, p);
        let mut theta = Vec::with_capacity(p);
        for (k, &src) in order.iter().enumerate() {
            u_sorted.set_column(k, &u_thin.column(src));
            q_sorted.set_column(k, &vt_thin.row(src).transpose());
            theta.push(libm::atan(svd.singular_values[src]));
        }
        JordanSpectrum { theta, u: linalg::complete_columns(&u_sorted), q: linalg::complete_columns(&q_sorted) }
    }
}

/// A point of `G(n,m)` in chart coordinates, with its Jordan data cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    z: DMatrix<f64>,
    jordan: JordanSpectrum,
}

impl GrassmannPoint {
    pub fn new(z: DMatrix<f64>) -> Self {
        assert!(z.nrows() > 0 && z.ncols() > 0, "G(n,m) needs n, m >= 1");
        let jordan = JordanSpectrum::of_matrix(&z);
        GrassmannPoint { z, jordan }
    }

    /// The reference plane itself (`Z = 0`).
    pub fn origin(n: usize, m: usize) -> Self {
        Self::new(DMatrix::zeros(n, m))
    }

    /// Build a point from a prescribed spectrum, keeping that spectrum (and
    /// therefore its choice of singular vectors) as the cached Jordan data.
    pub fn from_spectrum(jordan: JordanSpectrum) -> Result<Self> {
        let n = jordan.u.nrows();
        let m = jordan.q.nrows();
        if jordan.u.ncols() != n || jordan.q.ncols() != m || jordan.theta.len() != n.min(m) {
            return Err(Error::Dimension("spectrum shapes are inconsistent".into()));
        }
        if jordan.theta.iter().any(|t| !(*t >= 0.0 && *t < core::f64::consts::FRAC_PI_2)) {
            return Err(Error::InvalidArgument("Jordan angles must lie in [0, pi/2)".into()));
        }
        if jordan.theta.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("Jordan angles must be nonincreasing".into()));
        }
        let z = jordan.reconstruct();
        Ok(GrassmannPoint { z, jordan })
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn m(&self) -> usize {
        self.z.ncols()
    }

    /// `min(n, m)`, the number of Jordan angles.
    pub fn p(&self) -> usize {
        self.n().min(self.m())
    }

    pub fn jordan(&self) -> &JordanSpectrum {
        &self.jordan
    }

    /// Orthonormal frame of the plane in the standard basis of `R^{n+m}`,
    /// where `P0` is spanned by the first n axes.
    pub fn frame(&self) -> DMatrix<f64> {
        let (n, m) = self.z.shape();
        let mut rows = DMatrix::zeros(n, n + m);
        rows.view_mut((0, 0), (n, n)).fill_with_identity();
        rows.view_mut((0, n), (n, m)).copy_from(&self.z);
        linalg::orthonormalize_rows(&rows).expect("[I | Z] has full row rank")
    }
}

/// A tangent vector: coefficients in the coordinate basis `E_{iα}` at the
/// base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub x: DMatrix<f64>,
}

impl TangentVector {
    pub fn new(x: DMatrix<f64>) -> Self {
        TangentVector { x }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        TangentVector { x: DMatrix::zeros(n, m) }
    }

    /// The basis vector `E_{iα}`.
    pub fn basis(n: usize, m: usize, i: usize, alpha: usize) -> Self {
        let mut x = DMatrix::zeros(n, m);
        x[(i, alpha)] = 1.0;
        TangentVector { x }
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector { x: &self.x * s }
    }
}

/// Two oriented n-planes in `R^{n+m}`, each given by n orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    p_frame: DMatrix<f64>,
    p0_frame: DMatrix<f64>,
}

impl FramePair {
    /// Validate and wrap two frames. Frames whose Gram matrix deviates from
    /// the identity by more than [`FRAME_TOLERANCE`] are rejected; use
    /// [`linalg::orthonormalize_rows`] first if that is intended.
    pub fn new(p_frame: DMatrix<f64>, p0_frame: DMatrix<f64>) -> Result<Self> {
        if p_frame.shape() != p0_frame.shape() {
            return Err(Error::Dimension("frames must have the same shape".into()));
        }
        let (n, dim) = p_frame.shape();
        if n == 0 || dim <= n {
            return Err(Error::Dimension("need n >= 1 rows and ambient dimension > n".into()));
        }
        for (name, f) in [("p_frame", &p_frame), ("p0_frame", &p0_frame)] {
            let dev = linalg::row_gram_deviation(f);
            if !(dev <= FRAME_TOLERANCE) {
                return Err(Error::InvalidFrame(alloc::format!(
                    "{name} rows are not orthonormal (Gram deviation {dev:e})"
                )));
            }
        }
        Ok(FramePair { p_frame, p0_frame })
    }

    /// Pair the plane of a chart point with the standard reference plane.
    pub fn from_point(p: &GrassmannPoint) -> Self {
        let (n, m) = p.z().shape();
        let mut p0 = DMatrix::zeros(n, n + m);
        p0.view_mut((0, 0), (n, n)).fill_with_identity();
        FramePair { p_frame: p.frame(), p0_frame: p0 }
    }

    pub fn p_frame(&self) -> &DMatrix<f64> {
        &self.p_frame
    }

    pub fn p0_frame(&self) -> &DMatrix<f64> {
        &self.p0_frame
    }

    pub fn n(&self) -> usize {
        self.p_frame.nrows()
    }

    pub fn m(&self) -> usize {
        self.p_frame.ncols() - self.p_frame.nrows()
    }

    /// Coordinates of the rows of `p_frame` in the orthonormal basis
    /// `{ε_i, ε_{n+α}}` built from `p0_frame` and its completion.
    pub(crate) fn adapted_coordinates(&self) -> DMatrix<f64> {
        let n = self.n();
        let m = self.m();
        let complement = linalg::orthonormal_complement_rows(&self.p0_frame);
        let mut out = DMatrix::zeros(n, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&(&self.p_frame * self.p0_frame.transpose()));
        out.view_mut((0, n), (n, m)).copy_from(&(&self.p_frame * complement.transpose()));
        out
    }
}
