//! Convex barrier functions on Gauss-image regions.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::{dv_at, hess_v, metric_at, rho_of, rho_parts, v_of};
use super::{GrassmannPoint, TangentVector};
use crate::{Error, Result};

/// Radius `√2 π / 4` of the largest geodesic ball on which `sec²(√2 ρ)` is
/// defined.
pub const SEC_BALL_RADIUS: f64 = core::f64::consts::SQRT_2 * PI / 4.0;

/// Scalar functions on the Grassmannian whose composition with the Gauss map
/// is monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Barrier {
    /// `v` itself.
    V,
    /// `v^{3/2} (2 - v)^{-3/2}` on `{v < 2}`.
    V32,
    /// `sec²(√2 ρ)` on the geodesic ball of radius `√2π/4` around `P0`.
    Sec,
}

impl Barrier {
    pub fn name(self) -> &'static str {
        match self {
            Barrier::V => "v",
            Barrier::V32 => "v32",
            Barrier::Sec => "sec",
        }
    }

    pub fn value(self, p: &GrassmannPoint) -> Result<f64> {
        match self {
            Barrier::V => Ok(v_of(p)),
            Barrier::V32 => barrier_v32(p),
            Barrier::Sec => barrier_sec(p),
        }
    }

    pub fn hessian(self, p: &GrassmannPoint, x: &TangentVector) -> Result<f64> {
        match self {
            Barrier::V => Ok(hess_v(p, x)),
            Barrier::V32 => hess_barrier_v32(p, x),
            Barrier::Sec => hess_barrier_sec(p, x),
        }
    }
}

fn v32_derivatives(v: f64) -> (f64, f64, f64) {
    let s = 2.0 - v;
    let h = libm::pow(v / s, 1.5);
    let h1 = 3.0 * libm::sqrt(v) * libm::pow(s, -2.5);
    let h2 = 3.0 * libm::pow(s, -3.5) * (1.0 + 2.0 * v) / libm::sqrt(v);
    (h, h1, h2)
}

/// `h = v^{3/2} (2 - v)^{-3/2}`.
pub fn barrier_v32(p: &GrassmannPoint) -> Result<f64> {
    let v = v_of(p);
    if !(v < 2.0) {
        return Err(Error::BarrierUndefined { v });
    }
    Ok(v32_derivatives(v).0)
}

/// `Hess(h)(x,x) = h'(v) Hess(v)(x,x) + h''(v) dv(x)²`.
pub fn hess_barrier_v32(p: &GrassmannPoint, x: &TangentVector) -> Result<f64> {
    let v = v_of(p);
    if !(v < 2.0) {
        return Err(Error::BarrierUndefined { v });
    }
    let (_, h1, h2) = v32_derivatives(v);
    let dv = dv_at(p, x);
    Ok(h1 * hess_v(p, x) + h2 * dv * dv)
}

/// `Hess(h)(x,x) - [3 h g(x,x) + (3/2) h⁻¹ dh(x)²]` for the `v32` barrier.
pub fn hess_bound_v32(p: &GrassmannPoint, x: &TangentVector) -> Result<f64> {
    let v = v_of(p);
    if !(v < 2.0) {
        return Err(Error::BarrierUndefined { v });
    }
    let (h, h1, _) = v32_derivatives(v);
    let dh = h1 * dv_at(p, x);
    Ok(hess_barrier_v32(p, x)? - (3.0 * h * metric_at(p, x, x) + 1.5 * dh * dh / h))
}

fn check_ball(rho: f64) -> Result<()> {
    if rho >= SEC_BALL_RADIUS {
        Err(Error::OutsideGeodesicBall { rho })
    } else {
        Ok(())
    }
}

/// `h = sec²(√2 ρ)`.
pub fn barrier_sec(p: &GrassmannPoint) -> Result<f64> {
    let rho = rho_of(p);
    check_ball(rho)?;
    let c = libm::cos(core::f64::consts::SQRT_2 * rho);
    Ok(1.0 / (c * c))
}

/// `(h, h'/ρ, h'')` for `h(ρ) = sec²(√2 ρ)`, with `h'/ρ` continued to `ρ = 0`.
fn sec_derivatives(rho: f64) -> (f64, f64, f64) {
    let s = core::f64::consts::SQRT_2 * rho;
    let sec2 = {
        let c = libm::cos(s);
        1.0 / (c * c)
    };
    let tan = libm::tan(s);
    let tan_over_s = if s.abs() < 1e-8 { 1.0 + s * s / 3.0 } else { tan / s };
    (sec2, 4.0 * sec2 * tan_over_s, 4.0 * sec2 * (2.0 * tan * tan + sec2))
}

/// Closed-form Hessian of `sec²(√2 ρ)` via `Hess(ρ)`.
pub fn hess_barrier_sec(p: &GrassmannPoint, x: &TangentVector) -> Result<f64> {
    let parts = rho_parts(p, x);
    check_ball(parts.rho)?;
    let (_, h1_over_rho, h2) = sec_derivatives(parts.rho);
    Ok(h1_over_rho * parts.transverse + h2 * parts.drho * parts.drho)
}

/// `Hess(h)(x,x) - [3 h g(x,x) + (3/2) h⁻¹ dh(x)²]` for the `sec` barrier.
pub fn hess_bound_sec(p: &GrassmannPoint, x: &TangentVector) -> Result<f64> {
    let parts = rho_parts(p, x);
    check_ball(parts.rho)?;
    let (h, h1_over_rho, h2) = sec_derivatives(parts.rho);
    let dh = h1_over_rho * parts.rho * parts.drho;
    let hess = h1_over_rho * parts.transverse + h2 * parts.drho * parts.drho;
    Ok(hess - (3.0 * h * metric_at(p, x, x) + 1.5 * dh * dh / h))
}
