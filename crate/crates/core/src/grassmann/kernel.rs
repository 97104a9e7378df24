use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::DMatrix;

use super::{FramePair, GrassmannPoint, TangentVector};
use crate::linalg;
use crate::{Error, Result};

/// Below this distance from `v = 1` the removable singularity of the lower
/// bound coefficient is replaced by its limit.
const COEFFICIENT_LIMIT_BAND: f64 = 1e-6;

/// `w = ⟨P, P0⟩ = det W` with `W_ij = ⟨e_i, ε_j⟩`.
pub fn w_of(fp: &FramePair) -> f64 {
    let w = fp.p_frame() * fp.p0_frame().transpose();
    w.determinant()
}

/// Chart coordinates of the plane of `fp.p_frame()` relative to
/// `fp.p0_frame()`.
pub fn coords_of(fp: &FramePair) -> Result<GrassmannPoint> {
    let n = fp.n();
    let m = fp.m();
    let c = fp.adapted_coordinates();
    let a = c.view((0, 0), (n, n)).clone_owned();
    let w = a.determinant();
    if !(w > 0.0) {
        return Err(Error::OutsideChart { w });
    }
    let lu = a.lu();
    let z = lu.solve(&c.view((0, n), (n, m)).clone_owned()).ok_or(Error::OutsideChart { w })?;
    Ok(GrassmannPoint::new(z))
}

/// Coordinates of `target` in the chart centred at the plane of `center`.
pub fn relative_point(center: &GrassmannPoint, target: &GrassmannPoint) -> Result<GrassmannPoint> {
    if center.z().shape() != target.z().shape() {
        return Err(Error::Dimension("points live on different Grassmannians".into()));
    }
    let fp = FramePair::new(target.frame(), center.frame())?;
    coords_of(&fp)
}

fn small_gram(z: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = z.shape();
    if n <= m {
        DMatrix::identity(n, n) + z * z.transpose()
    } else {
        DMatrix::identity(m, m) + z.transpose() * z
    }
}

/// `v = [det(I + Z Zᵀ)]^{1/2}`.
pub fn v_of(p: &GrassmannPoint) -> f64 {
    let gram = small_gram(p.z());
    let chol = gram.cholesky().expect("I + Z Zᵀ is positive definite");
    chol.l_dirty().diagonal().iter().product::<f64>().abs()
}

pub fn jordan_of(p: &GrassmannPoint) -> &super::JordanSpectrum {
    p.jordan()
}

fn chart_inverses(z: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = z.shape();
    let a = DMatrix::identity(n, n) + z * z.transpose();
    let b = DMatrix::identity(m, m) + z.transpose() * z;
    (
        linalg::spd_inverse(&a).expect("I + Z Zᵀ is positive definite"),
        linalg::spd_inverse(&b).expect("I + Zᵀ Z is positive definite"),
    )
}

/// The canonical metric `tr((I + ZZᵀ)⁻¹ X₁ (I + ZᵀZ)⁻¹ X₂ᵀ)`.
pub fn metric_at(p: &GrassmannPoint, x1: &TangentVector, x2: &TangentVector) -> f64 {
    let (a_inv, b_inv) = chart_inverses(p.z());
    linalg::frobenius_dot(&(a_inv * &x1.x * b_inv), &x2.x)
}

/// Gram matrix of the coordinate basis `E_{iα}` (flattened as `i * m + α`).
pub fn metric_matrix(p: &GrassmannPoint) -> DMatrix<f64> {
    let (n, m) = p.z().shape();
    let (a_inv, b_inv) = chart_inverses(p.z());
    DMatrix::from_fn(n * m, n * m, |r, c| a_inv[(r / m, c / m)] * b_inv[(r % m, c % m)])
}

/// Directional derivative of `v` at `p` along `x`.
pub fn dv_at(p: &GrassmannPoint, x: &TangentVector) -> f64 {
    let (a_inv, _) = chart_inverses(p.z());
    v_of(p) * linalg::frobenius_dot(&(a_inv * p.z()), &x.x)
}

/// Components of `x` in the coframe dual to the orthonormal basis
/// `(1+λ_i²)^{1/2}(1+λ_α²)^{1/2} E_{iα}` taken in the singular frame of `Z`.
pub fn omega_of(p: &GrassmannPoint, x: &TangentVector) -> DMatrix<f64> {
    let j = p.jordan();
    let rotated = j.u.transpose() * &x.x * &j.q;
    let (n, m) = rotated.shape();
    DMatrix::from_fn(n, m, |i, a| {
        let li = j.lambda(i);
        let la = j.lambda(a);
        rotated[(i, a)] / libm::sqrt((1.0 + li * li) * (1.0 + la * la))
    })
}

/// `Hess(v)(x, x)` from the closed form in the orthonormal Jordan frame.
pub fn hess_v(p: &GrassmannPoint, x: &TangentVector) -> f64 {
    let v = v_of(p);
    let dv = dv_at(p, x);
    let omega = omega_of(p, x);
    let j = p.jordan();
    let rank = p.p();
    let (n, m) = omega.shape();

    let mut sum = 0.0;
    for i in 0..n {
        for a in 0..m {
            if i >= rank || a >= rank {
                sum += omega[(i, a)] * omega[(i, a)];
            }
        }
    }
    for a in 0..rank {
        let la = j.lambda(a);
        sum += (1.0 + la * la) * omega[(a, a)] * omega[(a, a)];
    }
    for a in 0..rank {
        for b in (a + 1)..rank {
            let prod = j.lambda(a) * j.lambda(b);
            let sym = FRAC_1_SQRT_2 * (omega[(a, b)] + omega[(b, a)]);
            let skew = FRAC_1_SQRT_2 * (omega[(a, b)] - omega[(b, a)]);
            sum += (1.0 + prod) * sym * sym + (1.0 - prod) * skew * skew;
        }
    }
    v * sum + dv * dv / v
}

/// Symmetric bilinear extension of [`hess_v`] by polarization.
pub fn hess_v_bilinear(p: &GrassmannPoint, x: &TangentVector, y: &TangentVector) -> f64 {
    let plus = TangentVector::new(&x.x + &y.x);
    let minus = TangentVector::new(&x.x - &y.x);
    0.25 * (hess_v(p, &plus) - hess_v(p, &minus))
}

/// Matrix of `Hess(v)` on the coordinate basis (flattened as `i * m + α`).
pub fn hess_v_matrix(p: &GrassmannPoint) -> DMatrix<f64> {
    let (n, m) = p.z().shape();
    let d = n * m;
    let basis = |k: usize| TangentVector::basis(n, m, k / m, k % m);
    let mut h = DMatrix::zeros(d, d);
    for a in 0..d {
        h[(a, a)] = hess_v(p, &basis(a));
        for b in 0..a {
            let val = hess_v_bilinear(p, &basis(a), &basis(b));
            h[(a, b)] = val;
            h[(b, a)] = val;
        }
    }
    h
}

/// Coefficient of `dv ⊗ dv` in the lower bound
/// `Hess(v) >= v(2-v) g + c(v, p) dv ⊗ dv` on `{v <= 2}`.
pub fn hess_v_lower_bound_coefficient(v: f64, p: usize) -> f64 {
    let pf = p as f64;
    let radial = if (v - 1.0).abs() < COEFFICIENT_LIMIT_BAND {
        // (v-1) / (p v (v^{2/p} - 1)) -> 1 / (2v) as v -> 1.
        1.0 / (2.0 * v)
    } else {
        (v - 1.0) / (pf * v * (libm::pow(v, 2.0 / pf) - 1.0))
    };
    radial + (pf + 1.0) / (pf * v)
}

/// `Hess(v)(x,x) - [v(2-v) g(x,x) + c(v,p) dv(x)²]`; nonnegative on the
/// closed sub-level set `{v <= 2}`.
pub fn hess_v_lower_bound_gap(p: &GrassmannPoint, x: &TangentVector) -> Result<f64> {
    let v = v_of(p);
    if v > 2.0 {
        return Err(Error::OutsideV2 { v });
    }
    let dv = dv_at(p, x);
    let bound = v * (2.0 - v) * metric_at(p, x, x) + hess_v_lower_bound_coefficient(v, p.p()) * dv * dv;
    Ok(hess_v(p, x) - bound)
}

/// Geodesic distance from `P0`: `(Σ θ_α²)^{1/2}`.
pub fn rho_of(p: &GrassmannPoint) -> f64 {
    libm::sqrt(p.jordan().theta.iter().map(|t| t * t).sum::<f64>())
}

/// `dρ(x)`; zero at `P0`, where `ρ` is not differentiable.
pub fn drho_at(p: &GrassmannPoint, x: &TangentVector) -> f64 {
    rho_parts(p, x).drho
}

/// `φ cot φ`, continuous through zero.
fn phi_cot_phi(phi: f64) -> f64 {
    if phi.abs() < 1e-8 {
        1.0 - phi * phi / 3.0
    } else {
        phi / libm::tan(phi)
    }
}

/// Pieces of the Hessian of the distance function: `Hess(ρ)(x,x) =
/// transverse / ρ`, with `transverse` the Jacobi-field weighted square norm of
/// `x` orthogonal to the radial direction.
pub(crate) struct RhoParts {
    pub rho: f64,
    pub drho: f64,
    pub transverse: f64,
}

pub(crate) fn rho_parts(p: &GrassmannPoint, x: &TangentVector) -> RhoParts {
    let rho = rho_of(p);
    let omega = omega_of(p, x);
    let theta = &p.jordan().theta;
    let rank = p.p();
    let (n, m) = omega.shape();

    let mut transverse = 0.0;
    for i in 0..n {
        for a in 0..m {
            if i >= rank || a >= rank {
                let phi = if i < rank {
                    theta[i]
                } else if a < rank {
                    theta[a]
                } else {
                    0.0
                };
                transverse += phi_cot_phi(phi) * omega[(i, a)] * omega[(i, a)];
            }
        }
    }
    let mut diag_sq = 0.0;
    let mut drho = 0.0;
    for a in 0..rank {
        diag_sq += omega[(a, a)] * omega[(a, a)];
        if rho > 0.0 {
            drho += theta[a] / rho * omega[(a, a)];
        }
    }
    transverse += diag_sq - drho * drho;
    for a in 0..rank {
        for b in (a + 1)..rank {
            let sym = FRAC_1_SQRT_2 * (omega[(a, b)] + omega[(b, a)]);
            let skew = FRAC_1_SQRT_2 * (omega[(a, b)] - omega[(b, a)]);
            transverse += phi_cot_phi(theta[a] - theta[b]) * sym * sym + phi_cot_phi(theta[a] + theta[b]) * skew * skew;
        }
    }
    RhoParts { rho, drho, transverse }
}

/// Closed-form `Hess(ρ)(x,x)` from the Jacobi fields of the symmetric space;
/// `None` at `P0`.
pub fn hess_rho(p: &GrassmannPoint, x: &TangentVector) -> Option<f64> {
    let parts = rho_parts(p, x);
    (parts.rho > 0.0).then(|| parts.transverse / parts.rho)
}

/// Whether every pair of Jordan angles sums to less than `π/2`.
pub fn in_bjx(p: &GrassmannPoint) -> bool {
    let theta = &p.jordan().theta;
    match theta.len() {
        0 => true,
        1 => theta[0] < FRAC_PI_2,
        _ => theta[0] + theta[1] < FRAC_PI_2,
    }
}
