//! Finite-difference Riemannian geometry of `G(n,m)` in chart coordinates.
//!
//! Everything here is computed from the metric tensor alone (Christoffel
//! symbols by central differences, Hessians by second differences, geodesics
//! by explicit integration) and never calls the closed forms of
//! [`crate::grassmann`] beyond constructing points. It is the reference the
//! closed forms are tested against.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::grassmann::{GrassmannPoint, TangentVector};
use crate::linalg;
use crate::{Error, Result};

/// Gram matrices whose condition number exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e10;
/// Default central-difference step on the entries of `Z`.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Largest geodesic integration step.
pub const MAX_GEODESIC_STEP: f64 = 1e-3;
/// Chart coordinates beyond this size (a Jordan angle within ~1e-8 of π/2)
/// count as leaving the chart.
pub const MAX_CHART_COORDINATE: f64 = 1e8;

pub type GramEvaluator = fn(&DMatrix<f64>) -> DMatrix<f64>;

/// A metric on the chart given pointwise by the Gram matrix of the
/// coordinate basis `E_{iα}` (flattened as `i * m + α`).
#[derive(Clone, Copy)]
pub struct MetricField {
    pub n: usize,
    pub m: usize,
    pub step: f64,
    pub evaluator: GramEvaluator,
}

impl core::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MetricField")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

/// `g_{iα,jβ} = tr((I + ZZᵀ)⁻¹ E_{iα} (I + ZᵀZ)⁻¹ E_{jβ}ᵀ)`, evaluated term by
/// term.
pub fn canonical_gram(z: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = z.shape();
    let a = DMatrix::identity(n, n) + z * z.transpose();
    let b = DMatrix::identity(m, m) + z.transpose() * z;
    let a_inv = a.try_inverse().expect("I + ZZᵀ invertible");
    let b_inv = b.try_inverse().expect("I + ZᵀZ invertible");
    let d = n * m;
    let mut g = DMatrix::zeros(d, d);
    for r in 0..d {
        let mut e_r = DMatrix::zeros(n, m);
        e_r[(r / m, r % m)] = 1.0;
        let left = &a_inv * e_r * &b_inv;
        for c in 0..d {
            // tr(left · E_cᵀ) picks the (i, α) entry of `left`.
            g[(r, c)] = left[(c / m, c % m)];
        }
    }
    g
}

impl MetricField {
    pub fn canonical(n: usize, m: usize) -> Self {
        MetricField { n, m, step: DEFAULT_STEP, evaluator: canonical_gram }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn gram(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        (self.evaluator)(z)
    }

    fn shifted(&self, z: &DMatrix<f64>, coord: usize, amount: f64) -> DMatrix<f64> {
        let mut out = z.clone();
        out[(coord / self.m, coord % self.m)] += amount;
        out
    }

    fn check(&self, z: &DMatrix<f64>) -> Result<()> {
        if z.shape() != (self.n, self.m) {
            return Err(Error::Dimension("point does not match the metric field".into()));
        }
        Ok(())
    }
}

/// Christoffel symbols `Γ^c_{ab}` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffels {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.data[(c * self.dim + a) * self.dim + b]
    }

    /// `Γ^c_{ab} xᵃ yᵇ` for every `c`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|c| {
                let mut s = 0.0;
                for a in 0..d {
                    if x[a] == 0.0 {
                        continue;
                    }
                    let row = &self.data[(c * d + a) * d..(c * d + a + 1) * d];
                    s += x[a] * row.iter().zip(y).map(|(g, yb)| g * yb).sum::<f64>();
                }
                s
            })
            .collect()
    }
}

/// Metric derivative `∂_c g` for each coordinate `c`, by central differences.
pub fn metric_derivatives(mf: &MetricField, z: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let s = mf.step;
    (0..mf.dim()).map(|c| (mf.gram(&mf.shifted(z, c, s)) - mf.gram(&mf.shifted(z, c, -s))) / (2.0 * s)).collect()
}

fn christoffels_at(mf: &MetricField, z: &DMatrix<f64>) -> Result<Christoffels> {
    let g = mf.gram(z);
    let cond = linalg::spd_condition(&g);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Oracle(alloc::format!("ill-conditioned Gram matrix (cond {cond:e})")));
    }
    let g_inv = linalg::spd_inverse(&g).ok_or_else(|| Error::Oracle("Gram matrix not SPD".into()))?;
    let dg = metric_derivatives(mf, z);
    let d = mf.dim();
    // lowered[a][b][e] = ½(∂_a g_{be} + ∂_b g_{ae} - ∂_e g_{ab})
    let mut lowered = vec![0.0; d * d * d];
    for a in 0..d {
        for b in 0..d {
            for e in 0..d {
                lowered[(a * d + b) * d + e] = 0.5 * (dg[a][(b, e)] + dg[b][(a, e)] - dg[e][(a, b)]);
            }
        }
    }
    let mut data = vec![0.0; d * d * d];
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut s = 0.0;
                for e in 0..d {
                    s += g_inv[(c, e)] * lowered[(a * d + b) * d + e];
                }
                data[(c * d + a) * d + b] = s;
            }
        }
    }
    Ok(Christoffels { dim: d, data })
}

/// Levi-Civita connection of the metric field at `p`, by central differences.
pub fn christoffels_fd(mf: &MetricField, p: &GrassmannPoint) -> Result<Christoffels> {
    mf.check(p.z())?;
    christoffels_at(mf, p.z())
}

/// `Hess(f)(x,x) = xᵃxᵇ(∂_a∂_b f - Γ^c_{ab} ∂_c f)` with all derivatives by
/// central differences.
pub fn covariant_hessian_fd(
    mf: &MetricField,
    scalar: &dyn Fn(&DMatrix<f64>) -> f64,
    p: &GrassmannPoint,
    x: &TangentVector,
) -> Result<f64> {
    mf.check(p.z())?;
    let norm = x.x.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let dir = &x.x / norm;
    let z = p.z();
    let s = mf.step;
    let f0 = scalar(z);
    let second = (scalar(&(z + &dir * s)) - 2.0 * f0 + scalar(&(z - &dir * s))) / (s * s);

    let gamma = christoffels_at(mf, z)?;
    let flat: Vec<f64> = (0..mf.dim()).map(|k| dir[(k / mf.m, k % mf.m)]).collect();
    let contracted = gamma.contract(&flat, &flat);
    let mut correction = 0.0;
    for (c, gc) in contracted.iter().enumerate() {
        let grad = (scalar(&mf.shifted(z, c, s)) - scalar(&mf.shifted(z, c, -s))) / (2.0 * s);
        correction += gc * grad;
    }
    Ok(norm * norm * (second - correction))
}

fn flatten(x: &DMatrix<f64>, m: usize) -> DVector<f64> {
    DVector::from_fn(x.len(), |k, _| x[(k / m, k % m)])
}

fn unflatten(v: &DVector<f64>, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |i, a| v[i * m + a])
}

/// Endpoint position and velocity of the geodesic through `start` with
/// initial velocity `x`, integrated with classical RK4 for arc length
/// `length` (step at most [`MAX_GEODESIC_STEP`]).
pub fn geodesic_endpoint(
    mf: &MetricField,
    start: &DMatrix<f64>,
    x: &DMatrix<f64>,
    length: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    mf.check(start)?;
    if length < 0.0 || !length.is_finite() {
        return Err(Error::InvalidArgument("geodesic length must be finite and >= 0".into()));
    }
    let (n, m) = (mf.n, mf.m);
    let steps = libm::ceil(length / MAX_GEODESIC_STEP) as usize;
    if steps == 0 {
        return Ok((start.clone(), x.clone()));
    }
    let h = length / steps as f64;
    let d = mf.dim();

    let accel = |pos: &DVector<f64>, vel: &DVector<f64>| -> Result<DVector<f64>> {
        let gamma = christoffels_at(mf, &unflatten(pos, n, m))?;
        let c = gamma.contract(vel.as_slice(), vel.as_slice());
        Ok(DVector::from_fn(d, |k, _| -c[k]))
    };

    let mut pos = flatten(start, m);
    let mut vel = flatten(x, m);
    for step in 0..steps {
        let exit = || Error::ChartExit { arc_length: step as f64 * h };
        let k1v = accel(&pos, &vel).map_err(|_| exit())?;
        let k1x = vel.clone();
        let p2 = &pos + &k1x * (0.5 * h);
        let v2 = &vel + &k1v * (0.5 * h);
        let k2v = accel(&p2, &v2).map_err(|_| exit())?;
        let p3 = &pos + &v2 * (0.5 * h);
        let v3 = &vel + &k2v * (0.5 * h);
        let k3v = accel(&p3, &v3).map_err(|_| exit())?;
        let p4 = &pos + &v3 * h;
        let v4 = &vel + &k3v * h;
        let k4v = accel(&p4, &v4).map_err(|_| exit())?;
        pos += (&k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        vel += (&k1v + &k2v * 2.0 + &k3v * 2.0 + &k4v) * (h / 6.0);
        if pos.iter().chain(vel.iter()).any(|x| !x.is_finite()) || pos.amax() > MAX_CHART_COORDINATE {
            return Err(exit());
        }
    }
    Ok((unflatten(&pos, n, m), unflatten(&vel, n, m)))
}

/// Point reached by the unit-speed geodesic from `p0` along `x`.
pub fn geodesic_shoot(mf: &MetricField, p0: &GrassmannPoint, x: &TangentVector, length: f64) -> Result<GrassmannPoint> {
    mf.check(p0.z())?;
    let flat = flatten(&x.x, mf.m);
    let speed2 = flat.dot(&(mf.gram(p0.z()) * &flat));
    if (speed2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(alloc::format!("initial velocity must have unit length (|x|² = {speed2})")));
    }
    let (z, _) = geodesic_endpoint(mf, p0.z(), &x.x, length)?;
    Ok(GrassmannPoint::new(z))
}

/// Metric speed `g(ż, ż)^{1/2}` of a chart velocity.
pub fn speed(mf: &MetricField, z: &DMatrix<f64>, zdot: &DMatrix<f64>) -> f64 {
    let v = flatten(zdot, mf.m);
    libm::sqrt(v.dot(&(mf.gram(z) * &v)))
}

/// Distance from `P0` by the shooting method: find the initial velocity at
/// `Z = 0` whose geodesic hits `p`, and return its length.
pub fn distance_bruteforce(mf: &MetricField, p: &GrassmannPoint) -> Result<f64> {
    mf.check(p.z())?;
    let (n, m) = (mf.n, mf.m);
    let d = mf.dim();
    let target = flatten(p.z(), m);
    let scale = target.norm();
    if scale < 1e-14 {
        return Ok(0.0);
    }
    let origin = DMatrix::zeros(n, m);
    let shoot = |u: &DVector<f64>| -> Result<DVector<f64>> {
        let len = u.norm();
        if len == 0.0 {
            return Ok(DVector::zeros(d));
        }
        let dir = unflatten(&(u / len), n, m);
        let (end, _) = geodesic_endpoint(mf, &origin, &dir, len)?;
        Ok(flatten(&end, m))
    };

    // Straight chart line toward the target, length guessed from the
    // one-dimensional profile Z = tan(s).
    let mut u = &target * (libm::atan(scale) / scale);
    let mut residual = shoot(&u)? - &target;
    for _ in 0..100 {
        if residual.amax() < 1e-10 {
            return Ok(u.norm());
        }
        let eps = 1e-6;
        let mut jac = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut up = u.clone();
            up[k] += eps;
            let mut dn = u.clone();
            dn[k] -= eps;
            let col = (shoot(&up)? - shoot(&dn)?) / (2.0 * eps);
            jac.set_column(k, &col);
        }
        let delta = jac.lu().solve(&(-&residual)).ok_or_else(|| Error::Oracle("singular shooting Jacobian".into()))?;
        let mut damping = 1.0;
        loop {
            let cand = &u + &delta * damping;
            match shoot(&cand) {
                Ok(end) => {
                    let r = end - &target;
                    if r.amax() < residual.amax() || damping < 1e-3 {
                        u = cand;
                        residual = r;
                        break;
                    }
                }
                Err(Error::ChartExit { .. }) if damping >= 1e-3 => {}
                Err(e) => return Err(e),
            }
            damping *= 0.5;
        }
    }
    Err(Error::Oracle("shooting did not converge in 100 iterations".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{self, TangentVector};
    use approx::assert_relative_eq;

    #[test]
    fn gram_at_origin_is_identity() {
        for (n, m) in [(1, 1), (2, 3), (3, 2)] {
            let g = canonical_gram(&DMatrix::zeros(n, m));
            assert_eq!(g, DMatrix::identity(n * m, n * m));
        }
    }

    #[test]
    fn christoffels_vanish_at_origin() {
        let mf = MetricField::canonical(2, 2);
        let gamma = christoffels_fd(&mf, &GrassmannPoint::origin(2, 2)).unwrap();
        assert!(gamma.data.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn christoffels_are_symmetric_in_lower_indices() {
        let z = DMatrix::from_row_slice(2, 3, &[0.3, -0.2, 0.5, 0.1, 0.7, -0.4]);
        let mf = MetricField::canonical(2, 3);
        let gamma = christoffels_fd(&mf, &GrassmannPoint::new(z)).unwrap();
        let d = gamma.dim();
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    assert!((gamma.get(c, a, b) - gamma.get(c, b, a)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn connection_is_metric_compatible() {
        let z = DMatrix::from_row_slice(2, 2, &[0.4, -0.3, 0.2, 0.6]);
        let mf = MetricField::canonical(2, 2);
        let gamma = christoffels_fd(&mf, &GrassmannPoint::new(z.clone())).unwrap();
        let g = mf.gram(&z);
        let dg = metric_derivatives(&mf, &z);
        let d = mf.dim();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut r = dg[a][(b, c)];
                    for e in 0..d {
                        r -= gamma.get(e, a, b) * g[(e, c)] + gamma.get(e, a, c) * g[(b, e)];
                    }
                    assert!(r.abs() < 1e-6, "compatibility residual {r}");
                }
            }
        }
    }

    #[test]
    fn ill_conditioned_gram_is_refused() {
        let z = DMatrix::from_row_slice(1, 1, &[1e6]);
        let mf = MetricField::canonical(1, 1);
        let gamma = christoffels_fd(&mf, &GrassmannPoint::new(z));
        // A 1x1 Gram matrix is always perfectly conditioned.
        assert!(gamma.is_ok());
        let z = DMatrix::from_row_slice(1, 2, &[1e6, 0.0]);
        let mf = MetricField::canonical(1, 2);
        assert!(matches!(christoffels_fd(&mf, &GrassmannPoint::new(z)), Err(Error::Oracle(_))));
    }

    #[test]
    fn hessian_of_constant_vanishes() {
        let mf = MetricField::canonical(2, 2);
        let p = GrassmannPoint::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]));
        let x = TangentVector::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]));
        let h = covariant_hessian_fd(&mf, &|_z| 3.5, &p, &x).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn hessian_of_v_at_origin_is_metric() {
        let mf = MetricField::canonical(2, 3);
        let p = GrassmannPoint::origin(2, 3);
        let x = TangentVector::new(DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 0.2, 0.3, 0.0, 0.8]));
        let v = |z: &DMatrix<f64>| grassmann::v_of(&GrassmannPoint::new(z.clone()));
        let h = covariant_hessian_fd(&mf, &v, &p, &x).unwrap();
        assert_relative_eq!(h, x.x.norm_squared(), epsilon = 1e-6);
    }

    #[test]
    fn zero_length_geodesic_stays_put() {
        let mf = MetricField::canonical(1, 1);
        let p = GrassmannPoint::new(DMatrix::from_element(1, 1, 0.3));
        let x = TangentVector::new(DMatrix::from_element(1, 1, 1.09));
        let q = geodesic_shoot(&mf, &p, &x, 0.0).unwrap();
        assert_eq!(q.z(), p.z());
    }

    #[test]
    fn circle_geodesic_is_tangent_profile() {
        // On G(1,1) the chart coordinate along the unit geodesic from 0 is tan(s).
        let mf = MetricField::canonical(1, 1);
        let x = TangentVector::new(DMatrix::from_element(1, 1, 1.0));
        for s in [0.25, 0.7, 1.2] {
            let q = geodesic_shoot(&mf, &GrassmannPoint::origin(1, 1), &x, s).unwrap();
            assert_relative_eq!(q.z()[(0, 0)], libm::tan(s), max_relative = 1e-8);
        }
    }

    #[test]
    fn unnormalized_initial_velocity_is_rejected() {
        let mf = MetricField::canonical(1, 1);
        let x = TangentVector::new(DMatrix::from_element(1, 1, 2.0));
        assert!(geodesic_shoot(&mf, &GrassmannPoint::origin(1, 1), &x, 0.1).is_err());
    }

    #[test]
    fn shooting_leaving_the_chart_reports_arc_length() {
        let mf = MetricField::canonical(1, 1);
        let x = DMatrix::from_element(1, 1, 1.0);
        match geodesic_endpoint(&mf, &DMatrix::zeros(1, 1), &x, 2.0) {
            Err(Error::ChartExit { arc_length }) => {
                assert!(
                    arc_length > 1.4 && arc_length < core::f64::consts::FRAC_PI_2 + 2.0 * MAX_GEODESIC_STEP,
                    "{arc_length}"
                )
            }
            other => panic!("expected chart exit, got {other:?}"),
        }
    }

    #[test]
    fn distance_of_single_angle_is_the_angle() {
        let mf = MetricField::canonical(2, 2);
        let mut z = DMatrix::zeros(2, 2);
        z[(0, 0)] = libm::tan(0.8);
        let d = distance_bruteforce(&mf, &GrassmannPoint::new(z)).unwrap();
        assert_relative_eq!(d, 0.8, epsilon = 1e-4);
        assert_eq!(distance_bruteforce(&mf, &GrassmannPoint::origin(2, 2)).unwrap(), 0.0);
    }
}
