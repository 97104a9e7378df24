//! Seeded random sampling of Grassmannian points and tangent vectors for the
//! randomized scans.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grassmann::{GrassmannPoint, JordanSpectrum, TangentVector};

pub use rand_chacha::ChaCha8Rng as SampleRng;

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
/// of `R`'s diagonal absorbed).
pub fn random_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_matrix(k, k, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Point with prescribed Jordan angles (any order) and random singular
/// frames.
pub fn point_with_angles<R: Rng + ?Sized>(n: usize, m: usize, angles: &[f64], rng: &mut R) -> GrassmannPoint {
    assert_eq!(angles.len(), n.min(m));
    let mut theta: Vec<f64> = angles.to_vec();
    theta.sort_by(|a, b| b.total_cmp(a));
    let spectrum = JordanSpectrum { theta, u: random_orthogonal(n, rng), q: random_orthogonal(m, rng) };
    GrassmannPoint::from_spectrum(spectrum).expect("angles in [0, pi/2)")
}

/// Random point with `1 <= v <= v_max`.
///
/// The target `log v` is drawn uniformly in `[0, log v_max]` and split among
/// the angles with random weights; a fifth of the draws put `v` exactly at
/// `v_max` so the boundary of the sub-level set is exercised.
pub fn point_with_v_at_most<R: Rng + ?Sized>(n: usize, m: usize, v_max: f64, rng: &mut R) -> GrassmannPoint {
    let p = n.min(m);
    let log_max = libm::log(v_max);
    let log_v = if rng.random_bool(0.2) { log_max * (1.0 - 1e-12) } else { rng.random::<f64>() * log_max };
    let weights: Vec<f64> = (0..p).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let angles: Vec<f64> = weights
        .iter()
        .map(|w| {
            // log sec θ = share of log v
            let sec = libm::exp(log_v * w / total);
            libm::acos(1.0 / sec).min(FRAC_PI_2 - 1e-12)
        })
        .collect();
    point_with_angles(n, m, &angles, rng)
}

/// Gaussian tangent vector.
pub fn random_tangent<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> TangentVector {
    TangentVector::new(gaussian_matrix(n, m, rng))
}

/// Dimensions `(n, m)` drawn uniformly from `1..=max_dim` each.
pub fn random_dims<R: Rng + ?Sized>(max_dim: usize, rng: &mut R) -> (usize, usize) {
    (rng.random_range(1..=max_dim), rng.random_range(1..=max_dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::v_of;
    use rand::SeedableRng;

    #[test]
    fn sampled_points_respect_v_bound() {
        let mut rng = SampleRng::seed_from_u64(7);
        for _ in 0..500 {
            let (n, m) = random_dims(3, &mut rng);
            let p = point_with_v_at_most(n, m, 2.0, &mut rng);
            let v = v_of(&p);
            assert!((1.0..=2.0 + 1e-12).contains(&v), "v = {v}");
        }
    }

    #[test]
    fn orthogonal_matrices_are_orthogonal() {
        let mut rng = SampleRng::seed_from_u64(1);
        let q = random_orthogonal(3, &mut rng);
        assert!((q.transpose() * &q - DMatrix::identity(3, 3)).amax() < 1e-14);
    }
}
