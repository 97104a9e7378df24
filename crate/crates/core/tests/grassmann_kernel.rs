//! Kernel examples and invariants of the chart geometry, with the
//! finite-difference and shooting oracles as references.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, SQRT_2};

use approx::assert_relative_eq;
use grassflow_core::grassmann::{
    barrier_sec, barrier_v32, coords_of, dv_at, hess_bound_sec, hess_bound_v32, hess_v, hess_v_lower_bound_gap,
    hess_v_matrix, in_bjx, jordan_of, metric_at, metric_matrix, partial_gauss_maps, relative_point, rho_of,
    s2xs2_split, v_of, w_of, FramePair, GrassmannPoint, JordanSpectrum, TangentVector, SEC_BALL_RADIUS,
};
use grassflow_core::linalg;
use grassflow_core::oracle::{
    covariant_hessian_fd, distance_bruteforce, geodesic_endpoint, geodesic_shoot, speed, MetricField,
};
use grassflow_core::sampling::{self, SampleRng};
use grassflow_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn point(rows: usize, cols: usize, data: &[f64]) -> GrassmannPoint {
    GrassmannPoint::new(DMatrix::from_row_slice(rows, cols, data))
}

fn line_pair(t: f64) -> FramePair {
    FramePair::new(DMatrix::from_row_slice(1, 2, &[t.cos(), t.sin()]), DMatrix::from_row_slice(1, 2, &[1.0, 0.0]))
        .unwrap()
}

fn v_scalar(z: &DMatrix<f64>) -> f64 {
    v_of(&GrassmannPoint::new(z.clone()))
}

fn rho_scalar(z: &DMatrix<f64>) -> f64 {
    rho_of(&GrassmannPoint::new(z.clone()))
}

fn random_frame_pair(n: usize, m: usize, rng: &mut SampleRng) -> FramePair {
    let q = sampling::random_orthogonal(n + m, rng);
    let p0 = q.rows(0, n).clone_owned();
    let p = sampling::gaussian_matrix(n, n + m, rng);
    FramePair::new(linalg::orthonormalize_rows(&p).unwrap(), p0).unwrap()
}

#[test]
fn w_examples() {
    let p0 = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let same = FramePair::new(p0.clone(), p0).unwrap();
    assert_relative_eq!(w_of(&same), 1.0, epsilon = 1e-15);
    for t in [0.0, 0.3, 1.0, 1.4] {
        assert_relative_eq!(w_of(&line_pair(t)), t.cos(), epsilon = 1e-15);
    }
}

#[test]
fn non_orthonormal_frames_are_rejected() {
    let bad = DMatrix::from_row_slice(1, 2, &[1.0, 0.1]);
    let good = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    assert!(matches!(FramePair::new(bad.clone(), good.clone()), Err(Error::InvalidFrame(_))));
    let fixed = linalg::orthonormalize_rows(&bad).unwrap();
    assert!(FramePair::new(fixed, good).is_ok());
}

#[test]
fn coords_examples() {
    let p0 = DMatrix::from_row_slice(2, 5, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    let same = FramePair::new(p0.clone(), p0).unwrap();
    assert_eq!(coords_of(&same).unwrap().z().amax(), 0.0);
    for t in [0.1, 0.7, 1.3] {
        let z = coords_of(&line_pair(t)).unwrap();
        assert_relative_eq!(z.z()[(0, 0)], t.tan(), max_relative = 1e-13);
    }
    assert!(matches!(coords_of(&line_pair(FRAC_PI_2 + 0.2)), Err(Error::OutsideChart { .. })));
}

#[test]
fn w_times_v_is_one_and_coords_round_trip() {
    let mut rng = SampleRng::seed_from_u64(21);
    let mut checked = 0;
    for _ in 0..500 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let fp = random_frame_pair(n, m, &mut rng);
        let w = w_of(&fp);
        if w <= 1e-3 {
            assert!(w <= 0.0 || coords_of(&fp).is_ok());
            continue;
        }
        let p = coords_of(&fp).unwrap();
        assert!((w * v_of(&p) - 1.0).abs() <= 1e-10, "w={w} v={}", v_of(&p));
        checked += 1;
    }
    assert!(checked > 100);

    for _ in 0..200 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let z = sampling::gaussian_matrix(n, m, &mut rng);
        let back = coords_of(&FramePair::from_point(&GrassmannPoint::new(z.clone()))).unwrap();
        assert!((back.z() - &z).amax() <= 1e-10 * z.amax().max(1.0));
    }
}

#[test]
fn v_examples_and_angle_identity() {
    assert_eq!(v_of(&GrassmannPoint::origin(2, 3)), 1.0);
    let d = point(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    assert_relative_eq!(v_of(&d), SQRT_2, epsilon = 1e-14);
    assert_relative_eq!(d.jordan().theta[0], FRAC_PI_4, epsilon = 1e-14);
    assert_eq!(d.jordan().theta[1], 0.0);

    let mut rng = SampleRng::seed_from_u64(22);
    for _ in 0..1000 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let p = GrassmannPoint::new(sampling::gaussian_matrix(n, m, &mut rng));
        let v = v_of(&p);
        let product: f64 = p.jordan().theta.iter().map(|t| 1.0 / t.cos()).product();
        assert!(v >= 1.0);
        assert!((v - product).abs() <= 1e-10 * v, "v={v} prod={product}");
    }
}

#[test]
fn jordan_examples() {
    assert!(jordan_of(&GrassmannPoint::origin(3, 2)).theta.iter().all(|t| *t == 0.0));
    let p = point(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    for t in &p.jordan().theta {
        assert_relative_eq!(*t, FRAC_PI_4, epsilon = 1e-14);
    }
}

#[test]
fn jordan_angles_match_frame_eigenvalues() {
    let mut rng = SampleRng::seed_from_u64(23);
    for _ in 0..100 {
        let p = GrassmannPoint::new(sampling::gaussian_matrix(3, 2, &mut rng));
        let fp = FramePair::from_point(&p);
        let w = fp.p_frame() * fp.p0_frame().transpose();
        let eig = (w.transpose() * &w).symmetric_eigenvalues();
        let mut angles: Vec<f64> = eig.iter().map(|e| e.clamp(0.0, 1.0).sqrt().acos()).collect();
        angles.sort_by(|a, b| b.total_cmp(a));
        let theta = &p.jordan().theta;
        assert!(theta.windows(2).all(|w| w[0] >= w[1]));
        for (k, t) in theta.iter().enumerate() {
            assert!((t - angles[k]).abs() <= 1e-7, "theta={theta:?} eig angles={angles:?}");
        }
        assert!(angles[2].abs() <= 1e-7);
        assert!((p.jordan().reconstruct() - p.z()).amax() <= 1e-12 * p.z().amax().max(1.0));
    }
}

#[test]
fn metric_examples() {
    let mut rng = SampleRng::seed_from_u64(24);
    let p = GrassmannPoint::new(sampling::gaussian_matrix(2, 3, &mut rng));
    let x = sampling::random_tangent(2, 3, &mut rng);
    assert_eq!(metric_at(&p, &TangentVector::zeros(2, 3), &x), 0.0);
    for lambda in [0.0, 0.5, 2.0] {
        let p = point(1, 1, &[lambda]);
        let e = TangentVector::basis(1, 1, 0, 0);
        let expected = 1.0 / ((1.0 + lambda * lambda) * (1.0 + lambda * lambda));
        assert_relative_eq!(metric_at(&p, &e, &e), expected, max_relative = 1e-14);
    }
    let g = metric_matrix(&GrassmannPoint::origin(2, 3));
    assert_eq!(g, DMatrix::identity(6, 6));
    let g = metric_matrix(&p);
    assert!((&g - g.transpose()).amax() <= 1e-15);
    assert!(g.cholesky().is_some());
}

#[test]
fn hess_v_examples() {
    let mut rng = SampleRng::seed_from_u64(25);
    let origin = GrassmannPoint::origin(3, 2);
    for _ in 0..20 {
        let x = sampling::random_tangent(3, 2, &mut rng);
        assert_relative_eq!(hess_v(&origin, &x), metric_at(&origin, &x, &x), max_relative = 1e-14);
        let p = sampling::point_with_v_at_most(3, 2, 2.0, &mut rng);
        assert_eq!(hess_v(&p, &TangentVector::zeros(3, 2)), 0.0);
        let h = hess_v_matrix(&p);
        assert!((&h - h.transpose()).amax() <= 1e-14 * h.amax());
    }
}

#[test]
fn dv_examples() {
    let origin = GrassmannPoint::origin(2, 2);
    assert_eq!(dv_at(&origin, &TangentVector::basis(2, 2, 1, 0)), 0.0);
    for lambda in [0.3_f64, 1.0, 3.0] {
        let p = point(1, 1, &[lambda]);
        let dv = dv_at(&p, &TangentVector::basis(1, 1, 0, 0));
        assert_relative_eq!(dv, lambda / (1.0 + lambda * lambda).sqrt(), max_relative = 1e-14);
    }
    let mut rng = SampleRng::seed_from_u64(26);
    for _ in 0..200 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, 3.0, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let s = 1e-5;
        let fd = (v_scalar(&(p.z() + &x.x * s)) - v_scalar(&(p.z() - &x.x * s))) / (2.0 * s);
        assert!((dv_at(&p, &x) - fd).abs() <= 1e-8 * fd.abs().max(1.0), "{} vs {fd}", dv_at(&p, &x));
    }
}

#[test]
fn hess_v_is_gauge_invariant_on_repeated_angles() {
    let mut rng = SampleRng::seed_from_u64(27);
    for (n, m, angles) in [(3, 3, vec![0.6, 0.6, 0.2]), (2, 4, vec![0.4, 0.4]), (3, 2, vec![0.0, 0.0])] {
        let base = JordanSpectrum {
            theta: angles.clone(),
            u: sampling::random_orthogonal(n, &mut rng),
            q: sampling::random_orthogonal(m, &mut rng),
        };
        // Rotate the degenerate singular pair; for zero angles also rotate
        // the kernel directions independently.
        let r = sampling::random_orthogonal(2, &mut rng);
        let mut u = base.u.clone();
        let mut q = base.q.clone();
        let u_block = base.u.columns(0, 2) * &r;
        u.columns_mut(0, 2).copy_from(&u_block);
        if angles[0] == 0.0 {
            let r2 = sampling::random_orthogonal(m, &mut rng);
            q = &base.q * r2;
        } else {
            let q_block = base.q.columns(0, 2) * &r;
            q.columns_mut(0, 2).copy_from(&q_block);
        }
        let a = GrassmannPoint::from_spectrum(base).unwrap();
        let b = GrassmannPoint::from_spectrum(JordanSpectrum { theta: angles, u, q }).unwrap();
        assert!((a.z() - b.z()).amax() <= 1e-12);
        for _ in 0..10 {
            let x = sampling::random_tangent(n, m, &mut rng);
            assert_relative_eq!(hess_v(&a, &x), hess_v(&b, &x), max_relative = 1e-10);
        }
    }
}

#[test]
fn lower_bound_gap_is_nonnegative_on_v2() {
    let origin = GrassmannPoint::origin(2, 3);
    let mut rng = SampleRng::seed_from_u64(28);
    for _ in 0..10 {
        let x = sampling::random_tangent(2, 3, &mut rng);
        assert!(hess_v_lower_bound_gap(&origin, &x).unwrap().abs() <= 1e-15);
    }
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, 2.0, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let gap = hess_v_lower_bound_gap(&p, &x).unwrap();
        let g = metric_at(&p, &x, &x);
        assert!(gap >= -1e-8 * g, "gap={gap} theta={:?}", p.jordan().theta);
        worst = worst.min(gap / g);
    }
    assert!(worst.is_finite());
    let beyond = point(1, 1, &[2.0]);
    assert!(matches!(hess_v_lower_bound_gap(&beyond, &TangentVector::basis(1, 1, 0, 0)), Err(Error::OutsideV2 { .. })));
}

#[test]
fn lower_bound_is_sharp_in_one_dimension() {
    // On a circle, v = sec θ and every term is explicit; the bound is an
    // equality for all v < 2.
    for lambda in [0.1, 0.5, 1.0, 1.5, 1.7] {
        let p = point(1, 1, &[lambda]);
        let gap = hess_v_lower_bound_gap(&p, &TangentVector::basis(1, 1, 0, 0)).unwrap();
        assert!(gap.abs() <= 1e-13, "lambda={lambda} gap={gap}");
    }
}

#[test]
fn v32_barrier_examples() {
    assert_eq!(barrier_v32(&GrassmannPoint::origin(2, 2)).unwrap(), 1.0);
    let mut last = 0.0;
    for k in 1..=40 {
        let lambda = 3.0_f64.sqrt() * (1.0 - 0.5_f64.powi(k));
        let h = barrier_v32(&point(2, 2, &[lambda, 0.0, 0.0, 0.0])).unwrap();
        assert!(h > last);
        last = h;
    }
    assert!(last > 1e10);
    assert!(barrier_v32(&point(1, 1, &[3.0_f64.sqrt() + 1e-9])).is_err());

    let mut rng = SampleRng::seed_from_u64(29);
    for _ in 0..10_000 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, 1.999, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let slack = hess_bound_v32(&p, &x).unwrap();
        assert!(slack >= -1e-8 * metric_at(&p, &x, &x), "slack={slack}");
    }
}

#[test]
fn sec_barrier_examples() {
    assert_eq!(barrier_sec(&GrassmannPoint::origin(2, 2)).unwrap(), 1.0);
    let theta = FRAC_PI_4 / SQRT_2;
    let p = point(1, 1, &[theta.tan()]);
    assert_relative_eq!(barrier_sec(&p).unwrap(), 2.0, max_relative = 1e-13);
    let outside = point(2, 2, &[1.2_f64.tan(), 0.0, 0.0, 0.0]);
    assert!(matches!(barrier_sec(&outside), Err(Error::OutsideGeodesicBall { .. })));

    let mut rng = SampleRng::seed_from_u64(30);
    for _ in 0..5000 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let rho = rng.random::<f64>() * 0.999 * SEC_BALL_RADIUS;
        let p = sampling::point_with_v_at_most(n, m, 3.0, &mut rng);
        let scale = if rho_of(&p) > 0.0 { rho / rho_of(&p) } else { 0.0 };
        let angles: Vec<f64> = p.jordan().theta.iter().map(|t| t * scale).collect();
        let p = sampling::point_with_angles(n, m, &angles, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let slack = hess_bound_sec(&p, &x).unwrap();
        assert!(slack >= -1e-8 * metric_at(&p, &x, &x), "slack={slack} rho={rho}");
    }
}

#[test]
fn bjx_examples_and_inclusion() {
    assert!(in_bjx(&GrassmannPoint::origin(2, 2)));
    let mut rng = SampleRng::seed_from_u64(31);
    let p = sampling::point_with_angles(2, 2, &[FRAC_PI_3, FRAC_PI_3], &mut rng);
    assert!(!in_bjx(&p));
    for _ in 0..10_000 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, 1.999_999, &mut rng);
        assert!(in_bjx(&p), "theta={:?}", p.jordan().theta);
    }
}

#[test]
fn hess_v_positive_definite_exactly_on_bjx() {
    let mut rng = SampleRng::seed_from_u64(32);
    let (mut inside, mut outside) = (0, 0);
    for _ in 0..2000 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=3);
        let angles: Vec<f64> = (0..n.min(m)).map(|_| rng.random::<f64>() * 1.4).collect();
        let p = sampling::point_with_angles(n, m, &angles, &mut rng);
        let theta = &p.jordan().theta;
        if (theta[0] + theta[1] - FRAC_PI_2).abs() < 0.05 {
            continue;
        }
        let eig = linalg::generalized_eigenvalues(&hess_v_matrix(&p), &metric_matrix(&p)).unwrap();
        let min = eig.min();
        if in_bjx(&p) {
            assert!(min > 0.0, "theta={theta:?} min={min}");
            inside += 1;
        } else {
            assert!(min <= 0.0, "theta={theta:?} min={min}");
            outside += 1;
        }
    }
    assert!(inside > 100 && outside > 100);
}

#[test]
fn s2xs2_examples() {
    let e = |rows: &[[f64; 4]]| DMatrix::from_row_slice(2, 4, &rows.concat());
    let p0 = e(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]);
    let (a, b) = s2xs2_split(&FramePair::new(p0.clone(), p0.clone()).unwrap()).unwrap();
    assert_eq!(a, [0.0, 0.0, 1.0]);
    assert_eq!(b, [0.0, 0.0, 1.0]);

    // ε₁∧ε₃ = ((e13 - e24) + (e13 + e24)) / 2: first axis of both bases.
    let p13 = e(&[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]);
    let (a, b) = s2xs2_split(&FramePair::new(p13, p0.clone()).unwrap()).unwrap();
    for (got, want) in a.iter().chain(b.iter()).zip([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]) {
        assert_relative_eq!(*got, want, epsilon = 1e-15);
    }
    // ε₁∧ε₄ = ((e14 + e23) + (e14 - e23)) / 2 and ε₂∧ε₃ splits with opposite signs.
    let p23 = e(&[[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]);
    let (a, b) = s2xs2_split(&FramePair::new(p23, p0.clone()).unwrap()).unwrap();
    assert_relative_eq!(a[1], 1.0, epsilon = 1e-15);
    assert_relative_eq!(b[1], -1.0, epsilon = 1e-15);

    let mut rng = SampleRng::seed_from_u64(33);
    for _ in 0..100 {
        let fp = random_frame_pair(2, 2, &mut rng);
        let (a, b) = s2xs2_split(&fp).unwrap();
        let t: f64 = rng.random::<f64>() * 6.0;
        let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let rotated = FramePair::new(rot * fp.p_frame(), fp.p0_frame().clone()).unwrap();
        let (ar, br) = s2xs2_split(&rotated).unwrap();
        for k in 0..3 {
            assert!((a[k] - ar[k]).abs() <= 1e-12 && (b[k] - br[k]).abs() <= 1e-12);
        }
        let norm = |u: [f64; 3]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm(a) - 1.0).abs() <= 1e-14 && (norm(b) - 1.0).abs() <= 1e-14);
    }

    let z = sampling::gaussian_matrix(2, 2, &mut rng);
    let from_chart = s2xs2_split(&FramePair::from_point(&GrassmannPoint::new(z.clone()))).unwrap();
    assert_eq!(partial_gauss_maps(&z).unwrap(), from_chart);
    assert!(s2xs2_split(&random_frame_pair(2, 3, &mut rng)).is_err());
}

#[test]
fn rho_examples() {
    assert_eq!(rho_of(&GrassmannPoint::origin(3, 3)), 0.0);
    let mf = MetricField::canonical(2, 2);
    let start = GrassmannPoint::origin(2, 2);
    for theta in [0.2, 0.7, 1.1] {
        let end = geodesic_shoot(&mf, &start, &TangentVector::basis(2, 2, 0, 0), theta).unwrap();
        assert!((rho_of(&end) - theta).abs() <= 1e-4);
        assert!((distance_bruteforce(&mf, &end).unwrap() - theta).abs() <= 1e-4);
    }
    assert_eq!(distance_bruteforce(&mf, &start).unwrap(), 0.0);
}

#[test]
fn hessian_comparison_along_level_sets_of_rho() {
    let mut rng = SampleRng::seed_from_u64(34);
    let limit = FRAC_PI_2 / SQRT_2;
    let mut checked = 0;
    while checked < 100 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        if n * m == 1 {
            // dρ has no kernel on a circle.
            continue;
        }
        let rho = 0.05 + rng.random::<f64>() * (0.95 * limit - 0.05);
        let raw: Vec<f64> = (0..n.min(m)).map(|_| rng.random::<f64>() + 0.01).collect();
        let norm = raw.iter().map(|t| t * t).sum::<f64>().sqrt();
        let angles: Vec<f64> = raw.iter().map(|t| t * rho / norm).collect();
        let p = sampling::point_with_angles(n, m, &angles, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let y = sampling::random_tangent(n, m, &mut rng);
        let dy = grassflow_core::grassmann::drho_at(&p, &y);
        if dy.abs() < 1e-3 {
            continue;
        }
        let dx = grassflow_core::grassmann::drho_at(&p, &x);
        let x = TangentVector::new(&x.x - &y.x * (dx / dy));
        let x = x.scaled(1.0 / metric_at(&p, &x, &x).sqrt());
        let mf = MetricField::canonical(n, m);
        let fd = covariant_hessian_fd(&mf, &rho_scalar, &p, &x).unwrap();
        let comparison = SQRT_2 / (SQRT_2 * rho).tan();
        assert!(fd >= comparison - 1e-6, "rho={rho} fd={fd} bound={comparison}");
        checked += 1;
    }
}

#[test]
fn fd_hessian_converges_at_second_order() {
    let mut rng = SampleRng::seed_from_u64(35);
    let mut ratios = Vec::new();
    for _ in 0..50 {
        let (n, m) = sampling::random_dims(3, &mut rng);
        let p = sampling::point_with_v_at_most(n, m, 2.0, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let closed = hess_v(&p, &x);
        let err = |step: f64| {
            let mf = MetricField::canonical(n, m).with_step(step);
            (covariant_hessian_fd(&mf, &v_scalar, &p, &x).unwrap() - closed).abs()
        };
        let (coarse, fine) = (err(4e-3), err(2e-3));
        if coarse > 1e-7 {
            ratios.push(coarse / fine);
        }
    }
    assert!(ratios.len() > 20);
    for r in &ratios {
        assert!(*r >= 3.0, "ratios {ratios:?}");
    }
}

#[test]
fn fd_hessian_of_v_and_constants_at_examples() {
    let mut rng = SampleRng::seed_from_u64(36);
    let origin = GrassmannPoint::origin(2, 3);
    let mf = MetricField::canonical(2, 3);
    let x = sampling::random_tangent(2, 3, &mut rng);
    let fd = covariant_hessian_fd(&mf, &v_scalar, &origin, &x).unwrap();
    assert!((fd - metric_at(&origin, &x, &x)).abs() <= 1e-6);
    let p = sampling::point_with_v_at_most(2, 3, 2.0, &mut rng);
    assert_eq!(covariant_hessian_fd(&mf, &|_| 4.0, &p, &x).unwrap(), 0.0);
}

#[test]
fn geodesics_keep_speed_and_reverse() {
    let mut rng = SampleRng::seed_from_u64(37);
    for _ in 0..20 {
        let (n, m) = sampling::random_dims(2, &mut rng);
        let mf = MetricField::canonical(n, m);
        let start = sampling::point_with_v_at_most(n, m, 1.3, &mut rng);
        let x = sampling::random_tangent(n, m, &mut rng);
        let x = x.scaled(1.0 / metric_at(&start, &x, &x).sqrt());
        let length = 0.3 + 0.4 * rng.random::<f64>();
        let Ok((end, vel)) = geodesic_endpoint(&mf, start.z(), &x.x, length) else {
            continue;
        };
        assert!((speed(&mf, &end, &vel) - 1.0).abs() <= 1e-6);
        let (back, _) = geodesic_endpoint(&mf, &end, &(-vel), length).unwrap();
        assert!((back - start.z()).amax() <= 1e-5);
    }
}

#[test]
fn distances_respect_triangle_lower_bound() {
    let mut rng = SampleRng::seed_from_u64(38);
    for _ in 0..6 {
        let (n, m) = sampling::random_dims(2, &mut rng);
        let a = sampling::point_with_v_at_most(n, m, 1.25, &mut rng);
        let b = sampling::point_with_v_at_most(n, m, 1.25, &mut rng);
        let rel = relative_point(&a, &b).unwrap();
        let d = distance_bruteforce(&MetricField::canonical(n, m), &rel).unwrap();
        assert!(d >= (rho_of(&a) - rho_of(&b)).abs() - 1e-4);
        assert!(d <= rho_of(&a) + rho_of(&b) + 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chart_invariants(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut rng = SampleRng::seed_from_u64(seed);
        let z = sampling::gaussian_matrix(n, m, &mut rng);
        let p = GrassmannPoint::new(z.clone());
        let v = v_of(&p);
        prop_assert!(v >= 1.0);
        prop_assert!((w_of(&FramePair::from_point(&p)) * v - 1.0).abs() <= 1e-10);
        let x = sampling::random_tangent(n, m, &mut rng);
        let y = sampling::random_tangent(n, m, &mut rng);
        let gxy = metric_at(&p, &x, &y);
        prop_assert!((gxy - metric_at(&p, &y, &x)).abs() <= 1e-12 * (1.0 + gxy.abs()));
        prop_assert!(metric_at(&p, &x, &x) > 0.0);
        prop_assert!(rho_of(&p) < FRAC_PI_2 * (n.min(m) as f64).sqrt());
    }
}
