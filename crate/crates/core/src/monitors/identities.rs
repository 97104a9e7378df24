//! Residuals of the evolution identities along a computed flow.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::calculus::{
    gradient, gradient_lifted, monitored_nodes, require_snapshots, tangential_correction, time_stencil,
};
use super::report::MonitorReport;
use crate::grassmann::{Barrier, TangentVector};
use crate::linalg;
use crate::mcf::{cfl_dt, graph_velocity, metric_of, Frame, LaplaceBeltrami, LocalMetric, MAX_DIM};
use crate::{Error, Result};

/// `C` in the residual tolerance `C (h² + dt)` of the `|F|²` identity.
pub const F2_TOLERANCE_CONSTANT: f64 = 2.0;

/// `C` in the residual tolerance `C (h² + dt) max(1, sup h̃)` of the
/// composition identity, `sup h̃` taken on the first snapshot.
pub const COMPOSITION_TOLERANCE_CONSTANT: f64 = 2.0;

/// `C` in the loose slack tolerance `C (h² + dt)` of the `|B|²` inequality:
/// ten times the Richardson error estimate of the minimum slack between the
/// two finest sine grids, in units of `h² + dt`.
pub const B2_TOLERANCE_CONSTANT: f64 = 1.2;

/// `h_max² + dt` with `dt` the CFL step of the first snapshot.
pub fn discretisation_scale(frames: &[Frame]) -> f64 {
    let s = &frames[0].state;
    let h = s.spec.h_max();
    h * h + cfl_dt(s)
}

/// A scalar field per snapshot, readable on unwrapped indices.
type LiftedField<'a> = dyn Fn(usize, [i64; MAX_DIM]) -> f64 + 'a;

/// `(d/dt - Δ) q` at every node of snapshot `k`, with `d/dt` the derivative
/// along the normal flow: fixed-node time difference minus the tangential
/// correction.
fn heat_operator(frames: &[Frame], k: usize, q: &LiftedField) -> Vec<f64> {
    let times: Vec<f64> = frames.iter().map(|f| f.state.t).collect();
    let (idx, w) = time_stencil(&times, k);
    let s = &frames[k].state;
    let (n, m) = (s.spec.n, s.spec.m);
    let lap = LaplaceBeltrami::new(s).apply_lifted(|kk| q(k, kk));
    let velocity = graph_velocity(s);
    (0..s.spec.node_count())
        .map(|node| {
            let kk = s.spec.unwrapped(node);
            let dq_dt: f64 = (0..3).map(|j| w[j] * q(idx[j], kk)).sum();
            let jet = s.jet(node);
            let metric = metric_of(&jet, n, m);
            let grad = gradient_lifted(s, &|u| q(k, u), node);
            let corr = tangential_correction(&jet, &metric, &velocity[node * m..(node + 1) * m], &grad, n);
            dq_dt - corr - lap[node]
        })
        .collect()
}

fn max_over(nodes: &[usize], field: impl Fn(usize) -> f64) -> f64 {
    nodes.iter().map(|&node| field(node)).fold(0.0, f64::max)
}

/// Residual of `(d/dt - Δ)|F|² = -2n` with `F = (x, f(x))`.
pub fn check_f2_identity(frames: &[Frame], tolerance: Option<f64>) -> Result<MonitorReport> {
    require_snapshots(frames, 3)?;
    let tol = tolerance.unwrap_or(F2_TOLERANCE_CONSTANT * discretisation_scale(frames));
    let mut report = MonitorReport::new("f2_identity", frames, tol);
    let n = frames[0].state.spec.n;
    let m = frames[0].state.spec.m;
    let q = |k: usize, kk: [i64; MAX_DIM]| {
        let s = &frames[k].state;
        let x = s.spec.position(kk);
        let fx: f64 = (0..m)
            .map(|a| {
                let v = s.lifted_value(kk, a);
                v * v
            })
            .sum();
        x.iter().map(|c| c * c).sum::<f64>() + fx
    };
    let mut series = Vec::with_capacity(frames.len());
    for k in 0..frames.len() {
        let heat = heat_operator(frames, k, &q);
        let nodes = monitored_nodes(&frames[k].state);
        series.push(max_over(&nodes, |node| (heat[node] + 2.0 * n as f64).abs()));
    }
    finish_residual(&mut report, series, tol);
    Ok(report)
}

fn finish_residual(report: &mut MonitorReport, series: Vec<f64>, tol: f64) {
    let max = series.iter().copied().fold(0.0, f64::max);
    report.predicate_held = max <= tol;
    report.summary.insert("max_residual".into(), max);
    report.series.insert("max_residual".into(), series);
    report.decide(true);
}

/// Barrier value at every node of a snapshot, or the first node where the
/// barrier is undefined.
fn barrier_field(frame: &Frame, barrier: Barrier) -> core::result::Result<Vec<f64>, usize> {
    let geo = &frame.geometry;
    match barrier {
        Barrier::V => Ok(geo.v_tilde.clone()),
        Barrier::V32 => collect_defined(&geo.h_v32),
        Barrier::Sec => collect_defined(&geo.h_sec),
    }
}

fn collect_defined(values: &[Option<f64>]) -> core::result::Result<Vec<f64>, usize> {
    values.iter().enumerate().map(|(node, v)| v.ok_or(node)).collect()
}

/// `Σ_a Hess(h)(γ_* e_a, γ_* e_a)` over an orthonormal tangent frame
/// `e_a = (g^{-1/2})_{ak} ∂_k`.
fn hessian_trace(frame: &Frame, node: usize, barrier: Barrier) -> Result<f64> {
    let s = &frame.state;
    let (n, m) = (s.spec.n, s.spec.m);
    let jet = s.jet(node);
    let g = DMatrix::from_fn(n, n, |i, j| frame.geometry.g_at(node, i, j));
    let root = linalg::spd_inverse_sqrt(&g).ok_or(Error::BlownUp { node, t: s.t })?;
    let point = frame.geometry.gauss_point(node);
    let mut total = 0.0;
    for a in 0..n {
        let x = DMatrix::from_fn(n, m, |i, alpha| (0..n).map(|k| root[(a, k)] * jet.d2f[i][k][alpha]).sum());
        total += barrier.hessian(&point, &TangentVector::new(x))?;
    }
    Ok(total)
}

/// Residual of `(d/dt - Δ)(h∘γ) + Σ_a Hess(h)(γ_* e_a, γ_* e_a) = 0`.
///
/// With `barrier = V` the left side is also computed from `sqrt(det g)`
/// instead of `v∘γ`; the largest differences of the two fields and of the
/// two left sides are reported as `cross_check_field_max_diff` and
/// `cross_check_max_diff` (the latter carries the rounding amplification of
/// the difference quotients).
pub fn check_composition_identity(frames: &[Frame], barrier: Barrier, tolerance: Option<f64>) -> Result<MonitorReport> {
    require_snapshots(frames, 3)?;
    let mut report = MonitorReport::new("composition_identity", frames, 0.0);
    report.metadata.insert("barrier".into(), barrier.name().into());

    let mut fields = Vec::with_capacity(frames.len());
    for (k, frame) in frames.iter().enumerate() {
        match barrier_field(frame, barrier) {
            Ok(field) => fields.push(field),
            Err(node) if k == 0 => {
                return Err(Error::Precondition(format!(
                    "barrier `{}` undefined at node {node} of the initial snapshot",
                    barrier.name()
                )))
            }
            Err(node) => {
                report.predicate_held = false;
                report.notes.push(format!("barrier domain left at snapshot {k} (t = {}), node {node}", frame.state.t));
                report.summary.insert("first_offending_snapshot".into(), k as f64);
                report.decide(true);
                return Ok(report);
            }
        }
    }

    let sup0 = fields[0].iter().copied().fold(1.0, f64::max);
    let tol = tolerance.unwrap_or(COMPOSITION_TOLERANCE_CONSTANT * discretisation_scale(frames) * sup0);
    report.tolerance = tol;
    let q = |k: usize, kk: [i64; MAX_DIM]| fields[k][frames[k].state.spec.wrap(kk)];
    let direct = |k: usize, kk: [i64; MAX_DIM]| frames[k].geometry.sqrt_det_g[frames[k].state.spec.wrap(kk)];
    let mut series = Vec::with_capacity(frames.len());
    let mut cross = 0.0f64;
    for (k, frame) in frames.iter().enumerate() {
        let heat = heat_operator(frames, k, &q);
        if barrier == Barrier::V {
            let other = heat_operator(frames, k, &direct);
            cross = heat.iter().zip(&other).fold(cross, |acc, (a, b)| acc.max((a - b).abs()));
        }
        let mut worst = 0.0f64;
        for node in monitored_nodes(&frame.state) {
            let r = heat[node] + hessian_trace(frame, node, barrier)?;
            worst = worst.max(r.abs());
        }
        series.push(worst);
    }
    if barrier == Barrier::V {
        let field_diff = frames.iter().fold(0.0f64, |acc, f| {
            f.geometry.v_tilde.iter().zip(&f.geometry.sqrt_det_g).fold(acc, |a, (x, y)| a.max((x - y).abs()))
        });
        report.summary.insert("cross_check_field_max_diff".into(), field_diff);
        report.summary.insert("cross_check_max_diff".into(), cross);
    }
    finish_residual(&mut report, series, tol);
    Ok(report)
}

fn normal_part(jet_df: &[[f64; MAX_DIM]; MAX_DIM], metric: &LocalMetric, n: usize, m: usize, w: &mut [f64]) {
    let mut along = [0.0; MAX_DIM];
    for (l, al) in along.iter_mut().enumerate().take(n) {
        *al = w[l] + (0..m).map(|a| jet_df[l][a] * w[n + a]).sum::<f64>();
    }
    for k in 0..n {
        let c: f64 = (0..n).map(|l| metric.inv[(k, l)] * along[l]).sum();
        w[k] -= c;
        for a in 0..m {
            w[n + a] -= c * jet_df[k][a];
        }
    }
}

/// `|∇B|²` with the normal connection: `∇_k B_ij = (∂_k B_ij)^⊥ - Γ^l_ki B_lj - Γ^l_kj B_il`.
fn grad_b_norm2(frame: &Frame, node: usize) -> f64 {
    let s = &frame.state;
    let geo = &frame.geometry;
    let (n, m) = (s.spec.n, s.spec.m);
    let d = n + m;
    let jet = s.jet(node);
    let metric = metric_of(&jet, n, m);
    let mut gamma = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                gamma[l][k][i] = (0..n)
                    .map(|p| metric.inv[(l, p)] * (0..m).map(|a| jet.df[p][a] * jet.d2f[k][i][a]).sum::<f64>())
                    .sum();
            }
        }
    }
    // nabla[(k, i, j)] as a vector of R^{n+m}
    let mut nabla = alloc::vec![0.0; n * n * n * d];
    for k in 0..n {
        let hk = s.spec.h(k);
        let up = s.spec.neighbor(node, k, 1);
        let dn = s.spec.neighbor(node, k, -1);
        for i in 0..n {
            for j in 0..n {
                let slot = &mut nabla[((k * n + i) * n + j) * d..((k * n + i) * n + j + 1) * d];
                let (bp, bm) = (geo.b_at(up, i, j), geo.b_at(dn, i, j));
                for c in 0..d {
                    slot[c] = (bp[c] - bm[c]) / (2.0 * hk);
                }
                normal_part(&jet.df, &metric, n, m, slot);
                for l in 0..n {
                    let (blj, bil) = (geo.b_at(node, l, j), geo.b_at(node, i, l));
                    for c in 0..d {
                        slot[c] -= gamma[l][k][i] * blj[c] + gamma[l][k][j] * bil[c];
                    }
                }
            }
        }
    }
    let at = |k: usize, i: usize, j: usize| &nabla[((k * n + i) * n + j) * d..((k * n + i) * n + j + 1) * d];
    let mut total = 0.0;
    for k in 0..n {
        for a in 0..n {
            for i in 0..n {
                for b in 0..n {
                    for j in 0..n {
                        for c in 0..n {
                            let w = metric.inv[(k, a)] * metric.inv[(i, b)] * metric.inv[(j, c)];
                            if w != 0.0 {
                                total += w * at(k, i, j).iter().zip(at(a, b, c)).map(|(x, y)| x * y).sum::<f64>();
                            }
                        }
                    }
                }
            }
        }
    }
    total
}

/// Slack of `(d/dt - Δ)|B|² <= -2|∇|B||² + 3|B|⁴`; informational, since the
/// inequality involves fourth derivatives of `f` and its slack is not
/// quantified. Also reports the Kato inequality `|∇|B||² <= |∇B|²`.
pub fn check_b2_inequality(frames: &[Frame], tolerance: Option<f64>) -> Result<MonitorReport> {
    require_snapshots(frames, 3)?;
    let tol = tolerance.unwrap_or(B2_TOLERANCE_CONSTANT * discretisation_scale(frames));
    let mut report = MonitorReport::new("b2_inequality", frames, tol);
    let q = |k: usize, kk: [i64; MAX_DIM]| frames[k].geometry.b2[frames[k].state.spec.wrap(kk)];
    let mut slack_series = Vec::with_capacity(frames.len());
    let mut kato_series = Vec::with_capacity(frames.len());
    for (k, frame) in frames.iter().enumerate() {
        let s = &frame.state;
        let (n, m) = (s.spec.n, s.spec.m);
        let heat = heat_operator(frames, k, &q);
        let norm_b: Vec<f64> = frame.geometry.b2.iter().map(|b| libm::sqrt(*b)).collect();
        let mut min_slack = f64::INFINITY;
        let mut kato = 0.0f64;
        for node in monitored_nodes(s) {
            let jet = s.jet(node);
            let metric = metric_of(&jet, n, m);
            let grad = gradient(s, &norm_b, node);
            let mut grad_norm2 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    grad_norm2 += metric.inv[(i, j)] * grad[i] * grad[j];
                }
            }
            let b2 = frame.geometry.b2[node];
            let slack = -heat[node] - 2.0 * grad_norm2 + 3.0 * b2 * b2;
            min_slack = min_slack.min(slack);
            kato = kato.max(grad_norm2 - grad_b_norm2(frame, node));
        }
        slack_series.push(min_slack);
        kato_series.push(kato.max(0.0));
    }
    let min = slack_series.iter().copied().fold(f64::INFINITY, f64::min);
    let kato_max = kato_series.iter().copied().fold(0.0, f64::max);
    report.predicate_held = min >= -tol;
    report.summary.insert("min_slack".into(), min);
    report.summary.insert("kato_violation_max".into(), kato_max);
    report.series.insert("min_slack".into(), slack_series);
    report.series.insert("kato_violation".into(), kato_series);
    report.decide(false);
    Ok(report)
}
