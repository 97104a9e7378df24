//! Maximum-principle monitors: quantities whose supremum the flow should not
//! increase, and regions of the Grassmannian the Gauss image should not
//! leave.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use super::calculus::{monitored_nodes, require_snapshots};
use super::report::MonitorReport;
use crate::grassmann::{self, partial_gauss_maps, Barrier, GrassmannPoint, UnitVector3, SEC_BALL_RADIUS};
use crate::mcf::Frame;
use crate::{Error, Result};

/// Relative per-interval allowance for the `sup Δ_f` series.
pub const CONFINABLE_RELATIVE_TOLERANCE: f64 = 1e-6;

/// Relative per-interval allowance for the `sup |B|² h̃` series.
pub const B2H_RELATIVE_TOLERANCE: f64 = 1e-3;

/// Absolute slack on `max ρ <= R0`.
pub const BALL_TOLERANCE: f64 = 1e-9;

/// Initial hemisphere margins below this make the hemisphere monitor
/// informational.
pub const HEMISPHERE_MIN_MARGIN: f64 = 1e-3;

/// Number of candidate directions for the hemisphere fit.
const FIBONACCI_POINTS: usize = 4096;

fn sup_over<F: Fn(usize) -> f64>(frame: &Frame, value: F) -> f64 {
    monitored_nodes(&frame.state).into_iter().map(value).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest relative increase `(s_{k+1} - s_k) / |s_k|` over consecutive
/// snapshots (0 when the series never increases).
fn worst_relative_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| {
            let rise = w[1] - w[0];
            if rise <= 0.0 {
                0.0
            } else if w[0] == 0.0 {
                f64::MAX
            } else {
                rise / w[0].abs()
            }
        })
        .fold(0.0, f64::max)
}

/// `sup Δ_f` stays below 2 and does not increase.
pub fn monitor_confinable(frames: &[Frame]) -> Result<MonitorReport> {
    require_snapshots(frames, 1)?;
    let mut report = MonitorReport::new("confinable", frames, CONFINABLE_RELATIVE_TOLERANCE);
    let sup: Vec<f64> = frames.iter().map(|f| sup_over(f, |node| f.geometry.sqrt_det_g[node])).collect();
    if !(sup[0] < 2.0) {
        return Err(Error::Precondition(format!("initial sup Delta_f = {} is not below 2", sup[0])));
    }
    let below_two = sup.iter().all(|s| *s < 2.0);
    let rise = worst_relative_increase(&sup);
    let excess_over_initial = sup.iter().map(|s| s - sup[0]).fold(0.0, f64::max);
    report.predicate_held = below_two && rise <= CONFINABLE_RELATIVE_TOLERANCE;
    report.summary.insert("initial_sup_delta".into(), sup[0]);
    report.summary.insert("max_sup_delta".into(), sup.iter().copied().fold(0.0, f64::max));
    report.summary.insert("margin_to_two".into(), 2.0 - sup.iter().copied().fold(0.0, f64::max));
    report.summary.insert("worst_relative_increase".into(), rise);
    report.summary.insert("excess_over_initial".into(), excess_over_initial);
    report.series.insert("sup_delta_f".into(), sup);
    report.decide(true);
    Ok(report)
}

/// `max ρ` of the Gauss image about `center` stays below `r0`.
pub fn monitor_geodesic_ball(frames: &[Frame], center: &GrassmannPoint, r0: f64) -> Result<MonitorReport> {
    require_snapshots(frames, 1)?;
    if !(r0 > 0.0 && r0 <= SEC_BALL_RADIUS * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("R0 = {r0} must lie in (0, sqrt(2) pi / 4]")));
    }
    let (n, m) = (frames[0].state.spec.n, frames[0].state.spec.m);
    if center.n() != n || center.m() != m {
        return Err(Error::Precondition("center has the wrong dimensions".into()));
    }
    let at_origin = center.z().iter().all(|c| *c == 0.0);
    let mut report = MonitorReport::new("geodesic_ball", frames, BALL_TOLERANCE);
    report.metadata.insert("r0".into(), format!("{r0}"));
    let mut left_chart = false;
    let mut max_rho = Vec::with_capacity(frames.len());
    let mut sup_sec = Vec::with_capacity(frames.len());
    for frame in frames {
        let rho = |node: usize| {
            if at_origin {
                Some(frame.geometry.rho[node])
            } else {
                grassmann::relative_point(center, &frame.geometry.gauss_point(node)).ok().map(|p| grassmann::rho_of(&p))
            }
        };
        let mut worst = 0.0f64;
        for node in monitored_nodes(&frame.state) {
            match rho(node) {
                Some(r) => worst = worst.max(r),
                None => {
                    // a Jordan angle of π/2 already puts ρ >= π/2
                    left_chart = true;
                    worst = worst.max(FRAC_PI_2);
                }
            }
        }
        max_rho.push(worst);
        let s = libm::sqrt(2.0) * worst;
        sup_sec.push(if worst < SEC_BALL_RADIUS {
            let c = libm::cos(s);
            1.0 / (c * c)
        } else {
            f64::MAX
        });
    }
    if !(max_rho[0] < r0) {
        return Err(Error::Precondition(format!("initial max rho = {} is not below R0 = {r0}", max_rho[0])));
    }
    if left_chart {
        report.notes.push("Gauss image left the chart around the center".into());
    }
    let held = max_rho.iter().all(|r| *r <= r0 + BALL_TOLERANCE);
    report.predicate_held = held;
    let worst = max_rho.iter().copied().fold(0.0, f64::max);
    report.summary.insert("initial_max_rho".into(), max_rho[0]);
    report.summary.insert("max_rho".into(), worst);
    report.summary.insert("margin".into(), r0 - worst);
    report.summary.insert("sec_worst_relative_increase".into(), worst_relative_increase(&sup_sec));
    report.series.insert("max_rho".into(), max_rho);
    report.series.insert("sup_sec".into(), sup_sec);
    report.decide(true);
    Ok(report)
}

fn dot3(a: &UnitVector3, b: &UnitVector3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Direction maximising `min_i ⟨p_i, u⟩` over a Fibonacci sphere plus the
/// normalised mean, followed by a local coordinate search.
pub fn fit_hemisphere(points: &[UnitVector3]) -> (UnitVector3, f64) {
    let margin = |u: &UnitVector3| points.iter().map(|p| dot3(p, u)).fold(f64::INFINITY, f64::min);
    let mut candidates: Vec<UnitVector3> = (0..FIBONACCI_POINTS)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / FIBONACCI_POINTS as f64;
            let r = libm::sqrt(1.0 - z * z);
            let phi = PI * (3.0 - libm::sqrt(5.0)) * k as f64;
            [r * libm::cos(phi), r * libm::sin(phi), z]
        })
        .collect();
    let mean = points.iter().fold([0.0; 3], |acc, p| [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]);
    let norm = libm::sqrt(dot3(&mean, &mean));
    if norm > 0.0 {
        candidates.push([mean[0] / norm, mean[1] / norm, mean[2] / norm]);
    }
    let mut best = candidates[0];
    let mut best_margin = f64::NEG_INFINITY;
    for c in &candidates {
        let mg = margin(c);
        if mg > best_margin {
            best_margin = mg;
            best = *c;
        }
    }
    let mut step = 0.05;
    while step > 1e-7 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut u = best;
                u[axis] += sign * step;
                let nu = libm::sqrt(dot3(&u, &u));
                let u = [u[0] / nu, u[1] / nu, u[2] / nu];
                let mg = margin(&u);
                if mg > best_margin {
                    best_margin = mg;
                    best = u;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_margin)
}

/// Partial Gauss maps `γ₁, γ₂` of a surface in `R⁴` stay in the open
/// hemisphere fitted at `t = 0`.
pub fn monitor_hemisphere(frames: &[Frame]) -> Result<MonitorReport> {
    require_snapshots(frames, 1)?;
    let spec = &frames[0].state.spec;
    if spec.n != 2 || spec.m != 2 {
        return Err(Error::Precondition("hemisphere monitor needs n = m = 2".into()));
    }
    let maps = |frame: &Frame| -> Result<(Vec<UnitVector3>, Vec<UnitVector3>)> {
        let mut g1 = Vec::new();
        let mut g2 = Vec::new();
        for node in monitored_nodes(&frame.state) {
            let (a, b) = partial_gauss_maps(&frame.geometry.z_at(node))?;
            g1.push(a);
            g2.push(b);
        }
        Ok((g1, g2))
    };
    let (g1, g2) = maps(&frames[0])?;
    let fits = [fit_hemisphere(&g1), fit_hemisphere(&g2)];
    let admissible: Vec<usize> = (0..2).filter(|&i| fits[i].1 > 0.0).collect();
    if admissible.is_empty() {
        return Err(Error::Precondition("no open hemisphere contains gamma_1 or gamma_2 at t = 0".into()));
    }
    let mut report = MonitorReport::new("hemisphere", frames, 0.0);
    let mut series = [Vec::new(), Vec::new()];
    for frame in frames {
        let (a, b) = maps(frame)?;
        for (i, pts) in [a, b].iter().enumerate() {
            let u = fits[i].0;
            series[i].push(pts.iter().map(|p| dot3(p, &u)).fold(f64::INFINITY, f64::min));
        }
    }
    let held = admissible.iter().all(|&i| series[i].iter().all(|v| *v > 0.0));
    report.predicate_held = held;
    let degenerate = admissible.iter().any(|&i| fits[i].1 < HEMISPHERE_MIN_MARGIN);
    for (i, name) in ["gamma1", "gamma2"].iter().enumerate() {
        report.summary.insert(format!("{name}_initial_margin"), fits[i].1);
        report.summary.insert(format!("{name}_admissible"), if admissible.contains(&i) { 1.0 } else { 0.0 });
        report.summary.insert(format!("{name}_min_margin"), series[i].iter().copied().fold(f64::INFINITY, f64::min));
        for (c, axis) in ["x", "y", "z"].iter().enumerate() {
            report.summary.insert(format!("{name}_u_{axis}"), fits[i].0[c]);
        }
    }
    let [s1, s2] = series;
    report.series.insert("min_gamma1_u".into(), s1);
    report.series.insert("min_gamma2_u".into(), s2);
    if degenerate {
        report.notes.push(format!("initial margin below {HEMISPHERE_MIN_MARGIN}: reported as informational"));
    }
    report.decide(!degenerate);
    Ok(report)
}

/// `sup |B|² h̃` is non-increasing up to a relative allowance per interval.
pub fn monitor_b2h(frames: &[Frame], barrier: Barrier) -> Result<MonitorReport> {
    require_snapshots(frames, 1)?;
    if barrier == Barrier::V {
        return Err(Error::InvalidArgument("sup |B|^2 h monitor takes barrier v32 or sec".into()));
    }
    let mut report = MonitorReport::new("b2h", frames, B2H_RELATIVE_TOLERANCE);
    report.metadata.insert("barrier".into(), barrier.name().into());
    let mut series = Vec::with_capacity(frames.len());
    for (k, frame) in frames.iter().enumerate() {
        let values = match barrier {
            Barrier::V32 => &frame.geometry.h_v32,
            _ => &frame.geometry.h_sec,
        };
        let mut sup = 0.0f64;
        for node in monitored_nodes(&frame.state) {
            match values[node] {
                Some(h) => sup = sup.max(frame.geometry.b2[node] * h),
                None if k == 0 => {
                    return Err(Error::Precondition(format!(
                        "barrier `{}` undefined at node {node} of the initial snapshot",
                        barrier.name()
                    )))
                }
                None => {
                    report.predicate_held = false;
                    report.notes.push(format!("barrier domain left at snapshot {k}, node {node}"));
                    report.summary.insert("first_offending_snapshot".into(), k as f64);
                    report.series.insert("sup_b2_h".into(), series);
                    report.decide(true);
                    return Ok(report);
                }
            }
        }
        series.push(sup);
    }
    let rise = worst_relative_increase(&series);
    report.predicate_held = rise <= B2H_RELATIVE_TOLERANCE;
    report.summary.insert("worst_relative_increase".into(), rise);
    report.summary.insert("initial_sup".into(), series[0]);
    report.series.insert("sup_b2_h".into(), series);
    report.decide(true);
    Ok(report)
}

/// Empirical constant of the interior curvature estimate
/// `sup_{K(t,θR)} |B|² <= C (1-θ²)^{-2} (1/t + 1/R²) sup_{s<=t} sup_{K(s,R)} (2-Δ_f)^{-3}`
/// with `K(t, ρ) = {|x|² + 2nt <= ρ²}`. Informational: the constant is not
/// specified, so only its value and stability are reported.
pub fn monitor_curvature_scaling(frames: &[Frame], theta: f64, r: f64) -> Result<MonitorReport> {
    require_snapshots(frames, 1)?;
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Precondition(format!("theta = {theta} must lie in [0, 1)")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition("R must be positive".into()));
    }
    let mut report = MonitorReport::new("curvature_scaling", frames, 0.0);
    report.metadata.insert("theta".into(), format!("{theta}"));
    report.metadata.insert("R".into(), format!("{r}"));
    let n = frames[0].state.spec.n as f64;
    let t0 = frames[0].state.t;
    let mut running_denominator = 0.0f64;
    let mut c_emp = Vec::with_capacity(frames.len());
    let mut numerators = Vec::with_capacity(frames.len());
    for frame in frames {
        let t = frame.state.t - t0;
        let mut numerator = 0.0f64;
        for node in monitored_nodes(&frame.state) {
            let x = frame.state.spec.node_position(node);
            let radius2 = x.iter().map(|c| c * c).sum::<f64>() + 2.0 * n * t;
            let delta = frame.geometry.sqrt_det_g[node];
            if !(delta < 2.0) {
                return Err(Error::Precondition(format!("Delta_f = {delta} reached 2 at t = {}", frame.state.t)));
            }
            if radius2 <= r * r {
                let gap = 2.0 - delta;
                running_denominator = running_denominator.max(1.0 / (gap * gap * gap));
            }
            if radius2 <= theta * theta * r * r {
                numerator = numerator.max(frame.geometry.b2[node]);
            }
        }
        numerators.push(numerator);
        let c = if t > 0.0 && running_denominator > 0.0 {
            let scale = (1.0 / t + 1.0 / (r * r)) / ((1.0 - theta * theta) * (1.0 - theta * theta));
            numerator / (scale * running_denominator)
        } else {
            0.0
        };
        c_emp.push(c);
    }
    let max = c_emp.iter().copied().fold(0.0, f64::max);
    report.predicate_held = max.is_finite();
    report.summary.insert("max_c_emp".into(), max);
    let t_scaled: Vec<f64> = frames.iter().zip(&numerators).map(|(f, num)| (f.state.t - t0) * num).collect();
    report.summary.insert("max_t_sup_b2".into(), t_scaled.iter().copied().fold(0.0, f64::max));
    report.series.insert("c_emp".into(), c_emp);
    report.series.insert("sup_b2_inner".into(), numerators);
    report.series.insert("t_sup_b2_inner".into(), t_scaled);
    report.decide(false);
    Ok(report)
}

/// `(2 - Δ_f)^{-1} <= 2 C0 (|x|² + 2nt + 1)^a` at every node, given the
/// initial bound `(2 - Δ_f)^{-1} <= C0 (|x|² + 1)^a`. Informational: `|x|`
/// on the torus is measured from the cell centre and is not the radius of an
/// entire graph.
pub fn monitor_growth_bound(frames: &[Frame], c0: f64, a: f64) -> Result<MonitorReport> {
    require_snapshots(frames, 1)?;
    if !(c0 > 0.0 && c0.is_finite() && a.is_finite()) {
        return Err(Error::Precondition("C0 must be positive and a finite".into()));
    }
    let mut report = MonitorReport::new("growth_bound", frames, 0.0);
    report.metadata.insert("C0".into(), format!("{c0}"));
    report.metadata.insert("a".into(), format!("{a}"));
    let n = frames[0].state.spec.n as f64;
    let t0 = frames[0].state.t;
    let lhs = |frame: &Frame, node: usize| {
        let d = frame.geometry.sqrt_det_g[node];
        if d < 2.0 {
            1.0 / (2.0 - d)
        } else {
            f64::INFINITY
        }
    };
    let r2 = |frame: &Frame, node: usize| frame.state.spec.node_position(node).iter().map(|c| c * c).sum::<f64>();
    for node in monitored_nodes(&frames[0].state) {
        let bound = c0 * libm::pow(r2(&frames[0], node) + 1.0, a);
        if !(lhs(&frames[0], node) <= bound) {
            return Err(Error::Precondition(format!(
                "initial data violates (2 - Delta_f)^-1 <= C0 (|x|^2 + 1)^a at node {node}"
            )));
        }
    }
    let mut ratios = Vec::with_capacity(frames.len());
    for frame in frames {
        let t = frame.state.t - t0;
        let worst = monitored_nodes(&frame.state)
            .into_iter()
            .map(|node| lhs(frame, node) / (2.0 * c0 * libm::pow(r2(frame, node) + 2.0 * n * t + 1.0, a)))
            .fold(0.0, f64::max);
        ratios.push(worst.min(f64::MAX));
    }
    report.predicate_held = ratios.iter().all(|r| *r <= 1.0);
    report.summary.insert("max_ratio".into(), ratios.iter().copied().fold(0.0, f64::max));
    report.series.insert("ratio".into(), ratios);
    report.notes.push("torus surrogate: |x| is measured from the cell centre".into());
    report.decide(false);
    Ok(report)
}
