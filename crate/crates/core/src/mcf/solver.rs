use alloc::vec::Vec;

use super::geometry::{geometry_of, metric_of, GeometrySnapshot};
use super::state::{apply_boundary, GraphState};
use crate::{Error, Result};

pub const CFL_SAFETY: f64 = 0.5;

/// Time steps below this are treated as a collapse of the flow.
pub const MIN_DT: f64 = 1e-14;

/// Vertical velocity `∂_t f^a = g^{ij} ∂_i ∂_j f^a`, node-major like
/// [`GraphState::values`].
pub fn graph_velocity(s: &GraphState) -> Vec<f64> {
    let (n, m) = (s.spec.n, s.spec.m);
    let mut out = Vec::with_capacity(s.values.len());
    for node in 0..s.spec.node_count() {
        let jet = s.jet(node);
        let metric = metric_of(&jet, n, m);
        for a in 0..m {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += metric.inv[(i, j)] * jet.d2f[i][j][a];
                }
            }
            out.push(acc);
        }
    }
    out
}

/// `safety * min_node h_min² / (2 Σ_i g^{ii})`.
pub fn cfl_dt_with_safety(s: &GraphState, safety: f64) -> f64 {
    let (n, m) = (s.spec.n, s.spec.m);
    let h = s.spec.h_min();
    let worst = (0..s.spec.node_count())
        .map(|node| {
            let metric = metric_of(&s.jet(node), n, m);
            (0..n).map(|i| metric.inv[(i, i)]).sum::<f64>()
        })
        .fold(0.0, f64::max);
    safety * h * h / (2.0 * worst)
}

pub fn cfl_dt(s: &GraphState) -> f64 {
    cfl_dt_with_safety(s, CFL_SAFETY)
}

fn euler(s: &GraphState, rate: &[f64], dt: f64) -> GraphState {
    let mut out = s.clone();
    out.values.iter_mut().zip(rate).for_each(|(v, r)| *v += dt * r);
    out.t = s.t + dt;
    apply_boundary(&mut out);
    out
}

/// One Heun (explicit trapezoidal) step. The input state is untouched, so
/// on error the caller still holds the last valid state.
pub fn step(s: &GraphState, dt: f64) -> Result<GraphState> {
    let limit = cfl_dt(s);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    step_unchecked(s, dt)
}

fn step_unchecked(s: &GraphState, dt: f64) -> Result<GraphState> {
    let k1 = graph_velocity(s);
    let predictor = euler(s, &k1, dt);
    predictor.check_finite()?;
    let k2 = graph_velocity(&predictor);
    let mut out = s.clone();
    out.values.iter_mut().zip(k1.iter().zip(&k2)).for_each(|(v, (a, b))| *v += 0.5 * dt * (a + b));
    out.t = s.t + dt;
    apply_boundary(&mut out);
    out.check_finite()?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub state: GraphState,
    pub geometry: GeometrySnapshot,
}

/// Result of [`run`]: every frame computed before the run ended, and the
/// error that ended it early, if any.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub frames: Vec<Frame>,
    pub error: Option<Error>,
    pub steps: usize,
}

/// Flows `s0` to `t_end` with `dt = cfl_dt` (clipped to land on snapshot
/// times), recording a frame at `t0`, every `snapshot_every` and at `t_end`.
pub fn run(s0: &GraphState, t_end: f64, snapshot_every: f64) -> Result<RunOutcome> {
    run_with_safety(s0, t_end, snapshot_every, CFL_SAFETY)
}

pub fn run_with_safety(s0: &GraphState, t_end: f64, snapshot_every: f64, safety: f64) -> Result<RunOutcome> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument("t_end must be finite and non-negative".into()));
    }
    if !(snapshot_every > 0.0) {
        return Err(Error::InvalidArgument("snapshot_every must be positive".into()));
    }
    if !(safety > 0.0 && safety <= CFL_SAFETY) {
        return Err(Error::InvalidArgument("CFL safety must lie in (0, 0.5]".into()));
    }
    let t0 = s0.t;
    let mut state = s0.clone();
    apply_boundary(&mut state);
    let mut outcome = RunOutcome { frames: Vec::new(), error: None, steps: 0 };
    match geometry_of(&state) {
        Ok(geometry) => outcome.frames.push(Frame { state: state.clone(), geometry }),
        Err(e) => {
            outcome.error = Some(e);
            return Ok(outcome);
        }
    }
    let mut index = 1usize;
    while state.t < t0 + t_end {
        let target = (t0 + index as f64 * snapshot_every).min(t0 + t_end);
        while state.t < target {
            let limit = cfl_dt_with_safety(&state, safety);
            if !(limit > MIN_DT) {
                outcome.error = Some(Error::Cfl { dt: limit, limit: MIN_DT });
                return Ok(outcome);
            }
            // equal steps up to the next snapshot, so no sliver step appears
            let remaining = target - state.t;
            let count = libm::ceil(remaining / limit * (1.0 - 1e-12)).max(1.0);
            let landing = count <= 1.0;
            let dt = remaining / count;
            match step_unchecked(&state, dt) {
                Ok(mut next) => {
                    if landing {
                        next.t = target;
                    }
                    state = next;
                    outcome.steps += 1;
                }
                Err(e) => {
                    outcome.error = Some(e);
                    return Ok(outcome);
                }
            }
        }
        match geometry_of(&state) {
            Ok(geometry) => outcome.frames.push(Frame { state: state.clone(), geometry }),
            Err(e) => {
                outcome.error = Some(e);
                return Ok(outcome);
            }
        }
        index += 1;
    }
    Ok(outcome)
}
