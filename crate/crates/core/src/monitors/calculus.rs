//! Discrete calculus shared by the monitors.

use alloc::vec::Vec;

use crate::mcf::{Boundary, Frame, GraphState, Jet, LocalMetric, MAX_DIM};
use crate::{Error, Result};

/// Derivative at `t` of the quadratic through `(ts[j], ·)`, as weights.
pub(crate) fn lagrange_derivative_weights(ts: [f64; 3], t: f64) -> [f64; 3] {
    let mut w = [0.0; 3];
    for j in 0..3 {
        let denom: f64 = (0..3).filter(|&l| l != j).map(|l| ts[j] - ts[l]).product();
        let mut num = 0.0;
        for mm in (0..3).filter(|&mm| mm != j) {
            num += (0..3).filter(|&l| l != j && l != mm).map(|l| t - ts[l]).product::<f64>();
        }
        w[j] = num / denom;
    }
    w
}

/// Snapshot indices and weights for `d/dt` at snapshot `k`: central where
/// possible, one-sided second order at the ends.
pub(crate) fn time_stencil(times: &[f64], k: usize) -> ([usize; 3], [f64; 3]) {
    let last = times.len() - 1;
    let base = if k == 0 {
        0
    } else if k == last {
        last - 2
    } else {
        k - 1
    };
    let idx = [base, base + 1, base + 2];
    let w = lagrange_derivative_weights([times[idx[0]], times[idx[1]], times[idx[2]]], times[k]);
    (idx, w)
}

pub(crate) fn require_snapshots(frames: &[Frame], count: usize) -> Result<()> {
    if frames.len() < count {
        return Err(Error::Precondition(alloc::format!("needs at least {count} snapshots, got {}", frames.len())));
    }
    let distinct = frames.windows(2).all(|w| w[1].state.t > w[0].state.t);
    if !distinct {
        return Err(Error::Precondition("snapshot times must increase strictly".into()));
    }
    Ok(())
}

/// Nodes whose stencils stay clear of any clamped region.
pub(crate) fn monitored_nodes(s: &GraphState) -> Vec<usize> {
    match s.boundary {
        Boundary::Periodic => (0..s.spec.node_count()).collect(),
        Boundary::SolitonClamp { beyond } => {
            let margin = beyond - 3.0 * s.spec.h(0);
            (0..s.spec.node_count()).filter(|&node| s.spec.node_position(node)[0].abs() <= margin).collect()
        }
    }
}

fn offset(k: [i64; MAX_DIM], axis: usize, by: i64) -> [i64; MAX_DIM] {
    let mut out = k;
    out[axis] += by;
    out
}

/// Central gradient of a field given on unwrapped indices.
pub(crate) fn gradient_lifted(s: &GraphState, u: &dyn Fn([i64; MAX_DIM]) -> f64, node: usize) -> [f64; MAX_DIM] {
    let k = s.spec.unwrapped(node);
    let mut g = [0.0; MAX_DIM];
    for (i, gi) in g.iter_mut().enumerate().take(s.spec.n) {
        *gi = (u(offset(k, i, 1)) - u(offset(k, i, -1))) / (2.0 * s.spec.h(i));
    }
    g
}

/// Central gradient of a periodic node field.
pub(crate) fn gradient(s: &GraphState, u: &[f64], node: usize) -> [f64; MAX_DIM] {
    gradient_lifted(s, &|k| u[s.spec.wrap(k)], node)
}

/// `g^{ij} ⟨(0, ∂_t f), ∂_j F⟩ ∂_i q`: the part of the fixed-node time
/// derivative of `q` caused by the tangential motion of the graph
/// parametrisation.
pub(crate) fn tangential_correction(
    jet: &Jet,
    metric: &LocalMetric,
    velocity: &[f64],
    grad: &[f64; MAX_DIM],
    n: usize,
) -> f64 {
    let mut along = [0.0; MAX_DIM];
    for (j, aj) in along.iter_mut().enumerate().take(n) {
        *aj = velocity.iter().enumerate().map(|(a, v)| v * jet.df[j][a]).sum();
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += metric.inv[(i, j)] * along[j] * grad[i];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_weights_differentiate_quadratics() {
        let ts = [0.0, 0.3, 0.7];
        let q = |t: f64| 2.0 - t + 3.0 * t * t;
        for t in ts {
            let w = lagrange_derivative_weights(ts, t);
            let d: f64 = (0..3).map(|j| w[j] * q(ts[j])).sum();
            assert!((d - (-1.0 + 6.0 * t)).abs() < 1e-12);
        }
    }
}
