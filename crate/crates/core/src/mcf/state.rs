use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, MAX_DIM};
use crate::{Error, Result};

/// How nodes are treated at the edge of the computational cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Boundary {
    /// Plain torus.
    Periodic,
    /// Window around a translating soliton `f = -log cos x + t` (n = 1):
    /// nodes with `|x| > beyond` are reset to the exact profile after every
    /// stage, so the periodic wrap never reaches the interior.
    SolitonClamp { beyond: f64 },
}

/// First and second derivatives of `f` at one node: `df[i][a] = ∂_i f^a`,
/// `d2f[i][j][a] = ∂_i ∂_j f^a`. Entries for inert axes are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub df: [[f64; MAX_DIM]; MAX_DIM],
    pub d2f: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

/// Graph `f: T^n -> R^m` sampled on a grid.
///
/// `f(x) = slope^T x + periodic(x)`: the affine part is kept exactly so that
/// tilted planes live on the torus; `values` holds the periodic part,
/// node-major (`values[node * m + a]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphState {
    pub spec: GridSpec,
    pub t: f64,
    /// `slope[i][a]`: constant part of `∂_i f^a`.
    pub slope: [[f64; MAX_DIM]; MAX_DIM],
    pub values: Vec<f64>,
    pub boundary: Boundary,
}

impl GraphState {
    pub fn zeros(spec: GridSpec) -> Self {
        let len = spec.node_count() * spec.m;
        GraphState {
            spec,
            t: 0.0,
            slope: [[0.0; MAX_DIM]; MAX_DIM],
            values: alloc::vec![0.0; len],
            boundary: Boundary::Periodic,
        }
    }

    /// Samples `f` (full value, affine part included) at every node.
    pub fn from_fn(
        spec: GridSpec,
        slope: [[f64; MAX_DIM]; MAX_DIM],
        f: impl Fn(&[f64; MAX_DIM], usize) -> f64,
    ) -> Self {
        let mut s = GraphState::zeros(spec);
        s.slope = slope;
        let m = s.spec.m;
        for node in 0..s.spec.node_count() {
            let x = s.spec.node_position(node);
            for a in 0..m {
                s.values[node * m + a] = f(&x, a) - s.affine(&x, a);
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    fn affine(&self, x: &[f64; MAX_DIM], a: usize) -> f64 {
        (0..self.spec.n).map(|i| self.slope[i][a] * x[i]).sum()
    }

    #[inline]
    pub fn periodic(&self, node: usize, a: usize) -> f64 {
        self.values[node * self.spec.m + a]
    }

    /// Full value `f^a` at a node of the fundamental cell.
    pub fn value(&self, node: usize, a: usize) -> f64 {
        self.lifted_value(self.spec.unwrapped(node), a)
    }

    /// Full value `f^a` at an unwrapped multi-index; the affine part is
    /// evaluated at the unwrapped position.
    pub fn lifted_value(&self, k: [i64; MAX_DIM], a: usize) -> f64 {
        let x = self.spec.position(k);
        self.periodic(self.spec.wrap(k), a) + self.affine(&x, a)
    }

    /// Central-difference jet at `node`.
    pub fn jet(&self, node: usize) -> Jet {
        let spec = &self.spec;
        let (n, m) = (spec.n, spec.m);
        let k = spec.unwrapped(node);
        let at = |d: [i64; MAX_DIM], a: usize| self.periodic(spec.wrap([k[0] + d[0], k[1] + d[1], k[2] + d[2]]), a);
        let unit = |i: usize, s: i64| {
            let mut d = [0i64; MAX_DIM];
            d[i] = s;
            d
        };
        let mut jet = Jet { df: [[0.0; MAX_DIM]; MAX_DIM], d2f: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM] };
        for i in 0..n {
            let hi = spec.h(i);
            for a in 0..m {
                let c = at([0; MAX_DIM], a);
                let p = at(unit(i, 1), a);
                let q = at(unit(i, -1), a);
                jet.df[i][a] = (p - q) / (2.0 * hi) + self.slope[i][a];
                jet.d2f[i][i][a] = (p - 2.0 * c + q) / (hi * hi);
            }
            for j in (i + 1)..n {
                let hj = spec.h(j);
                for a in 0..m {
                    let pp = at(add(unit(i, 1), unit(j, 1)), a);
                    let pm = at(add(unit(i, 1), unit(j, -1)), a);
                    let mp = at(add(unit(i, -1), unit(j, 1)), a);
                    let mm = at(add(unit(i, -1), unit(j, -1)), a);
                    let mixed = (pp - pm - mp + mm) / (4.0 * hi * hj);
                    jet.d2f[i][j][a] = mixed;
                    jet.d2f[j][i][a] = mixed;
                }
            }
        }
        jet
    }

    /// First node holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite()).map(|idx| idx / self.spec.m)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            Some(node) => Err(Error::BlownUp { node, t: self.t }),
            None => Ok(()),
        }
    }

    /// `sup` over nodes of `Δ_f = sqrt(det(δ_ij + ∂_i f · ∂_j f))`.
    pub fn sup_delta(&self) -> f64 {
        (0..self.spec.node_count())
            .map(|node| super::geometry::metric_of(&self.jet(node), self.spec.n, self.spec.m).sqrt_det)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Multiplies the whole graph (periodic and affine parts) by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.slope.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }
}

fn add(a: [i64; MAX_DIM], b: [i64; MAX_DIM]) -> [i64; MAX_DIM] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Exact translating soliton `-log cos x + t`.
pub fn soliton_profile(x: f64, t: f64) -> f64 {
    -libm::log(libm::cos(x)) + t
}

/// Resets clamped nodes to the exact profile at time `t`.
pub(crate) fn apply_boundary(s: &mut GraphState) {
    if let Boundary::SolitonClamp { beyond } = s.boundary {
        let m = s.spec.m;
        for node in 0..s.spec.node_count() {
            let x = s.spec.node_position(node);
            if x[0].abs() > beyond {
                s.values[node * m] = soliton_profile(x[0], s.t) - s.slope[0][0] * x[0];
                for a in 1..m {
                    s.values[node * m + a] = -s.slope[0][a] * x[0];
                }
            }
        }
    }
}

/// Whether a node is left free by the boundary treatment.
pub fn is_free(s: &GraphState, node: usize) -> bool {
    match s.boundary {
        Boundary::Periodic => true,
        Boundary::SolitonClamp { beyond } => s.spec.node_position(node)[0].abs() <= beyond,
    }
}
