use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3};

use super::grid::MAX_DIM;
use super::state::{GraphState, Jet};
use crate::grassmann::{self, GrassmannPoint, SEC_BALL_RADIUS};
use crate::{Error, Result};

/// Induced metric at one node, padded with the identity on inert axes.
#[derive(Debug, Clone, Copy)]
pub struct LocalMetric {
    pub g: Matrix3<f64>,
    pub inv: Matrix3<f64>,
    pub sqrt_det: f64,
}

pub fn metric_of(jet: &Jet, n: usize, m: usize) -> LocalMetric {
    let mut g = Matrix3::identity();
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] += (0..m).map(|a| jet.df[i][a] * jet.df[j][a]).sum::<f64>();
        }
    }
    let inv = g.try_inverse().unwrap_or_else(|| Matrix3::from_element(f64::NAN));
    LocalMetric { g, inv, sqrt_det: libm::sqrt(g.determinant()) }
}

/// Extrinsic geometry of the graph at every node, as flat per-node arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySnapshot {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub nodes: usize,
    /// `g_ij`, `n * n` per node.
    pub g: Vec<f64>,
    /// `g^ij`, `n * n` per node.
    pub inv_g: Vec<f64>,
    /// `Δ_f = sqrt(det g)`.
    pub sqrt_det_g: Vec<f64>,
    /// `B_ij` as vectors of `R^{n+m}`, `n * n * (n+m)` per node.
    pub b: Vec<f64>,
    /// `|B|²`.
    pub b2: Vec<f64>,
    /// Mean curvature vector in `R^{n+m}`.
    pub h: Vec<f64>,
    /// Chart coordinates `Z = Df` of the Gauss map, `n * m` per node
    /// (`z[i * m + a] = ∂_i f^a`).
    pub gauss_z: Vec<f64>,
    /// `v` evaluated on the Gauss map.
    pub v_tilde: Vec<f64>,
    /// Geodesic distance of the Gauss image from the reference plane.
    pub rho: Vec<f64>,
    /// Barrier `(v/(2-v))^{3/2}` on the Gauss map, `None` where `v >= 2`.
    pub h_v32: Vec<Option<f64>>,
    /// Barrier `sec²(√2ρ)`, `None` outside the ball.
    pub h_sec: Vec<Option<f64>>,
}

impl GeometrySnapshot {
    pub fn ambient(&self) -> usize {
        self.n + self.m
    }

    pub fn g_at(&self, node: usize, i: usize, j: usize) -> f64 {
        self.g[node * self.n * self.n + i * self.n + j]
    }

    pub fn inv_g_at(&self, node: usize, i: usize, j: usize) -> f64 {
        self.inv_g[node * self.n * self.n + i * self.n + j]
    }

    /// `B_ij` at a node.
    pub fn b_at(&self, node: usize, i: usize, j: usize) -> &[f64] {
        let d = self.ambient();
        let start = ((node * self.n + i) * self.n + j) * d;
        &self.b[start..start + d]
    }

    pub fn h_at(&self, node: usize) -> &[f64] {
        let d = self.ambient();
        &self.h[node * d..(node + 1) * d]
    }

    pub fn z_at(&self, node: usize) -> DMatrix<f64> {
        let (n, m) = (self.n, self.m);
        DMatrix::from_row_slice(n, m, &self.gauss_z[node * n * m..(node + 1) * n * m])
    }

    pub fn gauss_point(&self, node: usize) -> GrassmannPoint {
        GrassmannPoint::new(self.z_at(node))
    }

    pub fn sup_delta(&self) -> f64 {
        self.sqrt_det_g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_delta(&self) -> f64 {
        self.sqrt_det_g.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_b2(&self) -> f64 {
        self.b2.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }
}

/// Normal projection of `(0, f_ij)` onto the normal space spanned at the
/// node; the tangential coefficients are the Christoffel symbols
/// `Γ^k_ij = g^kl ⟨f_l, f_ij⟩`.
pub(crate) fn second_fundamental(
    jet: &Jet,
    metric: &LocalMetric,
    n: usize,
    m: usize,
    i: usize,
    j: usize,
    out: &mut [f64],
) {
    let mut proj = [0.0; MAX_DIM];
    for (l, p) in proj.iter_mut().enumerate().take(n) {
        *p = (0..m).map(|a| jet.df[l][a] * jet.d2f[i][j][a]).sum();
    }
    let mut gamma = [0.0; MAX_DIM];
    for k in 0..n {
        gamma[k] = (0..n).map(|l| metric.inv[(k, l)] * proj[l]).sum();
    }
    for k in 0..n {
        out[k] = -gamma[k];
    }
    for a in 0..m {
        out[n + a] = jet.d2f[i][j][a] - (0..n).map(|k| gamma[k] * jet.df[k][a]).sum::<f64>();
    }
}

pub fn geometry_of(s: &GraphState) -> Result<GeometrySnapshot> {
    s.check_finite()?;
    let (n, m) = (s.spec.n, s.spec.m);
    let d = n + m;
    let nodes = s.spec.node_count();
    let mut snap = GeometrySnapshot {
        n,
        m,
        t: s.t,
        nodes,
        g: Vec::with_capacity(nodes * n * n),
        inv_g: Vec::with_capacity(nodes * n * n),
        sqrt_det_g: Vec::with_capacity(nodes),
        b: alloc::vec![0.0; nodes * n * n * d],
        b2: Vec::with_capacity(nodes),
        h: alloc::vec![0.0; nodes * d],
        gauss_z: Vec::with_capacity(nodes * n * m),
        v_tilde: Vec::with_capacity(nodes),
        rho: Vec::with_capacity(nodes),
        h_v32: Vec::with_capacity(nodes),
        h_sec: Vec::with_capacity(nodes),
    };
    for node in 0..nodes {
        let jet = s.jet(node);
        let metric = metric_of(&jet, n, m);
        if !metric.sqrt_det.is_finite() || !metric.inv[(0, 0)].is_finite() {
            return Err(Error::BlownUp { node, t: s.t });
        }
        for i in 0..n {
            for j in 0..n {
                snap.g.push(metric.g[(i, j)]);
                snap.inv_g.push(metric.inv[(i, j)]);
            }
        }
        snap.sqrt_det_g.push(metric.sqrt_det);

        let base = node * n * n * d;
        for i in 0..n {
            for j in i..n {
                let start = base + (i * n + j) * d;
                second_fundamental(&jet, &metric, n, m, i, j, &mut snap.b[start..start + d]);
                if j != i {
                    let (lo, hi) = snap.b.split_at_mut(base + (j * n + i) * d);
                    hi[..d].copy_from_slice(&lo[start..start + d]);
                }
            }
        }
        let bnode = &snap.b[base..base + n * n * d];
        let b_ij = |i: usize, j: usize| &bnode[(i * n + j) * d..(i * n + j + 1) * d];
        let mut b2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let w = metric.inv[(i, k)] * metric.inv[(j, l)];
                        if w != 0.0 {
                            b2 += w * dot(b_ij(i, j), b_ij(k, l));
                        }
                    }
                }
            }
        }
        snap.b2.push(b2);
        for i in 0..n {
            for j in 0..n {
                let w = metric.inv[(i, j)];
                for c in 0..d {
                    snap.h[node * d + c] += w * b_ij(i, j)[c];
                }
            }
        }

        for i in 0..n {
            for a in 0..m {
                snap.gauss_z.push(jet.df[i][a]);
            }
        }
        let point = snap.gauss_point(node);
        let v = grassmann::v_of(&point);
        let rho = grassmann::rho_of(&point);
        snap.v_tilde.push(v);
        snap.rho.push(rho);
        snap.h_v32.push(grassmann::barrier_v32(&point).ok());
        snap.h_sec.push(if rho < SEC_BALL_RADIUS { grassmann::barrier_sec(&point).ok() } else { None });
    }
    Ok(snap)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
