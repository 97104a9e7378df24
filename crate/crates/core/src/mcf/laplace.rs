use alloc::vec::Vec;

use super::geometry::metric_of;
use super::grid::{GridSpec, MAX_DIM};
use super::state::GraphState;

/// Conservative discretisation of `Δu = (det g)^{-1/2} ∂_i((det g)^{1/2} g^{ij} ∂_j u)`
/// frozen at one graph state.
///
/// Diagonal fluxes use face-averaged coefficients and compact differences,
/// mixed fluxes use central differences of centred gradients. The stencil
/// satisfies an exact summation-by-parts identity against
/// [`LaplaceBeltrami::dirichlet_form`].
#[derive(Debug, Clone)]
pub struct LaplaceBeltrami {
    spec: GridSpec,
    /// `sqrt(det g) g^{ij}`, `n * n` per node.
    coeff: Vec<f64>,
    sqrt_det: Vec<f64>,
}

impl LaplaceBeltrami {
    pub fn new(s: &GraphState) -> Self {
        let spec = s.spec.clone();
        let n = spec.n;
        let nodes = spec.node_count();
        let mut coeff = Vec::with_capacity(nodes * n * n);
        let mut sqrt_det = Vec::with_capacity(nodes);
        for node in 0..nodes {
            let metric = metric_of(&s.jet(node), n, spec.m);
            for i in 0..n {
                for j in 0..n {
                    coeff.push(metric.sqrt_det * metric.inv[(i, j)]);
                }
            }
            sqrt_det.push(metric.sqrt_det);
        }
        LaplaceBeltrami { spec, coeff, sqrt_det }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    fn a(&self, node: usize, i: usize, j: usize) -> f64 {
        let n = self.spec.n;
        self.coeff[node * n * n + i * n + j]
    }

    /// Applies the operator to a periodic field.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.spec.node_count(), "field has the wrong length");
        self.apply_lifted(|k| u[self.spec.wrap(k)])
    }

    /// Applies the operator to a field given on unwrapped multi-indices, so
    /// non-periodic fields such as `|x|²` can be differentiated across the
    /// cell boundary.
    pub fn apply_lifted(&self, u: impl Fn([i64; MAX_DIM]) -> f64) -> Vec<f64> {
        let spec = &self.spec;
        let n = spec.n;
        (0..spec.node_count())
            .map(|node| {
                let k = spec.unwrapped(node);
                let shift = |d: [i64; MAX_DIM]| [k[0] + d[0], k[1] + d[1], k[2] + d[2]];
                let uc = u(k);
                let mut acc = 0.0;
                for i in 0..n {
                    let hi = spec.h(i);
                    let ei = unit(i);
                    let up = u(shift(ei));
                    let um = u(shift(neg(ei)));
                    let np = spec.neighbor(node, i, 1);
                    let nm = spec.neighbor(node, i, -1);
                    let a_here = self.a(node, i, i);
                    let fp = 0.5 * (a_here + self.a(np, i, i)) * (up - uc);
                    let fm = 0.5 * (a_here + self.a(nm, i, i)) * (uc - um);
                    acc += (fp - fm) / (hi * hi);
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let hj = spec.h(j);
                        let ej = unit(j);
                        let grad_p = (u(shift(add(ei, ej))) - u(shift(add(ei, neg(ej))))) / (2.0 * hj);
                        let grad_m = (u(shift(add(neg(ei), ej))) - u(shift(add(neg(ei), neg(ej))))) / (2.0 * hj);
                        acc += (self.a(np, i, j) * grad_p - self.a(nm, i, j) * grad_m) / (2.0 * hi);
                    }
                }
                acc / self.sqrt_det[node]
            })
            .collect()
    }

    /// Discrete Dirichlet pairing `Σ a^{ij} ∂_i u ∂_j w · ∏h` matching the
    /// stencil of [`apply`](Self::apply).
    pub fn dirichlet_form(&self, u: &[f64], w: &[f64]) -> f64 {
        let spec = &self.spec;
        let n = spec.n;
        let mut total = 0.0;
        for node in 0..spec.node_count() {
            for i in 0..n {
                let hi = spec.h(i);
                let np = spec.neighbor(node, i, 1);
                let face = 0.5 * (self.a(node, i, i) + self.a(np, i, i));
                total += face * (u[np] - u[node]) * (w[np] - w[node]) / (hi * hi);
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let hj = spec.h(j);
                    let du_j = (u[spec.neighbor(node, j, 1)] - u[spec.neighbor(node, j, -1)]) / (2.0 * hj);
                    let dw_i = (w[spec.neighbor(node, i, 1)] - w[spec.neighbor(node, i, -1)]) / (2.0 * hi);
                    total += self.a(node, i, j) * du_j * dw_i;
                }
            }
        }
        total * spec.cell_volume()
    }

    /// `Σ (Δu) w sqrt(det g) ∏h`.
    pub fn weighted_pairing(&self, lu: &[f64], w: &[f64]) -> f64 {
        lu.iter().zip(w).zip(&self.sqrt_det).map(|((l, w), s)| l * w * s).sum::<f64>() * self.spec.cell_volume()
    }
}

/// One-shot `Δ_g u` for the metric of `s`.
pub fn laplace_beltrami(s: &GraphState, u: &[f64]) -> Vec<f64> {
    LaplaceBeltrami::new(s).apply(u)
}

fn unit(i: usize) -> [i64; MAX_DIM] {
    let mut d = [0; MAX_DIM];
    d[i] = 1;
    d
}

fn neg(a: [i64; MAX_DIM]) -> [i64; MAX_DIM] {
    [-a[0], -a[1], -a[2]]
}

fn add(a: [i64; MAX_DIM], b: [i64; MAX_DIM]) -> [i64; MAX_DIM] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
