use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_DIM: usize = 3;
pub const MIN_CELLS: usize = 8;
pub const MAX_CELLS: usize = 512;

/// Periodic tensor grid over the torus `Π [origin_i, origin_i + L_i)`.
///
/// Node `k` sits at `x_i = origin_i + k_i h_i` with `h_i = L_i / N_i`. Axes
/// past `n` are inert (one cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
    pub cells: [usize; MAX_DIM],
    pub lengths: [f64; MAX_DIM],
    pub origin: [f64; MAX_DIM],
}

impl GridSpec {
    /// Grid centred on the origin of `R^n`.
    pub fn new(n: usize, m: usize, cells: &[usize], lengths: &[f64]) -> Result<Self> {
        if cells.len() != n || lengths.len() != n {
            return Err(Error::InvalidGrid(alloc::format!(
                "expected {n} cell counts and lengths, got {} and {}",
                cells.len(),
                lengths.len()
            )));
        }
        let mut spec = GridSpec { n, m, cells: [1; MAX_DIM], lengths: [1.0; MAX_DIM], origin: [0.0; MAX_DIM] };
        for i in 0..n {
            spec.cells[i] = cells[i];
            spec.lengths[i] = lengths[i];
            spec.origin[i] = -0.5 * lengths[i];
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Same number of cells and period on every axis.
    pub fn cube(n: usize, m: usize, cells: usize, length: f64) -> Result<Self> {
        Self::new(n, m, &[cells; MAX_DIM][..n.min(MAX_DIM)], &[length; MAX_DIM][..n.min(MAX_DIM)])
    }

    pub fn with_origin(mut self, origin: &[f64]) -> Result<Self> {
        if origin.len() != self.n {
            return Err(Error::InvalidGrid("origin has the wrong length".into()));
        }
        self.origin[..self.n].copy_from_slice(origin);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.n) {
            return Err(Error::InvalidGrid(alloc::format!("n = {} outside 1..=3", self.n)));
        }
        if !(1..=MAX_DIM).contains(&self.m) {
            return Err(Error::InvalidGrid(alloc::format!("m = {} outside 1..=3", self.m)));
        }
        for i in 0..self.n {
            if !(MIN_CELLS..=MAX_CELLS).contains(&self.cells[i]) {
                return Err(Error::InvalidGrid(alloc::format!(
                    "cells[{i}] = {} outside {MIN_CELLS}..={MAX_CELLS}",
                    self.cells[i]
                )));
            }
            if !(self.lengths[i] > 0.0 && self.lengths[i].is_finite()) {
                return Err(Error::InvalidGrid(alloc::format!("length[{i}] must be positive")));
            }
            if !self.origin[i].is_finite() {
                return Err(Error::InvalidGrid(alloc::format!("origin[{i}] must be finite")));
            }
        }
        Ok(())
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n).map(|i| self.h(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n).map(|i| self.h(i)).fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().product()
    }

    /// Product of the cell sizes.
    pub fn cell_volume(&self) -> f64 {
        (0..self.n).map(|i| self.h(i)).product()
    }

    pub fn node_index(&self, k: [usize; MAX_DIM]) -> usize {
        k[0] + self.cells[0] * (k[1] + self.cells[1] * k[2])
    }

    pub fn multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let k0 = node % self.cells[0];
        let rest = node / self.cells[0];
        [k0, rest % self.cells[1], rest / self.cells[1]]
    }

    /// Index of the node at an unwrapped multi-index.
    pub fn wrap(&self, k: [i64; MAX_DIM]) -> usize {
        let mut w = [0usize; MAX_DIM];
        for i in 0..MAX_DIM {
            w[i] = k[i].rem_euclid(self.cells[i] as i64) as usize;
        }
        self.node_index(w)
    }

    pub fn neighbor(&self, node: usize, axis: usize, offset: i64) -> usize {
        let mut k = self.unwrapped(node);
        k[axis] += offset;
        self.wrap(k)
    }

    pub fn unwrapped(&self, node: usize) -> [i64; MAX_DIM] {
        let k = self.multi_index(node);
        [k[0] as i64, k[1] as i64, k[2] as i64]
    }

    /// Coordinates of an unwrapped multi-index (not reduced to the cell).
    pub fn position(&self, k: [i64; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for i in 0..self.n {
            x[i] = self.origin[i] + k[i] as f64 * self.h(i);
        }
        x
    }

    pub fn node_position(&self, node: usize) -> [f64; MAX_DIM] {
        self.position(self.unwrapped(node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_wrap() {
        let g = GridSpec::new(3, 1, &[8, 9, 10], &[1.0, 2.0, 3.0]).unwrap();
        for node in [0, 7, 8, 100, g.node_count() - 1] {
            assert_eq!(g.node_index(g.multi_index(node)), node);
        }
        assert_eq!(g.wrap([-1, 0, 0]), g.node_index([7, 0, 0]));
        assert_eq!(g.neighbor(g.node_index([7, 8, 9]), 1, 1), g.node_index([7, 0, 9]));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::cube(2, 1, 4, 1.0).is_err());
        assert!(GridSpec::cube(4, 1, 8, 1.0).is_err());
        assert!(GridSpec::cube(1, 0, 8, 1.0).is_err());
        assert!(GridSpec::cube(1, 1, 8, -1.0).is_err());
        assert!(GridSpec::cube(1, 1, 1024, 1.0).is_err());
    }
}
