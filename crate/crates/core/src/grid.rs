//! Uniform lattice over a truncated box, interior/exterior partitions,
//! and grid functions with the `h^dim`-weighted inner product.
//!
//! The continuum equation lives on all of space; here it is truncated to a
//! box with zero values imposed outside. Solutions of interest are
//! supported in the closure of the interior region together with the
//! exterior windows, so a box containing both with a margin layer commits
//! only a controlled truncation error.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;

use crate::scalar::abs;
use crate::{Error, Result};

/// Uniform lattice in dimension 1 or 2. Node coordinates are
/// `origin + index * spacing` componentwise; flat indices are row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    counts: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, counts: &[usize], spacing: f64, origin: &[f64]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGeometry(format!(
                "dim must be 1 or 2, got {dim}"
            )));
        }
        if counts.len() != dim || origin.len() != dim {
            return Err(Error::InvalidGeometry(format!(
                "counts/origin must have {dim} entries, got {}/{}",
                counts.len(),
                origin.len()
            )));
        }
        if counts.iter().any(|&c| c < 3) {
            return Err(Error::InvalidGeometry(format!(
                "every axis needs at least 3 nodes, got {counts:?}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        Ok(Grid {
            dim,
            counts: counts.to_vec(),
            spacing,
            origin: origin.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn node_count(&self) -> usize {
        self.counts.iter().product()
    }

    /// Quadrature weight `h^dim` of one node cell.
    pub fn cell_weight(&self) -> f64 {
        let mut w = 1.0;
        for _ in 0..self.dim {
            w *= self.spacing;
        }
        w
    }

    /// Multi-index of a flat node index (second component is 0 in 1D).
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        debug_assert!(flat < self.node_count());
        if self.dim == 1 {
            [flat, 0]
        } else {
            let ny = self.counts[1];
            [flat / ny, flat % ny]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.counts[1] + idx[1]
        }
    }

    /// Physical coordinates of a node (second component is 0 in 1D).
    pub fn coords(&self, flat: usize) -> [f64; 2] {
        let idx = self.multi_index(flat);
        let mut c = [0.0; 2];
        for a in 0..self.dim {
            c[a] = self.origin[a] + idx[a] as f64 * self.spacing;
        }
        c
    }

    /// True when the node sits on the outermost lattice layer of any axis.
    pub fn on_boundary_layer(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim).any(|a| idx[a] == 0 || idx[a] + 1 == self.counts[a])
    }
}

/// Closed axis-aligned box used to rasterize regions: a node belongs to the
/// box iff its coordinates lie within the bounds inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperBox {
    bounds: Vec<(f64, f64)>,
}

impl HyperBox {
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 2 {
            return Err(Error::InvalidGeometry(format!(
                "box must have 1 or 2 axes, got {}",
                bounds.len()
            )));
        }
        for (a, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo <= hi) {
                return Err(Error::InvalidGeometry(format!(
                    "box axis {a} has lo {lo} > hi {hi}"
                )));
            }
        }
        Ok(HyperBox {
            bounds: bounds.to_vec(),
        })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, point: &[f64; 2]) -> bool {
        self.bounds
            .iter()
            .enumerate()
            .all(|(a, &(lo, hi))| point[a] >= lo && point[a] <= hi)
    }

    /// Flat indices of all grid nodes inside the box, ascending.
    pub fn rasterize(&self, grid: &Grid) -> Result<Vec<usize>> {
        if self.bounds.len() != grid.dim() {
            return Err(Error::InvalidGeometry(format!(
                "box dimension {} does not match grid dimension {}",
                self.bounds.len(),
                grid.dim()
            )));
        }
        Ok((0..grid.node_count())
            .filter(|&i| self.contains(&grid.coords(i)))
            .collect())
    }
}

/// Disjoint node index sets: interior region, truncated exterior, and the
/// two exterior measurement windows. Windows may coincide but never meet
/// the interior.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    grid: Grid,
    omega: Vec<usize>,
    exterior: Vec<usize>,
    w1: Vec<usize>,
    w2: Vec<usize>,
    /// position of each node in the exterior vector, `usize::MAX` for
    /// interior nodes
    exterior_pos: Vec<usize>,
    omega_pos: Vec<usize>,
}

impl RegionPartition {
    /// Rasterizes the interior box and both windows. All nodes outside the
    /// interior box form the exterior.
    pub fn from_boxes(
        grid: &Grid,
        omega_box: &HyperBox,
        w1_box: &HyperBox,
        w2_box: &HyperBox,
    ) -> Result<Self> {
        let omega = omega_box.rasterize(grid)?;
        if omega.is_empty() {
            return Err(Error::InvalidGeometry(
                "interior box contains no grid nodes".into(),
            ));
        }
        if omega.iter().any(|&i| grid.on_boundary_layer(i)) {
            return Err(Error::InvalidGeometry(
                "interior region touches the grid boundary layer; enlarge the box or the margin"
                    .into(),
            ));
        }
        let mut is_omega = vec![false; grid.node_count()];
        for &i in &omega {
            is_omega[i] = true;
        }
        let exterior: Vec<usize> = (0..grid.node_count()).filter(|&i| !is_omega[i]).collect();

        let mut rasterize_window = |name: &str, b: &HyperBox| -> Result<Vec<usize>> {
            let w = b.rasterize(grid)?;
            if w.is_empty() {
                return Err(Error::InvalidGeometry(format!(
                    "window {name} is empty after rasterization"
                )));
            }
            if let Some(&i) = w.iter().find(|&&i| is_omega[i]) {
                return Err(Error::InvalidGeometry(format!(
                    "window {name} overlaps the interior region at node {i}"
                )));
            }
            Ok(w)
        };
        let w1 = rasterize_window("w1", w1_box)?;
        let w2 = rasterize_window("w2", w2_box)?;

        let mut exterior_pos = vec![usize::MAX; grid.node_count()];
        for (p, &i) in exterior.iter().enumerate() {
            exterior_pos[i] = p;
        }
        let mut omega_pos = vec![usize::MAX; grid.node_count()];
        for (p, &i) in omega.iter().enumerate() {
            omega_pos[i] = p;
        }
        Ok(RegionPartition {
            grid: grid.clone(),
            omega,
            exterior,
            w1,
            w2,
            exterior_pos,
            omega_pos,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn exterior(&self) -> &[usize] {
        &self.exterior
    }

    pub fn w1(&self) -> &[usize] {
        &self.w1
    }

    pub fn w2(&self) -> &[usize] {
        &self.w2
    }

    /// Positions of the given nodes inside the exterior index vector.
    pub fn exterior_positions(&self, nodes: &[usize]) -> Result<Vec<usize>> {
        nodes
            .iter()
            .map(|&i| {
                let p = self.exterior_pos.get(i).copied().unwrap_or(usize::MAX);
                if p == usize::MAX {
                    Err(Error::InvalidGeometry(format!(
                        "node {i} is not an exterior node"
                    )))
                } else {
                    Ok(p)
                }
            })
            .collect()
    }

    pub fn omega_position(&self, node: usize) -> Option<usize> {
        match self.omega_pos.get(node) {
            Some(&p) if p != usize::MAX => Some(p),
            _ => None,
        }
    }

    /// Extends window data (ordered like `window`) by zero to the full
    /// exterior vector.
    pub fn window_to_exterior(&self, window: &[usize], data: &DVector<f64>) -> Result<DVector<f64>> {
        if data.len() != window.len() {
            return Err(Error::IndexMismatch {
                expected: window.len(),
                got: data.len(),
            });
        }
        let positions = self.exterior_positions(window)?;
        let mut f = DVector::zeros(self.exterior.len());
        for (p, &v) in positions.iter().zip(data.iter()) {
            f[*p] = v;
        }
        Ok(f)
    }
}

/// Real-valued function on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: DVector<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: DVector<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::IndexMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.node_count();
        GridFunction {
            grid,
            values: DVector::zeros(n),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 2]) -> f64) -> Self {
        let values = DVector::from_fn(grid.node_count(), |i, _| f(&grid.coords(i)));
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DVector<f64> {
        &mut self.values
    }

    /// `h^dim`-weighted inner product.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::IndexMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(self.grid.cell_weight() * self.values.dot(&other.values))
    }

    /// Weighted L² norm.
    pub fn norm(&self) -> f64 {
        crate::scalar::sqrt(self.grid.cell_weight()) * self.values.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(abs(v)))
    }

    /// Values on the given region, in region order.
    pub fn restrict(&self, region: &[usize]) -> Result<DVector<f64>> {
        let n = self.values.len();
        let mut out = DVector::zeros(region.len());
        for (k, &i) in region.iter().enumerate() {
            if i >= n {
                return Err(Error::IndexMismatch { expected: n, got: i });
            }
            out[k] = self.values[i];
        }
        Ok(out)
    }
}

/// Places region values on their nodes and zero elsewhere, so that
/// `restrict ∘ extend_by_zero` is the identity on region vectors.
pub fn extend_by_zero(grid: &Grid, region: &[usize], values: &DVector<f64>) -> Result<GridFunction> {
    if values.len() != region.len() {
        return Err(Error::IndexMismatch {
            expected: region.len(),
            got: values.len(),
        });
    }
    let mut out = DVector::zeros(grid.node_count());
    for (k, &i) in region.iter().enumerate() {
        if i >= out.len() {
            return Err(Error::IndexMismatch {
                expected: out.len(),
                got: i,
            });
        }
        out[i] = values[k];
    }
    GridFunction::new(grid.clone(), out)
}

/// Weighted L² norm of a bare region vector.
pub fn weighted_norm(grid: &Grid, v: &DVector<f64>) -> f64 {
    crate::scalar::sqrt(grid.cell_weight()) * v.norm()
}
