//! Variation measures on grid faces.
//!
//! The gradient of a sampled function lives on interior faces between
//! face-adjacent cells. Each face carries the jump `|u_b - u_a|` times the
//! face area `h^(dim-1)`. Perimeter is the special case of a 0/1 indicator,
//! so `perimeter(set) == tv_value(indicator(set))` exactly, face by face.

use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{Cell, CellSet, Grid, GridFunction, Region};

/// How a face relates to a mask when restricting an edge measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Both endpoint cells must lie in the mask (open-region semantics,
    /// matching the face rule of [`Region::Set`]).
    BothEndpoints,
    /// At least one endpoint cell lies in the mask (closed-region semantics;
    /// an over-approximation that never undercounts mass near the mask).
    AnyEndpoint,
}

/// A nonnegative measure supported on interior grid faces.
///
/// Weights are indexed by axis and the lower cell of the face; faces whose
/// upper cell would leave the grid do not exist and hold no mass.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMeasure {
    grid: Grid,
    weights: Vec<f64>,
}

impl EdgeMeasure {
    pub fn zero(grid: &Grid) -> EdgeMeasure {
        EdgeMeasure { grid: grid.clone(), weights: vec![0.0; grid.dim() * grid.cell_count()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn idx(&self, axis: usize, flat: usize) -> usize {
        axis * self.grid.cell_count() + flat
    }

    /// Flat index of the upper cell across the face, if the face exists.
    fn across(&self, axis: usize, flat: usize) -> Option<usize> {
        let c = self.grid.cell_at(flat);
        if c.0[axis] + 1 < self.grid.cells_per_axis()[axis] {
            let mut u = c;
            u.0[axis] += 1;
            Some(self.grid.flat(u))
        } else {
            None
        }
    }

    pub fn face_weight(&self, axis: usize, lower: Cell) -> f64 {
        self.weights[self.idx(axis, self.grid.flat(lower))]
    }

    pub fn set_face_weight(&mut self, axis: usize, lower: Cell, w: f64) {
        debug_assert!(lower.0[axis] + 1 < self.grid.cells_per_axis()[axis]);
        let i = self.idx(axis, self.grid.flat(lower));
        self.weights[i] = w;
    }

    /// Total mass.
    pub fn value(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass of faces admitted by the mask under the given restriction rule.
    pub fn restrict_sum(&self, mask: &CellSet, rule: Restriction) -> Result<f64> {
        if mask.grid() != &self.grid {
            return Err(Error::GridMismatch { context: "edge measure restriction".into() });
        }
        let n = self.grid.cell_count();
        let mut s = 0.0;
        for axis in 0..self.grid.dim() {
            for flat in 0..n {
                let w = self.weights[self.idx(axis, flat)];
                if w == 0.0 {
                    continue;
                }
                let Some(up) = self.across(axis, flat) else { continue };
                let admitted = match rule {
                    Restriction::BothEndpoints => {
                        mask.contains_flat(flat) && mask.contains_flat(up)
                    }
                    Restriction::AnyEndpoint => mask.contains_flat(flat) || mask.contains_flat(up),
                };
                if admitted {
                    s += w;
                }
            }
        }
        Ok(s)
    }

    /// Faces with nonzero weight, as (lower cell, upper cell, weight), in
    /// axis-major scan order.
    pub fn faces(&self) -> impl Iterator<Item = (Cell, Cell, f64)> + '_ {
        let n = self.grid.cell_count();
        (0..self.grid.dim()).flat_map(move |axis| {
            (0..n).filter_map(move |flat| {
                let w = self.weights[self.idx(axis, flat)];
                if w == 0.0 {
                    return None;
                }
                self.across(axis, flat).map(|up| {
                    (self.grid.cell_at(flat), self.grid.cell_at(up), w)
                })
            })
        })
    }

    pub fn scale(&self, a: f64) -> EdgeMeasure {
        EdgeMeasure {
            grid: self.grid.clone(),
            weights: self.weights.iter().map(|w| a * w).collect(),
        }
    }

    pub fn add(&self, other: &EdgeMeasure) -> Result<EdgeMeasure> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch { context: "sum of edge measures".into() });
        }
        Ok(EdgeMeasure {
            grid: self.grid.clone(),
            weights: self
                .weights
                .iter()
                .zip(other.weights.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// JSON form: grid header plus sparse `[lower, upper, weight]` triples.
    pub fn to_json(&self) -> serde_json::Value {
        let dim = self.grid.dim();
        let faces: Vec<serde_json::Value> = self
            .faces()
            .map(|(a, b, w)| json!([&a.0[..dim], &b.0[..dim], w]))
            .collect();
        json!({
            "grid": {
                "dim": dim,
                "level": self.grid.level(),
                "cells": self.grid.cells_per_axis(),
                "origin": self.grid.origin(),
            },
            "value": self.value(),
            "faces": faces,
        })
    }
}

/// Total variation of `u` over a region, kept as a face measure.
pub fn total_variation(u: &GridFunction, region: Region) -> Result<EdgeMeasure> {
    let grid = u.grid();
    region.check_grid(grid, "total variation")?;
    let mut mu = EdgeMeasure::zero(grid);
    let area = grid.face_area();
    let n = grid.cell_count();
    for axis in 0..grid.dim() {
        for flat in 0..n {
            let Some(up) = mu.across(axis, flat) else { continue };
            if region.admits_face(flat, up) {
                let jump = (u.get_flat(up) - u.get_flat(flat)).abs();
                if jump != 0.0 {
                    mu.weights[axis * n + flat] = jump * area;
                }
            }
        }
    }
    Ok(mu)
}

/// Total variation as a number, without storing the measure.
pub fn tv_value(u: &GridFunction, region: Region) -> Result<f64> {
    let grid = u.grid();
    region.check_grid(grid, "total variation")?;
    let area = grid.face_area();
    let n = grid.cell_count();
    let shape = {
        let mut s = [1usize; 3];
        s[..grid.dim()].copy_from_slice(grid.cells_per_axis());
        s
    };
    let strides = [1usize, shape[0], shape[0] * shape[1]];
    let mut total = 0.0;
    for axis in 0..grid.dim() {
        let stride = strides[axis];
        for flat in 0..n {
            let i = grid.cell_at(flat).0[axis];
            if i + 1 >= shape[axis] {
                continue;
            }
            let up = flat + stride;
            if region.admits_face(flat, up) {
                total += (u.get_flat(up) - u.get_flat(flat)).abs();
            }
        }
    }
    Ok(total * area)
}

/// Perimeter of a set relative to a region: the number of interior faces
/// separating the set from its complement, admitted by the region, times the
/// face area. Faces on the grid frame never count; the grid is an open box.
pub fn perimeter(set: &CellSet, region: Region) -> Result<f64> {
    let grid = set.grid();
    region.check_grid(grid, "perimeter")?;
    let n = grid.cell_count();
    let shape = {
        let mut s = [1usize; 3];
        s[..grid.dim()].copy_from_slice(grid.cells_per_axis());
        s
    };
    let strides = [1usize, shape[0], shape[0] * shape[1]];
    let mut cut = 0usize;
    for axis in 0..grid.dim() {
        let stride = strides[axis];
        for flat in 0..n {
            let i = grid.cell_at(flat).0[axis];
            if i + 1 >= shape[axis] {
                continue;
            }
            let up = flat + stride;
            if set.contains_flat(flat) != set.contains_flat(up) && region.admits_face(flat, up) {
                cut += 1;
            }
        }
    }
    Ok(cut as f64 * grid.face_area())
}

/// The perimeter of a set as a face measure (weight `h^(dim-1)` on each face
/// separating the set from its complement).
pub fn boundary_measure(set: &CellSet) -> EdgeMeasure {
    let u = GridFunction::indicator(set);
    total_variation(&u, Region::Whole).expect("whole region matches any grid")
}

/// Mean of `u` over a region. Errors on an empty region.
pub fn mean(u: &GridFunction, region: Region) -> Result<f64> {
    let grid = u.grid();
    region.check_grid(grid, "mean")?;
    let mut s = 0.0;
    let mut k = 0usize;
    for (f, v) in u.values().iter().enumerate() {
        if region.admits_cell(f) {
            s += v;
            k += 1;
        }
    }
    if k == 0 {
        return Err(Error::InvalidInput("mean over an empty region".into()));
    }
    Ok(s / k as f64)
}

/// Side length of the smallest axis-aligned bounding box, in world units.
pub fn diameter_linf(set: &CellSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidInput("diameter of an empty set".into()));
    }
    let grid = set.grid();
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for c in set.cells() {
        for d in 0..grid.dim() {
            lo[d] = lo[d].min(c.0[d]);
            hi[d] = hi[d].max(c.0[d]);
        }
    }
    let extent = (0..grid.dim()).map(|d| hi[d] - lo[d] + 1).max().unwrap();
    Ok(extent as f64 * grid.spacing())
}

/// Ingredients of the mean-deviation inequality on a set.
#[derive(Debug, Clone, Copy)]
pub struct PoincareReport {
    /// `deviation_l1 / (diameter * variation)`.
    pub ratio: f64,
    /// `sum |u - mean| h^dim` over the set.
    pub deviation_l1: f64,
    /// Total variation of `u` over the set (both-endpoint faces).
    pub variation: f64,
    /// Bounding-box side of the set.
    pub diameter: f64,
}

/// Mean-deviation ratio of `u` on a set. A uniformly small ratio across a
/// family of test functions is the discrete form of a (1,1)-type inequality.
/// Errors when the set is empty or `u` has no variation on it.
pub fn poincare_ratio(u: &GridFunction, set: &CellSet) -> Result<PoincareReport> {
    if u.grid() != set.grid() {
        return Err(Error::GridMismatch { context: "mean-deviation ratio".into() });
    }
    let region = Region::Set(set);
    let m = mean(u, region)?;
    let hv = set.grid().cell_volume();
    let mut dev = 0.0;
    for (f, v) in u.values().iter().enumerate() {
        if region.admits_cell(f) {
            dev += (v - m).abs();
        }
    }
    let deviation_l1 = dev * hv;
    let variation = tv_value(u, region)?;
    if variation == 0.0 {
        return Err(Error::UndefinedRatio(
            "function is constant on the set; deviation ratio is undefined".into(),
        ));
    }
    let diameter = diameter_linf(set)?;
    Ok(PoincareReport {
        ratio: deviation_l1 / (diameter * variation),
        deviation_l1,
        variation,
        diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_perimeter() {
        let g2 = Grid::unit_square(3);
        let s2 = CellSet::from_fn(&g2, |c| c.0 == [3, 3, 0]);
        assert_eq!(perimeter(&s2, Region::Whole).unwrap(), 4.0 * g2.spacing());
        let g3 = Grid::unit_cube(3);
        let s3 = CellSet::from_fn(&g3, |c| c.0 == [3, 3, 3]);
        let h = g3.spacing();
        assert_eq!(perimeter(&s3, Region::Whole).unwrap(), 6.0 * h * h);
    }

    #[test]
    fn perimeter_equals_indicator_variation() {
        let g = Grid::unit_square(4);
        let s = CellSet::from_world_fn(&g, |p| {
            (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.09
        });
        let u = GridFunction::indicator(&s);
        assert_eq!(
            perimeter(&s, Region::Whole).unwrap(),
            tv_value(&u, Region::Whole).unwrap()
        );
        assert_eq!(
            boundary_measure(&s).value(),
            perimeter(&s, Region::Whole).unwrap()
        );
    }

    #[test]
    fn perimeter_is_complement_symmetric() {
        let g = Grid::unit_square(4);
        let s = CellSet::from_fn(&g, |c| (c.0[0] * 7 + c.0[1] * 3) % 5 < 2);
        assert_eq!(
            perimeter(&s, Region::Whole).unwrap(),
            perimeter(&s.complement(), Region::Whole).unwrap()
        );
    }

    #[test]
    fn frame_faces_never_count() {
        let g = Grid::unit_square(3);
        // Left half, flush against the frame: only the internal cut counts.
        let s = CellSet::from_fn(&g, |c| c.0[0] < 4);
        assert_eq!(perimeter(&s, Region::Whole).unwrap(), 8.0 * g.spacing());
    }

    #[test]
    fn region_restriction_uses_both_endpoints() {
        let g = Grid::unit_square(3);
        let left = CellSet::from_fn(&g, |c| c.0[0] < 4);
        let right = left.complement();
        // The cut between halves has one endpoint on each side, so neither
        // half admits it as a region.
        assert_eq!(perimeter(&left, Region::Set(&right)).unwrap(), 0.0);
        assert_eq!(perimeter(&left, Region::Set(&left)).unwrap(), 0.0);
    }

    #[test]
    fn restriction_rules_differ_across_an_interface() {
        let g = Grid::unit_square(3);
        let left = CellSet::from_fn(&g, |c| c.0[0] < 4);
        let mu = boundary_measure(&left);
        let any = mu.restrict_sum(&left, Restriction::AnyEndpoint).unwrap();
        let both = mu.restrict_sum(&left, Restriction::BothEndpoints).unwrap();
        assert_eq!(any, mu.value());
        assert_eq!(both, 0.0);
    }

    #[test]
    fn tv_is_absolutely_homogeneous() {
        let g = Grid::unit_square(4);
        let u = GridFunction::from_world_fn(&g, |p| (13.0 * p[0]).sin() + p[1]);
        let a = -3.5;
        let tv_u = tv_value(&u, Region::Whole).unwrap();
        let tv_au = tv_value(&u.scale(a), Region::Whole).unwrap();
        assert!((tv_au - a.abs() * tv_u).abs() <= 1e-12 * tv_u.max(1.0));
    }

    #[test]
    fn ramp_deviation_ratio_near_one_quarter() {
        let g = Grid::unit_square(6);
        let u = GridFunction::from_world_fn(&g, |p| p[0]);
        let full = CellSet::full(&g);
        let rep = poincare_ratio(&u, &full).unwrap();
        // Exact value is (1/4) / (1 - h); h = 1/64 here.
        assert!((rep.ratio - 0.25).abs() < 0.005, "ratio {}", rep.ratio);
        assert_eq!(rep.diameter, 1.0);
    }

    #[test]
    fn constant_function_ratio_is_typed_error() {
        let g = Grid::unit_square(3);
        let u = GridFunction::constant(&g, 2.0);
        let full = CellSet::full(&g);
        assert!(matches!(
            poincare_ratio(&u, &full),
            Err(Error::UndefinedRatio(_))
        ));
    }

    #[test]
    fn edge_measure_json_lists_sparse_faces() {
        let g = Grid::unit_square(2);
        let s = CellSet::from_fn(&g, |c| c.0 == [1, 1, 0]);
        let v = boundary_measure(&s).to_json();
        assert_eq!(v["faces"].as_array().unwrap().len(), 4);
        assert_eq!(v["grid"]["dim"], 2);
        let total = v["value"].as_f64().unwrap();
        assert_eq!(total, 4.0 * g.spacing());
    }
}
