//! Interior cube decompositions, partitions of unity, and smoothing.
//!
//! An open cell set is tiled by dyadic cubes whose side is comparable to
//! their distance from the boundary. The distance of a cube `Q` is
//!
//! ```text
//! d(Q) = min over boundary cell centers p of dist(box(Q), p) - h/2
//! ```
//!
//! where the boundary consists of the cells just outside the set (vertex
//! adjacency) together with a virtual ring just outside the grid frame, so a
//! set flush against the frame is treated like a set in an open box. A cube
//! is accepted when `side(Q) <= d(Q)` and its parent was not; single cells
//! that still fail are emitted flagged `at_resolution_floor`. With this
//! metric the four tiling properties hold by construction and are asserted:
//! cubes lie in the set (1) and tile it disjointly (2), non-floor cubes have
//! `side <= d <= 4 sqrt(n) side` (3), and touching cubes differ in side by
//! at most a factor of four (4).

use serde_json::json;

use crate::dist::{distance_to, DistanceField};
use crate::error::{Error, Result};
use crate::grid::{Adjacency, Cell, CellSet, Grid, GridFunction, Region};
use crate::measure::tv_value;

/// One dyadic cube of a decomposition.
#[derive(Debug, Clone, Copy)]
pub struct WhitneyCube {
    /// Lower corner cell; all its indices are multiples of `size_cells`.
    pub corner: Cell,
    /// Side length in cells, a power of two.
    pub size_cells: usize,
    /// Boundary distance `d(Q)` in world units.
    pub distance: f64,
    /// True for single cells that violate the lower distance bound because
    /// the grid cannot subdivide further.
    pub at_resolution_floor: bool,
}

impl WhitneyCube {
    /// World side length.
    pub fn side(&self, grid: &Grid) -> f64 {
        self.size_cells as f64 * grid.spacing()
    }

    /// Dyadic level of the cube: side = `2^-level`.
    pub fn level(&self, grid: &Grid) -> u32 {
        grid.level() - self.size_cells.trailing_zeros()
    }

    /// Cells covered by the cube.
    pub fn cells<'a>(&'a self, grid: &'a Grid) -> impl Iterator<Item = Cell> + 'a {
        let s = self.size_cells;
        let dim = grid.dim();
        let corner = self.corner;
        (0..s.pow(dim as u32)).map(move |k| {
            let mut c = corner;
            let mut k = k;
            for d in 0..dim {
                c.0[d] += k % s;
                k /= s;
            }
            c
        })
    }

    /// Closed world box of the cube, as (low corner, high corner).
    pub fn world_box(&self, grid: &Grid) -> ([f64; 3], [f64; 3]) {
        let h = grid.spacing();
        let s = self.size_cells as f64 * h;
        let mut lo = [0f64; 3];
        let mut hi = [0f64; 3];
        for d in 0..grid.dim() {
            lo[d] = grid.origin()[d] + self.corner.0[d] as f64 * h;
            hi[d] = lo[d] + s;
        }
        (lo, hi)
    }

    /// Euclidean distance from the closed cube box to a world point.
    pub fn box_distance(&self, grid: &Grid, p: &[f64]) -> f64 {
        let (lo, hi) = self.world_box(grid);
        let mut sq = 0.0;
        for d in 0..grid.dim() {
            let e = (lo[d] - p[d]).max(p[d] - hi[d]).max(0.0);
            sq += e * e;
        }
        sq.sqrt()
    }

    /// Whether the closed boxes of two cubes share at least a point.
    pub fn touches(&self, other: &WhitneyCube, dim: usize) -> bool {
        (0..dim).all(|d| {
            let (a0, a1) = (self.corner.0[d], self.corner.0[d] + self.size_cells);
            let (b0, b1) = (other.corner.0[d], other.corner.0[d] + other.size_cells);
            a0 <= b1 && b0 <= a1
        })
    }
}

/// A tiling of an open cell set by dyadic cubes.
#[derive(Debug, Clone)]
pub struct WhitneyDecomposition {
    open_set: CellSet,
    boundary: CellSet,
    pub cubes: Vec<WhitneyCube>,
    /// Cube index per cell; `u32::MAX` outside the set.
    owner: Vec<u32>,
}

const NO_OWNER: u32 = u32::MAX;

impl WhitneyDecomposition {
    pub fn grid(&self) -> &Grid {
        self.open_set.grid()
    }

    pub fn open_set(&self) -> &CellSet {
        &self.open_set
    }

    /// Boundary cells the distances were measured against (the outer vertex
    /// ring; the grid frame acts as extra boundary implicitly).
    pub fn boundary(&self) -> &CellSet {
        &self.boundary
    }

    pub fn owner_of(&self, c: Cell) -> Option<usize> {
        let o = self.owner[self.grid().flat(c)];
        (o != NO_OWNER).then_some(o as usize)
    }

    pub fn floor_cell_count(&self) -> usize {
        self.cubes
            .iter()
            .filter(|q| q.at_resolution_floor)
            .map(|q| q.size_cells.pow(self.grid().dim() as u32))
            .sum()
    }

    /// Fraction of the set's cells covered by resolution-floor cubes.
    pub fn floor_fraction(&self) -> f64 {
        self.floor_cell_count() as f64 / self.open_set.count() as f64
    }

    /// Indices of cubes whose closed boxes touch the given cube's.
    pub fn neighbors_of(&self, i: usize) -> Vec<usize> {
        let grid = self.grid();
        let q = &self.cubes[i];
        let mut out: Vec<usize> = Vec::new();
        // Walk the one-cell halo of the cube in index space.
        let s = q.size_cells as i64;
        let dim = grid.dim();
        let lo: Vec<i64> = (0..dim).map(|d| q.corner.0[d] as i64 - 1).collect();
        let hi: Vec<i64> = (0..dim).map(|d| q.corner.0[d] as i64 + s).collect();
        let mut visit = |p: &[i64; 3]| {
            if self.grid().holds_signed(p) {
                let c = Cell([p[0] as usize, p[1] as usize, p[2] as usize]);
                let o = self.owner[self.grid().flat(c)];
                if o != NO_OWNER && o as usize != i && !out.contains(&(o as usize)) {
                    out.push(o as usize);
                }
            }
        };
        if dim == 2 {
            for x in lo[0]..=hi[0] {
                for y in [lo[1], hi[1]] {
                    visit(&[x, y, 0]);
                }
            }
            for y in (lo[1] + 1)..hi[1] {
                for x in [lo[0], hi[0]] {
                    visit(&[x, y, 0]);
                }
            }
        } else {
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        let on_face = x == lo[0]
                            || x == hi[0]
                            || y == lo[1]
                            || y == hi[1]
                            || z == lo[2]
                            || z == hi[2];
                        if on_face {
                            visit(&[x, y, z]);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Re-check the four tiling properties. Construction already asserts
    /// them; this is exposed so external checks can rerun the verification.
    pub fn verify(&self) -> Result<()> {
        let grid = self.grid();
        let n = grid.dim() as f64;
        let upper = 4.0 * n.sqrt();
        // (1) + (2): every cube cell is in the set and owned exactly once.
        let mut covered = 0usize;
        for (i, q) in self.cubes.iter().enumerate() {
            if q.corner.0.iter().any(|c| c % q.size_cells != 0) {
                return Err(Error::Contract(format!("cube {i} is not dyadically aligned")));
            }
            for c in q.cells(grid) {
                if !self.open_set.contains(c) {
                    return Err(Error::Contract(format!("cube {i} leaves the open set")));
                }
                if self.owner[grid.flat(c)] != i as u32 {
                    return Err(Error::Contract(format!("cube {i} overlaps another cube")));
                }
                covered += 1;
            }
        }
        if covered != self.open_set.count() {
            return Err(Error::Contract(format!(
                "cubes cover {covered} of {} cells",
                self.open_set.count()
            )));
        }
        // (3): distance comparable to side, exactly, for non-floor cubes.
        for (i, q) in self.cubes.iter().enumerate() {
            let side = q.side(grid);
            if q.at_resolution_floor {
                if side <= q.distance {
                    return Err(Error::Contract(format!(
                        "cube {i} is flagged floor but passes the distance bound"
                    )));
                }
            } else if !(side <= q.distance && q.distance <= upper * side) {
                return Err(Error::Contract(format!(
                    "cube {i} violates side {side} <= d {} <= {upper} side",
                    q.distance
                )));
            }
        }
        // (4): touching cubes differ by at most a factor of four.
        for i in 0..self.cubes.len() {
            for j in self.neighbors_of(i) {
                let a = self.cubes[i].size_cells;
                let b = self.cubes[j].size_cells;
                if a > 4 * b || b > 4 * a {
                    return Err(Error::Contract(format!(
                        "touching cubes {i} and {j} have sides {a} and {b} cells"
                    )));
                }
            }
        }
        Ok(())
    }

    /// JSON dump: one entry per cube with its dyadic level and index.
    pub fn to_json(&self) -> serde_json::Value {
        let grid = self.grid();
        let dim = grid.dim();
        let cubes: Vec<serde_json::Value> = self
            .cubes
            .iter()
            .map(|q| {
                let idx: Vec<usize> =
                    (0..dim).map(|d| q.corner.0[d] / q.size_cells).collect();
                json!({
                    "level": q.level(grid),
                    "index": idx,
                    "at_resolution_floor": q.at_resolution_floor,
                })
            })
            .collect();
        json!({
            "grid_level": grid.level(),
            "cube_count": self.cubes.len(),
            "floor_cells": self.floor_cell_count(),
            "cubes": cubes,
        })
    }
}

/// Boundary cells of an open set: the outer vertex ring.
pub fn boundary_cells(a: &CellSet) -> CellSet {
    a.outer_boundary(Adjacency::Vertex)
}

struct Builder<'a> {
    a: &'a CellSet,
    grid: &'a Grid,
    h: f64,
    /// World centers of boundary cells.
    boundary_pts: Vec<[f64; 3]>,
    /// Cell-center distance to the nearest boundary center.
    edt: DistanceField,
    cubes: Vec<WhitneyCube>,
    owner: Vec<u32>,
}

impl<'a> Builder<'a> {
    /// Distance from the cube box to the grid frame planes.
    fn frame_gap(&self, corner: Cell, size: usize) -> f64 {
        let mut gap = f64::INFINITY;
        for d in 0..self.grid.dim() {
            let lo = corner.0[d] as f64 * self.h;
            let hi = lo + size as f64 * self.h;
            let end = self.grid.cells_per_axis()[d] as f64 * self.h;
            gap = gap.min(lo).min(end - hi);
        }
        gap
    }

    /// Exact `d(Q)`: nearest boundary center measured from the cube box,
    /// minus half a cell, and the frame counted at its exact gap.
    fn cube_distance(&self, corner: Cell, size: usize) -> f64 {
        let dim = self.grid.dim();
        let half = size as f64 * self.h / 2.0;
        let mut center = [0f64; 3];
        for d in 0..dim {
            center[d] = self.grid.origin()[d] + corner.0[d] as f64 * self.h + half;
        }
        let mut best_sq = f64::INFINITY;
        for p in &self.boundary_pts {
            let mut sq = 0.0;
            for d in 0..dim {
                let e = ((p[d] - center[d]).abs() - half).max(0.0);
                sq += e * e;
                if sq >= best_sq {
                    break;
                }
            }
            if sq < best_sq {
                best_sq = sq;
            }
        }
        (best_sq.sqrt() - self.h / 2.0).min(self.frame_gap(corner, size))
    }

    /// Whether all cells of the cube are in the set, and the smallest
    /// cell-center boundary distance over the cube. `None` when the cube
    /// leaves the grid or the set.
    fn scan(&self, corner: Cell, size: usize) -> Option<f64> {
        let grid = self.grid;
        for d in 0..grid.dim() {
            if corner.0[d] + size > grid.cells_per_axis()[d] {
                return None;
            }
        }
        let probe = WhitneyCube {
            corner,
            size_cells: size,
            distance: 0.0,
            at_resolution_floor: false,
        };
        let mut min_edt = f64::INFINITY;
        for c in probe.cells(grid) {
            if !self.a.contains(c) {
                return None;
            }
            min_edt = min_edt.min(self.edt.world(c));
        }
        Some(min_edt)
    }

    fn has_any_set_cell(&self, corner: Cell, size: usize) -> bool {
        let grid = self.grid;
        let dim = grid.dim();
        let mut lo = [0usize; 3];
        let mut hi = [1usize; 3];
        for d in 0..dim {
            if corner.0[d] >= grid.cells_per_axis()[d] {
                return false;
            }
            lo[d] = corner.0[d];
            hi[d] = (corner.0[d] + size).min(grid.cells_per_axis()[d]);
        }
        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    if self.a.contains(Cell([x, y, z])) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn emit(&mut self, corner: Cell, size: usize, distance: f64, floor: bool) {
        let q = WhitneyCube {
            corner,
            size_cells: size,
            distance,
            at_resolution_floor: floor,
        };
        let id = self.cubes.len() as u32;
        for c in q.cells(self.grid) {
            let f = self.grid.flat(c);
            debug_assert_eq!(self.owner[f], NO_OWNER);
            self.owner[f] = id;
        }
        self.cubes.push(q);
    }

    fn recurse(&mut self, corner: Cell, size: usize) {
        if !self.has_any_set_cell(corner, size) {
            return;
        }
        let side = size as f64 * self.h;
        if let Some(min_edt) = self.scan(corner, size) {
            // d(Q) <= min cell-center distance, so this rejection needs no
            // exact pass; the frame gap can only lower d(Q) further.
            let target = side + self.h / 2.0;
            let d = if min_edt < target && size > 1 {
                None
            } else {
                Some(self.cube_distance(corner, size))
            };
            if let Some(d) = d {
                if side <= d {
                    self.emit(corner, size, d, false);
                    return;
                }
                if size == 1 {
                    self.emit(corner, size, d, true);
                    return;
                }
            }
        } else if size == 1 {
            return;
        }
        let half = size / 2;
        let dim = self.grid.dim();
        let kids = 1usize << dim;
        for k in 0..kids {
            let mut c = corner;
            for d in 0..dim {
                if k & (1 << d) != 0 {
                    c.0[d] += half;
                }
            }
            self.recurse(c, half);
        }
    }
}

/// Decompose an open cell set into dyadic cubes.
///
/// The set must be nonempty and must not cover the whole grid. The grid
/// frame counts as boundary, so sets flush against it decompose the way they
/// would inside a larger open box.
pub fn whitney_decompose(a: &CellSet) -> Result<WhitneyDecomposition> {
    if a.is_empty() {
        return Err(Error::InvalidInput("cannot decompose an empty set".into()));
    }
    let grid = a.grid().clone();
    if a.count() == grid.cell_count() {
        return Err(Error::InvalidInput(
            "the set covers the whole grid; no boundary cell exists to measure against".into(),
        ));
    }
    let boundary = boundary_cells(a);
    debug_assert!(!boundary.is_empty());
    let boundary_pts: Vec<[f64; 3]> = boundary.cells().map(|c| grid.center(c)).collect();
    let edt = distance_to(&boundary);
    let mut root = 1usize;
    while root < *grid.cells_per_axis().iter().max().unwrap() {
        root *= 2;
    }
    let mut b = Builder {
        a,
        grid: &grid,
        h: grid.spacing(),
        boundary_pts,
        edt,
        cubes: Vec::new(),
        owner: vec![NO_OWNER; grid.cell_count()],
    };
    b.recurse(Cell([0, 0, 0]), root);
    let out = WhitneyDecomposition {
        open_set: a.clone(),
        boundary,
        cubes: b.cubes,
        owner: b.owner,
    };
    out.verify()?;
    Ok(out)
}

/// A partition of unity subordinate to a decomposition: one bump per cube,
/// equal to 1 on the cube, supported within an eighth of a side around it,
/// normalized to sum to 1 over the set.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub decomposition: WhitneyDecomposition,
    /// Per cube, the normalized bump as sparse (flat cell, value) pairs.
    bumps: Vec<Vec<(usize, f64)>>,
    /// Largest observed `side * |discrete gradient|` over all bumps.
    pub gradient_bound_constant: f64,
}

/// A-priori cap on `side * |gradient|` for any bump; construction fails if a
/// bump exceeds it.
pub const GRADIENT_CAP: f64 = 64.0;

impl PartitionOfUnity {
    /// Value of bump `i` at a cell.
    pub fn psi(&self, i: usize, c: Cell) -> f64 {
        let f = self.decomposition.grid().flat(c);
        self.bumps[i]
            .iter()
            .find(|(g, _)| *g == f)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    /// Sum of all bumps at a cell (1 on the set, 0 outside all supports).
    pub fn sum_at(&self, c: Cell) -> f64 {
        (0..self.bumps.len()).map(|i| self.psi(i, c)).sum()
    }

    pub fn support(&self, i: usize) -> &[(usize, f64)] {
        &self.bumps[i]
    }
}

/// Build the partition of unity: tent pre-bumps
/// `eta_i(x) = clamp(1 - 8 dist(x, Q_i) / side_i, 0, 1)` normalized by their
/// sum. The support and sum properties are asserted; the observed gradient
/// constant is stored and checked against [`GRADIENT_CAP`].
pub fn partition_of_unity(w: WhitneyDecomposition) -> Result<PartitionOfUnity> {
    let grid = w.grid().clone();
    let h = grid.spacing();
    let n = grid.cell_count();
    // Raw tents, sparse per cube.
    let mut raw: Vec<Vec<(usize, f64)>> = Vec::with_capacity(w.cubes.len());
    let mut denom = vec![0f64; n];
    for q in &w.cubes {
        let side = q.side(&grid);
        let radius = side / 8.0;
        let reach = (radius / h).ceil() as i64;
        let dim = grid.dim();
        let mut entries = Vec::new();
        let mut lo = [0i64; 3];
        let mut hi = [1i64; 3];
        for d in 0..dim {
            lo[d] = q.corner.0[d] as i64 - reach;
            hi[d] = q.corner.0[d] as i64 + q.size_cells as i64 + reach;
        }
        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    let p = [x, y, z];
                    if !grid.holds_signed(&p) {
                        continue;
                    }
                    let c = Cell([x as usize, y as usize, z as usize]);
                    let d = q.box_distance(&grid, &grid.center(c));
                    if d < radius {
                        let eta = (1.0 - 8.0 * d / side).clamp(0.0, 1.0);
                        let f = grid.flat(c);
                        entries.push((f, eta));
                        denom[f] += eta;
                    }
                }
            }
        }
        raw.push(entries);
    }
    // Support must stay inside the set: a bump reaching outside would make
    // the partition nonzero beyond the closure.
    for (i, entries) in raw.iter().enumerate() {
        for (f, _) in entries {
            if !w.open_set().contains_flat(*f) {
                return Err(Error::Contract(format!(
                    "bump {i} reaches outside the open set"
                )));
            }
        }
    }
    // Normalize.
    let mut bumps = raw;
    for entries in &mut bumps {
        for (f, v) in entries.iter_mut() {
            *v /= denom[*f];
        }
    }
    // Partition property on the set.
    for f in 0..n {
        if w.open_set().contains_flat(f) && (denom[f] - 0.0).abs() < f64::EPSILON {
            return Err(Error::Contract("a set cell is not covered by any bump".into()));
        }
    }
    let mut sums = vec![0f64; n];
    for entries in &bumps {
        for (f, v) in entries {
            sums[*f] += v;
        }
    }
    for f in 0..n {
        let want = if w.open_set().contains_flat(f) { 1.0 } else { 0.0 };
        if w.open_set().contains_flat(f) && (sums[f] - want).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "partition sums to {} at a set cell",
                sums[f]
            )));
        }
    }
    // Measured gradient constant: max over bumps and faces of
    // side * |psi(p) - psi(q)| / h.
    let mut constant = 0f64;
    let mut dense = vec![0f64; n];
    for (i, entries) in bumps.iter().enumerate() {
        let side = w.cubes[i].side(&grid);
        for (f, v) in entries {
            dense[*f] = *v;
        }
        let mut local = 0f64;
        for (f, _) in entries {
            let c = grid.cell_at(*f);
            for d in 0..grid.dim() {
                for s in [-1i64, 1] {
                    let mut p = [c.0[0] as i64, c.0[1] as i64, c.0[2] as i64];
                    p[d] += s;
                    if grid.holds_signed(&p) {
                        let g = grid.flat(Cell([p[0] as usize, p[1] as usize, p[2] as usize]));
                        local = local.max((dense[*f] - dense[g]).abs() / h);
                    }
                }
            }
        }
        for (f, _) in entries {
            dense[*f] = 0.0;
        }
        constant = constant.max(side * local);
        if side * local > GRADIENT_CAP {
            return Err(Error::Contract(format!(
                "bump {i} has side * gradient = {}, above the cap {GRADIENT_CAP}",
                side * local
            )));
        }
    }
    Ok(PartitionOfUnity {
        decomposition: w,
        bumps,
        gradient_bound_constant: constant,
    })
}

/// The smoothing operator for a fixed open set: replaces a function inside
/// the set by the blend of its cube means, and leaves it untouched outside.
#[derive(Debug, Clone)]
pub struct SmoothingOperator {
    pub partition: PartitionOfUnity,
}

impl SmoothingOperator {
    pub fn new(a: &CellSet) -> Result<SmoothingOperator> {
        let w = whitney_decompose(a)?;
        Ok(SmoothingOperator { partition: partition_of_unity(w)? })
    }

    /// Apply to a function on the same grid.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let w = &self.partition.decomposition;
        let grid = w.grid();
        if u.grid() != grid {
            return Err(Error::GridMismatch { context: "smoothing".into() });
        }
        // Cube means.
        let mut means = vec![0f64; w.cubes.len()];
        for (i, q) in w.cubes.iter().enumerate() {
            let mut s = 0.0;
            for c in q.cells(grid) {
                s += u.get(c);
            }
            means[i] = s / q.size_cells.pow(grid.dim() as u32) as f64;
        }
        let mut out = u.clone();
        let mut acc = vec![0f64; grid.cell_count()];
        let mut lo = vec![f64::INFINITY; grid.cell_count()];
        let mut hi = vec![f64::NEG_INFINITY; grid.cell_count()];
        for (i, entries) in self.partition.bumps.iter().enumerate() {
            for (f, v) in entries {
                acc[*f] += means[i] * v;
                if *v > 0.0 {
                    lo[*f] = lo[*f].min(means[i]);
                    hi[*f] = hi[*f].max(means[i]);
                }
            }
        }
        for f in 0..grid.cell_count() {
            if w.open_set().contains_flat(f) {
                // The blend is a convex combination of the contributing
                // means; clamping removes only rounding error and makes the
                // range bound exact.
                out.set_flat(f, acc[f].clamp(lo[f], hi[f]));
            }
        }
        Ok(out)
    }
}

/// Smooth `u` inside `a`, leaving it unchanged on the rest of `b` (and of
/// the grid). `a` must be contained in `b`.
pub fn smooth_bv(u: &GridFunction, b: &CellSet, a: &CellSet) -> Result<GridFunction> {
    if u.grid() != b.grid() || b.grid() != a.grid() {
        return Err(Error::GridMismatch { context: "smoothing".into() });
    }
    if !a.is_subset_of(b) {
        return Err(Error::Contract("the smoothing set must lie inside the ambient set".into()));
    }
    SmoothingOperator::new(a)?.apply(u)
}

/// Total variation of `v` in collars of the given widths around a boundary
/// cell set. Widths must be non-increasing and at least two cells; the
/// collar of width `w` is every cell within distance `w` of a boundary cell
/// center, and variation is counted on faces with both cells in the collar.
pub fn collar_variation_profile(
    v: &GridFunction,
    boundary: &CellSet,
    widths: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let grid = v.grid();
    if boundary.grid() != grid {
        return Err(Error::GridMismatch { context: "collar profile".into() });
    }
    if boundary.is_empty() {
        return Err(Error::InvalidInput("collar profile needs boundary cells".into()));
    }
    if widths.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("collar widths must be non-increasing".into()));
    }
    let h = grid.spacing();
    for w in widths {
        if *w < 2.0 * h {
            return Err(Error::Scale(format!(
                "collar width {w} is below two cells ({})",
                2.0 * h
            )));
        }
    }
    let df = distance_to(boundary);
    let mut out = Vec::with_capacity(widths.len());
    for w in widths {
        let collar = CellSet::from_fn(grid, |c| df.world(c) <= *w);
        out.push((*w, tv_value(v, Region::Set(&collar))?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{build, GalleryKind};
    use crate::measure::perimeter;

    fn block(grid: &Grid, x0: usize, y0: usize, s: usize) -> CellSet {
        CellSet::from_fn(grid, |c| {
            (x0..x0 + s).contains(&c.0[0]) && (y0..y0 + s).contains(&c.0[1])
        })
    }

    #[test]
    fn degenerate_sets_are_rejected() {
        let g = Grid::unit_square(5);
        assert!(whitney_decompose(&CellSet::empty(&g)).is_err());
        assert!(whitney_decompose(&CellSet::full(&g)).is_err());
    }

    #[test]
    fn square_block_structure() {
        let g = Grid::unit_square(6);
        let a = block(&g, 16, 16, 32);
        let w = whitney_decompose(&a).unwrap();
        w.verify().unwrap();
        // Four central cubes of an eighth of the box; everything else smaller.
        let biggest = w.cubes.iter().map(|q| q.size_cells).max().unwrap();
        assert_eq!(biggest, 8);
        let count = w.cubes.iter().filter(|q| q.size_cells == 8).count();
        assert_eq!(count, 4);
        // Floor cubes are exactly the cells whose vertex ring leaves the set.
        let floor: Vec<Cell> = w
            .cubes
            .iter()
            .filter(|q| q.at_resolution_floor)
            .map(|q| q.corner)
            .collect();
        let ring = a.inner_boundary(Adjacency::Vertex);
        assert_eq!(floor.len(), ring.count());
        assert!(floor.iter().all(|c| ring.contains(*c)));
    }

    #[test]
    fn disjoint_blocks_decompose_independently() {
        let g = Grid::unit_square(6);
        let left = block(&g, 8, 24, 8);
        let right = block(&g, 48, 24, 8);
        let both = left.union(&right).unwrap();
        let wl = whitney_decompose(&left).unwrap();
        let wr = whitney_decompose(&right).unwrap();
        let wb = whitney_decompose(&both).unwrap();
        let mut separate: Vec<(Cell, usize)> = wl
            .cubes
            .iter()
            .chain(wr.cubes.iter())
            .map(|q| (q.corner, q.size_cells))
            .collect();
        let mut joint: Vec<(Cell, usize)> =
            wb.cubes.iter().map(|q| (q.corner, q.size_cells)).collect();
        separate.sort();
        joint.sort();
        assert_eq!(separate, joint);
    }

    #[test]
    fn frame_counts_as_boundary() {
        let g = Grid::unit_square(5);
        // Set flush against the west frame: cubes there must stay small even
        // though no boundary cell exists beyond the frame.
        let a = CellSet::from_fn(&g, |c| c.0[0] < 16);
        let w = whitney_decompose(&a).unwrap();
        w.verify().unwrap();
        for q in &w.cubes {
            if q.corner.0[0] == 0 {
                assert_eq!(q.size_cells, 1, "frame-flush cube of size {}", q.size_cells);
            }
        }
    }

    #[test]
    fn gallery_domains_decompose_and_verify() {
        for kind in [GalleryKind::Disk, GalleryKind::Comb42] {
            let dom = build(kind, 7).unwrap();
            let w = whitney_decompose(&dom.omega).unwrap();
            w.verify().unwrap();
            assert!(w.floor_fraction() < 0.5);
        }
    }

    #[test]
    fn json_dump_is_dyadically_indexed() {
        let g = Grid::unit_square(5);
        let a = block(&g, 8, 8, 16);
        let w = whitney_decompose(&a).unwrap();
        let v = w.to_json();
        assert_eq!(v["cube_count"].as_u64().unwrap() as usize, w.cubes.len());
        for (q, jq) in w.cubes.iter().zip(v["cubes"].as_array().unwrap()) {
            let lvl = jq["level"].as_u64().unwrap() as u32;
            assert_eq!(q.side(&g), 2f64.powi(-(lvl as i32)));
        }
    }

    #[test]
    fn partition_sums_to_one_inside_only() {
        let g = Grid::unit_square(6);
        let a = block(&g, 16, 16, 32);
        let p = partition_of_unity(whitney_decompose(&a).unwrap()).unwrap();
        for c in [Cell::new2(32, 32), Cell::new2(17, 30), Cell::new2(16, 16)] {
            assert!((p.sum_at(c) - 1.0).abs() <= 1e-9);
        }
        for c in [Cell::new2(0, 0), Cell::new2(15, 32), Cell::new2(48, 16)] {
            assert_eq!(p.sum_at(c), 0.0);
        }
        assert!(p.gradient_bound_constant <= GRADIENT_CAP);
        assert!(p.gradient_bound_constant > 0.0);
    }

    #[test]
    fn bump_support_stays_close_to_its_cube() {
        let g = Grid::unit_square(6);
        let a = block(&g, 16, 16, 32);
        let p = partition_of_unity(whitney_decompose(&a).unwrap()).unwrap();
        let w = &p.decomposition;
        for (i, q) in w.cubes.iter().enumerate() {
            let radius = q.side(w.grid()) / 8.0;
            for (f, v) in p.support(i) {
                assert!(*v >= 0.0);
                let d = q.box_distance(w.grid(), &w.grid().center(w.grid().cell_at(*f)));
                assert!(d < radius || (d == 0.0 && radius == 0.0));
            }
        }
    }

    #[test]
    fn smoothing_is_exact_on_constants_and_linear() {
        let g = Grid::unit_square(6);
        let a = block(&g, 16, 16, 32);
        let b = CellSet::full(&g);
        let c = GridFunction::constant(&g, 3.25);
        let sc = smooth_bv(&c, &b, &a).unwrap();
        assert_eq!(sc, c);
        let u = GridFunction::from_world_fn(&g, |p| (7.0 * p[0]).sin());
        let v = GridFunction::from_world_fn(&g, |p| p[1] * p[1]);
        let op = SmoothingOperator::new(&a).unwrap();
        let lin = op
            .apply(&u.scale(2.0).add(&v.scale(-0.5)).unwrap())
            .unwrap();
        let parts = op
            .apply(&u)
            .unwrap()
            .scale(2.0)
            .add(&op.apply(&v).unwrap().scale(-0.5))
            .unwrap();
        for f in 0..g.cell_count() {
            assert!((lin.get_flat(f) - parts.get_flat(f)).abs() <= 1e-12);
        }
    }

    #[test]
    fn smoothing_respects_range_and_identity_outside() {
        let g = Grid::unit_square(6);
        let a = block(&g, 16, 16, 32);
        let b = CellSet::full(&g);
        let u = GridFunction::from_world_fn(&g, |p| {
            if (p[0] * 8.0) as usize % 2 == 0 { 1.0 } else { -1.0 }
        });
        let s = smooth_bv(&u, &b, &a).unwrap();
        let (lo, hi) = u.min_max(Region::Set(&a)).unwrap();
        for c in g.iter_cells() {
            if a.contains(c) {
                assert!(s.get(c) >= lo - 1e-12 && s.get(c) <= hi + 1e-12);
            } else {
                assert_eq!(s.get(c), u.get(c));
            }
        }
    }

    #[test]
    fn smoothing_requires_nested_sets() {
        let g = Grid::unit_square(5);
        let a = block(&g, 0, 0, 16);
        let b = block(&g, 8, 8, 16);
        let u = GridFunction::constant(&g, 0.0);
        assert!(matches!(
            smooth_bv(&u, &b, &a),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn collar_profile_zero_function_and_sharp_jump() {
        let g = Grid::unit_square(7);
        let a = block(&g, 32, 32, 64);
        let boundary = boundary_cells(&a);
        let widths = [0.25, 0.125, 0.0625];
        let zero = GridFunction::constant(&g, 0.0);
        let prof = collar_variation_profile(&zero, &boundary, &widths).unwrap();
        assert!(prof.iter().all(|(_, v)| *v == 0.0));
        // The indicator jumps exactly on the boundary: no decay.
        let chi = GridFunction::indicator(&a);
        let prof = collar_variation_profile(&chi, &boundary, &widths).unwrap();
        let p = perimeter(&a, Region::Whole).unwrap();
        for (_, v) in &prof {
            assert_eq!(*v, p);
        }
    }

    #[test]
    fn collar_profile_checks_widths() {
        let g = Grid::unit_square(5);
        let a = block(&g, 8, 8, 16);
        let boundary = boundary_cells(&a);
        let v = GridFunction::constant(&g, 0.0);
        assert!(collar_variation_profile(&v, &boundary, &[0.0625, 0.125]).is_err());
        assert!(matches!(
            collar_variation_profile(&v, &boundary, &[0.03125]),
            Err(Error::Scale(_))
        ));
    }

    #[test]
    fn smoothing_of_ramp_decays_in_narrow_collars() {
        let g = Grid::unit_square(7);
        let a = block(&g, 32, 32, 64);
        let b = CellSet::full(&g);
        let u = GridFunction::from_world_fn(&g, |p| p[0]);
        let s = smooth_bv(&u, &b, &a).unwrap();
        let v = s.sub(&u).unwrap();
        let prof =
            collar_variation_profile(&v, &boundary_cells(&a), &[0.25, 0.0625]).unwrap();
        assert!(prof[1].1 < prof[0].1);
        assert!(prof[1].1 < 0.5 * prof[0].1, "profile {prof:?}");
    }
}
