//! Shortest cell paths inside a region, with and without boundary contact.
//!
//! Paths step between vertex neighbors; axis steps cost one grid spacing
//! and diagonal steps `sqrt(2)` (in three dimensions also `sqrt(3)`) times
//! that, so a path length is never shorter than the straight distance
//! between its endpoint centers and exceeds it by at most the lattice
//! distortion factor `2 sqrt(2) / (1 + sqrt(2))` of this metric. The ratio
//! of path length to endpoint distance is reported directly, which is what
//! makes quasiconvexity of a region a measurable quantity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::{Adjacency, Cell, CellSet};

/// A polyline of cell centers joining two cells inside a region.
#[derive(Debug, Clone)]
pub struct GridPath {
    /// Cells in walk order, endpoints included; consecutive cells are
    /// vertex neighbors. A single entry means the endpoints coincide.
    pub cells: Vec<Cell>,
    /// Euclidean length of the center polyline in world units.
    pub length: f64,
    /// Length divided by the straight endpoint distance; `1.0` for
    /// coinciding endpoints.
    pub ratio: f64,
    /// Whether every cell strictly between the endpoints lies in the open
    /// interior of the region the path was routed in.
    pub interior_only: bool,
    /// Set when the grid is too coarse to honor the interior request: the
    /// path either leaves the open interior or overshoots the allowed
    /// length, and is the best one available at this resolution.
    pub resolution_limited: bool,
}

impl GridPath {
    pub fn z(&self) -> Cell {
        self.cells[0]
    }

    pub fn w(&self) -> Cell {
        *self.cells.last().expect("paths hold at least one cell")
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    flat: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost; ties broken by flat index for determinism.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.flat.cmp(&self.flat))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path from `z` to `w` through `allowed`, vertex adjacency,
/// Euclidean step costs. Returns the cells in order and the length in
/// world units, or `None` when `w` is unreachable.
pub(crate) fn shortest_path(allowed: &CellSet, z: Cell, w: Cell) -> Option<(Vec<Cell>, f64)> {
    let grid = allowed.grid();
    if z == w {
        return Some((vec![z], 0.0));
    }
    let offsets = grid.neighbor_offsets(Adjacency::Vertex);
    let norms: Vec<f64> = offsets
        .iter()
        .map(|o| ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt())
        .collect();
    let n = grid.cell_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let start = grid.flat(z);
    let goal = grid.flat(w);
    dist[start] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { cost: 0.0, flat: start });
    while let Some(HeapEntry { cost, flat }) = heap.pop() {
        if done[flat] {
            continue;
        }
        done[flat] = true;
        if flat == goal {
            break;
        }
        let cell = grid.cell_at(flat);
        for (o, norm) in offsets.iter().zip(&norms) {
            let p = [
                cell.0[0] as i64 + o[0],
                cell.0[1] as i64 + o[1],
                cell.0[2] as i64 + o[2],
            ];
            if !allowed.contains_signed(&p) {
                continue;
            }
            let nb = grid.flat(Cell([p[0] as usize, p[1] as usize, p[2] as usize]));
            let next = cost + norm;
            if next < dist[nb] {
                dist[nb] = next;
                prev[nb] = flat;
                heap.push(HeapEntry { cost: next, flat: nb });
            }
        }
    }
    if !done[goal] {
        return None;
    }
    let mut cells = vec![w];
    let mut at = goal;
    while at != start {
        at = prev[at];
        cells.push(grid.cell_at(at));
    }
    cells.reverse();
    Some((cells, dist[goal] * grid.spacing()))
}

fn center_distance(a: Cell, b: Cell) -> f64 {
    let grid_free: f64 = (0..3)
        .map(|d| {
            let diff = a.0[d] as f64 - b.0[d] as f64;
            diff * diff
        })
        .sum();
    grid_free.sqrt()
}

fn check_endpoints(region: &CellSet, z: Cell, w: Cell) -> Result<()> {
    for (name, c) in [("z", z), ("w", w)] {
        if !region.grid().holds(c) || !region.contains(c) {
            return Err(Error::InvalidInput(format!(
                "path endpoint {name} = {c:?} lies outside the region"
            )));
        }
    }
    Ok(())
}

/// Shortest path between two cells of a closed region (a component together
/// with its boundary cells), and the quasiconvexity ratio it witnesses.
///
/// Errors when an endpoint is outside the region or the endpoints lie in
/// different connected pieces of it.
pub fn quasiconvex_path(region: &CellSet, z: Cell, w: Cell) -> Result<GridPath> {
    check_endpoints(region, z, w)?;
    let (cells, length) = shortest_path(region, z, w).ok_or_else(|| {
        Error::Unreachable(format!(
            "no path from {z:?} to {w:?}: the cells lie in different pieces of the region"
        ))
    })?;
    let straight = center_distance(z, w) * region.grid().spacing();
    let ratio = if z == w { 1.0 } else { length / straight };
    let interior_only = interior_cells_only(region, &cells);
    Ok(GridPath { cells, length, ratio, interior_only, resolution_limited: false })
}

fn interior_cells_only(region: &CellSet, cells: &[Cell]) -> bool {
    if cells.len() <= 2 {
        return true;
    }
    let open = region.open_interior();
    cells[1..cells.len() - 1].iter().all(|c| open.contains(*c))
}

/// Shortest path from `z` to `w` that keeps every intermediate cell in the
/// open interior of the region, allowed to run over length by at most
/// `epsilon` compared to the unconstrained shortest path.
///
/// When the grid is too coarse, either because no interior route exists or
/// because the shortest one overshoots the budget, the result carries the
/// `resolution_limited` flag and the best path available instead of
/// failing: a finer grid, not a different request, is the remedy. `epsilon`
/// must be at least two grid spacings.
pub fn interior_path(region: &CellSet, z: Cell, w: Cell, epsilon: f64) -> Result<GridPath> {
    let h = region.grid().spacing();
    if epsilon < 2.0 * h {
        return Err(Error::Scale(format!(
            "interior path slack {epsilon} is below two grid spacings {}",
            2.0 * h
        )));
    }
    check_endpoints(region, z, w)?;
    let (closed_cells, closed_len) = shortest_path(region, z, w).ok_or_else(|| {
        Error::Unreachable(format!(
            "no path from {z:?} to {w:?}: the cells lie in different pieces of the region"
        ))
    })?;
    let straight = center_distance(z, w) * h;
    let ratio_of = |length: f64| if z == w { 1.0 } else { length / straight };

    let mut open = region.open_interior();
    open.insert(z);
    open.insert(w);
    match shortest_path(&open, z, w) {
        Some((cells, length)) => {
            let over_budget = length > closed_len + epsilon;
            Ok(GridPath {
                ratio: ratio_of(length),
                cells,
                length,
                interior_only: true,
                resolution_limited: over_budget,
            })
        }
        None => Ok(GridPath {
            ratio: ratio_of(closed_len),
            cells: closed_cells,
            length: closed_len,
            interior_only: false,
            resolution_limited: true,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn block(grid: &Grid, x0: usize, x1: usize, y0: usize, y1: usize) -> CellSet {
        CellSet::from_fn(grid, |c| c.0[0] >= x0 && c.0[0] < x1 && c.0[1] >= y0 && c.0[1] < y1)
    }

    #[test]
    fn straight_runs_have_unit_ratio() {
        let g = Grid::unit_square(5);
        let region = block(&g, 4, 28, 10, 13);
        let p = quasiconvex_path(&region, Cell::new2(4, 11), Cell::new2(27, 11)).unwrap();
        assert!(p.ratio <= 1.0 + 1e-9);
        assert_eq!(p.cells.len(), 24);
        assert_eq!(p.z(), Cell::new2(4, 11));
        assert_eq!(p.w(), Cell::new2(27, 11));
    }

    #[test]
    fn diagonal_runs_match_the_step_metric_exactly() {
        let g = Grid::unit_square(5);
        let region = block(&g, 2, 30, 2, 30);
        let p = quasiconvex_path(&region, Cell::new2(3, 3), Cell::new2(13, 13)).unwrap();
        assert!((p.length - 10.0 * std::f64::consts::SQRT_2 * g.spacing()).abs() < 1e-12);
        assert!((p.ratio - std::f64::consts::SQRT_2 / std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn l_shape_tip_to_tip_ratio_stays_below_two() {
        // Both arms of an L, corner at the origin end: breadth-first over
        // the step graph pins the optimum, the ratio just witnesses it.
        let g = Grid::square(6, 64).unwrap();
        let vertical = block(&g, 4, 10, 4, 40);
        let horizontal = block(&g, 4, 40, 4, 10);
        let region = vertical.union(&horizontal).unwrap();
        let p = quasiconvex_path(&region, Cell::new2(6, 39), Cell::new2(39, 6)).unwrap();
        assert!(p.ratio <= 2.0, "ratio {}", p.ratio);
        assert!(p.ratio > 1.2);
    }

    #[test]
    fn coinciding_endpoints_give_a_zero_length_path() {
        let g = Grid::unit_square(4);
        let region = block(&g, 2, 14, 2, 14);
        let z = Cell::new2(5, 5);
        let p = quasiconvex_path(&region, z, z).unwrap();
        assert_eq!(p.cells, vec![z]);
        assert_eq!(p.length, 0.0);
        assert_eq!(p.ratio, 1.0);
        let q = interior_path(&region, z, z, 4.0 * g.spacing()).unwrap();
        assert_eq!(q.length, 0.0);
        assert!(q.interior_only);
        assert!(!q.resolution_limited);
    }

    #[test]
    fn endpoints_in_different_pieces_are_unreachable() {
        let g = Grid::unit_square(4);
        let region = block(&g, 2, 5, 2, 5).union(&block(&g, 9, 13, 9, 13)).unwrap();
        let res = quasiconvex_path(&region, Cell::new2(3, 3), Cell::new2(10, 10));
        assert!(matches!(res, Err(Error::Unreachable(_))));
    }

    #[test]
    fn endpoint_outside_region_is_invalid() {
        let g = Grid::unit_square(4);
        let region = block(&g, 2, 5, 2, 5);
        let res = quasiconvex_path(&region, Cell::new2(3, 3), Cell::new2(12, 12));
        assert!(matches!(res, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn square_interior_diagonal_stays_within_the_distance_bound() {
        let g = Grid::unit_square(5);
        let region = block(&g, 4, 20, 4, 20);
        let z = Cell::new2(4, 4);
        let w = Cell::new2(19, 19);
        let h = g.spacing();
        let p = interior_path(&region, z, w, 4.0 * h).unwrap();
        assert!(p.interior_only);
        assert!(!p.resolution_limited);
        let straight = center_distance(z, w) * h;
        assert!(p.length <= std::f64::consts::SQRT_2 * straight + 4.0 * h);
    }

    #[test]
    fn width_one_corridor_has_no_interior_route() {
        let g = Grid::unit_square(5);
        let corridor = block(&g, 4, 28, 10, 11);
        let p = interior_path(&corridor, Cell::new2(4, 10), Cell::new2(27, 10), 2.0 * g.spacing())
            .unwrap();
        assert!(p.resolution_limited);
        assert!(!p.interior_only);
        assert_eq!(p.cells.len(), 24);
    }

    #[test]
    fn interior_detours_are_flagged_when_over_budget() {
        // A slab pierced by a wall with a one-cell slit: the closed path
        // slips through the slit, an interior path must round the wall top
        // through a three-cell passage left above it.
        let g = Grid::square(6, 64).unwrap();
        let mut region = block(&g, 4, 40, 4, 30);
        for y in 4..27 {
            if y != 5 {
                region.remove(Cell::new2(20, y));
            }
        }
        let z = Cell::new2(10, 5);
        let w = Cell::new2(30, 5);
        let p = interior_path(&region, z, w, 2.0 * g.spacing()).unwrap();
        assert!(p.interior_only);
        assert!(p.resolution_limited, "detour of length {} was not flagged", p.length);
    }

    #[test]
    fn undersized_slack_is_a_scale_error() {
        let g = Grid::unit_square(4);
        let region = block(&g, 2, 14, 2, 14);
        let res = interior_path(&region, Cell::new2(3, 3), Cell::new2(5, 5), g.spacing());
        assert!(matches!(res, Err(Error::Scale(_))));
    }
}
