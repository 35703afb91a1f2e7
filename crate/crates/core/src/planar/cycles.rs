//! Boundary cycle tracing and the Jordan decomposition of a planar cell set.
//!
//! Every boundary face of a two-dimensional cell set `E` is walked exactly
//! once, oriented so that `E` lies on the left. Following outgoing faces at
//! each lattice vertex splits the boundary into closed polylines. At a pinch
//! vertex (two diagonal cells in `E`, the other two outside) the walk turns
//! right, which keeps the two `E` corners on one connected curve and treats
//! the complement as four-connected; the polyline touches such a vertex twice
//! without crossing itself. Counterclockwise cycles are positive (outer
//! contours), clockwise ones negative (holes). The enclosed cells of each
//! cycle come from an exact winding sweep of its vertical edges, so
//! containment, nesting, and the region decomposition are all integer
//! computations with no tolerance anywhere.

use crate::error::{Error, Result};
use crate::grid::{Cell, CellSet};
use crate::measure::perimeter;
use crate::grid::Region;

/// Headings for boundary walks: east, north, west, south.
const STEPS: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

/// One closed boundary contour of a cell set.
#[derive(Debug, Clone)]
pub struct BoundaryCycle {
    /// Lattice vertices of the closed polyline; the first vertex is repeated
    /// at the end. Coordinates are cell-grid vertex indices.
    pub vertices: Vec<[usize; 2]>,
    /// True for counterclockwise (outer) contours, false for holes.
    pub positive: bool,
    /// Polyline length in world units: one grid spacing per face.
    pub length: f64,
    /// Depth in the nesting forest; outermost cycles have depth zero.
    pub depth: usize,
    /// Boundary faces in walk order as (inside cell, outside cell).
    faces: Vec<(Cell, Cell)>,
    /// Cells enclosed by the polyline (nonzero winding number).
    interior: CellSet,
}

impl BoundaryCycle {
    /// Number of unit faces on the cycle.
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Boundary faces in walk order, each as (inside cell, outside cell).
    pub fn faces(&self) -> &[(Cell, Cell)] {
        &self.faces
    }

    /// Cells enclosed by the polyline.
    pub fn interior(&self) -> &CellSet {
        &self.interior
    }
}

/// A cell set split into signed boundary cycles and the regions they bound.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub set: CellSet,
    /// Counterclockwise contours, in boundary scan order.
    pub plus_cycles: Vec<BoundaryCycle>,
    /// Clockwise hole contours, in boundary scan order.
    pub minus_cycles: Vec<BoundaryCycle>,
    /// Nesting forest over all cycles. Ids enumerate `plus_cycles` first,
    /// then `minus_cycles`; the parent is the smallest cycle whose enclosed
    /// region strictly contains the child's, `None` for outermost cycles.
    pub parents: Vec<Option<usize>>,
    /// One region per plus cycle: its enclosed cells minus the enclosed
    /// cells of its direct hole children. Disjoint, with union equal to
    /// `set` exactly.
    pub parts: Vec<CellSet>,
}

impl JordanDecomposition {
    pub fn cycle_count(&self) -> usize {
        self.plus_cycles.len() + self.minus_cycles.len()
    }

    /// Cycle by forest id (plus cycles first, then minus).
    pub fn cycle(&self, id: usize) -> &BoundaryCycle {
        let p = self.plus_cycles.len();
        if id < p {
            &self.plus_cycles[id]
        } else {
            &self.minus_cycles[id - p]
        }
    }

    /// Consistency proof for the decomposition, run at construction:
    /// same-sign enclosures are disjoint or nested and every hole lies in
    /// some outer contour; the cycle lengths sum to the perimeter exactly;
    /// parent and child signs alternate; region parts are disjoint with
    /// union equal to the set.
    pub fn verify(&self) -> Result<()> {
        let k = self.cycle_count();
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (self.cycle(i), self.cycle(j));
                if a.positive != b.positive {
                    continue;
                }
                let inter = a.interior.intersection(&b.interior)?;
                let nested = inter.is_empty()
                    || a.interior.is_subset_of(&b.interior)
                    || b.interior.is_subset_of(&a.interior);
                if !nested {
                    return Err(Error::Contract(format!(
                        "same-sign cycles {i} and {j} overlap without nesting"
                    )));
                }
            }
        }
        for (m, cyc) in self.minus_cycles.iter().enumerate() {
            let covered =
                self.plus_cycles.iter().any(|pc| cyc.interior.is_subset_of(&pc.interior));
            if !covered {
                return Err(Error::Contract(format!("hole cycle {m} lies in no outer contour")));
            }
        }

        let h = self.set.grid().spacing();
        let total_faces: usize = (0..k).map(|i| self.cycle(i).face_count()).sum();
        let measured = perimeter(&self.set, Region::Whole)?;
        if total_faces as f64 * h != measured {
            return Err(Error::Contract(format!(
                "cycle lengths sum to {} but the perimeter is {measured}",
                total_faces as f64 * h
            )));
        }

        for (id, parent) in self.parents.iter().enumerate() {
            if let Some(pid) = parent {
                if self.cycle(id).positive == self.cycle(*pid).positive {
                    return Err(Error::Contract(format!(
                        "cycle {id} and its parent {pid} carry the same sign"
                    )));
                }
            }
        }

        let mut union = CellSet::empty(self.set.grid());
        let mut covered = 0usize;
        for part in &self.parts {
            covered += part.count();
            union = union.union(part)?;
        }
        if covered != union.count() || union != self.set {
            return Err(Error::Contract(
                "region parts are not a disjoint cover of the set".into(),
            ));
        }
        Ok(())
    }
}

/// Raw traced contour before signs and nesting are assigned.
struct RawCycle {
    vertices: Vec<[usize; 2]>,
    faces: Vec<(Cell, Cell)>,
    /// Twice nothing: the plain shoelace sum of `x dy` over unit steps,
    /// positive for counterclockwise loops.
    shoelace: i64,
    /// Vertical steps as (column, row, direction) for the winding sweep.
    vertical: Vec<(usize, usize, i32)>,
}

fn in_set(e: &CellSet, x: i64, y: i64) -> bool {
    e.contains_signed(&[x, y, 0])
}

/// Outgoing walk headings at vertex `(vx, vy)`, one flag per direction.
/// A heading is present when the face it walks has a set cell on its left
/// and an outside cell on its right.
fn outgoing(e: &CellSet, vx: i64, vy: i64) -> [bool; 4] {
    let sw = in_set(e, vx - 1, vy - 1);
    let se = in_set(e, vx, vy - 1);
    let nw = in_set(e, vx - 1, vy);
    let ne = in_set(e, vx, vy);
    [ne && !se, nw && !ne, sw && !nw, se && !sw]
}

/// Inside and outside cells of the face walked from `(vx, vy)` heading `h`.
fn face_cells(vx: i64, vy: i64, h: usize) -> ([i64; 2], [i64; 2]) {
    match h {
        0 => ([vx, vy], [vx, vy - 1]),
        1 => ([vx - 1, vy], [vx, vy]),
        2 => ([vx - 1, vy - 1], [vx - 1, vy]),
        _ => ([vx, vy - 1], [vx - 1, vy - 1]),
    }
}

fn trace_from(
    e: &CellSet,
    visited: &mut [u8],
    vw: usize,
    start: ([i64; 2], usize),
) -> RawCycle {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vertical = Vec::new();
    let mut shoelace = 0i64;
    let ([mut vx, mut vy], mut h) = start;
    vertices.push([vx as usize, vy as usize]);
    loop {
        visited[vy as usize * vw + vx as usize] |= 1 << h;
        let (ins, out) = face_cells(vx, vy, h);
        faces.push((
            Cell::new2(ins[0] as usize, ins[1] as usize),
            Cell::new2(out[0] as usize, out[1] as usize),
        ));
        if h == 1 {
            shoelace += vx;
            vertical.push((vx as usize, vy as usize, 1));
        } else if h == 3 {
            shoelace -= vx;
            vertical.push((vx as usize, (vy - 1) as usize, -1));
        }
        vx += STEPS[h][0];
        vy += STEPS[h][1];
        vertices.push([vx as usize, vy as usize]);
        let outs = outgoing(e, vx, vy);
        let n_out = outs.iter().filter(|&&b| b).count();
        let next = match n_out {
            1 => outs.iter().position(|&b| b).expect("one outgoing heading"),
            2 => {
                // Pinch vertex: turn right to keep the set corners joined.
                let right = (h + 3) % 4;
                debug_assert!(outs[right]);
                right
            }
            _ => unreachable!("boundary vertex with {n_out} outgoing headings"),
        };
        if [vx, vy] == start.0 && next == start.1 {
            return RawCycle { vertices, faces, shoelace, vertical };
        }
        h = next;
    }
}

/// Cells with nonzero winding number with respect to the cycle, from a
/// per-row sweep of its vertical edges. Exact integer arithmetic.
fn enclosed_cells(grid: &crate::grid::Grid, raw: &RawCycle) -> CellSet {
    let nx = grid.cells_per_axis()[0];
    let mut rows: std::collections::BTreeMap<usize, Vec<(usize, i32)>> =
        std::collections::BTreeMap::new();
    for &(col, row, dir) in &raw.vertical {
        rows.entry(row).or_default().push((col, dir));
    }
    let mut out = CellSet::empty(grid);
    for (row, mut edges) in rows {
        edges.sort_unstable();
        let mut winding = 0i32;
        let mut prev_col = 0usize;
        for (col, dir) in edges {
            if winding != 0 {
                for ix in prev_col..col.min(nx) {
                    out.insert(Cell::new2(ix, row));
                }
            }
            winding += dir;
            prev_col = col;
        }
        // The walk is closed, so winding returns to zero past the last edge.
        debug_assert_eq!(winding, 0);
    }
    out
}

/// Split a planar cell set into signed boundary cycles, their nesting
/// forest, and the disjoint regions they bound.
///
/// The set must be two-dimensional and stay off the grid frame so that
/// every boundary face has both flanking cells on the grid. Empty sets
/// decompose into nothing.
pub fn jordan_decompose(e: &CellSet) -> Result<JordanDecomposition> {
    let grid = e.grid().clone();
    if grid.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "jordan decomposition needs a planar grid, got dimension {}",
            grid.dim()
        )));
    }
    if e.touches_frame() {
        return Err(Error::InvalidInput(
            "jordan decomposition needs the set to stay off the grid frame".into(),
        ));
    }

    let nx = grid.cells_per_axis()[0];
    let ny = grid.cells_per_axis()[1];
    let vw = nx + 1;
    let mut visited = vec![0u8; vw * (ny + 1)];

    // Start a walk at every untraced boundary face, in cell scan order for
    // determinism. Each face yields one directed start edge.
    let mut raws = Vec::new();
    for c in e.cells() {
        let (ix, iy) = (c.0[0] as i64, c.0[1] as i64);
        let starts = [
            (!in_set(e, ix, iy - 1), ([ix, iy], 0usize)),
            (!in_set(e, ix - 1, iy), ([ix, iy + 1], 3)),
            (!in_set(e, ix, iy + 1), ([ix + 1, iy + 1], 2)),
            (!in_set(e, ix + 1, iy), ([ix + 1, iy], 1)),
        ];
        for (open, (v, h)) in starts {
            if open && visited[v[1] as usize * vw + v[0] as usize] & (1 << h) == 0 {
                raws.push(trace_from(e, &mut visited, vw, (v, h)));
            }
        }
    }

    let mut cycles: Vec<BoundaryCycle> = raws
        .into_iter()
        .map(|raw| {
            debug_assert_ne!(raw.shoelace, 0, "closed walks enclose nonzero area");
            let interior = enclosed_cells(&grid, &raw);
            BoundaryCycle {
                positive: raw.shoelace > 0,
                length: raw.faces.len() as f64 * grid.spacing(),
                depth: 0,
                vertices: raw.vertices,
                faces: raw.faces,
                interior,
            }
        })
        .collect();

    // Reorder so plus cycles come first; ids refer to this order.
    cycles.sort_by_key(|c| !c.positive as u8);
    let areas: Vec<usize> = cycles.iter().map(|c| c.interior.count()).collect();

    // Parent: smallest strictly containing enclosure of either sign.
    let k = cycles.len();
    let mut parents: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let mut best: Option<usize> = None;
        for j in 0..k {
            if i == j || areas[j] <= areas[i] {
                continue;
            }
            if cycles[i].interior.is_subset_of(&cycles[j].interior)
                && best.map_or(true, |b| areas[j] < areas[b])
            {
                best = Some(j);
            }
        }
        parents[i] = best;
    }
    for i in 0..k {
        let mut depth = 0;
        let mut at = i;
        while let Some(p) = parents[at] {
            depth += 1;
            at = p;
        }
        cycles[i].depth = depth;
    }

    let n_plus = cycles.iter().filter(|c| c.positive).count();
    let mut parts = Vec::with_capacity(n_plus);
    for j in 0..n_plus {
        let mut part = cycles[j].interior.clone();
        for i in n_plus..k {
            if parents[i] == Some(j) {
                part = part.difference(&cycles[i].interior)?;
            }
        }
        parts.push(part);
    }

    let dec = JordanDecomposition {
        set: e.clone(),
        minus_cycles: cycles.split_off(n_plus),
        plus_cycles: cycles,
        parents,
        parts,
    };
    dec.verify()?;
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn block(grid: &Grid, x0: usize, x1: usize, y0: usize, y1: usize) -> CellSet {
        CellSet::from_fn(grid, |c| c.0[0] >= x0 && c.0[0] < x1 && c.0[1] >= y0 && c.0[1] < y1)
    }

    #[test]
    fn square_has_one_positive_cycle_of_matching_length() {
        let g = Grid::unit_square(4);
        let e = block(&g, 4, 10, 5, 11);
        let dec = jordan_decompose(&e).unwrap();
        assert_eq!(dec.plus_cycles.len(), 1);
        assert!(dec.minus_cycles.is_empty());
        let c = &dec.plus_cycles[0];
        assert!(c.positive);
        assert_eq!(c.face_count(), 24);
        assert_eq!(c.length, 24.0 * g.spacing());
        assert_eq!(c.depth, 0);
        assert_eq!(c.vertices.first(), c.vertices.last());
        assert_eq!(c.interior(), &e);
        assert_eq!(dec.parts.len(), 1);
        assert_eq!(&dec.parts[0], &e);
    }

    #[test]
    fn annulus_splits_into_outer_plus_and_inner_minus() {
        // 16 x 16 grid, outer 10-cell square ring with a 4-cell hole.
        let g = Grid::square(4, 16).unwrap();
        let outer = block(&g, 3, 13, 3, 13);
        let hole = block(&g, 6, 10, 6, 10);
        let e = outer.difference(&hole).unwrap();
        let dec = jordan_decompose(&e).unwrap();
        assert_eq!(dec.plus_cycles.len(), 1);
        assert_eq!(dec.minus_cycles.len(), 1);
        let h = g.spacing();
        assert_eq!(dec.plus_cycles[0].length, 40.0 * h);
        assert_eq!(dec.minus_cycles[0].length, 16.0 * h);
        // Hand count: the perimeter splits as 40 outer + 16 inner faces.
        assert_eq!(
            dec.plus_cycles[0].length + dec.minus_cycles[0].length,
            perimeter(&e, Region::Whole).unwrap()
        );
        assert_eq!(dec.minus_cycles[0].depth, 1);
        assert_eq!(dec.parents[1], Some(0));
        assert_eq!(&dec.parts[0], &e);
    }

    #[test]
    fn two_separate_squares_decompose_additively() {
        let g = Grid::square(5, 32).unwrap();
        let a = block(&g, 2, 8, 2, 8);
        let b = block(&g, 12, 20, 14, 24);
        let e = a.union(&b).unwrap();
        let dec = jordan_decompose(&e).unwrap();
        assert_eq!(dec.plus_cycles.len(), 2);
        assert!(dec.minus_cycles.is_empty());
        let total: f64 = dec.plus_cycles.iter().map(|c| c.length).sum();
        let sep: f64 = perimeter(&a, Region::Whole).unwrap() + perimeter(&b, Region::Whole).unwrap();
        assert_eq!(total, sep);
        assert!(dec.parents.iter().all(|p| p.is_none()));
    }

    #[test]
    fn pinched_diagonal_pair_traces_one_touching_cycle() {
        let g = Grid::square(3, 8).unwrap();
        let mut e = CellSet::empty(&g);
        e.insert(Cell::new2(3, 3));
        e.insert(Cell::new2(4, 4));
        let dec = jordan_decompose(&e).unwrap();
        // The set corners join across the pinch: one cycle of eight faces
        // whose polyline passes the shared vertex twice.
        assert_eq!(dec.plus_cycles.len(), 1);
        assert!(dec.minus_cycles.is_empty());
        let c = &dec.plus_cycles[0];
        assert_eq!(c.face_count(), 8);
        assert_eq!(c.interior().count(), 2);
        let hits =
            c.vertices.iter().rev().skip(1).filter(|v| **v == [4, 4]).count();
        assert_eq!(hits, 2);
    }

    #[test]
    fn flush_inner_square_leaves_an_l_shaped_hole() {
        // A ring whose hole holds a square flush against two hole walls:
        // set and square fuse, and the one minus cycle encloses exactly
        // the L-shaped gap that remains.
        let g = Grid::square(5, 32).unwrap();
        let ring = block(&g, 4, 16, 4, 16).difference(&block(&g, 7, 13, 7, 13)).unwrap();
        let inner = block(&g, 7, 12, 7, 12);
        let e = ring.union(&inner).unwrap();
        let dec = jordan_decompose(&e).unwrap();
        assert_eq!(dec.plus_cycles.len(), 1);
        assert_eq!(dec.minus_cycles.len(), 1);
        assert_eq!(dec.minus_cycles[0].interior().count(), 36 - 25);
        let union = dec.parts.iter().fold(CellSet::empty(&g), |acc, p| acc.union(p).unwrap());
        assert_eq!(union, e);
    }

    #[test]
    fn deep_nesting_alternates_signs_and_depths() {
        // Square in a hole in a square: depths 0, 1, 2.
        let g = Grid::square(6, 64).unwrap();
        let outer = block(&g, 4, 28, 4, 28);
        let hole = block(&g, 8, 24, 8, 24);
        let inner = block(&g, 12, 20, 12, 20);
        let e = outer.difference(&hole).unwrap().union(&inner).unwrap();
        let dec = jordan_decompose(&e).unwrap();
        assert_eq!(dec.plus_cycles.len(), 2);
        assert_eq!(dec.minus_cycles.len(), 1);
        let depths: Vec<usize> =
            (0..dec.cycle_count()).map(|i| dec.cycle(i).depth).collect();
        let mut sorted = depths.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
        let union = dec.parts.iter().fold(CellSet::empty(&g), |acc, p| acc.union(p).unwrap());
        assert_eq!(union, e);
        let overlap: usize = dec.parts[0].intersection(&dec.parts[1]).unwrap().count();
        assert_eq!(overlap, 0);
    }

    #[test]
    fn empty_set_decomposes_into_nothing() {
        let g = Grid::unit_square(3);
        let dec = jordan_decompose(&CellSet::empty(&g)).unwrap();
        assert_eq!(dec.cycle_count(), 0);
        assert!(dec.parts.is_empty());
    }

    #[test]
    fn frame_touching_set_is_rejected() {
        let g = Grid::unit_square(3);
        let mut e = CellSet::empty(&g);
        e.insert(Cell::new2(0, 3));
        assert!(matches!(jordan_decompose(&e), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn three_dimensional_grid_is_rejected() {
        let g = Grid::unit_cube(3);
        let e = CellSet::empty(&g);
        assert!(matches!(jordan_decompose(&e), Err(Error::InvalidInput(_))));
    }
}
