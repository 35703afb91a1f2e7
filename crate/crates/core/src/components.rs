//! Connected components and flood fills over cell sets.

use crate::error::{Error, Result};
use crate::grid::{Adjacency, Cell, CellSet, Grid};

/// A labeling of a cell set into connected components, largest first.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    pub adjacency: Adjacency,
    /// Components in decreasing cell count; ties broken by smallest flat index.
    pub components: Vec<CellSet>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Index of the component holding the cell, if any.
    pub fn component_of(&self, c: Cell) -> Option<usize> {
        self.components.iter().position(|s| s.contains(c))
    }
}

/// Flood from `seed` through cells of `set`, using the given adjacency.
/// The seed must belong to the set.
pub fn flood_fill(set: &CellSet, seed: Cell, adj: Adjacency) -> Result<CellSet> {
    if !set.contains(seed) {
        return Err(Error::InvalidInput(format!("flood seed {seed:?} is outside the set")));
    }
    let grid = set.grid();
    let offs = grid.neighbor_offsets(adj);
    let mut out = CellSet::empty(grid);
    let mut stack = vec![seed];
    out.insert(seed);
    while let Some(c) = stack.pop() {
        for o in &offs {
            let p = [
                c.0[0] as i64 + o[0],
                c.0[1] as i64 + o[1],
                c.0[2] as i64 + o[2],
            ];
            if set.contains_signed(&p) {
                let q = Cell([p[0] as usize, p[1] as usize, p[2] as usize]);
                if !out.contains(q) {
                    out.insert(q);
                    stack.push(q);
                }
            }
        }
    }
    Ok(out)
}

/// Decompose a set into connected components, sorted by decreasing size.
pub fn components(set: &CellSet, adj: Adjacency) -> ComponentLabeling {
    let grid = set.grid();
    let mut seen = CellSet::empty(grid);
    let mut comps: Vec<(usize, usize, CellSet)> = Vec::new();
    for (flat, cell) in grid.iter_cells().enumerate() {
        if set.contains_flat(flat) && !seen.contains_flat(flat) {
            let comp = flood_fill(set, cell, adj).expect("seed is in the set");
            seen = seen.union(&comp).expect("same grid");
            comps.push((comp.count(), flat, comp));
        }
    }
    // Scan order guarantees `flat` is each component's smallest flat index.
    comps.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ComponentLabeling { adjacency: adj, components: comps.into_iter().map(|t| t.2).collect() }
}

/// One face-connected component of the complement of the closure of a set.
#[derive(Debug, Clone)]
pub struct ComplementComponent {
    pub cells: CellSet,
    /// Whether the component touches the grid frame. On a grid that engulfs
    /// the set this marks the unbounded outside; the rest are holes.
    pub unbounded: bool,
}

/// Components of the complement of the discrete closure of `set`, largest
/// first. Face adjacency keeps diagonal-touching holes separate.
pub fn complement_components(set: &CellSet) -> Vec<ComplementComponent> {
    let comp = set.closure().complement();
    components(&comp, Adjacency::Face)
        .components
        .into_iter()
        .map(|cells| {
            let unbounded = cells.touches_frame();
            ComplementComponent { cells, unbounded }
        })
        .collect()
}

/// True when the set is connected under the adjacency (empty sets count as
/// connected).
pub fn is_connected(set: &CellSet, adj: Adjacency) -> bool {
    if set.is_empty() {
        return true;
    }
    let seed = set.cells().next().expect("nonempty");
    flood_fill(set, seed, adj).expect("seed in set").count() == set.count()
}

/// Grid that engulfs a set drawn on `grid` with a margin of empty cells on
/// every side, so the outside of the set is frame-connected. Returns the new
/// grid and the translated copy of the set.
pub fn engulf(set: &CellSet, margin: usize) -> Result<(Grid, CellSet)> {
    let grid = set.grid();
    let dim = grid.dim();
    let mut cells = Vec::with_capacity(dim);
    for d in 0..dim {
        cells.push(grid.cells_per_axis()[d] + 2 * margin);
    }
    let cap = 1usize << grid.level();
    if cells.iter().any(|n| *n > cap) {
        return Err(Error::Resolution {
            feature: "margin around the grid".into(),
            needed: *cells.iter().max().unwrap(),
            available: cap,
        });
    }
    let h = grid.spacing();
    let mut origin = Vec::with_capacity(dim);
    for d in 0..dim {
        origin.push(grid.origin()[d] - margin as f64 * h);
    }
    let big = Grid::new(dim, grid.level(), &cells, &origin)?;
    let mut moved = CellSet::empty(&big);
    for c in set.cells() {
        let mut p = [0usize; 3];
        for d in 0..dim {
            p[d] = c.0[d] + margin;
        }
        moved.insert(Cell(p));
    }
    Ok((big, moved))
}
