//! Dyadic grids, cell sets, and sampled functions.
//!
//! A grid at level `L` carves the unit box into cells of spacing `h = 2^-L`.
//! Cell sets are bit masks over the grid; functions are dense `f64` samples
//! at cell centers. All measure-type quantities downstream (perimeter, total
//! variation, volume) are derived from face and cell counts times the exact
//! dyadic weights `h^{n-1}` and `h^n`, so integer counts map to exact floats.

use crate::error::{Error, Result};

/// A cell index; axes beyond the grid dimension are fixed at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(pub [usize; 3]);

impl Cell {
    pub fn new2(x: usize, y: usize) -> Cell {
        Cell([x, y, 0])
    }

    pub fn new3(x: usize, y: usize, z: usize) -> Cell {
        Cell([x, y, z])
    }

    /// Offset by a signed step, returning `None` on underflow.
    fn offset(&self, d: &[i64; 3]) -> Option<[i64; 3]> {
        Some([
            self.0[0] as i64 + d[0],
            self.0[1] as i64 + d[1],
            self.0[2] as i64 + d[2],
        ])
    }
}

/// Neighborhood notion used by morphology and connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    /// Face neighbors only (4 in 2D, 6 in 3D).
    Face,
    /// Face and vertex neighbors (8 in 2D, 26 in 3D).
    Vertex,
}

/// A finite dyadic grid: `dim` axes, spacing `2^-level`, at most `2^level`
/// cells per axis, anchored at `origin` in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    level: u32,
    cells: [usize; 3],
    origin: [f64; 3],
}

impl Grid {
    pub fn new(dim: usize, level: u32, cells_per_axis: &[usize], origin: &[f64]) -> Result<Grid> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        if level < 1 {
            return Err(Error::InvalidInput("grid level must be at least 1".into()));
        }
        if cells_per_axis.len() != dim || origin.len() != dim {
            return Err(Error::InvalidInput(format!(
                "expected {dim} axis sizes and origin coordinates"
            )));
        }
        let cap = 1usize << level;
        let mut cells = [1usize; 3];
        let mut org = [0f64; 3];
        for d in 0..dim {
            let n = cells_per_axis[d];
            if n == 0 {
                return Err(Error::InvalidInput(format!("axis {d} has zero cells")));
            }
            if n > cap {
                return Err(Error::InvalidInput(format!(
                    "axis {d} has {n} cells, exceeding 2^level = {cap}"
                )));
            }
            cells[d] = n;
            org[d] = origin[d];
        }
        Ok(Grid { dim, level, cells, origin: org })
    }

    /// Square 2D grid with `n` cells per axis at the given level, origin 0.
    pub fn square(level: u32, n: usize) -> Result<Grid> {
        Grid::new(2, level, &[n, n], &[0.0, 0.0])
    }

    /// Full 2D grid at the given level: `2^level` cells per axis.
    pub fn unit_square(level: u32) -> Grid {
        let n = 1usize << level;
        Grid::new(2, level, &[n, n], &[0.0, 0.0]).expect("valid by construction")
    }

    /// Full 3D grid at the given level: `2^level` cells per axis.
    pub fn unit_cube(level: u32) -> Grid {
        let n = 1usize << level;
        Grid::new(3, level, &[n, n, n], &[0.0, 0.0, 0.0]).expect("valid by construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cell spacing `h = 2^-level`, exact in binary floating point.
    pub fn spacing(&self) -> f64 {
        (self.level as i32).checked_neg().map(|e| 2f64.powi(e)).unwrap()
    }

    /// Face measure `h^(dim-1)`.
    pub fn face_area(&self) -> f64 {
        self.spacing().powi(self.dim as i32 - 1)
    }

    /// Cell measure `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    /// Flat index in scan order (x fastest, then y, then z).
    pub fn flat(&self, c: Cell) -> usize {
        debug_assert!(self.holds(c));
        c.0[0] + self.cells[0] * (c.0[1] + self.cells[1] * c.0[2])
    }

    pub fn cell_at(&self, flat: usize) -> Cell {
        let x = flat % self.cells[0];
        let rest = flat / self.cells[0];
        let y = rest % self.cells[1];
        let z = rest / self.cells[1];
        Cell([x, y, z])
    }

    pub fn holds(&self, c: Cell) -> bool {
        (0..3).all(|d| c.0[d] < self.cells[d])
    }

    pub fn holds_signed(&self, c: &[i64; 3]) -> bool {
        (0..3).all(|d| c[d] >= 0 && (c[d] as usize) < self.cells[d])
    }

    /// World coordinates of the cell center.
    pub fn center(&self, c: Cell) -> [f64; 3] {
        let h = self.spacing();
        let mut p = [0f64; 3];
        for d in 0..self.dim {
            p[d] = self.origin[d] + (c.0[d] as f64 + 0.5) * h;
        }
        p
    }

    /// The cell whose half-open box contains the world point, if any.
    pub fn locate(&self, p: &[f64]) -> Option<Cell> {
        let h = self.spacing();
        let mut c = [0usize; 3];
        for d in 0..self.dim {
            let t = (p[d] - self.origin[d]) / h;
            if t < 0.0 {
                return None;
            }
            let i = t.floor() as usize;
            if i >= self.cells[d] {
                return None;
            }
            c[d] = i;
        }
        Some(Cell(c))
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cell_count()).map(|f| self.cell_at(f))
    }

    /// Signed offsets of the neighborhood, excluding the origin.
    pub fn neighbor_offsets(&self, adj: Adjacency) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        match adj {
            Adjacency::Face => {
                for d in 0..self.dim {
                    for s in [-1i64, 1] {
                        let mut o = [0i64; 3];
                        o[d] = s;
                        out.push(o);
                    }
                }
            }
            Adjacency::Vertex => {
                let r = |d: usize| if d < self.dim { -1i64..=1 } else { 0..=0 };
                for dz in r(2) {
                    for dy in r(1) {
                        for dx in r(0) {
                            if dx != 0 || dy != 0 || dz != 0 {
                                out.push([dx, dy, dz]);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn expect_same(&self, other: &Grid, context: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch { context: context.to_string() });
        }
        Ok(())
    }
}

/// A set of grid cells, stored as a dense mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    grid: Grid,
    bits: Vec<bool>,
    count: usize,
}

impl CellSet {
    pub fn empty(grid: &Grid) -> CellSet {
        CellSet { grid: grid.clone(), bits: vec![false; grid.cell_count()], count: 0 }
    }

    pub fn full(grid: &Grid) -> CellSet {
        let n = grid.cell_count();
        CellSet { grid: grid.clone(), bits: vec![true; n], count: n }
    }

    /// Build from a predicate on cells.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(Cell) -> bool) -> CellSet {
        let mut s = CellSet::empty(grid);
        for (flat, cell) in grid.iter_cells().enumerate() {
            if f(cell) {
                s.bits[flat] = true;
                s.count += 1;
            }
        }
        s
    }

    /// Build from a predicate on world coordinates of cell centers.
    pub fn from_world_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> bool) -> CellSet {
        CellSet::from_fn(grid, |c| f(&grid.center(c)[..grid.dim()]))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.grid.holds(c) && self.bits[self.grid.flat(c)]
    }

    pub fn contains_flat(&self, flat: usize) -> bool {
        self.bits[flat]
    }

    /// Out-of-grid coordinates count as outside the set.
    pub fn contains_signed(&self, c: &[i64; 3]) -> bool {
        self.grid.holds_signed(c)
            && self.bits[self.grid.flat(Cell([c[0] as usize, c[1] as usize, c[2] as usize]))]
    }

    pub fn insert(&mut self, c: Cell) {
        let f = self.grid.flat(c);
        if !self.bits[f] {
            self.bits[f] = true;
            self.count += 1;
        }
    }

    pub fn insert_flat(&mut self, flat: usize) {
        if !self.bits[flat] {
            self.bits[flat] = true;
            self.count += 1;
        }
    }

    pub fn remove(&mut self, c: Cell) {
        let f = self.grid.flat(c);
        if self.bits[f] {
            self.bits[f] = false;
            self.count -= 1;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Lebesgue measure of the set: `count * h^dim`.
    pub fn volume(&self) -> f64 {
        self.count as f64 * self.grid.cell_volume()
    }

    /// Cells in scan order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(f, _)| self.grid.cell_at(f))
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.grid.expect_same(&other.grid, "union of cell sets")?;
        let mut out = self.clone();
        for (f, b) in other.bits.iter().enumerate() {
            if *b && !out.bits[f] {
                out.bits[f] = true;
                out.count += 1;
            }
        }
        Ok(out)
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.grid.expect_same(&other.grid, "intersection of cell sets")?;
        let mut out = CellSet::empty(&self.grid);
        for f in 0..self.bits.len() {
            if self.bits[f] && other.bits[f] {
                out.bits[f] = true;
                out.count += 1;
            }
        }
        Ok(out)
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.grid.expect_same(&other.grid, "difference of cell sets")?;
        let mut out = CellSet::empty(&self.grid);
        for f in 0..self.bits.len() {
            if self.bits[f] && !other.bits[f] {
                out.bits[f] = true;
                out.count += 1;
            }
        }
        Ok(out)
    }

    pub fn complement(&self) -> CellSet {
        let mut out = CellSet::empty(&self.grid);
        for f in 0..self.bits.len() {
            if !self.bits[f] {
                out.bits[f] = true;
                out.count += 1;
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.grid == other.grid
            && self
                .bits
                .iter()
                .zip(other.bits.iter())
                .all(|(a, b)| !*a || *b)
    }

    /// Cells of the set with a neighbor outside it.
    pub fn inner_boundary(&self, adj: Adjacency) -> CellSet {
        let offs = self.grid.neighbor_offsets(adj);
        CellSet::from_fn(&self.grid, |c| {
            self.contains(c)
                && offs.iter().any(|o| {
                    let p = c.offset(o).unwrap();
                    !self.contains_signed(&p)
                })
        })
    }

    /// Cells outside the set with a neighbor inside it.
    pub fn outer_boundary(&self, adj: Adjacency) -> CellSet {
        let offs = self.grid.neighbor_offsets(adj);
        CellSet::from_fn(&self.grid, |c| {
            !self.contains(c)
                && offs.iter().any(|o| {
                    let p = c.offset(o).unwrap();
                    self.contains_signed(&p)
                })
        })
    }

    /// Discrete closure: the set plus all face and vertex neighbors.
    pub fn closure(&self) -> CellSet {
        self.union(&self.outer_boundary(Adjacency::Vertex)).expect("same grid")
    }

    /// Discrete open interior: cells all of whose face and vertex neighbors
    /// lie in the set (out-of-grid neighbors count as outside).
    pub fn open_interior(&self) -> CellSet {
        let offs = self.grid.neighbor_offsets(Adjacency::Vertex);
        CellSet::from_fn(&self.grid, |c| {
            self.contains(c)
                && offs.iter().all(|o| {
                    let p = c.offset(o).unwrap();
                    self.contains_signed(&p)
                })
        })
    }

    /// Whether any cell lies on the grid frame (an extreme index on some axis).
    pub fn touches_frame(&self) -> bool {
        self.cells().any(|c| {
            (0..self.grid.dim()).any(|d| c.0[d] == 0 || c.0[d] + 1 == self.grid.cells_per_axis()[d])
        })
    }
}

/// Region of integration for measure-type operators.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    /// The whole grid: every interior face and every cell counts.
    Whole,
    /// A cell set, understood as an open region: a face counts only when both
    /// endpoint cells lie in the set, a cell only when it lies in the set.
    Set(&'a CellSet),
}

impl<'a> Region<'a> {
    pub fn admits_cell(&self, flat: usize) -> bool {
        match self {
            Region::Whole => true,
            Region::Set(s) => s.contains_flat(flat),
        }
    }

    pub fn admits_face(&self, flat_a: usize, flat_b: usize) -> bool {
        match self {
            Region::Whole => true,
            Region::Set(s) => s.contains_flat(flat_a) && s.contains_flat(flat_b),
        }
    }

    pub fn check_grid(&self, grid: &Grid, context: &str) -> Result<()> {
        if let Region::Set(s) = self {
            if s.grid() != grid {
                return Err(Error::GridMismatch { context: context.to_string() });
            }
        }
        Ok(())
    }
}

impl<'a> From<&'a CellSet> for Region<'a> {
    fn from(s: &'a CellSet) -> Region<'a> {
        Region::Set(s)
    }
}

/// A function sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn constant(grid: &Grid, v: f64) -> GridFunction {
        GridFunction { grid: grid.clone(), values: vec![v; grid.cell_count()] }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(Cell) -> f64) -> GridFunction {
        let values = grid.iter_cells().map(|c| f(c)).collect();
        GridFunction { grid: grid.clone(), values }
    }

    /// Sample a function of world coordinates at cell centers.
    pub fn from_world_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> GridFunction {
        GridFunction::from_fn(grid, |c| f(&grid.center(c)[..grid.dim()]))
    }

    pub fn indicator(set: &CellSet) -> GridFunction {
        let mut u = GridFunction::constant(set.grid(), 0.0);
        for (f, v) in u.values.iter_mut().enumerate() {
            if set.contains_flat(f) {
                *v = 1.0;
            }
        }
        u
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, c: Cell) -> f64 {
        self.values[self.grid.flat(c)]
    }

    pub fn get_flat(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn set(&mut self, c: Cell, v: f64) {
        let f = self.grid.flat(c);
        self.values[f] = v;
    }

    pub fn set_flat(&mut self, flat: usize, v: f64) {
        self.values[flat] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_max(&self, region: Region) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for (f, v) in self.values.iter().enumerate() {
            if region.admits_cell(f) {
                out = Some(match out {
                    None => (*v, *v),
                    Some((lo, hi)) => (lo.min(*v), hi.max(*v)),
                });
            }
        }
        out
    }

    /// `sum |u| h^dim` over the region.
    pub fn l1_norm(&self, region: Region) -> f64 {
        let hv = self.grid.cell_volume();
        let mut s = 0.0;
        for (f, v) in self.values.iter().enumerate() {
            if region.admits_cell(f) {
                s += v.abs();
            }
        }
        s * hv
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        let values = self.values.iter().map(|v| a * v).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.expect_same(&other.grid, "sum of grid functions")?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.expect_same(&other.grid, "difference of grid functions")?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(4, 3, &[2, 2, 2, 2], &[0.0; 4]).is_err());
        assert!(Grid::new(2, 0, &[1, 1], &[0.0, 0.0]).is_err());
        assert!(Grid::new(2, 3, &[9, 4], &[0.0, 0.0]).is_err());
        assert!(Grid::new(2, 3, &[0, 4], &[0.0, 0.0]).is_err());
        // Non-square shapes within the dyadic cap are fine.
        assert!(Grid::new(2, 3, &[3, 5], &[0.0, 0.0]).is_ok());
    }

    #[test]
    fn spacing_is_exact_dyadic() {
        let g = Grid::unit_square(5);
        assert_eq!(g.spacing(), 1.0 / 32.0);
        assert_eq!(g.face_area(), 1.0 / 32.0);
        assert_eq!(g.cell_volume(), 1.0 / 1024.0);
        let g3 = Grid::unit_cube(4);
        assert_eq!(g3.cell_volume(), 2f64.powi(-12));
    }

    #[test]
    fn flat_roundtrip_scan_order() {
        let g = Grid::new(3, 3, &[3, 5, 2], &[0.0; 3]).unwrap();
        for f in 0..g.cell_count() {
            assert_eq!(g.flat(g.cell_at(f)), f);
        }
        // x is the fastest axis.
        assert_eq!(g.flat(Cell::new3(1, 0, 0)), 1);
        assert_eq!(g.flat(Cell::new3(0, 1, 0)), 3);
        assert_eq!(g.flat(Cell::new3(0, 0, 1)), 15);
    }

    #[test]
    fn closure_and_interior_are_one_ring() {
        let g = Grid::unit_square(4);
        let s = CellSet::from_fn(&g, |c| (4..8).contains(&c.0[0]) && (4..8).contains(&c.0[1]));
        assert_eq!(s.count(), 16);
        assert_eq!(s.closure().count(), 36);
        assert_eq!(s.open_interior().count(), 4);
        // Closure then interior restores the original square block.
        assert_eq!(s.closure().open_interior(), s);
    }

    #[test]
    fn boundaries_count_for_single_cell() {
        let g = Grid::unit_square(3);
        let mut s = CellSet::empty(&g);
        s.insert(Cell::new2(3, 3));
        assert_eq!(s.inner_boundary(Adjacency::Face).count(), 1);
        assert_eq!(s.outer_boundary(Adjacency::Face).count(), 4);
        assert_eq!(s.outer_boundary(Adjacency::Vertex).count(), 8);
        assert!(!s.touches_frame());
        s.insert(Cell::new2(0, 5));
        assert!(s.touches_frame());
    }

    #[test]
    fn set_algebra_checks_grids() {
        let a = CellSet::full(&Grid::unit_square(3));
        let b = CellSet::full(&Grid::unit_square(4));
        assert!(matches!(a.union(&b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn indicator_and_algebra() {
        let g = Grid::unit_square(3);
        let s = CellSet::from_fn(&g, |c| c.0[0] < 4);
        let u = GridFunction::indicator(&s);
        assert_eq!(u.l1_norm(Region::Whole), s.volume());
        let w = u.add(&u).unwrap().scale(0.5);
        assert_eq!(w, u);
    }
}
