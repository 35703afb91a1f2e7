//! Reference domains for experiments and tests.
//!
//! Every domain lives in the open unit box at a chosen dyadic level and is
//! drawn by testing cell centers against analytic geometry. Feature
//! coordinates are dyadic, so membership tests are exact in `f64` and the
//! same shape refines consistently across levels. Domains keep a two-cell
//! margin to the grid frame: the discrete closure eats one ring of outside
//! cells, so the margin guarantees the outside survives as an unbounded
//! complement component. Families with infinitely many scales (comb teeth,
//! Cantor removals) are truncated at the first scale too fine to draw; the
//! truncation index is reported in the metadata.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::density::density_at;
use crate::dist::distance_to;
use crate::error::{Error, Result};
use crate::grid::{Adjacency, Cell, CellSet, Grid};
use crate::whitney::boundary_cells;

/// Default probe radius for density classification: an eighth of the unit
/// box, coarse enough that corridor-scale structure averages out from level
/// nine upwards.
pub const DEFAULT_CLASSIFY_RADII: [f64; 1] = [0.125];

/// Margin, in cells, between every gallery domain and the grid frame. One
/// ring is eaten by the discrete closure; the second keeps the unbounded
/// outside alive for component and boundary bookkeeping.
pub const FRAME_MARGIN: usize = 2;

/// The built-in domain family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalleryKind {
    /// Axis-aligned square block, side 1/2, centered.
    Square,
    /// Disk of radius 0.3, centered.
    Disk,
    /// The disk with a one-cell slit removed from the center eastwards.
    SlitDisk,
    /// Square with a central vertical slit and comb teeth accumulating on it
    /// from both sides.
    Comb42,
    /// Region below the parabola `y = x^2`: an outward cusp at the origin.
    Cusp,
    /// 3D box minus a wedge whose height is the distance to a fat planar
    /// Cantor set.
    FatCantor3d,
    /// Seeded random polyomino grown from the center cell.
    RandomPolyomino { seed: u64 },
}

impl GalleryKind {
    /// Parse a domain name; `seed` is used by the random family only.
    pub fn parse(name: &str, seed: u64) -> Result<GalleryKind> {
        Ok(match name {
            "square" => GalleryKind::Square,
            "disk" => GalleryKind::Disk,
            "slit_disk" => GalleryKind::SlitDisk,
            "comb_4_2" => GalleryKind::Comb42,
            "cusp" => GalleryKind::Cusp,
            "fat_cantor_3d" => GalleryKind::FatCantor3d,
            "random_polyomino" => GalleryKind::RandomPolyomino { seed },
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown gallery domain {name:?}; known: square, disk, slit_disk, \
                     comb_4_2, cusp, fat_cantor_3d, random_polyomino"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GalleryKind::Square => "square",
            GalleryKind::Disk => "disk",
            GalleryKind::SlitDisk => "slit_disk",
            GalleryKind::Comb42 => "comb_4_2",
            GalleryKind::Cusp => "cusp",
            GalleryKind::FatCantor3d => "fat_cantor_3d",
            GalleryKind::RandomPolyomino { .. } => "random_polyomino",
        }
    }
}

/// A built domain: the cell set plus construction metadata.
#[derive(Debug, Clone)]
pub struct GalleryDomain {
    pub kind: GalleryKind,
    pub omega: CellSet,
    /// Largest constructed scale index for truncated families.
    pub truncation_index: Option<u32>,
    /// The removed slit, for domains that have one.
    pub slit_cells: Option<CellSet>,
    /// Cell marking the degenerate boundary point of the cusp.
    pub tip_cell: Option<Cell>,
    /// Construction parameters, by name.
    pub params: BTreeMap<String, f64>,
}

impl GalleryDomain {
    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        let grid = self.grid();
        json!({
            "kind": self.kind.name(),
            "dim": grid.dim(),
            "level": grid.level(),
            "cells": self.omega.count(),
            "volume": self.omega.volume(),
            "truncation_index": self.truncation_index,
            "slit_cells": self.slit_cells.as_ref().map(|s| s.count()),
            "tip_cell": self.tip_cell.map(|c| c.0[..grid.dim()].to_vec()),
            "params": self.params,
        })
    }
}

/// Build a gallery domain at the given level.
pub fn build(kind: GalleryKind, level: u32) -> Result<GalleryDomain> {
    match kind {
        GalleryKind::Square => build_square(level),
        GalleryKind::Disk => Ok(disk_domain(level, false)),
        GalleryKind::SlitDisk => Ok(disk_domain(level, true)),
        GalleryKind::Comb42 => build_comb(level),
        GalleryKind::Cusp => build_cusp(level),
        GalleryKind::FatCantor3d => build_fat_cantor(level),
        GalleryKind::RandomPolyomino { seed } => build_polyomino(level, seed),
    }
}

/// Cells at least [`FRAME_MARGIN`] cells away from the grid frame.
fn open_box(grid: &Grid) -> CellSet {
    CellSet::from_fn(grid, |c| {
        (0..grid.dim()).all(|d| {
            let n = grid.cells_per_axis()[d];
            c.0[d] >= FRAME_MARGIN && c.0[d] < n - FRAME_MARGIN
        })
    })
}

fn build_square(level: u32) -> Result<GalleryDomain> {
    let grid = Grid::unit_square(level);
    let omega = CellSet::from_world_fn(&grid, |p| {
        (0.25..0.75).contains(&p[0]) && (0.25..0.75).contains(&p[1])
    });
    Ok(GalleryDomain {
        kind: GalleryKind::Square,
        omega,
        truncation_index: None,
        slit_cells: None,
        tip_cell: None,
        params: BTreeMap::from([("side".to_string(), 0.5)]),
    })
}

const DISK_RADIUS: f64 = 0.3;

fn disk_domain(level: u32, with_slit: bool) -> GalleryDomain {
    let grid = Grid::unit_square(level);
    let in_disk = |p: &[f64]| {
        let dx = p[0] - 0.5;
        let dy = p[1] - 0.5;
        dx * dx + dy * dy < DISK_RADIUS * DISK_RADIUS
    };
    let disk = CellSet::from_world_fn(&grid, in_disk);
    if !with_slit {
        return GalleryDomain {
            kind: GalleryKind::Disk,
            omega: disk,
            truncation_index: None,
            slit_cells: None,
            tip_cell: None,
            params: BTreeMap::from([("radius".to_string(), DISK_RADIUS)]),
        };
    }
    // Slit: the cell row whose centers sit just above y = 1/2, from the
    // center of the disk eastwards to its rim.
    let row = 1usize << (level - 1);
    let slit = CellSet::from_fn(&grid, |c| {
        c.0[1] == row && c.0[0] >= row && disk.contains(c)
    });
    let omega = disk.difference(&slit).expect("same grid");
    GalleryDomain {
        kind: GalleryKind::SlitDisk,
        omega,
        truncation_index: None,
        slit_cells: Some(slit),
        tip_cell: None,
        params: BTreeMap::from([("radius".to_string(), DISK_RADIUS)]),
    }
}

/// The comb: open unit box minus a central vertical slit (one cell column
/// just east of `x = 1/2`, spanning `y` in `[1/4, 3/4]`) minus, on both
/// sides of the slit, scale-`i` teeth for `i = 3..=level-4`.
///
/// Scale `i` fills the dyadic ring `2^-i-1 < |x - 1/2| <= 2^-i` with teeth
/// of pitch `2^-i-1` in `y`, mirrored east and west over the band
/// `y in [3/16, 13/16]`. Each tooth is inset two cells from the inner ring
/// edge and stops two cells short of the next tooth, so the open space
/// between teeth is a web of corridors exactly two cells wide at every
/// scale. The shape this refines toward has density zero on the slit: the
/// teeth wall it off from both sides, and only the hairline corridors
/// survive. The band overhangs the slit by a sixteenth at each end so probe
/// balls at the slit ends stay walled too, standing in for the arbitrarily
/// fine scales a truncated construction cannot draw. Scales whose teeth
/// would be thinner than six cells are dropped, which leaves an open moat
/// nine cells wide around the slit at any level; the region past `|x - 1/2|
/// = 1/8` stays open, since structure farther from the slit than the
/// classification radius carries no density information about it.
fn build_comb(level: u32) -> Result<GalleryDomain> {
    if level < 6 {
        return Err(Error::Resolution {
            feature: "comb slit (needs level 6)".into(),
            needed: 64,
            available: 1usize << level,
        });
    }
    let grid = Grid::unit_square(level);
    let n = 1usize << level;
    let i_max = level - 4;
    let mut omega = open_box(&grid);
    for i in 3..=i_max {
        // Ring half-width and tooth pitch, in cells.
        let s = 1usize << (level - i - 1);
        let east = (n / 2 + s + 2, n / 2 + 2 * s);
        let west = (n / 2 - 2 * s, n / 2 - s - 2);
        // The band [3/16, 13/16] holds five eighths of the box: 5 * 2^(i-2)
        // teeth of pitch s.
        for k in 0..(5usize << (i - 2)) {
            let y0 = 3 * n / 16 + k * s;
            for (x0, x1) in [east, west] {
                for ix in x0..x1 {
                    for iy in y0..y0 + s - 2 {
                        omega.remove(Cell::new2(ix, iy));
                    }
                }
            }
        }
    }
    let slit_col = n / 2;
    let slit = CellSet::from_fn(&grid, |c| {
        c.0[0] == slit_col && (n / 4..3 * n / 4).contains(&c.0[1])
    });
    let omega = omega.difference(&slit).expect("same grid");
    Ok(GalleryDomain {
        kind: GalleryKind::Comb42,
        omega,
        truncation_index: Some(i_max),
        slit_cells: Some(slit),
        tip_cell: None,
        params: BTreeMap::from([
            ("slit_length".to_string(), 0.5),
            ("corridor_cells".to_string(), 2.0),
            ("first_scale".to_string(), 3.0),
            ("band_overhang".to_string(), 0.0625),
        ]),
    })
}

fn build_cusp(level: u32) -> Result<GalleryDomain> {
    let grid = Grid::unit_square(level);
    let frame = open_box(&grid);
    let omega = CellSet::from_fn(&grid, |c| {
        if !frame.contains(c) {
            return false;
        }
        let p = grid.center(c);
        p[1] < p[0] * p[0]
    });
    let tip = omega.cells().next().ok_or_else(|| Error::Resolution {
        feature: "cusp interior (first cell under the parabola)".into(),
        needed: 4,
        available: 1usize << level,
    })?;
    Ok(GalleryDomain {
        kind: GalleryKind::Cusp,
        omega,
        truncation_index: None,
        slit_cells: None,
        tip_cell: Some(tip),
        params: BTreeMap::new(),
    })
}

/// Intervals of the fat Cantor set in `[1/4, 3/4]` after `steps` removals.
/// Step `k` removes a central piece of length `4^-k / 2` from each interval,
/// so half the measure survives the full construction.
pub fn cantor_intervals(steps: u32) -> Vec<(f64, f64)> {
    let mut intervals = vec![(0.25, 0.75)];
    for k in 1..=steps {
        let cut = 4f64.powi(-(k as i32)) / 2.0;
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for (a, b) in intervals {
            let mid = (a + b) / 2.0;
            next.push((a, mid - cut / 2.0));
            next.push((mid + cut / 2.0, b));
        }
        intervals = next;
    }
    intervals
}

fn in_intervals(x: f64, intervals: &[(f64, f64)]) -> bool {
    intervals.iter().any(|(a, b)| (*a..=*b).contains(&x))
}

/// 3D wedge domain: from the open unit cube remove, over the base square
/// `[1/4,3/4]^2`, the slab `|z - 1/2| <= max(dist((x,y), C), 2h)` where `C`
/// is the product fat Cantor set. The removed wedge is one connected
/// complement component whose closure meets the domain boundary in a set of
/// positive area.
fn build_fat_cantor(level: u32) -> Result<GalleryDomain> {
    if level < 4 {
        return Err(Error::Resolution {
            feature: "fat Cantor wedge (first removal spans two cells at level 4)".into(),
            needed: 16,
            available: 1usize << level,
        });
    }
    let steps = (level - 2) / 2;
    let intervals = cantor_intervals(steps);
    let base_grid = Grid::unit_square(level);
    let cantor = CellSet::from_world_fn(&base_grid, |p| {
        in_intervals(p[0], &intervals) && in_intervals(p[1], &intervals)
    });
    let df = distance_to(&cantor);
    let grid = Grid::unit_cube(level);
    let h = grid.spacing();
    let n = grid.cells_per_axis()[0];
    let mut omega = open_box(&grid);
    for ix in 0..n {
        for iy in 0..n {
            let base = Cell::new2(ix, iy);
            let p = base_grid.center(base);
            if !(0.25..0.75).contains(&p[0]) || !(0.25..0.75).contains(&p[1]) {
                continue;
            }
            let height = df.world(base).max(2.0 * h);
            for iz in 0..n {
                let z = (iz as f64 + 0.5) * h;
                if (z - 0.5).abs() <= height {
                    omega.remove(Cell::new3(ix, iy, iz));
                }
            }
        }
    }
    let volume = omega.volume();
    Ok(GalleryDomain {
        kind: GalleryKind::FatCantor3d,
        omega,
        truncation_index: Some(steps),
        slit_cells: None,
        tip_cell: None,
        params: BTreeMap::from([
            ("volume_fraction".to_string(), volume),
            ("base_measure".to_string(), 0.25),
        ]),
    })
}

/// Seeded Eden growth: starting from the center cell, repeatedly attach a
/// uniformly random frontier cell until `target` cells are placed. Growth is
/// confined to the frame-clear interior, so the result never touches the
/// margin rings. The set is face-connected and deterministic in the seed.
pub fn random_polyomino(grid: &Grid, seed: u64, target: usize) -> Result<CellSet> {
    let capacity: usize = (0..grid.dim())
        .map(|d| grid.cells_per_axis()[d].saturating_sub(2 * FRAME_MARGIN))
        .product();
    if target == 0 || target > capacity {
        return Err(Error::InvalidInput(format!(
            "polyomino size {target} must be between 1 and the frame-clear interior \
             ({capacity} cells)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = CellSet::empty(grid);
    let mut queued = CellSet::empty(grid);
    let start = {
        let mut c = [0usize; 3];
        for d in 0..grid.dim() {
            c[d] = grid.cells_per_axis()[d] / 2;
        }
        Cell(c)
    };
    let mut frontier = vec![start];
    queued.insert(start);
    let offs = grid.neighbor_offsets(Adjacency::Face);
    while set.count() < target {
        debug_assert!(!frontier.is_empty(), "interior capacity was checked above");
        let idx = rng.gen_range(0..frontier.len());
        let cell = frontier.swap_remove(idx);
        set.insert(cell);
        for o in &offs {
            let p = [
                cell.0[0] as i64 + o[0],
                cell.0[1] as i64 + o[1],
                cell.0[2] as i64 + o[2],
            ];
            let clear = grid.holds_signed(&p)
                && (0..grid.dim()).all(|d| {
                    let v = p[d] as usize;
                    v >= FRAME_MARGIN && v < grid.cells_per_axis()[d] - FRAME_MARGIN
                });
            if clear {
                let q = Cell([p[0] as usize, p[1] as usize, p[2] as usize]);
                if !set.contains(q) && !queued.contains(q) {
                    queued.insert(q);
                    frontier.push(q);
                }
            }
        }
    }
    Ok(set)
}

fn build_polyomino(level: u32, seed: u64) -> Result<GalleryDomain> {
    let grid = Grid::unit_square(level);
    let target = (grid.cell_count() / 16).max(1);
    let omega = random_polyomino(&grid, seed, target)?;
    Ok(GalleryDomain {
        kind: GalleryKind::RandomPolyomino { seed },
        omega,
        truncation_index: None,
        slit_cells: None,
        tip_cell: None,
        params: BTreeMap::from([("target_cells".to_string(), target as f64)]),
    })
}

/// Split the boundary cells of a domain by the density of the domain in probe
/// balls around them: a boundary cell is high-density when its best fraction
/// over the given radii exceeds `1/2 + 2h / min(radii)`. Returns the high
/// cells and their share among all boundary cells.
///
/// The margin `2h / min(radii)` absorbs the one-cell uncertainty of a
/// discretized boundary: next to a flat wall the fraction lands within
/// `2h/r` of one half, so flat and outward-bending boundary never classifies
/// high, while a cell whose ball is filled well past half at some probe
/// scale does.
pub fn classify_density(omega: &CellSet, radii: &[f64]) -> Result<(CellSet, f64)> {
    let grid = omega.grid();
    let h = grid.spacing();
    if radii.is_empty() {
        return Err(Error::InvalidInput("density classification needs a probe radius".into()));
    }
    for r in radii {
        if *r < 2.0 * h {
            return Err(Error::Scale(format!(
                "classification radius {r} is below two cells ({})",
                2.0 * h
            )));
        }
    }
    let boundary = boundary_cells(omega);
    if boundary.is_empty() {
        return Err(Error::InvalidInput(
            "the set has no boundary cells to classify".into(),
        ));
    }
    let min_r = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = 0.5 + 2.0 * h / min_r;
    let mut high = CellSet::empty(grid);
    for cell in boundary.cells() {
        let mut best = 0.0f64;
        for r in radii {
            best = best.max(density_at(omega, cell, *r)?.fraction);
        }
        if best > threshold {
            high.insert(cell);
        }
    }
    let fraction = high.count() as f64 / boundary.count() as f64;
    Ok((high, fraction))
}

/// Fraction of `targets` that lie in `marked`: the share of a region caught
/// by a classification.
pub fn fraction_within(marked: &CellSet, targets: &CellSet) -> Result<f64> {
    if marked.grid() != targets.grid() {
        return Err(Error::GridMismatch { context: "classification fraction".into() });
    }
    if targets.is_empty() {
        return Err(Error::InvalidInput("no target cells to measure".into()));
    }
    Ok(marked.intersection(targets)?.count() as f64 / targets.count() as f64)
}

/// A named demonstration subset of a domain. `left-half` cuts west of the
/// central features (for the comb, at `x = 3/8`, flush with the west faces
/// of the coarsest teeth, so the cut set is the whole open western chamber);
/// `west-of-slit` cuts exactly at the slit line; `lower-half` cuts below the
/// midplane (the last grid axis).
pub fn named_set(dom: &GalleryDomain, name: &str) -> Result<CellSet> {
    let grid = dom.grid();
    let cut_x = |t: f64| CellSet::from_world_fn(grid, |p| p[0] < t);
    let half = match name {
        "left-half" => match dom.kind {
            GalleryKind::Comb42 => cut_x(0.375),
            _ => cut_x(0.5),
        },
        "west-of-slit" => cut_x(0.5),
        "lower-half" => {
            let axis = grid.dim() - 1;
            CellSet::from_world_fn(grid, |p| p[axis] < 0.5)
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown named set {name:?}; known: left-half, west-of-slit, lower-half"
            )))
        }
    };
    dom.omega.intersection(&half)
}

/// One-ring dilation baseline: the set plus its outer vertex ring outside the
/// domain. Extends a set across the domain boundary without any care, as a
/// comparison point for the boundary-avoiding extension.
pub fn baseline_dilation(set: &CellSet, omega: &CellSet) -> Result<CellSet> {
    if set.grid() != omega.grid() {
        return Err(Error::GridMismatch { context: "dilation baseline".into() });
    }
    let ring = set.outer_boundary(Adjacency::Vertex);
    let outside = ring.difference(omega)?;
    set.union(&outside)
}
