//! Volume density of a set in Euclidean balls.
//!
//! Balls collect cells by center-to-center distance, compared in squared form
//! so dyadic radii give exact membership decisions. The in-grid portion of
//! the ball is the denominator for fractions, which keeps the fraction of a
//! set and of its complement summing to one exactly.

use crate::error::{Error, Result};
use crate::grid::{Adjacency, Cell, CellSet};

/// Density of a set in one ball.
#[derive(Debug, Clone, Copy)]
pub struct DensityValue {
    /// Ball center cell.
    pub center: Cell,
    /// Ball radius in world units.
    pub radius: f64,
    /// Cells of the grid inside the ball.
    pub ball_cells: usize,
    /// Cells of the set inside the ball.
    pub set_cells: usize,
    /// `set_cells / ball_cells`.
    pub fraction: f64,
    /// `set_cells * h^dim / r^dim`: the constant in a lower volume bound
    /// `|B(x,r) ∩ E| >= c r^dim`.
    pub c_value: f64,
}

/// Cells whose centers lie within distance `r` of the center of `at`.
pub fn ball_cells(set: &CellSet, at: Cell, r: f64) -> Result<Vec<Cell>> {
    let grid = set.grid();
    if !grid.holds(at) {
        return Err(Error::InvalidInput(format!("ball center {at:?} is outside the grid")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be positive, got {r}")));
    }
    let h = grid.spacing();
    let reach = (r / h).floor() as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    let dim = grid.dim();
    let range = |d: usize| {
        if d < dim {
            -reach..=reach
        } else {
            0..=0
        }
    };
    for dz in range(2) {
        for dy in range(1) {
            for dx in range(0) {
                let d = [dx, dy, dz];
                let mut sq = 0.0;
                for k in 0..dim {
                    let step = d[k] as f64 * h;
                    sq += step * step;
                }
                if sq > r2 {
                    continue;
                }
                let p = [
                    at.0[0] as i64 + dx,
                    at.0[1] as i64 + dy,
                    at.0[2] as i64 + dz,
                ];
                if grid.holds_signed(&p) {
                    out.push(Cell([p[0] as usize, p[1] as usize, p[2] as usize]));
                }
            }
        }
    }
    Ok(out)
}

/// Density of `set` in the ball of radius `r` around the center of `at`.
pub fn density_at(set: &CellSet, at: Cell, r: f64) -> Result<DensityValue> {
    let grid = set.grid();
    let ball = ball_cells(set, at, r)?;
    let ball_n = ball.len();
    let set_n = ball.iter().filter(|c| set.contains(**c)).count();
    let h = grid.spacing();
    Ok(DensityValue {
        center: at,
        radius: r,
        ball_cells: ball_n,
        set_cells: set_n,
        fraction: set_n as f64 / ball_n as f64,
        c_value: set_n as f64 * h.powi(grid.dim() as i32) / r.powi(grid.dim() as i32),
    })
}

/// Result of scanning the volume bound constant along the boundary of a set.
#[derive(Debug, Clone, Copy)]
pub struct DensityScan {
    /// Radius used for every ball.
    pub radius: f64,
    /// Number of boundary cells probed.
    pub samples: usize,
    /// Smallest observed `c_value`.
    pub c_min: f64,
    /// First boundary cell achieving `c_min` in scan order.
    pub worst: Cell,
}

/// Probe `|B(x,r) ∩ E| / r^dim` at up to `max_samples` cells of the inner
/// boundary of the set (vertex adjacency), evenly strided in scan order, and
/// report the worst constant. A constant bounded away from zero as `r` and
/// the grid are refined is the discrete form of a measure density bound.
pub fn measure_density_scan(set: &CellSet, r: f64, max_samples: usize) -> Result<DensityScan> {
    if set.is_empty() {
        return Err(Error::InvalidInput("density scan over an empty set".into()));
    }
    if max_samples == 0 {
        return Err(Error::InvalidInput("density scan needs at least one sample".into()));
    }
    let boundary: Vec<Cell> = set.inner_boundary(Adjacency::Vertex).cells().collect();
    debug_assert!(!boundary.is_empty());
    let stride = boundary.len().div_ceil(max_samples).max(1);
    let mut best: Option<DensityScan> = None;
    let mut samples = 0usize;
    for c in boundary.iter().step_by(stride) {
        let v = density_at(set, *c, r)?;
        samples += 1;
        let better = match &best {
            None => true,
            Some(b) => v.c_value < b.c_min,
        };
        if better {
            best = Some(DensityScan { radius: r, samples: 0, c_min: v.c_value, worst: *c });
        }
    }
    let mut out = best.expect("at least one sample");
    out.samples = samples;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn ball_counts_match_hand_enumeration() {
        let g = Grid::unit_square(4);
        let full = CellSet::full(&g);
        let h = g.spacing();
        // r = h: center plus 4 face neighbors (distance exactly h included).
        let v = density_at(&full, Cell::new2(8, 8), h).unwrap();
        assert_eq!(v.ball_cells, 5);
        // r = 1.5h: adds the 4 diagonal neighbors at distance h*sqrt(2).
        let v = density_at(&full, Cell::new2(8, 8), 1.5 * h).unwrap();
        assert_eq!(v.ball_cells, 9);
    }

    #[test]
    fn clipped_ball_at_the_corner() {
        let g = Grid::unit_square(4);
        let full = CellSet::full(&g);
        let v = density_at(&full, Cell::new2(0, 0), g.spacing()).unwrap();
        // Two of the four face neighbors fall outside the grid.
        assert_eq!(v.ball_cells, 3);
        assert_eq!(v.fraction, 1.0);
    }

    #[test]
    fn fractions_of_set_and_complement_sum_to_one() {
        let g = Grid::unit_square(5);
        let s = CellSet::from_world_fn(&g, |p| p[0] + 2.0 * p[1] < 1.2);
        let at = Cell::new2(3, 17);
        let r = 5.0 * g.spacing();
        let a = density_at(&s, at, r).unwrap();
        let b = density_at(&s.complement(), at, r).unwrap();
        assert_eq!(a.ball_cells, b.ball_cells);
        assert_eq!(a.set_cells + b.set_cells, a.ball_cells);
        assert_eq!(a.fraction + b.fraction, 1.0);
    }

    #[test]
    fn half_plane_scan_constant_near_half_ball() {
        let g = Grid::unit_square(6);
        let s = CellSet::from_fn(&g, |c| c.0[0] < 32);
        let scan = measure_density_scan(&s, 6.0 * g.spacing(), 64).unwrap();
        // Worst case is a corner cell, where about a quarter ball survives;
        // |quarter ball| / r^2 = pi/4. Discretization overshoots a little at
        // this radius, so bound from both sides loosely.
        let quarter = std::f64::consts::PI / 4.0;
        assert!(scan.c_min > 0.8 * quarter, "c_min {}", scan.c_min);
        assert!(scan.c_min < std::f64::consts::PI / 2.0, "c_min {}", scan.c_min);
    }

    #[test]
    fn degenerate_inputs_are_typed_errors() {
        let g = Grid::unit_square(3);
        let s = CellSet::full(&g);
        assert!(density_at(&s, Cell::new2(0, 0), 0.0).is_err());
        assert!(measure_density_scan(&CellSet::empty(&g), 0.1, 8).is_err());
        assert!(measure_density_scan(&s, 0.1, 0).is_err());
    }
}
