//! Exact Euclidean distance transforms on the grid.
//!
//! Squared distances between cell centers are integers in cell units, and the
//! separable lower-envelope transform reproduces them exactly in `f64`, so
//! comparisons against dyadic thresholds downstream are reliable.

use crate::grid::{Cell, CellSet, Grid};

/// Per-cell distance to a fixed seed set, center to center.
#[derive(Debug, Clone)]
pub struct DistanceField {
    grid: Grid,
    sq: Vec<f64>,
}

impl DistanceField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Squared distance in cell units (integer-valued, infinity if no seeds).
    pub fn squared_cells(&self, c: Cell) -> f64 {
        self.sq[self.grid.flat(c)]
    }

    /// Distance in world units.
    pub fn world(&self, c: Cell) -> f64 {
        self.squared_cells(c).sqrt() * self.grid.spacing()
    }
}

/// Lower envelope transform of one row: `out[i] = min_j (i-j)^2 + f[j]`.
fn dt_row(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    let mut started = false;
    for q in 0..n {
        if f[q] == f64::INFINITY {
            continue;
        }
        if !started {
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            k = 0;
            started = true;
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2 * (q - p)) as f64;
            if s <= z[k] {
                debug_assert!(k > 0);
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    if !started {
        out[..n].fill(f64::INFINITY);
        return;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q.abs_diff(p) as f64;
        *o = d * d + f[p];
    }
}

/// Distance from every grid cell to the nearest cell of `seeds`.
pub fn distance_to(seeds: &CellSet) -> DistanceField {
    let grid = seeds.grid().clone();
    let n = grid.cell_count();
    let mut sq = vec![f64::INFINITY; n];
    for f in 0..n {
        if seeds.contains_flat(f) {
            sq[f] = 0.0;
        }
    }
    let shape = {
        let mut s = [1usize; 3];
        s[..grid.dim()].copy_from_slice(grid.cells_per_axis());
        s
    };
    let strides = [1usize, shape[0], shape[0] * shape[1]];
    for axis in 0..grid.dim() {
        let len = shape[axis];
        if len == 1 {
            continue;
        }
        let mut row = vec![0f64; len];
        let mut out = vec![0f64; len];
        // Iterate all lines along `axis` by walking the other two axes.
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for ib in 0..shape[b] {
            for ia in 0..shape[a] {
                let base = ia * strides[a] + ib * strides[b];
                for i in 0..len {
                    row[i] = sq[base + i * strides[axis]];
                }
                dt_row(&row, &mut out);
                for i in 0..len {
                    sq[base + i * strides[axis]] = out[i];
                }
            }
        }
    }
    DistanceField { grid, sq }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(seeds: &CellSet, c: Cell) -> f64 {
        let mut best = f64::INFINITY;
        for s in seeds.cells() {
            let d: f64 = (0..3)
                .map(|k| {
                    let d = c.0[k].abs_diff(s.0[k]) as f64;
                    d * d
                })
                .sum();
            best = best.min(d);
        }
        best
    }

    #[test]
    fn single_seed_exact_squares() {
        let g = Grid::unit_square(4);
        let mut s = CellSet::empty(&g);
        s.insert(Cell::new2(5, 9));
        let df = distance_to(&s);
        for c in g.iter_cells() {
            assert_eq!(df.squared_cells(c), brute_force(&s, c));
        }
    }

    #[test]
    fn random_seeds_match_brute_force_2d_and_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g2 = Grid::unit_square(4);
        let s2 = CellSet::from_fn(&g2, |_| rng.gen_bool(0.1));
        let df2 = distance_to(&s2);
        for c in g2.iter_cells() {
            assert_eq!(df2.squared_cells(c), brute_force(&s2, c));
        }
        let g3 = Grid::unit_cube(3);
        let s3 = CellSet::from_fn(&g3, |_| rng.gen_bool(0.08));
        let df3 = distance_to(&s3);
        for c in g3.iter_cells() {
            assert_eq!(df3.squared_cells(c), brute_force(&s3, c));
        }
    }

    #[test]
    fn empty_seed_set_is_all_infinite() {
        let g = Grid::unit_square(3);
        let df = distance_to(&CellSet::empty(&g));
        assert_eq!(df.squared_cells(Cell::new2(0, 0)), f64::INFINITY);
    }

    #[test]
    fn world_distance_scales_with_spacing() {
        let g = Grid::unit_square(3);
        let s = CellSet::from_fn(&g, |c| c.0[0] == 0);
        let df = distance_to(&s);
        // Three cells to the right of the seed column: distance 3h.
        assert_eq!(df.world(Cell::new2(3, 4)), 3.0 * g.spacing());
    }
}
