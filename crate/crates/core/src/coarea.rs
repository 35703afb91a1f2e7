//! Superlevel sets, the exact layer-cake identity, and dyadic level
//! selection for rebuilding a function from finitely many level sets.
//!
//! On a grid the total variation of a function equals the integral of the
//! perimeters of its strict superlevel sets `{u > t}` exactly: per face the
//! jump `|a - b|` is the measure of thresholds separating `a` from `b`.
//! `select_levels` picks one threshold per dyadic value interval whose level
//! set has controlled perimeter, preferring candidates whose extension has
//! small perimeter near the domain boundary; `assemble_extension` rebuilds a
//! staircase function from the chosen (extended) level sets.

use crate::dist::distance_to;
use crate::error::{Error, Result};
use crate::grid::{CellSet, GridFunction, Region};
use crate::measure::{perimeter, tv_value};
use crate::whitney::boundary_cells;

/// Strict superlevel set `{u > t}`.
pub fn superlevel(u: &GridFunction, t: f64) -> CellSet {
    CellSet::from_fn(u.grid(), |c| u.get(c) > t)
}

/// Sorted distinct values of `u` over a region.
pub fn distinct_values(u: &GridFunction, region: Region) -> Result<Vec<f64>> {
    region.check_grid(u.grid(), "distinct values")?;
    let grid = u.grid();
    let mut vals: Vec<f64> = (0..grid.cell_count())
        .filter(|f| region.admits_cell(*f))
        .map(|f| u.get_flat(f))
        .collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    Ok(vals)
}

/// Perimeters of superlevel sets at a list of thresholds.
#[derive(Debug, Clone)]
pub struct LevelProfile {
    pub thresholds: Vec<f64>,
    pub perimeters: Vec<f64>,
}

impl LevelProfile {
    pub fn new(thresholds: Vec<f64>, perimeters: Vec<f64>) -> Result<LevelProfile> {
        if thresholds.len() != perimeters.len() {
            return Err(Error::InvalidInput(format!(
                "{} thresholds with {} perimeters",
                thresholds.len(),
                perimeters.len()
            )));
        }
        if thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("thresholds must be strictly ascending".into()));
        }
        if perimeters.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidInput("perimeters must be finite and nonnegative".into()));
        }
        Ok(LevelProfile { thresholds, perimeters })
    }

    /// Indices of thresholds in the half-open window `[a, b)`.
    fn window(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.thresholds.partition_point(|t| *t < a);
        let hi = self.thresholds.partition_point(|t| *t < b);
        lo..hi
    }

    /// Trapezoid integral of the profile over its samples inside `[a, b)`.
    pub fn trapezoid(&self, a: f64, b: f64) -> f64 {
        let w = self.window(a, b);
        let mut s = 0.0;
        for i in w.start..w.end.saturating_sub(1) {
            let dt = self.thresholds[i + 1] - self.thresholds[i];
            s += dt * (self.perimeters[i] + self.perimeters[i + 1]) / 2.0;
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,perimeter\n");
        for (t, p) in self.thresholds.iter().zip(&self.perimeters) {
            out.push_str(&format!("{t},{p}\n"));
        }
        out
    }
}

/// Evaluate superlevel perimeters at given thresholds.
pub fn level_profile(u: &GridFunction, region: Region, thresholds: &[f64]) -> Result<LevelProfile> {
    let mut perims = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        perims.push(perimeter(&superlevel(u, *t), region)?);
    }
    LevelProfile::new(thresholds.to_vec(), perims)
}

/// Both sides of the layer-cake identity and their relative gap.
#[derive(Debug, Clone, Copy)]
pub struct CoareaCheck {
    pub tv: f64,
    pub integral: f64,
    pub rel_err: f64,
}

/// Total variation versus the threshold integral of superlevel perimeters,
/// over all distinct values of `u`. The two agree up to rounding.
pub fn coarea_check(u: &GridFunction, region: Region) -> Result<CoareaCheck> {
    let tv = tv_value(u, region)?;
    let vals = distinct_values(u, Region::Whole)?;
    let mut integral = 0.0;
    for k in 0..vals.len().saturating_sub(1) {
        let p = perimeter(&superlevel(u, vals[k]), region)?;
        integral += (vals[k + 1] - vals[k]) * p;
    }
    let rel_err = if tv == 0.0 {
        integral.abs()
    } else {
        (tv - integral).abs() / tv
    };
    Ok(CoareaCheck { tv, integral, rel_err })
}

/// Per dyadic interval of `[0,1]`, whether some profile sample in the
/// interval has perimeter at most `2^(depth+1)` times the trapezoid integral
/// of the profile over that interval. Intervals without samples are flagged
/// false.
pub fn interval_flags(profile: &LevelProfile, depth: u32) -> Vec<bool> {
    let n = 1usize << depth;
    let len = 2f64.powi(-(depth as i32));
    let factor = 2f64.powi(depth as i32 + 1);
    (0..n)
        .map(|j| {
            let a = j as f64 * len;
            let b = a + len;
            let bound = factor * profile.trapezoid(a, b);
            let w = profile.window(a, b);
            w.clone().any(|i| profile.perimeters[i] <= bound)
        })
        .collect()
}

/// One chosen threshold per dyadic value interval.
#[derive(Debug, Clone)]
pub struct LevelSelection {
    /// The interval count is `2^depth`.
    pub depth: u32,
    /// Chosen threshold per interval, inside the interval.
    pub chosen: Vec<f64>,
    /// Whether the interval had a sample passing the perimeter bound.
    pub good_flags: Vec<bool>,
    /// Perimeter of the chosen threshold's extended set near the domain
    /// boundary, at the finest collar width (0 when no widths were given).
    pub collar_budget: Vec<f64>,
    /// The sampled perimeter profile the selection was made from.
    pub profile: LevelProfile,
}

impl LevelSelection {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("interval,threshold,good,collar_budget\n");
        for j in 0..self.chosen.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                j + 1,
                self.chosen[j],
                self.good_flags[j],
                self.collar_budget[j]
            ));
        }
        out
    }
}

/// Select one threshold per dyadic interval of `[0,1]`.
///
/// `u` must take values in `[0,1]` on `omega`. Samples are the distinct
/// values of `u` on `omega` plus every interval midpoint. In each interval,
/// among samples passing the perimeter bound, the one whose extended set has
/// the smallest perimeter in the finest collar around the boundary of
/// `omega` wins (earliest on ties). An interval with no passing sample is
/// flagged and falls back to its midpoint.
pub fn select_levels(
    u: &GridFunction,
    omega: &CellSet,
    depth: u32,
    mut extender: impl FnMut(&CellSet) -> Result<CellSet>,
    collar_widths: &[f64],
) -> Result<LevelSelection> {
    let grid = u.grid();
    if omega.grid() != grid {
        return Err(Error::GridMismatch { context: "level selection".into() });
    }
    if depth > 16 {
        return Err(Error::InvalidInput(format!("selection depth {depth} is too large")));
    }
    if omega.is_empty() {
        return Err(Error::InvalidInput("level selection needs a nonempty domain".into()));
    }
    for c in omega.cells() {
        let v = u.get(c);
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!(
                "level selection needs values in [0,1], found {v}"
            )));
        }
    }
    let h = grid.spacing();
    for w in collar_widths {
        if *w < 2.0 * h {
            return Err(Error::Scale(format!("collar width {w} is below two cells")));
        }
    }
    let n = 1usize << depth;
    let len = 2f64.powi(-(depth as i32));
    // Sample thresholds: distinct values on the domain plus midpoints.
    let mut thresholds = distinct_values(u, Region::Set(omega))?;
    for j in 0..n {
        thresholds.push((j as f64 + 0.5) * len);
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let region = Region::Set(omega);
    let mut perims = Vec::with_capacity(thresholds.len());
    let mut level_sets = Vec::with_capacity(thresholds.len());
    for t in &thresholds {
        let e = superlevel(u, *t).intersection(omega)?;
        perims.push(perimeter(&e, region)?);
        level_sets.push(e);
    }
    let profile = LevelProfile::new(thresholds, perims)?;
    let collar = if collar_widths.is_empty() {
        None
    } else {
        let finest = collar_widths.iter().cloned().fold(f64::INFINITY, f64::min);
        let df = distance_to(&boundary_cells(omega));
        Some(CellSet::from_fn(grid, |c| df.world(c) <= finest))
    };
    let factor = 2f64.powi(depth as i32 + 1);
    let mut chosen = Vec::with_capacity(n);
    let mut good_flags = Vec::with_capacity(n);
    let mut collar_budget = Vec::with_capacity(n);
    for j in 0..n {
        let a = j as f64 * len;
        let b = a + len;
        let bound = factor * profile.trapezoid(a, b);
        let window = profile.window(a, b);
        let qualifying: Vec<usize> =
            window.filter(|i| profile.perimeters[*i] <= bound).collect();
        if qualifying.is_empty() {
            let mid = a + len / 2.0;
            let e = superlevel(u, mid).intersection(omega)?;
            let ext = extender(&e)?;
            let budget = match &collar {
                Some(mask) => perimeter(&ext, Region::Set(mask))?,
                None => 0.0,
            };
            chosen.push(mid);
            good_flags.push(false);
            collar_budget.push(budget);
            continue;
        }
        let mut best = None;
        for i in qualifying {
            let ext = extender(&level_sets[i])?;
            if ext.grid() != grid {
                return Err(Error::GridMismatch { context: "extension oracle".into() });
            }
            let budget = match &collar {
                Some(mask) => perimeter(&ext, Region::Set(mask))?,
                None => 0.0,
            };
            match best {
                None => best = Some((i, budget)),
                Some((_, b0)) if budget < b0 => best = Some((i, budget)),
                _ => {
                    if collar.is_none() {
                        break;
                    }
                }
            }
        }
        let (i, budget) = best.expect("nonempty qualifying list");
        chosen.push(profile.thresholds[i]);
        good_flags.push(true);
        collar_budget.push(budget);
    }
    Ok(LevelSelection { depth, chosen, good_flags, collar_budget, profile })
}

/// Staircase function `2^-depth` times the membership count over the
/// extended level sets, one per interval.
pub fn assemble_extension(
    selection: &LevelSelection,
    extended_sets: &[CellSet],
) -> Result<GridFunction> {
    let n = 1usize << selection.depth;
    if extended_sets.len() != n {
        return Err(Error::Contract(format!(
            "{} extended sets for {n} intervals",
            extended_sets.len()
        )));
    }
    let grid = extended_sets[0].grid();
    let step = 2f64.powi(-(selection.depth as i32));
    let mut out = GridFunction::constant(grid, 0.0);
    for s in extended_sets {
        if s.grid() != grid {
            return Err(Error::GridMismatch { context: "extension assembly".into() });
        }
        for c in s.cells() {
            out.set(c, out.get(c) + step);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Grid};
    use proptest::prelude::*;

    fn ramp16(g: &Grid) -> GridFunction {
        // 16 equal vertical bands with values k/16.
        GridFunction::from_fn(g, |c| {
            (c.0[0] * 16 / g.cells_per_axis()[0]) as f64 / 16.0
        })
    }

    #[test]
    fn superlevel_edges_and_checkerboard() {
        let g = Grid::unit_square(4);
        let u = GridFunction::from_world_fn(&g, |p| p[0]);
        let right = superlevel(&u, 0.5);
        assert_eq!(right.count(), g.cell_count() / 2);
        assert!(right.contains(Cell::new2(8, 0)) && !right.contains(Cell::new2(7, 0)));
        assert_eq!(superlevel(&u, -1.0).count(), g.cell_count());
        assert_eq!(superlevel(&u, 1.0).count(), 0);
        let checker = GridFunction::from_fn(&g, |c| ((c.0[0] + c.0[1]) % 2) as f64);
        let ones = superlevel(&checker, 0.5);
        assert_eq!(ones.count(), g.cell_count() / 2);
        assert!(ones.contains(Cell::new2(1, 0)));
    }

    #[test]
    fn layer_cake_identity_on_ramp_and_constant() {
        let g = Grid::unit_square(5);
        let r = coarea_check(&ramp16(&g), Region::Whole).unwrap();
        // 15 interior interfaces of full height 1, jump 1/16 across each.
        assert!((r.tv - 15.0 / 16.0).abs() <= 1e-12);
        assert!(r.rel_err <= 1e-9, "rel err {}", r.rel_err);
        let c = coarea_check(&GridFunction::constant(&g, 0.7), Region::Whole).unwrap();
        assert_eq!((c.tv, c.integral, c.rel_err), (0.0, 0.0, 0.0));
    }

    proptest! {
        #[test]
        fn layer_cake_identity_on_random_integer_fields(vals in prop::collection::vec(0i32..16, 64)) {
            let g = Grid::square(3, 8).unwrap();
            let u = GridFunction::from_fn(&g, |c| vals[g.flat(c)] as f64);
            let r = coarea_check(&u, Region::Whole).unwrap();
            prop_assert!(r.rel_err <= 1e-9);
        }

        #[test]
        fn superlevels_nest_monotonically(vals in prop::collection::vec(0i32..16, 64), a in 0i32..16, b in 0i32..16) {
            let g = Grid::square(3, 8).unwrap();
            let u = GridFunction::from_fn(&g, |c| vals[g.flat(c)] as f64);
            let (lo, hi) = (a.min(b) as f64, a.max(b) as f64);
            prop_assert!(superlevel(&u, hi).is_subset_of(&superlevel(&u, lo)));
        }
    }

    #[test]
    fn profile_rejects_bad_shapes() {
        assert!(LevelProfile::new(vec![0.1, 0.1], vec![1.0, 1.0]).is_err());
        assert!(LevelProfile::new(vec![0.1], vec![-1.0]).is_err());
        assert!(LevelProfile::new(vec![0.1, 0.2], vec![1.0]).is_err());
    }

    #[test]
    fn linear_profile_passes_everywhere_spike_fails_once() {
        // Linearly growing perimeters: every interval keeps its lowest sample.
        let ts: Vec<f64> = (0..32).map(|k| k as f64 / 32.0).collect();
        let ps: Vec<f64> = ts.iter().map(|t| 1.0 + t).collect();
        let linear = LevelProfile::new(ts, ps).unwrap();
        assert!(interval_flags(&linear, 3).iter().all(|f| *f));
        // A narrow spike confined to one interval: both its samples exceed
        // the trapezoid bound there, the other intervals have flat samples.
        let spike = LevelProfile::new(
            vec![0.05, 0.30, 0.35, 0.60, 0.90],
            vec![0.0, 8.0, 8.0, 0.0, 0.0],
        )
        .unwrap();
        let flags = interval_flags(&spike, 2);
        assert_eq!(flags, vec![true, false, true, true]);
    }

    #[test]
    fn indicator_selection_recovers_the_set() {
        let g = Grid::unit_square(5);
        let omega = CellSet::from_fn(&g, |c| {
            (4..28).contains(&c.0[0]) && (4..28).contains(&c.0[1])
        });
        let e = CellSet::from_fn(&g, |c| {
            (8..16).contains(&c.0[0]) && (8..16).contains(&c.0[1])
        });
        let u = GridFunction::indicator(&e);
        let sel = select_levels(&u, &omega, 1, |s| Ok(s.clone()), &[]).unwrap();
        assert_eq!(sel.chosen.len(), 2);
        // The low interval holds the distinct value 0 and qualifies; the
        // high interval has no distinct value and falls back to its midpoint.
        assert_eq!(sel.good_flags, vec![true, false]);
        assert_eq!(sel.chosen[1], 0.75);
        // Every chosen threshold below 1 reproduces E as its superlevel set.
        for t in &sel.chosen {
            assert_eq!(superlevel(&u, *t), e);
        }
        let sets: Vec<CellSet> = sel
            .chosen
            .iter()
            .map(|t| superlevel(&u, *t).intersection(&omega).unwrap())
            .collect();
        let um = assemble_extension(&sel, &sets).unwrap();
        for c in g.iter_cells() {
            if omega.contains(c) {
                assert!((um.get(c) - u.get(c)).abs() <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn ramp_assembly_sup_bound_and_tv_bound() {
        let g = Grid::unit_square(5);
        let omega = CellSet::full(&g);
        let u = GridFunction::from_world_fn(&g, |p| p[0]);
        let depth = 4;
        let sel = select_levels(&u, &omega, depth, |s| Ok(s.clone()), &[]).unwrap();
        let sets: Vec<CellSet> = sel.chosen.iter().map(|t| superlevel(&u, *t)).collect();
        let um = assemble_extension(&sel, &sets).unwrap();
        let step = 2f64.powi(-(depth as i32));
        let mut sup = 0f64;
        for c in g.iter_cells() {
            sup = sup.max((um.get(c) - u.get(c)).abs());
        }
        assert!(sup <= step + 1e-12, "sup {sup} step {step}");
        // Subadditive variation bound, exact for nested level sets.
        let tv = tv_value(&um, Region::Whole).unwrap();
        let budget: f64 = sets
            .iter()
            .map(|s| step * crate::measure::perimeter(s, Region::Whole).unwrap())
            .sum();
        assert!(tv <= budget + 1e-12);
        assert!((tv - budget).abs() <= 1e-9, "nested sets give equality");
    }

    #[test]
    fn selection_checks_inputs() {
        let g = Grid::unit_square(4);
        let omega = CellSet::full(&g);
        let bad = GridFunction::constant(&g, 1.5);
        assert!(select_levels(&bad, &omega, 2, |s| Ok(s.clone()), &[]).is_err());
        let ok = GridFunction::constant(&g, 0.5);
        assert!(matches!(
            select_levels(&ok, &omega, 2, |s| Ok(s.clone()), &[0.01]),
            Err(Error::Scale(_))
        ));
        let sel = select_levels(&ok, &omega, 2, |s| Ok(s.clone()), &[]).unwrap();
        assert!(assemble_extension(&sel, &[]).is_err());
    }

    #[test]
    fn assembly_extremes() {
        let g = Grid::unit_square(4);
        let omega = CellSet::full(&g);
        let u = GridFunction::constant(&g, 0.5);
        let sel = select_levels(&u, &omega, 2, |s| Ok(s.clone()), &[]).unwrap();
        let full = vec![CellSet::full(&g); 4];
        let um = assemble_extension(&sel, &full).unwrap();
        assert!(g.iter_cells().all(|c| um.get(c) == 1.0));
        let empty = vec![CellSet::empty(&g); 4];
        let um = assemble_extension(&sel, &empty).unwrap();
        assert!(g.iter_cells().all(|c| um.get(c) == 0.0));
    }

    #[test]
    fn csv_exports_have_headers() {
        let p = LevelProfile::new(vec![0.25, 0.5], vec![1.0, 2.0]).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("threshold,perimeter\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
