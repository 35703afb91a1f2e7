//! Planar boundary structure: signed cycles, region paths, and the strong
//! perimeter extension.
//!
//! The boundary of a planar cell set splits into closed signed contours
//! ([`jordan_decompose`]), whose lengths sum to the perimeter exactly and
//! whose nesting recovers the set as a disjoint union of ring-like parts.
//! Shortest paths inside a region ([`quasiconvex_path`], [`interior_path`])
//! measure how convex-like the region is. Both feed the strong perimeter
//! extension ([`strong_perimeter_extend_jordan`],
//! [`strong_perimeter_extend_set`]), which pushes a set outward through the
//! complement components of its domain until the two boundaries separate.
//!
//! [`hset_report`] isolates the domain boundary cells that no complement
//! component can see: slits and other hairline features that have positive
//! length but bound no area, which is exactly the part of a domain boundary
//! an extension cannot cross.

mod cycles;
mod extend;
mod paths;

pub use cycles::{jordan_decompose, BoundaryCycle, JordanDecomposition};
pub use extend::{
    extension_to_json, shared_boundary_length, strong_perimeter_extend_jordan,
    strong_perimeter_extend_set, ArcReport, BridgeReport, ComponentArcs, ExtensionResult,
};
pub use paths::{interior_path, quasiconvex_path, GridPath};

use serde_json::json;

use crate::components::ComplementComponent;
use crate::error::{Error, Result};
use crate::grid::{Adjacency, CellSet};
use crate::measure::perimeter;
use crate::grid::Region;

/// Boundary cells of `omega` that lie in the closure of no complement
/// component, together with half their face-boundary measure.
///
/// Every ordinary boundary cell sits next to some complement component;
/// what remains are hairline walls approached by the domain from both
/// sides. Such a wall is one cell wide and its cell-set boundary runs
/// along both of its long sides, so half the face-boundary measure
/// estimates the length of the underlying feature.
pub fn hset_report(
    omega: &CellSet,
    components: &[ComplementComponent],
) -> Result<(CellSet, f64)> {
    if omega.grid().dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "hairline report needs a planar grid, got dimension {}",
            omega.grid().dim()
        )));
    }
    let mut hset = omega.outer_boundary(Adjacency::Vertex);
    for comp in components {
        if comp.cells.grid() != omega.grid() {
            return Err(Error::GridMismatch { context: "hairline report".into() });
        }
        hset = hset.difference(&comp.cells.closure())?;
    }
    let length = perimeter(&hset, Region::Whole)? / 2.0;
    Ok((hset, length))
}

/// JSON view of a decomposition: every cycle as a closed vertex polyline
/// with its sign, length, depth, and parent in the nesting forest.
pub fn decomposition_to_json(dec: &JordanDecomposition) -> serde_json::Value {
    let cycles: Vec<serde_json::Value> = (0..dec.cycle_count())
        .map(|id| {
            let c = dec.cycle(id);
            json!({
                "sign": if c.positive { "+" } else { "-" },
                "length": c.length,
                "faces": c.face_count(),
                "depth": c.depth,
                "parent": dec.parents[id],
                "enclosed_cells": c.interior().count(),
                "vertices": c.vertices,
            })
        })
        .collect();
    json!({
        "cells": dec.set.count(),
        "plus_cycles": dec.plus_cycles.len(),
        "minus_cycles": dec.minus_cycles.len(),
        "parts": dec.parts.iter().map(|p| p.count()).collect::<Vec<_>>(),
        "cycles": cycles,
    })
}

/// SVG overlay of a decomposition: the set's cells as shaded row runs under
/// the signed contours. Vertex coordinates are used directly with the y
/// axis flipped, so one user unit is one grid cell.
pub fn decomposition_to_svg(dec: &JordanDecomposition) -> String {
    let grid = dec.set.grid();
    let nx = grid.cells_per_axis()[0];
    let ny = grid.cells_per_axis()[1];
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {nx} {ny}\">\n\
         <style>.cell{{fill:#b8c4d8}}.plus{{stroke:#1b7a3d}}.minus{{stroke:#b03030}}\n\
         polyline{{fill:none;stroke-width:0.15;stroke-linecap:square}}</style>\n"
    ));
    // Cells drawn as one rect per horizontal run to keep the file small.
    for iy in 0..ny {
        let mut run: Option<(usize, usize)> = None;
        for ix in 0..=nx {
            let inside = ix < nx && dec.set.contains(crate::grid::Cell::new2(ix, iy));
            match (inside, run) {
                (true, None) => run = Some((ix, 1)),
                (true, Some((x0, len))) => run = Some((x0, len + 1)),
                (false, Some((x0, len))) => {
                    svg.push_str(&format!(
                        "<rect class=\"cell\" x=\"{x0}\" y=\"{}\" width=\"{len}\" height=\"1\"/>\n",
                        ny - 1 - iy
                    ));
                    run = None;
                }
                (false, None) => {}
            }
        }
    }
    for id in 0..dec.cycle_count() {
        let c = dec.cycle(id);
        let class = if c.positive { "plus" } else { "minus" };
        let points: Vec<String> =
            c.vertices.iter().map(|v| format!("{},{}", v[0], ny - v[1])).collect();
        svg.push_str(&format!(
            "<polyline class=\"{class}\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::complement_components;
    use crate::gallery::{build, GalleryKind};
    use crate::grid::{Cell, CellSet, Grid};

    #[test]
    fn square_domain_has_no_hairline_cells() {
        let domain = build(GalleryKind::Square, 6).unwrap();
        let comps = complement_components(&domain.omega);
        let (hset, len) = hset_report(&domain.omega, &comps).unwrap();
        assert!(hset.is_empty());
        assert_eq!(len, 0.0);
    }

    #[test]
    fn comb_hairline_is_the_slit_at_half_length() {
        let domain = build(GalleryKind::Comb42, 8).unwrap();
        let comps = complement_components(&domain.omega);
        let (hset, len) = hset_report(&domain.omega, &comps).unwrap();
        let g = domain.omega.grid();
        let n = g.cells_per_axis()[0];
        // The slit column east of the midline, spanning half the height.
        assert!(hset.contains(Cell::new2(n / 2, n / 2)));
        assert_eq!(hset.count(), n / 2);
        assert!(hset.cells().all(|c| c.0[0] == n / 2));
        assert!((len - 0.5).abs() <= 4.0 * g.spacing(), "length estimate {len}");
    }

    #[test]
    fn slit_disk_hairline_matches_the_slit_radius() {
        let domain = build(GalleryKind::SlitDisk, 8).unwrap();
        let comps = complement_components(&domain.omega);
        let (hset, len) = hset_report(&domain.omega, &comps).unwrap();
        assert!(!hset.is_empty());
        assert!((len - 0.3).abs() <= 4.0 * domain.omega.grid().spacing(), "length {len}");
    }

    #[test]
    fn hairline_report_rejects_three_dimensions() {
        let g = Grid::unit_cube(4);
        let omega = CellSet::from_fn(&g, |c| (1..3).contains(&c.0[0]));
        let comps = complement_components(&omega);
        assert!(hset_report(&omega, &comps).is_err());
    }

    #[test]
    fn decomposition_exports_are_well_formed() {
        let g = Grid::unit_square(4);
        let outer = CellSet::from_fn(&g, |c| {
            (3..13).contains(&c.0[0]) && (3..13).contains(&c.0[1])
        });
        let hole =
            CellSet::from_fn(&g, |c| (6..10).contains(&c.0[0]) && (6..10).contains(&c.0[1]));
        let e = outer.difference(&hole).unwrap();
        let dec = jordan_decompose(&e).unwrap();

        let v = decomposition_to_json(&dec);
        assert_eq!(v["plus_cycles"], 1);
        assert_eq!(v["minus_cycles"], 1);
        let first = &v["cycles"][0];
        assert_eq!(first["sign"], "+");
        assert!(first["vertices"].as_array().unwrap().len() > 4);

        let svg = decomposition_to_svg(&dec);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"plus\""));
        assert!(svg.contains("class=\"minus\""));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
