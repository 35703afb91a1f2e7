//! Strong perimeter extension of a set across the boundary of its domain.
//!
//! Wherever the boundary of a set `E` runs along the boundary of its open
//! domain, the shared faces contribute perimeter that would be counted
//! twice by an extension that simply stops at the domain. The remedy is to
//! push `E` outward through each complement component it leans on: along
//! every boundary stretch glued to a component, the outer contour of `E`
//! is rerouted through the component's interior and the cells between the
//! old and the new contour are absorbed. The rerouted set agrees with `E`
//! inside the domain exactly and its boundary avoids the domain boundary
//! except for what the grid cannot resolve.
//!
//! The region between the glued boundary stretch and its replacement path
//! is computed as the exact enclosure of the closed curve made of the two,
//! by integer parity counting along cell-center rows. A plain flood fill
//! between the curves gives the same cells whenever the path runs on the
//! same side of the component as the stretch; parity stays correct also
//! when a shortest path ties across the far side, and such a path is
//! detected (the enclosure would swallow domain cells) and rerouted
//! through a narrow corridor around the stretch until the enclosure is
//! clean. Stretch portions that leave the component closure get their own
//! replacement paths, and the pockets behind them are carved back out of
//! the absorbed region before the union.

use serde_json::json;

use crate::components::ComplementComponent;
use crate::error::{Error, Result};
use crate::grid::{Adjacency, Cell, CellSet, Grid, Region};
use crate::measure::perimeter;

use super::cycles::{jordan_decompose, BoundaryCycle};
use super::paths::shortest_path;

/// Replacement path for a boundary stretch that leaves the component
/// closure, and the size of the pocket carved behind it.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    /// Faces of the stretch that lie off the component boundary.
    pub faces: usize,
    /// Length of the replacement path in world units.
    pub path_length: f64,
    /// Cells carved back out of the absorbed region behind this stretch.
    pub carved_cells: usize,
}

/// One glued boundary stretch of the outer contour and its rerouting.
#[derive(Debug, Clone)]
pub struct ArcReport {
    /// Total faces in the stretch, glued and bridged together.
    pub faces: usize,
    /// Faces shared with the component boundary.
    pub overlap_faces: usize,
    /// First and last glued cell just outside the domain.
    pub z: Cell,
    pub w: Cell,
    /// Length of the replacement path from `z` to `w` in world units.
    pub path_length: f64,
    /// Whether the replacement path had to leave the component's open
    /// interior or overshoot its length budget at this resolution.
    pub resolution_limited: bool,
    /// Cells absorbed for this stretch, replacement paths included.
    pub added_cells: usize,
    pub bridges: Vec<BridgeReport>,
}

/// Reroutings grouped by complement component.
#[derive(Debug, Clone)]
pub struct ComponentArcs {
    /// Index into the component list passed to the extension.
    pub component: usize,
    pub arcs: Vec<ArcReport>,
}

/// Outcome of a strong perimeter extension.
#[derive(Debug, Clone)]
pub struct ExtensionResult {
    /// The extended set; agrees with the input set inside the domain.
    pub extended: CellSet,
    /// Perimeter of the input set relative to the open domain.
    pub perimeter_in: f64,
    /// Perimeter of the extended set in the whole grid.
    pub perimeter_out: f64,
    /// Length of the faces shared by the boundaries of the extended set
    /// and of the domain.
    pub overlap_length: f64,
    /// `perimeter_out / perimeter_in`; infinite when the relative
    /// perimeter vanishes.
    pub constant: f64,
    pub arcs: Vec<ComponentArcs>,
}

/// Length of the faces lying on the boundaries of both sets at once.
pub fn shared_boundary_length(a: &CellSet, b: &CellSet) -> Result<f64> {
    let grid = a.grid();
    if grid != b.grid() {
        return Err(Error::GridMismatch { context: "shared boundary length".into() });
    }
    let n = grid.cells_per_axis();
    let mut faces = 0usize;
    for c in grid.iter_cells() {
        for d in 0..grid.dim() {
            if c.0[d] + 1 >= n[d] {
                continue;
            }
            let mut q = c;
            q.0[d] += 1;
            if a.contains(c) != a.contains(q) && b.contains(c) != b.contains(q) {
                faces += 1;
            }
        }
    }
    Ok(faces as f64 * grid.face_area())
}

/// The closed region a component occupies: its cells together with the
/// ring eaten by the closure, which still lies outside the open domain.
fn component_region(comp: &ComplementComponent, omega: &CellSet) -> Result<CellSet> {
    comp.cells.closure().difference(omega)
}

/// Greedy maximal stretches over the cyclic gluing flags: a stretch starts
/// at a glued face and absorbs the next glued face as long as glued faces
/// keep a majority. Returns (start, length) pairs in cyclic face indices.
fn greedy_arcs(flags: &[bool]) -> Vec<(usize, usize)> {
    let m = flags.len();
    if flags.iter().all(|&f| f) {
        // Fully glued contour: two half stretches, each with endpoints to
        // route between. A single stretch would close on itself and leave
        // nothing for a replacement path to cut off.
        if m <= 2 {
            return vec![(0, m)];
        }
        let half = m / 2;
        return vec![(0, half), (half, m - half)];
    }
    let s = flags.iter().position(|&f| !f).expect("some face is unglued");
    let mut arcs = Vec::new();
    let mut t = s + 1;
    while t < s + m {
        if !flags[t % m] {
            t += 1;
            continue;
        }
        let a = t;
        let mut b = t;
        let mut overlap = 1usize;
        loop {
            let mut g = b + 1;
            while g < s + m && !flags[g % m] {
                g += 1;
            }
            if g >= s + m {
                break;
            }
            // Absorb the gap and the glued face after it only if glued
            // faces still make up at least half of the stretch.
            if 2 * (overlap + 1) >= (b - a + 1) + (g - b) {
                overlap += 1;
                b = g;
            } else {
                break;
            }
        }
        arcs.push((a % m, b - a + 1));
        t = b + 1;
    }
    arcs
}

/// Cells within `rounds` vertex steps of the seeds, staying inside `within`.
fn dilate_within(within: &CellSet, seeds: &CellSet, rounds: usize) -> CellSet {
    let grid = within.grid();
    let offs = grid.neighbor_offsets(Adjacency::Vertex);
    let mut out = seeds.intersection(within).expect("same grid");
    let mut frontier: Vec<Cell> = out.cells().collect();
    for _ in 0..rounds {
        let mut next = Vec::new();
        for c in frontier {
            for o in &offs {
                let p = [
                    c.0[0] as i64 + o[0],
                    c.0[1] as i64 + o[1],
                    c.0[2] as i64 + o[2],
                ];
                if within.contains_signed(&p) {
                    let q = Cell([p[0] as usize, p[1] as usize, p[2] as usize]);
                    if !out.contains(q) {
                        out.insert(q);
                        next.push(q);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

/// A replacement path routed inside a component region.
struct Routed {
    cells: Vec<Cell>,
    length: f64,
    limited: bool,
}

/// Shortest path from `z` to `w` through the region, preferring the open
/// interior and falling back to the closed region when the grid is too
/// coarse. `band`, when set, restricts the search to a corridor. Returns
/// `None` when the corridor disconnects the endpoints.
fn route(
    region: &CellSet,
    open_int: &CellSet,
    z: Cell,
    w: Cell,
    band: Option<&CellSet>,
) -> Result<Option<Routed>> {
    let h = region.grid().spacing();
    let clip = |base: &CellSet| -> Result<CellSet> {
        match band {
            None => Ok(base.clone()),
            Some(b) => base.intersection(b),
        }
    };
    let closed_allowed = clip(region)?;
    let Some((closed_cells, closed_len)) = shortest_path(&closed_allowed, z, w) else {
        return Ok(None);
    };
    let dz = [
        z.0[0] as f64 - w.0[0] as f64,
        z.0[1] as f64 - w.0[1] as f64,
    ];
    let epsilon = (dz[0] * dz[0] + dz[1] * dz[1]).sqrt().max(2.0) * h;
    let mut open_allowed = clip(open_int)?;
    open_allowed.insert(z);
    open_allowed.insert(w);
    Ok(Some(match shortest_path(&open_allowed, z, w) {
        Some((cells, length)) => {
            let limited = length > closed_len + epsilon;
            Routed { cells, length, limited }
        }
        None => Routed { cells: closed_cells, length: closed_len, limited: true },
    }))
}

/// Exact enclosure of the closed curve that walks the contour vertices
/// `verts` forward and the path cells backward. Parity of crossings is
/// counted along each cell-center row in doubled integer coordinates, so
/// the result is free of tolerances; cells whose center lies on the curve
/// itself are the path cells, which the caller handles separately.
fn enclosed_between(grid: &Grid, verts: &[[usize; 2]], path: &[Cell]) -> CellSet {
    let mut pts: Vec<[i64; 2]> = Vec::with_capacity(verts.len() + path.len() + 1);
    for v in verts {
        pts.push([2 * v[0] as i64, 2 * v[1] as i64]);
    }
    for c in path.iter().rev() {
        pts.push([2 * c.0[0] as i64 + 1, 2 * c.0[1] as i64 + 1]);
    }
    pts.push(pts[0]);

    let mut rows: std::collections::BTreeMap<i64, Vec<i64>> = std::collections::BTreeMap::new();
    for s in pts.windows(2) {
        let [x0, y0] = s[0];
        let [x1, y1] = s[1];
        if y0 == y1 {
            continue;
        }
        let (ylo, yhi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
        // Odd doubled ordinates are cell-center rows; the half-open span
        // [ylo, yhi) counts each crossing exactly once.
        let mut y = if ylo % 2 == 0 { ylo + 1 } else { ylo };
        while y < yhi {
            let num = (y - y0) * (x1 - x0);
            debug_assert_eq!(num % (y1 - y0), 0);
            let xc = x0 + num / (y1 - y0);
            rows.entry((y - 1) / 2).or_default().push(xc);
            y += 2;
        }
    }

    let nx = grid.cells_per_axis()[0] as i64;
    let ny = grid.cells_per_axis()[1] as i64;
    let mut out = CellSet::empty(grid);
    for (row, mut xs) in rows {
        if row < 0 || row >= ny {
            continue;
        }
        xs.sort_unstable();
        debug_assert_eq!(xs.len() % 2, 0, "closed curves cross each row evenly");
        // Between consecutive crossings the parity of "crossings strictly
        // to the right" flips; cells inside an odd span are enclosed.
        for pair in xs.chunks(2) {
            let lo = (pair[0] + 1).div_euclid(2).max(0);
            let hi = pair[1].div_euclid(2).min(nx);
            for ix in lo..hi {
                out.insert(Cell::new2(ix as usize, row as usize));
            }
        }
    }
    out
}

/// A glued stretch of the outer contour prepared for rerouting.
struct Stretch {
    /// Absolute cyclic face index of the first face.
    start: usize,
    /// Total number of faces.
    len: usize,
    /// Relative indices of glued faces.
    glued: Vec<usize>,
    /// Relative index ranges `[p, q]` of maximal unglued runs.
    gaps: Vec<(usize, usize)>,
}

fn collect_stretch(flags: &[bool], start: usize, len: usize) -> Stretch {
    let m = flags.len();
    let mut glued = Vec::new();
    let mut gaps = Vec::new();
    let mut run: Option<usize> = None;
    for t in 0..len {
        if flags[(start + t) % m] {
            glued.push(t);
            if let Some(p) = run.take() {
                gaps.push((p, t - 1));
            }
        } else if run.is_none() {
            run = Some(t);
        }
    }
    debug_assert!(run.is_none(), "stretches end on glued faces");
    Stretch { start, len, glued, gaps }
}

/// Reroute one glued stretch through the component region and return the
/// cells to absorb. Retries through ever wider corridors around the
/// stretch when a path ties across the wrong side of the region, which
/// shows up as domain cells inside the enclosure.
fn process_stretch(
    omega: &CellSet,
    region: &CellSet,
    open_int: &CellSet,
    cycle: &BoundaryCycle,
    stretch: &Stretch,
) -> Result<(CellSet, ArcReport)> {
    let grid = omega.grid();
    let m = cycle.face_count();
    let face = |t: usize| cycle.faces()[(stretch.start + t) % m];
    let vert = |t: usize| cycle.vertices[(stretch.start + t) % m];

    let z = face(stretch.glued[0]).1;
    let w = face(*stretch.glued.last().expect("stretches hold a glued face")).1;

    let mut seeds = CellSet::empty(grid);
    for &t in &stretch.glued {
        seeds.insert(face(t).1);
    }

    let arc_verts: Vec<[usize; 2]> = (0..=stretch.len).map(vert).collect();

    let max_band = grid.cells_per_axis().iter().sum::<usize>().max(4);
    let mut band_rounds = 0usize;
    loop {
        let band = if band_rounds == 0 {
            None
        } else {
            Some(dilate_within(region, &seeds, band_rounds))
        };
        let Some(main) = route(region, open_int, z, w, band.as_ref())? else {
            band_rounds = if band_rounds == 0 { 2 } else { band_rounds * 2 };
            if band_rounds > max_band {
                return Err(Error::Contract(
                    "no corridor admits a replacement path for a glued stretch".into(),
                ));
            }
            continue;
        };

        let mut absorbed = enclosed_between(grid, &arc_verts, &main.cells);
        for c in &main.cells {
            absorbed.insert(*c);
        }
        let mut bridges = Vec::new();
        let mut pockets = Vec::new();
        let mut ok = true;
        for &(p, q) in &stretch.gaps {
            let zk = face(p - 1).1;
            let wk = face(q + 1).1;
            let Some(side) = route(region, open_int, zk, wk, band.as_ref())? else {
                ok = false;
                break;
            };
            for c in &side.cells {
                absorbed.insert(*c);
            }
            let sub_verts: Vec<[usize; 2]> = (p - 1..=q + 2).map(vert).collect();
            let mut pocket = enclosed_between(grid, &sub_verts, &side.cells);
            // The bridge path itself becomes the new boundary, so its
            // interior cells stay outside the extension; only the two
            // endpoints, which splice into the glued strip, are kept. When
            // a pocket opens onto the domain boundary this is what keeps
            // the rebuilt boundary off the mouth faces.
            if side.cells.len() > 2 {
                for c in &side.cells[1..side.cells.len() - 1] {
                    pocket.insert(*c);
                }
            }
            bridges.push(BridgeReport {
                faces: q - p + 1,
                path_length: side.length,
                carved_cells: pocket.count(),
            });
            pockets.push(pocket);
        }

        if ok {
            // Pockets behind bridged gaps are carved after every path is
            // laid down: a replacement path crossing a pocket mouth must
            // not resurrect cells the carve removes, or the new boundary
            // would land back on the domain boundary there.
            for pocket in &pockets {
                absorbed = absorbed.difference(pocket)?;
            }
            if absorbed.intersection(omega)?.is_empty() {
                let report = ArcReport {
                    faces: stretch.len,
                    overlap_faces: stretch.glued.len(),
                    z,
                    w,
                    path_length: main.length,
                    resolution_limited: main.limited,
                    added_cells: absorbed.count(),
                    bridges,
                };
                return Ok((absorbed, report));
            }
        }

        // The enclosure swallowed domain cells: a path ran the far way
        // around the region. Constrain the search to a corridor near the
        // stretch and widen it until the enclosure comes out clean.
        band_rounds = if band_rounds == 0 { 2 } else { band_rounds * 2 };
        if band_rounds > max_band {
            return Err(Error::Contract(
                "replacement paths keep enclosing domain cells".into(),
            ));
        }
    }
}

/// Push a Jordan domain `e` outward through the complement components of
/// the open domain `omega` wherever their boundaries are glued.
///
/// `e` must decompose into exactly one outer contour and no holes; any
/// further cycle is reported by sign and length. Components glued to the
/// contour along fewer than two faces are left alone. The result agrees
/// with `e` inside `omega` exactly.
pub fn strong_perimeter_extend_jordan(
    e: &CellSet,
    omega: &CellSet,
    components: &[ComplementComponent],
) -> Result<ExtensionResult> {
    let grid = e.grid();
    if grid != omega.grid() {
        return Err(Error::GridMismatch { context: "perimeter extension".into() });
    }
    let dec = jordan_decompose(e)?;
    if dec.plus_cycles.len() != 1 || !dec.minus_cycles.is_empty() {
        let extra = if dec.plus_cycles.len() > 1 {
            format!("a second outer cycle of length {}", dec.plus_cycles[1].length)
        } else if let Some(hole) = dec.minus_cycles.first() {
            format!("a hole cycle of length {}", hole.length)
        } else {
            "no outer cycle at all".to_string()
        };
        return Err(Error::InvalidInput(format!(
            "perimeter extension needs a single outer contour without holes, found {extra}"
        )));
    }
    let cycle = &dec.plus_cycles[0];

    let mut extended = e.clone();
    let mut arcs = Vec::new();
    for (ci, comp) in components.iter().enumerate() {
        if comp.cells.grid() != grid {
            return Err(Error::GridMismatch { context: "perimeter extension components".into() });
        }
        let region = component_region(comp, omega)?;
        let flags: Vec<bool> = cycle
            .faces()
            .iter()
            .map(|(ins, out)| omega.contains(*ins) && region.contains(*out))
            .collect();
        if flags.iter().filter(|&&f| f).count() < 2 {
            continue;
        }
        let open_int = region.open_interior();
        let mut reports = Vec::new();
        for (start, len) in greedy_arcs(&flags) {
            let stretch = collect_stretch(&flags, start, len);
            let (absorbed, report) =
                process_stretch(omega, &region, &open_int, cycle, &stretch)?;
            extended = extended.union(&absorbed)?;
            reports.push(report);
        }
        arcs.push(ComponentArcs { component: ci, arcs: reports });
    }

    if extended.intersection(omega)? != e.intersection(omega)? {
        return Err(Error::Contract(
            "extension changed the set inside the domain".into(),
        ));
    }

    finish(e, omega, extended, arcs)
}

fn finish(
    e: &CellSet,
    omega: &CellSet,
    extended: CellSet,
    arcs: Vec<ComponentArcs>,
) -> Result<ExtensionResult> {
    let perimeter_in = perimeter(e, Region::Set(omega))?;
    let perimeter_out = perimeter(&extended, Region::Whole)?;
    let overlap_length = shared_boundary_length(&extended, omega)?;
    let constant =
        if perimeter_in > 0.0 { perimeter_out / perimeter_in } else { f64::INFINITY };
    Ok(ExtensionResult { extended, perimeter_in, perimeter_out, overlap_length, constant, arcs })
}

/// Extend an arbitrary planar set `e` living inside `omega`, by way of a
/// baseline `e_prime` that agrees with `e` inside `omega` and may already
/// continue it outside. Defaults to `e` itself.
///
/// The baseline splits into signed contours; every contour's enclosed
/// region is pushed outward on its own and the results recombine as the
/// union of the extended outer regions minus the union of the extended
/// holes. The recombination agrees with `e` inside `omega` exactly.
pub fn strong_perimeter_extend_set(
    e: &CellSet,
    omega: &CellSet,
    components: &[ComplementComponent],
    baseline: Option<&CellSet>,
) -> Result<ExtensionResult> {
    let grid = e.grid();
    if grid != omega.grid() {
        return Err(Error::GridMismatch { context: "perimeter extension".into() });
    }
    let e_prime = baseline.unwrap_or(e);
    if &e_prime.intersection(omega)? != e {
        return Err(Error::Contract(
            "the baseline disagrees with the set inside the domain".into(),
        ));
    }

    let dec = jordan_decompose(e_prime)?;
    let mut positive = CellSet::empty(grid);
    let mut negative = CellSet::empty(grid);
    let mut arcs = Vec::new();
    for cyc in &dec.plus_cycles {
        let part = strong_perimeter_extend_jordan(cyc.interior(), omega, components)?;
        positive = positive.union(&part.extended)?;
        arcs.extend(part.arcs);
    }
    for cyc in &dec.minus_cycles {
        let part = strong_perimeter_extend_jordan(cyc.interior(), omega, components)?;
        negative = negative.union(&part.extended)?;
        arcs.extend(part.arcs);
    }
    let extended = positive.difference(&negative)?;

    if &extended.intersection(omega)? != e {
        return Err(Error::Contract(
            "recombined extension changed the set inside the domain".into(),
        ));
    }
    finish(e, omega, extended, arcs)
}

/// JSON view of an extension outcome: the headline lengths and the
/// per-component rerouting summaries.
pub fn extension_to_json(res: &ExtensionResult) -> serde_json::Value {
    json!({
        "perimeter_in": res.perimeter_in,
        "perimeter_out": res.perimeter_out,
        "overlap_length": res.overlap_length,
        "constant": res.constant,
        "extended_cells": res.extended.count(),
        "per_component": res.arcs.iter().map(|ca| {
            json!({
                "component": ca.component,
                "arcs": ca.arcs.iter().map(|a| {
                    json!({
                        "faces": a.faces,
                        "overlap_faces": a.overlap_faces,
                        "z": [a.z.0[0], a.z.0[1]],
                        "w": [a.w.0[0], a.w.0[1]],
                        "path_length": a.path_length,
                        "resolution_limited": a.resolution_limited,
                        "added_cells": a.added_cells,
                        "bridges": a.bridges.iter().map(|b| {
                            json!({
                                "faces": b.faces,
                                "path_length": b.path_length,
                                "carved_cells": b.carved_cells,
                            })
                        }).collect::<Vec<_>>(),
                    })
                }).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    })
}
