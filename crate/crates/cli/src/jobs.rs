//! Subcommand bodies: build inputs, run the library, collect flat metrics
//! and artifact payloads. Everything here is deterministic for a fixed
//! argument list; file writing stays in the caller.

use std::collections::BTreeMap;

use perigrid::coarea::{coarea_check, distinct_values, level_profile};
use perigrid::components::complement_components;
use perigrid::density::{density_at, measure_density_scan};
use perigrid::gallery::{build, named_set, GalleryDomain, GalleryKind};
use perigrid::io;
use perigrid::measure::{perimeter, tv_value};
use perigrid::planar::{
    decomposition_to_json, decomposition_to_svg, extension_to_json, hset_report,
    jordan_decompose, strong_perimeter_extend_set,
};
use perigrid::whitney::{
    boundary_cells, collar_variation_profile, smooth_bv, whitney_decompose,
};
use perigrid::{Adjacency, Error, Grid, GridFunction, Region, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named functions available to `smooth` and `coarea`, all valued in [0, 1].
pub const FUNCTIONS: [&str; 4] = ["ramp", "radial", "bands", "checker"];

/// Named subsets available to `jordan`, `smooth`, and `extend`.
pub const SETS: [&str; 3] = ["left-half", "west-of-slit", "lower-half"];

/// Invariant suites for `verify`.
pub const SUITES: [&str; 4] = ["coarea", "whitney", "jordan", "density"];

/// The library-facing subcommands `sweep` can repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Gallery,
    Decompose,
    Jordan,
    Smooth,
    Coarea,
    Extend,
}

impl Action {
    pub fn parse(name: &str) -> Option<Action> {
        Some(match name {
            "gallery" => Action::Gallery,
            "decompose" => Action::Decompose,
            "jordan" => Action::Jordan,
            "smooth" => Action::Smooth,
            "coarea" => Action::Coarea,
            "extend" => Action::Extend,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Gallery => "gallery",
            Action::Decompose => "decompose",
            Action::Jordan => "jordan",
            Action::Smooth => "smooth",
            Action::Coarea => "coarea",
            Action::Extend => "extend",
        }
    }

    /// Whether the command runs the planar boundary machinery.
    pub fn needs_planar(self) -> bool {
        matches!(self, Action::Jordan | Action::Extend)
    }
}

/// One unit of work: a command applied to a built domain.
#[derive(Debug, Clone)]
pub struct Job {
    pub action: Action,
    pub kind: GalleryKind,
    pub level: u32,
    pub set: Option<String>,
    pub function: String,
    /// Mask file format for `gallery`: auto, pbm, png, or ascii.
    pub format: String,
}

/// Metrics plus artifact payloads (file name, bytes).
pub struct Outcome {
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome { metrics: BTreeMap::new(), artifacts: Vec::new() }
    }

    fn put(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }
}

/// A named scalar field on the grid.
pub fn named_function(grid: &Grid, name: &str) -> Result<GridFunction> {
    let dim = grid.dim();
    Ok(match name {
        // Linear in x; superlevel sets are half planes.
        "ramp" => GridFunction::from_world_fn(grid, |p| p[0]),
        // Distance from the box center, scaled so the far corner reads 1.
        "radial" => {
            let scale = (dim as f64).sqrt() / 2.0;
            GridFunction::from_world_fn(grid, move |p| {
                let r2: f64 = p[..dim].iter().map(|x| (x - 0.5) * (x - 0.5)).sum();
                r2.sqrt() / scale
            })
        }
        // Sixteen flat bands in x.
        "bands" => GridFunction::from_world_fn(grid, |p| {
            (p[0] * 16.0).floor().min(15.0) / 16.0
        }),
        // Alternating 0/1 cells, the worst case for variation bounds.
        "checker" => GridFunction::from_fn(grid, |c| {
            ((c.0[0] + c.0[1] + c.0[2]) % 2) as f64
        }),
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown function {name:?}; known: ramp, radial, bands, checker"
            )))
        }
    })
}

pub fn run_job(job: &Job) -> Result<Outcome> {
    let dom = build(job.kind, job.level)?;
    match job.action {
        Action::Gallery => gallery_outcome(&dom, job),
        Action::Decompose => decompose_outcome(&dom, job),
        Action::Jordan => jordan_outcome(&dom, job),
        Action::Smooth => smooth_outcome(&dom, job),
        Action::Coarea => coarea_outcome(&dom, job),
        Action::Extend => extend_outcome(&dom, job),
    }
}

fn stem(dom: &GalleryDomain, job: &Job) -> String {
    format!("{}_L{}", dom.kind.name(), job.level)
}

fn gallery_outcome(dom: &GalleryDomain, job: &Job) -> Result<Outcome> {
    let omega = &dom.omega;
    let mut out = Outcome::new();
    out.put("cells", omega.count() as f64);
    out.put("volume", omega.volume());
    out.put("perimeter", perimeter(omega, Region::Whole)?);
    out.put("boundary_cells", boundary_cells(omega).count() as f64);
    out.put("complement_components", complement_components(omega).len() as f64);

    let stem = stem(dom, job);
    let (ext, bytes) = match (job.format.as_str(), dom.grid().dim()) {
        ("pbm", _) | ("auto", 2) => ("pbm", io::to_pbm_p4(omega)?),
        ("png", _) => ("png", io::to_png(omega)?),
        _ => ("txt", io::to_ascii3d(omega).into_bytes()),
    };
    out.artifacts.push((format!("{stem}.{ext}"), bytes));
    out.artifacts.push((
        format!("{stem}_meta.json"),
        serde_json::to_vec_pretty(&dom.metadata_json()).expect("metadata serializes"),
    ));
    Ok(out)
}

fn decompose_outcome(dom: &GalleryDomain, job: &Job) -> Result<Outcome> {
    let w = whitney_decompose(&dom.omega)?;
    w.verify()?;
    let grid = dom.grid();
    let mut out = Outcome::new();
    out.put("cubes", w.cubes.len() as f64);
    out.put("floor_cells", w.floor_cell_count() as f64);
    out.put("floor_fraction", w.floor_fraction());
    let levels = w.cubes.iter().map(|q| q.level(grid));
    out.put("coarsest_cube_level", levels.clone().min().unwrap_or(0) as f64);
    out.put("finest_cube_level", levels.max().unwrap_or(0) as f64);
    out.artifacts.push((
        format!("{}_whitney.json", stem(dom, job)),
        serde_json::to_vec_pretty(&w.to_json()).expect("decomposition serializes"),
    ));
    Ok(out)
}

fn jordan_outcome(dom: &GalleryDomain, job: &Job) -> Result<Outcome> {
    let e = match &job.set {
        Some(name) => named_set(dom, name)?,
        None => dom.omega.clone(),
    };
    let dec = jordan_decompose(&e)?;
    let cycles = dec.plus_cycles.iter().chain(dec.minus_cycles.iter());
    let mut out = Outcome::new();
    out.put("plus_cycles", dec.plus_cycles.len() as f64);
    out.put("minus_cycles", dec.minus_cycles.len() as f64);
    out.put("parts", dec.parts.len() as f64);
    out.put("perimeter", perimeter(&e, Region::Whole)?);
    out.put("cycle_length_sum", cycles.clone().map(|c| c.length).sum());
    out.put("max_depth", cycles.map(|c| c.depth).max().unwrap_or(0) as f64);

    let stem = match &job.set {
        Some(name) => format!("{}_{}", stem(dom, job), name),
        None => stem(dom, job),
    };
    out.artifacts.push((
        format!("{stem}_jordan.json"),
        serde_json::to_vec_pretty(&decomposition_to_json(&dec))
            .expect("decomposition serializes"),
    ));
    out.artifacts
        .push((format!("{stem}_jordan.svg"), decomposition_to_svg(&dec).into_bytes()));
    Ok(out)
}

fn smooth_outcome(dom: &GalleryDomain, job: &Job) -> Result<Outcome> {
    let grid = dom.grid();
    let u = named_function(grid, &job.function)?;
    let b = &dom.omega;
    let a = match &job.set {
        Some(name) => named_set(dom, name)?,
        None => b.open_interior(),
    };
    let su = smooth_bv(&u, b, &a)?;

    let l1 = |v: &GridFunction| -> f64 {
        b.cells().map(|c| v.get(c).abs()).sum::<f64>() * grid.cell_volume()
    };
    let bv_in = l1(&u) + tv_value(&u, Region::Set(b))?;
    let bv_out = l1(&su) + tv_value(&su, Region::Set(b))?;

    let mut out = Outcome::new();
    out.put("bv_norm_in", bv_in);
    out.put("bv_norm_out", bv_out);
    out.put("bv_ratio", bv_out / bv_in);

    // Variation of the change in shrinking collars around the smoothing
    // boundary; a smooth original decays, a jump against the boundary
    // does not.
    let h = grid.spacing();
    let widths: Vec<f64> = [0.25, 0.125, 0.0625, 0.03125]
        .into_iter()
        .filter(|w| *w >= 2.0 * h)
        .collect();
    let d = GridFunction::from_fn(grid, |c| su.get(c) - u.get(c));
    let profile = collar_variation_profile(&d, &boundary_cells(&a), &widths)?;
    let first = profile.first().expect("at least one collar width").1;
    let last = profile.last().expect("at least one collar width").1;
    out.put("collar_first", first);
    out.put("collar_last", last);
    out.put("collar_ratio", if first > 0.0 { last / first } else { 0.0 });

    let mut csv = String::from("width,tv\n");
    for (w, tv) in &profile {
        csv.push_str(&format!("{w},{tv}\n"));
    }
    out.artifacts
        .push((format!("{}_{}_collar.csv", stem(dom, job), job.function), csv.into_bytes()));
    Ok(out)
}

fn coarea_outcome(dom: &GalleryDomain, job: &Job) -> Result<Outcome> {
    let u = named_function(dom.grid(), &job.function)?;
    let region = Region::Set(&dom.omega);
    let check = coarea_check(&u, region)?;
    let mut out = Outcome::new();
    out.put("tv", check.tv);
    out.put("integral", check.integral);
    out.put("rel_err", check.rel_err);

    let thresholds = distinct_values(&u, region)?;
    let profile = level_profile(&u, region, &thresholds)?;
    out.artifacts.push((
        format!("{}_{}_profile.csv", stem(dom, job), job.function),
        profile.to_csv().into_bytes(),
    ));
    Ok(out)
}

fn extend_outcome(dom: &GalleryDomain, job: &Job) -> Result<Outcome> {
    let set_name = job.set.as_deref().unwrap_or("left-half");
    let e = named_set(dom, set_name)?;
    let comps = complement_components(&dom.omega);
    let res = strong_perimeter_extend_set(&e, &dom.omega, &comps, None)?;
    let (hset, hset_length) = hset_report(&dom.omega, &comps)?;

    let mut out = Outcome::new();
    out.put("perimeter_in", res.perimeter_in);
    out.put("perimeter_out", res.perimeter_out);
    out.put("overlap_length", res.overlap_length);
    out.put("constant", res.constant);
    out.put("glued_components", res.arcs.len() as f64);
    out.put("arcs", res.arcs.iter().map(|c| c.arcs.len()).sum::<usize>() as f64);
    out.put(
        "bridges",
        res.arcs.iter().flat_map(|c| c.arcs.iter()).map(|a| a.bridges.len()).sum::<usize>()
            as f64,
    );
    out.put("added_cells", (res.extended.count() - e.count()) as f64);
    out.put("hairline_cells", hset.count() as f64);
    out.put("hairline_length", hset_length);

    let stem = format!("{}_{}", stem(dom, job), set_name);
    out.artifacts.push((format!("{stem}_extended.pbm"), io::to_pbm_p4(&res.extended)?));
    out.artifacts.push((
        format!("{stem}_extension.json"),
        serde_json::to_vec_pretty(&extension_to_json(&res)).expect("extension serializes"),
    ));
    Ok(out)
}

/// Run the requested invariant suites; any violation surfaces as an error.
pub fn run_verify(suite: &str, level: u32, count: usize, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new();
    let all = suite == "all";
    if all || suite == "coarea" {
        out.put("coarea_checks", verify_coarea(count, seed)? as f64);
    }
    if all || suite == "whitney" {
        out.put("whitney_checks", verify_whitney(level, count, seed)? as f64);
    }
    if all || suite == "jordan" {
        out.put("jordan_checks", verify_jordan(level, count, seed)? as f64);
    }
    if all || suite == "density" {
        out.put("density_checks", verify_density(level)? as f64);
    }
    Ok(out)
}

/// Layer-cake identity on random integer fields.
fn verify_coarea(count: usize, seed: u64) -> Result<usize> {
    let grid = Grid::square(4, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let vals: Vec<f64> =
            (0..grid.cell_count()).map(|_| rng.gen_range(0..16) as f64).collect();
        let u = GridFunction::from_fn(&grid, |c| vals[grid.flat(c)]);
        let check = coarea_check(&u, Region::Whole)?;
        if check.rel_err > 1e-9 {
            return Err(Error::Contract(format!(
                "field {i}: variation {} disagrees with the threshold integral {}",
                check.tv, check.integral
            )));
        }
    }
    Ok(count)
}

/// Cube laws on random polyomino domains.
fn verify_whitney(level: u32, count: usize, seed: u64) -> Result<usize> {
    for i in 0..count {
        let kind = GalleryKind::RandomPolyomino { seed: seed.wrapping_add(i as u64) };
        let dom = build(kind, level)?;
        whitney_decompose(&dom.omega)?.verify()?;
    }
    Ok(count)
}

/// Cycle bookkeeping on random polyomino sets: the nesting checks run at
/// construction, and total cycle length must equal the perimeter exactly.
fn verify_jordan(level: u32, count: usize, seed: u64) -> Result<usize> {
    for i in 0..count {
        let kind = GalleryKind::RandomPolyomino { seed: seed.wrapping_add(i as u64) };
        let dom = build(kind, level)?;
        let dec = jordan_decompose(&dom.omega)?;
        let total: f64 = dec
            .plus_cycles
            .iter()
            .chain(dec.minus_cycles.iter())
            .map(|c| c.length)
            .sum();
        let per = perimeter(&dom.omega, Region::Whole)?;
        if total != per {
            return Err(Error::Contract(format!(
                "set {i}: cycle lengths sum to {total} but the perimeter is {per}"
            )));
        }
    }
    Ok(count)
}

/// Ball densities: positive volume constant on the convex fixtures, and
/// set plus complement fills each ball cell for cell.
fn verify_density(level: u32) -> Result<usize> {
    let mut checks = 0usize;
    for kind in [GalleryKind::Square, GalleryKind::Disk] {
        let dom = build(kind, level)?;
        let omega = &dom.omega;
        let r = 16.0 * dom.grid().spacing();
        let scan = measure_density_scan(omega, r, 256)?;
        if !(scan.c_min > 0.0) {
            return Err(Error::Contract(format!(
                "{}: volume constant {} is not positive at {:?}",
                dom.kind.name(),
                scan.c_min,
                scan.worst
            )));
        }
        checks += scan.samples;
        let complement = omega.complement();
        for cell in omega.inner_boundary(Adjacency::Vertex).cells().step_by(64) {
            let a = density_at(omega, cell, r)?;
            let b = density_at(&complement, cell, r)?;
            if a.set_cells + b.set_cells != a.ball_cells {
                return Err(Error::Contract(format!(
                    "{}: set and complement cover {} of {} ball cells at {:?}",
                    dom.kind.name(),
                    a.set_cells + b.set_cells,
                    a.ball_cells,
                    cell
                )));
            }
            checks += 1;
        }
    }
    Ok(checks)
}
