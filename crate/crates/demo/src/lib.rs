//! Pixel renderings of three pipelines for the browser page.
//!
//! Each export is a pure function from names and levels to an RGBA image
//! plus a JSON summary, so native tests exercise the full logic; the wasm
//! boundary only moves bytes. The planar gallery domains render with north
//! up and one pixel per cell.

use perigrid::components::complement_components;
use perigrid::gallery::{build, named_set, GalleryKind};
use perigrid::planar::{hset_report, jordan_decompose, strong_perimeter_extend_set};
use perigrid::whitney::whitney_decompose;
use perigrid::{CellSet, Grid};
use serde_json::json;
use wasm_bindgen::prelude::*;

const BACKGROUND: [u8; 4] = [248, 248, 246, 255];
const DOMAIN: [u8; 4] = [210, 214, 220, 255];
const FLOOR: [u8; 4] = [224, 122, 60, 255];
const CHAMBER: [u8; 4] = [54, 88, 148, 255];
const ADDED: [u8; 4] = [88, 160, 98, 255];
const HAIRLINE: [u8; 4] = [160, 60, 140, 255];
const OUTER_EDGE: [u8; 4] = [40, 60, 110, 255];
const HOLE_EDGE: [u8; 4] = [170, 48, 48, 255];

/// Fill palette for nesting parts, repeated past its length.
const PARTS: [[u8; 4]; 6] = [
    [166, 196, 226, 255],
    [196, 221, 186, 255],
    [236, 210, 170, 255],
    [216, 186, 216, 255],
    [180, 212, 212, 255],
    [226, 196, 186, 255],
];

/// An RGBA image with a JSON summary of what it shows.
#[wasm_bindgen]
#[derive(Debug)]
pub struct View {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    summary: String,
}

#[wasm_bindgen]
impl View {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Row-major RGBA bytes, top row first.
    pub fn pixels(&self) -> Vec<u8> {
        self.pixels.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Canvas {
    fn blank(grid: &Grid) -> Canvas {
        let (w, h) = (grid.cells_per_axis()[0], grid.cells_per_axis()[1]);
        let mut pixels = vec![0u8; w * h * 4];
        for p in pixels.chunks_exact_mut(4) {
            p.copy_from_slice(&BACKGROUND);
        }
        Canvas { width: w, height: h, pixels }
    }

    /// Paint one cell; the y axis flips so north is the top row.
    fn put(&mut self, x: usize, y: usize, color: [u8; 4]) {
        let row = self.height - 1 - y;
        let at = (row * self.width + x) * 4;
        self.pixels[at..at + 4].copy_from_slice(&color);
    }

    fn fill(&mut self, set: &CellSet, color: [u8; 4]) {
        for c in set.cells() {
            self.put(c.0[0], c.0[1], color);
        }
    }

    fn finish(self, summary: serde_json::Value) -> View {
        View {
            width: self.width as u32,
            height: self.height as u32,
            pixels: self.pixels,
            summary: summary.to_string(),
        }
    }
}

fn planar_domain(kind: &str, level: u32) -> Result<perigrid::gallery::GalleryDomain, String> {
    let kind = GalleryKind::parse(kind, 0).map_err(|e| e.to_string())?;
    let dom = build(kind, level).map_err(|e| e.to_string())?;
    if dom.grid().dim() != 2 {
        return Err(format!("{} is not planar; the page renders planar domains", kind.name()));
    }
    Ok(dom)
}

/// A gallery domain with its dyadic cube decomposition: cells tinted by
/// cube scale, resolution-floor cubes in orange.
pub fn domain_view(kind: &str, level: u32) -> Result<View, String> {
    let dom = planar_domain(kind, level)?;
    let grid = dom.grid();
    let dec = whitney_decompose(&dom.omega).map_err(|e| e.to_string())?;
    let mut canvas = Canvas::blank(grid);
    let mut floor_cells = 0usize;
    let mut coarsest = 0usize;
    for q in &dec.cubes {
        coarsest = coarsest.max(q.size_cells);
    }
    for q in &dec.cubes {
        let color = if q.at_resolution_floor {
            floor_cells += q.size_cells * q.size_cells;
            FLOOR
        } else {
            // Larger cubes darker: walk the gap to the floor shade by the
            // cube's dyadic scale rank.
            let rank = (coarsest / q.size_cells).trailing_zeros() as f32;
            let depth = (coarsest as f32).log2();
            let t = 1.0 - (rank / depth.max(1.0)).min(1.0) * 0.55;
            [
                (DOMAIN[0] as f32 * t) as u8,
                (DOMAIN[1] as f32 * t) as u8,
                (220.0 * t.max(0.62)) as u8,
                255,
            ]
        };
        for c in q.cells(grid) {
            canvas.put(c.0[0], c.0[1], color);
        }
    }
    let summary = json!({
        "kind": kind,
        "level": level,
        "cells": dom.omega.count(),
        "cubes": dec.cubes.len(),
        "floor_cells": floor_cells,
        "floor_fraction": dec.floor_fraction(),
    });
    Ok(canvas.finish(summary))
}

/// A cell set split into signed boundary cycles: nesting parts in pastel
/// fills, outer contours in blue, hole contours in red.
pub fn cycles_view(kind: &str, level: u32, set: Option<String>) -> Result<View, String> {
    let dom = planar_domain(kind, level)?;
    let e = match &set {
        Some(name) => named_set(&dom, name).map_err(|e| e.to_string())?,
        None => dom.omega.clone(),
    };
    let dec = jordan_decompose(&e).map_err(|e| e.to_string())?;
    let mut canvas = Canvas::blank(dom.grid());
    for (i, part) in dec.parts.iter().enumerate() {
        canvas.fill(part, PARTS[i % PARTS.len()]);
    }
    for cycle in dec.plus_cycles.iter().chain(dec.minus_cycles.iter()) {
        let color = if cycle.positive { OUTER_EDGE } else { HOLE_EDGE };
        for (inside, _) in cycle.faces() {
            canvas.put(inside.0[0], inside.0[1], color);
        }
    }
    let lengths: Vec<f64> = dec
        .plus_cycles
        .iter()
        .chain(dec.minus_cycles.iter())
        .map(|c| c.length)
        .collect();
    let summary = json!({
        "kind": kind,
        "level": level,
        "set": set,
        "outer_cycles": dec.plus_cycles.len(),
        "hole_cycles": dec.minus_cycles.len(),
        "parts": dec.parts.len(),
        "total_cycle_length": lengths.iter().sum::<f64>(),
        "cycle_lengths": lengths,
    });
    Ok(canvas.finish(summary))
}

/// The comb's western chamber pushed across the hairline boundary: the
/// domain in gray, the chamber in blue, cells gained outside in green, the
/// hairline shared boundary in purple.
pub fn extension_view(level: u32) -> Result<View, String> {
    let dom = planar_domain("comb_4_2", level)?;
    let e = named_set(&dom, "left-half").map_err(|e| e.to_string())?;
    let comps = complement_components(&dom.omega);
    let res =
        strong_perimeter_extend_set(&e, &dom.omega, &comps, None).map_err(|e| e.to_string())?;
    let (hairline, hairline_length) =
        hset_report(&dom.omega, &comps).map_err(|e| e.to_string())?;
    let added = res.extended.difference(&dom.omega).map_err(|e| e.to_string())?;
    let mut canvas = Canvas::blank(dom.grid());
    canvas.fill(&dom.omega, DOMAIN);
    canvas.fill(&e, CHAMBER);
    canvas.fill(&added, ADDED);
    canvas.fill(&hairline, HAIRLINE);
    let summary = json!({
        "level": level,
        "chamber_cells": e.count(),
        "added_cells": added.count(),
        "perimeter_in": res.perimeter_in,
        "perimeter_out": res.perimeter_out,
        "perimeter_ratio": res.constant,
        "overlap_length": res.overlap_length,
        "hairline_length": hairline_length,
    });
    Ok(canvas.finish(summary))
}

#[wasm_bindgen(js_name = domainView)]
pub fn domain_view_js(kind: &str, level: u32) -> Result<View, JsError> {
    domain_view(kind, level).map_err(|m| JsError::new(&m))
}

#[wasm_bindgen(js_name = cyclesView)]
pub fn cycles_view_js(kind: &str, level: u32, set: Option<String>) -> Result<View, JsError> {
    cycles_view(kind, level, set).map_err(|m| JsError::new(&m))
}

#[wasm_bindgen(js_name = extensionView)]
pub fn extension_view_js(level: u32) -> Result<View, JsError> {
    extension_view(level).map_err(|m| JsError::new(&m))
}
