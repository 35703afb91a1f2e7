//! Reading and writing cell masks.
//!
//! Three interchange forms: portable bitmaps (`P1` ASCII and `P4` packed) for
//! 2D masks, PNG (behind the `png` feature) for 2D masks, and a layered ASCII
//! text form for 3D masks. Loaded masks get the smallest dyadic level whose
//! unit box holds the raster, so spacing is always an exact power of two.
//!
//! Orientation: the first raster row is the top of the mask (largest `y`),
//! matching how image viewers display the files; layer 0 of the 3D form is
//! `z = 0`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, CellSet, Grid};

/// Guard against absurd rasters before allocating.
const MAX_AXIS: usize = 1 << 16;
const MAX_CELLS: usize = 1 << 26;

/// Smallest level whose dyadic box accommodates `max_axis` cells.
fn level_for(max_axis: usize) -> u32 {
    let mut level = 1u32;
    while (1usize << level) < max_axis {
        level += 1;
    }
    level
}

fn grid_for(dims: &[usize]) -> Result<Grid> {
    let max_axis = *dims.iter().max().unwrap();
    if max_axis > MAX_AXIS || dims.iter().product::<usize>() > MAX_CELLS {
        return Err(Error::InvalidInput(format!("raster of shape {dims:?} is too large")));
    }
    if dims.iter().any(|d| *d == 0) {
        return Err(Error::InvalidInput("raster has a zero-sized axis".into()));
    }
    let origin = vec![0.0; dims.len()];
    Grid::new(dims.len(), level_for(max_axis), dims, &origin)
}

struct Scanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(data: &'a [u8]) -> Scanner<'a> {
        Scanner { data, pos: 0 }
    }

    fn fail<T>(&self, message: &str) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.to_string() })
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    /// Skip whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(c) = self.bump() {
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        let mut v: usize = 0;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() {
                v = v
                    .checked_mul(10)
                    .and_then(|v| v.checked_add((b - b'0') as usize))
                    .ok_or(Error::Parse {
                        offset: start,
                        message: "integer overflows".into(),
                    })?;
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return self.fail("expected an unsigned integer");
        }
        Ok(v)
    }
}

/// Parse a portable bitmap (`P1` or `P4`). Bit 1 means the cell is in the set.
pub fn parse_pbm(data: &[u8]) -> Result<CellSet> {
    let mut s = Scanner::new(data);
    let magic = match (s.bump(), s.bump()) {
        (Some(b'P'), Some(b'1')) => b'1',
        (Some(b'P'), Some(b'4')) => b'4',
        _ => {
            return Err(Error::Parse {
                offset: 0,
                message: "not a portable bitmap (magic must be P1 or P4)".into(),
            })
        }
    };
    let width = s.next_uint()?;
    let height = s.next_uint()?;
    let grid = grid_for(&[width, height])?;
    let mut set = CellSet::empty(&grid);
    match magic {
        b'1' => {
            for row in 0..height {
                for x in 0..width {
                    s.skip_separators();
                    let bit = match s.bump() {
                        Some(b'0') => false,
                        Some(b'1') => true,
                        _ => {
                            s.pos = s.pos.saturating_sub(1);
                            return s.fail("expected a 0 or 1 pixel");
                        }
                    };
                    if bit {
                        set.insert(Cell::new2(x, height - 1 - row));
                    }
                }
            }
        }
        _ => {
            // One separator byte after the height, then packed rows.
            match s.bump() {
                Some(b) if b.is_ascii_whitespace() => {}
                _ => return s.fail("expected whitespace before packed pixel data"),
            }
            let stride = width.div_ceil(8);
            for row in 0..height {
                for bx in 0..stride {
                    let byte = match s.bump() {
                        Some(b) => b,
                        None => return s.fail("packed pixel data is truncated"),
                    };
                    for bit in 0..8 {
                        let x = bx * 8 + bit;
                        if x >= width {
                            break;
                        }
                        if byte & (0x80 >> bit) != 0 {
                            set.insert(Cell::new2(x, height - 1 - row));
                        }
                    }
                }
            }
        }
    }
    Ok(set)
}

/// Serialize a 2D mask as ASCII `P1`.
pub fn to_pbm_p1(set: &CellSet) -> Result<Vec<u8>> {
    let grid = set.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidInput("portable bitmaps hold 2D masks only".into()));
    }
    let (w, h) = (grid.cells_per_axis()[0], grid.cells_per_axis()[1]);
    let mut out = format!("P1\n{w} {h}\n").into_bytes();
    for row in 0..h {
        for x in 0..w {
            out.push(if set.contains(Cell::new2(x, h - 1 - row)) { b'1' } else { b'0' });
            out.push(if x + 1 == w { b'\n' } else { b' ' });
        }
    }
    Ok(out)
}

/// Serialize a 2D mask as packed `P4`.
pub fn to_pbm_p4(set: &CellSet) -> Result<Vec<u8>> {
    let grid = set.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidInput("portable bitmaps hold 2D masks only".into()));
    }
    let (w, h) = (grid.cells_per_axis()[0], grid.cells_per_axis()[1]);
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let stride = w.div_ceil(8);
    for row in 0..h {
        for bx in 0..stride {
            let mut byte = 0u8;
            for bit in 0..8 {
                let x = bx * 8 + bit;
                if x < w && set.contains(Cell::new2(x, h - 1 - row)) {
                    byte |= 0x80 >> bit;
                }
            }
            out.push(byte);
        }
    }
    Ok(out)
}

/// Parse the layered ASCII 3D form: `#` marks a cell, `.` an empty one, and a
/// blank line ends a layer. Layer 0 is `z = 0`; a single layer parses as a 2D
/// mask.
pub fn parse_ascii3d(data: &[u8]) -> Result<CellSet> {
    let text = std::str::from_utf8(data).map_err(|e| Error::Parse {
        offset: e.valid_up_to(),
        message: "mask text is not valid UTF-8".into(),
    })?;
    let mut layers: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut offsets: Vec<usize> = Vec::new();
    let mut pos = 0usize;
    for raw in text.split('\n') {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !current.is_empty() {
                layers.push(std::mem::take(&mut current));
            }
        } else {
            offsets.push(pos);
            current.push(line);
        }
        pos += raw.len() + 1;
    }
    if !current.is_empty() {
        layers.push(current);
    }
    if layers.is_empty() {
        return Err(Error::Parse { offset: 0, message: "mask text holds no layers".into() });
    }
    let height = layers[0].len();
    let width = layers[0][0].len();
    let depth = layers.len();
    let grid = if depth == 1 {
        grid_for(&[width, height])?
    } else {
        grid_for(&[width, height, depth])?
    };
    let mut set = CellSet::empty(&grid);
    let mut line_no = 0usize;
    for (z, layer) in layers.iter().enumerate() {
        if layer.len() != height {
            return Err(Error::Parse {
                offset: offsets[line_no],
                message: format!("layer {z} has {} rows, expected {height}", layer.len()),
            });
        }
        for (row, line) in layer.iter().enumerate() {
            let off = offsets[line_no];
            line_no += 1;
            if line.len() != width {
                return Err(Error::Parse {
                    offset: off,
                    message: format!("row has {} columns, expected {width}", line.len()),
                });
            }
            for (x, ch) in line.bytes().enumerate() {
                match ch {
                    b'#' => set.insert(Cell::new3(x, height - 1 - row, z)),
                    b'.' => {}
                    _ => {
                        return Err(Error::Parse {
                            offset: off + x,
                            message: format!("unexpected character {:?}", ch as char),
                        })
                    }
                }
            }
        }
    }
    Ok(set)
}

/// Serialize a mask as layered ASCII. 2D masks produce a single layer.
pub fn to_ascii3d(set: &CellSet) -> String {
    let grid = set.grid();
    let (w, h) = (grid.cells_per_axis()[0], grid.cells_per_axis()[1]);
    let depth = if grid.dim() == 3 { grid.cells_per_axis()[2] } else { 1 };
    let mut out = String::new();
    for z in 0..depth {
        if z > 0 {
            out.push('\n');
        }
        for row in 0..h {
            for x in 0..w {
                let c = Cell::new3(x, h - 1 - row, z);
                out.push(if set.contains(c) { '#' } else { '.' });
            }
            out.push('\n');
        }
    }
    out
}

/// Parse a PNG image; any pixel with nonzero luminance is in the set.
#[cfg(feature = "png")]
pub fn parse_png(data: &[u8]) -> Result<CellSet> {
    let img = image::load_from_memory_with_format(data, image::ImageFormat::Png)
        .map_err(|e| Error::Parse { offset: 0, message: format!("png decode: {e}") })?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let grid = grid_for(&[w, h])?;
    let mut set = CellSet::empty(&grid);
    for (x, row, p) in img.enumerate_pixels() {
        if p.0[0] > 0 {
            set.insert(Cell::new2(x as usize, h - 1 - row as usize));
        }
    }
    Ok(set)
}

/// Encode a 2D mask as a black-and-white PNG (white = in the set).
#[cfg(feature = "png")]
pub fn to_png(set: &CellSet) -> Result<Vec<u8>> {
    let grid = set.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidInput("png output holds 2D masks only".into()));
    }
    let (w, h) = (grid.cells_per_axis()[0], grid.cells_per_axis()[1]);
    let img = image::GrayImage::from_fn(w as u32, h as u32, |x, row| {
        let c = Cell::new2(x as usize, h - 1 - row as usize);
        image::Luma([if set.contains(c) { 255u8 } else { 0u8 }])
    });
    let mut out = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut out), image::ImageFormat::Png)
        .map_err(|e| Error::InvalidInput(format!("png encode: {e}")))?;
    Ok(out)
}

/// Parse a mask, deciding the format from the content: PBM magic, PNG
/// signature, or the layered ASCII form.
pub fn parse_mask(data: &[u8]) -> Result<CellSet> {
    if data.starts_with(b"P1") || data.starts_with(b"P4") {
        return parse_pbm(data);
    }
    if data.starts_with(b"\x89PNG") {
        #[cfg(feature = "png")]
        {
            return parse_png(data);
        }
        #[cfg(not(feature = "png"))]
        {
            return Err(Error::InvalidInput(
                "png support is not compiled in (enable the `png` feature)".into(),
            ));
        }
    }
    parse_ascii3d(data)
}

/// Load a mask file, deciding the format from the content.
pub fn load_mask(path: &Path) -> Result<CellSet> {
    let data = std::fs::read(path)?;
    parse_mask(&data)
}

/// Write a mask, deciding the format from the extension: `.pbm` (packed),
/// `.png` (if compiled in), anything else the layered ASCII form.
pub fn save_mask(path: &Path, set: &CellSet) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let bytes = match ext {
        "pbm" => to_pbm_p4(set)?,
        "png" => {
            #[cfg(feature = "png")]
            {
                to_png(set)?
            }
            #[cfg(not(feature = "png"))]
            {
                return Err(Error::InvalidInput(
                    "png support is not compiled in (enable the `png` feature)".into(),
                ));
            }
        }
        _ => to_ascii3d(set).into_bytes(),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}
