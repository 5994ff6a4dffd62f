//! Space-time rasters as binary PPM (P6) images.
//!
//! Row `k` is the `k`-th snapshot, so time runs downwards. Colors map
//! through [`PALETTE`]; colors past its end cycle through it again.

use std::io::Write;

use crate::error::{CpsError, Result};
use crate::lattice::Coloring;

/// RGB triple for color `c` is `PALETTE[c % 8]`.
pub const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],   // 0 red
    [60, 180, 75],   // 1 green
    [0, 130, 200],   // 2 blue
    [255, 225, 25],  // 3 yellow
    [145, 30, 180],  // 4 purple
    [245, 130, 48],  // 5 orange
    [70, 240, 240],  // 6 cyan
    [128, 128, 128], // 7 grey
];

pub fn palette_rgb(color: u8) -> [u8; 3] {
    PALETTE[color as usize % PALETTE.len()]
}

/// Writes `rows` as a P6 image of width `rows[0].len()` and height
/// `rows.len()`.
pub fn render_spacetime<W: Write>(rows: &[Coloring], mut out: W) -> Result<()> {
    let width = rows.first().map_or(0, Coloring::len);
    for (index, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(CpsError::WidthMismatch { index, expected: width, got: row.len() });
        }
    }
    write!(out, "P6\n{} {}\n255\n", width, rows.len())?;
    let mut line = Vec::with_capacity(3 * width);
    for row in rows {
        line.clear();
        for &c in row.sites() {
            line.extend_from_slice(&palette_rgb(c));
        }
        out.write_all(&line)?;
    }
    out.flush()?;
    Ok(())
}
