//! Colour-Names descriptor: every RGB value maps through a 32768-row lookup
//! table of 10 color-name probabilities, averaged per 4×4 cell.
//!
//! Table row layout (channel order): black, blue, grey, green, orange, pink,
//! purple, red, white, yellow. Rows are indexed by
//! `floor(R/8) + 32·floor(G/8) + 1024·floor(B/8)`.
//!
//! The canonical table ships as a repo asset (`assets/colornames.bin`): raw
//! little-endian IEEE-754 f32, 32768 rows × 10 columns, no header, exactly
//! 1 310 720 bytes. A CSV loader (one row per line, 10 comma-separated
//! values) is kept as a fallback for externally supplied tables.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::features::{FeatureTensor, ImagePatch, CELL};
use crate::spectral::RealPlane;

pub const COLOR_NAME_CHANNELS: usize = 10;
const TABLE_ROWS: usize = 32768;

/// Prototype RGB value per color name, in the row layout order.
const PROTOTYPES: [[f64; 3]; COLOR_NAME_CHANNELS] = [
    [0.0, 0.0, 0.0],       // black
    [0.0, 0.0, 255.0],     // blue
    [128.0, 128.0, 128.0], // grey
    [0.0, 128.0, 0.0],     // green
    [255.0, 128.0, 0.0],   // orange
    [255.0, 160.0, 192.0], // pink
    [128.0, 0.0, 128.0],   // purple
    [255.0, 0.0, 0.0],     // red
    [255.0, 255.0, 255.0], // white
    [255.0, 255.0, 0.0],   // yellow
];

/// Softness of the prototype assignment, in 8-bit intensity units.
const ASSIGN_SIGMA: f64 = 55.0;

/// Probability lookup table: each row sums to 1, entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorNamesTable {
    rows: Vec<[f32; COLOR_NAME_CHANNELS]>,
}

static TABLE_OVERRIDE: OnceLock<ColorNamesTable> = OnceLock::new();

impl ColorNamesTable {
    /// The table embedded from the repo asset, parsed once; an installed
    /// override takes precedence.
    pub fn builtin() -> &'static ColorNamesTable {
        if let Some(table) = TABLE_OVERRIDE.get() {
            return table;
        }
        static TABLE: OnceLock<ColorNamesTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            ColorNamesTable::from_binary_bytes(include_bytes!("../../assets/colornames.bin"))
                .expect("embedded color-names asset is malformed")
        })
    }

    /// Replaces the embedded table for the rest of the process (the CLI
    /// installs the `LADCF_CN_TABLE` file through this). Install before any
    /// tracking starts; a second install fails.
    pub fn install_override(table: ColorNamesTable) -> Result<()> {
        table.validate()?;
        TABLE_OVERRIDE
            .set(table)
            .map_err(|_| Error::Config("a color-names override is already installed".into()))
    }

    /// Regenerates the canonical table from the prototypes: soft assignment
    /// `p_k ∝ exp(−‖c − proto_k‖² / (2σ²))` evaluated at each quantization
    /// bin's center, normalized to sum 1.
    pub fn generate_prototype_table() -> ColorNamesTable {
        let mut rows = Vec::with_capacity(TABLE_ROWS);
        for idx in 0..TABLE_ROWS {
            let r = (idx % 32) as f64 * 8.0 + 3.5;
            let g = ((idx / 32) % 32) as f64 * 8.0 + 3.5;
            let b = ((idx / 1024) % 32) as f64 * 8.0 + 3.5;
            let mut weights = [0.0f64; COLOR_NAME_CHANNELS];
            let mut sum = 0.0;
            for (k, proto) in PROTOTYPES.iter().enumerate() {
                let dr = r - proto[0];
                let dg = g - proto[1];
                let db = b - proto[2];
                let d2 = dr * dr + dg * dg + db * db;
                let w = (-d2 / (2.0 * ASSIGN_SIGMA * ASSIGN_SIGMA)).exp();
                weights[k] = w;
                sum += w;
            }
            let mut row = [0.0f32; COLOR_NAME_CHANNELS];
            for (dst, w) in row.iter_mut().zip(weights) {
                *dst = (w / sum) as f32;
            }
            rows.push(row);
        }
        ColorNamesTable { rows }
    }

    /// Parses the raw little-endian f32 binary layout.
    pub fn from_binary_bytes(bytes: &[u8]) -> Result<ColorNamesTable> {
        let expect = TABLE_ROWS * COLOR_NAME_CHANNELS * 4;
        if bytes.len() != expect {
            return Err(Error::InvalidInput(format!(
                "color-names binary must be exactly {expect} bytes, got {}",
                bytes.len()
            )));
        }
        let mut rows = Vec::with_capacity(TABLE_ROWS);
        for chunk in bytes.chunks_exact(COLOR_NAME_CHANNELS * 4) {
            let mut row = [0.0f32; COLOR_NAME_CHANNELS];
            for (k, v) in chunk.chunks_exact(4).enumerate() {
                row[k] = f32::from_le_bytes([v[0], v[1], v[2], v[3]]);
            }
            rows.push(row);
        }
        let table = ColorNamesTable { rows };
        table.validate()?;
        Ok(table)
    }

    pub fn load_binary(path: &Path) -> Result<ColorNamesTable> {
        Self::from_binary_bytes(&std::fs::read(path)?)
    }

    /// CSV fallback: 32768 lines of 10 comma-separated floats.
    pub fn load_csv(path: &Path) -> Result<ColorNamesTable> {
        let file = std::fs::File::open(path)?;
        let mut rows = Vec::with_capacity(TABLE_ROWS);
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut row = [0.0f32; COLOR_NAME_CHANNELS];
            let mut fields = line.split(',');
            for (k, slot) in row.iter_mut().enumerate() {
                let field = fields.next().ok_or_else(|| {
                    Error::InvalidInput(format!("color-names csv line {}: missing column {k}", lineno + 1))
                })?;
                *slot = field.trim().parse::<f32>().map_err(|e| {
                    Error::InvalidInput(format!("color-names csv line {}: {e}", lineno + 1))
                })?;
            }
            if fields.next().is_some() {
                return Err(Error::InvalidInput(format!(
                    "color-names csv line {}: more than {COLOR_NAME_CHANNELS} columns",
                    lineno + 1
                )));
            }
            rows.push(row);
        }
        if rows.len() != TABLE_ROWS {
            return Err(Error::InvalidInput(format!(
                "color-names csv must have {TABLE_ROWS} rows, got {}",
                rows.len()
            )));
        }
        let table = ColorNamesTable { rows };
        table.validate()?;
        Ok(table)
    }

    /// Loads `path` as binary when it has the exact binary size, as CSV
    /// otherwise.
    pub fn load(path: &Path) -> Result<ColorNamesTable> {
        let meta = std::fs::metadata(path)?;
        if meta.len() == (TABLE_ROWS * COLOR_NAME_CHANNELS * 4) as u64 {
            Self::load_binary(path)
        } else {
            Self::load_csv(path)
        }
    }

    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        for row in &self.rows {
            for v in row {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for v in row {
                if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "color-names table row {i} holds out-of-range value {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn row(&self, r: u8, g: u8, b: u8) -> &[f32; COLOR_NAME_CHANNELS] {
        let idx = (r as usize >> 3) + 32 * (g as usize >> 3) + 1024 * (b as usize >> 3);
        &self.rows[idx]
    }
}

/// Averages the 10 name probabilities over each 4×4 cell. Same grid and
/// truncation rule as HOG, so the planes stack directly.
pub fn extract_colornames(patch: &ImagePatch, table: &ColorNamesTable) -> Result<FeatureTensor> {
    let side = patch.side() as usize;
    let cells = side / CELL;
    let mut planes = vec![RealPlane::zeros(cells)?; COLOR_NAME_CHANNELS];
    let inv_area = 1.0 / (CELL * CELL) as f64;
    for cy in 0..cells {
        for cx in 0..cells {
            let mut acc = [0.0f64; COLOR_NAME_CHANNELS];
            for py in cy * CELL..(cy + 1) * CELL {
                for px in cx * CELL..(cx + 1) * CELL {
                    let p = patch.pixels.get_pixel(px as u32, py as u32);
                    let row = table.row(p[0], p[1], p[2]);
                    for (a, v) in acc.iter_mut().zip(row) {
                        *a += *v as f64;
                    }
                }
            }
            for (k, a) in acc.iter().enumerate() {
                planes[k][(cy, cx)] = a * inv_area;
            }
        }
    }
    FeatureTensor::new(planes)
}
