//! Feature extraction: search-window cropping, bilinear resizing, and the
//! HOG + Colour-Names descriptor stack used by the tracker.
//!
//! All descriptors are computed on a 4-pixel cell grid; a patch of side `n`
//! yields a `floor(n/4) × floor(n/4)` feature plane per channel (sides are
//! truncated down to whole cells). Channel layout of the assembled tensor:
//! 31 HOG planes first, then 10 Colour-Names planes.

mod colornames;
mod hog;

pub use colornames::{extract_colornames, ColorNamesTable, COLOR_NAME_CHANNELS};
pub use hog::{extract_hog, HOG_CHANNELS};

use image::RgbImage;

use crate::error::{Error, Result};
use crate::spectral::RealPlane;

/// Pixel side of one descriptor cell.
pub const CELL: usize = 4;

/// Total channels in the assembled descriptor stack.
pub const TOTAL_CHANNELS: usize = HOG_CHANNELS + COLOR_NAME_CHANNELS;

/// An RGB crop taken from a frame. Grayscale sources are replicated to three
/// identical channels at load time, so all descriptor code sees RGB.
#[derive(Debug, Clone)]
pub struct ImagePatch {
    pub pixels: RgbImage,
    /// Frame the crop came from, for bookkeeping in overlays and logs.
    pub frame_index: usize,
    /// Top-left corner of the crop in frame coordinates; may be negative
    /// when the window hangs off the frame edge.
    pub origin: (i64, i64),
}

impl ImagePatch {
    pub fn new(pixels: RgbImage, frame_index: usize, origin: (i64, i64)) -> Result<Self> {
        if pixels.width() != pixels.height() {
            return Err(Error::ShapeMismatch(format!(
                "patch {}×{} is not square",
                pixels.width(),
                pixels.height()
            )));
        }
        if pixels.width() < 8 {
            return Err(Error::InvalidInput(format!(
                "patch side {} is below the 8-pixel minimum",
                pixels.width()
            )));
        }
        Ok(Self { pixels, frame_index, origin })
    }

    pub fn side(&self) -> u32 {
        self.pixels.width()
    }
}

/// Feature stack: `channels` planes of identical size `D×D`.
#[derive(Debug, Clone)]
pub struct FeatureTensor {
    planes: Vec<RealPlane>,
}

impl FeatureTensor {
    pub fn new(planes: Vec<RealPlane>) -> Result<Self> {
        let Some(first) = planes.first() else {
            return Err(Error::InvalidInput("feature tensor needs at least one channel".into()));
        };
        let size = first.size();
        if planes.iter().any(|p| p.size() != size) {
            return Err(Error::ShapeMismatch("feature channels differ in size".into()));
        }
        Ok(Self { planes })
    }

    pub fn size(&self) -> usize {
        self.planes[0].size()
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn planes(&self) -> &[RealPlane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<RealPlane> {
        self.planes
    }
}

/// Crops a square window of side `side` centered on `center` (sub-pixel
/// frame coordinates), replicating edge pixels where the window leaves the
/// frame. The crop grid is anchored at `round(center) − side/2`.
pub fn extract_search_window(
    frame: &RgbImage,
    frame_index: usize,
    center: (f64, f64),
    side: u32,
) -> Result<ImagePatch> {
    if side < 8 {
        return Err(Error::InvalidInput(format!("window side {side} is below the 8-pixel minimum")));
    }
    if !(center.0.is_finite() && center.1.is_finite()) {
        return Err(Error::InvalidInput("non-finite window center".into()));
    }
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let x0 = (center.0.round() as i64) - (side as i64) / 2;
    let y0 = (center.1.round() as i64) - (side as i64) / 2;
    let mut out = RgbImage::new(side, side);
    for y in 0..side as i64 {
        let sy = (y0 + y).clamp(0, h - 1) as u32;
        for x in 0..side as i64 {
            let sx = (x0 + x).clamp(0, w - 1) as u32;
            out.put_pixel(x as u32, y as u32, *frame.get_pixel(sx, sy));
        }
    }
    ImagePatch::new(out, frame_index, (x0, y0))
}

/// Bilinear resize to `out_side × out_side` with half-pixel centers
/// (source coordinate `(dst + 0.5)·scale − 0.5`, clamped at the borders).
/// Same-size calls return the input bit-identically.
pub fn resize_bilinear(patch: &ImagePatch, out_side: u32) -> Result<ImagePatch> {
    if out_side < 8 {
        return Err(Error::InvalidInput(format!("resize target {out_side} is below the 8-pixel minimum")));
    }
    let in_side = patch.side();
    if in_side == out_side {
        return Ok(patch.clone());
    }
    let scale = in_side as f64 / out_side as f64;
    let src = &patch.pixels;
    let max = (in_side - 1) as f64;
    let mut out = RgbImage::new(out_side, out_side);
    for y in 0..out_side {
        let fy = ((y as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
        let y0 = fy.floor() as u32;
        let y1 = (y0 + 1).min(in_side - 1);
        let wy = fy - y0 as f64;
        for x in 0..out_side {
            let fx = ((x as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let x0 = fx.floor() as u32;
            let x1 = (x0 + 1).min(in_side - 1);
            let wx = fx - x0 as f64;
            let mut channels = [0u8; 3];
            for (c, out_c) in channels.iter_mut().enumerate() {
                let p00 = src.get_pixel(x0, y0)[c] as f64;
                let p01 = src.get_pixel(x1, y0)[c] as f64;
                let p10 = src.get_pixel(x0, y1)[c] as f64;
                let p11 = src.get_pixel(x1, y1)[c] as f64;
                let top = p00 + (p01 - p00) * wx;
                let bottom = p10 + (p11 - p10) * wx;
                *out_c = (top + (bottom - top) * wy).round().clamp(0.0, 255.0) as u8;
            }
            out.put_pixel(x, y, image::Rgb(channels));
        }
    }
    ImagePatch::new(out, patch.frame_index, patch.origin)
}

/// Stacks HOG and Colour-Names planes and multiplies every channel by the
/// window plane. Pass an all-ones plane to disable windowing.
pub fn assemble(hog: FeatureTensor, cn: FeatureTensor, window: &RealPlane) -> Result<FeatureTensor> {
    if hog.size() != cn.size() || hog.size() != window.size() {
        return Err(Error::ShapeMismatch(format!(
            "assemble: hog {}, colournames {}, window {}",
            hog.size(),
            cn.size(),
            window.size()
        )));
    }
    let mut planes = hog.into_planes();
    planes.extend(cn.into_planes());
    for plane in &mut planes {
        for (v, w) in plane.data_mut().iter_mut().zip(window.data()) {
            *v *= w;
        }
    }
    FeatureTensor::new(planes)
}

/// Full descriptor pipeline for one patch: HOG + Colour-Names, windowed.
pub fn extract_features(
    patch: &ImagePatch,
    table: &ColorNamesTable,
    window: &RealPlane,
) -> Result<FeatureTensor> {
    let hog = extract_hog(patch)?;
    let cn = extract_colornames(patch, table)?;
    assemble(hog, cn, window)
}
