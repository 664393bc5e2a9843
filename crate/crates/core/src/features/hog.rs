//! 31-channel HOG descriptor on a 4-pixel cell grid.
//!
//! The recipe, normative for both the production path and the test oracle:
//!
//! 1. Truncate the patch to whole cells; all later indices live inside the
//!    truncated region.
//! 2. Per pixel, centered differences `[−1, 0, 1]` per color channel with
//!    clamped indices; keep the channel with the largest `dx² + dy²`.
//! 3. Snap the gradient to one of 18 contrast-sensitive orientations by
//!    maximizing `|u_o·(dx, dy)|` over the 9 directions `u_o =
//!    (cos(oπ/9), sin(oπ/9))`; a negative dot product selects bin `o + 9`.
//! 4. Splat the gradient magnitude into the 4 nearest cell histograms with
//!    bilinear weights (pixel center at `(x+0.5, y+0.5)`, cell centers at
//!    `4·(c+0.5)`), dropping contributions that fall off the grid.
//! 5. Cell energy = Σ over the 9 insensitive sums `(h[o]+h[o+9])²`.
//! 6. Per cell, 4 block norms over the 2×2 cell neighborhoods toward each
//!    diagonal, neighbor indices clamped at the grid border, `ε = 1e-4`
//!    inside the square root.
//! 7. Outputs: 18 sensitive channels `0.5·Σ_b min(h·n_b, 0.2)`, then 9
//!    insensitive ones over `h[o]+h[o+9]`, then 4 texture-energy channels
//!    `(1/√18)·T_b` where `T_b` sums the clipped sensitive values per block.

use crate::error::Result;
use crate::features::{FeatureTensor, ImagePatch, CELL};
use crate::spectral::RealPlane;

pub const HOG_CHANNELS: usize = 31;

const ORIENTATIONS: usize = 9;
const CLIP: f64 = 0.2;
const BLOCK_EPS: f64 = 1e-4;
/// 1/√18, the texture-channel scale.
const TEXTURE_SCALE: f64 = 0.235_702_260_395_515_84;

/// Per-pixel gradient: magnitude and snapped orientation bin in `0..18`.
fn pixel_gradient(patch: &ImagePatch, trunc: usize, x: usize, y: usize) -> (f64, usize) {
    let img = &patch.pixels;
    let clamp = |v: i64| v.clamp(0, trunc as i64 - 1) as u32;
    let mut best_mag2 = -1.0;
    let (mut dx, mut dy) = (0.0, 0.0);
    for c in 0..3 {
        let cdx = img.get_pixel(clamp(x as i64 + 1), y as u32)[c] as f64
            - img.get_pixel(clamp(x as i64 - 1), y as u32)[c] as f64;
        let cdy = img.get_pixel(x as u32, clamp(y as i64 + 1))[c] as f64
            - img.get_pixel(x as u32, clamp(y as i64 - 1))[c] as f64;
        let mag2 = cdx * cdx + cdy * cdy;
        if mag2 > best_mag2 {
            best_mag2 = mag2;
            dx = cdx;
            dy = cdy;
        }
    }
    let mut best_dot = 0.0;
    let mut bin = 0usize;
    for o in 0..ORIENTATIONS {
        let angle = o as f64 * std::f64::consts::PI / ORIENTATIONS as f64;
        let dot = angle.cos() * dx + angle.sin() * dy;
        if dot > best_dot {
            best_dot = dot;
            bin = o;
        } else if -dot > best_dot {
            best_dot = -dot;
            bin = o + ORIENTATIONS;
        }
    }
    (best_mag2.max(0.0).sqrt(), bin)
}

/// Computes the 31-plane HOG stack of a square patch. The output grid is
/// `side/4 × side/4` with the fractional remainder of the side truncated.
pub fn extract_hog(patch: &ImagePatch) -> Result<FeatureTensor> {
    let side = patch.side() as usize;
    let cells = side / CELL;
    let trunc = cells * CELL;

    // Step 2-4: orientation histograms, 18 bins per cell.
    let mut hist = vec![0.0f64; cells * cells * 18];
    let mut hist_at = |cy: i64, cx: i64, o: usize, v: f64| {
        if cy >= 0 && cx >= 0 && (cy as usize) < cells && (cx as usize) < cells {
            hist[(cy as usize * cells + cx as usize) * 18 + o] += v;
        }
    };
    for y in 0..trunc {
        for x in 0..trunc {
            let (mag, bin) = pixel_gradient(patch, trunc, x, y);
            let xp = (x as f64 + 0.5) / CELL as f64 - 0.5;
            let yp = (y as f64 + 0.5) / CELL as f64 - 0.5;
            let ix = xp.floor() as i64;
            let iy = yp.floor() as i64;
            let vx = xp - ix as f64;
            let vy = yp - iy as f64;
            hist_at(iy, ix, bin, (1.0 - vx) * (1.0 - vy) * mag);
            hist_at(iy, ix + 1, bin, vx * (1.0 - vy) * mag);
            hist_at(iy + 1, ix, bin, (1.0 - vx) * vy * mag);
            hist_at(iy + 1, ix + 1, bin, vx * vy * mag);
        }
    }

    // Step 5: insensitive energy per cell.
    let mut energy = vec![0.0f64; cells * cells];
    for cy in 0..cells {
        for cx in 0..cells {
            let base = (cy * cells + cx) * 18;
            let mut e = 0.0;
            for o in 0..ORIENTATIONS {
                let s = hist[base + o] + hist[base + o + ORIENTATIONS];
                e += s * s;
            }
            energy[cy * cells + cx] = e;
        }
    }
    let energy_at = |cy: i64, cx: i64| -> f64 {
        let cy = cy.clamp(0, cells as i64 - 1) as usize;
        let cx = cx.clamp(0, cells as i64 - 1) as usize;
        energy[cy * cells + cx]
    };

    // Step 6-7: normalized, clipped features.
    let mut planes = vec![RealPlane::zeros(cells)?; HOG_CHANNELS];
    for cy in 0..cells as i64 {
        for cx in 0..cells as i64 {
            let block = |dy: i64, dx: i64| -> f64 {
                let sum = energy_at(cy, cx)
                    + energy_at(cy, cx + dx)
                    + energy_at(cy + dy, cx)
                    + energy_at(cy + dy, cx + dx);
                1.0 / (sum + BLOCK_EPS).sqrt()
            };
            let norms = [block(1, 1), block(-1, 1), block(1, -1), block(-1, -1)];
            let base = (cy as usize * cells + cx as usize) * 18;
            let idx = (cy as usize, cx as usize);
            let mut texture = [0.0f64; 4];
            for o in 0..18 {
                let h = hist[base + o];
                let mut acc = 0.0;
                for (b, n) in norms.iter().enumerate() {
                    let clipped = (h * n).min(CLIP);
                    acc += clipped;
                    texture[b] += clipped;
                }
                planes[o][idx] = 0.5 * acc;
            }
            for o in 0..ORIENTATIONS {
                let s = hist[base + o] + hist[base + o + ORIENTATIONS];
                let acc: f64 = norms.iter().map(|n| (s * n).min(CLIP)).sum();
                planes[18 + o][idx] = 0.5 * acc;
            }
            for b in 0..4 {
                planes[27 + b][idx] = TEXTURE_SCALE * texture[b];
            }
        }
    }
    FeatureTensor::new(planes)
}
