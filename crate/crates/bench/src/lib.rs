//! Deterministic fixtures for the criterion benches: a noise-free textured
//! scene, and ready-to-learn solver inputs at a chosen grid size.

use image::RgbImage;
use ladcf::features::{extract_features, extract_search_window, ColorNamesTable, FeatureTensor};
use ladcf::solver::{init_first_frame, keep_count, SelectionMask, SolverConfig, SpectralFilter};
use ladcf::spectral::{gaussian_label, hann_window, RealPlane};
use ladcf::BoundingBox;

/// Flat mid-gray background with a prime-striped block. Deterministic and
/// edge-dense, so every benchmark iteration sees identical pixels.
pub fn textured_frame(canvas: u32, target: &BoundingBox) -> RgbImage {
    RgbImage::from_fn(canvas, canvas, |px, py| {
        let inside = (px as f64 + 0.5) >= target.x
            && (px as f64 + 0.5) < target.x + target.w
            && (py as f64 + 0.5) >= target.y
            && (py as f64 + 0.5) < target.y + target.h;
        if inside {
            let lx = px as i64 - target.x as i64;
            let ly = py as i64 - target.y as i64;
            let c = |a: i64, b: i64| (60 + (lx * a + ly * b).rem_euclid(180)) as u8;
            image::Rgb([c(37, 101), c(59, 17), c(13, 71)])
        } else {
            image::Rgb([40, 40, 40])
        }
    })
}

/// A scene whose centered target induces exactly grid side `d`: the 4× padded
/// window spans 5 target sides, and cells are 4 px, so side = 4d/5.
pub fn scene(d: usize) -> (RgbImage, BoundingBox) {
    let side = 4.0 * d as f64 / 5.0;
    let canvas = (5.0 * side) as u32 + 64;
    let half = canvas as f64 / 2.0;
    let target = BoundingBox::new(half - side / 2.0, half - side / 2.0, side, side).unwrap();
    (textured_frame(canvas, &target), target)
}

/// Windowed 41-channel sample, label, warm model, and config at grid side
/// `d`, extracted from [`scene`] exactly as the tracker would on frame 0.
pub fn learning_inputs(d: usize) -> (FeatureTensor, RealPlane, SpectralFilter, SolverConfig) {
    let (frame, target) = scene(d);
    let center = (target.x + target.w / 2.0, target.y + target.h / 2.0);
    let patch = extract_search_window(&frame, 0, center, (4 * d) as u32).unwrap();
    let window = hann_window(d).unwrap();
    let x = extract_features(&patch, ColorNamesTable::builtin(), &window).unwrap();
    let sigma = (target.w * target.h).sqrt() / 16.0 / 4.0;
    let y = gaussian_label(d, sigma).unwrap();
    let cfg = SolverConfig::default();
    let mask = SelectionMask::top_m(x.planes(), keep_count(d, cfg.keep_ratio)).unwrap();
    let model = init_first_frame(&x, &y, &mask, &cfg).unwrap();
    (x, y, model, cfg)
}
