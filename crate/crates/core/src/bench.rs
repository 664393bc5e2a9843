//! Dataset loading, the one-pass evaluation protocol, precision/success
//! metrics, and deterministic synthetic sequences for end-to-end tests.
//!
//! Metric conventions: the success curve is sampled at 101 thresholds
//! 0.00..1.00 and counts frames with IoU *strictly greater* than the
//! threshold, so a perfect trajectory scores AUC = 100/101 (the τ = 1 point
//! contributes zero by construction, a grid artifact rather than a bug). The
//! precision curve is sampled at integer distances 0..50 px and counts
//! center errors less than or equal to the threshold. Ground-truth entries
//! with degenerate area (out-of-view annotations) are excluded from every
//! denominator.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use image::RgbImage;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tracker::{BoundingBox, TrackerConfig, TrackerState};

/// Success thresholds: 0.00, 0.01, …, 1.00.
pub const SUCCESS_POINTS: usize = 101;
/// Precision thresholds: 0, 1, …, 50 pixels.
pub const PRECISION_POINTS: usize = 51;
/// Overlap precision is the success value at IoU 0.5.
pub const OP_THRESHOLD_INDEX: usize = 50;
/// Distance precision is the precision value at 20 pixels.
pub const DP_THRESHOLD_INDEX: usize = 20;

/// One annotated sequence on disk: ordered frame paths plus per-frame
/// ground truth (`None` marks an out-of-view or degenerate annotation).
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<PathBuf>,
    pub ground_truth: Vec<Option<BoundingBox>>,
    pub attributes: Vec<String>,
}

/// Predicted box per frame; always the same length as its sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub boxes: Vec<BoundingBox>,
}

/// Per-sequence metrics plus the measured tracking throughput.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SequenceReport {
    pub name: String,
    pub attributes: Vec<String>,
    /// Fraction of frames with center error ≤ d, d = 0..50 px.
    pub precision: Vec<f64>,
    /// Fraction of frames with IoU > τ, τ = 0.00..1.00.
    pub success: Vec<f64>,
    pub auc: f64,
    pub op: f64,
    pub dp: f64,
    pub fps: f64,
}

/// A sequence that failed to evaluate, with the reason.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FailureNote {
    pub sequence: String,
    pub detail: String,
}

/// Dataset-level results: per-sequence entries (name-sorted), failures, and
/// pointwise mean curves over the successful sequences.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub sequences: Vec<SequenceReport>,
    pub failures: Vec<FailureNote>,
    pub mean_precision: Vec<f64>,
    pub mean_success: Vec<f64>,
    pub mean_auc: f64,
    pub mean_op: f64,
    pub mean_dp: f64,
    pub mean_fps: f64,
}

/// Intersection-over-union of two boxes; disjoint or degenerate → 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let intersection = ix * iy;
    let union = a.area() + b.area() - intersection;
    if union <= 0.0 {
        return 0.0;
    }
    intersection / union
}

/// Euclidean distance between box centers, in pixels.
pub fn center_error(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

/// Curves and scalar summaries for one trajectory/ground-truth pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct Scoring {
    pub precision: Vec<f64>,
    pub success: Vec<f64>,
    pub auc: f64,
    pub op: f64,
    pub dp: f64,
}

/// Scores a trajectory against per-frame ground truth. `None` entries are
/// excluded from the denominators; at least one valid frame is required.
pub fn score_against(traj: &Trajectory, ground_truth: &[Option<BoundingBox>]) -> Result<Scoring> {
    if traj.boxes.len() != ground_truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "trajectory has {} boxes but ground truth has {} entries",
            traj.boxes.len(),
            ground_truth.len()
        )));
    }
    let pairs: Vec<(f64, f64)> = traj
        .boxes
        .iter()
        .zip(ground_truth)
        .filter_map(|(pred, gt)| gt.as_ref().map(|gt| (iou(pred, gt), center_error(pred, gt))))
        .collect();
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no valid ground-truth frames to score against".into()));
    }
    let n = pairs.len() as f64;
    let success: Vec<f64> = (0..SUCCESS_POINTS)
        .map(|i| {
            let tau = i as f64 / 100.0;
            pairs.iter().filter(|(overlap, _)| *overlap > tau).count() as f64 / n
        })
        .collect();
    let precision: Vec<f64> = (0..PRECISION_POINTS)
        .map(|d| {
            let limit = d as f64;
            pairs.iter().filter(|(_, err)| *err <= limit).count() as f64 / n
        })
        .collect();
    let auc = success.iter().sum::<f64>() / SUCCESS_POINTS as f64;
    let op = success[OP_THRESHOLD_INDEX];
    let dp = precision[DP_THRESHOLD_INDEX];
    Ok(Scoring { precision, success, auc, op, dp })
}

/// [`score_against`] wrapped with the sequence's identity; `fps` is left at
/// zero for the evaluation driver to fill in.
pub fn score(traj: &Trajectory, seq: &Sequence) -> Result<SequenceReport> {
    let scoring = score_against(traj, &seq.ground_truth)?;
    Ok(SequenceReport {
        name: seq.name.clone(),
        attributes: seq.attributes.clone(),
        precision: scoring.precision,
        success: scoring.success,
        auc: scoring.auc,
        op: scoring.op,
        dp: scoring.dp,
        fps: 0.0,
    })
}

fn load_error(path: &Path, detail: impl Into<String>) -> Error {
    Error::SequenceLoad { path: path.to_path_buf(), detail: detail.into() }
}

/// Loads an OTB-layout sequence: `img/` with numbered frames plus
/// `groundtruth_rect.txt` (comma, tab, or space separated; coordinates
/// 1-indexed in the file, converted to 0-indexed here). Annotations with
/// extent below one pixel load as `None`.
pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into());
    let img_dir = dir.join("img");
    if !img_dir.is_dir() {
        return Err(load_error(dir, "missing img/ directory"));
    }

    let mut frames: Vec<PathBuf> = fs::read_dir(&img_dir)
        .map_err(|e| load_error(&img_dir, e.to_string()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "jpg" | "jpeg" | "png" | "bmp"))
                .unwrap_or(false)
        })
        .collect();
    // Zero-padded OTB names sort lexicographically; fall back to numeric
    // order when every stem is a bare number without padding.
    let numeric: Option<Vec<u64>> = frames
        .iter()
        .map(|p| p.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse().ok()))
        .collect();
    if let Some(numbers) = numeric {
        let mut keyed: Vec<(u64, PathBuf)> = numbers.into_iter().zip(frames).collect();
        keyed.sort();
        frames = keyed.into_iter().map(|(_, p)| p).collect();
    } else {
        frames.sort();
    }

    let gt_path = dir.join("groundtruth_rect.txt");
    let gt_text = fs::read_to_string(&gt_path).map_err(|e| load_error(&gt_path, e.to_string()))?;
    let mut ground_truth = Vec::new();
    for (line_no, line) in gt_text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<f64> = trimmed
            .split([',', '\t', ' '])
            .filter(|f| !f.is_empty())
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| load_error(&gt_path, format!("line {}: {e}", line_no + 1)))?;
        if fields.len() != 4 {
            return Err(load_error(
                &gt_path,
                format!("line {}: expected 4 fields, got {}", line_no + 1, fields.len()),
            ));
        }
        let (x, y, w, h) = (fields[0] - 1.0, fields[1] - 1.0, fields[2], fields[3]);
        ground_truth.push(if w >= 1.0 && h >= 1.0 {
            Some(BoundingBox::new(x, y, w, h)?)
        } else {
            None
        });
    }

    if frames.len() != ground_truth.len() {
        return Err(load_error(
            dir,
            format!("{} frames but {} ground-truth lines", frames.len(), ground_truth.len()),
        ));
    }
    if frames.len() < 2 {
        return Err(load_error(dir, format!("need at least 2 frames, found {}", frames.len())));
    }

    let attributes = fs::read_to_string(dir.join("attributes.txt"))
        .map(|text| text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect())
        .unwrap_or_default();

    Ok(Sequence { name, frames, ground_truth, attributes })
}

/// Runs the tracker over in-memory frames: init on the first, step through
/// the rest. The first trajectory entry is the initialization box.
pub fn track_sequence(
    frames: &[RgbImage],
    init: BoundingBox,
    cfg: &TrackerConfig,
) -> Result<Trajectory> {
    let Some(first) = frames.first() else {
        return Err(Error::InvalidInput("cannot track an empty sequence".into()));
    };
    let mut state = TrackerState::init(first, init, cfg.clone())?;
    let mut boxes = Vec::with_capacity(frames.len());
    boxes.push(state.current_box());
    for frame in &frames[1..] {
        boxes.push(state.step(frame)?);
    }
    Ok(Trajectory { boxes })
}

/// Loads one sequence's frames, tracks it once, and scores it. The fps
/// figure measures tracking time only (decoding excluded).
pub fn evaluate_sequence(seq: &Sequence, cfg: &TrackerConfig) -> Result<SequenceReport> {
    let frames: Vec<RgbImage> = seq
        .frames
        .iter()
        .map(|path| {
            image::open(path)
                .map(|img| img.to_rgb8())
                .map_err(|e| load_error(path, e.to_string()))
        })
        .collect::<Result<_>>()?;
    let Some(init) = seq.ground_truth.first().copied().flatten() else {
        return Err(load_error(
            Path::new(&seq.name),
            "first frame has no usable ground truth to initialize from",
        ));
    };
    let started = Instant::now();
    let traj = track_sequence(&frames, init, cfg)?;
    let elapsed = started.elapsed().as_secs_f64();
    let mut report = score(&traj, seq)?;
    report.fps = frames.len() as f64 / elapsed.max(1e-9);
    Ok(report)
}

/// One-pass evaluation: every sequence is initialized on its first frame's
/// ground truth and tracked straight through, no restarts. Per-sequence
/// failures are recorded in the report rather than aborting the run.
pub fn run_ope(sequences: &[Sequence], cfg: &TrackerConfig) -> EvalReport {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for seq in sequences {
        match evaluate_sequence(seq, cfg) {
            Ok(report) => entries.push(report),
            Err(e) => failures.push(FailureNote { sequence: seq.name.clone(), detail: e.to_string() }),
        }
    }
    assemble_report(entries, failures)
}

/// Single-threaded reduction of per-sequence results into the dataset
/// report. Entries are name-sorted so the outcome is independent of the
/// order they were produced in (parallel drivers feed this too).
pub fn assemble_report(mut entries: Vec<SequenceReport>, mut failures: Vec<FailureNote>) -> EvalReport {
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    failures.sort_by(|a, b| a.sequence.cmp(&b.sequence));
    let n = entries.len() as f64;
    let mut mean_precision = vec![0.0; PRECISION_POINTS];
    let mut mean_success = vec![0.0; SUCCESS_POINTS];
    let (mut mean_auc, mut mean_op, mut mean_dp, mut mean_fps) = (0.0, 0.0, 0.0, 0.0);
    if !entries.is_empty() {
        for entry in &entries {
            for (acc, v) in mean_precision.iter_mut().zip(&entry.precision) {
                *acc += v / n;
            }
            for (acc, v) in mean_success.iter_mut().zip(&entry.success) {
                *acc += v / n;
            }
            mean_auc += entry.auc / n;
            mean_op += entry.op / n;
            mean_dp += entry.dp / n;
            mean_fps += entry.fps / n;
        }
    }
    EvalReport {
        sequences: entries,
        failures,
        mean_precision,
        mean_success,
        mean_auc,
        mean_op,
        mean_dp,
        mean_fps,
    }
}

/// Motion program of a synthetic sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    Static,
    /// Constant velocity in pixels per frame.
    Linear { velocity: (f64, f64) },
    /// Geometric size growth per frame.
    ScaleRamp { rate: f64 },
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SyntheticKind> {
        match s {
            "static" => Ok(SyntheticKind::Static),
            "linear" => Ok(SyntheticKind::Linear { velocity: (2.0, 0.0) }),
            "scale-ramp" => Ok(SyntheticKind::ScaleRamp { rate: 1.002 }),
            other => Err(Error::Config(format!(
                "synthetic kind must be 'static', 'linear', or 'scale-ramp', got '{other}'"
            ))),
        }
    }
}

/// A rendered synthetic sequence held in memory, with exact ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub name: String,
    pub frames: Vec<RgbImage>,
    pub ground_truth: Vec<BoundingBox>,
}

/// Initial target side of synthetic sequences, in pixels.
pub const SYNTHETIC_TARGET_SIDE: f64 = 40.0;
/// Clearance kept between the target's travel envelope and the canvas edge.
const SYNTHETIC_MARGIN: f64 = 100.0;

/// Virtual texel grid of the target texture. Coarse on purpose: ~5 px
/// texels at the initial size survive the resampling of off-unit scale
/// candidates, so a growing target presents an honest scale cue instead of
/// sub-pixel shimmer.
const SYNTHETIC_TEXEL_GRID: f64 = 8.0;

/// Aperiodic target texture, sampled on a virtual grid of the box's
/// normalized coordinates so it zooms with the target instead of revealing
/// new pattern.
fn target_color(pu: i64, pv: i64) -> image::Rgb<u8> {
    let channel = |a: i64, b: i64| (60 + (pu * a + pv * b).rem_euclid(180)) as u8;
    image::Rgb([channel(37, 101), channel(59, 17), channel(13, 71)])
}

fn render_frame(
    width: u32,
    height: u32,
    target: &BoundingBox,
    noise: u8,
    rng: &mut ChaCha8Rng,
) -> RgbImage {
    let mut img = RgbImage::new(width, height);
    for pixel in img.pixels_mut() {
        let v = if noise == 0 { 30 } else { 30u8.saturating_add(rng.random_range(0..noise)) };
        *pixel = image::Rgb([v, v, v]);
    }
    let x_range = target.x.floor() as i64..(target.x + target.w).ceil() as i64;
    let y_range = target.y.floor() as i64..(target.y + target.h).ceil() as i64;
    for py in y_range {
        for px in x_range.clone() {
            if px < 0 || py < 0 || px >= width as i64 || py >= height as i64 {
                continue;
            }
            // Pixel-center test against the exact (sub-pixel) box.
            let u = (px as f64 + 0.5 - target.x) / target.w;
            let v = (py as f64 + 0.5 - target.y) / target.h;
            if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
                continue;
            }
            let pu = (u * SYNTHETIC_TEXEL_GRID).floor() as i64;
            let pv = (v * SYNTHETIC_TEXEL_GRID).floor() as i64;
            img.put_pixel(px as u32, py as u32, target_color(pu, pv));
        }
    }
    img
}

/// Renders a fully seeded synthetic sequence: noise background, textured
/// square target following the motion program, exact float ground truth.
pub fn make_synthetic(
    kind: SyntheticKind,
    frames: usize,
    noise: u8,
    seed: u64,
) -> Result<SyntheticSequence> {
    if frames < 2 {
        return Err(Error::InvalidInput(format!("a sequence needs at least 2 frames, got {frames}")));
    }
    if let SyntheticKind::Linear { velocity } = kind {
        if !(velocity.0.is_finite() && velocity.1.is_finite()) {
            return Err(Error::InvalidInput("non-finite synthetic velocity".into()));
        }
    }
    if let SyntheticKind::ScaleRamp { rate } = kind {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidInput(format!("scale rate must be positive, got {rate}")));
        }
    }

    let side = SYNTHETIC_TARGET_SIDE;
    let steps = (frames - 1) as f64;
    // Trajectory extent decides the canvas; the margin keeps the whole
    // search window inside real (non-replicated) content at every frame.
    let (travel_x, travel_y, final_side) = match kind {
        SyntheticKind::Static => (0.0, 0.0, side),
        SyntheticKind::Linear { velocity } => (velocity.0 * steps, velocity.1 * steps, side),
        SyntheticKind::ScaleRamp { rate } => (0.0, 0.0, side * rate.powf(steps)),
    };
    let max_side = side.max(final_side);
    let width = (max_side + travel_x.abs() + 2.0 * SYNTHETIC_MARGIN).ceil();
    let height = (max_side + travel_y.abs() + 2.0 * SYNTHETIC_MARGIN).ceil();
    if width > 4096.0 || height > 4096.0 {
        return Err(Error::InvalidInput(format!(
            "synthetic canvas {width}×{height} exceeds the 4096-pixel cap"
        )));
    }
    let (width, height) = (width as u32, height as u32);
    let start = (
        SYNTHETIC_MARGIN + if travel_x < 0.0 { -travel_x } else { 0.0 },
        SYNTHETIC_MARGIN + if travel_y < 0.0 { -travel_y } else { 0.0 },
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sequence_frames = Vec::with_capacity(frames);
    let mut ground_truth = Vec::with_capacity(frames);
    for k in 0..frames {
        let t = k as f64;
        let target = match kind {
            SyntheticKind::Static => BoundingBox { x: start.0, y: start.1, w: side, h: side },
            SyntheticKind::Linear { velocity } => BoundingBox {
                x: start.0 + velocity.0 * t,
                y: start.1 + velocity.1 * t,
                w: side,
                h: side,
            },
            SyntheticKind::ScaleRamp { rate } => {
                let s = side * rate.powf(t);
                // Grows around a fixed center.
                let c = (start.0 + 0.5 * max_side, start.1 + 0.5 * max_side);
                BoundingBox { x: c.0 - 0.5 * s, y: c.1 - 0.5 * s, w: s, h: s }
            }
        };
        sequence_frames.push(render_frame(width, height, &target, noise, &mut rng));
        ground_truth.push(target);
    }

    let name = match kind {
        SyntheticKind::Static => format!("synthetic-static-{seed}"),
        SyntheticKind::Linear { .. } => format!("synthetic-linear-{seed}"),
        SyntheticKind::ScaleRamp { .. } => format!("synthetic-scale-ramp-{seed}"),
    };
    Ok(SyntheticSequence { name, frames: sequence_frames, ground_truth })
}

impl SyntheticSequence {
    /// Per-frame ground truth in the `Option` form the metrics take.
    pub fn ground_truth_options(&self) -> Vec<Option<BoundingBox>> {
        self.ground_truth.iter().copied().map(Some).collect()
    }

    /// Writes the sequence in OTB layout (`img/0001.png` …,
    /// `groundtruth_rect.txt` 1-indexed) and reloads it through
    /// [`load_sequence`], so the returned handle went through the same
    /// validation as any on-disk dataset.
    pub fn materialize(&self, dir: &Path) -> Result<Sequence> {
        let img_dir = dir.join("img");
        fs::create_dir_all(&img_dir)?;
        for (k, frame) in self.frames.iter().enumerate() {
            let path = img_dir.join(format!("{:04}.png", k + 1));
            frame.save(&path).map_err(|e| load_error(&path, e.to_string()))?;
        }
        let mut gt = String::new();
        for b in &self.ground_truth {
            gt.push_str(&format!("{},{},{},{}\n", b.x + 1.0, b.y + 1.0, b.w, b.h));
        }
        fs::write(dir.join("groundtruth_rect.txt"), gt)?;
        load_sequence(dir)
    }
}
