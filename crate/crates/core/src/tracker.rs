//! Per-frame tracking loop: multi-scale detection, motion application,
//! learning on the updated window, and model interpolation.
//!
//! A sequence owns one [`TrackerState`]. The window geometry is anchored at
//! the first frame: the base window side `n = (1+ϱ)·√(w·h)` is rounded once
//! into a fixed template side, and every crop at every scale is resized to
//! that template before feature extraction, so the feature grid `D` and the
//! filter layout never change mid-sequence. `n` itself is re-derived from
//! the current target size after every scale change and carries the
//! pixels-per-cell stride used to convert cell offsets into motion.

use image::RgbImage;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::features::{
    extract_features, extract_search_window, resize_bilinear, ColorNamesTable, FeatureTensor,
    CELL,
};
use crate::solver::{self, SelectionMask, SolverConfig, SpectralFilter};
use crate::spectral::{
    dft2, gaussian_label, hann_window, idft2, signed_offset, ComplexPlane, RealPlane,
};

/// Targets are never shrunk below this side length by scale adaptation.
pub const MIN_TARGET_SIDE: f64 = 4.0;

/// Axis-aligned box, top-left corner plus extent, in frame pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<BoundingBox> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidInput("bounding box has non-finite fields".into()));
        }
        if w < 1.0 || h < 1.0 {
            return Err(Error::InvalidInput(format!(
                "bounding box must be at least 1×1 pixel, got {w}×{h}"
            )));
        }
        Ok(BoundingBox { x, y, w, h })
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<BoundingBox> {
        BoundingBox::new(cx - 0.5 * w, cy - 0.5 * h, w, h)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Cosine-window switch for feature preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    None,
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<WindowKind> {
        match s {
            "hann" => Ok(WindowKind::Hann),
            "none" => Ok(WindowKind::None),
            other => Err(Error::Config(format!("window must be 'hann' or 'none', got '{other}'"))),
        }
    }
}

/// Tracking parameters. `Default` carries the reference operating point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrackerConfig {
    /// Search-window padding ϱ: window side is (1+ϱ)·√(w·h).
    pub padding: f64,
    /// Scale-pyramid growth factor a.
    pub scale_factor: f64,
    /// Scale-pyramid size S (odd, so the middle scale is the identity).
    pub scales: usize,
    /// Label sharpness: σ in cells is this factor times the target size in cells.
    pub sigma_factor: f64,
    /// Feature-plane cosine window.
    pub window: WindowKind,
    /// Feature cell side in pixels.
    pub cell: usize,
    pub solver: SolverConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            padding: 4.0,
            scale_factor: 1.01,
            scales: 5,
            sigma_factor: 1.0 / 16.0,
            window: WindowKind::Hann,
            cell: CELL,
            solver: SolverConfig::default(),
        }
    }
}

impl TrackerConfig {
    /// Strict gate for user-supplied configurations.
    pub fn validate(&self) -> Result<()> {
        self.geometry_checks()?;
        self.solver.validate()
    }

    /// Weakest preconditions tracking needs. [`init`] uses this rather than
    /// [`validate`] so that a programmatic caller can run with `lambda2 = 0`
    /// (temporal anchor off) for ablation comparisons.
    ///
    /// [`init`]: TrackerState::init
    /// [`validate`]: TrackerConfig::validate
    pub fn check_runnable(&self) -> Result<()> {
        self.geometry_checks()?;
        self.solver.check_runnable()
    }

    fn geometry_checks(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.padding > 0.0) {
            return fail(format!("padding must be positive, got {}", self.padding));
        }
        if !(self.scale_factor > 1.0) {
            return fail(format!("scale factor must exceed 1, got {}", self.scale_factor));
        }
        if self.scales == 0 || self.scales % 2 == 0 {
            return fail(format!("scale count must be odd and at least 1, got {}", self.scales));
        }
        if !(self.sigma_factor > 0.0) {
            return fail(format!("sigma factor must be positive, got {}", self.sigma_factor));
        }
        if self.cell != CELL {
            return fail(format!(
                "the feature extractors operate on {CELL}-pixel cells; cell = {} is unsupported",
                self.cell
            ));
        }
        Ok(())
    }
}

/// Signed scale exponent for pyramid index `index` (0-based) of `scales`
/// levels: `⌊(2s − S − 1)/2⌋` with 1-based s, giving e.g. {−2,−1,0,1,2}
/// for S = 5. The numerator is even whenever S is odd, so the division is
/// exact.
pub fn scale_exponent(index: usize, scales: usize) -> i64 {
    (2 * index as i64 + 1 - scales as i64) / 2
}

/// One detection verdict: the cell displacement of the response peak, the
/// winning pyramid index, and the peak response value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub dx: i64,
    pub dy: i64,
    pub scale: usize,
    pub score: f64,
}

/// Sum of per-channel correlation responses `Σ_i idft2(x̂_i ⊙ θ̂_i*)`.
/// Entry Δ holds `Σ_i Σ_v θ_i[v]·x_i[v+Δ]`, so the peak sits at the
/// displacement of the target, positive offsets meaning rightward/downward
/// motion.
pub fn response_map(x: &FeatureTensor, filter: &SpectralFilter) -> Result<RealPlane> {
    if x.size() != filter.size() || x.channels() != filter.channels().len() {
        return Err(Error::ShapeMismatch(format!(
            "response: sample {}×{} channels vs filter {}×{}",
            x.size(),
            x.channels(),
            filter.size(),
            filter.channels().len()
        )));
    }
    let size = x.size();
    let mut acc = vec![Complex64::new(0.0, 0.0); size * size];
    for (plane, theta_hat) in x.planes().iter().zip(filter.channels()) {
        let x_hat = dft2(plane)?;
        for ((a, xv), tv) in acc.iter_mut().zip(x_hat.data()).zip(theta_hat.data()) {
            *a += xv * tv.conj();
        }
    }
    idft2(&ComplexPlane::new(size, acc)?)
}

/// Target extent in feature cells as seen through the template resize.
fn target_cells(w: f64, h: f64, window_side: f64, template: u32, cell: usize, grid: usize) -> (usize, usize) {
    let to_cells = |extent: f64| {
        let cells = extent * template as f64 / (window_side * cell as f64);
        (cells.round() as i64).clamp(1, grid as i64) as usize
    };
    (to_cells(w), to_cells(h))
}

/// Full per-sequence state: geometry, the model filter, and the fixed
/// label/window planes.
#[derive(Debug, Clone)]
pub struct TrackerState {
    cfg: TrackerConfig,
    cn_table: &'static ColorNamesTable,
    center: (f64, f64),
    width: f64,
    height: f64,
    /// Base window side n in frame pixels; re-derived after scale changes.
    window_side: f64,
    /// Fixed resize target for every crop, set once from the initial n.
    template_side: u32,
    /// Feature grid side D; constant for the life of the state.
    grid: usize,
    label: RealPlane,
    window_plane: RealPlane,
    theta_model: SpectralFilter,
    frame_index: usize,
    size_clamped: bool,
}

impl TrackerState {
    /// Initializes on the first frame: learns the model filter with hard
    /// support on the centered target-cell block.
    pub fn init(frame: &RgbImage, bbox: BoundingBox, cfg: TrackerConfig) -> Result<TrackerState> {
        TrackerState::init_with_table(frame, bbox, cfg, ColorNamesTable::builtin())
    }

    /// As [`TrackerState::init`] with an explicit color-names table (the CLI
    /// threads a user-supplied table through here).
    pub fn init_with_table(
        frame: &RgbImage,
        bbox: BoundingBox,
        cfg: TrackerConfig,
        cn_table: &'static ColorNamesTable,
    ) -> Result<TrackerState> {
        cfg.check_runnable()?;
        if frame.width() == 0 || frame.height() == 0 {
            return Err(Error::InvalidInput("empty frame".into()));
        }
        BoundingBox::new(bbox.x, bbox.y, bbox.w, bbox.h)?;
        let (mut cx, mut cy) = bbox.center();
        cx = cx.clamp(0.0, (frame.width() - 1) as f64);
        cy = cy.clamp(0.0, (frame.height() - 1) as f64);

        let window_side = (1.0 + cfg.padding) * (bbox.w * bbox.h).sqrt();
        let template_side = (window_side.round() as i64).clamp(8, 1 << 16) as u32;
        let grid = template_side as usize / cfg.cell;
        if grid < 2 {
            return Err(Error::InvalidInput(format!(
                "target {}×{} yields a {grid}-cell grid; too small to track",
                bbox.w, bbox.h
            )));
        }
        let sigma = cfg.sigma_factor * (bbox.w * bbox.h).sqrt() / cfg.cell as f64;
        let label = gaussian_label(grid, sigma)?;
        let window_plane = match cfg.window {
            WindowKind::Hann => hann_window(grid)?,
            WindowKind::None => RealPlane::from_fn(grid, |_, _| 1.0)?,
        };

        let (cells_w, cells_h) = target_cells(bbox.w, bbox.h, window_side, template_side, cfg.cell, grid);
        let mask = SelectionMask::centered_block(grid, cells_h, cells_w)?;
        let x = sample(frame, 0, (cx, cy), window_side, template_side, cn_table, &window_plane)?;
        let theta_model = solver::init_first_frame(&x, &label, &mask, &cfg.solver)?;

        Ok(TrackerState {
            cfg,
            cn_table,
            center: (cx, cy),
            width: bbox.w,
            height: bbox.h,
            window_side,
            template_side,
            grid,
            label,
            window_plane,
            theta_model,
            frame_index: 0,
            size_clamped: false,
        })
    }

    /// Multi-scale detection: for each pyramid level, crop `a^N·n`, resize
    /// to the template, extract features, and correlate with the model. The
    /// peak over the whole response stack wins; ties keep the lowest scale,
    /// then the lowest linear index (strict improvement scan).
    pub fn detect(&self, frame: &RgbImage) -> Result<Detection> {
        let mut best = Detection { dx: 0, dy: 0, scale: 0, score: f64::NEG_INFINITY };
        for s in 0..self.cfg.scales {
            let exponent = scale_exponent(s, self.cfg.scales);
            let crop = self.window_side * self.cfg.scale_factor.powi(exponent as i32);
            let x = sample(
                frame,
                self.frame_index,
                self.center,
                crop,
                self.template_side,
                self.cn_table,
                &self.window_plane,
            )?;
            let response = response_map(&x, &self.theta_model)?;
            for (j, &v) in response.data().iter().enumerate() {
                if v > best.score {
                    best = Detection {
                        dx: signed_offset(j % self.grid, self.grid),
                        dy: signed_offset(j / self.grid, self.grid),
                        scale: s,
                        score: v,
                    };
                }
            }
        }
        if best.score == f64::NEG_INFINITY {
            return Err(Error::NumericalFailure {
                iteration: self.frame_index,
                detail: "response stack was empty".into(),
            });
        }
        Ok(best)
    }

    /// Moves the state by one detection: `p += (n/D)·Δp` with the
    /// pre-update stride, then rescales the target and re-derives n.
    /// Shrinking below [`MIN_TARGET_SIDE`] clamps and flags the state.
    pub fn apply_motion(&mut self, detection: &Detection) -> Result<()> {
        if detection.scale >= self.cfg.scales {
            return Err(Error::InvalidInput(format!(
                "scale index {} out of range (S = {})",
                detection.scale, self.cfg.scales
            )));
        }
        let stride = self.window_side / self.grid as f64;
        self.center.0 += stride * detection.dx as f64;
        self.center.1 += stride * detection.dy as f64;
        let factor = self
            .cfg
            .scale_factor
            .powi(scale_exponent(detection.scale, self.cfg.scales) as i32);
        self.width *= factor;
        self.height *= factor;
        if self.width < MIN_TARGET_SIDE || self.height < MIN_TARGET_SIDE {
            self.width = self.width.max(MIN_TARGET_SIDE);
            self.height = self.height.max(MIN_TARGET_SIDE);
            self.size_clamped = true;
        }
        self.window_side = (1.0 + self.cfg.padding) * (self.width * self.height).sqrt();
        Ok(())
    }

    /// One full frame: detect, move, learn on the post-motion window, blend
    /// the model. Returns the post-motion box.
    pub fn step(&mut self, frame: &RgbImage) -> Result<BoundingBox> {
        self.frame_index += 1;
        let detection = self.detect(frame)?;
        self.apply_motion(&detection)?;
        let x = sample(
            frame,
            self.frame_index,
            self.center,
            self.window_side,
            self.template_side,
            self.cn_table,
            &self.window_plane,
        )?;
        let frame_index = self.frame_index;
        let theta = solver::learn(&x, &self.label, &self.theta_model, &self.cfg.solver).map_err(
            |e| match e {
                Error::NumericalFailure { iteration, detail } => Error::NumericalFailure {
                    iteration,
                    detail: format!("frame {frame_index}: {detail}"),
                },
                other => other,
            },
        )?;
        solver::update_model(&mut self.theta_model, &theta, self.cfg.solver.alpha)?;
        Ok(self.current_box())
    }

    pub fn current_box(&self) -> BoundingBox {
        BoundingBox {
            x: self.center.0 - 0.5 * self.width,
            y: self.center.1 - 0.5 * self.height,
            w: self.width,
            h: self.height,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn target_size(&self) -> (f64, f64) {
        (self.width, self.height)
    }

    pub fn window_side(&self) -> f64 {
        self.window_side
    }

    pub fn template_side(&self) -> u32 {
        self.template_side
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn model(&self) -> &SpectralFilter {
        &self.theta_model
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn size_clamped(&self) -> bool {
        self.size_clamped
    }
}

/// Crop → resize to the template → features, with the state's window plane.
fn sample(
    frame: &RgbImage,
    frame_index: usize,
    center: (f64, f64),
    crop_side: f64,
    template_side: u32,
    cn_table: &ColorNamesTable,
    window_plane: &RealPlane,
) -> Result<FeatureTensor> {
    if !crop_side.is_finite() || crop_side <= 0.0 {
        return Err(Error::InvalidInput(format!("crop side {crop_side} is not positive")));
    }
    let side = (crop_side.round() as i64).clamp(8, 1 << 16) as u32;
    let patch = extract_search_window(frame, frame_index, center, side)?;
    let patch = resize_bilinear(&patch, template_side)?;
    extract_features(&patch, cn_table, window_plane)
}
