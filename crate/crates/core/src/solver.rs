//! ADMM learner for the multi-channel correlation filter.
//!
//! Per frame the tracker solves, over all channels i and spatial locations j,
//!
//! ```text
//! min_θ  Σ_i ‖θ_i ⊛ x_i − y‖²  +  λ1·Σ_j ‖θ^j‖₂  +  λ2·Σ_i ‖θ_i − θ_model,i‖²
//! ```
//!
//! where `⊛` is [`crate::spectral::circular_correlate`], `θ^j` collects
//! location j across channels, and `θ_model` anchors the new filter to its
//! predecessor. Splitting θ from the shrinkage variable θ′ gives three exact
//! steps per sweep: a per-bin closed form in the frequency domain
//! ([`update_theta`]), a grouped soft threshold in the spatial domain
//! ([`update_theta_prime`]), and the multiplier/penalty advance
//! ([`update_multiplier`], [`advance_penalty`]). The filter this module
//! returns is always the spatial iterate with all but the strongest
//! locations zeroed ([`select_top_m`]), transformed back to spectra.

use crate::error::{Error, Result};
use crate::features::FeatureTensor;
use crate::spectral::{dft2, idft2, ComplexPlane, RealPlane};

/// Group norms below this are treated as exactly zero in the shrinkage step
/// to keep the scaling factor finite.
pub const GROUP_NORM_FLOOR: f64 = 1e-12;

/// Learner parameters. `Default` carries the reference operating point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Weight of the grouped location-sparsity penalty.
    pub lambda1: f64,
    /// Weight of the temporal anchor toward the previous model.
    pub lambda2: f64,
    /// Initial ADMM penalty.
    pub mu0: f64,
    /// Penalty ceiling.
    pub mu_max: f64,
    /// Penalty growth factor per sweep.
    pub rho: f64,
    /// Number of ADMM sweeps (no early exit).
    pub iterations: usize,
    /// Fraction of spatial locations kept by the final selection.
    pub keep_ratio: f64,
    /// Model interpolation rate used by [`update_model`].
    pub alpha: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 15.0,
            mu0: 1.0,
            mu_max: 20.0,
            rho: 5.0,
            iterations: 2,
            keep_ratio: 0.05,
            alpha: 0.95,
        }
    }
}

impl SolverConfig {
    /// Strict validation applied to user-supplied configurations. Requires a
    /// genuinely two-term regularizer: `0 < lambda1 < lambda2`.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lambda2 > 0.0) {
            return fail(format!("lambda2 must be positive, got {}", self.lambda2));
        }
        if self.lambda1 >= self.lambda2 {
            return fail(format!(
                "lambda1 ({}) must be smaller than lambda2 ({})",
                self.lambda1, self.lambda2
            ));
        }
        self.check_runnable()
    }

    /// Weakest preconditions the solver itself needs. Unlike [`validate`],
    /// `lambda2 = 0` passes: the denominator of the filter update stays
    /// positive through `mu`, and switching the anchor off entirely is how
    /// the temporal-consistency ablation runs.
    ///
    /// [`validate`]: SolverConfig::validate
    pub fn check_runnable(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lambda1 > 0.0) {
            return fail(format!("lambda1 must be positive, got {}", self.lambda1));
        }
        if !(self.lambda2 >= 0.0) {
            return fail(format!("lambda2 must be non-negative, got {}", self.lambda2));
        }
        if !(self.mu0 > 0.0) {
            return fail(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.rho > 1.0) {
            return fail(format!("rho must exceed 1, got {}", self.rho));
        }
        if !(self.mu_max >= self.mu0) {
            return fail(format!("mu_max ({}) must be at least mu0 ({})", self.mu_max, self.mu0));
        }
        if self.iterations == 0 {
            return fail("iteration count must be at least 1".into());
        }
        if !(self.keep_ratio > 0.0 && self.keep_ratio <= 1.0) {
            return fail(format!("keep ratio must lie in (0, 1], got {}", self.keep_ratio));
        }
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        Ok(())
    }
}

/// A learned filter: one conjugate-symmetric spectrum per feature channel.
#[derive(Debug, Clone)]
pub struct SpectralFilter {
    channels: Vec<ComplexPlane>,
}

impl SpectralFilter {
    pub fn new(channels: Vec<ComplexPlane>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::InvalidInput("filter needs at least one channel".into()));
        };
        let size = first.size();
        if channels.iter().any(|c| c.size() != size) {
            return Err(Error::ShapeMismatch("filter channels differ in size".into()));
        }
        Ok(Self { channels })
    }

    pub fn zeros(size: usize, channels: usize) -> Result<Self> {
        Self::new(vec![ComplexPlane::zeros(size)?; channels.max(1)])
    }

    pub fn size(&self) -> usize {
        self.channels[0].size()
    }

    pub fn channels(&self) -> &[ComplexPlane] {
        &self.channels
    }

    /// Inverse-transforms every channel; fails if any spectrum is not
    /// conjugate symmetric.
    pub fn to_spatial(&self) -> Result<Vec<RealPlane>> {
        self.channels.iter().map(idft2).collect()
    }

    pub fn from_spatial(planes: &[RealPlane]) -> Result<Self> {
        Self::new(planes.iter().map(dft2).collect::<Result<_>>()?)
    }
}

/// Boolean keep/drop decision per spatial location.
#[derive(Debug, Clone)]
pub struct SelectionMask {
    size: usize,
    keep: Vec<bool>,
}

impl SelectionMask {
    /// Keeps the `m` locations with the largest cross-channel group norms
    /// `‖θ^j‖₂`; ties prefer the lower linear index so the outcome never
    /// depends on sort internals.
    pub fn top_m(planes: &[RealPlane], m: usize) -> Result<SelectionMask> {
        let Some(first) = planes.first() else {
            return Err(Error::InvalidInput("selection needs at least one channel".into()));
        };
        let size = first.size();
        let locations = size * size;
        let m = m.clamp(1, locations);
        let mut ranked: Vec<(usize, f64)> = (0..locations)
            .map(|j| {
                let norm_sq: f64 = planes.iter().map(|p| p.data()[j] * p.data()[j]).sum();
                (j, norm_sq)
            })
            .collect();
        ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut keep = vec![false; locations];
        for &(j, _) in ranked.iter().take(m) {
            keep[j] = true;
        }
        Ok(SelectionMask { size, keep })
    }

    /// Centered `h_cells × w_cells` block of kept locations on a `size`
    /// grid; the first-frame target mask.
    pub fn centered_block(size: usize, h_cells: usize, w_cells: usize) -> Result<SelectionMask> {
        if h_cells == 0 || w_cells == 0 || h_cells > size || w_cells > size {
            return Err(Error::InvalidInput(format!(
                "block {h_cells}×{w_cells} does not fit a {size}×{size} grid"
            )));
        }
        let y0 = (size - h_cells) / 2;
        let x0 = (size - w_cells) / 2;
        let mut keep = vec![false; size * size];
        for y in y0..y0 + h_cells {
            for x in x0..x0 + w_cells {
                keep[y * size + x] = true;
            }
        }
        Ok(SelectionMask { size, keep })
    }

    pub fn all(size: usize) -> SelectionMask {
        SelectionMask { size, keep: vec![true; size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kept(&self) -> usize {
        self.keep.iter().filter(|k| **k).count()
    }

    pub fn keeps(&self, j: usize) -> bool {
        self.keep[j]
    }

    /// Zeroes every dropped location across all channels.
    pub fn apply(&self, planes: &mut [RealPlane]) {
        for plane in planes {
            for (v, keep) in plane.data_mut().iter_mut().zip(&self.keep) {
                if !keep {
                    *v = 0.0;
                }
            }
        }
    }
}

/// State after an ADMM run: the main iterate, the shrinkage consensus
/// variable, the scaled multipliers, and the penalty trace (one entry per
/// sweep, recording the value used in that sweep).
#[derive(Debug)]
pub struct AdmmWorkspace {
    pub theta: Vec<RealPlane>,
    pub theta_prime: Vec<RealPlane>,
    pub eta: Vec<RealPlane>,
    pub mu: f64,
    pub mu_trace: Vec<f64>,
}

/// How the consensus step constrains θ′.
#[derive(Debug, Clone, Copy)]
pub enum Shrinkage<'a> {
    /// Grouped soft threshold with weight `lambda1` (steady-state frames).
    Group { lambda1: f64 },
    /// Hard projection onto a fixed support (first-frame learning).
    Mask(&'a SelectionMask),
}

/// Per-bin closed-form θ-step for one channel:
///
/// ```text
/// θ̂ = (x̂ ⊙ ŷ* + λ2·θ̂_model + ½μ·θ̂′ − ½·η̂) ⊘ (x̂ ⊙ x̂* + λ2 + ½μ)
/// ```
///
/// The denominator is real and at least `λ2 + μ/2`, so the division cannot
/// blow up for positive `μ`. Pass `theta_model_hat = None` with
/// `lambda2 = 0` to drop the anchor term.
pub fn update_theta(
    x_hat: &ComplexPlane,
    y_hat: &ComplexPlane,
    theta_model_hat: Option<&ComplexPlane>,
    theta_prime_hat: &ComplexPlane,
    eta_hat: &ComplexPlane,
    lambda2: f64,
    mu: f64,
) -> Result<ComplexPlane> {
    let size = x_hat.size();
    if y_hat.size() != size || theta_prime_hat.size() != size || eta_hat.size() != size {
        return Err(Error::ShapeMismatch("theta update: plane sizes differ".into()));
    }
    if let Some(m) = theta_model_hat {
        if m.size() != size {
            return Err(Error::ShapeMismatch("theta update: model size differs".into()));
        }
    }
    let mut out = Vec::with_capacity(size * size);
    for j in 0..size * size {
        let x = x_hat.data()[j];
        let mut numerator = x * y_hat.data()[j].conj()
            + 0.5 * mu * theta_prime_hat.data()[j]
            - 0.5 * eta_hat.data()[j];
        if let Some(m) = theta_model_hat {
            numerator += lambda2 * m.data()[j];
        }
        let denominator = x.norm_sqr() + lambda2 + 0.5 * mu;
        out.push(numerator / denominator);
    }
    ComplexPlane::new(size, out)
}

/// Grouped soft threshold of `g = θ + η/μ`: location by location,
/// `θ′^j = max(0, 1 − λ1/(μ·‖g^j‖₂))·g^j`. Norms under
/// [`GROUP_NORM_FLOOR`] collapse to zero outright.
pub fn update_theta_prime(
    theta: &[RealPlane],
    eta: &[RealPlane],
    lambda1: f64,
    mu: f64,
) -> Result<Vec<RealPlane>> {
    if theta.is_empty() || theta.len() != eta.len() {
        return Err(Error::ShapeMismatch("shrinkage: channel counts differ".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidInput(format!("shrinkage needs mu > 0, got {mu}")));
    }
    let size = theta[0].size();
    let locations = size * size;
    let mut out = vec![RealPlane::zeros(size)?; theta.len()];
    for j in 0..locations {
        let mut norm_sq = 0.0;
        for (t, e) in theta.iter().zip(eta) {
            let g = t.data()[j] + e.data()[j] / mu;
            norm_sq += g * g;
        }
        let norm = norm_sq.sqrt();
        if norm < GROUP_NORM_FLOOR {
            continue;
        }
        let factor = (1.0 - lambda1 / (mu * norm)).max(0.0);
        if factor == 0.0 {
            continue;
        }
        for (i, (t, e)) in theta.iter().zip(eta).enumerate() {
            let g = t.data()[j] + e.data()[j] / mu;
            out[i].data_mut()[j] = factor * g;
        }
    }
    Ok(out)
}

/// Multiplier ascent `η := η + μ·(θ − θ′)`, channel by channel.
pub fn update_multiplier(
    eta: &mut [RealPlane],
    theta: &[RealPlane],
    theta_prime: &[RealPlane],
    mu: f64,
) {
    for ((e, t), p) in eta.iter_mut().zip(theta).zip(theta_prime) {
        for ((ev, tv), pv) in e.data_mut().iter_mut().zip(t.data()).zip(p.data()) {
            *ev += mu * (tv - pv);
        }
    }
}

/// Penalty growth `μ := min(ρ·μ, μ_max)`.
pub fn advance_penalty(mu: f64, rho: f64, mu_max: f64) -> f64 {
    (rho * mu).min(mu_max)
}

/// Runs the ADMM sweeps on already-transformed inputs and returns the raw
/// workspace. [`learn`] and [`init_first_frame`] wrap this; it stays public
/// so diagnostics and tests can inspect the iterates and penalty trace.
pub fn admm_solve(
    x_hat: &[ComplexPlane],
    y_hat: &ComplexPlane,
    theta_model: Option<&SpectralFilter>,
    lambda2: f64,
    shrinkage: Shrinkage,
    cfg: &SolverConfig,
) -> Result<AdmmWorkspace> {
    let Some(first) = x_hat.first() else {
        return Err(Error::InvalidInput("sample needs at least one channel".into()));
    };
    let size = first.size();
    let channels = x_hat.len();
    if x_hat.iter().any(|c| c.size() != size) || y_hat.size() != size {
        return Err(Error::ShapeMismatch("sample and label sizes differ".into()));
    }
    if let Some(model) = theta_model {
        if model.size() != size || model.channels().len() != channels {
            return Err(Error::ShapeMismatch("model does not match sample layout".into()));
        }
    }
    if let Shrinkage::Mask(mask) = shrinkage {
        if mask.size() != size {
            return Err(Error::ShapeMismatch("selection mask does not match sample size".into()));
        }
    }
    if !(cfg.mu0 > 0.0) || !(cfg.mu_max >= cfg.mu0) || !(cfg.rho >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "penalty schedule needs mu0 > 0, rho ≥ 1, mu_max ≥ mu0; got ({}, {}, {})",
            cfg.mu0, cfg.rho, cfg.mu_max
        )));
    }
    if cfg.iterations == 0 {
        return Err(Error::InvalidInput("iteration count must be at least 1".into()));
    }
    if !(lambda2 >= 0.0) {
        return Err(Error::InvalidInput(format!("lambda2 must be non-negative, got {lambda2}")));
    }

    // θ′ starts at the spatial model (zero when no model exists); η at zero.
    // η̂ is maintained spectrally alongside η: the ascent recurrence is
    // linear, so updating both domains in lockstep is exact and saves a
    // transform per sweep.
    let mut theta_prime: Vec<RealPlane> = match theta_model {
        Some(model) => model.to_spatial()?,
        None => vec![RealPlane::zeros(size)?; channels],
    };
    let mut theta_prime_hat: Vec<ComplexPlane> =
        theta_prime.iter().map(dft2).collect::<Result<_>>()?;
    let mut eta = vec![RealPlane::zeros(size)?; channels];
    let mut eta_hat = vec![ComplexPlane::zeros(size)?; channels];
    let mut theta = vec![RealPlane::zeros(size)?; channels];
    let mut mu = cfg.mu0;
    let mut mu_trace = Vec::with_capacity(cfg.iterations);

    for sweep in 1..=cfg.iterations {
        let blame = |e: Error| match e {
            Error::ConjugateSymmetry { residue, .. } => Error::NumericalFailure {
                iteration: sweep,
                detail: format!("iterate lost conjugate symmetry (residue {residue:.3e})"),
            },
            Error::InvalidInput(detail) => Error::NumericalFailure { iteration: sweep, detail },
            other => other,
        };

        let mut theta_hat = Vec::with_capacity(channels);
        for i in 0..channels {
            let model_i = theta_model.map(|m| &m.channels()[i]);
            let hat = update_theta(
                &x_hat[i],
                y_hat,
                model_i,
                &theta_prime_hat[i],
                &eta_hat[i],
                lambda2,
                mu,
            )
            .map_err(blame)?;
            theta[i] = idft2(&hat).map_err(blame)?;
            theta_hat.push(hat);
        }

        theta_prime = match shrinkage {
            Shrinkage::Group { lambda1 } => update_theta_prime(&theta, &eta, lambda1, mu)?,
            Shrinkage::Mask(mask) => {
                let mut projected = Vec::with_capacity(channels);
                for (t, e) in theta.iter().zip(&eta) {
                    let plane = RealPlane::from_fn(size, |y, x| {
                        let j = y * size + x;
                        if mask.keeps(j) {
                            t.data()[j] + e.data()[j] / mu
                        } else {
                            0.0
                        }
                    })?;
                    projected.push(plane);
                }
                projected
            }
        };

        update_multiplier(&mut eta, &theta, &theta_prime, mu);
        for i in 0..channels {
            let prime_hat = dft2(&theta_prime[i]).map_err(blame)?;
            for ((e, t), p) in eta_hat[i]
                .data_mut()
                .iter_mut()
                .zip(theta_hat[i].data())
                .zip(prime_hat.data())
            {
                *e += mu * (t - p);
            }
            theta_prime_hat[i] = prime_hat;
        }

        mu_trace.push(mu);
        mu = advance_penalty(mu, cfg.rho, cfg.mu_max);
    }

    Ok(AdmmWorkspace { theta, theta_prime, eta, mu, mu_trace })
}

/// Learns a filter for one frame: ADMM sweeps anchored to `theta_model`,
/// then hard top-M selection on the spatial result, returned as spectra.
pub fn learn(
    x: &FeatureTensor,
    y: &RealPlane,
    theta_model: &SpectralFilter,
    cfg: &SolverConfig,
) -> Result<SpectralFilter> {
    if x.size() != y.size() || x.size() != theta_model.size() {
        return Err(Error::ShapeMismatch(format!(
            "learn: sample {}, label {}, model {}",
            x.size(),
            y.size(),
            theta_model.size()
        )));
    }
    if x.channels() != theta_model.channels().len() {
        return Err(Error::ShapeMismatch(format!(
            "learn: {} feature channels vs {} model channels",
            x.channels(),
            theta_model.channels().len()
        )));
    }
    let x_hat: Vec<ComplexPlane> = x.planes().iter().map(dft2).collect::<Result<_>>()?;
    let y_hat = dft2(y)?;
    let mut ws = admm_solve(
        &x_hat,
        &y_hat,
        Some(theta_model),
        cfg.lambda2,
        Shrinkage::Group { lambda1: cfg.lambda1 },
        cfg,
    )?;
    let mask = SelectionMask::top_m(&ws.theta, keep_count(x.size(), cfg.keep_ratio))?;
    mask.apply(&mut ws.theta);
    SpectralFilter::from_spatial(&ws.theta)
}

/// First-frame learning: no anchor exists yet, and the consensus step is a
/// hard projection onto the centered target mask instead of a threshold.
/// The returned filter is the final iterate projected onto the mask, so its
/// support is exactly contained in the mask.
pub fn init_first_frame(
    x: &FeatureTensor,
    y: &RealPlane,
    mask: &SelectionMask,
    cfg: &SolverConfig,
) -> Result<SpectralFilter> {
    if x.size() != y.size() || x.size() != mask.size() {
        return Err(Error::ShapeMismatch(format!(
            "init: sample {}, label {}, mask {}",
            x.size(),
            y.size(),
            mask.size()
        )));
    }
    let x_hat: Vec<ComplexPlane> = x.planes().iter().map(dft2).collect::<Result<_>>()?;
    let y_hat = dft2(y)?;
    let mut ws = admm_solve(&x_hat, &y_hat, None, 0.0, Shrinkage::Mask(mask), cfg)?;
    mask.apply(&mut ws.theta);
    SpectralFilter::from_spatial(&ws.theta)
}

/// Model interpolation `θ_model := (1−α)·θ_model + α·θ`, spectrum-wise.
/// `α = 0` freezes the model; `α = 1` replaces it outright.
pub fn update_model(model: &mut SpectralFilter, theta: &SpectralFilter, alpha: f64) -> Result<()> {
    if model.size() != theta.size() || model.channels().len() != theta.channels().len() {
        return Err(Error::ShapeMismatch("model update: layouts differ".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let keep = 1.0 - alpha;
    for (m, t) in model.channels.iter_mut().zip(&theta.channels) {
        for (mv, tv) in m.data_mut().iter_mut().zip(t.data()) {
            *mv = keep * *mv + alpha * *tv;
        }
    }
    Ok(())
}

/// Number of locations the selection keeps on a `size × size` grid.
pub fn keep_count(size: usize, keep_ratio: f64) -> usize {
    let locations = size * size;
    (((locations as f64) * keep_ratio).round() as usize).clamp(1, locations)
}
