//! Flat `key = value` run configuration with `#` comments.
//!
//! Every key matches the symbol it sets: `lambda1`, `lambda2`, `mu0`,
//! `mu_max`, `rho`, `K`, `r`, `alpha` for the learner; `padding`,
//! `scale_factor`, `scales`, `sigma_factor`, `window`, `cell` for the
//! tracker. Absent keys keep their defaults; unknown keys are errors.

use std::path::Path;

use anyhow::{bail, Context};
use ladcf::TrackerConfig;

pub fn load(path: Option<&Path>) -> anyhow::Result<TrackerConfig> {
    let Some(path) = path else {
        let cfg = TrackerConfig::default();
        cfg.validate()?;
        return Ok(cfg);
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse(text: &str) -> anyhow::Result<TrackerConfig> {
    let mut cfg = TrackerConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected 'key = value', got '{line}'", idx + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        let float = || {
            value
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("line {}: {key}: {e}", idx + 1))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|e| anyhow::anyhow!("line {}: {key}: {e}", idx + 1))
        };
        match key {
            "lambda1" => cfg.solver.lambda1 = float()?,
            "lambda2" => cfg.solver.lambda2 = float()?,
            "mu0" => cfg.solver.mu0 = float()?,
            "mu_max" => cfg.solver.mu_max = float()?,
            "rho" => cfg.solver.rho = float()?,
            "K" => cfg.solver.iterations = count()?,
            "r" => cfg.solver.keep_ratio = float()?,
            "alpha" => cfg.solver.alpha = float()?,
            "padding" => cfg.padding = float()?,
            "scale_factor" => cfg.scale_factor = float()?,
            "scales" => cfg.scales = count()?,
            "sigma_factor" => cfg.sigma_factor = float()?,
            "window" => {
                cfg.window = value
                    .parse()
                    .map_err(|e| anyhow::anyhow!("line {}: {e}", idx + 1))?
            }
            "cell" => cfg.cell = count()?,
            other => bail!("line {}: unknown key '{other}'", idx + 1),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
