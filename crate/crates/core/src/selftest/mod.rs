//! Built-in consistency checks runnable from the CLI.
//!
//! The checks compare production code against the independent references in
//! [`oracle`]; they exist so a deployed binary can prove its numerics on the
//! machine it runs on, not only under `cargo test`.

pub mod oracle;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::solver::{
    self, SelectionMask, Shrinkage, SolverConfig, SpectralFilter,
};
use crate::spectral::{circular_correlate, dft2, gaussian_label, idft2, RealPlane};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error, or a short failure note.
    pub detail: String,
}

impl CheckResult {
    fn within(name: &'static str, worst: f64, tolerance: f64) -> CheckResult {
        CheckResult {
            name,
            passed: worst <= tolerance,
            detail: format!("max error {worst:.3e} (tolerance {tolerance:.1e})"),
        }
    }
}

fn random_plane(size: usize, rng: &mut ChaCha8Rng) -> RealPlane {
    RealPlane::from_fn(size, |_, _| rng.random_range(-1.0..1.0)).expect("finite fill")
}

fn check_transform_round_trip(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let plane = random_plane(12, rng);
        let back = idft2(&dft2(&plane).expect("forward")).expect("inverse");
        for (a, b) in plane.data().iter().zip(back.data()) {
            worst = worst.max((a - b).abs());
        }
    }
    CheckResult::within("transform round trip", worst, 1e-12)
}

fn check_transform_against_direct_sum(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let plane = random_plane(8, rng);
        let fast = dft2(&plane).expect("forward");
        let slow = oracle::direct_dft2(&plane);
        for (a, b) in fast.data().iter().zip(slow.data()) {
            worst = worst.max((a - b).norm());
        }
    }
    CheckResult::within("transform vs direct sum", worst, 1e-10)
}

fn check_correlation_against_direct_sum(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let theta = random_plane(8, rng);
        let x = random_plane(8, rng);
        let fast = circular_correlate(&theta, &x).expect("correlate");
        let slow = oracle::direct_correlate(&theta, &x);
        for (a, b) in fast.data().iter().zip(slow.data()) {
            worst = worst.max((a - b).abs());
        }
    }
    CheckResult::within("correlation vs direct sum", worst, 1e-10)
}

fn check_theta_update_stationarity(rng: &mut ChaCha8Rng) -> CheckResult {
    let size = 8;
    let spectrum = |rng: &mut ChaCha8Rng| {
        let data = (0..size * size)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        crate::spectral::ComplexPlane::new(size, data).expect("finite spectrum")
    };
    let (lambda2, mu) = (15.0, 1.0);
    let x_hat = spectrum(rng);
    let y_hat = spectrum(rng);
    let model = spectrum(rng);
    let prime = spectrum(rng);
    let eta = spectrum(rng);
    let theta = match solver::update_theta(&x_hat, &y_hat, Some(&model), &prime, &eta, lambda2, mu)
    {
        Ok(t) => t,
        Err(e) => {
            return CheckResult {
                name: "theta update stationarity",
                passed: false,
                detail: format!("update failed: {e}"),
            }
        }
    };
    let mut worst = 0.0f64;
    for j in 0..size * size {
        let (x, y, t) = (x_hat.data()[j], y_hat.data()[j], theta.data()[j]);
        let grad = x * (t * x.conj() - y.conj())
            + lambda2 * (t - model.data()[j])
            + 0.5 * mu * (t - prime.data()[j])
            + 0.5 * eta.data()[j];
        worst = worst.max(grad.norm());
    }
    CheckResult::within("theta update stationarity", worst, 1e-10)
}

fn check_shrinkage_against_golden_section(rng: &mut ChaCha8Rng) -> CheckResult {
    let (lambda1, mu) = (1.0, 2.0);
    let theta: Vec<RealPlane> = (0..3).map(|_| random_plane(4, rng)).collect();
    let eta: Vec<RealPlane> = (0..3).map(|_| random_plane(4, rng)).collect();
    let out = match solver::update_theta_prime(&theta, &eta, lambda1, mu) {
        Ok(o) => o,
        Err(e) => {
            return CheckResult {
                name: "shrinkage vs golden section",
                passed: false,
                detail: format!("shrinkage failed: {e}"),
            }
        }
    };
    let mut worst = 0.0f64;
    for j in 0..16 {
        let g: Vec<f64> = (0..3)
            .map(|i| theta[i].data()[j] + eta[i].data()[j] / mu)
            .collect();
        let reference = oracle::group_shrink_reference(&g, lambda1, mu);
        for i in 0..3 {
            worst = worst.max((out[i].data()[j] - reference[i]).abs());
        }
    }
    CheckResult::within("shrinkage vs golden section", worst, 1e-6)
}

fn check_solver_against_proximal_gradient(rng: &mut ChaCha8Rng) -> CheckResult {
    let size = 6;
    let channels = 2;
    let planes: Vec<RealPlane> = (0..channels).map(|_| random_plane(size, rng)).collect();
    let x = crate::features::FeatureTensor::new(planes.clone()).expect("tensor");
    let y = gaussian_label(size, 0.8).expect("label");
    let model_planes: Vec<RealPlane> = (0..channels)
        .map(|_| RealPlane::zeros(size).expect("zeros"))
        .collect();
    let cfg = SolverConfig { iterations: 50, ..SolverConfig::default() };
    let x_hat: Vec<_> = planes.iter().map(|p| dft2(p).expect("forward")).collect();
    let y_hat = dft2(&y).expect("forward");
    let model = SpectralFilter::from_spatial(&model_planes).expect("model");
    let ws = match solver::admm_solve(
        &x_hat,
        &y_hat,
        Some(&model),
        cfg.lambda2,
        Shrinkage::Group { lambda1: cfg.lambda1 },
        &cfg,
    ) {
        Ok(ws) => ws,
        Err(e) => {
            return CheckResult {
                name: "solver vs proximal gradient",
                passed: false,
                detail: format!("solver failed: {e}"),
            }
        }
    };
    let ours = oracle::learning_objective(
        x.planes(),
        &y,
        &ws.theta_prime,
        &model_planes,
        cfg.lambda1,
        cfg.lambda2,
    );
    let reference = oracle::proximal_gradient_solve(
        x.planes(),
        &y,
        &model_planes,
        cfg.lambda1,
        cfg.lambda2,
        4000,
    );
    let gap = (ours - reference.objective) / reference.objective.abs().max(1e-12);
    CheckResult {
        name: "solver vs proximal gradient",
        passed: gap <= 1e-3,
        detail: format!("relative objective gap {gap:.3e} (tolerance 1e-3)"),
    }
}

fn check_penalty_schedule(rng: &mut ChaCha8Rng) -> CheckResult {
    let x_hat = vec![dft2(&random_plane(4, rng)).expect("forward")];
    let y_hat = dft2(&random_plane(4, rng)).expect("forward");
    let cfg = SolverConfig { iterations: 5, ..SolverConfig::default() };
    let model = SpectralFilter::zeros(4, 1).expect("zeros");
    let ws = solver::admm_solve(
        &x_hat,
        &y_hat,
        Some(&model),
        cfg.lambda2,
        Shrinkage::Group { lambda1: cfg.lambda1 },
        &cfg,
    )
    .expect("solve");
    let expect = vec![1.0, 5.0, 20.0, 20.0, 20.0];
    CheckResult {
        name: "penalty schedule",
        passed: ws.mu_trace == expect,
        detail: format!("trace {:?}", ws.mu_trace),
    }
}

fn check_selection_count(rng: &mut ChaCha8Rng) -> CheckResult {
    let planes: Vec<RealPlane> = (0..2).map(|_| random_plane(10, rng)).collect();
    let mask = SelectionMask::top_m(&planes, solver::keep_count(10, 0.13)).expect("mask");
    CheckResult {
        name: "selection count",
        passed: mask.kept() == 13,
        detail: format!("kept {} of 100 locations (want 13)", mask.kept()),
    }
}

/// Runs every embedded check with a fixed seed and returns the results.
pub fn run_all() -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    vec![
        check_transform_round_trip(&mut rng),
        check_transform_against_direct_sum(&mut rng),
        check_correlation_against_direct_sum(&mut rng),
        check_theta_update_stationarity(&mut rng),
        check_shrinkage_against_golden_section(&mut rng),
        check_solver_against_proximal_gradient(&mut rng),
        check_penalty_schedule(&mut rng),
        check_selection_count(&mut rng),
    ]
}
