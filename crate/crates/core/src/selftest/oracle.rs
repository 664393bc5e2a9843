//! Reference implementations used to cross-check the production paths.
//!
//! Everything in here is deliberately naive: direct double loops instead of
//! FFTs, golden-section line search instead of closed-form shrinkage, and a
//! first-order solver instead of ADMM. None of these functions call into
//! [`crate::spectral`]'s transform internals or [`crate::solver`], so an
//! agreement between the two routes is meaningful evidence.

use rustfft::num_complex::Complex64;

use crate::spectral::{ComplexPlane, RealPlane};

/// O(D⁴) forward DFT by the definition sum.
pub fn direct_dft2(plane: &RealPlane) -> ComplexPlane {
    let d = plane.size();
    let mut out = Vec::with_capacity(d * d);
    let tau = -2.0 * std::f64::consts::PI / d as f64;
    for k in 0..d {
        for l in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..d {
                for x in 0..d {
                    let phase = tau * (k * y + l * x) as f64;
                    acc += plane[(y, x)] * Complex64::new(phase.cos(), phase.sin());
                }
            }
            out.push(acc);
        }
    }
    ComplexPlane::new(d, out).expect("direct DFT produced invalid plane")
}

/// O(D⁴) circular cross-correlation by the definition sum:
/// `out[Δ] = Σ_u θ[u]·x[u−Δ mod D]`.
pub fn direct_correlate(theta: &RealPlane, x: &RealPlane) -> RealPlane {
    let d = theta.size();
    RealPlane::from_fn(d, |dy, dx| {
        let mut acc = 0.0;
        for uy in 0..d {
            for ux in 0..d {
                let sy = (uy + d - dy) % d;
                let sx = (ux + d - dx) % d;
                acc += theta[(uy, ux)] * x[(sy, sx)];
            }
        }
        acc
    })
    .expect("direct correlation produced invalid plane")
}

/// O(D⁴) circular convolution: `out[v] = Σ_Δ a[Δ]·b[v−Δ mod D]`.
/// This is the adjoint pairing needed by the correlation gradient.
pub fn direct_convolve(a: &RealPlane, b: &RealPlane) -> RealPlane {
    let d = a.size();
    RealPlane::from_fn(d, |vy, vx| {
        let mut acc = 0.0;
        for dy in 0..d {
            for dx in 0..d {
                let sy = (vy + d - dy) % d;
                let sx = (vx + d - dx) % d;
                acc += a[(dy, dx)] * b[(sy, sx)];
            }
        }
        acc
    })
    .expect("direct convolution produced invalid plane")
}

/// The learning objective evaluated entirely in the spatial domain:
/// per-channel correlation residual energy, plus the channel-grouped
/// location sparsity penalty, plus the temporal anchor.
pub fn learning_objective(
    x: &[RealPlane],
    y: &RealPlane,
    theta: &[RealPlane],
    theta_model: &[RealPlane],
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let d = y.size();
    let mut total = 0.0;
    for (theta_i, x_i) in theta.iter().zip(x) {
        let response = direct_correlate(theta_i, x_i);
        for (r, label) in response.data().iter().zip(y.data()) {
            let e = r - label;
            total += e * e;
        }
    }
    for j in 0..d * d {
        let norm_sq: f64 = theta.iter().map(|p| p.data()[j] * p.data()[j]).sum();
        total += lambda1 * norm_sq.sqrt();
    }
    for (theta_i, model_i) in theta.iter().zip(theta_model) {
        for (a, b) in theta_i.data().iter().zip(model_i.data()) {
            let e = a - b;
            total += lambda2 * e * e;
        }
    }
    total
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Reference solution of the per-location shrinkage subproblem
/// `min_v λ1·‖v‖ + (μ/2)·‖g − v‖²` by line search along `g`.
///
/// The optimum is collinear with `g`, so a 1-D golden-section search over the
/// magnitude is exact up to bracket width.
pub fn group_shrink_reference(g: &[f64], lambda1: f64, mu: f64) -> Vec<f64> {
    let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; g.len()];
    }
    let energy = |t: f64| lambda1 * t + 0.5 * mu * (norm - t) * (norm - t);
    let t_star = golden_section_min(energy, 0.0, norm + lambda1 / mu + 1.0, 160);
    let t_star = t_star.max(0.0);
    g.iter().map(|v| v * t_star / norm).collect()
}

/// Result of [`proximal_gradient_solve`].
pub struct ProxGradSolution {
    pub theta: Vec<RealPlane>,
    pub objective: f64,
    pub iterations: usize,
}

/// Accelerated proximal-gradient solver for the learning objective, used as
/// an independent optimum finder. Works channel-wise in the spatial domain
/// with direct correlation sums; the only coupling between channels is the
/// grouped shrinkage step.
pub fn proximal_gradient_solve(
    x: &[RealPlane],
    y: &RealPlane,
    theta_model: &[RealPlane],
    lambda1: f64,
    lambda2: f64,
    max_iters: usize,
) -> ProxGradSolution {
    let d = y.size();
    let channels = x.len();

    // Upper-bound the smooth term's curvature per channel by power iteration
    // on w ↦ 2·conv(corr(w, x), x) + 2λ2·w.
    let mut lipschitz = 0.0f64;
    for x_i in x {
        let mut w = RealPlane::from_fn(d, |y_i, x_j| ((y_i * 31 + x_j * 17) % 13) as f64 / 13.0 + 0.1)
            .expect("power iteration seed");
        let mut eigen = 1.0;
        for _ in 0..80 {
            let hw = hessian_apply(&w, x_i, lambda2);
            eigen = hw.l2_norm() / w.l2_norm().max(1e-300);
            let scale = 1.0 / hw.l2_norm().max(1e-300);
            let mut next = hw;
            for v in next.data_mut() {
                *v *= scale;
            }
            w = next;
        }
        lipschitz = lipschitz.max(eigen);
    }
    let step = 1.0 / (lipschitz * 1.05 + 1e-12);

    let zeros = vec![RealPlane::zeros(d).expect("zero plane"); channels];
    let mut theta = zeros.clone();
    let mut momentum = theta.clone();
    let mut t_prev = 1.0f64;
    let mut best_obj = learning_objective(x, y, &theta, theta_model, lambda1, lambda2);
    let mut best_theta = theta.clone();
    let mut prev_obj = best_obj;
    let mut stall = 0usize;
    let mut iterations = 0usize;

    for k in 0..max_iters {
        iterations = k + 1;
        // Gradient of the smooth part at the momentum point.
        let mut candidate: Vec<RealPlane> = Vec::with_capacity(channels);
        for i in 0..channels {
            let response = direct_correlate(&momentum[i], &x[i]);
            let residual = RealPlane::from_fn(d, |ry, rx| response[(ry, rx)] - y[(ry, rx)])
                .expect("residual plane");
            let back = direct_convolve(&residual, &x[i]);
            let plane = RealPlane::from_fn(d, |py, px| {
                let grad = 2.0 * back[(py, px)]
                    + 2.0 * lambda2 * (momentum[i][(py, px)] - theta_model[i][(py, px)]);
                momentum[i][(py, px)] - step * grad
            })
            .expect("gradient step plane");
            candidate.push(plane);
        }
        // Grouped shrinkage with threshold step·λ1.
        let mut next = vec![RealPlane::zeros(d).expect("zero plane"); channels];
        for j in 0..d * d {
            let norm_sq: f64 = candidate.iter().map(|p| p.data()[j] * p.data()[j]).sum();
            let norm = norm_sq.sqrt();
            let factor = if norm > 0.0 {
                (1.0 - step * lambda1 / norm).max(0.0)
            } else {
                0.0
            };
            for i in 0..channels {
                next[i].data_mut()[j] = candidate[i].data()[j] * factor;
            }
        }

        let obj = learning_objective(x, y, &next, theta_model, lambda1, lambda2);
        if obj < best_obj {
            best_obj = obj;
            best_theta = next.clone();
        }

        // Nesterov momentum with function-value restart.
        if obj > prev_obj {
            t_prev = 1.0;
            momentum = next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt());
            let beta = (t_prev - 1.0) / t_next;
            for i in 0..channels {
                let cur = next[i].clone();
                let prev = &theta[i];
                let plane = RealPlane::from_fn(d, |py, px| {
                    cur[(py, px)] + beta * (cur[(py, px)] - prev[(py, px)])
                })
                .expect("momentum plane");
                momentum[i] = plane;
            }
            t_prev = t_next;
        }

        let improvement = (prev_obj - obj).abs() / prev_obj.abs().max(1.0);
        stall = if improvement < 1e-14 { stall + 1 } else { 0 };
        theta = next;
        prev_obj = obj;
        if stall >= 200 {
            break;
        }
    }

    ProxGradSolution {
        theta: best_theta,
        objective: best_obj,
        iterations,
    }
}

fn hessian_apply(w: &RealPlane, x: &RealPlane, lambda2: f64) -> RealPlane {
    let d = w.size();
    let corr = direct_correlate(w, x);
    let back = direct_convolve(&corr, x);
    RealPlane::from_fn(d, |y, x_j| 2.0 * back[(y, x_j)] + 2.0 * lambda2 * w[(y, x_j)])
        .expect("hessian apply")
}
