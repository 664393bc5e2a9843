//! Randomized invariants over the numeric core: transform identities, prox
//! optimality, selection counts, the penalty schedule, and metric curve
//! shapes.

use ladcf::bench::{score_against, Trajectory};
use ladcf::solver::{self, SelectionMask};
use ladcf::spectral::{circular_correlate, dft2, idft2, RealPlane};
use ladcf::{selftest::oracle, BoundingBox};
use proptest::prelude::*;

fn plane(size: usize) -> impl Strategy<Value = RealPlane> {
    prop::collection::vec(-1.0..1.0f64, size * size)
        .prop_map(move |data| RealPlane::new(size, data).unwrap())
}

fn sized_plane() -> impl Strategy<Value = RealPlane> {
    (2usize..=16).prop_flat_map(plane)
}

fn plane_pair() -> impl Strategy<Value = (RealPlane, RealPlane)> {
    (2usize..=16).prop_flat_map(|size| (plane(size), plane(size)))
}

fn bbox() -> impl Strategy<Value = BoundingBox> {
    (-20.0..100.0f64, -20.0..100.0f64, 1.0..60.0f64, 1.0..60.0f64)
        .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, w, h).unwrap())
}

proptest! {
    #[test]
    fn transform_round_trip(p in sized_plane()) {
        let back = idft2(&dft2(&p).unwrap()).unwrap();
        let tol = 1e-10 * (1.0 + p.max_abs());
        for (a, b) in p.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= tol, "round trip drifted by {}", (a - b).abs());
        }
    }

    #[test]
    fn transform_linearity((p, q) in plane_pair(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let size = p.size();
        let combined = RealPlane::from_fn(size, |y, x| a * p[(y, x)] + b * q[(y, x)]).unwrap();
        let lhs = dft2(&combined).unwrap();
        let (fp, fq) = (dft2(&p).unwrap(), dft2(&q).unwrap());
        let scale = 1.0 + lhs.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((l, vp), vq) in lhs.data().iter().zip(fp.data()).zip(fq.data()) {
            let rhs = a * vp + b * vq;
            prop_assert!((l - rhs).norm() <= 1e-10 * scale);
        }
    }

    /// The fft route must agree with the direct double sum for every D ≤ 16.
    #[test]
    fn correlation_theorem((theta, x) in plane_pair()) {
        let fast = circular_correlate(&theta, &x).unwrap();
        let slow = oracle::direct_correlate(&theta, &x);
        let tol = 1e-10 * (1.0 + slow.max_abs());
        for (f, s) in fast.data().iter().zip(slow.data()) {
            prop_assert!((f - s).abs() <= tol, "correlation routes split by {}", (f - s).abs());
        }
    }

    #[test]
    fn parseval_energy(p in sized_plane()) {
        let spatial: f64 = p.data().iter().map(|v| v * v).sum();
        let spectrum = dft2(&p).unwrap();
        let d2 = (p.size() * p.size()) as f64;
        let spectral: f64 = spectrum.data().iter().map(|v| v.norm_sqr()).sum::<f64>() / d2;
        prop_assert!((spatial - spectral).abs() <= 1e-9 * (1.0 + spatial));
    }

    /// The grouped shrinkage output must beat nearby candidates on its own
    /// subproblem energy λ1‖v‖ + (μ/2)‖g − v‖².
    #[test]
    fn shrinkage_is_locally_optimal(
        g in prop::collection::vec(-2.0..2.0f64, 1..6),
        lambda1 in 0.1..3.0f64,
        mu in 0.3..5.0f64,
        jitter in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let channels = g.len();
        let theta: Vec<RealPlane> = g
            .iter()
            .map(|&v| RealPlane::from_fn(2, |y, x| if (y, x) == (0, 0) { v } else { 0.0 }).unwrap())
            .collect();
        let eta = vec![RealPlane::zeros(2).unwrap(); channels];
        let out = solver::update_theta_prime(&theta, &eta, lambda1, mu).unwrap();
        let v_star: Vec<f64> = out.iter().map(|p| p.data()[0]).collect();

        let energy = |v: &[f64]| {
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let dist: f64 = v.iter().zip(&g).map(|(a, b)| (a - b) * (a - b)).sum();
            lambda1 * norm + 0.5 * mu * dist
        };
        let best = energy(&v_star);
        prop_assert!(best <= energy(&vec![0.0; channels]) + 1e-12);
        prop_assert!(best <= energy(&g) + 1e-12);
        for step in [1e-3, 1e-2, 0.1] {
            let moved: Vec<f64> = v_star
                .iter()
                .zip(&jitter)
                .map(|(v, j)| v + step * j)
                .collect();
            prop_assert!(best <= energy(&moved) + 1e-12, "prox beaten at step {step}");
        }
    }

    #[test]
    fn selection_keeps_exactly_m(
        size in 2usize..=10,
        seed_a in prop::collection::vec(-1.0..1.0f64, 100),
        m_frac in 0.0..1.0f64,
    ) {
        let fill = |offset: usize| {
            RealPlane::from_fn(size, |y, x| {
                // Strictly nonzero pseudo-texture: group norms never tie at 0.
                0.1 + seed_a[(offset + y * size + x) % seed_a.len()].abs()
            })
            .unwrap()
        };
        let planes = vec![fill(0), fill(7)];
        let locations = size * size;
        let m = ((m_frac * locations as f64) as usize).clamp(1, locations);
        let mask = SelectionMask::top_m(&planes, m).unwrap();
        prop_assert_eq!(mask.kept(), m);
        let mut masked = planes.clone();
        mask.apply(&mut masked);
        let survivors = (0..locations)
            .filter(|j| masked.iter().any(|p| p.data()[*j] != 0.0))
            .count();
        prop_assert_eq!(survivors, m);
    }

    #[test]
    fn penalty_schedule_ramps_to_the_cap(
        mu0 in 0.01..5.0f64,
        rho in 1.1..10.0f64,
        cap_factor in 1.0..50.0f64,
    ) {
        let mu_max = mu0 * cap_factor;
        let mut mu = mu0;
        let mut previous = mu;
        for _ in 0..64 {
            mu = solver::advance_penalty(mu, rho, mu_max);
            prop_assert!(mu >= previous, "penalty decreased");
            prop_assert!(mu <= mu_max + 1e-12, "penalty overshot the cap");
            previous = mu;
        }
        prop_assert!((mu - mu_max).abs() <= 1e-9 * mu_max, "never reached the cap");
    }

    #[test]
    fn metric_curves_are_monotone(
        gt in prop::collection::vec(bbox(), 2..40),
        dx in -30.0..30.0f64,
        dy in -30.0..30.0f64,
        sw in 0.5..1.5f64,
        sh in 0.5..1.5f64,
    ) {
        let boxes: Vec<BoundingBox> = gt
            .iter()
            .map(|b| {
                BoundingBox::new(b.x + dx, b.y + dy, (b.w * sw).max(1.0), (b.h * sh).max(1.0))
                    .unwrap()
            })
            .collect();
        let truth: Vec<Option<BoundingBox>> = gt.iter().copied().map(Some).collect();
        let s = score_against(&Trajectory { boxes }, &truth).unwrap();
        prop_assert_eq!(s.success.len(), 101);
        prop_assert_eq!(s.precision.len(), 51);
        for pair in s.success.windows(2) {
            prop_assert!(pair[1] <= pair[0]);
        }
        for pair in s.precision.windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
        let mean_success = s.success.iter().sum::<f64>() / s.success.len() as f64;
        prop_assert!((s.auc - mean_success).abs() <= 1e-12);
        prop_assert_eq!(s.op, s.success[50]);
        prop_assert_eq!(s.dp, s.precision[20]);
    }
}
