//! Square real/complex planes and the 2-D DFT layer every other module
//! builds on.
//!
//! Conventions, fixed once here so the solver algebra stays constant-free:
//! - forward DFT is unnormalized, the inverse carries the full 1/D² factor;
//! - correlation is `F⁻¹(θ̂ ⊙ x̂*)`, so `circular_correlate(θ, x)[Δ] =
//!   Σ_u θ[u]·x[u−Δ mod D]`;
//! - labels and shift offsets live in origin-centered coordinates: the
//!   Gaussian label peaks at index (0,0) and distances wrap around.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// The complex scalar type of every spectrum in this crate, re-exported so
/// downstream code can construct [`ComplexPlane`] contents by name.
pub use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Hard bound on the imaginary residue allowed to survive an inverse
/// transform. Anything larger means the input spectrum was not conjugate
/// symmetric, i.e. it never came from a real plane.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// Row-major D×D grid of real samples. All entries are finite; D ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPlane {
    size: usize,
    data: Vec<f64>,
}

/// Row-major D×D grid of complex bins, same layout as [`RealPlane`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPlane {
    size: usize,
    data: Vec<Complex64>,
}

impl RealPlane {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidInput(format!("plane size {size} < 2")));
        }
        if data.len() != size * size {
            return Err(Error::ShapeMismatch(format!(
                "plane of size {size} needs {} entries, got {}",
                size * size,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in real plane".into()));
        }
        Ok(Self { size, data })
    }

    pub fn zeros(size: usize) -> Result<Self> {
        Self::new(size, vec![0.0; size * size])
    }

    /// Builds a plane by evaluating `f(row, col)`.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidInput(format!("plane size {size} < 2")));
        }
        let mut data = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                data.push(f(y, x));
            }
        }
        Self::new(size, data)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for RealPlane {
    type Output = f64;
    fn index(&self, (y, x): (usize, usize)) -> &f64 {
        &self.data[y * self.size + x]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealPlane {
    fn index_mut(&mut self, (y, x): (usize, usize)) -> &mut f64 {
        &mut self.data[y * self.size + x]
    }
}

impl ComplexPlane {
    pub fn new(size: usize, data: Vec<Complex64>) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidInput(format!("plane size {size} < 2")));
        }
        if data.len() != size * size {
            return Err(Error::ShapeMismatch(format!(
                "plane of size {size} needs {} entries, got {}",
                size * size,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in complex plane".into()));
        }
        Ok(Self { size, data })
    }

    pub fn zeros(size: usize) -> Result<Self> {
        Self::new(size, vec![Complex64::new(0.0, 0.0); size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

impl std::ops::Index<(usize, usize)> for ComplexPlane {
    type Output = Complex64;
    fn index(&self, (y, x): (usize, usize)) -> &Complex64 {
        &self.data[y * self.size + x]
    }
}

/// FFT plans are immutable once built; cache them per (size, direction).
fn plan(size: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((size, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(size)
            } else {
                planner.plan_fft_inverse(size)
            }
        })
        .clone()
}

/// Row pass then column pass; rustfft handles any length so D is not
/// restricted to powers of two.
fn fft2_in_place(data: &mut [Complex64], size: usize, forward: bool) {
    let fft = plan(size, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(size) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); size];
    for x in 0..size {
        for y in 0..size {
            column[y] = data[y * size + x];
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for y in 0..size {
            data[y * size + x] = column[y];
        }
    }
}

/// Unnormalized forward 2-D DFT.
pub fn dft2(plane: &RealPlane) -> Result<ComplexPlane> {
    let size = plane.size;
    let mut data: Vec<Complex64> = plane.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut data, size, true);
    ComplexPlane::new(size, data)
}

/// Inverse 2-D DFT with the 1/D² normalization. The imaginary residue left
/// after the transform must stay below [`IMAG_RESIDUE_TOL`]; a larger residue
/// is reported as a conjugate-symmetry error rather than silently dropped.
pub fn idft2(spectrum: &ComplexPlane) -> Result<RealPlane> {
    let size = spectrum.size;
    let mut data = spectrum.data.clone();
    fft2_in_place(&mut data, size, false);
    let norm = 1.0 / (size * size) as f64;
    let mut residue = 0.0f64;
    let mut out = Vec::with_capacity(data.len());
    for v in &data {
        let scaled = v * norm;
        residue = residue.max(scaled.im.abs());
        out.push(scaled.re);
    }
    if residue >= IMAG_RESIDUE_TOL {
        return Err(Error::ConjugateSymmetry {
            residue,
            tolerance: IMAG_RESIDUE_TOL,
        });
    }
    RealPlane::new(size, out)
}

/// Circular cross-correlation `F⁻¹(θ̂ ⊙ x̂*)`.
///
/// Output bin Δ holds `Σ_u θ[u]·x[u−Δ mod D]`: the inner product of θ with
/// x circularly shifted by Δ.
pub fn circular_correlate(theta: &RealPlane, x: &RealPlane) -> Result<RealPlane> {
    if theta.size != x.size {
        return Err(Error::ShapeMismatch(format!(
            "correlate: {}×{0} vs {}×{1}",
            theta.size, x.size
        )));
    }
    let theta_hat = dft2(theta)?;
    let x_hat = dft2(x)?;
    let product: Vec<Complex64> = theta_hat
        .data
        .iter()
        .zip(&x_hat.data)
        .map(|(t, s)| t * s.conj())
        .collect();
    idft2(&ComplexPlane::new(theta.size, product)?)
}

/// Gaussian regression label with mode 1 at bin (0,0) and wrap-around
/// distances, so the peak sits at zero shift rather than the plane center.
pub fn gaussian_label(size: usize, sigma: f64) -> Result<RealPlane> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("label sigma {sigma} must be positive")));
    }
    let wrap = |k: usize| -> f64 { k.min(size - k) as f64 };
    RealPlane::from_fn(size, |y, x| {
        let dy = wrap(y);
        let dx = wrap(x);
        (-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp()
    })
}

/// Separable 2-D Hann window `w(i)·w(j)` with `w(i) = 0.5·(1 − cos(2πi/(D−1)))`.
/// Border entries are exactly zero.
pub fn hann_window(size: usize) -> Result<RealPlane> {
    if size < 2 {
        return Err(Error::InvalidInput(format!("window size {size} < 2")));
    }
    let one_d: Vec<f64> = (0..size)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (size - 1) as f64).cos()))
        .collect();
    RealPlane::from_fn(size, |y, x| one_d[y] * one_d[x])
}

/// Signed circular offset of index `i` on a ring of length `size`, mapped
/// into `[−D/2, D/2)`.
pub fn signed_offset(i: usize, size: usize) -> i64 {
    let i = i as i64;
    let d = size as i64;
    if i < (d + 1) / 2 {
        i
    } else {
        i - d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selftest::oracle;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_plane(size: usize, rng: &mut ChaCha8Rng) -> RealPlane {
        RealPlane::from_fn(size, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn constant_plane_concentrates_at_dc() {
        let c = 0.7;
        let plane = RealPlane::from_fn(8, |_, _| c).unwrap();
        let hat = dft2(&plane).unwrap();
        assert!((hat[(0, 0)].re - c * 64.0).abs() < 1e-12);
        assert!(hat[(0, 0)].im.abs() < 1e-12);
        for (i, v) in hat.data().iter().enumerate() {
            if i != 0 {
                assert!(v.norm() < 1e-10, "bin {i} should vanish, got {v}");
            }
        }
    }

    #[test]
    fn unit_impulse_has_flat_spectrum() {
        let mut plane = RealPlane::zeros(8).unwrap();
        plane[(0, 0)] = 1.0;
        let hat = dft2(&plane).unwrap();
        for v in hat.data() {
            assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_reproduces_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &d in &[2usize, 4, 8, 16, 50] {
            let plane = random_plane(d, &mut rng);
            let back = idft2(&dft2(&plane).unwrap()).unwrap();
            let scale = plane.max_abs().max(1e-300);
            for (a, b) in plane.data().iter().zip(back.data()) {
                assert!((a - b).abs() / scale < 1e-10, "round-trip drift at D={d}");
            }
        }
    }

    #[test]
    fn forward_matches_direct_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &d in &[2usize, 4, 8] {
            let plane = random_plane(d, &mut rng);
            let fast = dft2(&plane).unwrap();
            let direct = oracle::direct_dft2(&plane);
            for (a, b) in fast.data().iter().zip(direct.data()) {
                assert!((a - b).norm() < 1e-9, "direct DFT mismatch at D={d}");
            }
        }
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let mut spec = ComplexPlane::zeros(4).unwrap();
        // Bin (1,0) without its mirror (3,0): no real plane has this spectrum.
        spec.data_mut()[4] = Complex64::new(1.0, 2.0);
        match idft2(&spec) {
            Err(Error::ConjugateSymmetry { residue, .. }) => assert!(residue > IMAG_RESIDUE_TOL),
            other => panic!("expected conjugate-symmetry error, got {other:?}"),
        }
    }

    #[test]
    fn parseval_energy_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let plane = random_plane(16, &mut rng);
        let hat = dft2(&plane).unwrap();
        let spatial: f64 = plane.data().iter().map(|v| v * v).sum();
        let spectral: f64 = hat.data().iter().map(|v| v.norm_sqr()).sum::<f64>() / 256.0;
        assert!((spatial - spectral).abs() < 1e-9 * spatial.max(1.0));
    }

    #[test]
    fn correlate_constant_planes() {
        let c = 0.5;
        let plane = RealPlane::from_fn(4, |_, _| c).unwrap();
        let out = circular_correlate(&plane, &plane).unwrap();
        for v in out.data() {
            assert!((v - 16.0 * c * c).abs() < 1e-12);
        }
    }

    #[test]
    fn correlate_with_impulse_reverses() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let x = random_plane(5, &mut rng);
        let mut impulse = RealPlane::zeros(5).unwrap();
        impulse[(0, 0)] = 1.0;
        let out = circular_correlate(&impulse, &x).unwrap();
        for y in 0..5 {
            for x_i in 0..5 {
                let expect = x[((5 - y) % 5, (5 - x_i) % 5)];
                assert!((out[(y, x_i)] - expect).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn correlate_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for &d in &[3usize, 4, 8] {
            let theta = random_plane(d, &mut rng);
            let x = random_plane(d, &mut rng);
            let fast = circular_correlate(&theta, &x).unwrap();
            let direct = oracle::direct_correlate(&theta, &x);
            for (a, b) in fast.data().iter().zip(direct.data()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn label_peaks_at_origin_and_wraps() {
        let label = gaussian_label(8, 1.0).unwrap();
        assert_eq!(label[(0, 0)], 1.0);
        assert!((label[(1, 0)] - (-0.5f64).exp()).abs() < 1e-15);
        // Wrap-around symmetry: index −1 ≡ 7.
        assert_eq!(label[(1, 0)], label[(7, 0)]);
        assert_eq!(label[(0, 3)], label[(0, 5)]);
        for v in label.data() {
            assert!(*v > 0.0 && *v <= 1.0);
        }
    }

    #[test]
    fn label_rejects_bad_sigma() {
        assert!(gaussian_label(8, 0.0).is_err());
        assert!(gaussian_label(8, f64::NAN).is_err());
    }

    #[test]
    fn hann_profile_matches_closed_form() {
        let w = hann_window(4).unwrap();
        let expect_1d = [0.0, 0.75, 0.75, 0.0];
        for y in 0..4 {
            for x in 0..4 {
                assert!((w[(y, x)] - expect_1d[y] * expect_1d[x]).abs() < 1e-15);
            }
        }
        // Odd size: exact 1 at the center.
        let w5 = hann_window(5).unwrap();
        assert_eq!(w5[(2, 2)], 1.0);
        for v in w5.data() {
            assert!(*v >= 0.0 && *v <= 1.0);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert!(RealPlane::new(2, vec![0.0, f64::INFINITY, 0.0, 0.0]).is_err());
        assert!(RealPlane::new(1, vec![0.0]).is_err());
    }

    #[test]
    fn signed_offsets_cover_half_open_range() {
        assert_eq!(signed_offset(0, 8), 0);
        assert_eq!(signed_offset(3, 8), 3);
        assert_eq!(signed_offset(4, 8), -4);
        assert_eq!(signed_offset(7, 8), -1);
        assert_eq!(signed_offset(2, 5), 2);
        assert_eq!(signed_offset(3, 5), -2);
    }
}
