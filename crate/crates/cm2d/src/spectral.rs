//! Spectral workspace: 2D FFTs, the torus Poisson solve, and construction of
//! the stream-function jet field.
//!
//! Conventions. Transforms use Fourier-series normalization: the forward
//! transform of grid samples yields coefficients
//! `f̂_m = (1/n²) Σ_j f(x_j) e^{−i k_m·x_j}` for integer mode indices
//! `m ∈ [−n/2, n/2)` per axis and wavenumbers `k_j = 2π m_j / L`. Parseval
//! then reads `mean(|f|²) = Σ_m |f̂_m|²`, and the *unnormalized* inverse
//! transform evaluates the series on the grid. The Poisson solve divides by
//! `|k|²` with the mean gauge `ψ̂₀ = 0`, which makes the problem solvable for
//! any right-hand side.
//!
//! Stream-function jets are obtained by spectral differentiation
//! (multiplication by `i k`) before the inverse transforms: exact for every
//! resolved mode, and the map update needs node jets anyway. Two edge rules
//! keep even grids clean: when coefficients are zero-padded onto a finer
//! grid, the source Nyquist row is split half-and-half onto `±n_s/2` so the
//! embedded trigonometric interpolant stays real and symmetric; and the
//! Nyquist mode is zeroed inside first-derivative multipliers, avoiding the
//! asymmetric-derivative artifact.

use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{CmError, Result};
use crate::grid::PeriodicGrid;
use crate::hermite::{HermiteField, Jet};
use crate::scalar::Scalar;
use crate::velocity::VelocityField;

/// Integer mode index of FFT bin `a` on an `n`-point axis: `m ∈ [−n/2, n/2)`.
#[inline]
pub fn mode_of(a: usize, n: usize) -> i64 {
    if a < n.div_ceil(2) {
        a as i64
    } else {
        a as i64 - n as i64
    }
}

/// FFT bin of integer mode `m` on an `n`-point axis.
#[inline]
fn bin_of(m: i64, n: usize) -> usize {
    if m >= 0 {
        m as usize
    } else {
        (n as i64 + m) as usize
    }
}

/// Owns transform plans and scratch for one simulation thread.
///
/// `n_s` is the vorticity sampling grid, `n_psi ≥ n_s` the stream-function
/// representation grid. Plans for other sizes (diagnostics grids) are cached
/// on demand.
pub struct SpectralWorkspace<T: Scalar> {
    n_s: usize,
    n_psi: usize,
    length: T,
    planner: FftPlanner<T>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<T>>>,
    scratch: Vec<Complex<T>>,
    transpose: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralWorkspace<T> {
    /// Creates a workspace for sampling grid `n_s` and stream grid `n_psi`.
    pub fn new(n_s: usize, n_psi: usize, length: T) -> Result<Self> {
        if n_psi < n_s {
            return Err(CmError::InvalidParameter(format!(
                "stream grid ({n_psi}) must be at least the sampling grid ({n_s})"
            )));
        }
        if !(length.is_finite() && length > T::zero()) {
            return Err(CmError::InvalidParameter(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        Ok(Self {
            n_s,
            n_psi,
            length,
            planner: FftPlanner::new(),
            plans: HashMap::new(),
            scratch: Vec::new(),
            transpose: Vec::new(),
        })
    }

    /// Vorticity sampling grid size.
    pub fn n_s(&self) -> usize {
        self.n_s
    }

    /// Stream-function grid size.
    pub fn n_psi(&self) -> usize {
        self.n_psi
    }

    /// Domain side length.
    pub fn length(&self) -> T {
        self.length
    }

    fn plan(&mut self, n: usize, dir: FftDirection) -> Arc<dyn Fft<T>> {
        let planner = &mut self.planner;
        self.plans
            .entry((n, dir == FftDirection::Forward))
            .or_insert_with(|| match dir {
                FftDirection::Forward => planner.plan_fft_forward(n),
                FftDirection::Inverse => planner.plan_fft_inverse(n),
            })
            .clone()
    }

    /// In-place 2D FFT over an `n × n` row-major array: rows, then columns.
    fn fft2(&mut self, data: &mut [Complex<T>], n: usize, dir: FftDirection) {
        assert_eq!(data.len(), n * n, "fft2 buffer size");
        let fft = self.plan(n, dir);
        self.scratch
            .resize(fft.get_inplace_scratch_len(), Complex::new(T::zero(), T::zero()));
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
        self.transpose
            .resize(n * n, Complex::new(T::zero(), T::zero()));
        transpose_square(data, &mut self.transpose, n);
        for row in self.transpose.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
        transpose_square(&self.transpose, data, n);
    }

    /// Series coefficients of real grid samples (forward transform, `1/n²`).
    pub fn forward_coeffs(&mut self, values: &[T], n: usize) -> Vec<Complex<T>> {
        assert_eq!(values.len(), n * n, "sample buffer size");
        let mut data: Vec<Complex<T>> =
            values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft2(&mut data, n, FftDirection::Forward);
        let scale = T::one() / T::of_usize(n * n);
        for c in data.iter_mut() {
            *c = *c * scale;
        }
        data
    }

    /// Evaluates a coefficient array on its grid (unnormalized inverse).
    pub fn inverse_values(&mut self, coeffs: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
        let mut data = coeffs.to_vec();
        self.fft2(&mut data, n, FftDirection::Inverse);
        data
    }

    /// Solves `−Δψ = ω − mean(ω)` on the torus in Fourier space.
    ///
    /// Returns series coefficients `ψ̂_m = ω̂_m / |k_m|²` with the zero-mean
    /// gauge `ψ̂₀ = 0`.
    pub fn solve_stream(&mut self, omega: &[T]) -> Result<Vec<Complex<T>>> {
        let n = self.n_s;
        if omega.len() != n * n {
            return Err(CmError::InvalidParameter(format!(
                "vorticity sample array holds {} values, expected {}",
                omega.len(),
                n * n
            )));
        }
        let mut hat = self.forward_coeffs(omega, n);
        // (L/2π)² / |m|² converts integer mode indices to 1/|k|².
        let scale = self.length / T::TAU();
        let scale2 = scale * scale;
        for a2 in 0..n {
            let m2 = mode_of(a2, n);
            for a1 in 0..n {
                let m1 = mode_of(a1, n);
                let mm = (m1 * m1 + m2 * m2) as f64;
                let c = &mut hat[a2 * n + a1];
                if mm == 0.0 {
                    *c = Complex::new(T::zero(), T::zero());
                } else {
                    *c = *c * (scale2 / T::lit(mm));
                }
            }
        }
        Ok(hat)
    }

    /// Zero-pads series coefficients from the `n_s` grid onto the `n_psi`
    /// grid, splitting source Nyquist rows half-and-half onto `±n_s/2`.
    pub fn zero_pad(&self, src: &[Complex<T>]) -> Vec<Complex<T>> {
        let (n_s, n_psi) = (self.n_s, self.n_psi);
        assert_eq!(src.len(), n_s * n_s, "coefficient buffer size");
        if n_psi == n_s {
            return src.to_vec();
        }
        let half = T::lit(0.5);
        let mut dst = vec![Complex::new(T::zero(), T::zero()); n_psi * n_psi];
        // Per-axis targets: a non-Nyquist mode maps to itself; the Nyquist
        // mode −n_s/2 splits across ±n_s/2, both interior on the finer grid.
        let targets = |a: usize| -> Vec<(usize, T)> {
            let m = mode_of(a, n_s);
            if n_s % 2 == 0 && m == -((n_s / 2) as i64) {
                vec![(bin_of(m, n_psi), half), (bin_of(-m, n_psi), half)]
            } else {
                vec![(bin_of(m, n_psi), T::one())]
            }
        };
        for a2 in 0..n_s {
            for (b2, w2) in targets(a2) {
                for a1 in 0..n_s {
                    let c = src[a2 * n_s + a1];
                    for (b1, w1) in targets(a1) {
                        dst[b2 * n_psi + b1] += c * (w1 * w2);
                    }
                }
            }
        }
        dst
    }

    /// Realizes series coefficients as a Hermite jet field on the `n` grid:
    /// four inverse transforms of `(1, ik₁, ik₂, −k₁k₂)·coeffs`, with the
    /// Nyquist mode zeroed inside the first-derivative multipliers.
    pub fn hermite_from_coeffs(
        &mut self,
        coeffs: &[Complex<T>],
        n: usize,
    ) -> Result<HermiteField<T>> {
        if coeffs.len() != n * n {
            return Err(CmError::InvalidParameter(format!(
                "coefficient array holds {} entries, grid needs {}",
                coeffs.len(),
                n * n
            )));
        }
        let k_scale = T::TAU() / self.length;
        let k_line: Vec<T> = (0..n)
            .map(|a| {
                let m = mode_of(a, n);
                if n % 2 == 0 && m == -((n / 2) as i64) {
                    T::zero()
                } else {
                    T::lit(m as f64) * k_scale
                }
            })
            .collect();

        let mut planes: [Vec<Complex<T>>; 4] = [
            coeffs.to_vec(),
            coeffs.to_vec(),
            coeffs.to_vec(),
            coeffs.to_vec(),
        ];
        for a2 in 0..n {
            let k2 = k_line[a2];
            for a1 in 0..n {
                let k1 = k_line[a1];
                let i = a2 * n + a1;
                let ik1 = Complex::new(T::zero(), k1);
                let ik2 = Complex::new(T::zero(), k2);
                planes[1][i] = planes[1][i] * ik1;
                planes[2][i] = planes[2][i] * ik2;
                planes[3][i] = planes[3][i] * (ik1 * ik2);
            }
        }

        let mut jets: Vec<Jet<T>> = vec![[T::zero(); 4]; n * n];
        for (slot, plane) in planes.iter_mut().enumerate() {
            self.fft2(plane, n, FftDirection::Inverse);
            for (jet, c) in jets.iter_mut().zip(plane.iter()) {
                jet[slot] = c.re;
            }
        }

        let grid = PeriodicGrid::new(n, self.length)?;
        HermiteField::new(grid, jets)
    }

    /// Builds the divergence-free velocity field for stream coefficients.
    ///
    /// Zero-pads `ψ̂` onto the stream grid and realizes the jet planes
    /// `(ψ, ψ_x, ψ_y, ψ_xy)` there; the resulting Hermite stream
    /// interpolant's curl is the velocity.
    pub fn build_velocity(
        &mut self,
        psi_hat: &[Complex<T>],
        t: T,
        eps: T,
    ) -> Result<VelocityField<T>> {
        let padded = self.zero_pad(psi_hat);
        let psi = self.hermite_from_coeffs(&padded, self.n_psi)?;
        Ok(VelocityField::new(psi, t, eps))
    }
}

/// `dst[j·n + i] = src[i·n + j]` for square row-major arrays.
fn transpose_square<T: Copy>(src: &[T], dst: &mut [T], n: usize) {
    // Tiled to keep both sides cache-resident on large diagnostics grids.
    const TILE: usize = 32;
    for j0 in (0..n).step_by(TILE) {
        for i0 in (0..n).step_by(TILE) {
            for j in j0..(j0 + TILE).min(n) {
                for i in i0..(i0 + TILE).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::TAU;

    fn grid_samples(n: usize, length: f64, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let dx = length / n as f64;
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                v.push(f(i as f64 * dx, j as f64 * dx));
            }
        }
        v
    }

    #[test]
    fn transform_round_trip_is_identity() {
        let mut ws = SpectralWorkspace::<f64>::new(32, 32, TAU).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        let vals: Vec<f64> = (0..32 * 32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hat = ws.forward_coeffs(&vals, 32);
        let back = ws.inverse_values(&hat, 32);
        for (v, b) in vals.iter().zip(back.iter()) {
            assert!((v - b.re).abs() <= 1e-12 * v.abs().max(1.0), "{v} vs {}", b.re);
            assert!(b.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn parseval_matches_grid_mean_square() {
        let mut ws = SpectralWorkspace::<f64>::new(64, 64, TAU).unwrap();
        let vals = grid_samples(64, TAU, |x, y| x.cos() + 0.3 * (2.0 * y).sin());
        let hat = ws.forward_coeffs(&vals, 64);
        let spectral: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
        let grid: f64 = vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64;
        assert!(
            (spectral - grid).abs() <= 1e-12 * grid,
            "Parseval broken: {spectral} vs {grid}"
        );
    }

    #[test]
    fn poisson_solve_recovers_cosine_eigenfunction() {
        // −Δ cos x = cos x, so ψ = cos x exactly.
        let n = 64;
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let omega = grid_samples(n, TAU, |x, _| x.cos());
        let psi_hat = ws.solve_stream(&omega).unwrap();
        let psi = ws.inverse_values(&psi_hat, n);
        let exact = grid_samples(n, TAU, |x, _| x.cos());
        for (p, e) in psi.iter().zip(exact.iter()) {
            assert!((p.re - e).abs() <= 1e-13, "{} vs {e}", p.re);
        }
    }

    #[test]
    fn poisson_solve_uses_squared_wavenumber() {
        // ω = cos(3x)cos(4y) has |k|² = 25.
        let n = 64;
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let omega = grid_samples(n, TAU, |x, y| (3.0 * x).cos() * (4.0 * y).cos());
        let psi_hat = ws.solve_stream(&omega).unwrap();
        let psi = ws.inverse_values(&psi_hat, n);
        for (idx, p) in psi.iter().enumerate() {
            let (i, j) = (idx % n, idx / n);
            let (x, y) = (TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
            let e = (3.0 * x).cos() * (4.0 * y).cos() / 25.0;
            assert!((p.re - e).abs() <= 1e-12, "({x}, {y}): {} vs {e}", p.re);
        }
    }

    #[test]
    fn pure_mean_input_yields_zero_stream() {
        let n = 16;
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let omega = vec![7.0; n * n];
        let psi_hat = ws.solve_stream(&omega).unwrap();
        for c in &psi_hat {
            assert!(c.norm_sqr() <= 1e-24, "gauge did not kill the mean: {c}");
        }
    }

    #[test]
    fn laplacian_of_stream_reproduces_centered_vorticity() {
        // Reconstruct −Δψ spectrally and compare with ω − mean(ω).
        let n = 64;
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let omega = grid_samples(n, TAU, |x, y| {
            1.5 + x.cos() * (2.0 * y).sin() + 0.2 * (5.0 * x).sin()
        });
        let psi_hat = ws.solve_stream(&omega).unwrap();
        let mut lap = psi_hat.clone();
        for a2 in 0..n {
            for a1 in 0..n {
                let (m1, m2) = (mode_of(a1, n), mode_of(a2, n));
                let kk = (m1 * m1 + m2 * m2) as f64;
                lap[a2 * n + a1] *= kk;
            }
        }
        let back = ws.inverse_values(&lap, n);
        let mean = omega.iter().sum::<f64>() / omega.len() as f64;
        for (b, w) in back.iter().zip(omega.iter()) {
            let want = w - mean;
            assert!(
                (b.re - want).abs() <= 1e-10 * want.abs().max(1.0),
                "{} vs {want}",
                b.re
            );
        }
    }

    #[test]
    fn zero_padding_preserves_the_trig_interpolant() {
        // Content up to and including the coarse Nyquist row must re-emerge
        // exactly on the finer grid (Nyquist split keeps it real/symmetric).
        let n_s = 16;
        let n_psi = 48;
        let mut ws = SpectralWorkspace::<f64>::new(n_s, n_psi, TAU).unwrap();
        let f = |x: f64, y: f64| {
            (3.0 * x).cos() + 0.5 * (8.0 * x).cos() * (2.0 * y).cos() + (y - x).sin()
        };
        // cos(8x) on a 16-grid is pure Nyquist content in x; the symmetric
        // interpolant of its samples is cos(8x) itself.
        let hat = ws.forward_coeffs(&grid_samples(n_s, TAU, f), n_s);
        let padded = ws.zero_pad(&hat);
        let fine = ws.inverse_values(&padded, n_psi);
        let exact = grid_samples(n_psi, TAU, f);
        for (got, want) in fine.iter().zip(exact.iter()) {
            assert!(
                (got.re - want).abs() <= 1e-12,
                "padded interpolant off: {} vs {want}",
                got.re
            );
            assert!(got.im.abs() <= 1e-12, "imaginary residue {}", got.im);
        }
    }

    #[test]
    fn workspace_rejects_stream_grid_smaller_than_sampling_grid() {
        assert!(matches!(
            SpectralWorkspace::<f64>::new(64, 32, TAU),
            Err(CmError::InvalidParameter(_))
        ));
    }
}
