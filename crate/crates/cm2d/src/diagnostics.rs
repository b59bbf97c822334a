//! Conservation ledgers, the vorticity spectrum, the analyticity-radius
//! fit, and arbitrary-resolution zoom rendering.
//!
//! Everything here is read-only over the solver state: vorticity is always
//! the pullback of the initial condition through the current map stack, so
//! any lattice — the conservation grid, the spectrum grid, a zoom window a
//! thousand times finer than the map grid — is just a set of evaluation
//! points.

use rayon::prelude::*;

use crate::error::{CmError, Result};
use crate::flowmap::MapStack;
use crate::init::InitialCondition;
use crate::scalar::Scalar;
use crate::spectral::{mode_of, SpectralWorkspace};
use crate::velocity::VelocityField;

/// One diagnostics row: conserved quantities and their drift from `t = 0`.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRecord<T: Scalar> {
    pub t: T,
    /// `‖ω‖²_{L²}` on the evaluation lattice.
    pub enstrophy: T,
    /// `‖u‖²_{L²}` on the evaluation lattice.
    pub energy: T,
    /// Current minus initial enstrophy (exactly 0 on the first record).
    pub enstrophy_error: T,
    /// Current minus initial energy (exactly 0 on the first record).
    pub energy_error: T,
    /// Active-map determinant deviation at record time.
    pub det_error: T,
    /// Remaps performed so far.
    pub remap_count: usize,
}

/// Running conservation ledger; the first observation fixes the baseline.
#[derive(Debug, Default, Clone)]
pub struct Conservation<T: Scalar> {
    baseline: Option<(T, T)>,
}

impl<T: Scalar> Conservation<T> {
    pub fn new() -> Self {
        Self { baseline: None }
    }

    /// Ledger with a pre-established `(enstrophy, energy)` baseline, so a
    /// restarted run reports drift against the original initial values.
    pub fn with_baseline(baseline: Option<(T, T)>) -> Self {
        Self { baseline }
    }

    /// The `(enstrophy, energy)` reference, once the first record fixed it.
    pub fn baseline(&self) -> Option<(T, T)> {
        self.baseline
    }

    /// Folds one measurement into the ledger. The very first call defines
    /// the reference values, so its errors are `x − x = 0` exactly.
    pub fn record(
        &mut self,
        t: T,
        enstrophy: T,
        energy: T,
        det_error: T,
        remap_count: usize,
    ) -> DiagnosticsRecord<T> {
        let (e0, u0) = *self.baseline.get_or_insert((enstrophy, energy));
        DiagnosticsRecord {
            t,
            enstrophy,
            energy,
            enstrophy_error: enstrophy - e0,
            energy_error: energy - u0,
            det_error,
            remap_count,
        }
    }
}

/// Pullback vorticity `ω₀(χ(x_j))` on the uniform `n_eval²` node lattice,
/// row-major with row 0 at `y = 0`.
pub fn pullback_values<T: Scalar>(
    maps: &MapStack<T>,
    ic: &InitialCondition<T>,
    n_eval: usize,
) -> Result<Vec<T>> {
    let length = maps.active().grid().length();
    let h = length / T::of_usize(n_eval);
    let mut vals = vec![T::zero(); n_eval * n_eval];
    vals.par_chunks_mut(n_eval)
        .enumerate()
        .try_for_each(|(j, row)| -> Result<()> {
            let y = T::of_usize(j) * h;
            for (i, v) in row.iter_mut().enumerate() {
                *v = ic.value(maps.eval([T::of_usize(i) * h, y])?)?;
            }
            Ok(())
        })?;
    Ok(vals)
}

/// `‖ω‖²_{L²} = (L/n)²·Σ_j ω(x_j)²` of the pullback vorticity.
pub fn enstrophy_l2<T: Scalar>(
    maps: &MapStack<T>,
    ic: &InitialCondition<T>,
    n_eval: usize,
) -> Result<T> {
    let length = maps.active().grid().length();
    if n_eval < maps.active().grid().n() {
        return Err(CmError::InvalidParameter(format!(
            "evaluation grid {n_eval} is coarser than the map grid {}",
            maps.active().grid().n()
        )));
    }
    let values = pullback_values(maps, ic, n_eval)?;
    Ok(enstrophy_of_samples(&values, length))
}

/// `‖ω‖²_{L²} = (L/n)²·Σ_j ω_j²` of grid samples on a torus of side `length`.
pub fn enstrophy_of_samples<T: Scalar>(values: &[T], length: T) -> T {
    // Per-chunk partial sums folded sequentially: the summation order is
    // fixed regardless of how rayon schedules the chunks, keeping repeated
    // runs bit-identical.
    let chunk = values.len().div_ceil(64).max(1024);
    let partial: Vec<T> = values
        .par_chunks(chunk)
        .map(|c| c.iter().fold(T::zero(), |a, &v| a + v * v))
        .collect();
    let sum = partial.iter().fold(T::zero(), |a, &r| a + r);
    sum * length * length / T::of_usize(values.len())
}

/// `‖u‖²_{L²}` of the velocity induced by `n × n` vorticity samples.
///
/// The velocity never has to be formed: with series coefficients `ω̂_m` of
/// the samples, the stream function is `ψ̂_m = ω̂_m/|k_m|²` and
/// `‖u‖² = L²·Σ_{m≠0} |ω̂_m|²/|k_m|²` by Parseval. This measures the energy
/// carried by the transported vorticity itself on the evaluation lattice,
/// independent of the coarser stream-function grid driving the solver.
pub fn energy_of_samples<T: Scalar>(
    values: &[T],
    n: usize,
    ws: &mut SpectralWorkspace<T>,
) -> Result<T> {
    if values.len() != n * n {
        return Err(CmError::InvalidParameter(format!(
            "energy sample array holds {} values, expected {}",
            values.len(),
            n * n
        )));
    }
    let hat = ws.forward_coeffs(values, n);
    let length = ws.length();
    let scale = length / T::TAU();
    let scale2 = scale * scale;
    let mut sum = T::zero();
    for a2 in 0..n {
        let m2 = mode_of(a2, n);
        for a1 in 0..n {
            let m1 = mode_of(a1, n);
            let mm = (m1 * m1 + m2 * m2) as f64;
            if mm == 0.0 {
                continue;
            }
            let c = hat[a2 * n + a1];
            sum += (c.re * c.re + c.im * c.im) * (scale2 / T::lit(mm));
        }
    }
    Ok(sum * length * length)
}

/// `‖u‖²_{L²} = (L/n)²·Σ_j |u(x_j)|²` of a velocity field.
pub fn energy_l2<T: Scalar>(velocity: &VelocityField<T>, n_eval: usize) -> Result<T> {
    let length = velocity.psi().grid().length();
    let h = length / T::of_usize(n_eval);
    // Deterministic summation: see enstrophy_l2.
    let mut rows = vec![T::zero(); n_eval];
    rows.par_iter_mut()
        .enumerate()
        .try_for_each(|(j, out)| -> Result<()> {
            let y = T::of_usize(j) * h;
            let mut row = T::zero();
            for i in 0..n_eval {
                let u = velocity.velocity([T::of_usize(i) * h, y])?;
                row += u[0] * u[0] + u[1] * u[1];
            }
            *out = row;
            Ok(())
        })?;
    let sum = rows.iter().fold(T::zero(), |a, &r| a + r);
    Ok(sum * h * h)
}

/// The shell-binned vorticity spectrum `E_ω(K) = ½·Σ_{K≤|m|<K+1} |ω̂_m|²`.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Scalar> {
    shells: Vec<T>,
}

impl<T: Scalar> Spectrum<T> {
    /// Builds a spectrum directly from shell values (index = shell `K`).
    pub fn from_shells(shells: Vec<T>) -> Self {
        Self { shells }
    }

    /// Shell values, indexed by `K` starting at 0.
    pub fn shells(&self) -> &[T] {
        &self.shells
    }

    /// Total binned enstrophy density `Σ_K E_ω(K)`.
    pub fn total(&self) -> T {
        self.shells.iter().fold(T::zero(), |a, &e| a + e)
    }
}

/// Samples the pullback vorticity on an `n_eval` lattice, transforms, and
/// bins `½|ω̂_m|²` into Euclidean shells `K ≤ |m| < K+1`.
///
/// Every mode lands in exactly one shell, so the shell total equals the
/// Parseval sum `½Σ|ω̂|²` identically.
pub fn vorticity_spectrum<T: Scalar>(
    maps: &MapStack<T>,
    ic: &InitialCondition<T>,
    n_eval: usize,
    ws: &mut SpectralWorkspace<T>,
) -> Result<Spectrum<T>> {
    let vals = pullback_values(maps, ic, n_eval)?;
    let hat = ws.forward_coeffs(&vals, n_eval);
    Ok(bin_modes(&hat, n_eval))
}

/// Bins series coefficients into Euclidean shells: `E(K) = ½Σ_{⌊|m|⌋=K}|ĉ_m|²`.
pub fn bin_modes<T: Scalar>(hat: &[rustfft::num_complex::Complex<T>], n: usize) -> Spectrum<T> {
    // Largest representable |m| is √2·(n/2), at the corner of mode space.
    let half = n / 2;
    let k_top = (2 * half * half).isqrt();
    let mut shells = vec![T::zero(); k_top + 1];
    let weight = T::lit(0.5);
    for a2 in 0..n {
        let m2 = mode_of(a2, n);
        for a1 in 0..n {
            let m1 = mode_of(a1, n);
            let k = ((m1 * m1 + m2 * m2) as usize).isqrt();
            shells[k] += weight * hat[a2 * n + a1].norm_sqr();
        }
    }
    Spectrum { shells }
}

/// Result of the spectral-tail decay fit `E_ω(K) ≈ c·K^α·e^{−2δK}`.
#[derive(Debug, Clone, Copy)]
pub struct RadiusFit<T: Scalar> {
    /// Analyticity radius `δ` (decay rate of the tail, halved).
    pub delta: T,
    /// Algebraic prefactor power `α`.
    pub alpha: T,
    /// Log-offset `log c`.
    pub offset: T,
}

/// Ordinary least squares of `log E(K)` on `[log K, K, 1]` over shells
/// `K ∈ [k_lo, k_hi]`; `δ = −(K-coefficient)/2`.
///
/// Shells with non-positive `E` carry no information about the decay and
/// are excluded; fewer than 4 usable shells cannot support a 3-parameter
/// fit with any redundancy.
pub fn fit_radius<T: Scalar>(
    spectrum: &Spectrum<T>,
    k_lo: usize,
    k_hi: usize,
) -> Result<RadiusFit<T>> {
    if k_lo < 1 || k_hi <= k_lo {
        return Err(CmError::InvalidParameter(format!(
            "fit window [{k_lo}, {k_hi}] must satisfy 1 <= k_lo < k_hi"
        )));
    }
    let shells = spectrum.shells();
    let mut rows: Vec<([T; 3], T)> = Vec::new();
    for k in k_lo..=k_hi.min(shells.len().saturating_sub(1)) {
        let e = shells[k];
        if e > T::zero() && e.is_finite() {
            let kf = T::of_usize(k);
            rows.push(([kf.ln(), kf, T::one()], e.ln()));
        }
    }
    if rows.len() < 4 {
        return Err(CmError::InsufficientTail);
    }

    // Normal equations AᵀA x = Aᵀy for the 3-column design matrix.
    let mut ata = [[T::zero(); 3]; 3];
    let mut aty = [T::zero(); 3];
    for (x, y) in &rows {
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += x[r] * x[c];
            }
            aty[r] += x[r] * *y;
        }
    }
    let coef = solve3(ata, aty).ok_or(CmError::InsufficientTail)?;
    Ok(RadiusFit {
        delta: -coef[1] / T::lit(2.0),
        alpha: coef[0],
        offset: coef[2],
    })
}

/// Default fit window: the upper half of the shells with `E(K) > 1e-25`,
/// excluding the top 3 (they carry grid-truncation contamination).
pub fn default_fit_window<T: Scalar>(spectrum: &Spectrum<T>) -> Result<(usize, usize)> {
    let floor = T::lit(1e-25);
    let last_alive = spectrum
        .shells()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &e)| e > floor)
        .map(|(k, _)| k)
        .next_back()
        .ok_or(CmError::InsufficientTail)?;
    let k_hi = last_alive.saturating_sub(3);
    let k_lo = k_hi.div_ceil(2);
    if k_hi < k_lo + 3 || k_lo < 1 {
        return Err(CmError::InsufficientTail);
    }
    Ok((k_lo, k_hi))
}

/// Gaussian elimination with partial pivoting for a 3×3 system.
fn solve3<T: Scalar>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&r, &s| {
            a[r][col]
                .abs()
                .partial_cmp(&a[s][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() == T::zero() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..3).rev() {
        let mut acc = b[r];
        for c in (r + 1)..3 {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Evaluates the pullback vorticity on the uniform endpoint-inclusive
/// `n_px × n_px` lattice over `window = [x0, y0, x1, y1]`.
///
/// Row 0 is the smallest `y`. Lattice points are formed as
/// `x0 + (k·span)/(n_px−1)`, so corner-anchored dyadic zoom windows share
/// lattice points bitwise with their parents.
pub fn zoom_render<T: Scalar>(
    maps: &MapStack<T>,
    ic: &InitialCondition<T>,
    window: [T; 4],
    n_px: usize,
) -> Result<Vec<T>> {
    let [x0, y0, x1, y1] = window;
    if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) {
        return Err(CmError::DegenerateWindow(format!(
            "window corners must be finite, got [{x0}, {y0}, {x1}, {y1}]"
        )));
    }
    if !(x1 > x0 && y1 > y0) {
        return Err(CmError::DegenerateWindow(format!(
            "window [{x0}, {y0}, {x1}, {y1}] has no area"
        )));
    }
    if n_px < 2 {
        return Err(CmError::InvalidParameter(
            "zoom raster needs at least 2 pixels per axis".into(),
        ));
    }
    let sx = x1 - x0;
    let sy = y1 - y0;
    let denom = T::of_usize(n_px - 1);
    let mut out = vec![T::zero(); n_px * n_px];
    out.par_chunks_mut(n_px)
        .enumerate()
        .try_for_each(|(r, row)| -> Result<()> {
            let y = y0 + (T::of_usize(r) * sy) / denom;
            for (k, v) in row.iter_mut().enumerate() {
                let x = x0 + (T::of_usize(k) * sx) / denom;
                *v = ic.value(maps.eval([x, y])?)?;
            }
            Ok(())
        })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;
    use crate::init::shell_modulus_total;
    use std::f64::consts::{PI, TAU};

    fn identity_stack(n: usize, length: f64) -> MapStack<f64> {
        MapStack::new(PeriodicGrid::new(n, length).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn energy_of_single_cosine_matches_the_analytic_integral() {
        // ω = cos x ⇒ ψ = cos x ⇒ u = (0, sin x) ⇒ ‖u‖² = ∫sin²x = L²/2.
        let n = 64;
        let h = TAU / n as f64;
        let mut vals = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                vals[j * n + i] = (i as f64 * h).cos();
            }
        }
        let mut ws = SpectralWorkspace::new(n, n, TAU).unwrap();
        let got = energy_of_samples(&vals, n, &mut ws).unwrap();
        let want = TAU * TAU / 2.0;
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn energy_weights_modes_by_inverse_squared_wavenumber() {
        // ω = cos(3x)cos(4y): four modes of modulus ¼ on the |k| = 5 shell,
        // so ‖u‖² = L²·4·(1/16)/25 = L²/100.
        let n = 64;
        let h = TAU / n as f64;
        let mut vals = vec![0.0; n * n];
        for j in 0..n {
            let y = j as f64 * h;
            for i in 0..n {
                vals[j * n + i] = (3.0 * i as f64 * h).cos() * (4.0 * y).cos();
            }
        }
        let mut ws = SpectralWorkspace::new(n, n, TAU).unwrap();
        let got = energy_of_samples(&vals, n, &mut ws).unwrap();
        let want = TAU * TAU / 100.0;
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");

        assert!(energy_of_samples(&vals[..n], n, &mut ws).is_err());
    }

    #[test]
    fn four_modes_energy_matches_the_analytic_integral() {
        // Σ a²/(2|k|²) over the four cosines: ½ + ½ + 0.36/8 + 0.04/18.
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::four_modes();
        let vals = pullback_values(&maps, &ic, 512).unwrap();
        let mut ws = SpectralWorkspace::new(512, 512, TAU).unwrap();
        let got = energy_of_samples(&vals, 512, &mut ws).unwrap();
        let want = TAU * TAU * (0.5 + 0.5 + 0.36 / 8.0 + 0.04 / 18.0);
        assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    }

    #[test]
    fn four_modes_enstrophy_matches_the_analytic_integral() {
        // ∫ω₀² = (2π)²·(½ + ½ + 0.18 + 0.02) = 4.8π² — cross terms vanish.
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::four_modes();
        let got = enstrophy_l2(&maps, &ic, 1024).unwrap();
        let want = 4.8 * PI * PI;
        assert!(
            (got - want).abs() <= 1e-6 * want,
            "enstrophy {got} vs {want}"
        );
    }

    #[test]
    fn ledger_baselines_on_first_record() {
        let mut ledger = Conservation::<f64>::new();
        let first = ledger.record(0.0, 47.37, 19.74, 0.0, 0);
        assert_eq!(first.enstrophy_error, 0.0);
        assert_eq!(first.energy_error, 0.0);
        let second = ledger.record(1.0, 47.38, 19.73, 1e-5, 1);
        assert!((second.enstrophy_error - 0.01).abs() <= 1e-12);
        assert!((second.energy_error + 0.01).abs() <= 1e-12);
        assert_eq!(second.remap_count, 1);
    }

    #[test]
    fn stream_energy_matches_the_analytic_integral() {
        // ψ = cos x ⇒ u = (0, sin x) ⇒ ∫|u|² = (2π)²·½ = 2π². On the node
        // lattice the stored jets are spectrally exact and the trig
        // quadrature is exact, so only rounding remains; off-node lattices
        // would add the interpolant's O(Δx³) derivative error.
        let n = 64;
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let omega: Vec<f64> = (0..n * n)
            .map(|idx| (TAU * (idx % n) as f64 / n as f64).cos())
            .collect();
        let psi_hat = ws.solve_stream(&omega).unwrap();
        let vel = ws.build_velocity(&psi_hat, 0.0, 0.0).unwrap();
        let got = energy_l2(&vel, n).unwrap();
        let want = 2.0 * PI * PI;
        assert!((got - want).abs() <= 1e-12 * want, "energy {got} vs {want}");
    }

    #[test]
    fn cosine_spectrum_concentrates_in_shell_one() {
        // ω = cos x has coefficients ½ at m = (±1, 0), so E(1) = ¼.
        let n = 64;
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let mut vals = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                vals[j * n + i] = (TAU * i as f64 / n as f64).cos();
            }
        }
        let hat = ws.forward_coeffs(&vals, n);
        let spec = bin_modes(&hat, n);
        assert!(
            (spec.shells()[1] - 0.25).abs() <= 1e-12,
            "E(1) = {}",
            spec.shells()[1]
        );
        for (k, &e) in spec.shells().iter().enumerate() {
            if k != 1 {
                assert!(e.abs() <= 1e-12, "shell {k} leaked {e}");
            }
        }
    }

    #[test]
    fn spectrum_total_satisfies_parseval_against_enstrophy() {
        // Σ_K E_ω(K) = ½Σ|ω̂|² = enstrophy / (2L²) when both use the same
        // lattice (the grid Parseval identity is exact up to rounding).
        let n = 128;
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::four_modes();
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let spec = vorticity_spectrum(&maps, &ic, n, &mut ws).unwrap();
        let ens = enstrophy_l2(&maps, &ic, n).unwrap();
        let want = ens / (2.0 * TAU * TAU);
        let got = spec.total();
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
            "binned total {got} vs Parseval {want}"
        );
    }

    #[test]
    fn random_shells_spectrum_matches_prescribed_shell_power() {
        // Each shell-K mode carries modulus S_K/N(K), so
        // E(K) = ½·N·(S/N)² = S_K²/(2N(K)).
        let k_max = 5;
        let n = 128;
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::<f64>::random_shells(11, k_max, n).unwrap();
        let mut ws = SpectralWorkspace::<f64>::new(n, n, TAU).unwrap();
        let spec = vorticity_spectrum(&maps, &ic, n, &mut ws).unwrap();
        for k in 1..=k_max {
            let mut count = 0usize;
            let lim = (k_max + 1) as i64;
            for m1 in -lim..=lim {
                for m2 in -lim..=lim {
                    if ((m1 * m1 + m2 * m2) as usize).isqrt() == k {
                        count += 1;
                    }
                }
            }
            let s: f64 = shell_modulus_total(k);
            let want = s * s / (2.0 * count as f64);
            let got = spec.shells()[k];
            assert!(
                (got - want).abs() <= 1e-10 * want,
                "shell {k}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn planted_decay_models_are_recovered_exactly() {
        // E(K) = K²e^{−2·0.5·K}: δ = 0.5, α = 2.
        let shells: Vec<f64> = (0..40)
            .map(|k| {
                let kf = k as f64;
                if k == 0 {
                    0.0
                } else {
                    kf * kf * (-kf).exp()
                }
            })
            .collect();
        let fit = fit_radius(&Spectrum::from_shells(shells), 5, 30).unwrap();
        assert!((fit.delta - 0.5).abs() <= 1e-10, "delta {}", fit.delta);
        assert!((fit.alpha - 2.0).abs() <= 1e-10, "alpha {}", fit.alpha);

        // Pure exponential: δ = 1, α = 0.
        let shells: Vec<f64> = (0..40).map(|k| (-2.0 * k as f64).exp()).collect();
        let fit = fit_radius(&Spectrum::from_shells(shells), 2, 20).unwrap();
        assert!((fit.delta - 1.0).abs() <= 1e-10, "delta {}", fit.delta);
        assert!(fit.alpha.abs() <= 1e-10, "alpha {}", fit.alpha);

        // Constant spectrum: no decay at all.
        let fit =
            fit_radius(&Spectrum::from_shells(vec![0.125f64; 32]), 2, 20).unwrap();
        assert!(fit.delta.abs() <= 1e-10, "delta {}", fit.delta);
    }

    #[test]
    fn sparse_tails_are_rejected() {
        let mut shells = vec![0.0; 32];
        shells[3] = 1.0;
        shells[5] = 0.5;
        shells[7] = 0.25;
        let err = fit_radius(&Spectrum::from_shells(shells), 1, 31).unwrap_err();
        assert_eq!(err.to_string(), "insufficient tail");
    }

    #[test]
    fn default_window_takes_the_upper_living_half_minus_three() {
        let shells: Vec<f64> = (0..41).map(|k| (-(k as f64)).exp()).collect();
        // Alive through K = 40 (e^{−40} ≈ 4e-18 > 1e-25): window excludes
        // the top 3 → k_hi = 37, then takes its upper half → k_lo = 19.
        let (k_lo, k_hi) = default_fit_window(&Spectrum::from_shells(shells)).unwrap();
        assert_eq!((k_lo, k_hi), (19, 37));

        let dead = Spectrum::from_shells(vec![0.0; 16]);
        assert!(default_fit_window(&dead).is_err());
    }

    #[test]
    fn full_domain_zoom_equals_direct_sampling_bitwise() {
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::four_modes();
        let n_px = 33;
        let raster = zoom_render(&maps, &ic, [0.0, 0.0, TAU, TAU], n_px).unwrap();
        for r in 0..n_px {
            for k in 0..n_px {
                let x = (k as f64 * TAU) / (n_px - 1) as f64;
                let y = (r as f64 * TAU) / (n_px - 1) as f64;
                assert_eq!(raster[r * n_px + k], ic.value([x, y]).unwrap());
            }
        }
    }

    #[test]
    fn corner_anchored_dyadic_zooms_share_lattice_points() {
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::four_modes();
        let c = [1.0, 2.0];
        let w = 0.25; // power of two ⇒ child points coincide bitwise
        let n_px = 256;
        let parent = zoom_render(&maps, &ic, [c[0], c[1], c[0] + w, c[1] + w], n_px).unwrap();
        let child =
            zoom_render(&maps, &ic, [c[0], c[1], c[0] + w / 2.0, c[1] + w / 2.0], n_px).unwrap();
        // Child pixel (2k) lies at parent pixel (k) for every k < n_px/2.
        for k in [0usize, 17, 64, 127] {
            let p = parent[k * n_px + k];
            let ch = child[(2 * k) * n_px + 2 * k];
            assert_eq!(ch, p, "lattice misaligned at k = {k}");
        }
    }

    #[test]
    fn empty_windows_are_rejected() {
        let maps = identity_stack(16, TAU);
        let ic = InitialCondition::four_modes();
        assert!(zoom_render(&maps, &ic, [1.0, 1.0, 1.0, 2.0], 8).is_err());
        assert!(zoom_render(&maps, &ic, [1.0, 1.0, 2.0, 1.0], 8).is_err());
        assert!(zoom_render(&maps, &ic, [1.0, 1.0, 0.5, 2.0], 8).is_err());
    }
}
