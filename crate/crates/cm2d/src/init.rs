//! Initial vorticity fields.
//!
//! The solver never advects vorticity values — it composes maps and pulls
//! the *initial* field back through them — so the initial condition must be
//! evaluable at arbitrary points for all time. Three fields are provided
//! (plus `zero` for plumbing tests):
//!
//! * `four_modes` — a smooth deterministic four-mode cosine sum; its modest
//!   anisotropy spins up filamentation quickly, making it the standard
//!   correctness workload.
//! * `random_shells` — a seeded random field with prescribed per-shell
//!   spectral mass; realized once as a Hermite interpolant of its
//!   trigonometric series.
//! * `gaussian_pair` — two equal Gaussian vortices on the unit torus whose
//!   merger generates fine spiral filaments, the stress test for zoom
//!   rendering.
//!
//! Every field knows its natural domain length and certified value range;
//! the range is computed at construction by a grid scan plus local descent
//! refinement and inflated by a relative `1e-9` so it *bounds* the true
//! range (pullback values are genuine field evaluations, so range checks
//! downstream must never fail against these bounds).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use crate::error::{CmError, Result};
use crate::hermite::HermiteField;
use crate::scalar::Scalar;
use crate::spectral::SpectralWorkspace;

/// Prescribed total spectral modulus of shell `k`: `2·k^{7/2}·e^{−k²/4}`.
///
/// The sum of coefficient moduli over all modes `m` with `k ≤ |m| < k+1`
/// equals this value; the super-Gaussian tail keeps every derivative of the
/// realized field converged long before the shell cutoff.
pub fn shell_modulus_total<T: Scalar>(k: usize) -> T {
    let kf = T::of_usize(k);
    let two = T::lit(2.0);
    two * kf.powf(T::lit(3.5)) * (-kf * kf / T::lit(4.0)).exp()
}

/// An initial vorticity field with certified range and natural domain.
pub enum InitialCondition<T: Scalar> {
    /// Identically zero vorticity.
    Zero { length: T },
    /// `ω₀ = cos x + cos y + 0.6·cos 2x + 0.2·cos 3x` on `[0, 2π)²`.
    FourModes { min: T, max: T },
    /// Seeded random-phase field with shell totals [`shell_modulus_total`].
    RandomShells {
        field: HermiteField<T>,
        seed: u64,
        k_max: usize,
        min: T,
        max: T,
    },
    /// Two unit Gaussians (σ² = 0.07) at `(0.5 ± 0.15, 0.5)` on `[0, 1)²`,
    /// shifted to zero grid mean.
    GaussianPair { mean: T, min: T, max: T },
}

impl<T: Scalar> InitialCondition<T> {
    /// Zero vorticity on a torus of side `length`.
    pub fn zero(length: T) -> Result<Self> {
        if !(length.is_finite() && length > T::zero()) {
            return Err(CmError::InvalidParameter(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        Ok(Self::Zero { length })
    }

    /// The deterministic four-mode field.
    pub fn four_modes() -> Self {
        let f = |p: [T; 2]| four_modes_value(p);
        let length = T::TAU();
        let (_, max) = scan_extremum(&f, length, 512, true);
        let (_, min) = scan_extremum(&f, length, 512, false);
        let (min, max) = inflate_range(min, max);
        Self::FourModes { min, max }
    }

    /// The seeded random-shell field, realized on an `n_sample²` grid.
    pub fn random_shells(seed: u64, k_max: usize, n_sample: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(CmError::InvalidParameter(
                "random shells need k_max >= 1".into(),
            ));
        }
        // All populated modes must be interior on the realization grid.
        if n_sample < 2 * (k_max + 2) {
            return Err(CmError::InvalidParameter(format!(
                "realization grid {n_sample} cannot hold shells up to {k_max}"
            )));
        }
        let length = T::TAU();

        // 1. Canonical half-space modes (m₁ > 0, or m₁ = 0 and m₂ > 0) in a
        //    fixed iteration order; the conjugate partner of each carries
        //    the opposite phase, which keeps the field real. Two passes:
        //    shell populations first, then amplitudes and phases.
        let lim = (k_max + 1) as i64;
        let shell_of = |m1: i64, m2: i64| -> Option<usize> {
            let k = ((m1 * m1 + m2 * m2) as usize).isqrt();
            (1..=k_max).contains(&k).then_some(k)
        };
        let mut counts = vec![0usize; k_max + 1];
        for m1 in 0..=lim {
            for m2 in -lim..=lim {
                if m1 == 0 && m2 <= 0 {
                    continue;
                }
                if let Some(k) = shell_of(m1, m2) {
                    counts[k] += 1;
                }
            }
        }

        let n = n_sample;
        let mut hat = vec![Complex::new(T::zero(), T::zero()); n * n];
        let bin = |m: i64| -> usize {
            if m >= 0 {
                m as usize
            } else {
                (n as i64 + m) as usize
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m1 in 0..=lim {
            for m2 in -lim..=lim {
                if m1 == 0 && m2 <= 0 {
                    continue;
                }
                let Some(k) = shell_of(m1, m2) else { continue };
                // The draw happens for every canonical shell mode in order,
                // so the realization is reproducible across platforms.
                let theta = T::lit(rng.random::<f64>()) * T::TAU();
                let amp = shell_modulus_total::<T>(k) / T::of_usize(2 * counts[k]);
                let c = Complex::new(amp * theta.cos(), amp * theta.sin());
                hat[bin(m2) * n + bin(m1)] = c;
                hat[bin(-m2) * n + bin(-m1)] = c.conj();
            }
        }

        // 2. Realize the series as a Hermite interpolant once; evaluation
        //    anywhere afterwards is local.
        let mut ws = SpectralWorkspace::new(n, n, length)?;
        let field = ws.hermite_from_coeffs(&hat, n)?;

        let f = |p: [T; 2]| field.eval(p, crate::hermite::Deriv::Value).unwrap_or(T::nan());
        let (_, max) = scan_extremum(&f, length, n, true);
        let (_, min) = scan_extremum(&f, length, n, false);
        let (min, max) = inflate_range(min, max);
        Ok(Self::RandomShells {
            field,
            seed,
            k_max,
            min,
            max,
        })
    }

    /// The Gaussian vortex pair.
    pub fn gaussian_pair() -> Self {
        // Grid mean of the raw blob sum, subtracted so the field has zero
        // mean on the reference 512² grid (the Poisson gauge then sees an
        // essentially mean-free right-hand side).
        let n = 512;
        let h = T::one() / T::of_usize(n);
        let mut mean = T::zero();
        for j in 0..n {
            let y = T::of_usize(j) * h;
            let mut row = T::zero();
            for i in 0..n {
                row += gaussian_blob_sum([T::of_usize(i) * h, y]);
            }
            mean += row;
        }
        mean /= T::of_usize(n * n);

        let f = move |p: [T; 2]| gaussian_blob_sum(p) - mean;
        let (_, max) = scan_extremum(&f, T::one(), n, true);
        let (_, min) = scan_extremum(&f, T::one(), n, false);
        let (min, max) = inflate_range(min, max);
        Self::GaussianPair { mean, min, max }
    }

    /// Builds the field named by a configuration id.
    pub fn from_id(id: &str, seed: u64, k_max: usize, n_sample: usize) -> Result<Self> {
        match id {
            "zero" => Self::zero(T::TAU()),
            "four_modes" => Ok(Self::four_modes()),
            "random_shells" => Self::random_shells(seed, k_max, n_sample),
            "gaussian_pair" => Ok(Self::gaussian_pair()),
            other => Err(CmError::Config(format!(
                "unknown initial condition '{other}' \
                 (expected zero, four_modes, random_shells or gaussian_pair)"
            ))),
        }
    }

    /// Configuration id of this field.
    pub fn id(&self) -> &'static str {
        match self {
            Self::Zero { .. } => "zero",
            Self::FourModes { .. } => "four_modes",
            Self::RandomShells { .. } => "random_shells",
            Self::GaussianPair { .. } => "gaussian_pair",
        }
    }

    /// Natural domain side length of this field.
    pub fn length(&self) -> T {
        match self {
            Self::Zero { length } => *length,
            Self::FourModes { .. } | Self::RandomShells { .. } => T::TAU(),
            Self::GaussianPair { .. } => T::one(),
        }
    }

    /// Vorticity value at `p` (any point; periodicity is built in).
    pub fn value(&self, p: [T; 2]) -> Result<T> {
        match self {
            Self::Zero { .. } => Ok(T::zero()),
            Self::FourModes { .. } => Ok(four_modes_value(p)),
            Self::RandomShells { field, .. } => field.eval(p, crate::hermite::Deriv::Value),
            Self::GaussianPair { mean, .. } => Ok(gaussian_blob_sum(p) - *mean),
        }
    }

    /// Certified `(min, max)` bounds of the field's value range.
    pub fn range(&self) -> (T, T) {
        match self {
            Self::Zero { .. } => (T::zero(), T::zero()),
            Self::FourModes { min, max }
            | Self::RandomShells { min, max, .. }
            | Self::GaussianPair { min, max, .. } => (*min, *max),
        }
    }
}

/// `cos x + cos y + 0.6·cos 2x + 0.2·cos 3x`.
#[inline]
fn four_modes_value<T: Scalar>(p: [T; 2]) -> T {
    let [x, y] = p;
    x.cos() + y.cos() + T::lit(0.6) * (x + x).cos() + T::lit(0.2) * (T::lit(3.0) * x).cos()
}

/// Raw two-blob sum with 3×3 periodic images, before mean subtraction.
///
/// Each axis factor sums the image row `Σ_{k=−1..1} e^{−(d+k)²/(2σ²)}`; the
/// farthest retained tail is `e^{−1.5²/0.14} ≈ 1e-7`, so truncation is far
/// below the field scale and the evaluation stays separable per axis.
fn gaussian_blob_sum<T: Scalar>(p: [T; 2]) -> T {
    let length = T::one();
    let x = wrap_unit(p[0], length);
    let y = wrap_unit(p[1], length);
    let inv2s2 = T::one() / T::lit(2.0 * 0.07);
    let axis = |d: T| -> T {
        let mut acc = T::zero();
        for k in [-1.0, 0.0, 1.0] {
            let s = d + T::lit(k);
            acc += (-s * s * inv2s2).exp();
        }
        acc
    };
    let half = T::lit(0.5);
    let off = T::lit(0.15);
    axis(x - (half - off)) * axis(y - half) + axis(x - (half + off)) * axis(y - half)
}

#[inline]
fn wrap_unit<T: Scalar>(x: T, length: T) -> T {
    let mut w = x % length;
    if w < T::zero() {
        w += length;
    }
    if w >= length {
        w = T::zero();
    }
    w
}

/// Widens computed extrema so they bound the true range: scan + descent
/// lands within ~1e-11 of an extremum in value, far inside this margin.
fn inflate_range<T: Scalar>(min: T, max: T) -> (T, T) {
    let pad = (max - min).abs().max(T::one()) * T::lit(1e-9);
    (min - pad, max + pad)
}

/// Locates an extremum of `f` on `[0, L)²`: full `n²` node scan, then a
/// shrinking 9×9 local search (factor 4 per level) around the best node.
fn scan_extremum<T: Scalar>(
    f: &impl Fn([T; 2]) -> T,
    length: T,
    n: usize,
    maximize: bool,
) -> ([T; 2], T) {
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let h = length / T::of_usize(n);
    let mut best_p = [T::zero(); 2];
    let mut best_v = f(best_p);
    for j in 0..n {
        for i in 0..n {
            let p = [T::of_usize(i) * h, T::of_usize(j) * h];
            let v = f(p);
            if better(v, best_v) {
                best_p = p;
                best_v = v;
            }
        }
    }
    // 12 levels of 4× shrink resolve the position to ~h·4⁻¹² and the value
    // to quadratic accuracy in that, i.e. well beyond f64 noise.
    let mut span = h;
    for _level in 0..12 {
        let step = span / T::lit(4.0);
        let center = best_p;
        for dj in -4..=4i32 {
            for di in -4..=4i32 {
                let p = [
                    center[0] + T::lit(di as f64) * step,
                    center[1] + T::lit(dj as f64) * step,
                ];
                let v = f(p);
                if better(v, best_v) {
                    best_p = p;
                    best_v = v;
                }
            }
        }
        span = step;
    }
    (best_p, best_v)
}
