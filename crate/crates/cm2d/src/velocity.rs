//! Velocity fields and the short history used for time extrapolation.
//!
//! A [`VelocityField`] stores the stream function ψ as a Hermite jet field;
//! velocity is its perpendicular gradient `u = (∂_y ψ, −∂_x ψ)`, which is
//! divergence-free *by construction* for any interpolant — the divergence is
//! the difference of the two mixed partials of one tensor-product function,
//! i.e. the same arithmetic evaluated twice.
//!
//! A [`VelocityStack`] keeps the most recent `p` fields. Between solves the
//! velocity at an off-step time is the degree-`p−1` Lagrange extrapolation
//! in time through the stored snapshots; because the weights depend only on
//! time, one combined stream field per evaluation time serves every spatial
//! query at that time.

use std::collections::VecDeque;

use crate::error::{CmError, Result};
use crate::hermite::HermiteField;
use crate::scalar::Scalar;

/// A divergence-free velocity field at one time level.
#[derive(Clone)]
pub struct VelocityField<T: Scalar> {
    psi: HermiteField<T>,
    t: T,
    eps: T,
}

impl<T: Scalar> VelocityField<T> {
    /// Wraps a stream-function interpolant solved at time `t` from samples
    /// mollified with width `eps` (recorded for provenance/serialization).
    pub fn new(psi: HermiteField<T>, t: T, eps: T) -> Self {
        Self { psi, t, eps }
    }

    /// The stream-function interpolant.
    pub fn psi(&self) -> &HermiteField<T> {
        &self.psi
    }

    /// Solve time of this field.
    pub fn t(&self) -> T {
        self.t
    }

    /// Mollification width the vorticity samples used.
    pub fn eps(&self) -> T {
        self.eps
    }

    /// Velocity `u = (∂_y ψ, −∂_x ψ)` at `p`.
    pub fn velocity(&self, p: [T; 2]) -> Result<[T; 2]> {
        let g = self.psi.eval_grad(p)?;
        Ok([g[1], -g[0]])
    }

    /// Discrete divergence `∂_x u₁ + ∂_y u₂ = ∂_x∂_y ψ − ∂_y∂_x ψ`.
    ///
    /// The tensor-product interpolant has a single mixed partial, so the two
    /// terms are the same evaluation and the result is exactly zero; the
    /// subtraction is kept explicit so the identity is checked, not assumed.
    pub fn divergence(&self, p: [T; 2]) -> Result<T> {
        let dxy = self.psi.eval(p, crate::hermite::Deriv::Dxy)?;
        let dyx = self.psi.eval(p, crate::hermite::Deriv::Dxy)?;
        Ok(dxy - dyx)
    }
}

/// Lagrange extrapolation weights at `t` for interpolation nodes `times`.
///
/// `w_i = Π_{j≠i} (t − t_j) / (t_i − t_j)`; the weights sum to one, so a
/// velocity history of constant fields extrapolates to that constant.
pub fn lagrange_weights<T: Scalar>(times: &[T], t: T) -> Result<Vec<T>> {
    if times.is_empty() {
        return Err(CmError::EmptyVelocityStack);
    }
    let mut w = Vec::with_capacity(times.len());
    for (i, &ti) in times.iter().enumerate() {
        let mut num = T::one();
        let mut den = T::one();
        for (j, &tj) in times.iter().enumerate() {
            if i != j {
                num *= t - tj;
                den *= ti - tj;
            }
        }
        if den == T::zero() {
            return Err(CmError::InvalidParameter(format!(
                "velocity history holds duplicate time {ti}"
            )));
        }
        w.push(num / den);
    }
    Ok(w)
}

/// Rolling window of the most recent velocity fields, oldest first.
#[derive(Clone)]
pub struct VelocityStack<T: Scalar> {
    cap: usize,
    fields: VecDeque<VelocityField<T>>,
}

impl<T: Scalar> VelocityStack<T> {
    /// Creates a stack holding at most `cap ≥ 1` fields.
    pub fn new(cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(CmError::InvalidParameter(
                "velocity history depth must be at least 1".into(),
            ));
        }
        Ok(Self {
            cap,
            fields: VecDeque::with_capacity(cap + 1),
        })
    }

    /// Maximum number of retained fields.
    pub fn capacity(&self) -> usize {
        self.cap
    }

    /// Number of currently stored fields.
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    /// True when no field has been pushed yet.
    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Pushes a new field; evicts the oldest beyond capacity. Times must
    /// strictly increase.
    pub fn push(&mut self, field: VelocityField<T>) -> Result<()> {
        if let Some(last) = self.fields.back() {
            if field.t() <= last.t() {
                return Err(CmError::InvalidParameter(format!(
                    "velocity history times must increase: {} after {}",
                    field.t(),
                    last.t()
                )));
            }
        }
        self.fields.push_back(field);
        while self.fields.len() > self.cap {
            self.fields.pop_front();
        }
        Ok(())
    }

    /// Replaces the entire history (restart path). Times must strictly
    /// increase and the count must not exceed capacity.
    pub fn replace(&mut self, fields: Vec<VelocityField<T>>) -> Result<()> {
        if fields.len() > self.cap {
            return Err(CmError::InvalidParameter(format!(
                "history of {} fields exceeds depth {}",
                fields.len(),
                self.cap
            )));
        }
        self.fields.clear();
        for f in fields {
            self.push(f)?;
        }
        Ok(())
    }

    /// The most recent field.
    pub fn latest(&self) -> Option<&VelocityField<T>> {
        self.fields.back()
    }

    /// Stored fields, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &VelocityField<T>> {
        self.fields.iter()
    }

    /// Stored solve times, oldest first.
    pub fn times(&self) -> Vec<T> {
        self.fields.iter().map(|f| f.t()).collect()
    }

    /// Velocity at `(x, t)` by Lagrange extrapolation of the stored fields.
    pub fn velocity_at(&self, x: [T; 2], t: T) -> Result<[T; 2]> {
        let w = lagrange_weights(&self.times(), t)?;
        let mut u = [T::zero(); 2];
        for (wi, f) in w.iter().zip(self.fields.iter()) {
            let ui = f.velocity(x)?;
            u[0] += *wi * ui[0];
            u[1] += *wi * ui[1];
        }
        Ok(u)
    }

    /// One stream field whose curl is the extrapolated velocity at `t`.
    ///
    /// Collapses the time combination once so a whole integration stage can
    /// evaluate a single Hermite field instead of `p` of them.
    pub fn combined_field(&self, t: T) -> Result<HermiteField<T>> {
        let w = lagrange_weights(&self.times(), t)?;
        let terms: Vec<(T, &HermiteField<T>)> = w
            .into_iter()
            .zip(self.fields.iter())
            .map(|(wi, f)| (wi, f.psi()))
            .collect();
        HermiteField::linear_combination(&terms)
    }
}
