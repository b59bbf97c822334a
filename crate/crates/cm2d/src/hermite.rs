//! Hermite bicubic jet interpolation on periodic grids.
//!
//! A [`HermiteField`] stores, at every grid node, the four-component jet
//! `(f, ∂x f, ∂y f, ∂x∂y f)`. Inside each cell the interpolant is the tensor
//! product of 1D cubic Hermite bases, which makes the surface globally C¹
//! with a continuous mixed partial — the property the flow-map update relies
//! on when it differentiates the map.
//!
//! Derivative jets are stored in natural units (per unit length). The cubic
//! basis is classically written for unit cells with derivative data
//! pre-scaled by `Δx`; here the scaling happens inside the evaluation
//! weights instead, so jets remain grid-independent and can be re-projected
//! between grids without rescaling.
//!
//! Evaluation at a node returns the stored jet entry exactly: node
//! coordinates are detected bit-for-bit (see [`PeriodicGrid::locate`]
//! internals) and bypass the weight arithmetic entirely. All four derivative
//! orders of a query share one weight computation; the flow-map update,
//! which needs full jets at every node, dominates runtime and gets them for
//! the price of little more than a single evaluation.

use rayon::prelude::*;

use crate::error::{CmError, Result};
use crate::grid::{CellCoord, PeriodicGrid};
use crate::scalar::Scalar;

/// Node jet: value, two first partials, and the mixed partial.
pub type Jet<T> = [T; 4];

/// Derivative multi-index `(c, d)` with `c, d ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    /// Plain value, `(0, 0)`.
    Value,
    /// `∂x`, `(1, 0)`.
    Dx,
    /// `∂y`, `(0, 1)`.
    Dy,
    /// `∂x∂y`, `(1, 1)`.
    Dxy,
}

impl Deriv {
    /// Derivative orders `(c, d)` in x and y.
    #[inline]
    pub fn orders(self) -> (usize, usize) {
        match self {
            Deriv::Value => (0, 0),
            Deriv::Dx => (1, 0),
            Deriv::Dy => (0, 1),
            Deriv::Dxy => (1, 1),
        }
    }

    /// Position of this derivative inside a stored [`Jet`].
    #[inline]
    pub fn slot(self) -> usize {
        match self {
            Deriv::Value => 0,
            Deriv::Dx => 1,
            Deriv::Dy => 2,
            Deriv::Dxy => 3,
        }
    }
}

/// Periodic scalar field represented by Hermite jets on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteField<T> {
    grid: PeriodicGrid<T>,
    jets: Vec<Jet<T>>,
}

impl<T: Scalar> HermiteField<T> {
    /// Wraps existing node jets (row-major, index `iy·n + ix`).
    ///
    /// Rejects length mismatches and non-finite entries; every consumer of a
    /// field is entitled to assume finite jets.
    pub fn new(grid: PeriodicGrid<T>, jets: Vec<Jet<T>>) -> Result<Self> {
        if jets.len() != grid.node_count() {
            return Err(CmError::InvalidGrid(format!(
                "jet array holds {} nodes, grid needs {}",
                jets.len(),
                grid.node_count()
            )));
        }
        if let Some(bad) = jets
            .iter()
            .position(|j| !j.iter().all(|v| v.is_finite()))
        {
            return Err(CmError::InvalidGrid(format!(
                "non-finite jet at node {bad}"
            )));
        }
        Ok(Self { grid, jets })
    }

    /// Zero field on the given grid.
    pub fn zeros(grid: PeriodicGrid<T>) -> Self {
        let jets = vec![[T::zero(); 4]; grid.node_count()];
        Self { grid, jets }
    }

    /// Grid the field lives on.
    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    /// Stored node jets, row-major.
    #[inline]
    pub fn jets(&self) -> &[Jet<T>] {
        &self.jets
    }

    /// Evaluates the `(c, d)` partial derivative of the interpolant at `p`.
    ///
    /// `p` may be any finite point in `R²`; it is wrapped into the domain.
    /// At a node the stored jet entry is returned exactly.
    #[inline]
    pub fn eval(&self, p: [T; 2], deriv: Deriv) -> Result<T> {
        let st = Stencil::at(&self.grid, p)?;
        Ok(st.contract(&self.jets, deriv))
    }

    /// Evaluates value and all three derivatives with one weight computation.
    #[inline]
    pub fn eval_jet(&self, p: [T; 2]) -> Result<Jet<T>> {
        let st = Stencil::at(&self.grid, p)?;
        Ok(st.contract_jet(&self.jets))
    }

    /// Evaluates the gradient `(∂x f, ∂y f)` with one weight computation.
    #[inline]
    pub fn eval_grad(&self, p: [T; 2]) -> Result<[T; 2]> {
        let st = Stencil::at(&self.grid, p)?;
        Ok([st.contract(&self.jets, Deriv::Dx), st.contract(&self.jets, Deriv::Dy)])
    }

    /// Builds the field `Σ cᵢ·fᵢ` from same-grid terms.
    ///
    /// Jets combine linearly, so this is exact: evaluating the combination
    /// equals combining the evaluations up to rounding.
    pub fn linear_combination(terms: &[(T, &HermiteField<T>)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| CmError::InvalidParameter("empty linear combination".into()))?;
        for (_, f) in terms {
            check_same_grid(first.grid(), f.grid())?;
        }
        let mut jets = vec![[T::zero(); 4]; first.grid.node_count()];
        for (coeff, f) in terms {
            for (dst, src) in jets.iter_mut().zip(f.jets.iter()) {
                for k in 0..4 {
                    dst[k] += *coeff * src[k];
                }
            }
        }
        Ok(Self { grid: first.grid.clone(), jets })
    }
}

/// Verifies two fields share node count and domain length.
pub(crate) fn check_same_grid<T: Scalar>(
    a: &PeriodicGrid<T>,
    b: &PeriodicGrid<T>,
) -> Result<()> {
    if a.n() != b.n() || a.length() != b.length() {
        return Err(CmError::GridMismatch(format!(
            "{}² over L={} vs {}² over L={}",
            a.n(),
            a.length(),
            b.n(),
            b.length()
        )));
    }
    Ok(())
}

/// Projects a jet sampler onto a grid: node jets are the sampler's jets.
///
/// This is the interpolation operator of the method: the resulting field
/// agrees with the sampler in value and all three derivatives at every node.
/// Projecting a field's own evaluation therefore reproduces it exactly.
pub fn hermite_project<T, F>(grid: PeriodicGrid<T>, sampler: F) -> HermiteField<T>
where
    T: Scalar,
    F: Fn(T, T) -> Jet<T> + Sync,
{
    let n = grid.n();
    let mut jets = vec![[T::zero(); 4]; grid.node_count()];
    jets.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
        let y = grid.node_coord(iy);
        for (ix, jet) in row.iter_mut().enumerate() {
            *jet = sampler(grid.node_coord(ix), y);
        }
    });
    HermiteField { grid, jets }
}

/// One evaluation's worth of interpolation geometry: the four corner nodes
/// and the 1D value/derivative weights along each axis.
///
/// Building a stencil once and contracting several jet arrays against it is
/// how paired fields (the two displacement components of a map) are
/// evaluated at shared points without recomputing weights.
///
/// The 1D interpolant is kept in difference form,
/// `f(ξ) = f₀ + w_Δ·(f₁ − f₀) + w₀·d₀ + w₁·d₁`,
/// rather than as four basis products: the constant part then passes through
/// untouched, so constant fields (and, per axis, node values at ξ = 0) are
/// reproduced bit-for-bit instead of to a couple of ulps.
pub(crate) struct Stencil<T> {
    /// Flat indices of the corners `[ll, lr, ul, ur]`.
    idx: [usize; 4],
    /// Value weights `[w_Δ, w_d0, w_d1]` along x and y.
    vx: [T; 3],
    vy: [T; 3],
    /// Derivative weights `[w_Δ, w_d0, w_d1]` along x and y.
    dx: [T; 3],
    dy: [T; 3],
    /// Set when the point is exactly a node; contraction short-circuits.
    node: Option<usize>,
}

impl<T: Scalar> Stencil<T> {
    /// Locates `p` on the grid and prepares weights.
    #[inline]
    pub(crate) fn at(grid: &PeriodicGrid<T>, p: [T; 2]) -> Result<Self> {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(CmError::InvalidPoint);
        }
        let cx = grid.locate(p[0]);
        let cy = grid.locate(p[1]);
        Ok(Self::from_cells(grid, cx, cy))
    }

    /// Assembles a stencil from per-axis cell coordinates.
    pub(crate) fn from_cells(
        grid: &PeriodicGrid<T>,
        cx: CellCoord<T>,
        cy: CellCoord<T>,
    ) -> Self {
        if let (Some(nx), Some(ny)) = (cx.node, cy.node) {
            let nidx = grid.node_index(nx, ny);
            let z = [T::zero(); 3];
            return Self { idx: [nidx; 4], vx: z, vy: z, dx: z, dy: z, node: Some(nidx) };
        }
        let h = grid.dx();
        let inv_h = T::one() / h;
        let (vx, dx) = weights_1d(cx.xi, h, inv_h);
        let (vy, dy) = weights_1d(cy.xi, h, inv_h);
        let (ix, iy) = (cx.cell, cy.cell);
        let idx = [
            grid.node_index(ix, iy),
            grid.node_index(ix + 1, iy),
            grid.node_index(ix, iy + 1),
            grid.node_index(ix + 1, iy + 1),
        ];
        Self { idx, vx, vy, dx, dy, node: None }
    }

    /// 1D interpolation along x of the `(value, x-derivative)` jet pairs
    /// sitting in slots `(s, s+1)`: returns the row data the y-interpolation
    /// consumes. `c` is the x-derivative order.
    #[inline]
    fn x_rows(&self, jets: &[Jet<T>], c: usize, s: usize) -> [T; 2] {
        let q00 = &jets[self.idx[0]];
        let q10 = &jets[self.idx[1]];
        let q01 = &jets[self.idx[2]];
        let q11 = &jets[self.idx[3]];
        if c == 0 {
            [
                interp_value(&self.vx, q00[s], q10[s], q00[s + 1], q10[s + 1]),
                interp_value(&self.vx, q01[s], q11[s], q01[s + 1], q11[s + 1]),
            ]
        } else {
            [
                interp_deriv(&self.dx, q00[s], q10[s], q00[s + 1], q10[s + 1]),
                interp_deriv(&self.dx, q01[s], q11[s], q01[s + 1], q11[s + 1]),
            ]
        }
    }

    /// Contracts one jet array against the stencil for one derivative order.
    #[inline]
    pub(crate) fn contract(&self, jets: &[Jet<T>], deriv: Deriv) -> T {
        if let Some(nidx) = self.node {
            return jets[nidx][deriv.slot()];
        }
        let (c, d) = deriv.orders();
        // Interpolate (f, fx) and (fy, fxy) along x, then the results along y.
        let f = self.x_rows(jets, c, 0);
        let fy = self.x_rows(jets, c, 2);
        if d == 0 {
            interp_value(&self.vy, f[0], f[1], fy[0], fy[1])
        } else {
            interp_deriv(&self.dy, f[0], f[1], fy[0], fy[1])
        }
    }

    /// Contracts all four derivative orders, sharing the weights.
    #[inline]
    pub(crate) fn contract_jet(&self, jets: &[Jet<T>]) -> Jet<T> {
        if let Some(nidx) = self.node {
            return jets[nidx];
        }
        let f0 = self.x_rows(jets, 0, 0);
        let fy0 = self.x_rows(jets, 0, 2);
        let f1 = self.x_rows(jets, 1, 0);
        let fy1 = self.x_rows(jets, 1, 2);
        [
            interp_value(&self.vy, f0[0], f0[1], fy0[0], fy0[1]),
            interp_value(&self.vy, f1[0], f1[1], fy1[0], fy1[1]),
            interp_deriv(&self.dy, f0[0], f0[1], fy0[0], fy0[1]),
            interp_deriv(&self.dy, f1[0], f1[1], fy1[0], fy1[1]),
        ]
    }

}

/// 1D cubic Hermite weights at local coordinate `ξ ∈ [0, 1]`, in difference
/// form `[w_Δ, w_d0, w_d1]` (see [`Stencil`]).
///
/// Returns `(value_weights, derivative_weights)`. The `Δx` basis scaling for
/// unscaled (natural-unit) jets is folded in here: jet weights carry a
/// factor `Δx`, and derivatives of value data a factor `1/Δx`.
#[inline]
fn weights_1d<T: Scalar>(xi: T, dx: T, inv_dx: T) -> ([T; 3], [T; 3]) {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let u = one - xi;
    let u2 = u * u;
    let xi2 = xi * xi;
    let pv = [xi2 * (three - two * xi), xi * u2 * dx, xi2 * (xi - one) * dx];
    let pd = [six * xi * u * inv_dx, u * (one - three * xi), xi * (three * xi - two)];
    (pv, pd)
}

/// `f₀ + w_Δ·(f₁ − f₀) + w₀·d₀ + w₁·d₁`: cubic Hermite value in difference form.
#[inline]
fn interp_value<T: Scalar>(w: &[T; 3], f0: T, f1: T, d0: T, d1: T) -> T {
    f0 + w[0] * (f1 - f0) + w[1] * d0 + w[2] * d1
}

/// `w_Δ·(f₁ − f₀) + w₀·d₀ + w₁·d₁`: x-derivative of the cubic, same layout.
#[inline]
fn interp_deriv<T: Scalar>(w: &[T; 3], f0: T, f1: T, d0: T, d1: T) -> T {
    w[0] * (f1 - f0) + w[1] * d0 + w[2] * d1
}
