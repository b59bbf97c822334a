//! Periodic uniform grids on the square torus `[0, L)²`.
//!
//! A [`PeriodicGrid`] is the index geometry every field in the crate shares:
//! `n × n` nodes at spacing `Δx = L/n`, indices wrapping modulo `n`. Cells
//! are half-open, `C_i = [x_i, x_{i+1})`, and point lookup wraps coordinates
//! by floor division first, so a query at a cell boundary lands
//! deterministically in the cell whose lower edge it sits on.
//!
//! Lookup also carries an exact-node fast path: when a coordinate is
//! bit-for-bit the product `i·Δx`, the caller is told the node index so that
//! interpolation can return stored node data untouched. That keeps node
//! evaluation exact instead of "exact up to one rounding of the local
//! coordinate".

use crate::error::{CmError, Result};
use crate::scalar::Scalar;

/// Uniform periodic grid on `[0, L)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid<T> {
    n: usize,
    length: T,
    dx: T,
    inv_dx: T,
}

/// Result of locating one coordinate: owning cell plus local position.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellCoord<T> {
    /// Index of the cell (and of its lower node), in `0..n`.
    pub cell: usize,
    /// Local coordinate within the cell, in `[0, 1]`.
    pub xi: T,
    /// Set when the coordinate is exactly a node: the node index.
    pub node: Option<usize>,
}

impl<T: Scalar> PeriodicGrid<T> {
    /// Creates an `n × n` grid over a torus of side `length`.
    ///
    /// `n` must be at least 4 (a bicubic stencil needs distinct neighbours in
    /// each direction) and `length` positive and finite.
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 4 {
            return Err(CmError::InvalidGrid(format!(
                "need at least 4 nodes per dimension, got {n}"
            )));
        }
        if !(length.is_finite() && length > T::zero()) {
            return Err(CmError::InvalidGrid(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        let dx = length / T::of_usize(n);
        let inv_dx = T::of_usize(n) / length;
        Ok(Self { n, length, dx, inv_dx })
    }

    /// Nodes per dimension.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain side length `L`.
    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    /// Cell width `Δx = L/n`.
    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    /// Total number of nodes, `n²`.
    #[inline]
    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Coordinate of node `i` along one axis (`i` taken modulo `n`).
    #[inline]
    pub fn node_coord(&self, i: usize) -> T {
        T::of_usize(i % self.n) * self.dx
    }

    /// Flat row-major node index for `(ix, iy)`, wrapping both indices.
    #[inline]
    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        (iy % self.n) * self.n + (ix % self.n)
    }

    /// All points `(x_i + f·Δx, y_j + g·Δx)` for every cell `(i, j)` and
    /// every pair of fractional offsets `f, g` from `fracs`, in row-major
    /// cell order with a fixed intra-cell order.
    ///
    /// This is the standard way to build probe lattices: `&[0.5]` gives the
    /// cell centers, `&[0.25, 0.5, 0.75]` a 3×3 sub-cell sweep.
    pub fn offset_lattice(&self, fracs: &[T]) -> Vec<[T; 2]> {
        let mut pts = Vec::with_capacity(self.n * self.n * fracs.len() * fracs.len());
        for iy in 0..self.n {
            let y0 = self.node_coord(iy);
            for g in fracs {
                let y = y0 + *g * self.dx;
                for ix in 0..self.n {
                    let x0 = self.node_coord(ix);
                    for f in fracs {
                        pts.push([x0 + *f * self.dx, y]);
                    }
                }
            }
        }
        pts
    }

    /// Wraps a coordinate into `[0, L)` by floor division.
    ///
    /// Uses the exact floating-point remainder, then clamps the half-open
    /// upper edge (rounding can land a tiny negative input exactly on `L`).
    #[inline]
    pub fn wrap(&self, x: T) -> T {
        let mut w = x % self.length;
        if w < T::zero() {
            w += self.length;
        }
        if w >= self.length {
            w = T::zero();
        }
        w
    }

    /// Locates a coordinate: owning cell, local position, exact-node flag.
    #[inline]
    pub(crate) fn locate(&self, x: T) -> CellCoord<T> {
        let w = self.wrap(x);
        let r = w * self.inv_dx;

        // Exact-node fast path: the wrapped coordinate reproduces `i·Δx`
        // bit-for-bit, so stored node data applies untouched.
        if let Some(nearest) = r.round().to_usize() {
            let i = nearest % self.n;
            if T::of_usize(i) * self.dx == w {
                return CellCoord { cell: i, xi: T::zero(), node: Some(i) };
            }
        }

        let mut cell = r.floor().to_usize().unwrap_or(0);
        // Rounding in `inv_dx` can push a coordinate just below `L` to `r = n`;
        // fold it into the last cell rather than wrapping to an inconsistent ξ.
        if cell >= self.n {
            cell = self.n - 1;
        }
        let xi = r - T::of_usize(cell);
        CellCoord { cell, xi, node: None }
    }
}
