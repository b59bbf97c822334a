//! Explicit Runge-Kutta tableaus and the backward characteristic tracer.
//!
//! One step of the map update needs, for each query point `x`, the foot of
//! the characteristic through `x` at the *next* time level, traced backward
//! over one step: integrate `dx/ds = u(x, s)` from `t_next` down to
//! `t_next − Δt`. Written out for an explicit tableau `(a, b, c)`:
//!
//! ```text
//! k_j  = u(x − Δt Σ_m a_{jm} k_m,  t_next − c_j Δt)
//! foot = x − Δt Σ_j b_j k_j
//! ```
//!
//! The tracer is agnostic about where stage velocities come from: a stage is
//! anything that maps a point to a velocity. The solver passes one combined
//! stream field per stage time (so the Lagrange time extension is collapsed
//! once per step, not once per point); tests pass closures.

use crate::error::{CmError, Result};
use crate::scalar::Scalar;
use crate::velocity::VelocityStack;

/// Largest stage count among the built-in tableaus.
pub const MAX_STAGES: usize = 4;

/// Velocity source for one Runge-Kutta stage (one fixed stage time).
pub trait StageVelocity<T: Scalar> {
    /// Velocity at point `x` for this stage's time level.
    fn velocity(&self, x: [T; 2]) -> Result<[T; 2]>;
}

impl<T: Scalar, F> StageVelocity<T> for F
where
    F: Fn([T; 2]) -> Result<[T; 2]>,
{
    fn velocity(&self, x: [T; 2]) -> Result<[T; 2]> {
        self(x)
    }
}

/// An explicit Runge-Kutta tableau.
#[derive(Debug, Clone)]
pub struct RkTableau<T: Scalar> {
    id: &'static str,
    c: Vec<T>,
    a: Vec<Vec<T>>,
    b: Vec<T>,
}

impl<T: Scalar> RkTableau<T> {
    fn checked(id: &'static str, c: Vec<T>, a: Vec<Vec<T>>, b: Vec<T>) -> Result<Self> {
        let s = c.len();
        if s == 0 || s > MAX_STAGES || b.len() != s || a.len() != s {
            return Err(CmError::InvalidParameter(format!(
                "tableau {id} has inconsistent stage counts"
            )));
        }
        // Drift here indicates a typo in the coefficients, nothing numeric.
        let tol = T::lit(1e-14);
        let sum_b = b.iter().fold(T::zero(), |acc, &x| acc + x);
        if (sum_b - T::one()).abs() > tol {
            return Err(CmError::InvalidParameter(format!(
                "tableau {id} weights sum to {sum_b}, want 1"
            )));
        }
        for (j, row) in a.iter().enumerate() {
            if row.len() != j {
                return Err(CmError::InvalidParameter(format!(
                    "tableau {id} is not in explicit lower-triangular form"
                )));
            }
            let row_sum = row.iter().fold(T::zero(), |acc, &x| acc + x);
            if (row_sum - c[j]).abs() > tol {
                return Err(CmError::InvalidParameter(format!(
                    "tableau {id} stage {j}: row sum {row_sum} != node {}",
                    c[j]
                )));
            }
        }
        Ok(Self { id, c, a, b })
    }

    /// Forward Euler (order 1).
    pub fn rk1() -> Self {
        Self::checked("rk1", vec![T::zero()], vec![vec![]], vec![T::one()])
            .expect("built-in tableau is valid")
    }

    /// Explicit midpoint rule (order 2).
    pub fn rk2() -> Self {
        let h = T::lit(0.5);
        Self::checked(
            "rk2",
            vec![T::zero(), h],
            vec![vec![], vec![h]],
            vec![T::zero(), T::one()],
        )
        .expect("built-in tableau is valid")
    }

    /// Kutta's third-order rule (order 3); the solver default.
    pub fn rk3() -> Self {
        let six = T::lit(6.0);
        Self::checked(
            "rk3",
            vec![T::zero(), T::lit(0.5), T::one()],
            vec![vec![], vec![T::lit(0.5)], vec![-T::one(), T::lit(2.0)]],
            vec![T::one() / six, T::lit(4.0) / six, T::one() / six],
        )
        .expect("built-in tableau is valid")
    }

    /// The classical fourth-order rule.
    pub fn rk4() -> Self {
        let h = T::lit(0.5);
        let six = T::lit(6.0);
        Self::checked(
            "rk4",
            vec![T::zero(), h, h, T::one()],
            vec![
                vec![],
                vec![h],
                vec![T::zero(), h],
                vec![T::zero(), T::zero(), T::one()],
            ],
            vec![
                T::one() / six,
                T::lit(2.0) / six,
                T::lit(2.0) / six,
                T::one() / six,
            ],
        )
        .expect("built-in tableau is valid")
    }

    /// Looks up a tableau by its configuration id (`rk1` … `rk4`).
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "rk1" => Ok(Self::rk1()),
            "rk2" => Ok(Self::rk2()),
            "rk3" => Ok(Self::rk3()),
            "rk4" => Ok(Self::rk4()),
            other => Err(CmError::InvalidParameter(format!(
                "unknown time integrator '{other}' (expected rk1, rk2, rk3 or rk4)"
            ))),
        }
    }

    /// Configuration id of this tableau.
    pub fn id(&self) -> &'static str {
        self.id
    }

    /// Number of stages.
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Stage nodes `c_j` (fractions of the step, measured *backward* from
    /// the trace start).
    pub fn nodes(&self) -> &[T] {
        &self.c
    }
}

/// Traces one backward step from `x`: the returned point approximates the
/// position, one step earlier, of the characteristic through `x`.
///
/// `stages[j]` must evaluate velocity at time `t_next − c_j·Δt`; the slice
/// length must match the tableau.
pub fn trace_foot<T: Scalar, S: StageVelocity<T>>(
    stages: &[S],
    x: [T; 2],
    dt: T,
    tab: &RkTableau<T>,
) -> Result<[T; 2]> {
    let s = tab.stages();
    assert_eq!(stages.len(), s, "stage velocity count must match tableau");
    let mut k = [[T::zero(); 2]; MAX_STAGES];
    for j in 0..s {
        let mut arg = x;
        for (m, &a_jm) in tab.a[j].iter().enumerate() {
            arg[0] -= dt * a_jm * k[m][0];
            arg[1] -= dt * a_jm * k[m][1];
        }
        k[j] = stages[j].velocity(arg)?;
    }
    let mut foot = x;
    for (j, &b_j) in tab.b.iter().enumerate() {
        foot[0] -= dt * b_j * k[j][0];
        foot[1] -= dt * b_j * k[j][1];
    }
    Ok(foot)
}

/// Convenience single-point tracer drawing stage velocities straight from a
/// velocity history via its Lagrange time extension.
///
/// The driver does *not* use this per node — it collapses the history into
/// one field per stage time first — but single-point queries and tests do.
pub fn one_step_foot<T: Scalar>(
    stack: &VelocityStack<T>,
    x: [T; 2],
    t_next: T,
    dt: T,
    tab: &RkTableau<T>,
) -> Result<[T; 2]> {
    if stack.is_empty() {
        return Err(CmError::EmptyVelocityStack);
    }
    struct StackStage<'a, T: Scalar> {
        stack: &'a VelocityStack<T>,
        t: T,
    }
    impl<T: Scalar> StageVelocity<T> for StackStage<'_, T> {
        fn velocity(&self, x: [T; 2]) -> Result<[T; 2]> {
            self.stack.velocity_at(x, self.t)
        }
    }
    let stages: Vec<StackStage<'_, T>> = tab
        .nodes()
        .iter()
        .map(|&c| StackStage {
            stack,
            t: t_next - c * dt,
        })
        .collect();
    trace_foot(&stages, x, dt, tab)
}
