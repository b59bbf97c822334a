//! Characteristic-mapping solver for the 2D incompressible Euler equations
//! on a periodic torus.
//!
//! Instead of advecting vorticity values, the method evolves the *backward
//! characteristic map* χ — the transformation sending a point at time `t` to
//! its initial position along the flow — on a coarse grid, using a
//! gradient-augmented semi-Lagrangian update. Vorticity is then recovered
//! anywhere as the pullback `ω(x, t) = ω₀(χ(x, t))` of the initial
//! condition, which preserves its range by construction and allows
//! evaluation at arbitrary subgrid resolution.
//!
//! Pipeline per time step:
//! 1. sample mollified vorticity through the current map ([`sampling`]);
//! 2. solve the Poisson equation spectrally for the stream function and
//!    build a divergence-free Hermite velocity ([`spectral`], [`velocity`]);
//! 3. trace Runge-Kutta characteristics backward with a Lagrange-in-time
//!    velocity extension and update the map jets ([`rk`], [`flowmap`]);
//! 4. when the map's Jacobian determinant drifts past a threshold, finalize
//!    it as a submap and restart from the identity; the global map is the
//!    right-to-left composition of all submaps ([`flowmap::MapStack`]).
//!
//! The crate is generic over the floating-point scalar (see [`Scalar`]);
//! concrete `f64` aliases are exported at the root. Heavy node loops are
//! data-parallel via rayon; set `RAYON_NUM_THREADS` to control the pool.

pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod flowmap;
pub mod grid;
pub mod hermite;
pub mod init;
pub mod io;
pub mod rk;
pub mod sampling;
mod scalar;
pub mod sim;
pub mod spectral;
pub mod velocity;

pub use config::SimConfig;
pub use convergence::{self_convergence, ConvergenceLevel, ConvergenceReport, RefinementMode};
pub use diagnostics::{
    bin_modes, default_fit_window, energy_l2, energy_of_samples, enstrophy_l2,
    enstrophy_of_samples, fit_radius, pullback_values,
    vorticity_spectrum, zoom_render, Conservation, DiagnosticsRecord, RadiusFit, Spectrum,
};
pub use error::{CmError, Result};
pub use flowmap::{advance_map, jacobian_det_error, HermiteMap, MapStack};
pub use grid::PeriodicGrid;
pub use hermite::{hermite_project, Deriv, HermiteField, Jet};
pub use init::{shell_modulus_total, InitialCondition};
pub use io::{
    diagnostics_row, load_stack, read_scalar_dump, save_stack, write_diagnostics_csv, write_pgm,
    write_scalar_dump, write_spectrum_csv, FieldMeta, IcSpec, LoadedStack, RenderMeta, RunWriter,
    DIAGNOSTICS_HEADER,
};
pub use rk::{one_step_foot, trace_foot, RkTableau, StageVelocity};
pub use sampling::sample_vorticity;
pub use scalar::Scalar;
pub use sim::{ResumeState, Simulation};
pub use spectral::SpectralWorkspace;
pub use velocity::{lagrange_weights, VelocityField, VelocityStack};

/// `f64` periodic grid.
pub type PeriodicGrid64 = PeriodicGrid<f64>;
/// `f64` Hermite jet field.
pub type HermiteField64 = HermiteField<f64>;
/// `f64` spectral workspace.
pub type SpectralWorkspace64 = SpectralWorkspace<f64>;
/// `f64` velocity field.
pub type VelocityField64 = VelocityField<f64>;
