//! The simulation driver: owns the map stack, the velocity history, and the
//! conservation ledger, and advances them one step at a time.
//!
//! Each loop iteration `n` (time `t_n`):
//! 1. sample the mollified pullback vorticity on the sampling grid and abort
//!    on any non-finite value;
//! 2. solve for the stream function and build the velocity field `u^n`,
//!    pushing it onto the history (evicting beyond the Lagrange depth);
//! 3. on schedule, record diagnostics at `t_n` (with `u^n`);
//! 4. unless this is the final time, advance the map to `t_{n+1}` and check
//!    the remap criterion.
//!
//! The first step is special: with only `u⁰` stored, the time extension is
//! constant in time, an O(Δt) velocity error that would cap global accuracy
//! at second order. With `startup_correction` on (the default), the step is
//! redone once through the provisional `u¹`, restoring the full order of
//! the time extension. Resumed runs skip all of this — their history is
//! restored from disk.

use crate::config::SimConfig;
use crate::diagnostics::{
    energy_of_samples, enstrophy_of_samples, pullback_values, Conservation, DiagnosticsRecord,
};
use crate::error::{CmError, Result};
use crate::flowmap::MapStack;
use crate::grid::PeriodicGrid;
use crate::init::InitialCondition;
use crate::rk::RkTableau;
use crate::sampling::sample_vorticity;
use crate::scalar::Scalar;
use crate::spectral::SpectralWorkspace;
use crate::velocity::{VelocityField, VelocityStack};

/// State needed to continue a saved run exactly where it stopped.
pub struct ResumeState<T: Scalar> {
    pub maps: MapStack<T>,
    /// Stored velocity history, oldest first. The resumed stack keeps the
    /// newest `p` entries.
    pub velocity: Vec<VelocityField<T>>,
    pub t: T,
    pub remap_times: Vec<T>,
    /// `(enstrophy, energy)` at the original `t = 0`, so drift columns keep
    /// their original reference.
    pub baseline: Option<(T, T)>,
}

/// A live simulation.
pub struct Simulation<T: Scalar> {
    cfg: SimConfig<T>,
    ic: InitialCondition<T>,
    tab: RkTableau<T>,
    sample_grid: PeriodicGrid<T>,
    ws: SpectralWorkspace<T>,
    maps: MapStack<T>,
    vel: VelocityStack<T>,
    ledger: Conservation<T>,
    records: Vec<DiagnosticsRecord<T>>,
    remap_times: Vec<T>,
    step: usize,
    sample_pending: bool,
    needs_startup_fix: bool,
    pre_step_maps: Option<MapStack<T>>,
}

impl<T: Scalar> Simulation<T> {
    /// Fresh run from `t = 0` with the identity map.
    pub fn new(cfg: SimConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let ic = cfg.initial_condition()?;
        let tab = cfg.tableau()?;
        let sample_grid = PeriodicGrid::new(cfg.n_sample, cfg.length)?;
        let ws = SpectralWorkspace::new(cfg.n_sample, cfg.n_psi, cfg.length)?;
        let maps = MapStack::new(PeriodicGrid::new(cfg.n_map, cfg.length)?, T::zero())?;
        let vel = VelocityStack::new(cfg.p)?;
        let fix = cfg.startup_correction && cfg.step_count() >= 1 && cfg.p >= 2;
        Ok(Self {
            cfg,
            ic,
            tab,
            sample_grid,
            ws,
            maps,
            vel,
            ledger: Conservation::new(),
            records: Vec::new(),
            remap_times: Vec::new(),
            step: 0,
            sample_pending: true,
            needs_startup_fix: fix,
            pre_step_maps: None,
        })
    }

    /// Continues from a saved state. The saved time must sit on the step
    /// lattice of `cfg.dt`, and the newest stored velocity must carry it.
    pub fn resume(cfg: SimConfig<T>, state: ResumeState<T>) -> Result<Self> {
        cfg.validate()?;
        let grid = state.maps.active().grid();
        if grid.n() != cfg.n_map || grid.length() != cfg.length {
            return Err(CmError::Config(format!(
                "saved stack is {}² on L = {}, config wants {}² on L = {}",
                grid.n(),
                grid.length(),
                cfg.n_map,
                cfg.length
            )));
        }
        let ratio = state.t / cfg.dt;
        let k = ratio.round();
        if (state.t - k * cfg.dt).abs() > T::lit(1e-12) * state.t.abs().max(T::one()) {
            return Err(CmError::Config(format!(
                "saved time {} is not a whole number of steps of dt = {}",
                state.t, cfg.dt
            )));
        }
        let step = k
            .to_usize()
            .ok_or_else(|| CmError::Config(format!("saved time {} is negative", state.t)))?;
        if cfg.step_time(step) < state.t - T::lit(1e-12) {
            return Err(CmError::Config(format!(
                "t_end = {} is before the saved time {}",
                cfg.t_end, state.t
            )));
        }
        match state.velocity.last() {
            Some(u) if (u.t() - state.t).abs() <= T::lit(1e-12) => {}
            _ => {
                return Err(CmError::Artifact(
                    "saved velocity history does not end at the saved time".into(),
                ))
            }
        }
        let ic = cfg.initial_condition()?;
        let tab = cfg.tableau()?;
        let sample_grid = PeriodicGrid::new(cfg.n_sample, cfg.length)?;
        let ws = SpectralWorkspace::new(cfg.n_sample, cfg.n_psi, cfg.length)?;
        let mut vel = VelocityStack::new(cfg.p)?;
        let mut history = state.velocity;
        if history.len() > cfg.p {
            history.drain(..history.len() - cfg.p);
        }
        vel.replace(history)?;
        Ok(Self {
            cfg,
            ic,
            tab,
            sample_grid,
            ws,
            maps: state.maps,
            vel,
            ledger: Conservation::with_baseline(state.baseline),
            records: Vec::new(),
            remap_times: state.remap_times,
            step,
            sample_pending: false,
            needs_startup_fix: false,
            pre_step_maps: None,
        })
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.cfg
    }

    pub fn initial(&self) -> &InitialCondition<T> {
        &self.ic
    }

    pub fn maps(&self) -> &MapStack<T> {
        &self.maps
    }

    pub fn velocity(&self) -> &VelocityStack<T> {
        &self.vel
    }

    /// Simulation time of the next loop iteration.
    pub fn time(&self) -> T {
        self.cfg.step_time(self.step)
    }

    /// Diagnostics rows recorded so far (scheduled steps only).
    pub fn records(&self) -> &[DiagnosticsRecord<T>] {
        &self.records
    }

    /// Times at which remaps occurred, oldest first.
    pub fn remap_times(&self) -> &[T] {
        &self.remap_times
    }

    /// `(enstrophy, energy)` reference of the drift columns, once fixed.
    pub fn baseline(&self) -> Option<(T, T)> {
        self.ledger.baseline()
    }

    /// Whether every loop iteration through `t_end` has been processed.
    pub fn is_finished(&self) -> bool {
        self.step > self.cfg.step_count()
    }

    /// Runs one loop iteration; returns the diagnostics row if this step
    /// was scheduled to record one.
    pub fn step_once(&mut self) -> Result<Option<DiagnosticsRecord<T>>> {
        if self.is_finished() {
            return Ok(None);
        }
        let n = self.step;
        let n_total = self.cfg.step_count();
        let t_n = self.cfg.step_time(n);

        if self.sample_pending {
            self.build_velocity_at(t_n)?;
        }
        self.sample_pending = true;

        // Redo the first step with the two-point time extension now that a
        // provisional u¹ exists, then rebuild u¹ from the corrected map.
        if n == 1 && self.needs_startup_fix {
            self.needs_startup_fix = false;
            self.maps = self
                .pre_step_maps
                .take()
                .expect("saved before the provisional first step");
            let t0 = self.cfg.step_time(0);
            self.maps
                .advance(&self.vel, t_n, t_n - t0, &self.tab, self.cfg.eps_fd)?;
            let mut hist: Vec<_> = self.vel.iter().cloned().collect();
            hist.pop();
            self.vel.replace(hist)?;
            self.build_velocity_at(t_n)?;
            if self.maps.maybe_remap(t_n, self.cfg.delta_det)? {
                self.remap_times.push(t_n);
            }
        }

        let record = if n % self.cfg.output_stride() == 0 || n == n_total {
            Some(self.observe(t_n)?)
        } else {
            None
        };

        if n < n_total {
            let defer_remap = n == 0 && self.needs_startup_fix;
            if defer_remap {
                self.pre_step_maps = Some(self.maps.clone());
            }
            let t_next = self.cfg.step_time(n + 1);
            self.maps
                .advance(&self.vel, t_next, t_next - t_n, &self.tab, self.cfg.eps_fd)?;
            if !defer_remap && self.maps.maybe_remap(t_next, self.cfg.delta_det)? {
                self.remap_times.push(t_next);
            }
        }
        self.step += 1;
        Ok(record)
    }

    /// Runs to `t_end`, invoking `on_record` at every scheduled row.
    pub fn run_with(
        &mut self,
        mut on_record: impl FnMut(&Self, &DiagnosticsRecord<T>) -> Result<()>,
    ) -> Result<()> {
        while !self.is_finished() {
            if let Some(rec) = self.step_once()? {
                on_record(self, &rec)?;
            }
        }
        Ok(())
    }

    /// Runs to `t_end`.
    pub fn run(&mut self) -> Result<()> {
        self.run_with(|_, _| Ok(()))
    }

    /// Samples vorticity through the current maps, solves for the stream
    /// function, and pushes the velocity at time `t` onto the history.
    fn build_velocity_at(&mut self, t: T) -> Result<()> {
        let maps = &self.maps;
        let ic = &self.ic;
        let omega = sample_vorticity(
            &self.sample_grid,
            |x| ic.value(maps.eval(x)?),
            self.cfg.eps,
            self.cfg.quad_m,
        )?;
        if omega.iter().any(|v| !v.is_finite()) {
            return Err(CmError::Blowup {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        let psi_hat = self.ws.solve_stream(&omega)?;
        let u = self.ws.build_velocity(&psi_hat, t, self.cfg.eps)?;
        self.vel.push(u)
    }

    fn observe(&mut self, t: T) -> Result<DiagnosticsRecord<T>> {
        let values = pullback_values(&self.maps, &self.ic, self.cfg.n_eval)?;
        let length = self.maps.active().grid().length();
        let enstrophy = enstrophy_of_samples(&values, length);
        let energy = energy_of_samples(&values, self.cfg.n_eval, &mut self.ws)?;
        let det_error = self.maps.det_error()?;
        let rec = self
            .ledger
            .record(t, enstrophy, energy, det_error, self.maps.remap_count());
        self.records.push(rec);
        Ok(rec)
    }
}
