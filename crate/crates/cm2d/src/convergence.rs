//! Self-convergence studies: run a ladder of refinements of one
//! configuration and measure each level against a common reference run one
//! refinement finer than the finest level.
//!
//! Map and vorticity errors are sup-norms over a fixed probe lattice that
//! is deliberately offset from every grid involved, so no level is measured
//! at its own interpolation nodes. Enstrophy and energy errors are each
//! level's own conservation defects |Q(t_end) − Q(0)| — the quantity the
//! method is supposed to hold — which makes their observed order
//! independent of the map error's (the scheme conserves them through any
//! volume-preserving map, however inaccurate as a flow).

use crate::config::SimConfig;
use crate::error::{CmError, Result};
use crate::flowmap::MapStack;
use crate::init::InitialCondition;
use crate::scalar::Scalar;
use crate::sim::Simulation;

/// Which parameter the ladder refines (halving `Δt` or doubling the map
/// grid per level).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementMode {
    Dt,
    Dx,
}

impl RefinementMode {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "dt" => Ok(Self::Dt),
            "dx" => Ok(Self::Dx),
            other => Err(CmError::InvalidParameter(format!(
                "refinement mode must be `dt` or `dx`, got `{other}`"
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Dt => "dt",
            Self::Dx => "dx",
        }
    }
}

/// Errors of one ladder level against the common reference run.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceLevel<T: Scalar> {
    pub level: usize,
    pub n_map: usize,
    pub dt: T,
    /// Sup over probes of the wrapped Euclidean map difference.
    pub map_error: T,
    /// Sup over probes of the pullback vorticity difference.
    pub vorticity_error: T,
    /// |enstrophy(t_end) − enstrophy(0)| of this level's own run.
    pub enstrophy_error: T,
    /// |energy(t_end) − energy(0)| of this level's own run.
    pub energy_error: T,
}

/// Ladder results plus least-squares orders (slopes of log2 error against
/// refinement level).
#[derive(Debug, Clone)]
pub struct ConvergenceReport<T: Scalar> {
    pub mode: RefinementMode,
    pub levels: Vec<ConvergenceLevel<T>>,
    pub map_order: T,
    pub vorticity_order: T,
    pub enstrophy_order: T,
    pub energy_order: T,
}

/// Probe lattice size per axis.
const PROBES: usize = 128;
/// Probe offset in cells: far from the nodes of every power-of-two grid.
const PROBE_OFFSET: f64 = 0.381_966_011_250_105;

struct ProbeData<T: Scalar> {
    mapped: Vec<[T; 2]>,
    vorticity: Vec<T>,
}

fn probe_run<T: Scalar>(maps: &MapStack<T>, ic: &InitialCondition<T>) -> Result<ProbeData<T>> {
    let length = maps.active().grid().length();
    let h = length / T::of_usize(PROBES);
    let off = T::lit(PROBE_OFFSET);
    let mut mapped = vec![[T::zero(); 2]; PROBES * PROBES];
    let mut vorticity = vec![T::zero(); PROBES * PROBES];
    for j in 0..PROBES {
        let y = (T::of_usize(j) + off) * h;
        for i in 0..PROBES {
            let p = maps.eval([(T::of_usize(i) + off) * h, y])?;
            mapped[j * PROBES + i] = p;
            vorticity[j * PROBES + i] = ic.value(p)?;
        }
    }
    Ok(ProbeData { mapped, vorticity })
}

/// Shortest periodic distance between two coordinates on `[0, L)`.
fn wrapped_diff<T: Scalar>(a: T, b: T, length: T) -> T {
    let mut d = (a - b).abs() % length;
    if d > length / T::lit(2.0) {
        d = length - d;
    }
    d
}

/// Runs the ladder plus the reference and assembles the report.
///
/// Level `i` of `levels` uses `Δt/2^i` (mode `dt`) or `n_map·2^i` (mode
/// `dx`) relative to the base configuration; the reference applies one more
/// refinement beyond the finest level.
pub fn self_convergence<T: Scalar>(
    cfg: &SimConfig<T>,
    mode: RefinementMode,
    levels: usize,
) -> Result<ConvergenceReport<T>> {
    if levels < 3 {
        return Err(CmError::InvalidParameter(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    let level_cfg = |i: usize| -> Result<SimConfig<T>> {
        let mut c = cfg.clone();
        c.save_stack = false;
        c.snapshot_fields = false;
        match mode {
            RefinementMode::Dt => {
                c.dt = cfg.dt / T::of_usize(1 << i);
            }
            RefinementMode::Dx => {
                c.n_map = cfg.n_map << i;
                c.n_eval = c.n_eval.max(c.n_map);
            }
        }
        c.validate()?;
        Ok(c)
    };

    let mut rows: Vec<(ConvergenceLevel<T>, ProbeData<T>)> = Vec::with_capacity(levels);
    for i in 0..levels {
        let c = level_cfg(i)?;
        let mut sim = Simulation::new(c.clone())?;
        sim.run()?;
        let probes = probe_run(sim.maps(), sim.initial())?;
        let last = sim.records().last().expect("a run always records rows");
        rows.push((
            ConvergenceLevel {
                level: i,
                n_map: c.n_map,
                dt: c.dt,
                map_error: T::zero(),
                vorticity_error: T::zero(),
                enstrophy_error: last.enstrophy_error.abs(),
                energy_error: last.energy_error.abs(),
            },
            probes,
        ));
    }

    let reference = {
        let c = level_cfg(levels)?;
        let mut sim = Simulation::new(c)?;
        sim.run()?;
        probe_run(sim.maps(), sim.initial())?
    };

    let length = cfg.length;
    let mut out = Vec::with_capacity(levels);
    for (mut row, probes) in rows {
        let mut map_err = T::zero();
        let mut vort_err = T::zero();
        for k in 0..PROBES * PROBES {
            let a = probes.mapped[k];
            let r = reference.mapped[k];
            let dx = wrapped_diff(a[0], r[0], length);
            let dy = wrapped_diff(a[1], r[1], length);
            let d = (dx * dx + dy * dy).sqrt();
            if d > map_err {
                map_err = d;
            }
            let dv = (probes.vorticity[k] - reference.vorticity[k]).abs();
            if dv > vort_err {
                vort_err = dv;
            }
        }
        row.map_error = map_err;
        row.vorticity_error = vort_err;
        out.push(row);
    }

    let order_of = |errs: &[T]| -> T {
        let pts: Vec<(T, T)> = errs
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > T::zero() && e.is_finite())
            .map(|(i, e)| (T::of_usize(i), e.log2()))
            .collect();
        if pts.len() < 2 {
            return T::zero();
        }
        // Least-squares slope of log2(e) on the level index; the order is
        // its negation (errors shrink as the level rises).
        let n = T::of_usize(pts.len());
        let sx = pts.iter().fold(T::zero(), |a, p| a + p.0);
        let sy = pts.iter().fold(T::zero(), |a, p| a + p.1);
        let sxx = pts.iter().fold(T::zero(), |a, p| a + p.0 * p.0);
        let sxy = pts.iter().fold(T::zero(), |a, p| a + p.0 * p.1);
        -(n * sxy - sx * sy) / (n * sxx - sx * sx)
    };

    let map_order = order_of(&out.iter().map(|r| r.map_error).collect::<Vec<_>>());
    let vorticity_order = order_of(&out.iter().map(|r| r.vorticity_error).collect::<Vec<_>>());
    let enstrophy_order = order_of(&out.iter().map(|r| r.enstrophy_error).collect::<Vec<_>>());
    let energy_order = order_of(&out.iter().map(|r| r.energy_error).collect::<Vec<_>>());

    Ok(ConvergenceReport {
        mode,
        levels: out,
        map_order,
        vorticity_order,
        enstrophy_order,
        energy_order,
    })
}
