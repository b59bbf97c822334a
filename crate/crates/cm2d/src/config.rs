//! Run configuration: a flat UTF-8 `key = value` file with `#` comments.
//!
//! Every key has a default except `t_end`, which a run must state
//! explicitly. Scalars accept plain floats, simple fractions (`1/32`), and
//! `inf` where a threshold may be disabled. The domain length is normally
//! inferred from the initial condition (each one has a natural period) and
//! only needs spelling out to assert it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{CmError, Result};
use crate::init::InitialCondition;
use crate::rk::RkTableau;
use crate::scalar::Scalar;

/// Fully resolved run parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig<T: Scalar> {
    /// Initial-condition id: `four_modes`, `random_shells`, `gaussian_pair`,
    /// or `zero`.
    pub ic: String,
    /// Domain period (both axes).
    pub length: T,
    /// Map grid size per axis.
    pub n_map: usize,
    /// Vorticity sampling grid size per axis.
    pub n_sample: usize,
    /// Stream-function (upsampled) grid size per axis.
    pub n_psi: usize,
    /// Diagnostics evaluation grid size per axis.
    pub n_eval: usize,
    /// Time step.
    pub dt: T,
    /// Final time.
    pub t_end: T,
    /// Remap threshold on the Jacobian-determinant error; `inf` disables.
    pub delta_det: T,
    /// Lagrange order of the velocity time extension (history depth).
    pub p: usize,
    /// Runge-Kutta tableau id (`rk1`…`rk4`).
    pub rk: String,
    /// Mollifier half-support width.
    pub eps: T,
    /// Midpoint quadrature sub-samples per cell per axis.
    pub quad_m: usize,
    /// Centered-difference spacing for map jets.
    pub eps_fd: T,
    /// Seed for the random-shell phases.
    pub seed: u64,
    /// Largest populated shell for `random_shells`.
    pub k_max: usize,
    /// Grid on which `random_shells` realizes its Fourier series.
    pub ic_n_sample: usize,
    /// Diagnostics/snapshot cadence in time units (rounded to whole steps).
    pub output_interval: T,
    /// Output directory for `run`.
    pub out_dir: PathBuf,
    /// Redo the first step once with a two-point time extension.
    pub startup_correction: bool,
    /// Dump the vorticity lattice at every scheduled output.
    pub snapshot_fields: bool,
    /// Save the submap stack (with velocity history) at the end of the run.
    pub save_stack: bool,
}

impl<T: Scalar> SimConfig<T> {
    /// Parses a configuration file's text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CmError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(CmError::Config(format!(
                    "line {}: empty key or value in `{line}`",
                    lineno + 1
                )));
            }
            if let Some((first, _)) = seen.insert(key, (lineno + 1, value)) {
                return Err(CmError::Config(format!(
                    "line {}: key `{key}` already set on line {first}",
                    lineno + 1
                )));
            }
        }

        let mut take = |key: &str| seen.remove(key).map(|(_, v)| v.to_owned());

        let ic = take("ic").unwrap_or_else(|| "four_modes".into());
        let seed = parse_int::<u64>("seed", take("seed"), 0)?;
        let k_max = parse_int::<usize>("k_max", take("k_max"), 10)?;
        let ic_n_sample = parse_int::<usize>("ic_n_sample", take("ic_n_sample"), 512)?;

        // The initial condition fixes the natural domain length; an explicit
        // L must agree with it (closed forms are periodic on one period
        // only).
        let natural: T = InitialCondition::<T>::from_id(&ic, seed, k_max, ic_n_sample)
            .map_err(|e| CmError::Config(format!("ic: {e}")))?
            .length();
        let length = match take("L") {
            None => natural,
            Some(s) => {
                let l: T = parse_scalar("L", &s)?;
                if ((l - natural) / natural).abs() > T::lit(1e-12) {
                    return Err(CmError::Config(format!(
                        "L = {l} conflicts with ic `{ic}` (defined on L = {natural})"
                    )));
                }
                l
            }
        };

        let n_map = parse_int::<usize>("n_map", take("n_map"), 128)?;
        let n_sample = parse_int::<usize>("n_sample", take("n_sample"), 512)?;
        let n_psi = parse_int::<usize>("n_psi", take("n_psi"), 512)?;
        let n_eval = parse_int::<usize>("n_eval", take("n_eval"), 2048)?;
        let dt: T = parse_scalar("dt", &take("dt").unwrap_or_else(|| "1/32".into()))?;
        let t_end: T = match take("t_end") {
            Some(s) => parse_scalar("t_end", &s)?,
            None => return Err(CmError::Config("t_end must be set".into())),
        };
        let delta_det: T =
            parse_scalar("delta_det", &take("delta_det").unwrap_or_else(|| "1e-4".into()))?;
        let p = parse_int::<usize>("p", take("p"), 3)?;
        let rk = take("rk").unwrap_or_else(|| "rk3".into());
        let eps: T = match take("eps") {
            Some(s) => parse_scalar("eps", &s)?,
            None => length / T::of_usize(n_sample),
        };
        let quad_m = parse_int::<usize>("quad_m", take("quad_m"), 2)?;
        let eps_fd: T = match take("eps_fd") {
            Some(s) => parse_scalar("eps_fd", &s)?,
            None => T::lit(1e-4) * length,
        };
        let output_interval: T = parse_scalar(
            "output_interval",
            &take("output_interval").unwrap_or_else(|| "1".into()),
        )?;
        let out_dir = PathBuf::from(take("out_dir").unwrap_or_else(|| "out".into()));
        let startup_correction =
            parse_bool("startup_correction", take("startup_correction"), true)?;
        let snapshot_fields = parse_bool("snapshot_fields", take("snapshot_fields"), false)?;
        let save_stack = parse_bool("save_stack", take("save_stack"), true)?;

        if let Some((key, (lineno, _))) = seen.into_iter().next() {
            return Err(CmError::Config(format!("line {lineno}: unknown key `{key}`")));
        }

        let cfg = Self {
            ic,
            length,
            n_map,
            n_sample,
            n_psi,
            n_eval,
            dt,
            t_end,
            delta_det,
            p,
            rk,
            eps,
            quad_m,
            eps_fd,
            seed,
            k_max,
            ic_n_sample,
            output_interval,
            out_dir,
            startup_correction,
            snapshot_fields,
            save_stack,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant; called by [`SimConfig::parse`] and again by
    /// the driver so hand-built configs get the same screening.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CmError::Config(msg));
        if self.n_psi < self.n_sample {
            return fail(format!(
                "n_psi = {} must be >= n_sample = {}",
                self.n_psi, self.n_sample
            ));
        }
        for (name, n) in [
            ("n_map", self.n_map),
            ("n_sample", self.n_sample),
            ("n_psi", self.n_psi),
            ("n_eval", self.n_eval),
            ("ic_n_sample", self.ic_n_sample),
        ] {
            if n < 4 {
                return fail(format!("{name} = {n} is below the minimum grid size 4"));
            }
        }
        if self.n_eval < self.n_map {
            return fail(format!(
                "n_eval = {} must be >= n_map = {}",
                self.n_eval, self.n_map
            ));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return fail(format!("dt = {} must be positive and finite", self.dt));
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return fail(format!("t_end = {} must be >= 0 and finite", self.t_end));
        }
        if !(self.delta_det > T::zero()) {
            return fail(format!("delta_det = {} must be positive", self.delta_det));
        }
        if !(1..=4).contains(&self.p) {
            return fail(format!("p = {} must be in 1..=4", self.p));
        }
        RkTableau::<T>::from_id(&self.rk)
            .map_err(|_| CmError::Config(format!("rk = `{}` is not a known tableau", self.rk)))?;
        if !(self.eps >= T::zero() && self.eps.is_finite()) {
            return fail(format!("eps = {} must be finite and >= 0", self.eps));
        }
        if self.eps > self.length / T::lit(4.0) {
            return fail(format!(
                "eps = {} exceeds a quarter period of L = {}",
                self.eps, self.length
            ));
        }
        if self.quad_m < 1 {
            return fail("quad_m must be >= 1".into());
        }
        if !(self.eps_fd > T::zero() && self.eps_fd < self.length / T::lit(8.0)) {
            return fail(format!(
                "eps_fd = {} must lie in (0, L/8)",
                self.eps_fd
            ));
        }
        if !(self.output_interval > T::zero()) {
            return fail(format!(
                "output_interval = {} must be positive",
                self.output_interval
            ));
        }
        Ok(())
    }

    /// Builds the configured initial condition.
    pub fn initial_condition(&self) -> Result<InitialCondition<T>> {
        InitialCondition::from_id(&self.ic, self.seed, self.k_max, self.ic_n_sample)
    }

    /// Builds the configured Runge-Kutta tableau.
    pub fn tableau(&self) -> Result<RkTableau<T>> {
        RkTableau::from_id(&self.rk)
    }

    /// Number of steps: whole steps of `dt`, plus a shorter final step when
    /// `t_end` is not a multiple (a relative slack of 1e-9 absorbs the
    /// accumulated rounding of `t_end/dt`).
    pub fn step_count(&self) -> usize {
        if self.t_end <= T::zero() {
            return 0;
        }
        let ratio = self.t_end / self.dt;
        let down = ratio.floor();
        let n = if (ratio - down) / ratio.max(T::one()) <= T::lit(1e-9) {
            down
        } else {
            down + T::one()
        };
        n.to_usize().unwrap_or(0)
    }

    /// Time of step `n` (the last step lands exactly on `t_end`).
    pub fn step_time(&self, n: usize) -> T {
        let total = self.step_count();
        if n >= total {
            self.t_end
        } else {
            T::of_usize(n) * self.dt
        }
    }

    /// Steps between scheduled diagnostics/snapshot rows: the whole multiple
    /// of `dt` nearest `output_interval`, at least one step.
    pub fn output_stride(&self) -> usize {
        let steps = (self.output_interval / self.dt)
            .round()
            .to_usize()
            .unwrap_or(1);
        steps.max(1)
    }
}

fn parse_int<I: std::str::FromStr>(key: &str, raw: Option<String>, default: I) -> Result<I> {
    match raw {
        None => Ok(default),
        Some(s) => s
            .parse::<I>()
            .map_err(|_| CmError::Config(format!("{key}: `{s}` is not a valid integer"))),
    }
}

fn parse_bool(key: &str, raw: Option<String>, default: bool) -> Result<bool> {
    match raw.as_deref() {
        None => Ok(default),
        Some("true") | Some("on") | Some("1") => Ok(true),
        Some("false") | Some("off") | Some("0") => Ok(false),
        Some(s) => Err(CmError::Config(format!(
            "{key}: `{s}` is not a boolean (true/false/on/off/1/0)"
        ))),
    }
}

/// Parses a scalar: float literal, `inf`, or a fraction `a/b`.
fn parse_scalar<T: Scalar>(key: &str, s: &str) -> Result<T> {
    let bad = || CmError::Config(format!("{key}: `{s}` is not a number"));
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad())?;
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(CmError::Config(format!("{key}: division by zero in `{s}`")));
        }
        return Ok(T::lit(n) / T::lit(d));
    }
    match s {
        "inf" | "+inf" => Ok(T::infinity()),
        _ => {
            let v: f64 = s.parse().map_err(|_| bad())?;
            Ok(T::lit(v))
        }
    }
}
