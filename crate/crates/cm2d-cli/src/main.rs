//! Command-line driver for the cm2d solver: runs simulations from config
//! files and post-processes the resulting artifacts (renders, spectra,
//! convergence studies).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cm2d::{
    default_fit_window, fit_radius, load_stack, read_scalar_dump, write_pgm, write_spectrum_csv,
    zoom_render, FieldMeta, LoadedStack, RefinementMode, RenderMeta, RunWriter, SimConfig,
    Simulation, SpectralWorkspace, DIAGNOSTICS_HEADER,
};

#[derive(Parser)]
#[command(
    name = "cm2d",
    version,
    about = "Characteristic-mapping solver for 2D incompressible Euler on a periodic torus",
    after_help = "Set RAYON_NUM_THREADS to bound the worker-thread pool (defaults to all cores)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation described by a key=value config file.
    Run {
        /// Path to the config file.
        config: PathBuf,
    },
    /// Render a window of a field dump or saved stack as a 16-bit PGM.
    Render {
        /// A `.json`/`.f64` field dump, a stack directory, or a run
        /// directory containing `stack/`.
        artifact: PathBuf,
        /// Window `x0,y0,x1,y1`; defaults to the full domain.
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
        /// Pixels per axis.
        #[arg(long, default_value_t = 512)]
        px: usize,
        /// Pixel palette (the PGM container is grayscale).
        #[arg(long, value_enum, default_value_t = Colormap::Gray)]
        colormap: Colormap,
        /// Output stem; `.pgm` and `.json` are appended.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the vorticity shell spectrum of an artifact as `K,E` CSV.
    Spectrum {
        /// A `.json`/`.f64` field dump, a stack directory, or a run
        /// directory containing `stack/`.
        artifact: PathBuf,
        /// Evaluation grid per axis when sampling a saved stack (dumps use
        /// their own lattice).
        #[arg(long = "n-eval", default_value_t = 512)]
        n_eval: usize,
        /// Output CSV path; defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-convergence study: rerun a config under refinement and report
    /// observed orders.
    Converge {
        /// Path to the config file of the coarsest level.
        config: PathBuf,
        /// Which parameter the ladder refines.
        #[arg(long, value_enum)]
        mode: Mode,
        /// Number of ladder levels (≥ 3); the reference run is one
        /// refinement finer than the finest level.
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Colormap {
    Gray,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dt,
    Dx,
}

impl From<Mode> for RefinementMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Dt => RefinementMode::Dt,
            Mode::Dx => RefinementMode::Dx,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Window([f64; 4]);

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected x0,y0,x1,y1 — got {} fields", parts.len()));
    }
    let mut w = [0.0; 4];
    for (slot, part) in w.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("`{part}` is not a number: {e}"))?;
    }
    Ok(Window(w))
}

fn main() {
    if let Err(err) = dispatch(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { config } => cmd_run(&config),
        Cmd::Render {
            artifact,
            window,
            px,
            colormap: Colormap::Gray,
            out,
        } => cmd_render(&artifact, window, px, out),
        Cmd::Spectrum {
            artifact,
            n_eval,
            out,
        } => cmd_spectrum(&artifact, n_eval, out),
        Cmd::Converge {
            config,
            mode,
            levels,
        } => cmd_converge(&config, mode.into(), levels),
    }
}

fn read_config(path: &Path) -> Result<(SimConfig<f64>, String)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg = SimConfig::<f64>::parse(&text)?;
    Ok((cfg, text))
}

fn cmd_run(config: &Path) -> Result<()> {
    let (cfg, text) = read_config(config)?;
    // Construct (and validate) the simulation before touching the
    // filesystem, so config errors never leave a half-created output dir.
    let mut sim = Simulation::new(cfg.clone())?;
    let mut writer = RunWriter::create(&cfg, &text)?;
    println!("{DIAGNOSTICS_HEADER}");
    sim.run_with(|s, rec| {
        println!("{}", cm2d::diagnostics_row(rec));
        writer.on_record(s, rec)
    })?;
    writer.finish(&sim)?;
    println!(
        "done: t = {:?}, {} remap(s), outputs in {}",
        sim.time(),
        sim.maps().remap_count(),
        cfg.out_dir.display()
    );
    Ok(())
}

/// A loaded post-processing input: either raw lattice values or a full
/// solver state that can be evaluated anywhere.
enum Artifact {
    Dump { values: Vec<f64>, meta: FieldMeta },
    Stack(Box<LoadedStack<f64>>),
}

impl Artifact {
    fn length(&self) -> f64 {
        match self {
            Artifact::Dump { meta, .. } => meta.length,
            Artifact::Stack(s) => s.maps.active().grid().length(),
        }
    }

    fn time(&self) -> f64 {
        match self {
            Artifact::Dump { meta, .. } => meta.t,
            Artifact::Stack(s) => s.t,
        }
    }
}

fn load_artifact(path: &Path) -> Result<Artifact> {
    if path.is_dir() {
        let dir = if path.join("stack_manifest.json").is_file() {
            path.to_path_buf()
        } else if path.join("stack").join("stack_manifest.json").is_file() {
            path.join("stack")
        } else {
            bail!(
                "{} holds no stack_manifest.json (directly or under stack/)",
                path.display()
            );
        };
        let stack = load_stack::<f64>(&dir)
            .with_context(|| format!("loading stack {}", dir.display()))?;
        Ok(Artifact::Stack(Box::new(stack)))
    } else {
        let (values, meta) = read_scalar_dump(path)
            .with_context(|| format!("loading field dump {}", path.display()))?;
        Ok(Artifact::Dump { values, meta })
    }
}

/// Periodic bilinear interpolation on a raw dump lattice (value `[j*n+i]`
/// sits at `(i, j)·L/n`).
fn sample_dump(values: &[f64], n: usize, length: f64, x: f64, y: f64) -> f64 {
    let h = length / n as f64;
    let u = x.rem_euclid(length) / h;
    let v = y.rem_euclid(length) / h;
    let (fu, fv) = (u - u.floor(), v - v.floor());
    let i0 = (u.floor() as usize) % n;
    let j0 = (v.floor() as usize) % n;
    let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
    let at = |i: usize, j: usize| values[j * n + i];
    let lo = at(i0, j0) * (1.0 - fu) + at(i1, j0) * fu;
    let hi = at(i0, j1) * (1.0 - fu) + at(i1, j1) * fu;
    lo * (1.0 - fv) + hi * fv
}

fn cmd_render(path: &Path, window: Option<Window>, px: usize, out: Option<PathBuf>) -> Result<()> {
    let artifact = load_artifact(path)?;
    let length = artifact.length();
    let window = window
        .map(|w| w.0)
        .unwrap_or([0.0, 0.0, length, length]);
    let [x0, y0, x1, y1] = window;

    let raster = match &artifact {
        Artifact::Stack(stack) => {
            let ic = stack.ic.build::<f64>()?;
            zoom_render(&stack.maps, &ic, window, px)?
        }
        Artifact::Dump { values, meta } => {
            if !(window.iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0) {
                bail!("degenerate render window {window:?}");
            }
            if px < 2 {
                bail!("--px must be at least 2");
            }
            let denom = (px - 1) as f64;
            let (sx, sy) = (x1 - x0, y1 - y0);
            let mut raster = Vec::with_capacity(px * px);
            for j in 0..px {
                let y = y0 + (j as f64 * sy) / denom;
                for i in 0..px {
                    let x = x0 + (i as f64 * sx) / denom;
                    raster.push(sample_dump(values, meta.n, length, x, y));
                }
            }
            raster
        }
    };

    let finite = raster.iter().copied().filter(|v| v.is_finite());
    let min = finite.clone().fold(f64::INFINITY, f64::min);
    let max = finite.fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        bail!("rendered window contains no finite values");
    }

    let base = out.unwrap_or_else(|| default_out(path, "render"));
    let meta = RenderMeta {
        window,
        t: artifact.time(),
        n_px: px,
        min,
        max,
    };
    write_pgm(&base, &raster, px, &meta)?;
    println!("{}", base.with_extension("pgm").display());
    Ok(())
}

fn cmd_spectrum(path: &Path, n_eval: usize, out: Option<PathBuf>) -> Result<()> {
    let artifact = load_artifact(path)?;
    let spectrum = match &artifact {
        Artifact::Stack(stack) => {
            let ic = stack.ic.build::<f64>()?;
            let mut ws = SpectralWorkspace::new(n_eval, n_eval, artifact.length())?;
            cm2d::vorticity_spectrum(&stack.maps, &ic, n_eval, &mut ws)?
        }
        Artifact::Dump { values, meta } => {
            let mut ws = SpectralWorkspace::new(meta.n, meta.n, meta.length)?;
            let hat = ws.forward_coeffs(values, meta.n);
            cm2d::bin_modes(&hat, meta.n)
        }
    };

    // Informational tail fit; thin spectra simply skip it.
    if let Ok((k_lo, k_hi)) = default_fit_window(&spectrum) {
        if let Ok(fit) = fit_radius(&spectrum, k_lo, k_hi) {
            eprintln!(
                "tail fit over shells {k_lo}..={k_hi}: radius = {:?}, power = {:?}",
                fit.delta, fit.alpha
            );
        }
    }

    match out {
        Some(path) => {
            write_spectrum_csv(&path, &spectrum)?;
            println!("{}", path.display());
        }
        None => {
            println!("K,E");
            for (k, e) in spectrum.shells().iter().enumerate() {
                println!("{k},{e:?}");
            }
        }
    }
    Ok(())
}

fn cmd_converge(config: &Path, mode: RefinementMode, levels: usize) -> Result<()> {
    let (cfg, _) = read_config(config)?;
    let report = cm2d::self_convergence(&cfg, mode, levels)?;
    println!(
        "{:>5} {:>6} {:>12} {:>13} {:>13} {:>13} {:>13}",
        "level", "n_map", "dt", "map_err", "vorticity_err", "enstrophy_err", "energy_err"
    );
    for lv in &report.levels {
        println!(
            "{:>5} {:>6} {:>12.6} {:>13.4e} {:>13.4e} {:>13.4e} {:>13.4e}",
            lv.level, lv.n_map, lv.dt, lv.map_error, lv.vorticity_error, lv.enstrophy_error,
            lv.energy_error
        );
    }
    println!(
        "orders: map {:.2}  vorticity {:.2}  enstrophy {:.2}  energy {:.2}",
        report.map_order, report.vorticity_order, report.enstrophy_order, report.energy_order
    );
    Ok(())
}

/// `dir → dir/<stem>`, `file.ext → file_<stem>` beside it.
fn default_out(artifact: &Path, stem: &str) -> PathBuf {
    if artifact.is_dir() {
        artifact.join(stem)
    } else {
        let base = artifact.with_extension("");
        let name = base
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "artifact".into());
        base.with_file_name(format!("{name}_{stem}"))
    }
}
