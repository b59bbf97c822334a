//! On-disk artifacts: raw float64 field dumps with JSON sidecars, submap
//! stack directories, diagnostics and spectrum CSV files, 16-bit PGM
//! images, and the run manifest.
//!
//! All numeric payloads are row-major little-endian float64 (row 0 at the
//! smallest `y`), so every artifact can be read from any language without a
//! schema library. JSON sidecars carry the lattice metadata; serde_json
//! round-trips every finite float bit-exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::diagnostics::{pullback_values, DiagnosticsRecord, Spectrum};
use crate::error::{CmError, Result};
use crate::flowmap::{HermiteMap, MapStack};
use crate::grid::PeriodicGrid;
use crate::hermite::{HermiteField, Jet};
use crate::init::InitialCondition;
use crate::scalar::Scalar;
use crate::sim::{ResumeState, Simulation};
use crate::velocity::{VelocityField, VelocityStack};

/// Sidecar of a scalar lattice dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldMeta {
    /// Lattice size per axis.
    pub n: usize,
    /// Domain period.
    #[serde(rename = "L")]
    pub length: f64,
    /// Simulation time of the dump.
    pub t: f64,
    /// What the values are (e.g. `vorticity`).
    pub quantity: String,
}

fn f64_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("f64")
}

fn write_f64_planes(path: &Path, planes: &[&[f64]]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for plane in planes {
        for v in *plane {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_f64_exact(path: &Path, count: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(CmError::Artifact(format!(
            "{} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            count * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunked by 8")))
        .collect())
}

/// Writes `<base>.f64` (raw values) and `<base>.json` (metadata). `base`
/// must not carry an extension of its own.
pub fn write_scalar_dump<T: Scalar>(
    base: &Path,
    values: &[T],
    meta: &FieldMeta,
) -> Result<()> {
    if values.len() != meta.n * meta.n {
        return Err(CmError::Artifact(format!(
            "dump of {} values does not fill an {}² lattice",
            values.len(),
            meta.n
        )));
    }
    let raw: Vec<f64> = values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    write_f64_planes(&base.with_extension("f64"), &[&raw])?;
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(base.with_extension("json"))?),
        meta,
    )?;
    Ok(())
}

/// Reads a scalar dump given either its `.json` or `.f64` path.
pub fn read_scalar_dump(path: &Path) -> Result<(Vec<f64>, FieldMeta)> {
    let json_path = path.with_extension("json");
    let meta: FieldMeta = serde_json::from_reader(File::open(&json_path)?)?;
    let values = read_f64_exact(&f64_path(&json_path), meta.n * meta.n)?;
    Ok((values, meta))
}

/// One Hermite jet field as four planes (`value, dx, dy, dxy`).
fn jet_planes<T: Scalar>(field: &HermiteField<T>) -> [Vec<f64>; 4] {
    let n2 = field.jets().len();
    let mut planes = [
        Vec::with_capacity(n2),
        Vec::with_capacity(n2),
        Vec::with_capacity(n2),
        Vec::with_capacity(n2),
    ];
    for jet in field.jets() {
        for (plane, v) in planes.iter_mut().zip(jet.iter()) {
            plane.push(v.to_f64().unwrap_or(f64::NAN));
        }
    }
    planes
}

fn field_from_planes<T: Scalar>(
    raw: &[f64],
    n: usize,
    length: T,
) -> Result<HermiteField<T>> {
    let n2 = n * n;
    let mut jets: Vec<Jet<T>> = Vec::with_capacity(n2);
    for k in 0..n2 {
        jets.push([
            T::lit(raw[k]),
            T::lit(raw[n2 + k]),
            T::lit(raw[2 * n2 + k]),
            T::lit(raw[3 * n2 + k]),
        ]);
    }
    HermiteField::new(PeriodicGrid::new(n, length)?, jets)
}

/// Initial-condition coordinates stored in the stack manifest, so saved
/// stacks are self-contained for rendering and spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcSpec {
    pub id: String,
    pub seed: u64,
    pub k_max: usize,
    pub n_sample: usize,
}

impl IcSpec {
    pub fn of_config<T: Scalar>(cfg: &SimConfig<T>) -> Self {
        Self {
            id: cfg.ic.clone(),
            seed: cfg.seed,
            k_max: cfg.k_max,
            n_sample: cfg.ic_n_sample,
        }
    }

    pub fn build<T: Scalar>(&self) -> Result<InitialCondition<T>> {
        InitialCondition::from_id(&self.id, self.seed, self.k_max, self.n_sample)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MapEntry {
    /// Start time of this submap's interval.
    tau0: f64,
    /// End time (the next submap's start, or the save time for the active).
    tau1: f64,
    file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VelocityEntry {
    t: f64,
    eps: f64,
    file: String,
}

/// Stack directory manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct StackManifest {
    format: String,
    t: f64,
    length: f64,
    n_map: usize,
    remap_count: usize,
    remap_times: Vec<f64>,
    /// `(enstrophy, energy)` at the run's `t = 0`.
    baseline: Option<(f64, f64)>,
    ic: IcSpec,
    /// `[τ_i, τ_{i+1}]` per finalized submap, then the active interval.
    intervals: Vec<(f64, f64)>,
    submaps: Vec<MapEntry>,
    active: MapEntry,
    velocity: Vec<VelocityEntry>,
}

const STACK_MANIFEST: &str = "stack_manifest.json";

fn write_map<T: Scalar>(dir: &Path, name: &str, map: &HermiteMap<T>) -> Result<String> {
    let planes1 = jet_planes(map.d1());
    let planes2 = jet_planes(map.d2());
    let refs: Vec<&[f64]> = planes1.iter().chain(planes2.iter()).map(|p| p.as_slice()).collect();
    let file = format!("{name}.f64");
    write_f64_planes(&dir.join(&file), &refs)?;
    Ok(file)
}

fn read_map<T: Scalar>(dir: &Path, entry: &MapEntry, n: usize, length: T) -> Result<HermiteMap<T>> {
    let raw = read_f64_exact(&dir.join(&entry.file), 8 * n * n)?;
    let d1 = field_from_planes(&raw[..4 * n * n], n, length)?;
    let d2 = field_from_planes(&raw[4 * n * n..], n, length)?;
    HermiteMap::from_parts(d1, d2, T::lit(entry.tau0))
}

/// Saves the full solver state (submaps, active map, velocity history) into
/// `dir`, which is created if needed. Returns the file names written, the
/// manifest last.
pub fn save_stack<T: Scalar>(
    dir: &Path,
    maps: &MapStack<T>,
    velocity: &VelocityStack<T>,
    t: T,
    baseline: Option<(T, T)>,
    remap_times: &[T],
    ic: IcSpec,
) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let grid = maps.active().grid();
    let to64 = |v: T| v.to_f64().unwrap_or(f64::NAN);

    let mut submaps = Vec::new();
    let mut intervals = Vec::new();
    for (i, sm) in maps.submaps().iter().enumerate() {
        let tau1 = maps
            .submaps()
            .get(i + 1)
            .map(|next| next.tau())
            .unwrap_or_else(|| maps.active().tau());
        let file = write_map(dir, &format!("submap_{i:03}"), sm)?;
        files.push(file.clone());
        intervals.push((to64(sm.tau()), to64(tau1)));
        submaps.push(MapEntry {
            tau0: to64(sm.tau()),
            tau1: to64(tau1),
            file,
        });
    }
    let active_file = write_map(dir, "active", maps.active())?;
    files.push(active_file.clone());
    intervals.push((to64(maps.active().tau()), to64(t)));
    let active = MapEntry {
        tau0: to64(maps.active().tau()),
        tau1: to64(t),
        file: active_file,
    };

    let mut vel_entries = Vec::new();
    for (i, u) in velocity.iter().enumerate() {
        let planes = jet_planes(u.psi());
        let refs: Vec<&[f64]> = planes.iter().map(|p| p.as_slice()).collect();
        let file = format!("velocity_{i:02}.f64");
        write_f64_planes(&dir.join(&file), &refs)?;
        files.push(file.clone());
        vel_entries.push(VelocityEntry {
            t: to64(u.t()),
            eps: to64(u.eps()),
            file,
        });
    }

    let manifest = StackManifest {
        format: "cm2d-stack-v1".into(),
        t: to64(t),
        length: to64(grid.length()),
        n_map: grid.n(),
        remap_count: maps.remap_count(),
        remap_times: remap_times.iter().map(|&v| to64(v)).collect(),
        baseline: baseline.map(|(e, u)| (to64(e), to64(u))),
        ic,
        intervals,
        submaps,
        active,
        velocity: vel_entries,
    };
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(dir.join(STACK_MANIFEST))?),
        &manifest,
    )?;
    files.push(STACK_MANIFEST.into());
    Ok(files)
}

/// Everything a saved stack directory holds, rebuilt in memory.
pub struct LoadedStack<T: Scalar> {
    pub maps: MapStack<T>,
    pub velocity: Vec<VelocityField<T>>,
    pub t: T,
    pub remap_times: Vec<T>,
    pub baseline: Option<(T, T)>,
    pub ic: IcSpec,
}

impl<T: Scalar> LoadedStack<T> {
    /// Converts into the driver's resume form.
    pub fn into_resume_state(self) -> ResumeState<T> {
        ResumeState {
            maps: self.maps,
            velocity: self.velocity,
            t: self.t,
            remap_times: self.remap_times,
            baseline: self.baseline,
        }
    }
}

/// Loads a stack directory written by [`save_stack`].
pub fn load_stack<T: Scalar>(dir: &Path) -> Result<LoadedStack<T>> {
    let manifest_path = dir.join(STACK_MANIFEST);
    let manifest: StackManifest = serde_json::from_reader(File::open(&manifest_path)?)?;
    if manifest.format != "cm2d-stack-v1" {
        return Err(CmError::Artifact(format!(
            "unrecognized stack format `{}`",
            manifest.format
        )));
    }
    let n = manifest.n_map;
    let length = T::lit(manifest.length);
    let mut submaps = Vec::with_capacity(manifest.submaps.len());
    for entry in &manifest.submaps {
        submaps.push(read_map(dir, entry, n, length)?);
    }
    let active = read_map(dir, &manifest.active, n, length)?;
    let maps = MapStack::from_parts(submaps, active, manifest.remap_count)?;

    let mut velocity = Vec::with_capacity(manifest.velocity.len());
    for entry in &manifest.velocity {
        // Stream-function jets live on their own (usually finer) grid;
        // infer its size from the payload.
        let bytes = fs::metadata(dir.join(&entry.file))?.len() as usize;
        let count = bytes / 8 / 4;
        let side = count.isqrt();
        if side * side != count || bytes % 32 != 0 {
            return Err(CmError::Artifact(format!(
                "velocity dump {} is not four square planes",
                entry.file
            )));
        }
        let raw = read_f64_exact(&dir.join(&entry.file), 4 * side * side)?;
        let psi = field_from_planes(&raw, side, length)?;
        velocity.push(VelocityField::new(psi, T::lit(entry.t), T::lit(entry.eps)));
    }

    Ok(LoadedStack {
        maps,
        velocity,
        t: T::lit(manifest.t),
        remap_times: manifest.remap_times.iter().map(|&v| T::lit(v)).collect(),
        baseline: manifest.baseline.map(|(e, u)| (T::lit(e), T::lit(u))),
        ic: manifest.ic,
    })
}

/// Shortest-round-trip decimal text for a float (what `{:?}` prints).
fn fmt_f64<T: Scalar>(v: T) -> String {
    format!("{:?}", v.to_f64().unwrap_or(f64::NAN))
}

/// CSV header for diagnostics rows.
pub const DIAGNOSTICS_HEADER: &str =
    "t,enstrophy,energy,enstrophy_error,energy_error,det_error,remap_count";

/// One diagnostics CSV row (no newline).
pub fn diagnostics_row<T: Scalar>(r: &DiagnosticsRecord<T>) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        fmt_f64(r.t),
        fmt_f64(r.enstrophy),
        fmt_f64(r.energy),
        fmt_f64(r.enstrophy_error),
        fmt_f64(r.energy_error),
        fmt_f64(r.det_error),
        r.remap_count
    )
}

/// Writes a complete diagnostics CSV.
pub fn write_diagnostics_csv<T: Scalar>(
    path: &Path,
    records: &[DiagnosticsRecord<T>],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        writeln!(w, "{}", diagnostics_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a spectrum as `K,E` rows.
pub fn write_spectrum_csv<T: Scalar>(path: &Path, spectrum: &Spectrum<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "K,E")?;
    for (k, &e) in spectrum.shells().iter().enumerate() {
        writeln!(w, "{k},{}", fmt_f64(e))?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar of a rendered image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderMeta {
    /// `[x0, y0, x1, y1]` of the rendered window.
    pub window: [f64; 4],
    /// Simulation time of the rendered state.
    pub t: f64,
    /// Pixels per axis.
    pub n_px: usize,
    /// Smallest rendered value (maps to pixel 0).
    pub min: f64,
    /// Largest rendered value (maps to pixel 65535).
    pub max: f64,
}

/// Writes a binary 16-bit PGM (P5, maxval 65535, big-endian samples) plus a
/// `.json` sidecar. Values map affinely from `[min, max]` onto the pixel
/// range; a constant raster (zero range) maps to all-0. Row 0 is the
/// smallest `y`, matching the field dump convention.
pub fn write_pgm<T: Scalar>(base: &Path, values: &[T], n_px: usize, meta: &RenderMeta) -> Result<()> {
    if values.len() != n_px * n_px {
        return Err(CmError::Artifact(format!(
            "raster of {} values does not fill {n_px}²",
            values.len()
        )));
    }
    let mut w = BufWriter::new(File::create(base.with_extension("pgm"))?);
    write!(w, "P5\n{n_px} {n_px}\n65535\n")?;
    let span = meta.max - meta.min;
    for v in values {
        let v = v.to_f64().unwrap_or(f64::NAN);
        let pixel = if span > 0.0 {
            (((v - meta.min) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        w.write_all(&pixel.to_be_bytes())?;
    }
    w.flush()?;
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(base.with_extension("json"))?),
        meta,
    )?;
    Ok(())
}

/// Run manifest: the full provenance of one `run` invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a, T: Scalar + Serialize> {
    pub format: &'static str,
    pub config: &'a SimConfig<T>,
    pub config_text: &'a str,
    pub code_version: &'static str,
    pub wall_seconds: f64,
    pub remap_times: Vec<f64>,
    /// Every file this run wrote, in creation order (position = index).
    pub outputs: Vec<String>,
}

/// Streams run outputs into a directory: diagnostics CSV rows as they are
/// recorded, optional vorticity snapshots, the final stack, the manifest.
pub struct RunWriter<T: Scalar> {
    dir: PathBuf,
    csv: BufWriter<File>,
    outputs: Vec<String>,
    snapshot_fields: bool,
    started: Instant,
    config_text: String,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar + Serialize> RunWriter<T> {
    /// Creates the output directory and opens the diagnostics CSV.
    pub fn create(cfg: &SimConfig<T>, config_text: &str) -> Result<Self> {
        fs::create_dir_all(&cfg.out_dir)?;
        let mut csv = BufWriter::new(File::create(cfg.out_dir.join("diagnostics.csv"))?);
        writeln!(csv, "{DIAGNOSTICS_HEADER}")?;
        Ok(Self {
            dir: cfg.out_dir.clone(),
            csv,
            outputs: vec!["diagnostics.csv".into()],
            snapshot_fields: cfg.snapshot_fields,
            started: Instant::now(),
            config_text: config_text.to_owned(),
            _marker: std::marker::PhantomData,
        })
    }

    /// Appends one scheduled diagnostics row (and a field snapshot when
    /// configured).
    pub fn on_record(&mut self, sim: &Simulation<T>, rec: &DiagnosticsRecord<T>) -> Result<()> {
        writeln!(self.csv, "{}", diagnostics_row(rec))?;
        self.csv.flush()?;
        if self.snapshot_fields {
            let cfg = sim.config();
            let vals = pullback_values(sim.maps(), sim.initial(), cfg.n_eval)?;
            let stem = format!("vorticity_{:04}", sim.records().len().saturating_sub(1));
            let meta = FieldMeta {
                n: cfg.n_eval,
                length: cfg.length.to_f64().unwrap_or(f64::NAN),
                t: rec.t.to_f64().unwrap_or(f64::NAN),
                quantity: "vorticity".into(),
            };
            write_scalar_dump(&self.dir.join(&stem), &vals, &meta)?;
            self.outputs.push(format!("{stem}.f64"));
            self.outputs.push(format!("{stem}.json"));
        }
        Ok(())
    }

    /// Saves the stack (when configured) and writes the manifest.
    pub fn finish(mut self, sim: &Simulation<T>) -> Result<()> {
        let cfg = sim.config();
        if cfg.save_stack {
            let files = save_stack(
                &self.dir.join("stack"),
                sim.maps(),
                sim.velocity(),
                sim.time(),
                sim.baseline(),
                sim.remap_times(),
                IcSpec::of_config(cfg),
            )?;
            self.outputs
                .extend(files.into_iter().map(|f| format!("stack/{f}")));
        }
        let manifest = RunManifest {
            format: "cm2d-run-v1",
            config: cfg,
            config_text: &self.config_text,
            code_version: env!("CARGO_PKG_VERSION"),
            wall_seconds: self.started.elapsed().as_secs_f64(),
            remap_times: sim
                .remap_times()
                .iter()
                .map(|&v| v.to_f64().unwrap_or(f64::NAN))
                .collect(),
            outputs: {
                let mut o = self.outputs.clone();
                o.push("manifest.json".into());
                o
            },
        };
        serde_json::to_writer_pretty(
            BufWriter::new(File::create(self.dir.join("manifest.json"))?),
            &manifest,
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn scalar_dump_round_trips_bitwise() {
        let dir = tempdir().unwrap();
        let base = dir.path().join("field");
        let values: Vec<f64> = (0..16).map(|k| (k as f64).sin() * 1e-3 + 0.1).collect();
        let meta = FieldMeta {
            n: 4,
            length: 1.0,
            t: 0.5,
            quantity: "vorticity".into(),
        };
        write_scalar_dump(&base, &values, &meta).unwrap();
        let (back, meta2) = read_scalar_dump(&base).unwrap();
        assert_eq!(values, back);
        assert_eq!(meta2.n, 4);
        assert_eq!(meta2.quantity, "vorticity");
        assert_eq!(meta2.t, 0.5);
    }

    #[test]
    fn wrong_payload_size_is_a_descriptive_error() {
        let dir = tempdir().unwrap();
        let base = dir.path().join("field");
        let meta = FieldMeta {
            n: 4,
            length: 1.0,
            t: 0.0,
            quantity: "vorticity".into(),
        };
        write_scalar_dump(&base, &vec![0.0f64; 16], &meta).unwrap();
        fs::write(base.with_extension("f64"), [0u8; 24]).unwrap();
        let err = read_scalar_dump(&base).unwrap_err().to_string();
        assert!(err.contains("expected"), "got: {err}");
    }

    #[test]
    fn pgm_affine_map_matches_the_two_by_two_example() {
        let dir = tempdir().unwrap();
        let base = dir.path().join("img");
        let meta = RenderMeta {
            window: [0.0, 0.0, 1.0, 1.0],
            t: 0.0,
            n_px: 2,
            min: 0.0,
            max: 3.0,
        };
        write_pgm(&base, &[0.0f64, 1.0, 2.0, 3.0], 2, &meta).unwrap();
        let bytes = fs::read(base.with_extension("pgm")).unwrap();
        let header = b"P5\n2 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let px: Vec<u16> = bytes[header.len()..]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(px, vec![0, 21845, 43690, 65535]);
    }

    #[test]
    fn constant_raster_renders_all_zero() {
        let dir = tempdir().unwrap();
        let base = dir.path().join("img");
        let meta = RenderMeta {
            window: [0.0, 0.0, 1.0, 1.0],
            t: 0.0,
            n_px: 2,
            min: 7.0,
            max: 7.0,
        };
        write_pgm(&base, &[7.0f64; 4], 2, &meta).unwrap();
        let bytes = fs::read(base.with_extension("pgm")).unwrap();
        assert!(bytes[b"P5\n2 2\n65535\n".len()..].iter().all(|&b| b == 0));
    }

    #[test]
    fn stack_save_load_round_trips_bitwise() {
        use crate::config::SimConfig;
        use crate::sim::Simulation;

        let cfg = SimConfig::<f64>::parse(
            "t_end = 0.25\ndt = 1/8\nn_map = 8\nn_sample = 16\nn_psi = 16\nn_eval = 16\ndelta_det = 1e-6\n",
        )
        .unwrap();
        let mut sim = Simulation::new(cfg.clone()).unwrap();
        sim.run().unwrap();

        let dir = tempdir().unwrap();
        save_stack(
            dir.path(),
            sim.maps(),
            sim.velocity(),
            0.25,
            sim.baseline(),
            sim.remap_times(),
            IcSpec::of_config(&cfg),
        )
        .unwrap();
        let loaded: LoadedStack<f64> = load_stack(dir.path()).unwrap();

        assert_eq!(loaded.t, 0.25);
        assert_eq!(loaded.maps.remap_count(), sim.maps().remap_count());
        assert_eq!(loaded.maps.submaps().len(), sim.maps().submaps().len());
        assert_eq!(loaded.velocity.len(), sim.velocity().len());
        assert_eq!(loaded.baseline, sim.baseline());
        // Bit-exact jets everywhere.
        assert_eq!(
            loaded.maps.active().d1().jets(),
            sim.maps().active().d1().jets()
        );
        for (a, b) in loaded.maps.submaps().iter().zip(sim.maps().submaps()) {
            assert_eq!(a.d1().jets(), b.d1().jets());
            assert_eq!(a.d2().jets(), b.d2().jets());
            assert_eq!(a.tau(), b.tau());
        }
        for (a, b) in loaded.velocity.iter().zip(sim.velocity().iter()) {
            assert_eq!(a.psi().jets(), b.psi().jets());
            assert_eq!(a.t(), b.t());
            assert_eq!(a.eps(), b.eps());
        }
        assert_eq!(loaded.ic.id, "four_modes");
    }

    #[test]
    fn diagnostics_csv_has_the_pinned_header_and_roundtrip_floats() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("diag.csv");
        let rec = DiagnosticsRecord {
            t: 0.1,
            enstrophy: 47.37319682735475,
            energy: 19.73920880217872,
            enstrophy_error: -1.25e-7,
            energy_error: 3.5e-9,
            det_error: 0.25,
            remap_count: 2,
        };
        write_diagnostics_csv(&path, &[rec]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,enstrophy,energy,enstrophy_error,energy_error,det_error,remap_count"
        );
        let row = lines.next().unwrap();
        assert_eq!(
            row,
            "0.1,47.37319682735475,19.73920880217872,-1.25e-7,3.5e-9,0.25,2"
        );
        let parsed: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 47.37319682735475);
    }
}
