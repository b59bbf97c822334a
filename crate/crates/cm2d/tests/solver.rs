//! End-to-end solver behavior: deterministic artifacts, exact restart, and
//! output-set completeness.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use cm2d::{
    diagnostics_row, load_stack, IcSpec, LoadedStack, RunWriter, SimConfig, Simulation,
};
use tempfile::tempdir;

/// Short coarse run whose determinant drift crosses the remap threshold
/// twice by `t = 0.25` and four times by `t = 0.5`.
fn base_config(t_end: &str, out_dir: &Path) -> SimConfig<f64> {
    let text = format!(
        "\
n_map = 32
n_sample = 64
n_psi = 64
n_eval = 64
dt = 1/16
t_end = {t_end}
delta_det = 5e-5
output_interval = 1/16
out_dir = {}
",
        out_dir.display()
    );
    SimConfig::parse(&text).unwrap()
}

fn run_to_dir(cfg: &SimConfig<f64>) -> Simulation<f64> {
    let mut sim = Simulation::new(cfg.clone()).unwrap();
    let mut writer = RunWriter::create(cfg, "integration test").unwrap();
    sim.run_with(|s, r| writer.on_record(s, r)).unwrap();
    writer.finish(&sim).unwrap();
    sim
}

fn relative_files(root: &Path) -> BTreeSet<String> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeSet<String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel: PathBuf = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn identical_configs_produce_identical_artifacts() {
    let scratch = tempdir().unwrap();
    let dir_a = scratch.path().join("a");
    let dir_b = scratch.path().join("b");
    run_to_dir(&base_config("0.25", &dir_a));
    run_to_dir(&base_config("0.25", &dir_b));

    // Every payload byte must match; only the run manifest may differ (it
    // records wall-clock time and the output directory).
    let files_a = relative_files(&dir_a);
    assert_eq!(files_a, relative_files(&dir_b));
    for rel in &files_a {
        if rel == "manifest.json" {
            continue;
        }
        let a = fs::read(dir_a.join(rel)).unwrap();
        let b = fs::read(dir_b.join(rel)).unwrap();
        assert_eq!(a, b, "artifact {rel} differs between identical runs");
    }

    let csv = fs::read_to_string(dir_a.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with(
        "t,enstrophy,energy,enstrophy_error,energy_error,det_error,remap_count\n"
    ));
    // 0, 1/16, ..., 1/4 inclusive.
    assert_eq!(csv.lines().count(), 1 + 5);
}

#[test]
fn interrupted_run_resumes_bit_exactly() {
    let scratch = tempdir().unwrap();

    // Reference: one uninterrupted run to t = 0.5.
    let cfg_full = base_config("0.5", &scratch.path().join("full"));
    let mut full = Simulation::new(cfg_full.clone()).unwrap();
    full.run().unwrap();

    // Interrupted: run to t = 0.25, save the stack, reload, and continue
    // under the extended end time.
    let cfg_half = base_config("0.25", &scratch.path().join("half"));
    let mut half = Simulation::new(cfg_half.clone()).unwrap();
    half.run().unwrap();
    let stack_dir = scratch.path().join("stack");
    cm2d::save_stack(
        &stack_dir,
        half.maps(),
        half.velocity(),
        half.time(),
        half.baseline(),
        half.remap_times(),
        IcSpec::of_config(&cfg_half),
    )
    .unwrap();

    let loaded: LoadedStack<f64> = load_stack(&stack_dir).unwrap();
    let ic = loaded.ic.build::<f64>().unwrap();
    assert_eq!(ic.id(), "four_modes");
    let mut resumed = Simulation::resume(cfg_full.clone(), loaded.into_resume_state()).unwrap();
    resumed.run().unwrap();

    // The resumed run re-records the row at the resume time, then every
    // later row; all must agree with the uninterrupted run to the bit.
    let t_resume = 0.25;
    let tail: Vec<_> = full
        .records()
        .iter()
        .filter(|r| r.t >= t_resume)
        .collect();
    assert_eq!(tail.len(), resumed.records().len());
    assert!(resumed.records().len() >= 4, "expected several overlapping rows");
    for (a, b) in tail.iter().zip(resumed.records()) {
        assert_eq!(
            diagnostics_row(*a),
            diagnostics_row(b),
            "diagnostics diverged at t = {}",
            b.t
        );
    }

    // Remap bookkeeping and the final composed state must match exactly.
    assert_eq!(full.remap_times(), resumed.remap_times());
    assert_eq!(
        full.maps().remap_count(),
        resumed.maps().remap_count()
    );
    assert_eq!(
        full.maps().active().d1().jets(),
        resumed.maps().active().d1().jets()
    );
    assert_eq!(
        full.maps().active().d2().jets(),
        resumed.maps().active().d2().jets()
    );
    for (a, b) in full.maps().submaps().iter().zip(resumed.maps().submaps()) {
        assert_eq!(a.tau(), b.tau());
        assert_eq!(a.d1().jets(), b.d1().jets());
        assert_eq!(a.d2().jets(), b.d2().jets());
    }
    let (ua, ub) = (
        full.velocity().latest().unwrap(),
        resumed.velocity().latest().unwrap(),
    );
    assert_eq!(ua.t(), ub.t());
    assert_eq!(ua.psi().jets(), ub.psi().jets());
}

#[test]
fn manifest_lists_exactly_the_files_written() {
    let scratch = tempdir().unwrap();
    let out = scratch.path().join("run");
    let mut cfg = base_config("0.125", &out);
    cfg.snapshot_fields = true;
    run_to_dir(&cfg);

    let manifest: serde_json::Value =
        serde_json::from_reader(fs::File::open(out.join("manifest.json")).unwrap()).unwrap();
    let listed: BTreeSet<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_owned())
        .collect();
    let present = relative_files(&out);
    assert_eq!(listed, present, "manifest outputs must equal the directory contents");

    // Snapshots were requested: one pair per diagnostics row.
    let rows = fs::read_to_string(out.join("diagnostics.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    let snaps = present
        .iter()
        .filter(|f| f.starts_with("vorticity_") && f.ends_with(".f64"))
        .count();
    assert_eq!(snaps, rows);

    // The saved stack reloads and reports the run's end state.
    let stack: LoadedStack<f64> = load_stack(&out.join("stack")).unwrap();
    assert_eq!(stack.t, 0.125);
    assert!(!stack.velocity.is_empty());
    assert_eq!(manifest["config"]["n_map"], 32);
    assert_eq!(manifest["config_text"].as_str().unwrap(), "integration test");
    assert!(manifest["wall_seconds"].as_f64().unwrap() >= 0.0);
}
