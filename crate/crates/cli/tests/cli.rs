use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nlfp(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlfp"))
        .args(args)
        .env("NLFP_OUTPUT_ROOT", root)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn emit(name: &str) -> String {
    let out = nlfp(Path::new("."), &["preset", name, "--emit-config"]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn equilibrium_fv_run_is_stationary() {
    let tmp = tempfile::tempdir().unwrap();
    let text = emit("equilibrium")
        .replace("mode = \"both\"", "mode = \"fv\"")
        .replace("directory = \"equilibrium\"", "directory = \"eq\"");
    let cfg = write_config(tmp.path(), "eq.toml", &text);
    let out = nlfp(tmp.path(), &["run", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let dir = tmp.path().join("eq");
    let diag = fs::read_to_string(dir.join("diagnostics_fv.csv")).unwrap();
    assert!(diag.starts_with("t,mass,free_energy,dissipation_rate,min_density,sup_xi\n"));
    let energy = column(&diag, "free_energy");
    assert!(energy.iter().all(|f| (f - energy[0]).abs() <= 1e-10));
    assert!(column(&diag, "dissipation_rate")
        .iter()
        .all(|d| d.abs() <= 1e-10));
    let m = manifest(&dir);
    for f in m["files"].as_array().unwrap() {
        assert!(dir.join(f.as_str().unwrap()).exists(), "{f}");
    }
    assert!(m["checks"]
        .as_object()
        .unwrap()
        .values()
        .all(|v| v.as_bool().unwrap()));
}

#[test]
fn benchmark_both_modes_reports_discrepancy_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let base = emit("generic_benchmark").replace("n_cells = 64", "n_cells = 16");
    let base = base
        .lines()
        .filter(|l| !l.starts_with("dt = "))
        .collect::<Vec<_>>()
        .join("\n");
    let mut payloads = Vec::new();
    for run in ["a", "b"] {
        let text = base.replace(
            "directory = \"generic_benchmark\"",
            &format!("directory = \"{run}\""),
        );
        let cfg = write_config(tmp.path(), &format!("{run}.toml"), &text);
        let out = nlfp(tmp.path(), &["run", &cfg]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stdout)
        );
        let dir = tmp.path().join(run);
        let m = manifest(&dir);
        assert!(m["metrics"]["cross_solver_discrepancy"].as_f64().unwrap() < 1e-3);
        let mut files: Vec<(String, Vec<u8>)> = m["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f.as_str().unwrap().to_string())
            .filter(|f| f != "manifest.json")
            .map(|f| {
                let bytes = fs::read(dir.join(&f)).unwrap();
                (f, bytes)
            })
            .collect();
        files.sort();
        payloads.push(files);
    }
    assert_eq!(payloads[0].len(), 6);
    assert_eq!(payloads[0], payloads[1]);
}

#[test]
fn divergence_is_recorded_with_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let text = emit("generic_benchmark")
        .replace("mode = \"both\"", "mode = \"fixed_point\"")
        .replace("t_final = 0.05", "t_final = 2.0")
        .replace("dt = 0.0000390625", "dt = 0.001")
        .replace("amplitude = 0.1", "amplitude = 0.9")
        .replace("m_cap = 100.0", "m_cap = 1.0");
    let cfg = write_config(tmp.path(), "div.toml", &text);
    let out = nlfp(tmp.path(), &["run", &cfg]);
    assert!(!out.status.success());
    let m = manifest(&tmp.path().join("generic_benchmark"));
    assert_eq!(m["checks"]["fixed_point_converged"], false);
    let err = m["errors"][0].as_str().unwrap();
    assert!(err.contains("reduce the horizon"), "{err}");
}

#[test]
fn config_errors_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = emit("equilibrium").replace("theta = 1.0", "theta = 1.5");
    let cfg = write_config(tmp.path(), "bad.toml", &bad);
    let out = nlfp(tmp.path(), &["run", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.theta"));
    let typo = emit("equilibrium").replace("theta = 1.0", "thetaa = 1.0");
    let cfg = write_config(tmp.path(), "typo.toml", &typo);
    let out = nlfp(tmp.path(), &["run", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("thetaa"));
    let out = nlfp(tmp.path(), &["preset", "nope", "--emit-config"]);
    assert!(!out.status.success());
}

#[test]
fn lemma_and_convergence_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let text = emit("generic_benchmark")
        .replace("n_cells = 64", "n_cells = 16")
        .replace("lemma_decay_trials = 150", "lemma_decay_trials = 9")
        .replace("lemma_product_trials = 50", "lemma_product_trials = 3");
    let text = text
        .lines()
        .filter(|l| !l.starts_with("dt = "))
        .collect::<Vec<_>>()
        .join("\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = nlfp(tmp.path(), &["verify-lemmas", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let dir = tmp.path().join("generic_benchmark");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("lemma_report.json")).unwrap()).unwrap();
    assert_eq!(report["decay_failures"], 0);
    nlfp(tmp.path(), &["convergence", &cfg, "--levels", "2"]);
    let csv = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    assert!(csv.starts_with("n_cells,dt,discrepancy,order\n"));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(manifest(&dir)["checks"]["convergence_monotone"], true);
}
