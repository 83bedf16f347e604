use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fhnlif(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhnlif"))
        .arg("--out")
        .arg(root)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_dir(out: &Output) -> PathBuf {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    PathBuf::from(String::from_utf8(out.stdout.clone()).unwrap().trim())
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixed_point_reports_rest_state() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(&fhnlif(tmp.path(), &["fixed-point"]));
    let v = json(&dir.join("fixed_point.json"));
    let get = |k: &str| v[k].as_f64().unwrap();
    assert!((get("v_e") + 1.00125).abs() < 1e-5);
    assert!((get("w_e") + 0.401665).abs() < 1e-6);
    assert!((get("mu") - 0.0312496).abs() < 1e-7);
    assert!((get("nu") - 0.281378).abs() < 1e-6);
    let m = json(&dir.join("manifest.json"));
    assert_eq!(m["command"], "fixed-point");
    assert_eq!(m["seed"], 2024);
    assert!(m["versions"]["fhn-lif"].is_string());
}

#[test]
fn numbers_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(&fhnlif(tmp.path(), &["fixed-point"]));
    let text = fs::read_to_string(dir.join("fixed_point.json")).unwrap();
    let line = text.lines().find(|l| l.contains("\"v_e\"")).unwrap();
    let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = num.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{num}");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--quick", "--seed", "11", "firing-prob"];
    let da = run_dir(&fhnlif(a.path(), &args));
    let db = run_dir(&fhnlif(b.path(), &args));
    assert_eq!(da.file_name(), db.file_name());
    for f in ["firing_prob.csv", "manifest.json", "config.ini"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(da.join("firing_prob.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("sigma0,i,l_i,p_hat,se"));
    assert_eq!(csv.lines().count(), 36);
}

#[test]
fn simulate_is_reproducible_and_spikes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let da = run_dir(&fhnlif(a.path(), &["simulate"]));
    let db = run_dir(&fhnlif(b.path(), &["simulate"]));
    assert_eq!(fs::read(da.join("trajectory.csv")).unwrap(), fs::read(db.join("trajectory.csv")).unwrap());
    let ev = json(&da.join("events.json"));
    assert!(ev["n_spikes"].as_u64().unwrap() >= 1);
}

#[test]
fn different_seeds_get_different_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_dir(&fhnlif(tmp.path(), &["--seed", "1", "fixed-point"]));
    let b = run_dir(&fhnlif(tmp.path(), &["--seed", "2", "fixed-point"]));
    assert_ne!(a, b);
}

#[test]
fn config_file_and_manifest_regenerate_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.ini");
    fs::write(&cfg, "[model]\nsigma0 = 0.005\n[run]\nseed = 7\nquick = true\n").unwrap();
    let first = run_dir(&fhnlif(tmp.path(), &["--config", cfg.to_str().unwrap(), "fit-sigmoid"]));
    let fit = json(&first.join("fit.json"));
    assert_eq!(fit["sigma0"].as_f64(), Some(0.005));
    assert!((fit["a"].as_f64().unwrap() - 0.050142).abs() < 0.005);
    // The echoed config alone reproduces the directory and its contents.
    let echoed = first.join("config.ini");
    let other = tempfile::tempdir().unwrap();
    let second = run_dir(&fhnlif(other.path(), &["--config", echoed.to_str().unwrap(), "fit-sigmoid"]));
    assert_eq!(first.file_name(), second.file_name());
    assert_eq!(fs::read(first.join("fit.json")).unwrap(), fs::read(second.join("fit.json")).unwrap());
}

#[test]
fn fit_sigmoid_reads_a_firing_table() {
    let tmp = tempfile::tempdir().unwrap();
    let fp = run_dir(&fhnlif(tmp.path(), &["--quick", "firing-prob"]));
    let csv = fp.join("firing_prob.csv");
    let fit = run_dir(&fhnlif(tmp.path(), &["--quick", "fit-sigmoid", "--input", csv.to_str().unwrap()]));
    let direct = run_dir(&fhnlif(tmp.path(), &["--quick", "fit-sigmoid"]));
    let (a, b) = (json(&fit.join("fit.json")), json(&direct.join("fit.json")));
    for k in ["a", "b", "a_star", "b_star"] {
        let (x, y) = (a[k].as_f64().unwrap(), b[k].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-12 * y.abs(), "{k}: {x} vs {y}");
    }
}

#[test]
fn table1_single_column() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(&fhnlif(tmp.path(), &["--quick", "--sigma0", "0.01", "table1"]));
    let v = json(&dir.join("table1.json"));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["a"].as_f64().unwrap() - 0.048559).abs() < 0.005);
    assert!((rows[0]["b"].as_f64().unwrap() - 0.011068).abs() < 0.003);
}

#[test]
fn remaining_commands_emit_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let lif = run_dir(&fhnlif(tmp.path(), &["lif"]));
    let head = fs::read_to_string(lif.join("lif_paths.csv")).unwrap();
    assert!(head.starts_with("t,norm_y,radial_ou,polar_radial\n"));
    assert!(json(&lif.join("lif_models.json"))["summary"]["sigma_eff"].is_number());

    let psd = run_dir(&fhnlif(tmp.path(), &["--quick", "psd"]));
    assert!(fs::read_to_string(psd.join("psd_norm_y.csv")).unwrap().starts_with("freq,power\n"));
    assert_eq!(json(&psd.join("psd.json"))["radial"].as_array().unwrap().len(), 3);

    let ver = run_dir(&fhnlif(tmp.path(), &["--quick", "verify", "attractor"]));
    let v = json(&ver.join("verify.json"));
    for k in ["cocycle_dev", "R_star", "birkhoff_avg", "tempered_est"] {
        assert!(v[k].is_number(), "{k}");
    }
    assert_eq!(v["pullback"].as_array().unwrap().len(), 3);

    let cfg = tmp.path().join("lin.ini");
    fs::write(&cfg, "[linearize]\ntrials = 20\nhorizon = 50\n").unwrap();
    let lin = run_dir(&fhnlif(tmp.path(), &["--config", cfg.to_str().unwrap(), "linearize"]));
    let runs = json(&lin.join("linearize.json"))["runs"].as_array().unwrap().clone();
    assert_eq!(runs.len(), 3);
    for k in ["r", "n_trials", "error_stat", "gamma_r", "ratio", "flags"] {
        assert!(!runs[0][k].is_null(), "{k}");
    }
}

#[test]
fn isi_quick_writes_densities_and_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("isi.ini");
    fs::write(&cfg, "[isi]\nm = 200\nspikes = 200\npoints = 60\n[run]\nquick = true\n").unwrap();
    let dir = run_dir(&fhnlif(tmp.path(), &["--config", cfg.to_str().unwrap(), "isi"]));
    let d = fs::read_to_string(dir.join("isi_density.csv")).unwrap();
    assert_eq!(d.lines().next(), Some("t,g_t,se"));
    assert_eq!(d.lines().count(), 61);
    assert_eq!(fs::read_to_string(dir.join("isi_samples.csv")).unwrap().lines().next(), Some("isi,spike_time"));
    let v = json(&dir.join("isi.json"));
    let mass = v["mass_radial_ou"].as_f64().unwrap();
    assert!((0.85..=1.02).contains(&mass), "{mass}");
}

#[test]
fn failures_emit_error_json() {
    let tmp = tempfile::tempdir().unwrap();
    let check = |out: Output, kind: &str| {
        assert!(!out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(v["error"]["kind"], kind);
        assert!(v["error"]["message"].is_string());
    };
    check(fhnlif(tmp.path(), &["no-such-command"]), "usage");
    check(fhnlif(tmp.path(), &["--sigma0=-1", "fixed-point"]), "invalid_argument");
    let bad = tmp.path().join("bad.ini");
    fs::write(&bad, "[model]\nbogus = 1\n").unwrap();
    check(fhnlif(tmp.path(), &["--config", bad.to_str().unwrap(), "fixed-point"]), "invalid_config");
    let degenerate = tmp.path().join("flat.csv");
    fs::write(&degenerate, "sigma0,i,l_i,p_hat,se\n0.01,0,0.0,0.0,0.0\n0.01,1,0.1,0.0,0.0\n").unwrap();
    check(
        fhnlif(tmp.path(), &["fit-sigmoid", "--input", degenerate.to_str().unwrap()]),
        "fit_failure",
    );
}
