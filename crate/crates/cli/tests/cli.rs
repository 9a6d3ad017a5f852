use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/line").join(name)
}

fn distfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distfit")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let o = distfit(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn fit_writes_report_and_verifiable_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fit");
    let cfg = fixture("fit.toml");
    run_ok(&["fit", "--config", cfg.to_str().unwrap(), "--set", "bootstrap.b=200", "--out", out.to_str().unwrap()]);

    let report = fs::read_to_string(out.join("fit_report.txt")).unwrap();
    for key in ["beta1", "AIC", "wald_lower", "bootstrap percentile"] {
        assert!(report.contains(key), "report lacks {key}:\n{report}");
    }
    let fit = json(&out.join("fit.json"));
    assert_eq!(fit["fit"]["n"], 132);
    assert!(out.join("detection_curve.csv").exists());
    assert!(!out.join("error_density.csv").exists());

    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "fit");
    assert_eq!(manifest["seed"], 5);
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 3);
    for a in artifacts {
        let bytes = fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(a["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
}

#[test]
fn reruns_are_byte_identical_and_seed_flag_applies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture("fit.toml");
    let cfg = cfg.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    run_ok(&["fit", "--config", cfg, "--set", "bootstrap.b=300", "--out", a.to_str().unwrap()]);
    run_ok(&["fit", "--config", cfg, "--set", "bootstrap.b=300", "--out", b.to_str().unwrap()]);
    assert_eq!(files(&a), files(&b));

    run_ok(&["fit", "--config", cfg, "--set", "bootstrap.b=300", "--seed", "99", "--out", c.to_str().unwrap()]);
    let m = json(&c.join("manifest.json"));
    assert_eq!(m["seed"], 99);
    assert_ne!(m["config_sha256"], json(&a.join("manifest.json"))["config_sha256"]);
    let ra = json(&a.join("fit.json"));
    let rc = json(&c.join("fit.json"));
    assert_eq!(ra["fit"]["estimates"], rc["fit"]["estimates"]);
    assert_ne!(ra["bootstrap"], rc["bootstrap"]);
}

#[test]
fn config_hash_does_not_depend_on_config_location() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let direct = fixture("fit.toml");
    let indirect = fixture("../line/fit.toml");
    run_ok(&["fit", "--config", direct.to_str().unwrap(), "--set", "bootstrap.b=0", "--out", a.to_str().unwrap()]);
    run_ok(&["fit", "--config", indirect.to_str().unwrap(), "--set", "bootstrap.b=0", "--out", b.to_str().unwrap()]);
    assert_eq!(files(&a), files(&b));
}

#[test]
fn predict_and_abundance_reuse_a_saved_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture("fit.toml");
    let cfg = cfg.to_str().unwrap();
    let fit_dir = tmp.path().join("fit");
    run_ok(&["fit", "--config", cfg, "--set", "bootstrap.b=200", "--out", fit_dir.to_str().unwrap()]);
    let saved = fit_dir.join("fit.json");
    let saved = saved.to_str().unwrap();

    let pred = tmp.path().join("pred");
    let set_fit = format!("predict.fit=\"{saved}\"");
    let set_grid = "predict.grid={xllcorner=0.0, yllcorner=0.0, cellsize=0.05, nrows=20, ncols=20}";
    run_ok(&["predict", "--config", cfg, "--set", &set_fit, "--set", set_grid, "--out", pred.to_str().unwrap()]);
    let asc = fs::read_to_string(pred.join("intensity.asc")).unwrap();
    assert!(asc.to_ascii_lowercase().starts_with("ncols"));
    let values: Vec<f64> = asc.lines().skip(6).flat_map(|l| l.split_whitespace().map(|v| v.parse().unwrap())).collect();
    assert_eq!(values.len(), 400);
    assert!(values.iter().all(|v| *v > 0.0));
    assert!(!pred.join("fit.json").exists());

    let ab = tmp.path().join("ab");
    let set_fit = format!("abundance.fit=\"{saved}\"");
    run_ok(&["abundance", "--config", cfg, "--set", &set_fit, "--set", "abundance.region_q=40000", "--out", ab.to_str().unwrap()]);
    let a = json(&ab.join("abundance.json"));
    let est = a["estimate"].as_f64().unwrap();
    let (lo, hi) = (a["lower"].as_f64().unwrap(), a["upper"].as_f64().unwrap());
    let truth: f64 = json(&fixture("truth.json"))["individuals"].as_f64().unwrap();
    assert!(lo < est && est < hi, "{a}");
    assert!(lo < truth && truth < hi, "truth {truth} outside ({lo}, {hi})");
    assert!(fs::read_to_string(ab.join("abundance.txt")).unwrap().contains("bootstrap 95% interval"));
}

#[test]
fn simulate_then_fit_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let cfg = fixture("simulate.toml");
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", sim.to_str().unwrap()]);
    for f in ["observations.csv", "transects.csv", "region.csv", "x.asc", "truth.json", "manifest.json"] {
        assert!(sim.join(f).exists(), "{f} missing");
    }
    assert_eq!(fs::read(sim.join("observations.csv")).unwrap(), fs::read(fixture("observations.csv")).unwrap());

    let fit_cfg = write(
        &sim,
        "fit.toml",
        "[data]\nobservations = \"observations.csv\"\ntransects = \"transects.csv\"\nregion = \"region.csv\"\n\
         rasters = [\"x.asc\"]\n[model]\nvariant = \"exact\"\n[detection]\nw = 0.06\n[bootstrap]\nb = 0\n",
    );
    let out = tmp.path().join("fit");
    run_ok(&["fit", "--config", fit_cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let f = json(&out.join("fit.json"));
    let b1 = f["fit"]["params"][1]["ci"].as_array().unwrap();
    assert!(b1[0].as_f64().unwrap() < 1.0 && 1.0 < b1[1].as_f64().unwrap(), "{b1:?}");
}

#[test]
fn experiment_writes_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "exp.toml",
        "seed = 3\n[detection]\nw = 0.06\n[quadrature]\nregion_q = 10000\nlocus_q = 16\n\
         [simulation]\nreplicates = 2\nbeta0 = 8.0\n[simulation.field]\ncell_size = 0.01\n",
    );
    let out = tmp.path().join("exp");
    run_ok(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    for label in ["exact", "transect_center", "buffer_average", "locus"] {
        assert!(summary.contains(label), "{summary}");
    }
    let reps = fs::read_to_string(out.join("replicates.csv")).unwrap();
    assert_eq!(reps.lines().count(), 1 + 2 * 4);
    assert_eq!(json(&out.join("experiment.json"))["replicates"], 2);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    let cfg = fixture("fit.toml");
    let cfg = cfg.to_str().unwrap();

    let o = distfit(&["fit", "--config", cfg, "--set", "model.varient=\"exact\"", "--out", out]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let o = distfit(&["fit", "--config", cfg, "--set", "detection.w=-1", "--out", out]);
    assert_eq!(code(&o), 2);
    let o = distfit(&["fit", "--config", cfg, "--set", "model.variant=\"distance_error\"", "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("distance_error"));
    let o = distfit(&["fit", "--config", "/nonexistent/fit.toml", "--out", out]);
    assert_eq!(code(&o), 2);
    let o = distfit(&["fit", "--config", cfg, "--set", "data.rasters=[\"missing.asc\"]", "--out", out]);
    assert_eq!(code(&o), 2);
    let bad = write(tmp.path(), "bad.toml", "seed = [\n");
    assert_eq!(code(&distfit(&["fit", "--config", bad.to_str().unwrap(), "--out", out])), 2);
    assert!(!Path::new(out).join("manifest.json").exists());
}

#[test]
fn data_errors_exit_3_and_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    let cfg = fixture("fit.toml");
    let cfg = cfg.to_str().unwrap();

    let obs = write(tmp.path(), "obs.csv", "transect_id,distance\nL1,0.01\nL9,0.02\n");
    let set = format!("data.observations=\"{}\"", obs.display());
    let o = distfit(&["fit", "--config", cfg, "--set", &set, "--out", out]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("L9"), "{err}");

    let obs = write(tmp.path(), "obs2.csv", "transect_id,distance\nL1,abc\n");
    let set = format!("data.observations=\"{}\"", obs.display());
    let o = distfit(&["fit", "--config", cfg, "--set", &set, "--out", out]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("'distance'"));


    // Exact likelihood needs detection locations, which the fixture has.
    let obs = write(tmp.path(), "obs3.csv", "transect_id,distance,x,y\nL1,0.01,,\n");
    let set = format!("data.observations=\"{}\"", obs.display());
    let o = distfit(&["fit", "--config", cfg, "--set", &set, "--set", "model.variant=\"exact\"", "--out", out]);
    assert_eq!(code(&o), 3);
}

#[test]
fn numerical_failure_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let obs = write(tmp.path(), "obs.csv", "transect_id,distance\n");
    let set = format!("data.observations=\"{}\"", obs.display());
    let cfg = fixture("fit.toml");
    let o = distfit(&["fit", "--config", cfg.to_str().unwrap(), "--set", &set, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}
