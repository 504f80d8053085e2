use std::process::{Command, Output};

use serde_json::Value;

fn aniso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aniso")).args(args).output().expect("run aniso")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn verify_tent_against_square() {
    let o = aniso(&["verify", "--u", "tent:disc", "--phi", "quad", "--K", "square", "--res", "256"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &report(&o)["result"];
    assert!(num(&r["lhs"]) <= num(&r["rhs"]) + num(&r["err"]));
    assert_eq!(r["schema_version"], 1);
    assert!(r["per_level"].as_array().unwrap().iter().all(|l| l["band_tol"].is_number()));
}

#[test]
fn truncated_conjugate_profile_is_an_equality_case() {
    let o = aniso(&["gen-prop52", "--phi", "pnorm:2,4", "--a", "1", "--t", "0,1,1", "--then-verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["result"]["report"]["verdict"], "equality-within-tol");
}

#[test]
fn resolution_below_minimum_is_a_config_error() {
    let o = aniso(&["conjugate", "--phi", "quad", "--res", "16"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error[E_CONFIG]: "), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn error_codes_are_machine_readable() {
    let o = aniso(&["verify", "--u", "tent:disc", "--phi", "nope", "--K", "square"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[E_PARSE]"));

    let o = aniso(&["verify", "--u", "/nonexistent/u.txt.csv", "--phi", "quad", "--K", "square"]);
    assert_eq!(o.status.code(), Some(1));

    let o = aniso(&["gen-prop52", "--phi", "pnorm:1,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[E_INVALID]"));

    let o = aniso(&["verify", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[E_CONFIG]"));

    let o = aniso(&["--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[E_IO]"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"command": "sandwich", "phi": "quad", "K": "disc", "res": 40}"#).unwrap();
    let o = aniso(&["--config", path.to_str().unwrap(), "--res", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["config"]["res"], 128);
    assert_eq!(r["config"]["K"], "disc");
    let (c1, c2) = (num(&r["result"]["c1"]), num(&r["result"]["c2"]));
    assert!((c1 - 1.0).abs() <= 0.02 && (c2 - 1.0).abs() <= 0.02, "{c1} {c2}");

    std::fs::write(&path, r#"{"command": "sandwich", "colour": "blue"}"#).unwrap();
    let o = aniso(&["--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["verify", "--u", "random", "--seed", "7", "--phi", "pnorm:2,4", "--K", "hexagon", "--res", "64"];
    let a = aniso(&args);
    let b = aniso(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["seed"], 7);
}

#[test]
fn artifacts_embed_config_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = aniso(&["verify", "--u", "twobump", "--phi", "quad", "--K", "square", "--res", "64", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let id = r["run_id"].as_str().unwrap();
    assert_eq!(r["input_hash"].as_str().unwrap().len(), 64);
    assert!(r["input_hash"].as_str().unwrap().starts_with(id));
    for name in ["report.json", "levels.csv", "u.txt", "uk.txt"] {
        assert!(dir.path().join(format!("{id}-{name}")).is_file(), "{name}");
    }
    let csv = std::fs::read_to_string(dir.path().join(format!("{id}-levels.csv"))).unwrap();
    assert!(csv.starts_with("t,s_t,a_t,x_t0,x_t1,T1,"));
    assert_eq!(csv.lines().count(), 49);

    // the sampled u feeds back in as a file input
    let u = dir.path().join(format!("{id}-u.txt"));
    let o2 = aniso(&["symmetrize-u", "--u", u.to_str().unwrap(), "--K", "disc"]);
    assert_eq!(o2.status.code(), Some(0));
    assert_ne!(report(&o2)["input_hash"], r["input_hash"]);
}

#[test]
fn every_command_runs() {
    let runs: [&[&str]; 7] = [
        &["conjugate", "--phi", "trud:2,2,1,2", "--res", "64"],
        &["symmetrize-body", "--L", "hexagon", "--dilate", "2;0.1,0"],
        &["symmetrize-fn", "--phi", "pnorm:2,4", "--K", "square", "--res", "64"],
        &["symmetrize-u", "--u", "asym", "--K", "cross", "--res", "64"],
        &["gen-prop51", "--L", "hexagon", "--K", "cross", "--res", "64", "--then-verify"],
        &["diagnose", "--u", "twobump", "--phi", "quad", "--K", "square", "--res", "64"],
        &["sandwich", "--phi", "pnorm:2,4", "--K", "square", "--res", "64"],
    ];
    for args in runs {
        let o = aniso(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(report(&o)["command"], args[0]);
    }
    let r = report(&aniso(runs[1]));
    assert!((num(&r["result"]["volume_product"]) - 9.0).abs() < 1e-9);
    let r = report(&aniso(runs[5]));
    assert!(num(&r["result"]["min_quasi_convexity"]) < 0.98);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_aniso"))
            .args(["conjugate", "--phi", "quad", "--res", "64"])
            .env("ANISO_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("1").stdout, run("3").stdout);
    assert_eq!(run("zero").status.code(), Some(1));
}
