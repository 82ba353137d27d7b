use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn cgolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgolab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cgolab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn read_dir_sorted(d: &PathBuf) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(d)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn studies_are_byte_deterministic() {
    let root = scratch("det");
    let (a, b) = (root.join("a"), root.join("b"));
    for d in [&a, &b] {
        let out = cgolab(&["stability-sweep", "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
    assert!(fa.iter().any(|(n, _)| n == "stability_sweep.csv"));
    assert!(fa.iter().any(|(n, _)| n == "stability_sweep_manifest.json"));
    assert_eq!(fa, fb);
}

#[test]
fn failed_check_exits_nonzero_and_names_anchor() {
    let root = scratch("fail");
    let cfg = root.join("tight.toml");
    fs::write(&cfg, "apriori_bound = 0.001\n").unwrap();
    let out = cgolab(&["stability-sweep", "--config", cfg.to_str().unwrap(), "--out", root.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("apriori-bound-K"), "{err}");
}

#[test]
fn forward_distance_and_holonomy_round_trip() {
    let root = scratch("fwd");
    let (a, b) = (root.join("a"), root.join("b"));
    assert!(cgolab(&["forward", "--out", a.to_str().unwrap(), "--order", "6"]).status.success());
    assert!(cgolab(&["forward", "--out", b.to_str().unwrap(), "--order", "6", "--t", "0.1"]).status.success());
    let head = fs::read_to_string(a.join("dtn.csv")).unwrap();
    assert!(head.starts_with("DTN v1 6 1\n"));
    let same = cgolab(&["distance", a.join("dtn.csv").to_str().unwrap(), a.join("dtn.csv").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(v["surrogate"], 0.0);
    assert_eq!(v["truncation"], 6);
    let diff = cgolab(&["distance", a.join("dtn.csv").to_str().unwrap(), b.join("dtn.csv").to_str().unwrap(), "--order", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&diff.stdout).unwrap();
    assert!(v["surrogate"].as_f64().unwrap() > 0.0);
    assert!(v["sup_inf"].as_f64().unwrap() <= v["surrogate"].as_f64().unwrap() + 1e-12);
    assert_eq!(v["truncation"], 3);
    let x = a.join("x.field");
    let h = cgolab(&["holonomy", x.to_str().unwrap(), x.to_str().unwrap(), "--radius", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&h.stdout).unwrap();
    assert_eq!(v["nearest_k"], 0);
    assert_eq!(v["defect"], 0.0);
    let poly = root.join("square.txt");
    fs::write(&poly, "0.5 0.5\n-0.5 0.5\n-0.5 -0.5\n0.5 -0.5\n").unwrap();
    let h = cgolab(&["holonomy", x.to_str().unwrap(), b.join("x.field").to_str().unwrap(), "--polyline", poly.to_str().unwrap()]);
    assert!(h.status.success(), "{}", String::from_utf8_lossy(&h.stderr));
    let v: serde_json::Value = serde_json::from_slice(&h.stdout).unwrap();
    assert!(v["length"].as_f64().unwrap() > 3.9);
}
