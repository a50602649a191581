use std::path::Path;
use std::process::{Command, Output};

fn rrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn presets_catalog() {
    let out = rrw(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "triangle-two-particles",
        "polygon-k-walkers",
        "polya-linear",
        "rubin-square",
        "psi-modulated",
        "longest-run",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
    let shown = rrw(&["presets", "--show", "rubin-square"]);
    assert!(String::from_utf8(shown.stdout).unwrap().contains("kind = \"urn\""));
}

#[test]
fn walk_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        for format in ["csv", "json"] {
            let out = rrw(&[
                "walk", "--preset", "triangle-two-particles", "--replicas", "8", "--horizon", "400",
                "--windows", "100", "--seed", "11", "--workers", workers, "--format", format,
                "--trajectory", "--out", dir.path().join(format).to_str().unwrap(),
            ]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
    }
    let csv = dir_bytes(&a.path().join("csv"));
    assert_eq!(csv, dir_bytes(&b.path().join("csv")));
    assert_eq!(csv.len(), 3);
    // the JSON document echoes the output path, so compare everything else
    let ja = String::from_utf8(std::fs::read(a.path().join("json/report.json")).unwrap()).unwrap();
    let jb = String::from_utf8(std::fs::read(b.path().join("json/report.json")).unwrap()).unwrap();
    assert_eq!(
        ja.replace(a.path().to_str().unwrap(), ""),
        jb.replace(b.path().to_str().unwrap(), "")
    );
}

#[test]
fn urn_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        format!(
            "kind = \"urn\"\nreplicas = 20\nhorizon = 500\nwindows = [100]\nbase_seed = 3\n\
             [output]\npath = {:?}\nformat = \"csv\"\n\
             [urn]\nprovider = {{ name = \"function\", g = {{ family = \"power\", alpha = 2.0 }} }}\n",
            dir.path().join("out")
        ),
    )
    .unwrap();
    let out = rrw(&["urn", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = std::fs::read_to_string(dir.path().join("out/aggregate.csv")).unwrap();
    assert!(agg.lines().nth(1).unwrap().starts_with("500,100,monochromatic,"));
}

#[test]
fn malformed_config_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"verify\"\nreplcas = 3\n").unwrap();
    let out = rrw(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replcas"));

    let out = rrw(&["walk", "--preset", "triangle-two-particles", "--horizon", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("windows"));

    let out = rrw(&["urn", "--preset", "triangle-two-particles"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let ok = rrw(&["verify", "--out", dir.path().join("ok").to_str().unwrap(), "--format", "csv"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(dir.path().join("ok/checks.csv").exists());

    let cfg = dir.path().join("v.toml");
    std::fs::write(&cfg, "kind = \"verify\"\n[verify]\nz_range = [54.598150033144236, 1e6]\n").unwrap();
    let bad = rrw(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("bad").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL psi_growth_condition"));
}
