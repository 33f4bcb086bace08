mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wavecorr::config::{load_config, ECHO_FILE};
use wavecorr::field::ScalarField2D;
use wavecorr::pipeline::{sha256_hex, MANIFEST_FILE};

use common::recipe_path;

const SMALL_HARMONIC: &str = r#"
[potential]
kind = "harmonic"

[packet]
family = "coherent"
zeta = 3.0
n_max = 20

[grid]
umin = -6.0
umax = 6.0
vmin = -6.0
vmax = 6.0
nu = 60
nv = 60
"#;

fn wavecorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest_rows(dir: &Path) -> Vec<(String, usize, String)> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# format="));
    assert_eq!(lines.next().unwrap(), "file,bytes,sha256");
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect()
}

#[test]
fn config_flag_is_required() {
    let out = wavecorr(&["eigen"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn eigen_writes_table_and_checksummed_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_HARMONIC);
    let out_dir = tmp.path().join("o");
    let out = wavecorr(&[
        "eigen",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let table = fs::read_to_string(out_dir.join("eigen.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,parity,E_n,origin_value_or_slope,boundary_decay"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 80);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "even");
    assert!((first[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);

    let rows = manifest_rows(&out_dir);
    let names: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    assert_eq!(names, vec![ECHO_FILE, "eigen.csv"]);
    for (name, bytes, sha) in &rows {
        let data = fs::read(out_dir.join(name)).unwrap();
        assert_eq!(data.len(), *bytes);
        assert_eq!(&sha256_hex(&data), sha);
    }
}

#[test]
fn echo_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_HARMONIC);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(
        wavecorr(&["eigen", "--config", &cfg, "--out", a.to_str().unwrap()])
            .status
            .success()
    );
    let echo = a.join(ECHO_FILE);
    let echoed = load_config(&echo).unwrap();
    let mut original = load_config(Path::new(&cfg)).unwrap();
    original.output.directory = echoed.output.directory.clone();
    assert_eq!(echoed, original);
    assert!(wavecorr(&[
        "eigen",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        b.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(
        fs::read(a.join("eigen.csv")).unwrap(),
        fs::read(b.join("eigen.csv")).unwrap()
    );
}

#[test]
fn eigen_only_mode_skips_dynamics() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_HARMONIC}\n[output]\nmode = \"eigen_only\"\n");
    let cfg = write_config(tmp.path(), &text);
    let out_dir = tmp.path().join("o");
    let out = wavecorr(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let names: Vec<String> = manifest_rows(&out_dir).into_iter().map(|r| r.0).collect();
    assert_eq!(names, vec![ECHO_FILE.to_string(), "eigen.csv".to_string()]);
    assert!(!out_dir.join("density.field").exists());
}

#[test]
fn packet_field_reads_back() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_HARMONIC);
    let out_dir = tmp.path().join("o");
    assert!(wavecorr(&[
        "packet",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap()
    ])
    .status
    .success());
    let f = ScalarField2D::read(&out_dir.join("density.field")).unwrap();
    assert_eq!((f.grid.nu, f.grid.nv), (60, 60));
    assert!(f.values.iter().all(|x| x.is_finite() && *x >= 0.0));
    assert_eq!(f.masked(), 0);
}

#[test]
fn missing_keys_are_reported_with_stage_and_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL_HARMONIC.replace("family = \"coherent\"\nzeta = 3.0\n", "");
    let cfg = write_config(tmp.path(), &text);
    let out = wavecorr(&[
        "run",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("[config]") && err.contains("packet.family"),
        "{err}"
    );
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL_HARMONIC.replace("zeta = 3.0", "zeta = 3.0\nzetta = 1.0");
    let cfg = write_config(tmp.path(), &text);
    let out = wavecorr(&["eigen", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zetta"));
}

#[test]
fn undecayed_spectrum_fails_in_eigen_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_HARMONIC}\n[spectral]\nbox_half_length = 8.0\n");
    let cfg = write_config(tmp.path(), &text);
    let out = wavecorr(&[
        "eigen",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[eigen]") && err.contains("decay"), "{err}");
}

#[test]
fn bohmian_overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_HARMONIC);
    let out_dir = tmp.path().join("o");
    let out = wavecorr(&[
        "bohmian",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--start",
        "2.5,0.5",
        "--start",
        "-2.5,-0.5",
        "--t-end",
        "0.5",
        "--h",
        "0.01",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let names: Vec<String> = manifest_rows(&out_dir).into_iter().map(|r| r.0).collect();
    assert_eq!(names.len(), 3, "{names:?}");
    for name in names.iter().filter(|n| n.starts_with("bohmian")) {
        let text = fs::read_to_string(out_dir.join(name)).unwrap();
        let rows = text.lines().filter(|l| !l.starts_with('#')).count();
        // header plus t = 0, 0.01, ..., 0.5
        assert_eq!(rows, 52, "{name}");
    }

    let bad = wavecorr(&["bohmian", "--config", &cfg, "--kappa=-1"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("[config]"));
}

#[test]
fn bundled_recipes_parse() {
    for name in common::ALL_RECIPES {
        let cfg = load_config(&recipe_path(name)).unwrap();
        assert!(cfg.output.directory.ends_with(name), "{name}");
    }
}
