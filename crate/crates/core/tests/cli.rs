use std::path::Path;
use std::process::Command;

fn hypolab(task: &str, config: &str, dir: &Path, extra: &[&str]) -> (i32, std::path::PathBuf) {
    let cfg = dir.join(format!("{task}.toml"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("{task}-out"));
    let status = Command::new(env!("CARGO_BIN_EXE_hypolab"))
        .arg(task)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .status()
        .unwrap();
    (status.code().unwrap(), out)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn scalar_spectrum_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "geometry.kind = \"scalar\"\ngeometry.a = 2\ndamping.variant = \"constant\"\ndamping.beta = 2\n";
    let (code, out) = hypolab("spectrum", cfg, tmp.path(), &[]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(rows.len(), 2);
    for (row, im) in rows.iter().zip([-1.0, 1.0]) {
        let re: f64 = row[0].parse().unwrap();
        let got: f64 = row[1].parse().unwrap();
        assert!((re + 1.0).abs() < 1e-12 && (got - im).abs() < 1e-12);
    }
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l.ends_with("  spectrum.csv") && l.len() == 64 + 2 + 12));
}

#[test]
fn pipeline_row_matches_module_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "pipeline.c = 1\npipeline.kappa = 1\npipeline.k = 2\npipeline.t_obs = 4\npipeline.c0 = 1\npipeline.lambdas = [1, 3]\n";
    let (code, out) = hypolab("pipeline", cfg, tmp.path(), &[]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out.join("pipeline.csv"));
    let gfrak: f64 = rows[1][2].parse().unwrap();
    // 3·5·e^25/(2−√2), evaluated in extended precision.
    let expected = 1_843_800_779_062.592_5;
    assert!((gfrak - expected).abs() <= 1e-12 * expected, "{gfrak}");
}

#[test]
fn misspelled_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out) = hypolab("spectrum", "geometry.kk = 2\n", tmp.path(), &[]);
    assert_eq!(code, 2);
    assert!(!out.exists());
    let (code, _) = hypolab("spectrum", "geometry.k = 0.5\n", tmp.path(), &[]);
    assert_eq!(code, 2);
}

#[test]
fn gapcheck_reports_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let base = "geometry.n = 30\ngeometry.m = 3\n";
    let (code, out) = hypolab("gapcheck", base, tmp.path(), &["--threads", "1"]);
    assert_eq!(code, 0);
    let verdict = std::fs::read_to_string(out.join("gapcheck.txt")).unwrap();
    assert!(verdict.contains("pass = true"));
    let wide = format!("{base}gapcheck.eps = 10\ngapcheck.kappa = 1e-3\n");
    let (code, out) = hypolab("gapcheck", &wide, tmp.path(), &[]);
    assert_eq!(code, 4);
    assert!(out.join("spectrum.csv").exists());
}

#[test]
fn tolerance_flag_marks_unresolved_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "geometry.n = 20\ngeometry.m = 1\n";
    let (code, out) = hypolab("spectrum", cfg, tmp.path(), &["--tol", "1e-300"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert!(rows.iter().any(|r| r[3] == "unresolved"));
}
