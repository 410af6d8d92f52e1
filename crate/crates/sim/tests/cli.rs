use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn opo_sim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opo-sim"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn phase_of_a_quarter_lune() {
    let dir = TempDir::new().unwrap();
    let out = opo_sim(dir.path(), &["phase", "--path", "lune:1.5707963267948966"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("Ω = 1.5708  γ_s = -0.7854  γ_i = +0.7854"), "{stdout}");

    let (header, rows) = read_csv(&dir.path().join("phase.csv"));
    assert!(header.iter().any(|h| h == "omega"));
    assert_eq!(rows.len(), 1);
    let omega: f64 = rows[0][header.iter().position(|h| h == "omega").unwrap()].parse().unwrap();
    assert!((omega - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

    let sidecar = json(&dir.path().join("phase.config.json"));
    assert_eq!(sidecar["mode"], "phase");
    assert!(sidecar.get("output_dir").is_none());
}

#[test]
fn csv_uses_crlf() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&opo_sim(dir.path(), &["free-run", "--pump", "2"])), 0);
    let text = fs::read_to_string(dir.path().join("free-run.csv")).unwrap();
    assert!(text.ends_with("\r\n"));
    assert_eq!(text.matches('\n').count(), text.matches("\r\n").count());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("scenario.json");
    fs::write(&cfg, r#"{ "name": "from-file", "pump": 0.7, "seed_intensity": 0.09 }"#).unwrap();
    let out = opo_sim(dir.path(), &["steady", "--config", cfg.to_str().unwrap(), "--pump", "0.4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar = json(&dir.path().join("from-file.config.json"));
    assert_eq!(sidecar["pump"], 0.4);
    assert_eq!(sidecar["seed_intensity"], 0.09);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{ "pump": 1.0, "pumpp": 2.0 }"#).unwrap();
    assert_eq!(code(&opo_sim(dir.path(), &["steady", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&opo_sim(dir.path(), &["steady", "--config", "missing.json"])), 2);
    assert_eq!(code(&opo_sim(dir.path(), &["steady", "--delta", "0.3"])), 2);
    assert_eq!(code(&opo_sim(dir.path(), &["steady", "--seed-intensity", "-1"])), 2);
    assert_eq!(code(&opo_sim(dir.path(), &["phase", "--path", "square"])), 2);
    assert_eq!(code(&opo_sim(dir.path(), &["nonsense"])), 2);
}

#[test]
fn numerical_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let out = opo_sim(dir.path(), &["interfere", "--seed-intensity", "0", "--grid-n", "32"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn interference_frames() {
    let dir = TempDir::new().unwrap();
    let out = opo_sim(dir.path(), &["interfere", "--grid-n", "48", "--path", "lune:3.141592653589793", "--map-csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for frame in ["before", "after"] {
        let bytes = fs::read(dir.path().join(format!("interfere_{frame}.pgm"))).unwrap();
        let header = b"P5\n48 48\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 48 * 48 * 2);
        let (_, rows) = read_csv(&dir.path().join(format!("interfere_{frame}.csv")));
        assert_eq!(rows.len(), 48 * 48);
    }
    let summary = json(&dir.path().join("interfere.json"));
    let rotation = summary["rotation"].as_f64().unwrap();
    assert!((rotation.abs() - std::f64::consts::FRAC_PI_2).abs() < 0.02, "{summary}");
}

#[test]
fn scan_is_independent_of_jobs() {
    let one = TempDir::new().unwrap();
    let four = TempDir::new().unwrap();
    let args = ["steady", "--pump-range", "0.1:2.5:13", "--seed-range", "0.01:0.2:3"];
    let jobs1 = [&args[..], &["--jobs", "1"]].concat();
    let jobs4 = [&args[..], &["--jobs", "4"]].concat();
    assert_eq!(code(&opo_sim(one.path(), &jobs1)), 0);
    assert_eq!(code(&opo_sim(four.path(), &jobs4)), 0);
    let a = fs::read(one.path().join("steady.csv")).unwrap();
    let b = fs::read(four.path().join("steady.csv")).unwrap();
    assert_eq!(a, b);
    let (header, rows) = read_csv(&one.path().join("steady.csv"));
    assert_eq!(rows.len(), 39);
    assert_eq!(&header[..2], ["pump", "seed_intensity"]);
}

#[test]
fn relative_units_match_unity() {
    let abs = TempDir::new().unwrap();
    let rel = TempDir::new().unwrap();
    assert_eq!(code(&opo_sim(abs.path(), &["steady", "--pump", "0.8"])), 0);
    let scaled = [
        "steady", "--pump", "0.8", "--units", "relative", "--kappa", "2", "--kappa-p", "2", "--chi", "2", "--eta-p", "2",
        "--eta-s", "2",
    ];
    assert_eq!(code(&opo_sim(rel.path(), &scaled)), 0);
    let (_, a) = read_csv(&abs.path().join("steady.csv"));
    let (_, b) = read_csv(&rel.path().join("steady.csv"));
    assert_eq!(a, b);
}

#[test]
fn path_file_input() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("octant.csv");
    fs::write(&file, "# octant\ntheta,phi\n0,0\n1.5707963267948966,0\n1.5707963267948966,1.5707963267948966\n").unwrap();
    let out = opo_sim(dir.path(), &["phase", "--path-file", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("phase.json"));
    assert!((summary["solid_angle"].as_f64().unwrap().abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "{summary}");

    let open = opo_sim(dir.path(), &["phase", "--path-file", file.to_str().unwrap(), "--open-path"]);
    assert_eq!(code(&open), 2);
}

#[test]
fn short_sweep() {
    let dir = TempDir::new().unwrap();
    let out = opo_sim(dir.path(), &["sweep", "--duration", "50", "--samples", "41"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 41);
    let summary = json(&dir.path().join("sweep.json"));
    assert!(summary["adiabaticity_error"].as_f64().unwrap() > 0.0);
}
