//! Runner and binary behaviour: CSV schemas, determinism, exit codes.

use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

use oneparticle_cli::{run, write_artifacts, RunOptions, ScenarioConfig, ScenarioKind};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oneparticle"))
}

fn run_text(kind: ScenarioKind, text: &str) -> oneparticle_cli::Artifacts {
    let cfg = ScenarioConfig::parse(text).unwrap();
    run(kind, &cfg, text, &RunOptions::default()).unwrap()
}

fn rows(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn invoke(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = exe();
    cmd.args(args).arg("--out").arg(out);
    if let Some(p) = config {
        cmd.arg("--config").arg(p);
    }
    cmd.output().unwrap()
}

const HOMOGENEOUS: &str = r#"
scenario = "simulate"
n = 3

[time]
end = 2.0
samples = 21

[model]
kind = "homogeneous"
hamiltonian = [
  [[0.5, 0.0], [0.2, 0.1], [0.0, 0.0]],
  [[0.2, -0.1], [-0.3, 0.0], [0.1, 0.0]],
  [[0.0, 0.0], [0.1, 0.0], [0.0, 0.0]],
]

[model.gamma]
preset = "constant"
base = 1.0

[initial]
kind = "strict"
r = [
  [[0.5, 0.0], [0.1, 0.1], [0.0, 0.0]],
  [[0.1, -0.1], [0.3, 0.0], [0.0, 0.0]],
  [[0.0, 0.0], [0.0, 0.0], [0.2, 0.0]],
]
"#;

#[test]
fn bell_curve_peaks_at_ln2() {
    let art = run_text(ScenarioKind::BellCurve, "[bell]\ngamma = 1.0\n");
    let (header, rows) = rows(&art.csv);
    assert_eq!(header, ["t", "mutual_information"]);
    assert_eq!(rows.len(), 200);
    let max = rows.iter().map(|r| r[1]).fold(f64::MIN, f64::max);
    assert!((max - LN_2).abs() <= 1e-6, "{max}");
}

#[test]
fn homogeneous_simulation_matches_closed_form() {
    let art = run_text(ScenarioKind::Simulate, HOMOGENEOUS);
    let (header, rows) = rows(&art.csv);
    assert_eq!(
        header,
        [
            "t",
            "rho00",
            "trace_r",
            "psi_norm",
            "min_eigenvalue",
            "v_norm"
        ]
    );
    let last = rows.last().unwrap();
    assert_eq!(last[0], 2.0);
    assert!((last[1] - (1.0 - (-2.0f64).exp())).abs() <= 1e-7);
    for r in &rows {
        assert!((r[1] + r[2] - 1.0).abs() < 1e-9);
        assert!(r[5] <= 1.0 + 1e-9);
    }
}

#[test]
fn outputs_are_byte_identical() {
    let text = r#"
seed = 9
n = 3
[time]
end = 1.5
samples = 7
[model]
kind = "random"
modulated = true
decay_count = 2
[initial]
kind = "random"
"#;
    let a = run_text(ScenarioKind::Simulate, text);
    let b = run_text(ScenarioKind::Simulate, text);
    assert_eq!(a.csv, b.csv);
    assert!(a.csv.contains("seed=9"));
}

#[test]
fn moments_columns_are_row_major() {
    let text = r#"
n = 2
statistics = "fermion"
[time]
end = 1.0
samples = 3
[model]
kind = "constant"
decay = [[[1.0, 0.0], [0.0, 0.0]]]
[moments_initial]
y = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
"#;
    let art = run_text(ScenarioKind::Moments, text);
    let (header, rows) = rows(&art.csv);
    assert_eq!(header.len(), 1 + 4 + 8 + 8);
    assert_eq!(header[5], "y_1_1_re");
    assert_eq!(header[13], "z_1_1_re");
    let k = header.iter().position(|h| h == "y_1_1_re").unwrap();
    for r in &rows {
        assert!((r[k] - (-r[0]).exp()).abs() < 1e-10);
    }
}

#[test]
fn info_reports_the_decomposition() {
    let text = r#"
n = 2
[time]
end = 3.0
samples = 4
[model]
kind = "constant"
hamiltonian = [[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]
decay = [[[0.6, 0.0], [0.0, 0.0]]]
[initial]
kind = "excited"
mode = 1
[partition]
first = [1]
second = [2]
"#;
    let art = run_text(ScenarioKind::Info, text);
    let (header, rows) = rows(&art.csv);
    assert_eq!(header[1], "total");
    for r in &rows {
        assert!((r[1] - r[2] - r[3]).abs() < 1e-10);
        assert!((r[4] + r[5] + r[6] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn partition_indices_are_bounded_by_n() {
    let text = r#"
n = 2
[time]
end = 1.0
samples = 2
[model]
kind = "constant"
[partition]
first = [1]
second = [3]
"#;
    let cfg = ScenarioConfig::parse(text).unwrap();
    let err = run(ScenarioKind::Info, &cfg, text, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn randomized_scenarios_need_a_seed() {
    let text = "n = 2\n[time]\nend = 1.0\nsamples = 2\n[model]\nkind = \"random\"\n";
    let cfg = ScenarioConfig::parse(text).unwrap();
    let err = run(ScenarioKind::Simulate, &cfg, text, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let ok = run(
        ScenarioKind::Simulate,
        &cfg,
        text,
        &RunOptions {
            seed: Some(3),
            svg: true,
        },
    )
    .unwrap();
    assert!(ok.svg.unwrap().starts_with("<svg"));
}

#[test]
fn piecewise_and_sinusoidal_models_run() {
    let piecewise = r#"
n = 2
[time]
end = 2.0
samples = 5
[model]
kind = "piecewise"
[[model.segments]]
start = 0.0
decay = [[[1.0, 0.0], [0.0, 0.0]]]
[[model.segments]]
start = 1.0
hamiltonian = [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
"#;
    let (_, r) = rows(&run_text(ScenarioKind::Simulate, piecewise).csv);
    // decay stops at t = 1
    assert!((r[2][1] - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    assert!((r[4][1] - r[2][1]).abs() < 1e-9);

    let sinusoidal = r#"
n = 2
[time]
end = 2.0
samples = 5
[model]
kind = "homogeneous"
[model.gamma]
preset = "sinusoidal"
base = 1.0
amplitude = 1.0
"#;
    let (_, r) = rows(&run_text(ScenarioKind::Simulate, sinusoidal).csv);
    let t: f64 = 2.0;
    assert!((r[4][1] - (1.0 - (-(t + 1.0 - t.cos())).exp())).abs() < 1e-7);
}

#[test]
fn verify_small_run_reports_every_check() {
    let art = run_text(
        ScenarioKind::Verify,
        "seed = 1\nn = 2\n[verify]\nmodels = 2\n",
    );
    assert!(art.failure.is_none());
    let body: Vec<&str> = art.csv.lines().collect();
    assert!(body[0].ends_with("seed=1"));
    assert_eq!(body[1], "stage,check,samples,residual,tolerance,status");
    assert!(body[2..].iter().all(|l| l.ends_with(",pass")));
    assert!(body.len() > 20);
}

#[test]
fn svg_is_refused_for_reports() {
    let text = "seed = 1\nn = 2\n[verify]\nmodels = 1\n";
    let cfg = ScenarioConfig::parse(text).unwrap();
    let opts = RunOptions {
        seed: None,
        svg: true,
    };
    assert_eq!(
        run(ScenarioKind::Verify, &cfg, text, &opts)
            .unwrap_err()
            .exit_code(),
        3
    );
}

#[test]
fn artifacts_land_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let art = run_text(ScenarioKind::BellCurve, "");
    let written = write_artifacts(dir.path(), &art).unwrap();
    assert_eq!(written, vec![dir.path().join("bell-curve.csv")]);
    assert_eq!(std::fs::read_to_string(&written[0]).unwrap(), art.csv);
}

#[test]
fn binary_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = invoke(&["bell-curve", "--svg"], None, dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("bell-curve.csv").exists());
    let svg = std::fs::read_to_string(dir.path().join("bell-curve.svg")).unwrap();
    assert!(svg.contains("<polyline"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n = 3\n[time\nend = 1\n");
    let out = invoke(&["simulate"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().last().unwrap();
    assert!(line.starts_with("error kind=parse reason="), "{line}");
}

#[test]
fn non_hermitian_hamiltonian_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
n = 2
[time]
end = 1.0
samples = 3
[model]
kind = "constant"
hamiltonian = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
"#;
    let cfg = write_config(dir.path(), text);
    let out = invoke(&["simulate"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error kind=validation"));
    assert!(!dir.path().join("simulate.csv").exists());

    let verify = format!("seed = 1\n{text}");
    let cfg = write_config(dir.path(), &verify);
    let out = invoke(&["verify"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dimension_guard_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n = 9\n[verify]\nboson_modes = 9\n");
    let out = invoke(&["verify", "--seed", "1"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("boson"), "{stderr}");
}

#[test]
fn mismatched_scenario_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), HOMOGENEOUS);
    let out = invoke(&["info"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_config_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = invoke(
        &["simulate"],
        Some(&dir.path().join("absent.toml")),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_emits_timings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 4\n[bench]\nsizes = [2, 3]\nt = 0.5\n");
    let out = invoke(&["bench"], Some(&cfg), dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[1], "n,method,wall_time");
    assert_eq!(lines.len(), 6);
    assert!(lines[2].starts_with("2,propagator,"));
    assert!(lines[3].starts_with("2,liouvillian,"));
}
