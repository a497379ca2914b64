use std::path::Path;
use std::process::{Command, Output};

use floquet_rabi::output::csv_body;

const BIN: &str = env!("CARGO_BIN_EXE_floquet-rabi");
const SMALL: &[&str] = &["--n-fock", "14", "--n-j", "8"];

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .args(SMALL)
        .arg("--out")
        .arg(out)
        .env_remove("FLOQUET_RABI_OUT")
        .output()
        .unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn columns(text: &str) -> Vec<String> {
    csv_body(text).lines().next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn fig_2b_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fig", "2b", "--points", "5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("fig2b.csv"));
    let mut want = vec!["eta_m".to_string()];
    want.extend((0..8).map(|k| format!("E_{k}")));
    want.extend((0..8).map(|k| format!("Eqrm_{k}")));
    assert_eq!(columns(&text), want);
    assert_eq!(csv_body(&text).lines().count(), 6);
}

#[test]
fn fig_3a_series_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fig", "3a", "--points", "257"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("fig3a.csv"));
    assert_eq!(columns(&text), ["t_over_T", "n_cav", "n_tls"]);
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# floquet-rabi "));
    assert!(header.iter().any(|l| l.contains("\"eta_m\":0.2") && l.contains("\"gamma\":0.1")));
    let last = csv_body(&text).lines().last().unwrap().to_string();
    assert!(last.starts_with("8.0000000000000000e0,"), "{last}");
    assert!(!text.contains('\r'));
}

#[test]
fn selfcheck_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selfcheck"], dir.path());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS dual_solver"));
    assert!(stdout.contains("14 of 14 checks passed"));
    let text = read(&dir.path().join("selfcheck.csv"));
    assert_eq!(columns(&text), ["check", "measured", "tolerance", "passed"]);
}

#[test]
fn quasienergies_lie_in_the_zone() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["quasienergies"], dir.path()).status.success());
    let body = csv_body(&read(&dir.path().join("quasienergies.csv")));
    let q: Vec<f64> = body.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(q.len(), 8);
    assert!(q.iter().all(|x| (-0.25..0.25).contains(x)));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"eta_m": 0.5, "gamma": 0.3}"#).unwrap();
    let o = run(
        &["timeseries", "--config", cfg.to_str().unwrap(), "--eta-m", "0.2", "--points", "65"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = read(&dir.path().join("timeseries.csv"));
    assert!(text.contains("\"eta_m\":0.2"));
    assert!(text.contains("\"gamma\":0.3"));
}

#[test]
fn environment_overrides_out() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["quasienergies", "--out"])
        .arg(a.path())
        .args(SMALL)
        .env("FLOQUET_RABI_OUT", b.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(b.path().join("quasienergies.csv").exists());
    assert!(!a.path().join("quasienergies.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"eta_m": 0.1, "colour": "red", "beta": 1}"#).unwrap();
    let o = run(&["selfcheck", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown keys in config file: beta, colour"));

    assert_eq!(run(&["fig", "2b", "--omega-m", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["fig", "4a"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--param", "eta_m", "--lo", "1", "--hi", "0"], dir.path()).status.code(), Some(1));

    // Too few sidebands for every mode to fit in the zone.
    let o = run(&["quasienergies", "--l-max", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
    let o = run(&["--version"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains(floquet_rabi::VERSION));
}

#[test]
fn sweep_outputs_are_worker_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--param", "eta_m", "--lo", "0", "--hi", "0.6", "--outputs", "static,quasienergies,mean", "--points", "7",
    ];
    let mut serial = args.to_vec();
    serial.extend(["--workers", "1"]);
    let mut parallel = args.to_vec();
    parallel.extend(["--workers", "3"]);
    assert!(run(&serial, a.path()).status.success());
    assert!(run(&parallel, b.path()).status.success());
    for f in [
        "sweep_eta_m.csv",
        "sweep_eta_m_energies.csv",
        "sweep_eta_m_resonances.csv",
        "sweep_eta_m_quasienergies.csv",
        "sweep_eta_m_tracks.csv",
        "sweep_eta_m_gaps.csv",
    ] {
        let (x, y) = (read(&a.path().join(f)), read(&b.path().join(f)));
        assert_eq!(csv_body(&x), csv_body(&y), "{f}");
    }
}
