//! Command-line behaviour: outputs, precedence, determinism, exit codes.

use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spacemod"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analytic_sweep_to_stdout() {
    let o = run(&["sweep", "--snr", "0:30:5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "scheme,n_tx_or_M,n_rx,n_pilots,r_pm,snr_db,abep_analytic,ber_mc,mc_std_err,trials,flags");
    assert_eq!(lines.len(), 8);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "schemes = [\"tosd\"]\nn_rx = [2]\nn_pilots = [1]\nsnr_db = [0, 10]\nmethod = \"both\"\nseed = 3\n\n[stopping]\nmin_errors = 20\nmax_trials = 20000\n",
    )
    .unwrap();
    let out = dir.path().join("res");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--pilots", "inf,3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = spacemod::runner::read_rows(fs::File::open(out.join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.scheme == spacemod::sim::Scheme::TosdSsk && r.n_rx == 2));
    assert_eq!(rows[0].n_pilots.to_string(), "inf");
    assert_eq!(rows[2].n_pilots.to_string(), "3");
    assert!(rows.iter().all(|r| r.ber_mc.is_some() && r.abep_analytic.is_some()));
}

#[test]
fn byte_identical_across_worker_counts() {
    let args = ["sweep", "--scheme", "ssk,qam", "--method", "mc", "--seed", "17", "--snr", "0,6,12", "--pilots", "1,inf"];
    let a = run(&[&args[..], &["--workers", "1"]].concat());
    let b = run(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[&args[..7], &["18"], &args[8..]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(run(&["sweep", "--method", "mc"]).status.code(), Some(2), "seed required");
    assert_eq!(run(&["sweep", "--scheme", "qam"]).status.code(), Some(2), "no analytic model");
    assert_eq!(run(&["sweep", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--snr", "1:2"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--pilots", "0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_points_exit_3_with_partial_output() {
    let o = run(&["sweep", "--snr", "5,inf"]);
    assert_eq!(o.status.code(), Some(3));
    let rows = spacemod::runner::read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].abep_analytic.is_some());
    assert!(rows[1].flags.starts_with("error:"));
}

#[test]
fn tables_pulses_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["table1", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4.97"));
    let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("FPCB 99%,7.61,1.18,1.41,4.97"));

    let o = run(&["table2", "--scheme", "tosd", "--pilots", "3", "--rates", "2", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("27.5 / 17.8"), "{}", stdout(&o));
    assert!(dir.path().join("table2.csv").exists());

    let p = dir.path().join("pulses");
    let o = run(&["pulses", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(p.join("w_3_psd.csv").exists() && p.join("half_sine_time.csv").exists());

    let o = run(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
