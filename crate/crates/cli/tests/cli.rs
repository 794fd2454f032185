use std::fs;
use std::path::Path;
use std::process::ExitCode;

use vacuumlab::gasdyn::GasModel;
use vacuumlab::limitlab::run_sweep;
use vacuumlab_cli::{fit_records, parse_config, run, FitReport, RunManifest, RunStatus};

const SMALL: &str = "\
# quick three-point sweep
gamma = 2
rho_plus = 1
u_plus = 0.5
epsilons = 4e-2, 2e-2, 1e-2
h = 0.3
t_end = 0.6
c_mu = 0.1
cells_per_delta = 10
energy_samples = 40
";

fn run_args(args: &[&str]) -> ExitCode {
    run(std::iter::once("vacuumlab").chain(args.iter().copied()))
}

fn sweep_into(dir: &Path, cfg: &Path, extra: &[&str]) -> ExitCode {
    let mut args = vec![
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--no-timing",
    ];
    args.extend_from_slice(extra);
    run_args(&args)
}

#[test]
fn sweep_then_fit_round_trips_and_is_byte_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(sweep_into(&a, &cfg, &[]), ExitCode::SUCCESS);
    assert_eq!(sweep_into(&b, &cfg, &["--jobs", "2"]), ExitCode::SUCCESS);

    let manifest = RunManifest::load(&a.join("manifest.json")).unwrap();
    assert_eq!(manifest.status, RunStatus::Complete);
    assert!(manifest.files.iter().any(|f| f.starts_with("profiles/")));
    for f in &manifest.files {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }

    let csv = fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert!(csv.starts_with(
        "epsilon,mu,delta,err_rho_inf,err_m_inf,ratio_rho,ratio_m,energy_peak,dissipation_total,runtime_s\n"
    ));
    assert_eq!(csv.lines().count(), 4);

    let fit_out = tmp.path().join("fit.json");
    let code = run_args(&[
        "fit",
        "--input",
        a.join("sweep.csv").to_str().unwrap(),
        "--out",
        fit_out.to_str().unwrap(),
    ]);
    assert_eq!(code, ExitCode::SUCCESS);
    let refit: FitReport = serde_json::from_str(&fs::read_to_string(&fit_out).unwrap()).unwrap();

    let mut config = parse_config(SMALL).unwrap();
    config.exec = vacuumlab::Exec::Sequential;
    let records: Vec<_> = run_sweep(&config)
        .unwrap()
        .into_iter()
        .map(|c| c.record)
        .collect();
    let direct = fit_records(&GasModel::new(2.0).unwrap(), &records).unwrap();
    for (x, y) in [
        (refit.density.slope, direct.density.slope),
        (refit.density.intercept, direct.density.intercept),
        (refit.momentum.slope, direct.momentum.slope),
        (refit.momentum.intercept, direct.momentum.intercept),
    ] {
        assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
    }
    for (x, y) in refit
        .density
        .ratio_series
        .iter()
        .zip(&direct.density.ratio_series)
    {
        assert!((x - y).abs() <= 1e-12 * y.abs());
    }
}

#[test]
fn completed_run_is_not_overwritten_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.cfg");
    fs::write(&cfg, SMALL.replace("4e-2, 2e-2, 1e-2", "4e-2")).unwrap();
    let out = tmp.path().join("run");
    assert_eq!(
        sweep_into(&out, &cfg, &["--no-profiles"]),
        ExitCode::SUCCESS
    );
    assert_eq!(
        sweep_into(&out, &cfg, &["--no-profiles"]),
        ExitCode::FAILURE
    );
    assert_eq!(
        sweep_into(&out, &cfg, &["--no-profiles", "--force"]),
        ExitCode::SUCCESS
    );
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run_args(&["frobnicate"]), ExitCode::from(2));
    assert_eq!(
        run_args(&["waves", "--gamma", "3", "--bogus"]),
        ExitCode::from(2)
    );
    assert_eq!(
        run_args(&["waves", "--gamma", "3", "--xi-range", "2:1:5"]),
        ExitCode::from(2)
    );
}

#[test]
fn bad_config_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, SMALL.replace("gamma = 2", "gamma = 1")).unwrap();
    assert_eq!(
        sweep_into(&tmp.path().join("out"), &cfg, &[]),
        ExitCode::FAILURE
    );
}

#[test]
fn waves_and_verify_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let waves = tmp.path().join("waves.csv");
    let code = run_args(&[
        "waves",
        "--gamma",
        "3",
        "--xi-range",
        "-2:2:401",
        "--out",
        waves.to_str().unwrap(),
    ]);
    assert_eq!(code, ExitCode::SUCCESS);
    let text = fs::read_to_string(&waves).unwrap();
    assert_eq!(text.lines().count(), 402);
    assert!(text.starts_with("xi,rho_exact,m_exact,rho_cutoff,m_cutoff,rho_smooth,m_smooth\n"));

    let report = tmp.path().join("verify.json");
    let code = run_args(&[
        "verify",
        "--delta",
        "0.1",
        "--t",
        "1",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, ExitCode::SUCCESS);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pointwise_bound"].as_f64(), Some(40.0));
    assert_eq!(v["pointwise_ok"].as_bool(), Some(true));
    assert!(v["burgers"]["pointwise"]["value"].as_f64().unwrap() <= 40.0);
}
