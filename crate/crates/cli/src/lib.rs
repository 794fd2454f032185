//! Command-line front end for vacuumlab.
//!
//! Subcommands: `sweep` runs an epsilon sweep from a config file, `waves`
//! dumps exact / cut-off / smoothed profiles, `verify` prints the smoothing
//! and cut-off property reports, `fit` re-fits rates from a sweep CSV.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod output;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use vacuumlab::gasdyn::{
    build_exact_wave, eval_cutoff_wave, eval_exact_wave, CutoffWave, GasModel, RightState,
};
use vacuumlab::limitlab::{
    cutoff_gap, fit_points, fit_rate, run_sweep, CutoffGap, ExponentModel, Quantity, RateFit,
    SweepRecord,
};
use vacuumlab::smoothwave::{
    verify_burgers_estimates, verify_wave_identities, ApproxWave, BurgersReport, WaveIdentityReport,
};
use vacuumlab::Exec;

pub use config::{parse_config, ConfigError};
pub use manifest::{RunManifest, RunStatus};

#[derive(Debug, Parser)]
#[command(
    name = "vacuumlab",
    version,
    about = "Vanishing-viscosity experiments for rarefaction waves with vacuum"
)]
pub struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an epsilon sweep and write CSV, fits and profile snapshots.
    Sweep(SweepArgs),
    /// Dump exact, cut-off and smoothed wave profiles over a xi range.
    Waves(WavesArgs),
    /// Print the smoothing and cut-off property reports as JSON.
    Verify(VerifyArgs),
    /// Re-fit rates from an existing sweep CSV.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Concurrent worker threads; 1 runs everything sequentially.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Overwrite a completed run in the output directory.
    #[arg(long)]
    pub force: bool,
    /// Write runtime_s as zero so repeated runs produce identical files.
    #[arg(long)]
    pub no_timing: bool,
    /// Skip the per-case profile snapshots.
    #[arg(long)]
    pub no_profiles: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl XiRange {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64)
            .collect()
    }
}

fn parse_xi_range(s: &str) -> Result<XiRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    let n: usize = n.parse().map_err(|_| format!("bad point count `{n}`"))?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) || n == 0 {
        return Err(format!("need finite lo < hi and n >= 1, got `{s}`"));
    }
    Ok(XiRange { lo, hi, n })
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub u_plus: f64,
    /// Cut-off density; defaults to a tenth of rho_plus.
    #[arg(long)]
    pub mu: Option<f64>,
}

impl WaveArgs {
    fn build(&self, delta: f64) -> anyhow::Result<ApproxWave> {
        let gas = GasModel::new(self.gamma)?;
        let right = RightState::new(self.rho_plus, self.u_plus)?;
        let mu = self.mu.unwrap_or(0.1 * self.rho_plus);
        Ok(ApproxWave::from_parts(gas, right, mu, delta)?)
    }
}

#[derive(Debug, Args)]
pub struct WavesArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, value_parser = parse_xi_range, allow_hyphen_values = true)]
    pub xi_range: XiRange,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Time at which the smoothed wave is sampled at x = xi t.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub t: f64,
    /// Exponent of the derivative norms.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Adiabatic exponent; read from the sweep manifest next to the CSV when omitted.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub gamma: f64,
    pub density: RateFit,
    pub momentum: RateFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub gamma: f64,
    pub delta: f64,
    pub t: f64,
    pub mu: f64,
    pub pointwise_bound: f64,
    pub pointwise_ok: bool,
    pub burgers: BurgersReport,
    pub identities: WaveIdentityReport,
    pub cutoff_gap: CutoffGap,
}

pub const SWEEP_CSV: &str = "sweep.csv";
pub const FIT_JSON: &str = "fit.json";

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Sweep(a) => sweep(a, cli.verbose),
        Command::Waves(a) => emit(a.out.as_deref(), |w| waves(a, w)),
        Command::Verify(a) => emit(a.out.as_deref(), |w| verify(a, w)),
        Command::Fit(a) => emit(a.out.as_deref(), |w| fit(a, w)),
    }
}

fn emit(
    out: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            let mut f = BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            );
            body(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

pub fn fit_records(gas: &GasModel, records: &[SweepRecord]) -> anyhow::Result<FitReport> {
    Ok(FitReport {
        gamma: gas.gamma(),
        density: fit_rate(records, &ExponentModel::new(gas, Quantity::Density))?,
        momentum: fit_rate(records, &ExponentModel::new(gas, Quantity::Momentum))?,
    })
}

fn sweep(a: &SweepArgs, verbosity: u8) -> anyhow::Result<()> {
    if a.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let text =
        fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut config = parse_config(&text).with_context(|| format!("in {}", a.config.display()))?;
    RunManifest::prepare(&a.out, a.force)?;

    let mut manifest = RunManifest {
        config_path: a.config.clone(),
        output_dir: a.out.clone(),
        parallelism: a.jobs,
        verbosity,
        status: RunStatus::Running,
        gamma: config.gas.gamma(),
        files: Vec::new(),
    };
    manifest.store()?;

    config.exec = if a.jobs == 1 {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    log::info!(
        "running {} cases with {} worker(s)",
        config.epsilons.len(),
        a.jobs
    );
    let cases = if a.jobs == 1 {
        run_sweep(&config)?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(a.jobs)
            .build()?
            .install(|| run_sweep(&config))?
    };
    for c in &cases {
        let r = &c.record;
        log::info!(
            "eps {:e}: err_rho {:e}, err_m {:e}, {} cells, {} steps",
            r.epsilon,
            r.err_rho_inf,
            r.err_m_inf,
            r.n_cells,
            r.steps
        );
        if !r.apriori_ok {
            log::warn!(
                "eps {:e}: small-perturbation bound exceeded (sup phi = {:e})",
                r.epsilon,
                r.phi_sup
            );
        }
        if r.min_rho_over_mu < 0.5 {
            log::warn!(
                "eps {:e}: density fell to {:.3} mu",
                r.epsilon,
                r.min_rho_over_mu
            );
        }
        if r.signal_growth > 1.1 {
            log::warn!(
                "eps {:e}: signal speed grew by a factor {:.3}",
                r.epsilon,
                r.signal_growth
            );
        }
    }

    let records: Vec<SweepRecord> = cases.iter().map(|c| c.record.clone()).collect();
    let mut w = BufWriter::new(File::create(a.out.join(SWEEP_CSV))?);
    output::write_sweep_csv(&mut w, &records, !a.no_timing)?;
    w.flush()?;
    manifest.files.push(SWEEP_CSV.into());

    if records.len() >= 3 {
        fs::write(
            a.out.join(FIT_JSON),
            output::to_json(&fit_records(&config.gas, &records)?)?,
        )?;
        manifest.files.push(FIT_JSON.into());
    } else {
        log::warn!("fewer than 3 epsilons; skipping the rate fit");
    }

    if !a.no_profiles {
        fs::create_dir_all(a.out.join("profiles"))?;
        for (i, c) in cases.iter().enumerate() {
            for (k, s) in c.snapshots.iter().enumerate() {
                let name = format!("profiles/case{i:02}_t{k:02}.csv");
                let mut w = BufWriter::new(File::create(a.out.join(&name))?);
                output::write_profile_csv(&mut w, s)?;
                w.flush()?;
                manifest.files.push(name);
            }
        }
    }

    manifest.status = RunStatus::Complete;
    manifest.store()
}

fn waves(a: &WavesArgs, w: &mut dyn Write) -> anyhow::Result<()> {
    if !(a.t > 0.0) {
        bail!("--t must be positive, got {}", a.t);
    }
    let aw = a.wave.build(a.delta)?;
    let rows = a
        .xi_range
        .points()
        .into_iter()
        .map(|xi| {
            let e = eval_exact_wave(aw.exact(), xi);
            let c = eval_cutoff_wave(aw.cutoff(), xi);
            let (rho, u) = aw.eval_point(xi * a.t, a.t)?;
            Ok(vec![xi, e.rho, e.m, c.rho, c.m, rho, rho * u])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    output::write_rows(
        w,
        &[
            "xi",
            "rho_exact",
            "m_exact",
            "rho_cutoff",
            "m_cutoff",
            "rho_smooth",
            "m_smooth",
        ],
        rows,
    )
}

fn verify(a: &VerifyArgs, w: &mut dyn Write) -> anyhow::Result<()> {
    if !(a.t > 0.0) {
        bail!("--t must be positive, got {}", a.t);
    }
    let aw = a.wave.build(a.delta)?;
    let burgers = verify_burgers_estimates(aw.profile(), a.t, a.p)?;
    let (lo, hi) = aw.profile().support(a.t);
    let samples: Vec<(f64, f64)> = [0.5 * a.t, a.t]
        .iter()
        .flat_map(|&t| (0..=200).map(move |k| (lo + (hi - lo) * k as f64 / 200.0, t)))
        .collect();
    let identities = verify_wave_identities(&aw, &samples)?;
    let exact = build_exact_wave(*aw.gas(), *aw.exact().right());
    let cw = CutoffWave::new(exact, aw.cutoff().mu())?;
    let xi: Vec<f64> = (0..=4000)
        .map(|k| lo / a.t + (hi - lo) / a.t * k as f64 / 4000.0)
        .collect();
    let report = VerifyReport {
        gamma: aw.gas().gamma(),
        delta: a.delta,
        t: a.t,
        mu: aw.cutoff().mu(),
        pointwise_bound: 4.0 / a.delta,
        pointwise_ok: burgers.pointwise_ok(),
        burgers,
        identities,
        cutoff_gap: cutoff_gap(&cw, &xi),
    };
    w.write_all(output::to_json(&report)?.as_bytes())?;
    Ok(())
}

fn fit(a: &FitArgs, w: &mut dyn Write) -> anyhow::Result<()> {
    let gamma = match a.gamma {
        Some(g) => g,
        None => {
            let dir = a.input.parent().unwrap_or(Path::new("."));
            let m = RunManifest::load(&dir.join(manifest::MANIFEST_FILE))
                .context("no --gamma given and no sweep manifest next to the input")?;
            m.gamma
        }
    };
    let gas = GasModel::new(gamma)?;
    let rows = output::read_sweep_errors(&a.input)?;
    let eps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rho: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let m: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let report = FitReport {
        gamma,
        density: fit_points(&eps, &rho, &ExponentModel::new(&gas, Quantity::Density))?,
        momentum: fit_points(&eps, &m, &ExponentModel::new(&gas, Quantity::Momentum))?,
    };
    w.write_all(output::to_json(&report)?.as_bytes())?;
    Ok(())
}
