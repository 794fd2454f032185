//! Epsilon sweeps against the exact vacuum fan.
//!
//! A case builds the schedule `mu(eps)`, `delta(eps)`, smooths the cut-off fan,
//! runs the viscous solver from that well-prepared data and records
//!
//! - sup-norm errors of `rho` and `m` against the exact fan, maximised over the
//!   sample times in `[h, t_end]`;
//! - the weighted perturbation energy in the scaled variables `y = x/eps`,
//!   `tau = t/eps`, and its time-integrated dissipation;
//! - runtime monitors (positivity, signal speed, the small-perturbation bound).
//!
//! Records are then reduced to log-log rate fits.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_items, map_range, Exec};
use crate::gasdyn::{eval_cutoff_wave, eval_exact_wave, CutoffWave, GasModel, RightState};
use crate::nssolver::{
    advance_to_with, init_from_wave, project_wave, FieldState, Grid, SolverConfig, SpatialOrder,
};
use crate::smoothwave::{
    eval_approx_wave, make_schedule, rate_exponents, ApproxWave, RateExponents, Schedule,
};

pub const DEFAULT_SAMPLE_COUNT: usize = 8;
pub const DEFAULT_ENERGY_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gas: GasModel,
    pub right: RightState,
    pub epsilons: Vec<f64>,
    pub h: f64,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub c_mu: f64,
    pub cells_per_delta: f64,
    pub order: SpatialOrder,
    pub cfl: f64,
    /// Number of equispaced times in `(0, t_end]` at which the energy functional is
    /// evaluated; the sample times are always included.
    pub energy_samples: usize,
    pub exec: Exec,
}

/// `n` equispaced times from `h` to `t_end` inclusive.
pub fn equispaced_times(h: f64, t_end: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![t_end];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                t_end
            } else {
                h + (t_end - h) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl SweepConfig {
    /// Config with the default sample times, resolution and scheme settings.
    pub fn new(
        gas: GasModel,
        right: RightState,
        epsilons: Vec<f64>,
        h: f64,
        t_end: f64,
        c_mu: f64,
    ) -> Result<Self> {
        let c = Self {
            gas,
            right,
            epsilons,
            h,
            t_end,
            sample_times: equispaced_times(h, t_end, DEFAULT_SAMPLE_COUNT),
            c_mu,
            cells_per_delta: 50.0,
            order: SpatialOrder::Second,
            cfl: 0.45,
            energy_samples: DEFAULT_ENERGY_SAMPLES,
            exec: Exec::default(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < self.t_end) {
            return Err(Error::Config(format!(
                "need 0 < h < t_end, got h = {}, t_end = {}",
                self.h, self.t_end
            )));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilons must not be empty".into()));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("epsilons must be strictly decreasing".into()));
        }
        if self.sample_times.is_empty()
            || self
                .sample_times
                .iter()
                .any(|&t| !(t >= self.h && t <= self.t_end))
            || self.sample_times.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::Config(format!(
                "sample times must be increasing and lie in [h, t_end] = [{}, {}]",
                self.h, self.t_end
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(Error::Config(format!(
                "cfl = {} must lie in (0, 0.9]",
                self.cfl
            )));
        }
        if !(self.cells_per_delta > 0.0) {
            return Err(Error::Config(format!(
                "cells_per_delta = {} must be positive",
                self.cells_per_delta
            )));
        }
        if self.energy_samples == 0 {
            return Err(Error::Config("energy_samples must be at least 1".into()));
        }
        for &e in &self.epsilons {
            make_schedule(&self.gas, &self.right, e, self.c_mu)?;
        }
        Ok(())
    }

    pub fn rates(&self) -> RateExponents {
        rate_exponents(&self.gas)
    }
}

// ---------------------------------------------------------------------------
// Perturbations, energies and source terms

/// Perturbation `(phi, psi) = (rho - rho_bar, u - u_bar)` per cell, together with
/// the reference wave and its point derivatives at the cell centers.
///
/// The reference density is the cell average of `rho_bar` and the reference
/// velocity is `avg(rho_bar u_bar) / avg(rho_bar)`, which makes the
/// perturbation vanish identically on the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub dx: f64,
    pub t: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub rho_bar: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub rho_bar_x: Vec<f64>,
    pub u_bar_x: Vec<f64>,
    pub u_bar_xx: Vec<f64>,
    pub gamma: f64,
}

pub fn perturbation_fields(
    state: &FieldState,
    aw: &ApproxWave,
    exec: Exec,
) -> Result<Perturbation> {
    let grid = &state.grid;
    let (rho_bar, m_bar) = project_wave(aw, grid, state.t, exec)?;
    let derivs = map_range(exec, grid.n_cells(), |i| {
        eval_approx_wave(aw, grid.center(i as isize), state.t)
    });
    let n = grid.n_cells();
    let mut p = Perturbation {
        dx: grid.dx(),
        t: state.t,
        phi: Vec::with_capacity(n),
        psi: Vec::with_capacity(n),
        rho: state.rho.clone(),
        u: state.velocity(),
        u_bar: Vec::with_capacity(n),
        rho_bar_x: Vec::with_capacity(n),
        u_bar_x: Vec::with_capacity(n),
        u_bar_xx: Vec::with_capacity(n),
        rho_bar,
        gamma: aw.gas().gamma(),
    };
    for (i, d) in derivs.into_iter().enumerate() {
        let d = d?;
        let ub = m_bar[i] / p.rho_bar[i];
        p.phi.push(state.rho[i] - p.rho_bar[i]);
        p.psi.push(p.u[i] - ub);
        p.u_bar.push(ub);
        p.rho_bar_x.push(d.rho_x);
        p.u_bar_x.push(d.u_x);
        p.u_bar_xx.push(d.u_xx);
    }
    Ok(p)
}

/// Centered first difference, one-sided at the ends.
pub(crate) fn diff1(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| match i {
            0 => (v[1] - v[0]) / dx,
            _ if i == n - 1 => (v[n - 1] - v[n - 2]) / dx,
            _ => (v[i + 1] - v[i - 1]) / (2.0 * dx),
        })
        .collect()
}

/// Centered second difference, zero at the ends.
pub(crate) fn diff2(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                0.0
            } else {
                (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx)
            }
        })
        .collect()
}

/// Instantaneous energy terms in the scaled variables.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyInstant {
    /// `int (rho_bar psi^2 + rho_bar^(gamma-2) phi^2) dy`
    pub e_quadratic: f64,
    /// `int (phi_y^2 + psi_y^2) dy`
    pub e_gradient: f64,
    /// `int [psi_y^2 + rho_bar^(gamma-2) u_bar_y phi^2 + rho_bar u_bar_y psi^2
    ///  + rho_bar^(gamma-3) phi_y^2 + psi_yy^2 / rho_bar] dy`
    pub dissipation_rate: f64,
    pub phi_sup: f64,
    /// `||psi_y||_{L^2(dy)}`
    pub psi_y_l2: f64,
}

impl EnergyInstant {
    pub fn total(&self) -> f64 {
        self.e_quadratic + self.e_gradient
    }
}

/// Evaluates the functional on `x`-grid data using `int f dy = eps^-1 int f dx`
/// and `d/dy = eps d/dx`.
pub fn energy_functional(p: &Perturbation, epsilon: f64) -> EnergyInstant {
    let g = p.gamma;
    let phi_x = diff1(&p.phi, p.dx);
    let psi_x = diff1(&p.psi, p.dx);
    let psi_xx = diff2(&p.psi, p.dx);
    let (mut quad, mut grad_phi, mut grad_psi) = (0.0, 0.0, 0.0);
    let (mut d_phi_w, mut d_psi_w, mut d_phiy, mut d_psiyy) = (0.0, 0.0, 0.0, 0.0);
    let mut sup = 0.0_f64;
    for i in 0..p.phi.len() {
        let rb = p.rho_bar[i];
        let (phi, psi) = (p.phi[i], p.psi[i]);
        let ux = p.u_bar_x[i].max(0.0);
        quad += rb * psi * psi + rb.powf(g - 2.0) * phi * phi;
        grad_phi += phi_x[i] * phi_x[i];
        grad_psi += psi_x[i] * psi_x[i];
        d_phi_w += rb.powf(g - 2.0) * ux * phi * phi;
        d_psi_w += rb * ux * psi * psi;
        d_phiy += rb.powf(g - 3.0) * phi_x[i] * phi_x[i];
        d_psiyy += psi_xx[i] * psi_xx[i] / rb;
        sup = sup.max(phi.abs());
    }
    let dx = p.dx;
    let e = epsilon;
    EnergyInstant {
        e_quadratic: quad * dx / e,
        e_gradient: (grad_phi + grad_psi) * dx * e,
        dissipation_rate: (grad_psi * e + d_phi_w + d_psi_w + d_phiy * e + d_psiyy * e * e * e)
            * dx,
        phi_sup: sup,
        psi_y_l2: (grad_psi * dx * e).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Peak over time of the quadratic part.
    pub e_quadratic: f64,
    /// Peak over time of the gradient part.
    pub e_gradient: f64,
    /// Peak over time of the instantaneous functional.
    pub energy_peak: f64,
    pub dissipation: f64,
    /// `(energy_peak + dissipation) / (eps^(1/2-a) |ln eps|^(-1/2))`
    pub bound_ratio: f64,
}

/// Tracks the running peak of the functional and integrates the dissipation
/// rate in `tau` by the trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyAccumulator {
    peak: f64,
    peak_quadratic: f64,
    peak_gradient: f64,
    dissipation: f64,
    last: Option<(f64, f64)>,
    phi_sup: f64,
    psi_y_sup: f64,
}

impl EnergyAccumulator {
    pub fn push(&mut self, tau: f64, e: &EnergyInstant) {
        self.peak = self.peak.max(e.total());
        self.peak_quadratic = self.peak_quadratic.max(e.e_quadratic);
        self.peak_gradient = self.peak_gradient.max(e.e_gradient);
        self.phi_sup = self.phi_sup.max(e.phi_sup);
        self.psi_y_sup = self.psi_y_sup.max(e.psi_y_l2);
        if let Some((t0, r0)) = self.last {
            self.dissipation += 0.5 * (tau - t0) * (r0 + e.dissipation_rate);
        }
        self.last = Some((tau, e.dissipation_rate));
    }

    pub fn phi_sup(&self) -> f64 {
        self.phi_sup
    }

    pub fn psi_y_sup(&self) -> f64 {
        self.psi_y_sup
    }

    pub fn report(&self, epsilon: f64, rates: &RateExponents) -> EnergyReport {
        EnergyReport {
            e_quadratic: self.peak_quadratic,
            e_gradient: self.peak_gradient,
            energy_peak: self.peak,
            dissipation: self.dissipation,
            bound_ratio: (self.peak + self.dissipation) / rates.energy_scale(epsilon),
        }
    }
}

/// Source terms `(f, g)` of the perturbation system in the scaled variables.
pub fn source_terms(p: &Perturbation, gas: &GasModel, epsilon: f64) -> (Vec<f64>, Vec<f64>) {
    let e = epsilon;
    let mut f = Vec::with_capacity(p.phi.len());
    let mut g = Vec::with_capacity(p.phi.len());
    for i in 0..p.phi.len() {
        let (phi, psi) = (p.phi[i], p.psi[i]);
        let rb = p.rho_bar[i];
        let rho = rb + phi;
        let uy = e * p.u_bar_x[i];
        let ry = e * p.rho_bar_x[i];
        let uyy = e * e * p.u_bar_xx[i];
        f.push(uy * phi + ry * psi);
        g.push(-uyy + rho * psi * uy + ry * (gas.dp(rho) - rho / rb * gas.dp(rb)));
    }
    (f, g)
}

/// Residual of `phi_tau + rho psi_y + u phi_y + f` per cell, with the time
/// derivative taken by a central difference over `prev` and `next`.
pub fn mass_residual(
    prev: &Perturbation,
    cur: &Perturbation,
    next: &Perturbation,
    gas: &GasModel,
    epsilon: f64,
) -> Result<Vec<f64>> {
    let n = cur.phi.len();
    if prev.phi.len() != n || next.phi.len() != n {
        return Err(Error::Config("residual snapshots must share a grid".into()));
    }
    let span = next.t - prev.t;
    if !(span > 0.0) {
        return Err(Error::Config(
            "residual snapshots must be ordered in time".into(),
        ));
    }
    let (f, _) = source_terms(cur, gas, epsilon);
    let phi_x = diff1(&cur.phi, cur.dx);
    let psi_x = diff1(&cur.psi, cur.dx);
    Ok((0..n)
        .map(|i| {
            let phi_t = (next.phi[i] - prev.phi[i]) / span;
            epsilon * (phi_t + cur.rho[i] * psi_x[i] + cur.u[i] * phi_x[i]) + f[i]
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Cut-off gap

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffGap {
    pub rho: f64,
    pub m: f64,
    /// `max(rho, m)`
    pub combined: f64,
}

/// Sup over the `xi` samples of the distance between the cut-off and exact fans.
pub fn cutoff_gap(cw: &CutoffWave, xi_grid: &[f64]) -> CutoffGap {
    let (mut gr, mut gm) = (0.0_f64, 0.0_f64);
    for &xi in xi_grid {
        let a = eval_cutoff_wave(cw, xi);
        let b = eval_exact_wave(cw.base(), xi);
        gr = gr.max((a.rho - b.rho).abs());
        gm = gm.max((a.m - b.m).abs());
    }
    CutoffGap {
        rho: gr,
        m: gm,
        combined: gr.max(gm),
    }
}

// ---------------------------------------------------------------------------
// Cases and sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub mu: f64,
    pub delta: f64,
    pub err_rho_inf: f64,
    pub err_m_inf: f64,
    pub ratio_rho: f64,
    pub ratio_m: f64,
    pub energy_peak: f64,
    pub dissipation_total: f64,
    pub bound_ratio: f64,
    pub runtime_s: f64,
    pub n_cells: usize,
    pub steps: usize,
    pub meets_floor: bool,
    /// `sup |phi|` over the run; compared with `eps^a`.
    pub phi_sup: f64,
    pub apriori_ok: bool,
    /// `min rho / mu` over the run.
    pub min_rho_over_mu: f64,
    /// Peak `max|u|+c` relative to its initial value.
    pub signal_growth: f64,
}

impl SweepRecord {
    pub const CSV_HEADER: [&'static str; 10] = [
        "epsilon",
        "mu",
        "delta",
        "err_rho_inf",
        "err_m_inf",
        "ratio_rho",
        "ratio_m",
        "energy_peak",
        "dissipation_total",
        "runtime_s",
    ];

    pub fn csv_values(&self) -> [f64; 10] {
        [
            self.epsilon,
            self.mu,
            self.delta,
            self.err_rho_inf,
            self.err_m_inf,
            self.ratio_rho,
            self.ratio_m,
            self.energy_peak,
            self.dissipation_total,
            self.runtime_s,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub rho_eps: Vec<f64>,
    pub rho_exact: Vec<f64>,
    pub m_eps: Vec<f64>,
    pub m_exact: Vec<f64>,
}

impl ProfileSnapshot {
    pub const CSV_HEADER: [&'static str; 5] = ["x", "rho_eps", "rho_exact", "m_eps", "m_exact"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutput {
    pub record: SweepRecord,
    pub schedule: Schedule,
    pub snapshots: Vec<ProfileSnapshot>,
    pub energy: EnergyReport,
}

fn profile_against_exact(state: &FieldState, aw: &ApproxWave) -> ProfileSnapshot {
    let x = state.grid.centers();
    let t = state.t;
    let (rho_exact, m_exact) = x
        .iter()
        .map(|&xi| {
            let s = eval_exact_wave(aw.exact(), xi / t);
            (s.rho, s.m)
        })
        .unzip();
    ProfileSnapshot {
        t,
        x,
        rho_eps: state.rho.clone(),
        rho_exact,
        m_eps: state.m.clone(),
        m_exact,
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Energy times merged with the sample times, tagged with whether they are samples.
fn checkpoints(config: &SweepConfig) -> Vec<(f64, bool)> {
    let n = config.energy_samples;
    let mut out: Vec<(f64, bool)> = (1..=n)
        .map(|k| (config.t_end * k as f64 / n as f64, false))
        .chain(config.sample_times.iter().map(|&t| (t, true)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let tol = 1e-9 * config.t_end;
    out.dedup_by(|later, kept| later.0 <= kept.0 + tol);
    out
}

pub fn run_case(config: &SweepConfig, epsilon: f64) -> Result<CaseOutput> {
    let started = Instant::now();
    let schedule = make_schedule(&config.gas, &config.right, epsilon, config.c_mu)?;
    let aw = ApproxWave::from_schedule(config.gas, config.right, &schedule)?;
    let grid = Grid::for_wave(&aw, config.t_end, config.cells_per_delta)?;
    let solver = SolverConfig {
        epsilon,
        cfl: config.cfl,
        order: config.order,
        t_end: config.t_end,
        dt_max: None,
        exec: config.exec,
    };
    solver.validate()?;
    let rates = config.rates();
    let gas = config.gas;

    let mut state = init_from_wave(&aw, &grid)?;
    let signal0 = state.max_signal_speed(&gas);
    let mut acc = EnergyAccumulator::default();
    acc.push(
        0.0,
        &energy_functional(&perturbation_fields(&state, &aw, config.exec)?, epsilon),
    );
    let mut steps = 0usize;
    let mut min_rho = state.min_density();
    let mut signal_peak = signal0;
    let mut snapshots = Vec::with_capacity(config.sample_times.len());

    for (t_next, is_sample) in checkpoints(config) {
        state = advance_to_with(&state, &solver, &aw, t_next, |s, _| {
            steps += 1;
            min_rho = min_rho.min(s.min_density());
            signal_peak = signal_peak.max(s.max_signal_speed(&gas));
            Ok(())
        })?;
        let p = perturbation_fields(&state, &aw, config.exec)?;
        acc.push(state.t / epsilon, &energy_functional(&p, epsilon));
        if is_sample {
            snapshots.push(profile_against_exact(&state, &aw));
        }
    }

    let err_rho = snapshots
        .iter()
        .map(|s| sup_diff(&s.rho_eps, &s.rho_exact))
        .fold(0.0, f64::max);
    let err_m = snapshots
        .iter()
        .map(|s| sup_diff(&s.m_eps, &s.m_exact))
        .fold(0.0, f64::max);
    let energy = acc.report(epsilon, &rates);
    let record = SweepRecord {
        epsilon,
        mu: schedule.mu,
        delta: schedule.delta,
        err_rho_inf: err_rho,
        err_m_inf: err_m,
        ratio_rho: err_rho / rates.density_scale(epsilon),
        ratio_m: err_m / rates.momentum_scale(epsilon),
        energy_peak: energy.energy_peak,
        dissipation_total: energy.dissipation,
        bound_ratio: energy.bound_ratio,
        runtime_s: started.elapsed().as_secs_f64(),
        n_cells: grid.n_cells(),
        steps,
        meets_floor: schedule.meets_floor(),
        phi_sup: acc.phi_sup(),
        apriori_ok: acc.phi_sup() <= schedule.delta && acc.psi_y_sup() <= 1.0,
        min_rho_over_mu: min_rho / schedule.mu,
        signal_growth: signal_peak / signal0,
    };
    Ok(CaseOutput {
        record,
        schedule,
        snapshots,
        energy,
    })
}

/// Runs every epsilon of the sweep; cases may run concurrently and come back in sweep order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<CaseOutput>> {
    config.validate()?;
    map_items(config.exec, &config.epsilons, |&e| run_case(config, e))
        .into_iter()
        .collect()
}

// ---------------------------------------------------------------------------
// Rate fitting

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Density,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentModel {
    pub rates: RateExponents,
    pub quantity: Quantity,
}

impl ExponentModel {
    pub fn new(gas: &GasModel, quantity: Quantity) -> Self {
        Self {
            rates: rate_exponents(gas),
            quantity,
        }
    }

    pub fn scale(&self, eps: f64) -> f64 {
        match self.quantity {
            Quantity::Density => self.rates.density_scale(eps),
            Quantity::Momentum => self.rates.momentum_scale(eps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope of `ln err` against `ln eps`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// `err / scale(eps)` per point, in input order.
    pub ratio_series: Vec<f64>,
}

impl RateFit {
    /// Largest relative change `|r_{k+1} / r_k - 1|` between consecutive ratios.
    pub fn max_ratio_change(&self) -> f64 {
        self.ratio_series
            .windows(2)
            .map(|w| (w[1] / w[0] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Least-squares fit of `ln err = slope ln eps + intercept`.
pub fn fit_points(epsilons: &[f64], errors: &[f64], model: &ExponentModel) -> Result<RateFit> {
    if epsilons.len() != errors.len() {
        return Err(Error::Fit(
            "epsilon and error series differ in length".into(),
        ));
    }
    if epsilons.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points, got {}",
            epsilons.len()
        )));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Fit(format!(
            "errors must be positive and finite, got {e}"
        )));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::Fit(format!("epsilon {e} outside (0, 1)")));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("epsilons are not distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        ratio_series: epsilons
            .iter()
            .zip(errors)
            .map(|(&e, &err)| err / model.scale(e))
            .collect(),
    })
}

pub fn fit_rate(records: &[SweepRecord], model: &ExponentModel) -> Result<RateFit> {
    let eps: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    let errs: Vec<f64> = records
        .iter()
        .map(|r| match model.quantity {
            Quantity::Density => r.err_rho_inf,
            Quantity::Momentum => r.err_m_inf,
        })
        .collect();
    fit_points(&eps, &errs, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(gamma: f64) -> GasModel {
        GasModel::new(gamma).unwrap()
    }

    fn synthetic(phi: Vec<f64>, psi: Vec<f64>, rho_bar: f64, dx: f64, gamma: f64) -> Perturbation {
        let n = phi.len();
        Perturbation {
            dx,
            t: 0.0,
            rho: phi.iter().map(|p| rho_bar + p).collect(),
            u: psi.clone(),
            phi,
            psi,
            rho_bar: vec![rho_bar; n],
            u_bar: vec![0.0; n],
            rho_bar_x: vec![0.0; n],
            u_bar_x: vec![0.0; n],
            u_bar_xx: vec![0.0; n],
            gamma,
        }
    }

    #[test]
    fn perturbation_vanishes_on_initial_data() {
        let aw =
            ApproxWave::from_parts(g(2.0), RightState::new(1.0, 0.3).unwrap(), 0.1, 0.2).unwrap();
        let grid = Grid::for_wave(&aw, 1.0, 10.0).unwrap();
        let s = init_from_wave(&aw, &grid).unwrap();
        let p = perturbation_fields(&s, &aw, Exec::Sequential).unwrap();
        assert!(p.phi.iter().all(|v| v.abs() < 1e-15));
        assert!(p.psi.iter().all(|v| v.abs() < 1e-14));
        let e = energy_functional(&p, 1e-3);
        assert!(e.total() < 1e-20 && e.dissipation_rate < 1e-20);
    }

    #[test]
    fn quadratic_scaling() {
        let n = 200;
        let dx = 0.05;
        let phi: Vec<f64> = (0..n).map(|i| (0.1 * i as f64).sin() * 1e-2).collect();
        let psi: Vec<f64> = (0..n).map(|i| (0.07 * i as f64).cos() * 1e-2).collect();
        let p1 = synthetic(phi.clone(), psi.clone(), 0.7, dx, 2.5);
        let p2 = synthetic(
            phi.iter().map(|v| 2.0 * v).collect(),
            psi.iter().map(|v| 2.0 * v).collect(),
            0.7,
            dx,
            2.5,
        );
        let (e1, e2) = (energy_functional(&p1, 1e-2), energy_functional(&p2, 1e-2));
        assert!((e2.e_quadratic / e1.e_quadratic - 4.0).abs() < 1e-12);
        assert!((e2.e_gradient / e1.e_gradient - 4.0).abs() < 1e-12);
        assert!((e2.dissipation_rate / e1.dissipation_rate - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sine_potential_energy() {
        // rho_bar = 1, gamma = 2: int_0^{2 pi} sin^2 dx = pi, then dy = dx / eps.
        let n = 4096;
        let dx = 2.0 * std::f64::consts::PI / n as f64;
        let phi: Vec<f64> = (0..n).map(|i| ((i as f64 + 0.5) * dx).sin()).collect();
        let p = synthetic(phi, vec![0.0; n], 1.0, dx, 2.0);
        let eps = 0.01;
        let e = energy_functional(&p, eps);
        assert!((e.e_quadratic - std::f64::consts::PI / eps).abs() < 1e-9 / eps);
    }

    #[test]
    fn scaled_gradient_matches_y_grid() {
        // Oracle: resample onto y = x / eps and difference there directly.
        let n = 500;
        let dx = 0.01;
        let eps = 3e-3;
        let phi: Vec<f64> = (0..n)
            .map(|i| (-(i as f64 * dx - 2.5).powi(2)).exp())
            .collect();
        let p = synthetic(phi.clone(), vec![0.0; n], 1.0, dx, 2.0);
        let e = energy_functional(&p, eps);
        let dy = dx / eps;
        let mut direct = 0.0;
        for i in 0..n {
            let d = match i {
                0 => (phi[1] - phi[0]) / dy,
                _ if i == n - 1 => (phi[n - 1] - phi[n - 2]) / dy,
                _ => (phi[i + 1] - phi[i - 1]) / (2.0 * dy),
            };
            direct += d * d * dy;
        }
        assert!((e.e_gradient - direct).abs() <= 1e-8 * direct);
    }

    #[test]
    fn energies_nonnegative_for_arbitrary_fields() {
        let n = 64;
        let phi: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let psi: Vec<f64> = (0..n).map(|i| ((i * 104_729) % 11) as f64 - 5.0).collect();
        let mut p = synthetic(phi, psi, 0.3, 0.1, 1.4);
        p.u_bar_x = (0..n).map(|i| 0.1 * i as f64).collect();
        let e = energy_functional(&p, 0.02);
        assert!(e.e_quadratic >= 0.0 && e.e_gradient >= 0.0 && e.dissipation_rate >= 0.0);
        let mut acc = EnergyAccumulator::default();
        acc.push(0.0, &e);
        acc.push(1.0, &e);
        let r = acc.report(0.02, &rate_exponents(&g(1.4)));
        assert!(r.dissipation >= 0.0 && r.bound_ratio >= 0.0);
        let psi_only = (e.psi_y_l2 * e.psi_y_l2) * 1.0;
        assert!(r.dissipation >= psi_only - 1e-12);
    }

    #[test]
    fn source_terms_special_cases() {
        let aw =
            ApproxWave::from_parts(g(2.0), RightState::new(1.0, 0.3).unwrap(), 0.1, 0.2).unwrap();
        let grid = Grid::for_wave(&aw, 1.0, 10.0).unwrap();
        let s = init_from_wave(&aw, &grid).unwrap();
        let p = perturbation_fields(&s, &aw, Exec::Sequential).unwrap();
        let eps = 1e-2;
        let (f, gs) = source_terms(&p, &g(2.0), eps);
        for i in 0..f.len() {
            assert!(f[i].abs() < 1e-14);
            let expect = -eps * eps * p.u_bar_xx[i];
            assert!((gs[i] - expect).abs() < 1e-14);
        }
        let flat = synthetic(vec![0.01; 32], vec![0.02; 32], 1.0, 0.1, 2.0);
        let (f, gs) = source_terms(&flat, &g(2.0), eps);
        assert!(f.iter().chain(&gs).all(|v| *v == 0.0));
    }

    #[test]
    fn cutoff_gap_gamma3() {
        let exact = crate::gasdyn::build_exact_wave(g(3.0), RightState::new(1.0, 0.0).unwrap());
        let xi: Vec<f64> = (0..4001).map(|k| -3.0 + 6.0 * k as f64 / 4000.0).collect();
        let mut prev: Option<f64> = None;
        for mu in [0.2, 0.1, 0.05, 0.025] {
            let gap = cutoff_gap(&CutoffWave::new(exact, mu).unwrap(), &xi);
            assert!((gap.rho - mu).abs() < 1e-12);
            if let Some(p) = prev {
                assert!((p / gap.rho - 2.0f64).abs() < 1e-9);
            }
            prev = Some(gap.rho);
        }
    }

    #[test]
    fn fits() {
        let model = ExponentModel::new(&g(2.0), Quantity::Density);
        let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let errs: Vec<f64> = eps.iter().map(|e: &f64| e.powf(1.0 / 6.0)).collect();
        let fit = fit_points(&eps, &errs, &model).unwrap();
        assert!((fit.slope - 1.0 / 6.0).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-10);
        let scaled: Vec<f64> = errs.iter().map(|e| 7.0 * e).collect();
        let fit2 = fit_points(&eps, &scaled, &model).unwrap();
        assert!((fit2.slope - fit.slope).abs() < 1e-12);
        assert!((fit2.intercept - fit.intercept - 7f64.ln()).abs() < 1e-12);

        let mom = ExponentModel::new(&g(2.0), Quantity::Momentum);
        let errs: Vec<f64> = eps
            .iter()
            .map(|e: &f64| 3.0 * e.powf(0.125) * e.ln().abs().powf(-0.5))
            .collect();
        let fit = fit_points(&eps, &errs, &mom).unwrap();
        assert!(fit.ratio_series.iter().all(|r| (r - 3.0).abs() < 1e-9));
        assert!(fit.max_ratio_change() < 1e-9);

        assert!(fit_points(&eps[..2], &errs[..2], &mom).is_err());
        assert!(fit_points(&eps, &[1.0, 0.0, 1.0, 1.0], &mom).is_err());
    }

    #[test]
    fn sweep_config_validation() {
        let right = RightState::new(1.0, 0.0).unwrap();
        assert!(SweepConfig::new(g(2.0), right, vec![4e-3, 2e-3, 1e-3], 0.5, 2.0, 0.05).is_ok());
        assert!(SweepConfig::new(g(2.0), right, vec![2e-3, 4e-3], 0.5, 2.0, 0.05).is_err());
        assert!(SweepConfig::new(g(2.0), right, vec![4e-3], 2.0, 2.0, 0.05).is_err());
        assert!(SweepConfig::new(g(2.0), right, vec![4e-3], 0.5, 2.0, 1.0).is_err());
        let times = equispaced_times(0.5, 2.0, 8);
        assert_eq!(times.len(), 8);
        assert_eq!(times[0], 0.5);
        assert_eq!(times[7], 2.0);
    }
}
