//! Explicit finite-volume solver for the viscous isentropic system
//!
//! ```text
//! rho_t + m_x = 0
//! m_t + (m^2/rho + p(rho))_x = eps u_xx,   u = m / rho
//! ```
//!
//! Rusanov fluxes with optional minmod-limited reconstruction of `(rho, u)`,
//! a central viscous flux, and forward Euler (order 1) or Heun (order 2) in time.
//! Two ghost cells per side are filled from a [`GhostSource`] at the stage time.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::gasdyn::GasModel;
use crate::smoothwave::{ApproxWave, TRANSITION_HALF_WIDTH};

/// Margin, in units of `delta`, between the wave support at `t_end` and the boundary.
pub const BOUNDARY_MARGIN: f64 = 20.0;

const GHOSTS: usize = 2;

// 3-point Gauss-Legendre on [-1/2, 1/2].
const GAUSS3_X: [f64; 3] = [-0.387_298_334_620_741_7, 0.0, 0.387_298_334_620_741_7];
const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::Config(format!(
                "invalid domain [{x_left}, {x_right}]"
            )));
        }
        if n_cells < 16 {
            return Err(Error::Config(format!(
                "need at least 16 cells, got {n_cells}"
            )));
        }
        Ok(Self {
            x_left,
            x_right,
            n_cells,
            dx: (x_right - x_left) / n_cells as f64,
        })
    }

    /// Domain covering the smoothed transition at `t = 0` and the whole wave up to
    /// `t_end` with a margin, resolved with `cells_per_delta` cells per smoothing length.
    pub fn for_wave(aw: &ApproxWave, t_end: f64, cells_per_delta: f64) -> Result<Self> {
        if !(cells_per_delta > 0.0) {
            return Err(Error::Config(format!(
                "cells_per_delta = {cells_per_delta} must be positive"
            )));
        }
        let p = aw.profile();
        let d = p.delta();
        let half = TRANSITION_HALF_WIDTH * d;
        let x_left = (-half).min(t_end * p.w_minus() - BOUNDARY_MARGIN * d);
        let x_right = half.max(t_end * p.w_plus() + BOUNDARY_MARGIN * d);
        let n = ((x_right - x_left) * cells_per_delta / d).ceil() as usize;
        Self::new(x_left, x_right, n.max(16))
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center of cell `i`; negative or out-of-range indices address ghost cells.
    #[inline]
    pub fn center(&self, i: isize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells as isize).map(|i| self.center(i)).collect()
    }

    /// Same domain with twice as many cells.
    pub fn refined(&self) -> Self {
        Self {
            n_cells: 2 * self.n_cells,
            dx: 0.5 * self.dx,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn uniform(grid: Grid, rho: f64, u: f64, t: f64) -> Self {
        Self {
            grid,
            rho: vec![rho; grid.n_cells],
            m: vec![rho * u; grid.n_cells],
            t,
        }
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.m).map(|(r, m)| m / r).collect()
    }

    pub fn min_density(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |u| + c` over the cells.
    pub fn max_signal_speed(&self, gas: &GasModel) -> f64 {
        self.rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| (m / r).abs() + gas.sound_speed(r))
            .fold(0.0, f64::max)
    }

    /// Averages pairs of cells onto the grid with half the resolution.
    pub fn coarsened(&self) -> Result<Self> {
        if !self.grid.n_cells.is_multiple_of(2) {
            return Err(Error::Config(
                "cannot coarsen an odd number of cells".into(),
            ));
        }
        let grid = Grid::new(self.grid.x_left, self.grid.x_right, self.grid.n_cells / 2)?;
        let pair = |v: &[f64]| v.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        Ok(Self {
            grid,
            rho: pair(&self.rho),
            m: pair(&self.m),
            t: self.t,
        })
    }
}

pub fn mass_total(state: &FieldState) -> f64 {
    state.rho.iter().sum::<f64>() * state.grid.dx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpatialOrder {
    First,
    Second,
}

impl TryFrom<u32> for SpatialOrder {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            _ => Err(Error::Config(format!("order must be 1 or 2, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub cfl: f64,
    pub order: SpatialOrder,
    pub t_end: f64,
    /// Optional cap on the time step.
    pub dt_max: Option<f64>,
    pub exec: Exec,
}

impl SolverConfig {
    pub fn new(epsilon: f64, cfl: f64, order: SpatialOrder, t_end: f64) -> Result<Self> {
        let c = Self {
            epsilon,
            cfl,
            order,
            t_end,
            dt_max: None,
            exec: Exec::default(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(Error::Config(format!(
                "cfl = {} must lie in (0, 0.9]",
                self.cfl
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "t_end = {} must be nonnegative",
                self.t_end
            )));
        }
        if let Some(d) = self.dt_max {
            if !(d > 0.0) {
                return Err(Error::Config(format!("dt_max = {d} must be positive")));
            }
        }
        Ok(())
    }
}

/// Supplies `(rho, u)` for ghost cells.
pub trait GhostSource: Sync {
    fn gas(&self) -> &GasModel;
    fn ghost(&self, x: f64, t: f64) -> Result<(f64, f64)>;
}

impl GhostSource for ApproxWave {
    fn gas(&self) -> &GasModel {
        ApproxWave::gas(self)
    }

    fn ghost(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        self.eval_point(x, t)
    }
}

/// A constant far-field state, for uniform-flow tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantState {
    pub gas: GasModel,
    pub rho: f64,
    pub u: f64,
}

impl GhostSource for ConstantState {
    fn gas(&self) -> &GasModel {
        &self.gas
    }

    fn ghost(&self, _x: f64, _t: f64) -> Result<(f64, f64)> {
        Ok((self.rho, self.u))
    }
}

/// Cell averages of `(rho_bar, rho_bar u_bar)` at time `t` by 3-point Gauss per cell.
pub fn project_wave(
    aw: &ApproxWave,
    grid: &Grid,
    t: f64,
    exec: Exec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let cells = map_range(exec, grid.n_cells, |i| -> Result<(f64, f64)> {
        let xc = grid.center(i as isize);
        let (mut r, mut m) = (0.0, 0.0);
        for (gx, gw) in GAUSS3_X.iter().zip(GAUSS3_W) {
            let (rho, u) = aw.eval_point(xc + gx * grid.dx, t)?;
            r += gw * rho;
            m += gw * rho * u;
        }
        Ok((r, m))
    });
    let mut rho = Vec::with_capacity(grid.n_cells);
    let mut m = Vec::with_capacity(grid.n_cells);
    for c in cells {
        let (r, mm) = c?;
        rho.push(r);
        m.push(mm);
    }
    Ok((rho, m))
}

pub fn init_from_wave(aw: &ApproxWave, grid: &Grid) -> Result<FieldState> {
    let half = TRANSITION_HALF_WIDTH * aw.profile().delta();
    if grid.x_left > -half || grid.x_right < half {
        return Err(Error::Config(format!(
            "domain [{}, {}] does not contain the initial transition [{}, {}]",
            grid.x_left, grid.x_right, -half, half
        )));
    }
    let (rho, m) = project_wave(aw, grid, 0.0, Exec::Sequential)?;
    Ok(FieldState {
        grid: *grid,
        rho,
        m,
        t: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Mass that entered through the two boundaries during the step.
    pub boundary_mass_in: f64,
}

/// `cfl * min(dx / max(|u| + c), dx^2 min(rho) / (2 eps))`, capped by `dt_max`.
pub fn stable_dt(state: &FieldState, config: &SolverConfig, gas: &GasModel) -> f64 {
    let dx = state.grid.dx;
    let s = state.max_signal_speed(gas);
    let hyper = if s > 0.0 { dx / s } else { f64::INFINITY };
    let visc = dx * dx * state.min_density() / (2.0 * config.epsilon);
    let dt = config.cfl * hyper.min(visc);
    config.dt_max.map_or(dt, |cap| dt.min(cap))
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

#[inline]
fn rusanov(gas: &GasModel, (rl, ul): (f64, f64), (rr, ur): (f64, f64)) -> (f64, f64) {
    let (ml, mr) = (rl * ul, rr * ur);
    let (fl, fr) = (ml * ul + gas.p(rl), mr * ur + gas.p(rr));
    let a = (ul.abs() + gas.sound_speed(rl)).max(ur.abs() + gas.sound_speed(rr));
    (
        0.5 * (ml + mr) - 0.5 * a * (rr - rl),
        0.5 * (fl + fr) - 0.5 * a * (mr - ml),
    )
}

/// Time derivative of the cell averages plus the net boundary mass inflow rate.
fn rhs<B: GhostSource>(
    rho: &[f64],
    m: &[f64],
    t: f64,
    grid: &Grid,
    config: &SolverConfig,
    bc: &B,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let n = grid.n_cells;
    let gas = *bc.gas();
    let mut pr = Vec::with_capacity(n + 2 * GHOSTS);
    let mut pu = Vec::with_capacity(n + 2 * GHOSTS);
    for g in (1..=GHOSTS).rev() {
        let (r, u) = bc.ghost(grid.center(-(g as isize)), t)?;
        pr.push(r);
        pu.push(u);
    }
    for i in 0..n {
        pr.push(rho[i]);
        pu.push(m[i] / rho[i]);
    }
    for g in 0..GHOSTS {
        let (r, u) = bc.ghost(grid.center((n + g) as isize), t)?;
        pr.push(r);
        pu.push(u);
    }

    let second = config.order == SpatialOrder::Second;
    let eps_dx = config.epsilon / grid.dx;
    // Interface k sits between extended cells k+1 and k+2, i.e. physical cells k-1 and k.
    let flux = map_range(config.exec, n + 1, |k| {
        let l = k + 1;
        let r = k + 2;
        let (mut left, mut right) = ((pr[l], pu[l]), (pr[r], pu[r]));
        if second {
            let sl_r = minmod(pr[l] - pr[l - 1], pr[r] - pr[l]);
            let sl_u = minmod(pu[l] - pu[l - 1], pu[r] - pu[l]);
            let sr_r = minmod(pr[r] - pr[l], pr[r + 1] - pr[r]);
            let sr_u = minmod(pu[r] - pu[l], pu[r + 1] - pu[r]);
            left = (pr[l] + 0.5 * sl_r, pu[l] + 0.5 * sl_u);
            right = (pr[r] - 0.5 * sr_r, pu[r] - 0.5 * sr_u);
        }
        let (fm, fp) = rusanov(&gas, left, right);
        (fm, fp - eps_dx * (pu[r] - pu[l]))
    });

    let inv_dx = 1.0 / grid.dx;
    let d_rho: Vec<f64> = (0..n)
        .map(|i| -(flux[i + 1].0 - flux[i].0) * inv_dx)
        .collect();
    let d_m: Vec<f64> = (0..n)
        .map(|i| -(flux[i + 1].1 - flux[i].1) * inv_dx)
        .collect();
    Ok((d_rho, d_m, flux[0].0 - flux[n].0))
}

fn check_density(rho: &[f64], t: f64) -> Result<()> {
    match rho.iter().position(|r| !(*r > 0.0) || !r.is_finite()) {
        Some(cell) => Err(Error::VacuumBreach {
            cell,
            t,
            rho: rho[cell],
        }),
        None => Ok(()),
    }
}

/// One step of size `dt`.
pub fn step_with_dt<B: GhostSource>(
    state: &FieldState,
    config: &SolverConfig,
    bc: &B,
    dt: f64,
) -> Result<(FieldState, StepReport)> {
    if !(dt > 1e-14 * (1.0 + state.t.abs())) {
        return Err(Error::Stiffness { t: state.t, dt });
    }
    let grid = &state.grid;
    let (dr1, dm1, q1) = rhs(&state.rho, &state.m, state.t, grid, config, bc)?;
    let r1: Vec<f64> = state
        .rho
        .iter()
        .zip(&dr1)
        .map(|(r, d)| r + dt * d)
        .collect();
    let m1: Vec<f64> = state.m.iter().zip(&dm1).map(|(m, d)| m + dt * d).collect();
    check_density(&r1, state.t + dt)?;
    let (rho, m, inflow) = match config.order {
        SpatialOrder::First => (r1, m1, dt * q1),
        SpatialOrder::Second => {
            let (dr2, dm2, q2) = rhs(&r1, &m1, state.t + dt, grid, config, bc)?;
            let rho: Vec<f64> = (0..grid.n_cells)
                .map(|i| 0.5 * (state.rho[i] + r1[i] + dt * dr2[i]))
                .collect();
            let m: Vec<f64> = (0..grid.n_cells)
                .map(|i| 0.5 * (state.m[i] + m1[i] + dt * dm2[i]))
                .collect();
            check_density(&rho, state.t + dt)?;
            (rho, m, 0.5 * dt * (q1 + q2))
        }
    };
    Ok((
        FieldState {
            grid: *grid,
            rho,
            m,
            t: state.t + dt,
        },
        StepReport {
            dt,
            boundary_mass_in: inflow,
        },
    ))
}

/// One step with the stable time step.
pub fn step<B: GhostSource>(
    state: &FieldState,
    config: &SolverConfig,
    bc: &B,
) -> Result<(FieldState, StepReport)> {
    let dt = stable_dt(state, config, bc.gas());
    step_with_dt(state, config, bc, dt)
}

/// Advances to `t_target`, calling `observe` after every step. The last step is
/// shortened so the state lands exactly on `t_target`.
pub fn advance_to_with<B, F>(
    state: &FieldState,
    config: &SolverConfig,
    bc: &B,
    t_target: f64,
    mut observe: F,
) -> Result<FieldState>
where
    B: GhostSource,
    F: FnMut(&FieldState, &StepReport) -> Result<()>,
{
    if !(t_target >= state.t) {
        return Err(Error::Config(format!(
            "target time {t_target} precedes state time {}",
            state.t
        )));
    }
    let mut cur = state.clone();
    while cur.t < t_target {
        let dt = stable_dt(&cur, config, bc.gas());
        let remaining = t_target - cur.t;
        let last = remaining <= dt * (1.0 + 1e-12);
        let (mut next, report) = step_with_dt(&cur, config, bc, if last { remaining } else { dt })?;
        if last {
            next.t = t_target;
        }
        observe(&next, &report)?;
        cur = next;
    }
    Ok(cur)
}

pub fn advance_to<B: GhostSource>(
    state: &FieldState,
    config: &SolverConfig,
    bc: &B,
    t_target: f64,
) -> Result<FieldState> {
    advance_to_with(state, config, bc, t_target, |_, _| Ok(()))
}

/// Writes `x,rho,m,u` rows.
pub fn write_snapshot_csv<W: Write>(state: &FieldState, mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,rho,m,u")?;
    for i in 0..state.grid.n_cells {
        let (r, m) = (state.rho[i], state.m[i]);
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            state.grid.center(i as isize),
            r,
            m,
            m / r
        )?;
    }
    Ok(())
}
