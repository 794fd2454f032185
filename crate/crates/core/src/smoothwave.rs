//! Smooth approximate rarefaction built from the tanh-smoothed Burgers fan.
//!
//! The Burgers solution `w(x, t) = w_delta(x0)` with `x = x0 + t w_delta(x0)` is
//! exact and smooth for every `delta > 0`. Transporting it through
//! `lambda_2(rho, u) = w` and `Sigma_2(rho, u) = const` yields a smooth simple
//! wave `(rho_bar, u_bar)` that solves the inviscid system exactly and tends to
//! the cut-off fan as `delta -> 0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gasdyn::{
    build_exact_wave, eval_cutoff_wave, sigma2, CutoffWave, ExactWave, GasModel, RightState,
};
use crate::quad::{integrate, QuadOptions};

/// Half-width, in units of `delta`, of the window outside which `w_delta` is
/// constant to double precision.
pub const TRANSITION_HALF_WIDTH: f64 = 60.0;

// ---------------------------------------------------------------------------
// Rate exponents and the epsilon schedule

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MomentumRate {
    /// `eps^b |ln eps|^(-1/2)`, for `1 < gamma < 3`.
    Power { b: f64 },
    /// `eps^(1/(gamma+4)) |ln eps|`, for `gamma >= 3`.
    LogAugmented { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateExponents {
    pub a: f64,
    pub momentum: MomentumRate,
}

impl RateExponents {
    /// `eps^a |ln eps|`, the density rate.
    pub fn density_scale(&self, eps: f64) -> f64 {
        eps.powf(self.a) * eps.ln().abs()
    }

    pub fn momentum_scale(&self, eps: f64) -> f64 {
        match self.momentum {
            MomentumRate::Power { b } => eps.powf(b) * eps.ln().abs().powf(-0.5),
            MomentumRate::LogAugmented { exponent } => eps.powf(exponent) * eps.ln().abs(),
        }
    }

    /// `eps^(1/2 - a) |ln eps|^(-1/2)`, the scale of the perturbation energy.
    pub fn energy_scale(&self, eps: f64) -> f64 {
        eps.powf(0.5 - self.a) * eps.ln().abs().powf(-0.5)
    }
}

pub fn rate_exponents(gas: &GasModel) -> RateExponents {
    let g = gas.gamma();
    let a = if g <= 2.0 { 1.0 / 6.0 } else { 1.0 / (g + 4.0) };
    let momentum = if g <= 2.0 {
        MomentumRate::Power { b: 1.0 / 8.0 }
    } else if g < 3.0 {
        MomentumRate::Power {
            b: (g + 1.0) / (4.0 * (g + 4.0)),
        }
    } else {
        MomentumRate::LogAugmented {
            exponent: 1.0 / (g + 4.0),
        }
    };
    RateExponents { a, momentum }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub epsilon: f64,
    pub a: f64,
    pub mu: f64,
    pub delta: f64,
    pub c_mu: f64,
}

impl Schedule {
    /// Whether `mu >= 2 eps^a`, the margin the positivity argument relies on.
    /// Desk-scale sweeps with a reduced `c_mu` usually do not meet it.
    pub fn meets_floor(&self) -> bool {
        self.mu >= 2.0 * self.delta
    }
}

/// `mu = c_mu eps^a |ln eps|`, `delta = eps^a`.
pub fn make_schedule(
    gas: &GasModel,
    right: &RightState,
    epsilon: f64,
    c_mu: f64,
) -> Result<Schedule> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Infeasible(format!(
            "epsilon = {epsilon} must lie in (0, 1)"
        )));
    }
    if !(c_mu > 0.0 && c_mu.is_finite()) {
        return Err(Error::Infeasible(format!("c_mu = {c_mu} must be positive")));
    }
    let a = rate_exponents(gas).a;
    let delta = epsilon.powf(a);
    let mu = c_mu * delta * epsilon.ln().abs();
    let cap = 0.5 * right.rho_plus();
    if mu > cap {
        return Err(Error::Infeasible(format!(
            "mu = {mu:.6} exceeds rho_plus/2 = {cap} at epsilon = {epsilon:e}; lower c_mu (now {c_mu}) or epsilon"
        )));
    }
    Ok(Schedule {
        epsilon,
        a,
        mu,
        delta,
        c_mu,
    })
}

// ---------------------------------------------------------------------------
// Burgers profile

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersProfile {
    w_minus: f64,
    w_plus: f64,
    delta: f64,
}

impl BurgersProfile {
    pub fn new(w_minus: f64, w_plus: f64, delta: f64) -> Result<Self> {
        if !(w_minus < w_plus) || !w_minus.is_finite() || !w_plus.is_finite() {
            return Err(domain(
                "Burgers states must satisfy w_minus < w_plus",
                w_plus - w_minus,
            ));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(domain("smoothing length must be positive", delta));
        }
        Ok(Self {
            w_minus,
            w_plus,
            delta,
        })
    }

    pub fn w_minus(&self) -> f64 {
        self.w_minus
    }

    pub fn w_plus(&self) -> f64 {
        self.w_plus
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn strength(&self) -> f64 {
        self.w_plus - self.w_minus
    }

    /// `sech^2(z)` without overflow for large `|z|`.
    #[inline]
    fn sech2(z: f64) -> f64 {
        let e = (-2.0 * z.abs()).exp();
        4.0 * e / ((1.0 + e) * (1.0 + e))
    }

    /// `w_delta'(x)`.
    #[inline]
    pub fn d1(&self, x: f64) -> f64 {
        0.5 * self.strength() / self.delta * Self::sech2(x / self.delta)
    }

    /// `w_delta''(x)`.
    #[inline]
    pub fn d2(&self, x: f64) -> f64 {
        let z = x / self.delta;
        -self.strength() / (self.delta * self.delta) * Self::sech2(z) * z.tanh()
    }

    /// Spatial window `[t w_minus - 60 delta, t w_plus + 60 delta]` outside of which
    /// the solution is constant to double precision.
    pub fn support(&self, t: f64) -> (f64, f64) {
        let pad = TRANSITION_HALF_WIDTH * self.delta;
        (t * self.w_minus - pad, t * self.w_plus + pad)
    }
}

pub fn burgers_initial(profile: &BurgersProfile, x: f64) -> f64 {
    0.5 * (profile.w_plus + profile.w_minus) + 0.5 * profile.strength() * (x / profile.delta).tanh()
}

/// Foot of the characteristic through `(x, t)`: the root of `x0 + t w_delta(x0) = x`.
pub fn solve_x0(profile: &BurgersProfile, x: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(domain("time must be nonnegative", t));
    }
    if t == 0.0 {
        return Ok(x);
    }
    let f = |z: f64| z + t * burgers_initial(profile, z) - x;
    let mut lo = x - t * profile.w_plus;
    let mut hi = x - t * profile.w_minus;
    let mut z = (x - t * 0.5 * (profile.w_plus + profile.w_minus)).clamp(lo, hi);
    let mut last_step = hi - lo;
    for _ in 0..200 {
        let fz = f(z);
        if fz == 0.0 {
            return Ok(z);
        }
        if fz < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let dfz = 1.0 + t * profile.d1(z);
        let newton = z - fz / dfz;
        // Bisect when Newton leaves the bracket or fails to halve the previous step.
        let next = if newton > lo && newton < hi && (2.0 * fz).abs() <= (last_step * dfz).abs() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_step = (next - z).abs();
        let tiny = 4.0 * f64::EPSILON * (1.0 + next.abs());
        if last_step <= tiny || hi - lo <= tiny {
            return Ok(next);
        }
        z = next;
    }
    Err(Error::Numeric(format!(
        "characteristic root did not converge at x = {x}, t = {t}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersEval {
    pub x0: f64,
    pub w: f64,
    pub w_x: f64,
    pub w_xx: f64,
}

pub fn eval_w(profile: &BurgersProfile, x: f64, t: f64) -> Result<BurgersEval> {
    let x0 = solve_x0(profile, x, t)?;
    let s = profile.d1(x0);
    let q = 1.0 / (1.0 + t * s);
    Ok(BurgersEval {
        x0,
        w: burgers_initial(profile, x0),
        w_x: s * q,
        w_xx: profile.d2(x0) * q * q * q,
    })
}

/// The self-similar Burgers fan `w^r(x/t)`.
pub fn burgers_fan(profile: &BurgersProfile, xi: f64) -> f64 {
    xi.clamp(profile.w_minus, profile.w_plus)
}

// ---------------------------------------------------------------------------
// Approximate wave

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxWave {
    gas: GasModel,
    profile: BurgersProfile,
    sigma2: f64,
    cutoff: CutoffWave,
}

/// `(rho_bar, u_bar)` and the derivatives used by the energy diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxState {
    pub rho: f64,
    pub u: f64,
    pub rho_x: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub w: f64,
    pub w_x: f64,
}

impl ApproxWave {
    /// Smooths the cut-off fan `cw` over length `delta`.
    pub fn new(cw: CutoffWave, delta: f64) -> Result<Self> {
        let gas = *cw.base().gas();
        let profile = BurgersProfile::new(cw.tail_speed(), cw.base().head_speed(), delta)?;
        Ok(Self {
            gas,
            profile,
            sigma2: cw.base().sigma2(),
            cutoff: cw,
        })
    }

    pub fn from_parts(gas: GasModel, right: RightState, mu: f64, delta: f64) -> Result<Self> {
        Self::new(CutoffWave::new(build_exact_wave(gas, right), mu)?, delta)
    }

    pub fn from_schedule(gas: GasModel, right: RightState, s: &Schedule) -> Result<Self> {
        Self::from_parts(gas, right, s.mu, s.delta)
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn profile(&self) -> &BurgersProfile {
        &self.profile
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn cutoff(&self) -> &CutoffWave {
        &self.cutoff
    }

    pub fn exact(&self) -> &ExactWave {
        self.cutoff.base()
    }

    /// Maps a Burgers value to `(rho, u)` on the level set `Sigma_2 = sigma2`.
    #[inline]
    pub fn state_from_w(&self, w: f64) -> (f64, f64) {
        let c = self.gas.fan_factor() * (w - self.sigma2);
        (self.gas.rho_from_sound_speed(c), w - c)
    }

    /// Density and velocity only.
    pub fn eval_point(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let x0 = solve_x0(&self.profile, x, t)?;
        Ok(self.state_from_w(burgers_initial(&self.profile, x0)))
    }
}

pub fn eval_approx_wave(aw: &ApproxWave, x: f64, t: f64) -> Result<ApproxState> {
    let b = eval_w(&aw.profile, x, t)?;
    let g = aw.gas.gamma();
    let k = aw.gas.fan_factor();
    let c = k * (b.w - aw.sigma2);
    let rho = aw.gas.rho_from_sound_speed(c);
    let u = b.w - c;
    let two_over = 2.0 / (g + 1.0);
    let u_x = two_over * b.w_x;
    // d rho / d w from the closed form c^(2/(gamma-1)).
    let rho_x = 2.0 / (g - 1.0) * k * c.powf((3.0 - g) / (g - 1.0)) * b.w_x;
    Ok(ApproxState {
        rho,
        u,
        rho_x,
        u_x,
        u_xx: two_over * b.w_xx,
        w: b.w,
        w_x: b.w_x,
    })
}

/// Centered finite-difference residuals `(rho_t + m_x, m_t + (m u + p)_x)` of the
/// inviscid system evaluated on the approximate wave with step `h` in space and time.
pub fn euler_residual(aw: &ApproxWave, x: f64, t: f64, h: f64) -> Result<(f64, f64)> {
    let cons = |x: f64, t: f64| -> Result<(f64, f64, f64)> {
        let (rho, u) = aw.eval_point(x, t)?;
        Ok((rho, rho * u, rho * u * u + aw.gas.p(rho)))
    };
    let (r_tp, m_tp, _) = cons(x, t + h)?;
    let (r_tm, m_tm, _) = cons(x, t - h)?;
    let (_, m_xp, f_xp) = cons(x + h, t)?;
    let (_, m_xm, f_xm) = cons(x - h, t)?;
    let inv = 0.5 / h;
    Ok((
        (r_tp - r_tm) * inv + (m_xp - m_xm) * inv,
        (m_tp - m_tm) * inv + (f_xp - f_xm) * inv,
    ))
}

// ---------------------------------------------------------------------------
// Verifiers

/// Samples `f` on `n` equispaced points of `[a, b]` and polishes the largest
/// sample by golden-section search on its neighbouring cells.
pub(crate) fn sup_sampled<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> (f64, f64) {
    let n = n.max(3);
    let h = (b - a) / (n - 1) as f64;
    let (mut kbest, mut vbest) = (0usize, f64::NEG_INFINITY);
    for k in 0..n {
        let v = f(a + h * k as f64);
        if v > vbest {
            vbest = v;
            kbest = k;
        }
    }
    let mut lo = a + h * kbest.saturating_sub(1) as f64;
    let mut hi = a + h * (kbest + 1).min(n - 1) as f64;
    let mut xbest = a + h * kbest as f64;
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > vbest {
            vbest = v;
            xbest = x;
        }
    }
    (xbest, vbest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub value: f64,
    /// The estimate with its unknown constant set to one.
    pub envelope: f64,
    pub ratio: f64,
}

impl Envelope {
    fn new(value: f64, envelope: f64) -> Self {
        Self {
            value,
            envelope,
            ratio: value / envelope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BurgersReport {
    pub t: f64,
    pub delta: f64,
    pub p: f64,
    pub wx_norm: Envelope,
    pub wxx_norm: Envelope,
    /// `sup |w_xx| / w_x` against `4 / delta`.
    pub pointwise: Envelope,
    pub pointwise_violations: usize,
    pub samples: usize,
    pub fan_gap: Envelope,
}

impl BurgersReport {
    pub fn pointwise_ok(&self) -> bool {
        self.pointwise_violations == 0 && self.pointwise.ratio <= 1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BurgersCheckOptions {
    pub samples: usize,
    pub quad: QuadOptions,
}

impl Default for BurgersCheckOptions {
    fn default() -> Self {
        Self {
            samples: 4001,
            quad: QuadOptions::default(),
        }
    }
}

fn lp_norm<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    p: f64,
    opts: &BurgersCheckOptions,
) -> Result<f64> {
    if p.is_infinite() {
        Ok(sup_sampled(|x| f(x).abs(), a, b, opts.samples).1)
    } else {
        let v = integrate(|x| f(x).abs().powf(p), a, b, opts.quad)?;
        Ok(v.powf(1.0 / p))
    }
}

pub fn verify_burgers_estimates(profile: &BurgersProfile, t: f64, p: f64) -> Result<BurgersReport> {
    verify_burgers_estimates_with(profile, t, p, &BurgersCheckOptions::default())
}

pub fn verify_burgers_estimates_with(
    profile: &BurgersProfile,
    t: f64,
    p: f64,
    opts: &BurgersCheckOptions,
) -> Result<BurgersReport> {
    if !(t > 0.0) {
        return Err(domain("estimates need t > 0", t));
    }
    if !(p >= 1.0) {
        return Err(domain("norm exponent must lie in [1, inf]", p));
    }
    let (a, b) = profile.support(t);
    let delta = profile.delta;
    // Quadrature integrands cannot propagate errors; a failed root shows up as NaN.
    let wx = |x: f64| eval_w(profile, x, t).map(|e| e.w_x).unwrap_or(f64::NAN);
    let wxx = |x: f64| eval_w(profile, x, t).map(|e| e.w_xx).unwrap_or(f64::NAN);

    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let wx_norm = lp_norm(wx, a, b, p, opts)?;
    let wxx_norm = lp_norm(wxx, a, b, p, opts)?;

    let bound = 4.0 / delta;
    let mut worst = 0.0_f64;
    let mut violations = 0usize;
    let n = opts.samples.max(2);
    for k in 0..n {
        let x = a + (b - a) * k as f64 / (n - 1) as f64;
        let e = eval_w(profile, x, t)?;
        if !(e.w_x > 0.0) {
            violations += 1;
            continue;
        }
        let r = e.w_xx.abs() / e.w_x;
        if r > bound {
            violations += 1;
        }
        worst = worst.max(r);
    }

    let (_, gap) = sup_sampled(
        |x| (w_value(profile, x, t) - burgers_fan(profile, x / t)).abs(),
        a,
        b,
        opts.samples,
    );

    Ok(BurgersReport {
        t,
        delta,
        p,
        wx_norm: Envelope::new(
            wx_norm,
            profile.strength().powf(inv_p) * (delta + t).powf(-1.0 + inv_p),
        ),
        wxx_norm: Envelope::new(wxx_norm, (delta + t).powf(-1.0) * delta.powf(-1.0 + inv_p)),
        pointwise: Envelope::new(worst, bound),
        pointwise_violations: violations,
        samples: n,
        fan_gap: Envelope::new(gap, delta / t * ((1.0 + t).ln() + delta.ln().abs())),
    })
}

fn w_value(profile: &BurgersProfile, x: f64, t: f64) -> f64 {
    eval_w(profile, x, t).map(|e| e.w).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAtTime {
    pub t: f64,
    pub gap: Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveIdentityReport {
    pub samples: usize,
    /// Max of `|Sigma_2(rho_bar, u_bar) - sigma2| / (1 + |sigma2|)`.
    pub sigma2_rel_dev: f64,
    /// Max of `|rho_x - rho^((3-gamma)/2) u_x| / (1 + |rho_x|)`.
    pub rho_x_identity: f64,
    /// Max FD errors at steps `h, h/2, h/4` for `w_x`, `u_x`, `rho_x`.
    pub fd_errors: [[f64; 3]; 3],
    /// Observed orders `log2(e(h)/e(h/2))` and `log2(e(h/2)/e(h/4))` per quantity.
    pub fd_orders: [[f64; 2]; 3],
    pub fd_step: f64,
    /// Sup over `x` of the distance to the cut-off fan, at each distinct positive sample time.
    pub cutoff_gaps: Vec<GapAtTime>,
}

impl WaveIdentityReport {
    pub fn min_order(&self) -> f64 {
        self.fd_orders
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_order(&self) -> f64 {
        self.fd_orders
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sup over `x` of `max(|rho_bar - rho_mu|, |u_bar - u_mu|)` at time `t > 0`.
pub fn cutoff_distance(aw: &ApproxWave, t: f64, samples: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("distance to the fan needs t > 0", t));
    }
    let (a, b) = aw.profile.support(t);
    let f = |x: f64| match aw.eval_point(x, t) {
        Ok((rho, u)) => {
            let s = eval_cutoff_wave(&aw.cutoff, x / t);
            (rho - s.rho).abs().max((u - s.u).abs())
        }
        Err(_) => f64::NAN,
    };
    Ok(sup_sampled(f, a, b, samples).1)
}

pub fn verify_wave_identities(
    aw: &ApproxWave,
    samples: &[(f64, f64)],
) -> Result<WaveIdentityReport> {
    if samples.is_empty() {
        return Err(Error::Numeric(
            "wave identity check needs at least one sample".into(),
        ));
    }
    let g = aw.gas.gamma();
    let mut s2_dev = 0.0_f64;
    let mut ident = 0.0_f64;
    for &(x, t) in samples {
        let st = eval_approx_wave(aw, x, t)?;
        let s2 = sigma2(&aw.gas, st.rho, st.u);
        s2_dev = s2_dev.max((s2 - aw.sigma2).abs() / (1.0 + aw.sigma2.abs()));
        let r = st.rho_x - st.rho.powf(0.5 * (3.0 - g)) * st.u_x;
        ident = ident.max(r.abs() / (1.0 + st.rho_x.abs()));
    }

    let h0 = aw.profile.delta / 16.0;
    let mut errs = [[0.0_f64; 3]; 3];
    for (j, h) in [h0, 0.5 * h0, 0.25 * h0].into_iter().enumerate() {
        for &(x, t) in samples {
            let st = eval_approx_wave(aw, x, t)?;
            let wp = eval_w(&aw.profile, x + h, t)?.w;
            let wm = eval_w(&aw.profile, x - h, t)?.w;
            let (rp, up) = aw.state_from_w(wp);
            let (rm, um) = aw.state_from_w(wm);
            let inv = 0.5 / h;
            errs[0][j] = errs[0][j].max(((wp - wm) * inv - st.w_x).abs());
            errs[1][j] = errs[1][j].max(((up - um) * inv - st.u_x).abs());
            errs[2][j] = errs[2][j].max(((rp - rm) * inv - st.rho_x).abs());
        }
    }
    let mut orders = [[0.0_f64; 2]; 3];
    for q in 0..3 {
        orders[q][0] = (errs[q][0] / errs[q][1]).log2();
        orders[q][1] = (errs[q][1] / errs[q][2]).log2();
    }

    let mut times: Vec<f64> = samples.iter().map(|s| s.1).filter(|&t| t > 0.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let d = aw.profile.delta;
    let cutoff_gaps = times
        .into_iter()
        .map(|t| {
            cutoff_distance(aw, t, 4001).map(|gap| GapAtTime {
                t,
                gap: Envelope::new(gap, d / t * ((1.0 + t).ln() + d.ln().abs())),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(WaveIdentityReport {
        samples: samples.len(),
        sigma2_rel_dev: s2_dev,
        rho_x_identity: ident,
        fd_errors: errs,
        fd_orders: orders,
        fd_step: h0,
        cutoff_gaps,
    })
}
