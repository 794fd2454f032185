//! Isentropic gamma-law gas and the inviscid 2-rarefaction fan attached to vacuum.
//!
//! Pressure law `p(rho) = rho^gamma / gamma`, so `sqrt(p'(rho)) = rho^((gamma-1)/2)`
//! and the Riemann invariants are
//! `Sigma_{1,2} = u +/- 2/(gamma-1) * rho^((gamma-1)/2)`.
//!
//! The fan connecting vacuum on the left to `(rho_plus, u_plus)` on the right is
//! self-similar in `xi = x/t`. Inside the fan `lambda_2 = xi` and `Sigma_2` is
//! constant, which inverts in closed form:
//! `rho^((gamma-1)/2) = (gamma-1)/(gamma+1) * (xi - Sigma_2)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(domain("adiabatic exponent must satisfy gamma > 1", gamma));
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(gamma - 1) / 2`, the exponent of the sound speed.
    #[inline]
    pub fn half_gm1(&self) -> f64 {
        0.5 * (self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn p(&self, rho: f64) -> f64 {
        rho.powf(self.gamma) / self.gamma
    }

    #[inline]
    pub(crate) fn dp(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 1.0)
    }

    /// Sound speed `sqrt(p'(rho))`.
    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        rho.powf(self.half_gm1())
    }

    /// Inverse of the fan relation: density whose sound speed equals `c`.
    #[inline]
    pub(crate) fn rho_from_sound_speed(&self, c: f64) -> f64 {
        c.powf(2.0 / (self.gamma - 1.0))
    }

    /// `(gamma - 1) / (gamma + 1)`.
    #[inline]
    pub(crate) fn fan_factor(&self) -> f64 {
        (self.gamma - 1.0) / (self.gamma + 1.0)
    }
}

/// Value of the pressure law together with `p'` and `sqrt(p')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pressure {
    pub p: f64,
    pub dp: f64,
    pub sqrt_dp: f64,
}

pub fn pressure(gas: &GasModel, rho: f64) -> Result<Pressure> {
    if !(rho >= 0.0) {
        return Err(domain("density must be nonnegative", rho));
    }
    Ok(Pressure {
        p: gas.p(rho),
        dp: gas.dp(rho),
        sqrt_dp: gas.sound_speed(rho),
    })
}

/// `(lambda_1, lambda_2) = (u - c, u + c)`. Undefined at vacuum where both collapse to `u`.
pub fn char_speeds(gas: &GasModel, rho: f64, u: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) {
        return Err(domain("characteristic speeds need rho > 0", rho));
    }
    let c = gas.sound_speed(rho);
    Ok((u - c, u + c))
}

pub fn riemann_invariants(gas: &GasModel, rho: f64, u: f64) -> Result<(f64, f64)> {
    if !(rho >= 0.0) {
        return Err(domain("density must be nonnegative", rho));
    }
    let s = gas.sound_speed(rho) / gas.half_gm1();
    Ok((u + s, u - s))
}

#[inline]
pub(crate) fn sigma2(gas: &GasModel, rho: f64, u: f64) -> f64 {
    u - gas.sound_speed(rho) / gas.half_gm1()
}

#[inline]
pub(crate) fn lambda2(gas: &GasModel, rho: f64, u: f64) -> f64 {
    u + gas.sound_speed(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightState {
    rho_plus: f64,
    u_plus: f64,
}

impl RightState {
    pub fn new(rho_plus: f64, u_plus: f64) -> Result<Self> {
        if !(rho_plus > 0.0 && rho_plus.is_finite()) {
            return Err(domain("right density must be positive", rho_plus));
        }
        if !u_plus.is_finite() {
            return Err(domain("right velocity must be finite", u_plus));
        }
        Ok(Self { rho_plus, u_plus })
    }

    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }

    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }
}

/// A pointwise evaluation `(rho, u, m)` of a wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveState {
    pub rho: f64,
    pub u: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactWave {
    gas: GasModel,
    right: RightState,
    u_minus: f64,
    sigma2: f64,
}

pub fn build_exact_wave(gas: GasModel, right: RightState) -> ExactWave {
    let s2 = sigma2(&gas, right.rho_plus, right.u_plus);
    ExactWave {
        gas,
        right,
        u_minus: s2,
        sigma2: s2,
    }
}

impl ExactWave {
    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn right(&self) -> &RightState {
        &self.right
    }

    /// Velocity at which gas streams into the vacuum; equals `Sigma_2(rho_plus, u_plus)`.
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `lambda_2(rho_plus, u_plus)`, the head of the fan.
    pub fn head_speed(&self) -> f64 {
        lambda2(&self.gas, self.right.rho_plus, self.right.u_plus)
    }

    /// State inside the fan at similarity coordinate `xi`, no clamping.
    #[inline]
    pub(crate) fn fan_state(&self, xi: f64) -> WaveState {
        let c = self.gas.fan_factor() * (xi - self.sigma2);
        let rho = self.gas.rho_from_sound_speed(c);
        let u = xi - c;
        WaveState { rho, u, m: rho * u }
    }

    #[inline]
    fn right_state(&self) -> WaveState {
        WaveState {
            rho: self.right.rho_plus,
            u: self.right.u_plus,
            m: self.right.rho_plus * self.right.u_plus,
        }
    }
}

/// Evaluates the vacuum fan. In the vacuum region the velocity is reported as `u_minus`.
pub fn eval_exact_wave(wave: &ExactWave, xi: f64) -> WaveState {
    if xi < wave.u_minus {
        WaveState {
            rho: 0.0,
            u: wave.u_minus,
            m: 0.0,
        }
    } else if xi > wave.head_speed() {
        wave.right_state()
    } else {
        let s = wave.fan_state(xi);
        if s.rho > 0.0 {
            s
        } else {
            WaveState { m: 0.0, ..s }
        }
    }
}

/// Velocity at density level `mu` on the 2-rarefaction curve through the right state.
pub fn u_mu(wave: &ExactWave, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < wave.right.rho_plus) {
        return Err(domain("cut level must lie in (0, rho_plus)", mu));
    }
    Ok(wave.sigma2 + wave.gas.sound_speed(mu) / wave.gas.half_gm1())
}

/// The fan truncated at density `mu`: the vacuum is replaced by the state `(mu, u_mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffWave {
    base: ExactWave,
    mu: f64,
    u_mu: f64,
}

impl CutoffWave {
    /// Requires `0 < mu <= rho_plus / 2`.
    pub fn new(base: ExactWave, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 0.5 * base.right.rho_plus) {
            return Err(domain("cut level must lie in (0, rho_plus/2]", mu));
        }
        let u_mu = u_mu(&base, mu)?;
        Ok(Self { base, mu, u_mu })
    }

    pub fn base(&self) -> &ExactWave {
        &self.base
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn u_mu(&self) -> f64 {
        self.u_mu
    }

    /// `lambda_2(mu, u_mu)`, the tail of the truncated fan.
    pub fn tail_speed(&self) -> f64 {
        lambda2(&self.base.gas, self.mu, self.u_mu)
    }
}

pub fn eval_cutoff_wave(cw: &CutoffWave, xi: f64) -> WaveState {
    if xi < cw.tail_speed() {
        WaveState {
            rho: cw.mu,
            u: cw.u_mu,
            m: cw.mu * cw.u_mu,
        }
    } else if xi > cw.base.head_speed() {
        cw.base.right_state()
    } else {
        cw.base.fan_state(xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas(g: f64) -> GasModel {
        GasModel::new(g).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn rejects_nonphysical_gamma() {
        assert!(GasModel::new(1.0).is_err());
        assert!(GasModel::new(0.5).is_err());
        assert!(GasModel::new(f64::NAN).is_err());
        assert!(GasModel::new(1.0001).is_ok());
    }

    #[test]
    fn pressure_values() {
        assert_eq!(pressure(&gas(2.0), 0.0).unwrap().p, 0.0);
        assert!(close(pressure(&gas(2.0), 1.0).unwrap().p, 0.5, 1e-15));
        let p = pressure(&gas(3.0), 2.0).unwrap();
        assert!(close(p.p, 8.0 / 3.0, 1e-15));
        assert!(close(p.sqrt_dp, 2.0, 1e-15));
        assert!(close(p.dp, 4.0, 1e-15));
        assert!(pressure(&gas(2.0), -1e-3).is_err());
    }

    #[test]
    fn speeds() {
        let (l1, l2) = char_speeds(&gas(3.0), 1.0, 0.0).unwrap();
        assert!(close(l1, -1.0, 1e-15) && close(l2, 1.0, 1e-15));
        let (l1, l2) = char_speeds(&gas(2.0), 4.0, 1.0).unwrap();
        assert!(close(l1, -1.0, 1e-15) && close(l2, 3.0, 1e-15));
        let (l1, l2) = char_speeds(&gas(1.4), 1.0, 5.0).unwrap();
        assert!(close(l1, 4.0, 1e-15) && close(l2, 6.0, 1e-15));
        assert!(char_speeds(&gas(2.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn invariants() {
        let (s1, s2) = riemann_invariants(&gas(3.0), 1.0, 0.0).unwrap();
        assert!(close(s1, 1.0, 1e-15) && close(s2, -1.0, 1e-15));
        assert_eq!(
            riemann_invariants(&gas(2.0), 0.0, -1.0).unwrap(),
            (-1.0, -1.0)
        );
        let (s1, s2) = riemann_invariants(&gas(2.0), 1.0, 0.0).unwrap();
        assert!(close(s1, 2.0, 1e-15) && close(s2, -2.0, 1e-15));
    }

    #[test]
    fn exact_wave_construction() {
        let w = build_exact_wave(gas(3.0), RightState::new(1.0, 0.0).unwrap());
        assert!(close(w.u_minus(), -1.0, 1e-15));
        assert!(close(w.sigma2(), -1.0, 1e-15));
        let w = build_exact_wave(gas(2.0), RightState::new(1.0, 2.0).unwrap());
        assert!(w.u_minus().abs() < 1e-15);
        let w = build_exact_wave(gas(2.0), RightState::new(1e-14, 0.0).unwrap());
        assert!(w.u_minus().abs() < 1e-6);
        assert!(w.u_minus() < w.head_speed());
    }

    #[test]
    fn exact_wave_branches() {
        let w = build_exact_wave(gas(3.0), RightState::new(1.0, 0.0).unwrap());
        let s = eval_exact_wave(&w, -2.0);
        assert_eq!((s.rho, s.m), (0.0, 0.0));
        assert_eq!(s.u, w.u_minus());
        let s = eval_exact_wave(&w, 2.0);
        assert_eq!((s.rho, s.u, s.m), (1.0, 0.0, 0.0));
        let s = eval_exact_wave(&w, 0.0);
        assert!(close(s.rho, 0.5, 1e-15));
        assert!(close(s.u, -0.5, 1e-15));
        assert!(close(s.m, -0.25, 1e-15));
    }

    #[test]
    fn fan_closed_form_matches_bisection() {
        // Independent route: bisect lambda_2(rho, Sigma_2 + 2 c / (gamma-1)) = xi in rho.
        for &g in &[1.4, 2.0, 3.0, 5.0] {
            let gm = gas(g);
            let w = build_exact_wave(gm, RightState::new(1.3, 0.4).unwrap());
            let lo_xi = w.u_minus();
            let hi_xi = w.head_speed();
            for k in 1..20 {
                let xi = lo_xi + (hi_xi - lo_xi) * k as f64 / 20.0;
                let f = |rho: f64| {
                    let c = rho.powf(0.5 * (g - 1.0));
                    w.sigma2() + 2.0 * c / (g - 1.0) + c - xi
                };
                let (mut a, mut b) = (0.0_f64, 1.3_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if f(mid) > 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                let s = eval_exact_wave(&w, xi);
                assert!((s.rho - 0.5 * (a + b)).abs() < 1e-12, "g={g} xi={xi}");
            }
        }
    }

    #[test]
    fn u_mu_values() {
        let w = build_exact_wave(gas(3.0), RightState::new(1.0, 0.0).unwrap());
        assert!(close(u_mu(&w, 0.01).unwrap(), -0.99, 1e-14));
        let w2 = build_exact_wave(gas(2.0), RightState::new(1.0, 2.0).unwrap());
        assert!(close(u_mu(&w2, 0.25).unwrap(), 1.0, 1e-14));
        assert!((u_mu(&w, 1e-300).unwrap() - w.u_minus()).abs() < 1e-12);
        assert!(u_mu(&w, 0.0).is_err());
        assert!(u_mu(&w, 1.0).is_err());
        let (_, s2) = riemann_invariants(&gas(3.0), 0.01, -0.99).unwrap();
        assert!(close(s2, w.sigma2(), 1e-14));
    }

    #[test]
    fn cutoff_wave_branches() {
        let w = build_exact_wave(gas(3.0), RightState::new(1.0, 0.0).unwrap());
        let cw = CutoffWave::new(w, 0.01).unwrap();
        let s = eval_cutoff_wave(&cw, -2.0);
        assert!(close(s.rho, 0.01, 1e-15));
        assert!(close(s.u, -0.99, 1e-14));
        assert!(close(s.m, -0.0099, 1e-14));
        let s = eval_cutoff_wave(&cw, 0.0);
        assert!(close(s.rho, 0.5, 1e-15) && close(s.u, -0.5, 1e-15) && close(s.m, -0.25, 1e-15));
        let s = eval_cutoff_wave(&cw, 2.0);
        assert_eq!((s.rho, s.u, s.m), (1.0, 0.0, 0.0));
        assert!(CutoffWave::new(w, 0.6).is_err());
        assert!(CutoffWave::new(w, 0.5).is_ok());
    }
}
