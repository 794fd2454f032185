//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # gamma-law gas and right state
//! gamma = 2
//! rho_plus = 1
//! u_plus = 0
//! epsilons = 4e-3, 2e-3, 1e-3
//! h = 0.5
//! t_end = 2
//! c_mu = 0.02
//! ```
//!
//! Optional keys and their defaults: `cfl = 0.45`, `order = 2`,
//! `cells_per_delta = 50`, `c_mu = 1`, `sample_times` (8 equispaced times in
//! `[h, t_end]`) and `energy_samples = 400`.

use std::collections::BTreeMap;

use vacuumlab::gasdyn::{GasModel, RightState};
use vacuumlab::limitlab::{
    equispaced_times, SweepConfig, DEFAULT_ENERGY_SAMPLES, DEFAULT_SAMPLE_COUNT,
};
use vacuumlab::nssolver::SpatialOrder;
use vacuumlab::smoothwave::make_schedule;
use vacuumlab::Exec;

pub const DEFAULT_CFL: f64 = 0.45;
pub const DEFAULT_ORDER: u32 = 2;
pub const DEFAULT_CELLS_PER_DELTA: f64 = 50.0;
pub const DEFAULT_C_MU: f64 = 1.0;

const KNOWN_KEYS: [&str; 12] = [
    "gamma",
    "rho_plus",
    "u_plus",
    "epsilons",
    "h",
    "t_end",
    "c_mu",
    "cells_per_delta",
    "order",
    "cfl",
    "sample_times",
    "energy_samples",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

struct Doc(BTreeMap<String, String>);

impl Doc {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    reason: format!("unknown key `{k}`"),
                });
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    reason: format!("duplicate key `{k}`"),
                });
            }
        }
        Ok(Self(map))
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.0.get(key).map(|v| parse_number(key, v)).transpose()
    }

    fn required(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.number(key)?.ok_or(ConfigError::Missing(key))
    }

    fn list(&self, key: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.0.get(key) else {
            return Ok(None);
        };
        let items: Vec<f64> = v
            .split(',')
            .map(|s| parse_number(key, s.trim()))
            .collect::<Result<_, _>>()?;
        if items.is_empty() {
            return Err(invalid(key, "list must not be empty"));
        }
        Ok(Some(items))
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .parse()
        .map_err(|_| invalid(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, format!("`{v}` is not finite")));
    }
    Ok(x)
}

fn whole(key: &str, x: f64) -> Result<u32, ConfigError> {
    if x.fract() != 0.0 || x < 0.0 || x > u32::MAX as f64 {
        return Err(invalid(key, format!("{x} is not a non-negative integer")));
    }
    Ok(x as u32)
}

pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let doc = Doc::parse(text)?;

    let gamma = doc.required("gamma")?;
    if !(gamma > 1.0) {
        return Err(invalid("gamma", format!("gamma = {gamma}, need gamma > 1")));
    }
    let gas = GasModel::new(gamma).map_err(|e| invalid("gamma", e.to_string()))?;

    let rho_plus = doc.required("rho_plus")?;
    let u_plus = doc.required("u_plus")?;
    let right =
        RightState::new(rho_plus, u_plus).map_err(|e| invalid("rho_plus", e.to_string()))?;

    let epsilons = doc
        .list("epsilons")?
        .ok_or(ConfigError::Missing("epsilons"))?;
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(invalid("epsilons", format!("{e} outside (0, 1)")));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("epsilons", "values must be strictly decreasing"));
    }

    let h = doc.required("h")?;
    let t_end = doc.required("t_end")?;
    if !(h > 0.0) {
        return Err(invalid("h", format!("h = {h}, need h > 0")));
    }
    if !(t_end > h) {
        return Err(invalid(
            "t_end",
            format!("t_end = {t_end}, need t_end > h = {h}"),
        ));
    }

    let c_mu = doc.number("c_mu")?.unwrap_or(DEFAULT_C_MU);
    if !(c_mu > 0.0) {
        return Err(invalid("c_mu", format!("c_mu = {c_mu}, need c_mu > 0")));
    }
    for &e in &epsilons {
        make_schedule(&gas, &right, e, c_mu).map_err(|err| {
            invalid(
                "c_mu",
                format!("schedule infeasible at epsilon = {e}: {err}"),
            )
        })?;
    }

    let cfl = doc.number("cfl")?.unwrap_or(DEFAULT_CFL);
    if !(cfl > 0.0 && cfl <= 0.9) {
        return Err(invalid("cfl", format!("cfl = {cfl}, need 0 < cfl <= 0.9")));
    }
    let order = match doc.number("order")? {
        Some(x) => whole("order", x)?,
        None => DEFAULT_ORDER,
    };
    let order = SpatialOrder::try_from(order).map_err(|e| invalid("order", e.to_string()))?;
    let cells_per_delta = doc
        .number("cells_per_delta")?
        .unwrap_or(DEFAULT_CELLS_PER_DELTA);
    if !(cells_per_delta > 0.0) {
        return Err(invalid(
            "cells_per_delta",
            format!("{cells_per_delta} must be positive"),
        ));
    }

    let sample_times = doc
        .list("sample_times")?
        .unwrap_or_else(|| equispaced_times(h, t_end, DEFAULT_SAMPLE_COUNT));
    if sample_times.iter().any(|&t| !(t >= h && t <= t_end))
        || sample_times.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(invalid(
            "sample_times",
            format!("must be increasing and lie in [{h}, {t_end}]"),
        ));
    }
    let energy_samples = match doc.number("energy_samples")? {
        Some(x) => whole("energy_samples", x)? as usize,
        None => DEFAULT_ENERGY_SAMPLES,
    };
    if energy_samples == 0 {
        return Err(invalid("energy_samples", "must be at least 1"));
    }

    let config = SweepConfig {
        gas,
        right,
        epsilons,
        h,
        t_end,
        sample_times,
        c_mu,
        cells_per_delta,
        order,
        cfl,
        energy_samples,
        exec: Exec::default(),
    };
    config
        .validate()
        .map_err(|e| invalid("config", e.to_string()))?;
    Ok(config)
}
