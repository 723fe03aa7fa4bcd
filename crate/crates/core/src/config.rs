//! Flat `key=value` experiment configuration files.
//!
//! One pair per line, `#` starts a comment. Lists are comma separated and
//! may contain inclusive ranges `a..b` or `a..b..step`. Unset keys keep the
//! defaults of [`ExperimentConfig`]; overrides are applied after the file.

use std::path::Path;

use crate::bench::{Algorithm, ExperimentConfig};
use crate::{Error, Result};

/// Every key accepted in a config file or `--set` override.
pub const KEYS: &[&str] = &[
    "channel_length",
    "training_length",
    "sparsity_values",
    "snr_values_db",
    "trials",
    "base_seed",
    "algorithms",
    "tap_std",
    "fixed_snr_db",
    "fixed_sparsity",
    "timing_repeats",
    "msl0.sigma_decay",
    "msl0.inner_iterations",
    "msl0.step_size",
    "msl0.max_sigma_levels",
    "msl0.residual_budget_factor",
    "msl0.sigma_floor_factor",
    "lasso.lambda",
    "lasso.max_iterations",
    "lasso.objective_tolerance",
    "greedy.max_iterations",
    "greedy.residual_tolerance",
];

/// Reads `path` (if any), applies `overrides` and validates the result.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let (text, source) = match path {
        Some(p) => (std::fs::read_to_string(p)?, p.display().to_string()),
        None => (String::new(), "<defaults>".to_string()),
    };
    parse_config_str(&text, &source, overrides)
}

pub fn parse_config_str(text: &str, source: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        apply_pair(&mut config, line, &format!("{source}:{}", n + 1))?;
    }
    for item in overrides {
        for pair in item.split_whitespace() {
            apply_pair(&mut config, pair, &format!("override `{pair}`"))?;
        }
    }
    config.validate()?;
    Ok(config)
}

fn apply_pair(config: &mut ExperimentConfig, pair: &str, location: &str) -> Result<()> {
    let (key, value) = pair.split_once('=').ok_or_else(|| Error::Config {
        key: pair.to_string(),
        location: location.to_string(),
        message: "expected key=value".into(),
    })?;
    set_key(config, key.trim(), value.trim()).map_err(|message| Error::Config {
        key: key.trim().to_string(),
        location: location.to_string(),
        message,
    })
}

fn num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse `{value}`"))
}

fn real(value: &str) -> std::result::Result<f64, String> {
    match value.to_ascii_lowercase().as_str() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => num::<f64>(value),
    }
}

fn int_list(value: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split("..").collect();
        match parts.as_slice() {
            [single] => out.push(num(single)?),
            [a, b] | [a, b, _] => {
                let (a, b): (usize, usize) = (num(a)?, num(b)?);
                let step: usize = if parts.len() == 3 { num(parts[2])? } else { 1 };
                if step == 0 || b < a {
                    return Err(format!("bad range `{item}`"));
                }
                out.extend((a..=b).step_by(step));
            }
            _ => return Err(format!("bad list item `{item}`")),
        }
    }
    Ok(out)
}

fn real_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split("..").collect();
        match parts.as_slice() {
            [single] => out.push(real(single)?),
            [a, b] | [a, b, _] => {
                let (a, b) = (real(a)?, real(b)?);
                let step = if parts.len() == 3 { real(parts[2])? } else { 1.0 };
                if !(step > 0.0) || !(b >= a) || !(a.is_finite() && b.is_finite()) {
                    return Err(format!("bad range `{item}`"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|k| a + k as f64 * step));
            }
            _ => return Err(format!("bad list item `{item}`")),
        }
    }
    Ok(out)
}

fn set_key(c: &mut ExperimentConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "channel_length" => c.channel_length = num(value)?,
        "training_length" => c.training_length = num(value)?,
        "sparsity_values" => c.sparsity_values = int_list(value)?,
        "snr_values_db" => c.snr_values_db = real_list(value)?,
        "trials" => c.trials = num(value)?,
        "base_seed" => c.base_seed = num(value)?,
        "algorithms" => {
            c.algorithms = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Algorithm>().map_err(|e| e.to_string()))
                .collect::<std::result::Result<_, _>>()?;
        }
        "tap_std" => c.tap_std = real(value)?,
        "fixed_snr_db" => c.fixed_snr_db = real(value)?,
        "fixed_sparsity" => c.fixed_sparsity = num(value)?,
        "timing_repeats" => c.timing_repeats = num(value)?,
        "msl0.sigma_decay" => c.msl0.sigma_decay = real(value)?,
        "msl0.inner_iterations" => c.msl0.inner_iterations = num(value)?,
        "msl0.step_size" => c.msl0.step_size = real(value)?,
        "msl0.max_sigma_levels" => c.msl0.max_sigma_levels = num(value)?,
        "msl0.residual_budget_factor" => c.msl0.residual_budget_factor = real(value)?,
        "msl0.sigma_floor_factor" => c.msl0.sigma_floor_factor = real(value)?,
        "lasso.lambda" => {
            c.lasso.lambda = if value.eq_ignore_ascii_case("auto") {
                None
            } else {
                Some(real(value)?)
            }
        }
        "lasso.max_iterations" => c.lasso.max_iterations = num(value)?,
        "lasso.objective_tolerance" => c.lasso.objective_tolerance = real(value)?,
        "greedy.max_iterations" => c.greedy.max_iterations = num(value)?,
        "greedy.residual_tolerance" => c.greedy.residual_tolerance = real(value)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}
