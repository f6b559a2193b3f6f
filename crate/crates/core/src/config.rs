//! Flat `key = value` experiment configuration.
//!
//! Every key has a default. Lines starting with `#` are comments; a later
//! assignment of the same key wins. Overrides use the same `key=value`
//! syntax and are applied after the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::economy::{BrokerageRatio, BrokerageScope};
use crate::error::{Error, Result};
use crate::incentive::Order;
use crate::sim::{Mode, SimConfig, StationSource};

pub const KEYS: &[&str] = &[
    "sim.mode",
    "sim.runs",
    "sim.seed",
    "sim.commits_per_task",
    "sim.sequential_commits",
    "topology.preset",
    "topology.file",
    "roles.publishers",
    "roles.workers",
    "roles.mns",
    "roles.tasks_per_publisher",
    "roles.bias_min",
    "roles.bias_max",
    "incentive.k_choices",
    "incentive.rho",
    "brokerage.eta",
    "brokerage.scope",
    "platform.candidates",
];

/// A simulation template plus the modes to run it under.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub modes: Vec<Mode>,
    pub sim: SimConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        ExperimentConfig {
            modes: vec![sim.mode],
            sim,
        }
    }
}

impl ExperimentConfig {
    /// One config per requested mode.
    pub fn per_mode(&self) -> impl Iterator<Item = SimConfig> + '_ {
        self.modes.iter().map(|&m| self.sim.with_mode(m))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let sim = &mut self.sim;
        match key {
            "sim.mode" => {
                let modes = parse_modes(value).map_err(|e| Error::config(key, e))?;
                sim.mode = modes[0];
                self.modes = modes;
            }
            "sim.runs" => sim.runs = parse(key, value)?,
            "sim.seed" => sim.seed = parse(key, value)?,
            "sim.commits_per_task" => sim.commits_per_task = parse(key, value)?,
            "sim.sequential_commits" => sim.sequential_commits = parse(key, value)?,
            "topology.preset" => {
                sim.stations = StationSource::Preset(value.parse().map_err(|e: Error| Error::config(key, e.to_string()))?)
            }
            "topology.file" => {
                if value.is_empty() {
                    return Err(Error::config(key, "empty path"));
                }
                sim.stations = StationSource::File(PathBuf::from(value));
            }
            "roles.publishers" => sim.roles.publishers = parse(key, value)?,
            "roles.workers" => sim.roles.workers = parse(key, value)?,
            "roles.mns" => sim.roles.masternodes = parse(key, value)?,
            "roles.tasks_per_publisher" => sim.tasks_per_publisher = parse(key, value)?,
            "roles.bias_min" => sim.bias_min = parse(key, value)?,
            "roles.bias_max" => sim.bias_max = parse(key, value)?,
            "incentive.k_choices" => {
                sim.k_choices = value
                    .split(',')
                    .map(|k| {
                        let k: u32 = parse(key, k)?;
                        Order::new(k).map_err(|e| Error::config(key, e.to_string()))
                    })
                    .collect::<Result<_>>()?;
            }
            "incentive.rho" => sim.rho = parse(key, value)?,
            "brokerage.eta" => {
                let eta: f64 = parse(key, value)?;
                sim.eta = BrokerageRatio::new(eta).map_err(|e| Error::config(key, e.to_string()))?;
            }
            "brokerage.scope" => {
                sim.scope = match value {
                    "per-commit" => BrokerageScope::PerCommit,
                    "per-task" => BrokerageScope::PerTask,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected per-commit or per-task, got `{other}`"),
                        ))
                    }
                }
            }
            "platform.candidates" => sim.platform_candidates = parse(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Checks cross-key constraints, naming the first offending key.
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::config("sim.mode", "no mode selected"));
        }
        self.sim.validate()
    }

    /// The effective configuration in the same flat format `parse_config` reads.
    pub fn emit(&self) -> String {
        let s = &self.sim;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("sim.mode", self.modes.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","));
        line("sim.runs", s.runs.to_string());
        line("sim.seed", s.seed.to_string());
        line("sim.commits_per_task", s.commits_per_task.to_string());
        line("sim.sequential_commits", s.sequential_commits.to_string());
        match &s.stations {
            StationSource::Preset(p) => line("topology.preset", p.as_str().to_string()),
            StationSource::File(path) => line("topology.file", path.display().to_string()),
        }
        line("roles.publishers", s.roles.publishers.to_string());
        line("roles.workers", s.roles.workers.to_string());
        line("roles.mns", s.roles.masternodes.to_string());
        line("roles.tasks_per_publisher", s.tasks_per_publisher.to_string());
        line("roles.bias_min", s.bias_min.to_string());
        line("roles.bias_max", s.bias_max.to_string());
        line(
            "incentive.k_choices",
            s.k_choices.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
        );
        line("incentive.rho", s.rho.to_string());
        line("brokerage.eta", s.eta.get().to_string());
        line(
            "brokerage.scope",
            match s.scope {
                BrokerageScope::PerCommit => "per-commit",
                BrokerageScope::PerTask => "per-task",
            }
            .to_string(),
        );
        line("platform.candidates", s.platform_candidates.to_string());
        out
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| {
        Error::config(
            key,
            format!("cannot parse `{value}` as {}", std::any::type_name::<T>()),
        )
    })
}

fn parse_modes(value: &str) -> std::result::Result<Vec<Mode>, String> {
    if value.eq_ignore_ascii_case("all") {
        return Ok(Mode::ALL.to_vec());
    }
    let mut modes = Vec::new();
    for part in value.split(',') {
        let m: Mode = part.parse().map_err(|e: Error| e.to_string())?;
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    Ok(modes)
}

/// Splits `key=value`, reporting `origin` on malformed input.
fn split_assignment<'a>(text: &'a str, origin: &str) -> Result<(&'a str, &'a str)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text.trim(), format!("{origin}: expected `key = value`")))?;
    Ok((k.trim(), v.trim()))
}

/// Applies defaults, then the file text, then `overrides`, and validates.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = split_assignment(line, &format!("line {}", n + 1))?;
        cfg.set(k, v)?;
    }
    for o in overrides {
        let (k, v) = split_assignment(o, "override")?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}
