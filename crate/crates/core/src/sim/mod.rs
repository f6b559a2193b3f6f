//! Discrete-event simulation of task publication, commit gathering, routing
//! and settlement for the decentralized system and its two centralized
//! baselines.

mod batch;
mod engine;
mod workload;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::economy::{BrokerageRatio, BrokerageScope};
use crate::error::{Error, Result};
use crate::incentive::{check_flat_reward, Order, DEFAULT_FLAT_REWARD};
use crate::topology::{load_stations, Preset, RoleCounts, Station, Topology};

pub use batch::{
    run_batch, write_results_csv, write_summary_csv, BatchSummary, Stat, RESULTS_CSV_HEADER,
    SUMMARY_CSV_HEADER,
};
pub use engine::{run_once, run_traced, BusyInterval, RunMetrics, RunTrace, Scenario, TaskRecord};
pub use workload::{commit_latency, gen_commit, gen_task, task_from_draws, Route, Task, WorkerProfile};

/// Seed of the embedded station layouts used by `simulate`; fixed so that
/// every run of a preset sees the same city.
pub const DATASET_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Relays through the nearest masternode, reward-penalty settlement.
    BeTrustMec,
    /// Central platform, flat reward, majority vote.
    MajorCi,
    /// Central platform, reward-penalty settlement.
    ReNaltyCi,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::BeTrustMec, Mode::MajorCi, Mode::ReNaltyCi];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::BeTrustMec => "betrust",
            Mode::MajorCi => "major",
            Mode::ReNaltyCi => "renalty",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::BeTrustMec => "BeTrustMEC",
            Mode::MajorCi => "Major-CI",
            Mode::ReNaltyCi => "ReNalty-CI",
        }
    }

    pub fn is_centralized(self) -> bool {
        !matches!(self, Mode::BeTrustMec)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "betrust" | "betrustmec" => Ok(Mode::BeTrustMec),
            "major" | "majorci" => Ok(Mode::MajorCi),
            "renalty" | "renaltyci" => Ok(Mode::ReNaltyCi),
            _ => Err(Error::domain("mode", format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationSource {
    Preset(Preset),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mode: Mode,
    pub stations: StationSource,
    pub roles: RoleCounts,
    pub tasks_per_publisher: usize,
    pub commits_per_task: usize,
    /// Gather a task's commits one at a time instead of concurrently.
    pub sequential_commits: bool,
    pub eta: BrokerageRatio,
    pub scope: BrokerageScope,
    pub rho: f64,
    pub k_choices: Vec<Order>,
    /// Worker bias is uniform on `[bias_min, bias_max]`.
    pub bias_min: f64,
    pub bias_max: f64,
    pub platform_candidates: usize,
    pub seed: u64,
    pub runs: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: Mode::BeTrustMec,
            stations: StationSource::Preset(Preset::Shanghai),
            roles: RoleCounts::default(),
            tasks_per_publisher: 2000,
            commits_per_task: 3,
            sequential_commits: false,
            eta: BrokerageRatio::new(0.1).expect("valid default"),
            scope: BrokerageScope::PerCommit,
            rho: DEFAULT_FLAT_REWARD,
            k_choices: [2, 3, 4].map(|k| Order::new(k).expect("valid default")).to_vec(),
            bias_min: -0.5,
            bias_max: 0.5,
            platform_candidates: 20,
            seed: 1,
            runs: 20,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: usize| {
            if v == 0 {
                Err(Error::config(key, "must be positive"))
            } else {
                Ok(())
            }
        };
        positive("roles.publishers", self.roles.publishers)?;
        positive("roles.workers", self.roles.workers)?;
        positive("roles.mns", self.roles.masternodes)?;
        positive("roles.tasks_per_publisher", self.tasks_per_publisher)?;
        positive("sim.commits_per_task", self.commits_per_task)?;
        positive("sim.runs", self.runs)?;
        positive("platform.candidates", self.platform_candidates)?;
        if self.roles.workers < self.commits_per_task {
            return Err(Error::config(
                "roles.workers",
                format!(
                    "{} workers cannot give {} distinct commits per task",
                    self.roles.workers, self.commits_per_task
                ),
            ));
        }
        check_flat_reward(self.rho).map_err(|e| Error::config("incentive.rho", e.to_string()))?;
        if self.k_choices.is_empty() {
            return Err(Error::config("incentive.k_choices", "empty list"));
        }
        let in_range = |b: f64| (-0.5..=0.5).contains(&b);
        if !(in_range(self.bias_min) && in_range(self.bias_max) && self.bias_min <= self.bias_max) {
            return Err(Error::config(
                "roles.bias_min",
                format!(
                    "bias range [{}, {}] must lie within [-0.5, 0.5]",
                    self.bias_min, self.bias_max
                ),
            ));
        }
        Ok(())
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        SimConfig {
            mode,
            ..self.clone()
        }
    }
}

/// Immutable inputs shared by every run of a batch.
#[derive(Debug, Clone)]
pub struct World {
    pub topology: Topology,
    /// Candidate platform stations for the centralized modes, best first.
    pub candidates: Vec<usize>,
}

impl World {
    pub fn new(topology: Topology, candidate_count: usize) -> Result<Self> {
        let candidates = topology.candidate_platforms(candidate_count)?;
        Ok(World { topology, candidates })
    }

    pub fn from_stations(stations: Vec<Station>, candidate_count: usize) -> Result<Self> {
        Self::new(Topology::from_stations(stations)?, candidate_count)
    }

    pub fn build(config: &SimConfig) -> Result<Self> {
        let stations = match &config.stations {
            StationSource::Preset(p) => p.stations(DATASET_SEED),
            StationSource::File(path) => load_stations(path)?,
        };
        if stations.len() < config.roles.total() {
            return Err(Error::config(
                "roles",
                format!(
                    "{} stations cannot host {} stakeholders",
                    stations.len(),
                    config.roles.total()
                ),
            ));
        }
        Self::from_stations(stations, config.platform_candidates)
    }
}
