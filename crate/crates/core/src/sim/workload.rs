//! Task and commit generation and per-commit routing latency.

use rand::Rng;

use super::Mode;
use crate::aggregation::{Commit, TaskId, TaskType, WorkerId};
use crate::economy::Account;
use crate::error::{Error, Result};
use crate::incentive::{Belief, Order};
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    pub publisher: Account,
    /// Station hosting the publisher.
    pub publisher_station: usize,
    pub true_type: TaskType,
    pub true_belief: Belief,
    pub commits: Vec<Commit>,
    pub completed_at: Option<f64>,
}

impl Task {
    pub fn new(id: TaskId, publisher: Account, publisher_station: usize, truth: (TaskType, Belief)) -> Self {
        Task {
            id,
            publisher,
            publisher_station,
            true_type: truth.0,
            true_belief: truth.1,
            commits: Vec::new(),
            completed_at: None,
        }
    }

    pub fn has_commit_from(&self, worker: WorkerId) -> bool {
        self.commits.iter().any(|c| c.worker == worker)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerProfile {
    pub id: WorkerId,
    pub station: usize,
    /// Offset added to a task's true confidence; in `[-0.5, 0.5]`.
    pub bias: f64,
    pub order: Order,
    pub busy_until: f64,
}

impl WorkerProfile {
    pub fn new(id: WorkerId, station: usize, bias: f64, order: Order) -> Result<Self> {
        if !(-0.5..=0.5).contains(&bias) {
            return Err(Error::domain("bias", format!("{bias} outside [-0.5, 0.5]")));
        }
        Ok(WorkerProfile {
            id,
            station,
            bias,
            order,
            busy_until: 0.0,
        })
    }

    pub fn account(&self) -> Account {
        Account::worker(self.id.0)
    }
}

/// Maps two unit draws to a task truth: `u_type < 0.5` gives `+1`, and the
/// confidence is `0.5 + 0.5 * u_belief` for `u_belief` in `(0, 1]`.
pub fn task_from_draws(u_type: f64, u_belief: f64) -> (TaskType, Belief) {
    let truth = if u_type < 0.5 {
        TaskType::Positive
    } else {
        TaskType::Negative
    };
    let c0 = (0.5 + 0.5 * u_belief).clamp(0.5, 1.0);
    // the open end at 0.5 is only reachable through a zero draw
    let c0 = if c0 <= 0.5 { f64::from_bits(0.5f64.to_bits() + 1) } else { c0 };
    (truth, Belief::new(c0).expect("clamped into range"))
}

pub fn gen_task<R: Rng + ?Sized>(rng: &mut R) -> (TaskType, Belief) {
    let u_type: f64 = rng.random();
    let u_belief = 1.0 - rng.random::<f64>();
    task_from_draws(u_type, u_belief)
}

/// The commit a biased worker produces for a task.
///
/// With `s = c0 + bias`: below 0.5 she picks the wrong type with belief
/// `1 - s`; above 1 the right type with belief 1; otherwise the right type
/// with belief `s`.
pub fn gen_commit(worker: &WorkerProfile, task: &Task) -> Result<Commit> {
    if task.has_commit_from(worker.id) {
        return Err(Error::Precondition(format!(
            "worker {} already committed to task {}",
            worker.id, task.id
        )));
    }
    let s = task.true_belief.get() + worker.bias;
    let (answer, belief) = if s < 0.5 {
        (task.true_type.flipped(), 1.0 - s)
    } else if s > 1.0 {
        (task.true_type, 1.0)
    } else {
        (task.true_type, s)
    };
    Ok(Commit {
        worker: worker.id,
        task: task.id,
        answer,
        belief: Belief::new(belief)?,
        order: worker.order,
    })
}

/// Where commit data travels between worker and publisher.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route<'a> {
    /// Through whichever masternode minimises the two-hop latency.
    Relay(&'a [usize]),
    /// Through the central platform station.
    Platform(usize),
}

/// Round trip (task data down, answer up) between worker and publisher.
/// Returns the latency and the station that carried the data.
pub fn commit_latency(topology: &Topology, worker_station: usize, publisher_station: usize, route: Route<'_>) -> Result<(f64, usize)> {
    let (via, one_way) = match route {
        Route::Relay(mns) => {
            let (mn, sum) = topology.best_relay_path(worker_station, publisher_station, mns)?;
            (mn, sum)
        }
        Route::Platform(p) => (
            p,
            topology.latency(worker_station, p) + topology.latency(p, publisher_station),
        ),
    };
    Ok((2.0 * one_way, via))
}

impl Mode {
    pub(crate) fn route<'a>(self, masternodes: &'a [usize], platform: usize) -> Route<'a> {
        if self.is_centralized() {
            Route::Platform(platform)
        } else {
            Route::Relay(masternodes)
        }
    }
}
