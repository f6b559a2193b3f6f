//! Benchmark, final and majority answers over one task's commit set.
//!
//! All three aggregators take the sign of a sum with `sign(0) = +1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::incentive::{truthful_expected_gain, Belief, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkerId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub u32);

impl fmt::Display for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Binary task type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskType {
    Negative,
    Positive,
}

impl TaskType {
    pub fn value(self) -> i8 {
        match self {
            TaskType::Negative => -1,
            TaskType::Positive => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            TaskType::Negative => TaskType::Positive,
            TaskType::Positive => TaskType::Negative,
        }
    }

    /// `-1` for strictly negative input, `+1` otherwise (zero included).
    pub fn sign_of(sum: f64) -> Self {
        if sum < 0.0 {
            TaskType::Negative
        } else {
            TaskType::Positive
        }
    }
}

impl TryFrom<i64> for TaskType {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(TaskType::Negative),
            1 => Ok(TaskType::Positive),
            other => Err(Error::domain("task type", format!("{other} is not -1 or +1"))),
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskType::Negative => f.write_str("-1"),
            TaskType::Positive => f.write_str("+1"),
        }
    }
}

/// One worker's submission for one task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commit {
    pub worker: WorkerId,
    pub task: TaskId,
    pub answer: TaskType,
    pub belief: Belief,
    pub order: Order,
}

impl Commit {
    /// Weight of this commit in the final answer: the truthful expected gain
    /// evaluated at the committed belief.
    pub fn weight(&self) -> f64 {
        truthful_expected_gain(self.order, self.belief)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Judgement {
    Rewarded,
    Penalized,
}

fn check_commit_set(commits: &[Commit]) -> Result<()> {
    let Some(first) = commits.first() else {
        return Err(Error::Precondition("commit set is empty".into()));
    };
    if let Some(other) = commits.iter().find(|c| c.task != first.task) {
        return Err(Error::Precondition(format!(
            "commit set mixes tasks {} and {}",
            first.task, other.task
        )));
    }
    Ok(())
}

fn unweighted_sign(commits: &[Commit]) -> TaskType {
    let sum: i64 = commits.iter().map(|c| i64::from(c.answer.value())).sum();
    TaskType::sign_of(sum as f64)
}

/// Unweighted sign of the committed types; used only to judge commits.
pub fn benchmark_answer(commits: &[Commit]) -> Result<TaskType> {
    check_commit_set(commits)?;
    Ok(unweighted_sign(commits))
}

/// Answer returned to the publisher: committed types weighted by their expected gain.
pub fn final_answer(commits: &[Commit]) -> Result<TaskType> {
    check_commit_set(commits)?;
    // per-side sums over sorted weights: independent of commit order, and
    // equal weights on both sides cancel exactly
    let side = |t: TaskType| {
        let mut w: Vec<f64> = commits.iter().filter(|c| c.answer == t).map(Commit::weight).collect();
        w.sort_by(f64::total_cmp);
        w.into_iter().sum::<f64>()
    };
    Ok(TaskType::sign_of(side(TaskType::Positive) - side(TaskType::Negative)))
}

/// Majority vote, the final answer of the majority baseline.
pub fn majority_answer(commits: &[Commit]) -> Result<TaskType> {
    check_commit_set(commits)?;
    Ok(unweighted_sign(commits))
}

pub fn judge(commit: &Commit, benchmark: TaskType) -> Judgement {
    if commit.answer == benchmark {
        Judgement::Rewarded
    } else {
        Judgement::Penalized
    }
}
