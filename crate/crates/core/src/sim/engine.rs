use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::workload::{commit_latency, gen_commit, gen_task, Task, WorkerProfile};
use super::{Mode, SimConfig, World};
use crate::aggregation::{benchmark_answer, final_answer, judge, majority_answer, Judgement, TaskId, TaskType, WorkerId};
use crate::economy::{settle_amount, settle_commit, Account, BrokerageScope, Ledger, Memo, Role};
use crate::error::{Error, Result};
use crate::incentive::Money;
use crate::topology::{assign_roles, pick_platform, RoleAssignment, Topology};

const ROLE_STREAM: u64 = 0;
const WORKER_STREAM: u64 = 1;
const TASK_STREAM: u64 = 2;
const PLATFORM_SALT: u64 = 0x5bd1_e995_9e37_79b9;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Everything a run needs besides the topology: who sits where, the worker
/// population, the task queue and the platform location of the baselines.
///
/// Derived from the run seed alone, so all modes of a seed see the same
/// scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub roles: RoleAssignment,
    pub workers: Vec<WorkerProfile>,
    /// Global FIFO queue ordered by (publisher, task index).
    pub tasks: Vec<Task>,
    pub platform: usize,
}

impl Scenario {
    pub fn generate(config: &SimConfig, world: &World, seed: u64) -> Result<Self> {
        let roles = assign_roles(world.topology.len(), config.roles, &mut stream(seed, ROLE_STREAM))?;

        let mut rng = stream(seed, WORKER_STREAM);
        let workers = roles
            .workers
            .iter()
            .enumerate()
            .map(|(i, &station)| {
                let bias = if config.bias_min == config.bias_max {
                    config.bias_min
                } else {
                    rng.random_range(config.bias_min..=config.bias_max)
                };
                let order = config.k_choices[rng.random_range(0..config.k_choices.len())];
                WorkerProfile::new(WorkerId(i as u32), station, bias, order)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rng = stream(seed, TASK_STREAM);
        let mut tasks = Vec::with_capacity(roles.publishers.len() * config.tasks_per_publisher);
        for (p, &station) in roles.publishers.iter().enumerate() {
            for _ in 0..config.tasks_per_publisher {
                let id = TaskId(tasks.len() as u32);
                tasks.push(Task::new(id, Account::publisher(p as u32), station, gen_task(&mut rng)));
            }
        }

        let platform = pick_platform(&world.candidates, seed ^ PLATFORM_SALT)?;
        Ok(Scenario {
            roles,
            workers,
            tasks,
            platform,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub run_id: u32,
    pub mode: Mode,
    pub seed: u64,
    /// Completion time of the last task.
    pub makespan: f64,
    /// Fraction of tasks whose final answer equals the true type.
    pub accuracy: f64,
    pub publisher_spend: Money,
    pub worker_net_total: Money,
    pub mn_net_total: Money,
    pub total_rewards: Money,
    pub total_penalties: Money,
    pub total_brokerage: Money,
    pub net_positions: Vec<(Account, Money)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub task: Task,
    /// Station that carried each commit, parallel to `task.commits`.
    pub carriers: Vec<usize>,
    pub benchmark: TaskType,
    pub final_answer: TaskType,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusyInterval {
    pub worker: WorkerId,
    pub task: TaskId,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub metrics: RunMetrics,
    pub tasks: Vec<TaskRecord>,
    pub busy: Vec<BusyInterval>,
    pub ledger: Ledger,
    pub scenario_platform: usize,
}

#[derive(Debug, PartialEq)]
struct Completion {
    time: f64,
    worker: u32,
}

impl Eq for Completion {}

impl Ord for Completion {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (time, worker)
        other
            .time
            .total_cmp(&self.time)
            .then(other.worker.cmp(&self.worker))
    }
}

impl PartialOrd for Completion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Job {
    task: usize,
    carrier: usize,
    start: f64,
}

struct TaskSlot {
    task: Task,
    carriers: Vec<usize>,
    /// Workers that committed or are committing.
    claimed: Vec<WorkerId>,
    in_flight: usize,
}

struct Engine<'a> {
    config: &'a SimConfig,
    topology: &'a Topology,
    mode: Mode,
    masternodes: &'a [usize],
    platform: usize,
    workers: Vec<WorkerProfile>,
    jobs: Vec<Option<Job>>,
    slots: Vec<TaskSlot>,
    /// Every task before this index has all its commits claimed.
    head: usize,
    heap: BinaryHeap<Completion>,
    ledger: Ledger,
    records: Vec<Option<TaskRecord>>,
    busy: Vec<BusyInterval>,
}

impl Engine<'_> {
    fn available(&self, slot: &TaskSlot, worker: WorkerId) -> bool {
        let needed = self.config.commits_per_task;
        slot.task.commits.len() + slot.in_flight < needed
            && !(self.config.sequential_commits && slot.in_flight > 0)
            && !slot.claimed.contains(&worker)
    }

    fn advance_head(&mut self) {
        let needed = self.config.commits_per_task;
        while self
            .slots
            .get(self.head)
            .is_some_and(|s| s.task.commits.len() + s.in_flight >= needed)
        {
            self.head += 1;
        }
    }

    /// Hands idle workers, in id order, the earliest task they may work on.
    fn dispatch(&mut self, now: f64) -> Result<()> {
        for w in 0..self.workers.len() {
            if self.jobs[w].is_some() {
                continue;
            }
            self.advance_head();
            let id = self.workers[w].id;
            let Some(t) = (self.head..self.slots.len()).find(|&t| self.available(&self.slots[t], id)) else {
                continue;
            };
            let route = self.mode.route(self.masternodes, self.platform);
            let (latency, carrier) = commit_latency(
                self.topology,
                self.workers[w].station,
                self.slots[t].task.publisher_station,
                route,
            )?;
            let slot = &mut self.slots[t];
            slot.claimed.push(id);
            slot.in_flight += 1;
            let end = now + latency;
            self.workers[w].busy_until = end;
            self.jobs[w] = Some(Job {
                task: t,
                carrier,
                start: now,
            });
            self.heap.push(Completion {
                time: end,
                worker: w as u32,
            });
        }
        Ok(())
    }

    fn complete(&mut self, now: f64, w: usize) -> Result<()> {
        let job = self.jobs[w].take().expect("completion for a busy worker");
        let commit = gen_commit(&self.workers[w], &self.slots[job.task].task)?;
        self.busy.push(BusyInterval {
            worker: self.workers[w].id,
            task: commit.task,
            start: job.start,
            end: now,
        });
        let slot = &mut self.slots[job.task];
        slot.in_flight -= 1;
        slot.task.commits.push(commit);
        slot.carriers.push(job.carrier);
        if slot.task.commits.len() == self.config.commits_per_task {
            slot.task.completed_at = Some(now);
            self.settle(job.task)?;
        }
        Ok(())
    }

    fn carrier_account(&self, station: usize) -> Account {
        if self.mode.is_centralized() {
            return Account::masternode(0);
        }
        let idx = self
            .masternodes
            .iter()
            .position(|&m| m == station)
            .expect("relays are masternodes");
        Account::masternode(idx as u32)
    }

    fn settle(&mut self, t: usize) -> Result<()> {
        let slot = &self.slots[t];
        let commits = &slot.task.commits;
        let benchmark = benchmark_answer(commits)?;
        let final_ans = match self.mode {
            Mode::MajorCi => majority_answer(commits)?,
            Mode::BeTrustMec | Mode::ReNaltyCi => final_answer(commits)?,
        };
        let task_carriers: Vec<Account> = slot
            .carriers
            .iter()
            .map(|&c| self.carrier_account(c))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let mut postings = Vec::new();
        for (commit, &carrier) in commits.iter().zip(&slot.carriers) {
            let serving = match self.config.scope {
                BrokerageScope::PerCommit => vec![self.carrier_account(carrier)],
                BrokerageScope::PerTask => task_carriers.clone(),
            };
            let judgement = judge(commit, benchmark);
            match self.mode {
                Mode::MajorCi => {
                    if judgement == Judgement::Rewarded {
                        postings.extend(settle_amount(
                            Account::worker(commit.worker.0),
                            slot.task.publisher,
                            judgement,
                            self.config.rho,
                            self.config.eta,
                            &serving,
                        )?);
                    }
                }
                Mode::BeTrustMec | Mode::ReNaltyCi => postings.extend(settle_commit(
                    commit,
                    judgement,
                    self.config.eta,
                    slot.task.publisher,
                    &serving,
                )?),
            }
        }
        self.ledger.extend(postings);
        self.records[t] = Some(TaskRecord {
            task: slot.task.clone(),
            carriers: slot.carriers.clone(),
            benchmark,
            final_answer: final_ans,
        });
        Ok(())
    }

    fn run(mut self, seed: u64) -> Result<RunTrace> {
        self.dispatch(0.0)?;
        while let Some(first) = self.heap.pop() {
            let now = first.time;
            self.complete(now, first.worker as usize)?;
            while self.heap.peek().is_some_and(|c| c.time == now) {
                let next = self.heap.pop().expect("peeked");
                self.complete(now, next.worker as usize)?;
            }
            self.dispatch(now)?;
        }

        let records: Vec<TaskRecord> = self
            .records
            .into_iter()
            .enumerate()
            .map(|(t, r)| r.ok_or_else(|| Error::Precondition(format!("task {t} never completed"))))
            .collect::<Result<_>>()?;

        let makespan = records
            .iter()
            .filter_map(|r| r.task.completed_at)
            .fold(0.0, f64::max);
        let correct = records
            .iter()
            .filter(|r| r.final_answer == r.task.true_type)
            .count();
        let ledger = self.ledger;
        let metrics = RunMetrics {
            run_id: 0,
            mode: self.mode,
            seed,
            makespan,
            accuracy: correct as f64 / records.len().max(1) as f64,
            publisher_spend: -ledger.role_total(Role::Publisher),
            worker_net_total: ledger.role_total(Role::Worker),
            mn_net_total: ledger.role_total(Role::Masternode),
            total_rewards: ledger.memo_total(Memo::Reward),
            total_penalties: ledger.memo_total(Memo::Penalty),
            total_brokerage: ledger.memo_total(Memo::BrokerageOnReward) + ledger.memo_total(Memo::BrokerageOnPenalty),
            net_positions: ledger.balances().collect(),
        };
        Ok(RunTrace {
            metrics,
            tasks: records,
            busy: self.busy,
            ledger,
            scenario_platform: self.platform,
        })
    }
}

/// Runs an explicit scenario to completion, keeping the full event record.
pub fn run_traced(config: &SimConfig, topology: &Topology, scenario: Scenario, seed: u64) -> Result<RunTrace> {
    if scenario.workers.len() < config.commits_per_task {
        return Err(Error::domain(
            "workers",
            format!(
                "{} workers cannot give {} distinct commits per task",
                scenario.workers.len(),
                config.commits_per_task
            ),
        ));
    }
    if config.commits_per_task == 0 {
        return Err(Error::domain("commits_per_task", "must be positive"));
    }
    if config.mode == Mode::BeTrustMec && scenario.roles.masternodes.is_empty() {
        return Err(Error::domain("masternodes", "empty masternode set"));
    }
    let n_tasks = scenario.tasks.len();
    let engine = Engine {
        config,
        topology,
        mode: config.mode,
        masternodes: &scenario.roles.masternodes,
        platform: scenario.platform,
        jobs: (0..scenario.workers.len()).map(|_| None).collect(),
        workers: scenario.workers.clone(),
        slots: scenario
            .tasks
            .iter()
            .map(|t| TaskSlot {
                task: t.clone(),
                carriers: Vec::new(),
                claimed: Vec::new(),
                in_flight: 0,
            })
            .collect(),
        head: 0,
        heap: BinaryHeap::new(),
        ledger: Ledger::new(),
        records: vec![None; n_tasks],
        busy: Vec::new(),
    };
    engine.run(seed)
}

/// One simulated run of `config.mode` on the scenario derived from `seed`.
pub fn run_once(config: &SimConfig, world: &World, seed: u64) -> Result<RunMetrics> {
    config.validate()?;
    let scenario = Scenario::generate(config, world, seed)?;
    Ok(run_traced(config, &world.topology, scenario, seed)?.metrics)
}
