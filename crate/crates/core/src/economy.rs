//! Double-entry settlement of rewards, penalties and brokerage.
//!
//! Every posting moves a strictly positive amount from a debit account to a
//! credit account, so the balances of all accounts always sum to zero.
//!
//! Brokerage follows the reward or penalty it is attached to: on a reward the
//! publisher additionally pays `eta * r` to the serving masternodes, on a
//! penalty the serving masternodes hand `eta * p` back to the publisher. Both
//! are split equally between the masternodes involved.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use crate::aggregation::{Commit, Judgement};
use crate::error::{Error, Result};
use crate::incentive::{penalty, reward, Money};

/// Tolerance used when comparing money amounts.
pub const MONEY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Publisher,
    Worker,
    Masternode,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Publisher => "publisher",
            Role::Worker => "worker",
            Role::Masternode => "masternode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Account {
    pub role: Role,
    pub id: u32,
}

impl Account {
    pub fn publisher(id: u32) -> Self {
        Account { role: Role::Publisher, id }
    }

    pub fn worker(id: u32) -> Self {
        Account { role: Role::Worker, id }
    }

    pub fn masternode(id: u32) -> Self {
        Account { role: Role::Masternode, id }
    }
}

impl fmt::Display for Account {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.role.as_str(), self.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Memo {
    Reward,
    Penalty,
    BrokerageOnReward,
    BrokerageOnPenalty,
}

impl Memo {
    pub fn as_str(self) -> &'static str {
        match self {
            Memo::Reward => "reward",
            Memo::Penalty => "penalty",
            Memo::BrokerageOnReward => "brokerage_on_reward",
            Memo::BrokerageOnPenalty => "brokerage_on_penalty",
        }
    }

    pub fn is_brokerage(self) -> bool {
        matches!(self, Memo::BrokerageOnReward | Memo::BrokerageOnPenalty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerPosting {
    pub debit: Account,
    pub credit: Account,
    pub amount: Money,
    pub memo: Memo,
}

impl LedgerPosting {
    pub fn new(debit: Account, credit: Account, amount: Money, memo: Memo) -> Result<Self> {
        if !(amount.is_finite() && amount > 0.0) {
            return Err(Error::domain("amount", format!("{amount} must be > 0")));
        }
        if debit == credit {
            return Err(Error::Precondition(format!("posting from {debit} to itself")));
        }
        Ok(LedgerPosting {
            debit,
            credit,
            amount,
            memo,
        })
    }
}

/// Share of each reward or penalty borne by the serving masternodes.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BrokerageRatio(f64);

impl BrokerageRatio {
    pub const ZERO: BrokerageRatio = BrokerageRatio(0.0);

    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::domain("eta", format!("{eta} outside [0, 1)")));
        }
        Ok(BrokerageRatio(eta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Which masternodes share the brokerage of a commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BrokerageScope {
    /// Only the relay that carried this commit.
    #[default]
    PerCommit,
    /// Every distinct relay that served any commit of the task.
    PerTask,
}

/// Postings for one judged commit, with the amount taken from the reward or
/// penalty function of the committing worker.
pub fn settle_commit(
    commit: &Commit,
    judgement: Judgement,
    eta: BrokerageRatio,
    publisher: Account,
    serving_mns: &[Account],
) -> Result<Vec<LedgerPosting>> {
    let amount = match judgement {
        Judgement::Rewarded => reward(commit.order, commit.belief),
        Judgement::Penalized => penalty(commit.order, commit.belief),
    };
    settle_amount(
        Account::worker(commit.worker.0),
        publisher,
        judgement,
        amount,
        eta,
        serving_mns,
    )
}

/// Postings for a reward (publisher pays worker) or penalty (worker pays
/// publisher) of `amount`, plus the attached brokerage.
///
/// Zero amounts produce no postings.
pub fn settle_amount(
    worker: Account,
    publisher: Account,
    judgement: Judgement,
    amount: Money,
    eta: BrokerageRatio,
    serving_mns: &[Account],
) -> Result<Vec<LedgerPosting>> {
    if serving_mns.is_empty() {
        return Err(Error::Precondition("no serving masternode".into()));
    }
    if let Some(bad) = serving_mns.iter().find(|a| a.role != Role::Masternode) {
        return Err(Error::Precondition(format!("{bad} is not a masternode")));
    }
    if !(amount.is_finite() && amount >= 0.0) {
        return Err(Error::domain("amount", format!("{amount} must be >= 0")));
    }

    let mut postings = Vec::with_capacity(1 + serving_mns.len());
    if amount == 0.0 {
        return Ok(postings);
    }
    let share = eta.get() * amount / serving_mns.len() as f64;
    match judgement {
        Judgement::Rewarded => {
            postings.push(LedgerPosting::new(publisher, worker, amount, Memo::Reward)?);
            if share > 0.0 {
                for &mn in serving_mns {
                    postings.push(LedgerPosting::new(publisher, mn, share, Memo::BrokerageOnReward)?);
                }
            }
        }
        Judgement::Penalized => {
            postings.push(LedgerPosting::new(worker, publisher, amount, Memo::Penalty)?);
            if share > 0.0 {
                for &mn in serving_mns {
                    postings.push(LedgerPosting::new(mn, publisher, share, Memo::BrokerageOnPenalty)?);
                }
            }
        }
    }
    Ok(postings)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::default();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

/// Append-only journal plus running balances.
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    journal: Vec<LedgerPosting>,
    balances: BTreeMap<Account, Accumulator>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Books `postings` in order, returning the updated ledger.
    pub fn apply(mut self, postings: impl IntoIterator<Item = LedgerPosting>) -> Self {
        self.extend(postings);
        self
    }

    pub fn extend(&mut self, postings: impl IntoIterator<Item = LedgerPosting>) {
        for p in postings {
            self.balances.entry(p.debit).or_default().add(-p.amount);
            self.balances.entry(p.credit).or_default().add(p.amount);
            self.journal.push(p);
        }
    }

    /// Credits minus debits; zero for accounts never posted.
    pub fn net_position(&self, account: Account) -> Money {
        self.balances.get(&account).map_or(0.0, Accumulator::value)
    }

    pub fn journal(&self) -> &[LedgerPosting] {
        &self.journal
    }

    /// Accounts with at least one posting, in role then id order.
    pub fn balances(&self) -> impl Iterator<Item = (Account, Money)> + '_ {
        self.balances.iter().map(|(a, m)| (*a, m.value()))
    }

    pub fn total_balance(&self) -> Money {
        compensated_sum(self.balances.values().map(Accumulator::value))
    }

    pub fn role_total(&self, role: Role) -> Money {
        compensated_sum(
            self.balances
                .iter()
                .filter(|(a, _)| a.role == role)
                .map(|(_, m)| m.value()),
        )
    }

    pub fn memo_total(&self, memo: Memo) -> Money {
        compensated_sum(self.journal.iter().filter(|p| p.memo == memo).map(|p| p.amount))
    }

    /// Writes the journal as CSV rows, optionally preceded by the header.
    pub fn write_journal_csv<W: Write>(&self, out: &mut W, run_id: u32, header: bool) -> Result<()> {
        let wrap = |e| Error::io("writing journal", e);
        if header {
            writeln!(out, "{JOURNAL_CSV_HEADER}").map_err(wrap)?;
        }
        for (seq, p) in self.journal.iter().enumerate() {
            writeln!(
                out,
                "{run_id},{seq},{},{},{},{},{},{}",
                p.debit.role.as_str(),
                p.debit.id,
                p.credit.role.as_str(),
                p.credit.id,
                p.amount,
                p.memo.as_str()
            )
            .map_err(wrap)?;
        }
        Ok(())
    }
}

pub const JOURNAL_CSV_HEADER: &str =
    "run_id,seq,debit_role,debit_id,credit_role,credit_id,amount,memo";
