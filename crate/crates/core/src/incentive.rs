//! Reward-penalty function family and the expected gain a worker obtains by
//! committing a belief value.
//!
//! For an order `k >= 2` and a committed belief `x` in `[0.5, 1]`:
//!
//! ```text
//! reward_k(x)  = (-(k-1)(2x)^k + 2k(2x)^(k-1) - (k+1)) / (2^k - k - 1)
//! penalty_k(x) = ((k-1)(2x)^k - (k-1)) / (2^k - k - 1)
//! ```
//!
//! Both vanish at `x = 0.5`, `reward_k(1) = 1`, both increase strictly on
//! `(0.5, 1]`, and for a worker whose true confidence is `c` the expected gain
//! `c * reward_k(x) - (1 - c) * penalty_k(x)` peaks at `x = c`.

use std::fmt;

use crate::error::{Error, Result};

/// Amount of abstract currency. Positive means a credit to the named party.
pub type Money = f64;

pub const MIN_ORDER: u32 = 2;
pub const MAX_ORDER: u32 = 64;

/// Flat per-answer payment of the majority-vote baseline.
pub const DEFAULT_FLAT_REWARD: Money = 0.5;

/// Personal order value `k` selecting one member of the function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Order(u32);

impl Order {
    pub fn new(k: u32) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&k) {
            return Err(Error::domain(
                "k",
                format!("order {k} outside [{MIN_ORDER}, {MAX_ORDER}]"),
            ));
        }
        Ok(Order(k))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// `2^k - k - 1`, shared by every closed form in the family.
    fn denominator(self) -> f64 {
        2f64.powi(self.0 as i32) - self.as_f64() - 1.0
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A probability in `[0.5, 1]`: either a committed belief or a true confidence.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Belief(f64);

impl Belief {
    pub const HALF: Belief = Belief(0.5);
    pub const ONE: Belief = Belief(1.0);

    pub fn new(value: f64) -> Result<Self> {
        Self::named(value, "belief")
    }

    /// Like [`Belief::new`], reporting `param` as the offending name on error.
    pub fn named(value: f64, param: &'static str) -> Result<Self> {
        if !(0.5..=1.0).contains(&value) {
            return Err(Error::domain(
                param,
                format!("{value} outside [0.5, 1]"),
            ));
        }
        Ok(Belief(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn reward(k: Order, x: Belief) -> Money {
    let kf = k.as_f64();
    let two_x = 2.0 * x.get();
    let lead = two_x.powi(k.get() as i32 - 1);
    (-(kf - 1.0) * lead * two_x + 2.0 * kf * lead - (kf + 1.0)) / k.denominator()
}

pub fn penalty(k: Order, x: Belief) -> Money {
    let kf = k.as_f64();
    let two_x = 2.0 * x.get();
    (kf - 1.0) * (two_x.powi(k.get() as i32) - 1.0) / k.denominator()
}

/// Expected payment for committing `x` when the answer is right with probability `c`.
pub fn expected_gain(k: Order, x: Belief, c: Belief) -> Money {
    let c = c.get();
    c * reward(k, x) - (1.0 - c) * penalty(k, x)
}

/// Expected gain of a worker that commits her true confidence `c`.
///
/// Closed form of `expected_gain(k, c, c)`; also the weight a commit carries
/// when forming the final answer.
pub fn truthful_expected_gain(k: Order, c: Belief) -> Money {
    let kf = k.as_f64();
    let c = c.get();
    ((2.0 * c).powi(k.get() as i32) - 2.0 * c * kf + kf - 1.0) / k.denominator()
}

/// Expected gain under the majority baseline, which pays a flat `rho` for an
/// accepted answer and never penalises.
pub fn major_expected_gain(rho: Money, c: Belief) -> Result<Money> {
    check_flat_reward(rho)?;
    Ok(c.get() * rho)
}

pub(crate) fn check_flat_reward(rho: Money) -> Result<()> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::domain("rho", format!("{rho} must be finite and >= 0")));
    }
    Ok(())
}

pub fn try_reward(k: u32, x: f64) -> Result<Money> {
    Ok(reward(Order::new(k)?, Belief::named(x, "x")?))
}

pub fn try_penalty(k: u32, x: f64) -> Result<Money> {
    Ok(penalty(Order::new(k)?, Belief::named(x, "x")?))
}

pub fn try_expected_gain(k: u32, x: f64, c: f64) -> Result<Money> {
    Ok(expected_gain(
        Order::new(k)?,
        Belief::named(x, "x")?,
        Belief::named(c, "c")?,
    ))
}

pub fn try_truthful_expected_gain(k: u32, c: f64) -> Result<Money> {
    Ok(truthful_expected_gain(Order::new(k)?, Belief::named(c, "c")?))
}
