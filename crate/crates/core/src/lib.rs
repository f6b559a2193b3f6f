//! Reward-penalty incentives for crowd-intelligence tasks on mobile edge
//! networks: pricing of committed beliefs, answer aggregation, brokerage
//! settlement, the edge-server join/leave games, and a deterministic
//! simulator comparing a masternode-relayed platform with two centralized
//! baselines.

pub mod aggregation;
pub mod config;
pub mod economy;
pub mod error;
pub mod gametheory;
pub mod incentive;
pub mod report;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
