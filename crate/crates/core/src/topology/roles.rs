use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleCounts {
    pub publishers: usize,
    pub workers: usize,
    pub masternodes: usize,
}

impl RoleCounts {
    pub fn total(&self) -> usize {
        self.publishers + self.workers + self.masternodes
    }
}

impl Default for RoleCounts {
    fn default() -> Self {
        RoleCounts {
            publishers: 5,
            workers: 100,
            masternodes: 20,
        }
    }
}

/// Station indices hosting each stakeholder. The three sets are disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleAssignment {
    pub publishers: Vec<usize>,
    pub workers: Vec<usize>,
    pub masternodes: Vec<usize>,
}

/// Draws publishers, then workers, then masternodes, uniformly and without
/// replacement from `n_stations` stations.
pub fn assign_roles<R: Rng + ?Sized>(n_stations: usize, counts: RoleCounts, rng: &mut R) -> Result<RoleAssignment> {
    let need = counts.total();
    if need > n_stations {
        return Err(Error::domain(
            "roles",
            format!("{need} stations needed for roles, only {n_stations} available"),
        ));
    }
    let drawn = index::sample(rng, n_stations, need).into_vec();
    let (publishers, rest) = drawn.split_at(counts.publishers);
    let (workers, masternodes) = rest.split_at(counts.workers);
    Ok(RoleAssignment {
        publishers: publishers.to_vec(),
        workers: workers.to_vec(),
        masternodes: masternodes.to_vec(),
    })
}

/// Uniform choice of one platform location, fixed by `seed`.
pub fn pick_platform(candidates: &[usize], seed: u64) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::domain("candidates", "empty candidate list"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(candidates[rng.random_range(0..candidates.len())])
}
