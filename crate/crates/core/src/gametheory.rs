//! Two-player join/leave games between edge servers, solved by exhaustive
//! enumeration of the four pure profiles.
//!
//! A profile is *strong Nash* when no coalition ({A}, {B} or {A, B}) has a
//! joint deviation that makes every one of its members strictly better off.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::incentive::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Join,
    Leave,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Join, Strategy::Leave];

    pub fn other(self) -> Self {
        match self {
            Strategy::Join => Strategy::Leave,
            Strategy::Leave => Strategy::Join,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Join => "join",
            Strategy::Leave => "leave",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    pub a: Strategy,
    pub b: Strategy,
}

impl Profile {
    pub const fn new(a: Strategy, b: Strategy) -> Self {
        Profile { a, b }
    }

    pub fn all() -> impl Iterator<Item = Profile> {
        Strategy::ALL
            .into_iter()
            .flat_map(|a| Strategy::ALL.into_iter().map(move |b| Profile::new(a, b)))
    }

    fn strategy(self, player: Player) -> Strategy {
        match player {
            Player::A => self.a,
            Player::B => self.b,
        }
    }

    fn with(self, player: Player, s: Strategy) -> Profile {
        match player {
            Player::A => Profile::new(s, self.b),
            Player::B => Profile::new(self.a, s),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceMode {
    Strict,
    Weak,
}

/// Payoffs `(A, B)` for each of the four profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoByTwoGame {
    payoffs: [[(Money, Money); 2]; 2],
}

fn idx(s: Strategy) -> usize {
    match s {
        Strategy::Join => 0,
        Strategy::Leave => 1,
    }
}

impl TwoByTwoGame {
    /// Builds a game from a payoff function evaluated on every profile.
    pub fn from_fn(mut f: impl FnMut(Profile) -> (Money, Money)) -> Result<Self> {
        let mut payoffs = [[(0.0, 0.0); 2]; 2];
        for p in Profile::all() {
            let (pa, pb) = f(p);
            if !(pa.is_finite() && pb.is_finite()) {
                return Err(Error::domain("payoff", format!("non-finite payoff at {p}")));
            }
            payoffs[idx(p.a)][idx(p.b)] = (pa, pb);
        }
        Ok(TwoByTwoGame { payoffs })
    }

    pub fn payoff(&self, p: Profile) -> (Money, Money) {
        self.payoffs[idx(p.a)][idx(p.b)]
    }

    pub fn payoff_of(&self, p: Profile, player: Player) -> Money {
        let (a, b) = self.payoff(p);
        match player {
            Player::A => a,
            Player::B => b,
        }
    }

    /// Adds `delta` to every payoff of `player`.
    pub fn shifted(&self, player: Player, delta: Money) -> Self {
        let mut g = *self;
        for row in g.payoffs.iter_mut() {
            for cell in row.iter_mut() {
                match player {
                    Player::A => cell.0 += delta,
                    Player::B => cell.1 += delta,
                }
            }
        }
        g
    }
}

/// Base gains and side-payments shared by both constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseGains {
    pub a: Money,
    pub b: Money,
    pub c: Money,
    pub d: Money,
}

impl BaseGains {
    fn check(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(name, format!("{v} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Join/leave game without a trusted third party. Constraint: `0 < alpha <= c`, `0 < beta <= d`.
pub fn table1_game(g: BaseGains, alpha: Money, beta: Money) -> Result<TwoByTwoGame> {
    g.check()?;
    if !(alpha > 0.0 && alpha <= g.c) {
        return Err(Error::domain(
            "alpha",
            format!("table I requires 0 < alpha <= c, got alpha={alpha}, c={}", g.c),
        ));
    }
    if !(beta > 0.0 && beta <= g.d) {
        return Err(Error::domain(
            "beta",
            format!("table I requires 0 < beta <= d, got beta={beta}, d={}", g.d),
        ));
    }
    let BaseGains { a, b, c, d } = g;
    TwoByTwoGame::from_fn(|p| match (p.a, p.b) {
        (Strategy::Join, Strategy::Join) => (a + c, b + d),
        (Strategy::Join, Strategy::Leave) => (a + c - alpha, b + d + alpha),
        (Strategy::Leave, Strategy::Join) => (a + c + beta, b + d - beta),
        (Strategy::Leave, Strategy::Leave) => (a, b),
    })
}

/// Join/leave game with contract-enforced trading fees `eps1`, `eps2`.
///
/// Constraint: `0 < eps_i < min(c, d)`. When the companion side-payments of a
/// table I parameterisation are supplied, also `eps_i < min(alpha, beta)`.
pub fn table2_game(
    g: BaseGains,
    eps1: Money,
    eps2: Money,
    companion: Option<(Money, Money)>,
) -> Result<TwoByTwoGame> {
    g.check()?;
    let cap = g.c.min(g.d);
    for (name, eps) in [("eps1", eps1), ("eps2", eps2)] {
        if !(eps > 0.0 && eps < cap) {
            return Err(Error::domain(
                name,
                format!("table II requires 0 < {name} < c, d, got {name}={eps}, c={}, d={}", g.c, g.d),
            ));
        }
        if let Some((alpha, beta)) = companion {
            if eps >= alpha.min(beta) {
                return Err(Error::domain(
                    name,
                    format!("table II requires {name} < alpha, beta, got {name}={eps}, alpha={alpha}, beta={beta}"),
                ));
            }
        }
    }
    let BaseGains { a, b, c, d } = g;
    TwoByTwoGame::from_fn(|p| match (p.a, p.b) {
        (Strategy::Join, Strategy::Join) => (a + c, b + d),
        (Strategy::Join, Strategy::Leave) => (a + c - eps2, b + d - eps2),
        (Strategy::Leave, Strategy::Join) => (a + c - eps1, b + d - eps1),
        (Strategy::Leave, Strategy::Leave) => (a, b),
    })
}

const REL_TOL: f64 = 1e-12;

/// `x > y` beyond rounding noise; payoffs within a relative `1e-12` tie.
fn gt(x: Money, y: Money) -> bool {
    x - y > REL_TOL * x.abs().max(y.abs()).max(1.0)
}

/// Profiles where no player gains strictly by deviating alone.
pub fn pure_nash(game: &TwoByTwoGame) -> BTreeSet<Profile> {
    Profile::all()
        .filter(|&p| {
            [Player::A, Player::B].into_iter().all(|pl| {
                let dev = p.with(pl, p.strategy(pl).other());
                !gt(game.payoff_of(dev, pl), game.payoff_of(p, pl))
            })
        })
        .collect()
}

/// Profiles immune to every coalition deviation that strictly improves all
/// coalition members.
pub fn strong_nash(game: &TwoByTwoGame) -> BTreeSet<Profile> {
    let coalitions: [&[Player]; 3] = [&[Player::A], &[Player::B], &[Player::A, Player::B]];
    Profile::all()
        .filter(|&p| {
            coalitions.iter().all(|coalition| {
                // deviations only change coalition members' strategies
                Profile::all()
                    .filter(|q| {
                        *q != p
                            && [Player::A, Player::B]
                                .iter()
                                .all(|pl| coalition.contains(pl) || q.strategy(*pl) == p.strategy(*pl))
                    })
                    .all(|q| {
                        !coalition
                            .iter()
                            .all(|&pl| gt(game.payoff_of(q, pl), game.payoff_of(p, pl)))
                    })
            })
        })
        .collect()
}

/// Strategies of `player` that dominate the alternative in the given mode.
pub fn dominant_strategies(game: &TwoByTwoGame, player: Player, mode: DominanceMode) -> BTreeSet<Strategy> {
    let opponent_profiles = |own: Strategy| {
        Strategy::ALL.into_iter().map(move |opp| match player {
            Player::A => Profile::new(own, opp),
            Player::B => Profile::new(opp, own),
        })
    };
    Strategy::ALL
        .into_iter()
        .filter(|&s| {
            let pairs: Vec<(Money, Money)> = opponent_profiles(s)
                .zip(opponent_profiles(s.other()))
                .map(|(mine, alt)| (game.payoff_of(mine, player), game.payoff_of(alt, player)))
                .collect();
            let better = pairs.iter().filter(|&&(m, a)| gt(m, a)).count();
            let worse = pairs.iter().filter(|&&(m, a)| gt(a, m)).count();
            match mode {
                DominanceMode::Strict => better == pairs.len(),
                DominanceMode::Weak => worse == 0 && better > 0,
            }
        })
        .collect()
}

/// Profiles not Pareto-dominated by any other profile.
pub fn pareto_frontier(game: &TwoByTwoGame) -> BTreeSet<Profile> {
    let dominates = |q: Profile, p: Profile| {
        let (qa, qb) = game.payoff(q);
        let (pa, pb) = game.payoff(p);
        !gt(pa, qa) && !gt(pb, qb) && (gt(qa, pa) || gt(qb, pb))
    };
    Profile::all()
        .filter(|&p| !Profile::all().any(|q| dominates(q, p)))
        .collect()
}
