//! Plot-ready expected-gain curves and the join/leave game report.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gametheory::{
    dominant_strategies, pareto_frontier, pure_nash, strong_nash, DominanceMode, Player, Profile, Strategy,
    TwoByTwoGame,
};
use crate::incentive::{major_expected_gain, truthful_expected_gain, Belief, Money, Order};

pub const CURVES_CSV_HEADER: &str = "k,c,rp_gain,major_gain";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub k: Order,
    pub c: f64,
    pub rp_gain: Money,
    pub major_gain: Money,
}

/// Confidence grid over `[0.5, 1]` with spacing at most `step`; both ends included.
pub fn belief_grid(step: f64) -> Result<Vec<Belief>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::domain("grid_step", format!("{step} must be > 0")));
    }
    let n = ((0.5 / step) - 1e-9).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| Belief::new(0.5 + 0.5 * i as f64 / n as f64))
        .collect()
}

/// Truthful expected gain of the reward-penalty family against the flat
/// reward baseline, for each order in `ks`.
pub fn curves(ks: &[Order], rho: Money, step: f64) -> Result<Vec<CurveRow>> {
    let grid = belief_grid(step)?;
    let mut rows = Vec::with_capacity(ks.len() * grid.len());
    for &k in ks {
        for &c in &grid {
            rows.push(CurveRow {
                k,
                c: c.get(),
                rp_gain: truthful_expected_gain(k, c),
                major_gain: major_expected_gain(rho, c)?,
            });
        }
    }
    Ok(rows)
}

pub fn write_curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CURVES_CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.k, r.c, r.rp_gain, r.major_gain);
    }
    out
}

/// Smallest grid confidence at which the reward-penalty gain exceeds the
/// flat-reward gain.
pub fn first_grid_crossing(rows: &[CurveRow], k: Order) -> Option<f64> {
    rows.iter()
        .filter(|r| r.k == k && r.rp_gain > r.major_gain)
        .map(|r| r.c)
        .reduce(f64::min)
}

/// Confidence where the two gain curves meet, by bisection.
///
/// Returns `None` unless the flat reward is in `(0, 1)`; only then does the
/// convex reward-penalty curve start below and end above the baseline line.
pub fn crossing_point(k: Order, rho: Money) -> Option<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return None;
    }
    let gap = |c: f64| truthful_expected_gain(k, Belief::new(c).expect("bisection stays in range")) - rho * c;
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Which payoff table a game was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameTable {
    Untrusted,
    ContractEnforced,
}

impl GameTable {
    pub fn number(self) -> u8 {
        match self {
            GameTable::Untrusted => 1,
            GameTable::ContractEnforced => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameReport {
    pub table: GameTable,
    pub game: TwoByTwoGame,
    pub nash: BTreeSet<Profile>,
    pub strong_nash: BTreeSet<Profile>,
    /// `(player, mode, dominant strategies)` for both players and both modes.
    pub dominance: Vec<(Player, DominanceMode, BTreeSet<Strategy>)>,
    pub pareto: BTreeSet<Profile>,
    pub findings: Vec<String>,
}

fn fmt_set<T: std::fmt::Display>(set: &BTreeSet<T>) -> String {
    let items: Vec<String> = set.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn player_name(p: Player) -> &'static str {
    match p {
        Player::A => "A",
        Player::B => "B",
    }
}

fn mode_name(m: DominanceMode) -> &'static str {
    match m {
        DominanceMode::Strict => "strict",
        DominanceMode::Weak => "weak",
    }
}

pub fn analyze_game(table: GameTable, game: TwoByTwoGame) -> GameReport {
    let nash = pure_nash(&game);
    let strong = strong_nash(&game);
    let mut dominance = Vec::new();
    for player in [Player::A, Player::B] {
        for mode in [DominanceMode::Strict, DominanceMode::Weak] {
            dominance.push((player, mode, dominant_strategies(&game, player, mode)));
        }
    }
    let pareto = pareto_frontier(&game);

    let jj = Profile::new(Strategy::Join, Strategy::Join);
    let ll = Profile::new(Strategy::Leave, Strategy::Leave);
    let mut findings = Vec::new();
    match table {
        GameTable::Untrusted => {
            let holds = strong == BTreeSet::from([ll]);
            findings.push(format!(
                "claim `(leave,leave) is the only strong Nash equilibrium`: {} (strong Nash under coalition-wide strict improvement = {})",
                if holds { "reproduced" } else { "NOT reproduced" },
                fmt_set(&strong)
            ));
            let weak_leave = dominance
                .iter()
                .filter(|(_, m, _)| *m == DominanceMode::Weak)
                .all(|(_, _, s)| s.contains(&Strategy::Leave));
            findings.push(format!(
                "leave weakly dominant for both players: {}",
                if weak_leave { "yes" } else { "no (only at alpha = c, beta = d)" }
            ));
            let (jja, jjb) = game.payoff(jj);
            let (lla, llb) = game.payoff(ll);
            findings.push(format!(
                "(join,join) is a pure Nash equilibrium: {}; (leave,leave) Pareto-dominated by (join,join): {}",
                if nash.contains(&jj) { "yes" } else { "no" },
                if jja > lla && jjb > llb { "yes" } else { "no" },
            ));
        }
        GameTable::ContractEnforced => {
            let holds = strong == BTreeSet::from([jj]) && nash == strong;
            let strict_join = dominance
                .iter()
                .filter(|(_, m, _)| *m == DominanceMode::Strict)
                .all(|(_, _, s)| s.contains(&Strategy::Join));
            findings.push(format!(
                "claim `(join,join) is the only strong Nash equilibrium`: {}",
                if holds { "reproduced" } else { "NOT reproduced" }
            ));
            findings.push(format!(
                "join strictly dominant for both players: {}",
                if strict_join { "yes" } else { "no" }
            ));
        }
    }

    GameReport {
        table,
        game,
        nash,
        strong_nash: strong,
        dominance,
        pareto,
        findings,
    }
}

impl GameReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Table {} payoff matrix (A payoff / B payoff)", self.table.number());
        let _ = writeln!(out, "{:>8} | {:>19} | {:>19}", "A \\ B", "join", "leave");
        for a in Strategy::ALL {
            let cell = |b| {
                let (pa, pb) = self.game.payoff(Profile::new(a, b));
                format!("{pa} / {pb}")
            };
            let _ = writeln!(out, "{:>8} | {:>19} | {:>19}", a.as_str(), cell(Strategy::Join), cell(Strategy::Leave));
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<22}{}", "pure Nash:", fmt_set(&self.nash));
        let _ = writeln!(out, "{:<22}{}", "strong Nash:", fmt_set(&self.strong_nash));
        for (player, mode, set) in &self.dominance {
            let label = format!("dominant {} ({}):", player_name(*player), mode_name(*mode));
            let _ = writeln!(out, "{label:<22}{}", fmt_set(set));
        }
        let _ = writeln!(out, "{:<22}{}", "Pareto frontier:", fmt_set(&self.pareto));
        let _ = writeln!(out);
        for f in &self.findings {
            let _ = writeln!(out, "* {f}");
        }
        out
    }

    /// Long-format CSV: `table,section,item,value`.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("table,section,item,value\n");
        let t = self.table.number();
        for p in Profile::all() {
            let (pa, pb) = self.game.payoff(p);
            let _ = writeln!(out, "{t},payoff_a,{}-{},{pa}", p.a, p.b);
            let _ = writeln!(out, "{t},payoff_b,{}-{},{pb}", p.a, p.b);
        }
        let profiles = |out: &mut String, section: &str, set: &BTreeSet<Profile>| {
            for p in set {
                let _ = writeln!(out, "{t},{section},{}-{},1", p.a, p.b);
            }
        };
        profiles(&mut out, "nash", &self.nash);
        profiles(&mut out, "strong_nash", &self.strong_nash);
        for (player, mode, set) in &self.dominance {
            for s in set {
                let _ = writeln!(out, "{t},dominant_{}_{},{s},1", player_name(*player), mode_name(*mode));
            }
        }
        profiles(&mut out, "pareto", &self.pareto);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gametheory::{table1_game, table2_game, BaseGains};

    fn order(k: u32) -> Order {
        Order::new(k).unwrap()
    }

    #[test]
    fn grid_covers_both_ends() {
        let g = belief_grid(0.01).unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g[0].get(), 0.5);
        assert_eq!(g[50].get(), 1.0);
        assert!(belief_grid(0.0).is_err());
        assert_eq!(belief_grid(3.0).unwrap().len(), 2);
    }

    #[test]
    fn curve_rows_at_the_ends() {
        let rows = curves(&[order(2)], 0.5, 0.01).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.c, 1.0);
        assert!((last.rp_gain - 1.0).abs() < 1e-12);
        assert_eq!(last.major_gain, 0.5);
        for k in [2, 3, 4, 9] {
            let rows = curves(&[order(k)], 0.5, 0.05).unwrap();
            assert_eq!(rows[0].rp_gain, 0.0);
        }
    }

    #[test]
    fn crossing_matches_quadratic_root() {
        // (2c-1)^2 = c/2  <=>  4c^2 - 4.5c + 1 = 0, upper branch
        let root = (4.5 + (4.5f64 * 4.5 - 16.0).sqrt()) / 8.0;
        let c = crossing_point(order(2), 0.5).unwrap();
        assert!((c - root).abs() < 1e-12, "{c} vs {root}");
        assert!((c - 0.8202).abs() < 1e-3);

        let rows = curves(&[order(2)], 0.5, 0.001).unwrap();
        let first = first_grid_crossing(&rows, order(2)).unwrap();
        assert!(first >= root && first - 0.001 <= root, "{first}");

        assert!(crossing_point(order(2), 0.0).is_none());
        assert!(crossing_point(order(2), 1.0).is_none());
    }

    #[test]
    fn curves_csv_layout() {
        let text = write_curves_csv(&curves(&[order(2)], 0.5, 0.25).unwrap());
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CURVES_CSV_HEADER);
        assert_eq!(lines[1], "2,0.5,0,0.25");
        assert_eq!(lines[3], "2,1,1,0.5");
    }

    fn gains() -> BaseGains {
        BaseGains { a: 10.0, b: 10.0, c: 4.0, d: 4.0 }
    }

    #[test]
    fn table2_report() {
        let r = analyze_game(GameTable::ContractEnforced, table2_game(gains(), 1.0, 1.0, None).unwrap());
        let text = r.render_text();
        assert!(text.contains("strong Nash:          {(join,join)}"), "{text}");
        assert!(text.contains("`(join,join) is the only strong Nash equilibrium`: reproduced"));
        assert!(r.render_csv().contains("2,strong_nash,join-join,1"));
    }

    #[test]
    fn table1_report_flags_discrepancy() {
        let r = analyze_game(GameTable::Untrusted, table1_game(gains(), 2.0, 2.0).unwrap());
        let text = r.render_text();
        assert!(text.contains("NOT reproduced"), "{text}");
        assert!(text.contains("{(join,leave), (leave,join)}"));
        let edge = analyze_game(GameTable::Untrusted, table1_game(gains(), 4.0, 4.0).unwrap());
        assert!(edge.render_text().contains("leave weakly dominant for both players: yes"));
    }
}
