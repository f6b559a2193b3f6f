use std::cmp::Ordering;

use super::Station;
use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Normalized latency assigned to distinct stations at identical coordinates.
pub const LATENCY_FLOOR: f64 = 1e-6;

/// Great-circle distance in kilometres.
pub fn haversine_km(a: &Station, b: &Station) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Symmetric pairwise latencies scaled so the largest is exactly 1.
///
/// Stored as the strict upper triangle, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl LatencyMatrix {
    /// Normalizes the raw pairwise distances `dist(i, j)` for `i < j`.
    pub fn from_distances(n: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegenerateTopology(format!("{n} station(s), need at least 2")));
        }
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(i, j);
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::domain("distance", format!("d({i},{j}) = {d}")));
                }
                upper.push(d);
            }
        }
        let max = upper.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::DegenerateTopology("all stations coincide".into()));
        }
        for d in &mut upper {
            *d = if *d == 0.0 { LATENCY_FLOOR } else { *d / max };
        }
        // pin the maximum despite division rounding
        for d in &mut upper {
            if *d > 1.0 {
                *d = 1.0;
            }
        }
        Ok(LatencyMatrix { n, upper })
    }

    pub fn from_stations(stations: &[Station]) -> Result<Self> {
        Self::from_distances(stations.len(), |i, j| haversine_km(&stations[i], &stations[j]))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            Ordering::Equal => 0.0,
            Ordering::Less => self.upper[self.offset(i, j)],
            Ordering::Greater => self.upper[self.offset(j, i)],
        }
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        // rows 0..i contribute (n-1) + (n-2) + ... + (n-i) entries
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Sum of latencies from station `i` to every other station.
    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(i, j)).sum()
    }

    /// Multiplies every entry by `factor`. The result no longer has max 1;
    /// used to check that routing decisions are scale-free.
    pub fn scaled(&self, factor: f64) -> Self {
        LatencyMatrix {
            n: self.n,
            upper: self.upper.iter().map(|d| d * factor).collect(),
        }
    }
}

/// Stations with their latency matrix and a tie-break rank by station id.
#[derive(Debug, Clone)]
pub struct Topology {
    stations: Vec<Station>,
    matrix: LatencyMatrix,
    id_rank: Vec<u32>,
}

impl Topology {
    pub fn from_stations(stations: Vec<Station>) -> Result<Self> {
        let matrix = LatencyMatrix::from_stations(&stations)?;
        Ok(Self::assemble(stations, matrix))
    }

    /// Pairs stations with a precomputed matrix of matching size.
    pub fn with_matrix(stations: Vec<Station>, matrix: LatencyMatrix) -> Result<Self> {
        if stations.len() != matrix.len() {
            return Err(Error::Precondition(format!(
                "{} stations but a {}-station matrix",
                stations.len(),
                matrix.len()
            )));
        }
        Ok(Self::assemble(stations, matrix))
    }

    fn assemble(stations: Vec<Station>, matrix: LatencyMatrix) -> Self {
        let mut order: Vec<usize> = (0..stations.len()).collect();
        order.sort_by(|&a, &b| stations[a].id.cmp(&stations[b].id));
        let mut id_rank = vec![0; stations.len()];
        for (rank, idx) in order.into_iter().enumerate() {
            id_rank[idx] = rank as u32;
        }
        Topology {
            stations,
            matrix,
            id_rank,
        }
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn matrix(&self) -> &LatencyMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn latency(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    fn by_value_then_id(&self, (va, a): (f64, usize), (vb, b): (f64, usize)) -> Ordering {
        va.total_cmp(&vb).then(self.id_rank[a].cmp(&self.id_rank[b]))
    }

    /// The `m` stations with the smallest total latency to all others.
    pub fn candidate_platforms(&self, m: usize) -> Result<Vec<usize>> {
        if m > self.len() {
            return Err(Error::domain(
                "m",
                format!("{m} candidates requested from {} stations", self.len()),
            ));
        }
        let mut ranked: Vec<(f64, usize)> = (0..self.len()).map(|i| (self.matrix.row_sum(i), i)).collect();
        ranked.sort_by(|&x, &y| self.by_value_then_id(x, y));
        Ok(ranked.into_iter().take(m).map(|(_, i)| i).collect())
    }

    /// The masternode minimising `d(worker, mn) + d(mn, publisher)`.
    pub fn best_relay(&self, worker: usize, publisher: usize, masternodes: &[usize]) -> Result<usize> {
        best_relay_in(&self.matrix, &self.id_rank, worker, publisher, masternodes).map(|(mn, _)| mn)
    }

    /// Relay and its two-hop path latency.
    pub fn best_relay_path(&self, worker: usize, publisher: usize, masternodes: &[usize]) -> Result<(usize, f64)> {
        best_relay_in(&self.matrix, &self.id_rank, worker, publisher, masternodes)
    }

    #[cfg(test)]
    pub(crate) fn id_rank(&self) -> &[u32] {
        &self.id_rank
    }
}

pub(crate) fn best_relay_in(
    matrix: &LatencyMatrix,
    id_rank: &[u32],
    worker: usize,
    publisher: usize,
    masternodes: &[usize],
) -> Result<(usize, f64)> {
    masternodes
        .iter()
        .map(|&mn| (matrix.get(worker, mn) + matrix.get(mn, publisher), mn))
        .min_by(|&(va, a), &(vb, b)| va.total_cmp(&vb).then(id_rank[a].cmp(&id_rank[b])))
        .map(|(sum, mn)| (mn, sum))
        .ok_or_else(|| Error::domain("masternodes", "empty masternode set"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn station(id: &str, lat: f64, lon: f64) -> Station {
        Station::new(id, lat, lon).unwrap()
    }

    /// Spherical law of cosines; independent of the haversine form.
    fn cosine_law_km(a: &Station, b: &Station) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
        EARTH_RADIUS_KM * c.acos()
    }

    fn explicit(n: usize, d: &[((usize, usize), f64)]) -> LatencyMatrix {
        LatencyMatrix::from_distances(n, |i, j| {
            d.iter().find(|((a, b), _)| (*a, *b) == (i, j)).map(|(_, v)| *v).unwrap()
        })
        .unwrap()
    }

    #[test]
    fn three_four_five() {
        let m = explicit(3, &[((0, 1), 3.0), ((0, 2), 4.0), ((1, 2), 5.0)]);
        assert!((m.get(0, 1) - 0.6).abs() < 1e-15);
        assert!((m.get(2, 0) - 0.8).abs() < 1e-15);
        assert_eq!(m.get(1, 2), 1.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn geographic_right_triangle_matches_independent_formula() {
        // 3 km north and 4 km east of a point on the equator
        let deg_per_km = 180.0 / (std::f64::consts::PI * EARTH_RADIUS_KM);
        let s = [
            station("a", 0.0, 0.0),
            station("b", 3.0 * deg_per_km, 0.0),
            station("c", 0.0, 4.0 * deg_per_km),
        ];
        let m = LatencyMatrix::from_stations(&s).unwrap();
        let raw = [
            cosine_law_km(&s[0], &s[1]),
            cosine_law_km(&s[0], &s[2]),
            cosine_law_km(&s[1], &s[2]),
        ];
        let max = raw.iter().copied().fold(0.0, f64::max);
        assert!((m.get(0, 1) - raw[0] / max).abs() < 1e-6);
        assert!((m.get(0, 2) - raw[1] / max).abs() < 1e-6);
        assert_eq!(m.get(1, 2), 1.0);
        assert!((m.get(0, 1) - 0.6).abs() < 1e-4);
        assert!((m.get(0, 2) - 0.8).abs() < 1e-4);
    }

    #[test]
    fn two_stations_self_normalize() {
        let m = LatencyMatrix::from_stations(&[station("a", 31.0, 121.0), station("b", 31.1, 121.3)]).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn coincident_pair_gets_floor() {
        let m = LatencyMatrix::from_stations(&[
            station("a", 31.0, 121.0),
            station("b", 31.0, 121.0),
            station("c", 31.2, 121.0),
        ])
        .unwrap();
        assert_eq!(m.get(0, 1), LATENCY_FLOOR);
        assert_eq!(m.get(0, 2), 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        let same = [station("a", 1.0, 1.0), station("b", 1.0, 1.0)];
        assert!(matches!(LatencyMatrix::from_stations(&same), Err(Error::DegenerateTopology(_))));
        assert!(matches!(
            LatencyMatrix::from_stations(&same[..1]),
            Err(Error::DegenerateTopology(_))
        ));
    }

    #[test]
    fn haversine_known_distance() {
        // Shanghai People's Square to Beijing Tiananmen, about 1067 km
        let d = haversine_km(&station("sh", 31.2304, 121.4737), &station("bj", 39.9042, 116.4074));
        assert!((d - 1067.0).abs() < 5.0, "{d}");
    }

    fn line(points: &[(&str, f64)]) -> Topology {
        let stations = points.iter().map(|(id, lon)| station(id, 0.0, *lon)).collect();
        Topology::from_stations(stations).unwrap()
    }

    #[test]
    fn collinear_median_is_best_platform() {
        let t = line(&[("A", 0.0), ("B", 0.01), ("C", 0.02)]);
        assert_eq!(t.candidate_platforms(1).unwrap(), vec![1]);
        let mut all = t.candidate_platforms(3).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        assert!(t.candidate_platforms(4).is_err());
    }

    #[test]
    fn cross_layout_center_wins() {
        let d = 0.01;
        let stations = vec![
            station("n", d, 0.0),
            station("e", 0.0, d),
            station("center", 0.0, 0.0),
            station("s", -d, 0.0),
            station("w", 0.0, -d),
        ];
        let t = Topology::from_stations(stations).unwrap();
        // brute force: center sums 4 arms; each arm sums 1 + 2 + sqrt2 + sqrt2 arms
        let sums: Vec<f64> = (0..5).map(|i| (0..5).map(|j| t.latency(i, j)).sum()).collect();
        let best = (0..5).min_by(|&a, &b| sums[a].total_cmp(&sums[b])).unwrap();
        assert_eq!(best, 2);
        assert_eq!(t.candidate_platforms(1).unwrap(), vec![2]);
    }

    #[test]
    fn candidate_ties_break_by_id() {
        // symmetric pair: both ends have equal sums
        let t = line(&[("z", 0.0), ("m", 0.01)]);
        assert_eq!(t.candidate_platforms(1).unwrap(), vec![1]);
    }

    #[test]
    fn relay_selection() {
        // square with worker 0 and publisher 2 on one diagonal, masternodes on the
        // other; corner 3 sits slightly farther from the publisher
        let d = [
            ((0, 1), 1.0),
            ((0, 2), 1.4),
            ((0, 3), 1.0),
            ((1, 2), 1.0),
            ((1, 3), 1.4),
            ((2, 3), 1.1),
        ];
        let m = explicit(4, &d);
        let ids = ["w", "m1", "p", "m3"].iter().map(|id| station(id, 0.0, 0.0)).collect();
        let t = Topology::with_matrix(ids, m).unwrap();
        // sums: via 1 -> 1.0 + 1.0 = 2.0, via 3 -> 1.0 + 1.1 = 2.1
        assert_eq!(t.best_relay(0, 2, &[1, 3]).unwrap(), 1);
        assert_eq!(t.best_relay(0, 2, &[3]).unwrap(), 3);
        assert!(t.best_relay(0, 2, &[]).is_err());
    }

    #[test]
    fn coincident_relay_is_preferred() {
        let t = Topology::from_stations(vec![
            station("w", 31.0, 121.0),
            station("p", 31.05, 121.0),
            station("near", 31.0, 121.0),
            station("far", 31.5, 121.5),
        ])
        .unwrap();
        assert_eq!(t.best_relay(0, 1, &[3, 2]).unwrap(), 2);
    }

    fn arb_stations() -> impl Strategy<Value = Vec<Station>> {
        prop::collection::vec((30.0f64..32.0, 120.0f64..122.0), 2..25).prop_map(|pts| {
            pts.into_iter()
                .enumerate()
                .map(|(i, (lat, lon))| station(&format!("s{i:03}"), lat, lon))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn matrix_invariants(stations in arb_stations()) {
            let m = LatencyMatrix::from_stations(&stations).unwrap();
            let n = m.len();
            let mut max: f64 = 0.0;
            for i in 0..n {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..n {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                    if i != j {
                        prop_assert!(m.get(i, j) > 0.0 && m.get(i, j) <= 1.0);
                        max = max.max(m.get(i, j));
                    }
                }
            }
            prop_assert_eq!(max, 1.0);
        }

        #[test]
        fn relay_choice_is_scale_free(stations in arb_stations(), factor in 1e-3f64..1e3) {
            let n = stations.len();
            let t = Topology::from_stations(stations).unwrap();
            let scaled = t.matrix().scaled(factor);
            let mns: Vec<usize> = (0..n).step_by(2).collect();
            for w in 0..n {
                let p = (w + 1) % n;
                let a = t.best_relay(w, p, &mns).unwrap();
                let (b, _) = best_relay_in(&scaled, t.id_rank(), w, p, &mns).unwrap();
                // exact rescaling can reorder sums that differ by one ulp
                let sum = |mn: usize| t.latency(w, mn) + t.latency(mn, p);
                prop_assert!(a == b || (sum(a) - sum(b)).abs() <= 1e-12);
            }
        }

        #[test]
        fn candidate_sets_are_nested(stations in arb_stations()) {
            let t = Topology::from_stations(stations).unwrap();
            let full = t.candidate_platforms(t.len()).unwrap();
            for m in 0..t.len() {
                let cur = t.candidate_platforms(m).unwrap();
                let next = t.candidate_platforms(m + 1).unwrap();
                prop_assert_eq!(&next[..m], &cur[..]);
                prop_assert_eq!(&full[..m], &cur[..]);
            }
        }
    }
}
