//! Synthetic base-station layouts drawn from a Gaussian mixture of city districts.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, weighted::WeightedIndex};

use super::Station;
use crate::error::{Error, Result};

const KM_PER_DEGREE: f64 = 111.32;

/// One mixture component: a district centre with an isotropic spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub center_lat: f64,
    pub center_lon: f64,
    pub stddev_km: f64,
    pub weight: f64,
}

impl Cluster {
    pub const fn new(center_lat: f64, center_lon: f64, stddev_km: f64, weight: f64) -> Self {
        Cluster {
            center_lat,
            center_lon,
            stddev_km,
            weight,
        }
    }
}

const SHANGHAI: &[Cluster] = &[
    Cluster::new(31.232, 121.470, 3.5, 0.34), // Huangpu / Jing'an
    Cluster::new(31.225, 121.545, 4.5, 0.18), // Lujiazui / inner Pudong
    Cluster::new(31.195, 121.420, 4.0, 0.12), // Xuhui / Changning
    Cluster::new(31.280, 121.500, 4.0, 0.09), // Hongkou / Yangpu
    Cluster::new(31.110, 121.380, 5.0, 0.08), // Minhang
    Cluster::new(31.390, 121.440, 5.5, 0.06), // Baoshan
    Cluster::new(31.035, 121.225, 6.0, 0.05), // Songjiang
    Cluster::new(31.375, 121.255, 6.0, 0.04), // Jiading
    Cluster::new(31.080, 121.700, 8.0, 0.04), // outer Pudong
];

const BEIJING: &[Cluster] = &[
    Cluster::new(39.910, 116.400, 4.0, 0.30), // Dongcheng / Xicheng
    Cluster::new(39.955, 116.310, 4.5, 0.18), // Haidian
    Cluster::new(39.925, 116.480, 4.5, 0.18), // Chaoyang
    Cluster::new(39.855, 116.290, 4.5, 0.10), // Fengtai
    Cluster::new(39.905, 116.660, 5.5, 0.08), // Tongzhou
    Cluster::new(40.210, 116.240, 7.0, 0.08), // Changping
    Cluster::new(39.730, 116.340, 6.0, 0.08), // Daxing
];

/// Embedded city layouts with their station counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Shanghai,
    Beijing,
}

impl Preset {
    pub fn count(self) -> usize {
        match self {
            Preset::Shanghai => 3234,
            Preset::Beijing => 967,
        }
    }

    pub fn clusters(self) -> &'static [Cluster] {
        match self {
            Preset::Shanghai => SHANGHAI,
            Preset::Beijing => BEIJING,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Shanghai => "shanghai",
            Preset::Beijing => "beijing",
        }
    }

    pub fn stations(self, seed: u64) -> Vec<Station> {
        synth_stations(self.count(), self.clusters(), seed).expect("embedded presets are valid")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shanghai" => Ok(Preset::Shanghai),
            "beijing" => Ok(Preset::Beijing),
            other => Err(Error::domain("preset", format!("unknown preset `{other}`"))),
        }
    }
}

fn check_clusters(clusters: &[Cluster]) -> Result<()> {
    if clusters.is_empty() {
        return Err(Error::domain("clusters", "no clusters given"));
    }
    for c in clusters {
        if !(c.weight.is_finite() && c.weight > 0.0) {
            return Err(Error::domain("weight", format!("cluster weight {} must be > 0", c.weight)));
        }
        if !(c.stddev_km.is_finite() && c.stddev_km >= 0.0) {
            return Err(Error::domain("stddev_km", format!("{} must be >= 0", c.stddev_km)));
        }
        Station::new("", c.center_lat, c.center_lon)?;
    }
    Ok(())
}

fn wrap_lon(lon: f64) -> f64 {
    if (-180.0..=180.0).contains(&lon) {
        lon
    } else {
        (lon + 180.0).rem_euclid(360.0) - 180.0
    }
}

/// Draws `count` stations from the mixture. Ids are `bs` plus a zero-padded
/// index, so id order equals generation order.
pub fn synth_stations(count: usize, clusters: &[Cluster], seed: u64) -> Result<Vec<Station>> {
    if count < 2 {
        return Err(Error::domain("count", format!("{count} stations, need at least 2")));
    }
    check_clusters(clusters)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(clusters.iter().map(|c| c.weight))
        .map_err(|e| Error::domain("weight", e.to_string()))?;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let width = count.to_string().len();

    let stations = (0..count)
        .map(|i| {
            let c = &clusters[pick.sample(&mut rng)];
            let north_km = c.stddev_km * unit.sample(&mut rng);
            let east_km = c.stddev_km * unit.sample(&mut rng);
            let lat = (c.center_lat + north_km / KM_PER_DEGREE).clamp(-90.0, 90.0);
            let cos_lat = c.center_lat.to_radians().cos().max(1e-6);
            let lon = wrap_lon(c.center_lon + east_km / (KM_PER_DEGREE * cos_lat));
            Station {
                id: format!("bs{i:0width$}"),
                lat,
                lon,
            }
        })
        .collect();
    Ok(stations)
}
