//! Station sets, normalized latencies and placement of stakeholders on them.

mod latency;
mod roles;
mod synth;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub use latency::{haversine_km, LatencyMatrix, Topology, EARTH_RADIUS_KM, LATENCY_FLOOR};
pub use roles::{assign_roles, pick_platform, RoleAssignment, RoleCounts};
pub use synth::{synth_stations, Cluster, Preset};

pub const STATION_CSV_HEADER: &str = "id,lat,lon";

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

impl Station {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::domain("lat", format!("{lat} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::domain("lon", format!("{lon} outside [-180, 180]")));
        }
        Ok(Station {
            id: id.into(),
            lat,
            lon,
        })
    }
}

/// Reads a station CSV (`id,lat,lon`). Rows keep file order.
pub fn load_stations(path: &Path) -> Result<Vec<Station>> {
    let row_err = |row: usize, reason: String| Error::StationRow {
        path: path.to_path_buf(),
        row,
        reason,
    };
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader.headers().map_err(|e| row_err(1, e.to_string()))?.clone();
    let expected: Vec<&str> = STATION_CSV_HEADER.split(',').collect();
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(row_err(1, format!("expected header `{STATION_CSV_HEADER}`")));
    }

    let mut stations = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let row = i + 2;
        let record = record.map_err(|e| row_err(row, e.to_string()))?;
        if record.len() != 3 {
            return Err(row_err(row, format!("expected 3 fields, found {}", record.len())));
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(row_err(row, "empty id".into()));
        }
        let coord = |field: &str, name: &str| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| row_err(row, format!("{name} `{field}` is not a number")))
        };
        let lat = coord(&record[1], "lat")?;
        let lon = coord(&record[2], "lon")?;
        let station = Station::new(id.clone(), lat, lon).map_err(|e| row_err(row, e.to_string()))?;
        if !seen.insert(id.clone()) {
            return Err(row_err(row, format!("duplicate id `{id}`")));
        }
        stations.push(station);
    }
    Ok(stations)
}

pub fn write_stations<W: Write>(out: &mut W, stations: &[Station]) -> std::io::Result<()> {
    writeln!(out, "{STATION_CSV_HEADER}")?;
    for s in stations {
        writeln!(out, "{},{},{}", s.id, s.lat, s.lon)?;
    }
    Ok(())
}

pub fn save_stations(path: &Path, stations: &[Station]) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut out = BufWriter::new(file);
    write_stations(&mut out, stations).map_err(|e| Error::io(ctx(), e))?;
    out.flush().map_err(|e| Error::io(ctx(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_valid_rows_in_order() {
        let f = write_tmp("id,lat,lon\nb,31.2,121.4\na,31.3,121.5\n");
        let stations = load_stations(f.path()).unwrap();
        assert_eq!(stations.len(), 2);
        assert_eq!(stations[0].id, "b");
        assert_eq!(stations[1].lon, 121.5);
    }

    #[test]
    fn header_only_is_empty() {
        let f = write_tmp("id,lat,lon\n");
        assert!(load_stations(f.path()).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_latitude_names_row() {
        let f = write_tmp("id,lat,lon\na,31.0,121.0\nb,95,121.0\n");
        match load_stations(f.path()) {
            Err(Error::StationRow { row, reason, .. }) => {
                assert_eq!(row, 3);
                assert!(reason.contains("lat"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_rows() {
        let f = write_tmp("id,lat,lon\na,x,1\n");
        assert!(matches!(load_stations(f.path()), Err(Error::StationRow { row: 2, .. })));
        let f = write_tmp("id,lat,lon\na,1,1\na,2,2\n");
        assert!(matches!(load_stations(f.path()), Err(Error::StationRow { row: 3, .. })));
        let f = write_tmp("name,lat,lon\n");
        assert!(matches!(load_stations(f.path()), Err(Error::StationRow { row: 1, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_stations(Path::new("/nonexistent/stations.csv")).unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn save_then_load() {
        let stations = vec![
            Station::new("s1", 39.9, 116.4).unwrap(),
            Station::new("s2", -33.868_820_1, 151.209_295_7).unwrap(),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        save_stations(&path, &stations).unwrap();
        assert_eq!(load_stations(&path).unwrap(), stations);
    }
}
