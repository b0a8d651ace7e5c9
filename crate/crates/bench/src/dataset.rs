//! Pickup files and synthetic pickup streams.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use dpsub_core::objective::{GeoPoint, PickupDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, BenchError, BenchResult};

/// An axis-aligned latitude/longitude box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BBox {
    /// A box from two opposite corners in any order; zero area is rejected.
    pub fn new(lat_a: f64, lon_a: f64, lat_b: f64, lon_b: f64) -> BenchResult<Self> {
        let values = [lat_a, lon_a, lat_b, lon_b];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(config("bounding box coordinates must be finite"));
        }
        if lat_a == lat_b || lon_a == lon_b {
            return Err(config(format!("bounding box {values:?} has zero area")));
        }
        Ok(Self {
            min_lat: lat_a.min(lat_b),
            min_lon: lon_a.min(lon_b),
            max_lat: lat_a.max(lat_b),
            max_lon: lon_a.max(lon_b),
        })
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint::new((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        (self.min_lat..=self.max_lat).contains(&p.lat) && (self.min_lon..=self.max_lon).contains(&p.lon)
    }
}

impl TryFrom<[f64; 4]> for BBox {
    type Error = BenchError;

    fn try_from(v: [f64; 4]) -> BenchResult<Self> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.min_lat, b.min_lon, b.max_lat, b.max_lon]
    }
}

/// Parses `lat,lon,lat,lon`.
impl FromStr for BBox {
    type Err = BenchError;

    fn from_str(s: &str) -> BenchResult<Self> {
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config(format!("bounding box `{s}`: {e}")))?;
        match parts[..] {
            [a, b, c, d] => BBox::new(a, b, c, d),
            _ => Err(config(format!("bounding box `{s}` needs four comma-separated numbers"))),
        }
    }
}

/// The box used by the default experiments: Manhattan below about 110th
/// Street, elongated north–south like the island.
pub fn manhattan_bbox() -> BBox {
    BBox::new(40.70, -74.02, 40.88, -73.96).expect("constant box is valid")
}

/// Reads a `lat,lon` CSV. Line numbers in errors are 1-based and count the header.
pub fn load_pickups(path: &Path) -> BenchResult<PickupDataset> {
    let file = File::open(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
    let parse_err = |line: usize, message: String| BenchError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.len() != 2 || headers[0].trim() != "lat" || headers[1].trim() != "lon" {
        return Err(parse_err(1, format!("expected header `lat,lon`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", record.len())));
        }
        let field = |k: usize| -> BenchResult<f64> {
            let v: f64 = record[k]
                .trim()
                .parse()
                .map_err(|e| parse_err(line, format!("field {} `{}`: {e}", k + 1, &record[k])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("field {} is not finite", k + 1)))
            }
        };
        points.push(GeoPoint::new(field(0)?, field(1)?));
    }
    if points.is_empty() {
        return Err(parse_err(1, "no pickup rows".into()));
    }
    log::info!("loaded {} pickups from {}", points.len(), path.display());
    Ok(PickupDataset::new(points)?)
}

/// Writes a `lat,lon` CSV using shortest round-trip float formatting, so
/// loading the file back reproduces every coordinate exactly.
pub fn save_pickups(path: &Path, data: &PickupDataset) -> BenchResult<()> {
    let io_err = |e| BenchError::Io(path.to_path_buf(), e);
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(out, "lat,lon").map_err(io_err)?;
    for p in data.points() {
        writeln!(out, "{:?},{:?}", p.lat, p.lon).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// `m` points uniform in `bbox`, deterministic per seed.
pub fn synth_pickups(bbox: &BBox, m: usize, seed: u64) -> BenchResult<PickupDataset> {
    if m == 0 {
        return Err(config("synthetic dataset needs m ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m)
        .map(|_| {
            GeoPoint::new(
                rng.gen_range(bbox.min_lat..bbox.max_lat),
                rng.gen_range(bbox.min_lon..bbox.max_lon),
            )
        })
        .collect();
    Ok(PickupDataset::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_parsing() {
        let b: BBox = "40.88,-73.96,40.7,-74.02".parse().unwrap();
        assert_eq!(b, manhattan_bbox());
        assert!("1,2,3".parse::<BBox>().is_err());
        assert!("1,2,1,3".parse::<BBox>().unwrap_err().is_config());
        assert!("a,2,1,3".parse::<BBox>().is_err());
    }

    #[test]
    fn synth_is_seeded_and_inside() {
        let b = manhattan_bbox();
        let a = synth_pickups(&b, 50, 9).unwrap();
        assert_eq!(a, synth_pickups(&b, 50, 9).unwrap());
        assert_ne!(a, synth_pickups(&b, 50, 10).unwrap());
        assert!(a.points().iter().all(|p| b.contains(p)));
        assert!(synth_pickups(&b, 0, 1).is_err());
    }
}
