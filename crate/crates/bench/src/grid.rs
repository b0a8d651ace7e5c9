//! Candidate waiting locations.

use dpsub_core::objective::GeoPoint;

use crate::dataset::BBox;
use crate::error::{config, BenchResult};

/// A `rows × cols` grid of cell centers over `bbox` (rows run along latitude),
/// followed by `corner_copies` duplicates of the northernmost grid vertex.
/// Among equally northern vertices the easternmost is copied.
pub fn build_grid(bbox: &BBox, rows: usize, cols: usize, corner_copies: usize) -> BenchResult<Vec<GeoPoint>> {
    if rows == 0 || cols == 0 {
        return Err(config(format!("grid {rows}×{cols} is empty")));
    }
    let lat_step = (bbox.max_lat - bbox.min_lat) / rows as f64;
    let lon_step = (bbox.max_lon - bbox.min_lon) / cols as f64;
    let mut points = Vec::with_capacity(rows * cols + corner_copies);
    for i in 0..rows {
        for j in 0..cols {
            points.push(GeoPoint::new(
                bbox.min_lat + lat_step * (i as f64 + 0.5),
                bbox.min_lon + lon_step * (j as f64 + 0.5),
            ));
        }
    }
    let corner = *points
        .iter()
        .max_by(|a, b| a.lat.total_cmp(&b.lat).then(a.lon.total_cmp(&b.lon)))
        .expect("grid is non-empty");
    points.extend(std::iter::repeat_n(corner, corner_copies));
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::manhattan_bbox;

    #[test]
    fn grid_sizes_and_corner() {
        let b = manhattan_bbox();
        let g = build_grid(&b, 5, 4, 80).unwrap();
        assert_eq!(g.len(), 100);
        let top = g[..20].iter().map(|p| p.lat).fold(f64::MIN, f64::max);
        let east = g[..20].iter().filter(|p| p.lat == top).map(|p| p.lon).fold(f64::MIN, f64::max);
        assert!(g[20..].iter().all(|p| p.lat == top && p.lon == east));
        assert!(g.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn single_cell_is_center() {
        let b = manhattan_bbox();
        let g = build_grid(&b, 1, 1, 0).unwrap();
        let c = b.center();
        assert!((g[0].lat - c.lat).abs() < 1e-12 && (g[0].lon - c.lon).abs() < 1e-12);
        assert!(build_grid(&b, 0, 3, 1).is_err());
    }
}
