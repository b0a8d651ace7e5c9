use dpsub_bench::dataset::{load_pickups, manhattan_bbox, save_pickups, synth_pickups, BBox};
use dpsub_bench::BenchError;

fn load_text(text: &str) -> Result<dpsub_core::objective::PickupDataset, BenchError> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pickups.csv");
    std::fs::write(&path, text).unwrap();
    load_pickups(&path)
}

#[test]
fn loads_a_small_file() {
    let data = load_text("lat,lon\n40.75,-73.99\n40.76,-73.98\n").unwrap();
    assert_eq!(data.len(), 2);
    assert_eq!(data.points()[1].lat, 40.76);
    assert_eq!(data.points()[1].lon, -73.98);
}

#[test]
fn rejects_malformed_rows_with_their_line() {
    match load_text("lat,lon\n40.75,-73.99\n40.76,-73.98,1\n") {
        Err(BenchError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    match load_text("lat,lon\n40.75,north\n") {
        Err(BenchError::Parse { line, message, .. }) => {
            assert_eq!(line, 2);
            assert!(message.contains("north"));
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(load_text("lon,lat\n1,2\n"), Err(BenchError::Parse { line: 1, .. })));
    assert!(load_text("").is_err());
    assert!(load_text("lat,lon\n").is_err());
    assert!(load_text("lat,lon\nNaN,1\n").is_err());
}

#[test]
fn save_and_load_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pickups.csv");
    let data = synth_pickups(&manhattan_bbox(), 10_000, 77).unwrap();
    save_pickups(&path, &data).unwrap();
    let back = load_pickups(&path).unwrap();
    assert_eq!(back.len(), data.len());
    for (a, b) in data.points().iter().zip(back.points()) {
        assert_eq!(a.lat.to_bits(), b.lat.to_bits());
        assert_eq!(a.lon.to_bits(), b.lon.to_bits());
    }
}

#[test]
fn synthetic_pickups_are_uniform_in_the_box() {
    let bbox: BBox = "40.70,-74.02,40.88,-73.96".parse().unwrap();
    let m = 100_000;
    let data = synth_pickups(&bbox, m, 5).unwrap();
    assert!(data.points().iter().all(|p| bbox.contains(p)));
    // A uniform coordinate on an interval of width w has σ = w/√12.
    let check = |values: Vec<f64>, lo: f64, hi: f64| {
        let mean = values.iter().sum::<f64>() / m as f64;
        let sigma = (hi - lo) / 12f64.sqrt() / (m as f64).sqrt();
        assert!((mean - (lo + hi) / 2.0).abs() <= 3.0 * sigma, "mean {mean}");
        // Quartile counts as a coarse shape check.
        let q1 = values.iter().filter(|&&v| v < lo + (hi - lo) / 4.0).count() as f64 / m as f64;
        assert!((q1 - 0.25).abs() <= 3.0 * (0.25 * 0.75 / m as f64).sqrt(), "lower quartile {q1}");
    };
    check(data.points().iter().map(|p| p.lat).collect(), bbox.min_lat, bbox.max_lat);
    check(data.points().iter().map(|p| p.lon).collect(), bbox.min_lon, bbox.max_lon);
    assert_eq!(synth_pickups(&bbox, 10, 5).unwrap().points(), &data.points()[..10]);
}
