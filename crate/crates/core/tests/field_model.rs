use fieldkit::field_model::{kick_edges, FieldError, GridIndex};
use fieldkit::{FieldSpec, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec() -> FieldSpec {
    FieldSpec::default()
}

/// Nearest cell by scanning every center; ties go to the smaller index.
fn nearest_by_scan(s: &FieldSpec, p: Vec2) -> GridIndex {
    let mut best = (f64::INFINITY, GridIndex::new(0, 0));
    for row in 0..s.rows() {
        for col in 0..s.cols() {
            let c = Vec2::new(
                -s.length / 2.0 + s.cell_size * (col as f64 + 0.5),
                -s.width / 2.0 + s.cell_size * (row as f64 + 0.5),
            );
            let d = c.dist(p);
            if d < best.0 - 1e-12 {
                best = (d, GridIndex::new(row, col));
            }
        }
    }
    best.1
}

#[test]
fn cell_centers_match_direct_formula() {
    let s = spec();
    let c = s.cell_center(GridIndex::new(0, 0));
    assert!((c.x - (-4.5 + 0.05)).abs() < 1e-12 && (c.y - (-3.0 + 0.05)).abs() < 1e-12);
    let c = s.cell_center(GridIndex::new(59, 89));
    assert!((c.x - 4.45).abs() < 1e-12 && (c.y - 2.95).abs() < 1e-12);
}

#[test]
fn pose_to_cell_matches_nearest_center_scan() {
    let s = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = Vec2::new(rng.random_range(-4.55..4.55), rng.random_range(-3.05..3.05));
        let got = s.pose_to_cell(p).unwrap();
        assert_eq!(got, nearest_by_scan(&s, p), "at {p:?}");
        if !s.contains(p) {
            continue;
        }
        let c = s.cell_center(got);
        assert!((c.x - p.x).abs().max((c.y - p.y).abs()) <= s.cell_size / 2.0 + 1e-12);
    }
}

#[test]
fn pose_to_cell_rejects_points_beyond_the_margin() {
    let s = spec();
    assert!(matches!(s.pose_to_cell(Vec2::new(4.56, 0.0)), Err(FieldError::OutOfField { .. })));
    assert!(matches!(s.pose_to_cell(Vec2::new(0.0, -3.06)), Err(FieldError::OutOfField { .. })));
    assert!(s.pose_to_cell(Vec2::new(4.549, 3.049)).is_ok());
}

fn annulus_scan(s: &FieldSpec, i: GridIndex, kicks: &[f64]) -> Vec<GridIndex> {
    let c = s.cell_center(i);
    let mut out = Vec::new();
    for row in 0..s.rows() {
        for col in 0..s.cols() {
            let j = GridIndex::new(row, col);
            if j == i {
                continue;
            }
            let d = s.cell_center(j).dist(c);
            if kicks.iter().any(|&k| (d - k).abs() <= s.cell_size / 2.0 + 1e-9) {
                out.push(j);
            }
        }
    }
    out
}

#[test]
fn kick_edges_equal_brute_force_annulus() {
    let s = spec();
    for (i, kicks) in [
        (GridIndex::new(30, 45), vec![0.5]),
        (GridIndex::new(0, 0), vec![3.0]),
        (GridIndex::new(12, 80), vec![0.5, 1.0, 2.0]),
    ] {
        let got: Vec<GridIndex> = kick_edges(i, &kicks, &s).unwrap().into_iter().map(|e| e.0).collect();
        let mut want = annulus_scan(&s, i, &kicks);
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn kick_edges_report_center_distances() {
    let s = spec();
    let i = GridIndex::new(20, 30);
    for (j, d) in kick_edges(i, &[1.0, 2.0], &s).unwrap() {
        assert!((d - s.cell_center(i).dist(s.cell_center(j))).abs() < 1e-9);
    }
}

#[test]
fn kick_edges_are_symmetric_for_interior_cells() {
    let s = spec();
    let kicks = [0.5, 1.0];
    let i = GridIndex::new(30, 45);
    for (j, _) in kick_edges(i, &kicks, &s).unwrap() {
        let back: Vec<GridIndex> = kick_edges(j, &kicks, &s).unwrap().into_iter().map(|e| e.0).collect();
        assert!(back.contains(&i));
    }
}

#[test]
fn json_round_trip_preserves_the_field() {
    let s = spec();
    let text = serde_json::to_string(&s).unwrap();
    assert_eq!(FieldSpec::from_json(&text).unwrap(), s);
}

#[test]
fn layout_lines_stay_inside_the_border() {
    let s = FieldSpec::bundled();
    for seg in &s.line_segments {
        for p in [seg.a, seg.b] {
            assert!(p.x.abs() <= s.length / 2.0 + 1e-12 && p.y.abs() <= s.width / 2.0 + 1e-12);
        }
    }
    assert_eq!(s.goals.left, Vec2::new(-4.5, 0.0));
    assert_eq!(s.goals.right, Vec2::new(4.5, 0.0));
}

proptest! {
    #[test]
    fn grid_bijection(row in 0usize..60, col in 0usize..90) {
        let s = spec();
        let i = GridIndex::new(row, col);
        prop_assert_eq!(s.pose_to_cell(s.cell_center(i)).unwrap(), i);
        prop_assert_eq!(s.from_linear(s.linear(i)), i);
    }
}
