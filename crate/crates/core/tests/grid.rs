use std::collections::BTreeSet;

use cpsoc_core::{CellIndex, GridParams, GridSpec, Interval, Topology};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(dims: usize, topology: Topology) -> GridSpec {
    let params = GridParams {
        divisions_per_dim: 5,
        topology,
        neighborhood_radius: 1,
    };
    GridSpec::new(&params, dims, Interval::new(0.0, 100.0)).unwrap()
}

fn inside(grid: &GridSpec, c: &CellIndex, x: &[f64]) -> bool {
    let (lo, hi) = grid.cell_box(c);
    x.iter().zip(lo.iter().zip(&hi)).all(|(&v, (&l, &h))| l <= v && v <= h)
}

#[test]
fn every_cell_of_2d_grid_owns_its_points() {
    let grid = spec(2, Topology::Moore);
    assert_eq!(grid.cell_count(), 25);
    // a lattice that hits interiors, faces and the outer boundary
    let ticks: Vec<f64> = (0..=200).map(|i| i as f64 * 0.5).collect();
    let mut hit = BTreeSet::new();
    for &a in &ticks {
        for &b in &ticks {
            let x = [a, b];
            let c = grid.cell_of(&x).unwrap();
            assert!(grid.is_valid(&c));
            assert!(inside(&grid, &c, &x), "{x:?} not inside {c:?}");
            assert_eq!(grid.linear_of(&x).unwrap(), grid.linear(&c));
            hit.insert(grid.linear(&c));
        }
    }
    assert_eq!(hit.len(), 25);
}

#[test]
fn linear_index_round_trips_exhaustively() {
    for dims in [1, 2, 3] {
        let grid = spec(dims, Topology::Moore);
        for i in 0..grid.cell_count() {
            assert_eq!(grid.linear(&grid.from_linear(i)), i);
        }
    }
}

#[test]
fn neighbor_relation_is_symmetric_in_2d() {
    for topology in [Topology::Moore, Topology::VonNeumann] {
        let grid = spec(2, topology);
        for i in 0..grid.cell_count() {
            let c = grid.from_linear(i);
            let ns = grid.neighbors(&c);
            assert!(!ns.contains(&c));
            for n in ns {
                assert!(grid.is_valid(&n));
                assert!(grid.neighbors(&n).contains(&c), "{topology:?}: {c:?} -> {n:?} not mutual");
            }
        }
    }
}

#[test]
fn randomized_5d_partition_and_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for topology in [Topology::Moore, Topology::VonNeumann] {
        let grid = spec(5, topology);
        for _ in 0..500 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..=100.0)).collect();
            let c = grid.cell_of(&x).unwrap();
            assert!(inside(&grid, &c, &x));
            for n in grid.neighbors(&c) {
                assert!(grid.neighbors(&n).contains(&c));
            }
        }
    }
}

#[test]
fn interior_neighborhood_sizes() {
    for dims in 1..=5 {
        let center = CellIndex { coords: vec![2; dims] };
        let moore = spec(dims, Topology::Moore).neighbors(&center);
        let vn = spec(dims, Topology::VonNeumann).neighbors(&center);
        assert_eq!(moore.len(), 3usize.pow(dims as u32) - 1);
        assert_eq!(vn.len(), 2 * dims);
    }
}

#[test]
fn corner_has_fewer_neighbors() {
    let grid = spec(2, Topology::Moore);
    assert_eq!(grid.neighbors(&CellIndex { coords: vec![0, 0] }).len(), 3);
    let grid = spec(2, Topology::VonNeumann);
    assert_eq!(grid.neighbors(&CellIndex { coords: vec![4, 4] }).len(), 2);
}

#[test]
fn upper_face_belongs_to_last_cell() {
    let grid = spec(2, Topology::Moore);
    assert_eq!(grid.cell_of(&[100.0, 0.0]).unwrap().coords, vec![4, 0]);
    assert_eq!(grid.cell_of(&[20.0, 40.0]).unwrap().coords, vec![1, 2]);
}

#[test]
fn points_outside_are_rejected() {
    let grid = spec(2, Topology::Moore);
    assert!(grid.cell_of(&[-0.1, 5.0]).is_err());
    assert!(grid.cell_of(&[5.0, 100.5]).is_err());
    assert!(grid.cell_of(&[5.0]).is_err());
    assert!(grid.linear_of(&[f64::NAN, 5.0]).is_err());
}

#[test]
fn invalid_grids_are_rejected() {
    let zero = GridParams { divisions_per_dim: 0, ..GridParams::default() };
    assert!(GridSpec::new(&zero, 5, Interval::new(0.0, 100.0)).is_err());
    assert!(GridSpec::new(&GridParams::default(), 5, Interval::new(1.0, 1.0)).is_err());
    let huge = GridParams { divisions_per_dim: 1000, ..GridParams::default() };
    assert!(GridSpec::new(&huge, 50, Interval::new(0.0, 1.0)).is_err());
}

proptest! {
    #[test]
    fn any_point_lands_in_its_box(x in prop::collection::vec(0.0f64..=100.0, 5)) {
        let grid = spec(5, Topology::Moore);
        let c = grid.cell_of(&x).unwrap();
        prop_assert!(inside(&grid, &c, &x));
        prop_assert_eq!(grid.from_linear(grid.linear_of(&x).unwrap()), c);
    }

    #[test]
    fn moore_neighbors_differ_by_at_most_one(coords in prop::collection::vec(0usize..5, 4)) {
        let grid = spec(4, Topology::Moore);
        let c = CellIndex { coords };
        for n in grid.neighbors(&c) {
            let cheb = n.coords.iter().zip(&c.coords).map(|(a, b)| a.abs_diff(*b)).max().unwrap();
            prop_assert_eq!(cheb, 1);
        }
    }

    #[test]
    fn von_neumann_neighbors_differ_in_one_axis(coords in prop::collection::vec(0usize..5, 4)) {
        let grid = spec(4, Topology::VonNeumann);
        let c = CellIndex { coords };
        for n in grid.neighbors(&c) {
            let manhattan: usize = n.coords.iter().zip(&c.coords).map(|(a, b)| a.abs_diff(*b)).sum();
            prop_assert_eq!(manhattan, 1);
        }
    }
}
