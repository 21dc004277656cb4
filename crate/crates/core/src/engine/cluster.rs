use alloc::vec;
use alloc::vec::Vec;

use crate::vector::distance;

/// Greedy leader-following clustering.
///
/// Points are visited in the given order; each joins the first cluster whose leader (its
/// first member) lies within `radius`, otherwise it founds a new cluster. Returns clusters
/// as lists of indices into `points`.
pub fn cluster_particles<P: AsRef<[f64]>>(points: &[P], radius: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let p = p.as_ref();
        match clusters
            .iter_mut()
            .find(|c| distance(points[c[0]].as_ref(), p) <= radius)
        {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_pair_forms_one_group() {
        let pts = [vec![1.0, 1.0], vec![2.0, 1.0]];
        assert_eq!(cluster_particles(&pts, 5.0), vec![vec![0, 1]]);
    }

    #[test]
    fn distant_pair_forms_two_groups() {
        let pts = [vec![1.0, 1.0], vec![9.0, 1.0]];
        assert_eq!(cluster_particles(&pts, 5.0), vec![vec![0], vec![1]]);
    }

    #[test]
    fn joins_first_matching_leader() {
        // 2 is within range of both leaders; it goes to the first
        let pts = [vec![0.0], vec![10.0], vec![5.0], vec![20.0]];
        assert_eq!(cluster_particles(&pts, 5.0), vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn empty_input() {
        let pts: [Vec<f64>; 0] = [];
        assert!(cluster_particles(&pts, 1.0).is_empty());
    }
}
