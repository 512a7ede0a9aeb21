//! Weighted-consensus formation controller evaluated on delayed neighbor
//! positions: û_i = Σ_j w_ij (z_j(t−T_ij) − z_i(t)) with
//! w_ij = ‖z_i(t) − z_j(t−T_ij)‖² − d_ij².

use crate::Vec2;

/// What robot i knows about one neighbor when it computes its input.
#[derive(Debug, Clone, Copy)]
pub struct NeighborView {
    /// Delayed neighbor position z_j(t − T_ij).
    pub delayed_position: Vec2,
    /// Desired distance d_ij (> 0).
    pub desired_distance: f64,
}

/// Distance-error weight w_ij = ‖z_i − z_j‖² − d_ij².
pub fn edge_weight(z_i: Vec2, z_j_delayed: Vec2, desired_distance: f64) -> f64 {
    (z_i - z_j_delayed).norm_squared() - desired_distance * desired_distance
}

/// Nominal formation input û_i. Empty neighbor list yields zero.
pub fn nominal_input(z_i: Vec2, neighbors: &[NeighborView]) -> Vec2 {
    neighbors
        .iter()
        .map(|n| {
            edge_weight(z_i, n.delayed_position, n.desired_distance)
                * (n.delayed_position - z_i)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn edge_weight_values() {
        assert_eq!(edge_weight(v(0.0, 0.0), v(2.0, 0.0), 1.0), 3.0);
        // At the desired distance the weight vanishes.
        assert_eq!(edge_weight(v(0.0, 0.0), v(0.6, 0.8), 1.0), 0.0);
        assert_eq!(edge_weight(v(0.0, 0.0), v(0.5, 0.0), 1.0), -0.75);
    }

    #[test]
    fn single_neighbor_input() {
        // w = 3, direction (2,0): hand evaluation gives (6, 0).
        let u = nominal_input(
            v(0.0, 0.0),
            &[NeighborView { delayed_position: v(2.0, 0.0), desired_distance: 1.0 }],
        );
        assert_eq!(u, v(6.0, 0.0));
    }

    #[test]
    fn zero_at_desired_distances_and_for_no_neighbors() {
        assert_eq!(nominal_input(v(1.0, 1.0), &[]), v(0.0, 0.0));
        let u = nominal_input(
            v(0.0, 0.0),
            &[
                NeighborView { delayed_position: v(1.0, 0.0), desired_distance: 1.0 },
                NeighborView { delayed_position: v(0.0, -2.0), desired_distance: 2.0 },
            ],
        );
        assert_eq!(u, v(0.0, 0.0));
    }

    #[test]
    fn mirror_symmetric_neighbors_cancel_second_component() {
        let u = nominal_input(
            v(0.0, 0.0),
            &[
                NeighborView { delayed_position: v(1.0, 1.0), desired_distance: 0.5 },
                NeighborView { delayed_position: v(1.0, -1.0), desired_distance: 0.5 },
            ],
        );
        assert_eq!(u.y, 0.0);
        assert!(u.x != 0.0);
    }

    #[test]
    fn translation_invariance() {
        let shift = v(3.7, -1.2);
        let z_i = v(0.4, 0.9);
        let nbrs = [
            NeighborView { delayed_position: v(1.0, 2.0), desired_distance: 1.3 },
            NeighborView { delayed_position: v(-0.5, 0.1), desired_distance: 0.7 },
        ];
        let shifted: Vec<_> = nbrs
            .iter()
            .map(|n| NeighborView {
                delayed_position: n.delayed_position + shift,
                desired_distance: n.desired_distance,
            })
            .collect();
        let u0 = nominal_input(z_i, &nbrs);
        let u1 = nominal_input(z_i + shift, &shifted);
        assert_relative_eq!(u0.x, u1.x, epsilon = 1e-12);
        assert_relative_eq!(u0.y, u1.y, epsilon = 1e-12);
    }

    #[test]
    fn rotation_equivariance() {
        let rot = nalgebra::Rotation2::new(1.1);
        let z_i = v(0.4, 0.9);
        let nbrs = [
            NeighborView { delayed_position: v(1.0, 2.0), desired_distance: 1.3 },
            NeighborView { delayed_position: v(-0.5, 0.1), desired_distance: 0.7 },
        ];
        let rotated: Vec<_> = nbrs
            .iter()
            .map(|n| NeighborView {
                delayed_position: rot * n.delayed_position,
                desired_distance: n.desired_distance,
            })
            .collect();
        let u0 = rot * nominal_input(z_i, &nbrs);
        let u1 = nominal_input(rot * z_i, &rotated);
        assert_relative_eq!(u0.x, u1.x, epsilon = 1e-12);
        assert_relative_eq!(u0.y, u1.y, epsilon = 1e-12);
    }
}
