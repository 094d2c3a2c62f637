//! Gaussian radial-basis regressors.
//!
//! The controller never adapts weights; it only consumes `Θ = ‖φ(Z)‖`, the
//! Euclidean norm of the basis vector at the current regressor `Z`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ApproxError {
    #[error("input has dimension {found}, network expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("network needs at least one node and one input dimension")]
    Empty,
    #[error("width {0} is not positive")]
    BadWidth(f64),
    #[error("box axis {axis}: lo = {lo} must be below hi = {hi}")]
    BadBox { axis: usize, lo: f64, hi: f64 },
    #[error("center {index} has dimension {found}, expected {expected}")]
    CenterDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("{centers} centers but {widths} widths")]
    WidthCount { centers: usize, widths: usize },
}

/// Lattice layout kept alongside the explicit centers so `theta` can use the
/// product structure of an isotropic Gaussian on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Lattice {
    axes: Vec<Vec<f64>>,
    width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfNetwork {
    input_dim: usize,
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    lattice: Option<Lattice>,
}

impl RbfNetwork {
    pub fn new(centers: Vec<Vec<f64>>, widths: Vec<f64>) -> Result<Self, ApproxError> {
        let input_dim = centers.first().map_or(0, Vec::len);
        if centers.is_empty() || input_dim == 0 {
            return Err(ApproxError::Empty);
        }
        if widths.len() != centers.len() {
            return Err(ApproxError::WidthCount {
                centers: centers.len(),
                widths: widths.len(),
            });
        }
        for (index, c) in centers.iter().enumerate() {
            if c.len() != input_dim {
                return Err(ApproxError::CenterDimension {
                    index,
                    expected: input_dim,
                    found: c.len(),
                });
            }
        }
        if let Some(&w) = widths.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
            return Err(ApproxError::BadWidth(w));
        }
        Ok(Self {
            input_dim,
            centers,
            widths,
            lattice: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn node_count(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    fn check_dim(&self, z: &[f64]) -> Result<(), ApproxError> {
        if z.len() == self.input_dim {
            Ok(())
        } else {
            Err(ApproxError::DimensionMismatch {
                expected: self.input_dim,
                found: z.len(),
            })
        }
    }

    /// `φ_i(z) = exp(−‖z − c_i‖² / η_i²)`.
    pub fn basis(&self, z: &[f64]) -> Result<Vec<f64>, ApproxError> {
        self.check_dim(z)?;
        Ok(self
            .centers
            .iter()
            .zip(&self.widths)
            .map(|(c, w)| {
                let dist2: f64 = c.iter().zip(z).map(|(ci, zi)| (zi - ci).powi(2)).sum();
                (-dist2 / (w * w)).exp()
            })
            .collect())
    }

    /// `Θ = ‖φ(z)‖`.
    pub fn theta(&self, z: &[f64]) -> Result<f64, ApproxError> {
        self.check_dim(z)?;
        match &self.lattice {
            // Σ_i φ_i² factorises over axes for an isotropic lattice
            Some(lat) => {
                let inv = 2.0 / (lat.width * lat.width);
                let sq: f64 = lat
                    .axes
                    .iter()
                    .zip(z)
                    .map(|(axis, zi)| {
                        axis.iter()
                            .map(|g| (-(zi - g).powi(2) * inv).exp())
                            .sum::<f64>()
                    })
                    .product();
                Ok(sq.sqrt())
            }
            None => Ok(self.basis(z)?.iter().map(|p| p * p).sum::<f64>().sqrt()),
        }
    }

    /// Analytic Lipschitz constant of `theta`: `√M · max_i √2 / (η_i e^{1/2})`.
    pub fn theta_lipschitz(&self) -> f64 {
        let min_width = self.widths.iter().copied().fold(f64::INFINITY, f64::min);
        (self.node_count() as f64).sqrt() * 2f64.sqrt() / (min_width * 0.5f64.exp())
    }
}

fn check_box(box_lo: &[f64], box_hi: &[f64], input_dim: usize) -> Result<(), ApproxError> {
    if input_dim == 0 {
        return Err(ApproxError::Empty);
    }
    if let Some(b) = [box_lo, box_hi].into_iter().find(|b| b.len() != input_dim) {
        return Err(ApproxError::DimensionMismatch {
            expected: input_dim,
            found: b.len(),
        });
    }
    for (axis, (&lo, &hi)) in box_lo.iter().zip(box_hi).enumerate() {
        if !(lo < hi) {
            return Err(ApproxError::BadBox { axis, lo, hi });
        }
    }
    Ok(())
}

/// Centers on the uniform `per_axis_nodes^input_dim` lattice of the box, all
/// with the same width. A single node per axis sits at the box midpoint.
pub fn grid_network(
    input_dim: usize,
    per_axis_nodes: usize,
    box_lo: &[f64],
    box_hi: &[f64],
    width: f64,
) -> Result<RbfNetwork, ApproxError> {
    check_box(box_lo, box_hi, input_dim)?;
    if per_axis_nodes == 0 {
        return Err(ApproxError::Empty);
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(ApproxError::BadWidth(width));
    }
    let axes: Vec<Vec<f64>> = box_lo
        .iter()
        .zip(box_hi)
        .map(|(&lo, &hi)| {
            if per_axis_nodes == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                let step = (hi - lo) / (per_axis_nodes - 1) as f64;
                (0..per_axis_nodes).map(|i| lo + step * i as f64).collect()
            }
        })
        .collect();

    let total = per_axis_nodes.pow(input_dim as u32);
    let mut centers = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut c = vec![0.0; input_dim];
        for d in (0..input_dim).rev() {
            c[d] = axes[d][rem % per_axis_nodes];
            rem /= per_axis_nodes;
        }
        centers.push(c);
    }
    let mut net = RbfNetwork::new(centers, vec![width; total])?;
    net.lattice = Some(Lattice { axes, width });
    Ok(net)
}

/// `nodes` centers drawn uniformly in the box from a seeded ChaCha stream.
pub fn random_network(
    input_dim: usize,
    nodes: usize,
    box_lo: &[f64],
    box_hi: &[f64],
    width: f64,
    seed: u64,
) -> Result<RbfNetwork, ApproxError> {
    check_box(box_lo, box_hi, input_dim)?;
    if nodes == 0 {
        return Err(ApproxError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = (0..nodes)
        .map(|_| {
            box_lo
                .iter()
                .zip(box_hi)
                .map(|(&lo, &hi)| rng.random_range(lo..hi))
                .collect()
        })
        .collect();
    RbfNetwork::new(centers, vec![width; nodes])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn at_center_value_is_one() {
        let net = RbfNetwork::new(vec![vec![0.3, -1.0]], vec![2.0]).unwrap();
        assert_eq!(net.basis(&[0.3, -1.0]).unwrap(), vec![1.0]);
        assert_eq!(net.theta(&[0.3, -1.0]).unwrap(), 1.0);
    }

    #[test]
    fn far_inputs_decay() {
        let net = RbfNetwork::new(vec![vec![0.0]], vec![1.0]).unwrap();
        let near = net.basis(&[3.0]).unwrap()[0];
        let far = net.basis(&[10.0]).unwrap()[0];
        assert!(far < near && far > 0.0);
    }

    #[test]
    fn two_node_example() {
        let net = RbfNetwork::new(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let phi = net.basis(&[0.5]).unwrap();
        let e = (-0.25f64).exp();
        assert_eq!(phi, vec![e, e]);
        assert!((phi[0] - 0.7788).abs() < 1e-4);
        let theta = net.theta(&[0.5]).unwrap();
        assert!((theta - (2.0 * e * e).sqrt()).abs() < 1e-15);
        assert!((theta - 1.1014).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = grid_network(2, 2, &[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(
            net.theta(&[0.0]),
            Err(ApproxError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn grid_layouts() {
        let net = grid_network(1, 3, &[-1.0], &[1.0], 1.0).unwrap();
        assert_eq!(net.centers(), &[vec![-1.0], vec![0.0], vec![1.0]]);
        let net = grid_network(2, 2, &[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(
            net.centers(),
            &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
        let net = grid_network(3, 3, &[-1.0; 3], &[1.0; 3], 1.0).unwrap();
        assert_eq!(net.node_count(), 27);
        let single = grid_network(1, 1, &[2.0], &[4.0], 1.0).unwrap();
        assert_eq!(single.centers(), &[vec![3.0]]);
    }

    #[test]
    fn inconsistent_box_rejected() {
        assert!(matches!(
            grid_network(2, 3, &[0.0, 1.0], &[1.0, 1.0], 1.0),
            Err(ApproxError::BadBox { axis: 1, .. })
        ));
        assert!(grid_network(1, 3, &[0.0], &[1.0], 0.0).is_err());
        assert!(grid_network(1, 0, &[0.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn random_network_is_seeded() {
        let a = random_network(6, 16, &[-6.0; 6], &[6.0; 6], 3.0, 11).unwrap();
        let b = random_network(6, 16, &[-6.0; 6], &[6.0; 6], 3.0, 11).unwrap();
        let c = random_network(6, 16, &[-6.0; 6], &[6.0; 6], 3.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a
            .centers()
            .iter()
            .flatten()
            .all(|&v| (-6.0..6.0).contains(&v)));
    }

    #[test]
    fn twenty_five_nodes_bounded_by_five() {
        let net = grid_network(2, 5, &[-1.0; 2], &[1.0; 2], 50.0).unwrap();
        let theta = net.theta(&[0.0, 0.0]).unwrap();
        assert!(theta <= 5.0 && theta > 4.9);
    }

    proptest! {
        #[test]
        fn lattice_fast_path_matches_basis_norm(
            z in prop::collection::vec(-8.0f64..8.0, 3),
            per_axis in 1usize..5,
            width in 0.5f64..4.0,
        ) {
            let net = grid_network(3, per_axis, &[-6.0; 3], &[6.0; 3], width).unwrap();
            let direct: f64 = net.basis(&z).unwrap().iter().map(|p| p * p).sum::<f64>().sqrt();
            let fast = net.theta(&z).unwrap();
            prop_assert!((direct - fast).abs() <= 1e-12 * direct.max(1e-300) + 1e-300);
        }

        #[test]
        fn basis_in_unit_interval_and_theta_bounded(z in prop::collection::vec(-10.0f64..10.0, 2)) {
            let net = grid_network(2, 4, &[-6.0; 2], &[6.0; 2], 3.0).unwrap();
            for p in net.basis(&z).unwrap() {
                prop_assert!(p > 0.0 && p <= 1.0);
            }
            prop_assert!(net.theta(&z).unwrap() <= (net.node_count() as f64).sqrt());
        }

        #[test]
        fn theta_permutation_invariant(z in prop::collection::vec(-6.0f64..6.0, 2), seed in 0u64..1000) {
            let net = random_network(2, 9, &[-6.0; 2], &[6.0; 2], 2.0, seed).unwrap();
            let mut centers = net.centers().to_vec();
            centers.reverse();
            centers.rotate_left(4);
            let shuffled = RbfNetwork::new(centers, net.widths().to_vec()).unwrap();
            let (a, b) = (net.theta(&z).unwrap(), shuffled.theta(&z).unwrap());
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1.0));
        }

        #[test]
        fn theta_is_lipschitz(
            z in prop::collection::vec(-8.0f64..8.0, 3),
            dz in prop::collection::vec(-0.5f64..0.5, 3),
        ) {
            let net = random_network(3, 20, &[-6.0; 3], &[6.0; 3], 1.5, 3).unwrap();
            let z2: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + b).collect();
            let dist = dz.iter().map(|v| v * v).sum::<f64>().sqrt();
            let bound = 1.1 * net.theta_lipschitz() * dist;
            let gap = (net.theta(&z).unwrap() - net.theta(&z2).unwrap()).abs();
            prop_assert!(gap <= bound + 1e-15);
        }

        #[test]
        fn shrinking_box_keeps_sqrt_m_bound(
            z in prop::collection::vec(-1.0f64..1.0, 2),
            shrink in 0.01f64..1.0,
        ) {
            let net = grid_network(2, 3, &[-shrink; 2], &[shrink; 2], 1.0).unwrap();
            prop_assert!(net.theta(&z).unwrap() <= 3.0 + 1e-12);
        }
    }
}
