use consensus_core::analysis::{consensus_metrics, omega3_radius};
use consensus_core::scenario::paper_scenario_file;
use consensus_core::simulator::Network;
use proptest::prelude::*;

#[test]
fn metric_s1_matches_the_controllers_s1() {
    let mut file = paper_scenario_file();
    file.sim.horizon = 3.0;
    let network = Network::new(file.build().unwrap().0).unwrap();
    let traj = network.integrate().unwrap();
    let h = network.scenario().topology.laplacian().h_matrix();
    let metrics = consensus_metrics(&traj, &h).unwrap();
    for (i, s) in metrics.s1.iter().enumerate() {
        for (f, tr) in traj.followers.iter().enumerate() {
            let scale = 1.0 + tr.s1[i].abs();
            assert!((s[f] - tr.s1[i]).abs() <= 1e-12 * scale, "t = {}: {} vs {}", traj.times[i], s[f], tr.s1[i]);
        }
    }
}

fn psi() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((2.0f64..10.0, 2.0f64..10.0).prop_map(|(a, b)| (a.max(b), a.min(b))), 2..6)
}

proptest! {
    #[test]
    fn omega3_shrinks_with_alpha_and_grows_with_chi(
        alpha in 0.05f64..10.0,
        chi in 0.1f64..100.0,
        bump in 1.0001f64..3.0,
        psi in psi(),
    ) {
        let base = omega3_radius(alpha, chi, &psi);
        prop_assert!(omega3_radius(alpha * bump, chi, &psi) <= base);
        prop_assert!(omega3_radius(alpha, chi * bump, &psi) >= base);
    }
}
