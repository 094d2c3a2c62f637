use super::{
    ApproximatorSection, ControllerSection, FollowerSection, GainSection, LeaderSection, ModeSection,
    OutputSection, ScenarioFile, SimSection, SwitchingSection, TopologySection,
};
use crate::simulator::NetworkScenario;

fn mode(phi: [&str; 2], h: [&str; 2], h_bounds: [[f64; 2]; 2]) -> ModeSection {
    ModeSection {
        phi: phi.iter().map(|s| s.to_string()).collect(),
        h: h.iter().map(|s| s.to_string()).collect(),
        h_bounds: h_bounds.to_vec(),
    }
}

fn follower(powers: [u32; 2], xi0: f64, modes: Vec<ModeSection>) -> FollowerSection {
    FollowerSection {
        powers: powers.to_vec(),
        x0: vec![0.1, -0.1],
        xi0: vec![xi0, xi0],
        gains: GainSection {
            c: vec![3.0, 1.5],
            beta: vec![15.0, 1.0],
            sigma: vec![0.5, 1.0],
            zeta: vec![0.5, 0.75],
            b: vec![0.5, 1.0],
        },
        switching: SwitchingSection {
            dwell_min: Some(0.5),
            segments: None,
        },
        approximator: ApproximatorSection::default(),
        modes,
    }
}

/// The three-follower, three-mode demonstration network as a scenario file.
///
/// The original parameter list leaves some values open; they are set here to
/// `d = 0.5`, the default basis geometry, generated schedules with a dwell
/// of 0.5 s, and a declared lower bound of 1 for `2*cos(x1)^2` (which itself
/// touches 0).
pub fn paper_scenario_file() -> ScenarioFile {
    let f1 = follower(
        [3, 5],
        5.0,
        vec![
            mode(
                ["1 - cos(x1)", "x1*x2 + 0.5"],
                ["abs(tanh(x1^2)) + 4", "2*(abs(cos(x1^3*x2)) + 1)"],
                [[4.0, 5.0], [2.0, 4.0]],
            ),
            mode(
                ["0.5 + exp(-x1^2)", "0.2*x1^2 + x2"],
                ["cos(x1^3) + 3", "3*sin(x2)^3 + 5"],
                [[2.0, 4.0], [2.0, 8.0]],
            ),
            mode(
                ["0.2*cos(x1) + 0.5", "cos(x1^2*x2) + 0.2"],
                ["2*cos(x1)^2", "5*abs(sin(0.1*x1*x2)) + 2"],
                [[1.0, 2.0], [2.0, 7.0]],
            ),
        ],
    );
    let f2 = follower(
        [3, 7],
        7.0,
        vec![
            mode(
                ["1.5*x1 + x1^2", "0.25*x2 + 0.5"],
                ["2*sin(x1^2) + 6", "3*cos(x2^2) + 5"],
                [[4.0, 8.0], [2.0, 8.0]],
            ),
            mode(
                ["x1^3 + 0.25", "0.3 + 0.5*x1*x2^2"],
                ["sin(x1^3) + 3", "3*cos(x1 + x2^2) + 5"],
                [[2.0, 4.0], [2.0, 8.0]],
            ),
            mode(
                ["x1^2 + 0.2", "cos(x1*x2) + 0.2"],
                ["cos(x1) + 3", "5 + 3*sin(x1^2 + x2*x1^2)"],
                [[2.0, 4.0], [2.0, 8.0]],
            ),
        ],
    );
    let f3 = follower(
        [5, 9],
        10.0,
        vec![
            mode(
                ["x1 + 0.5*sin(x1)", "0.3*x1^2 + x2"],
                ["abs(cos(x1)) + 4", "cos(x2^2) + 3"],
                [[4.0, 5.0], [2.0, 4.0]],
            ),
            mode(
                ["0.3*x1^2 + cos(x1)", "x2 + 0.5*sin(x1)"],
                ["abs(sin(x2^3)) + 2", "4*cos(x1) + 6"],
                [[2.0, 3.0], [2.0, 10.0]],
            ),
            mode(
                ["x1 + 0.5*x1^2", "cos(x1*x2)^2 + 0.5"],
                ["cos(x2^2*x1^3) + 3", "cos(x2)^3 + 3"],
                [[2.0, 4.0], [2.0, 4.0]],
            ),
        ],
    );

    ScenarioFile {
        sim: SimSection::default(),
        controller: ControllerSection { d: 0.5 },
        topology: TopologySection {
            followers: 3,
            edges: vec![[1, 2], [2, 3], [3, 1]],
            leader_to: vec![1],
        },
        leader: LeaderSection {
            y_r: "2*sin(t) + 2*sin(0.5*t)".into(),
        },
        outputs: OutputSection::default(),
        followers: vec![f1, f2, f3],
    }
}

pub fn builtin_paper_scenario() -> NetworkScenario {
    paper_scenario_file()
        .build()
        .expect("built-in scenario is valid")
        .0
}
