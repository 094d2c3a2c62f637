"""Smoke test for the consensus_py extension.

Build and install it first, e.g. `maturin develop --release -m crates/python/Cargo.toml`
inside a virtualenv, then run `python python/smoke_test.py`.
"""

import math
import tempfile
from pathlib import Path

import consensus_py as cp


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAILED: {what}")
    print(f"ok   {what}")


def main():
    c = cp.separation_coefficients(3, 0.1)
    check(abs(c["d"] - (2 * 0.1**1.5 + 0.1**3)) < 1e-12, "separation coefficients for r=3, l=0.1")
    l = cp.solve_l_for_d(5, 0.5)
    check(abs(cp.separation_coefficients(5, l)["d"] - 0.5) < 1e-9, "solve_l_for_d round trip")
    check(cp.odd_pow(-2.0, 3) == -8.0, "odd_pow")
    check(cp.check_separation_inequality(1.5, -0.7, 7, 0.5), "separation inequality sample")

    suites = cp.verify_lemmas(samples=5000, seed=3)
    check(len(suites) == 4 and all(s["violations"] == 0 for s in suites), "lemma suites")

    g = cp.graph_check(3, [[1, 2], [2, 3], [3, 1]], [1])
    check(g["h"] == [[2, 0, -1], [-1, 1, 0], [0, -1, 1]] and g["det"] == 1, "interaction matrix")
    check(g["lambda_bound"] <= g["sigma_min"], "conservative eigenvalue bound")

    check(abs(cp.rbf_theta([[0.0], [1.0]], [1.0, 1.0], [0.5]) - math.sqrt(2) * math.exp(-0.25)) < 1e-12, "rbf theta")

    sc = cp.Scenario.builtin()
    sc.horizon = 0.5
    check(sc.follower_count == 3 and len(sc.validate()) >= 1, "builtin scenario validates with warnings")
    same = cp.Scenario.from_toml(sc.to_toml())
    check(same.horizon == 0.5, "TOML round trip")

    traj = sc.run()
    check(len(traj) == 501 and traj.orders == [2, 2, 2], "short run recorded")
    check(all(v >= 0 for f in (1, 2, 3) for k in (1, 2) for v in traj.estimate(f, k)), "estimates nonnegative")
    check(traj.check_boundedness(state=15.0)["pass"], "bounded states")
    summary = traj.summary()
    check(len(summary["followers"]) == 3, "summary")
    metrics = sc.consensus_metrics(traj)
    check(len(metrics["s1"]) == len(traj), "consensus metrics")

    with tempfile.TemporaryDirectory() as d:
        paths = traj.write(d)
        check(sorted(Path(p).suffix for p in paths) == [".csv", ".gp", ".json"], "outputs written")
        back = cp.Trajectory.read_csv(Path(d) / "trajectory.csv")
        check(back.state(2, 1) == traj.state(2, 1), "CSV read back exactly")

    try:
        cp.Scenario.from_toml(sc.to_toml().replace("horizon", "horizn"))
        check(False, "typo rejected")
    except ValueError:
        check(True, "typo rejected")

    print("smoke test passed")


if __name__ == "__main__":
    main()
