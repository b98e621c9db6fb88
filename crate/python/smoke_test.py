"""Smoke test for the Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/py
Then run:                  python python/smoke_test.py
"""

import json
import math
from pathlib import Path

import constellation_spares_py as cs

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main() -> None:
    rate = cs.precession_rate(650.0, 53.0)
    assert math.isclose(rate, -0.52163, rel_tol=1e-4), rate
    assert math.isclose(cs.precession_rate(650.0, 53.0, unit="day"), rate / 7.0, rel_tol=1e-9)

    sc = cs.Scenario.load(str(SCENARIOS / "case1.json"))
    assert sc.name == "case1"
    m = sc.evaluate()
    assert abs(m["cost"]["tessac"] - 969.89) < 0.05, m["cost"]
    print(f"case1 TESSAC {m['cost']['tessac']:.2f} M$/yr, rho_plane {m['plane']['rho_plane']:.4f}")

    # round trip through JSON text
    again = cs.Scenario.from_json(sc.to_json())
    assert again.evaluate() == m

    cheaper = sc.with_policy(h_s=0.4)
    assert cheaper.evaluate()["cost"]["tessac"] < m["cost"]["tessac"]
    assert sc.evaluate(single_channel=True)["plane"]["p2"] == 0.0

    sim = sc.simulate(replications=2, years=5, seed=1)
    assert sim == sc.simulate(replications=2, years=5, seed=1)
    print(f"simulated TESSAC {sim['pooled']['tessac']:.2f}, error {sim['errors']['tessac_rel']:.2f}%")

    try:
        sc.with_policy(q1=0)
    except ValueError as e:
        print(f"rejected bad policy: {e}")
    else:
        raise AssertionError("q1 = 0 accepted")

    doc = json.loads(sc.to_json())
    doc["problem"]["rho_plane_req"] = 0.999999
    doc["problem"]["rho_parking_req"] = 0.999999
    doc["problem"]["bounds"]["k_q"] = {"lo": 3, "hi": 4}
    try:
        cs.Scenario.from_json(json.dumps(doc)).optimize(generations=2, population=6)
    except cs.NoFeasibleSolutionError as e:
        print(f"infeasible problem reported: {e}")
    else:
        raise AssertionError("impossible problem solved")

    report = cs.Scenario.load(str(SCENARIOS / "case2_instance0.json")).optimize(kind="or", seed=3, generations=10, population=24)
    assert report["feasible"]
    print(f"short GA run: {report['evaluations']} evaluations, best objective {report['objective']:.2f}")
    print("smoke test passed")


if __name__ == "__main__":
    main()
