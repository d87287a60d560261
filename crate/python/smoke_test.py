"""Quick check that the compiled `pumblock` extension imports and runs."""

import json
import math
import sys

import pumblock


def main() -> int:
    pts = pumblock.halton(600, 2)
    assert len(pts) == 600 and all(0.0 <= c < 1.0 for p in pts for c in p)

    assert abs(pumblock.phi("wendland-c2", 0.0, 1.0) - 1.0) < 1e-15
    assert pumblock.phi("wu-c4", 1.0, 1.0) == 0.0
    assert abs(pumblock.test_function("f1", [0.0, 0.0]) - 0.766420591284923) < 1e-14

    dom = pumblock.ConvexDomain([[0, 0], [1, 0], [0, 1], [0.2, 0.2]])
    assert abs(dom.measure - 0.5) < 1e-12
    assert dom.contains([0.1, 0.1]) and not dom.contains([0.9, 0.9])

    bs = pumblock.BlockStructure(pts, 0.1)
    found = sorted(i for i, _ in bs.range_search([0.5, 0.5], 0.1))
    brute = sorted(
        i for i, p in enumerate(pts) if math.dist(p, [0.5, 0.5]) <= 0.1
    )
    assert found == brute, (found, brute)

    values = [pumblock.test_function("f1", p) for p in pts]
    res = pumblock.pum_interpolate(pts, values, epsilon=1.0, truth="f1")
    report = json.loads(res.report)
    assert len(res.values) == len(res.eval_points) == report["s"]
    assert report["rmse"] < 1e-2, report
    again = res.model.evaluate(pts[:5])
    assert all(abs(a - b) < 1e-10 for a, b in zip(again, values[:5]))

    print(f"pumblock smoke test ok: N={report['N']} rmse={report['rmse']:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
