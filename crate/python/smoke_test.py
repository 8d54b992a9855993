"""Smoke test for the ic_lab extension module.

Build and install first:  pip install ./crates/python
Then run:                 python python/smoke_test.py
"""

import json
import math
import sys

import ic_lab


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))

    # information
    check("I_2(1) = 1", close(ic_lab.fano_information(2, 1.0), 1.0, 1e-12))
    table = [[0.45, 0.05], [0.05, 0.45]]
    check("fano equality", close(ic_lab.mutual_information(table), ic_lab.fano_information(2, 0.8), 1e-12))
    check("h(0.11)", close(ic_lab.binary_entropy(0.11), 0.4999, 1e-4))

    # boxes
    pr = ic_lab.Box.pr_box(1.0)
    check("pr box shape", pr.shape == (2, 2, 2, 2))
    check("pr box valid", pr.violations() == [])
    check("i3322 calibration", close(ic_lab.Box.box_3322(0.8).i3322_value(), 0.6, 1e-12))
    check("box json round trip", ic_lab.Box.from_json(pr.to_json()).prob(0, 0, 1, 1) == 0.0)

    # channels
    z = ic_lab.Channel([[1.0, 0.0], [0.5, 0.5]])
    check("z channel capacity", close(z.capacity(), math.log2(1.25), 1e-9))
    check("symmetric capacity", close(ic_lab.Channel.symmetric(3, 0.4).capacity(), ic_lab.closed_form_capacity(3, 0.4), 1e-12))

    # bounds
    r = ic_lab.solve_symmetric_bound(2, 2, 1.0)
    check("chsh capacity-1 bound", close(r.p_bound, 0.890, 1e-3))
    lim, _, _ = ic_lab.limit_bound(ic_lab.Protocol.van_dam(), pr, 2)
    check("tsirelson limit", close(lim.p_bound, ic_lab.TSIRELSON_P, 1e-3))
    b3322 = ic_lab.protocol_bound(ic_lab.Protocol.protocol_3322(), ic_lab.Box.box_3322(1.0), ic_lab.Channel.identity(2))
    check("3322 capacity-1 bound", close(b3322.e_bound, 0.7445, 1e-3))
    rows = ic_lab.table1()
    check("table1 e <= e'", all(e <= ec for _, _, e, ec, _ in rows))
    check("result1", ic_lab.result1_holds(2, 3, 0.7, 3))

    # protocols and search
    sim = ic_lab.simulate(ic_lab.Protocol.protocol_3322(), ic_lab.Box.box_3322(1.0), ic_lab.Channel.identity(2))
    check("3322 success", sim.success == [1.0, 0.75, 1.0])
    cfg = json.dumps({"cooling": 0.95, "steps_per_temperature": 100})
    _, score = ic_lab.anneal_protocol(pr, ic_lab.Channel.identity(2), 2, seed=3, config=cfg)
    check("anneal reaches 2 bits", close(score, 2.0, 1e-9))
    _, best = ic_lab.exhaustive_protocol_search(ic_lab.Box.pr_box(0.9), ic_lab.Channel.identity(2))
    check("exhaustive optimum", close(best, 2 * (1 - ic_lab.binary_entropy(0.9)), 1e-12))

    try:
        ic_lab.solve_symmetric_bound(2, 2, 0.0)
        check("domain error raised", False)
    except ValueError:
        check("domain error raised", True)

    for name, ok in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    failed = sum(not ok for _, ok in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
