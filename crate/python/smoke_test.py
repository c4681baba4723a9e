"""Smoke test for the codeswitch_py extension.

Build and run from the repository root:

    cargo build -p codeswitch-py --features extension-module
    cp target/debug/libcodeswitch_py.so python/codeswitch_py.so
    python3 python/smoke_test.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import codeswitch_py as cs


def main() -> None:
    toric = cs.Code.toric(3)
    assert (toric.n, toric.k, toric.d_x, toric.d_z) == (18, 2, 3, 3), toric
    assert toric.validate() == []
    assert len(toric.matrix("H_Z")) == 9

    q = cs.Code.toric(2)
    qg = cs.Code.qg(2)
    assert (qg.n, qg.k, qg.d_ss) == (24, 3, 2), qg
    assert len(qg.matrix("M_Z")) == 8
    pairs = cs.schedule(qg, q)
    assert len(pairs) == 8
    assert cs.logical_cnot_ok(qg, q)

    text = toric.bundle_text("toric3")
    assert cs.verify_bundle(text) == []
    header = json.loads(text.splitlines()[0])
    assert header["params"]["n"] == 18

    table, mode = cs.confinement(toric, 2)
    assert mode == "exhaustive" and dict(table)[1] == 2
    preimage, alpha = cs.soundness(qg, 5)
    assert alpha > 0 and preimage

    script = json.dumps([
        {"op": "prep_data", "reg": "d", "code": "QG"},
        {"op": "ec", "reg": "d"},
        {"op": "check", "reg": "d"},
    ])
    failures, *_ = cs.simulate([("Q", q), ("QG", qg)], script, 0.0, 0.0, 200, seed=1)
    assert failures == 0
    failures, *_ = cs.simulate([("Q", q), ("QG", qg)], script, 0.05, 0.05, 200, seed=1)
    assert 0 < failures <= 200

    lo, hi = cs.wilson(10, 100)
    assert abs(lo - 0.0552) < 1e-3 and abs(hi - 0.1744) < 1e-3
    s, p = cs.mann_kendall_trend([float(i) for i in range(10)])
    assert s == 45 and p < 0.01

    try:
        cs.Code.from_recipe('{"kind": "nonsense"}')
    except ValueError:
        pass
    else:
        raise AssertionError("bad recipe accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
