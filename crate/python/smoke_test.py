#!/usr/bin/env python3
"""Smoke test for the omt_bits_py extension module.

Build the extension first:

    cargo build -p omt-bits-py --release

then run this script with the same interpreter family the extension was
built against:

    python3 python/smoke_test.py
"""

import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libomt_bits_py.so", "omt_bits_py.so", "libomt_bits_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("extension not built; run: cargo build -p omt-bits-py --release")
    stage = Path(tempfile.mkdtemp(prefix="omt_bits_py_"))
    shutil.copy2(built, stage / "omt_bits_py.so")
    sys.path.insert(0, str(stage))
    import omt_bits_py

    return omt_bits_py


def main():
    omt = load_module()

    worked = """
(declare-const c (_ FloatingPoint 3 5))
(assert (fp.geq c (fp #b0 #b110 #b1101)))
(minimize c)
(check-sat)
(get-objectives)
"""

    res = omt.solve(worked)
    assert res["status"] == "optimum", res
    assert res["value"] == "29/2", res
    assert res["bits"] == "01101101", res
    assert res["smt_calls"] <= 10, res
    assert res["model"]["c"] == "01101101", res

    # every engine and the oracle agree on the optimum
    for engine in ("ofp-bs", "omt-lin", "omt-bin"):
        assert omt.solve(worked, engine=engine)["value"] == "29/2", engine
    oracle = omt.brute_force(worked)
    assert oracle["status"] == "optimum" and oracle["value"] == "29/2", oracle
    assert oracle["candidates_tested"] == 256, oracle
    assert omt.verify(worked, res["bits"]), "claimed optimum must certify"
    assert not omt.verify(worked, "01101111"), "31/2 is not optimal"

    # interpreter output matches the CLI format
    printed = omt.run_script(worked)
    assert printed.splitlines()[0] == "sat", printed
    assert "(objectives (c 29/2))" in printed, printed

    # NaN protocol
    nan_only = """
(declare-const c (_ FloatingPoint 3 5))
(assert (fp.isNaN c))
(minimize c)
(check-sat)
"""
    res = omt.solve(nan_only)
    assert res["status"] == "nan-only" and res["value"] == "NaN", res

    # FP pattern inspection
    s = omt.FpSort(3, 5)
    assert s.total_bits == 8
    assert s.value("01101101") == "29/2"
    assert s.value("00000001") == "1/64"
    assert s.classify("01110000") == "+oo"
    assert s.classify(s.canonical_nan()) == "nan"
    assert s.infinity(negative=True) == "11110000"
    s48 = omt.FpSort(4, 8)
    assert s48.value("011000101000") == "42"
    assert s48.value("000000101000") == "5/1024"

    # two's-complement values and attractors
    assert omt.bv_value("11111111") == 255
    assert omt.bv_value("11111111", signed=True) == -1
    assert omt.bv_attractor(8, signed=True) == "10000000"
    assert omt.bv_attractor(8, signed=True, maximize=True) == "01111111"

    # signed BV optimization end to end
    signed = """
(declare-const x (_ BitVec 3))
(assert (bvsge x #b101))
(minimize x :signed)
(check-sat)
"""
    res = omt.solve(signed)
    assert res["value"] == "-3" and res["bits"] == "101", res

    # deterministic generation, and generated text parses back in
    a = omt.generate(11, "(3 5)", 3)
    b = omt.generate(11, "(3 5)", 3)
    assert a == b and len(a) == 3
    omt.solve(a[0][1])

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
