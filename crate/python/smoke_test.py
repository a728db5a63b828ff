"""Smoke test for the qpac_py extension.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/qpac_py-*.whl
"""

import math
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import qpac_py as q


def check(cond, what):
    if not cond:
        print(f"FAIL: {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    # ANF
    g = q.Anf.parity("1010")
    check(g.monomials == [0b0001, 0b0100], "parity 1010 has monomials x0, x2")
    check(g.evaluate("1000") and not g.evaluate("1010"), "parity evaluation")
    table = g.truth_table()
    check(q.Anf.from_truth_table(table) == g, "truth table round trip")
    check(str(g) == "n=4; 0x1,0x4", "render")
    check(q.Anf.parse(str(g)) == g, "parse rendered")
    check(len(g ^ g) == 0, "xor with self is zero")

    # statevector
    s = q.StateVector(3)
    s.ry(0, math.pi / 2)
    s.mcx([0], 2)
    probs = s.probabilities()
    check(abs(probs[0] - 0.5) < 1e-12 and abs(probs[0b101] - 0.5) < 1e-12, "Ry then CNOT")
    check(abs(s.norm_sqr() - 1.0) < 1e-12, "norm preserved")
    shots = s.sample(1000, seed=7)
    check(set(shots) <= {0, 5} and shots == s.sample(1000, seed=7), "sampling support and determinism")
    try:
        s.mcx([5], 0)
        check(False, "out-of-range control rejected")
    except ValueError:
        check(True, "out-of-range control rejected")

    # oracle
    o = q.Oracle.uniform(g)
    check(abs(o.exact_error(q.Anf(4)) - 0.5) < 1e-12, "uniform error of zero hypothesis")
    o = q.Oracle(g, seed=3)
    check(abs(sum(o.distribution()) - 1.0) < 1e-12, "random distribution normalizes")
    err = o.exact_error(q.Anf.parity("1000"))
    for m in range(4):
        p = o.amplified_probability(q.Anf.parity("1000"), m)
        check(abs(p - q.predicted_probability(err, m)) < 1e-9, f"amplification closed form m={m}")

    # constants
    check([q.m_max(e) for e in (0.01, 0.05, 0.1)] == [9, 4, 3], "m_max values")
    check([q.compute_n(d) for d in (0.1, 0.05, 0.01)] == [32, 128, 3184], "N(delta) values")
    check(q.posterior_confidence_exact(2) == Fraction(11, 16), "posterior at N=2")
    check(q.schedule_values(5, "powers-of-two") == [0, 1, 2, 4, 5], "powers-of-two schedule")
    check(q.parity_update(["1100"], ["1000"]) == ["0100"], "parity update")

    # learner
    rec = q.learn(q.Oracle.uniform(g), 0.1, 0.1, seed=1)
    check(rec["final_hypothesis"] == [1, 4] and rec["terminated_ok"], "learn recovers 1010")
    check(rec["final_error"] < 0.1, "final error below epsilon")

    # experiment grid
    with tempfile.TemporaryDirectory() as d:
        out = Path(d) / "rows.csv"
        cfg = {"n": 3, "concepts": "all", "epsilons": [0.1], "deltas": [0.1], "repetitions": 2, "seed": 1, "out": str(out)}
        rows = q.run_grid(cfg)
        check(len(rows) == 16 and out.exists(), "run_grid rows and csv")
        check(rows == q.run_grid(cfg), "run_grid is deterministic")
        summary = q.summarize(rows)
        check(len(summary) == 8 and all(r["runs"] == 2 for r in summary), "summarize")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
