"""Smoke test for the entcert_py extension module.

Build the module first, e.g. from the workspace root:
    cargo build -p entcert-py --release --features extension-module
    cp target/release/libentcert_py.so python/entcert_py.so
or `maturin develop` inside crates/entcert-py.
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import numpy as np

import entcert_py as ec


def close(a, b, tol=1e-8):
    return abs(a - b) <= tol


def ghz_dense(n, p):
    d = 2**n
    psi = np.zeros(d, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return (1 - p) * np.outer(psi, psi.conj()) + p * np.eye(d) / d


def main():
    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))

    check("version", ec.version().count(".") == 2)

    g4 = ec.named_state("ghz", n=4)
    check("ghz shape", g4.n_qubits == 4 and g4.dim == 16)
    check("ghz white full", close(ec.threshold(g4, "white", "full")["p0"], 8 / 15))
    check("ghz white fidelity", close(ec.threshold(g4, criterion="fidelity")["p0"], 8 / 15))

    dur = ec.named_state("bound_dur", n=4)
    check("bound_dur white some", close(ec.threshold(dur, "white", "some")["p0"], 8 / 13))

    dicke = ec.named_state("dicke", n=4, l=2, rotated=True)
    check("rotated dicke full", close(ec.threshold(dicke, criterion="full")["p0"], 4 / 11))

    # Dense input built independently in numpy must agree with the catalog state.
    rho = ghz_dense(3, 0.3)
    dense = ec.DensityMatrix.from_entries(3, [complex(z) for z in rho.flatten()])
    noisy = ec.named_state("ghz_noisy", n=3, p=0.3, noise="white")
    diff = max(abs(a - b) for a, b in zip(dense.entries(), noisy.entries()))
    check("dense matches catalog", diff < 1e-12)
    check("entry accessor", close(dense.entry(0, 7).real, 0.35))

    report = ec.analyze(dense)
    check("analyze violated", report["violated"] and report["biseparability"]["violated"])
    white = ec.analyze(ec.DensityMatrix.from_entries(2, [complex(z) for z in (np.eye(4) / 4).flatten()]))
    check("white not violated", not white["violated"])

    classes = ec.classify(ec.named_state("ghz", n=3))["classes"]
    consistent = [c["class"] for c in classes if c["status"] == "consistent"]
    check("ghz3 classes", consistent == ["1"])
    scan = ec.classify(dur)
    check("bound_dur bracket", scan["k_bracket"] == [1, 2])

    check("solution sets", ec.solution_sets(4, "(ab)-(cd)") == [[0, 2], [1, 3], [4, 6], [5, 7]])

    for label, call in [
        ("bad name", lambda: ec.named_state("nosuch")),
        ("bad noise", lambda: ec.threshold(g4, "pink")),
        ("not a state", lambda: ec.DensityMatrix.from_entries(1, [2, 0, 0, -1])),
    ]:
        try:
            call()
            check(label, False)
        except ValueError:
            check(label, True)

    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    failed = sum(not ok for _, ok in checks)
    print(f"{len(checks) - failed} of {len(checks)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
