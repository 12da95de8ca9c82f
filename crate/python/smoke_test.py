"""Smoke test for the Python bindings.

Build first with `cargo build -p darboux-python --release` (or without
--release); the script copies the shared library next to a temporary
`darboux.so` and imports it.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libdarboux_py.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "darboux.so")
            sys.path.insert(0, str(tmp))
            import darboux

            return darboux
    sys.exit("libdarboux_py.so not found; run `cargo build -p darboux-python` first")


def main():
    dz = load()

    m = dz.ModelParams(dim=3, lam=0.01)
    assert f"{m.closed_form_energy(0):.4f}" == "1.4777"
    assert abs(dz.ModelParams(lam=0.1).scalar_curvature(0.0) + 1.2) < 1e-12
    assert dz.ModelParams(lam=0.0).continuum_threshold() == math.inf
    assert abs(m.inverse_flattening(m.flattening_coordinate(2.5)) - 2.5) < 1e-10

    x = dz.Operator.parse("q1*p1 - p1*q1", 2)
    assert str(x) == str(dz.Operator.parse("i*hbar", 2)), str(x)
    h = dz.build_hamiltonian("tlb", 2)
    assert h == dz.build_hamiltonian("schrodinger", 2)
    assert (h.commutator(h)).is_zero()

    rep = dz.verify_theorem("tlb", 3)
    assert rep["all_zero"] and rep["checks"]
    bad = dz.verify_theorem("tlb", 2, corrupt="I11")
    assert not bad["all_zero"]

    levels = dz.solve_bound_states(m, 0, 4)
    assert abs(levels[0]["e_numeric"] - levels[0]["e_closed"]) < 1e-6 * levels[0]["e_closed"]

    iso = dz.isospectrality_check(dz.ModelParams(), 1, 4)
    assert iso["agree"] and iso["max_rel_diff"] < 1e-8

    assert dz.degeneracy_census(3, 4) == (15, 15)

    p = dz.ModelParams()
    pts = [[0.3, -0.2, 0.5], [1.1, 0.4, -0.7], [-0.9, 1.3, 0.2]]
    assert dz.eigenfunction_residual(p, [1, 0, 2], pts) < 1e-10

    q0, p0 = [1.0, 0.5, -0.3], [0.2, -0.4, 0.6]
    inv = dict(dz.classical_invariants(p, q0, p0))
    drift, _, _ = dz.integrate(p, q0, p0, 50.0)
    assert drift < 1e-7, drift
    _, _, closed = dz.orbit_closure(p, q0, p0)
    assert closed
    assert len(inv) > 0

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
