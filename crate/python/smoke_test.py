"""Smoke test for the secular_forge_py extension module."""

import math

import secular_forge_py as sf


def main():
    z = sf.solve_kepler(0.3, 1.0)
    assert abs(z - 0.3 * math.sin(z) - 1.0) < 1e-12

    assert abs(sf.kepler_energy(1.0, 1.0, 1.0) + 0.5) < 1e-15

    quad, closed = sf.secular_f2([0.5, 1.0], [0.1, 0.05], [0.02, -0.03], 0.1, 0.05)
    assert abs(quad - closed) < 1e-8 * abs(closed), (quad, closed)

    table = dict((m, lead) for m, lead, _ in sf.normal_form())
    assert table["t1*t2"] == "9*l1*l2", table["t1*t2"]
    checks = sf.order6_check()
    assert len(checks) == 15
    mismatched = sorted(m for m, _, _, ok in checks if not ok)
    print("order-6 mismatches:", mismatched)

    verdicts = sf.three_jet_sweep(5, seed=1)
    assert all(v == "only_trivial" for v, _ in verdicts), verdicts

    rep = sf.integrate_planar(1e-3, 1.0, 2.0, 0.05, 0.03, 100.0)
    assert rep["energy_rel_error"] < 1e-8, rep
    assert rep["max_out_of_plane"] == 0.0

    for cid, name, passed, value, tol in sf.run_suite("verify-chart"):
        print(f"[{cid}] {name}: passed={passed} value={value:.2e} tol={tol:.1e}")
        assert passed

    try:
        sf.solve_kepler(1.5, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
    print("smoke test ok")


if __name__ == "__main__":
    main()
