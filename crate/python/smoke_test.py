"""Smoke test for the pysusytoy extension (build it from crates/python with maturin)."""

import math

import pysusytoy as st


def main():
    n0 = st.count_negative("shifted", 3.0, 0.2, alpha=3.0, lambda_=1e-6, potential="valley-adapted")
    assert n0 == 0, n0
    n = st.count_negative("bosonic", 3.0, 0.2, shift=20.0)
    assert n > 0
    ev = st.lowest_eigenvalues("bosonic", 3.0, 0.2, 3)
    assert len(ev) == 3 and ev[0] < 20.0

    g, tol = st.fiber_ground_energy(0.1)
    assert -0.025 - tol <= g <= 0.0
    assert abs(st.fiber_gap(0.0) - math.sqrt(2)) < 1e-3
    assert st.projector_bound_check(0.05, -0.015, 0.5)
    assert not st.projector_bound_check(0.05, -0.015, 2.0)

    closed, quad = st.log_moment(3.0)
    assert abs(closed - 2 / 27) < 1e-15 and abs(quad - closed) < 1e-8 * closed
    assert st.cartesian_region_bound(2.0, 4.0) > 0.0

    x, y = st.from_parabolic(*st.to_parabolic(1.5, -0.7))
    assert abs(x - 1.5) < 1e-12 and abs(y + 0.7) < 1e-12

    p, _, r2 = st.fit_growth([(x, x**2) for x in (2.0, 4.0, 8.0, 16.0, 32.0)])
    assert abs(p - 2.0) < 1e-12 and abs(r2 - 1.0) < 1e-12

    form, _, q = st.weyl_quotient(8.0, 0.0)
    assert form > 0.0 and abs(q - form) < 1e-8 * form

    for bad in (lambda: st.fiber_gap(-1.0), lambda: st.count_negative("nope", 3.0, 0.2)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("pysusytoy smoke test: ok")


if __name__ == "__main__":
    main()
