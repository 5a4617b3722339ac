"""Smoke test for the dqchain_py extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import dqchain_py as dq
from scipy.special import j1


def main():
    spec = dq.ChainSpec(8, 1.0)
    assert spec.n_sites == 8
    assert abs(spec.mirror_time() - 4.0) < 1e-15

    t = 0.7
    total = sum(abs(dq.amplitude(spec, 1, q, t)) ** 2 for q in range(1, 9))
    assert abs(total - 1.0) < 1e-12, total

    profile = dq.magnetization_profile(spec, 3, t, "dq")
    dev = dq.oracle_deviations(6, 1.0, [0.0, 0.5, 1.5])
    worst = max(dev["profile"], dev["collective"], dev["two_spin"], dev["coefficients"])
    assert worst < 1e-10, dev

    coeffs = dq.evolve_coefficients(spec, "end-polarized", t)
    assert all(len(k) == 3 for k in coeffs)

    x = dq.coherence_spectrum(spec, 1, t, basis="x")
    assert all(v < 1e-12 for order, v in x.items() if order % 2 == 0), x

    d = 8.52e3
    times = [i * 6e-4 / 200 for i in range(201)]
    values = [0.9 * (1.0 if ti == 0 else 2 * j1(4 * d * ti) / (4 * d * ti)) for ti in times]
    fit = dq.fit_signal(times, values, model="end-polarized")
    assert abs(fit["coupling_d"] / d - 1) < 1e-6, fit

    try:
        dq.ChainSpec(0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("profile", [round(v, 6) for v in profile])
    print("fit d =", fit["coupling_d"], "schema", dq.SCHEMA_VERSION)
    print("smoke test ok")


if __name__ == "__main__":
    main()
