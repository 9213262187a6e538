"""Smoke test for the pygenfpp extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import math

import pygenfpp as g


def main():
    # nu = delta = 1 is the exponential law
    p = g.GenIParams(1.0, 1.0, 2.0)
    assert abs(p.pdf(0.5) - 2.0 * math.exp(-1.0)) < 1e-12
    assert abs(p.cdf(0.5) - (1.0 - math.exp(-1.0))) < 1e-12
    assert abs(g.mittag_leffler(1.0, 1.0, 1.0, -3.0) - math.exp(-3.0)) < 1e-14

    q = g.GenIParams(0.5, 1.0, 1.0)
    pmf = g.state_pmf(q, 1.0, kmax=5)
    for k, pk in enumerate(pmf):
        assert abs(pk - g.fpp_state_pmf(0.5, 1.0, 1.0, k)) < 1e-12
    assert abs(g.mean_count(q, 1.0) - 1.0 / math.gamma(1.5)) < 1e-9

    rng = g.RngStream(42)
    truth = g.GenIParams(0.5, 0.5, 0.5)
    xs = truth.sample(20000, rng)
    nu, delta, lam, clamped, _ = g.estimate_gen1(xs)
    assert abs(nu - 0.5) < 0.05 and not clamped, (nu, delta, lam)

    r = g.GenIIParams(0.8, -0.5, 1.0)
    ys = r.sample(20000, g.RngStream(7))
    nu2, gam, lam2, _, _ = g.estimate_gen2(ys)
    assert gam < 0 and abs(nu2 - 0.8) < 0.1, (nu2, gam, lam2)

    times = g.simulate_path(r, g.RngStream(1), events=100)
    assert len(times) == 100 and all(b > a for a, b in zip(times, times[1:]))

    try:
        g.GenIParams(1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("nu > 1 accepted")

    csv = g.run_study(
        "model = gen2\nnu = 0.9\ngamma = 0.5\nlambda = 0.5\n"
        "sample_sizes = 200\nreplications = 20\nseed = 3\n",
        threads=2,
    )
    assert csv.splitlines()[0] == "model,nu,delta_or_gamma,lambda,m,param,bias,rmse,failures"
    assert len(csv.splitlines()) == 4
    print("pygenfpp smoke test passed")


if __name__ == "__main__":
    main()
