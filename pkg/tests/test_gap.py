import numpy as np
import pytest

from jensenlab.errors import GridError, NumericsError, SizeCapError
from jensenlab.fields import TestFunctionSpec, dirichlet_energy, sample
from jensenlab.gap import (Thresholds, classify, decay_ladder, fit_loglog,
                           gap, limit_functional, quadratic_gap_forms,
                           quadratic_gap_oracle)
from jensenlab.integrands import ENTROPY, SQUARE
from jensenlab.kernels import make_kernel

BOX_KERNEL = make_kernel("box", 1, 1.0)


def test_step_gap_matches_closed_form():
    u = sample(TestFunctionSpec("step-indicator"), 1, (-4.0, 4.0), 1.0 / 1024.0)
    t = gap(u, SQUARE, BOX_KERNEL, 0.1)
    assert t == pytest.approx(2.0 * 0.1 / 3.0, abs=2e-5)


def test_limit_functional_gaussian_closed_form():
    u = sample(TestFunctionSpec("gaussian"), 1, (-8.0, 8.0), 1.0 / 2048.0)
    lim = limit_functional(u, SQUARE, BOX_KERNEL)
    # (1/2) a(box) int 2 |u'|^2 = (1/3) sqrt(pi/2)
    assert lim == pytest.approx(np.sqrt(np.pi / 2.0) / 3.0, rel=1e-4)
    assert lim == pytest.approx(dirichlet_energy(u) / 3.0, rel=1e-10)


def test_quadratic_identity_holds():
    u = sample(TestFunctionSpec("tent"), 1, (-4.0, 4.0), 1.0 / 256.0)
    ds, ip = quadratic_gap_forms(u, BOX_KERNEL, 0.1)
    assert abs(ds - ip) <= 1e-13
    assert quadratic_gap_oracle(u, BOX_KERNEL, 0.1) == pytest.approx(ds)


def test_oracle_matches_square_gap():
    # int u^2 - int (u * gamma) u == int u^2 - int (u * phi)^2 by
    # self-adjointness of the even kernel, which is the square-integrand gap
    u = sample(TestFunctionSpec("tent"), 1, (-4.0, 4.0), 1.0 / 256.0)
    t = gap(u, SQUARE, BOX_KERNEL, 0.1)
    assert quadratic_gap_oracle(u, BOX_KERNEL, 0.1) == pytest.approx(t, abs=1e-12)


def test_oracle_size_cap():
    u = sample(TestFunctionSpec("tent"), 1, (-4.0, 4.0), 1.0 / 1024.0)
    with pytest.raises(SizeCapError):
        quadratic_gap_oracle(u, BOX_KERNEL, 0.1)


def test_fit_loglog_recovers_exact_power_law():
    eps = [0.2 * 2.0 ** (-k) for k in range(5)]
    fit = fit_loglog([(e, 3.5 * e ** 2.0) for e in eps])
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.prefactor == pytest.approx(3.5, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.limit_estimate == pytest.approx(3.5, rel=1e-12)


def test_fit_loglog_drops_transient_rung():
    eps = [0.2 * 2.0 ** (-k) for k in range(5)]
    pairs = [(e, 1.7 * e ** 2.0) for e in eps]
    pairs[0] = (pairs[0][0], pairs[0][1] * 3.0)  # pre-asymptotic outlier
    fit = fit_loglog(pairs)
    assert fit.dropped == (pairs[0],)
    assert fit.exponent == pytest.approx(2.0, abs=1e-10)


def test_fit_loglog_flat_ladder():
    eps = [0.2 * 2.0 ** (-k) for k in range(4)]
    fit = fit_loglog([(e, 1e-17) for e in eps], flat_scale=1.0)
    assert fit.flat
    assert fit.limit_estimate == 0.0


def test_fit_loglog_rejects_bad_ladders():
    with pytest.raises(GridError):
        fit_loglog([(0.1, 1.0), (0.2, 1.0)])
    with pytest.raises(NumericsError):
        fit_loglog([(0.2, 1.0), (0.1, np.nan)])


def test_decay_ladder_requires_geometric_rungs():
    u = sample(TestFunctionSpec("tent"), 1, (-4.0, 4.0), 1.0 / 512.0)
    with pytest.raises(GridError):
        decay_ladder(u, SQUARE, BOX_KERNEL, [0.2, 0.1, 0.07, 0.05])
    with pytest.raises(GridError):
        decay_ladder(u, SQUARE, BOX_KERNEL, [0.2, 0.1, 0.05])


def test_classify_branches():
    base = dict(ladder=((0.2, 1.0), (0.1, 0.25)), prefactor=1.0,
                limit_estimate=1.0, kernel_radial_moment=1.0 / 3.0)
    from jensenlab.gap import DecayFit
    w12 = classify(DecayFit(exponent=1.98, r_squared=0.999, **base), SQUARE)
    assert w12.label == "W12-consistent"
    # dirichlet bound: 2 L / (c1 a) = 2 / (2/3) = 3
    assert w12.dirichlet_bound == pytest.approx(3.0)
    sub = classify(DecayFit(exponent=1.02, r_squared=0.999, **base), SQUARE)
    assert sub.label == "sub-W12"
    noisy = classify(DecayFit(exponent=1.98, r_squared=0.8, **base), SQUARE)
    assert noisy.label == "inconclusive"
    mid = classify(DecayFit(exponent=1.85, r_squared=0.999, **base), SQUARE)
    assert mid.label == "inconclusive"
    flat = classify(DecayFit(exponent=None, r_squared=None, flat=True,
                             ladder=(), prefactor=None, limit_estimate=0.0,
                             kernel_radial_moment=1.0 / 3.0), SQUARE)
    assert flat.label == "W12-consistent"


def test_classify_threshold_overrides():
    from jensenlab.gap import DecayFit
    fit = DecayFit(ladder=((0.2, 1.0), (0.1, 0.25)), exponent=1.85,
                   r_squared=0.999, prefactor=1.0, limit_estimate=None,
                   kernel_radial_moment=1.0 / 3.0)
    assert classify(fit, SQUARE).label == "inconclusive"
    loose = Thresholds(exp_w12=1.8, exp_sub=1.5, r2_min=0.99)
    assert classify(fit, SQUARE, loose).label == "W12-consistent"


def test_gap_entropy_nonnegative_on_step():
    u = sample(TestFunctionSpec("step-indicator"), 1, (-4.0, 4.0), 1.0 / 512.0)
    for eps in (0.2, 0.05):
        assert gap(u, ENTROPY, BOX_KERNEL, eps) >= 0.0
