import numpy as np
import pytest

from jensenlab import bilayer as bl
from jensenlab.errors import GridError, SizeCapError
from jensenlab.integrands import ENTROPY, SQUARE
from jensenlab.kernels import make_kernel


def small_problem(**kw):
    args = dict(alpha=2.0, h=0.5, length=6.0, dx=1.0 / 64.0, f=ENTROPY)
    args.update(kw)
    return bl.BilayerProblem(**args)


def test_problem_validation():
    with pytest.raises(GridError):
        bl.BilayerProblem(alpha=-1.0, h=0.5)
    with pytest.raises(GridError):
        bl.BilayerProblem(alpha=1.0, h=0.3, dx=0.25)  # h not a multiple of dx
    with pytest.raises(GridError):
        bl.BilayerProblem(alpha=1.0, h=0.5, length=2.0)


def test_attraction_centering():
    # kappa * delta-like bump peaks at the bump location
    p = small_problem()
    v = np.zeros(p.n)
    v[p.n // 3] = 1.0 / p.dx
    a = bl.attraction(v, p)
    assert np.argmax(a) == p.n // 3
    assert a[p.n // 3] == pytest.approx(0.5, rel=1e-2)


def test_project_idempotent_on_feasible_point():
    p = small_problem()
    v = bl.initial_profile(p)
    u = p.grid_function(v)
    again = bl.project_K(u, p)
    assert np.max(np.abs(again.values - v)) <= 1e-9


def test_projection_restores_feasibility():
    p = small_problem()
    rng = np.random.default_rng(3)
    v = rng.normal(size=p.n) * 2.0
    w = bl.project_K(p.grid_function(np.zeros(p.n)), p).values  # sanity
    proj = bl._project_values(v, p, 1e-12, 100000)
    fr = bl.feasibility_residuals(proj, p)
    assert fr["mass"] <= 1e-9
    assert fr["min"] >= -1e-12
    assert fr["pair_max"] <= 1e-9
    assert np.all(np.isfinite(w))


def test_energy_gradient_consistency():
    # directional finite difference of F matches <F'(u), d>
    p = small_problem()
    rng = np.random.default_rng(11)
    v = bl.initial_profile(p)
    d = rng.normal(size=p.n)
    u0 = p.grid_function(v)

    def F(w):
        return bl.energy(p.grid_function(w), p)

    t = 1e-6
    fd = (F(v + t * d) - F(v - t * d)) / (2.0 * t)
    g = float(np.sum(bl.energy_gradient(v, p) * d)) * p.dx
    assert fd == pytest.approx(g, rel=1e-5, abs=1e-9)
    assert bl.energy(u0, p) == pytest.approx(F(v))


def test_minimize_uniform_alpha_zero():
    p = bl.BilayerProblem(alpha=0.0, h=1.0, length=4.0, dx=1.0 / 64.0,
                          f=SQUARE)
    sol = bl.minimize(p)
    assert sol.converged
    assert np.max(np.abs(sol.u.values - 0.25)) <= 1e-8
    assert sol.energy == pytest.approx(0.25, abs=1e-10)


def test_minimize_monotone_history_and_feasible():
    p = small_problem(alpha=4.0)
    sol = bl.minimize(p)
    assert sol.converged
    h = np.array(sol.history)
    assert np.all(np.diff(h) <= 1e-13)
    assert sol.feasibility["mass"] <= 1e-9
    assert sol.feasibility["min"] >= -1e-12
    assert sol.feasibility["pair_max"] <= 1e-9


def test_minimize_matches_brute_force():
    p = bl.BilayerProblem(alpha=3.0, h=1.0, length=4.0, dx=0.25, f=ENTROPY)
    sol = bl.minimize(p)
    ref = bl.brute_force_energy(p)
    assert sol.energy == pytest.approx(ref, abs=1e-8)


def test_brute_force_size_cap():
    with pytest.raises(SizeCapError):
        bl.brute_force_energy(small_problem())


def test_recenter_gauge():
    # an off-center start converges to the same energy as the default start
    p = small_problem(alpha=4.0)
    sol = bl.minimize(p)
    centroid = float(np.sum(p.x * sol.u.values)) * p.dx
    assert centroid == pytest.approx(0.5 * p.length, abs=2.0 * p.dx)


def test_certify_uniform_is_w12_consistent():
    p = bl.BilayerProblem(alpha=0.0, h=1.0, length=4.0, dx=1.0 / 256.0,
                          f=SQUARE)
    sol = bl.minimize(p)
    cert = bl.certify(sol, p, make_kernel("box", 1, 1.0),
                      [0.25 * 2.0 ** (-k) for k in range(4)])
    assert cert.ok
    assert cert.verdict.label == "W12-consistent"
    assert cert.fit.flat


def test_certify_rejects_infeasible_input():
    p = small_problem()
    bad = bl.BilayerSolution(
        u=p.grid_function(np.zeros(p.n)), energy=0.0,
        feasibility=bl.feasibility_residuals(np.zeros(p.n), p),
        history=(0.0,), iterations=0, converged=True)
    with pytest.raises(GridError):
        bl.certify(bad, p, make_kernel("box", 1, 1.0), [0.25, 0.125])


def test_kappa_norms_finite():
    p = small_problem()
    assert p.kappa_norms["l1"] == pytest.approx(1.0, abs=1e-6)
    assert np.isfinite(p.kappa_norms["l1_prime"])
    assert np.isfinite(p.kappa_norms["tv_prime"])
