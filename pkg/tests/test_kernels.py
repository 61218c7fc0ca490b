import numpy as np
import pytest

from jensenlab.errors import KernelError
from jensenlab.kernels import (OMEGA, Kernel, make_kernel, scale,
                               self_convolve, validate)

RADIAL_1D = ("box", "tent", "epanechnikov", "truncated-gaussian")
RADIAL_2D = ("box", "epanechnikov", "truncated-gaussian")


@pytest.mark.parametrize("shape", RADIAL_1D)
def test_catalog_1d_validates(shape):
    rep = validate(make_kernel(shape, 1, 1.0))
    assert rep.ok
    assert rep.residuals["unit_mass"] <= 1e-10
    assert rep.residuals["zero_first_moment"] <= 1e-12


@pytest.mark.parametrize("shape", RADIAL_2D)
def test_catalog_2d_validates(shape):
    rep = validate(make_kernel(shape, 2, 1.0))
    assert rep.ok
    assert rep.residuals["unit_mass"] <= 1e-8


def test_unknown_shape_and_bad_args():
    with pytest.raises(KernelError):
        make_kernel("sombrero", 1, 1.0)
    with pytest.raises(KernelError):
        make_kernel("box", 3, 1.0)
    with pytest.raises(KernelError):
        make_kernel("box", 1, -2.0)
    with pytest.raises(KernelError):
        make_kernel("tent", 2, 1.0)
    with pytest.raises(KernelError):
        make_kernel("exponential-attraction", 2, 1.0)


def test_exponential_attraction_is_not_a_mollifier():
    k = make_kernel("exponential-attraction", 1, 28.0)
    assert not k.is_mollifier
    rep = validate(k)
    # truncated tail mass e^{-28} is far below the default tolerance
    assert rep.residuals["unit_mass"] <= 1e-10
    assert abs(rep.radial_moment - 2.0) <= 1e-8


def test_box_radial_moment_closed_form():
    rep = validate(make_kernel("box", 1, 1.0))
    assert abs(rep.radial_moment - 1.0 / 3.0) <= 1e-10


def test_tent_radial_moment_closed_form():
    # a = 2 int r^2 (1-r) dr = 1/6
    rep = validate(make_kernel("tent", 1, 1.0))
    assert abs(rep.radial_moment - 1.0 / 6.0) <= 1e-10


def test_box_2d_radial_moment_closed_form():
    # a = pi int r^3 / (pi R^2) dr = R^2/4
    rep = validate(make_kernel("box", 2, 1.0))
    assert abs(rep.radial_moment - 0.25) <= 1e-8


@pytest.mark.parametrize("shape", RADIAL_1D)
@pytest.mark.parametrize("dim", (1, 2))
def test_moment_identity_radial(shape, dim):
    if dim == 2 and shape == "tent":
        pytest.skip("tent kernel is 1-D only")
    rep = validate(make_kernel(shape, dim, 1.0))
    A = np.atleast_2d(rep.second_moment_matrix)
    assert np.max(np.abs(A - rep.radial_moment * np.eye(dim))) <= 1e-8


@pytest.mark.parametrize("eps", (0.5, 2.0, 0.037))
def test_scale_dirac_family(eps):
    k = make_kernel("epanechnikov", 1, 1.0)
    ke = scale(k, eps)
    assert ke.support_radius == pytest.approx(eps)
    rep = validate(ke)
    assert rep.residuals["unit_mass"] <= 1e-10
    # second moment scales as eps^2
    base = validate(k).radial_moment
    assert rep.radial_moment == pytest.approx(eps * eps * base, rel=1e-10)


def test_scale_composes():
    k = make_kernel("tent", 1, 1.0)
    a = scale(scale(k, 0.5), 0.25)
    b = scale(k, 0.125)
    r = np.linspace(0.0, 0.2, 101)
    assert np.allclose(a.radial_profile(r), b.radial_profile(r),
                       rtol=1e-13, atol=0.0)


@pytest.mark.parametrize("shape,dim", [("box", 1), ("tent", 1),
                                       ("box", 2), ("epanechnikov", 2)])
def test_self_convolve_moment_addition(shape, dim):
    k = make_kernel(shape, dim, 1.0)
    g = self_convolve(k)
    assert g.parent is k
    assert g.support_radius == pytest.approx(2.0)
    rep_k = validate(k)
    rep_g = validate(g)
    # 1-D tables are exact discrete convolutions; 2-D tables are midpoint
    # tabulations whose accuracy is limited by the profile's boundary jump
    assert rep_g.residuals["unit_mass"] <= (1e-12 if dim == 1 else 2e-4)
    A_k = np.atleast_2d(rep_k.second_moment_matrix)
    A_g = np.atleast_2d(rep_g.second_moment_matrix)
    # second moments add under convolution: A(gamma) = 2 A(phi)
    assert np.max(np.abs(A_g - 2.0 * A_k)) <= (1e-6 if dim == 1 else 1e-3)


def test_self_convolve_box_closed_form():
    # box * box is the tent on [-2R, 2R]
    g = self_convolve(make_kernel("box", 1, 1.0))
    r = np.array([0.0, 0.5, 1.0, 1.5, 1.999])
    expect = 0.5 * np.maximum(0.0, 1.0 - r / 2.0)
    assert np.allclose(g.radial_profile(r), expect, atol=1e-6)


def test_self_convolve_rejects_non_mollifier():
    with pytest.raises(KernelError):
        self_convolve(make_kernel("exponential-attraction", 1, 28.0))


def test_moment_report_text_is_flat_key_value():
    text = validate(make_kernel("box", 1, 1.0)).as_text()
    for line in text.strip().splitlines():
        assert " = " in line
    assert "a = 0.33333333333333331" in text
