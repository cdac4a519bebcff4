import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from oracles import bessel_k_quad, complex_form_kernels
from rgflow.errors import BoundaryDivergenceError, DomainError
from rgflow.kernels import (
    Z_MIN,
    KernelPoint,
    b2_kernel,
    b4_kernel,
    b_kernel,
    b_kernel_complement,
    c2_kernel,
    c4_kernel,
    c_kernel,
    evaluate,
    kernel_triple,
    one_plus_kernel,
)

GRID = np.linspace(0.01, 5.0, 20)
SQRT2 = math.sqrt(2.0)


# -- limits and golden values --------------------------------------------------


def test_full_kernels_at_boundary():
    for m in (0.3, 1.0, 4.0):
        assert b_kernel(0.0, m) == 1.0
        assert b2_kernel(0.0, m) == 0.0
        assert b4_kernel(0.0, m) == 0.0


@pytest.mark.parametrize("m", [0.1, 1.0, 7.0])
def test_b_kernel_small_distance(m):
    assert b_kernel(1e-8, m) == pytest.approx(1.0, rel=1e-14)


def test_full_kernels_at_unit_point():
    assert b_kernel(1.0, 1.0) == pytest.approx(SQRT2 * special.jv(1, SQRT2), rel=1e-14)
    assert b2_kernel(1.0, 1.0) == pytest.approx(special.jv(2, SQRT2), rel=1e-14)


def test_b_kernel_large_argument_bound():
    z, m = 40.0, 1.0
    assert abs(b_kernel(z, m)) < 1e-1
    # oscillates: sign changes along z
    signs = {math.copysign(1.0, b_kernel(zz, m)) for zz in np.linspace(30.0, 40.0, 50)}
    assert signs == {1.0, -1.0}


def test_c_kernel_values():
    assert c_kernel(5.0, 1.0) == pytest.approx(2 * bessel_k_quad(1, 10.0) / 5, rel=1e-10)
    assert c2_kernel(1.0, 1.0) == pytest.approx(2 * bessel_k_quad(2, 2.0), rel=1e-10)
    assert c4_kernel(1.0, 1.0) == pytest.approx(-6 * bessel_k_quad(3, 2.0), rel=1e-10)


def test_c_kernel_near_boundary():
    for z in (1e-4, 1e-6, 1e-8):
        assert c_kernel(z, 1.0) * z * z == pytest.approx(1.0, rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(z=st.floats(1e-6, 20.0), m=st.floats(0.05, 10.0))
def test_c_kernel_monotone_and_signs(z, m):
    assert c_kernel(2 * z, m) < c_kernel(z, m)
    assert c_kernel(z, m) > 0
    assert c2_kernel(z, m) > 0
    assert c4_kernel(z, m) < 0


@pytest.mark.parametrize("fn", [c_kernel, c2_kernel, c4_kernel])
def test_minimal_kernels_guard_the_boundary(fn):
    with pytest.raises(BoundaryDivergenceError):
        fn(0.0, 1.0)
    with pytest.raises(BoundaryDivergenceError):
        fn(Z_MIN, 1.0)
    assert math.isfinite(fn(2 * Z_MIN, 1.0))


@pytest.mark.parametrize("z, m", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.inf, 1.0)])
def test_invalid_points(z, m):
    with pytest.raises(DomainError):
        KernelPoint(z, m)
    with pytest.raises(DomainError):
        b_kernel(z, m)


# -- complex imaginary-argument forms ------------------------------------------


def test_real_forms_match_complex_series_on_grid():
    worst = 0.0
    for z in GRID:
        for m in GRID:
            ref = complex_form_kernels(z, m)
            for name, fn in (("b", b_kernel), ("b2", b2_kernel), ("b4", b4_kernel)):
                r = ref[name]
                assert abs(r.imag) <= 1e-12 * max(abs(r.real), 1e-300)
                worst = max(worst, abs(fn(z, m) - r.real) / abs(r.real))
    assert worst < 1e-10


# -- derivative structure -----------------------------------------------------


def _d_dm2(fn, z, m, h=1e-4):
    # five-point derivative in M^2
    m2 = m * m
    vals = [fn(z, math.sqrt(m2 + j * h)) for j in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


@pytest.mark.parametrize("z", [0.1, 0.7, 2.0, 6.0])
@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_full_kernel_chain(z, m):
    assert b2_kernel(z, m) == pytest.approx(-_d_dm2(b_kernel, z, m), rel=1e-7, abs=1e-11)
    assert b4_kernel(z, m) == pytest.approx(3 * _d_dm2(b2_kernel, z, m), rel=1e-7, abs=1e-11)


@pytest.mark.parametrize("z", [0.1, 0.7, 2.0])
@pytest.mark.parametrize("m", [0.5, 1.0, 2.5])
def test_minimal_kernel_chain(z, m):
    assert c2_kernel(z, m) == pytest.approx(-_d_dm2(c_kernel, z, m), rel=1e-7)
    assert c4_kernel(z, m) == pytest.approx(3 * _d_dm2(c2_kernel, z, m), rel=1e-7)


# -- decay ---------------------------------------------------------------------


DECAY_POINTS = [(x / m, m) for x in (10.0, 12.5, 20.0, 33.0) for m in (0.5, 1.0, 2.0)]


@pytest.mark.parametrize("z, m", DECAY_POINTS)
def test_minimal_kernels_below_exponential_envelope(z, m):
    env = math.exp(-z * m)
    assert c_kernel(z, m) < env
    assert c2_kernel(z, m) < env
    assert abs(c4_kernel(z, m)) * m**3 / z < env


def test_full_kernels_below_stated_envelope():
    """Literal J envelope 0.26 (zM)^(-1/2) for |B|, |B2| M^2, |B4| M^3."""
    worst = {}
    for z, m in DECAY_POINTS:
        env = 0.26 * (z * m) ** -0.5
        for name, value in (("b", abs(b_kernel(z, m))), ("b2", abs(b2_kernel(z, m)) * m**2), ("b4", abs(b4_kernel(z, m)) * m**3)):
            worst[name] = max(worst.get(name, 0.0), value / env)
    assert max(worst.values()) < 1.0, f"worst value/envelope ratios: {worst}"


@settings(max_examples=300, deadline=None)
@given(z=st.floats(1.0, 200.0), m=st.floats(0.1, 10.0))
def test_full_kernels_below_bessel_amplitude(z, m):
    # |J_n(y)| <= 0.82 y^(-1/2) for y >= 10 and n <= 3, with y = sqrt(2) M z
    y = SQRT2 * m * z
    if y < 10.0:
        return
    amp = 0.82 / math.sqrt(y)
    assert abs(b_kernel(z, m)) <= 2 * amp / y
    assert abs(b2_kernel(z, m)) * m**2 <= amp
    assert abs(b4_kernel(z, m)) * m**3 <= 3 * z / SQRT2 * amp


def test_bessel_amplitude_constant():
    ys = np.linspace(10.0, 400.0, 40001)
    for n in range(4):
        assert float(np.max(np.abs(special.jv(n, ys)) * np.sqrt(ys))) < 0.82


# -- helpers ---------------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(z=st.floats(0.0, 30.0), m=st.floats(0.01, 5.0))
def test_complement_is_one_minus_b(z, m):
    assert b_kernel_complement(z, m) == pytest.approx(1.0 - b_kernel(z, m), rel=1e-12, abs=1e-15)


def test_complement_keeps_precision_near_boundary():
    z, m = 1e-5, 1.0
    q = 0.5 * (z * m) ** 2
    exact = q / 2 - q * q / 12
    assert b_kernel_complement(z, m) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("minimal", [False, True])
@pytest.mark.parametrize("sign", [-1.0, 1.0])
def test_one_plus_kernel(sign, minimal):
    z, m = 0.8, 1.3
    k0 = kernel_triple(z, m, minimal)[0]
    assert one_plus_kernel(z, m, sign, minimal) == pytest.approx(1 + sign * k0, rel=1e-14)


def test_evaluate_defaults():
    out = evaluate(KernelPoint(0.5, 1.0))
    assert set(out) == {"b", "b2", "b4", "c", "c2", "c4"}
    assert set(evaluate(KernelPoint(0.0, 1.0))) == {"b", "b2", "b4"}
    with pytest.raises(DomainError):
        evaluate(KernelPoint(0.5, 1.0), ["d"])
