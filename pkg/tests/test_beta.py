import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_beta_ads, fd_beta_bulk, fd_beta_half_minkowski
from rgflow.beta import (
    LOOP,
    CouplingClass,
    beta,
    beta_ads,
    beta_bulk,
    beta_half_minkowski,
    beta_half_minkowski_dimensionful,
    classify_coupling,
    nondimensionalize,
    potential_flow_ads,
    potential_flow_bulk,
    potential_flow_half_minkowski,
    redimensionalize,
    scaling_dimension,
)
from rgflow.errors import BFBoundError, BoundaryDivergenceError, DomainError, GammaPoleError, SingularNuError
from rgflow.kernels import kernel_triple
from rgflow.models import CouplingState, Geometry, ModelSpec
from rgflow.specialfn import EULER_GAMMA, digamma, polygamma1

M2_GRID = (-0.5, 0.0, 1.0, 3.0)
LAMBDA_GRID = (0.0, 0.5, 2.0)
Z_GRID = (0.05, 0.5, 1.0, 5.0)
FAMILIES = list(itertools.product(("dirichlet", "neumann"), ("full", "minimal")))


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-12)


# -- bulk ----------------------------------------------------------------------


def test_bulk_values():
    assert beta_bulk(CouplingState(0.0, 0.0)).as_tuple() == (0.0, 0.0)
    b = beta_bulk(CouplingState(0.0, 1.0))
    assert b.dm2 == pytest.approx(1 / (16 * math.pi**2), rel=1e-15)
    assert b.dm2 == pytest.approx(0.0063326, rel=1e-5)
    assert b.dlambda == pytest.approx(3 / (16 * math.pi**2), rel=1e-15)
    assert b.dlambda == pytest.approx(0.0189978, rel=1e-5)


@given(m2=st.floats(0.0, 100.0, exclude_min=True))
def test_bulk_free_theory_scales_canonically(m2):
    assert beta_bulk(CouplingState(m2, 0.0)).as_tuple() == (-2 * m2, 0.0)


def test_bulk_domain():
    with pytest.raises(DomainError):
        beta_bulk(CouplingState(-1.0, 0.5))


# -- finite-difference oracle ------------------------------------------------------


@pytest.mark.parametrize("bc, scheme", FAMILIES)
def test_half_minkowski_matches_potential_oracle(bc, scheme):
    worst = 0.0
    for m2, lam, z in itertools.product(M2_GRID, LAMBDA_GRID, Z_GRID):
        s = CouplingState(m2, lam)
        exact = beta_half_minkowski(s, ModelSpec.half_minkowski(bc, scheme, z))
        fd = fd_beta_half_minkowski(s, bc, scheme, z)
        worst = max(worst, rel_err(fd[0], exact.dm2), rel_err(fd[1], exact.dlambda))
    assert worst < 1e-6


def test_bulk_matches_potential_oracle():
    for m2, lam in itertools.product(M2_GRID, LAMBDA_GRID):
        s = CouplingState(m2, lam)
        fd = fd_beta_bulk(s)
        exact = beta_bulk(s)
        assert rel_err(fd[0], exact.dm2) < 1e-6
        assert rel_err(fd[1], exact.dlambda) < 1e-6


@pytest.mark.parametrize("xi", [1 / 6, 2 / 15, 0.1, 0.2])
def test_ads_matches_potential_oracle(xi):
    shift = 12 * (xi - 1 / 6)
    for m2, lam in itertools.product((0.1, 0.5, 1.0, 3.0), LAMBDA_GRID):
        s = CouplingState(m2 + shift, lam)
        exact = beta_ads(s, ModelSpec.ads(xi))
        fd = fd_beta_ads(s, xi=xi)
        assert rel_err(fd[0], exact.dm2) < 1e-5
        assert rel_err(fd[1], exact.dlambda) < 1e-5


@pytest.mark.parametrize("kl", [0.3, 0.7, 1.5])
def test_ads_exact_nu_matches_oracle_with_k2(kl):
    l = 0.7
    k = kl / l
    for m2, lam in itertools.product((0.1, 1.0), (0.5, 2.0)):
        s = CouplingState(m2, lam)
        exact = beta_ads(s, ModelSpec.ads(large_deflation=False, kl=kl))
        fd = fd_beta_ads(s, k=k, l=l, include_k2=True)
        assert rel_err(fd[0], exact.dm2) < 1e-5
        assert rel_err(fd[1], exact.dlambda) < 1e-5


def test_ads_dm2_equals_display_with_lower_digamma():
    # the form carrying psi(nu - 1/2) is only defined for nu > 1/2
    for m2 in (0.05, 0.3, 1.0, 4.0):
        nu = 0.5 * math.sqrt(1 + 4 * m2)
        a, b, c = digamma(nu + 0.5), digamma(nu + 1.5), digamma(nu - 0.5)
        g = -1 + 2 * EULER_GAMMA
        inner = (g + a) * b + b * b - c * (g + a + b) + polygamma1(nu + 0.5) + polygamma1(nu + 1.5)
        lam = 0.8
        expected = lam / (4 * nu) * (1 - (nu * nu - 0.25) * inner)
        assert beta_ads(CouplingState(m2, lam), ModelSpec.ads()).dm2 == pytest.approx(expected, rel=1e-12)


def test_dimensionful_system_at_mu_equal_k_matches_dimensionless():
    k = 2.0
    for (bc, scheme), m2, lam, z in itertools.product(FAMILIES, (-0.5, 1.0), (0.5,), (0.5, 2.0)):
        s = CouplingState(m2, lam)
        m2d, lamd = redimensionalize(s, k, Geometry.HALF_MINKOWSKI)
        dm2_d, dlam_d = beta_half_minkowski_dimensionful(m2d, lamd, k, z / k, k, bc, scheme)
        b = beta_half_minkowski(s, ModelSpec.half_minkowski(bc, scheme, z))
        # k d(m2/k^2)/dk = k dm2/dk / k^2 - 2 m2_tilde
        assert k * dm2_d / k**2 - 2 * m2 == pytest.approx(b.dm2, rel=1e-12, abs=1e-15)
        assert k * dlam_d == pytest.approx(b.dlambda, rel=1e-12, abs=1e-15)


# -- structural identities ---------------------------------------------------------


@pytest.mark.parametrize("scheme", ["full", "minimal"])
def test_dirichlet_neumann_average_is_bulk(scheme):
    for m2, lam, z in itertools.product(M2_GRID, LAMBDA_GRID, Z_GRID):
        s = CouplingState(m2, lam)
        d = beta_half_minkowski(s, ModelSpec.half_minkowski("dirichlet", scheme, z))
        n = beta_half_minkowski(s, ModelSpec.half_minkowski("neumann", scheme, z))
        b = beta_bulk(s)
        assert abs(d.dm2 + n.dm2 - 2 * b.dm2) < 1e-12
        assert abs(d.dlambda + n.dlambda - 2 * b.dlambda) < 1e-12


@settings(max_examples=200, deadline=None)
@given(
    m2=st.floats(-0.99, 20.0),
    lam=st.floats(-5.0, 5.0),
    z=st.floats(1e-3, 50.0),
    scheme=st.sampled_from(["full", "minimal"]),
)
def test_average_identity_property(m2, lam, z, scheme):
    s = CouplingState(m2, lam)
    d = beta_half_minkowski(s, ModelSpec.half_minkowski("dirichlet", scheme, z))
    n = beta_half_minkowski(s, ModelSpec.half_minkowski("neumann", scheme, z))
    b = beta_bulk(s)
    scale = max(1.0, abs(d.dm2), abs(n.dm2), abs(d.dlambda), abs(n.dlambda))
    assert abs(d.dm2 + n.dm2 - 2 * b.dm2) <= 1e-12 * scale
    assert abs(d.dlambda + n.dlambda - 2 * b.dlambda) <= 1e-12 * scale


def test_dirichlet_full_at_boundary_is_pure_scaling():
    for m2, lam in itertools.product(M2_GRID, LAMBDA_GRID):
        b = beta_half_minkowski(CouplingState(m2, lam), ModelSpec.half_minkowski("dirichlet", "full", 0.0))
        assert b.dm2 == -2 * m2
        assert b.dlambda == 0.0


@pytest.mark.parametrize("bc, scheme", FAMILIES)
@pytest.mark.parametrize("x", [10.0, 20.0])
def test_bulk_recovery_far_from_boundary(bc, scheme, x):
    # difference bounded by |kernel| magnitudes times their coefficients,
    # with the sharp amplitude bounds for J (0.82 y^-1/2) and K (exp(-x))
    for m2, lam in itertools.product(M2_GRID, (0.5, 2.0)):
        u = 1 + m2
        mm = math.sqrt(u)
        z = x / mm
        s = CouplingState(m2, lam)
        diff = beta_half_minkowski(s, ModelSpec.half_minkowski(bc, scheme, z))
        bulk = beta_bulk(s)
        L = math.log(u)
        if scheme == "full":
            y = math.sqrt(2) * x
            amp = 0.82 / math.sqrt(y)
            e0, e2, e4 = 2 * amp / y, amp / u, 3 * z / math.sqrt(2) * amp / mm**3
        else:
            env = math.exp(-x)
            e0, e2, e4 = env, env, z * env / mm**3
        bound_m = lam * LOOP * (abs(L + 1) * e0 + u * abs(L) * e2)
        bound_l = lam * lam * LOOP * (3 * e0 / u + 6 * abs(L + 1) * e2 + u * abs(L) * e4)
        assert abs(diff.dm2 - bulk.dm2) <= bound_m + 1e-15
        assert abs(diff.dlambda - bulk.dlambda) <= bound_l + 1e-15


@settings(max_examples=200, deadline=None)
@given(m2=st.floats(-0.99, 50.0), z=st.floats(0.0, 50.0), bc=st.sampled_from(["dirichlet", "neumann"]))
def test_lambda_zero_slice_minkowski(m2, z, bc):
    for scheme in ("full", "minimal"):
        if scheme == "minimal" and z <= 1e-9:
            continue
        b = beta_half_minkowski(CouplingState(m2, 0.0), ModelSpec.half_minkowski(bc, scheme, z))
        assert b.as_tuple() == (-2 * m2, 0.0)


@settings(max_examples=200, deadline=None)
@given(m2=st.floats(-0.2499, 100.0), xi=st.sampled_from([1 / 6, 2 / 15, 0.0, 0.1]))
def test_lambda_zero_slice_ads(m2, xi):
    s = CouplingState(m2 + 12 * (xi - 1 / 6), 0.0)
    assert beta_ads(s, ModelSpec.ads(xi)).as_tuple() == (0.0, 0.0)


def test_dirichlet_full_massless_beta_lambda_nonnegative():
    for z in [0.0] + [0.05 * j for j in range(1, 1001)]:
        b = beta_half_minkowski(CouplingState(0.0, 1.0), ModelSpec.half_minkowski("dirichlet", "full", z))
        assert b.dlambda >= 0.0


# -- AdS specifics ---------------------------------------------------------------


def test_ads_continuous_across_nu_half():
    spec = ModelSpec.ads()
    # nu = 1/2 at m2 = 0; the values straddling it differ only by slope * 2e-9
    below = beta_ads(CouplingState(-1e-9, 0.5), spec)
    above = beta_ads(CouplingState(1e-9, 0.5), spec)
    assert below.dm2 == pytest.approx(above.dm2, abs=1e-6)
    assert below.dlambda == pytest.approx(above.dlambda, abs=1e-6)


def test_ads_errors():
    with pytest.raises(BFBoundError):
        beta_ads(CouplingState(-0.3, 0.5), ModelSpec.ads())
    with pytest.raises(SingularNuError):
        beta_ads(CouplingState(0.0, 0.5), ModelSpec.ads(3 / 16))
    with pytest.raises(GammaPoleError):
        potential_flow_ads(0.0, 0.0, 1.0, 1.0, 1 / 6, 1.0, include_k2=False)
    with pytest.raises(BFBoundError):
        potential_flow_ads(0.0, -1.0, 1.0, 1.0, 1 / 6, 1.0, include_k2=False)


def test_ads_exact_nu_reduces_to_large_deflation_at_kl_zero():
    s = CouplingState(0.4, 0.7)
    assert beta_ads(s, ModelSpec.ads(large_deflation=False, kl=0.0)) == beta_ads(s, ModelSpec.ads())


def test_dispatch():
    s = CouplingState(0.3, 0.2)
    assert beta(s, ModelSpec.bulk()) == beta_bulk(s)
    assert beta(s, ModelSpec.ads()) == beta_ads(s, ModelSpec.ads())
    spec = ModelSpec.half_minkowski("neumann", "full", 1.0)
    assert beta(s, spec) == beta_half_minkowski(s, spec)
    with pytest.raises(DomainError):
        beta_half_minkowski(s, ModelSpec.bulk())
    with pytest.raises(DomainError):
        beta_ads(s, ModelSpec.bulk())


def test_minimal_kernel_guard_propagates():
    spec = ModelSpec.half_minkowski("dirichlet", "minimal", 1e-11)
    with pytest.raises(BoundaryDivergenceError):
        beta_half_minkowski(CouplingState(0.0, 1.0), spec)


# -- potential flows -------------------------------------------------------------


@given(lam=st.floats(-10.0, 10.0))
def test_potential_at_origin_independent_of_lambda(lam):
    ref = potential_flow_half_minkowski(0.0, 0.3, 0.0, 1.2, 0.4, "full", "dirichlet", 1.0)
    assert potential_flow_half_minkowski(0.0, 0.3, lam, 1.2, 0.4, "full", "dirichlet", 1.0) == ref


def test_potential_vanishes_far_away_at_mu_equal_m():
    m2, k = 0.5, 1.0
    mu = math.sqrt(m2 + k * k)
    assert potential_flow_half_minkowski(0.0, m2, 1.0, k, 1e3, "full", "dirichlet", mu) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("scheme", ["full", "minimal"])
def test_potential_dirichlet_plus_neumann_is_twice_bulk(scheme):
    for phi in (0.0, 0.3, 1.1):
        d = potential_flow_half_minkowski(phi, 0.2, 0.7, 1.3, 0.6, scheme, "dirichlet", 0.9)
        n = potential_flow_half_minkowski(phi, 0.2, 0.7, 1.3, 0.6, scheme, "neumann", 0.9)
        assert d + n == pytest.approx(2 * potential_flow_bulk(phi, 0.2, 0.7, 1.3, 0.9), rel=1e-13)


def test_ads_potential_log_drops_at_natural_scale():
    l = 0.8
    a = potential_flow_ads(0.2, 1.0, 0.5, 1.0, 1 / 6, l)
    b = potential_flow_ads(0.2, 1.0, 0.5, 1.0, 1 / 6, l, mu=0.5 / l)
    c = potential_flow_ads(0.2, 1.0, 0.5, 1.0, 1 / 6, l, mu=1.0 / l)
    assert a == b
    assert a != c


def test_ads_potential_phi_independent_at_zero_coupling():
    vals = {potential_flow_ads(phi, 1.0, 0.0, 1.0, 1 / 6, 0.7) for phi in (0.0, 0.5, 3.0)}
    assert len(vals) == 1


def test_potential_domain():
    with pytest.raises(DomainError):
        potential_flow_bulk(0.0, -2.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        potential_flow_half_minkowski(0.0, -2.0, 1.0, 1.0, 1.0, "full", "dirichlet", 1.0)


# -- rescaling and dimension counting ----------------------------------------------


def test_nondimensionalize_examples():
    assert nondimensionalize(4.0, 0.3, 2.0, Geometry.HALF_MINKOWSKI).m2_tilde == 1.0
    assert nondimensionalize(0.0, 1.0, 1.0, Geometry.POINCARE_ADS, l=1.0).lambda_tilde == 1.0


@given(
    m2=st.floats(-1e3, 1e3),
    lam=st.floats(-1e3, 1e3),
    k=st.floats(1e-3, 1e3),
    l=st.floats(1e-2, 1e2),
    geometry=st.sampled_from(list(Geometry)),
)
def test_rescaling_round_trip(m2, lam, k, l, geometry):
    s = nondimensionalize(m2, lam, k, geometry, l)
    back = redimensionalize(s, k, geometry, l)
    assert back[0] == pytest.approx(m2, rel=1e-14, abs=1e-300)
    assert back[1] == pytest.approx(lam, rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("args", [(1.0, 1.0, 0.0, Geometry.BULK_MINKOWSKI), (1.0, 1.0, 1.0, Geometry.POINCARE_ADS)])
def test_rescaling_errors(args):
    with pytest.raises(DomainError):
        nondimensionalize(*args)


@pytest.mark.parametrize(
    "n, d, expected",
    [(1, 3, CouplingClass.RELEVANT), (2, 3, CouplingClass.MARGINAL), (3, 3, CouplingClass.IRRELEVANT), (2, 1, CouplingClass.RELEVANT)],
)
def test_classify_coupling(n, d, expected):
    assert classify_coupling(n, d) is expected


def test_scaling_dimension_formula():
    assert scaling_dimension(3, 3) == -2
    with pytest.raises(DomainError):
        classify_coupling(0, 3)


def test_kernel_triple_feeds_neumann_sign_structure():
    # Neumann at z = 0 with full subtraction doubles the bulk one-loop term
    b = beta_half_minkowski(CouplingState(0.0, 1.0), ModelSpec.half_minkowski("neumann", "full", 0.0))
    k0, k2, k4 = kernel_triple(0.0, 1.0, False)
    assert (k0, k2, k4) == (1.0, 0.0, 0.0)
    assert b.dm2 == pytest.approx(2 * LOOP)
    assert b.dlambda == pytest.approx(6 * LOOP)
