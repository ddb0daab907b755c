import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psido.group import (BoundaryWarning, GroupDomainError, distance_G, gop_add, gop_neg,
                         haar_weight, log_weight_shubin, map_t, map_x)

# points in t-coordinates, mapped into G so they stay well inside the domain
tcoord = st.floats(-6, 6, allow_nan=False)


@pytest.mark.filterwarnings("ignore::psido.group.BoundaryWarning")
@given(tcoord, tcoord, tcoord)
def test_associativity(ta, tb, tc):
    a, b, c = map_x(ta), map_x(tb), map_x(tc)
    lhs = gop_add(gop_add(a, b), c)
    rhs = gop_add(a, gop_add(b, c))
    assert np.allclose(lhs, rhs, atol=1e-12, rtol=0)


@given(tcoord)
def test_identity_and_inverse(ta):
    a = map_x(ta)
    assert np.allclose(gop_add(a, [0.0]), a, atol=1e-15)
    assert np.allclose(gop_add(a, gop_neg(a)), 0.0, atol=1e-15)


@given(tcoord, tcoord)
def test_map_t_is_homomorphism(ta, tb):
    a, b = map_x(ta), map_x(tb)
    # compare in x: exact up to rounding even near the boundary
    assert np.allclose(map_x(map_t(a) + map_t(b)), gop_add(a, b), atol=1e-12, rtol=0)


def test_commutativity_componentwise():
    a, b = np.array([0.3, -0.9]), np.array([-0.5, 0.2])
    assert np.allclose(gop_add(a, b), gop_add(b, a))


def test_example_sum():
    assert gop_add(0.5, 0.5)[0] == pytest.approx(0.8, abs=1e-15)


def test_map_t_sign_convention():
    # x = -tanh(t): positive t maps to negative x
    assert map_x(1.0)[0] == pytest.approx(-np.tanh(1.0))
    assert map_t([-np.tanh(2.0)])[0] == pytest.approx(2.0, abs=1e-14)
    assert np.allclose(map_x(map_t([0.0, 0.7, -0.99])), [0.0, 0.7, -0.99], atol=1e-15)


def test_domain_errors():
    with pytest.raises(GroupDomainError):
        gop_add(1.0, 0.0)
    with pytest.raises(GroupDomainError):
        map_t([np.nan])
    with pytest.raises(ValueError):
        gop_add([0.1, 0.2], [0.1])
    with pytest.raises(ValueError):
        map_x([np.inf])


def test_boundary_flag():
    with pytest.warns(BoundaryWarning):
        map_t([1.0 - 1e-12])


def test_distance_is_translation_invariant():
    a, b, c = np.array([0.2]), np.array([-0.6]), np.array([0.95])
    assert distance_G(a, b) == pytest.approx(distance_G(gop_add(a, c), gop_add(b, c)), abs=1e-12)


def test_haar_weight():
    assert haar_weight([0.0, 0.0]) == 1.0
    assert haar_weight([0.5]) == pytest.approx(1 / 0.75)
    # the product underflows: report inf rather than a wrong finite value
    with pytest.warns(BoundaryWarning):
        assert haar_weight(np.full(40, 1 - 1e-10)) == np.inf


def test_log_weight_shubin_large_t():
    t = np.array([0.0, 1.0, 400.0])
    expected = 1 + 2 * np.log(np.cosh(t[:2]))
    w = log_weight_shubin(t)
    assert np.allclose(w[:2], expected)
    # 2 ln cosh t ~ 2|t| - 2 ln 2 without overflow
    assert w[2] == pytest.approx(1 + 800 - 2 * np.log(2))
