import numpy as np
import pytest

from psido.group import map_x
from psido.symbols import (CATALOG, DerivativeDepthError, ProbeBox, SymbolEvaluationError,
                           check_elliptic, decay_limit_d, estimate_class, estimate_shubin,
                           get_symbol, list_catalog, multi_indices, symbol_from_t_form)

S = symbol_from_t_form
T = np.linspace(-3, 3, 7)[:, None]
XI = np.linspace(-5, 5, 9)[:, None]


def grid_pts():
    return T[:, None, :], XI[None, :, :]


def test_eval_in_x_matches_t_form():
    s = get_symbol("oscillator")
    x = map_x(np.array([0.5]))
    assert s.eval(x[:, None], np.array([[2.0]]))[0] == pytest.approx(2j * np.pi * 2 + 0.5)


def test_dfield_class_constants():
    rep = estimate_class(get_symbol("dfield"), K=1)
    assert rep.bounded
    assert rep.C((0,), (0,)) / (2 * np.pi) == pytest.approx(1.0, abs=0.02)
    assert rep.C((1,), (0,)) == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("exact", [True, False])
def test_order_one_symbol_with_sine_is_bounded(exact):
    if exact:
        s = S("sqrt(1 + xi**2)*sin(t)", m=1)
    else:
        s = S(lambda t, xi: np.sqrt(1 + xi[..., 0] ** 2) * np.sin(t[..., 0]), m=1)
    assert estimate_class(s, K=3 if exact else 2).bounded


def test_unbounded_in_t_is_detected():
    rep = estimate_class(S("t", m=0), K=0)
    assert not rep.bounded
    assert rep.verdict(((0,), (0,))) == "unbounded"


def test_shubin_weight():
    assert estimate_shubin(get_symbol("shubin-annihilation"), K=1).bounded
    assert not estimate_shubin(S("t*xi", m=0), K=0).bounded


def test_probe_box_validation():
    with pytest.raises(ValueError):
        estimate_class(get_symbol("identity"), probe=ProbeBox(L=(8.0,)))


def test_exact_and_finite_difference_derivatives_agree():
    expr = S("exp(-t**2)*cos(xi) + xi**2", m=2)
    oracle = S(lambda t, xi: np.exp(-t[..., 0] ** 2) * np.cos(xi[..., 0]) + xi[..., 0] ** 2, m=2)
    t, xi = grid_pts()
    for mu in [(1, 0), (0, 1), (1, 1), (2, 0)]:
        assert np.allclose(expr.partial(mu, t, xi), oracle.partial(mu, t, xi), atol=1e-6)


def test_oracle_uses_supplied_derivative():
    calls = []

    def deriv(a, b, t, xi):
        calls.append((a, b))
        return 2 * xi[..., 0] if a == (1,) and b == (0,) else None

    s = S(lambda t, xi: xi[..., 0] ** 2 + 0 * t[..., 0], m=2, deriv=deriv)
    t, xi = grid_pts()
    assert np.allclose(s.derivative((1,), (0,), t, xi), np.broadcast_to(2 * XI[None, :, 0], (7, 9)))
    assert calls


def test_depth_limit():
    s = S(lambda t, xi: np.sin(t[..., 0]) + 0 * xi[..., 0], depth=1)
    t, xi = grid_pts()
    s.partial((0, 1), t, xi)
    with pytest.raises(DerivativeDepthError):
        s.partial((0, 2), t, xi)


def test_evaluation_errors_carry_location():
    s = S(lambda t, xi: 1 / 0, name="broken")
    with pytest.raises(SymbolEvaluationError, match="broken"):
        s(np.zeros(1), np.zeros(1))
    singular = get_symbol("squared-ratio")
    with np.errstate(invalid="ignore"), pytest.raises(SymbolEvaluationError, match="not finite"):
        singular(np.zeros(1), np.zeros(1))


def test_leibniz_product_rule():
    a, b = S("sin(t)*xi", m=1), S("exp(t)*xi**2", m=2)
    exact = S("sin(t)*exp(t)*xi**3", m=3)
    t, xi = grid_pts()
    for mu in [(1, 1), (2, 0), (0, 2), (2, 2)]:
        assert np.allclose((a * b).partial(mu, t, xi), exact.partial(mu, t, xi), rtol=1e-12, atol=1e-9)


def test_inverse_derivatives():
    a = S("2 + sin(t) + xi**2", m=2)
    exact = S("1/(2 + sin(t) + xi**2)", m=-2)
    t, xi = grid_pts()
    inv = a.inverse()
    assert inv.order == -2
    for mu in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)]:
        assert np.allclose(inv.partial(mu, t, xi), exact.partial(mu, t, xi), rtol=1e-10, atol=1e-14)


def test_matrix_symbol_algebra():
    pair = get_symbol("oscillator-pair")
    t, xi = grid_pts()
    v = pair(t, xi)
    assert v.shape == (7, 9, 2, 2)
    assert np.allclose(pair.conj()(t, xi), np.conj(np.swapaxes(v, -1, -2)))
    tt = t + 0.25
    assert np.allclose(pair.inverse()(tt, xi) @ pair(tt, xi), np.eye(2), atol=1e-12)
    with pytest.raises(SymbolEvaluationError, match="near singular"):
        pair.inverse()(np.zeros(1), np.zeros(1))
    assert not pair.x_independent


def test_derived_symbol_orders_and_values():
    a = S("xi**3*sin(t)", m=3)
    d = a.derived((1,), (1,))
    assert d.order == 2
    t, xi = grid_pts()
    assert np.allclose(d(t, xi), 3 * XI[None, :, 0] ** 2 * np.cos(T[:, None, 0]))
    # derivatives of a derived symbol land on the base, not on a stencil
    assert np.allclose(d.partial((1, 0), t, xi), 6 * XI[None, :, 0] * np.cos(T[:, None, 0]))


def test_x_independence_flag():
    assert get_symbol("bessel(2)").x_independent
    assert not get_symbol("oscillator").x_independent
    assert S("t1 + xi2", n=2).n == 2 and not S("t1 + xi2", n=2).x_independent


def test_ellipticity():
    ok, C, _ = check_elliptic(S("1 + 4*pi**2*xi**2", m=2))
    assert ok and C == pytest.approx(0.9753, abs=1e-3)
    ok, C, _ = check_elliptic(S("xi", m=1), R=1.0)
    assert ok and C == pytest.approx(0.5)
    ok, _, witness = check_elliptic(get_symbol("constant(0)"))
    assert not ok and witness


@pytest.mark.parametrize("name,d", [("decaying", 0.0), ("gohberg(0.3)", 0.3), ("identity", 1.0)])
def test_decay_limit(name, d):
    assert decay_limit_d(get_symbol(name)) == pytest.approx(d, abs=1e-9)


def test_catalog_lookup():
    names = [e["name"] for e in list_catalog()]
    assert "oscillator" in names and "gohberg(c)" in names
    assert len(names) == len(CATALOG)
    assert get_symbol("bessel(0.5)").order == 0.5
    assert get_symbol("polynomial(1;0;t)")(np.array([2.0]), np.array([3.0])) == pytest.approx(19.0)
    with pytest.raises(KeyError):
        get_symbol("no-such-symbol")


def test_multi_indices():
    assert multi_indices(2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert multi_indices(1, 3) == [(3,)]
