import json

import numpy as np
import pytest

from psido.calculus import (CalculusWarning, NotEllipticError, adjoint_expand, compose_expand,
                            cutoff_symbol, matrix_defect, parametrix, regular_subspace,
                            residual_norms, residual_order_probe, smooth_step, weight)
from psido.grid import make_grid
from psido.quantize import materialize_matrix
from psido.suites import exact_calculus_cases, residual_cases
from psido.symbols import DerivativeDepthError, get_symbol, symbol_from_t_form

S = symbol_from_t_form


@pytest.fixture(scope="module")
def subspace_setup():
    g = make_grid(8.0, 256)
    return g, regular_subspace(g, 40, seed=0)


def test_weights():
    assert weight((0,)) == 1
    assert weight((2,)) == pytest.approx(1 / (2 * (2j * np.pi) ** 2))
    assert weight((1, 1)) == pytest.approx((2j * np.pi) ** -2)


@pytest.mark.parametrize("case", exact_calculus_cases(), ids=lambda c: c[1])
def test_polynomial_expansions_are_exact(subspace_setup, case):
    g, Q = subspace_setup
    kind, _, a, b, N = case
    A = materialize_matrix(a, g).entries
    if kind == "compose":
        E = compose_expand(a, b, N)
        X = A @ materialize_matrix(b, g).entries - materialize_matrix(E.partial_sum(), g).entries
    else:
        E = adjoint_expand(a, N)
        X = A.conj().T - materialize_matrix(E.partial_sum(), g).entries
    assert matrix_defect(X, Q) <= 1e-7 * np.linalg.norm(A @ Q, 2)


def test_truncated_expansion_is_not_exact(subspace_setup):
    g, Q = subspace_setup
    a, b = S("2*pi*I*xi", m=1), S("sin(t)")
    c = compose_expand(a, b, 1).partial_sum()
    X = materialize_matrix(a, g).entries @ materialize_matrix(b, g).entries - materialize_matrix(c, g).entries
    assert matrix_defect(X, Q) > 0.1


@pytest.mark.parametrize("case", residual_cases(), ids=lambda c: c[0])
def test_residual_slopes(case):
    _, a, b, N = case
    fit = residual_order_probe("compose", a, compose_expand(a, b, N), N, b=b)
    assert not fit.exact
    assert fit.slope <= fit.bound
    assert fit.to_dict()["passed"]


def test_exact_residual_sentinel():
    a = S("sqrt(1 + 4*pi**2*xi**2)", m=1)
    fit = residual_order_probe("compose", a, compose_expand(a, a, 1), 1, b=a)
    assert fit.exact and fit.passed and fit.to_dict()["slope"] == "-inf"


def test_adjoint_residual_probe():
    a = S("(2 + sin(t))*sqrt(1 + 4*pi**2*xi**2)", m=1)
    fit = residual_order_probe("adjoint", a, adjoint_expand(a, 2), 2, grid=make_grid(2.0, 256),
                               xi0s=(4.0, 8.0, 16.0, 24.0))
    assert fit.passed


def test_residual_probe_needs_frequencies():
    a = get_symbol("identity")
    with pytest.raises(ValueError, match="three"):
        residual_order_probe("compose", a, compose_expand(a, a, 1), 1, b=a, xi0s=(4.0, 500.0))


def test_parametrix_residuals_decrease_and_track():
    a = get_symbol("parametrix-example")
    g = make_grid(4.0, 512)
    right, left = [], []
    for N in (1, 2, 3):
        P = parametrix(a, N, R=1.0)
        right.append(residual_norms("parametrix", a, None, P, N, [16.0], g)[0])
        left.append(residual_norms("parametrix", a, None, P, N, [16.0], g, side="left")[0])
    assert right[0] > right[1] > right[2]
    for r, l in zip(right, left):
        assert r / 10 <= l <= 10 * r


def test_parametrix_of_multiplier_is_exact_inverse():
    a = S("1 + 4*pi**2*xi**2", m=2)
    P = parametrix(a, 3)
    t, xi = np.zeros((1, 1)), np.array([[0.7]])
    assert P.terms[1](t, xi) == pytest.approx(0)
    assert P.partial_sum(1)(t, xi) * a(t, xi) == pytest.approx(1)
    assert [round(o, 12) for o in P.orders] == [-2, -3, -4]


def test_literal_recursion_differs():
    a = get_symbol("parametrix-example")
    t, xi = np.array([[0.3]]), np.array([[2.0]])
    w = parametrix(a, 2).terms[1](t, xi)
    lit = parametrix(a, 2, literal=True).terms[1](t, xi)
    assert lit == pytest.approx(w * (2j * np.pi))


def test_not_elliptic():
    with pytest.raises(NotEllipticError):
        parametrix(S("xi", m=1), 2)
    assert parametrix(S("xi", m=1), 1, R=1.0)


def test_cutoff():
    assert smooth_step(np.array([0.5, 1.0]))[0] == 0
    assert smooth_step(np.array([2.0, 3.0])).tolist() == [1.0, 1.0]
    chi = cutoff_symbol(1.0)
    assert chi(np.zeros(1), np.array([1.0])) == 0 and chi(np.zeros(1), np.array([5.0])) == 1


def test_type_warning():
    with pytest.warns(CalculusWarning):
        compose_expand(get_symbol("cv-oscillatory"), get_symbol("identity"), 1)


def test_depth_error_surfaces_at_construction():
    shallow = S(lambda t, xi: np.sin(t[..., 0]) * xi[..., 0], m=1, depth=0)
    with pytest.raises(DerivativeDepthError):
        compose_expand(get_symbol("dfield"), shallow, 2)


def test_report_json():
    a = S("2*pi*I*xi*sin(t)", m=1)
    E = adjoint_expand(a, 2)
    doc = json.loads(E.to_json(evidence=True, K=1))
    assert doc["source"] == "adjoint" and len(doc["terms"]) == 2
    assert doc["terms"][1]["declared_order"] == 0
    assert doc["terms"][0]["class_evidence"]["bounded"]
