import numpy as np
import pytest

from psido.grid import GFunction, dfield, make_grid, random_bandlimited, sample
from psido.quantize import (GridMismatchError, OperatorMatrix, apply_op, apply_op_pullback,
                            materialize_matrix)
from psido.suites import SINGULAR_AT_ORIGIN, catalog_names
from psido.symbols import get_symbol, symbol_from_t_form


def _input(g, s, seed=0):
    f = random_bandlimited(g, 1, seed)[0]
    if s.nu > 1:
        f = GFunction(g, np.stack([f.values, 1j * f.values[::-1]], axis=-1), s.nu)
    return f


@pytest.mark.parametrize("name", [n for n in catalog_names() if n not in SINGULAR_AT_ORIGIN])
def test_dual_path_and_matrix_agree(grid_small, name):
    s = get_symbol(name)
    f = _input(grid_small, s, seed=11)
    a, b = apply_op(s, f), apply_op_pullback(s, f)
    assert (a - b).l2_norm() <= 1e-7 * b.l2_norm()
    m = materialize_matrix(s, grid_small).apply(f)
    assert (m - a).l2_norm() <= 1e-7 * b.l2_norm()


def test_identity_is_identity(grid_small):
    f = random_bandlimited(grid_small, 1, 2)[0]
    assert np.allclose(apply_op(get_symbol("identity"), f).values, f.values, atol=1e-13)
    A = materialize_matrix(get_symbol("identity"), grid_small).entries
    assert np.allclose(A, np.eye(grid_small.M), atol=1e-13)


def test_dfield_symbol_quantizes_to_dfield(grid_small):
    f = random_bandlimited(grid_small, 1, 4)[0]
    assert np.allclose(apply_op(get_symbol("dfield"), f).values, dfield(f, (1,)).values, atol=1e-12)
    A = materialize_matrix(get_symbol("dfield"), grid_small).entries
    assert np.max(np.abs(A + A.conj().T)) < 1e-12


def test_multiplication_symbol():
    g = make_grid(8.0, 128)
    f = sample(g, lambda t: np.exp(-t[..., 0] ** 2))
    out = apply_op(symbol_from_t_form("sin(t)"), f)
    assert np.allclose(out.values, np.sin(g.t1) * f.values, atol=1e-13)


def test_two_dimensional_quantization():
    g = make_grid(4.0, 16, 2)
    s = symbol_from_t_form("2*pi*I*xi1 + sin(t2)", m=1, n=2)
    f = random_bandlimited(g, 1, 3)[0]
    a, b = apply_op(s, f), apply_op_pullback(s, f)
    assert (a - b).l2_norm() <= 1e-10 * b.l2_norm()
    assert np.allclose(materialize_matrix(s, g).apply(f).values, a.values, atol=1e-10)


def test_grid_mismatch(grid_small):
    s = symbol_from_t_form("t1*xi2", n=2)
    with pytest.raises(GridMismatchError):
        materialize_matrix(s, grid_small)


def test_matrix_cap():
    with pytest.raises(ValueError, match="cap"):
        materialize_matrix(get_symbol("oscillator-pair"), make_grid(8.0, 8192))


def test_operator_matrix_round_trip(tmp_path, grid_small):
    A = materialize_matrix(get_symbol("oscillator"), grid_small)
    A.save(tmp_path / "A.bin")
    B = OperatorMatrix.load(tmp_path / "A.bin")
    assert np.array_equal(A.entries, B.entries)
    assert B.name == "oscillator" and B.grid == grid_small
    assert np.allclose((A.adjoint() @ A).entries, A.entries.conj().T @ A.entries)


def test_operator_matrix_validation(grid_small):
    with pytest.raises(ValueError):
        OperatorMatrix(grid_small, np.eye(3))
