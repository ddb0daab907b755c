"""Quantization sigma -> sigma(x, D) on a grid.

Two independent evaluation routes are provided. ``apply_op`` works on G:
transform with ``fourier_G`` and resum against the symbol table with the
phase kernel. ``apply_op_pullback`` works on the t-side: it builds the
Euclidean quantization of the t-form with explicit exponential matrices.
Their agreement is the discrete form of the pullback correspondence.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .grid import CONVENTION, GFunction, Spectrum, TGrid, fourier_G, inv_fourier_G
from .symbols import Symbol

MAX_MATRIX_DIM = 8192


class GridMismatchError(ValueError):
    pass


def _check(s: Symbol, f: GFunction):
    if s.n != f.grid.n:
        raise GridMismatchError(f"symbol dimension {s.n} != grid dimension {f.grid.n}")
    if s.nu != f.nu:
        raise GridMismatchError(f"symbol is {s.nu}x{s.nu} but function has {f.nu} components")


def symbol_table(s: Symbol, grid: TGrid) -> np.ndarray:
    """sigma(t_j, xi_k) on all node pairs, shape (P, Q) or (P, Q, nu, nu)."""
    t = grid.t_points()
    xi = grid.xi_points()
    return np.asarray(s.tform(t[:, None, :], xi[None, :, :]), dtype=complex)


def symbol_on_frequencies(s: Symbol, grid: TGrid) -> np.ndarray:
    """Values of an x-independent symbol on the frequency mesh."""
    xi = grid.xi_mesh()
    vals = s.tform(np.zeros(grid.n), xi)
    return np.broadcast_to(vals, grid.shape + ((s.nu, s.nu) if s.nu > 1 else ())).astype(complex)


def apply_op(s: Symbol, f: GFunction, table=None) -> GFunction:
    """(A f)(x_j) = sum_k exp(2 pi i t_j.xi_k) sigma(x_j, xi_k) F_G f(xi_k) dxi^n."""
    _check(s, f)
    grid = f.grid
    spec = fourier_G(f, check_edges=False)
    if s.x_independent and table is None:
        mult = symbol_on_frequencies(s, grid)
        if s.nu > 1:
            vals = np.einsum("...ab,...b->...a", mult, spec.values)
        else:
            vals = mult * spec.values
        return inv_fourier_G(Spectrum(grid, vals, s.nu))
    if table is None:
        table = symbol_table(s, grid)
    t = grid.t_points()
    xi = grid.xi_points()
    dxi = grid.dxi ** grid.n
    if s.nu == 1:
        out = kernels.phase_sum(t, xi, table, spec.values.reshape(-1) * dxi)
        return GFunction(grid, out.reshape(grid.shape))
    F = spec.values.reshape(grid.size, s.nu) * dxi
    out = np.zeros((grid.size, s.nu), dtype=complex)
    for a in range(s.nu):
        for b in range(s.nu):
            out[:, a] += kernels.phase_sum(t, xi, np.ascontiguousarray(table[:, :, a, b]), F[:, b])
    return GFunction(grid, out.reshape(grid.shape + (s.nu,)), s.nu)


def _exp_matrix(grid: TGrid) -> np.ndarray:
    """E[j, k] = exp(2 pi i t_j.xi_k), built from the 1-D factors."""
    e1 = np.exp(2j * np.pi * np.outer(grid.t1, grid.xi1))
    E = e1
    for _ in range(grid.n - 1):
        E = np.kron(E, e1)
    return E


def apply_op_pullback(s: Symbol, f: GFunction) -> GFunction:
    """t_* Op(a) x_* f with the Euclidean quantization of the t-form.

    The nodes x_j and t_j correspond, so x_* f is the same sample vector
    read as a function of t. The Euclidean transform and its resummation
    are dense matrix products, independent of the FFT route.
    """
    _check(s, f)
    grid = f.grid
    E = _exp_matrix(grid)
    table = symbol_table(s, grid)
    g = f.values.reshape(grid.size, s.nu) if s.nu > 1 else f.values.reshape(grid.size, 1)
    ghat = (E.conj().T @ g) * grid.weight
    if s.nu == 1:
        out = ((E * table) @ ghat[:, 0]) * grid.dxi ** grid.n
        return GFunction(grid, out.reshape(grid.shape))
    out = np.einsum("jk,jkab,kb->ja", E, table, ghat) * grid.dxi ** grid.n
    return GFunction(grid, out.reshape(grid.shape + (s.nu,)), s.nu)


@dataclass
class OperatorMatrix:
    """Dense discretization in Haar-orthonormal coordinates.

    Component ordering is node-major: index ``j * nu + a``. On a uniform
    t-grid the sqrt(dt) rescaling cancels, so ``entries @ f.flat()`` is the
    sample vector of A f.
    """

    grid: TGrid
    entries: np.ndarray
    nu: int = 1
    name: str = ""

    def __post_init__(self):
        dim = self.nu * self.grid.size
        if self.entries.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.entries.shape} does not match grid ({dim})")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("matrix entries must be finite")

    def apply(self, f: GFunction) -> GFunction:
        out = self.entries @ f.values.reshape(-1)
        return GFunction(self.grid, out.reshape(f.values.shape), self.nu)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries.conj().T, self.nu, f"({self.name})^*")

    def __matmul__(self, other):
        return OperatorMatrix(self.grid, self.entries @ other.entries, self.nu, f"{self.name}@{other.name}")

    def __sub__(self, other):
        return OperatorMatrix(self.grid, self.entries - other.entries, self.nu, f"{self.name}-{other.name}")

    def __add__(self, other):
        return OperatorMatrix(self.grid, self.entries + other.entries, self.nu, f"{self.name}+{other.name}")

    def save(self, path) -> None:
        """Column-major complex128 binary with a JSON sidecar."""
        path = Path(path)
        self.entries.T.astype("<c16").tofile(path)
        meta = {**self.grid.spec(), "nu": self.nu, "symbol": self.name, "order": "column-major",
                "dtype": "complex128", "convention": CONVENTION}
        Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "OperatorMatrix":
        meta = json.loads(Path(str(path) + ".json").read_text())
        grid = TGrid(meta["T"], meta["M"], meta["n"])
        dim = meta["nu"] * grid.size
        data = np.fromfile(path, dtype="<c16").reshape(dim, dim).T
        return cls(grid, np.ascontiguousarray(data), meta["nu"], meta["symbol"])


def materialize_matrix(s: Symbol, grid: TGrid) -> OperatorMatrix:
    """Dense matrix of sigma(x, D) on ``grid``.

    A = dt^n dxi^n (E o S) E^H, the column-by-column image of the node basis.
    """
    if s.n != grid.n:
        raise GridMismatchError("symbol and grid dimensions differ")
    dim = s.nu * grid.size
    if dim > MAX_MATRIX_DIM:
        raise ValueError(f"matrix dimension {dim} exceeds the cap {MAX_MATRIX_DIM}")
    E = _exp_matrix(grid)
    table = symbol_table(s, grid)
    scale = grid.weight * grid.dxi ** grid.n
    if s.nu == 1:
        A = ((E * table) @ E.conj().T) * scale
    else:
        A = np.einsum("jk,jkab,lk->jalb", E, table, E.conj()).reshape(dim, dim) * scale
    return OperatorMatrix(grid, A, s.nu, s.name)
