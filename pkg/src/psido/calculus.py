"""Asymptotic symbol calculus: composition, adjoint and parametrix.

Every term is built from the symbol algebra in ``psido.symbols`` so that
t-derivatives of products and inverses are exact Leibniz expansions. The
term weight for a multi-index alpha is (2 pi i)^{-|alpha|} / alpha!, the
constant that matches the 2 pi i xi symbol of the canonical field.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import GFunction, TGrid, make_grid, sample
from .quantize import apply_op, materialize_matrix
from .symbols import (OracleSymbol, Symbol, SumSymbol, check_elliptic, estimate_class,
                      mi_factorial, multi_indices)

EXACT_RESIDUAL = 1e-7


class NotEllipticError(ValueError):
    pass


class CalculusWarning(UserWarning):
    pass


def weight(alpha) -> complex:
    return (2j * np.pi) ** (-sum(alpha)) / mi_factorial(alpha)


@dataclass
class Expansion:
    """Ordered asymptotic terms; ``terms[k]`` collects all |alpha| = k pieces."""

    terms: list
    orders: list
    rho: float
    delta: float
    source: str
    pieces: list = field(default_factory=list)

    def __len__(self):
        return len(self.terms)

    def partial_sum(self, N=None) -> Symbol:
        N = len(self.terms) if N is None else N
        if N < 1:
            raise ValueError("need at least one term")
        s = SumSymbol([(1.0, t) for t in self.terms[:N]])
        return s.declare(order=self.orders[0], rho=self.rho, delta=self.delta,
                         name=f"{self.source}[<{N}]")

    def report(self, evidence: bool = False, K: int = 2, fits=()) -> dict:
        out = {"source": self.source, "rho": self.rho, "delta": self.delta, "terms": []}
        for k, (term, order) in enumerate(zip(self.terms, self.orders)):
            entry = {"k": k, "declared_order": order}
            if self.pieces:
                entry["alpha"] = [list(a) for a in self.pieces[k]]
            if evidence:
                rep = estimate_class(term, K=K, order=order)
                entry["class_evidence"] = {"bounded": rep.bounded,
                                           "max_growth": float(max(rep.growth.values()))}
            out["terms"].append(entry)
        out["residual_fits"] = [f.to_dict() for f in fits]
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.report(**kw), indent=2, sort_keys=True)


def _check_type(*syms):
    for s in syms:
        if not (0.0 <= s.delta < s.rho <= 1.0):
            warnings.warn(f"symbol {s.name!r} has type (rho, delta) = ({s.rho}, {s.delta}) "
                          "outside 0 <= delta < rho <= 1; expansion is formal",
                          CalculusWarning, stacklevel=3)


def _touch(sym: Symbol):
    # one evaluation surfaces derivative-depth errors at construction time
    sym.tform(np.zeros(sym.n), np.ones(sym.n))


def compose_expand(a: Symbol, b: Symbol, N: int) -> Expansion:
    """Terms of the symbol of Op(a) Op(b) with |alpha| < N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_type(a, b)
    rho, delta = min(a.rho, b.rho), max(a.delta, b.delta)
    terms, orders, pieces = [], [], []
    for k in range(N):
        parts = []
        for al in multi_indices(a.n, k):
            zero = (0,) * a.n
            da = a if k == 0 else a.derived(al, zero)
            db = b if k == 0 else b.derived(zero, al)
            parts.append((weight(al), da * db))
        order = a.order + b.order - (rho - delta) * k
        term = SumSymbol(parts).declare(order=order, rho=rho, delta=delta, name=f"compose[{k}]")
        _touch(term)
        terms.append(term)
        orders.append(order)
        pieces.append(multi_indices(a.n, k))
    return Expansion(terms, orders, rho, delta, "compose", pieces)


def adjoint_expand(a: Symbol, N: int) -> Expansion:
    """Terms of the symbol of Op(a)^* with |alpha| < N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_type(a)
    ca = a.conj()
    terms, orders, pieces = [], [], []
    for k in range(N):
        parts = [(weight(al), ca if k == 0 else ca.derived(al, al)) for al in multi_indices(a.n, k)]
        order = a.order - (a.rho - a.delta) * k
        term = SumSymbol(parts).declare(order=order, rho=a.rho, delta=a.delta, name=f"adjoint[{k}]")
        _touch(term)
        terms.append(term)
        orders.append(order)
        pieces.append(multi_indices(a.n, k))
    return Expansion(terms, orders, a.rho, a.delta, "adjoint", pieces)


def smooth_step(s):
    """C-infinity step: 0 for s <= 1, 1 for s >= 2."""
    s = np.asarray(s, dtype=float)
    u = np.clip(s - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        g1 = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return g0 / (g0 + g1)


def cutoff_symbol(R: float, n: int = 1, nu: int = 1) -> Symbol:
    """chi(|xi| / (R + 1)), vanishing near the origin in frequency."""
    def func(t, xi):
        val = smooth_step(np.linalg.norm(xi, axis=-1) / (R + 1.0))
        return val[..., None, None] * np.eye(nu) if nu > 1 else val
    return OracleSymbol(func, order=0.0, n=n, nu=nu, name=f"cutoff(R={R:g})", x_independent=True)


def parametrix(a: Symbol, N: int, R: float = 0.0, literal: bool = False) -> Expansion:
    """Terms tau_0 .. tau_{N-1} of a parametrix of Op(a).

    tau_0 = a^{-1} and
    tau_k = -a^{-1} sum_{j<k} sum_{|g| = k-j} w_g (d_xi^g a)(D^g tau_j),
    with w_g = (2 pi i)^{-|g|} / g!. ``literal=True`` drops w_g. When R > 0
    every term is multiplied by chi(|xi| / (R + 1)) so the low frequencies
    where a may vanish are excluded.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    ok, C, witness = check_elliptic(a, R)
    if not ok:
        raise NotEllipticError(f"symbol {a.name!r} is not elliptic for |xi| >= {R}: "
                               f"C = {C:.3g} at (t, xi) = {witness}")
    _check_type(a)
    inv = a.inverse()
    raw = [inv]
    zero = (0,) * a.n
    for k in range(1, N):
        parts = []
        for j in range(k):
            for g in multi_indices(a.n, k - j):
                w = 1.0 if literal else weight(g)
                parts.append((w, a.derived(g, zero) * raw[j].derived(zero, g)))
        raw.append(-1.0 * (inv * SumSymbol(parts)))
    chi = cutoff_symbol(R, a.n, a.nu) if R > 0 else None
    terms, orders = [], []
    for k, tau in enumerate(raw):
        order = -a.order - (a.rho - a.delta) * k
        term = (chi * tau) if chi is not None else tau
        term = term.declare(order=order, rho=a.rho, delta=a.delta, name=f"parametrix[{k}]")
        _touch(term)
        terms.append(term)
        orders.append(order)
    return Expansion(terms, orders, a.rho, a.delta, "parametrix")


# --- residual order ---------------------------------------------------------

@dataclass
class ResidualFit:
    kind: str
    N: int
    xi0: list
    norms: list
    slope: float
    bound: float
    exact: bool

    @property
    def passed(self) -> bool:
        return self.exact or self.slope <= self.bound

    def to_dict(self):
        return {"kind": self.kind, "N": self.N, "xi0": [float(x) for x in self.xi0],
                "norms": [float(v) for v in self.norms],
                "slope": "-inf" if self.exact else float(self.slope),
                "bound": float(self.bound), "passed": bool(self.passed)}


def packet(grid: TGrid, xi0: float, width: float = 0.5, t0: float = 0.0) -> GFunction:
    """Gaussian wave packet exp(-pi ((t - t0)/width)^2) exp(2 pi i xi0 t)."""
    def f(t):
        tt = t[..., 0] if grid.n == 1 else t
        if grid.n == 1:
            return np.exp(-np.pi * ((tt - t0) / width) ** 2 + 2j * np.pi * xi0 * tt)
        r2 = np.sum((t - t0) ** 2, axis=-1)
        return np.exp(-np.pi * r2 / width ** 2 + 2j * np.pi * xi0 * t[..., 0])
    return sample(grid, f)


def residual_norms(kind, a: Symbol, b, expansion: Expansion, N: int, xi0s, grid: TGrid,
                   width: float = 0.5, side: str = "right"):
    """||R phi_{xi0}|| for each packet frequency.

    kind "compose": R = Op(a) Op(b) - Op(c_{<N}).
    kind "adjoint": R = Op(a)^* - Op(a*_{<N}) (matrix adjoint as oracle).
    kind "parametrix": R = Op(a) Op(tau_{<N}) - I (side "right") or
    Op(tau_{<N}) Op(a) - I (side "left").
    """
    c = expansion.partial_sum(N)
    adj = materialize_matrix(a, grid).adjoint() if kind == "adjoint" else None
    out = []
    for xi0 in xi0s:
        f = packet(grid, xi0, width)
        if kind == "compose":
            r = apply_op(a, apply_op(b, f)) - apply_op(c, f)
        elif kind == "adjoint":
            r = adj.apply(f) - apply_op(c, f)
        elif kind == "parametrix":
            if side == "right":
                r = apply_op(a, apply_op(c, f)) - f
            else:
                r = apply_op(c, apply_op(a, f)) - f
        else:
            raise ValueError(f"unknown residual kind {kind!r}")
        out.append(r.l2_norm() / f.l2_norm())
    return out


def residual_order_probe(kind, a: Symbol, expansion: Expansion, N: int,
                         xi0s=(4.0, 8.0, 16.0, 32.0), b: Symbol | None = None,
                         grid: TGrid | None = None, width: float = 0.5,
                         side: str = "right") -> ResidualFit:
    """Fit log ||R packet|| against log(1 + xi0).

    The contract is slope <= m_total - (rho - delta) N + 1/2, where m_total
    is m_a + m_b for compositions, m_a for adjoints and 0 for parametrices.
    Residuals below 1e-7 at every frequency report an exact expansion.
    """
    grid = grid or make_grid(2.0, 512)
    xi0s = [float(x) for x in xi0s if abs(x) < 0.75 * grid.xi_max]
    if len(xi0s) < 3:
        raise ValueError("need at least three packet frequencies inside the grid band")
    norms = residual_norms(kind, a, b, expansion, N, xi0s, grid, width, side)
    rd = expansion.rho - expansion.delta
    if kind == "compose":
        m_total = a.order + b.order
    elif kind == "adjoint":
        m_total = a.order
    else:
        m_total = 0.0
    bound = m_total - rd * N + 0.5
    if max(norms) <= EXACT_RESIDUAL:
        return ResidualFit(kind, N, xi0s, norms, -np.inf, bound, True)
    slope = float(np.polyfit(np.log1p(xi0s), np.log(np.maximum(norms, 1e-300)), 1)[0])
    return ResidualFit(kind, N, xi0s, norms, slope, bound, False)


def regular_subspace(grid: TGrid, k: int = 40, seed: int = 0, width: float = 1.0) -> np.ndarray:
    """Orthonormal basis of k random packets well inside the grid's phase space.

    Packets sit at |t0| <= T/2 and |xi0| <= xi_max/2, where operators built
    from polynomial symbols are free of aliasing and boundary wrap-around.
    """
    rng = np.random.default_rng(seed)
    cols = []
    for _ in range(k):
        t0 = rng.uniform(-grid.T / 2, grid.T / 2)
        x0 = rng.uniform(-grid.xi_max / 2, grid.xi_max / 2)
        cols.append(packet(grid, x0, width, t0).values.reshape(-1))
    Q, _ = np.linalg.qr(np.array(cols).T)
    return Q


def matrix_defect(X: np.ndarray, Q: np.ndarray) -> float:
    """Spectral norm of X restricted to the range of Q."""
    return float(np.linalg.norm(X @ Q, 2))
