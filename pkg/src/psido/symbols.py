"""Symbols sigma(x, xi) on G x R^n, their derivatives, and class estimators.

A symbol is stored through its t-form a(t, xi) = sigma(x(t), xi). Since the
canonical field D_{x_j} is the transport of d/dt_j, every D_x derivative of
sigma is a plain t-derivative of the t-form, which avoids the degenerate
factor (1 - x^2) near the boundary.

Derivatives are organised as jets: ``jet(mu, t, xi)`` returns every mixed
derivative d_xi^alpha d_t^beta up to the joint multi-index mu = (alpha, beta).
Products, sums, inverses and conjugates propagate jets exactly (Leibniz
rule), so only leaf symbols ever use finite differences.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .group import log_weight_shubin, map_t

FD_MIN_STEP = 1e-4
EPS = np.finfo(float).eps


class SymbolEvaluationError(RuntimeError):
    pass


class DerivativeDepthError(ValueError):
    pass


# --- multi-index helpers ---------------------------------------------------

def _mi(alpha, n):
    if alpha is None:
        return (0,) * n
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != n or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for n={n}")
    return alpha


def _below(mu):
    """All joint multi-indices nu <= mu, in lexicographic order."""
    return list(itertools.product(*(range(k + 1) for k in mu)))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _binom(mu, nu):
    out = 1
    for a, b in zip(mu, nu):
        out *= comb(a, b)
    return out


def multi_indices(n, order):
    """Multi-indices of length n and total order ``order``, lexicographic."""
    return [a for a in itertools.product(range(order + 1), repeat=n) if sum(a) == order]


def mi_factorial(alpha):
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def _prep(arr, n):
    arr = np.asarray(arr, dtype=float)
    if n == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != n:
        raise ValueError(f"trailing axis must have length {n}, got shape {arr.shape}")
    return arr


class Symbol:
    """Base class: a symbol with declared order m and type (rho, delta).

    Subclasses implement ``_jet``. Values have shape ``batch`` for scalar
    symbols and ``batch + (nu, nu)`` for matrix symbols, where ``batch`` is
    the broadcast of the leading shapes of t and xi.
    """

    def __init__(self, order=0.0, rho=1.0, delta=0.0, n=1, nu=1, name="",
                 x_independent=False):
        self.order = float(order)
        self.rho = float(rho)
        self.delta = float(delta)
        self.n = int(n)
        self.nu = int(nu)
        self.name = name or self.__class__.__name__
        self.x_independent = bool(x_independent)

    def __repr__(self):
        return f"<Symbol {self.name} m={self.order:g} rho={self.rho:g} delta={self.delta:g}>"

    # evaluation -----------------------------------------------------------
    def _batch(self, t, xi):
        return np.broadcast_shapes(t.shape[:-1], xi.shape[:-1])

    def _vshape(self, batch):
        return batch + ((self.nu, self.nu) if self.nu > 1 else ())

    def jet(self, mu, t, xi) -> dict:
        t, xi = _prep(t, self.n), _prep(xi, self.n)
        mu = tuple(mu)
        if len(mu) != 2 * self.n:
            raise ValueError("joint multi-index must have length 2n (xi part, then t part)")
        return self._jet(mu, t, xi)

    def _jet(self, mu, t, xi) -> dict:
        raise NotImplementedError

    def partial(self, mu, t, xi):
        """The single derivative at joint multi-index mu."""
        t, xi = _prep(t, self.n), _prep(xi, self.n)
        return self._partial(tuple(mu), t, xi)

    def _partial(self, mu, t, xi):
        return self._jet(mu, t, xi)[mu]

    def tform(self, t, xi):
        return self.partial((0,) * (2 * self.n), t, xi)

    __call__ = tform

    def eval(self, x, xi):
        """Evaluate at group points x (coordinates in (-1, 1))."""
        x = np.asarray(x, dtype=float)
        t = map_t(x.reshape(-1)).reshape(x.shape)
        return self.tform(t, xi)

    def derivative(self, alpha, beta, t, xi):
        """d_xi^alpha D_x^beta sigma, evaluated at (t, xi)."""
        return self.partial(_mi(alpha, self.n) + _mi(beta, self.n), t, xi)

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        if np.isscalar(other):
            other = ConstantSymbol(other, n=self.n, nu=self.nu)
        return SumSymbol([(1.0, self), (1.0, other)])

    __radd__ = __add__

    def __neg__(self):
        return SumSymbol([(-1.0, self)])

    def __sub__(self, other):
        if np.isscalar(other):
            other = ConstantSymbol(other, n=self.n, nu=self.nu)
        return SumSymbol([(1.0, self), (-1.0, other)])

    def __mul__(self, other):
        if np.isscalar(other):
            return SumSymbol([(complex(other), self)])
        return ProductSymbol(self, other)

    def __rmul__(self, other):
        if np.isscalar(other):
            return SumSymbol([(complex(other), self)])
        return ProductSymbol(other, self)

    def conj(self):
        return ConjSymbol(self)

    def inverse(self):
        return InverseSymbol(self)

    def derived(self, alpha=None, beta=None):
        return DerivedSymbol(self, _mi(alpha, self.n) + _mi(beta, self.n))

    def declare(self, order=None, rho=None, delta=None, name=None):
        """Return a view of this symbol with different declared metadata."""
        return Relabelled(self, order=self.order if order is None else order,
                          rho=self.rho if rho is None else rho,
                          delta=self.delta if delta is None else delta,
                          name=name or self.name)


def _check_finite(sym, out, t, xi, mu):
    if np.all(np.isfinite(out)):
        return out
    batch = sym._batch(t, xi)
    idx = tuple(np.argwhere(~np.isfinite(out))[0][:len(batch)])
    tb = np.broadcast_to(t, batch + (sym.n,))
    xb = np.broadcast_to(xi, batch + (sym.n,))
    raise SymbolEvaluationError(
        f"symbol {sym.name!r} derivative {mu} is not finite at t={tb[idx]}, xi={xb[idx]}")


class OracleSymbol(Symbol):
    """Leaf symbol defined by a callable t-form.

    Parameters
    ----------
    func : callable
        ``func(t, xi)`` with trailing axis n on both arguments.
    deriv : callable, optional
        ``deriv(alpha, beta, t, xi)``; returning None defers to finite
        differences for that multi-index.
    depth : int, optional
        Largest total derivative order the oracle may be asked for.
    """

    def __init__(self, func, order=0.0, rho=1.0, delta=0.0, n=1, nu=1, name="",
                 deriv=None, depth=None, x_independent=False, fd_step=FD_MIN_STEP):
        super().__init__(order, rho, delta, n, nu, name, x_independent)
        self.func = func
        self.deriv = deriv
        self.depth = depth
        self.fd_step = fd_step

    def _call(self, t, xi):
        try:
            out = self.func(t, xi)
        except Exception as exc:  # attach the probe location
            raise SymbolEvaluationError(
                f"symbol {self.name!r} failed on t-probe range "
                f"[{np.min(t):.4g}, {np.max(t):.4g}], xi range [{np.min(xi):.4g}, {np.max(xi):.4g}]: {exc}"
            ) from exc
        shape = self._vshape(self._batch(t, xi))
        return np.broadcast_to(np.asarray(out, dtype=complex), shape)

    def _fd(self, nu, t, xi):
        k = sum(nu)
        if k == 0:
            return self._call(t, xi)
        h = max(self.fd_step, EPS ** (1.0 / (k + 2)))
        n = self.n
        axes = [(d, a) for d, a in enumerate(nu) if a]
        acc = 0.0
        for js in itertools.product(*(range(a + 1) for _, a in axes)):
            w = 1.0
            dt = np.zeros(n)
            dx = np.zeros(n)
            for (d, a), j in zip(axes, js):
                w *= (-1) ** j * comb(a, j)
                off = (a / 2.0 - j) * h
                if d < n:
                    dx[d] += off
                else:
                    dt[d - n] += off
            acc = acc + w * self._call(t + dt, xi + dx)
        return acc / h ** k

    def _partial(self, nu, t, xi):
        k = sum(nu)
        if self.depth is not None and k > self.depth:
            raise DerivativeDepthError(
                f"symbol {self.name!r}: derivative (alpha, beta) = "
                f"({nu[:self.n]}, {nu[self.n:]}) exceeds oracle depth {self.depth}")
        if k and self.x_independent and any(nu[self.n:]):
            return np.zeros(self._vshape(self._batch(t, xi)), dtype=complex)
        val = None
        if self.deriv is not None and k:
            val = self.deriv(nu[:self.n], nu[self.n:], t, xi)
        if val is None:
            return self._fd(nu, t, xi)
        return np.broadcast_to(np.asarray(val, dtype=complex), self._vshape(self._batch(t, xi)))

    def _jet(self, mu, t, xi):
        return {nu: self._partial(nu, t, xi) for nu in _below(mu)}


class ConstantSymbol(Symbol):
    def __init__(self, value, n=1, nu=1, name=""):
        value = np.asarray(value, dtype=complex)
        if nu > 1 and value.ndim == 0:
            value = value * np.eye(nu)
        super().__init__(0.0, 1.0, 0.0, n, nu, name or f"const({value if nu == 1 else '...'})", True)
        self.value = value

    def _jet(self, mu, t, xi):
        shape = self._vshape(self._batch(t, xi))
        out = {nu: np.zeros(shape, dtype=complex) for nu in _below(mu)}
        out[(0,) * len(mu)] = np.broadcast_to(self.value, shape).astype(complex)
        return out


class ExprSymbol(Symbol):
    """Leaf symbol given by a sympy expression in t (t1, t2) and xi (xi1, xi2).

    Derivatives are exact: sympy differentiates and the result is compiled
    to numpy once per multi-index.
    """

    def __init__(self, expr, order=0.0, rho=1.0, delta=0.0, n=1, name=""):
        import sympy as sp

        self._sp = sp
        self.tsyms, self.xsyms = _sym_vars(n)
        if isinstance(expr, str):
            expr = sp.sympify(expr, locals=_sym_locals(n))
        if isinstance(expr, (list, tuple)):
            loc = _sym_locals(n)
            expr = sp.Matrix([[sp.sympify(e, locals=loc) for e in row] for row in expr])
        self.expr = expr
        nu = expr.shape[0] if isinstance(expr, sp.MatrixBase) else 1
        free = expr.free_symbols
        xind = not (free & set(self.tsyms))
        super().__init__(order, rho, delta, n, nu, name or str(expr), xind)
        self._cache = {}

    def _compiled(self, nu):
        if nu not in self._cache:
            sp = self._sp
            e = self.expr
            for v, k in zip(list(self.xsyms) + list(self.tsyms), nu):
                if k:
                    e = sp.diff(e, v, k)
            args = list(self.tsyms) + list(self.xsyms)
            if self.nu > 1:
                fns = [[sp.lambdify(args, e[i, j], "numpy") for j in range(self.nu)]
                       for i in range(self.nu)]
            else:
                fns = sp.lambdify(args, e, "numpy")
            self._cache[nu] = fns
        return self._cache[nu]

    def _partial(self, nu, t, xi):
        batch = self._batch(t, xi)
        args = [t[..., j] for j in range(self.n)] + [xi[..., j] for j in range(self.n)]
        fn = self._compiled(nu)
        if self.nu > 1:
            val = np.empty(batch + (self.nu, self.nu), dtype=complex)
            for i in range(self.nu):
                for j in range(self.nu):
                    val[..., i, j] = np.broadcast_to(np.asarray(fn[i][j](*args), dtype=complex), batch)
        else:
            val = np.broadcast_to(np.asarray(fn(*args), dtype=complex), batch)
        return _check_finite(self, val, t, xi, nu)

    def _jet(self, mu, t, xi):
        return {nu: self._partial(nu, t, xi) for nu in _below(mu)}


@lru_cache(maxsize=None)
def _sym_vars(n):
    import sympy as sp

    if n == 1:
        return (sp.Symbol("t", real=True),), (sp.Symbol("xi", real=True),)
    return (tuple(sp.Symbol(f"t{j + 1}", real=True) for j in range(n)),
            tuple(sp.Symbol(f"xi{j + 1}", real=True) for j in range(n)))


def _sym_locals(n):
    ts, xs = _sym_vars(n)
    return {str(s): s for s in ts + xs}


# --- algebra nodes ----------------------------------------------------------

def _mul(a, b, nu):
    return a @ b if nu > 1 else a * b


def _meta_product(a, b):
    return dict(order=a.order + b.order, rho=min(a.rho, b.rho), delta=max(a.delta, b.delta))


def _compatible(*syms):
    n = {s.n for s in syms}
    nu = {s.nu for s in syms}
    if len(n) != 1 or len(nu) != 1:
        raise ValueError("symbols must share n and nu")


class ProductSymbol(Symbol):
    def __init__(self, a, b):
        _compatible(a, b)
        super().__init__(n=a.n, nu=a.nu, name=f"({a.name})*({b.name})",
                         x_independent=a.x_independent and b.x_independent, **_meta_product(a, b))
        self.a, self.b = a, b

    def _jet(self, mu, t, xi):
        ja, jb = self.a._jet(mu, t, xi), self.b._jet(mu, t, xi)
        out = {}
        for nu in _below(mu):
            acc = 0
            for kappa in _below(nu):
                acc = acc + _binom(nu, kappa) * _mul(ja[kappa], jb[_sub(nu, kappa)], self.nu)
            out[nu] = acc
        return out


class SumSymbol(Symbol):
    def __init__(self, parts):
        parts = [(complex(c), s) for c, s in parts]
        syms = [s for _, s in parts]
        _compatible(*syms)
        super().__init__(order=max(s.order for s in syms), rho=min(s.rho for s in syms),
                         delta=max(s.delta for s in syms), n=syms[0].n, nu=syms[0].nu,
                         name=" + ".join(s.name for s in syms),
                         x_independent=all(s.x_independent for s in syms))
        self.parts = parts

    def _jet(self, mu, t, xi):
        shape = self._vshape(self._batch(t, xi))
        out = {nu: np.zeros(shape, dtype=complex) for nu in _below(mu)}
        for c, s in self.parts:
            js = s._jet(mu, t, xi)
            for nu in out:
                out[nu] = out[nu] + c * js[nu]
        return out

    def _partial(self, mu, t, xi):
        acc = np.zeros(self._vshape(self._batch(t, xi)), dtype=complex)
        for c, s in self.parts:
            acc = acc + c * s._partial(mu, t, xi)
        return acc


class ConjSymbol(Symbol):
    """Pointwise conjugate (conjugate transpose for matrix symbols)."""

    def __init__(self, a):
        super().__init__(a.order, a.rho, a.delta, a.n, a.nu, f"conj({a.name})", a.x_independent)
        self.a = a

    def _jet(self, mu, t, xi):
        ja = self.a._jet(mu, t, xi)
        if self.nu > 1:
            return {k: np.conj(np.swapaxes(v, -1, -2)) for k, v in ja.items()}
        return {k: np.conj(v) for k, v in ja.items()}


class InverseSymbol(Symbol):
    """Pointwise inverse a^{-1}; derivatives from d^nu (a a^{-1}) = 0."""

    COND_GUARD = 1e12

    def __init__(self, a):
        super().__init__(-a.order, a.rho, a.delta, a.n, a.nu, f"inv({a.name})", a.x_independent)
        self.a = a

    def _jet(self, mu, t, xi):
        ja = self.a._jet(mu, t, xi)
        zero = (0,) * len(mu)
        a0 = ja[zero]
        if self.nu > 1:
            cond = np.linalg.cond(a0)
            if np.any(~np.isfinite(cond)) or np.any(cond > self.COND_GUARD):
                raise SymbolEvaluationError(f"matrix symbol {self.a.name!r} is near singular")
            inv0 = np.linalg.inv(a0)
        else:
            if np.any(a0 == 0):
                raise SymbolEvaluationError(f"symbol {self.a.name!r} vanishes on the probe set")
            inv0 = 1.0 / a0
        out = {zero: inv0}
        for nu in _below(mu)[1:]:
            acc = 0
            for kappa in _below(nu):
                if kappa == zero:
                    continue
                acc = acc + _binom(nu, kappa) * _mul(ja[kappa], out[_sub(nu, kappa)], self.nu)
            out[nu] = -_mul(inv0, acc, self.nu)
        return out


class DerivedSymbol(Symbol):
    """d_xi^alpha d_t^beta of a base symbol, itself a symbol.

    Further derivatives are taken on the base with summed orders, so no
    finite-difference stencil is ever nested.
    """

    def __init__(self, a, mu0):
        n = a.n
        al, be = mu0[:n], mu0[n:]
        super().__init__(a.order - a.rho * sum(al) + a.delta * sum(be), a.rho, a.delta, n, a.nu,
                         f"d{mu0}({a.name})", a.x_independent)
        self.a, self.mu0 = a, tuple(mu0)

    def _jet(self, mu, t, xi):
        top = _add(mu, self.mu0)
        ja = self.a._jet(top, t, xi)
        return {nu: ja[_add(nu, self.mu0)] for nu in _below(mu)}

    def _partial(self, mu, t, xi):
        if isinstance(self.a, (ExprSymbol, OracleSymbol, ConstantSymbol)):
            return self.a._partial(_add(mu, self.mu0), t, xi)
        return self._jet(mu, t, xi)[mu]


class Relabelled(Symbol):
    def __init__(self, a, order, rho, delta, name):
        super().__init__(order, rho, delta, a.n, a.nu, name, a.x_independent)
        self.a = a

    def _jet(self, mu, t, xi):
        return self.a._jet(mu, t, xi)

    def _partial(self, mu, t, xi):
        return self.a._partial(mu, t, xi)


def symbol_from_t_form(func, m=0.0, rho=1.0, delta=0.0, n=1, nu=1, deriv=None,
                       name="", depth=None, x_independent=False) -> Symbol:
    """Wrap a t-form oracle a(t, xi) as a Symbol on G x R^n.

    ``func`` may also be a string or sympy expression in ``t``/``xi`` (or
    ``t1, t2, xi1, xi2`` when n = 2); derivatives are then exact.
    """
    if isinstance(func, str) or _is_sympy(func):
        if deriv is not None:
            raise ValueError("expression symbols compute their own derivatives")
        return ExprSymbol(func, m, rho, delta, n, name)
    return OracleSymbol(func, m, rho, delta, n, nu, name, deriv, depth, x_independent)


def _is_sympy(obj):
    mod = type(obj).__module__
    return mod.startswith("sympy")


# --- class estimators --------------------------------------------------------

@dataclass
class ProbeBox:
    """Nested probe boxes |t| <= L, |xi| <= L.

    The default schedule reaches far enough into the xi tail that limits
    like 2 pi |xi| / (1 + |xi|) -> 2 pi are resolved to about 1%.
    """

    L: tuple = (8.0, 32.0, 128.0)
    n_t: int = 33
    n_xi: int = 129
    threshold: float = 1.05

    def points(self, L, n):
        nt, nx = (self.n_t, self.n_xi) if n == 1 else (9, 33)
        t1 = np.linspace(-L, L, nt)
        u = np.linspace(-1.0, 1.0, nx)
        xi1 = L * np.sign(u) * u ** 2
        tt = np.stack(np.meshgrid(*([t1] * n), indexing="ij"), -1).reshape(-1, n)
        xx = np.stack(np.meshgrid(*([xi1] * n), indexing="ij"), -1).reshape(-1, n)
        return tt[:, None, :], xx[None, :, :]


@dataclass
class SymbolClassReport:
    symbol: str
    weight: str
    order: float
    rho: float
    delta: float
    K: int
    boxes: tuple
    constants: dict = field(default_factory=dict)
    growth: dict = field(default_factory=dict)
    threshold: float = 1.05

    def verdict(self, key) -> str:
        return "bounded" if self.growth[key] <= self.threshold else "unbounded"

    @property
    def bounded(self) -> bool:
        return all(self.verdict(k) == "bounded" for k in self.constants)

    def C(self, alpha, beta=None):
        n = len(next(iter(self.constants))[0])
        return self.constants[(_mi(alpha, n), _mi(beta, n))][-1]

    def to_dict(self):
        return {
            "symbol": self.symbol, "weight": self.weight, "order": self.order,
            "rho": self.rho, "delta": self.delta, "K": self.K, "boxes": list(self.boxes),
            "bounded": self.bounded,
            "entries": [
                {"alpha": list(a), "beta": list(b), "C": [float(c) for c in cs],
                 "growth": float(self.growth[(a, b)]), "verdict": self.verdict((a, b))}
                for (a, b), cs in sorted(self.constants.items())
            ],
        }


def _magnitude(vals, nu):
    if nu > 1:
        return np.linalg.norm(vals, ord=2, axis=(-2, -1))
    return np.abs(vals)


def _estimate(s: Symbol, K: int, probe: ProbeBox | None, weight: str, order) -> SymbolClassReport:
    probe = probe or ProbeBox()
    if len(probe.L) < 2 or any(b <= a for a, b in zip(probe.L, probe.L[1:])):
        raise ValueError("probe boxes must be strictly increasing and at least two")
    n = s.n
    m = s.order if order is None else order
    keys = [(a, b) for k in range(K + 1) for a_ord in range(k + 1)
            for a in multi_indices(n, a_ord) for b in multi_indices(n, k - a_ord)]
    report = SymbolClassReport(s.name, weight, m, s.rho, s.delta, K, tuple(probe.L),
                               threshold=probe.threshold)
    running = {key: 0.0 for key in keys}
    hist = {key: [] for key in keys}
    top = tuple([K] * (2 * n))
    for L in probe.L:
        t, xi = probe.points(L, n)
        rxi = np.linalg.norm(xi, axis=-1)
        if weight == "shubin":
            base = 1.0 + np.sum(log_weight_shubin(t) - 1.0, axis=-1) + rxi
        else:
            base = 1.0 + rxi
        # one jet per box covers every (alpha, beta) with |alpha|, |beta| <= K
        jet = s.jet(top, t, xi) if K else s.jet((0,) * (2 * n), t, xi)
        for a, b in keys:
            expo = m - s.rho * sum(a) + s.delta * sum(b)
            val = _magnitude(jet[a + b], s.nu) * base ** (-expo)
            running[(a, b)] = max(running[(a, b)], float(np.max(val)))
            hist[(a, b)].append(running[(a, b)])
    for key in keys:
        cs = hist[key]
        report.constants[key] = cs
        prev, last = cs[-2], cs[-1]
        report.growth[key] = 1.0 if last <= 1e-12 else (last / prev if prev > 0 else np.inf)
    return report


def estimate_class(s: Symbol, K: int = 2, probe: ProbeBox | None = None, order=None) -> SymbolClassReport:
    """Per-(alpha, beta) Hormander constants over nested probe boxes.

    C_{alpha,beta} = sup |d_xi^alpha D_x^beta s| (1 + |xi|)^{-(m - rho|alpha| + delta|beta|)}.
    A constant is reported bounded when it grows by at most the box
    threshold between the last two boxes.
    """
    return _estimate(s, K, probe, "hormander", order)


def estimate_shubin(s: Symbol, K: int = 2, probe: ProbeBox | None = None, order=0.0) -> SymbolClassReport:
    """Same estimator with the joint weight 1 + |ln(1 - x^2)| + |xi|."""
    return _estimate(s, K, probe, "shubin", order)


def _elliptic_xi(R, n):
    mags = R + np.concatenate([np.linspace(0.0, 4.0, 1601), np.geomspace(4.0, 1e4, 600)[1:]])
    if n == 1:
        return np.concatenate([-mags[::-1], mags])[:, None]
    ang = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    dirs = np.stack([np.cos(ang), np.sin(ang)], -1)
    return (mags[:, None, None] * dirs[None]).reshape(-1, 2)


def check_elliptic(s: Symbol, R: float = 0.0, t_range: float = 8.0, n_t: int = 65, tol: float = 1e-8):
    """Test |a(x, xi)| >= C (1 + |xi|)^m for |xi| >= R.

    Returns ``(elliptic, C, witness)`` where ``witness`` is the (t, xi) probe
    attaining the infimum. Matrix symbols use the smallest singular value.
    """
    n = s.n
    t1 = np.linspace(-t_range, t_range, n_t)
    tt = np.stack(np.meshgrid(*([t1] * n), indexing="ij"), -1).reshape(-1, n)
    xi = _elliptic_xi(R, n)
    vals = s.tform(tt[:, None, :], xi[None, :, :])
    if s.nu > 1:
        mag = np.linalg.svd(vals, compute_uv=False)[..., -1]
    else:
        mag = np.abs(vals)
    ratio = mag * (1.0 + np.linalg.norm(xi, axis=-1))[None, :] ** (-s.order)
    i, j = np.unravel_index(np.argmin(ratio), ratio.shape)
    C = float(ratio[i, j])
    return C > tol, C, (tt[i].tolist(), xi[j].tolist())


def decay_shells(s: Symbol, schedule=(5.0, 10.0, 20.0), n_pts: int = 41):
    """Sup of |sigma| on the shells |t| in [L, 4L], |xi| in [L, 4L] (per axis)."""
    if s.nu != 1:
        raise ValueError("decay limit is defined for scalar symbols")
    out = []
    for L in schedule:
        r = np.linspace(L, 4 * L, n_pts)
        r = np.concatenate([-r[::-1], r])
        pts = np.stack(np.meshgrid(*([r] * s.n), indexing="ij"), -1).reshape(-1, s.n)
        vals = np.abs(s.tform(pts[:, None, :], pts[None, :, :]))
        out.append((float(L), float(vals.max())))
    return out


def decay_limit_d(s: Symbol, schedule=(5.0, 10.0, 20.0)) -> float:
    """Gohberg quantity d, read off the outermost probe shell."""
    return decay_shells(s, schedule)[-1][1]


# --- catalog -----------------------------------------------------------------

def _cat_identity(n=1):
    return ConstantSymbol(1.0, n=n, name="identity")


def _cat_constant(c=1.0):
    return ConstantSymbol(complex(c), name=f"constant({c:g})" if np.isreal(c) else f"constant({c})")


def _cat_dfield():
    return ExprSymbol("2*pi*I*xi", order=1, name="dfield")


def _cat_bessel(r=1.0):
    return ExprSymbol(f"(1 + 4*pi**2*xi**2)**(Rational({_rat(r)})/2)", order=r, name=f"bessel({r:g})")


def _rat(r):
    from fractions import Fraction

    f = Fraction(r).limit_denominator(1000)
    return f"{f.numerator}, {f.denominator}" if f.denominator != 1 else f"{f.numerator}, 1"


def _cat_oscillator():
    return ExprSymbol("2*pi*I*xi + t", order=1, name="oscillator")


def _cat_oscillator_adj():
    return ExprSymbol("-2*pi*I*xi + t", order=1, name="oscillator-adjoint")


def _cat_gohberg(c=0.3):
    return ExprSymbol(f"{float(c)!r} + exp(-xi**2)", order=0, name=f"gohberg({c:g})")


def _cat_decaying():
    return ExprSymbol("exp(-t**2 - xi**2)", order=0, name="decaying")


def _cat_shubin():
    return ExprSymbol("(2*pi*I*xi + t)/sqrt(1 + t**2 + 4*pi**2*xi**2)", order=0, name="shubin-annihilation")


def _cat_squared_ratio():
    return ExprSymbol("((t + 2*pi*I*xi)/(t - 2*pi*I*xi))**2", order=0, name="squared-ratio")


def _cat_squared_oscillator():
    return ExprSymbol("(t + 2*pi*I*xi)**2/(1 + t**2 + 4*pi**2*xi**2)", order=0, name="squared-oscillator")


def _cat_oscillator_pair():
    return ExprSymbol([["2*pi*I*xi + t", 0], [0, "-2*pi*I*xi + t"]], order=1, name="oscillator-pair")


def _cat_polynomial(spec="1;0;1"):
    """Polynomial in xi: 'c0;c1;c2' means c0(t) + c1(t) xi + c2(t) xi^2."""
    coeffs = [c.strip() for c in spec.split(";")]
    expr = " + ".join(f"({c})*xi**{k}" for k, c in enumerate(coeffs) if c not in ("", "0"))
    return ExprSymbol(expr or "0", order=len(coeffs) - 1, name=f"polynomial({spec})")


def _cat_parametrix_example():
    return ExprSymbol("1 + 4*pi**2*xi**2 + sin(t)", order=2, name="parametrix-example")


def _cat_cv_oscillatory():
    return ExprSymbol("exp(I*sin(xi))*sin(t)", order=0, rho=0.0, name="cv-oscillatory")


def _cat_cv_riesz():
    return ExprSymbol("2*pi*I*xi*cos(t)/sqrt(1 + 4*pi**2*xi**2)", order=0, name="cv-riesz")


def _cat_cv_smoothed():
    return ExprSymbol("(2 + sin(t))*exp(I*xi/sqrt(1 + xi**2))", order=0, name="cv-modulated")


CATALOG = {
    "identity": (_cat_identity, "sigma = 1"),
    "constant(c)": (_cat_constant, "sigma = c"),
    "dfield": (_cat_dfield, "sigma = 2 pi i xi, the canonical vector field"),
    "bessel(r)": (_cat_bessel, "sigma = (1 + 4 pi^2 xi^2)^(r/2)"),
    "oscillator": (_cat_oscillator, "annihilation symbol 2 pi i xi + t"),
    "oscillator-adjoint": (_cat_oscillator_adj, "creation symbol -2 pi i xi + t"),
    "oscillator-pair": (_cat_oscillator_pair, "diag(annihilation, creation)"),
    "gohberg(c)": (_cat_gohberg, "sigma = c + exp(-xi^2); decay limit d = c"),
    "decaying": (_cat_decaying, "sigma = exp(-t^2 - xi^2); d = 0"),
    "shubin-annihilation": (_cat_shubin, "order-0 normalized annihilation symbol"),
    "squared-ratio": (_cat_squared_ratio, "((t + 2 pi i xi)/(t - 2 pi i xi))^2"),
    "squared-oscillator": (_cat_squared_oscillator, "(t + 2 pi i xi)^2 / (1 + t^2 + 4 pi^2 xi^2)"),
    "polynomial(spec)": (_cat_polynomial, "sum_k c_k(t) xi^k from 'c0;c1;...'"),
    "parametrix-example": (_cat_parametrix_example, "1 + 4 pi^2 xi^2 + sin t"),
    "cv-oscillatory": (_cat_cv_oscillatory, "exp(i sin xi) sin t, class S^0_{0,0}"),
    "cv-riesz": (_cat_cv_riesz, "Riesz-type order-0 symbol times cos t"),
    "cv-modulated": (_cat_cv_smoothed, "(2 + sin t) exp(i xi / <xi>)"),
}

_NAME_RE = re.compile(r"^([a-z0-9\-]+)(?:\((.*)\))?$")


def get_symbol(name: str) -> Symbol:
    """Look up a catalog symbol, e.g. ``"bessel(0.5)"`` or ``"gohberg(0.3)"``."""
    mt = _NAME_RE.match(name.strip())
    if not mt:
        raise KeyError(f"malformed symbol name {name!r}")
    base, arg = mt.group(1), mt.group(2)
    for key, (factory, _) in CATALOG.items():
        kbase = key.split("(")[0]
        if kbase != base:
            continue
        if arg is None or arg == "":
            return factory()
        if base == "polynomial":
            return factory(arg)
        return factory(float(arg))
    raise KeyError(f"unknown symbol {name!r}")


def list_catalog():
    return [{"name": k, "description": d} for k, (_, d) in CATALOG.items()]
