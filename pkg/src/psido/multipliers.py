"""Fourier multipliers a_G(D) = F_G^{-1} a F_G and piecewise-constant symbols.

Includes the Cauchy-type singular operator with multiplier -sign(xi_k), the
1-D piecewise-constant (PC) algebra with radial limits and Fredholm
verdicts, and a p = 2 certificate for x-dependent multiplier families.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .grid import GFunction, Spectrum, TGrid, fourier_G, inv_fourier_G
from .symbols import Symbol, symbol_from_t_form

ELLIPTIC_TOL = 1e-12


class UnsupportedError(ValueError):
    pass


# --- multipliers ---------------------------------------------------------------

def multiplier_values(a, grid: TGrid, nu: int = 1) -> np.ndarray:
    """Sample a multiplier on the frequency mesh.

    ``a`` may be a PCSymbol1D, an x-independent Symbol, or a callable of
    the frequency array with trailing axis n.
    """
    xi = grid.xi_mesh()
    if isinstance(a, PCSymbol1D):
        if grid.n != 1:
            raise UnsupportedError("PC symbols are one-dimensional")
        vals = a(xi[..., 0])
    elif isinstance(a, Symbol):
        if not a.x_independent:
            raise ValueError("conv_op needs an x-independent symbol")
        vals = a.tform(np.zeros(grid.n), xi)
    else:
        vals = a(xi)
    shape = grid.shape + ((nu, nu) if nu > 1 else ())
    return np.broadcast_to(np.asarray(vals, dtype=complex), shape)


def conv_op(a, f: GFunction) -> GFunction:
    """a_G(D) f: multiply the group Fourier transform by ``a``."""
    nu = a.nu if isinstance(a, (PCSymbol1D, Symbol)) else f.nu
    if nu != f.nu:
        raise ValueError("multiplier and function component counts differ")
    vals = multiplier_values(a, f.grid, nu)
    spec = fourier_G(f, check_edges=False)
    if nu > 1:
        out = np.einsum("...ab,...b->...a", vals, spec.values)
    else:
        out = vals * spec.values
    return inv_fourier_G(Spectrum(f.grid, out, nu))


def conv_matrix(a, grid: TGrid) -> np.ndarray:
    """Dense matrix of a_G(D) (scalar multipliers), built column by column."""
    eye = np.eye(grid.size, dtype=complex)
    cols = [conv_op(a, GFunction(grid, eye[:, j].reshape(grid.shape))).values.reshape(-1)
            for j in range(grid.size)]
    return np.array(cols).T


def hilbert_symbol(grid: TGrid, k: int = 0, zero_mode: float = 1.0) -> np.ndarray:
    """-sign(xi_k) on the frequency mesh.

    ``zero_mode`` is the value used for sign(0). The default +1 makes the
    symbol square to 1 exactly; 0 reproduces the analytic-signal
    convention, in which the mean of the input is annihilated.
    """
    xi = grid.xi_mesh()[..., k]
    return -np.where(xi > 0, 1.0, np.where(xi < 0, -1.0, zero_mode))


def hilbert_G(f: GFunction, k: int = 0, path: str = "fourier", zero_mode: float = 1.0) -> GFunction:
    """Cauchy singular operator S_{G,k} with multiplier -sign(xi_k).

    ``path="fourier"`` multiplies the spectrum. ``path="kernel"`` (n = 1)
    evaluates (1/(pi i)) PV int f(tau) / (t - tau) dtau over the t-window by
    the alternating-node rule: for each node only neighbours at odd offsets
    enter, which pairs them symmetrically about the singular point.
    The kernel path is accurate for inputs that decay inside the window
    and have (near) zero mean; the periodic fourier path cannot represent
    slowly decaying tails.
    """
    if f.nu != 1:
        raise UnsupportedError("hilbert_G acts on scalar functions")
    if path == "fourier":
        if not 0 <= k < f.grid.n:
            raise ValueError("axis out of range")
        spec = fourier_G(f, check_edges=False)
        return inv_fourier_G(Spectrum(f.grid, hilbert_symbol(f.grid, k, zero_mode) * spec.values))
    if path == "kernel":
        if f.grid.n != 1:
            raise UnsupportedError("kernel path is one-dimensional")
        return GFunction(f.grid, -1j * kernels.pv_hilbert(f.values))
    raise ValueError(f"unknown path {path!r}")


# --- piecewise-constant symbols --------------------------------------------------

@dataclass
class PCSymbol1D:
    """Piecewise-constant multiplier on R.

    ``values[0]`` is taken on (-inf, b_1), ``values[j]`` on [b_j, b_{j+1}),
    ``values[N]`` on [b_N, inf). Sampling is right-continuous.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=complex)
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(self.breakpoints)):
            raise ValueError("breakpoints must be finite")
        if self.values.shape[0] != self.breakpoints.size + 1:
            raise ValueError("need exactly one value per interval (N + 1)")
        if self.values.ndim not in (1, 3) or (self.values.ndim == 3 and self.values.shape[1] != self.values.shape[2]):
            raise ValueError("values must be scalars or square matrices")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @property
    def nu(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def __call__(self, xi):
        idx = np.searchsorted(self.breakpoints, np.asarray(xi, dtype=float), side="right")
        return self.values[idx]

    def inverse(self) -> "PCSymbol1D":
        if self.nu == 1:
            return PCSymbol1D(self.breakpoints, 1.0 / self.values)
        return PCSymbol1D(self.breakpoints, np.linalg.inv(self.values))

    def to_dict(self):
        if self.nu == 1:
            vals = [[float(v.real), float(v.imag)] for v in self.values]
        else:
            vals = [[[[float(z.real), float(z.imag)] for z in row] for row in mat] for mat in self.values]
        return {"breakpoints": [float(b) for b in self.breakpoints], "values": vals}

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def from_dict(cls, d):
        vals = np.asarray(d["values"], dtype=float)
        return cls(d["breakpoints"], vals[..., 0] + 1j * vals[..., 1])

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class LimitSet:
    """(location, side, value) triples; location is a float or +-inf."""

    entries: list

    def values(self):
        return [v for _, _, v in self.entries]

    def at(self, location, side=None):
        return [v for loc, s, v in self.entries if loc == location and (side is None or s == side)]


def pc_radial_limits(a: PCSymbol1D) -> LimitSet:
    entries = [(-np.inf, None, a.values[0])]
    for j, b in enumerate(a.breakpoints):
        entries.append((float(b), "-", a.values[j]))
        entries.append((float(b), "+", a.values[j + 1]))
    entries.append((np.inf, None, a.values[-1]))
    return LimitSet(entries)


@dataclass
class FredholmVerdict:
    elliptic: bool
    inf_modulus: float
    inverse: PCSymbol1D | None
    note: str
    check_error: float | None = None

    def to_dict(self):
        return {"elliptic": self.elliptic, "inf_modulus": self.inf_modulus,
                "inverse": None if self.inverse is None else self.inverse.to_dict(),
                "note": self.note, "check_error": self.check_error}


def _modulus(v):
    v = np.asarray(v)
    if v.ndim == 2:
        return float(np.linalg.svd(v, compute_uv=False)[-1])
    return float(abs(v))


def pc_fredholm(a: PCSymbol1D, grid: TGrid | None = None, seed: int = 0) -> FredholmVerdict:
    """Fredholm verdict: elliptic iff every radial limit is invertible.

    When elliptic, the inverse has reciprocal values and the composition
    W_a W_{a^{-1}} is compared with the identity on ``grid`` (a random
    decaying test function).
    """
    lim = pc_radial_limits(a)
    inf_mod = min(_modulus(v) for v in lim.values())
    if inf_mod <= ELLIPTIC_TOL:
        return FredholmVerdict(False, inf_mod, None, "a radial limit vanishes: not Fredholm")
    inv = a.inverse()
    err = None
    if grid is not None:
        rng = np.random.default_rng(seed)
        t = grid.t1
        shape = (grid.M,) + ((a.nu,) if a.nu > 1 else ())
        coef = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        env = np.exp(-np.pi * (t / (grid.T / 4)) ** 2)
        vals = coef * (env[:, None] if a.nu > 1 else env)
        f = GFunction(grid, vals, a.nu)
        g = conv_op(a, conv_op(inv, f))
        err = float(np.linalg.norm((g - f).values) / np.linalg.norm(f.values))
    return FredholmVerdict(True, inf_mod, inv, "elliptic: Fredholm with inverse W_{a^-1}", err)


# --- condition B certificate ------------------------------------------------------

@dataclass
class ConditionBReport:
    entries: list
    bound: float
    finite: bool
    p: float = 2.0
    note: str = ("p = 2 only: the multiplier norm is the sup norm over xi; "
                 "the constant C_{s,p} is left symbolic as 1")

    def to_dict(self):
        return {"entries": self.entries, "bound": self.bound if np.isfinite(self.bound) else "inf",
                "finite": self.finite, "p": self.p, "note": self.note}


def _sup_abs(a, mu, t, xi, chunk_elems=1 << 21):
    step = max(1, chunk_elems // xi.shape[0])
    out = np.empty(t.shape[0])
    for i in range(0, t.shape[0], step):
        d = a.partial(mu, t[i:i + step, None, :], xi[None, :, :])
        out[i:i + step] = np.abs(d).max(axis=1)
    return out


def condition_B_certificate(a, m: int = 1, n: int = 1, L_schedule=(8.0, 16.0, 32.0),
                            xi_max: float = 32.0, n_xi: int = 257, pts_per_unit: int = 16,
                            growth_tol: float = 0.05) -> ConditionBReport:
    """Integrals M_{kappa,gamma} of sup_xi |d^k a_(gamma)| over the y-variables.

    ``a`` is a t-form symbol (Symbol, callable or expression); a_(gamma) is
    the t-derivative d_t^gamma a. For each coordinate ordering kappa and
    k = 1..n the mixed derivative in the first k reordered variables is
    integrated over [-L, L]^k with the remaining variables at 0; k = 0 is
    the value at the origin. Growth of any integral by more than
    ``growth_tol`` between the last two L reports divergence.
    """
    if not isinstance(a, Symbol):
        a = symbol_from_t_form(a, n=n)
    n = a.n
    if n not in (1, 2):
        raise UnsupportedError("condition B is implemented for n in {1, 2}")
    x1 = np.linspace(-xi_max, xi_max, n_xi if n == 1 else 17)
    xi = np.stack(np.meshgrid(*([x1] * n), indexing="ij"), -1).reshape(-1, n)
    gammas = [g for g in itertools.product(range(m + 1), repeat=n) if sum(g) <= m]
    entries = []
    per_kappa = {}
    for kappa in itertools.permutations(range(n)):
        for k in range(0, n + 1):
            vars_ = kappa[:k]
            for gam in gammas:
                beta = list(gam)
                for v in vars_:
                    beta[v] += 1
                mu = (0,) * n + tuple(beta)
                vals = []
                for L in L_schedule:
                    if k == 0:
                        t = np.zeros((1, n))
                        w = 1.0
                    else:
                        # the 2-D integral uses a coarser y-grid to bound the work
                        npts = int(2 * L * (pts_per_unit if k == 1 else 2)) + 1
                        y = np.linspace(-L, L, npts)
                        dy = y[1] - y[0]
                        grids = np.meshgrid(*([y] * k), indexing="ij")
                        t = np.zeros((y.size ** k, n))
                        for j, v in enumerate(vars_):
                            t[:, v] = grids[j].reshape(-1)
                        w = dy ** k
                    sup = _sup_abs(a, mu, t, xi)
                    vals.append(float(sup.sum() * w) if k else float(sup[0]))
                grow = vals[-1] - vals[-2]
                finite = not (k > 0 and grow > growth_tol * max(vals[-2], 1e-12) and grow > 1e-10)
                entries.append({"kappa": list(kappa), "k": k, "gamma": list(gam),
                                "M": vals, "finite": finite})
                per_kappa.setdefault(kappa, []).append(vals[-1] if finite else np.inf)
    finite = all(e["finite"] for e in entries)
    bound = max(sum(v) for v in per_kappa.values()) if finite else np.inf
    return ConditionBReport(entries, float(bound), finite)
