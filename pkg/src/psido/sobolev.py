"""Bessel potentials and Sobolev norms on G.

Two H^s weights are exposed. ``weight="standard"`` uses (1 + |xi|^2)^s;
``weight="bessel"`` uses (1 + 4 pi^2 |xi|^2)^s, the symbol of (1 - Delta_G)^s
under the e^{-2 pi i} kernel. They define equivalent norms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .grid import GFunction, TGrid, dfield, fourier_G, make_grid
from .multipliers import conv_op

MAX_BESSEL_ORDER = 16.0
MAX_W_ORDER = 4


@dataclass(frozen=True)
class SobolevSpec:
    s: float
    p: float = 2.0
    flavor: str = "bessel"

    def __post_init__(self):
        if not 1.0 < self.p < np.inf:
            raise ValueError("p must lie in (1, inf)")
        if self.flavor not in ("bessel", "integer-W"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.flavor == "integer-W" and (self.s < 0 or self.s != int(self.s)):
            raise ValueError("integer-W needs a nonnegative integer order")

    def norm(self, f: GFunction) -> float:
        if self.flavor == "integer-W":
            return wmp_norm(f, int(self.s), self.p)
        if self.p == 2:
            return hs_norm(f, self.s, weight="bessel")
        return bessel_potential(f, self.s).lp_norm(self.p)


def bessel_multiplier(r: float):
    def mult(xi):
        return (1.0 + 4 * np.pi ** 2 * np.sum(xi ** 2, axis=-1)) ** (r / 2.0)
    return mult


def bessel_potential(f: GFunction, r: float) -> GFunction:
    """(1 - Delta_G)^{r/2} f with Delta_G = -sum_j D_j^2."""
    if r > MAX_BESSEL_ORDER:
        raise ValueError(f"order {r} exceeds the overflow guard {MAX_BESSEL_ORDER}")
    if r == 0:
        return GFunction(f.grid, f.values.copy(), f.nu)
    return conv_op(bessel_multiplier(r), f)


def _weight(grid: TGrid, s: float, weight: str):
    r2 = np.sum(grid.xi_mesh() ** 2, axis=-1)
    if weight == "standard":
        return (1.0 + r2) ** s
    if weight == "bessel":
        return (1.0 + 4 * np.pi ** 2 * r2) ** s
    raise ValueError(f"unknown weight {weight!r}")


def hs_norm(f: GFunction, s: float, weight: str = "standard") -> float:
    """(int w_s(xi) |F_G f(xi)|^2 dxi)^{1/2} by the rectangle rule."""
    spec = fourier_G(f, check_edges=False).values
    w = _weight(f.grid, s, weight)
    if f.nu > 1:
        w = w[..., None]
    return float(np.sqrt(np.sum(w * np.abs(spec) ** 2) * f.grid.dxi ** f.grid.n))


def wmp_norm(f: GFunction, m: int, p: float = 2.0) -> float:
    """(sum_{|alpha| <= m} ||D^alpha f||_p^p)^{1/p} with Haar weights."""
    if m < 0 or m > MAX_W_ORDER or int(m) != m:
        raise ValueError(f"m must be an integer in [0, {MAX_W_ORDER}]")
    n = f.grid.n
    total = 0.0
    for alpha in itertools.product(range(m + 1), repeat=n):
        if sum(alpha) > m:
            continue
        total += dfield(f, alpha).lp_norm(p) ** p
    return float(total ** (1.0 / p))


def gaussian_family(count: int = 20, widths=(0.5, 4.0)):
    """Centred and shifted Gaussians of widths spanning ``widths``."""
    out = []
    for k, w in enumerate(np.geomspace(widths[0], widths[1], count)):
        c = 0.5 * ((-1) ** k) * (k % 3)
        out.append(lambda t, w=w, c=c: np.exp(-np.pi * np.sum((t - c) ** 2, axis=-1) / w ** 2))
    return out


@dataclass
class EquivalenceReport:
    m: int
    weight: str
    schedule: list
    ratios: list
    bracket: tuple
    skipped: list = field(default_factory=list)
    stable_tol: float = 1e-3

    @property
    def inside(self) -> bool:
        lo, hi = self.bracket
        return all(lo <= min(r) and max(r) <= hi for r in self.ratios)

    @property
    def stable(self) -> bool:
        a, b = np.asarray(self.ratios[-2]), np.asarray(self.ratios[-1])
        return bool(np.all(np.abs(a - b) <= self.stable_tol * np.abs(b)))

    @property
    def verdict(self) -> str:
        return "equivalent" if self.inside and self.stable else "not-established"

    def to_dict(self):
        return {"m": self.m, "weight": self.weight, "schedule": self.schedule,
                "min_ratio": [float(min(r)) for r in self.ratios],
                "max_ratio": [float(max(r)) for r in self.ratios],
                "bracket": list(self.bracket), "skipped": self.skipped,
                "verdict": self.verdict}


def norm_equivalence_probe(family=None, m: int = 1, schedule=((16.0, 256), (16.0, 512)),
                           weight: str = "standard", bracket=(0.1, 10.0), n: int = 1) -> EquivalenceReport:
    """Ratios hs_norm(f, m) / wmp_norm(f, m, 2) over a family and a schedule."""
    family = gaussian_family() if family is None else list(family)
    if len(family) < 20:
        raise ValueError("the family needs at least 20 members")
    grids = [g if isinstance(g, TGrid) else make_grid(*g, n) for g in schedule]
    ratios, skipped = [], []
    for g in grids:
        row = []
        tm = g.t_mesh()
        for idx, fn in enumerate(family):
            f = GFunction(g, fn(tm))
            w = wmp_norm(f, m, 2.0)
            if w == 0:
                if idx not in skipped:
                    skipped.append(idx)
                continue
            row.append(hs_norm(f, m, weight) / w)
        ratios.append(row)
    return EquivalenceReport(m, weight, [[g.T, g.M] for g in grids], ratios, tuple(bracket), skipped)
