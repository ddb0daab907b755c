"""Spectral probes: norms, lower bounds, compactness and the index.

All probes work on dense matrices in Haar-orthonormal coordinates, so
operator norms and adjoints are plain matrix operations. Measurements are
evidence collected over a grid schedule, never proofs.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .grid import CONVENTION, TGrid, make_grid
from .quantize import OperatorMatrix, materialize_matrix, symbol_table
from .symbols import Symbol, get_symbol, decay_shells

DEFAULT_SCHEDULE = ((8.0, 128), (8.0, 256), (8.0, 512))


class ProbeError(ValueError):
    pass


class ContourError(ValueError):
    pass


def _schedule(schedule, minimum=2):
    grids = [g if isinstance(g, TGrid) else make_grid(*g) for g in schedule]
    if len(grids) < minimum:
        raise ProbeError(f"schedule needs at least {minimum} grids")
    if any(b.M <= a.M for a, b in zip(grids, grids[1:])):
        raise ProbeError("schedule must be strictly increasing in M")
    return grids


@dataclass
class ProbeReport:
    probe: str
    symbol: str
    schedule: list
    measured: dict
    verdict: str
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in ("stable", "bounded-below", "compact-evidence", "noncompact-evidence")

    def to_dict(self):
        return _clean({"probe": self.probe, "symbol": self.symbol, "schedule": self.schedule,
                       "measured": self.measured, "verdict": self.verdict,
                       "tolerance": self.tolerance, "details": self.details,
                       "convention": CONVENTION})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def op_norm_L2(A: OperatorMatrix) -> float:
    """Largest singular value: the discrete L2(G) operator norm."""
    return float(np.linalg.norm(A.entries, 2))


def _variation(vals):
    vals = np.asarray(vals, dtype=float)
    lo = vals.min()
    return float(vals.max() / lo - 1.0) if lo > 0 else np.inf


def lp_test_family(grid: TGrid, count: int = 50):
    """Gaussians, modulated packets and near-boundary bumps.

    The packets and bumps scale with the grid (frequencies are fixed
    fractions of the band limit, bump widths a few nodes), so operators of
    positive order show growth along a schedule.
    """
    if grid.n != 1:
        raise ProbeError("the L^p family is one-dimensional")
    n_gauss = count * 2 // 5
    n_pack = (count - n_gauss) // 2
    n_bump = count - n_gauss - n_pack
    t = grid.t1
    fam = []
    for w in np.geomspace(0.3, 3.0, n_gauss):
        fam.append(np.exp(-np.pi * (t / w) ** 2))
    for frac in np.linspace(0.05, 0.6, n_pack):
        fam.append(np.exp(-np.pi * t ** 2) * np.exp(2j * np.pi * frac * grid.xi_max * t))
    for k in range(n_bump):
        c = (1 if k % 2 else -1) * 0.75 * grid.T
        w = grid.dt * (2 + k)
        fam.append(np.exp(-np.pi * ((t - c) / w) ** 2))
    return np.array(fam, dtype=complex).T


def _lp(vals, p, w):
    if np.isinf(p):
        return np.abs(vals).max(axis=0)
    return (np.sum(np.abs(vals) ** p, axis=0) * w) ** (1.0 / p)


def cv_boundedness_probe(s: Symbol, schedule=DEFAULT_SCHEDULE, p: float = 2.0,
                         tol: float | None = None) -> ProbeReport:
    """Uniform-boundedness evidence for Op(s) on L^p along a grid schedule.

    p = 2 uses the exact discrete operator norm. Other p use the largest
    ratio ||A f||_p / ||f||_p over ``lp_test_family``, a lower estimate.
    """
    if not (1.0 < p < np.inf):
        raise ProbeError("p must lie in (1, inf)")
    grids = _schedule(schedule)
    tol = (0.10 if p == 2 else 0.15) if tol is None else tol
    vals = []
    for g in grids:
        A = materialize_matrix(s, g)
        if p == 2:
            vals.append(op_norm_L2(A))
        else:
            F = lp_test_family(g)
            AF = A.entries @ F
            vals.append(float(np.max(_lp(AF, p, g.dt) / _lp(F, p, g.dt))))
    var = _variation(vals)
    return ProbeReport("cv_boundedness", s.name, [[g.T, g.M] for g in grids],
                       {"p": p, "norm": vals, "variation": var},
                       "stable" if var <= tol else "unstable", tol,
                       {"growth": float(vals[-1] / vals[0]) if vals[0] else np.inf})


def bessel_matrix(grid: TGrid, r: float) -> np.ndarray:
    """Dense (1 - Delta_G)^{r/2} on the grid (x-independent multiplier)."""
    E = np.exp(2j * np.pi * np.outer(grid.t1, grid.xi1))
    if grid.n != 1:
        raise ProbeError("Garding probe is implemented for n = 1")
    w = (1.0 + 4 * np.pi ** 2 * grid.xi1 ** 2) ** (r / 2.0)
    return (E * w) @ E.conj().T * (grid.dt * grid.dxi)


def garding_probe(s: Symbol, schedule=DEFAULT_SCHEDULE, shift: float | None = None,
                  drift: float = 0.10, atol: float = 1e-8) -> ProbeReport:
    """Lower-bound constant for Re(Op(s) u, u) in the H^shift norm.

    C_est = max(0, -lambda_min(S^{-1/2} A_h S^{-1/2})) with A_h the
    Hermitian part and S the Bessel multiplier of order 2 * shift. The
    default shift (m - (rho - delta)) / 2 is the sharp Garding scaling.
    """
    grids = _schedule(schedule)
    if shift is None:
        shift = (s.order - (s.rho - s.delta)) / 2.0
    Cs, lams = [], []
    for g in grids:
        tab = symbol_table(s, g)
        if s.nu == 1:
            neg = float(np.min(tab.real))
            imag = float(np.max(np.abs(tab.imag)))
            if neg < -1e-12 * max(1.0, np.abs(tab).max()) or imag > 1e-12 * max(1.0, np.abs(tab).max()):
                raise ProbeError(f"symbol {s.name!r} is not nonnegative on the grid (min {neg:.3g})")
        A = materialize_matrix(s, g).entries
        Ah = 0.5 * (A + A.conj().T)
        Sm = bessel_matrix(g, -shift)
        B = Sm @ Ah @ Sm
        lam = float(np.linalg.eigvalsh(0.5 * (B + B.conj().T)).min())
        lams.append(lam)
        Cs.append(max(0.0, -lam))
    ok = all(c2 <= c1 * (1 + drift) + atol for c1, c2 in zip(Cs, Cs[1:]))
    last = abs(Cs[-1] - Cs[-2]) <= drift * max(Cs[-1], Cs[-2]) + atol
    return ProbeReport("garding", s.name, [[g.T, g.M] for g in grids],
                       {"lambda_min": lams, "C_est": Cs, "shift": shift},
                       "bounded-below" if ok and last else "drifting", drift)


def singular_values(A: OperatorMatrix) -> np.ndarray:
    return np.linalg.svd(A.entries, compute_uv=False)


def compactness_probe(s: Symbol, schedule=DEFAULT_SCHEDULE, ranks=(4, 16, 64),
                      d_est: float | None = None, tail_tol: float = 1e-3) -> ProbeReport:
    """Gohberg-type compactness evidence along a schedule.

    With d = 0 the verdict is compact-evidence when the normalised tail
    sigma_r / sigma_1 at the largest rank stays below ``tail_tol`` on every
    grid, i.e. the singular values decay uniformly in M. With d > 0 it is
    noncompact-evidence when sigma_{r+1} >= 0.9 d for every r up to the
    largest rank on every grid.
    """
    grids = _schedule(schedule, minimum=3)
    if d_est is None:
        d_est = decay_shells(s)[-1][1]
    rmax = max(ranks)
    sv_all, by_rank = [], {r: [] for r in ranks}
    floor = []
    for g in grids:
        sv = singular_values(materialize_matrix(s, g))
        if len(sv) <= rmax:
            raise ProbeError("grid too small for the requested ranks")
        sv_all.append(sv)
        for r in ranks:
            by_rank[r].append(float(sv[r - 1]))
        floor.append(float(sv[: rmax + 1].min()))
    measured = {"d_est": d_est, "sigma": {str(r): v for r, v in by_rank.items()},
                "sigma_1": [float(v[0]) for v in sv_all], "min_sigma_upto_rmax_plus_1": floor}
    details = {"sv_head": [[float(x) for x in v[: rmax + 1]] for v in sv_all]}
    if d_est <= 1e-6:
        tails = [by_rank[rmax][i] / sv_all[i][0] if sv_all[i][0] > 0 else 0.0 for i in range(len(grids))]
        measured["tail_ratio"] = tails
        ok = all(x <= tail_tol for x in tails)
        r16 = by_rank.get(16)
        if r16:
            details["sigma_16_decrease_factor"] = r16[0] / r16[-1] if r16[-1] > 0 else np.inf
        verdict = "compact-evidence" if ok else "inconclusive"
    else:
        ok = all(f >= 0.9 * d_est for f in floor)
        measured["lower_bound"] = min(floor)
        verdict = "noncompact-evidence" if ok else "inconclusive"
    return ProbeReport("compactness", s.name, [[g.T, g.M] for g in grids], measured,
                       verdict, tail_tol if d_est <= 1e-6 else 0.1, details)


def write_singular_values_csv(report: ProbeReport, path) -> None:
    """Rows (M, rank, sigma) from a compactness report."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "M", "rank", "sigma"])
        for (T, M), sv in zip(report.schedule, report.details["sv_head"]):
            for r, v in enumerate(sv, start=1):
                w.writerow([f"{T:.17g}", M, r, f"{v:.17g}"])


# --- index --------------------------------------------------------------------

@dataclass
class IndexReport:
    winding: float
    index: int
    residual: float
    sign_convention: int
    center: tuple
    radius: float
    samples: int
    symbol: str = ""

    def to_dict(self):
        return _clean({"symbol": self.symbol, "winding": self.winding, "index": self.index,
                       "residual": self.residual, "sign_convention": self.sign_convention,
                       "contour": {"center": list(self.center), "radius": self.radius,
                                   "samples": self.samples},
                       "convention": CONVENTION})


def _contour_values(s: Symbol, center, radius, samples, min_sv):
    th = 2 * np.pi * np.arange(samples) / samples
    t = center[0] + radius * np.cos(th)
    xi = center[1] + radius * np.sin(th)
    vals = s.tform(t[:, None], xi[:, None])
    if s.nu > 1:
        sv = np.linalg.svd(vals, compute_uv=False)[:, -1]
        det = np.linalg.det(vals)
    else:
        sv = np.abs(vals)
        det = vals
    bad = np.argmin(sv)
    if sv[bad] < min_sv:
        raise ContourError(f"symbol {s.name!r} is near singular on the contour at "
                           f"theta = {th[bad]:.6f} (min singular value {sv[bad]:.3g})")
    return det


def winding_number(s: Symbol, center=(0.0, 0.0), radius: float = 3.0, samples: int = 1024,
                   max_samples: int = 1 << 20, min_sv: float = 1e-6):
    """(1/2 pi) * total argument increment of det s around the (t, xi) circle.

    The circle is traversed counterclockwise in the (t, xi) plane. Samples
    are doubled until every increment is below pi/4 and one more doubling
    moves the result by at most 1e-8.
    """
    if s.n != 1:
        raise ProbeError("the winding index is implemented for n = 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    S = int(samples)
    prev = None
    while True:
        det = _contour_values(s, center, radius, S, min_sv)
        total, worst = kernels.unwrap_phase_total(det)
        w = total / (2 * np.pi)
        if prev is not None and worst < np.pi / 4 and abs(w - prev) <= 1e-8:
            return w, S
        if S >= max_samples:
            raise ContourError(f"winding did not converge with {S} samples")
        prev = w
        S *= 2


@lru_cache(maxsize=None)
def index_sign_convention() -> int:
    """Global sign tying contour winding to the analytic index.

    Calibrated once: the discretized annihilation operator D + t has a
    one-dimensional kernel and trivial cokernel, so its index is +1.
    """
    s = get_symbol("oscillator")
    w, _ = winding_number(s, (0.0, 0.0), 3.0, 1024)
    kp = fredholm_kernel_probe(materialize_matrix(s, make_grid(8.0, 256)))
    if kp.inconclusive or round(w) == 0:
        raise RuntimeError("index sign calibration failed")
    return int(np.sign((kp.k_plus - kp.k_minus) * round(w)))


def winding_index(s: Symbol, center=(0.0, 0.0), radius: float = 3.0, samples: int = 1024,
                  sign: int | None = None) -> IndexReport:
    sign = index_sign_convention() if sign is None else sign
    w, S = winding_number(s, center, radius, samples)
    k = int(round(w))
    return IndexReport(float(w), sign * k, float(abs(w - k)), sign, tuple(center),
                       float(radius), S, s.name)


@dataclass
class KernelProbe:
    k_plus: int
    k_minus: int
    inconclusive: bool
    gap: float
    smallest: list

    @property
    def index(self):
        return None if self.inconclusive else self.k_plus - self.k_minus

    def as_tuple(self):
        return "inconclusive" if self.inconclusive else (self.k_plus, self.k_minus)


def _interior(vecs, grid: TGrid, nu: int, edge: float, mass: float):
    """Count columns whose mass in the edge zone |t| > edge*T is below ``mass``."""
    t = grid.t_points()
    zone = np.any(np.abs(t) > edge * grid.T, axis=-1)
    zone = np.repeat(zone, nu)
    w = np.abs(vecs) ** 2
    frac = w[zone].sum(axis=0) / w.sum(axis=0)
    return int(np.sum(frac < mass))


def fredholm_kernel_probe(A: OperatorMatrix, threshold: float = 1e-6, gap: float = 10.0,
                          edge: float = 0.75, mass: float = 0.5) -> KernelProbe:
    """Count near-null vectors of A (k+) and of A^* (k-).

    A singular value counts when it is below ``threshold`` * sigma_max and
    separated from the next one by at least ``gap``. A finite matrix has the
    same singular values as its adjoint, so only near-null vectors that
    live in the interior of the t-window count: right singular vectors for
    A, left singular vectors for A^*. Vectors piled up at the window edge
    are truncation artifacts.
    """
    M = A.entries
    if M.shape[0] < 64:
        raise ProbeError("kernel probe needs a matrix of size >= 64")
    U, sv, Vh = np.linalg.svd(M)
    small = np.nonzero(sv < threshold * sv[0])[0]
    tail = [float(x) for x in sv[-4:]]
    if small.size == 0:
        return KernelProbe(0, 0, False, float(sv[-1] and sv[0] / sv[-1]), tail)
    first = small[0]
    if first == 0:
        return KernelProbe(0, 0, True, 1.0, tail)
    g = float(sv[first - 1] / max(sv[first], 1e-300))
    if g < gap:
        return KernelProbe(0, 0, True, g, tail)
    kp = _interior(Vh.conj().T[:, small], A.grid, A.nu, edge, mass)
    km = _interior(U[:, small], A.grid, A.nu, edge, mass)
    return KernelProbe(kp, km, False, g, tail)
