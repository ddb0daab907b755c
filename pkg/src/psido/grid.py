"""Uniform t-grids and the group Fourier transform on G.

Transform convention ("C1"): the forward transform is

    F_G f(xi) = int_G exp(-2 pi i t(x).xi) f(x) dmu_G(x),

which is the Euclidean transform of the t-pullback, and the inverse is

    f(x) = int exp(2 pi i t(x).xi) F_G f(xi) dxi.

On a grid with nodes t_j = -T + j dt and xi_k = k / (2T) both are evaluated
exactly by a power-of-two DFT; the pair is then exactly unitary.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .group import map_x

CONVENTION = "C1-v1"
EDGE_DECAY_RATIO = 1e-10
MAX_DFIELD_ORDER = 8


class GridConfigError(ValueError):
    pass


class EdgeDecayWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TGrid:
    """Truncated uniform lattice in t with mirrored x-nodes.

    Attributes
    ----------
    T : float
        Half-width of the t-window; nodes cover [-T, T).
    M : int
        Nodes per axis (power of two, at least 8).
    n : int
        Dimension, 1 or 2.
    """

    T: float
    M: int
    n: int = 1
    t1: np.ndarray = field(init=False, repr=False, compare=False)
    xi1: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise GridConfigError(f"T must be positive, got {self.T}")
        M = int(self.M)
        if M != self.M or M < 8 or M & (M - 1):
            raise GridConfigError(f"M must be a power of two >= 8, got {self.M}")
        if self.n not in (1, 2):
            raise GridConfigError(f"n must be 1 or 2, got {self.n}")
        dt = 2.0 * self.T / M
        object.__setattr__(self, "t1", -self.T + dt * np.arange(M))
        object.__setattr__(self, "xi1", np.arange(-M // 2, M // 2) / (2.0 * self.T))

    @property
    def dt(self) -> float:
        return 2.0 * self.T / self.M

    @property
    def dxi(self) -> float:
        return 1.0 / (2.0 * self.T)

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.n

    @property
    def size(self) -> int:
        return self.M ** self.n

    @property
    def x1(self) -> np.ndarray:
        return map_x(self.t1)

    @property
    def weight(self) -> float:
        """Quadrature weight of one node against dmu_G (dt^n by change of variables)."""
        return self.dt ** self.n

    @property
    def xi_max(self) -> float:
        return self.M / (4.0 * self.T)

    def t_mesh(self) -> np.ndarray:
        """Node coordinates, shape ``grid.shape + (n,)``."""
        return np.stack(np.meshgrid(*([self.t1] * self.n), indexing="ij"), axis=-1)

    def xi_mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(*([self.xi1] * self.n), indexing="ij"), axis=-1)

    def t_points(self) -> np.ndarray:
        """Flattened node coordinates, shape (M^n, n)."""
        return self.t_mesh().reshape(-1, self.n)

    def xi_points(self) -> np.ndarray:
        return self.xi_mesh().reshape(-1, self.n)

    def spec(self) -> dict:
        return {"T": float(self.T), "M": int(self.M), "n": int(self.n)}


def make_grid(T: float, M: int, n: int = 1) -> TGrid:
    return TGrid(float(T), M, n)


@dataclass
class GFunction:
    """Complex samples of a function on G at the grid nodes.

    ``values`` has shape ``grid.shape`` for scalar functions and
    ``grid.shape + (nu,)`` for vector-valued ones.
    """

    grid: TGrid
    values: np.ndarray
    nu: int = 1

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        _check_shape(self.grid, self.values, self.nu)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GFunction values must be finite")

    def __add__(self, other):
        _same_grid(self, other)
        return GFunction(self.grid, self.values + other.values, self.nu)

    def __sub__(self, other):
        _same_grid(self, other)
        return GFunction(self.grid, self.values - other.values, self.nu)

    def __mul__(self, c):
        return GFunction(self.grid, self.values * c, self.nu)

    __rmul__ = __mul__

    def flat(self) -> np.ndarray:
        return self.values.reshape(self.grid.size, self.nu) if self.nu > 1 else self.values.reshape(-1)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.weight))

    def lp_norm(self, p: float) -> float:
        if np.isinf(p):
            return float(np.abs(self.values).max())
        return float((np.sum(np.abs(self.values) ** p) * self.grid.weight) ** (1.0 / p))


@dataclass
class Spectrum:
    """Samples of F_G f at the frequency nodes of a grid."""

    grid: TGrid
    values: np.ndarray
    nu: int = 1

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        _check_shape(self.grid, self.values, self.nu)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Spectrum values must be finite")

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dxi ** self.grid.n))


def _check_shape(grid, values, nu):
    expected = grid.shape + ((nu,) if nu > 1 else ())
    if values.shape != expected:
        raise ValueError(f"values shape {values.shape} does not match grid {expected}")


def _same_grid(a, b):
    if a.grid != b.grid or a.nu != b.nu:
        raise ValueError("grid or component mismatch")


def sample(grid: TGrid, func, nu: int = 1) -> GFunction:
    """Sample the t-pullback of ``func``: values func(t_j) at the nodes.

    ``func`` receives an array of shape ``grid.shape + (n,)`` in t-coordinates.
    """
    return GFunction(grid, func(grid.t_mesh()), nu)


def _sign_pattern(grid: TGrid) -> np.ndarray:
    # exp(-2 pi i t_0 xi_k) = (-1)^k for t_0 = -T, xi_k = k / 2T
    k = np.arange(-grid.M // 2, grid.M // 2)
    s1 = np.where(k % 2 == 0, 1.0, -1.0)
    out = s1
    for _ in range(grid.n - 1):
        out = np.multiply.outer(out, s1)
    return out


def _axes(grid):
    return tuple(range(grid.n))


def _edge_ratio(grid: TGrid, values: np.ndarray) -> float:
    mags = np.abs(values)
    top = mags.max()
    if top == 0:
        return 0.0
    edge = 0.0
    for ax in range(grid.n):
        edge = max(edge, np.take(mags, 0, axis=ax).max(), np.take(mags, -1, axis=ax).max())
    return float(edge / top)


def check_edge_decay(f: GFunction) -> float:
    ratio = _edge_ratio(f.grid, f.values)
    if ratio > EDGE_DECAY_RATIO:
        warnings.warn(f"input does not decay at the grid edge (edge/max = {ratio:.2e})",
                      EdgeDecayWarning, stacklevel=3)
    return ratio


def fourier_G(f: GFunction, check_edges: bool = True) -> Spectrum:
    """Group Fourier transform evaluated at the frequency nodes."""
    grid = f.grid
    if check_edges:
        check_edge_decay(f)
    axes = _axes(grid)
    F = np.fft.fftshift(np.fft.fftn(f.values, axes=axes), axes=axes)
    sign = _sign_pattern(grid)
    if f.nu > 1:
        sign = sign[..., None]
    return Spectrum(grid, F * sign * grid.weight, f.nu)


def inv_fourier_G(s: Spectrum) -> GFunction:
    """Inverse group Fourier transform back to node samples."""
    grid = s.grid
    axes = _axes(grid)
    sign = _sign_pattern(grid)
    if s.nu > 1:
        sign = sign[..., None]
    G = np.fft.ifftn(np.fft.ifftshift(s.values * sign, axes=axes), axes=axes)
    # ifftn carries 1 / M^n, and M dxi = 1 / dt
    return GFunction(grid, G * (grid.M * grid.dxi) ** grid.n, s.nu)


def frequency_symbol_dfield(grid: TGrid, alpha) -> np.ndarray:
    """(2 pi i xi)^alpha on the frequency mesh."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != grid.n:
        raise ValueError("multi-index length must equal grid dimension")
    if any(a < 0 for a in alpha) or sum(alpha) > MAX_DFIELD_ORDER:
        raise ValueError(f"derivative order must be in [0, {MAX_DFIELD_ORDER}]")
    xi = grid.xi_mesh()
    out = np.ones(grid.shape, dtype=complex)
    for j, a in enumerate(alpha):
        if a:
            out = out * (2j * np.pi * xi[..., j]) ** a
    return out


def dfield(f: GFunction, alpha, check_edges: bool = False) -> GFunction:
    """Apply the canonical vector fields D^alpha, D_j = -(1 - x_j^2) d/dx_j.

    Realised spectrally: D_j intertwines with d/dt_j, whose multiplier under
    the C1 transform is 2 pi i xi_j.
    """
    mult = frequency_symbol_dfield(f.grid, alpha)
    if not np.any(np.atleast_1d(alpha)):
        return GFunction(f.grid, f.values.copy(), f.nu)
    spec = fourier_G(f, check_edges=check_edges)
    if f.nu > 1:
        mult = mult[..., None]
    return inv_fourier_G(Spectrum(f.grid, spec.values * mult, f.nu))


def plancherel_constant(grid: TGrid, trials: int = 1, seed: int = 0,
                        variant: str = "c1", functions=None) -> float:
    """Measure ||F_G f||^2_{L2(dxi)} / ||f||^2_{L2(G)} averaged over test functions.

    ``variant="c1"`` uses the transform above. ``variant="half"`` uses the
    half-frequency reading xi -> F_G f(xi / 2), evaluated by direct quadrature
    at the halved nodes; it measures 2^n.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if functions is None:
        functions = random_bandlimited(grid, trials, seed)
    ratios = []
    for f in functions:
        if variant == "c1":
            num = fourier_G(f, check_edges=False).l2_norm() ** 2
        elif variant == "half":
            num = np.sum(np.abs(direct_transform(f, grid.xi_points() / 2.0)) ** 2) * grid.dxi ** grid.n
        else:
            raise ValueError(f"unknown variant {variant!r}")
        ratios.append(num / f.l2_norm() ** 2)
    return float(np.mean(ratios))


def direct_transform(f: GFunction, xi_points: np.ndarray) -> np.ndarray:
    """Rectangle-rule quadrature of F_G f at arbitrary frequencies (oracle path)."""
    t = f.grid.t_points()
    phase = np.exp(-2j * np.pi * (np.asarray(xi_points) @ t.T))
    return phase @ f.values.reshape(-1) * f.grid.weight


def random_bandlimited(grid: TGrid, count: int, seed: int = 0, band_fraction: float = 0.25):
    """Random functions whose spectrum lives in |xi| <= band_fraction * xi_max.

    The spectra are smooth (Gaussian-tapered) so the functions also decay at
    the window edge.
    """
    rng = np.random.default_rng(seed)
    xi = grid.xi_mesh()
    r2 = np.sum(xi ** 2, axis=-1)
    cut = band_fraction * grid.xi_max
    out = []
    for _ in range(count):
        # random Gaussian packets: decaying in t, band-limited in xi
        vals = np.zeros(grid.shape, dtype=complex)
        tm = grid.t_mesh()
        for _ in range(4):
            c = rng.uniform(-grid.T / 3, grid.T / 3, size=grid.n)
            k0 = rng.uniform(-cut / 2, cut / 2, size=grid.n)
            w = rng.uniform(0.7, 1.5)
            amp = rng.normal() + 1j * rng.normal()
            d2 = np.sum((tm - c) ** 2, axis=-1)
            vals += amp * np.exp(-np.pi * d2 / w ** 2) * np.exp(2j * np.pi * (tm @ k0))
        spec = fourier_G(GFunction(grid, vals), check_edges=False)
        spec.values[r2 > cut ** 2] = 0.0
        out.append(inv_fourier_G(spec))
    return out


# --- serialization -------------------------------------------------------

def save_csv(obj, path, kind: str | None = None) -> None:
    """Write a GFunction or Spectrum as CSV plus a JSON sidecar.

    GFunction rows are (t..., x..., [component], re, im); Spectrum rows are
    (xi..., [component], re, im). Values use 17 significant digits.
    """
    path = Path(path)
    grid = obj.grid
    if kind is None:
        kind = "spectrum" if isinstance(obj, Spectrum) else "gfunction"
    n = grid.n
    if kind == "gfunction":
        coords = grid.t_points()
        header = [f"t{j + 1}" if n > 1 else "t" for j in range(n)] + \
                 [f"x{j + 1}" if n > 1 else "x" for j in range(n)]
        rows_coord = np.hstack([coords, map_x(coords.reshape(-1)).reshape(coords.shape)])
    else:
        rows_coord = grid.xi_points()
        header = [f"xi{j + 1}" if n > 1 else "xi" for j in range(n)]
    vals = obj.values.reshape(grid.size, obj.nu)
    if obj.nu > 1:
        header = header + ["component"]
    header = header + ["re", "im"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(grid.size):
            for c in range(obj.nu):
                row = [f"{v:.17g}" for v in rows_coord[i]]
                if obj.nu > 1:
                    row.append(str(c))
                row += [f"{vals[i, c].real:.17g}", f"{vals[i, c].imag:.17g}"]
                w.writerow(row)
    sidecar = {**grid.spec(), "nu": obj.nu, "kind": kind, "convention": CONVENTION}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def load_csv(path):
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    grid = make_grid(meta["T"], meta["M"], meta["n"])
    nu = int(meta["nu"])
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    data = np.array([[float(v) for v in r[-2:]] for r in rows])
    vals = (data[:, 0] + 1j * data[:, 1]).reshape(grid.size, nu)
    vals = vals.reshape(grid.shape + ((nu,) if nu > 1 else ()))
    cls = Spectrum if meta["kind"] == "spectrum" else GFunction
    return cls(grid, vals, nu)
