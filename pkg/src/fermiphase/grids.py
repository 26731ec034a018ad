"""Uniform spatial and phase-space grids, quadrature, and Fourier transforms.

All transforms use the unitary convention

    g_hat(zeta) = (2 pi)^{-n/2} * integral e^{-i zeta.z} g(z) dz

realized by centered FFTs on grids x_j = -L + j*h (j = 0..n-1) with dual
frequencies zeta_k = (k - n/2) * pi / L, |zeta|_max = pi / h per axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform tensor grid on [-half_width, half_width)^d, n points per axis."""

    d: int
    half_width: float
    n: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"full grids support d in {{1, 2}}, got d={self.d}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.n < 8 or not _is_pow2(self.n):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.spacing

    @property
    def dual_axis(self) -> np.ndarray:
        # |zeta|_max = pi / spacing
        return (np.arange(self.n) - self.n // 2) * (np.pi / self.half_width)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.d

    def meshes(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis] * self.d), indexing="ij")

    def refine(self, factor: int) -> "SpatialGrid":
        return SpatialGrid(self.d, self.half_width, self.n * factor)

    def is_refinement_of(self, other: "SpatialGrid") -> bool:
        """True if this grid contains every point of `other` (same box)."""
        return (
            self.d == other.d
            and self.half_width == other.half_width
            and self.n % other.n == 0
        )


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Product of a spatial grid (x) and a momentum grid (p) of equal d."""

    spatial: SpatialGrid
    momentum: SpatialGrid

    def __post_init__(self):
        if self.spatial.d != self.momentum.d:
            raise ValueError("spatial and momentum grids must share d")

    @property
    def d(self) -> int:
        return self.spatial.d

    @property
    def shape(self) -> tuple[int, ...]:
        return self.spatial.shape + self.momentum.shape

    @property
    def cell_volume(self) -> float:
        return self.spatial.cell_volume * self.momentum.cell_volume

    def meshes(self) -> tuple[np.ndarray, ...]:
        axes = [self.spatial.axis] * self.d + [self.momentum.axis] * self.d
        return np.meshgrid(*axes, indexing="ij")

    def dual_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """(xi, eta): frequencies dual to x and p respectively."""
        return self.spatial.dual_axis, self.momentum.dual_axis


@dataclass
class GridFunction:
    """Real or complex samples attached to a grid."""

    grid: "SpatialGrid | PhaseSpaceGrid"
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function contains non-finite values")


def make_phase_grid(d: int, L_x: float, L_p: float, n_x: int, n_p: int) -> PhaseSpaceGrid:
    return PhaseSpaceGrid(SpatialGrid(d, L_x, n_x), SpatialGrid(d, L_p, n_p))


def integrate(f: GridFunction) -> float | complex:
    """Rectangle-rule integral: sum of samples times cell volume."""
    total = f.values.sum() * f.grid.cell_volume
    if np.iscomplexobj(f.values):
        return complex(total)
    return float(total)


def _centered_fft(values: np.ndarray, spacings: list[float]) -> np.ndarray:
    """DFT approximating the continuum transform on centered grids.

    F(zeta_k) = sum_j f(x_j) e^{-i zeta_k x_j} prod(h)
    with x_j = (j - n/2) h and zeta_k = (k - n/2) 2 pi/(n h) per axis.
    Valid for n divisible by 4 (guaranteed by the power-of-two >= 8 rule).
    """
    out = np.asarray(values, dtype=complex)
    ndim = out.ndim
    if len(spacings) != ndim:
        raise ValueError("need one spacing per axis")
    for ax, h in enumerate(spacings):
        n = out.shape[ax]
        if n % 4 != 0:
            raise ValueError("centered FFT requires axis lengths divisible by 4")
        sign = (-1.0) ** np.arange(n)
        shape = [1] * ndim
        shape[ax] = n
        sign = sign.reshape(shape)
        out = sign * np.fft.fft(sign * out, axis=ax) * h
    return out


def _centered_ifft(values: np.ndarray, spacings: list[float]) -> np.ndarray:
    """Inverse of :func:`_centered_fft` (same grids, same spacings)."""
    out = np.asarray(values, dtype=complex)
    ndim = out.ndim
    for ax, h in enumerate(spacings):
        n = out.shape[ax]
        if n % 4 != 0:
            raise ValueError("centered FFT requires axis lengths divisible by 4")
        sign = (-1.0) ** np.arange(n)
        shape = [1] * ndim
        shape[ax] = n
        sign = sign.reshape(shape)
        # dual spacing is 2 pi/(n h); forward-in-dual = inverse-in-primal * n h / (2 pi)
        out = sign * np.fft.ifft(sign * out, axis=ax) / h
    return out


def _grid_spacings(grid) -> list[float]:
    if isinstance(grid, SpatialGrid):
        return [grid.spacing] * grid.d
    return [grid.spatial.spacing] * grid.d + [grid.momentum.spacing] * grid.d


def fourier_phase(f: GridFunction) -> GridFunction:
    """Transform to the dual grid with the (2 pi)^{-n/2} prefactor.

    The output lives on the dual frequency grid; axis k of the output
    corresponds to the dual axis of input axis k (zeta = (xi, eta) for a
    phase-space input).
    """
    spacings = _grid_spacings(f.grid)
    ndim = len(spacings)
    vals = _centered_fft(f.values, spacings) * TWO_PI ** (-ndim / 2.0)
    dual = _dual_grid(f.grid)
    return GridFunction(dual, vals)


def inverse_fourier_phase(fhat: GridFunction, grid) -> GridFunction:
    """Invert :func:`fourier_phase` back onto `grid`."""
    spacings = _grid_spacings(grid)
    ndim = len(spacings)
    vals = _centered_ifft(fhat.values * TWO_PI ** (ndim / 2.0), spacings)
    return GridFunction(grid, vals)


def _dual_grid(grid):
    """Grid object holding the dual axes (spacings pi/half_width per axis)."""
    def dualize(g: SpatialGrid) -> SpatialGrid:
        # dual axis: spacing pi/L, half-width pi/h
        return SpatialGrid(g.d, np.pi / g.spacing, g.n)

    if isinstance(grid, SpatialGrid):
        return dualize(grid)
    return PhaseSpaceGrid(dualize(grid.spatial), dualize(grid.momentum))


# ---------------------------------------------------------------------------
# binary dumps: row-major little-endian float64 + JSON sidecar
# ---------------------------------------------------------------------------

def dump_grid_function(f: GridFunction, directory: str | Path, field_name: str) -> Path:
    """Write `<field_name>.bin` (float64 LE, complex as two planes) + sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    binpath = directory / f"{field_name}.bin"
    vals = f.values
    complex_data = bool(np.iscomplexobj(vals))
    with open(binpath, "wb") as fh:
        if complex_data:
            vals.real.astype("<f8").tofile(fh)
            vals.imag.astype("<f8").tofile(fh)
        else:
            vals.astype("<f8").tofile(fh)
    if isinstance(f.grid, PhaseSpaceGrid):
        meta = {
            "d": f.grid.d,
            "L_x": f.grid.spatial.half_width,
            "L_p": f.grid.momentum.half_width,
            "n_x": f.grid.spatial.n,
            "n_p": f.grid.momentum.n,
            "field_name": field_name,
            "complex": complex_data,
            "kind": "phase",
        }
    else:
        meta = {
            "d": f.grid.d,
            "L_x": f.grid.half_width,
            "L_p": None,
            "n_x": f.grid.n,
            "n_p": None,
            "field_name": field_name,
            "complex": complex_data,
            "kind": "spatial",
        }
    with open(directory / f"{field_name}.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return binpath


def load_grid_function(directory: str | Path, field_name: str) -> GridFunction:
    directory = Path(directory)
    with open(directory / f"{field_name}.json") as fh:
        meta = json.load(fh)
    if meta["kind"] == "phase":
        grid = make_phase_grid(meta["d"], meta["L_x"], meta["L_p"], meta["n_x"], meta["n_p"])
    else:
        grid = SpatialGrid(meta["d"], meta["L_x"], meta["n_x"])
    raw = np.fromfile(directory / f"{field_name}.bin", dtype="<f8")
    size = int(np.prod(grid.shape))
    if meta["complex"]:
        vals = raw[:size].reshape(grid.shape) + 1j * raw[size:].reshape(grid.shape)
    else:
        vals = raw.reshape(grid.shape)
    return GridFunction(grid, vals)
