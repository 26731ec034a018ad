"""Reduced density matrices of Slater states.

The one-particle kernel gamma(x, x') = sum_i phi_i(x) conj(phi_i(x')) is a
rank-N orthogonal projection under grid quadrature: Tr gamma = N,
gamma o gamma = gamma, ||gamma||_HS = sqrt(N). Order-k objects are kept lazy
(their traces and Hilbert-Schmidt norms are exact combinatorial integers);
only k = 2 is materialized densely, on a coarse subgrid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, SpatialGrid
from .orbitals import SlaterState, _fft_wavenumbers


@dataclass
class DensityKernel:
    """Complex kernel gamma(x_i, x_j) on a 1-d spatial grid.

    When built from a Slater state the orbital factorization is kept; fast
    paths (Wigner transform, Groenewold traces) use it, and generic consumers
    fall back to the dense matrix.
    """

    grid: SpatialGrid
    values: np.ndarray
    N: int
    hbar: float
    orbitals: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.grid.d != 1:
            raise ValueError("dense kernels are one-dimensional")
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError("kernel must be n x n on its grid")
        herm = np.abs(self.values - self.values.conj().T).max()
        scale = max(np.abs(self.values).max(), 1e-300)
        if herm > 1e-12 * scale:
            raise ValueError(f"kernel not Hermitian (defect {herm:.2e})")

    def trace(self) -> float:
        return float(np.real(np.trace(self.values)) * self.grid.cell_volume)

    def hs_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.grid.cell_volume)

    def compose(self, other: "DensityKernel") -> np.ndarray:
        """Quadrature operator composition (gamma o rho)(x, x')."""
        return self.values @ other.values * self.grid.cell_volume


def gamma1(state: SlaterState) -> DensityKernel:
    """One-particle reduced density matrix of a Slater state."""
    orb = state.orbitals
    values = orb.T @ orb.conj()
    return DensityKernel(state.grid, values, state.N, state.hbar, orbitals=orb)


def density_from_gamma(gamma: DensityKernel) -> GridFunction:
    """Position density rho(x) = gamma(x, x)/N; nonnegative, unit mass."""
    rho = np.real(np.diagonal(gamma.values)).copy() / gamma.N
    rho[rho < 0] = 0.0  # clip quadrature-level negatives
    return GridFunction(gamma.grid, rho)


def moment_trace(state: SlaterState) -> float:
    """Tr((x^2 + p^2) gamma) = sum_i <x^2>_i + hbar^2 ||grad phi_i||^2."""
    grid = state.grid
    if grid.d not in (1, 2):
        raise ValueError("moment_trace supports d in {1, 2}")
    meshes = grid.meshes()
    x2 = sum(m ** 2 for m in meshes)
    dens = np.sum(np.abs(state.orbitals) ** 2, axis=0).real
    pos = float(np.sum(x2 * dens) * grid.cell_volume)
    kin = 0.0
    k = _fft_wavenumbers(grid.n, grid.spacing)
    for ax in range(grid.d):
        shape = [1] * (grid.d + 1)
        shape[ax + 1] = grid.n
        dhat = np.fft.fft(state.orbitals, axis=ax + 1) * (1j * k).reshape(shape)
        kin += np.sum(np.abs(np.fft.ifft(dhat, axis=ax + 1)) ** 2) * grid.cell_volume
    return pos + state.hbar ** 2 * float(kin)


def gamma_k_hs_sq(N: int, k: int) -> int:
    """||gamma^(k)||_HS^2 = k! N!/(N-k)! exactly, as an integer."""
    if not 1 <= k <= N:
        raise ValueError("need 1 <= k <= N")
    return math.factorial(k) * math.factorial(N) // math.factorial(N - k)


@dataclass
class KParticleDensity:
    """Lazy order-k reduced density matrix of a Slater state."""

    state: SlaterState
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.state.N:
            raise ValueError("need 1 <= k <= N")

    def trace(self) -> int:
        n, k = self.state.N, self.k
        return math.factorial(n) // math.factorial(n - k)

    def hs_norm_sq(self) -> int:
        return gamma_k_hs_sq(self.state.N, self.k)


def _restrict_orbitals(state: SlaterState, subgrid: SpatialGrid) -> np.ndarray:
    if not state.grid.is_refinement_of(subgrid):
        raise ValueError("subgrid points must be a subset of the state grid")
    stride = state.grid.n // subgrid.n
    return state.orbitals[:, ::stride]


def gamma_k_kernel(state: SlaterState, k: int, subgrid: SpatialGrid) -> np.ndarray:
    """Dense order-k kernel on (subgrid)^k, as an (m^k, m^k) matrix.

    Only k in {1, 2} is materialized. For k = 2 the Slater-determinant
    identity gamma2((x1,x2),(y1,y2)) = g(x1,y1)g(x2,y2) - g(x1,y2)g(x2,y1)
    with g the one-particle kernel is used; it equals the antisymmetrized
    wedge expansion and carries trace N(N-1) up to quadrature.
    """
    if k not in (1, 2):
        raise ValueError("dense kernels available for k in {1, 2}")
    if k == 2 and subgrid.n > 64:
        raise ValueError("memory guard: k = 2 needs subgrid n <= 64")
    orb = _restrict_orbitals(state, subgrid)
    g = orb.T @ orb.conj()
    if k == 1:
        return g
    m = subgrid.n
    direct = np.einsum("ac,bd->abcd", g, g)
    exchange = np.einsum("ad,bc->abcd", g, g)
    return (direct - exchange).reshape(m * m, m * m)


def dump_kernel(gamma: DensityKernel, directory, field_name: str):
    """Kernel dump: real plane then imaginary plane, plus a JSON sidecar."""
    import json
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / f"{field_name}.bin", "wb") as fh:
        gamma.values.real.astype("<f8").tofile(fh)
        gamma.values.imag.astype("<f8").tofile(fh)
    meta = {
        "d": gamma.grid.d,
        "L_x": gamma.grid.half_width,
        "n_x": gamma.grid.n,
        "N": gamma.N,
        "hbar": gamma.hbar,
        "field_name": field_name,
        "kind": "kernel",
    }
    with open(directory / f"{field_name}.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return directory / f"{field_name}.bin"


def load_kernel(directory, field_name: str) -> DensityKernel:
    import json
    from pathlib import Path

    directory = Path(directory)
    with open(directory / f"{field_name}.json") as fh:
        meta = json.load(fh)
    grid = SpatialGrid(meta["d"], meta["L_x"], meta["n_x"])
    raw = np.fromfile(directory / f"{field_name}.bin", dtype="<f8")
    per = grid.n * grid.n
    vals = (raw[:per] + 1j * raw[per:]).reshape(grid.n, grid.n)
    return DensityKernel(grid, vals, meta["N"], meta["hbar"])
