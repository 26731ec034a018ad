"""Orthonormal orbital families for trapped fermions.

Three construction routes: the exact harmonic-trap eigenfunctions via the
stable normalized recurrence, a finite-difference eigensolver for general
traps, and a damped Hartree self-consistency loop for two-body interactions
with nonnegative Fourier transform.

Scaling convention: a state of N particles carries hbar = N^{-1/d}, so the
Fermi momentum and the energy per particle stay O(1) as N grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .grids import SpatialGrid

GRAM_TOL = 1e-10


@dataclass(frozen=True)
class TrapSpec:
    """External trap U(x). `harmonic` is U(x) = |x|^2; `custom` wraps a callable."""

    kind: str = "harmonic"
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("harmonic", "custom"):
            raise ValueError(f"unknown trap kind {self.kind!r}")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom trap needs a callable")

    def sample(self, grid: SpatialGrid) -> np.ndarray:
        meshes = grid.meshes()
        if self.kind == "harmonic":
            return sum(m ** 2 for m in meshes)
        return np.asarray(self.fn(*meshes), dtype=float)


@dataclass(frozen=True)
class InteractionSpec:
    """Even two-body potential V with nonnegative Fourier transform.

    `gaussian`: V(x) = strength * exp(-x^2 / (2 width^2)).
    `soft_coulomb`: V(x) = strength / sqrt(x^2 + width^2).
    """

    kind: str = "none"
    strength: float = 1.0
    width: float = 1.0
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "soft_coulomb", "custom"):
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom interaction needs a callable")

    @property
    def is_none(self) -> bool:
        return self.kind == "none"

    def sample_diff(self, grid: SpatialGrid) -> np.ndarray:
        """V on the difference axis of `grid` (d = 1 only), validated.

        The samples must be even. Slowly decaying kernels are tapered to zero
        over the outer fifth of the box to suppress wrap-around; any residual
        negative Fourier modes from box truncation (relative size up to 1e-4)
        are clipped to zero and the samples rebuilt from the clipped spectrum,
        so the effective potential has a nonnegative transform exactly and the
        direct energy is a nonnegative quadratic form. Larger violations are
        rejected as genuinely inadmissible.
        """
        if grid.d != 1:
            raise ValueError("interaction sampling implemented for d = 1")
        x = grid.axis
        if self.kind == "none":
            return np.zeros_like(x)
        if self.kind == "gaussian":
            v = self.strength * np.exp(-x ** 2 / (2.0 * self.width ** 2))
        elif self.kind == "soft_coulomb":
            v = self.strength / np.sqrt(x ** 2 + self.width ** 2)
        else:
            v = np.asarray(self.fn(x), dtype=float)
        # evenness on the centered grid: x_j and -x_j are both present for j>0
        if not np.allclose(v[1:], v[1:][::-1], rtol=0, atol=1e-12 * max(1.0, np.abs(v).max())):
            raise ValueError("interaction must be even")
        L = grid.half_width
        edge = np.abs(v[0]) / max(np.abs(v).max(), 1e-300)
        if edge > 1e-10:
            taper = np.ones_like(x)
            sel = np.abs(x) > 0.8 * L
            taper[sel] = 0.5 * (1.0 + np.cos(np.pi * (np.abs(x[sel]) - 0.8 * L) / (0.2 * L)))
            v = v * taper
        vhat = np.real(np.fft.fft(np.fft.ifftshift(v)))
        floor = vhat.min()
        if floor < -1e-4 * max(vhat.max(), 1e-300):
            raise ValueError("interaction must have nonnegative Fourier transform")
        if floor < 0.0:
            v = np.fft.fftshift(np.real(np.fft.ifft(np.clip(vhat, 0.0, None))))
        return v


@dataclass
class SlaterState:
    """N orthonormal orbitals on a spatial grid with hbar = N^{-1/d}.

    Orbitals are stored row-wise, shape (N,) + grid.shape. The Gram matrix
    under the grid quadrature is the identity to 1e-10 by construction.
    """

    orbitals: np.ndarray
    N: int
    hbar: float
    grid: SpatialGrid
    energies: np.ndarray | None = None
    scf_converged: bool | None = None
    scf_residuals: tuple[float, ...] | None = None

    def __post_init__(self):
        self.orbitals = np.ascontiguousarray(self.orbitals, dtype=complex)
        if self.orbitals.shape != (self.N,) + self.grid.shape:
            raise ValueError("orbital array shape mismatch")
        expected = self.N ** (-1.0 / self.grid.d)
        if abs(self.hbar - expected) > 1e-12 * expected:
            raise ValueError(f"hbar must equal N^(-1/d) = {expected}")
        g = self.gram()
        err = np.abs(g - np.eye(self.N)).max()
        if err > GRAM_TOL:
            raise ValueError(f"orbitals not orthonormal on the grid (max defect {err:.2e})")

    def gram(self) -> np.ndarray:
        orb = self.orbitals.reshape(self.N, -1)
        return (orb @ orb.conj().T) * self.grid.cell_volume


def _lowdin(orb: np.ndarray, cell: float, cond_floor: float = 1e-8) -> np.ndarray:
    """Symmetric orthonormalization; minimal-change fix of quadrature drift."""
    n_orb = orb.shape[0]
    flat = orb.reshape(n_orb, -1)
    gram = (flat @ flat.conj().T) * cell
    w, v = np.linalg.eigh(gram)
    if w.min() < cond_floor:
        raise ValueError(
            f"orbital family numerically degenerate on this grid "
            f"(Gram eigenvalue {w.min():.2e}); refine the grid"
        )
    half = (v * w ** -0.5) @ v.conj().T
    return (half @ flat).reshape(orb.shape)


def recommended_spatial_n(N: int, half_width: float, base_n: int = 512) -> int:
    """Smallest power-of-two grid (>= base_n) resolving the harmonic Slater state.

    The top orbital oscillates at wavenumber sqrt((2N+1)/hbar) ~ sqrt(2) N;
    the grid Nyquist pi*n/(2L) must clear it plus one evanescent-tail width.
    Residual quadrature drift at this margin stays far below the symmetric
    orthonormalization's conditioning floor.
    """
    hbar = 1.0 / N
    k_need = np.sqrt((2 * N + 1) / hbar) + 1.0 / np.sqrt(hbar)
    n = base_n
    while np.pi * n / (2 * half_width) < k_need:
        n *= 2
    return n


def hermite_basis(N: int, hbar: float, grid: SpatialGrid) -> SlaterState:
    """Lowest N harmonic-trap eigenfunctions for h = -hbar^2 d^2/dx^2 + x^2.

    psi_n(x) = (pi hbar)^{-1/4} (2^n n!)^{-1/2} H_n(x/sqrt(hbar)) e^{-x^2/(2 hbar)},
    evaluated with the normalized three-term recurrence (the Gaussian factor is
    carried inside, so no overflow for large n). Eigenvalues are hbar*(2n+1).

    The sampled family is polished by symmetric orthonormalization so grid
    quadrature sees an exactly orthonormal set; on resolving grids the
    correction is at roundoff level.
    """
    if grid.d != 1:
        raise ValueError("hermite_basis is one-dimensional")
    if N > grid.n // 4:
        raise ValueError(f"resolution guard: N = {N} exceeds n/4 = {grid.n // 4}")
    u = grid.axis / np.sqrt(hbar)
    psi = np.empty((N, grid.n))
    psi[0] = np.pi ** -0.25 * np.exp(-0.5 * u * u)
    if N > 1:
        psi[1] = np.sqrt(2.0) * u * psi[0]
    for n in range(1, N - 1):
        psi[n + 1] = np.sqrt(2.0 / (n + 1)) * u * psi[n] - np.sqrt(n / (n + 1.0)) * psi[n - 1]
    psi = psi * hbar ** -0.25
    orb = _lowdin(psi.astype(complex), grid.cell_volume)
    energies = hbar * (2 * np.arange(N) + 1.0)
    return SlaterState(orb, N, hbar, grid, energies=energies)


def _parity_sign(vec: np.ndarray) -> float:
    """+1 for even-dominant vectors, -1 for odd-dominant."""
    flipped = np.roll(vec[::-1], 1)  # x -> -x on the centered grid
    sym = np.vdot(vec, flipped).real
    return 1.0 if sym >= 0 else -1.0


def solve_trap(U: TrapSpec, N: int, grid: SpatialGrid, hbar: float) -> SlaterState:
    """Lowest N eigenpairs of -hbar^2 d^2/dx^2 + U on the box (Dirichlet walls).

    Second-order finite differences give a symmetric tridiagonal problem;
    eigenvectors are exactly orthonormal under grid quadrature after the
    1/sqrt(h) rescale. Near-degenerate pairs are ordered even before odd, and
    signs are fixed so the leftmost significant lobe is positive.
    """
    if grid.d != 1:
        raise ValueError("solve_trap is one-dimensional")
    if N > grid.n // 4:
        raise ValueError(f"resolution guard: N = {N} exceeds n/4 = {grid.n // 4}")
    h = grid.spacing
    u = U.sample(grid)
    main = 2.0 * hbar ** 2 / h ** 2 + u
    off = np.full(grid.n - 1, -(hbar ** 2) / h ** 2)
    vals, vecs = eigh_tridiagonal(main, off, select="i", select_range=(0, N - 1))
    orb = (vecs / np.sqrt(h)).T.astype(complex)
    # deterministic ordering and signs
    order = np.arange(N)
    for i in range(N - 1):
        if abs(vals[i + 1] - vals[i]) < 1e-10 * max(abs(vals[i]), 1.0):
            if _parity_sign(orb[order[i]]) < _parity_sign(orb[order[i + 1]]):
                order[i], order[i + 1] = order[i + 1], order[i]
    orb = orb[order]
    vals = vals[order]
    for i in range(N):
        v = orb[i].real
        sig = np.nonzero(np.abs(v) > 0.5 * np.abs(v).max())[0]
        if v[sig[0]] < 0:
            orb[i] = -orb[i]
    return SlaterState(orb, N, hbar, grid, energies=vals)


def _convolve_periodic(kernel: np.ndarray, f: np.ndarray, h: float) -> np.ndarray:
    """(kernel * f)(x_j) on the periodic box; kernel sampled on the centered axis."""
    return np.real(np.fft.ifft(np.fft.fft(np.fft.ifftshift(kernel)) * np.fft.fft(f))) * h


def scf_slater(
    U: TrapSpec,
    V: InteractionSpec,
    N: int,
    grid: SpatialGrid,
    mixing: float = 0.3,
    max_iter: int = 200,
    tol: float = 1e-8,
) -> SlaterState:
    """Hartree self-consistency: solve_trap with U + V * rho, linearly mixed.

    The exchange term is omitted from the effective potential (it is retained
    in slater_energy). Returns the last iterate; `scf_converged` records
    whether the L1 residual dropped below tol within max_iter iterations.
    """
    if not 0.0 < mixing <= 1.0:
        raise ValueError("mixing must lie in (0, 1]")
    if V.is_none:
        state = solve_trap(U, N, grid, hbar=N ** (-1.0 / grid.d))
        state.scf_converged = True
        state.scf_residuals = ()
        return state
    hbar = N ** (-1.0 / grid.d)
    v = V.sample_diff(grid)
    h = grid.spacing
    state = solve_trap(U, N, grid, hbar)
    rho = np.sum(np.abs(state.orbitals) ** 2, axis=0).real / N
    u0 = U.sample(grid)
    residuals: list[float] = []
    converged = False
    for _ in range(max_iter):
        u_eff = u0 + _convolve_periodic(v, rho, h)
        main = 2.0 * hbar ** 2 / h ** 2 + u_eff
        off = np.full(grid.n - 1, -(hbar ** 2) / h ** 2)
        vals, vecs = eigh_tridiagonal(main, off, select="i", select_range=(0, N - 1))
        orb = (vecs / np.sqrt(h)).T.astype(complex)
        rho_new = np.sum(np.abs(orb) ** 2, axis=0).real / N
        res = float(np.sum(np.abs(rho_new - rho)) * h)
        residuals.append(res)
        state = SlaterState(orb, N, hbar, grid, energies=vals)
        if res < tol:
            converged = True
            break
        rho = (1.0 - mixing) * rho + mixing * rho_new
    state.scf_converged = converged
    state.scf_residuals = tuple(residuals)
    return state


def _fft_wavenumbers(n: int, h: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, h)


def _spectral_gradient_sq(orb: np.ndarray, grid: SpatialGrid) -> float:
    """sum_i ||grad phi_i||^2 by spectral differentiation on the periodic box."""
    total = 0.0
    n = grid.n
    k = _fft_wavenumbers(n, grid.spacing)
    if grid.d == 1:
        dhat = np.fft.fft(orb, axis=1) * (1j * k)[None, :]
        total = np.sum(np.abs(np.fft.ifft(dhat, axis=1)) ** 2) * grid.cell_volume
    else:
        for ax in (1, 2):
            shape = [1, 1, 1]
            shape[ax] = n
            dhat = np.fft.fft(orb, axis=ax) * (1j * k).reshape(shape)
            total += np.sum(np.abs(np.fft.ifft(dhat, axis=ax)) ** 2) * grid.cell_volume
    return float(total)


def slater_energy(state: SlaterState, U: TrapSpec, V: InteractionSpec) -> float:
    """Expectation of the scaled Hamiltonian in the Slater state.

    Tr((p^2 + U) gamma) + (1/2N) iint V(x-y) [gamma(x,x)gamma(y,y) - |gamma(x,y)|^2],
    kinetic part spectral. The direct term is evaluated through the spectral
    convolution, so V_hat >= 0 makes it nonnegative; for N = 1 direct and
    exchange cancel exactly.
    """
    grid = state.grid
    kinetic = state.hbar ** 2 * _spectral_gradient_sq(state.orbitals, grid)
    u = U.sample(grid)
    dens = np.sum(np.abs(state.orbitals) ** 2, axis=0).real
    potential = float(np.sum(u * dens) * grid.cell_volume)
    if V.is_none:
        return kinetic + potential
    if grid.d != 1:
        raise ValueError("interacting energy implemented for d = 1")
    v = V.sample_diff(grid)
    h = grid.spacing
    direct = 0.5 / state.N * float(np.sum(dens * _convolve_periodic(v, dens, h)) * h)
    orb = state.orbitals
    gamma = orb.T @ orb.conj()
    idx = np.abs(np.subtract.outer(np.arange(grid.n), np.arange(grid.n)))
    vmat = _interaction_values(V, idx * h)
    exchange = 0.5 / state.N * float(np.sum(vmat * np.abs(gamma) ** 2) * h * h)
    return kinetic + potential + direct - exchange


def _interaction_values(V: InteractionSpec, r: np.ndarray) -> np.ndarray:
    if V.kind == "gaussian":
        return V.strength * np.exp(-r ** 2 / (2.0 * V.width ** 2))
    if V.kind == "soft_coulomb":
        return V.strength / np.sqrt(r ** 2 + V.width ** 2)
    if V.kind == "custom":
        return np.asarray(V.fn(r), dtype=float)
    return np.zeros_like(r)


def dump_orbitals(state: SlaterState, directory, field_name: str):
    """Binary orbital dump: one complex record per orbital (real plane then
    imaginary plane), little-endian float64, with a JSON sidecar."""
    import json
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / f"{field_name}.bin", "wb") as fh:
        for phi in state.orbitals:
            phi.real.astype("<f8").tofile(fh)
            phi.imag.astype("<f8").tofile(fh)
    meta = {
        "d": state.grid.d,
        "L_x": state.grid.half_width,
        "n_x": state.grid.n,
        "N": state.N,
        "hbar": state.hbar,
        "field_name": field_name,
        "kind": "orbitals",
    }
    with open(directory / f"{field_name}.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return directory / f"{field_name}.bin"


def load_orbitals(directory, field_name: str) -> SlaterState:
    import json
    from pathlib import Path

    directory = Path(directory)
    with open(directory / f"{field_name}.json") as fh:
        meta = json.load(fh)
    grid = SpatialGrid(meta["d"], meta["L_x"], meta["n_x"])
    raw = np.fromfile(directory / f"{field_name}.bin", dtype="<f8")
    per = int(np.prod(grid.shape))
    orb = np.empty((meta["N"],) + grid.shape, dtype=complex)
    for i in range(meta["N"]):
        block = raw[2 * i * per:(2 * i + 2) * per]
        orb[i] = (block[:per] + 1j * block[per:]).reshape(grid.shape)
    return SlaterState(orb, meta["N"], meta["hbar"], grid)
