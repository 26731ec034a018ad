"""Gaussian mollification of phase-space functions.

The Husimi measure is the convolution m = f * G with a unit-mass Gaussian at
scale hbar^alpha per phase-space axis; spectrally this is multiplication by
G1_hat(hbar^alpha zeta) = exp(-hbar^{2 alpha} |zeta|^2 / 2), normalized so the
multiplier equals 1 at zeta = 0 (mass exactly preserved). alpha = 1/2 is the
coherent-state scale and keeps the Pauli bounds 0 <= m <= 1; alpha = 1 is the
narrower variant, selectable but not positivity-safe for small hbar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, PhaseSpaceGrid, _centered_fft, _centered_ifft, _grid_spacings
from .wigner import KPhaseFunction


@dataclass(frozen=True)
class MollifierSpec:
    alpha: float = 0.5

    def __post_init__(self):
        if self.alpha not in (0.5, 1.0):
            raise ValueError("mollifier exponent alpha must be 1/2 or 1")


def _multiplier(pgrid: PhaseSpaceGrid, hbar: float, alpha: float) -> np.ndarray:
    xi, eta = pgrid.dual_axes()
    d = pgrid.d
    axes = [xi] * d + [eta] * d
    z2 = 0.0
    nd = 2 * d
    for i, ax in enumerate(axes):
        shape = [1] * nd
        shape[i] = ax.size
        z2 = z2 + (ax ** 2).reshape(shape)
    return np.exp(-(hbar ** (2.0 * alpha)) * z2 / 2.0)


def mollify(f: GridFunction, hbar: float, spec: MollifierSpec = MollifierSpec()) -> GridFunction:
    """Husimi smoothing of a phase-space function; mass is preserved exactly."""
    if not isinstance(f.grid, PhaseSpaceGrid):
        raise ValueError("mollify expects a phase-space function")
    spacings = _grid_spacings(f.grid)
    fhat = _centered_fft(f.values, spacings)
    out = _centered_ifft(fhat * _multiplier(f.grid, hbar, spec.alpha), spacings)
    if not np.iscomplexobj(f.values):
        out = out.real
    return GridFunction(f.grid, out)


def husimi_k(
    fk: "KPhaseFunction | GridFunction",
    N: int,
    k: int,
    hbar: float,
    spec: MollifierSpec = MollifierSpec(),
) -> "KPhaseFunction | GridFunction":
    """Order-k Husimi function: N(N-1).../N^k times the k-fold tensor mollification.

    k = 1 reduces to plain mollification (unit prefactor)."""
    if k == 1:
        if not isinstance(fk, GridFunction):
            raise ValueError("k = 1 expects a one-particle phase-space function")
        return mollify(fk, hbar, spec)
    if k != fk.k or k != 2:
        raise ValueError("order-k mollification implemented for k in {1, 2}")
    pgrid = fk.pgrid
    hs = [pgrid.spatial.spacing, pgrid.momentum.spacing] * 2
    vals = _centered_fft(fk.values, hs)
    mult = _multiplier(pgrid, hbar, spec.alpha)
    vals *= mult[:, :, None, None]
    vals *= mult[None, None, :, :]
    vals = _centered_ifft(vals, hs)
    prefactor = 1.0
    for j in range(k):
        prefactor *= (N - j) / N
    out = prefactor * vals.real
    return KPhaseFunction(pgrid, out, k=k)
