import numpy as np
import pytest

from fermiphase import (
    GridFunction,
    KParticleDensity,
    MollifierSpec,
    SpatialGrid,
    gamma1,
    hermite_basis,
    husimi_k,
    make_phase_grid,
    mollify,
    wigner_k,
    wigner_transform,
)

PG = make_phase_grid(1, 8, 8, 256, 256)


def test_mollifier_spec_validation():
    MollifierSpec(0.5)
    MollifierSpec(1.0)
    with pytest.raises(ValueError):
        MollifierSpec(0.7)


def _slater_wigner(N):
    state = hermite_basis(N, 1.0 / N, PG.spatial)
    return wigner_transform(gamma1(state), PG), state.hbar


@pytest.mark.parametrize("N", [2, 8, 16])
def test_pauli_bounds(N):
    f, hbar = _slater_wigner(N)
    m = mollify(f, hbar)
    assert m.values.min() >= -1e-6
    assert m.values.max() <= 1 + 1e-6


@pytest.mark.parametrize("N", [2, 8, 16])
def test_mass_preserved(N):
    f, hbar = _slater_wigner(N)
    m = mollify(f, hbar)
    mass = np.sum(m.values) * PG.cell_volume / (2 * np.pi)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_approximate_identity():
    X, P = PG.meshes()
    f = GridFunction(PG, np.exp(-2 * (X ** 2 + P ** 2)) * (1 + 0.3 * np.cos(X)))
    errs = []
    for hbar in (1 / 4, 1 / 16, 1 / 64):
        m = mollify(f, hbar)
        errs.append(np.abs(m.values - f.values).max())
    assert errs[0] > errs[1] > errs[2]


def test_alpha_one_variant():
    f, hbar = _slater_wigner(8)
    m_half = mollify(f, hbar, MollifierSpec(0.5))
    m_one = mollify(f, hbar, MollifierSpec(1.0))
    # narrower mollifier stays closer to the raw function
    d_half = np.abs(m_half.values - f.values).max()
    d_one = np.abs(m_one.values - f.values).max()
    assert d_one < d_half
    mass = np.sum(m_one.values) * PG.cell_volume / (2 * np.pi)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_l2_interpolation_bound():
    # ||m||_2 <= ||m||_inf^{1/2} ||m||_1^{1/2} <= (2 pi)^{1/2} (1 + 1e-4)
    from fermiphase import lp_norm
    f, hbar = _slater_wigner(16)
    m = mollify(f, hbar)
    l2 = lp_norm(m, 2)
    l1 = lp_norm(m, 1)
    linf = np.abs(m.values).max()
    assert l2 <= np.sqrt(linf) * np.sqrt(l1) * (1 + 1e-12)
    assert l2 <= np.sqrt(2 * np.pi) * (1 + 1e-4)


KGRID = SpatialGrid(1, 4.0, 32)
KPG = make_phase_grid(1, 4, 4, 32, 32)


def test_husimi_k_mass_and_bounds():
    N = 8
    state = hermite_basis(N, 1.0 / N, KGRID)
    f2 = wigner_k(KParticleDensity(state, 2), KPG)
    m2 = husimi_k(f2, N, 2, state.hbar)
    l1 = np.sum(np.abs(m2.values)) * m2.cell_volume / (2 * np.pi) ** 2
    assert l1 == pytest.approx(N * (N - 1) / N ** 2, rel=0.02)
    assert m2.values.max() <= 1 + 1e-4
    assert m2.values.min() >= -1e-3  # coarse-grid wobble below the percent level


def test_husimi_k1_equals_mollify():
    # the order-1 path is plain mollification with unit prefactor
    f, hbar = _slater_wigner(4)
    m = mollify(f, hbar)
    m1 = husimi_k(f, 4, 1, hbar)
    assert np.abs(m1.values - m.values).max() < 1e-14
    assert np.sum(m.values) * PG.cell_volume / (2 * np.pi) == pytest.approx(1.0, abs=1e-10)
