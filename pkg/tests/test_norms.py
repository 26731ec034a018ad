import numpy as np
import pytest

from fermiphase import (
    GridFunction,
    SpatialGrid,
    commutator_identity_check,
    gamma1,
    hermite_basis,
    holder_seminorm_gaussian,
    lp_norm,
    make_phase_grid,
    sobolev_norm,
    translation_modulus,
    wigner_transform,
)

PG = make_phase_grid(1, 8, 8, 256, 256)


def _disk(radius=np.sqrt(2)):
    X, P = PG.meshes()
    return GridFunction(PG, ((X ** 2 + P ** 2) <= radius ** 2).astype(float))


def test_lp_disk_area():
    f = _disk()
    assert lp_norm(f, 1) == pytest.approx(2 * np.pi, abs=0.05)


def test_lp_indicator_identities():
    f = _disk()
    assert lp_norm(f, 2) ** 2 == pytest.approx(lp_norm(f, 1), rel=1e-12)
    # ||f||_p^p is p-independent for indicators
    for p in (1.0, 2.0, 4.0):
        assert lp_norm(f, p) ** p == pytest.approx(lp_norm(f, 1), rel=1e-12)


def test_lp_rejects_bad_p():
    with pytest.raises(ValueError):
        lp_norm(_disk(), 0.5)


def test_lp_interpolation_inequality():
    N = 8
    f = wigner_transform(gamma1(hermite_basis(N, 1 / N, PG.spatial)), PG)
    for p in (2.0, 4.0):
        bound = lp_norm(f, 1) ** (1 / p) * np.abs(f.values).max() ** (1 - 1 / p)
        assert lp_norm(f, p) <= bound * (1 + 1e-12)


def test_slater_l2_identity():
    N = 64
    pg = make_phase_grid(1, 8, 8, 512, 512)
    state = hermite_basis(N, 1 / N, SpatialGrid(1, 8.0, 1024))
    f = wigner_transform(gamma1(state), pg)
    assert lp_norm(f, 2) == pytest.approx(np.sqrt(2 * np.pi), rel=0.01)


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
def test_sobolev_dominated_by_l2(s):
    rng = np.random.default_rng(int(s * 100))
    X, P = PG.meshes()
    vals = np.exp(-X ** 2 - P ** 2) * rng.standard_normal(PG.shape)
    f = GridFunction(PG, vals)
    assert sobolev_norm(f, s, 2) <= lp_norm(f, 2) * (1 + 1e-10)


def test_sobolev_sup_groenewold_bound():
    N = 8
    f = wigner_transform(gamma1(hermite_basis(N, 1 / N, PG.spatial)), PG)
    assert sobolev_norm(f, 0.5, np.inf) <= 1 + 1e-8


def test_sobolev_monotone_in_s():
    f = _disk()
    vals = [sobolev_norm(f, s, np.inf) for s in (0.25, 0.5, 1.0, 2.0)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_sobolev_validation():
    with pytest.raises(ValueError):
        sobolev_norm(_disk(), -1.0, 2)
    with pytest.raises(ValueError):
        sobolev_norm(_disk(), 0.5, 1.0)


def test_holder_seminorm_s1():
    # sup equals max|d/dt e^{-t^2/2}| = e^{-1/2}; difference quotients near the
    # critical point carry ~1e-9 cancellation noise
    assert holder_seminorm_gaussian(1.0) == pytest.approx(np.exp(-0.5), abs=1e-8)


def test_holder_seminorm_fractional():
    v = holder_seminorm_gaussian(0.5)
    assert np.isfinite(v)
    assert v > holder_seminorm_gaussian(1.0)  # flatter exponent, larger ratio sup
    # supremum estimate is non-decreasing with sample density
    coarse = holder_seminorm_gaussian(0.5, samples=200)
    assert v >= coarse - 1e-12


def test_translation_modulus_gaussian_bound():
    X, P = PG.meshes()
    f = GridFunction(PG, np.exp(-(X ** 2 + P ** 2) / 2))
    hbar = 0.125
    grad = np.sqrt(X ** 2 + P ** 2) * np.exp(-(X ** 2 + P ** 2) / 2)
    grad_l1 = np.sum(np.abs(grad)) * PG.cell_volume
    mod = translation_modulus(f, p=1.0, r=1.0, q=np.inf, hbar=hbar,
                              n_directions=8, n_radii=6)
    assert mod <= hbar * grad_l1 * (1 + 1e-6)


def test_translation_modulus_constant_zero():
    f = GridFunction(PG, np.ones(PG.shape))
    assert translation_modulus(f, 1.0, 1.0, np.inf, 0.1,
                               n_directions=4, n_radii=3) == pytest.approx(0.0, abs=1e-12)


def test_translation_modulus_decreases_with_N():
    mods = []
    for N in (16, 64):
        pg = make_phase_grid(1, 8, 8, 512, 512)
        sgrid = SpatialGrid(1, 8.0, 1024 if N == 64 else 512)
        f = wigner_transform(gamma1(hermite_basis(N, 1 / N, sgrid)), pg)
        mods.append(translation_modulus(f, p=2.0, r=0.5, q=np.inf, hbar=1 / N,
                                        n_directions=8, n_radii=6))
    assert mods[1] < mods[0]


def test_commutator_identity_zero():
    gam = gamma1(hermite_basis(4, 0.25, PG.spatial))
    lhs, rhs = commutator_identity_check(gam, (0.0, 0.0), 0.25, PG)
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert rhs == pytest.approx(0.0, abs=1e-12)


def test_commutator_identity_n16():
    N = 16
    pg = make_phase_grid(1, 8, 8, 512, 512)
    gam = gamma1(hermite_basis(N, 1 / N, pg.spatial))
    lhs, rhs = commutator_identity_check(gam, (1.0, 0.0), 1 / N, pg)
    assert abs(lhs - rhs) / rhs < 1e-4


def test_commutator_kernel_path_matches_orbital_path():
    from fermiphase import DensityKernel
    N = 8
    gam = gamma1(hermite_basis(N, 1 / N, PG.spatial))
    bare = DensityKernel(PG.spatial, gam.values, N, 1 / N)
    a = commutator_identity_check(gam, (0.6, -0.9), 1 / N, PG)
    b = commutator_identity_check(bare, (0.6, -0.9), 1 / N, PG)
    assert a[1] == pytest.approx(b[1], rel=1e-10)


def test_commutator_scaling_bound():
    # rhs^2 <= C N hbar |z0|; report the fitted constant across N
    consts = []
    for N in (16, 32):
        pg = make_phase_grid(1, 8, 8, 512, 512)
        gam = gamma1(hermite_basis(N, 1 / N, pg.spatial))
        _, rhs = commutator_identity_check(gam, (1.0, 0.0), 1 / N, pg)
        consts.append(rhs ** 2 / (N * (1 / N) * 1.0))
    assert all(np.isfinite(c) and c > 0 for c in consts)
    assert max(consts) < 10.0
