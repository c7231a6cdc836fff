import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqz.analysis import (
    assemble_jsa,
    homodyne_extrema,
    homodyne_variance,
    photon_density,
    schmidt_from_moment,
    takagi,
)
from sqz.kgrid import make_grid
from sqz.qprop import GaussianMoments


def _random_symmetric(n, rng, scale=1.0):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.T) / 2


def _pure_state_moments(n, rng, r_max=1.2):
    """Lossless-from-vacuum moments built from a random Takagi pair."""
    from scipy.stats import unitary_group

    u = unitary_group.rvs(n, random_state=rng)
    r = np.sort(rng.uniform(0, r_max, size=n))[::-1]
    lam = np.sinh(2 * r) / 2
    m = (u * lam) @ u.T
    nmat = (u.conj() * np.sinh(r) ** 2) @ u.T
    return GaussianMoments(N=nmat, M=m, time=0.0), r, u


class TestTakagi:
    def test_positive_diagonal(self):
        lam, u = takagi(np.diag([3.0, 1.0]).astype(complex))
        assert np.allclose(lam, [3.0, 1.0])
        assert np.allclose(np.abs(u), np.eye(2), atol=1e-12)

    def test_negative_scalar_phase_absorbed(self):
        lam, u = takagi(np.array([[-1.0]], dtype=complex))
        assert lam[0] == pytest.approx(1.0)
        assert u[0, 0] == pytest.approx(1j) or u[0, 0] == pytest.approx(-1j)
        assert (u * lam) @ u.T == pytest.approx(np.array([[-1.0]]))

    def test_degenerate_offdiagonal_pair(self):
        s = 0.7
        m = np.array([[0.0, s], [s, 0.0]], dtype=complex)
        lam, u = takagi(m)
        assert np.allclose(lam, [s, s])
        assert np.abs((u * lam) @ u.T - m).max() < 1e-12
        assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12

    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 24))
    def test_reconstruction_random(self, seed, n):
        rng = np.random.default_rng(seed)
        m = _random_symmetric(n, rng)
        lam, u = takagi(m)
        assert np.abs((u * lam) @ u.T - m).max() <= 1e-9 * max(np.abs(m).max(), 1e-300)
        assert np.abs(u.conj().T @ u - np.eye(n)).max() < 1e-10
        assert np.all(lam >= 0) and np.all(np.diff(lam) <= 1e-12)

    def test_reconstruction_large(self, rng):
        n = 256
        m = _random_symmetric(n, rng)
        lam, u = takagi(m)
        assert np.abs((u * lam) @ u.T - m).max() <= 1e-9 * np.abs(m).max()
        assert np.abs(u.conj().T @ u - np.eye(n)).max() < 1e-10

    def test_matches_singular_values(self, rng):
        m = _random_symmetric(40, rng)
        lam, _ = takagi(m)
        sv = np.linalg.svd(m, compute_uv=False)
        assert np.abs(lam - sv).max() < 1e-10 * sv.max()

    def test_with_degenerate_clusters(self, rng):
        # build a symmetric matrix with an exactly degenerate Takagi spectrum
        from scipy.stats import unitary_group

        u = unitary_group.rvs(8, random_state=rng)
        lam = np.array([2.0, 2.0, 2.0, 1.0, 1.0, 0.5, 0.0, 0.0])
        m = (u * lam) @ u.T
        lam2, u2 = takagi(m)
        assert np.allclose(lam2, lam, atol=1e-10)
        assert np.abs((u2 * lam2) @ u2.T - m).max() < 1e-9 * 2.0

    def test_rejects_asymmetric(self, rng):
        m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        with pytest.raises(ValueError):
            takagi(m)

    def test_sign_convention_deterministic(self, rng):
        m = _random_symmetric(12, rng)
        _, u1 = takagi(m)
        _, u2 = takagi(m.copy())
        assert np.array_equal(u1, u2)


class TestSchmidt:
    def test_vacuum_flagged(self):
        s = schmidt_from_moment(np.zeros((8, 8), dtype=complex))
        assert s.is_vacuum
        assert s.schmidt_number == 1.0
        assert s.mean_photon == 0.0
        assert s.n_modes == 0

    def test_single_mode_inversion(self):
        lam1 = np.sinh(2.0) / 2.0
        m = np.diag([lam1, 0.0, 0.0]).astype(complex)
        s = schmidt_from_moment(m)
        assert s.r_values[0] == pytest.approx(1.0, rel=1e-12)
        assert s.mean_photon == pytest.approx(np.sinh(1.0) ** 2, rel=1e-12)
        assert s.n_modes == 1

    def test_two_equal_modes_k2(self):
        lam = np.sinh(2 * 0.7) / 2
        m = np.diag([lam, lam, 0.0]).astype(complex)
        s = schmidt_from_moment(m)
        assert s.schmidt_number == pytest.approx(2.0, rel=1e-12)

    def test_k_invariant_under_permutation(self, rng):
        moments, r, u = _pure_state_moments(10, rng)
        s1 = schmidt_from_moment(moments.M)
        perm = rng.permutation(10)
        m2 = moments.M[np.ix_(perm, perm)]
        s2 = schmidt_from_moment(m2)
        assert s1.schmidt_number == pytest.approx(s2.schmidt_number, rel=1e-12)
        assert s1.mean_photon == pytest.approx(s2.mean_photon, rel=1e-12)

    def test_mean_photon_equals_trace_for_pure(self, rng):
        moments, r, u = _pure_state_moments(12, rng)
        s = schmidt_from_moment(moments.M)
        assert s.mean_photon == pytest.approx(np.trace(moments.N).real, rel=1e-8)
        assert np.allclose(np.sort(s.r_values), np.sort(r), atol=1e-9)

    def test_modes_orthonormal(self, rng):
        moments, _, _ = _pure_state_moments(9, rng)
        s = schmidt_from_moment(moments.M)
        gram = s.modes.conj().T @ s.modes
        assert np.abs(gram - np.eye(s.n_modes)).max() < 1e-10


class TestJsa:
    def test_vacuum_jsa_zero(self):
        grid = make_grid(8, 1.0)
        s = schmidt_from_moment(np.zeros((8, 8), dtype=complex))
        j = assemble_jsa(s, grid)
        assert np.all(j.values == 0)

    def test_rank_one_separable(self):
        grid = make_grid(8, 0.5)
        u = np.exp(-((grid.kappa / 2.0) ** 2)).astype(complex)
        u /= np.linalg.norm(u)
        lam = np.sinh(2 * 0.8) / 2
        m = lam * np.outer(u, u)
        s = schmidt_from_moment(m)
        j = assemble_jsa(s, grid)
        assert np.linalg.matrix_rank(j.values, tol=1e-10) == 1
        expected = 0.8 * np.outer(u, u) / grid.delta_kappa
        assert np.abs(np.abs(j.values) - np.abs(expected)).max() < 1e-10

    def test_jsa_symmetric(self, rng):
        grid = make_grid(16, 1.0)
        moments, _, _ = _pure_state_moments(16, rng)
        j = assemble_jsa(schmidt_from_moment(moments.M), grid)
        assert np.abs(j.values - j.values.T).max() < 1e-10 * np.abs(j.values).max()


class TestPhotonDensity:
    def test_vacuum_zeros(self):
        grid = make_grid(8, 2.0)
        assert np.all(photon_density(np.zeros((8, 8)), grid) == 0)

    def test_single_occupied_mode(self):
        grid = make_grid(8, 2.0)
        n = np.zeros((8, 8), dtype=complex)
        r = 0.9
        n[3, 3] = np.sinh(r) ** 2
        d = photon_density(n, grid)
        assert d[3] == pytest.approx(np.sinh(r) ** 2 / grid.delta_kappa)
        assert np.sum(d) * grid.delta_kappa == pytest.approx(np.sinh(r) ** 2)

    def test_integral_matches_mean_photon(self, rng):
        grid = make_grid(16, 0.5)
        moments, _, _ = _pure_state_moments(16, rng)
        d = photon_density(moments.N, grid)
        assert np.sum(d) * grid.delta_kappa == pytest.approx(
            np.trace(moments.N).real, rel=1e-10
        )


class TestHomodyne:
    def test_vacuum_shot_noise(self, rng):
        m = GaussianMoments.vacuum(6)
        lo = rng.normal(size=6) + 1j * rng.normal(size=6)
        lo /= np.linalg.norm(lo)
        for theta in (0.0, 0.3, 1.2, np.pi / 2):
            assert homodyne_variance(m, lo, theta) == pytest.approx(1.0, abs=1e-12)

    def test_schmidt_mode_lo_gives_exponentials(self, rng):
        moments, r, u = _pure_state_moments(8, rng)
        s = schmidt_from_moment(moments.M)
        for l in (0, 3, 6):
            vmin, vmax, theta_min = homodyne_extrema(moments, s.modes[:, l])
            rl = s.r_values[l]
            assert vmin == pytest.approx(np.exp(-2 * rl), rel=1e-6)
            assert vmax == pytest.approx(np.exp(2 * rl), rel=1e-6)
            assert homodyne_variance(moments, s.modes[:, l], theta_min) == pytest.approx(
                vmin, rel=1e-9
            )

    def test_unit_squeezing_value(self):
        r = 1.0
        m = GaussianMoments(
            N=np.array([[np.sinh(r) ** 2]], dtype=complex),
            M=np.array([[np.sinh(2 * r) / 2]], dtype=complex),
            time=0.0,
        )
        vmin, vmax, _ = homodyne_extrema(m, np.array([1.0 + 0j]))
        assert vmin == pytest.approx(0.1353352832366127, rel=1e-12)
        assert 10 * np.log10(vmin) == pytest.approx(-8.685889638065035, rel=1e-9)

    def test_uncertainty_product(self, rng):
        moments, r, u = _pure_state_moments(7, rng)
        for _ in range(5):
            lo = rng.normal(size=7) + 1j * rng.normal(size=7)
            lo /= np.linalg.norm(lo)
            vmin, vmax, _ = homodyne_extrema(moments, lo)
            assert vmin * vmax >= 1.0 - 1e-9
        s = schmidt_from_moment(moments.M)
        vmin, vmax, _ = homodyne_extrema(moments, s.modes[:, 0])
        assert vmin * vmax == pytest.approx(1.0, abs=1e-7)

    def test_unnormalized_lo_rejected(self):
        m = GaussianMoments.vacuum(4)
        with pytest.raises(ValueError):
            homodyne_variance(m, np.ones(4), 0.0)
