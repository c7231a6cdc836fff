"""State analysis: Takagi decomposition, Schmidt data, JSA, homodyne.

The phase-sensitive moment of a degenerate squeezed state decomposes as
M = U diag(lambda) U^T with lambda_l = sinh(2 r_l)/2; the columns of U are
the discrete Schmidt modes and r_l the squeezing parameters.  Continuum
mode functions are U[:, l] / sqrt(dkappa).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm

from .kgrid import KappaGrid
from .qprop import GaussianMoments

__all__ = [
    "SchmidtData",
    "JsaMatrix",
    "takagi",
    "schmidt_from_moment",
    "assemble_jsa",
    "photon_density",
    "homodyne_variance",
    "homodyne_extrema",
]

_VACUUM_PHOTONS = 1e-24


def takagi(m: np.ndarray, rtol_degenerate: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Autonne-Takagi factorization M = U diag(lam) U^T of a symmetric matrix.

    Built on the SVD; inside groups of (nearly) equal singular values the
    phase freedom is resolved by a principal matrix square root, which keeps
    U unitary and the reconstruction exact even for degenerate spectra.

    Returns:
        (lam, U): singular values sorted descending and the unitary factor.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("takagi requires a square matrix")
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > 1e-9 * scale:
        raise ValueError("takagi requires a symmetric matrix")
    m = 0.5 * (m + m.T)

    u, d, vh = np.linalg.svd(m)
    z = vh @ u.conj()

    # Split singular values into degeneracy groups and take the principal
    # square root of z on each; cross-group entries of z vanish identically.
    s = np.zeros_like(z)
    top = d[0] if len(d) else 0.0
    start = 0
    for i in range(1, len(d) + 1):
        if i == len(d) or abs(d[start] - d[i]) > rtol_degenerate * max(top, 1e-300):
            block = slice(start, i)
            zb = z[block, block]
            zb = 0.5 * (zb + zb.T)
            if i - start == 1:
                s[block, block] = np.sqrt(zb[0, 0].astype(complex))
            else:
                s[block, block] = sqrtm(zb)
            start = i
    uu = u @ s

    # Remaining freedom is a sign per mode; fix it deterministically.
    for l in range(uu.shape[1]):
        col = uu[:, l]
        piv = col[np.argmax(np.abs(col))]
        if piv.real < 0 or (piv.real == 0 and piv.imag < 0):
            uu[:, l] = -col
    return d, uu


@dataclass(frozen=True)
class SchmidtData:
    """Squeezing parameters and Schmidt modes of a phase-sensitive moment.

    ``r_values``/``modes`` are truncated to modes carrying at least
    1e-12 of the mean photon number; ``schmidt_number`` and ``mean_photon``
    are computed from the full spectrum.
    """

    r_values: np.ndarray
    modes: np.ndarray
    schmidt_number: float
    mean_photon: float
    is_vacuum: bool

    @property
    def n_modes(self) -> int:
        return len(self.r_values)


def schmidt_from_moment(m: np.ndarray, grid: KappaGrid | None = None) -> SchmidtData:
    """Schmidt decomposition of M: r_l = asinh(2 lambda_l) / 2, K, <n>."""
    lam, u = takagi(m)
    r = 0.5 * np.arcsinh(2.0 * lam)
    nl = np.sinh(r) ** 2
    total = float(np.sum(nl))
    if total < _VACUUM_PHOTONS:
        return SchmidtData(
            r_values=np.zeros(0),
            modes=np.zeros((m.shape[0], 0), dtype=complex),
            schmidt_number=1.0,
            mean_photon=total,
            is_vacuum=True,
        )
    k = total**2 / float(np.sum(nl**2))
    keep = nl >= 1e-12 * total
    return SchmidtData(
        r_values=r[keep],
        modes=u[:, keep],
        schmidt_number=float(k),
        mean_photon=total,
        is_vacuum=False,
    )


@dataclass(frozen=True)
class JsaMatrix:
    """Joint spectral amplitude on the grid, continuum normalization."""

    values: np.ndarray
    grid: KappaGrid


def assemble_jsa(s: SchmidtData, grid: KappaGrid) -> JsaMatrix:
    """J(kappa, kappa') = sum_l r_l rho_l(kappa) rho_l(kappa')."""
    if s.n_modes == 0:
        return JsaMatrix(np.zeros((grid.n_points, grid.n_points), dtype=complex), grid)
    scaled = s.modes * s.r_values[None, :]
    return JsaMatrix((scaled @ s.modes.T) / grid.delta_kappa, grid)


def photon_density(n_matrix: np.ndarray, grid: KappaGrid) -> np.ndarray:
    """Spectral photon density Re(N_jj)/dkappa; integrates to <n>."""
    return np.real(np.diag(n_matrix)) / grid.delta_kappa


def _check_lo(lo_shape: np.ndarray) -> np.ndarray:
    lo = np.asarray(lo_shape, dtype=complex)
    norm = np.sum(np.abs(lo) ** 2)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"local oscillator must be normalized, got |phi|^2 = {norm}")
    return lo


def homodyne_variance(moments: GaussianMoments, lo_shape: np.ndarray, theta: float) -> float:
    """Quadrature variance against a normalized local-oscillator shape.

    V_theta = e^{2 i theta} phi* M phi* + c.c. + 2 phi N phi^dag + 1; the
    constant term is the shot-noise level.
    """
    lo = _check_lo(lo_shape)
    s = lo.conj() @ moments.M @ lo.conj()
    nterm = np.real(lo @ moments.N @ lo.conj())
    return float(2.0 * np.real(np.exp(2j * theta) * s) + 2.0 * nterm + 1.0)


def homodyne_extrema(moments: GaussianMoments, lo_shape: np.ndarray) -> tuple[float, float, float]:
    """(V_min, V_max, theta_min) in closed form over the quadrature angle."""
    lo = _check_lo(lo_shape)
    s = lo.conj() @ moments.M @ lo.conj()
    nterm = np.real(lo @ moments.N @ lo.conj())
    base = 2.0 * nterm + 1.0
    amp = 2.0 * abs(s)
    theta_min = 0.5 * (np.pi - np.angle(s)) if amp > 0 else 0.0
    return float(base - amp), float(base + amp), float(theta_min)
