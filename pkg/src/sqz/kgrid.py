"""Detuning-wavevector grids and the unitary Fourier conventions.

Fields live on a uniform grid of wavevector detunings around a mode center,

    kappa_j = (j - n/2) * dkappa,   j = 0 .. n-1,

paired with a conjugate spatial grid z_m = (m - n/2) * dz where
dz = 2*pi / (n * dkappa).  Two normalizations are used throughout the
package:

* "continuum" samples, e.g. b(kappa_j) with units following the continuum
  field, and
* "discrete" vectors b_j = b(kappa_j) * sqrt(dkappa), for which the
  z <-> kappa transform below is exactly unitary and photon numbers are
  plain vector norms, sum_j |b_j|^2.

The same pairing holds in z: psi_m = psi(z_m) * sqrt(dz).  The transforms
are centered DFTs with the e^{+i kappa z} kernel mapping kappa -> z, so a
spectrum concentrated at kappa_0 corresponds to a phase ramp e^{i kappa_0 z}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError

__all__ = [
    "KappaGrid",
    "ModeParams",
    "make_grid",
    "omega_of_kappa",
    "fft_z_to_kappa",
    "fft_kappa_to_z",
]


def _centered_dft(x: np.ndarray, sign: int, axis: int = 0) -> np.ndarray:
    """Unitary DFT between centered grids; sign=+1 uses e^{+i kappa z}."""
    x = np.asarray(x)
    n = x.shape[axis]
    if n % 2 != 0:
        raise DimensionMismatchError(f"centered transform needs even length, got {n}")
    shifted = np.fft.ifftshift(x, axes=axis)
    if sign > 0:
        out = np.fft.ifft(shifted, axis=axis, norm="ortho")
    else:
        out = np.fft.fft(shifted, axis=axis, norm="ortho")
    return np.fft.fftshift(out, axes=axis)


def fft_z_to_kappa(field_on_z: np.ndarray, axis: int = 0) -> np.ndarray:
    """Map discrete z samples psi_m to discrete spectrum b_j (unitary)."""
    return _centered_dft(field_on_z, sign=-1, axis=axis)


def fft_kappa_to_z(field_on_kappa: np.ndarray, axis: int = 0) -> np.ndarray:
    """Inverse of :func:`fft_z_to_kappa`."""
    return _centered_dft(field_on_kappa, sign=+1, axis=axis)


@dataclass(frozen=True)
class KappaGrid:
    """Uniform detuning grid around a mode center and its conjugate z grid.

    Attributes:
        n_points: grid size, a power of two.
        delta_kappa: spacing in 1/m.
        center_k: absolute center wavevector in 1/m (bookkeeping only; all
            dynamics is expressed in detunings).
    """

    n_points: int
    delta_kappa: float
    center_k: float = 0.0

    def __post_init__(self):
        n = self.n_points
        if n < 2 or (n & (n - 1)) != 0:
            raise ConfigurationError(f"n_points must be a power of two >= 2, got {n}")
        if not self.delta_kappa > 0:
            raise ConfigurationError(f"delta_kappa must be positive, got {self.delta_kappa}")

    @property
    def kappa(self) -> np.ndarray:
        """Detuning values kappa_j = (j - n/2) * dkappa."""
        n = self.n_points
        return (np.arange(n) - n // 2) * self.delta_kappa

    @property
    def z_extent(self) -> float:
        return 2.0 * np.pi / self.delta_kappa

    @property
    def delta_z(self) -> float:
        return self.z_extent / self.n_points

    @property
    def z(self) -> np.ndarray:
        n = self.n_points
        return (np.arange(n) - n // 2) * self.delta_z

    # Fine/extended grids double the resolution in z (same z window) so that
    # products of fields can be transformed onto the doubled kappa range
    # [-n, n) * dkappa covering all pairwise sums and differences of grid
    # detunings without wrap-around.
    @property
    def z_fine(self) -> np.ndarray:
        n = self.n_points
        return (np.arange(2 * n) - n) * (self.delta_z / 2.0)

    @property
    def kappa_extended(self) -> np.ndarray:
        n = self.n_points
        return (np.arange(2 * n) - n) * self.delta_kappa

    def z_to_kappa(self, field_on_z: np.ndarray) -> np.ndarray:
        self._check_len(field_on_z)
        return fft_z_to_kappa(field_on_z)

    def kappa_to_z(self, field_on_kappa: np.ndarray) -> np.ndarray:
        self._check_len(field_on_kappa)
        return fft_kappa_to_z(field_on_kappa)

    def pad_spectrum(self, spectrum: np.ndarray) -> np.ndarray:
        """Embed an n-point discrete spectrum into the 2n extended grid."""
        self._check_len(spectrum)
        n = self.n_points
        out = np.zeros(2 * n, dtype=complex)
        out[n // 2 : n // 2 + n] = spectrum
        return out

    def crop_spectrum(self, spectrum_ext: np.ndarray) -> np.ndarray:
        """Restrict a 2n extended-grid spectrum to the central n window."""
        n = self.n_points
        if len(spectrum_ext) != 2 * n:
            raise DimensionMismatchError(
                f"expected extended length {2 * n}, got {len(spectrum_ext)}"
            )
        return spectrum_ext[n // 2 : n // 2 + n].copy()

    def _check_len(self, arr) -> None:
        if np.shape(arr)[0] != self.n_points:
            raise DimensionMismatchError(
                f"array length {np.shape(arr)[0]} does not match grid size {self.n_points}"
            )


def make_grid(n_points: int, delta_kappa: float, center_k: float = 0.0) -> KappaGrid:
    """Construct a :class:`KappaGrid`, validating size and spacing."""
    return KappaGrid(n_points=n_points, delta_kappa=delta_kappa, center_k=center_k)


@dataclass(frozen=True)
class ModeParams:
    """Dispersion and loss parameters of one waveguide mode.

    The dispersion relation is truncated at the quadratic term,
    omega(kappa) = v * kappa + v_prime * kappa**2 / 2, with kappa the
    detuning from ``center_k``.
    """

    v: float
    v_prime: float = 0.0
    gamma_loss: float = 0.0
    center_k: float = 0.0
    center_omega: float = 0.0

    def __post_init__(self):
        if not self.v > 0:
            raise ConfigurationError(f"group velocity must be positive, got {self.v}")
        if self.gamma_loss < 0:
            raise ConfigurationError(f"loss rate must be >= 0, got {self.gamma_loss}")


def omega_of_kappa(mode: ModeParams, kappa):
    """Quadratic dispersion v*kappa + v'*kappa^2/2 in rad/s."""
    kappa = np.asarray(kappa, dtype=float)
    return mode.v * kappa + 0.5 * mode.v_prime * kappa * kappa
