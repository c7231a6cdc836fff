"""Independent reference results used to validate the propagation pipeline.

Everything here is computed by a different route than the simulator: closed
forms, perturbation theory, or direct quadrature.  The perturbative
downconversion moment follows from integrating the linearized moment
equation of motion

    <b b>(t1) = (i/sqrt(2 pi)) int_{t0}^{t1} dt
                e^{-i (w(k) + w(k') - i gamma)(t1 - t)} S(k + k', t)

with a freely propagating (and decaying) pump.  Carrying out the time
integral gives a loss-matching sinh factor in the energy difference
eps_minus and an overall damping set by the energy sum eps_plus:

    I = e^{-i eps_plus T / 2} * T * sinhc(i T eps_minus / 2),

with eps_pm = w_F(k) + w_F(k') +- w_SH(k'') - i (2 gamma_F +- gamma_SH)/2.
The sign of the oscillatory prefactor is fixed by the quadrature itself
(checked in the tests against direct Gauss-Legendre integration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar
from scipy.integrate import quad

from .errors import ConfigurationError
from .kgrid import KappaGrid, ModeParams, fft_kappa_to_z, fft_z_to_kappa, omega_of_kappa
from .meanfield import MeanField, NonlinearCoupling

__all__ = [
    "ComplexEnergies",
    "complex_energies",
    "phase_matching_tophat",
    "phase_matching_smoothed",
    "spdc_perturbative_moment",
    "spdc_moment_time_quadrature",
    "spdc_lowgain_product_jsa",
    "spm_exact",
    "shirasaki_vminus",
    "shirasaki_constant",
    "pulse_power_profile",
]


def _sinhc(x: np.ndarray) -> np.ndarray:
    """sinh(x)/x, branch-safe near zero, complex arguments allowed."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(safe) / safe)


@dataclass(frozen=True)
class ComplexEnergies:
    """Energy sum/difference including loss, as used by the sinh factor."""

    eps_plus: complex
    eps_minus: complex


def complex_energies(
    omega_f_sum, omega_sh, gamma_f: float, gamma_sh: float
) -> ComplexEnergies:
    """eps_pm = (w_F + w_F') +- w_SH - i (2 gamma_F +- gamma_SH)/2."""
    return ComplexEnergies(
        eps_plus=omega_f_sum + omega_sh - 0.5j * (2.0 * gamma_f + gamma_sh),
        eps_minus=omega_f_sum - omega_sh - 0.5j * (2.0 * gamma_f - gamma_sh),
    )


def phase_matching_tophat(delta_kappa_sum, zeta_bar: complex, length: float):
    """Phase-matching function of a hard-edged nonlinear region.

    Phi(q) = int dz zeta(z) e^{-i q z} = zeta_bar * L * sinc(q L / 2) for
    zeta(z) = zeta_bar on [-L/2, L/2].
    """
    if not length > 0:
        raise ConfigurationError("nonlinear length must be positive")
    q = np.asarray(delta_kappa_sum, dtype=float)
    return zeta_bar * length * np.sinc(q * length / (2.0 * np.pi))


def phase_matching_smoothed(delta_kappa_sum, zeta_bar: complex, length: float, edge: float):
    """Phase matching of the raised-cosine-edged region used numerically.

    The profile is the hard top hat convolved with a unit-area cosine bump
    of width ``edge``, so Phi picks up the exact envelope
    pi^2 cos(q edge / 2) / (pi^2 - (q edge)^2).
    """
    base = phase_matching_tophat(delta_kappa_sum, zeta_bar, length)
    if edge <= 0.0:
        return base
    y = np.asarray(delta_kappa_sum, dtype=float) * edge
    near = np.abs(np.abs(y) - np.pi) < 1e-6
    denom = np.where(near, 1.0, np.pi**2 - y * y)
    env = np.where(near, np.pi / 4.0, np.pi**2 * np.cos(y / 2.0) / denom)
    return base * env


def _resolved_pm(coupling: NonlinearCoupling, grid: KappaGrid):
    """Phase-matching callable matching the coupling's actual z profile."""
    if coupling.length is None:
        raise ConfigurationError("the perturbative oracle needs a finite nonlinear length")
    edge = coupling.resolved_edge(grid)

    def pm(q):
        return phase_matching_smoothed(q, coupling.zeta2, coupling.length, edge)

    return pm


def spdc_perturbative_moment(
    pump0: MeanField,
    mode_f: ModeParams,
    mode_sh: ModeParams,
    coupling: NonlinearCoupling,
    t_span: float,
    grid: KappaGrid,
    pm=None,
    warn_gain: float = 0.05,
) -> np.ndarray:
    """Low-gain downconversion moment <b_F b_F> by the closed-form kernel.

    ``pump0`` is the second-harmonic field at the start time; ``t_span`` the
    total evolution time.  Lab frame throughout: the nonlinear region is at
    rest and the pump sweeps it at its group velocity.  Returns the moment
    in discrete normalization, directly comparable with the propagated M
    matrix (after undoing any comoving-frame boost phase of the latter).
    """
    n = grid.n_points
    if pm is None:
        pm = _resolved_pm(coupling, grid)
    kap = grid.kappa
    om_f = omega_of_kappa(mode_f, kap)
    om_sh = omega_of_kappa(mode_sh, kap)
    a = om_f[:, None] + om_f[None, :] - 1j * mode_f.gamma_loss
    b = om_sh - 0.5j * mode_sh.gamma_loss

    # Phi on all sums kappa_j + kappa_j' - kappa_j'' via the extended grid.
    ksum = kap[:, None] + kap[None, :]
    pump_cont = pump0.amplitudes / np.sqrt(grid.delta_kappa)
    pref = 1j * grid.delta_kappa ** 1.5 / (2.0 * np.pi) ** 1.5

    out = np.zeros((n, n), dtype=complex)
    chunk = max(1, 2**22 // (n * n))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        phi = pm(ksum[:, :, None] - kap[None, None, lo:hi])
        x = 0.5j * t_span * (a[:, :, None] - b[None, None, lo:hi])
        kernel = (
            np.exp(-0.5j * t_span * (a[:, :, None] + b[None, None, lo:hi]))
            * t_span
            * _sinhc(x)
        )
        out += np.einsum("k,ijk->ij", pump_cont[lo:hi], phi * kernel)
    out *= pref
    peak = np.abs(out).max()
    if peak > warn_gain:
        import warnings

        warnings.warn(
            f"perturbative moment peak {peak:.3g} exceeds the low-gain regime",
            stacklevel=2,
        )
    return out


def spdc_moment_time_quadrature(
    pump0: MeanField,
    mode_f: ModeParams,
    mode_sh: ModeParams,
    coupling: NonlinearCoupling,
    t_span: float,
    grid: KappaGrid,
    pm=None,
    n_nodes: int = 200,
) -> np.ndarray:
    """Same moment with the time integral done by Gauss-Legendre quadrature.

    Ground truth for the closed-form kernel; intended for small grids.
    """
    n = grid.n_points
    if pm is None:
        pm = _resolved_pm(coupling, grid)
    kap = grid.kappa
    om_f = omega_of_kappa(mode_f, kap)
    om_sh = omega_of_kappa(mode_sh, kap)
    a = om_f[:, None] + om_f[None, :] - 1j * mode_f.gamma_loss
    b = om_sh - 0.5j * mode_sh.gamma_loss

    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    tau = 0.5 * t_span * (nodes + 1.0)  # t - t0 in [0, T]

    ksum = kap[:, None] + kap[None, :]
    pump_cont = pump0.amplitudes / np.sqrt(grid.delta_kappa)
    pref = 1j * grid.delta_kappa ** 1.5 / (2.0 * np.pi) ** 1.5

    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        phi = pm(ksum - kap[j])
        integrand = np.exp(-1j * np.multiply.outer(a, t_span - tau)) * np.exp(
            -1j * b[j] * tau
        )
        time_int = 0.5 * t_span * np.einsum("k,ijk->ij", weights, integrand)
        out += pump_cont[j] * phi * time_int
    return pref * out


def spdc_lowgain_product_jsa(
    pump0: MeanField,
    mode_f: ModeParams,
    mode_sh: ModeParams,
    coupling: NonlinearCoupling,
    grid: KappaGrid,
    pm=None,
) -> np.ndarray:
    """Long-time lossless JSA shape: pump times phase matching.

    Energy conservation pins the pump wavevector at
    omega_SH(kappa'') = omega_F(kappa) + omega_F(kappa'); the returned
    matrix is Frobenius-normalized (shape comparison only).
    """
    if pm is None:
        pm = _resolved_pm(coupling, grid)
    kap = grid.kappa
    om_sum = omega_of_kappa(mode_f, kap)[:, None] + omega_of_kappa(mode_f, kap)[None, :]
    if mode_sh.v_prime == 0.0:
        k_star = om_sum / mode_sh.v
    else:
        disc = mode_sh.v**2 + 2.0 * mode_sh.v_prime * om_sum
        k_star = (-mode_sh.v + np.sqrt(disc.astype(complex)).real) / mode_sh.v_prime
    pump_cont = pump0.amplitudes / np.sqrt(grid.delta_kappa)
    pump_re = np.interp(k_star.ravel(), kap, pump_cont.real, left=0.0, right=0.0)
    pump_im = np.interp(k_star.ravel(), kap, pump_cont.imag, left=0.0, right=0.0)
    pump_at = (pump_re + 1j * pump_im).reshape(k_star.shape)
    ksum = kap[:, None] + kap[None, :]
    j = pump_at * pm(ksum - k_star)
    norm = np.linalg.norm(j)
    return j / norm if norm > 0 else j


def spm_exact(field0: MeanField, gamma_nl: float, length: float) -> MeanField:
    """Exact self-phase-modulation map in the comoving, dispersionless limit.

    Applies the phase e^{i gamma_nl P(z) L} with P the instantaneous power
    hbar w v |psi(z)|^2; the modulus profile is untouched.
    """
    mode = field0.mode
    if gamma_nl == 0.0:
        return field0
    if mode.center_omega <= 0:
        raise ConfigurationError("spm_exact needs the mode's center_omega for power units")
    psi = field0.z_samples()
    power = hbar * mode.center_omega * mode.v * np.abs(psi) ** 2 / field0.grid.delta_z
    out = fft_z_to_kappa(psi * np.exp(1j * gamma_nl * power * length))
    return field0.with_amplitudes(out)


_SHAPE_CONSTANTS = {
    "lorentzian": 0.75,
    "sech": 0.8,
    "gaussian": math.sqrt(2.0 / 3.0),
    "rectangular": 1.0,
}


def shirasaki_constant(shape: str) -> float:
    """Pulse-shape constant C of the analytic quadrature-variance minimum."""
    try:
        return _SHAPE_CONSTANTS[str(shape)]
    except KeyError:
        raise ConfigurationError(f"unknown pulse shape {shape!r}") from None


def pulse_power_profile(shape: str, x: np.ndarray) -> np.ndarray:
    """Unit-peak temporal power profiles matching the shape constants."""
    x = np.asarray(x, dtype=float)
    if shape == "lorentzian":
        return 1.0 / (1.0 + x * x)
    if shape == "sech":
        return 1.0 / np.cosh(x) ** 2
    if shape == "gaussian":
        return np.exp(-x * x)
    if shape == "rectangular":
        return (np.abs(x) <= 0.5).astype(float)
    raise ConfigurationError(f"unknown pulse shape {shape!r}")


def shirasaki_vminus(shape: str, phi0: float) -> float:
    """Minimum quadrature variance after instantaneous Kerr squeezing.

    Evaluates the power-weighted average of the per-slice variance at the
    jointly optimal quadrature angle,

        V- = <1 + 2 Phi^2 - 2 Phi (1 + Phi C Phi0) / sqrt(1 + C^2 Phi0^2)>,

    with Phi(t) = phi0 * g(t) the nonlinear phase profile and C the shape
    constant.  A rectangular pulse makes the integrand constant and the
    average collapses to the single-value formula.
    """
    if phi0 < 0:
        raise ConfigurationError("phi0 must be >= 0")
    c = shirasaki_constant(shape)
    denom = math.sqrt(1.0 + c * c * phi0 * phi0)

    def bracket(p):
        return 1.0 + 2.0 * p * p - 2.0 * p * (1.0 + p * c * phi0) / denom

    if shape == "rectangular":
        return float(bracket(phi0))

    def num(t):
        p = phi0 * pulse_power_profile(shape, np.array(t))
        return float(p * bracket(p))

    def den(t):
        return float(phi0 * pulse_power_profile(shape, np.array(t)))

    if phi0 == 0.0:
        return 1.0
    kwargs = dict(epsabs=1e-12, epsrel=1e-11, limit=400)
    upper = np.inf
    top = quad(num, -upper, upper, **kwargs)[0]
    bottom = quad(den, -upper, upper, **kwargs)[0]
    return float(top / bottom)
