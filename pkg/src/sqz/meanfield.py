"""Pump preparation and classical mean-field propagation.

Mean fields are stored as photon-normalized discrete spectra
beta_j = <b(kappa_j)> sqrt(dkappa), so sum_j |beta_j|^2 is the pump photon
number.  Propagation uses a symmetric split step: the exact dispersive/loss
phase in kappa space, then the self/cross-phase-modulation phase in z space.

This module also assembles the drive functions that couple the pumps to the
quantum fluctuations: the squeezing drive S(kappa, t) evaluated on the grid
of pairwise detuning sums and the phase-modulation drive M(kappa, t) on the
grid of differences.  Products of fields are formed on a doubled z grid so
the extended-kappa transforms are free of wrap-around.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import hbar

from .errors import ConfigurationError, DimensionMismatchError
from .kgrid import KappaGrid, ModeParams, fft_kappa_to_z, fft_z_to_kappa, omega_of_kappa

__all__ = [
    "PumpShape",
    "PumpSpec",
    "MeanField",
    "NonlinearCoupling",
    "DriveFields",
    "gamma_to_zeta3",
    "make_pump",
    "pump_from_z_profile",
    "load_pump_spectrum",
    "step_meanfield",
    "drive_from_z_products",
    "drive_fields",
    "drive_spdc",
    "drive_single_pump",
    "drive_dual_pump",
    "SpdcDriveSource",
    "SinglePumpDriveSource",
    "DualPumpDriveSource",
]


class PumpShape(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SECH = "sech"
    LORENTZIAN = "lorentzian"
    RECTANGULAR = "rectangular"
    QUARTIC_EXPONENTIAL = "quartic_exponential"
    CUSTOM_ARRAY = "custom_array"


def _shape_amplitude(shape: PumpShape, x: np.ndarray) -> np.ndarray:
    """Unit-peak spectral amplitude profiles; x = (kappa - center)/bandwidth."""
    if shape == PumpShape.GAUSSIAN:
        return np.exp(-0.5 * x * x)
    if shape == PumpShape.SECH:
        return 1.0 / np.cosh(x)
    if shape == PumpShape.LORENTZIAN:
        return 1.0 / (1.0 + x * x)
    if shape == PumpShape.RECTANGULAR:
        # unit full width with a narrow raised-cosine edge to limit ringing
        edge = 0.05
        out = np.zeros_like(x)
        out[np.abs(x) <= 0.5 - edge] = 1.0
        ramp = (np.abs(x) > 0.5 - edge) & (np.abs(x) < 0.5 + edge)
        out[ramp] = 0.5 * (1.0 - np.sin(np.pi * (np.abs(x[ramp]) - 0.5) / (2 * edge)))
        return out
    if shape == PumpShape.QUARTIC_EXPONENTIAL:
        return np.exp(-(x**4))
    raise ConfigurationError(f"no analytic profile for shape {shape}")


@dataclass(frozen=True)
class PumpSpec:
    """Spectral description of a pump pulse.

    ``center_kappa`` is the offset of the pulse center from the grid center;
    a second lobe at ``center_kappa_2`` turns the quartic-exponential shape
    into the bimodal dual-pump form.  ``center_z`` displaces the pulse in z
    via a linear spectral phase.  ``mean_photon_number`` fixes the discrete
    normalization sum_j |beta_j|^2 exactly.
    """

    shape: PumpShape
    bandwidth: float
    mean_photon_number: float
    center_kappa: float = 0.0
    center_kappa_2: float | None = None
    center_z: float = 0.0
    custom: np.ndarray | None = None

    def __post_init__(self):
        if self.mean_photon_number < 0:
            raise ConfigurationError("mean_photon_number must be >= 0")
        if not self.bandwidth > 0:
            raise ConfigurationError("bandwidth must be positive")


@dataclass(frozen=True)
class MeanField:
    """Photon-normalized classical field snapshot on a grid.

    ``amplitudes[j] = <b(kappa_j, time)> sqrt(dkappa)``.
    """

    amplitudes: np.ndarray
    time: float
    mode: ModeParams
    grid: KappaGrid

    @property
    def photon_number(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def z_samples(self) -> np.ndarray:
        """Discrete z representation psi_m = psi(z_m) sqrt(dz)."""
        return fft_kappa_to_z(self.amplitudes)

    def z_field_fine(self) -> np.ndarray:
        """Continuum field psi(z) on the doubled (fine) z grid."""
        padded = self.grid.pad_spectrum(self.amplitudes)
        dz_fine = self.grid.delta_z / 2.0
        return fft_kappa_to_z(padded) / np.sqrt(dz_fine)

    def with_amplitudes(self, amplitudes: np.ndarray, time: float | None = None) -> "MeanField":
        return replace(self, amplitudes=amplitudes, time=self.time if time is None else time)


def gamma_to_zeta3(gamma_nl: float, omega: float, v: float) -> float:
    """Convert a nonlinear parameter in 1/(W m) to the coupling in m/s."""
    return gamma_nl * hbar * omega * v * v


def _normalize(amplitudes: np.ndarray, n_photons: float) -> np.ndarray:
    norm = np.sum(np.abs(amplitudes) ** 2)
    if n_photons == 0.0 or norm == 0.0:
        return np.zeros_like(amplitudes)
    return amplitudes * np.sqrt(n_photons / norm)


def make_pump(spec: PumpSpec, grid: KappaGrid, mode: ModeParams, time: float = 0.0) -> MeanField:
    """Build a photon-normalized pump from a spectral shape specification."""
    half_window = 0.5 * grid.n_points * grid.delta_kappa
    centers = [spec.center_kappa]
    if spec.center_kappa_2 is not None:
        centers.append(spec.center_kappa_2)
    worst = max(abs(c) for c in centers)
    if spec.bandwidth >= half_window:
        raise ConfigurationError(
            f"pump bandwidth {spec.bandwidth} exceeds the grid half-window {half_window}"
        )
    if spec.shape != PumpShape.CUSTOM_ARRAY and worst + 6.0 * spec.bandwidth >= half_window:
        warnings.warn(
            "pump tails approach the grid edge; increase the window or n_points",
            stacklevel=2,
        )

    if spec.shape == PumpShape.CUSTOM_ARRAY:
        if spec.custom is None:
            raise ConfigurationError("custom_array pump requires sample data")
        amp = _interp_custom(spec.custom, grid)
    else:
        amp = np.zeros(grid.n_points, dtype=complex)
        for c in centers:
            amp += _shape_amplitude(spec.shape, (grid.kappa - c) / spec.bandwidth)
    if spec.center_z != 0.0:
        amp = amp * np.exp(-1j * grid.kappa * spec.center_z)
    amp = _normalize(amp.astype(complex), spec.mean_photon_number)
    return MeanField(amplitudes=amp, time=time, mode=mode, grid=grid)


def pump_from_z_profile(
    grid: KappaGrid,
    mode: ModeParams,
    amplitude_z: np.ndarray,
    mean_photon_number: float | None = None,
    time: float = 0.0,
) -> MeanField:
    """Build a pump from continuum z samples psi(z_m).

    With ``mean_photon_number=None`` the samples are taken at face value
    (photon number = sum |psi|^2 dz); otherwise they are rescaled.
    """
    grid._check_len(amplitude_z)
    disc = np.asarray(amplitude_z, dtype=complex) * np.sqrt(grid.delta_z)
    spectrum = fft_z_to_kappa(disc)
    if mean_photon_number is not None:
        spectrum = _normalize(spectrum, mean_photon_number)
    return MeanField(amplitudes=spectrum, time=time, mode=mode, grid=grid)


def load_pump_spectrum(path, n_photons: float, grid: KappaGrid, mode: ModeParams) -> MeanField:
    """Load a custom pump spectrum from a CSV file.

    Expected columns: kappa offset in 1/m, real amplitude, imaginary
    amplitude.  Values are interpolated onto the grid and normalized to the
    requested photon number.
    """
    data = np.loadtxt(path, delimiter=",", dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ConfigurationError(f"pump file {path} must have columns kappa, re[, im]")
    amp = data[:, 1] + (1j * data[:, 2] if data.shape[1] > 2 else 0.0)
    spec = PumpSpec(
        shape=PumpShape.CUSTOM_ARRAY,
        bandwidth=max(np.ptp(data[:, 0]) / 2.0, grid.delta_kappa),
        mean_photon_number=n_photons,
        custom=np.column_stack([data[:, 0], amp]),
    )
    return make_pump(spec, grid, mode)


def _interp_custom(table: np.ndarray, grid: KappaGrid) -> np.ndarray:
    kap = np.real(table[:, 0]).astype(float)
    vals = table[:, 1].astype(complex)
    order = np.argsort(kap)
    kap, vals = kap[order], vals[order]
    re = np.interp(grid.kappa, kap, vals.real, left=0.0, right=0.0)
    im = np.interp(grid.kappa, kap, vals.imag, left=0.0, right=0.0)
    return re + 1j * im


def _edge_smoothed_indicator(z: np.ndarray, length: float, edge: float) -> np.ndarray:
    """Indicator of [-L/2, L/2] convolved with a cosine bump of width ``edge``.

    The convolution keeps the integral exactly L and makes the profile C^1,
    so spectral quadratures of the drive converge fast.
    """
    if edge <= 0.0:
        return ((z >= -length / 2) & (z <= length / 2)).astype(float)
    out = np.zeros_like(z)
    a = length / 2
    inner = np.abs(z) <= a - edge / 2
    out[inner] = 1.0
    ramp = (np.abs(z) > a - edge / 2) & (np.abs(z) < a + edge / 2)
    out[ramp] = 0.5 * (1.0 - np.sin(np.pi * (np.abs(z[ramp]) - a) / edge))
    return out


@dataclass(frozen=True)
class NonlinearCoupling:
    """Nonlinear coupling strengths and the spatial profile s(z).

    ``length`` is the extent of the nonlinear region; with ``length=None``
    the profile is uniform (s = 1 across the window) and the interaction is
    bounded by the propagation time instead.  ``edge_width`` is the
    raised-cosine edge of the region (defaults to one z cell at build time).
    """

    zeta2: complex = 0.0
    zeta3_pppp: float = 0.0
    zeta3_ssp1p2: float = 0.0
    zeta3_sp1sp1: float = 0.0
    zeta3_sp2sp2: float = 0.0
    zeta3_p1p2p1p2: float = 0.0
    length: float | None = None
    edge_width: float | None = None

    def resolved_edge(self, grid: KappaGrid) -> float:
        return grid.delta_z if self.edge_width is None else self.edge_width

    def profile(self, grid: KappaGrid, fine: bool = False, center: float = 0.0) -> np.ndarray:
        """s(z) samples; ``center`` displaces the region (a region at rest in
        the lab sits at center = -v_ref * (t - t0) in a comoving frame)."""
        z = grid.z_fine if fine else grid.z
        if self.length is None:
            return np.ones_like(z)
        if self.length > 0.95 * grid.z_extent:
            raise ConfigurationError(
                f"nonlinear region length {self.length} does not fit the z window "
                f"{grid.z_extent}"
            )
        return _edge_smoothed_indicator(z - center, self.length, self.resolved_edge(grid))


# ---------------------------------------------------------------------------
# split-step propagation of mean fields


def _linear_phase(field: MeanField, dt: float, v_ref: float) -> np.ndarray:
    om = omega_of_kappa(field.mode, field.grid.kappa) - v_ref * field.grid.kappa
    return np.exp((-1j * om - 0.5 * field.mode.gamma_loss) * dt)


def step_meanfield(
    field: MeanField,
    coupling: NonlinearCoupling | None,
    dt: float,
    *,
    spm_zeta3: float | None = None,
    xpm_partners=(),
    v_ref: float = 0.0,
    profile_center: float = 0.0,
) -> MeanField:
    """Advance one symmetric split step (dispersion+loss / Kerr phase).

    ``spm_zeta3`` defaults to ``coupling.zeta3_pppp``; pass 0.0 for a pump
    that propagates freely (e.g. the second-harmonic drive).  XPM partners
    are (MeanField, zeta3_cross) pairs sharing the grid; each adds the phase
    2 * zeta3_cross * s(z) * |psi_partner|^2 * dt.  ``profile_center``
    displaces a finite nonlinear region (comoving frames).
    """
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    for partner, _ in xpm_partners:
        if partner.grid is not field.grid and partner.grid != field.grid:
            raise DimensionMismatchError("XPM partners must share the grid")

    half = _linear_phase(field, 0.5 * dt, v_ref)
    amp = field.amplitudes * half

    zeta = spm_zeta3
    if zeta is None:
        zeta = coupling.zeta3_pppp if coupling is not None else 0.0
    has_nl = zeta != 0.0 or any(z != 0.0 for _, z in xpm_partners)
    if has_nl:
        s_z = (
            coupling.profile(field.grid, center=profile_center)
            if coupling is not None
            else 1.0
        )
        dz = field.grid.delta_z
        psi = fft_kappa_to_z(amp)
        phase = zeta * np.abs(psi) ** 2 / dz
        for partner, zx in xpm_partners:
            if zx == 0.0:
                continue
            psi_p = partner.with_amplitudes(partner.amplitudes * _linear_phase(partner, 0.5 * dt, v_ref)).z_samples()
            phase = phase + 2.0 * zx * np.abs(psi_p) ** 2 / dz
        psi = psi * np.exp(1j * s_z * phase * dt)
        amp = fft_z_to_kappa(psi)

    amp = amp * half
    return field.with_amplitudes(amp, time=field.time + dt)


# ---------------------------------------------------------------------------
# drive fields


@dataclass(frozen=True)
class DriveFields:
    """Pump-driven coupling functions sampled at one time.

    ``s_sum[p]`` holds S(kappa, t) at kappa = (p - n) dkappa on the extended
    grid (covers all pairwise sums kappa_j + kappa_j'), ``m_diff[p]`` holds
    M(kappa, t) on the same grid (covers all differences).  ``s_z`` and
    ``m_z`` are the corresponding z-local drives on the coarse z grid, used
    by the split-step propagator.
    """

    s_sum: np.ndarray
    m_diff: np.ndarray
    s_z: np.ndarray
    m_z: np.ndarray
    time: float

    @property
    def n_points(self) -> int:
        return len(self.s_z)


def _drive_transform(grid: KappaGrid, values_z_fine: np.ndarray) -> np.ndarray:
    """S(kappa) = int dz e^{-i kappa z} S~(z) / sqrt(2 pi) on the extended grid."""
    n2 = 2 * grid.n_points
    dz_fine = grid.delta_z / 2.0
    scale = dz_fine * np.sqrt(n2) / np.sqrt(2.0 * np.pi)
    return scale * fft_z_to_kappa(np.asarray(values_z_fine, dtype=complex))


def drive_from_z_products(
    grid: KappaGrid, s_tilde_fine: np.ndarray, m_tilde_fine: np.ndarray, time: float
) -> DriveFields:
    """Assemble DriveFields from the z-local drives on the fine grid."""
    s_tilde_fine = np.asarray(s_tilde_fine, dtype=complex)
    m_tilde_fine = np.asarray(m_tilde_fine, dtype=float)
    if len(s_tilde_fine) != 2 * grid.n_points:
        raise DimensionMismatchError("fine-grid drive must have length 2n")
    return DriveFields(
        s_sum=_drive_transform(grid, s_tilde_fine),
        m_diff=_drive_transform(grid, m_tilde_fine),
        s_z=s_tilde_fine[::2].copy(),
        m_z=m_tilde_fine[::2].real.copy(),
        time=time,
    )


def drive_spdc(
    pump_sh: MeanField,
    coupling: NonlinearCoupling,
    grid: KappaGrid,
    profile_center: float = 0.0,
) -> DriveFields:
    """S~ = zeta2 s(z) <psi_SH(z)>, no phase-modulation drive."""
    s_fine = coupling.profile(grid, fine=True, center=profile_center)
    psi = pump_sh.z_field_fine()
    s_tilde = coupling.zeta2 * s_fine * psi
    return drive_from_z_products(grid, s_tilde, np.zeros_like(s_fine), pump_sh.time)


def drive_single_pump(
    pump: MeanField, coupling: NonlinearCoupling, profile_center: float = 0.0
) -> DriveFields:
    """S~ = zeta3 s(z) <psi>^2 and M~ = zeta3 s(z) |<psi>|^2."""
    grid = pump.grid
    s_fine = coupling.profile(grid, fine=True, center=profile_center)
    psi = pump.z_field_fine()
    zs = coupling.zeta3_pppp * s_fine
    return drive_from_z_products(grid, zs * psi * psi, zs * np.abs(psi) ** 2, pump.time)


def drive_dual_pump(
    pump1: MeanField,
    pump2: MeanField,
    coupling: NonlinearCoupling,
    profile_center: float = 0.0,
) -> DriveFields:
    """Three-mode dual-pump drives for the signal fluctuations."""
    grid = pump1.grid
    if pump2.grid != grid:
        raise DimensionMismatchError("dual pumps must share a grid")
    if abs(pump1.time - pump2.time) > 1e-15 * max(1.0, abs(pump1.time)):
        raise ConfigurationError("dual pumps must be sampled at a common time")
    s_fine = coupling.profile(grid, fine=True, center=profile_center)
    p1 = pump1.z_field_fine()
    p2 = pump2.z_field_fine()
    s_tilde = 2.0 * coupling.zeta3_ssp1p2 * s_fine * p1 * p2
    m_tilde = s_fine * (
        coupling.zeta3_sp1sp1 * np.abs(p1) ** 2 + coupling.zeta3_sp2sp2 * np.abs(p2) ** 2
    )
    return drive_from_z_products(grid, s_tilde, m_tilde, pump1.time)


def drive_fields(fields: dict, coupling: NonlinearCoupling, grid: KappaGrid, process: str) -> DriveFields:
    """Dispatch drive construction by process name.

    ``fields`` maps pump labels to MeanField values: "sh" for downconversion,
    "p" for single-pump four-wave mixing, "p1"/"p2" for the dual-pump case.
    """
    try:
        if process == "spdc":
            return drive_spdc(fields["sh"], coupling, grid)
        if process == "single_pump":
            return drive_single_pump(fields["p"], coupling)
        if process == "dual_pump":
            return drive_dual_pump(fields["p1"], fields["p2"], coupling)
    except KeyError as exc:
        raise ConfigurationError(f"process {process!r} is missing pump {exc}") from None
    raise ConfigurationError(f"unknown process {process!r}")


# ---------------------------------------------------------------------------
# drive sources: advance mean fields and hand out midpoint drives


class _DriveSource:
    """Base for callables mapping a requested time to DriveFields.

    The propagator asks for drives at successive step midpoints; the source
    advances its internal mean fields with matching split steps.  In a
    comoving frame (v_ref != 0) a finite nonlinear region, at rest in the
    lab, drifts backwards: the profile center is -v_ref (t - t_ref).
    """

    def __init__(self, coupling: NonlinearCoupling, v_ref: float, t_ref: float):
        self.coupling = coupling
        self.v_ref = v_ref
        self.t_ref = t_ref

    def _profile_center(self, t: float) -> float:
        return -self.v_ref * (t - self.t_ref)

    def _advance(self, t: float) -> None:
        raise NotImplementedError

    def _build(self) -> DriveFields:
        raise NotImplementedError

    def __call__(self, t: float) -> DriveFields:
        self._advance(t)
        return self._build()


class SpdcDriveSource(_DriveSource):
    def __init__(self, pump_sh: MeanField, coupling: NonlinearCoupling, v_ref: float = 0.0):
        super().__init__(coupling, v_ref, pump_sh.time)
        self.pump = pump_sh

    def _advance(self, t: float) -> None:
        dt = t - self.pump.time
        if dt > 0:
            self.pump = step_meanfield(
                self.pump, self.coupling, dt, spm_zeta3=0.0, v_ref=self.v_ref
            )

    def _build(self) -> DriveFields:
        return drive_spdc(
            self.pump, self.coupling, self.pump.grid,
            profile_center=self._profile_center(self.pump.time),
        )


class SinglePumpDriveSource(_DriveSource):
    def __init__(self, pump: MeanField, coupling: NonlinearCoupling, v_ref: float = 0.0):
        super().__init__(coupling, v_ref, pump.time)
        self.pump = pump

    def _advance(self, t: float) -> None:
        dt = t - self.pump.time
        if dt > 0:
            self.pump = step_meanfield(
                self.pump, self.coupling, dt, v_ref=self.v_ref,
                profile_center=self._profile_center(self.pump.time + 0.5 * dt),
            )

    def _build(self) -> DriveFields:
        return drive_single_pump(
            self.pump, self.coupling,
            profile_center=self._profile_center(self.pump.time),
        )


class DualPumpDriveSource(_DriveSource):
    def __init__(
        self,
        pump1: MeanField,
        pump2: MeanField,
        coupling: NonlinearCoupling,
        v_ref: float = 0.0,
    ):
        super().__init__(coupling, v_ref, pump1.time)
        self.pump1 = pump1
        self.pump2 = pump2

    def _advance(self, t: float) -> None:
        dt = t - self.pump1.time
        if dt <= 0:
            return
        c = self.coupling
        new1 = step_meanfield(
            self.pump1,
            c,
            dt,
            spm_zeta3=c.zeta3_pppp,
            xpm_partners=[(self.pump2, c.zeta3_p1p2p1p2)],
            v_ref=self.v_ref,
        )
        new2 = step_meanfield(
            self.pump2,
            c,
            dt,
            spm_zeta3=c.zeta3_pppp,
            xpm_partners=[(self.pump1, c.zeta3_p1p2p1p2)],
            v_ref=self.v_ref,
        )
        self.pump1, self.pump2 = new1, new2

    def _build(self) -> DriveFields:
        return drive_dual_pump(
            self.pump1, self.pump2, self.coupling,
            profile_center=self._profile_center(self.pump1.time),
        )
