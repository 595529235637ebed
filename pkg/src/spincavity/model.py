"""System parameters, Hamiltonians, and dissipation channels.

Level scheme (magnetic field in Voigt geometry, spin quantized along x):
levels 1, 2 are the electron-spin ground states split by delta_e, levels
3, 4 the trion states split by delta_h.  Cavity mode a (H polarized)
couples the outer transitions 1<->4 and 2<->3; mode b (V polarized)
couples the inner transitions 1<->3 and 2<->4 with a relative factor i
from the pi/2 phase between the horizontal and vertical dipoles.

Units: every frequency and rate in this module is an angular frequency in
rad/ns, times are in ns.  Configuration boundaries (CLI, scenario files)
accept plain "frequency / 2 pi" values in GHz and convert once on entry,
so a decay rate quoted as kappa/2pi = 20 GHz enters here as 2*pi*20.

Dissipation follows the convention L(c) rho = 2 c rho c^dag - c^dag c rho
- rho c^dag c (note the factor 2: a collapse operator sqrt(kappa) a gives
photon-number decay at rate 2*kappa).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidDimensionError
from .operators import (
    HilbertSpace,
    Operator,
    embed,
    fock_annihilation,
    qd_cavity_space,
    qd_transition,
)

TWO_PI = 2.0 * math.pi

#: Bohr magneton over Planck constant, in GHz per tesla
MU_B_GHZ_PER_T = 13.996244936
#: Bohr magneton as an angular frequency per tesla (rad/ns/T)
MU_B = TWO_PI * MU_B_GHZ_PER_T

#: default Lande g-factors, back-computed so that B = 5 T gives the splittings
#: delta_e/2pi = 28 GHz and delta_h/2pi = 14 GHz exactly.  These are a
#: convenience for reproducing the standard parameter set, not measured values.
G_E_DEFAULT = 28.0 / (5.0 * MU_B_GHZ_PER_T)
G_H_DEFAULT = 14.0 / (5.0 * MU_B_GHZ_PER_T)


def ghz(value: float) -> float:
    """Convert a plain frequency in GHz to an angular frequency in rad/ns."""
    return TWO_PI * value


def ps(value: float) -> float:
    """Convert picoseconds to the internal time unit (ns)."""
    return value * 1e-3


class Polarization(enum.Enum):
    """Laser polarization convention fixing relative drive phases.

    Circular light drives both H and V transitions with real Rabi
    frequencies (the i from the vertical dipole cancels against the i
    between the polarization components); for a cavity drive the same
    reasoning puts the factor i on the mode-b term instead.  Diagonal
    (45 degree) light leaves a residual pi/2 phase on the V-transition
    Rabi term, which is what makes such pulses useless for spin rotation.
    """

    CIRCULAR = "circular"
    DIAGONAL = "diagonal"
    LINEAR_H = "linear_H"
    LINEAR_V = "linear_V"


@dataclass(frozen=True)
class PulseEnvelope:
    """Scalar drive envelope; multiplies the drive operator at each time.

    ``fwhm`` is the full width at half maximum of the pulse *intensity*
    (envelope squared), in ns; the amplitude envelope is then wider by a
    factor sqrt(2).  ``amplitude_scale`` rescales the whole envelope.
    """

    shape: str = "constant"  # "constant" | "gaussian"
    fwhm: float = 0.0
    center: float = 0.0
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if self.shape not in ("constant", "gaussian"):
            raise ValueError(f"unknown envelope shape {self.shape!r}")
        if self.shape == "gaussian" and self.fwhm <= 0:
            raise ValueError("gaussian envelope requires fwhm > 0")

    def __call__(self, t: float) -> float:
        if self.shape == "constant":
            return self.amplitude_scale
        # intensity fwhm -> amplitude envelope exp(-2 ln2 (t-c)^2 / fwhm^2)
        x = (t - self.center) / self.fwhm
        return self.amplitude_scale * math.exp(-2.0 * math.log(2.0) * x * x)


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and frequencies of the dot + bimodal cavity system.

    All angular frequencies (rad/ns).  ``omega_o`` is the zero-field dot
    transition frequency and doubles as the energy reference, so 0.0 is a
    fine value; only detunings from it enter any observable.
    """

    g_a: float = ghz(20.0)
    g_b: float = ghz(20.0)
    kappa_a: float = ghz(20.0)
    kappa_b: float = ghz(20.0)
    gamma_41: float = ghz(1.0)
    gamma_42: float = ghz(1.0)
    gamma_31: float = ghz(1.0)
    gamma_32: float = ghz(1.0)
    omega_o: float = 0.0
    omega_a: float = 0.0
    omega_b: float = 0.0
    b_field: float = 5.0
    g_e: float = G_E_DEFAULT
    g_h: float = G_H_DEFAULT
    mu_b: float = MU_B
    fock_cutoff: int = 4

    def __post_init__(self):
        rates = {
            "g_a": self.g_a, "g_b": self.g_b,
            "kappa_a": self.kappa_a, "kappa_b": self.kappa_b,
            "gamma_41": self.gamma_41, "gamma_42": self.gamma_42,
            "gamma_31": self.gamma_31, "gamma_32": self.gamma_32,
            "g_e": self.g_e, "g_h": self.g_h, "mu_b": self.mu_b,
            "b_field": self.b_field,
        }
        for name, value in rates.items():
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        if self.fock_cutoff < 1:
            raise InvalidDimensionError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")

    @property
    def delta_e(self) -> float:
        """Electron Zeeman splitting g_e * mu_B * B."""
        return self.g_e * self.mu_b * self.b_field

    @property
    def delta_h(self) -> float:
        """Hole Zeeman splitting g_h * mu_B * B."""
        return self.g_h * self.mu_b * self.b_field

    # bare transition frequencies, from the diagonal dot energies
    @property
    def omega_14(self) -> float:
        return self.omega_o + (self.delta_e + self.delta_h) / 2.0

    @property
    def omega_13(self) -> float:
        return self.omega_o + (self.delta_e - self.delta_h) / 2.0

    @property
    def omega_24(self) -> float:
        return self.omega_o + (self.delta_h - self.delta_e) / 2.0

    @property
    def omega_23(self) -> float:
        return self.omega_o - (self.delta_e + self.delta_h) / 2.0

    def space(self) -> HilbertSpace:
        return qd_cavity_space(self.fock_cutoff)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DriveConfig:
    """Laser frequency, drive amplitudes, polarization and pulse envelope.

    ``eps_a``/``eps_b`` are cavity drive rates, ``omega_h``/``omega_v``
    direct dot Rabi frequencies; all >= 0 and in rad/ns.  Amplitudes for
    the component masked out by a linear polarization are ignored.
    """

    omega_l: float = 0.0
    eps_a: float = 0.0
    eps_b: float = 0.0
    omega_h: float = 0.0
    omega_v: float = 0.0
    polarization: Polarization = Polarization.CIRCULAR
    envelope: PulseEnvelope = field(default_factory=PulseEnvelope)

    def __post_init__(self):
        for name in ("eps_a", "eps_b", "omega_h", "omega_v"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not math.isfinite(self.omega_l):
            raise ValueError("laser frequency must be finite")


# --- elementary embedded operators -------------------------------------------

def mode_a(space: HilbertSpace) -> Operator:
    """Annihilation operator of cavity mode a on the full space."""
    return embed(fock_annihilation(space.dims[0]), 0, space)


def mode_b(space: HilbertSpace) -> Operator:
    """Annihilation operator of cavity mode b on the full space."""
    return embed(fock_annihilation(space.dims[1]), 1, space)


def dot_op(i: int, j: int, space: HilbertSpace) -> Operator:
    """|i><j| of the dot embedded in the full space."""
    return embed(qd_transition(i, j), 2, space)


def excitation_number(space: HilbertSpace) -> Operator:
    """Total excitation number a^dag a + b^dag b + |3><3| + |4><4|.

    Commutes with the bare and interaction Hamiltonians; it generates the
    rotating-frame transformation and defines the excitation ladder used
    by the spectrum and ring-down solvers.
    """
    a, b = mode_a(space), mode_b(space)
    return a.dag() @ a + b.dag() @ b + dot_op(3, 3, space) + dot_op(4, 4, space)


# --- Hamiltonian builders -----------------------------------------------------

def bare_hamiltonian(params: SystemParams) -> Operator:
    """Dot Zeeman/trion energies plus free cavity modes.

    Diagonal dot energies (-delta_e/2, +delta_e/2, omega_o - delta_h/2,
    omega_o + delta_h/2) plus omega_a a^dag a + omega_b b^dag b.
    """
    space = params.space()
    de, dh = params.delta_e, params.delta_h
    a, b = mode_a(space), mode_b(space)
    h = (
        (-de / 2.0) * dot_op(1, 1, space)
        + (de / 2.0) * dot_op(2, 2, space)
        + (params.omega_o - dh / 2.0) * dot_op(3, 3, space)
        + (params.omega_o + dh / 2.0) * dot_op(4, 4, space)
        + params.omega_a * (a.dag() @ a)
        + params.omega_b * (b.dag() @ b)
    )
    return h


def interaction_hamiltonian(params: SystemParams) -> Operator:
    """Dot-cavity coupling in the rotating-wave approximation.

    g_a a^dag (sigma_14 + sigma_23) + i g_b b^dag (sigma_24 + sigma_13) + h.c.
    The factor i on the mode-b term encodes the pi/2 phase of the vertical
    dipole and is required for the correct polarization selection rules.
    """
    space = params.space()
    a, b = mode_a(space), mode_b(space)
    lower_a = dot_op(1, 4, space) + dot_op(2, 3, space)
    lower_b = dot_op(2, 4, space) + dot_op(1, 3, space)
    half = params.g_a * (a.dag() @ lower_a) + (1j * params.g_b) * (b.dag() @ lower_b)
    return half + half.dag()


def cavity_drive(drive: DriveConfig, space: HilbertSpace) -> Operator:
    """Rotating-frame cavity driving term.

    eps_a (a + a^dag) plus the mode-b term with the polarization phase:
    circular light gives eps_a a + i eps_b b + h.c. because the cavity
    drive rates carry no dot-dipole phase.  Linear H drives mode a only,
    linear V mode b only.
    """
    eps_a, eps_b = _masked_pair(drive, drive.eps_a, drive.eps_b)
    phase = 1j if drive.polarization is Polarization.CIRCULAR else 1.0
    return drive_term(eps_a, phase * eps_b, space)


def drive_term(amp_a: complex, amp_b: complex, space: HilbertSpace) -> Operator:
    """amp_a a + amp_b b + h.c. with arbitrary complex amplitudes."""
    half = amp_a * mode_a(space) + amp_b * mode_b(space)
    return half + half.dag()


def qd_drive(drive: DriveConfig, space: HilbertSpace) -> Operator:
    """Rotating-frame direct dot driving term.

    omega_h (sigma_13 + sigma_24) + omega_v (sigma_23 + sigma_14) + h.c.
    with real Rabi frequencies for circular polarization; diagonal (45
    degree) polarization puts a factor i on the omega_v term.
    """
    om_h, om_v = _masked_pair(drive, drive.omega_h, drive.omega_v)
    phase = 1j if drive.polarization is Polarization.DIAGONAL else 1.0
    return qd_drive_term(om_h, phase * om_v, space)


def qd_drive_term(amp_h: complex, amp_v: complex, space: HilbertSpace) -> Operator:
    """amp_h (sigma_13 + sigma_24) + amp_v (sigma_23 + sigma_14) + h.c."""
    half = amp_h * (dot_op(1, 3, space) + dot_op(2, 4, space)) + amp_v * (
        dot_op(2, 3, space) + dot_op(1, 4, space)
    )
    return half + half.dag()


def _masked_pair(drive: DriveConfig, h_amp: float, v_amp: float) -> tuple[float, float]:
    if drive.polarization is Polarization.LINEAR_H:
        return h_amp, 0.0
    if drive.polarization is Polarization.LINEAR_V:
        return 0.0, v_amp
    return h_amp, v_amp


def rotating_frame(h_lab: Operator, omega_l: float) -> Operator:
    """Shift to the frame co-rotating at the laser frequency.

    Subtracts omega_l * (a^dag a + b^dag b + |3><3| + |4><4|), turning the
    cavity and trion energies into detunings from the laser while leaving
    the interaction and (already co-rotating) drive terms untouched.
    """
    if not math.isfinite(omega_l):
        raise ValueError("laser frequency must be finite")
    return h_lab - omega_l * excitation_number(h_lab.space)


def collapse_operators(params: SystemParams) -> list[Operator]:
    """The six loss channels: two cavity decays and four dipole decays.

    sqrt(kappa_a) a, sqrt(kappa_b) b, and sqrt(gamma_ij) |j><i| for each
    trion decay i -> j (trion 4 or 3 into ground 1 or 2).
    """
    space = params.space()
    return [
        math.sqrt(params.kappa_a) * mode_a(space),
        math.sqrt(params.kappa_b) * mode_b(space),
        math.sqrt(params.gamma_41) * dot_op(1, 4, space),
        math.sqrt(params.gamma_42) * dot_op(2, 4, space),
        math.sqrt(params.gamma_31) * dot_op(1, 3, space),
        math.sqrt(params.gamma_32) * dot_op(2, 3, space),
    ]


def pump_operators(pump_rate: float, space: HilbertSpace) -> list[Operator]:
    """Incoherent cavity feeding terms sqrt(P) a^dag and sqrt(P) b^dag.

    Model of above-band pumping in photoluminescence: carriers relax and
    populate both cavity modes at rate P.
    """
    if pump_rate < 0:
        raise ValueError(f"pump rate must be >= 0, got {pump_rate}")
    amp = math.sqrt(pump_rate)
    return [amp * mode_a(space).dag(), amp * mode_b(space).dag()]
