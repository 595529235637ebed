"""Emission spectra and dressed-state structure of the coupled system.

The photoluminescence power spectral density is the Wiener-Khinchin
spectrum of the stationary field correlations,

    S(w) = 2 Re  integral_0^inf  [<a^dag(tau) a> + <b^dag(tau) b>] e^{-i w tau} dtau,

evaluated through the quantum regression theorem: a rho_ss (and b rho_ss)
evolve under the same Liouvillian as the state, and the trace against
a^dag (b^dag) gives the correlation.  Frequencies are reported as the
detuning from the zero-field dot line, Delta = w - omega_o, by working in
the frame rotating at omega_o.

Because the pumped, undriven generator conserves the excitation ladder,
the whole correlation lives in the ladder sector k = -1 whose dimension is
a small fraction of d^2.  Its eigendecomposition gives the one-sided
Fourier integral in closed form (each mode contributes w_k / (i Delta -
lambda_k)), with no time grid and no truncation ringing, so the spectrum
is exact for the truncated model and nonnegative to rounding.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.optimize

from .dynamics import (
    ladder_sector,
    liouvillian_matrix,
    restrict_superoperator,
    unvec,
    vec,
)
from .errors import InvalidDimensionError, NonUniqueSteadyStateError
from .model import (
    SystemParams,
    bare_hamiltonian,
    collapse_operators,
    interaction_hamiltonian,
    excitation_number,
    mode_a,
    mode_b,
    pump_operators,
    rotating_frame,
)
from .operators import DensityMatrix

#: spectral values below this (absolute) are treated as computation errors
NEGATIVITY_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Power spectral density on a detuning grid (Delta = w - omega_o)."""

    omegas: np.ndarray
    values: np.ndarray
    metadata: dict

    def __post_init__(self):
        values = np.asarray(self.values)
        if np.any(values < -NEGATIVITY_TOL):
            raise ValueError(
                f"spectrum has negative values down to {values.min():.3e}; "
                "this indicates a computation error"
            )
        object.__setattr__(self, "values", np.real(values))
        object.__setattr__(self, "omegas", np.asarray(self.omegas, dtype=float))


@dataclass(frozen=True)
class EigenBranches:
    """Transition-energy branches of the one-excitation manifold versus B.

    ``branches[i, :]`` are the branch values at ``b_grid[i]``, as detunings
    from the zero-field dot line; columns are matched across rows by a
    continuity-tracking assignment, not by plain sorting.
    """

    b_grid: np.ndarray
    branches: np.ndarray
    include_cavity: bool


def correlation_modes(
    params: SystemParams, pump_rate: float
) -> tuple[np.ndarray, np.ndarray, DensityMatrix]:
    """Decay modes of the stationary field correlations.

    Returns ``(lambdas, weights, rho_ss)``: the ladder-sector Liouvillian
    eigenvalues (all in the open left half-plane), the combined mode
    weights of the a- and b-channel correlations, and the stationary
    state.  The spectrum is ``2 Re sum_k weights_k / (i Delta - lambdas_k)``.
    """
    if pump_rate <= 0:
        raise ValueError("photoluminescence requires a positive pump rate")
    if params.kappa_a <= 0 or params.kappa_b <= 0:
        raise ValueError("a stationary emission spectrum requires cavity decay")
    space = params.space()
    h = rotating_frame(bare_hamiltonian(params) + interaction_hamiltonian(params), params.omega_o)
    c_ops = collapse_operators(params) + pump_operators(pump_rate, space)
    sup = liouvillian_matrix(h.matrix, [c.matrix for c in c_ops], sparse=True)
    quanta = np.rint(np.real(np.diag(excitation_number(space).matrix))).astype(int)

    rho_ss = _sector_steadystate(sup, quanta, space)

    sector = ladder_sector(quanta, -1)
    block = restrict_superoperator(sup, sector)
    lambdas, vectors = np.linalg.eig(block)
    if np.any(lambdas.real > 1e-8):
        raise ValueError(
            f"correlation sector has a growing mode (max Re = {lambdas.real.max():.3e})"
        )

    weights = []
    for mode in (mode_a(space), mode_b(space)):
        x0 = vec(mode.matrix @ rho_ss.matrix)[sector]
        left = vec(mode.matrix).conj()[sector]
        y = np.linalg.solve(vectors, x0)
        weights.append((left @ vectors) * y)
    return lambdas, np.concatenate([weights[0], weights[1]]), rho_ss


def _sector_steadystate(sup, quanta: np.ndarray, space) -> DensityMatrix:
    """Stationary state solved within the ladder-diagonal sector (k = 0)."""
    d = space.dim
    sector = ladder_sector(quanta, 0)
    block = restrict_superoperator(sup, sector)
    diag_flat = np.arange(d) * (d + 1)
    positions = {flat: pos for pos, flat in enumerate(sector)}
    diag_positions = [positions[f] for f in diag_flat]

    a = block.copy()
    a[0, :] = 0.0
    a[0, diag_positions] = 1.0
    b = np.zeros(len(sector), dtype=complex)
    b[0] = 1.0
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as err:
        raise NonUniqueSteadyStateError(_nullity(block)) from err
    residual = float(np.linalg.norm(block @ x))
    if residual > 1e-9 * max(1.0, float(np.abs(block).max())):
        raise NonUniqueSteadyStateError(_nullity(block))

    full = np.zeros(d * d, dtype=complex)
    full[sector] = x
    rho = unvec(full, d)
    rho = (rho + rho.conj().T) / 2.0
    rho = rho / rho.trace().real
    return DensityMatrix(rho, space, tol=1e-7)


def _nullity(block: np.ndarray) -> int:
    svals = np.linalg.svd(block, compute_uv=False)
    scale = svals.max() if svals.size else 1.0
    return int(np.sum(svals < 1e-12 * max(scale, 1.0)))


def emission_spectrum(
    params: SystemParams, pump_rate: float, omega_grid: np.ndarray
) -> Spectrum:
    """Photoluminescence spectrum over a detuning grid.

    ``omega_grid`` holds detunings Delta = w - omega_o in rad/ns.  The
    stationary state is established by incoherent pumping of both modes at
    ``pump_rate``; emission from both modes is summed.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    lambdas, weights, rho_ss = correlation_modes(params, pump_rate)
    lam2 = np.concatenate([lambdas, lambdas])
    denom = 1j * omega_grid[:, None] - lam2[None, :]
    values = 2.0 * np.real((weights[None, :] / denom).sum(axis=1))
    meta = {
        "params": asdict(params),
        "pump_rate": pump_rate,
        "n_ss": {
            "a": float(np.real(np.trace((mode_a(params.space()).dag() @ mode_a(params.space())).matrix @ rho_ss.matrix))),
            "b": float(np.real(np.trace((mode_b(params.space()).dag() @ mode_b(params.space())).matrix @ rho_ss.matrix))),
        },
    }
    return Spectrum(omega_grid, values, meta)


def emission_spectrum_dense(
    params: SystemParams, pump_rate: float, omega_grid: np.ndarray
) -> Spectrum:
    """Reference spectrum from the full, unrestricted superoperator.

    Same quantity as :func:`emission_spectrum` computed without the
    ladder-sector reduction; exponentially more expensive, kept as the
    independent cross-check route for small cutoffs.
    """
    from .dynamics import build_liouvillian, steadystate

    omega_grid = np.asarray(omega_grid, dtype=float)
    space = params.space()
    h = rotating_frame(bare_hamiltonian(params) + interaction_hamiltonian(params), params.omega_o)
    c_ops = collapse_operators(params) + pump_operators(pump_rate, space)
    liouv = build_liouvillian(h, c_ops)
    rho_ss = steadystate(liouv)
    lambdas, vectors = np.linalg.eig(liouv.superoperator)
    values = np.zeros_like(omega_grid)
    for mode in (mode_a(space), mode_b(space)):
        x0 = vec(mode.matrix @ rho_ss.matrix)
        left = vec(mode.matrix).conj()
        y = np.linalg.solve(vectors, x0)
        w = (left @ vectors) * y
        keep = np.abs(w) > 0
        denom = 1j * omega_grid[:, None] - lambdas[None, keep]
        values += 2.0 * np.real((w[None, keep] / denom).sum(axis=1))
    meta = {"params": asdict(params), "pump_rate": pump_rate, "method": "dense"}
    return Spectrum(omega_grid, values, meta)


# --- single-excitation eigenstructure ------------------------------------------

#: bare one-excitation basis (n_a, n_b, dot level), fixed order
_ONE_EXCITATION_BASIS = [
    (1, 0, 1),
    (0, 1, 1),
    (1, 0, 2),
    (0, 1, 2),
    (0, 0, 3),
    (0, 0, 4),
]


def single_excitation_eigenvalues(
    params: SystemParams, b_grid: np.ndarray, include_cavity: bool
) -> EigenBranches:
    """Optical transition energies of the one-excitation manifold versus B.

    Without the cavity the four bare dot transitions are returned.  With
    the cavity, the Hamiltonian restricted to the six one-quantum bare
    states is diagonalized (losses ignored) and each eigenstate is turned
    into a transition energy by subtracting the energy of its reference
    spin ground state: photon-dominated states reference the ground state
    they already contain; trion-dominated states reference the ground
    state reached through their larger photonic admixture (at exactly zero
    coupling, the channel with the smaller bare energy gap).  Values are
    detunings from the zero-field dot line.
    """
    b_grid = np.asarray(b_grid, dtype=float)
    rows = []
    for b in b_grid:
        p = replace(params, b_field=float(b))
        if include_cavity:
            rows.append(_cavity_transitions(p))
        else:
            rows.append(np.array([p.omega_13, p.omega_14, p.omega_23, p.omega_24]) - p.omega_o)
    branches = _track_continuity(np.array(rows))
    return EigenBranches(b_grid, branches, include_cavity)


def _one_excitation_block(params: SystemParams) -> np.ndarray:
    p = params if params.fock_cutoff >= 2 else replace(params, fock_cutoff=2)
    space = p.space()
    dims = space.dims
    h = (bare_hamiltonian(p) + interaction_hamiltonian(p)).matrix
    flat = [
        (na * dims[1] + nb) * dims[2] + (level - 1)
        for na, nb, level in _ONE_EXCITATION_BASIS
    ]
    return h[np.ix_(flat, flat)]


def _cavity_transitions(params: SystemParams) -> np.ndarray:
    block = _one_excitation_block(params)
    energies, vectors = np.linalg.eigh(block)
    e_ground = {1: -params.delta_e / 2.0, 2: +params.delta_e / 2.0}
    # per bare basis state: reference ground and, for trions, the two
    # (photonic partner index, ground) decay channels
    photon_ground = {0: 1, 1: 1, 2: 2, 3: 2}
    trion_channels = {4: ((1, 1), (2, 2)), 5: ((0, 1), (3, 2))}
    values = np.empty(len(energies))
    for k in range(len(energies)):
        v = vectors[:, k]
        dominant = int(np.argmax(np.abs(v) ** 2))
        if dominant in photon_ground:
            ground = photon_ground[dominant]
        else:
            (i1, g1), (i2, g2) = trion_channels[dominant]
            w1, w2 = abs(v[i1]) ** 2, abs(v[i2]) ** 2
            if not np.isclose(w1, w2, rtol=1e-9, atol=1e-30):
                ground = g1 if w1 > w2 else g2
            else:
                # zero-coupling fallback: the channel with the smaller bare gap
                # dominates at infinitesimal coupling
                gap1 = abs(block[dominant, dominant].real - block[i1, i1].real)
                gap2 = abs(block[dominant, dominant].real - block[i2, i2].real)
                ground = g1 if gap1 <= gap2 else g2
        values[k] = energies[k] - e_ground[ground] - params.omega_o
    return values


def _track_continuity(rows: np.ndarray) -> np.ndarray:
    """Reorder branch columns row-by-row to minimize jumps between rows."""
    if len(rows) == 0:
        return rows
    out = np.empty_like(rows)
    out[0] = np.sort(rows[0])
    for i in range(1, len(rows)):
        cost = np.abs(out[i - 1][:, None] - rows[i][None, :])
        _, cols = scipy.optimize.linear_sum_assignment(cost)
        out[i] = rows[i][cols]
    return out


# --- peak finding ---------------------------------------------------------------

def find_peaks(spectrum: Spectrum, prominence: float) -> list[tuple[float, float]]:
    """Local maxima with prominence above ``prominence``, sorted by frequency.

    Prominence of a peak is its height above the higher of the two
    flanking minima (the valley floors to its left and right, with the
    grid endpoints acting as valleys).  Requires a uniform frequency grid.
    """
    omegas, values = spectrum.omegas, spectrum.values
    if len(omegas) < 3:
        return []
    steps = np.diff(omegas)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("peak finding requires a uniform frequency grid")
    maxima = [
        i
        for i in range(1, len(values) - 1)
        if values[i] > values[i - 1] and values[i] > values[i + 1]
    ]
    peaks = []
    boundaries = [0] + maxima + [len(values) - 1]
    for pos, i in enumerate(maxima, start=1):
        left_floor = values[boundaries[pos - 1] : i + 1].min()
        right_floor = values[i : boundaries[pos + 1] + 1].min()
        if values[i] - max(left_floor, right_floor) > prominence:
            peaks.append((float(omegas[i]), float(values[i])))
    return peaks
