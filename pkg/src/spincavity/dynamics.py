"""Master-equation dynamics: Liouvillian assembly, propagation, steady states.

The master equation is d rho/dt = -i[H, rho] + sum_j L(c_j) rho with the
dissipator convention L(c) rho = 2 c rho c^dag - c^dag c rho - rho c^dag c.
The factor 2 on the sandwich term is deliberate and fixed package-wide;
under it a collapse operator sqrt(kappa) a decays the photon number at
rate 2 kappa, and every analytic benchmark in the tests uses the same
convention.

Vectorization is column-stacking: vec(rho)[m + n*d] = rho[m, n], so the
superoperator for A rho B^dag is kron(conj(B), A).

Two propagation paths exist: an adaptive embedded Runge-Kutta (4/5) on the
vectorized equation (works for pulsed, time-dependent generators) and an
exact matrix-exponential path for constant Liouvillians, used as the test
oracle and for cheap ring-down propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.integrate import solve_ivp

from .errors import (
    InvalidDimensionError,
    InvalidHamiltonianError,
    IntegrationFailureError,
    NonUniqueSteadyStateError,
)
from .operators import DensityMatrix, HilbertSpace, Operator, partial_trace

#: default integrator tolerances (per-step relative / absolute)
RTOL = 1e-8
ATOL = 1e-10

#: tolerance on ||L vec(rho_ss)|| for an accepted steady state
STEADYSTATE_RESIDUAL_TOL = 1e-9


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(matrix, dtype=complex).flatten(order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(vector, dtype=complex).reshape((dim, dim), order="F")


def liouvillian_matrix(h: np.ndarray, c_matrices: Sequence[np.ndarray], *, sparse: bool = False):
    """Raw superoperator matrix for -i[H, .] + sum_j L(c_j).

    With ``sparse=True`` returns a scipy CSR matrix assembled from sparse
    Kronecker products, used internally where only a ladder-sector block
    of a large superoperator is needed.
    """
    d = h.shape[0]
    if sparse:
        sp = scipy.sparse
        eye = sp.identity(d, dtype=complex, format="csr")
        hs = sp.csr_matrix(h)
        out = -1j * (sp.kron(eye, hs, format="csr") - sp.kron(hs.T, eye, format="csr"))
        for c in c_matrices:
            cs = sp.csr_matrix(c)
            cdc = sp.csr_matrix(c.conj().T @ c)
            out = out + 2.0 * sp.kron(cs.conj(), cs, format="csr")
            out = out - sp.kron(eye, cdc, format="csr") - sp.kron(cdc.T, eye, format="csr")
        return out.tocsr()
    eye = np.eye(d, dtype=complex)
    out = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in c_matrices:
        cdc = c.conj().T @ c
        out += 2.0 * np.kron(c.conj(), c)
        out -= np.kron(eye, cdc) + np.kron(cdc.T, eye)
    return out


@dataclass(frozen=True)
class Liouvillian:
    """Dense superoperator acting on column-stacked density matrices."""

    superoperator: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        m = np.asarray(self.superoperator, dtype=complex)
        d2 = self.space.dim ** 2
        if m.shape != (d2, d2):
            raise InvalidDimensionError(
                f"superoperator shape {m.shape} does not match space dimension^2 {d2}"
            )
        object.__setattr__(self, "superoperator", m)

    @property
    def dim(self) -> int:
        return self.space.dim

    def trace_preservation_defect(self) -> float:
        """Norm of the adjoint superoperator applied to the identity.

        Zero (to rounding) for any proper Lindblad generator: the trace of
        rho is conserved iff vec(I)^dag L = 0.
        """
        identity = vec(np.eye(self.dim))
        return float(np.linalg.norm(identity.conj() @ self.superoperator))

    def apply(self, rho_matrix: np.ndarray) -> np.ndarray:
        return unvec(self.superoperator @ vec(rho_matrix), self.dim)


@dataclass(frozen=True)
class MasterEquation:
    """Time-dependent generator: constant part plus scalar-envelope drives.

    ``drives`` pairs a constant Hermitian operator with a scalar envelope
    evaluated at each integrator step, so H(t) = h0 + sum_k env_k(t) D_k.
    """

    h0: Operator
    c_ops: tuple[Operator, ...] = ()
    drives: tuple[tuple[Operator, Callable[[float], float]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "c_ops", tuple(self.c_ops))
        object.__setattr__(self, "drives", tuple(self.drives))
        _check_generator_inputs(self.h0, self.c_ops)
        for op, _ in self.drives:
            if op.space.dims != self.h0.space.dims:
                raise InvalidDimensionError("drive operator lives on a different space")
            if not op.is_hermitian(tol=1e-9 * max(1.0, op.norm())):
                raise InvalidHamiltonianError("drive operator is not Hermitian")

    @property
    def space(self) -> HilbertSpace:
        return self.h0.space


def _check_generator_inputs(h: Operator, c_ops: Sequence[Operator]):
    for c in c_ops:
        if c.space.dims != h.space.dims:
            raise InvalidDimensionError(
                f"collapse operator space {c.space.dims} does not match Hamiltonian space {h.space.dims}"
            )
    if not h.is_hermitian(tol=1e-9 * max(1.0, h.norm())):
        raise InvalidHamiltonianError(
            "Hamiltonian is not Hermitian; build drive terms with their h.c. included"
        )


def build_liouvillian(h: Operator, c_ops: Sequence[Operator]) -> Liouvillian:
    """Assemble the dense Liouvillian for a constant Hamiltonian.

    Raises if H is not Hermitian or any collapse operator lives on a
    different space; the result is checked to preserve the trace.
    """
    _check_generator_inputs(h, c_ops)
    sup = liouvillian_matrix(h.matrix, [c.matrix for c in c_ops])
    liouv = Liouvillian(sup, h.space)
    defect = liouv.trace_preservation_defect()
    if defect > 1e-10 * max(1.0, float(np.max(np.abs(sup)))):
        raise InvalidHamiltonianError(f"assembled generator does not preserve trace ({defect:.3e})")
    return liouv


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus expectation-value series and optional state snapshots."""

    times: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    states: tuple[DensityMatrix, ...] | None = None
    final: DensityMatrix | None = None


def _rhs_dense(liouv: Liouvillian) -> Callable[[float, np.ndarray], np.ndarray]:
    sup = liouv.superoperator

    def rhs(t, y):
        return sup @ y

    return rhs


def _rhs_master_equation(me: MasterEquation) -> Callable[[float, np.ndarray], np.ndarray]:
    d = me.space.dim
    damping = sum(
        (c.matrix.conj().T @ c.matrix for c in me.c_ops),
        start=np.zeros((d, d), dtype=complex),
    )
    h_base = me.h0.matrix - 1j * damping
    drive_mats = [op.matrix for op, _ in me.drives]
    envs = [env for _, env in me.drives]
    if me.c_ops:
        c_stack = np.stack([c.matrix for c in me.c_ops])
        cdag_stack = np.stack([c.matrix.conj().T for c in me.c_ops])
    else:
        c_stack = cdag_stack = None

    def rhs(t, y):
        rho = y.reshape(d, d)
        h_eff = h_base
        for mat, env in zip(drive_mats, envs):
            h_eff = h_eff + env(t) * mat
        out = -1j * (h_eff @ rho - rho @ h_eff.conj().T)
        if c_stack is not None:
            out = out + 2.0 * np.matmul(np.matmul(c_stack, rho), cdag_stack).sum(axis=0)
        return out.reshape(-1)

    return rhs


def evolve(
    rho0: DensityMatrix,
    generator: Liouvillian | MasterEquation,
    times: np.ndarray,
    *,
    method: str = "adaptive",
    rtol: float = RTOL,
    atol: float = ATOL,
    e_ops: dict[str, Operator] | None = None,
    store_states: bool = False,
    state_tol: float = 1e-6,
) -> Trajectory:
    """Propagate a density matrix over a monotone time grid.

    ``method="adaptive"`` integrates with an embedded Runge-Kutta 4(5)
    scheme; ``method="expm"`` applies exact matrix exponentials and is
    only valid for a constant :class:`Liouvillian`.  Expectation values of
    ``e_ops`` are recorded at every grid time; snapshots are validated as
    density matrices at ``state_tol``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be one-dimensional and strictly increasing")
    space = generator.space
    if rho0.space.dims != space.dims:
        raise InvalidDimensionError("initial state lives on a different space than the generator")
    d = space.dim

    if method == "expm":
        if not isinstance(generator, Liouvillian):
            raise ValueError("matrix-exponential propagation requires a constant Liouvillian")
        ys = _propagate_expm(rho0.matrix, generator, times)
    elif method == "adaptive":
        if isinstance(generator, Liouvillian):
            rhs = _rhs_dense(generator)
            y0 = vec(rho0.matrix)
            reshape_vec = True
        else:
            rhs = _rhs_master_equation(generator)
            y0 = rho0.matrix.reshape(-1).astype(complex)
            reshape_vec = False
        sol = solve_ivp(
            rhs,
            (times[0], times[-1]),
            y0,
            t_eval=times,
            method="RK45",
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            last = float(sol.t[-1]) if len(sol.t) else float(times[0])
            raise IntegrationFailureError(f"integrator stopped: {sol.message}", last)
        if reshape_vec:
            ys = [unvec(sol.y[:, k], d) for k in range(sol.y.shape[1])]
        else:
            ys = [sol.y[:, k].reshape(d, d) for k in range(sol.y.shape[1])]
    else:
        raise ValueError(f"unknown method {method!r}")

    drift = max(abs(m.trace() - 1.0) for m in ys)
    if drift > max(1e-6, 100 * rtol):
        raise IntegrationFailureError(
            f"trace drifted by {drift:.3e}; reduce tolerances", float(times[-1])
        )

    observables = {}
    if e_ops:
        for name, op in e_ops.items():
            if op.space.dims != space.dims:
                raise InvalidDimensionError(f"observable {name!r} lives on a different space")
            observables[name] = np.array([np.trace(op.matrix @ m) for m in ys])

    final = DensityMatrix(_hermitize(ys[-1]), space, tol=state_tol)
    states = None
    if store_states:
        states = tuple(DensityMatrix(_hermitize(m), space, tol=state_tol) for m in ys)
    return Trajectory(times=times, observables=observables, states=states, final=final)


def _hermitize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2.0


def _propagate_expm(rho0_matrix: np.ndarray, liouv: Liouvillian, times: np.ndarray) -> list[np.ndarray]:
    d = liouv.dim
    y = vec(rho0_matrix)
    ys = []
    propagators: dict[float, np.ndarray] = {}
    t_prev = times[0]
    for k, t in enumerate(times):
        dt = float(t - t_prev)
        if k == 0:
            ys.append(unvec(y, d))
            continue
        if dt not in propagators:
            propagators[dt] = scipy.linalg.expm(liouv.superoperator * dt)
        y = propagators[dt] @ y
        ys.append(unvec(y, d))
        t_prev = t
    return ys


def steadystate(liouv: Liouvillian, *, residual_tol: float = STEADYSTATE_RESIDUAL_TOL) -> DensityMatrix:
    """Unique fixed point of a trace-preserving Liouvillian.

    Direct linear solve with the redundant first row replaced by the trace
    constraint; the result must satisfy ||L vec(rho)|| < ``residual_tol``.
    A degenerate null space (no dissipation, disconnected sectors) raises
    :class:`NonUniqueSteadyStateError` with the detected dimension.
    """
    defect = liouv.trace_preservation_defect()
    scale = max(1.0, float(np.max(np.abs(liouv.superoperator))))
    if defect > 1e-8 * scale:
        raise ValueError(f"generator does not preserve trace (defect {defect:.3e})")
    d = liouv.dim
    a = liouv.superoperator.copy()
    trace_row = vec(np.eye(d)).conj()
    a[0, :] = trace_row
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return _steadystate_from_nullspace(liouv, residual_tol)
    rho = _hermitize(unvec(x, d))
    rho = rho / rho.trace().real
    residual = float(np.linalg.norm(liouv.superoperator @ vec(rho)))
    if residual > residual_tol:
        return _steadystate_from_nullspace(liouv, residual_tol)
    return DensityMatrix(rho, liouv.space, tol=1e-7)


def _steadystate_from_nullspace(liouv: Liouvillian, residual_tol: float) -> DensityMatrix:
    d = liouv.dim
    null = scipy.linalg.null_space(liouv.superoperator, rcond=1e-12)
    nullity = null.shape[1]
    if nullity != 1:
        raise NonUniqueSteadyStateError(nullity)
    rho = _hermitize(unvec(null[:, 0], d))
    tr = rho.trace().real
    if abs(tr) < 1e-12:
        raise NonUniqueSteadyStateError(nullity)
    rho = rho / tr
    residual = float(np.linalg.norm(liouv.superoperator @ vec(rho)))
    if residual > residual_tol:
        raise NonUniqueSteadyStateError(nullity)
    return DensityMatrix(rho, liouv.space, tol=1e-7)


def expectation(rho: DensityMatrix, op: Operator) -> complex:
    """Tr(op rho)."""
    if rho.space.dims != op.space.dims:
        raise InvalidDimensionError("state and observable live on different spaces")
    return complex(np.trace(op.matrix @ rho.matrix))


def spin_ground_block(rho: DensityMatrix) -> np.ndarray:
    """Unnormalized 2x2 block of the reduced dot state on levels 1 and 2.

    The photon modes are traced out and the trion rows/columns dropped
    without renormalizing, so the block trace equals the total ground
    population (1 minus the residual trion population).
    """
    if rho.space.dims[-1] != 4:
        raise InvalidDimensionError("last subsystem must be the four-level dot")
    dot = partial_trace(rho, [rho.space.n_subsystems - 1])
    return dot.matrix[:2, :2]


def spin_subspace_purity(rho: DensityMatrix) -> float:
    """Tr[(rho^(1,2))^2] of the unnormalized spin ground-state block.

    Equals 1 only for a pure state fully inside the {1, 2} ground manifold;
    an equal classical mixture gives 1/2.
    """
    block = spin_ground_block(rho)
    return float(np.real(np.trace(block @ block)))


# --- excitation-ladder sector tools -------------------------------------------
#
# When the Hamiltonian commutes with a diagonal "quanta" operator and every
# collapse operator shifts it by a fixed integer, the Liouvillian never mixes
# superoperator sectors with different values of k = quanta[row] - quanta[col].
# The photoluminescence correlation functions (k = -1) and the drive-free
# ring-down of observables diagonal in quanta (k = 0) then live in blocks that
# are far smaller than the full d^2 space.


def ladder_sector(quanta: np.ndarray, k: int) -> np.ndarray:
    """Flat vec indices of the superoperator sector with ladder offset ``k``.

    ``quanta`` is the integer diagonal of the conserved excitation-number
    operator in the computational basis.
    """
    quanta = np.asarray(quanta)
    diff = quanta[:, None] - quanta[None, :]
    return np.nonzero(diff.flatten(order="F") == k)[0]


def restrict_superoperator(sup, indices: np.ndarray) -> np.ndarray:
    """Dense sector block of a (dense or sparse) superoperator."""
    if scipy.sparse.issparse(sup):
        return np.asarray(sup[indices, :][:, indices].todense())
    return sup[np.ix_(indices, indices)]
