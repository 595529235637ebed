"""Tensor-product operator algebra for the spin-cavity system.

Dense complex matrices over a tensor product of subsystems.  The production
space is (mode a Fock levels, mode b Fock levels, 4 quantum-dot levels) with
that slot order fixed everywhere; generic spaces with other subsystem
dimensions are allowed so that small test systems (single modes, qubits) can
reuse the same machinery.

Quantum-dot levels are numbered 1..4: levels 1 and 2 are the spin ground
states, levels 3 and 4 the trion (charged-exciton) states.  A transition
operator ``qd_transition(i, j)`` is |i><j|, so ``qd_transition(1, 4)`` lowers
the dot from trion 4 into ground state 1.

All types are immutable after construction (backing arrays are marked
read-only) and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidDimensionError, InvalidLevelError, InvalidStateError

QD_LEVELS = 4

#: default absolute tolerance for density-matrix validation (Frobenius norm
#: for Hermiticity, |trace - 1|, and minimum eigenvalue for positivity)
STATE_TOL = 1e-9


def _readonly(matrix: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(matrix, dtype=complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered collection of subsystem dimensions.

    The standard system space is built with :func:`qd_cavity_space`; arbitrary
    dimension tuples are accepted so tests can build small ad-hoc systems.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidDimensionError(f"all subsystem dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension (product of subsystem dimensions)."""
        return math.prod(self.dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)


def qd_cavity_space(fock_cutoff: int) -> HilbertSpace:
    """Standard space (mode a, mode b, quantum dot) with the given Fock cutoff.

    Slot order is fixed project-wide: slot 0 = mode a, slot 1 = mode b,
    slot 2 = the four-level dot.
    """
    if fock_cutoff < 1:
        raise InvalidDimensionError(f"Fock cutoff must be >= 1, got {fock_cutoff}")
    return HilbertSpace((fock_cutoff, fock_cutoff, QD_LEVELS))


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix on a :class:`HilbertSpace`."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.space.dim:
            raise InvalidDimensionError(
                f"matrix dimension {m.shape[0]} does not match space dimension {self.space.dim}"
            )
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def identity(cls, space: HilbertSpace) -> "Operator":
        return cls(np.eye(space.dim), space)

    @classmethod
    def zero(cls, space: HilbertSpace) -> "Operator":
        return cls(np.zeros((space.dim, space.dim)), space)

    def dag(self) -> "Operator":
        """Hermitian adjoint."""
        return Operator(self.matrix.conj().T, self.space)

    def is_hermitian(self, tol: float = STATE_TOL) -> bool:
        return np.linalg.norm(self.matrix - self.matrix.conj().T) <= tol

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.matrix))

    def _check_same_space(self, other: "Operator"):
        if self.space.dims != other.space.dims:
            raise InvalidDimensionError(
                f"operators live on different spaces: {self.space.dims} vs {other.space.dims}"
            )

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix + other.matrix, self.space)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix - other.matrix, self.space)

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.space)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.matrix * scalar, self.space)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix @ other.matrix, self.space)

    def commutator(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix @ other.matrix - other.matrix @ self.matrix, self.space)


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one Hermitian positive-semidefinite operator.

    Validation tolerances are absolute: Frobenius norm for Hermiticity,
    |trace - 1| for the trace, and the minimum eigenvalue for positivity.
    Solvers construct states with looser ``tol`` reflecting integration error.
    """

    matrix: np.ndarray
    space: HilbertSpace
    tol: float = field(default=STATE_TOL, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != self.space.dim:
            raise InvalidDimensionError(
                f"density matrix shape {m.shape} does not match space dimension {self.space.dim}"
            )
        herm = np.linalg.norm(m - m.conj().T)
        if herm > self.tol:
            raise InvalidStateError(f"not Hermitian: ||rho - rho^dag||_F = {herm:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > self.tol:
            raise InvalidStateError(f"trace is {tr:.12g}, expected 1")
        min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0).min())
        if min_eig < -self.tol:
            raise InvalidStateError(f"negative eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def from_pure(cls, ket: np.ndarray, space: HilbertSpace, tol: float = STATE_TOL) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).reshape(-1)
        if ket.size != space.dim:
            raise InvalidDimensionError(
                f"ket length {ket.size} does not match space dimension {space.dim}"
            )
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()), space, tol)

    def purity(self) -> float:
        """Tr[rho^2]; 1 for pure states, 1/d for the maximally mixed state."""
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def fock_annihilation(cutoff: int) -> Operator:
    """Photon annihilation operator on a Fock space truncated at ``cutoff`` levels.

    Matrix elements <n-1|a|n> = sqrt(n) for n = 1..cutoff-1.  The commutator
    [a, a^dag] equals the identity only below the truncation level.
    """
    if cutoff < 1:
        raise InvalidDimensionError(f"Fock cutoff must be >= 1, got {cutoff}")
    m = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(1, cutoff):
        m[n - 1, n] = math.sqrt(n)
    return Operator(m, HilbertSpace((cutoff,)))


def fock_number(cutoff: int) -> Operator:
    """Photon number operator a^dag a on the truncated Fock space."""
    a = fock_annihilation(cutoff)
    return a.dag() @ a


def qd_transition(i: int, j: int) -> Operator:
    """|i><j| on the four-level dot, with 1-based level indices.

    ``qd_transition(1, 4)`` annihilates trion 4 into ground state 1;
    its adjoint is ``qd_transition(4, 1)``.
    """
    for idx in (i, j):
        if idx not in (1, 2, 3, 4):
            raise InvalidLevelError(f"level index must be in 1..4, got {idx}")
    m = np.zeros((QD_LEVELS, QD_LEVELS), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return Operator(m, HilbertSpace((QD_LEVELS,)))


def embed(op: Operator, slot: int, space: HilbertSpace) -> Operator:
    """Embed a single-subsystem operator into ``space`` at position ``slot``.

    Kronecker product with identities on every other slot, preserving the
    fixed project-wide slot order.
    """
    if not 0 <= slot < space.n_subsystems:
        raise InvalidDimensionError(
            f"slot {slot} out of range for a space with {space.n_subsystems} subsystems"
        )
    if op.matrix.shape[0] != space.dims[slot]:
        raise InvalidDimensionError(
            f"operator dimension {op.matrix.shape[0]} does not match "
            f"space.dims[{slot}] = {space.dims[slot]}"
        )
    factors = [
        op.matrix if k == slot else np.eye(d, dtype=complex)
        for k, d in enumerate(space.dims)
    ]
    return Operator(reduce(np.kron, factors), space)


def tensor(ops: Sequence[Operator]) -> Operator:
    """Kronecker product of one operator per slot, in slot order."""
    if not ops:
        raise InvalidDimensionError("tensor product of zero operators")
    space = HilbertSpace(tuple(d for op in ops for d in op.space.dims))
    return Operator(reduce(np.kron, [op.matrix for op in ops]), space)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix over the ``keep`` subsystems (order preserved).

    Trace-preserving and linear in the input matrix.
    """
    keep = sorted(set(int(k) for k in keep))
    dims = rho.space.dims
    n = len(dims)
    if not keep:
        raise InvalidDimensionError("keep set must be non-empty")
    if any(k < 0 or k >= n for k in keep):
        raise InvalidDimensionError(f"keep indices {keep} out of range for {n} subsystems")
    reduced = _partial_trace_matrix(rho.matrix, dims, keep)
    return DensityMatrix(reduced, HilbertSpace(tuple(dims[k] for k in keep)), tol=max(rho.tol, 1e-9))


def _partial_trace_matrix(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace on a raw matrix; also used for non-state operators."""
    t = matrix.reshape(*dims, *dims)
    traced = [k for k in range(len(dims)) if k not in keep]
    # trace largest slot first so remaining row axes keep their positions;
    # row axis k always pairs with column axis ndim//2 + k
    for k in sorted(traced, reverse=True):
        t = np.trace(t, axis1=k, axis2=t.ndim // 2 + k)
    d = math.prod([dims[k] for k in keep])
    return t.reshape(d, d)
