"""Exception types shared across the package."""


class SpinCavityError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(SpinCavityError, ValueError):
    """Operator or space dimensions are inconsistent or out of range."""


class InvalidLevelError(SpinCavityError, ValueError):
    """Quantum-dot level index outside 1..4."""


class InvalidStateError(SpinCavityError, ValueError):
    """Matrix fails the density-matrix invariants (trace, Hermiticity, positivity)."""


class InvalidHamiltonianError(SpinCavityError, ValueError):
    """Hamiltonian passed to a generator builder is not Hermitian."""


class IntegrationFailureError(SpinCavityError, RuntimeError):
    """Adaptive integrator could not reach the end of the time grid.

    ``last_good_time`` holds the last time the solution was still accepted.
    """

    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time: {last_good_time:g})")
        self.last_good_time = last_good_time


class NonUniqueSteadyStateError(SpinCavityError, RuntimeError):
    """Liouvillian null space has dimension != 1, so no unique fixed point exists.

    ``nullity`` is the numerically detected null-space dimension.
    """

    def __init__(self, nullity: int):
        super().__init__(
            f"steady state is not unique: Liouvillian null space has dimension {nullity}"
        )
        self.nullity = nullity


class BasisTooSmallError(SpinCavityError, RuntimeError):
    """Photon population reached the top of the truncated Fock basis.

    Rerun with a larger ``fock_cutoff``; ``max_population`` is the largest
    top-level occupation seen for ``mode`` during the run.
    """

    def __init__(self, mode: str, max_population: float, cutoff: int):
        super().__init__(
            f"Fock basis too small: top level of mode {mode} reached population "
            f"{max_population:.3e} with cutoff {cutoff}; increase the cutoff"
        )
        self.mode = mode
        self.max_population = max_population
        self.cutoff = cutoff


class ConfigError(SpinCavityError, ValueError):
    """Scenario configuration failed validation.

    ``diagnostics`` is a list of human-readable ``field: problem`` strings.
    """

    def __init__(self, diagnostics: list[str]):
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {d}" for d in diagnostics))
        self.diagnostics = list(diagnostics)
