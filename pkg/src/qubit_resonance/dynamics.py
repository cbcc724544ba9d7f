"""Leading-order reduced dynamics of the qubit.

Matrices are Schrodinger-picture density matrices in the energy basis with
the ground level first, ``rho[m, n] = <phi_m| rho_t |phi_n>``.  In this
convention the coherence ``rho12`` rotates as ``exp(+i Delta t)``; it is the
entry the resonance expansion writes as ``exp(i t eps_Delta)``, and
``rho21 = exp(i t eps_{-Delta})`` is its conjugate.

Ergodic means are taken at leading order (Gibbs populations, zero
coherences); every O(lambda^2) remainder is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import UnsupportedInitialState, ValidationError
from .resonance import ResonanceSet

LEADING_ORDER = "leading-order"
ORACLE = "oracle"


@dataclass(frozen=True)
class ReducedDensityMatrix:
    rho11: complex
    rho12: complex
    rho21: complex
    rho22: complex

    @classmethod
    def from_populations(cls, rho11: float, rho12: complex) -> "ReducedDensityMatrix":
        """Fill the rest from unit trace and hermiticity."""
        rho11 = float(np.real(rho11))
        rho12 = complex(rho12)
        return cls(rho11, rho12, rho12.conjugate(), 1.0 - rho11)

    @classmethod
    def from_array(cls, arr) -> "ReducedDensityMatrix":
        a = np.asarray(arr, dtype=complex)
        if a.shape != (2, 2):
            raise ValidationError(f"expected a 2x2 matrix, got shape {a.shape}")
        return cls(complex(a[0, 0]), complex(a[0, 1]), complex(a[1, 0]), complex(a[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho12], [self.rho21, self.rho22]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.rho11 + self.rho22

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.to_array())

    def is_physical(self, tol: float = 1e-12) -> bool:
        ev = self.eigenvalues()
        return (
            abs(self.trace - 1) <= tol
            and abs(self.rho21 - self.rho12.conjugate()) <= tol
            and ev.min() >= -tol
            and ev.max() <= 1 + tol
        )


@dataclass(frozen=True)
class LogicState:
    """Energy eigenstate ``|phi_j><phi_j|``, j = 1 (ground) or 2 (excited)."""

    j: int

    def __post_init__(self):
        if self.j not in (1, 2):
            raise ValidationError(f"logic state index must be 1 or 2, got {self.j}", "j")


@dataclass(frozen=True)
class IllustrationCoherent:
    """Equal-weight coherent superposition ``(1/2)[[1, 1], [1, 1]]``."""


@dataclass(frozen=True)
class CustomDiagonal:
    """``diag(q, 1 - q)``; evolvable only by the exact oracle."""

    q: float

    def __post_init__(self):
        if not 0 <= self.q <= 1:
            raise ValidationError(f"q must lie in [0, 1], got {self.q}", "q")


InitialState = Union[LogicState, IllustrationCoherent, CustomDiagonal]

SUPPORTED_TAGS = ("logic1", "logic2", "illustration")


def initial_matrix(init: InitialState) -> ReducedDensityMatrix:
    if isinstance(init, LogicState):
        return ReducedDensityMatrix.from_populations(1.0 if init.j == 1 else 0.0, 0.0)
    if isinstance(init, IllustrationCoherent):
        return ReducedDensityMatrix.from_populations(0.5, 0.5)
    if isinstance(init, CustomDiagonal):
        return ReducedDensityMatrix.from_populations(init.q, 0.0)
    raise ValidationError(f"unknown initial state {init!r}")


@dataclass
class TimeSeries:
    times: np.ndarray
    states: list
    provenance: str
    reference: Optional[ReducedDensityMatrix] = None
    recurrence_time: Optional[float] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValidationError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("times must be strictly increasing", "times")

    def __len__(self):
        return len(self.states)

    def channel(self, name: str) -> np.ndarray:
        if name == "rho11":
            return np.array([s.rho11.real for s in self.states])
        if name == "rho12":
            return np.array([s.rho12 for s in self.states])
        raise KeyError(name)


def gibbs_state(Delta: float, beta: float) -> ReducedDensityMatrix:
    """``diag(1, exp(-beta Delta)) / Z`` with the ground energy set to zero."""
    if not beta > 0:
        raise ValidationError(f"beta must be > 0, got {beta}", "beta")
    # 1 / (1 + exp(-x)) without overflow for large x
    p_ground = 0.5 * (1.0 + math.tanh(0.5 * beta * Delta))
    return ReducedDensityMatrix.from_populations(p_ground, 0.0)


def amplitude_constants(init: InitialState, Delta: float, beta: float) -> Tuple[float, complex]:
    """Amplitudes ``(C0, CDelta)`` of the two slow modes.

    Logic states use the published constants
    ``C0 = e^{x/2} (e^x + 1)^{-3/2}`` (j = 1) and ``e^x (e^x + 1)^{-3/2}``
    (j = 2), x = beta Delta, with ``CDelta = 0``.  For the coherent
    superposition, ``C0`` is the population amplitude ``(1/2) tanh(x/2)``
    and ``CDelta = 1/2`` the coherence amplitude.
    """
    x = beta * Delta
    if isinstance(init, LogicState):
        # divide through by e^{3x/2} so large x stays finite
        denom = (1.0 + math.exp(-x)) ** 1.5
        if init.j == 1:
            c0 = math.exp(-x) / denom
        else:
            c0 = math.exp(-0.5 * x) / denom
        return c0, 0j
    if isinstance(init, IllustrationCoherent):
        return 0.5 * math.tanh(0.5 * x), 0.5 + 0j
    raise UnsupportedInitialState(
        f"no closed-form amplitudes for {init!r}; supported tags: {', '.join(SUPPORTED_TAGS)}",
        "initial_state",
    )


def _population_sign(init: InitialState) -> float:
    # rho11 approaches its Gibbs value from the side of the initial state
    if isinstance(init, LogicState):
        return 1.0 if init.j == 1 else -1.0
    return -1.0


def evolve_leading(
    init: InitialState, rs: ResonanceSet, Delta: float, beta: float, t: float
) -> ReducedDensityMatrix:
    """Leading-order reduced state at time ``t >= 0``."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}", "t")
    c0, cD = amplitude_constants(init, Delta, beta)
    gibbs = gibbs_state(Delta, beta)
    relax = np.exp(1j * t * rs.eps0)
    rho11 = gibbs.rho11.real + _population_sign(init) * c0 * relax.real
    rho12 = cD * np.exp(1j * t * rs.epsDelta)
    return ReducedDensityMatrix.from_populations(rho11, rho12)


def time_series(
    init: InitialState, rs: ResonanceSet, Delta: float, beta: float, t_grid: Sequence[float]
) -> TimeSeries:
    t = np.asarray(t_grid, dtype=float)
    if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
        raise ValidationError("time grid must be nonnegative and strictly increasing", "t_grid")
    c0, cD = amplitude_constants(init, Delta, beta)
    g11 = gibbs_state(Delta, beta).rho11.real
    rho11 = g11 + _population_sign(init) * c0 * np.exp(1j * t * rs.eps0).real
    rho12 = cD * np.exp(1j * t * rs.epsDelta)
    states = [ReducedDensityMatrix.from_populations(p, c) for p, c in zip(rho11, rho12)]
    return TimeSeries(t, states, LEADING_ORDER, reference=gibbs_state(Delta, beta))
