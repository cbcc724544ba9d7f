"""Finite-mode exact oracle for the qubit-reservoir dynamics.

The continuum reservoir is replaced by M harmonic modes placed at
Gauss-Legendre nodes on [0, omega_max], with couplings ``g_j^2 = J(w_j) w_j``
so that ``sum_j g_j^2 f(w_j)`` approximates ``int J f``.  The field operator is
``phi = sum_j g_j (a_j + a_j^dag) / sqrt(2)``.  Each mode is truncated at
``n_max`` quanta and the composite density matrix is propagated exactly.

Ordering of the composite space is qubit (x) mode_1 (x) ... (x) mode_M.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from .dynamics import ORACLE, InitialState, ReducedDensityMatrix, TimeSeries, gibbs_state, initial_matrix
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    EigendecompositionFailure,
    IllConditionedFit,
    PreconditionViolation,
    RecurrenceViolation,
    TruncationWarning,
    ValidationError,
)
from .spectral_density import FormFactor, ReservoirSpec, xi
from .system_model import QubitSystem

DEFAULT_BUDGET = 4096
TAIL_THRESHOLD = 1e-6


@dataclass(frozen=True)
class DiscreteBath:
    omegas: np.ndarray
    couplings: np.ndarray
    omega_max: float

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        if w.size < 1 or np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise ValidationError("mode frequencies must be positive and strictly increasing", "omegas")
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "couplings", np.asarray(self.couplings, dtype=float))

    @property
    def M(self) -> int:
        return len(self.omegas)

    @property
    def recurrence_time(self) -> float:
        """``2 pi`` over the smallest mode spacing (the single frequency for M = 1)."""
        if self.M == 1:
            return 2 * math.pi / self.omegas[0]
        return 2 * math.pi / float(np.min(np.diff(self.omegas)))


@dataclass(frozen=True)
class TruncatedFockSpace:
    M: int
    n_max: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.M < 1:
            raise ValidationError(f"need at least one mode, got M = {self.M}", "M")
        if self.n_max < 1:
            raise ValidationError(f"n_max must be >= 1, got {self.n_max}", "n_max")
        if self.dim > self.budget:
            raise BudgetExceeded(self.dim, self.budget)

    @property
    def local_dim(self) -> int:
        return self.n_max + 1

    @property
    def bath_dim(self) -> int:
        return self.local_dim**self.M

    @property
    def dim(self) -> int:
        return 2 * self.bath_dim


def discretize(
    ff: FormFactor,
    res: ReservoirSpec,
    M: int,
    omega_max: float,
    n_max: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> DiscreteBath:
    """Gauss-Legendre discretization of ``J(w) = w^2 int |g(w sigma)|^2 dsigma``.

    ``res`` is accepted for symmetry with the continuum routines; the
    couplings themselves are temperature independent.
    """
    if M < 1:
        raise ValidationError(f"need at least one mode, got M = {M}", "M")
    if not omega_max > 0:
        raise ValidationError(f"omega_max must be > 0, got {omega_max}", "omega_max")
    if n_max is not None:
        TruncatedFockSpace(M, n_max, budget)
    x, w = np.polynomial.legendre.leggauss(M)
    omegas = 0.5 * omega_max * (x + 1)
    weights = 0.5 * omega_max * w
    couplings = np.sqrt(ff.spectral_density(omegas) * weights)
    return DiscreteBath(omegas, couplings, omega_max)


def _ladder(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def _embed(op: np.ndarray, j: int, M: int, d: int) -> np.ndarray:
    left = np.eye(d**j)
    right = np.eye(d ** (M - j - 1))
    return np.kron(np.kron(left, op), right)


def bath_operators(bath: DiscreteBath, fock: TruncatedFockSpace) -> Tuple[np.ndarray, np.ndarray]:
    """``(H_B, phi)``: free bath Hamiltonian and the discretized field operator."""
    if fock.M != bath.M:
        raise DimensionMismatch(f"Fock space has {fock.M} modes, bath has {bath.M}", "M")
    d = fock.local_dim
    a = _ladder(d)
    number = np.diag(np.arange(d, dtype=float))
    quad = a + a.T
    D = fock.bath_dim
    H_B = np.zeros((D, D))
    phi = np.zeros((D, D))
    for j, (w, g) in enumerate(zip(bath.omegas, bath.couplings)):
        H_B += w * _embed(number, j, fock.M, d)
        phi += (g / math.sqrt(2)) * _embed(quad, j, fock.M, d)
    return H_B, phi


def build_hamiltonian(
    q: QubitSystem, bath: DiscreteBath, fock: TruncatedFockSpace, lam: float
) -> np.ndarray:
    """``H_S (x) 1 + 1 (x) H_B + lam G (x) phi`` as a dense hermitian matrix."""
    H_B, phi = bath_operators(bath, fock)
    D = fock.bath_dim
    H = np.kron(q.hamiltonian, np.eye(D)) + np.kron(np.eye(2), H_B)
    H = H + lam * np.kron(q.coupling_matrix, phi)
    return 0.5 * (H + H.conj().T)


def mode_gibbs(omega: float, beta: float, n_max: int) -> np.ndarray:
    """Truncated single-mode Gibbs populations, renormalized after the cut."""
    n = np.arange(n_max + 1)
    w = np.exp(-beta * omega * n)
    return w / w.sum()


def thermal_bath_state(bath: DiscreteBath, fock: TruncatedFockSpace, beta: float) -> np.ndarray:
    """Product of truncated Gibbs states; warns if a cut tail exceeds 1e-6."""
    if not beta > 0:
        raise ValidationError(f"beta must be > 0, got {beta}", "beta")
    diag = np.ones(1)
    worst = 0.0
    for w in bath.omegas:
        worst = max(worst, math.exp(-beta * w * (fock.n_max + 1)))
        diag = np.kron(diag, mode_gibbs(w, beta, fock.n_max))
    if worst > TAIL_THRESHOLD:
        warnings.warn(
            f"thermal weight beyond n_max = {fock.n_max} reaches {worst:.3g} for the softest mode",
            TruncationWarning,
            stacklevel=2,
        )
    return np.diag(diag)


class ExactPropagator:
    """Unitary evolution under a fixed Hamiltonian, diagonalized once."""

    def __init__(self, H: np.ndarray):
        H = np.asarray(H)
        try:
            self.energies, self.vectors = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise EigendecompositionFailure(str(exc)) from None
        self.dim = H.shape[0]

    def evolve(self, rho0: np.ndarray, t: float) -> np.ndarray:
        if rho0.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"state is {rho0.shape}, Hamiltonian is {self.dim}")
        V = self.vectors
        phase = np.exp(-1j * self.energies * t)
        rho_e = (V.conj().T @ rho0 @ V) * np.outer(phase, phase.conj())
        rho = V @ rho_e @ V.conj().T
        return 0.5 * (rho + rho.conj().T)

    def reduced_series(self, rho0: np.ndarray, times: Sequence[float]) -> np.ndarray:
        """Qubit reduced states at ``times``, shape ``(len(times), 2, 2)``.

        Uses ``Tr_B[V d rho~ d^dag V^dag]_{ij} = sum_kl d_k rho~_kl d_l^* (V_j^dag V_i)_lk``
        so only one pass through the dense eigenbasis is needed.
        """
        if rho0.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"state is {rho0.shape}, Hamiltonian is {self.dim}")
        V = self.vectors
        half = self.dim // 2
        blocks = (V[:half], V[half:])
        rho_e = V.conj().T @ rho0 @ V
        t = np.asarray(times, dtype=float)
        phases = np.exp(-1j * np.outer(t, self.energies))
        out = np.empty((t.size, 2, 2), dtype=complex)
        for i, j in ((0, 0), (0, 1), (1, 1)):
            kernel = rho_e * (blocks[j].conj().T @ blocks[i]).T
            out[:, i, j] = np.einsum("tk,tk->t", phases @ kernel, phases.conj())
        out[:, 1, 0] = out[:, 0, 1].conj()
        out[:, 0, 0] = out[:, 0, 0].real
        out[:, 1, 1] = out[:, 1, 1].real
        return out


def evolve_exact(H, rho0: np.ndarray, t: float) -> np.ndarray:
    """``exp(-iHt) rho0 exp(iHt)``; pass an :class:`ExactPropagator` to reuse its eigenbasis."""
    prop = H if isinstance(H, ExactPropagator) else ExactPropagator(H)
    return prop.evolve(np.asarray(rho0, dtype=complex), t)


def reduce(rho: np.ndarray, dim_s: int = 2) -> ReducedDensityMatrix:
    """Partial trace over the bath factor."""
    rho = np.asarray(rho)
    n = rho.shape[0]
    if rho.ndim != 2 or rho.shape[1] != n or n % dim_s:
        raise DimensionMismatch(f"cannot split a {rho.shape} matrix as {dim_s} x bath")
    D = n // dim_s
    red = np.einsum("iaja->ij", rho.reshape(dim_s, D, dim_s, D))
    return ReducedDensityMatrix.from_array(red)


def composite_initial_state(
    init: ReducedDensityMatrix, bath: DiscreteBath, fock: TruncatedFockSpace, beta: float
) -> np.ndarray:
    return np.kron(init.to_array(), thermal_bath_state(bath, fock, beta))


def _check_dephasing(q: QubitSystem):
    if q.c != 0:
        raise PreconditionViolation(f"pure dephasing requires c = 0, got c = {q.c}", "c")


def dephasing_exponents(
    q: QubitSystem, bath: DiscreteBath, beta: float, lam: float, times
) -> Tuple[np.ndarray, np.ndarray]:
    """``(Gamma(t), phi(t))`` of the untruncated pure-dephasing coherence."""
    _check_dephasing(q)
    t = np.asarray(times, dtype=float)
    w = bath.omegas
    g2 = bath.couplings**2
    wt = np.multiply.outer(t, w)
    decay = (lam**2 * (q.b - q.a) ** 2 / 2) * np.sum(
        g2 / np.tanh(0.5 * beta * w) * (1 - np.cos(wt)) / w**2, axis=-1
    )
    phase = (lam**2 * (q.a**2 - q.b**2) / 2) * np.sum(g2 * (wt - np.sin(wt)) / w**2, axis=-1)
    return decay, phase


def dephasing_factor(
    q: QubitSystem,
    bath: DiscreteBath,
    beta: float,
    lam: float,
    times,
    n_max: Optional[int] = None,
) -> np.ndarray:
    """``rho12(t) / rho12(0)`` for the non-demolition coupling (c = 0).

    The two qubit levels see displaced-oscillator baths with shifts
    ``x = lam a g / sqrt(2)`` and ``lam b g / sqrt(2)``, so the coherence factorizes
    over modes.  With ``n_max=None`` each mode is untruncated:

        exp(i Delta t) prod_j exp(i phi_j(t) - Gamma_j(t)),
        Gamma_j = lam^2 (b-a)^2 g_j^2 / 2 * coth(beta w_j / 2) (1 - cos w_j t) / w_j^2,
        phi_j   = lam^2 (a^2-b^2) g_j^2 / 2 * (w_j t - sin w_j t) / w_j^2.

    With an integer ``n_max`` each mode factor is evaluated exactly in the
    truncated mode space, which is what the composite oracle propagates.
    """
    _check_dephasing(q)
    t = np.asarray(times, dtype=float)
    if n_max is None:
        decay, phase = dephasing_exponents(q, bath, beta, lam, t)
        return np.exp(1j * q.Delta * t + 1j * phase - decay)

    w = bath.omegas
    d = n_max + 1
    a = _ladder(d)
    number = np.diag(np.arange(d, dtype=float))
    quad = a + a.T
    out = np.exp(1j * q.Delta * t).astype(complex)
    for wj, gj in zip(w, bath.couplings):
        x1 = lam * q.a * gj / math.sqrt(2)
        x2 = lam * q.b * gj / math.sqrt(2)
        e1, v1 = np.linalg.eigh(wj * number + x1 * quad)
        e2, v2 = np.linalg.eigh(wj * number + x2 * quad)
        pops = mode_gibbs(wj, beta, n_max)
        # Tr[exp(-i H1 t) rho exp(i H2 t)] = sum_kl e^{-i e1_k t} e^{i e2_l t} (v1^T rho v2)_kl (v2^T v1)_lk
        kernel = (v1.T @ (pops[:, None] * v2)) * (v2.T @ v1).T
        p1 = np.exp(-1j * np.outer(t, e1))
        p2 = np.exp(1j * np.outer(t, e2))
        out *= np.einsum("tk,kl,tl->t", p1, kernel, p2)
    return out


def dephasing_exact(
    q: QubitSystem,
    bath: DiscreteBath,
    beta: float,
    lam: float,
    t: float,
    initial: Optional[ReducedDensityMatrix] = None,
    n_max: Optional[int] = None,
) -> ReducedDensityMatrix:
    """Reduced state at time ``t`` under pure dephasing; populations are frozen."""
    if initial is None:
        initial = ReducedDensityMatrix.from_populations(0.5, 0.5)
    f = complex(dephasing_factor(q, bath, beta, lam, [t], n_max=n_max)[0])
    return ReducedDensityMatrix.from_populations(initial.rho11.real, initial.rho12 * f)


def fit_decay_rate(
    series: TimeSeries,
    window: Tuple[float, float],
    channel: Literal["population", "coherence"],
    asymptote: Optional[float] = None,
    max_rel_residual: float = 0.1,
) -> float:
    """Least-squares slope of ``-log|signal - asymptote|`` over ``window``.

    The coherence channel uses ``|rho12|`` with asymptote 0; the population
    channel uses ``rho11`` with the Gibbs value (from ``series.reference``
    unless ``asymptote`` is given).  Windows reaching past half the bath
    recurrence time are refused.
    """
    t1, t2 = window
    if not t2 > t1:
        raise ValidationError(f"empty fit window {window}", "window")
    if series.recurrence_time is not None and t2 > 0.5 * series.recurrence_time * (1 + 1e-12):
        raise RecurrenceViolation(t2, series.recurrence_time)
    mask = (series.times >= t1) & (series.times <= t2)
    if mask.sum() < 3:
        raise IllConditionedFit(f"fewer than 3 samples in window {window}")
    t = series.times[mask]
    if channel == "coherence":
        signal = np.abs(series.channel("rho12")[mask])
    elif channel == "population":
        if asymptote is None:
            if series.reference is None:
                raise ValidationError("population fit needs an asymptote", "asymptote")
            asymptote = series.reference.rho11.real
        diff = series.channel("rho11")[mask] - asymptote
        if np.any(diff == 0) or (np.any(diff > 0) and np.any(diff < 0)):
            raise IllConditionedFit("population signal crosses its asymptote inside the window")
        signal = np.abs(diff)
    else:
        raise ValidationError(f"unknown channel {channel!r}", "channel")
    if np.any(signal <= 0):
        raise IllConditionedFit("signal vanishes inside the window")
    y = -np.log(signal)
    A = np.stack([t, np.ones_like(t)], axis=1)
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    spread = np.ptp(y)
    if spread > 0:
        resid = y - A @ np.array([slope, icept])
        rel = math.sqrt(np.mean(resid**2)) / spread
        if rel > max_rel_residual:
            raise IllConditionedFit(f"relative fit residual {rel:.3g} exceeds {max_rel_residual}")
    return float(slope)


@dataclass
class OracleRun:
    """Everything needed to evaluate the exact oracle on several time grids."""

    q: QubitSystem
    bath: DiscreteBath
    fock: TruncatedFockSpace
    lam: float
    beta: float
    initial: ReducedDensityMatrix
    propagator: ExactPropagator
    rho0: np.ndarray

    @classmethod
    def prepare(
        cls,
        q: QubitSystem,
        ff: FormFactor,
        res: ReservoirSpec,
        lam: float,
        init,
        M: int,
        n_max: int,
        omega_max: float,
        budget: int = DEFAULT_BUDGET,
    ) -> "OracleRun":
        fock = TruncatedFockSpace(M, n_max, budget)
        bath = discretize(ff, res, M, omega_max)
        initial = init if isinstance(init, ReducedDensityMatrix) else initial_matrix(init)
        H = build_hamiltonian(q, bath, fock, lam)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            rho0 = composite_initial_state(initial, bath, fock, res.beta)
        return cls(q, bath, fock, lam, res.beta, initial, ExactPropagator(H), rho0)

    def series(self, times: Sequence[float]) -> TimeSeries:
        red = self.propagator.reduced_series(self.rho0, times)
        states = [ReducedDensityMatrix.from_array(r) for r in red]
        return TimeSeries(
            np.asarray(times, dtype=float),
            states,
            ORACLE,
            reference=gibbs_state(self.q.Delta, self.beta),
            recurrence_time=self.bath.recurrence_time,
        )


def default_fit_window(bath: DiscreteBath, strip_tau_prime: float) -> Tuple[float, float]:
    """From one remainder e-fold ``2/tau'`` to half the recurrence time."""
    return (2.0 / strip_tau_prime, 0.5 * bath.recurrence_time)


def calibrate_rate_normalization(
    beta: float = 1.0,
    M: int = 1000,
    omega_max: float = 12.0,
    window: Tuple[float, float] = (50.0, 150.0),
    points: int = 200,
) -> float:
    """Ratio of the second-order dephasing rate to the exact dephasing slope.

    Uses an Ohmic-type (p = -1/2, m = 1) isotropic form factor, where
    ``xi(0) > 0``, and fits ``Gamma(t) = s t + c log t + d`` to the untruncated
    dephasing exponent on a finely discretized bath.  The returned factor
    multiplies oracle rates to put them on the same footing as the resonance
    imaginary parts; with the field normalization used here it equals pi.
    """
    ff = FormFactor(p=-0.5, m=1)
    res = ReservoirSpec(beta)
    bath = discretize(ff, res, M, omega_max)
    q = QubitSystem(Delta=1.0, a=0.0, b=1.0, c=0.0)
    t = np.linspace(window[0], window[1], points)
    gamma, _ = dephasing_exponents(q, bath, beta, 1.0, t)
    A = np.stack([t, np.log(t), np.ones_like(t)], axis=1)
    slope = np.linalg.lstsq(A, gamma, rcond=None)[0][0]
    predicted = 0.5 * math.pi**2 * xi(ff, res, 0.0)
    return float(predicted / slope)
