"""Finite-dimensional system: Bohr-frequency bookkeeping, the qubit coupling
matrix and the spin-boson parameter map."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Literal, Tuple

import numpy as np

from .errors import AmbiguousClustering, DegenerateSystem, ValidationError

Pair = Tuple[int, int]

GAP_TOL = 1e-12


@dataclass(frozen=True)
class NLevelSystem:
    """N-level system in its energy eigenbasis.

    ``coupling`` is the hermitian matrix G of the interaction ``G (x) phi(g)``,
    expressed in the same basis as ``energies``.
    """

    energies: Tuple[float, ...]
    coupling: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValidationError("need at least two energy levels", "energies")
        if not np.all(np.isfinite(e)):
            raise ValidationError("energies must be finite", "energies")
        if np.any(np.diff(e) < 0):
            raise ValidationError("energies must be sorted ascending", "energies")
        G = np.asarray(self.coupling, dtype=complex)
        if G.shape != (e.size, e.size):
            raise ValidationError(f"coupling must be {e.size}x{e.size}", "coupling")
        if not np.allclose(G, G.conj().T, atol=1e-12, rtol=0):
            raise ValidationError("coupling must be hermitian", "coupling")
        object.__setattr__(self, "energies", tuple(float(x) for x in e))
        object.__setattr__(self, "coupling", G)

    @property
    def dim(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class BohrSpectrum:
    """Bohr frequencies ``e = E_m - E_n`` and their index sets ``I_e``.

    Index pairs are 1-based, ``(m, n)`` meaning ``E_m - E_n = e``.
    """

    frequencies: Tuple[float, ...]
    pairs: Dict[float, FrozenSet[Pair]]
    tol: float

    def index_set(self, e: float) -> FrozenSet[Pair]:
        best = min(self.frequencies, key=lambda f: abs(f - e))
        if abs(best - e) > max(self.tol, 1e-15):
            raise KeyError(e)
        return self.pairs[best]


def bohr_spectrum(sys: NLevelSystem, degeneracy_tol: float | None = None) -> BohrSpectrum:
    """Group level differences into Bohr frequencies.

    Differences closer than ``degeneracy_tol`` (default ``1e-9 max|E|``) are
    chained into one class; a class wider than twice the tolerance is
    ambiguous and rejected.
    """
    E = np.asarray(sys.energies)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * float(np.max(np.abs(E)))
    if degeneracy_tol < 0:
        raise ValidationError("degeneracy_tol must be >= 0", "degeneracy_tol")

    n = len(E)
    # energies are sorted, so m >= n gives the nonnegative half
    diffs = sorted(((E[m] - E[k], (m + 1, k + 1)) for m in range(n) for k in range(m + 1)))
    classes = []
    for d, pair in diffs:
        if classes and d - classes[-1][-1][0] <= degeneracy_tol:
            classes[-1].append((d, pair))
        else:
            classes.append([(d, pair)])

    pairs: Dict[float, FrozenSet[Pair]] = {}
    for cls in classes:
        span = cls[-1][0] - cls[0][0]
        if span > 2 * degeneracy_tol:
            raise AmbiguousClustering(
                f"Bohr class around {cls[0][0]:.6g} spans {span:.3g} > 2 x tol", "degeneracy_tol"
            )
        members = {p for _, p in cls}
        if cls[0][0] <= degeneracy_tol:
            e = 0.0
            members |= {(k, m) for m, k in members}
        else:
            e = float(np.mean([d for d, _ in cls]))
        pairs[e] = frozenset(members)
        if e != 0.0:
            pairs[-e] = frozenset((k, m) for m, k in members)
    return BohrSpectrum(tuple(sorted(pairs)), pairs, degeneracy_tol)


@dataclass(frozen=True)
class QubitSystem:
    """Qubit with gap ``Delta`` and coupling matrix ``[[a, c], [conj(c), b]]``.

    The basis is the energy basis with the ground level first.
    """

    Delta: float
    a: float = 0.0
    b: float = 0.0
    c: complex = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.Delta) and self.Delta > 0):
            raise ValidationError(f"Delta must be positive, got {self.Delta}", "Delta")
        for name in ("a", "b"):
            v = getattr(self, name)
            if isinstance(v, complex):
                if v.imag != 0:
                    raise ValidationError(f"{name} must be real", name)
                object.__setattr__(self, name, v.real)
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "c", complex(self.c))

    @property
    def coupling_matrix(self) -> np.ndarray:
        return np.array([[self.a, self.c], [self.c.conjugate(), self.b]], dtype=complex)

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag([0.0, self.Delta]).astype(complex)

    @property
    def abs_c2(self) -> float:
        return abs(self.c) ** 2

    def as_nlevel(self) -> NLevelSystem:
        return NLevelSystem((0.0, self.Delta), self.coupling_matrix)


@dataclass(frozen=True)
class SpinBosonParams:
    """Two-state truncation of a double well: bias, bare tunneling, hbar."""

    epsilon_bias: float
    Delta0: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.Delta0 < 0:
            raise ValidationError("Delta0 must be >= 0", "Delta0")
        if not self.hbar > 0:
            raise ValidationError("hbar must be > 0", "hbar")
        if self.epsilon_bias == 0 and self.Delta0 == 0:
            raise DegenerateSystem("epsilon_bias and Delta0 both vanish", "Delta0")


def spin_boson_hamiltonian(sb: SpinBosonParams) -> np.ndarray:
    """``H_S = (1/2) [[eps, -hbar D0], [-hbar D0, -eps]]`` in the left/right basis."""
    t = sb.hbar * sb.Delta0
    return 0.5 * np.array([[sb.epsilon_bias, -t], [-t, -sb.epsilon_bias]], dtype=complex)


def spin_boson_to_qubit(
    sb: SpinBosonParams, convention: Literal["published", "rotated"] = "published"
) -> QubitSystem:
    """Qubit parameters of the spin-boson model with ``v = sigma_z (x) phi(g)``.

    ``convention="published"`` uses the published map

        a = -b = -(hbar^2 D0^2 / eps^2 + 1)^(-1/2),
        c = (1/2) (eps^2 / (hbar^2 D0^2) + 1)^(-1/2).

    ``convention="rotated"`` returns what rotating sigma_z into the energy
    basis actually gives: same a, b, but ``c = hbar D0 / Delta``, which is
    twice the published value (the published c does not keep a^2 + |c|^2 = 1).
    """
    eps, t = sb.epsilon_bias, sb.hbar * sb.Delta0
    Delta = math.hypot(eps, t)
    # written as |eps|/Delta and t/Delta so that eps = 0 and D0 = 0 are regular
    a = -abs(eps) / Delta
    if convention == "published":
        c = 0.5 * t / Delta
    elif convention == "rotated":
        c = t / Delta
    else:
        raise ValidationError(f"unknown convention {convention!r}", "convention")
    return QubitSystem(Delta=Delta, a=a, b=-a, c=c)


def qubit_from_matrices(H, G) -> QubitSystem:
    """Diagonalize ``H``, rotate ``G`` into its eigenbasis and read off a, b, c.

    The excited eigenvector's phase is chosen so that ``c`` is real and >= 0.
    """
    H = np.asarray(H, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if H.shape != (2, 2) or G.shape != (2, 2):
        raise ValidationError("H and G must be 2x2", "H")
    if not np.allclose(H, H.conj().T, atol=1e-12, rtol=0):
        raise ValidationError("H must be hermitian", "H")
    if not np.allclose(G, G.conj().T, atol=1e-12, rtol=0):
        raise ValidationError("G must be hermitian", "G")
    w, V = np.linalg.eigh(H)
    gap = w[1] - w[0]
    if gap < GAP_TOL:
        raise DegenerateSystem(f"energy gap {gap:.3g} below {GAP_TOL}", "H")
    Gr = V.conj().T @ G @ V
    c = Gr[0, 1]
    if abs(c) > 0:
        V[:, 1] *= np.conj(c) / abs(c)
        Gr = V.conj().T @ G @ V
    return QubitSystem(Delta=float(gap), a=float(Gr[0, 0].real), b=float(Gr[1, 1].real), c=complex(abs(c)))
