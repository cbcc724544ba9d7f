"""Second-order resonance energies of the qubit and the timescales they set."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .spectral_density import FormFactor, ReservoirSpec, g_omega_inverse, pv_energy_integral, xi
from .system_model import QubitSystem

POSITIVE_FLOOR = 1e-14


@dataclass(frozen=True)
class ResonanceSet:
    """Resonance energies truncated at order lambda^2.

    ``lamb_shift`` (R) and ``rate_difference`` (D) are the lambda-independent
    second-order coefficients, kept so that timescales can be reported even
    at lambda = 0.  ``strip_tau_prime`` only labels the decay scale
    ``exp(-tau' t / 2)`` of the dropped remainder.
    """

    eps0: complex
    epsDelta: complex
    epsMinusDelta: complex
    lam: float
    Delta: float
    lamb_shift: float
    rate_difference: float
    strip_tau_prime: float
    order: int = 2

    @property
    def remainder_timescale(self) -> float:
        return 2.0 / self.strip_tau_prime


@dataclass(frozen=True)
class Timescales:
    tau_T: float
    tau_D: float
    D: float
    gamma: float


def lamb_shift_R(q: QubitSystem, ff: FormFactor, res: ReservoirSpec) -> float:
    """Real second-order shift ``R`` of the Bohr frequency Delta."""
    R = 0.0
    if q.b**2 != q.a**2:
        R += 0.5 * (q.b**2 - q.a**2) * g_omega_inverse(ff)
    if q.abs_c2 != 0:
        R += 0.5 * q.abs_c2 * pv_energy_integral(ff, res, q.Delta)
    return R


def rate_difference_D(q: QubitSystem, ff: FormFactor, res: ReservoirSpec) -> float:
    """``D`` with ``Im eps0 - Im epsDelta = lambda^2 D``.

    D > 0: populations settle before coherences do; D < 0: the reverse.
    """
    return 0.5 * math.pi**2 * (q.abs_c2 * xi(ff, res, q.Delta) - (q.b - q.a) ** 2 * xi(ff, res, 0.0))


def qubit_resonances(
    q: QubitSystem,
    ff: FormFactor,
    res: ReservoirSpec,
    lam: float,
    strip_tau_prime: Optional[float] = None,
) -> ResonanceSet:
    if strip_tau_prime is None:
        strip_tau_prime = math.pi / res.beta
    if not 0 < strip_tau_prime < 2 * math.pi / res.beta:
        raise ValueError(f"strip_tau_prime must lie in (0, 2 pi / beta), got {strip_tau_prime}")
    xi_gap = xi(ff, res, q.Delta)
    xi_zero = xi(ff, res, 0.0)
    R = lamb_shift_R(q, ff, res)
    lam2 = lam * lam
    exchange = q.abs_c2 * xi_gap
    dephasing = (q.b - q.a) ** 2 * xi_zero
    eps0 = complex(0.0, lam2 * math.pi**2 * exchange)
    epsDelta = complex(q.Delta + lam2 * R, 0.5 * lam2 * math.pi**2 * (exchange + dephasing))
    return ResonanceSet(
        eps0=eps0,
        epsDelta=epsDelta,
        epsMinusDelta=-epsDelta.conjugate(),
        lam=lam,
        Delta=q.Delta,
        lamb_shift=R,
        rate_difference=0.5 * math.pi**2 * (exchange - dephasing),
        strip_tau_prime=strip_tau_prime,
    )


def _inverse(rate: float) -> float:
    return math.inf if rate <= 0 else 1.0 / rate


def timescales(rs: ResonanceSet) -> Timescales:
    """Thermalization and decoherence times, ``1/Im eps0`` and ``1/Im epsDelta``."""
    im0 = rs.eps0.imag
    imD = rs.epsDelta.imag
    gamma = min(im0, imD, rs.epsMinusDelta.imag)
    return Timescales(tau_T=_inverse(im0), tau_D=_inverse(imD), D=rs.rate_difference, gamma=gamma)


def fermi_golden_rule_holds(q: QubitSystem, ff: FormFactor, res: ReservoirSpec) -> bool:
    """``|c|^2 xi(Delta) > 0`` (above a 1e-14 noise floor)."""
    return q.abs_c2 * xi(ff, res, q.Delta) > POSITIVE_FLOOR
