"""Reservoir form factors and the reservoir integrals built from them.

All quantities are in units with hbar = k_B = 1.  A form factor is

    g(k) = radial(|k|) * g1(sigma),   radial(r) = r**p * exp(-r**m)

(or a user-supplied radial profile with a declared infrared exponent ``p``).
Every reservoir integral used downstream depends on the angular profile only
through ``angular_norm = int_{S^2} |g1|^2``, so that is what gets stored.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import NonconformingProfile, QuadratureFailure, ValidationError

EPSABS = 1e-10
EPSREL = 1e-8
QUAD_LIMIT = 500

# radii used by the infrared ratio-stabilization test
_IR_RADII = np.logspace(-2, -6, 5)
_IR_STABILITY = 0.05
_IR_MAX_N = 12


def _quad(f, a, b, epsabs=EPSABS, epsrel=EPSREL, points=None):
    """``scipy.integrate.quad`` that raises instead of warning."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                f, a, b, epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"quadrature on [{a}, {b}] failed: {exc}") from None
    if not math.isfinite(val):
        raise QuadratureFailure(f"quadrature on [{a}, {b}] returned {val}")
    return val


def _piecewise_quad(f, breaks: Sequence[float], epsabs=EPSABS, epsrel=EPSREL):
    """Integrate over consecutive panels ``breaks[i]..breaks[i+1]``; last may be inf."""
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi > lo:
            total += _quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel)
    return total


def x_coth(x, beta: float):
    """``x * coth(beta x / 2)`` for x >= 0, with its limit ``2/beta`` at x = 0."""
    x = np.asarray(x, dtype=float)
    bx = beta * x
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(np.abs(bx) < 1e-8, 2.0 / beta, x / np.tanh(0.5 * bx))
    return out if out.ndim else float(out)


def _sphere_norm(profile: Callable, n_theta: int = 64, n_phi: int = 128) -> float:
    # Gauss-Legendre in cos(theta), periodic trapezoid in phi
    mu, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(mu)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    vals = np.abs(np.vectorize(profile, otypes=[complex])(th, ph)) ** 2
    return float(np.sum(w[:, None] * vals) * (2 * np.pi / n_phi))


@dataclass(frozen=True)
class ReservoirSpec:
    """Thermal state of the reservoir, fixed by its inverse temperature."""

    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValidationError(f"beta must be positive and finite, got {self.beta}", "beta")

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta


@dataclass(frozen=True)
class FormFactor:
    """Coupling function ``g(k) = radial(|k|) g1(sigma)``.

    Parameters
    ----------
    p : float
        Infrared exponent, one of -1/2, 1/2, 3/2, ...
    m : int
        Ultraviolet decay exponent of the parametric family, 1 or 2.
    angular_profile : callable (theta, phi) -> complex, optional
        ``g1``.  ``None`` means isotropic, ``g1 = 1``.
    angular_norm : float, optional
        ``int |g1|^2 dsigma``.  Computed from ``angular_profile`` when omitted;
        defaults to ``4 pi`` in the isotropic case.
    radial_profile : callable r -> float, optional
        Replaces ``r**p exp(-r**m)``.  It must behave as ``C r**p`` with
        ``0 < C < inf`` at small ``r``; this is checked on construction.
    """

    p: float = 0.5
    m: int = 1
    angular_profile: Optional[Callable] = field(default=None, compare=False)
    angular_norm: Optional[float] = None
    radial_profile: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        n = self.p + 0.5
        if not (math.isfinite(n) and abs(n - round(n)) < 1e-12 and round(n) >= 0):
            raise ValidationError(f"p must be -1/2 + n with n = 0, 1, ..., got {self.p}", "p")
        object.__setattr__(self, "p", round(n) - 0.5)
        if self.m not in (1, 2):
            raise ValidationError(f"m must be 1 or 2, got {self.m}", "m")

        if self.angular_profile is not None:
            norm = _sphere_norm(self.angular_profile)
            if self.angular_norm is not None and not math.isclose(
                norm, self.angular_norm, rel_tol=1e-8
            ):
                raise ValidationError(
                    f"angular_norm {self.angular_norm} disagrees with the profile ({norm})",
                    "angular_norm",
                )
        elif self.angular_norm is None:
            norm = 4 * math.pi
        else:
            norm = float(self.angular_norm)
        if not (math.isfinite(norm) and norm > 0):
            raise ValidationError(f"angular_norm must be positive and finite, got {norm}", "angular_norm")
        object.__setattr__(self, "angular_norm", norm)

        if self.radial_profile is not None:
            found = _ratio_test(self.radial_profile)
            if found != self.p:
                raise NonconformingProfile(
                    f"radial profile behaves as r**{found} near 0, declared p = {self.p}", "p"
                )

    @property
    def is_parametric(self) -> bool:
        return self.radial_profile is None

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        if self.radial_profile is None:
            return r**self.p * np.exp(-(r**self.m))
        return np.abs(np.vectorize(self.radial_profile, otypes=[float])(r))

    def ir_constant(self) -> float:
        """``C = lim_{r->0} |g(r)| / r**p`` for the radial factor."""
        if self.radial_profile is None:
            return 1.0
        r = 1e-9
        return float(abs(self.radial_profile(r)) / r**self.p)

    def shell(self, r):
        """``int_{S^2} |g(r sigma)|^2 dsigma``."""
        return self.angular_norm * self.radial(r) ** 2

    def j_over_omega(self, w):
        """``J(w)/w`` with ``J(w) = w^2 shell(w)``; finite at w = 0 for p >= -1/2."""
        w = np.asarray(w, dtype=float)
        if self.radial_profile is None:
            out = self.angular_norm * w ** (1 + 2 * self.p) * np.exp(-2 * w**self.m)
        else:
            at_zero = self.angular_norm * self.ir_constant() ** 2 if self.p == -0.5 else 0.0
            with np.errstate(invalid="ignore", divide="ignore"):
                out = np.where(w > 0, w * self.shell(np.where(w > 0, w, 1.0)), at_zero)
        return out if out.ndim else float(out)

    def spectral_density(self, w):
        """Effective spectral density ``J(w) = w^2 int |g(w sigma)|^2 dsigma``."""
        return np.asarray(w, dtype=float) * self.j_over_omega(w)

    def scaled(self, s: float) -> "FormFactor":
        """Form factor ``s * g``."""
        return FormFactor(
            p=self.p, m=self.m, angular_norm=self.angular_norm * s * s,
            radial_profile=self.radial_profile,
        )

    def _upper_cut(self) -> float:
        # exp(-2 r^m) < 1e-35 beyond this radius
        return 40.0 ** (1.0 / self.m)


def _ratio_test(profile: Callable) -> float:
    vals = np.abs(np.array([profile(r) for r in _IR_RADII], dtype=float))
    for n in range(_IR_MAX_N + 1):
        q = n - 0.5
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = vals / _IR_RADII**q
        if not np.all(np.isfinite(ratio)) or np.any(ratio <= 0):
            continue
        if ratio.min() < 1e-300 or ratio.max() > 1e300:
            continue
        if np.max(np.abs(np.diff(ratio)) / ratio[:-1]) < _IR_STABILITY:
            return q
    raise NonconformingProfile(
        "no admissible p = -1/2 + n makes |g(r)|/r**p stabilize as r -> 0", "radial_profile"
    )


def infrared_exponent(ff: FormFactor) -> float:
    """The unique ``p`` with ``0 < lim |g(k)|/|k|**p < inf``.

    Parametric form factors report their stored ``p``; custom radial profiles
    are re-examined by sampling radii 1e-2 ... 1e-6 and picking the candidate
    whose ratio stabilizes.
    """
    if ff.is_parametric:
        return ff.p
    return _ratio_test(ff.radial_profile)


def xi(ff: FormFactor, res: ReservoirSpec, eta: float) -> float:
    """Energy-exchange effectiveness at energy ``eta`` (closed form).

    The Lorentzian family in the defining integral collapses onto the shell
    ``|k| = eta``.  At ``eta = 0`` only half of the family lies on ``[0, inf)``,
    which leaves ``angular_norm * C**2 / beta`` for p = -1/2 and zero otherwise.
    """
    if eta < 0:
        raise ValidationError(f"eta must be >= 0, got {eta}", "eta")
    if eta == 0:
        if ff.p > -0.5:
            return 0.0
        return ff.angular_norm * ff.ir_constant() ** 2 / res.beta
    return float(ff.j_over_omega(eta) * x_coth(eta, res.beta))


def xi_lorentzian(
    ff: FormFactor,
    res: ReservoirSpec,
    eta: float,
    epsilon: float,
    epsabs: float = 1e-13,
    epsrel: float = 1e-11,
) -> float:
    """Pre-limit integral defining xi, at Lorentzian width ``epsilon``.

    ``(1/pi) int d^3k coth(beta|k|/2) |g(k)|^2 eps / ((|k|-eta)^2 + eps^2)``,
    reduced to a radial integral and integrated panel by panel with breaks
    at ``eta`` and ``eta +- 10^j eps``.
    """
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be > 0, got {epsilon}", "epsilon")
    beta = res.beta

    def integrand(r):
        lor = epsilon / ((r - eta) ** 2 + epsilon**2)
        return ff.j_over_omega(r) * x_coth(r, beta) * lor

    upper = max(ff._upper_cut(), eta + 1e3 * epsilon + 1.0)
    breaks = {0.0, eta, upper}
    for k in (1.0, 10.0, 100.0, 1000.0):
        for b in (eta - k * epsilon, eta + k * epsilon):
            if 0 < b < upper:
                breaks.add(b)
    breaks = sorted(breaks) + [math.inf]
    return _piecewise_quad(integrand, breaks, epsabs=epsabs, epsrel=epsrel) / math.pi


def xi_extrapolated(
    ff: FormFactor,
    res: ReservoirSpec,
    eta: float,
    epsilons: Sequence[float] = (1e-2, 1e-3, 1e-4),
) -> float:
    """Richardson-type extrapolation of ``xi_lorentzian`` to zero width.

    Away from the endpoint the width error is a power series in eps.  At
    ``eta = 0`` the Lorentzian is cut in half, and an integrand that is
    nonzero at r = 0 (p = -1/2) picks up an extra ``eps log eps`` term.
    """
    eps = np.asarray(epsilons, dtype=float)
    vals = np.array([xi_lorentzian(ff, res, eta, e) for e in eps])
    if eta == 0 and ff.p == -0.5:
        basis = np.stack([np.ones_like(eps), eps, eps * np.log(eps)], axis=1)
    else:
        basis = np.stack([np.ones_like(eps), eps, eps**2], axis=1)
    ncol = min(len(eps), basis.shape[1])
    coef, *_ = np.linalg.lstsq(basis[:, :ncol], vals, rcond=None)
    return float(coef[0])


def g_omega_inverse(ff: FormFactor) -> float:
    """``<g, omega^{-1} g> = int d^3k |g(k)|^2 / |k|``."""
    if ff.is_parametric:
        s = (2 + 2 * ff.p) / ff.m
        return float(ff.angular_norm * special.gamma(s) / (ff.m * 2.0**s))
    return _piecewise_quad(ff.j_over_omega, [0.0, ff._upper_cut(), math.inf])


def pv_energy_integral(
    ff: FormFactor,
    res: ReservoirSpec,
    Delta: float,
    delta: Optional[float] = None,
    reproducibility: float = 1e-6,
    max_halvings: int = 8,
) -> float:
    """Principal value ``P.V. int_R du u^2 |g(|u|)|^2 coth(beta|u|/2) / (u - Delta)``.

    Angular weight included.  The panel ``[Delta - delta, Delta + delta]`` is
    folded onto ``int_0^delta (h(Delta+s) - h(Delta-s))/s ds``; the result is
    recomputed with ``delta/2`` until two successive values agree to
    ``reproducibility`` (relative, floored at 1).
    """
    if not Delta > 0:
        raise ValidationError(f"Delta must be > 0, got {Delta}", "Delta")
    beta = res.beta

    def h(u):
        u = abs(u)
        return ff.j_over_omega(u) * x_coth(u, beta)

    upper = max(ff._upper_cut(), 2 * Delta + 1.0)
    negative = -_piecewise_quad(lambda u: h(u) / (u + Delta), [0.0, upper, math.inf])

    def at(d):
        left = _quad(lambda u: h(u) / (u - Delta), 0.0, Delta - d)
        right = _piecewise_quad(lambda u: h(u) / (u - Delta), [Delta + d, upper, math.inf])
        core = _quad(lambda s: (h(Delta + s) - h(Delta - s)) / s, 0.0, d)
        return negative + left + right + core

    d = 0.5 * Delta if delta is None else float(delta)
    if not 0 < d < Delta:
        raise ValidationError(f"excision radius must lie in (0, Delta), got {d}", "delta")
    prev = at(d)
    for _ in range(max_halvings):
        d *= 0.5
        cur = at(d)
        if abs(cur - prev) <= reproducibility * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureFailure(
        f"principal value did not settle to {reproducibility} after {max_halvings} halvings"
    )
