"""Closed-form model of the 1-bit recording device.

Two probe particles sit on an inverted potential hump with a quadratic
coupling; the initial product Gaussian either straddles the hump edge (c = 0)
or is biased to one side.  In center-of-mass / relative coordinates
``u = (x+y)/sqrt(2)``, ``v = (x-y)/sqrt(2)`` the joint position density stays
a product of two Gaussians whose widths B1 (hyperbolically spreading) and B2
(oscillating for coupling > 1, spreading for coupling < 1) are known in
closed form.  The probability that the two readers disagree is the density
mass at ``x*y < 0``; for c = 0 it collapses to ``(2/pi) * arctan(B2/B1)``.

Everything here works in dimensionless units; physical-unit parameter sets
enter only through :func:`to_dimensionless` (length scale ``sqrt(hbar/(m*omega))``,
time scale ``1/omega``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate, special

from .errors import QuadratureError, StructureError, UnsupportedCaseError

# Branch window around coupling = 1 where the series form of
# sin^2(sqrt(eps) t)/eps replaces the direct quotient.
LAMBDA_BRANCH_EPS = 1e-8


@dataclass(frozen=True)
class FlipFlopParams:
    """Physical-unit parameters of the coupled-probe model.

    ``omega = sqrt(k/m)`` is the hump frequency, ``b`` the initial Gaussian
    width, ``c`` the initial offset from the hump edge, ``lam`` the
    dimensionless coupling (any real; the closed forms continue through
    lam = 1).
    """

    omega: float
    m: float
    hbar: float
    b: float
    c: float
    lam: float

    def __post_init__(self):
        for name in ("omega", "m", "hbar", "b"):
            if getattr(self, name) <= 0:
                raise StructureError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class DimensionlessParams:
    """Model parameters in natural units (b, c in units of sqrt(hbar/(m*omega)))."""

    b: float
    c: float
    lam: float

    def __post_init__(self):
        if self.b <= 0:
            raise StructureError("b must be strictly positive")


def to_dimensionless(p: FlipFlopParams) -> DimensionlessParams:
    scale = math.sqrt(p.m * p.omega / p.hbar)
    return DimensionlessParams(b=p.b * scale, c=p.c * scale, lam=p.lam)


def from_dimensionless(p: DimensionlessParams, omega: float, m: float,
                       hbar: float) -> FlipFlopParams:
    scale = math.sqrt(hbar / (m * omega))
    return FlipFlopParams(omega=omega, m=m, hbar=hbar,
                          b=p.b * scale, c=p.c * scale, lam=p.lam)


# ---------------------------------------------------------------------------
# Width factors
# ---------------------------------------------------------------------------

class Widths(NamedTuple):
    b1_sq: float
    b2_sq: float


def _sin_sq_over_eps(eps: float, t: float) -> float:
    """Analytic continuation of ``sin^2(sqrt(eps) t) / eps`` through eps = 0.

    For eps < 0 this is ``sinh^2(sqrt(-eps) t) / (-eps)`` (kept in real
    arithmetic).  Inside |eps| < 1e-8 the three-term Taylor series
    ``t^2 (1 - eps t^2/3 + 2 eps^2 t^4/45)`` is used; its remainder is
    below 1e-12 relative at the switch point for any |t| <= 100.
    """
    if abs(eps) < LAMBDA_BRANCH_EPS:
        et2 = eps * t * t
        return t * t * (1.0 - et2 / 3.0 + 2.0 * et2 * et2 / 45.0)
    if eps > 0:
        s = math.sin(math.sqrt(eps) * t)
        return s * s / eps
    s = math.sinh(math.sqrt(-eps) * t)
    return s * s / (-eps)


def _cos_continued(eps: float, t: float) -> float:
    """``cos(sqrt(eps) t)`` continued through eps = 0 (cosh for eps < 0)."""
    if abs(eps) < LAMBDA_BRANCH_EPS:
        et2 = eps * t * t
        return 1.0 - et2 / 2.0 + et2 * et2 / 24.0
    if eps > 0:
        return math.cos(math.sqrt(eps) * t)
    return math.cosh(math.sqrt(-eps) * t)


def widths(p: DimensionlessParams, t: float) -> Widths:
    """Squared widths of the u- and v-mode Gaussians at time ``t``.

    ``B1^2 = b^2 [1 + (1/b^4 + 1) sinh^2 t]`` and
    ``B2^2 = b^2 [1 + (1/(b^4 (lam-1)) - 1) sin^2(sqrt(lam-1) t)]`` with the
    lam <= 1 continuation handled in real arithmetic.  Both are strictly
    positive for every real t and lam.
    """
    t = float(t)
    b_sq = p.b * p.b
    inv_b4 = 1.0 / (b_sq * b_sq)
    sh = math.sinh(t)
    b1_sq = b_sq * (1.0 + (inv_b4 + 1.0) * sh * sh)
    eps = p.lam - 1.0
    s2 = _sin_sq_over_eps(eps, t)
    b2_sq = b_sq * (1.0 + inv_b4 * s2 - eps * s2)
    return Widths(b1_sq, b2_sq)


# ---------------------------------------------------------------------------
# Joint density and disagreement probability
# ---------------------------------------------------------------------------

def joint_density(p: DimensionlessParams, x, y, t: float):
    """Joint position density ``|psi(x, y, t)|^2``; accepts array arguments.

    The density depends on x, y only through ``u = (x+y)/sqrt(2)`` (centered
    at ``c sqrt(2) cosh t``) and ``v = (x-y)/sqrt(2)``, so it is symmetric
    under x <-> y by construction.
    """
    b1_sq, b2_sq = widths(p, t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = (x + y) / np.sqrt(2.0)
    mean_u = p.c * math.sqrt(2.0) * math.cosh(t)
    vsq_half = (x - y) ** 2 / 2.0
    val = np.exp(-((u - mean_u) ** 2) / b1_sq - vsq_half / b2_sq) \
        / (math.pi * math.sqrt(b1_sq * b2_sq))
    return val if val.ndim else float(val)


def _disagreement_ratio_sq(inv_b4: float, lam: float, t: float) -> float:
    """``B2^2 / B1^2`` as a function of 1/b^4 alone (the b^2 prefactors cancel)."""
    eps = lam - 1.0
    s2 = _sin_sq_over_eps(eps, t)
    sh = math.sinh(t)
    num = 1.0 + inv_b4 * s2 - eps * s2
    den = 1.0 + (inv_b4 + 1.0) * sh * sh
    return num / den


def disagreement_probability(p: DimensionlessParams, t: float) -> float:
    """Closed-form disagreement probability ``(2/pi) arctan(B2/B1)``.

    Only valid for the on-edge preparation ``c = 0``; biased preparations
    must integrate the density (see :func:`quadrant_integral`).
    """
    if p.c != 0.0:
        raise UnsupportedCaseError(
            "closed form requires c = 0; use quadrant_integral for biased preparations"
        )
    b_sq = p.b * p.b
    ratio_sq = _disagreement_ratio_sq(1.0 / (b_sq * b_sq), p.lam, float(t))
    return (2.0 / math.pi) * math.atan(math.sqrt(ratio_sq))


def disagreement_probability_hratio(h: float, lam: float, t: float) -> float:
    """Disagreement probability parameterized by ``h = hbar/(omega m b^2)``.

    The width ratio depends on b only through ``1/b^4 = h^2`` in natural
    units, so this is the same curve with the quantum scale made explicit;
    ``h -> 0`` recovers :func:`classical_limit_probability`.
    """
    ratio_sq = _disagreement_ratio_sq(h * h, lam, float(t))
    return (2.0 / math.pi) * math.atan(math.sqrt(ratio_sq))


def disagreement_probability_physical(p: FlipFlopParams, t: float) -> float:
    """Physical-units curve: the hbar ratio and ``omega t`` enter directly."""
    h = p.hbar / (p.omega * p.m * p.b * p.b)
    return disagreement_probability_hratio(h, p.lam, p.omega * float(t))


def classical_limit_probability(b: float, lam: float, t: float) -> float:
    """hbar -> 0 limit ``(2/pi) arctan(|cos(sqrt(lam-1) t)| / cosh t)``.

    The initial width ``b`` drops out of the limit; the argument is kept so
    the signature mirrors the quantum curve (it must still be positive).
    """
    if b <= 0:
        raise StructureError("b must be strictly positive")
    t = float(t)
    return (2.0 / math.pi) * math.atan(abs(_cos_continued(lam - 1.0, t)) / math.cosh(t))


# ---------------------------------------------------------------------------
# Quadrant integrals (general c)
# ---------------------------------------------------------------------------
#
# In (u, v) coordinates the disagreement region x*y < 0 is |u| < |v| and the
# density factorizes, so the double integral reduces to a single v-integral
# with the u-mass expressed through erf:
#
#   Pr = (1/sqrt(pi)) * Int_0^inf exp(-w^2)
#            * [erf((B2 w - m)/B1) + erf((B2 w + m)/B1)] dw,   m = c sqrt(2) cosh t.
#
# The same reduction gives the per-quadrant masses via erfc.

_GL_NODES = 160
_GL_CUTOFF = 9.0  # exp(-81) ~ 6e-36: the Gaussian weight is fully captured
_gl_cache: dict = {}


def _gl_rule(n: int = _GL_NODES, cutoff: float = _GL_CUTOFF):
    key = (n, cutoff)
    if key not in _gl_cache:
        nodes, weights = np.polynomial.legendre.leggauss(n)
        w = 0.5 * cutoff * (nodes + 1.0)
        _gl_cache[key] = (w, weights * (0.5 * cutoff) * np.exp(-w * w))
    return _gl_cache[key]


class QuadrantProbabilities(NamedTuple):
    p00: float
    p01: float
    p10: float
    p11: float


def quadrant_probabilities_batch(p_b: float, lam: float, t: float, c_values):
    """Quadrant masses (p00, p01, p10, p11) for a batch of offsets ``c``.

    Fixed-order Gauss-Legendre on the transformed v-integral; p01 = p10
    exactly by the v -> -v symmetry of the density.
    """
    params = DimensionlessParams(b=p_b, c=0.0, lam=lam)
    b1_sq, b2_sq = widths(params, t)
    b1 = math.sqrt(b1_sq)
    b2 = math.sqrt(b2_sq)
    c_values = np.atleast_1d(np.asarray(c_values, dtype=float))
    m = c_values * math.sqrt(2.0) * math.cosh(t)
    w, weights = _gl_rule()
    arg_minus = (b2 * w[None, :] - m[:, None]) / b1
    arg_plus = (b2 * w[None, :] + m[:, None]) / b1
    inv_sqrt_pi = 1.0 / math.sqrt(math.pi)
    p11 = inv_sqrt_pi * (special.erfc(arg_minus) @ weights)
    p00 = inv_sqrt_pi * (special.erfc(arg_plus) @ weights)
    disagree = np.clip(1.0 - p00 - p11, 0.0, 1.0)
    half = disagree / 2.0
    return (np.clip(p00, 0.0, 1.0), half, half, np.clip(p11, 0.0, 1.0))


def quadrant_probabilities(p: DimensionlessParams, t: float) -> QuadrantProbabilities:
    p00, p01, p10, p11 = quadrant_probabilities_batch(p.b, p.lam, t, [p.c])
    return QuadrantProbabilities(float(p00[0]), float(p01[0]), float(p10[0]), float(p11[0]))


def quadrant_integral(p: DimensionlessParams, t: float, *, tol: float = 1e-8) -> float:
    """Disagreement probability by adaptive quadrature of the joint density
    over the second and fourth quadrants; valid for any offset ``c``.

    Raises :class:`QuadratureError` when the integrator's absolute-error
    estimate exceeds ``tol``.
    """
    b1_sq, b2_sq = widths(p, t)
    b1 = math.sqrt(b1_sq)
    b2 = math.sqrt(b2_sq)
    m = p.c * math.sqrt(2.0) * math.cosh(float(t))

    def integrand(w):
        return math.exp(-w * w) * (special.erf((b2 * w - m) / b1)
                                   + special.erf((b2 * w + m) / b1))

    val, abserr = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12, epsrel=1e-12,
                                 limit=200)
    if abserr > tol:
        raise QuadratureError("quadrant integral did not converge", abserr)
    return min(1.0, max(0.0, val / math.sqrt(math.pi)))


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

PROVENANCES = ("analytic", "pde", "monte-carlo", "classical-limit")


@dataclass(frozen=True)
class DisagreementCurve:
    """Sampled Pr(disagree) against waiting time, tagged with how it was made."""

    times: tuple
    probabilities: tuple
    provenance: str

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        probs = tuple(float(q) for q in self.probabilities)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "probabilities", probs)
        if len(times) != len(probs):
            raise StructureError("times and probabilities must have equal length")
        if self.provenance not in PROVENANCES:
            raise StructureError(f"provenance must be one of {PROVENANCES}")
        if any(q < 0.0 or q > 1.0 for q in probs):
            raise StructureError("probabilities must lie in [0, 1]")


def sample_curve(p: DimensionlessParams, times: Sequence[float]) -> DisagreementCurve:
    if p.c == 0.0:
        probs = [disagreement_probability(p, t) for t in times]
    else:
        probs = [quadrant_integral(p, t) for t in times]
    return DisagreementCurve(tuple(times), tuple(probs), "analytic")


def sample_classical_curve(p: DimensionlessParams,
                           times: Sequence[float]) -> DisagreementCurve:
    probs = [classical_limit_probability(p.b, p.lam, t) for t in times]
    return DisagreementCurve(tuple(times), tuple(probs), "classical-limit")


def write_curve_csv(curve: DisagreementCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "probability", "provenance"])
        for t, q in zip(curve.times, curve.probabilities):
            writer.writerow([repr(t), repr(q), curve.provenance])


def read_curve_csv(path) -> DisagreementCurve:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise StructureError(f"empty curve file {path}")
    return DisagreementCurve(
        tuple(float(r["t"]) for r in rows),
        tuple(float(r["probability"]) for r in rows),
        rows[0]["provenance"],
    )


def time_grid(t_min: float, t_max: float, t_step: float) -> np.ndarray:
    n = int(round((t_max - t_min) / t_step))
    return t_min + t_step * np.arange(n + 1)
