"""Capacity per unit energy under a peak constraint, its bounds and closed forms.

Units: powers are SNRs with the additive noise normalized to unit variance,
information is in nats, capacity per unit energy in nats per unit energy
(nats/Joule).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from ._quad import DEFAULT_TOL
from .spectra import Kind, SpectralModel, spectral_integral, squared_density_integral

__all__ = [
    "CapacityResult",
    "TimeBounds",
    "information_rate_integral",
    "cap_per_unit_energy",
    "upper_bound_up",
    "gauss_markov_cp_closed",
    "clarke_cp_closed",
    "clarke_cp_published",
    "block_cp_closed",
    "coherent_cp",
    "cap_per_unit_time_bounds",
]


@dataclass(frozen=True)
class CapacityResult:
    """Capacity per unit energy together with the quantities it is built from.

    Attributes
    ----------
    c_p : float
        Capacity per unit energy, nats/Joule.
    i_of_p : float
        The integral ``I(P) = ∫ log(1 + P S) dω/2π``, nats.
    u_p : float
        Fourthegy upper bound ``(P/2) ∫ S² dω/2π``; ``math.inf`` when the
        integral diverges.
    quad_err : float
        Absolute error estimate of the quadrature behind ``i_of_p`` (0 for
        closed forms).
    limit_convention : bool
        True when the value is a limit (P = 0 or P = inf) rather than an
        evaluation.
    """

    c_p: float
    i_of_p: float
    u_p: float
    quad_err: float = 0.0
    coherent: float = 1.0
    limit_convention: bool = False


@dataclass(frozen=True)
class TimeBounds:
    """Upper bounds on capacity per unit time (nats per channel use)."""

    p_avg: float
    beta: float
    coherent_bound: float
    energy_bound: float
    fourthegy_bound: float


def _check_peak(P: float, *, allow_inf: bool = False) -> float:
    P = float(P)
    if math.isnan(P) or P < 0:
        raise ValueError(f"peak power must be nonnegative, got {P!r}")
    if math.isinf(P) and not allow_inf:
        raise ValueError("peak power must be finite here")
    return P


def information_rate_integral(
    model: SpectralModel, P: float, *, tol: float = DEFAULT_TOL, full_output: bool = False
):
    """``I(P) = ∫ log(1 + P S(ω)) dω/2π`` over the model's frequency domain.

    For continuous-time Gauss-Markov fading with ``ρ = 0`` the density
    degenerates (all spectral mass escapes to infinite frequency); the limit
    ``I(P) = P`` is returned.

    Returns ``I`` or, with ``full_output=True``, ``(I, abserr)``.
    """
    P = _check_peak(P)
    if model.kind is Kind.BLOCK_FADING:
        raise ValueError("block fading has no spectral density; use block_cp_closed")
    if P == 0:
        value, err = 0.0, 0.0
    elif model.kind is Kind.GAUSS_MARKOV_CONTINUOUS and model.rho == 0:
        value, err = P, 0.0
    else:
        value, err = spectral_integral(
            model, lambda w, s: math.log1p(P * s), tol=tol, what="I(P)"
        )
    return (value, err) if full_output else value


def upper_bound_up(model: SpectralModel, P: float) -> float:
    """Fourthegy bound ``U_p(P) = (P/2) ∫ S² dω/2π``; ``math.inf`` if divergent.

    For block fading the corresponding bound is ``P T / 2``.
    """
    P = _check_peak(P)
    if model.kind is Kind.BLOCK_FADING:
        return P * model.block_len / 2
    if model.kind is Kind.GAUSS_MARKOV_CONTINUOUS and model.rho == 0:
        return 0.0
    s2, _ = squared_density_integral(model)
    if math.isinf(s2):
        return math.inf
    return P / 2 * s2


def cap_per_unit_energy(model: SpectralModel, P: float) -> CapacityResult:
    """Capacity per unit energy ``C_p(P) = 1 - I(P)/P`` for peak constraint ``P``.

    ``P = inf`` gives the unconstrained value 1; ``P = 0`` gives the limiting
    value 0 with ``limit_convention`` set. Block-fading models use the
    closed form of :func:`block_cp_closed`.
    """
    P = _check_peak(P, allow_inf=True)
    if math.isinf(P):
        return CapacityResult(1.0, math.inf, math.inf, limit_convention=True)
    if P == 0:
        return CapacityResult(0.0, 0.0, 0.0, limit_convention=True)
    if model.kind is Kind.BLOCK_FADING:
        T = float(model.block_len)
        return CapacityResult(block_cp_closed(P, T), math.log1p(P * T) / T, P * T / 2)
    i_of_p, err = information_rate_integral(model, P, full_output=True)
    if model.kind is Kind.GAUSS_MARKOV_CONTINUOUS and model.rho == 0:
        c_p = 0.0
    else:
        # ∫ (S - log(1 + P S)/P): nonnegative integrand, no cancellation at small P.
        c_p, _ = spectral_integral(
            model, lambda w, s: _x_minus_log1p(P * s) / P, tol=DEFAULT_TOL, what="C_p(P)"
        )
    return CapacityResult(c_p, i_of_p, upper_bound_up(model, P), quad_err=err)


def _x_minus_log1p(x: float) -> float:
    if x < 1e-3:
        return x * x * (0.5 - x * (1 / 3 - x * (0.25 - x / 5)))
    return x - math.log1p(x)


def _gm_log_zplus(rho: float, P: float) -> float:
    # z+ is the larger root of z^2 - (1 + P + rho^2 (1 - P)) z + rho^2.
    # The discriminant is factored as (b - 2 rho)(b + 2 rho) to avoid the
    # cancellation near rho -> 1, and z+ - 1 is formed without subtraction.
    q = 1 - rho * rho
    disc = q * ((1 - rho) + P * (1 + rho)) * ((1 + rho) + P * (1 - rho))
    root = math.sqrt(disc)
    if P >= 1:
        zm1 = ((P - 1) * q + root) / 2
    else:
        zm1 = 2 * P * q / (root - (P - 1) * q)
    return math.log1p(zm1)


def gauss_markov_cp_closed(rho: float, P: float, time_domain: str = "discrete") -> CapacityResult:
    """Closed-form capacity per unit energy for Gauss-Markov fading.

    Discrete time: ``C_p = 1 - log(z+)/P`` with ``z+`` the larger root of
    ``z² - (1 + P + ρ²(1 - P)) z + ρ² = 0`` and ``U_p = (P/2)(1+ρ²)/(1-ρ²)``.

    Continuous time (``R_H(t) = ρ^|t|``): ``I(P) = sqrt(log²ρ - 2P logρ) + logρ``
    and ``U_p = P / (-2 logρ)``.
    """
    rho = float(rho)
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must satisfy 0 <= rho < 1, got {rho!r}")
    P = _check_peak(P)
    if P == 0:
        return CapacityResult(0.0, 0.0, 0.0, limit_convention=True)
    if time_domain == "discrete":
        i_of_p = _gm_log_zplus(rho, P)
        u_p = P / 2 * (1 + rho * rho) / (1 - rho * rho)
    elif time_domain == "continuous":
        if rho == 0:
            i_of_p, u_p = P, 0.0
        else:
            a = -math.log(rho)
            # sqrt(a² + 2aP) - a, rationalized.
            i_of_p = 2 * a * P / (math.sqrt(a * a + 2 * a * P) + a)
            u_p = P / (2 * a)
    else:
        raise ValueError(f"time_domain must be 'discrete' or 'continuous', got {time_domain!r}")
    return CapacityResult(1.0 - i_of_p / P, i_of_p, u_p)


def _clarke_g(a: float) -> float:
    if a >= 1:
        return math.sqrt(1 - a**-2) * math.atan(math.sqrt(a * a - 1))
    return -math.sqrt(a**-2 - 1) * math.atanh(math.sqrt(1 - a * a))


def _clarke_bracket(a: float) -> float:
    # g(a) - log(a/2)/a. For a < 1, artanh(s) = log((1 + s)/a) with
    # s = sqrt(1 - a²); after collecting terms every summand is positive,
    # so nothing cancels as a -> 0.
    if a >= 1:
        return _clarke_g(a) - math.log(a / 2) / a
    s = math.sqrt((1 - a) * (1 + a))
    om = a * a / (1 + s)  # 1 - s
    # log 2 - s log(1 + s) = om log 2 - s log((1 + s)/2), and (1 + s)/2 = 1 - om/2
    return (om * (math.log(2) - math.log(a)) - s * math.log1p(-om / 2)) / a


def clarke_cp_closed(P: float, f_m: float = 1 / math.pi) -> float:
    """Capacity per unit energy of unit-variance Clarke fading, in closed form.

    Depends on ``P`` and ``f_m`` only through the normalized peak
    ``a = P / (π f_m)``::

        C_p = (2/π) (g(a) - log(a/2)/a)

        g(a) =  sqrt(1 - a⁻²) · arctan(sqrt(a² - 1))        a >= 1
        g(a) = -sqrt(a⁻² - 1) · artanh(sqrt(1 - a²))        a <  1

    The two branches meet at ``g(1) = 0``. See :func:`clarke_cp_published`
    for the historical expression and how it relates to this one.
    """
    P = _check_peak(P)
    if not f_m > 0:
        raise ValueError(f"f_m must be positive, got {f_m!r}")
    if P == 0:
        return 0.0
    a = P / (math.pi * f_m)
    return 2 / math.pi * _clarke_bracket(a)


def clarke_cp_published(P: float) -> float:
    """The commonly quoted Clarke expression ``g(P) - log(P/2)/P + 1 - π/2``.

    Here ``g`` is written with a complex arctangent on the ``P < 1`` branch.
    This is *not* the capacity per unit energy of a unit-variance process:
    it goes negative for ``P`` below about 0.7 and implies ``I(P)/P -> π/2``
    as ``P -> 0``. It equals ``1 - I(P)/P`` for the density
    ``S(2πf) = 1/sqrt(1 - (2f)²)`` on ``|f| < 1/2`` (variance π/2), and is
    related to :func:`clarke_cp_closed` at ``π f_m = 1`` by::

        clarke_cp_published(P) = (π/2) clarke_cp_closed(P) + 1 - π/2
    """
    P = _check_peak(P)
    if P == 0:
        raise ValueError("expression is singular at P = 0")
    if P >= 1:
        g = math.sqrt(1 - P**-2) * (math.pi / 2 - math.atan(1 / math.sqrt(P * P - 1))) if P > 1 else 0.0
    else:
        g = math.sqrt(P**-2 - 1) * cmath.atan(1 / cmath.sqrt(P * P - 1)).imag
    return g - math.log(P / 2) / P + 1 - math.pi / 2


def block_cp_closed(P: float, T: float) -> float:
    """Block fading with block length ``T``: ``1 - log(1 + PT)/(PT)``."""
    P = _check_peak(P)
    if not T > 0:
        raise ValueError(f"block length must be positive, got {T!r}")
    x = P * T
    if math.isinf(x):
        return 1.0
    if x < 1e-4:
        return x / 2 - x * x / 3 + x**3 / 4
    return 1.0 - math.log1p(x) / x


def coherent_cp(P: float) -> float:
    """Capacity per unit energy with receiver channel knowledge: exactly 1."""
    P = _check_peak(P, allow_inf=True)
    if P == 0:
        raise ValueError("peak power must be positive")
    return 1.0


def cap_per_unit_time_bounds(model: SpectralModel, p_avg: float, beta: float) -> TimeBounds:
    """Bounds on capacity per unit time with peak ``P = β p_avg``.

    ``coherent_bound = p_avg``, ``energy_bound = p_avg C_p(β p_avg)`` and
    ``fourthegy_bound = p_avg U_p(β p_avg)``.
    """
    p_avg = float(p_avg)
    beta = float(beta)
    if not (p_avg > 0 and math.isfinite(p_avg)):
        raise ValueError(f"average power must be positive and finite, got {p_avg!r}")
    if not (beta >= 1 and math.isfinite(beta)):
        raise ValueError(f"peak-to-average ratio must be >= 1, got {beta!r}")
    P = beta * p_avg
    res = cap_per_unit_energy(model, P)
    fourthegy = math.inf if math.isinf(res.u_p) else res.u_p * p_avg
    return TimeBounds(p_avg, beta, p_avg, res.c_p * p_avg, fourthegy)
