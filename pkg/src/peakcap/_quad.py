"""Adaptive quadrature helpers shared by the spectral integrals.

Thin layer over QUADPACK (``scipy.integrate.quad``) that splits an interval at
caller-supplied breakpoints, accumulates the per-panel error estimates and
raises :class:`QuadratureError` when the achieved error misses the target.
"""
from __future__ import annotations

import warnings
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

DEFAULT_EPSABS = 1e-12
# Reported errors above this trigger QuadratureError unless the caller relaxes it.
DEFAULT_TOL = 1e-10


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested absolute error."""

    def __init__(self, message: str, value: float, abserr: float):
        super().__init__(f"{message} (value={value!r}, abserr={abserr:.3e})")
        self.value = value
        self.abserr = abserr


def panels(
    f: Callable[[float], float],
    edges: Iterable[float],
    *,
    epsabs: float = DEFAULT_EPSABS,
    limit: int = 200,
) -> tuple[float, float]:
    """Integrate ``f`` over consecutive panels ``[e0, e1], [e1, e2], ...``.

    Returns ``(value, abserr)`` where ``abserr`` is the sum of QUADPACK's
    per-panel estimates.
    """
    e = np.unique(np.asarray(list(edges), dtype=float))
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(e[:-1], e[1:]):
            v, ae = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=1e-13, limit=limit)
            total += v
            err += ae
    return total, err


def checked(value: float, abserr: float, tol: float, what: str) -> tuple[float, float]:
    if not np.isfinite(value) or abserr > tol:
        raise QuadratureError(f"{what}: quadrature missed tolerance {tol:.1e}", value, abserr)
    return value, abserr
