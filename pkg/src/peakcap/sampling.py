"""Continuous-time channels seen through a sampled matched filter.

At resolution level ``K`` the receiver samples at rate ``L = 2^K``. The
sampled fading process ``H̃_K`` has the aliased spectrum

    S̃_K(ω) = L Σ_n S(L(ω - 2πn)) sinc²(ω - 2πn),   ω ∈ [-π, π],

with ``sinc(x) = sin(x/2)/(x/2)``, variance ``b_K = ∫ S̃_K dω/2π`` and peak
``P/L`` per sample. Everything below is evaluated in the original frequency
variable ``ν = Lω``, where

    b_K = ∫_ℝ S(ν) sinc²(ν/L) dν/2π
    I_K = ∫_{|ν|<πL} log(1 + P Σ_n S(ν - 2πnL) sinc²(ν/L - 2πn)) dν/2π

and ``cp_KK = b_K - I_K/P``. The leading ``1`` of the unit-variance formula
becomes ``b_K`` because ``H̃_K`` is not normalized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import DEFAULT_TOL, checked, panels
from .spectra import Kind, SpectralModel, _density_unchecked, _measure_map, spectral_integral

__all__ = [
    "SamplingLimit",
    "TailBoundError",
    "sinc",
    "aliased_spectrum",
    "sampled_variance",
    "i_K",
    "cp_KK",
    "i_K_bounds",
    "sampling_limit",
]

TAIL_TOL = 1e-12
_SINC_SERIES = 1e-4
_MAX_TERMS = 1_000_000


class TailBoundError(ValueError):
    """The aliasing sum cannot be truncated with a certified tail."""


@dataclass(frozen=True)
class SamplingLimit:
    """Sampled-channel quantities at one resolution level."""

    K: int
    b_K: float
    i_K: float
    cp_KK: float


def sinc(x):
    """``sin(x/2)/(x/2)``, equal to 1 at 0."""
    x = np.asarray(x, dtype=float)
    h = x / 2
    small = np.abs(x) < _SINC_SERIES
    safe = np.where(small, 1.0, h)
    out = np.where(small, 1 - h * h / 6 + h**4 / 120, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def _check(model: SpectralModel, K: int) -> int:
    if model.discrete or model.kind is Kind.BLOCK_FADING:
        raise ValueError("sampling needs a continuous-time model with a density")
    if model.kind is Kind.GAUSS_MARKOV_CONTINUOUS and model.rho == 0:
        raise ValueError("continuous Gauss-Markov with rho = 0 has no density")
    K = int(K)
    if K < 0:
        raise ValueError("K must be >= 0")
    return K


def _check_peak(P: float) -> float:
    P = float(P)
    if not (P > 0 and math.isfinite(P)):
        raise ValueError(f"peak power must be positive and finite, got {P!r}")
    return P


def _alias_range(model: SpectralModel, L: float) -> tuple[int, float]:
    """Number of alias terms per side and a bound on the discarded tail.

    For ``|ν| <= πL`` and ``n != 0`` each Gauss-Markov term is at most
    ``8aL²/(ν - 2πnL)⁴``; summing over ``|n| > N`` gives
    ``16a / (π⁴ L²) / (6 (2N - 1)³)``. Compactly supported spectra need no
    tail at all.
    """
    if model.kind is Kind.GAUSS_MARKOV_CONTINUOUS:
        a = -model.log_rho
        c = 16 * a / (math.pi**4 * L * L) / 6
        N = 1
        while c / (2 * N - 1) ** 3 >= TAIL_TOL:
            N = max(N + 1, math.ceil(((c / TAIL_TOL) ** (1 / 3) + 1) / 2))
            if N > _MAX_TERMS:
                raise TailBoundError("aliasing tail bound needs too many terms")
        return N, c / (2 * N - 1) ** 3
    lo, hi = model.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise TailBoundError(f"no tail certificate for {model.kind.value}")
    # ν - 2πnL must reach the support for some |ν| <= πL.
    reach = max(abs(lo), abs(hi))
    return math.ceil(reach / (2 * math.pi * L) + 0.5), 0.0


def _folded(model: SpectralModel, L: float, N: int, nu) -> np.ndarray:
    """``Σ_{|n|<=N} S(ν - 2πnL) sinc²(ν/L - 2πn)`` for an array of ``ν``."""
    nu = np.asarray(nu, dtype=float)
    n = np.arange(-N, N + 1)
    shifted = nu[..., None] - 2 * math.pi * L * n
    return np.sum(_density_unchecked(model, shifted) * sinc(shifted / L) ** 2, axis=-1)


def aliased_spectrum(model: SpectralModel, K: int, omega):
    """``S̃_K(ω)`` for ``ω ∈ [-π, π]``; truncation error below 1e-12."""
    K = _check(model, K)
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) > math.pi + 1e-12):
        raise ValueError("omega must lie in [-pi, pi]")
    L = float(2**K)
    N, _ = _alias_range(model, L)
    out = L * _folded(model, L, N, L * w)
    return float(out) if out.ndim == 0 else out


def _theta_of(model: SpectralModel, nu: float) -> float | None:
    """Inverse of the measure map's ``ω(θ)`` for ``ν >= 0`` (None if off-support)."""
    if model.kind is Kind.GAUSS_MARKOV_CONTINUOUS:
        return math.atan(nu / -model.log_rho)
    x = nu / (2 * math.pi * model.f_m)
    return math.asin(x) if x < 1 else None


def sampled_variance(model: SpectralModel, K: int, *, tol: float = DEFAULT_TOL) -> float:
    """``b_K = ∫_ℝ S(ν) sinc²(ν/L) dν/2π``, at most 1.

    Computed as ``1 - ∫ S (1 - sinc²(ν/L)) dν/2π`` so that the small
    deficit is resolved directly, with breakpoints around ``|ν| ~ L`` where
    the weight switches on.
    """
    K = _check(model, K)
    L = float(2**K)

    def loss(x: float) -> float:
        return -math.expm1(2 * math.log(abs(sinc(x)))) if sinc(x) != 0 else 1.0

    what = f"b_K at K={K}"
    if model.kind is Kind.TABULATED_CONTINUOUS:
        w, d = model._freq, model._dens
        edges = list(w) + [m * 2 * math.pi * L for m in range(-64, 65)]
        edges = [e for e in edges if w[0] <= e <= w[-1]]

        def g(x: float) -> float:
            return float(np.interp(x, w, d)) * loss(x / L) / (2 * math.pi)

        deficit = checked(*panels(g, edges), tol, what)[0]
    else:
        omega_of, _ = _measure_map(model)
        brk = [0.0, math.pi / 2]
        for x in (1e-3, 1e-2, 0.1, 0.5, 1, 2, 5, 10, 30, 100, 1e3, 1e4, 1e5):
            t = _theta_of(model, x * L)
            if t is not None:
                brk.append(t)
        brk += [-t for t in brk]

        def h(t: float) -> float:
            return loss(omega_of(t) / L) / math.pi

        deficit = checked(*panels(h, brk), tol, what)[0]
    return 1.0 - deficit


def _band_integral(model: SpectralModel, L: float, fn, *, tol: float, what: str) -> float:
    """``∫_{|ν|<πL} fn(ν, S(ν)) dν/2π`` where ``fn`` may use the folded spectrum.

    When the band contains the whole central spectral lobe and no other
    alias reaches it, the model's measure map is used; otherwise plain
    panels with breakpoints at the (aliased) table nodes or band edges.
    """
    edge = math.pi * L
    kind = model.kind
    if kind is Kind.GAUSS_MARKOV_CONTINUOUS or (
        kind is Kind.CLARKE and 2 * math.pi * model.f_m <= edge
    ):
        omega_of, dens_of = _measure_map(model)
        if kind is Kind.GAUSS_MARKOV_CONTINUOUS:
            t_max = math.atan(edge / -model.log_rho)
        else:
            t_max = math.pi / 2

        def h(t: float) -> float:
            sx = dens_of(t)
            return fn(omega_of(t), sx) / sx / math.pi

        mid = [t_max * f for f in (0.5, 0.9, 0.99, 0.999)]
        brk = [-t for t in mid] + [-t_max, 0.0, t_max] + mid
        return checked(*panels(h, brk), tol, what)[0]

    lo, hi = model.support
    nodes = [-edge, edge, 0.0]
    if kind is Kind.CLARKE:
        base = [lo, hi]
    else:
        base = list(model._freq)
    N, _ = _alias_range(model, L)
    for n in range(-N, N + 1):
        nodes += [x + 2 * math.pi * n * L for x in base]
    nodes = [x for x in nodes if -edge <= x <= edge]

    def g(x: float) -> float:
        return fn(x, None) / (2 * math.pi)

    return checked(*panels(g, nodes), tol, what)[0]


def i_K(model: SpectralModel, K: int, P: float, *, tol: float = 1e-9) -> float:
    """The sampled information integral ``I_K`` at peak ``P``, in nats."""
    K = _check(model, K)
    P = _check_peak(P)
    L = float(2**K)
    N, _ = _alias_range(model, L)

    def fn(nu: float, _s) -> float:
        return math.log1p(P * float(_folded(model, L, N, nu)))

    return _band_integral(model, L, fn, tol=tol, what=f"I_K at K={K}")


def cp_KK(model: SpectralModel, K: int, P: float) -> float:
    """Capacity per unit energy of the level-``K`` sampled channel, ``b_K - I_K/P``."""
    return sampling_limit(model, K, P).cp_KK


def sampling_limit(model: SpectralModel, K: int, P: float) -> SamplingLimit:
    """``b_K``, ``I_K`` and ``cp_KK`` in one record."""
    P = _check_peak(P)
    b = sampled_variance(model, K)
    i = i_K(model, K, P)
    return SamplingLimit(int(K), b, i, b - i / P)


def i_K_bounds(model: SpectralModel, K: int, P: float, *, tol: float = 1e-9) -> tuple[float, float]:
    """Lower and upper bounds bracketing ``I_K``.

    The lower bound keeps only the central alias term,
    ``∫_{|ν|<πL} log(1 + P S(ν) sinc²(ν/L))``. The upper bound drops the
    sinc² weight from that term and charges the remaining aliases linearly:
    ``∫_{|ν|<πL} log(1 + P S) + P ∫_{|ν|>πL} S sinc²(ν/L)``.
    """
    K = _check(model, K)
    P = _check_peak(P)
    L = float(2**K)
    edge = math.pi * L

    def lower_fn(nu, s):
        s = float(_density_unchecked(model, nu)) if s is None else s
        return math.log1p(P * s * sinc(nu / L) ** 2)

    def upper_fn(nu, s):
        s = float(_density_unchecked(model, nu)) if s is None else s
        return math.log1p(P * s)

    lower = _band_integral(model, L, lower_fn, tol=tol, what="I_K lower bound")
    upper = _band_integral(model, L, upper_fn, tol=tol, what="I_K upper bound")
    inside = _band_integral(
        model, L,
        lambda nu, s: (float(_density_unchecked(model, nu)) if s is None else s) * sinc(nu / L) ** 2,
        tol=tol, what="in-band variance",
    )
    outside = max(sampled_variance(model, K) - inside, 0.0)
    return lower, upper + P * outside
