"""Fading-process models: power spectral density and autocorrelation.

Every model is normalized to unit variance, ``R_H(0) = 1``, i.e.
``∫ S(ω) dω/2π = 1`` over the model's frequency domain: ``[-π, π]`` for
discrete-time models and the real line for continuous-time models.

Frequencies are angular throughout (radians per sample, or radians per
second). Clarke's model is parametrized by the maximum Doppler shift ``f_m``
in Hz, so its band edge sits at ``ω = 2π f_m``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, special

from ._quad import DEFAULT_TOL, checked, panels

__all__ = [
    "Kind",
    "SpectralModel",
    "gauss_markov",
    "clarke",
    "block_fading",
    "white",
    "tabulated",
    "load_table",
    "density",
    "autocorrelation",
    "spectral_integral",
    "squared_density_integral",
    "parseval_sum",
]

NORMALIZATION_TOL = 1e-9
_EDGE_TOL = 1e-12


class Kind(str, enum.Enum):
    GAUSS_MARKOV_DISCRETE = "gm-discrete"
    GAUSS_MARKOV_CONTINUOUS = "gm-continuous"
    CLARKE = "clarke"
    BLOCK_FADING = "block"
    WHITE = "white"
    TABULATED_DISCRETE = "tabulated-discrete"
    TABULATED_CONTINUOUS = "tabulated-continuous"


_CONTINUOUS_ONLY = {Kind.GAUSS_MARKOV_CONTINUOUS, Kind.CLARKE, Kind.TABULATED_CONTINUOUS}
_DISCRETE_ONLY = {Kind.GAUSS_MARKOV_DISCRETE, Kind.WHITE, Kind.TABULATED_DISCRETE}


@dataclass(frozen=True)
class SpectralModel:
    """Immutable description of a unit-variance stationary fading process.

    Use the factory functions (:func:`gauss_markov`, :func:`clarke`, ...)
    rather than calling the constructor directly.
    """

    kind: Kind
    time_domain: str = "discrete"
    rho: float | None = None
    f_m: float | None = None
    block_len: float | None = None
    # (angular frequency, density) samples, densities already rescaled.
    table: tuple[tuple[float, float], ...] | None = None
    # Factor applied to the raw table to reach unit variance (1.0 if none).
    scale: float = 1.0
    _freq: np.ndarray | None = field(default=None, repr=False, compare=False)
    _dens: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.time_domain not in ("discrete", "continuous"):
            raise ValueError(f"time_domain must be 'discrete' or 'continuous', got {self.time_domain!r}")
        if kind in _CONTINUOUS_ONLY and self.time_domain != "continuous":
            raise ValueError(f"{kind.value} is a continuous-time model")
        if kind in _DISCRETE_ONLY and self.time_domain != "discrete":
            raise ValueError(f"{kind.value} is a discrete-time model")

        if kind in (Kind.GAUSS_MARKOV_DISCRETE, Kind.GAUSS_MARKOV_CONTINUOUS):
            if self.rho is None or not (0.0 <= self.rho < 1.0):
                raise ValueError(f"rho must satisfy 0 <= rho < 1, got {self.rho!r}")
        elif kind is Kind.CLARKE:
            if self.f_m is None or not (self.f_m > 0 and math.isfinite(self.f_m)):
                raise ValueError(f"f_m must be a positive finite Doppler shift, got {self.f_m!r}")
        elif kind is Kind.BLOCK_FADING:
            T = self.block_len
            if T is None or not (T > 0 and math.isfinite(T)):
                raise ValueError(f"block length must be positive, got {T!r}")
            if self.time_domain == "discrete" and float(T) != int(T):
                raise ValueError(f"discrete block length must be an integer, got {T!r}")
        elif kind in (Kind.TABULATED_DISCRETE, Kind.TABULATED_CONTINUOUS):
            if self.table is None:
                raise ValueError("tabulated model requires a table")
            arr = np.asarray(self.table, dtype=float)
            object.__setattr__(self, "_freq", arr[:, 0].copy())
            object.__setattr__(self, "_dens", arr[:, 1].copy())

    @property
    def discrete(self) -> bool:
        return self.time_domain == "discrete"

    @property
    def log_rho(self) -> float:
        """``log ρ`` for Gauss-Markov kinds (``-inf`` at ρ = 0)."""
        return math.log(self.rho) if self.rho else -math.inf

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside which the density vanishes (or the domain)."""
        if self.kind is Kind.CLARKE:
            w = 2 * math.pi * self.f_m
            return (-w, w)
        if self.kind is Kind.TABULATED_CONTINUOUS:
            return (float(self._freq[0]), float(self._freq[-1]))
        if self.discrete:
            return (-math.pi, math.pi)
        return (-math.inf, math.inf)

    def describe(self) -> str:
        parts = [self.kind.value]
        for name in ("rho", "f_m", "block_len"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v:.12g}")
        if self.table is not None:
            parts.append(f"points={len(self.table)}")
            if self.scale != 1.0:
                parts.append(f"scale={self.scale:.12g}")
        if self.kind is Kind.BLOCK_FADING:
            parts.append(self.time_domain)
        return " ".join(parts)


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def gauss_markov(rho: float, time_domain: str = "discrete") -> SpectralModel:
    """Gauss-Markov fading, ``R_H(k) = ρ^|k|`` (discrete) or ``ρ^|t|`` (continuous)."""
    kind = Kind.GAUSS_MARKOV_DISCRETE if time_domain == "discrete" else Kind.GAUSS_MARKOV_CONTINUOUS
    return SpectralModel(kind, time_domain=time_domain, rho=float(rho))


def clarke(f_m: float = 1 / math.pi) -> SpectralModel:
    """Clarke (Jakes) Doppler spectrum with maximum Doppler shift ``f_m`` Hz.

    The default ``f_m = 1/π`` is the normalized Doppler ``π f_m = 1``.
    """
    return SpectralModel(Kind.CLARKE, time_domain="continuous", f_m=float(f_m))


def block_fading(T: float, time_domain: str = "discrete") -> SpectralModel:
    return SpectralModel(Kind.BLOCK_FADING, time_domain=time_domain, block_len=T)


def white() -> SpectralModel:
    return SpectralModel(Kind.WHITE)


def tabulated(
    freqs,
    dens,
    time_domain: str = "discrete",
    renormalize: bool = False,
) -> SpectralModel:
    """Piecewise-linear density through the samples ``(freqs[i], dens[i])``.

    Parameters
    ----------
    freqs : array_like
        Strictly increasing angular frequencies. A discrete-time table must
        span exactly ``[-π, π]``.
    dens : array_like
        Nonnegative density samples.
    time_domain : {"discrete", "continuous"}
    renormalize : bool
        Rescale the table to unit variance. Without it, a table whose
        variance differs from one by more than 1e-9 is rejected.

    Returns
    -------
    SpectralModel
        The applied factor is available as ``model.scale``.
    """
    w = np.asarray(freqs, dtype=float).ravel()
    s = np.asarray(dens, dtype=float).ravel()
    if w.shape != s.shape or w.size < 2:
        raise ValueError("need at least two (frequency, density) samples of equal length")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(s))):
        raise ValueError("table contains non-finite values")
    if np.any(np.diff(w) <= 0):
        raise ValueError("table frequencies must be strictly increasing")
    if np.any(s < 0):
        bad = int(np.argmax(s < 0))
        raise ValueError(f"negative density {s[bad]!r} at frequency {w[bad]!r}")
    if time_domain == "discrete":
        if abs(w[0] + math.pi) > 1e-9 or abs(w[-1] - math.pi) > 1e-9:
            raise ValueError("a discrete-time table must span [-pi, pi]")
        w[0], w[-1] = -math.pi, math.pi
    variance = float(integrate.trapezoid(s, w)) / (2 * math.pi)
    if variance <= 0:
        raise ValueError("table has zero variance")
    scale = 1.0
    if renormalize:
        scale = 1.0 / variance
        s = s * scale
    elif abs(variance - 1.0) > NORMALIZATION_TOL:
        raise ValueError(
            f"table variance is {variance:.12g}, not 1; pass renormalize=True to rescale"
        )
    kind = Kind.TABULATED_DISCRETE if time_domain == "discrete" else Kind.TABULATED_CONTINUOUS
    table = tuple(zip(w.tolist(), s.tolist()))
    return SpectralModel(kind, time_domain=time_domain, table=table, scale=scale)


def load_table(
    path: str | Path,
    time_domain: str = "discrete",
    renormalize: bool = False,
) -> SpectralModel:
    """Read a two-column ``frequency, density`` text file.

    Columns may be separated by commas, semicolons, tabs or spaces. Lines
    starting with ``#`` and blank lines are ignored, as is a single
    non-numeric header line.
    """
    rows: list[tuple[float, float]] = []
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.replace(",", " ").replace(";", " ").split()
            try:
                if len(fields) != 2:
                    raise ValueError
                rows.append((float(fields[0]), float(fields[1])))
            except ValueError:
                if not rows and not header_seen:
                    header_seen = True
                    continue
                raise ValueError(f"{path}:{lineno}: expected two numeric columns, got {raw.rstrip()!r}")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    w, s = zip(*rows)
    return tabulated(w, s, time_domain=time_domain, renormalize=renormalize)


# ---------------------------------------------------------------------------
# Density and autocorrelation
# ---------------------------------------------------------------------------

def _gm_continuous_density(a: float, omega):
    return 2 * a / (omega * omega + a * a)


def _density_unchecked(model: SpectralModel, omega):
    """Density with zero extension outside the support (continuous models)."""
    w = np.asarray(omega, dtype=float)
    kind = model.kind
    if kind is Kind.WHITE:
        return np.ones_like(w)
    if kind is Kind.GAUSS_MARKOV_DISCRETE:
        r = model.rho
        return (1 - r * r) / (1 - 2 * r * np.cos(w) + r * r)
    if kind is Kind.GAUSS_MARKOV_CONTINUOUS:
        if model.rho == 0:
            return np.zeros_like(w)
        return _gm_continuous_density(-model.log_rho, w)
    if kind is Kind.CLARKE:
        x = w / (2 * math.pi * model.f_m)
        out = np.zeros_like(w)
        inside = np.abs(x) < 1
        out[inside] = 1.0 / (math.pi * model.f_m * np.sqrt(1 - x[inside] ** 2))
        return out
    if kind in (Kind.TABULATED_DISCRETE, Kind.TABULATED_CONTINUOUS):
        return np.interp(w, model._freq, model._dens, left=0.0, right=0.0)
    raise ValueError("block fading has no spectral density; use the block closed form")


def density(model: SpectralModel, omega):
    """Power spectral density ``S(ω)``.

    Accepts scalars or arrays. Raises ``ValueError`` for a discrete-time
    query outside ``[-π, π]``, a tabulated query outside the table range,
    or a block-fading model.
    """
    w = np.asarray(omega, dtype=float)
    if model.discrete and np.any(np.abs(w) > math.pi + _EDGE_TOL):
        raise ValueError("discrete-time frequency must lie in [-pi, pi]")
    if model.kind is Kind.TABULATED_CONTINUOUS:
        lo, hi = model.support
        if np.any((w < lo - _EDGE_TOL) | (w > hi + _EDGE_TOL)):
            raise ValueError(f"frequency outside tabulated range [{lo}, {hi}]")
    out = _density_unchecked(model, w)
    return float(out) if out.ndim == 0 else out


def _table_autocorrelation(model: SpectralModel, lags: np.ndarray) -> np.ndarray:
    # Exact transform of the piecewise-linear density, segment by segment,
    # written with spherical Bessel functions so small k*h stays accurate.
    w, s = model._freq, model._dens
    centre = 0.5 * (w[1:] + w[:-1])
    half = 0.5 * (w[1:] - w[:-1])
    mean = 0.5 * (s[1:] + s[:-1])
    slope = (s[1:] - s[:-1]) / (w[1:] - w[:-1])
    k = np.asarray(lags, dtype=float)[..., None]
    x = k * half
    seg = np.exp(1j * k * centre) * (
        mean * 2 * half * special.spherical_jn(0, x)
        + slope * 2j * half**2 * special.spherical_jn(1, x)
    )
    return seg.sum(axis=-1) / (2 * math.pi)


def autocorrelation(model: SpectralModel, lag):
    """Autocorrelation ``R_H(lag) = E[H(t + lag) conj(H(t))]``.

    Integer lags for discrete-time models, real time offsets for
    continuous-time models. Tabulated models return complex values when the
    table is not symmetric about zero.
    """
    kind = model.kind
    k = np.asarray(lag, dtype=float)
    if model.discrete and kind is not Kind.BLOCK_FADING and np.any(k != np.round(k)):
        raise ValueError("discrete-time lags must be integers")
    if kind in (Kind.GAUSS_MARKOV_DISCRETE, Kind.GAUSS_MARKOV_CONTINUOUS):
        out = np.where(k == 0, 1.0, model.rho ** np.abs(k))
    elif kind is Kind.WHITE:
        out = np.where(k == 0, 1.0, 0.0)
    elif kind is Kind.CLARKE:
        out = special.j0(2 * math.pi * model.f_m * k)
    elif kind in (Kind.TABULATED_DISCRETE, Kind.TABULATED_CONTINUOUS):
        out = _table_autocorrelation(model, k)
        if _table_is_symmetric(model):
            out = out.real
    else:
        raise ValueError("block fading is not stationary; it has no autocorrelation function")
    return out.item() if np.ndim(out) == 0 else out


def _table_is_symmetric(model: SpectralModel) -> bool:
    w, s = model._freq, model._dens
    return bool(np.allclose(w, -w[::-1], atol=1e-12) and np.allclose(s, s[::-1], rtol=1e-12, atol=0))


# ---------------------------------------------------------------------------
# Spectral integrals
# ---------------------------------------------------------------------------

def _measure_map(model: SpectralModel):
    """Change of variables turning ``S(ω) dω/2π`` into ``dθ/π`` on (-π/2, π/2).

    Returns ``(omega_of_theta, density_of_theta)``. Under this map the
    integrands ``F(S)/S`` are bounded for every ``F`` that vanishes at
    ``S = 0`` with finite slope, and the Gauss-Markov peak and the Clarke
    band-edge singularity both disappear.
    """
    kind = model.kind
    if kind is Kind.WHITE:
        return (lambda t: 2 * t), (lambda t: 1.0)
    if kind is Kind.GAUSS_MARKOV_DISCRETE:
        r = model.rho
        kappa = (1 + r) / (1 - r)
        return (
            lambda t: 2 * math.atan(math.tan(t) / kappa),
            lambda t: kappa * math.cos(t) ** 2 + math.sin(t) ** 2 / kappa,
        )
    if kind is Kind.GAUSS_MARKOV_CONTINUOUS:
        a = -model.log_rho
        return (lambda t: a * math.tan(t)), (lambda t: 2 * math.cos(t) ** 2 / a)
    if kind is Kind.CLARKE:
        fm = model.f_m
        return (
            lambda t: 2 * math.pi * fm * math.sin(t),
            lambda t: 1.0 / (math.pi * fm * math.cos(t)),
        )
    raise ValueError(f"no measure map for {kind.value}")


def spectral_integral(
    model: SpectralModel,
    fn: Callable[[float, float], float],
    *,
    tol: float = DEFAULT_TOL,
    what: str = "spectral integral",
) -> tuple[float, float]:
    """Compute ``∫ fn(ω, S(ω)) dω/2π`` over the model's frequency domain.

    ``fn`` must vanish where the density does (``fn(ω, 0) == 0``); that holds
    for ``log(1 + P S)``, ``S**2`` and ``S * g(ω)`` alike.

    Returns
    -------
    value, abserr : float
        Raises :class:`~peakcap._quad.QuadratureError` if ``abserr > tol``.
    """
    kind = model.kind
    if kind is Kind.BLOCK_FADING:
        raise ValueError("block fading has no spectral density; use the block closed form")
    if kind is Kind.GAUSS_MARKOV_CONTINUOUS and model.rho == 0:
        raise ValueError("continuous Gauss-Markov with rho = 0 has no density (white-noise limit)")
    if kind in (Kind.TABULATED_DISCRETE, Kind.TABULATED_CONTINUOUS):
        w, s = model._freq, model._dens

        def g(x: float) -> float:
            sx = float(np.interp(x, w, s))
            return fn(x, sx) / (2 * math.pi) if sx > 0 else 0.0

        return checked(*panels(g, w), tol, what)

    omega_of, dens_of = _measure_map(model)

    def h(t: float) -> float:
        sx = dens_of(t)
        return fn(omega_of(t), sx) / sx / math.pi

    return checked(*panels(h, (-math.pi / 2, 0.0, math.pi / 2)), tol, what)


def squared_density_integral(model: SpectralModel, *, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``∫ S(ω)^2 dω/2π`` with its error estimate; ``(inf, 0)`` when divergent.

    The Clarke spectrum's inverse-square-root band edges make this integral
    diverge logarithmically, so it is reported as infinite.
    """
    if model.kind is Kind.CLARKE:
        return math.inf, 0.0
    return spectral_integral(model, lambda w, s: s * s, tol=tol, what="integral of S^2")


def parseval_sum(model: SpectralModel, N: int) -> float:
    """Truncated Parseval sum ``Σ_{|k| <= N} |R_H(k)|^2``."""
    k = np.arange(-N, N + 1)
    r = np.asarray(autocorrelation(model, k))
    return float(np.sum(np.abs(r) ** 2))
