"""Brute-force verification engine built on finite correlation matrices.

Everything here works with ``Σ_n``, the ``n × n`` Hermitian Toeplitz
correlation matrix of ``(H(0), ..., H(n-1))``, and never touches the
spectral density. The results converge to (or bracket) the spectral
quantities in :mod:`peakcap.capacity`, which is what makes this module an
independent check on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .spectra import SpectralModel, autocorrelation

__all__ = [
    "NotPositiveSemidefinite",
    "ToeplitzGram",
    "PredictionTrace",
    "SubsetSearchResult",
    "AlphaPropertyReport",
    "Fourthegy",
    "build_gram",
    "levinson",
    "log_det_rate",
    "prediction_trace",
    "alpha",
    "onoff_divergence",
    "subset_search",
    "verify_alpha_properties",
    "coherent_divergence",
    "fourthegy",
]

PSD_TOL = 1e-10
SUBSET_CAP = 20
_PLAIN_ENUMERATION_MAX = 15


class NotPositiveSemidefinite(np.linalg.LinAlgError):
    """A correlation sequence failed the positive-semidefiniteness check."""


@dataclass(frozen=True)
class ToeplitzGram:
    """Hermitian Toeplitz correlation matrix with unit diagonal.

    ``first_row[k] = R_H(k)``; the matrix entries are ``Σ[i, j] = R_H(i - j)``.
    """

    first_row: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.first_row)

    def matrix(self, n: int | None = None) -> np.ndarray:
        r = self.first_row[: n or self.n]
        if not np.any(r.imag):
            r = r.real  # real symmetric case: factorizations run much faster
        return linalg.toeplitz(r, np.conj(r))

    def z_sequence(self, P: float) -> np.ndarray:
        """Autocorrelation of the ON-channel output ``sqrt(P) H + W``."""
        rz = P * self.first_row.astype(complex)
        rz[0] += 1.0
        return rz


@dataclass(frozen=True)
class PredictionTrace:
    """One-step prediction errors of ``Z = sqrt(P) H + W`` and log-det rates.

    ``sigma2[k]`` is the error of predicting ``Z(0)`` from ``Z(-1..-k)``,
    equal to ``D_{k+1}/D_k`` with ``D_k = det(I_k + P Σ_k)`` and ``D_0 = 1``.
    ``log_det_rates[k]`` is ``log(D_{k+1})/(k+1)``.
    """

    sigma2: np.ndarray
    log_det_rates: np.ndarray
    reflection: np.ndarray = field(repr=False)

    @property
    def log_dets(self) -> np.ndarray:
        """``log D_k`` for ``k = 1 .. len(sigma2)``."""
        return np.cumsum(np.log(self.sigma2))


def build_gram(model: SpectralModel, n: int) -> ToeplitzGram:
    """Assemble ``Σ_n`` from the model autocorrelation and check it is PSD.

    Raises :class:`NotPositiveSemidefinite` if a Cholesky pivot of
    ``I + Σ_n`` falls below ``1 - 1e-10``.
    """
    if not model.discrete:
        raise ValueError("build_gram needs a discrete-time model")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    r = np.asarray(autocorrelation(model, np.arange(n)), dtype=complex)
    if abs(r[0] - 1) > 1e-9:
        raise ValueError(f"R_H(0) = {r[0]!r}, expected 1")
    r[0] = 1.0
    gram = ToeplitzGram(r)
    _pivots = levinson(gram.z_sequence(1.0))[0]
    if np.min(_pivots) < 1 - PSD_TOL:
        k = int(np.argmin(_pivots))
        raise NotPositiveSemidefinite(
            f"pivot {k} of I + Sigma is {_pivots[k]:.3e} < 1; correlation sequence is not PSD"
        )
    return gram


def levinson(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Levinson-Durbin recursion for a Hermitian Toeplitz matrix.

    Parameters
    ----------
    r : (n,) array
        ``r[k] = E[Z(t + k) conj(Z(t))]``, the first column of the matrix.

    Returns
    -------
    err : (n,) float array
        Prediction error powers; ``err[k]`` is the error of predicting from
        ``k`` past samples, so ``err[0] = r[0]`` and
        ``prod(err[:m]) = det`` of the leading ``m × m`` block.
    refl : (n - 1,) complex array
        Reflection coefficients.

    Raises :class:`NotPositiveSemidefinite` if an error power becomes
    nonpositive.
    """
    r = np.asarray(r, dtype=complex)
    n = len(r)
    err = np.empty(n)
    refl = np.zeros(max(n - 1, 0), dtype=complex)
    a = np.zeros(0, dtype=complex)
    e = r[0].real
    if e <= 0:
        raise NotPositiveSemidefinite("r[0] must be positive")
    err[0] = e
    for m in range(1, n):
        # a[j-1] weights Z(t - j) in the order-(m-1) forward predictor.
        k = (r[m] - np.dot(a, r[m - 1 : 0 : -1])) / e
        a = np.concatenate([a - k * np.conj(a[::-1]), [k]])
        e = e * (1.0 - abs(k) ** 2)
        if not e > 0:
            raise NotPositiveSemidefinite(f"prediction error vanished at order {m}")
        refl[m - 1] = k
        err[m] = e
    return err, refl


def log_det_rate(gram: ToeplitzGram, P: float, method: str = "cholesky") -> float:
    """``(1/n) log det(I_n + P Σ_n)``, accumulated in log space.

    ``method="cholesky"`` sums log pivots of a dense Cholesky factor;
    ``method="levinson"`` sums log prediction errors of ``Z``. The two agree
    to about 1e-12 in practice.
    """
    P = float(P)
    if not (P > 0 and math.isfinite(P)):
        raise ValueError(f"peak power must be positive and finite, got {P!r}")
    if method == "cholesky":
        M = np.eye(gram.n) + P * gram.matrix()
        try:
            L = linalg.cholesky(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveSemidefinite(str(exc)) from exc
        return float(2 * np.sum(np.log(np.abs(np.diag(L)))) / gram.n)
    if method == "levinson":
        err, _ = levinson(gram.z_sequence(P))
        return float(np.sum(np.log(err)) / gram.n)
    raise ValueError(f"unknown method {method!r}")


def prediction_trace(model: SpectralModel, P: float, n: int) -> PredictionTrace:
    """Prediction errors ``σ²_{0|-1..-k}`` for ``k = 0 .. n``."""
    gram = build_gram(model, n + 1)
    err, refl = levinson(gram.z_sequence(float(P)))
    rates = np.cumsum(np.log(err)) / np.arange(1, n + 2)
    return PredictionTrace(err, rates, refl)


# ---------------------------------------------------------------------------
# ON-OFF set function
# ---------------------------------------------------------------------------

def _as_support(A) -> tuple[int, ...]:
    idx = tuple(int(i) for i in A)
    if any(i < 0 for i in idx):
        raise ValueError("ON times must be nonnegative")
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate ON times")
    return tuple(sorted(idx))


def _gram_for(model: SpectralModel, A: tuple[int, ...], gram: ToeplitzGram | None) -> ToeplitzGram:
    need = (A[-1] + 1) if A else 1
    if gram is not None and gram.n >= need:
        return gram
    return build_gram(model, need)


def _logdet_pd(M: np.ndarray) -> float:
    L = linalg.cholesky(M, lower=True, check_finite=False)
    return float(2 * np.sum(np.log(np.abs(np.diag(L)))))


def alpha(A, model: SpectralModel, P: float, gram: ToeplitzGram | None = None) -> float:
    """``α(A) = log det(I + P diag(1_A) Σ)``, with ``α(∅) = 0``.

    Only the rows and columns in ``A`` matter, so this is the log-determinant
    of ``I + P Σ_A`` with ``Σ_A`` the principal submatrix on ``A``.
    """
    A = _as_support(A)
    if not A:
        return 0.0
    g = _gram_for(model, A, gram)
    S = g.matrix()[np.ix_(A, A)]
    return _logdet_pd(np.eye(len(A)) + float(P) * S)


def onoff_divergence(A, model: SpectralModel, P: float, gram: ToeplitzGram | None = None) -> float:
    """Divergence ``P|A| - α(A)`` between outputs for ON set ``A`` and silence."""
    A = _as_support(A)
    return float(P) * len(A) - alpha(A, model, P, gram)


@dataclass(frozen=True)
class SubsetSearchResult:
    value: float  # min over nonempty A of α(A)/|A|
    argmin: tuple[int, ...]
    visited: int
    pruned: bool


def subset_search(
    model: SpectralModel,
    P: float,
    n: int,
    *,
    cap: int = SUBSET_CAP,
    prune: bool | None = None,
    tie_tol: float = 1e-12,
) -> SubsetSearchResult:
    """Exact minimum of ``α(A)/|A|`` over nonempty ``A ⊆ {0..n-1}``.

    Depth-first search in lexicographic order with an incremental Cholesky
    factor of ``I + P Σ_A``. Near-ties (within ``tie_tol`` relative) keep the
    lexicographically smallest set.

    With ``prune`` (default for ``n > 15``) whole subtrees are skipped using
    a bound that relies on the two-alternating property of ``α``: adding
    ``j`` to any set costs at least ``α(j | everything else)``, the log of
    the reciprocal diagonal of ``(I + P Σ_n)^{-1}``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"n = {n} exceeds the enumeration cap of {cap}")
    if prune is None:
        prune = n > _PLAIN_ENUMERATION_MAX
    P = float(P)
    gram = build_gram(model, n)
    M = np.eye(n) + P * gram.matrix()

    if prune:
        inv_diag = np.real(np.diag(linalg.inv(M)))
        min_gain = np.log(1.0 / inv_diag)  # α(j | all others), all >= 0
        # suffix_sorted[j]: ascending gains available from indices >= j
        suffix_sorted = [np.sort(min_gain[j:]) for j in range(n + 1)]

    best = [math.inf, (), 0]  # value, argmin, visited

    def threshold() -> float:
        b = best[0]
        return b if math.isinf(b) else b - tie_tol * max(1.0, abs(b))

    def bound(logdet: float, size: int, nxt: int) -> float:
        # Smallest achievable (logdet + sum of chosen gains)/(size + count).
        lb = math.inf if size == 0 else logdet / size
        acc, cnt = logdet, size
        for gmin in suffix_sorted[nxt]:
            acc += gmin
            cnt += 1
            lb = min(lb, acc / cnt)
            if gmin >= lb:
                break
        return lb

    def visit(A: list[int], L: np.ndarray, logdet: float) -> None:
        size = len(A)
        start = A[-1] + 1 if A else 0
        for j in range(start, n):
            col = M[A, j] if A else np.zeros(0, dtype=complex)
            # New row of the Cholesky factor and its pivot.
            l = linalg.solve_triangular(L, col, lower=True, check_finite=False) if A else col
            piv = (M[j, j] - np.vdot(l, l)).real
            if not piv > 0:
                raise NotPositiveSemidefinite(f"nonpositive pivot adding index {j}")
            ld = logdet + math.log(piv)
            B = A + [j]
            best[2] += 1
            val = ld / (size + 1)
            if val < threshold():
                best[0], best[1] = val, tuple(B)
            if j + 1 < n:
                if prune and bound(ld, size + 1, j + 1) >= threshold():
                    continue
                Lb = np.zeros((size + 1, size + 1), dtype=complex)
                Lb[:size, :size] = L
                Lb[size, :size] = np.conj(l)
                Lb[size, size] = math.sqrt(piv)
                visit(B, Lb, ld)

    visit([], np.zeros((0, 0), dtype=complex), 0.0)
    return SubsetSearchResult(best[0], best[1], best[2], bool(prune))


@dataclass(frozen=True)
class AlphaPropertyReport:
    """Largest violation of each set-function property over an exhaustive check.

    A value ``<= 1e-10`` means the property holds numerically. Entries:
    ``empty`` (α(∅) = 0), ``monotone`` (C ⊆ D ⇒ α(C) <= α(D)),
    ``two_alternating`` (α(A∪B) + α(A∩B) <= α(A) + α(B)), ``shift``
    (α(B) = α(B + k)), ``equivalence`` (the three betterness conditions for
    disjoint A, B agree) and ``translation`` (B better than a locally optimal
    A implies B ∪ (A + k) is better than A).
    """

    n: int
    violations: dict[str, float]
    tight_two_alternating: bool

    @property
    def max_violation(self) -> float:
        return max(self.violations.values())

    def ok(self, tol: float = 1e-10) -> bool:
        return self.max_violation <= tol


def _alpha_table(M: np.ndarray, W: int) -> np.ndarray:
    """α over every subset of {0..W-1}, indexed by bitmask.

    Subsets of equal size are factored together as one stacked Cholesky.
    """
    masks = np.arange(1 << W)
    bits = (masks[:, None] >> np.arange(W)) & 1
    sizes = bits.sum(axis=1)
    vals = np.zeros(1 << W)
    for s in range(1, W + 1):
        sel = np.nonzero(sizes == s)[0]
        idx = np.nonzero(bits[sel])[1].reshape(len(sel), s)
        sub = M[idx[:, :, None], idx[:, None, :]]
        L = np.linalg.cholesky(sub)
        vals[sel] = 2 * np.sum(np.log(np.abs(np.diagonal(L, axis1=1, axis2=2))), axis=1)
    return vals


def verify_alpha_properties(model: SpectralModel, P: float, n: int) -> AlphaPropertyReport:
    """Exhaustively check the structural properties of ``α`` on ``{0..n-1}``.

    Shifted sets are evaluated on a window of ``min(2n, 16)`` time slots, so
    shift invariance is checked for every ``B + k`` that fits in it.
    """
    n = int(n)
    if not 1 <= n <= 10:
        raise ValueError("verify_alpha_properties supports 1 <= n <= 10")
    P = float(P)
    W = min(2 * n, 16)
    gram = build_gram(model, W)
    a_all = _alpha_table(np.eye(W) + P * gram.matrix(), W)
    N = 1 << n
    a = a_all[:N]
    masks = np.arange(N)
    sizes = np.array([bin(m).count("1") for m in range(N)])

    v: dict[str, float] = {"empty": abs(float(a[0]))}

    # Pairwise properties, vectorized over all (A, B).
    A = masks[:, None]
    B = masks[None, :]
    union, inter = A | B, A & B
    subset = (A & ~B) == 0
    v["monotone"] = max(0.0, float(np.max(np.where(subset, a[:, None] - a[None, :], 0.0))))
    lhs = a[union] + a[inter]
    rhs = a[:, None] + a[None, :]
    v["two_alternating"] = max(0.0, float(np.max(lhs - rhs)))
    tight = bool(np.allclose(lhs, rhs, rtol=0, atol=1e-10))

    # Shift invariance: α(B + k) = α(B) while B + k fits in the window.
    shift = 0.0
    for k in range(1, W):
        fits = (masks << k) < (1 << W)
        if not np.any(fits[1:]):
            break
        shift = max(shift, float(np.max(np.abs(a_all[masks[fits] << k] - a[fits]))))
    v["shift"] = shift

    # For disjoint nonempty A, B with c = α(A)/|A|, d = α(B|A)/|B| and
    # u = α(A∪B)/|A∪B|:  u - c = |B|/|A∪B| (d - c)  and  d - u = |A|/|A∪B| (d - c),
    # so "u <= c", "d <= u" and "d <= c" hold or fail together.
    disjoint = (inter == 0) & (A != 0) & (B != 0)
    sa = np.maximum(sizes[:, None], 1)
    sb = np.maximum(sizes[None, :], 1)
    su = np.maximum(sizes[union], 1)
    c = a[:, None] / sa
    d = (a[union] - a[:, None]) / sb
    u = a[union] / su
    r1 = np.abs((u - c) - sb / su * (d - c))
    r2 = np.abs((d - u) - sa / su * (d - c))
    v["equivalence"] = float(np.max(np.where(disjoint, np.maximum(r1, r2), 0.0)))

    # Translation: if A is better than each of its nonempty proper subsets and
    # B is better than A, then B ∪ (A + k) is better than A.
    ratio = np.full(N, np.inf)
    ratio[1:] = a[1:] / sizes[1:]
    best_sub = np.full(N, np.inf)  # min ratio over nonempty submasks, inclusive
    proper = np.full(N, np.inf)  # min ratio over nonempty proper submasks
    for m in sorted(range(1, N), key=lambda x: sizes[x]):
        for b in range(n):
            if m >> b & 1 and m != 1 << b:
                proper[m] = min(proper[m], best_sub[m ^ (1 << b)])
        best_sub[m] = min(ratio[m], proper[m])
    ratio_all = np.full(1 << W, np.inf)
    sizes_all = np.array([bin(m).count("1") for m in range(1 << W)])
    ratio_all[1:] = a_all[1:] / sizes_all[1:]
    trans = 0.0
    for am in np.nonzero(ratio[1:] <= proper[1:])[0] + 1:
        better = masks[(ratio <= ratio[am])]
        for k in range(W):
            shifted = int(am) << k
            if shifted >= 1 << W:
                break
            trans = max(trans, float(np.max(ratio_all[better | shifted])) - ratio[am])
    v["translation"] = max(0.0, trans)

    return AlphaPropertyReport(n, v, tight)


# ---------------------------------------------------------------------------
# Coherent channel and fourthegy
# ---------------------------------------------------------------------------

def coherent_divergence(X, model: SpectralModel, P: float) -> float:
    """Divergence between outputs for input ``X`` and for silence, with CSI.

    The receiver sees ``(X ∘ H + W, H)``; both hypotheses are proper complex
    Gaussian with covariances ``Σ_X = [[X̄ΣX̄† + I, X̄Σ], [ΣX̄†, Σ]]`` and
    ``Σ_0 = diag(I, Σ)``, and the divergence is
    ``log det Σ_0 - log det Σ_X + tr(Σ_0⁻¹ Σ_X) - 2T``.
    """
    X = np.atleast_1d(np.asarray(X, dtype=complex))
    if X.ndim != 1 or X.size == 0:
        raise ValueError("X must be a nonempty vector")
    if np.max(np.abs(X)) ** 2 > float(P) * (1 + 1e-12):
        raise ValueError("X violates the peak constraint |X_i|^2 <= P")
    T = X.size
    S = build_gram(model, T).matrix()
    Xb = np.diag(X)
    top = np.hstack([Xb @ S @ Xb.conj().T + np.eye(T), Xb @ S])
    bot = np.hstack([S @ Xb.conj().T, S])
    sig_x = np.vstack([top, bot])
    sig_0 = linalg.block_diag(np.eye(T), S)
    _, ld_x = np.linalg.slogdet(sig_x)
    _, ld_0 = np.linalg.slogdet(sig_0)
    tr = np.trace(linalg.solve(sig_0, sig_x, assume_a="her")).real
    return float(ld_0 - ld_x + tr - 2 * T)


@dataclass(frozen=True)
class Fourthegy:
    value: float
    bound: float | None = None


def fourthegy(X, model: SpectralModel, P: float | None = None) -> Fourthegy:
    """Fourthegy ``J_C(X) = Σ_i |X_i|² Σ_j |X_j|² |R_H(i-j)|²``.

    With a peak ``P`` the bound ``Σ|X_i|² · P · Σ_k |R_H(k)|²`` is returned
    too, where the infinite sum is ``∫ S² dω/2π`` (infinite for Clarke).
    """
    from .spectra import squared_density_integral

    X = np.atleast_1d(np.asarray(X, dtype=complex))
    w = np.abs(X) ** 2
    T = X.size
    r = np.asarray(autocorrelation(model, np.arange(T)))
    R2 = np.abs(linalg.toeplitz(r, np.conj(r))) ** 2
    value = float(w @ R2 @ w)
    bound = None
    if P is not None:
        s2, _ = squared_density_integral(model)
        bound = math.inf if math.isinf(s2) else float(np.sum(w) * float(P) * s2)
    return Fourthegy(value, bound)
