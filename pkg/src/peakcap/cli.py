"""Command-line front end: ``peakcap {capacity,bounds,sweep,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid flags or
model parameters, 3 numerical failure (quadrature, PSD or tail checks).
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence, TextIO

import numpy as np

from . import __version__
from . import capacity as cap
from . import sampling as smp
from . import spectra as sp
from . import toeplitz as tz
from ._quad import QuadratureError
from .spectra import Kind, SpectralModel

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
MODELS = ("gm-discrete", "gm-continuous", "clarke", "block", "white", "tabulated")


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return "%.12g" % x


# ---------------------------------------------------------------------------
# Model flags
# ---------------------------------------------------------------------------

def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("fading model")
    g.add_argument("--model", choices=MODELS, default="gm-discrete")
    g.add_argument("--rho", type=float, default=0.9, help="Gauss-Markov correlation, 0 <= rho < 1")
    g.add_argument("--f-m", dest="f_m", type=float, default=1 / math.pi, help="Clarke maximum Doppler shift")
    g.add_argument("--T", dest="T", type=float, default=1.0, help="block length")
    g.add_argument("--time-domain", choices=("discrete", "continuous"), default="discrete",
                   help="time domain for block and tabulated models")
    g.add_argument("--table", help="two-column frequency,density file (tabulated model)")
    g.add_argument("--renormalize", action="store_true", help="rescale a table to unit variance")


def build_model(args: argparse.Namespace) -> SpectralModel:
    try:
        m = args.model
        if m == "gm-discrete":
            return sp.gauss_markov(args.rho, "discrete")
        if m == "gm-continuous":
            return sp.gauss_markov(args.rho, "continuous")
        if m == "clarke":
            return sp.clarke(args.f_m)
        if m == "block":
            if args.time_domain == "discrete" and args.T != int(args.T):
                raise ValueError("discrete block length must be an integer")
            return sp.block_fading(args.T, args.time_domain)
        if m == "white":
            return sp.white()
        if not args.table:
            raise ValueError("--model tabulated needs --table")
        return sp.load_table(args.table, args.time_domain, args.renormalize)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x >= 0 or math.isnan(x):
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return x


# ---------------------------------------------------------------------------
# capacity / bounds
# ---------------------------------------------------------------------------

def cmd_capacity(args: argparse.Namespace, out: TextIO) -> int:
    model = build_model(args)
    res = cap.cap_per_unit_energy(model, args.P)
    print(f"model       {model.describe()}", file=out)
    print(f"P           {_fmt(args.P)}", file=out)
    print(f"C_p         {_fmt(res.c_p)}", file=out)
    print(f"I(P)        {_fmt(res.i_of_p)}", file=out)
    print(f"U_p         {_fmt(res.u_p)}", file=out)
    print(f"coherent    {_fmt(res.coherent)}", file=out)
    print(f"quad_err    {res.quad_err:.3e}", file=out)
    if res.limit_convention:
        print("note        limiting value (P = 0 or P = inf)", file=out)
    if model.kind is Kind.CLARKE and 0 < args.P < math.inf:
        closed = cap.clarke_cp_closed(args.P, model.f_m)
        print(f"C_p closed  {_fmt(closed)}", file=out)
        if math.isclose(math.pi * model.f_m, 1.0, rel_tol=1e-12):
            print(f"published   {_fmt(cap.clarke_cp_published(args.P))}"
                  "  (variance pi/2 normalization, not a unit-variance capacity)", file=out)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace, out: TextIO) -> int:
    model = build_model(args)
    try:
        b = cap.cap_per_unit_time_bounds(model, args.p_avg, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"model            {model.describe()}", file=out)
    for name in ("p_avg", "beta", "coherent_bound", "energy_bound", "fourthegy_bound"):
        print(f"{name:<16} {_fmt(getattr(b, name))}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    model_args: dict
    param: str
    grid: tuple[float, ...]
    P: float
    betas: tuple[float, ...]

    def columns(self) -> list[str]:
        if self.param == "p_avg":
            cols = ["p_avg"]
            for b in self.betas:
                tag = _fmt(b)
                cols += [f"coherent_b{tag}", f"energy_b{tag}", f"fourthegy_b{tag}"]
            return cols
        return [self.param, "C_p", "U_p", "I", "coherent"]


def _grid(lo: float, hi: float, count: int, scale: str) -> tuple[float, ...]:
    if count < 2:
        raise UsageError("--count must be at least 2")
    if scale == "log":
        if not (lo > 0 and hi > 0):
            raise UsageError("log grid needs positive bounds")
        return tuple(float(x) for x in np.geomspace(lo, hi, count))
    return tuple(float(x) for x in np.linspace(lo, hi, count))


def _sweep_row(spec: SweepSpec, x: float) -> list[float]:
    args = argparse.Namespace(**spec.model_args)
    if spec.param == "rho":
        args.rho = x
    elif spec.param == "T":
        args.T = x
    model = build_model(args)
    if spec.param == "p_avg":
        row = [x]
        for beta in spec.betas:
            b = cap.cap_per_unit_time_bounds(model, x, beta)
            row += [b.coherent_bound, b.energy_bound, b.fourthegy_bound]
        return row
    P = x if spec.param == "P" else spec.P
    res = cap.cap_per_unit_energy(model, P)
    return [x, res.c_p, res.u_p, res.i_of_p, res.coherent]


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[list[float]]:
    """Evaluate the grid; rows come back in grid order whatever the worker count."""
    fn = partial(_sweep_row, spec)
    if workers <= 1:
        return [fn(x) for x in spec.grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, spec.grid))


def write_csv(spec: SweepSpec, rows: Sequence[Sequence[float]], out: TextIO) -> None:
    m = spec.model_args
    print(f"# peakcap {__version__}", file=out)
    desc = f"# model={m['model']} rho={_fmt(m['rho'])} f_m={_fmt(m['f_m'])} T={_fmt(m['T'])}"
    desc += f" time_domain={m['time_domain']}"
    if m.get("table"):
        desc += f" table={m['table']} renormalize={m['renormalize']}"
    print(desc, file=out)
    fixed = f"P={_fmt(spec.P)}" if spec.param != "p_avg" else "beta=" + ",".join(map(_fmt, spec.betas))
    print(f"# sweep={spec.param} n={len(spec.grid)} {fixed}", file=out)
    print(",".join(spec.columns()), file=out)
    for row in rows:
        print(",".join(_fmt(v) for v in row), file=out)


def cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    if args.param == "rho" and args.model not in ("gm-discrete", "gm-continuous"):
        raise UsageError("sweeping rho needs a Gauss-Markov model")
    if args.param == "T" and args.model != "block":
        raise UsageError("sweeping T needs --model block")
    build_model(args)  # validate the fixed flags before spawning work
    keys = ("model", "rho", "f_m", "T", "time_domain", "table", "renormalize")
    spec = SweepSpec(
        {k: getattr(args, k) for k in keys},
        args.param,
        _grid(args.min, args.max, args.count, args.scale),
        args.P,
        tuple(args.beta),
    )
    rows = run_sweep(spec, args.workers)
    if args.out in (None, "-"):
        write_csv(spec, rows, out)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                write_csv(spec, rows, fh)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        return f"{self.name}\t{self.observed:.6e}\t{self.tolerance:.1e}\t{'PASS' if self.passed else 'FAIL'}"


def _le(name: str, observed: float, tol: float) -> Check:
    return Check(name, observed, tol, bool(observed <= tol))


def suite_szego(rho: float, P: float, n: int) -> list[Check]:
    model = sp.gauss_markov(rho)
    I = cap.information_rate_integral(model, P)
    trace = tz.prediction_trace(model, P, n - 1)
    rates = trace.log_det_rates
    rise = float(np.max(np.diff(rates))) if n > 1 else 0.0
    m = min(n, 2048)
    gram = tz.build_gram(model, m)
    agree = abs(tz.log_det_rate(gram, P, "cholesky") - tz.log_det_rate(gram, P, "levinson"))
    z_plus = math.exp(cap.gauss_markov_cp_closed(rho, P).i_of_p)
    return [
        _le("szego.rate_nonincreasing", max(rise, 0.0), 1e-12),
        _le(f"szego.rate_minus_I(n={n})", abs(rates[-1] - I), 5e-3),
        _le(f"szego.levinson_vs_cholesky(n={m})", agree, 1e-8),
        _le(f"szego.sigma2_minus_zplus(n={n})", abs(trace.sigma2[-1] - z_plus), 1e-3),
    ]


def suite_subsets(rho: float, P: float, n: int) -> list[Check]:
    model = sp.gauss_markov(rho)
    I = cap.information_rate_integral(model, P)
    res = tz.subset_search(model, P, n)
    contiguous = tz.alpha(range(n), model, P) / n
    report = tz.verify_alpha_properties(model, P, min(n, 10))
    return [
        _le(f"subsets.I_minus_min(n={n})", I - res.value, 1e-12),
        _le(f"subsets.min_minus_contiguous(n={n})", res.value - contiguous, 1e-12),
        _le(f"subsets.alpha_properties(n={report.n})", report.max_violation, 1e-10),
    ]


def suite_coherent(rho: float, P: float, trials: int, seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    model = sp.gauss_markov(rho)
    s2 = cap.upper_bound_up(model, 2.0)  # (2/2) ∫S² = ∫S²
    worst = 0.0
    excess = -math.inf
    for _ in range(trials):
        T = int(rng.integers(1, 9))
        r = math.sqrt(P) * np.sqrt(rng.uniform(0, 1, T))
        X = r * np.exp(2j * math.pi * rng.uniform(0, 1, T))
        worst = max(worst, abs(tz.coherent_divergence(X, model, P) - float(np.sum(np.abs(X) ** 2))))
        J = tz.fourthegy(X, model).value
        excess = max(excess, J - float(np.sum(np.abs(X) ** 2)) * P * s2)
    return [
        _le(f"coherent.divergence_minus_energy(trials={trials})", worst, 1e-9),
        _le(f"coherent.fourthegy_over_bound(trials={trials})", max(excess, 0.0), 1e-12),
    ]


def suite_sampling(rho: float, P: float, K: int) -> list[Check]:
    model = sp.gauss_markov(rho, "continuous")
    ref = cap.gauss_markov_cp_closed(rho, P, "continuous").c_p
    lim = smp.sampling_limit(model, K, P)
    lo, hi = smp.i_K_bounds(model, K, P)
    outside = max(lo - lim.i_K, lim.i_K - hi, 0.0)
    return [
        _le(f"sampling.b_K_minus_1(K={K})", max(lim.b_K - 1, 0.0), 1e-12),
        _le(f"sampling.1_minus_b_K(K={K})", 1 - lim.b_K, 1e-3),
        _le(f"sampling.cp_KK_minus_C_p(K={K})", abs(lim.cp_KK - ref), 2e-3),
        _le(f"sampling.I_K_outside_bounds(K={K})", outside, 1e-9),
    ]


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    if not 0 <= args.rho < 1:
        raise UsageError("--rho must satisfy 0 <= rho < 1")
    if not (args.P > 0 and math.isfinite(args.P)):
        raise UsageError("--P must be positive and finite")
    suites: dict[str, Callable[[], list[Check]]] = {
        "szego": lambda: suite_szego(args.rho, args.P, args.n or 4096),
        "subsets": lambda: suite_subsets(args.rho, args.P, args.n or 12),
        "coherent": lambda: suite_coherent(args.rho, args.P, args.trials, args.seed),
        "sampling": lambda: suite_sampling(args.rho, args.P, args.K),
    }
    if args.suite == "subsets" and args.n and args.n > tz.SUBSET_CAP:
        raise UsageError(f"--n above the subset cap {tz.SUBSET_CAP}")
    if args.suite == "all" and args.n:
        raise UsageError("--n is per-suite; run suites individually to set it")
    names = list(suites) if args.suite == "all" else [args.suite]
    checks: list[Check] = []
    for name in names:
        checks += suites[name]()
    print("name\tobserved\ttolerance\tresult", file=out)
    for c in checks:
        print(c.line(), file=out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peakcap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity per unit energy at one peak power")
    _add_model_flags(p)
    p.add_argument("--P", type=_positive_float, required=True, help="peak SNR (inf allowed)")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("bounds", help="per-unit-time bounds under a peak-to-average ratio")
    _add_model_flags(p)
    p.add_argument("--p-avg", dest="p_avg", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="CSV sweep over P, rho, p_avg or T")
    _add_model_flags(p)
    p.add_argument("--param", choices=("P", "rho", "p_avg", "T"), default="P")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--scale", choices=("log", "linear"), default="log")
    p.add_argument("--P", type=_positive_float, default=1.0, help="fixed peak SNR when not swept")
    p.add_argument("--beta", type=float, action="append",
                   help="peak-to-average ratio for p_avg sweeps (repeatable, default 1)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle verification suites")
    p.add_argument("suite", choices=("szego", "subsets", "coherent", "sampling", "all"))
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--P", type=float, default=1.0)
    p.add_argument("--n", type=int, help="matrix size (szego, default 4096) or subset range (subsets, default 12)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--K", type=int, default=12, help="sampling level")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    if getattr(args, "beta", None) is None and args.command == "sweep":
        args.beta = [1.0]
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, tz.NotPositiveSemidefinite, smp.TailBoundError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
