"""``polyurn`` command-line front end.

Every command reads a spec JSON, prints JSON (or CSV for ``simulate``) and
embeds its configuration, including the seed, in the output.

Exit codes: 0 success or pass, 1 verification failed, 2 invalid or
non-tenable spec, 3 resource guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from . import analytics, oracle, stats
from .analytics import LimitConstants, Mode, ResourceGuard
from .model import Regime, SpecError, UrnSpec, check_tenable, classify, normalize
from .simulator import TenabilityViolation, available_threads, run_ensemble

EXIT_OK, EXIT_FAIL, EXIT_SPEC, EXIT_GUARD = 0, 1, 2, 3
SEED_ENV = "POLYURN_SEED"


class Command(Enum):
    CLASSIFY = "classify"
    TENABLE = "tenable"
    ANALYTICS = "analytics"
    SIMULATE = "simulate"
    ORACLE = "oracle"
    VERIFY = "verify"
    TABLE = "table"


class OutFormat(Enum):
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class RunConfig:
    command: Command
    spec_path: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None
    out_format: OutFormat = OutFormat.JSON

    def to_dict(self) -> dict:
        return {
            "command": self.command.value,
            "spec_path": self.spec_path,
            "params": self.params,
            "seed": self.seed,
            "out_format": self.out_format.value,
        }


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    return x


def run_table(spec: UrnSpec, limit_moments: Optional[analytics.LimitMoments] = None) -> dict:
    """The regime's expansion of ``W_n`` with constants filled in."""
    cls = classify(spec)
    if cls.deterministic:
        raise SpecError("index 0 is deterministic; no expansion row")
    if not check_tenable(spec):
        raise SpecError("table needs a tenable spec")
    norm, _ = normalize(spec)
    if cls.regime is Regime.GENERALIZED_POLYA and limit_moments is None:
        limit_moments = oracle.limit_moment_estimate(norm)
    lc: LimitConstants = analytics.limit_constants(spec, limit_moments)
    lam = cls.lam
    if cls.regime in (Regime.SMALL_INDEX, Regime.CRITICAL_HALF):
        ell = "log n" if cls.regime is Regime.CRITICAL_HALF else "1"
        row = f"W_n = {float(lc.zeta):g} n + {lc.gamma1:.6g} sqrt(n * {ell}) N"
    elif cls.regime is Regime.LARGE_INDEX:
        row = (f"W_n = {float(lc.zeta):g} n + (W_inf + {lc.theta:.6g}) n^{lam} "
               f"+ {1 / lc.alpha:.6g} sqrt(n) N")
    elif cls.regime is Regime.TRIANGULAR:
        row = (f"W_n = {1 / lc.Q:.6g} L n^{lam} + {1 / (lc.tail_scale * lc.Q):.6g} "
               f"sqrt(L) n^({lam}/2) N")
    else:
        row = (f"W_n = {1 / lc.Q:.6g} L n + {1 / (lc.tail_scale * lc.Q):.6g} "
               f"sqrt(L ({norm.T0} - L)) sqrt(n) N")
    out = {
        "regime": cls.regime.value,
        "lambda": str(lam),
        "swapped": lc.swapped,
        "row": row,
        "constants": lc.to_dict(),
    }
    if cls.regime is Regime.SMALL_INDEX and norm.T0 + norm.m * norm.h <= 0:
        out["note"] = "T0 + m (a_(m-1) - a_m) <= 0; not enforced"
    return out


QUANTITIES = (
    "rows", "g", "normalization", "Q", "mean_white", "mean_expansion", "limit_constants",
    "conditional_moments", "asymptotic_s2", "transition_mass", "transition_n0",
)


def _analytics(spec: UrnSpec, args) -> dict:
    q = args.quantity
    mode = Mode.EXACT if args.exact else Mode.FLOAT
    n = args.n
    need_n = {"g", "normalization", "mean_white", "mean_expansion", "conditional_moments",
              "asymptotic_s2", "transition_mass"}
    if q in need_n and n is None:
        raise SpecError(f"{q} needs --n")
    if q == "rows":
        value = [list(r) for r in spec.rows()]
    elif q == "g":
        value = _num(analytics.g(spec, n, mode))
    elif q == "normalization":
        p = analytics.normalization_point(spec, n)
        value = {"n": p.n, "g_n": str(p.g_n), "g_n_float": p.g_n_float}
    elif q == "Q":
        value = analytics.gamma_ratio_Q(spec)
    elif q == "mean_white":
        value = _num(analytics.mean_white(spec, n, mode))
    elif q == "mean_expansion":
        value = analytics.mean_expansion(spec, n)
    elif q == "limit_constants":
        lm = None
        if classify(spec).regime is Regime.GENERALIZED_POLYA:
            lm = oracle.limit_moment_estimate(normalize(spec)[0])
        value = analytics.limit_constants(spec, lm).to_dict()
    elif q == "conditional_moments":
        if args.W is None:
            raise SpecError("conditional_moments needs --W")
        ev, second = analytics.conditional_moments(spec, args.W, n)
        value = {"ev": str(ev), "second": str(second)}
        mode = Mode.EXACT
    elif q == "asymptotic_s2":
        lm = None
        if classify(spec).regime is Regime.GENERALIZED_POLYA:
            lm = oracle.limit_moment_estimate(normalize(spec)[0])
        value = analytics.asymptotic_s2(spec, n, lm)
    elif q == "transition_mass":
        if args.k is None:
            raise SpecError("transition_mass needs --k")
        value = str(analytics.transition_mass(spec, args.k, n))
        mode = Mode.EXACT
    elif q == "transition_n0":
        value = analytics.transition_n0(spec)
    else:
        raise SpecError(f"unknown quantity {q!r}")
    return {"quantity": q, "value": value, "mode": mode.value}


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise SpecError(f"a seed is required (--seed or {SEED_ENV})")
    try:
        return int(env)
    except ValueError:
        raise SpecError(f"{SEED_ENV} must be an integer") from None


def _parse_checkpoints(text: str) -> list[int]:
    try:
        return sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise SpecError(f"bad checkpoint list {text!r}") from None


def _simulate_csv(spec: UrnSpec, args, seed: int) -> str:
    cps = _parse_checkpoints(args.checkpoints) if args.checkpoints else []
    if any(c > args.horizon for c in cps):
        raise SpecError("checkpoints beyond the horizon")
    cps = sorted(set(cps) | {args.horizon})
    ens = run_ensemble(spec, cps, args.replicas, seed, threads=args.threads,
                       engine="serial" if args.threads == 1 else "parallel")
    Y = ens.Y()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["replica", "n", "W_n", "Y_n"])
    for r in range(ens.replicas):
        for j, n in enumerate(ens.checkpoints):
            writer.writerow([r, int(n), int(ens.W[r, j]), repr(float(Y[r, j]))])
    return buf.getvalue()


def _verify(spec: UrnSpec, args, seed: int) -> stats.VerificationReport:
    common = dict(threads=args.threads, engine="parallel")
    test = args.test
    if test in ("clt", "mixing", "moments") and args.n is None:
        raise SpecError(f"--test {test} needs --n")
    if test in ("tails", "density") and args.N is None:
        raise SpecError(f"--test {test} needs --N")
    if test == "clt":
        return stats.verify_clt(spec, args.n, args.N, args.replicas, seed,
                                threshold=args.threshold, **common)
    if test == "mixing":
        return stats.verify_mixing(spec, args.n, args.N, args.replicas, seed,
                                   threshold=args.threshold, **common)
    if test == "lil":
        n_max = args.n_max or args.n
        if n_max is None:
            raise SpecError("--test lil needs --n-max")
        return stats.verify_lil(spec, args.n_min, n_max, args.replicas, seed, **common)
    if test == "tails":
        return stats.verify_tails(spec, args.N, args.replicas, seed, **common)
    if test == "density":
        return stats.verify_density(spec, args.N, args.replicas, args.bins, seed, **common)
    if test == "moments":
        return stats.verify_moments(spec, args.n, args.replicas, seed, **common)
    raise SpecError(f"unknown test {test!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyurn", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--spec", required=True, help="path to the spec JSON")
        return p

    add("classify", "urn index and regime")
    add("tenable", "tenability decision (exit 2 if not tenable)")
    add("table", "expansion row with constants")

    p = add("analytics", "closed-form quantities")
    p.add_argument("quantity", choices=QUANTITIES)
    p.add_argument("--n", type=int)
    p.add_argument("--W", type=int, help="white count for conditional_moments")
    p.add_argument("--k", type=int, help="index for transition_mass")
    p.add_argument("--exact", action="store_true")

    p = add("oracle", "exact law of W_n")
    p.add_argument("--n", type=int, required=True)

    p = add("simulate", "Monte Carlo trajectories")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--checkpoints", default="")
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", choices=["csv", "json"], default="csv")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--threads", type=int)

    p = add("verify", "statistical verification battery")
    p.add_argument("--test", required=True,
                   choices=["clt", "lil", "tails", "density", "moments", "mixing"])
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--n-min", type=int, default=64)
    p.add_argument("--n-max", type=int)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="also write the report JSON to this file")
    return parser


def _emit(text: str, path: Optional[str] = None):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "spec") and v is not None}
    try:
        spec = UrnSpec.from_json(args.spec)
        command = Command(args.command)
        seed = None
        if command in (Command.SIMULATE, Command.VERIFY):
            seed = _resolve_seed(args.seed)
            if args.threads is not None and not 1 <= args.threads:
                raise SpecError("--threads must be >= 1")
            params["threads_available"] = available_threads()
        out_format = OutFormat.CSV if command is Command.SIMULATE and args.out == "csv" else OutFormat.JSON
        config = RunConfig(command, args.spec, params, seed, out_format)
        body = {"config": config.to_dict(), "spec": spec.to_dict()}

        if command is Command.CLASSIFY:
            body["result"] = classify(spec).to_dict()
        elif command is Command.TENABLE:
            ten = check_tenable(spec)
            body["result"] = {"tenable": ten.tenable, "reason": ten.reason}
            _emit(_dump(body))
            return EXIT_OK if ten else EXIT_SPEC
        elif command is Command.ANALYTICS:
            body.update(_analytics(spec, args))
        elif command is Command.ORACLE:
            body.update(oracle.exact_distribution(spec, args.n).to_dict())
        elif command is Command.TABLE:
            body["result"] = run_table(spec)
        elif command is Command.SIMULATE:
            if spec.lam != 0 and not check_tenable(spec):
                raise SpecError("simulation needs a tenable spec")
            text = _simulate_csv(spec, args, seed)
            if out_format is OutFormat.CSV:
                _emit(text, args.output)
            else:
                rows = list(csv.DictReader(io.StringIO(text)))
                body["rows"] = rows
                _emit(_dump(body), args.output)
            return EXIT_OK
        elif command is Command.VERIFY:
            if not check_tenable(spec):
                raise SpecError("verification needs a tenable spec")
            report = _verify(spec, args, seed)
            body["report"] = report.to_dict()
            text = _dump(body)
            if args.out:
                _emit(text, args.out)
            _emit(text)
            return EXIT_OK if report.passed else EXIT_FAIL
        _emit(_dump(body))
        return EXIT_OK
    except ResourceGuard as exc:
        print(f"polyurn: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (SpecError, TenabilityViolation, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"polyurn: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
