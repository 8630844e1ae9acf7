"""Seedable Monte Carlo engine for urn trajectories.

Only the integer white-ball count is advanced step by step; the martingale
``Y_n = g_n (W_n - e_n)`` is formed at checkpoints, so horizons of 10^7 cost
no more floating-point work than short ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numba as nb
import numpy as np

from . import analytics
from .model import Regime, SpecError, StepOutcome, UrnSpec, classify
from .rng import CounterStream, draw_below, normalize_seed, stream_keys_nb

# Prefer layers that do not probe for a system TBB build.
nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

MAX_SAMPLE_SIZE = 16
DEFAULT_PROXY_FACTOR = 10


class TenabilityViolation(RuntimeError):
    """A simulated step asked to remove balls that were not in the urn."""


def draw_sample(W: int, T: int, spec: UrnSpec, rng: CounterStream) -> StepOutcome:
    """Draw one sample of ``m`` balls from an urn with ``W`` white among ``T``."""
    if not 0 <= W <= T:
        raise ValueError(f"impossible state W={W}, T={T}")
    m = spec.m
    k = 0
    if spec.without_replacement:
        if T < m:
            raise ValueError(f"cannot draw {m} balls without replacement from {T}")
        w, t = W, T
        for _ in range(m):
            if rng.below(t) < w:
                k += 1
                w -= 1
            t -= 1
    else:
        for _ in range(m):
            if rng.below(T) < W:
                k += 1
    dw = spec.increment(k)
    return StepOutcome(k, dw, spec.sigma - dw)


@nb.njit(cache=True)
def _one_replica(W0, T0, sigma, m, incr, without, seed, replica, checkpoints, out_row):
    k1, k2 = stream_keys_nb(seed, replica)
    ctr = 0
    W = W0
    T = T0
    C = checkpoints.shape[0]
    ci = 0
    while ci < C and checkpoints[ci] == 0:
        out_row[ci] = W
        ci += 1
    horizon = checkpoints[C - 1]
    for n in range(1, horizon + 1):
        k = 0
        if without:
            w = W
            t = T
            for _ in range(m):
                if draw_below(k1, k2, ctr, t) < w:
                    k += 1
                    w -= 1
                t -= 1
                ctr += 1
        else:
            for _ in range(m):
                if draw_below(k1, k2, ctr, T) < W:
                    k += 1
                ctr += 1
        W += incr[k]
        T += sigma
        if W < 0 or W > T:
            return n
        while ci < C and checkpoints[ci] == n:
            out_row[ci] = W
            ci += 1
    return 0


@nb.njit(parallel=True, cache=True)
def _batch_parallel(W0, T0, sigma, m, incr, without, seed, first, checkpoints, out, fail):
    for r in nb.prange(out.shape[0]):
        fail[r] = _one_replica(W0, T0, sigma, m, incr, without, seed, first + r, checkpoints, out[r])


@nb.njit(cache=True)
def _batch_serial(W0, T0, sigma, m, incr, without, seed, first, checkpoints, out, fail):
    for r in range(out.shape[0]):
        fail[r] = _one_replica(W0, T0, sigma, m, incr, without, seed, first + r, checkpoints, out[r])


def available_threads() -> int:
    return nb.config.NUMBA_NUM_THREADS


def simulate_counts(
    spec: UrnSpec,
    checkpoints: Sequence[int],
    replicas: int,
    seed: int,
    *,
    first_replica: int = 0,
    threads: Optional[int] = None,
    engine: str = "parallel",
) -> np.ndarray:
    """White-ball counts, shape ``(replicas, len(checkpoints))``.

    Replica ``r`` always uses stream ``(seed, first_replica + r)``, so the
    result does not depend on ``threads`` or ``engine``.
    """
    if spec.m > MAX_SAMPLE_SIZE:
        raise SpecError(f"simulation supports m <= {MAX_SAMPLE_SIZE}")
    cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if cps.size == 0 or cps[0] < 0:
        raise ValueError("need at least one nonnegative checkpoint")
    incr = np.array([spec.increment(k) for k in range(spec.m + 1)], dtype=np.int64)
    out = np.full((replicas, cps.size), -1, dtype=np.int64)
    fail = np.zeros(replicas, dtype=np.int64)
    args = (spec.W0, spec.T0, spec.sigma, spec.m, incr, spec.without_replacement,
            np.uint64(normalize_seed(seed)), first_replica, cps, out, fail)
    if engine == "serial":
        _batch_serial(*args)
    elif engine == "parallel":
        prev = nb.get_num_threads()
        nb.set_num_threads(min(threads or available_threads(), available_threads()))
        try:
            _batch_parallel(*args)
        finally:
            nb.set_num_threads(prev)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    bad = np.flatnonzero(fail)
    if bad.size:
        r = int(bad[0])
        raise TenabilityViolation(
            f"replica {first_replica + r} removed absent balls at step {int(fail[r])}"
        )
    return out


def martingale_values(spec: UrnSpec, n: int, W) -> np.ndarray:
    """``Y_n = g_n (W_n - e_n)`` for an array of white-ball counts at time ``n``."""
    return analytics.g(spec, n) * (np.asarray(W, dtype=np.float64) - analytics.centering_float(spec, n))


@dataclass(frozen=True)
class Ensemble:
    spec: UrnSpec
    seed: int
    checkpoints: np.ndarray
    W: np.ndarray

    @property
    def replicas(self) -> int:
        return self.W.shape[0]

    def column(self, n: int) -> int:
        idx = np.searchsorted(self.checkpoints, n)
        if idx >= self.checkpoints.size or self.checkpoints[idx] != n:
            raise KeyError(f"{n} is not a checkpoint")
        return int(idx)

    def W_at(self, n: int) -> np.ndarray:
        return self.W[:, self.column(n)]

    def Y_at(self, n: int) -> np.ndarray:
        return martingale_values(self.spec, n, self.W_at(n))

    def Y(self) -> np.ndarray:
        return np.column_stack([self.Y_at(int(n)) for n in self.checkpoints])


def run_ensemble(spec, checkpoints, replicas, seed, *, threads=None, engine="parallel") -> Ensemble:
    W = simulate_counts(spec, checkpoints, replicas, seed, threads=threads, engine=engine)
    cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    return Ensemble(spec, seed, cps, W)


@dataclass(frozen=True)
class Trajectory:
    spec: UrnSpec
    seed: int
    horizon: int
    checkpoints: tuple[tuple[int, int, float], ...]

    def rows(self) -> Iterator[tuple[int, int, float]]:
        return iter(self.checkpoints)


def run(spec: UrnSpec, horizon: int, checkpoints: Sequence[int], seed: int, replica: int = 0) -> Trajectory:
    """One trajectory; identical to row ``replica`` of any ensemble with the same seed."""
    cps = sorted(set(int(c) for c in checkpoints) | {horizon})
    if cps[-1] > horizon:
        raise ValueError("checkpoints beyond the horizon")
    W = simulate_counts(spec, cps, 1, seed, first_replica=replica, engine="serial")[0]
    rows = tuple((n, int(w), float(martingale_values(spec, n, w))) for n, w in zip(cps, W))
    return Trajectory(spec, seed, horizon, rows)


@dataclass(frozen=True)
class TailSumSample:
    n: int
    N: int
    value: float
    eta_hat: Optional[float] = None


@dataclass(frozen=True)
class TailSums:
    """Tail sums ``Y_n - Y_N`` over replicas, with the limit proxy ``Y_N``."""

    spec: UrnSpec
    regime: Regime
    n: int
    N: int
    seed: int
    Y_n: np.ndarray
    Y_N: np.ndarray
    W_n: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.Y_n - self.Y_N

    def limit_proxy(self) -> np.ndarray:
        return self.Y_N

    def mixing_base(self) -> Optional[np.ndarray]:
        """``L`` (Lambda < 1) or ``L (T0 - L)`` (Lambda = 1) at the proxy; ``None`` if not triangular."""
        if self.regime is Regime.TRIANGULAR:
            return self.Y_N.copy()
        if self.regime is Regime.GENERALIZED_POLYA:
            return self.Y_N * (self.spec.T0 - self.Y_N)
        return None

    def eta_hat(self, floor: Optional[float] = None) -> Optional[np.ndarray]:
        base = self.mixing_base()
        if base is None:
            return None
        if floor is not None:
            base = np.maximum(base, floor)
        with np.errstate(divide="ignore"):
            return base ** -0.5

    def __iter__(self) -> Iterator[TailSumSample]:
        eta = self.eta_hat()
        for i, v in enumerate(self.values):
            yield TailSumSample(self.n, self.N, float(v), None if eta is None else float(eta[i]))

    def __len__(self) -> int:
        return self.Y_n.shape[0]


def tail_sums(
    spec: UrnSpec,
    n: int,
    N: int,
    replicas: int,
    seed: int,
    *,
    proxy_factor: int = DEFAULT_PROXY_FACTOR,
    threads: Optional[int] = None,
    engine: str = "parallel",
) -> TailSums:
    if N <= n:
        raise ValueError(f"proxy horizon N={N} must exceed n={n}")
    if N < proxy_factor * n:
        raise ValueError(f"proxy horizon N={N} below {proxy_factor} n")
    regime = classify(spec).regime
    if spec.lam == 0 or regime not in (Regime.LARGE_INDEX, Regime.TRIANGULAR, Regime.GENERALIZED_POLYA):
        raise SpecError(f"tail sums need a convergent martingale; regime is {regime.value}")
    W = simulate_counts(spec, [n, N], replicas, seed, threads=threads, engine=engine)
    return TailSums(
        spec, regime, n, N, seed,
        Y_n=martingale_values(spec, n, W[:, 0]),
        Y_N=martingale_values(spec, N, W[:, 1]),
        W_n=W[:, 0],
    )
