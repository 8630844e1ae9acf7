"""Exact-rational ground truth for small horizons.

Everything here is computed from the transition law of the chain alone:
hypergeometric or binomial sample probabilities and the replacement rows.
No closed-form result about means, variances or tail sums is used, so these
functions can check the ones in :mod:`polyurn.analytics`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .analytics import Mode, ResourceGuard, g, g_factor, tail_centering
from .model import SpecError, UrnSpec, check_tenable, feasible_draws

MAX_DEPTH = 12
MAX_M = 3
MAX_SCAN_DEPTH = 10

Number = Union[Fraction, float]


def sample_law(spec: UrnSpec, W: int, B: int) -> dict[int, Fraction]:
    """Exact probabilities of ``k`` white balls in one sample from ``(W, B)``."""
    m = spec.m
    T = W + B
    out = {}
    if spec.without_replacement:
        denom = math.comb(T, m)
        for k in range(m + 1):
            num = math.comb(W, k) * math.comb(B, m - k)
            if num:
                out[k] = Fraction(num, denom)
    else:
        denom = T**m
        for k in range(m + 1):
            num = math.comb(m, k) * W**k * B ** (m - k)
            if num:
                out[k] = Fraction(num, denom)
    return out


@dataclass(frozen=True)
class ExactDistribution:
    n: int
    support: dict[int, Fraction]

    def mean(self) -> Fraction:
        return sum((w * p for w, p in self.support.items()), Fraction(0))

    def moment(self, j: int, center: Fraction = Fraction(0)) -> Fraction:
        return sum(((w - center) ** j * p for w, p in self.support.items()), Fraction(0))

    def variance(self) -> Fraction:
        mu = self.mean()
        return self.moment(2, mu)

    def total(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))

    def to_dict(self) -> dict:
        return {"n": self.n, "law": {str(w): str(p) for w, p in sorted(self.support.items())}}


def _guard(spec: UrnSpec, n: int):
    if n > MAX_DEPTH or spec.m > MAX_M:
        raise ResourceGuard(f"exact enumeration limited to n <= {MAX_DEPTH}, m <= {MAX_M}")
    if spec.lam != 0 and not check_tenable(spec):
        raise SpecError("exact enumeration needs a tenable spec")


def _laws(spec: UrnSpec, n: int) -> list[dict[int, Fraction]]:
    laws = [{spec.W0: Fraction(1)}]
    for step in range(n):
        T = spec.T0 + spec.sigma * step
        nxt: dict[int, Fraction] = {}
        for W, p in laws[-1].items():
            for k, q in sample_law(spec, W, T - W).items():
                W2 = W + spec.increment(k)
                if W2 < 0 or W2 > T + spec.sigma:
                    raise SpecError(f"state W={W} at step {step} leads to a negative count")
                nxt[W2] = nxt.get(W2, Fraction(0)) + p * q
        laws.append(nxt)
    return laws


def exact_distribution(spec: UrnSpec, n: int) -> ExactDistribution:
    """Law of ``W_n`` by dynamic programming over ``(W, step)``."""
    _guard(spec, n)
    return ExactDistribution(n, _laws(spec, n)[n])


def _oracle_centering(spec: UrnSpec, n: int, laws) -> Fraction:
    if not tail_centering(spec):
        return Fraction(0)
    return ExactDistribution(n, laws[n]).mean()


def exact_step_law(spec: UrnSpec, W: int, n: int) -> dict[Fraction, Fraction]:
    """Conditional law of ``X_{n+1} = Y_{n+1} - Y_n`` given ``W_n = W``.

    Atoms are formed from the definition ``Y = g (W - e)`` with ``e`` the
    enumerated mean, not from any closed-form rewriting.
    """
    _guard(spec, n + 1)
    laws = _laws(spec, n + 1)
    if W not in laws[n]:
        raise SpecError(f"state W={W} is unreachable at n={n}")
    g_n = g(spec, n, Mode.EXACT)
    g_n1 = g_n * g_factor(spec, n + 1)
    e_n = _oracle_centering(spec, n, laws)
    e_n1 = _oracle_centering(spec, n + 1, laws)
    T = spec.T0 + spec.sigma * n
    Y_n = g_n * (W - e_n)
    out: dict[Fraction, Fraction] = {}
    for k, p in sample_law(spec, W, T - W).items():
        x = g_n1 * (W + spec.increment(k) - e_n1) - Y_n
        out[x] = out.get(x, Fraction(0)) + p
    return out


def reachable_states(spec: UrnSpec, n: int) -> list[int]:
    _guard(spec, n)
    return sorted(_laws(spec, n)[n])


def law_moment(law: dict, j: int) -> Fraction:
    return sum((x**j * p for x, p in law.items()), Fraction(0))


def reachability_scan(spec: UrnSpec, depth: int) -> bool:
    """True iff no composition reachable within ``depth`` steps can go negative."""
    if depth > MAX_SCAN_DEPTH:
        raise ResourceGuard(f"reachability scan limited to depth {MAX_SCAN_DEPTH}")
    frontier = {(spec.W0, spec.B0)}
    seen = set(frontier)
    for _ in range(depth):
        nxt = set()
        for W, B in frontier:
            for k in feasible_draws(spec, W, B):
                W2 = W + spec.increment(k)
                B2 = B + spec.sigma - spec.increment(k)
                if W2 < 0 or B2 < 0:
                    return False
                if (W2, B2) not in seen:
                    seen.add((W2, B2))
                    nxt.add((W2, B2))
        frontier = nxt
    return True


# --- moment recursion -------------------------------------------------------
#
# Given W_n, the sample count k has polynomial factorial moments in W_n, so
# E[D_n^j] for the centred count D_n = W_n - E[W_n] obeys a closed linear
# recursion in j <= p. This gives exact (or float) moments at any n without
# enumerating the law.


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, y in enumerate(b):
        out[i] += y
    return out


def _pscale(a, c):
    return [c * x for x in a]


def _ppow(a, p):
    out = [1]
    for _ in range(p):
        out = _pmul(out, a)
    return out


def _pshift(a, e):
    """Coefficients of ``q(D) = a(D + e)``."""
    out = [0]
    base = [e, 1]
    powk = [1]
    for c in a:
        out = _padd(out, _pscale(powk, c))
        powk = _pmul(powk, base)
    return out


_STIRLING2 = [[1], [0, 1], [0, 1, 1], [0, 1, 3, 1], [0, 1, 7, 6, 1]]


def _factorial_moment_poly(spec: UrnSpec, T, j: int, one):
    """``E[k^(j) | W]`` as a polynomial in ``W``."""
    m = spec.m
    if j > m:
        return [0]
    coef = one * math.perm(m, j)
    poly = [one]
    for i in range(j):
        if spec.without_replacement:
            poly = _pmul(poly, [-i * one, one])
            coef = coef / (T - i)
        else:
            poly = _pmul(poly, [0 * one, one])
            coef = coef / T
    return _pscale(poly, coef)


def central_count_poly(spec: UrnSpec, T, p: int, one=Fraction(1)):
    """``E[(k - m W / T)^p | W]`` as a polynomial in ``W``."""
    raw = []
    for i in range(p + 1):
        acc = [0 * one]
        for j in range(i + 1):
            acc = _padd(acc, _pscale(_factorial_moment_poly(spec, T, j, one), _STIRLING2[i][j]))
        raw.append(acc)
    minus_c = [0 * one, -one * spec.m / T]
    out = [0 * one]
    for i in range(p + 1):
        out = _padd(out, _pscale(_pmul(raw[i], _ppow(minus_c, p - i)), math.comb(p, i)))
    return out


@dataclass(frozen=True)
class MomentState:
    n: int
    mean: Number
    central: tuple  # E[D_n^j], j = 0..order

    def raw(self, j: int) -> Number:
        """``E[W_n^j]``."""
        return sum(math.comb(j, i) * self.mean ** (j - i) * self.central[i] for i in range(j + 1))

    def expect_poly(self, poly) -> Number:
        """``E[P(W_n)]`` for a polynomial in ``W``."""
        shifted = _pshift(poly, self.mean)
        return sum(c * self.central[i] for i, c in enumerate(shifted))


def moment_states(spec: UrnSpec, n_max: int, order: int = 4, mode=Mode.EXACT, record=None):
    """Yield moment states for ``n = 0..n_max`` (or only those in ``record``)."""
    exact = Mode(mode) is Mode.EXACT if not isinstance(mode, Mode) else mode is Mode.EXACT
    one = Fraction(1) if exact else 1.0
    h = spec.h * one
    mean = spec.W0 * one
    central = [one] + [0 * one] * order
    record = None if record is None else set(record)
    for n in range(n_max + 1):
        if record is None or n in record:
            yield MomentState(n, mean, tuple(central))
        if n == n_max:
            break
        T = spec.T0 + spec.sigma * n
        growth = 1 + h * spec.m / T
        polys = [
            _pshift(central_count_poly(spec, T, i, one), mean) for i in range(order + 1)
        ]
        new = []
        for p in range(order + 1):
            acc = 0 * one
            for i in range(p + 1):
                # E[D^{p-i} * P_i(D)]
                term = sum(c * central[p - i + d] for d, c in enumerate(polys[i]) if p - i + d <= order)
                acc += math.comb(p, i) * growth ** (p - i) * h**i * term
            new.append(acc)
        central = new
        mean = mean * growth + spec.a_m


def moment_state(spec: UrnSpec, n: int, order: int = 4, mode=Mode.EXACT) -> MomentState:
    return next(iter(moment_states(spec, n, order, mode, record=[n])))


def difference_moments(spec: UrnSpec, n: int, mode=Mode.FLOAT, state=None) -> tuple[Number, Number]:
    """``(E[X_{n+1}^2], E[X_{n+1}^4])``, using ``X_{n+1} = g_{n+1} h (k - m W_n / T_n)``."""
    exact = (mode if isinstance(mode, Mode) else Mode(mode)) is Mode.EXACT
    one = Fraction(1) if exact else 1.0
    st = state if state is not None else moment_state(spec, n, 4, Mode.EXACT if exact else Mode.FLOAT)
    T = spec.T0 + spec.sigma * n
    g1 = g(spec, n + 1, Mode.EXACT if exact else Mode.FLOAT)
    scale = g1 * spec.h * one
    out = []
    for p in (2, 4):
        out.append(scale**p * st.expect_poly(central_count_poly(spec, T, p, one)))
    return out[0], out[1]


def limit_moment_estimate(spec: UrnSpec, N: int = 20_000):
    """Raw moments ``E[Y_N^j]``, ``j = 1..4``, of the triangular martingale at horizon ``N``.

    For ``a_m = 0`` these converge to the moments of the limit with an
    ``O(N^{-Lambda})`` relative error; float recursion.
    """
    from .analytics import LimitMoments

    if spec.a_m != 0:
        raise SpecError("limit moment estimate is for triangular specs (a_m = 0)")
    st = moment_state(spec, N, 4, Mode.FLOAT)
    gN = g(spec, N)
    return LimitMoments(tuple(gN**j * st.raw(j) for j in range(1, 5)), f"moment-recursion N={N}")
