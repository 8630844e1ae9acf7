"""Closed-form quantities of affine urns, in exact rationals and in floats."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .model import Regime, SpecError, UrnSpec, classify, normalize

EXACT_N_MAX = 10**5

# Bernoulli numbers B_2..B_16 for the Stirling series of log Gamma.
_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
]
_STIRLING = [float(B) / ((2 * k) * (2 * k - 1)) for k, B in enumerate(_BERNOULLI, start=1)]


class Mode(Enum):
    EXACT = "exact"
    FLOAT = "float"


class ResourceGuard(RuntimeError):
    """A cost guard refused the request."""


def _mode(mode) -> Mode:
    return mode if isinstance(mode, Mode) else Mode(mode)


def log_gamma_ratio(z: float, a: float) -> float:
    """``log Gamma(z + a) - log Gamma(z)`` for ``z > 0`` and ``z + a > 0``.

    Shifts the argument above 20 with the recurrence and uses the difference
    of Stirling series, written so that no large terms cancel.
    """
    if z <= 0 or z + a <= 0:
        raise ValueError("log_gamma_ratio needs positive arguments")
    acc = 0.0
    while min(z, z + a) < 20.0:
        acc -= math.log1p(a / z)
        z += 1.0
    za = z + a
    val = (z - 0.5) * math.log1p(a / z) + a * math.log(za) - a
    zi, zai = 1.0 / z, 1.0 / za
    zi2, zai2 = zi * zi, zai * zai
    pz, pza = zi, zai
    for c in _STIRLING:
        val += c * (pza - pz)
        pz *= zi2
        pza *= zai2
    return val + acc


def g_factor(spec: UrnSpec, j: int) -> Fraction:
    """Ratio ``g_j / g_{j-1} = (j-1+tau) / (j-1+tau+Lambda)``."""
    den = j - 1 + spec.tau + spec.lam
    if den == 0:
        raise SpecError(f"normalization g_n undefined: zero denominator at step {j}")
    return (j - 1 + spec.tau) / den


def g_exact_sequence(spec: UrnSpec, n: int) -> list[Fraction]:
    if n > EXACT_N_MAX:
        raise ResourceGuard(f"exact g_n limited to n <= {EXACT_N_MAX}")
    out = [Fraction(1)]
    for j in range(1, n + 1):
        out.append(out[-1] * g_factor(spec, j))
    return out


def _log_abs_g(spec: UrnSpec, n: int) -> tuple[float, int]:
    tau, lam = float(spec.tau), float(spec.lam)
    # Steps whose denominator is not yet positive are multiplied in directly.
    head, sign, logv = 0, 1, 0.0
    while head < n and head + tau + lam <= 0:
        head += 1
        f = g_factor(spec, head)
        sign *= 1 if f > 0 else -1
        if f == 0:
            return -math.inf, 0
        logv += math.log(abs(float(f)))
    if head < n:
        logv += log_gamma_ratio(head + tau, lam) - log_gamma_ratio(n + tau, lam)
    return logv, sign


def g(spec: UrnSpec, n: int, mode=Mode.FLOAT):
    """Normalization ``g_n = prod_{j<=n} (j-1+tau)/(j-1+tau+Lambda)``, with ``g_0 = 1``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if _mode(mode) is Mode.EXACT:
        if n > EXACT_N_MAX:
            raise ResourceGuard(f"exact g_n limited to n <= {EXACT_N_MAX}")
        val = Fraction(1)
        for j in range(1, n + 1):
            val *= g_factor(spec, j)
        return val
    logv, sign = _log_abs_g(spec, n)
    return sign * math.exp(logv)


@dataclass(frozen=True)
class NormalizationPoint:
    n: int
    g_n: Fraction
    g_n_float: float


def normalization_point(spec: UrnSpec, n: int) -> NormalizationPoint:
    return NormalizationPoint(n, g(spec, n, Mode.EXACT), g(spec, n, Mode.FLOAT))


def gamma_ratio_Q(spec: UrnSpec) -> float:
    """``Q = Gamma(tau + Lambda) / Gamma(tau)``."""
    tau, lam = float(spec.tau), float(spec.lam)
    if tau + lam > 0:
        return math.exp(log_gamma_ratio(tau, lam))
    num = math.gamma(tau + lam)
    return num / math.gamma(tau)


def mean_white(spec: UrnSpec, n: int, mode=Mode.FLOAT):
    """Expected number of white balls after ``n`` draws."""
    mode = _mode(mode)
    if n == 0:
        return Fraction(spec.W0) if mode is Mode.EXACT else float(spec.W0)
    lam = spec.lam
    if _g_degenerate(spec, n):
        # g vanishes for some negative-index urns; the affine recursion does not
        return _mean_recursion(spec, n, Fraction(1) if mode is Mode.EXACT else 1.0)
    if mode is Mode.EXACT:
        if lam == 1:
            return Fraction(spec.W0 * (n * spec.sigma + spec.T0), spec.T0)
        gs = g_exact_sequence(spec, n)
        return (spec.a_m * sum(gs[1:]) + spec.W0) / gs[n]
    if lam == 1:
        return spec.W0 * (n * spec.sigma + spec.T0) / spec.T0
    zeta = spec.a_m / (1 - float(lam))
    tau = float(spec.tau)
    return zeta * (n + tau) + (spec.W0 - zeta * tau) / g(spec, n)


def _g_degenerate(spec: UrnSpec, n: int) -> bool:
    """Whether some factor of ``g_1..g_n`` has a zero numerator or denominator."""
    for shift in (spec.tau, spec.tau + spec.lam):
        if shift <= 0 and shift.denominator == 1 and -shift <= n - 1:
            return True
    return False


def _mean_recursion(spec: UrnSpec, n: int, one):
    """``E[W_{j+1}] = E[W_j] (1 + m h / T_j) + a_m`` iterated from ``W0``."""
    w = one * spec.W0
    for j in range(n):
        T = spec.T0 + spec.sigma * j
        w = w * (T + spec.m * spec.h) / T + spec.a_m
    return w


def mean_expansion(spec: UrnSpec, n: int) -> float:
    """Two-term expansion ``zeta n + theta n^Lambda`` of the mean (Lambda < 1)."""
    if spec.lam == 1:
        raise SpecError("expansion stated for Lambda < 1")
    lam = float(spec.lam)
    zeta = spec.a_m / (1 - lam)
    theta = (spec.W0 - zeta * float(spec.tau)) / gamma_ratio_Q(spec)
    return zeta * n + theta * n**lam


def tail_centering(spec: UrnSpec) -> bool:
    """Whether ``Y_n`` subtracts the mean (non-triangular) or not (``a_m = 0``)."""
    return spec.a_m != 0


def centering_exact(spec: UrnSpec, n: int) -> Fraction:
    return mean_white(spec, n, Mode.EXACT) if tail_centering(spec) else Fraction(0)


def centering_float(spec: UrnSpec, n: int) -> float:
    return mean_white(spec, n, Mode.FLOAT) if tail_centering(spec) else 0.0


def _reachable_check(spec: UrnSpec, W: int, n: int):
    T = spec.T0 + spec.sigma * n
    if not 0 <= W <= T:
        raise SpecError(f"state W={W} impossible at n={n} (T_n={T})")
    shift = W - spec.W0 - n * spec.a_m
    h = spec.h
    if h == 0:
        if shift != 0:
            raise SpecError(f"state W={W} unreachable at n={n}")
        return
    if shift % h != 0 or not 0 <= shift // h <= spec.m * n:
        raise SpecError(f"state W={W} unreachable at n={n}")


def conditional_moments(spec: UrnSpec, W: int, n: int) -> tuple[Fraction, Fraction]:
    """``(E[X_{n+1} | F_n], E[X_{n+1}^2 | F_n])`` at state ``W_n = W``.

    The second moment is evaluated from the closed expression in ``Y_n``,
    ``Yhat_n`` and the model-dependent sampling factor.
    """
    _reachable_check(spec, W, n)
    m, sigma, lam = spec.m, spec.sigma, spec.lam
    T = spec.T0 + sigma * n
    g_n = g(spec, n, Mode.EXACT)
    g_n1 = g_n * g_factor(spec, n + 1)
    e_n = centering_exact(spec, n)
    e_n1 = centering_exact(spec, n + 1)
    Y = g_n * (W - e_n)
    Yhat = (1 / g_n - 1 / g_n1) * Y + e_n - e_n1 + spec.a_m
    W_back = Y / g_n + e_n
    step = Fraction(sigma) * lam / m
    # E[k]: both schemes have mean m W / T.
    ev = g_n1 * (Yhat + step * m * W_back / T)
    if spec.without_replacement:
        factor = (Fraction(m - 1, T - 1) * (W_back - 1) + 1) if T > 1 else Fraction(1)
    else:
        factor = Fraction(m - 1, T) * W_back + 1
    second = g_n1**2 * (Yhat**2 + 2 * Yhat * W_back * sigma * lam / T)
    second += g_n1**2 * Fraction(sigma**2) * lam**2 / (m * T) * W_back * factor
    return ev, second


def binomial_fourth_central(m: int, p: float) -> float:
    """Fourth central moment of Bin(m, p)."""
    q = p * (1 - p)
    return m * q * (1 + 3 * (m - 2) * q)


@dataclass(frozen=True)
class LimitMoments:
    """Raw moments ``E[L^j]``, ``j = 1..4``, of a martingale limit, plus provenance."""

    moments: tuple[float, float, float, float]
    source: str = "supplied"

    @classmethod
    def from_samples(cls, samples) -> "LimitMoments":
        import numpy as np

        x = np.asarray(samples, dtype=float)
        return cls(tuple(float(np.mean(x**j)) for j in range(1, 5)), "monte-carlo")

    def expect_poly(self, coeffs: Sequence[float]) -> float:
        """``E[sum_j c_j L^j]`` for a polynomial of degree <= 4."""
        full = (1.0,) + tuple(self.moments)
        return sum(c * full[j] for j, c in enumerate(coeffs))


class EllKind(Enum):
    ONE = "One"
    LOG_N = "LogN"


@dataclass(frozen=True)
class LimitConstants:
    regime: Regime
    lam: Fraction
    Q: float
    zeta: Optional[Fraction] = None
    theta: Optional[float] = None
    gamma1: Optional[float] = None
    ell_n_kind: Optional[EllKind] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    tail_scale: Optional[float] = None
    s2_leading: Optional[float] = None
    m4_leading: Optional[float] = None
    estimated: tuple[str, ...] = ()
    swapped: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            if val is None:
                continue
            if isinstance(val, Fraction):
                out[key] = float(val)
                out[key + "_exact"] = str(val)
            elif isinstance(val, Enum):
                out[key] = val.value
            elif isinstance(val, tuple):
                out[key] = list(val)
            else:
                out[key] = val
        return out


def _limit_poly_ratio(T0: int, coeffs_in_p: Sequence[float]) -> list[float]:
    """Rewrite a polynomial in ``p = L / T0`` as one in ``L``."""
    return [c / T0**j for j, c in enumerate(coeffs_in_p)]


def generalized_limit_terms(m: int, T0: int, lm: LimitMoments) -> tuple[float, float]:
    """``(E[L (T0 - L)], E[r(m, L/T0)])`` for the Lambda = 1 limit ``L``."""
    e_var = lm.expect_poly([0.0, T0, -1.0])
    # r(m, p) = m p(1-p) + 3 m (m-2) p^2 (1-p)^2, expanded in powers of p.
    r_coeffs = [0.0, m, -m + 3 * m * (m - 2), -6 * m * (m - 2), 3 * m * (m - 2)]
    e_r = lm.expect_poly(_limit_poly_ratio(T0, r_coeffs))
    return e_var, e_r


def limit_constants(spec: UrnSpec, limit_moments: Optional[LimitMoments] = None) -> LimitConstants:
    """Regime constants of the limit theorems; fields illegal for the regime stay ``None``.

    ``beta`` is the triangular constant as stated in the source results;
    ``tail_scale`` is the constant that actually normalizes the triangular
    tail sum given the second-moment asymptotics (they differ; see README).
    """
    cls = classify(spec)
    if cls.deterministic:
        raise SpecError("index 0 is deterministic; no limit constants")
    spec, swapped = normalize(spec)
    m, sigma, lam = spec.m, spec.sigma, spec.lam
    lamf = float(lam)
    Q = gamma_ratio_Q(spec)
    a_m, b_0 = spec.a_m, spec.b(0)
    regime = cls.regime
    if regime is Regime.GENERALIZED_POLYA:
        T0 = spec.T0
        kw = dict(regime=regime, lam=lam, Q=Q, tail_scale=math.sqrt(m), swapped=swapped)
        if limit_moments is None:
            return LimitConstants(**kw, notes=("beta, s2_leading, m4_leading need limit moments",))
        e_var, e_r = generalized_limit_terms(m, T0, limit_moments)
        return LimitConstants(
            **kw,
            beta=math.sqrt(m * e_var),
            s2_leading=e_var / m,
            m4_leading=T0**4 / m**4 * e_r,
            estimated=("beta", "s2_leading", "m4_leading"),
            notes=(f"limit moments source: {limit_moments.source}",),
        )
    zeta = Fraction(a_m) / (1 - lam)
    theta = (spec.W0 - float(zeta) * float(spec.tau)) / Q
    if regime is Regime.TRIANGULAR:
        a = spec.a_m_minus_1
        return LimitConstants(
            regime=regime, lam=lam, Q=Q, zeta=zeta, theta=theta,
            beta=math.sqrt(spec.W0 / a),
            tail_scale=1.0 / math.sqrt(a * Q),
            s2_leading=a * Q * spec.W0,
            m4_leading=sigma**3 * Q**3 * lamf**4 * spec.W0 / m**3,
            swapped=swapped,
        )
    if regime is Regime.LARGE_INDEX:
        alpha = (1 - lamf) / (Q * lamf) * math.sqrt(m * (2 * lamf - 1) / (a_m * b_0))
        return LimitConstants(
            regime=regime, lam=lam, Q=Q, zeta=zeta, theta=theta, alpha=alpha,
            s2_leading=a_m * b_0 * Q**2 * lamf**2 / (m * (2 * lamf - 1) * (1 - lamf) ** 2),
            m4_leading=Q**4 * (sigma * lamf / m) ** 4 * binomial_fourth_central(m, float(zeta) / sigma),
        )
    if regime is Regime.CRITICAL_HALF:
        gamma1 = math.sqrt(a_m * b_0 / m)
        return LimitConstants(regime=regime, lam=lam, Q=Q, zeta=zeta, theta=theta,
                              gamma1=gamma1, ell_n_kind=EllKind.LOG_N)
    gamma1 = lamf / (1 - lamf) * math.sqrt(a_m * b_0 / (m * (1 - 2 * lamf)))
    return LimitConstants(regime=regime, lam=lam, Q=Q, zeta=zeta, theta=theta,
                          gamma1=abs(gamma1), ell_n_kind=EllKind.ONE)


def second_moment_leading(spec: UrnSpec, limit_moments: Optional[LimitMoments] = None) -> float:
    """Coefficient ``c`` in ``E[X_{n+1}^2] ~ c n^{-p}`` (p = 2Lambda, Lambda+1 or 2)."""
    lc = limit_constants(spec, limit_moments)
    spec, _ = normalize(spec)
    lamf = float(lc.lam)
    if lc.regime is Regime.LARGE_INDEX:
        return spec.a_m * spec.b(0) * lc.Q**2 * lamf**2 / (spec.m * (1 - lamf) ** 2)
    if lc.regime is Regime.TRIANGULAR:
        return spec.sigma * lc.Q * lamf**2 * spec.W0 / spec.m
    if lc.regime is Regime.GENERALIZED_POLYA:
        if lc.s2_leading is None:
            raise SpecError("Lambda = 1 needs limit moments")
        return lc.s2_leading
    raise SpecError(f"no second-moment expansion for {lc.regime.value}")


def moment_exponents(spec: UrnSpec) -> tuple[float, float]:
    """Decay exponents of ``E[X_{n+1}^2]`` and ``E[X_{n+1}^4]``."""
    regime = classify(spec).regime
    lamf = float(spec.lam)
    if regime is Regime.LARGE_INDEX:
        return 2 * lamf, 4 * lamf
    if regime is Regime.TRIANGULAR:
        return lamf + 1, 3 * lamf + 1
    if regime is Regime.GENERALIZED_POLYA:
        return 2.0, 4.0
    raise SpecError(f"no moment expansion for {regime.value}")


def s2_exponent(spec: UrnSpec) -> float:
    """Decay exponent ``p`` of ``s_n^2 ~ c n^{-p}``."""
    regime = classify(spec).regime
    lamf = float(spec.lam)
    if regime is Regime.LARGE_INDEX:
        return 2 * lamf - 1
    if regime is Regime.TRIANGULAR:
        return lamf
    if regime is Regime.GENERALIZED_POLYA:
        return 1.0
    raise SpecError(f"no tail-sum expansion for {regime.value}")


def asymptotic_s2(spec: UrnSpec, n: int, limit_hint: Optional[LimitMoments] = None) -> float:
    """Leading-order tail variance ``s_n^2 = sum_{i>=n} E[X_i^2]``."""
    lc = limit_constants(spec, limit_hint)
    if lc.s2_leading is None:
        raise SpecError("this regime needs limit_hint (limit moments) for s_n^2")
    return lc.s2_leading * n ** (-s2_exponent(spec))


def proxy_variance_fraction(spec: UrnSpec, n: int, N: int) -> float:
    """``(s_n^2 - s_N^2) / s_n^2`` at leading order.

    The fraction of the tail-sum variance seen when the limit is replaced by
    the value at horizon ``N``.
    """
    if N <= n:
        raise ValueError("proxy horizon must exceed n")
    return 1.0 - (N / n) ** (-s2_exponent(spec))


# --- transition masses s(k, n) for triangular urns -------------------------


def _falling(x, j: int):
    out = 1
    for i in range(j):
        out *= x - i
    return out


def _triangular_only(spec: UrnSpec) -> UrnSpec:
    spec, _ = normalize(spec)
    if spec.a_m != 0:
        raise SpecError("transition masses are defined for triangular urns (a_m = 0)")
    if spec.a_m_minus_1 <= 0:
        raise SpecError("transition masses need a_(m-1) > 0")
    return spec


def transition_n0(spec: UrnSpec) -> int:
    """First ``n`` from which every bracketed count in ``s(k, n)`` is nonnegative.

    Needs ``T_n - W0 - k a_{m-1} >= 0`` for all ``k <= m(n+1)``.
    """
    spec = _triangular_only(spec)
    a, m = spec.a_m_minus_1, spec.m
    slack = spec.sigma - m * a
    deficit = spec.W0 + m * a - spec.T0
    if deficit <= 0:
        return 0
    if slack <= 0:
        raise SpecError("bracketed terms never become nonnegative (needs B0 >= m a_(m-1))")
    return -(-deficit // slack)


def transition_mass_sum(spec: UrnSpec, k: int, n: int) -> Fraction:
    """``s(k, n)`` as the finite sum over the number ``i`` of white balls drawn."""
    spec = _triangular_only(spec)
    m, a, W0 = spec.m, spec.a_m_minus_1, spec.W0
    T = spec.T0 + spec.sigma * n
    total = Fraction(0)
    if spec.without_replacement:
        for i in range(min(k, m) + 1):
            w = W0 + (k - i) * a
            total += Fraction(math.comb(m, i) * _falling(T - w, m - i) * _falling(w, i))
        return total / _falling(T, m)
    for i in range(min(k, m) + 1):
        w = W0 + (k - i) * a
        total += math.comb(m, i) * w**i * (T - w) ** (m - i)
    return Fraction(total, T**m)


def transition_mass_closed(spec: UrnSpec, n: int) -> Fraction:
    """The ``k``-free value of ``s(k, n)`` valid for ``k >= m``."""
    spec = _triangular_only(spec)
    m, a = spec.m, spec.a_m_minus_1
    T = spec.T0 + spec.sigma * n
    if spec.without_replacement:
        # The falling-factorial argument shifts with l; plain (T)_l is off at O(T^-2).
        acc = sum(Fraction((-1) ** (m - l) * a ** (m - l) * _falling(T - m + l, l), math.factorial(l))
                  for l in range(m + 1))
        return math.factorial(m) * acc / _falling(T, m)
    acc = sum(Fraction((-1) ** (m - l) * a ** (m - l) * T**l, math.factorial(l))
              for l in range(m + 1))
    return math.factorial(m) * acc / T**m


def transition_mass(spec: UrnSpec, k: int, n: int) -> Fraction:
    """Mass ``s(k, n)`` flowing into lattice point ``W0 + k a_{m-1}`` at step ``n+1``.

    For ``k >= m`` the summed form is checked against the closed form.
    """
    spec = _triangular_only(spec)
    if not 0 <= k <= spec.m * (n + 1):
        raise SpecError(f"k={k} outside [0, m(n+1)]")
    n0 = transition_n0(spec)
    if n < n0:
        raise SpecError(f"n={n} below n0={n0}: bracketed terms may be negative")
    value = transition_mass_sum(spec, k, n)
    if k >= spec.m:
        closed = transition_mass_closed(spec, n)
        if closed != value:
            raise AssertionError(f"summed and closed forms disagree at k={k}, n={n}")
    return value


def transition_first_order(spec: UrnSpec) -> float:
    """Constant ``c`` in ``n (1 - s(m, n)) = Lambda - c / n + O(n^-2)``.

    Both closed forms give ``1 - s = m a/T - m(m-1) a^2/T^2 + O(T^-3)``.
    """
    spec = _triangular_only(spec)
    lam, tau, m = float(spec.lam), float(spec.tau), spec.m
    return lam * tau + (m - 1) * lam**2 / m
