"""Affine balanced two-color urn schemes with multiple drawings.

A scheme draws ``m`` balls per step (with or without replacement). If the
sample holds ``k`` white balls, ``a_{m-k}`` white and ``b_{m-k}`` black balls
are added. Balance means ``a_k + b_k = sigma``; affinity means the rows are
fixed by ``a_{m-1}``, ``a_m`` and ``sigma``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path


class SpecError(ValueError):
    """Invalid urn specification or a spec outside the supported classes."""


class SamplingScheme(Enum):
    WITHOUT_REPLACEMENT = "M"
    WITH_REPLACEMENT = "R"


class Regime(Enum):
    SMALL_INDEX = "SmallIndex"
    CRITICAL_HALF = "CriticalHalf"
    LARGE_INDEX = "LargeIndex"
    TRIANGULAR = "Triangular"
    GENERALIZED_POLYA = "GeneralizedPolya"


@dataclass(frozen=True)
class UrnSpec:
    m: int
    sigma: int
    a_m_minus_1: int
    a_m: int
    W0: int
    B0: int
    scheme: SamplingScheme = SamplingScheme.WITHOUT_REPLACEMENT

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", SamplingScheme(self.scheme))
        for name in ("m", "sigma", "a_m_minus_1", "a_m", "W0", "B0"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise SpecError(f"{name} must be an integer")
        if self.m < 1:
            raise SpecError("sample size m must be >= 1")
        if self.sigma < 1:
            raise SpecError("balance factor sigma must be >= 1")
        if self.W0 < 0 or self.B0 < 0:
            raise SpecError("initial ball counts must be nonnegative")
        if self.scheme is SamplingScheme.WITHOUT_REPLACEMENT and self.T0 < self.m:
            raise SpecError(f"model M needs T0 >= m (T0={self.T0}, m={self.m})")
        if self.T0 < 1:
            raise SpecError("urn must start nonempty")

    @property
    def T0(self) -> int:
        return self.W0 + self.B0

    @property
    def h(self) -> int:
        """Row step a_{m-1} - a_m."""
        return self.a_m_minus_1 - self.a_m

    @property
    def lam(self) -> Fraction:
        return Fraction(self.m * self.h, self.sigma)

    @property
    def tau(self) -> Fraction:
        return Fraction(self.T0, self.sigma)

    @property
    def without_replacement(self) -> bool:
        return self.scheme is SamplingScheme.WITHOUT_REPLACEMENT

    def a(self, k: int) -> int:
        return (self.m - k) * self.h + self.a_m

    def b(self, k: int) -> int:
        return self.sigma - self.a(k)

    def rows(self) -> list[tuple[int, int]]:
        return build_rows(self)

    def increment(self, whites_drawn: int) -> int:
        """White-ball change after a sample containing ``whites_drawn`` white balls."""
        return self.a(self.m - whites_drawn)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "sigma": self.sigma,
            "a_m_minus_1": self.a_m_minus_1,
            "a_m": self.a_m,
            "W0": self.W0,
            "B0": self.B0,
            "scheme": self.scheme.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UrnSpec":
        keys = {"m", "sigma", "a_m_minus_1", "a_m", "W0", "B0", "scheme"}
        missing = keys - set(data)
        if missing:
            raise SpecError(f"spec is missing fields: {sorted(missing)}")
        extra = set(data) - keys
        if extra:
            raise SpecError(f"unknown spec fields: {sorted(extra)}")
        if data["scheme"] not in ("M", "R"):
            raise SpecError("scheme must be 'M' or 'R'")
        return cls(**{k: data[k] for k in keys})

    @classmethod
    def from_json(cls, path: str | Path) -> "UrnSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class UrnClass:
    lam: Fraction
    regime: Regime
    deterministic: bool
    swapped: bool = False

    def to_dict(self) -> dict:
        return {
            "lambda": str(self.lam),
            "lambda_float": float(self.lam),
            "regime": self.regime.value,
            "deterministic": self.deterministic,
            "swapped": self.swapped,
        }


@dataclass(frozen=True)
class StepOutcome:
    k: int
    delta_white: int
    delta_black: int


@dataclass(frozen=True)
class Tenability:
    tenable: bool
    reason: str

    def __bool__(self):
        return self.tenable


def build_rows(spec: UrnSpec) -> list[tuple[int, int]]:
    """Replacement matrix rows ``(a_k, b_k)`` for ``k = 0..m``."""
    return [(spec.a(k), spec.b(k)) for k in range(spec.m + 1)]


def swap_colors(spec: UrnSpec) -> UrnSpec:
    """The same urn with black tracked as white.

    New rows are ``a'_k = b_{m-k}``, which is again affine with the same
    balance factor, so only the two free parameters need mapping.
    """
    return replace(
        spec,
        a_m_minus_1=spec.b(1),
        a_m=spec.b(0),
        W0=spec.B0,
        B0=spec.W0,
    )


def normalize(spec: UrnSpec) -> tuple[UrnSpec, bool]:
    """Swap colors of a triangular spec with ``b_0 = 0`` so that ``a_m = 0``."""
    if spec.a_m != 0 and spec.b(0) == 0:
        return swap_colors(spec), True
    return spec, False


def classify(spec: UrnSpec) -> UrnClass:
    lam = spec.lam
    if lam == 0:
        return UrnClass(lam, Regime.SMALL_INDEX, deterministic=True)
    a_m, b_0 = spec.a_m, spec.b(0)
    if a_m < 0 or b_0 < 0:
        raise SpecError(
            f"a_m={a_m}, b_0={b_0}: negative corner entries fall outside every regime"
        )
    if a_m == 0 or b_0 == 0:
        if lam < 0:
            raise SpecError("triangular schemes need a positive urn index")
        norm, swapped = normalize(spec)
        if lam == 1:
            if norm.W0 < 1 or norm.B0 < 1:
                raise SpecError("generalized Polya urns need W0 >= 1 and B0 >= 1")
            return UrnClass(lam, Regime.GENERALIZED_POLYA, False, swapped)
        if norm.W0 < 1:
            raise SpecError("triangular urns need W0 >= 1 (after color normalization)")
        return UrnClass(lam, Regime.TRIANGULAR, False, swapped)
    if lam < Fraction(1, 2):
        return UrnClass(lam, Regime.SMALL_INDEX, False)
    if lam == Fraction(1, 2):
        return UrnClass(lam, Regime.CRITICAL_HALF, False)
    return UrnClass(lam, Regime.LARGE_INDEX, False)


def _gcd_nonzero(values) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, v)
    if g == 0:
        raise SpecError("gcd of an all-zero column is undefined")
    return g


def _corner_ok_M(corner: int, start: int, m: int, g: int) -> bool:
    if corner >= -m:
        return True
    if corner < -m - g + 1:
        return False
    allowed = {r % g for r in range(-corner, m + g)}
    return start % g in allowed


def check_tenable(spec: UrnSpec) -> Tenability:
    """Decide whether the urn can be run forever almost surely."""
    if spec.lam == 0:
        raise SpecError("tenability criterion excludes deterministic schemes (index 0)")
    m = spec.m
    a = [spec.a(k) for k in range(m + 1)]
    b = [spec.b(k) for k in range(m + 1)]
    if not spec.without_replacement:
        for k in range(1, m + 1):
            if a[k] < 0:
                return Tenability(False, f"model R needs a_{k} >= 0, got {a[k]}")
        for k in range(m):
            if b[k] < 0:
                return Tenability(False, f"model R needs b_{k} >= 0, got {b[k]}")
        if a[0] < 0 and (spec.W0 % a[0] != 0 or spec.h % a[0] != 0):
            return Tenability(False, f"negative a_0={a[0]} must divide W0={spec.W0} and a_(m-1)-a_m={spec.h}")
        if b[m] < 0 and (spec.B0 % b[m] != 0 or spec.h % b[m] != 0):
            return Tenability(False, f"negative b_m={b[m]} must divide B0={spec.B0} and a_(m-1)-a_m={spec.h}")
        return Tenability(True, "all clauses of the model R criterion hold")

    for k in range(1, m + 1):
        if a[k] < -(m - k):
            return Tenability(False, f"model M needs a_{k} >= -{m - k}, got {a[k]}")
    for k in range(m):
        if b[k] < -k:
            return Tenability(False, f"model M needs b_{k} >= -{k}, got {b[k]}")
    if a[0] < -m:
        g_a = _gcd_nonzero(a)
        if not _corner_ok_M(a[0], spec.W0, m, g_a):
            return Tenability(False, f"a_0={a[0]} < -m fails the residue clause (g_a={g_a}, W0={spec.W0})")
    if b[m] < -m:
        g_b = _gcd_nonzero(b)
        if not _corner_ok_M(b[m], spec.B0, m, g_b):
            return Tenability(False, f"b_m={b[m]} < -m fails the residue clause (g_b={g_b}, B0={spec.B0})")
    return Tenability(True, "all clauses of the model M criterion hold")


def feasible_draws(spec: UrnSpec, W: int, B: int) -> range | list[int]:
    """White counts with positive probability from composition ``(W, B)``."""
    m = spec.m
    if spec.without_replacement:
        return range(max(0, m - B), min(m, W) + 1)
    lo = 0 if B > 0 else m
    hi = m if W > 0 else 0
    return range(lo, hi + 1)
