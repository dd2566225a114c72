"""Closed-form geometry of n-balls: volumes, areas, flux constants, mean chords."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

MAX_DIM = 16


class DomainError(ValueError):
    """Argument outside the domain of a geometric function."""


def check_dim(n: int, lo: int = 1) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if not lo <= n <= MAX_DIM:
        raise DomainError(f"dimension {n} outside [{lo}, {MAX_DIM}]")
    return n


@lru_cache(maxsize=None)
def _volume_table() -> tuple[float, ...]:
    vols = [1.0, 2.0]
    for n in range(2, MAX_DIM + 1):
        vols.append(2.0 * math.pi / n * vols[n - 2])
    return tuple(vols)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit n-ball, via ``V_n = 2*pi/n * V_{n-2}`` from ``V_0 = 1, V_1 = 2``."""
    return _volume_table()[check_dim(n, lo=0)]


def unit_sphere_area(n: int) -> float:
    """Boundary measure of the unit n-ball, ``n * V_n``."""
    n = check_dim(n)
    return n * unit_ball_volume(n)


def theoretical_k(n: int) -> float:
    """Flux constant ``K_n = V_{n-1} / A_n`` of the n-ball."""
    n = check_dim(n)
    return unit_ball_volume(n - 1) / unit_sphere_area(n)


@dataclass(frozen=True)
class ExactK:
    """``K_n`` as ``numerator/denominator * pi**pi_power`` with ``pi_power`` in {-1, 0}."""

    numerator: int
    denominator: int
    pi_power: int

    @property
    def value(self) -> float:
        return self.numerator / self.denominator * math.pi**self.pi_power

    def __str__(self) -> str:
        if self.pi_power == 0:
            if self.denominator == 1:
                return str(self.numerator)
            return f"{self.numerator}/{self.denominator}"
        if self.denominator == 1:
            return f"{self.numerator}/pi"
        return f"{self.numerator}/({self.denominator}pi)"


def _exact_volume(n: int) -> tuple[Fraction, int]:
    # V_n = coef * pi**power, exactly
    if n == 0:
        return Fraction(1), 0
    if n == 1:
        return Fraction(2), 0
    coef, power = _exact_volume(n - 2)
    return coef * Fraction(2, n), power + 1


def exact_k(n: int) -> ExactK:
    n = check_dim(n)
    c_lo, p_lo = _exact_volume(n - 1)
    c_hi, p_hi = _exact_volume(n)
    ratio = c_lo / (n * c_hi)
    return ExactK(ratio.numerator, ratio.denominator, p_lo - p_hi)


def _check_radius(r: float) -> float:
    r = float(r)
    if not (r > 0.0 and math.isfinite(r)):
        raise DomainError(f"radius must be positive and finite, got {r!r}")
    return r


def mean_chord(n: int, r: float = 1.0) -> float:
    """Mean chord length of the n-ball under the parallel-class measure.

    Equal to the ball volume over its normal section volume, ``V_n(r) / V_{n-1}(r)``.
    """
    n = check_dim(n)
    r = _check_radius(r)
    return unit_ball_volume(n) / unit_ball_volume(n - 1) * r


@dataclass(frozen=True)
class BallGeometry:
    dim: int
    radius: float = 1.0
    volume: float = field(init=False)
    surface_area: float = field(init=False)
    normal_section_volume: float = field(init=False)
    k_constant: float = field(init=False)
    alpha: float = field(init=False)
    mean_chord: float = field(init=False)

    def __post_init__(self) -> None:
        n = check_dim(self.dim)
        r = _check_radius(self.radius)
        vol = unit_ball_volume(n) * r**n
        area = n * vol / r
        section = unit_ball_volume(n - 1) * r ** (n - 1)
        k = section / area
        set_ = object.__setattr__
        set_(self, "dim", n)
        set_(self, "radius", r)
        set_(self, "volume", vol)
        set_(self, "surface_area", area)
        set_(self, "normal_section_volume", section)
        set_(self, "k_constant", k)
        set_(self, "alpha", 1.0 / k)
        set_(self, "mean_chord", vol / section)
