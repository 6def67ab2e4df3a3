"""The two-sided q-lattice: points, intervals, configurations, interlacing.

The lattice is ``{zeta_minus * q**n : n in Z} + {zeta_plus * q**n : n in Z}``
with ``0 < q < 1``, ``zeta_plus > 0``, ``zeta_minus < 0``.  Its points
accumulate only at 0, so any enumeration that crosses 0 needs an explicit
``min_abs`` cutoff.

Points are stored symbolically as ``(sign, exponent)``; ordering and equality
never go through floating point.  The comparison key is parameter-free: on the
positive ray the value decreases with the exponent, on the negative ray it
increases, and every negative point precedes every positive one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rational = Union[Fraction, int, str]


class InfiniteEnumerationError(ValueError):
    """An enumeration over a neighborhood of 0 was requested without a cutoff."""


def _frac(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class QParams:
    """The triple (q, zeta_plus, zeta_minus) defining the lattice."""

    q: Fraction
    zeta_plus: Fraction = Fraction(1)
    zeta_minus: Fraction = Fraction(-1)

    def __post_init__(self):
        object.__setattr__(self, "q", _frac(self.q))
        object.__setattr__(self, "zeta_plus", _frac(self.zeta_plus))
        object.__setattr__(self, "zeta_minus", _frac(self.zeta_minus))
        if not (0 < self.q < 1):
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.zeta_plus <= 0:
            raise ValueError(f"zeta_plus must be positive, got {self.zeta_plus}")
        if self.zeta_minus >= 0:
            raise ValueError(f"zeta_minus must be negative, got {self.zeta_minus}")

    def zeta(self, sign: int) -> Fraction:
        return self.zeta_plus if sign > 0 else self.zeta_minus

    def reflected(self) -> "QParams":
        """Parameters after the reflection about 0, (z+, z-) -> (-z-, -z+)."""
        return QParams(self.q, -self.zeta_minus, -self.zeta_plus)


DEFAULT_PARAMS = QParams(Fraction(1, 2), Fraction(1), Fraction(-1))


@dataclass(frozen=True, order=False)
class LatticePoint:
    """The lattice point zeta_sign * q**exponent."""

    sign: int
    exponent: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    def value(self, params: QParams) -> Fraction:
        return params.zeta(self.sign) * params.q ** self.exponent

    def abs_value(self, params: QParams) -> Fraction:
        return abs(self.value(params))

    def sort_key(self) -> tuple:
        # Increasing key == increasing value, for any valid QParams.
        return (self.sign, -self.sign * self.exponent)

    def reflected(self) -> "LatticePoint":
        return LatticePoint(-self.sign, self.exponent)

    def shift(self, k: int) -> "LatticePoint":
        """The point with value v * q**k (same ray)."""
        return LatticePoint(self.sign, self.exponent + k)

    def code(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}:{self.exponent}"

    @classmethod
    def parse(cls, text: str) -> "LatticePoint":
        text = text.strip()
        try:
            sign_txt, exp_txt = text.split(":")
            sign = {"+": 1, "-": -1}[sign_txt]
            return cls(sign, int(exp_txt))
        except (ValueError, KeyError) as exc:
            raise ValueError(f"bad point code {text!r}, expected '+:n' or '-:n'") from exc

    def __repr__(self):
        return f"LatticePoint({self.code()!r})"


def value(p: LatticePoint, params: QParams) -> Fraction:
    """Exact value zeta_sign * q**n of a lattice point."""
    return p.value(params)


def point_lt(a: LatticePoint, b: LatticePoint) -> bool:
    return a.sort_key() < b.sort_key()


def point_le(a: LatticePoint, b: LatticePoint) -> bool:
    return a.sort_key() <= b.sort_key()


def point_from_value(params: QParams, v: Fraction) -> LatticePoint:
    """Inverse of :func:`value`; raises if v is not on the lattice."""
    v = _frac(v)
    if v == 0:
        raise ValueError("0 is a limit point, not a lattice point")
    sign = 1 if v > 0 else -1
    ratio = v / params.zeta(sign)
    # ratio must equal q**n for some integer n
    n = 0
    while ratio < 1:
        ratio /= params.q
        n += 1
        if n > 100000:
            raise ValueError(f"{v} is not on the lattice")
    while ratio > 1:
        ratio *= params.q
        n -= 1
        if n < -100000:
            raise ValueError(f"{v} is not on the lattice")
    if ratio != 1:
        raise ValueError(f"{v} is not on the lattice")
    return LatticePoint(sign, n)


@dataclass(frozen=True)
class Config:
    """A finite configuration: strictly increasing lattice points (no zeros)."""

    points: tuple[LatticePoint, ...] = ()

    def __post_init__(self):
        for a, b in zip(self.points, self.points[1:]):
            if not point_lt(a, b):
                raise ValueError("configuration points must strictly increase")

    @classmethod
    def from_points(cls, points: Iterable[LatticePoint]) -> "Config":
        pts = tuple(sorted(points, key=LatticePoint.sort_key))
        return cls(pts)

    @classmethod
    def from_values(cls, params: QParams, values: Iterable[Rational]) -> "Config":
        return cls.from_points(point_from_value(params, _frac(v)) for v in values)

    def values(self, params: QParams) -> tuple[Fraction, ...]:
        return tuple(p.value(params) for p in self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def code(self) -> str:
        return ",".join(p.code() for p in self.points)

    def __repr__(self):
        return f"Config({self.code()!r})"


@dataclass(frozen=True)
class ExtConfig:
    """A configuration with a possible multiple point at 0.

    ``level = len(nonzero) + zero_mult``.  ``zero_mult == 0`` recovers a plain
    configuration; ``nonzero`` empty with ``zero_mult == N`` is the point 0^N.
    """

    nonzero: Config = Config()
    zero_mult: int = 0

    def __post_init__(self):
        if self.zero_mult < 0:
            raise ValueError("zero multiplicity must be nonnegative")

    @property
    def level(self) -> int:
        return len(self.nonzero) + self.zero_mult

    @property
    def is_zero_free(self) -> bool:
        return self.zero_mult == 0

    @classmethod
    def of(cls, config: Config, zero_mult: int = 0) -> "ExtConfig":
        return cls(config, zero_mult)

    @classmethod
    def from_config(cls, config: Config) -> "ExtConfig":
        return cls(config, 0)

    def values(self, params: QParams) -> tuple[Fraction, ...]:
        """All level-many coordinates, zeros in sorted position."""
        neg = [p.value(params) for p in self.nonzero if p.sign < 0]
        pos = [p.value(params) for p in self.nonzero if p.sign > 0]
        return tuple(neg + [Fraction(0)] * self.zero_mult + pos)

    def sorted_points(self) -> tuple:
        """Coordinates in increasing order; zeros appear as None."""
        neg = [p for p in self.nonzero if p.sign < 0]
        pos = [p for p in self.nonzero if p.sign > 0]
        return tuple(neg + [None] * self.zero_mult + pos)

    def code(self) -> str:
        parts = ["0" if p is None else p.code() for p in self.sorted_points()]
        return ",".join(parts)

    def key(self) -> str:
        return f"({self.code()})"

    @classmethod
    def parse(cls, text: str) -> "ExtConfig":
        text = text.strip().strip("()")
        zero_mult = 0
        pts = []
        if text:
            for tok in text.split(","):
                tok = tok.strip()
                if tok == "0":
                    zero_mult += 1
                else:
                    pts.append(LatticePoint.parse(tok))
        return cls(Config.from_points(pts), zero_mult)

    def __repr__(self):
        return f"ExtConfig({self.code()!r})"


def parse_config(text: str) -> Config:
    """Parse a comma-separated list of point codes into a configuration."""
    ext = ExtConfig.parse(text)
    if ext.zero_mult:
        raise ValueError("plain configurations cannot contain 0")
    return ext.nonzero


def interval_contains(a: LatticePoint, b: LatticePoint, y: LatticePoint) -> bool:
    """Membership y in I(a, b).

    The three cases are [a,b) for a<b<0, [a,b] for a<0<b, and (a,b] for
    0<a<b.  Intervals are only defined between lattice points, never with a 0
    endpoint.
    """
    if not point_lt(a, b):
        raise ValueError("interval requires a < b")
    ka, kb, ky = a.sort_key(), b.sort_key(), y.sort_key()
    if a.sign < 0 and b.sign < 0:
        return y.sign < 0 and ka <= ky < kb
    if a.sign > 0:
        return y.sign > 0 and ka < ky <= kb
    # a < 0 < b: closed on both sides
    if y.sign < 0:
        return ka <= ky
    return ky <= kb


def interlaces(upper: Config, lower: Config) -> bool:
    """True iff lower interlaces upper: y_i in I(x_i, x_{i+1}) for all i."""
    if len(upper) != len(lower) + 1:
        raise ValueError(
            f"interlacing needs sizes (N+1, N); got {len(upper)}, {len(lower)}"
        )
    return all(
        interval_contains(upper[i], upper[i + 1], lower[i]) for i in range(len(lower))
    )


def _exponent_least_leq(params: QParams, sign: int, bound: Fraction, strict: bool) -> int:
    """Least exponent n with |value(sign, n)| <= bound (or < if strict)."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    zeta_abs = abs(params.zeta(sign))
    n = 0
    v = zeta_abs

    def ok(v):
        return v < bound if strict else v <= bound

    while not ok(v):
        v *= params.q
        n += 1
    while True:
        prev = v / params.q
        if ok(prev):
            v = prev
            n -= 1
        else:
            break
    return n


def ray_points(
    params: QParams,
    sign: int,
    max_abs: Fraction,
    min_abs: Fraction,
    max_strict: bool = False,
    min_strict: bool = False,
) -> list[LatticePoint]:
    """Lattice points on one ray with min_abs <= |v| <= max_abs, sorted by value."""
    if min_abs <= 0:
        raise InfiniteEnumerationError(
            "enumeration toward 0 requires a positive min_abs cutoff"
        )
    if max_abs <= 0:
        return []
    n_lo = _exponent_least_leq(params, sign, max_abs, max_strict)
    # largest exponent with |v| >= min_abs (strict: >)
    n_hi = _exponent_least_leq(params, sign, min_abs, not min_strict) - 1
    if n_hi < n_lo:
        return []
    exps = range(n_lo, n_hi + 1)
    if sign > 0:
        return [LatticePoint(1, n) for n in reversed(exps)]
    return [LatticePoint(-1, n) for n in exps]


def enumerate_interval(
    params: QParams,
    a: LatticePoint,
    b: LatticePoint,
    min_abs: Rational = Fraction(0),
) -> list[LatticePoint]:
    """The points y in I(a, b) with |value(y)| >= min_abs, sorted by value.

    For single-sign intervals the result is the full (finite) interval; for a
    mixed-sign interval ``min_abs`` must be positive since I(a, b) is
    infinite.
    """
    min_abs = _frac(min_abs)
    if not point_lt(a, b):
        raise ValueError("interval requires a < b")
    va, vb = a.abs_value(params), b.abs_value(params)
    if a.sign < 0 and b.sign < 0:
        # [a, b): |v| <= |a|, |v| > |b|
        lo = max(min_abs, vb)
        return ray_points(params, -1, va, lo, min_strict=(min_abs <= vb))
    if a.sign > 0:
        # (a, b]: |v| <= b, |v| > a
        lo = max(min_abs, va)
        return ray_points(params, 1, vb, lo, min_strict=(min_abs <= va))
    # a < 0 < b, closed: [a, 0) and (0, b]
    if min_abs <= 0:
        raise InfiniteEnumerationError(
            f"I({a.code()}, {b.code()}) is infinite; pass min_abs > 0"
        )
    neg = ray_points(params, -1, va, min_abs)
    pos = ray_points(params, 1, vb, min_abs)
    return neg + pos


def interval_is_infinite(a: LatticePoint, b: LatticePoint) -> bool:
    return a.sign < 0 < b.sign


def segment_points(
    params: QParams,
    lo: Fraction,
    hi: Fraction,
    min_abs: Rational,
) -> list[LatticePoint]:
    """All lattice points v with lo <= v <= hi and |v| >= min_abs, sorted."""
    min_abs = _frac(min_abs)
    pts: list[LatticePoint] = []
    if lo < 0:
        if min_abs <= 0:
            raise InfiniteEnumerationError("segment through 0 needs min_abs > 0")
        pts += ray_points(params, -1, -lo, min_abs)
    if hi > 0:
        if min_abs <= 0:
            raise InfiniteEnumerationError("segment through 0 needs min_abs > 0")
        pts += ray_points(params, 1, hi, min_abs)
    return pts
