"""q-arithmetic primitives.

Two numeric tiers run through the whole package:

* exact arithmetic (`fractions.Fraction`, and :class:`QComplex` for complex
  rationals) whenever every factor is rational and the expression is finite;
* mpmath arbitrary-precision floats (default 64 decimal digits) for infinite
  products, sums and limits, always paired with an explicit truncation bound.

The q-derivative is ``D_q f(t) = (f(t) - f(tq)) / (t (1 - q))`` and the
q-integral pairs f with the canonical measure of weight ``(1-q)|t|`` per
lattice point.  Grid functions are plain callables on exact coordinate values
(0 included); they must be deterministic and re-entrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath
from mpmath import mp

from .lattice import QParams, ray_points

DEFAULT_DPS = 64

Scalar = Union[Fraction, int, "QComplex", mpmath.mpf, mpmath.mpc]
GridFunction = Callable[[Fraction], Scalar]


class NonConvergenceError(ArithmeticError):
    """A limit probe failed to stabilize within its tolerance."""


class DivergenceError(ArithmeticError):
    """An integrand appears unbounded near 0."""


class RepeatedKnotError(ValueError):
    """Divided differences require pairwise distinct knots."""


from functools import lru_cache


@lru_cache(maxsize=1 << 18)
def _frac_to_mpf(num: int, den: int, dps: int) -> mpmath.mpf:
    with mp.workdps(dps):
        return mp.mpf(num) / den


def to_mpf(x, dps: int | None = None) -> mpmath.mpf:
    """Exact Fraction/int to mpf at the working precision."""
    if isinstance(x, Fraction):
        return _frac_to_mpf(x.numerator, x.denominator, dps or mp.dps)
    if isinstance(x, int):
        return _frac_to_mpf(x, 1, dps or mp.dps)
    with mp.workdps(dps or mp.dps):
        return mp.mpf(x)


def to_mpc(x, dps: int | None = None) -> mpmath.mpc:
    if isinstance(x, QComplex):
        return mp.mpc(to_mpf(x.re, dps), to_mpf(x.im, dps))
    if isinstance(x, Fraction):
        return mp.mpc(to_mpf(x, dps))
    return mp.mpc(x)


@dataclass(frozen=True)
class QComplex:
    """A Gaussian rational re + im*i with exact field arithmetic."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, re, im=0) -> "QComplex":
        return cls(Fraction(re), Fraction(im))

    @classmethod
    def coerce(cls, x) -> "QComplex":
        if isinstance(x, QComplex):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to QComplex")

    def __add__(self, other):
        o = QComplex.coerce(other)
        return QComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-QComplex.coerce(other))

    def __rsub__(self, other):
        return QComplex.coerce(other) + (-self)

    def __mul__(self, other):
        o = QComplex.coerce(other)
        return QComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "QComplex":
        return QComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "QComplex":
        n = self.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero QComplex")
        return QComplex(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * QComplex.coerce(other).inverse()

    def __rtruediv__(self, other):
        return QComplex.coerce(other) * self.inverse()

    def __eq__(self, other):
        try:
            o = QComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def to_mpc(self, dps: int | None = None) -> mpmath.mpc:
        return to_mpc(self, dps)

    def abs_mpf(self, dps: int | None = None) -> mpmath.mpf:
        with mp.workdps(dps or mp.dps):
            return mp.sqrt(to_mpf(self.abs2()))

    def __repr__(self):
        return f"QComplex({self.re}, {self.im})"


def scalar_abs(x, dps: int | None = None) -> mpmath.mpf:
    """|x| as an mpf, exact inputs converted losslessly."""
    if isinstance(x, QComplex):
        return x.abs_mpf(dps)
    if isinstance(x, (Fraction, int)):
        return abs(to_mpf(x, dps))
    return abs(mpmath.mpmathify(x)) if not isinstance(x, (mpmath.mpf, mpmath.mpc)) else abs(x)


# ---------------------------------------------------------------------------
# q-Pochhammer symbols
# ---------------------------------------------------------------------------


def q_pochhammer(a, q: Fraction, n: int):
    """Finite (a; q)_n = prod_{i=0}^{n-1} (1 - a q^i), exact for exact inputs."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    result = 1
    aq = a
    for _ in range(n):
        result = result * (1 - aq)
        aq = aq * q
    return result


def q_pochhammer_inf(a, q: Fraction, tol: float = 1e-20, dps: int | None = None):
    """(a; q)_inf with a certified truncation bound.

    Returns ``(value, abs_error_bound)``.  After the partial product up to
    index T the log of the remaining factors is bounded by
    ``|a| q^T / ((1 - q)(1 - |a| q^T))``, summed as a geometric series; T is
    grown until that bound is below ``tol``.
    """
    dps = dps or mp.dps
    with mp.workdps(dps + 10):
        qf = to_mpf(q)
        a_is_complex = isinstance(a, (QComplex, mpmath.mpc, complex))
        am = scalar_abs(a)
        av = to_mpc(a) if a_is_complex else to_mpf(a) if isinstance(a, (Fraction, int)) else mpmath.mpmathify(a)
        # initial factors until |a| q^T < 1, then until the tail bound is small
        t = 0
        amq = am
        while amq >= 1:
            amq *= qf
            t += 1
        while amq / ((1 - qf) * (1 - amq)) > tol / 2:
            amq *= qf
            t += 1
        partial = mp.one * (1 + 0j) if a_is_complex else mp.one
        factor = av
        for _ in range(t):
            partial *= 1 - factor
            factor *= qf
        log_bound = amq / ((1 - qf) * (1 - amq))
        rel = mp.expm1(log_bound)
        err = abs(partial) * rel + mp.mpf(10) ** (-(dps + 5))
    with mp.workdps(dps):
        return (+partial, +err)


def q_number(n: int, q: Fraction) -> Fraction:
    """[n]_q = (1 - q^n)/(1 - q)."""
    return (1 - q**n) / (1 - q)


def q_factorial(m: int, q: Fraction) -> Fraction:
    """[m]_q! = [1]_q [2]_q ... [m]_q."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    out = Fraction(1)
    for i in range(1, m + 1):
        out *= q_number(i, q)
    return out


# ---------------------------------------------------------------------------
# q-derivative and q-integral
# ---------------------------------------------------------------------------


def q_derivative(f: GridFunction, t: Fraction, q: Fraction, order: int = 1):
    """Iterated difference quotient D_q^order f at a nonzero lattice value."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    t = Fraction(t)
    if t == 0:
        raise ValueError("use q_derivative_at_zero for the limit at 0")
    cache: dict[tuple[int, Fraction], Scalar] = {}

    def d(k: int, u: Fraction):
        key = (k, u)
        if key not in cache:
            if k == 0:
                cache[key] = f(u)
            else:
                cache[key] = (d(k - 1, u) - d(k - 1, u * q)) / (u * (1 - q))
        return cache[key]

    return d(order, t)


def q_derivative_at_zero(
    f: GridFunction,
    order: int,
    params: QParams,
    tol: float = 1e-9,
    max_steps: int = 200,
    start_exponent: int = 0,
):
    """lim_{t -> 0} D_q^order f(t) along t = zeta_plus q^n.

    Declared converged once three successive evaluations pairwise differ by
    less than tol; raises :class:`NonConvergenceError` otherwise.
    """
    vals = []
    for n in range(start_exponent, start_exponent + max_steps):
        t = params.zeta_plus * params.q**n
        v = f(t) if order == 0 else q_derivative(f, t, params.q, order)
        vals.append(v)
        if len(vals) >= 3:
            a, b, c = vals[-3], vals[-2], vals[-1]
            if (
                scalar_abs(a - b) < tol
                and scalar_abs(b - c) < tol
                and scalar_abs(a - c) < tol
            ):
                return c
    raise NonConvergenceError(
        f"D_q^{order} f did not stabilize to {tol} within {max_steps} lattice steps"
    )


def q_integral(
    f: GridFunction,
    a: Fraction,
    b: Fraction,
    params: QParams,
    tol: float = 1e-12,
):
    """Signed q-integral of f from a to b against the canonical measure.

    ``a`` and ``b`` are lattice values or 0.  Over a single-sign interval the
    sum is finite and exact for exact f.  When the interval reaches 0 the sum
    is truncated once the certified tail bound (sup of recent |f| times the
    remaining measure mass) drops below tol; a growing |f| near 0 raises
    :class:`DivergenceError`.
    """
    a, b = Fraction(a), Fraction(b)
    if a == b:
        return Fraction(0)
    if a > b:
        return -q_integral(f, b, a, params, tol)
    q = params.q
    weight = 1 - q

    def finite_part(sign, max_abs, min_abs, min_strict):
        pts = ray_points(params, sign, max_abs, min_abs, min_strict=min_strict)
        return sum(
            (f(p.value(params)) * weight * p.abs_value(params) for p in pts),
            Fraction(0),
        )

    # interval convention: [a,b) below 0, (a,b] above 0, closed through 0
    if a < 0 < b or a == 0 or b == 0:
        out = Fraction(0)
        if a < 0:
            out = out + _ray_sum_to_zero(f, params, -1, -a, tol)
        if b > 0:
            out = out + _ray_sum_to_zero(f, params, +1, b, tol)
        return out
    if a > 0:
        return finite_part(1, b, a, True)  # (a, b] on the positive ray
    return finite_part(-1, -a, -b, True)  # [a, b) on the negative ray


def _ray_sum_to_zero(f, params, sign, max_abs, tol):
    """Sum f(t)(1-q)|t| over ray points with |t| <= max_abs, truncated near 0.

    The certified tail uses sup |f| over the two most recent blocks; the
    remaining canonical mass below a cutoff c is at most c.
    """
    q = params.q
    weight = 1 - q
    total = Fraction(0)
    block = 8
    cutoff_hi = max_abs
    prev_sup = None
    for _ in range(60):
        cutoff_lo = cutoff_hi * q**block
        pts = ray_points(params, sign, cutoff_hi, cutoff_lo, min_strict=True)
        sup = mp.mpf(0)
        for p in pts:
            fv = f(p.value(params))
            total = total + fv * weight * p.abs_value(params)
            sup = max(sup, scalar_abs(fv))
        if prev_sup is not None and sup > 4 * prev_sup and sup > 0:
            raise DivergenceError("integrand appears to grow toward 0")
        bound_sup = max(sup, prev_sup if prev_sup is not None else mp.mpf(0))
        if bound_sup * to_mpf(cutoff_lo) < tol:
            return total
        prev_sup = sup
        cutoff_hi = cutoff_lo
    raise NonConvergenceError("q-integral truncation did not certify near 0")


def q_integral_lattice(f: GridFunction, params: QParams, support_points) -> Scalar:
    """Integral of f against the canonical measure over given lattice points."""
    w = 1 - params.q
    return sum(
        (f(p.value(params)) * w * p.abs_value(params) for p in support_points),
        Fraction(0),
    )


# ---------------------------------------------------------------------------
# Divided differences and Vandermonde products
# ---------------------------------------------------------------------------


def divided_difference(f: GridFunction, knots: Sequence[Fraction]):
    """Recursive divided difference f[x_1, ..., x_N], exact for exact f.

    Knots must be pairwise distinct; the continuous extension to repeated
    (zero) knots lives in the spline module.
    """
    xs = [Fraction(x) for x in knots]
    if len(set(xs)) != len(xs):
        raise RepeatedKnotError("divided difference requires distinct knots")
    if not xs:
        raise ValueError("at least one knot required")
    row = [f(x) for x in xs]
    n = len(xs)
    for level in range(1, n):
        row = [
            (row[i + 1] - row[i]) / (xs[i + level] - xs[i])
            for i in range(n - level)
        ]
    return row[0]


def vandermonde(values: Sequence[Fraction]) -> Fraction:
    """V(a_1, ..., a_M) = prod_{i<j} (a_i - a_j)."""
    vs = list(values)
    out = Fraction(1)
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            out *= vs[i] - vs[j]
    return out


def vandermonde_abs(values: Sequence[Fraction]) -> Fraction:
    """|V(A)| = prod_{i<j} (a_j - a_i) > 0 for increasing A."""
    vs = list(values)
    out = Fraction(1)
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            out *= vs[j] - vs[i]
    return out


def abs_prod(values: Sequence[Fraction]) -> Fraction:
    """|A| = prod |a_i|."""
    out = Fraction(1)
    for v in values:
        out *= abs(v)
    return out


def det(rows) -> Scalar:
    """Determinant over an exact field by Gaussian elimination.

    Works for Fraction and QComplex entries (and duck-typed numerics with
    exact ==0 tests).
    """
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    if any(len(r) != n for r in m):
        raise ValueError("determinant requires a square matrix")
    sign_flip = False
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not _is_zero(m[r][col]):
                pivot = r
                break
        if pivot is None:
            return m[0][0] * 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign_flip = not sign_flip
        for r in range(col + 1, n):
            if _is_zero(m[r][col]):
                continue
            factor = m[r][col] / m[col][col]
            for c in range(col, n):
                m[r][c] = m[r][c] - factor * m[col][c]
    out = m[0][0]
    for i in range(1, n):
        out = out * m[i][i]
    return -out if sign_flip else out


def _is_zero(x) -> bool:
    if isinstance(x, QComplex):
        return x.is_zero()
    return x == 0


# ---------------------------------------------------------------------------
# Polynomial grid functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QPolynomial:
    """A polynomial grid function with exact q-differentiation.

    Coefficients are ascending; ``q_derivative`` maps c_n t^n to
    [n]_q c_n t^{n-1}, so all pairings with spline measures stay rational.
    """

    coeffs: tuple[Fraction, ...] = (Fraction(0),)

    @classmethod
    def of(cls, *coeffs) -> "QPolynomial":
        return cls(tuple(Fraction(c) for c in coeffs))

    @classmethod
    def monomial(cls, n: int, c=1) -> "QPolynomial":
        return cls((Fraction(0),) * n + (Fraction(c),))

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def __call__(self, t: Fraction):
        t = Fraction(t)
        out = Fraction(0)
        for c in reversed(self.coeffs):
            out = out * t + c
        return out

    def q_derivative(self, q: Fraction, order: int = 1) -> "QPolynomial":
        coeffs = self.coeffs
        for _ in range(order):
            coeffs = tuple(
                q_number(n, q) * coeffs[n] for n in range(1, len(coeffs))
            ) or (Fraction(0),)
        return QPolynomial(coeffs)

    def __add__(self, other: "QPolynomial") -> "QPolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return QPolynomial(tuple(c + (b[i] if i < len(b) else 0) for i, c in enumerate(a)))

    def scale(self, c) -> "QPolynomial":
        c = Fraction(c)
        return QPolynomial(tuple(c * x for x in self.coeffs))
