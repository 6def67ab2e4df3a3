"""q-B-splines on the closed lattice and the divided-difference calculus.

The spline with knot configuration X at level N is the level-1 kernel row
``B(X) = Lambda^N_1(X, .)``, the unique probability measure with moments
``[m]_q! [N-1]_q! / [m+N-1]_q! h_m(X)``.  Pairing ``D_q^{N-1} f`` with it and
dividing by ``[N-1]_q!`` reproduces the recursive divided difference on
distinct knots and extends it continuously to knot configurations with a
multiple point at 0.

For polynomial grid functions the pairing is evaluated through the closed
moment formula, so the result is an exact rational even when the spline has
infinitely many atoms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

from .kernels import DiscreteMeasure, lambda_closed_N1
from .lattice import Config, ExtConfig, QParams, ray_points
from .qcalc import (
    GridFunction,
    QPolynomial,
    q_derivative,
    q_derivative_at_zero,
    q_factorial,
    vandermonde,
)
from .symfunc import h_m
from .qcalc import det as _det

ZERO_ATOM = ExtConfig(Config(), 1)


def qbspline(
    params: QParams, X: Union[Config, ExtConfig], min_abs: Fraction = Fraction(0)
) -> DiscreteMeasure:
    """The spline measure, atoms keyed by level-1 extended configurations.

    Atoms at lattice points come from the exact residue form; the possible
    atom at 0 (only when X itself has zeros) is the mass deficit.  For a
    zero-free X the deficit is pure truncation loss and is reported as
    ``tail_bound``.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    N = X.level
    if N < 1:
        raise ValueError("spline needs at least one knot")
    min_abs = Fraction(min_abs)
    if N == 1:
        if X.zero_mult:
            return DiscreteMeasure({ZERO_ATOM: Fraction(1)})
        return DiscreteMeasure({X: Fraction(1)})
    if len(X.nonzero) == 0:
        return DiscreteMeasure({ExtConfig(Config(), 1): Fraction(1)})
    values = X.nonzero.values(params)
    lo = min(min(values), Fraction(0)) if X.zero_mult else min(values)
    hi = max(max(values), Fraction(0)) if X.zero_mult else max(values)
    candidates = []
    if lo < 0:
        cutoff = max(min_abs, -hi) if hi < 0 else min_abs
        candidates += ray_points(params, -1, -lo, cutoff)
    if hi > 0:
        cutoff = max(min_abs, lo) if lo > 0 else min_abs
        candidates += ray_points(params, +1, hi, cutoff)
    atoms: dict[ExtConfig, Fraction] = {}
    for y in candidates:
        w = lambda_closed_N1(params, X, y)
        if w != 0:
            atoms[ExtConfig(Config((y,)))] = w
    deficit = 1 - sum(atoms.values(), Fraction(0))
    if deficit < 0:
        raise ArithmeticError("spline atoms exceed total mass 1")
    if X.zero_mult:
        return DiscreteMeasure({**atoms, ZERO_ATOM: deficit})
    return DiscreteMeasure(atoms, deficit)


def qbspline_moment(params: QParams, X: Union[Config, ExtConfig], m: int) -> Fraction:
    """Closed-form m-th moment [m]_q! [N-1]_q! / [m+N-1]_q! h_m(X), exact."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    if m < 0:
        raise ValueError("moment order must be nonnegative")
    q = params.q
    N = X.level
    return (
        q_factorial(m, q)
        * q_factorial(N - 1, q)
        / q_factorial(m + N - 1, q)
        * h_m(X, params, m)
    )


def measure_moment(params: QParams, measure: DiscreteMeasure, m: int):
    """<t^m, measure> from the atom table; the atom at 0 contributes 0^m."""
    out = Fraction(0)
    for cfg, w in measure.atoms.items():
        if cfg.zero_mult:
            out = out + (w if m == 0 else 0)
        else:
            out = out + w * cfg.nonzero.values(params)[0] ** m
    return out


def hermite_genocchi(
    params: QParams,
    f: GridFunction,
    X: Union[Config, ExtConfig],
    min_abs: Fraction = Fraction(2) ** -40,
    tol: float = 1e-9,
):
    """<D_q^{N-1} f, B(X)> / [N-1]_q!: the divided difference and its extension.

    Polynomial grid functions pair through the exact moment formula (rational
    output for any X); other functions pair against the enumerated atoms, the
    q-derivative at 0 evaluated as a lattice limit when the spline charges 0.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    q = params.q
    N = X.level
    norm = q_factorial(N - 1, q)
    if isinstance(f, QPolynomial):
        df = f.q_derivative(q, N - 1)
        out = Fraction(0)
        for m, c in enumerate(df.coeffs):
            if c != 0:
                out += c * qbspline_moment(params, X, m)
        return out / norm
    measure = qbspline(params, X, min_abs)
    total = None
    for cfg, w in measure.atoms.items():
        if cfg.zero_mult:
            if w == 0:
                continue
            dv = q_derivative_at_zero(f, N - 1, params, tol)
        else:
            t = cfg.nonzero.values(params)[0]
            dv = q_derivative(f, t, q, N - 1) if N > 1 else f(t)
        contrib = dv * w
        total = contrib if total is None else total + contrib
    if total is None:
        total = Fraction(0)
    return total / norm


def _prefix(X: ExtConfig, ell: int) -> ExtConfig:
    pts = X.sorted_points()[:ell]
    zeros = sum(1 for p in pts if p is None)
    return ExtConfig(Config(tuple(p for p in pts if p is not None)), zeros)


def vandermonde_ratio(
    params: QParams,
    fs: Sequence[GridFunction],
    X: Union[Config, ExtConfig],
    min_abs: Fraction = Fraction(2) ** -40,
    tol: float = 1e-9,
):
    """det[f_j(x_i)] / V(X), extended to configurations with zeros.

    On distinct (zero-free) coordinates this is the direct ratio.  With a
    multiple point at 0 it is evaluated as (-1)^{n(n-1)/2} times the
    determinant of nested divided differences f_j[x_1..x_ell], each computed
    by the spline pairing, which is the continuous extension of the ratio.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    n = X.level
    if len(fs) != n:
        raise ValueError("need as many functions as coordinates")
    if X.is_zero_free:
        values = X.nonzero.values(params)
        rows = [[fs[j](x) for j in range(n)] for x in values]
        return _det(rows) / vandermonde(values)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    rows = [
        [hermite_genocchi(params, fs[j], _prefix(X, ell), min_abs, tol) for j in range(n)]
        for ell in range(1, n + 1)
    ]
    return sign * _det(rows)
