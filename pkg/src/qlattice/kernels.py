"""Markov kernels on lattice configurations.

The one-step link from level N+1 to level N carries weight
``(q;q)_N |Y| |V(Y)| / |V(X)|`` on interlacing pairs; telescoping the links
gives the kernels between any two levels.  Closed forms for the telescoped
kernels are evaluated as finite residue sums (never by contour quadrature in
this module), so every finite-level entry is an exact rational.

Extended configurations with a multiple point at 0 are supported throughout:
the closed forms accept zeros among the upper coordinates directly, and the
one-step link from a configuration with m zeros sheds exactly one zero with
the merged-cluster weight

    (q;q)_N / (q;q)_{m-1} * |Y|^m |V(Y)| / (|X_nonzero|^m |V(X_nonzero)|),

where Y runs over the zero-free part (the limit of the lattice weights as the
m merged points collapse to 0; cross-validated against merging sequences in
the test suite).

Truncation near 0 is certified: a measure's ``tail_bound`` is an exact upper
bound for the enumeration mass dropped below ``min_abs``, derived from the
geometric decay of the ``|Y|`` factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

import mpmath
from mpmath import mp

from .lattice import (
    Config,
    ExtConfig,
    LatticePoint,
    QParams,
    enumerate_interval,
    interval_is_infinite,
    interlaces,
    ray_points,
)
from .qcalc import (
    NonConvergenceError,
    QComplex,
    abs_prod,
    det,
    q_pochhammer,
    q_pochhammer_inf,
    to_mpf,
    vandermonde,
    vandermonde_abs,
)
from .symfunc import Partition, normalized_schur

Weight = Union[Fraction, mpmath.mpf]


def config_sort_key(cfg: ExtConfig):
    return tuple(
        (0, 0) if p is None else p.sort_key() for p in cfg.sorted_points()
    )


@dataclass
class DiscreteMeasure:
    """A finitely supported nonnegative atom table with a certified tail.

    ``tail_bound`` dominates the mass lost to truncation; for a probability
    measure the enumerated total plus the true dropped mass is exactly 1, so
    ``1 - tail_bound <= total <= 1`` must hold.
    """

    atoms: dict[ExtConfig, Weight]
    tail_bound: Weight = Fraction(0)

    def total(self) -> Weight:
        return sum(self.atoms.values(), Fraction(0))

    def atom(self, cfg: ExtConfig, default=Fraction(0)) -> Weight:
        return self.atoms.get(cfg, default)

    def items_sorted(self):
        return sorted(self.atoms.items(), key=lambda kv: config_sort_key(kv[0]))

    def check_probability(self, slack: float = 1e-12) -> bool:
        t = self.total()
        return bool(
            to_mpf(t) <= 1 + slack and to_mpf(t) >= 1 - to_mpf(self.tail_bound) - slack
        )

    def map_weights(self, fn) -> "DiscreteMeasure":
        return DiscreteMeasure({k: fn(v) for k, v in self.atoms.items()}, self.tail_bound)


@dataclass(frozen=True)
class EvalPoints:
    """Pairwise distinct complex evaluation points off the real axis."""

    points: tuple[QComplex, ...]

    def __post_init__(self):
        for z in self.points:
            if z.im == 0:
                raise ValueError("evaluation points must be off the real axis")
        if len(set(self.points)) != len(self.points):
            raise ValueError("evaluation points must be pairwise distinct")

    @classmethod
    def of(cls, *zs) -> "EvalPoints":
        pts = []
        for z in zs:
            if isinstance(z, QComplex):
                pts.append(z)
            elif isinstance(z, complex):
                pts.append(QComplex(Fraction(z.real), Fraction(z.imag)))
            else:
                raise TypeError("EvalPoints wants QComplex or complex entries")
        return cls(tuple(pts))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def inverses(self) -> list[QComplex]:
        return [z.inverse() for z in self.points]


# ---------------------------------------------------------------------------
# One-step links
# ---------------------------------------------------------------------------


def link_weight(params: QParams, X: Config, Y: Config) -> Fraction:
    """Single-link entry (q;q)_N |Y| |V(Y)| / |V(X)| on interlacing pairs."""
    if len(X) != len(Y) + 1:
        raise ValueError("link requires |X| = |Y| + 1")
    if not interlaces(X, Y):
        return Fraction(0)
    q = params.q
    N = len(Y)
    xv, yv = X.values(params), Y.values(params)
    return (
        q_pochhammer(q, q, N)
        * abs_prod(yv)
        * vandermonde_abs(yv)
        / vandermonde_abs(xv)
    )


def link_entry(params: QParams, X: ExtConfig, Y: ExtConfig) -> Fraction:
    """Entry of the extended one-step link, zero off the admissible pattern."""
    if X.level != Y.level + 1:
        raise ValueError("link requires level(X) = level(Y) + 1")
    if X.zero_mult == 0:
        if Y.zero_mult != 0:
            return Fraction(0)
        return link_weight(params, X.nonzero, Y.nonzero)
    if Y.zero_mult != X.zero_mult - 1:
        return Fraction(0)
    if not _free_interlaces(params, X.nonzero, Y.nonzero):
        return Fraction(0)
    return _stratum_weight(params, X, Y.nonzero)


def _split_rays(cfg: Config):
    neg = [p for p in cfg if p.sign < 0]
    pos = [p for p in cfg if p.sign > 0]
    return neg, pos


def _free_interlaces(params: QParams, X0: Config, Y0: Config) -> bool:
    """Interlacing of the nonzero parts around a zero block.

    Negative coordinates interlace among the negative points of X0 with the
    last interval opening to 0 (exclusive); symmetrically on the positive
    side.  Both nonzero parts have equal size.
    """
    if len(Y0) != len(X0):
        return False
    xn, xp = _split_rays(X0)
    yn, yp = _split_rays(Y0)
    if len(yn) != len(xn) or len(yp) != len(xp):
        return False
    for i in range(len(xn)):
        y = yn[i]
        if i + 1 < len(xn):
            if not (xn[i].sort_key() <= y.sort_key() < xn[i + 1].sort_key()):
                return False
        else:
            if not xn[i].sort_key() <= y.sort_key():  # y in [x_a, 0)
                return False
    for i in range(len(xp)):
        y = yp[i]
        if i == 0:
            if not y.sort_key() <= xp[0].sort_key():  # y in (0, x'_1]
                return False
        else:
            if not (xp[i - 1].sort_key() < y.sort_key() <= xp[i].sort_key()):
                return False
    return True


def _stratum_weight(params: QParams, X: ExtConfig, Y0: Config) -> Fraction:
    q = params.q
    m = X.zero_mult
    N = X.level - 1
    x0 = X.nonzero.values(params)
    y0 = Y0.values(params)
    const = Fraction(q_pochhammer(q, q, N)) / q_pochhammer(q, q, m - 1)
    return (
        const
        * abs_prod(y0) ** m
        * vandermonde_abs(y0)
        / (abs_prod(x0) ** m * vandermonde_abs(x0))
    )


def _dropped_abs_power_sum(params: QParams, sign: int, upper: Fraction, eps: Fraction, power: int) -> Fraction:
    """Exact sum of |t|^power over ray points with |t| < eps and |t| <= upper."""
    if eps <= 0 or upper <= 0:
        return Fraction(0)
    v = abs(params.zeta(sign))
    while not (v < eps and v <= upper):
        v *= params.q
    return v**power / (1 - params.q**power)


def _enumeration_tail(
    params: QParams,
    const: Fraction,
    interval_lists: list[list[LatticePoint]],
    infinite_ends: list[tuple[int, int, Fraction]],
    eps: Fraction,
    power: int,
) -> Fraction:
    """Certified bound on the mass dropped below eps in the infinite slots.

    ``infinite_ends`` lists (slot index, sign, abs bound of that slot).  Each
    dropped coordinate t contributes const * |t|^power * prod_i |y_i|^power *
    |V(Y')| * prod_i |y_i - t|, and |y_i - t| <= |y_i| + eps.
    """
    if not infinite_ends or eps <= 0:
        return Fraction(0)
    tail = Fraction(0)
    for slot, sign, upper in infinite_ends:
        s_eps = _dropped_abs_power_sum(params, sign, upper, eps, power)
        if s_eps == 0:
            continue
        others = [lst for i, lst in enumerate(interval_lists) if i != slot]
        for combo in itertools.product(*others):
            vals = [p.value(params) for p in combo]
            term = (
                abs_prod(vals) ** power
                * vandermonde_abs(vals)
                * abs_prod([abs(v) + eps for v in vals])
            )
            tail += const * term * s_eps
    return tail


def _link_ordinary(params: QParams, X: Config, min_abs: Fraction) -> DiscreteMeasure:
    q = params.q
    N = len(X) - 1
    xv = X.values(params)
    const = Fraction(q_pochhammer(q, q, N)) / vandermonde_abs(xv)
    interval_lists = []
    infinite_ends = []
    for i in range(N):
        a, b = X[i], X[i + 1]
        if interval_is_infinite(a, b):
            pts = enumerate_interval(params, a, b, min_abs)
            infinite_ends.append((i, -1, a.abs_value(params)))
            infinite_ends.append((i, +1, b.abs_value(params)))
        else:
            pts = enumerate_interval(params, a, b)
        interval_lists.append(pts)
    atoms: dict[ExtConfig, Fraction] = {}
    for combo in itertools.product(*interval_lists):
        vals = [p.value(params) for p in combo]
        w = const * abs_prod(vals) * vandermonde_abs(vals)
        atoms[ExtConfig(Config(tuple(combo)))] = w
    tail = _enumeration_tail(params, const, interval_lists, infinite_ends, min_abs, 1)
    return DiscreteMeasure(atoms, tail)


def _link_stratum(params: QParams, X: ExtConfig, min_abs: Fraction) -> DiscreteMeasure:
    q = params.q
    m = X.zero_mult
    N = X.level - 1
    if len(X.nonzero) == 0:
        # all-zero configuration: deterministic step to 0^N
        return DiscreteMeasure({ExtConfig(Config(), N): Fraction(1)}, Fraction(0))
    x0 = X.nonzero.values(params)
    const = (
        Fraction(q_pochhammer(q, q, N))
        / q_pochhammer(q, q, m - 1)
        / (abs_prod(x0) ** m * vandermonde_abs(x0))
    )
    xn, xp = _split_rays(X.nonzero)
    interval_lists: list[list[LatticePoint]] = []
    infinite_ends = []
    for i in range(len(xn)):
        if i + 1 < len(xn):
            interval_lists.append(enumerate_interval(params, xn[i], xn[i + 1]))
        else:
            slot = len(interval_lists)
            interval_lists.append(
                ray_points(params, -1, xn[i].abs_value(params), min_abs)
            )
            infinite_ends.append((slot, -1, xn[i].abs_value(params)))
    for i in range(len(xp)):
        if i == 0:
            slot = len(interval_lists)
            interval_lists.append(
                ray_points(params, +1, xp[0].abs_value(params), min_abs)
            )
            infinite_ends.append((slot, +1, xp[0].abs_value(params)))
        else:
            interval_lists.append(enumerate_interval(params, xp[i - 1], xp[i]))
    atoms: dict[ExtConfig, Fraction] = {}
    for combo in itertools.product(*interval_lists):
        vals = [p.value(params) for p in combo]
        w = const * abs_prod(vals) ** m * vandermonde_abs(vals)
        atoms[ExtConfig(Config(tuple(combo)), m - 1)] = w
    tail = _enumeration_tail(params, const, interval_lists, infinite_ends, min_abs, m)
    return DiscreteMeasure(atoms, tail)


def link_measure(
    params: QParams, X: Union[Config, ExtConfig], min_abs: Fraction = Fraction(0)
) -> DiscreteMeasure:
    """The full one-step measure Lambda(X, .) truncated at |y| >= min_abs.

    For a configuration with points of both signs (or adjacent to a zero
    block) the edge set is infinite and min_abs must be positive; the dropped
    mass is certified by ``tail_bound``.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    if X.level < 2:
        raise ValueError("link needs level >= 2")
    min_abs = Fraction(min_abs)
    if X.zero_mult == 0:
        return _link_ordinary(params, X.nonzero, min_abs)
    return _link_stratum(params, X, min_abs)


@lru_cache(maxsize=100000)
def _link_measure_cached(params: QParams, X: ExtConfig, min_abs: Fraction) -> DiscreteMeasure:
    return link_measure(params, X, min_abs)


def telescope(
    params: QParams,
    X: Union[Config, ExtConfig],
    K: int,
    min_abs: Fraction = Fraction(0),
) -> DiscreteMeasure:
    """Iterated link composition down to level K; tail bounds add up."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    if not 1 <= K <= X.level:
        raise ValueError(f"need 1 <= K <= level, got K={K}, level={X.level}")
    min_abs = Fraction(min_abs)
    atoms: dict[ExtConfig, Fraction] = {X: Fraction(1)}
    tail = Fraction(0)
    for _level in range(X.level, K, -1):
        nxt: dict[ExtConfig, Fraction] = {}
        extra = Fraction(0)
        for cfg, w in atoms.items():
            lm = _link_measure_cached(params, cfg, min_abs)
            for y, wy in lm.atoms.items():
                nxt[y] = nxt.get(y, Fraction(0)) + w * wy
            extra += w * lm.tail_bound
        atoms = nxt
        tail += extra
    return DiscreteMeasure(atoms, tail)


# ---------------------------------------------------------------------------
# Closed forms (finite residue sums)
# ---------------------------------------------------------------------------


def _x_pool(params: QParams, X: ExtConfig):
    """Coordinate values of X with zeros, as an indexable list."""
    return list(X.values(params))


def _upper_set(xs: list[Fraction], yv: Fraction) -> list[int]:
    """Indices of the coordinates at or beyond y on y's side of 0."""
    if yv > 0:
        return [i for i, x in enumerate(xs) if x >= yv]
    return [i for i, x in enumerate(xs) if x <= yv]


def lambda_closed_N1(params: QParams, X: ExtConfig, y: LatticePoint) -> Fraction:
    """Level-1 kernel entry by its residue expansion, exact.

    Zeros of X enter only through the denominators prod (x - x'); the
    summation set {x in X : x on y's side, |x| >= |y|} never contains 0.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    q = params.q
    N = X.level
    yv = y.value(params)
    if N == 1:
        return Fraction(1) if X.is_zero_free and X.nonzero.points == (y,) else Fraction(0)
    xs = _x_pool(params, X)
    total = Fraction(0)
    for i in _upper_set(xs, yv):
        x = xs[i]
        num = Fraction(1)
        for k in range(1, N - 1):
            num *= x - yv * q**k
        den = Fraction(1)
        for j, xo in enumerate(xs):
            if j != i:
                den *= x - xo
        total += num / den
    sgn = 1 if yv > 0 else -1
    return sgn * (1 - q ** (N - 1)) * abs(yv) * total


def lambda_closed_NK(params: QParams, X: ExtConfig, Y: Config) -> Fraction:
    """Telescoped kernel entry by the K x K determinantal residue form, exact."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    K = len(Y)
    N = X.level
    if not 1 <= K < N:
        raise ValueError(f"need 1 <= K < N, got K={K}, N={N}")
    q = params.q
    xs = _x_pool(params, X)
    yv = Y.values(params)
    pref = Fraction(1)
    for i in range(1, K + 1):
        pref *= Fraction(q_pochhammer(q, q, N - i)) / (
            q_pochhammer(q, q, K - i) * q_pochhammer(q, q, N - K)
        )
    rows = [[Fraction(0)] * K for _ in range(K)]
    for j, y in enumerate(yv):
        scale = (1 if y > 0 else -1) * (1 - q ** (N - K)) * abs(y)
        for i_x in _upper_set(xs, y):
            x = xs[i_x]
            num = Fraction(1)
            for k in range(1, N - K):
                num *= x - y * q**k
            den = Fraction(1)
            for jx, xo in enumerate(xs):
                if jx != i_x:
                    den *= x - xo
            base = scale * num / den
            xpow = Fraction(1)
            for i in range(K):
                rows[i][j] += xpow * base
                xpow *= x
    return pref * vandermonde(yv) * det(rows)


def lambda_inf(
    params: QParams,
    X: ExtConfig,
    Y: Config,
    tol: float = 1e-9,
    max_levels: int = 400,
) -> mpmath.mpf:
    """Boundary kernel entry as the stabilized large-N limit of zero-padding.

    Iterates the exact finite-level closed form on X + 0^(N-|X|) until two
    consecutive increments drop below tol.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    if X.zero_mult:
        raise ValueError("X must be a finite configuration without zeros")
    K = len(Y)
    T = len(X.nonzero)
    start = max(K + 1, T + 1, 2)
    prev = None
    stable = 0
    for N in range(start, start + max_levels):
        v = lambda_closed_NK(params, ExtConfig(X.nonzero, N - T), Y)
        if prev is not None:
            if abs(to_mpf(v - prev)) < tol:
                stable += 1
                if stable >= 2:
                    return to_mpf(v)
            else:
                stable = 0
        prev = v
    raise NonConvergenceError(
        f"lambda_inf did not stabilize to {tol} within {max_levels} levels"
    )


def lambda_inf_residue(
    params: QParams,
    X: ExtConfig,
    Y: Config,
    tol: float = 1e-25,
    poch_cache: dict | None = None,
) -> mpmath.mpf:
    """Boundary kernel entry by the direct residue form of the N -> inf limit.

    The level-N numerator products converge to (y q / x; q)_inf, the zero
    padding turns into the power x^(|X| - K - 1), and the prefactor becomes
    prod_i 1/(q;q)_{K-i}; infinite products carry certified tails.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    if X.zero_mult:
        raise ValueError("X must be a finite configuration without zeros")
    q = params.q
    K = len(Y)
    T = len(X.nonzero)
    xs = X.nonzero.values(params)
    yv = Y.values(params)
    pref = Fraction(1)
    for i in range(1, K + 1):
        pref /= q_pochhammer(q, q, K - i)
    cache = poch_cache if poch_cache is not None else {}

    def poch_inf(arg: Fraction) -> mpmath.mpf:
        if arg not in cache:
            cache[arg] = q_pochhammer_inf(arg, q, tol)[0]
        return cache[arg]

    upper_sets = [_upper_set(xs, y) for y in yv]
    if any(not idx for idx in upper_sets):
        return mp.mpf(0)  # a zero column: the entry vanishes
    rows = [[mp.mpf(0)] * K for _ in range(K)]
    for j, y in enumerate(yv):
        for i_x in upper_sets[j]:
            x = xs[i_x]
            den = Fraction(1)
            for jx, xo in enumerate(xs):
                if jx != i_x:
                    den *= x - xo
            base_exact = y * x ** (T - K - 1) / den
            base = to_mpf(base_exact) * poch_inf(y * q / x)
            xm = to_mpf(x)
            acc = mp.mpf(1)
            for i in range(K):
                rows[i][j] += acc * base
                acc *= xm
    return to_mpf(pref * vandermonde(yv)) * _det_float(rows)


def lambda_inf_residue_table(
    params: QParams,
    X: ExtConfig,
    points: Sequence[LatticePoint],
    K: int,
    tol: float = 1e-25,
) -> dict[Config, mpmath.mpf]:
    """All boundary kernel entries on K-subsets of the given points.

    The determinant column for coordinate y depends on y alone, so columns
    are precomputed once per candidate point and every K-subset costs one
    small determinant.
    """
    import itertools

    if isinstance(X, Config):
        X = ExtConfig(X)
    if X.zero_mult:
        raise ValueError("X must be a finite configuration without zeros")
    q = params.q
    T = len(X.nonzero)
    xs = X.nonzero.values(params)
    pref = Fraction(1)
    for i in range(1, K + 1):
        pref /= q_pochhammer(q, q, K - i)
    pref_m = to_mpf(pref)
    dens = []
    for i_x, x in enumerate(xs):
        den = Fraction(1)
        for jx, xo in enumerate(xs):
            if jx != i_x:
                den *= x - xo
        dens.append(x ** (T - K - 1) / den)
    poch_cache: dict[Fraction, mpmath.mpf] = {}

    def poch_inf(arg: Fraction) -> mpmath.mpf:
        if arg not in poch_cache:
            poch_cache[arg] = q_pochhammer_inf(arg, q, tol)[0]
        return poch_cache[arg]

    columns: dict[LatticePoint, tuple] = {}
    values: dict[LatticePoint, Fraction] = {}
    for p in points:
        y = p.value(params)
        values[p] = y
        idx = _upper_set(xs, y)
        if not idx:
            continue
        col = [mp.mpf(0)] * K
        for i_x in idx:
            x = xs[i_x]
            base = to_mpf(y * dens[i_x]) * poch_inf(y * q / x)
            xm = to_mpf(x)
            acc = mp.mpf(1)
            for i in range(K):
                col[i] += acc * base
                acc *= xm
        columns[p] = tuple(col)
    out: dict[Config, mpmath.mpf] = {}
    usable = [p for p in points if p in columns]
    usable.sort(key=LatticePoint.sort_key)
    for combo in itertools.combinations(usable, K):
        cols = [columns[p] for p in combo]
        rows = [[cols[j][i] for j in range(K)] for i in range(K)]
        v = vandermonde([values[p] for p in combo])
        out[Config(tuple(combo))] = pref_m * to_mpf(v) * _det_float(rows)
    return out


def _det_float(rows) -> mpmath.mpf:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    m = [list(r) for r in rows]
    sign = 1
    out = mp.mpf(1)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if m[piv][col] == 0:
            return mp.mpf(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        out *= m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] / m[col][col]
            for c in range(col, n):
                m[r][c] -= factor * m[col][c]
    return sign * out


# ---------------------------------------------------------------------------
# Generating functions f_Z, f_{A|Z} and the identities they satisfy
# ---------------------------------------------------------------------------


def eval_f_Z(params: QParams, Z: EvalPoints, Y: Config, N: int) -> QComplex:
    """det[1 / (y_i z_j^{-1}; q)_{N-K+1}] / (V(Y) V(Z^{-1})), exact."""
    K = len(Z)
    if len(Y) != K:
        raise ValueError("Y and Z must have equal size")
    q = params.q
    yv = Y.values(params)
    zinv = Z.inverses()
    n_poch = N - K + 1
    rows = [
        [QComplex.coerce(1) / q_pochhammer(yv[i] * zinv[j], q, n_poch) for j in range(K)]
        for i in range(K)
    ]
    denom = QComplex.coerce(vandermonde(yv)) * _vandermonde_c(zinv)
    return det(rows) / denom


def eval_f_AZ(
    params: QParams, A: Config, Z: EvalPoints, Y: Config, N: int
) -> QComplex:
    """The partial-delta variant: vanishes unless A is contained in Y.

    With A of size m and Z of size n = K - m, it reduces to eval_f_Z at m = 0
    and to the indicator of Y = A at m = K.
    """
    K = len(A) + len(Z)
    if len(Y) != K:
        raise ValueError("Y must have size |A| + |Z|")
    a_set = set(A.points)
    y_set = set(Y.points)
    if not a_set <= y_set:
        return QComplex()
    rest = Config.from_points(y_set - a_set)
    q = params.q
    n = len(Z)
    n_poch = N - K + 1
    yv = rest.values(params)
    av = A.values(params)
    zinv = Z.inverses()
    rows = [
        [QComplex.coerce(1) / q_pochhammer(yv[i] * zinv[j], q, n_poch) for j in range(n)]
        for i in range(n)
    ]
    denom = QComplex.coerce(vandermonde(yv)) * _vandermonde_c(zinv)
    for ys in yv:
        for ar in av:
            denom = denom * (ys - ar)
    return det(rows) / denom


def _vandermonde_c(values: Sequence[QComplex]) -> QComplex:
    out = QComplex.coerce(1)
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            out = out * (values[i] - values[j])
    return out


def product_identity_rhs(params: QParams, X: ExtConfig, Z: EvalPoints) -> QComplex:
    """Closed product side of the generating-function identity for f_Z."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    q = params.q
    N = X.level
    K = len(Z)
    pref = Fraction(1)
    for i in range(1, K + 1):
        pref *= Fraction(q_pochhammer(q, q, N - i)) / (
            q_pochhammer(q, q, N - K) * q_pochhammer(q, q, K - i)
        )
    out = QComplex.coerce(pref)
    zinv = Z.inverses()
    for x in X.nonzero.values(params):
        for zi in zinv:
            out = out / (1 - zi * x)
    return out


def apply_function(measure: DiscreteMeasure, fn: Callable[[ExtConfig], QComplex]):
    vals = [QComplex.coerce(0)]
    for cfg, w in measure.atoms.items():
        vals.append(fn(cfg) * w)
    return sum(vals[1:], vals[0])


def verify_product_identity(
    params: QParams, X: Union[Config, ExtConfig], Z: EvalPoints, min_abs=Fraction(0)
) -> mpmath.mpf:
    """|Lambda f_Z (X) - closed product|; exactly 0 on finite edge sets."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    K = len(Z)
    N = X.level
    meas = telescope(params, X, K, Fraction(min_abs))
    lhs = apply_function(meas, lambda cfg: eval_f_Z(params, Z, _zero_free(cfg), N))
    diff = lhs - product_identity_rhs(params, X, Z)
    return diff.abs_mpf()


def _zero_free(cfg: ExtConfig) -> Config:
    if not cfg.is_zero_free:
        raise ValueError("generating functions f_Z are defined on zero-free configurations")
    return cfg.nonzero


def partial_delta_identity_rhs(
    params: QParams, X: ExtConfig, A: Config, Z: EvalPoints
) -> QComplex:
    """Closed form of Lambda f_{A|Z}(X) for |A| <= 1, by the residue sum.

    The |A| = 0 case is the plain product identity; for A = {a} the single
    contour integral collapses onto the poles at x in X on a's side.
    """
    if isinstance(X, Config):
        X = ExtConfig(X)
    m = len(A)
    if m > 1:
        raise NotImplementedError("closed form implemented for |A| <= 1 only")
    if m == 0:
        return product_identity_rhs(params, X, Z)
    q = params.q
    N = X.level
    K = m + len(Z)
    av = A.values(params)[0]
    xs = _x_pool(params, X)
    pref = Fraction(1)
    for i in range(1, K + 1):
        pref *= Fraction(q_pochhammer(q, q, N - i)) / (
            q_pochhammer(q, q, N - K) * q_pochhammer(q, q, K - i)
        )
    zinv = Z.inverses()
    out = QComplex.coerce(pref)
    for x in xs:
        if x == 0:
            continue
        for zi in zinv:
            out = out / (1 - zi * x)
    residue_sum = QComplex.coerce(0)
    for i_x in _upper_set(xs, av):
        x = xs[i_x]
        term = QComplex.coerce(Fraction(1, 1) / x)
        for zi in zinv:
            term = term * (zi - QComplex.coerce(Fraction(1) / x))
        term = term * q_pochhammer(Fraction(av, 1) * q / x, q, N - K - 1)
        for jx, xo in enumerate(xs):
            if jx != i_x:
                term = term * QComplex.coerce(Fraction(1) / (1 - xo / x))
        residue_sum = residue_sum + term
    return out * ((1 - q ** (N - K)) * av) * residue_sum


def verify_partial_delta_identity(
    params: QParams,
    X: Union[Config, ExtConfig],
    A: Config,
    Z: EvalPoints,
    min_abs=Fraction(0),
) -> mpmath.mpf:
    """|Lambda f_{A|Z}(X) - closed form| for |A| <= 1."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    K = len(A) + len(Z)
    N = X.level
    meas = telescope(params, X, K, Fraction(min_abs))
    lhs = apply_function(meas, lambda cfg: eval_f_AZ(params, A, Z, _zero_free(cfg), N))
    diff = lhs - partial_delta_identity_rhs(params, X, A, Z)
    return diff.abs_mpf()


def moment_check(
    params: QParams,
    X: Union[Config, ExtConfig],
    K: int,
    nu: Partition,
    min_abs=Fraction(0),
) -> Fraction:
    """Residual of the normalized-Schur moment identity, exact rational."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    if nu.length > K:
        raise ValueError("partition length must not exceed K")
    meas = telescope(params, X, K, Fraction(min_abs))
    lhs = Fraction(0)
    for cfg, w in meas.atoms.items():
        lhs += w * normalized_schur(nu, cfg, params)
    rhs = normalized_schur(nu, X, params)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Residue orthogonality and the extreme-atom bound
# ---------------------------------------------------------------------------


def residue_orthogonality(
    params: QParams, u: LatticePoint, y: LatticePoint, N: int
) -> Fraction:
    """Exact residue evaluation of the inversion pairing: 1 if u == y else 0.

    Evaluates the contour integral of (y z^{-1} q; q)_{N-2} / (u z^{-1}; q)_N
    z^{-2} over the separating line through [yq, y] by summing the enclosed
    residues on y's side, times the (1 - q^{N-1}) |y| prefactor.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    q = params.q
    uv = u.value(params)
    yv = y.value(params)
    poles = [uv * q**i for i in range(N)]
    if yv > 0:
        enclosed = [w for w in poles if w >= yv]
        orient = 1
    else:
        enclosed = [w for w in poles if w <= yv]
        orient = -1
    total = Fraction(0)
    for w in enclosed:
        num = Fraction(1)
        for k in range(1, N - 1):
            num *= w - yv * q**k
        den = Fraction(1)
        for w2 in poles:
            if w2 != w:
                den *= w - w2
        total += num / den
    return orient * (1 - q ** (N - 1)) * abs(yv) * total


def extreme_atom_lower_constant(params: QParams, tol: float = 1e-25):
    """Certified (lower, upper) enclosure of (1-q)(q;q)_inf / prod(1+q^i)."""
    q = params.q
    pq, pq_err = q_pochhammer_inf(q, q, tol)
    pn, pn_err = q_pochhammer_inf(-q, q, tol)  # prod_{j>=1} (1 + q^j)
    one_minus_q = to_mpf(1 - q)
    denom_lo = 2 * (pn - pn_err)
    denom_hi = 2 * (pn + pn_err)
    lower = one_minus_q * (pq - pq_err) / denom_hi
    upper = one_minus_q * (pq + pq_err) / denom_lo
    return lower, upper


def extreme_point(params: QParams, X: ExtConfig) -> LatticePoint:
    """The coordinate of maximal absolute value (either end on a tie)."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    pts = list(X.nonzero)
    if not pts:
        raise ValueError("configuration has no nonzero points")
    return max(pts, key=lambda p: p.abs_value(params))


def extreme_atom_weight(params: QParams, X: ExtConfig) -> Fraction:
    """Lambda^N_1 (X, x0) at the extreme point, exact."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    return lambda_closed_N1(params, X, extreme_point(params, X))
