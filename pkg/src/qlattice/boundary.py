"""Coherent families of level measures and their boundary parametrization.

A coherent family is a sequence of level-K probability measures intertwined
by the one-step links.  Every finite bounded configuration X generates an
extreme family: the level-K measure is the stabilized large-N limit of the
telescoped kernel started from X padded with zeros.

Materialization strategy per level K:

* K <= |X|: the limit kernel entries are evaluated directly by their residue
  closed form (all mass sits on zero-free configurations inside the smallest
  segment containing X and 0);
* K > |X| >= 1: interlacing forces K - |X| coordinates onto 0, so the level
  measure lives on the stratum with exactly that many zeros; it is computed
  by stabilizing the extended telescope (which sheds one zero per step) in
  the padding height;
* X empty: the family is the delta at the all-zero configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import mpmath
from mpmath import mp

from .kernels import (
    DiscreteMeasure,
    lambda_closed_NK,
    lambda_inf_residue_table,
    telescope,
)
from .lattice import Config, ExtConfig, QParams, segment_points
from .qcalc import NonConvergenceError, to_mpf
from .symfunc import Partition, normalized_schur_inf, normalized_schur_numeric


@dataclass
class CoherentFamily:
    """Finitely many materialized levels of a coherent family."""

    levels: dict[int, DiscreteMeasure]
    source: Optional[ExtConfig] = None

    def level(self, K: int) -> DiscreteMeasure:
        if K not in self.levels:
            raise KeyError(f"level {K} not materialized")
        return self.levels[K]


def extreme_family(
    params: QParams,
    X: Union[Config, ExtConfig],
    k_max: int,
    tol: float = 1e-9,
    min_abs: Fraction = Fraction(2) ** -30,
) -> CoherentFamily:
    """The extreme coherent family generated by a finite configuration X."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    if X.zero_mult:
        raise ValueError("boundary points are finite configurations without zeros")
    min_abs = Fraction(min_abs)
    t_size = len(X.nonzero)
    levels: dict[int, DiscreteMeasure] = {}
    for K in range(1, k_max + 1):
        if t_size == 0:
            levels[K] = DiscreteMeasure({ExtConfig(Config(), K): Fraction(1)})
        elif K <= t_size:
            levels[K] = _level_by_residue(params, X, K, tol, min_abs)
        else:
            levels[K] = _level_by_stratum_chain(params, X, K, tol, min_abs)
    return CoherentFamily(levels, X)


def _level_by_residue(
    params: QParams, X: ExtConfig, K: int, tol: float, min_abs: Fraction
) -> DiscreteMeasure:
    values = X.nonzero.values(params)
    lo = min(min(values), Fraction(0))
    hi = max(max(values), Fraction(0))
    pts = segment_points(params, lo, hi, min_abs)
    table = lambda_inf_residue_table(params, X, pts, K, tol * 1e-4)
    floor = mp.mpf(10) ** (-(mp.dps - 6))
    atoms: dict[ExtConfig, mpmath.mpf] = {
        ExtConfig(cfg): val for cfg, val in table.items() if abs(val) > floor
    }
    deficit = 1 - sum(atoms.values(), mp.mpf(0))
    return DiscreteMeasure(atoms, max(deficit, mp.mpf(0)))


def _level_by_stratum_chain(
    params: QParams, X: ExtConfig, K: int, tol: float, min_abs: Fraction
) -> DiscreteMeasure:
    """Stabilize telescope(X + 0^(N-T), K) in the padding height N."""
    t_size = len(X.nonzero)
    prev: Optional[DiscreteMeasure] = None
    stable = 0
    start = K + 1
    for N in range(start, start + 200):
        cur = telescope(params, ExtConfig(X.nonzero, N - t_size), K, min_abs)
        if prev is not None:
            diff = _sup_atom_diff(prev, cur)
            if diff < tol:
                stable += 1
                if stable >= 2:
                    return cur
            else:
                stable = 0
        prev = cur
    raise NonConvergenceError("stratum level did not stabilize in the padding height")


def _sup_atom_diff(a: DiscreteMeasure, b: DiscreteMeasure) -> mpmath.mpf:
    keys = set(a.atoms) | set(b.atoms)
    out = mp.mpf(0)
    for k in keys:
        out = max(out, abs(to_mpf(a.atom(k) - b.atom(k))))
    return out


def coherence_check(
    params: QParams,
    fam: CoherentFamily,
    K: int,
    min_abs: Fraction = Fraction(2) ** -30,
    n_test_atoms: int = 200,
    skip_mass: float = 1e-9,
) -> mpmath.mpf:
    """max_Y |(M_{K+1} Lambda^{K+1}_K)(Y) - M_K(Y)| over test atoms Y of M_K.

    Test atoms are the heaviest atoms of the lower level.  Upper atoms are
    consumed in decreasing weight until the remaining mass is below
    ``skip_mass``; the remainder is added to the residual, keeping it an
    upper bound for the discrepancy on the tested atoms.
    """
    from .qcalc import abs_prod, q_pochhammer, vandermonde_abs

    q = params.q
    upper = fam.level(K + 1)
    lower = fam.level(K)
    up_items = sorted(upper.atoms.items(), key=lambda kv: -to_mpf(kv[1]))
    total = sum((to_mpf(w) for _, w in up_items), mp.mpf(0))
    acc = mp.mpf(0)
    used = []
    for cfg, w in up_items:
        wv = to_mpf(w)
        vals = cfg.nonzero.values(params)
        m = cfg.zero_mult
        if m == 0:
            const = Fraction(q_pochhammer(q, q, K)) / vandermonde_abs(vals)
        else:
            const = (
                Fraction(q_pochhammer(q, q, K))
                / q_pochhammer(q, q, m - 1)
                / (abs_prod(vals) ** m * vandermonde_abs(vals))
            )
        used.append((_keys(cfg), m, wv * to_mpf(const)))
        acc += wv
        if total - acc < skip_mass:
            break
    skipped = total - acc
    targets = sorted(lower.atoms.items(), key=lambda kv: -to_mpf(kv[1]))[:n_test_atoms]
    residual = mp.mpf(0)
    for target, expected in targets:
        t_keys = _keys(target)
        t_vals = target.nonzero.values(params)
        t_zero = target.zero_mult
        t_factor: dict[int, mpmath.mpf] = {}
        composed = mp.mpf(0)
        for w_keys, m, c in used:
            if m == 0:
                if t_zero != 0 or not _interlaces_keys(w_keys, t_keys):
                    continue
                power = 1
            else:
                if t_zero != m - 1 or not _free_interlaces_keys(w_keys, t_keys):
                    continue
                power = m
            if power not in t_factor:
                t_factor[power] = to_mpf(abs_prod(t_vals) ** power * vandermonde_abs(t_vals))
            composed += c * t_factor[power]
        residual = max(residual, abs(composed - to_mpf(expected)))
    return residual + skipped


def _keys(cfg: ExtConfig):
    return tuple((p.sign, p.sort_key()) for p in cfg.nonzero)


def _iv_contains(a, b, y) -> bool:
    (sa, ka), (sb, kb), (sy, ky) = a, b, y
    if sa < 0 and sb < 0:
        return sy < 0 and ka <= ky < kb
    if sa > 0:
        return sy > 0 and ka < ky <= kb
    if sy < 0:
        return ka <= ky
    return ky <= kb


def _interlaces_keys(w, y) -> bool:
    if len(w) != len(y) + 1:
        return False
    return all(_iv_contains(w[i], w[i + 1], y[i]) for i in range(len(y)))


def _free_interlaces_keys(w, y) -> bool:
    if len(w) != len(y):
        return False
    wn = [k for k in w if k[0] < 0]
    wp = [k for k in w if k[0] > 0]
    yn = [k for k in y if k[0] < 0]
    yp = [k for k in y if k[0] > 0]
    if len(yn) != len(wn) or len(yp) != len(wp):
        return False
    for i in range(len(wn)):
        if i + 1 < len(wn):
            if not (wn[i][1] <= yn[i][1] < wn[i + 1][1]):
                return False
        elif not wn[i][1] <= yn[i][1]:
            return False
    for i in range(len(wp)):
        if i == 0:
            if not yp[0][1] <= wp[0][1]:
                return False
        elif not (wp[i - 1][1] < yp[i][1] <= wp[i][1]):
            return False
    return True


def boundary_moment_check(
    params: QParams,
    X: Union[Config, ExtConfig],
    K: int,
    nu: Partition,
    tol: float = 1e-9,
    fam: Optional[CoherentFamily] = None,
    min_abs: Fraction = Fraction(2) ** -30,
) -> mpmath.mpf:
    """Residual of sum_Y M_K(Y) wS_{nu|K}(Y) = wS_{nu|inf}(X)."""
    if isinstance(X, Config):
        X = ExtConfig(X)
    if nu.length > K:
        raise ValueError("partition length must not exceed K")
    if fam is None:
        fam = extreme_family(params, X, K, tol, min_abs)
    measure = fam.level(K)
    lhs = mp.mpf(0)
    for cfg, w in measure.atoms.items():
        lhs += to_mpf(w) * normalized_schur_numeric(nu, cfg, params)
    rhs = to_mpf(normalized_schur_inf(nu, X, params))
    return abs(lhs - rhs)


def regular_limit(
    params: QParams,
    configs: Callable[[int], ExtConfig],
    K: int,
    Y: Config,
    tol: float = 1e-9,
    epsilon: Optional[Fraction] = None,
    max_levels: int = 200,
):
    """Stabilized value of Lambda^N_K(X(N), Y) along a level-indexed sequence.

    Returns ``(value, trace)`` where trace lists (N, float value).  When
    epsilon is given, consecutive members must coincide outside
    (-epsilon, epsilon), the uniform-structure notion of convergence;
    otherwise ValueError.
    """
    start = K + 1
    prev_cfg: Optional[ExtConfig] = None
    prev = None
    stable = 0
    trace: list[tuple[int, float]] = []
    for N in range(start, start + max_levels):
        X_N = configs(N)
        if isinstance(X_N, Config):
            X_N = ExtConfig(X_N)
        if X_N.level != N:
            raise ValueError(f"configs({N}) must have level {N}, got {X_N.level}")
        if epsilon is not None and prev_cfg is not None:
            if _outside(params, prev_cfg, epsilon) != _outside(params, X_N, epsilon):
                raise ValueError(
                    "sequence members differ outside (-epsilon, epsilon); "
                    "not convergent in the uniform structure"
                )
        prev_cfg = X_N
        v = lambda_closed_NK(params, X_N, Y)
        trace.append((N, float(v)))
        if prev is not None:
            if abs(to_mpf(v - prev)) < tol:
                stable += 1
                if stable >= 2:
                    return to_mpf(v), trace
            else:
                stable = 0
        prev = v
    raise NonConvergenceError("regular sequence did not stabilize")


def _outside(params: QParams, X: ExtConfig, epsilon: Fraction) -> frozenset:
    return frozenset(
        p for p in X.nonzero if p.abs_value(params) >= epsilon
    )


def perturbed(fam: CoherentFamily, K: int, cfg: ExtConfig, eps) -> CoherentFamily:
    """A copy of the family with one atom bumped; coherence must detect it."""
    levels = dict(fam.levels)
    meas = levels[K]
    atoms = dict(meas.atoms)
    atoms[cfg] = atoms.get(cfg, Fraction(0)) + eps
    levels[K] = DiscreteMeasure(atoms, meas.tail_bound)
    return CoherentFamily(levels, fam.source)
