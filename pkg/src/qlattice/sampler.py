"""Monte Carlo sampling of the down-chain and statistical verification.

Draws use a counter-based Philox stream so identical seeds give identical
trajectories, including across parallel per-chain substreams.  Selection is
inverse-CDF over atoms sorted by decreasing weight with exact rational
cumulative sums; when the drawn uniform lands beyond the enumerated mass of
a truncated table, the cutoff is deepened (never rejected) until it lands or
the deficit is below 2^-60.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.random import Generator, Philox

from .kernels import _link_measure_cached, config_sort_key, telescope
from .lattice import Config, ExtConfig, QParams, interlaces
from .symfunc import Partition, normalized_schur

DEEPEN_FLOOR = Fraction(1, 2**60)


@dataclass
class RngState:
    """Seed wrapper for counter-based deterministic streams."""

    seed: int

    def generator(self, stream: int = 0) -> Generator:
        bg = Philox(key=self.seed)
        if stream:
            bg = bg.jumped(stream)
        return Generator(bg)


def _uniform_fraction(gen: Generator) -> Fraction:
    v = int(gen.integers(0, 1 << 63, dtype=np.uint64))
    return Fraction(v, 1 << 63)


@lru_cache(maxsize=20000)
def _sorted_table(params: QParams, X: ExtConfig, min_abs: Fraction):
    lm = _link_measure_cached(params, X, min_abs)
    order = sorted(
        lm.atoms.items(), key=lambda kv: (-kv[1], config_sort_key(kv[0]))
    )
    cum = []
    acc = Fraction(0)
    for cfg, w in order:
        acc += w
        cum.append((acc, cfg))
    return tuple(cum), acc


def sample_link(
    params: QParams,
    X: Config,
    gen: Generator,
    min_abs: Fraction = Fraction(2) ** -30,
) -> Config:
    """One draw from the single-link measure of X."""
    xc = ExtConfig(X) if isinstance(X, Config) else X
    u = _uniform_fraction(gen)
    cutoff = Fraction(min_abs)
    for _ in range(40):
        cum, total = _sorted_table(params, xc, cutoff)
        if u < total:
            for acc, cfg in cum:
                if u < acc:
                    return cfg.nonzero
        if 1 - total < DEEPEN_FLOOR:
            return cum[-1][1].nonzero
        cutoff *= params.q**8
    raise ArithmeticError("sampling cutoff deepening did not terminate")


def sample_chain(
    params: QParams,
    X: Config,
    K: int,
    gen: Generator,
    min_abs: Fraction = Fraction(2) ** -30,
):
    """Iterated link draws down to level K; returns (Y, trajectory).

    The trajectory lists the configurations of every level from X down to Y;
    consecutive members must interlace (hard assertion, never statistical).
    """
    if not 1 <= K < len(X):
        raise ValueError("need 1 <= K < |X|")
    trajectory = [X]
    cur = X
    while len(cur) > K:
        nxt = sample_link(params, cur, gen, min_abs)
        if not interlaces(cur, nxt):
            raise AssertionError("sampled configuration does not interlace")
        trajectory.append(nxt)
        cur = nxt
    return cur, trajectory


def trajectory_lines(trajectory: Sequence[Config]) -> list[str]:
    """Line-delimited trajectory records: level<TAB>configuration code."""
    return [f"{len(cfg)}\t{cfg.code()}" for cfg in trajectory]


def empirical_moment_test(
    params: QParams,
    X: Config,
    K: int,
    nu: Partition,
    n_samples: int,
    seed: int,
    min_abs: Fraction = Fraction(2) ** -30,
) -> float:
    """z-score of the sampled normalized-Schur moment against its target."""
    gen = RngState(seed).generator()
    counts: Counter[Config] = Counter()
    for _ in range(n_samples):
        y, _traj = sample_chain(params, X, K, gen, min_abs)
        counts[y] += 1
    stat_values = {
        y: float(normalized_schur(nu, ExtConfig(y), params)) for y in counts
    }
    mean = sum(counts[y] * stat_values[y] for y in counts) / n_samples
    var = sum(counts[y] * (stat_values[y] - mean) ** 2 for y in counts) / n_samples
    target = float(normalized_schur(nu, ExtConfig(X), params))
    if var == 0:
        return 0.0 if abs(mean - target) < 1e-12 else math.inf
    se = math.sqrt(var / n_samples)
    return (mean - target) / se


def chi2_goodness_of_fit(
    params: QParams,
    X: Config,
    K: int,
    n_draws: int,
    seed: int,
    min_abs: Fraction = Fraction(2) ** -30,
    min_expected: float = 5.0,
) -> float:
    """Chi-square p-value of sampled frequencies against the exact atom table.

    Atoms with expected count below ``min_expected`` are pooled into one
    bucket together with the truncation deficit.
    """
    from scipy.stats import chisquare

    exact = telescope(params, X, K, min_abs)
    gen = RngState(seed).generator()
    counts: Counter[Config] = Counter()
    for _ in range(n_draws):
        y, _traj = sample_chain(params, X, K, gen, min_abs)
        counts[y] += 1
    f_obs, f_exp = [], []
    pooled_obs, pooled_exp = 0.0, 0.0
    seen = set()
    for cfg, w in exact.items_sorted():
        expected = float(w) * n_draws
        observed = counts.get(cfg.nonzero, 0)
        seen.add(cfg.nonzero)
        if expected < min_expected:
            pooled_obs += observed
            pooled_exp += expected
        else:
            f_obs.append(observed)
            f_exp.append(expected)
    for cfg, c in counts.items():
        if cfg not in seen:
            pooled_obs += c
    pooled_exp += float(exact.tail_bound) * n_draws
    deficit = n_draws - sum(f_exp) - pooled_exp
    pooled_exp += deficit  # exact tables sum to 1 up to the certified tail
    if pooled_exp > 0:
        f_obs.append(pooled_obs)
        f_exp.append(pooled_exp)
    _stat, p = chisquare(f_obs, f_exp)
    return float(p)
