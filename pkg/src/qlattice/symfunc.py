"""Complete homogeneous and Schur symmetric functions.

The Jacobi-Trudi determinant ``S_nu = det[h_{nu_i - i + j}]`` is the canonical
evaluator: it only sees the h's, so repeated coordinates (in particular the
multiple point at 0 of an extended configuration) cost nothing.  The
bialternant ratio is provided as a test-only oracle for distinct coordinates.

Normalized variants divide by the principal specialization at the geometric
progression ``1, q, ..., q^{N-1}`` (finite level) or ``1, q, q^2, ...``
(infinite level, evaluated exactly by the hook-length product).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath import mp

from .lattice import ExtConfig, QParams
from .qcalc import det, q_pochhammer, to_mpf


@dataclass(frozen=True)
class Partition:
    """A weakly decreasing tuple of nonnegative integers, no trailing zeros."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        for a, b in zip(parts, parts[1:]):
            if a < b:
                raise ValueError(f"parts must weakly decrease, got {parts}")
        if parts and parts[-1] < 0:
            raise ValueError("parts must be nonnegative")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        return cls(tuple(parts))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip().strip("[]")
        if not text:
            return cls(())
        return cls(tuple(int(t) for t in text.split(",")))

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> "Partition":
        if not self.parts:
            return Partition(())
        cols = [0] * self.parts[0]
        for p in self.parts:
            for j in range(p):
                cols[j] += 1
        return Partition(tuple(cols))

    def code(self) -> str:
        return "[" + ",".join(str(p) for p in self.parts) + "]"

    def __repr__(self):
        return f"Partition({self.parts})"


def partitions_up_to(max_size: int, max_length: int | None = None):
    """All partitions with |nu| <= max_size (and optional length cap)."""
    out = [Partition(())]

    def gen(remaining, max_part, prefix):
        if remaining == 0:
            out.append(Partition(tuple(prefix)))
            return
        if max_length is not None and len(prefix) >= max_length:
            return
        for p in range(min(remaining, max_part), 0, -1):
            gen(remaining - p, p, prefix + [p])

    for total in range(1, max_size + 1):
        gen(total, total, [])
    return out


def h_complete(values: Sequence[Fraction], m: int) -> Fraction:
    """Complete homogeneous symmetric polynomial h_m of the given values."""
    if m < 0:
        return Fraction(0)
    dp = [Fraction(0)] * (m + 1)
    dp[0] = Fraction(1)
    for x in values:
        x = Fraction(x)
        if x == 0:
            continue
        for j in range(1, m + 1):
            dp[j] += x * dp[j - 1]
    return dp[m]


def h_m(X: ExtConfig, params: QParams, m: int) -> Fraction:
    """h_m at an extended configuration; zeros contribute nothing."""
    return h_complete(X.nonzero.values(params), m)


def h_principal(m: int, N: int, q: Fraction) -> Fraction:
    """h_m(1, q, ..., q^{N-1}) = (q^N; q)_m / (q; q)_m, exact."""
    if m < 0:
        return Fraction(0)
    return Fraction(q_pochhammer(q**N, q, m)) / q_pochhammer(q, q, m)


def geometric_progression(N: int, q: Fraction) -> list[Fraction]:
    return [q**i for i in range(N)]


def schur(nu: Partition, values: Sequence[Fraction]) -> Fraction:
    """Schur polynomial via Jacobi-Trudi; valid at repeated values and zeros."""
    ell = nu.length
    if ell == 0:
        return Fraction(1)
    top = nu.parts[0] + ell
    hs = [h_complete(values, k) for k in range(top + 1)]

    def h(k):
        return hs[k] if 0 <= k <= top else Fraction(0)

    rows = [
        [h(nu.parts[i] - (i + 1) + (j + 1)) for j in range(ell)] for i in range(ell)
    ]
    return det(rows)


def schur_bialternant(nu: Partition, values: Sequence[Fraction]) -> Fraction:
    """Bialternant ratio det[x_i^{nu_j + N - j}] / det[x_i^{N - j}].

    Test-only oracle; requires pairwise distinct values.
    """
    vs = [Fraction(v) for v in values]
    n = len(vs)
    if len(set(vs)) != n:
        raise ValueError("bialternant requires distinct values")
    exps = [nu.parts[j] if j < nu.length else 0 for j in range(n)]
    num = det([[vs[i] ** (exps[j] + n - 1 - j) for j in range(n)] for i in range(n)])
    den = det([[vs[i] ** (n - 1 - j) for j in range(n)] for i in range(n)])
    return num / den


@lru_cache(maxsize=50000)
def schur_principal(nu: Partition, N: int, q: Fraction) -> Fraction:
    """S_nu(1, q, ..., q^{N-1}), exact via the explicit progression."""
    if nu.length > N:
        raise ValueError(f"partition length {nu.length} exceeds level {N}")
    return schur(nu, geometric_progression(N, q))


def schur_principal_inf(nu: Partition, q: Fraction) -> Fraction:
    """S_nu(1, q, q^2, ...) = q^{n(nu)} / prod_cells (1 - q^{hook}), exact."""
    conj = nu.conjugate()
    n_nu = sum(i * p for i, p in enumerate(nu.parts))
    out = Fraction(q) ** n_nu
    for i, p in enumerate(nu.parts):
        for j in range(p):
            hook = (p - (j + 1)) + (conj.parts[j] - (i + 1)) + 1
            out /= 1 - q**hook
    return out


def schur_principal_inf_truncated(nu: Partition, q: Fraction, rel_tol: float = 1e-12):
    """S_nu at 1, q, ..., q^{M-1} for growing M; cross-check for the hook form."""
    prev = None
    for M in range(max(nu.length, 1), max(nu.length, 1) + 400):
        cur = schur_principal(nu, M, q)
        if prev is not None and prev != 0 and abs(float(cur - prev)) <= abs(float(prev)) * rel_tol:
            return cur
        prev = cur
    raise ArithmeticError("principal specialization did not stabilize")


def normalized_schur(nu: Partition, X: ExtConfig, params: QParams) -> Fraction:
    """S_nu(X) / S_nu(1, q, ..., q^{N-1}) with N the level of X."""
    N = X.level
    if nu.length > N:
        raise ValueError(f"partition length {nu.length} exceeds level {N}")
    return schur(nu, X.values(params)) / schur_principal(nu, N, params.q)


def normalized_schur_inf(nu: Partition, X: ExtConfig, params: QParams) -> Fraction:
    """S_nu(X) / S_nu(1, q, q^2, ...) for a finite configuration X.

    Vanishes when nu is longer than the number of nonzero points of X.
    """
    return schur(nu, X.nonzero.values(params)) / schur_principal_inf(nu, params.q)


def normalized_schur_numeric(nu: Partition, X: ExtConfig, params: QParams):
    """Floating evaluation of the normalized Schur polynomial at X.

    For summing against numerically materialized measures; the exact path is
    :func:`normalized_schur`.
    """
    values = [to_mpf(v) for v in X.nonzero.values(params)]
    ell = nu.length
    if ell > X.level:
        raise ValueError(f"partition length {ell} exceeds level {X.level}")
    if ell == 0:
        return mp.mpf(1)
    top = nu.parts[0] + ell
    hs = [mp.mpf(1)] + [mp.mpf(0)] * top
    for x in values:
        for j in range(1, top + 1):
            hs[j] += x * hs[j - 1]

    def h(k):
        return hs[k] if 0 <= k <= top else mp.mpf(0)

    if ell == 1:
        d = h(nu.parts[0])
    else:
        from .qcalc import det as _d

        rows = [[h(nu.parts[i] - (i + 1) + (j + 1)) for j in range(ell)] for i in range(ell)]
        d = _d(rows)
    return d / to_mpf(schur_principal(nu, X.level, params.q))
