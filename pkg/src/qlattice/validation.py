"""The cross-check suite behind the `validate` subcommand.

Each criterion exercises one family of identities at desk scale: exact
rational equalities wherever the edge sets are finite, certified-tolerance
comparisons on truncated mixed-sign enumerations, quadrature against residue
oracles, and seeded statistical checks for the sampler.  All randomness is
seeded, so a run is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from mpmath import mp

from .boundary import boundary_moment_check, coherence_check, extreme_family
from .kernels import (
    DiscreteMeasure,
    EvalPoints,
    eval_f_AZ,
    eval_f_Z,
    apply_function,
    extreme_atom_weight,
    lambda_closed_NK,
    extreme_atom_lower_constant,
    link_measure,
    residue_orthogonality,
    telescope,
    verify_product_identity,
)
from .lattice import Config, ExtConfig, LatticePoint, QParams, DEFAULT_PARAMS
from .qcalc import QComplex, QPolynomial, divided_difference, q_pochhammer_inf, to_mpf
from .sampler import chi2_goodness_of_fit, empirical_moment_test
from .splines import hermite_genocchi, measure_moment, qbspline, qbspline_moment
from .symfunc import Partition, normalized_schur, partitions_up_to
from .transforms import default_contour, inv_qlaplace, qlaplace, round_trip_atom

MIN_ABS = Fraction(2) ** -30


@dataclass
class CriterionResult:
    cid: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  criterion {self.cid:>2}  {self.name}: {self.detail}"


def random_config(
    rng: np.random.Generator,
    n_points: int,
    lo_exp: int,
    hi_exp: int,
    sign: Optional[int] = None,
    mixed: bool = False,
) -> Config:
    """A random configuration with exponents inside [lo_exp, hi_exp]."""
    pool = []
    signs = [sign] if sign else [1, -1]
    for s in signs:
        pool += [LatticePoint(s, e) for e in range(lo_exp, hi_exp + 1)]
    for _ in range(400):
        idx = rng.choice(len(pool), size=n_points, replace=False)
        pts = [pool[i] for i in idx]
        if mixed and len({p.sign for p in pts}) < 2:
            continue
        return Config.from_points(pts)
    raise RuntimeError("could not draw a configuration")


def _scaled(full: int, quick: int, level: str) -> int:
    return full if level == "full" else quick


# -- criterion 1 -------------------------------------------------------------


def criterion_1(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(101)
    n_single = _scaled(500, 60, level)
    n_mixed = _scaled(200, 30, level)
    worst_tail = Fraction(0)
    for i in range(n_single):
        sign = 1 if i % 2 == 0 else -1
        X = random_config(rng, int(rng.integers(2, 8)), 0, 9, sign=sign)
        lm = link_measure(params(), X)
        if lm.total() != 1 or lm.tail_bound != 0:
            return CriterionResult("1", "stochasticity", False, f"single-sign {X.code()}")
    for _ in range(n_mixed):
        X = random_config(rng, int(rng.integers(2, 7)), -2, 2, mixed=True)
        lm = link_measure(params(), X, MIN_ABS)
        worst_tail = max(worst_tail, Fraction(lm.tail_bound))
        if lm.total() > 1 or lm.total() + lm.tail_bound < 1:
            return CriterionResult("1", "stochasticity", False, f"mixed {X.code()}")
        if lm.tail_bound > Fraction(1, 10**8):
            return CriterionResult(
                "1", "stochasticity", False, f"tail {float(lm.tail_bound):.2e} on {X.code()}"
            )
    return CriterionResult(
        "1",
        "stochasticity",
        True,
        f"{n_single} single-sign exact, {n_mixed} mixed-sign, max tail {float(worst_tail):.2e}",
    )


# -- criterion 2 -------------------------------------------------------------


def criterion_2(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(102)
    reps = _scaled(2, 1, level)
    for N in range(2, 7):
        for K in range(1, N):
            for _ in range(reps):
                X = random_config(rng, N, 0, N + 2, sign=1)
                meas = telescope(params(), X, K)
                for cfg, w in meas.atoms.items():
                    if lambda_closed_NK(params(), ExtConfig(X), cfg.nonzero) != w:
                        return CriterionResult(
                            "2", "closed form vs telescope", False, f"N={N} K={K} {cfg.key()}"
                        )
    worst = 0.0
    for N, K in [(3, 1), (3, 2), (4, 2), (4, 3), (5, 2)]:
        X = random_config(rng, N, -2, 2, mixed=True)
        meas = telescope(params(), X, K, MIN_ABS)
        for cfg, w in meas.atoms.items():
            diff = lambda_closed_NK(params(), ExtConfig(X), cfg.nonzero) - w
            if diff < 0 or diff > Fraction(1, 10**8):
                return CriterionResult(
                    "2", "closed form vs telescope", False, f"mixed N={N} K={K}: {float(diff):.2e}"
                )
            worst = max(worst, float(diff))
    return CriterionResult(
        "2", "closed form vs telescope", True, f"exact all-positive; mixed max diff {worst:.2e}"
    )


# -- criterion 3 -------------------------------------------------------------


def criterion_3(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(103)
    reps = _scaled(2, 1, level)
    nus = partitions_up_to(4)
    for N in range(2, 6):
        for K in range(1, N):
            admissible = [nu for nu in nus if nu.length <= K]
            for _ in range(reps):
                X = random_config(rng, N, 0, N + 2, sign=1)
                meas = telescope(params(), X, K)
                for nu in admissible:
                    lhs = Fraction(0)
                    for cfg, w in meas.atoms.items():
                        lhs += w * normalized_schur(nu, cfg, params())
                    if lhs != normalized_schur(nu, ExtConfig(X), params()):
                        return CriterionResult(
                            "3", "moment identities", False, f"N={N} K={K} nu={nu.code()}"
                        )
    worst = 0.0
    for N, K in [(3, 1), (4, 2)]:
        X = random_config(rng, N, -1, 2, mixed=True)
        meas = telescope(params(), X, K, MIN_ABS)
        for nu in [nu for nu in nus if nu.length <= K]:
            lhs = Fraction(0)
            for cfg, w in meas.atoms.items():
                lhs += w * normalized_schur(nu, cfg, params())
            res = abs(float(lhs - normalized_schur(nu, ExtConfig(X), params())))
            worst = max(worst, res)
            if res >= 1e-7:
                return CriterionResult(
                    "3", "moment identities", False, f"mixed N={N} K={K} nu={nu.code()}: {res:.2e}"
                )
    return CriterionResult(
        "3", "moment identities", True, f"exact all-positive; mixed max residual {worst:.2e}"
    )


# -- criterion 4 -------------------------------------------------------------


def criterion_4(level: str = "full") -> CriterionResult:
    window = [LatticePoint(s, e) for s in (1, -1) for e in range(0, 10)]
    ns = range(2, 7) if level == "full" else (2, 4)
    for N in ns:
        for u in window:
            for y in window:
                got = residue_orthogonality(params(), u, y, N)
                want = Fraction(1) if u == y else Fraction(0)
                if got != want:
                    return CriterionResult(
                        "4", "residue orthogonality", False, f"N={N} u={u.code()} y={y.code()}"
                    )
    pairs = [("+:0", "+:0"), ("+:1", "+:0"), ("+:0", "+:1"), ("-:0", "-:0"), ("-:1", "-:0")]
    if level == "quick":
        pairs = pairs[:2]
    worst = 0.0
    with mp.workdps(40):
        for uc, yc in pairs:
            u, y = LatticePoint.parse(uc), LatticePoint.parse(yc)
            N = 3
            phi = lambda z, uu=u: 1 / _poch_mpc(uu.value(params()) / z, params().q, N)
            val, _err = inv_qlaplace(params(), phi, y, N, tol=1e-8)
            want = 1.0 if u == y else 0.0
            diff = abs(val - want)
            worst = max(worst, float(diff))
            if diff > 1e-6:
                return CriterionResult(
                    "4", "residue orthogonality", False, f"quadrature {uc},{yc}: {float(diff):.2e}"
                )
    return CriterionResult(
        "4", "residue orthogonality", True, f"exact on window; quadrature max err {worst:.2e}"
    )


def _poch_mpc(a, q, n):
    out = mp.mpc(1)
    aq = a
    for _ in range(n):
        out *= 1 - aq
        aq *= to_mpf(q)
    return out


# -- criterion 5 -------------------------------------------------------------


_Z_POOL = (
    QComplex.of(0, 2),
    QComplex.of(1, 1),
    QComplex.of(Fraction(-1, 2), Fraction(3, 2)),
)


def criterion_5(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(105)
    reps = _scaled(2, 1, level)
    for K in (1, 2, 3):
        Z = EvalPoints(_Z_POOL[:K])
        for N in range(K + 1, 7):
            for _ in range(reps):
                X = random_config(rng, N, 0, N + 2, sign=1)
                if verify_product_identity(params(), X, Z) != 0:
                    return CriterionResult(
                        "5", "generating function identities", False, f"N={N} K={K} {X.code()}"
                    )
    worst = 0.0
    for N, K in [(3, 1), (4, 2)]:
        Z = EvalPoints(_Z_POOL[:K])
        X = random_config(rng, N, -1, 2, mixed=True)
        res = float(verify_product_identity(params(), X, Z, MIN_ABS))
        worst = max(worst, res)
        if res >= 1e-7:
            return CriterionResult(
                "5", "generating function identities", False, f"mixed N={N} K={K}: {res:.2e}"
            )
    return CriterionResult(
        "5",
        "generating function identities",
        True,
        f"exact all-positive K<=3, N<=6; mixed max residual {worst:.2e}",
    )


# -- criterion 6 -------------------------------------------------------------


def criterion_6(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(106)
    # closed moments vs measure moments
    for N in range(2, 7):
        X = random_config(rng, N, 0, N + 2, sign=1)
        meas = qbspline(params(), X)
        for m in range(9):
            if qbspline_moment(params(), X, m) != measure_moment(params(), meas, m):
                return CriterionResult("6", "q-B-spline", False, f"moment m={m} {X.code()}")
    Xm = random_config(rng, 3, -1, 2, mixed=True)
    measm = qbspline(params(), Xm, MIN_ABS)
    for m in range(9):
        diff = abs(qbspline_moment(params(), Xm, m) - measure_moment(params(), measm, m))
        if diff > Fraction(1, 10**8):
            return CriterionResult("6", "q-B-spline", False, f"mixed moment m={m}: {float(diff):.2e}")
    # Hermite-Genocchi vs recursive divided differences, exact
    reps = _scaled(3, 1, level)
    for N in range(2, 7):
        for _ in range(reps):
            X = random_config(rng, N, -2, N + 2, mixed=(N >= 3))
            coeffs = tuple(Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(9))
            f = QPolynomial(coeffs)
            hg = hermite_genocchi(params(), f, X)
            dd = divided_difference(f, X.values(params()))
            if hg != dd:
                return CriterionResult("6", "q-B-spline", False, f"HG != DD at N={N}")
    # the all-knots-to-0 limit
    f = QPolynomial.of(0, 1, Fraction(3, 2), 0, 2)  # t + 3/2 t^2 + 2 t^4
    for N in (2, 3, 4):
        target = float(f.coeffs[N - 1]) if N - 1 < len(f.coeffs) else 0.0
        j = 30
        knots = [Fraction(1, 2) ** (j + i) for i in range(N)]
        dd = float(divided_difference(f, knots))
        if target != 0 and abs(dd - target) / abs(target) > 1e-6:
            return CriterionResult("6", "q-B-spline", False, f"merging limit N={N}: {dd} vs {target}")
    return CriterionResult(
        "6", "q-B-spline", True, "moments m<=8 and Hermite-Genocchi exact; merging limit ok"
    )


# -- criterion 7 -------------------------------------------------------------


def criterion_7(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(107)
    n_trials = _scaled(1000, 100, level)
    with mp.workdps(40):
        _lo, hi = extreme_atom_lower_constant(params())
    worst = None
    for i in range(n_trials):
        n_pts = int(rng.integers(2, 9))
        mixed = i % 3 == 0
        X = random_config(rng, n_pts, -2, 6, mixed=mixed) if mixed else random_config(
            rng, n_pts, -2, 6, sign=1 if i % 2 else -1
        )
        w = extreme_atom_weight(params(), ExtConfig(X))
        if to_mpf(w) < hi:
            return CriterionResult(
                "7", "extreme-atom lower bound", False, f"{X.code()}: {float(w):.4f} < {float(hi):.4f}"
            )
        worst = min(worst, float(w)) if worst is not None else float(w)
    return CriterionResult(
        "7",
        "extreme-atom lower bound",
        True,
        f"{n_trials} configurations, min weight {worst:.4f} >= {float(hi):.6f}",
    )


# -- criterion 8 -------------------------------------------------------------


def criterion_8(level: str = "full") -> CriterionResult:
    rng = np.random.default_rng(108)
    q = params().q
    with mp.workdps(40):
        # Euler-identity level: atoms of the singleton family
        fam1 = extreme_family(params(), ExtConfig(parse("+:0")), 1, tol=1e-11, min_abs=MIN_ABS)
        m1 = fam1.level(1)
        total = to_mpf(m1.total())
        if abs(total - 1) > 1e-8:
            return CriterionResult("8", "boundary families", False, f"singleton mass {total}")
        for n in range(0, 12):
            atom = to_mpf(m1.atom(ExtConfig(parse(f"+:{n}"))))
            want = to_mpf(q**n) * q_pochhammer_inf(q ** (n + 1), q, 1e-30)[0]
            if abs(atom - want) > 1e-9:
                return CriterionResult("8", "boundary families", False, f"Euler atom n={n}")
        n_fams = _scaled(20, 4, level)
        worst_c = 0.0
        worst_m = 0.0
        nus = [nu for nu in partitions_up_to(3)]
        for i in range(n_fams):
            size = int(rng.integers(3, 5))
            X = random_config(rng, size, 0, 6, sign=1 if i % 2 else -1)
            # truncation cutoff relative to the configuration's own scale
            scale = max(abs(v) for v in X.values(params()))
            min_abs = MIN_ABS * scale
            fam = extreme_family(params(), ExtConfig(X), 3, tol=1e-10, min_abs=min_abs)
            for K in (1, 2):
                res = float(coherence_check(params(), fam, K, min_abs))
                worst_c = max(worst_c, res)
                if res >= 1e-7:
                    return CriterionResult(
                        "8", "boundary families", False, f"coherence {X.code()} K={K}: {res:.2e}"
                    )
            for K in (1, 2, 3):
                for nu in nus:
                    if nu.length > K:
                        continue
                    res = float(
                        boundary_moment_check(params(), ExtConfig(X), K, nu, fam=fam, min_abs=min_abs)
                    )
                    worst_m = max(worst_m, res)
                    if res >= 1e-7:
                        return CriterionResult(
                            "8",
                            "boundary families",
                            False,
                            f"moment {X.code()} K={K} nu={nu.code()}: {res:.2e}",
                        )
    return CriterionResult(
        "8",
        "boundary families",
        True,
        f"Euler atoms ok; {n_fams} families: coherence<= {worst_c:.2e}, moments<= {worst_m:.2e}",
    )


# -- criterion 9 -------------------------------------------------------------


def criterion_9(level: str = "full") -> CriterionResult:
    specs = [
        [("+:0", Fraction(1))],
        [("+:2", Fraction(1, 3)), ("-:1", Fraction(2, 3))],
        [("+:0", Fraction(1, 4)), ("+:3", Fraction(1, 4)), ("-:0", Fraction(1, 4)), ("-:4", Fraction(1, 4))],
    ]
    if level == "quick":
        specs = specs[:2]
    worst = 0.0
    with mp.workdps(40):
        for spec in specs:
            M = DiscreteMeasure(
                {ExtConfig(parse(c)): w for c, w in spec}
            )
            for N in (3, None):
                for c, w in spec:
                    y = LatticePoint.parse(c)
                    val, _e = round_trip_atom(params(), M, y, N, tol=1e-8)
                    diff = abs(val - to_mpf(w))
                    worst = max(worst, float(diff))
                    if diff > 1e-6:
                        return CriterionResult(
                            "9", "q-Laplace round trip", False, f"N={N} atom {c}: {float(diff):.2e}"
                        )
        # contour independence on one case
        M = DiscreteMeasure({ExtConfig(parse("+:1")): Fraction(1)})
        y = LatticePoint.parse("+:1")
        base, _ = round_trip_atom(params(), M, y, 3, tol=1e-8)
        cont = default_contour(params(), y)
        for a_shift, r_scale in [(Fraction(2, 10), 1), (Fraction(-2, 10), 1), (0, 2)]:
            c2 = default_contour(params(), y)
            c2.abscissa = cont.abscissa * (1 + to_mpf(a_shift) / 4)
            c2.half_height = cont.half_height * r_scale
            phi = lambda z: qlaplace(params(), M, z, 3, 1e-10)
            val, _e = inv_qlaplace(params(), phi, y, 3, contour=c2, tol=1e-8)
            diff = abs(val - base)
            worst = max(worst, float(diff))
            if diff > 2e-6:
                return CriterionResult(
                    "9", "q-Laplace round trip", False, f"contour variation: {float(diff):.2e}"
                )
    return CriterionResult("9", "q-Laplace round trip", True, f"max deviation {worst:.2e}")


# -- criterion 10 ------------------------------------------------------------


def criterion_10(level: str = "full") -> CriterionResult:
    n_chi = _scaled(30000, 4000, level)
    n_mom = _scaled(100000, 10000, level)
    p1 = chi2_goodness_of_fit(params(), parse("+:3,+:2,+:0"), 1, n_chi, 1001)
    p2 = chi2_goodness_of_fit(params(), parse("-:0,+:1,+:0"), 2, n_chi, 1002, MIN_ABS)
    if min(p1, p2) <= 0.001:
        return CriterionResult("10", "sampling", False, f"chi2 p-values {p1:.4f}, {p2:.4f}")
    z1 = empirical_moment_test(params(), parse("+:3,+:2,+:0"), 2, Partition.of(1), n_mom, 2001)
    z2 = empirical_moment_test(params(), parse("-:0,+:0"), 1, Partition.of(1), n_mom, 2002, MIN_ABS)
    z3 = empirical_moment_test(params(), parse("+:3,+:2,+:0"), 2, Partition.of(), n_mom // 10, 2003)
    if max(abs(z1), abs(z2)) >= 4 or z3 != 0.0:
        return CriterionResult("10", "sampling", False, f"z-scores {z1:.2f}, {z2:.2f}, {z3}")
    return CriterionResult(
        "10", "sampling", True, f"chi2 p {p1:.3f}/{p2:.3f}; z {z1:+.2f}/{z2:+.2f}; interlacing never fired"
    )


# -- criterion 11 ------------------------------------------------------------


def criterion_11(level: str = "full") -> CriterionResult:
    K, N = 2, 4
    Z = EvalPoints(_Z_POOL[:2])
    Z1 = EvalPoints(_Z_POOL[:1])
    A = parse("+:1")
    decay = []
    for j in range(1, 13):
        X = Config.from_points([LatticePoint(1, -j + d) for d in range(N)])
        meas = telescope(params(), X, K)
        v0 = apply_function(meas, lambda cfg: eval_f_Z(params(), Z, cfg.nonzero, N))
        v1 = apply_function(meas, lambda cfg: eval_f_AZ(params(), A, Z1, cfg.nonzero, N))
        decay.append((float(v0.abs_mpf()), float(v1.abs_mpf())))
    final0, final1 = decay[-1]
    if final0 >= 1e-4 or final1 >= 1e-4:
        return CriterionResult("11", "Feller probes", False, f"decay endpoints {final0:.2e}, {final1:.2e}")
    tail_monotone = all(decay[j][0] <= decay[j - 1][0] for j in range(6, 12))
    # continuity at a point merging to 0
    base = parse("+:2,+:0")
    lim = ExtConfig(base, 1)
    lim_val = apply_function(
        telescope(params(), lim, K, MIN_ABS), lambda cfg: eval_f_Z(params(), Z, cfg.nonzero, 3)
    )
    j = 30
    approx = Config.from_points(list(base.points) + [LatticePoint(1, j)])
    app_val = apply_function(
        telescope(params(), approx, K, MIN_ABS), lambda cfg: eval_f_Z(params(), Z, cfg.nonzero, 3)
    )
    cont_diff = float((lim_val - app_val).abs_mpf())
    if cont_diff >= 1e-6:
        return CriterionResult("11", "Feller probes", False, f"continuity gap {cont_diff:.2e}")
    if not tail_monotone:
        return CriterionResult("11", "Feller probes", False, "decay not monotone on the tail")
    return CriterionResult(
        "11", "Feller probes", True, f"decay to {final0:.1e}/{final1:.1e}; continuity gap {cont_diff:.1e}"
    )


# -- registry ----------------------------------------------------------------


def params() -> QParams:
    return DEFAULT_PARAMS


def parse(text: str) -> Config:
    from .lattice import parse_config

    return parse_config(text)


CRITERIA: list[tuple[str, Callable[[str], CriterionResult]]] = [
    ("1", criterion_1),
    ("2", criterion_2),
    ("3", criterion_3),
    ("4", criterion_4),
    ("5", criterion_5),
    ("6", criterion_6),
    ("7", criterion_7),
    ("8", criterion_8),
    ("9", criterion_9),
    ("10", criterion_10),
    ("11", criterion_11),
]


def run_all(level: str = "full", ids: Optional[list[str]] = None) -> list[CriterionResult]:
    results = []
    for cid, fn in CRITERIA:
        if ids and cid not in ids:
            continue
        results.append(fn(level))
    return results
