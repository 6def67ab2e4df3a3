from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from qlattice.boundary import (
    boundary_moment_check,
    coherence_check,
    extreme_family,
    perturbed,
    regular_limit,
)
from qlattice.kernels import lambda_inf
from qlattice.lattice import Config, ExtConfig, LatticePoint, parse_config
from qlattice.qcalc import q_pochhammer, q_pochhammer_inf, to_mpf
from qlattice.symfunc import Partition

MIN20 = Fraction(1, 2**20)
MIN26 = Fraction(1, 2**26)


def pt(code):
    return LatticePoint.parse(code)


@pytest.fixture(scope="module")
def singleton_family(params):
    with mp.workdps(30):
        return extreme_family(params, ExtConfig(parse_config("+:0")), 3, tol=1e-10, min_abs=MIN20)


class TestExtremeFamily:
    def test_euler_level(self, params, singleton_family):
        m1 = singleton_family.level(1)
        q = params.q
        with mp.workdps(30):
            assert abs(to_mpf(m1.total()) - 1) < 1e-6
            for n in range(8):
                atom = to_mpf(m1.atom(ExtConfig(parse_config(f"+:{n}"))))
                want = to_mpf(q**n) * q_pochhammer_inf(q ** (n + 1), q, 1e-20)[0]
                assert abs(atom - want) < 1e-9

    def test_empty_configuration(self, params):
        fam = extreme_family(params, ExtConfig(Config()), 3)
        for K in (1, 2, 3):
            assert fam.level(K).atoms == {ExtConfig(Config(), K): Fraction(1)}
        assert coherence_check(params, fam, 1) == 0
        assert coherence_check(params, fam, 2) == 0

    def test_stratum_levels_match_q_series(self, params, singleton_family):
        # from a single point x the level-K measure sits on 0^{K-1} u {x q^j}
        # with exact weight q^{Kj} (q^K; q)_inf / (q; q)_j
        q = params.q
        with mp.workdps(30):
            for K in (2, 3):
                mk = singleton_family.level(K)
                total = to_mpf(mk.total())
                assert abs(total - 1) < 1e-6
                for j in range(8):
                    got = to_mpf(mk.atom(ExtConfig(parse_config(f"+:{j}"), K - 1)))
                    want = (
                        to_mpf(q ** (K * j))
                        * q_pochhammer_inf(q**K, q, 1e-20)[0]
                        / to_mpf(q_pochhammer(q, q, j))
                    )
                    assert abs(got - want) < 1e-8

    def test_normalization_with_enough_points(self, params):
        with mp.workdps(30):
            fam = extreme_family(params, ExtConfig(parse_config("+:3,+:1,+:0")), 3, min_abs=MIN26)
            for K in (1, 2, 3):
                assert abs(to_mpf(fam.level(K).total()) - 1) < 1e-6

    def test_distinct_sources_differ_at_level_one(self, params):
        rng = np.random.default_rng(61)
        from qlattice.validation import random_config

        with mp.workdps(30):
            fams = []
            for _ in range(4):
                X = random_config(rng, int(rng.integers(1, 4)), 0, 4, sign=1)
                fams.append((X, extreme_family(params, ExtConfig(X), 1, min_abs=MIN20)))
            for i in range(len(fams)):
                for j in range(i + 1, len(fams)):
                    Xi, fi = fams[i]
                    Xj, fj = fams[j]
                    if Xi == Xj:
                        continue
                    m_i, m_j = fi.level(1), fj.level(1)
                    keys = set(m_i.atoms) | set(m_j.atoms)
                    assert any(
                        abs(to_mpf(m_i.atom(k)) - to_mpf(m_j.atom(k))) > 1e-6 for k in keys
                    )

    def test_rejects_zero_multiplicity_source(self, params):
        with pytest.raises(ValueError):
            extreme_family(params, ExtConfig(parse_config("+:0"), 1), 2)

    def test_tightness_witness(self, params):
        # the level-1 mass at the extreme point dominates the universal bound
        from qlattice.kernels import extreme_atom_lower_constant
        from qlattice.validation import random_config

        rng = np.random.default_rng(62)
        with mp.workdps(30):
            _lo, hi = extreme_atom_lower_constant(params)
            for _ in range(5):
                X = random_config(rng, int(rng.integers(2, 4)), 0, 4, sign=1)
                fam = extreme_family(params, ExtConfig(X), 1, min_abs=MIN20)
                x0 = max(X.points, key=lambda p: p.abs_value(params))
                assert to_mpf(fam.level(1).atom(ExtConfig(Config((x0,))))) >= hi - mp.mpf("1e-9")


class TestCoherence:
    def test_singleton_family(self, params, singleton_family):
        with mp.workdps(30):
            res = coherence_check(params, singleton_family, 1, MIN20)
            assert res < 1e-8
            res2 = coherence_check(params, singleton_family, 2, MIN20)
            assert res2 < 1e-7

    def test_perturbation_detected(self, params, singleton_family):
        with mp.workdps(30):
            eps = mp.mpf("1e-4")
            target = ExtConfig(parse_config("+:1"))
            bad = perturbed(singleton_family, 1, target, eps)
            res = coherence_check(params, bad, 1, MIN20)
            assert res >= eps * mp.mpf("0.5")

    def test_multi_point(self, params):
        with mp.workdps(30):
            fam = extreme_family(params, ExtConfig(parse_config("-:1,+:2,+:0")), 3, min_abs=MIN26)
            assert coherence_check(params, fam, 1, MIN26) < 1e-7
            assert coherence_check(params, fam, 2, MIN26) < 1e-7


class TestBoundaryMoments:
    def test_singleton_examples(self, params, singleton_family):
        X = ExtConfig(parse_config("+:0"))
        with mp.workdps(30):
            # nu = (1): sum q^n (q^{n+1};q)_inf q^n = wS_(1)|inf({1}) = 1 - q
            r1 = boundary_moment_check(params, X, 1, Partition.of(1), fam=singleton_family)
            assert r1 < 1e-8
            r2 = boundary_moment_check(params, X, 1, Partition.of(2), fam=singleton_family)
            assert r2 < 1e-8
            r0 = boundary_moment_check(params, X, 1, Partition.of(), fam=singleton_family)
            assert r0 < 1e-6  # normalization defect of the materialized level

    def test_stratum_level_moments(self, params, singleton_family):
        X = ExtConfig(parse_config("+:0"))
        with mp.workdps(30):
            for K in (2, 3):
                for nu in (Partition.of(1), Partition.of(2), Partition.of(1, 1)):
                    res = boundary_moment_check(params, X, K, nu, fam=singleton_family)
                    assert res < 1e-7

    def test_partition_too_long_rejected(self, params, singleton_family):
        with pytest.raises(ValueError):
            boundary_moment_check(
                params, ExtConfig(parse_config("+:0")), 1, Partition.of(1, 1), fam=singleton_family
            )


class TestRegularLimit:
    def test_zero_padding_limit(self, params):
        X0 = parse_config("+:0")
        seq = lambda N: ExtConfig(X0, N - 1)
        with mp.workdps(30):
            val, trace = regular_limit(params, seq, 1, Config((pt("+:0"),)), 1e-10)
            want = q_pochhammer_inf(params.q, params.q, 1e-20)[0]
            assert abs(val - want) < 1e-8
            assert len(trace) >= 3

    def test_two_sequences_same_limit(self, params):
        # zero padding vs shrinking-point padding give the same limit
        X0 = parse_config("+:0")
        Y = Config((pt("+:2"),))
        with mp.workdps(30):
            zero_pad = lambda N: ExtConfig(X0, N - 1)
            shrink = lambda N: ExtConfig(
                Config.from_points(list(X0.points) + [LatticePoint(1, 20 + i) for i in range(N - 1)])
            )
            v1, _ = regular_limit(params, zero_pad, 1, Y, 1e-10)
            v2, _ = regular_limit(params, shrink, 1, Y, 1e-10)
            assert abs(v1 - v2) < 1e-4
            v3 = lambda_inf(params, ExtConfig(X0), Y, 1e-10)
            assert abs(v1 - v3) < 1e-8

    def test_outside_support_zero(self, params):
        seq = lambda N: ExtConfig(parse_config("+:0"), N - 1)
        val, _ = regular_limit(params, seq, 1, Config((pt("-:0"),)), 1e-10)
        assert val == 0

    def test_uniform_structure_violation_detected(self, params):
        def seq(N):
            # a point keeps jumping outside every neighborhood of 0
            head = LatticePoint(1, -(N % 2))
            return ExtConfig(Config.from_points([head] + [LatticePoint(1, 30 + i) for i in range(N - 1)]))

        with pytest.raises(ValueError):
            regular_limit(params, seq, 1, Config((pt("+:0"),)), 1e-10, epsilon=Fraction(1, 1024))
