from fractions import Fraction

import numpy as np
import pytest

from qlattice.lattice import ExtConfig, parse_config
from qlattice.qcalc import q_pochhammer
from qlattice.symfunc import (
    Partition,
    h_complete,
    h_m,
    h_principal,
    normalized_schur,
    normalized_schur_inf,
    normalized_schur_numeric,
    partitions_up_to,
    schur,
    schur_bialternant,
    schur_principal,
    schur_principal_inf,
    schur_principal_inf_truncated,
)

Q = Fraction(1, 2)


class TestPartition:
    def test_normalization(self):
        assert Partition.of(3, 1, 0, 0).parts == (3, 1)
        assert Partition.of().parts == ()

    def test_rejects_increase(self):
        with pytest.raises(ValueError):
            Partition.of(1, 2)

    def test_parse_code(self):
        nu = Partition.parse("[2,1]")
        assert nu.parts == (2, 1)
        assert nu.code() == "[2,1]"
        assert Partition.parse("[]").parts == ()

    def test_conjugate(self):
        assert Partition.of(3, 1).conjugate().parts == (2, 1, 1)

    def test_enumeration(self):
        ps = partitions_up_to(4)
        assert len(ps) == 1 + 1 + 2 + 3 + 5
        assert len(partitions_up_to(4, max_length=1)) == 5


class TestH:
    def test_h0(self):
        assert h_complete([], 0) == 1

    def test_h1(self, params):
        assert h_m(ExtConfig(parse_config("+:2,+:0")), params, 1) == Fraction(5, 4)

    def test_h2(self, params):
        assert h_m(ExtConfig(parse_config("+:1,+:0")), params, 2) == Fraction(7, 4)

    def test_zeros_contribute_nothing(self, params):
        x = parse_config("+:1,+:0")
        with_zeros = ExtConfig(x, 3)
        for m in range(6):
            assert h_m(with_zeros, params, m) == h_m(ExtConfig(x), params, m)


class TestHPrincipal:
    def test_m0(self):
        assert h_principal(0, 3, Q) == 1

    @pytest.mark.parametrize("m,n,want", [(1, 2, Fraction(3, 2)), (2, 2, Fraction(7, 4))])
    def test_small(self, m, n, want):
        assert h_principal(m, n, Q) == want

    def test_matches_direct_evaluation(self):
        for n in range(1, 6):
            prog = [Q**i for i in range(n)]
            for m in range(7):
                assert h_principal(m, n, Q) == h_complete(prog, m)


class TestSchur:
    def test_empty(self):
        assert schur(Partition.of(), [Fraction(1)]) == 1

    def test_single_row_is_h(self, params):
        vals = [Fraction(1), Fraction(1, 2)]
        assert schur(Partition.of(1), vals) == Fraction(3, 2)

    def test_column_is_e(self):
        vals = [Fraction(1), Fraction(1, 2)]
        assert schur(Partition.of(1, 1), vals) == Fraction(1, 2)

    def test_jacobi_trudi_vs_bialternant(self):
        rng = np.random.default_rng(21)
        nus = [nu for nu in partitions_up_to(6) if nu.size <= 6]
        for _ in range(60):
            n = int(rng.integers(1, 6))
            vals = list({Fraction(int(v), 8) for v in rng.integers(-24, 25, size=n)})
            vals = [v for v in vals if v != 0]
            if not vals:
                continue
            nu = nus[int(rng.integers(0, len(nus)))]
            if nu.length > len(vals):
                continue
            assert schur(nu, vals) == schur_bialternant(nu, vals)

    def test_longer_than_support_vanishes(self):
        assert schur(Partition.of(1, 1), [Fraction(1, 2)]) == 0

    def test_continuity_to_zero_padding(self, params):
        # evaluating with the smallest point pushed to 0 converges to the
        # zero-padded value
        nu = Partition.of(2, 1)
        base = [Fraction(1), Fraction(1, 2)]
        target = schur(nu, base + [Fraction(0)])
        vals = [abs(Fraction(schur(nu, base + [Q**j])) - target) for j in (5, 10, 20)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < Fraction(1, 10**5)


class TestPrincipal:
    def test_normalized_at_progression_is_one(self, params):
        X = ExtConfig(parse_config("+:1,+:0"))
        assert normalized_schur(Partition.of(1), X, params) == 1

    def test_empty_partition_normalized(self, params):
        X = ExtConfig(parse_config("-:2,+:0"))
        assert normalized_schur(Partition.of(), X, params) == 1

    def test_principal_inf_geometric(self):
        assert schur_principal_inf(Partition.of(1), Q) == 2

    def test_principal_inf_vs_truncation(self):
        for nu in partitions_up_to(4):
            hook = schur_principal_inf(nu, Q)
            trunc = schur_principal_inf_truncated(nu, Q, 1e-13)
            assert abs(float(hook - trunc)) < 1e-10 * float(abs(hook))

    def test_normalized_inf_example(self, params):
        X = ExtConfig(parse_config("+:0"))
        assert normalized_schur_inf(Partition.of(1), X, params) == Fraction(1, 2)
        assert normalized_schur_inf(Partition.of(1, 1), X, params) == 0

    def test_ratio_identity(self):
        # S_{nu|N}(geo) / S_{nu|K}(geo) as a q-Pochhammer product in the
        # shifted coordinates n_i = nu_i + K - i
        rng = np.random.default_rng(22)
        nus = [nu for nu in partitions_up_to(5)]
        for _ in range(40):
            K = int(rng.integers(1, 5))
            N = int(rng.integers(K + 1, 7))
            nu = nus[int(rng.integers(0, len(nus)))]
            if nu.length > K:
                continue
            lhs = Fraction(schur_principal(nu, N, Q)) / schur_principal(nu, K, Q)
            rhs = Fraction(1)
            for i in range(1, K + 1):
                rhs *= Fraction(q_pochhammer(Q, Q, K - i)) * q_pochhammer(Q, Q, N - K) / q_pochhammer(Q, Q, N - i)
            for i in range(1, K + 1):
                n_i = (nu.parts[i - 1] if i <= nu.length else 0) + K - i
                rhs *= Fraction(q_pochhammer(Q ** (N - K + 1), Q, n_i)) / q_pochhammer(Q, Q, n_i)
            assert lhs == rhs

    def test_numeric_matches_exact(self, params):
        rng = np.random.default_rng(23)
        X = ExtConfig(parse_config("-:1,+:3,+:0"), 1)
        for nu in partitions_up_to(3):
            if nu.length > X.level:
                continue
            exact = float(normalized_schur(nu, X, params))
            num = float(normalized_schur_numeric(nu, X, params))
            assert abs(exact - num) < 1e-12 * max(1, abs(exact))
