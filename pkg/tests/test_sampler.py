from collections import Counter
from fractions import Fraction

import pytest

from qlattice.kernels import telescope
from qlattice.lattice import interlaces, parse_config
from qlattice.sampler import (
    RngState,
    chi2_goodness_of_fit,
    empirical_moment_test,
    sample_chain,
    sample_link,
    trajectory_lines,
)
from qlattice.symfunc import Partition

MIN_ABS = Fraction(1, 2**30)


class TestSampleLink:
    def test_deterministic_support(self, params):
        X = parse_config("+:1,+:0")
        gen = RngState(1).generator()
        for _ in range(50):
            assert sample_link(params, X, gen).code() == "+:0"

    def test_frequency(self, params):
        X = parse_config("+:2,+:0")
        gen = RngState(42).generator()
        n = 30000
        hits = sum(sample_link(params, X, gen).code() == "+:0" for _ in range(n))
        assert abs(hits / n - 2 / 3) < 0.01

    def test_seed_determinism(self, params):
        X = parse_config("-:0,+:0")
        runs = []
        for _ in range(2):
            gen = RngState(7).generator()
            runs.append([sample_link(params, X, gen, MIN_ABS).code() for _ in range(40)])
        assert runs[0] == runs[1]

    def test_stream_independence(self, params):
        X = parse_config("+:2,+:0")
        g0 = RngState(7).generator(0)
        g1 = RngState(7).generator(1)
        s0 = [sample_link(params, X, g0).code() for _ in range(30)]
        s1 = [sample_link(params, X, g1).code() for _ in range(30)]
        assert s0 != s1

    def test_mixed_sign_draws_valid(self, params):
        X = parse_config("-:0,+:0")
        gen = RngState(3).generator()
        for _ in range(500):
            y = sample_link(params, X, gen, MIN_ABS)
            assert interlaces(X, y)


class TestSampleChain:
    def test_trajectory_interlaces(self, params):
        X = parse_config("+:4,+:2,+:1,+:0")
        gen = RngState(11).generator()
        for _ in range(200):
            _y, traj = sample_chain(params, X, 1, gen)
            assert len(traj) == 4
            for upper, lower in zip(traj, traj[1:]):
                assert interlaces(upper, lower)

    def test_trajectory_lines(self, params):
        X = parse_config("+:3,+:2,+:0")
        _y, traj = sample_chain(params, X, 1, RngState(9).generator())
        lines = trajectory_lines(traj)
        assert lines[0] == "3\t+:3,+:2,+:0"
        assert len(lines) == 3

    def test_bad_levels_rejected(self, params):
        with pytest.raises(ValueError):
            sample_chain(params, parse_config("+:1,+:0"), 2, RngState(1).generator())


class TestStatistics:
    def test_chain_matches_exact_table(self, params):
        X = parse_config("+:3,+:2,+:0")
        p = chi2_goodness_of_fit(params, X, 1, 30000, 123)
        assert p > 0.001

    def test_moment_z_scores(self, params):
        z = empirical_moment_test(params, parse_config("+:3,+:2,+:0"), 2, Partition.of(1), 20000, 5)
        assert abs(z) < 4
        zm = empirical_moment_test(params, parse_config("-:0,+:0"), 1, Partition.of(1), 20000, 6, MIN_ABS)
        assert abs(zm) < 4

    def test_constant_statistic_z_zero(self, params):
        z = empirical_moment_test(params, parse_config("+:3,+:2,+:0"), 2, Partition.of(), 500, 7)
        assert z == 0.0

    def test_frequencies_converge(self, params):
        # empirical atom frequencies approach exact weights at ~ n^{-1/2}
        X = parse_config("+:3,+:2,+:0")
        exact = telescope(params, X, 1)
        gen = RngState(21).generator()
        errs = []
        for n in (500, 2000, 8000):
            gen = RngState(21).generator()
            counts = Counter(sample_chain(params, X, 1, gen)[0] for _ in range(n))
            err = max(
                abs(counts.get(cfg.nonzero, 0) / n - float(w)) for cfg, w in exact.atoms.items()
            )
            errs.append(err)
        assert errs[-1] < errs[0] + 0.01
        assert errs[-1] < 0.02
