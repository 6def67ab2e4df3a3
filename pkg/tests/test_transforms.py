from fractions import Fraction

import pytest
from mpmath import mp

from qlattice.kernels import DiscreteMeasure, residue_orthogonality
from qlattice.lattice import Config, ExtConfig, LatticePoint, parse_config
from qlattice.qcalc import QComplex, to_mpf
from qlattice.splines import qbspline
from qlattice.transforms import (
    DecayError,
    default_contour,
    inv_qlaplace,
    qlaplace,
    round_trip_atom,
)


def atom_measure(*pairs):
    return DiscreteMeasure(
        {ExtConfig(parse_config(c)): Fraction(w) for c, w in pairs}
    )


def pt(code):
    return LatticePoint.parse(code)


class TestForward:
    def test_single_atom_exact(self, params):
        M = atom_measure(("+:0", 1))
        z = QComplex.of(0, 2)
        got = qlaplace(params, M, z, 2)
        zi = z.inverse()
        want = QComplex.coerce(1) / ((1 - zi) * (1 - zi * Fraction(1, 2)))
        assert got == want

    def test_zero_measure(self, params):
        got = qlaplace(params, DiscreteMeasure({}), QComplex.of(0, 2), 2)
        assert got == QComplex.of(0)

    def test_spline_transform_is_product(self, params):
        # the transform of the spline with N knots collapses to the plain
        # product over the knots
        X = parse_config("+:2,+:0")
        M = qbspline(params, X)
        z = QComplex.of(0, 2)
        zi = z.inverse()
        got = qlaplace(params, M, z, 2)
        want = QComplex.coerce(1)
        for x in X.values(params):
            want = want / (1 - zi * x)
        assert got == want

    def test_atom_at_zero_contributes_mass(self, params):
        M = DiscreteMeasure({ExtConfig(Config(), 1): Fraction(1, 3)})
        got = qlaplace(params, M, QComplex.of(0, 2), 5)
        assert got == QComplex.coerce(Fraction(1, 3))

    def test_numeric_matches_exact(self, params):
        M = atom_measure(("+:0", Fraction(1, 2)), ("-:1", Fraction(1, 2)))
        z = QComplex.of(1, 1)
        exact = qlaplace(params, M, z, 4)
        with mp.workdps(40):
            num = qlaplace(params, M, z.to_mpc(), 4)
            assert abs(num - mp.mpc(to_mpf(exact.re), to_mpf(exact.im))) < 1e-30


class TestInverse:
    def test_delta_recovery(self, params):
        with mp.workdps(40):
            M = atom_measure(("+:1", 1))
            val, err = round_trip_atom(params, M, pt("+:1"), 3, tol=1e-8)
            assert abs(val - 1) < 1e-6
            val0, _ = round_trip_atom(params, M, pt("+:0"), 3, tol=1e-8)
            assert abs(val0) < 1e-6

    def test_three_atom_roundtrip(self, params):
        spec = [("+:0", Fraction(1, 2)), ("+:2", Fraction(1, 3)), ("-:1", Fraction(1, 6))]
        M = atom_measure(*spec)
        with mp.workdps(40):
            for c, w in spec:
                val, err = round_trip_atom(params, M, pt(c), 3, tol=1e-8)
                assert abs(val - to_mpf(w)) < 1e-6
                assert err < 1e-6

    def test_infinite_order_roundtrip(self, params):
        spec = [("+:0", Fraction(2, 3)), ("-:0", Fraction(1, 3))]
        M = atom_measure(*spec)
        with mp.workdps(40):
            for c, w in spec:
                val, _err = round_trip_atom(params, M, pt(c), None, tol=1e-8)
                assert abs(val - to_mpf(w)) < 1e-6

    def test_agrees_with_residue_oracle(self, params):
        # the quadrature inverse of a pure kernel equals the exact residue
        # orthogonality values
        with mp.workdps(40):
            for uc, yc, n in [("+:1", "+:1", 4), ("+:2", "+:1", 4), ("-:0", "-:1", 3)]:
                u, y = pt(uc), pt(yc)
                phi = lambda z, u=u, n=n: 1 / _poch_numeric(
                    to_mpf(u.value(params)) / z, params.q, n
                )
                val, _ = inv_qlaplace(params, phi, y, n, tol=1e-8)
                want = to_mpf(residue_orthogonality(params, u, y, n))
                assert abs(val - want) < 1e-6

    def test_contour_independence(self, params):
        M = atom_measure(("+:1", 1))
        y = pt("+:1")
        with mp.workdps(40):
            phi = lambda z: qlaplace(params, M, z, 3, 1e-10)
            base, _ = inv_qlaplace(params, phi, y, 3, tol=1e-8)
            for shift, rscale in [(Fraction(1, 20), 1), (Fraction(-1, 20), 1), (0, 2)]:
                c = default_contour(params, y)
                c.abscissa = c.abscissa * (1 + to_mpf(shift))
                c.half_height = c.half_height * rscale
                val, _ = inv_qlaplace(params, phi, y, 3, contour=c, tol=1e-8)
                assert abs(val - base) < 2e-6

    def test_order_below_two_rejected(self, params):
        M = atom_measure(("+:0", 1))
        with pytest.raises(ValueError):
            round_trip_atom(params, M, pt("+:0"), 1)

    def test_bad_abscissa_rejected(self, params):
        y = pt("+:0")
        c = default_contour(params, y)
        c.abscissa = mp.mpf(10)  # outside (yq, y)
        with pytest.raises(ValueError):
            inv_qlaplace(params, lambda z: 1 / z**0, y, 3, contour=c)

    def test_non_decaying_phi_reported(self, params):
        with mp.workdps(30):
            with pytest.raises(DecayError):
                inv_qlaplace(params, lambda z: z * z, pt("+:0"), 3, tol=1e-8)


def _poch_numeric(a, q, n):
    out = mp.mpc(1)
    aq = a
    for _ in range(n):
        out *= 1 - aq
        aq *= to_mpf(q)
    return out
