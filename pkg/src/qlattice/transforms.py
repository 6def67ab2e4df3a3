"""The q-Laplace transform pair on the lattice and its quadrature inverse.

The forward transform of a measure M at order N is
``sum_y M(y) / (y z^{-1}; q)_N`` (N = None means the infinite kernel).  The
inverse is a contour integral over a vertical line separating y from yq,
oriented top to bottom, with kernel ``(1 - q^{N-1}) |y| (y z^{-1} q; q)_{N-2}``
for finite N and ``|y| (y z^{-1} q; q)_inf`` in the limit: the infinite
inverse kernel is the plain N -> inf limit of the truncated one, which is
what the residue orthogonality demands (cross-validated against the exact
residue inverse in the kernel module).

The line integral is evaluated by trapezoidal quadrature after the
substitution t = scale * sinh(s), which turns the O(|z|^-2) algebraic decay
into exponential decay in s; the half-height grows adaptively until the tail
estimate is below tol/10 and the step is halved until the step-halving error
estimate is below tol.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import mpmath
from mpmath import mp

from .kernels import DiscreteMeasure
from .lattice import LatticePoint, QParams
from .qcalc import QComplex, q_pochhammer, q_pochhammer_inf, to_mpc, to_mpf

DEFAULT_TRANSFORM_DPS = 48


class DecayError(ArithmeticError):
    """The integrand does not exhibit the required decay on the contour."""


@dataclass
class Contour:
    """A truncated vertical line separating the anchor y from yq.

    ``abscissa`` must lie strictly between the values of yq and y;
    ``half_height`` is the truncation height R, ``step`` the node spacing
    near the real axis (the sinh grading stretches it farther out).
    """

    anchor: LatticePoint
    abscissa: mpmath.mpf
    half_height: mpmath.mpf
    step: mpmath.mpf

    def gap_scale(self, params: QParams) -> mpmath.mpf:
        """Distance from the abscissa to {y, yq}; <= 0 when not separating."""
        y = to_mpf(self.anchor.value(params))
        yq = y * to_mpf(params.q)
        lo, hi = (y, yq) if y < yq else (yq, y)
        return min(self.abscissa - lo, hi - self.abscissa)


def default_contour(params: QParams, y: LatticePoint, dps: int | None = None) -> Contour:
    """Abscissa at the geometric midpoint sign(y) sqrt(|y| |yq|)."""
    with mp.workdps(dps or mp.dps):
        yv = to_mpf(y.value(params))
        a = mp.sign(yv) * mp.sqrt(abs(yv) * abs(yv) * to_mpf(params.q))
        scale = min(abs(yv) - abs(a), abs(a) - abs(yv) * to_mpf(params.q))
        return Contour(y, a, 64 * abs(yv), scale / 2)


def qlaplace(
    params: QParams,
    M: DiscreteMeasure,
    z,
    N: Optional[int] = None,
    tol: float = 1e-12,
):
    """Forward transform sum_y M(y) / (y z^{-1}; q)_N at a point z off R.

    Exact (QComplex) for finite N with exact z; numeric otherwise.  Atom keys
    are level-1 configurations; an atom at 0 contributes weight times 1.
    """
    q = params.q
    exact = isinstance(z, QComplex) and N is not None
    if exact:
        zinv = z.inverse()
        out = QComplex.coerce(0)
        for cfg, w in M.atoms.items():
            if cfg.zero_mult:
                out = out + QComplex.coerce(w)
                continue
            y = cfg.nonzero.values(params)[0]
            out = out + QComplex.coerce(w) / q_pochhammer(zinv * y, q, N)
        return out
    zc = to_mpc(z)
    out = mp.mpc(0)
    for cfg, w in M.atoms.items():
        wv = to_mpf(w) if isinstance(w, (int, Fraction)) else w
        if cfg.zero_mult:
            out += wv
            continue
        y = to_mpf(cfg.nonzero.values(params)[0])
        if N is None:
            denom = q_pochhammer_inf(y / zc, q, tol)[0]
        else:
            denom = q_pochhammer(y / zc, to_mpf(q), N)
        out += wv / denom
    return out


def _inverse_kernel(params: QParams, y_val, N: Optional[int], tol: float):
    """kernel(z) including the prefactor of the inverse transform."""
    q = to_mpf(params.q)
    ya = abs(y_val)
    if N is None:
        def kernel(z):
            return ya * q_pochhammer_inf(y_val * q / z, params.q, tol)[0]
    else:
        if N < 2:
            raise ValueError("finite transform order must be at least 2")
        pref = (1 - q ** (N - 1)) * ya

        def kernel(z):
            return pref * q_pochhammer(y_val * q / z, q, N - 2)

    return kernel


def inv_qlaplace(
    params: QParams,
    phi: Callable,
    y: LatticePoint,
    N: Optional[int] = None,
    contour: Optional[Contour] = None,
    tol: float = 1e-8,
    dps: int = DEFAULT_TRANSFORM_DPS,
):
    """Inverse transform at y; returns (value, quadrature error estimate).

    ``phi`` must be analytic off the real axis with O(|z|^-2) decay of the
    full integrand; lack of decay raises :class:`DecayError`.
    """
    with mp.workdps(dps):
        if contour is None:
            contour = default_contour(params, y)
        y_val = to_mpf(y.value(params))
        a = mp.mpf(contour.abscissa)
        scale = contour.gap_scale(params)
        if scale <= 0:
            raise ValueError("contour abscissa must separate y and yq")
        kernel = _inverse_kernel(params, y_val, N, tol * 0.01)

        def integrand(t: mpmath.mpf) -> mpmath.mpc:
            z = mp.mpc(a, t)
            return kernel(z) * phi(z) / (z * z)

        # grow the half-height until the algebraic tail estimate is small
        s_max = mp.asinh(mp.mpf(contour.half_height) / scale)
        tail = None
        for _ in range(40):
            t_edge = scale * mp.sinh(s_max)
            g_edge = max(abs(integrand(t_edge)), abs(integrand(-t_edge)))
            tail = 2 * g_edge * t_edge  # |g| ~ D/t^2  =>  tail ~ 2 D / R
            if tail < tol / 10:
                break
            s_max += 1
        else:
            raise DecayError("contour tail estimate did not fall below tolerance")
        g_far = max(abs(integrand(scale * mp.sinh(s_max + 2))), mp.mpf(1e-300))
        if g_far * (scale * mp.sinh(s_max + 2)) ** 2 > 10 * (
            abs(integrand(scale * mp.sinh(s_max))) * (scale * mp.sinh(s_max)) ** 2 + tol
        ):
            raise DecayError("integrand is not O(|z|^-2) on the contour")

        def trapezoid(h: mpmath.mpf) -> mpmath.mpc:
            n = int(mp.floor(s_max / h))
            total = integrand(mp.mpf(0)) * scale
            for k in range(1, n + 1):
                t = scale * mp.sinh(k * h)
                w = scale * mp.cosh(k * h)  # dt/ds for the sinh grading
                total += (integrand(t) + integrand(-t)) * w
            return total * h

        h = mp.asinh(mp.mpf(contour.step) / scale)
        if h <= 0:
            h = mp.mpf("0.25")
        prev = trapezoid(h)
        err = mp.inf
        for _ in range(14):
            h = h / 2
            cur = trapezoid(h)
            err = abs(cur - prev)
            prev = cur
            if err < tol / 2:
                break
        else:
            raise DecayError("quadrature did not reach the requested tolerance")
        # top-to-bottom orientation: (1/(2 pi i)) * (-i) int dt = -(1/(2 pi)) int dt
        value = -prev / (2 * mp.pi)
        return value, err + tail


def round_trip_atom(
    params: QParams,
    M: DiscreteMeasure,
    y: LatticePoint,
    N: Optional[int] = None,
    tol: float = 1e-8,
    contour: Optional[Contour] = None,
    dps: int = DEFAULT_TRANSFORM_DPS,
):
    """Recover the mass of M at y from its forward transform."""
    phi = lambda z: qlaplace(params, M, z, N, tol * 0.01)
    return inv_qlaplace(params, phi, y, N, contour, tol, dps)
