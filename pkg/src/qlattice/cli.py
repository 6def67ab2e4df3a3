"""Command-line front end.

Subcommands: kernel (link | compose | closed), spline (moments | table),
transform (fwd | inv), boundary (family | check), sample, validate.  Output
is byte-deterministic for a fixed run configuration: rationals are printed as
p/q strings, floats at the declared precision, JSON keys sorted.

Exit codes: 0 success, 1 validation failure, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .boundary import boundary_moment_check, coherence_check, extreme_family
from .kernels import DiscreteMeasure, lambda_closed_N1, lambda_closed_NK, link_measure, telescope
from .lattice import Config, ExtConfig, LatticePoint, QParams
from .qcalc import QComplex
from .sampler import RngState, sample_chain, trajectory_lines
from .splines import qbspline, qbspline_moment
from .symfunc import Partition
from .transforms import inv_qlaplace, qlaplace
from .validation import run_all


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _precision(text: str) -> int:
    v = int(text)
    if v < 32:
        raise argparse.ArgumentTypeError("precision must be at least 32 digits")
    return v


@dataclass
class RunConfig:
    params: QParams
    tol: float
    min_abs: Fraction
    precision: int
    seed: int
    fmt: str

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            params=QParams(args.q, args.zeta_plus, args.zeta_minus),
            tol=args.tol,
            min_abs=args.min_abs,
            precision=args.precision,
            seed=args.seed,
            fmt=args.format,
        )


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--q", type=_rational, default=Fraction(1, 2))
    parser.add_argument("--zeta-plus", type=_rational, default=Fraction(1))
    parser.add_argument("--zeta-minus", type=_rational, default=Fraction(-1))
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--min-abs", type=_rational, default=Fraction(1, 2**30))
    parser.add_argument("--precision", type=_precision, default=64)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qlattice",
        description="Markov kernels, q-B-splines and q-Laplace transforms on the two-sided q-lattice",
    )
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="link / telescoped kernel tables and entries")
    k.add_argument("mode", choices=("link", "compose", "closed"))
    k.add_argument("--x", required=True, help="configuration, e.g. '+:2,+:0' (0 allowed)")
    k.add_argument("--k", type=int, default=1, help="target level for compose/closed")
    k.add_argument("--y", help="target configuration for closed")
    _common(k)

    s = sub.add_parser("spline", help="q-B-spline moments and atom tables")
    s.add_argument("mode", choices=("moments", "table"))
    s.add_argument("--x", required=True, help="knot configuration (0 allowed)")
    s.add_argument("--m", type=int, default=0, help="moment order")
    _common(s)

    t = sub.add_parser("transform", help="q-Laplace transform and inverse")
    t.add_argument("mode", choices=("fwd", "inv"))
    t.add_argument("--atoms", required=True, help="measure, e.g. '+:1=1/3,+:0=2/3'")
    t.add_argument("--z", help="evaluation point re,im for fwd")
    t.add_argument("--y", help="recovery point for inv")
    t.add_argument("--order", default="2", help="transform order N >= 2, or 'inf'")
    _common(t)

    b = sub.add_parser("boundary", help="extreme coherent families and their checks")
    b.add_argument("mode", choices=("family", "check"))
    b.add_argument("--x", required=True, help="finite boundary configuration")
    b.add_argument("--kmax", type=int, default=2)
    b.add_argument("--k", type=int, default=1)
    b.add_argument("--nu", default="[1]", help="partition for the moment check")
    _common(b)

    m = sub.add_parser("sample", help="Monte Carlo draws from the down-chain")
    m.add_argument("--x", required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--n-draws", type=int, default=1000)
    m.add_argument("--trajectories", action="store_true", help="emit one trajectory per draw")
    _common(m)

    v = sub.add_parser("validate", help="run the acceptance cross-check suite")
    v.add_argument("--level", choices=("quick", "full"), default="quick")
    v.add_argument("--only", help="comma-separated criterion ids")
    _common(v)
    return p


def _fmt_weight(w, precision: int) -> str:
    if isinstance(w, (int, Fraction)):
        return str(Fraction(w))
    return mpmath.nstr(w, precision)


def _emit_measure(measure: DiscreteMeasure, cfg: RunConfig) -> str:
    items = [(c.key(), _fmt_weight(w, cfg.precision)) for c, w in measure.items_sorted()]
    tail = _fmt_weight(measure.tail_bound, cfg.precision)
    if cfg.fmt == "csv":
        lines = ["config,weight,tail_bound"]
        lines += [f"{key},{w},{tail}" for key, w in items]
        return "\n".join(lines)
    payload = dict(items)
    payload["tail"] = tail
    return json.dumps(payload, sort_keys=True)


def _emit_obj(payload: dict, cfg: RunConfig) -> str:
    if cfg.fmt == "csv":
        lines = ["key,value"]
        lines += [f"{k},{v}" for k, v in sorted(payload.items())]
        return "\n".join(lines)
    return json.dumps(payload, sort_keys=True)


def _parse_atoms(text: str) -> dict[ExtConfig, Fraction]:
    atoms = {}
    for part in text.split(";") if ";" in text else text.split(","):
        part = part.strip()
        if not part:
            continue
        code, _, w = part.partition("=")
        atoms[ExtConfig.parse(code)] = Fraction(w)
    return atoms


def _parse_z(text: str) -> QComplex:
    re_txt, _, im_txt = text.partition(",")
    z = QComplex(Fraction(re_txt), Fraction(im_txt or "0"))
    if z.im == 0:
        raise ValueError("evaluation point must be off the real axis")
    return z


def _order(text: str):
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return None
    n = int(text)
    if n < 2:
        raise ValueError("transform order must be at least 2 (or inf)")
    return n


def _cmd_kernel(args, cfg: RunConfig) -> tuple[str, int]:
    X = ExtConfig.parse(args.x)
    if args.mode == "link":
        return _emit_measure(link_measure(cfg.params, X, cfg.min_abs), cfg), 0
    if args.mode == "compose":
        return _emit_measure(telescope(cfg.params, X, args.k, cfg.min_abs), cfg), 0
    if not args.y:
        raise ValueError("kernel closed requires --y")
    Y = ExtConfig.parse(args.y)
    if Y.zero_mult:
        raise ValueError("closed-form entries require a zero-free target")
    if len(Y.nonzero) == 1:
        val = lambda_closed_N1(cfg.params, X, Y.nonzero[0])
    else:
        val = lambda_closed_NK(cfg.params, X, Y.nonzero)
    return _emit_obj({"value": _fmt_weight(val, cfg.precision)}, cfg), 0


def _cmd_spline(args, cfg: RunConfig) -> tuple[str, int]:
    X = ExtConfig.parse(args.x)
    if args.mode == "moments":
        return _fmt_weight(qbspline_moment(cfg.params, X, args.m), cfg.precision), 0
    return _emit_measure(qbspline(cfg.params, X, cfg.min_abs), cfg), 0


def _cmd_transform(args, cfg: RunConfig) -> tuple[str, int]:
    measure = DiscreteMeasure(_parse_atoms(args.atoms))
    order = _order(args.order)
    if args.mode == "fwd":
        if not args.z:
            raise ValueError("transform fwd requires --z re,im")
        z = _parse_z(args.z)
        val = qlaplace(cfg.params, measure, z, order, cfg.tol)
        if isinstance(val, QComplex):
            payload = {"re": str(val.re), "im": str(val.im)}
        else:
            payload = {"re": mpmath.nstr(val.real, cfg.precision), "im": mpmath.nstr(val.imag, cfg.precision)}
        return _emit_obj(payload, cfg), 0
    if not args.y:
        raise ValueError("transform inv requires --y")
    y = LatticePoint.parse(args.y)
    phi = lambda z: qlaplace(cfg.params, measure, z, order, cfg.tol * 0.01)
    val, err = inv_qlaplace(cfg.params, phi, y, order, tol=max(cfg.tol, 1e-10))
    payload = {
        "re": mpmath.nstr(val.real, cfg.precision),
        "im": mpmath.nstr(val.imag, cfg.precision),
        "error": mpmath.nstr(err, 3),
    }
    return _emit_obj(payload, cfg), 0


def _cmd_boundary(args, cfg: RunConfig) -> tuple[str, int]:
    X = ExtConfig.parse(args.x)
    if args.mode == "family":
        fam = extreme_family(cfg.params, X, args.kmax, cfg.tol, cfg.min_abs)
        if cfg.fmt == "csv":
            lines = ["level,config,weight,tail_bound"]
            for K in sorted(fam.levels):
                meas = fam.levels[K]
                tail = _fmt_weight(meas.tail_bound, cfg.precision)
                for c, w in meas.items_sorted():
                    lines.append(f"{K},{c.key()},{_fmt_weight(w, cfg.precision)},{tail}")
            return "\n".join(lines), 0
        payload = {}
        for K in sorted(fam.levels):
            meas = fam.levels[K]
            payload[str(K)] = dict(
                [(c.key(), _fmt_weight(w, cfg.precision)) for c, w in meas.items_sorted()]
                + [("tail", _fmt_weight(meas.tail_bound, cfg.precision))]
            )
        return json.dumps(payload, sort_keys=True), 0
    fam = extreme_family(cfg.params, X, args.k + 1, cfg.tol, cfg.min_abs)
    res = coherence_check(cfg.params, fam, args.k, cfg.min_abs)
    nu = Partition.parse(args.nu)
    mres = boundary_moment_check(cfg.params, X, args.k, nu, fam=fam, min_abs=cfg.min_abs)
    payload = {
        "coherence_residual": mpmath.nstr(res, 6),
        f"moment_residual{nu.code()}": mpmath.nstr(mres, 6),
    }
    return _emit_obj(payload, cfg), 0


def _cmd_sample(args, cfg: RunConfig) -> tuple[str, int]:
    X = ExtConfig.parse(args.x)
    if X.zero_mult:
        raise ValueError("sampling starts from a zero-free configuration")
    gen = RngState(cfg.seed).generator()
    if args.trajectories:
        lines = []
        for _ in range(args.n_draws):
            _y, traj = sample_chain(cfg.params, X.nonzero, args.k, gen, cfg.min_abs)
            lines += trajectory_lines(traj)
            lines.append("--")
        return "\n".join(lines), 0
    counts: dict[str, int] = {}
    for _ in range(args.n_draws):
        y, _traj = sample_chain(cfg.params, X.nonzero, args.k, gen, cfg.min_abs)
        key = f"({y.code()})"
        counts[key] = counts.get(key, 0) + 1
    payload = {k: str(v) for k, v in counts.items()}
    payload["draws"] = str(args.n_draws)
    return _emit_obj(payload, cfg), 0


def _cmd_validate(args, cfg: RunConfig) -> tuple[str, int]:
    ids = args.only.split(",") if args.only else None
    results = run_all(args.level, ids)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{'OK' if ok else 'FAILED'}: {sum(r.passed for r in results)}/{len(results)} criteria")
    return "\n".join(lines), 0 if ok else 1


_DISPATCH = {
    "kernel": _cmd_kernel,
    "spline": _cmd_spline,
    "transform": _cmd_transform,
    "boundary": _cmd_boundary,
    "sample": _cmd_sample,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args)
    try:
        with mp.workdps(cfg.precision):
            out, code = _DISPATCH[args.command](args, cfg)
    except (ValueError, ArithmeticError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
