"""Command-line front end.

Exit codes: 0 success, 1 crash or non-finite output, 2 hypotheses not met
(report written), 3 numerical instability, 64 malformed input.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import divisors as dv
from . import liouville as lv
from . import spectral as sp
from .errors import ConfigError, InstabilityError, PerronError, SpectralMarginError
from .floquet import fiber_csv
from .lattice import LatticePoint, PeriodicLatticeOperator
from .oracles import (DECAYING, continuum_space_dim, dedekind_shifts, green_function,
                      truncated_L_dim_estimate, vinf_dim_oracle)
from .report import NonFiniteValueError, emit_report

EXIT_OK, EXIT_CRASH, EXIT_INAPPLICABLE, EXIT_UNSTABLE, EXIT_CONFIG = 0, 1, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _load_op(path) -> PeriodicLatticeOperator:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read operator file: {exc}") from exc
    return PeriodicLatticeOperator.from_json(text)


def _load_divisor(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read divisor file: {exc}") from exc
    return dv.divisor_from_json(text)


def parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        p = float(text)
    except ValueError as exc:
        raise ConfigError(f"p must be a number >= 1 or 'inf', got {text!r}") from exc
    if not p >= 1 or math.isinf(p):
        raise ConfigError(f"p must be a number >= 1 or 'inf', got {text!r}")
    return p


def parse_N(text: str) -> float:
    try:
        N = float(text)
    except ValueError as exc:
        raise ConfigError(f"N must be a real number, got {text!r}") from exc
    if not math.isfinite(N):
        raise ConfigError("N must be finite")
    return N


def _grid(args, op):
    M = args.grid or sp.default_grid(op.d)
    if M < 3:
        raise ConfigError("grid must have at least 3 points per axis")
    return M


def _out(args, name) -> Path:
    return Path(args.out) / name


def _ctx_for(mu, args, op=None):
    if mu.kind == "lattice":
        if op is None:
            raise ConfigError("lattice divisor needs --op")
        return dv.LatticeContext(op)
    n = args.n
    if n is None:
        pts = mu.plus.points + mu.minus.points
        n = len(pts[0]) if pts else 3
    sym = dv.bilaplacian_symbol(n) if args.symbol == "bilaplacian" else dv.neg_laplacian_symbol(n)
    return dv.ContinuumContext(sym)


# -- commands --------------------------------------------------------------------

def cmd_bands(args):
    op = _load_op(args.op)
    bands = sp.band_structure(op, args.grid or 33)
    path = _out(args, "bands.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(bands.to_csv(), encoding="utf-8")
    if args.fiber:
        _out(args, "fiber.csv").write_text(fiber_csv(op, bands.ks), encoding="utf-8")
    vals = np.asarray(bands.values)
    lo, hi = (float(vals.min()), float(vals.max())) if bands.hermitian else (math.nan, math.nan)
    print(f"bands: {len(bands.ks)} points, {vals.shape[1]} bands, range [{lo:.6g}, {hi:.6g}] -> {path}")
    return EXIT_OK


def cmd_spectrum(args):
    op = _load_op(args.op)
    intervals, gaps = sp.spectrum_intervals(sp.band_structure(op, args.grid or 33))
    emit_report({"intervals": [list(x) for x in intervals], "gaps": [list(g) for g in gaps],
                 "grid": args.grid or 33}, _out(args, "spectrum.json"))
    print("spectrum: " + " U ".join(f"[{a:.9g}, {b:.9g}]" for a, b in intervals))
    return EXIT_OK


def cmd_fermi(args):
    op = _load_op(args.op)
    pts = sp.fermi_points(op, args.level, _grid(args, op))
    emit_report([p.to_dict() for p in pts], _out(args, "fermi.json"))
    print(f"fermi: {len(pts)} point(s) at level {args.level:g}")
    return EXIT_OK


def cmd_liouville_dim(args):
    op = _load_op(args.op)
    pts = sp.fermi_points(op, args.level, _grid(args, op))
    growth = lv.GrowthSpec(parse_p(args.p), parse_N(args.N))
    res = lv.dim_Vp(pts, growth, op.d)
    n_eff = lv.effective_degree(growth, op.d)
    report = {"growth": {"p": args.p, "N": growth.N}, "dim_VpN": res.to_dict(),
              "fermi": [p.to_dict() for p in pts],
              "crude_bound": lv.crude_bound(pts, n_eff, op.d) if n_eff is not None else 0}
    emit_report(report, _out(args, "liouville.json"))
    print(f"liouville-dim: {res.value} ({res.status})")
    return EXIT_INAPPLICABLE if res.status == "inapplicable" else EXIT_OK


def cmd_divisor_degree(args):
    mu = _load_divisor(args.divisor)
    op = _load_op(args.op) if args.op else None
    ctx = _ctx_for(mu, args, op)
    rep = dv.degree(ctx, mu)
    emit_report(rep.to_dict(), _out(args, "degree.json"))
    print(f"divisor-degree: {rep.degree}")
    return EXIT_OK


def _audits(op, pts, level):
    if not pts:
        return [], []
    return sp.integrability_audit(op, pts, 1, level), sp.integrability_audit(op, pts, 2, level)


def cmd_lrr(args):
    op = _load_op(args.op)
    mu = _load_divisor(args.divisor) if args.divisor else dv.trivial_divisor("lattice")
    growth = lv.GrowthSpec(parse_p(args.p), parse_N(args.N))
    pts = sp.fermi_points(op, args.level, _grid(args, op))
    a1, a2 = _audits(op, pts, args.level)
    ctx = dv.LatticeContext(op.shifted(args.level) if args.level else op)
    rep = lv.lrr_bounds(ctx, mu, growth, pts, op.d, a1, a2)
    out = rep.to_dict()
    out["fermi"] = [p.to_dict() for p in pts]
    out["integrability"] = {"q1": [r.to_dict() for r in a1], "q2": [r.to_dict() for r in a2]}
    emit_report(out, _out(args, "lrr-report.json"))
    if not rep.applicable:
        print(f"lrr: inapplicable; failed hypotheses: {', '.join(rep.failed_hypotheses)}")
        return EXIT_INAPPLICABLE
    print(f"lrr: lower={rep.lower_bound} upper={rep.upper_bound} status={rep.status}")
    return EXIT_OK


def cmd_empty_fermi(args):
    op = _load_op(args.op)
    mu = _load_divisor(args.divisor) if args.divisor else dv.trivial_divisor("lattice")
    margin = sp.invertibility_margin(op, args.grid)
    ctx = dv.LatticeContext(op)
    try:
        rep = lv.empty_fermi_bounds(ctx, mu, margin)
    except SpectralMarginError as exc:
        emit_report({"status": "inapplicable", "failed_hypotheses": ["invertibility-margin"],
                     "margin": margin, "message": str(exc)}, _out(args, "empty-fermi.json"))
        print(f"empty-fermi: inapplicable ({exc})")
        return EXIT_INAPPLICABLE
    out = rep.to_dict()
    if args.radii:
        try:
            radii = [int(r) for r in args.radii.split(",")]
        except ValueError as exc:
            raise ConfigError(f"cannot parse radii {args.radii!r}") from exc
        out["truncated_estimate"] = truncated_L_dim_estimate(op, mu, radii).to_dict()
    emit_report(out, _out(args, "empty-fermi.json"))
    print(f"empty-fermi: deg={rep.deg.degree} dim={rep.extra['dim_L']}")
    return EXIT_OK


def cmd_oracle_vinf(args):
    op = _load_op(args.op)
    pts = sp.fermi_points(op, args.level, _grid(args, op))
    work = op.shifted(args.level) if args.level else op
    N = parse_N(args.N)
    if N != int(N):
        raise ConfigError("the kernel oracle needs an integer N")
    N = int(N)
    res = vinf_dim_oracle(work, [p.k for p in pts], N)
    formula = lv.dim_Vinf(pts, N, op.d)
    emit_report({"N": N, "oracle": res.total, "per_k": res.per_k, "ks": [p.k for p in pts],
                 "formula": formula.to_dict(), "agree": formula.value == res.total},
                _out(args, "oracle-vinf.json"))
    print(f"oracle-vinf: oracle={res.total} formula={formula.value} ({formula.status})")
    return EXIT_OK


def cmd_oracle_continuum(args):
    mu = _load_divisor(args.divisor)
    if mu.kind != "continuum":
        raise ConfigError("oracle-continuum needs a divisor with continuum points")
    growth = DECAYING if args.decaying else lv.GrowthSpec(parse_p(args.p), parse_N(args.N))
    rep = continuum_space_dim(mu, growth, args.d, report=True)
    emit_report({"dim": rep.dim, "candidates": rep.n_candidates, "rank": rep.rank,
                 "representation_kernel": rep.kernel, "forbidden_layers": rep.forbidden_layers,
                 "polynomial_degree": rep.polynomial_degree,
                 "growth": "decaying" if args.decaying else {"p": args.p, "N": float(args.N)}},
                _out(args, "oracle-continuum.json"))
    print(f"oracle-continuum: dim={rep.dim}")
    return EXIT_OK


def parse_ks(text: str):
    try:
        ks = [[float(x) for x in part.split(",")] for part in text.split(";") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse quasimomenta {text!r}") from exc
    if not ks or len({len(k) for k in ks}) != 1:
        raise ConfigError("quasimomenta must be ';'-separated vectors of equal length")
    return ks


def cmd_oracle_dedekind(args):
    cert = dedekind_shifts(parse_ks(args.ks))
    emit_report(cert.to_dict(), _out(args, "dedekind.json"))
    print(f"oracle-dedekind: shifts={cert.shifts.astype(int).tolist()} C={cert.C:.6g}")
    return EXIT_OK


def cmd_green(args):
    op = _load_op(args.op)
    parts = args.source.split(":")
    g = tuple(int(x) for x in parts[0].split(",")) if parts[0] else (0,) * op.d
    c = int(parts[1]) if len(parts) > 1 else 0
    if len(g) != op.d:
        raise ConfigError("source has the wrong dimension")
    res = green_function(op, LatticePoint(g, c), args.radius)
    emit_report(res.to_dict(), _out(args, "green.json"))
    print(f"green: decay={res.decay_rate:.6g} R2={res.r_squared:.6f}")
    return EXIT_OK


def cmd_principal(args):
    op = _load_op(args.op)
    try:
        curve = sp.maximize_principal(op, args.grid or 9, args.span, seed=args.seed)
    except PerronError as exc:
        emit_report({"status": "inapplicable", "failed_hypotheses": ["perron-class"], "message": str(exc)},
                    _out(args, "principal.json"))
        print(f"principal-eigenvalue: inapplicable ({exc})")
        return EXIT_INAPPLICABLE
    out = curve.to_dict()
    out["Lambda_at_zero"] = sp.principal_eigenvalue(op, np.zeros(op.d))[0]
    emit_report(out, _out(args, "principal.json"))
    print(f"principal-eigenvalue: Lambda={curve.Lambda:.12g} at xi0={np.round(curve.xi0, 10).tolist()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="floquet-lrr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, op=True, grid=True, level=False):
        p = sub.add_parser(name)
        if op:
            p.add_argument("--op", required=True, help="operator JSON file")
        if grid:
            p.add_argument("--grid", type=int, default=None, help="points per axis")
        if level:
            p.add_argument("--level", type=float, default=0.0, help="spectral level subtracted from A")
        p.add_argument("--out", default=".", help="output directory")
        p.set_defaults(func=fn)
        return p

    p = add("bands", cmd_bands)
    p.add_argument("--fiber", action="store_true", help="also write fiber.csv")
    add("spectrum", cmd_spectrum)
    add("fermi", cmd_fermi, level=True)
    p = add("liouville-dim", cmd_liouville_dim, level=True)
    p.add_argument("--p", default="inf")
    p.add_argument("--N", default="0")
    p = add("divisor-degree", cmd_divisor_degree, op=False, grid=False)
    p.add_argument("--op", default=None)
    p.add_argument("--divisor", required=True)
    p.add_argument("--symbol", choices=["neg-laplacian", "bilaplacian"], default="neg-laplacian")
    p.add_argument("--n", type=int, default=None)
    p = add("lrr", cmd_lrr, level=True)
    p.add_argument("--divisor", default=None)
    p.add_argument("--p", default="inf")
    p.add_argument("--N", default="0")
    p = add("empty-fermi", cmd_empty_fermi)
    p.add_argument("--divisor", default=None)
    p.add_argument("--radii", default=None, help="comma-separated box radii for the truncated estimate")
    p = add("oracle-vinf", cmd_oracle_vinf, level=True)
    p.add_argument("--N", default="0")
    p = add("oracle-continuum", cmd_oracle_continuum, op=False, grid=False)
    p.add_argument("--divisor", required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--p", default="inf")
    p.add_argument("--N", default="0")
    p.add_argument("--decaying", action="store_true")
    p = add("oracle-dedekind", cmd_oracle_dedekind, op=False, grid=False)
    p.add_argument("--ks", required=True, help="e.g. '0;3.14159' or '0,0;1,2'")
    p = add("green", cmd_green, grid=False)
    p.add_argument("--radius", type=int, default=30)
    p.add_argument("--source", default="", help="'g1,g2[:c]'")
    p = add("principal-eigenvalue", cmd_principal)
    p.add_argument("--span", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=sp.DEFAULT_SEED)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"unstable: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except NonFiniteValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CRASH
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - last-resort crash code
        print(f"crash: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CRASH


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
