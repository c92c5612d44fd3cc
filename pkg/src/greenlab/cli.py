"""Command line interface.

Subcommands: profile, ball, bound, compare, energy, optimize, verify.
Every run emits the payload (CSV or JSON, 17 significant digits) plus a
run manifest with the full parameter set, seed, version, tolerances and
wall time; with --out the manifest lands next to the payload as
<out>.manifest.json, otherwise it goes to stderr. Identical invocations
with the same seed reproduce payload bytes exactly.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from . import ball_stats as bs
from . import bounds as bd
from . import energy as en
from .errors import GreenLabError
from .green import build_profile, get_profile
from .manifold import (
    Family,
    ManifoldSpec,
    diameter,
    load_configuration,
    save_configuration,
)
from .special_math import QuadratureSettings, set_default_settings
from .verify import run_verification

_FMT = "{:.17g}"


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int | None
    version: str
    wall_time_s: float
    rel_tol: float
    abs_tol: float


def _default_rel_tol() -> float:
    env = os.environ.get("GREENLAB_TOL_REL")
    if env is None:
        return 1e-10
    try:
        value = float(env)
    except ValueError as exc:
        raise GreenLabError(f"bad GREENLAB_TOL_REL value {env!r}") from exc
    return value


def _spec_from_args(args) -> ManifoldSpec:
    return ManifoldSpec.from_token(args.family, args.n)


def _format_cell(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, float):
        return _FMT.format(x)
    return str(x)


def _emit(args, payload: str, manifest: RunManifest) -> None:
    manifest_json = json.dumps(asdict(manifest), indent=2, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
        with open(args.out + ".manifest.json", "w") as fh:
            fh.write(manifest_json + "\n")
    else:
        sys.stdout.write(payload)
        sys.stderr.write(manifest_json + "\n")


def _csv(rows: list[list], header: list[str]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_format_cell(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_payload(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_profile(args) -> str:
    spec = _spec_from_args(args)
    if args.r_cut is not None:
        prof = build_profile(spec, r_cut=args.r_cut)
    else:
        prof = get_profile(spec)
    rows = [[r, ph, phi] for r, ph, phi in prof.grid_rows()]
    if args.format == "json":
        return _json_payload(
            {
                "family": spec.token,
                "n": spec.n,
                "c_m": prof.c_m,
                "r_cut": prof.r_cut,
                "grid": rows,
            }
        )
    return _csv(rows, ["r", "phi_hat", "phi"])


def _cmd_ball(args) -> str:
    spec = _spec_from_args(args)
    D = diameter(spec)
    if args.radius:
        radii = list(args.radius)
    else:
        radii = [D * (k + 1) / (args.grid_size + 1) for k in range(args.grid_size)]
    prof = get_profile(spec)
    closed = spec.family in (Family.COMPLEX_PROJ, Family.QUAT_PROJ, Family.CAYLEY_PLANE)
    rows = []
    for a in radii:
        k_quad = bs.k_quadrature(spec, a)
        theta_quad = bs.theta_quadrature(prof, a)
        if closed:
            k_cl = bs.k_closed(spec, a)
            theta_cl = bs.theta_closed(spec, a)
            rel_k = abs(k_quad - k_cl) / abs(k_cl)
            rel_t = abs(theta_quad - theta_cl) / max(abs(theta_cl), 1e-300)
        else:
            k_cl = theta_cl = rel_k = rel_t = None
        rows.append([spec.token, spec.n, a, k_quad, k_cl, theta_quad, theta_cl, rel_k, rel_t])
    header = [
        "family",
        "n",
        "a",
        "K_quad",
        "K_closed",
        "Theta_quad",
        "Theta_closed",
        "rel_err_K",
        "rel_err_Theta",
    ]
    if args.format == "json":
        return _json_payload([dict(zip(header, row)) for row in rows])
    return _csv(rows, header)


def _cmd_bound(args) -> str:
    spec = _spec_from_args(args)
    report = bd.best_finite_bound(spec, args.points)
    if args.format == "csv":
        rows = [[a, b] for a, b in report.radius_grid]
        return _csv(rows, ["a", "bound"])
    return _json_payload(report.to_dict())


def _cmd_compare(args) -> str:
    spec_family = ManifoldSpec.from_token(args.family, args.n_min or 2).family
    if spec_family is Family.CAYLEY_PLANE:
        n_min = n_max = 2
    else:
        if args.n_min is None or args.n_max is None:
            raise GreenLabError("compare needs --n-min and --n-max for this family")
        n_min, n_max = args.n_min, args.n_max
    rows = bd.compare_table(spec_family, n_min, n_max)
    if args.format == "json":
        return _json_payload(
            [
                {"n": n, "ours": ours, "matzke": prior, "ratio": ratio}
                for n, ours, prior, ratio in rows
            ]
        )
    return _csv([list(r) for r in rows], ["n", "ours", "matzke", "ratio"])


def _cmd_energy(args) -> str:
    with open(args.config) as fh:
        points = load_configuration(fh)
    spec = points[0].spec
    cfg = en.Configuration(spec, points)
    profile = get_profile(spec)
    report = en.EnergyReport.from_configuration(
        cfg, profile, seed=args.seed, threads=args.threads
    )
    return _json_payload(report.to_dict())


def _cmd_optimize(args) -> str:
    spec = _spec_from_args(args)
    rng = np.random.default_rng(args.seed)
    cfg = en.optimize(spec, args.points, args.iters, rng)
    buf = io.StringIO()
    save_configuration(cfg.points, buf)
    e = en.energy(cfg)
    sys.stderr.write(f"final energy {_FMT.format(e)}\n")
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenlab",
        description="Green functions, energies and certified lower bounds on "
        "compact harmonic manifolds",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, family=True, seed=True):
        if family:
            p.add_argument("--family", required=True, choices=["s", "rp", "cp", "hp", "op2"])
            p.add_argument("--n", type=int, default=None, help="dimension parameter")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-rel", type=float, default=None, help="relative quadrature tolerance")
        p.add_argument("--out", default=None, help="payload file; manifest lands alongside")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("profile", help="dump the radial Green profile grid")
    common(p)
    p.add_argument("--r-cut", type=float, default=None)
    p.set_defaults(fn=_cmd_profile, default_format="csv")

    p = sub.add_parser("ball", help="ball kernels by quadrature and closed form")
    common(p)
    p.add_argument("--grid-size", type=int, default=8)
    p.add_argument("--radius", type=float, action="append", help="explicit radius (repeatable)")
    p.set_defaults(fn=_cmd_ball, default_format="csv")

    p = sub.add_parser("bound", help="maximize the finite-N lower bound")
    common(p)
    p.add_argument("--points", type=int, required=True, help="number of points N")
    p.set_defaults(fn=_cmd_bound, default_format="json")

    p = sub.add_parser("compare", help="our coefficients against the prior ones")
    common(p)
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.set_defaults(fn=_cmd_compare, default_format="csv")

    p = sub.add_parser("energy", help="energy report for a configuration file")
    common(p, family=False)
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_energy, default_format="json")

    p = sub.add_parser("optimize", help="local descent from a random start")
    common(p)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--iters", type=int, default=200)
    p.set_defaults(fn=_cmd_optimize, default_format="csv")

    p = sub.add_parser("verify", help="run the invariant suite")
    common(p, family=False)
    p.add_argument("--quick", action="store_true")
    p.set_defaults(fn=None, default_format="csv")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format

    start = time.monotonic()
    try:
        rel_tol = args.tol_rel if args.tol_rel is not None else _default_rel_tol()
        settings = QuadratureSettings(rel_tol=rel_tol)
        set_default_settings(settings)
        if args.subcommand == "verify":
            ok = run_verification(quick=args.quick)
            return 0 if ok else 1
        payload = args.fn(args)
    except (GreenLabError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    manifest = RunManifest(
        subcommand=args.subcommand,
        parameters={
            k: v
            for k, v in vars(args).items()
            if k not in ("fn", "default_format") and not k.startswith("_")
        },
        seed=getattr(args, "seed", None),
        version=__version__,
        wall_time_s=time.monotonic() - start,
        rel_tol=settings.rel_tol,
        abs_tol=settings.abs_tol,
    )
    _emit(args, payload, manifest)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
