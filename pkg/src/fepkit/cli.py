"""Command-line front door: classification, scans, band/contour data, probes.

Artifacts are plain CSV and JSON meant for external plotting.  JSON output is
deterministic apart from the ``timestamp`` field: keys appear in a fixed
order and floats carry 17 significant digits.  Files are written atomically
(temp file plus rename).

Angle-valued flags accept radians or "pi arithmetic": ``pi``, ``-pi/2``,
``3pi/4``, ``0.75``.  Derived angles (arccos and the like) must be passed
numerically.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from .classify import DegeneracyReport, classify_point
from .matkit import TolerancePolicy
from .models import (
    MODEL_IDS,
    HingeGeometry,
    HodsmSpec,
    LiebSpec,
    bloch_matrix,
    model_from_id,
)
from .probes import (
    SYMMETRY_KINDS,
    atomistic_classify,
    decay_rate_fit,
    hinge_report,
    lineshape_exponent,
    splitting_exponent,
    symmetry_check,
)
from .scan import ScanGrid, bz_scan, min_abs_energy, trace_ring

__all__ = ["main", "parse_angle", "dumps_canonical"]

_ANGLE_RE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?)?(pi)?(?:/(\d+(?:\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Parse 'pi', '-pi/2', '3pi/4', '2pi/3', or a plain number, to radians."""
    s = text.strip().replace(" ", "")
    m = _ANGLE_RE.match(s)
    if not m or (m.group(2) is None and m.group(3) is None):
        raise ValueError(f"cannot parse angle {text!r} (radians or pi fractions only)")
    sign = -1.0 if m.group(1) == "-" else 1.0
    coeff = float(m.group(2)) if m.group(2) else 1.0
    value = coeff * (math.pi if m.group(3) else 1.0)
    if m.group(4):
        value /= float(m.group(4))
    return sign * value


def parse_k(text: str) -> tuple[float, ...]:
    return tuple(parse_angle(part) for part in text.split(","))


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps_canonical(obj, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, floats at 17 digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{inner}"{k}": {dumps_canonical(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [dumps_canonical(v, indent + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple)) for v in obj) and len(parts) <= 8:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(inner + p for p in parts) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)}")


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fepkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _complex_json(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _policy_json(policy: TolerancePolicy) -> dict:
    return {
        "rank_rel": policy.rank_rel,
        "rank_abs": policy.rank_abs,
        "ck_rel": policy.ck_rel,
        "cluster_tol": policy.cluster_tol,
    }


def _model_json(model_id: str, params: dict) -> dict:
    out: dict = {"id": model_id}
    out.update({k: v for k, v in params.items() if v is not None})
    return out


def report_json(
    report: DegeneracyReport, model: dict, k: tuple[float, ...] | None
) -> dict:
    return {
        "k": list(k) if k is not None else None,
        "energy": _complex_json(report.energy),
        "alpha": report.alpha,
        "gamma": report.gamma,
        "ell": report.ell,
        "beta": {str(l): c for l, c in sorted(report.beta.beta.items())},
        "partials": list(report.partials),
        "label": report.label,
        "eta": report.eta,
        "xi": report.xi,
        "policy": _policy_json(report.policy),
        "model": model,
        "timestamp": _timestamp(),
    }


def _policy_from_args(args) -> TolerancePolicy:
    rank_rel = args.rank_tol
    if rank_rel is None:
        rank_rel = float(os.environ.get("FEPKIT_RANK_TOL", 1e-8))
    cluster = args.cluster_tol
    if cluster is None:
        cluster = float(os.environ.get("FEPKIT_CLUSTER_TOL", 1e-3))
    return TolerancePolicy(rank_rel=rank_rel, cluster_tol=cluster)


def _model_params(args) -> dict:
    return {
        "eps": args.eps,
        "t": args.t,
        "s": args.s,
        "phi": args.phi,
        "psi": args.psi,
    }


def _model_from_args(args):
    params = {k: v for k, v in _model_params(args).items() if v is not None}
    return model_from_id(args.model, **params)


def _csv(rows, header: str) -> str:
    lines = [header]
    lines += [",".join(_fmt_float(x) if isinstance(x, float) else str(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# verbs


def _cmd_classify(args) -> int:
    policy = _policy_from_args(args)
    model = _model_from_args(args)
    if isinstance(model, LiebSpec):
        k = parse_k(args.k) if args.k else None
        if k is None or len(k) != 2:
            raise ValueError("lieb models need --k kx,ky")
    else:
        if args.k:
            k = parse_k(args.k)
            if len(k) != 3:
                raise ValueError("hodsm models need --k kx,ky,kz (or just --kz)")
        elif args.kz is not None:
            k = (0.0, 0.0, args.kz)
        else:
            raise ValueError("hodsm models need --k or --kz")
    energy = complex(args.energy) if args.energy is not None else 0j
    report = classify_point(bloch_matrix(model, k), energy, policy, k_point=k)
    doc = report_json(report, _model_json(args.model, _model_params(args)), k)
    _emit(dumps_canonical(doc) + "\n", args.out)
    return 0


def _cmd_band(args) -> int:
    model = _model_from_args(args)
    axis, start, stop, count = args.path
    dims = 2 if isinstance(model, LiebSpec) else 3
    names = ("kx", "ky", "kz")[:dims]
    if axis not in names:
        raise ValueError(f"path axis {axis!r} not in {names}")
    fixed = list(parse_k(args.k)) if args.k else [0.0] * dims
    if len(fixed) != dims:
        raise ValueError(f"--k must give {dims} components")
    rows = []
    for value in np.linspace(start, stop, count):
        k = list(fixed)
        k[names.index(axis)] = float(value)
        ev = np.linalg.eigvals(bloch_matrix(model, k))
        ev = ev[np.lexsort((ev.imag, ev.real))]
        k3 = (k + [0.0])[:3]
        for idx, e in enumerate(ev):
            rows.append(
                (k3[0], k3[1], k3[2], idx, float(e.real), float(e.imag))
            )
    _emit(_csv(rows, "kx,ky,kz,band_index,re_E,im_E"), args.out)
    return 0


def _cmd_contour(args) -> int:
    model = _model_from_args(args)
    res = args.grid
    ks = np.linspace(-math.pi, math.pi, res, endpoint=False)
    rows = []
    for kx in ks:
        for ky in ks:
            k = (float(kx), float(ky)) if isinstance(model, LiebSpec) else (
                float(kx),
                float(ky),
                args.kz or 0.0,
            )
            rows.append((float(kx), float(ky), min_abs_energy(model, k)))
    _emit(_csv(rows, "kx,ky,min_abs_E"), args.out)
    return 0


def _cmd_scan(args) -> int:
    policy = _policy_from_args(args)
    model = _model_from_args(args)
    dims = 2 if isinstance(model, LiebSpec) else 3
    grid = ScanGrid(dims=dims, resolution=args.grid)
    cands = bz_scan(model, grid, policy, classify=True)
    doc = {
        "model": _model_json(args.model, _model_params(args)),
        "grid": {"dims": dims, "resolution": list(grid.resolution)},
        "candidates": [
            {
                "k": list(c.k),
                "min_abs_energy": c.min_abs_energy,
                "refined": c.refined,
                "report": report_json(
                    c.report, _model_json(args.model, _model_params(args)), c.k
                )
                if c.report
                else None,
            }
            for c in cands
        ],
        "timestamp": _timestamp(),
    }
    _emit(dumps_canonical(doc) + "\n", args.out)
    return 0


def _cmd_ring(args) -> int:
    policy = _policy_from_args(args)
    model = _model_from_args(args)
    if not isinstance(model, LiebSpec) or model.variant != "reciprocal":
        raise ValueError("ring tracing needs --model lieb:reciprocal")
    samples = trace_ring(model, args.samples, policy)
    doc = {
        "model": _model_json(args.model, _model_params(args)),
        "samples": [
            {
                "k": list(s.k),
                "alpha": s.report.alpha,
                "gamma": s.report.gamma,
                "partials": list(s.report.partials),
                "label": s.report.label,
            }
            for s in samples
        ],
        "timestamp": _timestamp(),
    }
    _emit(dumps_canonical(doc) + "\n", args.out)
    return 0


def _cmd_hinge(args) -> int:
    policy = _policy_from_args(args)
    model = _model_from_args(args)
    if not isinstance(model, HodsmSpec):
        raise ValueError("hinge systems exist for hodsm models only")
    geom = HingeGeometry(nx=args.nx, ny=args.ny, kz=args.kz or 0.0)
    rep = hinge_report(model, geom, policy)
    doc = {
        "model": _model_json(args.model, _model_params(args)),
        "nx": geom.nx,
        "ny": geom.ny,
        "kz": geom.kz,
        "low_set": list(rep.low_set),
        "low_energies": [_complex_json(rep.eigenvalues[i]) for i in rep.low_set],
        "gap_ratio": rep.gap_ratio,
        "gram": [[float(x) for x in row] for row in rep.gram],
        "gram_rank": rep.gram_rank,
        "eigenvalues": [_complex_json(z) for z in rep.eigenvalues],
        "timestamp": _timestamp(),
    }
    if args.out:
        _write_atomic(args.out, dumps_canonical(doc) + "\n")
        stem = args.out[:-5] if args.out.endswith(".json") else args.out
        for i in range(4):
            rows = [
                (x + 1, y + 1, float(rep.intensity_maps[i, x, y]))
                for x in range(geom.nx)
                for y in range(geom.ny)
            ]
            _write_atomic(f"{stem}_state{i}.csv", _csv(rows, "x,y,intensity"))
    else:
        sys.stdout.write(dumps_canonical(doc) + "\n")
    return 0


def _cmd_probe(args) -> int:
    policy = _policy_from_args(args)
    model = _model_from_args(args)
    kind = args.kind
    doc: dict = {
        "kind": kind,
        "model": _model_json(args.model, _model_params(args)),
    }
    if kind in ("lineshape", "splitting"):
        if isinstance(model, LiebSpec):
            k = parse_k(args.k)
        else:
            k = parse_k(args.k) if args.k else (0.0, 0.0, args.kz or 0.0)
        h = bloch_matrix(model, k)
        energy = complex(args.energy or 0.0)
        report = classify_point(h, energy, policy, k_point=k)
        if kind == "lineshape":
            fit = lineshape_exponent(h, energy, report.ell, policy=policy)
            expected = -2.0 * report.ell
        else:
            fit = splitting_exponent(h, energy, report.ell, policy=policy)
            expected = 1.0 / report.ell
        doc.update(
            {
                "k": list(k),
                "ell": report.ell,
                "slope": fit.slope,
                "expected_slope": expected,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "window": list(fit.window),
            }
        )
        if fit.mean_slope is not None:
            doc["mean_slope"] = fit.mean_slope
    elif kind == "decay":
        geom = HingeGeometry(nx=args.nx, ny=args.ny, kz=args.kz or 0.0)
        fit = decay_rate_fit(model, geom, args.corner, args.axis, policy)
        doc.update(
            {
                "corner": fit.corner,
                "axis": fit.axis,
                "ratio": fit.ratio,
                "r_squared": fit.r_squared,
                "cells": list(fit.cells),
            }
        )
    elif kind == "atomistic":
        report = atomistic_classify(model, policy)
        doc["report"] = report_json(
            report, _model_json(args.model, _model_params(args)), None
        )
        doc["report"].pop("timestamp")
    elif kind in SYMMETRY_KINDS:
        geom = None
        if args.nx and args.ny:
            geom = HingeGeometry(nx=args.nx, ny=args.ny, kz=args.kz or 0.0)
        res = symmetry_check(model, kind, geom, policy)
        doc.update(
            {
                "passed": res.passed,
                "max_violation": res.max_violation,
                "witness": res.witness,
            }
        )
    else:
        raise ValueError(f"unknown probe kind {kind!r}")
    doc["timestamp"] = _timestamp()
    _emit(dumps_canonical(doc) + "\n", args.out)
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run(fast=args.fast, stream=sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fepkit",
        description="classify non-Hermitian degeneracies of lattice models",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, model_required=True):
        p.add_argument("--model", required=model_required, choices=MODEL_IDS)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--t", type=float, default=None)
        p.add_argument("--s", type=float, default=None)
        p.add_argument("--phi", type=parse_angle, default=None)
        p.add_argument("--psi", type=parse_angle, default=None)
        p.add_argument("--k", type=str, default=None, help="comma-separated momenta (pi fractions ok)")
        p.add_argument("--kz", type=parse_angle, default=None)
        p.add_argument("--rank-tol", type=float, default=None)
        p.add_argument("--cluster-tol", type=float, default=None)
        p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("classify", help="degeneracy report at one momentum")
    common(p)
    p.add_argument("--energy", type=float, default=None)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("band", help="complex bands along a momentum path (CSV)")
    common(p)
    p.add_argument(
        "--path",
        required=True,
        type=_parse_path,
        help="axis=start:stop:count, e.g. kz=-pi:pi:401",
    )
    p.set_defaults(func=_cmd_band)

    p = sub.add_parser("contour", help="min dispersive |E| on a 2D grid (CSV)")
    common(p)
    p.add_argument("--grid", type=int, default=128)
    p.set_defaults(func=_cmd_contour)

    p = sub.add_parser("scan", help="find and classify zone degeneracies (JSON)")
    common(p)
    p.add_argument("--grid", type=int, default=128)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("ring", help="classify exceptional-ring samples (JSON)")
    common(p)
    p.add_argument("--samples", type=int, default=64)
    p.set_defaults(func=_cmd_ring)

    p = sub.add_parser("hinge", help="open-boundary hinge report (JSON + CSVs)")
    common(p)
    p.add_argument("--nx", type=int, default=20)
    p.add_argument("--ny", type=int, default=20)
    p.set_defaults(func=_cmd_hinge)

    p = sub.add_parser("probe", help="response/decay/symmetry probes (JSON)")
    common(p)
    p.add_argument(
        "--kind",
        required=True,
        choices=("lineshape", "splitting", "decay", "atomistic") + SYMMETRY_KINDS,
    )
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--corner", choices=("A", "B", "C", "D"), default="B")
    p.add_argument("--axis", choices=("x", "y"), default="y")
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--ny", type=int, default=None)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--fast", action="store_true", help="skip the minutes-long hinge checks")
    p.set_defaults(func=_cmd_selftest)

    return parser


def _parse_path(text: str) -> tuple[str, float, float, int]:
    axis, _, spec = text.partition("=")
    parts = spec.split(":")
    if not axis or len(parts) != 3:
        raise argparse.ArgumentTypeError(f"bad path {text!r}; use axis=start:stop:count")
    return axis, parse_angle(parts[0]), parse_angle(parts[1]), int(parts[2])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit(2) for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"fepkit: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal error
        print(f"fepkit: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
