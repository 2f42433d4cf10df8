"""Command-line front end: ``brownq {curve,omega,esd,greens,verify}``.

Every command reads one JSON config (see :mod:`brownq.config`), writes its
artifacts into ``--out`` and embeds the config echo in each JSON output.
Outputs depend only on (config, seed), so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, get_field, load_config
from .curve import CURVE_VARS, CurveConfig, DivisibilityError, run_pipeline
from .esd import (DEFAULT_LADDER, EnsembleSpec, Thresholds, build_matrix, classify_estimate,
                  estimate_green, sample_spectrum)
from .omega import GridSpec, trace_omega, verify_against_curve, witnesses_to_rows
from .svg import overlay_svg, zero_contour
from .two_atom import CutError, HyperbolaRectangle, TwoAtomPair, hyperbola_residual, rect_membership

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGENERATE = 2
EXIT_DIVISIBILITY = 3
EXIT_DISAGREE = 4


def _g17(v):
    return format(float(v), ".17g")


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, (int, np.integer)) and not isinstance(v, bool) else _g17(v)
                     for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _two_atom_pair(cfg: RunConfig):
    if len(cfg.mu_p.merged()) == 2 and len(cfg.mu_q.merged()) == 2:
        return TwoAtomPair.from_measures(cfg.mu_p.merged(), cfg.mu_q.merged())
    return None


# ---------------------------------------------------------------------------
# commands


def cmd_curve(cfg: RunConfig, out: Path, system=None) -> int:
    """Exact boundary curve.  ``system`` replaces the built system (test hook)."""
    try:
        ccfg = CurveConfig(cfg.mu_p, cfg.mu_q)
    except ValueError as err:
        print(f"curve: {err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        res = run_pipeline(ccfg, system=system)
    except DivisibilityError as err:
        _write_json(out / "curve.json", {"config": cfg.echo(), "error": "divisibility violation",
                                         "remainder_terms": len(err.remainder)})
        print(f"curve: {err}", file=sys.stderr)
        return EXIT_DIVISIBILITY
    doc = {
        "config": cfg.echo(),
        "variables": list(CURVE_VARS),
        "report": res.report(),
        "f1": res.f1.to_json_terms(CURVE_VARS),
        "f2": res.f2.to_json_terms(CURVE_VARS),
        "re_f2": res.re_f2.to_json_terms(CURVE_VARS),
        "im_f2": res.im_f2.to_json_terms(CURVE_VARS),
        "f": None if res.f is None else res.f.to_json_terms(CURVE_VARS),
        "f_normalized": None if res.f is None else res.f_normalized.to_json_terms(CURVE_VARS),
    }
    _write_json(out / "curve.json", doc)
    lines = [f"n = {ccfg.n}, k = {ccfg.k}", f"degenerate: {res.degenerate}", "",
             f"f2 = {res.f2}", "", f"f = {res.f_normalized if res.f is not None else 'none'}"]
    (out / "curve.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_DEGENERATE if res.degenerate else EXIT_OK


def _grid(cfg: RunConfig) -> GridSpec:
    s = cfg.section("omega")
    return GridSpec(get_field(s, "re_range", "pair", (-3.0, 3.0), "omega"),
                    get_field(s, "im_range", "pair", (-3.0, 3.0), "omega"),
                    get_field(s, "resolution", "ipair", (400, 400), "omega"),
                    get_field(s, "tolerance", float, 1e-8, "omega"),
                    refine=get_field(s, "refine", int, 4, "omega"))


def _omega_summary(cfg, trace):
    summary = trace.summary()
    pair = _two_atom_pair(cfg)
    if pair is not None and len(trace):
        z = trace.z()
        summary["two_atom"] = {
            "max_hyperbola_residual": float(max(abs(hyperbola_residual(pair, w)) for w in z)),
            "all_in_open_rectangle": bool(all(rect_membership(pair, w, open=True) for w in z)),
        }
    return summary


def cmd_omega(cfg: RunConfig, out: Path) -> int:
    grid = _grid(cfg)
    trace = trace_omega(cfg.mu_p, cfg.mu_q, grid)
    _write_csv(out / "omega_witnesses.csv",
               ["x", "y", "re_g", "im_g", "m", "residual", "branch_j", "branch_l"],
               witnesses_to_rows(trace.witnesses))
    _write_json(out / "omega_summary.json",
                {"config": cfg.echo(), "grid": {"re_range": grid.re_range, "im_range": grid.im_range,
                                                "resolution": grid.resolution,
                                                "tolerance": grid.tolerance, "refine": grid.refine},
                 "summary": _omega_summary(cfg, trace)})
    return EXIT_OK


def _ensemble(cfg: RunConfig, name, n_default, replicas_default=1) -> EnsembleSpec:
    s = cfg.section(name)
    return EnsembleSpec(cfg.mu_p, cfg.mu_q, get_field(s, "n", int, n_default, name), cfg.seed,
                        get_field(s, "replicas", int, replicas_default, name))


def cmd_esd(cfg: RunConfig, out: Path, record_timing=False) -> int:
    spec = _ensemble(cfg, "esd", 2000)
    sample = sample_spectrum(spec)
    ev = sample.eigenvalues
    _write_csv(out / "spectrum.csv", ["re", "im"], zip(ev.real, ev.imag))
    side = {"config": cfg.echo(), "spec": spec.to_dict(), "seed": cfg.seed, "count": len(ev),
            "max_abs": float(np.abs(ev).max()), "bound": spec.bound()}
    if record_timing:
        side["wall_time"] = sample.wall_time
    _write_json(out / "spectrum.json", side)
    return EXIT_OK


def cmd_greens(cfg: RunConfig, out: Path) -> int:
    s = cfg.section("greens")
    spec = _ensemble(cfg, "greens", 1000, 8)
    ladder = get_field(s, "ladder", "floats", list(DEFAULT_LADDER), "greens")
    points = get_field(s, "points", "points", None, "greens")
    pair = _two_atom_pair(cfg)
    if points is None:
        if pair is None:
            raise ConfigError("greens.points", "required unless both measures have two atoms")
        points = list(pair.corners)
    th = Thresholds.from_dict(s.get("thresholds"))
    method = s.get("method", "auto")
    mats = [build_matrix(spec, r) for r in range(spec.replicas)]
    ests = estimate_green(spec, points, ladder, method=method, matrices=mats)
    records = []
    for est in ests:
        rec = est.to_dict()
        if len(ladder) >= 3:
            rep = classify_estimate(est, th)
            rec.update({"label": rep.label.value, "slope_B": rep.slope_B, "slope_ell": rep.slope_ell,
                        "halving_growth": rep.halving_growth})
        records.append(rec)
    _write_json(out / "greens.json", {"config": cfg.echo(), "spec": spec.to_dict(),
                                      "thresholds": th.__dict__, "points": records})
    return EXIT_OK


def _curve_contour(f, box, n=241):
    xs = np.linspace(box[0], box[1], n)
    ys = np.linspace(box[2], box[3], n)
    X, Y = np.meshgrid(xs, ys)
    F = np.real(f.eval({"x": X, "y": Y}, scaled=True))
    return zero_contour(F, xs, ys)


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    """Curve, Omega and ESD side by side, with the cross-check metrics."""
    s = cfg.section("verify")
    dist = get_field(s, "distance", float, 0.05, "verify")
    report = {"config": cfg.echo()}
    ok = True
    trace = trace_omega(cfg.mu_p, cfg.mu_q, _grid(cfg))
    z = trace.z()
    report["omega"] = _omega_summary(cfg, trace)
    curve = None
    if cfg.exact:
        curve = run_pipeline(CurveConfig(cfg.mu_p, cfg.mu_q))
        report["curve"] = curve.report()
        if not curve.degenerate and len(z):
            v = verify_against_curve(trace.witnesses, curve)
            report["curve"]["witness_max_score"] = v["max_score"]
            report["curve"]["witness_mean_score"] = v["mean_score"]
            ok &= v["max_score"] <= 1e-6
    spec = _ensemble(cfg, "verify", 2000)
    ev = sample_spectrum(spec).eigenvalues
    pair = _two_atom_pair(cfg)
    esd = {"n": spec.n}
    if pair is not None:
        H = HyperbolaRectangle.from_pair(pair)
        frac = float((H.distance(ev) <= dist).mean())
        esd["fraction_within_distance_of_H_R"] = frac
        esd["distance"] = dist
        ok &= frac >= 0.98
        ok &= report["omega"].get("two_atom", {}).get("max_hyperbola_residual", 0.0) <= 1e-8
    elif len(z):
        from scipy.spatial import cKDTree

        d, _ = cKDTree(np.column_stack([z.real, z.imag])).query(np.column_stack([ev.real, ev.imag]))
        esd["fraction_within_distance_of_omega"] = float((d <= dist).mean())
        esd["distance"] = dist
    report["esd"] = esd
    report["agree"] = bool(ok)
    _write_json(out / "verify.json", report)
    allz = np.concatenate([ev, z]) if len(z) else ev
    box = (allz.real.min() - 0.1, allz.real.max() + 0.1, allz.imag.min() - 0.1, allz.imag.max() + 0.1)
    segs = _curve_contour(curve.f, box) if curve is not None and curve.f is not None else []
    (out / "overlay.svg").write_text(overlay_svg(ev, z, segs), encoding="utf-8")
    return EXIT_OK if ok else EXIT_DISAGREE


COMMANDS = {"curve": cmd_curve, "omega": cmd_omega, "esd": cmd_esd, "greens": cmd_greens,
            "verify": cmd_verify}


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("BROWNQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("BROWNQ_THREADS", f"not an integer: {env!r}") from None
    return None


def build_parser():
    ap = argparse.ArgumentParser(prog="brownq", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"brownq {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=".", help="output directory (created if missing)")
    ap.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, help="cap on BLAS/OpenMP threads (default: BROWNQ_THREADS)")
    ap.add_argument("--record-timing", action="store_true",
                    help="esd: add wall time to the sidecar (breaks byte-identical reruns)")
    return ap


def main(argv=None, _system=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed", "expected an unsigned 64-bit integer")
            cfg.seed = args.seed
        threads = _threads(args)
    except (ConfigError, OSError) as err:
        print(f"brownq: {err}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        if threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                code = _dispatch(args, cfg, out, _system)
        else:
            code = _dispatch(args, cfg, out, _system)
    except (ConfigError, CutError, ValueError, np.linalg.LinAlgError) as err:
        print(f"brownq {args.command}: {err}", file=sys.stderr)
        return EXIT_ERROR
    print(f"brownq {args.command}: exit {code} in {time.perf_counter() - t0:.1f} s, output in {out}",
          file=sys.stderr)
    return code


def _dispatch(args, cfg, out, system):
    if args.command == "curve":
        return cmd_curve(cfg, out, system=system)
    if args.command == "esd":
        return cmd_esd(cfg, out, record_timing=args.record_timing)
    return COMMANDS[args.command](cfg, out)


if __name__ == "__main__":
    sys.exit(main())
