"""Command-line entry point ``veloq``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .compiler import ArrayGeometry, CircuitIR, Limits, compile_ir, crosstalk_report
from .config import load_config
from .errors import CompileError, VeloqError
from .kinematics import zone_transfer_cost
from .pulsephysics import LAMBDA_CLOCK, write_first_zero_curve, write_spectator_curve
from .runners import RUNNERS, reproduce


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="veloq", description="Velocity-zone neutral-atom toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reproduce", help="run a figure runner (or all)")
    r.add_argument("figure", choices=sorted(RUNNERS) + ["all"])
    r.add_argument("--config")
    r.add_argument("--seed", type=int)
    r.add_argument("--shots", type=int)
    r.add_argument("--out")
    r.add_argument("--noise", choices=["paper-like", "off"])

    c = sub.add_parser("compile", help="compile a circuit IR onto a geometry")
    c.add_argument("--ir", required=True)
    c.add_argument("--geometry", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--config")
    c.add_argument("--crosstalk", help="optional JSON file for the per-atom crosstalk report")

    cv = sub.add_parser("curve", help="write an analytic curve")
    cv.add_argument("kind", choices=["spectator", "first-zero"])
    cv.add_argument("--lambda", dest="wavelength", type=float, default=LAMBDA_CLOCK)
    cv.add_argument("--out", required=True)
    cv.add_argument("--points", type=int, default=601)

    z = sub.add_parser("zones", help="zone-transfer time and distance")
    z.add_argument("--dv", type=float, required=True)
    z.add_argument("--jerk", type=float, required=True)
    return p


def _reproduce(args) -> int:
    cfg = load_config(args.config)
    if args.noise:
        cfg = cfg.with_noise(args.noise)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.shots is not None:
        cfg = replace(cfg, shots=args.shots)
    out = args.out or cfg.out_dir
    summaries = reproduce(args.figure, cfg, out)
    status = 0
    for s in summaries:
        failed = [c for c in s["checks"] if not c["pass"]]
        print(f"{s['figure']}: {'PASS' if not failed else 'FAIL'} ({len(s['checks'])} checks)")
        for c in failed:
            print(f"  {c['name']}: got {c['value']!r}, expected {c['target']}", file=sys.stderr)
            status = 1
    return status


def _compile(args) -> int:
    cfg = load_config(args.config)
    with open(args.ir) as fh:
        ir = CircuitIR.from_json_obj(json.load(fh))
    with open(args.geometry) as fh:
        geo = ArrayGeometry.from_json_obj(json.load(fh))
    limits = Limits(jerk=cfg.physics["jerk"])
    try:
        schedule = compile_ir(ir, geo, limits=limits)
    except CompileError as exc:
        print(f"compile error: {exc}", file=sys.stderr)
        return 1
    with open(args.out, "w") as fh:
        fh.write(schedule.to_json() + "\n")
    if args.crosstalk:
        with open(args.crosstalk, "w") as fh:
            json.dump({str(k): v for k, v in crosstalk_report(schedule).items()}, fh, indent=1,
                      sort_keys=True)
    print(f"{len(schedule.events)} events, duration {schedule.duration:.6g} s")
    return 0


def _curve(args) -> int:
    if args.kind == "spectator":
        write_spectator_curve(args.out, np.linspace(0.0, 3.0, args.points))
    else:
        write_first_zero_curve(args.out, np.linspace(5e3, 200e3, args.points), args.wavelength)
    return 0


def _zones(args) -> int:
    t, d = zone_transfer_cost(args.dv, args.jerk)
    print("dv_mps,jerk_m_s3,time_s,distance_m")
    print(f"{args.dv!r},{args.jerk!r},{t!r},{d!r}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return {"reproduce": _reproduce, "compile": _compile, "curve": _curve,
                "zones": _zones}[args.command](args)
    except VeloqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
