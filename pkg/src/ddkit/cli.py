"""Command-line front end.

Machine-readable output goes to stdout; everything else (diagnostics,
progress) goes to stderr.  Exit codes: 0 ok, 2 one-nonzero-digit constraint
violation, 3 regime error, 4 config error, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments
from .bounds import epg_bound
from .errors import ConfigError, ConstraintViolation, DDKitError, RegimeError
from .sequence import (
    PaleyVector,
    cancellation_order,
    compile_cpdd,
    cpdd_to_gwdd,
    gwdd_to_cpdd,
    owdd_enumerate,
    owdd_h,
    owdd_l,
    owdd_slot_count,
    pulse_count,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONSTRAINT = 2
EXIT_REGIME = 3
EXIT_CONFIG = 4


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_paley(text: str) -> PaleyVector:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--paley expects nx,ny,nz; got {text!r}")
    return PaleyVector(*(int(p) for p in parts))


def _resolve_string(args) -> str:
    if (args.cpdd is None) == (args.paley is None):
        raise ValueError("exactly one of --cpdd/--paley is required")
    if args.cpdd is not None:
        return args.cpdd
    return gwdd_to_cpdd(_parse_paley(args.paley))


def _cmd_construct(args) -> int:
    s = _resolve_string(args)
    sched = compile_cpdd(s, args.tau0)
    summary = (
        f"N_T={sched.n_slots} N={pulse_count(sched)} CO={cancellation_order(s)}"
    )
    payload = json.dumps(sched.to_json_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        print(summary)
    else:
        _log(summary)
        print(payload)
    return EXIT_OK


def _cmd_convert(args) -> int:
    if (args.cpdd is None) == (args.paley is None):
        raise ValueError("exactly one of --cpdd/--paley is required")
    if args.cpdd is not None:
        v = cpdd_to_gwdd(args.cpdd)
        print(json.dumps(list(v)))
    else:
        print(gwdd_to_cpdd(_parse_paley(args.paley)))
    return EXIT_OK


def _cmd_co(args) -> int:
    print(cancellation_order(args.cpdd))
    return EXIT_OK


def _cmd_owdd(args) -> int:
    if args.enumerate:
        members = list(owdd_enumerate(args.alpha))
        if args.limit:
            members = members[: args.limit]
        for m in members:
            print(m)
        return EXIT_OK
    info = {
        "alpha": args.alpha,
        "n_slots": owdd_slot_count(args.alpha),
        "h": owdd_h(args.alpha),
        "l": owdd_l(args.alpha),
    }
    print(json.dumps(info, indent=2))
    return EXIT_OK


def _cmd_bound(args) -> int:
    bound = epg_bound(args.cpdd, args.tau0, args.beta, args.j, mode=args.mode)
    print(json.dumps(bound.to_json_dict(), indent=2))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    s = _resolve_string(args)
    config = experiments.ScanConfig(
        beta_hz=args.beta,
        j_hz=args.j,
        tau0_s=args.tau0,
        master_seed=args.seed,
        n_bath=args.n_bath,
        realizations=args.realizations,
        orders=(max(1, cancellation_order(s)),),
    )
    order = config.orders[0]
    losses = []
    epgs = []
    for index in range(config.realizations):
        res = experiments._run_sequence_realization(config, s, order, index)
        losses.append(res.loss)
        if res.converged:
            epgs.append(res.epg)
    losses = np.asarray(losses)
    report = {
        "sequence": s,
        "n_slots": 1 << len(s),
        "realizations": config.realizations,
        "mean_loss": float(losses.mean()),
        "std_loss": float(losses.std()),
        "min_loss": float(losses.min()),
        "max_loss": float(losses.max()),
        "n_ok": len(epgs),
        "n_excluded": int(config.realizations - len(epgs)),
        "mean_epg": float(np.mean(epgs)) if epgs else None,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_scan(args) -> int:
    config = experiments.ScanConfig.from_file(args.config)
    _log(
        f"scanning families={list(config.families)} orders={list(config.orders)} "
        f"realizations={config.realizations}"
    )
    records = experiments.run_scan(config, max_workers=args.workers)
    experiments.persist(records, args.out, format=args.format)
    _log(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddkit",
        description="Digital dynamical-decoupling toolkit: Walsh/CPDD sequence "
        "construction, analytic error bounds and exact spin-bath scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="compile a sequence into a pulse schedule")
    p.add_argument("--cpdd", help="projection string over 0xyz, innermost letter first")
    p.add_argument("--paley", help="Paley-order triple nx,ny,nz")
    p.add_argument("--tau0", type=float, default=1.0, help="slot duration in seconds")
    p.add_argument("--out", help="write the schedule JSON here")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("convert", help="convert between string and Paley-triple forms")
    p.add_argument("--cpdd")
    p.add_argument("--paley")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("co", help="cancellation order of a projection string")
    p.add_argument("--cpdd", required=True)
    p.set_defaults(func=_cmd_co)

    p = sub.add_parser("owdd", help="slot-optimal sequences at a cancellation order")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--enumerate", action="store_true", help="list class members")
    p.add_argument("--limit", type=int, default=0, help="cap enumerated output")
    p.set_defaults(func=_cmd_owdd)

    p = sub.add_parser("bound", help="analytic error-per-gate bound report")
    p.add_argument("--cpdd", required=True)
    p.add_argument("--beta", type=float, required=True, help="bath-only norm in 1/s")
    p.add_argument("--j", type=float, required=True, help="interaction norm in 1/s")
    p.add_argument("--tau0", type=float, required=True, help="slot duration in seconds")
    p.add_argument("--mode", choices=["sum", "dominant"], default="sum")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("simulate", help="small fidelity-loss ensemble for one sequence")
    p.add_argument("--cpdd")
    p.add_argument("--paley")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--j", type=float, required=True)
    p.add_argument("--tau0", type=float, required=True)
    p.add_argument("--n-bath", type=int, default=3)
    p.add_argument("--realizations", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("scan", help="run an ensemble scan from a config file")
    p.add_argument("--config", required=True, help="JSON or TOML scan config")
    p.add_argument("--out", required=True, help="output table path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--workers", type=int, default=None, help="cap worker processes")
    p.set_defaults(func=_cmd_scan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConstraintViolation as exc:
        _log(f"constraint violation: {exc}")
        return EXIT_CONSTRAINT
    except RegimeError as exc:
        _log(f"regime error: {exc}")
        return EXIT_REGIME
    except (ConfigError, FileNotFoundError) as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except (DDKitError, ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
