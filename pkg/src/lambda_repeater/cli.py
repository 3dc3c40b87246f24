"""Command-line entry point: ``lambda-repeater {sweep,figure,validate,dump-state}``.

Exit codes: 0 success, 1 validation failure, 2 config or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dynamics import ModelParams
from .errors import ConfigError, UnknownFigureError, ZeroNormError
from .protocol import STAGE_ONE_OUTCOMES, run_protocol, stage_one_state, stage_two_state
from .sweep import FIGURES, load_config, reproduce_figure, run_sweep
from .validation import validate

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _write_series(series, out_dir) -> list[str]:
    return [str(s.write(out_dir)) for s in series]


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.output
    if out is None:
        raise ConfigError("no output directory: set 'output' in the config or pass --out")
    for path in _write_series(run_sweep(cfg), out):
        print(path)
    return EXIT_OK


def cmd_figure(args) -> int:
    for path in _write_series(reproduce_figure(args.id, args.points), args.out):
        print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate("full" if args.full else "fast", flip_lambda2=args.flip_lambda2)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}: observed {c['observed']:.3e} "
              f"(tolerance {c['tolerance']:.1e})")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_dump_state(args) -> int:
    p = ModelParams(args.g1, args.g2, args.Delta, args.delta, args.Gamma, args.gamma)
    if args.stage == "one":
        doc = stage_one_state(p, args.gt).to_json()
    elif args.stage == "two":
        bs = stage_two_state(args.case, p, args.gt, args.gtau)
        doc = bs.register().to_json()
        doc["kets"] = list(bs.kets)
    else:
        pair = run_protocol(p, args.gt, args.gtau, args.case, args.outcome)
        doc = pair.state.to_json()
        doc.update(negativity=pair.negativity, success_probability=pair.success_probability)
    doc["params"] = p.as_dict()
    json.dump(doc, sys.stdout, indent=1)
    print()
    return EXIT_OK


def _case(text: str):
    if text.isdigit():
        return int(text)
    parts = text.split(",")
    if len(parts) != 2 or any(x not in STAGE_ONE_OUTCOMES for x in parts):
        raise argparse.ArgumentTypeError("case is 1..8 or LEFT,RIGHT with labels Psi, PsiP, PsiPP, PsiPPP")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lambda-repeater", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a JSON-configured sweep over g*tau")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (overrides the config's 'output')")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("figure", help="write the curve set of one figure panel as CSV")
    f.add_argument("id", help=", ".join(FIGURES))
    f.add_argument("--out", required=True)
    f.add_argument("--points", type=int, default=600)
    f.set_defaults(func=cmd_figure)

    v = sub.add_parser("validate", help="run the self-checks and write a JSON report")
    v.add_argument("--full", action="store_true", help="include the cavity-model comparison")
    v.add_argument("--out", help="report path")
    v.add_argument("--flip-lambda2", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("dump-state", help="print a register as JSON (debugging)")
    d.add_argument("--stage", choices=("one", "two", "final"), default="final")
    d.add_argument("--case", type=_case, default=1)
    d.add_argument("--outcome", default="eg")
    d.add_argument("--gt", type=float, default=2.0)
    d.add_argument("--gtau", type=float, default=3.0)
    for name, default in (("g1", 1.0), ("g2", 2.0), ("Delta", 2.0), ("delta", 2.0),
                          ("Gamma", 4.0), ("gamma", 0.0)):
        d.add_argument(f"--{name}", type=float, default=default)
    d.set_defaults(func=cmd_dump_state)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, UnknownFigureError, OSError, ValueError, ZeroNormError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
