"""Command-line front end.

Commands: ``analyze``, ``sweep``, ``mc``, ``validate``, ``figure``. Exit codes
are 0 on success, 1 when validation fails, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import montecarlo
from .config import ConfigError, parse_assignment, parse_config, resolve_document
from .runner import (
    ANALYZE_COLUMNS,
    OUTPUTS,
    PRESETS,
    VALIDATE_COLUMNS,
    SweepSpec,
    analyze,
    render_csv,
    run_figure_preset,
    run_sweep,
    run_validate,
)

log = logging.getLogger("swiptsec")


def _load_document(args) -> dict:
    doc = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
    for item in args.set or ():
        key, value = parse_assignment(item)
        doc.pop(key + "_db", None)
        if key.endswith("_db"):
            doc.pop(key[:-3], None)
        doc[key] = value
    return resolve_document(doc)


def _parse_values(text: str):
    """Comma list ``1,2,3`` or inclusive range ``start:stop:step``."""
    def num(s):
        v = json.loads(s)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ValueError
        return v

    try:
        if ":" in text:
            start, stop, step = (num(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(round((stop - start) / step))
            vals = [start + i * step for i in range(n + 1)]
            if all(isinstance(v, int) for v in (start, stop, step)):
                return tuple(int(v) for v in vals)
            return tuple(round(v, 12) for v in vals)
        return tuple(num(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {text!r}") from None


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _echo(doc, **extra):
    return {"config": doc, **extra}


def cmd_analyze(args):
    doc = _load_document(args)
    system, numerics = parse_config(doc)
    row = analyze(system, numerics, args.method)
    _emit(render_csv([row], ANALYZE_COLUMNS, _echo(doc, command="analyze", method=args.method)), args.out)
    return 0


def cmd_sweep(args):
    doc = _load_document(args)
    parse_config(doc)
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    spec = SweepSpec(args.param, _parse_values(args.values), outputs)
    rows = run_sweep(doc, None, spec, args.trials, args.seed, args.method, args.jobs)
    echo = _echo(doc, command="sweep", parameter=spec.parameter, values=list(spec.values),
                 outputs=list(outputs), method=args.method, trials=args.trials, seed=args.seed)
    _emit(render_csv(rows, spec.columns(), echo), args.out)
    return 0


def cmd_mc(args):
    doc = _load_document(args)
    system, _ = parse_config(doc)
    trials = args.trials or 100_000
    rows = []
    for name, fn in (("p_out", montecarlo.simulate_secrecy_outage),
                     ("p_t", montecarlo.simulate_transmission_probability)):
        est = fn(system, trials, args.seed, workers=args.jobs)
        rows.append(dict(quantity=name, p_hat=est.p_hat, stderr=est.stderr, ci_low=est.ci_low,
                         ci_high=est.ci_high, n_trials=est.n_trials, seed=est.seed))
    cols = ("quantity", "p_hat", "stderr", "ci_low", "ci_high", "n_trials", "seed")
    _emit(render_csv(rows, cols, _echo(doc, command="mc", trials=trials, seed=args.seed)), args.out)
    return 0


def cmd_validate(args):
    doc = _load_document(args)
    system, numerics = parse_config(doc)
    trials = args.trials or 100_000
    rows = run_validate(system, numerics, trials, args.seed)
    _emit(render_csv(rows, VALIDATE_COLUMNS, _echo(doc, command="validate", trials=trials, seed=args.seed)),
          args.out)
    failed = [r["check"] for r in rows if r["status"] == "FAIL"]
    if failed:
        log.error("validation failed: %s", ", ".join(failed))
        return 1
    return 0


def cmd_figure(args):
    doc = _load_document(args)
    parse_config(doc)
    curves = run_figure_preset(args.preset, doc, args.trials, args.seed, args.method, args.jobs)
    echo = _echo(doc, command="figure", preset=args.preset, trials=args.trials, seed=args.seed,
                 method=args.method)
    if args.out and (os.path.isdir(args.out) or args.out.endswith(os.sep)):
        os.makedirs(args.out, exist_ok=True)
        for curve, (cols, rows) in curves.items():
            path = os.path.join(args.out, f"{args.preset}_{curve}.csv")
            _emit(render_csv(rows, cols, dict(echo, curve=curve)), path)
        return 0
    # one gnuplot data block per curve, blocks separated by two blank lines
    blocks = [render_csv(rows, cols, dict(echo, curve=curve)) for curve, (cols, rows) in curves.items()]
    _emit("\n\n".join(blocks), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        help="override one config key (repeatable; flags beat the file)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (u64)")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--method", choices=("quadrature", "series"), default="quadrature",
                        help="per-antenna evaluator")
    common.add_argument("--jobs", type=int, default=1, help="worker threads")

    parser = argparse.ArgumentParser(prog="swiptsec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="analytic outage and throughput")
    sp = sub.add_parser("sweep", parents=[common], help="sweep one parameter")
    sp.add_argument("--param", required=True, help="config key to sweep, e.g. N or gamma_s_db")
    sp.add_argument("--values", required=True, help="comma list or start:stop:step")
    sp.add_argument("--outputs", default="p_out_analytic", help="comma list from: " + ", ".join(OUTPUTS))
    sub.add_parser("mc", parents=[common], help="Monte Carlo estimates")
    sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo report")
    fp = sub.add_parser("figure", parents=[common], help="figure preset data")
    fp.add_argument("--preset", required=True, choices=PRESETS)
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "mc": cmd_mc,
    "validate": cmd_validate,
    "figure": cmd_figure,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"swiptsec: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"swiptsec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
