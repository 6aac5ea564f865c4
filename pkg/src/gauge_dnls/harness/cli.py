"""``gauge-dnls`` command line: exit 0 when every contract passes, 1 on a contract failure, 2 on usage errors."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..trajectory import dump_trajectory
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import run
from .gate import gate_json, run_gate
from .report import worker_count

EXIT_OK, EXIT_CONTRACT, EXIT_USAGE = 0, 1, 2

SUBCOMMANDS = {
    "solve": "solve",
    "converge-eps": "eps_convergence",
    "joint-limit": "joint_limit",
    "bona-smith": "bona_smith",
    "conserve": "conservation",
    "lipschitz": "lipschitz_flow",
    "envelope": "envelope",
    "strichartz": "strichartz",
    "compare": "direct_vs_gauged",
}


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment config (defaults are used when omitted)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current directory)")
    common.add_argument("--seed", type=_seed, help="override the config seed")
    common.add_argument("--format", choices=("csv", "json"), default="json", help="report format")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    parser = argparse.ArgumentParser(prog="gauge-dnls", description="Gauge-transform workbench for quadratic derivative NLS.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, kind in SUBCOMMANDS.items():
        sub.add_parser(name, parents=[common], help=f"run a {kind} experiment")
    sub.add_parser("gate", parents=[common], help="run the full acceptance suite")
    return parser


def _resolve(args, kind: str) -> ExperimentConfig:
    cfg = load_config(args.config, kind) if args.config is not None else ExperimentConfig.from_dict({"kind": kind})
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _run_experiment(args, kind: str, say) -> int:
    cfg = _resolve(args, kind)
    worker_count()  # validate the environment before doing any work
    rep, extra = run(cfg)
    out = Path(args.out)
    written = rep.write(out, args.format, stem=f"{kind}_report")
    if kind == "conservation" and extra is not None:
        p = out / "conservation.csv"
        extra.to_csv(p)
        written.append(p)
    elif kind == "solve":
        p = out / "trajectory.csv"
        extra.to_csv(p)
        f = out / "fields.json"
        f.write_text(dump_trajectory(extra))
        written += [p, f]
    elif kind == "envelope":
        p = out / "envelope.json"
        extra.to_json(p)
        written.append(p)
    for c in rep.contracts:
        say(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.value:.6g} {c.relation} {c.threshold:.6g}")
    for f in rep.failures:
        say(f"[FAIL] {f['point']}: {f['status']} {f['message']}")
    for p in written:
        say(f"wrote {p}")
    return EXIT_OK if rep.passed else EXIT_CONTRACT


def _run_gate(args, say) -> int:
    if args.config is not None:
        raise UsageError("gate takes no --config; it runs fixed acceptance settings")
    if args.format != "json":
        raise UsageError("gate reports are JSON only")
    worker_count()
    seed = 0 if args.seed is None else args.seed
    results, reports = run_gate(seed, emit=say)
    out = Path(args.out)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    (out / "gate.json").write_text(gate_json(results, seed))
    for name, text in sorted(reports.items()):
        (out / "reports" / f"{name}.json").write_text(text)
    say(f"wrote {out / 'gate.json'}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CONTRACT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    say = (lambda _msg: None) if args.quiet else print
    try:
        if args.command == "gate":
            return _run_gate(args, say)
        return _run_experiment(args, SUBCOMMANDS[args.command], say)
    except (ConfigError, UsageError, ValueError) as exc:
        print(f"gauge-dnls: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
