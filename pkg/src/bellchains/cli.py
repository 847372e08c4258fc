"""Command-line front end: ``bellchains {verify,simulate,optimize,show-state}``.

Exit codes: 0 all confirmed, 2 something refuted, 3 only ambiguities left,
1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import claims
from .chsh import PRESETS, Sex, all_heterosexual_pairs, gluing_index, roster, xi_exact
from .optimize import Objective, StrategySpace, optimize, result_json
from .qcore import format_state, parse_state
from .synthesis import ProtocolConfig, exact_glue_fraction, mc_gluing_indices, synthesize_chains, write_trace_csv

EXIT_USAGE = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--preset", default="calibrated", help=f"calibrated or one of {', '.join(PRESETS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--length", type=int, default=1000, help="chain length L")
    p.add_argument("--tolerance", type=float, default=None, help="tolerance for values quoted to a few decimals")
    p.add_argument("--format", choices=sorted(claims.FORMATS), default="text")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", type=Path, default=None, help="flat 'key = value' file; flags override it")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="bellchains", description="CHSH-controlled chain synthesis: simulation and claim checks")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="evaluate every registered claim")
    v.add_argument("--restarts", type=int, default=64)
    v.add_argument("--timestamp", default=None, help="manifest timestamp (default: SOURCE_DATE_EPOCH or now)")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo glue fractions for one state")
    s.add_argument("--state", default="t", help="registry id (see show-state all)")
    s.add_argument("--state-text", default=None, help="ket text; roster follows the 2/3/4-party defaults")
    s.add_argument("--pair", action="append", default=None, help="pair label such as Alice-Bob (repeatable)")
    s.add_argument("--trace", type=Path, default=None, help="write the per-monoblock CSV trace here")

    o = sub.add_parser("optimize", parents=[common], help="optimize one objective over one strategy space")
    o.add_argument("--objective", choices=["single", "sum", "differentiation", "minmax"], default="sum")
    o.add_argument("--space", choices=["unrestricted", "biphoton", "biphoton-bell", "classical"], default="unrestricted")
    o.add_argument("--participants", type=int, choices=[2, 3, 4], default=3)
    o.add_argument("--partition", default=None, help="qubit blocks, e.g. '02|1' or '02|13'")
    o.add_argument("--pairs", default=None, help="comma-separated pair labels; the first is legal for differentiation")
    o.add_argument("--restarts", type=int, default=64)

    sh = sub.add_parser("show-state", parents=[common], help="print a registry state and its pair indices")
    sh.add_argument("state_id", nargs="?", default="all")
    return parser


def _config_defaults(path: Path, parser: argparse.ArgumentParser) -> dict[str, str]:
    cp = configparser.ConfigParser()
    try:
        cp.read_string("[bellchains]\n" + path.read_text())
    except (OSError, configparser.Error) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    known = {a.dest for a in parser._actions}
    out = {}
    for key, value in cp["bellchains"].items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} in {path}")
        out[dest] = value
    return out


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**_config_defaults(args.config, sub))
        args = parser.parse_args(argv)
    return args


ROSTERS = {2: claims.DUO, 3: claims.THREE, 4: claims.FOUR}


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _tolerances(args) -> dict[str, float] | None:
    return None if args.tolerance is None else {"quoted": args.tolerance}


def _timestamp(explicit: str | None) -> str:
    if explicit:
        return explicit
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def cmd_verify(args) -> int:
    report = claims.verify_all(
        args.preset, args.seed, args.trials, args.length, _tolerances(args), args.restarts, args.workers,
        _timestamp(args.timestamp),
    )
    _emit(claims.emit_report(report, args.format), args.out)
    return report.exit_code


def _select_pairs(pairs, labels):
    if not labels:
        return list(pairs)
    by_label = {p.label.lower(): p for p in pairs}
    try:
        return [by_label[lab.strip().lower()] for lab in labels]
    except KeyError as e:
        raise UsageError(f"unknown pair {e.args[0]!r}; choose from {', '.join(p.label for p in pairs)}") from None


def cmd_simulate(args) -> int:
    preset, _ = claims.resolve_preset(args.preset)
    if args.state_text:
        state = parse_state(args.state_text)
        people = ROSTERS.get(state.num_qubits)
        if people is None:
            raise UsageError("--state-text needs 2 to 4 qubits")
        state_id = "custom"
    else:
        entry = claims.lookup_state(args.state)
        state, people, state_id = entry.state, entry.participants, entry.id
    pairs = _select_pairs(all_heterosexual_pairs(people), args.pair)
    cfg = ProtocolConfig(state, people, preset, args.length, args.trials, args.seed)
    est = mc_gluing_indices(cfg, pairs, args.workers)
    if args.trace is not None:
        args.trace.write_text(write_trace_csv(synthesize_chains(cfg, args.workers)))
    rows = [
        {
            "state_id": state_id, "pair": p.label, "preset": preset.name, "L": cfg.chain_length,
            "trials": cfg.trials, "seed": cfg.master_seed, "estimate": est[p.label][0],
            "stderr": est[p.label][1], "exact": exact_glue_fraction(state, p, preset),
        }
        for p in pairs
    ]
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    elif args.format == "csv":
        keys = list(rows[0])
        text = ",".join(keys) + "\n" + "".join(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in keys) + "\n" for r in rows)
    else:
        head = f"{state_id}  preset={preset.name}  L={cfg.chain_length}  trials={cfg.trials}  seed={cfg.master_seed}\n"
        text = head + "".join(
            f"  {r['pair']:16s} estimate={r['estimate']:.6f} +- {r['stderr']:.6f}  exact={r['exact']:.6f}  "
            f"z={(r['estimate'] - r['exact']) / r['stderr'] if r['stderr'] else 0.0:+.2f}\n"
            for r in rows
        )
    _emit(text, args.out)
    return 0


def _space(args, n: int) -> StrategySpace:
    if args.space == "unrestricted":
        return StrategySpace.unrestricted()
    if args.space == "classical":
        return StrategySpace.classical()
    if not args.partition:
        raise UsageError("--partition is required for biphoton spaces")
    blocks = [tuple(int(c) for c in b.strip()) for b in args.partition.split("|")]
    return StrategySpace.biphoton(blocks, args.space == "biphoton-bell")


def cmd_optimize(args) -> int:
    preset, _ = claims.resolve_preset(args.preset)
    people = ROSTERS[args.participants]
    labels = args.pairs.split(",") if args.pairs else None
    pairs = _select_pairs(all_heterosexual_pairs(people), labels)
    if args.objective == "single":
        objective = Objective.single_pair_xi(pairs[0])
    elif args.objective == "sum":
        objective = Objective.sum_index(pairs)
    elif args.objective == "differentiation":
        objective = Objective.differentiation(pairs[0], pairs[1:])
    else:
        objective = Objective.min_max_index(pairs)
    space = _space(args, len(people))
    kw = {} if space.kind.value == "classical" or (space.kind.value == "unrestricted" and objective.is_linear) else {
        "restarts": args.restarts, "seed": args.seed}
    res = optimize(objective, space, people, preset, **kw)
    if args.format == "json":
        text = result_json(objective, space, preset, res) + "\n"
    else:
        arg = format_state(res.argmax, digits=6, atol=1e-7) if hasattr(res.argmax, "amplitudes") else res.argmax
        text = (
            f"{objective.label} over {space.label} ({preset.name})\n"
            f"  value    = {res.value:.12f}\n  method   = {res.method} (restarts {res.restarts_used})\n"
            f"  residual = {res.residual:.3e}\n  argmax   = {arg}\n"
        )
    _emit(text, args.out)
    return 0


def cmd_show_state(args) -> int:
    preset, _ = claims.resolve_preset(args.preset)
    entries = claims.load_registry() + [claims.TRIPLET] if args.state_id == "all" else [claims.lookup_state(args.state_id)]
    lines = []
    for e in entries:
        people = ", ".join(f"{p.id}({'F' if p.sex is Sex.FIRST else 'S'})" for p in e.participants)
        lines.append(f"{e.id:8s} [{e.group}] {format_state(e.state, digits=6)}")
        lines.append(f"{'':8s} roster: {people}")
        for p in e.pairs:
            claimed = e.claim(p)
            idx = gluing_index(xi_exact(e.state, p, preset))
            lines.append(f"{'':8s}   {p.label:14s} index={idx:.6f}  stated={'-' if claimed is None else claimed}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


COMMANDS = {"verify": cmd_verify, "simulate": cmd_simulate, "optimize": cmd_optimize, "show-state": cmd_show_state}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError, IndexError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"bellchains: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
