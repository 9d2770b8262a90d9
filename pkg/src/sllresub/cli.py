"""Command line front end.

Subcommands: partition, resynth, equiv, metrics, split, flow. Every flag
can be overridden by an environment variable named SLLRESUB_<FLAG>
(dashes as underscores, upper case), e.g. SLLRESUB_SEED=7.

Exit codes: 0 success/equivalent, 1 verification counterexample,
2 usage or stage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bench
from .equiv import EquivError, check_equivalence
from .flow import FlowConfig, FlowError, run_flow, split_per_die
from .metrics import (MetricsError, load_placement, load_q_table,
                      report as metrics_report)
from .netlist import (BlifParseError, NetlistError, parse_blif_file, write_blif,
                      write_blif_file)
from .partition import (PartitionConfig, PartitionError, assignment_for,
                        cut_size, load_assignment, save_assignment)
from .resynth import ResynConfig, resynthesize
from .windows import ResynthError

_ENV_PREFIX = "SLLRESUB_"

_MODE_NAMES = {"fm": "fm_mincut", "hash": "hash_label", "file": "external_file"}


def _envd(flag: str, default, cast=str):
    raw = os.environ.get(_ENV_PREFIX + flag.upper().replace("-", "_"))
    if raw is None:
        return default
    if cast is bool:
        return raw.lower() not in ("0", "false", "no", "")
    return cast(raw)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--k-max", type=int, default=_envd("k-max", 6, int),
                   help="LUT size bound enforced at parse (default 6)")
    p.add_argument("--seed", type=int, default=_envd("seed", 0, int))
    p.add_argument("--verbose", action="store_true",
                   default=_envd("verbose", False, bool))


def _add_partition_flags(p: argparse.ArgumentParser):
    p.add_argument("--dies", type=int, default=_envd("dies", 2, int))
    p.add_argument("--ub", type=float, default=_envd("ub", 1.25, float),
                   help="imbalance upper bound (default 1.25)")
    p.add_argument("--partition-mode", choices=("fm", "hash", "file"),
                   default=_envd("partition-mode", "fm"))
    p.add_argument("--partition-file", default=_envd("partition-file", None))


def _add_resyn_flags(p: argparse.ArgumentParser):
    p.add_argument("--d1", type=int, default=_envd("d1", 2, int))
    p.add_argument("--d2", type=int, default=_envd("d2", 8, int))
    p.add_argument("--passes", type=int, default=_envd("passes", 1, int),
                   help="sweep passes; -1 repeats until no commit")
    p.add_argument("--window-pi-cap", type=int, default=_envd("window-pi-cap", 14, int))
    p.add_argument("--divisor-cap", type=int, default=_envd("divisor-cap", 150, int))
    p.add_argument("--max-augment", type=int, default=_envd("max-augment", 1, int))
    p.add_argument("--freeze-die", type=int, default=_envd("freeze-die", None,
                                                           lambda s: int(s)))
    p.add_argument("--inject-care", default=_envd("inject-care", None),
                   help="test hook: care predicate BLIF over primary inputs")
    p.add_argument("--no-verify-commits", action="store_true",
                   default=_envd("no-verify-commits", False, bool))


def _partition_config(args) -> PartitionConfig:
    return PartitionConfig(num_dies=args.dies, ub=args.ub, seed=args.seed,
                           mode=_MODE_NAMES[args.partition_mode],
                           partition_file=args.partition_file)


def _resyn_config(args) -> ResynConfig:
    return ResynConfig(d1=args.d1, d2=args.d2, window_pi_cap=args.window_pi_cap,
                       divisor_cap=args.divisor_cap, passes=args.passes,
                       verify_each_commit=not args.no_verify_commits,
                       max_augment=args.max_augment, freeze_die=args.freeze_die,
                       seed=args.seed)


def _say(args, msg: str):
    if args.verbose:
        print(msg, file=sys.stderr)


def cmd_partition(args) -> int:
    netlist = parse_blif_file(args.input, args.k_max)
    assignment = assignment_for(netlist, _partition_config(args))
    save_assignment(assignment, args.output)
    _say(args, "cut=%d rho=%.4f -> %s"
         % (cut_size(netlist, assignment), assignment.imbalance(), args.output))
    return 0


def cmd_resynth(args) -> int:
    netlist = parse_blif_file(args.input, args.k_max)
    assignment = load_assignment(netlist, args.partition)
    care = parse_blif_file(args.inject_care, args.k_max) if args.inject_care else None
    result = resynthesize(netlist, assignment, _resyn_config(args), injected_care=care)
    write_blif_file(result.netlist, args.output)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(result.report.to_json() + "\n")
    _say(args, "commits=%d n_sll_fo %d -> %d"
         % (result.report.commits, result.report.before["n_sll_fo"],
            result.report.after["n_sll_fo"]))
    return 0


def cmd_equiv(args) -> int:
    a = parse_blif_file(args.a, args.k_max)
    b = parse_blif_file(args.b, args.k_max)
    care = parse_blif_file(args.care, args.k_max) if args.care else None
    if args.exhaustive:
        mode, budget = "exhaustive", 0
    elif args.random is not None:
        mode, budget = "random", args.random
    else:
        mode, budget = "auto", 100_000
    verdict = check_equivalence(a, b, mode=mode, seed=args.seed,
                                vector_budget=budget or 100_000, care=care)
    if verdict.equivalent:
        print("EQUIVALENT (%s, %d vectors)" % (verdict.mode, verdict.vectors_checked))
        return 0
    print("MISMATCH on %s at %r" % (verdict.mismatched_output, verdict.counterexample))
    return 1


def cmd_metrics(args) -> int:
    netlist = parse_blif_file(args.input, args.k_max)
    assignment = load_assignment(netlist, args.partition)
    if args.baseline:
        base = parse_blif_file(args.baseline, args.k_max)
        base_assignment = load_assignment(
            base, args.baseline_partition or args.partition)
    else:
        base, base_assignment = netlist, assignment
    placement = None
    if args.placement:
        geometry = [(args.die_width, args.die_height)] * assignment.num_dies
        q_table = load_q_table(args.q_table) if args.q_table else None
        placement = load_placement(args.placement, geometry, args.lsll, q_table)
    rep = metrics_report(base, netlist, base_assignment, assignment,
                         placement=placement, sll_mode=args.sll_count)
    print(rep.render_text(), end="")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
    return 0


def cmd_split(args) -> int:
    netlist = parse_blif_file(args.input, args.k_max)
    assignment = load_assignment(netlist, args.partition)
    os.makedirs(args.outdir, exist_ok=True)
    for die, sub in enumerate(split_per_die(netlist, assignment)):
        path = os.path.join(args.outdir, "die%d.blif" % die)
        write_blif_file(sub, path)
        _say(args, "wrote %s (%d LUTs)" % (path, sub.lut_count()))
    return 0


def cmd_flow(args) -> int:
    config = FlowConfig(
        input_path=args.input,
        out_dir=args.outdir,
        partition=_partition_config(args),
        resyn=_resyn_config(args),
        k_max=args.k_max,
        verify_mode=args.verify,
        vector_budget=args.vectors,
        inject_care_path=args.inject_care,
        sll_mode=args.sll_count,
    )
    result = run_flow(config)
    _say(args, "artifacts: %s" % ", ".join(sorted(result.artifacts)))
    if result.verdict is not None and not result.verdict.equivalent:
        print("verification FAILED: %r" % result.verdict.counterexample, file=sys.stderr)
    return result.exit_code


def cmd_bench(args) -> int:
    netlist = bench.build(args.name, args.lut_k)
    text = write_blif(netlist)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="sllresub", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="assign nodes to dies")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_partition_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("resynth", help="cross-die fanin elimination")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--report", default=None)
    _add_resyn_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_resynth)

    p = sub.add_parser("equiv", help="combinational equivalence check")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--random", type=int, default=None, metavar="N")
    p.add_argument("--care", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("metrics", help="connectivity and wirelength report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--baseline", default=None)
    p.add_argument("--baseline-partition", default=None)
    p.add_argument("--placement", default=None)
    p.add_argument("--die-width", type=int, default=_envd("die-width", 325, int))
    p.add_argument("--die-height", type=int, default=_envd("die-height", 218, int))
    p.add_argument("--lsll", type=float, default=_envd("lsll", 1.0, float))
    p.add_argument("--q-table", default=None,
                   help="JSON file mapping terminal count to HPWL weight")
    p.add_argument("--sll-count", choices=("per-die", "raw-net"),
                   default=_envd("sll-count", "per-die"))
    p.add_argument("--json", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("split", help="emit per-die sub-netlists")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--outdir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("flow", help="partition + resynth + verify + split + report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--verify", choices=("auto", "exhaustive", "random"),
                   default=_envd("verify", "auto"))
    p.add_argument("--vectors", type=int, default=_envd("vectors", 100_000, int))
    p.add_argument("--sll-count", choices=("per-die", "raw-net"),
                   default=_envd("sll-count", "per-die"))
    _add_partition_flags(p)
    _add_resyn_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("bench", help="generate a built-in benchmark netlist")
    p.add_argument("name", choices=sorted(bench.BENCH_NAMES))
    p.add_argument("--lut-k", type=int, default=_envd("lut-k", 4, int))
    p.add_argument("-o", "--output", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BlifParseError, NetlistError, PartitionError, ResynthError,
            EquivError, MetricsError, FlowError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
