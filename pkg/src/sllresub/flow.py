"""Pipeline driver: parse -> partition -> resynthesize -> verify -> split -> report.

Also holds the per-die netlist splitter and its stitching inverse, used
both by the flow and by the round-trip checks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import metrics as metrics_mod
from .equiv import EquivError, EquivVerdict, check_equivalence
from .netlist import (Netlist, NetlistError, has_generated_names, parse_blif_file,
                      write_blif, write_blif_file)
from .partition import (DieAssignment, PartitionConfig, PartitionError,
                        assignment_for, save_assignment)
from .resynth import ResynConfig, ResynResult, resynthesize
from .truthtab import TruthTable
from .windows import ResynthError

SLL_PREFIX = "__sll_"


class FlowError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__("[%s] %s" % (stage, message))
        self.stage = stage


def _import_name(net: str) -> str:
    return "%s%s_in" % (SLL_PREFIX, net)


def _export_name(net: str) -> str:
    return "%s%s_out" % (SLL_PREFIX, net)


def split_per_die(netlist: Netlist, assignment: DieAssignment) -> list[Netlist]:
    """One sub-netlist per die with SLL boundary pins on every crossing net.

    The source die of a crossing net gains a PO `__sll_<net>_out` (via a
    buffer LUT); every destination die gains a PI `__sll_<net>_in` wired
    into the local sinks.
    """
    if has_generated_names(netlist):
        raise NetlistError("input netlist already uses the reserved %r prefix" % SLL_PREFIX)
    k = assignment.num_dies
    # crossing[net] = sorted destination dies
    crossing: dict[str, list[int]] = {}
    for name, sinks in metrics_mod._net_terminals(netlist):
        dd = assignment.die(name)
        dests = sorted({assignment.die(s) for s in sinks} - {dd})
        if dests:
            crossing[name] = dests

    out: list[Netlist] = []
    for die in range(k):
        sub = Netlist("%s_die%d" % (netlist.model_name, die), netlist.k_max)
        for name in netlist.primary_inputs:
            if assignment.die(name) == die:
                sub.add_input(name)
        for net in sorted(crossing):
            if assignment.die(net) != die and die in crossing[net]:
                sub.add_input(_import_name(net))

        def local(net: str) -> str:
            return net if assignment.die(net) == die else _import_name(net)

        for po in netlist.primary_outputs:
            if assignment.die(po) == die:
                sub.add_output(po)
        for net in sorted(crossing):
            if assignment.die(net) == die:
                sub.add_output(_export_name(net))
        for latch in netlist.latches:
            if assignment.die(latch.output_net) == die:
                sub.add_latch(local(latch.input_net), latch.output_net, latch.init_value)
        for node in sorted(netlist.nodes.values(), key=lambda n: n.id):
            if assignment.die(node.output_net) == die:
                sub.add_node(node.output_net, [local(f) for f in node.fanins], node.function)
        for net in sorted(crossing):
            if assignment.die(net) == die:
                sub.add_node(_export_name(net), [net], TruthTable(1, 0b10))
        sub.validate()
        out.append(sub)
    return out


def stitch(parts: list[Netlist], model_name: str | None = None) -> Netlist:
    """Reconnect per-die netlists by matching `__sll_` import/export pins."""
    k_max = max(p.k_max for p in parts)
    name = model_name
    if name is None:
        name = parts[0].model_name.rsplit("_die", 1)[0] if parts else "top"
    out = Netlist(name, k_max)
    exported: dict[str, str] = {}  # import pin -> source net
    for part in parts:
        for po in part.primary_outputs:
            if po.startswith(SLL_PREFIX) and po.endswith("_out"):
                net = po[len(SLL_PREFIX):-len("_out")]
                exported[_import_name(net)] = net

    def local(net: str) -> str:
        return exported.get(net, net)

    for part in parts:
        for pi in part.primary_inputs:
            if not pi.startswith(SLL_PREFIX):
                out.add_input(pi)
        for po in part.primary_outputs:
            if not po.startswith(SLL_PREFIX):
                out.add_output(po)
    for part in parts:
        for latch in part.latches:
            out.add_latch(local(latch.input_net), latch.output_net, latch.init_value)
        for node in sorted(part.nodes.values(), key=lambda n: n.id):
            if node.output_net.startswith(SLL_PREFIX):
                continue  # boundary buffer
            out.add_node(node.output_net, [local(f) for f in node.fanins], node.function)
    out.validate()
    return out


@dataclass
class FlowConfig:
    input_path: str
    out_dir: str
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    resyn: ResynConfig = field(default_factory=ResynConfig)
    k_max: int = 6
    verify_mode: str = "auto"
    vector_budget: int = 100_000
    inject_care_path: str | None = None
    sll_mode: str = "per-die"


@dataclass
class FlowResult:
    exit_code: int
    artifacts: dict[str, str]
    verdict: EquivVerdict | None = None
    resyn: ResynResult | None = None


def run_flow(config: FlowConfig) -> FlowResult:
    """Run the full pipeline and write all artifacts into `out_dir`.

    Deterministic for fixed inputs and flags. Exit code 1 flags an
    equivalence failure; stage errors raise FlowError.
    """
    artifacts: dict[str, str] = {}

    def path(name: str) -> str:
        return os.path.join(config.out_dir, name)

    try:
        netlist = parse_blif_file(config.input_path, config.k_max)
        if has_generated_names(netlist):
            raise NetlistError("input uses the reserved %r prefix" % SLL_PREFIX)
    except (OSError, NetlistError) as exc:
        raise FlowError("parse", str(exc)) from exc

    care = None
    if config.inject_care_path:
        try:
            care = parse_blif_file(config.inject_care_path, config.k_max)
        except (OSError, NetlistError) as exc:
            raise FlowError("parse", "care predicate: %s" % exc) from exc

    os.makedirs(config.out_dir, exist_ok=True)
    try:
        assignment = assignment_for(netlist, config.partition)
        save_assignment(assignment, path("partition.txt"))
        artifacts["partition"] = path("partition.txt")
    except PartitionError as exc:
        raise FlowError("partition", str(exc)) from exc

    try:
        result = resynthesize(netlist, assignment, config.resyn, injected_care=care)
        write_blif_file(result.netlist, path("post.blif"))
        artifacts["post_blif"] = path("post.blif")
        with open(path("report.json"), "w", encoding="utf-8") as fh:
            fh.write(result.report.to_json() + "\n")
        artifacts["report"] = path("report.json")
    except (ResynthError, NetlistError) as exc:
        raise FlowError("resynth", str(exc)) from exc

    try:
        verdict = check_equivalence(netlist, result.netlist, mode=config.verify_mode,
                                    seed=config.partition.seed,
                                    vector_budget=config.vector_budget, care=care)
    except EquivError as exc:
        raise FlowError("verify", str(exc)) from exc
    with open(path("equiv.txt"), "w", encoding="utf-8") as fh:
        fh.write("%s mode=%s vectors=%d\n"
                 % ("EQUIVALENT" if verdict.equivalent else "MISMATCH",
                    verdict.mode, verdict.vectors_checked))
        if not verdict.equivalent:
            fh.write("counterexample: %r output=%s\n"
                     % (verdict.counterexample, verdict.mismatched_output))
    artifacts["equiv"] = path("equiv.txt")

    try:
        for die, sub in enumerate(split_per_die(result.netlist, result.assignment)):
            write_blif_file(sub, path("die%d.blif" % die))
            artifacts["die%d" % die] = path("die%d.blif" % die)
    except (NetlistError, PartitionError) as exc:
        raise FlowError("split", str(exc)) from exc

    try:
        rep = metrics_mod.report(netlist, result.netlist, assignment, result.assignment,
                                 sll_mode=config.sll_mode,
                                 notes={"flow_commits": result.report.commits})
        with open(path("metrics.json"), "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
        with open(path("metrics.txt"), "w", encoding="utf-8") as fh:
            fh.write(rep.render_text())
        artifacts["metrics_json"] = path("metrics.json")
        artifacts["metrics_txt"] = path("metrics.txt")
    except metrics_mod.MetricsError as exc:
        raise FlowError("metrics", str(exc)) from exc

    return FlowResult(0 if verdict.equivalent else 1, artifacts, verdict, result)
