"""Optimization windows: bounded sub-circuits, divisors, and care sets.

A window around a pivot holds the pivot's bounded TFO, its bounded TFI,
and the reconvergent side logic computable from the TFI leaf nets.
Everything inside is exhaustively simulable from the window PIs, which
keeps existence checks and interpolation exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .netlist import NODE, LutNode, Netlist, NetlistError
from .partition import DieAssignment
from .truthtab import TruthTable, full_mask, var_mask


class ResynthError(Exception):
    pass


@dataclass
class Window:
    pivot: int                      # node id
    window_pis: list[str]           # sorted; index i = input i of the minterm space
    internal: list[int]             # node ids in topological order
    outputs: list[str]              # nets observable outside the window
    tfi_leaves: set[str]            # window PIs on paths into the pivot's TFI cone
    d1: int
    d2: int

    @property
    def num_pis(self) -> int:
        return len(self.window_pis)

    @property
    def width(self) -> int:
        return 1 << len(self.window_pis)


def _grow_window(netlist: Netlist, pivot: int, d1: int, d2: int) -> tuple[set[int], set[str]]:
    """Internal node set and TFI leaf nets for the given depth bounds."""
    tfo_ids = netlist.tfo(pivot, d1) if d1 > 0 else set()
    tfi_ids = netlist.tfi(pivot, d2)
    core = {pivot} | tfo_ids | tfi_ids
    leaves = set(netlist.cone_input_nets(tfi_ids | {pivot}))

    # Side logic: nodes fed entirely by window nets (or free sources such
    # as PIs and latch outputs), reachable forward from the leaf nets
    # within d1+d2 levels. The pivot's deeper TFO stays out; d1 alone
    # bounds how far downstream the window looks, and d1=0 pins the
    # window to the pivot's own input cone.
    window = set(core)
    if d1 == 0:
        return window, leaves
    full_tfo = netlist.tfo(pivot, None)
    depth_cap = d1 + d2
    window_nets = {netlist.nodes[n].output_net for n in window}
    free = set(netlist.primary_inputs) | {l.output_net for l in netlist.latches}
    depth: dict[str, int] = {net: 0 for net in leaves}
    level = netlist.levels()
    candidates = sorted((n for n in netlist.nodes if n not in window and n not in full_tfo),
                        key=lambda n: (level[n], n))
    changed = True
    while changed:
        changed = False
        for nid in candidates:
            if nid in window:
                continue
            node = netlist.nodes[nid]
            ok = True
            d = 0
            feeds_leaf = False
            for f in node.fanins:
                if f in window_nets or f in leaves:
                    d = max(d, depth.get(f, 0) + 1)
                    feeds_leaf = True
                elif f in free:
                    d = max(d, 1)
                else:
                    ok = False
                    break
            if ok and feeds_leaf and d <= depth_cap:
                window.add(nid)
                window_nets.add(node.output_net)
                depth[node.output_net] = d
                changed = True
    return window, leaves


def build_window(netlist: Netlist, pivot, config) -> Window | None:
    """Construct the pivot's window, shrinking d2 then d1 to honor the PI cap.

    Returns None when even the smallest window has too many PIs (the
    pivot is skipped, not an error).
    """
    node = pivot if isinstance(pivot, LutNode) else netlist.nodes.get(pivot)
    if node is None or node.id not in netlist.nodes:
        raise ResynthError("pivot is not a LUT node in this netlist")
    d1, d2 = config.d1, config.d2
    while True:
        internal_set, leaves = _grow_window(netlist, node.id, d1, d2)
        while True:
            internal_nets = {netlist.nodes[n].output_net for n in internal_set}
            pis = set()
            consts = set()
            for nid in internal_set:
                for f in netlist.nodes[nid].fanins:
                    if f in internal_nets:
                        continue
                    drv = netlist.driver_of(f)
                    if drv is not None and drv[0] == NODE \
                            and not netlist.nodes[drv[1]].fanins:
                        consts.add(drv[1])  # absorb constants, they cost no PIs
                    else:
                        pis.add(f)
            if not consts:
                break
            internal_set |= consts
        if len(pis) <= config.window_pi_cap:
            break
        if d2 > 1:
            d2 -= 1
        elif d1 > 0:
            d1 -= 1
        else:
            return None

    level = netlist.levels()
    internal = sorted(internal_set, key=lambda n: (level[n], n))
    outputs = []
    for nid in internal:
        out_net = netlist.nodes[nid].output_net
        use = netlist.readers_of(out_net)
        observable = use.is_po or bool(use.latch_idxs)
        observable = observable or any(r not in internal_set for r in use.node_ids)
        if observable:
            outputs.append(out_net)
    window_pis = sorted(pis)

    # Window PIs on paths into the pivot cone (used for reporting and
    # divisor levels); the pivot cone support restricted to window PIs.
    tfi_related = set()
    stack = [node.id]
    seen = {node.id}
    while stack:
        cur = stack.pop()
        for f in netlist.nodes[cur].fanins:
            if f in pis:
                tfi_related.add(f)
            else:
                drv = netlist.driver_of(f)
                if drv is not None and drv[0] == NODE and drv[1] in internal_set \
                        and drv[1] not in seen:
                    seen.add(drv[1])
                    stack.append(drv[1])
    return Window(node.id, window_pis, internal, sorted(outputs), tfi_related, d1, d2)


class WindowSim:
    """Exhaustive bit-parallel simulation of a window over its PI space."""

    def __init__(self, netlist: Netlist, window: Window):
        self.window = window
        self.width = window.width
        self.full = full_mask(self.width)
        self.values: dict[str, int] = {
            net: var_mask(i, window.num_pis) for i, net in enumerate(window.window_pis)
        }
        for nid in window.internal:
            node = netlist.nodes[nid]
            self.values[node.output_net] = node.function.eval_masks(
                [self.values[f] for f in node.fanins], self.width)
        self.pivot_net = netlist.nodes[window.pivot].output_net
        self.pivot_mask = self.values[self.pivot_net]

    def value_of(self, net: str) -> int:
        try:
            return self.values[net]
        except KeyError:
            raise ResynthError("net %r is not evaluable in the window" % net) from None

    def resim_with_pivot(self, netlist: Netlist, forced: int) -> dict[str, int]:
        """Window values with the pivot output forced to a constant."""
        values = dict(self.values)
        values[self.pivot_net] = self.full if forced else 0
        for nid in self.window.internal:
            node = netlist.nodes[nid]
            if node.output_net == self.pivot_net:
                continue
            values[node.output_net] = node.function.eval_masks(
                [values[f] for f in node.fanins], self.width)
        return values


@dataclass
class CareSet:
    """Care predicate over the window PI minterm space (1 = care)."""

    over: list[str]
    care_bits: int

    @property
    def width(self) -> int:
        return 1 << len(self.over)

    def is_all_dont_care(self) -> bool:
        return self.care_bits == 0


def extract_care_set(netlist: Netlist, window: Window, sim: WindowSim | None = None,
                     injected_care: Netlist | None = None) -> CareSet:
    """Observability care set by dual simulation with the pivot forced.

    A window minterm is care iff flipping the pivot changes some window
    output. An injected care predicate (single-output netlist over
    primary input names) is intersected when all of its inputs are
    window PIs; otherwise it is ignored for this window, which only
    makes the care set conservative.
    """
    sim = sim or WindowSim(netlist, window)
    pivot_net = sim.pivot_net
    if pivot_net in window.outputs:
        care = sim.full
    else:
        v0 = sim.resim_with_pivot(netlist, 0)
        v1 = sim.resim_with_pivot(netlist, 1)
        care = 0
        for out in window.outputs:
            care |= v0[out] ^ v1[out]
    if injected_care is not None:
        pred_inputs = injected_care.source_nets()
        if all(p in window.window_pis for p in pred_inputs):
            idx = {net: i for i, net in enumerate(window.window_pis)}
            masks = {p: var_mask(idx[p], window.num_pis) for p in pred_inputs}
            values = injected_care.eval_masks(masks, sim.width)
            care &= values[injected_care.primary_outputs[0]]
    return CareSet(list(window.window_pis), care)


# ----------------------------------------------------------------------
# divisors


@dataclass
class DivisorSet:
    candidates: list[tuple[str, int, int]]   # (net, die, window level)
    in_die: list[str] = field(default_factory=list)


def collect_divisors(netlist: Netlist, window: Window, assignment: DieAssignment,
                     config) -> DivisorSet:
    """Divisor candidates: window signals reusable to re-express the pivot.

    Every window PI and internal node qualifies except the pivot itself,
    its MFFC, and window nodes in the pivot's TFO (those would create
    cycles). Candidates are ordered by (window level, name), truncated at
    the divisor cap; `in_die` keeps the ones sharing the pivot's die.
    """
    pivot_node = netlist.nodes[window.pivot]
    internal_set = set(window.internal)
    excluded = {netlist.nodes[n].output_net for n in netlist.mffc(window.pivot)}
    tfo_ids = netlist.tfo(window.pivot, None)
    excluded.update(netlist.nodes[n].output_net for n in tfo_ids if n in internal_set)
    excluded.add(pivot_node.output_net)

    levels: dict[str, int] = {net: 0 for net in window.window_pis}
    for nid in window.internal:
        node = netlist.nodes[nid]
        levels[node.output_net] = 1 + max((levels[f] for f in node.fanins), default=0)

    bound = config.divisor_level_bound if config.divisor_level_bound is not None else config.d2
    ordered = sorted(levels.items(), key=lambda kv: (kv[1], kv[0]))
    candidates = []
    for net, lvl in ordered:
        if net in excluded or lvl > bound:
            continue
        candidates.append((net, assignment.die(net), lvl))
        if len(candidates) >= config.divisor_cap:
            break
    pivot_die = assignment.die(pivot_node.output_net)
    in_die = [net for net, die, _lvl in candidates if die == pivot_die]
    return DivisorSet(candidates, in_die)


# ----------------------------------------------------------------------
# existence check and interpolation


def exist_check(sim: WindowSim, care: CareSet, support: list[str]) -> bool:
    """True iff the pivot is a well-defined function of `support` on the care set.

    Canonical pairwise-distinguishability semantics: no two care minterms
    may agree on every support net yet disagree on the pivot.
    """
    if care.is_all_dont_care():
        return True
    masks = [sim.value_of(net) for net in support]
    if len(support) > 16:
        raise ResynthError("support of %d nets is too wide to tabulate" % len(support))
    full = sim.full
    on = sim.pivot_mask & care.care_bits
    off = ~sim.pivot_mask & full & care.care_bits
    for t in range(1 << len(support)):
        part = care.care_bits
        for i, vm in enumerate(masks):
            part &= vm if (t >> i) & 1 else full & ~vm
            if not part:
                break
        if part and (part & on) and (part & off):
            return False
    return True


def interpolate(sim: WindowSim, care: CareSet, support: list[str]) -> TruthTable:
    """Truth table over `support` agreeing with the pivot on all care minterms.

    Support patterns never hit by a care minterm are filled with 0.
    Raises when the support cannot express the pivot (exist_check false).
    """
    masks = [sim.value_of(net) for net in support]
    full = sim.full
    on = sim.pivot_mask & care.care_bits
    off = ~sim.pivot_mask & full & care.care_bits
    bits = 0
    for t in range(1 << len(support)):
        part = care.care_bits
        for i, vm in enumerate(masks):
            part &= vm if (t >> i) & 1 else full & ~vm
            if not part:
                break
        if not part:
            continue
        hit_on = part & on
        hit_off = part & off
        if hit_on and hit_off:
            raise ResynthError("interpolate called on an infeasible support")
        if hit_on:
            bits |= 1 << t
    return TruthTable(len(support), bits)
