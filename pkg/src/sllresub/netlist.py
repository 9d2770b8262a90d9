"""LUT-level netlists: BLIF parsing/writing, traversal, and simulation.

A netlist is a DAG of k-input LUT nodes plus opaque latch elements.
Latches act as sequential boundaries everywhere: a latch output is a
pseudo primary input and a latch input is a pseudo primary output for
all combinational analyses. A Netlist is treated as immutable once
built; the mutation helpers used by resubstitution require exclusive
access (no internal locking).
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field

from .truthtab import TruthTable, cover_to_table, full_mask, table_to_cover, var_mask

DEFAULT_K_MAX = 6

PI = "pi"
NODE = "node"
LATCH = "latch"
PO = "po"


class NetlistError(Exception):
    pass


class BlifParseError(NetlistError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = "line %d: %s" % (line_no, message)
        super().__init__(message)
        self.line_no = line_no


@dataclass
class LutNode:
    """One LUT. `fanins[i]` is input i of `function` (i = LSB of the minterm)."""

    id: int
    output_net: str
    fanins: list[str]
    function: TruthTable


@dataclass
class LatchElement:
    input_net: str
    output_net: str
    init_value: str = "unknown"  # '0' | '1' | 'unknown'


@dataclass
class _NetUse:
    """Readers of one net: LUT node ids, latch indices, and PO marker."""

    node_ids: list[int] = field(default_factory=list)
    latch_idxs: list[int] = field(default_factory=list)
    is_po: bool = False


class Netlist:
    def __init__(self, model_name: str = "top", k_max: int = DEFAULT_K_MAX):
        self.model_name = model_name
        self.k_max = k_max
        self.primary_inputs: list[str] = []
        self.primary_outputs: list[str] = []
        self.nodes: dict[int, LutNode] = {}
        self.latches: list[LatchElement] = []
        self._next_id = 0
        self._node_of_net: dict[str, int] = {}
        self._latch_of_net: dict[str, int] = {}
        self._pi_set: set[str] = set()
        self._uses: dict[str, _NetUse] = {}
        self._version = 0
        self._level_cache: tuple[int, dict[int, int]] | None = None

    # ------------------------------------------------------------------
    # construction

    def _touch(self):
        self._version += 1
        self._level_cache = None

    def _use(self, net: str) -> _NetUse:
        u = self._uses.get(net)
        if u is None:
            u = self._uses[net] = _NetUse()
        return u

    def _check_new_driver(self, net: str):
        if net in self._pi_set or net in self._node_of_net or net in self._latch_of_net:
            raise NetlistError("net %r has multiple drivers" % net)

    def add_input(self, name: str):
        self._check_new_driver(name)
        self.primary_inputs.append(name)
        self._pi_set.add(name)
        self._touch()

    def add_output(self, name: str):
        if name in self.primary_outputs:
            raise NetlistError("output %r declared twice" % name)
        self.primary_outputs.append(name)
        self._use(name).is_po = True
        self._touch()

    def add_node(self, output_net: str, fanins: list[str], function: TruthTable) -> LutNode:
        self._check_new_driver(output_net)
        if len(fanins) != function.num_inputs:
            raise NetlistError("node %r: %d fanins but %d-input function"
                               % (output_net, len(fanins), function.num_inputs))
        if len(fanins) > self.k_max:
            raise NetlistError("node %r has %d fanins, exceeds k_max=%d"
                               % (output_net, len(fanins), self.k_max))
        if len(set(fanins)) != len(fanins):
            raise NetlistError("node %r has duplicate fanins" % output_net)
        node = LutNode(self._next_id, output_net, list(fanins), function)
        self._next_id += 1
        self.nodes[node.id] = node
        self._node_of_net[output_net] = node.id
        for f in fanins:
            self._use(f).node_ids.append(node.id)
        self._touch()
        return node

    def add_latch(self, input_net: str, output_net: str, init_value: str = "unknown") -> LatchElement:
        self._check_new_driver(output_net)
        if init_value not in ("0", "1", "unknown"):
            raise NetlistError("bad latch init value %r" % init_value)
        latch = LatchElement(input_net, output_net, init_value)
        idx = len(self.latches)
        self.latches.append(latch)
        self._latch_of_net[output_net] = idx
        self._use(input_net).latch_idxs.append(idx)
        self._touch()
        return latch

    # ------------------------------------------------------------------
    # lookup

    def driver_of(self, net: str):
        """(kind, ref) driving `net`: ('pi', name), ('node', id), ('latch', idx), or None."""
        if net in self._pi_set:
            return (PI, net)
        nid = self._node_of_net.get(net)
        if nid is not None:
            return (NODE, nid)
        lidx = self._latch_of_net.get(net)
        if lidx is not None:
            return (LATCH, lidx)
        return None

    def node_of_net(self, net: str) -> LutNode | None:
        nid = self._node_of_net.get(net)
        return self.nodes[nid] if nid is not None else None

    def readers_of(self, net: str) -> _NetUse:
        return self._uses.get(net, _NetUse())

    def net_index(self) -> dict[str, tuple]:
        """Map net -> (driver, (reader kinds...)) snapshot for inspection."""
        out = {}
        nets = set(self._pi_set) | set(self._node_of_net) | set(self._latch_of_net) | set(self._uses)
        for net in sorted(nets):
            use = self.readers_of(net)
            readers = tuple([(NODE, i) for i in use.node_ids]
                            + [(LATCH, i) for i in use.latch_idxs]
                            + ([(PO, net)] if use.is_po else []))
            out[net] = (self.driver_of(net), readers)
        return out

    def lut_count(self) -> int:
        return len(self.nodes)

    def source_nets(self) -> list[str]:
        """Combinational sources: PIs then latch outputs, in declaration order."""
        return list(self.primary_inputs) + [l.output_net for l in self.latches]

    def sink_nets(self) -> list[str]:
        """Combinational sinks: POs then latch inputs, in declaration order."""
        return list(self.primary_outputs) + [l.input_net for l in self.latches]

    # ------------------------------------------------------------------
    # validation / ordering

    def validate(self):
        """Check the structural invariants; raises NetlistError on violation."""
        for node in self.nodes.values():
            if len(node.fanins) != node.function.num_inputs:
                raise NetlistError("node %r: fanin/function arity mismatch" % node.output_net)
            if len(node.fanins) > self.k_max:
                raise NetlistError("node %r exceeds k_max" % node.output_net)
            if len(set(node.fanins)) != len(node.fanins):
                raise NetlistError("node %r has duplicate fanins" % node.output_net)
            for f in node.fanins:
                if self.driver_of(f) is None:
                    raise NetlistError("net %r used by %r has no driver" % (f, node.output_net))
        for po in self.primary_outputs:
            if self.driver_of(po) is None:
                raise NetlistError("primary output %r has no driver" % po)
        for latch in self.latches:
            if self.driver_of(latch.input_net) is None:
                raise NetlistError("latch input %r has no driver" % latch.input_net)
        self.levels()  # raises on combinational cycles

    def levels(self) -> dict[int, int]:
        """Topological level per node id (longest path from a source)."""
        if self._level_cache is not None and self._level_cache[0] == self._version:
            return self._level_cache[1]
        level: dict[int, int] = {}
        indeg: dict[int, int] = {}
        ready = deque()
        for nid, node in self.nodes.items():
            d = sum(1 for f in node.fanins if self.driver_of(f) is not None
                    and self.driver_of(f)[0] == NODE)
            indeg[nid] = d
            if d == 0:
                ready.append(nid)
        seen = 0
        while ready:
            nid = ready.popleft()
            seen += 1
            node = self.nodes[nid]
            lvl = 0
            for f in node.fanins:
                drv = self.driver_of(f)
                if drv is not None and drv[0] == NODE:
                    lvl = max(lvl, level[drv[1]])
            level[nid] = lvl + 1
            for rid in self.readers_of(node.output_net).node_ids:
                indeg[rid] -= 1
                if indeg[rid] == 0:
                    ready.append(rid)
        if seen != len(self.nodes):
            stuck = sorted(self.nodes[n].output_net for n, d in indeg.items() if d > 0)
            raise NetlistError("combinational cycle through: %s" % ", ".join(stuck[:8]))
        self._level_cache = (self._version, level)
        return level

    def topological_order(self) -> list[LutNode]:
        """Nodes ordered by (level, id); deterministic for a fixed netlist."""
        level = self.levels()
        return [self.nodes[nid] for nid in sorted(self.nodes, key=lambda n: (level[n], n))]

    # ------------------------------------------------------------------
    # traversal

    def _node_id(self, node) -> int:
        nid = node.id if isinstance(node, LutNode) else node
        if nid not in self.nodes:
            raise NetlistError("unknown node %r" % node)
        return nid

    def tfi(self, node, depth_limit: int | None = None) -> set[int]:
        """Node ids in the transitive fanin, BFS-bounded by `depth_limit`.

        PIs and latch outputs terminate the walk; the node itself is
        excluded. depth_limit=0 yields the empty set.
        """
        nid = self._node_id(node)
        if depth_limit is not None and depth_limit <= 0:
            return set()
        out: set[int] = set()
        frontier = [nid]
        depth = 0
        while frontier and (depth_limit is None or depth < depth_limit):
            depth += 1
            nxt = []
            for cur in frontier:
                for f in self.nodes[cur].fanins:
                    drv = self.driver_of(f)
                    if drv is not None and drv[0] == NODE and drv[1] not in out and drv[1] != nid:
                        out.add(drv[1])
                        nxt.append(drv[1])
            frontier = nxt
        return out

    def tfo(self, node, depth_limit: int | None = None) -> set[int]:
        """Node ids in the transitive fanout, BFS-bounded by `depth_limit`.

        POs and latch inputs terminate the walk; the node itself is excluded.
        """
        nid = self._node_id(node)
        if depth_limit is not None and depth_limit <= 0:
            return set()
        out: set[int] = set()
        frontier = [nid]
        depth = 0
        while frontier and (depth_limit is None or depth < depth_limit):
            depth += 1
            nxt = []
            for cur in frontier:
                for rid in self.readers_of(self.nodes[cur].output_net).node_ids:
                    if rid not in out and rid != nid:
                        out.add(rid)
                        nxt.append(rid)
            frontier = nxt
        return out

    def cone_input_nets(self, node_ids: set[int]) -> list[str]:
        """Nets feeding the node set from outside it, sorted by name."""
        inner_nets = {self.nodes[n].output_net for n in node_ids}
        out = set()
        for n in node_ids:
            for f in self.nodes[n].fanins:
                if f not in inner_nets:
                    out.add(f)
        return sorted(out)

    def mffc(self, node) -> set[int]:
        """Maximum fanout-free cone of `node` (ids, including the node).

        Every member other than the root has all of its fanouts inside
        the set, so deleting the set dangles nothing else.
        """
        root = self._node_id(node)
        member = {root}
        # Fixpoint: keep adding nodes whose every reader is already a member
        # and which feed neither a PO nor a latch.
        changed = True
        while changed:
            changed = False
            candidates = set()
            for m in member:
                for f in self.nodes[m].fanins:
                    drv = self.driver_of(f)
                    if drv is not None and drv[0] == NODE and drv[1] not in member:
                        candidates.add(drv[1])
            for c in candidates:
                use = self.readers_of(self.nodes[c].output_net)
                if use.is_po or use.latch_idxs:
                    continue
                if all(r in member for r in use.node_ids):
                    member.add(c)
                    changed = True
        return member

    # ------------------------------------------------------------------
    # mutation (resubstitution support)

    def replace_node(self, node, fanins: list[str], function: TruthTable) -> LutNode:
        """Swap in a fresh node driving the same net with new fanins/function.

        The old node id disappears; every reader keeps working because the
        output net is preserved.
        """
        nid = self._node_id(node)
        old = self.nodes[nid]
        if len(fanins) != function.num_inputs:
            raise NetlistError("replacement arity mismatch on %r" % old.output_net)
        if len(fanins) > self.k_max:
            raise NetlistError("replacement for %r exceeds k_max" % old.output_net)
        if len(set(fanins)) != len(fanins):
            raise NetlistError("replacement for %r has duplicate fanins" % old.output_net)
        for f in fanins:
            if self.driver_of(f) is None:
                raise NetlistError("replacement fanin %r has no driver" % f)
        for f in old.fanins:
            self._uses[f].node_ids.remove(nid)
        del self.nodes[nid]
        del self._node_of_net[old.output_net]
        new = self.add_node(old.output_net, fanins, function)
        return new

    def remove_node(self, node):
        """Delete a node with no readers of its output net."""
        nid = self._node_id(node)
        n = self.nodes[nid]
        use = self.readers_of(n.output_net)
        if use.node_ids or use.latch_idxs or use.is_po:
            raise NetlistError("cannot remove %r: net still read" % n.output_net)
        for f in n.fanins:
            self._uses[f].node_ids.remove(nid)
        del self.nodes[nid]
        del self._node_of_net[n.output_net]
        self._touch()

    def sweep_dead(self, seed_nets=None) -> list[str]:
        """Remove nodes whose nets have no readers, cascading through fanins.

        Restricted to the cone over `seed_nets` when given. Returns the
        removed node names sorted by name.
        """
        if seed_nets is None:
            work = deque(n.output_net for n in self.nodes.values())
        else:
            work = deque(seed_nets)
        removed = []
        while work:
            net = work.popleft()
            nid = self._node_of_net.get(net)
            if nid is None:
                continue
            use = self.readers_of(net)
            if use.node_ids or use.latch_idxs or use.is_po:
                continue
            fanins = list(self.nodes[nid].fanins)
            self.remove_node(nid)
            removed.append(net)
            work.extend(fanins)
        return sorted(removed)

    def copy(self) -> "Netlist":
        out = Netlist(self.model_name, self.k_max)
        for name in self.primary_inputs:
            out.add_input(name)
        for name in self.primary_outputs:
            out.add_output(name)
        for latch in self.latches:
            out.add_latch(latch.input_net, latch.output_net, latch.init_value)
        for node in sorted(self.nodes.values(), key=lambda n: n.id):
            out.add_node(node.output_net, list(node.fanins), node.function)
        return out

    # ------------------------------------------------------------------
    # simulation

    def eval_masks(self, source_masks: dict[str, int], width: int) -> dict[str, int]:
        """Bit-parallel evaluation of every net from PI/latch-output masks."""
        values: dict[str, int] = {}
        for net in self.source_nets():
            if net not in source_masks:
                raise NetlistError("missing assignment for input %r" % net)
            values[net] = source_masks[net] & full_mask(width)
        for node in self.topological_order():
            values[node.output_net] = node.function.eval_masks(
                [values[f] for f in node.fanins], width)
        return values

    def simulate(self, assignment: dict[str, int]) -> dict[str, int]:
        """Single-vector simulation: PI/latch-output bits in, PO/latch-input bits out."""
        masks = {}
        for net in self.source_nets():
            if net not in assignment:
                raise NetlistError("missing assignment for input %r" % net)
            masks[net] = 1 if assignment[net] else 0
        values = self.eval_masks(masks, 1)
        return {net: values[net] & 1 for net in self.sink_nets()}

    def exhaustive_masks(self) -> tuple[dict[str, int], int]:
        """Source masks enumerating all input minterms (sorted source order).

        Bit m of every returned mask corresponds to the assignment where
        source i (sorted by name) takes bit i of m.
        """
        sources = sorted(self.source_nets())
        width = 1 << len(sources)
        return {net: var_mask(i, len(sources)) for i, net in enumerate(sources)}, width


# ----------------------------------------------------------------------
# BLIF I/O

_GENERATED_PREFIX = "__sll_"


def _logical_lines(text: str):
    """Yield (line_no, tokens) merging continuations and dropping comments."""
    pending = ""
    pending_no = 0
    for no, raw in enumerate(text.splitlines(), start=1):
        if "#" in raw:
            raw = raw[:raw.index("#")]
        raw = raw.rstrip()
        if pending:
            line = pending + " " + raw.strip()
            line_no = pending_no
        else:
            line = raw.strip()
            line_no = no
        if line.endswith("\\"):
            pending = line[:-1].strip()
            pending_no = line_no
            continue
        pending = ""
        if line:
            yield line_no, line.split()
    if pending:
        yield pending_no, pending.split()


def parse_blif(text: str, k_max: int = DEFAULT_K_MAX) -> Netlist:
    """Parse flat BLIF (.model/.inputs/.outputs/.names/.latch/.end).

    SOP covers are expanded to truth tables at parse time; only on-set
    covers are accepted (output column must be `1`). `.subckt` is
    rejected: this tool works on flat netlists only.
    """
    netlist: Netlist | None = None
    model_seen = False
    ended = False
    inputs: list[str] = []
    outputs: list[str] = []
    names: list[tuple[int, list[str], list]] = []  # (line_no, signals, rows)
    latches: list[tuple[int, list[str]]] = []
    cur_cover: list | None = None

    for line_no, tokens in _logical_lines(text):
        if ended:
            raise BlifParseError("content after .end", line_no)
        cmd = tokens[0]
        if not cmd.startswith("."):
            if cur_cover is None:
                raise BlifParseError("cover row outside .names", line_no)
            if len(tokens) == 1 and not names[-1][1][:-1]:
                # constant node: a bare output value
                cur_cover.append((line_no, tokens[0]))
            elif len(tokens) == 2:
                cur_cover.append((line_no, tokens[0] + " " + tokens[1]))
            else:
                raise BlifParseError("malformed cover row %r" % " ".join(tokens), line_no)
            continue
        cur_cover = None
        if cmd == ".model":
            if model_seen:
                raise BlifParseError("multiple .model sections; flat netlists only", line_no)
            model_seen = True
            netlist = Netlist(tokens[1] if len(tokens) > 1 else "top", k_max)
        elif cmd == ".inputs":
            inputs.extend(tokens[1:])
        elif cmd == ".outputs":
            outputs.extend(tokens[1:])
        elif cmd == ".names":
            if len(tokens) < 2:
                raise BlifParseError(".names needs at least an output", line_no)
            sig = tokens[1:]
            if len(sig) - 1 > k_max:
                raise BlifParseError("node %r has %d fanins, exceeds k_max=%d"
                                     % (sig[-1], len(sig) - 1, k_max), line_no)
            rows: list[str] = []
            names.append((line_no, sig, rows))
            cur_cover = rows
        elif cmd == ".latch":
            if len(tokens) < 3:
                raise BlifParseError(".latch needs input and output", line_no)
            latches.append((line_no, tokens[1:]))
        elif cmd == ".end":
            ended = True
        elif cmd == ".subckt":
            raise BlifParseError(
                ".subckt is not supported: flatten the netlist first", line_no)
        else:
            raise BlifParseError("unsupported construct %r" % cmd, line_no)

    if netlist is None:
        netlist = Netlist("top", k_max)

    try:
        for name in inputs:
            netlist.add_input(name)
        for name in outputs:
            netlist.add_output(name)
    except NetlistError as exc:
        raise BlifParseError(str(exc)) from exc

    for line_no, spec in latches:
        # .latch <in> <out> [<type> <ctrl>] [<init>]
        if len(spec) in (2, 3):
            in_net, out_net = spec[0], spec[1]
            init_tok = spec[2] if len(spec) == 3 else None
        elif len(spec) in (4, 5):
            in_net, out_net = spec[0], spec[1]
            init_tok = spec[4] if len(spec) == 5 else None
        else:
            raise BlifParseError("malformed .latch", line_no)
        init = {"0": "0", "1": "1", "2": "unknown", "3": "unknown", None: "unknown"}.get(init_tok)
        if init is None:
            raise BlifParseError("bad latch init value %r" % init_tok, line_no)
        try:
            netlist.add_latch(in_net, out_net, init)
        except NetlistError as exc:
            raise BlifParseError(str(exc), line_no) from exc

    for line_no, sig, rows in names:
        fanins, out_net = sig[:-1], sig[-1]
        in_rows = []
        for row_no, row in rows:
            parts = row.split()
            if len(parts) == 1:
                in_part, out_part = "", parts[0]
            else:
                in_part, out_part = parts
            if out_part == "-":
                raise BlifParseError(
                    "don't-care output plane on %r is rejected" % out_net, row_no)
            if out_part == "0":
                raise BlifParseError(
                    "off-set cover on %r is rejected; use the on-set" % out_net, row_no)
            if out_part != "1":
                raise BlifParseError("bad cover output %r" % out_part, row_no)
            in_rows.append(in_part)
        try:
            table = cover_to_table(len(fanins), in_rows)
            netlist.add_node(out_net, fanins, table)
        except (ValueError, NetlistError) as exc:
            raise BlifParseError(str(exc), line_no) from exc

    try:
        netlist.validate()
    except NetlistError as exc:
        raise BlifParseError(str(exc)) from exc
    return netlist


def parse_blif_file(path, k_max: int = DEFAULT_K_MAX) -> Netlist:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_blif(fh.read(), k_max)


def write_blif(netlist: Netlist, merge_cubes: bool = False) -> str:
    """Emit BLIF with deterministic (topological, name-tiebreak) node order."""
    out = io.StringIO()
    out.write(".model %s\n" % netlist.model_name)
    out.write(".inputs%s\n" % "".join(" " + n for n in netlist.primary_inputs))
    out.write(".outputs%s\n" % "".join(" " + n for n in netlist.primary_outputs))
    for latch in netlist.latches:
        if latch.init_value in ("0", "1"):
            out.write(".latch %s %s %s\n" % (latch.input_net, latch.output_net, latch.init_value))
        else:
            out.write(".latch %s %s\n" % (latch.input_net, latch.output_net))
    level = netlist.levels()
    for node in sorted(netlist.nodes.values(), key=lambda n: (level[n.id], n.output_net)):
        out.write(".names%s %s\n" % ("".join(" " + f for f in node.fanins), node.output_net))
        for row in table_to_cover(node.function, merge_cubes=merge_cubes):
            if row:
                out.write("%s 1\n" % row)
            else:
                out.write("1\n")
    out.write(".end\n")
    return out.getvalue()


def write_blif_file(netlist: Netlist, path, merge_cubes: bool = False):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_blif(netlist, merge_cubes=merge_cubes))


def has_generated_names(netlist: Netlist) -> bool:
    """True when any interface or net name uses the reserved split prefix."""
    nets = (list(netlist.primary_inputs) + list(netlist.primary_outputs)
            + [n.output_net for n in netlist.nodes.values()]
            + [l.output_net for l in netlist.latches]
            + [l.input_net for l in netlist.latches])
    return any(n.startswith(_GENERATED_PREFIX) for n in nets)
