"""Die assignment: FM min-cut bipartitioning, hash labeling, assignment files.

Every net driver (primary input, LUT node, latch) gets a die label.
LUTs and latches carry logic weight 1, primary inputs weight 0, so the
imbalance ratio counts logic only while cross-die edges from PIs still
count as inter-die connections.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass, field

from .netlist import LATCH, NODE, PI, Netlist, NetlistError


class PartitionError(Exception):
    pass


@dataclass
class DieAssignment:
    """Total map driver-name -> die index, with per-entity logic weights."""

    num_dies: int
    die_of: dict[str, int]
    weights: dict[str, int]

    def die_weights(self) -> list[int]:
        out = [0] * self.num_dies
        for name, die in self.die_of.items():
            out[die] += self.weights.get(name, 0)
        return out

    def total_weight(self) -> int:
        return sum(self.weights.values())

    def imbalance(self) -> float:
        """max_k |V_k| / (|V| / K) over logic weights (double precision)."""
        total = self.total_weight()
        if total == 0:
            raise PartitionError("imbalance undefined: no weighted nodes")
        return max(self.die_weights()) * self.num_dies / total

    def copy(self) -> "DieAssignment":
        return DieAssignment(self.num_dies, dict(self.die_of), dict(self.weights))

    def die(self, name: str) -> int:
        try:
            return self.die_of[name]
        except KeyError:
            raise PartitionError("no die assignment for %r" % name) from None


def imbalance(assignment: DieAssignment) -> float:
    """Partition imbalance ratio: max die logic weight over the uniform share."""
    return assignment.imbalance()


@dataclass
class PartitionConfig:
    num_dies: int = 2
    ub: float = 1.25
    seed: int = 0
    mode: str = "fm_mincut"  # fm_mincut | hash_label | external_file
    partition_file: str | None = None

    def __post_init__(self):
        if self.ub < 1.0:
            raise PartitionError("imbalance upper bound must be >= 1.0")


def entities(netlist: Netlist) -> list[tuple[str, int]]:
    """(name, weight) for every die-assignable driver, in stable order."""
    out = [(name, 0) for name in netlist.primary_inputs]
    out.extend((latch.output_net, 1) for latch in netlist.latches)
    out.extend((node.output_net, 1)
               for node in sorted(netlist.nodes.values(), key=lambda n: n.id))
    return out


def _sink_entity(netlist: Netlist, kind: str, ref) -> str:
    if kind == NODE:
        return netlist.nodes[ref].output_net
    return netlist.latches[ref].output_net


def hyperedges(netlist: Netlist) -> list[tuple[str, tuple[str, ...]]]:
    """(driver_net, pins) per net with at least two distinct entity pins.

    Pins are the driver entity plus every reading LUT/latch entity; POs
    are not physical pins.
    """
    edges = []
    for name, _w in entities(netlist):
        use = netlist.readers_of(name)
        pins = {name}
        pins.update(netlist.nodes[nid].output_net for nid in use.node_ids)
        pins.update(netlist.latches[i].output_net for i in use.latch_idxs)
        if len(pins) >= 2:
            edges.append((name, tuple(sorted(pins))))
    return edges


def cut_size(netlist: Netlist, assignment: DieAssignment) -> int:
    """Hyperedge cut: nets with pins on two or more dies, counted once."""
    cut = 0
    for _net, pins in hyperedges(netlist):
        dies = {assignment.die(p) for p in pins}
        if len(dies) >= 2:
            cut += 1
    return cut


# ----------------------------------------------------------------------
# FM bipartitioning


class _FmGraph:
    def __init__(self, vertices: list[str], weights: dict[str, int],
                 nets: list[tuple[str, ...]]):
        self.vertices = vertices
        self.index = {v: i for i, v in enumerate(vertices)}
        self.weights = [weights[v] for v in vertices]
        self.nets = [tuple(self.index[p] for p in pins) for pins in nets]
        self.nets_of = [[] for _ in vertices]
        for ni, pins in enumerate(self.nets):
            for p in pins:
                self.nets_of[p].append(ni)


def _bfs_order(graph: _FmGraph, rng: random.Random) -> list[int]:
    """Deterministic seeded BFS over shared-net adjacency, all components."""
    n = len(graph.vertices)
    seen = [False] * n
    order = []
    queue = deque()
    remaining = list(range(n))
    rng.shuffle(remaining)
    for start in remaining:
        if seen[start]:
            continue
        seen[start] = True
        queue.append(start)
        while queue:
            v = queue.popleft()
            order.append(v)
            for ni in graph.nets_of[v]:
                for p in graph.nets[ni]:
                    if not seen[p]:
                        seen[p] = True
                        queue.append(p)
    return order


def _fm_bipartition(graph: _FmGraph, caps: tuple[int, int], rng: random.Random,
                    target0: float | None = None, max_passes: int = 16,
                    trace: list | None = None) -> list[int]:
    """Two-way FM with gain buckets; returns side (0/1) per vertex index.

    `trace`, when given, collects (pass start cut, accepted cut) pairs.
    """
    n = len(graph.vertices)
    total = sum(graph.weights)
    if target0 is None:
        target0 = total / 2
    # BFS fill keeps connected logic together in the seed; FM refines it.
    side = [1] * n
    side_w = [0, total]
    for v in _bfs_order(graph, rng):
        if side_w[0] >= target0:
            break
        w = graph.weights[v]
        if side_w[0] + w > caps[0]:
            continue
        side[v] = 0
        side_w[0] += w
        side_w[1] -= w
    # Caps must hold on both sides before any pass runs.
    if side_w[1] > caps[1]:
        for v in range(n):
            if side_w[1] <= caps[1]:
                break
            w = graph.weights[v]
            if side[v] == 1 and w > 0 and side_w[0] + w <= caps[0]:
                side[v] = 0
                side_w[0] += w
                side_w[1] -= w
    if side_w[0] > caps[0] or side_w[1] > caps[1]:
        raise PartitionError("infeasible balance bound: cannot seed partition")

    def net_counts():
        counts = [[0, 0] for _ in graph.nets]
        for ni, pins in enumerate(graph.nets):
            for p in pins:
                counts[ni][side[p]] += 1
        return counts

    def cut_of(counts):
        return sum(1 for c in counts if c[0] and c[1])

    for _pass in range(max_passes):
        counts = net_counts()
        cut = cut_of(counts)
        gains = [0] * n
        for ni, pins in enumerate(graph.nets):
            for p in pins:
                f = side[p]
                if counts[ni][f] == 1:
                    gains[p] += 1
                if counts[ni][1 - f] == 0:
                    gains[p] -= 1
        locked = [False] * n
        heap = []
        for v in range(n):
            heapq.heappush(heap, (-gains[v], v, gains[v]))
        moves = []  # (vertex, cut_after)
        best_cut, best_len = cut, 0
        cur_cut = cut
        moved = 0
        while moved < n:
            entry = None
            skipped = []
            while heap:
                g, v, g_at_push = heapq.heappop(heap)
                if locked[v] or g_at_push != gains[v]:
                    continue
                w = graph.weights[v]
                t = 1 - side[v]
                if side_w[t] + w > caps[t]:
                    skipped.append((g, v, g_at_push))
                    continue
                entry = v
                break
            for s in skipped:
                heapq.heappush(heap, s)
            if entry is None:
                break
            v = entry
            f = side[v]
            t = 1 - f
            move_gain = gains[v]
            locked[v] = True
            # FM incremental gain update around the move of v.
            for ni in graph.nets_of[v]:
                pins = graph.nets[ni]
                if counts[ni][t] == 0:
                    for p in pins:
                        if not locked[p]:
                            gains[p] += 1
                            heapq.heappush(heap, (-gains[p], p, gains[p]))
                elif counts[ni][t] == 1:
                    for p in pins:
                        if not locked[p] and side[p] == t:
                            gains[p] -= 1
                            heapq.heappush(heap, (-gains[p], p, gains[p]))
                counts[ni][f] -= 1
                counts[ni][t] += 1
                if counts[ni][f] == 0:
                    for p in pins:
                        if not locked[p]:
                            gains[p] -= 1
                            heapq.heappush(heap, (-gains[p], p, gains[p]))
                elif counts[ni][f] == 1:
                    for p in pins:
                        if not locked[p] and side[p] == f:
                            gains[p] += 1
                            heapq.heappush(heap, (-gains[p], p, gains[p]))
            cur_cut -= move_gain
            side[v] = t
            side_w[f] -= graph.weights[v]
            side_w[t] += graph.weights[v]
            moved += 1
            moves.append(v)
            if cur_cut < best_cut:
                best_cut, best_len = cur_cut, len(moves)
        # Roll back to the best prefix; reject the pass when nothing improved.
        for v in reversed(moves[best_len:]):
            t = side[v]
            side[v] = 1 - t
            side_w[t] -= graph.weights[v]
            side_w[1 - t] += graph.weights[v]
        if trace is not None:
            trace.append((cut, min(best_cut, cut)))
        if best_cut >= cut:
            break
    return side


def partition_fm(netlist: Netlist, config: PartitionConfig) -> DieAssignment:
    """Fiduccia-Mattheyses min-cut assignment; K > 2 via recursive bisection.

    The per-die capacity is max(UB * W/K, ceil(W/K)) logic weight, so the
    imbalance bound holds whenever it is satisfiable at all.
    """
    if config.num_dies < 2:
        raise PartitionError("partitioning needs at least 2 dies")
    ents = entities(netlist)
    if not ents or all(w == 0 for _n, w in ents):
        raise PartitionError("cannot partition an empty netlist")
    weights = dict(ents)
    total = sum(w for _n, w in ents)
    # Integer per-die capacity; the ceiling term keeps tiny instances
    # feasible when UB*W/K rounds below a whole node.
    cap_per_die = max(int(math.floor(config.ub * total / config.num_dies + 1e-9)),
                      math.ceil(total / config.num_dies))
    if cap_per_die < max(w for _n, w in ents):
        raise PartitionError("infeasible imbalance bound for the node weights")
    all_nets = hyperedges(netlist)
    die_of: dict[str, int] = {}

    def recurse(region: list[str], dies: range, seed_key: str):
        if len(dies) == 1:
            for v in region:
                die_of[v] = dies[0]
            return
        k1 = len(dies) // 2
        caps = (cap_per_die * k1, cap_per_die * (len(dies) - k1))
        region_set = set(region)
        sub_nets = []
        for _net, pins in all_nets:
            inside = tuple(p for p in pins if p in region_set)
            if len(inside) >= 2:
                sub_nets.append(inside)
        graph = _FmGraph(region, weights, sub_nets)
        rng = random.Random("%s/%d:%d" % (seed_key, dies[0], dies[-1]))
        region_w = sum(weights[v] for v in region)
        sides = _fm_bipartition(graph, caps, rng,
                                target0=region_w * k1 / len(dies))
        left = [v for v, s in zip(region, sides) if s == 0]
        right = [v for v, s in zip(region, sides) if s == 1]
        recurse(left, dies[:k1], seed_key)
        recurse(right, dies[k1:], seed_key)

    recurse([name for name, _w in ents], range(config.num_dies), str(config.seed))
    return DieAssignment(config.num_dies, die_of, weights)


# ----------------------------------------------------------------------
# hash labeling

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(name: str) -> int:
    h = _FNV_OFFSET
    for b in name.encode("utf-8"):
        h ^= b
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def partition_hash(netlist: Netlist, num_dies: int) -> DieAssignment:
    """Deterministic per-name labeling: fnv1a64(name) mod K.

    Independent of mapping LUT size for identically named logic and
    stable across runs and platforms.
    """
    if num_dies < 2:
        raise PartitionError("partitioning needs at least 2 dies")
    ents = entities(netlist)
    die_of = {name: fnv1a64(name) % num_dies for name, _w in ents}
    return DieAssignment(num_dies, die_of, dict(ents))


# ----------------------------------------------------------------------
# assignment files


def save_assignment(assignment: DieAssignment, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# dies %d\n" % assignment.num_dies)
        for name in sorted(assignment.die_of):
            fh.write("%s %d\n" % (name, assignment.die_of[name]))


def load_assignment(netlist: Netlist, path, num_dies: int | None = None) -> DieAssignment:
    """Read `<name> <die>` lines; must cover every weighted node.

    Unlisted primary inputs default to the die of their lowest-id reader
    (die 0 when unread) so hand-written files may list logic only.
    """
    entries: dict[str, int] = {}
    header_dies = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#")[0].strip()
            if raw.startswith("# dies "):
                header_dies = int(raw.split()[2])
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PartitionError("line %d: expected '<name> <die>'" % line_no)
            name, die_s = parts
            if name in entries:
                raise PartitionError("line %d: duplicate entry for %r" % (line_no, name))
            try:
                entries[name] = int(die_s)
            except ValueError:
                raise PartitionError("line %d: bad die index %r" % (line_no, die_s)) from None

    ents = entities(netlist)
    known = {name for name, _w in ents}
    for name in entries:
        if name not in known:
            raise PartitionError("assignment names unknown node %r" % name)
    k = num_dies if num_dies is not None else header_dies
    if k is None:
        k = max(entries.values(), default=0) + 1
    k = max(k, 1)
    for name, die in entries.items():
        if not 0 <= die < k:
            raise PartitionError("die index %d for %r out of range [0, %d)" % (die, name, k))

    die_of: dict[str, int] = {}
    weights = dict(ents)
    for name, w in ents:
        if name in entries:
            die_of[name] = entries[name]
        elif w == 0:
            use = netlist.readers_of(name)
            reader_dies = []
            for nid in sorted(use.node_ids):
                rname = netlist.nodes[nid].output_net
                if rname in entries:
                    reader_dies.append(entries[rname])
            for idx in sorted(use.latch_idxs):
                rname = netlist.latches[idx].output_net
                if rname in entries:
                    reader_dies.append(entries[rname])
            die_of[name] = reader_dies[0] if reader_dies else 0
        else:
            raise PartitionError("assignment file is missing node %r" % name)
    return DieAssignment(k, die_of, weights)


def assignment_for(netlist: Netlist, config: PartitionConfig) -> DieAssignment:
    """Dispatch on the configured partitioning mode."""
    if config.mode == "fm_mincut":
        return partition_fm(netlist, config)
    if config.mode == "hash_label":
        return partition_hash(netlist, config.num_dies)
    if config.mode == "external_file":
        if not config.partition_file:
            raise PartitionError("external_file mode needs a partition file")
        return load_assignment(netlist, config.partition_file, config.num_dies)
    raise PartitionError("unknown partition mode %r" % config.mode)


def validate_assignment(netlist: Netlist, assignment: DieAssignment):
    """Every entity assigned, die indices in range."""
    for name, _w in entities(netlist):
        die = assignment.die(name)
        if not 0 <= die < assignment.num_dies:
            raise PartitionError("die index %d for %r out of range" % (die, name))
