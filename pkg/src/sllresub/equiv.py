"""Combinational equivalence checking by bit-parallel miter simulation.

Latch boundaries are compared combinationally: latch outputs join the
primary inputs and latch inputs join the primary outputs. Exhaustive
mode misses nothing; random mode misses a mismatch of density p with
probability (1 - p)^N after N vectors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .netlist import Netlist, NetlistError
from .truthtab import full_mask, var_mask

EXHAUSTIVE_PI_BOUND = 18
DEFAULT_VECTOR_BUDGET = 100_000
_CHUNK = 8192


class EquivError(Exception):
    pass


@dataclass
class EquivVerdict:
    equivalent: bool
    mode: str                      # 'exhaustive' | 'random'
    vectors_checked: int
    counterexample: dict[str, int] | None = None
    mismatched_output: str | None = None

    def __bool__(self):
        return self.equivalent


def _check_interfaces(a: Netlist, b: Netlist):
    if set(a.primary_inputs) != set(b.primary_inputs):
        raise EquivError("primary input name sets differ")
    if set(a.primary_outputs) != set(b.primary_outputs):
        raise EquivError("primary output name sets differ")
    if {l.output_net for l in a.latches} != {l.output_net for l in b.latches}:
        raise EquivError("latch output name sets differ")
    if {l.input_net for l in a.latches} != {l.input_net for l in b.latches}:
        raise EquivError("latch input name sets differ")


def _care_mask(care: Netlist | None, source_masks: dict[str, int], width: int) -> int:
    if care is None:
        return full_mask(width)
    if len(care.primary_outputs) != 1:
        raise EquivError("care predicate must have exactly one output")
    missing = [p for p in care.source_nets() if p not in source_masks]
    if missing:
        raise EquivError("care predicate inputs %s are not primary inputs" % missing)
    values = care.eval_masks({p: source_masks[p] for p in care.source_nets()}, width)
    return values[care.primary_outputs[0]]


def _first_mismatch(a_vals, b_vals, sinks, care_bits, width):
    for sink in sinks:
        diff = (a_vals[sink] ^ b_vals[sink]) & care_bits
        if diff:
            return sink, (diff & -diff).bit_length() - 1
    return None, None


def check_equivalence(a: Netlist, b: Netlist, mode: str = "auto", seed: int = 0,
                      vector_budget: int = DEFAULT_VECTOR_BUDGET,
                      care: Netlist | None = None,
                      exhaustive_pi_bound: int = EXHAUSTIVE_PI_BOUND) -> EquivVerdict:
    """Compare two netlists with identical PI/PO/latch interfaces.

    mode 'exhaustive' enumerates all input minterms (inputs capped at
    `exhaustive_pi_bound`), 'random' draws `vector_budget` seeded vectors,
    'auto' picks exhaustive when it fits. An optional single-output `care`
    netlist over the primary inputs restricts the compared input space.
    """
    _check_interfaces(a, b)
    sources = sorted(a.source_nets())
    sinks = sorted(a.sink_nets())
    if mode not in ("auto", "exhaustive", "random"):
        raise EquivError("unknown mode %r" % mode)
    if mode == "exhaustive" and len(sources) > exhaustive_pi_bound:
        raise EquivError("exhaustive mode refused beyond %d inputs (have %d)"
                         % (exhaustive_pi_bound, len(sources)))
    if mode == "auto":
        mode = "exhaustive" if len(sources) <= exhaustive_pi_bound else "random"

    if mode == "exhaustive":
        width = 1 << len(sources)
        masks = {net: var_mask(i, len(sources)) for i, net in enumerate(sources)}
        a_vals = a.eval_masks(masks, width)
        b_vals = b.eval_masks(masks, width)
        care_bits = _care_mask(care, masks, width)
        sink, bit = _first_mismatch(a_vals, b_vals, sinks, care_bits, width)
        if sink is None:
            return EquivVerdict(True, "exhaustive", width)
        assignment = {net: (bit >> i) & 1 for i, net in enumerate(sources)}
        verdict = EquivVerdict(False, "exhaustive", width, assignment, sink)
        _confirm(a, b, verdict)
        return verdict

    rng = random.Random(seed)
    checked = 0
    while checked < vector_budget:
        width = min(_CHUNK, vector_budget - checked)
        masks = {net: rng.getrandbits(width) for net in sources}
        a_vals = a.eval_masks(masks, width)
        b_vals = b.eval_masks(masks, width)
        care_bits = _care_mask(care, masks, width)
        sink, bit = _first_mismatch(a_vals, b_vals, sinks, care_bits, width)
        checked += width
        if sink is not None:
            assignment = {net: (masks[net] >> bit) & 1 for net in sources}
            assignment = _minimize(a, b, assignment, care)
            verdict = EquivVerdict(False, "random", checked,
                                   assignment, _mismatch_output(a, b, assignment))
            _confirm(a, b, verdict)
            return verdict
    return EquivVerdict(True, "random", checked)


def _mismatch_output(a: Netlist, b: Netlist, assignment: dict[str, int]) -> str:
    va = a.simulate(assignment)
    vb = b.simulate(assignment)
    for sink in sorted(va):
        if va[sink] != vb[sink]:
            return sink
    raise EquivError("counterexample does not re-simulate to a mismatch")


def _still_differs(a: Netlist, b: Netlist, assignment: dict[str, int],
                   care: Netlist | None) -> bool:
    if care is not None:
        cvals = care.simulate({p: assignment[p] for p in care.source_nets()})
        if not cvals[care.primary_outputs[0]]:
            return False
    va = a.simulate(assignment)
    vb = b.simulate(assignment)
    return any(va[s] != vb[s] for s in va)


def _minimize(a: Netlist, b: Netlist, assignment: dict[str, int],
              care: Netlist | None) -> dict[str, int]:
    """Greedily clear input bits while the mismatch (within care) persists."""
    current = dict(assignment)
    for net in sorted(current):
        if current[net] == 0:
            continue
        trial = dict(current)
        trial[net] = 0
        if _still_differs(a, b, trial, care):
            current = trial
    return current


def _confirm(a: Netlist, b: Netlist, verdict: EquivVerdict):
    _mismatch_output(a, b, verdict.counterexample)
