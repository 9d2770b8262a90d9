"""Truth tables packed into Python integers.

Bit ``m`` of a table is the output value for the input minterm ``m``,
where input 0 is the least significant bit of the minterm index. Any
comparison against tables produced with another bit order has to be
normalized first.
"""

from __future__ import annotations

from dataclasses import dataclass


def full_mask(width: int) -> int:
    """All-ones mask of `width` bits."""
    return (1 << width) - 1


def var_mask(i: int, num_vars: int) -> int:
    """Bit-parallel value of variable `i` over all 2**num_vars minterms.

    Bit m of the result is ((m >> i) & 1). Used to seed exhaustive
    bit-parallel simulation.
    """
    period = 1 << (1 << i)
    return full_mask(1 << num_vars) // (period + 1) * (period // 2) * 2


@dataclass(frozen=True)
class TruthTable:
    """Boolean function of `num_inputs` variables, one bit per minterm."""

    num_inputs: int
    bits: int

    def __post_init__(self):
        if self.num_inputs < 0:
            raise ValueError("num_inputs must be >= 0")
        if not 0 <= self.bits <= full_mask(self.num_minterms):
            raise ValueError("truth table bits out of range for %d inputs" % self.num_inputs)

    @property
    def num_minterms(self) -> int:
        return 1 << self.num_inputs

    @staticmethod
    def constant(value: int | bool, num_inputs: int = 0) -> "TruthTable":
        bits = full_mask(1 << num_inputs) if value else 0
        return TruthTable(num_inputs, bits)

    @staticmethod
    def from_bit_list(values) -> "TruthTable":
        values = list(values)
        n = len(values).bit_length() - 1
        if 1 << n != len(values):
            raise ValueError("bit list length must be a power of two")
        bits = 0
        for m, v in enumerate(values):
            if v:
                bits |= 1 << m
        return TruthTable(n, bits)

    @staticmethod
    def from_minterms(num_inputs: int, minterms) -> "TruthTable":
        bits = 0
        for m in minterms:
            bits |= 1 << m
        return TruthTable(num_inputs, bits)

    def bit(self, minterm: int) -> int:
        return (self.bits >> minterm) & 1

    def bit_list(self) -> list[int]:
        return [(self.bits >> m) & 1 for m in range(self.num_minterms)]

    def on_minterms(self) -> list[int]:
        return [m for m in range(self.num_minterms) if (self.bits >> m) & 1]

    def is_constant(self) -> bool:
        return self.bits == 0 or self.bits == full_mask(self.num_minterms)

    def depends_on(self, i: int) -> bool:
        """True when the function value changes with input `i` somewhere."""
        step = 1 << i
        return any((self.bits >> m) & 1 != (self.bits >> (m | step)) & 1
                   for m in range(self.num_minterms) if not m & step)

    def eval_assignment(self, values) -> int:
        """Evaluate on one assignment (sequence of 0/1, index = input)."""
        m = 0
        for i, v in enumerate(values):
            if v:
                m |= 1 << i
        return (self.bits >> m) & 1

    def eval_masks(self, fanin_masks: list[int], width: int) -> int:
        """Bit-parallel evaluation over `width` patterns.

        `fanin_masks[i]` holds the value of input i in each pattern; the
        result packs the function output the same way.
        """
        full = full_mask(width)
        if self.num_inputs == 0:
            return full if self.bits else 0
        ons = self.on_minterms()
        # Evaluating the smaller of on-set/off-set halves the work.
        invert = len(ons) > self.num_minterms // 2
        if invert:
            ons = [m for m in range(self.num_minterms) if not (self.bits >> m) & 1]
        out = 0
        for m in ons:
            term = full
            for i, vm in enumerate(fanin_masks):
                term &= vm if (m >> i) & 1 else full & ~vm
                if not term:
                    break
            out |= term
        if invert:
            out = full & ~out
        return out


def cover_to_table(num_inputs: int, rows: list[str]) -> TruthTable:
    """Compile BLIF on-set cover rows (strings over 0/1/-) to a table."""
    bits = 0
    for row in rows:
        if len(row) != num_inputs:
            raise ValueError("cover row %r does not match %d inputs" % (row, num_inputs))
        free = [i for i, c in enumerate(row) if c == "-"]
        base = 0
        for i, c in enumerate(row):
            if c == "1":
                base |= 1 << i
            elif c not in "0-":
                raise ValueError("bad cover character %r" % c)
        for k in range(1 << len(free)):
            m = base
            for j, i in enumerate(free):
                if (k >> j) & 1:
                    m |= 1 << i
            bits |= 1 << m
    return TruthTable(num_inputs, bits)


def table_to_cover(table: TruthTable, merge_cubes: bool = False) -> list[str]:
    """On-set cover rows for a table, one row per minterm by default.

    With `merge_cubes`, adjacent cube pairs are fused into `-` cubes
    (exact cover, not a minimal one).
    """
    rows = []
    for m in table.on_minterms():
        rows.append("".join("1" if (m >> i) & 1 else "0" for i in range(table.num_inputs)))
    if not merge_cubes or not rows:
        return rows
    cubes = set(rows)
    while True:
        merged = set()
        used = set()
        index = set(cubes)
        for c in sorted(cubes):
            for i, ch in enumerate(c):
                if ch == "-":
                    continue
                partner = c[:i] + ("1" if ch == "0" else "0") + c[i + 1:]
                if partner in index:
                    merged.add(c[:i] + "-" + c[i + 1:])
                    used.add(c)
                    used.add(partner)
        if not merged:
            break
        cubes = (cubes - used) | merged

    def subsumes(a: str, b: str) -> bool:
        return all(ca == "-" or ca == cb for ca, cb in zip(a, b))

    kept: list[str] = []
    for c in sorted(cubes, key=lambda c: (-c.count("-"), c)):
        if not any(subsumes(k, c) for k in kept):
            kept.append(c)
    return sorted(kept)
