import itertools
import random

import pytest

from sllresub import bench
from sllresub.metrics import count_sll
from sllresub.netlist import parse_blif
from sllresub.partition import (DieAssignment, PartitionConfig, PartitionError,
                                _FmGraph, _fm_bipartition, assignment_for, cut_size,
                                entities, fnv1a64, hyperedges, imbalance,
                                load_assignment, partition_fm, partition_hash,
                                save_assignment, validate_assignment)


def _uniform(names, dies):
    return DieAssignment(max(dies.values()) + 1,
                         dict(dies), {n: 1 for n in names})


def test_config_rejects_bad_ub():
    with pytest.raises(PartitionError):
        PartitionConfig(num_dies=2, ub=0.9)


def test_imbalance_hand_values():
    a = _uniform([f"n{i}" for i in range(10)],
                 {f"n{i}": 0 if i < 6 else 1 for i in range(10)})
    assert imbalance(a) == pytest.approx(1.2)
    b = _uniform([f"n{i}" for i in range(10)],
                 {f"n{i}": i % 2 for i in range(10)})
    assert imbalance(b) == 1.0
    c = _uniform([f"n{i}" for i in range(9)],
                 {f"n{i}": 0 if i < 5 else 1 for i in range(9)})
    assert imbalance(c) == pytest.approx(5 / 4.5)


def test_imbalance_empty_errors():
    with pytest.raises(PartitionError):
        DieAssignment(2, {}, {}).imbalance()


def test_disjoint_groups_cut_zero():
    txt = [".model cl", ".inputs x0 x1 x2 x3 y0 y1 y2 y3", ".outputs px py"]
    txt += [".names x0 x1 ax", "11 1", ".names ax x2 bx", "11 1",
            ".names bx x3 px", "11 1"]
    txt += [".names y0 y1 ay", "11 1", ".names ay y2 by", "11 1",
            ".names by y3 py", "11 1", ".end"]
    n = parse_blif("\n".join(txt))
    for seed in range(4):
        a = partition_fm(n, PartitionConfig(num_dies=2, ub=1.25, seed=seed))
        assert cut_size(n, a) == 0
        assert a.imbalance() == 1.0


def test_demo_circuit_split_matches_enumeration(demo_netlist):
    n = demo_netlist
    nets = hyperedges(n)
    logic = ["X", "Y", "F"]
    pis = ["a", "b", "c", "d"]
    best = None
    for logic_dies in itertools.product((0, 1), repeat=3):
        if len(set(logic_dies)) < 2:
            continue  # only 2/1 splits
        for pi_dies in itertools.product((0, 1), repeat=4):
            die_of = dict(zip(logic, logic_dies)) | dict(zip(pis, pi_dies))
            cut = sum(1 for _d, pins in nets
                      if len({die_of[p] for p in pins}) > 1)
            best = cut if best is None else min(best, cut)
    assert best <= 2  # a balanced 2/1 split with small cut exists
    a = partition_fm(n, PartitionConfig(num_dies=2, ub=1.25, seed=0))
    assert sorted(a.die_weights()) == [1, 2]
    assert cut_size(n, a) == best


def test_fm_deterministic_for_fixed_seed():
    n = bench.random_netlist(42, num_pis=12, num_nodes=100, k=4, num_pos=8)
    cfg = PartitionConfig(num_dies=2, ub=1.25, seed=5)
    a = partition_fm(n, cfg)
    b = partition_fm(n, cfg)
    assert a.die_of == b.die_of


def test_fm_respects_imbalance_bound_randomized():
    for seed in range(6):
        n = bench.random_netlist(seed + 100, num_pis=10,
                                 num_nodes=60 + 15 * seed, k=4, num_pos=6,
                                 num_latches=seed % 3)
        for k in (2, 3, 4):
            a = partition_fm(n, PartitionConfig(num_dies=k, ub=1.25, seed=seed))
            assert a.imbalance() <= 1.25 + 1e-12, (seed, k)
            validate_assignment(n, a)


def test_fm_pass_cuts_never_increase():
    n = bench.random_netlist(7, num_pis=10, num_nodes=80, k=4, num_pos=6)
    names = [e for e, _w in entities(n)]
    weights = dict(entities(n))
    graph = _FmGraph(names, weights, [pins for _d, pins in hyperedges(n)])
    total = sum(graph.weights)
    trace = []
    _fm_bipartition(graph, (total, total), random.Random(3), trace=trace)
    for start, accepted in trace:
        assert accepted <= start
    starts = [s for s, _a in trace]
    assert starts == sorted(starts, reverse=True)


def test_fm_rejects_empty_netlist():
    empty = parse_blif(".model m\n.inputs a\n.end")
    with pytest.raises(PartitionError):
        partition_fm(empty, PartitionConfig(num_dies=2))
    # a single weighted node still splits (the other die stays empty)
    n = parse_blif(".model m\n.inputs a\n.outputs y\n.names a y\n1 1\n.end")
    a = partition_fm(n, PartitionConfig(num_dies=2))
    assert sorted(a.die_weights()) == [0, 1]


def test_hash_known_vector_and_stability(demo_netlist):
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C
    a = partition_hash(demo_netlist, 3)
    b = partition_hash(demo_netlist, 3)
    assert a.die_of == b.die_of


def test_hash_rename_changes_only_that_label(demo_netlist):
    a = partition_hash(demo_netlist, 2)
    renamed = parse_blif(
        ".model m\n.inputs a b c d\n.outputs Y F\n"
        ".names a b Xz\n10 1\n01 1\n.names Xz c Y\n10 1\n01 1\n"
        ".names a d F\n10 1\n01 1\n.end")
    b = partition_hash(renamed, 2)
    for name in ("a", "b", "c", "d", "Y", "F"):
        assert a.die_of[name] == b.die_of[name]


def test_hash_balance_on_large_netlist():
    n = bench.random_netlist(1, num_pis=16, num_nodes=1200, k=4, num_pos=10)
    a = partition_hash(n, 2)
    assert a.imbalance() <= 1.15


def test_assignment_file_roundtrip(tmp_path, demo_netlist, demo_assignment):
    path = tmp_path / "p.txt"
    save_assignment(demo_assignment, path)
    loaded = load_assignment(demo_netlist, path)
    assert loaded.die_of == demo_assignment.die_of
    assert loaded.num_dies == demo_assignment.num_dies


def test_assignment_file_errors(tmp_path, demo_netlist):
    missing = tmp_path / "missing.txt"
    missing.write_text("# dies 2\nX 0\nY 1\n")  # F absent
    with pytest.raises(PartitionError) as err:
        load_assignment(demo_netlist, missing)
    assert "'F'" in str(err.value)

    out_of_range = tmp_path / "range.txt"
    out_of_range.write_text("# dies 2\nX 0\nY 1\nF 2\n")
    with pytest.raises(PartitionError) as err:
        load_assignment(demo_netlist, out_of_range)
    assert "out of range" in str(err.value)

    dup = tmp_path / "dup.txt"
    dup.write_text("X 0\nX 1\nY 0\nF 0\n")
    with pytest.raises(PartitionError) as err:
        load_assignment(demo_netlist, dup)
    assert "duplicate" in str(err.value)

    unknown = tmp_path / "unk.txt"
    unknown.write_text("X 0\nY 1\nF 0\nnope 1\n")
    with pytest.raises(PartitionError) as err:
        load_assignment(demo_netlist, unknown)
    assert "unknown" in str(err.value)


def test_assignment_file_defaults_pis_to_reader_die(tmp_path, demo_netlist):
    path = tmp_path / "p.txt"
    path.write_text("# dies 2\nX 0\nY 1\nF 1\n")
    loaded = load_assignment(demo_netlist, path)
    assert loaded.die_of["b"] == 0  # b feeds only X
    assert loaded.die_of["c"] == 1  # c feeds only Y
    assert loaded.die_of["a"] == 0  # lowest-id reader is X


def test_assignment_for_dispatch(tmp_path, demo_netlist, demo_assignment):
    path = tmp_path / "p.txt"
    save_assignment(demo_assignment, path)
    cfg = PartitionConfig(num_dies=2, mode="external_file", partition_file=str(path))
    assert assignment_for(demo_netlist, cfg).die_of == demo_assignment.die_of
    with pytest.raises(PartitionError):
        assignment_for(demo_netlist, PartitionConfig(num_dies=2, mode="bogus"))


def test_cut_equals_net_level_sll_on_two_pin_nets():
    # chain netlist: every net has exactly one reader
    lines = [".model chain", ".inputs a", ".outputs n9"]
    prev = "a"
    for i in range(10):
        lines += [".names %s n%d" % (prev, i), "0 1"]
        prev = "n%d" % i
    n = parse_blif("\n".join(lines) + "\n.end")
    for seed in range(4):
        a = partition_fm(n, PartitionConfig(num_dies=2, ub=1.25, seed=seed))
        assert cut_size(n, a) == count_sll(n, a)
