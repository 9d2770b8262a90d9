import random

import pytest

from sllresub import bench
from sllresub.equiv import check_equivalence
from sllresub.netlist import (BlifParseError, Netlist, NetlistError,
                              has_generated_names, parse_blif, write_blif)
from sllresub.truthtab import TruthTable

from conftest import DEMO_BLIF, TABLE2


def test_parse_and_cover():
    n = parse_blif(".model c\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end")
    assert n.lut_count() == 1
    node = n.node_of_net("y")
    assert node.fanins == ["a", "b"]
    assert node.function.bit_list() == [0, 0, 0, 1]


def test_empty_cover_is_constant_zero():
    n = parse_blif(".model c\n.outputs y\n.names y\n.end")
    node = n.node_of_net("y")
    assert node.function == TruthTable.constant(0)


def test_bare_one_is_constant_one():
    n = parse_blif(".model c\n.outputs y\n.names y\n1\n.end")
    assert n.node_of_net("y").function == TruthTable.constant(1)


def test_parse_demo_circuit(demo_netlist):
    n = demo_netlist
    assert n.primary_inputs == ["a", "b", "c", "d"]
    assert n.primary_outputs == ["Y", "F"]
    assert n.lut_count() == 3
    for name in ("X", "Y", "F"):
        assert n.node_of_net(name).function.bits == 0b0110  # 2-input xor


@pytest.mark.parametrize("text,message", [
    (".model m\n.inputs a\n.outputs y\n.subckt foo x=a y=y\n.end", "subckt"),
    (".model m\n.inputs a\n.outputs y\n.names a y\n1 1\n.names a y\n0 1\n.end",
     "multiple drivers"),
    (".model m\n.inputs a\n.outputs y\n.names a q y\n11 1\n.end", "no driver"),
    (".model m\n.inputs a\n.outputs y\n.names a y\n1 0\n.end", "off-set"),
    (".model m\n.inputs a\n.outputs y\n.names a y\n1 -\n.end", "don't-care output"),
    (".model m\n.inputs a\n.outputs y\n.names a a y\n11 1\n.end", "duplicate fanins"),
    (".model m\n.inputs a\n.outputs y\n.names a y\n1 1\n.end\n.names a z\n1 1",
     "after .end"),
    (".model m\n.outputs y\n.names y\n.end\n.model m2\n.end", "after .end"),
    (".model m\n.inputs a\n.outputs y\n.latch a y q\n.end", "init"),
    (".model m\n.inputs a\n.outputs y\n.gate and2 a=a y=y\n.end", "unsupported"),
])
def test_parse_errors(text, message):
    with pytest.raises(BlifParseError) as err:
        parse_blif(text)
    assert message in str(err.value)


def test_parse_error_carries_line_number():
    with pytest.raises(BlifParseError) as err:
        parse_blif(".model m\n.inputs a\n.outputs y\n.names a y\n1 0\n.end")
    assert "line 5" in str(err.value)


def test_cycle_detection():
    text = ".model m\n.inputs a\n.outputs y\n.names y2 y\n1 1\n.names y y2\n1 1\n.end"
    with pytest.raises(BlifParseError) as err:
        parse_blif(text)
    assert "cycle" in str(err.value)


def test_k_max_enforced():
    fanins = " ".join("i%d" % i for i in range(7))
    text = ".model m\n.inputs %s\n.outputs y\n.names %s y\n%s 1\n.end" % (
        fanins, fanins, "1" * 7)
    with pytest.raises(BlifParseError) as err:
        parse_blif(text, k_max=6)
    assert "k_max" in str(err.value)
    parse_blif(text, k_max=7)  # configurable


def test_latch_forms_and_roundtrip():
    text = (".model m\n.inputs d0 d1 d2\n.outputs q0\n"
            ".latch d0 q0 0\n.latch d1 q1 re clk 1\n.latch d2 q2\n.end")
    n = parse_blif(text)
    assert [l.init_value for l in n.latches] == ["0", "1", "unknown"]
    again = parse_blif(write_blif(n))
    assert [l.init_value for l in again.latches] == ["0", "1", "unknown"]
    assert {l.output_net for l in again.latches} == {"q0", "q1", "q2"}


def test_comments_and_continuations():
    text = (".model m  # a model\n.inputs a \\\n b\n.outputs y\n"
            ".names a b y  # and\n11 1\n.end\n")
    n = parse_blif(text)
    assert n.primary_inputs == ["a", "b"]
    assert n.node_of_net("y").function.bits == 0b1000


def test_write_is_topological_with_name_tiebreak(demo_netlist):
    text = write_blif(demo_netlist)
    names = [l.split()[-1] for l in text.splitlines() if l.startswith(".names")]
    assert names == ["F", "X", "Y"]  # level 1: F, X (name order), then Y


def test_roundtrip_demo_circuit(demo_netlist):
    again = parse_blif(write_blif(demo_netlist))
    assert again.primary_inputs == demo_netlist.primary_inputs
    assert again.primary_outputs == demo_netlist.primary_outputs
    assert again.lut_count() == demo_netlist.lut_count()
    for node in demo_netlist.nodes.values():
        twin = again.node_of_net(node.output_net)
        assert twin.fanins == node.fanins
        assert twin.function == node.function


def test_buffer_feedthrough_roundtrip():
    text = ".model m\n.inputs a b\n.outputs ya yb\n.names a ya\n1 1\n.names b yb\n1 1\n.end"
    n = parse_blif(text)
    assert write_blif(parse_blif(write_blif(n))) == write_blif(n)


def test_random_netlists_roundtrip_bit_exact():
    for seed in range(100):
        n = bench.random_netlist(seed, num_pis=6, num_nodes=14, k=4,
                                 num_pos=3, num_latches=seed % 3)
        again = parse_blif(write_blif(n))
        assert again.lut_count() == n.lut_count()
        for node in n.nodes.values():
            twin = again.node_of_net(node.output_net)
            assert twin.fanins == node.fanins, node.output_net
            assert twin.function == node.function, node.output_net
        assert write_blif(again) == write_blif(n)


def test_merge_cubes_roundtrip_preserves_function():
    for seed in range(20):
        n = bench.random_netlist(seed, num_pis=6, num_nodes=12, k=4, num_pos=3)
        again = parse_blif(write_blif(n, merge_cubes=True))
        assert check_equivalence(n, again).equivalent


def test_topological_order_demo(demo_netlist):
    order = [nd.output_net for nd in demo_netlist.topological_order()]
    assert order.index("X") < order.index("Y")
    assert order == ["X", "F", "Y"]  # (level, id) determinism


def test_topological_order_single_node():
    n = parse_blif(".model m\n.inputs a\n.outputs y\n.names a y\n1 1\n.end")
    assert [nd.output_net for nd in n.topological_order()] == ["y"]


def test_topological_order_buffer_chain():
    lines = [".model m", ".inputs a", ".outputs b9"]
    prev = "a"
    for i in range(10):
        lines += [".names %s b%d" % (prev, i), "1 1"]
        prev = "b%d" % i
    n = parse_blif("\n".join(lines) + "\n.end")
    assert [nd.output_net for nd in n.topological_order()] == ["b%d" % i for i in range(10)]


def test_tfi_tfo_demo(demo_netlist):
    n = demo_netlist
    Y, X, F = (n.node_of_net(s) for s in "YXF")
    assert {n.nodes[i].output_net for i in n.tfi(Y)} == {"X"}
    assert n.cone_input_nets(n.tfi(Y) | {Y.id}) == ["a", "b", "c"]
    assert {n.nodes[i].output_net for i in n.tfo(X, 1)} == {"Y"}
    assert n.tfi(F) == set()          # PI-only fanins
    assert n.tfi(Y, 0) == set()
    assert n.tfo(Y) == set()          # PO terminates


def test_tfi_tfo_depth_limits():
    lines = [".model m", ".inputs a", ".outputs c2"]
    prev = "a"
    for i in range(3):
        lines += [".names %s c%d" % (prev, i), "1 1"]
        prev = "c%d" % i
    n = parse_blif("\n".join(lines) + "\n.end")
    c2 = n.node_of_net("c2")
    assert {n.nodes[i].output_net for i in n.tfi(c2, 1)} == {"c1"}
    assert {n.nodes[i].output_net for i in n.tfi(c2, 2)} == {"c0", "c1"}
    c0 = n.node_of_net("c0")
    assert {n.nodes[i].output_net for i in n.tfo(c0, 1)} == {"c1"}
    with pytest.raises(NetlistError):
        n.tfi(9999)


def test_mffc_demo(demo_netlist):
    n = demo_netlist
    assert {n.nodes[i].output_net for i in n.mffc(n.node_of_net("F"))} == {"F"}
    assert {n.nodes[i].output_net for i in n.mffc(n.node_of_net("Y"))} == {"X", "Y"}


def test_mffc_singleton():
    n = parse_blif(".model m\n.inputs a b\n.outputs y\n.names a b y\n11 1\n.end")
    y = n.node_of_net("y")
    assert n.mffc(y) == {y.id}


def test_mffc_chain():
    n = parse_blif(".model m\n.inputs i\n.outputs c\n"
                   ".names i a\n1 1\n.names a b\n1 1\n.names b c\n1 1\n.end")
    c = n.node_of_net("c")
    assert {n.nodes[i].output_net for i in n.mffc(c)} == {"a", "b", "c"}


def _mffc_by_deletion(netlist, root_id):
    """Brute-force oracle: delete the root, then sweep zero-fanout nodes."""
    refs = {}
    for node in netlist.nodes.values():
        use = netlist.readers_of(node.output_net)
        refs[node.id] = len(use.node_ids) + len(use.latch_idxs) + (1 if use.is_po else 0)
    removed = {root_id}
    changed = True
    while changed:
        changed = False
        for node in netlist.nodes.values():
            if node.id in removed:
                continue
            use = netlist.readers_of(node.output_net)
            if use.is_po or use.latch_idxs:
                continue
            if use.node_ids and all(r in removed for r in use.node_ids):
                removed.add(node.id)
                changed = True
    return removed


def test_mffc_matches_deletion_fixpoint_on_random_netlists():
    for seed in range(25):
        n = bench.random_netlist(seed, num_pis=5, num_nodes=30, k=4, num_pos=4,
                                 num_latches=seed % 2)
        for node in n.nodes.values():
            assert n.mffc(node) == _mffc_by_deletion(n, node.id), \
                "seed %d node %s" % (seed, node.output_net)


def test_simulate_demo_row(demo_netlist):
    out = demo_netlist.simulate({"a": 1, "b": 0, "c": 0, "d": 0})
    assert out == {"Y": 1, "F": 1}


def test_simulate_exhaustive_matches_reference_grid(demo_netlist):
    n = demo_netlist
    for a, b, c, d, X, Y, F, _Fp, _care in TABLE2:
        out = n.simulate({"a": a, "b": b, "c": c, "d": d})
        assert out["Y"] == Y and out["F"] == F
        # X is internal; check through the bit-parallel evaluator
        vals = n.eval_masks({"a": a, "b": b, "c": c, "d": d}, 1)
        assert vals["X"] == X


def test_simulate_all_zero_xor_chain():
    lines = [".model m", ".inputs a b c d", ".outputs x2"]
    lines += [".names a b x0", "10 1", "01 1"]
    lines += [".names x0 c x1", "10 1", "01 1"]
    lines += [".names x1 d x2", "10 1", "01 1"]
    n = parse_blif("\n".join(lines) + "\n.end")
    assert n.simulate({"a": 0, "b": 0, "c": 0, "d": 0}) == {"x2": 0}


def test_simulate_missing_bit(demo_netlist):
    with pytest.raises(NetlistError):
        demo_netlist.simulate({"a": 1, "b": 0, "c": 0})


def test_simulate_latch_boundaries():
    text = (".model m\n.inputs d\n.outputs y\n.latch nd q 0\n"
            ".names d q nd\n10 1\n01 1\n.names q y\n1 1\n.end")
    n = parse_blif(text)
    out = n.simulate({"d": 1, "q": 0})
    assert out == {"y": 0, "nd": 1}  # latch input is a pseudo-PO


def test_simulate_matches_masks_on_random_netlists():
    rng = random.Random(7)
    for seed in range(10):
        n = bench.random_netlist(seed, num_pis=5, num_nodes=20, k=4, num_pos=4)
        masks, width = n.exhaustive_masks()
        values = n.eval_masks(masks, width)
        sources = sorted(n.source_nets())
        for _ in range(20):
            m = rng.randrange(width)
            assignment = {net: (m >> i) & 1 for i, net in enumerate(sources)}
            sim = n.simulate(assignment)
            for sink, v in sim.items():
                assert (values[sink] >> m) & 1 == v


def test_generated_prefix_detection(demo_netlist):
    assert not has_generated_names(demo_netlist)
    n = parse_blif(".model m\n.inputs __sll_x_in\n.outputs y\n"
                   ".names __sll_x_in y\n1 1\n.end")
    assert has_generated_names(n)


def test_net_index_shape(demo_netlist):
    idx = demo_netlist.net_index()
    driver, readers = idx["X"]
    assert driver[0] == "node"
    assert any(kind == "node" for kind, _ in readers)
    assert idx["Y"][1][-1] == ("po", "Y")
