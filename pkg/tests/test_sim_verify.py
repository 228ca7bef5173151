"""Tests for the simulator and verification oracles.

The vectorized and per-state evaluators are checked against each other
and against hand-computed literals; neither is ever treated as the sole
source of truth.
"""
from __future__ import annotations

import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from quditsynth.block_synth import BlockOp, BlockProgram, block_lower_bound, synthesize_blocks
from quditsynth.gate_synth import (
    Circuit,
    Controlled,
    CostModel,
    MultiX,
    Pair,
    SingleX,
    algorithm1_synthesize,
    dcmu_children,
    lower_circuit,
)
from quditsynth.perm_core import Permutation, compose
from quditsynth.sim_verify import (
    StateSpace,
    block_apply_state,
    block_program_to_perm,
    circuit_apply_state,
    circuit_to_perm,
    cost_report,
    gate_lower_bound,
    report_to_json,
    verify_equiv,
)


# ---------------------------------------------------------------------------
# State space and single-gate semantics
# ---------------------------------------------------------------------------


def test_state_space():
    s = StateSpace(3, 4)
    assert s.size == 81
    with pytest.raises(ValueError):
        StateSpace(1, 3)
    with pytest.raises(ValueError):
        StateSpace(2, 80)  # 2^80 does not fit native indexing


def test_empty_circuit_is_identity():
    perm = circuit_to_perm(Circuit(3, 3, 0, []))
    assert list(perm.map) == list(range(27))


def test_single_x_literal():
    perm = circuit_to_perm(Circuit(1, 3, 0, [SingleX(0, 0, 1)]))
    assert list(perm.map) == [1, 0, 2]


def test_multi_x_literal():
    g = MultiX((1, 0), (0, 1), (2, 0))
    perm = circuit_to_perm(Circuit(2, 3, 0, [g]))
    assert list(perm.map) == [0, 6, 2, 3, 4, 5, 1, 7, 8]


def test_controlled_literal():
    g = Controlled(((1, 2),), SingleX(0, 0, 1))
    perm = circuit_to_perm(Circuit(2, 3, 0, [g]))
    assert list(perm.map) == [0, 1, 2, 3, 4, 5, 7, 6, 8]


def test_pair_applies_both_halves():
    g = Pair(SingleX(0, 0, 1), SingleX(1, 0, 2))
    perm = circuit_to_perm(Circuit(2, 3, 0, [g]))
    single = compose(
        circuit_to_perm(Circuit(2, 3, 0, [SingleX(1, 0, 2)])),
        circuit_to_perm(Circuit(2, 3, 0, [SingleX(0, 0, 1)])),
    )
    assert perm.map == single.map


def test_double_controlled_pair_equals_its_ladder():
    # The two-control involution pair and its eight-gate expansion are the
    # same permutation, with or without the expansion's ordering details.
    pair = Pair(
        Controlled(((2, 1), (1, 0)), SingleX(0, 0, 2)),
        Controlled(((2, 1), (1, 1)), SingleX(0, 0, 2)),
    )
    ladder = dcmu_children(pair, 3)
    left = circuit_to_perm(Circuit(3, 3, 0, [pair]))
    right = circuit_to_perm(Circuit(3, 3, 0, list(ladder)))
    assert left.map == right.map


# ---------------------------------------------------------------------------
# The two evaluators agree
# ---------------------------------------------------------------------------


def _random_gates(rng: random.Random, n: int, d: int, count: int):
    gates = []
    for _ in range(count):
        kind = rng.randrange(3)
        q = rng.randrange(n)
        a, b = rng.sample(range(d), 2)
        if kind == 0:
            gates.append(SingleX(q, a, b))
        elif kind == 1:
            cq = rng.choice([x for x in range(n) if x != q])
            gates.append(Controlled(((cq, rng.randrange(d)),), SingleX(q, a, b)))
        else:
            qs = tuple(rng.sample(range(n), 2))
            x = tuple(rng.randrange(d) for _ in qs)
            y = tuple(rng.randrange(d) for _ in qs)
            if x == y:
                continue
            gates.append(MultiX(qs, x, y))
    return gates


def test_vectorized_matches_per_state_walk():
    rng = random.Random(5201)
    for _ in range(20):
        d = rng.choice([3, 4, 5])
        n = rng.choice([2, 3])
        c = Circuit(n, d, 0, _random_gates(rng, n, d, 6))
        perm = circuit_to_perm(c)
        for x in range(d ** n):
            assert perm(x) == circuit_apply_state(c, x)


def test_workers_do_not_change_the_result():
    rng = random.Random(5202)
    c = Circuit(3, 3, 0, _random_gates(rng, 3, 3, 8))
    assert circuit_to_perm(c, workers=1).map == circuit_to_perm(c, workers=3).map


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=0, max_size=6), st.data())
def test_concatenation_is_composition(kinds, data):
    rng = random.Random(data.draw(st.integers(0, 2 ** 20)))
    g1 = _random_gates(rng, 2, 3, len(kinds))
    g2 = _random_gates(rng, 2, 3, 3)
    whole = circuit_to_perm(Circuit(2, 3, 0, g1 + g2))
    parts = compose(
        circuit_to_perm(Circuit(2, 3, 0, g2)),
        circuit_to_perm(Circuit(2, 3, 0, g1)),
    )
    assert whole.map == parts.map


# ---------------------------------------------------------------------------
# Block programs
# ---------------------------------------------------------------------------


def test_block_program_empty_and_identity_op():
    empty = BlockProgram(3, 3, ())
    assert list(block_program_to_perm(empty).map) == list(range(27))
    op = BlockOp(3, 3, 1, Permutation(list(range(9))))
    one = BlockProgram(3, 3, (op,))
    assert list(block_program_to_perm(one).map) == list(range(27))


def test_block_program_matches_per_state_walk():
    rng = random.Random(5203)
    ops = []
    for _ in range(4):
        m = list(range(9))
        rng.shuffle(m)
        ops.append(BlockOp(3, 3, rng.randrange(3), Permutation(m)))
    p = BlockProgram(3, 3, tuple(ops))
    perm = block_program_to_perm(p)
    for x in range(27):
        assert perm(x) == block_apply_state(p, x)
    assert block_program_to_perm(p, workers=4).map == perm.map


def test_block_pipeline_round_trip():
    rng = random.Random(5204)
    for _ in range(5):
        m = list(range(27))
        rng.shuffle(m)
        f = Permutation(m)
        if not f.is_even():
            i, j = m.index(0), m.index(1)
            m[i], m[j] = m[j], m[i]
            f = Permutation(m)
        p = synthesize_blocks(f, 3, 3)
        assert block_program_to_perm(p).map == f.map


# ---------------------------------------------------------------------------
# verify_equiv
# ---------------------------------------------------------------------------


def test_verify_identity_circuit():
    f = Permutation(list(range(27)))
    report = verify_equiv(Circuit(3, 3, 0, []), f, ancilla_contract=False)
    assert report.equivalent and report.first_mismatch is None
    assert report.coverage == 1.0


def test_verify_algorithm1_under_ancilla_contract():
    rng = random.Random(5205)
    for _ in range(6):
        m = list(range(27))
        rng.shuffle(m)
        f = Permutation(m)
        c = algorithm1_synthesize(f, 3, 3)
        report = verify_equiv(c, f, ancilla_contract=True)
        assert report.equivalent, report.first_mismatch
        assert report.gate_counts
        assert report.weighted_cost > 0


def test_verify_detects_a_dropped_gate():
    f = Permutation.from_cycles([(5, 11), (7, 19)], 27)
    c = algorithm1_synthesize(f, 3, 3)
    assert c.gates
    broken = Circuit(c.n, c.d, c.ancillas, c.gates[:-1])
    report = verify_equiv(broken, f, ancilla_contract=True)
    assert not report.equivalent
    x, expected, actual = report.first_mismatch
    assert expected == f(x) and actual != expected


def test_verify_block_program_and_mismatch():
    f = Permutation.from_cycles([(0, 1, 2)], 27)
    p = synthesize_blocks(f, 3, 3)
    good = verify_equiv(p, f, ancilla_contract=False)
    assert good.equivalent
    assert good.gate_counts == {"block_op": len(p.ops)}
    assert good.bound_comparison["lower_bound_value"] == block_lower_bound(3, 3)
    g = Permutation.from_cycles([(0, 1, 2), (3, 4)], 27)
    bad = verify_equiv(p, g, ancilla_contract=False)
    assert not bad.equivalent and bad.first_mismatch is not None


def test_verify_input_validation():
    f27 = Permutation(list(range(27)))
    with pytest.raises(ValueError):
        verify_equiv(Circuit(3, 3, 0, []), f27, ancilla_contract=True)
    with pytest.raises(ValueError):
        verify_equiv(Circuit(3, 3, 1, []), f27, ancilla_contract=False)
    with pytest.raises(ValueError):
        verify_equiv(synthesize_blocks(f27, 3, 3), f27, ancilla_contract=True)
    with pytest.raises(ValueError):
        verify_equiv("nonsense", f27, ancilla_contract=False)


def test_verify_large_space_needs_sampling():
    n, d = 10, 4
    c = Circuit(n, d, 0, [SingleX(0, 0, 1)])
    size = d ** n
    assert size > 10 ** 6
    f = Permutation([x + 1 if x % d == 0 else x - 1 if x % d == 1 else x
                     for x in range(size)])
    with pytest.raises(ValueError):
        verify_equiv(c, f, ancilla_contract=False)
    report = verify_equiv(c, f, ancilla_contract=False, sample=64, seed=9)
    assert report.equivalent
    assert 0 < report.coverage < 1
    assert report.coverage == pytest.approx(64 / size)


def test_sampling_still_catches_corruption_when_it_covers_the_domain():
    f = Permutation.from_cycles([(0, 13)], 27)
    c = algorithm1_synthesize(f, 3, 3)
    broken = Circuit(c.n, c.d, c.ancillas, c.gates[:-1])
    report = verify_equiv(broken, f, ancilla_contract=True, sample=27)
    assert not report.equivalent
    assert report.coverage == 1.0


# ---------------------------------------------------------------------------
# Cost reports and bounds
# ---------------------------------------------------------------------------


def test_cost_report_empty_circuit():
    report = cost_report(Circuit(3, 3, 0, []))
    assert report.weighted_cost == 0.0
    assert report.gate_counts == {}
    assert report.bound_comparison["measured"] == 0.0
    assert report.bound_comparison["lower_bound_value"] > 0


def test_cost_report_is_additive():
    rng = random.Random(5206)
    g1 = _random_gates(rng, 3, 3, 5)
    g2 = _random_gates(rng, 3, 3, 4)
    whole = cost_report(Circuit(3, 3, 0, g1 + g2))
    a = cost_report(Circuit(3, 3, 0, g1))
    b = cost_report(Circuit(3, 3, 0, g2))
    assert whole.weighted_cost == a.weighted_cost + b.weighted_cost
    for kind in whole.gate_counts:
        assert whole.gate_counts[kind] == (
            a.gate_counts.get(kind, 0) + b.gate_counts.get(kind, 0)
        )


def test_cost_report_matches_materialized_lowering_primitive():
    pair = Pair(
        MultiX((2, 1, 0), (0, 0, 0), (1, 1, 1)),
        MultiX((2, 1, 0), (2, 2, 2), (0, 1, 0)),
    )
    lone = Controlled(((2, 1), (1, 0)), SingleX(0, 0, 2))
    c = Circuit(3, 3, 0, [pair, lone, SingleX(1, 0, 1)])
    low, summary = lower_circuit(c, CostModel(mode="primitive"))
    report = cost_report(c, CostModel(mode="primitive"))
    assert report.weighted_cost == summary.weighted_cost
    assert report.gate_counts == summary.gate_counts
    assert sum(report.gate_counts.values()) == len(low.gates)


def test_cost_report_matches_materialized_lowering_naive():
    cases = [
        Circuit(3, 3, 0, [Controlled(((0, 0), (1, 1)), SingleX(2, 0, 2))]),
        Circuit(4, 4, 0, [Controlled(((0, 0), (1, 1)), SingleX(2, 0, 3))]),
        Circuit(4, 3, 0, [Controlled(((0, 0), (1, 1), (3, 2)), SingleX(2, 0, 1))]),
    ]
    for c in cases:
        _, summary = lower_circuit(c, CostModel(mode="naive_lowered"))
        report = cost_report(c, CostModel(mode="naive_lowered"))
        assert report.weighted_cost == summary.weighted_cost
        assert report.gate_counts == summary.gate_counts


def test_cost_report_naive_even_d_without_spare_rejects():
    c = Circuit(3, 4, 0, [Controlled(((0, 0), (1, 1)), SingleX(2, 0, 3))])
    with pytest.raises(ValueError):
        cost_report(c, CostModel(mode="naive_lowered"))


def test_cost_report_on_synthesized_round():
    f = compose(Permutation.transposition(27, 3, 17),
                Permutation.transposition(27, 5, 22))
    c = algorithm1_synthesize(f, 3, 3)
    low, summary = lower_circuit(c)
    report = cost_report(c)
    assert report.weighted_cost == summary.weighted_cost
    assert report.gate_counts == summary.gate_counts
    assert sum(report.gate_counts.values()) == len(low.gates)


def test_gate_lower_bound_small_value_against_factorial():
    # direct evaluation with exact factorials as the oracle
    p1 = 3 ** 4
    p3 = (3 + 1) * (3 + 1 - 1) * p1 + 1
    want = math.log(math.factorial(27)) / math.log(p3)
    assert gate_lower_bound(3, 3) == pytest.approx(want, rel=1e-12)


def test_gate_lower_bound_extremes_evaluate():
    big = gate_lower_bound(64, 64)
    assert math.isfinite(big) and big > 10 ** 100 / 10 ** 90  # astronomically positive
    assert gate_lower_bound(1, 2) > 0
    with pytest.raises(ValueError):
        gate_lower_bound(65, 3)
    with pytest.raises(ValueError):
        gate_lower_bound(3, 65)
    with pytest.raises(ValueError):
        gate_lower_bound(0, 3)


def test_gate_lower_bound_explicit_library():
    loose = gate_lower_bound(3, 3, p1=10 ** 6)
    tight = gate_lower_bound(3, 3, p1=10.0)
    assert tight > loose  # smaller library means more gates needed


def test_report_json_shape():
    f = Permutation.from_cycles([(5, 11), (7, 19)], 27)
    c = algorithm1_synthesize(f, 3, 3)
    report = verify_equiv(c, f, ancilla_contract=True)
    data = json.loads(report_to_json(report))
    assert data["equivalent"] is True
    assert data["first_mismatch"] is None
    assert data["coverage"] == 1.0
    assert set(data["bound_comparison"]) == {"lower_bound_value", "measured"}
    broken = verify_equiv(
        Circuit(c.n, c.d, c.ancillas, c.gates[:-1]), f, ancilla_contract=True
    )
    data = json.loads(report_to_json(broken))
    assert set(data["first_mismatch"]) == {"input", "expected", "actual"}
