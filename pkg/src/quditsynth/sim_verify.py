"""Ground-truth simulation and verification.

Circuits and block programs are turned into whole permutations by a
vectorized evaluator, with an independently coded per-state walk kept
alongside as a cross-check; nothing in here shares logic with the
synthesis modules it judges.  Verification is exhaustive over basis
states up to a million; beyond that callers must opt into sampling and
the report says how much was covered.

Cost reports tally a circuit the way lowering would, but with the
closed-form sizes of the pair recursions instead of materialized gate
lists, so suite-scale cost regressions stay cheap.  The reference lower
bound comes from the counting argument over circuits built from a
polynomial gate library: N >= log((d^n)!)/log(p3) with
p3 = (n + p2)(n + p2 - 1) * p1 + 1, evaluated through log-gamma so it
works far past native factorial range.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Union

import numpy as np

from .block_synth import BlockProgram, apply_block, block_lower_bound
from .gate_synth import (
    Circuit,
    Controlled,
    CostModel,
    Gate,
    MultiX,
    Pair,
    SingleX,
    _controlled_xn,
    _parse_dcmx,
    decompose_xn,
    lower_dxm,
    validate_gate,
)
from .perm_core import Permutation

EXHAUSTIVE_LIMIT = 10 ** 6

Artifact = Union[Circuit, BlockProgram]


@dataclass(frozen=True)
class StateSpace:
    """The basis-state index range of a register: d digits on
    total_qudits positions, qudit 0 least significant."""

    d: int
    total_qudits: int

    def __post_init__(self):
        if self.d < 2 or self.total_qudits < 1:
            raise ValueError("need d >= 2 and at least one qudit")
        if self.size.bit_length() > 62:
            raise ValueError("state space does not fit native indexing")

    @property
    def size(self) -> int:
        return self.d ** self.total_qudits


@dataclass
class VerifyReport:
    equivalent: bool
    first_mismatch: tuple[int, int, int] | None
    gate_counts: dict[str, int]
    weighted_cost: float
    bound_comparison: dict[str, float]
    coverage: float = 1.0

    def to_json_dict(self) -> dict:
        mismatch = None
        if self.first_mismatch is not None:
            inp, expected, actual = self.first_mismatch
            mismatch = {"input": inp, "expected": expected, "actual": actual}
        return {
            "equivalent": self.equivalent,
            "first_mismatch": mismatch,
            "gate_counts": dict(sorted(self.gate_counts.items())),
            "weighted_cost": self.weighted_cost,
            "bound_comparison": self.bound_comparison,
            "coverage": self.coverage,
        }


def report_to_json(report: VerifyReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Vectorized evaluation
# ---------------------------------------------------------------------------


def _digits(vals: np.ndarray, q: int, d: int) -> np.ndarray:
    return (vals // d ** q) % d


def _apply_gate_array(vals: np.ndarray, g: Gate, d: int) -> np.ndarray:
    if isinstance(g, SingleX):
        dig = _digits(vals, g.qudit, d)
        step = d ** g.qudit
        return vals + (dig == g.a) * ((g.b - g.a) * step) + (dig == g.b) * ((g.a - g.b) * step)
    if isinstance(g, MultiX):
        on_x = np.ones(len(vals), dtype=bool)
        on_y = np.ones(len(vals), dtype=bool)
        px = py = 0
        for q, xv, yv in zip(g.qudits, g.x, g.y):
            dig = _digits(vals, q, d)
            on_x &= dig == xv
            on_y &= dig == yv
            px += xv * d ** q
            py += yv * d ** q
        return vals + on_x * (py - px) + on_y * (px - py)
    if isinstance(g, Controlled):
        hit = np.ones(len(vals), dtype=bool)
        for q, v in g.controls:
            hit &= _digits(vals, q, d) == v
        return np.where(hit, _apply_gate_array(vals, g.inner, d), vals)
    if isinstance(g, Pair):
        return _apply_gate_array(_apply_gate_array(vals, g.g1, d), g.g2, d)
    raise ValueError(f"not a gate: {g!r}")


def circuit_to_perm(c: Circuit, workers: int = 1) -> Permutation:
    """The permutation a circuit induces on every basis state of its full
    register (data qudits plus ancillas)."""
    for g in c.gates:
        validate_gate(g, c.d, c.num_qudits)
    space = StateSpace(c.d, c.num_qudits)
    if workers < 1:
        raise ValueError("need at least one worker")
    chunks = []
    for part in np.array_split(np.arange(space.size, dtype=np.int64), workers):
        vals = part
        for g in c.gates:
            vals = _apply_gate_array(vals, g, c.d)
        chunks.append(vals)
    return Permutation([int(v) for v in np.concatenate(chunks)])


def circuit_apply_state(c: Circuit, state: int) -> int:
    """Independent per-state walk over the same gate semantics, kept free
    of the array code above on purpose."""
    d = c.d
    digits = [(state // d ** q) % d for q in range(c.num_qudits)]

    def run(g: Gate) -> None:
        if isinstance(g, SingleX):
            if digits[g.qudit] == g.a:
                digits[g.qudit] = g.b
            elif digits[g.qudit] == g.b:
                digits[g.qudit] = g.a
        elif isinstance(g, MultiX):
            cur = tuple(digits[q] for q in g.qudits)
            if cur == g.x:
                other = g.y
            elif cur == g.y:
                other = g.x
            else:
                return
            for q, v in zip(g.qudits, other):
                digits[q] = v
        elif isinstance(g, Controlled):
            if all(digits[q] == v for q, v in g.controls):
                run(g.inner)
        elif isinstance(g, Pair):
            run(g.g1)
            run(g.g2)
        else:
            raise ValueError(f"not a gate: {g!r}")

    for g in c.gates:
        run(g)
    return sum(digit * d ** q for q, digit in enumerate(digits))


def block_program_to_perm(p: BlockProgram, workers: int = 1) -> Permutation:
    """The permutation of a block program over all d^n states, computed by
    vectorized digit surgery rather than the per-state helper."""
    space = StateSpace(p.d, p.n)
    if workers < 1:
        raise ValueError("need at least one worker")
    d = p.d
    chunks = []
    for part in np.array_split(np.arange(space.size, dtype=np.int64), workers):
        vals = part
        for op in p.ops:
            rest = [q for q in range(p.n) if q != op.excluded_qudit]
            packed = np.zeros(len(vals), dtype=np.int64)
            for k, q in enumerate(rest):
                packed += _digits(vals, q, d) * d ** k
            moved = np.asarray(op.perm.map, dtype=np.int64)[packed]
            vals = _digits(vals, op.excluded_qudit, d) * d ** op.excluded_qudit
            for k, q in enumerate(rest):
                vals += ((moved // d ** k) % d) * d ** q
        chunks.append(vals)
    return Permutation([int(v) for v in np.concatenate(chunks)])


def block_apply_state(p: BlockProgram, state: int) -> int:
    """Cross-check path: thread one state through apply_block op by op."""
    for op in p.ops:
        state = apply_block(op, state)
    return state


# ---------------------------------------------------------------------------
# Closed-form lowered-cost counting
# ---------------------------------------------------------------------------


_DCMU_BASE = 2  # a one-control pair lowers to its two halves


def _dcmu_size(m: int) -> int:
    return _DCMU_BASE * 8 ** (m - 1)


def _count_naive_cnx(g: Controlled, d: int, num_qudits: int,
                     model: CostModel, counts: dict[str, int]) -> float:
    m = len(g.controls)
    if d % 2 == 1:
        total = 1  # the single-control remainder after peeling
        for k in range(2, m + 1):
            total += (d - 1) // 2 * _dcmu_size(k)
        counts["cx"] = counts.get("cx", 0) + total
        return total * model.two_qudit_weight
    used = {q for q, _ in g.controls} | {g.inner.qudit}
    if all(q in used for q in range(num_qudits)):
        raise ValueError(
            "an even-alphabet multi-controlled gate touching every qudit has "
            "no expansion into paired two-qudit gates"
        )
    total = d // 2 * _dcmu_size(m + 1)
    counts["cx"] = counts.get("cx", 0) + total
    return total * model.two_qudit_weight


def _count_lowered(g: Gate, d: int, num_qudits: int, model: CostModel,
                   counts: dict[str, int]) -> float:
    """Tally what lowering g would emit, without emitting it.

    Word-swap pairs are reduced to their double-controlled stage (cheap)
    and each stage pair is charged its exact flat recursion size; lone
    multi-controlled gates follow the model's mode.  Matches the
    materializing path gate for gate.
    """
    if isinstance(g, SingleX):
        counts["single_x"] = counts.get("single_x", 0) + 1
        return model.two_qudit_weight
    if isinstance(g, MultiX):
        return sum(
            _count_lowered(piece, d, num_qudits, model, counts)
            for piece in decompose_xn(g.x, g.y, g.qudits)
        )
    if isinstance(g, Controlled):
        if isinstance(g.inner, MultiX):
            return sum(
                _count_lowered(piece, d, num_qudits, model, counts)
                for piece in _controlled_xn(g.controls, g.inner)
            )
        m = len(g.controls)
        if m <= 1:
            counts["cx"] = counts.get("cx", 0) + 1
            return model.two_qudit_weight
        if model.mode == "primitive":
            counts[f"c{m}x"] = counts.get(f"c{m}x", 0) + 1
            return model.cnx_weight(m, d)
        return _count_naive_cnx(g, d, num_qudits, model, counts)
    if isinstance(g, Pair):
        halves = (g.g1, g.g2)
        if all(isinstance(h, MultiX) for h in halves) or (
            all(isinstance(h, Controlled) for h in halves)
            and all(isinstance(h.inner, MultiX) for h in halves)
        ):
            cost = 0.0
            for stage in lower_dxm(g, d):
                assert isinstance(stage, Pair)
                cost += _count_lowered(stage, d, num_qudits, model, counts)
            return cost
        if all(isinstance(h, Controlled) for h in halves):
            controls, _, inner = _parse_dcmx(g)
            assert isinstance(inner, SingleX)
            size = _dcmu_size(len(controls))
            counts["cx"] = counts.get("cx", 0) + size
            return size * model.two_qudit_weight
        raise ValueError("pair halves must be two word swaps or two controlled gates")
    raise ValueError(f"not a gate: {g!r}")


def gate_lower_bound(n: int, d: int, p1: float | None = None, p2: float = 1.0) -> float:
    """Minimum gate count any circuit family needs for arbitrary
    permutations of n qudits: log((d^n)!)/log(p3) with
    p3 = (n + p2)(n + p2 - 1) p1 + 1.

    p1 defaults to d**4, a polynomial ceiling on the library of plain and
    singly-controlled digit swaps the lowered circuits draw from.
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    if n > 64 or d > 64:
        raise ValueError("bound evaluation is supported for n, d up to 64")
    if p1 is None:
        p1 = float(d) ** 4
    p3 = (n + p2) * (n + p2 - 1) * p1 + 1
    if p3 <= 1:
        raise ValueError("degenerate library size")
    return math.lgamma(float(d ** n) + 1.0) / math.log(p3)


def cost_report(c: Circuit, model: CostModel | None = None,
                n: int | None = None, d: int | None = None) -> VerifyReport:
    """Cost-only report: counts and weighted cost as lowering would
    produce them, plus the counting lower bound for the given register.
    The equivalence fields are vacuous here (nothing is simulated)."""
    model = model or CostModel()
    if model.mode not in ("primitive", "naive_lowered"):
        raise ValueError(f"unknown lowering mode {model.mode!r}")
    n = c.n if n is None else n
    d = c.d if d is None else d
    counts: dict[str, int] = {}
    cost = 0.0
    for g in c.gates:
        cost += _count_lowered(g, c.d, c.num_qudits, model, counts)
    return VerifyReport(
        equivalent=True,
        first_mismatch=None,
        gate_counts=counts,
        weighted_cost=cost,
        bound_comparison={
            "lower_bound_value": gate_lower_bound(n, d),
            "measured": cost,
        },
    )


# ---------------------------------------------------------------------------
# Equivalence checking
# ---------------------------------------------------------------------------


def verify_equiv(artifact: Artifact, f: Permutation, ancilla_contract: bool,
                 model: CostModel | None = None, workers: int = 1,
                 sample: int | None = None, seed: int = 0) -> VerifyReport:
    """Check an artifact against a target permutation.

    Circuits with ancilla_contract=True are checked on ancilla-zero
    inputs only and must return the ancilla to zero; everything else is
    full equality over the artifact's whole state space.  State spaces
    above a million require sample= to be set; the report's coverage
    field says what fraction was actually checked.
    """
    if isinstance(artifact, Circuit):
        report = cost_report(artifact, model or CostModel())
        space = StateSpace(artifact.d, artifact.num_qudits)
        if ancilla_contract:
            if artifact.ancillas == 0:
                raise ValueError("ancilla contract needs an ancilla qudit")
            if f.size != artifact.d ** artifact.n:
                raise ValueError("target permutation must act on the data qudits")
            domain_size = f.size
        else:
            if f.size != space.size:
                raise ValueError("target permutation must act on the full register")
            domain_size = space.size

        def expected(x: int) -> int:
            return f(x)

        def actual_all() -> Permutation:
            return circuit_to_perm(artifact, workers=workers)

        per_state = lambda x: circuit_apply_state(artifact, x)
    elif isinstance(artifact, BlockProgram):
        if ancilla_contract:
            raise ValueError("block programs have no ancilla")
        space = StateSpace(artifact.d, artifact.n)
        if f.size != space.size:
            raise ValueError("target permutation must act on the full register")
        domain_size = space.size
        report = VerifyReport(
            equivalent=True,
            first_mismatch=None,
            gate_counts={"block_op": len(artifact.ops)},
            weighted_cost=float(len(artifact.ops)),
            bound_comparison={
                "lower_bound_value": float(block_lower_bound(artifact.n, artifact.d)),
                "measured": float(len(artifact.ops)),
            },
        )

        def expected(x: int) -> int:
            return f(x)

        def actual_all() -> Permutation:
            return block_program_to_perm(artifact, workers=workers)

        per_state = lambda x: block_apply_state(artifact, x)
    else:
        raise ValueError(f"cannot verify {artifact!r}")

    if space.size > EXHAUSTIVE_LIMIT and sample is None:
        raise ValueError(
            f"state space of {space.size} states needs an explicit sample size"
        )

    if sample is not None:
        rng = random.Random(seed)
        pool = range(domain_size)
        picks = sorted(rng.sample(pool, min(sample, domain_size)))
        for x in picks:
            got = per_state(x)
            if got != expected(x):
                report.equivalent = False
                report.first_mismatch = (x, expected(x), got)
                break
        report.coverage = len(picks) / domain_size
        return report

    perm = actual_all()
    for x in range(domain_size):
        got = perm(x)
        if got != expected(x):
            report.equivalent = False
            report.first_mismatch = (x, expected(x), got)
            break
    report.coverage = 1.0
    return report
