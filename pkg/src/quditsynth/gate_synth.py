"""Gate-level synthesis of qudit reversible functions.

This module complements the block pipeline with a circuit picture: a small
gate IR (single-qudit transpositions, controlled gates, basis-word swaps and
formal pair products), recursive lowerings that turn double-controlled and
double-word-swap gates into two-qudit material, and an ancilla-assisted
synthesis routine that realises an arbitrary permutation of d**n basis states
as a circuit of O(n * d**n) weighted cost using one clean ancilla qudit.

Conventions:

* A state index s encodes the digit of qudit q as ``(s // d**q) % d`` —
  qudit 0 is least significant, matching the rest of the package.
* Word tuples are written most-significant coordinate first, so the word for
  state 7 with n=4, d=10 is (0, 0, 0, 7) on the qudit tuple (3, 2, 1, 0).
  ``MultiX.qudits[j]`` names the qudit that ``x[j]``/``y[j]`` refer to.
* Circuit gate lists are in application order (leftmost applied first).

The two central recursions each split one gate into eight children one level
down: a double-controlled involution pair becomes 8 pairs with one control
fewer, and a double word-swap on m+1 qudits becomes 8 controlled double
word-swaps on m qudits.  Their base cases are, respectively, a pair of plain
controlled gates and the d x d grid pair-swap machinery of
:mod:`.grid_decomp`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .grid_decomp import KIND_2CP, KIND_2RP, swap_pair_ops
from .perm_core import Permutation, compose

# K_ALG caps the primitive-mode weighted cost of an algorithm1_synthesize
# circuit divided by n * d**n, frozen as the ceiling of the worst ratio on
# the canonical d=3, n=3 suite (300 uniform shuffles, seed 7601; worst
# 7573.10, mean 6111.74).  The bulk of the cost is the full two-qudit
# expansion of the word-swap pairs, whose per-pair size is essentially
# independent of d (d=4, n=3 measures lower: 7063.06 worst over 100); it
# roughly doubles at n=4 because rounds with staging windows carry extra
# pairs, so this constant is only meaningful at n=3.
K_ALG = 7574


# ---------------------------------------------------------------------------
# Gate IR
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleX:
    """Transposition of digits a and b on one qudit."""

    qudit: int
    a: int
    b: int


@dataclass(frozen=True)
class MultiX:
    """Transposition of two basis words x and y on an ordered qudit tuple."""

    qudits: tuple[int, ...]
    x: tuple[int, ...]
    y: tuple[int, ...]


@dataclass(frozen=True)
class Controlled:
    """Apply ``inner`` iff every control qudit holds its listed value."""

    controls: tuple[tuple[int, int], ...]
    inner: SingleX | MultiX


@dataclass(frozen=True)
class Pair:
    """Formal product of two gates applied together.

    Used for double word-swaps (two disjoint MultiX) and for
    double-controlled gates (two Controlled whose control words differ in
    exactly the last value and that share the inner gate).  The two halves
    always commute, so no internal order is implied.
    """

    g1: "Gate"
    g2: "Gate"


Gate = SingleX | MultiX | Controlled | Pair


def validate_gate(g: Gate, d: int, num_qudits: int) -> None:
    """Raise ValueError if g is structurally unsound for a d-ary register."""
    if isinstance(g, SingleX):
        if not (0 <= g.qudit < num_qudits):
            raise ValueError(f"qudit {g.qudit} out of range")
        if not (0 <= g.a < d and 0 <= g.b < d) or g.a == g.b:
            raise ValueError(f"bad transposition digits ({g.a}, {g.b})")
        return
    if isinstance(g, MultiX):
        if len(set(g.qudits)) != len(g.qudits):
            raise ValueError("duplicate qudits in word swap")
        if not all(0 <= q < num_qudits for q in g.qudits):
            raise ValueError("qudit out of range in word swap")
        if len(g.x) != len(g.qudits) or len(g.y) != len(g.qudits):
            raise ValueError("word length does not match qudit count")
        if g.x == g.y:
            raise ValueError("word swap needs two distinct words")
        if not all(0 <= v < d for v in g.x + g.y):
            raise ValueError("digit out of range in word swap")
        return
    if isinstance(g, Controlled):
        if not isinstance(g.inner, (SingleX, MultiX)):
            raise ValueError("controlled inner must be an X-type gate")
        cq = [q for q, _ in g.controls]
        if len(set(cq)) != len(cq):
            raise ValueError("duplicate control qudits")
        targets = {g.inner.qudit} if isinstance(g.inner, SingleX) else set(g.inner.qudits)
        if set(cq) & targets:
            raise ValueError("control qudit collides with target")
        for q, v in g.controls:
            if not (0 <= q < num_qudits and 0 <= v < d):
                raise ValueError(f"bad control ({q}, {v})")
        validate_gate(g.inner, d, num_qudits)
        return
    if isinstance(g, Pair):
        validate_gate(g.g1, d, num_qudits)
        validate_gate(g.g2, d, num_qudits)
        return
    raise ValueError(f"not a gate: {g!r}")


@dataclass
class Circuit:
    n: int
    d: int
    ancillas: int
    gates: list[Gate] = field(default_factory=list)

    @property
    def num_qudits(self) -> int:
        return self.n + self.ancillas

    def validate(self) -> None:
        if self.ancillas not in (0, 1):
            raise ValueError("ancilla count must be 0 or 1")
        for g in self.gates:
            validate_gate(g, self.d, self.num_qudits)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def gate_to_json(g: Gate) -> dict:
    if isinstance(g, SingleX):
        return {"kind": "single_x", "qudit": g.qudit, "a": g.a, "b": g.b}
    if isinstance(g, MultiX):
        return {"kind": "multi_x", "qudits": list(g.qudits), "x": list(g.x), "y": list(g.y)}
    if isinstance(g, Controlled):
        return {
            "kind": "controlled",
            "controls": [[q, v] for q, v in g.controls],
            "inner": gate_to_json(g.inner),
        }
    if isinstance(g, Pair):
        return {"kind": "pair", "g1": gate_to_json(g.g1), "g2": gate_to_json(g.g2)}
    raise ValueError(f"not a gate: {g!r}")


def gate_from_json(obj: dict) -> Gate:
    kind = obj.get("kind")
    if kind == "single_x":
        return SingleX(int(obj["qudit"]), int(obj["a"]), int(obj["b"]))
    if kind == "multi_x":
        return MultiX(
            tuple(int(q) for q in obj["qudits"]),
            tuple(int(v) for v in obj["x"]),
            tuple(int(v) for v in obj["y"]),
        )
    if kind == "controlled":
        inner = gate_from_json(obj["inner"])
        if not isinstance(inner, (SingleX, MultiX)):
            raise ValueError("controlled inner must be an X-type gate")
        return Controlled(tuple((int(q), int(v)) for q, v in obj["controls"]), inner)
    if kind == "pair":
        return Pair(gate_from_json(obj["g1"]), gate_from_json(obj["g2"]))
    raise ValueError(f"unknown gate kind {kind!r}")


def circuit_to_json(c: Circuit) -> dict:
    return {
        "n": c.n,
        "d": c.d,
        "ancillas": c.ancillas,
        "gates": [gate_to_json(g) for g in c.gates],
    }


def circuit_from_json(obj: dict) -> Circuit:
    c = Circuit(
        int(obj["n"]),
        int(obj["d"]),
        int(obj["ancillas"]),
        [gate_from_json(g) for g in obj["gates"]],
    )
    c.validate()
    return c


# ---------------------------------------------------------------------------
# Double-controlled involution pairs
# ---------------------------------------------------------------------------


def _parse_dcmx(g: Pair) -> tuple[tuple[tuple[int, int], ...], int, SingleX | MultiX]:
    """Split a double-controlled pair into (full controls of g1, last value of
    g2, shared inner).  The halves must share every control qudit in order,
    agree on all values except the last, and carry the same inner gate."""
    if not (isinstance(g.g1, Controlled) and isinstance(g.g2, Controlled)):
        raise ValueError("expected a pair of controlled gates")
    c1, c2 = g.g1.controls, g.g2.controls
    if len(c1) != len(c2) or not c1:
        raise ValueError("control lists must be non-empty and equally long")
    if [q for q, _ in c1] != [q for q, _ in c2]:
        raise ValueError("control qudits differ between the halves")
    if [v for _, v in c1[:-1]] != [v for _, v in c2[:-1]]:
        raise ValueError("halves must share all control values except the last")
    if c1[-1][1] == c2[-1][1]:
        raise ValueError("last control values must differ")
    if g.g1.inner != g.g2.inner:
        raise ValueError("halves must share the inner gate")
    return c1, c2[-1][1], g.g1.inner


def dcmu_children(g: Pair, d: int) -> list[Gate]:
    """One lowering level for a double-controlled involution pair.

    Demotes the next-to-last control into conjugation material: the result is
    the eight-gate sequence [A, B, C, B, A, B, C, B] where A and B swap the
    last control's trigger digits on the demoted qudit's slices and C is the
    original pair with the demoted control dropped.  With one control the
    pair is emitted as its two halves directly.
    """
    if d < 3:
        raise ValueError("lowering double-controlled gates requires d >= 3")
    controls, cm2, inner = _parse_dcmx(g)
    m = len(controls)
    if m == 1:
        return [g.g1, g.g2]
    outer = controls[:-2]
    demoted, r = controls[-2]
    last, cm = controls[-1]
    # Digit choices: the demoted qudit's two scratch values must be distinct
    # and differ from r; the last qudit's detour digit must avoid both
    # trigger values (else one trigger picks up a spurious extra hit).
    u, v = [x for x in (0, 1, 2) if x != r][:2]
    w = next(x for x in (0, 1, 2) if x not in (cm, cm2))
    a = Pair(
        Controlled(outer + ((demoted, r),), SingleX(last, cm, cm2)),
        Controlled(outer + ((demoted, u),), SingleX(last, cm, cm2)),
    )
    b = Pair(
        Controlled(outer + ((demoted, r),), SingleX(last, cm, w)),
        Controlled(outer + ((demoted, v),), SingleX(last, cm, w)),
    )
    c = Pair(
        Controlled(outer + ((last, cm),), inner),
        Controlled(outer + ((last, cm2),), inner),
    )
    return [a, b, c, b, a, b, c, b]


def lower_dcmu(g: Pair, d: int) -> list[Gate]:
    """Fully lower a double-controlled involution pair to single-control
    gates (two-qudit material when the inner is a SingleX)."""
    out: list[Gate] = []
    for child in dcmu_children(g, d):
        if isinstance(child, Pair):
            out.extend(lower_dcmu(child, d))
        else:
            out.append(child)
    return out


# ---------------------------------------------------------------------------
# Double word-swap pairs
# ---------------------------------------------------------------------------

Word = tuple[int, ...]


def _parse_dxm(g: Pair) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...], Word, Word, Word, Word]:
    """Split a (possibly controlled) double word-swap into its shared
    controls, qudit tuple and the four words."""
    h1, h2 = g.g1, g.g2
    ctrls: tuple[tuple[int, int], ...] = ()
    if isinstance(h1, Controlled) and isinstance(h2, Controlled):
        if h1.controls != h2.controls:
            raise ValueError("halves must share their controls")
        ctrls = h1.controls
        h1, h2 = h1.inner, h2.inner
    if not (isinstance(h1, MultiX) and isinstance(h2, MultiX)):
        raise ValueError("expected a pair of word swaps")
    if h1.qudits != h2.qudits:
        raise ValueError("halves must act on the same qudits")
    words = [h1.x, h1.y, h2.x, h2.y]
    if len(set(words)) != 4:
        raise ValueError(f"the four words must be distinct, got {words}")
    return ctrls, h1.qudits, h1.x, h1.y, h2.x, h2.y


def _drop(word: Word, j: int) -> Word:
    return word[:j] + word[j + 1:]


class _HelperExhausted(Exception):
    """No helper word assignment fits; the caller must try another layout."""


def _fresh_words(
    length: int,
    d: int,
    avoid: set[Word],
    fixed: dict[int, int],
    count: int = 2,
) -> list[Word]:
    """Deterministically pick ``count`` distinct words that satisfy the fixed
    coordinates and avoid the given set.  Iterates free coordinates in
    ascending numeral order."""
    free = [j for j in range(length) if j not in fixed]
    picked: list[Word] = []
    total = d ** len(free)
    for idx in range(total):
        w = [0] * length
        for j, v in fixed.items():
            w[j] = v
        rem = idx
        for j in reversed(free):
            w[j] = rem % d
            rem //= d
        wt = tuple(w)
        if wt in avoid or wt in picked:
            continue
        picked.append(wt)
        if len(picked) == count:
            return picked
    raise _HelperExhausted


def _aligned_coords(a: Word, b: Word) -> list[int]:
    return [j for j in range(len(a)) if a[j] == b[j]]


def _step1(
    qudits: tuple[int, ...],
    ctrls: tuple[tuple[int, int], ...],
    first: tuple[Word, Word, int],
    second: tuple[Word, Word, int],
    d: int,
) -> list[Gate]:
    """Merge two word transpositions into 2 controlled double word-swaps.

    ``first`` is applied before ``second``; each is (word, word, coord) where
    the two words agree at the given coordinate, and the two coords differ.
    A helper transposition agreeing with both at their control coordinates is
    inserted between them and absorbed into both controlled gates, so the
    helper's two words must be fresh.  Emission order: the gate conditioned
    on ``first``'s coordinate comes first.
    """
    fa, fb, jf = first
    sa, sb, js = second
    assert jf != js
    assert fa[jf] == fb[jf] and sa[js] == sb[js]
    h1, h2 = _fresh_words(
        len(qudits),
        d,
        avoid={fa, fb, sa, sb},
        fixed={jf: fa[jf], js: sa[js]},
    )
    gate_first = Pair(
        Controlled(ctrls + ((qudits[jf], fa[jf]),),
                   MultiX(_drop(qudits, jf), _drop(fa, jf), _drop(fb, jf))),
        Controlled(ctrls + ((qudits[jf], fa[jf]),),
                   MultiX(_drop(qudits, jf), _drop(h1, jf), _drop(h2, jf))),
    )
    gate_second = Pair(
        Controlled(ctrls + ((qudits[js], sa[js]),),
                   MultiX(_drop(qudits, js), _drop(sa, js), _drop(sb, js))),
        Controlled(ctrls + ((qudits[js], sa[js]),),
                   MultiX(_drop(qudits, js), _drop(h1, js), _drop(h2, js))),
    )
    return [gate_first, gate_second]


def _step2(
    qudits: tuple[int, ...],
    ctrls: tuple[tuple[int, int], ...],
    za: Word,
    zb: Word,
    ta: Word,
    tb: Word,
    d: int,
) -> list[Gate]:
    """Synthesize the product of a last-aligned transposition (za, zb) and an
    arbitrary one (ta, tb) sharing no word with it.  Generic words need a
    sandwich that first aligns (ta, tb) on coordinate 0, giving 4 children;
    words already aligned somewhere skip the sandwich and give 2.

    Raises _HelperExhausted when no coordinate layout leaves room for the
    helper words, so the caller can retry with another (za, zb).
    """
    last = len(qudits) - 1
    aligned = [j for j in _aligned_coords(ta, tb) if j != last]
    if aligned:
        if 0 in aligned:
            aligned = [0] + [j for j in aligned if j != 0]
        for j in aligned:
            try:
                return _step1(qudits, ctrls, (ta, tb, j), (za, zb, last), d)
            except _HelperExhausted:
                continue
        raise _HelperExhausted
    # (ta, tb) differ at every coordinate but possibly the last; fix the
    # first-coordinate mismatch with w = tb[0] followed by ta's tail.  The
    # inner sandwich factor shares w with both of its transpositions, which
    # is why its two gates must stay in this order.
    w = (tb[0],) + ta[1:]
    assert w not in (ta, tb, za, zb)
    # (ta, w) agree everywhere except coordinate 0, so anchoring them at
    # coordinate 1 always leaves the helper room (only w occupies the slice).
    sub2 = _step1(qudits, ctrls, (ta, w, 1), (tb, w, 0), d)
    sub1 = None
    for j in range(1, last):
        try:
            sub1 = _step1(qudits, ctrls, (ta, w, j), (za, zb, last), d)
            break
        except _HelperExhausted:
            continue
    if sub1 is None:
        raise _HelperExhausted
    return sub2 + sub1


def dxm_children(g: Pair, d: int) -> list[Gate]:
    """One lowering level for a double word-swap pair.

    Words of length >= 3 go through the three-step construction — insert a
    fresh last-aligned transposition between the two halves, sandwich each
    half into coordinate-aligned form, then merge aligned transpositions
    under single controls — yielding 8 controlled double word-swaps one
    qudit shorter for words in generic position (fewer when a half is
    already aligned).  Length-2 words are the base case, handled by the
    d x d grid pair-swap machinery; its aligned double-swap operations map
    one-to-one onto double-controlled single-qudit pairs.
    """
    ctrls, qudits, xa, xb, ya, yb = _parse_dxm(g)
    m1 = len(qudits)
    if m1 < 2:
        raise ValueError("word swaps on a single qudit lower trivially; nothing to do")
    if m1 == 2:
        qa, qb = qudits
        ops = swap_pair_ops((xa[0], xa[1]), (xb[0], xb[1]), (ya[0], ya[1]), (yb[0], yb[1]), d, d)
        out: list[Gate] = []
        for op in ops:
            if op.kind == KIND_2RP:
                r1, r2, c1, c2 = op.witness
                out.append(Pair(
                    Controlled(ctrls + ((qa, r1),), SingleX(qb, c1, c2)),
                    Controlled(ctrls + ((qa, r2),), SingleX(qb, c1, c2)),
                ))
            elif op.kind == KIND_2CP:
                c1, c2, r1, r2 = op.witness
                out.append(Pair(
                    Controlled(ctrls + ((qb, c1),), SingleX(qa, r1, r2)),
                    Controlled(ctrls + ((qb, c2),), SingleX(qa, r1, r2)),
                ))
            else:  # pragma: no cover - swap_pair_ops only emits 2r'/2c'
                raise AssertionError(f"unexpected op kind {op.kind}")
        return out
    last = m1 - 1
    # The two halves are bridged by a fresh transposition (za, zb) aligned at
    # the last coordinate: X_x . X_y = (X_x . X_z) . (X_z . X_y), right
    # factor applied first, the shared z-words pinning the factor order.
    # The bridge must stay clear of the four input words and of the sandwich
    # word either half may need, and has to leave each downstream merge room
    # for its helper words, so it is searched in ascending numeral order.
    avoid = {xa, xb, ya, yb}
    for half_a, half_b in ((xa, xb), (ya, yb)):
        if not any(half_a[j] == half_b[j] for j in range(last)):
            avoid.add((half_b[0],) + half_a[1:])
    size = d ** m1
    for va in range(size):
        za = _unpack(va, m1, d)
        if za in avoid:
            continue
        for vb in range(va + d, size, d):
            zb = _unpack(vb, m1, d)
            if zb in avoid:
                continue
            try:
                return (_step2(qudits, ctrls, za, zb, ya, yb, d)
                        + _step2(qudits, ctrls, za, zb, xa, xb, d))
            except _HelperExhausted:
                continue
    raise AssertionError("no bridging transposition admits helper words")


def lower_dxm(g: Pair, d: int) -> list[Gate]:
    """Fully lower a double word-swap to double-controlled single-qudit
    pairs (each a Pair of two Controlled gates sharing an inner SingleX)."""
    ctrls, qudits, *_ = _parse_dxm(g)
    if len(qudits) == 2:
        return dxm_children(g, d)
    out: list[Gate] = []
    for child in dxm_children(g, d):
        assert isinstance(child, Pair)
        out.extend(lower_dxm(child, d))
    return out


# ---------------------------------------------------------------------------
# Single word swaps
# ---------------------------------------------------------------------------


def decompose_xn(x: Word, y: Word, qudits: tuple[int, ...] | None = None) -> list[Gate]:
    """Decompose a single basis-word transposition into controlled gates.

    Words differing in one position collapse to one multi-controlled
    transposition; two or more differing positions give the three-gate
    sandwich: a controlled digit swap on the last differing position, a
    controlled word swap on the rest, and the digit swap again.
    """
    if len(x) != len(y):
        raise ValueError("words must have equal length")
    if x == y:
        raise ValueError("cannot swap a word with itself")
    if qudits is None:
        qudits = tuple(range(len(x) - 1, -1, -1))
    if len(qudits) != len(x):
        raise ValueError("qudit tuple does not match word length")
    diffs = [j for j in range(len(x)) if x[j] != y[j]]
    if len(x) == 1:
        return [SingleX(qudits[0], x[0], y[0])]
    if len(diffs) == 1:
        j = diffs[0]
        controls = tuple((qudits[i], x[i]) for i in range(len(x)) if i != j)
        return [Controlled(controls, SingleX(qudits[j], x[j], y[j]))]
    t = diffs[-1]
    outer = Controlled(
        tuple((qudits[i], x[i]) for i in range(len(x)) if i != t),
        SingleX(qudits[t], x[t], y[t]),
    )
    rest_q = _drop(qudits, t)
    rest_x = _drop(x, t)
    rest_y = _drop(y, t)
    mid_inner: SingleX | MultiX
    if len(rest_q) == 1:
        mid_inner = SingleX(rest_q[0], rest_x[0], rest_y[0])
    else:
        mid_inner = MultiX(rest_q, rest_x, rest_y)
    mid = Controlled(((qudits[t], y[t]),), mid_inner)
    return [outer, mid, outer]


# ---------------------------------------------------------------------------
# Ancilla-assisted synthesis
# ---------------------------------------------------------------------------


def _moved(f: Permutation) -> list[int]:
    return [x for x in range(f.size) if f(x) != x]


def _word_of(state: int, n: int, d: int) -> Word:
    """Coordinate word of a state, most significant first."""
    digits = []
    for i in range(n):
        digits.append((state // d ** (n - 1 - i)) % d)
    return tuple(digits)


def _window_word(state: int, window: tuple[int, ...], d: int) -> Word:
    return tuple((state // d ** q) % d for q in window)


def _packed(word: Word, d: int) -> int:
    v = 0
    for digit in word:
        v = v * d + digit
    return v


def _unpack(value: int, length: int, d: int) -> Word:
    digits = []
    for _ in range(length):
        digits.append(value % d)
        value //= d
    return tuple(reversed(digits))


def _select_pairs(f: Permutation, d: int) -> list[tuple[int, int]]:
    """Greedy pair selection: scan states in increasing order, adding
    (x, f(x)) while both are unclaimed, until d**3 - 1 points are gathered
    or no candidate remains.  An odd number of pairs loses its last pair so
    the swap gates can be emitted two at a time."""
    pairs: list[tuple[int, int]] = []
    taken: set[int] = set()
    for x in range(f.size):
        if len(taken) >= d ** 3 - 1:
            break
        y = f(x)
        if y == x or x in taken or y in taken:
            continue
        pairs.append((x, y))
        taken.add(x)
        taken.add(y)
    if len(pairs) % 2 == 1:
        pairs.pop()
    return pairs


def _zero_stage(
    points: dict[int, int],
    window: tuple[int, ...],
    d: int,
) -> list[Gate]:
    """Emit paired word swaps on one 4-qudit window that move every tracked
    point's leading window digit to 0, and update the tracking in place.

    Targets are zero-leading window words not occupied by any tracked point;
    the all-zero word is kept in reserve and used only when every other free
    word is taken.  An odd number of occupied words to move borrows a swap of
    two fresh non-zero-leading words, which the later inverse pass cancels
    for every state the flagged middle section leaves alone.
    """
    occupied = {_window_word(s, window, d) for s in points.values()}
    hot = sorted((w for w in occupied if w[0] != 0), key=lambda w: _packed(w, d))
    if not hot:
        return []
    targets: list[Word] = []
    candidates = list(range(1, d ** 3)) + [0]
    for value in candidates:
        if len(targets) == len(hot):
            break
        w = _unpack(value, 3, d)
        w = (0,) + w
        if w not in occupied:
            targets.append(w)
    assert len(targets) == len(hot), "not enough free zero-leading window words"
    mapping = {}
    for h, t in zip(hot, targets):
        mapping[h] = t
        mapping[t] = h
    swaps = list(zip(hot, targets))
    if len(swaps) % 2 == 1:
        dummies: list[Word] = []
        for value in range(d ** 3, d ** 4):
            w = _unpack(value, 4, d)
            if w not in occupied and w not in mapping:
                dummies.append(w)
                if len(dummies) == 2:
                    break
        assert len(dummies) == 2, "no fresh non-zero window words for the odd swap"
        mapping[dummies[0]] = dummies[1]
        mapping[dummies[1]] = dummies[0]
        swaps.append((dummies[0], dummies[1]))
    gates = []
    for k in range(0, len(swaps) - 1, 2):
        (a1, b1), (a2, b2) = swaps[k], swaps[k + 1]
        gates.append(Pair(MultiX(window, a1, b1), MultiX(window, a2, b2)))
    for p, s in points.items():
        w = _window_word(s, window, d)
        if w in mapping:
            delta = sum((mapping[w][j] - w[j]) * d ** window[j] for j in range(4))
            points[p] = s + delta
    return gates


def algorithm1_synthesize(f: Permutation, n: int, d: int) -> Circuit:
    """Synthesize an arbitrary permutation of d**n basis states as a circuit
    with one clean ancilla.

    Rounds run while at least 4 states move: select up to d**3 swap pairs,
    zero their leading n-3 coordinates window by window with paired word
    swaps, raise an ancilla flag on the zeroed prefix, swap the selected
    points pairwise inside the flagged 4-qudit tail, then unwind the flag
    and the windows.  The leftover permutation moves at most 3 states and is
    emitted as at most 2 plain word transpositions.
    """
    if n < 3:
        raise ValueError("need at least 3 data qudits")
    if d < 3:
        raise ValueError("need digit alphabet of size at least 3")
    if f.size != d ** n:
        raise ValueError(f"permutation size {f.size} is not {d}**{n}")
    ancilla = n
    gates: list[Gate] = []
    cur = f
    while len(_moved(cur)) >= 4:
        pairs = _select_pairs(cur, d)
        assert pairs, "at least two disjoint swap pairs exist when 4+ states move"
        points = {p: p for pair in pairs for p in pair}
        stage_gates: list[Gate] = []
        for i in range(1, n - 2):
            lead = n - i
            window = (lead, lead - 1, lead - 2, lead - 3)
            stage_gates.extend(_zero_stage(points, window, d))
        for s in points.values():
            assert s < d ** 3, "leading coordinates not fully zeroed"
        assert len(set(points.values())) == len(points)
        flag_controls = tuple((q, 0) for q in range(n - 1, 2, -1))
        flag: Gate
        if flag_controls:
            flag = Controlled(flag_controls, SingleX(ancilla, 0, 1))
        else:
            flag = SingleX(ancilla, 0, 1)
        tail = (2, 1, 0, ancilla)
        middle: list[Gate] = []
        for k in range(0, len(pairs) - 1, 2):
            words = []
            for j in (k, k + 1):
                p, fp = pairs[j]
                words.append(_window_word(points[p], (2, 1, 0), d) + (1,))
                words.append(_window_word(points[fp], (2, 1, 0), d) + (1,))
            middle.append(Pair(MultiX(tail, words[0], words[1]), MultiX(tail, words[2], words[3])))
        gates.extend(stage_gates)
        gates.append(flag)
        gates.extend(middle)
        gates.append(flag)
        gates.extend(reversed(stage_gates))
        swap_map = list(range(cur.size))
        for p, fp in pairs:
            swap_map[p], swap_map[fp] = swap_map[fp], swap_map[p]
        before = len(_moved(cur))
        cur = compose(cur, Permutation(swap_map))
        assert len(_moved(cur)) < before, "round failed to shrink the moved set"
    residual = _moved(cur)
    data_qudits = tuple(range(n - 1, -1, -1))
    if len(residual) == 2:
        a, b = residual
        gates.extend(decompose_xn(_word_of(a, n, d), _word_of(b, n, d), data_qudits))
    elif len(residual) == 3:
        a = residual[0]
        b = cur(a)
        c = cur(b)
        # (a b c) = (a b) after (b c): emit the (b c) swap first.
        gates.extend(decompose_xn(_word_of(b, n, d), _word_of(c, n, d), data_qudits))
        gates.extend(decompose_xn(_word_of(a, n, d), _word_of(b, n, d), data_qudits))
    else:
        assert not residual, "a permutation cannot move exactly one state"
    circuit = Circuit(n, d, 1, gates)
    circuit.validate()
    return circuit


# ---------------------------------------------------------------------------
# Cost model and circuit lowering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostModel:
    """Weights for counting a lowered circuit.

    Commuting pairs are always expanded through the pair recursions down to
    gates touching at most two qudits; the modes differ only on lone
    multi-controlled transpositions.  ``primitive`` keeps each as a single
    gate charged cnx_coeff * (m + 3) * d**3 — the cost of the known
    dirty-ancilla construction — while ``naive_lowered`` expands it too,
    which is correct but exponential in the control count.
    """

    two_qudit_weight: float = 1.0
    cnx_coeff: float = 1.0
    mode: str = "primitive"

    def cnx_weight(self, m: int, d: int) -> float:
        return self.cnx_coeff * (m + 3) * d ** 3


@dataclass
class CostSummary:
    mode: str
    gate_counts: dict[str, int]
    weighted_cost: float
    notes: list[str]


def _controlled_xn(controls: tuple[tuple[int, int], ...], inner: MultiX) -> list[Gate]:
    """Expand a controlled word swap into multi-controlled digit swaps by
    recursing the sandwich decomposition with the outer controls riding
    along."""
    out: list[Gate] = []
    for g in decompose_xn(inner.x, inner.y, inner.qudits):
        if isinstance(g, SingleX):
            out.append(Controlled(controls, g) if controls else g)
            continue
        assert isinstance(g, Controlled)
        merged = Controlled(controls + g.controls, g.inner)
        if isinstance(merged.inner, MultiX):
            out.extend(_controlled_xn(merged.controls, merged.inner))
        else:
            out.append(merged)
    return out


def _expand_cnx(g: Controlled, d: int, num_qudits: int) -> list[Gate]:
    """Expand one multi-controlled digit swap into two-qudit material.

    For odd d, peeling the last control works: the gate equals the product
    of its complement-value copies (grouped into double-controlled pairs)
    and one gate with the last control dropped.  For even d that leaves an
    odd complement, so instead the gate is split over a spare qudit's digit
    values in pairs; parity forces the use of a spare qudit there.
    """
    m = len(g.controls)
    if m <= 1:
        return [g]
    assert isinstance(g.inner, SingleX)
    if d % 2 == 1:
        *rest, (lq, lv) = g.controls
        others = [x for x in range(d) if x != lv]
        out: list[Gate] = []
        for k in range(0, len(others), 2):
            out.append(Pair(
                Controlled(tuple(rest) + ((lq, others[k]),), g.inner),
                Controlled(tuple(rest) + ((lq, others[k + 1]),), g.inner),
            ))
        out.append(Controlled(tuple(rest), g.inner) if rest else g.inner)
        lowered: list[Gate] = []
        for child in out:
            if isinstance(child, Pair):
                lowered.extend(lower_dcmu(child, d))
            elif isinstance(child, Controlled):
                lowered.extend(_expand_cnx(child, d, num_qudits))
            else:
                lowered.append(child)
        return lowered
    used = {q for q, _ in g.controls} | {g.inner.qudit}
    spare = next((q for q in range(num_qudits) if q not in used), None)
    if spare is None:
        raise ValueError(
            "an even-alphabet multi-controlled gate touching every qudit has "
            "no expansion into paired two-qudit gates"
        )
    lowered = []
    for v in range(0, d, 2):
        pair = Pair(
            Controlled(g.controls + ((spare, v),), g.inner),
            Controlled(g.controls + ((spare, v + 1),), g.inner),
        )
        lowered.extend(lower_dcmu(pair, d))
    return lowered


def _lower_gate(g: Gate, d: int, num_qudits: int, model: CostModel) -> list[Gate]:
    if isinstance(g, SingleX):
        return [g]
    if isinstance(g, MultiX):
        out = []
        for piece in decompose_xn(g.x, g.y, g.qudits):
            out.extend(_lower_gate(piece, d, num_qudits, model))
        return out
    if isinstance(g, Controlled):
        if isinstance(g.inner, MultiX):
            out = []
            for piece in _controlled_xn(g.controls, g.inner):
                out.extend(_lower_gate(piece, d, num_qudits, model))
            return out
        if len(g.controls) <= 1 or model.mode == "primitive":
            return [g]
        return _expand_cnx(g, d, num_qudits)
    if isinstance(g, Pair):
        halves = (g.g1, g.g2)
        if all(isinstance(h, MultiX) for h in halves) or (
            all(isinstance(h, Controlled) for h in halves)
            and all(isinstance(h.inner, MultiX) for h in halves)
        ):
            out = []
            for piece in lower_dxm(g, d):
                out.extend(_lower_gate(piece, d, num_qudits, model))
            return out
        if all(isinstance(h, Controlled) for h in halves):
            out = []
            for piece in lower_dcmu(g, d):
                out.extend(_lower_gate(piece, d, num_qudits, model))
            return out
        raise ValueError("pair halves must be two word swaps or two controlled gates")
    raise ValueError(f"not a gate: {g!r}")


def lower_circuit(c: Circuit, model: CostModel | None = None) -> tuple[Circuit, CostSummary]:
    """Lower every composite gate and tally the weighted cost.

    The returned circuit contains only digit swaps and multi-controlled
    digit swaps (single-controlled ones in naive mode) and induces the same
    permutation as the input.
    """
    model = model or CostModel()
    if model.two_qudit_weight < 0 or model.cnx_coeff < 0:
        raise ValueError("weights must be nonnegative")
    if model.mode not in ("primitive", "naive_lowered"):
        raise ValueError(f"unknown lowering mode {model.mode!r}")
    lowered: list[Gate] = []
    for g in c.gates:
        lowered.extend(_lower_gate(g, c.d, c.num_qudits, model))
    counts: Counter[str] = Counter()
    cost = 0.0
    notes: list[str] = []
    for g in lowered:
        if isinstance(g, SingleX):
            counts["single_x"] += 1
            cost += model.two_qudit_weight
        elif isinstance(g, Controlled):
            m = len(g.controls)
            if m <= 1:
                counts["cx"] += 1
                cost += model.two_qudit_weight
            else:
                counts[f"c{m}x"] += 1
                cost += model.cnx_weight(m, c.d)
        else:  # pragma: no cover - lowering leaves no other kinds
            raise AssertionError(f"unexpected lowered gate {g!r}")
    if model.mode == "naive_lowered":
        notes.append("naive lowering expands multi-controlled gates exponentially in their control count")
    out = Circuit(c.n, c.d, c.ancillas, lowered)
    out.validate()
    return out, CostSummary(model.mode, dict(counts), cost, notes)
