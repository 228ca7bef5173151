"""Synthesize even permutations of n qudits from (n-1)-qudit block operations.

A *block operation* leaves one qudit untouched and applies a single
permutation to the packed digits of the remaining n-1 qudits, the same way
for every value of the excluded qudit.  Geometrically the state space is a
d x ... x d hypercube and a block operation acts on all hyperplanes
perpendicular to one axis at once.

The synthesis route mirrors the grid machinery in ``grid_decomp``, one level
up.  Viewing the hypercube as a d x d^(n-1) grid (rows = the most
significant qudit), an even permutation splits into row/column typed pieces;
each piece is then realized by permutations confined to single hyperplanes
("planes"), which in turn reduce to commutator tricks confined to single
lines ("edges").  Everything bottoms out in 4-operation gadgets:

  * ``commutator_edge``: sandwich two conditioned permutations so that all
    effects cancel except on one edge, where sigma^-1 pi^-1 sigma pi lands.
  * ``row_shift_plane``: the same sandwich one dimension higher; row i of a
    chosen plane receives sigma_i^-1 sigma_pi(i).

Packing conventions (shared with perm_core): digit k of a state has weight
d**k.  Whenever a subset of qudits is packed into a sub-index, the digits
are taken in ascending qudit order, smallest index least significant.  Op
lists are in application order (first element applied first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .grid_decomp import (
    KIND_1C,
    KIND_1R,
    KIND_2C,
    KIND_2R,
    even_grid_decompose,
)
from .perm_core import GridPerm, MixedRadix, Permutation, compose

# Worst observed operation counts, frozen as regression bounds.
#
# K_PLANE caps one plane_even emission.  Measured exhaustively over all of
# A_9 on the 3x3 plane shape (worst 196) and over large random suites on
# the 4x4, 5x5 and 3x9 shapes (worst 212, from 3x9).  The piece structure
# also gives a ceiling: at most 3 sixteen-op pieces, 3 four-op pieces and
# 40 four-op segment pieces can ever coexist, i.e. 220.
K_PLANE = 212

# K_CUBE caps synthesize_blocks output length divided by d.  Measured over
# 500-permutation random suites at d=3,4,5 (n=3) and a 100-permutation
# suite at d=3, n=4; the worst ratio (844) comes from the n=4 suite.
K_CUBE = 844


@dataclass(frozen=True)
class BlockOp:
    """One (n-1)-qudit operation: ``perm`` on every slice of the excluded qudit.

    ``perm`` permutes the packed digits of the non-excluded qudits (ascending
    qudit order, least significant first).
    """

    n: int
    d: int
    excluded_qudit: int
    perm: Permutation

    def __post_init__(self):
        if not 0 <= self.excluded_qudit < self.n:
            raise ValueError(
                f"excluded qudit {self.excluded_qudit} out of range for n={self.n}"
            )
        if self.perm.size != self.d ** (self.n - 1):
            raise ValueError(
                f"block permutation size {self.perm.size} is not "
                f"{self.d}^{self.n - 1}"
            )

    def to_json_dict(self) -> dict:
        return {"excluded_qudit": self.excluded_qudit, "perm": list(self.perm.map)}


@dataclass(frozen=True)
class BlockProgram:
    """An ordered list of block operations, applied first-to-last."""

    n: int
    d: int
    ops: tuple[BlockOp, ...]

    def __post_init__(self):
        for op in self.ops:
            if op.n != self.n or op.d != self.d:
                raise ValueError("all ops in a program must share n and d")

    def __len__(self) -> int:
        return len(self.ops)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "ops": [op.to_json_dict() for op in self.ops],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BlockProgram":
        n, d = int(data["n"]), int(data["d"])
        ops = tuple(
            BlockOp(n, d, int(o["excluded_qudit"]), Permutation(o["perm"]))
            for o in data["ops"]
        )
        return cls(n, d, ops)


def apply_block(op: BlockOp, state: int) -> int:
    """Apply a block operation to one basis state index."""
    full = MixedRadix(op.d, op.n)
    digits = list(full.decode(state))
    rest = [q for q in range(op.n) if q != op.excluded_qudit]
    sub = MixedRadix(op.d, op.n - 1)
    packed = sub.encode([digits[q] for q in rest])
    moved = sub.decode(op.perm(packed))
    for q, dig in zip(rest, moved):
        digits[q] = dig
    return full.encode(digits)


def _domain_weights(n: int, d: int, excluded: int) -> dict[int, int]:
    """Weight of each non-excluded qudit inside the packed (n-1)-digit index."""
    w = {}
    scale = 1
    for q in range(n):
        if q == excluded:
            continue
        w[q] = scale
        scale *= d
    return w


def _addr_table(qudits: tuple[int, ...], w: dict[int, int], d: int) -> list[int]:
    """Packed-index -> address contribution for a group of qudits.

    Entry v of the table is the address offset of the digit tuple encoded by
    v over ``qudits`` (ascending order, least significant first).
    """
    out = [0]
    for q in qudits:
        out = [a + k * w[q] for k in range(d) for a in out]
    return out


# ---------------------------------------------------------------------------
# Edges: lines with every qudit but the free one(s) pinned to a value.


@dataclass(frozen=True)
class EdgeSpec:
    """A 1 x ... x 1 x L line: ``free_qudits`` vary, the rest are pinned.

    ``fixed`` maps each non-free qudit to its pinned digit value.  The free
    index packs the free qudits ascending, least significant first, so a
    permutation on the edge has size d**len(free_qudits).
    """

    n: int
    d: int
    free_qudits: tuple[int, ...]
    fixed: tuple[tuple[int, int], ...]

    def __post_init__(self):
        free = tuple(sorted(self.free_qudits))
        object.__setattr__(self, "free_qudits", free)
        fixed = tuple(sorted((int(q), int(v)) for q, v in self.fixed))
        object.__setattr__(self, "fixed", fixed)
        qudits = sorted(free + tuple(q for q, _ in fixed))
        if qudits != list(range(self.n)):
            raise ValueError("free and fixed qudits must partition 0..n-1")
        if len(fixed) < 2:
            raise ValueError("an edge needs at least two pinned qudits")
        for q, v in fixed:
            if not 0 <= v < self.d:
                raise ValueError(f"pinned value {v} out of range for d={self.d}")

    @property
    def length(self) -> int:
        return self.d ** len(self.free_qudits)


def commutator_edge(pi: Permutation, sigma: Permutation, edge: EdgeSpec) -> list[BlockOp]:
    """Four block operations whose net effect is sigma^-1 pi^-1 sigma pi on
    the edge and the identity everywhere else.

    The first/third ops apply pi/pi^-1 to the free index wherever every
    pinned digit except the first one matches; the second/fourth do the same
    with sigma, relaxing the second pinned digit instead.  No op moves a
    pinned digit, so each state sees a fixed subsequence of the four and
    everything cancels except on the edge, which sees all four.
    """
    if pi.size != edge.length or sigma.size != edge.length:
        raise ValueError(
            f"edge permutations must have size {edge.length}, "
            f"got {pi.size} and {sigma.size}"
        )
    n, d = edge.n, edge.d
    alpha = edge.fixed[0][0]
    beta = edge.fixed[1][0]

    def conditioned(excluded: int, p: Permutation) -> BlockOp:
        w = _domain_weights(n, d, excluded)
        base = sum(v * w[q] for q, v in edge.fixed if q != excluded)
        free = _addr_table(edge.free_qudits, w, d)
        m = list(range(d ** (n - 1)))
        for idx in range(edge.length):
            m[base + free[idx]] = base + free[p(idx)]
        return BlockOp(n, d, excluded, Permutation(m))

    return [
        conditioned(alpha, pi),
        conditioned(beta, sigma),
        conditioned(alpha, pi.inverse()),
        conditioned(beta, sigma.inverse()),
    ]


def decomp_commut_cycle(tau: Permutation) -> tuple[Permutation, Permutation, Permutation]:
    """Split tau into three involutions whose product (third o second o first)
    is tau, each a product of pairwise disjoint transpositions.

    Per cycle (a1 ... as): an even-length cycle first peels off (as a1),
    leaving the odd-length cycle (a2 ... as); an odd-length cycle (b1 ... bs)
    splits into the two interleaved transposition fans

        second: (bs b2)(b(s-1) b3) ... closing inward,
        third:  (b1 b2)(bs b3)(b(s-1) b4) ... one step offset.
    """
    size = tau.size
    parts: tuple[list[tuple[int, int]], ...] = ([], [], [])
    for cyc in tau.to_cycles():
        a = list(cyc)
        if len(a) == 2:
            parts[0].append((a[1], a[0]))
            continue
        if len(a) % 2 == 0:
            parts[0].append((a[-1], a[0]))
            a = a[1:]
        s = len(a)
        half = (s + 1) // 2
        for j in range(1, half):
            parts[1].append((a[s - j], a[j]))
        parts[2].append((a[0], a[1]))
        for j in range(2, half):
            parts[2].append((a[s + 1 - j], a[j]))
    return tuple(Permutation.from_cycles(p, size) for p in parts)


def _pairs_of(involution: Permutation) -> list[tuple[int, int]]:
    return [tuple(c) for c in involution.to_cycles()]


def _involution_commutator(
    pairs: list[tuple[int, int]], size: int
) -> tuple[Permutation, Permutation]:
    """Express a product of evenly many disjoint transpositions as the
    commutator sigma^-1 pi^-1 sigma pi.

    Two transpositions at a time: (a b)(x y) is the commutator of the
    3-cycles (a b x) and (a b y); quadruples with disjoint supports merge
    into one (pi, sigma) pair because everything commutes.
    """
    if len(pairs) % 2:
        raise ValueError("need an even number of transpositions")
    pairs = sorted(pairs, key=min)
    pi_cycles = []
    sigma_cycles = []
    for i in range(0, len(pairs), 2):
        (a, b), (x, y) = pairs[i], pairs[i + 1]
        pi_cycles.append((a, b, x))
        sigma_cycles.append((a, b, y))
    return (
        Permutation.from_cycles(pi_cycles, size),
        Permutation.from_cycles(sigma_cycles, size),
    )


def _commutator_pairs(tau: Permutation) -> list[tuple[Permutation, Permutation]]:
    """Write an even tau as a product of at most three commutators
    sigma^-1 pi^-1 sigma pi, returned in application order."""
    size = tau.size
    t1, t2, t3 = decomp_commut_cycle(tau)
    pairs = [_pairs_of(t1), _pairs_of(t2), _pairs_of(t3)]
    # The first involution collects one transposition per even-length cycle,
    # and an even permutation has evenly many of those.
    assert len(pairs[0]) % 2 == 0
    if len(pairs[1]) % 2:
        # The two fans always match in parity; when both are odd, one extra
        # transposition on a pair of untouched points fixes both at once
        # without changing the product.
        spare = [
            x for x in range(size) if t2(x) == x and t3(x) == x
        ]
        if len(spare) >= 2:
            pairs[1].append((spare[0], spare[1]))
            pairs[2].append((spare[0], spare[1]))
        else:
            return _commutator_pairs_by_cycle(tau)
    out = []
    for plist in pairs:
        if plist:
            out.append(_involution_commutator(plist, size))
    return out


def _commutator_pairs_by_cycle(tau: Permutation) -> list[tuple[Permutation, Permutation]]:
    """Fallback for the rare case with no spare points: one commutator built
    cycle by cycle.

    An odd-length cycle C is conjugate to its own square, so C itself is the
    commutator of C^-1 and the conjugation that doubles positions along C.
    Only all-odd cycle structures can land here: an even permutation has
    evenly many even-length cycles, and the head of each such cycle is
    touched by neither transposition fan, so two even-length cycles would
    already have donated a spare pair.  Disjoint supports let the per-cycle
    pieces merge into a single (pi, sigma) slot.
    """
    size = tau.size
    pi = Permutation.identity(size)
    sigma = Permutation.identity(size)
    for cyc in tau.to_cycles():
        a = list(cyc)
        k = len(a)
        assert k % 2, "even-length cycles cannot reach the no-spare fallback"
        m = {}
        for j in range(k):
            m[a[(2 * j) % k]] = a[j]
        sigma = compose(sigma, Permutation([m.get(x, x) for x in range(size)]))
        pi = compose(pi, Permutation.from_cycles([tuple(reversed(a))], size))
    return [(pi, sigma)]


def even_edge(tau: Permutation, edge: EdgeSpec) -> list[BlockOp]:
    """Realize an even permutation on an edge with at most 12 block ops."""
    if tau.size != edge.length:
        raise ValueError(f"edge permutation must have size {edge.length}, got {tau.size}")
    if not tau.is_even():
        raise ValueError("only even permutations can be confined to an edge")
    if tau.is_identity():
        return []
    ops: list[BlockOp] = []
    for pi, sigma in _commutator_pairs(tau):
        ops.extend(commutator_edge(pi, sigma, edge))
    assert len(ops) <= 12
    return ops


# ---------------------------------------------------------------------------
# Planes: one qudit pinned; rows along one leftover axis, columns the rest.


@dataclass(frozen=True)
class PlaneSpec:
    """The hyperplane with ``fixed_qudit`` pinned to ``value``.

    Inside the plane, the largest non-pinned qudit serves as the row axis
    and the remaining qudits pack into the column (content) index; the
    ``transposed`` flag of the plane routines swaps those two roles.  With
    this choice a plane inherits its cell numbering from the ambient state
    index: cell = row * d**(n-2) + content.
    """

    n: int
    d: int
    fixed_qudit: int
    value: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("planes need at least 3 qudits")
        if not 0 <= self.fixed_qudit < self.n:
            raise ValueError(f"fixed qudit {self.fixed_qudit} out of range")
        if not 0 <= self.value < self.d:
            raise ValueError(f"pinned value {self.value} out of range for d={self.d}")

    def axes(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if q != self.fixed_qudit)

    def row_qudits(self, transposed: bool) -> tuple[int, ...]:
        axes = self.axes()
        return tuple(axes[:-1]) if transposed else (axes[-1],)

    def content_qudits(self, transposed: bool) -> tuple[int, ...]:
        axes = self.axes()
        return (axes[-1],) if transposed else tuple(axes[:-1])

    def last_row_edge(self, transposed: bool) -> EdgeSpec:
        """The edge formed by the plane's highest-numbered row."""
        fixed = [(self.fixed_qudit, self.value)]
        fixed += [(q, self.d - 1) for q in self.row_qudits(transposed)]
        return EdgeSpec(self.n, self.d, self.content_qudits(transposed), tuple(fixed))


def row_shift_plane(
    pi: Permutation,
    sigmas: list[Permutation],
    plane: PlaneSpec,
    transposed: bool = False,
) -> list[BlockOp]:
    """Four block ops giving row i of the plane the net map
    sigma_i^-1 o sigma_pi(i), identity off the plane.

    Schedule: shift rows by pi (only on the plane), apply sigma_r to the
    content of every row r (everywhere), shift back, apply the inverses.
    Off the plane the middle pair cancels; on it, row i's content goes
    through sigma_pi(i) then sigma_i^-1.
    """
    n, d = plane.n, plane.d
    rows = plane.row_qudits(transposed)
    content = plane.content_qudits(transposed)
    nrows = d ** len(rows)
    ncontent = d ** len(content)
    if pi.size != nrows:
        raise ValueError(f"row permutation must have size {nrows}, got {pi.size}")
    if len(sigmas) != nrows:
        raise ValueError(f"need one content permutation per row ({nrows}), got {len(sigmas)}")
    for s in sigmas:
        if s.size != ncontent:
            raise ValueError(f"content permutations must have size {ncontent}, got {s.size}")

    def shift(p: Permutation) -> BlockOp:
        excluded = content[0]
        w = _domain_weights(n, d, excluded)
        base = plane.value * w[plane.fixed_qudit]
        row_addr = _addr_table(rows, w, d)
        rest_addr = _addr_table(content[1:], w, d)
        m = list(range(d ** (n - 1)))
        for rest in rest_addr:
            at = base + rest
            for r in range(nrows):
                m[at + row_addr[r]] = at + row_addr[p(r)]
        return BlockOp(n, d, excluded, Permutation(m))

    def per_row(ss: list[Permutation]) -> BlockOp:
        w = _domain_weights(n, d, plane.fixed_qudit)
        row_addr = _addr_table(rows, w, d)
        content_addr = _addr_table(content, w, d)
        m = [0] * d ** (n - 1)
        for r in range(nrows):
            at = row_addr[r]
            s = ss[r]
            for c in range(ncontent):
                m[at + content_addr[c]] = at + content_addr[s(c)]
        return BlockOp(n, d, plane.fixed_qudit, Permutation(m))

    return [
        shift(pi),
        per_row(sigmas),
        shift(pi.inverse()),
        per_row([s.inverse() for s in sigmas]),
    ]


def plane_type1(
    pis: list[Permutation], plane: PlaneSpec, transposed: bool = False
) -> list[BlockOp]:
    """Apply even permutation pis[i] to the content of row i of the plane,
    all rows at once, in at most 16 block ops.

    A cyclic row shift with accumulating content maps sigma_(i+1) =
    sigma_i o pis[i] hands every row its own permutation except the last,
    which is left holding sigma_last^-1; an edge repair squares that up.
    """
    rows = plane.row_qudits(transposed)
    ncontent = plane.d ** len(plane.content_qudits(transposed))
    nrows = plane.d ** len(rows)
    if len(pis) != nrows:
        raise ValueError(f"need one permutation per row ({nrows}), got {len(pis)}")
    for p in pis:
        if p.size != ncontent:
            raise ValueError(f"row permutations must have size {ncontent}, got {p.size}")
        if not p.is_even():
            raise ValueError("row permutations must be even to confine them to a plane")
    if all(p.is_identity() for p in pis):
        return []
    cyc = Permutation([(i + 1) % nrows for i in range(nrows)])
    sigmas = [Permutation.identity(ncontent)]
    for i in range(nrows - 1):
        sigmas.append(compose(sigmas[i], pis[i]))
    ops = row_shift_plane(cyc, sigmas, plane, transposed)
    repair = compose(pis[-1], sigmas[-1])
    assert repair.is_even()
    ops += even_edge(repair, plane.last_row_edge(transposed))
    assert len(ops) <= 16
    return ops


def plane_type2(
    x1: int, x2: int, ys: list[int], plane: PlaneSpec, transposed: bool = False
) -> list[BlockOp]:
    """Swap content positions x1 and x2 in each of the listed rows of the
    plane (evenly many), in at most 4 block ops.

    Rows pair up under a product of row transpositions; giving the first
    row of each pair the content swap (x1 x2) and everyone else the
    identity makes sigma_i^-1 sigma_pi(i) the swap exactly on the listed
    rows.
    """
    rows = plane.row_qudits(transposed)
    nrows = plane.d ** len(rows)
    ncontent = plane.d ** len(plane.content_qudits(transposed))
    if x1 == x2:
        raise ValueError("content positions to swap must differ")
    if not (0 <= x1 < ncontent and 0 <= x2 < ncontent):
        raise ValueError("content position out of range")
    if len(set(ys)) != len(ys):
        raise ValueError("rows must be distinct")
    if len(ys) % 2:
        raise ValueError("need an even number of rows to swap within a plane")
    if any(not 0 <= y < nrows for y in ys):
        raise ValueError("row out of range")
    if not ys:
        return []
    pi = Permutation.from_cycles(
        [(ys[i], ys[i + 1]) for i in range(0, len(ys), 2)], nrows
    )
    swap = Permutation.transposition(ncontent, x1, x2)
    ident = Permutation.identity(ncontent)
    sigmas = [swap if y in ys[::2] else ident for y in range(nrows)]
    ops = row_shift_plane(pi, sigmas, plane, transposed)
    assert len(ops) <= 4
    return ops


def plane_even(tau: GridPerm, plane: PlaneSpec) -> list[BlockOp]:
    """Realize an arbitrary even permutation of a plane's cells, identity
    elsewhere; op count is bounded by K_PLANE.

    The plane is viewed as a d x d^(n-2) grid (rows = the plane's row
    axis), split into typed pieces, and each piece lands on plane_type1 or
    plane_type2 — transposed for the column-flavored kinds.
    """
    n, d = plane.n, plane.d
    if d < 3:
        raise ValueError(f"plane synthesis needs d >= 3, got d={d}")
    if tau.s != d or tau.t != d ** (n - 2):
        raise ValueError(
            f"plane permutation must be a {d}x{d ** (n - 2)} grid, got {tau.s}x{tau.t}"
        )
    if not tau.perm.is_even():
        raise ValueError("only even permutations can be confined to a plane")
    ops: list[BlockOp] = []
    for piece in reversed(even_grid_decompose(tau)):
        if piece.kind == KIND_1R:
            ops += plane_type1([Permutation(w) for w in piece.witness], plane)
        elif piece.kind == KIND_1C:
            ops += plane_type1(
                [Permutation(w) for w in piece.witness], plane, transposed=True
            )
        elif piece.kind == KIND_2R:
            c1, c2, rows = piece.witness
            ops += plane_type2(c1, c2, list(rows), plane)
        elif piece.kind == KIND_2C:
            r1, r2, cols = piece.witness
            ops += plane_type2(r1, r2, list(cols), plane, transposed=True)
        else:  # pragma: no cover - the even split never emits other kinds
            raise AssertionError(f"unexpected piece kind {piece.kind!r}")
    assert len(ops) <= K_PLANE
    return ops


# ---------------------------------------------------------------------------
# Whole-space synthesis.


def _spare_column_pair(c1: int, c2: int, d: int) -> int:
    """Smallest b in {0, d, 2d} with {b, b+1} disjoint from {c1, c2}.

    b and b+1 differ only in their least significant digit, so the pair
    stays inside one plane no matter which row it is used on.
    """
    for b in (0, d, 2 * d):
        if c1 not in (b, b + 1) and c2 not in (b, b + 1):
            return b
    raise AssertionError("two cells cannot block three disjoint pairs")


def synthesize_blocks(pi: Permutation, n: int, d: int) -> BlockProgram:
    """Compile an even permutation of all d**n states into O(d) block ops.

    The state space is read as a d x d^(n-1) grid over the most significant
    qudit.  The typed pieces of the even grid split are then spent plane by
    plane: row pieces act inside single hyperplanes directly; column pieces
    are grouped d^(n-2) columns at a time into hyperplanes; the odd part of
    each swap piece is patched with a spare swap whose leftovers all share
    one plane and are cleared in a single extra pass.
    """
    if d < 3:
        raise ValueError(f"block synthesis needs d >= 3, got d={d} (2-level qudits have their own boolean toolbox)")
    if n < 3:
        raise ValueError(f"block synthesis needs n >= 3, got n={n}")
    if pi.size != d**n:
        raise ValueError(f"permutation size {pi.size} is not {d}^{n}")
    if not pi.is_even():
        raise ValueError(
            "only even permutations are supported: with d even, any program of "
            f"{n - 1}-qudit blocks is an even permutation of the whole state "
            "space, so odd targets are unreachable; the odd-d side of that "
            "question stays open and is out of scope here"
        )
    t = d ** (n - 1)
    tsub = d ** (n - 2)
    top = GridPerm(d, t, pi)
    ops: list[BlockOp] = []
    for piece in reversed(even_grid_decompose(top)):
        if piece.kind == KIND_1R:
            # One hyperplane per row: the row's cell numbering is already
            # the plane's cell numbering.
            for r, w in enumerate(piece.witness):
                plane = PlaneSpec(n, d, n - 1, r)
                ops += plane_even(GridPerm(d, tsub, Permutation(w)), plane)
        elif piece.kind == KIND_1C:
            # Columns are lines along the top qudit; group them by their
            # most significant content digit so each group fills one plane.
            for v in range(d):
                m = list(range(d * tsub))
                for cc in range(tsub):
                    col = piece.witness[v * tsub + cc]
                    for r in range(d):
                        m[r * tsub + cc] = col[r] * tsub + cc
                lifted = GridPerm(d, tsub, Permutation(m))
                if not lifted.is_identity():
                    ops += plane_even(lifted, PlaneSpec(n, d, n - 2, v))
        elif piece.kind == KIND_2R:
            c1, c2, rows = piece.witness
            b = _spare_column_pair(c1, c2, d)
            for r in sorted(rows):
                m = list(range(d * tsub))
                m[c1], m[c2] = m[c2], m[c1]
                m[b], m[b + 1] = m[b + 1], m[b]
                plane = PlaneSpec(n, d, n - 1, r)
                ops += plane_even(GridPerm(d, tsub, Permutation(m)), plane)
            # The spare swaps differ only in digit 0 and share digit 1, so
            # they all sit in one plane; clear them in a single pass.
            leftover = MixedRadix(d, n - 1).digit(b, 1)
            m = list(range(d * tsub))
            for r in sorted(rows):
                m[r * tsub], m[r * tsub + 1] = m[r * tsub + 1], m[r * tsub]
            ops += plane_even(GridPerm(d, tsub, Permutation(m)), PlaneSpec(n, d, 1, leftover))
        elif piece.kind == KIND_2C:
            r1, r2, cols = piece.witness
            odd_groups = []
            for v in range(d):
                hit = sorted(c for c in cols if c // tsub == v)
                if len(hit) % 2:
                    anchor = v * tsub
                    hit = sorted(set(hit) ^ {anchor})
                    odd_groups.append(v)
                if not hit:
                    continue
                m = list(range(d * tsub))
                for c in hit:
                    cc = c % tsub
                    m[r1 * tsub + cc], m[r2 * tsub + cc] = (
                        m[r2 * tsub + cc],
                        m[r1 * tsub + cc],
                    )
                ops += plane_even(GridPerm(d, tsub, Permutation(m)), PlaneSpec(n, d, n - 2, v))
            # Each group's anchor column starts with digit 0 equal to 0, so
            # the unmatched anchors line up in one plane.
            if odd_groups:
                m = list(range(d * tsub))
                for v in odd_groups:
                    cc = v * d ** (n - 3)
                    m[r1 * tsub + cc], m[r2 * tsub + cc] = (
                        m[r2 * tsub + cc],
                        m[r1 * tsub + cc],
                    )
                ops += plane_even(GridPerm(d, tsub, Permutation(m)), PlaneSpec(n, d, 0, 0))
        else:  # pragma: no cover - the even split never emits other kinds
            raise AssertionError(f"unexpected piece kind {piece.kind!r}")
    program = BlockProgram(n, d, tuple(ops))
    assert len(program) <= K_CUBE * d
    return program


def block_lower_bound(n: int, d: int) -> int:
    """Worst-case number of (n-1)-qudit blocks some even permutation needs:
    ceil( log(d^n! / 2) / log(n * d^(n-1)!) ), a counting bound."""
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    num = math.lgamma(d**n + 1) - math.log(2)
    den = math.log(n) + math.lgamma(d ** (n - 1) + 1)
    return math.ceil(num / den)
