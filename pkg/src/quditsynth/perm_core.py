"""Permutation arithmetic, parity, cycle notation, and mixed-radix grid views.

The whole toolkit speaks one language: a bijection on {0..N-1} stored in
one-line notation (``map[x]`` is the image of x).  Cycle notation is an I/O
codec, not a working representation.  Mixed-radix indexing fixes, once and
for all, how a state index maps onto qudit digits: digit k carries weight
d**k, so digit 0 is the least significant.  Grid views regroup the digits
into (row, column) coordinates; cell (r, c) of an s-by-t grid is the flat
index r*t + c.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

# Permutations must stay inside native array indexing.
MAX_PERM_SIZE = 2**31


class Permutation:
    """A bijection on {0..N-1} in one-line notation."""

    __slots__ = ("map",)

    map: tuple[int, ...]

    def __init__(self, mapping: Sequence[int]):
        m = tuple(int(v) for v in mapping)
        n = len(m)
        if n > MAX_PERM_SIZE:
            raise ValueError(f"permutation size {n} exceeds the 2^31 indexing limit")
        seen = bytearray(n)
        for v in m:
            if not 0 <= v < n:
                raise ValueError(f"value {v} out of range for a permutation of {n} elements")
            if seen[v]:
                raise ValueError(f"not a bijection: image {v} appears more than once")
            seen[v] = 1
        object.__setattr__(self, "map", m)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    @property
    def size(self) -> int:
        return len(self.map)

    def __call__(self, x: int) -> int:
        return self.map[x]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.map == other.map

    def __hash__(self) -> int:
        return hash(self.map)

    def __repr__(self) -> str:
        if self.size <= 16:
            return f"Permutation({list(self.map)})"
        return f"Permutation(<size {self.size}>)"

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition ``self * other``: apply ``other`` first, then ``self``."""
        return compose(self, other)

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(range(size))

    @classmethod
    def transposition(cls, size: int, a: int, b: int) -> "Permutation":
        m = list(range(size))
        m[a], m[b] = m[b], m[a]
        return cls(m)

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], size: int) -> "Permutation":
        """Build a permutation from disjoint cycles; (a1 a2 ... ak) maps a1 to a2.

        Fixed points are implicit.  Repeated elements (within or across
        cycles) are rejected.
        """
        m = list(range(size))
        used: set[int] = set()
        for cyc in cycles:
            cyc = [int(a) for a in cyc]
            if len(cyc) < 2:
                raise ValueError(f"cycle {cyc} has fewer than 2 elements")
            for a in cyc:
                if not 0 <= a < size:
                    raise ValueError(f"cycle element {a} out of range for size {size}")
                if a in used:
                    raise ValueError(f"element {a} appears in more than one cycle position")
                used.add(a)
            for i, a in enumerate(cyc):
                m[a] = cyc[(i + 1) % len(cyc)]
        return cls(m)

    def to_cycles(self) -> list[tuple[int, ...]]:
        """Disjoint cycles in canonical form.

        Each cycle starts at its smallest element, cycles are sorted by that
        element, and fixed points are omitted.
        """
        n = self.size
        seen = bytearray(n)
        out: list[tuple[int, ...]] = []
        for start in range(n):
            if seen[start] or self.map[start] == start:
                seen[start] = 1
                continue
            cyc = []
            x = start
            while not seen[x]:
                seen[x] = 1
                cyc.append(x)
                x = self.map[x]
            out.append(tuple(cyc))
        return out

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for x, y in enumerate(self.map):
            inv[y] = x
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(v == x for x, v in enumerate(self.map))

    def is_even(self) -> bool:
        """True iff the permutation is a product of an even number of 2-cycles."""
        n = self.size
        seen = bytearray(n)
        odd_swaps = 0
        for start in range(n):
            if seen[start]:
                continue
            length = 0
            x = start
            while not seen[x]:
                seen[x] = 1
                length += 1
                x = self.map[x]
            odd_swaps ^= (length - 1) & 1
        return odd_swaps == 0

    def moved_points(self) -> list[int]:
        return [x for x, v in enumerate(self.map) if v != x]


def compose(f: Permutation, g: Permutation) -> Permutation:
    """(f o g)(x) = f(g(x)): g is applied first."""
    if f.size != g.size:
        raise ValueError(f"size mismatch: {f.size} vs {g.size}")
    gm = g.map
    fm = f.map
    return Permutation([fm[gm[x]] for x in range(len(gm))])


def compose_all(perms: Iterable[Permutation], size: int) -> Permutation:
    """Compose a sequence given in application order (first element applied first)."""
    acc = Permutation.identity(size)
    for p in perms:
        acc = compose(p, acc)
    return acc


def parity(p: Permutation) -> str:
    return "even" if p.is_even() else "odd"


def random_permutation(size: int, rng: random.Random) -> Permutation:
    m = list(range(size))
    rng.shuffle(m)
    return Permutation(m)


def random_even_permutation(size: int, rng: random.Random) -> Permutation:
    if size < 2:
        return Permutation.identity(size)
    m = list(range(size))
    rng.shuffle(m)
    p = Permutation(m)
    if not p.is_even():
        m[0], m[1] = m[1], m[0]
        p = Permutation(m)
    return p


class MixedRadix:
    """Index arithmetic for n digits of base d; digit k has weight d**k."""

    __slots__ = ("d", "n", "size")

    def __init__(self, d: int, n: int):
        if d < 2:
            raise ValueError(f"dimension d={d} must be at least 2")
        if n < 1:
            raise ValueError(f"digit count n={n} must be at least 1")
        size = d**n
        if size > MAX_PERM_SIZE:
            raise ValueError(f"state space {d}^{n} exceeds the 2^31 indexing limit")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "size", size)

    def __setattr__(self, name, value):
        raise AttributeError("MixedRadix is immutable")

    def decode(self, v: int) -> tuple[int, ...]:
        """Digits of v, least significant first."""
        if not 0 <= v < self.size:
            raise ValueError(f"state {v} out of range for {self.d}^{self.n} states")
        out = []
        for _ in range(self.n):
            out.append(v % self.d)
            v //= self.d
        return tuple(out)

    def encode(self, digits: Sequence[int]) -> int:
        if len(digits) != self.n:
            raise ValueError(f"expected {self.n} digits, got {len(digits)}")
        v = 0
        for dig in reversed(digits):
            if not 0 <= dig < self.d:
                raise ValueError(f"digit {dig} out of range for d={self.d}")
            v = v * self.d + dig
        return v

    def digit(self, v: int, k: int) -> int:
        return (v // self.d**k) % self.d

    def with_digit(self, v: int, k: int, value: int) -> int:
        w = self.d**k
        return v + (value - (v // w) % self.d) * w

    def to_string(self, v: int) -> str:
        """Digit string, most significant digit leftmost (requires d <= 10)."""
        if self.d > 10:
            raise ValueError("digit strings are only defined for d <= 10")
        return "".join(str(dig) for dig in reversed(self.decode(v)))

    def from_string(self, s: str) -> int:
        if self.d > 10:
            raise ValueError("digit strings are only defined for d <= 10")
        if len(s) != self.n:
            raise ValueError(f"expected {self.n} digit characters, got {len(s)!r}")
        digits = []
        for ch in reversed(s):
            if not ch.isdigit() or int(ch) >= self.d:
                raise ValueError(f"bad digit {ch!r} for d={self.d}")
            digits.append(int(ch))
        return self.encode(digits)


class GridPerm:
    """A permutation of the cells of an s-by-t grid.

    Cell (r, c) is the flat index r*t + c; the underlying one-line map acts
    on flat indices.
    """

    __slots__ = ("s", "t", "perm")

    def __init__(self, s: int, t: int, perm: Permutation):
        if s < 1 or t < 1:
            raise ValueError("grid dimensions must be positive")
        if s * t != perm.size:
            raise ValueError(f"{s}x{t} grid does not match permutation of size {perm.size}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "perm", perm)

    def __setattr__(self, name, value):
        raise AttributeError("GridPerm is immutable")

    @classmethod
    def identity(cls, s: int, t: int) -> "GridPerm":
        return cls(s, t, Permutation.identity(s * t))

    def cell(self, r: int, c: int) -> int:
        if not (0 <= r < self.s and 0 <= c < self.t):
            raise ValueError(f"cell ({r},{c}) outside {self.s}x{self.t} grid")
        return r * self.t + c

    def coords(self, idx: int) -> tuple[int, int]:
        return divmod(idx, self.t)

    def apply(self, r: int, c: int) -> tuple[int, int]:
        return self.coords(self.perm(self.cell(r, c)))

    def is_identity(self) -> bool:
        return self.perm.is_identity()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GridPerm)
            and (self.s, self.t) == (other.s, other.t)
            and self.perm == other.perm
        )

    def __hash__(self) -> int:
        return hash((self.s, self.t, self.perm))

    def __repr__(self) -> str:
        return f"GridPerm({self.s}x{self.t}, {self.perm!r})"


def _axis_partition(d: int, n: int, row_digits: Iterable[int]) -> tuple[list[int], list[int]]:
    rows = sorted(set(int(k) for k in row_digits))
    if not rows or any(k < 0 or k >= n for k in rows):
        raise ValueError(f"row digit set {rows} is not a nonempty subset of 0..{n - 1}")
    if len(rows) == n:
        raise ValueError("row digit set must leave at least one column digit")
    cols = [k for k in range(n) if k not in rows]
    return rows, cols


def state_to_cell(v: int, d: int, n: int, row_digits: Iterable[int]) -> tuple[int, int]:
    """Regroup a state index into (row, column) coordinates.

    The row value encodes the selected digits in ascending digit order (the
    smallest selected digit index is the least significant part of the row),
    and likewise for the column value over the remaining digits.
    """
    rows, cols = _axis_partition(d, n, row_digits)
    mr = MixedRadix(d, n)
    digits = mr.decode(v)
    r = 0
    for k in reversed(rows):
        r = r * d + digits[k]
    c = 0
    for k in reversed(cols):
        c = c * d + digits[k]
    return r, c


def cell_to_state(r: int, c: int, d: int, n: int, row_digits: Iterable[int]) -> int:
    rows, cols = _axis_partition(d, n, row_digits)
    digits = [0] * n
    for k in rows:
        digits[k] = r % d
        r //= d
    for k in cols:
        digits[k] = c % d
        c //= d
    return MixedRadix(d, n).encode(digits)


def grid_view(p: Permutation, d: int, n: int, row_digits: Iterable[int]) -> GridPerm:
    """View a permutation of d**n states as a grid permutation.

    The chosen digits become the row coordinate (product s = d**len(rows)),
    the remaining digits the column coordinate.
    """
    rows, cols = _axis_partition(d, n, row_digits)
    if p.size != d**n:
        raise ValueError(f"permutation size {p.size} is not {d}^{n}")
    s = d ** len(rows)
    t = d ** len(cols)
    lookup = [0] * p.size
    for v in range(p.size):
        r, c = state_to_cell(v, d, n, rows)
        lookup[v] = r * t + c
    gmap = [0] * p.size
    for v in range(p.size):
        gmap[lookup[v]] = lookup[p(v)]
    return GridPerm(s, t, Permutation(gmap))


def ungrid(gp: GridPerm, d: int, n: int, row_digits: Iterable[int]) -> Permutation:
    """Invert grid_view: recover the permutation on raw state indices."""
    rows, cols = _axis_partition(d, n, row_digits)
    size = gp.s * gp.t
    if size != d**n:
        raise ValueError(f"grid size {size} is not {d}^{n}")
    back = [0] * size
    for v in range(size):
        r, c = state_to_cell(v, d, n, rows)
        back[r * gp.t + c] = v
    m = [0] * size
    for v in range(size):
        r, c = state_to_cell(v, d, n, rows)
        m[v] = back[gp.perm(r * gp.t + c)]
    return Permutation(m)
