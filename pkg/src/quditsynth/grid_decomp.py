"""Two-dimensional permutation decomposition on an s-by-t grid.

Three layers live here:

* row/column/row routing: any grid permutation factors as row-routing,
  column-routing, row-routing (``rcr_decompose``);
* the typed even decomposition: any even grid permutation factors into a
  bounded number of type-1r/1c/2r/2c pieces (``even_grid_decompose``),
  where "type-R/C" means row-/column-preserving and "1"/"2" distinguishes
  independent per-line even permutations from aligned transposition
  batches;
* the constant-size pair-swap machinery (``swap_pair_ops``): swap two
  disjoint pairs of cells using at most 20 elementary operations, each an
  aligned double swap (type-2r'/2c').

Conventions: rows/columns are 0-based; cell (r, c) is flat index r*t + c.
``rcr_decompose`` and ``swap_pair_ops`` return lists in application order
(leftmost applied first); ``even_grid_decompose`` returns the factors of a
mathematical product, so its list composes right-to-left.
"""

from __future__ import annotations

from dataclasses import dataclass

from .perm_core import GridPerm, Permutation, compose

KIND_R = "R"
KIND_C = "C"
KIND_1R = "1r"
KIND_1C = "1c"
KIND_2R = "2r"
KIND_2C = "2c"
KIND_2RP = "2r'"
KIND_2CP = "2c'"

# Worst observed factor count of even_grid_decompose (frozen; regression-tested).
K_GRID = 46


@dataclass(frozen=True)
class TypedPerm:
    """A grid permutation tagged with its structural class.

    witness layout per kind:
      R / 1r: tuple of s per-row column permutations (row i sends column c
              to witness[i][c]); for 1r every row permutation is even.
      C / 1c: tuple of t per-column row permutations.
      2r:     (c1, c2, rows): swap (r, c1) <-> (r, c2) for each listed row.
      2c:     (r1, r2, cols): swap (r1, c) <-> (r2, c) for each listed column.
      2r':    (r1, r2, c1, c2): the two-row special case of 2r.
      2c':    (c1, c2, r1, r2): the two-column special case of 2c.
    """

    kind: str
    s: int
    t: int
    witness: tuple

    @property
    def perm(self) -> GridPerm:
        return self.grid_perm()

    def grid_perm(self) -> GridPerm:
        s, t = self.s, self.t
        m = list(range(s * t))
        if self.kind in (KIND_R, KIND_1R):
            for r, rowp in enumerate(self.witness):
                for c, c2 in enumerate(rowp):
                    m[r * t + c] = r * t + c2
        elif self.kind in (KIND_C, KIND_1C):
            for c, colp in enumerate(self.witness):
                for r, r2 in enumerate(colp):
                    m[r * t + c] = r2 * t + c
        elif self.kind == KIND_2R:
            c1, c2, rows = self.witness
            for r in rows:
                m[r * t + c1], m[r * t + c2] = m[r * t + c2], m[r * t + c1]
        elif self.kind == KIND_2C:
            r1, r2, cols = self.witness
            for c in cols:
                m[r1 * t + c], m[r2 * t + c] = m[r2 * t + c], m[r1 * t + c]
        elif self.kind == KIND_2RP:
            r1, r2, c1, c2 = self.witness
            for r in (r1, r2):
                m[r * t + c1], m[r * t + c2] = m[r * t + c2], m[r * t + c1]
        elif self.kind == KIND_2CP:
            c1, c2, r1, r2 = self.witness
            for c in (c1, c2):
                m[r1 * t + c], m[r2 * t + c] = m[r2 * t + c], m[r1 * t + c]
        else:
            raise ValueError(f"unknown kind {self.kind!r}")
        return GridPerm(s, t, Permutation(m))

    def validate(self) -> None:
        """Raise if the witness violates the kind's structural invariant."""
        s, t = self.s, self.t
        if self.kind in (KIND_R, KIND_1R):
            if len(self.witness) != s:
                raise ValueError("need one row permutation per row")
            for rowp in self.witness:
                p = Permutation(rowp)
                if p.size != t:
                    raise ValueError("row permutation of wrong size")
                if self.kind == KIND_1R and not p.is_even():
                    raise ValueError("type-1r requires even row permutations")
        elif self.kind in (KIND_C, KIND_1C):
            if len(self.witness) != t:
                raise ValueError("need one column permutation per column")
            for colp in self.witness:
                p = Permutation(colp)
                if p.size != s:
                    raise ValueError("column permutation of wrong size")
                if self.kind == KIND_1C and not p.is_even():
                    raise ValueError("type-1c requires even column permutations")
        elif self.kind == KIND_2R:
            c1, c2, rows = self.witness
            if c1 == c2 or not (0 <= c1 < t and 0 <= c2 < t):
                raise ValueError("type-2r needs two distinct columns")
            if len(set(rows)) != len(rows) or len(rows) % 2:
                raise ValueError("type-2r needs an even number of distinct rows")
            if any(not 0 <= r < s for r in rows):
                raise ValueError("row out of range")
        elif self.kind == KIND_2C:
            r1, r2, cols = self.witness
            if r1 == r2 or not (0 <= r1 < s and 0 <= r2 < s):
                raise ValueError("type-2c needs two distinct rows")
            if len(set(cols)) != len(cols) or len(cols) % 2:
                raise ValueError("type-2c needs an even number of distinct columns")
            if any(not 0 <= c < t for c in cols):
                raise ValueError("column out of range")
        elif self.kind == KIND_2RP:
            r1, r2, c1, c2 = self.witness
            if r1 == r2 or c1 == c2:
                raise ValueError("type-2r' needs distinct rows and distinct columns")
            if not (0 <= r1 < s and 0 <= r2 < s and 0 <= c1 < t and 0 <= c2 < t):
                raise ValueError("type-2r' indices out of range")
        elif self.kind == KIND_2CP:
            c1, c2, r1, r2 = self.witness
            if r1 == r2 or c1 == c2:
                raise ValueError("type-2c' needs distinct rows and distinct columns")
            if not (0 <= r1 < s and 0 <= r2 < s and 0 <= c1 < t and 0 <= c2 < t):
                raise ValueError("type-2c' indices out of range")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    def apply_cell(self, r: int, c: int) -> tuple[int, int]:
        if self.kind in (KIND_R, KIND_1R):
            return r, self.witness[r][c]
        if self.kind in (KIND_C, KIND_1C):
            return self.witness[c][r], c
        if self.kind == KIND_2R:
            c1, c2, rows = self.witness
            if r in rows and c in (c1, c2):
                return r, c1 if c == c2 else c2
            return r, c
        if self.kind == KIND_2C:
            r1, r2, cols = self.witness
            if c in cols and r in (r1, r2):
                return r1 if r == r2 else r2, c
            return r, c
        if self.kind == KIND_2RP:
            r1, r2, c1, c2 = self.witness
            if r in (r1, r2) and c in (c1, c2):
                return r, c1 if c == c2 else c2
            return r, c
        if self.kind == KIND_2CP:
            c1, c2, r1, r2 = self.witness
            if c in (c1, c2) and r in (r1, r2):
                return r1 if r == r2 else r2, c
            return r, c
        raise ValueError(f"unknown kind {self.kind!r}")


def op_2rp(s: int, t: int, r1: int, r2: int, c1: int, c2: int) -> TypedPerm:
    op = TypedPerm(KIND_2RP, s, t, (r1, r2, c1, c2))
    op.validate()
    return op


def op_2cp(s: int, t: int, c1: int, c2: int, r1: int, r2: int) -> TypedPerm:
    op = TypedPerm(KIND_2CP, s, t, (c1, c2, r1, r2))
    op.validate()
    return op


def compose_typed(ops, s: int, t: int, application_order: bool = True) -> Permutation:
    """Net permutation of a TypedPerm list."""
    seq = ops if application_order else list(reversed(ops))
    acc = Permutation.identity(s * t)
    for op in seq:
        acc = compose(op.grid_perm().perm, acc)
    return acc


# ---------------------------------------------------------------------------
# Row/column/row routing
# ---------------------------------------------------------------------------


def _extract_matchings(count: list[list[int]], s: int, t: int) -> list[list[int]]:
    """Split a t-regular bipartite multigraph (as a multiplicity matrix)
    into t perfect matchings via repeated augmenting paths."""
    matchings = []
    for _ in range(t):
        match_right = [-1] * s

        def try_augment(r: int, visited: list[bool]) -> bool:
            for rp in range(s):
                if count[r][rp] > 0 and not visited[rp]:
                    visited[rp] = True
                    if match_right[rp] == -1 or try_augment(match_right[rp], visited):
                        match_right[rp] = r
                        return True
            return False

        for r in range(s):
            if not try_augment(r, [False] * s):
                raise AssertionError("regular bipartite multigraph must have a perfect matching")
        m = [0] * s
        for rp, r in enumerate(match_right):
            m[r] = rp
        for r in range(s):
            count[r][m[r]] -= 1
        matchings.append(m)
    return matchings


def rcr_decompose(p: GridPerm) -> list[TypedPerm]:
    """Factor p as [row-routing, column-routing, row-routing].

    Returned in application order: composing the three grid permutations
    (first element applied first) reproduces p.  Each cell's journey is
    (r, c) -> (r, j) -> (r', j) -> (r', c') where j is the intermediate
    column assigned by a perfect-matching edge of the row-to-row transfer
    multigraph.
    """
    s, t = p.s, p.t
    dest = [[p.apply(r, c) for c in range(t)] for r in range(s)]
    count = [[0] * s for _ in range(s)]
    cells_by_dest: list[list[list[int]]] = [[[] for _ in range(s)] for _ in range(s)]
    for r in range(s):
        for c in range(t):
            rp = dest[r][c][0]
            count[r][rp] += 1
            cells_by_dest[r][rp].append(c)
    matchings = _extract_matchings(count, s, t)

    row1 = [[-1] * t for _ in range(s)]  # stage 1: column assignment per cell
    col2 = [[-1] * s for _ in range(t)]  # stage 2: row routing per column
    row3 = [[-1] * t for _ in range(s)]  # stage 3: final column per row
    used = [[0] * s for _ in range(s)]
    for j, m in enumerate(matchings):
        for r in range(s):
            rp = m[r]
            c = cells_by_dest[r][rp][used[r][rp]]
            used[r][rp] += 1
            row1[r][c] = j
            col2[j][r] = rp
            row3[rp][j] = dest[r][c][1]

    out = [
        TypedPerm(KIND_R, s, t, tuple(tuple(rp) for rp in row1)),
        TypedPerm(KIND_C, s, t, tuple(tuple(cp) for cp in col2)),
        TypedPerm(KIND_R, s, t, tuple(tuple(rp) for rp in row3)),
    ]
    for op in out:
        op.validate()
    return out


# ---------------------------------------------------------------------------
# Even split of row-preserving permutations
# ---------------------------------------------------------------------------


def _tuple_parity(m) -> int:
    """1 for odd, 0 for even, via a cycle scan without building Permutation."""
    seen = [False] * len(m)
    odd = 0
    for start in range(len(m)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = m[x]
            length += 1
        odd ^= (length - 1) & 1
    return odd


def _swap01_values(m) -> tuple[int, ...]:
    return tuple(1 if v == 0 else 0 if v == 1 else v for v in m)


def even_split_typeR(tp: TypedPerm) -> tuple[TypedPerm, TypedPerm]:
    """Split an even row-preserving permutation into (type-1r, type-2r).

    Each odd row permutation is post-composed with the column swap (0 1);
    the collected swaps form the type-2r part q, and compose(q, p') = p.
    """
    if tp.kind not in (KIND_R, KIND_1R):
        raise ValueError("expected a row-preserving permutation")
    rows = []
    odd_rows = []
    for i, rowp in enumerate(tp.witness):
        if _tuple_parity(rowp):
            if tp.t < 2:
                raise ValueError("cannot repair an odd row on a 1-column grid")
            odd_rows.append(i)
            rows.append(_swap01_values(rowp))
        else:
            rows.append(tuple(rowp))
    if len(odd_rows) % 2:
        raise ValueError("row-preserving permutation must be even to split")
    p1 = TypedPerm(KIND_1R, tp.s, tp.t, tuple(rows))
    q = TypedPerm(KIND_2R, tp.s, tp.t, (0, 1, tuple(odd_rows)))
    return p1, q


def even_split_typeC(tp: TypedPerm) -> tuple[TypedPerm, TypedPerm]:
    """Column-preserving mirror of even_split_typeR."""
    if tp.kind not in (KIND_C, KIND_1C):
        raise ValueError("expected a column-preserving permutation")
    cols = []
    odd_cols = []
    for i, colp in enumerate(tp.witness):
        if _tuple_parity(colp):
            if tp.s < 2:
                raise ValueError("cannot repair an odd column on a 1-row grid")
            odd_cols.append(i)
            cols.append(_swap01_values(colp))
        else:
            cols.append(tuple(colp))
    if len(odd_cols) % 2:
        raise ValueError("column-preserving permutation must be even to split")
    p1 = TypedPerm(KIND_1C, tp.s, tp.t, tuple(cols))
    q = TypedPerm(KIND_2C, tp.s, tp.t, (0, 1, tuple(odd_cols)))
    return p1, q


# ---------------------------------------------------------------------------
# Pair-swap machinery
# ---------------------------------------------------------------------------

Cell = tuple[int, int]


def _op_cell(op: TypedPerm, cell: Cell) -> Cell:
    return op.apply_cell(*cell)


def _ops_cell(ops: list[TypedPerm], cell: Cell) -> Cell:
    for op in ops:
        cell = _op_cell(op, cell)
    return cell


def _s2_row(s: int, t: int, x1: int, cols1: Cell, x2: int, cols2: Cell) -> list[TypedPerm]:
    """Swap (x1,cols1[0])<->(x1,cols1[1]) and (x2,cols2[0])<->(x2,cols2[1])
    simultaneously, x1 != x2.  1, 3 or 5 operations depending on how many
    columns the two swaps share."""
    assert x1 != x2
    set1, set2 = set(cols1), set(cols2)
    assert len(set1) == 2 and len(set2) == 2
    if set1 == set2:
        c1, c2 = sorted(set1)
        return [op_2rp(s, t, x1, x2, c1, c2)]
    shared = set1 & set2
    if len(shared) == 1:
        ys = shared.pop()
        y2 = (set1 - {ys}).pop()
        yt2 = (set2 - {ys}).pop()
        x3 = min(x for x in range(s) if x not in (x1, x2))
        op_a = op_2rp(s, t, x2, x3, y2, yt2)
        op_b = op_2rp(s, t, x1, x2, ys, y2)
        return [op_a, op_b, op_a]
    # Disjoint column sets: conjugate the second swap onto a shared column.
    y1 = min(set1)
    yt1, yt2 = sorted(set2)
    x3 = min(x for x in range(s) if x not in (x1, x2))
    conj = op_2rp(s, t, x2, x3, yt1, y1)
    inner = _s2_row(s, t, x1, tuple(sorted(set1)), x2, (y1, yt2))
    return [conj] + inner + [conj]


def _transpose_op(op: TypedPerm) -> TypedPerm:
    if op.kind == KIND_2RP:
        r1, r2, c1, c2 = op.witness
        return op_2cp(op.t, op.s, r1, r2, c1, c2)
    if op.kind == KIND_2CP:
        c1, c2, r1, r2 = op.witness
        return op_2rp(op.t, op.s, c1, c2, r1, r2)
    raise ValueError("only elementary double-swap operations transpose")


def _s2_col(s: int, t: int, y1: int, rows1: Cell, y2: int, rows2: Cell) -> list[TypedPerm]:
    """Column counterpart of _s2_row: two within-column swaps, y1 != y2."""
    return [_transpose_op(op) for op in _s2_row(t, s, y1, rows1, y2, rows2)]


def _aligned(p: Cell, q: Cell) -> str | None:
    if p[0] == q[0]:
        return "row"
    if p[1] == q[1]:
        return "col"
    return None


def swap_pair_ops(a: Cell, ap: Cell, b: Cell, bp: Cell, s: int, t: int) -> list[TypedPerm]:
    """Operations (application order) whose net effect is exactly the two
    swaps a<->ap and b<->bp, fixing every other cell.  At most 20 operations,
    each of kind 2r' or 2c'.  Requires s, t >= 3 and four distinct cells."""
    if s < 3 or t < 3:
        raise ValueError(f"pair-swap machinery needs a grid of at least 3x3, got {s}x{t}")
    cells = [a, ap, b, bp]
    if len(set(cells)) != 4:
        raise ValueError(f"cells {cells} are not distinct")
    for r, c in cells:
        if not (0 <= r < s and 0 <= c < t):
            raise ValueError(f"cell ({r},{c}) outside {s}x{t} grid")
    ops = _dispatch(a, ap, b, bp, s, t, 0)
    assert len(ops) <= 20, f"pair swap exceeded 20 operations ({len(ops)})"
    return ops


def _dispatch(a: Cell, ap: Cell, b: Cell, bp: Cell, s: int, t: int, depth: int) -> list[TypedPerm]:
    assert depth <= 4, "pair-swap dispatch failed to terminate"
    a_axis = _aligned(a, ap)
    b_axis = _aligned(b, bp)
    if a_axis is None and b_axis is None:
        return _case_free_free(a, ap, b, bp, s, t)
    if a_axis is None:
        return _case_aligned_free(b, bp, a, ap, s, t, depth)
    if b_axis is None:
        return _case_aligned_free(a, ap, b, bp, s, t, depth)
    if a_axis == b_axis:
        return _case_parallel(a, ap, b, bp, s, t, a_axis)
    return _case_perpendicular(a, ap, b, bp, s, t, depth)


def _is_rectangle(a: Cell, ap: Cell, b: Cell, bp: Cell) -> bool:
    return {a[0], ap[0]} == {b[0], bp[0]} and {a[1], ap[1]} == {b[1], bp[1]}


def _case_free_free(a: Cell, ap: Cell, b: Cell, bp: Cell, s: int, t: int) -> list[TypedPerm]:
    ops = _free_free_direct(a, ap, b, bp, s, t)
    # The corner search below is total: each candidate's validity depends only
    # on coordinate equalities among the four cells, and every equality
    # pattern of four distinct cells fits in a 4x4 grid, where the search is
    # exhaustively verified to succeed.
    assert ops is not None, "corner search failed for an off-axis pair configuration"
    return ops


def _free_free_direct(a: Cell, ap: Cell, b: Cell, bp: Cell, s: int, t: int) -> list[TypedPerm] | None:
    if _is_rectangle(a, ap, b, bp):
        r1, r2 = sorted({a[0], ap[0]})
        c1, c2 = sorted({a[1], ap[1]})
        return [op_2rp(s, t, r1, r2, c1, c2), op_2cp(s, t, c1, c2, r1, r2)]

    # Generic position: move one element of each pair to a rectangle corner,
    # swap the pairs at their new aligned positions, then restore the corners.
    # Each of the three steps is a simultaneous two-swap along parallel lines.
    bcells = {b, bp}
    acells = {a, ap}
    for orient in ("row", "col"):
        for u, uo in ((a, ap), (ap, a)):
            for v, vo in ((b, bp), (bp, b)):
                if orient == "row":
                    alpha = (u[0], uo[1])
                    beta = (v[0], vo[1])
                    if alpha in bcells or beta in acells or alpha == beta:
                        continue
                    if u[0] == v[0] or uo[1] == vo[1]:
                        continue
                    s1 = _s2_row(s, t, u[0], (u[1], uo[1]), v[0], (v[1], vo[1]))
                    s2 = _s2_col(s, t, uo[1], (u[0], uo[0]), vo[1], (v[0], vo[0]))
                else:
                    alpha = (uo[0], u[1])
                    beta = (vo[0], v[1])
                    if alpha in bcells or beta in acells or alpha == beta:
                        continue
                    if u[1] == v[1] or uo[0] == vo[0]:
                        continue
                    s1 = _s2_col(s, t, u[1], (u[0], uo[0]), v[1], (v[0], vo[0]))
                    s2 = _s2_row(s, t, uo[0], (u[1], uo[1]), vo[0], (v[1], vo[1]))
                return s1 + s2 + s1
    return None


def _case_aligned_free(p: Cell, pp: Cell, f: Cell, fp: Cell, s: int, t: int, depth: int) -> list[TypedPerm]:
    """One pair (p, pp) aligned, the other (f, fp) not: one operation moves
    an element of the aligned pair off its line, the resulting configuration
    is dispatched recursively, and the operation is repeated."""
    axis = _aligned(p, pp)
    if axis == "row":
        # Transpose so the aligned pair shares a column.
        swap = lambda cell: (cell[1], cell[0])  # noqa: E731
        inner = _case_aligned_free(swap(p), swap(pp), swap(f), swap(fp), t, s, depth)
        return [_transpose_op(op) for op in inner]

    col = p[1]
    free_cells = {f, fp}
    r_gamma = min(r for r in range(s) if r not in (p[0], pp[0]))
    gamma = (r_gamma, col)

    def score(y: int) -> int:
        return sum((r, y) not in free_cells for r in (p[0], pp[0], r_gamma))

    candidates = [y for y in range(t) if y != col]
    if gamma in free_cells:
        other = f if gamma == fp else fp
        best = [y for y in candidates if score(y) == 3]
        assert best, "a full column is always available next to an off-axis pair"
        # Prefer keeping the free pair off-axis after gamma's payload moves.
        best.sort(key=lambda y: (y == other[1], y))
        y0 = best[0]
        conj = op_2rp(s, t, pp[0], r_gamma, col, y0)
    else:
        conj = None
        for y0 in sorted(candidates, key=lambda y: (-score(y), y)):
            if score(y0) == 3:
                conj = op_2rp(s, t, pp[0], r_gamma, col, y0)
                break
            if score(y0) == 2 and (r_gamma, y0) not in free_cells:
                if (pp[0], y0) not in free_cells:
                    conj = op_2rp(s, t, pp[0], r_gamma, col, y0)
                else:
                    conj = op_2rp(s, t, p[0], r_gamma, col, y0)
                break
        assert conj is not None, "score-based column selection must succeed"

    moved = [_op_cell(conj, cell) for cell in (p, pp, f, fp)]
    inner = _dispatch(moved[0], moved[1], moved[2], moved[3], s, t, depth + 1)
    return [conj] + inner + [conj]


def _case_parallel(a: Cell, ap: Cell, b: Cell, bp: Cell, s: int, t: int, axis: str) -> list[TypedPerm]:
    if axis == "col":
        swap = lambda cell: (cell[1], cell[0])  # noqa: E731
        inner = _case_parallel(swap(a), swap(ap), swap(b), swap(bp), t, s, "row")
        return [_transpose_op(op) for op in inner]
    ra, rb = a[0], b[0]
    if ra != rb:
        return _s2_row(s, t, ra, (a[1], ap[1]), rb, (b[1], bp[1]))
    # All four cells share one row: move the first pair to a fresh row.
    r2 = min(r for r in range(s) if r != ra)
    conj = op_2cp(s, t, a[1], ap[1], ra, r2)
    inner = _s2_row(s, t, r2, (a[1], ap[1]), ra, (b[1], bp[1]))
    return [conj] + inner + [conj]


def _case_perpendicular(a: Cell, ap: Cell, b: Cell, bp: Cell, s: int, t: int, depth: int) -> list[TypedPerm]:
    if _aligned(a, ap) == "row":
        prow, pcol = (a, ap), (b, bp)
    else:
        prow, pcol = (b, bp), (a, ap)
    R = prow[0][0]
    C1, C2 = prow[0][1], prow[1][1]
    C = pcol[0][1]
    R1, R2 = pcol[0][0], pcol[1][0]

    if R in (R1, R2):
        # The row pair sits on one of the column pair's rows: move it away.
        r_new = min(r for r in range(s) if r not in (R, R1, R2))
        conj = op_2cp(s, t, C1, C2, R, r_new)
    elif C in (C1, C2):
        c_new = min(c for c in range(t) if c not in (C, C1, C2))
        conj = op_2rp(s, t, R1, R2, C, c_new)
    else:
        p1, p2 = (R, C1), (R, C2)
        q1, q2 = (R1, C), (R2, C)

        def stage(qx: Cell, qy: Cell) -> list[TypedPerm]:
            # Swap p1 with qx and p2 with qy via the rectangle corners
            # (qx.row, C1) and (qy.row, C2); three 3-operation double swaps.
            s2a = _s2_col(s, t, C1, (R, qx[0]), C2, (R, qy[0]))
            s2b = _s2_row(s, t, qx[0], (C, C1), qy[0], (C, C2))
            return s2a + s2b + s2a

        return stage(q1, q2) + stage(q2, q1)

    moved = [_op_cell(conj, cell) for cell in (a, ap, b, bp)]
    inner = _dispatch(moved[0], moved[1], moved[2], moved[3], s, t, depth + 1)
    return [conj] + inner + [conj]


def lem01_product(r0: int, c1: int, c2: int, r1: int, r2: int, c0: int, s: int, t: int) -> list[TypedPerm]:
    """Operations realizing ((r0,c1)(r0,c2)) * ((r1,c0)(r2,c0)): one swap
    inside row r0 and one swap inside column c0, with disjoint supports."""
    row_cells = {(r0, c1), (r0, c2)}
    col_cells = {(r1, c0), (r2, c0)}
    if len(row_cells) != 2 or len(col_cells) != 2 or row_cells & col_cells:
        raise ValueError("the two transpositions must have disjoint two-cell supports")
    return swap_pair_ops((r0, c1), (r0, c2), (r1, c0), (r2, c0), s, t)


# ---------------------------------------------------------------------------
# Typed even decomposition
# ---------------------------------------------------------------------------


def _swap_ops_as_2r2c(ops: list[TypedPerm]) -> list[TypedPerm]:
    out = []
    for op in ops:
        if op.kind == KIND_2RP:
            r1, r2, c1, c2 = op.witness
            out.append(TypedPerm(KIND_2R, op.s, op.t, (c1, c2, (r1, r2) if r1 < r2 else (r2, r1))))
        elif op.kind == KIND_2CP:
            c1, c2, r1, r2 = op.witness
            out.append(TypedPerm(KIND_2C, op.s, op.t, (r1, r2, (c1, c2) if c1 < c2 else (c2, c1))))
        else:
            raise ValueError("expected elementary double-swap operations")
    return out


def _witness_identity(tp: TypedPerm) -> bool:
    return all(line == tuple(range(len(line))) for line in tp.witness)


def _split_parts_R(tp: TypedPerm) -> list[TypedPerm]:
    p1, q = even_split_typeR(tp)
    parts = []
    if q.witness[2]:
        parts.append(q)
    if not _witness_identity(p1):
        parts.append(p1)
    return parts


def _split_parts_C(tp: TypedPerm) -> list[TypedPerm]:
    p1, q = even_split_typeC(tp)
    parts = []
    if q.witness[2]:
        parts.append(q)
    if not _witness_identity(p1):
        parts.append(p1)
    return parts


def _mul_R(f: TypedPerm, g: TypedPerm) -> TypedPerm:
    """Row-preserving product f o g (g applied first)."""
    rows = tuple(
        tuple(f.witness[r][g.witness[r][c]] for c in range(f.t)) for r in range(f.s)
    )
    return TypedPerm(KIND_R, f.s, f.t, rows)


def _mul_C(f: TypedPerm, g: TypedPerm) -> TypedPerm:
    """Column-preserving product f o g (g applied first)."""
    cols = tuple(
        tuple(f.witness[c][g.witness[c][r]] for r in range(f.s)) for c in range(f.t)
    )
    return TypedPerm(KIND_C, f.s, f.t, cols)


def _row_transposition(s: int, t: int, row: int, c1: int, c2: int) -> TypedPerm:
    rows = [tuple(range(t)) for _ in range(s)]
    rows[row] = tuple(Permutation.transposition(t, c1, c2).map)
    return TypedPerm(KIND_R, s, t, tuple(rows))


def _col_transposition(s: int, t: int, col: int, r1: int, r2: int) -> TypedPerm:
    cols = [tuple(range(s)) for _ in range(t)]
    cols[col] = tuple(Permutation.transposition(s, r1, r2).map)
    return TypedPerm(KIND_C, s, t, tuple(cols))


def even_grid_decompose(p: GridPerm) -> list[TypedPerm]:
    """Factor an even grid permutation into type-1r/1c/2r/2c pieces.

    The returned list holds the factors of a mathematical product: the
    rightmost (last) factor is applied first.  Its length never exceeds
    K_GRID.  Requires s, t >= 3 and an even permutation.
    """
    s, t = p.s, p.t
    if s < 3 or t < 3:
        raise ValueError(f"even grid decomposition needs s, t >= 3, got {s}x{t}")
    if not p.perm.is_even():
        raise ValueError("permutation is odd; only even grid permutations decompose into typed pieces")
    if p.is_identity():
        return []

    pi1, sigma, pi2 = rcr_decompose(p)
    # A line-preserving permutation's parity is the parity sum of its lines.
    e1 = sum(_tuple_parity(line) for line in pi1.witness) % 2 == 0
    e2 = sum(_tuple_parity(line) for line in sigma.witness) % 2 == 0
    e3 = sum(_tuple_parity(line) for line in pi2.witness) % 2 == 0

    # Fixed odd auxiliaries with disjoint supports on any >= 3x3 grid: a
    # transposition inside column 0 and one inside row 0.
    sig_p_cells = ((0, 0), (1, 0))
    pi_p_cells = ((0, 1), (0, 2))
    sig_p = _col_transposition(s, t, 0, 0, 1)
    pi_p = _row_transposition(s, t, 0, 1, 2)

    def swap_segment(rowpair: tuple[Cell, Cell], colpair: tuple[Cell, Cell]) -> list[TypedPerm]:
        ops = swap_pair_ops(rowpair[0], rowpair[1], colpair[0], colpair[1], s, t)
        return _swap_ops_as_2r2c(list(reversed(ops)))

    parts: list[TypedPerm] = []
    if e1 and e2 and e3:
        parts += _split_parts_R(pi2)
        parts += _split_parts_C(sigma)
        parts += _split_parts_R(pi1)
    elif (not e1) and (not e2) and e3:
        # pi = pi2 . (sigma sig') . (sig' pi') . (pi' pi1)
        parts += _split_parts_R(pi2)
        parts += _split_parts_C(_mul_C(sigma, sig_p))
        parts += swap_segment(pi_p_cells, sig_p_cells)
        parts += _split_parts_R(_mul_R(pi_p, pi1))
    elif e1 and (not e2) and (not e3):
        # pi = (pi2 pi') . (pi' sig') . (sig' sigma) . pi1
        parts += _split_parts_R(_mul_R(pi2, pi_p))
        parts += swap_segment(pi_p_cells, sig_p_cells)
        parts += _split_parts_C(_mul_C(sig_p, sigma))
        parts += _split_parts_R(pi1)
    else:
        # pi1 and pi2 odd, sigma even:
        # pi = (pi2 pi'') . (pi'' sig'') . sigma . (sig' pi') . (pi' pi1)
        # where sig'' is sigma's conjugate of sig', another single column swap.
        col0 = sigma.witness[0]
        sig_pp_cells = ((col0[0], 0), (col0[1], 0))
        parts += _split_parts_R(_mul_R(pi2, pi_p))
        parts += swap_segment(pi_p_cells, sig_pp_cells)
        parts += _split_parts_C(sigma)
        parts += swap_segment(pi_p_cells, sig_p_cells)
        parts += _split_parts_R(_mul_R(pi_p, pi1))

    assert len(parts) <= K_GRID, f"typed decomposition produced {len(parts)} > K_GRID parts"
    return parts
