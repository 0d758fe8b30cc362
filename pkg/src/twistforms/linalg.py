"""Dense matrices over cyclotomic numbers and exact Gaussian elimination.

Elimination works on sparse rows (``{col: CycNum}``) since nearly every
system built downstream is very sparse.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cyclo import ONE, ZERO, CycNum

__all__ = [
    "CycMatrix",
    "LinearSolution",
    "rref_sparse",
    "solve_linear",
    "solve_many",
    "nullspace",
    "rank",
    "span_basis",
    "same_span",
    "in_span",
]


class CycMatrix:
    """Rectangular matrix with CycNum entries; immutable."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, ncols=None):
        rows = tuple(tuple(CycNum.coerce(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols

    @classmethod
    def zeros(cls, r, c):
        return cls([[ZERO] * c for _ in range(r)], c)

    @classmethod
    def identity(cls, n):
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], n)

    @classmethod
    def column(cls, vec):
        return cls([[x] for x in vec], 1)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def col(self, j):
        return tuple(r[j] for r in self.rows)

    def transpose(self):
        return CycMatrix([self.col(j) for j in range(self.ncols)], self.nrows)

    T = property(transpose)

    def __add__(self, other):
        return CycMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other):
        return CycMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self):
        return CycMatrix([[-a for a in r] for r in self.rows], self.ncols)

    def scale(self, c):
        c = CycNum.coerce(c)
        return CycMatrix([[a * c for a in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        if isinstance(other, CycMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = [other.col(j) for j in range(other.ncols)]
            out = []
            for r in self.rows:
                nz = [(k, a) for k, a in enumerate(r) if a]
                row = []
                for c in cols:
                    acc = ZERO
                    for k, a in nz:
                        b = c[k]
                        if b:
                            acc = acc + a * b
                    row.append(acc)
                out.append(row)
            return CycMatrix(out, other.ncols)
        # vector
        vec = tuple(other)
        return tuple(_dot(r, vec) for r in self.rows)

    def apply(self, vec):
        return self @ vec

    def kron(self, other):
        rows = []
        for r in self.rows:
            for s in other.rows:
                rows.append([a * b for a in r for b in s])
        return CycMatrix(rows, self.ncols * other.ncols)

    def is_zero(self):
        return not any(x for r in self.rows for x in r)

    def is_identity(self):
        return self.nrows == self.ncols and all(
            (x == ONE) if i == j else not x for i, r in enumerate(self.rows) for j, x in enumerate(r)
        )

    def __eq__(self, other):
        return isinstance(other, CycMatrix) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def inverse(self):
        if self.nrows != self.ncols:
            raise ValueError("non-square matrix")
        sol = solve_many(self, CycMatrix.identity(self.nrows))
        if sol.nullspace or any(p is None for p in sol.particulars):
            raise ZeroDivisionError("singular matrix")
        return CycMatrix([[sol.particulars[j][i] for j in range(self.ncols)] for i in range(self.nrows)], self.ncols)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        acc = CycMatrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                acc = acc @ base
            k >>= 1
            if k:
                base = base @ base
        return acc

    def tolist(self):
        return [list(r) for r in self.rows]

    def __repr__(self):
        return "CycMatrix(" + repr([[str(x) for x in r] for r in self.rows]) + ")"


def _dot(a, b):
    acc = ZERO
    for x, y in zip(a, b):
        if x and y:
            acc = acc + x * y
    return acc


def rref_sparse(rows, ncols, extra=0):
    """Reduced row echelon form of sparse rows.

    ``rows`` is a list of dicts mapping column -> CycNum.  Columns
    ``ncols .. ncols+extra-1`` are augmented right-hand sides: they are
    carried along but never chosen as pivots.  Returns ``(pivot_rows,
    pivot_cols, leftover)`` where ``leftover`` are the rows that reduced to
    zero on the first ``ncols`` columns (nonzero only in the augmented part).
    """
    work = []
    leftover = []
    for r in rows:
        if any(k < ncols for k in r):
            work.append(dict(r))
        elif r:
            leftover.append(dict(r))
    pivots = []  # (col, row)
    # forward elimination, column by column
    by_col = {}
    for r in work:
        for c in r:
            if c < ncols:
                by_col.setdefault(c, []).append(r)
    alive = {id(r): r for r in work}
    for c in range(ncols):
        seen = set()
        cands = []
        for r in by_col.pop(c, ()):
            if id(r) in alive and c in r and id(r) not in seen:
                seen.add(id(r))
                cands.append(r)
        if not cands:
            continue
        # sparsest candidate keeps fill-in low; ties broken by position for determinism
        prow = min(cands, key=len)
        del alive[id(prow)]
        inv = prow[c].inverse()
        prow = {k: v * inv for k, v in prow.items()}
        pivots.append((c, prow))
        pitems = [(k, v) for k, v in prow.items() if k != c]
        for r in cands:
            if id(r) not in alive:
                continue
            f = r.pop(c)
            for k, v in pitems:
                nv = r.get(k, ZERO) - f * v
                if nv:
                    if k not in r and k < ncols:
                        by_col.setdefault(k, []).append(r)
                    r[k] = nv
                else:
                    r.pop(k, None)
            if not any(k < ncols for k in r):
                del alive[id(r)]
                if r:
                    leftover.append(r)
    # back substitution to reduced form
    for i in range(len(pivots) - 1, -1, -1):
        c, prow = pivots[i]
        pitems = [(k, v) for k, v in prow.items() if k != c]
        for j in range(i):
            _, r = pivots[j]
            f = r.get(c)
            if f is None:
                continue
            del r[c]
            for k, v in pitems:
                nv = r.get(k, ZERO) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return [p[1] for p in pivots], [p[0] for p in pivots], leftover


def _matrix_rows(A):
    return [{j: x for j, x in enumerate(r) if x} for r in A.rows]


@dataclass(frozen=True)
class LinearSolution:
    """Particular solutions (one per right-hand side column, ``None`` when
    that column is inconsistent) and a nullspace basis."""

    particulars: tuple
    nullspace: tuple

    @property
    def particular(self):
        return self.particulars[0]


def _nullspace_from(prows, pcols, ncols):
    pivset = set(pcols)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [ZERO] * ncols
        v[f] = ONE
        for c, r in zip(pcols, prows):
            x = r.get(f)
            if x:
                v[c] = -x
        basis.append(tuple(v))
    return tuple(basis)


def solve_many(A, B):
    """Solve A X = B column by column.  Inconsistent columns give ``None``."""
    if A.nrows != B.nrows:
        raise ValueError("row count mismatch")
    n, k = A.ncols, B.ncols
    rows = []
    for ar, br in zip(A.rows, B.rows):
        d = {j: x for j, x in enumerate(ar) if x}
        for j, x in enumerate(br):
            if x:
                d[n + j] = x
        rows.append(d)
    prows, pcols, leftover = rref_sparse(rows, n, extra=k)
    bad = {c - n for r in leftover for c in r}
    parts = []
    for j in range(k):
        if j in bad:
            parts.append(None)
            continue
        x = [ZERO] * n
        for c, r in zip(pcols, prows):
            v = r.get(n + j)
            if v:
                x[c] = v
        parts.append(tuple(x))
    return LinearSolution(tuple(parts), _nullspace_from(prows, pcols, n))


def solve_linear(A, b):
    """Particular solution and nullspace basis of A x = b, or ``None``.

    ``b`` may be a column CycMatrix or a plain sequence.
    """
    if not isinstance(b, CycMatrix):
        b = CycMatrix.column(b)
    sol = solve_many(A, b)
    if any(p is None for p in sol.particulars):
        return None
    return sol


def nullspace(A):
    prows, pcols, _ = rref_sparse(_matrix_rows(A), A.ncols)
    return _nullspace_from(prows, pcols, A.ncols)


def rank(vectors_or_matrix):
    if isinstance(vectors_or_matrix, CycMatrix):
        rows = _matrix_rows(vectors_or_matrix)
        n = vectors_or_matrix.ncols
    else:
        vecs = list(vectors_or_matrix)
        if not vecs:
            return 0
        n = len(vecs[0])
        rows = [{j: CycNum.coerce(x) for j, x in enumerate(v) if x} for v in vecs]
    return len(rref_sparse(rows, n)[1])


def span_basis(vectors, dim=None):
    """Canonical (reduced echelon) basis of the span of ``vectors``."""
    vecs = [tuple(v) for v in vectors]
    if dim is None:
        if not vecs:
            return ()
        dim = len(vecs[0])
    rows = [{j: CycNum.coerce(x) for j, x in enumerate(v) if x} for v in vecs]
    prows, _, _ = rref_sparse(rows, dim)
    out = []
    for r in prows:
        v = [ZERO] * dim
        for j, x in r.items():
            v[j] = x
        out.append(tuple(v))
    return tuple(out)


def same_span(a, b, dim=None):
    return span_basis(a, dim) == span_basis(b, dim)


def in_span(vec, vectors):
    vecs = list(vectors)
    if not any(any(x for x in v) for v in [vec]):
        return True
    return rank(vecs + [vec]) == rank(vecs) if vecs else False
