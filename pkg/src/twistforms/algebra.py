"""Finite-dimensional algebras given by structure constants.

Coordinates are tuples of CycNum of length ``dim``.  An automorphism is a
``dim x dim`` CycMatrix acting on coordinate columns, so column ``j`` holds
the image of basis element ``j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cyclo import ONE, ZERO, CycNum
from .linalg import CycMatrix, _nullspace_from, nullspace, rank, rref_sparse, solve_many, span_basis

__all__ = [
    "StructureAlgebra",
    "AlgebraAuto",
    "GradedDecomposition",
    "AutomorphismError",
    "NotMultiplicativeError",
    "NotInvertibleError",
    "OrderTooLargeError",
    "GradingError",
    "make_sl",
    "make_matrix_algebra",
    "direct_sum",
    "ideal_closure",
    "verify_central_simple",
    "centroid",
    "check_auto",
    "conjugation_auto",
    "graded_pieces",
    "is_primitive_root",
    "DEFAULT_ORDER_CAP",
]

DEFAULT_ORDER_CAP = 360


class AutomorphismError(ValueError):
    pass


class NotMultiplicativeError(AutomorphismError):
    pass


class NotInvertibleError(AutomorphismError):
    pass


class OrderTooLargeError(AutomorphismError):
    pass


class GradingError(ValueError):
    pass


def _vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vec_scale(c, a):
    return tuple(c * x for x in a)


class StructureAlgebra:
    """Algebra with basis e_0..e_{d-1} and e_i e_j = sum_k c[i][j][k] e_k.

    ``natural`` optionally holds matrix realizations of the basis (used for
    conjugation automorphisms and for the sl_n inner/outer decision).
    """

    def __init__(self, constants, is_lie=False, basis_names=None, natural=None, check=True):
        d = len(constants)
        table = []
        for i in range(d):
            row = []
            for j in range(d):
                vec = tuple(CycNum.coerce(x) for x in constants[i][j])
                if len(vec) != d:
                    raise ValueError("structure constants must be a d x d x d array")
                row.append(vec)
            table.append(tuple(row))
        self.dim = d
        self.table = tuple(table)
        self._sparse = tuple(
            tuple(tuple((k, c) for k, c in enumerate(self.table[i][j]) if c) for j in range(d)) for i in range(d)
        )
        self.is_lie = bool(is_lie)
        self.basis_names = tuple(basis_names) if basis_names else tuple(f"x{i}" for i in range(d))
        self.natural = tuple(natural) if natural is not None else None
        self.sl_rank = None
        if check and self.is_lie:
            self._check_lie()

    @classmethod
    def from_triples(cls, dim, triples, is_lie=False, basis_names=None):
        """Build from sparse ``(i, j, k, value)`` entries."""
        consts = [[[ZERO] * dim for _ in range(dim)] for _ in range(dim)]
        for i, j, k, v in triples:
            consts[i][j][k] = consts[i][j][k] + CycNum.coerce(v)
        return cls(consts, is_lie=is_lie, basis_names=basis_names)

    def _check_lie(self):
        d = self.dim
        for i in range(d):
            for j in range(d):
                if self.table[i][j] != tuple(-x for x in self.table[j][i]):
                    raise ValueError(f"not antisymmetric at ({i}, {j})")
        for i, j, k in itertools.combinations_with_replacement(range(d), 3):
            ei, ej, ek = self.unit(i), self.unit(j), self.unit(k)
            s = _vec_add(
                _vec_add(self.mul(ei, self.mul(ej, ek)), self.mul(ej, self.mul(ek, ei))),
                self.mul(ek, self.mul(ei, ej)),
            )
            if any(s):
                raise ValueError(f"Jacobi identity fails on ({i}, {j}, {k})")

    def unit(self, i):
        return tuple(ONE if k == i else ZERO for k in range(self.dim))

    def zero(self):
        return (ZERO,) * self.dim

    def mul(self, x, y):
        """Product of two coordinate vectors (the bracket when is_lie)."""
        out = [ZERO] * self.dim
        xs = [(i, a) for i, a in enumerate(x) if a]
        ys = [(j, b) for j, b in enumerate(y) if b]
        for i, a in xs:
            row = self._sparse[i]
            for j, b in ys:
                entries = row[j]
                if entries:
                    ab = a * b
                    for k, c in entries:
                        out[k] = out[k] + ab * c
        return tuple(out)

    def commutator(self, x, y):
        if self.is_lie:
            return self.mul(x, y)
        return tuple(a - b for a, b in zip(self.mul(x, y), self.mul(y, x)))

    def left_matrix(self, i):
        """Matrix of y -> e_i y."""
        d = self.dim
        cols = [self.table[i][j] for j in range(d)]
        return CycMatrix([[cols[j][k] for j in range(d)] for k in range(d)], d)

    def right_matrix(self, i):
        d = self.dim
        cols = [self.table[j][i] for j in range(d)]
        return CycMatrix([[cols[j][k] for j in range(d)] for k in range(d)], d)

    def is_associative(self):
        d = self.dim
        for i, j, k in itertools.product(range(d), repeat=3):
            ei, ej, ek = self.unit(i), self.unit(j), self.unit(k)
            if self.mul(self.mul(ei, ej), ek) != self.mul(ei, self.mul(ej, ek)):
                return False
        return True

    def coords_of_matrices(self, mats):
        """Coordinates of matrices in the natural realization (None if outside)."""
        if self.natural is None:
            raise ValueError("algebra has no natural matrix realization")
        flat = [[x for r in m.rows for x in r] for m in self.natural]
        A = CycMatrix([[flat[b][p] for b in range(self.dim)] for p in range(len(flat[0]))], self.dim)
        targets = [[x for r in m.rows for x in r] for m in mats]
        B = CycMatrix([[t[p] for t in targets] for p in range(len(flat[0]))], len(mats))
        sol = solve_many(A, B)
        return [p for p in sol.particulars]

    def matrix_of(self, x):
        """Natural matrix realization of a coordinate vector."""
        n = self.natural[0].nrows
        acc = CycMatrix.zeros(n, n)
        for c, m in zip(x, self.natural):
            if c:
                acc = acc + m.scale(c)
        return acc

    def __repr__(self):
        kind = "Lie" if self.is_lie else "algebra"
        return f"<StructureAlgebra {kind} dim={self.dim}>"


def _unit_matrix(n, i, j):
    return CycMatrix([[ONE if (r, c) == (i, j) else ZERO for c in range(n)] for r in range(n)], n)


def make_sl(n):
    """sl_n with basis E_ij (i != j, lexicographic) then H_i = E_ii - E_{i+1,i+1}.

    For n = 2 the basis is (e, f, h).  This is the fixed pinning used
    throughout the package.
    """
    if n < 2:
        raise ValueError("sl_n needs n >= 2")
    mats, names = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                mats.append(_unit_matrix(n, i, j))
                names.append(f"E{i + 1}{j + 1}")
    for i in range(n - 1):
        mats.append(_unit_matrix(n, i, i) - _unit_matrix(n, i + 1, i + 1))
        names.append(f"H{i + 1}")
    d = len(mats)
    brackets = [m1 @ m2 - m2 @ m1 for m1 in mats for m2 in mats]
    coords = _sl_coords(n, brackets)
    consts = [[coords[i * d + j] for j in range(d)] for i in range(d)]
    alg = StructureAlgebra(consts, is_lie=True, basis_names=names, natural=mats)
    alg.sl_rank = n
    return alg


def _sl_coords(n, mats):
    # direct read-off in the E_ij / H_i basis; traceless input assumed
    out = []
    for m in mats:
        v = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    v.append(m[i, j])
        acc = ZERO
        for i in range(n - 1):
            acc = acc + m[i, i]
            v.append(acc)
        out.append(tuple(v))
    return out


def make_matrix_algebra(n):
    """The associative algebra M_n with basis E_ij in lexicographic order."""
    mats, names = [], []
    for i in range(n):
        for j in range(n):
            mats.append(_unit_matrix(n, i, j))
            names.append(f"E{i + 1}{j + 1}")
    d = n * n
    consts = [[[ZERO] * d for _ in range(d)] for _ in range(d)]
    for a, (i, j) in enumerate(itertools.product(range(n), repeat=2)):
        for b, (k, l) in enumerate(itertools.product(range(n), repeat=2)):
            if j == k:
                consts[a][b][i * n + l] = ONE
    return StructureAlgebra(consts, is_lie=False, basis_names=names, natural=mats)


def direct_sum(A, B):
    d = A.dim + B.dim
    consts = [[[ZERO] * d for _ in range(d)] for _ in range(d)]
    for i in range(A.dim):
        for j in range(A.dim):
            for k, c in enumerate(A.table[i][j]):
                consts[i][j][k] = c
    for i in range(B.dim):
        for j in range(B.dim):
            for k, c in enumerate(B.table[i][j]):
                consts[A.dim + i][A.dim + j][A.dim + k] = c
    names = [f"{n}_1" for n in A.basis_names] + [f"{n}_2" for n in B.basis_names]
    return StructureAlgebra(consts, is_lie=A.is_lie and B.is_lie, basis_names=names)


def ideal_closure(A, seed):
    """Smallest two-sided ideal containing ``seed``, as a reduced echelon basis."""
    basis = span_basis([tuple(CycNum.coerce(x) for x in v) for v in seed], A.dim)
    frontier = list(basis)
    units = [A.unit(k) for k in range(A.dim)]
    while frontier:
        new = []
        for v in frontier:
            for u in units:
                new.append(A.mul(u, v))
                new.append(A.mul(v, u))
        new = [w for w in new if any(w)]
        grown = span_basis(list(basis) + new, A.dim)
        if len(grown) == len(basis):
            break
        frontier = list(grown)
        basis = grown
    return basis


def centroid(A):
    """Basis of the maps T with T(xy) = T(x) y = x T(y), as flattened d*d vectors
    (row-major, T[k][l] at index k*d + l)."""
    d = A.dim
    rows = []
    for i in range(d):
        for j in range(d):
            prod = A.table[i][j]
            # T(e_i e_j) - T(e_i) e_j  and  T(e_i e_j) - e_i T(e_j), coordinate k
            for k in range(d):
                r1, r2 = {}, {}
                for l, c in enumerate(prod):
                    if c:
                        idx = k * d + l
                        r1[idx] = r1.get(idx, ZERO) + c
                        r2[idx] = r2.get(idx, ZERO) + c
                for m in range(d):
                    # T(e_i) = sum_m T[m][i] e_m ; (e_m e_j)[k]
                    c = A.table[m][j][k]
                    if c:
                        idx = m * d + i
                        r1[idx] = r1.get(idx, ZERO) - c
                    c = A.table[i][m][k]
                    if c:
                        idx = m * d + j
                        r2[idx] = r2.get(idx, ZERO) - c
                for r in (r1, r2):
                    r = {a: b for a, b in r.items() if b}
                    if r:
                        rows.append(r)
    prows, pcols, _ = rref_sparse(rows, d * d)
    return _nullspace_from(prows, pcols, d * d)


def verify_central_simple(A):
    """Every basis vector generates A as an ideal, A is perfect, and the
    centroid is one-dimensional."""
    if A.dim < 1:
        return False
    products = [A.table[i][j] for i in range(A.dim) for j in range(A.dim)]
    if rank(products) != A.dim:
        return False
    for i in range(A.dim):
        if len(ideal_closure(A, [A.unit(i)])) != A.dim:
            return False
    return len(centroid(A)) == 1


@dataclass(frozen=True)
class AlgebraAuto:
    matrix: CycMatrix
    order: int

    def __call__(self, x):
        return self.matrix @ x

    def inverse(self):
        if self.order is None:
            return AlgebraAuto(self.matrix.inverse(), None)
        return AlgebraAuto(self.matrix ** (self.order - 1), self.order)

    def compose(self, other):
        """self after other."""
        m = self.matrix @ other.matrix
        return AlgebraAuto(m, _order_of(m, DEFAULT_ORDER_CAP * DEFAULT_ORDER_CAP))

    def __pow__(self, k):
        if self.order is None:
            return AlgebraAuto(self.matrix ** k, None)
        k %= self.order
        m = self.matrix ** k
        return AlgebraAuto(m, _order_of(m, self.order))


def _order_of(m, cap):
    acc = m
    for k in range(1, cap + 1):
        if acc.is_identity():
            return k
        acc = acc @ m
    raise OrderTooLargeError(f"order exceeds cap {cap}")


def check_auto(A, m, cap=DEFAULT_ORDER_CAP, finite=True):
    """Validate ``m`` as a finite-order automorphism of ``A``.

    With ``finite=False`` any automorphism is accepted and ``order`` is None
    when it exceeds ``cap``.
    """
    if not isinstance(m, CycMatrix):
        m = CycMatrix(m)
    d = A.dim
    if m.shape != (d, d):
        raise ValueError(f"automorphism matrix must be {d}x{d}")
    if rank(m) != d:
        raise NotInvertibleError("matrix is singular")
    cols = [m.col(j) for j in range(d)]
    for i in range(d):
        for j in range(d):
            lhs = m @ A.table[i][j]
            rhs = A.mul(cols[i], cols[j])
            if tuple(lhs) != rhs:
                raise NotMultiplicativeError(
                    f"alpha({A.basis_names[i]} * {A.basis_names[j]}) != alpha({A.basis_names[i]}) * alpha({A.basis_names[j]})"
                )
    try:
        return AlgebraAuto(m, _order_of(m, cap if finite else min(cap, 24)))
    except OrderTooLargeError:
        if finite:
            raise
        return AlgebraAuto(m, None)


def conjugation_auto(A, P, cap=DEFAULT_ORDER_CAP, finite=True):
    """x -> P x P^-1 on an algebra with a natural matrix realization."""
    if not isinstance(P, CycMatrix):
        P = CycMatrix(P)
    Pinv = P.inverse()
    images = [P @ X @ Pinv for X in A.natural]
    coords = A.coords_of_matrices(images)
    if any(c is None for c in coords):
        raise AutomorphismError("conjugation leaves the algebra")
    d = A.dim
    m = CycMatrix([[coords[j][i] for j in range(d)] for i in range(d)], d)
    return check_auto(A, m, cap, finite)


def is_primitive_root(xi, m):
    xi = CycNum.coerce(xi)
    if xi ** m != ONE:
        return False
    for p in range(2, m + 1):
        if m % p == 0 and all(p % q for q in range(2, p)):
            if xi ** (m // p) == ONE:
                return False
    return True


@dataclass(frozen=True)
class GradedDecomposition:
    orders: tuple
    roots: tuple
    pieces: dict = field(compare=False)

    def dims(self):
        return {j: len(b) for j, b in self.pieces.items()}

    def piece(self, degree):
        key = tuple(e % m for e, m in zip(degree, self.orders))
        return self.pieces[key]


def graded_pieces(A, autos, roots):
    """Simultaneous eigenspaces g_j = {x : sigma_i(x) = xi_i^j_i x}."""
    autos = list(autos)
    roots = [CycNum.coerce(r) for r in roots]
    if len(autos) != len(roots):
        raise GradingError("need one root per automorphism")
    for a, b in itertools.combinations(autos, 2):
        if a.matrix @ b.matrix != b.matrix @ a.matrix:
            raise GradingError("automorphisms do not commute")
    for a, xi in zip(autos, roots):
        if not is_primitive_root(xi, a.order):
            raise GradingError(f"{xi} is not a primitive root of unity of order {a.order}")
    d = A.dim
    orders = tuple(a.order for a in autos)
    pieces = {}
    for j in itertools.product(*[range(m) for m in orders]):
        rows = []
        for a, xi, ji in zip(autos, roots, j):
            lam = xi ** ji
            for r in range(d):
                rows.append([a.matrix[r, c] - (lam if r == c else ZERO) for c in range(d)])
        if rows:
            ns = nullspace(CycMatrix(rows, d))
        else:
            ns = tuple(A.unit(k) for k in range(d))
        pieces[j] = span_basis(ns, d)
    total = sum(len(b) for b in pieces.values())
    if total != d:
        raise GradingError(f"eigenspaces have total dimension {total}, expected {d}")
    return GradedDecomposition(orders, tuple(roots), pieces)
