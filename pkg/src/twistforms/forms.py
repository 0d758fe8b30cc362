"""Twisted forms of g(R) inside g(S), computed on finite degree windows.

A form L is infinite dimensional, so everything here works on the finitely
many coefficients inside a box of degrees.  Constraints produced at degrees
outside the box are kept, never dropped, so window computations are exact
statements about L intersected with the box.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property

from .algebra import (
    AlgebraAuto,
    StructureAlgebra,
    conjugation_auto,
    graded_pieces,
    make_matrix_algebra,
    make_sl,
)
from .cyclo import ONE, ZERO, CycNum
from .linalg import CycMatrix, _nullspace_from, rref_sparse, solve_many
from .torus import (
    ExtensionSpec,
    GaloisElement,
    LaurentPoly,
    TorusPoint,
    eval_poly,
    fiber,
    galois_act_point,
    galois_act_poly,
    standard_extension,
)

__all__ = [
    "Box",
    "CurrentElem",
    "Cocycle",
    "FormSpec",
    "FormWindow",
    "WindowIdeal",
    "WindowTooSmall",
    "multiloop_spec",
    "cocycle_spec",
    "azumaya_spec",
    "margaux_spec",
    "constant_cocycle",
    "multiloop_window",
    "verify_cocycle",
    "twisted_form_window",
    "build_window",
    "restrict_window",
    "mu_express",
    "mu_express_many",
    "mu_combine",
    "ev_point",
    "eval_kernel_window",
    "psi_ideal_window",
    "j_map_window",
    "azumaya_window",
    "azumaya_relations",
    "azumaya_to_sl2",
    "derived_window",
    "check_defining_condition",
    "check_bracket_closure",
    "same_window_span",
]


class WindowTooSmall(Exception):
    """A window computation could not succeed inside the chosen box."""


# -- degree boxes --------------------------------------------------------


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    @classmethod
    def cube(cls, num_vars, radius):
        return cls((-radius,) * num_vars, (radius,) * num_vars)

    @cached_property
    def degrees(self):
        return tuple(itertools.product(*[range(a, b + 1) for a, b in zip(self.lo, self.hi)]))

    @cached_property
    def _index(self):
        return {e: i for i, e in enumerate(self.degrees)}

    def index(self, e):
        return self._index.get(e)

    def __contains__(self, e):
        return all(a <= x <= b for a, x, b in zip(self.lo, e, self.hi))

    @property
    def num_vars(self):
        return len(self.lo)

    @property
    def radius(self):
        if all(-a == b for a, b in zip(self.lo, self.hi)) and len(set(self.hi)) <= 1:
            return self.hi[0] if self.hi else 0
        return None

    def shifted_hi(self, i, amount):
        hi = list(self.hi)
        hi[i] -= amount
        return Box(self.lo, tuple(hi))

    def is_empty(self):
        return any(a > b for a, b in zip(self.lo, self.hi))


# -- elements of g(S) ----------------------------------------------------


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


class CurrentElem:
    """sum_e x_e (x) t^e with x_e coordinate vectors in g."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        self.dim = dim
        clean = {}
        for e, v in (terms or {}).items():
            v = tuple(CycNum.coerce(x) for x in v)
            if len(v) != dim:
                raise ValueError("coordinate vector has wrong length")
            e = tuple(e)
            if e in clean:
                v = _vadd(clean[e], v)
            if any(v):
                clean[e] = v
            else:
                clean.pop(e, None)
        self.terms = clean

    @classmethod
    def _raw(cls, dim, terms):
        obj = object.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        return obj

    @classmethod
    def homogeneous(cls, vec, degree):
        return cls(len(vec), {tuple(degree): vec})

    def __bool__(self):
        return bool(self.terms)

    def support(self):
        return sorted(self.terms)

    def _combine(self, other, sign):
        out = dict(self.terms)
        for e, v in other.terms.items():
            if e in out:
                w = tuple(x + sign * y for x, y in zip(out[e], v))
                if any(w):
                    out[e] = w
                else:
                    del out[e]
            else:
                out[e] = v if sign == 1 else tuple(-x for x in v)
        return CurrentElem._raw(self.dim, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return CurrentElem._raw(self.dim, {e: tuple(-x for x in v) for e, v in self.terms.items()})

    def scale(self, c):
        c = CycNum.coerce(c)
        if not c:
            return CurrentElem._raw(self.dim, {})
        return CurrentElem._raw(self.dim, {e: tuple(c * x for x in v) for e, v in self.terms.items()})

    def times_poly(self, s):
        out = CurrentElem._raw(self.dim, {})
        for f, c in s.terms.items():
            shifted = {tuple(a + b for a, b in zip(e, f)): tuple(c * x for x in v) for e, v in self.terms.items()}
            out = out + CurrentElem._raw(self.dim, shifted)
        return out

    def shift(self, f):
        return CurrentElem._raw(self.dim, {tuple(a + b for a, b in zip(e, f)): v for e, v in self.terms.items()})

    def mul(self, alg, other):
        """Termwise product (x t^a)(y t^b) = xy t^(a+b)."""
        out = {}
        for e1, v1 in self.terms.items():
            for e2, v2 in other.terms.items():
                p = alg.mul(v1, v2)
                if any(p):
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = _vadd(out[e], p) if e in out else p
        return CurrentElem(self.dim, out)

    def commutator(self, alg, other):
        if alg.is_lie:
            return self.mul(alg, other)
        return self.mul(alg, other) - other.mul(alg, self)

    def galois(self, spec, g):
        out = {}
        for e, v in self.terms.items():
            c = spec.character(g, e)
            out[e] = v if c == ONE else tuple(c * x for x in v)
        return CurrentElem._raw(self.dim, out)

    def apply(self, matrix):
        """Apply an S-linear map given by a d x d matrix of LaurentPoly."""
        out = {}
        d = self.dim
        for e, v in self.terms.items():
            for i, x in enumerate(v):
                if not x:
                    continue
                for k in range(d):
                    entry = matrix[k][i]
                    for f, c in entry.terms.items():
                        deg = tuple(a + b for a, b in zip(e, f))
                        vec = out.setdefault(deg, [ZERO] * d)
                        vec[k] = vec[k] + c * x
        return CurrentElem(d, {e: tuple(v) for e, v in out.items()})

    def evaluate(self, point):
        acc = [ZERO] * self.dim
        for e, v in self.terms.items():
            m = ONE
            for a, k in zip(point.coords, e):
                if k:
                    m = m * a ** k
            for i, x in enumerate(v):
                if x:
                    acc[i] = acc[i] + m * x
        return tuple(acc)

    def coefficient_polys(self):
        """The polynomials s_k with self = sum_k x_k (x) s_k."""
        n = len(next(iter(self.terms))) if self.terms else 0
        polys = []
        for k in range(self.dim):
            terms = {e: v[k] for e, v in self.terms.items() if v[k]}
            polys.append(LaurentPoly._raw(n, terms))
        return polys

    def sparse(self, box):
        """Coordinates as {column: value}; None if support leaves the box."""
        out = {}
        d = self.dim
        for e, v in self.terms.items():
            p = box.index(e)
            if p is None:
                return None
            for k, x in enumerate(v):
                if x:
                    out[p * d + k] = x
        return out

    @classmethod
    def from_sparse(cls, dim, box, row):
        terms = {}
        for col, x in row.items():
            p, k = divmod(col, dim)
            e = box.degrees[p]
            vec = terms.setdefault(e, [ZERO] * dim)
            vec[k] = x
        return cls._raw(dim, {e: tuple(v) for e, v in terms.items()})

    def inside(self, box):
        return all(e in box for e in self.terms)

    def __eq__(self, other):
        return isinstance(other, CurrentElem) and self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def __repr__(self):
        parts = [f"[{', '.join(str(x) for x in v)}]t^{e}" for e, v in sorted(self.terms.items())]
        return "CurrentElem(" + (" + ".join(parts) or "0") + ")"


def _canonical(elems, box, dim):
    rows = []
    for z in elems:
        r = z.sparse(box)
        if r is None:
            raise ValueError("element leaves the window box")
        if r:
            rows.append(r)
    prows, _, _ = rref_sparse(rows, len(box.degrees) * dim)
    return tuple(CurrentElem.from_sparse(dim, box, r) for r in prows)


# -- Laurent matrices and cocycles --------------------------------------


def _lmat_identity(d, n):
    return tuple(
        tuple(LaurentPoly.constant(n, ONE) if i == j else LaurentPoly(n) for j in range(d)) for i in range(d)
    )


def _lmat_mul(A, B):
    d = len(A)
    n = A[0][0].num_vars
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = LaurentPoly(n)
            for k in range(d):
                if A[i][k] and B[k][j]:
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _lmat_galois(spec, g, A):
    return tuple(tuple(galois_act_poly(spec, g, x) for x in row) for row in A)


def _lmat_eval(A, point):
    return CycMatrix([[eval_poly(x, point) for x in row] for row in A])


def _lmat_from_const(m, n):
    return tuple(tuple(LaurentPoly.constant(n, x) for x in row) for row in m.rows)


def _lmat_format(A):
    return [[str(x) for x in row] for row in A]


@dataclass(frozen=True)
class Cocycle:
    """u: Gamma -> Aut_S(g(S)); ``images[g]`` is a d x d matrix of LaurentPoly
    whose column i is u_g(x_i (x) 1)."""

    images: dict = field(compare=False)

    def matrix(self, g):
        return self.images[g]

    def at(self, g, point):
        """The automorphism u_g(M) of g for M the maximal ideal of ``point``."""
        return _lmat_eval(self.images[g], point)

    def column(self, g, i):
        A = self.images[g]
        d = len(A)
        terms = {}
        for k in range(d):
            for f, c in A[k][i].terms.items():
                vec = terms.setdefault(f, [ZERO] * d)
                vec[k] = c
        return CurrentElem(d, {e: tuple(v) for e, v in terms.items()})


def constant_cocycle(spec, autos):
    """u_g = sigma_1^{-r_1} ... sigma_N^{-r_N} (x) 1."""
    n = spec.num_vars
    images = {}
    for g in spec.elements():
        m = None
        for a, r in zip(autos, g.exponents):
            p = a.matrix ** ((-r) % a.order)
            m = p if m is None else m @ p
        if m is None:
            raise ValueError("need at least one variable")
        images[g] = _lmat_from_const(m, n)
    return Cocycle(images)


def verify_cocycle(spec, alg, u):
    """Check u_1 = id, each u_g is multiplicative and invertible, and
    u_{g+h} = u_g o g(u_h).  Returns ``(ok, report)``; the report names the
    first violation."""
    d, n = alg.dim, spec.num_vars
    elems = spec.elements()
    for g in elems:
        if g not in u.images:
            return False, {"check": "defined", "gamma": list(g.exponents)}
        A = u.images[g]
        if len(A) != d or any(len(r) != d for r in A):
            return False, {"check": "shape", "gamma": list(g.exponents)}
    ident = _lmat_identity(d, n)
    if u.images[spec.identity()] != ident:
        return False, {"check": "identity", "gamma": list(spec.identity().exponents)}
    for g in elems:
        cols = [u.column(g, i) for i in range(d)]
        for i in range(d):
            for j in range(d):
                lhs = CurrentElem(d, {})
                for k, c in enumerate(alg.table[i][j]):
                    if c:
                        lhs = lhs + cols[k].scale(c)
                rhs = cols[i].mul(alg, cols[j])
                if lhs != rhs:
                    return False, {
                        "check": "multiplicative",
                        "gamma": list(g.exponents),
                        "pair": [alg.basis_names[i], alg.basis_names[j]],
                    }
        inv = _lmat_galois(spec, g, u.images[spec.neg(g)])
        if _lmat_mul(u.images[g], inv) != ident:
            return False, {"check": "invertible", "gamma": list(g.exponents)}
    for g in elems:
        for h in elems:
            lhs = u.images[spec.add(g, h)]
            rhs = _lmat_mul(u.images[g], _lmat_galois(spec, g, u.images[h]))
            if lhs != rhs:
                return False, {"check": "cocycle", "gamma": list(g.exponents), "delta": list(h.exponents)}
    return True, {"check": "ok"}


# -- form specifications -------------------------------------------------


@dataclass(frozen=True)
class FormSpec:
    algebra: StructureAlgebra
    extension: ExtensionSpec
    kind: str
    autos: tuple = ()
    cocycle: Cocycle | None = None

    def twisting(self):
        """The cocycle defining this form (induced for multiloop algebras)."""
        if self.cocycle is not None:
            return self.cocycle
        if self.kind == "multiloop":
            return constant_cocycle(self.extension, self.autos)
        raise ValueError(f"{self.kind} form carries no computable cocycle")

    @property
    def has_window(self):
        return self.kind in ("multiloop", "cocycle", "azumaya12")


def multiloop_spec(alg, autos, extension=None):
    autos = tuple(autos)
    if extension is None:
        extension = standard_extension([a.order for a in autos])
    if tuple(a.order for a in autos) != extension.orders:
        raise ValueError(
            f"automorphism orders {[a.order for a in autos]} do not match extension orders {list(extension.orders)}"
        )
    for a, b in itertools.combinations(autos, 2):
        if a.matrix @ b.matrix != b.matrix @ a.matrix:
            raise ValueError("automorphisms do not commute")
    return FormSpec(alg, extension, "multiloop", autos=autos)


def cocycle_spec(alg, extension, cocycle, check=True):
    if check:
        ok, report = verify_cocycle(extension, alg, cocycle)
        if not ok:
            raise ValueError(f"not a cocycle: {report}")
    return FormSpec(alg, extension, "cocycle", cocycle=cocycle)


_AZ_D = CycMatrix([[1, 0], [0, -1]])
_AZ_X = CycMatrix([[0, 1], [1, 0]])


def azumaya_spec():
    """A(1,2) inside M_2(k) (x) S, T_1 = diag(1,-1) t_1, T_2 = [[0,1],[1,0]] t_2."""
    m2 = make_matrix_algebra(2)
    ext = ExtensionSpec(2, (2, 2), (-1, -1))
    ad_x = conjugation_auto(m2, _AZ_X)
    ad_d = conjugation_auto(m2, _AZ_D)
    # g(T_1) = -T_1 must be undone by u_{(1,0)}, which therefore negates D: Ad X
    return FormSpec(m2, ext, "azumaya12", cocycle=constant_cocycle(ext, (ad_x, ad_d)))


def margaux_spec():
    """Label-level stand-in for a non-multiloop form of sl_2(R) over the (2,2)
    extension.  No window can be built; only module classification applies."""
    return FormSpec(make_sl(2), ExtensionSpec(2, (2, 2), (-1, -1)), "margaux")


# -- windows -------------------------------------------------------------


@dataclass(frozen=True)
class FormWindow:
    spec: FormSpec
    box: Box
    basis: tuple

    @property
    def radius(self):
        return self.box.radius

    @property
    def algebra(self):
        return self.spec.algebra

    def __len__(self):
        return len(self.basis)

    def vectors(self):
        return [z.sparse(self.box) for z in self.basis]

    def degree_dims(self):
        """dim of L cap (g (x) t^e) for each degree of the box."""
        out = {}
        homogeneous = all(len(z.terms) == 1 for z in self.basis)
        if homogeneous:
            for e in self.box.degrees:
                out[e] = 0
            for z in self.basis:
                (e,) = z.terms
                out[e] += 1
            return out
        for e in self.box.degrees:
            out[e] = len(restrict_window(self, Box(e, e)).basis)
        return out

    def in_span(self, z):
        if not z.inside(self.box):
            return False
        d = self.algebra.dim
        rows = [r for r in self.vectors() if r]
        base = len(rref_sparse(rows, len(self.box.degrees) * d)[1])
        extra = z.sparse(self.box)
        return len(rref_sparse(rows + [extra], len(self.box.degrees) * d)[1]) == base


def same_window_span(a, b):
    if a.box != b.box:
        raise ValueError("windows over different boxes")
    d = a.algebra.dim
    return _canonical(a.basis, a.box, d) == _canonical(b.basis, b.box, d)


def _as_box(num_vars, window):
    if isinstance(window, Box):
        return window
    return Box.cube(num_vars, int(window))


def multiloop_window(alg, autos, spec, window):
    """Basis {x (x) t^e : x in g_(e mod m), e in the box}."""
    autos = list(autos)
    if tuple(a.order for a in autos) != spec.orders:
        raise ValueError("automorphism orders do not match the extension")
    box = _as_box(spec.num_vars, window)
    grading = graded_pieces(alg, autos, spec.roots)
    basis = []
    for e in box.degrees:
        for v in grading.piece(e):
            basis.append(CurrentElem._raw(alg.dim, {e: v}))
    return FormWindow(multiloop_spec(alg, autos, spec), box, tuple(basis))


def twisted_form_window(form, window):
    """Solve u_g(g z) = z for all g over z supported in the box."""
    alg, ext = form.algebra, form.extension
    u = form.twisting()
    box = _as_box(ext.num_vars, window)
    d = alg.dim
    ncols = len(box.degrees) * d
    rows = {}
    for g in ext.elements():
        if not any(g.exponents):
            continue
        U = u.images[g]
        nz = [(k, i, U[k][i]) for k in range(d) for i in range(d) if U[k][i]]
        for p, e in enumerate(box.degrees):
            chi = ext.character(g, e)
            for k, i, entry in nz:
                for f, c in entry.terms.items():
                    key = (g.exponents, tuple(a + b for a, b in zip(e, f)), k)
                    row = rows.setdefault(key, {})
                    col = p * d + i
                    row[col] = row.get(col, ZERO) + c * chi
            for k in range(d):
                key = (g.exponents, e, k)
                row = rows.setdefault(key, {})
                col = p * d + k
                row[col] = row.get(col, ZERO) - ONE
    sparse_rows = [{c: v for c, v in r.items() if v} for _, r in sorted(rows.items())]
    prows, pcols, _ = rref_sparse(sparse_rows, ncols)
    null = _nullspace_from(prows, pcols, ncols)
    null_rows = [{j: x for j, x in enumerate(v) if x} for v in null]
    canon, _, _ = rref_sparse(null_rows, ncols)
    basis = tuple(CurrentElem.from_sparse(d, box, r) for r in canon)
    return FormWindow(form, box, basis)


def azumaya_window(spec, window):
    """A(1,2) cap box: M_c (x) t^e with M_c in {1, T1, T2, T1T2} by the class c = e mod 2."""
    if spec.num_vars != 2 or spec.orders != (2, 2):
        raise ValueError("the Azumaya algebra A(1,2) needs the (2,2) extension in two variables")
    form = azumaya_spec()
    if spec.roots != form.extension.roots:
        raise ValueError("the Azumaya algebra A(1,2) needs xi = (-1, -1)")
    m2 = form.algebra
    box = _as_box(2, window)
    mats = {(0, 0): CycMatrix.identity(2), (1, 0): _AZ_D, (0, 1): _AZ_X, (1, 1): _AZ_D @ _AZ_X}
    coords = dict(zip(mats, m2.coords_of_matrices(list(mats.values()))))
    basis = [CurrentElem._raw(4, {e: coords[(e[0] % 2, e[1] % 2)]}) for e in box.degrees]
    return FormWindow(form, box, _canonical(basis, box, 4))


def azumaya_generators():
    form = azumaya_spec()
    m2 = form.algebra
    d_c, x_c, one = m2.coords_of_matrices([_AZ_D, _AZ_X, CycMatrix.identity(2)])
    return (
        CurrentElem._raw(4, {(1, 0): d_c}),
        CurrentElem._raw(4, {(0, 1): x_c}),
        CurrentElem._raw(4, {(0, 0): one}),
    )


def azumaya_relations():
    """Exact checks of T2 T1 = -T1 T2 and T_i^2 = t_i^2."""
    m2 = make_matrix_algebra(2)
    t1, t2, one = azumaya_generators()
    return {
        "T2T1+T1T2=0": not (t2.mul(m2, t1) + t1.mul(m2, t2)),
        "T1^2=t1^2": t1.mul(m2, t1) == one.shift((2, 0)),
        "T2^2=t2^2": t2.mul(m2, t2) == one.shift((0, 2)),
    }


_IDENT_P = CycMatrix([[1, 1], [1, -1]])


def azumaya_to_sl2(z):
    """Identify a traceless element of M_2 (x) S with sl_2 (x) S.

    Conjugation by [[1,1],[1,-1]] swaps diag(1,-1) and [[0,1],[1,0]], carrying
    (Lie A)' onto L(sl_2, Ad diag(1,-1), Ad [[0,1],[1,0]]) exactly.
    """
    m2 = make_matrix_algebra(2)
    sl2 = make_sl(2)
    P, Pinv = _IDENT_P, _IDENT_P.inverse()
    out = {}
    for e, v in z.terms.items():
        mat = P @ m2.matrix_of(v) @ Pinv
        if mat[0, 0] + mat[1, 1]:
            raise ValueError("element is not traceless")
        out[e] = sl2.coords_of_matrices([mat])[0]
    return CurrentElem(3, out)


def derived_window(window, algebra=None, spec=None):
    """Span of the commutators of basis pairs whose product stays in the box."""
    alg = window.algebra
    box = window.box
    comms = []
    basis = window.basis
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            a, b = basis[i], basis[j]
            degs = {tuple(x + y for x, y in zip(e1, e2)) for e1 in a.terms for e2 in b.terms}
            if not all(e in box for e in degs):
                continue
            c = a.commutator(alg, b)
            if c:
                comms.append(c)
    return FormWindow(window.spec if spec is None else spec, box, _canonical(comms, box, alg.dim))


def build_window(form, window):
    if form.kind == "multiloop":
        return multiloop_window(form.algebra, form.autos, form.extension, window)
    if form.kind == "cocycle":
        return twisted_form_window(form, window)
    if form.kind == "azumaya12":
        return azumaya_window(form.extension, window)
    raise ValueError(f"no window construction for {form.kind} forms")


def restrict_window(window, box):
    """Elements of the window span supported in ``box`` (a sub-box)."""
    d = window.algebra.dim
    outside = {}
    for j, z in enumerate(window.basis):
        for e, v in z.terms.items():
            if e in box:
                continue
            for k, x in enumerate(v):
                if x:
                    outside.setdefault((e, k), {})[j] = x
    n = len(window.basis)
    prows, pcols, _ = rref_sparse([outside[key] for key in sorted(outside)], n)
    combos = _nullspace_from(prows, pcols, n)
    elems = []
    for c in combos:
        acc = CurrentElem._raw(d, {})
        for j, x in enumerate(c):
            if x:
                acc = acc + window.basis[j].scale(x)
        elems.append(acc)
    if box.is_empty():
        return FormWindow(window.spec, box, ())
    return FormWindow(window.spec, box, _canonical(elems, box, d))


# -- checks of window invariants ------------------------------------------


def check_defining_condition(window):
    """Every basis element satisfies u_g(g z) = z for all g."""
    ext = window.spec.extension
    u = window.spec.twisting()
    for z in window.basis:
        for g in ext.elements():
            if z.galois(ext, g).apply(u.images[g]) != z:
                return False
    return True


def check_bracket_closure(window):
    """Products of basis pairs that stay in the box lie in the window span.
    Returns ``(ok, checked, skipped)``."""
    alg, box = window.algebra, window.box
    d = alg.dim
    rows = [r for r in window.vectors() if r]
    ncols = len(box.degrees) * d
    prows, pcols, _ = rref_sparse(rows, ncols)
    base = len(pcols)
    checked = skipped = 0
    for a, b in itertools.combinations_with_replacement(window.basis, 2):
        p = a.commutator(alg, b) if not alg.is_lie else a.mul(alg, b)
        if not p:
            checked += 1
            continue
        if not p.inside(box):
            skipped += 1
            continue
        checked += 1
        if len(rref_sparse(prows + [p.sparse(box)], ncols)[1]) != base:
            return False, checked, skipped
    return True, checked, skipped


# -- the multiplication map -----------------------------------------------


def _multiplier_degrees(ext, radius):
    if radius is None:
        ranges = [range(-(m - 1), m) for m in ext.orders]
    else:
        ranges = [range(-radius, radius + 1)] * ext.num_vars
    degs = list(itertools.product(*ranges))
    degs.sort(key=lambda f: (sum(abs(x) for x in f), f))
    return degs


def mu_express_many(window, targets, multiplier_radius=None):
    """Write each target as sum_i s_i b_i over the window basis b_i.

    Multipliers s_i are Laurent polynomials with exponents in
    [-(m_i-1), m_i-1] (or a given radius) such that every product s_i b_i
    stays inside the window box.  Returns one entry per target: a list of
    ``(basis index, LaurentPoly)`` or ``None`` when the window is too small.
    """
    ext, box = window.spec.extension, window.box
    d = window.algebra.dim
    unknowns = []
    cols = []
    for f in _multiplier_degrees(ext, multiplier_radius):
        for i, b in enumerate(window.basis):
            shifted = b.shift(f)
            if shifted.inside(box):
                unknowns.append((i, f))
                cols.append(shifted.sparse(box))
    nrows = len(box.degrees) * d
    A_rows = [dict() for _ in range(nrows)]
    for j, col in enumerate(cols):
        for r, x in col.items():
            A_rows[r][j] = x
    results = [None] * len(targets)
    rhs = []
    for t_idx, t in enumerate(targets):
        s = t.sparse(box)
        rhs.append(s)
    n = len(unknowns)
    for r in range(nrows):
        for t_idx, s in enumerate(rhs):
            if s is not None and r in s:
                A_rows[r][n + t_idx] = s[r]
    prows, pcols, leftover = rref_sparse(A_rows, n, extra=len(targets))
    bad = {c - n for row in leftover for c in row}
    for t_idx, s in enumerate(rhs):
        if s is None or t_idx in bad:
            continue
        coeffs = {}
        for c, row in zip(pcols, prows):
            x = row.get(n + t_idx)
            if x:
                i, f = unknowns[c]
                coeffs.setdefault(i, {})[f] = x
        results[t_idx] = [(i, LaurentPoly(ext.num_vars, coeffs[i])) for i in sorted(coeffs)]
    return results


def mu_express(window, target, multiplier_radius=None):
    return mu_express_many(window, [target], multiplier_radius)[0]


def mu_combine(window, expression):
    acc = CurrentElem._raw(window.algebra.dim, {})
    for i, s in expression:
        acc = acc + window.basis[i].times_poly(s)
    return acc


# -- evaluation and ideals ------------------------------------------------


def ev_point(z, point):
    """ev_a: g (x) S -> g, t_i -> a_i."""
    return z.evaluate(point)


@dataclass(frozen=True)
class WindowIdeal:
    window: FormWindow
    basis: tuple
    flagged: int = 0

    @property
    def dim(self):
        return len(self.basis)

    @property
    def codim(self):
        return len(self.window.basis) - len(self.basis)

    def same_span(self, other):
        d = self.window.algebra.dim
        box = self.window.box
        return _canonical(self.basis, box, d) == _canonical(other.basis, box, d)

    def contains(self, other):
        d = self.window.algebra.dim
        box = self.window.box
        ncols = len(box.degrees) * d
        rows = [z.sparse(box) for z in self.basis]
        base = len(rref_sparse(rows, ncols)[1])
        return len(rref_sparse(rows + [z.sparse(box) for z in other.basis], ncols)[1]) == base


def eval_kernel_window(window, points):
    """{z in window span : ev_b(z) = 0 for every b in ``points``}."""
    d = window.algebra.dim
    n = len(window.basis)
    rows = []
    values = [[z.evaluate(p) for p in points] for z in window.basis]
    for pi in range(len(points)):
        for k in range(d):
            row = {j: values[j][pi][k] for j in range(n) if values[j][pi][k]}
            if row:
                rows.append(row)
    prows, pcols, _ = rref_sparse(rows, n)
    combos = _nullspace_from(prows, pcols, n)
    elems = []
    for c in combos:
        acc = CurrentElem._raw(d, {})
        for j, x in enumerate(c):
            if x:
                acc = acc + window.basis[j].scale(x)
        elems.append(acc)
    return WindowIdeal(window, _canonical(elems, window.box, d))


def psi_ideal_window(window, key):
    """(I L) cap window for I the maximal ideal of R at ``key``.

    I is generated by t_i^{m_i} - key_i; the window part of I L is spanned by
    the products of these generators with elements of L whose product stays
    in the box.
    """
    ext = window.spec.extension
    d = window.algebra.dim
    key = tuple(CycNum.coerce(c) for c in key)
    gens = []
    for i, (m, c) in enumerate(zip(ext.orders, key)):
        gens.append((i, m, LaurentPoly.var(ext.num_vars, i, m) - c))
    elems = []
    for i, m, gen in gens:
        sub_box = window.box.shifted_hi(i, m)
        if sub_box.is_empty():
            continue
        sub = restrict_window(window, sub_box)
        elems.extend(z.times_poly(gen) for z in sub.basis)
    return WindowIdeal(window, _canonical(elems, window.box, d))


def j_map_window(ideal):
    """The coefficient polynomials E_beta of the ideal's elements, deduplicated."""
    seen = set()
    out = []
    for z in ideal.basis:
        for s in z.coefficient_polys():
            if s and s not in seen:
                seen.add(s)
                out.append(s)
    out.sort(key=LaurentPoly.sort_key)
    return out
