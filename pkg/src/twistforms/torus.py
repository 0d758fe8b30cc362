"""The Kummer extension S = k[t^{+-1}] over R = k[t^{+-m}] and its torus points.

Maximal ideals of S are points of the torus with cyclotomic coordinates;
ideals of S that appear downstream are radical ideals of finite point sets,
so membership is decided by evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

from .algebra import is_primitive_root
from .cyclo import ONE, ZERO, CycNum, zeta

__all__ = [
    "LaurentPoly",
    "ExtensionSpec",
    "GaloisElement",
    "TorusPoint",
    "galois_act_poly",
    "galois_act_point",
    "eval_poly",
    "fiber",
    "fiber_key",
    "in_R",
    "member_MS",
    "vanishing_locus",
    "galois_trace",
    "standard_extension",
]


class LaurentPoly:
    """Finitely supported map Z^N -> CycNum; zero coefficients are never stored."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars, terms=None):
        self.num_vars = num_vars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != num_vars:
                raise ValueError(f"exponent {e} has wrong length for {num_vars} variables")
            c = CycNum.coerce(c)
            if c:
                clean[e] = clean[e] + c if e in clean else c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    @classmethod
    def _raw(cls, num_vars, terms):
        obj = object.__new__(cls)
        obj.num_vars = num_vars
        obj.terms = terms
        return obj

    @classmethod
    def monomial(cls, exp, coeff=ONE):
        return cls(len(exp), {tuple(exp): coeff})

    @classmethod
    def constant(cls, num_vars, c):
        return cls(num_vars, {(0,) * num_vars: c})

    @classmethod
    def var(cls, num_vars, i, power=1):
        e = [0] * num_vars
        e[i] = power
        return cls(num_vars, {tuple(e): ONE})

    def __bool__(self):
        return bool(self.terms)

    def support(self):
        return sorted(self.terms)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, ZERO) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return LaurentPoly._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, ZERO) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return LaurentPoly._raw(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials are invertible")
            (e, c), = self.terms.items()
            return LaurentPoly._raw(self.num_vars, {tuple(x * k for x in e): c ** k})
        return reduce(lambda a, b: a * b, [self] * k, LaurentPoly.constant(self.num_vars, ONE))

    def _lift(self, other):
        if isinstance(other, LaurentPoly):
            if other.num_vars != self.num_vars:
                raise ValueError("variable count mismatch")
            return other
        return LaurentPoly.constant(self.num_vars, CycNum.coerce(other))

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            try:
                other = self._lift(other)
            except TypeError:
                return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def is_monomial_unit(self):
        return len(self.terms) == 1

    def constant_term(self):
        return self.terms.get((0,) * self.num_vars, ZERO)

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def sort_key(self):
        return tuple((e, c.sort_key()) for e, c in sorted(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "LaurentPoly(0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"t{i + 1}^{x}" for i, x in enumerate(e) if x)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return "LaurentPoly(" + " + ".join(parts) + ")"


@dataclass(frozen=True)
class ExtensionSpec:
    """S = k[t_i^{+-1}] over R = k[t_i^{+-m_i}] with chosen primitive roots xi_i."""

    num_vars: int
    orders: tuple
    roots: tuple

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        object.__setattr__(self, "roots", tuple(CycNum.coerce(r) for r in self.roots))
        if len(self.orders) != self.num_vars or len(self.roots) != self.num_vars:
            raise ValueError("orders and roots must have one entry per variable")
        for m, xi in zip(self.orders, self.roots):
            if m < 1:
                raise ValueError("orders must be positive")
            if not is_primitive_root(xi, m):
                raise ValueError(f"{xi} is not a primitive {m}-th root of unity")

    def group_order(self):
        out = 1
        for m in self.orders:
            out *= m
        return out

    def elements(self):
        """All of Gamma in lexicographic order, identity first."""
        return [GaloisElement(r) for r in itertools.product(*[range(m) for m in self.orders])]

    def identity(self):
        return GaloisElement((0,) * self.num_vars)

    def generators(self):
        out = []
        for i in range(self.num_vars):
            r = [0] * self.num_vars
            r[i] = 1 % self.orders[i]
            out.append(GaloisElement(tuple(r)))
        return out

    def add(self, g, h):
        return GaloisElement(tuple((a + b) % m for a, b, m in zip(g.exponents, h.exponents, self.orders)))

    def neg(self, g):
        return GaloisElement(tuple((-a) % m for a, m in zip(g.exponents, self.orders)))

    def character(self, g, exp):
        """prod xi_i^(r_i e_i): the scalar by which g multiplies t^exp."""
        acc = ONE
        for xi, r, e, m in zip(self.roots, g.exponents, exp, self.orders):
            k = (r * e) % m
            if k:
                acc = acc * xi ** k
        return acc


def standard_extension(orders):
    """Extension with xi_i = zeta_{m_i}."""
    orders = tuple(orders)
    return ExtensionSpec(len(orders), orders, tuple(zeta(m) for m in orders))


@dataclass(frozen=True, order=True)
class GaloisElement:
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(x) for x in self.exponents))


class TorusPoint:
    """A point of (k^x)^N, i.e. the maximal ideal (t_1 - a_1, ..., t_N - a_N)."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(CycNum.coerce(c) for c in coords)
        if any(not c for c in coords):
            raise ValueError("torus points have nonzero coordinates")
        self.coords = coords

    def __eq__(self, other):
        return isinstance(other, TorusPoint) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def sort_key(self):
        return tuple(c.sort_key() for c in self.coords)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        return "TorusPoint(" + ", ".join(str(c) for c in self.coords) + ")"


def galois_act_poly(spec, g, s):
    if s.num_vars != spec.num_vars:
        raise ValueError("variable count mismatch")
    out = {}
    for e, c in s.terms.items():
        out[e] = c * spec.character(g, e)
    return LaurentPoly._raw(s.num_vars, out)


def galois_act_point(spec, g, a):
    """g . a = (xi_i^{-r_i} a_i), so that g moves the ideal M_a to M_{g.a}."""
    coords = []
    for xi, r, m, c in zip(spec.roots, g.exponents, spec.orders, a.coords):
        k = (-r) % m
        coords.append(c * xi ** k if k else c)
    return TorusPoint(coords)


def eval_poly(s, a):
    acc = ZERO
    coords = a.coords
    for e, c in s.terms.items():
        term = c
        for x, k in zip(coords, e):
            if k:
                term = term * x ** k
        acc = acc + term
    return acc


def fiber(spec, a):
    """The Gamma-orbit of ``a``, sorted canonically."""
    pts = {galois_act_point(spec, g, a) for g in spec.elements()}
    return sorted(pts, key=TorusPoint.sort_key)


def fiber_key(spec, a):
    """(a_1^{m_1}, ..., a_N^{m_N}): the point of Max(R) under ``a``."""
    return tuple(c ** m for c, m in zip(a.coords, spec.orders))


def in_R(spec, s):
    return all(all(e % m == 0 for e, m in zip(exp, spec.orders)) for exp in s.terms)


def member_MS(spec, s, a):
    """Is s in (M cap R) S, i.e. does s vanish on the whole fiber of a?"""
    return all(not eval_poly(s, b) for b in fiber(spec, a))


def vanishing_locus(polys, points):
    """Points at which every polynomial in ``polys`` vanishes."""
    polys = list(polys)
    return [p for p in points if all(not eval_poly(s, p) for s in polys)]


def galois_trace(spec, s):
    """sum over Gamma of g(s); always lies in R."""
    acc = LaurentPoly(spec.num_vars)
    for g in spec.elements():
        acc = acc + galois_act_poly(spec, g, s)
    return acc
