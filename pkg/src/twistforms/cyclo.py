"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Elements are stored in the power basis 1, z, ..., z^(phi(n)-1) modulo the
n-th cyclotomic polynomial, with arbitrary precision rational coefficients.
Mixed conductors are embedded into the lcm conductor before any operation.
"""

from __future__ import annotations

import math
import os
import re
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

__all__ = [
    "CycNum",
    "CycZeroDivisionError",
    "ConductorLimitError",
    "LiteralError",
    "cyc_normalize",
    "cyc_arith",
    "cyc_total_order",
    "zeta",
    "parse_cyc",
    "format_cyc",
    "set_max_conductor",
]


class CycZeroDivisionError(ZeroDivisionError):
    """Inversion of the zero element."""


class ConductorLimitError(ArithmeticError):
    """An operation needed a conductor above the configured cap."""


class LiteralError(ValueError):
    """Malformed cyclotomic literal."""


try:
    _max_conductor = int(os.environ.get("GC_MAX_CONDUCTOR", "0") or 0)
except ValueError:
    _max_conductor = 0


def set_max_conductor(cap):
    """Cap conductor growth; 0 or None disables the cap."""
    global _max_conductor
    _max_conductor = int(cap or 0)


def _check_conductor(n):
    if _max_conductor and n > _max_conductor:
        raise ConductorLimitError(f"conductor {n} exceeds cap {_max_conductor}")


def _poly_divmod_int(num, den):
    # exact division of integer polynomials (low-to-high coefficients), den monic
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        q[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return q, num[: len(den) - 1]


@lru_cache(maxsize=None)
def cyclotomic_poly(n):
    """Integer coefficients (low to high) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("conductor must be positive")
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _poly_divmod_int(num, cyclotomic_poly(d))
            assert not any(rem)
    return tuple(num)


@lru_cache(maxsize=None)
def totient(n):
    return len(cyclotomic_poly(n)) - 1


@lru_cache(maxsize=None)
def _power_table(n):
    """Reduced coefficient vectors of z^k for 0 <= k < n."""
    phi = totient(n)
    cyc = cyclotomic_poly(n)
    table = []
    vec = [mpq(0)] * phi
    vec[0] = mpq(1)
    for _ in range(n):
        table.append(tuple(vec))
        # multiply by z: shift up, fold the overflow with z^phi = -sum cyc[i] z^i
        top = vec[-1]
        vec = [mpq(0)] + vec[:-1]
        if top:
            for i in range(phi):
                if cyc[i]:
                    vec[i] -= top * cyc[i]
    return tuple(table)


def _reduce(raw, n):
    phi = totient(n)
    if len(raw) <= phi:
        out = list(raw) + [mpq(0)] * (phi - len(raw))
        return tuple(out)
    table = _power_table(n)
    out = [mpq(0)] * phi
    for k, c in enumerate(raw):
        if c:
            row = table[k % n]
            for i in range(phi):
                if row[i]:
                    out[i] += c * row[i]
    return tuple(out)


def _as_mpq(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x).numerator, Fraction(x).denominator)
    return mpq(x)


@lru_cache(maxsize=None)
def _embed_indices(n, big):
    step = big // n
    table = _power_table(big)
    return tuple(table[(i * step) % big] for i in range(totient(n)))


def _embed(coeffs, n, big):
    if n == big:
        return coeffs
    _check_conductor(big)
    images = _embed_indices(n, big)
    out = [mpq(0)] * totient(big)
    for c, img in zip(coeffs, images):
        if c:
            for i, v in enumerate(img):
                if v:
                    out[i] += c * v
    return tuple(out)


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


@lru_cache(maxsize=None)
def _descent_data(n, d):
    """Left inverse of the embedding Q(zeta_d) -> Q(zeta_n) on chosen rows."""
    images = _embed_indices(d, n)  # phi(d) vectors of length phi(n)
    k = len(images)
    # columns = images; pick k independent rows by elimination on the transpose
    mat = [[images[j][i] for j in range(k)] for i in range(totient(n))]
    rows = []
    work = []
    for i, r in enumerate(mat):
        r = list(r)
        for piv_col, prow in work:
            if r[piv_col]:
                f = r[piv_col]
                r = [a - f * b for a, b in zip(r, prow)]
        nz = next((j for j, v in enumerate(r) if v), None)
        if nz is None:
            continue
        inv = 1 / r[nz]
        r = [v * inv for v in r]
        work.append((nz, r))
        rows.append(i)
        if len(rows) == k:
            break
    # invert the k x k submatrix
    sub = [list(mat[i]) + [mpq(1) if a == b else mpq(0) for b in range(k)] for a, i in enumerate(rows)]
    for col in range(k):
        piv = next(r for r in range(col, k) if sub[r][col])
        sub[col], sub[piv] = sub[piv], sub[col]
        inv = 1 / sub[col][col]
        sub[col] = [v * inv for v in sub[col]]
        for r in range(k):
            if r != col and sub[r][col]:
                f = sub[r][col]
                sub[r] = [a - f * b for a, b in zip(sub[r], sub[col])]
    left_inv = tuple(tuple(sub[r][k:]) for r in range(k))
    return tuple(rows), left_inv


class CycNum:
    """An element of Q(zeta_n); immutable.

    ``coeffs[i]`` is the coefficient of zeta_n**i.  Rational values are kept at
    conductor 1 so that the common case stays cheap.
    """

    __slots__ = ("n", "coeffs", "_minimal")

    def __init__(self, n, coeffs=None):
        if n < 1:
            raise ValueError("conductor must be positive")
        if coeffs is None:
            coeffs = ()
        coeffs = tuple(_as_mpq(c) for c in coeffs)
        coeffs = _reduce(coeffs, n)
        if n > 1 and not any(coeffs[1:]):
            n, coeffs = 1, coeffs[:1]
        self.n = n
        self.coeffs = coeffs
        self._minimal = None

    @classmethod
    def _raw(cls, n, coeffs):
        # trusted constructor: coeffs already reduced mpq tuple of length phi(n)
        obj = object.__new__(cls)
        if n > 1 and not any(coeffs[1:]):
            n, coeffs = 1, coeffs[:1]
        obj.n = n
        obj.coeffs = coeffs
        obj._minimal = None
        return obj

    @classmethod
    def rational(cls, q):
        return cls._raw(1, (_as_mpq(q),))

    @classmethod
    def coerce(cls, x):
        if isinstance(x, CycNum):
            return x
        if isinstance(x, (int, Fraction)) or type(x).__name__ == "mpq":
            return cls.rational(x)
        if isinstance(x, str):
            return parse_cyc(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to CycNum")

    # -- structure -------------------------------------------------------

    def is_rational(self):
        return self.n == 1

    def __bool__(self):
        return any(self.coeffs)

    def minimal(self):
        """(d, coeffs) with d the smallest conductor containing this element."""
        if self._minimal is None:
            self._minimal = self._compute_minimal()
        return self._minimal

    def _compute_minimal(self):
        n = self.n
        if n == 1:
            return 1, self.coeffs
        for d in _divisors(n):
            if d % 4 == 2:
                continue
            if d == n:
                return n, self.coeffs
            rows, left_inv = _descent_data(n, d)
            picked = [self.coeffs[i] for i in rows]
            sub = tuple(sum((a * b for a, b in zip(r, picked)), mpq(0)) for r in left_inv)
            if _embed(sub, d, n) == self.coeffs:
                return d, sub
        raise AssertionError("unreachable")

    def conductor(self):
        return self.minimal()[0]

    def embed(self, big):
        if big % self.n:
            raise ValueError(f"{big} is not a multiple of {self.n}")
        return _embed(self.coeffs, self.n, big)

    def galois(self, k):
        """Image under zeta_n -> zeta_n**k (k coprime to n)."""
        n = self.n
        table = _power_table(n)
        out = [mpq(0)] * totient(n)
        for i, c in enumerate(self.coeffs):
            if c:
                for j, v in enumerate(table[(i * k) % n]):
                    if v:
                        out[j] += c * v
        return CycNum._raw(n, tuple(out))

    # -- arithmetic ------------------------------------------------------

    def _common(self, other):
        if self.n == other.n:
            return self.n, self.coeffs, other.coeffs
        if other.n == 1:
            return self.n, self.coeffs, other.coeffs + (mpq(0),) * (len(self.coeffs) - 1)
        if self.n == 1:
            return other.n, self.coeffs + (mpq(0),) * (len(other.coeffs) - 1), other.coeffs
        big = self.n * other.n // math.gcd(self.n, other.n)
        return big, _embed(self.coeffs, self.n, big), _embed(other.coeffs, other.n, big)

    def __add__(self, other):
        if not isinstance(other, CycNum):
            try:
                other = CycNum.coerce(other)
            except TypeError:
                return NotImplemented
        n, a, b = self._common(other)
        return CycNum._raw(n, tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return CycNum._raw(self.n, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        if not isinstance(other, CycNum):
            try:
                other = CycNum.coerce(other)
            except TypeError:
                return NotImplemented
        n, a, b = self._common(other)
        return CycNum._raw(n, tuple(x - y for x, y in zip(a, b)))

    def __rsub__(self, other):
        return CycNum.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, CycNum):
            try:
                other = CycNum.coerce(other)
            except TypeError:
                return NotImplemented
        if other.n == 1:
            c = other.coeffs[0]
            return CycNum._raw(self.n, tuple(x * c for x in self.coeffs))
        if self.n == 1:
            c = self.coeffs[0]
            return CycNum._raw(other.n, tuple(x * c for x in other.coeffs))
        n, a, b = self._common(other)
        raw = [mpq(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        raw[i + j] += x * y
        return CycNum._raw(n, _reduce(raw, n))

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise CycZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.n == 1:
            return CycNum._raw(1, (1 / self.coeffs[0],))
        # solve (multiplication by self) v = 1 over Q
        n = self.n
        phi = len(self.coeffs)
        basis = _power_table(n)[:phi]
        cols = [(self * CycNum._raw(n, basis[j])).embed(n) for j in range(phi)]
        aug = [[cols[j][i] for j in range(phi)] + [mpq(1) if i == 0 else mpq(0)] for i in range(phi)]
        for col in range(phi):
            piv = next(r for r in range(col, phi) if aug[r][col])
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [v * inv for v in aug[col]]
            for r in range(phi):
                if r != col and aug[r][col]:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        return CycNum._raw(n, tuple(aug[i][phi] for i in range(phi)))

    def __truediv__(self, other):
        other = CycNum.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return CycNum.coerce(other) * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        base = self
        if k < 0:
            base, k = self.inverse(), -k
        acc = ONE
        while k:
            if k & 1:
                acc = acc * base
            k >>= 1
            if k:
                base = base * base
        return acc

    # -- comparison ------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, CycNum):
            try:
                other = CycNum.coerce(other)
            except (TypeError, LiteralError):
                return NotImplemented
        if self.n == other.n:
            return self.coeffs == other.coeffs
        _, a, b = self._common(other)
        return a == b

    def __hash__(self):
        d, c = self.minimal()
        if d == 1:
            return hash(c[0])
        return hash((d, c))

    def sort_key(self):
        d, c = self.minimal()
        return (d, c)

    def __lt__(self, other):
        return cyc_total_order(self, CycNum.coerce(other)) < 0

    def __le__(self, other):
        return cyc_total_order(self, CycNum.coerce(other)) <= 0

    def __gt__(self, other):
        return cyc_total_order(self, CycNum.coerce(other)) > 0

    def __ge__(self, other):
        return cyc_total_order(self, CycNum.coerce(other)) >= 0

    def __repr__(self):
        return f"CycNum({format_cyc(self)!r})"

    def __str__(self):
        return format_cyc(self)


ZERO = CycNum._raw(1, (mpq(0),))
ONE = CycNum._raw(1, (mpq(1),))


def zeta(n, k=1):
    """zeta_n ** k."""
    _check_conductor(n)
    return CycNum._raw(n, _power_table(n)[k % n])


def cyc_normalize(raw_coeffs, n):
    """Reduce the polynomial sum raw_coeffs[i] * zeta_n**i modulo Phi_n."""
    if n < 1:
        raise ValueError("conductor must be a positive integer")
    _check_conductor(n)
    vals = [_as_mpq(c) for c in raw_coeffs]
    reduced = [mpq(0)] * totient(n)
    table = _power_table(n)
    for k, c in enumerate(vals):
        if c:
            for i, v in enumerate(table[k % n]):
                if v:
                    reduced[i] += c * v
    out = object.__new__(CycNum)
    out.n, out.coeffs, out._minimal = n, tuple(reduced), None
    return out


def cyc_arith(op, a, b=None):
    a = CycNum.coerce(a)
    if op == "add":
        return a + CycNum.coerce(b)
    if op == "sub":
        return a - CycNum.coerce(b)
    if op == "mul":
        return a * CycNum.coerce(b)
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown operation {op!r}")


def cyc_total_order(a, b):
    """-1, 0 or 1: minimal conductor first, then coefficients lexicographically."""
    ka, kb = a.sort_key(), b.sort_key()
    if ka == kb:
        return 0
    return -1 if ka < kb else 1


# -- literal grammar -----------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(z)(\d+)|(\^)|(\*)|(/)|(\+)|(-)|(\()|(\)))")


def _tokenize(text):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LiteralError(f"unexpected character at {pos} in {text!r}")
        if m.group(1):
            out.append(("int", int(m.group(1))))
        elif m.group(2):
            out.append(("z", int(m.group(3))))
        else:
            out.append((m.group(0).strip(), None))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind=None):
        if self.i >= len(self.toks):
            raise LiteralError(f"unexpected end of {self.text!r}")
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise LiteralError(f"expected {kind!r} in {self.text!r}")
        self.i += 1
        return tok

    def expr(self):
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        acc = self.term() * sign
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.factor()
        while self.peek() == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self):
        kind = self.peek()
        if kind == "int":
            num = self.take()[1]
            if self.peek() == "/":
                self.take()
                den = self.take("int")[1]
                if den == 0:
                    raise LiteralError(f"zero denominator in {self.text!r}")
                return CycNum.rational(Fraction(num, den))
            return CycNum.rational(num)
        if kind == "z":
            n = self.take()[1]
            if n < 1:
                raise LiteralError("conductor must be positive")
            k = 1
            if self.peek() == "^":
                self.take()
                neg = False
                if self.peek() == "-":
                    self.take()
                    neg = True
                k = self.take("int")[1]
                k = -k if neg else k
            return zeta(n, k)
        if kind == "(":
            self.take()
            val = self.expr()
            self.take(")")
            return val
        raise LiteralError(f"unexpected token {kind!r} in {self.text!r}")


def parse_cyc(text):
    """Parse a literal such as ``"-1/2*z8^3 + z8"``."""
    if isinstance(text, (int, Fraction)):
        return CycNum.rational(text)
    if not isinstance(text, str) or not text.strip():
        raise LiteralError(f"not a cyclotomic literal: {text!r}")
    p = _Parser(text)
    val = p.expr()
    if p.i != len(p.toks):
        raise LiteralError(f"trailing input in {text!r}")
    return val


def _fmt_q(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_cyc(x):
    """Serialize in the literal grammar using the minimal conductor."""
    d, coeffs = x.minimal()
    parts = []
    for i, c in enumerate(coeffs):
        if not c:
            continue
        if i == 0:
            body, neg = _fmt_q(abs(c)), c < 0
        else:
            sym = f"z{d}" if i == 1 else f"z{d}^{i}"
            mag = abs(c)
            body = sym if mag == 1 else f"{_fmt_q(mag)}*{sym}"
            neg = c < 0
        parts.append((neg, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out
