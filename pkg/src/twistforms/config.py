"""Job configs (JSON or TOML) and JSON serialization of results."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .algebra import AutomorphismError, StructureAlgebra, check_auto, conjugation_auto, make_matrix_algebra, make_sl
from .cyclo import ONE, CycNum, LiteralError, format_cyc, parse_cyc, zeta
from .forms import (
    Cocycle,
    azumaya_spec,
    cocycle_spec,
    margaux_spec,
    multiloop_spec,
)
from .linalg import CycMatrix
from .reps import ModuleLabel, Weight, diagram_flip
from .torus import ExtensionSpec, GaloisElement, LaurentPoly, TorusPoint

__all__ = [
    "ConfigError",
    "JobConfig",
    "load_config",
    "parse_config",
    "parse_laurent",
    "format_laurent",
    "config_hash",
    "elem_to_json",
    "label_to_json",
    "chi_to_json",
    "point_to_json",
]

DEFAULT_RADIUS = 3


class ConfigError(ValueError):
    """The config is malformed; nothing was computed."""


# -- Laurent literals ----------------------------------------------------

_LTOKEN = re.compile(r"\s*(?:(\d+)|(z)(\d+)|(t)(\d+)|(\^)|(\*)|(/)|(\+)|(-)|(\()|(\)))")


class _LaurentParser:
    """sums of products of rationals, zN[^k] and tI[^k] (k may be negative)."""

    def __init__(self, text, num_vars):
        self.text = text
        self.n = num_vars
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _LTOKEN.match(text, pos)
            if not m:
                raise LiteralError(f"unexpected character at {pos} in {text!r}")
            if m.group(1):
                self.toks.append(("int", int(m.group(1))))
            elif m.group(2):
                self.toks.append(("z", int(m.group(3))))
            elif m.group(4):
                self.toks.append(("t", int(m.group(5))))
            else:
                self.toks.append((m.group(0).strip(), None))
            pos = m.end()
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

    def parse(self):
        val = self.expr()
        if self.i != len(self.toks):
            raise LiteralError(f"trailing input in {self.text!r}")
        return val

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

    def exponent(self):
        if self.peek() != "^":
            return 1
        self.take()
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        k = self.take("int")[1]
        return -k if neg else k

    def factor(self):
        kind = self.peek()
        if kind == "int":
            num = self.take()[1]
            if self.peek() == "/":
                self.take()
                den = self.take("int")[1]
                if den == 0:
                    raise LiteralError(f"zero denominator in {self.text!r}")
                return LaurentPoly.constant(self.n, CycNum.rational(num) / den)
            return LaurentPoly.constant(self.n, num)
        if kind == "z":
            m = self.take()[1]
            if m < 1:
                raise LiteralError("conductor must be positive")
            return LaurentPoly.constant(self.n, zeta(m, self.exponent()))
        if kind == "t":
            i = self.take()[1]
            if not 1 <= i <= self.n:
                raise LiteralError(f"variable t{i} out of range in {self.text!r}")
            return LaurentPoly.var(self.n, i - 1, self.exponent())
        if kind == "(":
            self.take()
            val = self.expr()
            self.take(")")
            return val
        raise LiteralError(f"unexpected token {kind!r} in {self.text!r}")


def parse_laurent(text, num_vars):
    """Parse e.g. ``"1/2*t1^-1 + z4*t2"`` or a list of ``{"exp", "coef"}`` terms."""
    if isinstance(text, int):
        return LaurentPoly.constant(num_vars, text)
    if isinstance(text, list):
        terms = {}
        for t in text:
            if not isinstance(t, dict) or "exp" not in t or "coef" not in t or len(t["exp"]) != num_vars:
                raise LiteralError(f"bad Laurent term {t!r}")
            e = tuple(int(x) for x in t["exp"])
            c = parse_cyc(t["coef"]) if isinstance(t["coef"], str) else CycNum.coerce(t["coef"])
            terms[e] = terms[e] + c if e in terms else c
        return LaurentPoly(num_vars, terms)
    if not isinstance(text, str) or not text.strip():
        raise LiteralError(f"not a Laurent literal: {text!r}")
    return _LaurentParser(text, num_vars).parse()


def format_laurent(s):
    if not s:
        return "0"
    parts = []
    for e, c in sorted(s.terms.items()):
        mono = "*".join(f"t{i + 1}" if x == 1 else f"t{i + 1}^{x}" for i, x in enumerate(e) if x)
        coeff = format_cyc(c)
        if not mono:
            parts.append(coeff if " " not in coeff else f"({coeff})")
        elif c == ONE:
            parts.append(mono)
        elif c == -ONE:
            parts.append("-" + mono)
        else:
            parts.append((coeff if " " not in coeff else f"({coeff})") + "*" + mono)
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


# -- config parsing -------------------------------------------------------


def _cyc(x, where):
    try:
        return parse_cyc(x) if isinstance(x, str) else CycNum.coerce(x)
    except (LiteralError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: bad cyclotomic literal {x!r}: {exc}") from exc


def _matrix(rows, where):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{where}: expected a matrix (list of rows)")
    try:
        return CycMatrix([[_cyc(x, where) for x in r] for r in rows])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}: missing {key!r}")
    return d[key]


def parse_algebra(spec):
    if isinstance(spec, str):
        m = re.fullmatch(r"sl(\d+)", spec)
        if m:
            spec = {"type": "sl", "n": int(m.group(1))}
        else:
            m = re.fullmatch(r"M(\d+)", spec)
            if not m:
                raise ConfigError(f"algebra: unknown algebra {spec!r}")
            spec = {"type": "matrix", "n": int(m.group(1))}
    kind = _require(spec, "type", "algebra")
    if kind in ("sl", "matrix"):
        n = spec["n"] if "n" in spec else _require(spec, "rank", "algebra")
        if not isinstance(n, int) or n < 2 or n > 6:
            raise ConfigError("algebra: n must be an integer in 2..6")
        return make_sl(n) if kind == "sl" else make_matrix_algebra(n)
    if kind in ("structure", "custom"):
        dim = _require(spec, "dim", "algebra")
        triples = []
        for t in _require(spec, "constants", "algebra"):
            if not isinstance(t, list) or len(t) != 4:
                raise ConfigError("algebra: constants are [i, j, k, coefficient] entries")
            triples.append((int(t[0]), int(t[1]), int(t[2]), _cyc(t[3], "algebra constants")))
        try:
            return StructureAlgebra.from_triples(dim, triples, is_lie=bool(spec.get("lie", True)))
        except ValueError as exc:
            raise ConfigError(f"algebra: {exc}") from exc
    raise ConfigError(f"algebra: unknown type {kind!r}")


def parse_extension(spec, default_orders=None):
    if spec is None:
        if default_orders is None:
            raise ConfigError("form: missing 'extension'")
        spec = {"orders": list(default_orders)}
    orders = _require(spec, "orders", "extension")
    if not isinstance(orders, list) or not orders or not all(isinstance(m, int) and m >= 1 for m in orders):
        raise ConfigError("extension: orders must be a nonempty list of positive integers")
    if "vars" in spec and spec["vars"] != len(orders):
        raise ConfigError("extension: 'vars' disagrees with the number of orders")
    roots = spec.get("roots")
    if roots is None:
        roots = [zeta(m) for m in orders]
    else:
        roots = [_cyc(r, "extension roots") for r in roots]
    try:
        return ExtensionSpec(len(orders), tuple(orders), tuple(roots))
    except ValueError as exc:
        raise ConfigError(f"extension: {exc}") from exc


def parse_auto(alg, spec, where="auto", finite=True):
    try:
        if spec == "identity":
            return check_auto(alg, CycMatrix.identity(alg.dim))
        if spec in ("transpose", "-transpose"):
            if alg.natural is None:
                raise ConfigError(f"{where}: transpose needs a matrix algebra")
            imgs = [-(X.T) if alg.is_lie else X.T for X in alg.natural]
            coords = alg.coords_of_matrices(imgs)
            d = alg.dim
            return check_auto(alg, CycMatrix([[coords[j][i] for j in range(d)] for i in range(d)]), finite=finite)
        if spec == "diagram_flip":
            if alg.sl_rank is None:
                raise ConfigError(f"{where}: diagram_flip is defined for sl_n")
            return diagram_flip(alg.sl_rank)
        if isinstance(spec, dict) and "conjugation" in spec:
            return conjugation_auto(alg, _matrix(spec["conjugation"], where), finite=finite)
        if isinstance(spec, dict) and "matrix" in spec:
            return check_auto(alg, _matrix(spec["matrix"], where), finite=finite)
    except AutomorphismError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except ZeroDivisionError as exc:
        raise ConfigError(f"{where}: singular conjugating matrix") from exc
    raise ConfigError(f"{where}: expected 'identity', 'transpose', 'diagram_flip', {{'conjugation': P}} or {{'matrix': M}}")


def _gamma_key(text, ext):
    try:
        r = tuple(int(x) for x in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"cocycle: bad group element {text!r}") from exc
    if len(r) != ext.num_vars or any(not 0 <= a < m for a, m in zip(r, ext.orders)):
        raise ConfigError(f"cocycle: group element {text!r} outside Gamma")
    return GaloisElement(r)


def parse_form(spec):
    if not isinstance(spec, dict):
        raise ConfigError("form: expected a table/object")
    kind = _require(spec, "kind", "form")
    if kind == "azumaya12":
        return azumaya_spec()
    if kind == "margaux":
        return margaux_spec()
    alg = parse_algebra(spec.get("algebra", "sl2"))
    if kind == "multiloop":
        autos = [parse_auto(alg, a, f"autos[{i}]") for i, a in enumerate(_require(spec, "autos", "form"))]
        ext = parse_extension(spec.get("extension"), [a.order for a in autos])
        try:
            return multiloop_spec(alg, autos, ext)
        except ValueError as exc:
            raise ConfigError(f"form: {exc}") from exc
    if kind == "cocycle":
        ext = parse_extension(spec.get("extension"))
        images = {}
        for key, rows in _require(spec, "images", "form").items():
            g = _gamma_key(key, ext)
            if not isinstance(rows, list) or len(rows) != alg.dim or any(len(r) != alg.dim for r in rows):
                raise ConfigError(f"cocycle: image of {key} must be a {alg.dim}x{alg.dim} matrix")
            try:
                images[g] = tuple(tuple(parse_laurent(x, ext.num_vars) for x in r) for r in rows)
            except LiteralError as exc:
                raise ConfigError(f"cocycle: image of {key}: {exc}") from exc
        missing = [g for g in ext.elements() if g not in images]
        if missing:
            raise ConfigError(f"cocycle: no image for {','.join(map(str, missing[0].exponents))}")
        return cocycle_spec(alg, ext, Cocycle(images), check=False)
    raise ConfigError(f"form: unknown kind {kind!r}")


def parse_point(p, num_vars, where="point"):
    if isinstance(p, dict) and "coords" in p:
        p = p["coords"]
    if not isinstance(p, list) or len(p) != num_vars:
        raise ConfigError(f"{where}: expected {num_vars} coordinates")
    try:
        return TorusPoint([_cyc(x, where) for x in p])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def parse_label(entries, num_vars, where="label"):
    if not isinstance(entries, list):
        raise ConfigError(f"{where}: expected a list of {{weight, point}} entries")
    out = []
    for i, ent in enumerate(entries):
        w = _require(ent, "weight", f"{where}[{i}]")
        if not isinstance(w, list) or not all(isinstance(x, int) for x in w):
            raise ConfigError(f"{where}[{i}]: weight must be a list of integers")
        try:
            weight = Weight(tuple(w))
        except ValueError as exc:
            raise ConfigError(f"{where}[{i}]: {exc}") from exc
        out.append((weight, parse_point(_require(ent, "point", f"{where}[{i}]"), num_vars, f"{where}[{i}].point")))
    return ModuleLabel(tuple(out))


@dataclass
class JobConfig:
    raw: dict = field(default_factory=dict)
    form_spec: object = None
    window_radius: int = DEFAULT_RADIUS

    @property
    def form(self):
        if self.form_spec is None:
            raise ConfigError("config has no 'form'")
        return self.form_spec


def parse_config(raw, window=None):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a table/object")
    form = parse_form(raw["form"]) if "form" in raw else None
    radius = raw.get("window_radius", DEFAULT_RADIUS) if window is None else window
    if not isinstance(radius, int) or isinstance(radius, bool) or radius < 0:
        raise ConfigError("window_radius must be a nonnegative integer")
    return JobConfig(raw, form, radius)


def load_config(path, window=None):
    if path is None:
        return parse_config({}, window)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        if p.suffix == ".toml":
            raw = tomllib.loads(text)
        else:
            raw = json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return parse_config(raw, window)


def config_hash(payload):
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode()).hexdigest()


# -- serialization --------------------------------------------------------


def point_to_json(p):
    return [format_cyc(c) for c in p.coords]


def elem_to_json(z):
    return [{"exp": list(e), "vec": [format_cyc(x) for x in z.terms[e]]} for e in sorted(z.terms)]


def label_to_json(label):
    return [{"weight": list(w.coords), "point": point_to_json(p)} for w, p in label.entries]


def chi_to_json(chi):
    return [[{"weight": list(w.coords), "point": point_to_json(p)} for w, p in orb] for orb in chi.orbits]
