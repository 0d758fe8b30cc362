"""Simple finite-dimensional modules of a form: labels, the Gamma-action on
(weight, point) pairs, canonical invariants, and a brute-force intertwiner
oracle for sl_2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .algebra import AlgebraAuto, StructureAlgebra, make_sl
from .cyclo import ONE, ZERO, CycNum
from .forms import FormSpec, WindowTooSmall, _lmat_eval, _lmat_galois
from .linalg import CycMatrix, _nullspace_from, rank, rref_sparse
from .torus import TorusPoint, fiber_key, galois_act_point

__all__ = [
    "Weight",
    "ModuleLabel",
    "LabelError",
    "InvariantChi",
    "ExplicitRep",
    "AutoDecomposition",
    "sl2_irrep",
    "diagram_flip",
    "decompose_auto",
    "recompose",
    "out_on_weight",
    "gamma_act_label",
    "chi_canonical",
    "iso_decide",
    "build_module_matrices",
    "iso_oracle",
    "enumerate_classes",
    "pm_rule",
]


class LabelError(ValueError):
    """A module label violates the shape required of simple modules."""


@dataclass(frozen=True, order=True)
class Weight:
    """Coordinates on the fundamental weights of sl_n."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if any(c < 0 for c in coords):
            raise ValueError(f"weight {coords} is not dominant")
        object.__setattr__(self, "coords", coords)

    def is_zero(self):
        return not any(self.coords)


def _pair_key(pair):
    w, p = pair
    return (p.sort_key(), w.coords)


@dataclass(frozen=True)
class ModuleLabel:
    """V(lambda_1, M_1) (x) ... (x) V(lambda_n, M_n) as (Weight, TorusPoint) pairs."""

    entries: tuple = ()

    def __post_init__(self):
        entries = tuple((w if isinstance(w, Weight) else Weight(w), p if isinstance(p, TorusPoint) else TorusPoint(p)) for w, p in self.entries)
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class InvariantChi:
    """Canonically ordered Gamma-orbits of (Weight, TorusPoint) pairs."""

    orbits: tuple = ()

    def pairs(self):
        return [p for orb in self.orbits for p in orb]

    def as_function(self):
        return {p: w for w, p in self.pairs()}


@dataclass(frozen=True)
class ExplicitRep:
    dim: int
    images: tuple  # one CycMatrix per algebra basis element

    def act(self, x):
        acc = CycMatrix.zeros(self.dim, self.dim)
        for c, m in zip(x, self.images):
            if c:
                acc = acc + m.scale(c)
        return acc

    def is_homomorphism(self, alg):
        for i in range(alg.dim):
            for j in range(alg.dim):
                lhs = self.act(alg.table[i][j])
                a, b = self.images[i], self.images[j]
                if lhs != a @ b - b @ a:
                    return False
        return True


@lru_cache(maxsize=None)
def sl2_irrep(lam):
    """Basis v_0..v_lam with h v_j = (lam-2j) v_j, f v_j = v_{j+1}, e v_j = j(lam-j+1) v_{j-1}."""
    if lam < 0:
        raise ValueError("highest weight must be nonnegative")
    n = lam + 1
    e = [[ZERO] * n for _ in range(n)]
    f = [[ZERO] * n for _ in range(n)]
    h = [[ZERO] * n for _ in range(n)]
    for j in range(n):
        h[j][j] = CycNum.rational(lam - 2 * j)
        if j + 1 < n:
            f[j + 1][j] = ONE
        if j > 0:
            e[j - 1][j] = CycNum.rational(j * (lam - j + 1))
    return ExplicitRep(n, (CycMatrix(e, n), CycMatrix(f, n), CycMatrix(h, n)))


# -- inner / outer ---------------------------------------------------------


@dataclass(frozen=True)
class AutoDecomposition:
    is_inner: bool
    inner_witness: CycMatrix | None
    diagram_part: str  # "identity" or "flip"


@lru_cache(maxsize=None)
def _sl(n):
    return make_sl(n)


def _flip_matrix(n):
    # signed antidiagonal chosen so that x -> -J x^T J^-1 sends E_{i,i+1} to E_{n-i,n-i+1}
    return CycMatrix([[(-1) ** i if j == n - 1 - i else 0 for j in range(n)] for i in range(n)], n)


@lru_cache(maxsize=None)
def diagram_flip(n):
    """The pinning-preserving diagram automorphism x -> -J x^T J^-1 of sl_n."""
    alg = _sl(n)
    J = _flip_matrix(n)
    Jinv = J.inverse()
    images = [-(J @ X.T @ Jinv) for X in alg.natural]
    coords = alg.coords_of_matrices(images)
    d = alg.dim
    return AlgebraAuto(CycMatrix([[coords[j][i] for j in range(d)] for i in range(d)], d), 2 if n > 2 else _flip_order(d, coords))


def _flip_order(d, coords):
    m = CycMatrix([[coords[j][i] for j in range(d)] for i in range(d)], d)
    return 1 if m.is_identity() else 2


def _conjugator(alg, beta):
    """Invertible g with g X = beta(X) g for every natural basis matrix X, or None."""
    n = alg.natural[0].nrows
    rows = []
    for b, X in enumerate(alg.natural):
        Y = alg.matrix_of(beta.col(b))
        # (g X - Y g)_{ij} = sum_k g_ik X_kj - Y_ik g_kj
        for i in range(n):
            for j in range(n):
                row = {}
                for k in range(n):
                    x = X[k, j]
                    if x:
                        row[i * n + k] = row.get(i * n + k, ZERO) + x
                    y = Y[i, k]
                    if y:
                        row[k * n + j] = row.get(k * n + j, ZERO) - y
                row = {c: v for c, v in row.items() if v}
                if row:
                    rows.append(row)
    prows, pcols, _ = rref_sparse(rows, n * n)
    null = _nullspace_from(prows, pcols, n * n)
    if len(null) != 1:
        # Schur: the conjugator of an automorphism of a simple sl_n is unique up to scalar
        return None
    g = CycMatrix([null[0][i * n:(i + 1) * n] for i in range(n)], n)
    if rank(g) != n:
        return None
    return g


def decompose_auto(n, alpha):
    """alpha = Int(g) o d with d the identity or the diagram flip."""
    alg = _sl(n)
    if isinstance(alpha, AlgebraAuto):
        m = alpha.matrix
    else:
        m = alpha if isinstance(alpha, CycMatrix) else CycMatrix(alpha)
    if m.shape != (alg.dim, alg.dim):
        raise ValueError(f"automorphism of sl_{n} must be {alg.dim}x{alg.dim}")
    g = _conjugator(alg, m)
    if g is not None:
        return AutoDecomposition(True, g, "identity")
    g = _conjugator(alg, m @ diagram_flip(n).matrix)
    if g is not None:
        return AutoDecomposition(False, g, "flip")
    raise ArithmeticError("no inner or diagram decomposition exists; the input is not an automorphism of sl_n")


def recompose(n, dec):
    """Matrix of Int(witness) o diagram part on sl_n."""
    alg = _sl(n)
    g = dec.inner_witness
    ginv = g.inverse()
    imgs = [g @ X @ ginv for X in alg.natural]
    coords = alg.coords_of_matrices(imgs)
    d = alg.dim
    inner = CycMatrix([[coords[j][i] for j in range(d)] for i in range(d)], d)
    if dec.diagram_part == "flip":
        return inner @ diagram_flip(n).matrix
    return inner


def out_on_weight(part, w):
    if part == "identity":
        return w
    if part == "flip":
        return Weight(tuple(reversed(w.coords)))
    raise ValueError(f"unknown diagram part {part!r}")


# -- the Gamma-action on labels ------------------------------------------


def _rank_n(form):
    alg = form.algebra
    if form.kind in ("azumaya12", "margaux"):
        return 2
    if alg.sl_rank is None:
        raise ValueError("module classification needs a form of sl_n")
    return alg.sl_rank


_OUT_CACHE = {}


def _outer_part(form, g, point):
    """Out of u_g^{-1} evaluated at g.N, where N is ``point``'s ideal."""
    if form.kind in ("azumaya12", "margaux") or _rank_n(form) == 2:
        # every automorphism of sl_2 is inner
        return "identity"
    key = (id(form), g, point)
    hit = _OUT_CACHE.get(key)
    if hit is not None and hit[0] is form:
        return hit[1]
    ext = form.extension
    u = form.twisting()
    moved = galois_act_point(ext, g, point)
    # u_g^{-1} = g(u_{-g}) by the cocycle identity
    inv = _lmat_galois(ext, g, u.images[ext.neg(g)])
    alpha = _lmat_eval(inv, moved)
    part = decompose_auto(_rank_n(form), alpha).diagram_part
    _OUT_CACHE[key] = (form, part)
    return part


def gamma_act_label(form, g, pair):
    """g.(mu, N) = (mu o Out u_g^{-1}(g N), g N)."""
    w, p = pair
    part = _outer_part(form, g, p)
    return out_on_weight(part, w), galois_act_point(form.extension, g, p)


def validate_label(form, label):
    n = _rank_n(form)
    keys = {}
    for idx, (w, p) in enumerate(label.entries):
        if len(w.coords) != n - 1:
            raise LabelError(f"entry {idx}: weight {list(w.coords)} needs {n - 1} coordinates")
        if w.is_zero():
            raise LabelError(f"entry {idx}: zero weight is not allowed in a label")
        if len(p.coords) != form.extension.num_vars:
            raise LabelError(f"entry {idx}: point has wrong number of coordinates")
        k = fiber_key(form.extension, p)
        if k in keys:
            raise LabelError(f"entry {idx}: point shares a fiber with entry {keys[k]}")
        keys[k] = idx


def _orbit(form, pair):
    out = {gamma_act_label(form, g, pair) for g in form.extension.elements()}
    return tuple(sorted(out, key=_pair_key))


def chi_canonical(form, label):
    validate_label(form, label)
    orbits = sorted((_orbit(form, pair) for pair in label.entries), key=lambda o: _pair_key(o[0]))
    return InvariantChi(tuple(orbits))


def iso_decide(form, l1, l2):
    return chi_canonical(form, l1) == chi_canonical(form, l2)


def pm_rule(l1, l2):
    """Two labels over sign-twisted points agree iff, after reordering, the
    weights are equal and the points agree up to a sign in each coordinate."""
    if len(l1) != len(l2):
        return False

    def same(a, b):
        wa, pa = a
        wb, pb = b
        return wa == wb and all(x == y or x == -y for x, y in zip(pa.coords, pb.coords))

    rest = list(l2.entries)
    for a in l1.entries:
        for i, b in enumerate(rest):
            if same(a, b):
                del rest[i]
                break
        else:
            return False
    return True


# -- explicit modules and the intertwiner oracle ---------------------------


def _kron_chain(mats):
    acc = mats[0]
    for m in mats[1:]:
        acc = acc.kron(m)
    return acc


def build_module_matrices(window, label):
    """Matrix of each window basis element on V_{l_1}(M_1) (x) ... (x) V_{l_n}(M_n)."""
    alg = window.algebra
    if alg.sl_rank != 2:
        raise ValueError("explicit modules are only built for forms of sl_2")
    reps = [sl2_irrep(w.coords[0]) for w, _ in label.entries]
    dims = [r.dim for r in reps]
    total = 1
    for d in dims:
        total *= d
    if not reps:
        return [CycMatrix.zeros(1, 1) for _ in window.basis]
    idents = [CycMatrix.identity(d) for d in dims]
    out = []
    for z in window.basis:
        acc = CycMatrix.zeros(total, total)
        for i, (rep, (_, p)) in enumerate(zip(reps, label.entries)):
            local = rep.act(z.evaluate(p))
            if local.is_zero():
                continue
            factors = idents[:i] + [local] + idents[i + 1:]
            acc = acc + _kron_chain(factors)
        out.append(acc)
    return out


def _fiber_representatives(form, labels):
    reps = {}
    for label in labels:
        for _, p in label.entries:
            k = fiber_key(form.extension, p)
            reps.setdefault(k, p)
    return [reps[k] for k in sorted(reps, key=lambda k: tuple(c.sort_key() for c in k))]


def _check_window_surjects(window, points):
    if not points:
        return
    vecs = []
    for z in window.basis:
        v = []
        for p in points:
            v.extend(z.evaluate(p))
        vecs.append(tuple(v))
    need = window.algebra.dim * len(points)
    if rank(vecs) < need:
        raise WindowTooSmall(f"window does not surject onto {len(points)} copies of g; enlarge the radius")


def iso_oracle(window, l1, l2):
    """Decide V(l1) ~ V(l2) by solving T rho_1(z) = rho_2(z) T over the window."""
    form = window.spec
    A = build_module_matrices(window, l1)
    B = build_module_matrices(window, l2)
    n = A[0].nrows if A else 1
    if n != (B[0].nrows if B else 1):
        return False
    # both actions factor through g^k at one point per fiber; if the window
    # reaches all of g^k, window intertwiners are module intertwiners
    _check_window_surjects(window, _fiber_representatives(form, [l1, l2]))
    order = sorted(range(len(A)), key=lambda j: sum(1 for r in A[j].rows for x in r if x) + sum(1 for r in B[j].rows for x in r if x))
    nn = n * n
    prows, pcols = [], []
    for j in order:
        X, Y = A[j], B[j]
        new = []
        # (T X - Y T)_{ab} = sum_k T_ak X_kb - Y_ak T_kb
        xcols = [[(k, X[k, b]) for k in range(n) if X[k, b]] for b in range(n)]
        yrows = [[(k, Y[a, k]) for k in range(n) if Y[a, k]] for a in range(n)]
        for a in range(n):
            for b in range(n):
                row = {}
                for k, x in xcols[b]:
                    c = a * n + k
                    row[c] = row.get(c, ZERO) + x
                for k, y in yrows[a]:
                    c = k * n + b
                    row[c] = row.get(c, ZERO) - y
                row = {c: v for c, v in row.items() if v}
                if row:
                    new.append(row)
        if not new:
            continue
        prows, pcols, _ = rref_sparse(prows + new, nn)
        if len(pcols) == nn:
            return False
    null = _nullspace_from(prows, pcols, nn)
    if len(null) > 1:
        raise AssertionError(f"intertwiner space has dimension {len(null)}; modules are not simple")
    if not null:
        return False
    T = CycMatrix([null[0][a * n:(a + 1) * n] for a in range(n)], n)
    return rank(T) == n


# -- enumeration ----------------------------------------------------------


def _weights(rank_n, max_weight):
    out = []
    for c in itertools.product(range(max_weight + 1), repeat=rank_n - 1):
        if any(c):
            out.append(Weight(c))
    return out


def enumerate_classes(form, points, max_weight, max_factors=None):
    """All distinct invariants supported on the Gamma-saturation of ``points``
    with weight coordinates at most ``max_weight`` and at most ``max_factors``
    fibers in the support."""
    ext = form.extension
    n = _rank_n(form)
    sat = {galois_act_point(ext, g, TorusPoint(p) if not isinstance(p, TorusPoint) else p) for p in points for g in ext.elements()}
    fibers = {}
    for p in sat:
        fibers.setdefault(fiber_key(ext, p), []).append(p)
    keys = sorted(fibers, key=lambda k: tuple(c.sort_key() for c in k))
    weights = _weights(n, max_weight)
    orbit_choices = []
    for k in keys:
        orbs = {_orbit(form, (w, p)) for w in weights for p in sorted(fibers[k], key=TorusPoint.sort_key)}
        orbit_choices.append(sorted(orbs, key=lambda o: _pair_key(o[0])))
    limit = len(keys) if max_factors is None else min(max_factors, len(keys))
    classes = set()
    for size in range(limit + 1):
        for subset in itertools.combinations(range(len(keys)), size):
            for pick in itertools.product(*[orbit_choices[i] for i in subset]):
                classes.add(InvariantChi(tuple(sorted(pick, key=lambda o: _pair_key(o[0])))))
    return sorted(classes, key=lambda c: [[_pair_key(p) for p in o] for o in c.orbits])


def label_from_chi(chi):
    """One representative label of an invariant: the first pair of each orbit."""
    return ModuleLabel(tuple(o[0] for o in chi.orbits))
