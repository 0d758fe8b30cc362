import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistforms.algebra import check_auto, conjugation_auto, make_sl
from twistforms.cyclo import CycNum, zeta
from twistforms.forms import (
    CurrentElem,
    FormWindow,
    WindowIdeal,
    WindowTooSmall,
    eval_kernel_window,
    margaux_spec,
    multiloop_spec,
    multiloop_window,
    psi_ideal_window,
)
from twistforms.linalg import CycMatrix, nullspace, rank
from twistforms.reps import (
    InvariantChi,
    LabelError,
    ModuleLabel,
    Weight,
    build_module_matrices,
    chi_canonical,
    decompose_auto,
    diagram_flip,
    enumerate_classes,
    gamma_act_label,
    iso_decide,
    iso_oracle,
    label_from_chi,
    out_on_weight,
    pm_rule,
    recompose,
    sl2_irrep,
)
from twistforms.torus import TorusPoint, fiber, fiber_key, galois_act_point, standard_extension

Z4 = zeta(4)


def lab(*entries):
    return ModuleLabel(tuple(((w,) if isinstance(w, int) else w, p) for w, p in entries))


@pytest.fixture(scope="module")
def w2(l1_windows):
    return l1_windows[2]


# -- sl2 irreducibles ---------------------------------------------------------


def test_irreps(sl2):
    zero = sl2_irrep(0)
    assert zero.dim == 1 and all(m.is_zero() for m in zero.images)
    nat = sl2_irrep(1)
    assert nat.images[2] == CycMatrix([[1, 0], [0, -1]])
    r2 = sl2_irrep(2)
    e, f, h = r2.images
    assert [h[i, i] for i in range(3)] == [2, 0, -2]
    cas = e @ f + f @ e + (h @ h).scale(CycNum.rational(Fraction(1, 2)))
    assert cas == CycMatrix.identity(3).scale(4)
    with pytest.raises(ValueError):
        sl2_irrep(-1)


@pytest.mark.parametrize("lam", range(6))
def test_irreps_are_homomorphisms(sl2, lam):
    rep = sl2_irrep(lam)
    assert rep.dim == lam + 1 and rep.is_homomorphism(sl2)
    # Casimir acts by lam(lam+2)/2 on the whole module
    e, f, h = rep.images
    cas = e @ f + f @ e + (h @ h).scale(CycNum.rational(Fraction(1, 2)))
    assert cas == CycMatrix.identity(lam + 1).scale(CycNum.rational(Fraction(lam * (lam + 2), 2)))


# -- inner / outer decomposition -----------------------------------------------


def _neg_transpose(n):
    alg = make_sl(n)
    coords = alg.coords_of_matrices([-(X.T) for X in alg.natural])
    d = alg.dim
    return check_auto(alg, CycMatrix([[coords[j][i] for j in range(d)] for i in range(d)], d))


def _proportional(A, B):
    flat_a = [x for r in A.rows for x in r]
    flat_b = [x for r in B.rows for x in r]
    return rank([flat_a, flat_b]) == 1


def test_decompose_inner_sl3():
    sl3 = make_sl(3)
    P = CycMatrix([[1, 2, 0], [0, 1, 0], [1, 0, 1]])
    alpha = conjugation_auto(sl3, P, finite=False)
    dec = decompose_auto(3, alpha)
    assert dec.is_inner and dec.diagram_part == "identity"
    assert _proportional(dec.inner_witness, P)
    assert recompose(3, dec) == alpha.matrix


def test_decompose_neg_transpose():
    a3 = _neg_transpose(3)
    dec = decompose_auto(3, a3)
    assert not dec.is_inner and dec.diagram_part == "flip"
    assert recompose(3, dec) == a3.matrix
    a2 = _neg_transpose(2)
    dec2 = decompose_auto(2, a2)
    assert dec2.is_inner
    assert _proportional(dec2.inner_witness, CycMatrix([[0, 1], [-1, 0]]))
    assert recompose(2, dec2) == a2.matrix


def test_decompose_rejects_non_automorphism():
    with pytest.raises(ArithmeticError):
        decompose_auto(3, CycMatrix.identity(8).scale(2))
    with pytest.raises(ValueError):
        decompose_auto(3, CycMatrix.identity(3))


def test_diagram_flip_on_simple_roots():
    sl3 = make_sl(3)
    flip = diagram_flip(3)
    E12 = CycMatrix([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
    E23 = CycMatrix([[0, 0, 0], [0, 0, 1], [0, 0, 0]])
    c12, c23 = sl3.coords_of_matrices([E12, E23])
    assert flip.matrix.apply(c12) == tuple(c23)
    assert flip.matrix.apply(c23) == tuple(c12)


@settings(max_examples=20)
@given(st.lists(st.integers(-2, 2), min_size=9, max_size=9), st.booleans())
def test_decompose_round_trip(entries, outer):
    P = CycMatrix([entries[0:3], entries[3:6], entries[6:9]])
    if rank(P) < 3:
        P = P + CycMatrix.identity(3).scale(7)
    if rank(P) < 3:
        return
    sl3 = make_sl(3)
    alpha = conjugation_auto(sl3, P, finite=False).matrix
    if outer:
        alpha = alpha @ _neg_transpose(3).matrix
    dec = decompose_auto(3, alpha)
    assert dec.is_inner != outer
    assert recompose(3, dec) == alpha


def _tensor_square_highest_weights(dual):
    # brute force on C^3 (x) C^3: highest weight vectors and their H eigenvalues
    def unit(i, j):
        return CycMatrix([[1 if (a, b) == (i, j) else 0 for b in range(3)] for a in range(3)])

    I = CycMatrix.identity(3)

    def act(X):
        if dual:
            X = -X.T
        return X.kron(I) + I.kron(X)

    raising = [act(unit(0, 1)), act(unit(1, 2))]
    H = [act(unit(0, 0) - unit(1, 1)), act(unit(1, 1) - unit(2, 2))]
    stacked = CycMatrix([r for R in raising for r in R.rows], 9)
    out = set()
    for v in nullspace(stacked):
        col = CycMatrix.column(v)
        hv = [Hi @ col for Hi in H]
        k = next(i for i, x in enumerate(v) if x)
        # H is diagonal in the tensor basis, so each nullspace vector is a weight vector
        out.add(tuple(int(Fraction(str(m[k, 0] / v[k]))) for m in hv))
    return out


def test_flip_is_duality_on_weights():
    plain = _tensor_square_highest_weights(False)
    dual = _tensor_square_highest_weights(True)
    assert plain == {(2, 0), (0, 1)}
    assert dual == {tuple(out_on_weight("flip", Weight(w)).coords) for w in plain}
    assert out_on_weight("flip", Weight((2, 0))) == Weight((0, 2))
    assert out_on_weight("flip", Weight((1, 1))) == Weight((1, 1))
    assert out_on_weight("identity", Weight((3, 1))) == Weight((3, 1))


# -- the Gamma action on labels ------------------------------------------------


@pytest.fixture(scope="module")
def sl3_flip():
    return multiloop_spec(make_sl(3), [diagram_flip(3)], standard_extension([2]))


def test_gamma_act_examples(L1, ext22, sl3_flip):
    pair = (Weight((2,)), TorusPoint((3, Z4)))
    for g in ext22.elements():
        w, p = gamma_act_label(L1, g, pair)
        assert w == pair[0] and p == galois_act_point(ext22, g, pair[1])
    assert gamma_act_label(L1, ext22.identity(), pair) == pair
    g1 = sl3_flip.extension.generators()[0]
    assert gamma_act_label(sl3_flip, g1, (Weight((1, 0)), TorusPoint((1,)))) == (Weight((0, 1)), TorusPoint((-1,)))
    sl3 = make_sl(3)
    ident = check_auto(sl3, CycMatrix.identity(8))
    untw = multiloop_spec(sl3, [ident, ident], standard_extension([1, 1]))
    assert gamma_act_label(untw, untw.extension.identity(), (Weight((1, 2)), TorusPoint((2, 3)))) == (
        Weight((1, 2)),
        TorusPoint((2, 3)),
    )


@settings(max_examples=25)
@given(st.data())
def test_gamma_action_laws(L1, sl3_flip, data):
    form = data.draw(st.sampled_from([L1, sl3_flip]))
    ext = form.extension
    n = form.algebra.sl_rank
    w = Weight(tuple(data.draw(st.integers(0, 3)) for _ in range(n - 1)))
    coords = [data.draw(st.sampled_from([1, -1, 2, Z4, zeta(8), zeta(3)])) for _ in range(ext.num_vars)]
    pair = (w, TorusPoint(coords))
    g = data.draw(st.sampled_from(ext.elements()))
    h = data.draw(st.sampled_from(ext.elements()))
    assert gamma_act_label(form, ext.identity(), pair) == pair
    assert gamma_act_label(form, ext.add(g, h), pair) == gamma_act_label(form, g, gamma_act_label(form, h, pair))


# -- invariants and the isomorphism decision -----------------------------------


def test_chi_examples(L1):
    chi = chi_canonical(L1, lab((2, (1, 1))))
    assert len(chi.orbits) == 1 and len(chi.orbits[0]) == 4
    assert {p for _, p in chi.pairs()} == {TorusPoint(c) for c in itertools.product([1, -1], repeat=2)}
    assert chi_canonical(L1, lab()) == InvariantChi(())
    assert chi_canonical(L1, lab((2, (1, 1)))) == chi_canonical(L1, lab((2, (-1, 1))))


def test_label_validation(L1):
    with pytest.raises(LabelError, match="fiber"):
        chi_canonical(L1, lab((2, (1, 1)), (1, (-1, 1))))
    with pytest.raises(LabelError, match="zero weight"):
        chi_canonical(L1, lab((0, (1, 1))))
    with pytest.raises(LabelError, match="coordinates"):
        chi_canonical(L1, lab(((1, 1), (1, 1))))
    with pytest.raises(ValueError):
        Weight((-1,))


def test_iso_decide_examples(L1):
    assert iso_decide(L1, lab((3, (1, 1))), lab((3, (-1, -1))))
    assert not iso_decide(L1, lab((3, (1, 1))), lab((2, (1, 1))))
    assert not iso_decide(L1, lab((3, (1, 1))), lab((3, (Z4, 1))))


def test_iso_oracle_examples(w2):
    a = lab((1, (1, 1)))
    assert iso_oracle(w2, a, a)
    assert iso_oracle(w2, a, lab((1, (-1, -1))))
    assert not iso_oracle(w2, a, lab((1, (Z4, 1))))
    assert not iso_oracle(w2, a, lab((2, (1, 1))))
    assert iso_oracle(w2, lab(), lab())


def test_iso_oracle_refuses_small_window(l1_windows):
    with pytest.raises(WindowTooSmall):
        iso_oracle(l1_windows[1], lab((1, (1, 1))), lab((1, (Z4, 1))))


POINTS = [(1, 1), (-1, 1), (1, -1), (Z4, Z4), (2, 1), (-2, -1)]


@st.composite
def sl2_labels(draw, max_weight=3, max_factors=2):
    # one entry per fiber: the points above fall into 3 fibers
    fibers = {}
    for p in POINTS:
        fibers.setdefault(tuple(c ** 2 for c in p), []).append(p)
    keys = sorted(fibers, key=str)
    chosen = draw(st.lists(st.sampled_from(keys), unique=True, max_size=max_factors))
    entries = []
    for k in chosen:
        p = draw(st.sampled_from(fibers[k]))
        entries.append((draw(st.integers(1, max_weight)), p))
    return lab(*entries)


@settings(max_examples=30)
@given(sl2_labels(), sl2_labels())
def test_oracle_agrees_with_decision(L1, w2, l1, l2):
    assert iso_decide(L1, l1, l2) == iso_oracle(w2, l1, l2)


@settings(max_examples=40)
@given(sl2_labels(), sl2_labels())
def test_pm_rule_agrees(L1, l1, l2):
    assert iso_decide(L1, l1, l2) == pm_rule(l1, l2)


@settings(max_examples=25)
@given(sl2_labels(), st.data())
def test_chi_invariance(L1, ext22, label, data):
    chi = chi_canonical(L1, label)
    moved = ModuleLabel(tuple(gamma_act_label(L1, data.draw(st.sampled_from(ext22.elements())), pr) for pr in label))
    assert chi_canonical(L1, moved) == chi
    assert chi_canonical(L1, label_from_chi(chi)) == chi


# -- enumeration -------------------------------------------------------------


def test_enumerate_examples(L1, ext22, sl3_flip):
    assert len(enumerate_classes(L1, fiber(ext22, TorusPoint((1, 1))), 2, 1)) == 3
    assert len(enumerate_classes(L1, [], 3)) == 1
    sl2 = make_sl(2)
    ident = check_auto(sl2, CycMatrix.identity(3))
    untw = multiloop_spec(sl2, [ident], standard_extension([1]))
    classes = enumerate_classes(untw, [TorusPoint((1,)), TorusPoint((-1,))], 1, 2)
    assert len(classes) == 4
    # Gamma trivial: every class is its own label
    assert all(sum(len(o) for o in c.orbits) == len(c.orbits) for c in classes)
    assert len(enumerate_classes(sl3_flip, [TorusPoint((1,)), TorusPoint((Z4,))], 1, 2)) == 16


def test_enumerate_brute_force(L1):
    # brute force: all labels over the points, deduplicated by iso_decide
    pts = [TorusPoint(p) for p in [(1, 1), (2, 1)]]
    found = enumerate_classes(L1, pts, 2)
    labels = [lab()]
    for k in (1, 2):
        for combo in itertools.combinations(pts, k):
            for ws in itertools.product([1, 2], repeat=k):
                labels.append(ModuleLabel(tuple(((w,), p) for w, p in zip(ws, combo))))
    reps = []
    for l in labels:
        if not any(iso_decide(L1, l, r) for r in reps):
            reps.append(l)
    assert len(found) == len(reps) == 9
    assert {chi_canonical(L1, r) for r in reps} == set(found)


def test_margaux_labels():
    form = margaux_spec()
    assert iso_decide(form, lab((1, (1, 1))), lab((1, (-1, 1))))
    assert len(enumerate_classes(form, [TorusPoint((1, 1))], 2)) == 3


# -- explicit modules --------------------------------------------------------


def _index_of(window, z):
    return window.basis.index(z)


def test_module_matrix_examples(w2):
    h_t2 = CurrentElem.homogeneous((0, 0, 1), (0, 1))
    j = _index_of(w2, h_t2)
    diag = CycMatrix([[1, 0], [0, -1]])
    I2 = CycMatrix.identity(2)
    mats = build_module_matrices(w2, lab((1, (1, 1))))
    assert mats[j] == diag
    mats = build_module_matrices(w2, lab((1, (1, 1)), (1, (Z4, Z4))))
    assert mats[j].shape == (4, 4)
    assert mats[j] == diag.kron(I2) + I2.kron(diag.scale(Z4))
    empty = build_module_matrices(w2, lab())
    assert all(m.shape == (1, 1) and m.is_zero() for m in empty)
    with pytest.raises(ValueError):
        sl3 = make_sl(3)
        w = multiloop_window(sl3, [diagram_flip(3)], standard_extension([2]), 0)
        build_module_matrices(w, lab())


@settings(max_examples=15)
@given(sl2_labels(max_weight=2), st.data())
def test_module_matrices_homomorphism(L1, w2, sl2, label, data):
    mats = build_module_matrices(w2, label)
    i = data.draw(st.integers(0, len(w2) - 1))
    j = data.draw(st.integers(0, len(w2) - 1))
    br = w2.basis[i].mul(sl2, w2.basis[j])
    lhs = build_module_matrices(FormWindow(w2.spec, w2.box, (br,)), label)[0]
    assert lhs == mats[i] @ mats[j] - mats[j] @ mats[i]


@pytest.mark.parametrize(
    "label",
    [lab((1, (1, 1))), lab((2, (1, 1)), (1, (Z4, Z4))), lab((1, (2, 1)), (1, (-1, Z4)))],
)
def test_kernel_consistency(w2, ext22, label):
    mats = build_module_matrices(w2, label)
    # joint kernel of z -> rho(z) over the window span
    flat = [[x for r in m.rows for x in r] for m in mats]
    cols = CycMatrix([list(col) for col in zip(*flat)], len(mats))
    combos = nullspace(cols)
    elems = []
    for c in combos:
        acc = CurrentElem(3, {})
        for z, x in zip(w2.basis, c):
            if x:
                acc = acc + z.scale(x)
        elems.append(acc)
    joint = WindowIdeal(w2, tuple(elems))
    pts = [b for _, p in label for b in fiber(ext22, p)]
    inter = eval_kernel_window(w2, pts)
    assert joint.same_span(inter)
    for _, p in label:
        assert psi_ideal_window(w2, fiber_key(ext22, p)).contains(joint)
