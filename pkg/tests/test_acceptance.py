"""Acceptance criteria 1-10, each timed against its budget.

Every test records one PASS/FAIL line; the lines are printed together at the
end of the session (see conftest.pytest_terminal_summary).
"""

import itertools
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from twistforms.algebra import check_auto, conjugation_auto, graded_pieces, make_sl
from twistforms.cyclo import zeta
from twistforms.forms import (
    Box,
    CurrentElem,
    FormWindow,
    azumaya_relations,
    azumaya_to_sl2,
    azumaya_window,
    cocycle_spec,
    constant_cocycle,
    derived_window,
    eval_kernel_window,
    ev_point,
    j_map_window,
    mu_combine,
    mu_express_many,
    multiloop_spec,
    multiloop_window,
    psi_ideal_window,
    same_window_span,
    twisted_form_window,
)
from twistforms.linalg import CycMatrix, rank, same_span
from twistforms.reps import (
    ModuleLabel,
    decompose_auto,
    enumerate_classes,
    iso_decide,
    iso_oracle,
    pm_rule,
    recompose,
)
from twistforms.torus import (
    ExtensionSpec,
    TorusPoint,
    fiber,
    fiber_key,
    galois_act_point,
    standard_extension,
    vanishing_locus,
)

from conftest import D_MAT, X_MAT

pytestmark = pytest.mark.acceptance

RESULTS = {}
CONFIGS = Path(__file__).resolve().parent.parent / "configs"
Z4 = zeta(4)


def record(n, ok, t0, limit, detail=""):
    elapsed = time.perf_counter() - t0
    passed = bool(ok) and elapsed < limit
    line = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {elapsed:7.2f}s / {limit:g}s  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line
    assert elapsed < limit, line


def lab(*entries):
    return ModuleLabel(tuple(((w,), p) for w, p in entries))


def test_c01_grading(sl2, sigmas):
    t0 = time.perf_counter()
    gd = graded_pieces(sl2, sigmas, (-1, -1))
    dims = gd.dims()
    ok = dims == {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}
    ok &= same_span(gd.piece((0, 1)), [(0, 0, 1)], 3)
    ok &= same_span(gd.piece((1, 0)), [(1, 1, 0)], 3)
    ok &= same_span(gd.piece((1, 1)), [(1, -1, 0)], 3)
    record(1, ok, t0, 1, f"dims {[dims[k] for k in sorted(dims)]}, spans h, e+f, e-f")


def test_c02_two_paths(sl2, sigmas, ext22):
    t0 = time.perf_counter()
    L1 = multiloop_spec(sl2, sigmas, ext22)
    cs = cocycle_spec(sl2, ext22, constant_cocycle(ext22, sigmas))
    sizes = []
    ok = True
    for D in (1, 2, 3):
        a = multiloop_window(sl2, sigmas, ext22, D)
        b = twisted_form_window(cs, D)
        ok &= same_window_span(a, FormWindow(a.spec, b.box, b.basis))
        sizes.append(len(a))
    record(2, ok, t0, 10, f"window sizes {sizes}")


def test_c03_form_property(sl2, sigmas, ext22):
    t0 = time.perf_counter()
    w = multiloop_window(sl2, sigmas, ext22, 4)
    targets = [CurrentElem.homogeneous(v, e) for e in Box.cube(2, 2).degrees for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    res = mu_express_many(w, targets)
    fails = sum(r is None for r in res)
    ok = fails == 0 and all(mu_combine(w, r) == t for r, t in zip(res, targets))
    record(3, ok, t0, 30, f"{len(targets)} targets, {fails} failures")


def _ideal_checks(window, ext, points, extra):
    ok = True
    fibers = [fiber(ext, a) for a in points]
    candidates = sorted({b for F in fibers for b in F} | set(extra), key=TorusPoint.sort_key)
    for a, F in zip(points, fibers):
        I = psi_ideal_window(window, fiber_key(ext, a))
        K = eval_kernel_window(window, F)
        ok &= I.same_span(K)
        J = j_map_window(I)
        ok &= vanishing_locus(J, F) == F
        loc = set(vanishing_locus(J, candidates))
        ok &= all(galois_act_point(ext, g, b) in loc for b in loc for g in ext.elements())
    # nested unions F1 c F1+F2 c F1+F2+F3
    chain = [eval_kernel_window(window, sum(fibers[:k], [])) for k in (1, 2, 3)]
    loci = [set(vanishing_locus(j_map_window(I), candidates)) for I in chain]
    for k in range(2):
        ok &= chain[k].contains(chain[k + 1])
        ok &= loci[k] <= loci[k + 1]
    return ok


def test_c04_ideal_correspondence(sl2, sigmas, ext22):
    t0 = time.perf_counter()
    w = multiloop_window(sl2, sigmas, ext22, 2)
    pts = [TorusPoint(p) for p in [(1, 1), (Z4, Z4), (2, 1), (zeta(3), -1), (zeta(8), 3), (-2, zeta(5))]]
    ok = len({fiber_key(ext22, a) for a in pts}) >= 5
    ok &= _ideal_checks(w, ext22, pts, [TorusPoint((7, 7))])
    ident = check_auto(sl2, CycMatrix.identity(3))
    ext2 = standard_extension([2])
    u = cocycle_spec(sl2, ext2, constant_cocycle(ext2, (ident,)))
    w1 = twisted_form_window(u, 2)
    pts1 = [TorusPoint((c,)) for c in (1, 2, Z4, zeta(3), zeta(5), -3)]
    ok &= len({fiber_key(ext2, a) for a in pts1}) >= 5
    ok &= _ideal_checks(w1, ext2, pts1, [TorusPoint((11,))])
    record(4, ok, t0, 60, f"{len(pts)} fibers on L1, {len(pts1)} on untwisted m=2")


def test_c05_evaluation(sl2, sigmas, ext22):
    t0 = time.perf_counter()
    w = multiloop_window(sl2, sigmas, ext22, 2)
    rng = random.Random(20261015)
    ok = True
    for _ in range(10):
        coords = []
        for _ in range(2):
            n = rng.choice([1, 2, 3, 4, 5, 8, 12])
            coords.append(zeta(n, rng.randrange(n)) * rng.choice([1, 2, -3, 5]))
        a = TorusPoint(coords)
        ok &= rank([ev_point(z, a) for z in w.basis]) == 3
        ok &= eval_kernel_window(w, fiber(ext22, a)).same_span(psi_ideal_window(w, fiber_key(ext22, a)))
        ok &= eval_kernel_window(w, [a]).same_span(eval_kernel_window(w, fiber(ext22, a)))
    record(5, ok, t0, 10, "10 random points, rank 3, kernel = psi")


def test_c06_decision_vs_oracle(sl2, sigmas, ext22):
    t0 = time.perf_counter()
    L1 = multiloop_spec(sl2, sigmas, ext22)
    w = multiloop_window(sl2, sigmas, ext22, 2)
    signs = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    labels = [lab()]
    for p in signs + [(Z4, Z4)]:
        labels += [lab((a, p)) for a in (1, 2, 3)]
    for p in signs:
        labels += [lab((a, p), (b, (Z4, Z4))) for a in (1, 2, 3) for b in (1, 2, 3)]
    pairs = list(itertools.combinations_with_replacement(labels, 2))
    bad = sum(iso_decide(L1, x, y) != iso_oracle(w, x, y) for x, y in pairs)
    record(6, bad == 0, t0, 300, f"{len(labels)} labels, {len(pairs)} pairs, {bad} disagreements")


def test_c07_sign_rule(sl2, sigmas, ext22):
    t0 = time.perf_counter()
    L1 = multiloop_spec(sl2, sigmas, ext22)
    F = fiber(ext22, TorusPoint((1, 1)))
    labels = [lab()] + [ModuleLabel((((a,), p),)) for a in (1, 2, 3) for p in F]
    ok = all(iso_decide(L1, x, y) == pm_rule(x, y) for x in labels for y in labels)
    classes = enumerate_classes(L1, F, 3, 1)
    # hand count: the trivial module plus one class per weight on the single orbit
    ok &= len(classes) == 1 + 3
    record(7, ok, t0, 10, f"{len(labels)} labels, {len(classes)} classes")


def test_c08_inner_outer():
    t0 = time.perf_counter()
    ok = True
    for n, P in ((2, [[1, 1], [0, 1]]), (2, [[2, 0], [1, 1]]), (3, [[1, 2, 0], [0, 1, 0], [1, 0, 1]])):
        P = CycMatrix(P)
        alpha = conjugation_auto(make_sl(n), P, finite=False)
        dec = decompose_auto(n, alpha)
        g = dec.inner_witness
        ok &= dec.is_inner and recompose(n, dec) == alpha.matrix
        ok &= rank([[x for r in g.rows for x in r], [x for r in P.rows for x in r]]) == 1
    for n, inner in ((2, True), (3, False)):
        A = make_sl(n)
        c = A.coords_of_matrices([-(X.T) for X in A.natural])
        m = CycMatrix([[c[j][i] for j in range(A.dim)] for i in range(A.dim)], A.dim)
        dec = decompose_auto(n, m)
        ok &= dec.is_inner == inner and recompose(n, dec) == m
    record(8, ok, t0, 5, "conjugations inner, -x^T outer on sl3 only")


def test_c09_azumaya(sl2, sigmas):
    t0 = time.perf_counter()
    ext = ExtensionSpec(2, (2, 2), (-1, -1))
    ok = all(azumaya_relations().values())
    der = derived_window(azumaya_window(ext, 2))
    ml = multiloop_window(sl2, sigmas, ext, 2)
    mapped = FormWindow(ml.spec, ml.box, tuple(azumaya_to_sl2(z) for z in der.basis))
    ok &= same_window_span(ml, mapped)
    record(9, ok, t0, 30, f"derived dim {len(der)}, multiloop dim {len(ml)}")


JOBS = [
    ("build", "l1_multiloop.toml", ["--oracle"]),
    ("build", "l1_cocycle.json", []),
    ("verify-form", "l1_multiloop.toml", ["--window", "3"]),
    ("ideals", "l1_ideals.toml", []),
    ("classify", "l1_classify.json", ["--oracle"]),
    ("classify", "sl3_outer.toml", []),
    ("decompose-auto", "decompose.toml", []),
    ("azumaya-demo", "azumaya.toml", []),
]


def test_c10_determinism(tmp_path):
    t0 = time.perf_counter()
    ok = True
    for k, (cmd, conf, flags) in enumerate(JOBS):
        outs = []
        for rep in range(2):
            out = tmp_path / f"{k}_{rep}.json"
            proc = subprocess.run(
                [sys.executable, "-m", "twistforms", cmd, "--config", str(CONFIGS / conf), "--out", str(out)] + flags,
                capture_output=True,
                text=True,
            )
            ok &= proc.returncode == 0
            outs.append(out.read_bytes())
        ok &= outs[0] == outs[1]
    record(10, ok, t0, 300, f"{len(JOBS)} command/config jobs run twice, byte-identical")
