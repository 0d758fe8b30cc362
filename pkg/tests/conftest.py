import pytest
from hypothesis import settings
from hypothesis import strategies as st

from twistforms.algebra import conjugation_auto, make_sl
from twistforms.cyclo import CycNum, zeta
from twistforms.forms import multiloop_spec, multiloop_window
from twistforms.linalg import CycMatrix
from twistforms.torus import ExtensionSpec, TorusPoint

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

D_MAT = CycMatrix([[1, 0], [0, -1]])
X_MAT = CycMatrix([[0, 1], [1, 0]])


@pytest.fixture(scope="session")
def sl2():
    return make_sl(2)


@pytest.fixture(scope="session")
def sigmas(sl2):
    return conjugation_auto(sl2, D_MAT), conjugation_auto(sl2, X_MAT)


@pytest.fixture(scope="session")
def ext22():
    return ExtensionSpec(2, (2, 2), (-1, -1))


@pytest.fixture(scope="session")
def L1(sl2, sigmas, ext22):
    return multiloop_spec(sl2, sigmas, ext22)


@pytest.fixture(scope="session")
def l1_windows(sl2, sigmas, ext22):
    return {D: multiloop_window(sl2, sigmas, ext22, D) for D in (0, 1, 2, 3)}


# small cyclotomic numbers: integer combinations of powers of one root of unity
CONDUCTORS = [1, 2, 3, 4, 5, 6, 8, 12]


@st.composite
def cycnums(draw, conductors=CONDUCTORS, nonzero=False):
    n = draw(st.sampled_from(conductors))
    coeffs = draw(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=5), min_size=1, max_size=4))
    z = zeta(n)
    acc = CycNum.rational(0)
    p = CycNum.rational(1)
    for c in coeffs:
        acc = acc + p * c
        p = p * z
    if nonzero and not acc:
        acc = CycNum.rational(1)
    return acc


@st.composite
def torus_points(draw, num_vars=2, conductors=(1, 2, 3, 4, 8)):
    coords = []
    for _ in range(num_vars):
        n = draw(st.sampled_from(conductors))
        k = draw(st.integers(0, n - 1))
        scale = draw(st.sampled_from([1, 2, -3]))
        coords.append(zeta(n, k) * scale)
    return TorusPoint(coords)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
