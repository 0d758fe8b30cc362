#!/usr/bin/env python3
"""Small walk through the L1 example: window, ideals at a point, and the
isomorphism classes of simple modules supported on one fiber."""

import argparse

from twistforms.algebra import conjugation_auto, make_sl
from twistforms.config import chi_to_json
from twistforms.forms import eval_kernel_window, multiloop_spec, multiloop_window, psi_ideal_window
from twistforms.linalg import CycMatrix
from twistforms.reps import ModuleLabel, enumerate_classes, iso_decide, iso_oracle
from twistforms.torus import ExtensionSpec, TorusPoint, fiber, fiber_key


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=int, default=2)
    ap.add_argument("--max-weight", type=int, default=2)
    args = ap.parse_args()

    sl2 = make_sl(2)
    s1 = conjugation_auto(sl2, CycMatrix([[1, 0], [0, -1]]))
    s2 = conjugation_auto(sl2, CycMatrix([[0, 1], [1, 0]]))
    ext = ExtensionSpec(2, (2, 2), (-1, -1))
    L1 = multiloop_spec(sl2, [s1, s2], ext)
    w = multiloop_window(sl2, [s1, s2], ext, args.radius)
    print(f"window radius {args.radius}: {len(w)} basis elements")

    a = TorusPoint((1, 1))
    ideal = psi_ideal_window(w, fiber_key(ext, a))
    kernel = eval_kernel_window(w, fiber(ext, a))
    print(f"ideal at {a}: codim {ideal.codim}, equals evaluation kernel: {ideal.same_span(kernel)}")

    l1 = ModuleLabel((((3,), (1, 1)),))
    l2 = ModuleLabel((((3,), (-1, -1)),))
    print("V(3,(1,1)) ~ V(3,(-1,-1)):", iso_decide(L1, l1, l2), "oracle:", iso_oracle(w, l1, l2))

    classes = enumerate_classes(L1, fiber(ext, a), args.max_weight, 1)
    print(f"{len(classes)} classes on the fiber of {a} with weight <= {args.max_weight}:")
    for c in classes:
        print("  ", chi_to_json(c))


if __name__ == "__main__":
    main()
