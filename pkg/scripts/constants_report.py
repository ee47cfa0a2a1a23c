"""Print every lattice normalization constant next to its closed form.

With --ledger the per-subset contribution table is dumped as well, which is
the fastest way to see where each constant's mass comes from (the pair
subsets carry most of it on the square lattice).
"""

import argparse
import math

from fgfflab.constants import (
    constant_for,
    height_one_infinite_z2,
    square_degeneration_constant,
    triangular_height_one_infinite,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ledger", action="store_true", help="dump subset terms")
    args = ap.parse_args()

    print(f"{'kind':<16}{'value':<24}{'closed form':<24}{'delta'}")
    for kind in ("z2", "z3", "z4", "tri"):
        res = constant_for(kind)
        closed = "" if res.closed_form is None else f"{res.closed_form:.16f}"
        delta = "" if res.closed_form is None else f"{res.value - res.closed_form:.1e}"
        print(f"{res.kind:<16}{res.value:<24.16f}{closed:<24}{delta}")
        if args.ledger:
            for t in res.subset_terms:
                subset = "+".join(str(s) for s in t["subset"])
                print(f"    {subset:<14}size {t['size']}  "
                      f"contribution {t['contribution']:+.10f}")

    degen = square_degeneration_constant()
    print(f"{'z2-degenerate':<16}{degen.value:<24.16f}"
          f"{degen.closed_form:<24.16f}{degen.value - degen.closed_form:.1e}")

    single = float(height_one_infinite_z2())
    target = 2 / math.pi**2 - 4 / math.pi**3
    print(f"{'z2 single site':<16}{single:<24.16f}{target:<24.16f}"
          f"{single - target:.1e}")
    print(f"{'tri single site':<16}{triangular_height_one_infinite():<24.16f}")


if __name__ == "__main__":
    main()
