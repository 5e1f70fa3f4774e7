"""Scan the van der Waals Hessian determinant along an isentrope.

Prints a (V, det) table and the bisected spinodal location.  The sign change
marks the loss of local stability of the constitutive potential.
"""
import argparse

import numpy as np

from thermoform.processes import godograph_det, spinodal_scan
from thermoform.vdw import vdw_potential


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=0.1)
    ap.add_argument("--r", type=float, default=1.0)
    ap.add_argument("--cv", type=float, default=1.5)
    ap.add_argument("--entropy", type=float, default=0.0, help="S value of the isentrope")
    ap.add_argument("--vmin", type=float, default=0.15)
    ap.add_argument("--vmax", type=float, default=3.0)
    ap.add_argument("--n", type=int, default=40)
    args = ap.parse_args()

    u = vdw_potential(a=args.a, b=args.b, R=args.r, c_V=args.cv)
    print(f"{'V':>10}  {'det Hess U':>14}")
    for v in np.linspace(args.vmin, args.vmax, args.n):
        d = godograph_det(u, {"S": args.entropy, "V": float(v)})
        print(f"{v:10.4f}  {d:14.6e}")

    roots = spinodal_scan(u, "V", args.vmin, args.vmax, {"S": args.entropy}, xtol=1e-6)
    if roots:
        for r in roots:
            print(f"spinodal at V = {r:.6f} (S = {args.entropy})")
    else:
        print("no sign change in the scanned window")


if __name__ == "__main__":
    main()
