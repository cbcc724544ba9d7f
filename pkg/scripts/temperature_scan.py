"""Report xi(Delta) and xi(0) against temperature at fixed gap.

xi(Delta) grows linearly in T at high temperature (coth(beta Delta / 2) ~
2T/Delta); the script prints the ratio xi(Delta) / T so the trend is visible.

    python scripts/temperature_scan.py --Delta 1 --p -0.5
"""

import argparse

import numpy as np

from qubit_resonance import FormFactor, ReservoirSpec, xi


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--Delta", type=float, default=1.0)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--m", type=int, default=1)
    args = ap.parse_args()

    ff = FormFactor(args.p, args.m)
    print("T          xi(Delta)       xi(Delta)/T     xi(0)")
    for T in np.geomspace(0.1, 1000, 9):
        res = ReservoirSpec(1.0 / T)
        xd = xi(ff, res, args.Delta)
        print(f"{T:<10.4g} {xd:.8e}  {xd / T:.8e}  {xi(ff, res, 0.0):.8e}")


if __name__ == "__main__":
    main()
