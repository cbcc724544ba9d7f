"""Tabulate the Lorentzian pre-limit integral against the closed-form xi.

    python scripts/xi_convergence.py --p 0.5 --m 1 --beta 1 --eta 1
"""

import argparse

from qubit_resonance import FormFactor, ReservoirSpec, xi, xi_extrapolated, xi_lorentzian


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--eta", type=float, default=1.0)
    args = ap.parse_args()

    ff, res = FormFactor(args.p, args.m), ReservoirSpec(args.beta)
    target = xi(ff, res, args.eta)
    print(f"closed form xi = {target:.12e}")
    for k in range(1, 6):
        eps = 10.0**-k
        val = xi_lorentzian(ff, res, args.eta, eps)
        rel = abs(val - target) / target if target else abs(val)
        print(f"eps = 1e-{k}: {val:.12e}  deviation {rel:.3e}")
    ex = xi_extrapolated(ff, res, args.eta)
    rel = abs(ex - target) / target if target else abs(ex)
    print(f"extrapolated:  {ex:.12e}  deviation {rel:.3e}")


if __name__ == "__main__":
    main()
