"""Compare oracle coherence decay rates with the second-order prediction.

Fits -log|rho12| over [2/tau', T_rec/2] (the default window) and also over
the whole pre-recurrence interval [0, T_rec/2], for a list of couplings.

    python scripts/rate_validation.py --lambdas 0.05 0.1 --M 5 --n-max 3
"""

import argparse
import math

import numpy as np

from qubit_resonance import FormFactor, IllustrationCoherent, QubitSystem, ReservoirSpec, qubit_resonances
from qubit_resonance.bath_oracle import OracleRun, calibrate_rate_normalization, default_fit_window, fit_decay_rate


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.05, 0.1])
    ap.add_argument("--M", type=int, default=5)
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--omega-max", type=float, default=6.0)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args()

    ff, res = FormFactor(0.5, 1), ReservoirSpec(args.beta)
    q = QubitSystem(1.0, c=1.0)
    kappa = calibrate_rate_normalization()
    print(f"kappa = {kappa:.8f} (kappa/pi = {kappa / math.pi:.7f})")
    print("lambda  Im_epsDelta   rate(window)  ratio   rate(full)  ratio")
    prev = None
    for lam in args.lambdas:
        run = OracleRun.prepare(q, ff, res, lam, IllustrationCoherent(), args.M, args.n_max, args.omega_max)
        rs = qubit_resonances(q, ff, res, lam)
        window = default_fit_window(run.bath, rs.strip_tau_prime)
        full = (0.0, window[1])
        series = run.series(np.linspace(0.0, window[1], args.points))
        r_win = fit_decay_rate(series, window, "coherence", max_rel_residual=1.0)
        r_full = fit_decay_rate(series, full, "coherence", max_rel_residual=1.0)
        target = rs.epsDelta.imag
        print(
            f"{lam:<7g} {target:.6e}  {r_win:.6e}  {kappa * r_win / target:.4f}  "
            f"{r_full:.6e}  {kappa * r_full / target:.4f}"
        )
        if prev is not None:
            print(f"        rate ratio vs previous lambda: {r_win / prev:.4f}")
        prev = r_win


if __name__ == "__main__":
    main()
