"""Command-line front end.

    qubit-resonance resonances --config run.toml
    qubit-resonance evolve --config run.toml --out rho.csv
    qubit-resonance oracle --config run.toml --compare
    qubit-resonance sweep --config run.toml --jobs 4
    qubit-resonance xi --config run.toml
    qubit-resonance spinboson --config run.toml

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .bath_oracle import (
    OracleRun,
    calibrate_rate_normalization,
    default_fit_window,
    dephasing_factor,
    fit_decay_rate,
)
from .config import RunConfig, load_config
from .dynamics import LEADING_ORDER, ORACLE, TimeSeries, time_series
from .errors import IllConditionedFit, NumericalFailure, RecurrenceViolation, ValidationError
from .output import Table, write_table
from .resonance import fermi_golden_rule_holds, qubit_resonances, timescales
from .spectral_density import xi
from .system_model import spin_boson_to_qubit

RESONANCE_COLUMNS = [
    "Delta", "a", "b", "re_c", "im_c", "lambda", "beta",
    "re_eps0", "im_eps0", "re_epsDelta", "im_epsDelta", "re_epsMinusDelta", "im_epsMinusDelta",
    "R", "D", "xi0", "xiDelta", "tau_T", "tau_D", "gamma", "fgr",
]  # fmt: skip
SERIES_COLUMNS = ["t", "rho11", "rho22", "re_rho12", "im_rho12", "abs_rho12"]


def resonance_record(cfg: RunConfig) -> list:
    q = cfg.system
    ff, res = cfg.form_factor, cfg.reservoir
    rs = qubit_resonances(q, ff, res, cfg.lam, cfg.strip_tau_prime)
    ts = timescales(rs)
    c = complex(q.c)
    return [
        q.Delta, q.a, q.b, c.real, c.imag, cfg.lam, res.beta,
        rs.eps0.real, rs.eps0.imag, rs.epsDelta.real, rs.epsDelta.imag,
        rs.epsMinusDelta.real, rs.epsMinusDelta.imag,
        rs.lamb_shift, rs.rate_difference, xi(ff, res, 0.0), xi(ff, res, q.Delta),
        ts.tau_T, ts.tau_D, ts.gamma, fermi_golden_rule_holds(q, ff, res),
    ]  # fmt: skip


def cmd_resonances(cfg: RunConfig) -> Table:
    return Table(list(RESONANCE_COLUMNS), [resonance_record(cfg)], LEADING_ORDER)


def _series_rows(series: TimeSeries) -> list:
    rows = []
    for t, s in zip(series.times, series.states):
        r12 = complex(s.rho12)
        rows.append([float(t), float(s.rho11.real), float(s.rho22.real), r12.real, r12.imag, abs(r12)])
    return rows


def cmd_evolve(cfg: RunConfig) -> Table:
    q = cfg.system
    rs = qubit_resonances(q, cfg.form_factor, cfg.reservoir, cfg.lam, cfg.strip_tau_prime)
    series = time_series(cfg.initial_state, rs, q.Delta, cfg.reservoir.beta, cfg.time.points())
    meta = {"initial_state": type(cfg.initial_state).__name__, "lambda": cfg.lam, "beta": cfg.reservoir.beta}
    return Table(list(SERIES_COLUMNS), _series_rows(series), LEADING_ORDER, meta)


def _try_rate(series: TimeSeries, window, channel: str):
    try:
        return fit_decay_rate(series, window, channel)
    except IllConditionedFit as exc:
        return f"n/a ({exc})"


def cmd_oracle(cfg: RunConfig, compare: bool = False) -> Table:
    q = cfg.system
    o = cfg.oracle
    run = OracleRun.prepare(
        q, cfg.form_factor, cfg.reservoir, cfg.lam, cfg.initial_state, o.M, o.n_max, o.omega_max, o.budget
    )
    times = cfg.time.points()
    series = run.series(times)
    columns = list(SERIES_COLUMNS)
    rows = _series_rows(series)
    meta = {
        "M": o.M,
        "n_max": o.n_max,
        "omega_max": o.omega_max,
        "dim": run.fock.dim,
        "recurrence_time": run.bath.recurrence_time,
    }
    if not compare:
        return Table(columns, rows, ORACLE, meta)

    rs = qubit_resonances(q, cfg.form_factor, cfg.reservoir, cfg.lam, cfg.strip_tau_prime)
    window = o.fit_window or default_fit_window(run.bath, cfg.tau_prime)
    # refuse bad windows before the (possibly long) fitting run
    if window[1] > 0.5 * run.bath.recurrence_time * (1 + 1e-12):
        raise RecurrenceViolation(window[1], run.bath.recurrence_time)
    fit_series = run.series(np.linspace(window[0], window[1], o.fit_points))
    kappa = calibrate_rate_normalization(beta=1.0)
    meta.update(
        {
            "fit_t1": window[0],
            "fit_t2": window[1],
            "kappa": kappa,
            "im_epsDelta": rs.epsDelta.imag,
            "im_eps0": rs.eps0.imag,
        }
    )
    for channel, key in (("coherence", "coherence"), ("population", "population")):
        rate = _try_rate(fit_series, window, channel)
        meta[f"{key}_rate"] = rate
        if isinstance(rate, float):
            meta[f"{key}_rate_calibrated"] = rate * kappa

    try:
        lead = time_series(cfg.initial_state, rs, q.Delta, cfg.reservoir.beta, times)
    except ValidationError:
        lead = None
    if lead is not None:
        columns += ["lo_rho11", "lo_abs_rho12"]
        for row, s in zip(rows, lead.states):
            row += [float(s.rho11.real), abs(complex(s.rho12))]
    if q.c == 0:
        f = dephasing_factor(q, run.bath, cfg.reservoir.beta, cfg.lam, times, n_max=o.n_max)
        ref = run.initial.rho12 * f
        columns += ["ref_re_rho12", "ref_im_rho12"]
        for row, z in zip(rows, ref):
            row += [float(z.real), float(z.imag)]
    return Table(columns, rows, ORACLE, meta)


def cmd_xi(cfg: RunConfig) -> Table:
    rows = [[float(e), xi(cfg.form_factor, cfg.reservoir, float(e))] for e in cfg.eta_grid.points()]
    meta = {"p": cfg.form_factor.p, "m": cfg.form_factor.m, "beta": cfg.reservoir.beta}
    return Table(["eta", "xi"], rows, LEADING_ORDER, meta)


def cmd_spinboson(cfg: RunConfig) -> Table:
    sb = cfg.spin_boson
    if sb is None:
        raise ValidationError("spinboson needs a [spin_boson] section", "spin_boson")
    q = spin_boson_to_qubit(sb, cfg.sb_convention)
    rot = spin_boson_to_qubit(sb, "rotated")
    c = complex(q.c)
    row = [sb.epsilon_bias, sb.Delta0, sb.hbar, cfg.sb_convention, q.Delta, q.a, q.b, c.real, c.imag, abs(rot.c)]
    columns = ["epsilon", "Delta0", "hbar", "convention", "Delta", "a", "b", "re_c", "im_c", "abs_c_rotated"]
    return Table(columns, [row], LEADING_ORDER)


def _sweep_point(args):
    cfg, names, values = args
    for name, value in zip(names, values):
        cfg = cfg.with_parameter(name, value)
    return list(values) + resonance_record(cfg)


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> Table:
    names = list(cfg.sweep)
    columns = [f"sweep_{n}" for n in names] + list(RESONANCE_COLUMNS)
    points = list(itertools.product(*(cfg.sweep[n] for n in names))) if names else []
    tasks = [(cfg, names, p) for p in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map preserves input order, so output is independent of scheduling
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    return Table(columns, rows, LEADING_ORDER)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubit-resonance",
        description="Resonance-expansion dynamics of a qubit in a thermal bosonic reservoir.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "resonances": "resonance energies, R, D and timescales as one record",
        "evolve": "leading-order reduced density matrix on the time grid",
        "oracle": "finite-mode exact-diagonalization series",
        "sweep": "cartesian parameter sweep of the resonance record",
        "xi": "tabulate xi over the eta grid",
        "spinboson": "print the spin-boson (Delta, a, b, c) map",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, metavar="PATH", help="TOML run configuration")
        p.add_argument("--out", metavar="PATH", help="output file (default: [output].path or stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="override [output].format")
        p.add_argument("--quiet", action="store_true", help="suppress diagnostics on stderr")
        if name == "oracle":
            p.add_argument("--compare", action="store_true", help="add leading-order columns and fitted rates")
        if name == "sweep":
            p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    return parser


def _dispatch(args, cfg: RunConfig) -> Table:
    if args.command == "resonances":
        return cmd_resonances(cfg)
    if args.command == "evolve":
        return cmd_evolve(cfg)
    if args.command == "oracle":
        return cmd_oracle(cfg, compare=args.compare)
    if args.command == "sweep":
        if args.jobs < 1:
            raise ValidationError("must be >= 1", "--jobs")
        return cmd_sweep(cfg, jobs=args.jobs)
    if args.command == "xi":
        return cmd_xi(cfg)
    return cmd_spinboson(cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    def say(msg: str):
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        cfg = load_config(args.config)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = _dispatch(args, cfg)
        for w in caught:
            say(f"warning: {w.message}")
        fmt = args.format or cfg.output_format
        path = args.out or cfg.output_path
        write_table(table, fmt, path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if path is not None:
        say(f"wrote {len(table.rows)} row(s) to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
