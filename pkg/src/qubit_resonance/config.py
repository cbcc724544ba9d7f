"""Run configuration: a versioned TOML schema, validated in one pass.

Schema version 1 (``[section] key = default``; sections marked * are required)::

    schema_version = 1

    [form_factor]            p = 0.5, m = 1, angular_norm = "isotropic" | float
    [reservoir]*             beta
    [qubit]                  Delta, a = 0, b = 0, c = 0 (real or [re, im])
    [spin_boson]             epsilon, Delta0, hbar = 1, convention = "published" | "rotated"
    [coupling]*              lambda, strip_tau_prime = pi / beta
    [initial_state]          tag = "illustration" | "logic1" | "logic2" | "custom_diagonal", q
    [time]                   t_start = 0, t_end = 10, steps = 101
    [eta_grid]               start = 0, end = 5, steps = 51
    [oracle]                 M = 5, n_max = 3, omega_max = 6, budget = 4096,
                             fit_window = [t1, t2], fit_points = 200
    [output]                 format = "csv" | "json", path
    [sweep]                  lambda | beta | Delta | epsilon = [values, ...]

Exactly one of ``[qubit]`` and ``[spin_boson]`` must be present.  Unknown
sections and keys are errors.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import tomli

from .dynamics import CustomDiagonal, IllustrationCoherent, InitialState, LogicState
from .errors import ParseError, ValidationError
from .spectral_density import FormFactor, ReservoirSpec
from .system_model import QubitSystem, SpinBosonParams, spin_boson_to_qubit

SCHEMA_VERSION = 1
SWEEPABLE = ("lambda", "beta", "Delta", "epsilon")
_INIT_TAGS = ("illustration", "logic1", "logic2", "custom_diagonal")

_SECTIONS = {
    "form_factor": {"p", "m", "angular_norm"},
    "reservoir": {"beta"},
    "qubit": {"Delta", "a", "b", "c"},
    "spin_boson": {"epsilon", "Delta0", "hbar", "convention"},
    "coupling": {"lambda", "strip_tau_prime"},
    "initial_state": {"tag", "q"},
    "time": {"t_start", "t_end", "steps"},
    "eta_grid": {"start", "end", "steps"},
    "oracle": {"M", "n_max", "omega_max", "budget", "fit_window", "fit_points"},
    "output": {"format", "path"},
    "sweep": set(SWEEPABLE),
}


@dataclass(frozen=True)
class Grid:
    start: float
    end: float
    steps: int

    def points(self):
        import numpy as np

        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.end, self.steps)


@dataclass(frozen=True)
class OracleConfig:
    M: int = 5
    n_max: int = 3
    omega_max: float = 6.0
    budget: int = 4096
    fit_window: Optional[Tuple[float, float]] = None
    fit_points: int = 200


@dataclass(frozen=True)
class RunConfig:
    form_factor: FormFactor
    reservoir: ReservoirSpec
    qubit: Optional[QubitSystem]
    spin_boson: Optional[SpinBosonParams]
    lam: float
    strip_tau_prime: Optional[float] = None
    sb_convention: str = "published"
    initial_state: InitialState = IllustrationCoherent()
    time: Grid = Grid(0.0, 10.0, 101)
    eta_grid: Grid = Grid(0.0, 5.0, 51)
    oracle: OracleConfig = OracleConfig()
    output_format: str = "csv"
    output_path: Optional[str] = None
    sweep: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def system(self) -> QubitSystem:
        if self.qubit is not None:
            return self.qubit
        return spin_boson_to_qubit(self.spin_boson, self.sb_convention)

    @property
    def tau_prime(self) -> float:
        return self.strip_tau_prime if self.strip_tau_prime is not None else math.pi / self.reservoir.beta

    def with_parameter(self, name: str, value: float) -> "RunConfig":
        """Copy with one sweepable parameter replaced."""
        if name == "lambda":
            return dataclasses.replace(self, lam=float(value))
        if name == "beta":
            return dataclasses.replace(self, reservoir=ReservoirSpec(float(value)))
        if name == "Delta":
            if self.qubit is None:
                raise ValidationError("sweeping Delta needs a [qubit] section", "sweep.Delta")
            return dataclasses.replace(self, qubit=dataclasses.replace(self.qubit, Delta=float(value)))
        if name == "epsilon":
            if self.spin_boson is None:
                raise ValidationError("sweeping epsilon needs a [spin_boson] section", "sweep.epsilon")
            sb = dataclasses.replace(self.spin_boson, epsilon_bias=float(value))
            return dataclasses.replace(self, spin_boson=sb)
        raise ValidationError(f"cannot sweep {name!r}", f"sweep.{name}")


def _number(sec: dict, key: str, path: str, default=None, required=False) -> Optional[float]:
    if key not in sec:
        if required:
            raise ValidationError("required field is missing", f"{path}.{key}")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"expected a number, got {v!r}", f"{path}.{key}")
    if not math.isfinite(v):
        raise ValidationError(f"expected a finite number, got {v!r}", f"{path}.{key}")
    return float(v)


def _integer(sec: dict, key: str, path: str, default: int, minimum: int) -> int:
    v = sec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"expected an integer, got {v!r}", f"{path}.{key}")
    if v < minimum:
        raise ValidationError(f"must be >= {minimum}, got {v}", f"{path}.{key}")
    return v


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ValidationError("expected a table", name)
    unknown = sorted(set(sec) - _SECTIONS[name])
    if unknown:
        raise ValidationError(f"unknown key(s) {', '.join(unknown)}", name)
    return sec


def _reraise(path: str, exc: ValidationError):
    inner = exc.path
    full = f"{path}.{inner}" if inner else path
    msg = str(exc).split(": ", 1)[1] if inner else str(exc)
    raise type(exc)(msg, full) if type(exc) is ValidationError else ValidationError(msg, full)


def _grid(doc: dict, name: str, default: Grid, keys=("start", "end", "steps")) -> Grid:
    sec = _section(doc, name)
    start = _number(sec, keys[0], name, default.start)
    end = _number(sec, keys[1], name, default.end)
    steps = _integer(sec, keys[2], name, default.steps, 0)
    if steps > 1 and not end > start:
        raise ValidationError(f"must exceed {keys[0]} ({start})", f"{name}.{keys[1]}")
    return Grid(start, end, steps)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from None

    unknown = sorted(set(doc) - set(_SECTIONS) - {"schema_version"})
    if unknown:
        raise ValidationError(f"unknown section(s) {', '.join(unknown)}", "<root>")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {version!r}", "schema_version")

    sec = _section(doc, "form_factor")
    p = _number(sec, "p", "form_factor", 0.5)
    m = sec.get("m", 1)
    norm = sec.get("angular_norm", "isotropic")
    if norm == "isotropic":
        norm = None
    elif isinstance(norm, bool) or not isinstance(norm, (int, float)):
        raise ValidationError('expected "isotropic" or a positive number', "form_factor.angular_norm")
    try:
        ff = FormFactor(p=p, m=m, angular_norm=norm)
    except ValidationError as exc:
        _reraise("form_factor", exc)

    if "reservoir" not in doc:
        raise ValidationError("required section is missing", "reservoir")
    sec = _section(doc, "reservoir")
    beta = _number(sec, "beta", "reservoir", required=True)
    if not beta > 0:
        raise ValidationError(f"must be > 0, got {beta}", "reservoir.beta")
    res = ReservoirSpec(beta)

    has_q, has_sb = "qubit" in doc, "spin_boson" in doc
    if has_q == has_sb:
        raise ValidationError("exactly one of [qubit] and [spin_boson] is required", "qubit|spin_boson")
    qubit = sb = None
    convention = "published"
    if has_q:
        sec = _section(doc, "qubit")
        c = sec.get("c", 0.0)
        if isinstance(c, list):
            if len(c) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in c):
                raise ValidationError("expected a number or [re, im]", "qubit.c")
            c = complex(c[0], c[1])
        elif isinstance(c, bool) or not isinstance(c, (int, float)):
            raise ValidationError("expected a number or [re, im]", "qubit.c")
        try:
            qubit = QubitSystem(
                Delta=_number(sec, "Delta", "qubit", required=True),
                a=_number(sec, "a", "qubit", 0.0),
                b=_number(sec, "b", "qubit", 0.0),
                c=c,
            )
        except ValidationError as exc:
            _reraise("qubit", exc)
    else:
        sec = _section(doc, "spin_boson")
        convention = sec.get("convention", "published")
        if convention not in ("published", "rotated"):
            raise ValidationError('expected "published" or "rotated"', "spin_boson.convention")
        try:
            sb = SpinBosonParams(
                epsilon_bias=_number(sec, "epsilon", "spin_boson", required=True),
                Delta0=_number(sec, "Delta0", "spin_boson", required=True),
                hbar=_number(sec, "hbar", "spin_boson", 1.0),
            )
        except ValidationError as exc:
            _reraise("spin_boson", exc)

    if "coupling" not in doc:
        raise ValidationError("required section is missing", "coupling")
    sec = _section(doc, "coupling")
    lam = _number(sec, "lambda", "coupling", required=True)
    tau_prime = _number(sec, "strip_tau_prime", "coupling")
    if tau_prime is not None and not 0 < tau_prime < 2 * math.pi / beta:
        raise ValidationError("must lie in (0, 2 pi / beta)", "coupling.strip_tau_prime")

    sec = _section(doc, "initial_state")
    tag = sec.get("tag", "illustration")
    if tag not in _INIT_TAGS:
        raise ValidationError(f"unknown tag {tag!r}; expected one of {', '.join(_INIT_TAGS)}", "initial_state.tag")
    if "q" in sec and tag != "custom_diagonal":
        raise ValidationError("only allowed with tag = custom_diagonal", "initial_state.q")
    if tag == "illustration":
        init = IllustrationCoherent()
    elif tag == "logic1":
        init = LogicState(1)
    elif tag == "logic2":
        init = LogicState(2)
    else:
        qv = _number(sec, "q", "initial_state", required=True)
        try:
            init = CustomDiagonal(qv)
        except ValidationError as exc:
            _reraise("initial_state", exc)

    time = _grid(doc, "time", Grid(0.0, 10.0, 101), keys=("t_start", "t_end", "steps"))
    if time.start < 0:
        raise ValidationError("must be >= 0", "time.t_start")
    eta = _grid(doc, "eta_grid", Grid(0.0, 5.0, 51))
    if eta.start < 0:
        raise ValidationError("must be >= 0", "eta_grid.start")

    sec = _section(doc, "oracle")
    window = sec.get("fit_window")
    if window is not None:
        if (
            not isinstance(window, list)
            or len(window) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in window)
            or not 0 <= window[0] < window[1]
        ):
            raise ValidationError("expected [t1, t2] with 0 <= t1 < t2", "oracle.fit_window")
        window = (float(window[0]), float(window[1]))
    oracle = OracleConfig(
        M=_integer(sec, "M", "oracle", 5, 1),
        n_max=_integer(sec, "n_max", "oracle", 3, 1),
        omega_max=_number(sec, "omega_max", "oracle", 6.0),
        budget=_integer(sec, "budget", "oracle", 4096, 2),
        fit_window=window,
        fit_points=_integer(sec, "fit_points", "oracle", 200, 3),
    )
    if not oracle.omega_max > 0:
        raise ValidationError("must be > 0", "oracle.omega_max")

    sec = _section(doc, "output")
    fmt = sec.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError('expected "csv" or "json"', "output.format")
    path = sec.get("path")
    if path is not None and not isinstance(path, str):
        raise ValidationError("expected a string", "output.path")

    sec = _section(doc, "sweep")
    sweep: Dict[str, List[float]] = {}
    for key, values in sec.items():
        if not isinstance(values, list):
            raise ValidationError("expected a list of numbers", f"sweep.{key}")
        sweep[key] = [_number({key: v}, key, "sweep") for v in values]
    if "Delta" in sweep and qubit is None:
        raise ValidationError("sweeping Delta needs a [qubit] section", "sweep.Delta")
    if "epsilon" in sweep and sb is None:
        raise ValidationError("sweeping epsilon needs a [spin_boson] section", "sweep.epsilon")
    if any(v <= 0 for v in sweep.get("beta", [])):
        raise ValidationError("values must be > 0", "sweep.beta")
    if any(v <= 0 for v in sweep.get("Delta", [])):
        raise ValidationError("values must be > 0", "sweep.Delta")

    return RunConfig(
        form_factor=ff,
        reservoir=res,
        qubit=qubit,
        spin_boson=sb,
        lam=lam,
        strip_tau_prime=tau_prime,
        sb_convention=convention,
        initial_state=init,
        time=time,
        eta_grid=eta,
        oracle=oracle,
        output_format=fmt,
        output_path=path,
        sweep=sweep,
    )


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc}") from None
    return parse_config(text)
