"""Run configuration: one JSON file drives a whole experiment.

The schema is validated before any computation; unknown keys are rejected so
a typo cannot silently fall back to a default. This module stays numpy-free:
the CLI applies the `threads` key to the BLAS environment before the numeric
modules load.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .exceptions import ConfigError

__all__ = [
    "TrotterSection",
    "AnsatzSection",
    "DataSection",
    "TrainSection",
    "EvalSection",
    "BoundsSection",
    "RunConfig",
    "load_config",
    "config_from_dict",
]

_MODELS = ("XY", "HEISENBERG")
_KINDS = ("GIVENS", "SYM")
_SOURCES = ("HAAR1", "STABILIZER", "HAAR_N")
_COST_KINDS = ("EMP_GLOBAL", "EMP_LOCAL")
_OPTIMIZERS = ("ADAM", "GD")
_REFERENCES = ("TROTTER", "EXACT", "BOTH")


@dataclass(frozen=True)
class TrotterSection:
    order: int = 2
    r: int = 1
    dt: float = 0.1


@dataclass(frozen=True)
class AnsatzSection:
    kind: str | None = None  # default chosen by model
    layers: int | None = None  # default ceil(1.5 n)


@dataclass(frozen=True)
class DataSection:
    source: str = "HAAR1"
    N: int = 1
    seed: int = 0


@dataclass(frozen=True)
class TrainSection:
    optimizer: str = "ADAM"
    rate: float = 0.05
    target_cost: float = 1e-8
    cost_kind: str = "EMP_GLOBAL"
    max_iters: int = 20000
    seed: int = 0
    restarts: int = 8


@dataclass(frozen=True)
class EvalSection:
    M_max: int = 100
    reference: str = "BOTH"
    substeps: int = 1


@dataclass(frozen=True)
class BoundsSection:
    delta: float = 0.05
    gen_constant: float = 1.0
    M0: int = 10
    eps_target: float = 0.01


@dataclass(frozen=True)
class RunConfig:
    model: str = "XY"
    n: int = 4
    periodic: bool = False
    trotter: TrotterSection = field(default_factory=TrotterSection)
    ansatz: AnsatzSection = field(default_factory=AnsatzSection)
    data: DataSection = field(default_factory=DataSection)
    train: TrainSection = field(default_factory=TrainSection)
    eval: EvalSection = field(default_factory=EvalSection)
    bounds: BoundsSection = field(default_factory=BoundsSection)
    threads: int | None = None

    @property
    def ansatz_kind(self) -> str:
        if self.ansatz.kind is not None:
            return self.ansatz.kind
        return "GIVENS" if self.model == "XY" else "SYM"

    @property
    def ansatz_layers(self) -> int:
        if self.ansatz.layers is not None:
            return self.ansatz.layers
        return -(-3 * self.n // 2)  # ceil(1.5 n)

    def to_dict(self) -> dict:
        return asdict(self)


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _typed(section: str, raw: dict, key: str, types, default, choices=None, optional=False):
    if key not in raw:
        return default
    val = raw[key]
    if optional and val is None:
        return None
    if types is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    _check(isinstance(val, types) and not isinstance(val, bool) or types is bool,
           f"{section}.{key}: expected {types}, got {type(val).__name__}")
    if choices is not None:
        _check(val in choices, f"{section}.{key}: {val!r} not in {choices}")
    return val


def _reject_unknown(section: str, raw: dict, known: tuple) -> None:
    unknown = set(raw) - set(known)
    _check(not unknown, f"unknown key(s) in {section}: {sorted(unknown)}")


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    _check(isinstance(sec, dict), f"{name} must be an object")
    return sec


def config_from_dict(raw: dict) -> RunConfig:
    _check(isinstance(raw, dict), "configuration root must be an object")
    _reject_unknown("config", raw, (
        "model", "n", "periodic", "trotter", "ansatz", "data", "train",
        "eval", "bounds", "threads",
    ))
    model = _typed("config", raw, "model", str, "XY", choices=_MODELS)
    n = _typed("config", raw, "n", int, 4)
    _check(n >= 2, f"n must be >= 2, got {n}")
    periodic = _typed("config", raw, "periodic", bool, False)
    threads = _typed("config", raw, "threads", int, None, optional=True)
    _check(threads is None or threads >= 1, "threads must be >= 1")

    t = _section(raw, "trotter")
    _reject_unknown("trotter", t, ("order", "r", "dt"))
    trotter = TrotterSection(
        order=_typed("trotter", t, "order", int, 2, choices=(1, 2)),
        r=_typed("trotter", t, "r", int, 1),
        dt=_typed("trotter", t, "dt", float, 0.1),
    )
    _check(trotter.r >= 1, "trotter.r must be >= 1")
    _check(trotter.dt > 0, "trotter.dt must be positive")

    a = _section(raw, "ansatz")
    _reject_unknown("ansatz", a, ("kind", "layers"))
    ansatz = AnsatzSection(
        kind=_typed("ansatz", a, "kind", str, None, choices=_KINDS, optional=True),
        layers=_typed("ansatz", a, "layers", int, None, optional=True),
    )
    _check(ansatz.layers is None or ansatz.layers >= 1, "ansatz.layers must be >= 1")

    d = _section(raw, "data")
    _reject_unknown("data", d, ("source", "N", "seed"))
    data = DataSection(
        source=_typed("data", d, "source", str, "HAAR1", choices=_SOURCES),
        N=_typed("data", d, "N", int, 1),
        seed=_typed("data", d, "seed", int, 0),
    )
    _check(data.N >= 1, "data.N must be >= 1")

    tr = _section(raw, "train")
    _reject_unknown("train", tr, (
        "optimizer", "rate", "target_cost", "cost_kind", "max_iters", "seed", "restarts",
    ))
    train = TrainSection(
        optimizer=_typed("train", tr, "optimizer", str, "ADAM", choices=_OPTIMIZERS),
        rate=_typed("train", tr, "rate", float, 0.05),
        target_cost=_typed("train", tr, "target_cost", float, 1e-8),
        cost_kind=_typed("train", tr, "cost_kind", str, "EMP_GLOBAL", choices=_COST_KINDS),
        max_iters=_typed("train", tr, "max_iters", int, 20000),
        seed=_typed("train", tr, "seed", int, 0),
        restarts=_typed("train", tr, "restarts", int, 8),
    )
    _check(train.rate > 0, "train.rate must be positive")
    _check(train.target_cost >= 0, "train.target_cost must be >= 0")
    _check(train.max_iters >= 1, "train.max_iters must be >= 1")
    _check(train.restarts >= 1, "train.restarts must be >= 1")

    e = _section(raw, "eval")
    _reject_unknown("eval", e, ("M_max", "reference", "substeps"))
    ev = EvalSection(
        M_max=_typed("eval", e, "M_max", int, 100),
        reference=_typed("eval", e, "reference", str, "BOTH", choices=_REFERENCES),
        substeps=_typed("eval", e, "substeps", int, 1),
    )
    _check(ev.M_max >= 1 and ev.substeps >= 1, "eval.M_max and eval.substeps must be >= 1")

    b = _section(raw, "bounds")
    _reject_unknown("bounds", b, ("delta", "gen_constant", "M0", "eps_target"))
    bounds = BoundsSection(
        delta=_typed("bounds", b, "delta", float, 0.05),
        gen_constant=_typed("bounds", b, "gen_constant", float, 1.0),
        M0=_typed("bounds", b, "M0", int, 10),
        eps_target=_typed("bounds", b, "eps_target", float, 0.01),
    )
    _check(0 < bounds.delta <= 1, "bounds.delta must lie in (0, 1]")
    _check(bounds.gen_constant >= 0, "bounds.gen_constant must be >= 0")
    _check(bounds.M0 >= 1, "bounds.M0 must be >= 1")
    _check(bounds.eps_target > 0, "bounds.eps_target must be positive")

    return RunConfig(
        model=model, n=n, periodic=periodic, trotter=trotter, ansatz=ansatz,
        data=data, train=train, eval=ev, bounds=bounds, threads=threads,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)
