"""Experiment and suite configuration.

Configs are JSON objects.  Physical quantities carry their unit in the field
name (``t1_us``, ``l2q_ns``, ``zeta_rad_per_us``); nothing is inferred.
Gate-error strengths ``p_1q`` / ``p_2q`` are total error probabilities of the
single-qubit channel and of the two-qubit (lifted) channel respectively.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .. import channels as ch
from ..errors import ConfigError, InputError
from ..gates import AngleConvention, BasisChange
from ..simulator import ChainSpec, Crosstalk, CrosstalkMode, Decoherence, NoiseModel

__all__ = [
    "ChainConfig",
    "GateErrorConfig",
    "NoiseConfig",
    "ExperimentConfig",
    "TableSpec",
    "SuiteConfig",
    "load_config",
    "bundled_configs",
]

_OBSERVABLES = ("last_qubit", "projector")
_METRICS = ("delta_fidelity", "delta_hitting", "c1", "c2", "alpha", "mitigation_error")


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _take(data: Mapping, path: str, allowed: set[str]) -> dict:
    if not isinstance(data, Mapping):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(_join(path, extra[0]), "unknown field")
    return dict(data)


def _num(data: Mapping, key: str, path: str, default=None, *, positive=False, nonneg=False) -> float:
    if key not in data:
        if default is None:
            raise ConfigError(_join(path, key), "required field missing")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(_join(path, key), f"expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(_join(path, key), f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(_join(path, key), f"must be non-negative, got {v}")
    return float(v)


def _int(data: Mapping, key: str, path: str, default=None, minimum: int | None = None) -> int:
    if key not in data:
        if default is None:
            raise ConfigError(_join(path, key), "required field missing")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(_join(path, key), f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(_join(path, key), f"must be at least {minimum}, got {v}")
    return v


def _choice(data: Mapping, key: str, path: str, options, default):
    v = data.get(key, default)
    if v not in options:
        raise ConfigError(_join(path, key), f"expected one of {list(options)}, got {v!r}")
    return v


@dataclass(frozen=True)
class ChainConfig:
    n_qubits: int = 3
    C: float | None = 2.0
    couplings: tuple[float, ...] | None = None

    @classmethod
    def from_dict(cls, data: Mapping, path: str = "chain") -> "ChainConfig":
        d = _take(data, path, {"n_qubits", "C", "couplings"})
        n = _int(d, "n_qubits", path, minimum=2)
        if ("C" in d) == ("couplings" in d):
            raise ConfigError(path, "give exactly one of 'C' or 'couplings'")
        if "C" in d:
            return cls(n, _num(d, "C", path, positive=True), None)
        js = d["couplings"]
        if not isinstance(js, list) or len(js) != n - 1:
            raise ConfigError(f"{path}.couplings", f"expected a list of {n - 1} numbers")
        vals = []
        for i, j in enumerate(js):
            vals.append(_num({"v": j}, "v", f"{path}.couplings[{i}]"))
        return cls(n, None, tuple(vals))

    def to_dict(self) -> dict:
        if self.couplings is not None:
            return {"n_qubits": self.n_qubits, "couplings": list(self.couplings)}
        return {"n_qubits": self.n_qubits, "C": self.C}

    def build(self) -> ChainSpec:
        if self.couplings is not None:
            return ChainSpec(self.n_qubits, self.couplings)
        return ChainSpec.pst(self.n_qubits, self.C)


@dataclass(frozen=True)
class GateErrorConfig:
    model: str = "depolarizing"
    p_1q: float = 0.0
    p_2q: float = 0.0
    # relative X, Y, Z weights for the Pauli model
    bias: tuple[float, float, float] = (1.0, 1.0, 1.0)

    @classmethod
    def from_dict(cls, data: Mapping, path: str) -> "GateErrorConfig":
        d = _take(data, path, {"model", "p_1q", "p_2q", "bias"})
        model = _choice(d, "model", path, ("depolarizing", "pauli"), "depolarizing")
        p1 = _num(d, "p_1q", path, 0.0, nonneg=True)
        p2 = _num(d, "p_2q", path, 0.0, nonneg=True)
        for k, v in (("p_1q", p1), ("p_2q", p2)):
            if v > 0.75:
                raise ConfigError(f"{path}.{k}", f"error probability {v} above the fully depolarizing 0.75")
        bias = (1.0, 1.0, 1.0)
        if "bias" in d:
            if model != "pauli":
                raise ConfigError(f"{path}.bias", "only meaningful for the pauli model")
            b = d["bias"]
            if not isinstance(b, list) or len(b) != 3:
                raise ConfigError(f"{path}.bias", "expected three weights [x, y, z]")
            bias = tuple(_num({"v": v}, "v", f"{path}.bias[{i}]", nonneg=True) for i, v in enumerate(b))
            if sum(bias) <= 0:
                raise ConfigError(f"{path}.bias", "weights must not all be zero")
        return cls(model, p1, p2, bias)

    def to_dict(self) -> dict:
        d = {"model": self.model, "p_1q": self.p_1q, "p_2q": self.p_2q}
        if self.model == "pauli":
            d["bias"] = list(self.bias)
        return d

    def _single(self, p: float) -> ch.ChannelSpec:
        if self.model == "depolarizing":
            return ch.ChannelSpec.depolarizing(4 * p / 3)
        w = np.asarray(self.bias) / sum(self.bias)
        return ch.ChannelSpec.pauli(*(p * w))

    def build(self) -> tuple[ch.ChannelSpec | None, ch.ChannelSpec | None]:
        one = self._single(self.p_1q) if self.p_1q > 0 else None
        two = None
        if self.p_2q > 0:
            # The lifted channel is error free with probability (1 - p)^2.
            per_qubit = -math.expm1(0.5 * math.log1p(-self.p_2q))
            two = self._single(per_qubit).as_two_qubit()
        return one, two


@dataclass(frozen=True)
class NoiseConfig:
    gate_error: GateErrorConfig | None = None
    zeta_rad_per_us: float | None = None
    zeta_model: float | None = None
    t1_us: float | None = None
    t2_us: float | None = None
    decohere_idle: bool = False
    l1q_ns: float = 35.5
    l2q_ns: float = 340.0

    @classmethod
    def from_dict(cls, data: Mapping, path: str = "noise") -> "NoiseConfig":
        d = _take(data, path, {"gate_error", "crosstalk", "decoherence", "durations"})
        ge = GateErrorConfig.from_dict(d["gate_error"], f"{path}.gate_error") if "gate_error" in d else None
        zr = zm = None
        if "crosstalk" in d:
            p = f"{path}.crosstalk"
            x = _take(d["crosstalk"], p, {"zeta_rad_per_us", "zeta_model"})
            if len(x) != 1:
                raise ConfigError(p, "give exactly one of 'zeta_rad_per_us' or 'zeta_model'")
            if "zeta_rad_per_us" in x:
                zr = _num(x, "zeta_rad_per_us", p)
            else:
                zm = _num(x, "zeta_model", p)
        t1 = t2 = None
        idle = False
        if "decoherence" in d:
            p = f"{path}.decoherence"
            x = _take(d["decoherence"], p, {"t1_us", "t2_us", "idle"})
            t1 = _num(x, "t1_us", p, positive=True)
            t2 = _num(x, "t2_us", p, positive=True)
            if t2 > 2 * t1:
                raise ConfigError(f"{p}.t2_us", f"T2={t2} exceeds 2*T1={2 * t1}")
            idle = x.get("idle", False)
            if not isinstance(idle, bool):
                raise ConfigError(f"{p}.idle", "expected true or false")
        l1, l2 = 35.5, 340.0
        if "durations" in d:
            p = f"{path}.durations"
            x = _take(d["durations"], p, {"l1q_ns", "l2q_ns"})
            l1 = _num(x, "l1q_ns", p, 35.5, positive=True)
            l2 = _num(x, "l2q_ns", p, 340.0, positive=True)
        return cls(ge, zr, zm, t1, t2, idle, l1, l2)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {}
        if self.gate_error is not None:
            d["gate_error"] = self.gate_error.to_dict()
        if self.zeta_rad_per_us is not None:
            d["crosstalk"] = {"zeta_rad_per_us": self.zeta_rad_per_us}
        elif self.zeta_model is not None:
            d["crosstalk"] = {"zeta_model": self.zeta_model}
        if self.t1_us is not None:
            d["decoherence"] = {"t1_us": self.t1_us, "t2_us": self.t2_us, "idle": self.decohere_idle}
        d["durations"] = {"l1q_ns": self.l1q_ns, "l2q_ns": self.l2q_ns}
        return d

    def build(self) -> NoiseModel:
        one, two = self.gate_error.build() if self.gate_error else (None, None)
        xt = None
        if self.zeta_rad_per_us is not None:
            xt = Crosstalk(self.zeta_rad_per_us * 1e6, CrosstalkMode.PHYSICAL)
        elif self.zeta_model is not None:
            xt = Crosstalk(self.zeta_model, CrosstalkMode.MODEL)
        dec = None
        if self.t1_us is not None:
            dec = Decoherence(self.t1_us * 1e-6, self.t2_us * 1e-6, idle=self.decohere_idle)
        return NoiseModel(one, two, xt, dec, self.l1q_ns * 1e-9, self.l2q_ns * 1e-9)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    chain: ChainConfig = field(default_factory=ChainConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    t_min: float = 0.0
    t_max: float = math.pi
    grid_points: int = 101
    n_min: int = 1
    n_max: int = 30
    observable: str = "last_qubit"
    angle_scale: float = 0.5
    angle_sign: int = 1
    basis_change: str = "native"
    mitigation: bool = True
    fit_n_min: int = 6
    fit_n_max: int | None = None

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        d = _take(data, "", {"name", "chain", "noise", "time_window", "depths", "observable", "trotter", "mitigation"})
        name = d.get("name")
        if not isinstance(name, str) or not name or "/" in name:
            raise ConfigError("name", "expected a non-empty string without '/'")
        chain = ChainConfig.from_dict(d["chain"]) if "chain" in d else ChainConfig()
        noise = NoiseConfig.from_dict(d.get("noise", {}))
        tw = _take(d.get("time_window", {}), "time_window", {"t_min", "t_max", "grid_points"})
        t_min = _num(tw, "t_min", "time_window", 0.0)
        t_max = _num(tw, "t_max", "time_window", math.pi)
        if not t_max > t_min:
            raise ConfigError("time_window.t_max", f"must exceed t_min={t_min}")
        if t_min < 0:
            raise ConfigError("time_window.t_min", "model time cannot be negative")
        grid = _int(tw, "grid_points", "time_window", 101, minimum=2)
        dp = _take(d.get("depths", {}), "depths", {"n_min", "n_max"})
        n_min = _int(dp, "n_min", "depths", 1, minimum=1)
        n_max = _int(dp, "n_max", "depths", 30, minimum=1)
        if n_max < n_min:
            raise ConfigError("depths.n_max", f"must be at least n_min={n_min}")
        obs = _choice(d, "observable", "", _OBSERVABLES, "last_qubit")
        tr = _take(d.get("trotter", {}), "trotter", {"angle_scale", "angle_sign", "basis_change"})
        scale = _num(tr, "angle_scale", "trotter", 0.5, positive=True)
        sign = _choice(tr, "angle_sign", "trotter", (1, -1), 1)
        basis = _choice(tr, "basis_change", "trotter", tuple(b.value for b in BasisChange), "native")
        mt = _take(d.get("mitigation", {}), "mitigation", {"enabled", "fit_n_min", "fit_n_max"})
        enabled = mt.get("enabled", True)
        if not isinstance(enabled, bool):
            raise ConfigError("mitigation.enabled", "expected true or false")
        fit_min = _int(mt, "fit_n_min", "mitigation", 6, minimum=1)
        fit_max = mt.get("fit_n_max")
        if fit_max is not None:
            fit_max = _int(mt, "fit_n_max", "mitigation", minimum=fit_min)
        return cls(name, chain, noise, t_min, t_max, grid, n_min, n_max, obs, scale, sign, basis,
                   enabled, fit_min, fit_max)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "chain": self.chain.to_dict(),
            "noise": self.noise.to_dict(),
            "time_window": {"t_min": self.t_min, "t_max": self.t_max, "grid_points": self.grid_points},
            "depths": {"n_min": self.n_min, "n_max": self.n_max},
            "observable": self.observable,
            "trotter": {
                "angle_scale": self.angle_scale,
                "angle_sign": self.angle_sign,
                "basis_change": self.basis_change,
            },
            "mitigation": {
                "enabled": self.mitigation,
                "fit_n_min": self.fit_n_min,
                "fit_n_max": self.fit_n_max,
            },
        }

    def with_overrides(self, *, grid_points: int | None = None) -> "ExperimentConfig":
        d = self.to_dict()
        if grid_points is not None:
            d["time_window"]["grid_points"] = grid_points
        return ExperimentConfig.from_dict(d)

    # -- derived objects -------------------------------------------------

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.grid_points)

    @property
    def depths(self) -> list[int]:
        return list(range(self.n_min, self.n_max + 1))

    @property
    def convention(self) -> AngleConvention:
        return AngleConvention(self.angle_scale, self.angle_sign)

    def build_chain(self) -> ChainSpec:
        return self.chain.build()

    def build_noise(self) -> NoiseModel:
        try:
            return self.noise.build()
        except InputError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("noise", str(exc)) from exc


@dataclass(frozen=True)
class TableSpec:
    """One summary table of a suite.

    ``delta_*`` metrics compare ``reference`` against each run in ``against``;
    fit metrics (``c1``, ``c2``, ``alpha``) list one value per run in
    ``against``; ``mitigation_error`` reports raw/rescaled/mitigated
    dynamics errors per depth of ``against[0]`` relative to ``reference``.
    """

    name: str
    metric: str
    against: tuple[str, ...]
    reference: str | None = None

    @classmethod
    def from_dict(cls, data: Mapping, path: str, runs: set[str]) -> "TableSpec":
        d = _take(data, path, {"name", "metric", "reference", "against"})
        name = d.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError(f"{path}.name", "expected a non-empty string")
        metric = _choice(d, "metric", path, _METRICS, None)
        against = d.get("against")
        if not isinstance(against, list) or not against:
            raise ConfigError(f"{path}.against", "expected a non-empty list of run labels")
        for i, a in enumerate(against):
            if a not in runs:
                raise ConfigError(f"{path}.against[{i}]", f"unknown run {a!r}")
        ref = d.get("reference")
        needs_ref = metric in ("delta_fidelity", "delta_hitting", "mitigation_error")
        if needs_ref and ref not in runs:
            raise ConfigError(f"{path}.reference", f"metric {metric} needs a known reference run")
        if not needs_ref and ref is not None:
            raise ConfigError(f"{path}.reference", f"metric {metric} takes no reference")
        return cls(name, metric, tuple(against), ref)

    def to_dict(self) -> dict:
        d = {"name": self.name, "metric": self.metric, "against": list(self.against)}
        if self.reference is not None:
            d["reference"] = self.reference
        return d


def _merge(base: Mapping, override: Mapping) -> dict:
    out = copy.deepcopy(dict(base))
    for k, v in override.items():
        if v is None and k in out:
            del out[k]  # null removes an inherited section
        elif isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class SuiteConfig:
    """Several experiments sharing a base config, plus summary tables."""

    name: str
    base: dict
    runs: dict[str, dict]
    tables: tuple[TableSpec, ...]

    @classmethod
    def from_dict(cls, data: Mapping) -> "SuiteConfig":
        d = _take(data, "", {"suite", "base", "runs", "tables"})
        name = d.get("suite")
        if not isinstance(name, str) or not name or "/" in name:
            raise ConfigError("suite", "expected a non-empty string without '/'")
        base = d.get("base", {})
        if not isinstance(base, Mapping):
            raise ConfigError("base", "expected an object")
        runs = d.get("runs")
        if not isinstance(runs, Mapping) or not runs:
            raise ConfigError("runs", "expected a non-empty object of label -> overrides")
        suite = cls(name, copy.deepcopy(dict(base)), {k: copy.deepcopy(dict(v)) for k, v in runs.items()}, ())
        for label in runs:
            if not isinstance(runs[label], Mapping):
                raise ConfigError(f"runs.{label}", "expected an object")
            try:
                suite.experiment(label)
            except ConfigError as exc:
                raise ConfigError(f"runs.{label}.{exc.field}", exc.message) from None
        tables = d.get("tables", [])
        if not isinstance(tables, list):
            raise ConfigError("tables", "expected a list")
        specs = tuple(TableSpec.from_dict(t, f"tables[{i}]", set(runs)) for i, t in enumerate(tables))
        return cls(suite.name, suite.base, suite.runs, specs)

    def experiment(self, label: str) -> ExperimentConfig:
        merged = _merge(self.base, self.runs[label])
        merged["name"] = label
        return ExperimentConfig.from_dict(merged)

    @property
    def labels(self) -> list[str]:
        return list(self.runs)

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "base": copy.deepcopy(self.base),
            "runs": copy.deepcopy(self.runs),
            "tables": [t.to_dict() for t in self.tables],
        }


def _bundled_dir():
    return resources.files("noisy_pst.harness") / "configs"


def bundled_configs() -> list[str]:
    return sorted(p.name for p in _bundled_dir().iterdir() if p.name.endswith(".json"))


def load_config(source: str | Path | Mapping) -> ExperimentConfig | SuiteConfig:
    """Parse a config from a mapping, a file path, or a bundled config name."""
    if isinstance(source, Mapping):
        data = source
    else:
        path = Path(source)
        if path.exists():
            text = path.read_text()
        else:
            name = path.name if path.suffix == ".json" else f"{path.name}.json"
            candidate = _bundled_dir() / name
            if not candidate.is_file():
                raise ConfigError("config", f"no such file or bundled config: {source}")
            text = candidate.read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
    if not isinstance(data, Mapping):
        raise ConfigError("config", "top level must be an object")
    if "suite" in data:
        return SuiteConfig.from_dict(data)
    return ExperimentConfig.from_dict(data)
