"""JSON run configuration.

A config is a single JSON object; every block is optional except where a mode
needs it. Quantities are in shot-noise units unless a ``physical_units``
block supplies gain constants. See ``configs/`` for complete examples.

    {
      "chain":        {"r", "squeeze_phase", "lo_phase", "lo_amplitude",
                       "lo_angular_frequency", "signal_amp", "signal_phase", "het_freq"},
      "acquisition":  {"sample_rate", "duration", "seed", "n_segments"},
      "estimator":    {"segment_len", "window", "overlap", "f_lo", "f_hi"},
      "budget":       {"n_cl_snu_hz" | "table": [[f_hz, n_cl], ...], "bandwidth_hz"},
      "sweep":        {"r_min", "r_max", "r_step", "theta_l", "monte_carlo"},
      "analytic":     {"beta_s", "omega", "direct": {"s_f", "gamma", "r_bs", "t_bs"}},
      "physical_units": {"eta"},
      "output":       {"dir", "emit_plots", "write_trajectories", "include_beat", "workers"},
      "validate":     {"tolerance_override"}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .chain import AcquisitionParams, ChainParams
from .optimize import NoiseBudget
from .spectral import EstimatorConfig
from .states import GainConstants, LocalOscillator, SqueezeParams

MODES = ("simulate", "analytic", "sweep", "optimize", "validate")

_BLOCK_KEYS = {
    "mode": None,
    "chain": {"r", "squeeze_phase", "lo_phase", "lo_amplitude", "lo_angular_frequency",
              "signal_amp", "signal_phase", "het_freq"},
    "acquisition": {"sample_rate", "duration", "seed", "n_segments"},
    "estimator": {"segment_len", "window", "overlap", "f_lo", "f_hi"},
    "budget": {"n_cl_snu_hz", "table", "bandwidth_hz"},
    "sweep": {"r_min", "r_max", "r_step", "theta_l", "monte_carlo"},
    "analytic": {"beta_s", "omega", "direct"},
    "physical_units": {"eta"},
    "output": {"dir", "emit_plots", "write_trajectories", "include_beat", "workers"},
    "validate": {"tolerance_override"},
}


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass(frozen=True)
class SweepSpec:
    r_min: float = 0.0
    r_max: float = 1.0
    r_step: float = 0.01
    theta_l: float = math.pi / 2
    monte_carlo: bool = False

    def grid(self) -> np.ndarray:
        n = int(math.floor((self.r_max - self.r_min) / self.r_step + 1e-9)) + 1
        return self.r_min + self.r_step * np.arange(n)


@dataclass(frozen=True)
class DirectSpec:
    s_f: float
    gamma: float
    r_bs: float = 1 / math.sqrt(2)
    t_bs: float = 1 / math.sqrt(2)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    chain: ChainParams = field(default_factory=ChainParams)
    acq: AcquisitionParams = field(default_factory=AcquisitionParams)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    band: tuple[float | None, float | None] = (None, None)
    budget: NoiseBudget | None = None
    sweep: SweepSpec = field(default_factory=SweepSpec)
    beta_s: float | None = None
    omega: float | None = None
    direct: DirectSpec | None = None
    gains: GainConstants | None = None
    out_dir: Path = Path("out")
    emit_plots: bool = False
    write_trajectories: bool = False
    include_beat: bool = False
    workers: int = 1
    tolerance_override: float | None = None
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def snu(self) -> float:
        return 1.0 if self.gains is None else self.gains.snu

    def resolved(self) -> dict:
        """Full configuration as written into output sidecars."""
        from .io import to_jsonable

        d = {
            "mode": self.mode,
            "chain": self.chain,
            "acquisition": self.acq,
            "n_samples": self.acq.n_samples,
            "estimator": self.estimator,
            "band_hz": list(self.band),
            "budget": self.budget,
            "sweep": self.sweep,
            "beta_s": self.beta_s,
            "omega": self.omega,
            "direct": self.direct,
            "gains": None if self.gains is None else {"eta": self.gains.eta, "K": self.gains.K, "snu": self.gains.snu},
            "emit_plots": self.emit_plots,
            "include_beat": self.include_beat,
            "tolerance_override": self.tolerance_override,
            "seed": int(self.acq.seed),
        }
        return to_jsonable(d)


def _block(raw: dict, name: str) -> dict:
    blk = raw.get(name, {})
    if blk is None:
        return {}
    if not isinstance(blk, dict):
        raise ConfigError(f"'{name}' must be a JSON object")
    unknown = set(blk) - _BLOCK_KEYS[name]
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return blk


def _num(blk: dict, key: str, default: Any, block: str) -> Any:
    v = blk.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{block}.{key} must be a number, got {v!r}")
    return v


def parse_config(raw: dict, mode: str | None = None, *, seed: int | None = None, out: str | None = None,
                 segments: int | None = None, emit_plots: bool | None = None) -> RunConfig:
    """Validate a decoded JSON config and apply command-line overrides."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(_BLOCK_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    mode = mode or raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    try:
        c = _block(raw, "chain")
        lo_kwargs = {"amplitude": _num(c, "lo_amplitude", 1.0, "chain"), "phase": _num(c, "lo_phase", math.pi / 2, "chain")}
        if "lo_angular_frequency" in c:
            lo_kwargs["angular_frequency"] = _num(c, "lo_angular_frequency", None, "chain")
        lo = LocalOscillator(**lo_kwargs)

        phys = _block(raw, "physical_units")
        gains = GainConstants(eta=_num(phys, "eta", 1.0, "physical_units"), lo=lo) if "physical_units" in raw else None

        chain = ChainParams(
            lo=lo,
            sq=SqueezeParams(_num(c, "r", 0.0, "chain"), _num(c, "squeeze_phase", 0.0, "chain")),
            signal_amp=_num(c, "signal_amp", 0.0, "chain"),
            signal_phase=_num(c, "signal_phase", 0.0, "chain"),
            het_freq=_num(c, "het_freq", 0.0, "chain"),
            signal_gain=1.0 if gains is None else gains.signal_scale,
        )

        a = _block(raw, "acquisition")
        seed_v = a.get("seed", 0) if seed is None else seed
        if isinstance(seed_v, bool) or not isinstance(seed_v, int):
            raise ConfigError(f"acquisition.seed must be an integer, got {seed_v!r}")
        n_seg = a.get("n_segments") if segments is None else segments
        if n_seg is not None and (isinstance(n_seg, bool) or not isinstance(n_seg, int)):
            raise ConfigError("acquisition.n_segments must be an integer")
        acq = AcquisitionParams(
            sample_rate=_num(a, "sample_rate", 1.0e6, "acquisition"),
            duration=_num(a, "duration", 1.048576, "acquisition"),
            seed=seed_v,
            n_segments=n_seg,
        )

        e = _block(raw, "estimator")
        est = EstimatorConfig(
            segment_len=e.get("segment_len", 4096),
            window=e.get("window", "hann"),
            overlap=_num(e, "overlap", 0.5, "estimator"),
        )
        band = (_num(e, "f_lo", None, "estimator"), _num(e, "f_hi", None, "estimator"))

        budget = None
        if raw.get("budget") is not None:
            b = _block(raw, "budget")
            if "n_cl_snu_hz" not in b and "table" not in b:
                raise ConfigError("budget needs 'n_cl_snu_hz' or 'table'")
            table = None
            if "table" in b:
                arr = np.asarray(b["table"], dtype=float)
                if arr.ndim != 2 or arr.shape[1] != 2:
                    raise ConfigError("budget.table must be a list of [freq_hz, n_cl_snu_hz] pairs")
                table = (arr[:, 0], arr[:, 1])
            budget = NoiseBudget(
                n_cl=_num(b, "n_cl_snu_hz", 0.0, "budget"),
                bandwidth=_num(b, "bandwidth_hz", 1.0, "budget"),
                gains=gains,
                table=table,
            )

        s = _block(raw, "sweep")
        sweep = SweepSpec(
            r_min=_num(s, "r_min", 0.0, "sweep"),
            r_max=_num(s, "r_max", 1.0, "sweep"),
            r_step=_num(s, "r_step", 0.01, "sweep"),
            theta_l=_num(s, "theta_l", math.pi / 2, "sweep"),
            monte_carlo=bool(s.get("monte_carlo", False)),
        )
        if not (sweep.r_step > 0 and sweep.r_max >= sweep.r_min >= 0):
            raise ConfigError("sweep needs r_step > 0 and 0 <= r_min <= r_max")

        an = _block(raw, "analytic")
        direct = None
        if an.get("direct") is not None:
            d = an["direct"]
            if not isinstance(d, dict) or not {"s_f", "gamma"} <= set(d) or set(d) - {"s_f", "gamma", "r_bs", "t_bs"}:
                raise ConfigError("analytic.direct needs s_f and gamma (optionally r_bs, t_bs)")
            direct = DirectSpec(**{k: float(v) for k, v in d.items()})

        o = _block(raw, "output")
        v = _block(raw, "validate")
        workers = o.get("workers", 1)
        if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
            raise ConfigError("output.workers must be a positive integer")
        cfg = RunConfig(
            mode=mode,
            chain=chain,
            acq=acq,
            estimator=est,
            band=band,
            budget=budget,
            sweep=sweep,
            beta_s=_num(an, "beta_s", None, "analytic"),
            omega=_num(an, "omega", None, "analytic"),
            direct=direct,
            gains=gains,
            out_dir=Path(out if out is not None else o.get("dir", "out")),
            emit_plots=bool(o.get("emit_plots", False)) if emit_plots is None else emit_plots,
            write_trajectories=bool(o.get("write_trajectories", False)),
            include_beat=bool(o.get("include_beat", False)),
            workers=workers,
            tolerance_override=_num(v, "tolerance_override", None, "validate"),
            raw=raw,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    if mode in ("sweep", "optimize") and budget is None:
        raise ConfigError(f"mode '{mode}' requires a 'budget' block")
    if mode == "validate" and budget is None:
        raise ConfigError("mode 'validate' requires a 'budget' block for the optimal-squeezing check")
    if mode == "simulate" and acq.n_samples < 2 * est.segment_len:
        raise ConfigError("acquisition too short for two estimator segments")
    return cfg


def load_config(path: Path | str, mode: str | None = None, **overrides: Any) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw, mode, **overrides)
