"""CSV/JSON writers and readers for trajectories, spectra and result tables.

Every CSV gets a JSON sidecar of the same stem carrying the resolved run
configuration, seed and package version. Floats are written with ``repr`` so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .chain import TrajectoryPair
from .spectral import SpectrumEstimate

TRAJECTORY_HEADER = ("t", "j_a_minus", "j_b_minus")
SPECTRUM_HEADER = ("freq_hz", "csd_real_snu", "csd_imag_snu", "sigma_snu")
ANALYTIC_HEADER = ("quantity", "value_snu")
SWEEP_HEADER = ("r", "total_noise_snu_hz")


def to_jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path | str, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n")
    return path


def sidecar_path(path: Path | str) -> Path:
    return Path(path).with_suffix(".json")


def _fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return str(x)


def write_csv(
    path: Path | str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: dict | None = None,
) -> Path:
    """Write ``rows`` under ``header``; ``meta`` (when given) goes to the JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    if meta is not None:
        write_json(sidecar_path(path), {"version": __version__, "columns": list(header), **meta})
    return path


def read_csv(path: Path | str) -> tuple[list[str], np.ndarray]:
    """Numeric CSV reader; returns header and a 2-D float array."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.asarray(data, dtype=float).reshape(-1, len(header))


def write_trajectories(pair: TrajectoryPair, path: Path | str, meta: dict | None = None) -> Path:
    meta = {
        "chain": pair.params,
        "acquisition": pair.acq,
        "n_samples": int(pair.j_a_minus.size),
        **(meta or {}),
    }
    rows = zip(pair.t, pair.j_a_minus, pair.j_b_minus)
    return write_csv(path, TRAJECTORY_HEADER, rows, meta)


def read_trajectories(path: Path | str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    header, data = read_csv(path)
    if tuple(header) != TRAJECTORY_HEADER:
        raise ValueError(f"unexpected trajectory header {header}")
    return data[:, 0], data[:, 1], data[:, 2]


def write_spectrum(est: SpectrumEstimate, path: Path | str, meta: dict | None = None) -> Path:
    meta = {"estimator": est.config(), "bin_correlation": est.bin_correlation, **(meta or {})}
    rows = zip(est.freqs, est.values.real, est.values.imag, est.stat_sigma)
    return write_csv(path, SPECTRUM_HEADER, rows, meta)


def read_spectrum(path: Path | str) -> dict[str, np.ndarray]:
    header, data = read_csv(path)
    if tuple(header) != SPECTRUM_HEADER:
        raise ValueError(f"unexpected spectrum header {header}")
    return {name: data[:, i] for i, name in enumerate(header)}
