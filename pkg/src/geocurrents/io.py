"""Reading configs and laminations, writing CSV tables and verdicts."""

from __future__ import annotations

import csv
import json
import zlib
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

from .errors import ConfigError, LaminationError
from .laminations import FiniteLamination


def load_config(path: str | Path | None) -> dict:
    """Parse a YAML or JSON mapping; an absent path gives an empty config."""
    if path is None:
        return {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def _records_from_text(text: str) -> list[tuple[float, float, float]]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").split() if p]
        if len(parts) != 3:
            raise ConfigError(f"lamination record needs 'p q weight': {line!r}")
        out.append(tuple(float(p) for p in parts))
    return out


def lamination_from_records(records) -> FiniteLamination:
    recs = []
    for r in records:
        if isinstance(r, dict):
            r = (r["p"], r["q"], r["weight"])
        if len(r) != 3:
            raise ConfigError(f"lamination record needs (p, q, weight): {r!r}")
        recs.append(tuple(float(x) for x in r))
    try:
        return FiniteLamination.from_records(recs)
    except (LaminationError, ValueError) as exc:
        raise ConfigError(f"invalid lamination: {exc}") from exc


def load_lamination(path: str | Path) -> FiniteLamination:
    """Load leaves from JSON/YAML (a list or {'leaves': [...]}) or text (p q weight per line)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read lamination {path}: {exc}") from exc
    if path.suffix in (".json", ".yaml", ".yml"):
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        if isinstance(data, dict):
            data = data.get("leaves", [])
        return lamination_from_records(data)
    return lamination_from_records(_records_from_text(text))


def save_lamination(lam: FiniteLamination, path: str | Path) -> None:
    path = Path(path)
    recs = [list(r) for r in lam.to_records()]
    if path.suffix == ".json":
        path.write_text(json.dumps({"leaves": recs}, indent=1) + "\n")
    else:
        path.write_text("".join(f"{p!r} {q!r} {w!r}\n" for p, q, w in recs))


def rng_for(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named substream of the master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())]))


def seed_for(seed: int, name: str) -> int:
    return int(rng_for(seed, name).integers(0, 2**63 - 1))


def _fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def write_json(path: str | Path, data) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
