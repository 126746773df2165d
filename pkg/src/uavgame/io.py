"""Flat-file output: stamped CSVs, run configs with optional learning/sweep sections."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from importlib import resources
from pathlib import Path

from .config import GameConfig, validate_config
from .learning import LearningConfig

RUN_SECTIONS = ("learning", "sweep")


def fmt(value) -> str:
    """Round-trip-exact text for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    try:
        return repr(float(value))
    except (TypeError, ValueError):
        return str(value)


def run_hash(config: GameConfig, lc: LearningConfig | None = None) -> str:
    doc = {"game": config.to_dict(), "learning": asdict(lc) if lc is not None else None}
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def stamp(config_hash: str, seed) -> str:
    return f"# config_hash={config_hash} seed={seed}"


def csv_text(stamp_line: str, columns, rows) -> str:
    lines = [stamp_line + "\n"]
    buf = _Buffer(lines)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return "".join(lines)


class _Buffer:
    def __init__(self, lines):
        self.lines = lines

    def write(self, s):
        self.lines.append(s)


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    # newline="" keeps "\n" line endings on every platform
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_stamped_csv(path):
    """Rows of a stamped CSV as dicts (the comment line is skipped)."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def shipped_config_path(name: str) -> Path:
    """Path of a config bundled with the package (``name`` without ``.json``)."""
    return Path(str(resources.files("uavgame") / "configs" / f"{name}.json"))


def shipped_configs() -> list[str]:
    return sorted(p.stem for p in Path(str(resources.files("uavgame") / "configs")).glob("*.json"))


def load_run(path):
    """Parse a run file: game config plus optional ``learning`` and ``sweep`` sections."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return parse_run(raw)


def parse_run(raw):
    if not isinstance(raw, dict):
        return validate_config(raw), LearningConfig(), None
    game = {k: v for k, v in raw.items() if k not in RUN_SECTIONS}
    config = validate_config(game)
    lc = LearningConfig.from_dict(raw.get("learning") or {})
    return config, lc, raw.get("sweep")
