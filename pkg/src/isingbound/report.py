"""Run configuration, result records and plot-data export."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .inequalities.reports import _jsonable, digest

SCHEMA_VERSION = 1
COMMANDS = (
    "exact", "check-theorem", "check-correlation", "lemma", "counterexample",
    "fuzz", "rfim-decay", "ssm", "sphere-coupling",
)
RANDOMIZED = {"check-theorem", "check-correlation", "lemma", "fuzz", "rfim-decay", "ssm", "sphere-coupling"}
THREADS_ENV = "ISINGBOUND_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV}={raw!r} is not an integer") from None


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    tolerance: float | None = None
    output: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")

    @property
    def digest(self) -> str:
        # output location does not change what is computed
        d = asdict(self)
        d.pop("output")
        return digest(d)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class ResultRecord:
    command: str
    config_digest: str
    payload: dict
    started: str = ""
    finished: str = ""
    reproducer: str | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        # normalize once so a JSON round trip is the identity
        self.payload = json.loads(canonical_json(self.payload))

    @property
    def kind(self) -> str | None:
        return self.payload.get("kind")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def payload_bytes(self) -> bytes:
        return canonical_json(self.payload).encode()

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))


def make_record(config: RunConfig, payload: dict, started: str, reproducer=None) -> ResultRecord:
    return ResultRecord(config.command, config.digest, payload, started, _now(), reproducer)


def write_records(records, path=None, stream=None) -> None:
    """Append records as JSON lines to ``path``, or write them to ``stream``."""
    lines = "".join(r.to_json() + "\n" for r in records)
    if path is None:
        stream.write(lines)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as fh:
        fh.write(lines)


def read_records(path) -> list:
    with open(path) as fh:
        return [ResultRecord.from_json(line) for line in fh if line.strip()]


# ---------------------------------------------------------------- plot data

PLOT_KINDS = {
    "decay": ("decay", ["N", "value", "stderr", "log_value"]),
    "lambda-sweep": ("lambda-sweep", ["lambda", "value"]),
    "tv-distance": ("tv-distance", ["y", "distance", "tv"]),
}


def _payload(r):
    return r.payload if isinstance(r, ResultRecord) else r


def emit_plot_data(records, kind: str, path=None) -> str:
    """Flatten records of one payload kind into CSV; returns the text and
    writes it to ``path`` when given.  The first line is a ``#`` comment naming
    the columns (and the fit parameters for decay curves)."""
    records = list(records)
    if not records:
        raise ValueError("no records to export")
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(PLOT_KINDS)}")
    payloads = [_payload(r) for r in records]
    kinds = {p.get("plot") for p in payloads}
    if kinds != {kind}:
        raise TypeError(f"records carry plot kinds {sorted(map(str, kinds))}, expected only {kind!r}")
    cols = PLOT_KINDS[kind][1]
    buf = io.StringIO()
    rows = []
    note = ""
    for p in payloads:
        if kind == "decay":
            fit = p["fit"]
            note = f"; fit slope={fit['slope']!r} intercept={fit['intercept']!r} r_squared={fit['r_squared']!r}"
            for x, v, s in fit["points"]:
                rows.append([x, v, s, math.log(v) if v > 0 else ""])
        elif kind == "lambda-sweep":
            rows.extend(p["table_xy"])
        else:
            for row in p["tv_rows"]:
                rows.append([" ".join(str(c) for c in row["y"]), row["distance"], row["tv"]])
    buf.write(f"# columns: {', '.join(cols)}{note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
