"""Telemetry data model, CSV I/O, future-window samples, dataset splits.

CSV schema (exact header, comma separated, no quoting):

    t,v_x,a_x,a_y,delta,sector,lap

Floats are written with ``repr`` (shortest round-trip form), so a save/load
cycle reproduces values bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySplitError, ParseError, ResampleError

CSV_HEADER = "t,v_x,a_x,a_y,delta,sector,lap"
VX_MIN = 5.0  # m/s, guards the 1/v_x^2 terms downstream
DEFAULT_SAMPLE_TIME = 0.05  # s
VALID_SECTORS = (1, 2, 3)


@dataclass(frozen=True)
class TelemetryRecord:
    """One telemetry sample: time [s], speed [m/s], accelerations [m/s^2],
    measured steering angle [rad], and (sector, lap) labels."""

    t: float
    v_x: float
    a_x: float
    a_y: float
    delta: float
    sector: int
    lap: int


@dataclass(frozen=True)
class WindowInput:
    """Future windows of planned/recorded signals, each of length q+1."""

    ay_window: np.ndarray  # m/s^2
    ax_window: np.ndarray  # m/s^2
    vx_window: np.ndarray  # m/s

    def __post_init__(self):
        n = len(self.ay_window)
        if n < 1 or len(self.ax_window) != n or len(self.vx_window) != n:
            raise ValueError("windows must share one length >= 1")


@dataclass(frozen=True)
class WindowedSample:
    """Training sample: input windows starting at record k, target delta_k [rad]."""

    input: WindowInput
    target: float
    index: int  # position of record k in the source record list


@dataclass(frozen=True)
class WindowBatch:
    """Column-stacked samples: ay/ax/vx are (n, q+1), targets (n,)."""

    ay: np.ndarray
    ax: np.ndarray
    vx: np.ndarray
    targets: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return self.targets.size

    def take(self, idx) -> "WindowBatch":
        return WindowBatch(self.ay[idx], self.ax[idx], self.vx[idx],
                           self.targets[idx], self.indices[idx])


@dataclass(frozen=True)
class DatasetSplit:
    name: str
    sectors: frozenset
    lap: int


SPLITS = {
    "small": DatasetSplit("small", frozenset({3}), 1),
    "medium": DatasetSplit("medium", frozenset({1, 3}), 1),
    "large": DatasetSplit("large", frozenset({1, 2, 3}), 1),
    "validation": DatasetSplit("validation", frozenset({1, 2, 3}), 2),
}


def load_csv(path, vx_min: float = VX_MIN) -> list[TelemetryRecord]:
    """Parse and validate a telemetry CSV.

    Raises ParseError naming the offending file line (header is line 1) on a
    missing/extra column, non-finite value, v_x < vx_min, bad sector label,
    or non-increasing time within a lap.
    """
    records = []
    last_t_per_lap: dict[int, float] = {}
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ParseError(
                f"line 1: expected header {CSV_HEADER!r}, got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise ParseError(f"line {lineno}: expected 7 fields, got {len(parts)}")
            try:
                t, v_x, a_x, a_y, delta = (float(p) for p in parts[:5])
                sector, lap = int(parts[5]), int(parts[6])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            if not all(np.isfinite(v) for v in (t, v_x, a_x, a_y, delta)):
                raise ParseError(f"line {lineno}: non-finite value")
            if v_x < vx_min:
                raise ParseError(
                    f"line {lineno}: v_x = {v_x} below minimum {vx_min}")
            if sector not in VALID_SECTORS:
                raise ParseError(f"line {lineno}: sector must be 1, 2 or 3")
            if lap in last_t_per_lap and t <= last_t_per_lap[lap]:
                raise ParseError(
                    f"line {lineno}: time {t} not increasing within lap {lap}")
            last_t_per_lap[lap] = t
            records.append(TelemetryRecord(t, v_x, a_x, a_y, delta, sector, lap))
    return records


def save_csv(records, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(f"{r.t!r},{r.v_x!r},{r.a_x!r},{r.a_y!r},{r.delta!r},"
                     f"{r.sector},{r.lap}\n")


def _segments(records):
    """Index ranges [start, stop) of contiguous (lap, sector) runs."""
    out = []
    start = 0
    for i in range(1, len(records) + 1):
        if i == len(records) or (records[i].lap, records[i].sector) != (
                records[start].lap, records[start].sector):
            out.append((start, i))
            start = i
    return out


def make_windows(records, q: int, sample_time: float = DEFAULT_SAMPLE_TIME,
                 tol: float = 1e-6) -> list[WindowedSample]:
    """Stride-1 future-window samples, never crossing a (lap, sector) boundary.

    Each contiguous segment of n records yields max(0, n - q) samples; sample
    k packs records k..k+q into the input windows and uses record k's delta
    as the target.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    samples = []
    for start, stop in _segments(records):
        seg = records[start:stop]
        t = np.array([r.t for r in seg])
        if len(seg) > 1 and np.any(np.abs(np.diff(t) - sample_time) > tol):
            k = int(np.argmax(np.abs(np.diff(t) - sample_time) > tol))
            raise ResampleError(
                f"records {start + k}..{start + k + 1} are {t[k + 1] - t[k]:.6g} s "
                f"apart, expected {sample_time} s; resample the data to a uniform "
                f"period before windowing")
        ay = np.array([r.a_y for r in seg])
        ax = np.array([r.a_x for r in seg])
        vx = np.array([r.v_x for r in seg])
        delta = np.array([r.delta for r in seg])
        for k in range(len(seg) - q):
            samples.append(WindowedSample(
                input=WindowInput(ay[k:k + q + 1].copy(), ax[k:k + q + 1].copy(),
                                  vx[k:k + q + 1].copy()),
                target=float(delta[k]),
                index=start + k))
    return samples


def stack_samples(samples) -> WindowBatch:
    samples = list(samples)
    if not samples:
        raise ValueError("no samples to stack")
    return WindowBatch(
        ay=np.stack([s.input.ay_window for s in samples]),
        ax=np.stack([s.input.ax_window for s in samples]),
        vx=np.stack([s.input.vx_window for s in samples]),
        targets=np.array([s.target for s in samples], dtype=np.float64),
        indices=np.array([s.index for s in samples], dtype=np.int64))


def select_split(records, split: DatasetSplit) -> list[TelemetryRecord]:
    """Records of one Table-style split, order preserved."""
    out = [r for r in records
           if r.lap == split.lap and r.sector in split.sectors]
    if not out:
        raise EmptySplitError(
            f"split {split.name!r} (lap {split.lap}, sectors "
            f"{sorted(split.sectors)}) selected no records")
    return out
