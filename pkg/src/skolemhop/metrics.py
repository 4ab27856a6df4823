"""Evaluation metrics over simulation traces.

Two quantities drive all reporting: rho(t), the fraction of the first t
slots that delivered, and windowed average delivery latency, defined as
T divided by the number of deliveries within the first T slots (the mean
inter-delivery interval).  Windows with zero deliveries are reported as
undefined and excluded from cross-pair means rather than silently padded.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RhoSeries",
    "LatencyReport",
    "LATENCY_WINDOWS",
    "rho",
    "rho_sample_points",
    "rho_series",
    "avg_latency",
    "latency_report",
    "missync_rate",
    "write_rho_csv",
    "write_latency_csv",
]

LATENCY_WINDOWS = (50, 100, 150, 200)

# rho(t) is sampled densely early on, then strided to bound output size.
RHO_DENSE_LIMIT = 200
RHO_STRIDE = 10


def _delivered(trace) -> np.ndarray:
    data = getattr(trace, "delivered", trace)
    return np.asarray(data, dtype=bool)


def rho(trace, t: int) -> float:
    """Fraction of the first t slots with a successful delivery."""
    delivered = _delivered(trace)
    if not 1 <= t <= len(delivered):
        raise ValueError(f"t must be within [1, {len(delivered)}], got {t}")
    return int(delivered[:t].sum()) / t


def rho_sample_points(horizon: int) -> list[int]:
    points = list(range(1, min(horizon, RHO_DENSE_LIMIT) + 1))
    points.extend(range(RHO_DENSE_LIMIT + RHO_STRIDE, horizon + 1, RHO_STRIDE))
    if points[-1] != horizon:
        points.append(horizon)
    return points


@dataclass(frozen=True)
class RhoSeries:
    """rho(t) at the sample points, averaged across pairs."""

    points: tuple[int, ...]
    mean: tuple[float, ...]
    stddev: tuple[float, ...]

    def final(self) -> float:
        return self.mean[-1]


def rho_series(traces: Sequence, points: Sequence[int] | None = None) -> RhoSeries:
    if not traces:
        raise ValueError("no traces")
    matrix = np.stack([_delivered(t) for t in traces]).astype(np.float64)
    horizon = matrix.shape[1]
    if points is None:
        points = rho_sample_points(horizon)
    cum = matrix.cumsum(axis=1)
    idx = np.asarray(points, dtype=int)
    per_pair = cum[:, idx - 1] / idx
    return RhoSeries(
        points=tuple(int(t) for t in points),
        mean=tuple(per_pair.mean(axis=0).tolist()),
        stddev=tuple(per_pair.std(axis=0).tolist()),
    )


def avg_latency(trace, window: int) -> float | None:
    """window / deliveries within it; None when no delivery occurred."""
    delivered = _delivered(trace)
    if not 1 <= window <= len(delivered):
        raise ValueError(f"window must be within [1, {len(delivered)}], got {window}")
    hits = int(delivered[:window].sum())
    return window / hits if hits else None


@dataclass(frozen=True)
class LatencyReport:
    """First-delivery summary plus the windowed latency scenarios.

    `windows` maps window length -> (mean latency over pairs that delivered,
    count of pairs with no delivery in the window).
    """

    pairs: int
    first_mean: float | None
    first_max: int | None
    undelivered: int
    windows: dict[int, tuple[float | None, int]]


def latency_report(traces: Sequence, windows: Iterable[int] = LATENCY_WINDOWS) -> LatencyReport:
    if not traces:
        raise ValueError("no traces")
    firsts = [t.first_delivery for t in traces]
    hit = [f + 1 for f in firsts if f is not None]  # latency in slots, 1-based
    report_windows: dict[int, tuple[float | None, int]] = {}
    horizon = len(_delivered(traces[0]))
    for w in windows:
        if w > horizon:
            continue
        values = [avg_latency(t, w) for t in traces]
        defined = [v for v in values if v is not None]
        mean = sum(defined) / len(defined) if defined else None
        report_windows[w] = (mean, len(values) - len(defined))
    return LatencyReport(
        pairs=len(traces),
        first_mean=sum(hit) / len(hit) if hit else None,
        first_max=max(hit) if hit else None,
        undelivered=len(traces) - len(hit),
        windows=report_windows,
    )


def missync_rate(traces: Sequence) -> float:
    """Fraction of committed receivers whose offset disagrees with the drift."""
    committed = [t for t in traces if t.missync is not None]
    if not committed:
        return 0.0
    return sum(1 for t in committed if t.missync) / len(committed)


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".9g")


def write_rho_csv(path, rows: Iterable[tuple]) -> None:
    """Rows: (protocol, pu_level, t, rho_mean, rho_stddev)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["protocol", "pu_level", "t", "rho_mean", "rho_stddev"])
        for protocol, pu, t, mean, std in rows:
            writer.writerow([protocol, pu, t, _fmt(mean), _fmt(std)])


def write_latency_csv(path, rows: Iterable[tuple]) -> None:
    """Rows: (protocol, pu_level, window, latency_mean, undefined_count)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["protocol", "pu_level", "window", "latency_mean", "undefined_count"]
        )
        for protocol, pu, window, mean, undefined in rows:
            writer.writerow([protocol, pu, window, _fmt(mean), undefined])
