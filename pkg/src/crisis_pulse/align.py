"""Bucketing of message activity, synchronization with climate variables,
and correlation.  Missing-data policy: a time point missing ANY requested
variable is dropped from EVERY series, never interpolated."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Mapping, Sequence

from .errors import DegenerateSeries, EmptyFrame, NoOverlap
from .messages import RawMessage
from .synop import ClimateFrame

DEFAULT_BUCKET = timedelta(hours=1)

CLIMATE_VARIABLES = (
    "wind_kmh",
    "tmax_c",
    "tavg_c",
    "rh_pct",
    "precip_mm",
    "pressure_hpa",
)

_OBS_FIELD = {
    "wind_kmh": "wind_speed_kmh",
    "tmax_c": "max_temp_c",
    "tavg_c": "avg_temp_c",
    "rh_pct": "rel_humidity_pct",
    "precip_mm": "precip_mm",
    "pressure_hpa": "pressure_hpa",
}


@dataclass
class ActivitySeries:
    bucket_width: timedelta
    points: list[tuple[datetime, int, dict[str, int]]] = field(default_factory=list)


@dataclass
class AlignedFrame:
    timestamps: list[datetime]
    series: dict[str, list[float]]
    dropped: int = 0


def floor_to_bucket(ts: datetime, bucket: timedelta) -> datetime:
    epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
    seconds = int(bucket.total_seconds())
    offset = int((ts.astimezone(timezone.utc) - epoch).total_seconds())
    return epoch + timedelta(seconds=(offset // seconds) * seconds)


def bucket_activity(
    msgs: Sequence[RawMessage],
    labels: Mapping[str, str] | None = None,
    bucket: timedelta = DEFAULT_BUCKET,
) -> ActivitySeries:
    """Message counts per bucket; empty buckets inside the observed span are
    emitted with zeros.  labels maps message id -> label for per-label counts."""
    labels = labels or {}
    series = ActivitySeries(bucket_width=bucket)
    if not msgs:
        return series
    totals: dict[datetime, int] = {}
    by_label: dict[datetime, dict[str, int]] = {}
    for m in msgs:
        b = floor_to_bucket(m.timestamp, bucket)
        totals[b] = totals.get(b, 0) + 1
        lab = labels.get(m.id)
        if lab is not None:
            by_label.setdefault(b, {})
            by_label[b][lab] = by_label[b].get(lab, 0) + 1
    start, stop = min(totals), max(totals)
    cursor = start
    while cursor <= stop:
        series.points.append((cursor, totals.get(cursor, 0), by_label.get(cursor, {})))
        cursor += bucket
    return series


def align_frames(
    activity: ActivitySeries,
    climate: ClimateFrame,
    variables: Sequence[str],
    station_agg: str = "mean",
) -> AlignedFrame:
    """Join activity buckets with bucket-averaged climate observations,
    dropping every bucket where any requested variable is missing."""
    unknown = set(variables) - set(CLIMATE_VARIABLES)
    if unknown:
        raise ValueError(f"unknown climate variables: {sorted(unknown)}")
    if station_agg != "mean":
        raise ValueError("only unweighted mean aggregation is supported")

    bucket = activity.bucket_width
    # (bucket, station, var) -> values, averaged per station then across stations
    per_station: dict[tuple[datetime, str, str], list[float]] = {}
    climate_buckets: set[datetime] = set()
    for obs in climate.rows:
        if obs.observed_at is None:
            continue
        b = floor_to_bucket(obs.observed_at, bucket)
        climate_buckets.add(b)
        for var in variables:
            value = getattr(obs, _OBS_FIELD[var])
            if value is not None:
                per_station.setdefault((b, obs.station_id, var), []).append(float(value))

    activity_by_bucket = {b: (total, labs) for b, total, labs in activity.points}
    candidates = sorted(set(activity_by_bucket) & climate_buckets)
    if not candidates:
        raise NoOverlap("activity and climate series do not overlap in time")

    label_names = sorted({lab for _, _, labs in activity.points for lab in labs})
    names = ["activity", *(f"label:{lab}" for lab in label_names), *variables]
    frame = AlignedFrame(timestamps=[], series={name: [] for name in names})
    stations = sorted(climate.stations) or sorted({s for _, s, _ in per_station})
    for b in candidates:
        values: dict[str, float] = {}
        complete = True
        for var in variables:
            station_means = [
                sum(vs) / len(vs)
                for st in stations
                if (vs := per_station.get((b, st, var)))
            ]
            if not station_means:
                complete = False
                break
            values[var] = sum(station_means) / len(station_means)
        if not complete:
            frame.dropped += 1
            continue
        total, labs = activity_by_bucket[b]
        frame.timestamps.append(b)
        frame.series["activity"].append(float(total))
        for lab in label_names:
            frame.series[f"label:{lab}"].append(float(labs.get(lab, 0)))
        for var in variables:
            frame.series[var].append(values[var])
    return frame


def correlate(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient."""
    if len(x) != len(y):
        raise ValueError("series lengths differ")
    n = len(x)
    if n < 3:
        raise DegenerateSeries(f"need at least 3 points, got {n}")
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        raise DegenerateSeries("constant series have no defined correlation")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def emit_plot_data(frame: AlignedFrame) -> str:
    """CSV: iso_time column, then one column per series in declaration order."""
    if not frame.timestamps:
        raise EmptyFrame("aligned frame has no rows")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(frame.series)
    writer.writerow(["iso_time", *names])
    for i, ts in enumerate(frame.timestamps):
        writer.writerow(
            [ts.isoformat().replace("+00:00", "Z")]
            + [repr(frame.series[name][i]) for name in names]
        )
    return buf.getvalue()


def parse_plot_data(text: str) -> AlignedFrame:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    names = header[1:]
    frame = AlignedFrame(timestamps=[], series={name: [] for name in names})
    for row in reader:
        frame.timestamps.append(datetime.fromisoformat(row[0].replace("Z", "+00:00")))
        for name, val in zip(names, row[1:]):
            frame.series[name].append(float(val))
    return frame


def emit_plot_json(frame: AlignedFrame) -> str:
    """JSON variant of emit_plot_data with the same schema."""
    if not frame.timestamps:
        raise EmptyFrame("aligned frame has no rows")
    return json.dumps(
        {
            "iso_time": [ts.isoformat().replace("+00:00", "Z") for ts in frame.timestamps],
            "series": frame.series,
            "dropped": frame.dropped,
        },
        sort_keys=True,
    )
