"""FM-12 SYNOP decoding into the six thermal-comfort climate variables:
wind speed, max temperature, average air temperature, relative humidity,
precipitation, and station pressure.

Only land-station (AAXX) reports are handled, sections 0, 1 and 3.  A '/'
in any value position means the value was not observed and the field stays
absent; the decoder never fabricates data.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import MalformedGroup, NoReportsFound

KNOTS_TO_KMH = 1.852
MS_TO_KMH = 3.6

# Magnus saturation-vapor-pressure coefficients for RH from dewpoint
MAGNUS_A = 17.625
MAGNUS_B = 243.04

TEMP_RANGE_C = (-80.0, 60.0)
PRESSURE_RANGE_HPA = (850.0, 1100.0)

_GROUP_RE = re.compile(r"^[0-9/]{5}$")

CSV_COLUMNS = (
    "station",
    "iso_time",
    "wind_kmh",
    "tmax_c",
    "tavg_c",
    "rh_pct",
    "precip_mm",
    "trace",
    "precip_period",
    "pressure_hpa",
)


@dataclass
class SynopReport:
    station_id: str
    observed_at: datetime | None
    iw: int | None
    section1: list[str]
    section3: list[str]
    raw: str = ""


@dataclass
class SynopObservation:
    station_id: str
    observed_at: datetime | None
    wind_speed_kmh: float | None = None
    wind_direction_deg: float | None = None
    max_temp_c: float | None = None
    avg_temp_c: float | None = None
    rel_humidity_pct: float | None = None
    precip_mm: float | None = None
    precip_trace: bool = False
    precip_period: int | None = None
    pressure_hpa: float | None = None
    sea_level_pressure_hpa: float | None = None  # diagnostics only


@dataclass
class Diagnostics:
    malformed_reports: int = 0
    range_violations: int = 0
    duplicate_observations: int = 0
    missing_timestamps: int = 0


@dataclass
class ClimateFrame:
    rows: list[SynopObservation] = field(default_factory=list)
    stations: set[str] = field(default_factory=set)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)


def _digits(group: str, start: int, end: int) -> int | None:
    """Extract digits group[start:end]; None when any position is '/'."""
    part = group[start:end]
    if "/" in part:
        return None
    return int(part)


def decode_wind(
    nddff: str, extra_00fff: str | None, iw: int | None
) -> tuple[float | None, float | None]:
    """(speed km/h, direction degrees); iw 0/1 = m/s, 3/4 = knots."""
    if not _GROUP_RE.match(nddff):
        raise MalformedGroup(f"bad wind group {nddff!r}")
    dd = _digits(nddff, 1, 3)
    ff = _digits(nddff, 3, 5)
    direction = None
    if dd is not None and 0 <= dd <= 36:
        direction = float(dd * 10)
    speed = None
    if ff is not None:
        if ff == 99:
            if extra_00fff is None or not extra_00fff.startswith("00"):
                raise MalformedGroup("ff=99 requires a 00fff group")
            ff = _digits(extra_00fff, 2, 5)
        if ff is not None:
            if iw in (3, 4):
                speed = ff * KNOTS_TO_KMH
            elif iw in (0, 1):
                speed = ff * MS_TO_KMH
            else:
                speed = None  # unknown unit indicator: refuse to guess
    return speed, direction


def decode_temperature(group: str) -> float | None:
    """1sTTT (or section-3 1sTxTxTx): sign 0=+, 1=-, tenths of a degree."""
    if not _GROUP_RE.match(group) or group[0] != "1":
        raise MalformedGroup(f"bad temperature group {group!r}")
    sign = group[1]
    if sign == "/":
        return None
    if sign not in "01":
        raise MalformedGroup(f"bad sign digit in {group!r}")
    value = _digits(group, 2, 5)
    if value is None:
        return None
    return (value / 10.0) * (-1.0 if sign == "1" else 1.0)


def decode_pressure(group: str) -> float | None:
    """3P0P0P0P0 station pressure in tenths of hPa, thousands digit omitted."""
    if not _GROUP_RE.match(group) or group[0] != "3":
        raise MalformedGroup(f"bad pressure group {group!r}")
    value = _digits(group, 1, 5)
    if value is None:
        return None
    hpa = value / 10.0
    if hpa < 500.0:
        hpa += 1000.0
    return hpa


def decode_sea_level_pressure(group: str) -> float | None:
    if not _GROUP_RE.match(group) or group[0] != "4":
        raise MalformedGroup(f"bad sea-level pressure group {group!r}")
    value = _digits(group, 1, 5)
    if value is None:
        return None
    hpa = value / 10.0
    if hpa < 500.0:
        hpa += 1000.0
    return hpa


def magnus_rh(temp_c: float, dewpoint_c: float) -> float:
    """Relative humidity (%) from air and dewpoint temperature, clamped to [0,100]."""
    e_t = math.exp(MAGNUS_A * temp_c / (MAGNUS_B + temp_c))
    e_td = math.exp(MAGNUS_A * dewpoint_c / (MAGNUS_B + dewpoint_c))
    return max(0.0, min(100.0, 100.0 * e_td / e_t))


def decode_humidity(temp_c: float | None, group2: str) -> float | None:
    """2snTdTdTd: sn=9 carries relative humidity directly (29UUU);
    otherwise dewpoint, converted via the Magnus formula."""
    if not _GROUP_RE.match(group2) or group2[0] != "2":
        raise MalformedGroup(f"bad humidity group {group2!r}")
    sign = group2[1]
    if sign == "/":
        return None
    if sign == "9":
        rh = _digits(group2, 2, 5)
        if rh is None:
            return None
        return max(0.0, min(100.0, float(rh)))
    if sign not in "01":
        raise MalformedGroup(f"bad sign digit in {group2!r}")
    value = _digits(group2, 2, 5)
    if value is None or temp_c is None:
        return None
    dewpoint = (value / 10.0) * (-1.0 if sign == "1" else 1.0)
    return magnus_rh(temp_c, dewpoint)


def decode_precip(group: str) -> tuple[float, bool, int | None] | None:
    """6RRRtR -> (mm, trace flag, period code); RRR=989 is unassigned."""
    if not _GROUP_RE.match(group) or group[0] != "6":
        raise MalformedGroup(f"bad precipitation group {group!r}")
    rrr = _digits(group, 1, 4)
    if rrr is None:
        return None
    period = _digits(group, 4, 5)
    if rrr <= 988:
        return float(rrr), False, period
    if rrr == 989:
        return None
    if rrr == 990:
        return 0.0, True, period
    return (rrr - 990) / 10.0, False, period  # 991..999 -> 0.1..0.9 mm


def _split_messages(text: str) -> list[str]:
    """'='-terminated FM-12 messages; a trailing fragment without '=' is dropped."""
    return [chunk.strip() for chunk in text.split("=") if chunk.strip()] if "=" in text else []


_OGIMET_LINE_RE = re.compile(r"^(\w+),(\d{4}),(\d{2}),(\d{2}),(\d{2}),(\d{2}),(.*)$")


def _parse_single(
    message: str, observed_at: datetime | None = None
) -> SynopReport | None:
    tokens = message.split()
    try:
        start = tokens.index("AAXX")
    except ValueError:
        return None
    tokens = tokens[start:]
    if len(tokens) < 3:
        return None
    yyggiw = tokens[1]
    station = tokens[2]
    if not re.match(r"^\d{5}$", station):
        return None
    iw: int | None = None
    if re.match(r"^\d{4}[0134]$", yyggiw):
        iw = int(yyggiw[4])
    elif not re.match(r"^[0-9/]{5}$", yyggiw):
        return None
    body = tokens[3:]
    section1: list[str] = []
    section3: list[str] = []
    current = section1
    for tok in body:
        if tok in ("222", "333", "444", "555") or tok.startswith("222"):
            current = section3 if tok == "333" else []
            continue
        if _GROUP_RE.match(tok):
            current.append(tok)
    return SynopReport(
        station_id=station,
        observed_at=observed_at,
        iw=iw,
        section1=section1,
        section3=section3,
        raw=message,
    )


def parse_bulletin(
    text: str, diagnostics: Diagnostics | None = None
) -> list[SynopReport]:
    """Parse a raw FM-12 bulletin or an OGIMET getsynop CSV export.

    getsynop lines: station,YYYY,MM,DD,HH,mm,<report ending in '='>.
    Malformed messages are skipped and counted, never fabricated.
    """
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    reports: list[SynopReport] = []
    ogimet_lines = [m for m in map(_OGIMET_LINE_RE.match, text.splitlines()) if m]
    if ogimet_lines:
        for m in ogimet_lines:
            try:
                observed = datetime(
                    int(m.group(2)), int(m.group(3)), int(m.group(4)),
                    int(m.group(5)), int(m.group(6)), tzinfo=timezone.utc,
                )
            except ValueError:
                diagnostics.malformed_reports += 1
                continue
            for chunk in _split_messages(m.group(7)):
                report = _parse_single(chunk, observed)
                if report is None:
                    diagnostics.malformed_reports += 1
                else:
                    reports.append(report)
    else:
        for chunk in _split_messages(text):
            report = _parse_single(chunk)
            if report is None:
                diagnostics.malformed_reports += 1
            else:
                reports.append(report)
    if not reports:
        raise NoReportsFound("no decodable SYNOP reports in input")
    return reports


def _first_group(groups: Sequence[str], prefix: str) -> str | None:
    for g in groups:
        if g.startswith(prefix):
            return g
    return None


def _in_range(value: float | None, lo: float, hi: float, diagnostics: Diagnostics) -> float | None:
    if value is None:
        return None
    if lo <= value <= hi:
        return value
    diagnostics.range_violations += 1
    return None


def decode_report(
    report: SynopReport, diagnostics: Diagnostics | None = None
) -> SynopObservation:
    """Decode one report; absent or malformed groups yield absent fields."""
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    obs = SynopObservation(station_id=report.station_id, observed_at=report.observed_at)
    s1 = list(report.section1)
    if not s1:
        return obs

    # iRixhVV leads section 1
    ir: int | None = None
    header = s1.pop(0)
    if header[0] in "01234":
        ir = int(header[0])

    # wind group Nddff follows, with 00fff when ff=99
    if s1:
        wind_group = s1.pop(0)
        extra = s1[0] if s1 and s1[0].startswith("00") and wind_group.endswith("99") else None
        if extra is not None:
            s1.pop(0)
        try:
            speed, direction = decode_wind(wind_group, extra, report.iw)
            obs.wind_speed_kmh = speed
            obs.wind_direction_deg = direction
        except MalformedGroup:
            pass  # field stays absent

    def try_decode(group: str | None, decoder):
        if group is None:
            return None
        try:
            return decoder(group)
        except MalformedGroup:
            return None

    temp = try_decode(_first_group(s1, "1"), decode_temperature)
    obs.avg_temp_c = _in_range(temp, *TEMP_RANGE_C, diagnostics)
    g2 = _first_group(s1, "2")
    if g2 is not None:
        try:
            obs.rel_humidity_pct = decode_humidity(obs.avg_temp_c, g2)
        except MalformedGroup:
            pass
    obs.pressure_hpa = _in_range(
        try_decode(_first_group(s1, "3"), decode_pressure), *PRESSURE_RANGE_HPA, diagnostics
    )
    obs.sea_level_pressure_hpa = try_decode(_first_group(s1, "4"), decode_sea_level_pressure)

    # precipitation: section-1 6-group wins; iR gates group presence
    precip = None
    if ir in (0, 1, None):
        precip = try_decode(_first_group(s1, "6"), decode_precip)
    if precip is None and ir in (0, 2, None):
        precip = try_decode(_first_group(report.section3, "6"), decode_precip)
    if precip is None and ir == 3:
        precip = (0.0, False, None)  # iR=3: group omitted, no precipitation
    if precip is not None:
        obs.precip_mm, obs.precip_trace, obs.precip_period = precip

    tmax = try_decode(_first_group(report.section3, "1"), decode_temperature)
    obs.max_temp_c = _in_range(tmax, *TEMP_RANGE_C, diagnostics)
    return obs


def observations_frame(reports: Iterable[SynopReport]) -> ClimateFrame:
    """Decode, sort by time, drop duplicate (station, time) pairs (first wins)."""
    frame = ClimateFrame()
    seen: set[tuple[str, datetime | None]] = set()
    rows: list[SynopObservation] = []
    for report in reports:
        obs = decode_report(report, frame.diagnostics)
        if obs.observed_at is None:
            frame.diagnostics.missing_timestamps += 1
            continue
        key = (obs.station_id, obs.observed_at)
        if key in seen:
            frame.diagnostics.duplicate_observations += 1
            continue
        seen.add(key)
        rows.append(obs)
    rows.sort(key=lambda o: (o.observed_at, o.station_id))
    frame.rows = rows
    frame.stations = {o.station_id for o in rows}
    return frame


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(round(value, 4))


def frame_to_csv(frame: ClimateFrame) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for o in frame.rows:
        writer.writerow(
            [
                o.station_id,
                o.observed_at.isoformat().replace("+00:00", "Z") if o.observed_at else "",
                _fmt(o.wind_speed_kmh),
                _fmt(o.max_temp_c),
                _fmt(o.avg_temp_c),
                _fmt(o.rel_humidity_pct),
                _fmt(o.precip_mm),
                "1" if o.precip_trace else "0",
                "" if o.precip_period is None else str(o.precip_period),
                _fmt(o.pressure_hpa),
            ]
        )
    return buf.getvalue()


def frame_from_csv(text: str) -> ClimateFrame:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise NoReportsFound("unexpected climate CSV header")
    frame = ClimateFrame()
    for row in reader:
        (station, iso_time, wind, tmax, tavg, rh, precip, trace, period, pressure) = row
        obs = SynopObservation(
            station_id=station,
            observed_at=datetime.fromisoformat(iso_time.replace("Z", "+00:00"))
            if iso_time
            else None,
            wind_speed_kmh=float(wind) if wind else None,
            max_temp_c=float(tmax) if tmax else None,
            avg_temp_c=float(tavg) if tavg else None,
            rel_humidity_pct=float(rh) if rh else None,
            precip_mm=float(precip) if precip else None,
            precip_trace=trace == "1",
            precip_period=int(period) if period else None,
            pressure_hpa=float(pressure) if pressure else None,
        )
        frame.rows.append(obs)
        frame.stations.add(station)
    return frame


OGIMET_GETSYNOP_URL = "https://www.ogimet.com/cgi-bin/getsynop"


def fetch_ogimet(
    block: str, begin: str, end: str, out_path: str | Path, timeout: float = 60.0
) -> int:
    """GET the getsynop export and write it verbatim; returns the byte count."""
    import requests

    resp = requests.get(
        OGIMET_GETSYNOP_URL,
        params={"block": block, "begin": begin, "end": end},
        timeout=timeout,
    )
    resp.raise_for_status()
    data = resp.content
    Path(out_path).write_bytes(data)
    return len(data)
