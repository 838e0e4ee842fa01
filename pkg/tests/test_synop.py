import math
import random
from datetime import datetime, timezone
from pathlib import Path

import pytest

from crisis_pulse.errors import MalformedGroup, NoReportsFound
from crisis_pulse.synop import (
    Diagnostics,
    decode_humidity,
    decode_precip,
    decode_pressure,
    decode_report,
    decode_temperature,
    decode_wind,
    frame_from_csv,
    frame_to_csv,
    magnus_rh,
    observations_frame,
    parse_bulletin,
)

UTC = timezone.utc
FIXTURES = Path(__file__).parent / "fixtures"

# Hand-decoded expected values for the golden corpus, in file order.
# Wind: ff x 1.852 (knots) or ff x 3.6 (m/s); temperatures sign/10 rule;
# pressure digits/10 (+1000 when < 500); RH direct (sn=9) or Magnus(T, Td).
# None = field absent.  Tuple: (wind, tmax, tavg, rh, precip, trace, period, pressure)
GOLDEN = [
    (27.78, None, 18.2, 69.3677, None, False, None, 1014.7),
    (36.0, None, 5.7, 56.4242, None, False, None, 998.2),
    (207.424, None, -3.4, 84.7367, None, False, None, 989.4),
    (22.224, None, 25.0, 65.0, None, False, None, 1010.2),
    (None, None, None, None, None, False, None, None),
    (14.816, None, 9.1, 94.0957, 0.0, True, 1, 1023.1),
    (9.26, None, 13.4, 79.8959, 0.5, False, 2, 1001.2),
    (27.78, None, 11.2, 89.2777, 1.0, False, 2, 1020.5),
    (37.04, None, 16.1, 87.3673, None, False, None, 1014.0),
    (18.52, None, 20.0, 72.9388, 0.0, False, None, 1015.0),
    (22.224, 24.5, 17.5, 74.9042, 6.0, False, 1, 1016.0),
    (22.224, None, -10.5, 74.2422, None, False, None, 987.6),
    (27.78, None, None, None, None, False, None, 1010.0),
    (27.78, None, 15.0, None, None, False, None, None),
    (0.0, None, 10.0, 71.0885, None, False, None, 1019.9),
    (25.2, None, 22.0, 78.0629, None, False, None, 1005.5),
    (46.3, None, 8.0, 87.1942, None, False, None, 1031.0),
    (10.8, 33.4, 31.0, 55.3219, None, False, None, 1008.0),
    (27.78, None, 10.0, 100.0, None, False, None, 1010.0),
    (27.78, None, 25.0, 69.3555, None, False, None, 1015.0),
    (None, None, 15.2, None, None, False, None, 1015.2),
    (27.78, None, None, None, None, False, None, None),
]


def golden_observations():
    text = (FIXTURES / "synop_golden.csv").read_text()
    return [decode_report(r) for r in parse_bulletin(text)]


class TestGoldenCorpus:
    def test_corpus_size(self):
        assert len(GOLDEN) >= 20
        assert len(golden_observations()) == len(GOLDEN)

    @pytest.mark.parametrize("index", range(len(GOLDEN)))
    def test_report(self, index):
        obs = golden_observations()[index]
        wind, tmax, tavg, rh, precip, trace, period, pressure = GOLDEN[index]

        def check(actual, expected, tol):
            if expected is None:
                assert actual is None
            else:
                assert actual == pytest.approx(expected, abs=tol)

        check(obs.wind_speed_kmh, wind, 0.01)
        check(obs.max_temp_c, tmax, 0.05)
        check(obs.avg_temp_c, tavg, 0.05)
        check(obs.rel_humidity_pct, rh, 0.5)
        if precip is None:
            assert obs.precip_mm is None
        else:
            assert obs.precip_mm == precip
        assert obs.precip_trace == trace
        assert obs.precip_period == period
        check(obs.pressure_hpa, pressure, 0.05)


class TestParseBulletin:
    def test_single_raw_report(self):
        reports = parse_bulletin("AAXX 11124 03772 41450 52015 10182 20125 30147=")
        assert len(reports) == 1
        assert reports[0].station_id == "03772"
        assert reports[0].iw == 4

    def test_empty_input(self):
        with pytest.raises(NoReportsFound):
            parse_bulletin("")

    def test_two_messages_one_line(self):
        text = "AAXX 11124 03772 41450 52015= AAXX 11124 03005 41450 52015="
        assert len(parse_bulletin(text)) == 2

    def test_malformed_skipped_and_counted(self):
        diag = Diagnostics()
        text = "AAXX 11124 03772 41450 52015=\ngarbage tokens here=\n"
        reports = parse_bulletin(text, diag)
        assert len(reports) == 1
        assert diag.malformed_reports == 1

    def test_ogimet_timestamps(self):
        reports = parse_bulletin((FIXTURES / "synop_golden.csv").read_text())
        assert reports[0].observed_at == datetime(2020, 11, 1, 6, 0, tzinfo=UTC)


class TestDecodeWind:
    def test_knots(self):
        speed, direction = decode_wind("52015", None, iw=4)
        assert speed == pytest.approx(15 * 1.852)
        assert direction == 200.0

    def test_ms(self):
        speed, _ = decode_wind("52010", None, iw=1)
        assert speed == 36.0

    def test_high_wind_00fff(self):
        speed, _ = decode_wind("52099", "00112", iw=4)
        assert speed == pytest.approx(112 * 1.852)

    def test_missing_digits(self):
        assert decode_wind("/////", None, iw=4) == (None, None)

    def test_malformed(self):
        with pytest.raises(MalformedGroup):
            decode_wind("5201", None, iw=4)

    def test_conversion_exactness(self):
        rng = random.Random(0)
        for _ in range(1000):
            kt = rng.randint(0, 200)
            speed, _ = decode_wind(f"520{0:02d}"[:3] + "99", f"00{kt:03d}", iw=3)
            assert speed == kt * 1.852


class TestDecodeTemperature:
    def test_positive(self):
        assert decode_temperature("10182") == pytest.approx(18.2)

    def test_negative(self):
        assert decode_temperature("11057") == pytest.approx(-5.7)

    def test_missing(self):
        assert decode_temperature("1////") is None

    def test_bad_sign(self):
        with pytest.raises(MalformedGroup):
            decode_temperature("12182")

    def test_round_trip_random(self):
        rng = random.Random(1)
        for _ in range(10_000):
            tenths = rng.randint(-800, 600)
            sign = "1" if tenths < 0 else "0"
            group = f"1{sign}{abs(tenths):03d}"
            value = decode_temperature(group)
            re_encoded = f"1{'1' if value < 0 else '0'}{round(abs(value) * 10):03d}"
            assert re_encoded == group


class TestDecodePressure:
    def test_above_1000(self):
        assert decode_pressure("30147") == pytest.approx(1014.7)

    def test_below_1000(self):
        assert decode_pressure("39982") == pytest.approx(998.2)

    def test_missing(self):
        assert decode_pressure("3////") is None

    def test_round_trip_random(self):
        rng = random.Random(2)
        for _ in range(10_000):
            tenths = rng.randint(8500, 10999)
            encoded = tenths % 10000
            group = f"3{encoded:04d}"
            value = decode_pressure(group)
            re_encoded = f"3{round(value * 10) % 10000:04d}"
            assert re_encoded == group


class TestDecodeHumidity:
    def test_direct(self):
        assert decode_humidity(None, "29085") == 85.0

    def test_saturated(self):
        assert decode_humidity(20.0, "20200") == pytest.approx(100.0, abs=1e-6)

    def test_magnus_value(self):
        assert decode_humidity(20.0, "20100") == pytest.approx(52.5, abs=0.1)

    def test_absent_without_temperature(self):
        assert decode_humidity(None, "20100") is None

    def test_magnus_identity_property(self):
        t = -40.0
        while t <= 50.0:
            assert magnus_rh(t, t) == pytest.approx(100.0, abs=1e-6)
            t += 0.1


class TestDecodePrecip:
    def test_whole_mm(self):
        assert decode_precip("60012") == (1.0, False, 2)

    def test_trace(self):
        assert decode_precip("69901") == (0.0, True, 1)

    def test_tenths(self):
        assert decode_precip("69952") == (0.5, False, 2)

    def test_unassigned_989(self):
        assert decode_precip("69891") is None

    def test_missing(self):
        assert decode_precip("6///2") is None


class TestDecodeReport:
    def test_worked_example(self):
        report = parse_bulletin("AAXX 11124 03772 41450 52015 10182 20125 30147=")[0]
        obs = decode_report(report)
        assert obs.avg_temp_c == pytest.approx(18.2)
        assert obs.wind_speed_kmh == pytest.approx(27.78, abs=0.01)
        assert obs.pressure_hpa == pytest.approx(1014.7)
        assert obs.rel_humidity_pct == pytest.approx(69.3, abs=0.2)
        assert obs.max_temp_c is None
        assert obs.precip_mm is None

    def test_header_only(self):
        report = parse_bulletin("AAXX 11124 03772=")[0]
        obs = decode_report(report)
        assert all(
            getattr(obs, f) is None
            for f in ("wind_speed_kmh", "max_temp_c", "avg_temp_c",
                      "rel_humidity_pct", "precip_mm", "pressure_hpa")
        )

    def test_section3_max_temp(self):
        report = parse_bulletin("AAXX 24121 03772 41450 52003 333 10334=")[0]
        assert decode_report(report).max_temp_c == pytest.approx(33.4)

    def test_range_violation_counted(self):
        diag = Diagnostics()
        report = parse_bulletin("AAXX 11124 03772 41450 52015 10650=")[0]
        obs = decode_report(report, diag)
        assert obs.avg_temp_c is None
        assert diag.range_violations == 1


class TestObservationsFrame:
    def test_sorted_and_deduplicated(self):
        text = (
            "03772,2020,11,02,06,00,AAXX 02064 03772 41450 52015 10100=\n"
            "03772,2020,11,01,06,00,AAXX 01064 03772 41450 52015 10150=\n"
            "03772,2020,11,01,06,00,AAXX 01064 03772 41450 52015 10990=\n"
        )
        frame = observations_frame(parse_bulletin(text))
        assert [o.observed_at.day for o in frame.rows] == [1, 2]
        assert frame.rows[0].avg_temp_c == pytest.approx(15.0)  # first wins
        assert frame.diagnostics.duplicate_observations == 1

    def test_empty(self):
        frame = observations_frame([])
        assert frame.rows == [] and frame.stations == set()

    def test_csv_round_trip(self):
        frame = observations_frame(parse_bulletin((FIXTURES / "synop_golden.csv").read_text()))
        text = frame_to_csv(frame)
        loaded = frame_from_csv(text)
        assert frame_to_csv(loaded) == text
        assert len(loaded.rows) == len(frame.rows)
