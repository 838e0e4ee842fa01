import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

UTC = timezone.utc

POSITIVE = ["great", "wonderful", "safe", "thanks", "relief"]
NEGATIVE = ["terrible", "danger", "damage", "panic", "worst"]
DISASTER = ["flood", "flooding", "storm", "rainfall", "river", "warning", "alert"]
MEDICAL = ["hospital", "ambulance", "injury", "doctor"]
HUMANITARIAN = ["shelter", "volunteer", "donation", "relief"]
FILLER = ["monday", "london", "street", "people", "morning", "evening", "picture", "house"]


def synthetic_messages(n=200, seed=7):
    """Deterministic fixture corpus mixing disaster, medical, humanitarian
    and sentiment vocabulary across 48 hours."""
    rng = random.Random(seed)
    start = datetime(2020, 11, 11, 0, 0, tzinfo=UTC)
    lines = []
    for i in range(n):
        words = rng.choices(FILLER, k=4)
        if rng.random() < 0.5:
            words += rng.choices(DISASTER, k=3)
        if rng.random() < 0.15:
            words += rng.choices(MEDICAL, k=2)
        if rng.random() < 0.15:
            words += rng.choices(HUMANITARIAN, k=2)
        if rng.random() < 0.3:
            words.append(rng.choice(POSITIVE))
        if rng.random() < 0.3:
            words.append(rng.choice(NEGATIVE))
        rng.shuffle(words)
        ts = start + timedelta(minutes=rng.randint(0, 48 * 60 - 1))
        author = "MetOffice" if i % 25 == 0 else f"user{i}"
        lines.append(
            json.dumps(
                {
                    "id": f"tw{i:04d}",
                    "created_at": ts.isoformat().replace("+00:00", "Z"),
                    "user": {"screen_name": author},
                    "text": " ".join(words),
                    "retweeted": False,
                }
            )
        )
    return "\n".join(lines) + "\n"


def synthetic_synop(seed=3):
    """Hourly reports from two stations across the same 48 hours, with a few
    missing groups."""
    rng = random.Random(seed)
    lines = []
    for day in (11, 12):
        for hour in range(24):
            for station in ("03772", "03005"):
                temp = rng.uniform(5, 15)
                dew = temp - rng.uniform(0.5, 5)
                press = rng.uniform(9900, 10300) % 10000
                wind = rng.randint(2, 30)
                groups = [
                    f"AAXX {day:02d}{hour:02d}4 {station} 41450",
                    f"5{rng.randint(0, 36):02d}{wind:02d}",
                    f"10{round(temp * 10):03d}",
                    f"20{round(dew * 10):03d}",
                    f"3{round(press):04d}",
                ]
                if rng.random() < 0.1:
                    groups = groups[:2]  # drop thermodynamic groups
                lines.append(
                    f"{station},2020,11,{day:02d},{hour:02d},00," + " ".join(groups) + "="
                )
    return "\n".join(lines) + "\n"


@pytest.fixture
def pipeline_workspace(tmp_path: Path):
    """Input files plus a config for a scaled-down full pipeline run."""
    messages = tmp_path / "messages.jsonl"
    messages.write_text(synthetic_messages())
    synop = tmp_path / "synop.csv"
    synop.write_text(synthetic_synop())
    accounts = tmp_path / "accounts.txt"
    accounts.write_text("# stakeholder handles\nmetoffice\nenvagency\n")
    config = tmp_path / "pipeline.cfg"
    config.write_text(
        "\n".join(
            [
                f"messages={messages}",
                f"synop={synop}",
                f"accounts={accounts}",
                "min_docs=3",
                "max_frac=0.6",
                "keep_n=100",
                "lda_k=2",
                "lda_iterations=50",
                "seed=42",
                "bucket=1h",
                "variables=tavg_c,pressure_hpa,wind_kmh",
                f"out={tmp_path / 'out'}",
            ]
        )
        + "\n"
    )
    return tmp_path
