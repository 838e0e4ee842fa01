"""Command-line orchestration of the full pipeline.

Stages (each also runnable standalone from prior-stage artifacts):
ingest -> filter -> topics -> behave -> synop decode -> align -> report.
Configuration is a key=value file; command-line flags win over file values.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

from . import __version__, align, classify, corpus, lda, messages, synop, textnorm
from .errors import ConfigError, CrisisPulseError, DegenerateSeries

ENV_REMOTE = "CRISIS_PULSE_REMOTE"

STAGE_ORDER = ("ingest", "filter", "topics", "behave", "synop", "align", "report")


@dataclass
class PipelineConfig:
    messages_path: Path | None = None
    synop_path: Path | None = None
    accounts_path: Path | None = None
    lexicon_dir: Path | None = None
    stopwords_path: Path | None = None
    min_docs: int = corpus.DEFAULT_MIN_DOCS
    max_frac: float = corpus.DEFAULT_MAX_FRAC
    keep_n: int = corpus.DEFAULT_KEEP_N
    lda_k: int = 5
    lda_alpha: float = lda.DEFAULT_ALPHA
    lda_beta: float = lda.DEFAULT_BETA
    lda_iterations: int = 200
    corpus_variant: str = "bow"
    seed: int | None = None
    classifier: str = "baseline"
    bucket: timedelta = align.DEFAULT_BUCKET
    variables: tuple[str, ...] = align.CLIMATE_VARIABLES
    stations: tuple[str, ...] = ()
    top_terms: int = 10
    bigram_min_count: int = 2
    out_dir: Path = Path("out")

    raw: dict[str, str] = field(default_factory=dict)


def parse_bucket(text: str) -> timedelta:
    text = text.strip().lower()
    units = {"h": 3600, "m": 60, "s": 1}
    if text and text[-1] in units and text[:-1].isdigit():
        return timedelta(seconds=int(text[:-1]) * units[text[-1]])
    raise ConfigError(f"bad bucket duration {text!r} (expected forms like 1h, 30m)")


_PATH_KEYS = {
    "messages": "messages_path",
    "synop": "synop_path",
    "accounts": "accounts_path",
    "lexicon_dir": "lexicon_dir",
    "stopwords": "stopwords_path",
}
_INT_KEYS = {
    "min_docs": "min_docs",
    "keep_n": "keep_n",
    "lda_k": "lda_k",
    "lda_iterations": "lda_iterations",
    "seed": "seed",
    "top_terms": "top_terms",
    "bigram_min_count": "bigram_min_count",
}
_FLOAT_KEYS = {"max_frac": "max_frac", "lda_alpha": "lda_alpha", "lda_beta": "lda_beta"}


def load_config(path: str | Path | None, overrides: dict[str, str]) -> PipelineConfig:
    values: dict[str, str] = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, val = line.split("=", 1)
                values[key.strip()] = val.strip()
    values.update({k: v for k, v in overrides.items() if v is not None})

    cfg = PipelineConfig(raw=dict(values))
    for key, attr in _PATH_KEYS.items():
        if key in values:
            setattr(cfg, attr, Path(values[key]))
    for key, attr in _INT_KEYS.items():
        if key in values:
            setattr(cfg, attr, int(values[key]))
    for key, attr in _FLOAT_KEYS.items():
        if key in values:
            setattr(cfg, attr, float(values[key]))
    if "corpus_variant" in values:
        if values["corpus_variant"] not in ("bow", "tfidf"):
            raise ConfigError("corpus_variant must be bow or tfidf")
        cfg.corpus_variant = values["corpus_variant"]
    if "classifier" in values:
        cfg.classifier = values["classifier"]
    if os.environ.get(ENV_REMOTE):
        cfg.classifier = f"remote={os.environ[ENV_REMOTE]}"
    if "bucket" in values:
        cfg.bucket = parse_bucket(values["bucket"])
    if "variables" in values:
        cfg.variables = tuple(v.strip() for v in values["variables"].split(",") if v.strip())
    if "stations" in values:
        cfg.stations = tuple(s.strip() for s in values["stations"].split(",") if s.strip())
    if "out" in values:
        cfg.out_dir = Path(values["out"])
    return cfg


def validate_config(cfg: PipelineConfig, stages: tuple[str, ...]) -> None:
    """Fail before any work when referenced inputs are missing."""
    needed: list[Path | None] = []
    if "ingest" in stages:
        needed.append(cfg.messages_path)
    if "synop" in stages:
        needed.append(cfg.synop_path)
    needed.extend([cfg.accounts_path, cfg.lexicon_dir, cfg.stopwords_path])
    for p in needed:
        if p is not None and not Path(p).exists():
            raise ConfigError(f"configured path does not exist: {p}")
    if "topics" in stages and cfg.seed is None:
        raise ConfigError("seed is mandatory when topic modeling is enabled")
    unknown = set(cfg.variables) - set(align.CLIMATE_VARIABLES)
    if unknown:
        raise ConfigError(f"unknown climate variables: {sorted(unknown)}")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Provenance record kept alongside the artifacts."""

    def __init__(self, out_dir: Path, cfg: PipelineConfig):
        self.path = out_dir / "MANIFEST.json"
        config_blob = json.dumps(cfg.raw, sort_keys=True).encode()
        self.data = {
            "tool_version": __version__,
            "config_hash": hashlib.sha256(config_blob).hexdigest(),
            "inputs": {},
            "stages": {},
            "complete": False,
        }

    def record_input(self, path: Path | None) -> None:
        if path is not None and Path(path).exists():
            self.data["inputs"][str(path)] = _sha256(Path(path))

    def record_stage(self, stage: str, status: str) -> None:
        self.data["stages"][stage] = status
        self.write()

    def finish(self) -> None:
        self.data["complete"] = True
        self.write()

    def write(self) -> None:
        self.path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def _stopwords(cfg: PipelineConfig):
    if cfg.stopwords_path is not None:
        return textnorm.load_wordlist(cfg.stopwords_path)
    return textnorm.default_stopwords()


def _make_classifier(cfg: PipelineConfig):
    spec_text = cfg.classifier
    if spec_text == "baseline":
        return _baseline(cfg)
    if spec_text.startswith("remote="):
        rest = spec_text[len("remote="):]
        fallback = None
        if rest.endswith(",fallback"):
            rest = rest[: -len(",fallback")]
            fallback = _baseline(cfg)
        return classify.RemoteClassifier(endpoint=rest, fallback=fallback)
    raise ConfigError(f"bad classifier spec {cfg.classifier!r}")


def _baseline(cfg: PipelineConfig) -> classify.BaselineClassifier:
    lex_dir = cfg.lexicon_dir
    sentiment = classify.load_lexicon_set("sentiment", lex_dir) if lex_dir else None
    categories = {}
    if lex_dir:
        for cat in classify.BINARY_CATEGORIES:
            categories[cat] = classify.load_category_lexicon(cat, lex_dir)
    return classify.BaselineClassifier(sentiment=sentiment, categories=categories)


# ---------------------------------------------------------------- stages

def stage_ingest(cfg: PipelineConfig, out: Path) -> None:
    msgs = messages.read_messages(cfg.messages_path)
    messages.write_messages(msgs, out / "messages.jsonl")
    stopwords = _stopwords(cfg)
    with open(out / "tokens.jsonl", "w", encoding="utf-8") as fh:
        for m in msgs:
            doc = textnorm.preprocess_document(m, stopwords)
            fh.write(json.dumps({"id": doc.message_id, "tokens": doc.tokens}) + "\n")


def _load_docs(out: Path) -> list[messages.TokenizedDoc]:
    path = out / "tokens.jsonl"
    if not path.exists():
        raise ConfigError("tokens.jsonl not found; run the ingest stage first")
    return [
        messages.TokenizedDoc(message_id=o["id"], tokens=o["tokens"])
        for o in messages.iter_jsonl(path)
    ]


def stage_filter(cfg: PipelineConfig, out: Path) -> None:
    docs = _load_docs(out)
    sets = classify.filter_pipeline(docs, _make_classifier(cfg))
    flagged = classify.FilteredSet("known_account", [], "known_account")
    if cfg.accounts_path is not None:
        msgs = messages.read_messages(out / "messages.jsonl")
        accounts = textnorm.load_wordlist(cfg.accounts_path)
        flagged = classify.flag_known_accounts(msgs, accounts)
    payload = {
        cat: {"message_ids": fs.message_ids, "source": fs.source}
        for cat, fs in sets.items()
    }
    payload["known_account"] = {
        "message_ids": flagged.message_ids,
        "source": flagged.source,
    }
    (out / "filtered.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def stage_topics(cfg: PipelineConfig, out: Path) -> None:
    docs = _load_docs(out)
    dictionary = corpus.build_dictionary(
        docs, min_docs=cfg.min_docs, max_frac=cfg.max_frac, keep_n=cfg.keep_n
    )
    corpus.save_dictionary(dictionary, out / "dictionary.tsv")
    bows = [corpus.to_bow(d, dictionary) for d in docs]
    if cfg.corpus_variant == "tfidf":
        bows = corpus.tfidf_corpus(bows, dictionary)
    model = lda.train_lda(
        bows,
        K=cfg.lda_k,
        alpha=cfg.lda_alpha,
        beta=cfg.lda_beta,
        iterations=cfg.lda_iterations,
        seed=cfg.seed or 0,
        V=max(len(dictionary), 1),
    )
    lda.save_model(model, out / "lda_model.txt")
    topics = {
        str(k): [
            {"term": t, "weight": w}
            for t, w in lda.top_terms_named(model, k, cfg.top_terms, dictionary)
        ]
        for k in range(model.K)
    }
    assignments = {}
    for doc, bow in zip(docs, bows):
        a = lda.infer_topic(model, bow, seed=cfg.seed or 0)
        assignments[doc.message_id] = {
            "topic": a.topic_id,
            "probability": round(a.probability, 6),
        }
    (out / "topics.json").write_text(
        json.dumps({"topics": topics, "assignments": assignments}, indent=2, sort_keys=True)
        + "\n"
    )


def stage_behave(cfg: PipelineConfig, out: Path) -> None:
    docs = _load_docs(out)
    lex_dir = cfg.lexicon_dir
    lexicons = None
    phase_lexicon = None
    if lex_dir is not None:
        lexicons = {
            ind: classify.load_lexicon_set(ind, lex_dir)
            for ind in classify.BEHAVIORAL_INDICATORS
        }
        phase_lexicon = classify.load_lexicon_set("phase", lex_dir)
    with open(out / "behavioral.jsonl", "w", encoding="utf-8") as fh:
        for doc in docs:
            profile = classify.behavioral_profile(doc, lexicons)
            profile["phase"] = classify.phase_categorize(doc, phase_lexicon)
            fh.write(
                json.dumps(
                    {
                        "id": doc.message_id,
                        "indicators": {
                            ind: {
                                "scores": {k: round(v, 9) for k, v in cs.scores.items()},
                                "dominant": cs.dominant,
                            }
                            for ind, cs in profile.items()
                        },
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def stage_synop_decode(cfg: PipelineConfig, out: Path) -> None:
    text = Path(cfg.synop_path).read_text(encoding="utf-8")
    diagnostics = synop.Diagnostics()
    reports = synop.parse_bulletin(text, diagnostics)
    if cfg.stations:
        reports = [r for r in reports if r.station_id in cfg.stations]
    frame = synop.observations_frame(reports)
    frame.diagnostics.malformed_reports += diagnostics.malformed_reports
    (out / "climate.csv").write_text(synop.frame_to_csv(frame))


def stage_align(cfg: PipelineConfig, out: Path) -> None:
    msgs = messages.read_messages(out / "messages.jsonl")
    filtered = json.loads((out / "filtered.json").read_text())
    positive = set(filtered["positive"]["message_ids"])
    labels = {m.id: "positive" for m in msgs if m.id in positive}
    activity = align.bucket_activity(msgs, labels, cfg.bucket)
    climate = synop.frame_from_csv((out / "climate.csv").read_text())
    frame = align.align_frames(activity, climate, list(cfg.variables))
    (out / "aligned.csv").write_text(align.emit_plot_data(frame))
    (out / "aligned.json").write_text(align.emit_plot_json(frame) + "\n")


def stage_report(cfg: PipelineConfig, out: Path) -> None:
    docs = _load_docs(out)
    filtered = json.loads((out / "filtered.json").read_text())
    topics = json.loads((out / "topics.json").read_text()) if (out / "topics.json").exists() else None
    aligned = (
        align.parse_plot_data((out / "aligned.csv").read_text())
        if (out / "aligned.csv").exists()
        else None
    )

    total = len(docs)
    positive_ids = set(filtered["positive"]["message_ids"])
    report: dict = {
        "total_messages": total,
        "categories": {},
        "known_account_flags": len(filtered.get("known_account", {}).get("message_ids", [])),
    }
    lines = [f"crisis-pulse run report", f"messages ingested: {total}", ""]
    for cat in classify.FILTER_CATEGORIES:
        ids = filtered[cat]["message_ids"]
        entry: dict = {"count": len(ids)}
        if cat != "positive" and ids:
            pos = len(positive_ids & set(ids))
            pct = classify.positive_percentage(pos, len(ids))
            entry.update({"positive": pos, "positive_pct": pct})
            lines.append(f"{cat}: {len(ids)} messages, {pos} positive ({pct}%)")
        else:
            lines.append(f"{cat}: {len(ids)} messages")
        report["categories"][cat] = entry
    if total and positive_ids:
        pct = classify.positive_percentage(len(positive_ids), total)
        report["positive_share_pct"] = pct
        lines.append(f"overall positive share: {len(positive_ids)} of {total} ({pct}%)")
    lines.append(f"known-account flags: {report['known_account_flags']}")

    lines.append("")
    lines.append("top terms:")
    for term, count in corpus.term_frequencies(docs, cfg.top_terms):
        lines.append(f"  {term}\t{count}")
    report["top_terms"] = corpus.term_frequencies(docs, cfg.top_terms)
    lines.append("key bigrams:")
    bigrams = corpus.key_bigrams(docs, cfg.bigram_min_count, cfg.top_terms)
    for bg, count in bigrams:
        lines.append(f"  {bg}\t{count}")
    report["key_bigrams"] = bigrams

    if topics is not None:
        lines.append("")
        lines.append("topics:")
        for k in sorted(topics["topics"], key=int):
            terms = ", ".join(e["term"] for e in topics["topics"][k])
            lines.append(f"  topic {k}: {terms}")
        report["topics"] = topics["topics"]

    if aligned is not None:
        lines.append("")
        lines.append(f"aligned frame: {len(aligned.timestamps)} time points")
        report["aligned_points"] = len(aligned.timestamps)
        correlations = {}
        for name, values in aligned.series.items():
            if name == "activity":
                continue
            try:
                correlations[name] = round(align.correlate(aligned.series["activity"], values), 4)
            except DegenerateSeries:
                correlations[name] = None
        report["correlations_vs_activity"] = correlations
        lines.append("correlation vs activity:")
        for name in correlations:
            val = correlations[name]
            lines.append(f"  {name}: {'n/a' if val is None else val}")

    (out / "report.txt").write_text("\n".join(lines) + "\n")
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "filter": stage_filter,
    "topics": stage_topics,
    "behave": stage_behave,
    "synop": stage_synop_decode,
    "align": stage_align,
    "report": stage_report,
}


def run_stages(cfg: PipelineConfig, stages: tuple[str, ...]) -> int:
    validate_config(cfg, stages)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, cfg)
    for p in (cfg.messages_path, cfg.synop_path, cfg.accounts_path, cfg.stopwords_path):
        manifest.record_input(p)
    manifest.write()
    for stage in stages:
        try:
            _STAGE_FUNCS[stage](cfg, out)
        except CrisisPulseError as exc:
            manifest.record_stage(stage, f"failed: {exc}")
            print(f"stage {stage} failed: {exc}", file=sys.stderr)
            return 1
        manifest.record_stage(stage, "ok")
    manifest.finish()
    return 0


# ---------------------------------------------------------------- argparse

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", type=int, help="RNG seed (mandatory for topics)")
    parser.add_argument("--classifier", help="baseline | remote=URL[,fallback]")
    parser.add_argument("--bucket", help="alignment bucket, e.g. 1h")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--stations", help="comma-separated station whitelist")


def _cfg_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        "seed": None if args.seed is None else str(args.seed),
        "classifier": args.classifier,
        "bucket": args.bucket,
        "out": args.out,
        "stations": args.stations,
    }
    return load_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="crisis-pulse",
        description="Disaster social-media analysis and SYNOP climate decoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("ingest", "filter", "topics", "behave", "align", "report", "run"):
        p = sub.add_parser(name)
        _add_common(p)

    p_synop = sub.add_parser("synop")
    synop_sub = p_synop.add_subparsers(dest="synop_command", required=True)
    p_decode = synop_sub.add_parser("decode")
    _add_common(p_decode)
    p_fetch = synop_sub.add_parser("fetch")
    p_fetch.add_argument("--block", required=True)
    p_fetch.add_argument("--begin", required=True)
    p_fetch.add_argument("--end", required=True)
    p_fetch.add_argument("--output", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "synop" and args.synop_command == "fetch":
            n = synop.fetch_ogimet(args.block, args.begin, args.end, args.output)
            print(f"wrote {n} bytes to {args.output}")
            return 0
        cfg = _cfg_from_args(args)
        if args.command == "run":
            return run_stages(cfg, STAGE_ORDER)
        if args.command == "synop":
            return run_stages(cfg, ("synop",))
        return run_stages(cfg, (args.command,))
    except CrisisPulseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
