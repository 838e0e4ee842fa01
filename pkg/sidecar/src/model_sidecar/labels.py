"""Fixed label sets for every task the sidecar can serve.

These mirror the wire contract exactly; the sidecar never imports the
pipeline package, so the sets are restated here and pinned by the shared
schema/conformance tests.
"""

LABEL_SETS: dict[str, tuple[str, ...]] = {
    "sentiment": ("negative", "neutral", "positive"),
    "emotion": ("angry", "excited", "bored", "fear", "happy", "sad"),
    "intent": ("feedback", "marketing", "news", "query", "spam"),
    "abuse": ("abusive", "hate_speech", "neither"),
    "sarcasm": ("non_sarcastic", "sarcastic"),
    "phase": (
        "prevention_awareness",
        "mitigation",
        "preparedness",
        "response",
        "recovery_needs",
        "recovery_essentials",
    ),
    "binary:disaster": ("no", "yes"),
    "binary:humanitarian": ("no", "yes"),
    "binary:medical": ("no", "yes"),
}
