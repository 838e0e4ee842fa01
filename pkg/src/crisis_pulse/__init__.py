"""crisis-pulse: disaster social-media analysis and SYNOP climate decoding."""

from .align import (
    ActivitySeries,
    AlignedFrame,
    align_frames,
    bucket_activity,
    correlate,
    emit_plot_data,
)
from .classify import (
    BaselineClassifier,
    ClassScores,
    FilteredSet,
    RemoteClassifier,
    behavioral_profile,
    classify_binary,
    classify_sentiment,
    filter_pipeline,
    flag_known_accounts,
    phase_categorize,
    positive_percentage,
    remote_classify,
)
from .corpus import (
    BowVector,
    Dictionary,
    build_dictionary,
    key_bigrams,
    term_frequencies,
    tfidf_corpus,
    to_bow,
)
from .lda import LdaModel, TopicAssignment, infer_topic, perplexity, top_terms, train_lda
from .messages import RawMessage, TokenizedDoc, read_messages
from .stemmer import stem
from .synop import (
    ClimateFrame,
    SynopObservation,
    SynopReport,
    decode_report,
    observations_frame,
    parse_bulletin,
)
from .textnorm import normalize, preprocess_document, tokenize

__version__ = "0.1.0"
