"""Latent Dirichlet Allocation via collapsed Gibbs sampling.

Topic and document distributions are integrated out; the sampler resamples
per-token topic assignments from

    p(z = k) ∝ (n_dk + α) · (n_kw + β) / (n_k + V·β)

with the current token's counts removed.  Real-valued document vectors
(TF-IDF) contribute weighted count increments: integer weights expand into
unit-weight token instances, fractional weights keep a single instance
carrying their weight.  Fixed seed gives byte-identical models.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .corpus import BowVector, Dictionary
from .errors import (
    ConfigError,
    EmptyCorpus,
    InvalidHyperparameter,
    TopicOutOfRange,
    VocabularyMismatch,
)

DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 0.01
DEFAULT_ITERATIONS = 1000
DEFAULT_FOLD_ITERS = 100

_MODEL_MAGIC = "#crisis-pulse-lda"
_MODEL_VERSION = 1


@dataclass(frozen=True)
class LdaModel:
    K: int
    V: int
    alpha: float
    beta: float
    phi: np.ndarray  # K x V, rows sum to 1
    seed: int
    iterations: int


@dataclass(frozen=True)
class TopicAssignment:
    topic_id: int
    probability: float
    theta: np.ndarray


@njit(cache=True)
def _seed_rng(seed):
    np.random.seed(seed)


@njit(cache=True)
def _draw(p):
    """Sample an index from unnormalized weights p."""
    total = 0.0
    for k in range(p.shape[0]):
        total += p[k]
    r = np.random.random() * total
    acc = 0.0
    for k in range(p.shape[0]):
        acc += p[k]
        if r < acc:
            return k
    return p.shape[0] - 1


@njit(cache=True)
def _init_assignments(token_doc, token_word, token_wt, K, V):
    n = token_doc.shape[0]
    z = np.empty(n, dtype=np.int32)
    n_docs = 0
    for i in range(n):
        if token_doc[i] + 1 > n_docs:
            n_docs = token_doc[i] + 1
    n_dk = np.zeros((n_docs, K))
    n_kw = np.zeros((K, V))
    n_k = np.zeros(K)
    for i in range(n):
        k = int(np.random.random() * K)
        if k == K:
            k = K - 1
        z[i] = k
        n_dk[token_doc[i], k] += token_wt[i]
        n_kw[k, token_word[i]] += token_wt[i]
        n_k[k] += token_wt[i]
    return z, n_dk, n_kw, n_k


@njit(cache=True)
def _sweep(token_doc, token_word, token_wt, z, n_dk, n_kw, n_k, alpha, beta, V):
    K = n_k.shape[0]
    p = np.empty(K)
    vbeta = V * beta
    for i in range(token_doc.shape[0]):
        d = token_doc[i]
        w = token_word[i]
        wt = token_wt[i]
        k_old = z[i]
        n_dk[d, k_old] -= wt
        n_kw[k_old, w] -= wt
        n_k[k_old] -= wt
        for k in range(K):
            p[k] = (n_dk[d, k] + alpha) * (n_kw[k, w] + beta) / (n_k[k] + vbeta)
        k_new = _draw(p)
        z[i] = k_new
        n_dk[d, k_new] += wt
        n_kw[k_new, w] += wt
        n_k[k_new] += wt


@njit(cache=True)
def _conditional_histogram(n_dk_d, n_kw_w, n_k, alpha, beta, V, n_samples):
    """Sample n_samples topics from the collapsed conditional of one token
    (its own counts already removed) and return the histogram."""
    K = n_k.shape[0]
    p = np.empty(K)
    vbeta = V * beta
    for k in range(K):
        p[k] = (n_dk_d[k] + alpha) * (n_kw_w[k] + beta) / (n_k[k] + vbeta)
    hist = np.zeros(K, dtype=np.int64)
    for _ in range(n_samples):
        hist[_draw(p)] += 1
    return hist


@njit(cache=True)
def _fold_in(token_word, token_wt, phi, alpha, fold_iters):
    """Fold-in Gibbs with phi fixed; theta averaged over the last half of sweeps."""
    K = phi.shape[0]
    n = token_word.shape[0]
    z = np.empty(n, dtype=np.int32)
    n_dk = np.zeros(K)
    doc_len = 0.0
    for i in range(n):
        k = int(np.random.random() * K)
        if k == K:
            k = K - 1
        z[i] = k
        n_dk[k] += token_wt[i]
        doc_len += token_wt[i]
    p = np.empty(K)
    theta_acc = np.zeros(K)
    n_avg = 0
    start_avg = fold_iters // 2
    for sweep in range(fold_iters):
        for i in range(n):
            w = token_word[i]
            wt = token_wt[i]
            k_old = z[i]
            n_dk[k_old] -= wt
            for k in range(K):
                p[k] = (n_dk[k] + alpha) * phi[k, w]
            k_new = _draw(p)
            z[i] = k_new
            n_dk[k_new] += wt
        if sweep >= start_avg:
            denom = doc_len + K * alpha
            for k in range(K):
                theta_acc[k] += (n_dk[k] + alpha) / denom
            n_avg += 1
    if n_avg == 0:
        denom = doc_len + K * alpha
        for k in range(K):
            theta_acc[k] = (n_dk[k] + alpha) / denom
        n_avg = 1
    return theta_acc / n_avg


def _expand_corpus(
    corpus: Sequence[BowVector], V: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    docs: list[int] = []
    words: list[int] = []
    wts: list[float] = []
    for d, bow in enumerate(corpus):
        for w, weight in bow.entries:
            if w >= V:
                raise VocabularyMismatch(f"token id {w} >= vocabulary size {V}")
            if float(weight).is_integer():
                docs.extend([d] * int(weight))
                words.extend([w] * int(weight))
                wts.extend([1.0] * int(weight))
            else:
                docs.append(d)
                words.append(w)
                wts.append(float(weight))
    return (
        np.asarray(docs, dtype=np.int32),
        np.asarray(words, dtype=np.int32),
        np.asarray(wts, dtype=np.float64),
    )


def _expand_doc(doc: BowVector, V: int) -> tuple[np.ndarray, np.ndarray]:
    _, words, wts = _expand_corpus([doc], V)
    return words, wts


def train_lda(
    corpus: Sequence[BowVector],
    K: int,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    V: int | None = None,
    on_sweep: Callable[[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray], None]
    | None = None,
) -> LdaModel:
    """Train a topic model; on_sweep(i, n_dk, n_kw, n_k, z) is a test hook."""
    if not corpus:
        raise EmptyCorpus("cannot train on an empty corpus")
    if K < 1:
        raise InvalidHyperparameter(f"K must be >= 1, got {K}")
    if alpha <= 0 or beta <= 0:
        raise InvalidHyperparameter(f"priors must be positive, got alpha={alpha} beta={beta}")
    if V is None:
        V = max((i for bow in corpus for i, _ in bow.entries), default=-1) + 1
        V = max(V, 1)
    token_doc, token_word, token_wt = _expand_corpus(corpus, V)
    _seed_rng(seed)
    if token_doc.shape[0] == 0:
        n_kw = np.zeros((K, V))
    else:
        z, n_dk, n_kw, n_k = _init_assignments(token_doc, token_word, token_wt, K, V)
        for sweep in range(iterations):
            _sweep(token_doc, token_word, token_wt, z, n_dk, n_kw, n_k, alpha, beta, V)
            if on_sweep is not None:
                on_sweep(sweep, n_dk, n_kw, n_k, z)
    phi = (n_kw + beta) / (n_kw.sum(axis=1, keepdims=True) + V * beta)
    phi.setflags(write=False)
    return LdaModel(
        K=K, V=V, alpha=alpha, beta=beta, phi=phi, seed=seed, iterations=iterations
    )


def infer_topic(
    model: LdaModel,
    doc: BowVector,
    fold_iters: int = DEFAULT_FOLD_ITERS,
    seed: int = 0,
) -> TopicAssignment:
    words, wts = _expand_doc(doc, model.V)
    if words.size == 0:
        theta = np.full(model.K, 1.0 / model.K)
    else:
        _seed_rng(seed)
        theta = _fold_in(words, wts, model.phi, model.alpha, fold_iters)
    topic = int(np.argmax(theta))  # argmax takes the lowest index on ties
    theta.setflags(write=False)
    return TopicAssignment(topic_id=topic, probability=float(theta[topic]), theta=theta)


def top_terms(model: LdaModel, topic: int, n: int) -> list[tuple[int, float]]:
    if not 0 <= topic < model.K:
        raise TopicOutOfRange(f"topic {topic} not in [0, {model.K})")
    row = model.phi[topic]
    order = sorted(range(model.V), key=lambda w: (-row[w], w))
    return [(w, float(row[w])) for w in order[:n]]


def perplexity(
    model: LdaModel,
    corpus: Sequence[BowVector],
    fold_iters: int = DEFAULT_FOLD_ITERS,
) -> float:
    if not corpus:
        raise EmptyCorpus("perplexity of an empty corpus is undefined")
    log_lik = 0.0
    total = 0.0
    for doc in corpus:
        if len(doc) == 0:
            continue
        theta = infer_topic(model, doc, fold_iters=fold_iters, seed=model.seed).theta
        mix = theta @ model.phi  # length V
        for w, wt in doc.entries:
            log_lik += wt * np.log(mix[w])
            total += wt
    if total == 0:
        raise EmptyCorpus("corpus contains no tokens")
    return float(np.exp(-log_lik / total))


def save_model(model: LdaModel, path: str | Path) -> None:
    """Versioned text serialization; phi rows as hex floats for exact round-trip."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{_MODEL_MAGIC} v{_MODEL_VERSION}\n")
        fh.write(f"K={model.K}\nV={model.V}\n")
        fh.write(f"alpha={float(model.alpha).hex()}\nbeta={float(model.beta).hex()}\n")
        fh.write(f"seed={model.seed}\niterations={model.iterations}\n")
        for row in model.phi:
            fh.write(" ".join(float(x).hex() for x in row) + "\n")


def load_model(path: str | Path) -> LdaModel:
    with open(path, encoding="utf-8") as fh:
        magic = fh.readline().strip()
        if not magic.startswith(_MODEL_MAGIC):
            raise ConfigError(f"{path}: not an LDA model file")
        params: dict[str, str] = {}
        for _ in range(6):
            key, val = fh.readline().strip().split("=", 1)
            params[key] = val
        K = int(params["K"])
        V = int(params["V"])
        phi = np.empty((K, V))
        for k in range(K):
            phi[k] = [float.fromhex(tok) for tok in fh.readline().split()]
    phi.setflags(write=False)
    return LdaModel(
        K=K,
        V=V,
        alpha=float.fromhex(params["alpha"]),
        beta=float.fromhex(params["beta"]),
        phi=phi,
        seed=int(params["seed"]),
        iterations=int(params["iterations"]),
    )


def top_terms_named(
    model: LdaModel, topic: int, n: int, dictionary: Dictionary
) -> list[tuple[str, float]]:
    id_to_token = dictionary.id_to_token
    return [(id_to_token.get(w, f"<{w}>"), p) for w, p in top_terms(model, topic, n)]
