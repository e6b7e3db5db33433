"""Bag-of-context word embeddings and similarity queries.

Single-threaded CBOW trainer with negative sampling, fully seeded so
training is bitwise reproducible.  Query-time context prediction uses a
full softmax over the output vectors.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import CorpusHandle
from .errors import VocabularyError

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class CbowConfig:
    dim: int = 100
    window: int = 7
    min_count: int | None = None  # None: scale with corpus size, floor 5
    epochs: int = 5
    negative: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "dim": self.dim, "window": self.window, "min_count": self.min_count,
            "epochs": self.epochs, "negative": self.negative,
            "learning_rate": self.learning_rate,
            "min_learning_rate": self.min_learning_rate, "seed": self.seed,
        }


def auto_min_count(corpus_tokens: int) -> int:
    # 500 at a ~1e9-token corpus, scaled down for desk-size corpora
    return max(5, round(500 * corpus_tokens / 1e9))


@dataclass(frozen=True)
class EmbeddingModel:
    tokens: tuple[str, ...]
    counts: np.ndarray
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    config: CbowConfig
    corpus_tokens: int
    index: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(
                self, "index", {t: i for i, t in enumerate(self.tokens)}
            )

    def __len__(self) -> int:
        return len(self.tokens)

    def idx(self, token: str) -> int:
        try:
            return self.index[token]
        except KeyError:
            raise VocabularyError(f"token not in vocabulary: {token!r}") from None

    def vector(self, token: str) -> np.ndarray:
        return self.input_vectors[self.idx(token)]

    def normalized_inputs(self) -> np.ndarray:
        norms = np.linalg.norm(self.input_vectors, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return self.input_vectors / norms


def _sentences_as_indices(corpus: CorpusHandle, vocab: dict[str, int]):
    sents = []
    for toks in corpus.tokens:
        ids = [vocab[t] for t in toks if t in vocab]
        if len(ids) >= 2:
            sents.append(np.asarray(ids, dtype=np.int64))
    return sents


def train_cbow(corpus: CorpusHandle, config: CbowConfig = CbowConfig()) -> EmbeddingModel:
    """Train embeddings on the corpus token streams.

    Deterministic for a fixed seed (single worker).  Tokens below the
    frequency cutoff are dropped from sentences before windowing.
    """
    counts = Counter()
    total_tokens = 0
    for toks in corpus.tokens:
        counts.update(toks)
        total_tokens += len(toks)

    min_count = config.min_count
    if min_count is None:
        min_count = auto_min_count(total_tokens)

    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    if not kept:
        raise VocabularyError(
            f"no tokens with count >= {min_count}; corpus too small"
        )
    vocab = {t: i for i, t in enumerate(kept)}
    vcounts = np.array([counts[t] for t in kept], dtype=np.int64)

    sents = _sentences_as_indices(corpus, vocab)
    rng = np.random.default_rng(config.seed)

    nv = len(kept)
    w_in = (rng.random((nv, config.dim)) - 0.5) / config.dim
    w_out = np.zeros((nv, config.dim))

    # unigram^0.75 noise distribution for negative sampling
    noise = vcounts.astype(np.float64) ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    centers_per_epoch = sum(len(s) for s in sents)
    total_centers = max(1, centers_per_epoch * config.epochs)
    lr0, lr_min = config.learning_rate, config.min_learning_rate
    win, nneg = config.window, config.negative
    done = 0

    for _ in range(config.epochs):
        negatives = np.searchsorted(
            noise_cdf, rng.random(centers_per_epoch * nneg)
        ).reshape(-1, nneg) if nneg else None
        epoch_pos = 0
        for sent in sents:
            m = len(sent)
            for i in range(m):
                lr = max(lr_min, lr0 * (1.0 - done / total_centers))
                done += 1
                ctx = np.concatenate((sent[max(0, i - win):i], sent[i + 1:i + 1 + win]))
                if ctx.size == 0:
                    epoch_pos += 1
                    continue
                center = sent[i]
                h = w_in[ctx].mean(axis=0)

                if nneg:
                    negs = negatives[epoch_pos]
                    negs = negs[negs != center]
                    targets = np.concatenate(([center], negs))
                else:
                    targets = np.array([center])
                epoch_pos += 1

                labels = np.zeros(len(targets))
                labels[0] = 1.0
                out = w_out[targets]
                scores = out @ h
                preds = 1.0 / (1.0 + np.exp(-scores))
                grad = (labels - preds) * lr

                grad_h = grad @ out
                np.add.at(w_out, targets, np.outer(grad, h))
                np.add.at(w_in, ctx, grad_h)

    return EmbeddingModel(
        tokens=tuple(kept),
        counts=vcounts,
        input_vectors=w_in,
        output_vectors=w_out,
        config=replace(config, min_count=min_count),
        corpus_tokens=total_tokens,
    )


def _cosine_rows(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def similarity(model: EmbeddingModel, w1: str, w2: str) -> float:
    """Cosine similarity of the two tokens' input vectors."""
    return _cosine_rows(model.vector(w1), model.vector(w2))


def top_similar(model: EmbeddingModel, w: str, k: int) -> list[tuple[str, float]]:
    """The k most cosine-similar tokens to ``w`` (itself excluded),
    descending similarity, ties broken lexicographically."""
    if k < 1:
        raise ValueError("k must be >= 1")
    i = model.idx(w)
    normed = model.normalized_inputs()
    sims = normed @ normed[i]
    order = sorted(
        (j for j in range(len(model)) if j != i),
        key=lambda j: (-sims[j], model.tokens[j]),
    )
    return [(model.tokens[j], float(sims[j])) for j in order[:k]]


def predict_context(
    model: EmbeddingModel, context: list[str], k: int
) -> list[tuple[str, float]]:
    """Most likely tokens for a context: average the context input
    vectors and softmax against every output vector."""
    ids = [model.index[t] for t in context if t in model.index]
    if not ids:
        raise VocabularyError(f"no context token in vocabulary: {context!r}")
    h = model.input_vectors[ids].mean(axis=0)
    scores = model.output_vectors @ h
    scores -= scores.max()
    probs = np.exp(scores)
    probs /= probs.sum()
    assert abs(probs.sum() - 1.0) < 1e-6
    order = sorted(
        range(len(model)), key=lambda j: (-probs[j], model.tokens[j])
    )
    return [(model.tokens[j], float(probs[j])) for j in order[:k]]


@dataclass(frozen=True)
class ThresholdEstimate:
    threshold: float
    fraction: float
    sample_pairs: int
    seed: int
    sampled_similarities: np.ndarray

    def cdf(self) -> tuple[np.ndarray, np.ndarray]:
        values = np.sort(self.sampled_similarities)
        cum = np.arange(1, len(values) + 1) / len(values)
        return values, cum


def threshold_for_fraction(
    model: EmbeddingModel, f: float, sample_pairs: int = 200_000, seed: int = 0
) -> ThresholdEstimate:
    """Cosine threshold that keeps roughly fraction ``f`` of all token
    pairs, estimated from uniformly sampled pairs."""
    if not 0.0 < f < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {f}")
    if sample_pairs < 1000:
        raise ValueError("sample_pairs must be >= 1000 for a usable estimate")
    nv = len(model)
    if nv < 2:
        raise VocabularyError("need at least 2 tokens to sample pairs")
    rng = np.random.default_rng(seed)
    normed = model.normalized_inputs()

    sims = np.empty(sample_pairs)
    filled = 0
    while filled < sample_pairs:
        need = sample_pairs - filled
        i = rng.integers(0, nv, size=need + need // 8 + 8)
        j = rng.integers(0, nv, size=i.size)
        ok = i != j
        i, j = i[ok][:need], j[ok][:need]
        sims[filled:filled + len(i)] = np.einsum("ij,ij->i", normed[i], normed[j])
        filled += len(i)

    threshold = float(np.quantile(sims, 1.0 - f))
    return ThresholdEstimate(threshold, f, sample_pairs, seed, sims)


def save_model(model: EmbeddingModel, out_dir) -> None:
    """Write the model as .npy arrays plus JSON metadata (plain files,
    so artifacts are byte-stable across runs)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "input_vectors.npy", model.input_vectors)
    np.save(out / "output_vectors.npy", model.output_vectors)
    with open(out / "vocab.tsv", "w", encoding="utf-8") as fh:
        for t, c in zip(model.tokens, model.counts):
            fh.write(f"{t}\t{int(c)}\n")
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "vocab_size": len(model),
        "corpus_tokens": model.corpus_tokens,
        "config": model.config.to_dict(),
    }
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(model_dir) -> EmbeddingModel:
    path = Path(model_dir)
    with open(path / "meta.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"unsupported model format version: {meta.get('format_version')}"
        )
    tokens, counts = [], []
    with open(path / "vocab.tsv", encoding="utf-8") as fh:
        for line in fh:
            t, c = line.rstrip("\n").split("\t")
            tokens.append(t)
            counts.append(int(c))
    return EmbeddingModel(
        tokens=tuple(tokens),
        counts=np.asarray(counts, dtype=np.int64),
        input_vectors=np.load(path / "input_vectors.npy"),
        output_vectors=np.load(path / "output_vectors.npy"),
        config=CbowConfig(**meta["config"]),
        corpus_tokens=meta["corpus_tokens"],
    )
