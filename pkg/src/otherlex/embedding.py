"""Paragraph-vector embeddings trained from scratch on top of numpy.

Two objectives over augmented token streams:

- distributed memory (pvdm): predict the token at each position from the
  average of the document vector and the in-vocabulary context vectors in a
  +-k window;
- distributed bag of words (pvdbow): predict the token at each position from
  the document vector alone.

Both use negative-sampling logistic loss against a unigram^0.75 noise
distribution. `step_loss_and_grads` is the pure per-position form of the
objective; the trainer applies exactly the sum of those per-position
gradients one document at a time, which keeps runs deterministic and lets
tests check the analytic gradients against central finite differences.
"""

from __future__ import annotations

import struct
import threading
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, NumericalError
from .util import derive_seed

MODES = ("pvdm", "pvdbow")


@dataclass(frozen=True)
class EmbedHyper:
    dim: int = 600
    window: int = 2
    epochs: int = 20
    lr_start: float = 0.025
    lr_end: float = 0.0001
    negative: int = 5
    min_count: int = 2
    mode: str = "pvdm"
    seed: int = 1

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0 < self.lr_end <= self.lr_start:
            raise ValueError("need 0 < lr_end <= lr_start")
        if self.negative < 0:
            raise ValueError("negative must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class Vocab:
    tokens: list[str]  # index -> token, ordered by descending count then token
    index: dict[str, int]
    counts: np.ndarray  # int64, aligned with tokens
    min_count: int

    def __len__(self) -> int:
        return len(self.tokens)


def build_vocab(streams: Iterable[Sequence[str]], min_count: int = 2) -> Vocab:
    """Count tokens across streams and keep those at or above min_count."""
    counts: dict[str, int] = {}
    for stream in streams:
        for token in stream:
            counts[token] = counts.get(token, 0) + 1
    kept = sorted(
        ((token, count) for token, count in counts.items() if count >= min_count),
        key=lambda item: (-item[1], item[0]),
    )
    if not kept:
        raise DataError(f"vocabulary is empty at min_count={min_count}")
    tokens = [token for token, _ in kept]
    return Vocab(
        tokens=tokens,
        index={token: i for i, token in enumerate(tokens)},
        counts=np.array([count for _, count in kept], dtype=np.int64),
        min_count=min_count,
    )


def context_window(stream: Sequence, i: int, k: int) -> list[int]:
    """Positions within +-k of i, clipped to the stream, excluding i itself."""
    if not 0 <= i < len(stream):
        raise IndexError(f"position {i} outside stream of length {len(stream)}")
    return [j for j in range(max(0, i - k), min(len(stream), i + k + 1)) if j != i]


class NoiseSampler:
    """Draws vocabulary indices proportional to count^power."""

    def __init__(self, counts: np.ndarray, power: float = 0.75):
        weights = counts.astype(np.float64) ** power
        total = weights.sum()
        if total <= 0:
            raise NumericalError("noise distribution has zero mass")
        self.probabilities = weights / total
        self._cumulative = np.cumsum(self.probabilities)
        self._cumulative[-1] = 1.0

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return np.searchsorted(self._cumulative, rng.random(shape), side="right").astype(np.int64)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def step_loss_and_grads(doc_vec, ctx_vecs, out_vecs, labels):
    """Negative-sampling logistic loss for one position, with all gradients.

    The hidden vector is the mean of the document vector and the context rows
    (no context rows for pvdbow). Returns (loss, grad_doc, grad_ctx,
    grad_out); grad_ctx has one row per context row.
    """
    doc_vec = np.asarray(doc_vec)
    ctx_vecs = np.asarray(ctx_vecs).reshape(-1, doc_vec.shape[0])
    out_vecs = np.asarray(out_vecs)
    labels = np.asarray(labels, dtype=doc_vec.dtype)
    m = 1 + ctx_vecs.shape[0]
    hidden = (doc_vec + ctx_vecs.sum(axis=0)) / m
    scores = out_vecs @ hidden
    loss = float(np.sum(np.logaddexp(0.0, scores) - labels * scores))
    g = _sigmoid(scores) - labels
    grad_out = np.outer(g, hidden)
    grad_hidden = g @ out_vecs
    grad_doc = grad_hidden / m
    grad_ctx = np.tile(grad_hidden / m, (ctx_vecs.shape[0], 1))
    return loss, grad_doc, grad_ctx, grad_out


@dataclass
class _CompiledDoc:
    targets: np.ndarray  # (P,) vocab ids with an in-vocab token at the position
    ctx: np.ndarray  # (P, width) padded context vocab ids
    ctx_mask: np.ndarray  # (P, width) validity mask
    denom: np.ndarray  # (P,) 1 + number of context rows


def _compile_stream(tokens: Sequence[str], vocab: Vocab, hyper: EmbedHyper) -> _CompiledDoc:
    ids = np.array([vocab.index.get(t, -1) for t in tokens], dtype=np.int64)
    kept = np.nonzero(ids >= 0)[0]
    targets = ids[kept]
    if hyper.mode == "pvdbow" or kept.size == 0:
        width = 0
        ctx = np.zeros((kept.size, 0), dtype=np.int64)
        mask = np.zeros((kept.size, 0), dtype=bool)
    else:
        rows = []
        for position in kept:
            row = [ids[j] for j in context_window(ids, int(position), hyper.window) if ids[j] >= 0]
            rows.append(row)
        width = max((len(r) for r in rows), default=0)
        ctx = np.zeros((kept.size, width), dtype=np.int64)
        mask = np.zeros((kept.size, width), dtype=bool)
        for r, row in enumerate(rows):
            ctx[r, : len(row)] = row
            mask[r, : len(row)] = True
    denom = 1.0 + mask.sum(axis=1, dtype=np.float64)
    return _CompiledDoc(targets=targets, ctx=ctx, ctx_mask=mask, denom=denom)


def _draw_negatives(sampler, rng, targets: np.ndarray, k: int, vocab_size: int) -> np.ndarray:
    if k == 0 or vocab_size < 2:
        return np.zeros((targets.size, 0), dtype=np.int64)
    negatives = sampler.sample(rng, (targets.size, k))
    clash = negatives == targets[:, None]
    while clash.any():
        negatives[clash] = sampler.sample(rng, int(clash.sum()))
        clash = negatives == targets[:, None]
    return negatives


def _apply_doc_batch(
    doc_vectors: np.ndarray,
    word_vectors: np.ndarray,
    out_weights: np.ndarray,
    doc_row: int,
    compiled: _CompiledDoc,
    negatives: np.ndarray,
    alphas: np.ndarray,
    update_words: bool,
    update_out: bool,
) -> float:
    """One pass over a document: summed per-position gradients, then update."""
    targets = compiled.targets
    n_pos = targets.size
    dim = word_vectors.shape[1]
    if compiled.ctx.shape[1]:
        ctx_rows = word_vectors[compiled.ctx] * compiled.ctx_mask[:, :, None]
        ctx_sum = ctx_rows.sum(axis=1)
    else:
        ctx_sum = np.zeros((n_pos, dim), dtype=word_vectors.dtype)
    hidden = (doc_vectors[doc_row][None, :] + ctx_sum) / compiled.denom[:, None].astype(word_vectors.dtype)

    out_ids = np.concatenate([targets[:, None], negatives], axis=1)
    out_rows = out_weights[out_ids]
    scores = np.einsum("pkd,pd->pk", out_rows, hidden)
    labels = np.zeros_like(scores)
    labels[:, 0] = 1.0
    loss = float(np.sum(np.logaddexp(0.0, scores) - labels * scores))

    g = (_sigmoid(scores) - labels) * alphas[:, None].astype(scores.dtype)
    grad_hidden = np.einsum("pk,pkd->pd", g, out_rows)
    per_source = grad_hidden / compiled.denom[:, None].astype(grad_hidden.dtype)

    if update_out:
        grad_out = g[:, :, None] * hidden[:, None, :]
        np.add.at(out_weights, out_ids.reshape(-1), -grad_out.reshape(-1, dim))
    doc_vectors[doc_row] -= per_source.sum(axis=0)
    if update_words and compiled.ctx.shape[1]:
        flat_ids = compiled.ctx[compiled.ctx_mask]
        flat_grads = np.broadcast_to(per_source[:, None, :], compiled.ctx.shape + (dim,))[compiled.ctx_mask]
        np.add.at(word_vectors, flat_ids, -flat_grads)
    return loss


@dataclass
class EmbeddingModel:
    hyper: EmbedHyper
    vocab: Vocab
    doc_ids: list[str]
    doc_index: dict[str, int]
    doc_vectors: np.ndarray  # (n_docs, dim) float32
    word_vectors: np.ndarray  # (V, dim) float32
    out_weights: np.ndarray  # (V, dim) float32
    epoch_losses: list[float] = field(default_factory=list)


def _init_matrix(rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    bound = 0.5 / dim
    return rng.uniform(-bound, bound, size=(rows, dim)).astype(np.float32)


def train(
    streams: Sequence[tuple[str, Sequence[str]]],
    hyper: EmbedHyper,
    threads: int = 1,
) -> EmbeddingModel:
    """Train paragraph vectors over (doc_id, tokens) streams.

    Single-threaded runs are bit-identical for equal seeds and inputs. With
    threads > 1 workers share the parameter matrices without locking
    (best-effort, non-deterministic, throughput only).
    """
    if not streams:
        raise DataError("no documents to train on")
    doc_ids = [doc_id for doc_id, _ in streams]
    if len(set(doc_ids)) != len(doc_ids):
        raise DataError("duplicate document ids in training streams")
    vocab = build_vocab((tokens for _, tokens in streams), hyper.min_count)

    rng = np.random.default_rng(hyper.seed)
    dim = hyper.dim
    doc_vectors = _init_matrix(rng, len(doc_ids), dim)
    word_vectors = _init_matrix(rng, len(vocab), dim)
    out_weights = _init_matrix(rng, len(vocab), dim)
    sampler = NoiseSampler(vocab.counts)

    compiled = [_compile_stream(tokens, vocab, hyper) for _, tokens in streams]
    steps_per_epoch = sum(c.targets.size for c in compiled)
    if steps_per_epoch == 0:
        raise DataError("no in-vocabulary target positions to train on")
    total_steps = hyper.epochs * steps_per_epoch
    lr_span = hyper.lr_end - hyper.lr_start
    denominator = max(1, total_steps - 1)

    model = EmbeddingModel(
        hyper=hyper,
        vocab=vocab,
        doc_ids=doc_ids,
        doc_index={doc_id: i for i, doc_id in enumerate(doc_ids)},
        doc_vectors=doc_vectors,
        word_vectors=word_vectors,
        out_weights=out_weights,
    )

    if threads > 1:
        _train_lockfree(model, compiled, sampler, threads)
        return model

    step = 0
    for epoch in range(hyper.epochs):
        epoch_loss = 0.0
        for doc_row, comp in enumerate(compiled):
            n_pos = comp.targets.size
            if n_pos == 0:
                continue
            alphas = hyper.lr_start + lr_span * (np.arange(step, step + n_pos) / denominator)
            step += n_pos
            negatives = _draw_negatives(sampler, rng, comp.targets, hyper.negative, len(vocab))
            loss = _apply_doc_batch(
                doc_vectors, word_vectors, out_weights, doc_row, comp, negatives,
                alphas, update_words=hyper.mode == "pvdm", update_out=True,
            )
            if not np.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, document {doc_ids[doc_row]!r}, step {step}"
                )
            epoch_loss += loss
        model.epoch_losses.append(epoch_loss / steps_per_epoch)
    return model


def _train_lockfree(model: EmbeddingModel, compiled, sampler, threads: int) -> None:
    hyper = model.hyper
    shards = [list(range(i, len(compiled), threads)) for i in range(threads)]
    lr_span = hyper.lr_end - hyper.lr_start

    def work(worker: int, rows: list[int]) -> None:
        rng = np.random.default_rng(derive_seed(hyper.seed, f"worker{worker}"))
        shard_steps = hyper.epochs * sum(compiled[r].targets.size for r in rows)
        denominator = max(1, shard_steps - 1)
        step = 0
        for _ in range(hyper.epochs):
            for row in rows:
                comp = compiled[row]
                n_pos = comp.targets.size
                if n_pos == 0:
                    continue
                alphas = hyper.lr_start + lr_span * (np.arange(step, step + n_pos) / denominator)
                step += n_pos
                negatives = _draw_negatives(sampler, rng, comp.targets, hyper.negative, len(model.vocab))
                _apply_doc_batch(
                    model.doc_vectors, model.word_vectors, model.out_weights, row, comp,
                    negatives, alphas, update_words=hyper.mode == "pvdm", update_out=True,
                )

    workers = [threading.Thread(target=work, args=(i, shard)) for i, shard in enumerate(shards)]
    for thread in workers:
        thread.start()
    for thread in workers:
        thread.join()
    if not np.isfinite(model.doc_vectors).all():
        raise NumericalError("non-finite document vectors after lock-free training")


def infer_vector(
    model: EmbeddingModel,
    tokens: Sequence[str],
    steps: int = 100,
    lr: float | None = None,
    seed: int | None = None,
) -> np.ndarray:
    """Optimize a fresh document vector against frozen word/output weights.

    Out-of-vocabulary tokens are skipped; if nothing is left the zero vector
    comes back with a warning.
    """
    hyper = model.hyper
    compiled = _compile_stream(tokens, model.vocab, hyper)
    if seed is None:
        seed = derive_seed(hyper.seed, "infer")
    rng = np.random.default_rng(seed)
    if compiled.targets.size == 0:
        warnings.warn("all tokens out of vocabulary; returning zero vector", stacklevel=2)
        return np.zeros(hyper.dim, dtype=np.float32)

    doc_vec = _init_matrix(rng, 1, hyper.dim)
    sampler = NoiseSampler(model.vocab.counts)
    lr_start = hyper.lr_start if lr is None else lr
    lr_end = min(hyper.lr_end, lr_start)
    n_pos = compiled.targets.size
    total = steps * n_pos
    denominator = max(1, total - 1)
    step = 0
    for _ in range(steps):
        alphas = lr_start + (lr_end - lr_start) * (np.arange(step, step + n_pos) / denominator)
        step += n_pos
        negatives = _draw_negatives(sampler, rng, compiled.targets, hyper.negative, len(model.vocab))
        loss = _apply_doc_batch(
            doc_vec, model.word_vectors, model.out_weights, 0, compiled, negatives,
            alphas, update_words=False, update_out=False,
        )
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite loss during inference at step {step}")
    return doc_vec[0].copy()


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cosine similarity, in [0, 2]. Errors on zero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericalError("cosine distance undefined for zero vectors")
    return float(1.0 - np.dot(u, v) / (nu * nv))


# --- model file -------------------------------------------------------------
#
# Layout (all little-endian):
#   magic "OLPV" | u16 version | u8 mode (0 pvdm, 1 pvdbow)
#   u32 dim, window, epochs, negative, min_count | f64 lr_start, lr_end
#   u64 seed | u32 n_docs | u32 vocab_size
#   doc-id table: n_docs x (u32 byte length, utf-8 bytes)
#   vocab table: vocab_size x (u32 byte length, utf-8 bytes, u64 count)
#   doc_vectors, word_vectors, out_weights: row-major float32

_MAGIC = b"OLPV"
_VERSION = 1


def _write_string(fh, text: str) -> None:
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_exact(fh, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise DataError("model file truncated")
    return raw


def _read_string(fh) -> str:
    (length,) = struct.unpack("<I", _read_exact(fh, 4))
    return _read_exact(fh, length).decode("utf-8")


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    hyper = model.hyper
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HB", _VERSION, MODES.index(hyper.mode)))
        fh.write(struct.pack("<IIIII", hyper.dim, hyper.window, hyper.epochs, hyper.negative, hyper.min_count))
        fh.write(struct.pack("<dd", hyper.lr_start, hyper.lr_end))
        fh.write(struct.pack("<Q", hyper.seed))
        fh.write(struct.pack("<II", len(model.doc_ids), len(model.vocab)))
        for doc_id in model.doc_ids:
            _write_string(fh, doc_id)
        for token, count in zip(model.vocab.tokens, model.vocab.counts):
            _write_string(fh, token)
            fh.write(struct.pack("<Q", int(count)))
        for matrix in (model.doc_vectors, model.word_vectors, model.out_weights):
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def load_model(path: str | Path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != _MAGIC:
            raise DataError(f"{path}: not a model file (bad magic)")
        version, mode_code = struct.unpack("<HB", _read_exact(fh, 3))
        if version != _VERSION:
            raise DataError(f"{path}: unsupported model version {version}")
        if mode_code >= len(MODES):
            raise DataError(f"{path}: unknown mode code {mode_code}")
        dim, window, epochs, negative, min_count = struct.unpack("<IIIII", _read_exact(fh, 20))
        lr_start, lr_end = struct.unpack("<dd", _read_exact(fh, 16))
        (seed,) = struct.unpack("<Q", _read_exact(fh, 8))
        n_docs, vocab_size = struct.unpack("<II", _read_exact(fh, 8))
        doc_ids = [_read_string(fh) for _ in range(n_docs)]
        tokens: list[str] = []
        counts = np.zeros(vocab_size, dtype=np.int64)
        for i in range(vocab_size):
            tokens.append(_read_string(fh))
            (counts[i],) = struct.unpack("<Q", _read_exact(fh, 8))
        matrices = []
        for rows in (n_docs, vocab_size, vocab_size):
            raw = _read_exact(fh, rows * dim * 4)
            matrices.append(np.frombuffer(raw, dtype="<f4").reshape(rows, dim).copy())
    hyper = EmbedHyper(
        dim=dim, window=window, epochs=epochs, lr_start=lr_start, lr_end=lr_end,
        negative=negative, min_count=min_count, mode=MODES[mode_code], seed=seed,
    )
    vocab = Vocab(tokens=tokens, index={t: i for i, t in enumerate(tokens)}, counts=counts, min_count=min_count)
    return EmbeddingModel(
        hyper=hyper,
        vocab=vocab,
        doc_ids=doc_ids,
        doc_index={doc_id: i for i, doc_id in enumerate(doc_ids)},
        doc_vectors=matrices[0],
        word_vectors=matrices[1],
        out_weights=matrices[2],
    )
