"""Embedding-space inspection: 2-D PCA, neighbor queries, distance bands,
and projector-compatible TSV export.

pca2d finds the top two principal components by power iteration with
deflation; a dense eigensolver would also work, but two components never
need one, and the small iteration is easy to check against a brute-force
oracle.  Distances everywhere are cosine distances in [0, 2].
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import PronounConfig, default_pronouns
from .embedding import EmbeddingModel, cosine_distance
from .errors import DataError, NumericalError

_DEP_FEATURE_RE = re.compile(r"^[a-z]+\([^(),\s]+,[^(),\s]+\)$")


@dataclass
class Projection:
    coords: np.ndarray  # (n, 2)
    components: np.ndarray  # (2, dim), orthonormal rows
    variance_fractions: np.ndarray  # (2,), descending


def _sign_fix(v: np.ndarray) -> np.ndarray:
    """Flip so the first entry of non-negligible magnitude is positive."""
    for x in v:
        if abs(x) > 1e-12:
            return -v if x < 0 else v
    return v


def pca2d(vectors, tol: float = 1e-10, max_iter: int = 10_000) -> Projection:
    """Project onto the top two principal components.

    Mean-centers the data, then extracts eigenvectors of the sample
    covariance one at a time by power iteration, deflating after each.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("vectors must form an n x dim matrix")
    n, dim = X.shape
    if n < 3:
        raise DataError(f"need at least 3 points, got {n}")
    if dim < 2:
        raise DataError(f"need at least 2 dimensions, got {dim}")
    if not np.isfinite(X).all():
        raise DataError("non-finite vector entries")
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    total = float(np.trace(cov))
    if total <= 0.0:
        raise DataError("zero-variance data has no principal components")

    rng = np.random.default_rng(0)  # fixed: pca2d is deterministic
    work = cov.copy()
    components = []
    variances = []
    for _ in range(2):
        v = rng.normal(size=dim)
        for c in components:
            v -= (v @ c) * c
        v /= np.linalg.norm(v)
        converged = False
        for _ in range(max_iter):
            w = work @ v
            for c in components:
                w -= (w @ c) * c
            norm = float(np.linalg.norm(w))
            if norm < 1e-13:
                # the deflated operator is numerically zero along every
                # remaining direction; v is already unit and orthogonal
                converged = True
                break
            w /= norm
            if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < tol:
                v = w
                converged = True
                break
            v = w
        if not converged:
            residual = float(np.linalg.norm(work @ v - (v @ work @ v) * v))
            raise NumericalError(
                f"power iteration did not converge in {max_iter} iterations "
                f"(residual {residual:.3e})"
            )
        v = _sign_fix(v)
        lam = max(float(v @ cov @ v), 0.0)
        components.append(v)
        variances.append(lam)
        work = work - lam * np.outer(v, v)

    comp = np.vstack(components)
    fractions = np.asarray(variances) / total
    return Projection(
        coords=centered @ comp.T,
        components=comp,
        variance_fractions=fractions,
    )


def neighbors(model: EmbeddingModel, anchor: str, n: int) -> list[tuple[str, float]]:
    """The n nearest vocabulary tokens to the anchor by cosine distance.

    Ascending distance, ties broken lexicographically, anchor excluded.
    """
    vocab = model.vocab
    if anchor not in vocab.index:
        close = difflib.get_close_matches(anchor, vocab.tokens, n=5, cutoff=0.6)
        hint = f"; similar tokens: {', '.join(close)}" if close else ""
        raise DataError(f"anchor {anchor!r} is not in the vocabulary{hint}")
    if not 1 <= n <= len(vocab) - 1:
        raise DataError(f"n must be between 1 and {len(vocab) - 1}")
    a = np.asarray(model.word_vectors[vocab.index[anchor]], dtype=np.float64)
    ranked = sorted(
        (float(cosine_distance(a, model.word_vectors[i])), token)
        for i, token in enumerate(vocab.tokens)
        if token != anchor
    )
    return [(token, distance) for distance, token in ranked[:n]]


@dataclass(frozen=True)
class DistanceBands:
    """Contiguous half-open bands over cosine distance, covering [0, 2].

    The final band's upper boundary is closed so 2.0 is assignable.
    """

    entries: tuple[tuple[float, float, str], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("at least one band is required")
        if self.entries[0][0] != 0.0:
            raise ValueError("bands must start at 0")
        if self.entries[-1][1] != 2.0:
            raise ValueError("bands must end at 2")
        previous_upper = 0.0
        names = set()
        for lower, upper, name in self.entries:
            if lower != previous_upper:
                raise ValueError(f"band {name!r} leaves a gap at {previous_upper}")
            if not lower < upper:
                raise ValueError(f"band {name!r} is empty")
            if not name or name in names:
                raise ValueError(f"band name {name!r} is missing or repeated")
            names.add(name)
            previous_upper = upper


DEFAULT_BANDS = DistanceBands(
    (
        (0.0, 0.09, "purple"),
        (0.09, 0.2, "pink"),
        (0.2, 0.4, "orange"),
        (0.4, 0.56, "dark_yellow"),
        (0.56, 2.0, "light_yellow"),
    )
)


def band(distance: float, bands: DistanceBands = DEFAULT_BANDS) -> str:
    """Name of the band containing a cosine distance in [0, 2]."""
    d = float(distance)
    if -1e-9 <= d < 0.0:
        d = 0.0
    elif 2.0 < d <= 2.0 + 1e-9:
        d = 2.0
    if not 0.0 <= d <= 2.0:
        raise DataError(f"distance {distance!r} is outside [0, 2]")
    for lower, upper, name in bands.entries:
        if lower <= d < upper:
            return name
    return bands.entries[-1][2]


def _token_kind(token: str, inventory: frozenset[str]) -> str:
    if token.startswith("<lex_"):
        return "lexicon_marker"
    if _DEP_FEATURE_RE.match(token):
        return "dep_feature"
    if token in inventory:
        return "pronoun"
    return "word"


def export_projector(
    model: EmbeddingModel,
    anchor: str,
    vectors_path: str | Path,
    metadata_path: str | Path,
    bands: DistanceBands = DEFAULT_BANDS,
    pronouns: PronounConfig | None = None,
) -> None:
    """Write vectors.tsv and metadata.tsv for projector-style tools.

    Line i of both files describes vocabulary token i.  Metadata columns:
    token, kind (word / dep_feature / lexicon_marker / pronoun), cosine
    distance to the anchor, and the distance band name.
    """
    vocab = model.vocab
    if anchor not in vocab.index:
        close = difflib.get_close_matches(anchor, vocab.tokens, n=5, cutoff=0.6)
        hint = f"; similar tokens: {', '.join(close)}" if close else ""
        raise DataError(f"anchor {anchor!r} is not in the vocabulary{hint}")
    inventory = (pronouns or default_pronouns()).all_pronouns
    a = np.asarray(model.word_vectors[vocab.index[anchor]], dtype=np.float64)
    with open(vectors_path, "w", encoding="utf-8", newline="\n") as vectors_file, open(
        metadata_path, "w", encoding="utf-8", newline="\n"
    ) as metadata_file:
        metadata_file.write("token\tkind\tdistance_to_anchor\tband\n")
        for i, token in enumerate(vocab.tokens):
            vec = model.word_vectors[i]
            vectors_file.write("\t".join(f"{x:.6g}" for x in vec.tolist()) + "\n")
            d = float(cosine_distance(a, vec))
            metadata_file.write(
                f"{token}\t{_token_kind(token, inventory)}\t{d:.6g}\t{band(d, bands)}\n"
            )
