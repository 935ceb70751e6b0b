"""Stratified cross-validation over embedding pipelines, plus reporting.

The entry points are cross_validate (documents -> augmented streams ->
paragraph vectors -> per-fold classifiers) and cross_validate_vectors (the
same fold loop over precomputed vectors).  Two evaluation modes:

- transductive: one embedding model is trained over every document's stream,
  then classifiers are fit per fold on the training-fold vectors.  Test text
  influences the representation, which mirrors how joint document embeddings
  are usually trained, so reports label the mode prominently.
- inductive: everything derived from data (lexicon, embedding, feature
  scaling) is rebuilt per fold from the training folds only; test vectors
  come from gradient inference against the frozen model.

Metrics are for the hateful class (label 1) with the 0/0 -> 0 convention;
the negative class appears in the JSON report only.  A synthetic corpus
generator plants ingroup-verb-outgroup motifs at controlled rates so the
whole pipeline can be exercised and checked at desk scale.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .classify import (
    LabeledVector,
    MlpConfig,
    predict_proba,
    train_gnb,
    train_logreg,
    train_mlp,
)
from .corpus import Dataset, Document, default_pronouns
from .embedding import EmbedHyper, infer_vector, train
from .errors import DataError
from .othering import OtheringLexicon, augment, build_lexicon
from .parse import ParseGraph, heuristic_parse
from .util import config_hash, derive_seed, stable_json

EVAL_MODES = ("transductive", "inductive")
CLASSIFIERS = ("mlp", "logreg", "gnb")

# verbs used for planted motifs; all are recognized by the heuristic tagger
ACTION_VERBS = (
    "send", "kill", "hate", "destroy", "deport", "attack",
    "fight", "stop", "remove", "ban", "hurt", "harm",
)


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def prf(c: Confusion) -> tuple[float, float, float]:
    """Precision, recall, F-measure for the positive class; 0/0 -> 0."""
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)


def _flip(c: Confusion) -> Confusion:
    return Confusion(tp=c.tn, fp=c.fn, tn=c.tp, fn=c.fp)


@dataclass(frozen=True)
class PipelineConfig:
    embed: EmbedHyper = EmbedHyper()
    classifier: str = "mlp"
    mlp: MlpConfig = MlpConfig()
    logreg_l2: float = 0.0
    logreg_epochs: int = 200
    logreg_lr: float = 0.1
    var_floor: float = 1e-9
    standardize: bool = True
    features_hateful_only: bool = False

    def __post_init__(self) -> None:
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}")


@dataclass
class EvalReport:
    pipeline: dict[str, str]
    mode: str
    k: int
    seed: int
    config_hash: str
    fold_confusions: list[Confusion]
    aggregate: Confusion
    positive: tuple[float, float, float]
    negative: tuple[float, float, float]
    assumptions: dict[str, str] = field(default_factory=dict)


def stratified_kfold(ds: Dataset, k: int = 10, seed: int = 1) -> list[list[int]]:
    """Disjoint index folds with near-proportional class counts.

    Each class is shuffled once and dealt round-robin, so per-fold counts
    differ from the exact proportional share by less than one.
    """
    labels = []
    for doc in ds.documents:
        if doc.label is None:
            raise DataError(f"document {doc.id} is unlabelled")
        labels.append(doc.label)
    return _stratified_indices(labels, k, seed)


def _stratified_indices(labels: Sequence[int], k: int, seed: int) -> list[list[int]]:
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(labels)):
        idx = [i for i, label in enumerate(labels) if label == cls]
        if len(idx) < k:
            raise DataError(f"class {cls} has {len(idx)} documents, fewer than k={k}")
        order = rng.permutation(len(idx))
        for j, pos in enumerate(order):
            folds[j % k].append(idx[int(pos)])
    return [sorted(fold) for fold in folds]


def _train_classifier(X: np.ndarray, y: np.ndarray, config: PipelineConfig, seed: int):
    data = [LabeledVector(x, int(label)) for x, label in zip(X, y)]
    if config.classifier == "mlp":
        return train_mlp(data, dataclasses.replace(config.mlp, seed=seed))
    if config.classifier == "logreg":
        return train_logreg(
            data,
            l2=config.logreg_l2,
            epochs=config.logreg_epochs,
            lr=config.logreg_lr,
            seed=seed,
        )
    return train_gnb(data, var_floor=config.var_floor)


def _fold_eval(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_test: np.ndarray,
    y_test: np.ndarray,
    config: PipelineConfig,
    fold: int,
    seed: int,
) -> Confusion:
    if config.standardize:
        mean = X_train.mean(axis=0)
        std = X_train.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        X_train = (X_train - mean) / std
        X_test = (X_test - mean) / std
    try:
        model = _train_classifier(X_train, y_train, config, seed)
    except DataError as exc:
        raise DataError(f"fold {fold}: {exc}") from exc
    preds = (predict_proba(model, X_test) >= model.threshold).astype(int)
    return Confusion(
        tp=int(((preds == 1) & (y_test == 1)).sum()),
        fp=int(((preds == 1) & (y_test == 0)).sum()),
        tn=int(((preds == 0) & (y_test == 0)).sum()),
        fn=int(((preds == 0) & (y_test == 1)).sum()),
    )


def _assumptions(config: PipelineConfig, mode: str) -> dict[str, str]:
    notes = {
        "metrics": "hateful class; empty ratios reported as 0",
        "standardize": (
            "per-fold z-score fitted on training folds" if config.standardize else "off"
        ),
    }
    if config.classifier == "mlp":
        notes["mlp_iterations"] = f"{config.mlp.epochs} full-batch epochs"
        notes["mlp_activation"] = config.mlp.activation
        notes["mlp_lr"] = repr(config.mlp.lr)
    if config.features_hateful_only:
        notes["features"] = "document dependency features added to hateful documents only"
        if mode == "inductive":
            notes["features"] += "; held-out documents treated as non-hateful"
    else:
        notes["features"] = "document dependency features added to every document"
    return notes


def _lexicon_label(lexicon_source) -> str:
    if lexicon_source is None:
        return "off"
    if isinstance(lexicon_source, OtheringLexicon):
        return lexicon_source.provenance.get("source", "file")
    return lexicon_source


def _config_dict(
    config: PipelineConfig, lexicon_label: str, mode: str, k: int, seed: int
) -> dict:
    e, m = config.embed, config.mlp
    return {
        "mode": mode,
        "k": k,
        "seed": seed,
        "lexicon": lexicon_label,
        "classifier": config.classifier,
        "standardize": config.standardize,
        "features_hateful_only": config.features_hateful_only,
        "embed.dim": e.dim,
        "embed.window": e.window,
        "embed.epochs": e.epochs,
        "embed.lr_start": e.lr_start,
        "embed.lr_end": e.lr_end,
        "embed.negative": e.negative,
        "embed.min_count": e.min_count,
        "embed.mode": e.mode,
        "embed.seed": e.seed,
        "mlp.hidden_layers": m.hidden_layers,
        "mlp.hidden_units": m.hidden_units,
        "mlp.epochs": m.epochs,
        "mlp.lr": m.lr,
        "logreg.l2": config.logreg_l2,
        "logreg.epochs": config.logreg_epochs,
        "logreg.lr": config.logreg_lr,
        "gnb.var_floor": config.var_floor,
    }


def _finish_report(
    pipeline: dict[str, str],
    mode: str,
    k: int,
    seed: int,
    digest: str,
    confusions: list[Confusion],
    assumptions: dict[str, str],
) -> EvalReport:
    aggregate = Confusion()
    for c in confusions:
        aggregate = aggregate + c
    return EvalReport(
        pipeline=pipeline,
        mode=mode,
        k=k,
        seed=seed,
        config_hash=digest,
        fold_confusions=confusions,
        aggregate=aggregate,
        positive=prf(aggregate),
        negative=prf(_flip(aggregate)),
        assumptions=assumptions,
    )


def _stream(
    doc: Document,
    lexicon: OtheringLexicon | None,
    parses: Mapping[str, ParseGraph] | None,
    config: PipelineConfig,
    held_out: bool = False,
) -> list[str]:
    if lexicon is None:
        return list(doc.tokens)
    include = True
    if config.features_hateful_only:
        include = (doc.label == 1) and not held_out
    return augment(doc.tokens, parses[doc.id], lexicon, include_features=include)


def cross_validate(
    ds: Dataset,
    parses: Mapping[str, ParseGraph] | None,
    lexicon_source,
    config: PipelineConfig = PipelineConfig(),
    mode: str = "transductive",
    k: int = 10,
    seed: int = 1,
    threads: int = 1,
) -> EvalReport:
    """Stratified k-fold evaluation of a full pipeline on one dataset.

    lexicon_source chooses the augmentation: None (plain token streams), a
    prebuilt OtheringLexicon, "eval-corpus" (built once from the hateful
    documents of ds; transductive only), or "train-folds" (rebuilt per fold
    from hateful training documents; inductive only).
    """
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}")
    if isinstance(lexicon_source, str):
        if lexicon_source == "eval-corpus":
            if mode == "inductive":
                raise ValueError(
                    "an eval-corpus lexicon leaks held-out documents in inductive "
                    "mode; use train-folds or a prebuilt lexicon"
                )
        elif lexicon_source == "train-folds":
            if mode == "transductive":
                raise ValueError(
                    "per-fold lexicons require inductive mode; transductive runs "
                    "share one embedding over all documents"
                )
        else:
            raise ValueError(f"unknown lexicon source {lexicon_source!r}")
    elif lexicon_source is not None and not isinstance(lexicon_source, OtheringLexicon):
        raise ValueError(f"unknown lexicon source {lexicon_source!r}")

    if lexicon_source is not None:
        if parses is None:
            raise DataError("parses are required when the lexicon path is enabled")
        missing = [doc.id for doc in ds.documents if doc.id not in parses]
        if missing:
            raise DataError(f"no parse for document {missing[0]}")

    folds = stratified_kfold(ds, k=k, seed=seed)
    y = np.asarray([doc.label for doc in ds.documents], dtype=int)
    n = len(ds.documents)
    label = _lexicon_label(lexicon_source)
    digest = config_hash(_config_dict(config, label, mode, k, seed))
    pipeline = {
        "name": f"{'lexicon' if lexicon_source is not None else 'tokens'}"
        f"+{config.embed.mode}+{config.classifier}",
        "lexicon": label,
        "embedding": f"{config.embed.mode} dim={config.embed.dim} window={config.embed.window}",
        "classifier": config.classifier,
    }

    confusions: list[Confusion] = []
    if mode == "transductive":
        if isinstance(lexicon_source, OtheringLexicon):
            lexicon = lexicon_source
        elif lexicon_source == "eval-corpus":
            lexicon = build_lexicon(ds, parses)
        else:
            lexicon = None
        streams = [(doc.id, _stream(doc, lexicon, parses, config)) for doc in ds.documents]
        model = train(streams, config.embed, threads=threads)
        X = np.asarray(
            [model.doc_vectors[model.doc_index[doc.id]] for doc in ds.documents],
            dtype=np.float64,
        )
        for i, test_idx in enumerate(folds):
            train_idx = sorted(set(range(n)) - set(test_idx))
            confusions.append(
                _fold_eval(
                    X[train_idx], y[train_idx], X[test_idx], y[test_idx],
                    config, i, derive_seed(seed, f"classifier/fold{i}"),
                )
            )
    else:
        for i, test_idx in enumerate(folds):
            train_idx = sorted(set(range(n)) - set(test_idx))
            train_docs = [ds.documents[j] for j in train_idx]
            if isinstance(lexicon_source, OtheringLexicon):
                lexicon = lexicon_source
            elif lexicon_source == "train-folds":
                subset = Dataset(name=f"{ds.name}/fold{i}-train", documents=train_docs)
                lexicon = build_lexicon(subset, parses)
            else:
                lexicon = None
            train_streams = [
                (doc.id, _stream(doc, lexicon, parses, config)) for doc in train_docs
            ]
            hyper = dataclasses.replace(
                config.embed, seed=derive_seed(config.embed.seed, f"fold{i}")
            )
            model = train(train_streams, hyper, threads=threads)
            X_train = np.asarray(
                [model.doc_vectors[model.doc_index[doc.id]] for doc in train_docs],
                dtype=np.float64,
            )
            X_test = np.asarray(
                [
                    infer_vector(
                        model,
                        _stream(ds.documents[j], lexicon, parses, config, held_out=True),
                    )
                    for j in test_idx
                ],
                dtype=np.float64,
            )
            confusions.append(
                _fold_eval(
                    X_train, y[train_idx], X_test, y[test_idx],
                    config, i, derive_seed(seed, f"classifier/fold{i}"),
                )
            )

    return _finish_report(
        pipeline, mode, k, seed, digest, confusions, _assumptions(config, mode)
    )


def cross_validate_vectors(
    vectors: np.ndarray,
    labels: Sequence[int],
    config: PipelineConfig = PipelineConfig(),
    k: int = 10,
    seed: int = 1,
) -> EvalReport:
    """The fold loop of cross_validate over precomputed document vectors."""
    X = np.asarray(vectors, dtype=np.float64)
    y = np.asarray(labels, dtype=int)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DataError("vectors and labels are not aligned")
    folds = _stratified_indices(list(y), k, seed)
    digest = config_hash(_config_dict(config, "off", "transductive", k, seed))
    pipeline = {
        "name": f"vectors+{config.classifier}",
        "lexicon": "off",
        "embedding": "precomputed",
        "classifier": config.classifier,
    }
    confusions = []
    for i, test_idx in enumerate(folds):
        train_idx = sorted(set(range(len(y))) - set(test_idx))
        confusions.append(
            _fold_eval(
                X[train_idx], y[train_idx], X[test_idx], y[test_idx],
                config, i, derive_seed(seed, f"classifier/fold{i}"),
            )
        )
    return _finish_report(
        pipeline, "transductive", k, seed, digest, confusions,
        _assumptions(config, "transductive"),
    )


@dataclass(frozen=True)
class SyntheticSpec:
    n_docs: int = 1000
    positive_rate: float = 0.5
    p1: float = 0.8
    p0: float = 0.05
    n_fillers: int = 80
    n_verbs: int = 8
    min_len: int = 5
    max_len: int = 12
    verb_rate_positive: float = 0.6
    verb_rate_negative: float = 0.1
    seed: int = 1

    def __post_init__(self) -> None:
        if self.n_docs < 2:
            raise ValueError("n_docs must be >= 2")
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError("positive_rate must be strictly between 0 and 1")
        if not 0.0 <= self.p0 < self.p1 <= 1.0:
            raise ValueError("need 0 <= p0 < p1 <= 1")
        if self.n_fillers < 1:
            raise ValueError("n_fillers must be >= 1")
        if not 1 <= self.n_verbs <= len(ACTION_VERBS):
            raise ValueError(f"n_verbs must be in 1..{len(ACTION_VERBS)}")
        if not 1 <= self.min_len <= self.max_len:
            raise ValueError("need 1 <= min_len <= max_len")
        if not 0.0 <= self.verb_rate_negative <= 1.0:
            raise ValueError("verb_rate_negative must be in [0, 1]")
        if not 0.0 <= self.verb_rate_positive <= 1.0:
            raise ValueError("verb_rate_positive must be in [0, 1]")


def generate_synthetic(
    spec: SyntheticSpec,
) -> tuple[Dataset, dict[str, ParseGraph], dict[str, bool]]:
    """Corpus with ingroup-verb-outgroup motifs planted at per-class rates.

    Filler tokens carry no pronouns, so a document is two-sided exactly when
    a motif was planted; the returned flags record the planting decisions.
    Hateful documents also receive lone action verbs at a higher sprinkle
    rate, which keeps the classes statistically separable without pronouns.
    """
    rng = np.random.default_rng(spec.seed)
    inventory = default_pronouns()
    ingroup = sorted(inventory.ingroup)
    outgroup = sorted(inventory.outgroup)
    fillers = [f"w{i:03d}" for i in range(spec.n_fillers)]
    verbs = list(ACTION_VERBS[: spec.n_verbs])

    n_pos = round(spec.n_docs * spec.positive_rate)
    labels = [1] * n_pos + [0] * (spec.n_docs - n_pos)
    rng.shuffle(labels)

    documents = []
    parses: dict[str, ParseGraph] = {}
    flags: dict[str, bool] = {}
    for i, label in enumerate(labels):
        doc_id = f"s{i:05d}"
        length = int(rng.integers(spec.min_len, spec.max_len + 1))
        tokens = [fillers[int(j)] for j in rng.integers(0, len(fillers), size=length)]
        verb_rate = spec.verb_rate_positive if label == 1 else spec.verb_rate_negative
        if rng.random() < verb_rate:
            at = int(rng.integers(0, len(tokens) + 1))
            tokens.insert(at, verbs[int(rng.integers(0, len(verbs)))])
        plant_rate = spec.p1 if label == 1 else spec.p0
        planted = bool(rng.random() < plant_rate)
        if planted:
            motif = [
                ingroup[int(rng.integers(0, len(ingroup)))],
                verbs[int(rng.integers(0, len(verbs)))],
                outgroup[int(rng.integers(0, len(outgroup)))],
            ]
            at = int(rng.integers(0, len(tokens) + 1))
            tokens[at:at] = motif
        documents.append(
            Document(id=doc_id, text=" ".join(tokens), tokens=tokens, label=label)
        )
        parses[doc_id] = heuristic_parse(tokens, doc_id=doc_id)
        flags[doc_id] = planted
    ds = Dataset(name=f"synthetic-{spec.seed}", documents=documents)
    return ds, parses, flags


def _report_dict(report: EvalReport) -> dict:
    agg = report.aggregate
    return {
        "pipeline": dict(report.pipeline),
        "mode": report.mode,
        "k": report.k,
        "seed": report.seed,
        "config_hash": report.config_hash,
        "folds": [dataclasses.asdict(c) for c in report.fold_confusions],
        "aggregate": dataclasses.asdict(agg),
        "hateful": {
            "precision": report.positive[0],
            "recall": report.positive[1],
            "f_measure": report.positive[2],
            "fp": agg.fp,
            "fn": agg.fn,
        },
        "not_hateful": {
            "precision": report.negative[0],
            "recall": report.negative[1],
            "f_measure": report.negative[2],
        },
        "assumptions": dict(report.assumptions),
    }


def render_report(reports: Sequence[EvalReport], fmt: str = "markdown") -> str:
    """One row per pipeline; JSON carries the same rows with full precision."""
    if not reports:
        raise DataError("no reports to render")
    if fmt == "json":
        return stable_json({"version": 1, "reports": [_report_dict(r) for r in reports]})
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        "| pipeline | mode | P | R | F | errors |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for report in reports:
        p, r, f = report.positive
        agg = report.aggregate
        lines.append(
            f"| {report.pipeline['name']} | {report.mode} "
            f"| {p:.2f} | {r:.2f} | {f:.2f} "
            f"| FP={agg.fp} FN={agg.fn} |"
        )
    return "\n".join(lines) + "\n"
