"""The `otherlex` command: the full workflow as reproducible subcommands.

Seven subcommands cover the pipeline end to end: `ingest` (corpus summary),
`stats` (two-sided rates per class), `lexicon` (build a lexicon file),
`embed` (train an embedding model, optionally over the dim x window grid),
`evaluate` (cross-validated pipeline report), `project` (neighbour table
plus 2-D TSV export) and `synth` (planted synthetic corpus).

Every option can come from a flat key=value config file via --config;
explicit flags win over file entries, file entries win over built-in
defaults. All randomness descends from the root --seed, split per component
with derive_seed, so two runs with the same config and seed produce
byte-identical JSON artifacts (with --threads 1).

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Errors are one line on stderr: `otherlex: <kind> error: <message>`.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .classify import MlpConfig
from .corpus import Dataset, load_corpus, load_pronouns, save_corpus, two_sided_rate
from .embedding import EmbedHyper, load_model, save_model, train
from .errors import DataError, NumericalError
from .evaluation import (
    PipelineConfig,
    SyntheticSpec,
    cross_validate,
    generate_synthetic,
    render_report,
)
from .othering import OtheringLexicon, augment, build_lexicon, load_lexicon, save_lexicon
from .parse import read_conllu, write_conllu
from .projection import band, export_projector, neighbors
from .util import config_hash, derive_seed, stable_json

PROG = "otherlex"
SWEEP_DIMS = (100, 300, 600, 800, 1000)
SWEEP_WINDOWS = (2, 3, 5, 6, 10)

PIPELINE_FEATURES = ("lexicon", "tokens")
PIPELINE_EMBEDDINGS = ("pvdm", "pvdbow")
PIPELINE_CLASSIFIERS = ("mlp", "logreg", "gnb")


class _UsageError(Exception):
    """Bad flags or flag combinations; exits 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; we reserve 2 for data errors, so
    # surface them as exceptions and let main() map the codes.
    def error(self, message):
        raise _UsageError(message)


@dataclass(frozen=True)
class _Opt:
    """One configurable option: its real default and its config-file parser."""

    default: object
    convert: object
    choices: tuple | None = None


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _add(sp, opts, flag, *, default=None, type=str, choices=None, metavar=None, help=None):
    """Register a flag with argparse default None so config merging can tell
    "not given" from "given"; the real default lives in `opts`."""
    dest = flag.lstrip("-").replace("-", "_")
    if type is bool:
        sp.add_argument(flag, dest=dest, action=argparse.BooleanOptionalAction, default=None, help=help)
        opts[dest] = _Opt(default, _parse_bool)
    else:
        sp.add_argument(
            flag, dest=dest, default=None, type=type, choices=choices, metavar=metavar, help=help
        )
        opts[dest] = _Opt(default, type, tuple(choices) if choices else None)


def _read_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    text = Path(path).read_text("utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise DataError(f"{path}:{lineno}: expected key=value")
        if key in entries:
            raise DataError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value.strip()
    return entries


def _resolve_options(args) -> None:
    """Merge config-file entries under explicit flags, then fill defaults."""
    opts = args._opts
    if args.config is not None:
        for key, raw in _read_config_file(args.config).items():
            if key not in opts:
                raise DataError(f"{args.config}: unknown config key {key!r}")
            if getattr(args, key) is None:
                opt = opts[key]
                try:
                    value = opt.convert(raw)
                except ValueError as exc:
                    raise DataError(f"{args.config}: key {key!r}: {exc}") from exc
                if opt.choices is not None and value not in opt.choices:
                    raise DataError(
                        f"{args.config}: key {key!r}: must be one of {', '.join(opt.choices)}"
                    )
                setattr(args, key, value)
    for dest, opt in opts.items():
        if getattr(args, dest) is None:
            setattr(args, dest, opt.default)


def _require(args, *dests: str) -> None:
    for dest in dests:
        if getattr(args, dest) is None:
            raise _UsageError(f"--{dest.replace('_', '-')} is required")


def _run_hash(args) -> str:
    """Hash of every resolved option of the subcommand, for provenance."""

    def text(value):
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        return str(value)

    return config_hash({dest: text(getattr(args, dest)) for dest in args._opts})


def _print_json(payload: dict, out_path=None) -> None:
    text = stable_json(payload)
    sys.stdout.write(text)
    if out_path is not None:
        Path(out_path).write_text(text, encoding="utf-8")


def _warn(message: str) -> None:
    print(f"{PROG}: warning: {message}", file=sys.stderr)


def _load_parses(path) -> dict:
    return {g.doc_id: g for g in read_conllu(path)}


# --- subcommands ------------------------------------------------------------


def _cmd_ingest(args) -> int:
    _require(args, "corpus")
    ds = load_corpus(args.corpus, name=args.name)
    counts = ds.class_counts
    unlabelled = sum(1 for doc in ds.documents if doc.label is None)
    _print_json(
        {
            "version": 1,
            "command": "ingest",
            "corpus": str(args.corpus),
            "name": ds.name,
            "documents": len(ds.documents),
            "tokens": sum(len(doc.tokens) for doc in ds.documents),
            "labels": {
                "hateful": counts.get(1, 0),
                "not_hateful": counts.get(0, 0),
                "unlabelled": unlabelled,
            },
            "config_hash": _run_hash(args),
            "seed": args.seed,
        },
        args.out,
    )
    return 0


def _cmd_stats(args) -> int:
    _require(args, "corpus")
    ds = load_corpus(args.corpus)
    pronouns = load_pronouns(args.pronouns)
    rates = two_sided_rate(ds, pronouns, args.mode)
    counts = ds.class_counts
    _print_json(
        {
            "version": 1,
            "command": "stats",
            "corpus": str(args.corpus),
            "mode": args.mode,
            "documents": {
                "hateful": counts.get(1, 0),
                "not_hateful": counts.get(0, 0),
            },
            "two_sided_rate": {
                "hateful": rates.get(1, 0.0),
                "not_hateful": rates.get(0, 0.0),
            },
            "config_hash": _run_hash(args),
            "seed": args.seed,
        },
        args.out,
    )
    return 0


def _cmd_lexicon(args) -> int:
    _require(args, "corpus", "parses", "out")
    ds = load_corpus(args.corpus)
    parses = _load_parses(args.parses)
    pronouns = load_pronouns(args.pronouns)
    lexicon = build_lexicon(ds, parses, pronouns, args.mode, args.min_count)
    lexicon.provenance["run_hash"] = _run_hash(args)
    lexicon.provenance["seed"] = str(args.seed)
    save_lexicon(lexicon, args.out)
    if lexicon.provenance["empty_warning"] == "1":
        _warn("no hateful two-sided documents contributed; the lexicon is empty")
    _print_json(
        {
            "version": 1,
            "command": "lexicon",
            "out": str(args.out),
            "dep_entries": len(lexicon.dep_entries),
            "pos_words": len(lexicon.pos_words),
            "pronouns": len(lexicon.pronouns),
            "contributing_documents": int(lexicon.provenance["n_contributing"]),
            "config_hash": _run_hash(args),
            "seed": args.seed,
        }
    )
    return 0


def _streams(ds: Dataset, lexicon, parses) -> list[tuple[str, list[str]]]:
    streams = []
    for doc in ds.documents:
        if lexicon is None:
            streams.append((doc.id, list(doc.tokens)))
            continue
        if doc.id not in parses:
            raise DataError(f"no parse for document {doc.id}")
        streams.append((doc.id, augment(doc.tokens, parses[doc.id], lexicon)))
    return streams


def _cmd_embed(args) -> int:
    _require(args, "corpus", "out")
    if args.threads < 1:
        raise _UsageError("--threads must be >= 1")
    if args.lexicon is not None and args.parses is None:
        raise _UsageError("--parses is required when --lexicon is given")
    if args.parses is not None and args.lexicon is None:
        raise _UsageError("--parses requires --lexicon (augmented streams need both)")
    ds = load_corpus(args.corpus)
    lexicon = load_lexicon(args.lexicon) if args.lexicon is not None else None
    parses = _load_parses(args.parses) if args.parses is not None else None
    streams = _streams(ds, lexicon, parses)
    hyper = EmbedHyper(
        dim=args.dim,
        window=args.window,
        epochs=args.epochs,
        lr_start=args.lr_start,
        lr_end=args.lr_end,
        negative=args.negative,
        min_count=args.min_count,
        mode=args.embedding,
        seed=derive_seed(args.seed, "embed"),
    )
    if not args.sweep:
        model = train(streams, hyper, threads=args.threads)
        save_model(model, args.out)
        _print_json(
            {
                "version": 1,
                "command": "embed",
                "out": str(args.out),
                "documents": len(model.doc_ids),
                "vocabulary": len(model.vocab.tokens),
                "final_loss": model.epoch_losses[-1],
                "config_hash": _run_hash(args),
                "seed": args.seed,
            }
        )
        return 0

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = []
    for dim in SWEEP_DIMS:
        for window in SWEEP_WINDOWS:
            model = train(streams, replace(hyper, dim=dim, window=window), threads=args.threads)
            path = out_dir / f"model_d{dim}_w{window}.bin"
            save_model(model, path)
            cells.append(
                {
                    "dim": dim,
                    "window": window,
                    "model": str(path),
                    "final_loss": model.epoch_losses[-1],
                }
            )
    _print_json(
        {
            "version": 1,
            "command": "embed",
            "sweep": cells,
            "config_hash": _run_hash(args),
            "seed": args.seed,
        }
    )
    return 0


def _parse_pipeline(text: str) -> tuple[str, str, str]:
    parts = text.split("+")
    if len(parts) != 3:
        raise _UsageError(f"--pipeline must be features+embedding+classifier, got {text!r}")
    features, embedding, classifier = parts
    if features not in PIPELINE_FEATURES:
        raise _UsageError(f"pipeline features must be one of {'/'.join(PIPELINE_FEATURES)}")
    if embedding not in PIPELINE_EMBEDDINGS:
        raise _UsageError(f"pipeline embedding must be one of {'/'.join(PIPELINE_EMBEDDINGS)}")
    if classifier not in PIPELINE_CLASSIFIERS:
        raise _UsageError(f"pipeline classifier must be one of {'/'.join(PIPELINE_CLASSIFIERS)}")
    return features, embedding, classifier


def _cmd_evaluate(args) -> int:
    _require(args, "corpus")
    if args.threads < 1:
        raise _UsageError("--threads must be >= 1")
    features, embedding, classifier = _parse_pipeline(args.pipeline)
    mode = "inductive" if args.inductive else "transductive"

    if args.lexicon is not None and args.lexicon_from_eval_corpus:
        raise _UsageError("--lexicon and --lexicon-from-eval-corpus are mutually exclusive")
    if args.inductive and args.lexicon_from_eval_corpus:
        raise _UsageError(
            "--lexicon-from-eval-corpus leaks held-out folds in inductive mode; "
            "drop it (per-fold lexicons are the default) or pass --lexicon FILE"
        )
    if features == "tokens":
        if args.lexicon is not None or args.lexicon_from_eval_corpus:
            raise _UsageError("lexicon flags require a lexicon+... pipeline")
        source = None
    elif args.parses is None:
        raise _UsageError("--parses is required when the pipeline includes lexicon features")
    elif args.lexicon is not None:
        source = load_lexicon(args.lexicon)
    else:
        source = "eval-corpus" if mode == "transductive" else "train-folds"
        _warn(
            f"lexicon is derived from the evaluation corpus ({source}); "
            "pass --lexicon FILE to keep the lexicon corpus separate"
        )

    ds = load_corpus(args.corpus)
    parses = _load_parses(args.parses) if args.parses is not None else None
    config = PipelineConfig(
        embed=EmbedHyper(
            dim=args.dim,
            window=args.window,
            epochs=args.epochs,
            lr_start=args.lr_start,
            lr_end=args.lr_end,
            negative=args.negative,
            min_count=args.min_count,
            mode=embedding,
            seed=derive_seed(args.seed, "embed"),
        ),
        classifier=classifier,
        mlp=MlpConfig(
            hidden_layers=args.hidden_layers,
            hidden_units=args.hidden_units,
            epochs=args.mlp_epochs,
            lr=args.mlp_lr,
        ),
        logreg_l2=args.logreg_l2,
        logreg_epochs=args.logreg_epochs,
        logreg_lr=args.logreg_lr,
        var_floor=args.var_floor,
        standardize=args.standardize,
        features_hateful_only=args.features_hateful_only,
    )
    report = cross_validate(
        ds,
        parses,
        source,
        config,
        mode=mode,
        k=args.k,
        seed=derive_seed(args.seed, "eval"),
        threads=args.threads,
    )
    Path(args.report).write_text(render_report([report], "json"), encoding="utf-8")
    table = render_report([report], "markdown")
    sys.stdout.write(table)
    if args.markdown is not None:
        footer = f"\nconfig_hash={report.config_hash} seed={args.seed}\n"
        Path(args.markdown).write_text(table + footer, encoding="utf-8")
    return 0


def _cmd_project(args) -> int:
    _require(args, "model", "anchor", "out_dir")
    model = load_model(args.model)
    pronouns = load_pronouns(args.pronouns) if args.pronouns is not None else None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vectors_path = out_dir / "vectors.tsv"
    metadata_path = out_dir / "metadata.tsv"
    export_projector(model, args.anchor, vectors_path, metadata_path, pronouns=pronouns)
    ranked = neighbors(model, args.anchor, args.neighbors)
    _print_json(
        {
            "version": 1,
            "command": "project",
            "anchor": args.anchor,
            "neighbors": [
                {"token": token, "distance": distance, "band": band(distance)}
                for token, distance in ranked
            ],
            "vectors": str(vectors_path),
            "metadata": str(metadata_path),
            "model_seed": model.hyper.seed,
            "config_hash": _run_hash(args),
            "seed": args.seed,
        }
    )
    return 0


def _cmd_synth(args) -> int:
    _require(args, "out")
    spec = SyntheticSpec(
        n_docs=args.n_docs,
        positive_rate=args.positive_rate,
        p1=args.p1,
        p0=args.p0,
        n_fillers=args.n_fillers,
        n_verbs=args.n_verbs,
        min_len=args.min_len,
        max_len=args.max_len,
        verb_rate_positive=args.verb_rate_positive,
        verb_rate_negative=args.verb_rate_negative,
        seed=args.seed,
    )
    ds, parses, flags = generate_synthetic(spec)
    save_corpus(ds, args.out)
    parses_path = Path(args.parses_out) if args.parses_out else Path(args.out).with_suffix(".conllu")
    write_conllu([parses[doc.id] for doc in ds.documents], parses_path)
    run_hash = _run_hash(args)
    if args.flags_out is not None:
        Path(args.flags_out).write_text(
            stable_json(
                {
                    "version": 1,
                    "command": "synth",
                    "config_hash": run_hash,
                    "seed": args.seed,
                    "flags": {doc_id: bool(flag) for doc_id, flag in flags.items()},
                }
            ),
            encoding="utf-8",
        )
    counts = ds.class_counts
    _print_json(
        {
            "version": 1,
            "command": "synth",
            "corpus": str(args.out),
            "parses": str(parses_path),
            "documents": len(ds.documents),
            "hateful": counts.get(1, 0),
            "planted": sum(1 for flag in flags.values() if flag),
            "config_hash": run_hash,
            "seed": args.seed,
        }
    )
    return 0


# --- parser construction ----------------------------------------------------


def _new_command(subparsers, name, run, help_text):
    sp = subparsers.add_parser(name, help=help_text, description=help_text)
    sp.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sp.add_argument("--config", default=None, metavar="FILE", help="flat key=value file; flags win")
    opts: dict[str, _Opt] = {}
    sp.set_defaults(_opts=opts, _run=run)
    _add(sp, opts, "--seed", default=1, type=int, help="root seed, split per component")
    return sp, opts


def _add_embed_options(sp, opts):
    _add(sp, opts, "--dim", default=600, type=int, help="embedding dimensionality")
    _add(sp, opts, "--window", default=2, type=int, help="context words per side")
    _add(sp, opts, "--epochs", default=20, type=int, help="embedding training epochs")
    _add(sp, opts, "--lr-start", default=0.025, type=float, help="initial learning rate")
    _add(sp, opts, "--lr-end", default=0.0001, type=float, help="final learning rate")
    _add(sp, opts, "--negative", default=5, type=int, help="negative samples per position")
    _add(sp, opts, "--min-count", default=2, type=int, help="vocabulary frequency floor")


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="Othering-language hate speech pipeline.")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="<command>", required=True)

    sp, opts = _new_command(subparsers, "ingest", _cmd_ingest, "Validate a corpus and summarize it.")
    _add(sp, opts, "--corpus", metavar="FILE", help="JSONL or CSV corpus")
    _add(sp, opts, "--name", help="dataset name (default: file stem)")
    _add(sp, opts, "--out", metavar="FILE", help="also write the summary JSON here")

    sp, opts = _new_command(subparsers, "stats", _cmd_stats, "Two-sided document rates per class.")
    _add(sp, opts, "--corpus", metavar="FILE", help="labelled corpus")
    _add(sp, opts, "--pronouns", metavar="FILE", help="pronoun inventory (default: built-in)")
    _add(sp, opts, "--mode", default="ingroup_outgroup", choices=["ingroup_outgroup", "any_two_pronouns"], help="two-sidedness test")
    _add(sp, opts, "--out", metavar="FILE", help="also write the summary JSON here")

    sp, opts = _new_command(subparsers, "lexicon", _cmd_lexicon, "Build a lexicon file from hateful two-sided documents.")
    _add(sp, opts, "--corpus", metavar="FILE", help="labelled corpus")
    _add(sp, opts, "--parses", metavar="FILE", help="CoNLL-U parses keyed by doc_id")
    _add(sp, opts, "--out", metavar="FILE", help="lexicon file to write")
    _add(sp, opts, "--pronouns", metavar="FILE", help="pronoun inventory (default: built-in)")
    _add(sp, opts, "--mode", default="ingroup_outgroup", choices=["ingroup_outgroup", "any_two_pronouns"], help="two-sidedness test")
    _add(sp, opts, "--min-count", default=1, type=int, help="document-frequency floor per entry")

    sp, opts = _new_command(subparsers, "embed", _cmd_embed, "Train an embedding model over token streams.")
    _add(sp, opts, "--corpus", metavar="FILE", help="corpus to embed")
    _add(sp, opts, "--out", metavar="PATH", help="model file (directory with --sweep)")
    _add(sp, opts, "--parses", metavar="FILE", help="CoNLL-U parses (with --lexicon)")
    _add(sp, opts, "--lexicon", metavar="FILE", help="lexicon file for augmented streams")
    _add(sp, opts, "--embedding", default="pvdm", choices=["pvdm", "pvdbow"], help="training objective")
    _add_embed_options(sp, opts)
    _add(sp, opts, "--threads", default=1, type=int, help="worker threads (1 = deterministic)")
    _add(sp, opts, "--sweep", default=False, type=bool, help="train the full dim x window grid")

    sp, opts = _new_command(subparsers, "evaluate", _cmd_evaluate, "Cross-validated pipeline evaluation.")
    _add(sp, opts, "--corpus", metavar="FILE", help="labelled corpus")
    _add(sp, opts, "--parses", metavar="FILE", help="CoNLL-U parses keyed by doc_id")
    _add(sp, opts, "--pipeline", default="lexicon+pvdm+mlp", help="features+embedding+classifier, e.g. lexicon+pvdm+mlp")
    _add(sp, opts, "--inductive", default=False, type=bool, help="held-out folds never seen in training (default: transductive)")
    _add(sp, opts, "--lexicon", metavar="FILE", help="prebuilt lexicon file")
    _add(sp, opts, "--lexicon-from-eval-corpus", default=False, type=bool, help="build the lexicon from the evaluation corpus (transductive only)")
    _add(sp, opts, "--k", default=10, type=int, help="number of folds")
    _add(sp, opts, "--report", default="report.json", metavar="FILE", help="JSON report path")
    _add(sp, opts, "--markdown", metavar="FILE", help="also write the markdown table here")
    _add_embed_options(sp, opts)
    _add(sp, opts, "--hidden-layers", default=2, type=int, help="MLP hidden layers")
    _add(sp, opts, "--hidden-units", default=5, type=int, help="MLP units per hidden layer")
    _add(sp, opts, "--mlp-epochs", default=200, type=int, help="MLP training epochs")
    _add(sp, opts, "--mlp-lr", default=0.05, type=float, help="MLP learning rate")
    _add(sp, opts, "--logreg-l2", default=0.0, type=float, help="logistic regression L2 strength")
    _add(sp, opts, "--logreg-epochs", default=200, type=int, help="logistic regression epochs")
    _add(sp, opts, "--logreg-lr", default=0.1, type=float, help="logistic regression learning rate")
    _add(sp, opts, "--var-floor", default=1e-9, type=float, help="Gaussian NB variance floor")
    _add(sp, opts, "--standardize", default=True, type=bool, help="z-score features per fold")
    _add(sp, opts, "--features-hateful-only", default=False, type=bool, help="augment only hateful documents")
    _add(sp, opts, "--threads", default=1, type=int, help="worker threads (1 = deterministic)")

    sp, opts = _new_command(subparsers, "project", _cmd_project, "Nearest neighbours and 2-D projector export.")
    _add(sp, opts, "--model", metavar="FILE", help="embedding model file")
    _add(sp, opts, "--anchor", help="vocabulary token to project around")
    _add(sp, opts, "--out-dir", metavar="DIR", help="directory for vectors.tsv and metadata.tsv")
    _add(sp, opts, "--neighbors", default=20, type=int, help="neighbours to list")
    _add(sp, opts, "--pronouns", metavar="FILE", help="pronoun inventory (default: built-in)")

    sp, opts = _new_command(subparsers, "synth", _cmd_synth, "Generate a planted synthetic corpus with parses.")
    _add(sp, opts, "--out", metavar="FILE", help="corpus file to write (JSONL or CSV)")
    _add(sp, opts, "--parses-out", metavar="FILE", help="CoNLL-U path (default: corpus path with .conllu)")
    _add(sp, opts, "--flags-out", metavar="FILE", help="also write planted-motif flags JSON")
    _add(sp, opts, "--n-docs", default=1000, type=int, help="number of documents")
    _add(sp, opts, "--positive-rate", default=0.5, type=float, help="fraction labelled hateful")
    _add(sp, opts, "--p1", default=0.8, type=float, help="two-sided rate among hateful documents")
    _add(sp, opts, "--p0", default=0.05, type=float, help="two-sided rate among the rest")
    _add(sp, opts, "--n-fillers", default=80, type=int, help="filler vocabulary size")
    _add(sp, opts, "--n-verbs", default=8, type=int, help="action verbs drawn for motifs")
    _add(sp, opts, "--min-len", default=5, type=int, help="minimum document length")
    _add(sp, opts, "--max-len", default=12, type=int, help="maximum document length")
    _add(sp, opts, "--verb-rate-positive", default=0.6, type=float, help="sprinkled-verb rate, hateful")
    _add(sp, opts, "--verb-rate-negative", default=0.1, type=float, help="sprinkled-verb rate, rest")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version print and stop
        return int(exc.code or 0)
    try:
        _resolve_options(args)
        return args._run(args)
    except _UsageError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # config dataclass validation
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"{PROG}: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"{PROG}: numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"{PROG}: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
