"""Command-line entry point wiring the pipeline stages together.

Every subcommand reads and writes the JSON-Lines interchange files, prints a
machine-readable JSON summary on stdout, and leaves diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .census import classify_corpus, relation_census
from .comments import DEFAULT_PROFILES, load_profiles
from .detect import DEFAULT_PATTERN_SET, SatdScorer, detect_corpus, load_pattern_set
from .evaluate import cross_validate, learning_curve
from .ingest import DEFAULT_BOT_POLICY, ingest_git, ingest_tracker_export, load_bot_policy
from .linker import DEFAULT_PATTERNS, LinkGraph, LinkStats, link_corpus, load_patterns
from .model import (
    RelationLabel,
    SatdPair,
    read_jsonl,
    write_jsonl,
)
from .nn.store import load_params, save_params
from .nn.train import TrainConfig, load_train_config, train, vocab_for_dataset
from .pairs import (
    DEFAULT_TOKENIZER,
    TokenizerConfig,
    generate_pairs,
    similarity_stats,
    stratified_sample,
)
from .report import (
    write_census,
    write_curve_csv,
    write_eval_report,
    write_similarity_histogram,
)
from .service import create_server
from .synthetic import generate_synthetic_pairs, labeled_pair

ARTIFACTS_FILE = "artifacts.jsonl"


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout)
    sys.stdout.write("\n")
    sys.stdout.flush()


def _load_corpus(corpus_dir: str) -> list:
    path = Path(corpus_dir) / ARTIFACTS_FILE
    if not path.exists():
        raise SystemExit(f"error: {path} not found; run `satd-link ingest` first")
    return read_jsonl(path, expected_type="artifact")


def _tokenizer_from_args(args: argparse.Namespace) -> TokenizerConfig:
    max_len = getattr(args, "max_len", None)
    if max_len is None:
        return DEFAULT_TOKENIZER
    return replace(DEFAULT_TOKENIZER, max_sequence_length=max_len)


def _train_config(args: argparse.Namespace) -> TrainConfig:
    config = load_train_config(args.config) if args.config else TrainConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _labeled_dataset(path: str) -> list[SatdPair]:
    pairs = read_jsonl(path, expected_type="pair")
    labeled = [p for p in pairs if p.label is not None]
    if not labeled:
        raise SystemExit(f"error: {path} holds no labeled pairs")
    return labeled


def _parse_seeds(raw: str) -> list[int]:
    try:
        seeds = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise SystemExit(f"error: bad seed list {raw!r}; expected e.g. 1,2,3") from None
    if not seeds:
        raise SystemExit("error: seed list is empty")
    return seeds


def _cmd_ingest(args: argparse.Namespace) -> None:
    if not (args.repo or args.issues or args.pulls):
        raise SystemExit("error: nothing to ingest; pass --repo, --issues, or --pulls")
    profiles = load_profiles(args.profiles) if args.profiles else DEFAULT_PROFILES
    bots = load_bot_policy(args.bots) if args.bots else DEFAULT_BOT_POLICY
    project = args.project
    if project is None and args.repo:
        project = Path(args.repo).resolve().name
    if project is None:
        project = "project"

    artifacts = []
    if args.repo:
        artifacts.extend(ingest_git(args.repo, profiles=profiles, bots=bots, project=project))
    if args.issues:
        artifacts.extend(ingest_tracker_export(args.issues, "issue", bots=bots, project=project))
    if args.pulls:
        artifacts.extend(ingest_tracker_export(args.pulls, "pull", bots=bots, project=project))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / ARTIFACTS_FILE
    count = write_jsonl(artifacts, out_path)
    _emit({"artifacts": count, "project": project, "out": str(out_path)})


def _cmd_link(args: argparse.Namespace) -> None:
    artifacts = _load_corpus(args.corpus)
    patterns = load_patterns(args.patterns) if args.patterns else DEFAULT_PATTERNS
    graph = link_corpus(artifacts, patterns)
    write_jsonl(graph.edges, args.out)
    _emit(dict(graph.stats.to_json_dict(), links=len(graph.edges), out=args.out))


def _cmd_detect(args: argparse.Namespace) -> None:
    artifacts = _load_corpus(args.corpus)
    patterns = load_pattern_set(args.patterns) if args.patterns else DEFAULT_PATTERN_SET
    scorer = SatdScorer.load(args.model) if args.model else None
    flags = detect_corpus(artifacts, patterns=patterns, scorer=scorer, threshold=args.threshold)
    write_jsonl(flags, args.out)
    _emit(
        {
            "artifacts": len(artifacts),
            "flagged": len(flags),
            "method": "model" if scorer else "keyword",
            "out": args.out,
        }
    )


def _cmd_pairs(args: argparse.Namespace) -> None:
    artifacts = _load_corpus(args.corpus)
    links = read_jsonl(args.links, expected_type="link")
    flagged_ids = {flag.artifact_id for flag in read_jsonl(args.satd, expected_type="satd")}
    satd_artifacts = [a for a in artifacts if a.id in flagged_ids]
    containers = {a.container for a in artifacts}
    containers.update(link.src for link in links)
    containers.update(link.dst for link in links)
    graph = LinkGraph(containers=frozenset(containers), edges=tuple(links), stats=LinkStats())
    pairs = generate_pairs(satd_artifacts, graph, tokenizer=_tokenizer_from_args(args))
    write_jsonl(pairs, args.out)
    _emit({"satd_artifacts": len(satd_artifacts), "pairs": len(pairs), "out": args.out})


def _cmd_sample(args: argparse.Namespace) -> None:
    pairs = read_jsonl(args.pairs, expected_type="pair")
    sample = stratified_sample(pairs, n=args.n, seed=args.seed)
    write_jsonl(sample, args.out)
    stats = similarity_stats(sample)
    figure = write_similarity_histogram(stats, args.out, pairs=sample)
    _emit(
        {
            "sampled": len(sample),
            "mean_similarity": stats.mean,
            "std_similarity": stats.std,
            "out": args.out,
            "figure": str(figure),
        }
    )


def _cmd_train(args: argparse.Namespace) -> None:
    dataset = _labeled_dataset(args.labels)
    config = _train_config(args)
    tokenizer = _tokenizer_from_args(args)
    vocab = vocab_for_dataset(dataset, tokenizer, min_frequency=config.min_frequency)
    params, history = train(dataset, vocab, config, tokenizer)
    save_params(args.out, params, vocab, tokenizer)
    _emit(
        {
            "pairs": len(dataset),
            "vocab": vocab.size,
            "epochs": len(history.epochs),
            "best_epoch": history.best_epoch,
            "out": args.out,
        }
    )


def _cmd_eval(args: argparse.Namespace) -> None:
    dataset = _labeled_dataset(args.labels)
    config = _train_config(args)
    report = cross_validate(
        dataset,
        config=config,
        k=args.k,
        seeds=_parse_seeds(args.seeds),
        tokenizer=_tokenizer_from_args(args),
    )
    figure = write_eval_report(report, args.out)
    _emit(
        {
            "pairs": len(dataset),
            "folds": len(report.folds),
            "average_f1": report.summary_average.f1,
            "out": args.out,
            "figure": str(figure),
        }
    )


def _cmd_curve(args: argparse.Namespace) -> None:
    dataset = _labeled_dataset(args.labels)
    config = _train_config(args)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else None
    rows = []
    for seed in _parse_seeds(args.seeds):
        rows.extend(
            learning_curve(
                dataset,
                config=config,
                step=args.step,
                seed=seed,
                tokenizer=_tokenizer_from_args(args),
                sizes=sizes,
            )
        )
    figure = write_curve_csv(rows, args.out)
    _emit({"rows": len(rows), "out": args.out, "figure": str(figure)})


def _cmd_census(args: argparse.Namespace) -> None:
    pairs = read_jsonl(args.pairs, expected_type="pair")
    if args.model:
        params, vocab, tokenizer = load_params(args.model)
        pairs = classify_corpus(pairs, params, vocab, tokenizer)
    elif any(p.label is None for p in pairs):
        raise SystemExit("error: unlabeled pairs present; pass --model to classify them")
    table = relation_census(pairs)
    figure = write_census(table, args.out, threshold=args.threshold, markdown_path=args.markdown)
    _emit(
        {
            "pairs": len(pairs),
            "rows": len(table),
            "out": args.out,
            "markdown": args.markdown,
            "figure": str(figure),
        }
    )


def _cmd_annotate_serve(args: argparse.Namespace) -> None:
    server = create_server(
        sample_path=args.sample,
        labels_path=args.labels,
        port=args.port,
        host=args.host,
        overlap_fraction=args.overlap_fraction,
        seed=args.seed,
        assets_dir=args.assets,
    )
    host, port = server.server_address[:2]
    _emit({"serving": f"http://{host}:{port}/", "sample": args.sample, "labels": args.labels})
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def _cmd_merge_labels(args: argparse.Namespace) -> None:
    pairs = read_jsonl(args.sample, expected_type="pair")
    records = read_jsonl(args.labels, expected_type="annotation")
    prefer = [p for p in args.prefer.split(",") if p] if args.prefer else []

    effective: dict[tuple[str, str], str] = {}
    precedence: dict[str, list[str]] = {}
    for record in records:
        effective[(record.pair_id, record.annotator)] = record.label
        order = precedence.setdefault(record.pair_id, [])
        if record.annotator not in order:
            order.append(record.annotator)

    merged: list[SatdPair] = []
    skipped = unlabeled = 0
    for pair in pairs:
        order = precedence.get(pair.pair_id, [])
        ranked = [a for a in prefer if a in order] + [a for a in order if a not in prefer]
        chosen = next(
            (a for a in ranked if effective[(pair.pair_id, a)] != "skip"),
            None,
        )
        if chosen is None:
            skipped += bool(order)
            unlabeled += not order
            continue
        merged.append(
            replace(
                pair,
                label=RelationLabel(effective[(pair.pair_id, chosen)]),
                annotator=chosen,
            )
        )
    write_jsonl(merged, args.out)
    _emit(
        {
            "merged": len(merged),
            "skipped": skipped,
            "unlabeled": unlabeled,
            "out": args.out,
        }
    )


def _cmd_import_dataset(args: argparse.Namespace) -> None:
    mapping = json.loads(Path(args.mapping).read_text(encoding="utf-8"))
    try:
        col_a = mapping["text_a"]
        col_b = mapping["text_b"]
        col_label = mapping["label"]
    except KeyError as exc:
        raise SystemExit(f"error: mapping file must define {exc.args[0]!r}") from None
    label_values = {
        str(key): RelationLabel(value)
        for key, value in mapping.get("label_values", {}).items()
    }
    delimiter = mapping.get("delimiter", ",")

    pairs = []
    with open(args.input, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        for uid, row in enumerate(reader):
            raw_label = str(row[col_label]).strip()
            label = label_values.get(raw_label)
            if label is None:
                try:
                    label = RelationLabel(raw_label.lower())
                except ValueError:
                    raise SystemExit(
                        f"error: row {uid + 1}: label {raw_label!r} has no mapping; "
                        f"add it under label_values in {args.mapping}"
                    ) from None
            text_a = (row[col_a] or "").strip()
            text_b = (row[col_b] or "").strip()
            if not text_a or not text_b:
                print(f"warning: row {uid + 1}: empty text, skipped", file=sys.stderr)
                continue
            pairs.append(labeled_pair(uid, text_a, text_b, label, project=args.project))
    if not pairs:
        raise SystemExit(f"error: no usable rows in {args.input}")
    write_jsonl(pairs, args.out)
    _emit({"imported": len(pairs), "out": args.out})


def _cmd_synth(args: argparse.Namespace) -> None:
    pairs = generate_synthetic_pairs(n=args.n, seed=args.seed)
    write_jsonl(pairs, args.out)
    _emit({"pairs": len(pairs), "seed": args.seed, "out": args.out})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satd-link",
        description="Mine, link, pair, label, classify, and census SATD artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="mine a git repository and tracker exports")
    p.add_argument("--repo", help="path to a git repository")
    p.add_argument("--issues", help="issue export (JSON-Lines)")
    p.add_argument("--pulls", help="pull-request export (JSON-Lines)")
    p.add_argument("--profiles", help="language profile config (JSON)")
    p.add_argument("--bots", help="bot policy config (JSON)")
    p.add_argument("--project", help="project name for artifact ids")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("link", help="extract and resolve cross-references")
    p.add_argument("--corpus", required=True)
    p.add_argument("--patterns", help="reference pattern config (JSON)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_link)

    p = sub.add_parser("detect", help="flag SATD artifacts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--patterns", help="keyword list file (one pattern per line)")
    p.add_argument("--model", help="trained scorer parameter file")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("pairs", help="generate candidate pairs across links")
    p.add_argument("--corpus", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--satd", required=True)
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pairs)

    p = sub.add_parser("sample", help="stratified sample over similarity bins")
    p.add_argument("--pairs", required=True)
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("train", help="train the pair classifier")
    p.add_argument("--labels", required=True, help="labeled pairs (JSON-Lines)")
    p.add_argument("--config", help="training config (JSON)")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--out", required=True, help="parameter file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="stratified cross-validation report")
    p.add_argument("--labels", required=True)
    p.add_argument("--config")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seeds", default="1,2,3")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("curve", help="learning curve over growing training sets")
    p.add_argument("--labels", required=True)
    p.add_argument("--config")
    p.add_argument("--step", type=int, default=5)
    p.add_argument("--seeds", default="1")
    p.add_argument("--sizes", help="comma-separated n_train values to compute")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("census", help="corpus-wide relation census")
    p.add_argument("--pairs", required=True)
    p.add_argument("--model", help="classifier parameters; omit for pre-labeled pairs")
    p.add_argument("--threshold", type=int, default=1000, help="bold-highlight threshold")
    p.add_argument("--markdown", help="also write a markdown table here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("annotate-serve", help="serve the annotation API and UI")
    p.add_argument("--sample", required=True)
    p.add_argument("--labels", required=True, help="append-only label store (JSON-Lines)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--overlap-fraction", type=float, default=0.0, dest="overlap_fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--assets", help="directory of UI assets to serve at /")
    p.set_defaults(func=_cmd_annotate_serve)

    p = sub.add_parser(
        "merge-labels",
        help="merge annotation records into labeled pairs (first annotator wins)",
    )
    p.add_argument("--sample", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--prefer", help="comma-separated annotator priority override")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_merge_labels)

    p = sub.add_parser("import-dataset", help="import an external labeled CSV dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--mapping", required=True, help="column mapping config (JSON)")
    p.add_argument("--project", default="import")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_import_dataset)

    p = sub.add_parser("synth", help="generate the synthetic labeled dataset")
    p.add_argument("-n", type=int, default=600)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
