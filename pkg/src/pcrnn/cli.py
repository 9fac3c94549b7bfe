"""Command-line experiment orchestration.

Subcommands:
  train    run the parallel-clones ("target") or online-GD ("regular") trainer
  recall   seeded free-running generation from a checkpoint
  analyze  loss-surface statistics, SVG plots, and a comparison report

Exit codes: 0 success, 2 usage/configuration error, 3 numeric divergence
(partial artifacts are flushed).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, baseline, clones, corpus, metrics, network, recall

EXIT_USAGE = 2
EXIT_DIVERGED = 3

PRESETS = {
    # preset: (corpus char limit, clone count, iterations)
    "full": (None, 499, 100),
    "smoke": (100, 99, 10),
}


class UsageError(Exception):
    pass


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _load_training_text(args) -> str:
    limit = PRESETS[args.preset][0]
    if args.corpus is None:
        text = corpus.load_moby_excerpt()
    else:
        text = corpus.load_corpus(args.corpus)
    if limit is not None:
        text = text[:limit]
    return text


def _write_manifest(path: Path, entries: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def _read_manifest(path: Path) -> dict:
    entries = {}
    for line in open(path, encoding="utf-8"):
        if "=" in line:
            key, _, value = line.rstrip("\n").partition("=")
            entries[key] = value
    return entries


def cmd_train(args) -> int:
    preset_limit, preset_clones, preset_iters = PRESETS[args.preset]
    n_clones = args.clones if args.clones is not None else preset_clones
    iterations = args.iterations if args.iterations is not None else preset_iters

    text = _load_training_text(args)
    vocab = corpus.build_vocabulary(text)
    seq = corpus.encode(text, vocab)

    config = clones.RunConfig(
        corpus_path=args.corpus or str(corpus.bundled_corpus_path()),
        n_clones=min(n_clones, len(text) - 1) if args.clones is None else n_clones,
        iterations=iterations,
        lr=args.lr,
        rng_seed=args.seed,
        thread_count=args.threads,
        checkpoint_every=args.checkpoint_every,
        measure_every_step=args.measure_every_step,
    )
    try:
        config.validate(len(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out_dir = Path(args.out)
    if args.mode == "regular":
        out_dir = out_dir / "regular"
    out_dir.mkdir(parents=True, exist_ok=True)

    _write_manifest(out_dir / "manifest.txt", {
        "mode": args.mode,
        "corpus": config.corpus_path,
        "corpus_sha256": _sha256(text),
        "corpus_length": len(text),
        "vocab_size": len(vocab),
        "n_clones": config.n_clones,
        "iterations": config.iterations,
        "lr": config.lr,
        "seed": config.rng_seed,
        "threads": config.thread_count,
        "preset": args.preset,
        "version": __version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
    })

    surface_path = out_dir / "loss_surface.csv"
    sum_path = out_dir / "sum_loss.csv"
    surface_fh = open(surface_path, "w", encoding="utf-8", newline="\n")
    sum_fh = open(sum_path, "w", encoding="utf-8", newline="\n")
    surface_fh.write("iteration,history_level,mean_loss\n")
    sum_fh.write("iteration,sum_loss\n")

    def on_iteration(i, record, params):
        for h, v in enumerate(record):
            surface_fh.write(f"{i},{h},{v:.17g}\n")
        surface_fh.flush()
        total = float(record.sum())
        sum_fh.write(f"{i},{total:.17g}\n")
        sum_fh.flush()
        print(f"iteration {i}/{config.iterations} sum_loss={total:.6g}",
              file=sys.stderr)
        if config.checkpoint_every and i % config.checkpoint_every == 0:
            network.save_checkpoint(params, out_dir / f"checkpoint_{i:04d}.ckpt")

    train = clones.train_target if args.mode == "target" else baseline.train_regular
    try:
        params, _ = train(config, seq, len(vocab), on_iteration)
    except network.DivergenceError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    finally:
        surface_fh.close()
        sum_fh.close()

    network.save_checkpoint(params, out_dir / "final.ckpt")
    with open(out_dir / "manifest.txt", "a", encoding="utf-8", newline="\n") as fh:
        fh.write(f"finished={time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
    return 0


def cmd_recall(args) -> int:
    try:
        params = network.load_checkpoint(args.checkpoint)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load checkpoint: {exc}") from None

    if args.corpus is None:
        text = corpus.load_moby_excerpt()
    else:
        text = corpus.load_corpus(args.corpus)
    vocab = corpus.build_vocabulary(text)
    if params.dims.vocab != len(vocab):
        raise UsageError(
            f"checkpoint vocabulary width {params.dims.vocab} does not match "
            f"corpus vocabulary size {len(vocab)}"
        )

    manifest_path = Path(args.checkpoint).parent / "manifest.txt"
    if manifest_path.exists():
        recorded = _read_manifest(manifest_path).get("corpus_sha256")
        if recorded is not None and recorded != _sha256(text):
            raise UsageError(
                "corpus checksum does not match the training manifest; "
                "the corpus drifted since training"
            )

    result = recall.seed_and_generate(params, text, vocab,
                                      seed_length=args.seed_length,
                                      feedback_mode=args.feedback)
    if args.report is not None:
        recall.recall_report(result, args.report)
    print(f"edit_distance={result.edit_distance}")
    return 0


def _load_run(run_dir: Path):
    surface_path = run_dir / "loss_surface.csv"
    if not surface_path.exists():
        raise UsageError(f"missing loss surface: {surface_path}")
    return metrics.read_surface_csv(surface_path)


def cmd_analyze(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs = {}
    for run in args.runs:
        run_dir = Path(run)
        name = run_dir.name or "run"
        if name in runs:
            name = f"{name}_{len(runs)}"
        runs[name] = _load_run(run_dir)

    lines = [f"pcrnn analyze report (version {__version__})", ""]
    sums = {}
    for name, surface in runs.items():
        levels = min(args.levels, surface.shape[1])
        metrics.render_loss_svg(surface, levels, out_dir / f"loss_{name}.svg",
                                title=f"Mean loss by history level: {name}")
        total = metrics.sum_over_history(surface)
        sums[name] = total
        corr = metrics.final_loss_vs_history(surface, levels)
        lines += [
            f"[{name}]",
            f"  iterations={surface.shape[0]} history_levels={surface.shape[1]}",
            f"  sum_loss_first={total[0]:.6g} sum_loss_last={total[-1]:.6g}",
            f"  spearman_levels={levels} rho={corr.rho:.4f} p={corr.p_value:.4g}",
            "",
        ]
    metrics.render_sum_loss_svg(sums, out_dir / "sum_loss.svg")
    if len(runs) == 2:
        (a, ta), (b, tb) = sums.items()
        lines += [
            "[comparison]",
            f"  final_sum_loss {a}={ta[-1]:.6g} {b}={tb[-1]:.6g} "
            f"ratio={ta[-1] / tb[-1]:.4g}",
            "",
        ]
    report = "\n".join(lines)
    with open(out_dir / "report.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    print(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcrnn",
        description="Parallel-clones recurrent network training experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a training experiment")
    p_train.add_argument("--mode", choices=("target", "regular"), required=True)
    p_train.add_argument("--corpus", help="corpus file (default: bundled excerpt)")
    p_train.add_argument("--preset", choices=sorted(PRESETS), default="full")
    p_train.add_argument("--iterations", type=int)
    p_train.add_argument("--clones", type=int)
    p_train.add_argument("--lr", type=float, default=1.0)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--threads", type=int, default=1)
    p_train.add_argument("--checkpoint-every", type=int, default=0)
    p_train.add_argument("--measure-every-step", action="store_true")
    p_train.add_argument("--out", required=True, help="run output directory")
    p_train.set_defaults(func=cmd_train)

    p_recall = sub.add_parser("recall", help="generate from a checkpoint")
    p_recall.add_argument("--checkpoint", required=True)
    p_recall.add_argument("--corpus", help="corpus file (default: bundled excerpt)")
    p_recall.add_argument("--seed-length", type=int,
                          default=recall.DEFAULT_SEED_LENGTH)
    p_recall.add_argument("--feedback", choices=recall.FEEDBACK_MODES,
                          default="raw")
    p_recall.add_argument("--report", help="write the recall report here")
    p_recall.set_defaults(func=cmd_recall)

    p_analyze = sub.add_parser("analyze", help="analyze one or two run dirs")
    p_analyze.add_argument("runs", nargs="+", metavar="RUN_DIR")
    p_analyze.add_argument("--levels", type=int, default=metrics.DEFAULT_LEVELS)
    p_analyze.add_argument("--out", required=True, help="report directory")
    p_analyze.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, corpus.CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except network.DivergenceError as exc:
        print(f"error: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
