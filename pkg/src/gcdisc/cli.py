"""Command-line surface tying the pipeline stages together.

Subcommands: ``gen`` (synthetic dataset to files), ``train`` (contrastive
training to checkpoint + refined embeddings), ``cluster`` (embeddings to an
assignment file), ``eval`` (assignment + metadata + embeddings to a report),
and ``pipeline`` (train, cluster, eval in one run). All outputs are
deterministic in ``--seed``.

Exit codes: 0 success, 1 usage (bad flags, missing files, invalid ranges),
2 data error (malformed or inconsistent files), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .core import DataError, Dataset, NumericError, TrainConfig
from .clustering import kmeans, threshold_cluster
from .datagen import SynthConfig, generate
from .encoder import encoder_init, save_checkpoint
from .fileio import (
    load_assignment,
    load_dataset,
    load_embeddings,
    load_metadata,
    save_assignment,
    save_dataset,
    save_embeddings,
    save_report,
)
from .metrics import subset_report
from .trainer import train


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract wants 1
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=0.1, help="softmax temperature")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5,
                   help="unsupervised mixing weight in [0, 1]")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--n-pos", type=int, default=5,
                   help="same-source positives per unsupervised anchor")
    p.add_argument("--n-neg", type=int, default=50, help="mined negatives per anchor")
    p.add_argument("--loss-reduction", choices=["mean", "sum"], default="mean")
    p.add_argument("--hidden-dim", type=int, default=256)
    p.add_argument("--n-blocks", type=int, default=2)


def _add_cluster_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["kmeans", "threshold"], default="kmeans")
    p.add_argument("--k", type=int, help="number of clusters (kmeans)")
    p.add_argument("--delta", type=float, help="similarity threshold (threshold)")
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--n-restarts", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gcdisc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gcdisc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--out-embeddings", required=True)
    p.add_argument("--out-metadata", required=True)
    p.add_argument("--n-old-classes", type=int, default=8)
    p.add_argument("--n-new-classes", type=int, default=4)
    p.add_argument("--sources-per-class", type=int, default=6)
    p.add_argument("--clips-per-source", type=int, default=10)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--class-spread", type=float, default=10.0)
    p.add_argument("--source-sigma", type=float, default=0.5)
    p.add_argument("--clip-sigma", type=float, default=0.5)
    p.add_argument("--overlap", action="store_true",
                   help="place two known-class centroids at reduced separation")
    p.add_argument("--overlap-separation", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="contrastive training of the encoder")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--metadata", required=True)
    p.add_argument("--out-checkpoint", required=True)
    p.add_argument("--out-embeddings", required=True,
                   help="refined embeddings after training")
    p.add_argument("--out-manifest",
                   help="JSON echo of the training config, for eval provenance")
    p.add_argument("--log", help="per-epoch loss log file (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)

    p = sub.add_parser("cluster", help="cluster refined embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out-assignment", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_cluster_flags(p)

    p = sub.add_parser("eval", help="score an assignment against ground truth")
    p.add_argument("--assignment", required=True)
    p.add_argument("--metadata", required=True)
    p.add_argument("--embeddings", required=True,
                   help="embeddings the assignment was computed on (for silhouette)")
    p.add_argument("--out-report", required=True)
    p.add_argument("--manifest", help="training manifest to echo into the report")

    p = sub.add_parser("pipeline", help="train, cluster, and eval in one run")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--metadata", required=True)
    p.add_argument("--out-report", required=True)
    p.add_argument("--out-dir",
                   help="directory for intermediate artifacts (checkpoint, "
                        "refined embeddings, assignment, manifest)")
    p.add_argument("--log", help="per-epoch loss log file (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    _add_cluster_flags(p)

    return parser


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        tau=args.tau,
        lam=args.lam,
        n_pos_unsup=args.n_pos,
        n_neg=args.n_neg,
        epochs=args.epochs,
        learning_rate=args.lr,
        loss_reduction=args.loss_reduction,
        seed=args.seed,
    )


def _run_train(dataset, args, cfg: TrainConfig):
    init = encoder_init(dataset.dim, args.hidden_dim, args.n_blocks, cfg.seed)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            state, z = train(dataset, cfg, init, log=fh)
    else:
        state, z = train(dataset, cfg, init, log=sys.stdout)
    return state, z


def _run_cluster(z, args, seed: int):
    if args.method == "kmeans":
        if args.k is None:
            raise UsageError("--method kmeans requires --k")
        return kmeans(z, args.k, seed=seed,
                      max_iter=args.max_iter, n_restarts=args.n_restarts).assignment
    if args.delta is None:
        raise UsageError("--method threshold requires --delta")
    return threshold_cluster(z, args.delta)


def _cmd_gen(args) -> int:
    cfg = SynthConfig(
        n_old_classes=args.n_old_classes,
        n_new_classes=args.n_new_classes,
        sources_per_class=args.sources_per_class,
        clips_per_source=args.clips_per_source,
        dim=args.dim,
        class_spread=args.class_spread,
        source_sigma=args.source_sigma,
        clip_sigma=args.clip_sigma,
        seed=args.seed,
        overlap=args.overlap,
        overlap_separation=args.overlap_separation,
    )
    d = generate(cfg)
    save_dataset(d, args.out_embeddings, args.out_metadata)
    print(f"wrote {d.n_samples} samples ({cfg.n_classes} classes, dim {cfg.dim})")
    return 0


def _cmd_train(args) -> int:
    # strip hidden truth before training ever sees the data
    dataset = load_dataset(args.embeddings, args.metadata).training_view()
    cfg = _train_config(args)
    state, z = _run_train(dataset, args, cfg)
    save_checkpoint(state.params, args.out_checkpoint)
    save_embeddings(z, args.out_embeddings)
    if args.out_manifest:
        manifest = {"config": cfg.to_dict(), "seed": cfg.seed}
        Path(args.out_manifest).write_text(
            json.dumps(manifest, sort_keys=True), encoding="utf-8"
        )
    return 0


def _cmd_cluster(args) -> int:
    z = load_embeddings(args.embeddings)
    assignment = _run_cluster(z, args, args.seed)
    save_assignment(assignment, args.out_assignment)
    print(f"clusters: {assignment.n_clusters}")
    return 0


def _cmd_eval(args) -> int:
    assignment = load_assignment(args.assignment)
    meta = load_metadata(args.metadata)
    z = load_embeddings(args.embeddings)
    if len(meta) != z.shape[0]:
        raise DataError(
            f"{args.metadata} has {len(meta)} rows but {args.embeddings} "
            f"has {z.shape[0]} embedding rows"
        )
    dataset = Dataset(meta=meta, features=z)
    provenance = {}
    if args.manifest:
        try:
            provenance = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.manifest}: malformed manifest: {exc}") from None
    report = subset_report(assignment, dataset, provenance=provenance)
    save_report(report, args.out_report)
    return 0


def _cmd_pipeline(args) -> int:
    started = time.monotonic()
    full = load_dataset(args.embeddings, args.metadata)
    cfg = _train_config(args)

    state, z = _run_train(full.training_view(), args, cfg)
    assignment = _run_cluster(z, args, args.seed)

    # score on the refined embeddings the clusterer saw
    eval_dataset = Dataset(meta=full.meta, features=z)
    report = subset_report(
        assignment, eval_dataset,
        provenance={"config": cfg.to_dict(), "seed": cfg.seed},
    )
    save_report(report, args.out_report)

    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(state.params, out / "encoder.ckpt")
        save_embeddings(z, out / "refined.gcde")
        save_assignment(assignment, out / "assignment.json")
        (out / "manifest.json").write_text(
            json.dumps({"config": cfg.to_dict(), "seed": cfg.seed}, sort_keys=True),
            encoding="utf-8",
        )
    print(
        f"all acc {report.all.acc:.4f} | old acc {report.old.acc:.4f} | "
        f"new acc {report.new.acc:.4f}",
        file=sys.stderr,
    )
    print(f"wall clock: {time.monotonic() - started:.1f} s", file=sys.stderr)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "cluster": _cmd_cluster,
    "eval": _cmd_eval,
    "pipeline": _cmd_pipeline,
}


def cli(argv: list[str] | None = None) -> int:
    """Parse and run; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        _fail(f"usage: {exc}")
        return 1
    except FileNotFoundError as exc:
        _fail(f"usage: missing file: {exc.filename}")
        return 1
    except ValueError as exc:
        if isinstance(exc, DataError):
            _fail(f"data: {exc}")
            return 2
        _fail(f"usage: {exc}")
        return 1
    except NumericError as exc:
        _fail(f"numeric: {exc}")
        return 3


def _fail(message: str) -> None:
    print("error: " + " ".join(str(message).split()), file=sys.stderr)


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
