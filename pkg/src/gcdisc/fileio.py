"""On-disk formats: embeddings, metadata, assignments, reports.

Embeddings travel in a small binary container (magic ``GCDE``, version,
counts, float64 little-endian payload); metadata is a CSV table with one
row per sample; assignments and reports are JSON. Every writer here has a
matching reader and round-trips losslessly. Report JSON is written with
sorted keys and no volatile fields, so identical runs produce identical
bytes.

The metadata table separates the ``label`` column (visible training label,
labelled rows only) from the ``truth`` column (evaluation-only ground
truth). Loading for training must go through
:meth:`gcdisc.core.Dataset.training_view` so the truth column never
reaches the training stage.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

from . import __version__
import numpy as np

from .core import Assignment, DataError, Dataset, SampleMeta, Split, validate_dataset
from .metrics import MetricReport, SubsetMetrics

EMBEDDING_MAGIC = b"GCDE"
EMBEDDING_VERSION = 1

METADATA_COLUMNS = ["sample_id", "source_id", "label", "split", "truth"]


def save_embeddings(values, path) -> None:
    """Write an (n, dim) float64 matrix in the binary embedding format."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"embeddings must be 2-D, got shape {arr.shape}")
    header = EMBEDDING_MAGIC + struct.pack(
        "<IQQ", EMBEDDING_VERSION, arr.shape[0], arr.shape[1]
    )
    Path(path).write_bytes(header + arr.astype("<f8").tobytes())


def load_embeddings(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    head_len = len(EMBEDDING_MAGIC) + struct.calcsize("<IQQ")
    if len(raw) < head_len:
        raise DataError(f"{path}: truncated embedding header")
    if raw[: len(EMBEDDING_MAGIC)] != EMBEDDING_MAGIC:
        raise DataError(f"{path}: bad embedding magic")
    version, n, dim = struct.unpack_from("<IQQ", raw, len(EMBEDDING_MAGIC))
    if version != EMBEDDING_VERSION:
        raise DataError(
            f"{path}: unsupported embedding version {version} "
            f"(expected {EMBEDDING_VERSION})"
        )
    expected = n * dim * 8
    if len(raw) - head_len != expected:
        raise DataError(
            f"{path}: payload is {len(raw) - head_len} bytes, "
            f"expected {expected} for {n}x{dim} float64"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=head_len)
    return data.astype(np.float64).reshape(int(n), int(dim))


def save_metadata(meta: list[SampleMeta], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METADATA_COLUMNS)
        for m in meta:
            visible = m.label if m.split is Split.LABELLED else None
            writer.writerow(
                [
                    m.sample_id,
                    m.source_id,
                    "" if visible is None else visible,
                    m.split.value,
                    "" if m.label is None else m.label,
                ]
            )


def load_metadata(path) -> list[SampleMeta]:
    meta: list[SampleMeta] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != METADATA_COLUMNS:
            raise DataError(
                f"{path}: expected header {','.join(METADATA_COLUMNS)}, "
                f"got {','.join(header) if header else 'empty file'}"
            )
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(METADATA_COLUMNS):
                raise DataError(
                    f"{path}:{lineno}: expected {len(METADATA_COLUMNS)} fields, "
                    f"got {len(row)}"
                )
            sample_id, source_id, label_s, split_s, truth_s = row
            try:
                split = Split(split_s)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: split must be 'labelled' or 'unlabelled', "
                    f"got {split_s!r}"
                ) from None
            label = _parse_int(label_s, path, lineno, "label")
            truth = _parse_int(truth_s, path, lineno, "truth")
            if split is Split.LABELLED:
                if label is None:
                    raise DataError(f"{path}:{lineno}: labelled row missing label")
                if truth is not None and truth != label:
                    raise DataError(
                        f"{path}:{lineno}: truth {truth} contradicts label {label}"
                    )
                meta.append(SampleMeta(sample_id, source_id, label, split))
            else:
                if label is not None:
                    raise DataError(
                        f"{path}:{lineno}: unlabelled row carries a visible label"
                    )
                meta.append(SampleMeta(sample_id, source_id, truth, split))
    return meta


def _parse_int(text: str, path, lineno: int, column: str) -> int | None:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        raise DataError(
            f"{path}:{lineno}: {column} must be an integer or empty, got {text!r}"
        ) from None


def save_dataset(d: Dataset, embedding_path, metadata_path) -> None:
    save_embeddings(d.features, embedding_path)
    save_metadata(d.meta, metadata_path)


def load_dataset(embedding_path, metadata_path) -> Dataset:
    """Load and validate; any dataset invariant violation aborts the load."""
    features = load_embeddings(embedding_path)
    meta = load_metadata(metadata_path)
    if len(meta) != features.shape[0]:
        raise DataError(
            f"{metadata_path} has {len(meta)} rows but {embedding_path} "
            f"has {features.shape[0]} embedding rows"
        )
    d = Dataset(meta=meta, features=features)
    problems = validate_dataset(d)
    if problems:
        raise DataError(
            f"{metadata_path}: invalid dataset: " + "; ".join(problems)
        )
    return d


def save_assignment(a: Assignment, path) -> None:
    payload = {
        "n_clusters": a.n_clusters,
        "cluster_of": [int(c) for c in a.cluster_of],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_assignment(path) -> Assignment:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return Assignment(
            cluster_of=np.array(payload["cluster_of"], dtype=np.int64),
            n_clusters=int(payload["n_clusters"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed assignment file: {exc}") from None


def save_report(report: MetricReport, path) -> None:
    """Serialize a report deterministically (sorted keys, stable floats)."""
    payload = {
        "artifact": {"name": "gcdisc", "version": __version__},
        **report.to_dict(),
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_report(path) -> MetricReport:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        subsets = payload["subsets"]
        return MetricReport(
            all=SubsetMetrics(**subsets["all"]),
            old=SubsetMetrics(**subsets["old"]),
            new=SubsetMetrics(**subsets["new"]),
            provenance=payload["provenance"],
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed report file: {exc}") from None
