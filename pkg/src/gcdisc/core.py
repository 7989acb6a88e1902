"""Domain types shared by the whole pipeline.

A :class:`Dataset` pairs per-sample metadata (identity, source recording,
class label, labelled/unlabelled split) with a float64 feature matrix.
Ground-truth labels of unlabelled samples are carried for evaluation but
must never steer training; training code reads labels only through
:meth:`Dataset.visible_labels` or an explicitly masked
:meth:`Dataset.training_view`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np


class Split(Enum):
    LABELLED = "labelled"
    UNLABELLED = "unlabelled"


class Reduction(Enum):
    SUM = "sum"
    MEAN = "mean"


class DataError(ValueError):
    """Raised when input files or datasets violate structural contracts."""


class NumericError(RuntimeError):
    """Raised when a computation produces non-finite values."""


def ensure_features(values) -> np.ndarray:
    """Coerce to a validated (n, dim) float64 feature matrix.

    Raises DataError on wrong rank or non-finite entries.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
    return arr


@dataclass(frozen=True)
class SampleMeta:
    """One sample: a clip cut from a longer source recording.

    ``label`` is the class index. For labelled samples it is visible to
    training; for unlabelled samples it is hidden ground truth (may be None
    when genuinely unknown) and is exposed only to evaluation code.
    """

    sample_id: str
    source_id: str
    label: int | None
    split: Split


@dataclass
class TrainConfig:
    """Hyperparameters of the contrastive training stage."""

    tau: float = 0.1            # temperature of the similarity softmax
    lam: float = 0.5            # mixing weight: 0 = supervised only, 1 = unsupervised only
    n_pos_unsup: int = 5        # same-source positives sampled per anchor
    n_neg: int = 50             # mined negatives per anchor
    epochs: int = 200
    learning_rate: float = 1e-3
    loss_reduction: Reduction = Reduction.MEAN
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.loss_reduction, str):
            self.loss_reduction = Reduction(self.loss_reduction)
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")
        if self.n_pos_unsup < 1:
            raise ValueError("n_pos_unsup must be >= 1")
        if self.n_neg < 1:
            raise ValueError("n_neg must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        # learning_rate 0 is allowed: it freezes parameters, which the
        # trainer's fixed-point checks rely on.
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "lambda": self.lam,
            "n_pos_unsup": self.n_pos_unsup,
            "n_neg": self.n_neg,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "loss_reduction": self.loss_reduction.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            tau=d["tau"],
            lam=d["lambda"],
            n_pos_unsup=d["n_pos_unsup"],
            n_neg=d["n_neg"],
            epochs=d["epochs"],
            learning_rate=d["learning_rate"],
            loss_reduction=Reduction(d["loss_reduction"]),
            seed=d["seed"],
        )


@dataclass(frozen=True)
class Assignment:
    """Per-sample cluster ids produced by a clustering stage."""

    cluster_of: np.ndarray  # (n,) int cluster ids
    n_clusters: int

    def __post_init__(self):
        ids = np.asarray(self.cluster_of, dtype=np.int64)
        object.__setattr__(self, "cluster_of", ids)
        if ids.ndim != 1:
            raise ValueError("cluster_of must be 1-D")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if ids.size and (ids.min() < 0 or ids.max() >= self.n_clusters):
            raise ValueError(
                f"cluster ids must lie in [0, {self.n_clusters}), "
                f"got range [{ids.min()}, {ids.max()}]"
            )

    @property
    def n_samples(self) -> int:
        return int(self.cluster_of.size)


@dataclass
class Dataset:
    """Aligned sample metadata and feature rows (row i <-> meta[i])."""

    meta: list[SampleMeta]
    features: np.ndarray

    def __post_init__(self):
        self.features = ensure_features(self.features)

    @property
    def n_samples(self) -> int:
        return len(self.meta)

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def labelled_indices(self) -> np.ndarray:
        return np.array(
            [i for i, m in enumerate(self.meta) if m.split is Split.LABELLED],
            dtype=np.int64,
        )

    def unlabelled_indices(self) -> np.ndarray:
        return np.array(
            [i for i, m in enumerate(self.meta) if m.split is Split.UNLABELLED],
            dtype=np.int64,
        )

    def visible_labels(self) -> list[int | None]:
        """Labels as training is allowed to see them.

        Unlabelled-split samples always read as None here, even when hidden
        ground truth is stored.
        """
        return [
            m.label if m.split is Split.LABELLED else None for m in self.meta
        ]

    def evaluation_labels(self) -> np.ndarray:
        """Ground-truth labels for every sample; evaluation use only.

        Raises DataError if any sample lacks ground truth.
        """
        missing = [i for i, m in enumerate(self.meta) if m.label is None]
        if missing:
            raise DataError(
                f"ground truth missing for {len(missing)} sample(s), "
                f"first at index {missing[0]}"
            )
        return np.array([m.label for m in self.meta], dtype=np.int64)

    def source_groups(self) -> dict[str, np.ndarray]:
        """Indices of samples per source recording, in dataset order."""
        groups: dict[str, list[int]] = {}
        for i, m in enumerate(self.meta):
            groups.setdefault(m.source_id, []).append(i)
        return {s: np.array(ix, dtype=np.int64) for s, ix in groups.items()}

    def training_view(self) -> "Dataset":
        """Copy of the dataset with unlabelled ground truth stripped.

        Hands training code a view that cannot leak hidden labels even if it
        bypasses :meth:`visible_labels`. The feature matrix is shared.
        """
        masked = [
            m if m.split is Split.LABELLED else replace(m, label=None)
            for m in self.meta
        ]
        view = Dataset.__new__(Dataset)
        view.meta = masked
        view.features = self.features
        return view


def validate_dataset(d: Dataset) -> list[str]:
    """Check every Dataset invariant; returns one message per violation.

    Pure and never raises: a malformed dataset yields messages, a
    well-formed one an empty list. Each message names the offending sample
    index (or indices) and the violated rule.
    """
    violations: list[str] = []

    if d.features.shape[0] != len(d.meta):
        violations.append(
            f"row count mismatch: {d.features.shape[0]} feature rows vs "
            f"{len(d.meta)} metadata entries"
        )

    seen_ids: dict[str, int] = {}
    for i, m in enumerate(d.meta):
        if not m.source_id:
            violations.append(f"sample {i}: empty source_id")
        if m.split is Split.LABELLED and m.label is None:
            violations.append(f"sample {i}: labelled sample missing label")
        if m.label is not None and m.label < 0:
            violations.append(f"sample {i}: negative label {m.label}")
        if m.sample_id in seen_ids:
            violations.append(
                f"sample {i}: duplicate sample_id {m.sample_id!r} "
                f"(first at {seen_ids[m.sample_id]})"
            )
        else:
            seen_ids[m.sample_id] = i

    # One source recording carries one class: within a source, ground truth
    # must be all-present-and-equal or all-absent.
    by_source: dict[str, list[int]] = {}
    for i, m in enumerate(d.meta):
        by_source.setdefault(m.source_id, []).append(i)
    for source_id, idxs in by_source.items():
        labelled = [(i, d.meta[i].label) for i in idxs if d.meta[i].label is not None]
        if labelled and len(labelled) < len(idxs):
            i_missing = next(i for i in idxs if d.meta[i].label is None)
            violations.append(
                f"samples {labelled[0][0]} and {i_missing}: source "
                f"{source_id!r} mixes known and unknown ground truth"
            )
        distinct = {lab for _, lab in labelled}
        if len(distinct) > 1:
            i0, l0 = labelled[0]
            i1, l1 = next((i, l) for i, l in labelled if l != l0)
            violations.append(
                f"samples {i0} and {i1}: source {source_id!r} has conflicting "
                f"ground-truth labels {l0} and {l1}"
            )

    return violations
