"""Clustering evaluation: matched accuracy, NMI, ARI, silhouette, subset reports.

Accuracy maps predicted clusters to classes with an exact maximum-weight
assignment over the contingency table. The Old/New/All report computes that
map ONCE on the full table and then restricts it to each subset, so the
matched counts add up exactly: correct(Old) + correct(New) = correct(All).
Re-matching per subset would inflate the unlabelled-subset score and break
that identity.

Conventions, echoed in report provenance: NMI normalizes mutual information
by the arithmetic mean of the two entropies (0/0 -> 0); silhouette uses
Euclidean distance on the same embeddings handed to the clusterer, scoring
singleton-cluster samples 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .core import Assignment, DataError, Dataset, Split, ensure_features


def contingency_table(pred, truth) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts of (cluster, class) co-occurrences.

    Returns (table, cluster_values, class_values); table[i, j] counts samples
    with cluster cluster_values[i] and class class_values[j].
    """
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(
            f"prediction and truth must be equal-length vectors, "
            f"got {pred.shape} and {truth.shape}"
        )
    rows, ri = np.unique(pred, return_inverse=True)
    cols, ci = np.unique(truth, return_inverse=True)
    table = np.zeros((rows.size, cols.size), dtype=np.int64)
    np.add.at(table, (ri, ci), 1)
    return table, rows, cols


def hungarian_max_assignment(weights) -> tuple[dict[int, int], float]:
    """Exact maximum-weight assignment of rows to columns.

    Rectangular inputs are zero-padded to square first, so with negative
    weights a row may stay unmatched (pairing with padding counts 0). The
    returned mapping contains only real row->column pairs.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.size == 0:
        raise ValueError(f"weights must be a non-empty 2-D matrix, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    n_rows, n_cols = w.shape
    side = max(n_rows, n_cols)
    padded = np.zeros((side, side))
    padded[:n_rows, :n_cols] = w
    row_ind, col_ind = linear_sum_assignment(padded, maximize=True)
    mapping = {
        int(r): int(c)
        for r, c in zip(row_ind, col_ind)
        if r < n_rows and c < n_cols
    }
    total = float(sum(w[r, c] for r, c in mapping.items()))
    return mapping, total


def cluster_class_map(pred, truth) -> dict[int, int]:
    """Optimal cluster-id -> class-id map from the contingency table."""
    table, rows, cols = contingency_table(pred, truth)
    mapping, _ = hungarian_max_assignment(table)
    return {int(rows[r]): int(cols[c]) for r, c in mapping.items()}


def clustering_accuracy(pred, truth) -> float:
    """Fraction of samples correct under the optimal cluster->class map."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    table, _, _ = contingency_table(pred, truth)
    _, matched = hungarian_max_assignment(table)
    return matched / pred.size


def _entropy_terms(counts: np.ndarray, n: int) -> float:
    counts = counts[counts > 0].astype(np.float64)
    log_n = np.log(float(n))
    return float(np.sum(counts / n * (log_n - np.log(counts))))


def nmi(pred, truth) -> float:
    """Mutual information normalized by the arithmetic mean of the entropies.

    Natural logarithms throughout; a 0/0 normalization (both partitions
    trivial) is defined as 0.
    """
    table, _, _ = contingency_table(pred, truth)
    n = int(table.sum())
    a = table.sum(axis=1).astype(np.float64)
    b = table.sum(axis=0).astype(np.float64)
    log_n = np.log(float(n))

    mi = 0.0
    rows, cols = np.nonzero(table)
    for r, c in zip(rows, cols):
        nij = float(table[r, c])
        mi += nij / n * (np.log(nij) - np.log(a[r]) - np.log(b[c]) + log_n)

    h_pred = _entropy_terms(a, n)
    h_truth = _entropy_terms(b, n)
    denom = 0.5 * (h_pred + h_truth)
    if denom == 0.0:
        return 0.0
    return float(min(max(mi / denom, 0.0), 1.0))


def ari(pred, truth) -> float:
    """Pair-counting agreement, adjusted for chance."""
    table, _, _ = contingency_table(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise ValueError("adjusted Rand index needs at least 2 samples")

    def comb2(x):
        return x * (x - 1) / 2.0

    index = float(comb2(table.astype(np.float64)).sum())
    sum_a = float(comb2(table.sum(axis=1).astype(np.float64)).sum())
    sum_b = float(comb2(table.sum(axis=0).astype(np.float64)).sum())
    expected = sum_a * sum_b / comb2(float(n))
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # both partitions trivial in the same way (all-one-cluster or
        # all-singletons): identical partitions, perfect agreement
        return 1.0
    return (index - expected) / (max_index - expected)


def silhouette(z, a: Assignment) -> float:
    """Mean silhouette over all samples, Euclidean distances.

    Samples in singleton clusters score 0 by convention. A single cluster
    overall leaves the score undefined and raises.
    """
    x = ensure_features(z)
    labels = a.cluster_of
    if labels.size != x.shape[0]:
        raise ValueError(
            f"assignment covers {labels.size} samples, embeddings have {x.shape[0]}"
        )
    present = np.unique(labels)
    if present.size < 2:
        raise ValueError("silhouette undefined for a single cluster")

    dist = cdist(x, x)

    members = {c: np.flatnonzero(labels == c) for c in present}
    scores = np.zeros(x.shape[0])
    for c in present:
        idx = members[c]
        if idx.size == 1:
            continue  # singleton scores 0
        for i in idx:
            a_i = dist[i, idx].sum() / (idx.size - 1)
            b_i = min(dist[i, members[o]].mean() for o in present if o != c)
            top = max(a_i, b_i)
            scores[i] = 0.0 if top == 0.0 else (b_i - a_i) / top
    return float(scores.mean())


@dataclass
class SubsetMetrics:
    acc: float
    nmi: float
    ari: float
    silhouette: float
    n_samples: int
    n_correct: int  # matched count under the global map; acc = n_correct/n_samples

    def to_dict(self) -> dict:
        return {
            "acc": self.acc,
            "nmi": self.nmi,
            "ari": self.ari,
            "silhouette": self.silhouette,
            "n_samples": self.n_samples,
            "n_correct": self.n_correct,
        }


@dataclass
class MetricReport:
    all: SubsetMetrics
    old: SubsetMetrics
    new: SubsetMetrics
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "subsets": {
                "all": self.all.to_dict(),
                "old": self.old.to_dict(),
                "new": self.new.to_dict(),
            },
            "provenance": self.provenance,
        }


def subset_report(pred: Assignment, d: Dataset, provenance: dict | None = None) -> MetricReport:
    """Old/New/All evaluation under a single global cluster->class map.

    Old is the labelled split, New the unlabelled split, All their union.
    Ground truth must be present for every sample; this is the one place
    allowed to read hidden labels of unlabelled samples.
    """
    if pred.n_samples != d.n_samples:
        raise ValueError(
            f"assignment covers {pred.n_samples} samples, dataset has {d.n_samples}"
        )
    truth = d.evaluation_labels()
    labels = pred.cluster_of

    mapping = cluster_class_map(labels, truth)
    correct = np.array(
        [mapping.get(int(c), -1) == int(t) for c, t in zip(labels, truth)]
    )

    def subset(indices: np.ndarray) -> SubsetMetrics:
        n = int(indices.size)
        n_correct = int(correct[indices].sum())
        return SubsetMetrics(
            acc=n_correct / n,
            nmi=nmi(labels[indices], truth[indices]),
            ari=ari(labels[indices], truth[indices]),
            silhouette=silhouette(
                d.features[indices],
                _restricted_assignment(labels[indices]),
            ),
            n_samples=n,
            n_correct=n_correct,
        )

    old_idx = d.labelled_indices()
    new_idx = d.unlabelled_indices()
    if old_idx.size == 0 or new_idx.size == 0:
        raise DataError("subset report needs both labelled and unlabelled samples")

    return MetricReport(
        all=subset(np.arange(d.n_samples, dtype=np.int64)),
        old=subset(old_idx),
        new=subset(new_idx),
        provenance={
            "seed": None,
            "config": None,
            "nmi_normalization": "arithmetic-mean",
            "silhouette_distance": "euclidean",
            **(provenance or {}),
        },
    )


def _restricted_assignment(labels: np.ndarray) -> Assignment:
    # relabel to a dense range so Assignment's bounds invariant holds
    _, dense = np.unique(labels, return_inverse=True)
    return Assignment(cluster_of=dense, n_clusters=int(dense.max()) + 1)
