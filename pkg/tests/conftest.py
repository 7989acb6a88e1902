import numpy as np
import pytest

from gcdisc.core import Dataset, SampleMeta, Split


def make_dataset(rows, features):
    """Build a Dataset from (sample_id, source_id, label, split) tuples."""
    meta = [
        SampleMeta(sid, src, lab, Split(split) if isinstance(split, str) else split)
        for sid, src, lab, split in rows
    ]
    return Dataset(meta=meta, features=np.asarray(features, dtype=np.float64))


@pytest.fixture
def tiny_dataset():
    """4 labelled samples in 2 classes plus 2 unlabelled same-source clips."""
    rows = [
        ("a0", "srcA", 0, "labelled"),
        ("a1", "srcA", 0, "labelled"),
        ("b0", "srcB", 1, "labelled"),
        ("b1", "srcB", 1, "labelled"),
        ("c0", "srcC", 2, "unlabelled"),
        ("c1", "srcC", 2, "unlabelled"),
    ]
    rng = np.random.default_rng(123)
    centers = np.array([[5.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 5.0]])
    feats = np.vstack([centers[[0, 0, 1, 1, 2, 2]] + 0.1 * rng.standard_normal((6, 3))])
    return make_dataset(rows, feats)
