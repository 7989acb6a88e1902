"""Synthetic ground-truth generator: classes -> source recordings -> clips.

Mirrors the data regime the pipeline targets: each class owns several
source recordings, each recording contributes several clips, and every
clip of one recording carries the recording's class. Class centroids are
drawn isotropically at scale ``class_spread``; each source offsets its
class centroid by Gaussian noise of scale ``source_sigma``; each clip adds
Gaussian noise of scale ``clip_sigma``. Old classes come out labelled, new
classes unlabelled with hidden ground truth, so the full pipeline can be
verified without any audio.

The optional overlap mode drops the first two old-class centroids to a
reduced separation, creating a pair of confusable known classes: the hard
case where supervision must prevent the unsupervised objective from
merging them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, SampleMeta, Split


@dataclass
class SynthConfig:
    n_old_classes: int = 8
    n_new_classes: int = 4
    sources_per_class: int = 6
    clips_per_source: int = 10
    dim: int = 64
    class_spread: float = 10.0   # scale of class centroids
    source_sigma: float = 0.5    # per-source offset from the class centroid
    clip_sigma: float = 0.5      # per-clip noise around the source mean
    seed: int = 0
    overlap: bool = False
    overlap_separation: float = 4.0  # centroid distance of the confusable pair

    def __post_init__(self):
        for name in ("n_old_classes", "n_new_classes", "sources_per_class",
                     "clips_per_source", "dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.class_spread <= 0:
            raise ValueError("class_spread must be positive")
        if self.source_sigma < 0 or self.clip_sigma < 0:
            raise ValueError("sigmas must be >= 0")
        if self.overlap and self.overlap_separation <= 0:
            raise ValueError("overlap_separation must be positive")
        if self.overlap and self.n_old_classes < 2:
            raise ValueError("overlap mode needs at least two old classes")

    @property
    def n_classes(self) -> int:
        return self.n_old_classes + self.n_new_classes

    @property
    def n_samples(self) -> int:
        return self.n_classes * self.sources_per_class * self.clips_per_source


def generate(cfg: SynthConfig) -> Dataset:
    """Deterministic synthetic dataset with full hidden ground truth."""
    rng = np.random.default_rng(cfg.seed)

    centroids = cfg.class_spread * rng.standard_normal((cfg.n_classes, cfg.dim))
    if cfg.overlap:
        # park class 1 at a fixed small distance from class 0
        direction = rng.standard_normal(cfg.dim)
        direction /= np.linalg.norm(direction)
        centroids[1] = centroids[0] + cfg.overlap_separation * direction

    meta: list[SampleMeta] = []
    rows = np.empty((cfg.n_samples, cfg.dim))
    i = 0
    for c in range(cfg.n_classes):
        split = Split.LABELLED if c < cfg.n_old_classes else Split.UNLABELLED
        for s in range(cfg.sources_per_class):
            source_id = f"src-{c:03d}-{s:03d}"
            source_mean = centroids[c] + cfg.source_sigma * rng.standard_normal(cfg.dim)
            for _ in range(cfg.clips_per_source):
                rows[i] = source_mean + cfg.clip_sigma * rng.standard_normal(cfg.dim)
                meta.append(
                    SampleMeta(
                        sample_id=f"clip-{i:05d}",
                        source_id=source_id,
                        label=c,
                        split=split,
                    )
                )
                i += 1
    return Dataset(meta=meta, features=rows)
