"""Similarity geometry and pair construction.

Shows the cosine-similarity matrix, the ascending similarity ranking, and
how the two pair builders pick positives (same class for labelled anchors,
same source for every anchor) and mine negatives (the least similar
candidates).
"""

import numpy as np

from gcdisc import (
    SynthConfig,
    build_supervised_pairs,
    build_unsupervised_pairs,
    generate,
    mine_hard_negatives,
    rank_ascending,
    similarity_matrix,
)

dataset = generate(
    SynthConfig(n_old_classes=3, n_new_classes=2, sources_per_class=2,
                clips_per_source=4, dim=8, seed=3)
).training_view()

s = similarity_matrix(dataset.features)
print(f"similarity matrix {s.shape}, range [{s.min():.3f}, {s.max():.3f}]")

anchor = 0
candidates = list(range(1, dataset.n_samples))
ranking = rank_ascending(anchor, candidates, s)
print(f"anchor {anchor}: least similar {ranking[:3].tolist()} "
      f"(sims {np.round(s[anchor, ranking[:3]], 3).tolist()})")
print(f"            most similar {ranking[-3:].tolist()} "
      f"(sims {np.round(s[anchor, ranking[-3:]], 3).tolist()})")

negs = mine_hard_negatives(anchor, candidates, s, count=5)
print(f"mined negatives for {anchor}: {negs.tolist()}")

sup = build_supervised_pairs(dataset, s, count_neg=5)
print(f"\nsupervised anchors: {sup.n_anchors} (skipped {len(sup.skipped)})")
i = sup.anchors()[0]
print(f"anchor {i} (class {dataset.meta[i].label}): "
      f"positives {sup.positives[i].tolist()}, negatives {sup.negatives[i].tolist()}")

unsup = build_unsupervised_pairs(dataset, s, count_pos=3, count_neg=5,
                                 rng=np.random.default_rng(0))
j = unsup.anchors()[0]
print(f"\nunsupervised anchor {j} (source {dataset.meta[j].source_id}): "
      f"positives {unsup.positives[j].tolist()}")
print("positive sources:",
      {dataset.meta[p].source_id for p in unsup.positives[j]})
