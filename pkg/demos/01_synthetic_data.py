"""Walk through the synthetic data model: classes, sources, clips.

The generator mimics a concert-recording archive: each class owns a few
long recordings, each recording is cut into clips, and every clip of one
recording belongs to the recording's class. Old classes arrive labelled,
new classes arrive unlabelled (their truth is stored but hidden from
training).
"""

import numpy as np

from gcdisc import SynthConfig, generate, validate_dataset

cfg = SynthConfig(
    n_old_classes=4,
    n_new_classes=2,
    sources_per_class=3,
    clips_per_source=5,
    dim=16,
    seed=7,
)
dataset = generate(cfg)

print(f"{dataset.n_samples} samples, dim {dataset.dim}")
print(f"labelled: {dataset.labelled_indices().size}  "
      f"unlabelled: {dataset.unlabelled_indices().size}")
print(f"violations: {validate_dataset(dataset)}")

# every clip of a source shares the source's class
for source, idx in list(dataset.source_groups().items())[:3]:
    labels = {dataset.meta[i].label for i in idx}
    print(f"{source}: {idx.size} clips, class {labels}")

# what training is allowed to see: unlabelled truth is masked
view = dataset.training_view()
hidden = sum(1 for m in view.meta if m.label is None)
print(f"training view hides {hidden} labels")

# class structure is visible in raw feature distances
feats = dataset.features
truth = dataset.evaluation_labels()
same = [np.linalg.norm(feats[i] - feats[j])
        for i in range(0, 40, 7) for j in range(i + 1, 40, 11)
        if truth[i] == truth[j]]
diff = [np.linalg.norm(feats[i] - feats[j])
        for i in range(0, 40, 7) for j in range(i + 1, 40, 11)
        if truth[i] != truth[j]]
print(f"mean same-class distance {np.mean(same):.2f}, "
      f"mean cross-class distance {np.mean(diff):.2f}")
