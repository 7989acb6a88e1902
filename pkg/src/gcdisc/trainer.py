"""Training loop: embed, mine pairs, combine losses, update the encoder.

One epoch is one full-batch step. Pair sets are rebuilt each epoch from the
epoch-start embeddings; unsupervised positives are resampled with an RNG
stream derived from (seed, epoch), so the whole run is a pure function of
(dataset, config, initial parameters).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, TextIO

import numpy as np

from .core import Dataset, NumericError, TrainConfig, validate_dataset
from .encoder import (
    EncoderParams,
    copy_params,
    encoder_backward,
    encoder_forward,
    flatten_params,
    unflatten_params,
)
from .objective import build_supervised_pairs, build_unsupervised_pairs, combined_loss
from .simgeom import similarity_matrix

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class EpochLoss(NamedTuple):
    epoch: int
    supervised: float
    unsupervised: float
    combined: float


@dataclass
class TrainState:
    params: EncoderParams
    adam_m: np.ndarray  # first moment, flat, congruent with flatten_params(params)
    adam_v: np.ndarray  # second moment
    epoch: int
    history: list[EpochLoss] = field(default_factory=list)
    seed: int = 0

    @property
    def loss_history(self) -> list[float]:
        return [h.combined for h in self.history]


def train(
    d: Dataset,
    cfg: TrainConfig,
    init: EncoderParams,
    log: TextIO | None = None,
) -> tuple[TrainState, np.ndarray]:
    """Run the full epoch loop; returns final state and final embeddings.

    Training sees the dataset only through a truth-stripped view, so hidden
    labels of unlabelled samples cannot influence the result.
    """
    problems = validate_dataset(d)
    if problems:
        raise ValueError("invalid dataset: " + "; ".join(problems))
    view = d.training_view()
    if view.labelled_indices().size == 0 or view.unlabelled_indices().size == 0:
        raise ValueError("training needs both labelled and unlabelled samples")

    state = TrainState(
        params=copy_params(init),
        adam_m=np.zeros(init.n_parameters),
        adam_v=np.zeros(init.n_parameters),
        epoch=0,
        seed=cfg.seed,
    )
    h = view.features

    for epoch in range(cfg.epochs):
        z = encoder_forward(state.params, h)
        if not np.isfinite(z).all():
            raise NumericError(f"non-finite embeddings at epoch {epoch}")
        s = similarity_matrix(z)

        sup_pairs = build_supervised_pairs(view, s, cfg.n_neg)
        rng = np.random.default_rng([cfg.seed, epoch])
        unsup_pairs = build_unsupervised_pairs(
            view, s, cfg.n_pos_unsup, cfg.n_neg, rng
        )

        loss = combined_loss(
            z, sup_pairs, unsup_pairs, cfg.tau, cfg.lam, cfg.loss_reduction
        )
        if not np.isfinite(loss.value) or not np.isfinite(loss.grad).all():
            raise NumericError(f"non-finite loss or gradient at epoch {epoch}")

        grads = encoder_backward(state.params, h, loss.grad)
        g = flatten_params(grads)
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite parameter gradient at epoch {epoch}")

        t = epoch + 1
        state.adam_m = ADAM_BETA1 * state.adam_m + (1.0 - ADAM_BETA1) * g
        state.adam_v = ADAM_BETA2 * state.adam_v + (1.0 - ADAM_BETA2) * g * g
        m_hat = state.adam_m / (1.0 - ADAM_BETA1**t)
        v_hat = state.adam_v / (1.0 - ADAM_BETA2**t)
        theta = flatten_params(state.params)
        theta -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        if not np.isfinite(theta).all():
            raise NumericError(f"non-finite parameters after epoch {epoch}")
        state.params = unflatten_params(theta, state.params)

        record = EpochLoss(epoch, loss.supervised, loss.unsupervised, loss.value)
        state.history.append(record)
        state.epoch = t
        if log is not None:
            log.write(
                f"epoch {record.epoch}\tL_scl {record.supervised:.10g}\t"
                f"L_u {record.unsupervised:.10g}\tL_cl {record.combined:.10g}\n"
            )

    return state, encoder_forward(state.params, h)


def embed_all(state: TrainState, d: Dataset) -> np.ndarray:
    """Current-parameter embeddings of every sample; pure and row-separable."""
    return encoder_forward(state.params, d.features)
