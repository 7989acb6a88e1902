"""Trainable residual encoder mapping fixed feature vectors to refined embeddings.

Each block computes ``x + w2 @ tanh(w1 @ x + b1) + b2`` row-wise, so block
input and output widths both equal the feature dimension and an all-zero
parameter set is the identity map. The forward pass has no cross-sample
interaction and no normalization; cosine similarity downstream handles norms.

Backward passes are exact analytic gradients, verified against central
finite differences by :func:`gradient_check`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataError, ensure_features

CHECKPOINT_MAGIC = b"GCDE-CKPT"
CHECKPOINT_VERSION = 1


@dataclass
class BlockParams:
    w1: np.ndarray  # (hidden_dim, input_dim)
    b1: np.ndarray  # (hidden_dim,)
    w2: np.ndarray  # (input_dim, hidden_dim)
    b2: np.ndarray  # (input_dim,)


@dataclass
class EncoderParams:
    """Weights of the encoder; also reused as the gradient container."""

    input_dim: int
    hidden_dim: int
    blocks: list[BlockParams]

    def __post_init__(self):
        if self.input_dim < 1 or self.hidden_dim < 1:
            raise ValueError("encoder dimensions must be >= 1")
        for k, blk in enumerate(self.blocks):
            expect = {
                "w1": (self.hidden_dim, self.input_dim),
                "b1": (self.hidden_dim,),
                "w2": (self.input_dim, self.hidden_dim),
                "b2": (self.input_dim,),
            }
            for name, shape in expect.items():
                arr = np.asarray(getattr(blk, name), dtype=np.float64)
                if arr.shape != shape:
                    raise ValueError(
                        f"block {k}: {name} has shape {arr.shape}, expected {shape}"
                    )
                if not np.isfinite(arr).all():
                    raise ValueError(f"block {k}: non-finite values in {name}")
                setattr(blk, name, arr)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_parameters(self) -> int:
        return sum(
            b.w1.size + b.b1.size + b.w2.size + b.b2.size for b in self.blocks
        )


# Gradients are shape-congruent with the parameters, so they share the container.
EncoderGradients = EncoderParams


def encoder_init(input_dim: int, hidden_dim: int, n_blocks: int, seed: int) -> EncoderParams:
    """Fresh parameters: uniform weights scaled by 1/sqrt(fan-in), zero biases."""
    if input_dim < 1 or hidden_dim < 1:
        raise ValueError("encoder dimensions must be >= 1")
    if n_blocks < 0:
        raise ValueError("n_blocks must be >= 0")
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(n_blocks):
        bound1 = 1.0 / np.sqrt(input_dim)
        bound2 = 1.0 / np.sqrt(hidden_dim)
        blocks.append(
            BlockParams(
                w1=rng.uniform(-bound1, bound1, size=(hidden_dim, input_dim)),
                b1=np.zeros(hidden_dim),
                w2=rng.uniform(-bound2, bound2, size=(input_dim, hidden_dim)),
                b2=np.zeros(input_dim),
            )
        )
    return EncoderParams(input_dim=input_dim, hidden_dim=hidden_dim, blocks=blocks)


def zeros_like_params(p: EncoderParams) -> EncoderParams:
    return EncoderParams(
        input_dim=p.input_dim,
        hidden_dim=p.hidden_dim,
        blocks=[
            BlockParams(
                w1=np.zeros_like(b.w1),
                b1=np.zeros_like(b.b1),
                w2=np.zeros_like(b.w2),
                b2=np.zeros_like(b.b2),
            )
            for b in p.blocks
        ],
    )


def copy_params(p: EncoderParams) -> EncoderParams:
    return EncoderParams(
        input_dim=p.input_dim,
        hidden_dim=p.hidden_dim,
        blocks=[
            BlockParams(b.w1.copy(), b.b1.copy(), b.w2.copy(), b.b2.copy())
            for b in p.blocks
        ],
    )


def flatten_params(p: EncoderParams) -> np.ndarray:
    """Parameters as one vector, in declaration order (w1, b1, w2, b2 per block)."""
    if not p.blocks:
        return np.empty(0)
    return np.concatenate(
        [np.concatenate([b.w1.ravel(), b.b1, b.w2.ravel(), b.b2]) for b in p.blocks]
    )


def unflatten_params(flat: np.ndarray, template: EncoderParams) -> EncoderParams:
    flat = np.asarray(flat, dtype=np.float64)
    if flat.size != template.n_parameters:
        raise ValueError(
            f"expected {template.n_parameters} parameters, got {flat.size}"
        )
    blocks = []
    pos = 0
    for b in template.blocks:
        parts = []
        for arr in (b.w1, b.b1, b.w2, b.b2):
            parts.append(flat[pos : pos + arr.size].reshape(arr.shape).copy())
            pos += arr.size
        blocks.append(BlockParams(*parts))
    return EncoderParams(template.input_dim, template.hidden_dim, blocks)


def _forward_with_cache(p: EncoderParams, h: np.ndarray):
    x = h
    cache = []
    for b in p.blocks:
        act = np.tanh(x @ b.w1.T + b.b1)
        cache.append((x, act))
        x = x + act @ b.w2.T + b.b2
    return x, cache


def encoder_forward(p: EncoderParams, h) -> np.ndarray:
    """Apply all residual blocks row-wise; output has the input's shape."""
    h = ensure_features(h)
    if h.shape[1] != p.input_dim:
        raise DataError(
            f"feature dimension {h.shape[1]} does not match encoder input_dim {p.input_dim}"
        )
    z, _ = _forward_with_cache(p, h)
    return z


def encoder_backward(p: EncoderParams, h, grad_z) -> EncoderParams:
    """Gradient of <grad_z, encoder_forward(p, h)> w.r.t. every parameter."""
    h = ensure_features(h)
    grad_z = np.asarray(grad_z, dtype=np.float64)
    _, cache = _forward_with_cache(p, h)
    if grad_z.shape != (h.shape[0], p.input_dim):
        raise ValueError(
            f"grad_z shape {grad_z.shape} does not match output shape "
            f"{(h.shape[0], p.input_dim)}"
        )

    grads = zeros_like_params(p)
    g = grad_z
    for b, gb, (x, act) in zip(
        reversed(p.blocks), reversed(grads.blocks), reversed(cache)
    ):
        gb.w2[:] = g.T @ act
        gb.b2[:] = g.sum(axis=0)
        d_act = g @ b.w2
        d_pre = d_act * (1.0 - act * act)  # tanh'
        gb.w1[:] = d_pre.T @ x
        gb.b1[:] = d_pre.sum(axis=0)
        g = g + d_pre @ b.w1  # residual path plus MLP path
    return grads


def gradient_check(p: EncoderParams, h, loss_fn, step: float = 1e-5) -> float:
    """Worst-case relative disagreement of analytic vs numeric parameter gradients.

    ``loss_fn(z) -> (value, grad_z)`` must supply the analytic gradient of a
    scalar loss w.r.t. the encoder output. The analytic route chains it
    through :func:`encoder_backward`; the numeric route applies central
    differences to each parameter. Relative error uses a unit floor so that
    near-zero gradients are compared absolutely.
    """
    h = ensure_features(h)
    z = encoder_forward(p, h)
    _, grad_z = loss_fn(z)
    analytic = flatten_params(encoder_backward(p, h, grad_z))

    theta = flatten_params(p)
    numeric = np.zeros_like(theta)
    for i in range(theta.size):
        bumped = theta.copy()
        bumped[i] = theta[i] + step
        up, _ = loss_fn(encoder_forward(unflatten_params(bumped, p), h))
        bumped[i] = theta[i] - step
        down, _ = loss_fn(encoder_forward(unflatten_params(bumped, p), h))
        numeric[i] = (up - down) / (2.0 * step)

    if theta.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return float(np.max(np.abs(analytic - numeric) / denom))


def save_checkpoint(p: EncoderParams, path) -> None:
    """Write parameters: magic, version, dims, then float64 LE payload."""
    header = CHECKPOINT_MAGIC + struct.pack(
        "<IQQQ", CHECKPOINT_VERSION, p.input_dim, p.hidden_dim, p.n_blocks
    )
    payload = flatten_params(p).astype("<f8").tobytes()
    Path(path).write_bytes(header + payload)


def load_checkpoint(path) -> EncoderParams:
    raw = Path(path).read_bytes()
    if len(raw) < len(CHECKPOINT_MAGIC) + struct.calcsize("<IQQQ"):
        raise DataError(f"{path}: truncated checkpoint header")
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise DataError(f"{path}: bad checkpoint magic")
    off = len(CHECKPOINT_MAGIC)
    version, input_dim, hidden_dim, n_blocks = struct.unpack_from("<IQQQ", raw, off)
    if version != CHECKPOINT_VERSION:
        raise DataError(
            f"{path}: unsupported checkpoint version {version} "
            f"(expected {CHECKPOINT_VERSION})"
        )
    off += struct.calcsize("<IQQQ")
    template = EncoderParams(
        input_dim=int(input_dim),
        hidden_dim=int(hidden_dim),
        blocks=[
            BlockParams(
                w1=np.zeros((int(hidden_dim), int(input_dim))),
                b1=np.zeros(int(hidden_dim)),
                w2=np.zeros((int(input_dim), int(hidden_dim))),
                b2=np.zeros(int(input_dim)),
            )
            for _ in range(int(n_blocks))
        ],
    )
    expected = template.n_parameters * 8
    if len(raw) - off != expected:
        raise DataError(
            f"{path}: payload is {len(raw) - off} bytes, expected {expected}"
        )
    flat = np.frombuffer(raw, dtype="<f8", offset=off).astype(np.float64)
    return unflatten_params(flat, template)
