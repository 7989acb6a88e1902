import numpy as np
import pytest

from gcdisc.core import DataError
from gcdisc.encoder import (
    BlockParams,
    EncoderParams,
    encoder_backward,
    encoder_forward,
    encoder_init,
    flatten_params,
    gradient_check,
    load_checkpoint,
    save_checkpoint,
    unflatten_params,
    zeros_like_params,
)


def quadratic_loss(z):
    return float((z * z).sum()), 2.0 * z


def test_init_deterministic_in_seed():
    a = encoder_init(4, 8, 1, seed=7)
    b = encoder_init(4, 8, 1, seed=7)
    assert np.array_equal(flatten_params(a), flatten_params(b))


def test_init_differs_across_seeds():
    a = encoder_init(4, 8, 1, seed=7)
    b = encoder_init(4, 8, 1, seed=8)
    assert not np.array_equal(flatten_params(a), flatten_params(b))


def test_init_weight_bounds():
    p = encoder_init(64, 256, 2, seed=123)
    for blk in p.blocks:
        assert np.abs(blk.w1).max() <= 1.0 / np.sqrt(64)
        assert np.abs(blk.w2).max() <= 1.0 / np.sqrt(256)
        assert np.array_equal(blk.b1, np.zeros(256))
        assert np.array_equal(blk.b2, np.zeros(64))


def test_init_rejects_zero_dims():
    with pytest.raises(ValueError):
        encoder_init(0, 8, 1, seed=0)
    with pytest.raises(ValueError):
        encoder_init(4, 0, 1, seed=0)


def test_zero_params_forward_is_identity():
    p = zeros_like_params(encoder_init(3, 5, 2, seed=0))
    h = np.random.default_rng(1).standard_normal((4, 3))
    assert np.array_equal(encoder_forward(p, h), h)


def test_forward_matches_hand_computation():
    # one block, 2x2 weights, input (1, 0)
    w1 = np.array([[0.5, -1.0], [2.0, 0.0]])
    b1 = np.array([0.1, -0.2])
    w2 = np.array([[1.0, 0.5], [-0.5, 1.0]])
    b2 = np.array([0.0, 0.3])
    p = EncoderParams(2, 2, [BlockParams(w1, b1, w2, b2)])
    x = np.array([1.0, 0.0])
    act = np.tanh(w1 @ x + b1)
    expected = x + w2 @ act + b2
    got = encoder_forward(p, x[None, :])[0]
    assert got == pytest.approx(expected.tolist(), abs=1e-15)


def test_rows_are_independent():
    p = encoder_init(4, 6, 2, seed=5)
    h = np.random.default_rng(2).standard_normal((3, 4))
    full = encoder_forward(p, h)
    rows = np.vstack([encoder_forward(p, h[i : i + 1]) for i in range(3)])
    # matmul blocking differs between batch sizes, so equality is to rounding
    assert full == pytest.approx(rows, abs=1e-12)


def test_forward_dim_mismatch():
    p = encoder_init(4, 6, 1, seed=0)
    with pytest.raises(DataError):
        encoder_forward(p, np.zeros((2, 3)))


def test_backward_zero_grad_gives_zero():
    p = encoder_init(3, 4, 2, seed=1)
    h = np.random.default_rng(3).standard_normal((5, 3))
    grads = encoder_backward(p, h, np.zeros((5, 3)))
    assert np.array_equal(flatten_params(grads), np.zeros(p.n_parameters))


def test_backward_shape_mismatch():
    p = encoder_init(3, 4, 1, seed=1)
    with pytest.raises(ValueError):
        encoder_backward(p, np.zeros((5, 3)), np.zeros((4, 3)))


@pytest.mark.parametrize("n_blocks", [1, 2])
def test_backward_matches_finite_differences(n_blocks):
    p = encoder_init(3, 4, n_blocks, seed=21)
    h = np.random.default_rng(22).standard_normal((5, 3))
    assert gradient_check(p, h, quadratic_loss) < 1e-6


def test_gradient_check_on_contrastive_objective():
    from gcdisc.datagen import SynthConfig, generate
    from gcdisc.objective import (
        build_supervised_pairs,
        build_unsupervised_pairs,
        combined_loss,
    )
    from gcdisc.simgeom import similarity_matrix

    d = generate(
        SynthConfig(
            n_old_classes=2,
            n_new_classes=2,
            sources_per_class=1,
            clips_per_source=5,
            dim=4,
            class_spread=2.0,
            seed=5,
        )
    ).training_view()
    p = encoder_init(4, 4, 2, seed=6)
    z0 = encoder_forward(p, d.features)
    s = similarity_matrix(z0)
    sup = build_supervised_pairs(d, s, 5)
    unsup = build_unsupervised_pairs(d, s, 2, 5, np.random.default_rng(8))

    def loss_fn(z):
        r = combined_loss(z, sup, unsup, 0.3, 0.5)
        return r.value, r.grad

    assert gradient_check(p, d.features, loss_fn) < 1e-6


def test_zero_parameter_encoder_constant_loss():
    p = encoder_init(4, 4, 0, seed=0)
    h = np.random.default_rng(4).standard_normal((3, 4))
    err = gradient_check(p, h, lambda z: (1.0, np.zeros_like(z)))
    assert err == 0.0


def test_flatten_unflatten_roundtrip():
    p = encoder_init(3, 5, 2, seed=9)
    flat = flatten_params(p)
    q = unflatten_params(flat, p)
    assert np.array_equal(flatten_params(q), flat)
    for bp, bq in zip(p.blocks, q.blocks):
        assert np.array_equal(bp.w1, bq.w1)
        assert np.array_equal(bp.b2, bq.b2)


def test_checkpoint_roundtrip(tmp_path):
    p = encoder_init(6, 9, 2, seed=13)
    path = tmp_path / "enc.ckpt"
    save_checkpoint(p, path)
    q = load_checkpoint(path)
    assert q.input_dim == 6 and q.hidden_dim == 9 and q.n_blocks == 2
    assert np.array_equal(flatten_params(p), flatten_params(q))


def test_checkpoint_rejects_bad_magic(tmp_path):
    path = tmp_path / "enc.ckpt"
    p = encoder_init(2, 2, 1, seed=0)
    save_checkpoint(p, path)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(DataError, match="magic"):
        load_checkpoint(path)


def test_checkpoint_rejects_truncated_payload(tmp_path):
    path = tmp_path / "enc.ckpt"
    save_checkpoint(encoder_init(2, 2, 1, seed=0), path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(DataError, match="payload"):
        load_checkpoint(path)
