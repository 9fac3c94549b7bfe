import numpy as np
import pytest

from pcrnn import corpus, network
from pcrnn.network import (
    ActivationState,
    Dimensions,
    apply_update,
    assemble_input,
    cross_entropy,
    forward,
    init_params,
    step_gradient,
    zero_state,
)

SMALL = Dimensions(vocab=5, hidden=7)


def random_state(dims, rng):
    return ActivationState(hidden=rng.uniform(0.1, 0.9, dims.hidden),
                           output=rng.dirichlet(np.ones(dims.vocab)))


def test_dimensions_input_total():
    assert Dimensions(vocab=42, hidden=256).input_total == 340
    assert SMALL.input_total == 17


def test_init_deterministic_and_in_range():
    a = init_params(SMALL, 0)
    b = init_params(SMALL, 0)
    for x, y in zip(a.arrays(), b.arrays()):
        assert np.array_equal(x, y)
    c = init_params(SMALL, 1)
    assert any(not np.array_equal(x, y) for x, y in zip(a.arrays(), c.arrays()))
    assert np.abs(a.w_ih).max() <= 0.1 and np.abs(a.w_ho).max() <= 0.1
    assert not a.b_h.any() and not a.b_o.any()


def test_assemble_input_order():
    dims = Dimensions(vocab=42, hidden=256)
    x = assemble_input(corpus.one_hot(0, 42), zero_state(dims))
    assert x.shape == (340,)
    assert x[0] == 1 and x.sum() == 1
    prev = ActivationState(hidden=np.full(256, 0.5), output=np.zeros(42))
    x = assemble_input(corpus.one_hot(3, 42), prev)
    assert np.all(x[42:298] == 0.5)
    assert np.all(assemble_input(np.zeros(42), zero_state(dims)) == 0)


def test_forward_zero_params():
    params = network.NetworkParams(
        w_ih=np.zeros((7, 17)), b_h=np.zeros(7),
        w_ho=np.zeros((5, 7)), b_o=np.zeros(5))
    out = forward(params, corpus.one_hot(0, 5), zero_state(SMALL))
    assert np.allclose(out.hidden, 0.5)
    assert np.allclose(out.output, 0.2)


def test_forward_simplex_and_pure():
    rng = np.random.default_rng(3)
    params = init_params(SMALL, 3)
    prev = random_state(SMALL, rng)
    a = forward(params, corpus.one_hot(2, 5), prev)
    b = forward(params, corpus.one_hot(2, 5), prev)
    assert abs(a.output.sum() - 1.0) < 1e-12
    assert (a.output >= 0).all()
    assert np.array_equal(a.hidden, b.hidden)
    assert np.array_equal(a.output, b.output)


def test_cross_entropy_values():
    assert cross_entropy(corpus.one_hot(2, 5), 2) == 0.0
    assert cross_entropy(np.full(42, 1 / 42), 7) == pytest.approx(np.log(42))
    assert cross_entropy(np.array([0.5, 0.25, 0.25]), 0) == pytest.approx(np.log(2))
    # clamp keeps the loss finite even for a zero probability
    assert np.isfinite(cross_entropy(np.array([0.0, 1.0]), 0))


def test_output_gradient_is_softmax_ce_identity():
    rng = np.random.default_rng(5)
    params = init_params(SMALL, 5)
    prev = random_state(SMALL, rng)
    char = corpus.one_hot(1, 5)
    target = 3
    grads, _, nxt = step_gradient(params, char, prev, target)
    dlogits = nxt.output - corpus.one_hot(target, 5)
    assert np.allclose(grads.w_ho, np.outer(dlogits, nxt.hidden), atol=1e-14)
    assert np.allclose(grads.b_o, dlogits, atol=1e-14)


def finite_difference_grads(params, char, prev, target, eps=1e-5):
    """Central differences on every parameter entry; the independent oracle."""
    out = []
    for arr in params.arrays():
        g = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = g.ravel()
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            lp = cross_entropy(forward(params, char, prev).output, target)
            flat[k] = orig - eps
            lm = cross_entropy(forward(params, char, prev).output, target)
            flat[k] = orig
            gflat[k] = (lp - lm) / (2 * eps)
        out.append(g)
    return network.Gradients(*out)


def max_relative_error(analytic, numeric, floor=1e-7):
    worst = 0.0
    for a, n in zip(analytic.arrays(), numeric.arrays()):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    params = init_params(SMALL, 11)
    prev = random_state(SMALL, rng)
    char = corpus.one_hot(4, 5)
    grads, loss, nxt = step_gradient(params, char, prev, 0)
    numeric = finite_difference_grads(params, char, prev, 0)
    assert max_relative_error(grads, numeric) < 1e-4
    assert loss == cross_entropy(nxt.output, 0)


def test_descent_property():
    rng = np.random.default_rng(13)
    params = init_params(SMALL, 13)
    prev = random_state(SMALL, rng)
    char = corpus.one_hot(2, 5)
    grads, loss, _ = step_gradient(params, char, prev, 1)
    updated = apply_update(params, grads, 1e-2)
    new_loss = cross_entropy(forward(updated, char, prev).output, 1)
    assert new_loss < loss


def test_apply_update_examples():
    params = init_params(SMALL, 0)
    same = apply_update(params, network.Gradients(*(np.ones_like(a) for a in params.arrays())), 0.0)
    for x, y in zip(params.arrays(), same.arrays()):
        assert np.array_equal(x, y)
    zeroed = apply_update(params, network.Gradients(*(a.copy() for a in params.arrays())), 1.0)
    for a in zeroed.arrays():
        assert not a.any()
    grads = network.Gradients(*(np.full_like(a, 0.25) for a in params.arrays()))
    back = apply_update(apply_update(params, grads, 0.3), grads.scale(-1.0), 0.3)
    for x, y in zip(params.arrays(), back.arrays()):
        assert np.allclose(x, y, atol=1e-12)


def test_zero_state():
    dims = Dimensions(vocab=42, hidden=256)
    state = zero_state(dims)
    assert state.hidden.shape == (256,) and not state.hidden.any()
    assert state.output.shape == (42,) and not state.output.any()
    out = forward(init_params(dims, 0), corpus.one_hot(0, 42), state)
    assert np.isfinite(out.output).all()


def test_checkpoint_round_trip(tmp_path):
    params = init_params(SMALL, 42)
    params.b_h += 0.123456789012345
    path = tmp_path / "net.ckpt"
    network.save_checkpoint(params, path)
    loaded = network.load_checkpoint(path)
    for x, y in zip(params.arrays(), loaded.arrays()):
        assert np.array_equal(x, y)
    assert open(path).readline() == "PCRNN 1\n"


def test_checkpoint_corruption_detected(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_text("PCRNN 1\n5 7\n1.0 2.0\n")
    with pytest.raises(ValueError, match="expected"):
        network.load_checkpoint(path)
    path.write_text("nonsense\n")
    with pytest.raises(ValueError, match="magic"):
        network.load_checkpoint(path)
