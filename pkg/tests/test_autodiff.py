from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from conftest import max_relative_error, numeric_gradient

from deeppoint.autodiff import (
    ParamStore,
    Tape,
    Tensor,
    adam_step,
    backward,
    broadcast_rows,
    concat_cols,
    external_loss,
    matmul,
    max_pool_points,
    mean_pool_points,
    read_checkpoint,
    shared_mlp,
    square,
    sum_all,
    write_checkpoint,
)
from deeppoint.errors import ConfigMismatch, NumericalError, ParseError, ShapeError
from deeppoint.geometry import Rng


def _check_gradient(fn: Callable[[Tensor], Tensor], x: np.ndarray, tolerance: float = 1e-6) -> None:
    tape = Tape()
    analytic = backward(fn(tape.leaf(x, "x")))["x"]

    def value(perturbed: np.ndarray) -> float:
        return fn(Tape(record=False).constant(perturbed)).item()

    assert max_relative_error(analytic, numeric_gradient(value, x)) < tolerance


def _layer(rng: Rng, d_in: int, d_out: int) -> tuple[np.ndarray, np.ndarray]:
    return rng.normal(0.5, size=(d_in, d_out)), rng.normal(0.1, size=(1, d_out))


def test_shared_mlp_identity_layer_is_passthrough() -> None:
    x = Tensor(np.arange(6.0).reshape(2, 3))
    out = shared_mlp(x, [(Tensor(np.eye(3)), Tensor(np.zeros((1, 3))))], activation="linear")
    assert np.array_equal(out.values, x.values)


def test_shared_mlp_is_row_equivariant() -> None:
    rng = Rng(0)
    x = rng.normal(1.0, size=(5, 3))
    w, b = _layer(rng, 3, 4)
    layers = [(Tensor(w), Tensor(b))]
    perm = np.array([3, 0, 4, 1, 2])
    direct = shared_mlp(Tensor(x), layers).values
    permuted = shared_mlp(Tensor(x[perm]), layers).values
    assert np.allclose(direct[perm], permuted)


def test_shared_mlp_gradient_matches_finite_differences() -> None:
    rng = Rng(1)
    x = rng.normal(1.0, size=(5, 3))
    w, b = _layer(rng, 3, 4)

    def through_input(t: Tensor) -> Tensor:
        tape = t.tape
        assert tape is not None
        return sum_all(square(shared_mlp(t, [(tape.constant(w), tape.constant(b))])))

    def through_weight(t: Tensor) -> Tensor:
        tape = t.tape
        assert tape is not None
        return sum_all(square(shared_mlp(tape.constant(x), [(t, tape.constant(b))])))

    _check_gradient(through_input, x)
    _check_gradient(through_weight, w)


def test_shared_mlp_shape_mismatch() -> None:
    with pytest.raises(ShapeError):
        shared_mlp(Tensor(np.zeros((2, 3))), [(Tensor(np.zeros((4, 2))), Tensor(np.zeros((1, 2))))])


def test_max_pool_values_and_ties() -> None:
    assert max_pool_points(Tensor(np.array([[1.0, 5.0], [3.0, 2.0]]))).values.tolist() == [[3.0, 5.0]]
    tape = Tape()
    x = tape.leaf(np.array([[2.0], [2.0]]), "x")
    grads = backward(sum_all(max_pool_points(x)))
    assert grads["x"].tolist() == [[1.0], [0.0]]


def test_pooling_is_permutation_invariant() -> None:
    f = Rng(2).normal(1.0, size=(6, 4))
    perm = Rng(3).permutation(6)
    assert np.array_equal(max_pool_points(Tensor(f)).values, max_pool_points(Tensor(f[perm])).values)
    assert np.allclose(mean_pool_points(Tensor(f)).values, mean_pool_points(Tensor(f[perm])).values)


def test_mean_pool_values() -> None:
    assert mean_pool_points(Tensor(np.array([[1.0, 5.0], [3.0, 1.0]]))).values.tolist() == [[2.0, 3.0]]
    assert mean_pool_points(Tensor(np.full((4, 2), 7.0))).values.tolist() == [[7.0, 7.0]]


def test_pooling_gradients_match_finite_differences() -> None:
    f = Rng(4).normal(1.0, size=(5, 3))
    _check_gradient(lambda t: sum_all(square(max_pool_points(t))), f)
    _check_gradient(lambda t: sum_all(square(mean_pool_points(t))), f)


def test_concat_cols() -> None:
    b = Tensor(np.array([[1.0], [2.0]]))
    assert np.array_equal(concat_cols(Tensor(np.zeros((2, 0))), b).values, b.values)
    assert concat_cols(Tensor(np.array([[1.0]])), Tensor(np.array([[2.0]]))).values.tolist() == [[1.0, 2.0]]
    with pytest.raises(ShapeError):
        concat_cols(Tensor(np.zeros((2, 1))), Tensor(np.zeros((3, 1))))


def test_concat_gradient_splits_between_inputs() -> None:
    rng = Rng(5)
    a, b = rng.normal(1.0, size=(3, 2)), rng.normal(1.0, size=(3, 4))
    tape = Tape()
    grads = backward(sum_all(square(concat_cols(tape.leaf(a, "a"), tape.leaf(b, "b")))))
    assert np.allclose(grads["a"], 2.0 * a)
    assert np.allclose(grads["b"], 2.0 * b)


def test_broadcast_rows() -> None:
    g = Tensor(np.array([[1.0, 2.0]]))
    assert broadcast_rows(g, 2).values.tolist() == [[1.0, 2.0], [1.0, 2.0]]
    assert np.array_equal(broadcast_rows(g, 1).values, g.values)
    tape = Tape()
    grads = backward(sum_all(broadcast_rows(tape.leaf(g.values, "g"), 5)))
    assert grads["g"].tolist() == [[5.0, 5.0]]


def test_backward_linear_loss_and_unused_leaf() -> None:
    x = np.array([[1.0, 2.0, 3.0]])
    tape = Tape()
    weight = tape.leaf(np.ones((3, 2)), "weight")
    tape.leaf(np.ones((2, 2)), "unused")
    grads = backward(sum_all(matmul(tape.constant(x), weight)))
    assert np.array_equal(grads["weight"], np.repeat(x.T, 2, axis=1))
    assert np.array_equal(grads["unused"], np.zeros((2, 2)))
    assert tape.nodes == []


def test_backward_reads_constant_matmul_operands() -> None:
    tape = Tape()
    w = tape.leaf(np.ones((2, 1)), "w")
    grads = backward(sum_all(matmul(tape.constant(np.array([[1.0, 2.0], [3.0, 4.0]])), w)))
    assert grads["w"].tolist() == [[4.0], [6.0]]

    tape = Tape()
    x = tape.leaf(np.array([[1.0, 2.0]]), "x")
    grads = backward(sum_all(matmul(x, tape.constant(np.array([[1.0, 0.0], [2.0, 5.0]])))))
    assert grads["x"].tolist() == [[1.0, 7.0]]


def test_replaying_a_forward_pass_gives_identical_gradients() -> None:
    rng = Rng(3)
    x = rng.normal(size=(16, 3))
    w, b = _layer(rng, 3, 8)

    def run() -> dict[str, np.ndarray]:
        tape = Tape()
        layers = [(tape.leaf(w, "w"), tape.leaf(b, "b"))]
        pooled = max_pool_points(shared_mlp(tape.constant(x), layers))
        return backward(sum_all(square(pooled)))

    first, second = run(), run()
    assert first.keys() == second.keys()
    for name in first:
        assert np.array_equal(first[name], second[name])


def test_backward_rejects_non_scalar_and_stale_loss() -> None:
    tape = Tape()
    x = tape.leaf(np.ones((2, 2)), "x")
    with pytest.raises(ShapeError):
        backward(square(x))
    loss = sum_all(x)
    backward(loss)
    with pytest.raises(ShapeError):
        backward(loss)


def test_non_finite_forward_reports_op() -> None:
    tape = Tape()
    x = tape.leaf(np.array([[1e200]]), "x")
    with pytest.raises(NumericalError) as info:
        square(x)
    assert info.value.op_id == 0


def test_external_loss_routes_supplied_gradient() -> None:
    tape = Tape()
    pred = tape.leaf(np.zeros((2, 3)), "pred")
    supplied = np.arange(6.0).reshape(2, 3)
    loss = external_loss(pred, 4.5, supplied)
    assert loss.item() == 4.5
    assert np.array_equal(backward(loss)["pred"], supplied)


def _store() -> ParamStore:
    store = ParamStore("net")
    store.add("net/w", np.array([[1.0, -2.0], [0.5, 3.0]]))
    store.add("net/b", np.zeros((1, 2)))
    return store


def test_adam_zero_gradient_and_zero_lr_leave_values() -> None:
    store = _store()
    before = store.fingerprint()
    adam_step(store, 1e-3)
    assert store.fingerprint() == before
    store.accumulate({"net/w": np.ones((2, 2))})
    adam_step(store, 0.0)
    assert store.fingerprint() == before


def test_adam_first_step_moves_by_learning_rate() -> None:
    store = _store()
    start = store["net/w"].value.copy()
    grad = np.array([[0.3, -2.0], [5.0, -0.01]])
    store.accumulate({"net/w": grad})
    adam_step(store, 1e-3)
    assert np.allclose(store["net/w"].value - start, -1e-3 * np.sign(grad), rtol=1e-4)
    assert np.array_equal(store["net/w"].grad, np.zeros((2, 2)))


def test_param_store_rejects_duplicates_and_mismatched_loads() -> None:
    store = _store()
    with pytest.raises(ConfigMismatch):
        store.add("net/w", np.zeros((2, 2)))
    with pytest.raises(ConfigMismatch):
        store.load_values({"net/w": np.zeros((2, 2))})
    with pytest.raises(ConfigMismatch):
        store.load_values({"net/w": np.zeros((3, 2)), "net/b": np.zeros((1, 2))})


def test_clip_grad_norm() -> None:
    store = _store()
    store.accumulate({"net/w": np.full((2, 2), 3.0)})
    assert store.clip_grad_norm(1.0) == pytest.approx(6.0)
    assert store.grad_norm() == pytest.approx(1.0)


def test_checkpoint_keeps_values_and_moments(tmp_path: Path) -> None:
    store = _store()
    store.accumulate({"net/w": np.ones((2, 2))})
    adam_step(store, 1e-2)
    path = write_checkpoint(tmp_path / "ckpt" / "a.dpck", [store])
    loaded = read_checkpoint(path)

    fresh = _store()
    loaded.restore(fresh, with_moments=True)
    assert fresh.fingerprint() == store.fingerprint()
    assert fresh.step == 1
    assert np.array_equal(fresh["net/w"].m, store["net/w"].m)


def test_checkpoint_rejects_truncation(tmp_path: Path) -> None:
    path = write_checkpoint(tmp_path / "a.dpck", [_store()])
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(ParseError):
        read_checkpoint(path)
