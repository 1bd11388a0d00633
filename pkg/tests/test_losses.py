from __future__ import annotations

import numpy as np
import pytest

from modelps.errors import DimMismatch
from modelps.training import cross_entropy, kd_loss, kd_loss_and_grad, mmd, softmax


def test_kd_alpha_one_is_plain_cross_entropy():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = rng.normal(size=(8, 5))
        t = rng.normal(size=(8, 5))
        y = rng.integers(0, 5, size=8)
        ce, _ = cross_entropy(s, y)
        for temp in (0.5, 1.0, 4.0):
            assert abs(kd_loss(s, t, y, temp, 1.0) - ce) < 1e-9


def test_kd_kl_term_zero_when_teacher_equals_student():
    rng = np.random.default_rng(1)
    s = rng.normal(size=(6, 4))
    y = rng.integers(0, 4, size=6)
    ce, _ = cross_entropy(s, y)
    for temp in (0.5, 1.0, 2.0, 10.0):
        # alpha=0 leaves only the KL term
        assert abs(kd_loss(s, s.copy(), y, temp, 0.0)) < 1e-9
        assert abs(kd_loss(s, s.copy(), y, temp, 0.5) - 0.5 * ce) < 1e-9


def test_kd_matches_hand_computed_scalar():
    # student=[1,0], teacher=[0,1], label=0, T=1, alpha=0.5:
    # 0.5 * log(1+e^-1) + 0.5 * KL(softmax([0,1]) || softmax([1,0]))
    value = kd_loss(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), np.array([0]), 1.0, 0.5)
    assert abs(value - 0.3876894223891163) < 1e-12


def test_kd_loss_non_negative():
    rng = np.random.default_rng(2)
    for _ in range(50):
        s = rng.normal(size=(4, 3)) * 3
        t = rng.normal(size=(4, 3)) * 3
        y = rng.integers(0, 3, size=4)
        alpha = float(rng.random())
        temp = float(rng.uniform(0.2, 5.0))
        assert kd_loss(s, t, y, temp, alpha) >= 0.0


def test_kd_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    eps = 1e-6
    for _ in range(10):
        s = rng.normal(size=(5, 4))
        t = rng.normal(size=(5, 4))
        y = rng.integers(0, 4, size=5)
        temp = float(rng.uniform(0.5, 4.0))
        alpha = float(rng.random())
        _, grad = kd_loss_and_grad(s, t, y, temp, alpha)
        for i in range(s.shape[0]):
            for j in range(s.shape[1]):
                up = s.copy(); up[i, j] += eps
                down = s.copy(); down[i, j] -= eps
                fd = (kd_loss(up, t, y, temp, alpha) - kd_loss(down, t, y, temp, alpha)) / (2 * eps)
                assert abs(fd - grad[i, j]) < 1e-4 * max(1.0, abs(fd))


def test_cross_entropy_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    eps = 1e-6
    s = rng.normal(size=(6, 3))
    y = rng.integers(0, 3, size=6)
    _, grad = cross_entropy(s, y)
    for i in range(6):
        for j in range(3):
            up = s.copy(); up[i, j] += eps
            down = s.copy(); down[i, j] -= eps
            fd = (cross_entropy(up, y)[0] - cross_entropy(down, y)[0]) / (2 * eps)
            assert abs(fd - grad[i, j]) < 1e-6


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(5)
    z = rng.normal(size=(7, 9)) * 50
    p = softmax(z)
    assert np.allclose(p.sum(axis=-1), 1.0)
    assert np.all(p >= 0)


# --- mmd ---


def test_mmd_zero_on_identical_samples():
    rng = np.random.default_rng(6)
    a = rng.normal(size=(10, 4))
    assert mmd(a, a.copy(), "linear") < 1e-9
    assert mmd(a, a.copy(), "rbf", gamma=0.5) < 1e-9


def test_mmd_symmetry():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(8, 3))
    b = rng.normal(size=(12, 3)) + 1.0
    for kernel in ("linear", "rbf"):
        assert abs(mmd(a, b, kernel) - mmd(b, a, kernel)) < 1e-12


def test_mmd_linear_matches_mean_difference_expansion():
    a = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    b = np.array([[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]])
    # hand expansion: ||mean(a) - mean(b)||^2 = ||(1/3,1/3) - (4/3,4/3)||^2 = 2
    assert abs(mmd(a, b, "linear") - 2.0) < 1e-12


def test_mmd_non_negative():
    rng = np.random.default_rng(8)
    for _ in range(25):
        a = rng.normal(size=(rng.integers(2, 10), 5))
        b = rng.normal(size=(rng.integers(2, 10), 5)) + rng.normal()
        assert mmd(a, b, "linear") >= 0.0
        assert mmd(a, b, "rbf", gamma=float(rng.uniform(0.1, 2.0))) >= 0.0


def test_mmd_dim_mismatch():
    with pytest.raises(DimMismatch):
        mmd(np.zeros((3, 2)), np.zeros((3, 3)))
