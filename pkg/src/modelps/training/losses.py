"""Classification losses and the distribution-distance penalty.

All gradients here are analytic; the test suite checks them against central
finite differences. Math runs in the dtype of the inputs so float64 checks
stay precise while training proceeds in float32.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimMismatch


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(z))


def _normalized_weights(n: int, sample_weights, dtype) -> np.ndarray:
    if sample_weights is None:
        return np.full(n, 1.0 / n, dtype=dtype)
    w = np.asarray(sample_weights, dtype=dtype)
    total = w.sum()
    if total <= 0:
        return np.full(n, 1.0 / n, dtype=dtype)
    return w / total


def cross_entropy(logits: np.ndarray, labels: np.ndarray, sample_weights=None):
    """Weighted mean cross-entropy from raw logits: (loss, d loss / d logits)."""
    n = logits.shape[0]
    w = _normalized_weights(n, sample_weights, logits.dtype)
    logp = log_softmax(logits)
    loss = -np.sum(w * logp[np.arange(n), labels])
    grad = softmax(logits)
    grad[np.arange(n), labels] -= 1.0
    grad *= w[:, None]
    return float(loss), grad


def kd_loss(
    student_logits: np.ndarray,
    teacher_logits: np.ndarray,
    labels: np.ndarray,
    temperature: float,
    alpha: float,
) -> float:
    """Distillation objective:
    alpha * CE(student, labels) + (1 - alpha) * T^2 * KL(soft_teacher || soft_student)."""
    loss, _ = kd_loss_and_grad(student_logits, teacher_logits, labels, temperature, alpha)
    return loss


def kd_loss_and_grad(
    student_logits: np.ndarray,
    teacher_logits: np.ndarray,
    labels: np.ndarray,
    temperature: float,
    alpha: float,
    sample_weights=None,
):
    n = student_logits.shape[0]
    t = float(temperature)
    w = _normalized_weights(n, sample_weights, student_logits.dtype)

    ce, ce_grad = cross_entropy(student_logits, labels, sample_weights)

    p = softmax(teacher_logits / t)
    logq = log_softmax(student_logits / t)
    q = np.exp(logq)
    # KL(p || q) per sample; p log p term is constant in the student but kept
    # so the loss value is a true divergence (0 when teacher == student).
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    kl = np.sum(plogp - p * logq, axis=-1)
    kd_term = t * t * float(np.sum(w * kl))
    # d(T^2 KL)/d student = T (q - p), weighted per sample
    kd_grad = t * (q - p) * w[:, None]

    loss = alpha * ce + (1.0 - alpha) * kd_term
    grad = alpha * ce_grad + (1.0 - alpha) * kd_grad
    return float(loss), grad


def mmd(a: np.ndarray, b: np.ndarray, kernel: str = "linear", gamma: float = 1.0) -> float:
    """Biased MMD^2 estimator between two sample sets (rows are samples)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DimMismatch(f"feature dims differ: {a.shape} vs {b.shape}")
    if kernel == "linear":
        diff = a.mean(axis=0) - b.mean(axis=0)
        return float(diff @ diff)
    if kernel == "rbf":
        def mean_kernel(x, y):
            d2 = (
                np.sum(x * x, axis=1)[:, None]
                + np.sum(y * y, axis=1)[None, :]
                - 2.0 * (x @ y.T)
            )
            return float(np.mean(np.exp(-gamma * np.maximum(d2, 0.0))))

        value = mean_kernel(a, a) + mean_kernel(b, b) - 2.0 * mean_kernel(a, b)
        return max(value, 0.0)
    raise DimMismatch(f"unknown kernel {kernel!r}")


def mmd_linear_with_grads(a: np.ndarray, b: np.ndarray):
    """Linear-kernel MMD^2 = ||mean(a) - mean(b)||^2 plus gradients, used as
    the differentiable adaptation penalty."""
    if a.shape[1] != b.shape[1]:
        raise DimMismatch(f"feature dims differ: {a.shape} vs {b.shape}")
    diff = a.mean(axis=0) - b.mean(axis=0)
    value = float(diff @ diff)
    grad_a = np.broadcast_to(2.0 * diff / a.shape[0], a.shape).astype(a.dtype)
    grad_b = np.broadcast_to(-2.0 * diff / b.shape[0], b.shape).astype(b.dtype)
    return value, grad_a, grad_b
