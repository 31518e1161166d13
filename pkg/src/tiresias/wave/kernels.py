"""Duhamel kernel family of the modal wave equation.

K_0(λ, t) = cos(√λ t), K_1 = sin(√λ t)/√λ and K_{m+1} = ∫_0^t K_m, so that
d/dt K_m = K_{m-1}. For λ = 0 the family reduces to t^m / m!.
"""

from math import factorial

import numpy as np

SERIES_THRESHOLD = 1e-2
SERIES_TERMS = 10
MAX_ORDER = 3


def _series(order: int, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
    # K_m = t^m Σ_k (−λt²)^k / (2k+m)!
    x = -lam * t * t
    total = np.zeros(np.broadcast(lam, t).shape)
    power = np.ones_like(total)
    for k in range(SERIES_TERMS):
        total = total + power / factorial(2 * k + order)
        power = power * x
    return total * t**order


def _closed_form(order: int, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
    omega = np.sqrt(lam)
    phase = omega * t
    if order == 0:
        return np.cos(phase)
    if order == 1:
        return np.sin(phase) / omega
    if order == 2:
        return (1.0 - np.cos(phase)) / lam
    return (t - np.sin(phase) / omega) / lam


def duhamel_kernel(order: int, lam: np.ndarray | float, t: np.ndarray | float) -> np.ndarray:
    """Evaluate K_order(λ, t), broadcasting λ against t.

    Uses the Taylor series where λt² < SERIES_THRESHOLD, which keeps the
    higher orders free of cancellation and makes λ = 0 exact.

    Args:
        order: 0 (cosine) to 3 (second antiderivative of the sine kernel)
        lam: Nonnegative eigenvalue(s)
        t: Time(s), any sign

    Returns:
        Array of broadcast shape
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"kernel order must be in [0, {MAX_ORDER}], got {order}")
    lam_arr = np.asarray(lam, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("eigenvalues must be nonnegative")
    lam_b, t_b = np.broadcast_arrays(lam_arr, t_arr)

    small = lam_b * t_b * t_b < SERIES_THRESHOLD
    out = np.empty(lam_b.shape)
    if np.any(small):
        out[small] = _series(order, lam_b[small], t_b[small])
    if np.any(~small):
        out[~small] = _closed_form(order, lam_b[~small], t_b[~small])
    return out


def ramp_kernel(order: int, lam: np.ndarray | float, delay: np.ndarray | float) -> np.ndarray:
    """K_order(λ, delay) for delay ≥ 0 and 0 before it (orders ≥ 1).

    Orders ≥ 1 vanish at 0, so the ramp keeps d/dt K_m = K_{m-1}.
    """
    if order < 1:
        raise ValueError("ramp kernels start at order 1")
    delay_arr = np.asarray(delay, dtype=float)
    values = duhamel_kernel(order, lam, np.maximum(delay_arr, 0.0))
    return np.where(delay_arr > 0, values, 0.0)


def sine_kernel(lam: float, t: float) -> float:
    """s(λ, t) = sin(√λ t)/√λ, with s(0, t) = t."""
    if lam < 0:
        raise ValueError("eigenvalue must be nonnegative")
    return float(duhamel_kernel(1, lam, t))


def piecewise_linear_duhamel(
    lam: np.ndarray,
    nodes: np.ndarray,
    values: np.ndarray,
    t: float,
    order: int = 1,
) -> np.ndarray:
    """Exact ∫_0^t g_j(τ) K_order(λ_j, t − τ) dτ for piecewise-linear g_j.

    g_j is linear between consecutive nodes and zero outside
    [nodes[0], nodes[-1]]. Integrating by parts twice on each piece gives
    [−g K_{order+1}(t−τ) − g' K_{order+2}(t−τ)] evaluated at the piece ends.

    Args:
        lam: Eigenvalues, shape (J,)
        nodes: Increasing time nodes, shape (K,)
        values: g at the nodes, shape (K, J)
        t: Evaluation time
        order: 0 for the velocity, 1 for the displacement

    Returns:
        Integrals, shape (J,)
    """
    if order + 2 > MAX_ORDER:
        raise ValueError("order too high for the kernel family")
    lam = np.asarray(lam, dtype=float)
    if nodes.size < 2:
        return np.zeros(lam.shape)
    slopes = np.diff(values, axis=0) / np.diff(nodes)[:, None]
    delays = t - nodes[:, None]
    first = ramp_kernel(order + 1, lam[None, :], delays)
    second = ramp_kernel(order + 2, lam[None, :], delays)

    left = values[:-1] * first[:-1] + slopes * second[:-1]
    right = values[1:] * first[1:] + slopes * second[1:]
    return np.sum(left - right, axis=0)
