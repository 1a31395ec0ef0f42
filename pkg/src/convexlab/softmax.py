"""Numerically stable temperature-rho log-sum-exp and its derivatives.

    smax(rho, z)   = rho * ln( sum_i exp(z_i / rho) )

computed in shifted form m + rho*ln(sum exp((z_i - m)/rho)) with m = max z,
so temperatures down to 1e-5 and below never overflow (underflow of the
dominated exponents to 0 is accepted: it only sharpens the max).

Alongside the value: the gradient (a simplex weight vector), the Hessian
(diag(w) - w w^T)/rho, the prefix variant restricted to the first m
coordinates, the quantitative bound relating value closeness of full and
prefix versions to gradient closeness, and the Lipschitz constant of the
p-th derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "smax", "smax_prefix", "smax_grad", "smax_prefix_grad", "smax_hessian",
    "grad_closeness", "GradCloseness", "smax_lipschitz_bound",
]

HESSIAN_SIZE_GUARD = 10**4


def _as_vector(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("z must be a nonempty 1-d vector")
    return z


def _check_rho(rho: float) -> float:
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return float(rho)


def smax_prefix(rho: float, m: int, z) -> float:
    """rho * ln(sum_{i<=m} exp(z_i/rho)), stabilized by max subtraction."""
    rho = _check_rho(rho)
    z = _as_vector(z)
    if not 1 <= m <= z.size:
        raise ValueError(f"need 1 <= m <= {z.size}, got m={m}")
    zm = z[:m]
    top = zm.max()
    return float(top + rho * math.log(np.exp((zm - top) / rho).sum()))


def smax(rho: float, z) -> float:
    """rho * ln(sum_i exp(z_i/rho)); equals smax_prefix(rho, len(z), z) bitwise."""
    z = _as_vector(z)
    return smax_prefix(rho, z.size, z)


def smax_prefix_grad(rho: float, m: int, z) -> np.ndarray:
    """Gradient of the prefix log-sum-exp, zero-padded to len(z).

    Weight i (for i <= m) is exp(z_i/rho) / sum_{j<=m} exp(z_j/rho), computed
    in shifted form; weights are nonnegative and sum to 1.
    """
    rho = _check_rho(rho)
    z = _as_vector(z)
    if not 1 <= m <= z.size:
        raise ValueError(f"need 1 <= m <= {z.size}, got m={m}")
    zm = z[:m]
    e = np.exp((zm - zm.max()) / rho)
    w = np.zeros_like(z)
    w[:m] = e / e.sum()
    return w


def smax_grad(rho: float, z) -> np.ndarray:
    """Softmax weights exp(z_i/rho) / sum_j exp(z_j/rho)."""
    z = _as_vector(z)
    return smax_prefix_grad(rho, z.size, z)


def smax_hessian(rho: float, z) -> np.ndarray:
    """(diag(w) - w w^T) / rho with w = smax_grad(rho, z); symmetric PSD."""
    z = _as_vector(z)
    if z.size > HESSIAN_SIZE_GUARD:
        raise ValueError(f"dense Hessian guard: len(z) = {z.size} > {HESSIAN_SIZE_GUARD}")
    w = smax_grad(rho, z)
    return (np.diag(w) - np.outer(w, w)) / rho


@dataclass(frozen=True)
class GradCloseness:
    """Value gap delta, the 4*delta bound, and the exact gradient gap."""

    delta: float
    bound: float
    actual_gap: float
    applicable: bool  # the bound is stated only for delta < 1


def grad_closeness(rho: float, m: int, z) -> GradCloseness:
    """Check that value-close full/prefix log-sum-exps have close gradients.

    delta = (smax(z) - smax_prefix(m, z)) / rho.  For delta < 1 the gradient
    gap ||grad_full - grad_prefix|| is bounded by 4*delta; for delta >= 1 the
    result is flagged not applicable rather than extrapolated.
    """
    rho = _check_rho(rho)
    z = _as_vector(z)
    delta = (smax(rho, z) - smax_prefix(rho, m, z)) / rho
    gap = float(np.linalg.norm(smax_grad(rho, z) - smax_prefix_grad(rho, m, z)))
    result = GradCloseness(delta=delta, bound=4.0 * delta, actual_gap=gap,
                           applicable=bool(delta < 1.0))
    if result.applicable and gap > result.bound + 1e-12:
        raise ArithmeticError(
            f"gradient gap {gap} exceeds 4*delta = {result.bound} at delta={delta}")
    return result


def smax_lipschitz_bound(p: int, rho: float) -> float:
    """Lipschitz constant of the p-th derivative: ((p+1)/ln(p+2))^(p+1) * p! / rho^p."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    rho = _check_rho(rho)
    return ((p + 1) / math.log(p + 2)) ** (p + 1) * math.factorial(p) / rho**p
