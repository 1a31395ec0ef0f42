"""The classical nonsmooth staggered-max baseline.

f_V(x) = max_i <v_i, x> + (k - i) * gamma over an orthonormal frame V.
This is the unsmoothed ancestor of the hard family: 1-Lipschitz, convex, and
every subgradient is one of the hidden vectors.
"""

from __future__ import annotations

import numpy as np

from .frames import OrthonormalFrame

__all__ = ["stagger_offsets", "vec_embed", "nemirovski_value", "nemirovski_subgradient"]


def stagger_offsets(k: int, gamma: float) -> np.ndarray:
    """Offsets (k-1)*gamma, (k-2)*gamma, ..., 0 for components 1..k."""
    return gamma * np.arange(k - 1, -1, -1, dtype=np.float64)


def _check_dim(frame: OrthonormalFrame, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (frame.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({frame.n},)")
    return x


def vec_embed(frame: OrthonormalFrame, gamma: float, x: np.ndarray) -> np.ndarray:
    """Staggered embedding: component i is <v_i, x> + (k - i) * gamma."""
    x = _check_dim(frame, x)
    return frame.vectors @ x + stagger_offsets(frame.k, gamma)


def nemirovski_value(frame: OrthonormalFrame, gamma: float, x: np.ndarray) -> float:
    """max_i <v_i, x> + (k - i) * gamma."""
    return float(vec_embed(frame, gamma, x).max())


def nemirovski_subgradient(frame: OrthonormalFrame, gamma: float, x: np.ndarray) -> np.ndarray:
    """v_{i*} for the lowest achieving index i* (ties break to the lowest)."""
    z = vec_embed(frame, gamma, x)
    return frame.vectors[int(np.argmax(z))].copy()
