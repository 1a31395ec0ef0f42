"""Haar-random orthonormal frames and the sphere-projection concentration check.

A frame V = (v_1, ..., v_k) of orthonormal vectors in R^n is the hidden state
of every hard instance.  Sampling is modified Gram-Schmidt applied to i.i.d.
standard Gaussian rows, which is numerically stabler than classical
Gram-Schmidt at large n and gives exactly the rotation-invariant (Haar)
distribution on frames.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .rng import substream

__all__ = [
    "OrthonormalFrame", "haar_frame", "complete_frame", "gram_defect",
    "save_frame", "load_frame", "concentration_check", "ConcentrationReport",
    "sphere_component",
]

ORTHO_TOL = 1e-10
_MAGIC = b"CLBF"
_VERSION = 1


@dataclass(frozen=True)
class OrthonormalFrame:
    """k orthonormal row vectors in R^n plus the seed of record."""

    n: int
    k: int
    vectors: np.ndarray  # (k, n), read-only
    seed: int

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.float64, copy=True, order="C")
        if v.shape != (self.k, self.n):
            raise ValueError(f"vectors shape {v.shape} != (k={self.k}, n={self.n})")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)
        defect = gram_defect(v)
        if defect > ORTHO_TOL:
            raise ValueError(f"frame is not orthonormal: max Gram defect {defect:.3e}")


def gram_defect(vectors: np.ndarray) -> float:
    """max_ij |<v_i, v_j> - delta_ij|."""
    g = vectors @ vectors.T
    return float(np.abs(g - np.eye(vectors.shape[0])).max())


def _mgs_rows(rows: np.ndarray, against: np.ndarray | None = None) -> np.ndarray:
    """Orthonormalize rows in place by modified Gram-Schmidt.

    If `against` is given (rows already orthonormal), new rows are first
    orthogonalized against it.  A second sweep keeps the Gram defect at the
    1e-15 level even for nearly dependent draws.
    """
    rows = np.array(rows, dtype=np.float64, copy=True)
    out = []
    for r in rows:
        for _ in range(2):  # two MGS sweeps
            if against is not None and len(against):
                r = r - (against @ r) @ against
            for q in out:
                r = r - (q @ r) * q
        norm = np.linalg.norm(r)
        if norm < 1e-8:
            raise ValueError("degenerate draw while orthonormalizing (norm ~ 0)")
        out.append(r / norm)
    return np.array(out)


def haar_frame(n: int, k: int, seed: int) -> OrthonormalFrame:
    """Sample k Haar-random orthonormal vectors in R^n, reproducibly.

    The same (n, k, seed) always yields bitwise-identical frames; the
    underlying stream is the "frame" substream of the root seed.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = substream(seed, "frame", n, k)
    g = rng.standard_normal((k, n))
    return OrthonormalFrame(n=n, k=k, vectors=_mgs_rows(g), seed=int(seed))


def complete_frame(prefix: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` fresh Haar vectors orthogonal to the rows of `prefix`.

    This is the lazy-sampling primitive: conditioned on the revealed prefix,
    the suffix is uniform on frames in the orthogonal complement.
    """
    prefix = np.asarray(prefix, dtype=np.float64)
    n = prefix.shape[1] if prefix.size else prefix.shape[-1]
    g = rng.standard_normal((count, n))
    return _mgs_rows(g, against=prefix if prefix.size else None)


def save_frame(frame: OrthonormalFrame, path) -> None:
    """Write the binary container: magic, version u32, n u64, k u64, seed u64,
    then k*n little-endian float64, row-major."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQQQ", _VERSION, frame.n, frame.k, frame.seed & (2**64 - 1)))
        fh.write(np.ascontiguousarray(frame.vectors, dtype="<f8").tobytes())


def load_frame(path) -> OrthonormalFrame:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        version, n, k, seed = struct.unpack("<IQQQ", fh.read(28))
        if version != _VERSION:
            raise ValueError(f"unsupported container version {version}")
        data = np.frombuffer(fh.read(8 * n * k), dtype="<f8").astype(np.float64)
    return OrthonormalFrame(n=int(n), k=int(k),
                            vectors=data.reshape(int(k), int(n)), seed=int(seed))


def sphere_component(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Marginal distribution of one coordinate of a uniform unit vector in R^n.

    Sampled exactly as g_1 / sqrt(g_1^2 + chi2_{n-1}) without materializing
    the full vector.
    """
    g1 = rng.standard_normal(count)
    rest = rng.chisquare(n - 1, size=count)
    return g1 / np.sqrt(g1 * g1 + rest)


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    c: float
    trials: int
    empirical: float
    bound: float
    sigma: float
    passed: bool


def concentration_check(n: int, c: float, trials: int, seed: int = 0) -> ConcentrationReport:
    """Empirically test Pr(|<x, v>| >= c) <= 2*exp(-n c^2 / 2) for Haar v.

    By rotation invariance the worst fixed x in the unit ball is any unit
    vector, so the projection reduces to the first coordinate of a uniform
    unit vector.  Pass means empirical <= bound + 3 sigma binomial slack.
    """
    if c < 0:
        raise ValueError("c must be >= 0")
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    rng = substream(seed, "concentration", n)
    comp = sphere_component(n, trials, rng)
    hits = int(np.count_nonzero(np.abs(comp) >= c))
    emp = hits / trials
    bound = 2.0 * math.exp(-n * c * c / 2.0)
    sigma = math.sqrt(emp * (1.0 - emp) / trials)
    return ConcentrationReport(n=n, c=c, trials=trials, empirical=emp,
                               bound=bound, sigma=sigma,
                               passed=emp <= bound + 3.0 * sigma)
