"""Parameter schedules for the staggered softmax-tower instances.

The construction is governed by a handful of coupled scalars:

    gamma   stagger spacing between the k linear pieces
    k       number of hidden orthonormal directions
    rho     softmax temperature
    beta    outer smoothing radius
    alpha   exponent of the per-level offset rho*(k-i)*n^-alpha
    R       domain radius (unit ball)
    epsilon target accuracy

In ``paper-exact`` mode everything is a pure function of (n, p):

    gamma = 40*sqrt(ln n / n),  k = floor((0.1/gamma)^(2/3)),  alpha = p + 1,
    rho = gamma / (100*alpha*ln n),  beta = gamma / ln n,
    R = 1,  epsilon = 0.1/sqrt(k).

Paper-exact constants force n in the millions before k reaches 2, so
``scaled`` mode lets callers override gamma (or the constants 40 / 0.1 / 100,
or any individual scheduled value) before the dependent quantities are
derived.  Either way the construction-time safety net is enforced: the
branch-stability proof needs

    rho*(1 + alpha)*ln n + 2*beta < gamma

and the ordering rho < beta < gamma < 1; violating schedules are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["InstanceParams", "ScheduleError", "params_schedule", "min_viable_n"]

# paper-exact schedule constants
C_GAMMA = 40.0
C_EPS = 0.1
C_RHO = 100.0

_OVERRIDABLE = {
    "gamma", "rho", "beta", "alpha", "epsilon", "k", "R",
    "c_gamma", "c_eps", "c_rho",
}


class ScheduleError(ValueError):
    """Raised when a parameter schedule cannot satisfy its invariants."""


@dataclass(frozen=True)
class InstanceParams:
    """All scalar parameters of one instance, plus how they were derived."""

    n: int
    p: int
    k: int
    gamma: float
    rho: float
    beta: float
    alpha: float
    R: float
    epsilon: float
    mode: str
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        _validate(self)

    @property
    def singlestep_margin(self) -> float:
        """Slack of the stability inequality gamma - rho*(1+alpha)*ln n - 2*beta."""
        return self.gamma - self.rho * (1.0 + self.alpha) * math.log(self.n) - 2.0 * self.beta

    def as_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p, "k": self.k,
            "gamma": self.gamma, "rho": self.rho, "beta": self.beta,
            "alpha": self.alpha, "R": self.R, "epsilon": self.epsilon,
            "mode": self.mode, "overrides": dict(self.overrides),
        }


def min_viable_n(p: int) -> int:
    """Smallest n for which the paper-exact schedule yields k >= 1."""
    # k >= 1 iff gamma <= c_eps, i.e. 40*sqrt(ln n / n) <= 0.1
    lo, hi = 3, 1
    while True:
        hi = max(4, hi * 2)
        if C_GAMMA * math.sqrt(math.log(hi) / hi) <= C_EPS:
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if C_GAMMA * math.sqrt(math.log(mid) / mid) <= C_EPS:
            hi = mid
        else:
            lo = mid
    return hi


def params_schedule(n: int, p: int, mode: str = "paper-exact",
                    overrides: dict | None = None) -> InstanceParams:
    """Derive a full parameter set from (n, p).

    Args:
        n: ambient dimension, >= 3.
        p: derivative order served by the oracle (and smoothing depth), >= 1.
        mode: "paper-exact" (overrides ignored) or "scaled".
        overrides: in scaled mode, explicit values for any of
            gamma/rho/beta/alpha/epsilon/k/R or the constants
            c_gamma/c_eps/c_rho; replacements happen before dependent
            quantities are derived.

    Raises:
        ScheduleError: k < 1, or the stability inequality
            rho*(1+alpha)*ln n + 2*beta < gamma fails, or ordering breaks.
    """
    if n < 3:
        raise ScheduleError(f"n must be >= 3, got {n}")
    if p < 1:
        raise ScheduleError(f"p must be >= 1, got {p}")
    if mode not in ("paper-exact", "scaled"):
        raise ScheduleError(f"mode must be 'paper-exact' or 'scaled', got {mode!r}")

    ov = dict(overrides or {})
    if mode == "paper-exact":
        ov = {}
    unknown = set(ov) - _OVERRIDABLE
    if unknown:
        raise ScheduleError(f"unknown override(s): {sorted(unknown)}; "
                            f"allowed: {sorted(_OVERRIDABLE)}")

    ln_n = math.log(n)
    c_gamma = float(ov.get("c_gamma", C_GAMMA))
    c_eps = float(ov.get("c_eps", C_EPS))
    c_rho = float(ov.get("c_rho", C_RHO))

    gamma = float(ov.get("gamma", c_gamma * math.sqrt(ln_n / n)))
    alpha = float(ov.get("alpha", p + 1))
    if "k" in ov:
        k = int(ov["k"])
    else:
        k = math.floor((c_eps / gamma) ** (2.0 / 3.0)) if gamma < c_eps else 0
    if k < 1:
        if mode == "paper-exact" or "gamma" not in ov:
            hint = (f"the minimum n with k >= 1 at these constants is "
                    f"{min_viable_n(p)}")
        else:
            hint = f"gamma must be below c_eps = {c_eps} (got gamma = {gamma})"
        raise ScheduleError(f"schedule yields k = {k} < 1; {hint}")

    rho = float(ov.get("rho", gamma / (c_rho * alpha * ln_n)))
    beta = float(ov.get("beta", gamma / ln_n))
    epsilon = float(ov.get("epsilon", c_eps / math.sqrt(k)))
    R = float(ov.get("R", 1.0))

    return InstanceParams(n=n, p=p, k=k, gamma=gamma, rho=rho, beta=beta,
                          alpha=alpha, R=R, epsilon=epsilon, mode=mode,
                          overrides=ov)


def _validate(params: InstanceParams) -> None:
    p = params
    if p.k < 1:
        raise ScheduleError(f"k must be >= 1, got {p.k}")
    for name in ("gamma", "rho", "beta", "alpha", "R", "epsilon"):
        if not getattr(p, name) > 0:
            raise ScheduleError(f"{name} must be positive, got {getattr(p, name)}")
    if not (p.rho < p.beta < p.gamma < 1.0):
        raise ScheduleError(
            f"need rho < beta < gamma < 1, got rho={p.rho}, beta={p.beta}, "
            f"gamma={p.gamma}")
    margin = p.singlestep_margin
    if not margin > 0:
        raise ScheduleError(
            "stability inequality rho*(1+alpha)*ln n + 2*beta < gamma fails "
            f"(margin = {margin}); shrink rho/beta or grow gamma")
