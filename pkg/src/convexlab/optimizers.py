"""Baseline query algorithms run against the hard instances.

None of these is expected to beat the query wall; they exist to exhibit it.
Each algorithm is written as a small strategy object (propose queries,
observe responses, emit an output) so the same logic drives both the
standalone benchmark runner here and the round-based resisting-oracle game.

Oracles are callables x -> response, where a response carries .value
(mean/stderr) and .grad (mean) in the shape of instance.OracleResponse.
Optimizer step rules consume the means and ignore the error bars; the error
bars are surfaced in the trace for analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import substream
from .smoothing import SmoothedEstimate, ball_points

__all__ = [
    "OptimizerTrace", "exact_oracle", "project_ball", "run_strategy",
    "SubgradientDescent", "NesterovAGD", "RandomSearch", "ZeroStrategy",
    "subgradient_descent", "nesterov_agd", "random_search",
    "trace_to_csv_rows", "TRACE_CSV_HEADER",
]

TRACE_CSV_HEADER = ["step", "value_mean", "value_stderr", "grad_norm", "best_value"]


@dataclass
class OptimizerTrace:
    """Query-by-query record of one optimizer run."""

    budget: int
    queries: list = field(default_factory=list)  # (point, summary dict)
    best_value: float = math.inf
    best_point: np.ndarray | None = None
    iterates: list = field(default_factory=list)
    output: np.ndarray | None = None
    diverged: bool = False

    def record(self, x: np.ndarray, response) -> None:
        if len(self.queries) >= self.budget:
            raise RuntimeError(f"query budget {self.budget} exceeded")
        value = float(response.value.mean)
        summary = {
            "value_mean": value,
            "value_stderr": float(response.value.stderr),
            "grad_norm": float(np.linalg.norm(response.grad.mean)),
        }
        self.queries.append((np.array(x), summary))
        if value < self.best_value:
            self.best_value = value
            self.best_point = np.array(x)


def trace_to_csv_rows(trace: OptimizerTrace):
    best = math.inf
    for step, (_, s) in enumerate(trace.queries, start=1):
        best = min(best, s["value_mean"])
        yield [step, s["value_mean"], s["value_stderr"], s["grad_norm"], best]


@dataclass(frozen=True)
class _ExactResponse:
    value: SmoothedEstimate
    grad: SmoothedEstimate


def exact_oracle(f, grad):
    """Wrap closed-form value/gradient callables as a zero-noise oracle."""

    def oracle(x):
        x = np.asarray(x, dtype=np.float64)
        return _ExactResponse(
            value=SmoothedEstimate(mean=float(f(x)), stderr=0.0, samples_used=1),
            grad=SmoothedEstimate(mean=np.asarray(grad(x), dtype=np.float64),
                                  stderr=0.0, samples_used=1))

    return oracle


def project_ball(x: np.ndarray, R: float) -> np.ndarray:
    norm = float(np.linalg.norm(x))
    if norm <= R or norm == 0.0:
        return x
    return x * (R / norm)


class SubgradientDescent:
    """Projected subgradient steps x_{t+1} = proj(x_t - eta_t g_t), one query
    per round at the current iterate; eta_t = R / sqrt(t) (G = 1)."""

    def __init__(self, n: int, R: float, step_rule=None):
        self.n, self.R = n, R
        self.step_rule = step_rule or (lambda t: R / math.sqrt(t))
        self.x = np.zeros(n)
        self.t = 0
        self.best = (math.inf, np.zeros(n))

    def queries(self) -> list[np.ndarray]:
        return [self.x.copy()]

    def observe(self, responses) -> None:
        (resp,) = responses
        self.t += 1
        value = float(resp.value.mean)
        if value < self.best[0]:
            self.best = (value, self.x.copy())
        g = np.asarray(resp.grad.mean, dtype=np.float64)
        self.x = project_ball(self.x - self.step_rule(self.t) * g, self.R)

    def output(self) -> np.ndarray:
        return self.best[1]

    def iterate(self) -> np.ndarray:
        return self.x.copy()


class NesterovAGD:
    """Two-sequence accelerated gradient descent with ball projection.

    Steps 1/L off the momentum point; if the best seen value fails to improve
    over a 20-query window while gradients stay macroscopic, the run is
    flagged diverged (the step size is too long for the true smoothness) and
    frozen rather than left to oscillate silently.
    """

    STALL_WINDOW = 20

    def __init__(self, n: int, R: float, L: float):
        if not L > 0:
            raise ValueError("L must be positive")
        self.n, self.R, self.L = n, R, L
        self.x = np.zeros(n)
        self.y = np.zeros(n)
        self.t = 0
        self.best = (math.inf, np.zeros(n))
        self.initial_value = None
        self.diverged = False

    def queries(self) -> list[np.ndarray]:
        return [self.y.copy()]

    def observe(self, responses) -> None:
        (resp,) = responses
        value = float(resp.value.mean)
        if self.initial_value is None:
            self.initial_value = value
        if value < self.best[0]:
            self.best = (value, self.y.copy())
        self.t += 1
        if self.diverged:
            return
        g = np.asarray(resp.grad.mean, dtype=np.float64)
        x_next = project_ball(self.y - g / self.L, self.R)
        self.y = x_next + (self.t / (self.t + 3.0)) * (x_next - self.x)
        self.y = project_ball(self.y, self.R)
        self.x = x_next
        if (self.t >= self.STALL_WINDOW
                and self.best[0] >= self.initial_value - 1e-12
                and float(np.linalg.norm(g)) > 1e-9):
            self.diverged = True

    def output(self) -> np.ndarray:
        return self.best[1]

    def iterate(self) -> np.ndarray:
        return self.x.copy()


class RandomSearch:
    """Best of uniform ball samples; the stream fixes the whole query list."""

    def __init__(self, n: int, R: float, stream: int, per_round: int = 1):
        self.n, self.R = n, R
        self.rng = substream(stream, "random-search")
        self.per_round = per_round
        self.best = (math.inf, np.zeros(n))
        self.pending: list[np.ndarray] = []

    def queries(self) -> list[np.ndarray]:
        self.pending = list(ball_points(np.zeros(self.n), self.R, self.per_round, self.rng))
        return [q.copy() for q in self.pending]

    def observe(self, responses) -> None:
        for x, resp in zip(self.pending, responses):
            value = float(resp.value.mean)
            if value < self.best[0]:
                self.best = (value, x.copy())

    def output(self) -> np.ndarray:
        return self.best[1]

    def iterate(self) -> np.ndarray:
        return self.best[1].copy()


class ZeroStrategy:
    """Queries the origin every round and outputs it; control baseline."""

    def __init__(self, n: int, per_round: int = 1):
        self.n = n
        self.per_round = per_round

    def queries(self) -> list[np.ndarray]:
        return [np.zeros(self.n) for _ in range(self.per_round)]

    def observe(self, responses) -> None:
        pass

    def output(self) -> np.ndarray:
        return np.zeros(self.n)

    def iterate(self) -> np.ndarray:
        return np.zeros(self.n)


def run_strategy(strategy, oracle, budget: int) -> OptimizerTrace:
    """Drive a strategy against an oracle until the query budget is used."""
    trace = OptimizerTrace(budget=budget)
    used = 0
    while used < budget:
        batch = strategy.queries()
        batch = batch[: budget - used]
        responses = []
        for x in batch:
            resp = oracle(x)
            trace.record(x, resp)
            responses.append(resp)
        used += len(batch)
        strategy.observe(responses)
        trace.iterates.append(strategy.iterate())
        if getattr(strategy, "diverged", False):
            trace.diverged = True
            break
    trace.output = strategy.output()
    return trace


def subgradient_descent(oracle, R: float, steps: int, step_rule=None, *,
                        n: int) -> OptimizerTrace:
    """Projected subgradient descent from the origin; output is the best
    queried point.  steps = 0 returns the origin untouched."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    strat = SubgradientDescent(n=n, R=R, step_rule=step_rule)
    if steps == 0:
        trace = OptimizerTrace(budget=0)
        trace.output = np.zeros(n)
        return trace
    return run_strategy(strat, oracle, steps)


def nesterov_agd(oracle, L: float, R: float, steps: int, *, n: int) -> OptimizerTrace:
    """Projected accelerated gradient descent with step 1/L."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return run_strategy(NesterovAGD(n=n, R=R, L=L), oracle, steps)


def random_search(oracle, R: float, steps: int, stream: int, *, n: int) -> OptimizerTrace:
    """Best of `steps` uniform ball samples."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return run_strategy(RandomSearch(n=n, R=R, stream=stream), oracle, steps)
