"""Numerical property suites behind the `verify` command.

Each suite re-checks the quantitative facts the construction rests on —
softmax analytics, smoothing-operator behavior, concentration, and the
assembled instance's contracts — and returns structured pass/fail records.
The suites are deterministic given the seed, so a failing sample is
reproducible from the report alone.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import ks_2samp

from . import softmax as sm
from .frames import concentration_check, gram_defect, haar_frame, sphere_component
from .instance import (HardInstance, branch_stable, f_value, h_value, h_values,
                       h_subgrad, make_instance, optimum_witness, oracle_query,
                       query_levels)
from .nemirovski import nemirovski_value, stagger_offsets
from .rng import substream
from .schedule import params_schedule
from .smoothing import (PropertyCheck, SmoothingConfig, ball_points,
                        nested_smooth_value, smoothing_property_suite)

__all__ = ["SUITE_NAMES", "run_suites", "softmax_suite", "smoothing_suite",
           "instance_core_suite", "hard_instance_suite", "default_verify_instance"]

SUITE_NAMES = ("softmax", "smoothing", "instance-core", "hard-instance")


def _check(name, passed, detail, inconclusive=False) -> PropertyCheck:
    return PropertyCheck(name=name, passed=bool(passed),
                         inconclusive=bool(inconclusive), detail=detail)


# ---------------------------------------------------------------------------

def softmax_suite(seed: int = 0, cases: int = 300) -> list[PropertyCheck]:
    rng = substream(seed, "verify-softmax")
    checks = []

    # gradient vs central finite differences, step scaled with rho
    worst = 0.0
    for _ in range(cases):
        dim = int(rng.integers(2, 50))
        rho = float(10.0 ** rng.uniform(-3, 0))
        z = rng.standard_normal(dim) * rng.uniform(0.1, 3.0)
        g = sm.smax_grad(rho, z)
        h = rho / 200.0
        for i in range(dim):
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            fd = (sm.smax(rho, zp) - sm.smax(rho, zm)) / (2 * h)
            worst = max(worst, abs(fd - g[i]))
    checks.append(_check("grad_finite_difference", worst <= 1e-6,
                         f"max |grad - FD| = {worst:.3e} over {cases} inputs"))

    # Hessian: PSD, zero row sums, matches (diag(w) - w w^T)/rho by construction
    min_eig = math.inf
    worst_row = 0.0
    for _ in range(40):
        dim = int(rng.integers(2, 200))
        rho = float(10.0 ** rng.uniform(-2, 0))
        z = rng.standard_normal(dim)
        H = sm.smax_hessian(rho, z)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(H)[0]))
        worst_row = max(worst_row, float(np.abs(H.sum(axis=1)).max() * rho))
    checks.append(_check("hessian_psd", min_eig >= -1e-10,
                         f"min eigenvalue = {min_eig:.3e}"))
    checks.append(_check("hessian_zero_row_sums", worst_row <= 1e-12,
                         f"max |row sum|*rho = {worst_row:.3e}"))

    # gradient-closeness bound over random (z, m) with delta < 1
    applicable = 0
    worst_excess = -math.inf
    for _ in range(2000):
        dim = int(rng.integers(2, 30))
        m = int(rng.integers(1, dim))
        rho = float(10.0 ** rng.uniform(-2, 0))
        z = np.sort(rng.standard_normal(dim))[::-1] * rng.uniform(0.05, 2.0)
        res = sm.grad_closeness(rho, m, z)  # raises on violation
        if res.applicable:
            applicable += 1
            worst_excess = max(worst_excess, res.actual_gap - res.bound)
    # the gap is a norm of O(eps) differences, so allow the rounding floor
    checks.append(_check("grad_closeness_bound", worst_excess <= 1e-12,
                         f"{applicable} applicable cases, max gap-bound = "
                         f"{worst_excess:.3e}"))

    # shift identity, 1-Lipschitzness, convexity, prefix consistency
    worst_shift = worst_lip = worst_mid = 0.0
    prefix_ok = True
    for _ in range(400):
        dim = int(rng.integers(1, 40))
        rho = float(10.0 ** rng.uniform(-3, 0))
        z = rng.standard_normal(dim) * 2.0
        z2 = rng.standard_normal(dim) * 2.0
        c = float(rng.uniform(-10, 10))
        worst_shift = max(worst_shift,
                          abs(sm.smax(rho, z + c) - (sm.smax(rho, z) + c)))
        worst_lip = max(worst_lip, abs(sm.smax(rho, z) - sm.smax(rho, z2))
                        - float(np.linalg.norm(z - z2)))
        mid = sm.smax(rho, (z + z2) / 2) - 0.5 * (sm.smax(rho, z) + sm.smax(rho, z2))
        worst_mid = max(worst_mid, mid)
        prefix_ok &= sm.smax_prefix(rho, dim, z) == sm.smax(rho, z)
    checks.append(_check("shift_identity", worst_shift <= 1e-12,
                         f"max |smax(z+c) - smax(z) - c| = {worst_shift:.3e}"))
    checks.append(_check("one_lipschitz", worst_lip <= 1e-12,
                         f"max excess over ||z-z'|| = {worst_lip:.3e}"))
    checks.append(_check("midpoint_convexity", worst_mid <= 1e-12,
                         f"max midpoint violation = {worst_mid:.3e}"))
    checks.append(_check("prefix_full_bitwise", prefix_ok,
                         "smax_prefix(rho, len(z), z) == smax(rho, z) bitwise"))

    # empirical gradient Lipschitz vs the p=1 constant
    worst_ratio = 0.0
    for _ in range(200):
        dim = int(rng.integers(2, 30))
        rho = float(10.0 ** rng.uniform(-2, 0))
        z = rng.standard_normal(dim)
        z2 = z + rng.standard_normal(dim) * rho
        num = float(np.linalg.norm(sm.smax_grad(rho, z) - sm.smax_grad(rho, z2)))
        den = sm.smax_lipschitz_bound(1, rho) * float(np.linalg.norm(z - z2))
        if den > 0:
            worst_ratio = max(worst_ratio, num / den)
    checks.append(_check("grad_lipschitz_constant", worst_ratio <= 1.0,
                         f"max empirical/bound = {worst_ratio:.3f}"))
    return checks


# ---------------------------------------------------------------------------

def _nemirovski_field(frame, gamma):
    off = stagger_offsets(frame.k, gamma)

    def f(Y):
        return (np.atleast_2d(Y) @ frame.vectors.T + off).max(axis=1)

    def grad(Y):
        z = np.atleast_2d(Y) @ frame.vectors.T + off
        return frame.vectors[np.argmax(z, axis=1)]

    return f, grad


def smoothing_suite(seed: int = 0) -> list[PropertyCheck]:
    checks = []

    # closed-form one-dimensional average: mean of u^2 over [-1/2, 1/2] = 1/12
    cfg1 = SmoothingConfig(beta=1.0, p=1, samples=100_000, stream=seed)
    sq = lambda y: (y**2).sum(axis=1)
    est = nested_smooth_value(sq, cfg1, np.zeros(1))
    err = abs(est.mean - 1.0 / 12.0)
    checks.append(_check("closed_form_interval_average", err <= 4 * est.stderr,
                         f"|est - 1/12| = {err:.2e}, stderr = {est.stderr:.2e}"))

    # determinism: same stream and x give bit-identical estimates
    n = 24
    cfg = SmoothingConfig(beta=0.05, p=2, samples=4096, stream=seed + 1)
    frame = haar_frame(n, 3, seed=seed + 2)
    f, grad = _nemirovski_field(frame, 0.02)
    x = np.full(n, 0.1)
    a = nested_smooth_value(f, cfg, x)
    b = nested_smooth_value(f, cfg, x)
    checks.append(_check("common_random_numbers_determinism",
                         a.mean == b.mean and a.stderr == b.stderr,
                         "two evaluations bit-identical"))

    # doubling samples shrinks stderr by ~sqrt(2); use raw (non-antithetic)
    # sampling so nothing cancels exactly
    cfg_a = SmoothingConfig(beta=0.05, p=1, samples=20_000, stream=seed + 3,
                            antithetic=False)
    cfg_b = SmoothingConfig(beta=0.05, p=1, samples=40_000, stream=seed + 3,
                            antithetic=False)
    curved = lambda y: np.sqrt((y**2).sum(axis=1) + 0.01)
    ea = nested_smooth_value(curved, cfg_a, x[:n])
    eb = nested_smooth_value(curved, cfg_b, x[:n])
    ratio = ea.stderr / eb.stderr
    checks.append(_check("variance_scaling", abs(ratio - math.sqrt(2)) <= 0.1 * math.sqrt(2),
                         f"stderr ratio at 2x samples = {ratio:.3f} (want ~1.414)"))

    # operator properties on the staggered-max field (1-Lipschitz, convex)
    rng = substream(seed, "verify-smoothing")
    pts = ball_points(np.zeros(n), 0.8, 6, rng)
    cfg_s = SmoothingConfig(beta=0.05, p=2, samples=2048, stream=seed + 4)
    checks.extend(smoothing_property_suite(f, 1.0, cfg_s, pts, convex=True,
                                           grad_f=grad, seed=seed + 5))
    return checks


# ---------------------------------------------------------------------------

def instance_core_suite(seed: int = 0, corrupt_frame: bool = False,
                        trials: int = 100_000) -> list[PropertyCheck]:
    checks = []

    frame = haar_frame(256, 8, seed=seed)
    vectors = np.array(frame.vectors)
    if corrupt_frame:
        vectors[0, 0] += 1e-3  # negative control: break orthonormality
    defect = gram_defect(vectors)
    checks.append(_check("frame_orthonormality", defect <= 1e-10,
                         f"max Gram defect = {defect:.3e}"
                         + (" (corrupted on purpose)" if corrupt_frame else "")))

    again = haar_frame(256, 8, seed=seed)
    checks.append(_check("frame_determinism",
                         np.array_equal(frame.vectors, again.vectors),
                         "same (n, k, seed) reproduces bitwise"))

    for n_, c_ in ((100, 0.3), (1000, 0.1), (10_000, 0.05)):
        rep = concentration_check(n_, c_, trials, seed=seed)
        checks.append(_check(
            f"concentration_n{n_}", rep.passed,
            f"empirical {rep.empirical:.2e} vs bound {rep.bound:.2e}"))

    # rotation invariance: <v_1, u> for a fixed direction u matches the
    # first-coordinate marginal of a uniform unit vector
    n_rot, draws = 64, 5000
    rng = substream(seed, "verify-rotation")
    u = rng.standard_normal(n_rot)
    u /= np.linalg.norm(u)
    proj = np.array([haar_frame(n_rot, 1, seed=_rot_seed(seed, i)).vectors[0] @ u
                     for i in range(draws)])
    ref = sphere_component(n_rot, draws, rng)
    pval = float(ks_2samp(proj, ref).pvalue)
    checks.append(_check("haar_rotation_invariance", pval > 0.01,
                         f"KS two-sample p = {pval:.3f} over {draws} draws"))

    # staggered-max baseline is 1-Lipschitz
    fr = haar_frame(128, 5, seed=seed + 1)
    worst = 0.0
    pr = substream(seed, "verify-nemirovski")
    for _ in range(2000):
        x = ball_points(np.zeros(128), 1.0, 1, pr)[0]
        y = ball_points(np.zeros(128), 1.0, 1, pr)[0]
        num = abs(nemirovski_value(fr, 0.05, x) - nemirovski_value(fr, 0.05, y))
        worst = max(worst, num - float(np.linalg.norm(x - y)))
    checks.append(_check("nemirovski_one_lipschitz", worst <= 1e-12,
                         f"max excess = {worst:.3e}"))

    # schedule purity: recomputation is bit-identical
    a = params_schedule(2**24, 1)
    b = params_schedule(2**24, 1)
    checks.append(_check("schedule_purity", a == b, "paper-exact recompute identical"))
    return checks


def _rot_seed(seed: int, i: int) -> int:
    return (seed * 1_000_003 + i) & 0xFFFFFFFFFFFFFFFF


# ---------------------------------------------------------------------------

def default_verify_instance(seed: int = 0, mc_samples: int = 1024) -> HardInstance:
    params = params_schedule(512, 1, "scaled", {"gamma": 0.01})
    return make_instance(params, seed=seed, mc_samples=mc_samples)


def hard_instance_suite(inst: HardInstance, seed: int = 0,
                        triples: int = 1000) -> list[PropertyCheck]:
    p = inst.params
    n, k = p.n, p.k
    rng = substream(seed, "verify-instance")
    checks = []

    # per-level offsets: f_{i+1} - f_i >= -rho * n^-alpha
    floor = -p.rho * float(n) ** (-p.alpha)
    worst = math.inf
    for _ in range(50):
        x = ball_points(np.zeros(n), p.R, 1, rng)[0]
        for i in range(1, k):
            worst = min(worst, f_value(inst, i + 1, x) - f_value(inst, i, x))
    checks.append(_check("level_offset_floor", worst >= floor - 1e-15,
                         f"min f_(i+1)-f_i = {worst:.3e} vs floor {floor:.3e}"))

    # h_t is 1-Lipschitz, convex (exact midpoint), with unit-bounded subgradients
    X = ball_points(np.zeros(n), p.R, 2 * triples, rng)
    A, B = X[:triples], X[triples:]
    va, _, _ = h_values(inst, k, A)
    vb, _, _ = h_values(inst, k, B)
    vm, _, _ = h_values(inst, k, (A + B) / 2.0)
    lip = float(np.max(np.abs(va - vb) - np.linalg.norm(A - B, axis=1)))
    mid = float(np.max(vm - 0.5 * (va + vb)))
    checks.append(_check("h_one_lipschitz", lip <= 1e-12, f"max excess {lip:.3e}"))
    checks.append(_check("h_midpoint_convexity", mid <= 1e-12,
                         f"max midpoint violation {mid:.3e}"))
    gn = max(float(np.linalg.norm(h_subgrad(inst, k, x))) for x in A[:20])
    checks.append(_check("h_subgradient_norm", gn <= 1.0 + 1e-10,
                         f"max subgradient norm {gn:.12f}"))

    # oracle: value within beta of h, gradient inside the Lipschitz envelope
    worst_val = -math.inf
    worst_grad = -math.inf
    for i in range(8):
        x = ball_points(np.zeros(n), p.R, 1, rng)[0]
        resp = oracle_query(inst, k, x, tag=("verify", i))
        hx, _ = h_value(inst, k, x)
        worst_val = max(worst_val, abs(resp.value.mean - hx)
                        - (p.beta + 3 * resp.value.stderr))
        worst_grad = max(worst_grad, float(np.linalg.norm(resp.grad.mean))
                         - (1.0 + 5 * resp.grad.stderr))
    checks.append(_check("oracle_value_near_h", worst_val <= 0.0,
                         f"max |value-h| - beta - 3se = {worst_val:.3e}"))
    checks.append(_check("oracle_grad_norm", worst_grad <= 1e-9,
                         f"max ||grad|| - 1 - 5se = {worst_grad:.3e}"))

    # level consistency at branch-stable points: responses identical under
    # common random numbers
    exact_ok = True
    for t in range(k - 1):
        x = np.zeros(n)
        st = branch_stable(inst, t, x, probe_count=64, tag=("verify", t))
        if not st.stable:
            continue
        result, agree = query_levels(inst, x, [t + 1, k], tag=("consistency", t))
        exact_ok &= agree[t + 1]
        exact_ok &= result[t + 1][0].mean == result[k][0].mean
        exact_ok &= bool(np.array_equal(result[t + 1][1].mean, result[k][1].mean))
    checks.append(_check("level_consistency_exact", exact_ok,
                         "stable points answer identically at level t+1 and k"))

    # gradient vs finite difference of the value estimator, common random numbers
    x = ball_points(np.zeros(n), 0.5 * p.R, 1, rng)[0]
    d = rng.standard_normal(n)
    d /= np.linalg.norm(d)
    eps = p.beta / 8.0
    r0, _ = query_levels(inst, x, [k], tag=("fd",))
    rp, _ = query_levels(inst, x + eps * d, [k], tag=("fd",))
    rm, _ = query_levels(inst, x - eps * d, [k], tag=("fd",))
    fd = (rp[k][0].mean - rm[k][0].mean) / (2 * eps)
    inner = float(r0[k][1].mean @ d)
    tol = max(1e-4, 5 * math.sqrt(rp[k][0].stderr**2 + rm[k][0].stderr**2) / (2 * eps)
              + 5 * r0[k][1].stderr)
    checks.append(_check("grad_matches_value_fd", abs(fd - inner) <= tol,
                         f"|FD - <grad,d>| = {abs(fd - inner):.3e} (tol {tol:.1e})"))

    # certificate at the witness
    wit = optimum_witness(inst, samples=2048)
    ok = (wit.h_at_x_star <= wit.f_analytic_bound + 1e-12
          and abs(float(np.linalg.norm(wit.x_star)) - 1.0) <= 1e-12)
    if wit.certified:
        ok &= wit.g_estimate.mean <= wit.g_certificate + 3 * wit.g_estimate.stderr
    checks.append(_check("optimum_certificate", ok,
                         f"h(x*) = {wit.h_at_x_star:.6f} <= bound "
                         f"{wit.f_analytic_bound:.6f}; certified={wit.certified}"))

    # stability of the trivial query and instability of a planted one
    st0 = branch_stable(inst, 0, np.zeros(n), probe_count=64, tag=("bs0",))
    checks.append(_check("branch_stable_origin", st0.stable,
                         f"max overlap {st0.max_overlap:.2e} <= {st0.threshold:.2e}"))
    if k >= 2:
        planted = 0.9 * p.R * inst.frame.vectors[1]
        st1 = branch_stable(inst, 0, planted, probe_count=64, tag=("bs1",))
        checks.append(_check("branch_unstable_planted", not st1.analytic_ok,
                             f"overlap {st1.max_overlap:.2e} above threshold "
                             f"{st1.threshold:.2e}"))
    return checks


# ---------------------------------------------------------------------------

def run_suites(names, seed: int = 0, inst: HardInstance | None = None,
               corrupt_frame: bool = False) -> dict[str, list[PropertyCheck]]:
    names = list(names)
    for name in names:
        if name not in SUITE_NAMES:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    out = {}
    for name in names:
        if name == "softmax":
            out[name] = softmax_suite(seed)
        elif name == "smoothing":
            out[name] = smoothing_suite(seed)
        elif name == "instance-core":
            out[name] = instance_core_suite(seed, corrupt_frame=corrupt_frame)
        else:
            out[name] = hard_instance_suite(inst or default_verify_instance(seed),
                                            seed=seed)
    return out
