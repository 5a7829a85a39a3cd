"""Whole-family brute-force checks over balanced Boolean functions.

Every analytic bound in the toolkit is validated here against exhaustive
enumeration on small cubes: functions are packed as rows of a 0/1 matrix,
noised with one kernel matmul per correlation, and every check reduces to
array comparisons.  n <= 4 is exhaustive (12,870 balanced functions at
n = 4); n = 5 runs on a seeded uniform sample.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from . import bounds
from .cube import MAX_EXHAUSTIVE_N, MAX_N, DimensionError, noise_kernel

CHECK_NAMES = ("majorization", "gamma", "qstab", "ck")

GAMMA_PHIS = ("one-sym", "q-asym:2", "q-asym:3")
Q_UPPER = (1.5, 2.0, 3.0)
Q_LOWER = (0.5,)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check at one (n, rho): worst violation vs tolerance."""

    name: str
    n: int
    rho: float
    tested: int
    max_violation: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def balanced_supports(n: int) -> np.ndarray:
    """All balanced functions as a (C(2^n, 2^{n-1}), 2^n) 0/1 matrix."""
    if n > MAX_EXHAUSTIVE_N:
        raise DimensionError(
            f"exhaustive enumeration capped at n={MAX_EXHAUSTIVE_N}; sample n=5")
    N = 2 ** n
    combos = np.array(list(itertools.combinations(range(N), N // 2)), dtype=np.int64)
    F = np.zeros((len(combos), N))
    np.put_along_axis(F, combos, 1.0, axis=1)
    return F


def sampled_balanced_supports(n: int, count: int, seed: int) -> np.ndarray:
    """Uniform sample of balanced functions (with replacement), seeded."""
    if n > MAX_N:
        raise DimensionError(f"n={n} beyond supported range")
    N = 2 ** n
    rng = np.random.default_rng(seed)
    order = np.argsort(rng.random((count, N)), axis=1)
    F = np.zeros((count, N))
    np.put_along_axis(F, order[:, : N // 2], 1.0, axis=1)
    return F


def all_supports(n: int) -> np.ndarray:
    """Every Boolean function on the n-cube as a (2^{2^n}, 2^n) 0/1 matrix."""
    if n > MAX_EXHAUSTIVE_N:
        raise DimensionError(f"all_supports capped at n={MAX_EXHAUSTIVE_N}")
    N = 2 ** n
    idx = np.arange(2 ** N, dtype=np.int64)
    return ((idx[:, None] >> np.arange(N)[None, :]) & 1).astype(float)


def noised(F: np.ndarray, n: int, rho: float) -> np.ndarray:
    """Rows of T_rho f for every function row of F (kernel is symmetric)."""
    return F @ noise_kernel(n, rho)


def _sorted_cumsums(T: np.ndarray):
    """Per row: values sorted decreasingly and prefix sums over 2^n cells."""
    V = -np.sort(-T, axis=1)
    N = T.shape[1]
    C = np.concatenate([np.zeros((T.shape[0], 1)), np.cumsum(V, axis=1) / N], axis=1)
    return V, C


def concentration_rows(T: np.ndarray, beta: float):
    """Greedy mass capture per row at weight budget beta."""
    N = T.shape[1]
    V, C = _sorted_cumsums(T)
    k = min(int(math.floor(beta * N)), N - 1)
    frac = beta * N - k
    if beta >= 1.0:
        return C[:, N]
    return C[:, k] + frac * V[:, k] / N


def dictator_distances(F: np.ndarray, n: int) -> np.ndarray:
    """Matrix of folded distances d~_i(f) for every row and coordinate."""
    N = 2 ** n
    signs = np.where((np.arange(N)[:, None] >> np.arange(n)[None, :]) & 1, 1.0, -1.0)
    fhat = (F @ signs) / N
    d = 0.5 - fhat
    return np.minimum(d, 1.0 - d)


def _phi_from_name(name: str) -> bounds.PhiSpec:
    if ":" in name:
        kind, q = name.split(":")
        return bounds.PHI_BY_NAME[kind](float(q))
    return bounds.PHI_BY_NAME[name]()


def _phi_values(name: str, T: np.ndarray) -> np.ndarray:
    phi = _phi_from_name(name)
    return np.asarray(phi.fn(T))


def envelope_check(n: int, rho: float, F: np.ndarray,
                   beta_points: int = 64, tol: float = 1e-9) -> CheckResult:
    """T_rho f is majorized by the theta_{1/2} profile: greedy mass capture
    never exceeds the envelope Theta(1/2, beta) on a beta grid."""
    T = noised(F, n, rho)
    grid = np.linspace(0.0, 1.0, beta_points)
    worst = -math.inf
    for beta in grid:
        env = bounds.big_theta(0.5, float(beta), rho)
        worst = max(worst, float(concentration_rows(T, float(beta)).max() - env))
    return CheckResult("majorization", n, rho, F.shape[0], worst, tol, worst <= tol)


def gamma_bound_check(n: int, rho: float, F: np.ndarray,
                      phis: Sequence[str] = GAMMA_PHIS,
                      tol: float = 1e-7) -> CheckResult:
    """Stability under each convex test never exceeds min_i Gamma(d~_i)."""
    N = 2 ** n
    T = noised(F, n, rho)
    dt = dictator_distances(F, n)
    keys = np.round(dt * N).astype(np.int64)
    unique = sorted(set(keys.flatten().tolist()))
    worst = -math.inf
    for name in phis:
        phi = _phi_from_name(name)
        table = {k: bounds.gamma_phi(k / N, rho, phi) for k in unique}
        gmin = np.vectorize(table.get)(keys).min(axis=1)
        stab = _phi_values(name, T).mean(axis=1)
        worst = max(worst, float((stab - gmin).max()))
    return CheckResult("gamma", n, rho, F.shape[0], worst, tol, worst <= tol)


def q_bound_check(n: int, rho: float, F: np.ndarray,
                  qs_upper: Sequence[float] = Q_UPPER,
                  qs_lower: Sequence[float] = Q_LOWER,
                  tol: float = 1e-10) -> CheckResult:
    """q-th noise moments against gamma_q, in both directions: upper bound
    for q > 1 at every coordinate (hence at the min), lower bound for
    0 < q < 1 (hence at the max)."""
    N = 2 ** n
    T = noised(F, n, rho)
    dt = dictator_distances(F, n)
    keys = np.round(dt * N).astype(np.int64)
    unique = sorted(set(keys.flatten().tolist()))
    worst = -math.inf
    for q in qs_upper:
        table = {k: bounds.gamma_q(k / N, rho, q) for k in unique}
        bound = np.vectorize(table.get)(keys).min(axis=1)
        moment = (T ** q).mean(axis=1)
        worst = max(worst, float((moment - bound).max()))
    for q in qs_lower:
        table = {k: bounds.gamma_q(k / N, rho, q) for k in unique}
        bound = np.vectorize(table.get)(keys).max(axis=1)
        moment = (T ** q).mean(axis=1)
        worst = max(worst, float((bound - moment).max()))
    return CheckResult("qstab", n, rho, F.shape[0], worst, tol, worst <= tol)


def ck_check(n: int, rho: float, F: np.ndarray, tol: float = 1e-9) -> CheckResult:
    """Symmetric 1-stability never exceeds the dictator value
    Phi_1^sym((1+rho)/2) (the conjecture at desk scale)."""
    T = noised(F, n, rho)
    stab = np.asarray(bounds.h(T)).mean(axis=1)
    worst = float((stab - bounds.h((1.0 + rho) / 2.0)).max())
    return CheckResult("ck", n, rho, F.shape[0], worst, tol, worst <= tol)


def local_optimality_check(n: int, rho: float, F: np.ndarray,
                           tol: float = 1e-9) -> CheckResult:
    """Functions within eps_star(rho) of some dictator have 1-stability
    at most the dictator value h((1-rho)/2)/2."""
    T = noised(F, n, rho)
    dt = dictator_distances(F, n)
    near = dt.min(axis=1) <= bounds.eps_star(rho)
    stab1 = xlogy(T, T).mean(axis=1)
    dict_val = 0.5 * float(bounds.h((1.0 - rho) / 2.0))
    if near.any():
        worst = float((stab1[near] - dict_val).max())
    else:
        worst = -math.inf
    return CheckResult("localopt", n, rho, int(near.sum()), worst, tol, worst <= tol)


_CHECK_FNS = {
    "majorization": envelope_check,
    "gamma": gamma_bound_check,
    "qstab": q_bound_check,
    "ck": ck_check,
    "localopt": local_optimality_check,
}


def run_checks(n: int, rhos: Sequence[float],
               checks: Sequence[str] = CHECK_NAMES,
               sample: int | None = None, seed: int | None = None):
    """Run the named checks for each rho over all balanced functions at
    dimension n (or a seeded sample when `sample` is given)."""
    for name in checks:
        if name not in _CHECK_FNS:
            raise ValueError(f"unknown check {name!r}; choose from {sorted(_CHECK_FNS)}")
    if sample is not None:
        if seed is None:
            raise ValueError("sampling requires a seed for reproducibility")
        F = sampled_balanced_supports(n, sample, seed)
    else:
        F = balanced_supports(n)
    results = []
    for rho in rhos:
        for name in checks:
            results.append(_CHECK_FNS[name](n, float(rho), F))
    return results
