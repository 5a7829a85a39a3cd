"""Closed-form and quadrature evaluation of the noise-stability bounds.

The central object is the small-set-expansion envelope Theta(alpha, beta):
with alpha = e^{-s^2/2} = 1 - e^{-shat^2/2} and beta = e^{-t^2/2} =
1 - e^{-that^2/2}, the envelope is the piecewise function

    exp(-(s^2+t^2-2 rho s t)/(2(1-rho^2)))               on the (s,t) band,
    alpha+beta-1+exp(-(shat^2+that^2-2 rho shat that)/(2(1-rho^2)))
                                                         on the (shat,that) band,
    alpha                                                for large beta,
    beta                                                 for small beta,

each expression active exactly on the region where it is the binding bound.
Its beta-derivative theta_alpha is the universal majorant of T_rho f over
all Boolean f of mean alpha: the concentration of T_rho f never exceeds
Theta, hence E[Phi(T_rho f)] <= int_0^1 Phi(theta_alpha) for convex Phi.

On top of the profile sit the bound families: Gamma(eps) (profile mixture
quadrature), gamma_q (hypercontractive closed form), gamma_one (its q->1
derivative), the threshold eps_star(rho), and the Gaussian analogues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import xlogy

from .normal import norm_cdf, norm_ppf

_CLAMP_LO = 1e-300
_CLAMP_HI = 1.0 - 1e-16


def _unit(t):
    """Clip to [0, 1]: absorbs ulp-level roundoff from convex mixtures."""
    return np.clip(t, 0.0, 1.0)


def h(t):
    """t ln t + (1-t) ln(1-t); the convex pair entropy with 0 ln 0 = 0."""
    t = _unit(t)
    return xlogy(t, t) + xlogy(1.0 - t, 1.0 - t)


def q_log(t: float, q: float) -> float:
    """Tsallis q-logarithm (t^{q-1} - 1)/(q - 1), equal to ln t at q = 1.

    Evaluated through expm1 so the q -> 1 limit is seamless; |q-1| below
    1e-9 is routed to the logarithm with its quadratic series correction.
    """
    if t <= 0:
        raise ValueError("q_log requires t > 0")
    lt = math.log(t)
    if q == 1.0:
        return lt
    d = q - 1.0
    if abs(d) < 1e-9:
        return lt * (1.0 + 0.5 * d * lt)
    return math.expm1(d * lt) / d


class BracketError(RuntimeError):
    """A root bracket did not change sign; no root was guessed."""


def bisect_root(fn: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-12, max_iter: int = 200) -> float:
    """Guaranteed bracketing bisection; never a derivative-based step."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# convex test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiSpec:
    """A convex test map Phi on [0,1] with optional derivative.

    Endpoint conventions follow 0 ln 0 = 0, so eval is defined on the
    closed interval for every built-in kind.
    """

    kind: str
    fn: Callable
    deriv: Callable | None
    convex: bool
    q: float | None = None

    def __call__(self, t):
        return self.fn(t)


def phi_q_asymmetric(q: float) -> PhiSpec:
    """Phi_q(t) = t ln_q t = (t^q - t)/(q - 1)."""
    if q <= 0:
        raise ValueError("q must be positive")
    if q == 1.0:
        return phi_one_asymmetric()
    d = q - 1.0

    def fn(t):
        t = _unit(t)
        return (np.power(t, q) - t) / d

    def deriv(t):
        return (q * np.power(t, q - 1.0) - 1.0) / d

    return PhiSpec("q-asym", fn, deriv, convex=True, q=q)


def phi_q_symmetric(q: float) -> PhiSpec:
    """Phi_q^sym(t) = t ln_q t + (1-t) ln_q (1-t)."""
    base = phi_q_asymmetric(q)

    def fn(t):
        return base.fn(t) + base.fn(1.0 - t)

    def deriv(t):
        return base.deriv(t) - base.deriv(1.0 - t)

    return PhiSpec("q-sym", fn, deriv, convex=True, q=q)


def phi_one_asymmetric() -> PhiSpec:
    """Phi_1(t) = t ln t."""
    return PhiSpec("one-asym", lambda t: xlogy(_unit(t), _unit(t)),
                   lambda t: np.log(t) + 1.0, convex=True, q=1.0)


def phi_one_symmetric() -> PhiSpec:
    """Phi_1^sym(t) = t ln t + (1-t) ln (1-t)."""
    return PhiSpec("one-sym", h, lambda t: np.log(t) - np.log(1.0 - t),
                   convex=True, q=1.0)


def phi_custom(fn: Callable, deriv: Callable | None = None,
               convex: bool = True) -> PhiSpec:
    return PhiSpec("custom", fn, deriv, convex=convex)


PHI_BY_NAME = {
    "one-sym": phi_one_symmetric,
    "one-asym": phi_one_asymmetric,
    "q-sym": phi_q_symmetric,
    "q-asym": phi_q_asymmetric,
}


# ---------------------------------------------------------------------------
# the envelope Theta and its profile
# ---------------------------------------------------------------------------

class ProfileRegionError(RuntimeError):
    """No envelope clause classified the requested point."""


def _s_of(x: float) -> float:
    """s with x = e^{-s^2/2}, clamped away from the endpoints."""
    x = min(max(x, _CLAMP_LO), _CLAMP_HI)
    return math.sqrt(-2.0 * math.log(x))


def _s_of_one_minus(x: float) -> float:
    """s with 1-x = e^{-s^2/2}, via log1p for accuracy near x = 0."""
    x = min(max(x, 1.0 - _CLAMP_HI), 1.0 - _CLAMP_LO)
    return math.sqrt(-2.0 * math.log1p(-x))


def _region_edges(alpha: float, rho: float):
    """Beta values of t = rho*s, t = s/rho, that = rho*shat, that = shat/rho."""
    r2 = rho * rho
    om_alpha = 1.0 - alpha
    return (alpha ** r2,                 # t = rho s   (E1 right edge)
            alpha ** (1.0 / r2),         # t = s/rho   (E1 left edge)
            1.0 - om_alpha ** r2,        # that = rho shat   (E2 left edge)
            1.0 - om_alpha ** (1.0 / r2))  # that = shat/rho (E2 right edge)


def _classify(alpha: float, beta: float, rho: float) -> int:
    """Active clause at an interior point: 1 the (s,t) exponential, 2 the
    (shat,that) exponential, 3 the constant alpha, 4 the identity beta.
    Ties go to the lowest clause number."""
    b_rs, b_sr, b_hrs, b_hsr = _region_edges(alpha, rho)
    in_e1 = b_sr <= beta <= b_rs
    in_e2 = b_hrs <= beta <= b_hsr
    if in_e1 and in_e2:
        return 1 if beta <= 1.0 - alpha else 2
    if in_e1:
        return 1
    if in_e2:
        return 2
    if beta >= b_rs and beta >= b_hsr:
        return 3
    if beta <= b_sr and beta <= b_hrs:
        return 4
    raise ProfileRegionError(
        f"no envelope clause covers alpha={alpha}, beta={beta}, rho={rho}")


def big_theta(alpha: float, beta: float, rho: float) -> float:
    """The small-set-expansion envelope Theta(alpha, beta) at correlation rho.

    Symmetric in (alpha, beta); Theta(alpha, 1) = alpha, Theta(alpha, 0) = 0;
    reduces to alpha*beta at rho = 0 and min(alpha, beta) at rho = 1.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if alpha <= 0.0 or beta <= 0.0:
        return 0.0
    if alpha >= 1.0:
        return min(beta, 1.0)
    if beta >= 1.0:
        return alpha
    if rho * rho == 0.0:  # including underflowing rho
        return alpha * beta
    if rho == 1.0:
        return min(alpha, beta)
    clause = _classify(alpha, beta, rho)
    omr = 1.0 - rho * rho
    if clause == 1:
        s, t = _s_of(alpha), _s_of(beta)
        return math.exp(-(s * s + t * t - 2.0 * rho * s * t) / (2.0 * omr))
    if clause == 2:
        sh, th = _s_of_one_minus(alpha), _s_of_one_minus(beta)
        return alpha + beta - 1.0 + math.exp(
            -(sh * sh + th * th - 2.0 * rho * sh * th) / (2.0 * omr))
    if clause == 3:
        return alpha
    return beta


def _clause_value(alpha: float, beta: float, rho: float, clause: int) -> float:
    """The derivative formula of one envelope clause, regardless of region."""
    omr = 1.0 - rho * rho
    if clause == 1:
        s, t = _s_of(alpha), _s_of(beta)
        return (t - rho * s) / (omr * t) * math.exp(
            -(s - rho * t) ** 2 / (2.0 * omr))
    if clause == 2:
        sh, th = _s_of_one_minus(alpha), _s_of_one_minus(beta)
        return 1.0 - (th - rho * sh) / (omr * th) * math.exp(
            -(sh - rho * th) ** 2 / (2.0 * omr))
    if clause == 3:
        return 0.0
    return 1.0


def _profile_value(alpha: float, beta: float, rho: float) -> float:
    """d Theta / d beta through the clause active at (alpha, beta)."""
    if beta <= 0.0:
        return 1.0
    if beta >= 1.0:
        return 0.0
    return _clause_value(alpha, beta, rho, _classify(alpha, beta, rho))


@dataclass(frozen=True)
class ThetaProfile:
    """The profile theta_alpha = dTheta/dbeta for fixed (alpha, rho).

    Nonincreasing from 1 to 0 with integral alpha.  `clause_boundaries`
    lists every beta where the active clause changes; all of them are
    continuity points except `jump_beta` = 1 - alpha, where the envelope
    has a genuine kink and the profile steps down.
    """

    alpha: float
    rho: float
    s: float
    s_hat: float
    clause_boundaries: tuple
    jump_beta: float | None

    def value(self, beta: float) -> float:
        a, r = self.alpha, self.rho
        if a <= 0.0:
            return 0.0
        if a >= 1.0:
            return 1.0
        if r * r == 0.0:
            return a
        if r == 1.0:
            return 1.0 if beta <= a else 0.0
        return _profile_value(a, beta, r)

    __call__ = value

    def envelope(self, beta: float) -> float:
        return big_theta(self.alpha, beta, self.rho)

    def integral(self) -> float:
        """Exact mass: Theta(alpha, 1) - Theta(alpha, 0) = alpha."""
        return self.envelope(1.0) - self.envelope(0.0)

    def step_spectrum(self, cells: int):
        """Cell-averaged step approximation with exact total mass alpha.

        Values are the exact envelope increments over a uniform grid, so
        the partial sums of the result agree with Theta at every cell edge.
        """
        from .cube import StepSpectrum
        edges = np.linspace(0.0, 1.0, cells + 1)
        theta = np.array([self.envelope(b) for b in edges])
        vals = np.sort(np.maximum(np.diff(theta) * cells, 0.0))[::-1]
        mass = 1.0 / cells
        steps = []
        for v in vals:
            v = float(v)
            if steps and steps[-1][1] - v <= 1e-12:
                m0, v0 = steps[-1]
                steps[-1] = [m0 + mass, (m0 * v0 + mass * v) / (m0 + mass)]
            else:
                steps.append([mass, v])
        return StepSpectrum(tuple((m, v) for m, v in steps))

    def boundary_gaps(self) -> list:
        """(beta, gap) at each continuity boundary, where gap is the
        difference of the two adjacent clause formulas evaluated exactly at
        the boundary (a relative probe picks the neighbouring clauses)."""
        out = []
        for b in self.clause_boundaries:
            if self.jump_beta is not None and b == self.jump_beta:
                continue
            if not 1e-12 < b < 1.0 - 1e-12:
                continue
            probe = max(1e-12, 1e-9 * min(b, 1.0 - b))
            left = _classify(self.alpha, b - probe, self.rho)
            right = _classify(self.alpha, b + probe, self.rho)
            gap = abs(_clause_value(self.alpha, b, self.rho, left)
                      - _clause_value(self.alpha, b, self.rho, right))
            out.append((b, gap))
        return out


def theta_profile(alpha: float, rho: float) -> ThetaProfile:
    """Construct the profile theta_alpha for correlation rho."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if alpha <= 0.0 or alpha >= 1.0 or rho * rho == 0.0:
        return ThetaProfile(alpha, rho, 0.0, 0.0, (), None)
    if rho == 1.0:
        return ThetaProfile(alpha, rho, _s_of(alpha), _s_of_one_minus(alpha),
                            (alpha,), None)
    b_rs, b_sr, b_hrs, b_hsr = _region_edges(alpha, rho)
    s, sh = _s_of(alpha), _s_of_one_minus(alpha)
    # The clause switch at beta = 1 - alpha is a jump only when both
    # exponential clauses are admissible there, i.e. rho <= min(s/sh, sh/s).
    jump = 1.0 - alpha if rho <= min(s / sh, sh / s) else None
    bounds = sorted(b for b in {b_rs, b_sr, b_hrs, b_hsr, 1.0 - alpha}
                    if 0.0 < b < 1.0)
    return ThetaProfile(alpha, rho, s, sh, tuple(bounds), jump)


@dataclass(frozen=True)
class ThetaMixture:
    """Pointwise nonnegative combination of profiles: sum_i lam_i theta_i."""

    lambdas: tuple
    profiles: tuple

    def value(self, beta: float) -> float:
        return sum(l * p.value(beta) for l, p in zip(self.lambdas, self.profiles))

    __call__ = value

    @property
    def clause_boundaries(self) -> tuple:
        out = set()
        for p in self.profiles:
            out.update(p.clause_boundaries)
        return tuple(sorted(out))

    def integral(self) -> float:
        return sum(l * p.alpha for l, p in zip(self.lambdas, self.profiles))


def theta_mixture(lambdas: Sequence[float], alphas: Sequence[float],
                  rho: float) -> ThetaMixture:
    if len(lambdas) != len(alphas):
        raise ValueError("weight and mean vectors must have equal length")
    if any(l < 0 for l in lambdas):
        raise ValueError("weights must be nonnegative")
    return ThetaMixture(tuple(float(l) for l in lambdas),
                        tuple(theta_profile(a, rho) for a in alphas))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_QUAD_LIMIT = 200


def _integrate_unit(fn: Callable[[float], float], inner_points,
                    epsabs: float = 1e-12) -> float:
    """Adaptive quadrature over [0,1] with forced subdivision points."""
    edges = [0.0] + sorted(p for p in set(inner_points) if 0.0 < p < 1.0) + [1.0]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0.0:
            continue
        val, _ = quad(fn, lo, hi, epsabs=epsabs, epsrel=1e-11, limit=_QUAD_LIMIT)
        total += val
    return total


def gamma_phi(eps: float, rho: float, phi: PhiSpec) -> float:
    """The mixture-profile bound Gamma(eps) on the Phi-stability of any
    balanced function at dictator distance eps:

        (1/2) int_0^1 Phi(cp th_{1-eps} + cm th_eps)
                    + Phi(cm th_{1-eps} + cp th_eps) dbeta,

    cp = (1+rho)/2, cm = (1-rho)/2.  Gamma(0) is the dictator stability
    and Gamma(eps) = Gamma(1-eps).
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if not phi.convex:
        raise ValueError("Gamma requires a convex test function")
    cp, cm = (1.0 + rho) / 2.0, (1.0 - rho) / 2.0
    if eps in (0.0, 1.0):
        return 0.5 * (float(phi(cp)) + float(phi(cm)))
    m_main = theta_mixture((cp, cm), (1.0 - eps, eps), rho)
    m_swap = theta_mixture((cm, cp), (1.0 - eps, eps), rho)

    def integrand(beta):
        return 0.5 * (float(phi(m_main.value(beta))) + float(phi(m_swap.value(beta))))

    points = set(m_main.clause_boundaries)
    return _integrate_unit(integrand, points)


def gamma_vec(eps: Sequence[float], k: int, rho: float, phi: PhiSpec) -> float:
    """Vector bound over restrictions to a k-coordinate subcube.

    `eps` is indexed by assignment mask m in [0, 2^k): bit j of m set means
    the j-th subcube coordinate equals +1.  The weight between assignments
    at Hamming distance d is cp^{k-d} cm^d; each weight row sums to 1.
    """
    if len(eps) != 2 ** k:
        raise ValueError("eps must have length 2^k")
    if any(not 0.0 <= e <= 1.0 for e in eps):
        raise ValueError("entries of eps must lie in [0, 1]")
    cp, cm = (1.0 + rho) / 2.0, (1.0 - rho) / 2.0
    profiles = {e: theta_profile(e, rho) for e in set(eps)}
    total = 0.0
    for a_mask in range(2 ** k):
        weights = []
        for b_mask in range(2 ** k):
            d = bin(a_mask ^ b_mask).count("1")
            w = cp ** (k - d) * (cm ** d if d else 1.0)
            weights.append(w)
        if abs(sum(weights) - 1.0) > 1e-12:
            raise AssertionError("weight row does not sum to 1")
        mix = ThetaMixture(tuple(weights), tuple(profiles[e] for e in eps))

        def integrand(beta, mix=mix):
            return float(phi(mix.value(beta)))

        total += _integrate_unit(integrand, mix.clause_boundaries)
    return total / 2 ** k


def gamma_q(eps: float, rho: float, q: float) -> float:
    """Hypercontractive closed form bounding the q-th noise moment:

        (1/2)(e + cp^p (1-2e))^{q/p} + (1/2)(e + cm^p (1-2e))^{q/p},

    p = 1 + (q-1) rho^2, e = min(eps, 1-eps).  Upper bound for q > 1,
    lower bound for 0 < q < 1.
    """
    if q <= 0 or q == 1.0:
        raise ValueError("gamma_q requires q > 0, q != 1 (use gamma_one at 1)")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    e = min(eps, 1.0 - eps)
    p = 1.0 + (q - 1.0) * rho * rho
    cp, cm = (1.0 + rho) / 2.0, (1.0 - rho) / 2.0
    up = e + cp ** p * (1.0 - 2.0 * e)
    um = e + cm ** p * (1.0 - 2.0 * e)
    return 0.5 * up ** (q / p) + 0.5 * um ** (q / p)


def gamma_one(eps: float, rho: float) -> float:
    """d/dq of gamma_q at q = 1; bounds E[(T_rho f) ln (T_rho f)]:

        (1/2)(1-rho^2) h((1-rho)/2 + rho e) + (1/2 - e) rho^2 h((1-rho)/2).
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    e = min(eps, 1.0 - eps)
    c = (1.0 - rho) / 2.0
    return (0.5 * (1.0 - rho * rho) * float(h(c + rho * e))
            + (0.5 - e) * rho * rho * float(h(c)))


def eps_star(rho: float) -> float:
    """Threshold distance below which gamma_one certifies dictator
    optimality: the unique root in (0, 1/2) of

        h((1-rho)/2 + rho e) = (1 + 2 rho^2 e / (1-rho^2)) h((1-rho)/2).
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("eps_star requires rho in (0, 1)")
    c = (1.0 - rho) / 2.0
    hc = float(h(c))
    coef = 2.0 * rho * rho / (1.0 - rho * rho)

    def fn(e):
        return float(h(c + rho * e)) - (1.0 + coef * e) * hc

    # fn vanishes to second order at 0, so at very small rho the value at
    # the nominal left anchor sits below the rounding floor; walk the
    # anchor up until the sign is resolved, never guessing a root
    lo = 1e-12
    while fn(lo) >= 0.0:
        lo *= 1e3
        if lo >= 0.1:
            raise BracketError(f"no negative anchor for eps_star at rho={rho}")
    root = bisect_root(fn, lo, 0.5 - 1e-12, tol=1e-12)
    if abs(fn(root)) >= 1e-10:
        raise RuntimeError(f"eps_star residual too large at rho={rho}")
    return root


def gamma_asymptotic(eps: float, rho: float, phi: PhiSpec) -> float:
    """Stated small-eps expansion of Gamma: the dictator stability minus
    (rho/4)(Phi'(cp) - Phi'(cm)) (2 ln(1/eps))^{3/2} eps."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if phi.deriv is None:
        raise ValueError("gamma_asymptotic needs the derivative of phi")
    cp, cm = (1.0 + rho) / 2.0, (1.0 - rho) / 2.0
    head = 0.5 * (float(phi(cp)) + float(phi(cm)))
    slope = float(phi.deriv(cp)) - float(phi.deriv(cm))
    return head - (rho / 4.0) * slope * (2.0 * math.log(1.0 / eps)) ** 1.5 * eps


# ---------------------------------------------------------------------------
# Gaussian analogues
# ---------------------------------------------------------------------------

def gaussian_theta(alpha: float, beta: float, rho: float) -> float:
    """Ornstein-Uhlenbeck profile Psi((Psi^{-1}(alpha) - rho Psi^{-1}(beta))
    / sqrt(1-rho^2)); endpoint inputs return their limits explicitly."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("gaussian_theta requires rho in [0, 1)")
    if alpha <= 0.0:
        return 0.0
    if alpha >= 1.0:
        return 1.0
    if beta <= 0.0:
        return 1.0
    if beta >= 1.0:
        return 0.0
    if rho == 0.0:
        return alpha
    arg = (norm_ppf(alpha) - rho * norm_ppf(beta)) / math.sqrt(1.0 - rho * rho)
    return norm_cdf(arg)


def borell_bound(alpha: float, rho: float, phi: PhiSpec) -> float:
    """Gaussian Phi-stability bound int_0^1 Phi(gaussian_theta) dbeta,
    attained by the half-space indicator of measure alpha."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("borell_bound requires rho in [0, 1)")
    if alpha <= 0.0 or alpha >= 1.0:
        return float(phi(min(max(alpha, 0.0), 1.0)))
    if rho == 0.0:
        return float(phi(alpha))

    def integrand(beta):
        return float(phi(gaussian_theta(alpha, beta, rho)))

    return _integrate_unit(integrand, {alpha}, epsabs=1e-11)
