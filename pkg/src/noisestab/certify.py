"""Grid/Lipschitz certificate that dictators maximize symmetric 1-stability.

The pipeline evaluates, per correlation rho: the threshold eps_star(rho);
omega_max(rho), the maximum of the isoperimetric-flavoured omega over
[0, 1/2 - eps_star(rho)]; the root t_rho of the concave reduced objective;
and the margin

    theta(rho) = (1 + rho - 4 rho^2 omega_max) phi((1-t_rho)/2)
               - (1 + t_rho - rho^2) phi((1-rho)/2),

with phi(s) = (s ln s + (1-s) ln(1-s))/s.  theta(rho) <= 0 is equivalent
to the bound Upsilon_bar(rho) <= Phi_1^sym((1+rho)/2), which states that
dictator functions maximize symmetric 1-stability among balanced Boolean
functions at that correlation.

The certificate: |theta'| <= M on the interval, so checking
theta(rho_k) < -delta on a grid of spacing delta/M proves theta < 0
everywhere in between.  Floating point is plain double precision; the
slack delta absorbs rounding, every root carries a residual check, and
evaluation order is fixed so certificates are bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .bounds import BracketError, bisect_root, eps_star, h

__version__ = "0.1.0"

#: Default certified interval and grid constants.
RHO_LO = 0.46
RHO_HI = 0.914
DELTA = 0.0016
LIPSCHITZ_M = 20.0

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_OMEGA_COEF = 4.0 * (math.pi - math.sqrt(2.0 * math.pi))


# ---------------------------------------------------------------------------
# scalar building blocks (numpy-aware where grids need them)
# ---------------------------------------------------------------------------

def varphi(t):
    """min of the two concentration-function bounds, folded to t <= 1/2:
    2 t^2 ln(1/t) against the two-branch linear-programming bound."""
    t = np.asarray(t, dtype=float)
    tt = np.minimum(t, 1.0 - t)
    if np.any(tt < -1e-12):
        raise ValueError("varphi requires t in [0, 1]")
    tt = np.clip(tt, 0.0, 0.5)
    curve = -2.0 * xlogy(tt * tt, np.where(tt > 0.0, tt, 1.0))
    linprog = np.where(tt <= 0.25, 2.0 * tt ** 1.5 - 2.0 * tt * tt, 0.5 * tt)
    out = np.minimum(curve, linprog)
    return float(out) if out.ndim == 0 else out


def omega(beta):
    """min{beta^2 + varphi(1/2 - beta), (1 + sqrt(1 + 4(pi - sqrt(2 pi)) beta))^2 / (8 pi)}."""
    beta = np.asarray(beta, dtype=float)
    if np.any((beta < -1e-12) | (beta > 0.5 + 1e-12)):
        raise ValueError("omega requires beta in [0, 1/2]")
    first = beta * beta + varphi(0.5 - beta)
    second = (1.0 + np.sqrt(1.0 + _OMEGA_COEF * beta)) ** 2 / (8.0 * math.pi)
    out = np.minimum(first, second)
    return float(out) if out.ndim == 0 else out


def phi_ratio(s: float) -> float:
    """phi(s) = Phi_1^sym(s)/s = (s ln s + (1-s) ln(1-s))/s on (0, 1)."""
    if not 0.0 < s < 1.0:
        raise ValueError("phi_ratio requires s in (0, 1)")
    return float(h(s)) / s


def phi_ratio_prime(s: float) -> float:
    """phi'(s) = -ln(1-s)/s^2."""
    if not 0.0 < s < 1.0:
        raise ValueError("phi_ratio_prime requires s in (0, 1)")
    return -math.log1p(-s) / (s * s)


def _golden_max(fn, lo: float, hi: float, tol: float = 1e-12):
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _max_omega_on(b_hi: float, grid_step: float = 1e-5):
    """Maximize omega on [0, b_hi]: dense grid plus golden refinement of
    the winning cell (the peak may be a kink, which golden section handles)."""
    if b_hi <= 0.0:
        return float(omega(0.0)), 0.0
    grid = np.arange(0.0, b_hi, grid_step)
    grid = np.append(grid, b_hi)
    vals = omega(grid)
    i = int(np.argmax(vals))
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, len(grid) - 1)])
    x, fx = _golden_max(lambda b: float(omega(b)), lo, hi)
    candidates = [(fx, x), (float(vals[i]), float(grid[i])),
                  (float(vals[0]), 0.0), (float(vals[-1]), b_hi)]
    best_val, best_arg = max(candidates)
    return best_val, best_arg


def omega_max(rho: float):
    """(max, argmax) of omega over [0, 1/2 - eps_star(rho)]."""
    return _max_omega_on(0.5 - eps_star(rho))


def t_rho(rho: float) -> float:
    """Root in (0, 1) of the stationarity equation of the reduced objective:
    -(1/2)(1 + rho - 4 rho^2 omega_max) phi'((1-t)/2) = phi((1-rho)/2)."""
    om, _ = omega_max(rho)
    return _t_rho_given(rho, om)


def _t_rho_given(rho: float, om: float) -> float:
    a_coef = 1.0 + rho - 4.0 * rho * rho * om
    target = phi_ratio((1.0 - rho) / 2.0)

    def fn(t):
        return -0.5 * a_coef * phi_ratio_prime((1.0 - t) / 2.0) - target

    root = bisect_root(fn, 1e-12, 1.0 - 1e-12, tol=1e-12)
    if abs(fn(root)) >= 1e-9:
        raise RuntimeError(f"t_rho residual too large at rho={rho}")
    return root


@dataclass(frozen=True)
class PointEval:
    """All per-rho quantities entering one certificate grid entry."""

    rho: float
    eps_star: float
    omega_max: float
    omega_argmax: float
    t_rho: float
    theta: float


def evaluate_point(rho: float) -> PointEval:
    """Evaluate eps_star, omega_max, t_rho and theta at one correlation.
    Nothing is cached across rho, so each entry is independently
    reproducible."""
    es = eps_star(rho)
    om, arg = _max_omega_on(0.5 - es)
    tr = _t_rho_given(rho, om)
    a_coef = 1.0 + rho - 4.0 * rho * rho * om
    theta = (a_coef * phi_ratio((1.0 - tr) / 2.0)
             - (1.0 + tr - rho * rho) * phi_ratio((1.0 - rho) / 2.0))
    return PointEval(rho, es, om, arg, tr, theta)


def theta_rho(rho: float) -> float:
    """The certificate margin theta(rho); negative certifies dictators."""
    return evaluate_point(rho).theta


def dictator_sym_one_stability(rho: float) -> float:
    """Phi_1^sym((1+rho)/2) = h((1-rho)/2), the dictator benchmark."""
    return float(h((1.0 - rho) / 2.0))


def upsilon_bar(rho: float) -> float:
    """max over t in [0, 1) of
    (1-rho)(1 + rho - 4 rho^2 omega_max) phi((1-t)/2) / (2(1 + t - rho^2)).

    The maximizer of this ratio objective differs from t_rho (which
    maximizes the difference objective behind theta); both maxima cross
    their thresholds together: theta(rho) <= 0 iff upsilon_bar(rho) <=
    dictator_sym_one_stability(rho), which is asserted here.
    """
    pt = evaluate_point(rho)
    coef = (1.0 - rho) * (1.0 + rho - 4.0 * rho * rho * pt.omega_max) / 2.0

    def objective(t):
        return coef * phi_ratio((1.0 - t) / 2.0) / (1.0 + t - rho * rho)

    ts = np.linspace(0.0, 1.0 - 1e-9, 20001)
    vals = np.array([objective(t) for t in ts])
    i = int(np.argmax(vals))
    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, len(ts) - 1)])
    _, best = _golden_max(objective, lo, hi)
    best = max(best, float(vals[i]))
    dict_val = dictator_sym_one_stability(rho)
    if (pt.theta <= 0.0) != (best <= dict_val) and abs(pt.theta) > 1e-12:
        raise AssertionError(
            f"sign equivalence violated at rho={rho}: theta={pt.theta}, "
            f"upsilon_bar={best}, dictator={dict_val}")
    return best


def theta_prime_analytic(rho: float) -> float:
    """The envelope form of theta'(rho), holding omega_max and t_rho fixed:
    (1 - 8 rho omega_max) phi((1-t_rho)/2) + 2 rho phi((1-rho)/2)
    + (1/2)(1 + t_rho - rho^2) phi'((1-rho)/2)."""
    pt = evaluate_point(rho)
    c = (1.0 - rho) / 2.0
    return ((1.0 - 8.0 * rho * pt.omega_max) * phi_ratio((1.0 - pt.t_rho) / 2.0)
            + 2.0 * rho * phi_ratio(c)
            + 0.5 * (1.0 + pt.t_rho - rho * rho) * phi_ratio_prime(c))


def lipschitz_margin(rho: float, step: float = 1e-6) -> float:
    """|theta'(rho)| by symmetric difference; must stay below the
    certificate constant M = 20 on the certified interval."""
    hi = theta_rho(rho + step)
    lo = theta_rho(rho - step)
    return abs(hi - lo) / (2.0 * step)


# ---------------------------------------------------------------------------
# the two-variable cross-check
# ---------------------------------------------------------------------------

def upsilon_gamma(z1: float, z2: float, beta: float, rho: float):
    """gamma(z1, z2, beta) together with its mass coordinates (p1, p2);
    returns (value, p1, p2), value = None when (z1, z2) is infeasible."""
    om = float(omega(beta))
    a_coef = 1.0 + rho - 4.0 * rho * rho * om
    den_mid = 1.0 + rho * z2 - rho * z1 - rho * rho
    den1 = 4.0 * (1.0 + 2.0 * rho * z1) * den_mid
    den2 = 4.0 * (1.0 - 2.0 * rho * z2) * den_mid
    p1 = (1.0 - rho) * (a_coef + 2.0 * beta * (1.0 + 2.0 * rho * z2 - rho * rho)) / den1
    p2 = (1.0 - rho) * (a_coef - 2.0 * beta * (1.0 - 2.0 * rho * z1 - rho * rho)) / den2
    feasible = (z1 <= z2 and 0.0 <= p1 <= 0.25 + beta / 2.0
                and 0.0 <= p2 <= 0.25 - beta / 2.0)
    if not feasible:
        return None, p1, p2
    val = (2.0 * p1 * float(h(0.5 + rho * z1))
           + 2.0 * p2 * float(h(0.5 + rho * z2)))  # Phi_1^sym(0) = 0
    return val, p1, p2


def upsilon_2d(beta: float, rho: float, grid: int = 400) -> float:
    """Grid maximization of gamma(z1, z2, beta) over the feasible box
    |z| < 1/(2 rho), z1 <= z2, with the mass constraints on p1, p2.

    The grid uses the interior points of a uniform subdivision, so doubling
    `grid` to 2*grid+1 yields a nested (never-decreasing) maximization.
    """
    if not 0.0 <= beta <= 0.5:
        raise ValueError("beta must lie in [0, 1/2]")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    half = 1.0 / (2.0 * rho)
    z = np.linspace(-half, half, grid + 2)[1:-1]
    om = float(omega(beta))
    a_coef = 1.0 + rho - 4.0 * rho * rho * om
    z1 = z[:, None]
    z2 = z[None, :]
    den_mid = 1.0 + rho * z2 - rho * z1 - rho * rho
    p1 = ((1.0 - rho) * (a_coef + 2.0 * beta * (1.0 + 2.0 * rho * z2 - rho * rho))
          / (4.0 * (1.0 + 2.0 * rho * z1) * den_mid))
    p2 = ((1.0 - rho) * (a_coef - 2.0 * beta * (1.0 - 2.0 * rho * z1 - rho * rho))
          / (4.0 * (1.0 - 2.0 * rho * z2) * den_mid))
    feasible = ((z1 <= z2) & (p1 >= 0.0) & (p1 <= 0.25 + beta / 2.0)
                & (p2 >= 0.0) & (p2 <= 0.25 - beta / 2.0))
    if not feasible.any():
        raise RuntimeError(
            f"empty feasible set for beta={beta}, rho={rho} at resolution {grid}")
    hz = np.asarray(h(0.5 + rho * z))
    values = 2.0 * p1 * hz[:, None] + 2.0 * p2 * hz[None, :]
    return float(values[feasible].max())


# ---------------------------------------------------------------------------
# the certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """Machine-checkable record of a grid verification of theta < -delta."""

    rho_lo: float
    rho_hi: float
    step: float
    delta: float
    lipschitz_m: float
    n_points: int
    worst_theta: float
    worst_rho: float
    passed: bool
    per_point: tuple | None
    tool_version: str
    failure_reason: str | None = None


def _grid(rho_lo: float, rho_hi: float, step: float):
    """Inclusive grid rho_lo + k*step, with rho_hi appended if off-grid."""
    if rho_hi < rho_lo:
        raise ValueError("rho_hi must not be below rho_lo")
    n_steps = int(math.floor((rho_hi - rho_lo) / step + 1e-9)) if rho_hi > rho_lo else 0
    points = [rho_lo + k * step for k in range(n_steps + 1)]
    if points[-1] < rho_hi - 1e-12:
        points.append(rho_hi)
    return points


def _point_tuple(rho: float):
    pt = evaluate_point(rho)
    return (pt.rho, pt.theta, pt.t_rho, pt.eps_star, pt.omega_max)


def verify_interval(rho_lo: float = RHO_LO, rho_hi: float = RHO_HI,
                    delta: float = DELTA, lipschitz_m: float = LIPSCHITZ_M,
                    step: float | None = None, keep_points: bool = True,
                    threads: int = 1) -> Certificate:
    """Verify theta(rho) < -delta on the inclusive grid of spacing `step`
    (default delta / lipschitz_m).  By the Lipschitz bound this certifies
    theta < 0 on all of [rho_lo, rho_hi].

    A user-supplied step coarser than delta / lipschitz_m cannot certify
    anything and forces a failed certificate; so does a grid secant slope
    above `lipschitz_m`, which would falsify the assumed constant.  Any
    evaluation error also fails closed.  Grid evaluation order is fixed;
    `threads` > 1 splits the grid across processes without changing
    results.
    """
    if delta <= 0 or lipschitz_m <= 0:
        raise ValueError("delta and lipschitz_m must be positive")
    required = delta / lipschitz_m
    if step is None:
        step = required
    if step <= 0:
        raise ValueError("step must be positive")
    points = _grid(rho_lo, rho_hi, step)

    failure = None
    rows = []
    try:
        if threads > 1 and len(points) > 1:
            chunk = max(1, len(points) // (threads * 8))
            with ProcessPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(_point_tuple, points, chunksize=chunk))
        else:
            rows = [_point_tuple(r) for r in points]
    except (BracketError, RuntimeError, ValueError) as exc:
        failure = f"grid evaluation failed: {exc}"

    if rows:
        worst_i = max(range(len(rows)), key=lambda i: rows[i][1])
        worst_theta, worst_rho = rows[worst_i][1], rows[worst_i][0]
    else:
        worst_theta, worst_rho = math.inf, rho_lo

    passed = failure is None and worst_theta < -delta
    if step > required * (1.0 + 1e-12):
        passed = False
        failure = failure or (
            f"step {step} exceeds delta/lipschitz_m = {required}; "
            "the Lipschitz argument does not cover the gaps")

    # The Lipschitz constant is an input, not an article of faith: every
    # secant between adjacent grid values equals theta' somewhere in the
    # gap, so a secant above M falsifies the covering argument.
    if failure is None and len(rows) > 1:
        worst_slope = max(
            abs(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(rows, rows[1:]))
        if worst_slope > lipschitz_m:
            passed = False
            failure = (f"observed |theta| secant slope {worst_slope} exceeds "
                       f"the assumed Lipschitz constant {lipschitz_m}")

    return Certificate(
        rho_lo=rho_lo, rho_hi=rho_hi, step=step, delta=delta,
        lipschitz_m=lipschitz_m, n_points=len(points),
        worst_theta=worst_theta, worst_rho=worst_rho, passed=passed,
        per_point=tuple(rows) if keep_points else None,
        tool_version=__version__, failure_reason=failure)


# ---------------------------------------------------------------------------
# serialization: flat JSON, floats at 17 significant digits
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return format(x, ".17g")
    if x is None:
        return "null"
    return '"' + str(x).replace("\\", "\\\\").replace('"', '\\"') + '"'


def certificate_to_json(cert: Certificate) -> str:
    """Render a certificate as a JSON document with deterministic float
    formatting (17 significant digits)."""
    fields = [
        ("rho_lo", cert.rho_lo), ("rho_hi", cert.rho_hi), ("step", cert.step),
        ("delta", cert.delta), ("lipschitz_m", cert.lipschitz_m),
        ("n_points", cert.n_points), ("worst_theta", cert.worst_theta),
        ("worst_rho", cert.worst_rho), ("pass", cert.passed),
        ("tool_version", cert.tool_version),
    ]
    lines = [f'  "{k}": {_fmt(v)}' for k, v in fields]
    if cert.failure_reason is not None:
        lines.append(f'  "failure_reason": {_fmt(cert.failure_reason)}')
    if cert.per_point is not None:
        rows = ",\n".join(
            "    [" + ", ".join(_fmt(v) for v in row) + "]"
            for row in cert.per_point)
        lines.append('  "per_point": [\n' + rows + "\n  ]")
    return "{\n" + ",\n".join(lines) + "\n}\n"
