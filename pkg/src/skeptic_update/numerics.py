"""Normal distribution helpers and a BFGS maximizer for smooth log-likelihoods.

Objectives follow one convention throughout: a callable taking a 1-d
parameter array and returning ``(value, gradient)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .errors import MaxIterationsWarning, NonFinite

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class ObjectiveEvaluation(NamedTuple):
    value: float
    gradient: np.ndarray


Objective = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


# ---------------------------------------------------------------------------
# Standard normal
# ---------------------------------------------------------------------------


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return out if out.ndim else float(out)


def std_normal_logpdf(x):
    x = np.asarray(x, dtype=float)
    out = -0.5 * x * x - _LOG_SQRT_2PI
    return out if out.ndim else float(out)


def std_normal_cdf(x):
    """Phi(x), computed from the complementary error function.

    erfc keeps full relative accuracy in the lower tail, so Phi(x) and
    Phi(-x) both stay accurate and sum to one to rounding.
    """
    x = np.asarray(x, dtype=float)
    out = special.ndtr(x)
    return out if out.ndim else float(out)


def std_normal_logcdf(x):
    x = np.asarray(x, dtype=float)
    out = special.log_ndtr(x)
    return out if out.ndim else float(out)


def mills_ratio(x):
    """phi(x) / Phi(x), stable for large negative x."""
    x = np.asarray(x, dtype=float)
    out = np.exp(std_normal_logpdf(x) - special.log_ndtr(x))
    return out if out.ndim else float(out)


def std_normal_ppf(p):
    p = np.asarray(p, dtype=float)
    out = special.ndtri(p)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceSpec:
    gtol: float = 1e-8
    ftol: float = 1e-12
    max_iter: int = 500


@dataclass(frozen=True)
class OptimResult:
    argmax: np.ndarray
    value: float
    iterations: int
    converged: bool
    gradient_norm: float
    gradient: np.ndarray
    message: str = ""


def _evaluate(objective: Objective, x: np.ndarray):
    value, grad = objective(x)
    return float(value), np.asarray(grad, dtype=float).reshape(x.shape)


def _finite(value, grad) -> bool:
    return math.isfinite(value) and bool(np.all(np.isfinite(grad)))


def maximize(objective: Objective, start, tol: ConvergenceSpec | None = None) -> OptimResult:
    """Maximize a smooth objective by BFGS ascent with backtracking.

    Every accepted step satisfies the Armijo condition, so the objective
    never decreases.  Convergence is declared when the gradient max-norm
    falls below ``tol.gtol`` or the relative change of the objective over an
    accepted step falls below ``tol.ftol``.  Hitting ``tol.max_iter`` emits
    :class:`MaxIterationsWarning` and returns the last iterate, flagged as
    not converged.
    """
    tol = tol or ConvergenceSpec()
    x = np.array(start, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise NonFinite("start point is not finite")
    f, g = _evaluate(objective, x)
    if not _finite(f, g):
        raise NonFinite(f"objective not finite at start point: value={f}")

    n = x.size
    # Work with the negated problem: minimize -f, gradient -g.
    H = np.eye(n)
    scaled = False
    c1 = 1e-4
    it = 0
    message = "maximum iterations reached"
    converged = False
    while it < tol.max_iter:
        gnorm = float(np.max(np.abs(g))) if n else 0.0
        if gnorm <= tol.gtol:
            converged, message = True, "gradient tolerance reached"
            break
        direction = H @ g  # ascent direction for f
        slope = float(g @ direction)
        if not slope > 0:
            H = np.eye(n)
            scaled = False
            direction = g.copy()
            slope = float(g @ g)

        step = 1.0
        if not scaled:
            # first step along the raw gradient: keep it modest in size
            step = min(1.0, 1.0 / max(gnorm, 1e-300))
        accepted = False
        while step > 1e-20:
            x_new = x + step * direction
            f_new, g_new = _evaluate(objective, x_new)
            if math.isfinite(f_new) and f_new >= f + c1 * step * slope:
                accepted = True
                break
            step *= 0.5
        it += 1
        if not accepted:
            # no ascent possible along the best direction: numerical optimum
            converged = gnorm <= 1e3 * tol.gtol or _flat(objective, x, f, direction)
            message = "line search could not improve the objective"
            break
        if not _finite(f_new, g_new):
            raise NonFinite(f"objective or gradient not finite at accepted point (iteration {it})")

        s = x_new - x
        y = g - g_new  # gradient change of the minimized function -f
        f_old = f
        x, f, g = x_new, f_new, g_new

        if abs(f - f_old) <= tol.ftol * max(1.0, abs(f)):
            converged, message = True, "relative objective change below tolerance"
            break

        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            if not scaled:
                H = (sy / float(y @ y)) * np.eye(n)
                scaled = True
            rho = 1.0 / sy
            Hy = H @ y
            H = H + ((sy + y @ Hy) * rho * rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))

    gnorm = float(np.max(np.abs(g))) if n else 0.0
    if not converged and it >= tol.max_iter:
        warnings.warn(
            f"maximize stopped after {it} iterations without converging (|g|={gnorm:.3g})",
            MaxIterationsWarning,
            stacklevel=2,
        )
    return OptimResult(
        argmax=x,
        value=f,
        iterations=it,
        converged=converged,
        gradient_norm=gnorm,
        gradient=g,
        message=message,
    )


def _flat(objective, x, f, direction) -> bool:
    """True when tiny moves along ``direction`` change f only at rounding level."""
    h = 1e-8 * max(1.0, float(np.linalg.norm(x))) / max(float(np.linalg.norm(direction)), 1e-300)
    f_plus, _ = _evaluate(objective, x + h * direction)
    return abs(f_plus - f) <= 1e-12 * max(1.0, abs(f))


# ---------------------------------------------------------------------------
# Derivative checks and curvature
# ---------------------------------------------------------------------------


def grad_check(objective: Objective, point) -> float:
    """Worst relative discrepancy between analytic and central-difference gradients.

    Step per coordinate is ``1e-6 * max(1, |theta_k|)``; discrepancies are
    scaled by ``max(1, |analytic_k|)``.
    """
    x = np.array(point, dtype=float).ravel()
    f0, g = _evaluate(objective, x)
    if not _finite(f0, g):
        raise NonFinite("objective not finite at check point")
    worst = 0.0
    for k in range(x.size):
        h = 1e-6 * max(1.0, abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        fp, _ = _evaluate(objective, xp)
        fm, _ = _evaluate(objective, xm)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NonFinite(f"objective not finite near check point (coordinate {k})")
        numeric = (fp - fm) / ((xp[k] - x[k]) + (x[k] - xm[k]))
        worst = max(worst, abs(numeric - g[k]) / max(1.0, abs(g[k])))
    return worst


def numeric_hessian(objective: Objective, point, rel_step: float = 1e-5) -> np.ndarray:
    """Symmetric central-difference Hessian built from the analytic gradient."""
    x = np.array(point, dtype=float).ravel()
    n = x.size
    H = np.empty((n, n))
    for k in range(n):
        h = rel_step * max(1.0, abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        _, gp = _evaluate(objective, xp)
        _, gm = _evaluate(objective, xm)
        H[:, k] = (gp - gm) / (xp[k] - xm[k])
    if not np.all(np.isfinite(H)):
        raise NonFinite("Hessian has non-finite entries")
    return 0.5 * (H + H.T)


def covariance_from_hessian(H: np.ndarray) -> np.ndarray:
    """Inverse of the observed information ``-H``."""
    info = -np.asarray(H, dtype=float)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(info)
    return 0.5 * (cov + cov.T)


def newton_polish(objective: Objective, result: OptimResult, max_steps: int = 3) -> tuple[OptimResult, np.ndarray]:
    """Refine a BFGS optimum with Newton steps on the numeric Hessian.

    A step is kept only if it does not lower the objective.  Returns the
    (possibly improved) result and the Hessian at the final point.
    """
    x, f, g = result.argmax, result.value, result.gradient
    H = numeric_hessian(objective, x)
    for _ in range(max_steps):
        if g.size == 0 or float(np.max(np.abs(g))) <= 1e-12:
            break
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            break
        x_new = x + step
        f_new, g_new = _evaluate(objective, x_new)
        if not (_finite(f_new, g_new) and f_new >= f):
            break
        improved = float(np.max(np.abs(g_new))) < float(np.max(np.abs(g)))
        x, f, g = x_new, f_new, g_new
        H = numeric_hessian(objective, x)
        if not improved:
            break
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    polished = OptimResult(
        argmax=x,
        value=f,
        iterations=result.iterations,
        converged=result.converged or gnorm <= 1e-8,
        gradient_norm=gnorm,
        gradient=g,
        message=result.message,
    )
    return polished, H
