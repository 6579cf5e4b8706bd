"""Damped Gauss-Newton (Levenberg-Marquardt) least squares for small models.

The solver minimizes ``0.5 * ||r(p)||**2`` with optional box bounds enforced by
projection.  Jacobians come from the problem when supplied, otherwise from
central differences.  Built-in curve models used by the screening and decay
fits live at the bottom of this module together with their analytic
Jacobians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from shadowfab.errors import InputError

ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class ResidualProblem:
    residual: ResidualFn
    x0: Sequence[float]
    lower: Sequence[float] | None = None
    upper: Sequence[float] | None = None
    jacobian: JacobianFn | None = None
    param_names: Sequence[str] | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        n = self.x0.size
        self.lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise InputError("bounds must match the parameter count")
        if np.any(self.lower > self.upper):
            raise InputError("lower bound exceeds upper bound")
        if np.any(self.x0 < self.lower) or np.any(self.x0 > self.upper):
            raise InputError("initial guess outside bounds")
        if self.param_names is not None and len(self.param_names) != n:
            raise InputError("param_names must match the parameter count")

    @property
    def parameter_count(self) -> int:
        return self.x0.size

    def name(self, j: int) -> str:
        return self.param_names[j] if self.param_names is not None else f"p[{j}]"

    def project(self, p: np.ndarray) -> np.ndarray:
        return np.clip(p, self.lower, self.upper)


@dataclass
class FitResult:
    params: np.ndarray
    residual_norm: float
    covariance: np.ndarray | None
    converged: bool
    iterations: int
    message: str = ""
    gradient_norm: float = math.nan
    condition_number: float = math.nan
    residuals: np.ndarray = field(default=None, repr=False)

    @property
    def stderr(self) -> np.ndarray | None:
        if self.covariance is None:
            return None
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def ill_conditioned(self) -> bool:
        return not math.isfinite(self.condition_number) or self.condition_number > 1e10


def finite_difference_jacobian(problem: ResidualProblem | ResidualFn, p: Sequence[float],
                               rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the residual at ``p``.

    The step for parameter j is ``rel_step * max(|p_j|, 1)``.
    """
    fn = problem.residual if isinstance(problem, ResidualProblem) else problem
    name = problem.name if isinstance(problem, ResidualProblem) else (lambda j: f"p[{j}]")
    p = np.asarray(p, dtype=float)
    r0 = np.atleast_1d(np.asarray(fn(p), dtype=float))
    if not np.all(np.isfinite(r0)):
        raise InputError("residual is not finite at the evaluation point")
    jac = np.empty((r0.size, p.size))
    for j in range(p.size):
        h = rel_step * max(abs(p[j]), 1.0)
        up = p.copy()
        dn = p.copy()
        up[j] += h
        dn[j] -= h
        r_up = np.atleast_1d(np.asarray(fn(up), dtype=float))
        r_dn = np.atleast_1d(np.asarray(fn(dn), dtype=float))
        if not (np.all(np.isfinite(r_up)) and np.all(np.isfinite(r_dn))):
            raise InputError(f"non-finite residual in difference stencil for parameter {name(j)}")
        jac[:, j] = (r_up - r_dn) / (2.0 * h)
    return jac


def _scaled_gradient(jac: np.ndarray, r: np.ndarray, g: np.ndarray) -> float:
    # largest |cos| between the residual and a Jacobian column (MINPACK gtol measure)
    rn = np.linalg.norm(r)
    if rn == 0.0:
        return 0.0
    cols = np.linalg.norm(jac, axis=0)
    safe = np.where(cols > 0, cols, 1.0)
    return float(np.max(np.abs(g) / (safe * rn)))


def _projected(g: np.ndarray, p: np.ndarray, problem: ResidualProblem) -> np.ndarray:
    g = g.copy()
    g[(p <= problem.lower) & (g > 0)] = 0.0
    g[(p >= problem.upper) & (g < 0)] = 0.0
    return g


def _bounded_trial(p: np.ndarray, step: np.ndarray, problem: ResidualProblem) -> np.ndarray:
    # A step that would cross a bound is shortened to half the distance to it,
    # so a single long step cannot pin a free parameter onto the boundary.
    # Parameters already at a bound, or within rounding of it, are clipped.
    lo, hi = problem.lower, problem.upper
    gap = np.where(step < 0, p - lo, np.where(step > 0, hi - p, np.inf))
    snap = 1e-12 * (np.abs(p) + 1.0)
    crossing = (np.abs(step) > gap) & (gap > snap)
    if np.any(crossing):
        alpha = float(np.min(gap[crossing] / np.abs(step[crossing])))
        step = 0.5 * alpha * step
    return problem.project(p + step)


def solve_least_squares(problem: ResidualProblem, max_iter: int = 200, step_tol: float = 1e-12,
                        grad_tol: float = 1e-8, damping_init: float = 1e-3,
                        rel_step: float = 1e-6, min_gain: float = 0.25,
                        callback: Callable[[int, np.ndarray, float], None] | None = None) -> FitResult:
    """Minimize ``0.5 * ||r(p)||**2`` from ``problem.x0``.

    Convergence is declared when an accepted step satisfies
    ``||dp|| <= step_tol * (||p|| + step_tol)`` or when the scaled projected
    gradient ``max_j |J_j . r| / (||J_j|| ||r||)`` drops below ``grad_tol``.
    A step crossing a bound is first shortened to half the distance to that
    bound; parameters sitting on a bound are clipped.  A trial is accepted when
    it lowers the objective by at least ``min_gain`` of the reduction predicted
    by the linearized model, which keeps a long undamped step from jumping into
    a distant, spurious basin.  Damping multiplies by 10 on a rejected step and divides by 10 on an
    accepted one.  A singular damped system only raises the damping.  When no
    damping level reduces the objective the fit counts as converged only if the
    residual has collapsed to rounding level.

    ``callback(iteration, params, cost)`` is invoked after every accepted step.
    """
    if max_iter <= 0 or step_tol <= 0 or grad_tol <= 0 or damping_init <= 0:
        raise InputError("solver options must be positive")
    if not 0.0 <= min_gain < 1.0:
        raise InputError("min_gain must lie in [0, 1)")

    def jac_at(p):
        if problem.jacobian is not None:
            return np.asarray(problem.jacobian(p), dtype=float)
        return finite_difference_jacobian(problem, p, rel_step)

    p = problem.x0.copy()
    r = np.atleast_1d(np.asarray(problem.residual(p), dtype=float))
    if not np.all(np.isfinite(r)):
        raise InputError("residual is not finite at the initial guess")
    m, n = r.size, p.size
    if m < n:
        raise InputError(f"{m} residuals cannot determine {n} parameters")

    cost = 0.5 * float(r @ r)
    cost0 = cost
    lam = damping_init
    converged = False
    message = "maximum iterations reached"
    it = 0
    jac = jac_at(p)
    g = _projected(jac.T @ r, p, problem)

    while it < max_iter:
        if _scaled_gradient(jac, r, g) <= grad_tol:
            converged, message = True, "gradient tolerance reached"
            break
        it += 1
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        floor = 1e-12 * max(diag.max(), 1e-300)
        diag = np.where(diag > floor, diag, max(floor, 1e-300))

        accepted = False
        while lam < 1e20:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -(jac.T @ r))
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            if not np.all(np.isfinite(step)):
                lam *= 10.0
                continue
            trial = _bounded_trial(p, step, problem)
            r_trial = np.atleast_1d(np.asarray(problem.residual(trial), dtype=float))
            if np.all(np.isfinite(r_trial)):
                cost_trial = 0.5 * float(r_trial @ r_trial)
                predicted = cost - 0.5 * float(np.sum((r + jac @ (trial - p)) ** 2))
                gain = (cost - cost_trial) / predicted if predicted > 0 else 0.0
                if cost_trial <= cost and (gain >= min_gain or cost_trial == cost):
                    accepted = True
                    break
            lam *= 10.0

        if not accepted:
            # an exact fit leaves only rounding noise, whose direction is arbitrary
            converged = cost <= 1e-24 * cost0
            message = "exact fit" if converged else "no further decrease possible"
            break

        dp = trial - p
        p, r, cost = trial, r_trial, cost_trial
        lam = max(lam / 10.0, 1e-15)
        if callback is not None:
            callback(it, p, cost)
        jac = jac_at(p)
        g = _projected(jac.T @ r, p, problem)
        if np.linalg.norm(dp) <= step_tol * (np.linalg.norm(p) + step_tol):
            converged, message = True, "step tolerance reached"
            break

    residual_norm = float(np.linalg.norm(r))
    sv = np.linalg.svd(jac, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf

    covariance = None
    if converged and m > n and math.isfinite(cond):
        sigma2 = residual_norm**2 / (m - n)
        try:
            cov = sigma2 * np.linalg.inv(jac.T @ jac)
            covariance = 0.5 * (cov + cov.T)
        except np.linalg.LinAlgError:
            covariance = None

    return FitResult(
        params=p,
        residual_norm=residual_norm,
        covariance=covariance,
        converged=converged,
        iterations=it,
        message=message,
        gradient_norm=float(np.linalg.norm(g)),
        condition_number=cond,
        residuals=r,
    )


@dataclass(frozen=True)
class CurveModel:
    """A scalar model ``y = f(x; p)`` with an analytic Jacobian ``df/dp``."""

    name: str
    param_names: tuple[str, ...]
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def problem(self, x: Sequence[float], y: Sequence[float], p0: Sequence[float],
                weights: Sequence[float] | None = None, lower=None, upper=None,
                analytic: bool = True) -> ResidualProblem:
        """Weighted residual problem ``w * (f(x; p) - y)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)

        def residual(p):
            return w * (self.func(x, p) - y)

        def jacobian(p):
            return w[:, None] * self.jac(x, p)

        return ResidualProblem(residual, p0, lower, upper,
                               jacobian if analytic else None, self.param_names)


def _inv_sq(x, p):
    a, b = p
    return a / (x - b) ** 2


def _inv_sq_jac(x, p):
    a, b = p
    d = x - b
    return np.column_stack([1.0 / d**2, 2.0 * a / d**3])


def _exp(x, p):
    amp, tau, base = p
    return amp * np.exp(-x / tau) + base


def _exp_jac(x, p):
    amp, tau, base = p
    e = np.exp(-x / tau)
    return np.column_stack([e, amp * x * e / tau**2, np.ones_like(x)])


def _damped_cos(x, p):
    amp, tau, freq, phase, base = p
    return amp * np.exp(-x / tau) * np.cos(2 * np.pi * freq * x + phase) + base


def _damped_cos_jac(x, p):
    amp, tau, freq, phase, base = p
    e = np.exp(-x / tau)
    arg = 2 * np.pi * freq * x + phase
    c, s = np.cos(arg), np.sin(arg)
    return np.column_stack([
        e * c,
        amp * x * e * c / tau**2,
        -amp * e * s * 2 * np.pi * x,
        -amp * e * s,
        np.ones_like(x),
    ])


INVERSE_SQUARE_OFFSET = CurveModel("inverse_square_offset", ("a", "b"), _inv_sq, _inv_sq_jac)
EXPONENTIAL_DECAY = CurveModel("exponential_decay", ("amplitude", "tau", "baseline"), _exp, _exp_jac)
DAMPED_COSINE = CurveModel("damped_cosine", ("amplitude", "tau", "frequency", "phase", "baseline"),
                           _damped_cos, _damped_cos_jac)

BUILTIN_MODELS = {m.name: m for m in (INVERSE_SQUARE_OFFSET, EXPONENTIAL_DECAY, DAMPED_COSINE)}
