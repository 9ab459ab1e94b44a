"""Limited-memory BFGS with a strong Wolfe line search.

Self-contained and deterministic: the same function, start point, and
options always produce the same iterates.  The caller's objective returns
value and gradient together, which suits the adjoint-differentiated
energies this package optimizes.

The search direction comes from the standard two-loop recursion over the
last `memory` curvature pairs, seeded with the scaled identity
gamma = s.y / y.y; steps satisfy the strong Wolfe conditions
(sufficient decrease c1, curvature c2) found by bracketing plus zoom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MinimizeOptions:
    grad_tol: float = 1e-9       # infinity norm of the gradient
    f_tol: float = 0.0           # relative f change; 0 disables that stop
    max_iters: int = 2000
    memory: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    bounds: tuple[np.ndarray, np.ndarray] | None = None


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    status: str                  # converged_grad | converged_f | max_iters | line_search_failure
    n_iters: int
    n_evals: int
    history: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status in ("converged_grad", "converged_f")


def _project(x: np.ndarray, bounds) -> np.ndarray:
    if bounds is None:
        return x
    lo, hi = bounds
    return np.clip(x, lo, hi)


class _CountedObjective:
    def __init__(self, fun_grad):
        self.fun_grad = fun_grad
        self.n_evals = 0

    def __call__(self, x):
        self.n_evals += 1
        f, g = self.fun_grad(x)
        return float(f), np.asarray(g, dtype=np.float64)


def _two_loop(grad, s_list, y_list):
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), a in zip(zip(s_list, y_list), reversed(alphas)):
        rho = 1.0 / float(y @ s)
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def _line_search(obj, x, f0, g0, d, opts, bounds):
    """Strong Wolfe bracketing plus zoom; returns (alpha, f, g, x) or None.

    Near machine precision the sufficient-decrease test loses meaning (the
    true decrease drops under float rounding of f), so a step is also
    accepted when the curvature condition holds and f is unchanged within
    a few ulps.  Without that escape no gradient tolerance tighter than
    roughly sqrt(eps) would ever be certified.
    """
    dphi0 = float(g0 @ d)
    if dphi0 >= 0:
        return None
    c1, c2 = opts.c1, opts.c2
    feps = 4.0 * np.finfo(np.float64).eps * (1.0 + abs(f0))
    best = None  # strictly decreasing fallback

    def phi(alpha):
        nonlocal best
        xt = _project(x + alpha * d, bounds)
        f, g = obj(xt)
        if f < f0 - feps and (best is None or f < best[1]):
            best = (alpha, f, g, xt)
        return f, g, xt

    def acceptable(alpha, f, dphi):
        curvature = abs(dphi) <= -c2 * dphi0
        armijo = f <= f0 + c1 * alpha * dphi0
        near_flat = f <= f0 + feps
        return curvature and (armijo or near_flat)

    def zoom(alo, flo, dlo, ahi, fhi):
        for _ in range(60):
            span = ahi - alo
            # quadratic model around the low end, safeguarded by bisection
            denom = 2.0 * (fhi - flo - dlo * span)
            if denom != 0.0:
                cand = alo - dlo * span * span / denom
            else:
                cand = alo + 0.5 * span
            lo_m, hi_m = (alo, ahi) if alo < ahi else (ahi, alo)
            pad = 0.1 * abs(span)
            cand = min(max(cand, lo_m + pad), hi_m - pad)
            f, g, xt = phi(cand)
            dphi = float(g @ d)
            if acceptable(cand, f, dphi):
                return cand, f, g, xt
            if f > f0 + c1 * cand * dphi0 or f >= flo:
                ahi, fhi = cand, f
            else:
                if dphi * (ahi - alo) >= 0:
                    ahi, fhi = alo, flo
                alo, flo, dlo = cand, f, dphi
            if abs(ahi - alo) < 1e-16:
                break
        return best

    alpha_prev, f_prev, dphi_prev = 0.0, f0, dphi0
    alpha = 1.0
    for it in range(30):
        f, g, xt = phi(alpha)
        dphi = float(g @ d)
        if acceptable(alpha, f, dphi):
            return alpha, f, g, xt
        if f > f0 + c1 * alpha * dphi0 or (it > 0 and f >= f_prev):
            return zoom(alpha_prev, f_prev, dphi_prev, alpha, f)
        if dphi >= 0:
            return zoom(alpha, f, dphi, alpha_prev, f_prev)
        alpha_prev, f_prev, dphi_prev = alpha, f, dphi
        alpha *= 2.0
    return best


def minimize(fun_grad, x0, options: MinimizeOptions | None = None) -> MinimizeResult:
    """Minimize f given a callable returning (f, grad) jointly."""
    opts = options or MinimizeOptions()
    obj = _CountedObjective(fun_grad)
    bounds = opts.bounds
    x = _project(np.asarray(x0, dtype=np.float64).copy(), bounds)
    f, g = obj(x)
    history = [f]

    if np.max(np.abs(g), initial=0.0) <= opts.grad_tol:
        return MinimizeResult(x, f, g, "converged_grad", 0, obj.n_evals, history)

    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    status = "max_iters"
    n_iters = 0
    for n_iters in range(1, opts.max_iters + 1):
        d = _two_loop(g, s_list, y_list)
        if float(g @ d) >= 0:
            # stale curvature; fall back to steepest descent
            s_list.clear()
            y_list.clear()
            d = -g
        hit = _line_search(obj, x, f, g, d, opts, bounds)
        if hit is None:
            status = "line_search_failure"
            break
        _, f_new, g_new, x_new = hit
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_list.append(s)
            y_list.append(y)
            if len(s_list) > opts.memory:
                s_list.pop(0)
                y_list.pop(0)
        delta_f = abs(f_new - f)
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if np.max(np.abs(g)) <= opts.grad_tol:
            status = "converged_grad"
            break
        if opts.f_tol > 0.0 and delta_f <= opts.f_tol * max(1.0, abs(f)):
            status = "converged_f"
            break
    return MinimizeResult(x, f, g, status, n_iters, obj.n_evals, history)
