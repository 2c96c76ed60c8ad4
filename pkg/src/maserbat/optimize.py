"""Bounded loss minimization: finite differences plus a projected quasi-Newton update.

The optimizer works on flat parameter vectors constrained to the box [0,1]^d
(for charging problems the layout is (c1, q1, c2, q2, ...)). Gradients are
central finite differences with probes clipped to the box; steps come from a
limited-memory quasi-Newton direction with backtracking, projected back onto
the box, with a plain projected-gradient fallback when the curvature model
fails to produce a decrease.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import MaserbatError, OptimizationError, ValidationError

_MEMORY = 10          # stored curvature pairs
_BACKTRACK_MAX = 40
_ARMIJO = 1e-4
_CURVATURE_MIN = 1e-12


@dataclass(frozen=True)
class OptOptions:
    fd_step: float = 1e-3
    max_iterations: int = 200
    loss_tolerance: float = 1e-8
    step_tolerance: float = 1e-8
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.fd_step < 0.1:
            raise ValidationError(f"fd_step must lie in (0, 0.1), got {self.fd_step}")
        if self.max_iterations < 1 or self.restarts < 1:
            raise ValidationError("max_iterations and restarts must be positive")


@dataclass
class OptResult:
    best_params: np.ndarray
    best_loss: float
    loss_history: np.ndarray     # accepted iterates of the best restart, non-increasing
    restart_losses: np.ndarray   # final loss per restart (inf where a restart failed)
    evaluations: int             # objective calls, gradient probes included
    reason: str = ""             # "tolerance" or "max_iterations"


def _clip(x):
    return np.clip(x, 0.0, 1.0)


def numerical_gradient(f, p, fd_step: float) -> np.ndarray:
    """Central differences with probes clipped to the box.

    Interior coordinates get the symmetric stencil; at an active bound the
    probe collapses onto the bound, leaving a one-sided difference over the
    actual separation.
    """
    p = np.asarray(p, dtype=float)
    grad = np.empty_like(p)
    for i in range(p.size):
        hi = min(p[i] + fd_step, 1.0)
        lo = max(p[i] - fd_step, 0.0)
        xp = p.copy()
        xm = p.copy()
        xp[i] = hi
        xm[i] = lo
        try:
            grad[i] = (f(xp) - f(xm)) / (hi - lo)
        except Exception as exc:
            raise OptimizationError(f"gradient probe failed at coordinate {i}: {exc}") from exc
    return grad


def _two_loop_direction(grad, s_list, y_list):
    d = -grad.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        a = (s @ d) / (s @ y)
        d -= a * y
        alphas.append(a)
    if s_list:
        s, y = s_list[-1], y_list[-1]
        d *= (s @ y) / (y @ y)
    for (s, y), a in zip(zip(s_list, y_list), reversed(alphas)):
        b = (y @ d) / (s @ y)
        d += (a - b) * s
    return d


def minimize(f, init, opts: OptOptions) -> OptResult:
    """Descend from a single starting point; every iterate stays in the box."""
    x = _clip(np.asarray(init, dtype=float))
    fx = f(x)
    evaluations = 1
    history = [fx]
    grad = numerical_gradient(f, x, opts.fd_step)
    evaluations += 2 * x.size
    s_list, y_list = [], []
    reason = "max_iterations"
    for _ in range(opts.max_iterations):
        d = _two_loop_direction(grad, s_list, y_list)
        xn, fn, n_ev = _line_search(f, x, fx, grad, d)
        evaluations += n_ev
        if xn is None:
            # no decrease along the quasi-Newton direction; try raw descent
            xn, fn, n_ev = _line_search(f, x, fx, grad, -grad)
            evaluations += n_ev
            if xn is None:
                reason = "tolerance"
                break
        grad_n = numerical_gradient(f, xn, opts.fd_step)
        evaluations += 2 * x.size
        s = xn - x
        y = grad_n - grad
        if s @ y > _CURVATURE_MIN * np.linalg.norm(s) * np.linalg.norm(y):
            s_list.append(s)
            y_list.append(y)
            if len(s_list) > _MEMORY:
                s_list.pop(0)
                y_list.pop(0)
        decrease = fx - fn
        step = float(np.linalg.norm(s))
        x, fx, grad = xn, fn, grad_n
        history.append(fx)
        if decrease < opts.loss_tolerance or step < opts.step_tolerance:
            reason = "tolerance"
            break
    return OptResult(
        best_params=x,
        best_loss=float(fx),
        loss_history=np.array(history),
        restart_losses=np.array([fx]),
        evaluations=evaluations,
        reason=reason,
    )


def _line_search(f, x, fx, grad, d):
    """Backtrack along the projected direction until sufficient decrease.

    Returns (None, None, evals) when no tried step decreases the loss, which
    also covers directions projected down to a zero step.
    """
    t = 1.0
    evaluations = 0
    for _ in range(_BACKTRACK_MAX):
        xn = _clip(x + t * d)
        if np.array_equal(xn, x):
            break
        fn = f(xn)
        evaluations += 1
        if fn <= fx - _ARMIJO * abs(grad @ (xn - x)) or fn < fx - 1e-14:
            return xn, fn, evaluations
        t *= 0.5
    return None, None, evaluations


def _restart_worker(args):
    # failures come back as values so a pool map and the sequential loop
    # behave identically
    f, x0, opts = args
    try:
        return minimize(f, x0, opts)
    except MaserbatError as exc:
        return exc


def multi_restart(f, dim: int, opts: OptOptions, jobs: int = 1) -> OptResult:
    """Best of `opts.restarts` runs of minimize from seeded uniform starts.

    All starting points are drawn up front from opts.seed, so the result is
    identical whether restarts run sequentially or on a process pool
    (jobs > 1 requires a picklable objective).
    """
    rng = np.random.default_rng(opts.seed)
    inits = rng.uniform(0.0, 1.0, size=(opts.restarts, dim))
    work = [(f, inits[i], opts) for i in range(opts.restarts)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_restart_worker, work))
    else:
        results = [_restart_worker(item) for item in work]
    failures = [r for r in results if isinstance(r, Exception)]
    if len(failures) == len(results):
        raise OptimizationError(
            f"all {len(results)} restarts failed; first failure: {failures[0]}"
        )
    restart_losses = np.array(
        [np.inf if isinstance(r, Exception) else r.best_loss for r in results]
    )
    best_i = int(np.argmin(restart_losses))
    best = results[best_i]
    return OptResult(
        best_params=best.best_params,
        best_loss=best.best_loss,
        loss_history=best.loss_history,
        restart_losses=restart_losses,
        evaluations=sum(r.evaluations for r in results if not isinstance(r, Exception)),
        reason=best.reason,
    )
