"""Small numerical kernels shared by the curve, solver and verification code."""

from __future__ import annotations

from typing import Callable

import numpy as np


class NewtonDivergence(RuntimeError):
    """Raised when a damped Newton iteration fails to reach its tolerance."""


def complex_step_jacobian(fun: Callable[[np.ndarray], np.ndarray], u: np.ndarray,
                          step: float = 1e-30) -> np.ndarray:
    """Jacobian of a vectorized map by complex-step differentiation.

    ``fun`` must accept component-first arrays of shape ``(N, M)`` and be
    written with complex-safe operations. The result is exact to rounding.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    probe = u[:, None] + 1j * step * np.eye(n)
    return np.imag(fun(probe)).reshape(-1, n) / step


def fd_jacobian(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                f0: np.ndarray | None = None, rel_step: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian of a vector map."""
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = np.asarray(fun(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        dx = rel_step * (1.0 + abs(x[j]))
        xp = x.copy()
        xp[j] += dx
        jac[:, j] = (np.asarray(fun(xp), dtype=float) - f0) / dx
    return jac


def damped_newton(fun: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
                  tol: float = 1e-10, max_iter: int = 50,
                  jac: Callable[[np.ndarray], np.ndarray] | None = None,
                  min_damping: float = 1.0 / 1024) -> tuple[np.ndarray, float, int]:
    """Solve ``fun(x) = 0`` by Newton's method with step halving.

    The Jacobian is either supplied or built by forward differences and is
    reused while the residual keeps dropping fast (chord steps), which saves
    most of the function evaluations on small-amplitude problems.

    Returns
    -------
    x : ndarray
        The root.
    residual : float
        Max-norm of ``fun(x)``.
    iterations : int
        Number of Newton steps taken.
    """
    x = np.array(x0, dtype=float)
    f = np.asarray(fun(x), dtype=float)
    res = float(np.max(np.abs(f))) if f.size else 0.0
    if res <= tol:
        return x, res, 0
    J = None
    fresh = False
    for it in range(1, max_iter + 1):
        if J is None:
            J = jac(x) if jac is not None else fd_jacobian(fun, x, f)
            fresh = True
        try:
            dx = np.linalg.lstsq(J, -f, rcond=None)[0] if J.shape[0] != J.shape[1] \
                else np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular Jacobian at iteration {it}") from exc
        lam = 1.0
        while True:
            xn = x + lam * dx
            try:
                fn = np.asarray(fun(xn), dtype=float)
                rn = float(np.max(np.abs(fn)))
            except (ValueError, FloatingPointError, ArithmeticError):
                rn = np.inf
            if np.isfinite(rn) and rn < res:
                break
            lam *= 0.5
            if lam < min_damping:
                break
        if not (np.isfinite(rn) and rn < res):
            if not fresh:
                # stale Jacobian: rebuild and retry from the same point
                J = None
                continue
            raise NewtonDivergence(
                f"no descent after {it} iterations (residual {res:.3e})")
        contraction = rn / res
        x, f, res = xn, fn, rn
        if res <= tol:
            return x, res, it
        fresh = False
        if contraction > 0.25 or lam < 1.0:
            J = None
    raise NewtonDivergence(f"residual {res:.3e} above tolerance after {max_iter} iterations")


def rk4_path(rhs: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, length: float,
             max_step: float) -> np.ndarray:
    """Integrate the autonomous ODE ``y' = rhs(y)`` over ``[0, length]``.

    Classical fourth-order Runge-Kutta with the smallest number of equal
    steps not exceeding ``max_step``.
    """
    y = np.array(y0, dtype=float)
    if length == 0.0:
        return y
    n = max(2, int(np.ceil(abs(length) / max_step)))
    h = length / n
    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y
