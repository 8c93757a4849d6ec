"""Operator-splitting QP solver.

Problems are given in the form

    minimize    1/2 z^T P z + q^T z
    subject to  A_eq z = b_eq,   G z <= h

and solved by a relaxed ADMM iteration on the equivalent two-sided form
``l <= A z <= u``.  Termination is by primal/dual residuals, primal
infeasibility is detected through a normalized certificate built from the
dual-variable increments, and converged solutions are polished by an
active-set KKT solve.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _admm_np

if os.environ.get("SECUREPLAN_NO_EXT"):
    _kernel = _admm_np
else:
    try:
        from . import _admm_cy as _kernel  # type: ignore[no-redef]
    except ImportError:
        _kernel = _admm_np


def active_backend() -> str:
    """Name of the inner-loop backend in use ('cython' or 'numpy')."""
    return _kernel.BACKEND


class QpStructuralError(Exception):
    """Malformed problem: bad shapes, asymmetric or indefinite P."""


@dataclass(frozen=True)
class QpProblem:
    P: np.ndarray
    q: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    G: np.ndarray | None = None
    h: np.ndarray | None = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        q = np.asarray(self.q, dtype=float).ravel()
        n = q.shape[0]
        if P.shape != (n, n):
            raise QpStructuralError(f"P is {P.shape}, expected ({n}, {n})")
        if np.max(np.abs(P - P.T), initial=0.0) > 1e-10:
            raise QpStructuralError("P is not symmetric within 1e-10")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "q", q)
        for mat, vec, name in ((self.A_eq, self.b_eq, "A_eq/b_eq"),
                               (self.G, self.h, "G/h")):
            if (mat is None) != (vec is None):
                raise QpStructuralError(f"{name} must be given together")
            if mat is not None:
                mat = np.atleast_2d(np.asarray(mat, dtype=float))
                vec = np.asarray(vec, dtype=float).ravel()
                if mat.shape != (vec.shape[0], n):
                    raise QpStructuralError(f"{name} shapes inconsistent")
        if self.A_eq is not None:
            object.__setattr__(self, "A_eq", np.atleast_2d(np.asarray(self.A_eq, float)))
            object.__setattr__(self, "b_eq", np.asarray(self.b_eq, float).ravel())
        if self.G is not None:
            object.__setattr__(self, "G", np.atleast_2d(np.asarray(self.G, float)))
            object.__setattr__(self, "h", np.asarray(self.h, float).ravel())

    @property
    def num_vars(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class QpSettings:
    eps_prim: float = 1e-6
    eps_dual: float = 1e-6
    eps_infeas: float = 1e-8
    max_iter: int = 50_000
    rho: float = 1.0
    rho_eq_scale: float = 1e3
    sigma: float = 1e-9
    alpha: float = 1.6
    check_every: int = 50
    adaptive_rho: bool = True
    polish: bool = True
    debug: bool = False


@dataclass
class QpSolution:
    status: str  # optimal | primal_infeasible | max_iterations
    z: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    fixed_point_residuals: list[float] = field(default_factory=list)


def dump_problem(problem: QpProblem, path) -> None:
    """Plain-text dump for offline reproduction."""
    with open(path, "w") as fh:
        for name in ("P", "q", "A_eq", "b_eq", "G", "h"):
            block = getattr(problem, name)
            fh.write(f"# {name}\n")
            if block is None:
                fh.write("none\n")
            else:
                np.savetxt(fh, np.atleast_2d(block), fmt="%.17g")


def _two_sided_form(problem: QpProblem):
    n = problem.num_vars
    rows, lows, ups = [], [], []
    if problem.A_eq is not None:
        rows.append(problem.A_eq)
        lows.append(problem.b_eq)
        ups.append(problem.b_eq)
    if problem.G is not None:
        rows.append(problem.G)
        lows.append(np.full(problem.h.shape, -np.inf))
        ups.append(problem.h)
    if not rows:
        rows = [np.zeros((1, n))]
        lows = [np.array([-np.inf])]
        ups = [np.array([np.inf])]
    A = np.vstack(rows)
    l = np.concatenate(lows)
    u = np.concatenate(ups)
    # row normalization: makes the iteration invariant to row scaling
    norms = np.linalg.norm(A, axis=1)
    norms[norms < 1e-12] = 1.0
    return A / norms[:, None], l / norms, u / norms


def _check_psd(P: np.ndarray, sigma: float) -> None:
    try:
        np.linalg.cholesky(P + (sigma + 1e-12) * np.eye(P.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise QpStructuralError("P is not positive semidefinite") from exc


def solve(problem: QpProblem, settings: QpSettings | None = None,
          warm_start: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
          ) -> QpSolution:
    """Solve the QP; see module docstring for the method."""
    s = settings or QpSettings()
    P, q = problem.P, problem.q
    n = problem.num_vars
    _check_psd(P, s.sigma)
    A, l, u = _two_sided_form(problem)
    m = A.shape[0]
    eq_mask = np.isfinite(l) & np.isfinite(u) & (u - l < 1e-12)

    if warm_start is not None:
        x = np.array(warm_start[0], dtype=float)
        z = np.array(warm_start[1], dtype=float)
        y = np.array(warm_start[2], dtype=float)
    else:
        x = np.zeros(n)
        z = np.zeros(m)
        y = np.zeros(m)
    np.clip(z, l, u, out=z)

    rho = s.rho
    chol = None
    fp_residuals: list[float] = []

    def factor(rho_val):
        R = np.where(eq_mask, s.rho_eq_scale * rho_val, rho_val)
        K = P + s.sigma * np.eye(n) + (A.T * R) @ A
        if _kernel.BACKEND == "cython":
            c, low = cho_factor(K, lower=True, check_finite=False)
            return np.asfortranarray(np.tril(c)), R
        return cho_factor(K, lower=True, check_finite=False), R

    chol, R = factor(rho)
    AT = np.ascontiguousarray(A.T)
    iters = 0
    status = "max_iterations"

    while iters < s.max_iter:
        batch = min(s.check_every, s.max_iter - iters)
        y_prev = y.copy()
        if s.debug:
            for _ in range(batch):
                w0 = z + y / R
                _run_one(chol, P, q, A, AT, l, u, R, s.sigma, s.alpha, x, z, y)
                w1 = z + y / R
                fp_residuals.append(float(np.sqrt(np.sum(R * (w1 - w0) ** 2))))
            iters += batch
        else:
            if _kernel.BACKEND == "cython":
                _kernel.run_epoch(chol, A, q, l, u, R, s.sigma, s.alpha,
                                  x, z, y, batch)
            else:
                _kernel.run_epoch(chol, P, q, A, AT, l, u, R, s.sigma, s.alpha,
                                  x, z, y, batch)
            iters += batch

        Ax = A @ x
        r_prim = float(np.max(np.abs(Ax - z), initial=0.0))
        r_dual = float(np.max(np.abs(P @ x + q + AT @ y), initial=0.0))
        if r_prim <= s.eps_prim and r_dual <= s.eps_dual:
            status = "optimal"
            break

        dy = y - y_prev
        if _primal_infeasible(A, l, u, dy, s.eps_infeas):
            status = "primal_infeasible"
            break

        if s.adaptive_rho and r_dual > 1e-14:
            ratio = np.sqrt(r_prim / r_dual)
            if ratio > 5.0 or ratio < 0.2:
                rho = float(np.clip(rho * ratio, 1e-6, 1e6))
                chol, R = factor(rho)

    if status == "optimal" and s.polish:
        polished = _polish(problem, A, l, u, x, y, s)
        if polished is not None:
            x = polished

    obj = float(0.5 * x @ P @ x + q @ x)
    r_prim = float(np.max(np.abs(A @ x - np.clip(A @ x, l, u)), initial=0.0))
    r_dual = float(np.max(np.abs(P @ x + q + AT @ y), initial=0.0))
    return QpSolution(status, x, obj, r_prim, r_dual, iters, fp_residuals)


def _run_one(chol, P, q, A, AT, l, u, R, sigma, alpha, x, z, y):
    if _kernel.BACKEND == "cython":
        _kernel.run_epoch(chol, A, q, l, u, R, sigma, alpha, x, z, y, 1)
    else:
        _kernel.run_epoch(chol, P, q, A, AT, l, u, R, sigma, alpha, x, z, y, 1)


def _primal_infeasible(A, l, u, dy, eps) -> bool:
    scale = float(np.max(np.abs(dy), initial=0.0))
    if scale < 1e-14:
        return False
    d = dy / scale
    if float(np.max(np.abs(A.T @ d), initial=0.0)) > eps:
        return False
    pos = np.maximum(d, 0.0)
    neg = np.minimum(d, 0.0)
    # certificate support must avoid infinite bounds
    if np.any(pos[~np.isfinite(u)] > eps) or np.any(-neg[~np.isfinite(l)] > eps):
        return False
    fin_u = np.where(np.isfinite(u), u, 0.0)
    fin_l = np.where(np.isfinite(l), l, 0.0)
    return float(fin_u @ pos + fin_l @ neg) < -eps


def _polish(problem: QpProblem, A, l, u, x, y, s: QpSettings):
    """Active-set KKT refinement of a converged iterate."""
    P, q = problem.P, problem.q
    n = problem.num_vars
    Ax = A @ x
    act_tol = 10 * max(s.eps_prim, 1e-9)
    active = (np.isfinite(u) & (Ax >= u - act_tol)) | \
             (np.isfinite(l) & (Ax <= l + act_tol))
    if not np.any(active):
        x_new = _solve_psd(P + s.sigma * np.eye(n), -q)
        return x_new if x_new is not None and _feasible(A, l, u, x_new, s) else None
    Aact = A[active]
    # bound actually attained on each active row
    b_act = np.where(np.isfinite(u[active]) & (Ax[active] >= u[active] - act_tol),
                     u[active], l[active])
    k = Aact.shape[0]
    KKT = np.block([[P + s.sigma * np.eye(n), Aact.T],
                    [Aact, -s.sigma * np.eye(k)]])
    rhs = np.concatenate([-q, b_act])
    try:
        sol = np.linalg.lstsq(KKT, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    x_new = sol[:n]
    old_kkt = _kkt_residual(problem, A, l, u, x)
    new_kkt = _kkt_residual(problem, A, l, u, x_new)
    if _feasible(A, l, u, x_new, s) and new_kkt <= old_kkt:
        return x_new
    return None


def _solve_psd(K, rhs):
    try:
        return cho_solve(cho_factor(K, lower=True), rhs)
    except np.linalg.LinAlgError:
        return None


def _feasible(A, l, u, x, s: QpSettings) -> bool:
    Ax = A @ x
    viol = np.maximum(Ax - u, 0.0) + np.maximum(l - Ax, 0.0)
    return float(np.max(viol, initial=0.0)) <= 10 * s.eps_prim


def _kkt_residual(problem: QpProblem, A, l, u, x) -> float:
    """Stationarity residual with the best least-squares multipliers."""
    Ax = A @ x
    tol = 1e-7
    active = (np.isfinite(u) & (Ax >= u - tol)) | (np.isfinite(l) & (Ax <= l + tol))
    grad = problem.P @ x + problem.q
    if not np.any(active):
        return float(np.max(np.abs(grad), initial=0.0))
    Aact = A[active]
    lam = np.linalg.lstsq(Aact.T, -grad, rcond=None)[0]
    return float(np.max(np.abs(grad + Aact.T @ lam), initial=0.0))
