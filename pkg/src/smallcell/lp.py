"""Dense two-phase revised simplex returning primal values and dual prices.

Dual sign convention: ``duals[i]`` is the shadow price of row ``i``, the rate of
change of the optimal objective per unit increase of its right-hand side.
Hence for a minimisation a ``>=`` row has a nonnegative dual and a ``<=`` row a
nonpositive one; for a maximisation the signs flip.  Reduced costs follow the
same "objective sense" convention (``c_j - A_j^T y``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64
DEGENERATE_RUN = 30


class SolverError(RuntimeError):
    """Numerical breakdown; never returned as a (wrong) optimal status."""


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


_SENSES = ("<=", ">=", "=")


@dataclass
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    maximize: bool = False
    var_names: list[str] | None = None
    row_names: list[str] | None = None

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        m = self.A.shape[0]
        if self.b.size != m or len(self.senses) != m:
            raise ValueError("A, b and senses disagree on the number of rows")
        if any(s not in _SENSES for s in self.senses):
            raise ValueError(f"senses must be in {_SENSES}")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if not (np.isfinite(self.c).all() and np.isfinite(self.A).all() and np.isfinite(self.b).all()):
            raise ValueError("coefficients must be finite")
        if not np.isfinite(self.lower).all():
            raise ValueError("lower bounds must be finite")
        if (self.upper < self.lower).any():
            raise ValueError("upper bound below lower bound")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class LpSolution:
    status: LpStatus
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reduced_costs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    upper_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Simplex:
    """Revised simplex on ``min c x, A x = b, x >= 0`` with ``b >= 0``.

    Keeps an explicit basis inverse, updated by elementary row operations and
    refactorised periodically.  Pricing is Dantzig's rule, switching to
    Bland's rule during runs of degenerate pivots.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], max_iter: int):
        self.A = A
        self.b = b
        self.m, self.N = A.shape
        self.basis = list(basis)
        self.max_iter = max_iter
        self.iterations = 0
        self.refactor()

    def refactor(self) -> None:
        if self.m == 0:
            self.Binv = np.zeros((0, 0))
            self.xB = np.zeros(0)
            return
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis") from exc
        if not np.isfinite(self.Binv).all():
            raise SolverError("non-finite basis inverse")
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < FEAS_TOL * 1e-3] = 0.0
        if (self.xB < -1e-6 * (1.0 + np.abs(self.b).max(initial=0.0))).any():
            raise SolverError("basis lost primal feasibility")
        np.maximum(self.xB, 0.0, out=self.xB)

    def duals(self, cost: np.ndarray) -> np.ndarray:
        return cost[self.basis] @ self.Binv

    def run(self, cost: np.ndarray, banned: np.ndarray, pinned: np.ndarray | None = None) -> str:
        """Iterate to optimality for ``cost``; returns 'optimal' or 'unbounded'.

        ``banned`` columns never enter; ``pinned`` columns must leave the basis
        as soon as they would move (used to hold artificials at zero).
        """
        opt_tol = OPT_TOL * (1.0 + np.abs(cost).max(initial=0.0))
        bland = False
        degenerate = 0
        since_refactor = 0
        in_basis = np.zeros(self.N, dtype=bool)
        in_basis[self.basis] = True
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(f"iteration limit {self.max_iter} reached")
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
            y = self.duals(cost)
            d = cost - y @ self.A
            d[in_basis | banned] = 0.0
            candidates = np.flatnonzero(d < -opt_tol)
            if candidates.size == 0:
                return "optimal"
            q = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])
            u = self.Binv @ self.A[:, q]
            r, theta = self._ratio_test(u, pinned)
            if r < 0:
                return "unbounded"
            if theta <= FEAS_TOL:
                degenerate += 1
                bland = bland or degenerate > DEGENERATE_RUN
            else:
                degenerate = 0
                bland = False
            in_basis[self.basis[r]] = False
            self._pivot(r, q, u, theta)
            in_basis[q] = True
            self.iterations += 1
            since_refactor += 1

    def _ratio_test(self, u: np.ndarray, pinned: np.ndarray | None) -> tuple[int, float]:
        basis = np.asarray(self.basis)
        moving = np.abs(u) > PIVOT_TOL
        if pinned is not None:
            # pinned basics (artificials at zero) leave before they can move
            hit = np.flatnonzero(moving & pinned[basis])
            if hit.size:
                return int(hit[0]), 0.0
        idx = np.flatnonzero(moving & (u > 0))
        if idx.size == 0:
            return -1, 0.0
        ratios = self.xB[idx] / u[idx]
        best = ratios.min()
        ties = idx[ratios <= best + 1e-12 * (1.0 + best)]
        # lowest variable index among ties (Bland-compatible)
        r = int(ties[np.argmin(basis[ties])])
        return r, max(float(best), 0.0)

    def _pivot(self, r: int, q: int, u: np.ndarray, theta: float) -> None:
        self.xB -= theta * u
        self.xB[r] = theta
        np.maximum(self.xB, 0.0, out=self.xB)
        row = self.Binv[r] / u[r]
        self.Binv -= np.outer(u, row)
        self.Binv[r] = row
        self.basis[r] = q


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` to optimality or report infeasibility/unboundedness."""
    c, A, b = problem.c, problem.A, problem.b
    m, n = A.shape
    lower, upper = problem.lower, problem.upper

    # shift lower bounds to zero, turn finite upper bounds into rows
    b_shift = b - A @ lower
    ub_vars = np.flatnonzero(np.isfinite(upper))
    rows = [A]
    rhs = [b_shift]
    senses = list(problem.senses)
    if ub_vars.size:
        U = np.zeros((ub_vars.size, n))
        U[np.arange(ub_vars.size), ub_vars] = 1.0
        rows.append(U)
        rhs.append(upper[ub_vars] - lower[ub_vars])
        senses += ["<="] * ub_vars.size
    A_all = np.vstack(rows) if rows else np.zeros((0, n))
    b_all = np.concatenate(rhs) if rhs else np.zeros(0)
    m_all = A_all.shape[0]

    slack_rows = [i for i, s in enumerate(senses) if s != "="]
    S = np.zeros((m_all, len(slack_rows)))
    for col, i in enumerate(slack_rows):
        S[i, col] = 1.0 if senses[i] == "<=" else -1.0
    flip = np.where(b_all < 0, -1.0, 1.0)
    A_std = np.hstack([A_all, S]) * flip[:, None]
    b_std = b_all * flip

    # slacks with +1 after flipping start basic; the other rows need artificials
    basis = [-1] * m_all
    for col, i in enumerate(slack_rows):
        if A_std[i, n + col] > 0:
            basis[i] = n + col
    art_rows = [i for i in range(m_all) if basis[i] < 0]
    n_struct = n + len(slack_rows)
    if art_rows:
        R = np.zeros((m_all, len(art_rows)))
        for col, i in enumerate(art_rows):
            R[i, col] = 1.0
            basis[i] = n_struct + col
        A_std = np.hstack([A_std, R])
    N = A_std.shape[1]
    is_art = np.zeros(N, dtype=bool)
    is_art[n_struct:] = True

    cost = np.zeros(N)
    cost[:n] = -c if problem.maximize else c
    limit = max_iter or 50 * (m_all + N) + 1000
    simplex = _Simplex(A_std, b_std, basis, limit)

    if art_rows:
        phase1 = is_art.astype(float)
        simplex.run(phase1, banned=np.zeros(N, dtype=bool))
        simplex.refactor()
        infeas = float(phase1[simplex.basis] @ simplex.xB)
        if infeas > 1e-8 * (1.0 + np.abs(b_std).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, iterations=simplex.iterations)
        _drive_out_artificials(simplex, is_art)

    status = simplex.run(cost, banned=is_art, pinned=is_art)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=simplex.iterations)
    simplex.refactor()

    x_std = np.zeros(N)
    x_std[simplex.basis] = simplex.xB
    x = x_std[:n] + lower
    y = simplex.duals(cost) * flip
    d = cost - (simplex.duals(cost) @ A_std)
    sense = -1.0 if problem.maximize else 1.0
    sol = LpSolution(
        LpStatus.OPTIMAL,
        objective=float(c @ x),
        x=x,
        duals=sense * y[:m],
        reduced_costs=sense * d[:n],
        upper_duals=sense * y[m:],
        iterations=simplex.iterations,
    )
    _check_feasible(problem, sol.x)
    return sol


def _drive_out_artificials(simplex: _Simplex, is_art: np.ndarray) -> None:
    for r in range(simplex.m):
        if not is_art[simplex.basis[r]]:
            continue
        row = simplex.Binv[r] @ simplex.A
        row[is_art] = 0.0
        in_basis = np.zeros(simplex.N, dtype=bool)
        in_basis[simplex.basis] = True
        row[in_basis] = 0.0
        j = np.flatnonzero(np.abs(row) > 1e-7)
        if j.size == 0:
            continue  # redundant row; the artificial stays basic at zero
        q = int(j[np.argmax(np.abs(row[j]))])
        u = simplex.Binv @ simplex.A[:, q]
        simplex._pivot(r, q, u, 0.0)
    simplex.refactor()


def _check_feasible(problem: LpProblem, x: np.ndarray) -> None:
    scale = 1.0 + np.abs(problem.b).max(initial=0.0) + np.abs(x).max(initial=0.0)
    tol = 1e-7 * scale
    lhs = problem.A @ x
    for i, s in enumerate(problem.senses):
        viol = {"<=": lhs[i] - problem.b[i], ">=": problem.b[i] - lhs[i],
                "=": abs(lhs[i] - problem.b[i])}[s]
        if viol > tol:
            raise SolverError(f"row {i} violated by {viol:.3g} at the reported optimum")
    if (x < problem.lower - tol).any() or (x > problem.upper + tol).any():
        raise SolverError("bounds violated at the reported optimum")
