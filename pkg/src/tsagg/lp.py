"""Sparse bounded-variable LPs and a revised-simplex solver.

Solves  min c'x  s.t.  A x = b,  l <= x <= u  with a bounded-variable
revised simplex: dense basis inverse, product-form updates with periodic
refactorization, Dantzig pricing with a Bland fallback after a run of
degenerate pivots, and a two-phase start (artificial variables) unless a
feasible initial basis is supplied.

Dual convention: the equality duals y satisfy d_j = c_j - y'A_j for the
reduced costs d; the implied bound duals are max(d_j, 0) on the lower
bound and max(-d_j, 0) on the upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITERATION_LIMIT",
    "LpProblem",
    "LpSolution",
    "SolveOptions",
    "KktReport",
    "solve",
    "verify_kkt",
    "dump_lp",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

# Nonbasic position codes.
_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2
_BASIC = 3


@dataclass(frozen=True)
class LpProblem:
    """min cost'x s.t. the triplet-form equality system and box bounds.

    Bounds may be +-inf; equal lower/upper fixes a variable. Triplets may
    repeat (row, col) pairs; repeated entries are summed.
    """

    n_vars: int
    n_eq: int
    cost: np.ndarray
    eq_rows: np.ndarray
    eq_cols: np.ndarray
    eq_vals: np.ndarray
    eq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        conv = {
            "cost": np.asarray(self.cost, dtype=float),
            "eq_rows": np.asarray(self.eq_rows, dtype=np.int64),
            "eq_cols": np.asarray(self.eq_cols, dtype=np.int64),
            "eq_vals": np.asarray(self.eq_vals, dtype=float),
            "eq_rhs": np.asarray(self.eq_rhs, dtype=float),
            "lower": np.asarray(self.lower, dtype=float),
            "upper": np.asarray(self.upper, dtype=float),
        }
        for k, v in conv.items():
            object.__setattr__(self, k, v)
        n, m = self.n_vars, self.n_eq
        if self.cost.shape != (n,) or self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("cost/lower/upper must have length n_vars")
        if self.eq_rhs.shape != (m,):
            raise ValueError("eq_rhs must have length n_eq")
        if not (self.eq_rows.shape == self.eq_cols.shape == self.eq_vals.shape):
            raise ValueError("triplet arrays must share a length")
        if self.eq_rows.size:
            if self.eq_rows.min() < 0 or self.eq_rows.max() >= m:
                raise ValueError("triplet row index out of range")
            if self.eq_cols.min() < 0 or self.eq_cols.max() >= n:
                raise ValueError("triplet col index out of range")
        if not np.all(np.isfinite(self.eq_vals)):
            raise ValueError("triplet values must be finite")
        if not np.all(np.isfinite(self.eq_rhs)):
            raise ValueError("eq_rhs must be finite")
        if not np.all(np.isfinite(self.cost)):
            raise ValueError("cost must be finite")
        if np.any(self.lower > self.upper):
            bad = int(np.flatnonzero(self.lower > self.upper)[0])
            raise ValueError(f"lower > upper for variable {bad}")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds must not be NaN")

    def matrix(self) -> sparse.csc_matrix:
        return sparse.csc_matrix(
            (self.eq_vals, (self.eq_rows, self.eq_cols)), shape=(self.n_eq, self.n_vars)
        )


@dataclass(frozen=True)
class LpSolution:
    """Primal/dual solution of an LpProblem.

    `work` is the deterministic solver-effort proxy iterations * n_eq.
    x, y, d are meaningful only when status == OPTIMAL (best iterate
    otherwise).
    """

    status: str
    objective: float
    x: np.ndarray
    y: np.ndarray
    d: np.ndarray
    iterations: int
    work: float


@dataclass(frozen=True)
class SolveOptions:
    # feas_tol: absolute residual tolerance; activity_tol/dual_tol feed the
    # active-set classification downstream, not the pivoting itself.
    max_iters: int | None = None
    feas_tol: float = 1e-9
    activity_tol: float = 1e-7
    dual_tol: float = 1e-6
    price_tol: float = 1e-9
    pivot_tol: float = 1e-10
    bland_after: int = 50
    refactor_every: int = 500
    initial_basis: tuple[int, ...] | None = None


def solve(lp: LpProblem, opts: SolveOptions | None = None) -> LpSolution:
    """Solve to optimality; deterministic for identical inputs and options."""
    opts = opts or SolveOptions()
    return _Simplex(lp, opts).run()


class _Simplex:
    """Working state of one solve. Columns n..n+m-1 are artificials."""

    def __init__(self, lp: LpProblem, opts: SolveOptions):
        self.lp = lp
        self.opts = opts
        self.m = lp.n_eq
        self.n = lp.n_vars
        self.N = self.n + self.m
        A = lp.matrix()
        self.b = lp.eq_rhs.copy()

        # Structural nonbasic start: finite bound nearest zero, else free at 0.
        lower = np.concatenate([lp.lower, np.zeros(self.m)])
        upper = np.concatenate([lp.upper, np.full(self.m, np.inf)])
        x = np.zeros(self.N)
        vstat = np.full(self.N, _AT_LOWER, dtype=np.int8)
        lo_fin = np.isfinite(lower[: self.n])
        up_fin = np.isfinite(upper[: self.n])
        for j in range(self.n):
            if lo_fin[j] and (not up_fin[j] or abs(lower[j]) <= abs(upper[j])):
                x[j], vstat[j] = lower[j], _AT_LOWER
            elif up_fin[j]:
                x[j], vstat[j] = upper[j], _AT_UPPER
            else:
                x[j], vstat[j] = 0.0, _FREE

        resid = self.b - A @ x[: self.n]
        art_sign = np.where(resid >= 0.0, 1.0, -1.0)
        self.A = sparse.hstack(
            [A, sparse.diags(art_sign, format="csc")], format="csc"
        )
        self.AT = self.A.T.tocsr()
        self.lower, self.upper = lower, upper
        self.x = x
        self.vstat = vstat
        self.cost2 = np.concatenate([lp.cost, np.zeros(self.m)])
        self.cost1 = np.concatenate([np.zeros(self.n), np.ones(self.m)])
        self.iters = 0
        self.pivots_since_refactor = 0
        self.degenerate_run = 0
        self.bland = False
        cscale = float(np.abs(lp.cost).max()) if self.n else 1.0
        self.price_eps = opts.price_tol * max(1.0, cscale)
        self.max_iters = (
            opts.max_iters
            if opts.max_iters is not None
            else 2000 + 20 * (self.m + self.n)
        )

    # -- basis handling ----------------------------------------------------

    def _set_basis(self, basis: np.ndarray) -> bool:
        """Install a basis; False if the basis matrix is singular."""
        Bmat = self.A[:, basis].toarray()
        try:
            binv = np.linalg.inv(Bmat)
        except np.linalg.LinAlgError:
            return False
        # Reject numerically singular inverses as well.
        if not np.all(np.isfinite(binv)):
            return False
        self.basis = basis.copy()
        self.binv = binv
        self.vstat[basis] = _BASIC
        self._recompute_basic_values()
        return True

    def _recompute_basic_values(self):
        xn = self.x.copy()
        xn[self.basis] = 0.0
        rhs = self.b - self.A @ xn
        self.x[self.basis] = self.binv @ rhs

    def _refactor(self):
        Bmat = self.A[:, self.basis].toarray()
        self.binv = np.linalg.inv(Bmat)
        self._recompute_basic_values()
        self.pivots_since_refactor = 0

    # -- pricing and ratio test ---------------------------------------------

    def _duals(self, cost):
        y = cost[self.basis] @ self.binv
        d = cost - self.AT @ y
        return y, d

    def _choose_entering(self, d, price_eps):
        viol = np.zeros(self.N)
        at_lo = self.vstat == _AT_LOWER
        at_up = self.vstat == _AT_UPPER
        free = self.vstat == _FREE
        movable = self.upper - self.lower > 0.0
        np.negative(d, where=at_lo & movable, out=viol)
        viol[at_up & movable] = d[at_up & movable]
        viol[free] = np.abs(d[free])
        if self.bland:
            elig = np.flatnonzero(viol > price_eps)
            return int(elig[0]) if elig.size else -1
        j = int(np.argmax(viol))
        return j if viol[j] > price_eps else -1

    def _ratio_test(self, j, w, direction):
        """Max step t for entering j; returns (t, blocking row or -1, flip)."""
        delta = -direction * w  # movement of x_B per unit step
        xB = self.x[self.basis]
        lB = self.lower[self.basis]
        uB = self.upper[self.basis]
        t = np.full(self.m, np.inf)
        dec = delta < -self.opts.pivot_tol
        inc = delta > self.opts.pivot_tol
        with np.errstate(invalid="ignore", divide="ignore"):
            t[dec] = (xB[dec] - lB[dec]) / -delta[dec]
            t[inc] = (uB[inc] - xB[inc]) / delta[inc]
        t[t < 0.0] = 0.0  # drift guard
        t_flip = self.upper[j] - self.lower[j]  # inf for free variables
        i_min = int(np.argmin(t)) if self.m else -1
        t_min = t[i_min] if self.m else np.inf
        if t_flip <= t_min:
            return t_flip, -1, True
        if not np.isfinite(t_min):
            return np.inf, -1, False
        cands = np.flatnonzero(t <= t_min + 1e-12)
        if self.bland:
            i_out = int(cands[np.argmin(self.basis[cands])])
        else:
            i_out = int(cands[np.argmax(np.abs(delta[cands]))])
        return float(t[i_out]), i_out, False

    # -- main loop -----------------------------------------------------------

    def _iterate(self, cost, price_eps):
        """Pivot until optimal for `cost`; returns OPTIMAL/UNBOUNDED/ITERATION_LIMIT."""
        while True:
            if self.iters >= self.max_iters:
                return ITERATION_LIMIT
            if self.pivots_since_refactor >= self.opts.refactor_every:
                self._refactor()
            y, d = self._duals(cost)
            j = self._choose_entering(d, price_eps)
            if j < 0:
                return OPTIMAL
            direction = 1.0
            if self.vstat[j] == _AT_UPPER or (self.vstat[j] == _FREE and d[j] > 0):
                direction = -1.0
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            w = self.binv[:, self.A.indices[lo:hi]] @ self.A.data[lo:hi]
            t, i_out, flip = self._ratio_test(j, w, direction)
            if not np.isfinite(t):
                return UNBOUNDED
            if t <= 1e-11:
                self.degenerate_run += 1
                if self.degenerate_run >= self.opts.bland_after:
                    self.bland = True
            else:
                self.degenerate_run = 0
                self.bland = False
            self.x[self.basis] -= direction * t * w
            if flip:
                self.x[j] = self.upper[j] if direction > 0 else self.lower[j]
                self.vstat[j] = _AT_UPPER if direction > 0 else _AT_LOWER
            else:
                out = self.basis[i_out]
                delta_out = -direction * w[i_out]
                if delta_out < 0:
                    self.x[out] = self.lower[out]
                    self.vstat[out] = _AT_LOWER
                else:
                    self.x[out] = self.upper[out]
                    self.vstat[out] = _AT_UPPER
                self.x[j] = self.x[j] + direction * t
                self.vstat[j] = _BASIC
                self.basis[i_out] = j
                # Product-form update of the dense inverse.
                piv_row = self.binv[i_out, :] / w[i_out]
                w_adj = w.copy()
                w_adj[i_out] = 0.0
                self.binv -= np.outer(w_adj, piv_row)
                self.binv[i_out, :] = piv_row
                self.pivots_since_refactor += 1
            self.iters += 1

    def run(self) -> LpSolution:
        used_artificials = True
        if self.opts.initial_basis is not None:
            basis = np.asarray(self.opts.initial_basis, dtype=np.int64)
            if basis.shape != (self.m,) or (self.m and basis.max() >= self.n):
                raise ValueError("initial_basis must list n_eq structural columns")
            prev = self.vstat[basis].copy()
            if self._set_basis(basis):
                xB = self.x[basis]
                feas = np.all(xB >= self.lower[basis] - self.opts.feas_tol) and np.all(
                    xB <= self.upper[basis] + self.opts.feas_tol
                )
                if feas:
                    used_artificials = False
                else:
                    self.vstat[basis] = prev
                    self._recompute_nonbasic_positions(basis, prev)
            else:
                self.vstat[basis] = prev

        if used_artificials:
            resid = self.b - self.A[:, : self.n] @ self.x[: self.n]
            self.x[self.n :] = np.abs(resid)
            if not self._set_basis(np.arange(self.n, self.N, dtype=np.int64)):
                raise RuntimeError("artificial basis singular (internal error)")
            status = self._iterate(self.cost1, phase=1)
            if status == ITERATION_LIMIT:
                return self._finish(ITERATION_LIMIT)
            self._refactor()
            infeas = float(self.x[self.n :].sum())
            if infeas > self.opts.feas_tol * max(1.0, float(np.abs(self.b).sum())):
                return self._finish(INFEASIBLE)
            # Phase 2: pin artificials to zero; they may stay basic at 0.
            self.lower[self.n :] = 0.0
            self.upper[self.n :] = 0.0
            self.x[self.n :] = np.where(self.vstat[self.n :] == _BASIC, self.x[self.n :], 0.0)

        status = self._iterate(self.cost2, phase=2)
        return self._finish(status)

    def _recompute_nonbasic_positions(self, basis, prev):
        # Restore x for a rejected basis attempt.
        for pos, j in enumerate(basis):
            st = prev[pos]
            if st == _AT_LOWER:
                self.x[j] = self.lower[j]
            elif st == _AT_UPPER:
                self.x[j] = self.upper[j]
            else:
                self.x[j] = 0.0

    def _finish(self, status) -> LpSolution:
        self._refactor()
        y, d = self._duals(self.cost2)
        x = self.x[: self.n].copy()
        return LpSolution(
            status=status,
            objective=float(self.lp.cost @ x),
            x=x,
            y=np.asarray(y, dtype=float).copy(),
            d=np.asarray(d[: self.n], dtype=float).copy(),
            iterations=self.iters,
            work=float(self.iters * self.m),
        )


@dataclass(frozen=True)
class KktReport:
    """Worst-case KKT violations of a claimed-optimal solution.

    Dual infeasibility and the duality gap are measured relative to the
    cost/objective scale; primal infeasibility and complementary slackness
    are absolute (problem data is assumed reasonably scaled).
    """

    max_primal: float
    max_dual: float
    max_comp: float
    gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.max_primal, self.max_dual, self.max_comp, self.gap) <= self.tol


def verify_kkt(lp: LpProblem, sol: LpSolution, tol: float = 1e-7) -> KktReport:
    """Report primal/dual/complementarity/gap violations of `sol`."""
    if sol.status != OPTIMAL:
        raise ValueError(f"verify_kkt requires an optimal solution, got {sol.status}")
    A = lp.matrix()
    x, y, d = sol.x, sol.y, sol.d
    resid = A @ x - lp.eq_rhs
    below = np.maximum(0.0, lp.lower - x)
    above = np.maximum(0.0, x - lp.upper)
    max_primal = max(
        float(np.abs(resid).max(initial=0.0)),
        float(below.max(initial=0.0)),
        float(above.max(initial=0.0)),
    )

    cscale = max(1.0, float(np.abs(lp.cost).max(initial=0.0)))
    stat = lp.cost - A.T @ y - d
    act = 1e-7 * np.maximum(1.0, np.maximum(np.abs(lp.lower), np.abs(lp.upper)))
    at_lo = x <= lp.lower + act
    at_up = x >= lp.upper - act
    dual_viol = np.where(at_lo & at_up, 0.0, 0.0)
    dual_viol = np.where(at_lo & ~at_up, np.maximum(0.0, -d), dual_viol)
    dual_viol = np.where(at_up & ~at_lo, np.maximum(0.0, d), dual_viol)
    inside = ~at_lo & ~at_up
    dual_viol = np.where(inside, np.abs(d), dual_viol)
    max_dual = max(
        float(dual_viol.max(initial=0.0)), float(np.abs(stat).max(initial=0.0))
    ) / cscale

    lam_lo = np.maximum(d, 0.0)
    lam_up = np.maximum(-d, 0.0)
    gap_lo = np.where(np.isfinite(lp.lower), x - lp.lower, 0.0)
    gap_up = np.where(np.isfinite(lp.upper), lp.upper - x, 0.0)
    comp = np.maximum(lam_lo * np.maximum(gap_lo, 0.0), lam_up * np.maximum(gap_up, 0.0))
    max_comp = float(comp.max(initial=0.0)) / cscale

    dual_obj = float(y @ lp.eq_rhs)
    dual_obj += float(np.sum(np.where(np.isfinite(lp.lower), lam_lo * lp.lower, 0.0)))
    dual_obj -= float(np.sum(np.where(np.isfinite(lp.upper), lam_up * lp.upper, 0.0)))
    gap = abs(sol.objective - dual_obj) / max(1.0, abs(sol.objective))

    return KktReport(
        max_primal=max_primal, max_dual=max_dual, max_comp=max_comp, gap=gap, tol=tol
    )


def dump_lp(lp: LpProblem, path) -> None:
    """Write the problem in LP text format for cross-checking with other solvers."""
    A = lp.matrix().tocoo()
    rows: list[list[str]] = [[] for _ in range(lp.n_eq)]
    for r, c, v in zip(A.row, A.col, A.data):
        rows[r].append(f"{'+' if v >= 0 else '-'} {abs(v):.17g} x{c}")
    with open(path, "w") as fh:
        fh.write("Minimize\n obj:")
        for j, cj in enumerate(lp.cost):
            if cj != 0.0:
                fh.write(f" {'+' if cj >= 0 else '-'} {abs(cj):.17g} x{j}")
        fh.write("\nSubject To\n")
        for i in range(lp.n_eq):
            terms = " ".join(rows[i]) if rows[i] else "0 x0"
            fh.write(f" c{i}: {terms} = {lp.eq_rhs[i]:.17g}\n")
        fh.write("Bounds\n")
        for j in range(lp.n_vars):
            lo, up = lp.lower[j], lp.upper[j]
            lo_s = f"{lo:.17g}" if np.isfinite(lo) else "-inf"
            up_s = f"{up:.17g}" if np.isfinite(up) else "+inf"
            fh.write(f" {lo_s} <= x{j} <= {up_s}\n")
        fh.write("End\n")
