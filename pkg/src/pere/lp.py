"""Dense linear programming without external solver dependencies.

Solves  maximize c.x  subject to  A x <= b,  l <= x <= u  with a
bounded-variable revised simplex.  The basis always consists of k
structural columns plus m-k slack columns, so every FTRAN/BTRAN reduces
to a k x k dense solve where k never exceeds the number of structural
variables; this keeps iterations cheap even with thousands of rows.

Phase 1 uses a single artificial variable t with coefficient -1 on the
initially violated rows (maximize -t); phase 2 then runs on the original
objective with t pinned to zero.  Pricing is Dantzig (largest reduced
cost magnitude) with a permanent switch to Bland's rule after a run of
degenerate pivots, which guarantees termination.  Ties break to the
lowest variable index, so identical inputs produce identical outputs.

A small best-first branch-and-bound handles programs where a subset of
the variables is restricted to {0, 1} under a cardinality budget.
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import UnboundedError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_STEP = 1e-10
DEGENERATE_LIMIT = 1000
RATIO_TIE = 1e-12
MAX_ITER_FACTOR = 200


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective.x  s.t.  A x <= b,  lower <= x <= upper."""

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "objective",
                           np.asarray(self.objective, dtype=np.float64))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=np.float64))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, "lower",
                           np.asarray(self.lower, dtype=np.float64))
        object.__setattr__(self, "upper",
                           np.asarray(self.upper, dtype=np.float64))
        if self.A.ndim != 2:
            raise ValueError("constraint matrix must be two-dimensional")
        m, n = self.A.shape
        if self.objective.shape != (n,):
            raise ValueError(f"objective has shape {self.objective.shape},"
                             f" expected ({n},)")
        if self.b.shape != (m,):
            raise ValueError(f"rhs has shape {self.b.shape}, expected ({m},)")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound vectors must match variable count")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray
    objective_value: float


@dataclass(frozen=True)
class MipSolution:
    status: str
    x: np.ndarray
    objective_value: float
    assignment: np.ndarray  # 0/1 values of the binary variables


# nonbasic rest states
_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2


class _Simplex:
    """One simplex run over the augmented column set [A | I]."""

    def __init__(self, A, b, lower, upper):
        self.A = A
        self.b = b
        self.m, self.n = A.shape
        self.lb = np.concatenate([lower, np.zeros(self.m)])
        self.ub = np.concatenate([upper, np.full(self.m, np.inf)])
        self.nv = self.n + self.m
        self.basis = np.arange(self.n, self.nv)  # all-slack start
        self.in_basis = np.zeros(self.nv, dtype=bool)
        self.in_basis[self.basis] = True
        self.state = np.full(self.nv, _AT_LOWER, dtype=np.int8)
        self.state[:self.n][~np.isfinite(self.lb[:self.n])] = _AT_UPPER
        free = ~np.isfinite(self.lb[:self.n]) & ~np.isfinite(self.ub[:self.n])
        self.state[:self.n][free] = _FREE
        self.bland = False
        self.degenerate_run = 0

    def structural_values(self):
        """Current values of the structural variables (basic ones as 0)."""
        lb, ub, st = self.lb[:self.n], self.ub[:self.n], self.state[:self.n]
        vals = np.where(st == _AT_LOWER, lb, np.where(st == _AT_UPPER, ub, 0.0))
        return np.where(self.in_basis[:self.n], 0.0, vals)

    def _split_basis(self):
        """Structural basis columns F (basis order) and the rows R whose
        slack is nonbasic; |F| == |R| always."""
        struct_mask = self.basis < self.n
        F = self.basis[struct_mask]
        slack_rows = self.basis[~struct_mask] - self.n
        covered = np.zeros(self.m, dtype=bool)
        covered[slack_rows] = True
        R = np.flatnonzero(~covered)
        return F, R, struct_mask, slack_rows

    def _ftran(self, core, A_F, R, struct_mask, slack_rows, col):
        """w = B^-1 col aligned with basis positions, using the k x k core."""
        w = np.empty(self.m)
        if A_F.shape[1]:
            z_f = np.linalg.solve(core, col[R])
            w[struct_mask] = z_f
            if slack_rows.size:
                w[~struct_mask] = col[slack_rows] - (A_F @ z_f)[slack_rows]
        else:
            w[~struct_mask] = col[slack_rows]
        return w

    def run(self, c_struct):
        """Iterate to optimality for the given structural objective.

        Returns (structural solution, objective value); raises
        UnboundedError when no basic variable blocks an improving ray.
        """
        max_iter = MAX_ITER_FACTOR * (self.m + self.nv) + 1000
        n, m = self.n, self.m
        for _ in range(max_iter):
            F, R, struct_mask, slack_rows = self._split_basis()
            A_F = self.A[:, F]  # one column gather shared by both solves
            core = A_F[R]
            x_nb = self.structural_values()
            resid = self.b - self.A @ x_nb
            xb = self._ftran(core, A_F, R, struct_mask, slack_rows, resid)
            # duals: zero on rows with a basic slack, k x k transpose solve
            y_r = np.linalg.solve(core.T, c_struct[F]) \
                if F.size else np.empty(0)
            reduced = np.empty(self.nv)
            reduced[:n] = c_struct - self.A[R].T @ y_r if R.size else c_struct
            reduced[n:] = 0.0
            reduced[n + R] = -y_r
            q = self._entering(reduced)
            if q < 0:
                x = x_nb.copy()
                x[F] = xb[struct_mask]
                return x, float(c_struct @ x)
            if self.state[q] == _AT_UPPER:
                direction = -1.0
            elif self.state[q] == _FREE:
                direction = 1.0 if reduced[q] > 0 else -1.0
            else:
                direction = 1.0
            if q < n:
                col = self.A[:, q]
            else:
                col = np.zeros(m)
                col[q - n] = 1.0
            w = self._ftran(core, A_F, R, struct_mask, slack_rows, col)
            step, pos = self._ratio_test(q, direction, xb, w)
            if not np.isfinite(step):
                raise UnboundedError("objective unbounded above")
            if step < DEGENERATE_STEP:
                self.degenerate_run += 1
                if self.degenerate_run >= DEGENERATE_LIMIT:
                    self.bland = True
            else:
                self.degenerate_run = 0
            if pos < 0:
                # entering variable travels to its opposite bound
                self.state[q] = _AT_UPPER if self.state[q] == _AT_LOWER \
                    else _AT_LOWER
                continue
            leaving = self.basis[pos]
            self.state[leaving] = _AT_LOWER if direction * w[pos] > 0 \
                else _AT_UPPER
            self.in_basis[leaving] = False
            self.basis[pos] = q
            self.in_basis[q] = True
        raise RuntimeError("simplex iteration limit exceeded")

    def _entering(self, reduced):
        st = self.state
        elig = ~self.in_basis & (self.lb != self.ub)
        elig &= ((st == _AT_LOWER) & (reduced > PIVOT_TOL)) \
            | ((st == _AT_UPPER) & (reduced < -PIVOT_TOL)) \
            | ((st == _FREE) & (np.abs(reduced) > PIVOT_TOL))
        if not elig.any():
            return -1
        if self.bland:
            return int(np.argmax(elig))  # first eligible index
        mags = np.where(elig, np.abs(reduced), -np.inf)
        return int(np.argmax(mags))

    def _ratio_test(self, q, direction, xb, w):
        """Largest feasible step along the entering direction.

        Returns (step, basis position of the leaving variable) with
        position -1 when the entering variable reaches its opposite bound
        first (a bound flip).
        """
        rates = direction * w
        lb_b = self.lb[self.basis]
        ub_b = self.ub[self.basis]
        lims = np.full(self.m, np.inf)
        down = rates > PIVOT_TOL
        np.divide(xb - lb_b, rates, out=lims, where=down & np.isfinite(lb_b))
        up = rates < -PIVOT_TOL
        np.divide(xb - ub_b, rates, out=lims, where=up & np.isfinite(ub_b))
        np.clip(lims, 0.0, None, out=lims)
        span = self.ub[q] - self.lb[q]
        min_lim = lims.min() if self.m else np.inf
        if span < min_lim - RATIO_TIE:
            return span, -1
        if not np.isfinite(min_lim):
            return (span, -1) if np.isfinite(span) else (np.inf, -1)
        ties = lims <= min_lim + RATIO_TIE
        if self.bland:
            cand = np.where(ties, self.basis, np.iinfo(np.int64).max)
            pos = int(np.argmin(cand))
        else:
            pos = int(np.argmax(np.where(ties, np.abs(w), -1.0)))
        return min_lim, pos


class SimplexProgram:
    """Reusable simplex over a fixed row system A x <= b.

    Solves a sequence of objectives over the same rows while keeping the
    working basis warm, so chained solves (re-optimizing after an
    objective swap or after pinning a variable at its optimal value)
    cost a handful of pivots instead of a full cold start.
    """

    def __init__(self, A, b, lower, upper):
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        self.n = A.shape[1]
        self._sx = _Simplex(A, b,
                            np.asarray(lower, dtype=np.float64).copy(),
                            np.asarray(upper, dtype=np.float64).copy())
        self._has_artificial = False
        self._feasible = None
        self._phase1_point = np.zeros(self.n)

    def _ensure_feasible(self):
        sx = self._sx
        resid = sx.b - sx.A @ sx.structural_values()
        if resid.size and resid.min() < -FEAS_TOL:
            # phase 1: one artificial column, -1 on every violated row,
            # starting basic at the largest violation
            art = np.where(resid < 0.0, -1.0, 0.0)
            sx1 = _Simplex(np.column_stack([sx.A, art]), sx.b,
                           np.append(sx.lb[:sx.n], 0.0),
                           np.append(sx.ub[:sx.n], np.inf))
            pivot_row = int(np.argmin(resid))
            sx1.in_basis[sx1.basis[pivot_row]] = False
            sx1.basis[pivot_row] = self.n
            sx1.in_basis[self.n] = True
            c1 = np.zeros(self.n + 1)
            c1[self.n] = -1.0
            x1, val1 = sx1.run(c1)
            if -val1 > 10 * FEAS_TOL:
                self._feasible = False
                self._phase1_point = x1[:self.n]
                return
            sx1.lb[self.n] = 0.0  # pin the artificial at zero from here on
            sx1.ub[self.n] = 0.0
            self._sx = sx1
            self._has_artificial = True
        self._feasible = True

    def maximize(self, objective) -> LpSolution:
        objective = np.asarray(objective, dtype=np.float64)
        if objective.shape != (self.n,):
            raise ValueError("objective length mismatch")
        if self._feasible is None:
            self._ensure_feasible()
        if not self._feasible:
            return LpSolution("infeasible", self._phase1_point, float("nan"))
        c = np.append(objective, 0.0) if self._has_artificial else objective
        try:
            x, _ = self._sx.run(c)
        except UnboundedError:
            return LpSolution("unbounded", np.full(self.n, np.nan),
                              float("inf"))
        xs = x[:self.n]
        return LpSolution("optimal", xs, float(objective @ xs))

    def pin(self, j: int, value: float):
        """Clamp variable j to [value, value].

        Only valid when value equals the variable's value in the latest
        solution; the warm basis then stays primal feasible.
        """
        sx = self._sx
        sx.lb[j] = value
        sx.ub[j] = value
        if not sx.in_basis[j]:
            sx.state[j] = _AT_LOWER


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase bounded simplex; deterministic for identical inputs."""
    return SimplexProgram(lp.A, lp.b, lp.lower, lp.upper).maximize(
        lp.objective)


def solve_mip_binary(lp: LinearProgram, binary_indices, budget: int,
                     int_tol: float = 1e-7,
                     max_nodes: int | None = None) -> MipSolution:
    """Maximize over the LP with the listed variables forced to {0, 1}
    and at most ``budget`` of them set to one.

    Best-first branch-and-bound on LP relaxations, branching on the most
    fractional binary (ties to the lowest index).  Exact for the small
    binary counts this package produces.  When ``max_nodes`` is given and
    the search tree outgrows it, the best incumbent so far is returned
    with status ``node_limit`` instead of ``optimal``.
    """
    binary_indices = np.asarray(sorted(set(int(i) for i in binary_indices)),
                                dtype=np.int64)
    n = lp.n_vars
    if binary_indices.size and (binary_indices[0] < 0
                                or binary_indices[-1] >= n):
        raise ValueError("binary index out of range")
    if budget < 0:
        raise ValueError("budget must be non-negative")

    is_bin = np.zeros(n, dtype=bool)
    is_bin[binary_indices] = True
    # cardinality row: sum of binaries <= budget
    A = np.vstack([lp.A, is_bin.astype(np.float64)])
    b = np.append(lp.b, float(budget))
    base_lower = np.where(is_bin, np.maximum(lp.lower, 0.0), lp.lower)
    base_upper = np.where(is_bin, np.minimum(lp.upper, 1.0), lp.upper)

    def relax(lo, hi):
        return solve_lp(LinearProgram(lp.objective, A, b, lo, hi))

    best_val = -np.inf
    best_x = None
    counter = 0
    root = relax(base_lower, base_upper)
    if root.status == "unbounded":
        return MipSolution("unbounded", np.full(n, np.nan), float("inf"),
                           np.zeros(binary_indices.size, dtype=np.int64))
    heap = []
    if root.status == "optimal":
        heap.append((-root.objective_value, counter,
                     base_lower, base_upper, root))
    proven = True
    while heap:
        if max_nodes is not None and counter >= max_nodes:
            proven = False
            break
        neg_bound, _, lo, hi, sol = heapq.heappop(heap)
        if -neg_bound <= best_val + RATIO_TIE:
            continue
        frac = sol.x[binary_indices]
        dist = np.abs(frac - np.round(frac))
        if not dist.size or dist.max() <= int_tol:
            # integral relaxation: pin binaries, re-solve the rest exactly
            lo2, hi2 = lo.copy(), hi.copy()
            vals = np.round(frac)
            lo2[binary_indices] = vals
            hi2[binary_indices] = vals
            exact = relax(lo2, hi2)
            if exact.status == "optimal" \
                    and exact.objective_value > best_val:
                best_val = exact.objective_value
                best_x = exact.x
            continue
        j = int(binary_indices[int(np.argmax(np.minimum(frac, 1.0 - frac)))])
        for value in (1.0, 0.0):
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[j] = value
            hi2[j] = value
            child = relax(lo2, hi2)
            if child.status != "optimal":
                continue
            if child.objective_value <= best_val + RATIO_TIE:
                continue
            counter += 1
            heapq.heappush(heap, (-child.objective_value, counter,
                                  lo2, hi2, child))
    if best_x is None:
        status = "infeasible" if proven else "node_limit"
        return MipSolution(status, np.full(n, np.nan), float("nan"),
                           np.zeros(binary_indices.size, dtype=np.int64))
    assignment = np.round(best_x[binary_indices]).astype(np.int64)
    status = "optimal" if proven else "node_limit"
    return MipSolution(status, best_x, float(best_val), assignment)
