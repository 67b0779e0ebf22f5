"""Solver-agnostic conic programs with PSD cones.

A :class:`ConicProblem` minimises ``c . x`` subject to ``A x = b`` and a list
of linear matrix inequalities ``F_i(x) = F_i0 + sum_k x_k F_ik >= 0``, each
stored as the scaled upper-triangle vectorisation (``svec``, column-major,
off-diagonals times sqrt 2) of a real symmetric matrix. Complex Hermitian
constraints reach this layer through :func:`real_embedding_rows`.

Backends implement ``solve(problem, settings) -> ConicSolution``; any solver
with real PSD cones can be plugged in via :func:`register_backend`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError

SQRT2 = np.sqrt(2.0)


# --- parametrisation of Hermitian / symmetric blocks -----------------------


@lru_cache(maxsize=None)
def hermitian_coordinates(dim: int, real: bool = False) -> sp.csr_matrix:
    """Sparse map ``x -> vec(B)`` (row-major) for a ``dim x dim`` block.

    Complex: ``dim**2`` real coordinates (diagonal, then Re and Im of the
    strict upper triangle). Real: ``dim (dim + 1) / 2`` coordinates.
    """
    iu, ju = np.triu_indices(dim, 1)
    n_off = len(iu)
    diag = np.arange(dim)
    rows = [diag * dim + diag, iu * dim + ju, ju * dim + iu]
    cols = [diag, dim + np.arange(n_off), dim + np.arange(n_off)]
    vals = [np.ones(dim), np.ones(n_off), np.ones(n_off)]
    n_params = dim + n_off
    if not real:
        im_cols = dim + n_off + np.arange(n_off)
        rows += [iu * dim + ju, ju * dim + iu]
        cols += [im_cols, im_cols]
        vals += [1j * np.ones(n_off), -1j * np.ones(n_off)]
        n_params += n_off
    mat = sp.csr_matrix(
        (np.concatenate(vals).astype(complex), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim * dim, n_params),
    )
    return mat


def n_coordinates(dim: int, real: bool = False) -> int:
    return dim * (dim + 1) // 2 if real else dim * dim


def hermitian_from_coordinates(x: np.ndarray, dim: int, real: bool = False) -> np.ndarray:
    b = (hermitian_coordinates(dim, real) @ np.asarray(x, dtype=float)).reshape(dim, dim)
    return b.real.copy() if real else b


def real_embedding(h: np.ndarray) -> np.ndarray:
    """``H = X + iY  ->  [[X, -Y], [Y, X]]``; PSD iff H is PSD."""
    x, y = h.real, h.imag
    return np.block([[x, -y], [y, x]])


def svec_indices(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the upper triangle in column-major order."""
    lower_r, lower_c = np.tril_indices(dim)
    return lower_c, lower_r


def svec(mat: np.ndarray) -> np.ndarray:
    r, c = svec_indices(mat.shape[0])
    return mat[r, c] * np.where(r == c, 1.0, SQRT2)


def smat(vec: np.ndarray, dim: int) -> np.ndarray:
    r, c = svec_indices(dim)
    vals = vec / np.where(r == c, 1.0, SQRT2)
    out = np.zeros((dim, dim))
    out[r, c] = vals
    out[c, r] = vals
    return out


def real_embedding_rows(linear: sp.spmatrix, dim: int, real: bool = False):
    """svec rows of the (embedded) symmetric matrix built from ``vec(H) = linear @ x``.

    Returns ``(coeffs, diag_positions, cone_dim)``; ``diag_positions`` index
    the svec entries lying on the diagonal, where ``- w s I`` terms enter.
    """
    linear = sp.csr_matrix(linear)
    if real:
        r, c = svec_indices(dim)
        scale = np.where(r == c, 1.0, SQRT2)
        sel = sp.csr_matrix((scale, (np.arange(len(r)), r * dim + c)), shape=(len(r), dim * dim))
        return sp.csr_matrix(sel @ linear.real), np.flatnonzero(r == c), dim

    n = 2 * dim
    r, c = svec_indices(n)
    scale = np.where(r == c, 1.0, SQRT2)
    top, left = r < dim, c < dim
    re_mask = (top & left) | (~top & ~left)
    im_mask = top & ~left
    src = np.where(re_mask, (r % dim) * dim + (c % dim), r * dim + (c - dim))
    rows_idx = np.arange(len(r))
    sel_re = sp.csr_matrix(
        (scale[re_mask], (rows_idx[re_mask], src[re_mask])), shape=(len(r), dim * dim)
    )
    sel_im = sp.csr_matrix(
        (-scale[im_mask], (rows_idx[im_mask], src[im_mask])), shape=(len(r), dim * dim)
    )
    coeffs = sel_re @ sp.csr_matrix(linear.real) + sel_im @ sp.csr_matrix(linear.imag)
    return sp.csr_matrix(coeffs), np.flatnonzero(r == c), n


def hermitian_equality_rows(linear: sp.spmatrix, dim: int, real: bool = False):
    """Independent real rows of ``vec(H) = linear @ x`` for Hermitian H.

    Upper triangle real parts, strict upper triangle imaginary parts (omitted
    when ``real``). Returns ``(rows, select)``; ``select`` maps a complex
    ``vec`` target to the matching right-hand side.
    """
    linear = sp.csr_matrix(linear)
    iu, ju = np.triu_indices(dim)
    re_idx = iu * dim + ju
    parts = [sp.csr_matrix(linear.real)[re_idx]]
    if not real:
        su, sv = np.triu_indices(dim, 1)
        im_idx = su * dim + sv
        parts.append(sp.csr_matrix(linear.imag)[im_idx])
    else:
        im_idx = np.array([], dtype=int)

    def select(target: np.ndarray) -> np.ndarray:
        t = np.asarray(target).reshape(-1)
        return np.concatenate([t.real[re_idx], t.imag[im_idx]])

    return sp.vstack(parts, format="csr"), select


# --- problem / solution containers -----------------------------------------


@dataclass
class PsdCone:
    """``svec(F(x)) = offset + coeffs @ x`` must be PSD; ``dim`` is the matrix size."""

    dim: int
    coeffs: sp.csr_matrix
    offset: np.ndarray
    label: object = None


@dataclass
class ConicProblem:
    n_vars: int
    objective: np.ndarray
    eq_matrix: sp.csr_matrix
    eq_rhs: np.ndarray
    cones: list[PsdCone] = field(default_factory=list)

    def cone_matrix(self, i: int, x: np.ndarray) -> np.ndarray:
        cone = self.cones[i]
        return smat(cone.offset + cone.coeffs @ x, cone.dim)

    def residuals(self, x: np.ndarray) -> dict:
        eq = self.eq_matrix @ x - self.eq_rhs
        mins = [float(np.linalg.eigvalsh(self.cone_matrix(i, x))[0]) for i in range(len(self.cones))]
        return {
            "eq_max": float(np.max(np.abs(eq))) if eq.size else 0.0,
            "psd_min_eig": float(min(mins)) if mins else 0.0,
        }


@dataclass
class ConicSolution:
    status: str  # optimal | infeasible-numerics | solver-error
    objective: float
    x: np.ndarray | None
    residuals: dict
    solve_time: float
    raw_status: str = ""
    iterations: int = 0


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-9
    max_iter: int = 500
    verbose: bool = False
    first_order_max_iter: int = 4000


# --- backends --------------------------------------------------------------


_BACKENDS = {}


def register_backend(name: str):
    def deco(fn):
        _BACKENDS[name] = fn
        return fn

    return deco


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def solve_conic(problem: ConicProblem, backend: str = "clarabel",
                settings: SolverSettings | None = None) -> ConicSolution:
    settings = settings or SolverSettings()
    try:
        fn = _BACKENDS[backend]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown solver backend {backend!r}; available: {available_backends()}"
        ) from None
    return fn(problem, settings)


_CLARABEL_STATUS = {
    "Solved": "optimal",
    "AlmostSolved": "optimal",
    "PrimalInfeasible": "infeasible-numerics",
    "DualInfeasible": "infeasible-numerics",
    "AlmostPrimalInfeasible": "infeasible-numerics",
    "AlmostDualInfeasible": "infeasible-numerics",
}


@register_backend("clarabel")
def _solve_clarabel(problem: ConicProblem, settings: SolverSettings) -> ConicSolution:
    import clarabel

    n = problem.n_vars
    a_blocks = [problem.eq_matrix] + [-c.coeffs for c in problem.cones]
    a = sp.vstack(a_blocks, format="csc")
    b = np.concatenate([problem.eq_rhs] + [c.offset for c in problem.cones])
    cones = []
    if problem.eq_matrix.shape[0]:
        cones.append(clarabel.ZeroConeT(problem.eq_matrix.shape[0]))
    cones += [clarabel.PSDTriangleConeT(c.dim) for c in problem.cones]

    opts = clarabel.DefaultSettings()
    opts.verbose = settings.verbose
    opts.max_iter = settings.max_iter
    opts.tol_gap_abs = settings.tol
    opts.tol_gap_rel = settings.tol
    opts.tol_feas = settings.tol
    opts.tol_ktratio = 1e-7
    start = time.perf_counter()
    sol = clarabel.DefaultSolver(sp.csc_matrix((n, n)), problem.objective, a, b, cones, opts).solve()
    elapsed = time.perf_counter() - start

    raw = str(sol.status)
    status = _CLARABEL_STATUS.get(raw, "solver-error")
    if status != "optimal":
        return ConicSolution(status, float("nan"), None, {}, elapsed, raw, int(sol.iterations))
    x = np.asarray(sol.x)
    return ConicSolution(
        status, float(problem.objective @ x), x, problem.residuals(x), elapsed, raw,
        int(sol.iterations),
    )


def _unsvec_map(dim: int) -> sp.csr_matrix:
    """Sparse ``svec -> vec`` (row-major) map of a symmetric matrix."""
    r, c = svec_indices(dim)
    off = r != c
    rows = np.concatenate([r * dim + c, (c * dim + r)[off]])
    cols = np.concatenate([np.arange(len(r)), np.flatnonzero(off)])
    vals = np.concatenate([np.where(off, 1 / SQRT2, 1.0), np.full(off.sum(), 1 / SQRT2)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim * dim, len(r)))


@lru_cache(maxsize=None)
def _lower_colmajor_order(dim: int) -> np.ndarray:
    """Permutation from our svec order to the lower-triangle column-major one."""
    r, c = svec_indices(dim)
    pos = np.empty((dim, dim), dtype=int)
    pos[r, c] = np.arange(len(r))
    pos[c, r] = np.arange(len(r))
    lr, lc = np.tril_indices(dim)
    order = np.lexsort((lr, lc))
    return pos[lr[order], lc[order]]


_SCS_STATUS = {
    "solved": "optimal",
    "infeasible": "infeasible-numerics",
    "unbounded": "infeasible-numerics",
    "infeasible_inaccurate": "infeasible-numerics",
    "unbounded_inaccurate": "infeasible-numerics",
}


@register_backend("scs")
def _solve_scs(problem: ConicProblem, settings: SolverSettings) -> ConicSolution:
    """Splitting conic solver; one KKT factorisation, cheap per-iteration cone projections."""
    import scs

    perms = [_lower_colmajor_order(c.dim) for c in problem.cones]
    a = sp.vstack([problem.eq_matrix] + [-c.coeffs[p] for c, p in zip(problem.cones, perms)],
                  format="csc")
    b = np.concatenate([problem.eq_rhs] + [c.offset[p] for c, p in zip(problem.cones, perms)])
    cone = {"z": problem.eq_matrix.shape[0], "s": [c.dim for c in problem.cones]}
    start = time.perf_counter()
    sol = scs.solve({"A": a, "b": b, "c": problem.objective}, cone,
                    eps_abs=settings.tol, eps_rel=settings.tol,
                    max_iters=settings.first_order_max_iter, verbose=settings.verbose)
    elapsed = time.perf_counter() - start
    raw = sol["info"]["status"]
    status = _SCS_STATUS.get(raw, "solver-error")
    iters = int(sol["info"]["iter"])
    if status != "optimal":
        return ConicSolution(status, float("nan"), None, {}, elapsed, raw, iters)
    x = np.asarray(sol["x"])
    return ConicSolution(status, float(problem.objective @ x), x, problem.residuals(x),
                         elapsed, raw, iters)


# Interior-point cost grows with the cube of each cone's svec length, so large
# dense LMIs go to the splitting solver first; it is cheap per iteration but
# can stall near degenerate optima, in which case the interior point runs.
AUTO_FIRST_ORDER_SVEC = 4000


@register_backend("auto")
def _solve_auto(problem: ConicProblem, settings: SolverSettings) -> ConicSolution:
    size = sum(c.dim * (c.dim + 1) // 2 for c in problem.cones)
    if size >= AUTO_FIRST_ORDER_SVEC:
        first = _solve_scs(problem, settings)
        if first.status == "optimal":
            return first
        second = _solve_clarabel(problem, settings)
        second.solve_time += first.solve_time
        second.raw_status = f"{second.raw_status} (after scs: {first.raw_status})"
        return second
    return _solve_clarabel(problem, settings)


def _cvxpy_backend(solver_name: str):
    def run(problem: ConicProblem, settings: SolverSettings) -> ConicSolution:
        import cvxpy as cp

        x = cp.Variable(problem.n_vars)
        cons = []
        if problem.eq_matrix.shape[0]:
            cons.append(problem.eq_matrix @ x == problem.eq_rhs)
        for cone in problem.cones:
            full = _unsvec_map(cone.dim)
            expr = full @ (cone.coeffs @ x + cone.offset)
            mat = cp.reshape(expr, (cone.dim, cone.dim), order="C")
            cons.append(0.5 * (mat + mat.T) >> 0)
        prob = cp.Problem(cp.Minimize(problem.objective @ x), cons)
        start = time.perf_counter()
        try:
            prob.solve(solver=solver_name)
        except cp.error.SolverError as exc:
            return ConicSolution("solver-error", float("nan"), None, {}, 0.0, str(exc))
        elapsed = time.perf_counter() - start
        if prob.status not in ("optimal", "optimal_inaccurate") or x.value is None:
            status = "infeasible-numerics" if "infeasible" in prob.status else "solver-error"
            return ConicSolution(status, float("nan"), None, {}, elapsed, prob.status)
        xv = np.asarray(x.value)
        return ConicSolution("optimal", float(problem.objective @ xv), xv,
                             problem.residuals(xv), elapsed, prob.status)

    return run


register_backend("cvxpy-scs")(_cvxpy_backend("SCS"))
register_backend("cvxpy-clarabel")(_cvxpy_backend("CLARABEL"))
