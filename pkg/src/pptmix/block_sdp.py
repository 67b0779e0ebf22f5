"""Polynomial-size PPT-mixture SDP for permutationally invariant states.

For each cut size ``k`` the variable ``Q_k`` is invariant under permutations
inside ``1..k`` and inside ``k+1..N``; in the tensor product of the two
coupled bases it is ``(+)_{j_k, j_kbar} B^k_{j_k, j_kbar} (x) 1``, so the
blocks themselves are the SDP variables. The partial transpose of the first
``k`` qubits acts blockwise as transposition of the ``j_k`` factor, and the
PI projection of ``Q_k`` is obtained by Clebsch-Gordan recoupling followed by
multiplicity-weighted averaging.

The PSD slack of ``Q_k`` is scaled by the number of bipartitions with cut
size ``k`` (``slack_weighting="bipartition"``). With that scaling ``s_opt``
coincides with the optimum of the unsymmetrised SDP over all bipartitions;
``"uniform"`` uses ``Q_k >= s 1`` and gives the same sign but a rescaled value.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import conic
from .errors import InvalidArgumentError
from .pi_state import PIState
from .report import EPS_VERDICT, SdpReport, verdict_for
from .spin_structure import (
    SpinStructure,
    bipartition_count,
    build_structure,
    cg_table,
    cut_sizes,
)

SLACK_WEIGHTINGS = ("bipartition", "uniform")


@dataclass(frozen=True)
class BipartiteQ:
    """Blocks of ``Q_{(1..k)|(k+1..N)}`` keyed by ``(two_j_k, two_j_kbar)``."""

    n_qubits: int
    k: int
    blocks: dict

    def __post_init__(self):
        left, right = build_structure(self.k), build_structure(self.n_qubits - self.k)
        expected = {(a, b) for a in left.two_js for b in right.two_js}
        if set(self.blocks) != expected:
            raise InvalidArgumentError(
                f"blocks for k={self.k}, N={self.n_qubits} must be keyed by {sorted(expected)}"
            )
        for (a, b), blk in self.blocks.items():
            if np.shape(blk) != ((a + 1) * (b + 1),) * 2:
                raise InvalidArgumentError(f"block {(a, b)} has shape {np.shape(blk)}")

    def scaled(self, factor: float) -> "BipartiteQ":
        return BipartiteQ(self.n_qubits, self.k, {key: factor * b for key, b in self.blocks.items()})

    def __add__(self, other: "BipartiteQ") -> "BipartiteQ":
        if (other.n_qubits, other.k) != (self.n_qubits, self.k):
            raise InvalidArgumentError("cannot add Q operators of different shape")
        return BipartiteQ(self.n_qubits, self.k,
                          {key: b + other.blocks[key] for key, b in self.blocks.items()})

    def multiplicity(self, key) -> int:
        a, b = key
        return build_structure(self.k).dim_mult(a) * build_structure(self.n_qubits - self.k).dim_mult(b)

    def trace(self) -> float:
        return float(sum(self.multiplicity(key) * np.trace(b).real for key, b in self.blocks.items()))


def block_keys(n_qubits: int, k: int) -> list[tuple[int, int]]:
    return [(a, b) for a in build_structure(k).two_js for b in build_structure(n_qubits - k).two_js]


def block_partial_transpose(block: np.ndarray, two_j_a: int, two_j_b: int) -> np.ndarray:
    """Transpose the first tensor factor of a block on ``H_{j_a} (x) H_{j_b}``."""
    da, db = two_j_a + 1, two_j_b + 1
    b = np.asarray(block)
    if b.shape != (da * db, da * db):
        raise InvalidArgumentError(f"block shape {b.shape} does not factor as {da}x{db}")
    return b.reshape(da, db, da, db).transpose(2, 1, 0, 3).reshape(da * db, da * db)


def _pt_permutation(two_j_a: int, two_j_b: int) -> np.ndarray:
    dim = (two_j_a + 1) * (two_j_b + 1)
    return block_partial_transpose(np.arange(dim * dim).reshape(dim, dim), two_j_a, two_j_b).ravel()


def _recouple_weight(structure: SpinStructure, k: int, two_j_a: int, two_j_b: int, two_j: int) -> float:
    left, right = build_structure(k), build_structure(structure.n_qubits - k)
    return left.dim_mult(two_j_a) * right.dim_mult(two_j_b) / structure.dim_mult(two_j)


def recouple(q: BipartiteQ, structure: SpinStructure | None = None) -> list[np.ndarray]:
    """Blocks of ``[Q]_PI`` over the N-qubit sectors (ascending j)."""
    structure = structure or build_structure(q.n_qubits)
    if structure.n_qubits != q.n_qubits:
        raise InvalidArgumentError("structure and Q disagree on N")
    out = [np.zeros((s.dim_spin, s.dim_spin), dtype=complex) for s in structure.sectors]
    for (a, b), blk in q.blocks.items():
        table = cg_table(a, b)
        for two_j, cg in table.blocks.items():
            w = _recouple_weight(structure, q.k, a, b, two_j)
            out[structure.index(two_j)] += w * (cg.T @ blk @ cg)
    return out


# --- assembly ----------------------------------------------------------------


@dataclass(frozen=True)
class BlockVariable:
    k: int
    two_j_a: int
    two_j_b: int
    offset: int
    n_params: int

    @property
    def dim(self) -> int:
        return (self.two_j_a + 1) * (self.two_j_b + 1)

    @property
    def key(self) -> tuple[int, int]:
        return (self.two_j_a, self.two_j_b)


@dataclass
class SdpProblem:
    structure: SpinStructure
    target: PIState
    variables: list[BlockVariable]
    s_index: int
    conic: conic.ConicProblem
    real: bool
    slack_weights: dict = field(default_factory=dict)

    @property
    def cut_sizes(self) -> list[int]:
        return sorted(self.slack_weights)

    def stats(self) -> dict:
        return {
            "n_qubits": self.structure.n_qubits,
            "field": "real" if self.real else "complex",
            "n_cuts": len(self.slack_weights),
            "n_blocks": len(self.variables),
            "n_psd_constraints": len(self.conic.cones),
            "max_block_dim": max(v.dim for v in self.variables),
            "n_block_params": sum(v.n_params for v in self.variables),
            "n_vars": self.conic.n_vars,
            "n_eq_rows": self.conic.eq_matrix.shape[0],
        }

    def unpack(self, x: np.ndarray) -> list[BipartiteQ]:
        per_k = {k: {} for k in self.cut_sizes}
        for v in self.variables:
            per_k[v.k][v.key] = conic.hermitian_from_coordinates(
                x[v.offset:v.offset + v.n_params], v.dim, self.real
            )
        return [BipartiteQ(self.structure.n_qubits, k, blocks) for k, blocks in per_k.items()]


def _placed(coords: sp.csr_matrix, offset: int, n_vars: int) -> sp.csr_matrix:
    coo = coords.tocoo()
    return sp.csr_matrix((coo.data, (coo.row, coo.col + offset)), shape=(coords.shape[0], n_vars))


def assemble(target: PIState, field: str = "auto",
             slack_weighting: str = "bipartition") -> SdpProblem:
    """Build ``max s : target = sum_k [Q_k]_PI, Q_k >= w_k s 1, Q_k^{T_{1..k}} >= w_k s 1``."""
    structure = target.structure
    n = structure.n_qubits
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 qubits, got {n}")
    if slack_weighting not in SLACK_WEIGHTINGS:
        raise InvalidArgumentError(f"slack_weighting must be one of {SLACK_WEIGHTINGS}")
    if field == "auto":
        real = target.is_real()
    elif field in ("real", "complex"):
        real = field == "real"
        if real and not target.is_real():
            raise InvalidArgumentError("field='real' requires a real target")
    else:
        raise InvalidArgumentError(f"field must be auto|real|complex, got {field!r}")

    variables, offset = [], 0
    for k in cut_sizes(n):
        for a, b in block_keys(n, k):
            n_par = conic.n_coordinates((a + 1) * (b + 1), real)
            variables.append(BlockVariable(k, a, b, offset, n_par))
            offset += n_par
    s_index = offset
    n_vars = offset + 1
    weights = {k: float(bipartition_count(n, k)) if slack_weighting == "bipartition" else 1.0
               for k in cut_sizes(n)}

    cones = []
    eq_parts = {s.two_j: [] for s in structure.sectors}
    for v in variables:
        coords = conic.hermitian_coordinates(v.dim, real)
        lin = _placed(coords, v.offset, n_vars)
        for label, rows_lin in (("Q", lin), ("QT", lin[_pt_permutation(v.two_j_a, v.two_j_b)])):
            rows, diag, dim = conic.real_embedding_rows(rows_lin, v.dim, real)
            rows = rows.tolil()
            rows[diag, s_index] = -weights[v.k]
            cones.append(conic.PsdCone(dim, rows.tocsr(), np.zeros(rows.shape[0]),
                                        (label, v.k, v.key)))
        table = cg_table(v.two_j_a, v.two_j_b)
        for two_j, cg in table.blocks.items():
            if not structure.has_sector(two_j):
                continue
            w = _recouple_weight(structure, v.k, v.two_j_a, v.two_j_b, two_j)
            mapped = w * (np.kron(cg.T, cg.T) @ coords)
            eq_parts[two_j].append(_placed(sp.csr_matrix(mapped), v.offset, n_vars))

    eq_rows, eq_rhs = [], []
    for sector, block in zip(structure.sectors, target.blocks):
        terms = eq_parts[sector.two_j]
        lin = sum(terms[1:], terms[0])
        rows, select = conic.hermitian_equality_rows(lin, sector.dim_spin, real)
        eq_rows.append(rows)
        eq_rhs.append(select(block))
    objective = np.zeros(n_vars)
    objective[s_index] = -1.0
    problem = conic.ConicProblem(
        n_vars, objective, sp.vstack(eq_rows, format="csr"), np.concatenate(eq_rhs), cones
    )
    return SdpProblem(structure, target, variables, s_index, problem, real, weights)


def solve(problem: SdpProblem, *, backend: str = "clarabel",
          settings: conic.SolverSettings | None = None,
          eps_verdict: float = EPS_VERDICT) -> SdpReport:
    start = time.perf_counter()
    sol = conic.solve_conic(problem.conic, backend, settings)
    s_opt = -sol.objective if sol.status == "optimal" else float("nan")
    residuals = dict(sol.residuals)
    primal = None
    if sol.x is not None:
        primal = problem.unpack(sol.x)
        recoupled = [np.zeros_like(b) for b in problem.target.blocks]
        for q in primal:
            for i, b in enumerate(recouple(q, problem.structure)):
                recoupled[i] = recoupled[i] + b
        residuals["recouple_max"] = float(max(
            np.max(np.abs(r - t)) for r, t in zip(recoupled, problem.target.blocks)
        ))
    return SdpReport(
        status=sol.status,
        s_opt=s_opt,
        verdict=verdict_for(s_opt, eps_verdict),
        residuals=residuals,
        wall_time=time.perf_counter() - start,
        n_qubits=problem.structure.n_qubits,
        solver_status=sol.raw_status,
        field="real" if problem.real else "complex",
        primal=primal,
    )


def block_ppt_mixture_sdp(target: PIState, *, field: str = "auto",
                          slack_weighting: str = "bipartition", backend: str = "clarabel",
                          settings: conic.SolverSettings | None = None,
                          eps_verdict: float = EPS_VERDICT) -> SdpReport:
    start = time.perf_counter()
    problem = assemble(target, field, slack_weighting)
    report = solve(problem, backend=backend, settings=settings, eps_verdict=eps_verdict)
    report.wall_time = time.perf_counter() - start
    return report
