"""Brute-force reference path for small N.

Everything here works on full ``2^N x 2^N`` matrices: explicit permutation
operators, partial transposes, the coupled spin basis, and the PPT-mixture
SDP over all ``2^(N-1) - 1`` bipartitions. Qubit 0 is the most significant
bit of a computational basis index, and ``|0>`` is the ``m = +1/2`` state.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import conic
from .errors import InvalidArgumentError, ResourceLimitError
from .report import EPS_VERDICT, SdpReport, verdict_for
from .spin_structure import cg_table

BASIS_MAX_QUBITS = 8
SDP_MAX_QUBITS = 5
PERMUTATION_MAX_QUBITS = 10


@dataclass(frozen=True)
class DenseOperator:
    n_qubits: int
    matrix: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @classmethod
    def from_matrix(cls, matrix) -> "DenseOperator":
        matrix = np.asarray(matrix)
        return cls(n_qubits_of(matrix), matrix)


def n_qubits_of(matrix: np.ndarray) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {matrix.shape}")
    d = matrix.shape[0]
    n = d.bit_length() - 1
    if d < 2 or 2**n != d:
        raise InvalidArgumentError(f"dimension {d} is not a power of two")
    return n


def _matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, DenseOperator) else np.asarray(op)


@dataclass(frozen=True)
class Bipartition:
    """Canonical bipartition ``M | Mbar``: ``members`` always contains qubit 0."""

    n_qubits: int
    members: tuple[int, ...]

    def __post_init__(self):
        m = set(self.members)
        if not m or len(m) >= self.n_qubits or not m <= set(range(self.n_qubits)):
            raise InvalidArgumentError(
                f"{sorted(m)} is not a proper nonempty subset of {self.n_qubits} qubits"
            )
        if 0 not in m:
            m = set(range(self.n_qubits)) - m
        object.__setattr__(self, "members", tuple(sorted(m)))

    @property
    def complement(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n_qubits) if q not in self.members)

    @property
    def cut_size(self) -> int:
        return min(len(self.members), self.n_qubits - len(self.members))


def bipartitions(n_qubits: int) -> list[Bipartition]:
    rest = range(1, n_qubits)
    out = []
    for size in range(0, n_qubits - 1):
        for extra in itertools.combinations(rest, size):
            out.append(Bipartition(n_qubits, (0, *extra)))
    return out


# --- permutations and partial transposes -----------------------------------


def _bits(n_qubits: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    return (idx[:, None] >> (n_qubits - 1 - np.arange(n_qubits))) & 1


def permutation_operator(n_qubits: int, perm) -> DenseOperator:
    """``V(pi)|x_0 .. x_{N-1}> = |x_{pi^-1(0)} .. x_{pi^-1(N-1)}>``; ``perm[i] = pi(i)``."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n_qubits)):
        raise InvalidArgumentError(f"{perm} is not a permutation of {n_qubits} qubits")
    if n_qubits > PERMUTATION_MAX_QUBITS:
        raise ResourceLimitError(f"permutation operators limited to N <= {PERMUTATION_MAX_QUBITS}")
    bits = _bits(n_qubits)
    moved = np.empty_like(bits)
    moved[:, list(perm)] = bits
    weights = 1 << (n_qubits - 1 - np.arange(n_qubits))
    target = moved @ weights
    d = 2**n_qubits
    v = np.zeros((d, d))
    v[target, np.arange(d)] = 1.0
    return DenseOperator(n_qubits, v)


def partial_transpose(op, part) -> DenseOperator:
    """Transpose the tensor factors listed in ``part`` (a Bipartition or qubit list)."""
    mat = _matrix(op)
    n = n_qubits_of(mat)
    qubits = part.members if isinstance(part, Bipartition) else tuple(part)
    axes = list(range(2 * n))
    for q in qubits:
        axes[q], axes[q + n] = axes[q + n], axes[q]
    out = mat.reshape((2,) * (2 * n)).transpose(axes).reshape(mat.shape)
    return DenseOperator(n, out)


@lru_cache(maxsize=None)
def _pt_permutation(n_qubits: int, qubits: tuple[int, ...]) -> np.ndarray:
    d = 2**n_qubits
    return partial_transpose(np.arange(d * d).reshape(d, d), qubits).matrix.ravel()


def pi_average(op) -> DenseOperator:
    """Explicit ``(1/N!) sum_pi V(pi) op V(pi)^T`` over all permutations."""
    mat = _matrix(op)
    n = n_qubits_of(mat)
    total = np.zeros_like(mat, dtype=complex)
    for perm in itertools.permutations(range(n)):
        v = permutation_operator(n, perm).matrix
        total += v @ mat @ v.T
    return DenseOperator(n, total / math.factorial(n))


def total_spin_squared(n_qubits: int) -> np.ndarray:
    """Dense ``J^2`` with ``J_a = sum_i sigma_a^(i) / 2``."""
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    d = 2**n_qubits
    j2 = np.zeros((d, d), dtype=complex)
    for p in paulis:
        ja = np.zeros((d, d), dtype=complex)
        for i in range(n_qubits):
            ja += np.kron(np.kron(np.eye(2**i), p), np.eye(2 ** (n_qubits - i - 1))) / 2
        j2 += ja @ ja
    return j2


# --- coupled spin basis ----------------------------------------------------


@dataclass(frozen=True)
class CoupledBasis:
    """Columns ``|j, m, alpha>`` grouped by (two_j ascending, copy, m descending)."""

    n_qubits: int
    matrix: np.ndarray
    labels: tuple[tuple[int, int, int], ...]  # (two_j, two_m, copy) per column
    paths: dict  # (two_j, copy) -> coupling history of intermediate two_j values
    starts: dict  # (two_j, copy) -> first column

    def columns(self, two_j: int, copy: int) -> np.ndarray:
        start = self.starts[(two_j, copy)]
        return self.matrix[:, start:start + two_j + 1]

    def copies(self, two_j: int) -> int:
        return sum(1 for (tj, _c) in self.paths if tj == two_j)


@lru_cache(maxsize=None)
def coupled_basis(n_qubits: int) -> CoupledBasis:
    """Real orthogonal coupled basis built by adding one qubit at a time."""
    if n_qubits < 1:
        raise InvalidArgumentError("n_qubits must be >= 1")
    if n_qubits > BASIS_MAX_QUBITS:
        raise ResourceLimitError(
            f"dense coupled basis limited to N <= {BASIS_MAX_QUBITS} (got {n_qubits})"
        )
    groups = [(1, (1,), np.eye(2))]
    eye2 = np.eye(2)
    for _ in range(n_qubits - 1):
        nxt = []
        for two_j, path, vecs in groups:
            lifted = np.kron(vecs, eye2)
            table = cg_table(two_j, 1)
            for two_big in table.total_two_js:
                nxt.append((two_big, path + (two_big,), lifted @ table.blocks[two_big]))
        groups = nxt
    groups.sort(key=lambda g: g[0])  # stable: keeps coupling order inside a sector

    cols, labels, paths, starts, seen = [], [], {}, {}, {}
    for two_j, path, vecs in groups:
        copy = seen.get(two_j, 0)
        seen[two_j] = copy + 1
        paths[(two_j, copy)] = path
        starts[(two_j, copy)] = len(labels)
        cols.append(vecs)
        labels += [(two_j, two_j - 2 * i, copy) for i in range(two_j + 1)]
    mat = np.hstack(cols)
    mat.setflags(write=False)
    return CoupledBasis(n_qubits, mat, tuple(labels), paths, starts)


def embed_bipartite_blocks(n_qubits: int, k: int, blocks: dict) -> DenseOperator:
    """Dense operator of ``(+)_{j_k, j_kbar} B (x) 1_{K_jk (x) K_jkbar}`` on qubits ``0..k-1 | k..N-1``.

    ``blocks[(two_j_k, two_j_kbar)]`` is expressed in the product basis
    ``|j_k m_k> (x) |j_kbar m_kbar>`` (m descending on each side).
    """
    left, right = coupled_basis(k), coupled_basis(n_qubits - k)
    d = 2**n_qubits
    out = np.zeros((d, d), dtype=complex)
    for (ta, tb), block in blocks.items():
        for ca in range(left.copies(ta)):
            wa = left.columns(ta, ca)
            for cb in range(right.copies(tb)):
                w = np.kron(wa, right.columns(tb, cb))
                out += w @ block @ w.T
    return DenseOperator(n_qubits, out)


# --- the unsymmetrised PPT-mixture SDP -------------------------------------


def is_real_operator(mat: np.ndarray, atol: float = 1e-14) -> bool:
    return not np.iscomplexobj(mat) or float(np.max(np.abs(mat.imag), initial=0.0)) <= atol


def assemble_dense(rho, field: str = "auto"):
    """Conic program for ``max s : rho = sum_M P_M, P_M >= s1, P_M^{T_M} >= s1``.

    Returns ``(problem, parts, real)`` where ``parts`` lists the bipartitions
    in variable order (each ``P_M`` owns a contiguous coordinate slice).
    """
    mat = _matrix(rho)
    n = n_qubits_of(mat)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
        raise InvalidArgumentError("rho must be Hermitian")
    if n < 2:
        raise InvalidArgumentError("need at least 2 qubits")
    if n > SDP_MAX_QUBITS:
        raise ResourceLimitError(f"dense SDP limited to N <= {SDP_MAX_QUBITS} (got {n})")
    real = _resolve_field(field, is_real_operator(mat))
    d = 2**n
    parts = bipartitions(n)
    n_par = conic.n_coordinates(d, real)
    n_vars = n_par * len(parts) + 1
    s_col = n_vars - 1
    coords = conic.hermitian_coordinates(d, real)

    cones, eq_terms = [], []
    for idx, part in enumerate(parts):
        place = sp.hstack(
            [sp.csr_matrix((d * d, idx * n_par)), coords,
             sp.csr_matrix((d * d, n_vars - (idx + 1) * n_par))], format="csr"
        )
        eq_terms.append(place)
        for label, lin in (("P", place), ("PT", place[_pt_permutation(n, part.members)])):
            rows, diag, dim = conic.real_embedding_rows(lin, d, real)
            rows = sp.lil_matrix(rows)
            rows[diag, s_col] = -1.0
            cones.append(conic.PsdCone(dim, sp.csr_matrix(rows), np.zeros(rows.shape[0]),
                                       (label, part.members)))
    eq, select = conic.hermitian_equality_rows(sum(eq_terms[1:], eq_terms[0]), d, real)
    objective = np.zeros(n_vars)
    objective[s_col] = -1.0
    problem = conic.ConicProblem(n_vars, objective, eq, select(mat), cones)
    return problem, parts, real


def _resolve_field(field: str, target_is_real: bool) -> bool:
    if field == "auto":
        return target_is_real
    if field not in ("real", "complex"):
        raise InvalidArgumentError(f"field must be auto|real|complex, got {field!r}")
    if field == "real" and not target_is_real:
        raise InvalidArgumentError("field='real' requires a real target")
    return field == "real"


def dense_ppt_mixture_sdp(rho, *, field: str = "auto", backend: str = "auto",
                          settings: conic.SolverSettings | None = None,
                          eps_verdict: float = EPS_VERDICT) -> SdpReport:
    """Optimal ``s`` of the PPT-mixture SDP; ``s_opt >= 0`` iff rho is a PPT mixture.

    For real rho the optimum is attained by real ``P_M`` (average a solution
    with its complex conjugate), so ``field='auto'`` then uses real
    symmetric variables.
    """
    start = time.perf_counter()
    problem, parts, real = assemble_dense(rho, field)
    sol = conic.solve_conic(problem, backend, settings)
    s_opt = -sol.objective if sol.status == "optimal" else float("nan")
    primal = None
    if sol.x is not None:
        d = 2 ** parts[0].n_qubits
        n_par = conic.n_coordinates(d, real)
        primal = {
            p.members: conic.hermitian_from_coordinates(sol.x[i * n_par:(i + 1) * n_par], d, real)
            for i, p in enumerate(parts)
        }
    return SdpReport(
        status=sol.status,
        s_opt=s_opt,
        verdict=verdict_for(s_opt, eps_verdict),
        residuals=sol.residuals,
        wall_time=time.perf_counter() - start,
        n_qubits=parts[0].n_qubits,
        solver_status=sol.raw_status,
        field="real" if real else "complex",
        primal=primal,
    )
