"""Schur-Weyl bookkeeping for N qubits.

All spins are stored doubled (``two_j = 2 j``, ``two_m = 2 m``) so that
half-integers stay exact integers. Magnetic quantum numbers are always
ordered descending, ``m = j, j - 1, ..., -j``; index ``i`` inside a spin-j
multiplet therefore carries ``two_m = two_j - 2 i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class SpinSector:
    two_j: int
    dim_mult: int

    @property
    def dim_spin(self) -> int:
        return self.two_j + 1

    @property
    def j(self) -> float:
        return self.two_j / 2


@dataclass(frozen=True)
class SpinStructure:
    """Spin sectors ``H_j (x) K_j`` of ``(C^2)^{(x) N}``, ascending in j."""

    n_qubits: int
    sectors: tuple[SpinSector, ...]
    _by_two_j: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_two_j", {s.two_j: s for s in self.sectors})

    @property
    def dimension(self) -> int:
        return 2**self.n_qubits

    @property
    def two_js(self) -> tuple[int, ...]:
        return tuple(s.two_j for s in self.sectors)

    def sector(self, two_j: int) -> SpinSector:
        try:
            return self._by_two_j[two_j]
        except KeyError:
            raise InvalidArgumentError(
                f"no spin sector two_j={two_j} for N={self.n_qubits}"
            ) from None

    def dim_mult(self, two_j: int) -> int:
        s = self._by_two_j.get(two_j)
        return 0 if s is None else s.dim_mult

    def has_sector(self, two_j: int) -> bool:
        return two_j in self._by_two_j

    def index(self, two_j: int) -> int:
        return self.two_js.index(two_j)

    def cg(self, two_j_a: int, two_j_b: int) -> "CGTable":
        return cg_table(two_j_a, two_j_b)


def multiplicity(n_qubits: int, two_j: int) -> int:
    """``dim K_j = C(N, N/2 - j) - C(N, N/2 - j - 1)``; zero outside the allowed range."""
    if two_j < 0 or two_j > n_qubits or (n_qubits - two_j) % 2:
        return 0
    lower = (n_qubits - two_j) // 2
    if lower == 0:
        return 1
    return comb(n_qubits, lower) - comb(n_qubits, lower - 1)


@lru_cache(maxsize=None)
def build_structure(n_qubits: int) -> SpinStructure:
    if not isinstance(n_qubits, (int, np.integer)) or n_qubits < 1:
        raise InvalidArgumentError(f"n_qubits must be a positive integer, got {n_qubits!r}")
    n_qubits = int(n_qubits)
    sectors = tuple(
        SpinSector(two_j, multiplicity(n_qubits, two_j))
        for two_j in range(n_qubits % 2, n_qubits + 1, 2)
    )
    return SpinStructure(n_qubits, sectors)


def pi_parameter_count(structure: SpinStructure) -> int:
    """Real parameters of a PI operator, ``sum_j (2j+1)^2``."""
    return sum(s.dim_spin**2 for s in structure.sectors)


def cut_sizes(n_qubits: int) -> list[int]:
    """Cut sizes ``k = 1 .. N'/2`` with ``N' = N`` (even) or ``N - 1`` (odd)."""
    return list(range(1, n_qubits // 2 + 1))


def pmix_parameter_count(n_qubits: int) -> int:
    """Exact real-parameter count of a PI PPT mixture, ``sum_k C(k+3,3) C(N-k+3,3)``."""
    if n_qubits < 2:
        raise InvalidArgumentError(f"need at least 2 qubits, got {n_qubits}")
    return sum(comb(k + 3, 3) * comb(n_qubits - k + 3, 3) for k in cut_sizes(n_qubits))


def block_count(n_qubits: int) -> int:
    """Number of blocks ``B^k_{j_k, j_kbar}`` over all cut sizes."""
    if n_qubits < 2:
        raise InvalidArgumentError(f"need at least 2 qubits, got {n_qubits}")
    return sum((k // 2 + 1) * ((n_qubits - k) // 2 + 1) for k in cut_sizes(n_qubits))


def max_block_dim(n_qubits: int) -> int:
    """Largest block, attained at ``k = N'/2`` with both sides maximally aligned."""
    if n_qubits < 2:
        raise InvalidArgumentError(f"need at least 2 qubits, got {n_qubits}")
    k = n_qubits // 2
    return (k + 1) * (n_qubits - k + 1)


def bipartition_count(n_qubits: int, k: int) -> int:
    """Inequivalent bipartitions whose smaller side has ``k`` qubits."""
    if 2 * k == n_qubits:
        return comb(n_qubits, k) // 2
    return comb(n_qubits, k)


# --- Clebsch-Gordan tables -------------------------------------------------


@dataclass(frozen=True)
class CGTable:
    """Real orthogonal coupling ``|j_a m_a> (x) |j_b m_b>  ->  |j m>``.

    ``blocks[two_j]`` has shape ``((two_j_a+1)(two_j_b+1), two_j+1)``; row
    ``i_a * (two_j_b + 1) + i_b`` is the product state, column ``i`` is
    ``|j, j - i>``. Entry = ``<j_a m_a; j_b m_b | j m>`` (Condon-Shortley).
    """

    two_j_a: int
    two_j_b: int
    blocks: dict[int, np.ndarray]

    @property
    def total_two_js(self) -> tuple[int, ...]:
        return tuple(sorted(self.blocks))

    def stacked(self) -> np.ndarray:
        return np.hstack([self.blocks[t] for t in self.total_two_js])

    def coefficient(self, two_m_a: int, two_m_b: int, two_j: int, two_m: int) -> float:
        if two_j not in self.blocks or two_m_a + two_m_b != two_m:
            return 0.0
        if abs(two_m_a) > self.two_j_a or abs(two_m_b) > self.two_j_b or abs(two_m) > two_j:
            return 0.0
        row = (self.two_j_a - two_m_a) // 2 * (self.two_j_b + 1) + (self.two_j_b - two_m_b) // 2
        return float(self.blocks[two_j][row, (two_j - two_m) // 2])


def _ladder(two_j: int, two_m: np.ndarray, sign: int) -> np.ndarray:
    # sqrt(j(j+1) - m(m +/- 1)) in doubled units, extended precision
    two_m = np.asarray(two_m, dtype=np.int64)
    val = (two_j * (two_j + 2) - two_m * (two_m + 2 * sign)).astype(np.longdouble) / 4
    return np.sqrt(np.maximum(val, 0))


@lru_cache(maxsize=None)
def cg_table(two_j_a: int, two_j_b: int) -> CGTable:
    """Build the coupling table by ladder-operator recursion.

    For each total spin the highest-weight state is fixed by ``J+ psi = 0``
    with ``<j_a j_a; j_b, j - j_a | j j> > 0``; lower states follow from
    repeated application of ``J- = J-_a + J-_b``.
    """
    if two_j_a < 0 or two_j_b < 0:
        raise InvalidArgumentError("spins must be non-negative")
    da, db = two_j_a + 1, two_j_b + 1
    ma = two_j_a - 2 * np.arange(da)
    mb = two_j_b - 2 * np.arange(db)
    lower_a = _ladder(two_j_a, ma, -1)
    lower_b = _ladder(two_j_b, mb, -1)

    blocks = {}
    for two_j in range(abs(two_j_a - two_j_b), two_j_a + two_j_b + 1, 2):
        psi = np.zeros((da, db), dtype=np.longdouble)
        # highest weight: walk m_a downwards from j_a along m_a + m_b = j
        two_mu = two_j_a
        coeff = np.longdouble(1)
        while True:
            ia, ib = (two_j_a - two_mu) // 2, (two_j_b - (two_j - two_mu)) // 2
            psi[ia, ib] = coeff
            nxt_a, mb_here = two_mu - 2, two_j - two_mu
            if nxt_a < -two_j_a or mb_here + 2 > two_j_b:
                break
            up_a = _ladder(two_j_a, np.array([nxt_a]), +1)[0]
            up_b = _ladder(two_j_b, np.array([mb_here]), +1)[0]
            coeff = -coeff * up_b / up_a
            two_mu = nxt_a
        psi /= np.sqrt(np.sum(psi * psi))

        cols = np.zeros((da * db, two_j + 1), dtype=np.longdouble)
        cols[:, 0] = psi.ravel()
        for i in range(1, two_j + 1):
            two_m = two_j - 2 * (i - 1)
            nxt = np.zeros_like(psi)
            nxt[1:, :] += psi[:-1, :] * lower_a[:-1, None]
            nxt[:, 1:] += psi[:, :-1] * lower_b[None, :-1]
            psi = nxt / _ladder(two_j, np.array([two_m]), -1)[0]
            cols[:, i] = psi.ravel()
        arr = np.asarray(cols, dtype=np.float64)
        arr.setflags(write=False)
        blocks[two_j] = arr
    return CGTable(two_j_a, two_j_b, blocks)
