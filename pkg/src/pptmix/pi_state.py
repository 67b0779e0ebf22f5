"""Permutationally invariant operators stored as spin-sector blocks.

A PI operator is ``(+)_j B_j (x) 1_{K_j}`` in the coupled spin basis, so the
list of blocks ``B_j`` (one per sector, ascending j, m descending) describes
it completely. ``|0>`` carries ``m = +1/2``; a Dicke state with ``k``
excitations sits at ``m = N/2 - k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .dense_oracle import DenseOperator, coupled_basis, n_qubits_of
from .errors import InvalidArgumentError, ResourceLimitError
from .spin_structure import SpinStructure, build_structure

HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
DENSE_MAX_QUBITS = 8


@dataclass(frozen=True)
class PIState:
    """Blocks ``B_j`` of a PI operator; ``is_state`` marks unit-trace PSD operators."""

    structure: SpinStructure
    blocks: tuple[np.ndarray, ...]
    is_state: bool = field(default=True)

    def __post_init__(self):
        if len(self.blocks) != len(self.structure.sectors):
            raise InvalidArgumentError(
                f"expected {len(self.structure.sectors)} blocks, got {len(self.blocks)}"
            )
        cleaned = []
        for sector, block in zip(self.structure.sectors, self.blocks):
            b = np.array(block, dtype=complex)
            if b.shape != (sector.dim_spin, sector.dim_spin):
                raise InvalidArgumentError(
                    f"block for two_j={sector.two_j} must be {sector.dim_spin}x{sector.dim_spin}, "
                    f"got {b.shape}"
                )
            scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
            if np.max(np.abs(b - b.conj().T), initial=0.0) > HERMITIAN_ATOL * scale:
                raise InvalidArgumentError(f"block for two_j={sector.two_j} is not Hermitian")
            b = (b + b.conj().T) / 2
            b.setflags(write=False)
            cleaned.append(b)
        object.__setattr__(self, "blocks", tuple(cleaned))
        if self.is_state:
            if abs(self.trace() - 1) > 1e-9:
                raise InvalidArgumentError(f"state must have unit trace, got {self.trace():.12g}")
            if self.min_eigenvalue() < -PSD_ATOL:
                raise InvalidArgumentError(
                    f"state is not PSD (min eigenvalue {self.min_eigenvalue():.3e})"
                )

    @property
    def n_qubits(self) -> int:
        return self.structure.n_qubits

    def block(self, two_j: int) -> np.ndarray:
        return self.blocks[self.structure.index(two_j)]

    def trace(self) -> float:
        return float(sum(s.dim_mult * np.trace(b).real
                         for s, b in zip(self.structure.sectors, self.blocks)))

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(b)[0] for b in self.blocks))

    def is_real(self, atol: float = 1e-14) -> bool:
        return all(np.max(np.abs(b.imag), initial=0.0) <= atol for b in self.blocks)

    def weights(self) -> list[float]:
        """Sector probabilities ``p_j = dim(K_j) tr B_j``."""
        return [s.dim_mult * float(np.trace(b).real)
                for s, b in zip(self.structure.sectors, self.blocks)]

    def max_deviation(self, other: "PIState") -> float:
        return float(max(np.max(np.abs(a - b)) for a, b in zip(self.blocks, other.blocks)))


def _zero_blocks(structure: SpinStructure) -> list[np.ndarray]:
    return [np.zeros((s.dim_spin, s.dim_spin), dtype=complex) for s in structure.sectors]


def from_blocks(n_qubits: int, blocks, is_state: bool = True) -> PIState:
    return PIState(build_structure(n_qubits), tuple(blocks), is_state)


def symmetric_pure_state(n_qubits: int, amplitudes) -> PIState:
    """Pure state in the ``j = N/2`` sector with amplitudes over ``m = N/2 .. -N/2``."""
    structure = build_structure(n_qubits)
    amp = np.asarray(amplitudes, dtype=complex)
    if amp.shape != (n_qubits + 1,):
        raise InvalidArgumentError(f"need {n_qubits + 1} amplitudes, got {amp.shape}")
    amp = amp / np.linalg.norm(amp)
    blocks = _zero_blocks(structure)
    blocks[-1] = np.outer(amp, amp.conj())
    return PIState(structure, tuple(blocks))


def dicke_state(n_qubits: int, excitations: int) -> PIState:
    if n_qubits < 1:
        raise InvalidArgumentError("n_qubits must be >= 1")
    if not 0 <= excitations <= n_qubits:
        raise InvalidArgumentError(f"excitations must lie in [0, {n_qubits}], got {excitations}")
    amp = np.zeros(n_qubits + 1)
    amp[excitations] = 1.0
    return symmetric_pure_state(n_qubits, amp)


def w_state(n_qubits: int) -> PIState:
    return dicke_state(n_qubits, 1)


def ghz_state(n_qubits: int) -> PIState:
    if n_qubits < 2:
        raise InvalidArgumentError(f"GHZ needs at least 2 qubits, got {n_qubits}")
    amp = np.zeros(n_qubits + 1)
    amp[0] = amp[-1] = 1.0
    return symmetric_pure_state(n_qubits, amp)


def white_noise(n_qubits: int) -> PIState:
    structure = build_structure(n_qubits)
    return PIState(structure, tuple(np.eye(s.dim_spin) / 2**n_qubits for s in structure.sectors))


def mix(states) -> PIState:
    """Block-wise combination ``sum_i w_i rho_i`` of ``(weight, PIState)`` pairs."""
    states = list(states)
    if not states:
        raise InvalidArgumentError("nothing to mix")
    n = states[0][1].n_qubits
    if any(s.n_qubits != n for _w, s in states):
        raise InvalidArgumentError("all states must have the same number of qubits")
    weights = np.array([w for w, _s in states], dtype=float)
    if np.any(weights < 0):
        raise InvalidArgumentError("mixing weights must be non-negative")
    is_state = abs(weights.sum() - 1) <= 1e-12 and all(s.is_state for _w, s in states)
    structure = states[0][1].structure
    blocks = _zero_blocks(structure)
    for w, s in states:
        for i, b in enumerate(s.blocks):
            blocks[i] = blocks[i] + w * b
    return PIState(structure, tuple(blocks), is_state)


def ghz_w_noise(n_qubits: int, p1: float, p2: float) -> PIState:
    """``p1 |GHZ><GHZ| + p2 |W><W| + (1 - p1 - p2) 1/2^N``."""
    check_simplex(p1, p2)
    return mix([(p1, ghz_state(n_qubits)), (p2, w_state(n_qubits)),
                (max(0.0, 1 - p1 - p2), white_noise(n_qubits))])


def check_simplex(p1: float, p2: float, atol: float = 1e-12):
    if p1 < -atol or p2 < -atol or p1 + p2 > 1 + atol:
        raise InvalidArgumentError(f"(p1, p2) = ({p1}, {p2}) is outside the simplex")


# --- dense conversions ------------------------------------------------------


def _basis_for(n_qubits: int):
    if n_qubits > DENSE_MAX_QUBITS:
        raise ResourceLimitError(
            f"dense conversion limited to N <= {DENSE_MAX_QUBITS} (got {n_qubits})"
        )
    return coupled_basis(n_qubits)


def project_pi(dense, is_state: bool | None = None) -> PIState:
    """Blocks of ``[rho]_PI``: average each sector's diagonal copies over ``dim K_j``."""
    mat = dense.matrix if isinstance(dense, DenseOperator) else np.asarray(dense)
    n = n_qubits_of(mat)
    basis = _basis_for(n)
    structure = build_structure(n)
    u = basis.matrix
    rotated = u.T @ mat @ u
    blocks = []
    for sector in structure.sectors:
        acc = np.zeros((sector.dim_spin, sector.dim_spin), dtype=complex)
        for copy in range(sector.dim_mult):
            start = basis.starts[(sector.two_j, copy)]
            sl = slice(start, start + sector.dim_spin)
            acc += rotated[sl, sl]
        blocks.append(acc / sector.dim_mult)
    if is_state is None:
        is_state = _looks_like_state(blocks, structure)
    return PIState(structure, tuple(blocks), is_state)


def _looks_like_state(blocks, structure) -> bool:
    tr = sum(s.dim_mult * np.trace(b).real for s, b in zip(structure.sectors, blocks))
    return abs(tr - 1) <= 1e-9 and min(np.linalg.eigvalsh((b + b.conj().T) / 2)[0]
                                        for b in blocks) >= -PSD_ATOL


def expand_dense(state: PIState) -> DenseOperator:
    """``U ((+)_j B_j (x) 1_{K_j}) U^T`` in the computational basis."""
    n = state.n_qubits
    basis = _basis_for(n)
    d = 2**n
    inner = np.zeros((d, d), dtype=complex)
    for sector, block in zip(state.structure.sectors, state.blocks):
        for copy in range(sector.dim_mult):
            start = basis.starts[(sector.two_j, copy)]
            sl = slice(start, start + sector.dim_spin)
            inner[sl, sl] = block
    u = basis.matrix
    return DenseOperator(n, u @ inner @ u.T)


# --- CLI input schema -------------------------------------------------------

FAMILIES = ("ghz", "w", "dicke", "custom-blocks")


@dataclass(frozen=True)
class StateSpec:
    """JSON-serialisable description of a PI state.

    For ``ghz``/``w``/``dicke``, ``p1`` weighs the family's pure state and
    ``p2`` weighs the W state; the remainder is white noise. With family
    ``ghz`` this is exactly the GHZ/W/noise plane. ``custom-blocks`` takes
    explicit sector blocks and ignores the weights.
    """

    family: str
    n_qubits: int
    excitations: int = 0
    p1: float = 1.0
    p2: float = 0.0
    blocks: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not isinstance(self.n_qubits, int) or self.n_qubits < 1:
            raise InvalidArgumentError(f"n must be a positive integer, got {self.n_qubits!r}")
        if self.family == "dicke" and not 0 <= self.excitations <= self.n_qubits:
            raise InvalidArgumentError(f"k must lie in [0, {self.n_qubits}]")
        if self.family == "custom-blocks" and self.blocks is None:
            raise InvalidArgumentError("custom-blocks requires 'blocks'")
        check_simplex(self.p1, self.p2)

    def pure_state(self) -> PIState:
        if self.family == "ghz":
            return ghz_state(self.n_qubits)
        if self.family == "w":
            return w_state(self.n_qubits)
        if self.family == "dicke":
            return dicke_state(self.n_qubits, self.excitations)
        return from_blocks(self.n_qubits, [np.asarray(b) for b in self.blocks])

    def build(self) -> PIState:
        base = self.pure_state()
        if self.family == "custom-blocks" or (self.p1 == 1.0 and self.p2 == 0.0):
            return base
        n = self.n_qubits
        return mix([(self.p1, base), (self.p2, w_state(n)),
                    (max(0.0, 1 - self.p1 - self.p2), white_noise(n))])

    @classmethod
    def from_dict(cls, data: dict) -> "StateSpec":
        if not isinstance(data, dict):
            raise InvalidArgumentError("state spec must be a JSON object")
        unknown = set(data) - {"family", "n", "k", "p1", "p2", "blocks"}
        if unknown:
            raise InvalidArgumentError(f"unknown state spec keys: {sorted(unknown)}")
        try:
            family, n = data["family"], data["n"]
        except KeyError as exc:
            raise InvalidArgumentError(f"state spec is missing {exc.args[0]!r}") from None
        blocks = None
        if data.get("blocks") is not None:
            blocks = tuple(_decode_block(b) for b in data["blocks"])
        p1 = data.get("p1")
        if p1 is None:
            p1 = 1.0
        return cls(family, n, int(data.get("k", 0) or 0), float(p1),
                   float(data.get("p2", 0.0) or 0.0), blocks)

    @classmethod
    def from_json(cls, text: str) -> "StateSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"invalid JSON: {exc}") from None

    def to_dict(self) -> dict:
        out = {"family": self.family, "n": self.n_qubits}
        if self.family == "dicke":
            out["k"] = self.excitations
        if self.family == "custom-blocks":
            out["blocks"] = [_encode_block(b) for b in self.blocks]
        else:
            out["p1"], out["p2"] = self.p1, self.p2
        return out

    def with_weights(self, p1: float, p2: float = 0.0) -> "StateSpec":
        return StateSpec(self.family, self.n_qubits, self.excitations, p1, p2, self.blocks)


def _decode_block(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError):
        raise InvalidArgumentError("custom blocks must be arrays of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"custom block has shape {arr.shape}; expected (d, d, 2)")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_block(block) -> list:
    b = np.asarray(block, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in b]


def random_symmetric_pure(n_qubits: int, rng: np.random.Generator) -> PIState:
    amp = rng.normal(size=n_qubits + 1) + 1j * rng.normal(size=n_qubits + 1)
    return symmetric_pure_state(n_qubits, amp)


def random_pi_state(n_qubits: int, rng: np.random.Generator, rank: int | None = None) -> PIState:
    """Random unit-trace PSD blocks with random sector weights."""
    structure = build_structure(n_qubits)
    blocks = []
    for s in structure.sectors:
        r = rank or s.dim_spin
        g = rng.normal(size=(s.dim_spin, r)) + 1j * rng.normal(size=(s.dim_spin, r))
        blocks.append(g @ g.conj().T)
    weights = rng.dirichlet(np.ones(len(blocks)))
    blocks = [w * b / (np.trace(b).real * s.dim_mult)
              for w, b, s in zip(weights, blocks, structure.sectors)]
    return PIState(structure, tuple(blocks))


def dicke_vector(n_qubits: int, excitations: int) -> np.ndarray:
    """Computational-basis Dicke vector, built by enumerating bit strings."""
    vec = np.zeros(2**n_qubits)
    for idx in range(2**n_qubits):
        if bin(idx).count("1") == excitations:
            vec[idx] = 1.0
    return vec / np.sqrt(comb(n_qubits, excitations))
