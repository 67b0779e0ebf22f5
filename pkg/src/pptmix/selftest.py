"""Dense-versus-block cross-validation on random instances."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

from .analysis import solve_state
from .block_sdp import BipartiteQ, block_keys, block_partial_transpose, recouple
from .config import Settings, default_settings
from .dense_oracle import embed_bipartite_blocks, partial_transpose, pi_average
from .errors import InvalidArgumentError
from .pi_state import (
    expand_dense,
    mix,
    project_pi,
    random_pi_state,
    random_symmetric_pure,
    symmetric_pure_state,
    white_noise,
)
from .spin_structure import build_structure, cg_table, cut_sizes

SELFTEST_MAX_QUBITS = 5


@dataclass(frozen=True)
class PropertyResult:
    name: str
    n_qubits: int
    passed: bool
    error: float
    bound: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  N={self.n_qubits}  {self.name}  err={self.error:.3g}  bound={self.bound:.0e}"


@dataclass
class SelftestReport:
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)


def random_density(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank Ginibre density matrix; not permutation invariant."""
    d = 2**n_qubits
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    g = rng.normal(size=(dim, dim))
    if not real:
        g = g + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def random_bipartite_q(n_qubits: int, k: int, rng: np.random.Generator) -> BipartiteQ:
    blocks = {}
    for a, b in block_keys(n_qubits, k):
        blocks[(a, b)] = random_hermitian((a + 1) * (b + 1), rng)
    return BipartiteQ(n_qubits, k, blocks)


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _check_projection(n, rng):
    rho = random_density(n, rng)
    once = project_pi(rho)
    twice = project_pi(expand_dense(once))
    yield "pi-projection-idempotent", once.max_deviation(twice), 1e-10
    trace_err = abs(once.trace() - 1.0)
    psd_err = max(0.0, -once.min_eigenvalue())
    yield "pi-projection-trace-psd", max(trace_err, psd_err), 1e-10
    yield "pi-projection-equals-average", _max_abs(expand_dense(once).matrix, pi_average(rho).matrix), 1e-10


def _check_cg(n, rng):
    worst = 0.0
    for a in range(n + 1):
        for b in range(n + 1):
            m = cg_table(a, b).stacked()
            worst = max(worst, _max_abs(m.T @ m, np.eye(m.shape[1])))
    yield "cg-orthogonality", worst, 1e-12


def _check_blocks(n, rng):
    structure = build_structure(n)
    pt_err = rec_err = lin_err = 0.0
    for k in cut_sizes(n):
        q1, q2 = random_bipartite_q(n, k, rng), random_bipartite_q(n, k, rng)
        dense = embed_bipartite_blocks(n, k, q1.blocks).matrix
        pt_blocks = {key: block_partial_transpose(b, *key) for key, b in q1.blocks.items()}
        pt_err = max(pt_err, _max_abs(partial_transpose(dense, tuple(range(k))).matrix,
                                      embed_bipartite_blocks(n, k, pt_blocks).matrix))
        projected = project_pi(dense, is_state=False)
        rec_err = max(rec_err, max(_max_abs(r, p) for r, p in
                                   zip(recouple(q1, structure), projected.blocks)))
        a, b = rng.normal(size=2)
        lhs = recouple(q1.scaled(a) + q2.scaled(b), structure)
        rhs = [a * x + b * y for x, y in zip(recouple(q1, structure), recouple(q2, structure))]
        lin_err = max(lin_err, max(_max_abs(x, y) for x, y in zip(lhs, rhs)))
    yield "block-partial-transpose", pt_err, 1e-10
    yield "recouple-equals-dense-projection", rec_err, 1e-10
    yield "recouple-linearity", lin_err, 1e-12


def _sdp_state(n, rng):
    # complex instances at N=5 need a dense SDP far beyond a quick check
    if n >= 5:
        pure = symmetric_pure_state(n, rng.normal(size=n + 1))
    else:
        pure = random_symmetric_pure(n, rng)
    p = rng.uniform(0.3, 1.0)
    return mix([(p, pure), (1 - p, white_noise(n))])


def _check_sdp(n, rng, settings):
    state = _sdp_state(n, rng)
    block = solve_state(state, settings)
    dense = solve_state(state, settings, method="dense")
    yield "block-sdp-equals-dense-sdp", abs(block.s_opt - dense.s_opt), 1e-6

    other = random_pi_state(n, rng) if n < 5 else white_noise(n)
    lam = rng.uniform(0.2, 0.8)
    s1, s2 = block.s_opt, solve_state(other, settings).s_opt
    s_mix = solve_state(mix([(lam, state), (1 - lam, other)]), settings).s_opt
    yield "s-opt-concave-under-mixing", max(0.0, lam * s1 + (1 - lam) * s2 - s_mix), 1e-7


def selftest(max_n: int = 3, seed: int = 0, settings: Settings | None = None,
             stream=None) -> SelftestReport:
    """Run every property for ``N = 2..max_n``, printing one line per property."""
    if not 2 <= max_n <= SELFTEST_MAX_QUBITS:
        raise InvalidArgumentError(f"max_n must lie in [2, {SELFTEST_MAX_QUBITS}], got {max_n}")
    settings = settings or default_settings()
    stream = stream if stream is not None else sys.stdout
    rng = np.random.default_rng(seed)
    report = SelftestReport()
    for n in range(2, max_n + 1):
        checks = [_check_projection(n, rng), _check_cg(n, rng), _check_blocks(n, rng),
                  _check_sdp(n, rng, settings)]
        for gen in checks:
            for name, err, bound in gen:
                passed = bool(np.isfinite(err) and err <= bound)
                result = PropertyResult(name, n, passed, float(err), bound)
                report.results.append(result)
                print(result.line(), file=stream, flush=True)
    print(f"{'OK' if report.ok else 'FAILED'}: {sum(r.passed for r in report.results)}"
          f"/{len(report.results)} properties", file=stream)
    return report
