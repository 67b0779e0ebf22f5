import itertools

import numpy as np
import pytest

from conftest import random_density
from pptmix.dense_oracle import (
    Bipartition,
    bipartitions,
    coupled_basis,
    dense_ppt_mixture_sdp,
    partial_transpose,
    permutation_operator,
    pi_average,
    total_spin_squared,
)
from pptmix.errors import InvalidArgumentError, ResourceLimitError
from pptmix.pi_state import expand_dense, ghz_state, mix, white_noise

BELL = np.zeros((4, 4))
BELL[np.ix_([0, 3], [0, 3])] = 0.5


def _compose(p, q):
    return tuple(p[q[i]] for i in range(len(p)))


def test_bipartition_enumeration():
    for n in range(2, 7):
        parts = bipartitions(n)
        assert len(parts) == 2 ** (n - 1) - 1
        assert len({p.members for p in parts}) == len(parts)
        assert all(0 in p.members for p in parts)
    assert Bipartition(4, (1, 2)).members == (0, 3)
    assert Bipartition(4, (1, 2)).cut_size == 2
    with pytest.raises(InvalidArgumentError):
        Bipartition(3, (0, 1, 2))


def test_permutation_group_law(rng):
    n = 4
    perms = list(itertools.permutations(range(n)))
    for _ in range(10):
        p, q = perms[rng.integers(len(perms))], perms[rng.integers(len(perms))]
        lhs = permutation_operator(n, p).matrix @ permutation_operator(n, q).matrix
        assert np.array_equal(lhs, permutation_operator(n, _compose(p, q)).matrix)


def test_permutation_moves_qubit_operators():
    z = np.diag([1.0, -1.0])
    on0 = np.kron(z, np.eye(4))
    v = permutation_operator(3, (2, 0, 1)).matrix
    assert np.array_equal(v @ on0 @ v.T, np.kron(np.eye(4), z))


def test_bell_partial_transpose():
    pt = partial_transpose(BELL, (0,)).matrix
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5)
    assert np.array_equal(partial_transpose(pt, (0,)).matrix, BELL)
    assert np.allclose(partial_transpose(BELL, (0, 1)).matrix, BELL.T)


def test_partial_transpose_covariance(rng):
    rho = random_density(4, rng)
    perm = (2, 0, 3, 1)
    v = permutation_operator(4, perm).matrix
    for members in [(0,), (0, 2), (1, 3)]:
        moved = tuple(perm[q] for q in members)
        lhs = v @ partial_transpose(rho, members).matrix @ v.T
        rhs = partial_transpose(v @ rho @ v.T, moved).matrix
        assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_pi_average_is_invariant_projection(rng):
    rho = random_density(3, rng)
    avg = pi_average(rho).matrix
    assert np.max(np.abs(pi_average(avg).matrix - avg)) < 1e-14
    v = permutation_operator(3, (1, 2, 0)).matrix
    assert np.max(np.abs(v @ avg @ v.T - avg)) < 1e-14


def test_two_qubit_coupled_basis():
    basis = coupled_basis(2)
    r = 1 / np.sqrt(2)
    assert np.allclose(basis.columns(0, 0)[:, 0], [0, r, -r, 0])
    assert np.allclose(basis.columns(2, 0), np.array([[1, 0, 0], [0, r, 0], [0, r, 0], [0, 0, 1]]))


@pytest.mark.parametrize("n", range(1, 7))
def test_coupled_basis_diagonalises_total_spin(n):
    basis = coupled_basis(n)
    u = basis.matrix
    assert np.allclose(u.T @ u, np.eye(2**n), atol=1e-13)
    expect = np.diag([tj / 2 * (tj / 2 + 1) for tj, _m, _c in basis.labels])
    assert np.max(np.abs(u.T @ total_spin_squared(n) @ u - expect)) < 1e-12


# --- SDP values against closed forms ----------------------------------------


def test_two_qubit_sdp_is_min_eigenvalue(rng):
    # one bipartition: s = min(lambda_min(rho), lambda_min(rho^T_A))
    for rho in [BELL, np.eye(4) / 4, random_density(2, rng)]:
        expect = min(np.linalg.eigvalsh(rho)[0], np.linalg.eigvalsh(partial_transpose(rho, (0,)).matrix)[0])
        assert dense_ppt_mixture_sdp(rho).s_opt == pytest.approx(expect, abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_white_noise_optimum(n):
    # P_M = 1/(2^N K) for every M is optimal by the trace bound
    k = 2 ** (n - 1) - 1
    r = dense_ppt_mixture_sdp(np.eye(2**n) / 2**n)
    assert r.s_opt == pytest.approx(1 / (2**n * k), abs=1e-8)
    assert r.verdict == "ppt-mixture"


def test_ghz3_value():
    r = dense_ppt_mixture_sdp(expand_dense(ghz_state(3)))
    assert r.s_opt == pytest.approx(-1 / 18, abs=1e-7)
    assert r.verdict == "gme"
    total = sum(r.primal.values())
    assert np.max(np.abs(total - expand_dense(ghz_state(3)).matrix)) < 1e-8


def test_relabel_invariance(rng):
    rho = random_density(3, rng)
    v = permutation_operator(3, (1, 2, 0)).matrix
    a = dense_ppt_mixture_sdp(rho).s_opt
    b = dense_ppt_mixture_sdp(v @ rho @ v.T).s_opt
    assert a == pytest.approx(b, abs=1e-7)


def test_concavity_under_mixing(rng):
    r1, r2 = random_density(3, rng), expand_dense(ghz_state(3)).matrix
    s1, s2 = dense_ppt_mixture_sdp(r1).s_opt, dense_ppt_mixture_sdp(r2).s_opt
    for lam in (0.3, 0.7):
        s = dense_ppt_mixture_sdp(lam * r1 + (1 - lam) * r2).s_opt
        assert s >= lam * s1 + (1 - lam) * s2 - 1e-7


def test_real_and_complex_fields_agree():
    rho = expand_dense(mix([(0.6, ghz_state(3)), (0.4, white_noise(3))])).matrix
    a = dense_ppt_mixture_sdp(rho, field="real")
    b = dense_ppt_mixture_sdp(rho, field="complex")
    assert (a.field, b.field) == ("real", "complex")
    assert a.s_opt == pytest.approx(b.s_opt, abs=1e-7)


def test_backends_agree(rng):
    rho = random_density(3, rng)
    vals = [dense_ppt_mixture_sdp(rho, backend=b).s_opt for b in ("clarabel", "scs", "auto")]
    assert max(vals) - min(vals) < 1e-6


def test_input_checks(rng):
    with pytest.raises(InvalidArgumentError):
        dense_ppt_mixture_sdp(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidArgumentError):
        dense_ppt_mixture_sdp(np.eye(2) / 2)
    with pytest.raises(InvalidArgumentError):
        dense_ppt_mixture_sdp(np.eye(3) / 3)
    with pytest.raises(InvalidArgumentError):
        dense_ppt_mixture_sdp(random_density(3, rng), field="real")
    with pytest.raises(ResourceLimitError):
        dense_ppt_mixture_sdp(np.eye(64) / 64)
