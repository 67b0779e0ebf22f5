from math import comb

import numpy as np
import pytest
from sympy import Rational
from sympy.physics.quantum.cg import CG

from pptmix.dense_oracle import total_spin_squared
from pptmix.errors import InvalidArgumentError
from pptmix.spin_structure import (
    bipartition_count,
    block_count,
    build_structure,
    cg_table,
    cut_sizes,
    max_block_dim,
    multiplicity,
    pi_parameter_count,
    pmix_parameter_count,
)


def test_three_qubit_sectors():
    s = build_structure(3)
    assert s.two_js == (1, 3)
    assert [x.dim_mult for x in s.sectors] == [2, 1]
    assert [x.dim_spin for x in s.sectors] == [2, 4]


def test_four_qubit_sectors():
    s = build_structure(4)
    assert s.two_js == (0, 2, 4)
    assert [x.dim_mult for x in s.sectors] == [2, 3, 1]


@pytest.mark.parametrize("n", range(1, 13))
def test_sectors_fill_hilbert_space(n):
    s = build_structure(n)
    assert sum(x.dim_spin * x.dim_mult for x in s.sectors) == 2**n


@pytest.mark.parametrize("n", range(1, 7))
def test_multiplicities_match_total_spin_eigenspaces(n):
    eig = np.linalg.eigvalsh(total_spin_squared(n))
    s = build_structure(n)
    for sector in s.sectors:
        j = sector.j
        count = int(np.sum(np.abs(eig - j * (j + 1)) < 1e-8))
        assert count == sector.dim_spin * sector.dim_mult


def test_multiplicity_outside_range_is_zero():
    assert multiplicity(4, 1) == 0
    assert multiplicity(4, 6) == 0
    assert multiplicity(4, -2) == 0
    assert build_structure(4).dim_mult(6) == 0


def test_pi_parameter_count_is_binomial():
    assert pi_parameter_count(build_structure(3)) == 20
    assert pi_parameter_count(build_structure(4)) == 35
    for n in range(1, 12):
        assert pi_parameter_count(build_structure(n)) == comb(n + 3, 3)
    assert pi_parameter_count(build_structure(10)) == 286


def test_pmix_counts():
    assert pmix_parameter_count(2) == 16
    assert pmix_parameter_count(3) == 4 * 10
    assert pmix_parameter_count(4) == 4 * 20 + 10 * 10
    assert cut_sizes(5) == [1, 2]
    assert cut_sizes(6) == [1, 2, 3]


def test_block_counts_and_dims():
    assert block_count(3) == 2
    assert max_block_dim(3) == 6
    assert block_count(4) == 2 + 4
    assert max_block_dim(4) == 9


def test_bipartition_count_sums_to_all_bipartitions():
    for n in range(2, 12):
        assert sum(bipartition_count(n, k) for k in cut_sizes(n)) == 2 ** (n - 1) - 1


def test_invalid_sizes():
    with pytest.raises(InvalidArgumentError):
        build_structure(0)
    with pytest.raises(InvalidArgumentError):
        pmix_parameter_count(1)
    with pytest.raises(InvalidArgumentError):
        build_structure(3).sector(5)


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 2), (3, 2), (4, 3), (2, 5)])
def test_cg_matches_sympy(a, b):
    table = cg_table(a, b)
    for two_j in table.total_two_js:
        for ma in range(-a, a + 1, 2):
            for mb in range(-b, b + 1, 2):
                for m in range(-two_j, two_j + 1, 2):
                    ref = CG(Rational(a, 2), Rational(ma, 2), Rational(b, 2), Rational(mb, 2),
                             Rational(two_j, 2), Rational(m, 2)).doit()
                    assert table.coefficient(ma, mb, two_j, m) == pytest.approx(float(ref), abs=1e-13)


@pytest.mark.parametrize("a", range(0, 11))
@pytest.mark.parametrize("b", range(0, 11))
def test_cg_orthogonal(a, b):
    m = cg_table(a, b).stacked()
    assert m.shape == ((a + 1) * (b + 1),) * 2
    assert np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) <= 1e-12


def test_cg_selection_rule():
    table = cg_table(2, 3)
    assert table.total_two_js == (1, 3, 5)
    assert table.coefficient(2, 1, 5, 1) == 0.0
    for two_j, block in table.blocks.items():
        assert block.shape == (12, two_j + 1)


def test_cg_known_values():
    t = cg_table(1, 1)
    r = 1 / np.sqrt(2)
    assert t.coefficient(1, -1, 0, 0) == pytest.approx(r)
    assert t.coefficient(-1, 1, 0, 0) == pytest.approx(-r)
    assert t.coefficient(1, -1, 2, 0) == pytest.approx(r)
    assert t.coefficient(1, 1, 2, 2) == pytest.approx(1.0)
