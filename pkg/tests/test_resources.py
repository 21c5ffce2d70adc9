import time
from fractions import Fraction

import pytest

from antisym.builder import OrbitalSet, build_full_recursive
from antisym.resources import (
    avg_phase_corrections,
    builder_counts,
    crossover_set,
    hybrid_cost,
    n_comp,
    n_ctrl,
    resource_rows,
    rows_to_csv,
    rows_to_text,
    scaling_text,
    tally_structure,
)

PAPER_CROSSOVER = [2, 3, 5, 6, 9, 10, 11, 17, 18, 19, 20, 33]


def test_n_comp_values():
    assert n_comp(2) == 1
    assert n_comp(4) == 5
    assert n_comp(64) == 543
    assert n_comp(65) == 1471
    with pytest.raises(ValueError):
        n_comp(1)


def test_n_ctrl_values():
    assert n_ctrl(1) == 0
    assert n_ctrl(2) == 1
    assert n_ctrl(65) == 2080
    with pytest.raises(ValueError):
        n_ctrl(0)


def test_ratios():
    assert abs(n_comp(64) / n_ctrl(64) - 0.269) <= 0.001
    assert abs(n_comp(65) / n_ctrl(65) - 0.707) <= 0.001


def test_crossover():
    assert crossover_set(40) == PAPER_CROSSOVER
    assert crossover_set(4) == [2, 3]
    assert 64 not in crossover_set(70)
    with pytest.raises(ValueError):
        crossover_set(1)


def test_n_comp_blocks():
    for m in range(1, 8):
        block = [n_comp(n) for n in range(2 ** (m - 1) + 1, 2**m + 1) if n >= 2]
        assert len(set(block)) == 1  # flat within a padded block
    for m in range(1, 8):
        assert n_comp(2**m + 1) > n_comp(2**m)


def test_hybrid():
    assert hybrid_cost(65, 64) == (n_comp(64), 64)
    assert hybrid_cost(10, 10) == (n_comp(10), 0)
    assert hybrid_cost(4, 2) == (1, 5)
    with pytest.raises(ValueError):
        hybrid_cost(4, 5)
    with pytest.raises(ValueError):
        hybrid_cost(4, 1)


def test_avg_corrections_exact():
    assert avg_phase_corrections(2) == Fraction(1, 2)
    assert avg_phase_corrections(3) == Fraction(5, 4)
    assert avg_phase_corrections(4) == Fraction(5, 2)
    with pytest.raises(ValueError):
        avg_phase_corrections(1)


def test_avg_corrections_monotone():
    vals = [avg_phase_corrections(n) for n in range(2, 80)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_avg_corrections_ratio_slow_approach():
    # the exact ratio at N=200 is 0.4671 and climbs toward one half
    r200 = float(avg_phase_corrections(200) / n_ctrl(200))
    r1000 = float(avg_phase_corrections(1000) / n_ctrl(1000))
    assert abs(r200 - 0.46708) < 1e-5
    assert r200 < r1000 < 0.5


def test_fast():
    t0 = time.perf_counter()
    crossover_set(40), n_comp(65), avg_phase_corrections(200)
    assert time.perf_counter() - t0 < 1


def test_builder_counts_examples():
    assert builder_counts(3, 2).as_tuple() == (6, 3, 6, 3)
    assert builder_counts(1, 1).as_tuple() == (1, 0, 0, 0)
    assert builder_counts(4, 3).as_tuple() == (10, 6, 18, 6)


@pytest.mark.parametrize("n", [2, 5, 12, 20, 33])
def test_builder_counts_match_construction(n):
    eta = max(1, (n - 1).bit_length())
    c = build_full_recursive(OrbitalSet.from_integers(range(n), eta), opaque=True)
    assert tally_structure(c) == builder_counts(n, eta)


def test_tables():
    rows = resource_rows(2, 70)
    csv = rows_to_csv(rows)
    lines = csv.splitlines()
    assert lines[0] == "N,n_comp,n_ctrl,comp_over_ctrl,crossover,avg_corrections,corrections_over_ctrl"
    assert lines[1].startswith("2,1,1,1.000000,1,0.500000")
    row64 = next(r for r in rows if r["N"] == 64)
    assert abs(row64["comp_over_ctrl"] - 0.269) <= 0.001
    assert [r["N"] for r in resource_rows(2, 40) if r["crossover"]] == PAPER_CROSSOVER
    text = rows_to_text(rows[:3])
    assert len({len(line) for line in text.splitlines()}) == 1
    assert "O(N^2 log N_s)" in scaling_text()
    with pytest.raises(ValueError):
        resource_rows(1, 5)
