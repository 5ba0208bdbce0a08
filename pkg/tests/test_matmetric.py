import numpy as np
import pytest

from mmsdist import (
    DistanceMatrix,
    SizeLimitError,
    dm_distance,
    dpi_distance,
    min_vertex_cover,
)
from mmsdist.sampling import rng_stream

from oracles import dm_bruteforce, dpi_bruteforce, mvc_bruteforce

A_LINE = np.array([[0.0, 1, 3], [1, 0, 2], [3, 2, 0]])  # points {0, 1, 3}
B_LINE = np.array([[0.0, 2, 3], [2, 0, 1], [3, 1, 0]])  # points {0, 2, 3}


def _random_symmetric(rng, n, with_diagonal=False):
    m = rng.random((n, n)) * 2.0
    m = (m + m.T) / 2.0
    if not with_diagonal:
        np.fill_diagonal(m, 0.0)
    return m


def test_dm_identical_matrices():
    w = dm_distance(A_LINE, A_LINE)
    assert w.value == 0.0 and w.excluded == () and w.max_residual == 0.0


def test_dm_two_point_example():
    w = dm_distance([[0, 1], [1, 0]], [[0, 3], [3, 0]])
    assert w.value == 0.5
    assert len(w.excluded) == 1
    assert w.max_residual == 0.0


def test_dm_line_example():
    w = dm_distance(A_LINE, B_LINE)
    assert w.value == pytest.approx(1 / 3, abs=0)
    assert w.excluded == (1,)


def test_dm_infimum_at_a_gap_value():
    # all three gaps 0.5: covering the triangle costs 2/3, so the infimum
    # sits exactly at the gap value with no exclusions
    a = np.zeros((3, 3))
    b = np.full((3, 3), 0.5)
    np.fill_diagonal(b, 0.0)
    w = dm_distance(a, b)
    assert w.value == 0.5 and w.excluded == ()


def test_dm_errors():
    with pytest.raises(ValueError):
        dm_distance([[0, 1], [1, 0]], [[0.0]])
    with pytest.raises(ValueError):
        dm_distance([[0, 1], [2, 0]], [[0, 1], [1, 0]])


def test_dm_oracle_equivalence_quick():
    rng = rng_stream(21)
    for k in range(40):
        n = 2 + k % 4
        a = _random_symmetric(rng, n, with_diagonal=(k % 5 == 0))
        b = _random_symmetric(rng, n, with_diagonal=(k % 5 == 0))
        assert dm_distance(a, b).value == dm_bruteforce(a, b)


def test_dm_witness_invariants():
    rng = rng_stream(22)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        a = _random_symmetric(rng, n)
        b = _random_symmetric(rng, n)
        w = dm_distance(a, b)
        assert len(w.excluded) <= n * w.value + 1e-9
        assert w.max_residual <= w.value + 1e-9


def test_dm_sup_metric_below_one_over_n():
    rng = rng_stream(23)
    hits = 0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        a = _random_symmetric(rng, n)
        b = a + rng.random((n, n)) * 0.05
        b = (b + b.T) / 2.0
        np.fill_diagonal(b, 0.0)
        w = dm_distance(a, b)
        if w.value < 1.0 / n:
            hits += 1
            assert w.value == pytest.approx(float(np.abs(a - b).max()), abs=0)
            assert w.excluded == ()
    assert hits > 50  # the regime is actually exercised


def test_dm_pseudo_metric_axioms_sample():
    rng = rng_stream(24)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        a = _random_symmetric(rng, n)
        b = _random_symmetric(rng, n)
        c = _random_symmetric(rng, n)
        assert dm_distance(a, a).value == 0.0
        assert dm_distance(a, b).value == dm_distance(b, a).value
        assert dm_distance(a, c).value <= dm_distance(a, b).value + dm_distance(b, c).value + 1e-9


def test_dpi_identity():
    w = dpi_distance(A_LINE, A_LINE)
    assert w.value == 0.0
    assert w.permutation == (0, 1, 2)
    assert w.exact


def test_dpi_line_reversal():
    w = dpi_distance(A_LINE, B_LINE)
    assert w.value == 0.0
    assert w.permutation == (2, 1, 0)


def test_dpi_quarter_pair():
    eps = 0.01
    x = DistanceMatrix.from_points([[-eps], [0.0], [eps], [1.0]])
    y = DistanceMatrix.from_points([[0.0], [eps], [1.0], [1.0 + eps]])
    w = dpi_distance(x.entries, y.entries)
    assert w.value == 0.25
    assert len(w.inner.excluded) == 1


def test_dpi_oracle_equivalence_quick():
    rng = rng_stream(25)
    for k in range(20):
        n = 2 + k % 4
        a = _random_symmetric(rng, n)
        b = _random_symmetric(rng, n)
        assert dpi_distance(a, b).value == dpi_bruteforce(a, b)


def test_dpi_le_dm():
    rng = rng_stream(26)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        a = _random_symmetric(rng, n)
        b = _random_symmetric(rng, n)
        assert dpi_distance(a, b).value <= dm_distance(a, b).value + 1e-12


def test_heuristic_upper_bounds_exact():
    rng = rng_stream(27)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        a = _random_symmetric(rng, n)
        b = _random_symmetric(rng, n)
        h = dpi_distance(a, b, mode="heuristic")
        e = dpi_distance(a, b, mode="exact")
        assert not h.exact and e.exact
        assert h.value >= e.value - 1e-12
        # the heuristic witness is self-consistent
        bp = b[np.ix_(h.permutation, h.permutation)]
        assert dm_distance(a, bp).value == h.value


def test_dpi_size_limit():
    rng = rng_stream(28)
    a = _random_symmetric(rng, 9)
    b = _random_symmetric(rng, 9)
    with pytest.raises(SizeLimitError):
        dpi_distance(a, b, mode="exact")
    w = dpi_distance(a, b, mode="heuristic")
    assert not w.exact
    w2 = dpi_distance(a, b, mode="exact", exact_limit=9)
    assert w2.value <= w.value + 1e-12


def test_min_vertex_cover_against_bruteforce():
    rng = rng_stream(29)
    for _ in range(60):
        n = int(rng.integers(2, 9))
        edges = []
        for i in range(n):
            for j in range(i, n):
                if rng.random() < 0.35:
                    edges.append((i, j))
        cover = min_vertex_cover(n, edges)
        assert cover is not None
        covered = all(i in cover or j in cover for i, j in edges)
        assert covered
        assert len(cover) == mvc_bruteforce(n, edges)
        cap = mvc_bruteforce(n, edges)
        assert min_vertex_cover(n, edges, max_size=cap - 1) is None or cap == 0
