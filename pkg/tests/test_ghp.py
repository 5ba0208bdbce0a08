import numpy as np
import pytest

from mmsdist import (
    DistanceMatrix,
    FiniteMMS,
    GluingError,
    StrategyError,
    best_ghp_upper_bound,
    check_distance_matrix,
    delta_of_coupling,
    dpi_distance,
    ghp_bounds_uniform,
    ghp_upper_bound,
    glue_by_relation,
    theta_map,
    validate_distance_matrix,
)
from mmsdist.experiments import sharp_pair
from mmsdist.sampling import rng_stream

A_LINE = validate_distance_matrix([[0.0, 1, 3], [1, 0, 2], [3, 2, 0]])
B_LINE = validate_distance_matrix([[0.0, 2, 3], [2, 0, 1], [3, 1, 0]])


def _space(labels, points, mass=None):
    d = DistanceMatrix.from_points(points)
    m = np.full(d.n, 1.0 / d.n) if mass is None else np.asarray(mass, float)
    return FiniteMMS(tuple(labels), d, m, coords=np.asarray(points, float))


def test_glue_single_points():
    pt = FiniteMMS(("a",), DistanceMatrix([[0.0]]), [1.0])
    g = glue_by_relation(pt, pt, [(0, 0)], 0.2)
    assert g.cross[0, 0] == pytest.approx(0.2)


def test_glue_two_point_spaces():
    x = _space("ab", [[0.0], [1.0]])
    y = _space("cd", [[0.0], [1.5]])
    g = glue_by_relation(x, y, [(0, 0), (1, 1)], 0.5)
    # the shortcut x0 -> y0 -> y1 -> x1 has length 2.5 >= 1, so dx survives
    assert np.array_equal(g.full_matrix()[:2, :2], x.dist.entries)
    assert check_distance_matrix(g.full_matrix()) == []
    with pytest.raises(GluingError):
        glue_by_relation(x, y, [(0, 0), (1, 1)], 0.0)


def test_glue_requires_relation_and_nonneg_t():
    x = _space("ab", [[0.0], [1.0]])
    with pytest.raises(ValueError):
        glue_by_relation(x, x, [], 0.1)
    with pytest.raises(ValueError):
        glue_by_relation(x, x, [(0, 0)], -0.1)


def test_random_gluings_preserve_intra_distances():
    rng = rng_stream(41)
    for _ in range(60):
        nx, ny = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        x = _space([f"x{i}" for i in range(nx)], rng.random((nx, 2)))
        y = _space([f"y{i}" for i in range(ny)], rng.random((ny, 2)))
        k = int(rng.integers(1, min(nx, ny) + 1))
        rel = [(int(i), int(j)) for i, j in zip(rng.permutation(nx)[:k], rng.permutation(ny)[:k])]
        t = float(max(x.dist.diameter(), y.dist.diameter())) / 2.0 + 0.05
        g = glue_by_relation(x, y, rel, t)
        full = g.full_matrix()
        assert np.array_equal(full[:nx, :nx], x.dist.entries)
        assert np.array_equal(full[nx:, nx:], y.dist.entries)
        assert check_distance_matrix(full, tol=1e-9) == []


def test_identify_identical_spaces_gives_zero():
    x = _space("abc", [[0.0], [1.0], [2.5]])
    b = ghp_upper_bound(x, x, "identify")
    assert b.upper == 0.0
    assert b.method == "identify"


def test_sharp_spaces_identify_upper_is_epsilon():
    for eps in (0.02, 0.1, 0.2):
        x, y = sharp_pair(1.0, eps)
        b = ghp_upper_bound(x, y, "identify")
        assert b.upper == pytest.approx(eps, abs=1e-12)
        assert delta_of_coupling(b.coupling) == pytest.approx(b.upper, abs=1e-9)


def test_permutation_strategy_on_line_pair():
    x, y = theta_map(A_LINE), theta_map(B_LINE)
    b = ghp_upper_bound(x, y, "permutation")
    assert b.upper <= 2e-9  # d_pi = 0, bridged at the tolerance floor
    assert b.lower == 0.0


def test_permutation_strategy_requires_uniform():
    x, _ = sharp_pair(1.0, 0.1)
    with pytest.raises(StrategyError):
        ghp_upper_bound(x, theta_map(A_LINE), "permutation")


def test_net_strategy_needs_and_uses_coords():
    x = _space("ab", [[0.0, 0.0], [1.0, 0.0]])
    y = _space("cd", [[0.05, 0.0], [1.05, 0.0]])
    b = ghp_upper_bound(x, y, "net")
    assert b.method == "net"
    assert b.upper <= 0.06
    plain = FiniteMMS(("a", "b"), x.dist, x.mass)
    with pytest.raises(StrategyError):
        ghp_upper_bound(plain, plain, "net")
    # an explicit cross grid substitutes for coordinates
    b2 = ghp_upper_bound(plain, plain, "net", cross=np.array([[0.01, 1.0], [1.0, 0.01]]))
    assert b2.upper <= 0.02


def test_bounds_uniform_identical():
    b = ghp_bounds_uniform(A_LINE, A_LINE)
    assert (b.lower, b.upper) == (0.0, 0.0)


def test_bounds_uniform_quarter_pair():
    eps = 0.01
    x = validate_distance_matrix(DistanceMatrix.from_points([[-eps], [0.0], [eps], [1.0]]).entries)
    y = validate_distance_matrix(
        DistanceMatrix.from_points([[0.0], [eps], [1.0], [1.0 + eps]]).entries
    )
    b = ghp_bounds_uniform(x, y)
    assert b.lower == pytest.approx(0.125, abs=0)
    assert b.upper <= 0.25 + 1e-9
    assert b.lower <= b.upper


def test_bounds_uniform_sandwich_random():
    rng = rng_stream(42)
    for _ in range(30):
        a = validate_distance_matrix(DistanceMatrix.from_points(rng.random((4, 2))).entries)
        b = validate_distance_matrix(DistanceMatrix.from_points(rng.random((4, 2))).entries)
        bounds = ghp_bounds_uniform(a, b)
        dpi = dpi_distance(a.entries, b.entries).value
        assert bounds.lower <= bounds.upper + 1e-9
        assert bounds.upper <= dpi + 1e-9
        assert dpi <= 2.0 * bounds.upper + 1e-9
        assert delta_of_coupling(bounds.coupling) >= bounds.upper - 1e-9


def test_upper_bound_symmetry():
    rng = rng_stream(43)
    for _ in range(15):
        a = theta_map(validate_distance_matrix(DistanceMatrix.from_points(rng.random((4, 2))).entries))
        b = theta_map(validate_distance_matrix(DistanceMatrix.from_points(rng.random((4, 2))).entries))
        fwd = ghp_upper_bound(a, b, "permutation").upper
        bwd = ghp_upper_bound(b, a, "permutation").upper
        assert fwd == pytest.approx(bwd, abs=1e-9)


def test_relabelled_space_collapses_bounds():
    rng = rng_stream(44)
    for _ in range(15):
        a = validate_distance_matrix(DistanceMatrix.from_points(rng.random((5, 2))).entries)
        perm = rng.permutation(5)
        b = DistanceMatrix(a.entries[np.ix_(perm, perm)])
        bounds = ghp_bounds_uniform(a, b)
        assert bounds.lower == 0.0
        assert bounds.upper <= 1e-8


def test_best_strategy_picks_minimum():
    x, y = sharp_pair(1.0, 0.1)
    best = best_ghp_upper_bound(x, y)
    assert best.method == "identify"
    assert best.upper == pytest.approx(0.1, abs=1e-12)
