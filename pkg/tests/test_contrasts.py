import numpy as np
import pytest

from cgfactorial import (
    ContrastError,
    ContrastKind,
    Layout,
    centering_matrix,
    contrast_for,
    load_contrast_csv,
    two_way_contrasts,
    validate_contrast,
)


def test_centering_matrix():
    np.testing.assert_allclose(centering_matrix(2), [[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_allclose(centering_matrix(3), np.eye(3) - 1 / 3)
    with pytest.raises(ContrastError):
        centering_matrix(1)


def test_two_way_main_a():
    C = two_way_contrasts(2, 3)[ContrastKind.MAIN_A].matrix
    np.testing.assert_allclose(C, np.array([[1, 1, 1, -1, -1, -1], [-1, -1, -1, 1, 1, 1]]) / 6)


def test_two_way_interaction_2x2():
    C = two_way_contrasts(2, 2)[ContrastKind.INTERACTION].matrix
    expected = np.array([[1, -1, -1, 1], [-1, 1, 1, -1], [-1, 1, 1, -1], [1, -1, -1, 1]]) / 4
    np.testing.assert_allclose(C, expected)


def test_two_way_rejects_small_levels():
    with pytest.raises(ContrastError):
        two_way_contrasts(1, 3)


def test_main_a_hypothesis(rng):
    C = two_way_contrasts(2, 3)[ContrastKind.MAIN_A].matrix
    assert np.abs(C @ np.array([0.6, 0.6, 0.6, 0.4, 0.4, 0.4])).max() > 0.05
    for _ in range(20):
        p = rng.random(6)
        p[3:] += (p[:3].sum() - p[3:].sum()) / 3
        np.testing.assert_allclose(C @ p, 0, atol=1e-14)


def test_main_b_and_interaction_null(rng):
    cs = two_way_contrasts(3, 4)
    # additive effects: no interaction; equal column means: no B effect
    row, col = rng.random(3), rng.random(4)
    np.testing.assert_allclose(cs[ContrastKind.INTERACTION].matrix @ np.add.outer(row, col).ravel(), 0, atol=1e-14)
    np.testing.assert_allclose(cs[ContrastKind.MAIN_B].matrix @ np.repeat(row, 4), 0, atol=1e-14)


def test_kronecker_structure(rng):
    a, b = 3, 4
    C = two_way_contrasts(a, b)[ContrastKind.MAIN_A].matrix
    for _ in range(10):
        x = rng.normal(size=a)
        np.testing.assert_allclose(C @ np.kron(x, np.ones(b)), centering_matrix(a) @ x, atol=1e-14)


def test_validate_contrast():
    assert validate_contrast(centering_matrix(3), 3).d == 3
    with pytest.raises(ContrastError, match="sums"):
        validate_contrast([[1, 0, 0]], 3)
    with pytest.raises(ContrastError, match="columns"):
        validate_contrast([[1, -1]], 3)
    with pytest.raises(ContrastError):
        validate_contrast([[np.nan, 0, 0]], 3)


def test_contrast_for():
    assert contrast_for("global", 4).kind is ContrastKind.ONE_WAY_GLOBAL
    layout = Layout("two-way", 2, 3)
    assert contrast_for("interaction", 6, layout).matrix.shape == (6, 6)
    with pytest.raises(ContrastError):
        contrast_for("main-a", 3)
    with pytest.raises(ContrastError):
        contrast_for("custom", 3)


def test_load_contrast_csv(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("1,-1,0\n")
    C = load_contrast_csv(path, 3)
    assert C.kind is ContrastKind.CUSTOM
    np.testing.assert_array_equal(C.matrix, [[1, -1, 0]])
    path.write_text("1,0,0\n")
    with pytest.raises(ContrastError):
        load_contrast_csv(path, 3)
    path.write_text("a,b\n")
    with pytest.raises(ContrastError):
        load_contrast_csv(path, 3)
