"""Synthetic generators and the N,C,dist argument parser."""

import numpy as np
import pytest

from sagatt.errors import ConfigError
from sagatt.synthetic import (
    SyntheticSpec,
    clustered_tokens,
    gaussian_tokens,
    parse_synthetic,
    simplex_directions,
)


def test_gaussian_shape_and_determinism():
    a = gaussian_tokens(50, 7, seed=3)
    b = gaussian_tokens(50, 7, seed=3)
    assert a.shape == (50, 7)
    assert (a == b).all()
    assert not (a == gaussian_tokens(50, 7, seed=4)).all()


def test_simplex_pairwise_cosine():
    for g in (2, 3, 4, 8):
        dirs = simplex_directions(g, 16)
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), np.ones(g), atol=1e-12)
        for i in range(g):
            for j in range(i + 1, g):
                assert dirs[i] @ dirs[j] == pytest.approx(-1.0 / (g - 1), abs=1e-12)


def test_simplex_needs_room():
    with pytest.raises(ConfigError):
        simplex_directions(8, 4)


def test_clustered_groups_are_separated():
    tokens, labels = clustered_tokens(100, 16, groups=4, spread=0.05, seed=0)
    assert tokens.shape == (100, 16)
    np.testing.assert_allclose(np.linalg.norm(tokens, axis=1), np.ones(100), atol=1e-12)
    # contiguous label blocks, last absorbs the remainder
    np.testing.assert_array_equal(labels, np.repeat([0, 1, 2, 3], 25))
    for a in range(4):
        for b in range(a + 1, 4):
            cross = tokens[labels == a] @ tokens[labels == b].T
            # inter-group cosine distance stays above 1
            assert cross.max() < 0.0


def test_clustered_intra_group_is_tight():
    tokens, labels = clustered_tokens(80, 8, groups=2, spread=0.02, seed=1)
    inside = tokens[labels == 0] @ tokens[labels == 0].T
    assert inside.min() > 0.9


@pytest.mark.parametrize("text,want", [
    ("256,64,gaussian", SyntheticSpec(256, 64, "gaussian")),
    ("100,32,clustered", SyntheticSpec(100, 32, "clustered")),
    ("64,16,clustered(8,0.1)", SyntheticSpec(64, 16, "clustered", groups=8, spread=0.1)),
])
def test_parse_synthetic_forms(text, want):
    assert parse_synthetic(text) == want


@pytest.mark.parametrize("text", [
    "256,64",
    "a,b,gaussian",
    "0,64,gaussian",
    "256,64,uniform",
    "256,64,clustered(x,1)",
])
def test_parse_synthetic_rejects_garbage(text):
    with pytest.raises(ConfigError):
        parse_synthetic(text)


def test_spec_make_round_trip():
    spec = parse_synthetic("40,16,clustered(4,0.05)")
    tokens = spec.make(seed=5)
    assert tokens.shape == (40, 16)
    assert (tokens == spec.make(seed=5)).all()
