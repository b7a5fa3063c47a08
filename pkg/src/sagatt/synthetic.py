"""Synthetic token generators for tests and the harness.

The clustered generator gives a ground-truth partition: g unit
directions with pairwise cosine -1/(g-1) (the vertices of a regular
simplex), so any two groups sit at cosine distance > 1 while members
stay tightly around their direction. Group blocks are contiguous in
raster order, matching how the stratified subsampler slices the
sequence.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_CLUSTERED = re.compile(r"^clustered(?:\((\d+)\s*,\s*([0-9.eE+-]+)\))?$")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gaussian_tokens(n: int, c: int, seed: int = 0) -> np.ndarray:
    """Independent standard-normal tokens."""
    if n < 1 or c < 1:
        raise ConfigError(f"need positive dimensions, got {n}x{c}")
    return _rng(seed).standard_normal((n, c))


def simplex_directions(groups: int, c: int) -> np.ndarray:
    """g unit rows with every pairwise cosine equal to -1/(g-1)."""
    if groups < 2:
        raise ConfigError(f"need >= 2 groups, got {groups}")
    if c < groups:
        raise ConfigError(f"need channels >= groups, got {c} < {groups}")
    dirs = np.zeros((groups, c))
    eye = np.eye(groups) - 1.0 / groups
    dirs[:, :groups] = eye / np.linalg.norm(eye[0])
    return dirs


def clustered_tokens(n: int, c: int, groups: int = 4, spread: float = 0.05,
                     seed: int = 0):
    """Unit-norm tokens in g well-separated groups.

    Returns (tokens, labels) with contiguous label blocks; the last
    block absorbs the remainder. Members are direction + spread * noise,
    renormalized, so small spreads keep intra-group cosine near 1.
    """
    if n < groups:
        raise ConfigError(f"need n >= groups, got {n} < {groups}")
    if spread < 0:
        raise ConfigError(f"spread must be non-negative, got {spread}")
    dirs = simplex_directions(groups, c)
    rng = _rng(seed)
    base = n // groups
    tokens = np.empty((n, c))
    labels = np.empty(n, dtype=np.int64)
    for g in range(groups):
        lo = g * base
        hi = (g + 1) * base if g < groups - 1 else n
        block = dirs[g] + spread * rng.standard_normal((hi - lo, c))
        norms = np.maximum(np.linalg.norm(block, axis=1), 1e-12)
        tokens[lo:hi] = block / norms[:, None]
        labels[lo:hi] = g
    return tokens, labels


@dataclass(frozen=True)
class SyntheticSpec:
    """Parsed form of the ``N,C,dist`` generator argument."""

    n: int
    c: int
    kind: str
    groups: int = 4
    spread: float = 0.05

    def make(self, seed: int) -> np.ndarray:
        if self.kind == "gaussian":
            return gaussian_tokens(self.n, self.c, seed)
        tokens, _ = clustered_tokens(self.n, self.c, self.groups, self.spread, seed)
        return tokens


def parse_synthetic(text: str) -> SyntheticSpec:
    """Parse ``N,C,dist`` where dist is ``gaussian``, ``clustered``, or
    ``clustered(G,SPREAD)``."""
    parts = text.split(",", 2)
    if len(parts) != 3:
        raise ConfigError(f"synthetic spec must be N,C,dist, got {text!r}")
    try:
        n = int(parts[0])
        c = int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad synthetic dimensions in {text!r}") from exc
    if n < 1 or c < 1:
        raise ConfigError(f"synthetic dimensions must be positive, got {text!r}")
    dist = parts[2].strip()
    if dist == "gaussian":
        return SyntheticSpec(n, c, "gaussian")
    match = _CLUSTERED.match(dist)
    if match is None:
        raise ConfigError(f"unknown distribution {dist!r}; use gaussian or clustered(G,SPREAD)")
    if match.group(1) is None:
        return SyntheticSpec(n, c, "clustered")
    try:
        spread = float(match.group(2))
    except ValueError as exc:
        raise ConfigError(f"bad spread in {dist!r}") from exc
    return SyntheticSpec(n, c, "clustered", groups=int(match.group(1)), spread=spread)
