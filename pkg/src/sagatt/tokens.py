"""Token sequences and the shared numeric primitives.

A token matrix is a plain C-contiguous float64 ndarray of shape (N, C):
one row per spatial position, one column per channel. `as_token_matrix`
is the single validation gate; everything downstream assumes its output.

All reductions run through the fixed-order kernels in `_kernels`, so
single-threaded results are bit-reproducible and `matmul` agrees with a
naive triple loop exactly.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeError

DEFAULT_EPS = 1e-6
LAYER_NORM_EPS = 1e-5


def as_token_matrix(x) -> np.ndarray:
    """Validate and canonicalize a token matrix.

    Returns a C-contiguous float64 array of shape (N, C) with N, C >= 1
    and all entries finite. Raises ShapeError otherwise.
    """
    m = np.ascontiguousarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"token matrix must be 2-D, got ndim={m.ndim}")
    n, c = m.shape
    if n < 1 or c < 1:
        raise ShapeError(f"token matrix must be at least 1x1, got {n}x{c}")
    if not np.isfinite(m).all():
        raise ShapeError("token matrix contains non-finite values")
    return m


def _as_vector(v, name: str) -> np.ndarray:
    a = np.ascontiguousarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got ndim={a.ndim}")
    return a


def _as_matrix(v, name: str) -> np.ndarray:
    a = np.ascontiguousarray(v, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise ShapeError(f"{name} contains non-finite values")
    return a


@dataclass(frozen=True)
class FeatureMapShape:
    """Spatial layout (height, width, channels) tagged onto a token matrix."""

    height: int
    width: int
    channels: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1 or self.channels < 1:
            raise ShapeError(f"feature map dims must be positive, got {self}")

    @property
    def tokens(self) -> int:
        return self.height * self.width

    def check(self, m: np.ndarray) -> None:
        n, c = m.shape
        if n != self.tokens or c != self.channels:
            raise ShapeError(
                f"token matrix {n}x{c} does not match map "
                f"{self.height}x{self.width}x{self.channels}"
            )


@dataclass(frozen=True)
class ProjectionWeights:
    """Query/key/value projections, plus optional channel-scaling pair.

    w_q, w_k, w_v map C -> d. w_qs and w_ks, when present, further map
    d -> scaled dim for the narrowed score computation; they must be
    present together.
    """

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    w_qs: np.ndarray | None = None
    w_ks: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "w_q", _as_matrix(self.w_q, "w_q"))
        object.__setattr__(self, "w_k", _as_matrix(self.w_k, "w_k"))
        object.__setattr__(self, "w_v", _as_matrix(self.w_v, "w_v"))
        if self.w_q.shape != self.w_k.shape or self.w_q.shape != self.w_v.shape:
            raise ShapeError("w_q, w_k, w_v must share one CxD shape")
        if (self.w_qs is None) != (self.w_ks is None):
            raise ShapeError("w_qs and w_ks must be present together")
        if self.w_qs is not None:
            object.__setattr__(self, "w_qs", _as_matrix(self.w_qs, "w_qs"))
            object.__setattr__(self, "w_ks", _as_matrix(self.w_ks, "w_ks"))
            d = self.w_q.shape[1]
            if self.w_qs.shape[0] != d or self.w_ks.shape[0] != d:
                raise ShapeError("scaling projections must map from head dim")
            if self.w_qs.shape != self.w_ks.shape:
                raise ShapeError("w_qs and w_ks must share one shape")

    @property
    def channels(self) -> int:
        return self.w_q.shape[0]

    @property
    def head_dim(self) -> int:
        return self.w_q.shape[1]


def cosine_similarity(a, b, eps: float = DEFAULT_EPS) -> float:
    """Cosine of the angle between two vectors; 0 if either is near zero."""
    av = _as_vector(a, "a")
    bv = _as_vector(b, "b")
    if av.shape[0] != bv.shape[0]:
        raise ShapeError(f"length mismatch: {av.shape[0]} vs {bv.shape[0]}")
    na = np.sqrt(_kernels.dot(av, av))
    nb = np.sqrt(_kernels.dot(bv, bv))
    if na <= eps or nb <= eps:
        return 0.0
    return _kernels.dot(av, bv) / (na * nb)


def cosine_distance(a, b, eps: float = DEFAULT_EPS) -> float:
    """1 - cosine_similarity, in [0, 2]."""
    return 1.0 - cosine_similarity(a, b, eps)


def row_softmax(m) -> np.ndarray:
    """Row-wise softmax with row-max subtraction for stability."""
    a = _as_matrix(m, "softmax input")
    return _kernels.row_softmax(a)


def matmul(a, b) -> np.ndarray:
    """Dense product with deterministic fixed-order accumulation."""
    am = np.ascontiguousarray(a, dtype=np.float64)
    bm = np.ascontiguousarray(b, dtype=np.float64)
    if am.ndim != 2 or bm.ndim != 2:
        raise ShapeError("matmul operands must be 2-D")
    if am.shape[1] != bm.shape[0]:
        raise ShapeError(f"inner dims disagree: {am.shape} x {bm.shape}")
    return _kernels.matmul(am, bm)


def layer_norm(x, gamma, beta, eps: float = LAYER_NORM_EPS) -> np.ndarray:
    """Per-row normalization to zero mean / unit variance, then affine."""
    m = as_token_matrix(x)
    g = _as_vector(gamma, "gamma")
    b = _as_vector(beta, "beta")
    if g.shape[0] != m.shape[1] or b.shape[0] != m.shape[1]:
        raise ShapeError("gamma/beta length must equal channel count")
    if eps <= 0:
        raise ShapeError("layer_norm eps must be positive")
    return _kernels.layer_norm_rows(m, g, b, eps)


def frobenius_error(a, b) -> float:
    """sqrt of the summed squared elementwise difference."""
    am = np.ascontiguousarray(a, dtype=np.float64)
    bm = np.ascontiguousarray(b, dtype=np.float64)
    if am.shape != bm.shape:
        raise ShapeError(f"shape mismatch: {am.shape} vs {bm.shape}")
    if am.ndim == 1:
        am = am.reshape(1, -1)
        bm = bm.reshape(1, -1)
    return _kernels.frobenius_distance(am, bm)


def row_norms(x) -> np.ndarray:
    """Euclidean norm of each row."""
    return _kernels.row_norms(as_token_matrix(x))


def cosine_similarity_matrix(a, b, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Pairwise cosine similarities, rows of `a` against rows of `b`.

    Entries are clamped to [-1, 1]; near-zero rows contribute 0.
    """
    am = as_token_matrix(a)
    bm = as_token_matrix(b)
    if am.shape[1] != bm.shape[1]:
        raise ShapeError("channel counts disagree")
    return _kernels.cosine_cross(am, bm, eps)
