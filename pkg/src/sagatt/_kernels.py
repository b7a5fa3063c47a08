"""Numba kernels with fixed accumulation order.

Every reduction in here runs in ascending index order inside a single
thread, so repeated calls on the same input are bit-identical and the
matmul kernel reproduces a naive triple loop exactly (BLAS does not).
All kernels expect C-contiguous float64 arrays; callers validate.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def matmul(a, b):
    p, q = a.shape
    r = b.shape[1]
    out = np.empty((p, r))
    for i in range(p):
        for j in range(r):
            acc = 0.0
            for k in range(q):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


@njit(cache=True)
def row_softmax(m):
    rows, cols = m.shape
    out = np.empty((rows, cols))
    for i in range(rows):
        hi = m[i, 0]
        for j in range(1, cols):
            if m[i, j] > hi:
                hi = m[i, j]
        total = 0.0
        for j in range(cols):
            e = math.exp(m[i, j] - hi)
            out[i, j] = e
            total += e
        for j in range(cols):
            out[i, j] /= total
    return out


@njit(cache=True)
def row_norms(x):
    n, c = x.shape
    out = np.empty(n)
    for i in range(n):
        acc = 0.0
        for j in range(c):
            acc += x[i, j] * x[i, j]
        out[i] = math.sqrt(acc)
    return out


@njit(cache=True)
def dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


@njit(cache=True)
def cosine_cross(a, b, eps):
    """Cosine similarity of every row of `a` against every row of `b`.

    Entries are clamped to [-1, 1]; rows with norm <= eps yield 0.
    """
    na = row_norms(a)
    nb = row_norms(b)
    ra, rb = a.shape[0], b.shape[0]
    c = a.shape[1]
    out = np.empty((ra, rb))
    for i in range(ra):
        for j in range(rb):
            if na[i] <= eps or nb[j] <= eps:
                out[i, j] = 0.0
            else:
                acc = 0.0
                for k in range(c):
                    acc += a[i, k] * b[j, k]
                s = acc / (na[i] * nb[j])
                if s > 1.0:
                    s = 1.0
                elif s < -1.0:
                    s = -1.0
                out[i, j] = s
    return out


@njit(cache=True)
def knn_mean_similarity(sim, m):
    """Mean of each row's m largest off-diagonal similarities.

    The m selected values are summed in descending value order so the
    result does not depend on the selection scan.
    """
    s = sim.shape[0]
    rho = np.empty(s)
    buf = np.empty(m)
    for i in range(s):
        count = 0
        lo = 0
        for j in range(s):
            if j == i:
                continue
            v = sim[i, j]
            if count < m:
                buf[count] = v
                count += 1
                if count == m:
                    lo = 0
                    for t in range(1, m):
                        if buf[t] < buf[lo]:
                            lo = t
            elif v > buf[lo]:
                buf[lo] = v
                lo = 0
                for t in range(1, m):
                    if buf[t] < buf[lo]:
                        lo = t
        # insertion sort descending, then accumulate
        for t in range(1, count):
            v = buf[t]
            u = t - 1
            while u >= 0 and buf[u] < v:
                buf[u + 1] = buf[u]
                u -= 1
            buf[u + 1] = v
        acc = 0.0
        for t in range(count):
            acc += buf[t]
        rho[i] = acc / count
    return rho


@njit(cache=True)
def separation_from_density(sim, rho):
    """Min cosine distance to any strictly denser point.

    Rows tied at the global density maximum get the max distance to any
    point instead, so density peaks stay ranked first.
    """
    s = sim.shape[0]
    rho_max = rho[0]
    for i in range(1, s):
        if rho[i] > rho_max:
            rho_max = rho[i]
    delta = np.empty(s)
    for i in range(s):
        if rho[i] == rho_max:
            hi = 0.0
            for j in range(s):
                d = 1.0 - sim[i, j]
                if d > hi:
                    hi = d
            delta[i] = hi
        else:
            lo = np.inf
            for j in range(s):
                if rho[j] > rho[i]:
                    d = 1.0 - sim[i, j]
                    if d < lo:
                        lo = d
            delta[i] = lo
    return delta


@njit(cache=True)
def weighted_cluster_sums(x, assignment, weights, k):
    """Per-cluster weighted sums and weight totals, ascending token order."""
    n, c = x.shape
    acc = np.zeros((k, c))
    wsum = np.zeros(k)
    sizes = np.zeros(k, dtype=np.int64)
    for i in range(n):
        g = assignment[i]
        w = weights[i]
        for j in range(c):
            acc[g, j] += w * x[i, j]
        wsum[g] += w
        sizes[g] += 1
    return acc, wsum, sizes


@njit(cache=True)
def layer_norm_rows(x, gamma, beta, eps):
    n, c = x.shape
    out = np.empty((n, c))
    for i in range(n):
        mean = 0.0
        for j in range(c):
            mean += x[i, j]
        mean /= c
        var = 0.0
        for j in range(c):
            d = x[i, j] - mean
            var += d * d
        var /= c
        inv = 1.0 / math.sqrt(var + eps)
        for j in range(c):
            out[i, j] = gamma[j] * ((x[i, j] - mean) * inv) + beta[j]
    return out


@njit(cache=True)
def frobenius_distance(a, b):
    n, c = a.shape
    acc = 0.0
    for i in range(n):
        for j in range(c):
            d = a[i, j] - b[i, j]
            acc += d * d
    return math.sqrt(acc)


@njit(cache=True)
def gelu(x):
    n, c = x.shape
    out = np.empty((n, c))
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(c):
            v = x[i, j]
            out[i, j] = 0.5 * v * (1.0 + math.erf(v * inv_sqrt2))
    return out


def warm_up():
    """Trigger JIT compilation of every kernel on tiny inputs."""
    a = np.eye(2)
    b = np.ones((2, 2))
    matmul(a, b)
    row_softmax(a)
    row_norms(a)
    dot(a[0], b[0])
    sim = cosine_cross(a, a, 1e-6)
    rho = knn_mean_similarity(sim, 1)
    separation_from_density(sim, rho)
    weighted_cluster_sums(a, np.zeros(2, dtype=np.int64), np.ones(2), 1)
    layer_norm_rows(a, np.ones(2), np.zeros(2), 1e-5)
    frobenius_distance(a, b)
    gelu(a)
