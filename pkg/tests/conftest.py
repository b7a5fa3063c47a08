"""Pin BLAS/OpenMP thread pools to one thread before numpy loads.

The timing-sensitive tests assert wall-clock scaling ratios; thread-pool
jitter would make those ratios unstable.
"""

import os

for var in (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "NUMBA_NUM_THREADS",
):
    os.environ.setdefault(var, "1")
