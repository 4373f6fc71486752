"""Small helpers for CSR-style (indptr, values) segment reductions.

np.ufunc.reduceat returns values[start] for empty segments, so we pad with
an identity element (making every index valid) and overwrite empty segments
afterwards.
"""

import numpy as np


def segment_sum(values, indptr):
    """Sum `values` within each segment delimited by `indptr`. Empty segments give 0."""
    padded = np.append(np.asarray(values, dtype=np.float64), 0.0)
    out = np.add.reduceat(padded, indptr[:-1])
    out[indptr[1:] == indptr[:-1]] = 0.0
    return out


def segment_prod(values, indptr):
    """Product of `values` within each segment. Empty segments give 1."""
    padded = np.append(np.asarray(values, dtype=np.float64), 1.0)
    out = np.multiply.reduceat(padded, indptr[:-1])
    out[indptr[1:] == indptr[:-1]] = 1.0
    return out
