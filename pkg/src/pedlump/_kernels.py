"""Numba kernels for the distance-histogram hot loops.

Everything here has a pure-numpy equivalent in the calling modules; the
kernels only change constants, never results.
"""

from __future__ import annotations

import warnings

# The container's TBB predates what numba wants; it falls back to the
# workqueue threading layer, which is fine at our scales.
warnings.filterwarnings("ignore", message=".*TBB.*")

import numba
import numpy as np


@numba.njit(cache=True, parallel=True)
def hist_rows(rows, members, pc, width, out):
    """out[i*width + k] += number of members at distance k from rows[i]."""
    for i in numba.prange(rows.size):
        base = i * width
        r = rows[i]
        for j in range(members.size):
            out[base + pc[r ^ members[j]]] += 1


@numba.njit(cache=True)
def labeled_hist(rep, labels, pc, width, out):
    """out[labels[x]*width + k] += 1 for every state x at distance k from rep."""
    for x in range(labels.size):
        out[labels[x] * width + pc[x ^ rep]] += 1
