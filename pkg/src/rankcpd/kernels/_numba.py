import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def linear_assignment(cost):
    n = cost.shape[0]
    u = np.zeros(n)
    v = np.zeros(n)
    col4row = np.full(n, -1, dtype=np.int64)
    row4col = np.full(n, -1, dtype=np.int64)
    shortest = np.empty(n)
    path = np.full(n, -1, dtype=np.int64)
    seen_row = np.zeros(n, dtype=np.bool_)
    seen_col = np.zeros(n, dtype=np.bool_)

    for cur in range(n):
        shortest[:] = np.inf
        seen_row[:] = False
        seen_col[:] = False
        min_val = 0.0
        sink = -1
        i = cur
        while sink == -1:
            seen_row[i] = True
            lowest = np.inf
            best = -1
            best_free = False
            for j in range(n):
                if seen_col[j]:
                    continue
                r = min_val + cost[i, j] - u[i] - v[j]
                if r < shortest[j]:
                    path[j] = i
                    shortest[j] = r
                s = shortest[j]
                free = row4col[j] == -1
                # ties: first free column wins, else first column
                if s < lowest or (s == lowest and free and not best_free):
                    lowest = s
                    best = j
                    best_free = free
            min_val = lowest
            seen_col[best] = True
            if row4col[best] == -1:
                sink = best
            else:
                i = row4col[best]

        u[cur] += min_val
        for i in range(n):
            if seen_row[i] and i != cur:
                u[i] += min_val - shortest[col4row[i]]
        for j in range(n):
            if seen_col[j]:
                v[j] -= min_val - shortest[j]

        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            nxt = col4row[i]
            col4row[i] = j
            j = nxt
            if i == cur:
                break
    return col4row


@njit(cache=True, nogil=True)
def gibbs_kernel(f, g, cost, eps, floor):
    n, m = cost.shape
    out = np.empty((n, m))
    for i in range(n):
        fi = f[i]
        for j in range(m):
            z = (fi + g[j] - cost[i, j]) / eps
            out[i, j] = math.exp(z) if z > floor else 0.0
    return out


@njit(cache=True, nogil=True)
def squared_distances(a, b):
    n, d = a.shape
    m = b.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(d):
                t = a[i, k] - b[j, k]
                s += t * t
            out[i, j] = s
    return out


@njit(cache=True, nogil=True)
def distances(a, b):
    out = squared_distances(a, b)
    n, m = out.shape
    for i in range(n):
        for j in range(m):
            out[i, j] = math.sqrt(out[i, j])
    return out
