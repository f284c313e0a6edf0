import numpy as np


def linear_assignment(cost):
    # Same shortest-augmenting-path sweep as the numba kernel, with the
    # inner column loop vectorised; tie-breaking and float op order match.
    n = cost.shape[0]
    u = np.zeros(n)
    v = np.zeros(n)
    col4row = np.full(n, -1, dtype=np.int64)
    row4col = np.full(n, -1, dtype=np.int64)

    for cur in range(n):
        shortest = np.full(n, np.inf)
        path = np.full(n, -1, dtype=np.int64)
        seen_row = np.zeros(n, dtype=bool)
        seen_col = np.zeros(n, dtype=bool)
        min_val = 0.0
        sink = -1
        i = cur
        while sink == -1:
            seen_row[i] = True
            r = min_val + cost[i] - u[i] - v
            better = ~seen_col & (r < shortest)
            path[better] = i
            shortest[better] = r[better]
            cand = np.where(seen_col, np.inf, shortest)
            lowest = cand.min()
            ties = np.flatnonzero(cand == lowest)
            free = ties[row4col[ties] == -1]
            best = int(free[0]) if free.size else int(ties[0])
            min_val = lowest
            seen_col[best] = True
            if row4col[best] == -1:
                sink = best
            else:
                i = int(row4col[best])

        u[cur] += min_val
        rows = np.flatnonzero(seen_row)
        rows = rows[rows != cur]
        u[rows] += min_val - shortest[col4row[rows]]
        v[seen_col] -= min_val - shortest[seen_col]

        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, int(col4row[i])
            if i == cur:
                break
    return col4row


def gibbs_kernel(f, g, cost, eps, floor):
    z = (f[:, None] + g[None, :] - cost) / eps
    out = np.exp(z)
    out[z <= floor] = 0.0
    return out


def squared_distances(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def distances(a, b):
    return np.sqrt(squared_distances(a, b))
