"""NumPy implementations of the compiled kernels.

Arithmetic is ordered to match ``_ckernels`` exactly: cumulative sums and
``bincount`` accumulate sequentially in row order, and every gain uses the
same expression, so both backends grow identical trees.
"""

import numpy as np


def boost(X, order, xsorted, y, w, base, n_trees, depth, shrinkage, min_node,
          feature, threshold, value):
    n, d = X.shape
    n_nodes = feature.shape[1]
    F = np.full(n, base, dtype=np.float64)
    rows = np.arange(n)

    for t in range(n_trees):
        wr = w * (y - F)
        node = np.zeros(n, dtype=np.intp)

        for level in range(depth):
            first = (1 << level) - 1
            count = 1 << level
            local = node - first
            active = (local >= 0) & (local < count)
            idx = np.where(active, local, count)
            totW = np.bincount(idx, weights=w, minlength=count + 1)[:count]
            totS = np.bincount(idx, weights=wr, minlength=count + 1)[:count]
            totN = np.bincount(idx, minlength=count + 1)[:count]

            with np.errstate(invalid="ignore", divide="ignore"):
                parent = totS * totS / totW
            best_gain = parent.copy()
            best_f = np.full(count, -1, dtype=np.intp)
            best_thr = np.zeros(count)

            for j in range(d):
                oj = order[j]
                loc_sorted = idx[oj]
                for a in range(count):
                    if totN[a] < 2 * min_node:
                        continue
                    r = oj[loc_sorted == a]
                    xs = xsorted[j][loc_sorted == a]
                    cw = np.cumsum(w[r])
                    cs = np.cumsum(wr[r])
                    nl = np.arange(1, xs.size)
                    ok = ((xs[1:] > xs[:-1]) & (nl >= min_node)
                          & (totN[a] - nl >= min_node))
                    if not ok.any():
                        continue
                    pos = np.flatnonzero(ok)
                    WL = cw[pos]
                    SL = cs[pos]
                    WR = totW[a] - WL
                    SR = totS[a] - SL
                    gain = SL * SL / WL + SR * SR / WR
                    m = int(np.argmax(gain))
                    if gain[m] > best_gain[a]:
                        best_gain[a] = gain[m]
                        best_f[a] = j
                        p = pos[m]
                        lo, hi = xs[p], xs[p + 1]
                        thr = (lo + hi) * 0.5
                        best_thr[a] = lo if thr >= hi else thr

            split = best_f >= 0
            heap = first + np.flatnonzero(split)
            feature[t, heap] = best_f[split]
            threshold[t, heap] = best_thr[split]

            moving = active & split[np.minimum(idx, count - 1)] & (idx < count)
            if moving.any():
                mi = rows[moving]
                fa = best_f[idx[mi]]
                go_left = X[mi, fa] <= best_thr[idx[mi]]
                node[mi] = np.where(go_left, 2 * node[mi] + 1, 2 * node[mi] + 2)

        sw = np.bincount(node, weights=w, minlength=n_nodes)
        swr = np.bincount(node, weights=wr, minlength=n_nodes)
        filled = sw > 0.0
        value[t, filled] = swr[filled] / sw[filled]
        F = F + shrinkage * value[t, node]

    return F


def predict_trees(X, feature, threshold, value, base, shrinkage, n_trees):
    n = X.shape[0]
    rows = np.arange(n)
    out = np.full(n, base, dtype=np.float64)
    width = feature.shape[1]
    for t in range(n_trees):
        k = np.zeros(n, dtype=np.intp)
        f = feature[t, k]
        inner = f >= 0
        while inner.any():
            r = rows[inner]
            kr = k[r]
            left = X[r, f[r]] <= threshold[t, kr]
            k[r] = np.where(left, 2 * kr + 1, 2 * kr + 2)
            f = np.where(k < width, feature[t, np.minimum(k, width - 1)], -1)
            inner = f >= 0
        out = out + shrinkage * value[t, k]
    return out


def coordinate_descent(G, c, beta, q, l1, l2, tol, max_sweeps):
    d = G.shape[0]
    diag = [float(G[j, j]) for j in range(d)]
    cl = [float(v) for v in c]
    for sweep in range(max_sweeps):
        maxdelta = 0.0
        for j in range(d):
            gjj = diag[j]
            if gjj <= 0.0:
                continue
            bj = float(beta[j])
            rho = cl[j] - float(q[j]) + gjj * bj
            if rho > l1:
                new = (rho - l1) / (gjj + l2)
            elif rho < -l1:
                new = (rho + l1) / (gjj + l2)
            else:
                new = 0.0
            delta = new - bj
            if delta != 0.0:
                q += G[j] * delta
                beta[j] = new
                if abs(delta) > maxdelta:
                    maxdelta = abs(delta)
        if maxdelta < tol:
            return sweep + 1
    return max_sweeps
