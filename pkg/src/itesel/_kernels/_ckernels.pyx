# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for boosted trees and coordinate descent.

Every routine here has a pure-Python twin in ``_pykernels`` that performs
the same floating point operations in the same order, so both backends
produce bit-identical results.
"""

import numpy as np

from libc.math cimport fabs


def boost(const double[:, ::1] X, const Py_ssize_t[:, ::1] order,
          const double[:, ::1] xsorted, const double[::1] y, const double[::1] w, double base,
          Py_ssize_t n_trees, Py_ssize_t depth, double shrinkage,
          Py_ssize_t min_node, Py_ssize_t[:, ::1] feature,
          double[:, ::1] threshold, double[:, ::1] value):
    """Stagewise least-squares boosting.

    Tree arrays are filled in place using heap layout (children of node k
    are 2k+1 and 2k+2, ``feature == -1`` marks a leaf). Returns the
    training predictions after the last tree.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t n_nodes = feature.shape[1]
    cdef Py_ssize_t width = 1 << depth
    cdef Py_ssize_t t, i, j, k, a, level, first, count, f, nl

    F_arr = np.full(n, base, dtype=np.float64)
    wr_arr = np.empty(n, dtype=np.float64)
    node_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] F = F_arr
    cdef double[::1] wr = wr_arr
    cdef Py_ssize_t[::1] node = node_arr

    cdef double[::1] totW = np.empty(width, dtype=np.float64)
    cdef double[::1] totS = np.empty(width, dtype=np.float64)
    cdef Py_ssize_t[::1] totN = np.empty(width, dtype=np.intp)
    cdef double[::1] accW = np.empty(width, dtype=np.float64)
    cdef double[::1] accS = np.empty(width, dtype=np.float64)
    cdef Py_ssize_t[::1] accN = np.empty(width, dtype=np.intp)
    cdef double[::1] prev = np.empty(width, dtype=np.float64)
    cdef double[::1] best_gain = np.empty(width, dtype=np.float64)
    cdef double[::1] best_thr = np.empty(width, dtype=np.float64)
    cdef Py_ssize_t[::1] best_f = np.empty(width, dtype=np.intp)
    cdef double[::1] sw = np.empty(n_nodes, dtype=np.float64)
    cdef double[::1] swr = np.empty(n_nodes, dtype=np.float64)

    cdef double x, WL, SL, WR, SR, gain, thr
    cdef double[::1] parent = np.empty(width, dtype=np.float64)

    for t in range(n_trees):
        for i in range(n):
            wr[i] = w[i] * (y[i] - F[i])
            node[i] = 0

        for level in range(depth):
            first = (1 << level) - 1
            count = 1 << level
            for a in range(count):
                totW[a] = 0.0
                totS[a] = 0.0
                totN[a] = 0
                best_gain[a] = 0.0
                best_f[a] = -1
                best_thr[a] = 0.0
            for i in range(n):
                a = node[i] - first
                if a >= 0 and a < count:
                    totW[a] += w[i]
                    totS[a] += wr[i]
                    totN[a] += 1
            for a in range(count):
                if totN[a] > 0:
                    parent[a] = totS[a] * totS[a] / totW[a]
                    best_gain[a] = parent[a]

            for j in range(d):
                for a in range(count):
                    accW[a] = 0.0
                    accS[a] = 0.0
                    accN[a] = 0
                for k in range(n):
                    i = order[j, k]
                    a = node[i] - first
                    if a < 0 or a >= count or totN[a] < 2 * min_node:
                        continue
                    x = xsorted[j, k]
                    nl = accN[a]
                    if nl > 0 and x > prev[a]:
                        if nl >= min_node and totN[a] - nl >= min_node:
                            WL = accW[a]
                            SL = accS[a]
                            WR = totW[a] - WL
                            SR = totS[a] - SL
                            gain = SL * SL / WL + SR * SR / WR
                            if gain > best_gain[a]:
                                best_gain[a] = gain
                                best_f[a] = j
                                thr = (prev[a] + x) * 0.5
                                if thr >= x:
                                    thr = prev[a]
                                best_thr[a] = thr
                    accW[a] += w[i]
                    accS[a] += wr[i]
                    accN[a] += 1
                    prev[a] = x

            for a in range(count):
                if best_f[a] >= 0:
                    feature[t, first + a] = best_f[a]
                    threshold[t, first + a] = best_thr[a]
            for i in range(n):
                a = node[i] - first
                if a >= 0 and a < count and best_f[a] >= 0:
                    if X[i, best_f[a]] <= best_thr[a]:
                        node[i] = 2 * node[i] + 1
                    else:
                        node[i] = 2 * node[i] + 2

        for k in range(n_nodes):
            sw[k] = 0.0
            swr[k] = 0.0
        for i in range(n):
            sw[node[i]] += w[i]
            swr[node[i]] += wr[i]
        for k in range(n_nodes):
            if sw[k] > 0.0:
                value[t, k] = swr[k] / sw[k]
        for i in range(n):
            F[i] += shrinkage * value[t, node[i]]

    return F_arr


def predict_trees(const double[:, ::1] X, const Py_ssize_t[:, ::1] feature,
                  const double[:, ::1] threshold, const double[:, ::1] value,
                  double base, double shrinkage, Py_ssize_t n_trees):
    """Sum the first ``n_trees`` trees onto ``base`` row by row."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t i, t, k, f
    cdef double acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        acc = base
        for t in range(n_trees):
            k = 0
            f = feature[t, 0]
            while f >= 0:
                if X[i, f] <= threshold[t, k]:
                    k = 2 * k + 1
                else:
                    k = 2 * k + 2
                f = feature[t, k]
            acc += shrinkage * value[t, k]
        out[i] = acc
    return out_arr


def coordinate_descent(const double[:, ::1] G, const double[::1] c,
                       double[::1] beta, double[::1] q, double l1, double l2,
                       double tol, Py_ssize_t max_sweeps):
    """Cyclic coordinate descent on the covariance form of the problem.

    ``q`` must equal ``G @ beta`` on entry and is kept in sync. Returns the
    number of sweeps performed.
    """
    cdef Py_ssize_t d = G.shape[0]
    cdef Py_ssize_t sweep, j, k
    cdef double gjj, rho, new, delta, maxdelta
    for sweep in range(max_sweeps):
        maxdelta = 0.0
        for j in range(d):
            gjj = G[j, j]
            if gjj <= 0.0:
                continue
            rho = c[j] - q[j] + gjj * beta[j]
            if rho > l1:
                new = (rho - l1) / (gjj + l2)
            elif rho < -l1:
                new = (rho + l1) / (gjj + l2)
            else:
                new = 0.0
            delta = new - beta[j]
            if delta != 0.0:
                for k in range(d):
                    q[k] += G[j, k] * delta
                beta[j] = new
                if fabs(delta) > maxdelta:
                    maxdelta = fabs(delta)
        if maxdelta < tol:
            return sweep + 1
    return max_sweeps
