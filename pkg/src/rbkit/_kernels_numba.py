"""Numba-jitted implementation of the alternating-maximization kernels.

Loop-level port of _kernels_numpy with the full convergence loop compiled in
nopython mode; see that module for the array layout and the update formula.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _fill(P, src_ptr, r, T, M, Tq):
    ns = src_ptr.shape[0] - 1
    nq = r.shape[1]
    ny = P.shape[1]
    for s in range(ns):
        for q in range(nq):
            for y in range(ny):
                T[s, q, y] = 0.0
    for s in range(ns):
        for k in range(src_ptr[s], src_ptr[s + 1]):
            for q in range(nq):
                rkq = r[k, q]
                if rkq > 0.0:
                    for y in range(ny):
                        T[s, q, y] += rkq * P[k, y]
    for q in range(nq):
        for y in range(ny):
            m = 0.0
            for s in range(ns):
                m += T[s, q, y]
            M[q, y] = m
    for s in range(ns):
        for q in range(nq):
            t = 0.0
            for y in range(ny):
                t += T[s, q, y]
            Tq[s, q] = t


@njit(cache=True)
def _information(T, M, Tq, py, nu, pred_s, comp_s):
    ns, nq, ny = T.shape
    pred = 0.0
    comp = 0.0
    for s in range(ns):
        ps = 0.0
        cs = 0.0
        for q in range(nq):
            if Tq[s, q] <= 0.0:
                continue
            ln_tq = np.log(Tq[s, q])
            for y in range(ny):
                t = T[s, q, y]
                if t > 0.0:
                    lnt = np.log(t)
                    ps += t * (lnt - ln_tq - np.log(py[y]))
                    cs += t * (lnt - np.log(M[q, y]) - np.log(nu[s]))
        pred += ps
        comp += cs
        pred_s[s] = ps / nu[s]
        comp_s[s] = cs / nu[s]
    return pred, comp


@njit(cache=True)
def _update(P, A, src_ptr, r, T, M, Tq, beta_eff, r_out, E):
    ns = src_ptr.shape[0] - 1
    ny = P.shape[1]
    nq = r.shape[1]
    resets = 0
    for s in range(ns):
        for k in range(src_ptr[s], src_ptr[s + 1]):
            for q in range(nq):
                if r[k, q] <= 0.0:
                    E[q] = -np.inf
                    continue
                acc = np.log(r[k, q])
                for y in range(ny):
                    a = A[k, y]
                    if a > 0.0:
                        # r[k,q] > 0 and P[k,y] > 0 force T, Tq, M > 0 here
                        lnt = np.log(T[s, q, y])
                        acc += a * (
                            beta_eff * (lnt - np.log(Tq[s, q]))
                            + np.log(M[q, y])
                            - lnt
                        )
                E[q] = acc
            mx = -np.inf
            for q in range(nq):
                if E[q] > mx:
                    mx = E[q]
            if mx == -np.inf:
                for q in range(nq):
                    r_out[k, q] = 1.0 / nq
                resets += 1
                continue
            norm = 0.0
            for q in range(nq):
                w = np.exp(E[q] - mx)
                r_out[k, q] = w
                norm += w
            for q in range(nq):
                r_out[k, q] /= norm
    return resets


@njit(cache=True)
def evaluate(P, src_ptr, py, nu, r):
    ns = src_ptr.shape[0] - 1
    nq = r.shape[1]
    ny = P.shape[1]
    T = np.empty((ns, nq, ny))
    M = np.empty((nq, ny))
    Tq = np.empty((ns, nq))
    pred_s = np.empty(ns)
    comp_s = np.empty(ns)
    _fill(P, src_ptr, r, T, M, Tq)
    pred, comp = _information(T, M, Tq, py, nu, pred_s, comp_s)
    return T, M, Tq, pred, comp, pred_s, comp_s


@njit(cache=True)
def update(P, A, src_ptr, py, nu, r, T, M, Tq, beta_eff):
    r_out = np.empty_like(r)
    E = np.empty(r.shape[1])
    resets = _update(P, A, src_ptr, r, T, M, Tq, beta_eff, r_out, E)
    return r_out, resets


@njit(cache=True)
def solve(P, A, src_ptr, py, nu, r0, beta, exp_mode, tol, max_iters):
    ns = src_ptr.shape[0] - 1
    nq = r0.shape[1]
    ny = P.shape[1]
    r = r0.copy()
    r_next = np.empty_like(r)
    T = np.empty((ns, nq, ny))
    M = np.empty((nq, ny))
    Tq = np.empty((ns, nq))
    E = np.empty(nq)
    pred_s = np.empty(ns)
    comp_s = np.empty(ns)

    _fill(P, src_ptr, r, T, M, Tq)
    pred, comp = _information(T, M, Tq, py, nu, pred_s, comp_s)
    obj = pred - (np.exp(comp) if exp_mode else comp) / beta
    converged = False
    resets = 0
    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        beta_eff = beta * np.exp(-comp) if exp_mode else beta
        resets += _update(P, A, src_ptr, r, T, M, Tq, beta_eff, r_next, E)
        tmp = r
        r = r_next
        r_next = tmp
        _fill(P, src_ptr, r, T, M, Tq)
        pred, comp = _information(T, M, Tq, py, nu, pred_s, comp_s)
        new_obj = pred - (np.exp(comp) if exp_mode else comp) / beta
        delta = abs(new_obj - obj)
        obj = new_obj
        if delta < tol:
            converged = True
            break
    return r, pred, comp, pred_s, comp_s, obj, iters, converged, resets
