"""Vectorized numpy implementation of the alternating-maximization kernels.

Shared array layout (see solver._pack): the bottleneck channel r has one row
per support pair (s, z), rows grouped contiguously by source with boundaries
in src_ptr. P[k, y] is the input joint mass p(y, s_k, z_k) and A[k, y] the
conditional p(y | s_k, z_k) (zero rows for zero-mass pairs). All logs are
taken only where the argument is positive; dead bottleneck states carry an
explicit -inf log weight instead of an epsilon floor.
"""

from __future__ import annotations

import numpy as np


def evaluate(P, src_ptr, py, nu, r):
    """Joint statistics of the channel r.

    Returns (T, M, Tq, pred, comp, pred_s, comp_s) where T[s, q, y] is the
    induced joint over (S, Q, Y), M = p(q, y), Tq = p(s, q), pred/comp are
    I(Q;Y|S) and I(Q;S|Y) in nats and pred_s/comp_s the per-source specific
    conditional mutual informations I(Q;Y|S=s) and I(Q;S=s|Y).
    """
    ns = src_ptr.shape[0] - 1
    nq = r.shape[1]
    ny = P.shape[1]
    T = np.empty((ns, nq, ny))
    for s in range(ns):
        lo, hi = src_ptr[s], src_ptr[s + 1]
        T[s] = r[lo:hi].T @ P[lo:hi]
    M = T.sum(axis=0)
    Tq = T.sum(axis=2)

    # logs of the factors are taken separately: products like Tq * py can
    # underflow to exact zero while T itself is still a positive subnormal
    mask = T > 0
    logT = np.zeros_like(T)
    logT[mask] = np.log(T[mask])
    logTq = np.zeros_like(Tq)
    mq = Tq > 0
    logTq[mq] = np.log(Tq[mq])
    logM = np.zeros_like(M)
    mm = M > 0
    logM[mm] = np.log(M[mm])
    pred_terms = np.zeros_like(T)
    den = logTq[:, :, None] + np.log(py)[None, None, :]
    pred_terms[mask] = T[mask] * (logT[mask] - den[mask])
    comp_terms = np.zeros_like(T)
    den = logM[None, :, :] + np.log(nu)[:, None, None]
    comp_terms[mask] = T[mask] * (logT[mask] - den[mask])

    pred_s = pred_terms.sum(axis=(1, 2)) / nu
    comp_s = comp_terms.sum(axis=(1, 2)) / nu
    return T, M, Tq, float(pred_terms.sum()), float(comp_terms.sum()), pred_s, comp_s


def update(P, A, src_ptr, py, nu, r, T, M, Tq, beta_eff):
    """One channel update at effective inverse temperature beta_eff.

    Row (s, z) of the new channel is the softmax over q of

        ln r(q|s,z) + sum_y p(y|s,z) [beta_eff ln w(y|q,s)
                                      + ln w(q|y) + ln w(z|s,y,q)
                                      - ln p(z|s,y)]

    written here with the p(z|s,y) and w(z|s,y,q) logs combined so that every
    log argument is positive whenever r(q|s,z) > 0. Rows whose weights are
    all -inf reset to uniform; the reset count is returned for diagnostics.
    """
    ns = src_ptr.shape[0] - 1
    nq = r.shape[1]
    E = np.empty_like(r)
    lnM = np.zeros_like(M)
    mM = M > 0
    lnM[mM] = np.log(M[mM])
    for s in range(ns):
        lo, hi = src_ptr[s], src_ptr[s + 1]
        Ts = T[s]
        mT = Ts > 0
        lnT = np.zeros_like(Ts)
        lnT[mT] = np.log(Ts[mT])
        lnTq = np.zeros(nq)
        mq = Tq[s] > 0
        lnTq[mq] = np.log(Tq[s][mq])
        W = beta_eff * (lnT - lnTq[:, None]) + lnM - lnT  # (nq, ny)
        E[lo:hi] = A[lo:hi] @ W.T
    with np.errstate(divide="ignore"):
        E += np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), -np.inf)

    mx = E.max(axis=1)
    dead = mx == -np.inf
    resets = int(dead.sum())
    if resets:
        E[dead] = 0.0
        mx = np.where(dead, 0.0, mx)
    w = np.exp(E - mx[:, None])
    return w / w.sum(axis=1, keepdims=True), resets


def solve(P, A, src_ptr, py, nu, r0, beta, exp_mode, tol, max_iters):
    """Iterate updates from r0 until the objective change falls below tol.

    Returns (r, pred, comp, pred_s, comp_s, objective, iterations, converged,
    resets). The objective is pred - comp/beta, or pred - exp(comp)/beta in
    exponential mode where the update uses beta * exp(-comp) as effective
    inverse temperature.
    """
    r = r0.copy()
    T, M, Tq, pred, comp, pred_s, comp_s = evaluate(P, src_ptr, py, nu, r)
    obj = pred - (np.exp(comp) if exp_mode else comp) / beta
    converged = False
    resets = 0
    iters = 0
    for iters in range(1, max_iters + 1):
        beta_eff = beta * np.exp(-comp) if exp_mode else beta
        r, n_reset = update(P, A, src_ptr, py, nu, r, T, M, Tq, beta_eff)
        resets += n_reset
        T, M, Tq, pred, comp, pred_s, comp_s = evaluate(P, src_ptr, py, nu, r)
        new_obj = pred - (np.exp(comp) if exp_mode else comp) / beta
        delta = abs(new_obj - obj)
        obj = new_obj
        if delta < tol:
            converged = True
            break
    return r, pred, comp, pred_s, comp_s, obj, iters, converged, resets
