"""Numerical inner loops, jitted with numba when available.

Two kernels dominate runtime: the alternating-minimization fixed point for
one Lagrange slope (called thousands of times per curve) and the exhaustive
encoder scan of the brute-force code search. Both exist in two forms with
identical iteration logic:

  * a loop form, compiled with ``numba.njit`` (default when numba imports),
  * a vectorized pure-numpy form used as the fallback.

Set ``IRDF_NUMBA=0`` in the environment to force the numpy fallback; the
benchmark under benchmarks/ compares the two. Results agree to float
reassociation noise, not bitwise.
"""

from __future__ import annotations

import os

import numpy as np


def _ba_fixed_slope_loop(expected_f, pz, s, max_iters, rate_tol, marginal_tol, support_floor):
    """Fixed point of q(xhat|z) ∝ q(xhat) exp(s * expected_f[z, xhat]).

    expected_f: (nz, nx) transform-domain distortion rows for used z only.
    pz: (nz,) strictly positive, sums to 1. s <= 0.
    Returns (q_cond, q_out, f_dist, rate_mi, rate_par, iters, converged);
    rates in nats. Exponents are stabilized by the row minimum over the
    current support, so arbitrarily negative slopes stay finite.
    """
    nz, nx = expected_f.shape
    q_out = np.full(nx, 1.0 / nx)
    q_cond = np.zeros((nz, nx))
    logz = np.zeros(nz)
    prev_rate = np.inf
    converged = False
    iters = 0
    f_dist = 0.0
    rate_par = 0.0
    for it in range(max_iters):
        iters = it + 1
        for z in range(nz):
            m = np.inf
            for x in range(nx):
                if q_out[x] > 0.0 and expected_f[z, x] < m:
                    m = expected_f[z, x]
            tot = 0.0
            for x in range(nx):
                if q_out[x] > 0.0:
                    w = q_out[x] * np.exp(s * (expected_f[z, x] - m))
                    q_cond[z, x] = w
                    tot += w
                else:
                    q_cond[z, x] = 0.0
            for x in range(nx):
                q_cond[z, x] /= tot
            logz[z] = np.log(tot) + s * m
        f_dist = 0.0
        lam = 0.0
        for z in range(nz):
            row = 0.0
            for x in range(nx):
                row += q_cond[z, x] * expected_f[z, x]
            f_dist += pz[z] * row
            lam += pz[z] * logz[z]
        rate_par = s * f_dist - lam
        dq = 0.0
        newsum = 0.0
        for x in range(nx):
            acc = 0.0
            for z in range(nz):
                acc += pz[z] * q_cond[z, x]
            if acc < support_floor:
                acc = 0.0
            step = abs(acc - q_out[x])
            if step > dq:
                dq = step
            q_out[x] = acc
            newsum += acc
        for x in range(nx):
            q_out[x] /= newsum
        if abs(rate_par - prev_rate) < rate_tol and dq < marginal_tol:
            converged = True
            break
        prev_rate = rate_par
    mix = np.zeros(nx)
    for x in range(nx):
        acc = 0.0
        for z in range(nz):
            acc += pz[z] * q_cond[z, x]
        mix[x] = acc
    rate_mi = 0.0
    for z in range(nz):
        acc = 0.0
        for x in range(nx):
            qc = q_cond[z, x]
            if qc > 0.0 and mix[x] > 0.0:
                acc += qc * np.log(qc / mix[x])
        rate_mi += pz[z] * acc
    return q_cond, mix, f_dist, rate_mi, rate_par, iters, converged


def _ba_fixed_slope_numpy(expected_f, pz, s, max_iters, rate_tol, marginal_tol, support_floor):
    """Vectorized twin of _ba_fixed_slope_loop (same criteria, same order)."""
    nz, nx = expected_f.shape
    q_out = np.full(nx, 1.0 / nx)
    q_cond = np.zeros((nz, nx))
    logz = np.zeros(nz)
    prev_rate = np.inf
    converged = False
    iters = 0
    f_dist = 0.0
    rate_par = 0.0
    for it in range(max_iters):
        iters = it + 1
        support = q_out > 0.0
        m = np.where(support[None, :], expected_f, np.inf).min(axis=1)
        expo = np.minimum(s * (expected_f - m[:, None]), 0.0)
        w = np.where(support[None, :], q_out[None, :] * np.exp(expo), 0.0)
        tot = w.sum(axis=1)
        q_cond = w / tot[:, None]
        logz = np.log(tot) + s * m
        f_dist = float(pz @ (q_cond * expected_f).sum(axis=1))
        rate_par = s * f_dist - float(pz @ logz)
        new_q = pz @ q_cond
        new_q[new_q < support_floor] = 0.0
        dq = float(np.abs(new_q / new_q.sum() - q_out).max())
        q_out = new_q / new_q.sum()
        if abs(rate_par - prev_rate) < rate_tol and dq < marginal_tol:
            converged = True
            break
        prev_rate = rate_par
    mix = pz @ q_cond
    ok = (q_cond > 0.0) & (mix[None, :] > 0.0)
    terms = np.zeros_like(q_cond)
    np.log(np.where(ok, q_cond / np.where(mix[None, :] > 0.0, mix[None, :], 1.0), 1.0), out=terms)
    rate_mi = float(pz @ (q_cond * terms).sum(axis=1))
    return q_cond, mix, f_dist, rate_mi, rate_par, iters, converged


def _best_code_fold_loop(cost, M, total):
    """Scan all M**n_zseq encoder maps in lexicographic order.

    cost[j, k] is the criterion contribution of observation sequence j when
    its cell decodes to reconstruction sequence k. For a fixed encoder the
    cells decouple, so each cell takes its first-minimum column; ties keep
    the lexicographically smallest code overall.
    """
    n_zseq, n_dseq = cost.shape
    enc = np.zeros(n_zseq, np.int64)
    best_val = np.inf
    best_enc = np.zeros(n_zseq, np.int64)
    best_dec = np.zeros(M, np.int64)
    group = np.zeros((M, n_dseq))
    for _ in range(total):
        for w in range(M):
            for k in range(n_dseq):
                group[w, k] = 0.0
        for j in range(n_zseq):
            w = enc[j]
            for k in range(n_dseq):
                group[w, k] += cost[j, k]
        val = 0.0
        for w in range(M):
            bk = 0
            bv = group[w, 0]
            for k in range(1, n_dseq):
                if group[w, k] < bv:
                    bv = group[w, k]
                    bk = k
            val += bv
        if val < best_val:
            best_val = val
            for j in range(n_zseq):
                best_enc[j] = enc[j]
            for w in range(M):
                bk = 0
                bv = group[w, 0]
                for k in range(1, n_dseq):
                    if group[w, k] < bv:
                        bv = group[w, k]
                        bk = k
                best_dec[w] = bk
        i = n_zseq - 1
        while i >= 0:
            enc[i] += 1
            if enc[i] < M:
                break
            enc[i] = 0
            i -= 1
    return best_val, best_enc, best_dec


def _best_code_fold_numpy(cost, M, total, chunk=4096):
    """Chunk-vectorized twin of _best_code_fold_loop."""
    n_zseq, n_dseq = cost.shape
    place = M ** (n_zseq - 1 - np.arange(n_zseq, dtype=np.int64))
    best_val = np.inf
    best_enc = np.zeros(n_zseq, np.int64)
    best_dec = np.zeros(M, np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        enc = (idx[:, None] // place[None, :]) % M          # (c, n_zseq)
        onehot = (enc[:, :, None] == np.arange(M)[None, None, :]).astype(float)
        group = np.einsum("cjw,jk->cwk", onehot, cost)       # (c, M, n_dseq)
        vals = group.min(axis=2).sum(axis=1)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_enc = enc[i].copy()
            best_dec = group[i].argmin(axis=1).astype(np.int64)
    return best_val, best_enc, best_dec


def _want_numba() -> bool:
    return os.environ.get("IRDF_NUMBA", "").strip().lower() not in ("0", "false", "no", "off")


BACKEND = "numpy"
ba_fixed_slope_loop = _ba_fixed_slope_numpy
best_code_fold_loop = _best_code_fold_numpy

if _want_numba():
    try:
        from numba import njit

        ba_fixed_slope_loop = njit(cache=True, nogil=True)(_ba_fixed_slope_loop)
        best_code_fold_loop = njit(cache=True, nogil=True)(_best_code_fold_loop)
        BACKEND = "numba"
    except ImportError:
        pass
