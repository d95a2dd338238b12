"""Batch float kernels for sampling-based oracles.

The exact-rational core never goes through here; these kernels serve the
randomized cross-checks and the empirical bounds, where millions of
quadratic-form evaluations dominate.  Hot loops are compiled with numba
unless PETCTRAFFIC_NO_NUMBA is set (or numba is unavailable), in which
case a pure-numpy path with identical semantics is used.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = not os.environ.get("PETCTRAFFIC_NO_NUMBA")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = ["USE_NUMBA", "batch_quadform", "batch_kappa", "max_step_ratio"]


def _batch_quadform_np(f: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.einsum("si,ij,sj->s", xs, f, xs)


def _batch_kappa_np(n_stack: np.ndarray, xs: np.ndarray) -> np.ndarray:
    m, s = n_stack.shape[0], xs.shape[0]
    out = np.full(s, m + 1, dtype=np.int64)
    for k in range(m, 0, -1):
        vals = _batch_quadform_np(n_stack[k - 1], xs)
        out[vals > 0.0] = k
    return out


def _max_step_ratio_np(m_stack: np.ndarray, n_stack: np.ndarray,
                       p: np.ndarray, xs: np.ndarray) -> float:
    ks = _batch_kappa_np(n_stack, xs)
    nxt = np.einsum("sij,sj->si", m_stack[ks - 1], xs)
    num = _batch_quadform_np(p, nxt)
    den = _batch_quadform_np(p, xs)
    good = den > 0.0
    if not good.any():
        return 0.0
    return float(np.max(num[good] / den[good]))


if USE_NUMBA:

    @njit(cache=True)
    def _batch_quadform_nb(f, xs):  # pragma: no cover - compiled
        s, n = xs.shape
        out = np.empty(s)
        for t in range(s):
            acc = 0.0
            for i in range(n):
                row = 0.0
                for j in range(n):
                    row += f[i, j] * xs[t, j]
                acc += xs[t, i] * row
            out[t] = acc
        return out

    @njit(cache=True)
    def _batch_kappa_nb(n_stack, xs):  # pragma: no cover - compiled
        m = n_stack.shape[0]
        s, n = xs.shape
        out = np.empty(s, dtype=np.int64)
        for t in range(s):
            res = m + 1
            for k in range(m):
                acc = 0.0
                for i in range(n):
                    row = 0.0
                    for j in range(n):
                        row += n_stack[k, i, j] * xs[t, j]
                    acc += xs[t, i] * row
                if acc > 0.0:
                    res = k + 1
                    break
            out[t] = res
        return out

    @njit(cache=True)
    def _max_step_ratio_nb(m_stack, n_stack, p, xs):  # pragma: no cover
        ks = _batch_kappa_nb(n_stack, xs)
        s, n = xs.shape
        best = 0.0
        for t in range(s):
            mk = m_stack[ks[t] - 1]
            nxt = np.empty(n)
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += mk[i, j] * xs[t, j]
                nxt[i] = acc
            num = 0.0
            den = 0.0
            for i in range(n):
                row_n = 0.0
                row_x = 0.0
                for j in range(n):
                    row_n += p[i, j] * nxt[j]
                    row_x += p[i, j] * xs[t, j]
                num += nxt[i] * row_n
                den += xs[t, i] * row_x
            if den > 0.0 and num / den > best:
                best = num / den
        return best


def batch_quadform(f, xs) -> np.ndarray:
    """x' F x for each row x of xs."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if USE_NUMBA:
        return _batch_quadform_nb(f, xs)
    return _batch_quadform_np(f, xs)


def batch_kappa(n_stack, xs) -> np.ndarray:
    """Discrete inter-event times for each row of xs.

    n_stack holds N(1)..N(k_bar - 1); index k_bar means no form fired.
    Entries of the result are in 1..k_bar where k_bar = len(n_stack)+1.
    """
    n_stack = np.ascontiguousarray(n_stack, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if USE_NUMBA:
        return _batch_kappa_nb(n_stack, xs)
    return _batch_kappa_np(n_stack, xs)


def max_step_ratio(m_stack, n_stack, p, xs) -> float:
    """max over samples of V(M(kappa(x)) x) / V(x).

    m_stack holds M(1)..M(k_bar); n_stack holds N(1)..N(k_bar - 1).
    An empirical lower bound on the certified contraction factor.
    """
    m_stack = np.ascontiguousarray(m_stack, dtype=np.float64)
    n_stack = np.ascontiguousarray(n_stack, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if m_stack.shape[0] != n_stack.shape[0] + 1:
        raise ValueError("need one more transition matrix than trigger forms")
    if USE_NUMBA:
        return _max_step_ratio_nb(m_stack, n_stack, p, xs)
    return _max_step_ratio_np(m_stack, n_stack, p, xs)
