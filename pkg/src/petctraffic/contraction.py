"""Certified contraction factor, periodic-phase period, and horizon.

The per-sample Lyapunov decrease ratio `a` is certified by bisection,
each candidate validated through per-cone counterexample queries; the
periodic period h_P by an exact eigenvalue scan; the word-length horizon
N by exact rational power bracketing, so the ceiling can never
under-count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import satcheck
from .satcheck import SatResult, SolverUnknownError
from .sysmodel import (DiscretizedPetc, EIG_TOL, PetcSystem,
                       discretize_at_time)

DEFAULT_A_TOL = Fraction(1, 1000)
DEFAULT_HP_RESOLUTION = Fraction(1, 100)


class NotContractiveError(RuntimeError):
    """No decrease ratio below one could be certified."""


def _as_exact(value) -> Fraction:
    """Fraction conversion reading floats as the decimals they print as."""
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class ContractionCert:
    """Certificate that V decreases by at least the factor `a` per sample."""

    a: Fraction
    per_k_unsat: dict[int, SatResult]
    bisection_trace: tuple[tuple[Fraction, str], ...]
    tol: Fraction


def _validate_candidate(disc: DiscretizedPetc, a: Fraction, budget: float,
                        solver_cmd, workers: int) -> tuple[bool, dict[int, SatResult]]:
    """a holds iff every cone's counterexample query is unsat."""
    ks = list(disc.K_range)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(satcheck.contraction_counterexample,
                                   disc, k, a, budget, solver_cmd)
                       for k in ks]
            results = {k: f.result() for k, f in zip(ks, futures)}
    else:
        results = {k: satcheck.contraction_counterexample(disc, k, a, budget,
                                                          solver_cmd)
                   for k in ks}
    for k in ks:
        if results[k].status == "unknown":
            raise SolverUnknownError(
                f"contraction query undecided at k={k}, a={a}: "
                f"{results[k].reason}")
    return all(results[k].status == "unsat" for k in ks), results


def compute_a(disc: DiscretizedPetc, tol=DEFAULT_A_TOL,
              budget: float = satcheck.DEFAULT_BUDGET_S,
              solver_cmd=None, workers: int = 1) -> ContractionCert:
    """Smallest certified decrease ratio within tol, rounded up to the
    tol grid.  Bisection keeps a violated lower end and a certified
    upper end; the returned grid point is re-validated explicitly."""
    tol = _as_exact(tol)
    if not 0 < tol < 1:
        raise ValueError("tol must be in (0, 1)")
    trace: list[tuple[Fraction, str]] = []
    hi = 1 - tol
    ok, evidence = _validate_candidate(disc, hi, budget, solver_cmd, workers)
    trace.append((hi, "unsat" if ok else "sat"))
    if not ok:
        raise NotContractiveError(
            f"decrease ratio {float(hi):.6g} is still violated; "
            "the loop does not contract per sample")
    # bisect well below tol so that snapping up to the grid lands on the
    # smallest grid value above the true infimum
    lo = Fraction(0)
    while hi - lo > tol / 16:
        mid = (lo + hi) / 2
        ok, res = _validate_candidate(disc, mid, budget, solver_cmd, workers)
        trace.append((mid, "unsat" if ok else "sat"))
        if ok:
            hi, evidence = mid, res
        else:
            lo = mid
    # snap up to the tol grid; monotonicity keeps the snapped value valid,
    # but it is validated anyway so the certificate is self-contained
    a = -((-hi) // tol) * tol
    if a >= 1:
        a = 1 - tol
    if a != hi:
        ok, evidence = _validate_candidate(disc, a, budget, solver_cmd, workers)
        trace.append((a, "unsat" if ok else "sat"))
        if not ok:
            raise NotContractiveError(
                f"grid value {float(a):.6g} unexpectedly violated")
    # the infimum may sit exactly on a grid point; step down while valid
    for _ in range(2):
        down = a - tol
        if down <= 0:
            break
        ok, res = _validate_candidate(disc, down, budget, solver_cmd, workers)
        trace.append((down, "unsat" if ok else "sat"))
        if not ok:
            break
        a, evidence = down, res
    return ContractionCert(a=a, per_k_unsat=evidence,
                           bisection_trace=tuple(trace), tol=tol)


def hP_condition(sys: PetcSystem, h_P: Fraction,
                 eig_tol: float = EIG_TOL) -> bool:
    """Whether period h_P keeps V non-increasing: lambda_max(M_P' P M_P - P) <= tol."""
    m_p = discretize_at_time(sys, float(h_P))
    gap = m_p.T @ sys.P @ m_p - sys.P
    return float(np.linalg.eigvalsh((gap + gap.T) / 2).max()) <= eig_tol


def compute_hP(sys: PetcSystem, resolution=DEFAULT_HP_RESOLUTION,
               h_max=None, eig_tol: float = EIG_TOL) -> Fraction:
    """Largest multiple of the resolution (up to h_max, default 2 h k_bar)
    at which periodic sampling keeps the Lyapunov function non-increasing;
    scans downward from h_max."""
    resolution = _as_exact(resolution)
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    h_max = 2 * sys.h * sys.k_bar if h_max is None else _as_exact(h_max)
    for j in range(int(h_max / resolution), 0, -1):
        h_p = j * resolution
        if hP_condition(sys, h_p, eig_tol):
            return h_p
    raise NotContractiveError(
        f"no multiple of {float(resolution):.6g} up to {float(h_max):.6g} "
        "keeps the Lyapunov function non-increasing under periodic sampling")


def compute_N(a, r) -> int:
    """ceil(log_a r) via exact rational powers: the least n with a^n <= r."""
    a, r = Fraction(a), Fraction(r)
    if not 0 < a < 1:
        raise ValueError("a must be in (0, 1)")
    if not 0 < r < 1:
        raise ValueError("r must be in (0, 1)")
    # exponential search then binary search on n
    hi = 1
    while a ** hi > r:
        hi *= 2
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if a ** mid <= r:
            hi = mid
        else:
            lo = mid
    if a ** lo <= r and lo >= 1:
        return lo
    return hi


def trace_count_bounds(K_size: int, N: int) -> tuple[int, int]:
    """Worst-case word counts: the closed-form bound
    K((K-1)^N - 1)/(K-1) (floor when the division is inexact) and the
    geometric sum 1 + K + ... + K^N counting every word up to length N
    including the empty one."""
    if K_size < 2 or N < 1:
        raise ValueError("need K_size >= 2 and N >= 1")
    stated = (K_size * ((K_size - 1) ** N - 1)) // (K_size - 1)
    proof_sum = sum(K_size ** i for i in range(N + 1))
    return stated, proof_sum
