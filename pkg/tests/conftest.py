"""Shared fixtures: the two-dimensional example system at the fast
setting (r = 0.5) used by most tests, plus small synthetic systems."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from petctraffic import abstraction, contraction
from petctraffic.sysmodel import (PetcSystem, PredictiveTriggerSpec,
                                  build_predictive_Q, rationalize)

A = [[0.0, 1.0], [-2.0, 3.0]]
B = [[0.0], [1.0]]
K = [[1.0, -4.0]]
P_LYAP = [[1.0, 0.25], [0.25, 1.0]]
Q_LYAP = [[0.5, 0.25], [0.25, 1.5]]
RHO = 0.8
H = Fraction(1, 10)
K_BAR = 6


def make_system(r, V0=Fraction(1), P=None) -> PetcSystem:
    P = P_LYAP if P is None else P
    spec = PredictiveTriggerSpec(P_lyap=P, Q_lyap=Q_LYAP, rho=RHO)
    placeholder = PetcSystem(A=A, B=B, K=K, P=P, Q_trig=np.zeros((4, 4)),
                             h=H, k_bar=K_BAR, r=r, V0=V0)
    q = build_predictive_Q(spec, placeholder)
    return PetcSystem(A=A, B=B, K=K, P=P, Q_trig=q, h=H, k_bar=K_BAR,
                      r=r, V0=V0)


@pytest.fixture(scope="session")
def ci_sys() -> PetcSystem:
    return make_system(Fraction(1, 2))


@pytest.fixture(scope="session")
def ci_disc(ci_sys):
    h_p = contraction.compute_hP(ci_sys)
    return rationalize(ci_sys, h_p)


@pytest.fixture(scope="session")
def ci_cert(ci_disc):
    return contraction.compute_a(ci_disc, workers=4)


@pytest.fixture(scope="session")
def ci_N(ci_cert, ci_disc) -> int:
    return contraction.compute_N(ci_cert.a, ci_disc.r)


@pytest.fixture(scope="session")
def ci_bisim(ci_disc, ci_N):
    return abstraction.build_mpetc_bisim(ci_disc, ci_N, workers=4)


@pytest.fixture(scope="session")
def ci_sim(ci_disc, ci_bisim):
    return abstraction.build_petc_sim(ci_disc, ci_bisim, workers=4)


@pytest.fixture(scope="session")
def tiny_disc():
    """Single-mode contraction toy: M(k) = (1/2)^k I, P = I.

    N(k) is rigged so that every nonzero state triggers at k = 1."""
    sys_ = PetcSystem(A=[[0.0, 0.0], [0.0, 0.0]], B=[[1.0], [0.0]],
                      K=[[0.0, 0.0]], P=np.eye(2),
                      Q_trig=np.zeros((4, 4)), h=Fraction(1),
                      k_bar=1, r=Fraction(1, 4))
    disc = rationalize(sys_, Fraction(1))
    half = Fraction(1, 2)
    m = ((half, Fraction(0)), (Fraction(0), half))
    object.__setattr__(disc, "M", {1: m})
    object.__setattr__(disc, "M_P", m)
    return disc
