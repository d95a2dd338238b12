"""Randomized validation tying the concrete loop to the abstract models.

Forward direction: sampled concrete words must appear in the bisimilar
model and replay its unique trace.  Backward direction: every stored
witness must regenerate exactly its word.  For the simulating model,
sampled infinite runs must be reproducible edge by edge.  All sampling
is seeded and exact: random dyadic points, rational membership tests.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import ratlin, semantics
from .abstraction import EPSILON, MPETC_BISIM, PETC_SIM, TrafficModel
from .ratlin import RatVector
from .sysmodel import DiscretizedPetc


@dataclass
class CheckReport:
    name: str
    n_checked: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def add_failure(self, **info):
        self.failures.append(info)

    def render(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{self.name}: {status} ({self.n_checked} checks)"
        for f in self.failures[:10]:
            out += "\n  " + json.dumps(f, default=str)
        return out


def _bounding_radii(disc: DiscretizedPetc) -> np.ndarray:
    """Per-axis half-widths of a box containing {V <= V0}."""
    p = ratlin.to_float_matrix(disc.P_rat)
    inv = np.linalg.inv(p)
    return np.sqrt(float(disc.V0) * np.maximum(np.diag(inv), 0.0))


def sample_states(disc: DiscretizedPetc, n: int, seed: int,
                  prec: int = 30) -> list[RatVector]:
    """n exact rational points with V(x) <= V0, by rejection from the
    bounding box of the ellipsoid; dyadic coordinates, exact acceptance."""
    rng = random.Random(seed)
    radii = _bounding_radii(disc)
    scale = 1 << prec
    out: list[RatVector] = []
    while len(out) < n:
        x = tuple(Fraction(rng.randint(-scale, scale), scale)
                  * Fraction(r).limit_denominator(10 ** 9)
                  for r in radii)
        if disc.V(x) <= disc.V0:
            out.append(x)
    return out


def sample_shell_states(disc: DiscretizedPetc, n: int, seed: int,
                        prec: int = 30) -> list[RatVector]:
    """n exact rational points with 0 < V(x) <= V0 and V(x) > r V0,
    i.e. inside the initial set but outside the periodic set (rescaled
    from the sublevel sample); used to exercise the event-triggered
    phase."""
    rng = random.Random(seed)
    raw = sample_states(disc, 2 * n + 16, seed ^ 0x5EED, prec)
    out = []
    rv0 = disc.r * disc.V0
    for x in raw:
        v = disc.V(x)
        if v == 0:
            continue
        if v <= rv0:
            # push outward with an exact rational scaling
            lam = _rational_upscale(v, rv0, disc.V0)
            x = tuple(lam * c for c in x)
            v = disc.V(x)
            if not (rv0 < v <= disc.V0):
                continue
        out.append(x)
        if len(out) == n:
            break
    while len(out) < n:
        extra = sample_shell_states(disc, n - len(out),
                                    rng.randint(0, 2 ** 31), prec)
        out.extend(extra)
    return out[:n]


def _rational_upscale(v: Fraction, rv0: Fraction, v0: Fraction) -> Fraction:
    """A rational lambda with r V0 < lambda^2 v <= V0: a rational
    approximation of sqrt of the band's midpoint, refined until it
    lands inside."""
    t_lo, t_hi = rv0 / v, v0 / v
    mid = float((t_lo + t_hi) / 2) ** 0.5
    for digits in (6, 9, 12, 15, 18):
        lam = Fraction(mid).limit_denominator(10 ** digits)
        if lam > 0 and t_lo < lam * lam <= t_hi:
            return lam
    raise ArithmeticError("could not place a rational scale in the band")


def check_bisim_sample(disc: DiscretizedPetc, model: TrafficModel,
                       n_samples: int, seed: int = 0,
                       max_word_len: int | None = None) -> CheckReport:
    """Thm.-1-style spot check of the bisimilar model."""
    if model.kind != MPETC_BISIM:
        raise ValueError("expected the bisimilar model")
    rep = CheckReport(name="bisimulation sample check")
    cap = max_word_len if max_word_len is not None else 10 * len(model.states)

    # forward: sampled concrete word is a state and replays the tree
    for i, x0 in enumerate(sample_states(disc, n_samples, seed)):
        word = semantics.concrete_sequence(disc, x0, max_len=cap)
        rep.n_checked += 1
        if word not in model.states:
            rep.add_failure(direction="forward", sample=i, x0=x0, word=word)
            continue
        # the unique model trace from `word` is its chain of suffixes;
        # outputs must equal the concrete inter-sample times
        x, w = x0, word
        while w != EPSILON:
            x_next, dt = semantics.mpetc_step(disc, x)
            if dt != model.output[w] or (w, w[1:]) not in model.edges:
                rep.add_failure(direction="forward-trace", sample=i, x0=x0,
                                word=word, at=w)
                break
            x, w = x_next, w[1:]

    # backward: every stored witness regenerates exactly its word
    for w in model.sorted_states():
        if w not in model.witnesses:
            continue
        rep.n_checked += 1
        replay = semantics.concrete_sequence(disc, model.witnesses[w],
                                             max_len=cap)
        if replay != w:
            rep.add_failure(direction="backward", word=w, replay=replay,
                            witness=model.witnesses[w])
    return rep


def normalized_word(disc: DiscretizedPetc, x: RatVector,
                    max_len: int) -> tuple[int, ...]:
    """Word of x under the event-triggered law until the (unnormalized)
    Lyapunov value first drops to r V(x) — the word of x/sqrt(V(x)) by
    homogeneity, without ever forming the square root."""
    v0 = disc.V(x)
    if v0 <= 0:
        raise ValueError("needs a state with positive Lyapunov value")
    target = disc.r * v0
    word: list[int] = []
    while disc.V(x) > target:
        if len(word) >= max_len:
            raise semantics.HorizonExceededError(x, tuple(word))
        x, k = semantics.petc_step(disc, x)
        word.append(k)
    return tuple(word)


def check_sim_petc(disc: DiscretizedPetc, model: TrafficModel,
                   n_samples: int, steps: int, seed: int = 0,
                   max_word_len: int | None = None) -> CheckReport:
    """Thm.-2-style spot check: sampled pure event-triggered runs are
    reproducible by edge-following through the simulating model."""
    if model.kind != PETC_SIM:
        raise ValueError("expected the simulating model")
    rep = CheckReport(name="simulation sample check")
    cap = max_word_len if max_word_len is not None else 10 * len(model.states)
    for i, x0 in enumerate(sample_shell_states(disc, n_samples, seed)):
        x = x0
        prev = None
        for step in range(steps):
            word = normalized_word(disc, x, cap)
            rep.n_checked += 1
            if word not in model.states:
                rep.add_failure(sample=i, step=step, x=x, word=word,
                                kind="missing state")
                break
            k = semantics.kappa(disc, x)
            if word and word[0] != k:
                rep.add_failure(sample=i, step=step, x=x, word=word,
                                kind="output mismatch", kappa=k)
                break
            if prev is not None and (prev, word) not in model.edges:
                rep.add_failure(sample=i, step=step, x=x, word=word,
                                prev=prev, kind="missing edge")
                break
            prev = word
            x, _ = semantics.petc_step(disc, x)
    return rep
