"""Exact concrete semantics of the event-triggered loop.

The inter-event map kappa, the mixed sampling step, word extraction, and
trace simulation — all evaluated in exact rational arithmetic over the
frozen discretization, so these routines double as the brute-force
oracle for the abstract models.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from . import ratlin
from .ratlin import RatVector
from .sysmodel import DiscretizedPetc

ConcreteState = RatVector


class HorizonExceededError(RuntimeError):
    """The word grew past the certified horizon; the contraction factor is bad."""

    def __init__(self, x0: ConcreteState, word: tuple[int, ...]):
        super().__init__(
            f"no periodic-set entry within {len(word)} steps from {x0}")
        self.x0 = x0
        self.word = word


def kappa(disc: DiscretizedPetc, x: ConcreteState) -> int:
    """Discrete inter-event time: min{k : x'N(k)x > 0 or k = k_bar}.

    The strict comparison is exact; x = 0 yields k_bar (all forms
    vanish, so only the terminal disjunct fires).
    """
    for k in range(1, disc.k_bar):
        if ratlin.quad_form(disc.N[k], x) > 0:
            return k
    return disc.k_bar


def mpetc_step(disc: DiscretizedPetc,
               x: ConcreteState) -> tuple[ConcreteState, Fraction]:
    """One step of the mixed strategy: event-triggered outside the inner
    sublevel set {V <= r V0}, periodic with period h_P inside (boundary
    states take the periodic branch)."""
    v = disc.V(x)
    if v > disc.V0:
        raise ValueError(f"state outside the initial sublevel set: V = {v}")
    if v > disc.r * disc.V0:
        k = kappa(disc, x)
        return ratlin.mat_vec(disc.M[k], x), disc.h * k
    return ratlin.mat_vec(disc.M_P, x), disc.h_P


def petc_step(disc: DiscretizedPetc,
              x: ConcreteState) -> tuple[ConcreteState, int]:
    """One step of the pure event-triggered law, no periodic switch."""
    k = kappa(disc, x)
    return ratlin.mat_vec(disc.M[k], x), k


def concrete_sequence(disc: DiscretizedPetc, x0: ConcreteState,
                      max_len: int | None = None) -> tuple[int, ...]:
    """Word of discrete inter-event times until first entry into the
    periodic set; the empty word if x0 already lies inside.

    ``max_len`` (default: a loose cap) guards against a miscertified
    contraction factor; exceeding it raises with the offending prefix.
    """
    if disc.V(x0) > disc.V0:
        raise ValueError("initial state outside the initial sublevel set")
    cap = max_len if max_len is not None else 10_000
    rv0 = disc.r * disc.V0
    word: list[int] = []
    x = x0
    while disc.V(x) > rv0:
        if len(word) >= cap:
            raise HorizonExceededError(x0, tuple(word))
        x, k = petc_step(disc, x)
        word.append(k)
    return tuple(word)


@dataclass(frozen=True)
class Trace:
    """Sampled trajectory: states at sampling instants and the times between."""

    times: tuple[Fraction, ...]
    states: tuple[ConcreteState, ...]
    entered_periodic_at: int | None

    def __post_init__(self):
        if len(self.states) != len(self.times) + 1:
            raise ValueError("need one more state than inter-sample times")

    def sampling_instants(self) -> tuple[Fraction, ...]:
        out = [Fraction(0)]
        for t in self.times:
            out.append(out[-1] + t)
        return tuple(out)

    def lyapunov_values(self, disc: DiscretizedPetc) -> tuple[Fraction, ...]:
        return tuple(disc.V(x) for x in self.states)

    def to_csv(self, disc: DiscretizedPetc) -> str:
        buf = io.StringIO()
        n = disc.n_x
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sample_index", "t", "inter_sample_time", "V"]
                        + [f"x{i + 1}" for i in range(n)])
        instants = self.sampling_instants()
        for i, x in enumerate(self.states):
            dt = self.times[i] if i < len(self.times) else ""
            writer.writerow([i, float(instants[i]),
                             float(dt) if dt != "" else "",
                             float(disc.V(x))] + [float(v) for v in x])
        return buf.getvalue()


def simulate_trace(disc: DiscretizedPetc, x0: ConcreteState,
                   horizon) -> Trace:
    """Run the mixed strategy from x0 until the next step would pass the
    horizon; records every sampling instant."""
    horizon = Fraction(horizon)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    states = [ratlin.vec(x0)]
    times: list[Fraction] = []
    entered: int | None = None
    rv0 = disc.r * disc.V0
    if disc.V(states[0]) <= rv0:
        entered = 0
    elapsed = Fraction(0)
    while True:
        x, dt = mpetc_step(disc, states[-1])
        if elapsed + dt > horizon:
            break
        elapsed += dt
        states.append(x)
        times.append(dt)
        if entered is None and disc.V(x) <= rv0:
            entered = len(states) - 1
    return Trace(times=tuple(times), states=tuple(states),
                 entered_periodic_at=entered)
