"""Finite traffic models built from feasible inter-sample words.

Three model kinds over words of discrete inter-event times:

* ``trivial`` — every word up to the horizon, no solver involved;
* ``mpetc_bisim`` — exactly the words realized by the mixed strategy
  before entering the periodic set (a tree draining into the empty
  word), each carried by an exact rational witness;
* ``petc_sim`` — the subset of those words realized on the unit
  Lyapunov shell, with domino edges: from k-sigma one may move to any
  state extending sigma.

State sets are pure functions of the discretization and the horizon:
enumeration is lexicographic, and concurrent solver dispatch merges
results in submission order, so repeated builds are bit-identical.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import satcheck
from .ratlin import RatVector
from .satcheck import SolverUnknownError
from .sysmodel import DiscretizedPetc

Word = tuple[int, ...]
EPSILON: Word = ()

TRIVIAL = "trivial"
MPETC_BISIM = "mpetc_bisim"
PETC_SIM = "petc_sim"

PRUNE_PREFIX = "prefix"
PRUNE_FULL = "full"

DEFAULT_STATE_CAP = 2_000_000


def word_key(w: Word) -> tuple[int, Word]:
    return (len(w), w)


@dataclass(frozen=True)
class TrafficModel:
    kind: str
    states: frozenset[Word]
    edges: frozenset[tuple[Word, Word]]
    output: dict[Word, Fraction]
    witnesses: dict[Word, RatVector] = field(default_factory=dict)
    h: Fraction = Fraction(1)
    h_P: Fraction = Fraction(1)
    assumed: frozenset[Word] = frozenset()

    def __post_init__(self):
        if self.kind not in (TRIVIAL, MPETC_BISIM, PETC_SIM):
            raise ValueError(f"bad model kind {self.kind!r}")
        for s, t in self.edges:
            if s not in self.states or t not in self.states:
                raise ValueError("edge endpoint outside the state set")
        for s in self.states:
            if s not in self.output:
                raise ValueError(f"state {s} has no output")

    @property
    def is_exact(self) -> bool:
        """False when undecided words were kept (over-approximation)."""
        return not self.assumed

    def n_states(self, include_epsilon: bool = True) -> int:
        n = len(self.states)
        if not include_epsilon and EPSILON in self.states:
            n -= 1
        return n

    def successors(self, w: Word) -> list[Word]:
        return sorted((t for s, t in self.edges if s == w), key=word_key)

    def sorted_states(self) -> list[Word]:
        return sorted(self.states, key=word_key)


def _tree_edges(states) -> set[tuple[Word, Word]]:
    edges = set()
    for w in states:
        if w == EPSILON:
            edges.add((EPSILON, EPSILON))
        else:
            tail = w[1:]
            if tail not in states:
                raise ValueError(f"state set not suffix-closed at {w}")
            edges.add((w, tail))
    return edges


def _outputs(states, h: Fraction, h_P: Fraction) -> dict[Word, Fraction]:
    return {w: (h_P if w == EPSILON else h * w[0]) for w in states}


def build_trivial(K, N: int, h=Fraction(1), h_P=Fraction(1),
                  state_cap: int = DEFAULT_STATE_CAP) -> TrafficModel:
    """All words over K up to length N, plus the empty word."""
    ks = sorted(range(1, K + 1) if isinstance(K, int) else set(K))
    if not ks:
        raise ValueError("K must be non-empty")
    total = sum(len(ks) ** i for i in range(N + 1))
    if total > state_cap:
        raise ValueError(f"{total} states exceed the cap {state_cap}")
    states: set[Word] = {EPSILON}
    level = [EPSILON]
    for _ in range(N):
        level = [w + (k,) for w in level for k in ks]
        states.update(level)
    return TrafficModel(kind=TRIVIAL, states=frozenset(states),
                        edges=frozenset(_tree_edges(states)),
                        output=_outputs(states, Fraction(h), Fraction(h_P)),
                        h=Fraction(h), h_P=Fraction(h_P))


def _run_queries(queries, budget, solver_cmd, workers):
    """Dispatch satcheck queries, results in submission order."""
    if workers > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(satcheck.check, q, budget, solver_cmd)
                       for q in queries]
            return [f.result() for f in futures]
    return [satcheck.check(q, budget, solver_cmd) for q in queries]


def _settle_unknowns(words, results, assume_sat, assumed: set):
    for w, res in zip(words, results):
        if res.status == "unknown":
            if not assume_sat:
                raise SolverUnknownError(
                    f"undecided feasibility for word {w}: {res.reason}",
                    word=w)
            assumed.add(w)


def build_mpetc_bisim(disc: DiscretizedPetc, N: int,
                      budget: float = satcheck.DEFAULT_BUDGET_S,
                      solver_cmd=None, workers: int = 1,
                      prune: str = PRUNE_PREFIX,
                      assume_sat: bool = False) -> TrafficModel:
    """The words realized before entering the periodic set.

    ``prune=prefix`` extends words to the right and discards any whose
    terminal-free query is already infeasible; ``prune=full`` extends
    kept words to the left, relying on suffix closure, and issues full
    queries only.  Both return the same model.
    """
    if prune not in (PRUNE_PREFIX, PRUNE_FULL):
        raise ValueError(f"bad prune mode {prune!r}")
    states: set[Word] = {EPSILON}
    witnesses: dict[Word, RatVector] = {
        EPSILON: tuple(Fraction(0) for _ in range(disc.n_x))}
    assumed: set[Word] = set()
    ks = list(disc.K_range)

    if prune == PRUNE_PREFIX:
        frontier: list[Word] = [EPSILON]
        for _ in range(N):
            candidates = sorted((w + (k,) for w in frontier for k in ks),
                                key=word_key)
            if not candidates:
                break
            # the terminal-free query first: if it is unsat, the full
            # query is unsat too and no extension can ever be feasible
            pref = [satcheck.sequence_query(disc, w, satcheck.SUBLEVEL,
                                            terminal=False)
                    for w in candidates]
            pref_res = _run_queries(pref, budget, solver_cmd, workers)
            live = [w for w, pr in zip(candidates, pref_res)
                    if pr.status != "unsat"]
            full = [satcheck.sequence_query(disc, w, satcheck.SUBLEVEL,
                                            terminal=True)
                    for w in live]
            full_res = _run_queries(full, budget, solver_cmd, workers)
            _settle_unknowns(live, full_res, assume_sat, assumed)
            frontier = live
            for w, fr in zip(live, full_res):
                if fr.status == "sat":
                    states.add(w)
                    witnesses[w] = fr.witness
                elif w in assumed:
                    states.add(w)
    else:
        level: list[Word] = [EPSILON]
        for _ in range(N):
            candidates = sorted(((k,) + w for w in level for k in ks),
                                key=word_key)
            if not candidates:
                break
            queries = [satcheck.sequence_query(disc, w, satcheck.SUBLEVEL,
                                               terminal=True)
                       for w in candidates]
            results = _run_queries(queries, budget, solver_cmd, workers)
            _settle_unknowns(candidates, results, assume_sat, assumed)
            level = []
            for w, res in zip(candidates, results):
                if res.status == "sat" or w in assumed:
                    states.add(w)
                    if res.status == "sat":
                        witnesses[w] = res.witness
                    level.append(w)

    return TrafficModel(kind=MPETC_BISIM, states=frozenset(states),
                        edges=frozenset(_tree_edges(states)),
                        output=_outputs(states, disc.h, disc.h_P),
                        witnesses=witnesses, h=disc.h, h_P=disc.h_P,
                        assumed=frozenset(assumed))


def domino_edges(states) -> set[tuple[Word, Word]]:
    """(k sigma, tau) for every tau extending sigma."""
    edges = set()
    for w in states:
        tail = w[1:]
        for t in states:
            if t[:len(tail)] == tail:
                edges.add((w, t))
    return edges


def build_petc_sim(disc: DiscretizedPetc, mpetc_model: TrafficModel,
                   budget: float = satcheck.DEFAULT_BUDGET_S,
                   solver_cmd=None, workers: int = 1,
                   assume_sat: bool = False) -> TrafficModel:
    """Unit-shell re-check of the bisimilar model's words, domino edges.

    By homogeneity, any word realized on the unit shell is realized in
    the initial sublevel set, so the candidate set is exactly the
    non-empty words of the mixed-strategy model.
    """
    if mpetc_model.kind != MPETC_BISIM:
        raise ValueError("candidate model must be of kind mpetc_bisim")
    candidates = [w for w in mpetc_model.sorted_states() if w != EPSILON]
    queries = [satcheck.sequence_query(disc, w, satcheck.UNIT_LEVEL,
                                       terminal=True)
               for w in candidates]
    results = _run_queries(queries, budget, solver_cmd, workers)
    assumed: set[Word] = set()
    _settle_unknowns(candidates, results, assume_sat, assumed)
    states: set[Word] = set()
    witnesses: dict[Word, RatVector] = {}
    for w, res in zip(candidates, results):
        if res.status == "sat":
            states.add(w)
            witnesses[w] = res.witness
        elif w in assumed:
            states.add(w)
    edges = domino_edges(states)
    out_deg = {w: 0 for w in states}
    for s, _ in edges:
        out_deg[s] += 1
    blocked = sorted((w for w, d in out_deg.items() if d == 0), key=word_key)
    if blocked:
        raise RuntimeError(f"blocking states in the simulating model: "
                           f"{blocked[:5]}")
    return TrafficModel(kind=PETC_SIM, states=frozenset(states),
                        edges=frozenset(edges),
                        output=_outputs(states, disc.h, disc.h_P),
                        witnesses=witnesses, h=disc.h, h_P=disc.h_P,
                        assumed=frozenset(assumed) | mpetc_model.assumed)


# ---------------------------------------------------------------------------
# serialization


def _frac_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _frac_parse(s: str) -> Fraction:
    return Fraction(s)


def export_model(model: TrafficModel, format: str = "json") -> bytes:
    if format == "json":
        return _export_json(model)
    if format == "dot":
        return _export_dot(model)
    raise ValueError(f"bad export format {format!r}")


def _export_json(model: TrafficModel) -> bytes:
    order = model.sorted_states()
    index = {w: i for i, w in enumerate(order)}
    states = []
    for w in order:
        entry = {"word": list(w), "output": _frac_str(model.output[w])}
        if w in model.witnesses:
            entry["witness"] = [_frac_str(v) for v in model.witnesses[w]]
        states.append(entry)
    doc = {
        "kind": model.kind,
        "h": _frac_str(model.h),
        "h_P": _frac_str(model.h_P),
        "exact": model.is_exact,
        "assumed": sorted((list(w) for w in model.assumed)),
        "states": states,
        "edges": sorted([index[s], index[t]] for s, t in model.edges),
    }
    return (json.dumps(doc, indent=1, sort_keys=True,
                       separators=(",", ": ")) + "\n").encode()


def _node_name(w: Word) -> str:
    return "eps" if w == EPSILON else "_".join(map(str, w))


def _export_dot(model: TrafficModel) -> bytes:
    lines = ["digraph traffic {"]
    for w in model.sorted_states():
        label = "eps" if w == EPSILON else ",".join(map(str, w))
        lines.append(f'  "{_node_name(w)}" [label="{label}"];')
    for s, t in sorted(model.edges, key=lambda e: (word_key(e[0]),
                                                   word_key(e[1]))):
        lines.append(f'  "{_node_name(s)}" -> "{_node_name(t)}";')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()


def import_model(data: bytes) -> TrafficModel:
    doc = json.loads(data.decode())
    order = [tuple(w) for w in (s["word"] for s in doc["states"])]
    output = {}
    witnesses = {}
    for w, s in zip(order, doc["states"]):
        output[w] = _frac_parse(s["output"])
        if "witness" in s:
            witnesses[w] = tuple(_frac_parse(v) for v in s["witness"])
    edges = {(order[i], order[j]) for i, j in doc["edges"]}
    return TrafficModel(kind=doc["kind"], states=frozenset(order),
                        edges=frozenset(edges), output=output,
                        witnesses=witnesses, h=_frac_parse(doc["h"]),
                        h_P=_frac_parse(doc["h_P"]),
                        assumed=frozenset(tuple(w) for w in doc["assumed"]))
