"""Query construction, SMT-LIB encoding, and solver-driver behavior."""

from __future__ import annotations

from fractions import Fraction

import pytest

from petctraffic import ratlin, satcheck, semantics, verify
from petctraffic.satcheck import (QuadAtom, SatQuery, SolverTransportError,
                                  check, contraction_counterexample,
                                  parse_model, sequence_query, to_smtlib)

F = Fraction


def test_quad_atom_validation():
    ident = ratlin.identity(2)
    with pytest.raises(ValueError):
        QuadAtom(ident, "!=", F(0))
    with pytest.raises(ValueError):
        QuadAtom(ratlin.mat([[0, 1], [0, 0]]), ">", F(0))
    a = QuadAtom(ident, ">=", F(2))
    assert a.holds((F(1), F(1)))
    assert not a.holds((F(1), F(0)))


def test_query_validation():
    with pytest.raises(ValueError):
        SatQuery(atoms=(), n_x=2)
    with pytest.raises(ValueError):
        SatQuery(atoms=(QuadAtom(ratlin.identity(3), ">", F(0)),), n_x=2)


def test_sequence_query_atom_counts(ci_disc):
    # shell + per position: (k_i - k_lo) exclusions, a strict trigger
    # unless k_i = k_bar, and one sublevel exclusion; terminal at the end
    for word in [(1,), (3, 1), (6, 2, 1), (4, 1, 1, 1, 1, 1)]:
        q = sequence_query(ci_disc, word)
        expect = 1 + sum((k - ci_disc.k_lo) + (k < ci_disc.k_bar) + 1
                         for k in word) + 1
        assert len(q.atoms) == expect
        qp = sequence_query(ci_disc, word, terminal=False)
        assert len(qp.atoms) == expect - 1
        # the terminal atom is the only difference
        assert q.atoms[:-1] == qp.atoms


def test_sequence_query_shell_kinds(ci_disc):
    q_sub = sequence_query(ci_disc, (1,), satcheck.SUBLEVEL)
    q_unit = sequence_query(ci_disc, (1,), satcheck.UNIT_LEVEL)
    assert q_sub.atoms[0].rel == "<=" and q_unit.atoms[0].rel == "="
    assert q_sub.atoms[0].F == ci_disc.P_rat
    with pytest.raises(ValueError):
        sequence_query(ci_disc, (1,), shell="banana")
    with pytest.raises(ValueError):
        sequence_query(ci_disc, ())
    with pytest.raises(ValueError):
        sequence_query(ci_disc, (0,))
    with pytest.raises(ValueError):
        sequence_query(ci_disc, (ci_disc.k_bar + 1,))


def test_smtlib_encoding_deterministic(ci_disc):
    q = sequence_query(ci_disc, (2, 1))
    s1, s2 = to_smtlib(q), to_smtlib(q)
    assert s1 == s2
    assert s1.startswith("(set-logic QF_NRA)")
    assert s1.count("declare-const") == ci_disc.n_x
    assert s1.count("(assert ") == len(q.atoms)
    assert "(check-sat)" in s1 and "(get-model)" in s1


def test_parse_model_variants():
    text = """sat
    (model
      (define-fun x0 () Real (/ 1 3))
      (define-fun x1 () Real (- (/ 2 5))))"""
    assert parse_model(text, 2) == (F(1, 3), F(-2, 5))
    # solvers that omit the `model` keyword
    text2 = "sat\n((define-fun x0 () Real 2.5))"
    assert parse_model(text2, 1) == (F(5, 2),)
    assert parse_model("sat\n(model)", 1) is None


def test_check_sat_produces_exact_witness(tiny_disc):
    res = contraction_counterexample(tiny_disc, 1, F(1, 5))
    assert res.status == "sat"
    assert tiny_disc.V(res.witness) == 1
    m_half = tiny_disc.M[1]
    v_next = ratlin.quad_form(
        ratlin.congruence(tiny_disc.P_rat, m_half), res.witness)
    assert v_next > F(1, 5)


def test_check_unsat_at_true_ratio(tiny_disc):
    # V(M x) / V(x) = 1/4 exactly, so 1/4 and above admit no counterexample
    assert contraction_counterexample(tiny_disc, 1, F(1, 4)).status == "unsat"
    assert contraction_counterexample(tiny_disc, 1, F(1, 3)).status == "unsat"


def test_contraction_query_validation(tiny_disc):
    with pytest.raises(ValueError):
        satcheck.contraction_query(tiny_disc, 1, F(2))
    with pytest.raises(ValueError):
        satcheck.contraction_query(tiny_disc, 5, F(1, 2))


def test_solver_transport_error(tiny_disc):
    q = satcheck.contraction_query(tiny_disc, 1, F(1, 2))
    with pytest.raises(SolverTransportError):
        check(q, solver_cmd=["/nonexistent/solver-binary"])


def test_solver_garbage_output(tiny_disc):
    q = satcheck.contraction_query(tiny_disc, 1, F(1, 2))
    with pytest.raises(SolverTransportError):
        check(q, solver_cmd=["true"])  # exits silently, no verdict


def test_solver_unknown_passthrough(tiny_disc):
    q = satcheck.contraction_query(tiny_disc, 1, F(1, 2))
    res = check(q, solver_cmd=["echo", "unknown"])
    assert res.status == "unknown"


def test_budget_validation(tiny_disc):
    q = satcheck.contraction_query(tiny_disc, 1, F(1, 2))
    with pytest.raises(ValueError):
        check(q, budget=0)


def test_replay_completeness(ci_disc):
    # words realized by concrete states must be declared feasible
    xs = verify.sample_shell_states(ci_disc, 25, seed=99)
    words = {semantics.concrete_sequence(ci_disc, x, max_len=100)
             for x in xs}
    words.discard(())
    for w in sorted(words):
        res = check(sequence_query(ci_disc, w))
        assert res.status == "sat", w
        assert semantics.concrete_sequence(ci_disc, res.witness,
                                           max_len=100) == w


def test_prefix_query_monotone(ci_disc):
    # a word with an unsat prefix query can have no feasible extension;
    # spot-check the contrapositive on realized words: all their prefixes
    # have sat prefix queries
    x = verify.sample_shell_states(ci_disc, 1, seed=5)[0]
    w = semantics.concrete_sequence(ci_disc, x, max_len=100)
    for i in range(1, len(w) + 1):
        res = check(sequence_query(ci_disc, w[:i], terminal=False))
        assert res.status == "sat", w[:i]
