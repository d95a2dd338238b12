"""Unit and differential tests for the bundled quadratic-form decision
procedure, including its SMT-LIB2 front end."""

from __future__ import annotations

import io
import math
import random
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from petctraffic.qfnra import (decide, format_rational, roots_equal,
                               roots_of_quadratic, run_script,
                               simplest_between, t_verdict, verify_witness)

F = Fraction


def form(a, b, c):
    return ((F(a), F(b)), (F(b), F(c)))


IDENT = form(1, 0, 1)


def run(text: str) -> str:
    out = io.StringIO()
    run_script(text, out)
    return out.getvalue()


# ---------------------------------------------------------------------------
# root isolation


def test_roots_rational_and_irrational():
    rs = roots_of_quadratic(1, -3, 2)  # (x-1)(x-2)
    assert [r.value for r in rs] == [F(1), F(2)]
    rs = roots_of_quadratic(1, 0, -2)  # +-sqrt(2)
    assert all(r.value is None for r in rs)
    lo, hi = rs[1].enclosure(30)
    assert lo < hi and abs(float(lo) - math.sqrt(2)) < 1e-8
    assert roots_of_quadratic(1, 0, 1) == []
    assert roots_of_quadratic(0, 2, -3)[0].value == F(3, 2)


def test_roots_equal_across_fields():
    a = roots_of_quadratic(1, 0, -2)[1]     # sqrt(2)
    b = roots_of_quadratic(2, 0, -4)[1]     # sqrt(2) again, scaled poly
    c = roots_of_quadratic(1, 0, -8)[1]     # 2 sqrt(2): same field
    d = roots_of_quadratic(1, 0, -3)[1]     # sqrt(3): different field
    assert roots_equal(a, b)
    assert not roots_equal(a, c)
    assert not roots_equal(a, d)


@given(st.fractions(min_value=-50, max_value=50),
       st.fractions(min_value=-50, max_value=50))
@settings(max_examples=100, deadline=None)
def test_simplest_between(a, b):
    if a == b:
        return
    lo, hi = min(a, b), max(a, b)
    x = simplest_between(lo, hi)
    assert lo < x < hi
    # the mediant witnesses this denominator bound
    assert x.denominator <= lo.denominator + hi.denominator


# ---------------------------------------------------------------------------
# interval verdicts


def test_t_verdict_basic():
    one = F(1)
    assert t_verdict([(one, "<=", F(4)), (one, ">", F(1))])[0] == "open"
    assert t_verdict([(one, "<=", F(1)), (one, ">", F(2))])[0] == "infeas"
    kind, t = t_verdict([(one, "=", F(3))])
    assert kind == "point" and t == 3
    # negative coefficient flips the relation
    kind, data = t_verdict([(F(-2), "<", F(-4))])  # -2t < -4  =>  t > 2
    assert kind == "open" and data[0] == 2 and data[1] is True


# ---------------------------------------------------------------------------
# decide(): knowns


def test_contradictory_sublevels_unsat():
    res = decide(2, [(IDENT, "<=", F(1)), (IDENT, ">", F(2))])
    assert res.status == "unsat"


def test_unit_circle_sat_with_exact_witness():
    atoms = [(IDENT, "=", F(1))]
    res = decide(2, atoms)
    assert res.status == "sat"
    assert verify_witness(atoms, res.witness)


def test_contraction_toy_threshold():
    # x'x = 1 and (x/2)'(x/2) > a: feasible exactly when a < 1/4
    quarter = ((F(1, 4), F(0)), (F(0), F(1, 4)))
    for a, want in ((F(1, 5), "sat"), (F(1, 4), "unsat"), (F(1, 3), "unsat")):
        res = decide(2, [(IDENT, "=", F(1)), (quarter, ">", a)])
        assert res.status == want, a


def test_zero_vector_shortcut():
    res = decide(3, [(tuple(tuple(F(0) for _ in range(3)) for _ in range(3)),
                      "<=", F(0))])
    assert res.status == "sat" and res.witness == (F(0),) * 3


def test_one_variable():
    sq = ((F(1),),)
    assert decide(1, [(sq, ">", F(4)), (sq, "<", F(9))]).status == "sat"
    assert decide(1, [(sq, ">", F(4)), (sq, "<", F(4))]).status == "unsat"
    res = decide(1, [(sq, "=", F(4))])
    assert res.status == "sat" and res.witness in ((F(2),), (F(-2),))
    # x^2 = 2 has no rational solution: feasible over the reals, unknown here
    assert decide(1, [(sq, "=", F(2))]).status == "unknown"


def test_three_variables_unknown():
    f3 = tuple(tuple(F(i == j) for j in range(3)) for i in range(3))
    assert decide(3, [(f3, "=", F(1))]).status == "unknown"


def test_irrational_only_equality_unknown_in_2d():
    # x0^2 + x1^2 = 3 touches no rational point (3 is not a sum of two
    # rational squares), but is real-feasible: must come back unknown
    res = decide(2, [(IDENT, "=", F(3))])
    assert res.status == "unknown"


def test_tangency_point_sat():
    # circle x'x = 1 and half-plane-like cone x0^2 >= 1 meet at (+-1, 0)
    only0 = form(1, 0, 0)
    atoms = [(IDENT, "=", F(1)), (only0, ">=", F(1))]
    res = decide(2, atoms)
    assert res.status == "sat"
    assert verify_witness(atoms, res.witness)


# ---------------------------------------------------------------------------
# decide(): randomized differential test against dense float sampling


def _random_atoms(rng, n_atoms, rels):
    atoms = []
    for _ in range(n_atoms):
        a = F(rng.randint(-8, 8), rng.randint(1, 4))
        b = F(rng.randint(-8, 8), rng.randint(1, 4))
        c = F(rng.randint(-8, 8), rng.randint(1, 4))
        rhs = F(rng.randint(-4, 4), rng.randint(1, 3))
        atoms.append((((a, b), (b, c)), rng.choice(rels), rhs))
    return atoms


def _sampler_feasible(atoms, rng, trials, margin_scale, strict_only):
    for _ in range(trials):
        x0 = math.tan(math.pi * (rng.random() - 0.5))
        x1 = math.tan(math.pi * (rng.random() - 0.5))
        ok = True
        for f, rel, cc in atoms:
            v = (float(f[0][0]) * x0 * x0 + 2 * float(f[0][1]) * x0 * x1
                 + float(f[1][1]) * x1 * x1)
            c = float(cc)
            margin = margin_scale * (abs(v) + abs(c) + 1)
            if rel in ("<=", "<"):
                ok = v < c - margin
            elif rel in (">=", ">"):
                ok = v > c + margin
            else:
                ok = False if strict_only else abs(v - c) <= margin
            if not ok:
                break
        if ok:
            return True
    return False


def test_differential_vs_sampler():
    rng = random.Random(20240824)
    for _ in range(250):
        atoms = _random_atoms(rng, rng.randint(1, 5),
                              ["<=", "<", ">=", ">", "="])
        res = decide(2, atoms)
        if res.status == "sat":
            assert verify_witness(atoms, res.witness)
        elif res.status == "unsat":
            assert not _sampler_feasible(atoms, rng, 4000, 1e-9, True)


def test_inequality_only_never_unknown():
    # without equalities, any real-feasible instance has interior rational
    # points, so the procedure must fully decide
    rng = random.Random(77)
    for _ in range(150):
        atoms = _random_atoms(rng, rng.randint(1, 4), ["<=", "<", ">=", ">"])
        res = decide(2, atoms)
        assert res.status in ("sat", "unsat")
        if _sampler_feasible(atoms, rng, 2000, 1e-6, True):
            assert res.status == "sat"


# ---------------------------------------------------------------------------
# SMT-LIB2 front end


SCRIPT_SAT = """
(set-logic QF_NRA)
(declare-const x0 Real)
(declare-const x1 Real)
(assert (= (+ (* x0 x0) (* x1 x1)) 1))
(check-sat)
(get-model)
"""


def test_run_script_sat_model():
    out = run(SCRIPT_SAT)
    assert out.splitlines()[0] == "sat"
    assert "define-fun x0" in out and "define-fun x1" in out


def test_run_script_unsat():
    out = run("""(set-logic QF_NRA)
    (declare-const x Real)
    (assert (> (* x x) 4))
    (assert (< (* x x) 1))
    (check-sat)""")
    assert out.strip() == "unsat"


def test_run_script_reason_unknown():
    out = run("""(set-logic QF_NRA)
    (declare-const x Real)(declare-const y Real)
    (assert (= (+ (* x x) (* y y)) 3))
    (check-sat)(get-info :reason-unknown)""")
    lines = out.splitlines()
    assert lines[0] == "unknown"
    assert ":reason-unknown" in lines[1]


def test_run_script_rational_constants_and_minus():
    out = run("""(set-logic QF_NRA)
    (declare-const x Real)
    (assert (<= (* x x) (/ 1 4)))
    (assert (>= (* x x) (- (/ 1 100))))
    (check-sat)(get-model)""")
    assert out.splitlines()[0] == "sat"


def test_run_script_unsupported_is_unknown():
    out = run("""(set-logic QF_NRA)
    (declare-const x Real)
    (assert (> (* x x x) 1))
    (check-sat)""")
    assert out.strip() == "unknown"


def test_format_rational():
    assert format_rational(F(3)) == "3"
    assert format_rational(F(-3)) == "(- 3)"
    assert format_rational(F(1, 4)) == "(/ 1 4)"
    assert format_rational(F(-5, 7)) == "(- (/ 5 7))"


def test_cli_subprocess_roundtrip(tmp_path):
    p = tmp_path / "q.smt2"
    p.write_text(SCRIPT_SAT)
    proc = subprocess.run([sys.executable, "-m", "petctraffic.qfnra", str(p)],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "sat"
