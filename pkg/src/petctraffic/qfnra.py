"""Exact satisfiability of conjunctions of quadratic-form constraints.

A self-contained SMT-LIB2 command interpreter for the fragment this
package emits: `(set-logic QF_NRA)`, Real constants declared with
`declare-const`, and asserted atoms of the form  p(x) rel q(x)  where
p - q is a quadratic form plus a rational constant.  Run it as

    python -m petctraffic.qfnra [script.smt2]

It reads the script (stdin by default), answers `sat`/`unsat`/`unknown`
to `(check-sat)` and prints a rational model on `(get-model)`.

For one and two variables the procedure is complete: writing a candidate
as x = s*(1, m), every atom becomes  t*q_j(m) rel c_j  with t = s^2 and
q_j quadratic in the direction coordinate m, so the per-direction verdict
is a one-dimensional interval intersection whose outcome can only change
where some q_j or some cross-comparison polynomial changes sign.  All
real roots of those polynomials are isolated exactly, one rational sample
is checked inside every sign-invariant region, and the (possibly
irrational) critical directions themselves are checked in exact
quadratic-surd arithmetic.  `sat` is only reported together with a
rational witness re-verified against every atom; a feasible set that is
not shown to contain a rational point yields `unknown`.

The module depends on nothing outside the standard library so that
spawning it as a subprocess stays cheap.
"""

from __future__ import annotations

import math
import sys
from fractions import Fraction
from math import gcd

FLIP = {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "=": "="}


class Unsupported(Exception):
    """Input outside the decidable fragment handled here."""


# ---------------------------------------------------------------------------
# SMT-LIB2 reading


def tokenize(text):
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "()":
            out.append(ch)
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            out.append(text[i:j + 1])
            i = j + 1
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            out.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in '() ;\t\r\n"':
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(tokens):
    stack = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            if not stack:
                raise Unsupported("unbalanced parentheses")
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise Unsupported("unbalanced parentheses")
    return stack[0]


def _atom_to_number(tok):
    if isinstance(tok, list):
        return None
    try:
        if "." in tok:
            return Fraction(tok)
        return Fraction(int(tok))
    except ValueError:
        return None


# polynomials: dict mapping a sorted tuple of variable indices to Fraction


def poly_const(c):
    return {(): Fraction(c)} if c else {}


def poly_add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + v
        if out[k] == 0:
            del out[k]
    return out


def poly_neg(a):
    return {k: -v for k, v in a.items()}


def poly_mul(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(sorted(ka + kb))
            out[k] = out.get(k, Fraction(0)) + va * vb
    return {k: v for k, v in out.items() if v != 0}


def eval_term(expr, var_index):
    if not isinstance(expr, list):
        c = _atom_to_number(expr)
        if c is not None:
            return poly_const(c)
        if expr in var_index:
            return {(var_index[expr],): Fraction(1)}
        raise Unsupported(f"unknown symbol {expr!r}")
    if not expr:
        raise Unsupported("empty term")
    op, args = expr[0], expr[1:]
    if op == "+":
        out = {}
        for a in args:
            out = poly_add(out, eval_term(a, var_index))
        return out
    if op == "-":
        if len(args) == 1:
            return poly_neg(eval_term(args[0], var_index))
        out = eval_term(args[0], var_index)
        for a in args[1:]:
            out = poly_add(out, poly_neg(eval_term(a, var_index)))
        return out
    if op == "*":
        out = poly_const(1)
        for a in args:
            out = poly_mul(out, eval_term(a, var_index))
        return out
    if op == "/":
        if len(args) != 2:
            raise Unsupported("n-ary division")
        num = eval_term(args[0], var_index)
        den = eval_term(args[1], var_index)
        if set(den) - {()}:
            raise Unsupported("division by non-constant")
        d = den.get((), Fraction(0))
        if d == 0:
            raise Unsupported("division by zero")
        return {k: v / d for k, v in num.items()}
    raise Unsupported(f"operator {op!r}")


def parse_atom(expr, var_index):
    """Turn an asserted (rel lhs rhs) into (F, rel, c) meaning x'Fx rel c."""
    if not (isinstance(expr, list) and len(expr) == 3 and expr[0] in FLIP):
        raise Unsupported("assertion is not a binary relation")
    rel = expr[0]
    poly = poly_add(eval_term(expr[1], var_index),
                    poly_neg(eval_term(expr[2], var_index)))
    n = len(var_index)
    f = [[Fraction(0)] * n for _ in range(n)]
    const = Fraction(0)
    for mono, coef in poly.items():
        if len(mono) == 0:
            const = coef
        elif len(mono) == 2:
            i, j = mono
            if i == j:
                f[i][i] += coef
            else:
                half = coef / 2
                f[i][j] += half
                f[j][i] += half
        else:
            raise Unsupported("polynomial is not a quadratic form plus constant")
    return tuple(tuple(row) for row in f), rel, -const


# ---------------------------------------------------------------------------
# exact arithmetic in Q(sqrt(d))


class Surd:
    """a + b*sqrt(d) with rational a, b and a fixed positive non-square d."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    def __add__(self, other):
        if isinstance(other, Surd):
            return Surd(self.a + other.a, self.b + other.b, self.d)
        return Surd(self.a + other, self.b, self.d)

    def __sub__(self, other):
        if isinstance(other, Surd):
            return Surd(self.a - other.a, self.b - other.b, self.d)
        return Surd(self.a - other, self.b, self.d)

    def __mul__(self, other):
        if isinstance(other, Surd):
            return Surd(self.a * other.a + self.b * other.b * self.d,
                        self.a * other.b + self.b * other.a, self.d)
        return Surd(self.a * other, self.b * other, self.d)

    def inverse(self):
        den = self.a * self.a - self.b * self.b * self.d
        if den == 0:
            raise ZeroDivisionError("zero element of Q(sqrt(d))")
        return Surd(self.a / den, -self.b / den, self.d)

    def sign(self):
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        t = self.a * self.a - self.b * self.b * self.d
        if t == 0:
            return 0
        return sa if t > 0 else sb

    def is_rational(self):
        return self.b == 0


def _lift(x, d):
    return x if isinstance(x, Surd) else Surd(x, 0, d)


def _sgn(v):
    return (v > 0) - (v < 0)


def _sign_pair(p, q, d):
    """sign of p + q*sqrt(d) with integer p, q and non-square d > 0."""
    if q == 0:
        return _sgn(p)
    if p == 0:
        return _sgn(q)
    sp, sq = _sgn(p), _sgn(q)
    if sp == sq:
        return sp
    t = p * p - q * q * d
    if t == 0:
        return 0
    return sp if t > 0 else sq


class IntSurd:
    """(p + q*sqrt(D)) / den with integer entries and den != 0.

    Deliberately unnormalized: no gcd is ever taken, so arithmetic on
    the big integers produced by deep constraint systems stays cheap.
    """

    __slots__ = ("p", "q", "den", "D")

    def __init__(self, p, q, den, D):
        self.p = p
        self.q = q
        self.den = den
        self.D = D

    def sign(self):
        return _sign_pair(self.p, self.q, self.D) * _sgn(self.den)

    def to_fraction(self):
        if self.q:
            raise ValueError("irrational value")
        return Fraction(self.p, self.den)


def _to_intsurd(x, d):
    if isinstance(x, IntSurd):
        return x
    x = Fraction(x)
    return IntSurd(x.numerator, 0, x.denominator, d)


def val_sign(x):
    if isinstance(x, (Surd, IntSurd)):
        return x.sign()
    return (x > 0) - (x < 0)


def val_sub_sign(x, y):
    """sign(x - y) for Fraction/Surd/IntSurd operands."""
    if isinstance(x, IntSurd) or isinstance(y, IntSurd):
        d = x.D if isinstance(x, IntSurd) else y.D
        x, y = _to_intsurd(x, d), _to_intsurd(y, d)
        p = x.p * y.den - y.p * x.den
        q = x.q * y.den - y.q * x.den
        return _sign_pair(p, q, d) * _sgn(x.den * y.den)
    if isinstance(x, Surd) or isinstance(y, Surd):
        d = x.d if isinstance(x, Surd) else y.d
        return (_lift(x, d) - _lift(y, d)).sign()
    return (x > y) - (x < y)


def val_div(c, q):
    if isinstance(q, IntSurd):
        c = Fraction(c)
        norm = q.p * q.p - q.q * q.q * q.D
        num = c.numerator * q.den
        return IntSurd(num * q.p, -num * q.q, c.denominator * norm, q.D)
    if isinstance(q, Surd):
        return _lift(c, q.d) * q.inverse()
    return Fraction(c) / q


# ---------------------------------------------------------------------------
# roots of integer quadratics, with exact isolation


class Root:
    """A real root of an integer polynomial of degree <= 2.

    Either rational (value set) or the surd (-b + eps*sqrt(disc)) / (2a)
    with a > 0 and non-square disc.
    """

    __slots__ = ("value", "a", "b", "disc", "eps", "_approx")

    def __init__(self, value=None, a=None, b=None, disc=None, eps=None):
        self.value = value
        self.a = a
        self.b = b
        self.disc = disc
        self.eps = eps
        self._approx = None

    @property
    def is_rational(self):
        return self.value is not None

    def surd(self):
        return Surd(Fraction(-self.b, 2 * self.a),
                    Fraction(self.eps, 2 * self.a), self.disc)

    def enclosure(self, prec):
        if self.is_rational:
            return self.value, self.value
        s = math.isqrt(self.disc << (2 * prec))
        lo_s = Fraction(s, 1 << prec)
        hi_s = Fraction(s + 1, 1 << prec)
        if self.eps > 0:
            return (-self.b + lo_s) / (2 * self.a), (-self.b + hi_s) / (2 * self.a)
        return (-self.b - hi_s) / (2 * self.a), (-self.b - lo_s) / (2 * self.a)

    def approx(self):
        if self._approx is None:
            lo, _ = self.enclosure(40)
            self._approx = _to_float(lo)
        return self._approx


def _to_float(fr):
    try:
        return float(fr)
    except OverflowError:
        return math.inf if fr > 0 else -math.inf


def roots_of_quadratic(a, b, c):
    if a == 0:
        if b == 0:
            return []
        return [Root(value=Fraction(-c, b))]
    if a < 0:
        a, b, c = -a, -b, -c
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    if disc == 0:
        return [Root(value=Fraction(-b, 2 * a))]
    s = math.isqrt(disc)
    if s * s == disc:
        return [Root(value=Fraction(-b - s, 2 * a)),
                Root(value=Fraction(-b + s, 2 * a))]
    return [Root(a=a, b=b, disc=disc, eps=-1),
            Root(a=a, b=b, disc=disc, eps=+1)]


def roots_equal(r1, r2):
    if r1.is_rational and r2.is_rational:
        return r1.value == r2.value
    if r1.is_rational or r2.is_rational:
        return False  # roots with non-square discriminant are irrational
    # (-b1 + e1 sqrt(D1)) / (2 a1) == (-b2 + e2 sqrt(D2)) / (2 a2)
    u = -r1.b * 2 * r2.a + r2.b * 2 * r1.a
    v = r1.eps * 2 * r2.a
    w = r2.eps * 2 * r1.a
    prod = r1.disc * r2.disc
    g = math.isqrt(prod)
    if g * g != prod:
        return False  # surds from different quadratic fields
    # sqrt(D2) = (g / D1) sqrt(D1); u + v sqrt(D1) == w (g / D1) sqrt(D1)
    return u == 0 and v * r1.disc == w * g


# ---------------------------------------------------------------------------
# the scale (t = s^2) interval verdict at a fixed direction

INFEAS = "infeas"
OPEN = "open"
POINT = "point"


def _const_holds(rel, c):
    zero = Fraction(0)
    return {"<=": zero <= c, "<": zero < c, ">=": zero >= c,
            ">": zero > c, "=": zero == c}[rel]


def t_verdict(items):
    """Feasibility in t > 0 of constraints t*q rel c; q, c exact values.

    Returns (INFEAS, None), (OPEN, (lo, lo_strict, hi, hi_strict)) with
    hi possibly None for +infinity, or (POINT, t).
    """
    lo, lo_strict = Fraction(0), True
    hi, hi_strict = None, True
    pin = None
    for q, rel, c in items:
        s = val_sign(q)
        if s == 0:
            if not _const_holds(rel, c):
                return INFEAS, None
            continue
        bound = val_div(c, q)
        r = rel if s > 0 else FLIP[rel]
        if r == "=":
            if pin is None:
                pin = bound
            elif val_sub_sign(pin, bound) != 0:
                return INFEAS, None
        elif r in ("<=", "<"):
            strict = r == "<"
            if hi is None:
                hi, hi_strict = bound, strict
            else:
                cmp = val_sub_sign(bound, hi)
                if cmp < 0:
                    hi, hi_strict = bound, strict
                elif cmp == 0:
                    hi_strict = hi_strict or strict
        else:
            strict = r == ">"
            cmp = val_sub_sign(bound, lo)
            if cmp > 0:
                lo, lo_strict = bound, strict
            elif cmp == 0:
                lo_strict = lo_strict or strict
    if pin is not None:
        if val_sign(pin) <= 0:
            return INFEAS, None
        c_lo = val_sub_sign(pin, lo)
        if c_lo < 0 or (c_lo == 0 and lo_strict):
            return INFEAS, None
        if hi is not None:
            c_hi = val_sub_sign(hi, pin)
            if c_hi < 0 or (c_hi == 0 and hi_strict):
                return INFEAS, None
        return POINT, pin
    if hi is None:
        return OPEN, (lo, lo_strict, None, True)
    cmp = val_sub_sign(hi, lo)
    if cmp > 0:
        return OPEN, (lo, lo_strict, hi, hi_strict)
    if cmp == 0 and not lo_strict and not hi_strict and val_sign(lo) > 0:
        return POINT, lo
    return INFEAS, None


def rational_sqrt_in(lo, lo_strict, hi, hi_strict):
    """A rational s > 0 with s^2 inside the given t-interval."""
    if hi is None:
        target = lo + 1
        s = Fraction(math.isqrt(target.numerator // target.denominator + 2) + 2)
        while not s * s > lo:
            s *= 2
        return s
    p, q = Fraction(0), hi + 1
    for _ in range(4000):
        mid = (p + q) / 2
        m2 = mid * mid
        lo_ok = m2 > lo or (m2 == lo and not lo_strict)
        hi_ok = m2 < hi or (m2 == hi and not hi_strict)
        if lo_ok and hi_ok:
            return mid
        if not lo_ok:
            p = mid
        else:
            q = mid
    raise ArithmeticError("no rational scale found in interval")


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The smallest-denominator rational strictly inside (lo, hi)."""
    if not lo < hi:
        raise ValueError("empty interval")
    fl = lo.numerator // lo.denominator
    if fl + 1 < hi:
        return Fraction(fl + 1)
    a, b = lo - fl, hi - fl  # a in [0,1), b in (0,1]
    if a == 0:
        m = b.denominator // b.numerator + 1
        return fl + Fraction(1, m)
    return fl + 1 / simplest_between(1 / b, 1 / a)


def rational_square_root(t):
    """sqrt(t) if t is the square of a rational, else None."""
    if t is None or t < 0:
        return None
    num, den = t.numerator, t.denominator
    sn, sd = math.isqrt(num), math.isqrt(den)
    if sn * sn == num and sd * sd == den:
        return Fraction(sn, sd)
    return None


# ---------------------------------------------------------------------------
# witness verification and construction


def verify_witness(atoms, x):
    n = len(x)
    for f, rel, c in atoms:
        v = sum(x[i] * sum(f[i][j] * x[j] for j in range(n)) for i in range(n))
        ok = {"<=": v <= c, "<": v < c, ">=": v >= c, ">": v > c,
              "=": v == c}[rel]
        if not ok:
            return False
    return True


def _quad_at(f, x0, x1):
    return (f[0][0] * x0 * x0 + (f[0][1] + f[1][0]) * x0 * x1
            + f[1][1] * x1 * x1)


def _conic_base_point(f, c):
    """Some rational point with x'Fx = c, or None."""
    for p, q in ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (3, 1),
                 (1, 3), (2, 3), (3, 2), (1, -2), (2, -1), (1, -3), (3, -1),
                 (5, 2), (2, 5), (4, 1), (1, 4)):
        denom = _quad_at(f, Fraction(p), Fraction(q))
        if denom == 0:
            continue
        t = c / denom
        s = rational_square_root(t) if t > 0 else None
        if s is not None:
            return (s * p, s * q)
    for den in range(1, 9):
        for pn in range(-4 * den, 4 * den + 1):
            for qn in range(-4 * den, 4 * den + 1):
                if pn == 0 and qn == 0:
                    continue
                x = (Fraction(pn, den), Fraction(qn, den))
                if _quad_at(f, *x) == c:
                    return x
    return None


def _conic_witness(eq_atom, atoms, m_target, region):
    """Rational point on the conic x'Fx = c whose direction lies in region.

    Directions are x1/x0; region is a pair of rational bounds (either may
    be None for unbounded).  The chord through a rational base point with
    rational slope u meets the conic in a second rational point, and u is
    tuned in floating point so that the direction lands near m_target
    (which is known to lie strictly inside the region); the result is
    then verified exactly.
    """
    f, _, c = eq_atom
    base = _conic_base_point(f, c)
    if base is None:
        return None
    lo, hi = region

    def in_region(m):
        if m is None:
            return False
        if lo is not None and not m > lo:
            return False
        if hi is not None and not m < hi:
            return False
        return True

    if in_region(base[1] / base[0] if base[0] != 0 else None) \
            and verify_witness(atoms, base):
        return base

    def chord(u):
        vfv = _quad_at(f, Fraction(1), u)
        if vfv == 0:
            return None
        vfb = (f[0][0] * base[0] + f[0][1] * base[1]
               + u * (f[1][0] * base[0] + f[1][1] * base[1]))
        lam = -2 * vfb / vfv
        return (base[0] + lam, base[1] + lam * u)

    bf = [[_to_float(e) for e in row] for row in f]
    b0, b1 = _to_float(base[0]), _to_float(base[1])
    mt = _to_float(m_target)

    def chord_dir_float(u):
        vfv = bf[0][0] + (bf[0][1] + bf[1][0]) * u + bf[1][1] * u * u
        if vfv == 0:
            return None
        vfb = (bf[0][0] * b0 + bf[0][1] * b1 + u * (bf[1][0] * b0 + bf[1][1] * b1))
        lam = -2 * vfb / vfv
        x0, x1 = b0 + lam, b1 + lam * u
        if x0 == 0:
            return None
        return x1 / x0

    # locate a float slope whose chord direction crosses m_target
    us = [math.tan(math.pi * (i / 4000.0 - 0.5)) for i in range(1, 4000)]
    best_u = None
    prev = None
    crossings = []
    for u in us:
        m = chord_dir_float(u)
        if m is None or not math.isfinite(m):
            prev = None
            continue
        g = m - mt
        if prev is not None and g == 0.0:
            crossings.append((u, u))
        elif prev is not None and (g > 0) != (prev[1] > 0):
            crossings.append((prev[0], u))
        prev = (u, g)
    for ulo, uhi in crossings:
        for _ in range(80):
            um = 0.5 * (ulo + uhi)
            gm = chord_dir_float(um)
            if gm is None:
                break
            if (gm - mt > 0) == ((chord_dir_float(ulo) or mt) - mt > 0):
                ulo = um
            else:
                uhi = um
        best_u = 0.5 * (ulo + uhi)
        for prec in (1 << 20, 1 << 30, 1 << 44):
            u = Fraction(round(best_u * prec), prec)
            x = chord(u)
            if x is None or x[0] == 0:
                continue
            if in_region(x[1] / x[0]) and verify_witness(atoms, x):
                return x
    return None


def _value_to_exact_fraction(v):
    """Fraction value of a Fraction/Surd/IntSurd, or None if irrational."""
    if isinstance(v, IntSurd):
        return Fraction(v.p, v.den) if v.q == 0 else None
    if isinstance(v, Surd):
        return v.a if v.is_rational() else None
    return Fraction(v)


def _witness_at_direction(direction, verdict, data, atoms, region, eq_atoms):
    """Exact rational witness at a rational direction, or None.

    direction: Fraction m for the ray s*(1, m), or "inf" for s*(0, 1).
    region: rational bounds of the containing sign-invariant direction
    region; used by the conic search when the scale is pinned to a
    rational that is not a perfect square.
    """
    def embed(s):
        if direction == "inf":
            return (Fraction(0), s)
        return (s, s * direction)

    if verdict == OPEN:
        lo, lo_strict, hi, hi_strict = data
        lo = _value_to_exact_fraction(lo)
        hi = _value_to_exact_fraction(hi) if hi is not None else None
        if lo is None or (hi is None and data[2] is not None):
            return None
        s = rational_sqrt_in(lo, lo_strict, hi, hi_strict)
        x = embed(s)
        return x if verify_witness(atoms, x) else None
    t = _value_to_exact_fraction(data)
    if t is None:
        return None
    s = rational_square_root(t)
    if s is not None:
        x = embed(s)
        if verify_witness(atoms, x):
            return x
    if eq_atoms and direction != "inf":
        return _conic_witness(eq_atoms[0], atoms, direction, region)
    return None


# ---------------------------------------------------------------------------
# the decision procedure


class Decided:
    def __init__(self, status, witness=None, reason=""):
        self.status = status
        self.witness = witness
        self.reason = reason


def _primitive(coeffs):
    """Scale rational coefficients to coprime integers, positive leader."""
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g:
        ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return tuple(ints)


def decide(n, atoms, max_prec=1 << 16):
    """Decide a conjunction of n-variable quadratic-form atoms."""
    if n == 0:
        ok = all(_const_holds(rel, c) for _, rel, c in atoms)
        return Decided("sat" if ok else "unsat", witness=())
    zero = tuple(Fraction(0) for _ in range(n))
    if all(_const_holds(rel, c) for _, rel, c in atoms):
        return Decided("sat", witness=zero)
    if n == 1:
        verdict, data = t_verdict([(f[0][0], rel, c) for f, rel, c in atoms])
        if verdict == INFEAS:
            return Decided("unsat")
        if verdict == OPEN:
            s = rational_sqrt_in(*data)
            if verify_witness(atoms, (s,)):
                return Decided("sat", witness=(s,))
        else:
            s = rational_square_root(_value_to_exact_fraction(data))
            if s is not None and verify_witness(atoms, (s,)):
                return Decided("sat", witness=(s,))
        return Decided("unknown", reason="feasible set has no rational point")
    if n != 2:
        return Decided("unknown", reason=f"{n} variables not supported")
    return _decide_2d(atoms, max_prec)


def _decide_2d(atoms, max_prec):
    eq_atoms = [a for a in atoms if a[1] == "="]

    # integer coefficient triples for q_j(m) = (A2 m^2 + A1 m + A0) / S
    evals = []
    qpolys = []
    for f, rel, c in atoms:
        co = (f[1][1], f[0][1] + f[1][0], f[0][0])
        qpolys.append(co)
        den = 1
        for v in co:
            den = den * v.denominator // gcd(den, v.denominator)
        evals.append((int(co[0] * den), int(co[1] * den), int(co[2] * den),
                      den, rel, c))

    def items_at(pnum, pden):
        out = []
        p2, pq, q2 = pnum * pnum, pnum * pden, pden * pden
        for a2, a1, a0, s, rel, c in evals:
            out.append((IntSurd(a2 * p2 + a1 * pq + a0 * q2, 0, s * q2, 1),
                        rel, c))
        return out

    def items_at_root(r):
        # q(m) at m = (-b + eps*sqrt(D)) / (2a), as elements of Z[sqrt(D)]
        b, d, a, e = r.b, r.disc, r.a, r.eps
        bb = b * b + d
        foura2 = 4 * a * a
        out = []
        for a2, a1, a0, s, rel, c in evals:
            u = a2 * bb - 2 * a * b * a1 + foura2 * a0
            v = e * (2 * a * a1 - 2 * b * a2)
            out.append((IntSurd(u, v, foura2 * s, d), rel, c))
        return out

    # critical polynomials: the q_j and, for atoms with nonzero right-hand
    # side, the cross-comparison polynomials that reorder the t-bounds
    crit = set()
    for co in qpolys:
        prim = _primitive(list(co))
        if any(prim):
            crit.add(prim)
    nz = [(qpolys[i], atoms[i][2]) for i in range(len(atoms))
          if atoms[i][2] != 0]
    for i in range(len(nz)):
        qi, ci = nz[i]
        for j in range(i + 1, len(nz)):
            qj, cj = nz[j]
            prim = _primitive([cj * qi[k] - ci * qj[k] for k in range(3)])
            if any(prim):
                crit.add(prim)

    roots = []
    for a, b, c in sorted(crit):
        roots.extend(roots_of_quadratic(a, b, c))

    # deduplicate equal roots (only float-close pairs can be equal)
    roots.sort(key=lambda r: r.approx())
    unique = []
    for r in roots:
        dup = False
        for u in reversed(unique):
            if r.approx() - u.approx() > 1e-6:
                break
            if roots_equal(u, r):
                dup = True
                break
        if not dup:
            unique.append(r)

    # refine enclosures until consecutive roots are strictly separated
    prec = 64
    encl = [r.enclosure(prec) for r in unique]
    while True:
        bad = [i for i in range(len(unique) - 1)
               if not encl[i][1] < encl[i + 1][0]]
        if not bad:
            break
        prec *= 2
        if prec > max_prec:
            return Decided("unknown",
                           reason="root separation exceeded precision cap")
        for i in set(bad) | {i + 1 for i in bad}:
            encl[i] = unique[i].enclosure(prec)

    # samples: one simplest rational inside every open region between
    # consecutive critical directions, every rational critical direction
    # exactly, every irrational one in quadratic-surd arithmetic
    samples = []
    if unique:
        first_lo, last_hi = encl[0][0], encl[-1][1]
        floor_first = first_lo.numerator // first_lo.denominator
        samples.append((Fraction(floor_first - 1), (None, first_lo)))
        for i, r in enumerate(unique):
            if r.is_rational:
                samples.append((r.value, (r.value, r.value)))
            else:
                samples.append((r, None))
            if i + 1 < len(unique):
                gap = (encl[i][1], encl[i + 1][0])
                samples.append((simplest_between(*gap), gap))
        floor_last = last_hi.numerator // last_hi.denominator
        samples.append((Fraction(floor_last + 2), (last_hi, None)))
    else:
        samples.append((Fraction(0), (None, None)))

    real_feasible = False
    for direction, region in samples:
        if isinstance(direction, Root):
            verdict, _ = t_verdict(items_at_root(direction))
            if verdict != INFEAS:
                # irrational direction: no rational point on this ray
                real_feasible = True
            continue
        verdict, data = t_verdict(items_at(direction.numerator,
                                           direction.denominator))
        if verdict == INFEAS:
            continue
        x = _witness_at_direction(direction, verdict, data, atoms, region,
                                  eq_atoms)
        if x is not None:
            return Decided("sat", witness=x)
        real_feasible = True

    # the vertical direction (0, 1)
    verdict, data = t_verdict([(co[0], rel, c)
                               for co, (_, rel, c) in zip(qpolys, atoms)])
    if verdict != INFEAS:
        x = _witness_at_direction("inf", verdict, data, atoms, (None, None),
                                  eq_atoms)
        if x is not None:
            return Decided("sat", witness=x)
        real_feasible = True

    if real_feasible:
        return Decided("unknown",
                       reason="feasible, but no rational witness was found")
    return Decided("unsat")


# ---------------------------------------------------------------------------
# command interpreter


def format_rational(v):
    num, den = v.numerator, v.denominator
    if num < 0:
        body = str(-num) if den == 1 else f"(/ {-num} {den})"
        return f"(- {body})"
    return str(num) if den == 1 else f"(/ {num} {den})"


def run_script(text, out):
    try:
        commands = parse_sexprs(tokenize(text))
    except Unsupported as exc:
        out.write(f"(error \"{exc}\")\n")
        return 1
    var_index = {}
    var_names = []
    atoms = []
    unsupported_reason = ""
    model = None
    status = None
    for cmd in commands:
        if not isinstance(cmd, list) or not cmd:
            continue
        head = cmd[0]
        if head in ("set-logic", "set-option", "set-info", "exit", "push",
                    "pop", "reset"):
            continue
        if head == "declare-const" and len(cmd) == 3:
            if cmd[2] != "Real":
                out.write("(error \"only Real constants are supported\")\n")
                return 1
            var_index[cmd[1]] = len(var_names)
            var_names.append(cmd[1])
        elif head == "declare-fun" and len(cmd) == 4 and cmd[2] == []:
            var_index[cmd[1]] = len(var_names)
            var_names.append(cmd[1])
        elif head == "assert":
            if atoms is not None:
                try:
                    atoms.append(parse_atom(cmd[1], var_index))
                except Unsupported as exc:
                    atoms = None
                    unsupported_reason = str(exc)
        elif head == "check-sat":
            if atoms is None:
                status = Decided("unknown", reason=unsupported_reason)
            else:
                try:
                    status = decide(len(var_names), atoms)
                except Unsupported as exc:
                    status = Decided("unknown", reason=str(exc))
            if status.status == "sat" and status.witness is not None \
                    and len(status.witness) == len(var_names) \
                    and not verify_witness(atoms, status.witness):
                status = Decided("unknown", reason="witness verification failed")
            out.write(status.status + "\n")
            if status.status == "sat":
                model = status.witness
        elif head == "get-model":
            if model is None:
                out.write("(error \"model is not available\")\n")
            else:
                lines = ["(model"]
                for name, value in zip(var_names, model):
                    lines.append(
                        f"  (define-fun {name} () Real {format_rational(value)})")
                lines.append(")")
                out.write("\n".join(lines) + "\n")
        elif head == "get-info":
            if len(cmd) > 1 and cmd[1] == ":reason-unknown":
                reason = status.reason if status is not None else ""
                out.write(f"(:reason-unknown \"{reason}\")\n")
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if argv:
        with open(argv[0], "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    code = run_script(text, sys.stdout)
    sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
