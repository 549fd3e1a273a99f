"""Differential checks of the expression kernel against sympy.

sympy is not a dependency of the package; these tests run only where it
happens to be installed and give an independent route to the same
numbers: evaluation, differentiation, expansion, and the closed-form
solution residuals.
"""

import random
from fractions import Fraction

import pytest

sympy = pytest.importorskip("sympy")

from liesym import (  # noqa: E402
    DomainError,
    Log,
    Num,
    Power,
    Product,
    Sum,
    Sym,
    diff,
    eval_at,
    expand,
    gss_preset,
    mul,
    num,
    parse,
    pow_,
    simplify,
    sym,
)


def to_sympy(e, syms):
    if isinstance(e, Num):
        return sympy.Rational(e.value.numerator, e.value.denominator)
    if isinstance(e, Sym):
        return syms[e.name]
    if isinstance(e, Sum):
        return sympy.Add(*[to_sympy(t, syms) for t in e.terms])
    if isinstance(e, Product):
        return sympy.Mul(*[to_sympy(f, syms) for f in e.factors])
    if isinstance(e, Power):
        return sympy.Pow(to_sympy(e.base, syms), to_sympy(e.exponent, syms))
    if isinstance(e, Log):
        return sympy.log(to_sympy(e.arg, syms))
    raise TypeError(e)


def positive_symbols(e):
    return {n: sympy.Symbol(n, positive=True) for n in e.free_symbols()}


def random_expr(rng, depth):
    pool = [sym("x"), sym("y"), sym("u"), sym("s"), sym("a")]
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.35:
            return Num(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        return rng.choice(pool)
    kind = rng.randrange(3)
    if kind == 0:
        return mul(*(random_expr(rng, depth - 1) for _ in range(2)))
    if kind == 1:
        return random_expr(rng, depth - 1) + random_expr(rng, depth - 1)
    exponent = rng.choice([-2, -1, 2, 3, Fraction(1, 2), Fraction(-3, 2)])
    return pow_(random_expr(rng, depth - 1), num(exponent))


def agree(mine, theirs, env, syms, rel=1e-9):
    try:
        lhs = eval_at(mine, env)
    except DomainError:
        return True  # negative base under a fractional power: skip point
    rhs = float(theirs.evalf(subs={syms[n]: env[n] for n in env if n in syms}))
    return abs(lhs - rhs) <= rel * (1 + max(abs(lhs), abs(rhs)))


class TestAgainstSympy:
    def test_random_values_and_derivatives(self):
        rng = random.Random(987654)
        for _ in range(120):
            e = random_expr(rng, 3)
            syms = positive_symbols(e)
            if not syms:
                continue
            se = to_sympy(e, syms)
            wrt = rng.choice(sorted(syms))
            d = diff(e, wrt)
            sd = sympy.diff(se, syms[wrt])
            for _ in range(3):
                env = {n: rng.uniform(0.5, 2.0) for n in syms}
                assert agree(e, se, env, syms)
                assert agree(d, sd, env, syms)

    def test_canonicalization_preserves_value(self):
        rng = random.Random(24680)
        for _ in range(120):
            e = random_expr(rng, 3)
            forms = (simplify(e), expand(e), simplify(expand(e)))
            env = {n: rng.uniform(0.5, 2.0) for n in e.free_symbols()}
            try:
                ref = eval_at(e, env)
            except DomainError:
                continue
            for f in forms:
                assert eval_at(f, env) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    def test_gss_residual_on_family_solution(self):
        # independent route to criterion 3's claim, at one grid of points
        x, y = sympy.symbols("x y", real=True)
        lam = sympy.Rational(1)
        b = y + lam * (x**2 + y**2)
        u = (x**2 - b**2) ** sympy.Rational(1, 4)
        residual = (
            sympy.diff(u, x, 2) + sympy.diff(u, y, 2)
            + (-1 / x) * sympy.diff(u, x)
            + sympy.Rational(3, 2) * x**2 * u**-7
            - sympy.Rational(1, 4) * u**-3
        )
        gss = gss_preset()
        from liesym import family_solution, substitute

        sol = family_solution(-1, Fraction(1))
        mine = substitute(gss.delta, sol.jet())
        rng = random.Random(13)
        checked = 0
        while checked < 25:
            px = rng.uniform(-1.1, 1.1)
            py = rng.uniform(-1.1, 0.2)
            if not sol.domain(px, py):
                continue
            checked += 1
            sym_val = float(residual.evalf(subs={x: px, y: py}))
            my_val = eval_at(mine, {"x": px, "y": py})
            assert my_val == pytest.approx(sym_val, abs=1e-7)
            assert abs(my_val) <= 1e-7

    def test_reduced_equation_matches_sympy_route(self):
        # substitute a concrete smooth profile u = (x^2-y^2)^2 + 1 into the
        # residual with sympy and compare against the reduced expression
        x, y = sympy.symbols("x y", positive=True)
        u_prof = (x**2 - y**2) ** 2 + 1
        delta_prof = (
            sympy.diff(u_prof, x, 2) + sympy.diff(u_prof, y, 2)
            + (-1 / x) * sympy.diff(u_prof, x)
            + sympy.Rational(3, 2) * x**2 * u_prof**-7
            - sympy.Rational(1, 4) * u_prof**-3
        )

        from liesym import reduce_to_invariant

        red = reduce_to_invariant(gss_preset()).expr
        rng = random.Random(29)
        for _ in range(25):
            px = rng.uniform(0.8, 1.8)
            py = rng.uniform(-0.4, 0.4)
            sv = px * px - py * py
            theirs = float(delta_prof.evalf(subs={x: px, y: py}))
            mine = eval_at(red, {
                "x": px, "s": sv,
                "v": sv * sv + 1, "vs": 2 * sv, "vss": 2.0,
            })
            assert mine == pytest.approx(theirs, rel=1e-9)

    def test_printed_forms_reparse_in_sympy(self):
        # the text format is close enough to sympy's to serve as a bridge
        for text in (
            "x^2 - y^2",
            "1 + 2*lam*y + lam^2*(x^2 + y^2)",
            "-4*s*vss - 2*vs - 1/4*v^(-3)",
        ):
            e = parse(text)
            syms = positive_symbols(e)
            bridged = sympy.sympify(
                text.replace("^", "**"), locals=dict(syms))
            assert sympy.simplify(to_sympy(e, syms) - bridged) == 0
