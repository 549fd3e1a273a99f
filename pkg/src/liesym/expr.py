"""Minimal symbolic kernel: expression trees with canonical forms.

Nodes are immutable; every constructor (``num``, ``sym``, ``add``, ``mul``,
``pow_``, ``log_``) returns a canonicalized tree, so any two expressions
built from the same mathematical content through these constructors compare
structurally equal.  Canonical form means:

  * n-ary sums/products are flattened and sorted by a fixed total order;
  * numeric content is kept exact (``Fraction``) and merged into a single
    leading constant per product / single constant term per sum;
  * like terms in a sum are collected; like bases in a product merge by
    adding exponents symbolically;
  * ``b^0 -> 1``, ``b^1 -> b``, ``(b^p)^q -> b^(p*q)``, and powers
    distribute over product bases;
  * a sum whose terms all share a power of a common base factors that
    power out (needed so composed solutions collapse to closed form).

Powers are real-valued: fractional exponents require a positive base (this
is what justifies the power-collapse and distribution rules above; every
formula handled here lives on positive bases).  Integer exponents accept
any nonzero base.  Products are never expanded over sums automatically;
``expand`` is a separate, explicit operation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import DomainError, SamplingError, UnboundSymbolError

# Reserved alphabet: jet coordinates, reduction variables, parameters.
RESERVED_NAMES = (
    "x", "y", "u", "ux", "uy", "uxx", "uxy", "uyy",
    "s", "v", "vs", "vss",
    "a", "r", "c1", "c2", "g1", "g2", "lam",
)

_KIND_NUM = 0
_KIND_SYM = 1
_KIND_POW = 2
_KIND_LOG = 3
_KIND_PRODUCT = 4
_KIND_SUM = 5


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_hash", "_free")

    def sort_key(self):
        raise NotImplementedError

    def free_symbols(self) -> frozenset[str]:
        if self._free is None:
            self._free = self._compute_free()
        return self._free

    def _compute_free(self) -> frozenset[str]:
        raise NotImplementedError

    def __hash__(self):
        return self._hash

    # Arithmetic sugar; delegates to the canonicalizing constructors.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(_MINUS_ONE, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(_MINUS_ONE, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, pow_(as_expr(other), _MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), pow_(self, _MINUS_ONE))

    def __pow__(self, other):
        return pow_(self, as_expr(other))

    def __neg__(self):
        return mul(_MINUS_ONE, self)

    def __repr__(self):
        return to_text(self)


class Num(Expr):
    """Exact rational constant."""

    __slots__ = ("value",)

    def __init__(self, value: Fraction):
        self.value = value
        self._hash = hash((_KIND_NUM, value))
        self._free = frozenset()

    def sort_key(self):
        return (_KIND_NUM, self.value)

    def _compute_free(self):
        return frozenset()

    def __eq__(self, other):
        return isinstance(other, Num) and self.value == other.value

    __hash__ = Expr.__hash__


class Sym(Expr):
    """Reference to a named symbol."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash((_KIND_SYM, name))
        self._free = frozenset((name,))

    def sort_key(self):
        return (_KIND_SYM, self.name)

    def _compute_free(self):
        return frozenset((self.name,))

    def __eq__(self, other):
        return isinstance(other, Sym) and self.name == other.name

    __hash__ = Expr.__hash__


class Power(Expr):
    __slots__ = ("base", "exponent", "_key")

    def __init__(self, base: Expr, exponent: Expr):
        self.base = base
        self.exponent = exponent
        self._hash = hash((_KIND_POW, base, exponent))
        self._free = None
        self._key = None

    def sort_key(self):
        if self._key is None:
            self._key = (_KIND_POW, self.base.sort_key(), self.exponent.sort_key())
        return self._key

    def _compute_free(self):
        return self.base.free_symbols() | self.exponent.free_symbols()

    def __eq__(self, other):
        return (
            isinstance(other, Power)
            and self._hash == other._hash
            and self.base == other.base
            and self.exponent == other.exponent
        )

    __hash__ = Expr.__hash__


class Log(Expr):
    """Natural logarithm; only produced by differentiating symbolic
    exponents, and accepted back by the parser as ``log(...)``."""

    __slots__ = ("arg", "_key")

    def __init__(self, arg: Expr):
        self.arg = arg
        self._hash = hash((_KIND_LOG, arg))
        self._free = None
        self._key = None

    def sort_key(self):
        if self._key is None:
            self._key = (_KIND_LOG, self.arg.sort_key())
        return self._key

    def _compute_free(self):
        return self.arg.free_symbols()

    def __eq__(self, other):
        return isinstance(other, Log) and self.arg == other.arg

    __hash__ = Expr.__hash__


class Product(Expr):
    __slots__ = ("factors", "_key")

    def __init__(self, factors: tuple[Expr, ...]):
        self.factors = factors
        self._hash = hash((_KIND_PRODUCT, factors))
        self._free = None
        self._key = None

    def sort_key(self):
        if self._key is None:
            self._key = (_KIND_PRODUCT, tuple(f.sort_key() for f in self.factors))
        return self._key

    def _compute_free(self):
        out = frozenset()
        for f in self.factors:
            out |= f.free_symbols()
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Product)
            and self._hash == other._hash
            and self.factors == other.factors
        )

    __hash__ = Expr.__hash__


class Sum(Expr):
    __slots__ = ("terms", "_key")

    def __init__(self, terms: tuple[Expr, ...]):
        self.terms = terms
        self._hash = hash((_KIND_SUM, terms))
        self._free = None
        self._key = None

    def sort_key(self):
        if self._key is None:
            self._key = (_KIND_SUM, tuple(t.sort_key() for t in self.terms))
        return self._key

    def _compute_free(self):
        out = frozenset()
        for t in self.terms:
            out |= t.free_symbols()
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Sum)
            and self._hash == other._hash
            and self.terms == other.terms
        )

    __hash__ = Expr.__hash__


# ---------------------------------------------------------------------------
# canonicalizing constructors


def num(value) -> Num:
    """Exact constant. Floats are read as their shortest decimal literal,
    so ``num(0.1) == Fraction(1, 10)``."""
    if isinstance(value, Fraction):
        return Num(value)
    if isinstance(value, int):
        return Num(Fraction(value))
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite constant {value!r}")
        return Num(Fraction(repr(value)))
    if isinstance(value, str):
        return Num(Fraction(value))
    raise TypeError(f"cannot make a numeric constant from {value!r}")


def sym(name: str) -> Sym:
    if not name.isidentifier():
        raise ValueError(f"bad symbol name {name!r}")
    return Sym(name)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return num(value)


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))
_MINUS_ONE = Num(Fraction(-1))


def pow_(base, exponent) -> Expr:
    b = as_expr(base)
    p = as_expr(exponent)
    if isinstance(p, Num):
        if p.value == 0:
            return ONE
        if p.value == 1:
            return b
    if isinstance(b, Num):
        if b.value == 1:
            return ONE
        if b.value == 0:
            if isinstance(p, Num) and p.value > 0:
                return ZERO
            return Power(b, p)  # 0^negative / 0^symbolic: error at eval time
        if isinstance(p, Num) and p.value.denominator == 1:
            return Num(b.value ** p.value.numerator)
    if isinstance(b, Power):
        return pow_(b.base, mul(b.exponent, p))
    if isinstance(b, Product):
        # integer powers distribute unconditionally; fractional/symbolic
        # ones assume positive factors, so a negative coefficient must
        # stay inside the power or (-1)^p would leave the real domain
        integral = isinstance(p, Num) and p.value.denominator == 1
        if integral or not (
            isinstance(b.factors[0], Num) and b.factors[0].value < 0
        ):
            return mul(*[pow_(f, p) for f in b.factors])
    return Power(b, p)


def log_(arg) -> Expr:
    a = as_expr(arg)
    if a == ONE:
        return ZERO
    return Log(a)


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        e = as_expr(f)
        if isinstance(e, Product):
            flat.extend(e.factors)
        else:
            flat.append(e)

    coeff = Fraction(1)
    bases: list[Expr] = []
    exps: dict[Expr, list[Expr]] = {}
    for f in flat:
        if isinstance(f, Num):
            coeff *= f.value
            continue
        if isinstance(f, Power):
            b, e = f.base, f.exponent
        else:
            b, e = f, ONE
        if b in exps:
            exps[b].append(e)
        else:
            exps[b] = [e]
            bases.append(b)
    if coeff == 0:
        return ZERO

    rebuilt: list[Expr] = []
    for b in bases:
        elist = exps[b]
        f = pow_(b, elist[0] if len(elist) == 1 else add(*elist))
        if isinstance(f, Num):
            coeff *= f.value
        elif isinstance(f, Product):
            # pow_ distributed over a product base; fold its pieces back in
            for g in f.factors:
                if isinstance(g, Num):
                    coeff *= g.value
                else:
                    rebuilt.append(g)
        elif isinstance(f, Sum):
            # sign-normalize bare sum factors so that s and -s cannot both
            # appear as canonical factors (e.g. (y^2-x^2) vs (x^2-y^2))
            flipped = add(*[mul(_MINUS_ONE, t) for t in f.terms])
            if isinstance(flipped, Sum) and flipped.sort_key() < f.sort_key():
                coeff = -coeff
                f = flipped
            rebuilt.append(f)
        else:
            rebuilt.append(f)
    if coeff == 0:
        return ZERO
    if not rebuilt:
        return Num(coeff)
    # a lone sum scaled by a constant absorbs the constant termwise, so the
    # two ways of writing -(p + q) canonicalize identically
    if len(rebuilt) == 1 and isinstance(rebuilt[0], Sum) and coeff != 1:
        c = Num(coeff)
        return add(*[mul(c, t) for t in rebuilt[0].terms])
    if len(rebuilt) == 1 and coeff == 1:
        return rebuilt[0]
    rebuilt.sort(key=lambda e: e.sort_key())
    if coeff != 1:
        rebuilt.insert(0, Num(coeff))
    return Product(tuple(rebuilt))


def _strip_coeff(term: Expr) -> tuple[Fraction, Expr]:
    """Split a canonical non-Num term into (numeric coefficient, rest)."""
    if isinstance(term, Product) and isinstance(term.factors[0], Num):
        c = term.factors[0].value
        rest = term.factors[1:]
        return c, (rest[0] if len(rest) == 1 else Product(rest))
    return Fraction(1), term


def _power_pairs(term: Expr) -> tuple[Fraction, dict[Expr, Expr]]:
    """Decompose a canonical term into coefficient and {base: exponent}."""
    coeff = Fraction(1)
    pairs: dict[Expr, Expr] = {}
    factors = term.factors if isinstance(term, Product) else (term,)
    for f in factors:
        if isinstance(f, Num):
            coeff *= f.value
        elif isinstance(f, Power):
            pairs[f.base] = f.exponent
        else:
            pairs[f] = ONE
    return coeff, pairs


def _factor_common(terms: tuple[Expr, ...]) -> Expr | None:
    """Factor powers of bases common to every term of a sum.

    A base qualifies when it occurs in all terms and the pairwise exponent
    differences are numeric; the smallest exponent is pulled out.  Returns
    the factored product, or None when nothing qualifies.
    """
    decomps = [_power_pairs(t) for t in terms]
    first = decomps[0][1]
    extracted: list[tuple[Expr, Expr]] = []
    for base in first:
        if not all(base in d for _, d in decomps[1:]):
            continue
        e0 = first[base]
        diffs: list[Fraction] = []
        ok = True
        for _, d in decomps:
            delta = add(d[base], mul(_MINUS_ONE, e0))
            if isinstance(delta, Num):
                diffs.append(delta.value)
            else:
                ok = False
                break
        if not ok:
            continue
        m = add(e0, Num(min(diffs)))
        if isinstance(m, Num) and m.value == 0:
            continue
        extracted.append((base, m))
    if not extracted:
        return None
    common = {b: m for b, m in extracted}
    reduced = []
    for (coeff, pairs), _t in zip(decomps, terms):
        parts = [Num(coeff)]
        for b, e in pairs.items():
            if b in common:
                e = add(e, mul(_MINUS_ONE, common[b]))
            parts.append(pow_(b, e))
        reduced.append(mul(*parts))
    return mul(*[pow_(b, m) for b, m in extracted], add(*reduced))


def add(*terms) -> Expr:
    return _add_terms(terms, factor=True)


def _add_terms(terms, factor: bool) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        e = as_expr(t)
        if isinstance(e, Sum):
            flat.extend(e.terms)
        else:
            flat.append(e)

    const = Fraction(0)
    order: list[Expr] = []
    coeffs: dict[Expr, Fraction] = {}
    for t in flat:
        if isinstance(t, Num):
            const += t.value
            continue
        c, key = _strip_coeff(t)
        if key in coeffs:
            coeffs[key] += c
        else:
            coeffs[key] = c
            order.append(key)

    rebuilt: list[Expr] = []
    for key in order:
        c = coeffs[key]
        if c == 0:
            continue
        rebuilt.append(key if c == 1 else mul(Num(c), key))
    if not rebuilt:
        return Num(const)
    if const == 0 and len(rebuilt) == 1:
        return rebuilt[0]
    if factor and const == 0 and len(rebuilt) > 1:
        factored = _factor_common(tuple(rebuilt))
        if factored is not None:
            return factored
    if const != 0:
        rebuilt.append(Num(const))
    rebuilt.sort(key=lambda e: e.sort_key())
    return Sum(tuple(rebuilt))


def simplify(e: Expr) -> Expr:
    """Rebuild bottom-up through the canonicalizing constructors.

    Idempotent: constructor output is already canonical.
    """
    if isinstance(e, (Num, Sym)):
        return e
    if isinstance(e, Sum):
        return add(*[simplify(t) for t in e.terms])
    if isinstance(e, Product):
        return mul(*[simplify(f) for f in e.factors])
    if isinstance(e, Power):
        return pow_(simplify(e.base), simplify(e.exponent))
    if isinstance(e, Log):
        return log_(simplify(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0


# ---------------------------------------------------------------------------
# calculus and substitution


def diff(e: Expr, wrt) -> Expr:
    """Partial derivative; every other symbol is held constant."""
    name = wrt.name if isinstance(wrt, Sym) else wrt
    return _diff(e, name)


def _diff(e: Expr, name: str) -> Expr:
    if name not in e.free_symbols():
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Sum):
        return add(*[_diff(t, name) for t in e.terms])
    if isinstance(e, Product):
        parts = []
        for i, f in enumerate(e.factors):
            if name not in f.free_symbols():
                continue
            rest = e.factors[:i] + e.factors[i + 1:]
            parts.append(mul(_diff(f, name), *rest))
        return add(*parts)
    if isinstance(e, Power):
        b, p = e.base, e.exponent
        if name not in p.free_symbols():
            return mul(p, pow_(b, add(p, _MINUS_ONE)), _diff(b, name))
        # exponent depends on the variable: d(b^p) = b^p (p' log b + p b'/b)
        return mul(
            e,
            add(
                mul(_diff(p, name), log_(b)),
                mul(p, _diff(b, name), pow_(b, _MINUS_ONE)),
            ),
        )
    if isinstance(e, Log):
        return mul(_diff(e.arg, name), pow_(e.arg, _MINUS_ONE))
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous one-pass substitution followed by canonicalization.

    Replacements are never re-substituted, so swaps like
    ``{x: y, y: x}`` behave as expected.
    """
    table: dict[str, Expr] = {}
    for k, v in bindings.items():
        name = k.name if isinstance(k, Sym) else k
        table[name] = as_expr(v)
    return _substitute(e, table)


def _substitute(e: Expr, table: dict[str, Expr]) -> Expr:
    if not (e.free_symbols() & table.keys()):
        return e
    if isinstance(e, Sym):
        return table.get(e.name, e)
    if isinstance(e, Sum):
        return add(*[_substitute(t, table) for t in e.terms])
    if isinstance(e, Product):
        return mul(*[_substitute(f, table) for f in e.factors])
    if isinstance(e, Power):
        return pow_(_substitute(e.base, table), _substitute(e.exponent, table))
    if isinstance(e, Log):
        return log_(_substitute(e.arg, table))
    raise TypeError(f"not an expression: {e!r}")


def expand(e: Expr) -> Expr:
    """Explicitly expand products (and small integer powers) over sums.

    Not part of canonicalization; used where cancellation across sum
    terms must become visible, e.g. collecting a reduced equation.  The
    result is a flat sum of monomial-like terms: the common-factor rule
    of ``add`` is suspended here, since re-nesting would undo the work.
    Feeding the result back through the constructors (or ``simplify``)
    re-canonicalizes it.
    """
    if isinstance(e, (Num, Sym)):
        return e
    if isinstance(e, Sum):
        return _add_terms([expand(t) for t in e.terms], factor=False)
    if isinstance(e, Log):
        return log_(expand(e.arg))
    if isinstance(e, Product):
        buckets: list[list[Expr]] = [[]]
        for f in e.factors:
            f = expand(f)
            if isinstance(f, Sum):
                buckets = [b + [t] for b in buckets for t in f.terms]
            else:
                for b in buckets:
                    b.append(f)
        return _add_terms([mul(*b) for b in buckets], factor=False)
    if isinstance(e, Power):
        b = expand(e.base)
        p = expand(e.exponent)
        r = pow_(b, p)
        if not isinstance(r, Power):
            return expand(r)
        if (
            isinstance(r.base, Sum)
            and isinstance(r.exponent, Num)
            and r.exponent.value.denominator == 1
            and 2 <= r.exponent.value <= 16
        ):
            # cross-multiply term lists; going through mul() on whole sums
            # would just re-merge them into the original power
            cross: list[Expr] = list(r.base.terms)
            for _ in range(int(r.exponent.value) - 1):
                cross = [mul(t1, t2) for t1 in cross for t2 in r.base.terms]
            return _add_terms([expand(t) for t in cross], factor=False)
        return r
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# numeric evaluation


def _real_pow(b: float, p: float) -> float:
    if b > 0.0:
        try:
            return math.pow(b, p)
        except OverflowError as exc:
            raise DomainError(f"overflow in {b!r}^{p!r}") from exc
    if b == 0.0:
        if p > 0.0:
            return 0.0
        if p == 0.0:
            return 1.0
        raise DomainError("0 raised to a negative power")
    if p == int(p):
        try:
            return math.pow(b, p)
        except OverflowError as exc:
            raise DomainError(f"overflow in {b!r}^{p!r}") from exc
    raise DomainError(f"fractional power of negative base {b!r}")


def _real_log(v: float) -> float:
    if v <= 0.0:
        raise DomainError(f"log of non-positive value {v!r}")
    return math.log(v)


def eval_at(e: Expr, env: Mapping[str, float]) -> float:
    """Evaluate to an IEEE double.  Every free symbol must be bound."""
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Sym):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundSymbolError(f"symbol {e.name!r} not bound") from None
    if isinstance(e, Sum):
        total = 0.0
        for t in e.terms:
            total += eval_at(t, env)
        return total
    if isinstance(e, Product):
        out = 1.0
        for f in e.factors:
            out *= eval_at(f, env)
        if math.isinf(out):
            raise DomainError("overflow in product")
        return out
    if isinstance(e, Power):
        b = eval_at(e.base, env)
        if isinstance(e.exponent, Num) and e.exponent.value.denominator == 1:
            n = e.exponent.value.numerator
            if b == 0.0 and n < 0:
                raise DomainError("0 raised to a negative power")
            try:
                return float(b) ** n
            except OverflowError as exc:
                raise DomainError(f"overflow in {b!r}^{n}") from exc
        return _real_pow(b, eval_at(e.exponent, env))
    if isinstance(e, Log):
        return _real_log(eval_at(e.arg, env))
    raise TypeError(f"not an expression: {e!r}")


def to_callable(e: Expr, arg_names: Iterable[str]) -> Callable[..., float]:
    """Compile to a positional-argument Python function.

    Same real-power semantics as ``eval_at`` (raises DomainError off
    domain); used on hot paths such as grid evaluation.
    """
    names = list(arg_names)
    missing = e.free_symbols() - set(names)
    if missing:
        raise UnboundSymbolError(f"unbound symbols {sorted(missing)}")
    src = _emit(e)
    code = compile(f"lambda {', '.join(names)}: {src}" if names else f"lambda: {src}",
                   "<liesym>", "eval")
    return eval(code, {"_pow": _real_pow, "_log": _real_log})  # noqa: S307


def _emit(e: Expr) -> str:
    if isinstance(e, Num):
        return f"({float(e.value)!r})"
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Sum):
        return "(" + " + ".join(_emit(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(_emit(f) for f in e.factors) + ")"
    if isinstance(e, Power):
        if isinstance(e.exponent, Num) and e.exponent.value.denominator == 1:
            return f"_pow({_emit(e.base)}, {float(e.exponent.value)!r})"
        return f"_pow({_emit(e.base)}, {_emit(e.exponent)})"
    if isinstance(e, Log):
        return f"_log({_emit(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# randomized equivalence testing


@dataclass(frozen=True)
class SampleSpec:
    """How to sample environments for randomized identity testing.

    Symbols default to the positive interval [0.5, 2]; individual
    symbols can be widened through ``intervals``.  ``accept`` can
    restrict sampling to a joint region (a rejected draw counts
    against the retry budget, like a domain error).
    """

    count: int = 64
    rel_tol: float = 1e-9
    seed: int = 0
    default_interval: tuple[float, float] = (0.5, 2.0)
    intervals: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    accept: Callable[[dict[str, float]], bool] | None = None
    max_attempts_factor: int = 10

    def interval(self, name: str) -> tuple[float, float]:
        return self.intervals.get(name, self.default_interval)


@dataclass(frozen=True)
class EquivResult:
    equivalent: bool
    samples: int
    witness: dict[str, float] | None = None
    witness_values: tuple[float, float] | None = None

    def __bool__(self):
        return self.equivalent


def equiv_numeric(e1: Expr, e2: Expr, spec: SampleSpec | None = None) -> EquivResult:
    """Decide equality of two expressions on random samples.

    True iff |e1 - e2| <= tol * (1 + max(|e1|, |e2|)) at every sampled
    point; the first failing environment is returned as a witness.
    Domain errors trigger a resample, up to ``max_attempts_factor * count``
    attempts in total.
    """
    spec = spec or SampleSpec()
    names = sorted(e1.free_symbols() | e2.free_symbols())
    rng = random.Random(spec.seed)
    good = 0
    attempts = 0
    budget = spec.max_attempts_factor * spec.count
    while good < spec.count and attempts < budget:
        attempts += 1
        env = {n: rng.uniform(*spec.interval(n)) for n in names}
        if spec.accept is not None and not spec.accept(env):
            continue
        try:
            v1 = eval_at(e1, env)
            v2 = eval_at(e2, env)
        except DomainError:
            continue
        good += 1
        if abs(v1 - v2) > spec.rel_tol * (1.0 + max(abs(v1), abs(v2))):
            return EquivResult(False, good, env, (v1, v2))
    if good < spec.count:
        raise SamplingError(
            f"only {good}/{spec.count} valid samples in {attempts} attempts")
    return EquivResult(True, good)


# ---------------------------------------------------------------------------
# printing (the parser in parsing.py reads this format back)


def _format_fraction(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _paren_base(e: Expr) -> str:
    # power bases: symbols print bare, anything compound gets parens
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Num) and e.value.denominator == 1 and e.value >= 0:
        return str(e.value.numerator)
    return f"({to_text(e)})"


def _paren_exponent(e: Expr) -> str:
    if isinstance(e, Num) and e.value.denominator == 1:
        return str(e.value.numerator) if e.value >= 0 else f"({e.value.numerator})"
    return f"({to_text(e)})"


def _product_text(factors: tuple[Expr, ...], coeff: Fraction) -> str:
    parts = []
    if coeff != 1:
        parts.append(_format_fraction(coeff))
    for f in factors:
        parts.append(f"({to_text(f)})" if isinstance(f, Sum) else to_text(f))
    return "*".join(parts)


def to_text(e: Expr) -> str:
    """Serialize to the grammar the parser accepts; canonical expressions
    round-trip exactly."""
    if isinstance(e, Num):
        return _format_fraction(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Power):
        return f"{_paren_base(e.base)}^{_paren_exponent(e.exponent)}"
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})"
    if isinstance(e, Product):
        coeff, rest = _strip_coeff(e)
        factors = rest.factors if isinstance(rest, Product) else (rest,)
        if coeff < 0:
            inner = _product_text(factors, -coeff)
            return f"-{inner}"
        return _product_text(factors, coeff)
    if isinstance(e, Sum):
        out = []
        for i, t in enumerate(e.terms):
            coeff = t.value if isinstance(t, Num) else _strip_coeff(t)[0]
            if i == 0:
                out.append(to_text(t))
            elif coeff < 0:
                out.append(f" - {to_text(mul(_MINUS_ONE, t))}")
            else:
                out.append(f" + {to_text(t)}")
        return "".join(out)
    raise TypeError(f"not an expression: {e!r}")
