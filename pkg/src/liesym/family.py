"""The quasi-linear residual family and its distinguished vector fields.

Residual form:

    delta = uxx + uyy + (a/x) ux - g1 x^r u^c1 - g2 u^c2      (a != 0)

The pair of exponent relations c1 = 1 + 2(r+2)/a, c2 = 1 + 4/a singles
out the instances that admit the exceptional field
X = 2xy d/dx + (y^2 - x^2) d/dy - a y u d/du.  The r = 2, a = -1 member
is the Grad-Schlueter-Shafranov form used as the "gss" preset.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, SamplingError
from .expr import Expr, Num, Sum, add, as_expr, eval_at, mul, num, pow_, sym
from .jets import (
    JetPoint,
    VectorField,
    apply_prolonged,
    prolong2,
    sample_jet_env,
)

_X = sym("x")
_Y = sym("y")
_U = sym("u")
_UX = sym("ux")
_UXX = sym("uxx")
_UYY = sym("uyy")
_A = sym("a")


def as_fraction(value) -> Fraction:
    """Exact rational from int/Fraction/decimal string/float literal."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def family_residual(a, r, c1, c2, gamma1, gamma2) -> Expr:
    """Assemble the residual; arguments may be numbers or expressions,
    so the same builder serves numeric instances and symbolic work."""
    a, r, c1, c2, gamma1, gamma2 = map(as_expr, (a, r, c1, c2, gamma1, gamma2))
    return add(
        _UXX,
        _UYY,
        mul(a, pow_(_X, num(-1)), _UX),
        mul(num(-1), gamma1, pow_(_X, r), pow_(_U, c1)),
        mul(num(-1), gamma2, pow_(_U, c2)),
    )


def exceptional_exponents(a, r) -> tuple[Fraction, Fraction]:
    """Exponent pair admitting the exceptional symmetry, exact in
    rational arithmetic: c1 = 1 + 2(r+2)/a and c2 = 1 + 4/a."""
    a = as_fraction(a)
    r = as_fraction(r)
    if a == 0:
        raise ValueError("parameter a must be nonzero")
    return 1 + 2 * (r + 2) / a, 1 + Fraction(4) / a


@dataclass(frozen=True)
class PDEInstance:
    a: Fraction
    r: Fraction
    c1: Fraction
    c2: Fraction
    gamma1: Fraction
    gamma2: Fraction
    delta: Expr

    @property
    def is_exceptional(self) -> bool:
        ec1, ec2 = exceptional_exponents(self.a, self.r)
        return self.c1 == ec1 and self.c2 == ec2

    def params(self) -> dict[str, Fraction]:
        return {
            "a": self.a, "r": self.r, "c1": self.c1, "c2": self.c2,
            "gamma1": self.gamma1, "gamma2": self.gamma2,
        }


def build_instance(a, r, c1, c2, gamma1, gamma2) -> PDEInstance:
    a = as_fraction(a)
    if a == 0:
        raise ValueError("parameter a must be nonzero")
    r, c1, c2, gamma1, gamma2 = map(as_fraction, (r, c1, c2, gamma1, gamma2))
    delta = family_residual(a, r, c1, c2, gamma1, gamma2)
    return PDEInstance(a, r, c1, c2, gamma1, gamma2, delta)


def gss_preset() -> PDEInstance:
    """Grad-Schlueter-Shafranov form: a=-1, r=2, exceptional exponents
    (-7, -3), source strengths gamma1=-3/2, gamma2=1/4 matching the
    closed-form power solution."""
    return build_instance(-1, 2, -7, -3, Fraction(-3, 2), Fraction(1, 4))


PRESETS = {"gss": gss_preset}


def exceptional_vf() -> VectorField:
    """X = 2xy d/dx + (y^2 - x^2) d/dy - a y u d/du, with a symbolic."""
    return VectorField(
        mul(num(2), _X, _Y),
        add(pow_(_Y, num(2)), mul(num(-1), pow_(_X, num(2)))),
        mul(num(-1), _A, _Y, _U),
    )


def scaling_vf() -> VectorField:
    """X' = x d/dx + y d/dy - (a/2) u d/du, with a symbolic."""
    return VectorField(_X, _Y, mul(Num(Fraction(-1, 2)), _A, _U))


def rotation_like_vf() -> VectorField:
    """Y = y d/dx + x d/dy, the hyperbolic rotation annihilating x^2 - y^2."""
    return VectorField(_Y, _X, Num(Fraction(0)))


def y_translation_vf() -> VectorField:
    return VectorField(Num(Fraction(0)), Num(Fraction(1)), Num(Fraction(0)))


NAMED_FIELDS = {
    "X": exceptional_vf,
    "Xprime": scaling_vf,
    "Y": rotation_like_vf,
    "dy": y_translation_vf,
}


@dataclass(frozen=True)
class SymmetryVerdict:
    admitted: bool
    status: str  # "admitted" | "refuted" | "inconclusive"
    max_onshell_residual: float
    sample_count: int
    worst_point: JetPoint
    resampled: int

    def to_dict(self) -> dict:
        return {
            "admitted": self.admitted,
            "status": self.status,
            "max_onshell_residual": self.max_onshell_residual,
            "sample_count": self.sample_count,
            "resampled": self.resampled,
            "worst_point": self.worst_point.as_env(),
        }


def solve_uyy(inst: PDEInstance, env: dict[str, float]) -> float:
    """uyy has unit coefficient in the residual, so solving delta = 0 for
    it is division-free: uyy = -(delta with uyy set to 0)."""
    probe = dict(env)
    probe["uyy"] = 0.0
    return -eval_at(inst.delta, probe)


def check_onshell_symmetry(
    vf: VectorField,
    inst: PDEInstance,
    n_samples: int = 200,
    tol: float = 1e-9,
    seed: int = 42,
    refute_threshold: float = 1e-3,
) -> SymmetryVerdict:
    """Decide numerically whether a field is a symmetry on the solution
    manifold of an instance.

    At each seeded random jet point, uyy is eliminated through the
    residual and the prolonged field applied to the residual is
    evaluated there.  Each value is normalized by the magnitude of the
    largest single term, since the terms cancel catastrophically when
    the symmetry holds.  All samples below ``tol`` means admitted; at
    least one above ``refute_threshold`` means refuted; anything in
    between is reported as inconclusive.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    bound = vf.bind(a=inst.a) if "a" in (
        vf.xi1.free_symbols() | vf.xi2.free_symbols() | vf.phi.free_symbols()
    ) else vf
    applied = apply_prolonged(prolong2(bound), inst.delta)
    terms = applied.terms if isinstance(applied, Sum) else (applied,)

    rng = random.Random(seed)
    worst = None
    worst_val = -1.0
    good = 0
    resampled = 0
    budget = 10 * n_samples
    while good < n_samples:
        if resampled >= budget:
            raise SamplingError(
                f"exceeded retry budget ({budget}) while sampling jet points")
        env = sample_jet_env(rng)
        try:
            env["uyy"] = solve_uyy(inst, env)
            values = [eval_at(t, env) for t in terms]
        except DomainError:
            resampled += 1
            continue
        good += 1
        total = 0.0
        scale = 0.0
        for value in values:
            total += value
            scale = max(scale, abs(value))
        rel = abs(total) / (1.0 + scale)
        if rel > worst_val:
            worst_val = rel
            worst = JetPoint(**env)
    if worst_val <= tol:
        status = "admitted"
    elif worst_val >= refute_threshold:
        status = "refuted"
    else:
        status = "inconclusive"
    return SymmetryVerdict(
        admitted=status == "admitted",
        status=status,
        max_onshell_residual=worst_val,
        sample_count=good,
        worst_point=worst,
        resampled=resampled,
    )
